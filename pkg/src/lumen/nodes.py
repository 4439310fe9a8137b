"""AST model for Lumen source.

Nodes are immutable after parsing. Ids are unique within a program and
assigned deterministically in creation order, so the same source always
yields the same ids. Spans nest: every child's span lies inside its
parent's and sibling spans never overlap, which is what makes offset ->
node lookup well defined.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from enum import Enum


class NodeKind(Enum):
    PROGRAM = "Program"
    CLASS_DEF = "ClassDef"
    METHOD_DEF = "MethodDef"
    BLOCK = "Block"
    SEQUENCE = "Sequence"
    RETURN = "Return"
    ASSIGNMENT = "Assignment"
    MESSAGE = "Message"
    VARIABLE_READ = "VariableRead"
    LITERAL = "Literal"
    TEMP_DECL = "TempDecl"
    SELF_REF = "SelfRef"


ALL_KINDS = tuple(NodeKind)


@dataclass(frozen=True)
class SourceSpan:
    start: int
    end: int

    def contains(self, offset: int) -> bool:
        return self.start <= offset < self.end

    def size(self) -> int:
        return self.end - self.start

    def __str__(self) -> str:
        return f"{self.start}..{self.end}"


@dataclass(eq=False)
class AstNode:
    """One syntax node.

    Payload fields are kind specific and None/() elsewhere:
      selector   Message, MethodDef
      name       VariableRead, Assignment (target), ClassDef
      value      Literal (python int/str/Symbol/bool/None)
      params     Block, MethodDef (argument names)
      temp_names TempDecl
      field_names, superclass  ClassDef
      super_send Message dispatched through the defining class's superclass
    """

    id: int
    kind: NodeKind
    span: SourceSpan
    children: tuple = ()
    selector: str | None = None
    name: str | None = None
    value: object = None
    params: tuple = ()
    temp_names: tuple = ()
    field_names: tuple = ()
    superclass: str | None = None
    super_send: bool = False

    # Message helpers; children are exactly [receiver, arg...]
    @property
    def receiver(self) -> "AstNode":
        assert self.kind is NodeKind.MESSAGE
        return self.children[0]

    @property
    def args(self) -> tuple:
        assert self.kind is NodeKind.MESSAGE
        return self.children[1:]

    def walk(self):
        yield self
        for child in self.children:
            yield from child.walk()

    def walk_with_depth(self, depth: int = 0):
        yield self, depth
        for child in self.children:
            yield from child.walk_with_depth(depth + 1)

    def __repr__(self) -> str:
        extra = ""
        if self.selector is not None:
            extra = f" {self.selector!r}"
        elif self.name is not None:
            extra = f" {self.name!r}"
        elif self.kind is NodeKind.LITERAL:
            extra = f" {self.value!r}"
        return f"<{self.kind.value} n{self.id} {self.span}{extra}>"


def classify_node(node: AstNode) -> NodeKind:
    return node.kind


def structurally_equal(a: AstNode, b: AstNode) -> bool:
    """Equality over kind, payload, and children; spans and ids are ignored."""
    if a.kind is not b.kind:
        return False
    payload = ("selector", "name", "value", "params", "temp_names",
               "field_names", "superclass", "super_send")
    for attr in payload:
        av, bv = getattr(a, attr), getattr(b, attr)
        if av != bv or type(av) is not type(bv):
            return False
    if len(a.children) != len(b.children):
        return False
    return all(structurally_equal(x, y) for x, y in zip(a.children, b.children))


def visit(node: AstNode, visitor):
    """Dispatch to visitor.visit_<kind>(node), falling back to visit_default."""
    method_name = "visit_" + _SNAKE[node.kind]
    fn = getattr(visitor, method_name, None)
    if fn is None:
        fn = getattr(visitor, "visit_default", None)
        if fn is None:
            raise AttributeError(f"visitor has no {method_name} or visit_default")
    return fn(node)


_SNAKE = {
    NodeKind.PROGRAM: "program",
    NodeKind.CLASS_DEF: "class_def",
    NodeKind.METHOD_DEF: "method_def",
    NodeKind.BLOCK: "block",
    NodeKind.SEQUENCE: "sequence",
    NodeKind.RETURN: "return",
    NodeKind.ASSIGNMENT: "assignment",
    NodeKind.MESSAGE: "message",
    NodeKind.VARIABLE_READ: "variable_read",
    NodeKind.LITERAL: "literal",
    NodeKind.TEMP_DECL: "temp_decl",
    NodeKind.SELF_REF: "self_ref",
}


# Unparser -----------------------------------------------------------------
#
# Produces valid source for any parsed tree. Used by the round-trip tests:
# parse(unparse(ast)) must be structurally equal to ast.

def unparse(node: AstNode) -> str:
    return _Unparser().emit(node)


class _Unparser:
    def emit(self, node: AstNode) -> str:
        fn = getattr(self, "_" + _SNAKE[node.kind])
        return fn(node)

    def _program(self, node):
        parts = [self.emit(c) for c in node.children[:-1]]
        parts.append(self._sequence_body(node.children[-1]))
        return "\n".join(p for p in parts if p)

    def _class_def(self, node):
        header = f"class {node.name}"
        if node.superclass and node.superclass != "Object":
            header += f" extends {node.superclass}"
        body = []
        if node.field_names:
            body.append("  fields " + " ".join(node.field_names) + ".")
        for m in node.children:
            body.append(_indent(self.emit(m), "  "))
        inner = "\n".join(body)
        return header + " {\n" + inner + ("\n" if inner else "") + "}"

    def _method_def(self, node):
        pattern = _pattern(node.selector, node.params)
        body = self._sequence_body(node.children[0])
        if body:
            return f"method {pattern} {{\n{_indent(body, '  ')}\n}}"
        return f"method {pattern} {{ }}"

    def _sequence_body(self, seq: AstNode) -> str:
        parts = []
        for child in seq.children:
            if child.kind is NodeKind.TEMP_DECL:
                parts.append("| " + " ".join(child.temp_names) + " |")
            else:
                parts.append(self.emit(child) + ".")
        return "\n".join(parts)

    def _block(self, node):
        params = "".join(f":{p} " for p in node.params)
        sep = "| " if node.params else ""
        body = self._sequence_body(node.children[0])
        body = " ".join(body.split("\n"))
        return f"[ {params}{sep}{body} ]"

    def _return(self, node):
        return "^ " + self.emit(node.children[0])

    def _assignment(self, node):
        return f"{node.name} := " + self.emit(node.children[0])

    def _message(self, node):
        recv = self._operand(node.receiver, _UNARY if not node.args else None, node)
        sel = node.selector
        if node.super_send and node.receiver.kind is NodeKind.SELF_REF:
            recv = "super"
        if not node.args:
            return f"{recv} {sel}"
        if ":" not in sel:
            rhs = self._operand(node.args[0], _UNARY, node)
            return f"{recv} {sel} {rhs}"
        words = [w + ":" for w in sel.split(":") if w]
        recv = self._operand(node.receiver, _BINARY, node)
        parts = [recv]
        for word, arg in zip(words, node.args):
            parts.append(word)
            parts.append(self._operand(arg, _BINARY, node))
        return " ".join(parts)

    def _operand(self, node, max_level, parent):
        """Wrap in parens when the operand binds looser than its position allows."""
        text = self.emit(node)
        level = _level(node)
        if max_level is None:
            max_level = _BINARY  # binary receiver position
        if level > max_level or node.kind is NodeKind.ASSIGNMENT:
            return f"({text})"
        # left-assoc: binary operand on the right side of a binary needs parens
        if (parent.kind is NodeKind.MESSAGE and parent.args and node in parent.args
                and ":" not in parent.selector and parent.selector and level == _BINARY):
            return f"({text})"
        return text

    def _variable_read(self, node):
        return node.name

    def _literal(self, node):
        return render_literal(node.value)

    def _temp_decl(self, node):  # handled by _sequence_body
        return "| " + " ".join(node.temp_names) + " |"

    def _self_ref(self, node):
        return "self"

    def _sequence(self, node):
        return self._sequence_body(node)


_UNARY, _BINARY, _KEYWORD = 0, 1, 2


def _level(node: AstNode) -> int:
    if node.kind is not NodeKind.MESSAGE:
        return _UNARY
    if not node.args:
        return _UNARY
    return _KEYWORD if ":" in (node.selector or "") else _BINARY


def _pattern(selector: str, params: tuple) -> str:
    if not params:
        return selector
    if ":" not in selector:
        return f"{selector} {params[0]}"
    words = [w + ":" for w in selector.split(":") if w]
    return " ".join(f"{w} {p}" for w, p in zip(words, params))


def _indent(text: str, pad: str) -> str:
    return "\n".join(pad + line if line else line for line in text.split("\n"))


def render_literal(value) -> str:
    from .values import Symbol
    if value is None:
        return "nil"
    if value is True:
        return "true"
    if value is False:
        return "false"
    if isinstance(value, Symbol):
        return "#" + value.name
    if isinstance(value, str):
        return "'" + value.replace("'", "''") + "'"
    return str(value)
