"""Recursive-descent parser for Lumen.

Precedence is the classic three levels: unary binds tightest, then binary,
then keyword. `class`, `extends`, `fields` and `method` are contextual
words, not reserved: they only matter at class-definition positions, so
`x class` stays an ordinary unary send.
"""

from __future__ import annotations

from dataclasses import dataclass

from .errors import OffsetOutOfRange, ParseError
from .lexer import Token, TokenType, tokenize
from .nodes import AstNode, NodeKind, SourceSpan
from .values import Symbol

T = TokenType


@dataclass
class LumenProgram:
    """A parsed program: class definitions plus the main statement sequence."""

    node: AstNode
    class_defs: tuple
    main_seq: AstNode
    source: str
    nodes_by_id: dict

    def node_by_id(self, node_id: int) -> AstNode:
        return self.nodes_by_id[node_id]

    def excerpt(self, span: SourceSpan, limit: int = 80) -> str:
        text = self.source[span.start:span.end]
        return text if len(text) <= limit else text[:limit - 1] + "…"


def parse_program(source: str, first_node_id: int = 0, id_step: int = 1) -> LumenProgram:
    parser = _Parser(source, first_node_id, id_step)
    return parser.parse()


def node_at(program: LumenProgram, offset: int) -> AstNode:
    """The deepest node whose span contains the offset.

    Sibling spans never overlap, so the containing child is unique at each
    level and "deepest containing" coincides with "minimal span".
    """
    if not (0 <= offset < max(len(program.source), 1)):
        raise OffsetOutOfRange(f"offset {offset} outside source of length {len(program.source)}")
    current = program.node
    while True:
        inner = None
        for child in current.children:
            if child.span.contains(offset):
                inner = child
                break
        if inner is None:
            return current
        current = inner


class _Parser:
    def __init__(self, source: str, first_node_id: int, id_step: int):
        self.source = source
        self.tokens = tokenize(source)
        self.pos = 0
        self.next_id = first_node_id
        self.id_step = id_step
        self.nodes: dict[int, AstNode] = {}

    # Token plumbing -------------------------------------------------------

    def peek(self, ahead: int = 0) -> Token:
        i = min(self.pos + ahead, len(self.tokens) - 1)
        return self.tokens[i]

    def advance(self) -> Token:
        tok = self.tokens[self.pos]
        if tok.type is not T.EOF:
            self.pos += 1
        return tok

    def expect(self, ttype: TokenType, what: str) -> Token:
        tok = self.peek()
        if tok.type is not ttype:
            raise ParseError(f"expected {what}, found {tok.text!r}", tok.span)
        return self.advance()

    def at_word(self, word: str, ahead: int = 0) -> bool:
        tok = self.peek(ahead)
        return tok.type is T.IDENT and tok.text == word

    def make(self, kind: NodeKind, span: SourceSpan, children=(), **payload) -> AstNode:
        node = AstNode(self.next_id, kind, span, tuple(children), **payload)
        self.next_id += self.id_step
        self.nodes[node.id] = node
        return node

    # Grammar --------------------------------------------------------------

    def parse(self) -> LumenProgram:
        classes = []
        while self.at_class_def():
            classes.append(self.class_def())
        main = self.body_sequence(end={T.EOF})
        self.expect(T.EOF, "end of program")
        program = self.make(NodeKind.PROGRAM, SourceSpan(0, len(self.source)),
                            children=tuple(classes) + (main,))
        return LumenProgram(node=program, class_defs=tuple(classes), main_seq=main,
                            source=self.source, nodes_by_id=self.nodes)

    def at_class_def(self) -> bool:
        if not self.at_word("class"):
            return False
        if self.peek(1).type is not T.IDENT:
            return False
        third = self.peek(2)
        return third.type is T.LBRACE or (third.type is T.IDENT and third.text == "extends")

    def class_def(self) -> AstNode:
        start = self.advance()  # 'class'
        name = self.expect(T.IDENT, "class name")
        superclass = "Object"
        if self.at_word("extends"):
            self.advance()
            superclass = self.expect(T.IDENT, "superclass name").text
        self.expect(T.LBRACE, "'{'")
        fields: tuple = ()
        if self.at_word("fields") and self.peek(1).type is T.IDENT:
            self.advance()
            names = []
            while self.peek().type is T.IDENT:
                names.append(self.advance().text)
            self.expect(T.DOT, "'.' after field list")
            fields = tuple(names)
            if len(set(fields)) != len(fields):
                raise ParseError(f"duplicate field name in class {name.text}", name.span)
        methods = []
        while self.at_word("method"):
            methods.append(self.method_def())
        end = self.expect(T.RBRACE, "'}' closing class body")
        return self.make(NodeKind.CLASS_DEF, SourceSpan(start.start, end.end),
                         children=methods, name=name.text, superclass=superclass,
                         field_names=fields)

    def method_def(self) -> AstNode:
        start = self.advance()  # 'method'
        selector, params = self.message_pattern()
        self.expect(T.LBRACE, "'{' opening method body")
        body = self.body_sequence(end={T.RBRACE})
        end = self.expect(T.RBRACE, "'}' closing method body")
        return self.make(NodeKind.METHOD_DEF, SourceSpan(start.start, end.end),
                         children=(body,), selector=selector, params=tuple(params))

    def message_pattern(self):
        tok = self.peek()
        if tok.type is T.KEYWORD:
            selector = ""
            params = []
            while self.peek().type is T.KEYWORD:
                selector += self.advance().text
                params.append(self.expect(T.IDENT, "parameter name").text)
            return selector, params
        if tok.type is T.BINOP:
            self.advance()
            param = self.expect(T.IDENT, "parameter name")
            return tok.text, [param.text]
        if tok.type is T.IDENT:
            self.advance()
            return tok.text, []
        raise ParseError("expected method pattern", tok.span)

    def body_sequence(self, end: set) -> AstNode:
        children = []
        start_tok = self.peek()
        if self.peek().type is T.PIPE:
            children.append(self.temp_decl())
        while self.peek().type not in end:
            stmt = self.statement()
            children.append(stmt)
            if self.peek().type is T.DOT:
                self.advance()
            elif self.peek().type not in end:
                raise ParseError("expected '.' between statements", self.peek().span)
        if children:
            span = SourceSpan(children[0].span.start, children[-1].span.end)
        else:
            span = SourceSpan(start_tok.start, start_tok.start)
        return self.make(NodeKind.SEQUENCE, span, children=children)

    def temp_decl(self) -> AstNode:
        start = self.advance()  # '|'
        names = []
        while self.peek().type is T.IDENT:
            names.append(self.advance().text)
        if not names:
            raise ParseError("empty temp declaration", self.peek().span)
        if len(set(names)) != len(names):
            raise ParseError("duplicate temp name", start.span)
        end = self.expect(T.PIPE, "'|' closing temp declaration")
        return self.make(NodeKind.TEMP_DECL, SourceSpan(start.start, end.end),
                         temp_names=tuple(names))

    def statement(self) -> AstNode:
        if self.peek().type is T.CARET:
            caret = self.advance()
            value = self.expression()
            self.no_bare_super(value)
            return self.make(NodeKind.RETURN, SourceSpan(caret.start, value.span.end),
                             children=(value,))
        expr = self.expression()
        self.no_bare_super(expr)
        return expr

    def expression(self) -> AstNode:
        if self.peek().type is T.IDENT and self.peek(1).type is T.ASSIGN:
            target = self.advance()
            self.advance()  # :=
            value = self.expression()
            self.no_bare_super(value)
            return self.make(NodeKind.ASSIGNMENT,
                             SourceSpan(target.start, value.span.end),
                             children=(value,), name=target.text)
        return self.keyword_expression()

    def keyword_expression(self) -> AstNode:
        receiver = self.binary_expression()
        if self.peek().type is not T.KEYWORD:
            return receiver
        selector = ""
        args = []
        while self.peek().type is T.KEYWORD:
            selector += self.advance().text
            arg = self.binary_expression()
            self.no_bare_super(arg)
            args.append(arg)
        return self.message(receiver, selector, args)

    def binary_expression(self) -> AstNode:
        left = self.unary_expression()
        while self.peek().type is T.BINOP:
            op = self.advance()
            right = self.unary_expression()
            self.no_bare_super(right)
            left = self.message(left, op.text, [right])
        return left

    def unary_expression(self) -> AstNode:
        receiver = self.primary()
        while self.peek().type is T.IDENT:
            name = self.advance()
            receiver = self.message(receiver, name.text, [], end=name.end)
        return receiver

    def message(self, receiver: AstNode, selector: str, args: list, end=None) -> AstNode:
        super_send = self.is_super_marker(receiver)
        if end is None:
            end = args[-1].span.end if args else receiver.span.end
        return self.make(NodeKind.MESSAGE, SourceSpan(receiver.span.start, end),
                         children=(receiver, *args), selector=selector,
                         super_send=super_send)

    def primary(self) -> AstNode:
        tok = self.peek()
        if tok.type is T.INT:
            self.advance()
            return self.make(NodeKind.LITERAL, tok.span, value=int(tok.text))
        if tok.type is T.STRING:
            self.advance()
            return self.make(NodeKind.LITERAL, tok.span, value=tok.text)
        if tok.type is T.SYMBOL:
            self.advance()
            return self.make(NodeKind.LITERAL, tok.span, value=Symbol(tok.text))
        if tok.type is T.IDENT:
            if tok.text == "nil":
                self.advance()
                return self.make(NodeKind.LITERAL, tok.span, value=None)
            if tok.text == "true":
                self.advance()
                return self.make(NodeKind.LITERAL, tok.span, value=True)
            if tok.text == "false":
                self.advance()
                return self.make(NodeKind.LITERAL, tok.span, value=False)
            if tok.text == "self":
                self.advance()
                return self.make(NodeKind.SELF_REF, tok.span, name="self")
            if tok.text == "super":
                self.advance()
                return self.make(NodeKind.SELF_REF, tok.span, name="super")
            self.advance()
            return self.make(NodeKind.VARIABLE_READ, tok.span, name=tok.text)
        if tok.type is T.LPAREN:
            self.advance()
            inner = self.expression()
            self.no_bare_super(inner)
            self.expect(T.RPAREN, "')'")
            return inner
        if tok.type is T.LBRACKET:
            return self.block()
        raise ParseError(f"unexpected token {tok.text!r}", tok.span)

    def block(self) -> AstNode:
        start = self.advance()  # '['
        params = []
        while self.peek().type is T.COLON:
            self.advance()
            params.append(self.expect(T.IDENT, "block parameter name").text)
        if params:
            self.expect(T.PIPE, "'|' after block parameters")
        if len(set(params)) != len(params):
            raise ParseError("duplicate block parameter", start.span)
        body = self.body_sequence(end={T.RBRACKET})
        end = self.expect(T.RBRACKET, "']' closing block")
        return self.make(NodeKind.BLOCK, SourceSpan(start.start, end.end),
                         children=(body,), params=tuple(params))

    # Super bookkeeping ------------------------------------------------------

    @staticmethod
    def is_super_marker(node: AstNode) -> bool:
        return node.kind is NodeKind.SELF_REF and node.name == "super"

    def no_bare_super(self, node: AstNode) -> None:
        if self.is_super_marker(node):
            raise ParseError("super must be the receiver of a message", node.span)
