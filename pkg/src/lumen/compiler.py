"""AST -> bytecode.

Compilation scheme (straight-line code, no jump opcodes — control flow is
message sends of block values):

  expressions    push exactly one value
  assignments    store opcodes leave the stored value on the stack
  statements     a boundary ``pop`` between statements, mapped to the
                 enclosing Sequence node
  methods        pop after every statement, then ``push_self`` +
                 ``return_top`` mapped to the MethodDef node (a method with
                 no explicit ^ answers its receiver)
  main / blocks  the last statement's value is the frame's answer, via a
                 ``return_top`` mapped to the Sequence (main) or Block node;
                 an empty block answers nil; an empty main compiles to zero
                 instructions
  ^expr          ``return_top`` with the method-return flag, which unwinds
                 through the home method frame (so ^ inside a block returns
                 from the enclosing method)

Blocks are flat closures: every block parameter and temp gets a slot in the
home method's frame, and a block frame aliases the home frame's slot array.
Overlapping activations of one closure sharing the same home frame would
share slots; the language surface here never needs that, and the static
stack-depth check turns any abuse into a hard fault instead of corruption.
"""

from __future__ import annotations

from .bytecode import (RETURN_LOCAL, RETURN_METHOD, CompiledMethod, Instr, Op,
                       compute_stack_depths, disassemble_method)
from .errors import CompileError, VmFault
from .nodes import AstNode, NodeKind
from .parser import LumenProgram, parse_program
from .prelude import PRELUDE_SOURCE
from .values import GuestClass


# Literal pool --------------------------------------------------------------

def _literal_key(tag: str, value) -> tuple:
    # bool is an int in the host language; the tag keeps true and 1 apart
    return (tag, type(value).__name__, value)


class _Pool:
    def __init__(self):
        self.values: list = []
        self.index: dict = {}

    def add(self, tag: str, value) -> int:
        key = _literal_key(tag, value)
        if key not in self.index:
            self.index[key] = len(self.values)
            self.values.append(value)
        return self.index[key]


# Scope / frame slots --------------------------------------------------------

class _Slots:
    """Slot allocator for one home frame (method or main), shared by blocks."""

    def __init__(self):
        self.names: list = []

    def alloc(self, name: str) -> int:
        self.names.append(name)
        return len(self.names) - 1


def _region_ids(root: AstNode) -> frozenset:
    """Node ids belonging to one method's view: its subtree minus the
    interiors of nested blocks (the Block node itself stays — its make_block
    lives in the enclosing method)."""
    ids = set()

    def walk(node: AstNode, at_root: bool) -> None:
        ids.add(node.id)
        if node.kind is NodeKind.BLOCK and not at_root:
            return
        for child in node.children:
            walk(child, False)

    walk(root, True)
    return frozenset(ids)


class _Builder:
    """Compiles one method, main body, or block body."""

    def __init__(self, *, selector: str, owner_name: str | None, owner_class,
                 params: tuple, is_block: bool, parent: "_Builder | None",
                 slots: _Slots, home_ast: AstNode, program: LumenProgram):
        self.owner_class = owner_class
        self.parent = parent
        self.slots = slots
        self.program = program
        self.scope: dict = {}            # name -> (slot, is_param)
        self.pool = _Pool()
        self.code: list = []
        self.pc_nodes: list = []
        self.node_pcs: dict = {}
        self.blocks: list = []
        self.method = CompiledMethod(selector=selector, owner_name=owner_name,
                                     is_block=is_block, num_args=len(params),
                                     params=tuple(params), home_ast=home_ast)
        arg_slots = []
        for p in params:
            slot = self.slots.alloc(p)
            self.scope[p] = (slot, True)
            arg_slots.append(slot)
        self.method.arg_slots = tuple(arg_slots)

    # -- plumbing

    def emit(self, op: Op, node: AstNode, a: int = 0, b: int = 0) -> None:
        pc = len(self.code)
        self.code.append(Instr(op, a, b))
        self.pc_nodes.append(node)
        self.node_pcs.setdefault(node.id, []).append(pc)

    def fail(self, message: str, node: AstNode):
        raise CompileError(f"{message}: {self.program.excerpt(node.span)!r}", node.span)

    def declare_temps(self, decl: AstNode) -> None:
        for name in decl.temp_names:
            if name in self.scope:
                self.fail(f"'{name}' is already a parameter or temp here", decl)
            self.scope[name] = (self.slots.alloc(name), False)

    def resolve(self, name: str):
        builder = self
        while builder is not None:
            if name in builder.scope:
                slot, is_param = builder.scope[name]
                return ("param" if is_param else "temp", slot)
            builder = builder.parent
        if self.owner_class is not None and name in self.owner_class.field_slots:
            return ("field", self.owner_class.field_slots[name])
        return ("global", name)

    # -- expressions

    def compile_expr(self, node: AstNode) -> None:
        kind = node.kind
        if kind is NodeKind.LITERAL:
            self.emit(Op.PUSH_LITERAL, node, self.pool.add("lit", node.value))
        elif kind is NodeKind.SELF_REF:
            if node.name == "super" and self.owner_class is None:
                self.fail("super outside of a method", node)
            self.emit(Op.PUSH_SELF, node)
        elif kind is NodeKind.VARIABLE_READ:
            where, slot = self.resolve(node.name)
            if where in ("temp", "param"):
                self.emit(Op.PUSH_TEMP, node, slot)
            elif where == "field":
                self.emit(Op.PUSH_FIELD, node, slot)
            else:
                self.emit(Op.PUSH_GLOBAL, node, self.pool.add("global", node.name))
        elif kind is NodeKind.ASSIGNMENT:
            self.compile_expr(node.children[0])
            where, slot = self.resolve(node.name)
            if where == "param":
                self.fail(f"cannot assign to parameter '{node.name}'", node)
            elif where == "temp":
                self.emit(Op.STORE_TEMP, node, slot)
            elif where == "field":
                self.emit(Op.STORE_FIELD, node, slot)
            else:
                self.fail(f"cannot assign to undeclared variable '{node.name}'", node)
        elif kind is NodeKind.MESSAGE:
            self.compile_expr(node.receiver)
            for arg in node.args:
                self.compile_expr(arg)
            sel_idx = self.pool.add("selector", node.selector)
            op = Op.SEND_SUPER if node.super_send else Op.SEND
            self.emit(op, node, sel_idx, len(node.args))
        elif kind is NodeKind.BLOCK:
            sub = _Builder(selector=self.method.selector,
                           owner_name=self.method.owner_name,
                           owner_class=self.owner_class, params=node.params,
                           is_block=True, parent=self, slots=self.slots,
                           home_ast=node, program=self.program)
            sub.compile_value_body(node.children[0], owner_node=node)
            self.blocks.append(sub.finish())
            self.emit(Op.MAKE_BLOCK, node, len(self.blocks) - 1)
        else:
            raise VmFault(f"unexpected node in expression position: {node!r}")

    # -- statement sequences

    def _statements(self, seq: AstNode) -> tuple:
        stmts = seq.children
        if stmts and stmts[0].kind is NodeKind.TEMP_DECL:
            self.declare_temps(stmts[0])
            stmts = stmts[1:]
        return stmts

    def compile_method_body(self, seq: AstNode, method_node: AstNode) -> None:
        stmts = self._statements(seq)
        last_was_return = False
        for stmt in stmts:
            if stmt.kind is NodeKind.RETURN:
                self.compile_expr(stmt.children[0])
                self.emit(Op.RETURN_TOP, stmt, RETURN_METHOD)
                last_was_return = True
            else:
                self.compile_expr(stmt)
                self.emit(Op.POP, seq)
                last_was_return = False
        if not last_was_return:
            self.emit(Op.PUSH_SELF, method_node)
            self.emit(Op.RETURN_TOP, method_node, RETURN_LOCAL)

    def compile_value_body(self, seq: AstNode, owner_node: AstNode,
                           is_main: bool = False) -> None:
        stmts = self._statements(seq)
        if not stmts:
            if not is_main:  # empty main compiles to nothing; empty block answers nil
                self.emit(Op.PUSH_LITERAL, owner_node, self.pool.add("lit", None))
                self.emit(Op.RETURN_TOP, owner_node, RETURN_LOCAL)
            return
        for i, stmt in enumerate(stmts):
            last = i == len(stmts) - 1
            if stmt.kind is NodeKind.RETURN:
                if is_main:
                    self.fail("cannot use ^ at the top level of a program", stmt)
                self.compile_expr(stmt.children[0])
                self.emit(Op.RETURN_TOP, stmt, RETURN_METHOD)
            else:
                self.compile_expr(stmt)
                if last:
                    self.emit(Op.RETURN_TOP, owner_node, RETURN_LOCAL)
                else:
                    self.emit(Op.POP, seq)

    # -- assembly

    def finish(self) -> CompiledMethod:
        m = self.method
        m.owner_class = self.owner_class
        m.literals = tuple(self.pool.values)
        m.code = tuple(self.code)
        m.pc_nodes = tuple(self.pc_nodes)
        m.node_pcs = {nid: frozenset(pcs) for nid, pcs in self.node_pcs.items()}
        m.ast_node_ids = _region_ids(m.home_ast)
        m.temp_names = tuple(sorted(((n, s) for n, (s, _) in self.scope.items()),
                                    key=lambda pair: pair[1]))
        m.block_methods = tuple(self.blocks)
        m.stack_depths = compute_stack_depths(m.code)
        if m.code and m.stack_depths[-1] != 0:
            raise VmFault(f"unbalanced code for {m.display_name()}")
        if not m.is_block:
            m.total_slots = len(self.slots.names)
            for sub in m.walk_with_blocks():
                sub.home_method = m
        return m


# Programs -------------------------------------------------------------------

class CompiledProgram:
    """A compiled user program plus the shared built-in classes."""

    def __init__(self, *, program: LumenProgram, prelude: LumenProgram,
                 classes: dict, user_class_names: tuple, main: CompiledMethod):
        self.program = program
        self.prelude = prelude
        self.classes = classes
        self.user_class_names = user_class_names
        self.main = main
        self.source = program.source

    def node_by_id(self, node_id: int) -> AstNode:
        table = self.program.nodes_by_id if node_id >= 0 else self.prelude.nodes_by_id
        return table[node_id]

    def class_named(self, name: str):
        return self.classes.get(name)

    def user_methods(self):
        """Main plus every user-class method, nested block bodies included."""
        yield from self.main.walk_with_blocks()
        for name in self.user_class_names:
            for method in self.classes[name].methods.values():
                yield from method.walk_with_blocks()

    def find_method(self, class_name: str, selector: str) -> CompiledMethod | None:
        cls = self.classes.get(class_name)
        if cls is None:
            return None
        for c in cls.lineage():
            if selector in c.methods:
                return c.methods[selector]
        return None


def _compile_classes(program: LumenProgram, base: dict) -> dict:
    """Create GuestClass objects for the program's class defs (superclasses
    must already exist — earlier in the same program or in ``base``) and
    compile their methods. Returns only the new classes."""
    known = dict(base)
    created: list = []
    for cdef in program.class_defs:
        name = cdef.name
        if any(c.name == name for c, _ in created):
            raise CompileError(f"class '{name}' is defined twice", cdef.span)
        if name in base:
            raise CompileError(f"class '{name}' redefines a built-in class", cdef.span)
        sup_name = cdef.superclass  # the parser defaults this to "Object"
        if name == "Object":
            sup_name = None  # the root class has no superclass
        sup = None
        if sup_name is not None:
            sup = known.get(sup_name)
            if sup is None:
                raise CompileError(f"unknown superclass '{sup_name}' for class "
                                   f"'{name}' (define it first)", cdef.span)
            for f in cdef.field_names:
                if f in sup.field_slots:
                    raise CompileError(f"field '{f}' of class '{name}' is already "
                                       f"defined in a superclass", cdef.span)
        cls = GuestClass(name, sup, cdef.field_names)
        known[name] = cls
        created.append((cls, cdef))

    for cls, cdef in created:
        for mnode in cdef.children:
            if mnode.selector in cls.methods:
                raise CompileError(f"method '{mnode.selector}' is defined twice "
                                   f"in class '{cls.name}'", mnode.span)
            builder = _Builder(selector=mnode.selector, owner_name=cls.name,
                               owner_class=cls, params=mnode.params,
                               is_block=False, parent=None, slots=_Slots(),
                               home_ast=mnode, program=program)
            builder.compile_method_body(mnode.children[0], mnode)
            method = builder.finish()
            method.owner_class = cls
            cls.methods[mnode.selector] = method
    return {cls.name: cls for cls, _ in created}


# The built-in classes are compiled once and shared by every program, so a
# class or method object obtained in one execution is the same object in the
# next one. Their node ids run negative, keeping user programs at 0, 1, 2...
_PRELUDE_CACHE = None


def shared_prelude():
    global _PRELUDE_CACHE
    if _PRELUDE_CACHE is None:
        program = parse_program(PRELUDE_SOURCE, first_node_id=-1, id_step=-1)
        classes = _compile_classes(program, {})
        _PRELUDE_CACHE = (program, classes)
    return _PRELUDE_CACHE


def compile_program(source_or_program) -> CompiledProgram:
    if isinstance(source_or_program, LumenProgram):
        program = source_or_program
    else:
        program = parse_program(source_or_program)
    prelude_program, prelude_classes = shared_prelude()
    user_classes = _compile_classes(program, prelude_classes)
    classes = dict(prelude_classes)
    classes.update(user_classes)

    builder = _Builder(selector="<main>", owner_name=None, owner_class=None,
                       params=(), is_block=False, parent=None, slots=_Slots(),
                       home_ast=program.main_seq, program=program)
    builder.compile_value_body(program.main_seq, owner_node=program.main_seq,
                               is_main=True)
    main = builder.finish()

    return CompiledProgram(program=program, prelude=prelude_program,
                           classes=classes,
                           user_class_names=tuple(user_classes),
                           main=main)


# Disassembly of whole programs ----------------------------------------------

def dump_bytecode(compiled: CompiledProgram) -> str:
    chunks = []
    for method in compiled.user_methods():
        header = method.display_name()
        if method.is_block:
            header += f" (block n{method.home_ast.id})"
        chunks.append(header + ":")
        body = disassemble_method(method)
        if body:
            chunks.append(body)
        chunks.append("")
    return "\n".join(chunks).rstrip() + "\n"
