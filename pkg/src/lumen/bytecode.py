"""Bytecode model.

Twelve opcodes, no jumps: control flow is ordinary message sends of block
arguments, so every compiled method is a straight line and the value-stack
depth at each pc is a compile-time constant (stack_depths). Store opcodes
leave the stored value on the stack; statement boundaries emit pop.
"""

from __future__ import annotations

import enum
import hashlib
from dataclasses import dataclass, field

from .errors import NodeNotInMethod, PcOutOfRange, VmFault
from .nodes import AstNode, render_literal


class Op(enum.Enum):
    PUSH_SELF = "push_self"
    PUSH_LITERAL = "push_literal"
    PUSH_TEMP = "push_temp"
    STORE_TEMP = "store_temp"
    PUSH_FIELD = "push_field"
    STORE_FIELD = "store_field"
    PUSH_GLOBAL = "push_global"
    SEND = "send"
    SEND_SUPER = "send_super"
    MAKE_BLOCK = "make_block"
    RETURN_TOP = "return_top"
    POP = "pop"


# return_top operands
RETURN_LOCAL = 0     # frame falls off its end (method answers self, block its value)
RETURN_METHOD = 1    # explicit ^, unwinds through the home method


@dataclass(frozen=True)
class Instr:
    op: Op
    a: int = 0
    b: int = 0

    def __repr__(self) -> str:
        return f"Instr({self.op.value}, {self.a}, {self.b})"


class CompiledMethod:
    """Straight-line code plus the bidirectional pc/node mapping."""

    def __init__(self, *, selector: str, owner_name: str, is_block: bool,
                 num_args: int, params: tuple, home_ast: AstNode):
        self.selector = selector
        self.owner_name = owner_name
        self.is_block = is_block
        self.num_args = num_args
        self.params = params
        self.home_ast = home_ast
        self.literals: tuple = ()
        self.code: tuple = ()
        self.pc_nodes: tuple = ()        # pc -> AstNode, total
        self.node_pcs: dict = {}         # node id -> frozenset of pcs
        self.ast_node_ids: frozenset = frozenset()
        self.temp_names: tuple = ()      # ((name, slot), ...) for this scope's view
        self.arg_slots: tuple = ()       # home-frame slots that receive call arguments
        self.total_slots: int = 0        # frame array size; meaningful on non-blocks
        self.block_methods: tuple = ()
        self.owner_class = None          # GuestClass, set for real methods
        self.home_method = None          # enclosing non-block method (self if not a block)
        self.stack_depths: tuple = ()    # depth before each pc, plus final depth

    def display_name(self) -> str:
        if self.is_block:
            return f"[] in {self.owner_name}>>{self.selector}" if self.owner_name else "[] in <main>"
        if self.owner_name:
            return f"{self.owner_name}>>{self.selector}"
        return self.selector

    def node_for_pc(self, pc: int) -> AstNode:
        if not (0 <= pc < len(self.code)):
            raise PcOutOfRange(f"pc {pc} outside {self.display_name()} of length {len(self.code)}")
        return self.pc_nodes[pc]

    def pcs_for_node(self, node: AstNode) -> frozenset:
        if node.id not in self.ast_node_ids:
            raise NodeNotInMethod(f"node n{node.id} is not part of {self.display_name()}")
        return self.node_pcs.get(node.id, frozenset())

    def walk_with_blocks(self):
        yield self
        for b in self.block_methods:
            yield from b.walk_with_blocks()

    def __repr__(self) -> str:
        return f"<CompiledMethod {self.display_name()} ({len(self.code)} instrs)>"


_EFFECTS = {
    Op.PUSH_SELF: 1, Op.PUSH_LITERAL: 1, Op.PUSH_TEMP: 1, Op.PUSH_FIELD: 1,
    Op.PUSH_GLOBAL: 1, Op.MAKE_BLOCK: 1,
    Op.STORE_TEMP: 0, Op.STORE_FIELD: 0,
    Op.POP: -1, Op.RETURN_TOP: -1,
}


def compute_stack_depths(code: tuple) -> tuple:
    """Abstract interpretation of stack depth; exact because code is jump-free."""
    depths = [0]
    d = 0
    for instr in code:
        if instr.op in (Op.SEND, Op.SEND_SUPER):
            d -= instr.b  # argc+1 popped, result pushed
        else:
            d += _EFFECTS[instr.op]
        if d < 0:
            raise VmFault("stack depth went negative during compilation")
        depths.append(d)
    return tuple(depths)


# Disassembly ----------------------------------------------------------------

def operand_text(method: CompiledMethod, instr: Instr) -> str:
    op = instr.op
    if op is Op.PUSH_LITERAL:
        return render_literal(method.literals[instr.a])
    if op in (Op.SEND, Op.SEND_SUPER):
        return f"{method.literals[instr.a]} {instr.b}"
    if op is Op.PUSH_GLOBAL:
        return str(method.literals[instr.a])
    if op in (Op.PUSH_TEMP, Op.STORE_TEMP, Op.PUSH_FIELD, Op.STORE_FIELD,
              Op.MAKE_BLOCK, Op.RETURN_TOP):
        return str(instr.a)
    return ""


def disassemble_method(method: CompiledMethod) -> str:
    lines = []
    for pc, instr in enumerate(method.code):
        node = method.pc_nodes[pc]
        operand = operand_text(method, instr)
        left = f"{pc:4d} {instr.op.value:<12} {operand:<18}"
        lines.append(f"{left} ; n{node.id} {node.kind.value} {node.span}")
    return "\n".join(lines)


def method_checksum(method: CompiledMethod) -> str:
    text = disassemble_method(method)
    return hashlib.sha1(text.encode()).hexdigest()
