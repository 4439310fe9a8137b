"""The scriptable debugger: a suspended execution plus the operations to
steer and inspect it.

Stepping granularity is one bytecode instruction, which is expression
granularity: every push, store and send maps to its own AST node. `step`
never consults breakpoints or watches; only `continue_` does, so scripts
that drive the execution by hand are never interrupted. All halts use the
suspend-before convention: the triggering instruction has not executed when
the hit descriptor is returned, so a write watch still sees the old field
value and a call watch fires with the callee frame not yet pushed.

Breakpoints are virtual: they live in session-side tables keyed by node ids
(or by compiled method, triggering at pc 0 of each activation) and never
touch method bytecode — `method_checksum` is identical before and after any
add/remove sequence.
"""

from __future__ import annotations

from .bytecode import CompiledMethod, Op
from .compiler import CompiledProgram, compile_program
from .errors import (DeadFrame, EmptyValueStack, ExecutionAlreadyFinished,
                     NonWatchableValue, NotAtAssignment, NotAtMessageSend,
                     NotSkippable, NotTopFrame, ReentrancyLimit,
                     StepBudgetExceeded, UnhandledExceptionDuringStepOver,
                     UnknownTarget)
from .nodes import AstNode
from .parser import LumenProgram
from .values import (BlockClosure, GuestClass, GuestObject, MethodHandle,
                     Symbol, method_handle)
from .vm import DEFAULT_STEP_BUDGET, Execution, Frame, RunStatus, StepOutcome

MAX_ACTION_DEPTH = 16

SKIPPABLE_OPS = frozenset({
    Op.SEND, Op.SEND_SUPER, Op.STORE_TEMP, Op.STORE_FIELD,
    Op.PUSH_LITERAL, Op.PUSH_TEMP, Op.PUSH_FIELD, Op.PUSH_GLOBAL,
    Op.PUSH_SELF,
})

WATCHABLE_VARIANTS = (GuestObject, BlockClosure, GuestClass)


# Frame views -------------------------------------------------------------------

class Context:
    """A reified stack frame.

    Live contexts read through to the frame; `copy` captures the frame-local
    data (pc, arguments, temporaries) by value — heap objects stay shared —
    so the snapshot survives further stepping, as a stored `stack copy`
    must. Accessing the mutable parts of a dead, non-copied frame raises
    DeadFrame.
    """

    def __init__(self, session: "DebugSession", frame: Frame):
        self._session = session
        self._frame = frame
        self.is_copy = False
        self.frame_id = frame.frame_id
        self._snapshot = None  # dict when is_copy

    # -- copying

    def copy(self) -> "Context":
        frame = self._frame
        dup = Context(self._session, frame)
        dup.is_copy = True
        dup._snapshot = {
            "pc": frame.pc,
            "arguments": list(frame.arguments),
            "temporaries": self._read_temps(frame),
            "sender": (Context(self._session, frame.sender).copy()
                       if frame.sender is not None else None),
        }
        return dup

    @staticmethod
    def _read_temps(frame: Frame) -> dict:
        return {name: frame.temps[slot] for name, slot in frame.method.temp_names}

    def _guard_mutable(self):
        if not self.is_copy and self._frame.dead:
            raise DeadFrame(f"frame #{self.frame_id} has returned; "
                            "copy a context to keep its data")

    # -- reads

    @property
    def pc(self) -> int:
        if self.is_copy:
            return self._snapshot["pc"]
        self._guard_mutable()
        return self._frame.pc

    @property
    def method(self) -> MethodHandle:
        return method_handle(self._frame.method)

    @property
    def compiled_method(self) -> CompiledMethod:
        return self._frame.method

    @property
    def selector(self):
        sel = self._frame.method.selector
        return Symbol(sel) if sel is not None else None

    @property
    def receiver(self):
        return self._frame.receiver

    @property
    def arguments(self) -> list:
        if self.is_copy:
            return list(self._snapshot["arguments"])
        return list(self._frame.arguments)

    @property
    def temporaries(self) -> dict:
        if self.is_copy:
            return dict(self._snapshot["temporaries"])
        self._guard_mutable()
        return self._read_temps(self._frame)

    @property
    def sender(self):
        if self.is_copy:
            return self._snapshot["sender"]
        if self._frame.sender is None:
            return None
        return Context(self._session, self._frame.sender)

    @property
    def depth(self) -> int:
        return self._frame.depth

    @property
    def is_block(self) -> bool:
        return self._frame.is_block

    def node(self) -> AstNode:
        self._guard_mutable()
        return self._frame.current_node()

    # -- value-stack mutation (live top frame only)

    def _live_top_frame(self) -> Frame:
        if self.is_copy:
            raise NotTopFrame("cannot mutate a copied context")
        top = self._session.execution.top
        if top is not self._frame:
            raise NotTopFrame("only the live top frame's value stack is mutable")
        return top

    def push_value(self, value) -> None:
        self._live_top_frame().stack.append(value)

    def pop_value(self):
        frame = self._live_top_frame()
        if not frame.stack:
            raise EmptyValueStack("the value stack is empty")
        return frame.stack.pop()

    def __eq__(self, other):
        return (isinstance(other, Context)
                and self.frame_id == other.frame_id
                and self.pc == other.pc
                and self._frame.method is other._frame.method)

    def __hash__(self):
        return hash(self.frame_id)

    def __repr__(self):
        tag = " copy" if self.is_copy else ""
        return f"<context #{self.frame_id} {self._frame.method.display_name()}{tag}>"


# Triggers ----------------------------------------------------------------------

class Breakpoint:
    """A virtual breakpoint on a node set or on a method's activations."""

    def __init__(self, session, bp_id, *, node_ids=None, method=None):
        self._session = session
        self.id = bp_id
        self.node_ids = frozenset(node_ids) if node_ids is not None else None
        self.method = method  # CompiledMethod; triggers at pc 0 of activations
        self.action = None
        self.once = False
        self.enabled = True
        self.hit_count = 0

    def when_hit(self, action) -> "Breakpoint":
        """Store a host callback run with the session at every hit."""
        self.action = action
        return self

    def set_once(self, once: bool = True) -> "Breakpoint":
        self.once = once
        return self

    def enable(self):
        self.enabled = True

    def disable(self):
        self.enabled = False

    def remove(self):
        self._session.breakpoints.pop(self.id, None)

    def matches(self, frame: Frame, node: AstNode | None) -> bool:
        if not self.enabled:
            return False
        if self.method is not None:
            return frame.method is self.method and frame.pc == 0
        return node is not None and node.id in self.node_ids

    def describe(self) -> dict:
        target = (self.method.display_name() if self.method is not None
                  else sorted(self.node_ids))
        return {"id": self.id, "target": target, "once": self.once,
                "enabled": self.enabled, "hits": self.hit_count}


class Watch:
    """An object-centric trigger: a specific object (by identity) receiving
    a message, or one of its fields being written."""

    ON_CALL = "onCall"
    ON_WRITE = "onWrite"

    def __init__(self, session, watch_id, kind, target, *,
                 selector_filter=None, field_filter=None):
        self._session = session
        self.id = watch_id
        self.kind = kind
        self.target = target
        self.selector_filter = selector_filter
        self.field_filter = field_filter
        self.action = None
        self.once = False
        self.enabled = True
        self.hit_count = 0

    def when_hit(self, action) -> "Watch":
        self.action = action
        return self

    def set_once(self, once: bool = True) -> "Watch":
        self.once = once
        return self

    def remove(self):
        self._session.watches.pop(self.id, None)

    def matches_send(self, receiver, selector: str) -> bool:
        if not self.enabled or self.kind != Watch.ON_CALL:
            return False
        if receiver is not self.target:
            return False
        return self.selector_filter is None or selector == self.selector_filter

    def matches_write(self, obj, field_name: str) -> bool:
        if not self.enabled or self.kind != Watch.ON_WRITE:
            return False
        if obj is not self.target:
            return False
        return self.field_filter is None or field_name == self.field_filter

    def describe(self) -> dict:
        return {"id": self.id, "kind": self.kind,
                "selector": self.selector_filter, "field": self.field_filter,
                "enabled": self.enabled, "hits": self.hit_count}


class HitDescriptor:
    """Why a `continue_` suspended. The triggering instruction has not
    executed yet."""

    BREAKPOINT = "breakpoint"
    WATCH_CALL = "watchCall"
    WATCH_WRITE = "watchWrite"
    UNHANDLED_EXCEPTION = "unhandledException"
    EXECUTION_FINISHED = "executionFinished"

    def __init__(self, kind, *, breakpoint_id=None, watch_id=None,
                 node=None, frame_id=None, removed=False):
        self.kind = kind
        self.breakpoint_id = breakpoint_id
        self.watch_id = watch_id
        self.node = node
        self.frame_id = frame_id
        self.removed = removed

    def __repr__(self):
        bits = [self.kind]
        if self.breakpoint_id is not None:
            bits.append(f"bp={self.breakpoint_id}")
        if self.watch_id is not None:
            bits.append(f"watch={self.watch_id}")
        if self.node is not None:
            bits.append(f"node=n{self.node.id}")
        if self.frame_id is not None:
            bits.append(f"frame=#{self.frame_id}")
        return "<hit " + " ".join(str(b) for b in bits) + ">"


# The session ---------------------------------------------------------------------

class DebugSession:
    """One debugged execution with its breakpoints, watches and stepping state."""

    def __init__(self, compiled: CompiledProgram, *, seed: int = 1,
                 bindings: dict | None = None):
        self.compiled = compiled
        self.execution = Execution(compiled, seed=seed, bindings=bindings)
        self.execution.push_main_frame()
        if not compiled.main.code:
            self.execution.step()  # an empty program is finished at birth
        self.breakpoints: dict = {}
        self.watches: dict = {}
        self.hits: list = []
        self.last_hit: HitDescriptor | None = None
        self._next_breakpoint_id = 1
        self._next_watch_id = 1
        self._action_depth = 0

    # -- state

    def is_execution_finished(self) -> bool:
        return self.execution.status is not RunStatus.RUNNING

    @property
    def status(self) -> RunStatus:
        return self.execution.status

    @property
    def result(self):
        return self.execution.result

    @property
    def output_text(self) -> str:
        return self.execution.output_text

    def failure_description(self) -> str:
        return self.execution.failure_description()

    def _require_frame(self) -> Frame:
        top = self.execution.top
        if top is None:
            raise ExecutionAlreadyFinished("the execution has finished")
        return top

    def _current_instruction(self, frame: Frame):
        code = frame.method.code
        return code[frame.pc] if frame.pc < len(code) else None

    # -- stepping

    def step(self) -> StepOutcome:
        """Execute exactly one instruction, stepping into sends."""
        return self.execution.step()

    def step_over(self) -> StepOutcome:
        """Execute the current instruction; if it pushes a frame, run until
        that frame has returned and its result is on this frame's stack."""
        entry_depth = self.execution.depth
        outcome = self.execution.step()
        while (self.execution.status is RunStatus.RUNNING
               and self.execution.depth > entry_depth):
            outcome = self.execution.step()
        if self.execution.status is RunStatus.FAILED:
            raise UnhandledExceptionDuringStepOver(
                self.execution.failure_description())
        return outcome

    def step_until(self, predicate, *, max_steps: int = DEFAULT_STEP_BUDGET) -> None:
        """Step (at least once), then keep stepping until predicate(session)
        is true or the execution ends."""
        steps = 0
        while True:
            self.execution.step()
            steps += 1
            if self.is_execution_finished() or predicate(self):
                return
            if steps >= max_steps:
                raise StepBudgetExceeded(f"predicate still false after {max_steps} steps")

    def skip(self) -> None:
        self.skip_with(None)

    def skip_with(self, replacement) -> None:
        """Cancel the current instruction's effect and make `replacement`
        its value: a send's operands are popped unconsumed, a store writes
        nothing, a push pushes the replacement. The stack shape afterwards
        is exactly what normal execution would have produced."""
        frame = self._require_frame()
        if self.execution.status is not RunStatus.RUNNING:
            raise ExecutionAlreadyFinished("the execution has finished")
        instr = self._current_instruction(frame)
        if instr is None or instr.op not in SKIPPABLE_OPS:
            what = instr.op.value if instr is not None else "end of code"
            raise NotSkippable(f"cannot skip {what}")
        stack = frame.stack
        if instr.op in (Op.SEND, Op.SEND_SUPER):
            argc = instr.b
            del stack[len(stack) - argc - 1:]
            stack.append(replacement)
        elif instr.op in (Op.STORE_TEMP, Op.STORE_FIELD):
            stack.pop()
            stack.append(replacement)
        else:  # plain pushes
            stack.append(replacement)
        frame.pc += 1

    def continue_(self, *, max_steps: int = DEFAULT_STEP_BUDGET) -> HitDescriptor:
        """Step until a breakpoint or watch is about to trigger, the
        execution fails, or it finishes; suspend before the triggering
        instruction and return the hit."""
        steps = 0
        while True:
            if self.execution.status is RunStatus.FINISHED:
                return self._record(HitDescriptor(HitDescriptor.EXECUTION_FINISHED))
            if self.execution.status is RunStatus.FAILED:
                top = self.execution.top
                return self._record(HitDescriptor(
                    HitDescriptor.UNHANDLED_EXCEPTION,
                    node=top.current_node(), frame_id=top.frame_id))
            self.execution.step()
            steps += 1
            if steps > max_steps:
                raise StepBudgetExceeded(f"no trigger after {max_steps} steps")
            if self.execution.status is not RunStatus.RUNNING:
                continue  # resolve on the next loop turn
            hit = self._check_triggers()
            if hit is not None:
                return hit

    def _check_triggers(self) -> HitDescriptor | None:
        frame = self.execution.top
        node = frame.current_node()
        for bp in sorted(self.breakpoints.values(), key=lambda b: b.id):
            if bp.matches(frame, node):
                return self._fire_breakpoint(bp, node, frame)
        instr = self._current_instruction(frame)
        if instr is None:
            return None
        if instr.op in (Op.SEND, Op.SEND_SUPER) and instr.b + 1 <= len(frame.stack):
            receiver = frame.stack[-instr.b - 1]
            selector = frame.method.literals[instr.a]
            for watch in sorted(self.watches.values(), key=lambda w: w.id):
                if watch.matches_send(receiver, selector):
                    return self._fire_watch(watch, HitDescriptor.WATCH_CALL,
                                            node, frame)
        if instr.op is Op.STORE_FIELD:
            obj = frame.receiver
            field_name = obj.cls.all_fields[instr.a]
            for watch in sorted(self.watches.values(), key=lambda w: w.id):
                if watch.matches_write(obj, field_name):
                    return self._fire_watch(watch, HitDescriptor.WATCH_WRITE,
                                            node, frame)
        return None

    def _fire_breakpoint(self, bp, node, frame) -> HitDescriptor:
        bp.hit_count += 1
        descriptor = HitDescriptor(HitDescriptor.BREAKPOINT, breakpoint_id=bp.id,
                                   node=node, frame_id=frame.frame_id)
        self._record(descriptor)
        self._run_action(bp.action)
        if bp.once:
            bp.remove()
            descriptor.removed = True
        return descriptor

    def _fire_watch(self, watch, kind, node, frame) -> HitDescriptor:
        watch.hit_count += 1
        descriptor = HitDescriptor(kind, watch_id=watch.id, node=node,
                                   frame_id=frame.frame_id)
        self._record(descriptor)
        self._run_action(watch.action)
        if watch.once:
            watch.remove()
            descriptor.removed = True
        return descriptor

    def _record(self, descriptor: HitDescriptor) -> HitDescriptor:
        self.last_hit = descriptor
        self.hits.append(descriptor)
        return descriptor

    def _run_action(self, action) -> None:
        if action is None:
            return
        if self._action_depth >= MAX_ACTION_DEPTH:
            raise ReentrancyLimit(
                f"hit actions nested deeper than {MAX_ACTION_DEPTH}")
        self._action_depth += 1
        try:
            action(self)
        finally:
            self._action_depth -= 1

    # -- breakpoints and watches

    def set_breakpoint(self, target=None) -> Breakpoint:
        """Target: an AstNode, a compiled method (or its handle), or None
        for the current node. Method breakpoints fire once per activation."""
        if target is None:
            target = self.current_node()
        bp_id = self._next_breakpoint_id
        if isinstance(target, AstNode):
            known = self.compiled.node_by_id(target.id)
            if known is not target:
                raise UnknownTarget(f"node n{target.id} is not from this program")
            bp = Breakpoint(self, bp_id, node_ids={target.id})
        elif isinstance(target, (CompiledMethod, MethodHandle)):
            method = target.method if isinstance(target, MethodHandle) else target
            bp = Breakpoint(self, bp_id, method=method)
        else:
            raise UnknownTarget(f"cannot set a breakpoint on {target!r}")
        self.breakpoints[bp_id] = bp
        self._next_breakpoint_id += 1
        return bp

    def set_breakpoint_on_method(self, class_name: str, selector: str) -> Breakpoint:
        method = self.compiled.find_method(class_name, selector)
        if method is None:
            raise UnknownTarget(f"no method {class_name}>>{selector}")
        return self.set_breakpoint(method)

    def halt_on_call(self, obj, selector=None) -> Watch:
        self._check_watchable(obj)
        return self._add_watch(Watch(self, self._next_watch_id, Watch.ON_CALL,
                                     obj, selector_filter=_selector_name(selector)))

    def halt_on_write(self, obj, field=None) -> Watch:
        self._check_watchable(obj)
        if not isinstance(obj, GuestObject):
            raise NonWatchableValue("only objects with fields can be write-watched")
        return self._add_watch(Watch(self, self._next_watch_id, Watch.ON_WRITE,
                                     obj, field_filter=_selector_name(field)))

    def _add_watch(self, watch: Watch) -> Watch:
        self.watches[watch.id] = watch
        self._next_watch_id += 1
        return watch

    @staticmethod
    def _check_watchable(obj) -> None:
        if not isinstance(obj, WATCHABLE_VARIANTS):
            raise NonWatchableValue(
                "integers, strings, symbols, booleans and nil have no usable "
                "identity to watch")

    # -- inspection

    def current_node(self) -> AstNode:
        return self._require_frame().current_node()

    def context(self) -> Context:
        return Context(self, self._require_frame())

    def stack(self) -> list:
        return [Context(self, f) for f in self._require_frame().chain()]

    @property
    def receiver(self):
        return self._require_frame().receiver

    @property
    def selector(self):
        return self.context().selector

    @property
    def method(self) -> MethodHandle:
        return method_handle(self._require_frame().method)

    @property
    def arguments(self) -> list:
        return list(self._require_frame().arguments)

    @property
    def temporaries(self) -> dict:
        return self.context().temporaries

    # -- operand introspection (non-destructive reads of the value stack)

    def _send_parts(self):
        frame = self._require_frame()
        instr = self._current_instruction(frame)
        if instr is None or instr.op not in (Op.SEND, Op.SEND_SUPER):
            raise NotAtMessageSend("the current instruction is not a message send")
        argc = instr.b
        stack = frame.stack
        receiver = stack[-argc - 1]
        args = list(stack[len(stack) - argc:]) if argc else []
        return receiver, frame.method.literals[instr.a], args

    def message_receiver(self):
        return self._send_parts()[0]

    def message_selector(self) -> Symbol:
        return Symbol(self._send_parts()[1])

    def message_arguments(self) -> list:
        return self._send_parts()[2]

    def _store_parts(self):
        frame = self._require_frame()
        instr = self._current_instruction(frame)
        if instr is None or instr.op not in (Op.STORE_TEMP, Op.STORE_FIELD):
            raise NotAtAssignment("the current instruction is not an assignment")
        return frame.stack[-1], frame.current_node()

    def assignment_value(self):
        return self._store_parts()[0]

    def assignment_variable_name(self) -> Symbol:
        return Symbol(self._store_parts()[1].name)


def _selector_name(value):
    if value is None:
        return None
    if isinstance(value, Symbol):
        return value.name
    return str(value)


def debug(program, *, seed: int = 1, bindings: dict | None = None) -> DebugSession:
    """Open a debug session suspended before the first instruction of main."""
    if isinstance(program, CompiledProgram):
        compiled = program
    elif isinstance(program, (str, LumenProgram)):
        compiled = compile_program(program)
    else:
        raise TypeError(f"cannot debug {type(program).__name__}")
    return DebugSession(compiled, seed=seed, bindings=bindings)
