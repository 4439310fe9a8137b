"""The stepping virtual machine.

One Execution owns a chain of frames (top -> sender -> ... -> None) and
moves by single-instruction steps; there is no host-side recursion, so a
step is always a cheap, interruptible unit and the debugger can stop
between any two of them.

Send convention: the sender's pc moves past the send and the operands leave
its value stack when the callee frame is pushed; the result lands on the
sender's stack when the callee returns. A frame that is current therefore
always satisfies len(stack) == stack_depths[pc], which step() checks before
executing — mutating a suspended frame's stack out of shape is caught as a
VmFault instead of corrupting the run.

Exceptions: signal searches the sender chain for a frame protected by
on:do:, kills every frame down to it, and runs the handler block in its
place (the handler's value becomes the on:do: value). With no handler, the
send that signalled is restored — operands back on the stack, pc back on
the send — and the execution is left FAILED at that exact position, fully
inspectable.
"""

from __future__ import annotations

import enum
import itertools

from .bytecode import RETURN_METHOD, Op
from .compiler import CompiledProgram, compile_program
from .errors import (ExecutionAlreadyFinished, StepBudgetExceeded,
                     UnhandledGuestException, VmFault)
from .parser import LumenProgram
from .primitives import (PRIMITIVES, PUSHED, GuestError, SignalRequest,
                         print_string)
from .values import (BlockClosure, GuestClass, GuestObject, HostBridge,
                     MethodHandle, Symbol)

DEFAULT_STEP_BUDGET = 10_000_000


class RunStatus(enum.Enum):
    RUNNING = "running"
    FINISHED = "finished"
    FAILED = "failed"


class StepOutcome(enum.Enum):
    ADVANCED = "advanced"            # same frame, next instruction
    FRAME_PUSHED = "framePushed"     # a callee (or handler) frame became current
    FRAME_RETURNED = "frameReturned" # one or more frames returned or unwound
    FINISHED = "finished"            # the bottom frame returned
    FAILED = "failed"                # an unhandled guest exception


class Frame:
    """One activation. Block frames alias their home frame's temp slots."""

    __slots__ = ("frame_id", "method", "receiver", "arguments", "temps", "pc",
                 "stack", "sender", "home", "depth", "dead", "handler")

    def __init__(self, frame_id, method, receiver, arguments, temps, sender, home):
        self.frame_id = frame_id
        self.method = method
        self.receiver = receiver
        self.arguments = list(arguments)
        self.temps = temps
        self.pc = 0
        self.stack = []
        self.sender = sender
        self.home = home if home is not None else self
        self.depth = sender.depth + 1 if sender is not None else 1
        self.dead = False
        self.handler = None  # (exception class, handler block) when protected

    @property
    def is_block(self) -> bool:
        return self.method.is_block

    def current_node(self):
        code = self.method.code
        pc = self.pc if self.pc < len(code) else len(code) - 1
        return self.method.pc_nodes[pc] if code else None

    def chain(self):
        f = self
        while f is not None:
            yield f
            f = f.sender

    def __repr__(self) -> str:
        return f"<frame #{self.frame_id} {self.method.display_name()} pc={self.pc}>"


class Execution:
    """A program run. Child executions (share_with) reuse the parent's heap,
    globals, output and id counters, so block evaluations launched by the
    debugger see the same world but step on their own frame chain."""

    def __init__(self, compiled: CompiledProgram, *, seed: int = 1,
                 bindings: dict | None = None, share_with: "Execution | None" = None):
        self.compiled = compiled
        self.classes = compiled.classes
        if share_with is None:
            self.heap: dict = {}
            self._handles = itertools.count(1)
            self._frame_ids = itertools.count(1)
            self.output: list = []
            self.output_listeners: list = []
            self.globals: dict = dict(compiled.classes)
            self.globals["Transcript"] = self.instantiate(self.classes["TranscriptStream"])
            self.globals["DefaultRandomSeed"] = seed
            if bindings:
                self.globals.update(bindings)
        else:
            self.heap = share_with.heap
            self._handles = share_with._handles
            self._frame_ids = share_with._frame_ids
            self.output = share_with.output
            self.output_listeners = share_with.output_listeners
            self.globals = share_with.globals
        self.top: Frame | None = None
        self.status = RunStatus.RUNNING
        self.result = None
        self.failure = None  # the guest exception object after FAILED
        self.steps_executed = 0
        self.frames_pushed = 0
        self.frames_returned = 0

    # -- world access

    def class_of(self, value) -> GuestClass:
        c = self.classes
        if value is None:
            return c["UndefinedObject"]
        if isinstance(value, bool):
            return c["True"] if value else c["False"]
        if isinstance(value, int):
            return c["Integer"]
        if isinstance(value, str):
            return c["String"]
        if isinstance(value, Symbol):
            return c["Symbol"]
        if isinstance(value, BlockClosure):
            return c["Block"]
        if isinstance(value, MethodHandle):
            return c["CompiledMethod"]
        if isinstance(value, GuestClass):
            return c["Class"]
        if isinstance(value, HostBridge):
            return c[value.guest_class_name]
        if isinstance(value, GuestObject):
            return value.cls
        raise VmFault(f"not a guest value: {value!r}")

    def instantiate(self, cls: GuestClass) -> GuestObject:
        obj = GuestObject(cls, next(self._handles))
        if (cls.descends_from(self.classes["OrderedCollection"])
                or cls.descends_from(self.classes["Array"])
                or cls.descends_from(self.classes["Dictionary"])):
            obj.store = []
        self.heap[obj.handle] = obj
        return obj

    def new_array(self, items) -> GuestObject:
        obj = self.instantiate(self.classes["Array"])
        obj.store.extend(items)
        return obj

    def new_ordered_collection(self, items=()) -> GuestObject:
        obj = self.instantiate(self.classes["OrderedCollection"])
        obj.store.extend(items)
        return obj

    def new_exception(self, class_name: str, message: str) -> GuestObject:
        obj = self.instantiate(self.classes[class_name])
        obj.set_field("messageText", message)
        return obj

    def write_output(self, chunk: str) -> None:
        self.output.append(chunk)
        for listener in self.output_listeners:
            listener(chunk)

    @property
    def output_text(self) -> str:
        return "".join(self.output)

    @property
    def depth(self) -> int:
        return self.top.depth if self.top is not None else 0

    def failure_description(self) -> str:
        exc = self.failure
        if exc is None:
            return ""
        text = exc.field_named("messageText") if "messageText" in exc.cls.field_slots else None
        name = exc.cls.name
        return f"{name}: {text}" if isinstance(text, str) else name

    # -- frames

    def push_main_frame(self) -> Frame:
        method = self.compiled.main
        frame = Frame(next(self._frame_ids), method, None, (),
                      [None] * method.total_slots, sender=None, home=None)
        self.top = frame
        self.frames_pushed += 1
        return frame

    def push_method_frame(self, method, receiver, args, sender) -> Frame:
        temps = [None] * method.total_slots
        temps[:len(args)] = args
        frame = Frame(next(self._frame_ids), method, receiver, args, temps,
                      sender=sender, home=None)
        self.top = frame
        self.frames_pushed += 1
        return frame

    def push_block_frame(self, closure: BlockClosure, args, sender) -> Frame:
        home = closure.home_frame
        frame = Frame(next(self._frame_ids), closure.method, home.receiver,
                      args, home.temps, sender=sender, home=home)
        for slot, value in zip(closure.method.arg_slots, args):
            home.temps[slot] = value
        self.top = frame
        self.frames_pushed += 1
        return frame

    # -- stepping

    def step(self) -> StepOutcome:
        if self.status is not RunStatus.RUNNING:
            raise ExecutionAlreadyFinished(f"execution is {self.status.value}")
        frame = self.top
        method = frame.method
        if frame.pc >= len(method.code):
            # only a zero-instruction main body gets here: it answers nil
            return self._return_value(frame, None)
        expected = method.stack_depths[frame.pc]
        if len(frame.stack) != expected:
            raise VmFault(f"value stack of {method.display_name()} has "
                          f"{len(frame.stack)} values at pc {frame.pc}, "
                          f"expected {expected} (stack mutation out of shape?)")
        instr = method.code[frame.pc]
        self.steps_executed += 1
        op = instr.op
        stack = frame.stack

        if op is Op.PUSH_SELF:
            stack.append(frame.receiver)
        elif op is Op.PUSH_LITERAL:
            stack.append(method.literals[instr.a])
        elif op is Op.PUSH_TEMP:
            stack.append(frame.temps[instr.a])
        elif op is Op.STORE_TEMP:
            frame.temps[instr.a] = stack[-1]
        elif op is Op.PUSH_FIELD:
            stack.append(frame.receiver.fields[instr.a])
        elif op is Op.STORE_FIELD:
            frame.receiver.fields[instr.a] = stack[-1]
        elif op is Op.PUSH_GLOBAL:
            name = method.literals[instr.a]
            if name not in self.globals:
                return self._signal_here(frame, "Error", f"undefined global '{name}'")
            stack.append(self.globals[name])
        elif op is Op.MAKE_BLOCK:
            closure = BlockClosure(method.block_methods[instr.a], frame.home)
            stack.append(closure)
        elif op is Op.POP:
            stack.pop()
        elif op in (Op.SEND, Op.SEND_SUPER):
            return self._send(frame, instr, op is Op.SEND_SUPER)
        elif op is Op.RETURN_TOP:
            return self._return_top(frame, instr)
        else:  # pragma: no cover
            raise VmFault(f"unknown opcode {op}")
        frame.pc += 1
        return StepOutcome.ADVANCED

    def _signal_here(self, frame, class_name, message) -> StepOutcome:
        """Signal from the current instruction without touching the stack."""
        exc = self.new_exception(class_name, message)
        return self.signal_exception(exc, frame, frame.pc, ())

    def _send(self, frame, instr, is_super: bool) -> StepOutcome:
        method = frame.method
        selector = method.literals[instr.a]
        argc = instr.b
        old_pc = frame.pc
        stack = frame.stack
        args = stack[len(stack) - argc:]
        del stack[len(stack) - argc:]
        receiver = stack.pop()
        frame.pc = old_pc + 1
        try:
            if isinstance(receiver, HostBridge) and receiver.can_handle(selector):
                stack.append(receiver.handle(selector, args, self))
                return StepOutcome.ADVANCED
            if is_super:
                owner = method.owner_class
                start = owner.superclass if owner is not None else None
            else:
                start = self.class_of(receiver)
            found = self._lookup(start, selector)
            if found is None:
                return self._dispatch_dnu(frame, receiver, selector, args)
            kind, target = found
            if kind == "method":
                self.push_method_frame(target, receiver, args, frame)
                return StepOutcome.FRAME_PUSHED
            result = target(self, frame, receiver, args)
            if result is PUSHED:
                return StepOutcome.FRAME_PUSHED
            stack.append(result)
            return StepOutcome.ADVANCED
        except GuestError as e:
            exc = self.new_exception(e.class_name, e.message)
            return self.signal_exception(exc, frame, old_pc, [receiver] + args)
        except SignalRequest as e:
            return self.signal_exception(e.exc_obj, frame, old_pc, [receiver] + args)

    @staticmethod
    def _lookup(cls, selector):
        if cls is None:
            return None
        for c in cls.lineage():
            if selector in c.methods:
                return ("method", c.methods[selector])
            prim = PRIMITIVES.get((c.name, selector))
            if prim is not None:
                return ("primitive", prim)
        return None

    def _dispatch_dnu(self, frame, receiver, selector, args) -> StepOutcome:
        msg = self.instantiate(self.classes["Message"])
        msg.set_field("selector", Symbol(selector))
        msg.set_field("arguments", self.new_array(args))
        found = self._lookup(self.class_of(receiver), "doesNotUnderstand:")
        kind, target = found  # Object always defines it
        if kind == "method":
            self.push_method_frame(target, receiver, [msg], frame)
            return StepOutcome.FRAME_PUSHED
        frame.stack.append(target(self, frame, receiver, [msg]))  # pragma: no cover
        return StepOutcome.ADVANCED  # pragma: no cover

    def _return_top(self, frame, instr) -> StepOutcome:
        value = frame.stack.pop()
        if instr.a == RETURN_METHOD:
            target = frame.home
            if target.dead or not any(f is target for f in frame.chain()):
                frame.stack.append(value)  # leave the frame as it was
                exc = self.new_exception("BlockCannotReturn",
                                         "the home method has already returned")
                return self.signal_exception(exc, frame, frame.pc, ())
        else:
            target = frame
        return self._return_value(target, value)

    def _return_value(self, target, value) -> StepOutcome:
        f = self.top
        while True:
            f.dead = True
            self.frames_returned += 1
            done = f is target
            f = f.sender
            if done:
                break
        self.top = target.sender
        if self.top is None:
            self.status = RunStatus.FINISHED
            self.result = value
            return StepOutcome.FINISHED
        self.top.stack.append(value)
        return StepOutcome.FRAME_RETURNED

    def signal_exception(self, exc_obj, origin_frame, old_pc, operands) -> StepOutcome:
        exc_cls = self.class_of(exc_obj)
        handler_frame = None
        for f in self.top.chain():
            if f.handler is not None and exc_cls.descends_from(f.handler[0]):
                handler_frame = f
                break
        if handler_frame is None:
            origin_frame.stack.extend(operands)
            origin_frame.pc = old_pc
            self.status = RunStatus.FAILED
            self.failure = exc_obj
            return StepOutcome.FAILED
        sender = handler_frame.sender
        f = self.top
        while True:
            f.dead = True
            self.frames_returned += 1
            done = f is handler_frame
            f = f.sender
            if done:
                break
        _, handler_block = handler_frame.handler
        handler_args = [exc_obj] if handler_block.method.num_args == 1 else []
        self.push_block_frame(handler_block, handler_args, sender=sender)
        return StepOutcome.FRAME_PUSHED


# Driving --------------------------------------------------------------------

def create_execution(program, *, seed: int = 1, bindings: dict | None = None) -> Execution:
    if isinstance(program, CompiledProgram):
        compiled = program
    elif isinstance(program, (str, LumenProgram)):
        compiled = compile_program(program)
    else:
        raise TypeError(f"cannot execute {type(program).__name__}")
    execution = Execution(compiled, seed=seed, bindings=bindings)
    execution.push_main_frame()
    return execution


def run_to_completion(execution: Execution,
                      max_steps: int = DEFAULT_STEP_BUDGET) -> Execution:
    steps = 0
    while execution.status is RunStatus.RUNNING:
        if steps >= max_steps:
            raise StepBudgetExceeded(f"no result after {max_steps} steps")
        execution.step()
        steps += 1
    return execution


def run_program(source, *, seed: int = 1,
                max_steps: int = DEFAULT_STEP_BUDGET) -> Execution:
    return run_to_completion(create_execution(source, seed=seed), max_steps)


def run_block(parent: Execution, closure: BlockClosure, args=(),
              max_steps: int = DEFAULT_STEP_BUDGET):
    """Evaluate a block on its own frame chain, sharing the parent's world.

    A ^ inside the block cannot reach frames of the parent chain (the child
    chain bottoms out at None), so it raises BlockCannotReturn — which, like
    any unhandled exception here, surfaces as UnhandledGuestException."""
    if not isinstance(closure, BlockClosure):
        raise VmFault("run_block expects a block closure")
    if closure.method.num_args != len(args):
        raise VmFault(f"block expects {closure.method.num_args} arguments, "
                      f"got {len(args)}")
    child = Execution(parent.compiled, share_with=parent)
    child.push_block_frame(closure, list(args), sender=None)
    run_to_completion(child, max_steps)
    if child.status is RunStatus.FAILED:
        raise UnhandledGuestException(child.failure_description(), child.failure)
    return child.result


def run_send(parent: Execution, receiver, selector: str, args=(),
             max_steps: int = DEFAULT_STEP_BUDGET):
    """Send one message on a child execution sharing the parent's world."""
    child = Execution(parent.compiled, share_with=parent)
    args = list(args)
    found = Execution._lookup(child.class_of(receiver), selector)
    if found is None:
        msg = child.instantiate(child.classes["Message"])
        msg.set_field("selector", Symbol(selector))
        msg.set_field("arguments", child.new_array(args))
        found = Execution._lookup(child.class_of(receiver), "doesNotUnderstand:")
        args = [msg]
    kind, target = found
    if kind == "method":
        child.push_method_frame(target, receiver, args, sender=None)
    else:
        try:
            result = target(child, None, receiver, args)
        except GuestError as e:
            raise UnhandledGuestException(f"{e.class_name}: {e.message}") from e
        except SignalRequest as e:
            raise UnhandledGuestException(
                "unhandled signal during a host-driven send", e.exc_obj) from e
        if result is not PUSHED:
            return result
    run_to_completion(child, max_steps)
    if child.status is RunStatus.FAILED:
        raise UnhandledGuestException(child.failure_description(), child.failure)
    return child.result


def describe_value(execution: Execution, value) -> str:
    return print_string(execution, value)
