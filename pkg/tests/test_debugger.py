"""Tests for the debug session: stepping, skipping, triggers, context access
and mutation, plus the two cross-cutting properties (step-over decomposition
and once-breakpoint single-hit) checked across the corpus."""

import pytest

from lumen.bytecode import Op, method_checksum
from lumen.debugger import Context, HitDescriptor, debug
from lumen.errors import (DeadFrame, EmptyValueStack, ExecutionAlreadyFinished,
                          NonWatchableValue, NotAtAssignment, NotAtMessageSend,
                          NotSkippable, NotTopFrame, ReentrancyLimit,
                          UnhandledExceptionDuringStepOver, UnknownTarget)
from lumen.nodes import NodeKind
from lumen.values import Symbol
from lumen.vm import RunStatus, StepOutcome, run_program

from corpus import PROGRAMS


def _step_to_send(session, selector):
    """Advance until the given selector's send is the current instruction."""
    while True:
        frame = session.execution.top
        instr = frame.method.code[frame.pc] if frame.pc < len(frame.method.code) else None
        if (instr is not None and instr.op in (Op.SEND, Op.SEND_SUPER)
                and frame.method.literals[instr.a] == selector):
            return
        session.step()


# Session basics -----------------------------------------------------------------

def test_fresh_session_is_suspended_before_first_instruction():
    s = debug("1 + 2")
    assert not s.is_execution_finished()
    node = s.current_node()
    assert node.kind is NodeKind.LITERAL and node.value == 1
    assert s.execution.steps_executed == 0


def test_empty_program_is_finished_at_birth():
    s = debug("")
    assert s.is_execution_finished()
    assert s.result is None
    assert s.execution.steps_executed == 0


def test_two_sessions_on_one_source_are_independent():
    a = debug("| x | x := 1. x")
    b = debug("| x | x := 1. x")
    a.step()
    assert a.execution.steps_executed == 1
    assert b.execution.steps_executed == 0


def test_step_into_user_method():
    s = debug("class A { method answer { ^7 } } A new answer")
    s.step()  # push_global A
    s.step()  # send new (primitive)
    outcome = s.step()  # send answer
    assert outcome is StepOutcome.FRAME_PUSHED
    assert s.method.method.display_name() == "A>>answer"
    assert s.execution.top.pc == 0


# Operand introspection ------------------------------------------------------------

def test_message_introspection_before_send():
    s = debug("1 + 2")
    s.step()
    s.step()
    assert s.message_receiver() == 1
    assert s.message_selector() == Symbol("+")
    assert s.message_arguments() == [2]
    # non-destructive: the operands are still there for the real send
    s.step()
    assert s.execution.top.stack == [3]


def test_message_introspection_rejects_other_positions():
    s = debug("1 + 2")
    with pytest.raises(NotAtMessageSend):
        s.message_receiver()


def test_assignment_introspection_before_store():
    s = debug("| foo | foo := 42. foo")
    s.step()  # push 42; store is current
    assert s.assignment_value() == 42
    assert s.assignment_variable_name() == Symbol("foo")


def test_assignment_introspection_rejects_other_positions():
    s = debug("| foo | foo := 42. foo")
    with pytest.raises(NotAtAssignment):
        s.assignment_value()


def test_nil_receiver_is_visible_before_send():
    s = debug("nil size")
    s.step()
    assert s.message_receiver() is None
    assert s.message_selector() == Symbol("size")


# step_over -------------------------------------------------------------------------

def test_step_over_non_send_equals_step():
    s = debug("1 + 2")
    assert s.step_over() is StepOutcome.ADVANCED
    assert s.execution.top.stack == [1]


def test_step_over_recursive_call_restores_depth_with_result():
    src = ("class M { method fact: n { n <= 1 ifTrue: [ ^1 ]. "
           "^n * (self fact: n - 1) } } M new fact: 5")
    s = debug(src)
    _step_to_send(s, "fact:")
    entry = s.execution.depth
    s.step_over()
    assert s.execution.depth == entry
    assert s.execution.top.stack[-1] == 120


def test_step_over_raises_when_callee_fails():
    s = debug("class M { method boom { ^1 / 0 } } M new boom")
    s.step()
    s.step()
    with pytest.raises(UnhandledExceptionDuringStepOver):
        s.step_over()
    assert s.execution.status is RunStatus.FAILED
    assert s.failure_description() == "ZeroDivide: division by zero"


# step_until --------------------------------------------------------------------------

def test_step_until_steps_at_least_once():
    s = debug("1 + 2")
    s.step_until(lambda sess: True)
    assert s.execution.steps_executed == 1
    s.step_until(lambda sess: True)  # chaining makes progress
    assert s.execution.steps_executed == 2


def test_step_until_false_predicate_runs_to_completion():
    s = debug("1 + 2")
    s.step_until(lambda sess: False)
    assert s.is_execution_finished()
    assert s.result == 3


def test_step_until_on_finished_session_raises():
    s = debug("1 + 2")
    s.continue_()
    with pytest.raises(ExecutionAlreadyFinished):
        s.step_until(lambda sess: True)


# skip ----------------------------------------------------------------------------------

def test_skip_with_replaces_send_result():
    s = debug("1 + 2")
    s.step()
    s.step()
    s.skip_with(99)
    assert s.execution.top.stack == [99]
    s.step()
    assert s.result == 99


def test_skip_store_leaves_variable_unwritten():
    s = debug("| x | x := 5. x")
    s.step()  # push 5
    s.skip()  # skip the store: x keeps nil, expression value nil
    while not s.is_execution_finished():
        s.step()
    assert s.result is None


def test_skip_push_replaces_pushed_value():
    s = debug("| x | x := 3 + 4. x * 2")
    s.step()
    s.step()
    s.skip_with(10)  # replace the + send's value
    while not s.is_execution_finished():
        s.step()
    assert s.result == 20


def test_skip_rejects_structural_instructions():
    s = debug("| x | x := [ 1 ]. x value")
    with pytest.raises(NotSkippable):
        s.skip()  # make_block
    s.step()
    s.step()
    with pytest.raises(NotSkippable):
        s.skip()  # the statement-boundary pop


def test_skip_preserves_stack_shape_for_later_steps():
    s = debug("| x | x := 3 + 4. x * 2")
    s.step()
    s.step()
    s.skip_with(10)
    # the depth checker accepts every following step (no VmFault)
    while not s.is_execution_finished():
        s.step()
    assert s.result == 20


# continue and breakpoints -----------------------------------------------------------------

def test_continue_without_triggers_reaches_completion():
    s = debug("1 + 2")
    hit = s.continue_()
    assert hit.kind == HitDescriptor.EXECUTION_FINISHED
    assert s.result == 3


def test_continue_equals_run_to_completion():
    src = ("class P { fields x. method bump { x := (x ifNil: [0]) + 1. ^x } } "
           "| p | p := P new. p bump. p bump")
    a = debug(src)
    a.continue_()
    b = run_program(src)
    assert a.result == b.result
    assert a.execution.steps_executed == b.steps_executed
    assert a.output_text == b.output_text


def test_node_breakpoint_suspends_before_the_send():
    s = debug("| x | x := 1. x := x + 1. x")
    plus = next(n for n in s.compiled.program.main_seq.walk()
                if n.kind is NodeKind.MESSAGE and n.selector == "+")
    s.set_breakpoint(plus)
    hit = s.continue_()
    assert hit.kind == HitDescriptor.BREAKPOINT
    assert hit.node is plus
    assert s.current_node() is plus
    # suspend-before: operands staged, send not executed
    assert s.message_selector() == Symbol("+")
    assert s.execution.top.stack == [1, 1]


def test_method_breakpoint_fires_once_per_activation():
    src = ("class A { method ping { ^1 } } "
           "| t | t := 0. 3 timesRepeat: [ t := t + A new ping ]. t")
    s = debug(src)
    s.set_breakpoint_on_method("A", "ping")
    hits = 0
    while True:
        h = s.continue_()
        if h.kind != HitDescriptor.BREAKPOINT:
            break
        hits += 1
        assert s.execution.top.pc == 0
        assert s.method.method.selector == "ping"
    assert hits == 3
    assert s.result == 3


def test_breakpoint_on_prelude_method():
    s = debug("3 max: 4")
    s.set_breakpoint_on_method("Integer", "max:")
    hit = s.continue_()
    assert hit.kind == HitDescriptor.BREAKPOINT
    assert s.method.method.display_name() == "Integer>>max:"
    assert s.continue_().kind == HitDescriptor.EXECUTION_FINISHED
    assert s.result == 4


def test_once_breakpoint_hits_exactly_once():
    src = ("class A { method ping { ^1 } } "
           "| t | t := 0. 3 timesRepeat: [ t := t + A new ping ]. t")
    s = debug(src)
    s.set_breakpoint_on_method("A", "ping").set_once()
    first = s.continue_()
    second = s.continue_()
    assert first.kind == HitDescriptor.BREAKPOINT and first.removed
    assert second.kind == HitDescriptor.EXECUTION_FINISHED
    assert not s.breakpoints


def test_when_hit_action_runs_and_can_remove_its_breakpoint():
    src = ("class A { method ping { ^1 } } "
           "| t | t := 0. 3 timesRepeat: [ t := t + A new ping ]. t")
    s = debug(src)
    seen = []
    bp = s.set_breakpoint_on_method("A", "ping")
    bp.when_hit(lambda sess: (seen.append(sess.selector), bp.remove()))
    assert s.continue_().kind == HitDescriptor.BREAKPOINT
    assert s.continue_().kind == HitDescriptor.EXECUTION_FINISHED
    assert seen == [Symbol("ping")]


def test_disabled_breakpoint_does_not_fire():
    s = debug("3 max: 4")
    bp = s.set_breakpoint_on_method("Integer", "max:")
    bp.disable()
    assert s.continue_().kind == HitDescriptor.EXECUTION_FINISHED
    bp.enable()


def test_breakpoints_are_virtual():
    s = debug("class A { method ping { ^1 } } A new ping")
    before = [method_checksum(m) for m in s.compiled.user_methods()]
    bp1 = s.set_breakpoint_on_method("A", "ping")
    bp2 = s.set_breakpoint(s.current_node())
    bp1.remove()
    bp2.remove()
    s.set_breakpoint_on_method("A", "ping").set_once()
    after = [method_checksum(m) for m in s.compiled.user_methods()]
    assert before == after


def test_unknown_breakpoint_targets_are_rejected():
    s = debug("1 + 2")
    other = debug("3 * 4")
    with pytest.raises(UnknownTarget):
        s.set_breakpoint(other.current_node())  # foreign program's node
    with pytest.raises(UnknownTarget):
        s.set_breakpoint(42)
    with pytest.raises(UnknownTarget):
        s.set_breakpoint_on_method("Integer", "noSuchSelector:")


def test_hit_action_reentrancy_is_capped():
    src = ("class A { method ping { ^1 } } "
           "| t | t := 0. 40 timesRepeat: [ t := t + A new ping ]. t")
    s = debug(src)
    bp = s.set_breakpoint_on_method("A", "ping")
    bp.when_hit(lambda sess: sess.continue_())
    with pytest.raises(ReentrancyLimit):
        s.continue_()


def test_continue_on_failed_execution_reports_the_failure():
    s = debug("1 / 0")
    hit = s.continue_()
    assert hit.kind == HitDescriptor.UNHANDLED_EXCEPTION
    assert s.failure_description() == "ZeroDivide: division by zero"
    # idempotent: asking again re-describes the same state
    assert s.continue_().kind == HitDescriptor.UNHANDLED_EXCEPTION
    assert s.last_hit.kind == HitDescriptor.UNHANDLED_EXCEPTION


# Watches -------------------------------------------------------------------------------------

WATCH_TARGET = """
class Box { fields v. method poke { ^v } method fill: x { v := x } }
| a b |
a := Box new. b := Box new.
a fill: 1. b fill: 2.
a poke. b poke. a poke
"""


def _run_until_temp(session, name):
    while session.temporaries.get(name) is None:
        session.step()


def test_halt_on_call_uses_identity_not_class():
    s = debug(WATCH_TARGET)
    _run_until_temp(s, "b")
    b = s.temporaries["b"]
    s.halt_on_call(b)
    selectors = []
    while True:
        h = s.continue_()
        if h.kind != HitDescriptor.WATCH_CALL:
            break
        assert s.message_receiver() is b
        selectors.append(s.message_selector())
    assert selectors == [Symbol("fill:"), Symbol("poke")]


def test_halt_on_call_selector_filter():
    s = debug(WATCH_TARGET)
    _run_until_temp(s, "b")
    s.halt_on_call(s.temporaries["b"], "poke")
    hits = []
    while True:
        h = s.continue_()
        if h.kind != HitDescriptor.WATCH_CALL:
            break
        hits.append(s.message_selector())
    assert hits == [Symbol("poke")]


def test_call_watch_suspends_before_the_callee_frame_exists():
    s = debug(WATCH_TARGET)
    _run_until_temp(s, "b")
    b = s.temporaries["b"]
    depth_of_main = 1
    s.halt_on_call(b, "fill:")
    s.continue_()
    assert s.execution.depth == depth_of_main  # still in main, send pending
    assert s.message_receiver() is b


def test_halt_on_write_sees_old_value_and_pending_new_value():
    src = """
class P { fields x y. method setX: v { x := v } }
| p q |
p := P new. q := P new.
p setX: 1. q setX: 9. p setX: 2
"""
    s = debug(src)
    _run_until_temp(s, "q")
    p = s.temporaries["p"]
    s.halt_on_write(p, "x")
    observed = []
    while True:
        h = s.continue_()
        if h.kind != HitDescriptor.WATCH_WRITE:
            break
        observed.append((p.field_named("x"), s.assignment_value()))
    assert observed == [(None, 1), (1, 2)]  # q's write never triggers


def test_halt_on_write_field_filter():
    src = """
class P { fields x y. method set { x := 1. y := 2. x := 3 } }
P new set
"""
    s = debug(src)
    s.step()  # push_global P
    s.step()  # send new
    obj = s.execution.top.stack[-1]
    s.halt_on_write(obj, "y")
    hit = s.continue_()
    assert hit.kind == HitDescriptor.WATCH_WRITE
    assert s.assignment_variable_name() == Symbol("y")
    assert s.continue_().kind == HitDescriptor.EXECUTION_FINISHED


def test_primitive_values_are_not_watchable():
    s = debug("1 + 2")
    for bad in (5, "text", Symbol("sym"), True, None):
        with pytest.raises(NonWatchableValue):
            s.halt_on_call(bad)
    with pytest.raises(NonWatchableValue):
        s.halt_on_write(5)


def test_blocks_are_call_watchable_but_not_write_watchable():
    s = debug("| b | b := [ 1 ]. b value")
    s.step()
    blk = s.execution.top.stack[-1]
    s.halt_on_call(blk)
    with pytest.raises(NonWatchableValue):
        s.halt_on_write(blk)


def test_watch_triggers_inside_prelude_internals():
    src = "| oc | oc := OrderedCollection new. oc add: 1. oc do: [ :e | e ]. oc size"
    s = debug(src)
    _run_until_temp(s, "oc")
    oc = s.temporaries["oc"]
    s.halt_on_call(oc, "at:")  # only sent by the do: loop internally
    hit = s.continue_()
    assert hit.kind == HitDescriptor.WATCH_CALL
    assert s.message_receiver() is oc
    assert s.method.method.display_name() == "[] in Collection>>do:"


def test_watch_identity_over_many_allocations():
    src = """
| all target i |
all := OrderedCollection new.
50 timesRepeat: [ all add: Object new ].
target := all at: 17.
i := 0.
[ i < 50 ] whileTrue: [ i := i + 1. (all at: i) printString ].
target printString
"""
    s = debug(src)
    _run_until_temp(s, "target")
    target = s.temporaries["target"]
    s.halt_on_call(target, "printString")
    hits = 0
    while True:
        h = s.continue_()
        if h.kind != HitDescriptor.WATCH_CALL:
            break
        assert s.message_receiver() is target
        hits += 1
    # the loop pass over index 17 plus the final explicit send
    assert hits == 2


def test_watch_remove_stops_triggering():
    s = debug(WATCH_TARGET)
    _run_until_temp(s, "b")
    w = s.halt_on_call(s.temporaries["b"])
    assert s.continue_().kind == HitDescriptor.WATCH_CALL
    w.remove()
    assert s.continue_().kind == HitDescriptor.EXECUTION_FINISHED


# Context access and mutation --------------------------------------------------------------------

def test_stack_lists_frames_top_first():
    s = debug("class F { method inner { ^self } } F new inner")
    while s.execution.depth < 2:
        s.step()
    names = [c.compiled_method.display_name() for c in s.stack()]
    assert names == ["F>>inner", "<main>"]
    assert s.stack()[1].sender is None


def test_frame_snapshot_fields():
    s = debug("class D { method at: k put: v { ^v } } D new at: 1 put: 2")
    while s.execution.depth < 2:
        s.step()
    ctx = s.context()
    assert ctx.selector == Symbol("at:put:")
    assert ctx.arguments == [1, 2]
    assert ctx.pc == 0
    assert ctx.sender.compiled_method.display_name() == "<main>"
    assert s.receiver is ctx.receiver


def test_context_copy_survives_further_stepping():
    s = debug("class F { method inner: n { | d | d := n + 1. ^d } } F new inner: 5")
    _step_to_send(s, "inner:")
    s.step()  # into inner:
    live = s.context()
    snap = live.copy()
    while not s.is_execution_finished():
        s.step()
    with pytest.raises(DeadFrame):
        live.pc
    with pytest.raises(DeadFrame):
        live.temporaries
    assert snap.pc == 0
    assert snap.arguments == [5]
    assert snap.temporaries == {"n": 5, "d": None}  # named slots include params
    assert snap.sender.compiled_method.display_name() == "<main>"


def test_copies_are_deep_for_frame_data_shallow_for_heap():
    s = debug("| oc | oc := OrderedCollection new. oc add: 1. oc add: 2. oc size")
    _run_until_temp(s, "oc")
    snap = s.context().copy()
    heap_obj = snap.temporaries["oc"]
    while not s.is_execution_finished():
        s.step()
    # frame data frozen at copy time, heap object shared and now mutated
    assert snap.temporaries["oc"] is heap_obj
    assert heap_obj.store == [1, 2]


def test_value_stack_push_pop_roundtrip():
    s = debug("1 + 2")
    ctx = s.context()
    ctx.push_value(7)
    assert ctx.pop_value() == 7
    assert s.execution.top.stack == []


def test_value_stack_mutation_restricted_to_live_top():
    s = debug("class A { method go { ^1 } } A new go")
    while s.execution.depth < 2:
        s.step()
    with pytest.raises(NotTopFrame):
        s.stack()[1].push_value(1)
    with pytest.raises(NotTopFrame):
        s.context().copy().push_value(1)
    with pytest.raises(EmptyValueStack):
        s.context().pop_value()


def test_stray_push_is_caught_by_the_depth_checker():
    from lumen.errors import VmFault
    s = debug("1 + 2")
    s.context().push_value(42)
    with pytest.raises(VmFault):
        s.step()


def test_context_equality_by_position():
    s = debug("1 + 2")
    assert s.context() == s.context()
    frozen = s.context().copy()
    assert frozen == s.context()
    s.step()
    assert frozen != s.context()  # pc moved


# Cross-cutting properties over the corpus ----------------------------------------------------------

def _fingerprint(session):
    ex = session.execution
    top = ex.top
    return (ex.status.value, ex.steps_executed, ex.output_text, ex.depth,
            None if top is None else (top.frame_id, top.pc, len(top.stack)))


def _decomposed_step_over(session):
    entry = session.execution.depth
    session.step()
    while (session.execution.status is RunStatus.RUNNING
           and session.execution.depth > entry):
        session.step()


SMALL = [e for e in PROGRAMS
         if run_program(e["source"], seed=e.get("seed", 1)).steps_executed <= 500]


@pytest.mark.parametrize("entry", SMALL, ids=lambda e: e["name"])
def test_step_over_decomposition_property(entry):
    """step_over == step-then-step-while-deeper, at every program point."""
    seed = entry.get("seed", 1)
    total = run_program(entry["source"], seed=seed).steps_executed
    for k in range(total):
        a = debug(entry["source"], seed=seed)
        b = debug(entry["source"], seed=seed)
        for _ in range(k):
            a.step()
            b.step()
        a_raised = b_failed = False
        try:
            a.step_over()
        except UnhandledExceptionDuringStepOver:
            a_raised = True
        _decomposed_step_over(b)
        b_failed = b.execution.status is RunStatus.FAILED
        assert a_raised == b_failed, f"at step {k}"
        assert _fingerprint(a) == _fingerprint(b), f"at step {k}"


@pytest.mark.parametrize("entry", SMALL, ids=lambda e: e["name"])
def test_once_breakpoint_single_hit_property(entry):
    """A once breakpoint on any user method hits at most once per run."""
    seed = entry.get("seed", 1)
    probe = debug(entry["source"], seed=seed)
    methods = [m for m in probe.compiled.user_methods()
               if not m.is_block and m.selector is not None]
    for method in methods:
        s = debug(entry["source"], seed=seed)
        s.set_breakpoint(method).set_once()
        hits = 0
        while True:
            h = s.continue_()
            if h.kind == HitDescriptor.BREAKPOINT:
                hits += 1
                continue
            break
        assert hits <= 1, method.display_name()
        assert not s.breakpoints or hits == 0
