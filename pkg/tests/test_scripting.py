"""Driving sessions from guest-language scripts."""

import pytest

from lumen.debugger import HitDescriptor, debug
from lumen.errors import ScriptFailed
from lumen.scripting import (API_TABLE, DebuggerView, conformance_gaps,
                             conformance_report, eval_script, script_bindings)
from lumen.values import BlockClosure, MethodHandle, Symbol
from lumen.vm import RunStatus


def _run(target_source, script_source, **kwargs):
    session = debug(target_source)
    result = eval_script(session, script_source, **kwargs)
    return session, result


def _items(collection):
    return list(collection.store)


# Conformance ----------------------------------------------------------------------

def test_conformance_has_no_gaps():
    assert conformance_gaps() == []


def test_conformance_report_covers_every_row():
    report = conformance_report()
    assert len(report) == len(API_TABLE) == 40
    assert all(row["ok"] for row in report)
    sections = {row["section"] for row in report}
    assert sections == {"Stepping", "Stack Access", "Stack Modification",
                        "AST and AST Mapping", "Object-Centric Debugging",
                        "Breakpoints", "Stack Access Helpers"}


def test_every_api_selector_is_answered_by_its_proxy():
    from lumen.scripting import (_RECEIVER_PROXIES, _KIND_TESTS)
    for _, _, receiver, selector, _ in API_TABLE:
        proxy = _RECEIVER_PROXIES[receiver]
        if selector == "is*Node":
            for sel in _KIND_TESTS.values():
                assert sel in proxy.SELECTORS
        else:
            assert selector in proxy.SELECTORS, selector


# Stepping -------------------------------------------------------------------------

def test_step_answers_outcome_symbols():
    session, result = _run("1 + 2", """
| seen |
seen := OrderedCollection new.
[ dbg isExecutionFinished ] whileFalse: [ seen add: dbg step ].
seen
""")
    assert _items(result) == [Symbol("advanced"), Symbol("advanced"),
                              Symbol("advanced"), Symbol("finished")]
    assert session.result == 3


def test_step_over_answers_symbol_and_stays_in_frame():
    source = """
class M { method twice: x { ^x * 2 } }
| m |
m := M new.
m twice: 21
"""
    session, result = _run(source, """
| depths |
depths := OrderedCollection new.
[ dbg isExecutionFinished ] whileFalse: [
    dbg stepOver.
    dbg isExecutionFinished ifFalse: [ depths add: dbg context frameId ] ].
depths
""")
    # every suspension is back in the main frame: stepOver never rests deeper
    assert set(_items(result)) == {1}
    assert session.result == 42


def test_step_until_runs_predicate_in_script_world():
    session, result = _run("| a | a := 1. a := 2. a := 3. a", """
| count |
count := 0.
dbg stepUntil: [ count := count + 1. dbg currentNode isAssignmentNode ].
count
""")
    assert result >= 1
    assert session.assignment_value() == 1  # suspended at the first store


def test_step_until_condition_must_answer_boolean():
    session = debug("1 + 2")
    with pytest.raises(ScriptFailed, match="true or false"):
        eval_script(session, "dbg stepUntil: [ 7 ]. nil")


def test_step_until_requires_a_block():
    session = debug("1 + 2")
    with pytest.raises(ScriptFailed, match="expects a block"):
        eval_script(session, "dbg stepUntil: 5. nil")


def test_skip_with_replaces_a_send_result():
    session, _ = _run("| a | a := 2 + 3. a", """
dbg stepUntil: [
    (dbg currentNode isMessageNode) and: [ dbg messageSelector = #+ ] ].
dbg skipWith: 42.
dbg continue.
nil
""")
    assert session.result == 42


def test_skip_errors_are_catchable():
    # at pc 0 of "| a | ..." main the instruction is a literal push; after
    # the final return nothing is skippable -- drive to a non-skippable spot
    session, result = _run("''", """
| msg |
msg := 'none'.
dbg stepUntil: [ dbg isExecutionFinished not ].
[ dbg skip. dbg skip. dbg skip ] on: Error do: [ :e | msg := e messageText ].
msg
""")
    assert "skip" in result or "finished" in result


def test_continue_answers_hit_proxy_kinds():
    session, result = _run("| i | i := 0. [ i < 2 ] whileTrue: [ i := i + 1 ]. i", """
| hit |
hit := dbg continue.
hit kind
""")
    assert result == Symbol("executionFinished")
    assert session.result == 2


# Stack access ---------------------------------------------------------------------

def test_context_fields_from_script():
    source = """
class Greeter {
  method greet: name { ^'hi ' , name }
}
Greeter new greet: 'sam'
"""
    session, result = _run(source, """
| a ctx |
dbg stepUntil: [ dbg selector = #greet: ].
ctx := dbg context.
a := OrderedCollection new.
a add: ctx selector.
a add: (ctx arguments at: 1).
a add: ctx sender selector.
a add: (ctx temporaries at: #name).
a add: (ctx receiver isKindOf: Greeter).
a add: ctx pc.
a
""")
    items = _items(result)
    assert items[0] == Symbol("greet:")
    assert items[1] == "sam"
    assert items[2] == Symbol("<main>")
    assert items[3] == "sam"
    assert items[4] is True
    assert items[5] == 0


def test_stack_is_a_call_stack_of_contexts():
    source = """
class A { method go { ^B new run } }
class B { method run { ^1 } }
A new go
"""
    session, result = _run(source, """
| names |
dbg stepUntil: [ dbg selector = #run ].
names := dbg stack collect: [ :ctx | ctx selector ].
names
""")
    assert _items(result) == [Symbol("run"), Symbol("go"), Symbol("<main>")]


def test_main_context_has_nil_sender_and_selector():
    _, result = _run("1 + 2", """
| a ctx |
ctx := dbg context.
a := OrderedCollection new.
a add: ctx sender isNil.
a add: ctx selector.
a add: ctx receiver isNil.
a
""")
    assert _items(result) == [True, Symbol("<main>"), True]


def test_temporaries_dictionary_includes_params_and_locals():
    source = """
class M { method pad: s { | t | t := s , '!'. ^t } }
M new pad: 'x'
"""
    _, result = _run(source, """
| tmps |
dbg stepUntil: [ dbg selector = #pad: ].
tmps := dbg temporaries.
(tmps at: #s) , '|' , ((tmps at: #t) isNil ifTrue: [ 'nil' ] ifFalse: [ 'set' ])
""")
    assert result == "x|nil"


def test_is_execution_finished_and_result_text():
    session, result = _run("Transcript show: 'out'. 7", """
dbg continue.
(dbg isExecutionFinished printString) , '|' , dbg result printString , '|' , dbg outputText
""")
    assert result == "true|7|out"


# Stack modification ---------------------------------------------------------------

def test_push_and_pop_round_trip():
    _, result = _run("3 + 4", """
| ctx |
ctx := dbg context.
ctx push: 9.
ctx pop
""")
    assert result == 9


def test_pop_rewrites_a_staged_operand():
    session, _ = _run("3 + 4", """
| ctx |
dbg stepUntil: [
    (dbg currentNode isMessageNode) and: [ dbg messageSelector = #+ ] ].
ctx := dbg context.
ctx pop.
ctx push: 40.
dbg continue.
nil
""")
    assert session.result == 43  # 3 + 40


def test_stack_errors_surface_as_guest_errors():
    _, result = _run("1 + 2", """
| msg |
msg := 'none'.
[ dbg context pop ] on: Error do: [ :e | msg := e messageText ].
msg
""")
    assert "empty" in result


# AST mapping ----------------------------------------------------------------------

def test_node_kind_tests_long_and_short_forms():
    _, result = _run("| a | a := 1. a", """
| a n |
dbg stepUntil: [ dbg currentNode isAssignmentNode ].
n := dbg currentNode.
a := OrderedCollection new.
a add: n isAssignmentNode.
a add: n isAssignment.
a add: n isMessageNode.
a add: n kind.
a add: n variableName.
a
""")
    assert _items(result) == [True, True, False, Symbol("Assignment"), Symbol("a")]


def test_message_node_structure_from_script():
    _, result = _run("2 + 3", """
| a n |
dbg stepUntil: [ dbg currentNode isMessageNode ].
n := dbg currentNode.
a := OrderedCollection new.
a add: n selector.
a add: n receiverNode kind.
a add: n argumentNodes size.
a add: ((n argumentNodes at: 1) literalValue).
a add: n sourceText.
a
""")
    items = _items(result)
    assert items[0] == Symbol("+")
    assert items[1] == Symbol("Literal")
    assert items[2] == 1
    assert items[3] == 3
    assert items[4] == "2 + 3"


def test_node_proxies_are_cached_by_identity():
    _, result = _run("1 + 2", """
(dbg currentNode == dbg currentNode) & (dbg context == dbg context)
""")
    assert result is True


def test_accept_dispatches_to_guest_visitor():
    session, result = _run("| a | a := 1 + 2. a", """
class Labeler extends NodeVisitor {
  method visitAssignmentNode: n { ^'assign' }
  method visitMessageNode: n { ^'send ' , n selector printString }
  method visitLiteralNode: n { ^'lit' }
}
| seen v |
v := Labeler new.
seen := OrderedCollection new.
[ dbg isExecutionFinished ] whileFalse: [
    | label |
    label := dbg currentNode accept: v.
    label isNil ifFalse: [ seen add: label ].
    dbg step ].
seen
""")
    assert _items(result) == ["lit", "lit", "send #+", "assign"]


def test_visitor_base_class_defaults_to_nil():
    _, result = _run("1 + 2", """
dbg currentNode accept: NodeVisitor new
""")
    assert result is None


def test_literal_value_on_non_literal_is_an_error():
    _, result = _run("| a | a := 1. a", """
| msg |
msg := 'none'.
dbg stepUntil: [ dbg currentNode isAssignmentNode ].
[ dbg currentNode literalValue ] on: Error do: [ :e | msg := e messageText ].
msg
""")
    assert result == "not a literal node"


def test_method_node_navigation():
    source = """
class M { method pad: s { ^s , '!' } }
M new pad: 'x'
"""
    _, result = _run(source, """
(dbg methodNode: (M methodNamed: #pad:)) kind
""")
    assert result == Symbol("MethodDef")


# Operand introspection ------------------------------------------------------------

def test_message_introspection_from_script():
    source = """
class M { method take: a and: b { ^a + b } }
M new take: 10 and: 20
"""
    _, result = _run(source, """
| a |
dbg stepUntil: [
    (dbg currentNode isMessageNode) and: [ dbg messageSelector = #take:and: ] ].
a := OrderedCollection new.
a add: (dbg messageReceiver isKindOf: M).
a add: dbg messageSelector.
a add: (dbg messageArguments at: 1).
a add: (dbg messageArguments at: 2).
a
""")
    assert _items(result) == [True, Symbol("take:and:"), 10, 20]


def test_assignment_introspection_from_script():
    _, result = _run("| total | total := 6 * 7. total", """
| a |
dbg stepUntil: [ dbg currentNode isAssignmentNode ].
a := OrderedCollection new.
a add: dbg assignmentVariableName.
a add: dbg assignmentValue.
a
""")
    assert _items(result) == [Symbol("total"), 42]


def test_introspection_errors_are_catchable_in_scripts():
    _, result = _run("1 + 2", """
| msg |
msg := 'none'.
[ dbg messageReceiver ] on: Error do: [ :e | msg := e messageText ].
msg
""")
    assert result == "the current instruction is not a message send"


# Breakpoints ----------------------------------------------------------------------

def test_breakpoint_from_script_fires_on_rearrival():
    session, result = _run(
        "| i | i := 0. [ i < 3 ] whileTrue: [ i := i + 1 ]. i", """
| hits bp hit |
hits := OrderedCollection new.
dbg stepUntil: [
    (dbg currentNode isAssignmentNode) and: [ dbg assignmentValue = 1 ] ].
bp := dbg setBreakpoint.
bp whenHit: [ hits add: dbg assignmentValue ].
hit := dbg continue.
hit := dbg continue.
hit := dbg continue.
hits add: hit kind.
hits
""")
    assert _items(result) == [2, 3, Symbol("executionFinished")]
    assert session.result == 3


def test_breakpoint_on_method_from_script():
    source = """
class M { method bump: x { ^x + 1 } }
| m |
m := M new.
m bump: (m bump: 0)
"""
    session, result = _run(source, """
| bp hits hit |
hits := OrderedCollection new.
bp := dbg setBreakpointOn: (M methodNamed: #bump:).
hit := dbg continue.
[ hit isExecutionFinished ] whileFalse: [
    hits add: (dbg arguments at: 1).
    hit := dbg continue ].
hits
""")
    assert _items(result) == [0, 1]
    assert session.result == 2


def test_breakpoint_on_node_proxy_target():
    session, result = _run(
        "| i | i := 0. [ i < 2 ] whileTrue: [ i := i + 1 ]. i", """
| bp target hit |
dbg stepUntil: [
    (dbg currentNode isAssignmentNode) and: [ dbg assignmentValue = 1 ] ].
target := dbg currentNode.
dbg step.
bp := dbg setBreakpointOn: target.
hit := dbg continue.
hit kind
""")
    assert result == Symbol("breakpoint")


def test_when_hit_receives_hit_argument():
    session, result = _run(
        "| i | i := 0. [ i < 2 ] whileTrue: [ i := i + 1 ]. i", """
| bp kinds |
kinds := OrderedCollection new.
dbg stepUntil: [
    (dbg currentNode isAssignmentNode) and: [ dbg assignmentValue = 1 ] ].
bp := dbg setBreakpoint.
bp whenHit: [ :hit | kinds add: hit kind. kinds add: (hit breakpointId = bp id) ].
dbg continue.
kinds
""")
    assert _items(result) == [Symbol("breakpoint"), True]


def test_once_breakpoint_reports_removed():
    session, result = _run(
        "| i | i := 0. [ i < 3 ] whileTrue: [ i := i + 1 ]. i", """
| bp hit a |
dbg stepUntil: [
    (dbg currentNode isAssignmentNode) and: [ dbg assignmentValue = 1 ] ].
bp := dbg setBreakpoint.
bp once.
hit := dbg continue.
a := OrderedCollection new.
a add: hit removed.
a add: (dbg continue) kind.
a
""")
    assert _items(result) == [True, Symbol("executionFinished")]


def test_breakpoint_disable_enable_from_script():
    session, result = _run(
        "| i | i := 0. [ i < 4 ] whileTrue: [ i := i + 1 ]. i", """
| bp hits hit |
hits := OrderedCollection new.
dbg stepUntil: [
    (dbg currentNode isAssignmentNode) and: [ dbg assignmentValue = 1 ] ].
bp := dbg setBreakpoint.
bp disable.
bp enable.
hit := dbg continue.
hits add: dbg assignmentValue.
bp disable.
hits add: (dbg continue) kind.
hits
""")
    assert _items(result) == [2, Symbol("executionFinished")]


def test_set_breakpoint_rejects_foreign_values():
    _, result = _run("1 + 2", """
| msg |
msg := 'none'.
[ dbg setBreakpointOn: 42 ] on: Error do: [ :e | msg := e messageText ].
msg
""")
    assert "node or a compiled method" in result


# Object-centric -------------------------------------------------------------------

def test_halt_on_call_from_script():
    source = """
class M { method poke { ^1 } }
| a b |
a := M new.
b := M new.
b poke. a poke. b poke. a poke.
'done'
"""
    session, result = _run(source, """
| w hit count |
count := 0.
dbg stepUntil: [
    (dbg currentNode isMessageNode) and: [ dbg messageSelector = #poke ] ].
w := dbg haltOnCall: dbg messageReceiver.
hit := dbg continue.
[ hit isExecutionFinished ] whileFalse: [
    count := count + 1.
    hit := dbg continue ].
count
""")
    # watch set at the first poke (receiver b); the remaining b-poke triggers
    assert result == 1
    assert session.result == "done"


def test_halt_on_call_to_alias_and_selector_filter():
    source = """
class M {
  method poke { ^1 }
  method prod { ^2 }
}
| a |
a := M new.
a poke. a prod. a poke.
'done'
"""
    _, result = _run(source, """
| w hit count target |
count := 0.
dbg stepUntil: [ dbg currentNode isMessageNode and: [ dbg messageSelector = #poke ] ].
target := dbg messageReceiver.
dbg step.
w := dbg haltOnCallTo: target for: #prod.
hit := dbg continue.
[ hit isExecutionFinished ] whileFalse: [
    count := count + 1.
    hit := dbg continue ].
count
""")
    assert result == 1  # only the prod send, not the second poke


def test_halt_on_write_from_script():
    source = """
class Counter {
  fields n.
  method init { n := 0 }
  method bump { n := n + 1 }
}
| c |
c := Counter new.
c init. c bump. c bump.
'done'
"""
    _, result = _run(source, """
| w hit vals |
vals := OrderedCollection new.
dbg stepUntil: [ dbg currentNode isMessageNode and: [ dbg messageSelector = #init ] ].
w := dbg haltOnWrite: dbg messageReceiver field: #n.
hit := dbg continue.
[ hit isExecutionFinished ] whileFalse: [
    vals add: dbg assignmentValue.
    hit := dbg continue ].
vals
""")
    assert _items(result) == [0, 1, 2]


def test_halt_on_write_rejects_non_watchable():
    _, result = _run("1 + 2", """
| msg |
msg := 'none'.
[ dbg haltOnWrite: 5 ] on: Error do: [ :e | msg := e messageText ].
msg
""")
    assert "watch" in result.lower() or "field" in result.lower()


def test_watch_proxy_kind_and_remove():
    source = """
class M { method poke { ^1 } }
| a |
a := M new.
a poke. a poke.
'done'
"""
    _, result = _run(source, """
| w a |
dbg stepUntil: [ dbg currentNode isMessageNode and: [ dbg messageSelector = #poke ] ].
w := dbg haltOnCall: dbg messageReceiver.
a := OrderedCollection new.
a add: w kind.
w remove.
a add: (dbg continue) kind.
a
""")
    assert _items(result) == [Symbol("onCall"), Symbol("executionFinished")]


# Error propagation ----------------------------------------------------------------

def test_unhandled_script_error_raises_script_failed():
    session = debug("1 + 2")
    with pytest.raises(ScriptFailed, match="doesNotUnderstand"):
        eval_script(session, "nil frobnicate")


def test_script_failed_carries_the_failed_execution():
    session = debug("1 + 2")
    try:
        eval_script(session, "nil frobnicate")
    except ScriptFailed as e:
        assert e.execution.status is RunStatus.FAILED
    else:  # pragma: no cover
        pytest.fail("expected ScriptFailed")


def test_exception_in_step_until_predicate_is_catchable_by_class():
    # a guest exception escaping the predicate block re-signals the same
    # object in the script, so class-based handlers still apply
    session = debug("1 + 2. 3 + 4")
    result = eval_script(session, """
class Boom extends Error { }
| msg |
msg := 'none'.
[ dbg stepUntil: [ | b | b := Boom new. b signal: 'pow'. true ] ]
    on: Boom do: [ :e | msg := e messageText ].
msg
""")
    assert result == "pow"


def test_step_budget_exhaustion_is_catchable():
    session = debug("| i | i := 0. [ true ] whileTrue: [ i := i + 1 ]. i")
    result = eval_script(session, """
| msg |
msg := 'none'.
[ dbg stepUntil: [ false ] within: 200 ] on: Error do: [ :e | msg := e messageText ].
msg
""")
    assert "step" in result


def test_stepping_past_the_end_is_catchable():
    _, result = _run("1", """
| msg |
msg := 'none'.
dbg continue.
[ dbg step ] on: Error do: [ :e | msg := e messageText ].
msg
""")
    assert "finished" in result


# Bindings and nested sessions -----------------------------------------------------

def test_scripts_see_target_user_classes():
    source = """
class Widget { method poke { ^1 } }
Widget new poke
"""
    _, result = _run(source, """
dbg stepUntil: [ dbg currentNode isMessageNode and: [ dbg messageSelector = #poke ] ].
dbg messageReceiver isKindOf: Widget
""")
    assert result is True


def test_extra_bindings_are_visible_as_globals():
    session = debug("1 + 2")
    result = eval_script(session, "markers * 2", bindings={"markers": 21})
    assert result == 42


def test_script_bindings_contents():
    session = debug("class W { method go { ^1 } }\nW new go")
    bindings = script_bindings(session)
    assert isinstance(bindings["dbg"], DebuggerView)
    assert "W" in bindings
    assert "Debugger" in bindings


def test_nested_session_via_factory():
    _, result = _run("1", """
| inner |
inner := Debugger debug: '2 + 3'.
[ inner isExecutionFinished ] whileFalse: [ inner step ].
inner result
""")
    assert result == 5


def test_nested_session_with_seed():
    _, result = _run("1", """
| one two |
one := Debugger debug: '| r | r := Random new. r setSeed: DefaultRandomSeed. r next' seed: 7.
two := Debugger debug: '| r | r := Random new. r setSeed: DefaultRandomSeed. r next' seed: 7.
one continue.
two continue.
(one result = two result) and: [ one result > 0 ]
""")
    assert result is True


def test_factory_rejects_non_string_source():
    _, result = _run("1", """
| msg |
msg := 'none'.
[ Debugger debug: 42 ] on: Error do: [ :e | msg := e messageText ].
msg
""")
    assert "source text" in result


# The canonical interactive-bug hunt -----------------------------------------------

DOUBLE_OPEN_TARGET = """
class Session {
  fields log.
  method start: aFile { self audit: aFile. aFile open }
  method audit: aFile { log := aFile name }
}
| f1 f2 s |
f1 := File new setName: 'a.txt'.
f2 := File new setName: 'b.txt'.
s := Session new.
s start: f1.
s start: f2.
s start: f1.
'done'
"""

FIRST_OPEN_STACK_SCRIPT = """
| result finished stackDictionary |
result := nil.
finished := false.
stackDictionary := Dictionary new.
[ finished ] whileFalse: [
    ((dbg currentNode isMessageNode) and: [
        (dbg messageReceiver isKindOf: File) and: [
            dbg messageSelector = #open ] ])
      ifTrue: [
        result := stackDictionary
            at: dbg messageReceiver
            ifPresent: [ finished := true ]
            ifAbsentPut: [ dbg stack copy ] ].
    dbg step ].
result
"""


def test_double_open_script_answers_first_open_stack():
    session = debug(DOUBLE_OPEN_TARGET)
    stack_copy = eval_script(session, FIRST_OPEN_STACK_SCRIPT)
    assert stack_copy.cls.name == "CallStack"
    contexts = [p.context for p in stack_copy.store]
    assert [c.selector for c in contexts] == [Symbol("start:"), Symbol("<main>")]
    assert all(c.is_copy for c in contexts)


def test_double_open_script_rests_at_the_second_open():
    session = debug(DOUBLE_OPEN_TARGET)
    eval_script(session, FIRST_OPEN_STACK_SCRIPT)
    # the trailing step entered File>>open on the re-opened file
    assert session.selector == Symbol("open")
    assert session.receiver.field_named("name") == "a.txt"
    # and without intervention the run fails exactly there
    hit = session.continue_()
    assert hit.kind == HitDescriptor.UNHANDLED_EXCEPTION
    assert "FileAlreadyOpen" in session.failure_description()


def test_double_open_skip_averts_the_failure():
    session = debug(DOUBLE_OPEN_TARGET)
    result = eval_script(session, """
| finished seen |
finished := false.
seen := Dictionary new.
[ finished ] whileFalse: [
    ((dbg currentNode isMessageNode) and: [
        (dbg messageReceiver isKindOf: File) and: [
            dbg messageSelector = #open ] ])
      ifTrue: [
        (seen includesKey: dbg messageReceiver)
          ifTrue: [ dbg skip ]
          ifFalse: [ seen at: dbg messageReceiver put: true. dbg step ] ]
      ifFalse: [ dbg step ].
    finished := dbg isExecutionFinished ].
dbg result
""")
    assert result == "done"
    assert session.status is RunStatus.FINISHED


# Self-debugging -------------------------------------------------------------------

def test_a_debugging_script_can_itself_be_debugged():
    inner = debug("| a | a := 1 + 2. a")
    outer_source = """
| steps |
steps := 0.
[ dbg isExecutionFinished ] whileFalse: [ dbg step. steps := steps + 1 ].
steps
"""
    outer = debug(outer_source, bindings={"dbg": DebuggerView(inner)})
    while not outer.is_execution_finished():
        outer.step()
    assert outer.result > 0
    assert inner.is_execution_finished()
    assert inner.result == 3


def test_outer_session_can_break_inside_its_own_script():
    inner = debug("| a | a := 1 + 2. a")
    outer_source = """
| steps |
steps := 0.
[ dbg isExecutionFinished ] whileFalse: [ dbg step. steps := steps + 1 ].
steps
"""
    outer = debug(outer_source, bindings={"dbg": DebuggerView(inner)})
    fired = []
    bp = outer.set_breakpoint(
        outer.compiled.find_method("Block", "whileFalse:"))
    bp.when_hit(lambda s: fired.append(s.context().selector))
    outer.continue_()
    assert fired and fired[0] == Symbol("whileFalse:")
    bp.remove()
    outer.continue_()
    assert inner.result == 3


# Result and output accessors ------------------------------------------------------

def test_failure_description_from_script():
    _, result = _run("nil frobnicate", """
dbg continue.
dbg failureDescription
""")
    assert "frobnicate" in result


def test_proxy_sends_fall_through_to_guest_dispatch():
    # selectors outside the proxy's set use the guest class protocol
    _, result = _run("1", """
| a |
a := OrderedCollection new.
a add: dbg isNil.
a add: dbg notNil.
a add: (dbg == dbg).
a
""")
    assert _items(result) == [False, True, True]


def test_unknown_proxy_selector_raises_dnu():
    session = debug("1")
    with pytest.raises(ScriptFailed, match="frobnicate"):
        eval_script(session, "dbg frobnicate")
