"""Acceptance gate: one test per delivery criterion, run as a checklist.

Each test prints a TAP-style `ok` / `not ok` line naming its criterion (visible
under -s / -rA, and mirrored by the PASSED/FAILED verdicts of a verbose run).
The checks lean on independent oracles — the tree-walking reference evaluator,
raw parse trees, brute-force execution scans inside the scenario verifiers —
so a regression in the debugger cannot hide behind a regression in the checker.
"""

import functools

from lumen.compiler import compile_program
from lumen.debugger import HitDescriptor, debug
from lumen.errors import UnhandledExceptionDuringStepOver
from lumen.nodes import NodeKind
from lumen.scenarios import (ATOM_VIEWER_TARGET, NIL_RECEIVER_SCRIPT,
                             NIL_RECEIVER_TARGET, OBJECT_CAPTURE_SCRIPT,
                             PRE_EXCEPTION_SCRIPT, PRE_EXCEPTION_TARGET,
                             run_scenario)
from lumen.scripting import (API_TABLE, conformance_gaps, conformance_report,
                             eval_script, script_bindings)
from lumen.serialize import canonical_form
from lumen.service import ServiceCore
from lumen.values import Symbol
from lumen.vm import RunStatus, run_program

from corpus import PROGRAMS
from treewalk import run_reference


# Checklist reporting --------------------------------------------------------------

def _criterion(label):
    """One `ok` / `not ok` line per criterion, so the suite reads as a list."""
    def wrap(fn):
        @functools.wraps(fn)
        def run(*args, **kwargs):
            try:
                fn(*args, **kwargs)
            except BaseException:
                print(f"not ok - {label}")
                raise
            print(f"ok - {label}")
        return run
    return wrap


def _scenario_report(name):
    """Run a scenario under both drivers; each must verify clean against its
    own oracle. Answers the script-driver report for further checks."""
    reports = {via: run_scenario(name, via=via) for via in ("script", "host")}
    for via, report in reports.items():
        assert report.passed, f"{name} via {via}: {report.failures}"
    return reports["script"]


# Transparency: stepping changes nothing observable -----------------------------------

def _run_stepped(source, seed):
    # run to completion one instruction at a time, under the debugger
    session = debug(source, seed=seed)
    while not session.is_execution_finished():
        session.step()
    ex = session.execution
    report = {"status": ex.status.value, "output": ex.output_text}
    if ex.status is RunStatus.FINISHED:
        report["result"] = canonical_form(ex.result, ex.globals)
        report["failure"] = None
    else:
        report["result"] = None
        report["failure"] = ex.class_of(ex.failure).name
    return report


@_criterion("stepped runs match the reference evaluator across the corpus")
def test_stepped_runs_match_reference_evaluator():
    assert len(PROGRAMS) >= 20, "corpus must hold at least twenty programs"
    for entry in PROGRAMS:
        seed = entry.get("seed", 1)
        stepped = _run_stepped(entry["source"], seed)
        reference = run_reference(entry["source"], seed=seed)
        projected = {key: reference[key] for key in stepped}
        assert stepped == projected, entry["name"]


# Scripting API coverage -------------------------------------------------------------

@_criterion("every debugger API row is reachable from host code and scripts")
def test_api_table_has_no_gaps():
    assert conformance_gaps() == []
    report = conformance_report()
    assert len(report) == len(API_TABLE) == 40
    for row in report:
        assert row["ok"], row
        assert row["scriptSelector"], row
        assert row["hostOperation"], row


# Double-open monitor ----------------------------------------------------------------

_TWO_DISTINCT_FILES_TARGET = """
class FileSession {
  fields log.
  method start: aFile { self audit: aFile. aFile open }
  method audit: aFile { log := aFile name }
}
| f1 f2 s |
f1 := File new setName: 'a.txt'.
f2 := File new setName: 'b.txt'.
s := FileSession new.
s start: f1.
s start: f2.
'done'
"""

_OPEN_MONITOR_SCRIPT = """
| found seen |
found := nil.
seen := Dictionary new.
[ found isNil not or: [ dbg isExecutionFinished ] ] whileFalse: [
    ((dbg currentNode isMessageNode) and: [
        (dbg messageReceiver isKindOf: File) and: [
            dbg messageSelector = #open ] ])
      ifTrue: [
        found := seen
            at: dbg messageReceiver
            ifPresent: [ dbg stack copy ]
            ifAbsentPut: [ nil ] ].
    dbg step ].
found
"""


@_criterion("double-open halts at the reopen with the first-open stack, "
            "and two distinct files never halt")
def test_double_open_halts_only_on_reopen():
    report = _scenario_report("double-open")
    # the captured stack is the chain recorded at the FIRST open of that file
    assert [row["selector"] for row in report.captured] == ["#start:", "#<main>"]
    assert report.final["selector"] == "#open"
    # negative control: the same monitor over two distinct files finds nothing
    session = debug(_TWO_DISTINCT_FILES_TARGET)
    found = eval_script(session, _OPEN_MONITOR_SCRIPT)
    assert found is None
    assert session.is_execution_finished()
    assert session.execution.result == "done"
    assert session.hits == []


# Assignment monitor -----------------------------------------------------------------

@_criterion("assignment monitor pins the write of 42 to #foo and ignores decoys")
def test_assignment_monitor_pins_field_write():
    report = _scenario_report("assignment-monitor")
    assert report.captured == ["#foo", 42, "#grow"]
    assert report.final["status"] == "running"


# Pre-exception interception ---------------------------------------------------------

@_criterion("exception monitor suspends at #signal before any unwinding")
def test_exception_monitor_suspends_before_unwind():
    _scenario_report("pre-exception")
    # direct drive: the staged send and the un-unwound stack are inspectable
    session = debug(PRE_EXCEPTION_TARGET)
    eval_script(session, PRE_EXCEPTION_SCRIPT)
    assert session.message_selector() == Symbol("signal")
    receiver = session.message_receiver()
    lineage = [c.name for c in session.execution.class_of(receiver).lineage()]
    assert "Exception" in lineage
    # every frame that raised is still on the stack — nothing unwound yet
    selectors = [context.compiled_method.selector for context in session.stack()]
    assert selectors[-2:] == ["check:", "<main>"]
    assert session.execution.status is RunStatus.RUNNING


# Nil-receiver halt ------------------------------------------------------------------

@_criterion("nil-receiver halt rests on the offending send node, by node id")
def test_nil_receiver_halt_rests_on_offending_node():
    _scenario_report("nil-receiver")
    # oracle: the parse tree has exactly one #addAll: send, and that is the
    # sub-expression whose receiver evaluates to nil
    compiled = compile_program(NIL_RECEIVER_TARGET)
    sends = [node for node in compiled.program.nodes_by_id.values()
             if node.kind is NodeKind.MESSAGE and node.selector == "addAll:"]
    assert len(sends) == 1
    expected = sends[0]
    session = debug(compiled)
    eval_script(session, NIL_RECEIVER_SCRIPT)
    halted_on = session.current_node()
    assert halted_on.id == expected.id
    text = NIL_RECEIVER_TARGET[halted_on.span.start:halted_on.span.end]
    assert text == "total objects addAll: current objects"


# Method-family discovery ------------------------------------------------------------

@_criterion("method-family search plants breakpoints on exactly the brute-force "
            "caller set and halts at each on a fresh run")
def test_method_family_matches_bruteforce_callers():
    report = _scenario_report("method-family")
    assert report.captured["targets"] == ["Exporter>>pushTo:", "Importer>>pullFrom:"]
    assert sorted(report.captured["relaunchHalts"]) == ["#pullFrom:", "#pushTo:"]


# Caller-sensitive halting -----------------------------------------------------------

@_criterion("caller-sensitive halts fire only without the excluded caller, "
            "for direct-sender and whole-stack variants")
def test_caller_sensitive_halts_match_call_trace():
    for name in ("control-flow", "control-flow-anywhere"):
        report = _scenario_report(name)
        assert report.captured == ["#trySaveAs:", "#saveClicked:", "user.prj"]


# Ordered pitons ---------------------------------------------------------------------

@_criterion("pitons halt in declared order even when the program runs them "
            "out of order")
def test_pitons_halt_in_declared_order():
    report = _scenario_report("pitons")
    assert report.halts == [{"kind": "stepUntil", "selector": s}
                            for s in ("#method1:", "#method2:", "#methodN:")]
    assert report.final["selector"] == "#methodN:"


# Divergence detection ---------------------------------------------------------------

@_criterion("divergence search stops at the first step whose methods differ")
def test_divergence_stops_at_first_differing_step():
    report = _scenario_report("divergence")
    step, left, right = report.captured
    assert isinstance(step, int) and step > 0
    assert left != right


# Iteration stepping -----------------------------------------------------------------

@_criterion("stepping into the seventh block activation binds element seven "
            "in a fresh frame")
def test_collect_stepping_reaches_seventh_activation():
    report = _scenario_report("collect-stepping")
    assert report.captured == [7, True, True]


# Capture and replay -----------------------------------------------------------------

@_criterion("object capture halts only for the captured handle and replay "
            "reproduces the hard-wired run without editing methods")
def test_capture_and_replay_are_noninvasive():
    capture = _scenario_report("object-capture")
    assert [h["kind"] for h in capture.halts] == [
        "breakpoint", "breakpoint", "breakpoint", "watchCall"]
    replay = _scenario_report("object-replay")
    assert replay.captured == [2, True, "displayed"]
    assert replay.halts[-1]["kind"] == "executionFinished"


# Stepping properties over the corpus ------------------------------------------------

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


def _assert_step_over_decomposes(entry):
    seed = entry.get("seed", 1)
    total = run_program(entry["source"], seed=seed).steps_executed
    for k in range(total):
        over = debug(entry["source"], seed=seed)
        decomposed = debug(entry["source"], seed=seed)
        for _ in range(k):
            over.step()
            decomposed.step()
        raised = False
        try:
            over.step_over()
        except UnhandledExceptionDuringStepOver:
            raised = True
        _decomposed_step_over(decomposed)
        failed = decomposed.execution.status is RunStatus.FAILED
        assert raised == failed, f"{entry['name']} at step {k}"
        assert _fingerprint(over) == _fingerprint(decomposed), \
            f"{entry['name']} at step {k}"


def _assert_once_breakpoints_hit_once(entry):
    seed = entry.get("seed", 1)
    probe = debug(entry["source"], seed=seed)
    methods = [m for m in probe.compiled.user_methods()
               if not m.is_block and m.selector is not None]
    for method in methods:
        session = debug(entry["source"], seed=seed)
        session.set_breakpoint(method).set_once()
        hits = 0
        while True:
            hit = session.continue_()
            if hit.kind == HitDescriptor.BREAKPOINT:
                hits += 1
                continue
            break
        assert hits <= 1, f"{entry['name']}: {method.display_name()}"
        assert not session.breakpoints or hits == 0


@_criterion("step-over decomposition and once-breakpoint single-hit hold at "
            "every program point of the corpus")
def test_stepping_properties_hold_across_corpus():
    small = [e for e in PROGRAMS
             if run_program(e["source"], seed=e.get("seed", 1)).steps_executed <= 500]
    assert len(small) >= 20
    for entry in small:
        _assert_step_over_decomposes(entry)
        _assert_once_breakpoints_hit_once(entry)


# Wire equivalence -------------------------------------------------------------------

def _wire_call(core, op, session=None, **args):
    request = {"id": 1, "op": op}
    if session is not None:
        request["session"] = session
    if args:
        request["args"] = args
    *events, response = core.handle(request)
    assert "result" in response, response
    return events, response["result"]


def _suspension(snapshot):
    projected = {"status": snapshot["status"]}
    if snapshot["stack"]:
        top = snapshot["stack"][0]
        selector = top["selector"]
        projected.update(frameId=top["frameId"], pc=top["pc"],
                         selector=("#" + selector) if selector else None)
    return projected


@_criterion("wire-protocol sessions reproduce host halts and suspension state")
def test_wire_sessions_reproduce_host_runs():
    cases = [("pre-exception", PRE_EXCEPTION_TARGET, PRE_EXCEPTION_SCRIPT),
             ("object-capture", ATOM_VIEWER_TARGET, OBJECT_CAPTURE_SCRIPT)]
    for name, source, script in cases:
        host = run_scenario(name, via="host")
        assert host.passed, host.failures
        core = ServiceCore()
        _, made = _wire_call(core, "createSession", source=source)
        events, result = _wire_call(core, "evalScript",
                                    session=made["session"], script=script)
        hits = [e["payload"] for e in events if e["event"] in ("hit", "finished")]
        assert hits == host.halts, name
        snapshot = result["snapshot"]
        expected = {k: v for k, v in host.final.items() if k != "steps"}
        assert _suspension(snapshot) == expected, name
        assert snapshot["output"] == host.output, name


# Self-debugging ---------------------------------------------------------------------

_STEPPER_SCRIPT = """
| n |
n := 0.
[ dbg isExecutionFinished ] whileFalse: [ dbg step. n := n + 1 ].
n
"""


@_criterion("a session can debug a script that itself steps a nested session")
def test_session_debugs_a_session_stepping_script():
    inner = debug("| t | t := 0. 1 to: 5 do: [ :i | t := t + i ]. t")
    outer = debug(_STEPPER_SCRIPT, bindings=script_bindings(inner))
    while not outer.is_execution_finished():
        outer.step()
    assert outer.execution.status is RunStatus.FINISHED
    assert inner.execution.status is RunStatus.FINISHED
    assert inner.execution.result == 15
    # the driver's step count is the inner execution's own ledger
    assert outer.execution.result == inner.execution.steps_executed
