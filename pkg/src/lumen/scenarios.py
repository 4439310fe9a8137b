"""Executable debugging scenarios: miniature buggy programs paired with the
guest-language scripts that hunt them down.

Every scenario ships two equivalent drivers — the script (run through
eval_script) and a host-API driver performing the same operations — and
`run_scenario` answers a machine-checkable report. The two drivers must
produce identical halt descriptors, identical final suspension points and
identical captured evidence; the test suite holds them to that.
"""

from __future__ import annotations

from dataclasses import dataclass, field

from .bytecode import Op, method_checksum
from .debugger import Context, DebugSession, HitDescriptor, debug
from .errors import UnknownScenario
from .nodes import AstNode, NodeKind
from .scripting import (ContextProxy, DebuggerView, HitProxy, NodeProxy,
                        eval_script)
from .values import (BlockClosure, GuestClass, GuestObject, MethodHandle,
                     Symbol)
from .vm import RunStatus, create_execution, run_program


# Evidence normalization -----------------------------------------------------------

def plain(value):
    """Project evidence to plain data so script-world and host-world
    renderings of the same fact compare equal."""
    if value is None or isinstance(value, (bool, int, str)):
        return value
    if isinstance(value, Symbol):
        return "#" + value.name
    if isinstance(value, (list, tuple)):
        return [plain(v) for v in value]
    if isinstance(value, dict):
        return {k: plain(v) for k, v in sorted(value.items())}
    if isinstance(value, ContextProxy):
        return plain(value.context)
    if isinstance(value, Context):
        return {"frameId": value.frame_id, "pc": value.pc,
                "selector": plain(value.selector)}
    if isinstance(value, NodeProxy):
        return plain(value.node)
    if isinstance(value, AstNode):
        return {"nodeId": value.id, "kind": value.kind.value}
    if isinstance(value, MethodHandle):
        return value.method.display_name()
    if isinstance(value, BlockClosure):
        return "a block in " + value.method.display_name()
    if isinstance(value, GuestClass):
        return "class " + value.name
    if isinstance(value, HitProxy):
        return _hit_dict(value.descriptor)
    if isinstance(value, HitDescriptor):
        return _hit_dict(value)
    if isinstance(value, GuestObject):
        if value.store is not None:
            if any(c.name == "Dictionary" for c in value.cls.lineage()):
                return {"entries": sorted((str(plain(k)), plain(v))
                                          for k, v in value.store)}
            return [plain(v) for v in value.store]
        return "a " + value.cls.name
    return repr(value)


def _hit_dict(h: HitDescriptor) -> dict:
    return {"kind": h.kind, "breakpointId": h.breakpoint_id,
            "watchId": h.watch_id,
            "nodeId": h.node.id if h.node is not None else None,
            "frameId": h.frame_id, "removed": h.removed}


def _final_state(session: DebugSession) -> dict:
    ex = session.execution
    state = {"status": ex.status.value, "steps": ex.steps_executed}
    if ex.top is not None:
        state.update(frameId=ex.top.frame_id, pc=ex.top.pc,
                     selector=plain(Symbol(ex.top.method.selector)
                                    if ex.top.method.selector else None))
    return state


# Reports --------------------------------------------------------------------------

@dataclass
class ScenarioReport:
    name: str
    via: str                      # "script" | "host"
    captured: object              # plain evidence
    halts: list                   # hit descriptors, in firing order
    final: dict                   # status/steps/suspension point
    output: str
    passed: bool = False
    failures: list = field(default_factory=list)

    def to_json(self) -> dict:
        return {"name": self.name, "via": self.via, "captured": self.captured,
                "halts": self.halts, "final": self.final, "output": self.output,
                "passed": self.passed, "failures": list(self.failures)}


@dataclass(frozen=True)
class Scenario:
    name: str
    summary: str
    sources: tuple                # ((binding name, program source), ...)
    script: str
    host: callable                # dict[name -> DebugSession] -> raw evidence
    verify: callable              # (ScenarioReport, sessions) -> [failures]
    seed: int = 1
    collect: callable = None      # optional (sessions, raw) -> evidence
    report_halts: callable = None  # optional (sessions, evidence) -> halts;
    #                               default: the primary session's trigger hits


# Oracle helpers (raw executions, no debugger machinery) ---------------------------

def _staged_send(ex):
    """(receiver, selector, args) when the next instruction is a send whose
    operands are staged, else None."""
    frame = ex.top
    if frame is None:
        return None
    code = frame.method.code
    if frame.pc >= len(code):
        return None
    instr = code[frame.pc]
    if instr.op not in (Op.SEND, Op.SEND_SUPER):
        return None
    argc = instr.b
    if len(frame.stack) < argc + 1:
        return None
    stack = frame.stack
    return (stack[-argc - 1], frame.method.literals[instr.a],
            list(stack[len(stack) - argc:]))


def _staged_store(ex):
    """(receiver, field name, value) when the next instruction is a field
    store, else None."""
    frame = ex.top
    if frame is None:
        return None
    code = frame.method.code
    if frame.pc >= len(code):
        return None
    instr = code[frame.pc]
    if instr.op is not Op.STORE_FIELD or not frame.stack:
        return None
    if not isinstance(frame.receiver, GuestObject):
        return None
    return frame.receiver, frame.receiver.cls.all_fields[instr.a], frame.stack[-1]


def _kind_of(ex, value, class_name: str) -> bool:
    cls = ex.class_of(value)
    return any(c.name == class_name for c in cls.lineage())


def _raw_scan(source, predicate, *, seed=1, max_steps=500_000):
    """Step a plain execution until predicate(ex) holds after a step.
    Answer (step count, execution); (None, execution) if the run ends."""
    ex = create_execution(source, seed=seed)
    steps = 0
    while ex.status is RunStatus.RUNNING:
        ex.step()
        steps += 1
        if steps > max_steps:
            raise AssertionError("oracle scan exceeded its step budget")
        if ex.status is RunStatus.RUNNING and predicate(ex):
            return steps, ex
    return None, ex


def _check(failures, condition, message):
    if not condition:
        failures.append(message)


# ----------------------------------------------------------------------------------
# double-open: find the stack that opened a file first when it is opened twice
# ----------------------------------------------------------------------------------

DOUBLE_OPEN_TARGET = """
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
s start: f1.
'done'
"""

DOUBLE_OPEN_SCRIPT = """
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


def _double_open_host(sessions):
    session = sessions["dbg"]
    stacks = {}  # id(receiver) -> captured stack
    result = None
    while True:
        node = session.current_node()
        if node.kind is NodeKind.MESSAGE:
            receiver = session.message_receiver()
            if (receiver is not None
                    and _kind_of(session.execution, receiver, "File")
                    and session.message_selector() == Symbol("open")):
                key = id(receiver)
                if key in stacks:
                    result = stacks[key]
                    session.step()
                    break
                stacks[key] = [c.copy() for c in session.stack()]
        session.step()
    return result


def _double_open_verify(report, sessions):
    failures = []
    # independent scan: record the frame chain at the first open of the
    # file that later reopens
    opens = []

    def saw_second_open(ex):
        staged = _staged_send(ex)
        if staged is None:
            return False
        receiver, selector, _ = staged
        if selector != "open" or not _kind_of(ex, receiver, "File"):
            return False
        chain = [{"frameId": f.frame_id, "pc": f.pc,
                  "selector": "#" + f.method.selector}
                 for f in ex.top.chain()]
        opens.append((id(receiver), chain))
        return any(oid == opens[-1][0] for oid, _ in opens[:-1])

    steps, _ = _raw_scan(DOUBLE_OPEN_TARGET, saw_second_open)
    _check(failures, steps is not None, "oracle never saw a second open")
    first_chain = next(chain for oid, chain in opens if oid == opens[-1][0])
    _check(failures, report.captured == first_chain,
           f"captured stack {report.captured} != first-open chain {first_chain}")
    # the trailing step entered File>>open on the re-opened file
    _check(failures, report.final["selector"] == "#open",
           f"expected suspension inside open, got {report.final}")
    _check(failures, report.final["steps"] == steps + 1,
           f"suspended after {report.final['steps']} steps, oracle says {steps + 1}")
    session = sessions["dbg"]
    _check(failures, session.receiver.field_named("name") == "a.txt",
           "suspension is not on the re-opened file")
    hit = session.continue_()
    _check(failures, hit.kind == HitDescriptor.UNHANDLED_EXCEPTION
           and "FileAlreadyOpen" in session.failure_description(),
           "continuing past the second open should hit FileAlreadyOpen")
    return failures


# ----------------------------------------------------------------------------------
# assignment-monitor: stop on the assignment that stores 42 into Bar's foo
# ----------------------------------------------------------------------------------

ASSIGNMENT_MONITOR_TARGET = """
class Bar {
  fields foo.
  method seed: n { foo := n }
  method grow { foo := foo + 2 }
}
class Baz {
  fields foo.
  method seed: n { foo := n }
}
| bar baz |
baz := Baz new.
baz seed: 42.
bar := Bar new.
bar seed: 40.
bar grow.
'done'
"""

ASSIGNMENT_MONITOR_SCRIPT = """
| evidence |
dbg stepUntil: [
    dbg currentNode isAssignment
    and: [ (dbg assignmentValue == 42)
    and: [ (dbg assignmentVariableName = #foo)
    and: [ dbg receiver isKindOf: Bar ]]]].
evidence := OrderedCollection new.
evidence add: dbg assignmentVariableName.
evidence add: dbg assignmentValue.
evidence add: dbg selector.
evidence
"""


def _assignment_monitor_host(sessions):
    session = sessions["dbg"]

    def predicate(s):
        node = s.current_node()
        if node.kind is not NodeKind.ASSIGNMENT:
            return False
        return (s.assignment_value() == 42
                and s.assignment_variable_name() == Symbol("foo")
                and _kind_of(s.execution, s.receiver, "Bar"))

    session.step_until(predicate)
    return [session.assignment_variable_name(), session.assignment_value(),
            session.selector]


def _assignment_monitor_verify(report, sessions):
    failures = []
    writes = []

    def saw_target_write(ex):
        staged = _staged_store(ex)
        if staged is None:
            return False
        receiver, fname, value = staged
        writes.append((receiver.cls.name, fname, value))
        return fname == "foo" and value == 42 and _kind_of(ex, receiver, "Bar")

    steps, _ = _raw_scan(ASSIGNMENT_MONITOR_TARGET, saw_target_write)
    _check(failures, report.captured == ["#foo", 42, "#grow"],
           f"unexpected evidence {report.captured}")
    _check(failures, report.final["steps"] == steps,
           f"suspended after {report.final['steps']} steps, oracle says {steps}")
    # the decoys really exist and really come first
    _check(failures, ("Baz", "foo", 42) in writes[:-1],
           "decoy write of 42 to Baz's foo never happened before the halt")
    _check(failures, ("Bar", "foo", 40) in writes[:-1],
           "decoy write of 40 to Bar's foo never happened before the halt")
    return failures


# ----------------------------------------------------------------------------------
# pre-exception: suspend just before an exception is signalled
# ----------------------------------------------------------------------------------

PRE_EXCEPTION_TARGET = """
class Validator {
  method check: n {
    n < 0 ifTrue: [ | err | err := Error new. err signal: 'negative input' ].
    ^n
  }
}
| v total |
v := Validator new.
total := v check: 5.
total := total + (v check: 3).
total + (v check: 0 - 7)
"""

PRE_EXCEPTION_SCRIPT = """
| evidence |
dbg stepUntil: [
    dbg currentNode isMessage
    and: [ (dbg messageSelector = #signal)
    and: [ dbg messageReceiver isKindOf: Exception ]]].
evidence := OrderedCollection new.
evidence add: dbg messageSelector.
evidence add: (dbg messageReceiver isKindOf: Error).
evidence add: dbg isExecutionFinished not.
evidence
"""


def _pre_exception_host(sessions):
    session = sessions["dbg"]

    def predicate(s):
        if s.current_node().kind is not NodeKind.MESSAGE:
            return False
        return (s.message_selector() == Symbol("signal")
                and _kind_of(s.execution, s.message_receiver(), "Exception"))

    session.step_until(predicate)
    return [session.message_selector(),
            _kind_of(session.execution, session.message_receiver(), "Error"),
            not session.is_execution_finished()]


def _pre_exception_verify(report, sessions):
    failures = []

    def about_to_signal(ex):
        staged = _staged_send(ex)
        if staged is None:
            return False
        receiver, selector, _ = staged
        return selector == "signal" and _kind_of(ex, receiver, "Exception")

    steps, _ = _raw_scan(PRE_EXCEPTION_TARGET, about_to_signal)
    _check(failures, report.captured == ["#signal", True, True],
           f"unexpected evidence {report.captured}")
    _check(failures, report.final["status"] == "running",
           "the exception must not have been raised yet")
    _check(failures, report.final["selector"] == "#signal:",
           f"expected to rest inside signal:, got {report.final}")
    _check(failures, report.final["steps"] == steps,
           f"suspended after {report.final['steps']} steps, oracle says {steps}")
    session = sessions["dbg"]
    hit = session.continue_()
    _check(failures, hit.kind == HitDescriptor.UNHANDLED_EXCEPTION
           and "negative input" in session.failure_description(),
           "continuing should raise the pending exception")
    return failures


# ----------------------------------------------------------------------------------
# nil-receiver: suspend on the chain sub-expression whose receiver is nil
# ----------------------------------------------------------------------------------

NIL_RECEIVER_TARGET = """
class Box {
  fields objects.
  method init { objects := OrderedCollection new }
  method objects { ^objects }
}
| total current |
total := Box new.
current := Box new.
current init.
total objects addAll: current objects.
'done'
"""

NIL_RECEIVER_SCRIPT = """
| evidence |
dbg stepUntil: [
    dbg currentNode isMessage
    and: [ dbg messageReceiver = nil ]].
evidence := OrderedCollection new.
evidence add: dbg messageSelector.
evidence add: dbg currentNode sourceText.
evidence
"""


def _nil_receiver_host(sessions):
    session = sessions["dbg"]

    def predicate(s):
        if s.current_node().kind is not NodeKind.MESSAGE:
            return False
        return s.message_receiver() is None

    session.step_until(predicate)
    node = session.current_node()
    source = session.compiled.source
    return [session.message_selector(), source[node.span.start:node.span.end]]


def _nil_receiver_verify(report, sessions):
    failures = []

    def staged_nil_send(ex):
        staged = _staged_send(ex)
        return staged is not None and staged[0] is None

    steps, _ = _raw_scan(NIL_RECEIVER_TARGET, staged_nil_send)
    _check(failures, report.captured ==
           ["#addAll:", "total objects addAll: current objects"],
           f"unexpected evidence {report.captured}")
    _check(failures, report.final["steps"] == steps,
           f"suspended after {report.final['steps']} steps, oracle says {steps}")
    session = sessions["dbg"]
    session.continue_()
    _check(failures, "MessageNotUnderstood" in session.failure_description(),
           "continuing should fail with a not-understood send to nil")
    return failures


# ----------------------------------------------------------------------------------
# method-family: plant breakpoints in every caller that opens a given file
# ----------------------------------------------------------------------------------

METHOD_FAMILY_TARGET = """
class FileRegistry {
  fields store.
  method init { store := Dictionary new }
  method openDataFile: aName { store at: aName put: true. ^aName }
  method openLogFile: aName { store at: aName put: true. ^aName }
  method plainRead: aName { ^aName }
}
class Importer {
  method pullFrom: reg { ^reg openDataFile: 'myFile.txt' }
}
class Archiver {
  method stash: reg { ^reg openDataFile: 'other.txt' }
}
class Reader {
  method scan: reg { ^reg plainRead: 'myFile.txt' }
}
class Exporter {
  method pushTo: reg { ^reg openLogFile: 'myFile.txt' }
}
| reg |
reg := FileRegistry new.
reg init.
Importer new pullFrom: reg.
Archiver new stash: reg.
Reader new scan: reg.
Exporter new pushTo: reg.
'done'
"""

METHOD_FAMILY_SCRIPT = """
[ dbg isExecutionFinished ] whileFalse: [
    (('*open*File*' match: dbg selector) and: [
        (dbg context arguments at: 1) = 'myFile.txt' ])
      ifTrue: [ dbg setBreakpointOn: dbg context sender method ].
    dbg step ].
nil
"""


def _method_family_host(sessions):
    session = sessions["dbg"]
    import fnmatch
    while not session.is_execution_finished():
        selector = session.selector
        name = selector.name if selector is not None else ""
        if (fnmatch.fnmatchcase(name, "*open*File*")
                and session.arguments and session.arguments[0] == "myFile.txt"):
            session.set_breakpoint(session.context().sender.method)
        session.step()
    return None


def _method_family_collect(sessions, raw):
    session = sessions["dbg"]
    targets = sorted({bp.method.display_name()
                      for bp in session.breakpoints.values()
                      if bp.method is not None})
    # relaunch: a fresh run halts in exactly those methods, in call order
    relaunch = debug(METHOD_FAMILY_TARGET)
    for name in targets:
        class_name, selector = name.split(">>")
        relaunch.set_breakpoint(relaunch.compiled.find_method(class_name, selector))
    halted_in = []
    while True:
        hit = relaunch.continue_()
        if hit.kind != HitDescriptor.BREAKPOINT:
            break
        halted_in.append(plain(relaunch.selector))
    return {"targets": targets, "breakpoints": len(session.breakpoints),
            "relaunchHalts": halted_in}


def _method_family_verify(report, sessions):
    failures = []
    # oracle: scan frame pushes for matching selector + argument
    import fnmatch
    callers = []

    def never(ex):
        frame = ex.top
        if (frame.pc == 0 and frame.sender is not None
                and fnmatch.fnmatchcase(frame.method.selector or "", "*open*File*")
                and frame.arguments and frame.arguments[0] == "myFile.txt"):
            callers.append(frame.sender.method.display_name())
        return False

    _raw_scan(METHOD_FAMILY_TARGET, never)
    expected = sorted(set(callers))
    _check(failures, report.captured["targets"] == expected,
           f"breakpoint targets {report.captured['targets']} != oracle {expected}")
    _check(failures, report.captured["targets"] ==
           ["Exporter>>pushTo:", "Importer>>pullFrom:"],
           "the decoy callers (wrong file, wrong selector family) leaked in")
    _check(failures, report.captured["relaunchHalts"] ==
           ["#pullFrom:", "#pushTo:"],
           f"relaunch halts {report.captured['relaunchHalts']} not in call order")
    _check(failures, report.final["status"] == "finished",
           "the scan pass should run the program to completion")
    return failures


# ----------------------------------------------------------------------------------
# control-flow: halt in a method only when NOT called by one specific caller
# ----------------------------------------------------------------------------------

CONTROL_FLOW_TARGET = """
class ProjectBrowser {
  fields saves.
  method init { saves := 0 }
  method trySaveAs: aName { saves := saves + 1. ^aName }
}
class ActionSaveProjectAs {
  method actionPerformed: aBrowser { ^aBrowser trySaveAs: 'auto.prj' }
}
class MenuHandler {
  method saveClicked: aBrowser { ^aBrowser trySaveAs: 'user.prj' }
}
| pb |
pb := ProjectBrowser new.
pb init.
ActionSaveProjectAs new actionPerformed: pb.
MenuHandler new saveClicked: pb.
'done'
"""

CONTROL_FLOW_SCRIPT = """
| evidence |
dbg stepUntil: [
    (dbg method = (ProjectBrowser methodNamed: #trySaveAs:)) and: [
        (dbg context sender method =
            (ActionSaveProjectAs methodNamed: #actionPerformed:)) not ]].
evidence := OrderedCollection new.
evidence add: dbg selector.
evidence add: dbg context sender selector.
evidence add: (dbg arguments at: 1).
evidence
"""


def _control_flow_host(sessions):
    session = sessions["dbg"]
    target = session.compiled.find_method("ProjectBrowser", "trySaveAs:")
    excluded = session.compiled.find_method("ActionSaveProjectAs",
                                            "actionPerformed:")

    def predicate(s):
        if s.context().compiled_method is not target:
            return False
        sender = s.context().sender
        return sender is None or sender.compiled_method is not excluded

    session.step_until(predicate)
    return [session.selector, session.context().sender.selector,
            session.arguments[0]]


def _control_flow_verify(report, sessions):
    failures = []
    _check(failures, report.captured == ["#trySaveAs:", "#saveClicked:", "user.prj"],
           f"unexpected evidence {report.captured}")
    # oracle: position of the accepted halt (name-based; the oracle runs
    # its own compile, so identity would never match)
    def at_interesting_save(ex):
        frame = ex.top
        return (frame.method.display_name() == "ProjectBrowser>>trySaveAs:"
                and frame.sender is not None
                and frame.sender.method.display_name()
                != "ActionSaveProjectAs>>actionPerformed:")

    steps, _ = _raw_scan(CONTROL_FLOW_TARGET, at_interesting_save)
    _check(failures, report.final["steps"] == steps,
           f"suspended after {report.final['steps']} steps, oracle says {steps}")
    return failures


# ----------------------------------------------------------------------------------
# control-flow-anywhere: ...even when the unwanted caller is deeper in the stack
# ----------------------------------------------------------------------------------

CONTROL_FLOW_ANYWHERE_TARGET = """
class ProjectBrowser {
  fields saves.
  method init { saves := 0 }
  method trySaveAs: aName { saves := saves + 1. ^aName }
}
class AutoSaver {
  method run: aBrowser { ^aBrowser trySaveAs: 'auto.prj' }
}
class ActionSaveProjectAs {
  method actionPerformed: aBrowser { ^AutoSaver new run: aBrowser }
}
class MenuHandler {
  method saveClicked: aBrowser { ^aBrowser trySaveAs: 'user.prj' }
}
| pb |
pb := ProjectBrowser new.
pb init.
ActionSaveProjectAs new actionPerformed: pb.
MenuHandler new saveClicked: pb.
'done'
"""

CONTROL_FLOW_ANYWHERE_SCRIPT = """
| evidence |
dbg stepUntil: [
    (dbg method = (ProjectBrowser methodNamed: #trySaveAs:)) and: [
        (dbg stack anySatisfy: [ :ctx |
            ctx method = (ActionSaveProjectAs methodNamed: #actionPerformed:) ]) not ]].
evidence := OrderedCollection new.
evidence add: dbg selector.
evidence add: dbg context sender selector.
evidence add: (dbg arguments at: 1).
evidence
"""


def _control_flow_anywhere_host(sessions):
    session = sessions["dbg"]
    target = session.compiled.find_method("ProjectBrowser", "trySaveAs:")
    excluded = session.compiled.find_method("ActionSaveProjectAs",
                                            "actionPerformed:")

    def predicate(s):
        if s.context().compiled_method is not target:
            return False
        return all(c.compiled_method is not excluded for c in s.stack())

    session.step_until(predicate)
    return [session.selector, session.context().sender.selector,
            session.arguments[0]]


def _control_flow_anywhere_verify(report, sessions):
    failures = []
    _check(failures, report.captured == ["#trySaveAs:", "#saveClicked:", "user.prj"],
           f"unexpected evidence {report.captured}")
    # the direct-sender filter is not enough on this call shape: it halts on
    # the indirect auto-save because the unwanted caller is one level down
    naive = debug(CONTROL_FLOW_ANYWHERE_TARGET)
    target = naive.compiled.find_method("ProjectBrowser", "trySaveAs:")
    excluded = naive.compiled.find_method("ActionSaveProjectAs",
                                          "actionPerformed:")
    naive.step_until(lambda s: s.context().compiled_method is target
                     and s.context().sender.compiled_method is not excluded)
    _check(failures, naive.arguments[0] == "auto.prj",
           "the direct-sender variant should have halted on the auto-save")
    _check(failures, any(c.compiled_method is excluded for c in naive.stack()),
           "the unwanted caller should be further down the naive halt's stack")
    return failures


# ----------------------------------------------------------------------------------
# pitons: an ordered chain of one-shot halts through a long execution
# ----------------------------------------------------------------------------------

PITONS_TARGET = """
class ClassA {
  method method1: n { ^n * 2 }
}
class ClassB {
  method method2: n { ^n + 5 }
}
class ClassC {
  method methodN: n { ^n - 1 }
}
class Engine {
  method crank: rounds {
    | acc i |
    acc := 0.
    i := 0.
    [ i < rounds ] whileTrue: [
        acc := acc + (ClassA new method1: i).
        i := i + 1 ].
    ^acc
  }
}
| e a b c |
ClassB new method2: 0.
e := Engine new.
e crank: 3.
a := ClassA new method1: 4.
b := ClassB new method2: a.
e crank: 2.
c := ClassC new methodN: b.
ClassB new method2: c.
'done'
"""

PITONS_SCRIPT = """
class PitonWalker {
  method walk: pitonMethods {
    | halts |
    halts := OrderedCollection new.
    pitonMethods do: [ :aMethod |
        dbg stepUntil: [ dbg method = aMethod ].
        halts add: dbg selector ].
    ^halts
  }
}
| pitons |
pitons := OrderedCollection new.
pitons add: (ClassA methodNamed: #method1:).
pitons add: (ClassB methodNamed: #method2:).
pitons add: (ClassC methodNamed: #methodN:).
PitonWalker new walk: pitons
"""


def _pitons_host(sessions):
    session = sessions["dbg"]
    halts = []
    for class_name, selector in (("ClassA", "method1:"), ("ClassB", "method2:"),
                                 ("ClassC", "methodN:")):
        target = session.compiled.find_method(class_name, selector)
        session.step_until(
            lambda s, t=target: s.context().compiled_method is t)
        halts.append(session.selector)
    return halts


def _pitons_verify(report, sessions):
    failures = []
    _check(failures, report.captured == ["#method1:", "#method2:", "#methodN:"],
           f"halt order {report.captured} is wrong")
    _check(failures,
           report.halts == [{"kind": "stepUntil", "selector": s}
                            for s in report.captured],
           f"halts {report.halts} do not record the piton arrivals")
    # oracle: replay every method activation of a raw run, then walk them the
    # way the script does — each piton's next activation after the previous
    # arrival
    activations = []

    def record(ex):
        top = ex.top
        if top is not None and top.pc == 0:
            activations.append((ex.steps_executed, top.method.display_name()))
        return False

    _raw_scan(PITONS_TARGET, record)
    firsts = {}
    for step, name in activations:
        firsts.setdefault(name, step)
    # the target really does run method2: before method1: ever activates;
    # the walk must step through it without halting
    _check(failures,
           firsts["ClassB>>method2:"] < firsts["ClassA>>method1:"],
           "target no longer executes method2: out of order")
    arrivals = []
    for wanted in ("ClassA>>method1:", "ClassB>>method2:",
                   "ClassC>>methodN:"):
        after = arrivals[-1] if arrivals else -1
        arrivals.append(next(step for step, name in activations
                             if name == wanted and step > after))
    _check(failures, report.final["steps"] == arrivals[-1],
           f"final suspension at {report.final['steps']}, oracle says "
           f"{arrivals[-1]}")
    _check(failures, report.final["selector"] == "#methodN:",
           f"expected to rest in methodN:, got {report.final}")
    return failures


# ----------------------------------------------------------------------------------
# divergence: step two executions side-by-side until their methods differ
# ----------------------------------------------------------------------------------

_DIVERGENCE_COMMON_METHODS = """
  method init { settings := Dictionary new }
  method parent: aConfig { parent := aConfig }
  method set: aKey to: aValue { settings at: aKey put: aValue }
  method lookup: aKey { ^settings at: aKey ifAbsent: [ nil ] }
  method doesNotUnderstand: aMessage {
    parent isNil ifTrue: [ ^nil ].
    ^parent lookup: aMessage selector
  }
"""

_DIVERGENCE_MAIN = """
| root sub |
root := Configuration new.
root init.
root set: #disabledPhases to: 'none'.
sub := Configuration new.
sub init.
sub parent: root.
sub disabledPhases
"""

DIVERGENCE_ORIGINAL = (
    "class Configuration {\n  fields settings parent.\n"
    + _DIVERGENCE_COMMON_METHODS + "}\n" + _DIVERGENCE_MAIN)

DIVERGENCE_MODIFIED = (
    "class Configuration {\n  fields settings parent disabledPhases.\n"
    + _DIVERGENCE_COMMON_METHODS
    + "  method disabledPhases { ^disabledPhases }\n}\n" + _DIVERGENCE_MAIN)

DIVERGENCE_SCRIPT = """
| steps evidence |
steps := 0.
[ (dbg1 method name) = (dbg2 method name) ] whileTrue: [
    dbg1 step.
    dbg2 step.
    steps := steps + 1 ].
evidence := OrderedCollection new.
evidence add: steps.
evidence add: dbg1 method name.
evidence add: dbg2 method name.
evidence
"""


def _divergence_host(sessions):
    one, two = sessions["dbg1"], sessions["dbg2"]
    steps = 0
    while (one.context().compiled_method.display_name()
           == two.context().compiled_method.display_name()):
        one.step()
        two.step()
        steps += 1
    return [steps, one.context().compiled_method.display_name(),
            two.context().compiled_method.display_name()]


def _divergence_verify(report, sessions):
    failures = []
    steps, name1, name2 = report.captured
    _check(failures, name1 == "Configuration>>doesNotUnderstand:",
           f"original run diverged in {name1}")
    _check(failures, name2 == "Configuration>>disabledPhases",
           f"modified run diverged in {name2}")
    # oracle: independent lockstep over plain executions
    ex1 = create_execution(DIVERGENCE_ORIGINAL)
    ex2 = create_execution(DIVERGENCE_MODIFIED)
    oracle_steps = 0
    while (ex1.top.method.display_name() == ex2.top.method.display_name()):
        ex1.step()
        ex2.step()
        oracle_steps += 1
        if oracle_steps > 100_000:
            failures.append("oracle lockstep never diverged")
            return failures
    _check(failures, steps == oracle_steps,
           f"diverged after {steps} steps, oracle says {oracle_steps}")
    # and the bug itself: the accessor answers nil where the hidden
    # lookup answered the parent's value
    original = run_program(DIVERGENCE_ORIGINAL)
    modified = run_program(DIVERGENCE_MODIFIED)
    _check(failures, original.result == "none" and modified.result is None,
           "the two variants should answer 'none' vs nil")
    return failures


# ----------------------------------------------------------------------------------
# collect-stepping: jump to the Nth execution of a block inside an iterator
# ----------------------------------------------------------------------------------

COLLECT_STEPPING_TARGET = """
| c out |
c := OrderedCollection new.
c add: 4. c add: 8. c add: 15. c add: 16. c add: 23.
c add: 42. c add: 7. c add: 19. c add: 76. c add: 3.
out := c collect: [ :each | each * 2 ].
out size
"""

COLLECT_STEPPING_SCRIPT = """
| blockClosure lastCtx evidence |
dbg stepUntil: [ dbg method = (Collection methodNamed: #collect:) ].
blockClosure := dbg arguments at: 1.
7 timesRepeat: [
    dbg stepUntil: [
        (lastCtx ~~ dbg context) and: [ dbg context method = blockClosure ] ].
    lastCtx := dbg context ].
evidence := OrderedCollection new.
evidence add: (dbg context temporaries at: #each).
evidence add: (dbg context method = blockClosure).
evidence add: dbg context isBlockContext.
evidence
"""


def _collect_stepping_host(sessions):
    session = sessions["dbg"]
    collect = session.compiled.find_method("Collection", "collect:")
    session.step_until(lambda s: s.context().compiled_method is collect)
    closure = session.arguments[0]
    last_frame_id = None
    for _ in range(7):
        def predicate(s):
            ctx = s.context()
            return (ctx.frame_id != last_frame_id
                    and ctx.compiled_method is closure.method)
        session.step_until(predicate)
        last_frame_id = session.context().frame_id
    ctx = session.context()
    return [ctx.temporaries["each"], ctx.compiled_method is closure.method,
            ctx.is_block]


def _collect_stepping_verify(report, sessions):
    failures = []
    _check(failures, report.captured == [7, True, True],
           f"unexpected evidence {report.captured} (7th element is 7)")
    # oracle: the 7th activation of the block the main program defines
    # (the only block whose home frame is the main frame), by raw pushes
    activations = []

    def seventh_activation(ex):
        frame = ex.top
        if (frame.pc == 0 and frame.home is not frame
                and frame.home.sender is None
                and frame.frame_id not in activations):
            activations.append(frame.frame_id)
            return len(activations) == 7
        return False

    steps, ex = _raw_scan(COLLECT_STEPPING_TARGET, seventh_activation)
    _check(failures, steps is not None, "oracle never saw a 7th block activation")
    each_slot = dict(ex.top.method.temp_names)["each"]
    _check(failures, ex.top.temps[each_slot] == 7,
           "oracle's 7th activation is not bound to element 7")
    _check(failures, report.final["steps"] == steps,
           f"suspended after {report.final['steps']} steps, oracle says {steps}")
    _check(failures, report.final["frameId"] == activations[-1],
           "script rests in a different activation than the oracle's 7th")
    return failures


# ----------------------------------------------------------------------------------
# object-capture / object-replay: the atom viewer with random drawers
# ----------------------------------------------------------------------------------

ATOM_VIEWER_TARGET = """
class Atom {
  fields shape radius.
  method setShape: aSymbol radius: n { shape := aSymbol. radius := n }
  method shape { ^shape }
  method radius { ^radius }
  method isCircular {
    ^(shape = #circle) or: [ (shape = #sphere) or: [ shape = #torus ] ]
  }
  method renderWith: aDrawer {
    shape = #circle ifTrue: [ ^aDrawer renderCircle: self ].
    shape = #sphere ifTrue: [ ^aDrawer renderSphere: self ].
    shape = #torus ifTrue: [ ^aDrawer renderTorus: self ].
    ^aDrawer renderBox: self
  }
}
class AtomDrawer {
  fields id.
  method setId: n { id := n }
  method id { ^id }
  method renderCircle: anAtom { self log: 'circle' of: anAtom }
  method renderSphere: anAtom { self log: 'sphere' of: anAtom }
  method renderTorus: anAtom { self log: 'torus' of: anAtom }
  method renderBox: anAtom { self log: 'box' of: anAtom }
  method log: aShape of: anAtom {
    Transcript show: aShape , ' r' , anAtom radius printString ,
                     ' by drawer ' , id printString.
    Transcript cr
  }
}
class AtomViewer {
  fields rng drawers.
  method init {
    rng := Random new.
    rng setSeed: DefaultRandomSeed.
    drawers := OrderedCollection new.
    drawers add: (AtomDrawer new setId: 1).
    drawers add: (AtomDrawer new setId: 2).
    drawers add: (AtomDrawer new setId: 3)
  }
  method randomAtomDrawer { ^drawers at: (rng nextInt: drawers size) }
  method displayAtom: anAtom { anAtom renderWith: self randomAtomDrawer }
  method displayAll: atoms { atoms do: [ :a | self displayAtom: a ] }
}
| viewer atoms |
viewer := AtomViewer new.
viewer init.
atoms := OrderedCollection new.
atoms add: (Atom new setShape: #box radius: 10).
atoms add: (Atom new setShape: #circle radius: 20).
atoms add: (Atom new setShape: #circle radius: 60).
atoms add: (Atom new setShape: #sphere radius: 70).
atoms add: (Atom new setShape: #box radius: 80).
viewer displayAll: atoms.
'displayed'
"""

OBJECT_CAPTURE_SCRIPT = """
| bpoint atom drawer evidence |
bpoint := dbg setBreakpointOn: (AtomViewer methodNamed: #displayAtom:).
bpoint whenHit: [
    dbg stepUntil: [
        dbg currentNode isMessage
        and: [ dbg messageSelector = #randomAtomDrawer ] ].
    dbg stepOver.
    atom := dbg messageReceiver.
    drawer := dbg messageArguments at: 1.
    ((atom isCircular) and: [ atom radius > 50 ])
      ifTrue: [
        dbg haltOnCallTo: drawer.
        bpoint remove ].
    dbg continue ].
dbg continue.
evidence := OrderedCollection new.
evidence add: atom radius.
evidence add: drawer id.
evidence add: dbg messageSelector.
evidence add: (dbg messageReceiver == drawer).
evidence
"""


def _at_named_send(s, name):
    return (s.current_node().kind is NodeKind.MESSAGE
            and s.message_selector() == Symbol(name))


def _object_capture_host(sessions):
    session = sessions["dbg"]
    state = {"atom": None, "drawer": None}
    bpoint = session.set_breakpoint(
        session.compiled.find_method("AtomViewer", "displayAtom:"))

    def on_hit(s):
        s.step_until(lambda ss: _at_named_send(ss, "randomAtomDrawer"))
        s.step_over()
        state["atom"] = s.message_receiver()
        state["drawer"] = s.message_arguments()[0]
        atom = state["atom"]
        circular = atom.field_named("shape") in (Symbol("circle"),
                                                 Symbol("sphere"),
                                                 Symbol("torus"))
        if circular and atom.field_named("radius") > 50:
            s.halt_on_call(state["drawer"])
            bpoint.remove()
        s.continue_()

    bpoint.when_hit(on_hit)
    session.continue_()
    return [state["atom"].field_named("radius"),
            state["drawer"].field_named("id"), session.message_selector(),
            session.message_receiver() is state["drawer"]]


def _lcg_drawer_ids(seed: int, draws: int, pool: int = 3) -> list:
    """The deterministic drawer choice sequence, replicated arithmetically."""
    state = seed % 2_147_483_648
    ids = []
    for _ in range(draws):
        state = (state * 1_103_515_245 + 12_345) % 2_147_483_648
        ids.append(state % pool + 1)
    return ids


def _object_capture_verify(report, sessions):
    failures = []
    ids = _lcg_drawer_ids(seed=1, draws=3)
    expected_drawer = ids[2]  # the third displayed atom is the culprit
    _check(failures, report.captured ==
           [60, expected_drawer, "#renderCircle:", True],
           f"unexpected evidence {report.captured}, drawer ids {ids}")
    kinds = [h["kind"] for h in report.halts]
    _check(failures, kinds == ["breakpoint", "breakpoint", "breakpoint",
                               "watchCall"],
           f"halt kinds {kinds}")
    _check(failures, report.halts[-1]["watchId"] is not None,
           "the final halt should come from the call watch")
    _check(failures, report.final["status"] == "running",
           "the session rests suspended at the captured drawer's render send")
    session = sessions["dbg"]
    # breakpoints never touched the code: checksums still match a fresh compile
    fresh = debug(ATOM_VIEWER_TARGET)
    mine = sorted((m.display_name(), method_checksum(m))
                  for m in session.compiled.user_methods())
    theirs = sorted((m.display_name(), method_checksum(m))
                    for m in fresh.compiled.user_methods())
    _check(failures, mine == theirs, "method checksums drifted")
    return failures


OBJECT_REPLAY_SCRIPT = """
| bpoint replayPoint drawerNode drawer evidence |
bpoint := dbg setBreakpointOn: (AtomViewer methodNamed: #displayAtom:).
bpoint whenHit: [
    dbg stepUntil: [
        dbg currentNode isMessage
        and: [ dbg messageSelector = #randomAtomDrawer ] ].
    drawerNode := dbg currentNode.
    dbg stepOver.
    drawer := dbg messageArguments at: 1.
    ((dbg messageReceiver isCircular) and: [ dbg messageReceiver radius > 50 ])
      ifTrue: [
        bpoint remove.
        replayPoint := dbg setBreakpointOn: drawerNode.
        replayPoint whenHit: [
            dbg skipWith: drawer.
            dbg continue ] ].
    dbg continue ].
dbg continue.
evidence := OrderedCollection new.
evidence add: drawer id.
evidence add: dbg isExecutionFinished.
evidence add: dbg result.
evidence
"""


def _object_replay_host(sessions):
    session = sessions["dbg"]
    state = {"drawer": None, "node": None}
    bpoint = session.set_breakpoint(
        session.compiled.find_method("AtomViewer", "displayAtom:"))

    def on_replay(s):
        s.skip_with(state["drawer"])
        s.continue_()

    def on_hit(s):
        s.step_until(lambda ss: _at_named_send(ss, "randomAtomDrawer"))
        state["node"] = s.current_node()
        s.step_over()
        state["drawer"] = s.message_arguments()[0]
        atom = s.message_receiver()
        circular = atom.field_named("shape") in (Symbol("circle"),
                                                 Symbol("sphere"),
                                                 Symbol("torus"))
        if circular and atom.field_named("radius") > 50:
            bpoint.remove()
            s.set_breakpoint(state["node"]).when_hit(on_replay)
        s.continue_()

    bpoint.when_hit(on_hit)
    session.continue_()
    return [state["drawer"].field_named("id"),
            session.is_execution_finished(), session.result]


def _object_replay_verify(report, sessions):
    failures = []
    ids = _lcg_drawer_ids(seed=1, draws=3)
    forced = ids[2]
    _check(failures, report.captured == [forced, True, "displayed"],
           f"unexpected evidence {report.captured}")
    # expected transcript, computed arithmetically: atoms 1-3 use the random
    # drawers; atoms 4-5 reuse the captured one (their draws are skipped)
    atoms = [("box", 10), ("circle", 20), ("circle", 60),
             ("sphere", 70), ("box", 80)]
    drawer_of = ids + [forced, forced]
    expected_output = "".join(
        f"{shape} r{radius} by drawer {drawer_of[i]}\n"
        for i, (shape, radius) in enumerate(atoms))
    _check(failures, report.output == expected_output,
           f"output {report.output!r} != forced-drawer run {expected_output!r}")
    # cross-check with an independently driven forced run
    forced_session = debug(ATOM_VIEWER_TARGET)
    captured = None
    for draw in (1, 2, 3):
        forced_session.step_until(
            lambda s: _at_named_send(s, "randomAtomDrawer"))
        forced_session.step_over()
        if draw == 3:
            captured = forced_session.message_arguments()[0]
    while True:
        forced_session.step_until(
            lambda s: _at_named_send(s, "randomAtomDrawer"))
        if forced_session.is_execution_finished():
            break
        forced_session.skip_with(captured)
    _check(failures, forced_session.output_text == report.output,
           "host-forced rerun output differs from the replay run")
    halt_kinds = [h["kind"] for h in report.halts]
    _check(failures, halt_kinds ==
           ["breakpoint", "breakpoint", "breakpoint", "breakpoint",
            "breakpoint", "executionFinished"],
           f"halt kinds {halt_kinds}")
    return failures


# Registry -------------------------------------------------------------------------

SCENARIOS = {
    s.name: s for s in (
        Scenario(
            name="double-open",
            summary="when a file is opened twice, answer the call stack that "
                    "performed the first open",
            sources=(("dbg", DOUBLE_OPEN_TARGET),),
            script=DOUBLE_OPEN_SCRIPT,
            host=_double_open_host,
            verify=_double_open_verify,
        ),
        Scenario(
            name="assignment-monitor",
            summary="suspend on the assignment that stores 42 into foo of a "
                    "Bar instance, ignoring same-named fields elsewhere",
            sources=(("dbg", ASSIGNMENT_MONITOR_TARGET),),
            script=ASSIGNMENT_MONITOR_SCRIPT,
            host=_assignment_monitor_host,
            verify=_assignment_monitor_verify,
        ),
        Scenario(
            name="pre-exception",
            summary="suspend just before an exception is signalled, with the "
                    "execution still intact",
            sources=(("dbg", PRE_EXCEPTION_TARGET),),
            script=PRE_EXCEPTION_SCRIPT,
            host=_pre_exception_host,
            verify=_pre_exception_verify,
        ),
        Scenario(
            name="nil-receiver",
            summary="suspend on the chain sub-expression about to send a "
                    "message to nil",
            sources=(("dbg", NIL_RECEIVER_TARGET),),
            script=NIL_RECEIVER_SCRIPT,
            host=_nil_receiver_host,
            verify=_nil_receiver_verify,
        ),
        Scenario(
            name="method-family",
            summary="plant breakpoints in every method that calls a "
                    "file-opening method on one particular file",
            sources=(("dbg", METHOD_FAMILY_TARGET),),
            script=METHOD_FAMILY_SCRIPT,
            host=_method_family_host,
            verify=_method_family_verify,
            collect=_method_family_collect,
        ),
        Scenario(
            name="control-flow",
            summary="halt in a method unless it was called by one specific "
                    "uninteresting caller",
            sources=(("dbg", CONTROL_FLOW_TARGET),),
            script=CONTROL_FLOW_SCRIPT,
            host=_control_flow_host,
            verify=_control_flow_verify,
        ),
        Scenario(
            name="control-flow-anywhere",
            summary="halt in a method unless the uninteresting caller appears "
                    "anywhere in the stack",
            sources=(("dbg", CONTROL_FLOW_ANYWHERE_TARGET),),
            script=CONTROL_FLOW_ANYWHERE_SCRIPT,
            host=_control_flow_anywhere_host,
            verify=_control_flow_anywhere_verify,
        ),
        Scenario(
            name="pitons",
            summary="chain ordered one-shot halts through loops and decoy "
                    "calls deep into an execution",
            sources=(("dbg", PITONS_TARGET),),
            script=PITONS_SCRIPT,
            host=_pitons_host,
            verify=_pitons_verify,
            report_halts=lambda sessions, arrivals: [
                {"kind": "stepUntil", "selector": s} for s in arrivals],
        ),
        Scenario(
            name="divergence",
            summary="step two executions side-by-side until they rest in "
                    "differently-named methods",
            sources=(("dbg1", DIVERGENCE_ORIGINAL),
                     ("dbg2", DIVERGENCE_MODIFIED)),
            script=DIVERGENCE_SCRIPT,
            host=_divergence_host,
            verify=_divergence_verify,
        ),
        Scenario(
            name="collect-stepping",
            summary="jump straight to the 7th execution of a block passed to "
                    "a collection iterator",
            sources=(("dbg", COLLECT_STEPPING_TARGET),),
            script=COLLECT_STEPPING_SCRIPT,
            host=_collect_stepping_host,
            verify=_collect_stepping_verify,
        ),
        Scenario(
            name="object-capture",
            summary="capture a transient randomly-chosen object mid-flight "
                    "and put a call watch on it",
            sources=(("dbg", ATOM_VIEWER_TARGET),),
            script=OBJECT_CAPTURE_SCRIPT,
            host=_object_capture_host,
            verify=_object_capture_verify,
        ),
        Scenario(
            name="object-replay",
            summary="re-inject a captured object in place of later random "
                    "choices, making the rest of the run deterministic",
            sources=(("dbg", ATOM_VIEWER_TARGET),),
            script=OBJECT_REPLAY_SCRIPT,
            host=_object_replay_host,
            verify=_object_replay_verify,
        ),
    )
}


def scenario_names() -> list:
    return list(SCENARIOS)


def _make_sessions(scenario: Scenario) -> dict:
    return {name: debug(source, seed=scenario.seed)
            for name, source in scenario.sources}


def run_scenario(name: str, *, via: str = "script") -> ScenarioReport:
    """Run one scenario end to end and answer its report. `via` picks the
    script driver or the equivalent host-API driver."""
    scenario = SCENARIOS.get(name)
    if scenario is None:
        raise UnknownScenario(f"no scenario named {name!r}; known: "
                              f"{', '.join(scenario_names())}")
    if via not in ("script", "host"):
        raise ValueError(f"via must be 'script' or 'host', not {via!r}")
    sessions = _make_sessions(scenario)
    primary_name = scenario.sources[0][0]
    primary = sessions[primary_name]
    if via == "script":
        bindings = {n: DebuggerView(s) for n, s in sessions.items()}
        raw = eval_script(primary, scenario.script, bindings=bindings)
    else:
        raw = scenario.host(sessions)
    captured = (scenario.collect(sessions, raw) if scenario.collect is not None
                else plain(raw))
    halts = (scenario.report_halts(sessions, captured)
             if scenario.report_halts is not None
             else [_hit_dict(h) for h in primary.hits])
    report = ScenarioReport(
        name=name, via=via, captured=captured,
        halts=halts, final=_final_state(primary), output=primary.output_text)
    report.failures = scenario.verify(report, sessions)
    report.passed = not report.failures
    return report
