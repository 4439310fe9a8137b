"""Debugging scripts written in the guest language itself.

A script is an ordinary Lumen program evaluated on its own execution, with
the global `dbg` bound to a proxy of the session under debug. Sends to the
proxy map one-to-one onto host debugger operations; context, node,
breakpoint, watch and hit reifications come back as further proxies, and
plain guest values (the debuggee's objects included) cross the boundary
untouched, so scripts can hold and compare them directly.

Block arguments (`stepUntil:`/`whenHit:` conditions and actions) are
evaluated on the execution that sent them — normally the script's — via
child runs, so a script's state is visible to its own conditions.

Debugger errors raised mid-send (not at a message send, dead frame, bad
target, ...) surface inside the script as ordinary `Error` signals, which
scripts may catch with `on:do:`.
"""

from __future__ import annotations

from .compiler import compile_program
from .debugger import (Breakpoint, Context, DebugSession, HitDescriptor,
                       Watch, debug)
from .errors import (DebuggerError, ScriptFailed, StepBudgetExceeded,
                     UnhandledGuestException)
from .nodes import AstNode, NodeKind
from .parser import LumenProgram
from .primitives import GuestError, SignalRequest
from .values import BlockClosure, HostBridge, MethodHandle, Symbol
from .vm import (DEFAULT_STEP_BUDGET, Execution, run_block, run_send,
                 run_to_completion)


def _selectors(**pairs):
    return pairs


class _Proxy(HostBridge):
    """Host object answering a fixed selector set from guest code."""

    SELECTORS: dict = {}

    def can_handle(self, selector: str) -> bool:
        return selector in self.SELECTORS

    def handle(self, selector: str, args: list, state: Execution):
        try:
            return self.SELECTORS[selector](self, args, state)
        except (DebuggerError, StepBudgetExceeded) as e:
            raise GuestError("Error", str(e)) from e
        except UnhandledGuestException as e:
            # a guest exception escaped a block the caller supplied:
            # re-signal the very same object so on:do: in the script sees it
            if e.exception_object is not None:
                raise SignalRequest(e.exception_object) from e
            raise GuestError("Error", str(e)) from e


def _block_arg(value, what):
    if not isinstance(value, BlockClosure):
        raise GuestError("Error", f"{what} expects a block")
    return value


def _guest_bool(value, what):
    if not isinstance(value, bool):
        raise GuestError("Error", f"{what} must answer true or false")
    return value


def _new_dictionary(state: Execution, pairs) -> object:
    d = state.instantiate(state.classes["Dictionary"])
    d.store.extend([k, v] for k, v in pairs)
    return d


# Node proxies --------------------------------------------------------------------

_KIND_TESTS = {
    NodeKind.PROGRAM: "isProgramNode",
    NodeKind.CLASS_DEF: "isClassNode",
    NodeKind.METHOD_DEF: "isMethodNode",
    NodeKind.BLOCK: "isBlockNode",
    NodeKind.SEQUENCE: "isSequenceNode",
    NodeKind.RETURN: "isReturnNode",
    NodeKind.ASSIGNMENT: "isAssignmentNode",
    NodeKind.MESSAGE: "isMessageNode",
    NodeKind.VARIABLE_READ: "isVariableNode",
    NodeKind.LITERAL: "isLiteralNode",
    NodeKind.TEMP_DECL: "isTempDeclNode",
    NodeKind.SELF_REF: "isSelfNode",
}

# short forms as used in prose-style scripts: `dbg currentNode isAssignment`
_KIND_SHORTHANDS = {sel[:-4]: kind for kind, sel in _KIND_TESTS.items()}

_VISIT_SELECTORS = {
    NodeKind.PROGRAM: "visitProgramNode:",
    NodeKind.CLASS_DEF: "visitClassNode:",
    NodeKind.METHOD_DEF: "visitMethodNode:",
    NodeKind.BLOCK: "visitBlockNode:",
    NodeKind.SEQUENCE: "visitSequenceNode:",
    NodeKind.RETURN: "visitReturnNode:",
    NodeKind.ASSIGNMENT: "visitAssignmentNode:",
    NodeKind.MESSAGE: "visitMessageNode:",
    NodeKind.VARIABLE_READ: "visitVariableNode:",
    NodeKind.LITERAL: "visitLiteralNode:",
    NodeKind.TEMP_DECL: "visitTempDeclNode:",
    NodeKind.SELF_REF: "visitSelfNode:",
}


class NodeProxy(_Proxy):
    guest_class_name = "SyntaxNode"

    def __init__(self, view: "DebuggerView", node: AstNode):
        self.view = view
        self.node = node

    def _id(self, args, state):
        return self.node.id

    def _kind(self, args, state):
        return Symbol(self.node.kind.value)

    def _selector(self, args, state):
        sel = self.node.selector
        return Symbol(sel) if sel is not None else None

    def _variable_name(self, args, state):
        name = self.node.name
        return Symbol(name) if name is not None else None

    def _literal_value(self, args, state):
        if self.node.kind is not NodeKind.LITERAL:
            raise GuestError("Error", "not a literal node")
        return self.node.value

    def _children(self, args, state):
        return state.new_array([self.view.node_proxy(c) for c in self.node.children])

    def _receiver_node(self, args, state):
        if self.node.kind is not NodeKind.MESSAGE:
            raise GuestError("Error", "not a message node")
        return self.view.node_proxy(self.node.receiver)

    def _argument_nodes(self, args, state):
        if self.node.kind is not NodeKind.MESSAGE:
            raise GuestError("Error", "not a message node")
        return state.new_array([self.view.node_proxy(a) for a in self.node.args])

    def _source_text(self, args, state):
        return self.view.source_text(self.node)

    def _accept(self, args, state):
        return run_send(state, args[0], _VISIT_SELECTORS[self.node.kind], [self])

    SELECTORS = _selectors(**{
        "id": _id,
        "kind": _kind,
        "selector": _selector,
        "variableName": _variable_name,
        "literalValue": _literal_value,
        "children": _children,
        "receiverNode": _receiver_node,
        "argumentNodes": _argument_nodes,
        "sourceText": _source_text,
        "accept:": _accept,
    })
    for _kind_value, _sel in _KIND_TESTS.items():
        SELECTORS[_sel] = (lambda k: lambda self, args, state: self.node.kind is k)(_kind_value)
    for _short, _kind_value in _KIND_SHORTHANDS.items():
        SELECTORS[_short] = (lambda k: lambda self, args, state: self.node.kind is k)(_kind_value)
    del _kind_value, _sel, _short


# Context proxies ------------------------------------------------------------------

class ContextProxy(_Proxy):
    guest_class_name = "Context"

    def __init__(self, view: "DebuggerView", context: Context):
        self.view = view
        self.context = context

    def _pc(self, args, state):
        return self.context.pc

    def _sender(self, args, state):
        sender = self.context.sender
        if sender is None:
            return None
        if sender.is_copy:
            return ContextProxy(self.view, sender)
        return self.view.context_proxy(sender)

    def _receiver(self, args, state):
        return self.context.receiver

    def _selector(self, args, state):
        return self.context.selector

    def _method(self, args, state):
        return self.context.method

    def _arguments(self, args, state):
        return state.new_array(self.context.arguments)

    def _temporaries(self, args, state):
        return _new_dictionary(
            state, ((Symbol(k), v) for k, v in self.context.temporaries.items()))

    def _push(self, args, state):
        self.context.push_value(args[0])
        return self

    def _pop(self, args, state):
        return self.context.pop_value()

    def _copy(self, args, state):
        return ContextProxy(self.view, self.context.copy())

    def _frame_id(self, args, state):
        return self.context.frame_id

    def _is_block_context(self, args, state):
        return self.context.is_block

    SELECTORS = _selectors(**{
        "pc": _pc,
        "sender": _sender,
        "receiver": _receiver,
        "selector": _selector,
        "method": _method,
        "arguments": _arguments,
        "temporaries": _temporaries,
        "push:": _push,
        "pop": _pop,
        "copy": _copy,
        "frameId": _frame_id,
        "isBlockContext": _is_block_context,
    })


# Trigger proxies -------------------------------------------------------------------

class BreakpointProxy(_Proxy):
    guest_class_name = "Breakpoint"

    def __init__(self, view: "DebuggerView", breakpoint: Breakpoint):
        self.view = view
        self.breakpoint = breakpoint

    def _when_hit(self, args, state):
        block = _block_arg(args[0], "whenHit:")
        view = self.view
        def action(session):
            call_args = [view.hit_proxy(session.last_hit)] \
                if block.method.num_args == 1 else []
            run_block(state, block, call_args)
        self.breakpoint.when_hit(action)
        return self

    def _remove(self, args, state):
        self.breakpoint.remove()
        return self

    def _once(self, args, state):
        self.breakpoint.set_once()
        return self

    def _id(self, args, state):
        return self.breakpoint.id

    def _enable(self, args, state):
        self.breakpoint.enable()
        return self

    def _disable(self, args, state):
        self.breakpoint.disable()
        return self

    SELECTORS = _selectors(**{
        "whenHit:": _when_hit,
        "remove": _remove,
        "once": _once,
        "id": _id,
        "enable": _enable,
        "disable": _disable,
    })


class WatchProxy(_Proxy):
    guest_class_name = "Watch"

    def __init__(self, view: "DebuggerView", watch: Watch):
        self.view = view
        self.watch = watch

    def _when_hit(self, args, state):
        block = _block_arg(args[0], "whenHit:")
        view = self.view
        def action(session):
            call_args = [view.hit_proxy(session.last_hit)] \
                if block.method.num_args == 1 else []
            run_block(state, block, call_args)
        self.watch.when_hit(action)
        return self

    def _remove(self, args, state):
        self.watch.remove()
        return self

    def _once(self, args, state):
        self.watch.set_once()
        return self

    def _id(self, args, state):
        return self.watch.id

    def _kind(self, args, state):
        return Symbol(self.watch.kind)

    SELECTORS = _selectors(**{
        "whenHit:": _when_hit,
        "remove": _remove,
        "once": _once,
        "id": _id,
        "kind": _kind,
    })


class HitProxy(_Proxy):
    guest_class_name = "Hit"

    def __init__(self, view: "DebuggerView", descriptor: HitDescriptor):
        self.view = view
        self.descriptor = descriptor

    def _kind(self, args, state):
        return Symbol(self.descriptor.kind)

    def _node(self, args, state):
        node = self.descriptor.node
        return self.view.node_proxy(node) if node is not None else None

    def _frame_id(self, args, state):
        return self.descriptor.frame_id

    def _breakpoint_id(self, args, state):
        return self.descriptor.breakpoint_id

    def _watch_id(self, args, state):
        return self.descriptor.watch_id

    def _removed(self, args, state):
        return self.descriptor.removed

    def _is_finished(self, args, state):
        return self.descriptor.kind == HitDescriptor.EXECUTION_FINISHED

    SELECTORS = _selectors(**{
        "kind": _kind,
        "node": _node,
        "frameId": _frame_id,
        "breakpointId": _breakpoint_id,
        "watchId": _watch_id,
        "removed": _removed,
        "isExecutionFinished": _is_finished,
    })


# The dbg proxy ---------------------------------------------------------------------

class DebuggerView(_Proxy):
    """The `dbg` global: every send maps onto one session operation."""

    guest_class_name = "Debugger"

    def __init__(self, session: DebugSession):
        self.session = session
        self._contexts: dict = {}  # frame_id -> ContextProxy (live frames)
        self._nodes: dict = {}     # node id -> NodeProxy

    # -- proxy caches (stable identity for scripts comparing with ==)

    def context_proxy(self, context: Context) -> ContextProxy:
        proxy = self._contexts.get(context.frame_id)
        if proxy is None:
            proxy = ContextProxy(self, context)
            self._contexts[context.frame_id] = proxy
        return proxy

    def node_proxy(self, node: AstNode) -> NodeProxy:
        proxy = self._nodes.get(node.id)
        if proxy is None:
            proxy = NodeProxy(self, node)
            self._nodes[node.id] = proxy
        return proxy

    def hit_proxy(self, descriptor: HitDescriptor) -> HitProxy:
        return HitProxy(self, descriptor)

    def source_text(self, node: AstNode) -> str:
        program = (self.session.compiled.program if node.id >= 0
                   else self.session.compiled.prelude)
        return program.source[node.span.start:node.span.end]

    # -- stepping

    def _step(self, args, state):
        return Symbol(self.session.step().value)

    def _step_over(self, args, state):
        return Symbol(self.session.step_over().value)

    def _step_until(self, args, state):
        block = _block_arg(args[0], "stepUntil:")
        def predicate(session):
            return _guest_bool(run_block(state, block), "a stepUntil: condition")
        self.session.step_until(predicate)
        return None

    def _step_until_within(self, args, state):
        block = _block_arg(args[0], "stepUntil:within:")
        cap = args[1]
        if isinstance(cap, bool) or not isinstance(cap, int) or cap < 1:
            raise GuestError("Error", "stepUntil:within: expects a positive "
                                      "step count")
        def predicate(session):
            return _guest_bool(run_block(state, block), "a stepUntil: condition")
        self.session.step_until(predicate, max_steps=cap)
        return None

    def _skip(self, args, state):
        self.session.skip()
        return None

    def _skip_with(self, args, state):
        self.session.skip_with(args[0])
        return None

    def _continue(self, args, state):
        return self.hit_proxy(self.session.continue_())

    # -- stack access

    def _is_execution_finished(self, args, state):
        return self.session.is_execution_finished()

    def _context(self, args, state):
        return self.context_proxy(self.session.context())

    def _stack(self, args, state):
        stack = state.instantiate(state.classes["CallStack"])
        stack.store.extend(self.context_proxy(c) for c in self.session.stack())
        return stack

    def _receiver(self, args, state):
        return self.session.receiver

    def _selector(self, args, state):
        return self.session.selector

    def _method(self, args, state):
        return self.session.method

    def _arguments(self, args, state):
        return state.new_array(self.session.arguments)

    def _temporaries(self, args, state):
        return _new_dictionary(
            state, ((Symbol(k), v) for k, v in self.session.temporaries.items()))

    # -- operand introspection

    def _message_receiver(self, args, state):
        return self.session.message_receiver()

    def _message_selector(self, args, state):
        return self.session.message_selector()

    def _message_arguments(self, args, state):
        return state.new_array(self.session.message_arguments())

    def _assignment_value(self, args, state):
        return self.session.assignment_value()

    def _assignment_variable_name(self, args, state):
        return self.session.assignment_variable_name()

    # -- AST mapping

    def _current_node(self, args, state):
        return self.node_proxy(self.session.current_node())

    def _node_named_method(self, args, state):
        # convenience: the node of a compiled method's body
        target = args[0]
        if not isinstance(target, MethodHandle):
            raise GuestError("Error", "methodNode: expects a compiled method")
        return self.node_proxy(target.method.home_ast)

    # -- breakpoints

    def _set_breakpoint(self, args, state):
        return BreakpointProxy(self, self.session.set_breakpoint())

    def _set_breakpoint_on(self, args, state):
        target = args[0]
        if isinstance(target, NodeProxy):
            target = target.node
        if not isinstance(target, (AstNode, MethodHandle)):
            raise GuestError("Error", "setBreakpointOn: expects a node or a "
                                      "compiled method")
        return BreakpointProxy(self, self.session.set_breakpoint(target))

    # -- object-centric watches

    def _halt_on_call(self, args, state):
        return WatchProxy(self, self.session.halt_on_call(args[0]))

    def _halt_on_call_for(self, args, state):
        return WatchProxy(self, self.session.halt_on_call(args[0], args[1]))

    def _halt_on_write(self, args, state):
        return WatchProxy(self, self.session.halt_on_write(args[0]))

    def _halt_on_write_field(self, args, state):
        return WatchProxy(self, self.session.halt_on_write(args[0], args[1]))

    # -- results

    def _result(self, args, state):
        return self.session.result

    def _output(self, args, state):
        return self.session.output_text

    def _failure_description(self, args, state):
        return self.session.failure_description()

    SELECTORS = _selectors(**{
        "step": _step,
        "stepOver": _step_over,
        "stepUntil:": _step_until,
        "stepUntil:within:": _step_until_within,
        "skip": _skip,
        "skipWith:": _skip_with,
        "continue": _continue,
        "isExecutionFinished": _is_execution_finished,
        "context": _context,
        "stack": _stack,
        "receiver": _receiver,
        "selector": _selector,
        "method": _method,
        "arguments": _arguments,
        "temporaries": _temporaries,
        "messageReceiver": _message_receiver,
        "messageSelector": _message_selector,
        "messageArguments": _message_arguments,
        "assignmentValue": _assignment_value,
        "assignmentVariableName": _assignment_variable_name,
        "currentNode": _current_node,
        "methodNode:": _node_named_method,
        "setBreakpoint": _set_breakpoint,
        "setBreakpointOn:": _set_breakpoint_on,
        "haltOnCall:": _halt_on_call,
        "haltOnCall:for:": _halt_on_call_for,
        "haltOnCallTo:": _halt_on_call,          # listing-style alias
        "haltOnCallTo:for:": _halt_on_call_for,
        "haltOnWrite:": _halt_on_write,
        "haltOnWrite:field:": _halt_on_write_field,
        "result": _result,
        "outputText": _output,
        "failureDescription": _failure_description,
    })


class SessionFactory(_Proxy):
    """Bound as the `Debugger` global inside scripts: opens nested sessions."""

    guest_class_name = "Debugger"

    def _debug(self, args, state):
        if not isinstance(args[0], str):
            raise GuestError("Error", "debug: expects program source text")
        return DebuggerView(debug(args[0]))

    def _debug_seed(self, args, state):
        if not isinstance(args[0], str):
            raise GuestError("Error", "debug:seed: expects program source text")
        if isinstance(args[1], bool) or not isinstance(args[1], int):
            raise GuestError("Error", "debug:seed: expects an integer seed")
        return DebuggerView(debug(args[0], seed=args[1]))

    SELECTORS = _selectors(**{
        "debug:": _debug,
        "debug:seed:": _debug_seed,
    })


# Running scripts ------------------------------------------------------------------

def script_bindings(session: DebugSession, extra: dict | None = None) -> dict:
    """Globals for a script over `session`: dbg, the Debugger factory, and
    the debuggee's user classes (so scripts can name them directly)."""
    bindings = {name: session.compiled.classes[name]
                for name in session.compiled.user_class_names}
    bindings["dbg"] = DebuggerView(session)
    bindings["Debugger"] = SessionFactory()
    if extra:
        bindings.update(extra)
    return bindings


def compile_script(script_source):
    if isinstance(script_source, (str, LumenProgram)):
        return compile_program(script_source)
    return script_source


def run_script(session: DebugSession, script_source, *,
               bindings: dict | None = None,
               max_steps: int = DEFAULT_STEP_BUDGET) -> Execution:
    """Run a script program with `dbg` bound to the session; answer the
    finished script execution (result, output and heap intact). A
    script-side unhandled exception raises ScriptFailed with the failed
    script execution attached."""
    compiled = compile_script(script_source)
    execution = Execution(compiled, bindings=script_bindings(session, bindings))
    execution.push_main_frame()
    run_to_completion(execution, max_steps)
    if execution.status.value == "failed":
        error = ScriptFailed(f"script failed: {execution.failure_description()}")
        error.execution = execution
        raise error
    return execution


def eval_script(session: DebugSession, script_source, *,
                bindings: dict | None = None,
                max_steps: int = DEFAULT_STEP_BUDGET):
    """Run a script and answer only its result value."""
    return run_script(session, script_source,
                      bindings=bindings, max_steps=max_steps).result


# Conformance ---------------------------------------------------------------------
#
# Every operation of the debugging API (as shipped: stepping, stack access,
# stack modification, AST mapping, object-centric operations, breakpoints,
# and the stack-access helpers) must be reachable both as a host call and as
# a script selector. The enumerator cross-checks the three columns; an empty
# gap list is asserted by the test suite and reported by the CLI.

API_TABLE = (
    # (section, notation, receiver, script selector, host operation)
    ("Stepping", "dbg step", "dbg", "step", "DebugSession.step"),
    ("Stepping", "dbg stepOver", "dbg", "stepOver", "DebugSession.step_over"),
    ("Stepping", "dbg stepUntil: aPredicate", "dbg", "stepUntil:", "DebugSession.step_until"),
    ("Stepping", "dbg skipWith: obj", "dbg", "skipWith:", "DebugSession.skip_with"),
    ("Stepping", "dbg skip", "dbg", "skip", "DebugSession.skip"),
    ("Stepping", "dbg continue", "dbg", "continue", "DebugSession.continue_"),
    ("Stack Access", "dbg isExecutionFinished", "dbg", "isExecutionFinished", "DebugSession.is_execution_finished"),
    ("Stack Access", "dbg context", "dbg", "context", "DebugSession.context"),
    ("Stack Access", "dbg stack", "dbg", "stack", "DebugSession.stack"),
    ("Stack Access", "ctx pc", "ctx", "pc", "Context.pc"),
    ("Stack Access", "ctx sender", "ctx", "sender", "Context.sender"),
    ("Stack Access", "ctx receiver", "ctx", "receiver", "Context.receiver"),
    ("Stack Access", "ctx selector", "ctx", "selector", "Context.selector"),
    ("Stack Access", "ctx method", "ctx", "method", "Context.method"),
    ("Stack Access", "ctx arguments", "ctx", "arguments", "Context.arguments"),
    ("Stack Access", "ctx temporaries", "ctx", "temporaries", "Context.temporaries"),
    ("Stack Modification", "ctx push: aValue", "ctx", "push:", "Context.push_value"),
    ("Stack Modification", "ctx pop", "ctx", "pop", "Context.pop_value"),
    ("AST and AST Mapping", "dbg currentNode", "dbg", "currentNode", "DebugSession.current_node"),
    ("AST and AST Mapping", "ast accept: visitor", "ast", "accept:", "nodes.visit"),
    ("AST and AST Mapping", "ast is*Node", "ast", "is*Node", "nodes.classify_node"),
    ("Object-Centric Debugging", "dbg haltOnCall: obj", "dbg", "haltOnCall:", "DebugSession.halt_on_call"),
    ("Object-Centric Debugging", "dbg haltOnCall: obj for: m", "dbg", "haltOnCall:for:", "DebugSession.halt_on_call"),
    ("Object-Centric Debugging", "dbg haltOnWrite: obj", "dbg", "haltOnWrite:", "DebugSession.halt_on_write"),
    ("Object-Centric Debugging", "dbg haltOnWrite: obj field: iv", "dbg", "haltOnWrite:field:", "DebugSession.halt_on_write"),
    ("Breakpoints", "dbg setBreakpoint", "dbg", "setBreakpoint", "DebugSession.set_breakpoint"),
    ("Breakpoints", "dbg setBreakpointOn: T", "dbg", "setBreakpointOn:", "DebugSession.set_breakpoint"),
    ("Breakpoints", "bp whenHit: aBlock", "bp", "whenHit:", "Breakpoint.when_hit"),
    ("Breakpoints", "bp remove", "bp", "remove", "Breakpoint.remove"),
    ("Breakpoints", "bp once", "bp", "once", "Breakpoint.set_once"),
    ("Stack Access Helpers", "dbg receiver", "dbg", "receiver", "DebugSession.receiver"),
    ("Stack Access Helpers", "dbg selector", "dbg", "selector", "DebugSession.selector"),
    ("Stack Access Helpers", "dbg method", "dbg", "method", "DebugSession.method"),
    ("Stack Access Helpers", "dbg arguments", "dbg", "arguments", "DebugSession.arguments"),
    ("Stack Access Helpers", "dbg temporaries", "dbg", "temporaries", "DebugSession.temporaries"),
    ("Stack Access Helpers", "dbg messageReceiver", "dbg", "messageReceiver", "DebugSession.message_receiver"),
    ("Stack Access Helpers", "dbg messageSelector", "dbg", "messageSelector", "DebugSession.message_selector"),
    ("Stack Access Helpers", "dbg messageArguments", "dbg", "messageArguments", "DebugSession.message_arguments"),
    ("Stack Access Helpers", "dbg assignmentValue", "dbg", "assignmentValue", "DebugSession.assignment_value"),
    ("Stack Access Helpers", "dbg assignmentVariableName", "dbg", "assignmentVariableName", "DebugSession.assignment_variable_name"),
)

_RECEIVER_PROXIES = {
    "dbg": DebuggerView,
    "ctx": ContextProxy,
    "ast": NodeProxy,
    "bp": BreakpointProxy,
}

_HOST_SCOPES = {
    "DebugSession": DebugSession,
    "Context": Context,
    "Breakpoint": Breakpoint,
    "Watch": Watch,
}


def conformance_gaps() -> list:
    """Check every API row for a host operation and a script-reachable
    selector; answer the list of gaps (empty means fully conformant)."""
    from . import nodes as nodes_module
    gaps = []
    for section, notation, receiver, selector, host in API_TABLE:
        scope_name, _, attr = host.partition(".")
        if scope_name == "nodes":
            if not hasattr(nodes_module, attr):
                gaps.append(f"{notation}: missing host operation {host}")
        else:
            scope = _HOST_SCOPES[scope_name]
            if not (attr in scope.__dict__ or hasattr(scope, attr)):
                gaps.append(f"{notation}: missing host operation {host}")
        proxy = _RECEIVER_PROXIES[receiver]
        if selector == "is*Node":
            missing = [s for s in _KIND_TESTS.values() if s not in proxy.SELECTORS]
            if missing:
                gaps.append(f"{notation}: missing script selectors {missing}")
        elif selector not in proxy.SELECTORS:
            gaps.append(f"{notation}: missing script selector {selector}")
    return gaps


def conformance_report() -> list:
    """One row per API operation with its host and script bindings."""
    gaps = set()
    for gap in conformance_gaps():
        gaps.add(gap.split(":")[0])
    return [{"section": section, "operation": notation, "receiver": receiver,
             "scriptSelector": selector, "hostOperation": host,
             "ok": notation not in gaps}
            for section, notation, receiver, selector, host in API_TABLE]
