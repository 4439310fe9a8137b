"""Error types shared across the toolkit.

Frontend and compiler errors carry a source span so tools can point at the
offending text. Debugger errors are deliberately fine grained; the wire
service maps each one to a stable error code.
"""

from __future__ import annotations


class LumenError(Exception):
    """Base for every toolkit error."""


# Frontend / compiler ------------------------------------------------------

class ParseError(LumenError):
    def __init__(self, message: str, span=None):
        super().__init__(message)
        self.span = span


class CompileError(LumenError):
    def __init__(self, message: str, span=None):
        super().__init__(message)
        self.span = span


class OffsetOutOfRange(LumenError):
    pass


class PcOutOfRange(LumenError):
    pass


class NodeNotInMethod(LumenError):
    pass


# VM -----------------------------------------------------------------------

class VmFault(LumenError):
    """Internal invariant breach. Always a toolkit bug or stack-mutation misuse."""


class StepBudgetExceeded(LumenError):
    pass


class UnhandledGuestException(LumenError):
    """A guest exception escaped a host-driven evaluation (block or script)."""

    def __init__(self, message: str, exception_object=None):
        super().__init__(message)
        self.exception_object = exception_object


# Debug sessions -----------------------------------------------------------

class DebuggerError(LumenError):
    pass


class ExecutionAlreadyFinished(DebuggerError):
    pass


class NotSkippable(DebuggerError):
    pass


class NotAtMessageSend(DebuggerError):
    pass


class NotAtAssignment(DebuggerError):
    pass


class EmptyValueStack(DebuggerError):
    pass


class NotTopFrame(DebuggerError):
    pass


class DeadFrame(DebuggerError):
    pass


class NonWatchableValue(DebuggerError):
    pass


class UnknownTarget(DebuggerError):
    pass


class ReentrancyLimit(DebuggerError):
    pass


class UnhandledExceptionDuringStepOver(DebuggerError):
    pass


class UnknownScenario(LumenError):
    pass


class ScriptFailed(LumenError):
    """A debugging script signaled an exception it did not handle.

    Carries the rendered guest stack of the script execution.
    """

    def __init__(self, message: str, guest_stack: str = ""):
        super().__init__(message)
        self.guest_stack = guest_stack
