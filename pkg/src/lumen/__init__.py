"""Lumen: a small message-passing guest language with a scriptable online debugger.

The package splits into four layers:

- language: `lexer`, `parser`, `nodes`, `compiler`, `bytecode`, `vm` compile
  and run Lumen source on a stepping bytecode interpreter;
- debugger: `debugger` wraps a suspended execution in a `DebugSession` with
  stepping, breakpoints, watches and stack reification;
- scripting: `scripting` exposes the whole session API to debugger scripts
  written in Lumen itself, plus the scripted `scenarios` library;
- service: `service` speaks a JSON wire protocol over stdio, TCP and
  WebSocket, and `cli` packages everything as a command-line tool.
"""

from .compiler import CompiledProgram, compile_program, dump_bytecode
from .debugger import (Breakpoint, Context, DebugSession, HitDescriptor,
                       Watch, debug)
from .errors import (CompileError, DebuggerError, ExecutionAlreadyFinished,
                     LumenError, NotSkippable, ParseError, ScriptFailed,
                     StepBudgetExceeded, UnhandledExceptionDuringStepOver)
from .parser import node_at, parse_program
from .scenarios import run_scenario, scenario_names
from .scripting import eval_script, run_script, script_bindings
from .serialize import canonical_form, preview
from .service import ServiceCore, make_server, serve_stdio
from .vm import Execution, RunStatus, StepOutcome, run_program

__version__ = "0.1.0"

__all__ = [
    "Breakpoint", "CompileError", "CompiledProgram", "Context",
    "DebugSession", "DebuggerError", "Execution", "ExecutionAlreadyFinished",
    "HitDescriptor", "LumenError", "NotSkippable", "ParseError", "RunStatus",
    "ScriptFailed", "ServiceCore", "StepBudgetExceeded", "StepOutcome",
    "UnhandledExceptionDuringStepOver", "Watch", "canonical_form",
    "compile_program", "debug", "dump_bytecode", "eval_script", "make_server",
    "node_at", "parse_program", "preview", "run_program", "run_scenario",
    "run_script", "scenario_names", "script_bindings", "serve_stdio",
]
