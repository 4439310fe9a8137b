"""Command-line entry points: run programs, debug them under a script,
run the scenario library, dump compiled bytecode, and start the wire
service. Exit status: 0 on success, 1 on guest failure (an unhandled
exception in the program or script, or a failing scenario), 2 on usage or
parse errors."""

from __future__ import annotations

import argparse
import json
import os
import sys
from pathlib import Path

from .compiler import compile_program, dump_bytecode
from .errors import CompileError, ParseError
from .scenarios import run_scenario, scenario_names
from .service import ServiceCore, make_server, serve_stdio
from .vm import RunStatus, run_program

DEFAULT_PORT = 8650
PORT_ENV_VAR = "LUMEN_SERVICE_PORT"
BUNDLED_UI_DIR = Path(__file__).parent / "ui"


def _read_source(path: str):
    try:
        return Path(path).read_text()
    except OSError as e:
        print(f"cannot read {path}: {e}", file=sys.stderr)
        return None


# Subcommands ----------------------------------------------------------------------

def _cmd_run(args) -> int:
    source = _read_source(args.file)
    if source is None:
        return 2
    try:
        execution = run_program(source, seed=args.seed)
    except (ParseError, CompileError) as e:
        print(f"{args.file}: {e}", file=sys.stderr)
        return 2
    sys.stdout.write(execution.output_text)
    sys.stdout.flush()
    if execution.status is RunStatus.FAILED:
        print(execution.failure_description(), file=sys.stderr)
        return 1
    return 0


def _cmd_debug(args) -> int:
    source = _read_source(args.file)
    if source is None:
        return 2
    core = ServiceCore()
    response = core.handle({"id": 1, "op": "createSession",
                            "args": {"source": source,
                                     "seed": args.seed}})[-1]
    if "error" in response:
        print(response["error"]["message"], file=sys.stderr)
        return 2
    session = response["result"]["session"]
    snapshot = response["result"]["snapshot"]
    if args.script is not None:
        script = _read_source(args.script)
        if script is None:
            return 2
        response = core.handle({"id": 2, "session": session,
                                "op": "evalScript",
                                "args": {"script": script}})[-1]
        if "error" in response:
            error = response["error"]
            print(error["message"], file=sys.stderr)
            return 1 if error["code"] == "scriptError" else 2
        snapshot = response["result"]["snapshot"]
    print(json.dumps(snapshot, indent=2))
    return 0


def _cmd_scenarios(args) -> int:
    known = scenario_names()
    if args.name is not None and args.name not in known:
        print(f"unknown scenario {args.name!r}; known: {', '.join(known)}",
              file=sys.stderr)
        return 2
    names = [args.name] if args.name is not None else known
    reports = [run_scenario(name, via=args.via) for name in names]
    if args.json:
        print(json.dumps([r.to_json() for r in reports], indent=2))
    else:
        for report in reports:
            verdict = "PASS" if report.passed else "FAIL"
            print(f"{verdict} {report.name}  halts={len(report.halts)}")
            for failure in report.failures:
                print(f"  - {failure}")
    return 0 if all(r.passed for r in reports) else 1


def _cmd_serve(args) -> int:
    if args.stdio:
        serve_stdio()
        return 0
    port = args.port
    if port is None:
        setting = os.environ.get(PORT_ENV_VAR, str(DEFAULT_PORT))
        try:
            port = int(setting)
        except ValueError:
            print(f"{PORT_ENV_VAR} must be an integer, not {setting!r}",
                  file=sys.stderr)
            return 2
    server = make_server(args.host, port, ui_dir=args.ui)
    host, bound_port = server.server_address[:2]
    print(f"listening on {host}:{bound_port}", flush=True)
    try:
        server.serve_forever()
    except KeyboardInterrupt:
        pass
    finally:
        server.server_close()
    return 0


def _cmd_dump_bytecode(args) -> int:
    source = _read_source(args.file)
    if source is None:
        return 2
    try:
        compiled = compile_program(source)
    except (ParseError, CompileError) as e:
        print(f"{args.file}: {e}", file=sys.stderr)
        return 2
    sys.stdout.write(dump_bytecode(compiled))
    return 0


# Parser ---------------------------------------------------------------------------

def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="lumen",
        description="Lumen programs and their scriptable debugger.")
    sub = parser.add_subparsers(dest="command", required=True)

    run_p = sub.add_parser("run", help="execute a program, print its output")
    run_p.add_argument("file", help="program file")
    run_p.add_argument("--seed", type=int, default=1,
                       help="seed for the guest Random builtin")
    run_p.set_defaults(func=_cmd_run)

    debug_p = sub.add_parser(
        "debug", help="run a debugging script against a program and print "
                      "the final session snapshot as JSON")
    debug_p.add_argument("file", help="program file")
    debug_p.add_argument("--script", help="debugging script file; "
                         "omit to print the initial snapshot")
    debug_p.add_argument("--seed", type=int, default=1)
    debug_p.set_defaults(func=_cmd_debug)

    scen_p = sub.add_parser("scenarios",
                            help="run the scenario library and report")
    scen_p.add_argument("name", nargs="?",
                        help="a single scenario; omit to run all")
    scen_p.add_argument("--via", choices=("script", "host"),
                        default="script",
                        help="drive with the guest script or the host API")
    scen_p.add_argument("--json", action="store_true",
                        help="print full reports as JSON")
    scen_p.set_defaults(func=_cmd_scenarios)

    serve_p = sub.add_parser("serve", help="start the debugger service")
    serve_p.add_argument("--host", default="127.0.0.1")
    serve_p.add_argument("--port", type=int, default=None,
                         help=f"TCP port (default ${PORT_ENV_VAR} "
                              f"or {DEFAULT_PORT}; 0 picks a free port)")
    serve_p.add_argument("--ui", nargs="?", const=str(BUNDLED_UI_DIR),
                         default=None, metavar="DIR",
                         help="also serve the web console (from DIR, or "
                              "the bundled build)")
    serve_p.add_argument("--stdio", action="store_true",
                         help="speak the protocol on stdin/stdout instead")
    serve_p.set_defaults(func=_cmd_serve)

    dump_p = sub.add_parser("dump-bytecode",
                            help="print compiled instructions per method")
    dump_p.add_argument("file", help="program file")
    dump_p.set_defaults(func=_cmd_dump_bytecode)

    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    return args.func(args)


if __name__ == "__main__":
    sys.exit(main())
