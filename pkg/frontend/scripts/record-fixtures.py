#!/usr/bin/env python3
"""Record golden wire transcripts for the console tests.

Each fixture drives a real in-process service through the exact request
sequence the console will send, and saves every request, event, and response
verbatim. The TypeScript FakeTransport replays these files and refuses any
request that deviates, so the console tests run against the true protocol
without a live service.
"""

import json
import sys
from pathlib import Path

sys.path.insert(0, str(Path(__file__).resolve().parent.parent.parent / "src"))

from lumen.service import ServiceCore, hello_message  # noqa: E402

FIXTURES = Path(__file__).resolve().parent.parent / "test" / "fixtures"

GREETER = """class Greeter {
  method greet: name { ^'hi, ' , name }
}
Greeter new greet: 'world'"""

POINT = """class Point {
  fields x y.
  method setX: ax y: ay { x := ax. y := ay }
}
| p |
p := Point new.
p setX: 3 y: 4.
p"""


class Recorder:
    def __init__(self):
        self.core = ServiceCore()
        self.exchanges = []
        self.next_id = 1
        self.session = None

    def call(self, op, **args):
        request = {"id": self.next_id, "op": op}
        self.next_id += 1
        if self.session is not None and op != "createSession":
            request["session"] = self.session
        if args:
            request["args"] = args
        *events, response = self.core.handle(request)
        self.exchanges.append(
            {"request": request, "events": events, "response": response})
        if op == "createSession" and "result" in response:
            self.session = response["result"]["session"]
        return response

    def transcript(self):
        return {"hello": hello_message(), "exchanges": self.exchanges}


def stepping():
    # connect with "1 + 2", then single-step to the end
    r = Recorder()
    r.call("createSession", source="1 + 2")
    for _ in range(4):
        r.call("step")
    return r.transcript()


def breakpoints():
    # toggle a breakpoint on the "+" send: set, then remove at the same offset
    r = Recorder()
    r.call("createSession", source="1 + 2")
    located = r.call("nodeAt", offset=2)
    node_id = located["result"]["node"]["id"]
    planted = r.call("setBreakpoint", nodeId=node_id)
    r.call("snapshot")
    r.call("nodeAt", offset=2)
    r.call("configureBreakpoint",
           bpId=planted["result"]["breakpoint"]["id"], remove=True)
    r.call("snapshot")
    return r.transcript()


def method_breakpoint():
    # plant a method breakpoint from the script box, then continue into it:
    # callee frame on top, hit event in the log
    r = Recorder()
    r.call("createSession", source=GREETER)
    r.call("evalScript",
           script="dbg setBreakpointOn: (Greeter methodNamed: #greet:)")
    r.call("continue")
    return r.transcript()


def script():
    # a script halts at the first send; its value previews as a symbol
    r = Recorder()
    r.call("createSession", source=GREETER)
    r.call("evalScript",
           script="dbg stepUntil: [ dbg currentNode isMessage ]. "
                  "dbg messageSelector")
    r.call("evalScript", script="nil flub")
    return r.transcript()


def empty():
    # the empty program is born finished
    r = Recorder()
    r.call("createSession", source="")
    return r.transcript()


def output():
    # transcript writes surface as output events before the response
    r = Recorder()
    r.call("createSession", source="Transcript show: 'hey!'. 3")
    r.call("continue")
    return r.transcript()


def inspect():
    # run to the end, then expand the result object lazily
    r = Recorder()
    r.call("createSession", source=POINT)
    r.call("evalScript", script="dbg stepUntil: [ dbg isExecutionFinished ]")
    snapshot = r.exchanges[-1]["response"]["result"]["snapshot"]
    r.call("inspect", objectRef=snapshot["result"]["ref"])
    return r.transcript()


def main():
    FIXTURES.mkdir(parents=True, exist_ok=True)
    transcripts = {
        "stepping": stepping(),
        "breakpoints": breakpoints(),
        "method-breakpoint": method_breakpoint(),
        "script": script(),
        "empty": empty(),
        "output": output(),
        "inspect": inspect(),
    }
    for name, transcript in transcripts.items():
        path = FIXTURES / f"{name}.json"
        path.write_text(json.dumps(transcript, indent=2) + "\n")
        print(f"wrote {path.relative_to(Path.cwd())}"
              if path.is_relative_to(Path.cwd()) else f"wrote {path}")


if __name__ == "__main__":
    main()
