"""JSON wire service for debug sessions.

Requests are JSON objects {id, session?, op, args?}; responses echo the id
with either a result or an error {code, message}. Server-initiated event
messages (output text, hits, finished) always precede the response to the
request that caused them. Three transports share the protocol: newline-
delimited JSON over TCP, the same over stdio, and WebSocket frames for
browsers — the TCP listener sniffs the first line and answers plain HTTP
(static console files) or upgrades to WebSocket when asked, so one port
serves everything.

Values crossing the wire are previews (bounded strings) plus opaque object
references "obj:<n>" that stay valid for the session's lifetime and feed
inspect/haltOnCall/haltOnWrite/skip.
"""

from __future__ import annotations

import base64
import hashlib
import json
import socket
import socketserver
import struct
import sys
import threading
from pathlib import Path

from .debugger import DebugSession, HitDescriptor, debug
from .errors import (CompileError, DebuggerError, ExecutionAlreadyFinished,
                     LumenError, NotAtAssignment, NotAtMessageSend,
                     OffsetOutOfRange, ParseError, ScriptFailed)
from .parser import node_at
from .scripting import run_script
from .serialize import preview
from .values import GuestObject, variant_of
from .vm import RunStatus

WIRE_VERSION = 1
PREVIEW_LIMIT = 120
WS_GUID = "258EAFA5-E914-47DA-95CA-C5AB0DC85B11"


def hello_message() -> dict:
    return {"v": WIRE_VERSION, "service": "lumen-debugger"}


class WireError(Exception):
    """An error that maps directly to a wire error code."""

    def __init__(self, code: str, message: str):
        super().__init__(message)
        self.code = code


def _error_code(exc: Exception) -> str:
    if isinstance(exc, ExecutionAlreadyFinished):
        return "sessionFinished"
    if isinstance(exc, (NotAtMessageSend, NotAtAssignment)):
        return "notAtMessageSend"
    if isinstance(exc, ScriptFailed):
        return "scriptError"
    return "badArgs"


def _hit_json(h: HitDescriptor) -> dict:
    return {"kind": h.kind, "breakpointId": h.breakpoint_id,
            "watchId": h.watch_id,
            "nodeId": h.node.id if h.node is not None else None,
            "frameId": h.frame_id, "removed": h.removed}


_SCALAR_VARIANTS = ("nil", "boolean", "integer", "string", "symbol")


class SessionRecord:
    """One wire-visible session: the debug session plus its handle table,
    stored whenHit scripts, and event bookkeeping."""

    def __init__(self, sid: str, session: DebugSession):
        self.sid = sid
        self.session = session
        self.handles: dict = {}          # "obj:<n>" -> value
        self.handle_ids: dict = {}       # id(value) -> ref (keeps value alive)
        self.next_handle = 1
        self.hits_seen = 0
        self.output_seen = 0
        self.pending_output: list = []   # text produced by whenHit scripts

    # -- object references

    def ref_for(self, value):
        if variant_of(value) in _SCALAR_VARIANTS:
            return None
        ref = self.handle_ids.get(id(value))
        if ref is None:
            ref = f"obj:{self.next_handle}"
            self.next_handle += 1
            self.handles[ref] = value
            self.handle_ids[id(value)] = ref
        return ref

    def resolve_ref(self, ref):
        if not isinstance(ref, str) or ref not in self.handles:
            raise WireError("badArgs", f"unknown object reference {ref!r}")
        return self.handles[ref]

    def preview_classes(self, value) -> dict:
        # Dictionary-vs-sequence detection is by class identity; values made
        # by a script execution carry that execution's classes, so resolve
        # Dictionary from the value's own lineage instead of assuming the
        # session's table.
        if isinstance(value, GuestObject) and value.store is not None:
            for c in value.cls.lineage():
                if c.name == "Dictionary":
                    return {"Dictionary": c}
            return {}
        return self.session.execution.classes

    def preview(self, value) -> str:
        return preview(value, self.preview_classes(value), PREVIEW_LIMIT)

    def cell(self, value) -> dict:
        return {"preview": self.preview(value), "ref": self.ref_for(value)}


class ServiceCore:
    """Transport-independent request handler. One core per connection;
    sessions are owned by their connection and die with it."""

    def __init__(self):
        self.records: dict = {}
        self._next_session = 1

    # -- entry point

    def handle(self, request) -> list:
        """Process one request; answer the messages to send, in order:
        events first, then exactly one response."""
        rid = request.get("id") if isinstance(request, dict) else None
        record = None
        try:
            if not isinstance(request, dict):
                raise WireError("badArgs", "request must be a JSON object")
            op = request.get("op")
            handler = self._OPS.get(op)
            if handler is None:
                raise WireError("unknownOp", f"unknown op {op!r}")
            if op not in ("createSession", "listSessions"):
                record = self._resolve_session(request)
            result = handler(self, record, request.get("args") or {})
            if record is None and "session" in result:
                record = self.records.get(result["session"])
            events = self._drain_events(record)
            return events + [{"id": rid, "result": result}]
        except WireError as e:
            return self._drain_events(record) + [
                {"id": rid, "error": {"code": e.code, "message": str(e)}}]
        except (DebuggerError, LumenError) as e:
            return self._drain_events(record) + [
                {"id": rid, "error": {"code": _error_code(e),
                                      "message": str(e)}}]

    def _resolve_session(self, request) -> SessionRecord:
        sid = request.get("session")
        record = self.records.get(sid)
        if record is None:
            raise WireError("unknownSession", f"unknown session {sid!r}")
        return record

    def _drain_events(self, record) -> list:
        if record is None:
            return []
        events = []
        session = record.session
        output = session.output_text
        if len(output) > record.output_seen:
            events.append({"event": "output", "session": record.sid,
                           "payload": {"text": output[record.output_seen:]}})
            record.output_seen = len(output)
        for text in record.pending_output:
            events.append({"event": "output", "session": record.sid,
                           "payload": {"text": text, "origin": "whenHit"}})
        record.pending_output = []
        for h in session.hits[record.hits_seen:]:
            kind = ("finished" if h.kind == HitDescriptor.EXECUTION_FINISHED
                    else "hit")
            events.append({"event": kind, "session": record.sid,
                           "payload": _hit_json(h)})
        record.hits_seen = len(session.hits)
        return events

    # -- snapshots

    def _node_json(self, record, node) -> dict:
        compiled = record.session.compiled
        source = (compiled.source if node.id >= 0
                  else compiled.prelude.source)
        excerpt = source[node.span.start:node.span.end]
        if len(excerpt) > PREVIEW_LIMIT:
            excerpt = excerpt[:PREVIEW_LIMIT - 1] + "…"
        return {"id": node.id, "kind": node.kind.value,
                "span": {"start": node.span.start, "end": node.span.end},
                "sourceExcerpt": excerpt}

    def _snapshot(self, record) -> dict:
        session = record.session
        execution = session.execution
        finished = session.is_execution_finished()
        current = None
        stack = []
        if execution.top is not None:
            current = self._node_json(record, session.current_node())
            for ctx in session.stack():
                method = ctx.compiled_method
                stack.append({
                    "frameId": ctx.frame_id,
                    "className": method.owner_name or None,
                    "selector": method.selector,
                    "pc": ctx.pc,
                    "nodeId": ctx.node().id,
                    "receiverPreview": record.preview(ctx.receiver),
                    "receiverRef": record.ref_for(ctx.receiver),
                    "args": [record.cell(a) for a in ctx.arguments],
                    "temps": {name: record.cell(v)
                              for name, v in ctx.temporaries.items()},
                })
        staged = None
        if execution.status is RunStatus.RUNNING:
            try:
                staged = {
                    "selector": session.message_selector().name,
                    "receiver": record.cell(session.message_receiver()),
                    "args": [record.cell(a)
                             for a in session.message_arguments()],
                }
            except DebuggerError:
                staged = None        # not suspended at a ready message send
        failure = session.failure_description()
        return {
            "finished": finished,
            "status": execution.status.value,
            "failureReason": failure or None,
            "currentNode": current,
            "stagedMessage": staged,
            "stack": stack,
            "output": session.output_text,
            "result": (record.cell(session.result)
                       if execution.status is RunStatus.FINISHED else None),
            "breakpoints": [bp.describe() for _, bp in
                            sorted(session.breakpoints.items())],
            "watches": [w.describe() for _, w in
                        sorted(session.watches.items())],
        }

    # -- argument helpers

    @staticmethod
    def _arg(args, name, kinds, required=True):
        value = args.get(name)
        if value is None and not required:
            return None
        if not isinstance(value, kinds) or isinstance(value, bool) and kinds is int:
            raise WireError("badArgs", f"argument {name!r} is missing or "
                            f"has the wrong type")
        return value

    def _script_arg(self, args, name="script") -> str:
        return self._arg(args, name, str)

    def _replacement_value(self, record, args):
        if "valueRef" in args:
            return record.resolve_ref(args["valueRef"])
        value = args.get("value")
        if value is None or isinstance(value, (bool, int, str)):
            return value
        raise WireError("badArgs", "value must be null, a boolean, an "
                        "integer, a string, or a valueRef")

    def _run_wire_script(self, record, script: str):
        """Run a script against the session, translating compile problems
        and failures to the scriptError code."""
        try:
            return run_script(record.session, script)
        except (ParseError, CompileError) as e:
            raise WireError("scriptError", f"script does not compile: {e}")

    def _when_hit_action(self, record, script: str):
        def action(_session):
            execution = self._run_wire_script(record, script)
            if execution.output_text:
                record.pending_output.append(execution.output_text)
        return action

    # -- operations

    def _op_create_session(self, _record, args) -> dict:
        source = self._arg(args, "source", str)
        seed = args.get("seed", 1)
        if not isinstance(seed, int) or isinstance(seed, bool):
            raise WireError("badArgs", "seed must be an integer")
        try:
            session = debug(source, seed=seed)
        except (ParseError, CompileError) as e:
            raise WireError("badArgs", f"source does not compile: {e}")
        sid = f"s{self._next_session}"
        self._next_session += 1
        record = SessionRecord(sid, session)
        self.records[sid] = record
        return {"session": sid, "snapshot": self._snapshot(record)}

    def _op_step(self, record, _args) -> dict:
        outcome = record.session.step()
        return {"outcome": outcome.value, "snapshot": self._snapshot(record)}

    def _op_step_over(self, record, _args) -> dict:
        outcome = record.session.step_over()
        return {"outcome": outcome.value, "snapshot": self._snapshot(record)}

    def _op_continue(self, record, _args) -> dict:
        hit = record.session.continue_()
        return {"hit": _hit_json(hit), "snapshot": self._snapshot(record)}

    def _op_skip(self, record, args) -> dict:
        record.session.skip_with(self._replacement_value(record, args))
        return {"snapshot": self._snapshot(record)}

    def _op_step_until_script(self, record, args) -> dict:
        script = self._script_arg(args)
        self._run_wire_script(record, f"dbg stepUntil: [ {script} ]")
        return {"snapshot": self._snapshot(record)}

    def _op_eval_script(self, record, args) -> dict:
        script = self._script_arg(args)
        execution = self._run_wire_script(record, script)
        return {"value": record.cell(execution.result),
                "scriptOutput": execution.output_text,
                "snapshot": self._snapshot(record)}

    def _op_snapshot(self, record, _args) -> dict:
        return {"snapshot": self._snapshot(record)}

    def _op_set_breakpoint(self, record, args) -> dict:
        session = record.session
        if "nodeId" in args:
            node_id = self._arg(args, "nodeId", int)
            try:
                target = session.compiled.node_by_id(node_id)
            except KeyError:
                raise WireError("badArgs", f"no node with id {node_id}")
            bp = session.set_breakpoint(target)
        elif "method" in args:
            spec = self._arg(args, "method", dict)
            class_name = self._arg(spec, "class", str)
            selector = self._arg(spec, "selector", str)
            method = session.compiled.find_method(class_name, selector)
            if method is None:
                raise WireError("badArgs",
                                f"no method {class_name}>>{selector}")
            bp = session.set_breakpoint(method)
        else:
            bp = session.set_breakpoint()  # current node
        if args.get("once"):
            bp.set_once()
        if "whenHitScript" in args:
            bp.when_hit(self._when_hit_action(
                record, self._script_arg(args, "whenHitScript")))
        return {"breakpoint": bp.describe()}

    def _find_trigger(self, record, args):
        session = record.session
        if "bpId" in args:
            trigger = session.breakpoints.get(self._arg(args, "bpId", int))
        elif "watchId" in args:
            trigger = session.watches.get(self._arg(args, "watchId", int))
        else:
            raise WireError("badArgs", "need bpId or watchId")
        if trigger is None:
            raise WireError("badArgs", "no such breakpoint or watch")
        return trigger

    def _op_configure_breakpoint(self, record, args) -> dict:
        trigger = self._find_trigger(record, args)
        if args.get("remove"):
            trigger.remove()
            return {"removed": True}
        if "once" in args:
            trigger.set_once(bool(args["once"]))
        if "enabled" in args:
            trigger.enabled = bool(args["enabled"])
        if "whenHitScript" in args:
            script = args["whenHitScript"]
            if script is None:
                trigger.when_hit(None)
            else:
                trigger.when_hit(self._when_hit_action(
                    record, self._script_arg(args, "whenHitScript")))
        key = "breakpoint" if "bpId" in args else "watch"
        return {key: trigger.describe()}

    def _op_halt_on_call(self, record, args) -> dict:
        target = record.resolve_ref(self._arg(args, "objectRef", str))
        selector = self._arg(args, "selector", str, required=False)
        watch = record.session.halt_on_call(target, selector)
        if "whenHitScript" in args:
            watch.when_hit(self._when_hit_action(
                record, self._script_arg(args, "whenHitScript")))
        return {"watch": watch.describe()}

    def _op_halt_on_write(self, record, args) -> dict:
        target = record.resolve_ref(self._arg(args, "objectRef", str))
        field = self._arg(args, "field", str, required=False)
        watch = record.session.halt_on_write(target, field)
        if "whenHitScript" in args:
            watch.when_hit(self._when_hit_action(
                record, self._script_arg(args, "whenHitScript")))
        return {"watch": watch.describe()}

    def _op_inspect(self, record, args) -> dict:
        value = record.resolve_ref(self._arg(args, "objectRef", str))
        result = {"preview": record.preview(value),
                  "variant": variant_of(value),
                  "className": record.session.execution.class_of(value).name}
        if isinstance(value, GuestObject):
            result["fields"] = [
                {"name": name, **record.cell(value.fields[i])}
                for i, name in enumerate(value.cls.all_fields)]
            if value.store is not None:
                is_dictionary = any(c.name == "Dictionary"
                                    for c in value.cls.lineage())
                if is_dictionary:
                    result["entries"] = [{"key": record.cell(k),
                                          "value": record.cell(v)}
                                         for k, v in value.store]
                else:
                    result["items"] = [record.cell(v) for v in value.store]
        return result

    def _op_node_at(self, record, args) -> dict:
        offset = self._arg(args, "offset", int)
        try:
            node = node_at(record.session.compiled.program, offset)
        except OffsetOutOfRange as e:
            raise WireError("badArgs", str(e))
        return {"node": self._node_json(record, node)}

    def _op_list_sessions(self, _record, _args) -> dict:
        return {"sessions": [
            {"id": sid, "finished": rec.session.is_execution_finished()}
            for sid, rec in sorted(self.records.items())]}

    def _op_dispose_session(self, record, _args) -> dict:
        self.records.pop(record.sid, None)
        return {"disposed": record.sid}

    _OPS = {
        "createSession": _op_create_session,
        "step": _op_step,
        "stepOver": _op_step_over,
        "continue": _op_continue,
        "skip": _op_skip,
        "stepUntilScript": _op_step_until_script,
        "evalScript": _op_eval_script,
        "snapshot": _op_snapshot,
        "setBreakpoint": _op_set_breakpoint,
        "configureBreakpoint": _op_configure_breakpoint,
        "haltOnCall": _op_halt_on_call,
        "haltOnWrite": _op_halt_on_write,
        "inspect": _op_inspect,
        "nodeAt": _op_node_at,
        "listSessions": _op_list_sessions,
        "disposeSession": _op_dispose_session,
    }


# Transports ------------------------------------------------------------------------

def serve_stdio(stdin=None, stdout=None) -> None:
    """NDJSON over stdio: one request per line in, events + response out."""
    stdin = stdin if stdin is not None else sys.stdin
    stdout = stdout if stdout is not None else sys.stdout
    core = ServiceCore()

    def emit(message):
        stdout.write(json.dumps(message) + "\n")
        stdout.flush()

    emit(hello_message())
    for line in stdin:
        line = line.strip()
        if not line:
            continue
        try:
            request = json.loads(line)
        except ValueError:
            emit({"id": None,
                  "error": {"code": "badArgs", "message": "malformed JSON"}})
            continue
        for message in core.handle(request):
            emit(message)


class _Connection(socketserver.StreamRequestHandler):
    """One TCP client: sniffs HTTP (static files or WebSocket upgrade) vs
    plain newline-delimited JSON, by peeking at the first byte. A client
    that connects and stays silent is greeted as NDJSON, so waiting for
    the hello before sending anything cannot deadlock."""

    SNIFF_TIMEOUT = 0.25

    def handle(self):
        first = self._peek_first_byte()
        if first == b"":
            return                       # closed without sending
        if first in (b"G", b"H", b"P", b"O"):   # GET/HEAD/POST/OPTIONS
            request_line = self.rfile.readline()
            if request_line:
                self._handle_http(request_line)
        else:
            self._handle_ndjson()

    def _peek_first_byte(self) -> bytes:
        self.connection.settimeout(self.SNIFF_TIMEOUT)
        try:
            return self.connection.recv(1, socket.MSG_PEEK)
        except socket.timeout:
            return b"{"                  # silent client: greet as NDJSON
        except OSError:
            return b""
        finally:
            self.connection.settimeout(None)

    # -- NDJSON

    def _send_json(self, message):
        self.wfile.write(json.dumps(message).encode() + b"\n")
        self.wfile.flush()

    def _handle_ndjson(self):
        core = ServiceCore()
        self._send_json(hello_message())
        while True:
            line = self.rfile.readline()
            if not line:
                return
            text = line.strip().decode("utf-8", "replace")
            if not text:
                continue
            try:
                request = json.loads(text)
            except ValueError:
                self._send_json({"id": None, "error": {
                    "code": "badArgs", "message": "malformed JSON"}})
                continue
            for message in core.handle(request):
                self._send_json(message)

    # -- HTTP + WebSocket

    def _read_headers(self) -> dict:
        headers = {}
        while True:
            line = self.rfile.readline()
            if not line or line in (b"\r\n", b"\n"):
                return headers
            if b":" in line:
                key, _, value = line.partition(b":")
                headers[key.strip().lower().decode()] = value.strip().decode()

    def _http_response(self, status: str, body: bytes,
                       content_type: str = "text/plain; charset=utf-8",
                       extra: str = ""):
        head = (f"HTTP/1.1 {status}\r\nContent-Type: {content_type}\r\n"
                f"Content-Length: {len(body)}\r\nConnection: close\r\n"
                f"{extra}\r\n")
        self.wfile.write(head.encode() + body)
        self.wfile.flush()

    def _handle_http(self, request_line: bytes):
        try:
            method, path, _ = request_line.decode().split(" ", 2)
        except ValueError:
            return
        headers = self._read_headers()
        if headers.get("upgrade", "").lower() == "websocket":
            self._handle_websocket(headers)
            return
        if method not in ("GET", "HEAD"):
            self._http_response("405 Method Not Allowed", b"method not allowed")
            return
        body, content_type = self._static_file(path.split("?", 1)[0])
        if body is None:
            self._http_response("404 Not Found", b"not found")
        else:
            self._http_response("200 OK", b"" if method == "HEAD" else body,
                                content_type)

    _FALLBACK_PAGE = (b"<!doctype html><meta charset='utf-8'>"
                      b"<title>lumen debugger</title>"
                      b"<p>The web console bundle is not built. The wire "
                      b"service itself is running: connect over WebSocket "
                      b"or newline-delimited JSON on this port.</p>")

    _CONTENT_TYPES = {".html": "text/html; charset=utf-8",
                      ".js": "text/javascript; charset=utf-8",
                      ".css": "text/css; charset=utf-8",
                      ".json": "application/json",
                      ".svg": "image/svg+xml",
                      ".map": "application/json"}

    def _static_file(self, path: str):
        ui_dir = getattr(self.server, "ui_dir", None)
        if path in ("/", "/index.html"):
            if ui_dir is not None:
                index = Path(ui_dir) / "index.html"
                if index.is_file():
                    return index.read_bytes(), self._CONTENT_TYPES[".html"]
            return self._FALLBACK_PAGE, self._CONTENT_TYPES[".html"]
        if ui_dir is None:
            return None, None
        base = Path(ui_dir).resolve()
        target = (base / path.lstrip("/")).resolve()
        if not str(target).startswith(str(base)) or not target.is_file():
            return None, None
        content_type = self._CONTENT_TYPES.get(target.suffix,
                                               "application/octet-stream")
        return target.read_bytes(), content_type

    # RFC 6455, server side, text frames only

    def _handle_websocket(self, headers: dict):
        key = headers.get("sec-websocket-key")
        if key is None:
            self._http_response("400 Bad Request", b"missing websocket key")
            return
        accept = base64.b64encode(
            hashlib.sha1((key + WS_GUID).encode()).digest()).decode()
        self.wfile.write(
            (f"HTTP/1.1 101 Switching Protocols\r\nUpgrade: websocket\r\n"
             f"Connection: Upgrade\r\nSec-WebSocket-Accept: {accept}\r\n"
             f"\r\n").encode())
        self.wfile.flush()
        core = ServiceCore()
        self._ws_send(json.dumps(hello_message()))
        while True:
            message = self._ws_receive()
            if message is None:
                return
            try:
                request = json.loads(message)
            except ValueError:
                self._ws_send(json.dumps({"id": None, "error": {
                    "code": "badArgs", "message": "malformed JSON"}}))
                continue
            for reply in core.handle(request):
                self._ws_send(json.dumps(reply))

    def _read_exactly(self, n: int) -> bytes:
        data = b""
        while len(data) < n:
            chunk = self.rfile.read(n - len(data))
            if not chunk:
                raise ConnectionError("websocket peer closed mid-frame")
            data += chunk
        return data

    def _ws_receive(self):
        """One complete text message, or None when the peer closes."""
        buffer = b""
        while True:
            try:
                header = self._read_exactly(2)
            except ConnectionError:
                return None
            fin = header[0] & 0x80
            opcode = header[0] & 0x0F
            masked = header[1] & 0x80
            length = header[1] & 0x7F
            if length == 126:
                length = struct.unpack(">H", self._read_exactly(2))[0]
            elif length == 127:
                length = struct.unpack(">Q", self._read_exactly(8))[0]
            mask = self._read_exactly(4) if masked else b""
            payload = self._read_exactly(length)
            if masked:
                payload = bytes(b ^ mask[i % 4] for i, b in enumerate(payload))
            if opcode == 0x8:                      # close
                self._ws_send_raw(0x8, payload[:2])
                return None
            if opcode == 0x9:                      # ping -> pong
                self._ws_send_raw(0xA, payload)
                continue
            if opcode == 0xA:                      # pong
                continue
            buffer += payload
            if fin:
                return buffer.decode("utf-8", "replace")

    def _ws_send_raw(self, opcode: int, payload: bytes):
        header = bytes([0x80 | opcode])
        n = len(payload)
        if n < 126:
            header += bytes([n])
        elif n < 1 << 16:
            header += bytes([126]) + struct.pack(">H", n)
        else:
            header += bytes([127]) + struct.pack(">Q", n)
        self.wfile.write(header + payload)
        self.wfile.flush()

    def _ws_send(self, text: str):
        self._ws_send_raw(0x1, text.encode())


class WireServer(socketserver.ThreadingTCPServer):
    allow_reuse_address = True
    daemon_threads = True

    def __init__(self, address, ui_dir=None):
        super().__init__(address, _Connection)
        self.ui_dir = ui_dir


def make_server(host: str = "127.0.0.1", port: int = 0,
                ui_dir=None) -> WireServer:
    """Create (but do not start) the combined NDJSON/HTTP/WebSocket server."""
    return WireServer((host, port), ui_dir=ui_dir)


def serve_forever(server: WireServer) -> None:
    server.serve_forever()


def start_in_thread(server: WireServer) -> threading.Thread:
    thread = threading.Thread(target=server.serve_forever, daemon=True)
    thread.start()
    return thread
