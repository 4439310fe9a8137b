/**
 * Console state and the controller that mutates it.
 *
 * The state object is the single source of truth: rendering is a pure
 * function of it, and every visible change traces back to a user action or
 * a logged server event. Snapshots carry a sequence number so only the
 * latest one can ever be rendered.
 */
import { WIRE_VERSION, isHitPayload, } from "./protocol.js";
export function initialState() {
    return {
        connection: "idle",
        banner: null,
        sessionId: null,
        source: "",
        snapshot: null,
        snapshotSeq: 0,
        markers: [],
        log: [],
        history: [],
        expanded: {},
        selectedFrame: 0,
        busy: false,
    };
}
function describeHit(payload) {
    const parts = [payload.kind];
    if (payload.breakpointId !== null)
        parts.push(`bp ${payload.breakpointId}`);
    if (payload.watchId !== null)
        parts.push(`watch ${payload.watchId}`);
    if (payload.nodeId !== null)
        parts.push(`node ${payload.nodeId}`);
    if (payload.removed)
        parts.push("removed");
    return parts.join(" ");
}
export class Console {
    constructor(transport, onChange = () => { }) {
        this.transport = transport;
        this.onChange = onChange;
        this.state = initialState();
    }
    changed() {
        this.onChange(this.state);
    }
    log(kind, text) {
        this.state.log.push({ kind, text });
    }
    /** Fold a round trip into the state: log events, adopt the snapshot. */
    apply(events, snapshot) {
        for (const event of events) {
            if (event.event === "output") {
                const payload = event.payload;
                const origin = payload.origin === "whenHit" ? "when-hit output" : "output";
                this.log("output", `${origin}: ${JSON.stringify(payload.text)}`);
            }
            else if (isHitPayload(event.payload)) {
                this.log(event.event === "finished" ? "finished" : "hit", describeHit(event.payload));
            }
        }
        if (snapshot) {
            this.state.snapshot = snapshot;
            this.state.snapshotSeq += 1;
            this.state.selectedFrame = 0;
            // markers follow the service's breakpoint table (a once breakpoint
            // that fired no longer exists there)
            const alive = new Set(snapshot.breakpoints.map((row) => row.id));
            this.state.markers = this.state.markers.filter((m) => alive.has(m.bpId));
        }
    }
    failed(error, context) {
        const detail = error ? `${error.code}: ${error.message}` : "no response";
        this.log("error", `${context} failed — ${detail}`);
    }
    /** Run one request while holding the busy flag; never throws wire errors. */
    async roundTrip(op, args) {
        this.state.busy = true;
        this.changed();
        try {
            return await this.transport.request(op, this.state.sessionId, args);
        }
        catch (error) {
            this.log("error", `${op} failed — ${error.message}`);
            return null;
        }
        finally {
            this.state.busy = false;
            this.changed();
        }
    }
    async connectAndCreate(sourceText) {
        this.state = initialState();
        this.state.connection = "connecting";
        this.changed();
        try {
            const hello = await this.transport.connect();
            if (hello.v !== WIRE_VERSION) {
                this.state.connection = "error";
                this.state.banner = `protocol version mismatch: service speaks v${hello.v}, console speaks v${WIRE_VERSION}`;
                this.changed();
                return;
            }
        }
        catch (error) {
            this.state.connection = "error";
            this.state.banner = `cannot reach the debug service — ${error.message}`;
            this.changed();
            return;
        }
        this.state.connection = "live";
        this.log("info", "connected");
        const trip = await this.roundTrip("createSession", { source: sourceText });
        if (!trip)
            return;
        if (trip.response.error) {
            this.state.banner = `session not created — ${trip.response.error.code}: ${trip.response.error.message}`;
            this.failed(trip.response.error, "createSession");
            this.changed();
            return;
        }
        const made = trip.response.result;
        this.state.sessionId = made.session;
        this.state.source = sourceText;
        this.log("info", `session ${made.session} opened`);
        this.apply(trip.events, made.snapshot);
        this.changed();
    }
    async userAction(action) {
        if (this.state.busy || this.state.sessionId === null)
            return;
        switch (action.kind) {
            case "step":
            case "stepOver":
            case "continue":
            case "skip":
                await this.steppingAction(action.kind);
                return;
            case "setBreakpointAt":
                await this.toggleBreakpointAt(action.offset);
                return;
            case "runScript":
                await this.runScript(action.text);
                return;
        }
    }
    async steppingAction(op) {
        this.log("action", op);
        const trip = await this.roundTrip(op);
        if (!trip)
            return;
        if (trip.response.error) {
            this.apply(trip.events);
            this.failed(trip.response.error, op);
            this.changed();
            return;
        }
        const result = trip.response.result;
        this.apply(trip.events, result.snapshot);
        this.changed();
    }
    /** Resolve the clicked offset to its innermost node, then toggle. */
    async toggleBreakpointAt(offset) {
        this.log("action", `breakpoint at offset ${offset}`);
        const located = await this.roundTrip("nodeAt", { offset });
        if (!located)
            return;
        if (located.response.error) {
            this.failed(located.response.error, "nodeAt");
            this.changed();
            return;
        }
        const node = located.response.result.node;
        const existing = this.state.markers.find((m) => m.nodeId === node.id);
        if (existing) {
            const removed = await this.roundTrip("configureBreakpoint", {
                bpId: existing.bpId,
                remove: true,
            });
            if (!removed)
                return;
            if (removed.response.error) {
                this.failed(removed.response.error, "configureBreakpoint");
            }
            else {
                this.state.markers = this.state.markers.filter((m) => m.bpId !== existing.bpId);
                this.log("info", `breakpoint ${existing.bpId} removed`);
            }
        }
        else {
            const planted = await this.roundTrip("setBreakpoint", {
                nodeId: node.id,
            });
            if (!planted)
                return;
            if (planted.response.error) {
                this.failed(planted.response.error, "setBreakpoint");
            }
            else {
                const row = planted.response.result
                    .breakpoint;
                this.state.markers.push({ bpId: row.id, nodeId: node.id, span: node.span });
                this.log("info", `breakpoint ${row.id} set on node ${node.id}`);
            }
        }
        // refresh so the breakpoint pane reflects the service's table
        const refreshed = await this.roundTrip("snapshot");
        if (refreshed && refreshed.response.result) {
            const result = refreshed.response.result;
            this.apply(refreshed.events, result.snapshot);
        }
        this.changed();
    }
    async runScript(text) {
        this.log("action", `run script: ${text}`);
        const trip = await this.roundTrip("evalScript", { script: text });
        if (!trip)
            return;
        if (trip.response.error) {
            this.apply(trip.events);
            this.state.history.push({
                script: text,
                preview: null,
                error: `${trip.response.error.code}: ${trip.response.error.message}`,
            });
            this.failed(trip.response.error, "evalScript");
            this.changed();
            return;
        }
        const result = trip.response.result;
        this.state.history.push({
            script: text,
            preview: result.value.preview,
            error: null,
        });
        if (result.scriptOutput) {
            this.log("output", `script output: ${JSON.stringify(result.scriptOutput)}`);
        }
        this.apply(trip.events, result.snapshot);
        this.changed();
    }
    /** Lazy variable pane: fetch an object's children on first expand. */
    async expandObject(ref) {
        if (this.state.busy || this.state.sessionId === null)
            return;
        if (ref in this.state.expanded) {
            delete this.state.expanded[ref];
            this.changed();
            return;
        }
        const trip = await this.roundTrip("inspect", { objectRef: ref });
        if (!trip)
            return;
        if (trip.response.error) {
            this.failed(trip.response.error, "inspect");
            this.changed();
            return;
        }
        const result = trip.response.result;
        this.state.expanded[ref] = childRows(result);
        this.changed();
    }
    selectFrame(index) {
        const stack = this.state.snapshot?.stack ?? [];
        if (index >= 0 && index < stack.length) {
            this.state.selectedFrame = index;
            this.changed();
        }
    }
    breakpointRows() {
        return this.state.snapshot?.breakpoints ?? [];
    }
}
/** Flatten an inspect result into name/preview/ref rows for the pane. */
export function childRows(result) {
    if (result.fields)
        return result.fields;
    if (result.entries) {
        return result.entries.map((entry) => ({
            name: entry.key.preview,
            preview: entry.value.preview,
            ref: entry.value.ref,
        }));
    }
    if (result.items) {
        return result.items.map((item, index) => ({
            name: String(index + 1),
            preview: item.preview,
            ref: item.ref,
        }));
    }
    return [];
}
export function resultCell(state) {
    return state.snapshot?.result ?? null;
}
