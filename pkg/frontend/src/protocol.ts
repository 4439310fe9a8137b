/**
 * Wire protocol shapes for the Lumen debug service.
 *
 * One JSON message per line/frame. Every connection greets with a hello;
 * requests carry an id the response echoes; hit/finished/output events for
 * an operation arrive before the response that completes it. Non-scalar
 * values travel as "obj:N" references paired with a short preview.
 */

export const WIRE_VERSION = 1;
export const SERVICE_NAME = "lumen-debugger";

export interface Hello {
  v: number;
  service: string;
}

export interface WireRequest {
  id: number;
  session?: string;
  op: string;
  args?: Record<string, unknown>;
}

export interface WireError {
  code:
    | "unknownOp"
    | "unknownSession"
    | "sessionFinished"
    | "badArgs"
    | "scriptError"
    | "notAtMessageSend";
  message: string;
}

export interface WireResponse {
  id: number | null;
  result?: Record<string, unknown>;
  error?: WireError;
}

export interface HitPayload {
  kind:
    | "breakpoint"
    | "watchCall"
    | "watchWrite"
    | "unhandledException"
    | "executionFinished";
  breakpointId: number | null;
  watchId: number | null;
  nodeId: number | null;
  frameId: number | null;
  removed: boolean;
}

export interface OutputPayload {
  text: string;
  origin?: "whenHit";
}

export interface WireEvent {
  event: "hit" | "finished" | "output";
  session: string;
  payload: HitPayload | OutputPayload;
}

export type WireMessage = WireResponse | WireEvent | Hello;

// Value cells: a rendered preview plus a reference for non-scalar values ----

export interface Cell {
  preview: string;
  ref: string | null;
}

export interface Span {
  start: number;
  end: number;
}

export interface NodeJson {
  id: number;
  kind: string;
  span: Span;
  sourceExcerpt: string;
}

export interface StagedMessage {
  selector: string;
  receiver: Cell;
  args: Cell[];
}

export interface StackRow {
  frameId: number;
  className: string | null;
  selector: string | null;
  pc: number;
  nodeId: number;
  receiverPreview: string;
  receiverRef: string | null;
  args: Cell[];
  temps: Record<string, Cell>;
}

export interface BreakpointRow {
  id: number;
  target: string | number[];
  once: boolean;
  enabled: boolean;
  hits: number;
}

export interface WatchRow {
  id: number;
  kind: "onCall" | "onWrite";
  selector: string | null;
  field: string | null;
  enabled: boolean;
  hits: number;
}

export interface Snapshot {
  finished: boolean;
  status: "running" | "finished" | "failed";
  failureReason: string | null;
  currentNode: NodeJson | null;
  stagedMessage: StagedMessage | null;
  stack: StackRow[];
  output: string;
  result: Cell | null;
  breakpoints: BreakpointRow[];
  watches: WatchRow[];
}

// Op results the console consumes --------------------------------------------

export interface CreateSessionResult {
  session: string;
  snapshot: Snapshot;
}

export interface SnapshotResult {
  snapshot: Snapshot;
}

export interface NodeAtResult {
  node: NodeJson;
}

export interface SetBreakpointResult {
  breakpoint: BreakpointRow;
}

export interface EvalScriptResult {
  value: Cell;
  scriptOutput: string;
  snapshot: Snapshot;
}

export interface FieldRow {
  name: string;
  preview: string;
  ref: string | null;
}

export interface InspectResult {
  preview: string;
  variant: string;
  className: string;
  fields?: FieldRow[];
  entries?: { key: Cell; value: Cell }[];
  items?: Cell[];
}

export function isEvent(message: WireMessage): message is WireEvent {
  return "event" in message;
}

export function isHitPayload(
  payload: HitPayload | OutputPayload,
): payload is HitPayload {
  return "kind" in payload;
}
