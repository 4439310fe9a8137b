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
export function isEvent(message) {
    return "event" in message;
}
export function isHitPayload(payload) {
    return "kind" in payload;
}
