/**
 * Transports: how the console reaches a debug service.
 *
 * The protocol allows at most one in-flight request per session; the
 * transport enforces it outright (one pending request per connection) and
 * attributes every event received while waiting to that request, preserving
 * the service's events-before-response ordering.
 */
import { SERVICE_NAME, WIRE_VERSION, isEvent, } from "./protocol.js";
export class ProtocolError extends Error {
}
/** The browser transport: JSON messages over a WebSocket. */
export class WebSocketTransport {
    constructor(url) {
        this.url = url;
        this.socket = null;
        this.nextId = 1;
        this.buffered = [];
        this.pending = null;
    }
    connect() {
        return new Promise((resolve, reject) => {
            const socket = new WebSocket(this.url);
            this.socket = socket;
            let greeted = false;
            socket.onmessage = (message) => {
                const parsed = JSON.parse(message.data);
                if (!greeted) {
                    greeted = true;
                    const hello = parsed;
                    if (hello.v !== WIRE_VERSION || hello.service !== SERVICE_NAME) {
                        reject(new ProtocolError(`unexpected service greeting: ${JSON.stringify(parsed)}`));
                        socket.close();
                        return;
                    }
                    socket.onmessage = (next) => this.dispatch(JSON.parse(next.data));
                    resolve(hello);
                    return;
                }
            };
            socket.onerror = () => {
                if (!greeted)
                    reject(new ProtocolError("connection failed"));
            };
            socket.onclose = () => {
                if (!greeted)
                    reject(new ProtocolError("connection closed"));
                if (this.pending) {
                    this.pending.reject(new ProtocolError("connection closed"));
                    this.pending = null;
                }
            };
        });
    }
    dispatch(message) {
        if (isEvent(message)) {
            this.buffered.push(message);
            return;
        }
        const response = message;
        if (this.pending && response.id === this.pending.id) {
            const settled = this.pending;
            this.pending = null;
            settled.resolve({ events: this.buffered.splice(0), response });
        }
    }
    request(op, session, args) {
        if (!this.socket || this.socket.readyState !== WebSocket.OPEN) {
            return Promise.reject(new ProtocolError("not connected"));
        }
        if (this.pending) {
            return Promise.reject(new ProtocolError("a request is already in flight"));
        }
        const id = this.nextId++;
        const request = { id, op };
        if (session !== null)
            request.session = session;
        if (args && Object.keys(args).length > 0)
            request.args = args;
        return new Promise((resolve, reject) => {
            this.pending = { id, resolve, reject };
            this.socket.send(JSON.stringify(request));
        });
    }
    close() {
        this.socket?.close();
        this.socket = null;
    }
}
