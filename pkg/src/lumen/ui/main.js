/**
 * Browser entry point: binds the console controller to the page.
 *
 * All interaction is event delegation over data- attributes the renderer
 * emits, so this file stays a thin shell around Console + render.
 */
import { render } from "./render.js";
import { Console } from "./state.js";
import { WebSocketTransport } from "./transport.js";
const app = document.getElementById("app");
const connectForm = document.getElementById("connect-form");
const sourceInput = document.getElementById("source-input");
const connectButton = document.getElementById("connect-button");
function serviceUrl() {
    const scheme = location.protocol === "https:" ? "wss" : "ws";
    return `${scheme}://${location.host}`;
}
let controller = new Console(new WebSocketTransport(serviceUrl()), (state) => {
    app.innerHTML = render(state);
    const input = document.getElementById("script-input");
    if (input && pendingScript !== null) {
        input.value = pendingScript;
    }
});
// the textarea is re-rendered with the page; keep its draft across renders
let pendingScript = null;
async function connect() {
    connectForm.classList.add("hidden");
    controller = new Console(new WebSocketTransport(serviceUrl()), (state) => {
        app.innerHTML = render(state);
        const input = document.getElementById("script-input");
        if (input && pendingScript !== null)
            input.value = pendingScript;
    });
    await controller.connectAndCreate(sourceInput.value);
}
connectButton.addEventListener("click", () => {
    void connect();
});
app.addEventListener("input", (event) => {
    const target = event.target;
    if (target.id === "script-input") {
        pendingScript = target.value;
    }
});
app.addEventListener("click", (event) => {
    const target = event.target.closest("[data-action], [data-ref], [data-start], [data-frame]");
    if (!target)
        return;
    const action = target.dataset.action;
    if (action === "retry") {
        connectForm.classList.remove("hidden");
        return;
    }
    if (action === "runScript") {
        const input = document.getElementById("script-input");
        const text = input.value.trim();
        if (text) {
            pendingScript = null;
            void controller.userAction({ kind: "runScript", text });
        }
        return;
    }
    if (action === "step" || action === "stepOver" || action === "continue" || action === "skip") {
        void controller.userAction({ kind: action });
        return;
    }
    if (target.dataset.ref !== undefined) {
        void controller.expandObject(target.dataset.ref);
        return;
    }
    if (target.dataset.start !== undefined) {
        void controller.userAction({
            kind: "setBreakpointAt",
            offset: Number(target.dataset.start),
        });
        return;
    }
    if (target.dataset.frame !== undefined) {
        controller.selectFrame(Number(target.dataset.frame));
    }
});
