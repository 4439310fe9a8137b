/**
 * Rendering: ConsoleState -> HTML string, a pure function.
 *
 * No DOM reads, no hidden inputs — replaying the same state sequence yields
 * byte-identical markup. Interactive elements carry data- attributes the
 * event-delegation layer in main.ts maps back to controller calls.
 */

import { Cell, Snapshot, Span, StackRow } from "./protocol.js";
import { ConsoleState, Marker } from "./state.js";

export function escapeHtml(text: string): string {
  return text
    .replace(/&/g, "&amp;")
    .replace(/</g, "&lt;")
    .replace(/>/g, "&gt;")
    .replace(/"/g, "&quot;");
}

// Source pane ----------------------------------------------------------------------

interface Token {
  start: number;
  end: number;
  text: string;
}

function tokenize(source: string): Token[] {
  const tokens: Token[] = [];
  const pattern = /\S+/g;
  let match: RegExpExecArray | null;
  while ((match = pattern.exec(source)) !== null) {
    tokens.push({ start: match.index, end: match.index + match[0].length, text: match[0] });
  }
  return tokens;
}

function within(token: Token, span: Span): boolean {
  return token.start >= span.start && token.end <= span.end;
}

/**
 * Wrap every token in a span carrying its source offset; add `current` for
 * tokens inside the latest snapshot's current-node span (expression-level
 * highlight) and `marked` for tokens inside a breakpoint marker.
 */
export function renderSource(
  source: string,
  highlight: Span | null,
  markers: Marker[],
): string {
  const parts: string[] = [];
  let cursor = 0;
  for (const token of tokenize(source)) {
    parts.push(escapeHtml(source.slice(cursor, token.start)));
    const classes = ["tok"];
    if (highlight && within(token, highlight)) classes.push("current");
    if (markers.some((m) => within(token, m.span))) classes.push("marked");
    parts.push(
      `<span class="${classes.join(" ")}" data-start="${token.start}">` +
        `${escapeHtml(token.text)}</span>`,
    );
    cursor = token.end;
  }
  parts.push(escapeHtml(source.slice(cursor)));
  return `<pre class="source" id="source-pane">${parts.join("")}</pre>`;
}

// Panes ----------------------------------------------------------------------------

function statusBadge(state: ConsoleState): string {
  const snapshot = state.snapshot;
  if (!snapshot) return `<span class="badge ${state.connection}">${state.connection}</span>`;
  return `<span class="badge ${snapshot.status}">${snapshot.status}</span>`;
}

function cellHtml(cell: Cell, expanded: Record<string, readonly unknown[]>): string {
  const preview = `<span class="preview">${escapeHtml(cell.preview)}</span>`;
  if (cell.ref === null) return preview;
  const open = cell.ref in expanded;
  return (
    `<button class="expand" data-ref="${escapeHtml(cell.ref)}">` +
    `${open ? "−" : "+"}</button> ${preview}`
  );
}

function childrenHtml(state: ConsoleState, ref: string | null): string {
  if (ref === null || !(ref in state.expanded)) return "";
  const rows = state.expanded[ref]
    .map(
      (row) =>
        `<li>${escapeHtml(row.name)} = ` +
        `${cellHtml({ preview: row.preview, ref: row.ref }, state.expanded)}` +
        `${childrenHtml(state, row.ref)}</li>`,
    )
    .join("");
  return `<ul class="children">${rows}</ul>`;
}

function frameLabel(row: StackRow): string {
  const method = row.selector === null ? "main" : row.selector;
  return row.className === null
    ? escapeHtml(method)
    : `${escapeHtml(row.className)}&gt;&gt;${escapeHtml(method)}`;
}

function stackPane(state: ConsoleState): string {
  const stack = state.snapshot?.stack ?? [];
  const rows = stack
    .map((row, index) => {
      const selected = index === state.selectedFrame ? " selected" : "";
      return (
        `<li class="frame${selected}" data-frame="${index}">` +
        `${frameLabel(row)} <span class="pc">pc ${row.pc}</span></li>`
      );
    })
    .join("");
  return `<section class="pane" id="stack-pane"><h2>Stack</h2><ol>${rows}</ol></section>`;
}

function variablesPane(state: ConsoleState): string {
  const stack = state.snapshot?.stack ?? [];
  const frame = stack[state.selectedFrame];
  if (!frame) {
    return `<section class="pane" id="variables-pane"><h2>Variables</h2><p class="empty">no frame</p></section>`;
  }
  const rows: string[] = [];
  rows.push(
    `<li>self = ${cellHtml(
      { preview: frame.receiverPreview, ref: frame.receiverRef },
      state.expanded,
    )}${childrenHtml(state, frame.receiverRef)}</li>`,
  );
  frame.args.forEach((arg, index) => {
    rows.push(
      `<li>arg${index + 1} = ${cellHtml(arg, state.expanded)}` +
        `${childrenHtml(state, arg.ref)}</li>`,
    );
  });
  for (const [name, cell] of Object.entries(frame.temps)) {
    rows.push(
      `<li>${escapeHtml(name)} = ${cellHtml(cell, state.expanded)}` +
        `${childrenHtml(state, cell.ref)}</li>`,
    );
  }
  return `<section class="pane" id="variables-pane"><h2>Variables</h2><ul>${rows.join("")}</ul></section>`;
}

function stagedPane(snapshot: Snapshot | null): string {
  const staged = snapshot?.stagedMessage;
  if (!staged) return "";
  const args = staged.args.map((a) => escapeHtml(a.preview)).join(", ");
  return (
    `<p class="staged">about to send <code>#${escapeHtml(staged.selector)}</code>` +
    ` to <code>${escapeHtml(staged.receiver.preview)}</code>` +
    (args ? ` with ${args}` : "") +
    `</p>`
  );
}

function resultLine(state: ConsoleState): string {
  const snapshot = state.snapshot;
  if (!snapshot) return "";
  if (snapshot.status === "finished" && snapshot.result) {
    return (
      `<p class="result" id="result-line">result: ` +
      `${cellHtml(snapshot.result, state.expanded)}` +
      `${childrenHtml(state, snapshot.result.ref)}</p>`
    );
  }
  if (snapshot.status === "failed") {
    return `<p class="result failed">failed: ${escapeHtml(snapshot.failureReason ?? "")}</p>`;
  }
  return "";
}

function controls(state: ConsoleState): string {
  const finished = state.snapshot?.finished ?? true;
  const stepping = state.busy || state.sessionId === null || finished;
  const disabled = (off: boolean) => (off ? " disabled" : "");
  return (
    `<div class="controls">` +
    `<button data-action="step"${disabled(stepping)}>step</button>` +
    `<button data-action="stepOver"${disabled(stepping)}>step over</button>` +
    `<button data-action="continue"${disabled(stepping)}>continue</button>` +
    `<button data-action="skip"${disabled(stepping)}>skip</button>` +
    `</div>`
  );
}

function breakpointsPane(state: ConsoleState): string {
  const snapshot = state.snapshot;
  const rows: string[] = [];
  for (const bp of snapshot?.breakpoints ?? []) {
    const target = Array.isArray(bp.target) ? `nodes ${bp.target.join(", ")}` : bp.target;
    rows.push(
      `<li>bp ${bp.id}: ${escapeHtml(target)}${bp.once ? " (once)" : ""}` +
        `${bp.enabled ? "" : " (disabled)"} — ${bp.hits} hits</li>`,
    );
  }
  for (const watch of snapshot?.watches ?? []) {
    const what = watch.kind === "onCall" ? watch.selector : watch.field;
    rows.push(
      `<li>watch ${watch.id}: ${watch.kind}${what ? " " + escapeHtml(what) : ""}` +
        ` — ${watch.hits} hits</li>`,
    );
  }
  const body = rows.length ? `<ul>${rows.join("")}</ul>` : `<p class="empty">none</p>`;
  return `<section class="pane" id="breakpoints-pane"><h2>Breakpoints</h2>${body}</section>`;
}

function transcriptPane(snapshot: Snapshot | null): string {
  const text = snapshot?.output ?? "";
  return (
    `<section class="pane" id="transcript-pane"><h2>Transcript</h2>` +
    `<pre>${escapeHtml(text)}</pre></section>`
  );
}

function scriptPane(state: ConsoleState): string {
  const history = state.history
    .map((entry) => {
      const outcome =
        entry.error !== null
          ? `<span class="error">${escapeHtml(entry.error)}</span>`
          : `<code>${escapeHtml(entry.preview ?? "")}</code>`;
      return `<li><code>${escapeHtml(entry.script)}</code> ⇒ ${outcome}</li>`;
    })
    .join("");
  const disabled = state.busy || state.sessionId === null ? " disabled" : "";
  return (
    `<section class="pane" id="script-pane"><h2>Script</h2>` +
    `<textarea id="script-input" rows="3" placeholder="dbg step. dbg currentNode"></textarea>` +
    `<button data-action="runScript"${disabled}>run</button>` +
    `<ol class="history">${history}</ol></section>`
  );
}

function logPane(state: ConsoleState): string {
  const rows = state.log
    .map((entry) => `<li class="${entry.kind}">${escapeHtml(entry.text)}</li>`)
    .join("");
  return `<section class="pane" id="log-pane"><h2>Log</h2><ol>${rows}</ol></section>`;
}

function banner(state: ConsoleState): string {
  if (!state.banner) return "";
  return (
    `<div class="banner" role="alert">${escapeHtml(state.banner)} ` +
    `<button data-action="retry">retry</button></div>`
  );
}

export function render(state: ConsoleState): string {
  const highlight = state.snapshot?.currentNode?.span ?? null;
  const header =
    `<header>${statusBadge(state)}` +
    (state.sessionId ? ` <span class="session">${state.sessionId}</span>` : "") +
    `</header>`;
  return (
    header +
    banner(state) +
    renderSource(state.source, highlight, state.markers) +
    stagedPane(state.snapshot) +
    resultLine(state) +
    controls(state) +
    `<div class="columns">` +
    stackPane(state) +
    variablesPane(state) +
    breakpointsPane(state) +
    `</div>` +
    transcriptPane(state.snapshot) +
    scriptPane(state) +
    logPane(state)
  );
}
