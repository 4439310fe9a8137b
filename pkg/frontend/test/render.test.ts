/**
 * Renderer unit tests: render is a pure string function of the state, so
 * these work on hand-built states with no transport at all.
 */

import { describe, expect, it } from "vitest";

import { Snapshot } from "../src/protocol.js";
import { escapeHtml, render, renderSource } from "../src/render.js";
import { ConsoleState, initialState } from "../src/state.js";

function baseSnapshot(): Snapshot {
  return {
    finished: false,
    status: "running",
    failureReason: null,
    currentNode: null,
    stagedMessage: null,
    stack: [],
    output: "",
    result: null,
    breakpoints: [],
    watches: [],
  };
}

function liveState(): ConsoleState {
  const state = initialState();
  state.connection = "live";
  state.sessionId = "s1";
  state.source = "1 + 2";
  state.snapshot = baseSnapshot();
  state.snapshotSeq = 1;
  return state;
}

describe("escapeHtml", () => {
  it("neutralizes markup characters", () => {
    expect(escapeHtml(`<b a="c">&`)).toBe("&lt;b a=&quot;c&quot;&gt;&amp;");
  });
});

describe("renderSource", () => {
  it("wraps every token with its source offset", () => {
    const html = renderSource("1 + 2", null, []);
    expect(html).toContain('<span class="tok" data-start="0">1</span>');
    expect(html).toContain('<span class="tok" data-start="2">+</span>');
    expect(html).toContain('<span class="tok" data-start="4">2</span>');
  });

  it("highlights exactly the tokens inside the span", () => {
    const html = renderSource("1 + 2", { start: 0, end: 1 }, []);
    expect(html).toContain('<span class="tok current" data-start="0">1</span>');
    expect(html).toContain('<span class="tok" data-start="2">+</span>');
  });

  it("marks breakpoint spans independently of the highlight", () => {
    const html = renderSource("1 + 2", { start: 0, end: 1 }, [
      { bpId: 1, nodeId: 2, span: { start: 0, end: 5 } },
    ]);
    expect(html).toContain('<span class="tok current marked" data-start="0">1</span>');
    expect(html).toContain('<span class="tok marked" data-start="2">+</span>');
  });

  it("keeps offsets across newlines and escapes the text", () => {
    const source = "| a |\na := '<hi>'.\na";
    const html = renderSource(source, null, []);
    expect(html).toContain(`data-start="${source.indexOf("a :=")}"`);
    expect(html).toContain("&lt;hi&gt;");
    expect(html).not.toContain("<hi>");
  });
});

describe("render", () => {
  it("renders an idle shell before any connection", () => {
    const html = render(initialState());
    expect(html).toContain('<span class="badge idle">idle</span>');
    expect(html).toContain('<button data-action="step" disabled>');
  });

  it("shows the staged message when suspended at a send", () => {
    const state = liveState();
    state.snapshot!.stagedMessage = {
      selector: "greet:",
      receiver: { preview: "a Greeter", ref: "obj:1" },
      args: [{ preview: "'world'", ref: null }],
    };
    const html = render(state);
    expect(html).toContain("about to send <code>#greet:</code>");
    expect(html).toContain("a Greeter");
  });

  it("renders the failure reason for a failed run", () => {
    const state = liveState();
    state.snapshot!.status = "failed";
    state.snapshot!.finished = true;
    state.snapshot!.failureReason = "MessageNotUnderstood: nil flub";
    const html = render(state);
    expect(html).toContain('badge failed');
    expect(html).toContain("MessageNotUnderstood: nil flub");
  });

  it("enables stepping only for a live unfinished session", () => {
    const state = liveState();
    expect(render(state)).toContain('<button data-action="step">');
    state.busy = true;
    expect(render(state)).toContain('<button data-action="step" disabled>');
    state.busy = false;
    state.snapshot!.finished = true;
    expect(render(state)).toContain('<button data-action="step" disabled>');
  });

  it("lists watches next to breakpoints", () => {
    const state = liveState();
    state.snapshot!.watches = [
      { id: 1, kind: "onCall", selector: "open", field: null, enabled: true, hits: 2 },
    ];
    const html = render(state);
    expect(html).toContain("watch 1: onCall open — 2 hits");
  });
});
