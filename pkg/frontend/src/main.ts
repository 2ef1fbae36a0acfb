// Browser wiring: connect, map input each frame, fire cues, render the
// reveal once the trial ends. The live page shows only connection state,
// trial status, motion count and cue flashes.

import { chartModel, drawCharts } from "./charts.js";
import { browserSink, CuePlayer } from "./cues.js";
import { InputTracker, mergedVelocity } from "./input.js";
import { GatewayClient } from "./net.js";
import { ConsoleStore } from "./state.js";

const TICK_MS = 25;

function el<T extends HTMLElement>(id: string): T {
  const node = document.getElementById(id);
  if (!node) throw new Error(`missing #${id}`);
  return node as T;
}

function gamepadAxis(): number | null {
  const pads = navigator.getGamepads ? navigator.getGamepads() : [];
  for (const pad of pads) {
    if (pad) return pad.axes[0] ?? null;
  }
  return null;
}

function start(): void {
  const store = new ConsoleStore();
  const cues = new CuePlayer(browserSink(document), {
    singleCueMode: (el<HTMLInputElement>("single-cue")).checked,
  });
  const input = new InputTracker();
  input.attach(window);

  const url = `ws://${location.hostname}:${(el<HTMLInputElement>("port")).value}`;
  const client = new GatewayClient(url, TICK_MS);
  client.onmessage = (msg) => store.apply(msg, performance.now());
  client.onclose = () => store.disconnected();
  client.ready().then(() => store.connected());

  el<HTMLButtonElement>("start").onclick = () => {
    const motions = Number((el<HTMLInputElement>("motions")).value) || 5;
    const lookahead = Number((el<HTMLInputElement>("lookahead")).value) || 0;
    const config: Record<string, unknown> = { motions_per_trial: motions };
    if (lookahead > 0) config.lookahead_bins = lookahead;
    client.startTrial({ mode: "human", config });
  };
  el<HTMLButtonElement>("abort").onclick = () => client.abort();
  el<HTMLButtonElement>("reveal").onclick = () => client.requestReveal();

  const canvas = el<HTMLCanvasElement>("chart");
  const ctx = canvas.getContext("2d")!;

  let lastSent = Number.NaN;
  const frame = () => {
    // input -> command stream, capped inside the client at the tick rate
    if (store.view.trial === "running") {
      const v = mergedVelocity(input.keyboardVelocity(), gamepadAxis());
      if (v !== lastSent) {
        client.sendCommand(v);
        lastSent = v;
      }
    }
    // cues: one per token message, fired on the frame after receipt
    const now = performance.now();
    for (const cue of store.drainCues()) {
      cues.tokenCue(cue.cause, cue.receivedAt, now);
    }
    if (store.endCue) {
      cues.trialEndCue();
      store.endCue = null;
    }
    // live view: status text only, no traces while running
    el("status").textContent =
      `${store.view.connection} | trial ${store.view.trial}` +
      (store.view.trial === "running"
        ? ` | motion ${store.view.motions}/${store.view.motionsTarget}`
        : "");
    if (store.view.contactsAtEnd !== null) {
      el("result").textContent =
        `contacts: ${store.view.contactsAtEnd}, motions: ${store.view.motions}`;
    }
    if (store.view.lastError) {
      el("error").textContent = store.view.lastError;
    }
    if (store.reveal) {
      drawCharts(ctx, chartModel(store.reveal, canvas.width, canvas.height));
      store.reveal = null;
    }
    requestAnimationFrame(frame);
  };
  requestAnimationFrame(frame);
}

window.addEventListener("DOMContentLoaded", start);
