// Occlusion contract: while a trial runs, nothing position- or
// prediction-shaped crosses the wire or enters the live view, and every
// token message produces exactly one cue on the frame after receipt.

import { expect, test } from "vitest";

import { CuePlayer, type CueSink } from "../src/cues";
import { parseServerMessage, type ServerMessage } from "../src/protocol";
import { ConsoleStore } from "../src/state";
import { startGateway } from "./helpers";

const FORBIDDEN = ["pos", "pred", "shoulder", "elbow", "contact_raw", "bin", "tick"];

function leakyKeys(value: unknown, path = ""): string[] {
  if (value === null || typeof value !== "object") return [];
  const leaks: string[] = [];
  for (const [key, child] of Object.entries(value as Record<string, unknown>)) {
    const full = path ? `${path}.${key}` : key;
    if (FORBIDDEN.some((f) => key.toLowerCase().includes(f))) leaks.push(full);
    leaks.push(...leakyKeys(child, full));
  }
  return leaks;
}

class RecordingSink implements CueSink {
  beeps: number[] = [];
  flashes: string[] = [];
  vibrations: number[] = [];
  beep(freq: number) {
    this.beeps.push(freq);
  }
  flash(kind: string) {
    this.flashes.push(kind);
  }
  vibrate(ms: number) {
    this.vibrations.push(ms);
    return true;
  }
}

test("running trial traffic carries no position or prediction fields", async () => {
  const gw = await startGateway(["--tick-ms", "1", "--no-pace"]);
  try {
    const store = new ConsoleStore();
    const running: ServerMessage[] = [];
    await new Promise<void>((resolve, reject) => {
      const ws = new WebSocket(`ws://127.0.0.1:${gw.port}`);
      const timer = setTimeout(() => reject(new Error("trial timed out")), 60000);
      ws.addEventListener("open", () => {
        ws.send(JSON.stringify({
          type: "start_trial",
          mode: "automotion",
          config: { motions_per_trial: 3, seed: 5, jitter_bins: 1 },
        }));
      });
      ws.addEventListener("message", (ev) => {
        const msg = parseServerMessage(String(ev.data));
        if (!msg) return;
        running.push(msg);
        store.apply(msg, Date.now());
        if (msg.type === "trial_end") {
          clearTimeout(timer);
          ws.close();
          resolve();
        }
      });
      ws.addEventListener("error", () => reject(new Error("socket error")));
    });

    expect(running.length).toBeGreaterThan(4);
    expect(running.some((m) => m.type === "token")).toBe(true);
    for (const msg of running) {
      expect(leakyKeys(msg)).toEqual([]);
    }
    // the live view itself has nowhere to hold a trace
    expect(leakyKeys(store.view)).toEqual([]);
    expect(store.view.trial).toBe("ended");
  } finally {
    gw.stop();
  }
}, 90000);

test("each token message triggers exactly one cue within one render frame", () => {
  const store = new ConsoleStore();
  const sink = new RecordingSink();
  const cues = new CuePlayer(sink);
  const frameMs = 16;
  let now = 1000;

  // burst of three tokens in three ticks, no coalescing
  for (const cause of ["prediction", "prediction", "contact"] as const) {
    store.apply({ type: "token", cause }, now);
    now += 1;
  }
  now = 1000 + frameMs; // next animation frame
  const drained = store.drainCues();
  for (const cue of drained) {
    cues.tokenCue(cue.cause, cue.receivedAt, now);
  }

  expect(drained.length).toBe(3);
  expect(sink.beeps.length).toBe(3);
  expect(sink.flashes).toEqual(["prediction", "prediction", "contact"]);
  for (const rec of cues.log) {
    expect(rec.latencyMs).toBeLessThanOrEqual(frameMs);
  }
  // nothing left queued: a second frame fires no extra cues
  expect(store.drainCues()).toEqual([]);
});

test("distinct cue styles collapse in single-cue mode", () => {
  const sink = new RecordingSink();
  const cues = new CuePlayer(sink, { singleCueMode: true });
  cues.tokenCue("contact", 0, 1);
  cues.tokenCue("prediction", 0, 1);
  expect(new Set(sink.beeps).size).toBe(1);
  expect(new Set(sink.flashes)).toEqual(new Set(["token"]));
});

test("trial end cue vibrates, or flashes when vibration is missing", () => {
  const sink = new RecordingSink();
  new CuePlayer(sink).trialEndCue();
  expect(sink.vibrations.length).toBe(1);

  const noVib = new RecordingSink();
  noVib.vibrate = () => false;
  new CuePlayer(noVib).trialEndCue();
  expect(noVib.flashes).toContain("trial-end");
});
