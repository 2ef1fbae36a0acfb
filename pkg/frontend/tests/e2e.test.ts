// End-to-end pilot session: start a trial from the console stack, fly five
// motions blind on keyboard input, receive the trial-end cue, and check the
// reveal chart against the server's own log.

import { expect, test } from "vitest";

import { chartModel, contactOnsets } from "../src/charts";
import { CuePlayer, type CueSink } from "../src/cues";
import { InputTracker, mergedVelocity } from "../src/input";
import { GatewayClient } from "../src/net";
import type { RevealLog } from "../src/protocol";
import { ConsoleStore } from "../src/state";
import { sleep, startGateway } from "./helpers";

class RecordingSink implements CueSink {
  beeps = 0;
  flashes: string[] = [];
  vibrations = 0;
  beep() {
    this.beeps += 1;
  }
  flash(kind: string) {
    this.flashes.push(kind);
  }
  vibrate() {
    this.vibrations += 1;
    return true;
  }
}

test("blind keyboard pilot completes five motions and reveals matching charts", async () => {
  const tickMs = 2;
  const gw = await startGateway(["--tick-ms", String(tickMs)]);
  try {
    const store = new ConsoleStore();
    const sink = new RecordingSink();
    const cues = new CuePlayer(sink);
    const input = new InputTracker();
    const client = new GatewayClient(`ws://127.0.0.1:${gw.port}`, tickMs);
    client.onmessage = (msg) => store.apply(msg, Date.now());
    await client.ready();
    store.connected();

    client.startTrial({ mode: "human", config: { motions_per_trial: 5, seed: 3 } });

    // keyboard pilot: hold one arrow, reverse on cue (debounced like a human)
    let heading: "ArrowRight" | "ArrowLeft" = "ArrowRight";
    input.press(heading);
    let lastReversal = Date.now();

    const frame = () => {
      for (const cue of store.drainCues()) {
        cues.tokenCue(cue.cause, cue.receivedAt, Date.now());
        if (Date.now() - lastReversal > 300) {
          input.release(heading);
          heading = heading === "ArrowRight" ? "ArrowLeft" : "ArrowRight";
          input.press(heading);
          lastReversal = Date.now();
        }
      }
      if (store.endCue) {
        cues.trialEndCue();
        store.endCue = null;
      }
      client.sendCommand(mergedVelocity(input.keyboardVelocity(), null));
    };

    const deadline = Date.now() + 90000;
    while (store.view.trial !== "ended" && Date.now() < deadline) {
      frame();
      await sleep(10);
    }
    frame(); // drain the final cues
    expect(store.view.trial).toBe("ended");
    expect(store.view.motions).toBe(5);
    expect(sink.vibrations).toBe(1); // trial-end cue arrived
    expect(sink.beeps).toBeGreaterThan(0); // the pilot flew on real cues

    client.requestReveal();
    const revealDeadline = Date.now() + 10000;
    while (store.reveal === null && Date.now() < revealDeadline) {
      await sleep(20);
    }
    const log = store.reveal as RevealLog | null;
    expect(log).not.toBeNull();

    const model = chartModel(log!, 960, 420);
    const onsets = contactOnsets(log!.events);
    // chart contact markers sit exactly at the log's contact onsets
    expect(model.contactMarkers.map((m) => m.tick)).toEqual(onsets.map((e) => e.tick));
    expect(onsets.length).toBe(store.view.contactsAtEnd);
    expect(onsets.length).toBe(log!.summary.contacts_total);
    // paths are a pure point-per-event mapping of the log
    expect(model.positionPath.length).toBe(log!.events.length);
    expect(model.predictionPath.length).toBe(log!.events.length);

    client.close();
  } finally {
    gw.stop();
  }
}, 120000);

test("command stream is rate-capped at the server tick", async () => {
  const sent: string[] = [];
  let now = 0;
  const fakeWs = {
    send: (d: string) => sent.push(d),
    close: () => {},
    addEventListener: () => {},
  };
  const client = new GatewayClient("ws://unused", 25, () => fakeWs, () => now);
  for (let i = 0; i < 200; i++) {
    client.sendCommand(i / 200);
    now += 1; // 1 ms of wall time per attempt
  }
  // 200 attempts over 200 ms may produce at most ceil(200/25) + 1 sends
  expect(sent.length).toBeLessThanOrEqual(9);
  client.close();
  await sleep(30); // let any pending flush timer fire harmlessly
});
