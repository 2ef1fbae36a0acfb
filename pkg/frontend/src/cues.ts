// Token and trial-end cues. The player is given a sink so tests can watch
// cue emission; the browser sink does WebAudio beeps, screen flashes and
// controller vibration.

export interface CueSink {
  beep(freqHz: number, durationMs: number): void;
  flash(kind: string): void;
  /** Returns false when vibration is unavailable. */
  vibrate(durationMs: number): boolean;
}

export interface CueRecord {
  cause: string;
  latencyMs: number;
}

const CONTACT_FREQ = 440;
const PREDICTION_FREQ = 880;

export class CuePlayer {
  /** One entry per cue fired; latency is cue time minus receipt time. */
  readonly log: CueRecord[] = [];

  constructor(
    private sink: CueSink,
    private opts: { singleCueMode?: boolean } = {},
  ) {}

  tokenCue(cause: "contact" | "prediction", receivedAt: number, now: number): void {
    const freq = this.opts.singleCueMode || cause === "prediction" ? PREDICTION_FREQ : CONTACT_FREQ;
    this.sink.beep(freq, 60);
    this.sink.flash(this.opts.singleCueMode ? "token" : cause);
    this.log.push({ cause, latencyMs: now - receivedAt });
  }

  trialEndCue(): void {
    if (!this.sink.vibrate(300)) {
      this.sink.flash("trial-end");
    }
  }
}

/** Browser sink: oscillator beep, body-class flash, navigator vibration. */
export function browserSink(doc: Document): CueSink {
  let ctx: AudioContext | null = null;
  return {
    beep(freqHz, durationMs) {
      try {
        ctx = ctx ?? new AudioContext();
        const osc = ctx.createOscillator();
        const gain = ctx.createGain();
        osc.connect(gain);
        gain.connect(ctx.destination);
        osc.frequency.value = freqHz;
        gain.gain.value = 0.08;
        osc.start();
        osc.stop(ctx.currentTime + durationMs / 1000);
      } catch {
        /* audio unavailable; the flash still fires */
      }
    },
    flash(kind) {
      const cls = `flash-${kind}`;
      doc.body.classList.add(cls);
      setTimeout(() => doc.body.classList.remove(cls), 120);
    },
    vibrate(durationMs) {
      const nav = doc.defaultView?.navigator;
      if (nav && "vibrate" in nav) {
        return nav.vibrate(durationMs);
      }
      return false;
    },
  };
}
