// Console state store. The live view deliberately has no field that could
// hold arm position or prediction values: while a trial runs the client
// knows only its connection, the motion count, and queued cues. Traces
// exist solely in the post-trial reveal.

import type { RevealLog, ServerMessage } from "./protocol.js";

export interface LiveView {
  connection: "idle" | "open" | "closed";
  trial: "idle" | "running" | "ended";
  mode: string;
  motions: number;
  motionsTarget: number;
  contactsAtEnd: number | null;
  lastError: string | null;
}

export interface QueuedCue {
  cause: "contact" | "prediction";
  receivedAt: number;
}

export class ConsoleStore {
  view: LiveView = {
    connection: "idle",
    trial: "idle",
    mode: "",
    motions: 0,
    motionsTarget: 0,
    contactsAtEnd: null,
    lastError: null,
  };
  reveal: RevealLog | null = null;
  endCue: { vibrate: boolean } | null = null;
  private cueQueue: QueuedCue[] = [];

  connected(): void {
    this.view.connection = "open";
  }

  disconnected(): void {
    this.view.connection = "closed";
  }

  apply(msg: ServerMessage, now: number): void {
    switch (msg.type) {
      case "trial_started":
        this.view.trial = "running";
        this.view.mode = msg.mode;
        this.view.motions = 0;
        this.view.motionsTarget = msg.motions_target;
        this.view.contactsAtEnd = null;
        this.reveal = null;
        this.endCue = null;
        break;
      case "token":
        this.cueQueue.push({ cause: msg.cause, receivedAt: now });
        break;
      case "motion":
        this.view.motions = msg.index;
        break;
      case "trial_end":
        this.view.trial = "ended";
        this.view.contactsAtEnd = msg.contacts;
        this.view.motions = msg.motions;
        this.endCue = { vibrate: msg.vibrate };
        break;
      case "reveal":
        this.reveal = msg.log;
        break;
      case "error":
        this.view.lastError = msg.reason;
        break;
    }
  }

  /** Called once per render frame; every queued token yields exactly one cue. */
  drainCues(): QueuedCue[] {
    const out = this.cueQueue;
    this.cueQueue = [];
    return out;
  }
}
