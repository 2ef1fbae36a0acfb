// Wire types for the gateway protocol: single-line JSON over a websocket.

export interface TokenRecord {
  cause: "contact" | "prediction";
  value: number;
  bin: number;
}

export interface TrialEventRecord {
  tick: number;
  shoulder_pos: number;
  shoulder_vel: number;
  contact_raw: number;
  prediction: number;
  token: TokenRecord | null;
  motion_index: number;
  phase: string;
  command: number;
}

export interface RevealSummary {
  trial: number;
  contacts_total: number;
  tokens_total: number;
  motions: number;
  duration_ticks: number;
  weight_checksum: string;
  config: Record<string, unknown>;
}

export interface RevealLog {
  events: TrialEventRecord[];
  summary: RevealSummary;
}

export type ServerMessage =
  | { type: "trial_started"; session: string; mode: string; motions_target: number }
  | { type: "token"; cause: "contact" | "prediction" }
  | { type: "motion"; index: number }
  | { type: "trial_end"; contacts: number; motions: number; vibrate: boolean }
  | { type: "reveal"; log: RevealLog }
  | { type: "error"; reason: string };

export type ClientMessage =
  | { type: "start_trial"; mode: "human" | "automotion" | "replay"; config?: Record<string, unknown>; log_file?: string }
  | { type: "cmd"; v: number }
  | { type: "abort" }
  | { type: "reveal" };

export function parseServerMessage(raw: string): ServerMessage | null {
  try {
    const msg = JSON.parse(raw);
    if (msg && typeof msg.type === "string") return msg as ServerMessage;
  } catch {
    /* fall through */
  }
  return null;
}
