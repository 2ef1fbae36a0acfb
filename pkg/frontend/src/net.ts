// Gateway client: parses inbound messages, rate-caps outbound commands to
// the server tick so a jittery input loop cannot flood the mailbox.

import type { ClientMessage, ServerMessage } from "./protocol.js";
import { parseServerMessage } from "./protocol.js";

type WebSocketLike = {
  send(data: string): void;
  close(): void;
  addEventListener(type: string, cb: (ev: any) => void): void;
};

export class GatewayClient {
  onmessage: (msg: ServerMessage) => void = () => {};
  onraw: (raw: string) => void = () => {};
  onclose: () => void = () => {};
  private ws: WebSocketLike;
  private lastCmdAt = -Infinity;
  private pendingCmd: number | null = null;
  private flushTimer: ReturnType<typeof setTimeout> | null = null;

  constructor(
    url: string,
    private tickMs: number,
    factory: (url: string) => WebSocketLike = (u) => new WebSocket(u) as WebSocketLike,
    private clock: () => number = () => Date.now(),
  ) {
    this.ws = factory(url);
    this.ws.addEventListener("message", (ev) => {
      const raw = typeof ev.data === "string" ? ev.data : String(ev.data);
      this.onraw(raw);
      const msg = parseServerMessage(raw);
      if (msg) this.onmessage(msg);
    });
    this.ws.addEventListener("close", () => this.onclose());
  }

  ready(): Promise<void> {
    return new Promise((resolve, reject) => {
      this.ws.addEventListener("open", () => resolve());
      this.ws.addEventListener("error", (e) => reject(e));
    });
  }

  private send(msg: ClientMessage): void {
    this.ws.send(JSON.stringify(msg));
  }

  startTrial(opts: { mode: "human" | "automotion" | "replay"; config?: Record<string, unknown>; logFile?: string }): void {
    this.send({ type: "start_trial", mode: opts.mode, config: opts.config, log_file: opts.logFile });
  }

  /** Latest command wins; at most one cmd message per server tick. */
  sendCommand(v: number): void {
    const now = this.clock();
    if (now - this.lastCmdAt >= this.tickMs) {
      this.lastCmdAt = now;
      this.send({ type: "cmd", v });
      return;
    }
    this.pendingCmd = v;
    if (this.flushTimer === null) {
      const wait = Math.max(0, this.tickMs - (now - this.lastCmdAt));
      this.flushTimer = setTimeout(() => {
        this.flushTimer = null;
        if (this.pendingCmd !== null) {
          const value = this.pendingCmd;
          this.pendingCmd = null;
          this.sendCommand(value);
        }
      }, wait);
    }
  }

  abort(): void {
    this.send({ type: "abort" });
  }

  requestReveal(): void {
    this.send({ type: "reveal" });
  }

  close(): void {
    if (this.flushTimer !== null) clearTimeout(this.flushTimer);
    this.ws.close();
  }
}
