// Shared test plumbing: spawn the python gateway and wait for it to listen.

import { spawn, type ChildProcess } from "node:child_process";
import { mkdtempSync } from "node:fs";
import { tmpdir } from "node:os";
import { join } from "node:path";

export interface GatewayHandle {
  proc: ChildProcess;
  port: number;
  outDir: string;
  stop(): void;
}

export async function startGateway(args: string[] = []): Promise<GatewayHandle> {
  const port = 20000 + Math.floor(Math.random() * 20000);
  const outDir = mkdtempSync(join(tmpdir(), "armsignal-"));
  const proc = spawn(
    "python3",
    ["-m", "armsignal.cli", "serve", "--port", String(port), "--out", outDir, ...args],
    { stdio: ["ignore", "pipe", "pipe"] },
  );
  let stderr = "";
  proc.stderr?.on("data", (d) => (stderr += d.toString()));

  // readiness: poll until a connection succeeds
  const deadline = Date.now() + 15000;
  while (Date.now() < deadline) {
    if (proc.exitCode !== null) {
      throw new Error(`gateway exited early: ${stderr}`);
    }
    try {
      await new Promise<void>((resolve, reject) => {
        const ws = new WebSocket(`ws://127.0.0.1:${port}`);
        ws.addEventListener("open", () => {
          ws.close();
          resolve();
        });
        ws.addEventListener("error", () => reject(new Error("not ready")));
      });
      return { proc, port, outDir, stop: () => proc.kill("SIGTERM") };
    } catch {
      await sleep(150);
    }
  }
  proc.kill("SIGTERM");
  throw new Error(`gateway never became ready: ${stderr}`);
}

export function sleep(ms: number): Promise<void> {
  return new Promise((r) => setTimeout(r, ms));
}
