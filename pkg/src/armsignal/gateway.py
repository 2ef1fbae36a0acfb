"""Live trial service: full-duplex JSON messaging over a websocket.

A connected client owns one session.  It can start a trial (human,
automotion or replay mode), stream velocity commands while it runs, and
request the full trace once the trial has ended.  During a running human
trial the server sends only token cues and motion counts; arm position and
prediction values never cross the wire until the post-trial reveal, so a
blindfolded pilot stays blind.

Commands land in a single-slot mailbox read once per tick by the harness
loop (last writer wins); the tick loop never blocks on the network.
"""

from __future__ import annotations

import asyncio
import json
import logging
import secrets
from dataclasses import dataclass, field
from pathlib import Path
from typing import Optional

import websockets

from .harness import (
    ExternalPilot,
    ReplayPilot,
    SignallingConfig,
    TrialLog,
    make_runtime,
    read_trial_log,
    write_trial_log,
)

logger = logging.getLogger(__name__)

# configuration keys a client may override when starting a trial
CLIENT_CONFIG_KEYS = {
    "algorithm", "lam", "lookahead_bins", "motions_per_trial", "seed",
    "jitter_bins", "threshold", "settle_ticks", "backoff_bins",
}


@dataclass
class GatewayConfig:
    port: int = 8765
    host: str = "127.0.0.1"
    delay_ms: int = 0  # token onset delay on the wire
    tick_ms: int = 25
    pace: bool = True  # sleep tick_ms of wall time per tick
    out_dir: Path = field(default_factory=lambda: Path("trial-logs"))


class Session:
    """One client's trial slot: idle -> running -> ended."""

    def __init__(self, gw_cfg: GatewayConfig):
        self.id = secrets.token_hex(8)
        self.gw_cfg = gw_cfg
        self.status = "idle"
        self.mode = ""
        self.pilot: Optional[ExternalPilot] = None
        self.log: Optional[TrialLog] = None
        self.replay_source: Optional[TrialLog] = None
        self._abort = False
        self._task: Optional[asyncio.Task] = None

    # -- message handling ---------------------------------------------------

    async def handle(self, ws) -> None:
        try:
            async for raw in ws:
                try:
                    msg = json.loads(raw)
                except json.JSONDecodeError:
                    await self._send(ws, {"type": "error", "reason": "bad json"})
                    continue
                mtype = msg.get("type")
                if mtype == "start_trial":
                    await self._start_trial(ws, msg)
                elif mtype == "cmd":
                    if self.status == "running" and self.pilot is not None:
                        try:
                            self.pilot.set_command(float(msg.get("v", 0.0)))
                        except (TypeError, ValueError):
                            pass  # malformed commands are dropped, arm holds
                elif mtype == "abort":
                    self._abort = True
                elif mtype == "reveal":
                    await self._reveal(ws)
                else:
                    await self._send(ws, {"type": "error", "reason": f"unknown type {mtype!r}"})
        finally:
            if self._task is not None:
                self._task.cancel()

    async def _start_trial(self, ws, msg: dict) -> None:
        if self.status == "running":
            await self._send(ws, {"type": "error", "reason": "busy"})
            return
        mode = msg.get("mode", "human")
        if mode not in ("human", "automotion", "replay"):
            await self._send(ws, {"type": "error", "reason": f"unknown mode {mode!r}"})
            return

        overrides = {k: v for k, v in msg.get("config", {}).items() if k in CLIENT_CONFIG_KEYS}
        if "lookahead_bins" in overrides and overrides["lookahead_bins"] > 0:
            overrides.setdefault("algorithm", "la_td")

        self.mode = mode
        self.status = "running"
        self._abort = False
        self.log = None
        # the mailbox must exist before the ack goes out, or an eager
        # client's first command would race the trial task and be dropped
        self.pilot = ExternalPilot() if mode == "human" else None
        # the trial runs in the background so the message loop keeps
        # consuming commands while it ticks
        self._task = asyncio.create_task(self._trial_body(ws, msg, overrides, mode))

    async def _trial_body(self, ws, msg: dict, overrides: dict, mode: str) -> None:
        try:
            if mode == "replay":
                await self._run_replay(ws, msg)
            else:
                await self._run_live(ws, overrides, mode)
        except asyncio.CancelledError:
            raise
        except websockets.ConnectionClosed:
            self.status = "ended"
        except Exception as exc:  # keep the connection alive on trial errors
            logger.exception("trial failed")
            self.status = "idle"
            try:
                await self._send(ws, {"type": "error", "reason": f"trial failed: {exc}"})
            except websockets.ConnectionClosed:
                pass

    async def _run_live(self, ws, overrides: dict, mode: str) -> None:
        gw = self.gw_cfg
        cfg = SignallingConfig(
            tick_ms=gw.tick_ms,
            token_delay_ms=gw.delay_ms,
            **overrides,
        )
        rt = make_runtime(cfg, trial_index=0, pilot=self.pilot)

        await self._send(ws, {
            "type": "trial_started",
            "session": self.id,
            "mode": mode,
            "motions_target": cfg.motions_per_trial,
        })

        tick_s = gw.tick_ms / 1000.0
        last_motion = 0
        while True:
            rt.step()
            if rt.last_dispatched is not None:
                await self._send(ws, {"type": "token", "cause": rt.last_dispatched.cause})
            if rt.pilot.motions_done != last_motion:
                last_motion = rt.pilot.motions_done
                await self._send(ws, {"type": "motion", "index": last_motion})
            if self._abort or rt.pilot.motions_done >= cfg.motions_per_trial:
                break
            if rt.tick >= cfg.max_ticks_per_trial:
                break
            if gw.pace and tick_s > 0:
                await asyncio.sleep(tick_s)
            else:
                await asyncio.sleep(0)  # yield so cmd messages are consumed

        self.log = rt.finish()
        self.status = "ended"
        self._write_log()
        await self._send(ws, {
            "type": "trial_end",
            "contacts": self.log.contacts_total,
            "motions": self.log.motions,
            "vibrate": True,
        })

    async def _run_replay(self, ws, msg: dict) -> None:
        name = msg.get("log_file", "")
        path = (self.gw_cfg.out_dir / name).resolve()
        if not str(path).startswith(str(self.gw_cfg.out_dir.resolve())) or not path.exists():
            self.status = "idle"
            await self._send(ws, {"type": "error", "reason": "log not found"})
            return
        source = read_trial_log(path)
        self.replay_source = source

        await self._send(ws, {
            "type": "trial_started",
            "session": self.id,
            "mode": "replay",
            "motions_target": source.config.motions_per_trial,
        })
        rt = make_runtime(source.config, source.trial, pilot=ReplayPilot(source.events))
        while True:
            rt.step()
            if rt.last_dispatched is not None:
                await self._send(ws, {"type": "token", "cause": rt.last_dispatched.cause})
            if rt.pilot.exhausted or self._abort:
                break
            await asyncio.sleep(0)
        self.log = rt.finish()
        self.status = "ended"
        await self._send(ws, {
            "type": "trial_end",
            "contacts": self.log.contacts_total,
            "motions": self.log.motions,
            "vibrate": True,
        })

    async def _reveal(self, ws) -> None:
        if self.status != "ended" or self.log is None:
            await self._send(ws, {"type": "error", "reason": "not ended"})
            return
        await self._send(ws, {
            "type": "reveal",
            "log": {
                "events": [e.to_dict() for e in self.log.events],
                "summary": self.log.summary_dict()["summary"],
            },
        })

    def _write_log(self) -> None:
        out = self.gw_cfg.out_dir
        out.mkdir(parents=True, exist_ok=True)
        name = f"trial-{self.id}-{self.mode}.jsonl"
        write_trial_log(self.log, out / name)
        logger.info("wrote %s", out / name)

    @staticmethod
    async def _send(ws, obj: dict) -> None:
        await ws.send(json.dumps(obj, separators=(",", ":")))


class Gateway:
    """Accepts websocket connections and gives each its own session."""

    def __init__(self, cfg: GatewayConfig = GatewayConfig()):
        self.cfg = cfg
        self._server = None
        self.port: Optional[int] = None

    async def _handler(self, ws) -> None:
        session = Session(self.cfg)
        try:
            await session.handle(ws)
        except websockets.ConnectionClosed:
            pass

    async def start(self) -> None:
        self._server = await websockets.serve(self._handler, self.cfg.host, self.cfg.port)
        self.port = self._server.sockets[0].getsockname()[1]
        logger.info("gateway listening on ws://%s:%d", self.cfg.host, self.port)

    async def stop(self) -> None:
        if self._server is not None:
            self._server.close()
            await self._server.wait_closed()
            self._server = None

    async def serve_forever(self) -> None:
        await self.start()
        await asyncio.Future()


def main(cfg: GatewayConfig) -> None:
    logging.basicConfig(level=logging.INFO, format="%(asctime)s %(name)s %(message)s")
    try:
        asyncio.run(Gateway(cfg).serve_forever())
    except KeyboardInterrupt:
        pass
