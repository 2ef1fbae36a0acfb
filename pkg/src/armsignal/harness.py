"""End-to-end signalling loop: observe -> signal -> act -> learn, plus logging.

Every tick the harness reads the arm observation and contact sensor,
computes the signalling prediction for the configured learner, emits a
token when contact occurs or the prediction strictly exceeds the
threshold, hands the token to the active pilot (optionally after an onset
delay), applies the pilot's command to the world, and finally updates all
learners on the unshifted features with this tick's cumulant.  The update
always comes last in the loop.

Trials are independent: learner weights reset between trials, and each
trial's world noise is seeded deterministically from (seed, trial index),
so identical configs replay byte-identically.
"""

from __future__ import annotations

import hashlib
import json
import math
from dataclasses import asdict, dataclass, field
from pathlib import Path
from typing import Iterable, Optional, Protocol

import numpy as np

from . import automotion as motion
from . import gvf
from .tilecoder import FeatureVector, JointObservation, TileLayout, bin_index, encode
from .world import ArmWorld, ServoModel, Workspace, is_contact

ALGORITHMS = ("td0", "td_lambda", "gtd", "la_td")

# learner step sizes follow the reference update listings
TD_ALPHA = 0.1
GTD_ALPHA = 0.2
GTD_BETA = 0.01
GAMMA = 0.9


@dataclass(frozen=True)
class SignallingConfig:
    threshold: float = 400.0
    algorithm: str = "td_lambda"
    lam: float = 0.9
    lookahead_bins: int = 0
    trials: int = 5
    motions_per_trial: int = 50
    seed: int = 0
    tick_ms: int = 25
    # world
    max_step: float = 0.004
    left_wall: float = 0.04
    right_wall: float = 0.96
    jitter_bins: int = 0
    overshoot_prob: float = 0.0
    # pilot
    backoff_bins: int = 3
    settle_ticks: int = 12
    pilot_speed: float = 1.0
    token_delay_ms: int = 0
    pilot_reaction_ms: tuple[int, int] = (0, 0)  # scripted pilot only
    # representation
    bins_per_axis: int = 32
    max_ticks_per_trial: int = 500_000

    def __post_init__(self) -> None:
        if self.threshold <= 0:
            raise ValueError("threshold must be > 0")
        if self.lookahead_bins < 0:
            raise ValueError("lookahead_bins must be >= 0")
        if self.algorithm not in ALGORITHMS:
            raise ValueError(f"algorithm must be one of {ALGORITHMS}")
        if self.algorithm == "la_td" and self.lookahead_bins < 1:
            raise ValueError("la_td requires lookahead_bins >= 1")

    @property
    def token_delay_ticks(self) -> int:
        return math.ceil(self.token_delay_ms / self.tick_ms) if self.token_delay_ms else 0

    @property
    def layout(self) -> TileLayout:
        return TileLayout(bins_per_axis=self.bins_per_axis)

    def effective_lambda(self) -> float:
        return 0.0 if self.algorithm == "td0" else self.lam

    def to_dict(self) -> dict:
        d = asdict(self)
        d["pilot_reaction_ms"] = list(self.pilot_reaction_ms)
        return d

    @staticmethod
    def from_dict(d: dict) -> "SignallingConfig":
        d = dict(d)
        d["pilot_reaction_ms"] = tuple(d.get("pilot_reaction_ms", (0, 0)))
        return SignallingConfig(**d)


@dataclass(frozen=True)
class Token:
    tick: int
    cause: str  # "contact" | "prediction"
    prediction_value: float
    shoulder_bin: int


@dataclass(frozen=True)
class TrialEvent:
    tick: int
    shoulder_pos: float
    shoulder_vel: float
    contact_raw: float
    prediction: float
    token: Optional[Token]
    motion_index: int
    phase: str
    command: float

    def to_dict(self) -> dict:
        d = {
            "tick": self.tick,
            "shoulder_pos": self.shoulder_pos,
            "shoulder_vel": self.shoulder_vel,
            "contact_raw": self.contact_raw,
            "prediction": self.prediction,
            "token": None,
            "motion_index": self.motion_index,
            "phase": self.phase,
            "command": self.command,
        }
        if self.token is not None:
            d["token"] = {
                "cause": self.token.cause,
                "value": self.token.prediction_value,
                "bin": self.token.shoulder_bin,
            }
        return d

    @staticmethod
    def from_dict(d: dict) -> "TrialEvent":
        tok = d.get("token")
        token = None
        if tok is not None:
            token = Token(d["tick"], tok["cause"], tok["value"], tok["bin"])
        return TrialEvent(
            tick=d["tick"],
            shoulder_pos=d["shoulder_pos"],
            shoulder_vel=d["shoulder_vel"],
            contact_raw=d["contact_raw"],
            prediction=d["prediction"],
            token=token,
            motion_index=d["motion_index"],
            phase=d["phase"],
            command=d["command"],
        )


@dataclass
class TrialLog:
    trial: int
    config: SignallingConfig
    events: list[TrialEvent] = field(default_factory=list)
    contacts_total: int = 0
    tokens_total: int = 0
    motions: int = 0
    duration_ticks: int = 0
    weight_checksum: str = ""

    def summary_dict(self) -> dict:
        return {
            "summary": {
                "trial": self.trial,
                "contacts_total": self.contacts_total,
                "tokens_total": self.tokens_total,
                "motions": self.motions,
                "duration_ticks": self.duration_ticks,
                "weight_checksum": self.weight_checksum,
                "config": self.config.to_dict(),
            }
        }

    def to_jsonl(self) -> str:
        lines = [json.dumps(e.to_dict(), separators=(",", ":")) for e in self.events]
        lines.append(json.dumps(self.summary_dict(), separators=(",", ":")))
        return "\n".join(lines) + "\n"


def generate_token(contact: bool, prediction: float, cfg: SignallingConfig, tick: int,
                   shoulder_bin: int) -> Optional[Token]:
    """Token iff contact or the prediction strictly exceeds the threshold.

    Contact wins the cause field when both hold.
    """
    if contact:
        return Token(tick, "contact", prediction, shoulder_bin)
    if prediction > cfg.threshold:
        return Token(tick, "prediction", prediction, shoulder_bin)
    return None


# --- learners ------------------------------------------------------------------


class LearnerBank:
    """The learner set for one trial: one GVF for TD variants, two for GTD."""

    def __init__(self, cfg: SignallingConfig):
        self.cfg = cfg
        self.layout = cfg.layout
        n = self.layout.total_features
        lam = cfg.effective_lambda()
        if cfg.algorithm == "gtd":
            self.configs = [
                gvf.GvfConfig(alpha=GTD_ALPHA, gamma=GAMMA, lam=lam, algorithm="gtd",
                              beta=GTD_BETA, target_direction=1),
                gvf.GvfConfig(alpha=GTD_ALPHA, gamma=GAMMA, lam=lam, algorithm="gtd",
                              beta=GTD_BETA, target_direction=-1),
            ]
        else:
            self.configs = [gvf.GvfConfig(alpha=TD_ALPHA, gamma=GAMMA, lam=lam, algorithm="td")]
        self.states = [gvf.GvfState(n) for _ in self.configs]

    def state_for_direction(self, direction: int) -> gvf.GvfState:
        """GVF consulted for signalling; direction is the last motion direction."""
        if self.cfg.algorithm != "gtd":
            return self.states[0]
        return self.states[0] if direction >= 0 else self.states[1]

    def signal_prediction(
        self,
        shoulder: JointObservation,
        elbow: JointObservation,
        direction_hint: int,
    ) -> float:
        cfg = self.cfg
        if cfg.algorithm == "la_td":
            return gvf.lookahead_predict(
                self.states[0], shoulder, elbow, direction_hint, cfg.lookahead_bins, self.layout
            )
        state = self.state_for_direction(direction_hint)
        return gvf.predict(state, encode(shoulder, elbow, self.layout))

    def update_all(self, c: float, x_now: FeatureVector, direction_now: int) -> None:
        if self.cfg.algorithm == "gtd":
            for state, g in zip(self.states, self.configs):
                rho = gvf.rho_for(direction_now, g.target_direction)
                gvf.gtd_update(state, g, c, x_now, rho)
        else:
            gvf.td_update(self.states[0], self.configs[0], c, x_now)

    def checksum(self) -> str:
        h = hashlib.md5()
        for state in self.states:
            h.update(state.w.tobytes())
        return h.hexdigest()


# --- pilots --------------------------------------------------------------------


class Pilot(Protocol):
    def command(self, tick: int, token_received: bool) -> float: ...

    @property
    def motions_done(self) -> int: ...

    @property
    def phase(self) -> str: ...


class AutomotionPilot:
    """Direct wrapper over the phase-machine sequencer."""

    def __init__(self, cfg: SignallingConfig):
        self._cfg = motion.AutomotionConfig(
            backoff_bins=cfg.backoff_bins,
            settle_ticks=cfg.settle_ticks,
            step_per_tick=cfg.max_step * cfg.pilot_speed,
            bins_per_axis=cfg.bins_per_axis,
            drive_speed=cfg.pilot_speed,
        )
        self._state = motion.AutomotionState()

    def command(self, tick: int, token_received: bool) -> float:
        cmd, self._state = motion.next_command(self._state, token_received, self._cfg)
        return cmd

    @property
    def motions_done(self) -> int:
        return self._state.motions_done

    @property
    def phase(self) -> str:
        return self._state.phase


class ScriptedPilot:
    """Automotion with a human-like reaction delay to each perceived token.

    Tokens arriving while driving are acted on ``reaction`` ticks later,
    with the reaction drawn uniformly from the configured range; sometimes
    attention lapses and the response takes substantially longer.  Tokens
    during backing are dropped, like the sequencer itself does.
    """

    LAPSE_PROB = 0.15
    LAPSE_MS = (450, 750)

    def __init__(self, cfg: SignallingConfig, rng_seed: int):
        self._inner = AutomotionPilot(cfg)
        lo_ms, hi_ms = cfg.pilot_reaction_ms
        self._lo = math.ceil(lo_ms / cfg.tick_ms) if lo_ms else 0
        self._hi = max(self._lo, math.ceil(hi_ms / cfg.tick_ms) if hi_ms else 0)
        self._lapse_lo = math.ceil(self.LAPSE_MS[0] / cfg.tick_ms)
        self._lapse_hi = math.ceil(self.LAPSE_MS[1] / cfg.tick_ms)
        self._rng = np.random.default_rng(rng_seed)
        self._pending: list[int] = []

    def command(self, tick: int, token_received: bool) -> float:
        if token_received and self._inner.phase.startswith("driving"):
            if self._rng.random() < self.LAPSE_PROB:
                delay = int(self._rng.integers(self._lapse_lo, self._lapse_hi + 1))
            else:
                delay = int(self._rng.integers(self._lo, self._hi + 1))
            self._pending.append(tick + delay)
        perceived = any(t <= tick for t in self._pending)
        if perceived:
            self._pending = [t for t in self._pending if t > tick]
        if not self._inner.phase.startswith("driving"):
            self._pending.clear()
        return self._inner.command(tick, perceived)

    @property
    def motions_done(self) -> int:
        return self._inner.motions_done

    @property
    def phase(self) -> str:
        return self._inner.phase


class MotionCounter:
    """Counts back-and-forth round trips from a raw position trajectory.

    A leg completes once the arm has travelled at least ``min_excursion``
    in its direction and then retreats ``hysteresis`` from the extreme.
    A completed right leg followed by a completed left leg is one motion.
    """

    def __init__(self, start: float, min_excursion: float = 0.25, hysteresis: float = 0.0625):
        self.min_excursion = min_excursion
        self.hysteresis = hysteresis
        self._leg = "right"
        self._anchor = start
        self._extreme = start
        self.motions = 0

    def update(self, pos: float) -> None:
        if self._leg == "right":
            self._extreme = max(self._extreme, pos)
            travelled = self._extreme - self._anchor
            if travelled >= self.min_excursion and pos <= self._extreme - self.hysteresis:
                self._leg = "left"
                self._anchor = self._extreme
                self._extreme = pos
        else:
            self._extreme = min(self._extreme, pos)
            travelled = self._anchor - self._extreme
            if travelled >= self.min_excursion and pos >= self._extreme + self.hysteresis:
                self.motions += 1
                self._leg = "right"
                self._anchor = self._extreme
                self._extreme = pos


class ExternalPilot:
    """Pilot driven by an external command source (the gateway mailbox).

    Commands default to rest until the first one arrives; motions are
    counted from the realized trajectory.
    """

    def __init__(self, start_pos: float = 0.5):
        self._latest = 0.0
        self._counter = MotionCounter(start_pos)

    def set_command(self, v: float) -> None:
        self._latest = max(-1.0, min(1.0, float(v)))

    def observe_position(self, pos: float) -> None:
        self._counter.update(pos)

    def command(self, tick: int, token_received: bool) -> float:
        return self._latest

    @property
    def motions_done(self) -> int:
        return self._counter.motions

    @property
    def phase(self) -> str:
        return "human"


class ReplayPilot:
    """Replays the recorded per-tick commands (and counters) verbatim."""

    def __init__(self, events: list[TrialEvent]):
        self._events = events
        self._i = 0

    def command(self, tick: int, token_received: bool) -> float:
        self._i = min(tick, len(self._events) - 1)
        return self._events[self._i].command

    @property
    def motions_done(self) -> int:
        return self._events[self._i].motion_index

    @property
    def phase(self) -> str:
        return self._events[self._i].phase

    @property
    def exhausted(self) -> bool:
        return self._i >= len(self._events) - 1


# --- trial loop ----------------------------------------------------------------


def trial_world_seed(seed: int, trial_index: int) -> int:
    """Stable per-trial derivation of the world noise seed."""
    return seed * 100_003 + trial_index * 31 + 7


def direction_of(vel_obs: float) -> int:
    if vel_obs > 0.5:
        return 1
    if vel_obs < 0.5:
        return -1
    return 0


@dataclass
class TrialRuntime:
    """One live trial: world, learners, pilot and the token delay line."""

    cfg: SignallingConfig
    trial_index: int
    pilot: Pilot
    world: ArmWorld
    learners: LearnerBank
    tick: int = 0
    last_direction: int = 1  # most recent nonzero motion direction
    pending_tokens: list[tuple[int, Token]] = field(default_factory=list)
    prev_contact: bool = False
    prev_token_active: bool = False
    last_dispatched: Optional[Token] = None  # token delivered this tick, if any
    log: TrialLog = field(init=False)

    def __post_init__(self) -> None:
        self.log = TrialLog(trial=self.trial_index, config=self.cfg)

    def step(self) -> TrialEvent:
        """Run one tick of the signalling loop and append its event."""
        cfg = self.cfg
        shoulder, elbow = self.world.observe()
        contact_raw = self.world.contact_raw
        contact = is_contact(contact_raw, self.world.ws)

        direction_now = direction_of(shoulder.velocity)
        if direction_now != 0:
            self.last_direction = direction_now

        prediction = self.learners.signal_prediction(shoulder, elbow, self.last_direction)
        shoulder_bin = bin_index(shoulder.position, cfg.bins_per_axis)
        token = generate_token(contact, prediction, cfg, self.tick, shoulder_bin)
        contact_onset = contact and not self.prev_contact
        if token is not None:
            self.log.tokens_total += 1
            # prediction runs are dispatched once, at their rising edge; the
            # receiver hears sustained contact every tick it persists
            if token.cause == "contact" or not self.prev_token_active:
                self.pending_tokens.append((self.tick + cfg.token_delay_ticks, token))
        self.prev_token_active = token is not None
        if contact_onset:
            self.log.contacts_total += 1
        self.prev_contact = contact

        due = [t for d, t in self.pending_tokens if d <= self.tick]
        self.last_dispatched = due[-1] if due else None
        if due:
            self.pending_tokens = [(d, t) for d, t in self.pending_tokens if d > self.tick]

        command = self.pilot.command(self.tick, bool(due))
        self.world.step(command)
        if isinstance(self.pilot, ExternalPilot):
            self.pilot.observe_position(self.world.state.shoulder_pos)

        x_now = encode(shoulder, elbow, self.learners.layout)
        self.learners.update_all(contact_raw, x_now, direction_now)

        event = TrialEvent(
            tick=self.tick,
            shoulder_pos=shoulder.position,
            shoulder_vel=shoulder.velocity,
            contact_raw=contact_raw,
            prediction=prediction,
            token=token,
            motion_index=self.pilot.motions_done,
            phase=self.pilot.phase,
            command=command,
        )
        self.log.events.append(event)
        self.tick += 1
        return event

    def finish(self) -> TrialLog:
        self.log.motions = self.pilot.motions_done
        self.log.duration_ticks = self.tick
        self.log.weight_checksum = self.learners.checksum()
        return self.log


def make_runtime(
    cfg: SignallingConfig, trial_index: int, pilot: Optional[Pilot] = None
) -> TrialRuntime:
    servo = ServoModel(
        max_step=cfg.max_step,
        jitter_bins=cfg.jitter_bins,
        overshoot_prob=cfg.overshoot_prob,
        rng_seed=trial_world_seed(cfg.seed, trial_index),
        bins_per_axis=cfg.bins_per_axis,
    )
    ws = Workspace(left_wall=cfg.left_wall, right_wall=cfg.right_wall)
    world = ArmWorld(servo, ws)
    if pilot is None:
        if cfg.pilot_reaction_ms != (0, 0):
            pilot = ScriptedPilot(cfg, rng_seed=trial_world_seed(cfg.seed, trial_index) + 1)
        else:
            pilot = AutomotionPilot(cfg)
    return TrialRuntime(cfg=cfg, trial_index=trial_index, pilot=pilot,
                        world=world, learners=LearnerBank(cfg))


def run_trial(cfg: SignallingConfig, trial_index: int = 0,
              pilot: Optional[Pilot] = None) -> TrialLog:
    """Run one trial to its motion target; learners start naive."""
    rt = make_runtime(cfg, trial_index, pilot)
    is_replay = isinstance(rt.pilot, ReplayPilot)
    while True:
        rt.step()
        if is_replay:
            if rt.pilot.exhausted:
                break
        elif rt.pilot.motions_done >= cfg.motions_per_trial:
            break
        if rt.tick >= cfg.max_ticks_per_trial:
            raise RuntimeError(
                f"trial {trial_index} exceeded {cfg.max_ticks_per_trial} ticks "
                f"(motions={rt.pilot.motions_done})"
            )
    return rt.finish()


def run_experiment(cfg: SignallingConfig) -> list[TrialLog]:
    """Run the configured number of trials, weights reset between trials."""
    return [run_trial(cfg, i) for i in range(cfg.trials)]


def replay_trial(log: TrialLog) -> TrialLog:
    """Re-run a recorded trial from its logged commands and config."""
    pilot = ReplayPilot(log.events)
    return run_trial(log.config, log.trial, pilot=pilot)


# --- reporting and persistence ---------------------------------------------------

SUMMARY_HEADER = "trial,algorithm,lambda,lookahead,contacts,tokens,motions,ticks,seed"


def summary_rows(logs: Iterable[TrialLog]) -> list[str]:
    rows = [SUMMARY_HEADER]
    for log in logs:
        cfg = log.config
        rows.append(
            f"{log.trial},{cfg.algorithm},{cfg.effective_lambda()},{cfg.lookahead_bins},"
            f"{log.contacts_total},{log.tokens_total},{log.motions},"
            f"{log.duration_ticks},{cfg.seed}"
        )
    return rows


def raster_rows(logs: Iterable[TrialLog]) -> list[dict]:
    """One row per token plus one per contact onset, ordered by trial then tick."""
    rows: list[dict] = []
    for log in logs:
        ws = Workspace(log.config.left_wall, log.config.right_wall)
        prev_contact = False
        for e in log.events:
            contact = is_contact(e.contact_raw, ws)
            if e.token is not None:
                rows.append({"trial": log.trial, "tick": e.tick, "kind": "token",
                             "cause": e.token.cause, "motion": e.motion_index})
            if contact and not prev_contact:
                rows.append({"trial": log.trial, "tick": e.tick, "kind": "contact",
                             "cause": "contact", "motion": e.motion_index})
            prev_contact = contact
    return rows


def write_trial_log(log: TrialLog, path: str | Path) -> None:
    Path(path).write_text(log.to_jsonl())


def read_trial_log(path: str | Path) -> TrialLog:
    lines = Path(path).read_text().splitlines()
    if not lines:
        raise ValueError(f"{path}: empty log")
    summary = json.loads(lines[-1])["summary"]
    cfg = SignallingConfig.from_dict(summary["config"])
    log = TrialLog(trial=summary["trial"], config=cfg)
    log.events = [TrialEvent.from_dict(json.loads(line)) for line in lines[:-1]]
    log.contacts_total = summary["contacts_total"]
    log.tokens_total = summary["tokens_total"]
    log.motions = summary["motions"]
    log.duration_ticks = summary["duration_ticks"]
    log.weight_checksum = summary["weight_checksum"]
    return log


def contact_onsets(log: TrialLog) -> list[TrialEvent]:
    ws = Workspace(log.config.left_wall, log.config.right_wall)
    onsets = []
    prev = False
    for e in log.events:
        now = is_contact(e.contact_raw, ws)
        if now and not prev:
            onsets.append(e)
        prev = now
    return onsets
