"""Deterministic fixed-tick simulation of the arm and its workspace.

The shoulder servo moves along a normalized [0, 1] axis inside a walled
workspace; conductive strips at both walls drive an analog contact sensor
(full-scale 1023).  The elbow is held at mid-range but stays part of the
observation.  All randomness (servo play) flows from a single seeded
generator, so identical seeds give identical trajectories.

Servo play is modeled as a creep applied when the commanded direction
changes: the arm keeps sliding in the direction it was moving, at full
speed, until it has covered a drift distance drawn uniformly from
(0, jitter_bins] bins, the way a loaded gear train keeps going at a stop.
The total drift never exceeds jitter_bins bins and the per-tick
displacement never exceeds one step.  Optionally the servo can also
overshoot a stop command by one full step with probability
``overshoot_prob``.
"""

from __future__ import annotations

from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .tilecoder import JointObservation, clamp01


@dataclass(frozen=True)
class Workspace:
    left_wall: float = 0.04
    right_wall: float = 0.96
    contact_high: float = 1023.0
    contact_detect_threshold: float = 512.0

    def __post_init__(self) -> None:
        if not 0.0 <= self.left_wall < self.right_wall <= 1.0:
            raise ValueError("walls must satisfy 0 <= left < right <= 1")


@dataclass(frozen=True)
class ServoModel:
    max_step: float = 0.004  # normalized distance per tick at full command
    jitter_bins: int = 0
    overshoot_prob: float = 0.0
    rng_seed: int = 0
    bins_per_axis: int = 32  # bin width used to scale jitter

    def __post_init__(self) -> None:
        if self.max_step <= 0:
            raise ValueError("max_step must be > 0")
        if self.jitter_bins < 0:
            raise ValueError("jitter_bins must be >= 0")
        if not 0.0 <= self.overshoot_prob <= 1.0:
            raise ValueError("overshoot_prob must be in [0, 1]")


@dataclass(frozen=True)
class ArmState:
    shoulder_pos: float = 0.5
    shoulder_vel: float = 0.5  # normalized: 0.5 = rest
    elbow_pos: float = 0.5
    elbow_vel: float = 0.5
    tick: int = 0


def is_contact(contact_raw: float, ws: Workspace) -> bool:
    """Contact is declared strictly above the detection threshold."""
    return contact_raw > ws.contact_detect_threshold


def contact_reading(pos: float, ws: Workspace) -> float:
    """Analog sensor value for a shoulder position."""
    if pos <= ws.left_wall or pos >= ws.right_wall:
        return ws.contact_high
    return 0.0


def velocity_obs(displacement: float, max_step: float) -> float:
    """Map a realized per-tick displacement onto the [0, 1] velocity scale."""
    return clamp01(0.5 + 0.5 * (displacement / max_step))


def observation(state: ArmState) -> tuple[JointObservation, JointObservation]:
    """(shoulder, elbow) observation pair for the current state."""
    return (
        JointObservation(state.shoulder_pos, state.shoulder_vel),
        JointObservation(state.elbow_pos, state.elbow_vel),
    )


class ArmWorld:
    """Owns the arm state and steps it once per harness tick."""

    def __init__(self, servo: ServoModel = ServoModel(), ws: Workspace = Workspace()):
        self.servo = servo
        self.ws = ws
        self.state = ArmState()
        self._rng = np.random.default_rng(servo.rng_seed)
        self._prev_dir = 0  # sign of the previous tick's command
        self._creep_dir = 0
        self._creep_left = 0.0  # remaining creep distance

    def step(self, command: float) -> tuple[ArmState, float]:
        """Advance one tick under ``command`` in [-1, 1].

        Returns the new state and the raw contact reading at it.
        """
        command = max(-1.0, min(1.0, command))
        cmd_dir = 0 if command == 0.0 else (1 if command > 0 else -1)
        servo = self.servo
        pos = self.state.shoulder_pos

        # servo play: a command reversal starts a creep that carries the arm
        # onward in the old direction before the new command engages
        if (
            cmd_dir != self._prev_dir
            and self._prev_dir != 0
            and servo.jitter_bins > 0
            and self._creep_left <= 0.0
        ):
            drift_bins = float(self._rng.uniform(0.0, servo.jitter_bins))
            self._creep_dir = self._prev_dir
            self._creep_left = drift_bins / servo.bins_per_axis

        if self._creep_left > 0.0:
            step_len = min(servo.max_step, self._creep_left)
            displacement = self._creep_dir * step_len
            self._creep_left -= step_len
        else:
            displacement = command * servo.max_step
            # overshoot: one extra step of the old motion on a stop command
            if (
                cmd_dir == 0
                and self._prev_dir != 0
                and servo.overshoot_prob > 0.0
                and self._rng.random() < servo.overshoot_prob
            ):
                displacement += self._prev_dir * servo.max_step

        new_pos = clamp01(pos + displacement)
        realized = new_pos - pos
        new_state = ArmState(
            shoulder_pos=new_pos,
            shoulder_vel=velocity_obs(realized, servo.max_step),
            elbow_pos=self.state.elbow_pos,
            elbow_vel=0.5,
            tick=self.state.tick + 1,
        )
        self.state = new_state
        self._prev_dir = cmd_dir
        return new_state, contact_reading(new_pos, self.ws)

    def observe(self) -> tuple[JointObservation, JointObservation]:
        return observation(self.state)

    @property
    def contact_raw(self) -> float:
        return contact_reading(self.state.shoulder_pos, self.ws)


# --- plain-text configuration -------------------------------------------------
#
# Documented key set (one `key = value` per line, '#' comments allowed):
#   tick_ms, max_step, left_wall, right_wall, jitter_bins, overshoot_prob, seed

_WORLD_KEYS = {
    "tick_ms",
    "max_step",
    "left_wall",
    "right_wall",
    "jitter_bins",
    "overshoot_prob",
    "seed",
}


def load_world_config(path: str | Path) -> dict:
    """Parse a key/value world config file into a plain dict."""
    values: dict = {}
    for lineno, raw in enumerate(Path(path).read_text().splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ValueError(f"{path}:{lineno}: expected 'key = value'")
        key, _, val = line.partition("=")
        key = key.strip()
        if key not in _WORLD_KEYS:
            raise ValueError(f"{path}:{lineno}: unknown key {key!r}")
        val = val.strip()
        values[key] = int(val) if key in ("tick_ms", "jitter_bins", "seed") else float(val)
    return values


def world_from_config(values: dict) -> ArmWorld:
    servo = ServoModel(
        max_step=values.get("max_step", ServoModel.max_step),
        jitter_bins=values.get("jitter_bins", ServoModel.jitter_bins),
        overshoot_prob=values.get("overshoot_prob", ServoModel.overshoot_prob),
        rng_seed=values.get("seed", ServoModel.rng_seed),
    )
    ws = Workspace(
        left_wall=values.get("left_wall", Workspace.left_wall),
        right_wall=values.get("right_wall", Workspace.right_wall),
    )
    return ArmWorld(servo, ws)
