"""Scripted side-to-side pilot: drive until a token, settle, back off, reverse.

Mirrors a waypoint motion sequencer: each excursion drives at full speed
toward one wall until a signalling token arrives (contact or prediction,
treated identically), then the backing phase holds position for a short
settle period before retreating a fixed number of bins and reversing.
One motion is a complete right-and-left round trip including both backoffs.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace

PHASES = ("driving_right", "backing_left", "driving_left", "backing_right")


@dataclass(frozen=True)
class AutomotionConfig:
    backoff_bins: int = 3
    settle_ticks: int = 12  # pause at the reversal point, models sequencer dwell
    step_per_tick: float = 0.004  # nominal full-speed displacement, for distance->ticks
    bins_per_axis: int = 32
    drive_speed: float = 1.0

    def __post_init__(self) -> None:
        if self.backoff_bins < 0:
            raise ValueError("backoff_bins must be >= 0")
        if self.settle_ticks < 0:
            raise ValueError("settle_ticks must be >= 0")

    @property
    def backoff_distance(self) -> float:
        return self.backoff_bins / self.bins_per_axis

    @property
    def backoff_ticks(self) -> int:
        return math.ceil(self.backoff_distance / self.step_per_tick)


@dataclass(frozen=True)
class AutomotionState:
    phase: str = "driving_right"
    motions_done: int = 0
    backoff_remaining: int = 0  # ticks of retreat left in a backing phase
    settle_remaining: int = 0  # ticks of pause before the retreat starts

    def __post_init__(self) -> None:
        if self.phase not in PHASES:
            raise ValueError(f"unknown phase {self.phase!r}")


def _next_phase(phase: str) -> str:
    return PHASES[(PHASES.index(phase) + 1) % len(PHASES)]


def next_command(
    state: AutomotionState, token_received: bool, cfg: AutomotionConfig = AutomotionConfig()
) -> tuple[float, AutomotionState]:
    """Command for this tick plus the successor state.

    Driving phases emit a full-speed command toward the target side and
    leave on a token.  Backing phases ignore tokens: they settle, retreat
    the configured distance, then hand over to the opposite driving phase.
    The motion counter increments when backing_right completes, closing a
    full right+left round trip.
    """
    phase = state.phase

    if phase in ("driving_right", "driving_left"):
        direction = 1.0 if phase == "driving_right" else -1.0
        if token_received:
            new = replace(
                state,
                phase=_next_phase(phase),
                settle_remaining=cfg.settle_ticks,
                backoff_remaining=cfg.backoff_ticks,
            )
            return next_command(new, token_received=False, cfg=cfg)
        return direction * cfg.drive_speed, state

    # backing phases: settle, retreat, then flip to the opposite drive
    direction = -1.0 if phase == "backing_left" else 1.0
    if state.settle_remaining > 0:
        return 0.0, replace(state, settle_remaining=state.settle_remaining - 1)
    if state.backoff_remaining > 0:
        return direction * cfg.drive_speed, replace(
            state, backoff_remaining=state.backoff_remaining - 1
        )
    motions = state.motions_done + (1 if phase == "backing_right" else 0)
    new = AutomotionState(phase=_next_phase(phase), motions_done=motions)
    return next_command(new, token_received=False, cfg=cfg)


def trial_complete(state: AutomotionState, target: int) -> bool:
    """A trial ends once the configured number of round trips is done."""
    if target <= 0:
        raise ValueError("target must be > 0")
    return state.motions_done >= target
