"""Prediction learners: linear TD(lambda) and GTD(lambda) over tile features.

Both learners estimate the discounted future accumulation of a cumulant
signal (here, the contact sensor reading) as the inner product of a weight
vector with the active-tile feature vector.  Updates use replacing
eligibility traces clipped componentwise at 1.

The update equations, in the exact order applied each step:

TD(lambda), on observing cumulant C and new state S:
    delta = C + gamma * w.x(S) - w.x(S_last)
    e     = min(1, x(S_last) + gamma * lambda * e)        (componentwise)
    w    += alpha * delta * e
    S_last = S

GTD(lambda) additionally maintains a secondary weight vector u and gates
the trace by the policy-alignment indicator rho in {0, 1}:
    e     = rho * min(1, x(S_last) + gamma * lambda * e)
    w    += alpha * (delta * e - gamma * (1 - lambda) * (e.u) * x(S))
    u    += beta * (delta * e - (x(S_last).u) * x(S_last))
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .tilecoder import (
    FeatureVector,
    JointObservation,
    TileLayout,
    bin_index,
    encode,
    shift_bin,
    shift_query,
)


@dataclass(frozen=True)
class GvfConfig:
    """Hyperparameters for one prediction learner."""

    alpha: float = 0.1
    gamma: float = 0.9
    lam: float = 0.0
    algorithm: str = "td"  # "td" or "gtd"
    beta: float = 0.01
    target_direction: int | None = None  # GTD target policy: +1 or -1

    def __post_init__(self) -> None:
        if self.alpha <= 0:
            raise ValueError("alpha must be > 0")
        if not 0.0 <= self.gamma < 1.0:
            raise ValueError("gamma must be in [0, 1)")
        if not 0.0 <= self.lam <= 1.0:
            raise ValueError("lambda must be in [0, 1]")
        if self.algorithm not in ("td", "gtd"):
            raise ValueError(f"unknown algorithm {self.algorithm!r}")
        if self.algorithm == "gtd" and self.beta <= 0:
            raise ValueError("beta must be > 0 for gtd")


@dataclass
class GvfState:
    """Mutable learner state; owned by exactly one learning loop."""

    n: int
    w: np.ndarray = field(init=False)
    u: np.ndarray = field(init=False)
    e: np.ndarray = field(init=False)
    last_features: FeatureVector | None = field(init=False, default=None)

    def __post_init__(self) -> None:
        self.w = np.zeros(self.n, dtype=np.float64)
        self.u = np.zeros(self.n, dtype=np.float64)
        self.e = np.zeros(self.n, dtype=np.float64)

    def reset(self) -> None:
        self.w[:] = 0.0
        self.u[:] = 0.0
        self.e[:] = 0.0
        self.last_features = None


class FeatureLengthMismatch(Exception):
    """Feature vector length does not match the learner's weight vector."""


def _indices(state: GvfState, x: FeatureVector) -> list[int]:
    if x.length != state.n:
        raise FeatureLengthMismatch(
            f"feature length {x.length} != learner length {state.n}"
        )
    return list(x.active_indices)


def predict(state: GvfState, x: FeatureVector) -> float:
    """Linear prediction: sum of weights over the active tiles."""
    return float(state.w[_indices(state, x)].sum())


def td_update(state: GvfState, cfg: GvfConfig, c: float, x_now: FeatureVector) -> float:
    """One TD(lambda) step; returns the TD error delta.

    On the very first call there is no previous state, so x(S_last) is the
    zero vector: the step only records S_last and leaves w unchanged.
    """
    now = _indices(state, x_now)
    last = _indices(state, state.last_features) if state.last_features else []

    delta = c + cfg.gamma * state.w[now].sum() - state.w[last].sum()
    state.e *= cfg.gamma * cfg.lam
    # replacing trace: min(1, 1 + decayed) == 1 on the active components
    state.e[last] = 1.0
    state.w += cfg.alpha * delta * state.e
    state.last_features = x_now
    return float(delta)


def gtd_update(
    state: GvfState,
    cfg: GvfConfig,
    c: float,
    x_now: FeatureVector,
    rho: int,
) -> float:
    """One GTD(lambda) step gated by rho in {0, 1}; returns delta.

    With rho = 0 the trace zeroes and w is left bitwise untouched for the
    step; u still takes its correction along x(S_last).
    """
    if rho not in (0, 1):
        raise ValueError("rho must be 0 or 1")
    now = _indices(state, x_now)
    last = _indices(state, state.last_features) if state.last_features else []

    delta = c + cfg.gamma * state.w[now].sum() - state.w[last].sum()
    state.e *= cfg.gamma * cfg.lam
    state.e[last] = 1.0
    if rho == 0:
        state.e[:] = 0.0

    u_dot_last = state.u[last].sum()
    if rho != 0:
        e_dot_u = float(state.e @ state.u)
        state.w += cfg.alpha * delta * state.e
        state.w[now] -= cfg.alpha * cfg.gamma * (1.0 - cfg.lam) * e_dot_u
        state.u += cfg.beta * delta * state.e
    state.u[last] -= cfg.beta * u_dot_last
    state.last_features = x_now
    return float(delta)


def rho_for(direction_now: int, target: int) -> int:
    """Alignment indicator: 1 iff current motion matches the target policy.

    Rest (direction 0) counts as misaligned for a constant-motion target.
    """
    if target not in (1, -1):
        raise ValueError("target must be +1 or -1")
    if direction_now not in (1, 0, -1):
        raise ValueError("direction_now must be -1, 0 or +1")
    return 1 if direction_now == target else 0


def lookahead_predict(
    state: GvfState,
    shoulder: JointObservation,
    elbow: JointObservation,
    direction: int,
    k: int,
    layout: TileLayout = TileLayout(),
) -> float:
    """Prediction for the state k position bins ahead in the motion direction.

    Only the query is shifted; learning continues on unshifted features.
    """
    shifted = shift_query(shoulder, direction, k, layout)
    return predict(state, encode(shifted, elbow, layout))


def lookahead_was_clamped(
    shoulder: JointObservation, direction: int, k: int, layout: TileLayout = TileLayout()
) -> bool:
    """True when the k-bin shift ran into the edge of the grid."""
    bins = layout.bins_per_axis
    b = bin_index(shoulder.position, bins)
    return shift_bin(b, direction, k, bins) != b + direction * k


# --- convergence check on a small cyclic chain -------------------------------
#
# Test utility: run the TD learner around a deterministic cycle with tabular
# one-hot features and compare against the linear-system fixed point
# V(s) = C(s') + gamma * V(s').


def cycle_fixed_point(arrival_cumulants: list[float], gamma: float) -> np.ndarray:
    """Solve the cycle's value function exactly.

    ``arrival_cumulants[s]`` is the cumulant observed on arrival at state s.
    """
    n = len(arrival_cumulants)
    p = np.zeros((n, n))
    r = np.zeros(n)
    for s in range(n):
        nxt = (s + 1) % n
        p[s, nxt] = 1.0
        r[s] = arrival_cumulants[nxt]
    return np.linalg.solve(np.eye(n) - gamma * p, r)


@dataclass(frozen=True)
class ConvergenceResult:
    converged: bool
    sweeps: int
    max_abs_error: float
    weights: np.ndarray
    oracle: np.ndarray


def converge_check(
    arrival_cumulants: list[float],
    cfg: GvfConfig,
    max_sweeps: int = 200_000,
    tol: float = 1e-9,
) -> ConvergenceResult:
    """Run td_update around the cycle until weights settle; report max error.

    Non-convergence within the sweep budget is reported, not raised, so the
    caller can fail with context.
    """
    n = len(arrival_cumulants)
    state = GvfState(n)
    feats = [FeatureVector((s,), n) for s in range(n)]
    oracle = cycle_fixed_point(arrival_cumulants, cfg.gamma)

    s = 0
    sweeps = 0
    converged = False
    while sweeps < max_sweeps:
        w_before = state.w.copy()
        for _ in range(n):
            nxt = (s + 1) % n
            td_update(state, cfg, arrival_cumulants[nxt], feats[nxt])
            s = nxt
        sweeps += 1
        if np.max(np.abs(state.w - w_before)) < tol:
            converged = True
            break

    max_err = float(np.max(np.abs(state.w - oracle)))
    return ConvergenceResult(converged, sweeps, max_err, state.w.copy(), oracle)
