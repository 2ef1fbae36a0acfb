"""Pavlovian contact-warning signalling for a simulated robot arm."""

from .gvf import (
    GvfConfig,
    GvfState,
    converge_check,
    gtd_update,
    lookahead_predict,
    predict,
    rho_for,
    td_update,
)
from .harness import (
    SignallingConfig,
    Token,
    TrialEvent,
    TrialLog,
    generate_token,
    replay_trial,
    run_experiment,
    run_trial,
)
from .tilecoder import FeatureVector, JointObservation, TileLayout, bin_index, encode, shift_query
from .world import ArmState, ArmWorld, ServoModel, Workspace, is_contact

__all__ = [
    "ArmState",
    "ArmWorld",
    "FeatureVector",
    "GvfConfig",
    "GvfState",
    "JointObservation",
    "ServoModel",
    "SignallingConfig",
    "TileLayout",
    "Token",
    "TrialEvent",
    "TrialLog",
    "Workspace",
    "bin_index",
    "converge_check",
    "encode",
    "generate_token",
    "gtd_update",
    "is_contact",
    "lookahead_predict",
    "predict",
    "replay_trial",
    "rho_for",
    "run_experiment",
    "run_trial",
    "shift_query",
    "td_update",
]
