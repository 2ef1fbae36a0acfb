"""Arm world kinematics, contact sensing, servo play and config parsing."""

import numpy as np
import pytest

from armsignal.world import (
    ArmState,
    ArmWorld,
    ServoModel,
    Workspace,
    contact_reading,
    is_contact,
    load_world_config,
    observation,
    velocity_obs,
    world_from_config,
)


def make_world(pos=0.5, **servo_kw) -> ArmWorld:
    world = ArmWorld(ServoModel(**servo_kw), Workspace())
    world.state = ArmState(shoulder_pos=pos)
    return world


def test_step_basic_kinematics():
    w = make_world(pos=0.5, max_step=0.005)
    state, contact = w.step(1.0)
    assert state.shoulder_pos == pytest.approx(0.505)
    assert contact == 0.0


def test_step_into_wall_reads_full_scale():
    world = ArmWorld(ServoModel(max_step=0.005), Workspace(left_wall=0.05, right_wall=0.95))
    world.state = ArmState(shoulder_pos=0.949)
    state, contact = world.step(1.0)
    assert state.shoulder_pos == pytest.approx(0.954)
    assert contact == 1023.0


def test_contact_threshold_sweep():
    # the sensor flips exactly where the position crosses a wall
    ws = Workspace(left_wall=0.05, right_wall=0.95)
    for pos in np.linspace(0.0, 1.0, 2001):
        expected = 1023.0 if (pos <= 0.05 or pos >= 0.95) else 0.0
        assert contact_reading(float(pos), ws) == expected


def test_rest_command_is_identity():
    w = make_world(pos=0.3)
    before = w.state
    state, contact = w.step(0.0)
    assert state.shoulder_pos == before.shoulder_pos
    assert state.shoulder_vel == 0.5
    assert contact == 0.0


def test_is_contact_strict_inequality():
    ws = Workspace()
    assert is_contact(1023.0, ws)
    assert not is_contact(0.0, ws)
    assert not is_contact(512.0, ws)  # boundary pinned: strictly above
    assert is_contact(512.1, ws)


def test_velocity_observation_mapping():
    assert velocity_obs(0.0, 0.004) == 0.5
    assert velocity_obs(0.004, 0.004) == 1.0
    assert velocity_obs(-0.002, 0.004) == 0.25  # half-speed left
    assert velocity_obs(0.05, 0.004) == 1.0  # clamped


def test_observation_pairs():
    state = ArmState(shoulder_pos=0.7, shoulder_vel=1.0)
    sh, el = observation(state)
    assert sh.position == 0.7
    assert sh.velocity == 1.0
    assert el.position == 0.5
    assert el.velocity == 0.5


def test_positions_never_leave_unit_interval():
    w = make_world(pos=0.98, max_step=0.05, jitter_bins=2, rng_seed=9)
    rng = np.random.default_rng(0)
    for _ in range(2000):
        state, _ = w.step(float(rng.uniform(-1, 1)))
        assert 0.0 <= state.shoulder_pos <= 1.0


def test_noiseless_trajectories_reproduce():
    def run():
        w = make_world(pos=0.5, jitter_bins=0, overshoot_prob=0.0)
        return [w.step(c)[0].shoulder_pos for c in ([1.0] * 50 + [-1.0] * 30 + [0.0] * 5)]
    assert run() == run()


def test_seeded_noisy_trajectories_reproduce():
    def run(seed):
        w = make_world(pos=0.5, jitter_bins=1, overshoot_prob=0.3, rng_seed=seed)
        cmds = [1.0] * 40 + [-1.0] * 20 + [0.0] * 10 + [1.0] * 15
        return [w.step(c)[0].shoulder_pos for c in cmds]
    assert run(7) == run(7)
    assert run(7) != run(8)


def test_creep_continues_old_direction_within_bounds():
    w = make_world(pos=0.5, max_step=0.004, jitter_bins=1, rng_seed=1)
    for _ in range(20):
        w.step(1.0)
    pos_before = w.state.shoulder_pos
    drift_total = 0.0
    prev = pos_before
    # command reverses; any creep keeps moving right before the reversal bites
    for _ in range(30):
        state, _ = w.step(-1.0)
        step = state.shoulder_pos - prev
        assert abs(step) <= 0.004 + 1e-12  # per-tick drift never exceeds one step
        if step > 0:
            drift_total += step
        prev = state.shoulder_pos
    assert drift_total <= 1 / 32 + 1e-12  # total drift bounded by jitter_bins bins


def test_zero_jitter_never_creeps():
    w = make_world(pos=0.5, jitter_bins=0)
    for _ in range(10):
        w.step(1.0)
    state, _ = w.step(-1.0)
    assert state.shoulder_pos < 0.5 + 10 * 0.004  # immediately reverses


def test_overshoot_adds_one_step_on_stop():
    w = make_world(pos=0.5, max_step=0.004, overshoot_prob=1.0, rng_seed=0)
    for _ in range(5):
        w.step(1.0)
    pos = w.state.shoulder_pos
    state, _ = w.step(0.0)
    assert state.shoulder_pos == pytest.approx(pos + 0.004)


def test_servo_model_validation():
    with pytest.raises(ValueError):
        ServoModel(max_step=0.0)
    with pytest.raises(ValueError):
        ServoModel(jitter_bins=-1)
    with pytest.raises(ValueError):
        ServoModel(overshoot_prob=1.5)
    with pytest.raises(ValueError):
        Workspace(left_wall=0.9, right_wall=0.1)


def test_world_config_roundtrip(tmp_path):
    cfg = tmp_path / "world.cfg"
    cfg.write_text(
        "# workspace geometry\n"
        "tick_ms = 25\n"
        "max_step = 0.004\n"
        "left_wall = 0.04\n"
        "right_wall = 0.96\n"
        "jitter_bins = 1\n"
        "overshoot_prob = 0.0\n"
        "seed = 42\n"
    )
    values = load_world_config(cfg)
    assert values["tick_ms"] == 25
    assert values["jitter_bins"] == 1
    world = world_from_config(values)
    assert world.servo.max_step == 0.004
    assert world.ws.right_wall == 0.96
    assert world.servo.rng_seed == 42


def test_world_config_rejects_unknown_keys(tmp_path):
    cfg = tmp_path / "world.cfg"
    cfg.write_text("warp_speed = 9\n")
    with pytest.raises(ValueError):
        load_world_config(cfg)


def test_world_config_rejects_malformed_lines(tmp_path):
    cfg = tmp_path / "world.cfg"
    cfg.write_text("max_step 0.004\n")
    with pytest.raises(ValueError):
        load_world_config(cfg)
