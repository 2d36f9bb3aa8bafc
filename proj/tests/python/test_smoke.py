"""Smoke tests for the aotdiff Python bindings."""

import math

import pytest

import aotdiff


def test_hungarian_matches_brute_force():
    cost = [[4.0, 1.0, 3.0], [2.0, 0.0, 5.0], [3.0, 2.0, 2.0]]
    perm, total = aotdiff.hungarian_solve(cost)
    _, brute_total = aotdiff.brute_force_solve(cost)
    assert sorted(perm) == [0, 1, 2]
    assert total == pytest.approx(brute_total, abs=1e-12)
    assert aotdiff.assignment_cost(cost, perm) == pytest.approx(total, abs=1e-12)


def test_bad_cost_matrix_raises():
    with pytest.raises(ValueError):
        aotdiff.hungarian_solve([[1.0, 2.0], [3.0]])


def test_pairing_beats_identity():
    points, _ = aotdiff.make_mixture([[0.0, 0.0]], 1.0, 64, seed=1)
    noises, _ = aotdiff.make_mixture([[0.0, 0.0]], 1.0, 64, seed=2)
    selected, aot_cost = aotdiff.pair_noise(points, noises)
    identity_cost = sum(
        math.dist(p, e) for p, e in zip(points, noises)
    )
    assert aot_cost <= identity_cost
    assert sorted(map(tuple, selected)) == sorted(map(tuple, noises))


def test_timesteps_shape_and_endpoints():
    ts = aotdiff.timesteps(18, rho=7.0)
    assert len(ts) == 19
    assert ts[0] == pytest.approx(80.0, rel=1e-9)
    assert ts[17] == pytest.approx(0.002, rel=1e-9)
    assert ts[18] == 0.0
    assert all(a > b for a, b in zip(ts, ts[1:]))


def test_loss_weight_value():
    assert aotdiff.loss_weight(1.0, 1.0) == 2.0


def test_heun_nfe_and_point_mass_endpoint():
    oracle = aotdiff.AnalyticDenoiser.point_mass([1.5, -0.5])
    traj = aotdiff.heun_sample_oracle(oracle, n=14, rho=7.0, x_init=[40.0, -40.0])
    assert traj.nfe == 27
    assert traj.endpoint == [1.5, -0.5]
    report = aotdiff.curvature(traj)
    assert report["tangent_curvature"] < 1e-12


def test_empirical_w2_translation():
    a, _ = aotdiff.make_mixture([[0.0, 0.0]], 1.0, 32, seed=3)
    b = [[x + 1.0, y] for x, y in a]
    assert aotdiff.empirical_w2(a, b) == pytest.approx(1.0, abs=1e-12)


def test_train_smoke():
    points, _ = aotdiff.make_mixture([[0.4, -0.3]], 1e-9, 128, seed=4)
    config = (
        '{"pairs": 32, "minibatch": 16, "refreshes": 40, '
        '"hidden": [16, 16], "embed_frequencies": 4, "seed": 5}'
    )
    model, losses = aotdiff.train(config, points)
    assert len(losses) == 40
    assert losses[-1] < losses[0]
    out = model.denoise([0.4, -0.3], 0.1)
    assert len(out) == 2
    traj = model.heun_sample(n=8, rho=7.0, x_init=[12.0, 9.0])
    assert traj.nfe == 15
