import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st
from scipy.special import i0, i1, iv

from sfnash.ev import (EVParams, beta_int, build_game, peak_fraction, peak_overlap, run_experiment,
                       sample_instance, von_mises)
from sfnash.rng import derive_seed, make_rng


def overlap_by_grid(start, end, peak, dt=1e-4):
    t = np.arange(start, end, dt) + dt / 2
    hour = np.mod(t, 24.0)
    return float(np.sum((hour >= peak[0]) & (hour < peak[1])) * dt)


def test_hand_example():
    p = EVParams()
    assert 32 / 7 == pytest.approx(4.571, abs=1e-3)
    assert peak_overlap(18, 18 + 32 / 7, p.peak_window) == pytest.approx(4.0)
    assert peak_fraction(18, 0.2, 7, p) == pytest.approx(0.7, abs=1e-12)
    assert peak_fraction(18, 0.2, 3.7, p) == pytest.approx(3.7 * 4 / 40, abs=1e-12)


@settings(max_examples=40, deadline=None)
@given(st.floats(0, 48), st.floats(0, 30))
def test_overlap_matches_grid(start, length):
    assert peak_overlap(start, start + length, (6, 22)) == pytest.approx(
        overlap_by_grid(start, start + length, (6, 22)), abs=2e-3)


def test_equal_powers_collapse_actions():
    inst = sample_instance(EVParams(p_min=5.0, p_max=5.0), 20, 1)
    np.testing.assert_array_equal(inst.x_low, inst.x_high)
    game = build_game(inst)
    assert all(len(s) == 1 for s in game.action_sets)


def test_instance_is_deterministic():
    a = sample_instance(EVParams(), 30, 123).to_dict()
    b = sample_instance(EVParams(), 30, 123).to_dict()
    assert a == b
    assert a != sample_instance(EVParams(), 30, 124).to_dict()


def test_instance_invariants():
    p = EVParams()
    inst = sample_instance(p, 500, 2)
    assert np.all((inst.tau > 0) & (inst.tau < 1))
    assert np.all((0 <= inst.x_low) & (inst.x_low <= inst.x_high) & (inst.x_high <= 1))
    assert np.all((17 <= inst.arrival) & (inst.arrival <= 19))
    assert np.all((31 <= inst.departure) & (inst.departure <= 33))
    assert np.all(inst.arrival + (1 - inst.tau) * p.e / p.p_max <= inst.departure)
    game = build_game(inst)
    assert np.all((0 < game.weights) & (game.weights < 1))
    assert game.constants.m > 0


@pytest.mark.parametrize("n", [1, 2, 64, 1000, 2 ** 15])
def test_tariff_difference_is_constant(n):
    p = EVParams()
    assert (p.alpha0P(n) - p.alpha0OP(n)) / n == pytest.approx(2.36, abs=1e-12)


def test_ev_price_function():
    game = build_game(sample_instance(EVParams(), 64, 0))
    assert game.g[0].scalar(0.5) == pytest.approx(2.36, abs=1e-12)
    assert game.constants.L_g == pytest.approx(23.6, abs=1e-12)
    # h(y) = a_OP/n + beta0 e (1 - y)
    p = EVParams()
    assert game.h[0].scalar(0.25) == pytest.approx(p.alpha0OP(64) / 64 + 0.295 * 40 * 0.75)
    inst = sample_instance(EVParams(), 64, 0)
    k = int(np.flatnonzero(inst.x_low < inst.x_high)[0])
    assert game.r[k][0] == pytest.approx((inst.x_low[k] - inst.x_high[k]) ** 2 / (1 - inst.tau[k]))
    assert game.r[k][1] == 0


def test_von_mises_moments():
    rng = make_rng(derive_seed(1, 2))
    kappa = 1.0
    th = np.array([von_mises(rng, kappa) for _ in range(100_000)])
    assert np.all(np.abs(th) <= math.pi)
    # circular mean: E sin = 0; E cos = I1/I0
    sd = math.sqrt(0.5 * (1 - iv(2, kappa) / i0(kappa)))  # Var(sin) for mean direction 0
    assert abs(np.sin(th).mean()) <= 3 * sd / math.sqrt(th.size)
    assert abs(np.cos(th).mean() - i1(kappa) / i0(kappa)) <= 3 * np.cos(th).std() / math.sqrt(th.size)


def test_beta_mean():
    rng = make_rng(7)
    x = np.array([beta_int(rng, 2, 5) for _ in range(100_000)])
    var = 2 * 5 / (7 ** 2 * 8)
    assert abs(x.mean() - 2 / 7) <= 3 * math.sqrt(var / x.size)


def test_infeasible_parameters_raise():
    with pytest.raises(ValueError):
        sample_instance(EVParams(e=2000.0), 3, 0)


def test_params_validation_and_round_trip():
    with pytest.raises(ValueError):
        EVParams(p_min=8.0)
    with pytest.raises(ValueError):
        EVParams.from_dict({"bogus": 1})
    p = EVParams.full_scale(seed=3)
    assert p.n_grid[-1] == 2 ** 15 and p.instances == 50
    assert EVParams.from_dict(p.to_dict()) == p


def test_smoke_experiment():
    res = run_experiment(EVParams(n_grid=(2,), instances=1, K=1))
    assert [(r["n"], r["k"]) for r in res.rows] == [(2, 1)]
    assert res.to_csv().splitlines()[0].startswith("instance_id,n,k,relative_eps,additive_eps,deviation,omega")


def test_failures_are_recorded():
    res = run_experiment(EVParams(n_grid=(2,), instances=2, K=1, e=2000.0))
    assert len(res.failures) == 2 and res.rows == []


def test_experiment_bytes_repeat_and_ignore_jobs(tmp_path):
    p = EVParams(n_grid=(4, 8), instances=3, K=5, seed=17)
    a = run_experiment(p)
    b = run_experiment(p, jobs=2)
    assert a.to_csv() == b.to_csv() and a.plot_csv() == b.plot_csv()
    paths = a.save(tmp_path)
    assert open(paths["plot"]).readline().startswith("n,k,count,mean_relative_eps")
