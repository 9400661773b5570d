import itertools
import json

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from oracles import straight_cost
from sfnash.disaggregation import MixedProfile, randomized_disaggregate, sf_disaggregate
from sfnash.envelope import GeneratorWitness
from sfnash.functions import FunctionSpec
from sfnash.game import AuxiliaryGame, Game, cost
from sfnash.metrics import (additive_epsilon, auxiliary_report, best_response, mixed_bound, mixed_epsilon,
                            relative_epsilon, relative_gap, stability_slack, sweeps_required, theorem_bound)
from sfnash.random_instances import random_aux, random_game
from sfnash.solver import SolverConfig, run

Z = FunctionSpec.zero()
seeds = st.integers(0, 2 ** 32 - 1)


def two_by_two(g=FunctionSpec.affine(0, 1)):
    return Game([1, 1], [[0, 1], [0, 1]], [g], [Z, Z], [[0, 0], [0, 0]])


def test_best_response_trivial_cases():
    g = Game([1, 1], [[0.3], [0, 1]], [FunctionSpec.affine(0, 1)], [Z, Z], [[0], [0, 0]])
    assert best_response(g, 0, [0.3, 1])[0][0] == 0.3
    dec = Game([1], [[0, 1, 2]], [Z], [Z], [[3, -1, 2]])
    point, value = best_response(dec, 0, [0])
    assert point[0] == 1 and value == -1


def test_best_response_ties_go_to_smaller_index():
    dec = Game([1], [[0, 1, 2]], [Z], [Z], [[1, 0, 0]])
    assert best_response(dec, 0, [0])[0][0] == 1


@settings(max_examples=30, deadline=None)
@given(st.integers(1, 2), seeds)
def test_best_response_matches_double_loop(d, seed):
    rng = np.random.default_rng(seed)
    game = random_game(rng, 4, d=d, price_kind="pwl")
    x = np.array([s[rng.integers(len(s))] for s in game.action_sets])
    rep = additive_epsilon(game, x)
    for i in range(4):
        vals = []
        for y in game.action_sets[i]:
            xy = x.copy()
            xy[i] = y
            vals.append(straight_cost(game, i, xy.tolist()))
        point, value = best_response(game, i, x)
        assert value == pytest.approx(min(vals), abs=1e-12)
        np.testing.assert_array_equal(point, game.action_sets[i][int(np.argmin(vals))])
        # no enumerated alternative beats the reported best response
        assert min(vals) >= rep.best_cost[i] - 1e-12
        assert rep.current_cost[i] == pytest.approx(straight_cost(game, i, x.tolist()), abs=1e-12)
        assert rep.worst_cost[i] == pytest.approx(max(vals), abs=1e-12)


def test_additive_examples():
    rep = additive_epsilon(two_by_two(), [1, 1])
    assert rep.additive_eps == pytest.approx(1.0)
    dec = Game([1, 1], [[0, 1], [0, 1]], [Z], [Z, Z], [[2, 1], [0, 3]])
    assert additive_epsilon(dec, [1, 0]).additive_eps == 0


def test_relative_examples():
    assert relative_epsilon(two_by_two(), [0, 0]) == 0
    assert relative_epsilon(two_by_two(), [1, 1]) == 1
    flat = Game([1], [[0, 1]], [Z], [Z], [[0, 0]])
    assert relative_epsilon(flat, [1]) == 0


@settings(max_examples=30, deadline=None)
@given(seeds, st.floats(-10, 10), st.floats(0.01, 100))
def test_invariances(seed, shift, scale):
    rng = np.random.default_rng(seed)
    game = random_game(rng, 5)
    x = np.array([s[rng.integers(len(s))] for s in game.action_sets])
    base = additive_epsilon(game, x)
    # a constant added to every h_i shifts all costs equally
    shifted = Game(game.weights, game.action_sets, game.g,
                   [FunctionSpec.affine(h.coefficients[0] + shift, h.coefficients[1]) for h in game.h], game.r)
    rep = additive_epsilon(shifted, x)
    assert rep.additive_eps == pytest.approx(base.additive_eps, abs=1e-9)
    np.testing.assert_allclose(rep.gaps, base.gaps, atol=1e-9)
    assert rep.additive_eps >= 0 and 0 <= rep.relative_eps <= 1
    assert np.all(rep.gaps >= -1e-12)
    costs = rng.normal(size=6)
    k = int(rng.integers(6))
    assert relative_gap(scale * costs + shift, k) == pytest.approx(relative_gap(costs, k), abs=1e-9)


def test_mixed_with_singletons_equals_additive():
    rng = np.random.default_rng(3)
    game = random_game(rng, 6)
    x = np.array([s[rng.integers(len(s))] for s in game.action_sets])
    mixed = MixedProfile(tuple(xi[None, :] for xi in x), tuple(np.ones(1) for _ in x))
    est, half = mixed_epsilon(game, mixed, samples=100, seed=0)
    assert est == additive_epsilon(game, x).additive_eps
    assert half == 0


def test_mixed_uniform_against_exact_expectation():
    game = Game([1, 1], [[0, 1], [0, 1]], [FunctionSpec.affine(0.2, 1)], [FunctionSpec.affine(0, 0.3)] * 2,
                [[0.1, 0], [0, 0.4]])
    pts = np.array([[0.0], [1.0]])
    mixed = MixedProfile((pts, pts), (np.array([0.5, 0.5]),) * 2)
    exact = -np.inf
    for i in range(2):
        for y in (0.0, 1.0):
            gain = 0.0
            for outcome in itertools.product((0.0, 1.0), repeat=2):
                xs = np.array(outcome)
                xy = xs.copy()
                xy[i] = y
                gain += 0.25 * (cost(game, i, xs) - cost(game, i, xy))
            exact = max(exact, gain)
    est, half = mixed_epsilon(game, mixed, samples=20_000, seed=5)
    assert abs(est - max(exact, 0)) <= half + 1e-3
    with pytest.raises(ValueError):
        mixed_epsilon(game, mixed, samples=50)


def test_stability_slack_trivial_cases():
    # one free player whose two actions tie under the anchored price
    p = 0.7
    game = Game([1, 1], [[0, 1], [0.2]], [FunctionSpec.affine(p - 0.1, 1)], [Z, Z], [[0, -p], [0]])
    aux = AuxiliaryGame(game)
    x = np.array([[0.5], [0.2]])
    assert aux.anchored_price(x)[0, 0] == pytest.approx(p)
    wits = [GeneratorWitness(np.array([[0.0], [1.0]]), np.array([0.5, 0.5]), np.array([0.0, -p])),
            GeneratorWitness.singleton([0.2], 0.0)]
    assert stability_slack(aux, x, wits) <= 1e-9
    rng = np.random.default_rng(0)
    aux = random_aux(rng, 5)
    x = np.array([s[0] for s in aux.base.action_sets])
    single = [GeneratorWitness.singleton(xi, 0.0) for xi in x]
    assert stability_slack(aux, x, single) == 0


@settings(max_examples=20, deadline=None)
@given(st.integers(1, 20), st.integers(1, 2), seeds)
def test_stability_slack_at_kstar(n, d, seed):
    rng = np.random.default_rng(seed)
    aux = random_aux(rng, n, d=d)
    rep = run(aux, SolverConfig(K=15))
    assert stability_slack(aux, rep.x_kstar, rep.witnesses) <= rep.eta_kstar + 1e-6


@pytest.mark.parametrize("seed", range(4))
def test_pipeline_bounds_on_tiny_instances(seed):
    rng = np.random.default_rng(seed)
    n = int(rng.integers(2, 7))
    aux = random_aux(rng, n, k_min=2, k_max=2)
    game = aux.base
    c = game.constants
    rep = run(aux, SolverConfig(K=sweeps_required(c, 0.5), keep_trajectory=False))
    x = rep.x_kstar
    dis = sf_disaggregate(x, rep.witnesses, game.weights, Delta=c.Delta)
    assert additive_epsilon(game, dis.actions).additive_eps <= theorem_bound(c, 0.5)
    mixed, _ = randomized_disaggregate(rep.witnesses, seed=seed)
    est, half = mixed_epsilon(game, mixed, samples=2000, seed=seed)
    assert est <= mixed_bound(c, 0.5) + half


def test_auxiliary_report_on_decoupled_game_matches():
    dec = Game([1, 1], [[0, 1], [0, 1]], [Z], [Z, Z], [[2, 1], [0, 3]])
    aux = AuxiliaryGame(dec)
    assert auxiliary_report(aux, [0, 0]).additive_eps == 1
    assert auxiliary_report(aux, [1, 0]).additive_eps == 0


def test_report_serialisation(tmp_path):
    rep = additive_epsilon(two_by_two(), [1, 0], theory_bound=2.0)
    rep.save(tmp_path / "r.json", tmp_path / "r.csv")
    doc = json.loads((tmp_path / "r.json").read_text())
    assert doc["theory_bound"] == 2.0 and doc["additive_eps"] == rep.additive_eps
    lines = (tmp_path / "r.csv").read_text().splitlines()
    assert lines[0] == "player,current,best,worst,gap,relative_gap" and len(lines) == 3
