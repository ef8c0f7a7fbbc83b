import dataclasses
import random

import pytest

from intersim.config import ScenarioConfig
from intersim.game import (
    ActuationLimits,
    CalibrationObjective,
    ScPolicy,
    action_from_decision,
    calibrate_weights,
    pure_nash,
    select_decision,
)
from intersim.sim import ScenarioSampler, run_episode
from intersim.utilities import (
    PROFILES,
    GameWeights,
    Strategy,
    StrategyProfile,
    UtilityEntry,
    UtilityMatrix,
)

Y, N = Strategy.YIELD, Strategy.NOT_YIELD


def matrix(payoffs, f_theta=1.0):
    """payoffs: {(av, hv): (u_av, u_hv)} in Table row/column order."""
    entries = {StrategyProfile(m, n): UtilityEntry(u_av=u1, u_hv=u2,
                                                   components={"u_s": 0.0})
               for (m, n), (u1, u2) in payoffs.items()}
    return UtilityMatrix(entries=entries, f_theta=f_theta)


def brute_force_nash(m):
    """Independent best-response enumeration over the four profiles."""
    out = []
    for p in PROFILES:
        best_av = max(m.u_av(s, p.hv) for s in (Y, N))
        best_hv = max(m.u_hv(p.av, s) for s in (Y, N))
        if m.u_av(p.av, p.hv) >= best_av and m.u_hv(p.av, p.hv) >= best_hv:
            out.append(p)
    return out


class TestPureNash:
    def test_prisoners_dilemma_shape(self):
        m = matrix({(Y, Y): (3, 3), (Y, N): (0, 5),
                    (N, Y): (5, 0), (N, N): (1, 1)})
        assert pure_nash(m) == [StrategyProfile(N, N)]

    def test_all_equal_payoffs_all_equilibria(self):
        m = matrix({p2: (1.0, 1.0) for p2 in [(Y, Y), (Y, N), (N, Y), (N, N)]})
        assert len(pure_nash(m)) == 4

    def test_chicken_shape_off_diagonal(self):
        m = matrix({(Y, Y): (2, 2), (Y, N): (1, 3),
                    (N, Y): (3, 1), (N, N): (0, 0)})
        eqs = pure_nash(m)
        assert set(eqs) == {StrategyProfile(Y, N), StrategyProfile(N, Y)}

    def test_matches_brute_force_on_random_matrices(self):
        rng = random.Random(1234)
        for _ in range(1000):
            m = matrix({k: (rng.uniform(-5, 5), rng.uniform(-5, 5))
                        for k in [(Y, Y), (Y, N), (N, Y), (N, N)]})
            assert pure_nash(m) == brute_force_nash(m)

    def test_invariant_under_positive_affine_transform(self):
        rng = random.Random(99)
        for _ in range(200):
            pay = {k: (rng.uniform(-3, 3), rng.uniform(-3, 3))
                   for k in [(Y, Y), (Y, N), (N, Y), (N, N)]}
            a, b = rng.uniform(0.1, 4.0), rng.uniform(-2, 2)
            scaled = {k: (a * u1 + b, u2) for k, (u1, u2) in pay.items()}
            assert pure_nash(matrix(pay)) == pure_nash(matrix(scaled))


class TestSelectDecision:
    def test_unique_equilibrium(self):
        m = matrix({(Y, Y): (0, 2), (Y, N): (0, 1),
                    (N, Y): (1, 0), (N, N): (-1, -1)})
        eqs = pure_nash(m)
        assert eqs == [StrategyProfile(N, Y)]
        strat, reason, profile = select_decision(eqs, m)
        assert strat is N and reason == "UniqueNE"
        assert profile == StrategyProfile(N, Y)

    def test_multiple_equilibria_best_own_payoff(self):
        m = matrix({(Y, Y): (0, 0), (Y, N): (0.9, 1.5),
                    (N, Y): (0.7, 1.2), (N, N): (-1, -1)})
        eqs = pure_nash(m)
        assert set(eqs) == {StrategyProfile(Y, N), StrategyProfile(N, Y)}
        strat, reason, _ = select_decision(eqs, m)
        assert strat is Y and reason == "MultiNE_MaxUav"

    def test_multiple_equilibria_tie_breaks_toward_yield(self):
        m = matrix({(Y, Y): (0, 0), (Y, N): (0.8, 1.0),
                    (N, Y): (0.8, 1.0), (N, N): (-1, -1)})
        eqs = pure_nash(m)
        strat, reason, _ = select_decision(eqs, m)
        assert strat is Y and reason == "MultiNE_MaxUav"

    def test_matching_pennies_maximin(self):
        m = matrix({(Y, Y): (1, -1), (Y, N): (-1, 1),
                    (N, Y): (-2, 1), (N, N): (1, -1)})
        assert pure_nash(m) == []
        strat, reason, _ = select_decision([], m)
        # Yield's worst case (-1) beats NotYield's (-2).
        assert strat is Y and reason == "NoNE_Maximin"

    def test_total_over_random_matrices(self):
        rng = random.Random(7)
        for _ in range(500):
            m = matrix({k: (rng.uniform(-5, 5), rng.uniform(-5, 5))
                        for k in [(Y, Y), (Y, N), (N, Y), (N, N)]})
            strat, reason, profile = select_decision(pure_nash(m), m)
            assert strat in (Y, N)
            assert reason in ("UniqueNE", "MultiNE_MaxUav", "NoNE_Maximin")
            assert profile.av is strat


class TestActionMapping:
    limits = ActuationLimits()

    def test_full_safety_go(self):
        assert action_from_decision(N, 1.0, self.limits) == pytest.approx(1.5)

    def test_unsafe_go_holds_speed(self):
        assert action_from_decision(N, -0.4, self.limits) == 0.0
        assert action_from_decision(N, 0.0, self.limits) == 0.0

    def test_worst_case_yield_brakes_strong(self):
        assert action_from_decision(Y, -1.0, self.limits) == pytest.approx(-3.0)

    def test_comfortable_yield_at_positive_safety(self):
        assert action_from_decision(Y, 0.8, self.limits) == pytest.approx(-1.0)

    def test_monotone_in_safety(self):
        for strat in (Y, N):
            prev = None
            for k in range(201):
                u = -1.0 + 2.0 * k / 200
                a = action_from_decision(strat, u, self.limits)
                assert self.limits.a_min <= a <= self.limits.a_max
                if prev is not None:
                    assert a >= prev - 1e-12
                prev = a

    def test_clamped_to_limits(self):
        tight = ActuationLimits(a_min=-2.0, a_max=1.0, a_go_max=5.0,
                                a_yield_comf=-1.0, a_brake_strong=-6.0)
        assert action_from_decision(N, 1.0, tight) == 1.0
        assert action_from_decision(Y, -1.0, tight) == -2.0


class TestHysteresis:
    def test_large_margin_freezes_first_decision(self, fixture_configs):
        cfg = fixture_configs["sc"]
        frozen = dataclasses.replace(cfg, hysteresis=100.0)
        free = dataclasses.replace(cfg, hysteresis=0.0)
        rec_frozen = run_episode(frozen)
        rec_free = run_episode(free)

        def strategies(rec):
            return [row["decision"]["strategy"] for row in rec.steps
                    if row.get("decision")]

        assert len(set(strategies(rec_frozen))) == 1
        assert len(set(strategies(rec_free))) >= 2


class TestCalibration:
    def _sampler(self, batch_base):
        base = dataclasses.replace(
            batch_base,
            world=dataclasses.replace(batch_base.world, speed_limit=20 / 3.6),
            initial_speed=18 / 3.6)
        return ScenarioSampler(base=base, bins=("Low",),
                               driver_mix=(("visibility_yielder", 1.0),))

    def test_single_candidate_returned(self, batch_base):
        sampler = self._sampler(batch_base)
        result = calibrate_weights(sampler, CalibrationObjective(), budget=1,
                                   seed=3, n_candidates=1)
        assert len(result.rows) == 1
        assert result.weights.alpha == 1.0

    def test_selected_minimizes_objective(self, batch_base):
        sampler = self._sampler(batch_base)
        result = calibrate_weights(sampler, CalibrationObjective(w_danger=1, w_time=0, w_fullstop=0),
                                   budget=2, seed=3, n_candidates=4)
        best = min(result.rows, key=lambda r: r["objective"])
        assert result.weights.beta == pytest.approx(best["beta"])
        assert result.weights.gamma == pytest.approx(best["gamma"])
        assert result.weights.lam == pytest.approx(best["lambda"])

    def test_deterministic_under_seed(self, batch_base):
        sampler = self._sampler(batch_base)
        a = calibrate_weights(sampler, CalibrationObjective(), budget=2, seed=42, n_candidates=3)
        b = calibrate_weights(sampler, CalibrationObjective(), budget=2, seed=42, n_candidates=3)
        assert a.weights == b.weights
        assert a.rows == b.rows
