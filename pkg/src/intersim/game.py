"""Static-game solution and the socially-compatible decision pipeline.

Solves the 2x2 crossing game for pure Nash equilibria, picks the car's
strategy (with explicit tie-breaking and a maximin fallback when no pure
equilibrium exists), and maps the yield decision plus the predicted safety
utility to a longitudinal acceleration command. Also hosts the random-search
calibration of the payoff weights.
"""

from __future__ import annotations

import math
import random
from dataclasses import dataclass, field

from .errors import CalibrationError
from .utilities import (
    PROFILES,
    ConflictGeometry,
    GameWeights,
    PredictionParams,
    Strategy,
    StrategyProfile,
    UtilityMatrix,
    build_matrix,
)
from .visibility import CabinGeometry, ViewModel, compute_blind_zone, relative_pose, visibility_probability

AV_STRATEGIES = (Strategy.YIELD, Strategy.NOT_YIELD)
HV_STRATEGIES = (Strategy.YIELD, Strategy.NOT_YIELD)


@dataclass(frozen=True)
class ActuationLimits:
    """Acceleration envelope and the decision-to-command mapping anchors."""

    a_min: float = -5.0          # strongest allowed braking (m/s^2)
    a_max: float = 3.5           # strongest allowed acceleration (m/s^2)
    a_go_max: float = 1.5        # assertive-go command at full predicted safety
    a_yield_comf: float = -1.0   # comfortable yield deceleration
    a_brake_strong: float = -3.0 # yield deceleration at worst predicted safety


@dataclass(frozen=True)
class Decision:
    strategy: Strategy
    accel_cmd: float
    equilibria: tuple[StrategyProfile, ...]
    selection_reason: str        # UniqueNE | MultiNE_MaxUav | NoNE_Maximin | Override
    profile: StrategyProfile     # representative profile backing the command
    u_s: float                   # safety component used for the command
    f_theta: float
    matrix: UtilityMatrix | None = field(default=None, compare=False, repr=False)


def pure_nash(m: UtilityMatrix) -> list[StrategyProfile]:
    """All profiles where neither player can strictly improve unilaterally."""
    out = []
    for p in PROFILES:
        others_av = [s for s in AV_STRATEGIES if s is not p.av]
        others_hv = [s for s in HV_STRATEGIES if s is not p.hv]
        av_ok = all(m.u_av(p.av, p.hv) >= m.u_av(s, p.hv) for s in others_av)
        hv_ok = all(m.u_hv(p.av, p.hv) >= m.u_hv(p.av, s) for s in others_hv)
        if av_ok and hv_ok:
            out.append(p)
    return out


def _representative(m: UtilityMatrix, strategy: Strategy,
                    eqs: list[StrategyProfile]) -> tuple[StrategyProfile, float]:
    """Profile and payoff standing in for one car strategy.

    The best equilibrium using that strategy when one exists, otherwise the
    pessimistic (maximin) column.
    """
    mine = [p for p in eqs if p.av is strategy]
    if mine:
        best = max(mine, key=lambda p: m.u_av(p.av, p.hv))
        return best, m.u_av(best.av, best.hv)
    worst_hv = min(HV_STRATEGIES, key=lambda n: m.u_av(strategy, n))
    return StrategyProfile(strategy, worst_hv), m.u_av(strategy, worst_hv)


def select_decision(eqs: list[StrategyProfile], m: UtilityMatrix) -> tuple[Strategy, str, StrategyProfile]:
    """Pick the car's strategy from the equilibrium set.

    A unique equilibrium decides directly; several are broken by the car's
    payoff with ties toward Yield; with no pure equilibrium the car plays
    maximin on its own payoff, ties again toward Yield.
    """
    if len(eqs) == 1:
        p = eqs[0]
        return p.av, "UniqueNE", p
    if eqs:
        best = max(eqs, key=lambda p: (m.u_av(p.av, p.hv),
                                       p.av is Strategy.YIELD,
                                       p.hv is Strategy.YIELD))
        return best.av, "MultiNE_MaxUav", best
    values = {}
    for s in AV_STRATEGIES:
        worst_hv = min(HV_STRATEGIES, key=lambda n: m.u_av(s, n))
        values[s] = (m.u_av(s, worst_hv), worst_hv)
    strat = max(AV_STRATEGIES, key=lambda s: (values[s][0], s is Strategy.YIELD))
    return strat, "NoNE_Maximin", StrategyProfile(strat, values[strat][1])


def action_from_decision(strategy: Strategy, u_s_av: float, limits: ActuationLimits) -> float:
    """Map a yield decision plus predicted safety to an acceleration command.

    Going: push toward the assertive-go acceleration only as far as safety
    allows, holding speed at or below zero safety. Yielding: deepen braking
    from the comfortable level toward the strong level as safety worsens.
    """
    if strategy is Strategy.NOT_YIELD:
        a = limits.a_go_max * min(1.0, max(0.0, u_s_av))
    else:
        depth = min(1.0, max(0.0, -u_s_av))
        a = limits.a_yield_comf + (limits.a_brake_strong - limits.a_yield_comf) * depth
    return min(limits.a_max, max(limits.a_min, a))


class ScPolicy:
    """Visibility -> payoff matrix -> Nash -> acceleration, re-solved per period.

    Holds the incumbent strategy between decisions; a flip requires the
    challenger's payoff to beat the incumbent's by the hysteresis margin
    (set ``hysteresis`` to 0 to disable).
    """

    name = "sc"

    def __init__(self, cabin: CabinGeometry, view: ViewModel, weights: GameWeights,
                 prediction: PredictionParams, limits: ActuationLimits,
                 geom: ConflictGeometry, hysteresis: float = 0.02,
                 use_visibility: bool = True, av_reference: str = "center"):
        self.cabin = cabin
        self.view = view
        self.weights = weights
        self.prediction = prediction
        self.limits = limits
        self.geom = geom
        self.hysteresis = hysteresis
        self.use_visibility = use_visibility
        self.av_reference = av_reference
        self.blind_zone = compute_blind_zone(cabin)
        self._incumbent: Strategy | None = None

    def reset(self) -> None:
        self._incumbent = None

    def observed_f(self, av, hv) -> float:
        pose = relative_pose(hv, av, self.cabin, self.blind_zone, self.view, self.av_reference)
        return visibility_probability(pose, self.view)

    def decide(self, av, hv, t: float, f_theta: float | None = None) -> Decision:
        if self.use_visibility:
            f_game = f_theta if f_theta is not None else self.observed_f(av, hv)
        else:
            f_game = 1.0
        m = build_matrix(av, hv, f_game, self.geom, self.weights, self.prediction)
        eqs = pure_nash(m)
        strategy, reason, profile = select_decision(eqs, m)

        if (self._incumbent is not None and strategy is not self._incumbent
                and self.hysteresis > 0.0):
            _, new_value = _representative(m, strategy, eqs)
            inc_profile, inc_value = _representative(m, self._incumbent, eqs)
            if new_value - inc_value <= self.hysteresis:
                strategy, reason, profile = self._incumbent, "Override", inc_profile
        self._incumbent = strategy

        # Going draws its assertiveness from the chosen profile's safety;
        # yield braking deepens with the pessimistic safety of proceeding
        # (how bad going could get against either truck reply), so separation
        # is built exactly when the go option is degrading.
        if strategy is Strategy.NOT_YIELD:
            u_s = m.entry(profile).components["u_s"]
        else:
            u_s = min(m.entry(StrategyProfile(Strategy.NOT_YIELD, n)).components["u_s"]
                      for n in HV_STRATEGIES)
        accel = action_from_decision(strategy, u_s, self.limits)
        if av.s >= self.geom.conflict_entry_av and accel < 0.0:
            accel = 0.0   # committed past the entry line: clear, never park
        return Decision(
            strategy=strategy,
            accel_cmd=accel,
            equilibria=tuple(eqs),
            selection_reason=reason,
            profile=profile,
            u_s=u_s,
            f_theta=f_game,
            matrix=m,
        )


@dataclass(frozen=True)
class CalibrationObjective:
    """Weighted cost over a candidate's episode batch (lower is better)."""

    w_danger: float = 1.0
    w_time: float = 0.2
    w_fullstop: float = 0.5


@dataclass(frozen=True)
class CalibrationResult:
    weights: GameWeights
    rows: list[dict]


def calibrate_weights(sampler, objective: CalibrationObjective, budget: int,
                      seed: int = 0, n_candidates: int = 20,
                      beta_range: tuple[float, float] = (0.1, 1.0),
                      gamma_range: tuple[float, float] = (0.0, 1.0),
                      lam_range: tuple[float, float] = (0.0, 0.6)) -> CalibrationResult:
    """Random search over the payoff weights, alpha pinned at 1 as the scale gauge.

    Each candidate runs ``budget`` episodes drawn from the sampler with an
    independent deterministic stream derived from (seed, candidate index), so
    candidate evaluations are order-independent. Returns the weights that
    minimize the objective together with the full audit table.
    """
    from .sim import run_episode  # local import: sim builds on this module

    if budget < 1:
        raise CalibrationError("budget must be >= 1")
    rng = random.Random(seed)
    candidates = [GameWeights(alpha=1.0,
                              beta=rng.uniform(*beta_range),
                              gamma=rng.uniform(*gamma_range),
                              lam=rng.uniform(*lam_range))
                  for _ in range(max(1, n_candidates))]

    rows: list[dict] = []
    best: tuple[float, int] | None = None
    for idx, w in enumerate(candidates):
        danger = fullstop = valid = 0
        time_sum = 0.0
        for ep in range(budget):
            scenario = sampler.sample(seed=_derive_seed(seed, idx, ep))
            scenario = scenario.with_weights(w)
            try:
                record = run_episode(scenario)
            except Exception:
                continue
            if record.classification == "Failed":
                continue
            valid += 1
            if record.classification == "Danger":
                danger += 1
            elif record.classification == "FullStop":
                fullstop += 1
            time_sum += record.normalized_crossing_time
        if valid == 0:
            rows.append({"candidate": idx, "beta": w.beta, "gamma": w.gamma,
                         "lambda": w.lam, "valid": 0, "objective": math.inf,
                         "danger_rate": math.nan, "fullstop_rate": math.nan,
                         "mean_norm_time": math.nan})
            continue
        danger_rate = danger / valid
        fullstop_rate = fullstop / valid
        mean_time = time_sum / valid
        cost = (objective.w_danger * danger_rate
                + objective.w_time * mean_time
                + objective.w_fullstop * fullstop_rate)
        rows.append({"candidate": idx, "beta": w.beta, "gamma": w.gamma,
                     "lambda": w.lam, "valid": valid, "objective": cost,
                     "danger_rate": danger_rate, "fullstop_rate": fullstop_rate,
                     "mean_norm_time": mean_time})
        if best is None or cost < best[0]:
            best = (cost, idx)
    if best is None:
        raise CalibrationError("no candidate produced a valid episode")
    return CalibrationResult(weights=candidates[best[1]], rows=rows)


def _derive_seed(seed: int, candidate: int, episode: int) -> int:
    # Stable stream split without sharing state across candidates.
    return (seed * 1_000_003 + candidate * 10_007 + episode * 101) % (2**31 - 1)
