"""Utility functions of the two-vehicle crossing game.

Each of the four strategy profiles (both players choose Yield or Not Yield)
gets a pair of payoffs built from: a shared safety utility derived from the
predicted arrival-time gap at the conflict area, per-vehicle traffic
efficiency, a social-fitness term rewarding complementary strategies scaled
by how visible the car is to the truck driver, and the truck side's
altruism/reciprocity terms.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from enum import Enum

from .errors import EfficiencyError, PredictionError

V_EPS = 1e-9


class Strategy(Enum):
    YIELD = "yield"
    NOT_YIELD = "not_yield"


@dataclass(frozen=True)
class StrategyProfile:
    av: Strategy
    hv: Strategy


PROFILES = tuple(
    StrategyProfile(av=m, hv=n)
    for m in (Strategy.YIELD, Strategy.NOT_YIELD)
    for n in (Strategy.YIELD, Strategy.NOT_YIELD)
)


@dataclass(frozen=True)
class GameWeights:
    """Payoff trade-off weights.

    ``lam`` is the reciprocity weight (the share of the other player's
    utility mixed into the car's own payoff); the truck's altruism weight
    equals ``lam`` when the truck yields and 0 otherwise.
    """

    alpha: float = 1.0
    beta: float = 0.5
    gamma: float = 0.4
    lam: float = 0.2

    def __post_init__(self) -> None:
        if min(self.alpha, self.beta, self.gamma, self.lam) < 0:
            raise ValueError("weights must be non-negative")
        if not (0.0 <= self.lam < 1.0):
            raise ValueError("reciprocity weight must lie in [0, 1)")

    def lambda_hv(self, hv_strategy: Strategy) -> float:
        return self.lam if hv_strategy is Strategy.YIELD else 0.0

    @classmethod
    def nosc(cls, alpha: float = 1.0, beta: float = 0.5) -> "GameWeights":
        """Safety-and-efficiency-only preset (social terms zeroed)."""
        return cls(alpha=alpha, beta=beta, gamma=0.0, lam=0.0)


@dataclass(frozen=True)
class ConflictGeometry:
    """Arc-length landmarks of the crossing, per vehicle path.

    Positions are measured along each vehicle's own path with its conflict
    entry at ``conflict_entry_*``; ``intersection_exit_*`` is where the whole
    intersection is left. ``l_risk``/``l_safe`` override the derived risky
    and safe clearance distances when set.
    """

    conflict_entry_av: float = 0.0
    conflict_exit_av: float = 3.5
    conflict_entry_hv: float = 0.0
    conflict_exit_hv: float = 3.5
    intersection_exit_av: float = 15.0
    intersection_exit_hv: float = 11.5
    l_risk: float | None = None
    l_safe: float | None = None

    def __post_init__(self) -> None:
        if self.conflict_entry_av >= self.conflict_exit_av:
            raise ValueError("car conflict entry must precede its exit")
        if self.conflict_entry_hv >= self.conflict_exit_hv:
            raise ValueError("truck conflict entry must precede its exit")
        if self.intersection_exit_av < self.conflict_exit_av:
            raise ValueError("intersection exit cannot precede the conflict exit")
        if self.intersection_exit_hv < self.conflict_exit_hv:
            raise ValueError("intersection exit cannot precede the conflict exit")
        if self.l_risk is not None and self.l_safe is not None:
            if not (0.0 < self.l_risk < self.l_safe):
                raise ValueError("need 0 < l_risk < l_safe")

    def entry(self, who: str) -> float:
        return self.conflict_entry_av if who == "av" else self.conflict_entry_hv

    def exit(self, who: str) -> float:
        return self.conflict_exit_av if who == "av" else self.conflict_exit_hv

    def intersection_exit(self, who: str) -> float:
        return self.intersection_exit_av if who == "av" else self.intersection_exit_hv

    def risk_safe(self, leader: str, leader_length: float) -> tuple[float, float]:
        """Risky/safe clearance distances for a given leader.

        Risky: the leader has just cleared the conflict area (its length plus
        the conflict span). Safe: the leader has left the whole intersection.
        """
        if self.l_risk is not None and self.l_safe is not None:
            return self.l_risk, self.l_safe
        entry = self.entry(leader)
        l_risk = (self.exit(leader) - entry) + leader_length
        l_safe = (self.intersection_exit(leader) - entry) + leader_length
        return l_risk, l_safe


@dataclass(frozen=True)
class PredictionParams:
    """Knobs of the per-strategy motion prediction and utility evaluation."""

    a_yield: float = -2.0        # assumed deceleration under Yield (m/s^2)
    a_go: float = 1.0            # assumed acceleration under Not Yield (m/s^2)
    t_max: float = 30.0          # prediction horizon / never-arrives surrogate (s)
    v_max_av: float = 12.5       # lane speed limit for the car (m/s)
    v_max_hv: float = 12.5       # lane speed limit for the truck (m/s)
    v_floor: float = 0.1         # follower-speed floor for the Eq of thresholds (m/s)
    efficiency_branch: str = "printed"   # or "corrected"
    hv_safety_convention: str = "literal"  # or "signed"
    u_t_min: float = -1.0        # floor of the corrected efficiency branch
    hv_yield_visibility_scaled: bool = False  # truck yield braking scaled by F(theta)
    av_yield_stop_capable: bool = False  # own yield plan brakes as deep as stopping takes
    a_yield_strong: float = -3.0         # deepest assumed own yield braking (m/s^2)

    def __post_init__(self) -> None:
        if self.efficiency_branch not in ("printed", "corrected"):
            raise ValueError(f"unknown efficiency branch {self.efficiency_branch!r}")
        if self.hv_safety_convention not in ("literal", "signed"):
            raise ValueError(f"unknown safety convention {self.hv_safety_convention!r}")
        if self.a_yield >= 0 or self.a_yield_strong >= 0 or self.a_go < 0:
            raise ValueError("yield accelerations must be negative, go non-negative")
        if self.t_max <= 0 or self.v_floor <= 0:
            raise ValueError("horizon and speed floor must be positive")


@dataclass(frozen=True)
class ArrivalPrediction:
    """Predicted conflict-area arrivals under one strategy profile."""

    delta_t: float
    t_av: float
    t_hv: float
    leader: str                 # "av" or "hv"
    dt_rsk: float
    dt_saf: float
    v_follower: float           # follower speed when the leader arrives (m/s)
    l_follower: float           # follower distance to entry at that instant (m)
    l_risk: float
    l_safe: float
    follower_arrives: bool


def arrival_time(d: float, v0: float, a: float, v_max: float, t_max: float) -> float:
    """Time for a front bumper to cover distance ``d`` under constant ``a``.

    Speed is clamped to [0, v_max]; a vehicle that stops short (or takes
    longer than the horizon) gets ``t_max``.
    """
    if d <= 0.0:
        return 0.0
    v0 = min(max(v0, 0.0), v_max)
    if a > 0.0:
        t_cap = (v_max - v0) / a
        d_cap = v0 * t_cap + 0.5 * a * t_cap * t_cap
        if d <= d_cap:
            t = (-v0 + math.sqrt(v0 * v0 + 2.0 * a * d)) / a
        else:
            t = t_cap + (d - d_cap) / v_max if v_max > V_EPS else t_max
    elif a < 0.0:
        if v0 <= V_EPS:
            return t_max
        d_stop = v0 * v0 / (2.0 * -a)
        if d > d_stop + 1e-12:
            return t_max
        disc = max(v0 * v0 + 2.0 * a * min(d, d_stop), 0.0)
        t = (v0 - math.sqrt(disc)) / -a
    else:
        if v0 <= V_EPS:
            return t_max
        t = d / v0
    return min(t, t_max)


def state_at(t: float, v0: float, a: float, v_max: float) -> tuple[float, float]:
    """(distance covered, speed) after ``t`` seconds of clamped constant accel."""
    v0 = min(max(v0, 0.0), v_max)
    if a > 0.0:
        t_cap = (v_max - v0) / a
        if t <= t_cap:
            return v0 * t + 0.5 * a * t * t, v0 + a * t
        d_cap = v0 * t_cap + 0.5 * a * t_cap * t_cap
        return d_cap + v_max * (t - t_cap), v_max
    if a < 0.0:
        t_stop = v0 / -a
        if t <= t_stop:
            return v0 * t + 0.5 * a * t * t, v0 + a * t
        return v0 * t_stop + 0.5 * a * t_stop * t_stop, 0.0
    return v0 * t, v0


def _profile_accel(strategy: Strategy, params: PredictionParams) -> float:
    return params.a_yield if strategy is Strategy.YIELD else params.a_go


def _stop_capable_yield(d: float, v: float, params: PredictionParams) -> float:
    """Shallowest braking that still stops short of the entry, within bounds.

    The car's own yield plan commits to whatever deceleration yielding takes
    (between the comfortable level and the strong bound); if even the strong
    bound cannot stop it in time, the strong bound is assumed.
    """
    margin = 0.5
    if d <= margin or v <= V_EPS:
        return params.a_yield_strong
    a_need = -v * v / (2.0 * (d - margin))
    if a_need >= params.a_yield:
        return params.a_yield
    return max(a_need, params.a_yield_strong)


def predict_arrivals(av, hv, profile: StrategyProfile, geom: ConflictGeometry,
                     params: PredictionParams, hv_yield_scale: float = 1.0) -> ArrivalPrediction:
    """Arrival-time gap and thresholds for one strategy profile.

    Both vehicles move under the constant acceleration implied by their
    strategy. The leader is whoever reaches its conflict entry first; the
    risky/safe gap thresholds divide the leader-specific clearance distances
    by the follower's speed at the leader's arrival. A follower that never
    arrives within the horizon is scored by the speed-cancelled limit of the
    same formulas (its remaining distance against the clearance distances).
    ``hv_yield_scale`` attenuates the truck's assumed yield braking (a driver
    who cannot see the car cannot be expected to brake for it).
    """
    d_av = geom.conflict_entry_av - av.s
    d_hv = geom.conflict_entry_hv - hv.s
    if av.s > geom.conflict_exit_av or hv.s > geom.conflict_exit_hv:
        raise PredictionError("arrival prediction requires both vehicles upstream of their conflict exits")

    a_av = _profile_accel(profile.av, params)
    a_hv = _profile_accel(profile.hv, params)
    if profile.hv is Strategy.YIELD:
        a_hv *= min(1.0, max(0.0, hv_yield_scale))
    if profile.av is Strategy.YIELD and params.av_yield_stop_capable:
        a_av = _stop_capable_yield(d_av, av.v, params)
    t_av = arrival_time(d_av, av.v, a_av, params.v_max_av, params.t_max)
    t_hv = arrival_time(d_hv, hv.v, a_hv, params.v_max_hv, params.t_max)

    if t_av <= t_hv:
        leader, t_l, t_f = "av", t_av, t_hv
        lead_len = av.length
        f_d0, f_v0, f_a, f_vmax = d_hv, hv.v, a_hv, params.v_max_hv
    else:
        leader, t_l, t_f = "hv", t_hv, t_av
        lead_len = hv.length
        f_d0, f_v0, f_a, f_vmax = d_av, av.v, a_av, params.v_max_av

    l_risk, l_safe = geom.risk_safe(leader, lead_len)
    covered, v_f = state_at(t_l, f_v0, f_a, f_vmax)
    l_f = max(f_d0 - covered, 0.0)
    follower_arrives = t_f < params.t_max

    if follower_arrives:
        v_used = max(v_f, params.v_floor)
        delta_t = t_f - t_l
    else:
        # Follower stops short of the area within the horizon: it cannot
        # collide, so the gap reads fully safe whatever the distance left.
        v_used = params.v_floor
        delta_t = max(l_f / v_used, l_safe / v_used)
    return ArrivalPrediction(
        delta_t=delta_t,
        t_av=t_av,
        t_hv=t_hv,
        leader=leader,
        dt_rsk=l_risk / v_used,
        dt_saf=l_safe / v_used,
        v_follower=v_f,
        l_follower=l_f,
        l_risk=l_risk,
        l_safe=l_safe,
        follower_arrives=follower_arrives,
    )


def safety_core(pred: ArrivalPrediction) -> float:
    """Normalized safety of the interaction, in [-1, 1].

    -1 at a zero arrival gap, 0 at the risky threshold, 1 from the safe
    threshold on, linear in between each pair.
    """
    dt, rsk, saf = pred.delta_t, pred.dt_rsk, pred.dt_saf
    if dt <= rsk:
        u = dt / rsk - 1.0
    elif dt < saf:
        u = (dt - rsk) / (saf - rsk)
    else:
        u = 1.0
    return min(1.0, max(-1.0, u))


def efficiency(t_remaining: float, l_remaining: float, v_max: float,
               branch: str = "printed", u_t_min: float = -1.0) -> float:
    """Traffic-efficiency utility against the speed-limit traversal time.

    The "printed" branch saturates at 1 for slower-than-limit traversal and
    rewards (>1) faster arrival; the "corrected" branch penalizes arriving
    later than the limit allows, floored at ``u_t_min``.
    """
    if t_remaining < 0.0:
        raise EfficiencyError(f"negative remaining time {t_remaining}")
    if l_remaining < 0.0 or v_max <= 0.0:
        raise EfficiencyError("need l_remaining >= 0 and v_max > 0")
    t_eff = l_remaining / v_max
    if t_eff <= V_EPS:
        return 1.0
    if branch == "corrected":
        if t_remaining > t_eff:
            return max(u_t_min, 1.0 - (t_remaining - t_eff) / t_eff)
        return 1.0
    if t_remaining <= t_eff:
        return 1.0 - (t_remaining - t_eff) / t_eff
    return 1.0


def tacitness(profile: StrategyProfile) -> float:
    """1 when the strategies complement each other, 0 when they clash."""
    return 0.0 if profile.av is profile.hv else 1.0


def social_fitness(f_theta: float, profile: StrategyProfile) -> float:
    """How well the car's choice fits the truck's, discounted by visibility."""
    return f_theta * tacitness(profile)


def hv_safety(u_s: float, f_theta: float, convention: str = "literal") -> float:
    """Truck-side safety utility, corrected by how visible the car is.

    An invisible car (F=0) leaves the driver feeling maximally safe (1.0,
    with 0**0 == 1). The "literal" convention takes |u_s|**F for negative
    core safety as printed; "signed" keeps the penalty sign.
    """
    if u_s >= 0.0:
        return u_s ** f_theta
    mag = (-u_s) ** f_theta
    return -mag if convention == "signed" else mag


def altruism(f_theta: float, u_t_av: float) -> float:
    """Reciprocal utility the truck gains from the car's efficiency."""
    return f_theta * u_t_av


def av_utility(u_s_av: float, u_t_av: float, u_sf_av: float, u_hv: float,
               weights: GameWeights) -> float:
    own = weights.alpha * u_s_av + weights.beta * u_t_av + weights.gamma * u_sf_av
    return (1.0 - weights.lam) * own + weights.lam * u_hv


def hv_utility(u_s_hv: float, u_t_hv: float, u_altr: float,
               weights: GameWeights, hv_strategy: Strategy) -> float:
    return (
        weights.alpha * u_s_hv
        + weights.beta * u_t_hv
        + weights.lambda_hv(hv_strategy) * u_altr
    )


@dataclass(frozen=True)
class UtilityEntry:
    u_av: float
    u_hv: float
    components: dict[str, float] = field(default_factory=dict, compare=False)


@dataclass(frozen=True)
class UtilityMatrix:
    """The four payoff pairs plus the visibility snapshot they were built from."""

    entries: dict[StrategyProfile, UtilityEntry]
    f_theta: float

    def __post_init__(self) -> None:
        missing = [p for p in PROFILES if p not in self.entries]
        if missing:
            raise ValueError(f"utility matrix incomplete: missing {missing}")
        for p, e in self.entries.items():
            if not (math.isfinite(e.u_av) and math.isfinite(e.u_hv)):
                raise ValueError(f"non-finite utility at {p}")

    def u_av(self, av: Strategy, hv: Strategy) -> float:
        return self.entries[StrategyProfile(av, hv)].u_av

    def u_hv(self, av: Strategy, hv: Strategy) -> float:
        return self.entries[StrategyProfile(av, hv)].u_hv

    def entry(self, profile: StrategyProfile) -> UtilityEntry:
        return self.entries[profile]

    def as_dict(self) -> dict:
        return {
            f"{p.av.value}|{p.hv.value}": {
                "u_av": e.u_av,
                "u_hv": e.u_hv,
                "components": dict(e.components),
            }
            for p, e in self.entries.items()
        }


def build_matrix(av, hv, f_theta: float, geom: ConflictGeometry,
                 weights: GameWeights, params: PredictionParams) -> UtilityMatrix:
    """Evaluate all four strategy profiles into a payoff matrix.

    Each entry runs the per-profile arrival prediction, then composes the
    safety, efficiency, social-fitness, truck-safety and altruism utilities
    with the given weights. The component breakdown of every entry is kept
    for tracing.
    """
    d_av = geom.conflict_entry_av - av.s
    d_hv = geom.conflict_entry_hv - hv.s
    entries: dict[StrategyProfile, UtilityEntry] = {}
    hv_yield_scale = f_theta if params.hv_yield_visibility_scaled else 1.0
    for profile in PROFILES:
        pred = predict_arrivals(av, hv, profile, geom, params, hv_yield_scale)
        u_s = safety_core(pred)
        u_t_av = efficiency(pred.t_av, max(d_av, 0.0), params.v_max_av,
                            params.efficiency_branch, params.u_t_min)
        u_t_hv = efficiency(pred.t_hv, max(d_hv, 0.0), params.v_max_hv,
                            params.efficiency_branch, params.u_t_min)
        u_sf = social_fitness(f_theta, profile)
        u_s_hv = hv_safety(u_s, f_theta, params.hv_safety_convention)
        u_altr = altruism(f_theta, u_t_av)
        u_hv = hv_utility(u_s_hv, u_t_hv, u_altr, weights, profile.hv)
        u_av = av_utility(u_s, u_t_av, u_sf, u_hv, weights)
        entries[profile] = UtilityEntry(
            u_av=u_av,
            u_hv=u_hv,
            components={
                "u_s": u_s,
                "u_t_av": u_t_av,
                "u_t_hv": u_t_hv,
                "u_sf_av": u_sf,
                "u_s_hv": u_s_hv,
                "u_altr_hv": u_altr,
                "delta_t": pred.delta_t,
                "dt_rsk": pred.dt_rsk,
                "dt_saf": pred.dt_saf,
                "t_av": pred.t_av,
                "t_hv": pred.t_hv,
                "leader": 0.0 if pred.leader == "av" else 1.0,
            },
        )
    return UtilityMatrix(entries=entries, f_theta=f_theta)
