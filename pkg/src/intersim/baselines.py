"""Comparison policies and the emergency-braking safety net.

noSC re-uses the full game pipeline with the social weights zeroed and the
visibility snapshot pinned (the game simply assumes the car is always seen).
RSS is a rule-based worst-case occupancy check: proceed only if, even when
the truck behaves as intrusively as is still reasonable, the car has cleared
the conflict area before the truck can reach it. The AEB override is shared
by every policy and latches maximal braking whenever the constant-speed
occupancy margin drops below the threshold.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace

from .game import ActuationLimits, Decision, ScPolicy
from .utilities import ConflictGeometry, GameWeights, PredictionParams, Strategy, StrategyProfile

INF = math.inf
V_STOP = 0.05


@dataclass(frozen=True)
class RssParams:
    """Response times and acceleration bounds of the worst-case rule."""

    rho_av: float = 0.5
    rho_hv: float = 2.0
    a_accel_max_av: float = 3.5
    a_accel_max_hv: float = 3.0
    a_brake_min_av: float = -3.0
    a_brake_min_hv: float = -4.43
    a_brake_max_av: float = -5.0
    a_brake_max_hv: float = -8.0

    def __post_init__(self) -> None:
        if self.rho_av <= 0 or self.rho_hv <= 0:
            raise ValueError("response times must be positive")
        if self.a_accel_max_av <= 0 or self.a_accel_max_hv <= 0:
            raise ValueError("max accelerations must be positive")
        if self.a_brake_min_av >= 0 or self.a_brake_min_hv >= 0:
            raise ValueError("decelerations must be negative")
        if abs(self.a_brake_max_av) < abs(self.a_brake_min_av):
            raise ValueError("car max braking must not be weaker than its comfort braking")
        if abs(self.a_brake_max_hv) < abs(self.a_brake_min_hv):
            raise ValueError("truck max braking must not be weaker than its comfort braking")


class NoScPolicy(ScPolicy):
    """Game pipeline with social terms zeroed and visibility ignored."""

    name = "nosc"

    def __init__(self, cabin, view, weights: GameWeights, prediction, limits, geom,
                 hysteresis: float = 0.02, av_reference: str = "center"):
        nosc_weights = replace(weights, gamma=0.0, lam=0.0)
        super().__init__(cabin, view, nosc_weights, prediction, limits, geom,
                         hysteresis=hysteresis, use_visibility=False,
                         av_reference=av_reference)


def _occupancy_window(s: float, v: float, length: float, entry: float,
                      exit_: float) -> tuple[float, float] | None:
    """Constant-speed window [t_in, t_out] of conflict occupancy, or None.

    ``s`` is the front-bumper position; the rear clears at s = exit + length.
    A stopped vehicle occupies forever if inside, never otherwise.
    """
    rear = s - length
    if rear >= exit_:
        return None
    if v <= V_STOP:
        if s > entry:
            return (0.0, INF)
        return None
    t_in = max(0.0, (entry - s) / v)
    t_out = (exit_ + length - s) / v
    return (t_in, t_out)


def conflict_margin(av, hv, geom: ConflictGeometry) -> float:
    """Predicted arrival-time gap at the conflict area (constant speeds).

    The online analog of the end-of-episode time-to-arrive metric: the time
    between the leading vehicle's conflict entry and the lagging one's.
    Infinite when either vehicle never enters (stopped outside or already
    past).
    """
    w_av = _occupancy_window(av.s, av.v, av.length, geom.conflict_entry_av, geom.conflict_exit_av)
    w_hv = _occupancy_window(hv.s, hv.v, hv.length, geom.conflict_entry_hv, geom.conflict_exit_hv)
    if w_av is None or w_hv is None:
        return INF
    return abs(w_av[0] - w_hv[0])


def windows_overlap(av, hv, geom: ConflictGeometry) -> bool:
    """True when constant-speed extrapolation predicts co-occupancy."""
    w_av = _occupancy_window(av.s, av.v, av.length, geom.conflict_entry_av, geom.conflict_exit_av)
    w_hv = _occupancy_window(hv.s, hv.v, hv.length, geom.conflict_entry_hv, geom.conflict_exit_hv)
    if w_av is None or w_hv is None:
        return False
    return w_av[0] < w_hv[1] and w_hv[0] < w_av[1]


def aeb_override(av, hv, geom: ConflictGeometry, threshold: float,
                 a_brake: float = -5.0) -> float | None:
    """Maximal braking on predicted co-occupancy or a margin strictly below threshold."""
    if threshold <= 0:
        raise ValueError("AEB threshold must be positive")
    if windows_overlap(av, hv, geom) or conflict_margin(av, hv, geom) < threshold:
        return a_brake
    return None


class AebGuard:
    """Per-episode AEB latch shared by all policies.

    The margin check only arms once the conflict is imminent (either vehicle
    within ``horizon`` seconds of its conflict entry at current speed); a
    constant-speed near-overlap projected tens of seconds out is the
    planner's business, not the emergency net's. Once triggered, maximal
    braking holds until both vehicles are clear of the conflict area or the
    ego car has fully stopped.
    """

    def __init__(self, geom: ConflictGeometry, threshold: float = 0.83,
                 a_brake: float = -5.0, enabled: bool = True, horizon: float = 2.5):
        self.geom = geom
        self.threshold = threshold
        self.a_brake = a_brake
        self.enabled = enabled
        self.horizon = horizon
        self.latched = False
        self.ever_fired = False

    def reset(self) -> None:
        self.latched = False
        self.ever_fired = False

    def _passed(self, v, exit_: float) -> bool:
        return v.s - v.length >= exit_

    def _imminent(self, av, hv) -> bool:
        def t_in(v, entry):
            if v.s >= entry:
                return 0.0
            if v.v <= V_STOP:
                return INF
            return (entry - v.s) / v.v
        return min(t_in(av, self.geom.conflict_entry_av),
                   t_in(hv, self.geom.conflict_entry_hv)) <= self.horizon

    def step(self, av, hv) -> float | None:
        if not self.enabled:
            return None
        if self.latched:
            both_past = (self._passed(av, self.geom.conflict_exit_av)
                         and self._passed(hv, self.geom.conflict_exit_hv))
            committed = av.s >= self.geom.conflict_entry_av
            if both_past or committed or av.v <= V_STOP:
                self.latched = False
            else:
                return self.a_brake
        if av.s >= self.geom.conflict_entry_av:
            # Committed: braking inside the conflict area would park the ego
            # in the box; the net only prevents entering on a bad margin.
            return None
        if not self._imminent(av, hv):
            return None
        cmd = aeb_override(av, hv, self.geom, self.threshold, self.a_brake)
        if cmd is not None:
            self.latched = True
            self.ever_fired = True
        return cmd


class RssPolicy:
    """Worst-case occupancy rule with right-of-way assertion.

    Go when either (a) the car, following its own go controller after the
    response time, clears the conflict area before the truck's earliest
    possible entry (full acceleration during the truck's response time, then
    comfort braking), or (b) the car holds the right of way and the truck can
    still avoid the conflict by responding properly (braking at its comfort
    level after its response time) - proceeding then shifts the blame for any
    conflict to the truck. Otherwise brake, deeper the larger the time
    deficit, always able to stop before the entry line; a full stop latches
    until a go condition holds again.
    """

    name = "rss"

    def __init__(self, params: RssParams, geom: ConflictGeometry, limits: ActuationLimits,
                 v_ref: float, buffer_av: float = 2.0, buffer_hv: float = 2.0,
                 k_speed: float = 0.5, deficit_scale: float = 2.0, stop_margin: float = 3.0,
                 dt: float = 0.05, horizon: float = 40.0, av_has_row: bool = True):
        self.params = params
        self.geom = geom
        self.limits = limits
        self.v_ref = v_ref
        self.buffer_av = buffer_av
        self.buffer_hv = buffer_hv
        self.k_speed = k_speed
        self.deficit_scale = deficit_scale
        self.stop_margin = stop_margin
        self.dt = dt
        self.horizon = horizon
        self.av_has_row = av_has_row
        self.stop_latch = False

    def reset(self) -> None:
        self.stop_latch = False

    def _hv_can_still_stop(self, hv) -> bool:
        """Proper response test: holding speed through the truck's response
        time and then braking at its comfort level stops it short of the area."""
        d = self.geom.conflict_entry_hv - hv.s - self.buffer_hv
        if hv.s >= self.geom.conflict_entry_hv:
            return False
        d_stop = (hv.v * self.params.rho_hv
                  + hv.v * hv.v / (2.0 * -self.params.a_brake_min_hv))
        return d_stop <= d

    def _go_accel(self, v: float) -> float:
        # Never decelerates while committed to go; tracks the lane speed.
        return min(self.params.a_accel_max_av, max(0.0, self.k_speed * (self.v_ref - v)))

    def _self_clear_time(self, av) -> float:
        """Integrate the car's own go controller until its rear clears the area."""
        target = self.geom.conflict_exit_av + av.length + self.buffer_av
        s, v, t = av.s, av.v, 0.0
        while t < self.horizon:
            a = 0.0 if t < self.params.rho_av else self._go_accel(v)
            v = max(0.0, v + a * self.dt)
            s += v * self.dt
            t += self.dt
            if s >= target:
                return t
        return INF

    def _hv_earliest_entry(self, hv) -> float:
        """Truck worst case: full throttle through its response time, then comfort braking."""
        target = self.geom.conflict_entry_hv - self.buffer_hv
        if hv.s >= target:
            return 0.0
        if hv.s - hv.length >= self.geom.conflict_exit_hv:
            return INF
        s, v, t = hv.s, hv.v, 0.0
        while t < self.horizon:
            a = self.params.a_accel_max_hv if t < self.params.rho_hv else self.params.a_brake_min_hv
            v = max(0.0, v + a * self.dt)
            if v <= 0.0 and t >= self.params.rho_hv:
                return INF
            s += v * self.dt
            t += self.dt
            if s >= target:
                return t
        return INF

    def decide(self, av, hv, t: float, f_theta: float | None = None) -> Decision:
        hv_gone = hv.s - hv.length >= self.geom.conflict_exit_hv
        av_gone = av.s - av.length >= self.geom.conflict_exit_av
        t_clear = self._self_clear_time(av)
        t_entry = INF if (hv_gone or av_gone) else self._hv_earliest_entry(hv)

        go = t_clear < t_entry
        if not go and self.av_has_row and not hv_gone and self._hv_can_still_stop(hv):
            go = True
            t_entry = t_clear + self.deficit_scale  # right-of-way assertion
        if not go and av.s >= self.geom.conflict_entry_av:
            go = True                               # committed: clear the area
            t_entry = t_clear + self.deficit_scale
        if self.stop_latch and go:
            self.stop_latch = False

        if go:
            margin = 1.0 if t_entry is INF else (t_entry - t_clear) / self.deficit_scale
            accel = self._go_accel(av.v)
            strategy = Strategy.NOT_YIELD
        else:
            deficit = self.deficit_scale if t_clear is INF else t_clear - t_entry
            depth = min(1.0, max(0.0, deficit / self.deficit_scale))
            margin = -depth
            accel = (self.params.a_brake_min_av
                     + (self.params.a_brake_max_av - self.params.a_brake_min_av) * depth)
            # Saturate at a full stop before the entry line.
            d_stop = self.geom.conflict_entry_av - av.s - self.stop_margin
            if av.v <= V_STOP:
                self.stop_latch = True
                accel = 0.0
            elif d_stop > 0.05:
                a_req = -av.v * av.v / (2.0 * d_stop)
                if a_req < accel:
                    accel = max(a_req, self.params.a_brake_max_av)
            elif av.s < self.geom.conflict_entry_av:
                accel = self.params.a_brake_max_av
            strategy = Strategy.YIELD

        accel = min(self.limits.a_max, max(self.limits.a_min, accel))
        return Decision(
            strategy=strategy,
            accel_cmd=accel,
            equilibria=(),
            selection_reason="Override",
            profile=StrategyProfile(strategy, Strategy.NOT_YIELD),
            u_s=min(1.0, max(-1.0, margin)),
            f_theta=1.0,
            matrix=None,
        )


class CoastPolicy:
    """Zero-command policy (constant speed); used by constructed tests and HIL warmups."""

    name = "coast"

    def reset(self) -> None:
        pass

    def decide(self, av, hv, t: float, f_theta: float | None = None) -> Decision:
        return Decision(
            strategy=Strategy.NOT_YIELD,
            accel_cmd=0.0,
            equilibria=(),
            selection_reason="Override",
            profile=StrategyProfile(Strategy.NOT_YIELD, Strategy.NOT_YIELD),
            u_s=0.0,
            f_theta=1.0,
            matrix=None,
        )
