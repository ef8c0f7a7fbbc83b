"""Episode engine, scripted truck drivers, metrics, and batch evaluation.

An episode follows the interaction protocol: the truck spawns upstream and
approaches; when it is ``interaction_start`` meters from the conflict area
the car spawns at the same speed and distance; at ``algorithm_on`` meters the
selected policy engages. The episode ends when the leading vehicle reaches
the conflict area (the time-to-arrive snapshot of the lagging vehicle is
taken there), on collision, or on timeout. Traces are recorded step by step
and are exactly reproducible from (config, seed) plus, for external drivers,
the applied control log.
"""

from __future__ import annotations

import math
import random
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field, replace

from .baselines import AebGuard, CoastPolicy, NoScPolicy, RssPolicy, conflict_margin, windows_overlap
from .config import DriverModel, ScenarioConfig
from .errors import ConfigError, MetricError
from .game import ActuationLimits, Decision, ScPolicy, action_from_decision, pure_nash
from .utilities import Strategy, StrategyProfile, build_matrix
from .visibility import compute_blind_zone, relative_pose, visibility_probability
from .world import VehicleState, WorldConfig, bodies_collide, occupies_conflict

V_STOP = 0.05
KMH = 3.6

SPEED_BINS = ("Low", "LowMid", "Mid", "High")
BIN_RANGES_KMH = {"Low": (10.0, 30.0), "LowMid": (30.0, 40.0),
                  "Mid": (40.0, 50.0), "High": (50.0, 70.0)}
BIN_LIMITS_KMH = {"Low": 20.0, "LowMid": 45.0, "Mid": 45.0, "High": 70.0}
OVERSPEED_MARGIN_KMH = 15.0

CLASSIFICATIONS = ("Normal", "Danger", "FullStop", "Failed")


def speed_bin(v_kmh: float) -> str:
    """Initial-speed bin; boundaries closed on the left, open on the right."""
    if v_kmh < 30.0:
        return "Low"
    if v_kmh < 40.0:
        return "LowMid"
    if v_kmh < 50.0:
        return "Mid"
    return "High"


def step(world: WorldConfig, states: dict[str, VehicleState],
         commands: dict[str, float], dt: float,
         limits: dict[str, tuple[float, float]] | None = None) -> dict[str, VehicleState]:
    """Semi-implicit Euler update of all vehicles.

    v' = max(0, v + a*dt), s' = s + v'*dt, with the commanded acceleration
    saturated to each vehicle's physical envelope.
    """
    if dt <= 0:
        raise ValueError("dt must be positive")
    out: dict[str, VehicleState] = {}
    for name, st in states.items():
        a = commands.get(name, 0.0)
        if limits and name in limits:
            lo, hi = limits[name]
            a = min(hi, max(lo, a))
        nxt = st.copy()
        nxt.a = a
        nxt.v = max(0.0, st.v + a * dt)
        nxt.s = st.s + nxt.v * dt
        out[name] = nxt
    return out


# ---------------------------------------------------------------------------
# Scripted truck drivers


class ConstantThrottleDriver:
    """Holds a small constant acceleration drawn once per episode.

    Eases off when well past the limit (the throttle foot of an inattentive
    but not reckless driver), staying clear of the severe-overspeed bar.
    """

    OVER_CAP_KMH = 8.0

    def __init__(self, model: DriverModel, rng: random.Random):
        lo, hi = model.a_range
        self.a0 = rng.uniform(lo, hi)
        self.jitter = model.jitter
        self.rng = rng

    def act(self, eng: "EpisodeEngine") -> float:
        a = self.a0
        if self.jitter > 0.0:
            a += self.rng.uniform(-self.jitter, self.jitter)
        if eng.hv.v >= eng.world.speed_limit + self.OVER_CAP_KMH / KMH:
            return 0.0
        return a


class AggressiveDriver:
    """Tracks roughly 15% above the limit and never yields."""

    def __init__(self, model: DriverModel, rng: random.Random):
        pass

    def act(self, eng: "EpisodeEngine") -> float:
        target = 1.15 * eng.world.speed_limit
        return min(2.0, max(0.0, 0.5 * (target - eng.hv.v)))


class VisibilityYielderDriver:
    """Yields only to a car it can actually see.

    Perception is gated on the visibility probability: below the threshold
    the driver behaves exactly as if no car existed (so a car hidden in the
    blind zone changes nothing). When the car is seen and the constant-speed
    occupancy windows come closer than ``gap_margin`` seconds, the driver
    brakes at the comfort level, hard enough to stop before the entry line.
    """

    REACT_HORIZON = 6.0   # only react within this many seconds of own entry

    def __init__(self, model: DriverModel, rng: random.Random):
        self.f_threshold = model.f_threshold
        self.comfort_brake = model.comfort_brake
        self.gap_margin = model.gap_margin

    def _cruise(self, eng: "EpisodeEngine") -> float:
        return min(1.0, max(0.0, 0.3 * (eng.world.speed_limit - eng.hv.v)))

    def act(self, eng: "EpisodeEngine") -> float:
        av = eng.av
        if av is None or eng.f_theta is None or eng.f_theta < self.f_threshold:
            return self._cruise(eng)
        hv = eng.hv
        geom = eng.geom
        if hv.s - hv.length >= geom.conflict_exit_hv:
            return self._cruise(eng)
        d_entry = geom.conflict_entry_hv - hv.s
        if hv.v > V_STOP and d_entry / hv.v > self.REACT_HORIZON:
            return self._cruise(eng)
        if not windows_overlap(av, hv, geom) and conflict_margin(av, hv, geom) >= self.gap_margin:
            return self._cruise(eng)
        if hv.v <= V_STOP:
            return 0.0
        a = self.comfort_brake
        d_stop = geom.conflict_entry_hv - hv.s - 2.0
        if d_stop > 0.05:
            a_req = -hv.v * hv.v / (2.0 * d_stop)
            if a_req < a:
                a = a_req
        return a


class GameAwareDriver:
    """Plays the truck side of the same game the car solves.

    An idealization of a perfectly rational driver: at each decision period
    it rebuilds the payoff matrix (with the true visibility snapshot, since
    the driver knows what it can see) and plays its equilibrium strategy.
    """

    def __init__(self, model: DriverModel, rng: random.Random):
        self._accel = 0.0
        self._last_decision_step = None

    def _select_hv(self, m) -> tuple[Strategy, StrategyProfile]:
        eqs = pure_nash(m)
        if len(eqs) == 1:
            return eqs[0].hv, eqs[0]
        if eqs:
            best = max(eqs, key=lambda p: (m.u_hv(p.av, p.hv), p.hv is Strategy.YIELD))
            return best.hv, best
        values = {}
        for n in (Strategy.YIELD, Strategy.NOT_YIELD):
            worst_av = min((Strategy.YIELD, Strategy.NOT_YIELD), key=lambda s: m.u_hv(s, n))
            values[n] = (m.u_hv(worst_av, n), worst_av)
        strat = max(values, key=lambda n: (values[n][0], n is Strategy.YIELD))
        return strat, StrategyProfile(values[strat][1], strat)

    def act(self, eng: "EpisodeEngine") -> float:
        av = eng.av
        if av is None or eng.f_theta is None:
            return min(1.0, max(0.0, 0.3 * (eng.world.speed_limit - eng.hv.v)))
        if self._last_decision_step is None or eng.step_idx - self._last_decision_step >= eng.decision_steps:
            self._last_decision_step = eng.step_idx
            hv = eng.hv
            if hv.s > eng.geom.conflict_exit_hv or av.s > eng.geom.conflict_exit_av:
                self._accel = 0.0
                return self._accel
            m = build_matrix(av, hv, eng.f_theta, eng.geom, eng.scenario.weights,
                             eng.prediction)
            strat, profile = self._select_hv(m)
            u_s = m.entry(profile).components["u_s"]
            limits = ActuationLimits(a_min=eng.scenario.rss.a_brake_max_hv,
                                     a_max=eng.scenario.rss.a_accel_max_hv,
                                     a_go_max=1.0,
                                     a_yield_comf=-1.5,
                                     a_brake_strong=eng.scenario.rss.a_brake_min_hv)
            self._accel = action_from_decision(strat, u_s, limits)
        return self._accel


class ExternalDriver:
    """Accepts throttle/brake in [0, 1] injected from outside (HIL bridge)."""

    def __init__(self, model: DriverModel, rng: random.Random,
                 a_push: float = 3.0, a_stop: float = -8.0):
        self.a_push = a_push
        self.a_stop = a_stop
        self.throttle = 0.0
        self.brake = 0.0

    def set_control(self, throttle: float, brake: float) -> None:
        self.throttle = min(1.0, max(0.0, throttle))
        self.brake = min(1.0, max(0.0, brake))

    def act(self, eng: "EpisodeEngine") -> float:
        return self.throttle * self.a_push + self.brake * self.a_stop


_DRIVERS = {
    "constant_throttle": ConstantThrottleDriver,
    "aggressive": AggressiveDriver,
    "visibility_yielder": VisibilityYielderDriver,
    "game_aware": GameAwareDriver,
    "external": ExternalDriver,
}


def make_driver(model: DriverModel, rng: random.Random, scenario: ScenarioConfig):
    cls = _DRIVERS[model.variant]
    if cls is ExternalDriver:
        return ExternalDriver(model, rng, a_push=scenario.rss.a_accel_max_hv,
                              a_stop=scenario.rss.a_brake_max_hv)
    return cls(model, rng)


def make_policy(scenario: ScenarioConfig):
    geom = scenario.world.conflict_geometry()
    pred = scenario.resolved_prediction()
    if scenario.policy == "sc":
        return ScPolicy(scenario.cabin, scenario.view, scenario.weights, pred,
                        scenario.limits, geom, hysteresis=scenario.hysteresis,
                        av_reference=scenario.av_reference)
    if scenario.policy == "nosc":
        return NoScPolicy(scenario.cabin, scenario.view, scenario.weights, pred,
                          scenario.limits, geom, hysteresis=scenario.hysteresis,
                          av_reference=scenario.av_reference)
    if scenario.policy == "rss":
        return RssPolicy(scenario.rss, geom, scenario.limits,
                         v_ref=scenario.world.speed_limit, dt=scenario.world.dt)
    if scenario.policy == "coast":
        return CoastPolicy()
    raise ConfigError(f"unknown policy {scenario.policy!r}")


# ---------------------------------------------------------------------------
# Episode record


@dataclass
class EpisodeRecord:
    config_hash: str
    policy: str
    seed: int
    label: str
    steps: list[dict] = field(default_factory=list)
    control_log: list[tuple[float, float]] | None = None
    tta: float | None = None
    classification: str = "Failed"
    leader: str | None = None
    speed_bin: str | None = None
    v0_activation_kmh: float | None = None
    t_activation: float | None = None
    arrival_t: float | None = None
    end_t: float = 0.0
    lagging_l: float | None = None
    lagging_v: float | None = None
    aeb_fired: bool = False
    aeb_post_arrival: bool = False
    collision: bool = False
    overspeed: bool = False
    co_occupied: bool = False
    normalized_crossing_time: float = 0.0
    aborted: bool = False

    def metrics_row(self) -> dict:
        return {
            "policy": self.policy,
            "seed": self.seed,
            "label": self.label,
            "classification": self.classification,
            "tta": self.tta,
            "leader": self.leader,
            "speed_bin": self.speed_bin,
            "v0_kmh": self.v0_activation_kmh,
            "lag_l": self.lagging_l,
            "lag_v": self.lagging_v,
            "aeb": self.aeb_fired,
            "collision": self.collision,
            "co_occupied": self.co_occupied,
            "overspeed": self.overspeed,
            "norm_time": self.normalized_crossing_time,
            "end_t": self.end_t,
        }


def tta_from_states(lag_l: float, lag_v: float) -> float:
    """Time-to-arrive of the lagging vehicle; -1 when it stands still."""
    if lag_v <= V_STOP:
        return -1.0
    return lag_l / lag_v


def tta(record: EpisodeRecord) -> float:
    """Recompute the time-to-arrive metric from the recorded trace."""
    for row in record.steps:
        if row.get("arrival"):
            return tta_from_states(row["lag_l"], row["lag_v"])
    raise MetricError("episode has no leader-arrival event")


def classify(record: EpisodeRecord, danger_threshold: float | None = None) -> str:
    """Episode outcome; precedence Failed > Danger > FullStop > Normal.

    Failed marks invalid data (severe truck overspeed, timeout, abort) that
    the statistics exclude; Danger means the AEB fired or bodies collided;
    FullStop is the -1 time-to-arrive sentinel of a stopped lagging vehicle.
    """
    if record.aborted or record.overspeed:
        return "Failed"
    if record.aeb_fired or record.collision:
        return "Danger"
    if record.arrival_t is None:
        return "Failed"
    if record.tta is not None and record.tta == -1.0:
        return "FullStop"
    return "Normal"


# ---------------------------------------------------------------------------
# Episode engine


class EpisodeEngine:
    """Stepped two-vehicle episode; `tick()` advances one dt.

    Deterministic given (config, seed) and, for an external driver, the
    control applied at each step. The bridge drives this class directly;
    `run_episode` just loops it to completion.
    """

    WARMUP, APPROACH, ACTIVE, EPILOGUE, DONE = range(5)

    def __init__(self, scenario: ScenarioConfig, control_feed=None):
        self.scenario = scenario
        self.world = scenario.world
        self.geom = self.world.conflict_geometry()
        self.prediction = scenario.resolved_prediction()
        self.rng = random.Random(scenario.seed)
        self.policy = make_policy(scenario)
        self.driver = make_driver(scenario.driver, self.rng, scenario)
        self.guard = AebGuard(self.geom, scenario.aeb.threshold,
                              scenario.rss.a_brake_max_av, scenario.aeb.enabled,
                              horizon=scenario.aeb.horizon)
        self.blind_zone = compute_blind_zone(scenario.cabin)
        self.control_feed = control_feed

        self.hv = VehicleState(
            s=-(self.world.interaction_start + self.world.spawn_lead),
            v=scenario.initial_speed,
            length=scenario.hv_spec.length, width=scenario.hv_spec.width)
        self.world.place_hv(self.hv)
        self.av: VehicleState | None = None

        self.step_idx = 0
        self.phase = self.WARMUP
        self.decision_steps = max(1, round(self.world.decision_period / self.world.dt))
        self._activation_step: int | None = None
        self.f_theta: float | None = None
        self.last_decision: Decision | None = None
        self._arrival_seen = False
        self._epilogue_start: float | None = None

        self.record = EpisodeRecord(
            config_hash=scenario.config_hash(),
            policy=scenario.policy,
            seed=scenario.seed,
            label=scenario.label,
            control_log=[] if scenario.driver.variant == "external" else None,
        )

    # -- helpers -----------------------------------------------------------

    @property
    def t(self) -> float:
        return self.step_idx * self.world.dt

    @property
    def done(self) -> bool:
        return self.phase == self.DONE

    def _d_hv(self) -> float:
        return self.geom.conflict_entry_hv - self.hv.s

    def _spawn_av(self) -> None:
        d = self._d_hv() + self.world.av_spawn_offset
        self.av = VehicleState(
            s=self.geom.conflict_entry_av - d,
            v=self.hv.v,
            length=self.scenario.av_spec.length, width=self.scenario.av_spec.width)
        self.world.place_av(self.av)

    def compute_f(self) -> float | None:
        if self.av is None:
            return None
        pose = relative_pose(self.hv, self.av, self.scenario.cabin, self.blind_zone,
                             self.scenario.view, self.scenario.av_reference)
        return visibility_probability(pose, self.scenario.view)

    def blind_zone_world(self) -> list[tuple[float, float]]:
        """Blind-zone footprint polygon in world coordinates (UI overlay)."""
        ch, sh = math.cos(self.hv.heading), math.sin(self.hv.heading)
        fx = self.hv.x + 0.5 * self.hv.length * ch
        fy = self.hv.y + 0.5 * self.hv.length * sh
        return [(fx + bx * ch - by * sh, fy + bx * sh + by * ch)
                for bx, by in self.blind_zone.polygon()]

    def set_control(self, throttle: float, brake: float) -> None:
        if isinstance(self.driver, ExternalDriver):
            self.driver.set_control(throttle, brake)

    # -- main loop ---------------------------------------------------------

    def tick(self) -> dict | None:
        """Advance one simulation step; returns the recorded sample, if any."""
        if self.done:
            return None
        world, dt = self.world, self.world.dt

        # Phase transitions, based on the current (pre-step) state.
        if self.phase == self.WARMUP and self._d_hv() <= world.interaction_start:
            self._spawn_av()
            self.phase = self.APPROACH
        if self.phase == self.APPROACH and self._d_hv() <= world.algorithm_on:
            self.phase = self.ACTIVE
            self._activation_step = self.step_idx
            self.record.t_activation = self.t
            self.record.v0_activation_kmh = self.hv.v * KMH
            self.record.speed_bin = speed_bin(self.record.v0_activation_kmh)
            self.policy.reset()

        self.f_theta = self.compute_f()

        # Truck command.
        if self.control_feed is not None and isinstance(self.driver, ExternalDriver):
            ctrl = self.control_feed(self.step_idx)
            if ctrl is not None:
                self.driver.set_control(*ctrl)
        hv_a = self.driver.act(self)
        if self.record.control_log is not None and isinstance(self.driver, ExternalDriver):
            self.record.control_log.append((self.driver.throttle, self.driver.brake))

        # Car command.
        av_a = 0.0
        aeb_now = False
        if self.av is not None and self.phase in (self.ACTIVE, self.EPILOGUE):
            upstream = (self.av.s <= self.geom.conflict_exit_av
                        and self.hv.s <= self.geom.conflict_exit_hv)
            rel = self.step_idx - (self._activation_step or 0)
            if upstream and (self.last_decision is None or rel % self.decision_steps == 0):
                self.last_decision = self.policy.decide(self.av, self.hv, self.t,
                                                        f_theta=self.f_theta)
            if self.last_decision is not None and upstream:
                av_a = self.last_decision.accel_cmd
            if self.av.v >= self.world.speed_limit and av_a > 0.0:
                av_a = 0.0   # the car respects its lane speed limit
            override = self.guard.step(self.av, self.hv)
            if override is not None:
                av_a = override
                aeb_now = True
                if self.phase == self.EPILOGUE or self._arrival_seen:
                    self.record.aeb_post_arrival = True
                else:
                    self.record.aeb_fired = True

        sample = self._record_step(hv_a, av_a, aeb_now)

        # Integrate.
        states = {"hv": self.hv}
        commands = {"hv": hv_a}
        limits = {"hv": (self.scenario.rss.a_brake_max_hv, self.scenario.rss.a_accel_max_hv)}
        if self.av is not None:
            states["av"] = self.av
            commands["av"] = av_a
            limits["av"] = (self.scenario.limits.a_min, self.scenario.limits.a_max)
        nxt = step(world, states, commands, dt, limits)
        self.hv = nxt["hv"]
        world.place_hv(self.hv)
        if self.av is not None:
            self.av = nxt["av"]
            world.place_av(self.av)
        self.step_idx += 1

        self._post_step_checks()
        return sample

    def _record_step(self, hv_a: float, av_a: float, aeb_now: bool) -> dict | None:
        if self.av is None:
            return None
        d = self.last_decision
        sample = {
            "step": self.step_idx,
            "t": round(self.t, 6),
            "phase": ("approach", "active", "epilogue")[
                {self.APPROACH: 0, self.ACTIVE: 1, self.EPILOGUE: 2}[self.phase]],
            "av": {"s": self.av.s, "v": self.av.v, "a_cmd": av_a,
                   "x": self.av.x, "y": self.av.y},
            "hv": {"s": self.hv.s, "v": self.hv.v, "a_cmd": hv_a,
                   "x": self.hv.x, "y": self.hv.y},
            "f": self.f_theta,
            "aeb": aeb_now,
            "decision": None,
        }
        if d is not None and self.phase in (self.ACTIVE, self.EPILOGUE):
            sample["decision"] = {
                "strategy": d.strategy.value,
                "reason": d.selection_reason,
                "accel": d.accel_cmd,
                "u_s": d.u_s,
                "f_game": d.f_theta,
                "equilibria": [f"{p.av.value}|{p.hv.value}" for p in d.equilibria],
                "components": (d.matrix.entry(d.profile).components
                               if d.matrix is not None else {}),
            }
        self.record.steps.append(sample)
        return sample

    def _post_step_checks(self) -> None:
        world = self.world
        self.record.end_t = self.t

        if self.av is not None:
            if occupies_conflict(self.av, world) and occupies_conflict(self.hv, world):
                self.record.co_occupied = True
            if bodies_collide(self.av, self.hv):
                self.record.collision = True
                self._finalize()
                return

        if self.phase in (self.ACTIVE, self.APPROACH):
            limit_kmh = world.speed_limit * KMH
            if self.hv.v * KMH > limit_kmh + OVERSPEED_MARGIN_KMH:
                self.record.overspeed = True

        if not self._arrival_seen and self.av is not None:
            av_in = self.av.s >= self.geom.conflict_entry_av
            hv_in = self.hv.s >= self.geom.conflict_entry_hv
            if av_in or hv_in:
                self._on_arrival(av_in, hv_in)
                return

        if self.phase == self.EPILOGUE:
            cleared = (self.av is None
                       or (self.av.s - self.av.length >= self.geom.conflict_exit_av
                           and self.hv.s - self.hv.length >= self.geom.conflict_exit_hv))
            over = (world.epilogue_until_clear and cleared) or \
                   (not world.epilogue_until_clear
                    and self.t - (self._epilogue_start or 0.0) >= world.epilogue)
            if over or self.t >= world.horizon:
                self._finalize()
                return

        if self.t >= world.horizon and self.phase != self.EPILOGUE:
            self._finalize()

    def _on_arrival(self, av_in: bool, hv_in: bool) -> None:
        self._arrival_seen = True
        if av_in and hv_in:
            # Both crossed within one step: earlier overshoot leads.
            ot_av = self.av.s / max(self.av.v, 1e-9)
            ot_hv = self.hv.s / max(self.hv.v, 1e-9)
            leader = "av" if ot_av >= ot_hv else "hv"
        else:
            leader = "av" if av_in else "hv"
        lag = self.hv if leader == "av" else self.av
        lag_entry = self.geom.conflict_entry_hv if leader == "av" else self.geom.conflict_entry_av
        lag_l = max(0.0, lag_entry - lag.s)
        lag_v = lag.v

        rec = self.record
        rec.leader = leader
        rec.arrival_t = self.t
        rec.lagging_l = lag_l
        rec.lagging_v = lag_v
        rec.tta = tta_from_states(lag_l, lag_v)
        if rec.t_activation is not None:
            ideal = self.world.algorithm_on / self.world.speed_limit
            rec.normalized_crossing_time = (self.t - rec.t_activation) / ideal
        rec.steps.append({
            "step": self.step_idx,
            "t": round(self.t, 6),
            "phase": "arrival",
            "arrival": True,
            "leader": leader,
            "lag_l": lag_l,
            "lag_v": lag_v,
            "av": {"s": self.av.s, "v": self.av.v, "a_cmd": self.av.a,
                   "x": self.av.x, "y": self.av.y},
            "hv": {"s": self.hv.s, "v": self.hv.v, "a_cmd": self.hv.a,
                   "x": self.hv.x, "y": self.hv.y},
            "f": self.f_theta,
            "aeb": False,
            "decision": None,
        })
        wants_epilogue = self.world.epilogue > 0.0 or self.world.epilogue_until_clear
        if wants_epilogue:
            self.phase = self.EPILOGUE
            self._epilogue_start = self.t
        else:
            self._finalize()

    def _finalize(self) -> None:
        self.phase = self.DONE
        self.record.end_t = self.t
        if self.record.speed_bin is None:
            # Never reached the activation trigger; bin by the spawn speed.
            self.record.speed_bin = speed_bin(self.scenario.initial_speed * KMH)
        self.record.classification = classify(self.record)

    def run(self) -> EpisodeRecord:
        guard_steps = int(self.world.horizon / self.world.dt) + len(self.record.steps) + 10_000
        n = 0
        while not self.done:
            self.tick()
            n += 1
            if n > guard_steps:
                raise RuntimeError("episode failed to terminate")
        return self.record


def run_episode(scenario: ScenarioConfig, control_feed=None) -> EpisodeRecord:
    """Run one full episode to completion and classify it."""
    return EpisodeEngine(scenario, control_feed=control_feed).run()


# ---------------------------------------------------------------------------
# Scenario sampling and batch evaluation


@dataclass(frozen=True)
class ScenarioSampler:
    """Deterministic scenario generator spanning the four speed bins.

    Each draw picks a bin (with its matching lane speed limit), an initial
    truck speed inside the bin, a driver model from the mix, and a small car
    spawn offset. The same seed always yields the same scenario, so paired
    policy comparisons reuse identical worlds.
    """

    base: ScenarioConfig
    bins: tuple[str, ...] = SPEED_BINS
    driver_mix: tuple[tuple[str, float], ...] = (
        ("constant_throttle", 0.5),
        ("visibility_yielder", 0.3),
        ("game_aware", 0.2),
    )
    offset_range: tuple[float, float] = (-5.0, 5.0)

    def sample(self, seed: int) -> ScenarioConfig:
        rng = random.Random(seed)
        bin_name = self.bins[rng.randrange(len(self.bins))]
        lo, hi = BIN_RANGES_KMH[bin_name]
        v0_kmh = rng.uniform(lo, hi)
        limit_kmh = BIN_LIMITS_KMH[bin_name]
        total = sum(w for _, w in self.driver_mix)
        pick = rng.uniform(0.0, total)
        variant = self.driver_mix[-1][0]
        acc = 0.0
        for name, w in self.driver_mix:
            acc += w
            if pick <= acc:
                variant = name
                break
        offset = rng.uniform(*self.offset_range)
        return replace(
            self.base,
            seed=seed,
            initial_speed=v0_kmh / KMH,
            world=replace(self.base.world, speed_limit=limit_kmh / KMH,
                          av_spawn_offset=offset),
            driver=replace(self.base.driver, variant=variant),
            label=bin_name,
        )


def derive_seed(seed: int, index: int) -> int:
    return (seed * 2_000_003 + index * 9_973 + 1) % (2**31 - 1)


@dataclass
class BatchSummary:
    policy: str
    n: int
    seed: int
    rows: list[dict]
    counts: dict[str, dict[str, int]]   # bin -> classification -> count

    def totals(self) -> dict[str, int]:
        out = {c: 0 for c in CLASSIFICATIONS}
        out["Total"] = 0
        for bin_counts in self.counts.values():
            for c in CLASSIFICATIONS:
                out[c] += bin_counts.get(c, 0)
            out["Total"] += bin_counts.get("Total", 0)
        return out

    def count(self, classification: str, bins=None) -> int:
        bins = bins or SPEED_BINS
        return sum(self.counts.get(b, {}).get(classification, 0) for b in bins)


def _run_indexed(args) -> tuple[int, dict]:
    sampler, policy, seed, index = args
    scenario = sampler.sample(derive_seed(seed, index)).with_policy(policy)
    record = run_episode(scenario)
    row = record.metrics_row()
    row["index"] = index
    return index, row


def batch_run(sampler: ScenarioSampler, policy: str, n: int, seed: int,
              jobs: int = 1) -> BatchSummary:
    """Run ``n`` sampled episodes under one policy and aggregate the counts.

    Episode seeds derive from (seed, index), so summaries are identical for
    serial and parallel execution and across repeated runs.
    """
    if n < 1:
        raise ValueError("n must be >= 1")
    tasks = [(sampler, policy, seed, i) for i in range(n)]
    results: list[dict | None] = [None] * n
    if jobs > 1:
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            for index, row in pool.map(_run_indexed, tasks, chunksize=8):
                results[index] = row
    else:
        for task in tasks:
            index, row = _run_indexed(task)
            results[index] = row

    counts: dict[str, dict[str, int]] = {
        b: {c: 0 for c in CLASSIFICATIONS} | {"Total": 0} for b in SPEED_BINS}
    rows: list[dict] = []
    for row in results:
        assert row is not None
        rows.append(row)
        b = row["speed_bin"] or "Low"
        counts[b]["Total"] += 1
        counts[b][row["classification"]] += 1
    return BatchSummary(policy=policy, n=n, seed=seed, rows=rows, counts=counts)
