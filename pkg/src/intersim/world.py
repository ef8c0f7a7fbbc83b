"""World model: perpendicular paths, vehicle states, and overlap tests.

The truck travels west-to-east in the southern lane of a two-lane road, the
car south-to-north in the eastern lane of the crossing road. Both roads meet
at an unsignalized intersection; the conflict area is the overlap of the two
lanes actually driven. Arc length ``s`` of each vehicle is the position of
its front bumper along its own path, zero at its conflict-area entry.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace

from .errors import ConfigError
from .utilities import ConflictGeometry

HV_HEADING = 0.0
AV_HEADING = math.pi / 2.0


@dataclass
class VehicleState:
    """Kinematic state of one vehicle on its straight path.

    ``s`` is the front-bumper arc length (conflict entry at 0), ``x``/``y``
    the body-center world position maintained by the world placement.
    """

    s: float
    v: float
    a: float = 0.0
    length: float = 4.6
    width: float = 1.8
    heading: float = 0.0
    x: float = 0.0
    y: float = 0.0

    def copy(self) -> "VehicleState":
        return replace(self)


@dataclass(frozen=True)
class VehicleSpec:
    length: float
    width: float


@dataclass(frozen=True)
class WorldConfig:
    """Intersection layout, protocol distances, and timing."""

    lane_width_av: float = 3.5
    lane_width_hv: float = 3.5
    clearance_margin: float = 8.0       # beyond the far road edge to count as "left"
    interaction_start: float = 120.0    # truck distance at which the car spawns (m)
    algorithm_on: float = 100.0         # truck distance at which the policy engages (m)
    speed_limit: float = 12.5           # m/s
    dt: float = 0.05
    decision_period: float = 0.5
    horizon: float = 90.0               # episode wall limit (sim seconds)
    epilogue: float = 0.0               # extra recorded seconds after leader arrival
    epilogue_until_clear: bool = False  # instead keep going until both vehicles cleared
    spawn_lead: float = 10.0            # truck warmup distance before the 120 m trigger
    av_spawn_offset: float = 0.0        # car spawn distance minus the truck's (m)

    def __post_init__(self) -> None:
        if self.algorithm_on <= 0 or self.interaction_start < self.algorithm_on:
            raise ConfigError("need interaction_start >= algorithm_on > 0")
        if self.dt <= 0 or self.decision_period < self.dt:
            raise ConfigError("need decision_period >= dt > 0")
        if self.speed_limit <= 0:
            raise ConfigError("speed limit must be positive")

    # Lane centerlines in world coordinates.
    @property
    def hv_center_y(self) -> float:
        return -0.5 * self.lane_width_hv

    @property
    def av_center_x(self) -> float:
        return 0.5 * self.lane_width_av

    def conflict_geometry(self) -> ConflictGeometry:
        return ConflictGeometry(
            conflict_entry_av=0.0,
            conflict_exit_av=self.lane_width_hv,
            conflict_entry_hv=0.0,
            conflict_exit_hv=self.lane_width_av,
            intersection_exit_av=2.0 * self.lane_width_hv + self.clearance_margin,
            intersection_exit_hv=self.lane_width_av + self.clearance_margin,
        )

    def conflict_rect(self) -> tuple[float, float, float, float]:
        """(x_min, x_max, y_min, y_max) of the conflict area, world frame."""
        return (0.0, self.lane_width_av, -self.lane_width_hv, 0.0)

    def place_hv(self, hv: VehicleState) -> None:
        hv.heading = HV_HEADING
        hv.x = hv.s - 0.5 * hv.length
        hv.y = self.hv_center_y

    def place_av(self, av: VehicleState) -> None:
        av.heading = AV_HEADING
        av.x = self.av_center_x
        av.y = av.s - self.lane_width_hv - 0.5 * av.length


def body_rect(v: VehicleState) -> tuple[float, float, float, float]:
    """Axis-aligned body rectangle (x_min, x_max, y_min, y_max)."""
    if abs(math.cos(v.heading)) > 0.5:  # along x
        hx, hy = 0.5 * v.length, 0.5 * v.width
    else:
        hx, hy = 0.5 * v.width, 0.5 * v.length
    return (v.x - hx, v.x + hx, v.y - hy, v.y + hy)


def rects_overlap(a: tuple[float, float, float, float],
                  b: tuple[float, float, float, float]) -> bool:
    return a[0] < b[1] and b[0] < a[1] and a[2] < b[3] and b[2] < a[3]


def bodies_collide(av: VehicleState, hv: VehicleState) -> bool:
    return rects_overlap(body_rect(av), body_rect(hv))


def occupies_conflict(v: VehicleState, world: WorldConfig) -> bool:
    return rects_overlap(body_rect(v), world.conflict_rect())
