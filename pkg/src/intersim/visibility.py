"""Truck-driver visual field model.

Computes the blind zone around a truck cab from its window geometry and the
probability that the interacting car is observed by the driver at a given
viewing angle. The driver's direct field of view is an attention-weighted
mixture of three head directions (left / center / right); each direction has
a central sub-field where observation is certain (up to an environmental
factor) and a peripheral band where it decays exponentially toward a minimum
at the field boundary. Anything inside the blind-zone footprint is never
observed.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from enum import Enum

from .errors import GeometryError, ModelError

DEG = math.pi / 180.0

DIRECTIONS = ("left", "center", "right")


def wrap_angle(angle: float) -> float:
    """Wrap an angle to (-pi, pi]."""
    a = math.fmod(angle + math.pi, 2.0 * math.pi)
    if a <= 0.0:
        a += 2.0 * math.pi
    return a - math.pi


@dataclass(frozen=True)
class CabinGeometry:
    """Truck cab dimensions that determine what the driver cannot see.

    Heights are above ground; the driver eye must sit above both window
    sills, otherwise the sight lines never reach the ground and the blind
    extents are undefined.
    """

    w: float = 2.5        # overall cab width (m)
    w_e: float = 0.6      # eye offset from the left cab side (m)
    l_e: float = 1.5      # eye distance behind the cab front (m)
    h_sm: float = 2.45    # side-window lower edge height (m)
    h_fm: float = 2.0     # windshield / center-stack lower edge height (m)
    h_e: float = 2.7      # driver eye height (m)

    def __post_init__(self) -> None:
        if self.w <= 0 or self.w_e <= 0 or self.l_e <= 0 or self.h_e <= 0:
            raise GeometryError("cab dimensions must be positive")
        if self.h_sm < 0 or self.h_fm < 0:
            raise GeometryError("sill heights must be non-negative")
        if self.h_e <= self.h_sm or self.h_e <= self.h_fm:
            raise GeometryError(
                "driver eye must sit above both window sills "
                f"(h_e={self.h_e}, h_sm={self.h_sm}, h_fm={self.h_fm})"
            )
        if not (0.0 < self.w_e < self.w):
            raise GeometryError("eye point must lie within the cab width")


@dataclass(frozen=True)
class BlindZone:
    """Ground region around the cab invisible from the driver seat.

    The footprint is an axis-aligned rectangle in the truck body frame
    (origin at the front-bumper center, x forward, y to the driver's left):
    it spans from the eye plane to ``l_front`` ahead of the bumper and from
    ``l_right`` beyond the right cab side to ``l_left`` beyond the left one.
    """

    l_left: float
    l_right: float
    l_front: float
    x_rear: float
    x_front: float
    y_right: float
    y_left: float

    def contains(self, x: float, y: float) -> bool:
        """Point-in-footprint test, boundary inclusive (body frame)."""
        return (self.x_rear <= x <= self.x_front) and (self.y_right <= y <= self.y_left)

    def polygon(self) -> list[tuple[float, float]]:
        """Closed footprint polygon (body frame, counter-clockwise)."""
        return [
            (self.x_rear, self.y_right),
            (self.x_front, self.y_right),
            (self.x_front, self.y_left),
            (self.x_rear, self.y_left),
            (self.x_rear, self.y_right),
        ]


def compute_blind_zone(g: CabinGeometry) -> BlindZone:
    """Blind extents from the sight lines over the window sills.

    Left/right extents come from the side-window sill, the frontal extent
    from the windshield lower edge; each is the ground distance between the
    cab boundary and where the sill sight line lands.
    """
    if g.h_e <= g.h_sm or g.h_e <= g.h_fm:
        raise GeometryError("driver eye must sit above both window sills")
    l_left = g.h_sm * g.w_e / (g.h_e - g.h_sm)
    l_right = g.h_sm * (g.w - g.w_e) / (g.h_e - g.h_sm)
    l_front = g.h_fm * g.l_e / (g.h_e - g.h_fm)
    half_w = 0.5 * g.w
    return BlindZone(
        l_left=l_left,
        l_right=l_right,
        l_front=l_front,
        x_rear=-g.l_e,
        x_front=l_front,
        y_right=-(half_w + l_right),
        y_left=half_w + l_left,
    )


@dataclass(frozen=True)
class ViewModel:
    """Angular parameters of the driver's direct field of view.

    ``omega`` is the attention split over the three head directions and must
    sum to one. ``a_max``/``a_c`` are the full direct field and central
    sub-field angular ranges per head direction, ``mu`` the central angle of
    each direction (derived from ``head_turn`` when not given). Angles are
    radians, measured from the driver's forward sight line, positive to the
    driver's right.
    """

    omega: tuple[float, float, float] = (0.0, 0.17, 0.83)
    xi: float = 1.0
    a_max: float = 200.0 * DEG
    a_c: float = 60.0 * DEG
    p_min: float = 0.3
    head_turn: float = 45.0 * DEG
    mu: tuple[float, float, float] = field(default=None)  # type: ignore[assignment]

    def __post_init__(self) -> None:
        if self.mu is None:
            object.__setattr__(self, "mu", (-self.head_turn, 0.0, self.head_turn))
        if abs(sum(self.omega) - 1.0) > 1e-9:
            raise ModelError(f"attention weights must sum to 1, got {self.omega}")
        if any(w < 0.0 or w > 1.0 for w in self.omega):
            raise ModelError("attention weights must lie in [0, 1]")
        if not (0.0 < self.a_c < self.a_max):
            raise ModelError("central sub-field must be narrower than the full field")
        if not (0.0 < self.p_min < 1.0):
            raise ModelError("boundary probability must lie in (0, 1)")
        if not (0.0 < self.xi <= 1.0):
            raise ModelError("environmental compensation must lie in (0, 1]")

    def mu_for(self, direction: str) -> float:
        return self.mu[DIRECTIONS.index(direction)]


class Region(Enum):
    BLIND_ZONE = "blind_zone"
    FRONT_FIELD = "front_field"
    ELSEWHERE = "elsewhere"


@dataclass(frozen=True)
class RelativePose:
    """Where the car sits in the truck driver's visual world.

    ``theta`` is the viewing angle from the driver's forward sight line,
    positive to the driver's right; ``range`` the eye-to-car distance.
    """

    theta: float
    range: float
    region: Region


def observation_probability(theta: float, direction: str, vm: ViewModel) -> float:
    """Probability of spotting the car when attending to one head direction.

    Certain (``xi``) inside the central sub-field, decaying exponentially
    through the peripheral band down to ``xi * p_min`` at the field boundary,
    zero beyond it.
    """
    if vm.a_c >= vm.a_max:
        raise ModelError("central sub-field must be narrower than the full field")
    d = abs(wrap_angle(theta - vm.mu_for(direction)))
    half_c = 0.5 * vm.a_c
    half_max = 0.5 * vm.a_max
    if d <= half_c:
        return vm.xi
    if d <= half_max:
        ratio = (2.0 * d - vm.a_c) / (vm.a_max - vm.a_c)
        return vm.xi * vm.p_min ** (ratio * ratio)
    return 0.0


def visibility_probability(pose: RelativePose, vm: ViewModel) -> float:
    """Attention-weighted probability that the car is observed at all.

    Zero inside the blind zone regardless of angle; otherwise the mixture of
    the three per-direction observation probabilities, clamped to [0, 1].
    """
    if pose.region is Region.BLIND_ZONE:
        return 0.0
    f = sum(
        w * observation_probability(pose.theta, direction, vm)
        for w, direction in zip(vm.omega, DIRECTIONS)
    )
    return min(1.0, max(0.0, f))


def relative_pose(
    hv,
    av,
    g: CabinGeometry,
    bz: BlindZone,
    vm: ViewModel | None = None,
    reference: str = "center",
) -> RelativePose:
    """Viewing angle and region of the car as seen from the truck driver seat.

    ``hv`` and ``av`` need world-frame center position (x, y), heading, and
    body dimensions (length, width). ``reference`` selects which point of the
    car is classified against the blind footprint: its geometric center
    (default) or, more conservatively, any body corner ("corner"). The
    front-field extent comes from ``vm`` (default ViewModel when omitted).
    """
    cos_h = math.cos(hv.heading)
    sin_h = math.sin(hv.heading)
    # Front-bumper center and eye point of the truck, world frame.
    front_x = hv.x + 0.5 * hv.length * cos_h
    front_y = hv.y + 0.5 * hv.length * sin_h
    # Driver sits w_e from the left cab side; left unit vector is (-sin, cos).
    left_offset = 0.5 * g.w - g.w_e
    eye_x = front_x - g.l_e * cos_h - left_offset * sin_h
    eye_y = front_y - g.l_e * sin_h + left_offset * cos_h

    def to_body(px: float, py: float) -> tuple[float, float]:
        dx = px - front_x
        dy = py - front_y
        return (dx * cos_h + dy * sin_h, -dx * sin_h + dy * cos_h)

    # Viewing angle from the eye point, right of forward positive.
    ex = (av.x - eye_x) * cos_h + (av.y - eye_y) * sin_h
    ey = -(av.x - eye_x) * sin_h + (av.y - eye_y) * cos_h
    theta = math.atan2(-ey, ex)
    rng = math.hypot(av.x - eye_x, av.y - eye_y)

    if reference == "corner":
        ca, sa = math.cos(av.heading), math.sin(av.heading)
        hl, hw = 0.5 * av.length, 0.5 * av.width
        points = [
            (av.x + sx * hl * ca - sy * hw * sa, av.y + sx * hl * sa + sy * hw * ca)
            for sx in (-1.0, 1.0)
            for sy in (-1.0, 1.0)
        ]
    else:
        points = [(av.x, av.y)]
    blind = any(bz.contains(*to_body(px, py)) for px, py in points)

    if vm is None:
        vm = ViewModel()
    if blind:
        region = Region.BLIND_ZONE
    elif any(abs(wrap_angle(theta - mu)) <= 0.5 * vm.a_max for mu in vm.mu):
        region = Region.FRONT_FIELD
    else:
        region = Region.ELSEWHERE
    return RelativePose(theta=theta, range=rng, region=region)
