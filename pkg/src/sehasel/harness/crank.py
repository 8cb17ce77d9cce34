"""Offset-free crank-slider turning the linear stroke into a rotation."""

from __future__ import annotations

import math
from dataclasses import dataclass

from sehasel.errors import RangeError, ValidationError


@dataclass(frozen=True)
class CrankSlider:
    crank_radius: float
    rod_length: float
    zero_angle: float = math.pi / 2

    def __post_init__(self):
        if not self.rod_length > self.crank_radius > 0:
            raise ValidationError("crank_radius", "need rod_length > crank_radius > 0")

    def slider_position(self, theta: float) -> float:
        """Pin-to-slider distance along the slider axis."""
        r, rod = self.crank_radius, self.rod_length
        return r * math.cos(theta) + math.sqrt(rod * rod - (r * math.sin(theta)) ** 2)

    def displacement(self, angle: float) -> float:
        """Slider travel toward the crank pivot when the crank turns by ``angle``."""
        return self.slider_position(self.zero_angle) - self.slider_position(self.zero_angle + angle)

    @property
    def max_displacement(self) -> float:
        # travel is monotone until the crank reaches the inner dead centre at theta = pi
        return self.displacement(math.pi - self.zero_angle)


def crank_angle(geom: CrankSlider, h: float) -> float:
    """Crank angle (radians, absolute) at slider displacement ``h`` from the zero position."""
    h_max = geom.max_displacement
    if not 0 <= h <= h_max:
        raise RangeError(f"h={h!r} outside reachable range [0, {h_max:.6g}]")
    if h == 0:
        return geom.zero_angle
    if h == h_max:
        return math.pi
    lo, hi = 0.0, math.pi - geom.zero_angle
    for _ in range(200):
        mid = 0.5 * (lo + hi)
        if geom.displacement(mid) < h:
            lo = mid
        else:
            hi = mid
        if hi - lo < 1e-15:
            break
    return geom.zero_angle + 0.5 * (lo + hi)


def solve_crank_radius(rod_length: float, stroke: float, span: float,
                       zero_angle: float = math.pi / 2) -> float:
    """Crank radius for which ``stroke`` of slider travel turns the crank by ``span`` radians."""
    if not (rod_length > 0 and stroke > 0 and 0 < span < math.pi - zero_angle + 1e-12):
        raise ValidationError("crank", "invalid stroke/span/rod geometry")
    # travel for a fixed span grows with small radii and collapses again as the
    # radius approaches the rod length; take the smallest radius that works
    def travel(r):
        return CrankSlider(r, rod_length, zero_angle).displacement(span)

    grid = [rod_length * i / 1000 for i in range(1, 1000)]
    hi = next((r for r in grid if travel(r) >= stroke), None)
    if hi is None:
        raise RangeError("stroke not reachable with this rod length")
    lo = hi - rod_length / 1000
    for _ in range(200):
        mid = 0.5 * (lo + hi)
        if travel(mid) < stroke:
            lo = mid
        else:
            hi = mid
        if hi - lo < 1e-16:
            break
    return 0.5 * (lo + hi)


def default_geometry(rod_length: float = 0.04, stroke: float = 0.008, span_deg: float = 48.1,
                     zero_angle: float = math.pi / 2) -> CrankSlider:
    r = solve_crank_radius(rod_length, stroke, math.radians(span_deg), zero_angle)
    return CrankSlider(r, rod_length, zero_angle)
