"""Closed-form parallel-plate stage.

The main capacitance is ``eps0 * eps_r * A / d``. With parasitic
capacitances neglected and unity coupling, the primary, secondary and mutual
elements of the Pi model all equal half of it.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Sequence

from .errors import NonPositiveCapacitance, NonPositiveDimension
from .materials import Material

EPS0 = 8.8541878128e-12  # F/m


@dataclass(frozen=True)
class PhysicalConstants:
    eps0: float = EPS0


@dataclass(frozen=True)
class IdealPi:
    c_p: float
    c_s: float
    c_m: float


def _check_positive(name, value):
    if not (isinstance(value, (int, float)) and math.isfinite(value) and value > 0):
        raise NonPositiveDimension(f"{name} must be > 0, got {value!r}")


def main_capacitance(material: Material, area: float, distance: float) -> float:
    _check_positive("area", area)
    _check_positive("distance", distance)
    return EPS0 * material.eps_r * area / distance


def ideal_pi(c_main: float) -> IdealPi:
    if not (math.isfinite(c_main) and c_main > 0):
        raise NonPositiveCapacitance(f"main capacitance must be > 0, got {c_main!r}")
    half = 0.5 * c_main
    return IdealPi(half, half, half)


def analytic_sweep(material: Material, plate_side: float,
                   distances: Sequence[float]) -> list[tuple[float, float]]:
    """Mutual capacitance ``c_m`` of the ideal Pi model at each distance."""
    if len(distances) == 0:
        raise NonPositiveDimension("distance list is empty")
    _check_positive("plate_side", plate_side)
    area = plate_side * plate_side
    return [(float(d), ideal_pi(main_capacitance(material, area, d)).c_m) for d in distances]
