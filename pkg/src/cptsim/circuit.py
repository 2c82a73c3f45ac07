"""Steady-state phasor model of the series-inductor resonant CPT link.

Topology (all amplitudes are peak values)::

    v_in --- L_P ---+--- C_M ---+------+
                    |           |      |
                   C_P         C_S   R_load
                    |           |      |
    return ---------+-----------+------+

The operating frequency is the series resonance of ``L_P`` with the total
coupling capacitance; above ``f_max`` the switches cannot follow and no power
is transferred.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable

import numpy as np
from scipy.optimize import brentq, minimize_scalar

from .errors import DegenerateCoupler, NonPositiveInput, SingularNetwork
from .field_solver import CapMatrix, Network, PiModel


@dataclass(frozen=True)
class CircuitParams:
    v_in: float = 400.0
    l_p: float = 200e-6
    r_load: float = 500.0
    f_max: float = 1e6

    def __post_init__(self):
        for name in ("v_in", "l_p", "r_load", "f_max"):
            value = getattr(self, name)
            if not (math.isfinite(value) and value > 0):
                raise NonPositiveInput(f"{name} must be > 0, got {value!r}")


@dataclass(frozen=True)
class OperatingPoint:
    f_res: float
    feasible: bool
    p_out: float
    v_load_amplitude: float
    gain: float


@dataclass(frozen=True)
class ACSolution:
    frequency: float
    v_a: complex
    v_b: complex
    i_source: complex
    gain: float
    v_load_amplitude: float
    p_out: float


def resonance_frequency(l_p: float, c_total: float) -> float:
    if not (l_p > 0 and c_total > 0):
        raise NonPositiveInput(f"l_p and c_total must be > 0, got {l_p!r}, {c_total!r}")
    return 1.0 / (2.0 * math.pi * math.sqrt(l_p * c_total))


def total_capacitance(coupling) -> float:
    """Series combination of the two facing capacitances ``C13`` and ``C24``.

    A bare Pi model (anything with ``c_m``) carries no facing capacitances;
    its series element is returned, which is the same quantity for the ideal
    coupler.
    """
    if hasattr(coupling, "c_m"):
        if not coupling.c_m > 0:
            raise DegenerateCoupler("Pi model has no positive series capacitance")
        return coupling.c_m
    if isinstance(coupling, CapMatrix):
        coupling = coupling.network
    if isinstance(coupling, Network):
        c13, c24 = coupling.c13, coupling.c24
    else:
        c13, c24 = coupling
    if not (c13 + c24 > 0):
        raise DegenerateCoupler("C13 + C24 must be > 0")
    return c13 * c24 / (c13 + c24)


def solve_ac(params: CircuitParams, pi: PiModel, f: float) -> ACSolution:
    """Nodal analysis at frequency ``f`` (node A after the inductor, B at the load)."""
    if not (math.isfinite(f) and f > 0):
        raise NonPositiveInput(f"frequency must be > 0, got {f!r}")
    w = 2.0 * math.pi * f
    y_l = 1.0 / (1j * w * params.l_p)
    y_p = 1j * w * pi.c_p
    y_m = 1j * w * pi.c_m
    y_s = 1j * w * pi.c_s
    g = 1.0 / params.r_load
    y = np.array([[y_l + y_p + y_m, -y_m], [-y_m, y_m + y_s + g]])
    det = y[0, 0] * y[1, 1] - y[0, 1] * y[1, 0]
    if det == 0 or not np.isfinite(det):
        raise SingularNetwork(f"nodal matrix is singular at f={f:g} Hz")
    v_a, v_b = np.linalg.solve(y, np.array([params.v_in * y_l, 0.0]))
    i_s = (params.v_in - v_a) * y_l
    amp = abs(v_b)
    return ACSolution(f, complex(v_a), complex(v_b), complex(i_s), amp / params.v_in, amp,
                      amp * amp / (2.0 * params.r_load))


def operating_point(params: CircuitParams, pi: PiModel, coupling=None) -> OperatingPoint:
    """Evaluate the link at its series resonance.

    ``coupling`` supplies the facing capacitances for the resonance (a
    :class:`Network`, :class:`CapMatrix` or ``(c13, c24)`` pair); without it
    the Pi model's series element is used.
    """
    c_total = total_capacitance(coupling if coupling is not None else pi)
    f_res = resonance_frequency(params.l_p, c_total)
    if f_res > params.f_max:
        return OperatingPoint(f_res, False, 0.0, 0.0, 0.0)
    sol = solve_ac(params, pi, f_res)
    return OperatingPoint(f_res, True, sol.p_out, sol.v_load_amplitude, sol.gain)


def peak_power_frequency(params: CircuitParams, pi: PiModel, f_lo: float, f_hi: float,
                         n_scan: int = 400) -> tuple[float, float]:
    """Frequency in ``[f_lo, f_hi]`` that maximises load power, and that power.

    A log-spaced scan brackets the peak, then a bounded Brent search refines it.
    """
    if not (0 < f_lo < f_hi):
        raise NonPositiveInput("need 0 < f_lo < f_hi")
    grid = np.geomspace(f_lo, f_hi, n_scan)
    powers = np.array([solve_ac(params, pi, f).p_out for f in grid])
    k = int(np.argmax(powers))
    lo, hi = grid[max(k - 1, 0)], grid[min(k + 1, n_scan - 1)]
    if hi <= lo:
        return float(grid[k]), float(powers[k])
    res = minimize_scalar(lambda lf: -solve_ac(params, pi, math.exp(lf)).p_out,
                          bounds=(math.log(lo), math.log(hi)), method="bounded",
                          options={"xatol": 1e-10})
    f_best = math.exp(res.x)
    p_best = -res.fun
    if p_best < powers[k]:
        return float(grid[k]), float(powers[k])
    return f_best, p_best


def max_feasible_distance(c_total_of_d: Callable[[float], float], params: CircuitParams,
                          d_lo: float, d_hi: float) -> float:
    """Largest gap in ``[d_lo, d_hi]`` whose resonance stays at or below ``f_max``.

    Assumes the total capacitance decreases with distance. Returns ``d_hi`` when
    the whole range is feasible and ``nan`` when none of it is.
    """
    def excess(d):
        return resonance_frequency(params.l_p, c_total_of_d(d)) - params.f_max

    if excess(d_hi) <= 0:
        return d_hi
    if excess(d_lo) > 0:
        return math.nan
    return brentq(excess, d_lo, d_hi, xtol=1e-15, rtol=1e-13)
