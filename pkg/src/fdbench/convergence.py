"""Observed order of accuracy and per-stencil cost."""

from __future__ import annotations

import json
import math
import sys
from dataclasses import dataclass
from typing import Callable, Optional, Sequence

import numpy as np
from scipy import stats

from .series import format_float
from .stencils import Stencil, estimate, theoretical_order

EPS = sys.float_info.epsilon
RATE_FLOOR = 100.0
ROUNDOFF_SAFETY = 10.0
MIN_FIT_POINTS = 3


@dataclass(frozen=True)
class ConvergenceResult:
    h: tuple
    errors: tuple
    floors: tuple
    above_floor: tuple
    slope: Optional[float]
    half_width: Optional[float]
    theoretical_order: int

    @property
    def indeterminate(self) -> bool:
        return self.slope is None

    @property
    def n_fitted(self) -> int:
        return sum(self.above_floor)

    def to_dict(self) -> dict:
        return {
            "h": list(self.h),
            "error": list(self.errors),
            "floor": list(self.floors),
            "above_floor": list(self.above_floor),
            "slope": self.slope,
            "half_width": self.half_width,
            "theoretical_order": self.theoretical_order,
            "status": "indeterminate" if self.indeterminate else "ok",
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2, sort_keys=True) + "\n"

    def to_csv(self) -> str:
        rows = ["h,error,above_floor"]
        for h, e, a in zip(self.h, self.errors, self.above_floor):
            rows.append(f"{format_float(h)},{format_float(e)},{'true' if a else 'false'}")
        return "\n".join(rows) + "\n"


def geometric_steps(h_max: float, h_min: float, points: int) -> np.ndarray:
    if points < 2 or not h_max > h_min > 0:
        raise ValueError("need points >= 2 and h_max > h_min > 0")
    # snap the ratio so that e.g. halving yields exact powers of two
    ratio = float(f"{(h_min / h_max) ** (1.0 / (points - 1)):.12g}")
    return h_max * ratio ** np.arange(points)


def roundoff_floor(stencil: Stencil, f: Callable, x: float, h: float, rate: float) -> float:
    """Error level below which cancellation, not truncation, dominates.

    The larger of ``100 eps |f'(x)|`` and a propagated round-off bound: each
    sample carries a relative error of order ``eps`` from evaluating ``f``
    and from rounding the abscissa, amplified by ``sum|c_j| / h**d``.
    """
    acc = 0.0
    for j, c in zip(stencil.offsets, stencil.coefficients):
        if c == 0:
            continue
        xj = x + j * h
        acc += abs(float(c)) * (abs(float(f(xj))) + abs(xj * rate))
    propagated = ROUNDOFF_SAFETY * EPS * acc / h ** stencil.derivative_order
    return max(RATE_FLOOR * EPS * abs(rate), propagated)


def fit_slope(h: Sequence[float], errors: Sequence[float]):
    """Least-squares slope of ``log(error)`` on ``log(h)`` with a 95% half-width."""
    lh, le = np.log(np.asarray(h, dtype=float)), np.log(np.asarray(errors, dtype=float))
    fit = stats.linregress(lh, le)
    dof = len(lh) - 2
    half = float(stats.t.ppf(0.975, dof) * fit.stderr) if dof > 0 else math.inf
    return float(fit.slope), half


def observed_order(
    stencil: Stencil,
    f: Callable,
    f_rate: Callable,
    x: float,
    h_grid: Sequence[float],
) -> ConvergenceResult:
    """Sweep ``h`` and fit the log-log error slope above the round-off floor.

    ``h_grid`` must be strictly decreasing and geometric with at least five
    points.  Fewer than three points above the floor leaves the order
    indeterminate (``slope is None``), which happens for functions the
    stencil differentiates exactly.
    """
    hs = [float(v) for v in h_grid]
    if len(hs) < 5:
        raise ValueError("need at least 5 step sizes")
    ratios = [b / a for a, b in zip(hs, hs[1:])]
    if not all(0 < r < 1 for r in ratios) or max(ratios) - min(ratios) > 1e-9 * max(ratios):
        raise ValueError("step sizes must form a decreasing geometric sequence")
    rate = float(f_rate(x))
    errors, floors, above = [], [], []
    for h in hs:
        err = abs(float(estimate(stencil, f, x, h)) - rate)
        floor = roundoff_floor(stencil, f, x, h, rate)
        errors.append(err)
        floors.append(floor)
        above.append(bool(err > floor))
    # once a step falls under the floor, smaller steps are not trusted either
    for i in range(1, len(above)):
        above[i] = above[i] and above[i - 1]
    slope = half = None
    if sum(above) >= MIN_FIT_POINTS:
        keep = [i for i, a in enumerate(above) if a]
        slope, half = fit_slope([hs[i] for i in keep], [errors[i] for i in keep])
    return ConvergenceResult(
        tuple(hs), tuple(errors), tuple(floors), tuple(above), slope, half, theoretical_order(stencil)
    )


@dataclass(frozen=True)
class CostProfile:
    evaluations: int
    multiply_adds: int
    before: int
    after: int

    def to_dict(self) -> dict:
        return {
            "evaluations": self.evaluations,
            "multiply_adds": self.multiply_adds,
            "before": self.before,
            "after": self.after,
        }


def cost_profile(stencil: Stencil) -> CostProfile:
    """Function evaluations and neighbouring samples one estimate needs."""
    nonzero = sum(1 for c in stencil.coefficients if c != 0)
    return CostProfile(
        evaluations=nonzero,
        multiply_adds=nonzero,
        before=max(0, -stencil.offsets[0]),
        after=max(0, stencil.offsets[-1]),
    )
