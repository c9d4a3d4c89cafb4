"""Finite-difference stencils on uniform grids.

A stencil is a set of integer grid offsets with exact rational weights.
Applied with step ``h`` it estimates the ``d``-th derivative as
``h**-d * sum(c_j * f(x + j*h))``.  Weights are kept as
:class:`fractions.Fraction` so that the Taylor moment conditions can be
checked without any tolerance; conversion to floating point happens only
when a stencil is applied.
"""

from __future__ import annotations

import enum
import math
from collections import Counter
from dataclasses import dataclass
from fractions import Fraction
from typing import Callable, Iterable, Optional, Sequence

import numpy as np

from .series import Series, check_uniform

__all__ = [
    "Stencil",
    "Scheme",
    "Family",
    "Accuracy",
    "BoundaryPolicy",
    "StencilError",
    "EvaluationError",
    "SCHEMES",
    "moment",
    "solve_rational",
    "generate_stencil",
    "builtin_stencil",
    "theoretical_order",
    "estimate",
    "differentiate_series",
    "trace_summary",
]


class StencilError(ValueError):
    """Invalid offsets, derivative order or coefficients."""


class EvaluationError(RuntimeError):
    """A function evaluation failed while applying a stencil.

    ``abscissa`` is the point at which ``f`` was being evaluated and
    ``original`` the exception it raised.
    """

    def __init__(self, abscissa, original: BaseException):
        self.abscissa = abscissa
        self.original = original
        super().__init__(f"evaluation failed at x = {abscissa}: {original}")


def moment(offsets: Sequence[int], coefficients: Sequence[Fraction], m: int) -> Fraction:
    """Exact moment ``sum(c_j * offset_j**m)`` (with ``0**0 == 1``)."""
    return sum((Fraction(c) * Fraction(o) ** m for o, c in zip(offsets, coefficients)), Fraction(0))


def _order_from_moments(offsets, coefficients, d: int) -> int:
    for m in range(d):
        if moment(offsets, coefficients, m) != 0:
            raise StencilError(f"moment m={m} is nonzero; not a derivative-{d} stencil")
    if moment(offsets, coefficients, d) != math.factorial(d):
        raise StencilError(f"moment m={d} must equal {d}! for a derivative-{d} stencil")
    # a nonzero n-point stencil cannot annihilate n consecutive monomials
    for m in range(d + 1, d + len(offsets) + 2):
        if moment(offsets, coefficients, m) != 0:
            return m - d
    raise StencilError("moment sequence does not terminate; degenerate coefficients")


@dataclass(frozen=True)
class Stencil:
    """Offsets, exact weights and the derivative / accuracy orders they realise.

    Construction validates every invariant: strictly increasing offsets,
    matching lengths, exact moment conditions and a maximal accuracy order.
    """

    offsets: tuple
    coefficients: tuple
    derivative_order: int
    accuracy_order: int

    def __post_init__(self):
        offsets = tuple(int(o) for o in self.offsets)
        coeffs = tuple(Fraction(c) for c in self.coefficients)
        object.__setattr__(self, "offsets", offsets)
        object.__setattr__(self, "coefficients", coeffs)
        if len(offsets) != len(coeffs):
            raise StencilError("offsets and coefficients differ in length")
        if any(b <= a for a, b in zip(offsets, offsets[1:])):
            raise StencilError("offsets must be strictly increasing")
        d = self.derivative_order
        if d < 1:
            raise StencilError("derivative order must be positive")
        if d > len(offsets) - 1:
            raise StencilError("derivative order exceeds stencil capacity")
        p = _order_from_moments(offsets, coeffs, d)
        if p != self.accuracy_order:
            raise StencilError(f"accuracy order is {p}, not {self.accuracy_order}")

    @property
    def width(self) -> int:
        return self.offsets[-1] - self.offsets[0] + 1

    def trimmed(self) -> "Stencil":
        """Same stencil with zero-weight offsets removed."""
        keep = [(o, c) for o, c in zip(self.offsets, self.coefficients) if c != 0]
        return Stencil(
            tuple(o for o, _ in keep),
            tuple(c for _, c in keep),
            self.derivative_order,
            self.accuracy_order,
        )

    def fits(self, index: int, length: int) -> bool:
        """Whether the stencil centred at ``index`` stays inside ``range(length)``."""
        return index + self.offsets[0] >= 0 and index + self.offsets[-1] <= length - 1

    def label(self) -> str:
        return "[" + ",".join(str(o) for o in self.offsets) + "]"

    def to_dict(self) -> dict:
        return {
            "offsets": list(self.offsets),
            "coefficients": [str(c) for c in self.coefficients],
            "derivative_order": self.derivative_order,
            "accuracy_order": self.accuracy_order,
        }


class Family(str, enum.Enum):
    FORWARD = "forward"
    BACKWARD = "backward"
    CENTERED = "centered"


class Accuracy(str, enum.Enum):
    LOW = "low"
    HIGH = "high"


@dataclass(frozen=True)
class Scheme:
    family: Family
    accuracy: Accuracy

    def __post_init__(self):
        object.__setattr__(self, "family", Family(self.family))
        object.__setattr__(self, "accuracy", Accuracy(self.accuracy))

    @property
    def name(self) -> str:
        """Short name used in reports, e.g. ``centered2``."""
        return f"{self.family.value}{1 if self.accuracy is Accuracy.LOW else 2}"

    @classmethod
    def from_name(cls, name: str) -> "Scheme":
        for s in SCHEMES:
            if s.name == name:
                return s
        raise ValueError(f"unknown scheme {name!r}")


# Report order: all low-accuracy schemes first, then the high ones.
SCHEMES = tuple(Scheme(f, a) for a in Accuracy for f in Family)


class BoundaryPolicy(str, enum.Enum):
    FALLBACK = "fallback"
    SHRINK = "shrink"
    MARK_MISSING = "mark-missing"


def solve_rational(matrix: Sequence[Sequence[Fraction]], rhs: Sequence[Fraction]) -> list:
    """Solve a square linear system exactly by Gauss-Jordan elimination."""
    n = len(matrix)
    aug = [[Fraction(v) for v in row] + [Fraction(b)] for row, b in zip(matrix, rhs)]
    for col in range(n):
        pivot = next((r for r in range(col, n) if aug[r][col] != 0), None)
        if pivot is None:
            raise StencilError("singular moment system")
        aug[col], aug[pivot] = aug[pivot], aug[col]
        pv = aug[col][col]
        aug[col] = [v / pv for v in aug[col]]
        for r in range(n):
            if r != col and aug[r][col] != 0:
                factor = aug[r][col]
                aug[r] = [a - factor * b for a, b in zip(aug[r], aug[col])]
    return [row[n] for row in aug]


def generate_stencil(offsets: Iterable[int], derivative_order: int) -> Stencil:
    """Weights for ``offsets`` that estimate the given derivative.

    Solves the Vandermonde moment system
    ``sum_j c_j * offset_j**m == d! * [m == d]`` for ``m = 0 .. n-1``
    in exact rational arithmetic.

    Raises
    ------
    StencilError
        On duplicate offsets or when ``derivative_order >= len(offsets)``.
    """
    offsets = [int(o) for o in offsets]
    d = int(derivative_order)
    if len(set(offsets)) != len(offsets):
        raise StencilError("duplicate offsets make the moment system singular")
    if d < 1:
        raise StencilError("derivative order must be positive")
    if d >= len(offsets):
        raise StencilError("derivative order exceeds stencil capacity")
    offsets.sort()
    n = len(offsets)
    matrix = [[Fraction(o) ** m for o in offsets] for m in range(n)]
    rhs = [Fraction(math.factorial(d)) if m == d else Fraction(0) for m in range(n)]
    coeffs = solve_rational(matrix, rhs)
    return Stencil(tuple(offsets), tuple(coeffs), d, _order_from_moments(offsets, coeffs, d))


def theoretical_order(stencil: Stencil) -> int:
    """Leading truncation order ``p`` recomputed from the exact moments."""
    return _order_from_moments(stencil.offsets, stencil.coefficients, stencil.derivative_order)


_F = Fraction
_BUILTIN = {
    ("forward", "low"): ((0, 1), (_F(-1), _F(1)), 1),
    ("forward", "high"): ((0, 1, 2), (_F(-3, 2), _F(2), _F(-1, 2)), 2),
    ("backward", "low"): ((-1, 0), (_F(-1), _F(1)), 1),
    # 3, -4, 1 over 2h; the all-plus variant does not sum to zero
    ("backward", "high"): ((-2, -1, 0), (_F(1, 2), _F(-2), _F(3, 2)), 2),
    ("centered", "low"): ((-1, 1), (_F(-1, 2), _F(1, 2)), 2),
    # five-point first derivative, zero centre weight dropped
    ("centered", "high"): ((-2, -1, 1, 2), (_F(1, 12), _F(-8, 12), _F(8, 12), _F(-1, 12)), 4),
}


def builtin_stencil(scheme: Scheme) -> Stencil:
    """The first-derivative stencil for one of the six schemes."""
    offsets, coeffs, p = _BUILTIN[(Family(scheme.family).value, Accuracy(scheme.accuracy).value)]
    return Stencil(offsets, coeffs, 1, p)


def _exact_kind(*values):
    """``'fraction'``, ``'mpmath'`` or ``None`` (plain floats)."""
    for v in values:
        if isinstance(v, Fraction):
            return "fraction"
        if type(v).__module__.startswith("mpmath"):
            return "mpmath"
    return None


def _as_number(c: Fraction, kind):
    if kind == "fraction":
        return c
    if kind == "mpmath":
        import mpmath

        return mpmath.mpf(c.numerator) / c.denominator
    return c.numerator / c.denominator


def estimate(stencil: Stencil, f: Callable, x, h) -> float:
    """Apply ``stencil`` to ``f`` at ``x`` with step ``h``.

    Floats are the normal case.  When ``x`` or ``h`` is a ``Fraction`` the
    weights stay exact; when either is an :mod:`mpmath` number they are
    converted at the working precision.

    Raises
    ------
    ValueError
        If ``h <= 0``.
    EvaluationError
        If ``f`` fails at one of the stencil abscissae.
    """
    if not h > 0:
        raise ValueError(f"step must be positive, got {h}")
    kind = _exact_kind(h, x)
    samples = []
    for j, c in zip(stencil.offsets, stencil.coefficients):
        if c == 0:
            continue
        xj = x + j * h
        try:
            samples.append((c, f(xj)))
        except Exception as exc:
            raise EvaluationError(xj, exc) from exc
    if kind is None:
        return _weighted_sum(samples) / h ** stencil.derivative_order
    total = 0
    for c, fj in samples:
        total = total + _as_number(c, kind) * fj
    return total / h ** stencil.derivative_order


def _weighted_sum(samples) -> float:
    """``sum(c * f)`` accumulated exactly and rounded once."""
    return float(sum((c * Fraction(float(fj)) for c, fj in samples), Fraction(0)))


def _one_sided(direction: Family, accuracy: int, d: int) -> Stencil:
    k = accuracy + d - 1
    offsets = range(0, k + 1) if direction is Family.FORWARD else range(-k, 1)
    return generate_stencil(offsets, d)


def _centered(accuracy: int, d: int) -> Stencil:
    # widen the symmetric window until the requested accuracy is reached
    for m in range(1, accuracy + d + 1):
        s = generate_stencil(range(-m, m + 1), d).trimmed()
        if s.accuracy_order >= accuracy:
            return s
    raise StencilError("no centered stencil of that accuracy")  # pragma: no cover


def _family_stencil(family: Family, accuracy: int, d: int) -> Stencil:
    if family is Family.CENTERED:
        return _centered(accuracy, d)
    return _one_sided(family, accuracy, d)


def _fallback_candidates(stencil: Stencil, index: int, length: int):
    """One-sided stencils, widest first, never more accurate than ``stencil``."""
    d = stencil.derivative_order
    # point into the data: forward from the left half, backward from the right
    first = Family.FORWARD if index < length - 1 - index else Family.BACKWARD
    second = Family.BACKWARD if first is Family.FORWARD else Family.FORWARD
    for p in range(stencil.accuracy_order, 0, -1):
        for direction in (first, second):
            yield _one_sided(direction, p, d)


def _shrink_candidates(stencil: Stencil, family: Family, index: int, length: int):
    d = stencil.derivative_order
    step = 2 if family is Family.CENTERED else 1
    for p in range(stencil.accuracy_order - step, 0, -step):
        yield _family_stencil(family, p, d)
    first = Family.FORWARD if index < length - 1 - index else Family.BACKWARD
    second = Family.BACKWARD if first is Family.FORWARD else Family.FORWARD
    yield _one_sided(first, 1, d)
    yield _one_sided(second, 1, d)


def _choose(stencil, family, policy, index, length) -> Optional[Stencil]:
    if stencil.fits(index, length):
        return stencil
    if policy is BoundaryPolicy.MARK_MISSING:
        return None
    if policy is BoundaryPolicy.FALLBACK:
        candidates = _fallback_candidates(stencil, index, length)
    else:
        candidates = _shrink_candidates(stencil, family, index, length)
    for cand in candidates:
        if cand.fits(index, length):
            return cand
    raise StencilError(f"series of {length} samples is too short for any stencil")


def differentiate_series(
    series: Series,
    scheme: Scheme,
    policy: BoundaryPolicy = BoundaryPolicy.FALLBACK,
) -> Series:
    """Estimate the first derivative of a uniformly sampled series.

    Interior points use the scheme's stencil.  Where it does not fit, the
    boundary policy decides: ``fallback`` switches to the widest one-sided
    stencil of at most the same accuracy, ``shrink`` lowers the accuracy
    of the same family first, ``mark-missing`` emits NaN.  The stencil used
    at each index is recorded in the result's ``trace``.

    Raises
    ------
    fdbench.series.GridError
        If the spacing is not uniform to 1e-9 relative.
    StencilError
        If the series is too short for even the narrowest stencil.
    """
    policy = BoundaryPolicy(policy)
    stencil = builtin_stencil(scheme)
    n = len(series)
    if policy is not BoundaryPolicy.MARK_MISSING and n < stencil.derivative_order + 1:
        raise StencilError(f"series of {n} samples is too short for any stencil")
    h = check_uniform(series.times)
    values = np.asarray(series.values, dtype=float)
    out = np.full(n, np.nan)
    trace = []
    for i in range(n):
        s = _choose(stencil, Family(scheme.family), policy, i, n)
        trace.append(s)
        if s is None:
            continue
        acc = _weighted_sum((c, values[i + j]) for j, c in zip(s.offsets, s.coefficients) if c != 0)
        out[i] = acc / h ** s.derivative_order
    return Series(
        series.times,
        out,
        time_unit=series.time_unit,
        value_unit=f"{series.value_unit}/{series.time_unit}",
        trace=tuple(trace),
    )


def trace_summary(trace: Sequence[Optional[Stencil]]) -> dict:
    """Count of indices per stencil label (``missing`` for sentinels)."""
    counts = Counter("missing" if s is None else s.label() for s in trace)
    return dict(sorted(counts.items()))
