"""Closed-form case-study models: logistic population, building temperature
and market price.

Every value/rate function accepts a float or an :mod:`mpmath` number and
computes in the same type, which lets convergence checks run above double
precision when round-off would otherwise hide the truncation error.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, Optional, Union

import mpmath
import numpy as np

from .series import Series

LOGISTIC_GUARD = 1e-9


class SingularityError(ArithmeticError):
    """Model evaluated at (or sampled across) a singular time."""

    def __init__(self, message: str, time: float):
        super().__init__(message)
        self.time = time


def _lib(*xs):
    return mpmath if any(isinstance(x, mpmath.mpf) for x in xs) else math


@dataclass(frozen=True)
class LogisticModel:
    """``dp/dt = -A p (p - p1)``, ``p(0) = p0``."""

    A: float
    p1: float
    p0: float

    def __post_init__(self):
        if self.p0 == 0:
            raise ValueError("p0 must be nonzero")
        if self.A * self.p1 == 0:
            raise ValueError("A*p1 must be nonzero")


@dataclass(frozen=True)
class TemperatureModel:
    """``T(t) = B2 - B1 F1(t) + C exp(-k1 t)`` with ``C`` fixed by ``T(0) = T0``."""

    B1: float
    B2: float
    k1: float
    omega: float
    T0: float
    C: float = field(init=False)

    def __post_init__(self):
        if not self.k1 > 0:
            raise ValueError("k1 must be positive")
        ratio = self.omega / self.k1
        object.__setattr__(self, "C", self.T0 - self.B2 + self.B1 / (1 + ratio * ratio))


@dataclass(frozen=True)
class MarketModel:
    """``P(t) = D exp(lambda b t / (c lambda - 1)) + a/b``."""

    D: float
    lam: float
    a: float
    b: float
    c: float

    def __post_init__(self):
        if self.b == 0:
            raise ValueError("b must be nonzero")
        if self.c * self.lam == 1:
            raise ValueError("c*lambda = 1 is a pole of the exponent")


Model = Union[LogisticModel, TemperatureModel, MarketModel]


# -- logistic ---------------------------------------------------------------

def _logistic_denominator(m: LogisticModel, t):
    lib = _lib(t)
    return m.p0 + (m.p1 - m.p0) * lib.exp(-m.A * m.p1 * t)


def logistic_value(m: LogisticModel, t):
    """Population ``p0 p1 / (p0 + (p1 - p0) exp(-A p1 t))``.

    Raises :class:`SingularityError` when the denominator is within
    ``1e-9 * |p1 - p0|`` of zero.
    """
    den = _logistic_denominator(m, t)
    if abs(den) <= LOGISTIC_GUARD * abs(m.p1 - m.p0):
        raise SingularityError(f"logistic solution is singular near t = {float(t):.6g}", float(t))
    return m.p0 * m.p1 / den


def logistic_rate(m: LogisticModel, t):
    p = logistic_value(m, t)
    return -m.A * p * (p - m.p1)


def logistic_singularity(m: LogisticModel) -> Optional[float]:
    """Real time at which the denominator vanishes, or ``None``."""
    if m.p1 == m.p0:
        return None
    ratio = m.p0 / (m.p0 - m.p1)
    if ratio <= 0:
        return None
    return math.log(ratio) / (-m.A * m.p1)


# -- temperature ------------------------------------------------------------

def f1(m: TemperatureModel, t):
    lib = _lib(t)
    r = m.omega / m.k1
    return (lib.cos(m.omega * t) + r * lib.sin(m.omega * t)) / (1 + r * r)


def f1_rate(m: TemperatureModel, t):
    lib = _lib(t)
    r = m.omega / m.k1
    return m.omega * (-lib.sin(m.omega * t) + r * lib.cos(m.omega * t)) / (1 + r * r)


def temperature_value(m: TemperatureModel, t):
    lib = _lib(t)
    return m.B2 - m.B1 * f1(m, t) + m.C * lib.exp(-m.k1 * t)


def temperature_rate(m: TemperatureModel, t):
    lib = _lib(t)
    return -m.B1 * f1_rate(m, t) - m.k1 * m.C * lib.exp(-m.k1 * t)


# -- market -----------------------------------------------------------------

def market_exponent(m: MarketModel, lib=math) -> float:
    """Growth rate ``r = lambda b / (c lambda - 1)``."""
    lam = mpmath.mpf(m.lam) if lib is mpmath else m.lam
    return lam * m.b / (m.c * lam - 1)


def market_price(m: MarketModel, t):
    lib = _lib(t)
    a = mpmath.mpf(m.a) if lib is mpmath else m.a
    return m.D * lib.exp(market_exponent(m, lib) * t) + a / m.b


def market_rate(m: MarketModel, t):
    lib = _lib(t)
    r = market_exponent(m, lib)
    return m.D * r * lib.exp(r * t)


def market_ode_rhs(m: MarketModel, price):
    """Right-hand side ``(lambda a - lambda b p) / (1 - lambda c)``."""
    lam = mpmath.mpf(m.lam) if isinstance(price, mpmath.mpf) else m.lam
    return (lam * m.a - lam * m.b * price) / (1 - lam * m.c)


def equilibrium_price(m: MarketModel) -> float:
    if m.b == 0:
        raise ValueError("b must be nonzero")
    return m.a / m.b


# -- dispatch ---------------------------------------------------------------

_VALUE = {LogisticModel: logistic_value, TemperatureModel: temperature_value, MarketModel: market_price}
_RATE = {LogisticModel: logistic_rate, TemperatureModel: temperature_rate, MarketModel: market_rate}


def value_function(model: Model) -> Callable:
    fn = _VALUE[type(model)]
    return lambda t: fn(model, t)


def rate_function(model: Model) -> Callable:
    fn = _RATE[type(model)]
    return lambda t: fn(model, t)


def singularities(model: Model) -> list:
    if isinstance(model, LogisticModel):
        t = logistic_singularity(model)
        return [] if t is None else [t]
    return []


def uniform_grid(t0: float, t1: float, n: int) -> np.ndarray:
    if not t1 > t0:
        raise ValueError("t1 must exceed t0")
    if n < 2:
        raise ValueError("need at least two samples")
    h = (t1 - t0) / (n - 1)
    return t0 + h * np.arange(n)


def sample_model(model, t0: float, t1: float, n: int, *, rate: bool = False) -> Series:
    """Sample a model (or any callable) on ``n`` uniform points of ``[t0, t1]``.

    ``model`` is a model instance or a plain ``f(t)``.  For model instances
    a singular time inside the interval is reported even when no grid
    point lands on it; the error names the nearest grid point.
    """
    times = uniform_grid(t0, t1, n)
    if callable(model):
        fn = model
    else:
        for ts in singularities(model):
            if t0 <= ts <= t1:
                nearest = float(times[np.argmin(np.abs(times - ts))])
                raise SingularityError(
                    f"model is singular at t = {ts:.6g} inside [{t0}, {t1}]; nearest grid point t = {nearest:.6g}",
                    ts,
                )
        fn = rate_function(model) if rate else value_function(model)
    values = []
    for t in times:
        try:
            values.append(float(fn(float(t))))
        except SingularityError as exc:
            raise SingularityError(f"{exc} (grid point t = {float(t):.6g})", exc.time) from exc
    return Series(times, np.array(values))
