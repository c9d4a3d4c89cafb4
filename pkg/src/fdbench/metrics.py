"""Relative error metrics and per-scheme error tables."""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from .models import sample_model
from .presets import DEFAULT_PRESETS, get_preset
from .series import GridError, Series, check_same_axis
from .stencils import SCHEMES, BoundaryPolicy, differentiate_series

REFERENCES = ("experimental", "empirical")
_SHORT = {"experimental": "exp", "empirical": "emp"}


def _paired(reference: Series, estimate: Series):
    check_same_axis(reference, estimate)
    ok = ~(reference.missing | estimate.missing)
    return reference.values[ok], estimate.values[ok]


def signed_relative_error(reference: Series, estimate: Series) -> float:
    """``sum(ref - est) / sum(ref)`` over pairs where neither value is missing.

    Signed on purpose: positive and negative deviations cancel.

    Raises
    ------
    GridError
        If the two series do not share a time axis.
    ZeroDivisionError
        If the reference values sum to zero.
    """
    ref, est = _paired(reference, estimate)
    denom = float(np.sum(ref))
    if denom == 0:
        raise ZeroDivisionError("reference values sum to zero")
    return float(np.sum(ref - est)) / denom


def error_variants(reference: Series, estimate: Series) -> dict:
    """Signed error plus two magnitude-based variants.

    ``abs_l1 = sum|ref - est| / sum|ref|`` and
    ``rms = sqrt(sum (ref - est)**2 / sum ref**2)``; both are relative, like
    the signed form, and neither lets errors of opposite sign cancel.
    """
    ref, est = _paired(reference, estimate)
    signed = signed_relative_error(reference, estimate)
    diff = ref - est
    abs_l1 = float(np.sum(np.abs(diff))) / float(np.sum(np.abs(ref)))
    rms = math.sqrt(float(np.sum(diff * diff)) / float(np.sum(ref * ref)))
    return {"signed": signed, "abs_l1": abs_l1, "rms": rms}


@dataclass(frozen=True)
class ErrorEntry:
    scheme: str
    reference: str
    signed: float
    abs_l1: float
    rms: float

    def metric(self, name: str) -> float:
        return getattr(self, name)


@dataclass
class ErrorReport:
    case: str
    preset: str
    t0: float
    t1: float
    h: float
    n: int
    entries: list = field(default_factory=list)
    policy: str = BoundaryPolicy.FALLBACK.value

    def get(self, scheme: str, reference: str = "empirical") -> ErrorEntry:
        for e in self.entries:
            if e.scheme == scheme and e.reference == reference:
                return e
        raise KeyError((scheme, reference))

    def by_reference(self, reference: str) -> list:
        return [e for e in self.entries if e.reference == reference]

    def to_dict(self) -> dict:
        return {
            "case": self.case,
            "preset": self.preset,
            "grid": {"t0": self.t0, "t1": self.t1, "h": self.h, "n": self.n},
            "policy": self.policy,
            "entries": [
                {
                    "scheme": e.scheme,
                    "reference": e.reference,
                    "signed": e.signed,
                    "abs_l1": e.abs_l1,
                    "rms": e.rms,
                }
                for e in self.entries
            ],
        }

    def to_markdown(self, metric: str = "signed") -> str:
        """Two-column table, one row per ``e^{scheme}_{exp|emp}``."""
        lines = [
            f"Error values for {self.case} ({metric}; t in [{self.t0:g}, {self.t1:g}], h = {self.h:g})",
            "",
            "| Error | Value |",
            "|---|---|",
        ]
        for e in self.entries:
            lines.append(f"| $e_{{{_SHORT[e.reference]}}}^{{{e.scheme}}}$ | {e.metric(metric):.4f} |")
        return "\n".join(lines) + "\n"

    def to_csv(self) -> str:
        from .series import format_float

        rows = ["scheme,reference,signed,abs_l1,rms"]
        for e in self.entries:
            rows.append(
                ",".join([e.scheme, e.reference, format_float(e.signed), format_float(e.abs_l1), format_float(e.rms)])
            )
        return "\n".join(rows) + "\n"


def grid_size(t0: float, t1: float, h: float) -> int:
    """Number of points of the uniform grid ``t0, t0+h, ..., t1``."""
    if not h > 0 or not t1 > t0:
        raise ValueError("need h > 0 and t1 > t0")
    steps = (t1 - t0) / h
    k = round(steps)
    if abs(steps - k) > 1e-9 * max(1.0, steps):
        raise GridError(f"(t1 - t0)/h = {steps} is not an integer")
    return int(k) + 1


def case_estimates(model, t0: float, t1: float, n: int, policy=BoundaryPolicy.FALLBACK):
    """Sampled values, analytic rates and one derivative series per scheme."""
    values = sample_model(model, t0, t1, n)
    rates = sample_model(model, t0, t1, n, rate=True)
    estimates = {s.name: differentiate_series(values, s, policy) for s in SCHEMES}
    return values, rates, estimates


def case_error_table(
    case: str,
    grid: Optional[tuple] = None,
    experimental: Optional[Series] = None,
    *,
    model=None,
    preset: Optional[str] = None,
    overrides: Optional[dict] = None,
) -> ErrorReport:
    """Error of all six schemes against the analytic rate (and measured data).

    ``grid`` is ``(t0, t1, h)``; the preset's grid is used when omitted.
    ``experimental`` must hold measured rates on the same grid; without it
    only empirical entries are produced.
    """
    preset_obj = get_preset(preset or DEFAULT_PRESETS[case])
    if preset_obj.model != case:
        raise ValueError(f"preset {preset_obj.name!r} is a {preset_obj.model} preset, not {case}")
    if model is None:
        model = preset_obj.build(overrides)
    if grid is None:
        g = preset_obj.grid
        grid = (g["t0"], g["t1"], g["h"])
    t0, t1, h = (float(v) for v in grid)
    n = grid_size(t0, t1, h)
    _, rates, estimates = case_estimates(model, t0, t1, n)
    if experimental is not None:
        check_same_axis(rates, experimental, rtol=1e-9)
    report = ErrorReport(case, preset_obj.name, t0, t1, (t1 - t0) / (n - 1), n)
    for s in SCHEMES:
        est = estimates[s.name]
        if experimental is not None:
            report.entries.append(ErrorEntry(s.name, "experimental", **error_variants(experimental, est)))
        report.entries.append(ErrorEntry(s.name, "empirical", **error_variants(rates, est)))
    return report
