import xml.etree.ElementTree as ET

import numpy as np
import pytest

from fdbench.svgplot import line_chart, nice_ticks

NS = "{http://www.w3.org/2000/svg}"


def _curves(k):
    x = np.linspace(0, 1, 5)
    return [(f"c{i}", x, x * i) for i in range(k)]


def test_one_polyline_per_curve():
    svg = line_chart(_curves(7), title="t", x_label="x", y_label="y")
    root = ET.fromstring(svg)
    lines = root.findall(f".//{NS}polyline")
    assert [p.get("id") for p in lines] == [f"curve-{k}" for k in range(7)]


def test_deterministic():
    a = line_chart(_curves(3), title="a & b", x_label="x", y_label="y")
    b = line_chart(_curves(3), title="a & b", x_label="x", y_label="y")
    assert a == b
    ET.fromstring(a)


def test_missing_points_are_skipped():
    x = np.array([0.0, 1.0, 2.0])
    svg = line_chart([("m", x, np.array([1.0, np.nan, 3.0]))], title="", x_label="", y_label="")
    pts = ET.fromstring(svg).find(f".//{NS}polyline").get("points").split()
    assert len(pts) == 2


@pytest.mark.parametrize("lo, hi", [(0, 1), (-3.2, 17.9), (5, 5), (1e-6, 3e-6)])
def test_nice_ticks_inside_range(lo, hi):
    ticks = nice_ticks(lo, hi)
    assert len(ticks) >= 2
    span = max(hi - lo, abs(lo), 1.0)
    assert all(lo - span <= v <= hi + span for v in ticks)
    steps = np.diff(ticks)
    assert np.allclose(steps, steps[0])
