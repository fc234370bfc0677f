"""Empirical work-versus-precision measurement.

`sweep_precision` runs one target computation per requested precision and
records machine-independent work counters (sample evaluations, quadrature
cells, bisection steps).  `fit_growth` recovers the growth exponent of a
counter against the precision in bits: a slope near 1.0 means the work
doubles per extra bit of certified output.

Reports always carry DISCLAIMER: the measured growth is an exhibit of
exponential-in-bits work for these algorithms, not a hardness proof of any
kind.
"""

from __future__ import annotations

import csv
import io
import json
import math
import time
from fractions import Fraction

from .dyadic import Dyadic
from .errors import DegenerateGrowthError
from .waterfill import ChannelSpec, capacity, psd_at, water_level_general
from .work import WorkCounter, WorkReport

DISCLAIMER = ("empirical work-vs-precision scaling; consistent with, but not "
              "a proof of, super-polynomial precision complexity")

COLUMNS = ("spec_id", "target", "precision_bits", "psd_evals",
           "quadrature_cells", "max_precision_requested", "bisection_iters",
           "wall_time", "value", "error_bound")

TARGETS = ("capacity", "water_level", "psd")


def sweep_precision(spec: ChannelSpec, bits_list, target: str = "capacity",
                    mode: str = "auto", freq: Dyadic | None = None):
    """One `WorkReport` per precision in the ascending list `bits_list`."""
    bits_list = list(bits_list)
    if not bits_list:
        raise ValueError("empty precision list")
    if bits_list != sorted(bits_list):
        raise ValueError("precision list must be ascending")
    if target not in TARGETS:
        raise ValueError(f"unknown target {target!r}; pick one of {TARGETS}")
    if target == "psd" and freq is None:
        raise ValueError("the psd target needs a frequency")
    reports = []
    for bits in bits_list:
        if target == "capacity":
            result = capacity(spec, bits, mode)
            reports.append(result.work)
            continue
        counter = WorkCounter()
        t0 = time.perf_counter()
        if target == "water_level":
            wl = water_level_general(spec, bits, counter)
            value = wl.level_hat
            bound = wl.phi_gap
        else:
            wl = water_level_general(spec, bits, counter)
            pv = psd_at(spec, wl, freq, bits, counter)
            value = pv.value
            bound = pv.error_bound
        wall = time.perf_counter() - t0
        reports.append(WorkReport.from_counter(
            spec.label, target, bits, counter, wall, value, bound))
    return reports


def fit_growth(reports, counter: str = "quadrature_cells") -> float:
    """Least-squares slope of log2(counter) against precision bits.

    A slope of 1.0 means the counter grows like 2**bits.  Raises
    `DegenerateGrowthError` when fewer than three reports are given, a
    counter is nonpositive, or the counters carry no variation.
    """
    if len(reports) < 3:
        raise DegenerateGrowthError("need at least three reports to fit")
    xs = [r.precision_bits for r in reports]
    ys = []
    for r in reports:
        v = getattr(r, counter)
        if not isinstance(v, (int, float)) or v <= 0:
            raise DegenerateGrowthError(
                f"counter {counter} must be positive to fit; got {v!r}")
        ys.append(math.log2(v))
    if len(set(ys)) == 1:
        raise DegenerateGrowthError(f"counter {counter} is constant")
    mx = sum(xs) / len(xs)
    my = sum(ys) / len(ys)
    denom = sum((x - mx) ** 2 for x in xs)
    return sum((x - mx) * (y - my) for x, y in zip(xs, ys)) / denom


def _row(report: WorkReport) -> dict:
    return {
        "spec_id": report.spec_id,
        "target": report.target,
        "precision_bits": report.precision_bits,
        "psd_evals": report.psd_evals,
        "quadrature_cells": report.quadrature_cells,
        "max_precision_requested": report.max_precision_requested,
        "bisection_iters": report.bisection_iters,
        "wall_time": report.wall_time,
        "value": report.value.decimal_string(),
        "error_bound": str(report.error_bound),
    }


def emit_report(reports, fmt: str = "csv") -> str:
    """Serialize reports; the schema is the fixed column tuple `COLUMNS`."""
    if fmt == "csv":
        buf = io.StringIO()
        buf.write(f"# {DISCLAIMER}\n")
        writer = csv.DictWriter(buf, fieldnames=COLUMNS)
        writer.writeheader()
        for r in reports:
            writer.writerow(_row(r))
        return buf.getvalue()
    if fmt == "json":
        return json.dumps(
            {"disclaimer": DISCLAIMER, "reports": [_row(r) for r in reports]},
            indent=2)
    raise ValueError(f"unknown report format {fmt!r}")


def load_report(text: str, fmt: str = "csv"):
    """Parse `emit_report` output back into row dictionaries (round-trip)."""
    if fmt == "csv":
        lines = [ln for ln in text.splitlines() if not ln.startswith("#")]
        rows = list(csv.DictReader(io.StringIO("\n".join(lines))))
    elif fmt == "json":
        rows = json.loads(text)["reports"]
    else:
        raise ValueError(f"unknown report format {fmt!r}")
    for row in rows:
        for key in ("precision_bits", "psd_evals", "quadrature_cells",
                    "max_precision_requested", "bisection_iters"):
            row[key] = int(row[key])
        row["wall_time"] = float(row["wall_time"])
        row["error_bound"] = Fraction(row["error_bound"])
    return rows
