"""Profiler: sweeps, growth fitting, report round-trips."""

from fractions import Fraction

import pytest

from certcap.dyadic import Dyadic
from certcap.errors import DegenerateGrowthError
from certcap.parse import parse_expression
from certcap.profiling import (DISCLAIMER, emit_report, fit_growth, load_report,
                               sweep_precision)
from certcap.waterfill import ChannelSpec
from certcap.work import WorkReport


def _spec(P=2):
    return ChannelSpec(1, P, parse_expression("1 + f", (0, 1)))


def _fake_report(bits, cells):
    return WorkReport("synthetic", "capacity", bits, cells, cells, bits, 0,
                      0.0, Dyadic(1), Fraction(1, 1 << bits))


def test_sweep_validation():
    with pytest.raises(ValueError):
        sweep_precision(_spec(), [], "capacity")
    with pytest.raises(ValueError):
        sweep_precision(_spec(), [12, 8], "capacity")
    with pytest.raises(ValueError):
        sweep_precision(_spec(), [8], "nonsense")
    with pytest.raises(ValueError):
        sweep_precision(_spec(), [8], "psd")  # missing frequency


def test_sweep_deterministic_and_monotone():
    sweep = lambda: sweep_precision(_spec(), [6, 8, 10], "capacity", "modulus")
    first, second = sweep(), sweep()
    counts1 = [(r.psd_evals, r.quadrature_cells, r.bisection_iters)
               for r in first]
    counts2 = [(r.psd_evals, r.quadrature_cells, r.bisection_iters)
               for r in second]
    assert counts1 == counts2
    cells = [r.quadrature_cells for r in first]
    assert cells == sorted(cells)
    values1 = [r.value.to_fraction() for r in first]
    values2 = [r.value.to_fraction() for r in second]
    assert values1 == values2
    assert all(r.spec_id for r in first)


def test_sweep_flat_noise_short_circuits():
    spec = ChannelSpec(1, 3, parse_expression("1", (0, 1)))
    reports = sweep_precision(spec, [8, 16, 24], "capacity")
    assert [r.quadrature_cells for r in reports] == [0, 0, 0]


def test_sweep_water_level_and_psd_targets():
    spec = _spec(Fraction(1, 10))
    wl = sweep_precision(spec, [6, 8], "water_level")
    assert all(r.bisection_iters > 0 for r in wl)
    pv = sweep_precision(spec, [6, 8], "psd", freq=Dyadic(1, -1))
    assert all(r.target == "psd" for r in pv)


def test_fit_growth_synthetic():
    reports = [_fake_report(8, 1 << 8), _fake_report(16, 1 << 16),
               _fake_report(24, 1 << 24)]
    assert fit_growth(reports) == pytest.approx(1.0)
    reports = [_fake_report(8, 64), _fake_report(16, 128), _fake_report(24, 256)]
    assert fit_growth(reports) == pytest.approx(0.125)


def test_fit_growth_degenerate():
    with pytest.raises(DegenerateGrowthError):
        fit_growth([_fake_report(8, 10), _fake_report(16, 10)])
    flat = [_fake_report(8, 10), _fake_report(16, 10), _fake_report(24, 10)]
    with pytest.raises(DegenerateGrowthError):
        fit_growth(flat)
    zero = [_fake_report(8, 0), _fake_report(16, 4), _fake_report(24, 8)]
    with pytest.raises(DegenerateGrowthError):
        fit_growth(zero)


def test_fit_growth_real_modulus_path():
    reports = sweep_precision(_spec(), [8, 12, 16], "capacity", "modulus")
    slope = fit_growth(reports, "quadrature_cells")
    assert 0.9 <= slope <= 1.1


def test_emit_report_csv_round_trip():
    reports = [_fake_report(8, 100), _fake_report(16, 200)]
    text = emit_report(reports, "csv")
    assert text.startswith(f"# {DISCLAIMER}")
    rows = load_report(text, "csv")
    assert len(rows) == 2
    assert rows[0]["precision_bits"] == 8
    assert rows[1]["quadrature_cells"] == 200
    assert rows[0]["error_bound"] == Fraction(1, 256)
    assert rows[0]["value"] == "1"


def test_emit_report_json_round_trip():
    reports = [_fake_report(8, 100)]
    text = emit_report(reports, "json")
    assert DISCLAIMER in text
    rows = load_report(text, "json")
    assert rows[0]["spec_id"] == "synthetic"
    assert rows[0]["error_bound"] == Fraction(1, 256)


def test_emit_report_empty_and_errors():
    text = emit_report([], "csv")
    lines = text.strip().splitlines()
    assert len(lines) == 2  # disclaimer + header only
    assert lines[1].split(",")[0] == "spec_id"
    with pytest.raises(ValueError):
        emit_report([], "xml")


def test_stress_family_costs_grow_with_oscillation():
    from certcap.cfunc import catalog_noise
    from certcap.rigorint import plan_modulus

    cells = []
    for k in (0, 2, 4):
        noise = catalog_noise(f"stress{k}")
        cells.append(plan_modulus(noise, 0, 1, 10).cells)
    assert cells[1] >= 3 * cells[0]
    assert cells[2] >= 3 * cells[1]
