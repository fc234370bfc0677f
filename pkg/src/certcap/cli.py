"""Command-line interface.

Subcommands: capacity, water-level, psd, discretize, certify, bench.
Every run is a batch computation: the tool prints a certified value, its
error bound 2**-M, the water-filling regime, and the work counters.

Exit codes: 0 success, 2 usage or expression parse error, 3 positivity /
certification failure, 4 requested precision exceeds the quadrature cell
ceiling (override with --cell-ceiling or CERTCAP_CELL_CEILING).
"""

from __future__ import annotations

import argparse
import sys
import time
from fractions import Fraction

from . import rigorint
from .cfunc import CATALOG, CertifyStatus, catalog_noise, certify_bounds
from .dyadic import Dyadic
from .errors import (BudgetExceededError, CertcapError, ContractError,
                     ParseError, PositivityError)
from .parse import parse_expression
from .profiling import TARGETS, emit_report, fit_growth, sweep_precision
from .waterfill import (ChannelSpec, Regime, capacity, discretized_capacity,
                        psd_at, water_level_closed, water_level_general)
from .work import WorkCounter, WorkReport

EXIT_OK = 0
EXIT_USAGE = 2
EXIT_CERTIFY = 3
EXIT_BUDGET = 4


def rational(text: str) -> Fraction:
    """Accept integers, decimals, and p/q fractions, all exact."""
    text = text.strip()
    try:
        if "/" in text:
            num, den = text.split("/")
            return Fraction(int(num), int(den))
        if "." in text:
            whole, frac = text.split(".")
            sign = -1 if whole.startswith("-") else 1
            whole = whole.lstrip("+-")
            return sign * Fraction(int((whole or "0") + frac), 10 ** len(frac))
        return Fraction(int(text))
    except (ValueError, ZeroDivisionError) as exc:
        raise argparse.ArgumentTypeError(f"not a rational: {text!r} ({exc})")


def digits_to_bits(digits: int) -> int:
    # 2**-M <= 10**-d  <=>  M >= d * log2(10); 3322/1000 over-approximates
    return (digits * 3322 + 999) // 1000


def build_parser() -> argparse.ArgumentParser:
    top = argparse.ArgumentParser(
        prog="certcap",
        description="Certified capacity and water-filling for band-limited "
                    "colored-noise Gaussian channels")
    sub = top.add_subparsers(dest="command", required=True)

    def common(p, power_required=True):
        p.add_argument("--psd", required=True,
                       help="noise p.s.d.: an expression in f, or catalog:<name> "
                            f"(names: {', '.join(sorted(CATALOG))}, stress<k>)")
        p.add_argument("--bandwidth", type=rational, default=Fraction(1),
                       help="band edge B > 0 (rational, default 1)")
        if power_required:
            p.add_argument("--power", type=rational, required=True,
                           help="total power budget P > 0 (rational)")
        prec = p.add_mutually_exclusive_group()
        prec.add_argument("--precision-bits", type=int, default=16,
                          help="certified output error at most 2^-M (default 16)")
        prec.add_argument("--digits", type=int,
                          help="decimal digits; converted to bits upward")
        p.add_argument("--format", choices=("text", "csv", "json"),
                       default="text")
        p.add_argument("--path", choices=("auto", "modulus", "smooth"),
                       default="auto", help="quadrature route (default auto)")
        p.add_argument("--binary", action="store_true",
                       help="also print the value as a signed binary string")
        p.add_argument("--cell-ceiling", type=int,
                       help="override the quadrature cell ceiling")

    p_cap = sub.add_parser("capacity", help="certified channel capacity (nats)")
    common(p_cap)
    p_cap.add_argument("--bits-out", action="store_true",
                       help="display the capacity in bits as well")

    p_wl = sub.add_parser("water-level", help="certified water level")
    common(p_wl)

    p_psd = sub.add_parser("psd", help="optimal transmit p.s.d. at a frequency")
    common(p_psd)
    p_psd.add_argument("--freq", type=rational, required=True)

    p_disc = sub.add_parser("discretize",
                            help="sub-channel water-filling approximation")
    common(p_disc)
    p_disc.add_argument("--subchannels", type=int, required=True)

    p_cert = sub.add_parser("certify",
                            help="certify positivity / no-clip properties")
    common(p_cert, power_required=False)
    p_cert.add_argument("--power", type=rational,
                        help="needed for --no-clip")
    what = p_cert.add_mutually_exclusive_group(required=True)
    what.add_argument("--min-above", type=rational,
                      help="certify min of the p.s.d. >= this bound")
    what.add_argument("--max-below", type=rational,
                      help="certify max of the p.s.d. <= this bound")
    what.add_argument("--no-clip", action="store_true",
                      help="certify the closed-form level clears the noise")

    p_bench = sub.add_parser("bench", help="work-vs-precision sweep")
    common(p_bench)
    p_bench.add_argument("--precision-list", required=True,
                         help="comma-separated ascending bit counts, e.g. 8,12,16")
    p_bench.add_argument("--target", choices=TARGETS, default="capacity")
    p_bench.add_argument("--freq", type=rational,
                         help="frequency for the psd target")
    p_bench.add_argument("--fit-counter", default="quadrature_cells",
                         help="counter to fit a growth slope for (text format)")
    return top


def _noise(args):
    text = args.psd.strip()
    if text.startswith("catalog:"):
        return catalog_noise(text[len("catalog:"):], args.bandwidth)
    return parse_expression(text, (0, args.bandwidth))


def _bits(args) -> int:
    if getattr(args, "digits", None):
        return digits_to_bits(args.digits)
    return args.precision_bits


def _spec(args) -> ChannelSpec:
    return ChannelSpec(args.bandwidth, args.power, _noise(args))


def _print_value(args, label, value: Dyadic, bits: int, extra=()):
    digits = bits * 302 // 1000 + 2
    err = Fraction(1, 1 << bits)
    print(f"{label} = {value.decimal_string_rounded(digits)}")
    print(f"error bound <= 2^-{bits} = {float(err):.3e}")
    if args.binary:
        print(f"binary: {value.binary_string()}")
    for line in extra:
        print(line)


def _print_work(report: WorkReport):
    print(f"work: psd_evals={report.psd_evals} "
          f"quadrature_cells={report.quadrature_cells} "
          f"bisection_iters={report.bisection_iters} "
          f"max_precision={report.max_precision_requested} "
          f"wall_time={report.wall_time:.3f}s")


def _machine_out(args, report: WorkReport):
    if args.format == "csv":
        print(emit_report([report], "csv"), end="")
    else:
        print(emit_report([report], "json"))


def cmd_capacity(args) -> int:
    spec = _spec(args)
    bits = _bits(args)
    result = capacity(spec, bits, args.path)
    if args.format != "text":
        _machine_out(args, result.work)
        return EXIT_OK
    extra = [f"regime: {result.regime.value}"]
    if args.bits_out:
        nats = result.value.to_fraction()
        extra.append(f"capacity in bits/s ~ {float(nats) / 0.6931471805599453:.6f}")
    _print_value(args, "capacity (nats)", result.value, bits, extra)
    _print_work(result.work)
    return EXIT_OK


def cmd_water_level(args) -> int:
    spec = _spec(args)
    bits = _bits(args)
    counter = WorkCounter()
    t0 = time.perf_counter()
    wl = water_level_general(spec, bits, counter)
    wall = time.perf_counter() - t0
    report = WorkReport.from_counter(spec.label, "water_level", bits, counter,
                                     wall, wl.level_hat, wl.phi_gap)
    if args.format != "text":
        _machine_out(args, report)
        return EXIT_OK
    _print_value(args, "water level", wl.level_hat, bits,
                 [f"regime: {wl.regime.value}",
                  f"certified power mismatch <= {float(wl.phi_gap):.3e}"])
    _print_work(report)
    return EXIT_OK


def cmd_psd(args) -> int:
    spec = _spec(args)
    bits = _bits(args)
    freq = Dyadic.from_rational(args.freq.numerator, args.freq.denominator,
                                bits + 8)
    # the dyadic rounding must not leave the band
    if freq.to_fraction() > spec.bandwidth:
        freq = Dyadic.from_rational(spec.bandwidth.numerator,
                                    spec.bandwidth.denominator, bits + 8)
        if freq.to_fraction() > spec.bandwidth:
            freq = freq - Dyadic(1, -(bits + 8))
    if freq.sign < 0:
        freq = Dyadic(0)
    counter = WorkCounter()
    t0 = time.perf_counter()
    wl = water_level_general(spec, bits, counter)
    pv = psd_at(spec, wl, freq, bits, counter)
    wall = time.perf_counter() - t0
    report = WorkReport.from_counter(spec.label, "psd", bits, counter, wall,
                                     pv.value, pv.error_bound)
    if args.format != "text":
        _machine_out(args, report)
        return EXIT_OK
    _print_value(args, f"optimal p.s.d. at f={args.freq}", pv.value, bits,
                 [f"regime: {wl.regime.value}",
                  f"level uncertainty <= {float(pv.level_error):.3e}"])
    _print_work(report)
    return EXIT_OK


def cmd_discretize(args) -> int:
    spec = _spec(args)
    bits = _bits(args)
    counter = WorkCounter()
    t0 = time.perf_counter()
    res = discretized_capacity(spec, args.subchannels, bits, counter)
    wall = time.perf_counter() - t0
    report = WorkReport.from_counter(spec.label, "discretize", bits, counter,
                                     wall, res.c_n, Fraction(1, 1 << bits))
    if args.format != "text":
        _machine_out(args, report)
        return EXIT_OK
    _print_value(args, f"discretized capacity ({res.n_sub} sub-channels)",
                 res.c_n, bits,
                 [f"sub-channel width = {res.delta_f}",
                  f"discrete level = {res.level}",
                  f"power check (exact) = {res.power_check}"])
    _print_work(report)
    return EXIT_OK


def cmd_certify(args) -> int:
    noise = _noise(args)
    bits = _bits(args)
    counter = WorkCounter()
    if args.no_clip:
        if args.power is None:
            print("certify --no-clip needs --power", file=sys.stderr)
            return EXIT_USAGE
        spec = ChannelSpec(args.bandwidth, args.power, noise)
        wl = water_level_closed(spec, counter, certify_bits=max(bits, 8))
        print(f"no-clip regime: {wl.regime.value}")
        return EXIT_OK if wl.regime is Regime.NO_CLIP_CERTIFIED else EXIT_CERTIFY
    if args.min_above is not None:
        res = certify_bounds(noise, "min_above", args.min_above, bits, counter)
        kind = f"min >= {args.min_above}"
    else:
        res = certify_bounds(noise, "max_below", args.max_below, bits, counter)
        kind = f"max <= {args.max_below}"
    print(f"{kind}: {res.status.value.upper()}")
    if res.witness_point is not None:
        print(f"counterexample near f = {res.witness_point.decimal_string()}")
    return EXIT_OK if res.status is CertifyStatus.CERTIFIED else EXIT_CERTIFY


def cmd_bench(args) -> int:
    spec = _spec(args)
    try:
        bits_list = [int(tok) for tok in args.precision_list.split(",") if tok]
    except ValueError:
        print(f"bad precision list: {args.precision_list!r}", file=sys.stderr)
        return EXIT_USAGE
    freq = None
    if args.target == "psd":
        if args.freq is None:
            print("bench --target psd needs --freq", file=sys.stderr)
            return EXIT_USAGE
        freq = Dyadic.from_rational(args.freq.numerator, args.freq.denominator,
                                    max(bits_list) + 8)
    reports = sweep_precision(spec, bits_list, args.target, args.path, freq)
    if args.format == "text":
        print(emit_report(reports, "csv"), end="")
        try:
            slope = fit_growth(reports, args.fit_counter)
            print(f"# fitted growth: log2({args.fit_counter}) ~ "
                  f"{slope:.3f} * precision_bits")
        except CertcapError as exc:
            print(f"# growth fit unavailable: {exc}")
        return EXIT_OK
    print(emit_report(reports, args.format), end="" if args.format == "csv" else "\n")
    return EXIT_OK


_COMMANDS = {
    "capacity": cmd_capacity,
    "water-level": cmd_water_level,
    "psd": cmd_psd,
    "discretize": cmd_discretize,
    "certify": cmd_certify,
    "bench": cmd_bench,
}


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return exc.code if isinstance(exc.code, int) else EXIT_USAGE
    if getattr(args, "cell_ceiling", None):
        rigorint.set_cell_ceiling(args.cell_ceiling)
    try:
        return _COMMANDS[args.command](args)
    except ParseError as exc:
        print(f"expression error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except BudgetExceededError as exc:
        print(f"resource guard: {exc}", file=sys.stderr)
        return EXIT_BUDGET
    except (PositivityError, ContractError) as exc:
        print(f"certification failure: {exc}", file=sys.stderr)
        return EXIT_CERTIFY
    except ValueError as exc:
        print(f"invalid input: {exc}", file=sys.stderr)
        return EXIT_USAGE
    finally:
        rigorint.set_cell_ceiling(None)


if __name__ == "__main__":
    sys.exit(main())
