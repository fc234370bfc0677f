"""Work accounting shared by the quadrature and channel layers.

Counters measure machine-independent units (sample evaluations, quadrature
cells, bisection steps) so precision-scaling experiments reproduce exactly
across machines and backends; wall time is kept separately and never
participates in determinism checks.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction

from .dyadic import Dyadic


@dataclass
class WorkCounter:
    psd_evals: int = 0
    quadrature_cells: int = 0
    max_precision_requested: int = 0
    bisection_iters: int = 0

    def note_precision(self, n: int):
        if n > self.max_precision_requested:
            self.max_precision_requested = n

    def merge(self, other: "WorkCounter"):
        self.psd_evals += other.psd_evals
        self.quadrature_cells += other.quadrature_cells
        self.bisection_iters += other.bisection_iters
        self.note_precision(other.max_precision_requested)


@dataclass
class WorkReport:
    """One profiling row: a computation's output plus its work counters."""

    spec_id: str
    target: str
    precision_bits: int
    psd_evals: int
    quadrature_cells: int
    max_precision_requested: int
    bisection_iters: int
    wall_time: float
    value: Dyadic
    error_bound: Fraction

    @classmethod
    def from_counter(cls, spec_id, target, bits, counter: WorkCounter,
                     wall_time, value, error_bound) -> "WorkReport":
        return cls(spec_id, target, bits, counter.psd_evals,
                   counter.quadrature_cells, counter.max_precision_requested,
                   counter.bisection_iters, wall_time, value,
                   Fraction(error_bound))
