"""Core data model: the cavity geometry, boundary parameters, and
piecewise-constant material profiles.

Conventions used throughout the package:

* profiles are right-continuous step functions on a closed interval
  [a1, a2]; the value at a2 is taken from the last piece;
* the outgoing-wave parameter at the right end may be infinite, which
  encodes a hard (Dirichlet) termination.  It is stored as IEEE inf and
  every formula uses the reciprocal, which is then exactly 0.0;
* a constraint family is a pair of profiles (lower, upper) kept on a
  common breakpoint grid.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Iterator, Sequence

from .errors import (
    ConstraintOrderViolation,
    EmptyConstraintGap,
    MismatchedInterval,
)


@dataclass(frozen=True)
class Interval:
    """Closed interval [a1, a2] occupied by the cavity."""

    a1: float
    a2: float

    def __post_init__(self):
        if not (math.isfinite(self.a1) and math.isfinite(self.a2)):
            raise ValueError("interval endpoints must be finite")
        if not self.a1 < self.a2:
            raise ValueError(f"need a1 < a2, got [{self.a1}, {self.a2}]")

    @property
    def length(self) -> float:
        return self.a2 - self.a1

    def contains(self, x: float) -> bool:
        return self.a1 <= x <= self.a2


@dataclass(frozen=True)
class BoundaryParams:
    """Radiation parameters (nu1, nu2) at the left and right ends.

    nu1 must be finite and nonnegative.  nu2 is positive and may be
    math.inf; the pair (nu1=0, nu2=inf) is rejected because it admits no
    outgoing flux at all.  The ordering nu1 <= nu2 is part of the model.
    """

    nu1: float
    nu2: float

    def __post_init__(self):
        if not (math.isfinite(self.nu1) and self.nu1 >= 0.0):
            raise ValueError(f"nu1 must be finite and >= 0, got {self.nu1}")
        if math.isnan(self.nu2) or self.nu2 <= 0.0:
            raise ValueError(f"nu2 must be positive (possibly inf), got {self.nu2}")
        if self.nu1 == 0.0 and math.isinf(self.nu2):
            raise ValueError("nu1 = 0 with nu2 = inf leaves no radiating end")
        if self.nu1 > self.nu2:
            raise ValueError(f"need nu1 <= nu2, got {self.nu1} > {self.nu2}")

    @property
    def inv_nu2(self) -> float:
        """1/nu2 with the hard-wall case giving exactly 0.0."""
        return 0.0 if math.isinf(self.nu2) else 1.0 / self.nu2

    @property
    def hard_right_end(self) -> bool:
        return math.isinf(self.nu2)


@dataclass(frozen=True)
class ResonatorConfig:
    """Geometry plus boundary parameters; the argument every solver takes."""

    interval: Interval
    bc: BoundaryParams

    @property
    def a1(self) -> float:
        return self.interval.a1

    @property
    def a2(self) -> float:
        return self.interval.a2

    @property
    def length(self) -> float:
        return self.interval.length

    @property
    def nu1(self) -> float:
        return self.bc.nu1

    @property
    def nu2(self) -> float:
        return self.bc.nu2

    @property
    def inv_nu2(self) -> float:
        return self.bc.inv_nu2


def _as_float_tuple(xs: Sequence[float]) -> tuple[float, ...]:
    return tuple(float(x) for x in xs)


@dataclass(frozen=True)
class PiecewiseConstant:
    """A real step function given by breakpoints and per-piece values.

    breakpoints has n+1 strictly increasing finite entries, values has n.
    Subclasses may add sign constraints; this base class allows any finite
    real values (needed for signed perturbation directions).
    """

    breakpoints: tuple[float, ...]
    values: tuple[float, ...]

    def __post_init__(self):
        object.__setattr__(self, "breakpoints", _as_float_tuple(self.breakpoints))
        object.__setattr__(self, "values", _as_float_tuple(self.values))
        bp, vals = self.breakpoints, self.values
        if len(bp) < 2:
            raise ValueError("need at least two breakpoints")
        if len(vals) != len(bp) - 1:
            raise ValueError(f"{len(bp)} breakpoints require {len(bp) - 1} values, got {len(vals)}")
        for x in bp:
            if not math.isfinite(x):
                raise ValueError("breakpoints must be finite")
        for a, b in zip(bp, bp[1:]):
            if not a < b:
                raise ValueError(f"breakpoints must be strictly increasing, got {a} before {b}")
        for v in vals:
            if not math.isfinite(v):
                raise ValueError("piece values must be finite")

    @property
    def interval(self) -> Interval:
        return Interval(self.breakpoints[0], self.breakpoints[-1])

    @property
    def n_pieces(self) -> int:
        return len(self.values)

    def pieces(self) -> Iterator[tuple[float, float, float]]:
        """Yield (x_left, x_right, value) triples in order."""
        bp = self.breakpoints
        for k, v in enumerate(self.values):
            yield bp[k], bp[k + 1], v

    def widths(self) -> tuple[float, ...]:
        bp = self.breakpoints
        return tuple(bp[k + 1] - bp[k] for k in range(len(self.values)))

    def __call__(self, x: float) -> float:
        bp = self.breakpoints
        if not bp[0] <= x <= bp[-1]:
            raise ValueError(f"x={x} outside [{bp[0]}, {bp[-1]}]")
        if x == bp[-1]:
            return self.values[-1]
        # right-continuous lookup
        lo, hi = 0, len(bp) - 1
        while hi - lo > 1:
            mid = (lo + hi) // 2
            if x < bp[mid]:
                hi = mid
            else:
                lo = mid
        return self.values[lo]

    @property
    def min_value(self) -> float:
        return min(self.values)

    @property
    def max_value(self) -> float:
        return max(self.values)

    @property
    def is_constant(self) -> bool:
        v0 = self.values[0]
        return all(v == v0 for v in self.values)

    def resampled(self, grid: Sequence[float]):
        """Same function expressed on a finer breakpoint grid.

        grid must contain every existing breakpoint; values are looked up
        at piece midpoints so no new discontinuities can appear.
        """
        g = _as_float_tuple(grid)
        missing = set(self.breakpoints) - set(g)
        if missing:
            raise ValueError(f"grid drops breakpoints {sorted(missing)}")
        vals = tuple(self(0.5 * (g[k] + g[k + 1])) for k in range(len(g) - 1))
        return type(self)(g, vals)


@dataclass(frozen=True)
class StepFunction(PiecewiseConstant):
    """Nonnegative step function; the type used for material profiles."""

    def __post_init__(self):
        super().__post_init__()
        for v in self.values:
            if v < 0.0:
                raise ValueError(f"profile values must be >= 0, got {v}")

    @classmethod
    def constant(cls, interval: Interval, value: float) -> "StepFunction":
        return cls((interval.a1, interval.a2), (value,))


def refine_breakpoints(f: PiecewiseConstant, g: PiecewiseConstant):
    """Re-express f and g on the union of their breakpoint grids.

    Raises MismatchedInterval when the two functions do not live on the
    same [a1, a2].  Exact float comparison is deliberate: configs are
    required to repeat the endpoints verbatim.
    """
    if (f.breakpoints[0], f.breakpoints[-1]) != (g.breakpoints[0], g.breakpoints[-1]):
        raise MismatchedInterval(
            f"[{f.breakpoints[0]}, {f.breakpoints[-1]}] vs [{g.breakpoints[0]}, {g.breakpoints[-1]}]"
        )
    merged = tuple(sorted(set(f.breakpoints) | set(g.breakpoints)))
    return f.resampled(merged), g.resampled(merged)


def merge_equal_pieces(f: PiecewiseConstant, atol: float = 0.0):
    """Drop interior breakpoints between pieces whose values agree to atol.

    The normalization used after structure recovery, where neighbouring
    regions frequently carry the identical constraint value.
    """
    bp, vals = f.breakpoints, f.values
    new_bp = [bp[0]]
    new_vals = [vals[0]]
    for k in range(1, len(vals)):
        if abs(vals[k] - new_vals[-1]) <= atol:
            continue
        new_bp.append(bp[k])
        new_vals.append(vals[k])
    new_bp.append(bp[-1])
    return type(f)(tuple(new_bp), tuple(new_vals))


@dataclass(frozen=True)
class AdmissibleFamily:
    """Constraint pair (lower, upper) on a common breakpoint grid.

    Construction refines both profiles onto the merged grid; it does not
    check the ordering.  Run validate_family before handing the family to
    a solver.
    """

    b1: StepFunction
    b2: StepFunction

    def __post_init__(self):
        lo, hi = refine_breakpoints(self.b1, self.b2)
        object.__setattr__(self, "b1", lo)
        object.__setattr__(self, "b2", hi)

    @property
    def breakpoints(self) -> tuple[float, ...]:
        return self.b1.breakpoints

    @property
    def interval(self) -> Interval:
        return self.b1.interval

    def gap_pieces(self) -> list[tuple[float, float, float, float]]:
        """Pieces where the constraints actually differ: (x0, x1, lo, hi)."""
        out = []
        for (x0, x1, lo), (_, _, hi) in zip(self.b1.pieces(), self.b2.pieces()):
            if lo < hi:
                out.append((x0, x1, lo, hi))
        return out

    @property
    def bangbang_ready(self) -> bool:
        """True when the lower profile is strictly positive wherever the
        constraints differ, which is what the nonlinear solver needs."""
        return all(lo > 0.0 for _, _, lo, _ in self.gap_pieces())

    def contains(self, B: StepFunction, atol: float = 0.0) -> bool:
        """Whether b1 <= B <= b2 pointwise (on the merged grid)."""
        lo1, bb = refine_breakpoints(self.b1, B)
        hi1, _ = refine_breakpoints(self.b2, B)
        lo1, bb = refine_breakpoints(lo1, bb)
        return all(
            l - atol <= v <= h + atol
            for l, v, h in zip(lo1.values, bb.values, hi1.values)
        )


def check_constraint_order(fam: AdmissibleFamily) -> AdmissibleFamily:
    """Raise ConstraintOrderViolation wherever b1 exceeds b2."""
    bad = [
        (x0, x1, lo, hi)
        for (x0, x1, lo), (_, _, hi) in zip(fam.b1.pieces(), fam.b2.pieces())
        if lo > hi
    ]
    if bad:
        raise ConstraintOrderViolation(bad)
    return fam


def validate_family(fam: AdmissibleFamily) -> AdmissibleFamily:
    """Check the pointwise ordering and that the constraints differ somewhere.

    Returns the family unchanged on success.  Raises
    ConstraintOrderViolation with the offending pieces, or
    EmptyConstraintGap when b1 == b2 everywhere.  Solvers that remain
    meaningful for a degenerate (single-structure) family check only
    the ordering and the bangbang_ready flag instead of calling this.
    """
    check_constraint_order(fam)
    if not fam.gap_pieces():
        raise EmptyConstraintGap("b1 == b2 everywhere; the family is a single structure")
    return fam


@dataclass(frozen=True)
class WaveState:
    """Cauchy data (y, y') of a field at position x."""

    x: float
    y: complex
    dy: complex
