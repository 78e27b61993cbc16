"""The sign-switching transmission problem.

The field obeys y'' = -z^2 y b(x, y), where b takes the upper constraint
value wherever Im y^2 > 0 and the lower one on the closed complement.
With the lower constraint positive wherever the constraints differ, the
initial value problem has exactly one solution, made of homogeneous
stretches separated by switch points.  This module wraps the event
kernel with validation, trace assembly, the phase-family characteristic
value, and recovery of the effective profile from a solution.
"""

from __future__ import annotations

import cmath
import enum
import math
from dataclasses import dataclass
from typing import Union

import numpy as np

from . import _kernel as _k
from .errors import (
    AmbiguousBranch,
    MismatchedInterval,
    NotBangbangReady,
    RoundTripFailure,
    UpperHalfPlaneZ,
)
from .model import (
    AdmissibleFamily,
    ResonatorConfig,
    StepFunction,
    WaveState,
    check_constraint_order,
    merge_equal_pieces,
)
from .spectrum import char_F


class RegionKind(enum.Enum):
    """Which constraint the coefficient sits on inside a region."""

    LOWER = "lower"
    UPPER = "upper"


class BoundaryKind(enum.Enum):
    """Why a region ends where it does."""

    CONSTRAINT = "constraint"
    SWITCH = "switch"


@dataclass(frozen=True)
class RegionTrace:
    """Region decomposition of one nonlinear solution.

    boundaries holds n+1 increasing positions from a1 to a2, states the
    Cauchy data there, choices and forced the per-region branch and
    whether it was dictated by coinciding constraints.  boundary_kinds
    marks interior boundaries as constraint edges or sign switches.
    """

    boundaries: tuple[float, ...]
    choices: tuple[RegionKind, ...]
    forced: tuple[bool, ...]
    boundary_kinds: tuple[BoundaryKind, ...]
    states: tuple[WaveState, ...]

    @property
    def switch_points(self) -> tuple[float, ...]:
        """Interior boundaries caused by a sign change of Im y^2."""
        return tuple(
            x
            for x, k in zip(self.boundaries[1:-1], self.boundary_kinds[1:-1])
            if k is BoundaryKind.SWITCH
        )

    @property
    def n_regions(self) -> int:
        return len(self.choices)


@dataclass(frozen=True)
class NlEigenpair:
    """A zero of the phase-family characteristic value."""

    omega: complex
    xi: float
    trace: RegionTrace
    residual: float


def fam_arrays(fam: AdmissibleFamily):
    """Constraint family flattened to the arrays the kernel consumes."""
    xs = np.asarray(fam.breakpoints, dtype=np.float64)
    los = np.asarray(fam.b1.values, dtype=np.float64)
    his = np.asarray(fam.b2.values, dtype=np.float64)
    return xs, los, his


def _require_ready(fam: AdmissibleFamily) -> None:
    check_constraint_order(fam)
    if not fam.bangbang_ready:
        bad = [p for p in fam.gap_pieces() if p[2] <= 0.0]
        raise NotBangbangReady(
            f"lower constraint vanishes on {len(bad)} piece(s) where the "
            "constraints differ; uniqueness of the field is lost there"
        )


def _require_lower_z2(z: complex) -> None:
    if (z * z).imag > 0.0:
        raise UpperHalfPlaneZ(f"Im(z^2) = {(z * z).imag:.3g} > 0 at z = {z}")


def solve_bangbang_ivp(fam: AdmissibleFamily, z: complex, init: WaveState,
                       cfg: ResonatorConfig,
                       samples_per_region: int = 64) -> tuple[WaveState, RegionTrace]:
    """Integrate the sign-switching field across the cavity.

    init must carry data at the left end a1.  Switch points are located
    to 1e-13 of the cavity length; a zero of Im y^2 that does not flip
    the branch (a grazing touch) produces no region boundary.
    """
    _require_ready(fam)
    z = complex(z)
    _require_lower_z2(z)
    if fam.interval != cfg.interval:
        raise MismatchedInterval(f"{fam.interval} vs {cfg.interval}")
    if init.x != cfg.a1:
        raise ValueError(f"initial data must sit at a1 = {cfg.a1}, got x = {init.x}")
    xs, los, his = fam_arrays(fam)
    L = cfg.length
    xtol = 1e-13 * L
    delta0 = 1e-8 * L
    cap = 1024
    while True:
        rec_x = np.empty(cap, np.float64)
        rec_kind = np.empty(cap, np.int64)
        rec_choice = np.empty(cap, np.int64)
        rec_y = np.empty(cap, np.complex128)
        rec_dy = np.empty(cap, np.complex128)
        status, nrec, y_end, dy_end, fail_x = _k.bb_solve(
            xs, los, his, z, complex(init.y), complex(init.dy),
            samples_per_region, xtol, delta0,
            rec_x, rec_kind, rec_choice, rec_y, rec_dy,
        )
        if status == _k.BB_OVERFLOW and cap < 65536:
            cap *= 4
            continue
        break
    if status == _k.BB_AMBIGUOUS:
        raise AmbiguousBranch(float(fail_x), f"(z = {z})")
    if status != _k.BB_OK:
        raise AmbiguousBranch(float(fail_x), f"solver stalled (status {status}, z = {z})")

    boundaries = [float(v) for v in rec_x[:nrec]] + [cfg.a2]
    states = [WaveState(float(rec_x[i]), complex(rec_y[i]), complex(rec_dy[i]))
              for i in range(nrec)]
    final = WaveState(cfg.a2, complex(y_end), complex(dy_end))
    states.append(final)
    kinds = [BoundaryKind.CONSTRAINT]
    for i in range(1, nrec):
        kinds.append(BoundaryKind.SWITCH if rec_kind[i] == _k.KIND_SWITCH
                     else BoundaryKind.CONSTRAINT)
    kinds.append(BoundaryKind.CONSTRAINT)

    choices = []
    forced = []
    for i in range(nrec):
        code = int(rec_choice[i])
        if code == _k.CHOICE_FORCED:
            # label by the actual half-plane at the region midpoint
            x0, x1 = boundaries[i], boundaries[i + 1]
            b = fam.b1(0.5 * (x0 + x1))
            ym, _ = _k.prop_layer(states[i].y, states[i].dy, b,
                                  0.5 * (x1 - x0), z)
            choices.append(RegionKind.UPPER if (ym * ym).imag > 0.0
                           else RegionKind.LOWER)
            forced.append(True)
        else:
            choices.append(RegionKind.UPPER if code == _k.CHOICE_UPPER
                           else RegionKind.LOWER)
            forced.append(False)
    trace = RegionTrace(tuple(boundaries), tuple(choices), tuple(forced),
                        tuple(kinds), tuple(states))
    return final, trace


def theta_nl(fam: AdmissibleFamily, xi: float, z: complex,
             cfg: ResonatorConfig,
             samples_per_region: int = 64) -> tuple[WaveState, RegionTrace]:
    """Sign-switching field with unit initial modulus and phase xi.

    The canonical phase domain is [0, pi); any real xi is accepted since
    xi and xi + pi generate fields differing only by overall sign.
    """
    y0 = cmath.exp(1j * xi)
    init = WaveState(cfg.a1, y0, -1j * z * cfg.nu1 * y0)
    return solve_bangbang_ivp(fam, z, init, cfg, samples_per_region)


def F_nl(fam: AdmissibleFamily, xi: float, z: complex, cfg: ResonatorConfig,
         samples_per_region: int = 64) -> complex:
    """Characteristic value of the phase-xi field; zeros are the
    nonlinear eigenvalues, whose z-projections bound the achievable
    spectra of the whole constraint family."""
    z = complex(z)
    if z == 0:
        return complex(1.0 + cfg.nu1 * cfg.inv_nu2)
    _require_ready(fam)
    _require_lower_z2(z)
    if fam.interval != cfg.interval:
        raise MismatchedInterval(f"{fam.interval} vs {cfg.interval}")
    xs, los, his = fam_arrays(fam)
    L = cfg.length
    status, y, dy = _k.bb_final(xs, los, his, z, cfg.nu1, float(xi),
                                samples_per_region, 1e-13 * L, 1e-8 * L, 4096)
    if status != _k.BB_OK:
        # rerun the slow path for a located, typed error
        theta_nl(fam, xi, z, cfg, samples_per_region)
        raise AmbiguousBranch(math.nan, f"(z = {z}, xi = {xi})")
    return y + 1j * dy * cfg.inv_nu2 / z


def recover_structure(pair: Union[NlEigenpair, tuple[float, complex]],
                      fam: AdmissibleFamily, cfg: ResonatorConfig,
                      tol: float = 1e-10) -> StepFunction:
    """Effective profile of a nonlinear eigenpair.

    Each region contributes its active constraint value; equal
    neighbours are merged.  The result must reproduce the eigenvalue
    through the linear characteristic value to 10 tol, otherwise
    RoundTripFailure is raised.
    """
    if isinstance(pair, NlEigenpair):
        xi, omega, trace = pair.xi, pair.omega, pair.trace
    else:
        xi, omega = pair
        _, trace = theta_nl(fam, xi, omega, cfg)
    values = []
    for i, choice in enumerate(trace.choices):
        xm = 0.5 * (trace.boundaries[i] + trace.boundaries[i + 1])
        src = fam.b2 if choice is RegionKind.UPPER else fam.b1
        values.append(src(xm))
    profile = merge_equal_pieces(StepFunction(trace.boundaries, tuple(values)))
    resid = abs(char_F(profile, omega, cfg))
    if not resid <= 10.0 * tol:
        raise RoundTripFailure(
            f"recovered profile leaves |F| = {resid:.3g} at omega = {omega}"
        )
    return profile
