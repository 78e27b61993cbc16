"""First-order response of the spectrum to profile changes.

The directional derivative of the characteristic value, the splitting
coefficient that turns it into predicted frequency branches, and a sweep
utility that confronts the prediction with recomputed spectra.
"""

from __future__ import annotations

import cmath
import math
from dataclasses import dataclass
from typing import Optional, Sequence

from scipy.integrate import quad

from . import _kernel as _k
from .errors import (
    DegenerateDenominator,
    NotAResonance,
    ZeroDenominator,
)
from .model import PiecewiseConstant, ResonatorConfig, StepFunction, refine_breakpoints
from .spectrum import Rect, char_F, dF_dz, find_resonances, theta_at, theta_eval


class Direction(PiecewiseConstant):
    """A signed step function: the direction of a profile perturbation."""

    @classmethod
    def indicator(cls, profile_interval, lo: float, hi: float,
                  height: float = 1.0) -> "Direction":
        """height on (lo, hi), zero elsewhere in the cavity."""
        a1, a2 = profile_interval.a1, profile_interval.a2
        if not a1 <= lo < hi <= a2:
            raise ValueError(f"need {a1} <= lo < hi <= {a2}")
        edges: list[float] = [a1]
        vals: list[float] = []
        if lo > a1:
            edges.append(lo)
            vals.append(0.0)
        edges.append(hi)
        vals.append(height)
        if hi < a2:
            edges.append(a2)
            vals.append(0.0)
        return cls(tuple(edges), tuple(vals))

    @classmethod
    def from_difference(cls, f: PiecewiseConstant, g: PiecewiseConstant) -> "Direction":
        f2, g2 = refine_breakpoints(f, g)
        return cls(f2.breakpoints, tuple(a - b for a, b in zip(f2.values, g2.values)))


def perturbed_profile(B: StepFunction, V: Direction, zeta: float) -> StepFunction:
    """B + zeta V as a profile; fails if any value turns negative."""
    B2, V2 = refine_breakpoints(B, V)
    return StepFunction(B2.breakpoints,
                        tuple(b + zeta * v for b, v in zip(B2.values, V2.values)))


def dF_dB(B: StepFunction, omega: complex, V: Direction, cfg: ResonatorConfig,
          backend: str = "closed_form", residual_tol: float = 1e-8) -> complex:
    """Directional derivative of the characteristic value at a mode.

    Equals omega^2 / y'(a2) times the V-weighted integral of the squared
    field.  backend "closed_form" sums exact per-layer integrals;
    "quadrature" integrates the evaluated field adaptively.  The two are
    required to agree and the tests hold them to 1e-9 relative.
    """
    omega = complex(omega)
    resid = abs(char_F(B, omega, cfg))
    if not resid <= residual_tol:
        raise NotAResonance(f"|F({omega})| = {resid:.3g} exceeds {residual_tol:.3g}")
    B2, V2 = refine_breakpoints(B, V)
    st = theta_at(B2, omega, cfg)
    if abs(st.dy) < 1e-12 * max(1.0, abs(st.y)):
        raise DegenerateDenominator(f"boundary slope {st.dy!r} too small")
    if backend == "closed_form":
        y, dy = 1.0 + 0j, -1j * omega * cfg.nu1
        acc = 0j
        for (x0, x1, b), v in zip(B2.pieces(), V2.values):
            if v != 0.0:
                acc += v * _k.layer_theta2_integral(y, dy, b, x1 - x0, omega)
            y, dy = _k.prop_layer(y, dy, b, x1 - x0, omega)
    elif backend == "quadrature":
        acc = 0j
        for (x0, x1, _b), v in zip(B2.pieces(), V2.values):
            if v == 0.0:
                continue

            def f_re(x):
                th = theta_eval(B2, omega, cfg, x).y
                return (th * th).real

            def f_im(x):
                th = theta_eval(B2, omega, cfg, x).y
                return (th * th).imag

            re_part, _ = quad(f_re, x0, x1, epsabs=1e-13, epsrel=1e-12, limit=200)
            im_part, _ = quad(f_im, x0, x1, epsabs=1e-13, epsrel=1e-12, limit=200)
            acc += v * complex(re_part, im_part)
    else:
        raise ValueError(f"unknown backend {backend!r}")
    return omega * omega * acc / st.dy


@dataclass(frozen=True)
class PerturbationPrediction:
    """Leading-order branch model at a mode of multiplicity m.

    A perturbation of size zeta moves the mode to the m values
    omega + (K zeta)^(1/m), one per branch of the root.
    """

    omega: complex
    K: complex
    multiplicity: int

    def branches(self, zeta: float) -> tuple[complex, ...]:
        m = self.multiplicity
        w = self.K * zeta
        if w == 0:
            return (self.omega,) * m
        r = abs(w) ** (1.0 / m)
        phase = cmath.phase(w)
        return tuple(
            self.omega + r * cmath.exp(1j * (phase + 2.0 * math.pi * j) / m)
            for j in range(m)
        )


def _mth_derivative_fd(B: StepFunction, omega: complex, cfg: ResonatorConfig,
                       m: int, h: float) -> tuple[complex, float]:
    """Central m-th difference of F at omega; returns (value, stencil max)."""
    acc = 0j
    fmax = 0.0
    for k in range(m + 1):
        offset = (0.5 * m - k) * h
        f = char_F(B, omega + offset, cfg)
        fmax = max(fmax, abs(f))
        acc += ((-1) ** k) * math.comb(m, k) * f
    return acc / h**m, fmax


def splitting_K(B: StepFunction, omega: complex, V: Direction,
                cfg: ResonatorConfig, multiplicity: Optional[int] = None,
                residual_tol: float = 1e-8) -> PerturbationPrediction:
    """Branch coefficient K = -m! dF_dB(V) / d^m F/dz^m at a mode.

    multiplicity is counted by winding when not supplied.  Simple modes
    use the exact on-spectrum derivative; higher orders fall back to
    Richardson-extrapolated central differences with step 1e-3 (1+|omega|).
    """
    omega = complex(omega)
    if multiplicity is None:
        from .spectrum import count_zeros_winding
        r = 1e-3 * (1.0 + abs(omega))
        multiplicity = count_zeros_winding(B, cfg, (omega, r))
        if multiplicity < 1:
            raise NotAResonance(f"winding count found no zero near {omega}")
    m = multiplicity
    num = dF_dB(B, omega, V, cfg, residual_tol=residual_tol)
    if m == 1:
        denom = dF_dz(B, omega, cfg, method="resonance", residual_tol=residual_tol)
        guard = 1e-14
        if abs(denom) < guard:
            raise ZeroDenominator(f"|dF/dz| = {abs(denom):.3g} below {guard:.3g}")
    else:
        h = 1e-3 * (1.0 + abs(omega))
        d_h, fmax_h = _mth_derivative_fd(B, omega, cfg, m, h)
        d_h2, fmax_h2 = _mth_derivative_fd(B, omega, cfg, m, 0.5 * h)
        denom = (4.0 * d_h2 - d_h) / 3.0
        guard = 1e-14 * max(1.0, fmax_h, fmax_h2) / (0.5 * h) ** m
        if abs(denom) < guard:
            raise ZeroDenominator(
                f"m-th derivative {abs(denom):.3g} below noise floor {guard:.3g}"
            )
    K = -math.factorial(m) * num / denom
    return PerturbationPrediction(omega, K, m)


@dataclass(frozen=True)
class SweepRow:
    """One perturbation size with its predicted and recomputed branches."""

    zeta: float
    predicted: tuple[complex, ...]
    recomputed: tuple[complex, ...]
    error: float


def hausdorff(a: Sequence[complex], b: Sequence[complex]) -> float:
    """Symmetric Hausdorff distance between two finite frequency sets."""
    if not a or not b:
        return math.inf if (a or b) else 0.0
    d_ab = max(min(abs(x - y) for y in b) for x in a)
    d_ba = max(min(abs(x - y) for y in a) for x in b)
    return max(d_ab, d_ba)


def perturbation_sweep(B: StepFunction, omega: complex, V: Direction,
                       zetas: Sequence[float], cfg: ResonatorConfig,
                       tol: float = 1e-10) -> list[SweepRow]:
    """Compare predicted branches with freshly computed spectra.

    For each step size the perturbed profile is re-solved in a disc
    around the mode sized to the predicted displacement, and the row
    records the Hausdorff distance between the two branch sets.
    """
    pred = splitting_K(B, omega, V, cfg)
    rows = []
    for zeta in zetas:
        branches = pred.branches(zeta)
        if zeta == 0.0:
            rows.append(SweepRow(zeta, branches, (omega,), 0.0))
            continue
        R = 4.0 * max(abs(b - omega) for b in branches) + 10.0 * tol
        B2 = perturbed_profile(B, V, zeta)
        rect = Rect(omega.real - R, omega.real + R, omega.imag - R, omega.imag + R)
        found = find_resonances(B2, cfg, rect, (R / 6.0, R / 6.0), tol=tol)
        recomputed = tuple(r.omega for r in found if abs(r.omega - omega) <= R)
        rows.append(SweepRow(zeta, branches, recomputed,
                             hausdorff(branches, recomputed)))
    return rows
