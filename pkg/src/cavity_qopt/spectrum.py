"""Linear spectral machinery: transfer of Cauchy data across layers, the
characteristic function whose zeros are the quasi-normal frequencies, its
z-derivative, closed forms for homogeneous profiles, rectangle searches,
winding-number zero counts, and the turning interval of a mode.

The characteristic function is

    F(z) = y(a2) + i y'(a2) / (z nu2),        F(0) = 1 + nu1/nu2,

where (y, y') start from (1, -i z nu1) at a1.  A hard right end
(nu2 = inf) reduces F to y(a2).  Zeros with their multiplicities are the
spectrum; for nonnegative profiles they all sit strictly below the real
axis and come in pairs symmetric about the imaginary axis.
"""

from __future__ import annotations

import cmath
import enum
import math
from dataclasses import dataclass
from typing import Optional, Sequence

import numpy as np

from . import _kernel as _k
from .errors import (
    ContourTooCloseToZero,
    DegenerateDenominator,
    MasslessNeumann,
    MismatchedInterval,
    NotAResonance,
)
from .model import ResonatorConfig, StepFunction, WaveState

_EQ_RTOL = 1e-12  # relative slack when testing sqrt(b) against nu1, nu2


@dataclass(frozen=True)
class Resonance:
    """One spectral point: location, order as a zero, and |F| there."""

    omega: complex
    multiplicity: int = 1
    residual: float = math.nan


@dataclass(frozen=True)
class Rect:
    """Axis-aligned search window in the frequency plane."""

    re_min: float
    re_max: float
    im_min: float
    im_max: float

    def __post_init__(self):
        if not (self.re_min < self.re_max and self.im_min < self.im_max):
            raise ValueError("rectangle must have positive extent")

    def contains(self, z: complex, pad: float = 0.0) -> bool:
        return (
            self.re_min - pad <= z.real <= self.re_max + pad
            and self.im_min - pad <= z.imag <= self.im_max + pad
        )


class SpectrumKind(enum.Enum):
    """Which closed-form branch a homogeneous profile falls into."""

    EMPTY = "empty"
    INTEGER_GRID = "integer_grid"
    HALF_INTEGER_GRID = "half_integer_grid"
    MASSLESS = "massless"


@dataclass(frozen=True)
class HomogeneousSpectrumParams:
    """Classification of the closed-form spectrum of a constant profile.

    K1 is the reflection quotient deciding everything: K1 = 1 kills the
    spectrum, K1 < 1 puts the real parts on whole multiples of the
    spacing, K1 > 1 on half-odd multiples.  decay is the common distance
    below the real axis (None when there are no frequencies), spacing the
    horizontal step between neighbours (None for the massless case).
    """

    K1: float
    kind: SpectrumKind
    decay: Optional[float]
    spacing: Optional[float]


@dataclass(frozen=True)
class TurningInterval:
    """Where a mode turns: the flat stretch [left, right] of the phase
    flux, and the single interior node of the field if it has one."""

    left: float
    right: float
    node: Optional[float]


def propagate_layer(state: WaveState, b: float, width: float, z: complex) -> WaveState:
    """Exact transfer of Cauchy data through one homogeneous layer."""
    if b < 0.0:
        raise ValueError(f"layer coefficient must be >= 0, got {b}")
    if width < 0.0:
        raise ValueError(f"layer width must be >= 0, got {width}")
    y, dy = _k.prop_layer(complex(state.y), complex(state.dy), float(b), float(width), complex(z))
    return WaveState(state.x + width, y, dy)


def _check_profile(B: StepFunction, cfg: ResonatorConfig) -> None:
    if (B.breakpoints[0], B.breakpoints[-1]) != (cfg.a1, cfg.a2):
        raise MismatchedInterval(
            f"profile lives on [{B.breakpoints[0]}, {B.breakpoints[-1]}], "
            f"cavity on [{cfg.a1}, {cfg.a2}]"
        )


def theta_at(B: StepFunction, z: complex, cfg: ResonatorConfig,
             with_trace: bool = False):
    """Cauchy data at a2 of the solution normalized at the left end.

    The normalization is y(a1) = 1, y'(a1) = -i z nu1, the outgoing
    left-end condition frozen into the initial data.  With
    with_trace=True also returns the states at every breakpoint.
    """
    _check_profile(B, cfg)
    z = complex(z)
    y, dy = 1.0 + 0j, -1j * z * cfg.nu1
    trace = [WaveState(cfg.a1, y, dy)] if with_trace else None
    x = cfg.a1
    for x0, x1, b in B.pieces():
        y, dy = _k.prop_layer(y, dy, b, x1 - x0, z)
        x = x1
        if with_trace:
            trace.append(WaveState(x, y, dy))
    state = WaveState(x, y, dy)
    if with_trace:
        return state, trace
    return state


def theta_eval(B: StepFunction, z: complex, cfg: ResonatorConfig, x: float) -> WaveState:
    """Cauchy data of the left-normalized solution at an arbitrary point."""
    _check_profile(B, cfg)
    if not cfg.interval.contains(x):
        raise ValueError(f"x={x} outside the cavity")
    z = complex(z)
    y, dy = 1.0 + 0j, -1j * z * cfg.nu1
    for x0, x1, b in B.pieces():
        if x <= x1:
            y, dy = _k.prop_layer(y, dy, b, x - x0, z)
            return WaveState(x, y, dy)
        y, dy = _k.prop_layer(y, dy, b, x1 - x0, z)
    return WaveState(cfg.a2, y, dy)


def char_F(B: StepFunction, z: complex, cfg: ResonatorConfig) -> complex:
    """Characteristic value at z; zero exactly at the quasi-normal modes."""
    z = complex(z)
    if z == 0:
        _check_profile(B, cfg)
        return complex(1.0 + cfg.nu1 * cfg.inv_nu2)
    st = theta_at(B, z, cfg)
    return st.y + 1j * st.dy * cfg.inv_nu2 / z


def char_F_grid(B: StepFunction, Z: np.ndarray, cfg: ResonatorConfig) -> np.ndarray:
    """Vectorized characteristic values over an array of frequencies."""
    _check_profile(B, cfg)
    Z = np.asarray(Z, dtype=np.complex128)
    y = np.ones_like(Z)
    dy = -1j * Z * cfg.nu1
    for x0, x1, b in B.pieces():
        w = x1 - x0
        if b == 0.0:
            y, dy = y + dy * w, dy
            continue
        t = Z * (math.sqrt(b) * w)
        small = np.abs(t) < _k.SINC_SERIES_CUTOFF
        t2 = t * t
        series = 1.0 - t2 / 6.0 * (1.0 - t2 / 20.0 * (1.0 - t2 / 42.0))
        with np.errstate(invalid="ignore", divide="ignore"):
            direct = np.sin(t) / np.where(small, 1.0, t)
        snw = w * np.where(small, series, direct)
        c = np.cos(t)
        s2 = Z * Z * b
        y, dy = y * c + dy * snw, -y * s2 * snw + dy * c
    out = np.empty_like(Z)
    nz = Z != 0
    out[nz] = y[nz] + 1j * dy[nz] * cfg.inv_nu2 / Z[nz]
    out[~nz] = 1.0 + cfg.nu1 * cfg.inv_nu2
    return out


def _theta2_weighted_sum(B: StepFunction, z: complex, cfg: ResonatorConfig,
                         weights: Sequence[float]):
    """Sum over pieces of weight_k times the layer integral of theta^2.

    Also returns the boundary state, since every caller needs it."""
    _check_profile(B, cfg)
    z = complex(z)
    y, dy = 1.0 + 0j, -1j * z * cfg.nu1
    acc = 0j
    for (x0, x1, b), wgt in zip(B.pieces(), weights):
        if wgt != 0.0:
            acc += wgt * _k.layer_theta2_integral(y, dy, b, x1 - x0, z)
        y, dy = _k.prop_layer(y, dy, b, x1 - x0, z)
    return acc, WaveState(cfg.a2, y, dy)


def dF_dz(B: StepFunction, z: complex, cfg: ResonatorConfig,
          method: str = "auto", residual_tol: float = 1e-6) -> complex:
    """Derivative of the characteristic value in z.

    method "resonance" uses the boundary-term formula that is exact on
    the spectrum (and raises NotAResonance away from it); "propagated"
    differentiates the layer maps and is exact for any z != 0; "fd" is a
    central difference; "auto" picks "resonance" when |F| is already
    below residual_tol and "propagated" otherwise.
    """
    z = complex(z)
    if method == "auto":
        if z != 0 and abs(char_F(B, z, cfg)) <= residual_tol:
            method = "resonance"
        elif z == 0:
            method = "fd"
        else:
            method = "propagated"
    if method == "fd":
        h = 1e-6 * (1.0 + abs(z))
        return (char_F(B, z + h, cfg) - char_F(B, z - h, cfg)) / (2.0 * h)
    if method == "propagated":
        if z == 0:
            raise ValueError("propagated path needs z != 0; use method='fd'")
        _check_profile(B, cfg)
        y, dy = 1.0 + 0j, -1j * z * cfg.nu1
        yz, dyz = 0j, -1j * cfg.nu1
        for x0, x1, b in B.pieces():
            y, dy, yz, dyz = _k.prop_layer_with_dz(y, dy, yz, dyz, b, x1 - x0, z)
        return yz + 1j * cfg.inv_nu2 * (dyz / z - dy / (z * z))
    if method == "resonance":
        resid = abs(char_F(B, z, cfg))
        if not resid <= residual_tol:
            raise NotAResonance(f"|F({z})| = {resid:.3g} exceeds {residual_tol:.3g}")
        acc, st = _theta2_weighted_sum(B, z, cfg, B.values)
        if abs(st.dy) < 1e-12 * max(1.0, abs(st.y)):
            raise DegenerateDenominator(f"boundary slope {st.dy!r} too small at z={z}")
        return (2.0 * z * acc + 1j * cfg.nu1) / st.dy + st.y / z
    raise ValueError(f"unknown method {method!r}")


def classify_homogeneous(b: float, cfg: ResonatorConfig) -> HomogeneousSpectrumParams:
    """Closed-form branch for the constant profile of height b."""
    if b < 0.0:
        raise ValueError(f"profile value must be >= 0, got {b}")
    nu1, nu2, inv2, L = cfg.nu1, cfg.nu2, cfg.inv_nu2, cfg.length
    if b == 0.0:
        if nu1 == 0.0:
            raise MasslessNeumann("b = 0 with nu1 = 0 has no closed-form spectrum")
        return HomogeneousSpectrumParams(
            K1=math.inf,
            kind=SpectrumKind.MASSLESS,
            decay=(1.0 / nu1 + inv2) / L,
            spacing=None,
        )
    rb = math.sqrt(b)
    K1 = (1.0 + nu1 * inv2) / (nu1 / rb + rb * inv2)
    tol1 = _EQ_RTOL * max(1.0, nu1, rb)
    at_edge = abs(rb - nu1) <= tol1 or (
        not math.isinf(nu2) and abs(rb - nu2) <= _EQ_RTOL * max(1.0, nu2, rb)
    )
    if at_edge:
        return HomogeneousSpectrumParams(K1=K1, kind=SpectrumKind.EMPTY,
                                         decay=None, spacing=None)
    spacing = math.pi / (rb * L)
    decay = math.log(abs((1.0 + K1) / (1.0 - K1))) / (2.0 * rb * L)
    inside = nu1 < rb and rb < nu2
    kind = SpectrumKind.HALF_INTEGER_GRID if inside else SpectrumKind.INTEGER_GRID
    return HomogeneousSpectrumParams(K1=K1, kind=kind, decay=decay, spacing=spacing)


def homogeneous_spectrum(b: float, cfg: ResonatorConfig,
                         n_range: tuple[int, int] = (-3, 3)) -> list[Resonance]:
    """Spectrum of the constant profile, from the closed form.

    n_range picks which members of the horizontal grid to return
    (inclusive).  The massless profile has a single purely imaginary
    frequency which is returned regardless of n_range.
    """
    params = classify_homogeneous(b, cfg)
    if params.kind is SpectrumKind.EMPTY:
        return []
    prof = StepFunction.constant(cfg.interval, b)
    if params.kind is SpectrumKind.MASSLESS:
        omega = -1j * params.decay
        return [Resonance(omega, 1, abs(char_F(prof, omega, cfg)))]
    shift = 0.5 if params.kind is SpectrumKind.HALF_INTEGER_GRID else 0.0
    out = []
    for n in range(n_range[0], n_range[1] + 1):
        omega = complex(params.spacing * (n + shift), -params.decay)
        out.append(Resonance(omega, 1, abs(char_F(prof, omega, cfg))))
    out.sort(key=lambda r: (r.omega.real, r.omega.imag))
    return out


def _newton_derivative(B: StepFunction, z: complex, cfg: ResonatorConfig,
                       absF: float) -> complex:
    # trust the on-spectrum formula only once the residual is small
    if absF < 1e-6:
        try:
            return dF_dz(B, z, cfg, method="resonance", residual_tol=1e-3)
        except (NotAResonance, DegenerateDenominator):
            pass
    h = 1e-6 * (1.0 + abs(z))
    return (char_F(B, z + h, cfg) - char_F(B, z - h, cfg)) / (2.0 * h)


def _newton_polish(B: StepFunction, z0: complex, cfg: ResonatorConfig,
                   tol: float, max_iter: int = 60):
    """Newton iteration on F; returns (z, |F|) or None when it diverges."""
    z = complex(z0)
    f = char_F(B, z, cfg)
    best = (z, abs(f))
    for _ in range(max_iter):
        af = abs(f)
        if af < best[1]:
            best = (z, af)
        if af <= 0.01 * tol:
            break
        d = _newton_derivative(B, z, cfg, af)
        if d == 0:
            return None
        step = f / d
        z_new = z - step
        f_new = char_F(B, z_new, cfg)
        # crude damping: halve while the residual refuses to drop
        halvings = 0
        while abs(f_new) > af and halvings < 8:
            step *= 0.5
            z_new = z - step
            f_new = char_F(B, z_new, cfg)
            halvings += 1
        if abs(f_new) > af and abs(step) < 1e-16 * (1.0 + abs(z)):
            break
        z, f = z_new, f_new
    if best[1] <= tol:
        return best
    return None


def find_resonances(B: StepFunction, cfg: ResonatorConfig, rect: Rect,
                    grid: tuple[float, float], tol: float = 1e-10,
                    max_iter: int = 60) -> list[Resonance]:
    """Locate all quasi-normal frequencies inside a rectangle.

    A lattice with steps grid=(h_re, h_im) samples |F|; every interior
    local minimum over its 8 neighbours seeds a damped Newton polish.
    Converged roots are kept when they land inside the rectangle, then
    deduplicated within tol*(1+|omega|) and labelled with a winding-count
    multiplicity.  Roots hugging the rectangle boundary can be missed;
    pad the rectangle rather than relying on edge pixels.
    """
    h_re, h_im = grid
    if h_re <= 0 or h_im <= 0:
        raise ValueError("grid steps must be positive")
    res = np.arange(rect.re_min, rect.re_max + 0.5 * h_re, h_re)
    ims = np.arange(rect.im_min, rect.im_max + 0.5 * h_im, h_im)
    if len(res) < 3 or len(ims) < 3:
        raise ValueError("rectangle too small for the grid step")
    Z = res[None, :] + 1j * ims[:, None]
    A = np.abs(char_F_grid(B, Z, cfg))
    interior = A[1:-1, 1:-1]
    is_min = np.ones_like(interior, dtype=bool)
    for di in (-1, 0, 1):
        for dj in (-1, 0, 1):
            if di == 0 and dj == 0:
                continue
            is_min &= interior <= A[1 + di:A.shape[0] - 1 + di,
                                    1 + dj:A.shape[1] - 1 + dj]
    roots: list[tuple[complex, float]] = []
    for i, j in zip(*np.nonzero(is_min)):
        polished = _newton_polish(B, Z[1 + i, 1 + j], cfg, tol, max_iter)
        if polished is None:
            continue
        z, resid = polished
        if not rect.contains(z):
            continue
        if any(abs(z - z0) < tol * (1.0 + abs(z)) for z0, _ in roots):
            continue
        roots.append((z, resid))
    roots.sort(key=lambda p: (p[0].real, p[0].imag))
    out = []
    for idx, (z, resid) in enumerate(roots):
        r = 1e-3 * (1.0 + abs(z))
        for z2, _ in roots:
            if z2 != z:
                r = min(r, abs(z2 - z) / 3.0)
        mult = 1
        for _ in range(3):
            try:
                mult = count_zeros_winding(B, cfg, (z, r))
                break
            except ContourTooCloseToZero:
                r /= 3.0
        out.append(Resonance(z, max(mult, 1), resid))
    return out


def count_zeros_winding(B: StepFunction, cfg: ResonatorConfig, contour,
                        n_samples: int = 256, max_samples: int = 16384) -> int:
    """Number of zeros of F inside a contour, counted with multiplicity.

    contour is either a Rect or a (center, radius) pair.  The argument
    increments along the sampled contour are summed; sampling doubles
    until every increment is below pi/2, failing that the contour is
    declared too close to a zero.
    """
    if isinstance(contour, Rect):
        corners = [
            complex(contour.re_min, contour.im_min),
            complex(contour.re_max, contour.im_min),
            complex(contour.re_max, contour.im_max),
            complex(contour.re_min, contour.im_max),
        ]

        def path(ts):
            pts = np.empty(len(ts), dtype=np.complex128)
            for i, t in enumerate(ts):
                seg, frac = divmod(t * 4.0, 1.0)
                a = corners[int(seg) % 4]
                b = corners[(int(seg) + 1) % 4]
                pts[i] = a + (b - a) * frac
            return pts
    else:
        center, radius = contour
        center = complex(center)
        if radius <= 0:
            raise ValueError("contour radius must be positive")

        def path(ts):
            return center + radius * np.exp(2j * np.pi * np.asarray(ts))

    n = n_samples
    while True:
        ts = np.arange(n) / n
        vals = char_F_grid(B, path(ts), cfg)
        if np.any(np.abs(vals) == 0.0):
            raise ContourTooCloseToZero("F vanishes on a contour sample")
        rolled = np.roll(vals, -1)
        dargs = np.angle(rolled / vals)
        if np.max(np.abs(dargs)) < 0.5 * math.pi:
            total = float(np.sum(dargs))
            return int(round(total / (2.0 * math.pi)))
        if n >= max_samples:
            raise ContourTooCloseToZero(
                f"argument jumps stay above pi/2 with {n} samples"
            )
        n *= 2


def turning_interval(B: StepFunction, omega: complex, cfg: ResonatorConfig,
                     tol: float = 1e-8, samples_per_piece: int = 64) -> TurningInterval:
    """Flat stretch of the phase flux Im(conj(y) y') of a mode.

    The flux is monotone along the cavity and its zero set is a point or
    an interval; an interval forces the profile to vanish on it.  The
    field can vanish at most once, inside that stretch; when it does the
    node position is reported.
    """
    omega = complex(omega)
    resid = abs(char_F(B, omega, cfg))
    if not resid <= tol:
        raise NotAResonance(f"|F({omega})| = {resid:.3g} exceeds tol {tol:.3g}")
    _check_profile(B, cfg)

    y, dy = 1.0 + 0j, -1j * omega * cfg.nu1
    xs_all = [cfg.a1]
    gs_all = [(y.conjugate() * dy).imag]
    ys_all = [abs(y)]
    for x0, x1, b in B.pieces():
        w = x1 - x0
        for j in range(1, samples_per_piece + 1):
            tau = w * j / samples_per_piece
            yj, dyj = _k.prop_layer(y, dy, b, tau, omega)
            xs_all.append(x0 + tau)
            gs_all.append((yj.conjugate() * dyj).imag)
            ys_all.append(abs(yj))
        y, dy = _k.prop_layer(y, dy, b, w, omega)

    def g_of(x: float) -> float:
        st = theta_eval(B, omega, cfg, x)
        return (st.y.conjugate() * st.dy).imag

    gs = np.asarray(gs_all)
    xs = np.asarray(xs_all)
    sgn = 1.0 if omega.real >= 0.0 else -1.0
    gs = sgn * gs  # orient so the flux is nondecreasing
    g_eps = 1e-11 * max(float(np.max(np.abs(gs))), 1e-300)

    def refine(xa: float, xb: float, level: float) -> float:
        # first x in [xa, xb] with oriented flux >= level
        for _ in range(80):
            xm = 0.5 * (xa + xb)
            if sgn * g_of(xm) >= level:
                xb = xm
            else:
                xa = xm
            if xb - xa <= 1e-13 * cfg.length:
                break
        return 0.5 * (xa + xb)

    above = np.nonzero(gs >= -g_eps)[0]
    if len(above) == 0:
        left = cfg.a2
    else:
        i = int(above[0])
        left = xs[i] if i == 0 else refine(xs[i - 1], xs[i], -g_eps)
    below = np.nonzero(gs <= g_eps)[0]
    if len(below) == 0:
        right = cfg.a1
    else:
        i = int(below[-1])
        right = xs[i] if i == len(xs) - 1 else refine(xs[i], xs[i + 1], g_eps)
    if right < left:
        mid = 0.5 * (left + right)
        left = right = mid

    # hunt for a node of the field inside (and marginally around) the stretch
    theta_scale = max(ys_all)
    lo = max(cfg.a1, left - 1e-9 * cfg.length)
    hi = min(cfg.a2, right + 1e-9 * cfg.length)
    n_probe = 257
    probe_x = np.linspace(lo, hi, n_probe)
    probe_y = np.array([abs(theta_eval(B, omega, cfg, float(x)).y) for x in probe_x])
    j = int(np.argmin(probe_y))
    xa = probe_x[max(j - 1, 0)]
    xb = probe_x[min(j + 1, n_probe - 1)]
    for _ in range(100):
        xm1 = xa + (xb - xa) / 3.0
        xm2 = xb - (xb - xa) / 3.0
        if abs(theta_eval(B, omega, cfg, xm1).y) < abs(theta_eval(B, omega, cfg, xm2).y):
            xb = xm2
        else:
            xa = xm1
        if xb - xa <= 1e-13 * cfg.length:
            break
    node_x = 0.5 * (xa + xb)
    node = node_x if abs(theta_eval(B, omega, cfg, node_x).y) <= 1e-6 * theta_scale else None
    return TurningInterval(float(left), float(right), node)
