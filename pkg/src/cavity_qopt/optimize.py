"""Scanning and Pareto optimization over the nonlinear spectrum.

The decay-versus-frequency trade-off of a constraint family is explored
in three stages: a lattice scan of the phase-family characteristic value
locates the spectral curves, damped Newton refinement lands exactly on
them, and one-dimensional sweeps extract the minimal decay rate for each
frequency of interest.  Closed forms cover the zero-frequency optimum
and the guaranteed-admissibility frequency thresholds.
"""

from __future__ import annotations

import cmath
import enum
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from typing import Optional, Sequence

import numpy as np

from . import _kernel as _k
from .bangbang import (
    NlEigenpair,
    F_nl,
    fam_arrays,
    recover_structure,
    theta_nl,
)
from .errors import (
    CaseNotCovered,
    ConfigError,
    HypothesisViolated,
    JacobianSingular,
    NoConvergence,
    NoRootFound,
    NotBangbangReady,
)
from .model import AdmissibleFamily, ResonatorConfig, StepFunction, check_constraint_order
from .spectrum import (
    Rect,
    SpectrumKind,
    classify_homogeneous,
    find_resonances,
)

DEFAULT_TOL = 1e-10


class Statistic(enum.Enum):
    """How the phase grid is folded into one number per lattice point."""

    MIN_OVER_XI = "min"
    MAX_OVER_XI = "max"


@dataclass(frozen=True)
class ScanGrid:
    """Lattice and phase-grid parameters for a spectrum scan."""

    rect: Rect
    h_re: float
    h_im: float
    n_xi: int = 360
    eps: float = 5e-5

    def __post_init__(self) -> None:
        if not (self.h_re > 0.0 and self.h_im > 0.0):
            raise ValueError("lattice steps must be positive")
        if self.n_xi < 1:
            raise ValueError("n_xi must be a positive integer")
        if not self.eps > 0.0:
            raise ValueError("eps must be positive")

    @property
    def h_arg(self) -> float:
        return math.pi / self.n_xi

    @property
    def re_axis(self) -> np.ndarray:
        return np.arange(self.rect.re_min, self.rect.re_max + 0.5 * self.h_re,
                         self.h_re)

    @property
    def im_axis(self) -> np.ndarray:
        return np.arange(self.rect.im_min, self.rect.im_max + 0.5 * self.h_im,
                         self.h_im)


@dataclass(frozen=True)
class ScanPoint:
    """One reported low-|F| location: lattice site or refined curve point."""

    z: complex
    value: float
    best_xi: float


@dataclass(frozen=True)
class ScanResult:
    points: tuple[ScanPoint, ...]
    statistic: Statistic
    grid: ScanGrid
    n_failed: int = 0
    landscape: Optional[np.ndarray] = None

    def __post_init__(self) -> None:
        object.__setattr__(
            self, "points",
            tuple(sorted(self.points, key=lambda p: (p.z.real, p.z.imag))))


@dataclass(frozen=True)
class RefinedRoot:
    xi: float
    z: complex
    residual: float


@dataclass(frozen=True)
class ParetoPoint:
    """Minimal decay rate at one frequency, with the optimal structure."""

    alpha: float
    beta_min: float
    xi: float
    structure: StepFunction
    residual: float

    @property
    def omega(self) -> complex:
        return complex(self.alpha, -self.beta_min)

    @property
    def switch_points(self) -> tuple[float, ...]:
        return self.structure.breakpoints[1:-1]


def _kernel_args(fam: AdmissibleFamily, cfg: ResonatorConfig):
    xs, los, his = fam_arrays(fam)
    L = cfg.length
    return xs, los, his, 1e-13 * L, 1e-8 * L


def _stat_at(fam_arrs, cfg: ResonatorConfig, z: complex, n_xi: int,
             want_max: bool):
    """(stat, best_xi, n_failed) at one lattice point; inf off-domain."""
    xs, los, his, xtol, delta0 = fam_arrs
    if z == 0:
        return abs(1.0 + cfg.nu1 * cfg.inv_nu2), 0.0, 0
    if (z * z).imag > 0.0:
        return math.inf, 0.0, 0
    stat, best_xi, _, n_fail = _k.bb_stat_over_xi(
        xs, los, his, z, cfg.nu1, cfg.inv_nu2, n_xi, 64, xtol, delta0,
        4096, want_max)
    if math.isnan(stat):
        return math.inf, 0.0, n_fail
    return stat, best_xi, n_fail


def scan_nl_spectrum(fam: AdmissibleFamily, grid: ScanGrid,
                     cfg: ResonatorConfig,
                     statistic: Statistic = Statistic.MIN_OVER_XI,
                     threads: int = 1,
                     keep_landscape: bool = False,
                     refine: bool = False,
                     gate_factor: float = 1000.0,
                     refine_tol: float = DEFAULT_TOL) -> ScanResult:
    """Locate the nonlinear spectrum inside a rectangle.

    The plain mode reports every lattice point whose phase-grid
    statistic is at most grid.eps.  With refine=True a two-stage search
    is used instead: lattice points below gate_factor*eps seed damped
    Newton runs, and the converged on-curve locations (each satisfying
    |F| <= eps by direct evaluation) are reported.  The refined mode is
    the practical one: the eps sub-level set is a tube around the
    spectral curves whose width is usually far below any affordable
    lattice step, so plain thresholding needs prohibitively fine grids.

    Lattice points in the closed upper half-plane of z**2, where the
    sign-switching field is not defined, are skipped; they can never
    carry spectrum.
    """
    check_constraint_order(fam)
    if not fam.bangbang_ready:
        raise NotBangbangReady("scan requires a solvable constraint family")
    arrs = _kernel_args(fam, cfg)
    re_ax = grid.re_axis
    im_ax = grid.im_axis
    want_max = statistic is Statistic.MAX_OVER_XI

    def scan_column(i: int):
        a = re_ax[i]
        col = np.empty(len(im_ax))
        xis = np.empty(len(im_ax))
        fails = 0
        for j, b in enumerate(im_ax):
            v, xi, nf = _stat_at(arrs, cfg, complex(a, b), grid.n_xi, want_max)
            col[j] = v
            xis[j] = xi
            fails += nf
        return col, xis, fails

    if threads > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            results = list(pool.map(scan_column, range(len(re_ax))))
    else:
        results = [scan_column(i) for i in range(len(re_ax))]
    values = np.stack([r[0] for r in results])
    best_xis = np.stack([r[1] for r in results])
    n_failed = sum(r[2] for r in results)
    landscape = values if keep_landscape else None

    if not refine:
        pts = [ScanPoint(complex(re_ax[i], im_ax[j]), float(values[i, j]),
                         float(best_xis[i, j]))
               for i in range(len(re_ax)) for j in range(len(im_ax))
               if values[i, j] <= grid.eps]
        return ScanResult(tuple(pts), statistic, grid, n_failed, landscape)

    gate = gate_factor * grid.eps
    seeds = [(float(best_xis[i, j]), complex(re_ax[i], im_ax[j]))
             for i in range(len(re_ax)) for j in range(len(im_ax))
             if values[i, j] <= gate]
    seen: dict[tuple[int, int], ScanPoint] = {}
    dedup_re = 0.25 * grid.h_re
    dedup_im = 0.25 * grid.h_im
    for xi0, z0 in seeds:
        try:
            root = refine_nl_root(fam, xi0, z0, "free", cfg, tol=refine_tol)
        except (NoConvergence, JacobianSingular):
            continue
        if not grid.rect.contains(root.z):
            continue
        if root.residual > grid.eps:
            continue
        key = (round(root.z.real / dedup_re), round(root.z.imag / dedup_im))
        old = seen.get(key)
        if old is None or root.residual < old.value:
            seen[key] = ScanPoint(root.z, root.residual, root.xi)
    return ScanResult(tuple(seen.values()), statistic, grid, n_failed,
                      landscape)


@dataclass(frozen=True)
class ScanCluster:
    """A connected group of scan points (one spectral 'cloud')."""

    points: tuple[ScanPoint, ...]

    @property
    def alpha_range(self) -> tuple[float, float]:
        res = [p.z.real for p in self.points]
        return min(res), max(res)

    @property
    def min_beta(self) -> float:
        return min(-p.z.imag for p in self.points)

    @property
    def top_point(self) -> ScanPoint:
        return max(self.points, key=lambda p: p.z.imag)


def cluster_scan_points(result: ScanResult,
                        join_re: Optional[float] = None,
                        join_im: Optional[float] = None) -> list[ScanCluster]:
    """Group scan points into connected components.

    Two points are neighbours when both coordinate gaps are within the
    join radii (default: three lattice cells horizontally, fifteen
    vertically — refined points trail along curves whose slope mixes the
    two scales).  Clusters come back sorted by leftmost frequency.
    """
    pts = result.points
    if not pts:
        return []
    if join_re is None:
        join_re = 3.0 * result.grid.h_re
    if join_im is None:
        join_im = 15.0 * result.grid.h_im
    order = sorted(range(len(pts)), key=lambda k: (pts[k].z.real, pts[k].z.imag))
    parent = list(range(len(pts)))

    def find(a: int) -> int:
        while parent[a] != a:
            parent[a] = parent[parent[a]]
            a = parent[a]
        return a

    def union(a: int, b: int) -> None:
        ra, rb = find(a), find(b)
        if ra != rb:
            parent[rb] = ra

    # sweep by Re z; candidates further left than join_re can be dropped
    active: list[int] = []
    for k in order:
        zk = pts[k].z
        active = [m for m in active if zk.real - pts[m].z.real <= join_re * (1 + 1e-12)]
        for m in active:
            if abs(zk.imag - pts[m].z.imag) <= join_im * (1 + 1e-12):
                union(k, m)
        active.append(k)
    groups: dict[int, list[ScanPoint]] = {}
    for k in range(len(pts)):
        groups.setdefault(find(k), []).append(pts[k])
    clusters = [ScanCluster(tuple(sorted(g, key=lambda p: (p.z.real, p.z.imag))))
                for g in groups.values()]
    clusters.sort(key=lambda c: c.alpha_range[0])
    return clusters


def _eval_or_inf(fam, xi, z, cfg) -> complex:
    """F_nl that reports failures as an infinite residual (for damping)."""
    try:
        return F_nl(fam, xi, z, cfg)
    except Exception:
        return complex(math.inf, math.inf)


def refine_nl_root(fam: AdmissibleFamily, xi0: float, z0: complex,
                   mode: str, cfg: ResonatorConfig,
                   tol: float = DEFAULT_TOL, max_iter: int = 60,
                   alpha: Optional[float] = None) -> RefinedRoot:
    """Polish a zero of the phase-family characteristic value.

    mode "fix_alpha" solves the two real equations Re F = Im F = 0 in
    the unknowns (phase, decay rate) on the vertical line Re z = alpha
    (default: Re z0).  mode "free" runs Gauss-Newton in (phase, Re z,
    Im z); the least-squares step handles the flat phase direction of
    degenerate (constant-constraint) families.  Jacobians use central
    differences.  Steps are halved up to eight times until the residual
    decreases.
    """
    if mode not in ("fix_alpha", "free"):
        raise ValueError(f"unknown mode {mode!r}")
    h_xi = 1e-7
    xi = float(xi0)
    if mode == "fix_alpha":
        a0 = float(alpha) if alpha is not None else float(z0.real)
        beta = max(-z0.imag, 1e-14)

        def build(u):
            return complex(a0, -max(u[1], 1e-14))

        u = np.array([xi, beta])
    else:
        def build(u):
            return complex(u[1], u[2])

        u = np.array([xi, z0.real, z0.imag])

    f = _eval_or_inf(fam, u[0], build(u), cfg)
    best = (abs(f), u.copy(), f)
    for _ in range(max_iter):
        af = abs(f)
        if af <= tol:
            return RefinedRoot(u[0] % math.pi, build(u), af)
        z = build(u)
        h_z = 1e-9 * (1.0 + abs(z))
        steps = [h_xi] + [h_z] * (len(u) - 1)
        cols = []
        for k, h in enumerate(steps):
            up = u.copy()
            um = u.copy()
            up[k] += h
            um[k] -= h
            fp = _eval_or_inf(fam, up[0], build(up), cfg)
            fm = _eval_or_inf(fam, um[0], build(um), cfg)
            d = (fp - fm) / (2.0 * h)
            if not (math.isfinite(d.real) and math.isfinite(d.imag)):
                raise JacobianSingular(f"derivative blew up at {z}")
            cols.append((d.real, d.imag))
        J = np.array(cols).T  # 2 x n
        r = np.array([f.real, f.imag])
        try:
            if len(u) == 2:
                du = np.linalg.solve(J, -r)
            else:
                du = np.linalg.lstsq(J, -r, rcond=None)[0]
        except np.linalg.LinAlgError as exc:
            raise JacobianSingular(str(exc)) from exc
        if not np.all(np.isfinite(du)):
            raise JacobianSingular(f"singular Jacobian near {z}")
        scale = 1.0
        for _ in range(8):
            un = u + scale * du
            fn = _eval_or_inf(fam, un[0], build(un), cfg)
            if abs(fn) < af:
                u, f = un, fn
                break
            scale *= 0.5
        else:
            break  # stuck: give the best point one last look below
        if abs(f) < best[0]:
            best = (abs(f), u.copy(), f)
    af, ub, _ = best
    if af <= tol:
        return RefinedRoot(ub[0] % math.pi, build(ub), af)
    raise NoConvergence(
        f"|F| = {af:.3g} after {max_iter} iterations from z0 = {z0}")


def _mirror_point(p: ParetoPoint) -> ParetoPoint:
    # z -> -conj(z) maps the solution with phase xi to one with pi/2 - xi
    # and the same effective structure.
    return ParetoPoint(-p.alpha, p.beta_min, (math.pi / 2 - p.xi) % math.pi,
                       p.structure, p.residual)


def _newton_fixed_xi(fam, xi: float, z: complex, cfg,
                     tol: float, max_iter: int = 50) -> complex:
    """Zero of z -> F with the phase held fixed (complex Newton).

    A proposed iterate can land where the field evaluation refuses to
    choose a switching branch; the step is then halved back toward the
    last good iterate instead of aborting outright.
    """
    f = _eval_or_inf(fam, xi, z, cfg)
    if not cmath.isfinite(f):
        raise NoConvergence("field evaluation failed during tracking")
    for _ in range(max_iter):
        if abs(f) <= tol:
            return z
        h = 1e-9 * (1.0 + abs(z))
        fp = _eval_or_inf(fam, xi, z + h, cfg)
        fm = _eval_or_inf(fam, xi, z - h, cfg)
        if not (cmath.isfinite(fp) and cmath.isfinite(fm)):
            raise NoConvergence("field evaluation failed during tracking")
        df = (fp - fm) / (2.0 * h)
        if df == 0.0:
            raise NoConvergence("flat derivative during tracking")
        step = f / df
        cap = 0.005 * (1.0 + abs(z))
        if abs(step) > cap:
            step *= cap / abs(step)
        f_new = complex(float("inf"), float("inf"))
        for _ in range(8):
            f_new = _eval_or_inf(fam, xi, z - step, cfg)
            if cmath.isfinite(f_new):
                break
            step *= 0.5
        if not cmath.isfinite(f_new):
            # The zero sits inside a refusal pocket; report the best
            # computable point if it is already decently converged.
            if abs(f) <= 1e3 * tol:
                return z
            raise NoConvergence("field evaluation failed during tracking")
        z = z - step
        f = f_new
    if abs(f) <= 1e3 * tol:
        return z
    raise NoConvergence("fixed-phase Newton stalled")


def _track_alpha(fam, xi0: float, z0: complex, alpha: float, cfg,
                 tol: float, walk_step: float = 0.02,
                 walk_range: float = 0.6) -> list[RefinedRoot]:
    """Points with Re z = alpha on the spectral branch through (xi0, z0).

    The branch is followed in the phase parameter with a fixed-phase
    Newton solve at each step.  This chart stays regular where the
    fixed-frequency Newton system degenerates: at a fold of Re z along
    the branch (the left/right extremity of a cloud) the latter's
    Jacobian is exactly singular.  Along the walk, sign changes of
    Re z - alpha are bisected, and interior extrema of Re z that peek
    across alpha (a fold passed near tangency) are located by ternary
    search so that both crossings around the fold are captured.
    """
    ztol = 1e-13 * (1.0 + abs(z0))
    gtol = 1e-13 * (1.0 + abs(alpha))
    try:
        zc = _newton_fixed_xi(fam, xi0, z0, cfg, ztol)
    except NoConvergence:
        return []
    found: list[RefinedRoot] = []

    def residual_at(xi: float, z: complex) -> None:
        z_snap = complex(alpha, z.imag)
        r = abs(_eval_or_inf(fam, xi, z_snap, cfg))
        if r <= max(tol, 100.0 * gtol):
            cand = RefinedRoot(xi % math.pi, z_snap, r)
            for other in found:
                if abs(other.z - cand.z) <= 1e-9 * (1.0 + abs(cand.z)):
                    return
            found.append(cand)

    def bisect(xa: float, ga: float, xb: float, z_warm: complex) -> None:
        for _ in range(80):
            xm = 0.5 * (xa + xb)
            try:
                zm = _newton_fixed_xi(fam, xm, z_warm, cfg, ztol)
            except NoConvergence:
                return
            z_warm = zm
            gm = zm.real - alpha
            if abs(gm) <= gtol or abs(xb - xa) <= 1e-15:
                residual_at(xm, zm)
                return
            if (ga < 0.0) != (gm < 0.0):
                xb = xm
            else:
                xa, ga = xm, gm

    # sample the branch on a capped-step walk in both directions
    samples: list[tuple[float, complex]] = [(xi0, zc)]
    for sgn in (1.0, -1.0):
        xi_a, z_a = xi0, zc
        n_steps = max(1, int(round(walk_range / walk_step)))
        for _ in range(n_steps):
            xi_b = xi_a + sgn * walk_step
            try:
                z_b = _newton_fixed_xi(fam, xi_b, z_a, cfg, ztol)
            except NoConvergence:
                break
            if abs(z_b - z_a) > 0.05 * (1.0 + abs(z_a)):
                break  # lost the branch
            if sgn > 0:
                samples.append((xi_b, z_b))
            else:
                samples.insert(0, (xi_b, z_b))
            xi_a, z_a = xi_b, z_b

    if abs(zc.real - alpha) <= gtol:
        residual_at(xi0, zc)

    gs = [z.real - alpha for _, z in samples]
    for k in range(len(samples) - 1):
        if (gs[k] < 0.0) != (gs[k + 1] < 0.0):
            bisect(samples[k][0], gs[k], samples[k + 1][0], samples[k][1])

    # interior extremum of Re z between same-sign neighbours: a fold may
    # cross alpha inside the cell even though the endpoints do not
    for k in range(1, len(samples) - 1):
        if (gs[k - 1] < 0.0) != (gs[k + 1] < 0.0):
            continue  # already handled by a sign change
        toward_zero = (gs[k] > gs[k - 1] and gs[k] > gs[k + 1] and gs[k] < 0.0) \
            or (gs[k] < gs[k - 1] and gs[k] < gs[k + 1] and gs[k] > 0.0)
        if not toward_zero:
            continue
        want_max = gs[k] < 0.0
        xa, xb = samples[k - 1][0], samples[k + 1][0]
        z_warm = samples[k][1]
        x_star, g_star, z_star = samples[k][0], gs[k], samples[k][1]
        ok = True
        for _ in range(60):
            xl = xa + (xb - xa) / 3.0
            xr = xb - (xb - xa) / 3.0
            try:
                zl = _newton_fixed_xi(fam, xl, z_warm, cfg, ztol)
                zr = _newton_fixed_xi(fam, xr, zl, cfg, ztol)
            except NoConvergence:
                ok = False
                break
            z_warm = zr
            gl, gr = zl.real - alpha, zr.real - alpha
            if (gl > gr) == want_max:
                xb = xr
                x_star, g_star, z_star = xl, gl, zl
            else:
                xa = xl
                x_star, g_star, z_star = xr, gr, zr
            if abs(xb - xa) <= 1e-13:
                break
        if not ok:
            continue
        if abs(g_star) <= gtol:
            residual_at(x_star, z_star)
        elif (g_star > 0.0) == want_max:
            # the extremum pokes across: one crossing on each side
            bisect(samples[k - 1][0], gs[k - 1], x_star, samples[k - 1][1])
            bisect(x_star, g_star, samples[k + 1][0], z_star)
    return found


def beta_min(fam: AdmissibleFamily, alpha: float, cfg: ResonatorConfig,
             beta_max: float = 0.05, n_steps: int = 150,
             n_xi: int = 360, tol: float = DEFAULT_TOL,
             max_densify: int = 3) -> ParetoPoint:
    """Minimal decay rate among nonlinear eigenvalues at one frequency.

    Decay rates are swept upward on a coarse grid; each local basin of
    the phase-minimized residual is polished with the fixed-frequency
    Newton mode, and the smallest converged rate wins.  If no basin
    converges the phase grid is densified tenfold (up to 10**max_densify
    times) — near fast-moving parts of the spectral curves a coarse
    phase grid aliases the basins.  Negative frequencies are handled by
    the mirror symmetry of the spectrum.
    """
    check_constraint_order(fam)
    if not fam.bangbang_ready:
        raise NotBangbangReady("beta_min requires a solvable constraint family")
    if alpha < 0.0:
        return _mirror_point(beta_min(fam, -alpha, cfg, beta_max, n_steps,
                                      n_xi, tol, max_densify))
    arrs = _kernel_args(fam, cfg)
    betas = np.linspace(beta_max / n_steps, beta_max, n_steps)

    dens = 1
    for _ in range(max_densify + 1):
        vals = np.empty(n_steps)
        xis = np.empty(n_steps)
        for i, b in enumerate(betas):
            v, xi, _ = _stat_at(arrs, cfg, complex(alpha, -b), n_xi * dens,
                                False)
            vals[i] = v
            xis[i] = xi
        # every local basin, smallest first
        basins = [i for i in range(n_steps)
                  if (i == 0 or vals[i] <= vals[i - 1])
                  and (i == n_steps - 1 or vals[i] <= vals[i + 1])
                  and math.isfinite(vals[i])]
        basins.sort(key=lambda i: vals[i])
        roots: list[RefinedRoot] = []
        for i in basins:
            try:
                root = refine_nl_root(fam, xis[i], complex(alpha, -betas[i]),
                                      "fix_alpha", cfg, tol=tol)
            except (NoConvergence, JacobianSingular):
                # The fixed-frequency system is singular at folds of the
                # spectral curves (cloud extremities).  Land on the curve
                # with the free mode, then follow the branch to Re z =
                # alpha in the phase chart, which stays regular there.
                # Several landing phases are tried because parts of a
                # branch can be blocked by switching tangencies, where
                # the field evaluation refuses to choose a region.
                landings: list[float] = []
                got_tracked = False
                for xi_s in [xis[i]] + [math.pi * k / 12 for k in range(12)]:
                    try:
                        free = refine_nl_root(fam, xi_s,
                                              complex(alpha, -betas[i]),
                                              "free", cfg, tol=tol)
                    except (NoConvergence, JacobianSingular):
                        continue
                    if abs(free.z.real - alpha) > 0.01 * (1.0 + abs(alpha)):
                        continue
                    half_pi = 0.5 * math.pi
                    if any(abs((free.xi - xl + half_pi) % math.pi - half_pi)
                           < 0.25 for xl in landings):
                        continue
                    landings.append(free.xi)
                    for tracked in _track_alpha(fam, free.xi, free.z, alpha,
                                                cfg, tol):
                        b_tr = -tracked.z.imag
                        if 0.0 < b_tr <= beta_max * (1.0 + 1e-9):
                            roots.append(tracked)
                            got_tracked = True
                    if got_tracked:
                        break
                continue
            beta = -root.z.imag
            if 0.0 < beta <= beta_max * (1.0 + 1e-9):
                roots.append(root)
        if roots:
            root = min(roots, key=lambda r: -r.z.imag)
            # Near a fold the two crossings of Re z = alpha sit closer in
            # decay than the level grid resolves, so they share a basin
            # and the polish lands on either one.  Sweep the winner's own
            # branch to pick up a lower sibling.
            for tracked in _track_alpha(fam, root.xi, root.z, alpha,
                                        cfg, tol):
                b_tr = -tracked.z.imag
                if 0.0 < b_tr <= beta_max * (1.0 + 1e-9) \
                        and b_tr < -root.z.imag:
                    root = tracked
            pair = NlEigenpair(root.z, root.xi,
                               theta_nl(fam, root.xi, root.z, cfg)[1],
                               root.residual)
            structure = recover_structure(pair, fam, cfg, tol=tol)
            return ParetoPoint(alpha, -root.z.imag, root.xi, structure,
                               root.residual)
        dens *= 10
    raise NoRootFound(
        f"no nonlinear eigenvalue with Re z = {alpha} and decay in "
        f"(0, {beta_max}] (phase grid densified {dens // 10}x)")


def pareto_sweep(fam: AdmissibleFamily, alphas: Sequence[float],
                 cfg: ResonatorConfig, cold: bool = False,
                 beta_max: float = 0.05, n_steps: int = 150,
                 n_xi: int = 360, tol: float = DEFAULT_TOL,
                 ) -> list[tuple[float, Optional[ParetoPoint], Optional[str]]]:
    """beta_min for a list of frequencies.

    Warm mode narrows each sweep to four times the previously found
    decay rate (the sweep still starts from zero, so smaller roots are
    never missed); cold mode keeps every solve independent.  Failures
    are recorded per frequency and do not stop the sweep.
    """
    out: list[tuple[float, Optional[ParetoPoint], Optional[str]]] = []
    prev_beta: Optional[float] = None
    for alpha in alphas:
        bmax = beta_max
        steps = n_steps
        if not cold and prev_beta is not None:
            bmax = min(beta_max, 4.0 * prev_beta)
            steps = max(25, int(round(n_steps * bmax / beta_max)))
        try:
            point = beta_min(fam, alpha, cfg, beta_max=bmax, n_steps=steps,
                             n_xi=n_xi, tol=tol)
            out.append((alpha, point, None))
            prev_beta = point.beta_min
        except (NoRootFound, NoConvergence) as exc:
            out.append((alpha, None, type(exc).__name__))
    return out


def verify_pareto_point(point: ParetoPoint, cfg: ResonatorConfig,
                        alpha_pad: float = 2e-3,
                        tol: float = DEFAULT_TOL) -> list:
    """Check no resonance of the recovered structure beats the reported
    decay rate at (nearly) the same frequency; returns the offenders."""
    beta = point.beta_min
    rect = Rect(point.alpha - alpha_pad, point.alpha + alpha_pad,
                -beta * (1.0 - 1e-6), -1e-9 * max(beta, 1.0))
    found = find_resonances(point.structure, cfg, rect,
                            (alpha_pad / 4.0, beta / 40.0), tol=tol)
    return [r for r in found if -r.omega.imag < beta * (1.0 - 1e-6)]


# ---------------------------------------------------------------------------
# zero-frequency optimum (closed form)

def _k1_const(b: float, cfg: ResonatorConfig) -> float:
    if b == 0.0:
        return 0.0
    rb = math.sqrt(b)
    denom = cfg.nu1 / rb + rb * cfg.inv_nu2
    return (1.0 + cfg.nu1 * cfg.inv_nu2) / denom


def _k2_const(b: float, cfg: ResonatorConfig) -> float:
    """Zero-frequency decay factor of a uniform slab (larger is better)."""
    if b == 0.0:
        if cfg.nu1 == 0.0:
            return 0.0
        return math.exp(-2.0 / cfg.nu1 - 2.0 * cfg.inv_nu2)
    k1 = _k1_const(b, cfg)
    ratio = abs((1.0 - k1) / (1.0 + k1))
    if ratio == 0.0:
        return 0.0
    return math.copysign(ratio ** (1.0 / math.sqrt(b)), 1.0 - k1)


def beta_min_zero(fam: AdmissibleFamily, cfg: ResonatorConfig,
                  rel_tie_tol: float = 1e-12) -> tuple[float, tuple[float, ...]]:
    """Minimal decay rate of purely imaginary resonances, in closed form.

    Only uniform constraint pairs are supported.  Requires the lower
    constraint to sit below the left boundary parameter or the upper
    constraint above the right one; otherwise no purely imaginary
    resonance is guaranteed to exist and HypothesisViolated is raised.
    Returns the decay rate and the constraint value(s) attaining it —
    both are returned when they tie, which is the non-uniqueness case.
    """
    if not (fam.b1.is_constant and fam.b2.is_constant):
        raise ConfigError("beta_min_zero needs constant constraints")
    b1 = fam.b1.values[0]
    b2 = fam.b2.values[0]
    if not (math.sqrt(b1) < cfg.nu1 or math.sqrt(b2) > cfg.nu2):
        raise HypothesisViolated(
            "need sqrt(b1) < nu1 or sqrt(b2) > nu2 for a guaranteed "
            "purely imaginary resonance")
    k2s = {b1: _k2_const(b1, cfg), b2: _k2_const(b2, cfg)}
    best = max(k2s.values())
    if not best > 0.0:
        raise HypothesisViolated("no positive zero-frequency decay factor")
    winners = tuple(sorted(b for b, v in k2s.items()
                           if best - v <= rel_tie_tol * max(1.0, abs(best))))
    beta = -math.log(best) / (2.0 * cfg.length)
    return beta, winners


# ---------------------------------------------------------------------------
# guaranteed-admissibility thresholds (closed form)

@dataclass(frozen=True)
class ThresholdCase:
    """Sharpest guaranteed-admissibility threshold for |frequency|.

    Frequencies with |alpha| >= threshold (strictly greater when strict
    is set) are guaranteed to carry an admissible resonance.
    general_bound is the arrangement-independent fallback, always valid
    but never sharper.
    """

    case_id: str
    threshold: float
    strict: bool
    general_bound: float


def admissible_thresholds(b1: float, b2: float,
                          cfg: ResonatorConfig) -> ThresholdCase:
    """Classify the arrangement of the constraint band against the
    boundary parameters and return the sharpest frequency threshold.

    The twelve arrangements of (sqrt(b1), sqrt(b2)) relative to
    [nu1, nu2] each get their own overlap criterion for the resonance
    grids of the uniform slabs inside the band; the threshold is the
    frequency beyond which consecutive grids overlap, so that every
    higher frequency is hit by some uniform slab.
    """
    if not (0.0 <= b1 < b2):
        raise ValueError("need 0 <= b1 < b2")
    s1 = math.sqrt(b1)
    s2 = math.sqrt(b2)
    nu1, nu2 = cfg.nu1, cfg.nu2
    L = cfg.length
    base = math.pi / (L * s2)
    general = 2.0 * math.pi / (L * (s2 - s1))
    r = s1 / (s2 - s1)
    grid_out = base * math.ceil(r)
    grid_in = base * (0.5 + math.ceil(r - 0.5))

    if s2 < nu1:
        if s1 == 0.0:
            case, t, strict = "zero-below", base, True
        else:
            case, t, strict = "band-below", grid_out, False
    elif s2 == nu1:
        if s1 == 0.0:
            case, t, strict = "zero-below", base, True
        else:
            case, t, strict = "band-touch-left", grid_out, True
    elif s2 < nu2:
        if s1 >= nu1:
            case, t, strict = "band-inside", grid_in, False
        elif s1 == 0.0:
            case, t, strict = "zero-straddle-left", 1.5 * base, True
        else:
            case, t, strict = ("band-straddle-left",
                               base * (0.5 + math.ceil(1.5 * r)), True)
    elif s2 == nu2:
        if s1 == nu1:
            case, t, strict = ("band-match-ends",
                               base * (0.5 + math.floor(r + 0.5)), True)
        elif s1 > nu1:
            case, t, strict = "band-touch-right", grid_in, True
        elif s1 == 0.0:
            case, t, strict = "zero-straddle-left", 1.5 * base, True
        else:
            case, t, strict = ("band-straddle-left",
                               base * (0.5 + math.ceil(1.5 * r)), True)
    elif s2 > nu2:
        if s1 >= nu2:
            case, t, strict = "band-above", grid_out, False
        elif s1 >= nu1:
            case, t, strict = ("band-spanning-right",
                               base * math.ceil((0.5 * s2 + s1) / (s2 - s1)),
                               False)
        elif s1 == 0.0:
            case, t, strict = "zero-covering", 2.0 * base, False
        else:
            case, t, strict = ("band-covering",
                               base * math.ceil((s2 + s1) / (s2 - s1)), False)
    else:  # pragma: no cover - the comparisons above are exhaustive
        raise CaseNotCovered(f"s1={s1}, s2={s2}, nu=[{nu1}, {nu2}]")
    return ThresholdCase(case, t, strict, general)


def homogeneous_witness(b1: float, b2: float, alpha: float,
                        cfg: ResonatorConfig
                        ) -> Optional[tuple[float, complex]]:
    """A uniform slab from the open-closed band (b1, b2] with a
    resonance at frequency exactly |alpha|, or None.

    Candidates come from inverting the resonance grids: integer
    spacings for slabs outside [nu1, nu2], half-integer inside.  Among
    the valid candidates the one farthest (relatively) from the
    degenerate matched-impedance points is returned, as it has the
    smallest decay rate blow-up.
    """
    a = abs(alpha)
    if a == 0.0:
        return None
    L = cfg.length
    s1 = math.sqrt(b1)
    s2 = math.sqrt(b2)
    nu1, nu2 = cfg.nu1, cfg.nu2
    cands: list[float] = []
    n_hi = int(L * a * s2 / math.pi) + 2
    for n in range(1, n_hi + 1):
        s = math.pi * n / (L * a)
        if s1 < s <= s2 and (s < nu1 or s > nu2):
            cands.append(s)
    for n in range(0, n_hi + 1):
        s = math.pi * (n + 0.5) / (L * a)
        if s1 < s <= s2 and nu1 < s < nu2:
            cands.append(s)
    if not cands:
        return None

    def margin(s: float) -> float:
        m = abs(s - nu1) / s
        if math.isfinite(nu2):
            m = min(m, abs(s - nu2) / s)
        return m

    s = max(cands, key=margin)
    b = s * s
    params = classify_homogeneous(b, cfg)
    if params.kind not in (SpectrumKind.INTEGER_GRID,
                           SpectrumKind.HALF_INTEGER_GRID):
        return None
    omega = complex(a, -params.decay)
    return b, omega
