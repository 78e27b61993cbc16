"""Command-line front end.

Subcommands wrap the library solvers; every run reads a JSON problem
description (``--config``), writes CSV artifacts plus a machine-readable
run manifest, and reports results as ``key=value`` lines on stdout.

Exit codes: 0 success, 2 configuration error, 3 numerical failure
(for example NoConvergence or NoRootFound); in either failure case the
exception class is named on stderr and whatever partial results exist
are still written, with ``"partial": true`` recorded in the manifest.

Tolerance precedence: ``--tol`` flag, then the config file's ``tol``
key, then the environment variable ``CAVITY_QOPT_TOL``, then the
built-in default.
"""

from __future__ import annotations

import argparse
import json
import math
import os
import sys
import time
from typing import Optional, Sequence

from .bangbang import recover_structure
from .config import LoadedConfig, PatchSettings, load_config
from .errors import (
    CavityError,
    CaseNotCovered,
    ConfigError,
    ConstraintOrderViolation,
    EmptyConstraintGap,
    MasslessNeumann,
    MismatchedInterval,
    NoRootFound,
    NotBangbangReady,
)
from .model import StepFunction
from .optimize import (
    DEFAULT_TOL,
    ScanGrid,
    ScanPoint,
    ScanResult,
    Statistic,
    admissible_thresholds,
    beta_min,
    beta_min_zero,
    cluster_scan_points,
    pareto_sweep,
    scan_nl_spectrum,
)
from .perturbation import Direction, perturbation_sweep
from .spectrum import (
    Rect,
    classify_homogeneous,
    find_resonances,
    homogeneous_spectrum,
    turning_interval,
)

__all__ = ["main"]

TOL_ENV_VAR = "CAVITY_QOPT_TOL"
DEFAULT_RECT = (0.0, 1.2, -0.015, 0.0)
DEFAULT_GRID = (2e-3, 1e-4)
DEFAULT_N_XI = 360
DEFAULT_EPS = 5e-5

# Errors that mean the problem description itself is unusable (exit 2),
# as opposed to a solver failing on a well-posed problem (exit 3).
_CONFIG_ERROR_TYPES = (
    ConfigError,
    ConstraintOrderViolation,
    EmptyConstraintGap,
    MismatchedInterval,
    MasslessNeumann,
    NotBangbangReady,
    CaseNotCovered,
)


def _f17(x: float) -> str:
    return "%.17g" % float(x)


def _join17(values) -> str:
    return ";".join(_f17(v) for v in values)


def _write_csv(path: str, header: Sequence[str], rows) -> None:
    with open(path, "w", encoding="utf-8", newline="") as fh:
        fh.write(",".join(header) + "\n")
        for row in rows:
            fh.write(",".join(row) + "\n")


def _stem(path: str) -> str:
    return path[:-4] if path.lower().endswith(".csv") else path


class _Run:
    """Collects outputs and failures for the manifest."""

    def __init__(self, args, loaded: LoadedConfig):
        self.args = args
        self.loaded = loaded
        self.outputs: list[str] = []
        self.failures: list[dict] = []
        self.params: dict = {}
        base = args.out if args.out else f"cavity_qopt_{args.subcommand}.csv"
        self.base = base
        self.stem = _stem(base)

    def aux(self, suffix: str) -> str:
        return f"{self.stem}.{suffix}"

    def note_failure(self, where: str, exc: BaseException) -> None:
        self.failures.append({
            "where": where,
            "error": type(exc).__name__,
            "message": str(exc),
        })

    def emit(self, path: str, header: Sequence[str], rows) -> None:
        _write_csv(path, header, rows)
        self.outputs.append(path)


def _resolve_tol(args, loaded: LoadedConfig) -> float:
    if args.tol is not None:
        if args.tol <= 0:
            raise ConfigError("--tol must be positive")
        return args.tol
    if loaded.tol is not None:
        return loaded.tol
    env = os.environ.get(TOL_ENV_VAR)
    if env is not None:
        try:
            tol = float(env)
        except ValueError as exc:
            raise ConfigError(
                f"{TOL_ENV_VAR}={env!r} is not a number") from exc
        if tol <= 0:
            raise ConfigError(f"{TOL_ENV_VAR} must be positive")
        return tol
    return DEFAULT_TOL


def _resolve_rect(args, loaded: LoadedConfig) -> Rect:
    if args.rect is not None:
        vals = tuple(args.rect)
    elif loaded.scan is not None and loaded.scan.rect is not None:
        vals = loaded.scan.rect
    else:
        vals = DEFAULT_RECT
    try:
        return Rect(*vals)
    except ValueError as exc:
        raise ConfigError(f"--rect: {exc}") from exc


def _resolve_grid(args, loaded: LoadedConfig) -> tuple[float, float]:
    if args.grid is not None:
        h_re, h_im = args.grid
    else:
        scan = loaded.scan
        h_re = scan.h_re if scan and scan.h_re is not None else DEFAULT_GRID[0]
        h_im = scan.h_im if scan and scan.h_im is not None else DEFAULT_GRID[1]
    if h_re <= 0 or h_im <= 0:
        raise ConfigError("--grid steps must be positive")
    return h_re, h_im


def _resolve_n_xi(args, loaded: LoadedConfig) -> int:
    if args.xi_steps is not None:
        if args.xi_steps < 1:
            raise ConfigError("--xi-steps must be a positive integer")
        return args.xi_steps
    if loaded.scan is not None and loaded.scan.n_xi is not None:
        return loaded.scan.n_xi
    return DEFAULT_N_XI


def _resolve_eps(args, loaded: LoadedConfig) -> float:
    if args.eps is not None:
        if args.eps <= 0:
            raise ConfigError("--eps must be positive")
        return args.eps
    if loaded.scan is not None and loaded.scan.eps is not None:
        return loaded.scan.eps
    return DEFAULT_EPS


def _resolve_stat(args, loaded: LoadedConfig) -> Statistic:
    name = args.stat
    if name is None and loaded.scan is not None:
        name = loaded.scan.statistic
    if name is None:
        name = "min"
    return Statistic.MAX_OVER_XI if name == "max" else Statistic.MIN_OVER_XI


def _need_profile(loaded: LoadedConfig):
    if loaded.profile is None:
        raise ConfigError("this subcommand needs a concrete structure: "
                          "add a 'B' entry to the configuration")
    return loaded.profile


def _need_family(loaded: LoadedConfig):
    if loaded.family is None:
        raise ConfigError("this subcommand needs constraint bounds: "
                          "add 'b1' and 'b2' entries to the configuration")
    return loaded.family


def _resonance_rows(resonances):
    return [[_f17(r.omega.real), _f17(r.omega.imag), str(r.multiplicity),
             _f17(r.residual)] for r in resonances]


def _rect_tuple(rect: Rect) -> tuple[float, float, float, float]:
    return (rect.re_min, rect.re_max, rect.im_min, rect.im_max)


def _json_safe(value):
    """JSON-strict copy: non-finite floats become strings."""
    if isinstance(value, float) and not math.isfinite(value):
        return repr(value)
    if isinstance(value, dict):
        return {k: _json_safe(v) for k, v in value.items()}
    if isinstance(value, (list, tuple)):
        return [_json_safe(v) for v in value]
    return value


# ---------------------------------------------------------------- subcommands


def _cmd_spectrum(run: _Run) -> None:
    args, loaded = run.args, run.loaded
    profile = _need_profile(loaded)
    rect = _resolve_rect(args, loaded)
    grid = _resolve_grid(args, loaded)
    tol = _resolve_tol(args, loaded)
    run.params.update(rect=list(_rect_tuple(rect)), h_re=grid[0],
                      h_im=grid[1], tol=tol)
    found = find_resonances(profile, loaded.resonator, rect, grid, tol=tol)
    run.emit(run.base, ["re_omega", "im_omega", "multiplicity", "residual"],
             _resonance_rows(found))
    print(f"n_resonances={len(found)}")


def _cmd_homog(run: _Run) -> None:
    args, loaded = run.args, run.loaded
    if args.b is None:
        raise ConfigError("homog requires --b VALUE")
    rect = _resolve_rect(args, loaded)
    cfg = loaded.resonator
    params = classify_homogeneous(args.b, cfg)
    if params.spacing is not None:
        lo = math.floor(rect.re_min / params.spacing) - 2
        hi = math.ceil(rect.re_max / params.spacing) + 2
        modes = homogeneous_spectrum(args.b, cfg, n_range=(lo, hi))
    else:
        modes = homogeneous_spectrum(args.b, cfg)
    kept = [m for m in modes if rect.contains(m.omega)]
    run.params.update(b=args.b, rect=list(_rect_tuple(rect)),
                      K1=params.K1, decay=params.decay,
                      spacing=params.spacing, kind=params.kind.value)
    run.emit(run.base, ["re_omega", "im_omega", "multiplicity", "residual"],
             _resonance_rows(kept))
    print(f"kind={params.kind.value}")
    print(f"K1={_f17(params.K1)}")
    print(f"decay={'' if params.decay is None else _f17(params.decay)}")
    print(f"spacing={'' if params.spacing is None else _f17(params.spacing)}")
    print(f"n_resonances={len(kept)}")


def _cmd_perturb(run: _Run) -> None:
    args, loaded = run.args, run.loaded
    profile = _need_profile(loaded)
    cfg = loaded.resonator
    tol = _resolve_tol(args, loaded)
    rect = _resolve_rect(args, loaded)
    grid = _resolve_grid(args, loaded)
    if args.omega is not None:
        omega = complex(args.omega[0], args.omega[1])
    else:
        found = find_resonances(profile, cfg, rect, grid, tol=tol)
        if not found:
            raise NoRootFound("no resonance of B found in the rectangle; "
                              "give --omega RE IM explicitly")
        omega = max(found, key=lambda r: r.omega.imag).omega
    if loaded.family is not None and loaded.family.b1 != loaded.family.b2:
        direction = Direction.from_difference(loaded.family.b2,
                                              loaded.family.b1)
    else:
        direction = Direction.indicator(cfg.interval, cfg.interval.a1,
                                        cfg.interval.a2)
    if args.zeta_max <= 0 or args.zeta_steps < 2:
        raise ConfigError("--zeta-max must be positive and --zeta-steps >= 2")
    p_hi = math.log10(args.zeta_max)
    zetas = [10.0 ** (p_hi - 3.0 + 3.0 * k / (args.zeta_steps - 1))
             for k in range(args.zeta_steps)]
    run.params.update(omega=[omega.real, omega.imag], tol=tol,
                      zeta_max=args.zeta_max, zeta_steps=args.zeta_steps)
    rows_out = []
    sweep = perturbation_sweep(profile, omega, direction, zetas, cfg, tol=tol)
    logs = []
    for row in sweep:
        rows_out.append([_f17(row.zeta), _f17(row.error),
                         str(len(row.predicted)), str(len(row.recomputed))])
        if row.zeta > 0.0 and row.error > 0.0:
            logs.append((math.log10(row.zeta), math.log10(row.error)))
    run.emit(run.base, ["zeta", "hausdorff_err", "n_predicted",
                        "n_recomputed"], rows_out)
    print(f"omega_re={_f17(omega.real)}")
    print(f"omega_im={_f17(omega.imag)}")
    if len(logs) >= 2:
        n = len(logs)
        sx = sum(x for x, _ in logs)
        sy = sum(y for _, y in logs)
        sxx = sum(x * x for x, _ in logs)
        sxy = sum(x * y for x, y in logs)
        slope = (n * sxy - sx * sy) / (n * sxx - sx * sx)
        print(f"slope={_f17(slope)}")


def _scan_one(fam, cfg, rect: Rect, h_re: float, h_im: float, n_xi: int,
              eps: float, stat: Statistic, args, tol: float) -> ScanResult:
    grid = ScanGrid(rect, h_re, h_im, n_xi=n_xi, eps=eps)
    return scan_nl_spectrum(fam, grid, cfg, statistic=stat,
                            threads=args.threads,
                            keep_landscape=args.landscape,
                            refine=args.refine,
                            gate_factor=args.gate_factor,
                            refine_tol=tol)


def _merge_points(results: Sequence[ScanResult]) -> list[ScanPoint]:
    best: dict[complex, ScanPoint] = {}
    for res in results:
        for p in res.points:
            old = best.get(p.z)
            if old is None or p.value < old.value:
                best[p.z] = p
    return sorted(best.values(), key=lambda p: (p.z.real, p.z.imag))


def _cmd_nlscan(run: _Run) -> None:
    args, loaded = run.args, run.loaded
    fam = _need_family(loaded)
    cfg = loaded.resonator
    rect = _resolve_rect(args, loaded)
    h_re, h_im = _resolve_grid(args, loaded)
    n_xi = _resolve_n_xi(args, loaded)
    eps = _resolve_eps(args, loaded)
    stat = _resolve_stat(args, loaded)
    tol = _resolve_tol(args, loaded)
    run.params.update(rect=list(_rect_tuple(rect)), h_re=h_re, h_im=h_im,
                      n_xi=n_xi, eps=eps, tol=tol,
                      statistic=("max" if stat is Statistic.MAX_OVER_XI
                                 else "min"),
                      threads=args.threads, refine=args.refine,
                      gate_factor=args.gate_factor)

    results = [_scan_one(fam, cfg, rect, h_re, h_im, n_xi, eps, stat,
                         args, tol)]
    patch_list: Sequence[PatchSettings] = ()
    if loaded.scan is not None:
        patch_list = loaded.scan.patches
    patches_used = []
    for patch in patch_list:
        p_rect = Rect(*patch.rect)
        p = _scan_one(fam, cfg, p_rect,
                      patch.h_re if patch.h_re is not None else h_re,
                      patch.h_im if patch.h_im is not None else h_im,
                      patch.n_xi if patch.n_xi is not None else n_xi,
                      patch.eps if patch.eps is not None else eps,
                      stat, args, tol)
        results.append(p)
        patches_used.append(list(patch.rect))
    if patches_used:
        run.params.update(patches=patches_used)

    points = _merge_points(results)
    rows = [[_f17(p.z.real), _f17(p.z.imag), _f17(p.value), _f17(p.best_xi)]
            for p in points]
    run.emit(run.base, ["re_z", "im_z", "stat_value", "best_xi"], rows)
    n_failed = sum(r.n_failed for r in results)
    print(f"n_points={len(points)}")
    print(f"n_failed={n_failed}")

    if args.refine:
        merged = ScanResult(tuple(points), stat, results[0].grid)
        clusters = cluster_scan_points(merged)
        crows = []
        for k, cl in enumerate(clusters):
            a_lo, a_hi = cl.alpha_range
            crows.append([str(k), str(len(cl.points)), _f17(a_lo),
                          _f17(a_hi), _f17(cl.min_beta)])
        run.emit(run.aux("clusters.csv"),
                 ["cluster", "n_points", "alpha_min", "alpha_max",
                  "min_beta"], crows)
        print(f"n_clusters={len(clusters)}")

    if args.landscape and results[0].landscape is not None:
        grid0 = results[0].grid
        re_ax, im_ax = grid0.re_axis, grid0.im_axis
        land = results[0].landscape
        lrows = [[_f17(re_ax[i]), _f17(im_ax[j]), _f17(land[i, j])]
                 for i in range(len(re_ax)) for j in range(len(im_ax))]
        run.emit(run.aux("landscape.csv"), ["re_z", "im_z", "stat_value"],
                 lrows)


def _layers_rows(structure: StepFunction):
    return [[str(k), _f17(xl), _f17(xr), _f17(v)]
            for k, (xl, xr, v) in enumerate(structure.pieces())]


def _frontier_row(alpha: float, point) -> list[str]:
    return [_f17(alpha), _f17(point.beta_min), _f17(point.xi),
            _f17(point.residual), str(len(point.structure.values)),
            _join17(point.switch_points)]


_FRONTIER_HEADER = ["alpha", "beta_min", "xi", "residual", "n_layers",
                    "switch_points"]


def _read_alpha_list(path: str) -> list[float]:
    try:
        with open(path, "r", encoding="utf-8") as fh:
            text = fh.read()
    except OSError as exc:
        raise ConfigError(f"cannot read alpha list '{path}': {exc}") from exc
    alphas = []
    for ln, line in enumerate(text.splitlines(), 1):
        body = line.split("#", 1)[0].strip()
        if not body:
            continue
        try:
            alphas.append(float(body))
        except ValueError as exc:
            raise ConfigError(
                f"alpha list '{path}' line {ln}: not a number") from exc
    if not alphas:
        raise ConfigError(f"alpha list '{path}' contains no values")
    return alphas


def _sweep_common(run: _Run, alphas: list[float], cold: bool) -> None:
    args, loaded = run.args, run.loaded
    fam = _need_family(loaded)
    cfg = loaded.resonator
    tol = _resolve_tol(args, loaded)
    n_xi = _resolve_n_xi(args, loaded)
    run.params.update(alphas=alphas, beta_max=args.beta_max,
                      n_steps=args.steps, n_xi=n_xi, tol=tol, cold=cold)
    rows = []
    outcome = pareto_sweep(fam, alphas, cfg, cold=cold,
                           beta_max=args.beta_max, n_steps=args.steps,
                           n_xi=n_xi, tol=tol)
    last_pt = None
    for alpha, point, errname in outcome:
        if point is None:
            run.failures.append({"where": f"alpha={_f17(alpha)}",
                                 "error": errname, "message": ""})
        else:
            rows.append(_frontier_row(alpha, point))
            last_pt = (alpha, point)
    run.emit(run.base, _FRONTIER_HEADER, rows)
    n_failed = len(outcome) - len(rows)
    if len(alphas) == 1 and last_pt is not None:
        alpha, point = last_pt
        run.emit(run.aux("layers.csv"),
                 ["piece", "x_left", "x_right", "value"],
                 _layers_rows(point.structure))
        print(f"beta_min={_f17(point.beta_min)}")
        print(f"alpha={_f17(alpha)}")
        print(f"xi={_f17(point.xi)}")
        print(f"n_layers={len(point.structure.values)}")
    else:
        print(f"n_ok={len(rows)}")
        print(f"n_failed={n_failed}")
    if n_failed:
        raise NoRootFound(
            f"{n_failed} of {len(alphas)} frequencies failed; "
            "partial frontier written")


def _cmd_betamin(run: _Run) -> None:
    args = run.args
    if (args.alpha is None) == (args.alpha_list is None):
        raise ConfigError("betamin requires exactly one of --alpha or "
                          "--alpha-list")
    alphas = ([args.alpha] if args.alpha is not None
              else _read_alpha_list(args.alpha_list))
    # independent solves: a user-supplied list need not be sorted or dense
    _sweep_common(run, alphas, cold=True)


def _cmd_pareto(run: _Run) -> None:
    args = run.args
    if args.alpha_list is not None:
        alphas = _read_alpha_list(args.alpha_list)
    elif args.alpha_grid is not None:
        a0, a1, n_f = args.alpha_grid
        n = int(round(n_f))
        if n < 2 or not a0 < a1:
            raise ConfigError("--alpha-grid needs A0 < A1 and N >= 2")
        alphas = [a0 + (a1 - a0) * k / (n - 1) for k in range(n)]
    else:
        raise ConfigError("pareto requires --alpha-grid A0 A1 N or "
                          "--alpha-list FILE")
    _sweep_common(run, alphas, cold=args.cold)


def _cmd_betamin0(run: _Run) -> None:
    args, loaded = run.args, run.loaded
    fam = _need_family(loaded)
    tol = _resolve_tol(args, loaded)
    run.params.update(tol=tol)
    beta, winners = beta_min_zero(fam, loaded.resonator)
    run.emit(run.base, ["beta", "optimal_b_values"],
             [[_f17(beta), _join17(winners)]])
    print(f"beta={_f17(beta)}")
    print(f"optimal_b={_join17(winners)}")


def _cmd_recover(run: _Run) -> None:
    args, loaded = run.args, run.loaded
    fam = _need_family(loaded)
    cfg = loaded.resonator
    tol = _resolve_tol(args, loaded)
    if args.alpha is not None:
        n_xi = _resolve_n_xi(args, loaded)
        run.params.update(alpha=args.alpha, beta_max=args.beta_max,
                          n_steps=args.steps, n_xi=n_xi, tol=tol)
        point = beta_min(fam, args.alpha, cfg, beta_max=args.beta_max,
                         n_steps=args.steps, n_xi=n_xi, tol=tol)
        structure = point.structure
        omega, xi = point.omega, point.xi
    elif args.omega is not None and args.xi is not None:
        omega = complex(args.omega[0], args.omega[1])
        xi = args.xi
        run.params.update(omega=[omega.real, omega.imag], xi=xi, tol=tol)
        structure = recover_structure((xi, omega), fam, cfg, tol=tol)
    else:
        raise ConfigError("recover requires --alpha A or both "
                          "--omega RE IM and --xi XI")
    switch = structure.breakpoints[1:-1]
    run.emit(run.base, ["piece", "x_left", "x_right", "value"],
             _layers_rows(structure))
    print(f"omega_re={_f17(omega.real)}")
    print(f"omega_im={_f17(omega.imag)}")
    print(f"xi={_f17(xi)}")
    print(f"n_layers={len(structure.values)}")
    print(f"switch_points={_join17(switch)}")


def _cmd_admissible(run: _Run) -> None:
    loaded = run.loaded
    fam = _need_family(loaded)
    if not (fam.b1.is_constant and fam.b2.is_constant):
        raise ConfigError("admissible requires constant b1 and b2")
    b1v = fam.b1.values[0]
    b2v = fam.b2.values[0]
    cfg = loaded.resonator
    case = admissible_thresholds(b1v, b2v, cfg)
    hyp = (math.sqrt(b1v) < cfg.nu1) or (math.sqrt(b2v) > cfg.nu2)
    run.params.update(b1=b1v, b2=b2v)
    run.emit(run.base,
             ["case", "threshold", "strict", "general_bound",
              "zero_frequency_hypothesis"],
             [[case.case_id, _f17(case.threshold), str(case.strict).lower(),
               _f17(case.general_bound), str(hyp).lower()]])
    print(f"case={case.case_id}")
    print(f"threshold={_f17(case.threshold)}")
    print(f"strict={str(case.strict).lower()}")
    print(f"general_bound={_f17(case.general_bound)}")
    print(f"zero_frequency_hypothesis={str(hyp).lower()}")


def _cmd_turning(run: _Run) -> None:
    args, loaded = run.args, run.loaded
    profile = _need_profile(loaded)
    if args.omega is None:
        raise ConfigError("turning requires --omega RE IM")
    omega = complex(args.omega[0], args.omega[1])
    gate = args.tol if args.tol is not None else 1e-8
    run.params.update(omega=[omega.real, omega.imag], tol=gate)
    ti = turning_interval(profile, omega, loaded.resonator, tol=gate)
    node = "" if ti.node is None else _f17(ti.node)
    run.emit(run.base, ["left", "right", "node"],
             [[_f17(ti.left), _f17(ti.right), node]])
    print(f"left={_f17(ti.left)}")
    print(f"right={_f17(ti.right)}")
    print(f"node={node}")


_HANDLERS = {
    "spectrum": _cmd_spectrum,
    "homog": _cmd_homog,
    "perturb": _cmd_perturb,
    "nlscan": _cmd_nlscan,
    "betamin": _cmd_betamin,
    "pareto": _cmd_pareto,
    "betamin0": _cmd_betamin0,
    "recover": _cmd_recover,
    "admissible": _cmd_admissible,
    "turning": _cmd_turning,
}


def _build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", required=True, metavar="FILE",
                        help="JSON problem description")
    common.add_argument("--rect", nargs=4, type=float,
                        metavar=("R0", "R1", "I0", "I1"),
                        help="search window re_min re_max im_min im_max")
    common.add_argument("--grid", nargs=2, type=float, metavar=("HR", "HI"),
                        help="lattice steps for Re and Im")
    common.add_argument("--xi-steps", type=int, metavar="N",
                        help="phase-grid resolution")
    common.add_argument("--eps", type=float, metavar="E",
                        help="sub-level threshold for scans")
    common.add_argument("--tol", type=float, metavar="T",
                        help="numerical tolerance")
    common.add_argument("--out", metavar="FILE", help="primary output CSV")
    common.add_argument("--stat", choices=("min", "max"),
                        help="phase statistic for scans")
    common.add_argument("--threads", type=int, default=1, metavar="K",
                        help="worker threads for scans")
    common.add_argument("--cold", action="store_true",
                        help="disable warm starting in sweeps")

    parser = argparse.ArgumentParser(
        prog="cavity-qopt",
        description="Resonance computation and decay-rate optimization "
                    "for one-dimensional layered cavities.")
    sub = parser.add_subparsers(dest="subcommand", required=True)

    sub.add_parser("spectrum", parents=[common],
                   help="resonances of the structure B in a rectangle")
    p = sub.add_parser("homog", parents=[common],
                       help="closed-form spectrum of a uniform structure")
    p.add_argument("--b", type=float, metavar="B",
                   help="constant structure value")
    p = sub.add_parser("perturb", parents=[common],
                       help="first-order resonance shift versus recomputation")
    p.add_argument("--omega", nargs=2, type=float, metavar=("RE", "IM"),
                   help="base resonance (default: least-decay in window)")
    p.add_argument("--zeta-max", type=float, default=1e-2,
                   help="largest perturbation size (sweep spans 3 decades)")
    p.add_argument("--zeta-steps", type=int, default=13,
                   help="number of sweep sizes")
    p = sub.add_parser("nlscan", parents=[common],
                       help="scan the nonlinear spectrum in a rectangle")
    p.add_argument("--refine", action="store_true",
                   help="Newton-refine lattice candidates onto the curves")
    p.add_argument("--gate-factor", type=float, default=1000.0,
                   help="seed gate as a multiple of eps (refine mode)")
    p.add_argument("--landscape", action="store_true",
                   help="also write the full lattice statistic")
    p = sub.add_parser("betamin", parents=[common],
                       help="minimal decay rate at fixed frequency")
    p.add_argument("--alpha", type=float, metavar="A", help="frequency")
    p.add_argument("--alpha-list", metavar="FILE",
                   help="file with one frequency per line")
    p.add_argument("--beta-max", type=float, default=0.05,
                   help="upper end of the decay-rate search")
    p.add_argument("--steps", type=int, default=150,
                   help="decay-rate sweep resolution")
    p = sub.add_parser("pareto", parents=[common],
                       help="frequency/decay Pareto frontier")
    p.add_argument("--alpha-grid", nargs=3, type=float,
                   metavar=("A0", "A1", "N"),
                   help="uniform frequency grid (N points inclusive)")
    p.add_argument("--alpha-list", metavar="FILE",
                   help="file with one frequency per line")
    p.add_argument("--beta-max", type=float, default=0.05,
                   help="upper end of the decay-rate search")
    p.add_argument("--steps", type=int, default=150,
                   help="decay-rate sweep resolution")
    sub.add_parser("betamin0", parents=[common],
                   help="optimal decay at zero frequency (closed form)")
    p = sub.add_parser("recover", parents=[common],
                       help="optimal layered structure for an eigenpair")
    p.add_argument("--alpha", type=float, metavar="A",
                   help="frequency (runs the decay minimization first)")
    p.add_argument("--omega", nargs=2, type=float, metavar=("RE", "IM"),
                   help="eigenvalue, used with --xi")
    p.add_argument("--xi", type=float, metavar="XI", help="phase parameter")
    p.add_argument("--beta-max", type=float, default=0.05,
                   help="upper end of the decay-rate search (with --alpha)")
    p.add_argument("--steps", type=int, default=150,
                   help="decay-rate sweep resolution (with --alpha)")
    sub.add_parser("admissible", parents=[common],
                   help="guaranteed-frequency threshold for constant bounds")
    p = sub.add_parser("turning", parents=[common],
                       help="flat stretch of the phase flux of a mode")
    p.add_argument("--omega", nargs=2, type=float, metavar=("RE", "IM"),
                   help="resonance to analyze")
    return parser


def main(argv: Optional[Sequence[str]] = None) -> int:
    parser = _build_parser()
    args = parser.parse_args(argv)
    t0 = time.perf_counter()

    manifest = {
        "tool": "cavity-qopt",
        "manifest_version": 1,
        "subcommand": args.subcommand,
        "config_path": args.config,
        "config_sha256": None,
        "params": {},
        "wall_time_s": None,
        "outputs": [],
        "partial": False,
        "failures": [],
    }
    run = None
    exit_code = 0
    try:
        loaded = load_config(args.config)
        manifest["config_sha256"] = loaded.sha256
        run = _Run(args, loaded)
        run.params["threads"] = args.threads
        _HANDLERS[args.subcommand](run)
    except CavityError as exc:
        if run is not None:
            run.note_failure(args.subcommand, exc)
        else:
            manifest["failures"].append({"where": args.subcommand,
                                         "error": type(exc).__name__,
                                         "message": str(exc)})
        print(f"cavity-qopt: {type(exc).__name__}: {exc}", file=sys.stderr)
        exit_code = 2 if isinstance(exc, _CONFIG_ERROR_TYPES) else 3
    finally:
        if run is not None:
            manifest["params"] = run.params
            manifest["outputs"] = run.outputs
            manifest["failures"] = run.failures
        manifest["partial"] = bool(manifest["failures"])
        manifest["wall_time_s"] = time.perf_counter() - t0
        stem = run.stem if run is not None else _stem(
            args.out if args.out else f"cavity_qopt_{args.subcommand}.csv")
        path = f"{stem}.manifest.json"
        try:
            with open(path, "w", encoding="utf-8", newline="") as fh:
                json.dump(_json_safe(manifest), fh, indent=2, sort_keys=True)
                fh.write("\n")
        except OSError as exc:
            print(f"cavity-qopt: cannot write manifest: {exc}",
                  file=sys.stderr)
            exit_code = exit_code or 2
    return exit_code


if __name__ == "__main__":
    sys.exit(main())
