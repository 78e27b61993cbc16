"""Closed-form single-layer maps and the event-driven nonlinear pass.

Everything here is written as plain scalar-loop Python so that the same
source can be compiled by numba when it is installed.  The public modules
wrap these functions with validation and friendlier types; nothing in
here raises, errors travel back as status codes.

Layer map convention: on a layer of constant coefficient b and width w,
with s^2 = z^2 b,

    y_out  = y cos(sw) + dy sin(sw)/s
    dy_out = -y s^2 (sin(sw)/s) + dy cos(sw)

which degenerates to the straight-line map when b = 0 or z = 0.  Only
even functions of s appear once sin(sw)/s is used, so no square-root
branch ever has to be chosen for z; b is real nonnegative and its root
is the ordinary real one.
"""

from __future__ import annotations

import cmath
import math

import numpy as np

# below this |s*w| the trig quotients switch to series
SINC_SERIES_CUTOFF = 1e-4
QUOTIENT_SERIES_CUTOFF = 0.2

# status codes returned by bb_solve
BB_OK = 0
BB_AMBIGUOUS = 1
BB_OVERFLOW = 2
BB_STALLED = 3

CHOICE_LOWER = 0
CHOICE_UPPER = 1
CHOICE_FORCED = 2

KIND_CONSTRAINT = 0
KIND_SWITCH = 1


def c_sinc(t):
    """sin(t)/t for complex t, stable near 0."""
    if abs(t) < SINC_SERIES_CUTOFF:
        t2 = t * t
        return 1.0 - t2 / 6.0 * (1.0 - t2 / 20.0 * (1.0 - t2 / 42.0))
    return cmath.sin(t) / t


def c_omsinc(t):
    """(1 - sin(t)/t) / t^2, entire, value 1/6 at 0."""
    if abs(t) < QUOTIENT_SERIES_CUTOFF:
        t2 = t * t
        return 1.0 / 6.0 - t2 * (
            1.0 / 120.0 - t2 * (1.0 / 5040.0 - t2 * (1.0 / 362880.0 - t2 / 39916800.0))
        )
    return (1.0 - cmath.sin(t) / t) / (t * t)


def c_cms(t):
    """(cos(t) - sin(t)/t) / t, entire and odd, slope -1/3 at 0."""
    if abs(t) < QUOTIENT_SERIES_CUTOFF:
        t2 = t * t
        return -t * (
            1.0 / 3.0 - t2 * (1.0 / 30.0 - t2 * (1.0 / 840.0 - t2 / 45360.0))
        )
    return (cmath.cos(t) - cmath.sin(t) / t) / t


def prop_layer(y, dy, b, w, z):
    """Push Cauchy data (y, dy) through one constant layer."""
    if b == 0.0 or z == 0j:
        return y + dy * w, dy
    s2 = z * z * b
    t = z * math.sqrt(b) * w
    c = cmath.cos(t)
    snw = w * c_sinc(t)
    return y * c + dy * snw, -y * s2 * snw + dy * c


def prop_layer_with_dz(y, dy, yz, dyz, b, w, z):
    """Layer map for (y, dy) chained with its derivative in z.

    (yz, dyz) ride along under the differentiated map, seeded by the
    z-dependence of the initial data at the left cavity end.
    """
    if b == 0.0:
        return y + dy * w, dy, yz + dyz * w, dyz
    sb = math.sqrt(b)
    s2 = z * z * b
    t = z * sb * w
    c = cmath.cos(t)
    s = cmath.sin(t)
    snw = w * c_sinc(t)
    a11 = -w * s * sb
    a12 = sb * w * w * c_cms(t)
    a21 = -sb * (s + t * c)
    y2 = y * c + dy * snw
    dy2 = -y * s2 * snw + dy * c
    yz2 = a11 * y + a12 * dy + c * yz + snw * dyz
    dyz2 = a21 * y + a11 * dy - s2 * snw * yz + c * dyz
    return y2, dy2, yz2, dyz2


def layer_theta2_integral(p, q, b, w, z):
    """Integral over one layer of the squared field.

    The field on the layer is y(tau) = p cos(s tau) + q sin(s tau)/s for
    tau in [0, w], and the integral of y^2 d tau comes out in closed form
    through the same even trig quotients as the layer map.
    """
    if b == 0.0 or z == 0j:
        return p * p * w + p * q * w * w + q * q * w * w * w / 3.0
    t = z * math.sqrt(b) * w
    t2 = 2.0 * t
    sc1 = c_sinc(t)
    return (
        p * p * 0.5 * w * (1.0 + c_sinc(t2))
        + p * q * (w * sc1) * (w * sc1)
        + 2.0 * q * q * w * w * w * c_omsinc(t2)
    )


def probe_choice(y, dy, z, blo, bhi, delta0):
    """Decide the coefficient just ahead of a state sitting on Im y^2 = 0.

    Each candidate is propagated an analytic probe step; it is kept only
    if the sign it produces agrees with the half-plane it encodes (upper
    branch needs Im y^2 > 0, lower tolerates the closed complement).
    The probe shrinks tenfold up to three times before giving up.
    Returns (choice, ok).
    """
    d = delta0
    for _ in range(4):
        pl, _unused_lo = prop_layer(y, dy, blo, d, z)
        ph, _unused_hi = prop_layer(y, dy, bhi, d, z)
        lo_ok = (pl * pl).imag <= 0.0
        hi_ok = (ph * ph).imag > 0.0
        if lo_ok and not hi_ok:
            return CHOICE_LOWER, True
        if hi_ok and not lo_ok:
            return CHOICE_UPPER, True
        d = d * 0.1
    return CHOICE_LOWER, False


def bb_solve(xs, los, his, z, y0, dy0, samples, xtol, delta0,
             rec_x, rec_kind, rec_choice, rec_y, rec_dy):
    """March the sign-switching field across all constraint pieces.

    xs is the common constraint grid (n+1 edges), los/his the per-piece
    constraint values.  One record is appended per region at its left
    boundary: position, boundary kind (constraint edge or sign switch),
    the coefficient choice on the region, and the state there.  Pieces
    with los == his are forced and marked as such.

    Events are zeros of Im y^2 where the branch choice flips.  They are
    bracketed by marching with step (remaining piece width) / samples and
    then bisected down to xtol.  A crossing whose follow-up probe keeps
    the current branch (a grazing touch) is passed through silently.

    Returns (status, n_records, y_end, dy_end, x_of_failure).
    """
    cap = rec_x.shape[0]
    nrec = 0
    y = y0
    dy = dy0
    n_pieces = los.shape[0]
    stall_run = 0
    end_guard = 1e-7 * (xs[n_pieces] - xs[0])
    for k in range(n_pieces):
        x0 = xs[k]
        x1 = xs[k + 1]
        blo = los[k]
        bhi = his[k]
        if blo == bhi:
            if nrec >= cap:
                return BB_OVERFLOW, nrec, y, dy, x0
            rec_x[nrec] = x0
            rec_kind[nrec] = KIND_CONSTRAINT
            rec_choice[nrec] = CHOICE_FORCED
            rec_y[nrec] = y
            rec_dy[nrec] = dy
            nrec += 1
            y, dy = prop_layer(y, dy, blo, x1 - x0, z)
            continue
        x = x0
        g0 = (y * y).imag
        if g0 > 0.0:
            cur = CHOICE_UPPER
        elif g0 < 0.0:
            cur = CHOICE_LOWER
        else:
            cur, ok = probe_choice(y, dy, z, blo, bhi, delta0)
            if not ok:
                return BB_AMBIGUOUS, nrec, y, dy, x
        if nrec >= cap:
            return BB_OVERFLOW, nrec, y, dy, x
        rec_x[nrec] = x
        rec_kind[nrec] = KIND_CONSTRAINT
        rec_choice[nrec] = cur
        rec_y[nrec] = y
        rec_dy[nrec] = dy
        nrec += 1
        while True:
            wmax = x1 - x
            if wmax <= xtol:
                b = bhi if cur == CHOICE_UPPER else blo
                y, dy = prop_layer(y, dy, b, wmax, z)
                x = x1
                break
            b = bhi if cur == CHOICE_UPPER else blo
            h = wmax / samples
            tau_lo = 0.0
            tau_hi = 0.0
            found = False
            for j in range(1, samples + 1):
                tau = wmax if j == samples else h * j
                yj, dyj = prop_layer(y, dy, b, tau, z)
                gj = (yj * yj).imag
                if (cur == CHOICE_UPPER and gj <= 0.0) or (
                    cur == CHOICE_LOWER and gj > 0.0
                ):
                    found = True
                    tau_hi = tau
                    break
                tau_lo = tau
            if not found:
                y, dy = prop_layer(y, dy, b, wmax, z)
                x = x1
                break
            while tau_hi - tau_lo > xtol:
                tm = 0.5 * (tau_lo + tau_hi)
                ym, dym = prop_layer(y, dy, b, tm, z)
                gm = (ym * ym).imag
                if (cur == CHOICE_UPPER and gm <= 0.0) or (
                    cur == CHOICE_LOWER and gm > 0.0
                ):
                    tau_hi = tm
                else:
                    tau_lo = tm
            tau_ev = 0.5 * (tau_lo + tau_hi)
            if tau_ev < xtol:
                tau_ev = xtol
            if wmax - tau_ev <= end_guard:
                # A zero of Im y^2 grazing the right edge of the piece
                # cannot flip the branch on more than a negligible
                # sliver; finish the piece on the current branch.  The
                # probe is blind past the edge, and at the domain end
                # (where the boundary condition pins y^2 toward the real
                # axis near eigenvalues) probing there either refuses or
                # treadmills through micro-events in roundoff noise.
                y, dy = prop_layer(y, dy, b, wmax, z)
                x = x1
                break
            if tau_ev <= 16.0 * xtol:
                stall_run += 1
                if stall_run > 64:
                    return BB_STALLED, nrec, y, dy, x
            else:
                stall_run = 0
            y, dy = prop_layer(y, dy, b, tau_ev, z)
            x = x + tau_ev
            nxt, ok = probe_choice(y, dy, z, blo, bhi, delta0)
            if not ok:
                return BB_AMBIGUOUS, nrec, y, dy, x
            if nxt != cur:
                cur = nxt
                if nrec >= cap:
                    return BB_OVERFLOW, nrec, y, dy, x
                rec_x[nrec] = x
                rec_kind[nrec] = KIND_SWITCH
                rec_choice[nrec] = cur
                rec_y[nrec] = y
                rec_dy[nrec] = dy
                nrec += 1
    return BB_OK, nrec, y, dy, xs[n_pieces]


def bb_final(xs, los, his, z, nu1, xi, samples, xtol, delta0, cap):
    """Record-free wrapper: final Cauchy data of the phase-xi field.

    Returns (status, y, dy).
    """
    rec_x = np.empty(cap, np.float64)
    rec_kind = np.empty(cap, np.int64)
    rec_choice = np.empty(cap, np.int64)
    rec_y = np.empty(cap, np.complex128)
    rec_dy = np.empty(cap, np.complex128)
    y0 = cmath.exp(1j * xi)
    dy0 = -1j * z * nu1 * y0
    status, _n, y, dy, _fx = bb_solve(
        xs, los, his, z, y0, dy0, samples, xtol, delta0,
        rec_x, rec_kind, rec_choice, rec_y, rec_dy,
    )
    return status, y, dy


def bb_stat_over_xi(xs, los, his, z, nu1, inv_nu2, n_xi, samples, xtol,
                    delta0, cap, want_max):
    """Characteristic-value statistic over the phase grid at one z.

    The grid is xi_n = n pi / n_xi for n = 1..n_xi.  Returns
    (stat_value, best_xi, best_abs, n_failed) where best_xi minimizes
    |F| regardless of the statistic requested (it is the seed handed to
    refinement).  Failed phase points are skipped and counted.
    """
    best_abs = math.inf
    best_xi = 0.0
    worst_abs = -math.inf
    n_fail = 0
    n_good = 0
    for n in range(1, n_xi + 1):
        xi = math.pi * n / n_xi
        status, y, dy = bb_final(xs, los, his, z, nu1, xi, samples, xtol,
                                 delta0, cap)
        if status != BB_OK:
            n_fail += 1
            continue
        f = y + 1j * dy * inv_nu2 / z
        af = abs(f)
        n_good += 1
        if af < best_abs:
            best_abs = af
            best_xi = xi
        if af > worst_abs:
            worst_abs = af
    if n_good == 0:
        return math.nan, math.nan, math.nan, n_fail
    if want_max:
        return worst_abs, best_xi, best_abs, n_fail
    return best_abs, best_xi, best_abs, n_fail


def _apply_jit():
    try:
        from numba import njit
    except ImportError:
        return False
    jit = njit(cache=True, nogil=True)
    global c_sinc, c_omsinc, c_cms, prop_layer, prop_layer_with_dz
    global layer_theta2_integral, probe_choice, bb_solve, bb_final
    global bb_stat_over_xi
    c_sinc = jit(c_sinc)
    c_omsinc = jit(c_omsinc)
    c_cms = jit(c_cms)
    prop_layer = jit(prop_layer)
    prop_layer_with_dz = jit(prop_layer_with_dz)
    layer_theta2_integral = jit(layer_theta2_integral)
    probe_choice = jit(probe_choice)
    bb_solve = jit(bb_solve)
    bb_final = jit(bb_final)
    bb_stat_over_xi = jit(bb_stat_over_xi)
    return True


JITTED = _apply_jit()
