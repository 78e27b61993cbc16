"""Structure derivatives of the characteristic value and first-order
resonance motion predictions."""

import math
import random

import numpy as np
import pytest

from cavity_qopt import (
    BoundaryParams,
    Direction,
    Interval,
    Rect,
    ResonatorConfig,
    StepFunction,
    char_F,
    dF_dB,
    dF_dz,
    find_resonances,
    hausdorff,
    homogeneous_spectrum,
    perturbation_sweep,
    perturbed_profile,
    splitting_K,
)


@pytest.fixture(scope="module")
def band110(band_cfg):
    B = StepFunction((-1.0, 0.0), (110.0,))
    w0 = homogeneous_spectrum(110.0, band_cfg, (0, 0))[0].omega
    return B, w0


def _random_profile(rng, iv, n_max=10, vmax=150.0, vmin=0.0):
    n = rng.randint(1, n_max)
    cuts = sorted(rng.sample(range(1, 64), n - 1)) if n > 1 else []
    width = iv.a2 - iv.a1
    bp = tuple([iv.a1] + [iv.a1 + width * c / 64.0 for c in cuts] + [iv.a2])
    return bp, tuple(rng.uniform(vmin, vmax) for _ in range(n))


# ------------------------------------------------------------- directions

def test_direction_indicator_and_difference():
    iv = Interval(-1.0, 0.0)
    d = Direction.indicator(iv, -0.75, -0.25, 2.0)
    assert d(-0.5) == 2.0 and d(-0.9) == 0.0 and d(-0.1) == 0.0
    f = StepFunction((-1.0, 0.0), (110.0,))
    g = StepFunction((-1.0, -0.5, 0.0), (90.0, 100.0))
    v = Direction.from_difference(f, g)
    assert v(-0.75) == 20.0 and v(-0.25) == 10.0


def test_perturbed_profile_shifts_values():
    B = StepFunction((-1.0, 0.0), (110.0,))
    V = Direction.indicator(Interval(-1.0, 0.0), -1.0, -0.5, -20.0)
    Bp = perturbed_profile(B, V, 0.5)
    assert Bp(-0.75) == 100.0
    assert Bp(-0.25) == 110.0


# ---------------------------------------------------------- dF/dB algebra

def test_dF_dB_zero_direction(band_cfg, band110):
    B, w0 = band110
    V = Direction.indicator(Interval(-1.0, 0.0), -1.0, 0.0, 0.0)
    assert dF_dB(B, w0, V, band_cfg) == 0.0


def test_dF_dB_linear_in_direction(band_cfg, band110):
    B, w0 = band110
    iv = Interval(-1.0, 0.0)
    v1 = Direction.indicator(iv, -1.0, -0.5, -20.0)
    v2 = Direction.indicator(iv, -0.5, 0.0, 13.0)
    both = Direction.from_difference(
        perturbed_profile(B, v1, 1.0), B)
    d1 = dF_dB(B, w0, v1, band_cfg)
    d2 = dF_dB(B, w0, v2, band_cfg)
    d_both = dF_dB(B, w0, Direction(
        (-1.0, -0.5, 0.0), (-20.0, 13.0)), band_cfg)
    assert abs(d_both - (d1 + d2)) < 1e-10 * max(1.0, abs(d1) + abs(d2))
    assert dF_dB(B, w0, both, band_cfg) == pytest.approx(d1, rel=1e-12)
    for c in (-3.0, 0.25, 7.0):
        scaled = Direction(v1.breakpoints, tuple(c * x for x in v1.values))
        assert dF_dB(B, w0, scaled, band_cfg) == pytest.approx(
            c * d1, rel=1e-12)


def test_dF_dB_matches_finite_difference(band_cfg, band110):
    B, w0 = band110
    V = Direction.indicator(Interval(-1.0, 0.0), -1.0, -0.5, -20.0)
    d = dF_dB(B, w0, V, band_cfg)
    zeta = 1e-7
    fd = (char_F(perturbed_profile(B, V, zeta), w0, band_cfg)
          - char_F(B, w0, band_cfg)) / zeta
    assert abs(d - fd) < 1e-4 * max(1.0, abs(d))


def test_dF_dB_backends_agree_on_random_layered_profiles():
    rng = random.Random(29)
    iv = Interval(-1.0, 0.0)
    cfg = ResonatorConfig(iv, BoundaryParams(1.0, math.inf))
    checked = 0
    while checked < 8:
        bp, vals = _random_profile(rng, iv, n_max=10, vmax=150.0, vmin=20.0)
        B = StepFunction(bp, vals)
        spread = max(vals)
        rect = Rect(0.2, 1.2, -0.35, -1e-4)
        h = (4e-3, 2e-3)
        roots = find_resonances(B, cfg, rect, h)
        if not roots:
            continue
        w = roots[0].omega
        vbp, vvals = _random_profile(rng, iv, n_max=10, vmax=30.0, vmin=-30.0)
        V = Direction(vbp, vvals)
        closed = dF_dB(B, w, V, cfg, backend="closed_form")
        quad = dF_dB(B, w, V, cfg, backend="quadrature")
        assert abs(closed - quad) <= 1e-9 * max(1.0, abs(closed))
        checked += 1


# ------------------------------------------------------------- splitting K

def test_splitting_zero_direction_keeps_mode(band_cfg, band110):
    B, w0 = band110
    V = Direction.indicator(Interval(-1.0, 0.0), -1.0, 0.0, 0.0)
    pred = splitting_K(B, w0, V, band_cfg)
    assert pred.K == 0.0
    assert pred.multiplicity == 1
    assert pred.branches(1e-3) == (w0,)


def test_splitting_first_order_prediction_matches_recomputation(band_cfg,
                                                                band110):
    B, w0 = band110
    V = Direction.indicator(Interval(-1.0, 0.0), -0.5, 0.0, 20.0)
    pred = splitting_K(B, w0, V, band_cfg)
    zeta = 1e-4
    predicted = pred.branches(zeta)[0]
    Bp = perturbed_profile(B, V, zeta)
    r = 10.0 * abs(pred.K) * zeta + 1e-6
    rect = Rect(w0.real - r, w0.real + r, w0.imag - r, w0.imag + r)
    got = find_resonances(Bp, band_cfg, rect, (r / 12.0, r / 12.0))
    assert len(got) == 1
    assert abs(got[0].omega - predicted) < 1e-6


def test_splitting_mirror_symmetry(band_cfg, band110):
    """The prediction transported to the mirrored mode -conj(omega)
    agrees with the mirror of the prediction."""
    B, w0 = band110
    V = Direction.indicator(Interval(-1.0, 0.0), -0.7, -0.2, 15.0)
    zeta = 1e-4
    pred = splitting_K(B, w0, V, band_cfg)
    pred_m = splitting_K(B, -w0.conjugate(), V, band_cfg)
    a = pred.branches(zeta)[0]
    b = pred_m.branches(zeta)[0]
    assert abs(b - (-a.conjugate())) < 1e-10 * max(1.0, abs(a))


# ------------------------------------------------------------------ sweep

def test_sweep_remainder_is_second_order(band_cfg, band110):
    B, w0 = band110
    V = Direction.indicator(Interval(-1.0, 0.0), -1.0, -0.5, -20.0)
    zetas = [10.0 ** e for e in np.linspace(-5.0, -2.0, 10)]
    rows = perturbation_sweep(B, w0, V, zetas, band_cfg)
    errs = np.array([row.error for row in rows])
    zs = np.array([row.zeta for row in rows])
    assert np.all(errs > 0.0)
    slope = np.polyfit(np.log(zs), np.log(errs), 1)[0]
    assert 1.8 <= slope <= 2.2


def test_sweep_rows_follow_input_order(band_cfg, band110):
    B, w0 = band110
    V = Direction.indicator(Interval(-1.0, 0.0), -0.5, 0.0, 20.0)
    rows = perturbation_sweep(B, w0, V, [1e-3, 1e-5, 1e-4], band_cfg)
    assert [r.zeta for r in rows] == [1e-3, 1e-5, 1e-4]
    for row in rows:
        assert row.error == pytest.approx(
            hausdorff(row.predicted, row.recomputed), rel=1e-12)
        assert len(row.recomputed) >= 1
        assert all(abs(w - w0) < 1.0 for w in row.recomputed)


# -------------------------------------------------------------- hausdorff

def test_hausdorff_basic_properties():
    a = [0.0 + 0.0j, 1.0 + 0.0j]
    b = [0.0 + 0.5j, 1.0 + 0.0j]
    assert hausdorff(a, a) == 0.0
    assert hausdorff(a, b) == hausdorff(b, a)
    assert hausdorff(a, b) == pytest.approx(0.5)
