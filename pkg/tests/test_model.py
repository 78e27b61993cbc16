"""Value types: intervals, boundary data, step functions, families."""

import dataclasses
import math
import random

import pytest

from cavity_qopt import (
    AdmissibleFamily,
    BoundaryParams,
    ConstraintOrderViolation,
    EmptyConstraintGap,
    Interval,
    MismatchedInterval,
    ResonatorConfig,
    StepFunction,
    WaveState,
    check_constraint_order,
    merge_equal_pieces,
    refine_breakpoints,
    validate_family,
)


# ---------------------------------------------------------------- interval

def test_interval_orders_endpoints():
    iv = Interval(-1.0, 0.0)
    assert iv.a1 == -1.0 and iv.a2 == 0.0


@pytest.mark.parametrize("a1,a2", [(0.0, 0.0), (1.0, -1.0),
                                   (math.inf, 0.0), (0.0, math.nan)])
def test_interval_rejects_degenerate(a1, a2):
    with pytest.raises(ValueError):
        Interval(a1, a2)


def test_interval_is_immutable():
    iv = Interval(0.0, 1.0)
    with pytest.raises(dataclasses.FrozenInstanceError):
        iv.a1 = 2.0


# ---------------------------------------------------------- boundary params

def test_boundary_params_accepts_infinite_right():
    bc = BoundaryParams(1.0, math.inf)
    assert math.isinf(bc.nu2)


def test_boundary_params_accepts_zero_left_with_finite_right():
    BoundaryParams(0.0, 2.0)


@pytest.mark.parametrize("nu1,nu2", [
    (-1.0, 1.0),          # negative left parameter
    (1.0, 0.0),           # right parameter must be positive
    (1.0, -2.0),
    (2.0, 1.0),           # ordering nu1 <= nu2
    (0.0, math.inf),      # nu1 + 1/nu2 = 0: no damping at all
])
def test_boundary_params_rejects(nu1, nu2):
    with pytest.raises(ValueError):
        BoundaryParams(nu1, nu2)


def test_resonator_config_derived_quantities():
    cfg = ResonatorConfig(Interval(-1.0, 0.0), BoundaryParams(1.0, math.inf))
    assert cfg.a1 == -1.0 and cfg.a2 == 0.0
    assert cfg.length == 1.0
    assert cfg.nu1 == 1.0
    assert cfg.inv_nu2 == 0.0
    cfg2 = ResonatorConfig(Interval(0.0, 2.0), BoundaryParams(0.5, 4.0))
    assert cfg2.inv_nu2 == 0.25


# ------------------------------------------------------------ step function

def test_step_function_basic():
    f = StepFunction((-1.0, -0.5, 0.0), (90.0, 110.0))
    assert f(-0.75) == 90.0
    assert f(-0.25) == 110.0
    assert f.n_pieces == 2
    assert f.widths() == (0.5, 0.5)
    assert f.min_value == 90.0 and f.max_value == 110.0


def test_step_function_rejects_bad_breakpoints():
    with pytest.raises(ValueError):
        StepFunction((0.0, 0.0, 1.0), (1.0, 2.0))       # zero-width piece
    with pytest.raises(ValueError):
        StepFunction((0.0, 0.6, 0.5, 1.0), (1.0, 2.0, 3.0))  # not increasing
    with pytest.raises(ValueError):
        StepFunction((0.0, 1.0), (1.0, 2.0))            # length mismatch
    with pytest.raises(ValueError):
        StepFunction((0.0, 1.0), (-1.0,))               # negative value


def test_step_function_constant_helper():
    f = StepFunction.constant(Interval(0.0, 1.0), 7.0)
    assert f.is_constant and f(0.5) == 7.0


def test_merge_equal_pieces_normalizes():
    f = StepFunction((0.0, 0.3, 0.7, 1.0), (2.0, 2.0, 5.0))
    g = merge_equal_pieces(f)
    assert g.breakpoints == (0.0, 0.7, 1.0)
    assert g.values == (2.0, 5.0)
    # idempotent
    assert merge_equal_pieces(g) == g


# ------------------------------------------------------ breakpoint refining

def test_refine_breakpoints_merges_grids():
    f = StepFunction((-1.0, 0.0), (3.0,))
    g = StepFunction((-1.0, -0.5, 0.0), (1.0, 2.0))
    f2, g2 = refine_breakpoints(f, g)
    assert f2.breakpoints == g2.breakpoints == (-1.0, -0.5, 0.0)
    assert f2.values == (3.0, 3.0)
    assert g2.values == (1.0, 2.0)


def test_refine_breakpoints_requires_common_interval():
    f = StepFunction((-1.0, 0.0), (3.0,))
    g = StepFunction((0.0, 1.0), (3.0,))
    with pytest.raises(MismatchedInterval):
        refine_breakpoints(f, g)


def test_refine_breakpoints_random_property():
    """Idempotent, commutative, and value-preserving at sample points."""
    rng = random.Random(20240817)
    for _ in range(50):
        n1 = rng.randint(1, 6)
        n2 = rng.randint(1, 6)
        cuts1 = sorted(rng.sample(range(1, 40), n1 - 1)) if n1 > 1 else []
        cuts2 = sorted(rng.sample(range(1, 40), n2 - 1)) if n2 > 1 else []
        bp1 = tuple([0.0] + [c / 40.0 for c in cuts1] + [1.0])
        bp2 = tuple([0.0] + [c / 40.0 for c in cuts2] + [1.0])
        f = StepFunction(bp1, tuple(rng.uniform(0.0, 5.0) for _ in range(n1)))
        g = StepFunction(bp2, tuple(rng.uniform(0.0, 5.0) for _ in range(n2)))
        f2, g2 = refine_breakpoints(f, g)
        assert f2.breakpoints == g2.breakpoints
        f3, g3 = refine_breakpoints(f2, g2)
        assert f3 == f2 and g3 == g2          # idempotent
        gb, fb = refine_breakpoints(g, f)      # commutative up to values
        assert fb.breakpoints == f2.breakpoints
        for _ in range(20):
            x = rng.uniform(0.0, 1.0)
            assert f2(x) == f(x)
            assert g2(x) == g(x)


# ------------------------------------------------------- admissible family

def test_validate_family_accepts_band(band_family):
    assert band_family.bangbang_ready
    assert band_family.b1.values == (90.0,)
    assert band_family.b2.values == (110.0,)


def test_validate_family_rejects_wrong_order():
    b1 = StepFunction((0.0, 1.0), (5.0,))
    b2 = StepFunction((0.0, 1.0), (2.0,))
    with pytest.raises(ConstraintOrderViolation):
        validate_family(AdmissibleFamily(b1, b2))


def test_validate_family_rejects_equal_constraints():
    b = StepFunction((0.0, 1.0), (2.0,))
    with pytest.raises(EmptyConstraintGap):
        validate_family(AdmissibleFamily(b, b))


def test_validate_family_flags_vanishing_lower_bound():
    b1 = StepFunction((0.0, 1.0), (0.0,))
    b2 = StepFunction((0.0, 1.0), (1.0,))
    fam = validate_family(AdmissibleFamily(b1, b2))
    assert not fam.bangbang_ready


def test_validate_family_partial_gap_keeps_ready():
    """Equal pieces outside the gap set do not matter for readiness."""
    b1 = StepFunction((0.0, 0.5, 1.0), (2.0, 3.0))
    b2 = StepFunction((0.0, 0.5, 1.0), (4.0, 3.0))
    fam = validate_family(AdmissibleFamily(b1, b2))
    assert fam.bangbang_ready
    gaps = [p for p in fam.gap_pieces()]
    assert len(gaps) == 1 and gaps[0][0] == 0.0 and gaps[0][1] == 0.5


def test_family_contains_membership(band_family):
    inside = StepFunction((-1.0, -0.4, 0.0), (110.0, 90.0))
    outside = StepFunction((-1.0, 0.0), (120.0,))
    assert band_family.contains(inside)
    assert not band_family.contains(outside)


def test_check_constraint_order_passthrough(band_family):
    assert check_constraint_order(band_family) is band_family


# --------------------------------------------------------------- wave state

def test_wave_state_holds_complex_data():
    s = WaveState(0.0, 1 + 0j, -2j)
    assert s.x == 0.0 and s.y == 1 and s.dy == -2j
    with pytest.raises(dataclasses.FrozenInstanceError):
        s.y = 0.0
