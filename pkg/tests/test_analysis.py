"""Analysis layer: regime classification, boundary fits, the integral
identity, uniqueness diagnostics, and the positivity audit."""

import math
from fractions import Fraction

import numpy as np
import pytest

import oracles
from fraclane import (
    ConfigurationError,
    Domain,
    ExponentPair,
    boundary_exponent_fit,
    boundary_quotient,
    build_grid,
    classify,
    maximum_principle_audit,
    operator_invariants,
    rellich_residual,
    uniqueness_gap,
)

# ---------------------------------------------------------------------------
# classification


def test_classify_reference_cases():
    half = Fraction(1, 2)
    assert classify(ExponentPair(1, 1), 1, half) == "resonant"
    assert classify(ExponentPair(2, 2), 3, half) == "critical"
    assert classify(ExponentPair(5, 5), 1, half) == "superlinear_subcritical"
    assert classify(ExponentPair(half, half), 1, half) == "sublinear"
    assert classify(ExponentPair(10, 10), 3, half) == "supercritical"


def test_classify_agrees_with_exponent_pair_method():
    for p in (0.25, 1.0, 2.5, 6.0):
        for q in (0.25, 1.0, 2.5, 6.0):
            pair = ExponentPair(p, q)
            assert classify(pair, 2, 0.5) == pair.regime(2, 0.5)


def test_classification_sign_consistency_small_sweep():
    half = Fraction(1, 2)
    for i in range(1, 7):
        for j in range(1, 7):
            pair = ExponentPair(Fraction(i, 2), Fraction(j, 2))
            if pair.pq <= 1:
                continue
            gap = pair.hyperbole_gap(3, half)
            factor = pair.rhs_factor(3, half)
            label = classify(pair, 3, half)
            assert factor == 3 * gap
            if gap > 0:
                assert label == "superlinear_subcritical" and factor > 0
            elif gap == 0:
                assert label == "critical" and factor == 0
            else:
                assert label == "supercritical" and factor < 0


# ---------------------------------------------------------------------------
# boundary quotient fits


def test_quotient_on_exact_power_profile_is_one():
    grid = build_grid(Domain.interval(-1.0, 1.0), 128)
    for s in (0.3, 0.5, 0.7):
        fit = boundary_quotient(grid.d ** s, grid, s)
        assert fit.n_failures == 0
        assert fit.aggregate == pytest.approx(1.0, abs=1e-10)


def test_quotient_on_interval_torsion_profile():
    sqrt2 = oracles.FROZEN["interval_torsion_edge_quotient"]
    errors = {}
    for res in (64, 128, 256):
        grid = build_grid(Domain.interval(-1.0, 1.0), res)
        x = grid.x[:, 0]
        prof = np.maximum(1.0 - x * x, 0.0) ** 0.5
        fit = boundary_quotient(prof, grid, 0.5)
        assert fit.n_failures == 0
        errors[res] = abs(fit.aggregate - sqrt2) / sqrt2
    assert errors[128] <= 0.01
    assert errors[64] > errors[128] > errors[256]


def test_quotient_on_disk_torsion_profile():
    # (1-r^2)^s / (1-r)^s approaches 2^s at the rim: sqrt(2) for s = 1/2
    sqrt2 = oracles.FROZEN["interval_torsion_edge_quotient"]
    errors = {}
    for res in (32, 64):
        grid = build_grid(Domain.disk(1.0), res)
        prof = np.maximum(1.0 - np.sum(grid.x ** 2, axis=1), 0.0) ** 0.5
        fit = boundary_quotient(prof, grid, 0.5)
        assert fit.n_failures == 0
        errors[res] = abs(fit.aggregate - sqrt2) / sqrt2
    assert errors[32] <= 0.05
    assert errors[64] <= 0.02
    assert errors[64] < errors[32]


def test_quotient_on_rectangle_away_from_corners():
    grid = build_grid(Domain.rectangle(2.0, 1.0), 32)
    fit = boundary_quotient(grid.d ** 0.5, grid, 0.5)
    assert fit.trace.corners_dropped
    pts = fit.trace.points
    on_x_edges = np.abs(np.abs(pts[:, 0]) - 1.0) < 1e-12
    mid_edge = np.where(on_x_edges, np.abs(pts[:, 1]) <= 0.25,
                        np.abs(pts[:, 0]) <= 0.5)
    sel = mid_edge & fit.ok
    assert sel.sum() >= 32
    assert np.mean(fit.values[sel]) == pytest.approx(1.0, abs=0.04)


def test_quotient_flags_unusable_boundary_data():
    grid = build_grid(Domain.interval(-1.0, 1.0), 64)
    indicator = (grid.d > 0.5).astype(float)  # vanishes near the boundary
    fit = boundary_quotient(indicator, grid, 0.5)
    assert fit.n_failures == len(fit.ok)
    assert math.isnan(fit.aggregate)


# ---------------------------------------------------------------------------
# boundary exponent fits


def test_exponent_fit_recovers_pure_powers():
    grid = build_grid(Domain.interval(-1.0, 1.0), 128)
    assert boundary_exponent_fit(grid.d, grid).aggregate == pytest.approx(1.0, abs=1e-8)
    assert boundary_exponent_fit(grid.d ** 0.3, grid).aggregate == pytest.approx(0.3, abs=1e-8)
    assert boundary_exponent_fit(grid.d ** 0.7, grid).aggregate == pytest.approx(0.7, abs=1e-8)


def test_exponent_fit_on_torsion_profile_tightens_with_resolution():
    errs = {}
    for res in (128, 512):
        grid = build_grid(Domain.interval(-1.0, 1.0), res)
        x = grid.x[:, 0]
        prof = np.maximum(1.0 - x * x, 0.0) ** 0.5
        errs[res] = abs(boundary_exponent_fit(prof, grid).aggregate - 0.5)
    assert errs[128] <= 0.05
    assert errs[512] <= 0.02
    assert errs[512] < errs[128]


# ---------------------------------------------------------------------------
# integral identity


def test_rellich_identity_on_computed_superlinear_pair(superlinear_pair_128, grid128):
    rep = rellich_residual(superlinear_pair_128, ExponentPair(3.0, 3.0), grid128, 0.5)
    assert rep.rhs_factor == pytest.approx(0.5)  # 1/4 + 1/4 - 0
    assert rep.lhs > 0
    assert rep.star_shaped
    assert rep.cross_gap <= 1e-12
    assert rep.residual <= 0.05
    assert rep.boundary_fit_failures == 0


def test_rellich_identity_on_computed_sublinear_pair(sublinear_pair_128, grid128):
    rep = rellich_residual(sublinear_pair_128, ExponentPair(0.5, 0.5), grid128, 0.5)
    assert rep.rhs_factor == pytest.approx(4.0 / 3.0)
    assert rep.lhs > 0
    assert rep.cross_gap <= 1e-12
    assert rep.residual <= 0.15


def test_rellich_rhs_vanishes_exactly_on_critical_pairs(disk_grid32):
    # n=2, s=1/2, p=q=3 sits exactly on the critical curve
    prof = np.maximum(1.0 - np.sum(disk_grid32.x ** 2, axis=1), 0.0) ** 0.5

    class Pair:
        u = prof
        v = prof

    rep = rellich_residual(Pair(), ExponentPair(3, 3), disk_grid32, Fraction(1, 2))
    assert rep.rhs_factor == 0.0
    assert rep.rhs == 0.0
    assert rep.lhs > 0  # the obstruction: positive against a zero right side


# ---------------------------------------------------------------------------
# uniqueness diagnostics


def test_uniqueness_gap_identical_pairs(sublinear_pair_128):
    rep = uniqueness_gap(sublinear_pair_128, sublinear_pair_128)
    assert rep.gap_u == 0.0 and rep.gap_v == 0.0
    assert rep.s_hat == 1.0


def test_uniqueness_gap_scaling(sublinear_pair_128):
    class Half:
        u = 0.5 * sublinear_pair_128.u
        v = 0.5 * sublinear_pair_128.v

    rep = uniqueness_gap(Half(), sublinear_pair_128)
    assert rep.s_hat == pytest.approx(0.5, rel=1e-12)


def test_uniqueness_gap_symmetric_product(sublinear_pair_128, superlinear_pair_128):
    fwd = uniqueness_gap(sublinear_pair_128, superlinear_pair_128)
    bwd = uniqueness_gap(superlinear_pair_128, sublinear_pair_128)
    assert fwd.s_hat * bwd.s_hat <= 1.0 + 1e-12


def test_uniqueness_gap_requires_positive_comparison(sublinear_pair_128, grid128):
    class Zero:
        u = np.zeros(grid128.n_nodes)
        v = np.zeros(grid128.n_nodes)

    with pytest.raises(ConfigurationError):
        uniqueness_gap(sublinear_pair_128, Zero())


# ---------------------------------------------------------------------------
# positivity audit and structural invariants


def test_audit_passes_on_interval(op128):
    rep = maximum_principle_audit(op128, trials=100, seed=0)
    assert rep.all_passed
    assert rep.passes == rep.trials == 100
    assert rep.witnesses == []
    assert rep.inverse_nonnegative is None  # too large for the default check


def test_audit_checks_inverse_on_small_operators(op64):
    rep = maximum_principle_audit(op64, trials=25, seed=1)
    assert rep.all_passed
    assert rep.inverse_nonnegative is True
    forced_off = maximum_principle_audit(op64, trials=5, seed=1, check_inverse=False)
    assert forced_off.inverse_nonnegative is None


def test_audit_passes_on_disk(disk_op32):
    rep = maximum_principle_audit(disk_op32, trials=25, seed=2)
    assert rep.all_passed


def test_operator_invariants_all_hold(op128, disk_op32):
    for op in (op128, disk_op32):
        flags = operator_invariants(op)
        assert flags == {
            "symmetric": True,
            "diagonal_positive": True,
            "offdiagonal_nonpositive": True,
            "row_sums_positive": True,
            "zero_maps_to_zero": True,
        }
