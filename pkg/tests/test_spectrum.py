import math

import numpy as np
import pytest

from thermock.ckalgebra import AlgebraElement, check_suite, state_eval
from thermock.errors import ConfigError
from thermock.spectrum import (asymptotic_variance, bowen_root,
                               endpoint_estimates, normalized_potential,
                               s_of_q, spectrum_point, spectrum_sweep,
                               sweep_rows, topological_entropy)
from thermock.symbolic import IncidenceSystem, admissible_words
from thermock.transfer import (CylinderMeasure, LocallyConstantFunction,
                               integrate)

FULL2 = IncidenceSystem.full_shift(2)
LOG2, LOG3, LOG4 = math.log(2.0), math.log(3.0), math.log(4.0)
J_CANTOR = LocallyConstantFunction.constant(FULL2, LOG3)
J_TWO = LocallyConstantFunction.from_letter_values(FULL2, [LOG2, LOG4])

# the positive root of y^2 + y = 1 with y = 2^{-s}
TWO_RATIO_ROOT = -math.log((math.sqrt(5.0) - 1.0) / 2.0) / LOG2


def test_bowen_root_cantor():
    assert bowen_root(FULL2, J_CANTOR) == pytest.approx(LOG2 / LOG3, abs=1e-10)


def test_bowen_root_two_ratio_quadratic():
    assert bowen_root(FULL2, J_TWO) == pytest.approx(TWO_RATIO_ROOT, abs=1e-10)


def test_bowen_root_constant_potential_any_shift():
    for n, c in ((3, 0.7), (4, 2.0)):
        sysn = IncidenceSystem.full_shift(n)
        J = LocallyConstantFunction.constant(sysn, c)
        assert bowen_root(sysn, J) == pytest.approx(math.log(n) / c, abs=1e-10)


def test_bowen_root_rejects_nonpositive():
    J = LocallyConstantFunction.from_letter_values(FULL2, [0.0, 1.0])
    with pytest.raises(ConfigError):
        bowen_root(FULL2, J)


def test_s_of_q_boundary_identities():
    assert s_of_q(FULL2, J_TWO, 0.0) == pytest.approx(TWO_RATIO_ROOT, abs=1e-10)
    assert s_of_q(FULL2, J_TWO, 1.0) == pytest.approx(0.0, abs=1e-10)
    assert s_of_q(FULL2, J_CANTOR, 1.0) == pytest.approx(0.0, abs=1e-10)


def test_spectrum_point_at_q1_is_maximal_entropy():
    p = spectrum_point(FULL2, J_TWO, 1.0)
    assert p.s_q == pytest.approx(0.0, abs=1e-10)
    assert p.alpha == pytest.approx(1.5 * LOG2, abs=1e-11)
    assert p.dim == pytest.approx(2.0 / 3.0, abs=1e-10)


def test_spectrum_point_constant_potential_is_flat():
    for q in (-1.0, 0.0, 0.5, 2.0):
        p = spectrum_point(FULL2, J_CANTOR, q)
        assert p.alpha == pytest.approx(LOG3, abs=1e-11)
        assert p.dim == pytest.approx(LOG2 / LOG3, abs=1e-10)


def test_normalized_potential_constant():
    norm = normalized_potential(FULL2, J_CANTOR, 0.77)
    assert norm.chi.max_abs() - norm.chi.min_value() < 1e-12  # chi constant
    assert norm.I_s.isclose(LocallyConstantFunction.constant(FULL2, LOG2), 1e-11)
    assert norm.normalization_defect < 1e-12


def test_normalized_potential_preimage_sums():
    for s in (0.3, TWO_RATIO_ROOT, 1.1):
        norm = normalized_potential(FULL2, J_TWO, s)
        assert norm.normalization_defect < 1e-12


def test_normalized_potential_golden_mean():
    gm = IncidenceSystem.golden_mean()
    norm = normalized_potential(gm, LocallyConstantFunction.constant(gm, LOG2), 0.9)
    assert norm.normalization_defect < 1e-12
    # chi is the log of the Perron eigenfunction: non-constant here
    assert norm.chi.max_value() - norm.chi.min_value() > 1e-3


def test_asymptotic_variance_constant_is_zero():
    half = CylinderMeasure.bernoulli(FULL2, [0.5, 0.5])
    D, decayed = asymptotic_variance(FULL2, LocallyConstantFunction.constant(FULL2, 5.0), half)
    assert D == pytest.approx(0.0, abs=1e-14)
    assert decayed


def test_asymptotic_variance_coin_coordinate():
    half = CylinderMeasure.bernoulli(FULL2, [0.5, 0.5])
    f = LocallyConstantFunction.from_letter_values(FULL2, [1.0, -1.0])
    D, decayed = asymptotic_variance(FULL2, f, half)
    assert D == pytest.approx(1.0, abs=1e-12)  # independent increments
    assert decayed


def test_second_derivative_witness_positive():
    # s''(0) = Var(s'(0) J - phi) / integral(J) > 0 certifies strict convexity
    h_top = topological_entropy(FULL2)
    p0 = spectrum_point(FULL2, J_TWO, 0.0)
    s_prime = -h_top / p0.alpha
    f = J_TWO * s_prime - LocallyConstantFunction.constant(FULL2, h_top)
    D, decayed = asymptotic_variance(FULL2, f, p0.measure)
    assert decayed
    assert D / p0.alpha > 1e-4


def test_sweep_two_ratio_grid():
    sweep = spectrum_sweep(FULL2, J_TWO, np.linspace(-0.5, 1.5, 21))
    assert not sweep.degenerate and not sweep.errors
    qs = [p.q for p in sweep.points]
    assert qs == sorted(qs)
    alphas = [p.alpha for p in sweep.points]
    svals = [p.s_q for p in sweep.points]
    # alpha is strictly monotone along the sweep: decreasing in s
    # (equivalently increasing in q, by strict convexity of the pressure)
    assert all(b > a for a, b in zip(alphas, alphas[1:]))
    assert all(b < a for a, b in zip(svals, svals[1:]))
    # dimension peaks at q = 0 and equals the Bowen root there
    dims = [p.dim for p in sweep.points]
    peak = max(dims)
    assert dims.index(peak) == qs.index(0.0)
    assert peak == pytest.approx(bowen_root(FULL2, J_TWO), abs=1e-8)
    # every exponent stays inside the endpoint estimates
    assert all(sweep.alpha_minus < a < sweep.alpha_plus for a in alphas)


def test_sweep_endpoint_estimates():
    am, ap, converged = endpoint_estimates(FULL2, J_TWO)
    assert am == pytest.approx(LOG2, abs=1e-3)
    assert ap == pytest.approx(LOG4, abs=1e-3)
    assert converged


def test_sweep_legendre_consistency_measure_ratio():
    sweep = spectrum_sweep(FULL2, J_TWO, np.linspace(-0.25, 1.25, 7))
    for p in sweep.points:
        J_s = J_TWO * p.s_q + LocallyConstantFunction.constant(FULL2, p.normalized.pressure)
        ratio = integrate(p.measure, J_s) / integrate(p.measure, J_TWO)
        assert p.dim == pytest.approx(ratio, abs=1e-10)
        assert p.dim == pytest.approx(p.s_q + p.q * sweep.h_top / p.alpha, abs=1e-10)


def test_sweep_degenerate_constant_potential():
    sweep = spectrum_sweep(FULL2, J_CANTOR, np.linspace(0.0, 1.0, 5))
    assert sweep.degenerate
    assert len(sweep.points) == 1
    assert sweep.alpha_minus == pytest.approx(sweep.alpha_plus)
    assert sweep.points[0].dim == pytest.approx(LOG2 / LOG3, abs=1e-10)


def test_sweep_schottky_maximal_entropy_self_consistency():
    sch = IncidenceSystem.schottky_matrix(2)
    J = LocallyConstantFunction.constant(sch, LOG3)
    sweep = spectrum_sweep(FULL2, J_TWO, [0.0])
    assert sweep.points[0].dim == pytest.approx(bowen_root(FULL2, J_TWO), abs=1e-8)
    assert bowen_root(sch, J) == pytest.approx(1.0, abs=1e-10)  # P(-J)=0 at s=1


def test_remark_identity_at_root():
    # h_top / beta(0) recomputed from beta(0) = h_top/alpha(0) is alpha(0);
    # alpha is defined as the integral, so that side is the identical float
    p0 = spectrum_point(FULL2, J_TWO, 0.0)
    h_top = topological_entropy(FULL2)
    beta0 = h_top / p0.alpha
    assert math.isclose(h_top / beta0, p0.alpha, rel_tol=1e-15)
    assert integrate(p0.measure, J_TWO) == p0.alpha


def test_state_linkage_sigma_J_equals_alpha():
    sweep = spectrum_sweep(FULL2, J_TWO, np.linspace(-0.5, 1.5, 9))
    for p in sweep.points:
        sigma_J = state_eval(p.measure, AlgebraElement.from_function(J_TWO * (1.0 + 0j)))
        assert abs(sigma_J - p.alpha) < 1e-10


def test_kms_linkage_on_sample_suite():
    p = spectrum_point(FULL2, J_TWO, 0.35)
    rep = check_suite(p.measure, p.normalized.I_s, 1.0, samples=40, seed=5)
    assert rep["kms_condition"] < 1e-9
    assert rep["dual_invariance"] < 1e-9


def test_sweep_rows_schema():
    rows = sweep_rows(spectrum_sweep(FULL2, J_TWO, [0.0, 1.0]))
    assert [r["q"] for r in rows] == [0.0, 1.0]
    assert set(rows[0]) == {"q", "s_q", "alpha", "dim", "pressure_residual", "variance"}
