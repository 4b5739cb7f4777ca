import math
import random

import numpy as np
import pytest

from thermock.errors import ConfigError, ZeroMassError
from thermock.symbolic import IncidenceSystem, admissible_words, word_index
from thermock.transfer import (CylinderMeasure, LocallyConstantFunction,
                               gibbs_measure, integrate, leading_eigen,
                               pressure, rn_derivative, transfer_matrix,
                               weak_gibbs_profile)

FULL2 = IncidenceSystem.full_shift(2)
GOLDEN = IncidenceSystem.golden_mean()
SCHOTTKY2 = IncidenceSystem.schottky_matrix(2)
PHI = (1.0 + math.sqrt(5.0)) / 2.0


def parry_golden():
    """Hand-built golden-mean Parry chain: pi and P from the exact eigendata."""
    pi = (PHI * PHI / (PHI * PHI + 1.0), 1.0 / (PHI * PHI + 1.0))
    P = ((1.0 / PHI, 1.0 / PHI ** 2), (1.0, 0.0))
    return pi, P


def parry_mass(w):
    pi, P = parry_golden()
    m = pi[w[0]]
    for a, b in zip(w, w[1:]):
        m *= P[a][b]
    return m


# ---------------------------------------------------------------------------
# locally constant functions
# ---------------------------------------------------------------------------

def test_function_requires_total_definition():
    with pytest.raises(ConfigError):
        LocallyConstantFunction(GOLDEN, 2, {(0, 0): 1.0, (0, 1): 1.0})


def test_refinement_is_identity_on_semantics():
    f = LocallyConstantFunction.from_letter_values(GOLDEN, [2.0, 3.0])
    g = f.at_depth(4)
    for w in admissible_words(GOLDEN, 4):
        assert g(w) == f(w)
    assert g.compress().depth == 1


def test_birkhoff_sum_matches_direct_windows():
    f = LocallyConstantFunction(FULL2, 2, {w: float(w[0] + 2 * w[1]) for w in admissible_words(FULL2, 2)})
    s3 = f.birkhoff(3)
    assert s3.depth == 4
    for w in admissible_words(FULL2, 4):
        assert s3(w) == pytest.approx(sum(f(w[k:k + 2]) for k in range(3)), abs=1e-14)


def test_compose_branch_pulls_back():
    f = LocallyConstantFunction.indicator(FULL2, (0,))
    g = f.compose_branch((0,))  # 1_{[0]} o tau_0 == 1 on theta[0]
    assert g(w=(0,)) == 1.0 and g(w=(1,)) == 1.0
    h = LocallyConstantFunction.indicator(GOLDEN, (1,)).compose_branch((1,))
    # tau_1 maps theta[1]=[0] to [1]; 1_{[1]}(tau_1 x) = 1 there, 0 off theta[1]
    assert h((0,)) == 1.0 and h((1,)) == 0.0


# ---------------------------------------------------------------------------
# transfer matrices
# ---------------------------------------------------------------------------

def test_transfer_matrix_full_shift_counts_preimages():
    M = transfer_matrix(FULL2, LocallyConstantFunction.constant(FULL2, 0.0), 1).toarray()
    assert np.array_equal(M, np.ones((2, 2)))


def test_transfer_matrix_golden_is_transposed_incidence():
    M = transfer_matrix(GOLDEN, LocallyConstantFunction.constant(GOLDEN, 0.0), 1).toarray()
    assert np.array_equal(M, np.array(GOLDEN.matrix).T)
    assert leading_eigen(M).lam == pytest.approx(PHI, abs=1e-12)


def test_transfer_matrix_bernoulli_rows_are_stochastic():
    f = LocallyConstantFunction.from_letter_values(FULL2, [math.log(0.3), math.log(0.7)])
    M = transfer_matrix(FULL2, f, 1).toarray()
    assert np.allclose(M.sum(axis=1), 1.0)
    assert leading_eigen(M).lam == pytest.approx(1.0, abs=1e-12)


def test_transfer_matrix_rejects_too_shallow_depth():
    f = LocallyConstantFunction.constant(GOLDEN, 0.0, depth=3)
    with pytest.raises(ConfigError):
        transfer_matrix(GOLDEN, f, 1)


def test_transfer_matrix_applies_operator_exactly():
    # (L_f g)(x) = sum over preimages y of e^{f(y)} g(y), checked pointwise
    rng = random.Random(3)
    f = LocallyConstantFunction(GOLDEN, 2, {w: rng.uniform(-1, 1) for w in admissible_words(GOLDEN, 2)})
    D = 2
    M = transfer_matrix(GOLDEN, f, D)
    idx = word_index(GOLDEN, D)
    g = LocallyConstantFunction(GOLDEN, D, {w: rng.uniform(-1, 1) for w in admissible_words(GOLDEN, D)})
    vec = np.array([g.values[w] for w in admissible_words(GOLDEN, D)])
    out = M @ vec
    for v in admissible_words(GOLDEN, 3):  # deep enough to pin the preimages
        direct = 0.0
        for j in range(2):
            if GOLDEN.allows(j, v[0]):
                y = (j,) + v
                direct += math.exp(f(y)) * g(y)
        assert out[idx[v[:D]]] == pytest.approx(direct, rel=1e-12)


# ---------------------------------------------------------------------------
# leading eigendata
# ---------------------------------------------------------------------------

def test_leading_eigen_doubly_stochastic():
    eig = leading_eigen(np.ones((2, 2)))
    assert eig.lam == pytest.approx(2.0, abs=1e-12)
    assert np.allclose(eig.mu, [0.5, 0.5], atol=1e-12)
    assert np.allclose(eig.h, [1.0, 1.0], atol=1e-12)


def test_leading_eigen_handles_period_two():
    eig = leading_eigen(np.array([[0.0, 1.0], [1.0, 0.0]]))
    assert eig.lam == pytest.approx(1.0, abs=1e-12)


def test_leading_eigen_bernoulli_left_vector():
    f = LocallyConstantFunction.from_letter_values(FULL2, [math.log(0.3), math.log(0.7)])
    eig = leading_eigen(transfer_matrix(FULL2, f, 1))
    assert np.allclose(eig.mu, [0.3, 0.7], atol=1e-12)


def test_leading_eigen_rejects_negative():
    with pytest.raises(ConfigError):
        leading_eigen(np.array([[1.0, -0.5], [1.0, 1.0]]))


# ---------------------------------------------------------------------------
# pressure
# ---------------------------------------------------------------------------

def test_pressure_full_shift_counts():
    for n in (2, 3, 5):
        sysn = IncidenceSystem.full_shift(n)
        assert pressure(sysn, LocallyConstantFunction.constant(sysn, 0.0)) == pytest.approx(
            math.log(n), abs=1e-12)


def test_pressure_constant_potential_on_schottky():
    # P(-s phi) = (1 - s) log 3 for the genus-2 incidence structure
    for s in (-2.0, -1.0, 0.0, 0.5, 1.0, 2.0):
        f = LocallyConstantFunction.constant(SCHOTTKY2, -s * math.log(3.0))
        assert pressure(SCHOTTKY2, f) == pytest.approx((1 - s) * math.log(3.0), abs=1e-11)


def test_pressure_bernoulli_zero():
    f = LocallyConstantFunction.from_letter_values(FULL2, [math.log(0.4), math.log(0.6)])
    assert pressure(FULL2, f) == pytest.approx(0.0, abs=1e-12)


def test_pressure_depth_independent():
    rng = random.Random(11)
    f = LocallyConstantFunction(GOLDEN, 2, {w: rng.uniform(-1, 1) for w in admissible_words(GOLDEN, 2)})
    p1 = pressure(GOLDEN, f, D=1)
    for D in (2, 3, 4):
        assert pressure(GOLDEN, f, D=D) == pytest.approx(p1, abs=1e-11)


# ---------------------------------------------------------------------------
# Gibbs / equilibrium measures
# ---------------------------------------------------------------------------

def test_gibbs_uniform_bernoulli():
    gd = gibbs_measure(FULL2, LocallyConstantFunction.constant(FULL2, -math.log(2.0)))
    for w in admissible_words(FULL2, 5):
        assert gd.equilibrium.mass(w) == pytest.approx(2.0 ** -5, abs=1e-13)


def test_gibbs_bernoulli_p():
    p = 0.3
    f = LocallyConstantFunction.from_letter_values(FULL2, [math.log(p), math.log(1 - p)])
    gd = gibbs_measure(FULL2, f)
    assert gd.pressure == pytest.approx(0.0, abs=1e-12)
    assert gd.equilibrium.mass((0, 1, 1)) == pytest.approx(p * (1 - p) ** 2, abs=1e-13)
    assert gd.eigenmeasure.mass((0,)) == pytest.approx(p, abs=1e-13)


def test_gibbs_parry_measure_matches_hand_chain():
    gd = gibbs_measure(GOLDEN, LocallyConstantFunction.constant(GOLDEN, -math.log(PHI)))
    for w in admissible_words(GOLDEN, 4):
        assert gd.equilibrium.mass(w) == pytest.approx(parry_mass(w), abs=1e-12)


def test_gibbs_equilibrium_is_shift_invariant():
    rng = random.Random(5)
    f = LocallyConstantFunction(GOLDEN, 2, {w: rng.uniform(-1, 1) for w in admissible_words(GOLDEN, 2)})
    gd = gibbs_measure(GOLDEN, f)
    m = gd.equilibrium
    for w in admissible_words(GOLDEN, 3):
        pull = sum(m.mass((j,) + w) for j in range(2) if GOLDEN.allows(j, w[0]))
        assert pull == pytest.approx(m.mass(w), abs=1e-12)


def test_eigenmeasure_is_dual_fixed_point():
    # mu(L_f 1_[u]) = mu([u]) for the normalized potential, on depth D+1
    rng = random.Random(6)
    f = LocallyConstantFunction(GOLDEN, 2, {w: rng.uniform(-1, 1) for w in admissible_words(GOLDEN, 2)})
    gd = gibbs_measure(GOLDEN, f)
    fn = f - LocallyConstantFunction.constant(GOLDEN, gd.pressure)
    mu = gd.eigenmeasure
    for u in admissible_words(GOLDEN, gd.depth + 1):
        lhs = math.exp(fn(u)) * mu.mass(u[1:])
        assert lhs == pytest.approx(mu.mass(u), abs=1e-10)


def test_conformality_ladder():
    # log d(mu o theta^n)/d(mu) = beta * S_n H on cylinders, for the
    # eigenmeasure of the dual operator at -beta*H
    beta, H = 1.0, LocallyConstantFunction.constant(FULL2, math.log(2.0))
    gd = gibbs_measure(FULL2, -beta * H)
    mu = gd.eigenmeasure
    for n in (1, 2, 3):
        sn = H.birkhoff(n)
        for w in admissible_words(FULL2, n + 1):
            lhs = math.log(mu.mass(w[n:]) / mu.mass(w))
            assert lhs == pytest.approx(beta * sn(w), abs=1e-11)


def test_duality_random_functions():
    rng = random.Random(12)
    f = LocallyConstantFunction(GOLDEN, 2, {w: rng.uniform(-0.5, 0.5) for w in admissible_words(GOLDEN, 2)})
    gd = gibbs_measure(GOLDEN, f)
    M = transfer_matrix(GOLDEN, f, gd.depth)
    words = admissible_words(GOLDEN, gd.depth)
    idx = word_index(GOLDEN, gd.depth)
    mu = gd.eigenmeasure
    lam = math.exp(gd.pressure)
    for _ in range(20):
        g = LocallyConstantFunction(GOLDEN, gd.depth, {w: rng.uniform(-1, 1) for w in words})
        vec = np.array([g.values[w] for w in words])
        out = M @ vec
        lhs = sum(out[idx[w]] * mu.mass(w) for w in words)
        rhs = lam * integrate(mu, g)
        assert lhs == pytest.approx(rhs, rel=1e-10)


# ---------------------------------------------------------------------------
# Radon-Nikodym derivatives of measures
# ---------------------------------------------------------------------------

def test_rn_derivative_bernoulli_half_is_two():
    m = CylinderMeasure.bernoulli(FULL2, [0.5, 0.5])
    rho = rn_derivative(FULL2, m)
    assert rho((0,)) == pytest.approx(2.0) and rho((1,)) == pytest.approx(2.0)


def test_rn_derivative_bernoulli_p():
    p = 0.3
    m = CylinderMeasure.bernoulli(FULL2, [p, 1 - p])
    rho = rn_derivative(FULL2, m)
    assert rho((0,)) == pytest.approx(1 / p)
    assert rho((1,)) == pytest.approx(1 / (1 - p))


def test_rn_derivative_parry_depth2_matches_chain_oracle():
    # brute force from depth-3 cylinder masses of the hand chain
    pi, P = parry_golden()
    gd = gibbs_measure(GOLDEN, LocallyConstantFunction.constant(GOLDEN, -math.log(PHI)))
    rho = rn_derivative(GOLDEN, gd.equilibrium.at_depth(2))
    for w in admissible_words(GOLDEN, 3):
        oracle = parry_mass(w[1:]) / parry_mass(w)  # ratio of depth-3 masses
        assert rho(w) == pytest.approx(oracle, rel=1e-11)
        assert rho(w) == pytest.approx(pi_over(w), rel=1e-11)


def pi_over(w):
    pi, P = parry_golden()
    return pi[w[1]] / (pi[w[0]] * P[w[0]][w[1]])


def test_rn_derivative_zero_mass_is_named():
    m = CylinderMeasure(FULL2, 1, {(0,): 1.0, (1,): 0.0})
    with pytest.raises(ZeroMassError) as err:
        rn_derivative(FULL2, m)
    assert err.value.cylinder == (1,)


def test_measure_refuses_deep_query_without_cocycle():
    m = CylinderMeasure(FULL2, 1, {(0,): 0.5, (1,): 0.5})
    with pytest.raises(ConfigError):
        m.mass((0, 1))


# ---------------------------------------------------------------------------
# weak Gibbs profiles and integration
# ---------------------------------------------------------------------------

def test_profile_exact_gibbs_is_zero():
    m = CylinderMeasure.bernoulli(FULL2, [0.5, 0.5])
    prof = weak_gibbs_profile(FULL2, m, LocallyConstantFunction.constant(FULL2, -math.log(2.0)), 8)
    assert max(prof) == pytest.approx(0.0, abs=1e-12)


def test_profile_parry_is_bounded():
    # exact Parry masses give m([w]) * phi^n in {pi_a, pi_a*phi, pi_1*phi^2},
    # so the profile is bounded with eventual constant -log(pi_1 * phi)
    gd = gibbs_measure(GOLDEN, LocallyConstantFunction.constant(GOLDEN, -math.log(PHI)))
    prof = weak_gibbs_profile(GOLDEN, gd.equilibrium,
                              LocallyConstantFunction.constant(GOLDEN, -math.log(PHI)), 10)
    bound = math.log((PHI * PHI + 1.0) / PHI)
    assert max(prof) == pytest.approx(bound, abs=1e-11)
    for b in prof[2:]:  # the word 10^(n-2)1 realizes the bound for n >= 3
        assert b == pytest.approx(bound, abs=1e-11)


def test_integrate_indicator_and_entropy():
    m = CylinderMeasure.bernoulli(FULL2, [0.5, 0.5])
    ind = LocallyConstantFunction.indicator(FULL2, (0,))
    assert integrate(m, ind) == pytest.approx(0.5)
    p = 0.3
    mp = CylinderMeasure.bernoulli(FULL2, [p, 1 - p])
    f = LocallyConstantFunction.from_letter_values(FULL2, [math.log(p), math.log(1 - p)])
    assert integrate(mp, f) == pytest.approx(p * math.log(p) + (1 - p) * math.log(1 - p))
    assert integrate(mp, LocallyConstantFunction.constant(FULL2, 4.25)) == pytest.approx(4.25)
