"""Lyapunov / multifractal spectrum of a positive locally constant potential.

The analytic family s(q) solves the pressure equation P(-s J) = q * h_top
(equivalently P(-sJ - q*phi) = 0 for the constant potential phi = h_top).
Each grid point carries the equilibrium measure of -s(q) J, the exponent
alpha(q) computed as the exact integral of J against it (never as a
numerical derivative of pressure), and the dimension value

    dim(q) = (s(q) alpha(q) + P(-s(q) J)) / alpha(q),

whose Legendre form s(q) + q h_top / alpha(q) must agree with the measure
ratio  integral(J_s) / integral(J)  as a consistency check.

Interval endpoints of the attainable exponents are reported as slope
estimates of the pressure at large |s|; they are asymptotic quantities and
carry a convergence flag instead of a claimed error bound.
"""

from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np

from .errors import (ConfigError, NumericalError, OutOfSpectrumRange)
from .symbolic import IncidenceSystem, admissible_words, word_index
from .transfer import (CylinderMeasure, GibbsData, LocallyConstantFunction,
                       gibbs_measure, integrate, pressure, transfer_matrix)

_ROOT_TOL = 1e-12
_ROOT_CAP = 400


def topological_entropy(sys: IncidenceSystem) -> float:
    return pressure(sys, LocallyConstantFunction.constant(sys, 0.0))


def _pressure_at(sys: IncidenceSystem, J: LocallyConstantFunction, s: float) -> float:
    return pressure(sys, J * (-s))


def _solve_pressure_equation(sys: IncidenceSystem, J: LocallyConstantFunction,
                             target: float, lo: float, hi: float) -> float:
    """Bisect s -> P(-sJ) - target on [lo, hi]; the map is continuous and
    strictly decreasing when min J > 0."""
    flo = _pressure_at(sys, J, lo) - target
    fhi = _pressure_at(sys, J, hi) - target
    if flo < -_ROOT_TOL or fhi > _ROOT_TOL:
        raise OutOfSpectrumRange(
            f"target {target} not bracketed by pressure values "
            f"[{fhi + target}, {flo + target}]",
            admissible=(fhi + target, flo + target))
    for _ in range(_ROOT_CAP):
        mid = 0.5 * (lo + hi)
        fmid = _pressure_at(sys, J, mid) - target
        if abs(fmid) < _ROOT_TOL:
            return mid
        if fmid > 0.0:
            lo = mid
        else:
            hi = mid
    raise NumericalError("pressure-equation bisection did not reach tolerance")


def bowen_root(sys: IncidenceSystem, J: LocallyConstantFunction) -> float:
    """The unique zero of s -> P(-sJ) for strictly positive J."""
    if J.min_value() <= 0.0:
        raise ConfigError(
            "bowen_root needs min J > 0; induce first for neutral potentials")
    p0 = _pressure_at(sys, J, 0.0)
    hi = p0 / J.min_value() + 1e-9
    return _solve_pressure_equation(sys, J, 0.0, 0.0, hi)


def s_of_q(sys: IncidenceSystem, J: LocallyConstantFunction, q: float,
           h_top: float | None = None) -> float:
    """Solve P(-s(q) J) = q * h_top."""
    if J.min_value() <= 0.0:
        raise ConfigError("s_of_q needs min J > 0")
    if h_top is None:
        h_top = topological_entropy(sys)
    target = q * h_top
    p0 = _pressure_at(sys, J, 0.0)
    # linear bounds from the extreme slopes give a guaranteed bracket
    lo = (p0 - target) / J.max_value() if target <= p0 else (p0 - target) / J.min_value()
    hi = (p0 - target) / J.min_value() if target <= p0 else (p0 - target) / J.max_value()
    return _solve_pressure_equation(sys, J, target, lo - 1e-9, hi + 1e-9)


# ---------------------------------------------------------------------------
# normalized potentials
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class NormalizedPotential:
    """The cohomologous normalization of s*J at its own pressure.

    chi is the log of the positive eigenfunction of the transfer operator
    of -sJ; the normalized potential

        I_s = s J + P(-sJ) + chi o theta - chi

    satisfies  sum over preimages of e^{-I_s} = 1 on every cylinder of the
    working depth (the transfer operator of -I_s fixes constants), with the
    achieved defect stored.
    """

    base: LocallyConstantFunction
    s: float
    pressure: float
    chi: LocallyConstantFunction
    I_s: LocallyConstantFunction
    normalization_defect: float
    gibbs: GibbsData

    def log_cocycle(self) -> LocallyConstantFunction:
        """log d(m o theta)/dm of the equilibrium measure equals I_s."""
        return self.I_s


def normalized_potential(sys: IncidenceSystem, J: LocallyConstantFunction,
                         s: float) -> NormalizedPotential:
    gd = gibbs_measure(sys, J * (-s))
    chi = gd.chi
    I_s = (J * s + LocallyConstantFunction.constant(sys, gd.pressure)
           + chi.compose_shift(1) - chi).compress()
    depth = max(I_s.depth - 1, 1)
    defect = 0.0
    for w in admissible_words(sys, depth):
        total = sum(math.exp(-I_s((j,) + w))
                    for j in sys.predecessors(w[0]))
        defect = max(defect, abs(total - 1.0))
    return NormalizedPotential(base=J, s=s, pressure=gd.pressure, chi=chi,
                               I_s=I_s, normalization_defect=defect, gibbs=gd)


# ---------------------------------------------------------------------------
# asymptotic variance
# ---------------------------------------------------------------------------


def asymptotic_variance(sys: IncidenceSystem, f: LocallyConstantFunction,
                        m: CylinderMeasure, K_max: int = 64,
                        tol: float = 1e-14) -> tuple[float, bool]:
    """sum_k ( integral f * f o theta^k dm - (integral f dm)^2 ), k = 0..K.

    Each correlation is computed exactly through powers of the normalized
    transfer operator of the (invariant) measure m, which must carry its
    cocycle.  Returns (value, decayed) where decayed is False when the
    increments have not dropped below tol at the cap.
    """
    if m.log_jacobian is None:
        raise ConfigError("asymptotic_variance needs a measure with its cocycle")
    phi = -1.0 * m.log_jacobian  # the normalized potential: L_phi 1 = 1
    D = max(m.depth, f.depth, phi.depth - 1, 1)
    M = transfer_matrix(sys, phi, D)
    words = admissible_words(sys, D)
    fD = f.at_depth(D)
    mvec = np.array([m.mass(w) for w in words])
    fvec = np.array([float(fD.values[w]) for w in words])
    # center first: iterating the raw function would let the ~1e-14 row-sum
    # defect of the numerically normalized operator accumulate linearly
    fvec = fvec - float(fvec @ mvec)
    total = float((fvec * fvec) @ mvec)
    # noise floor of each correlation scales with sup|f|^2
    tol_eff = tol * max(1.0, float(np.max(np.abs(fvec))) ** 2)
    g = fvec.copy()
    decayed = total == 0.0
    for _ in range(1, K_max + 1):
        g = M @ g
        corr = float((fvec * g) @ mvec)
        total += corr
        if abs(corr) < tol_eff:
            decayed = True
            break
    return total, decayed


# ---------------------------------------------------------------------------
# spectrum points and sweeps
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class SpectrumPoint:
    q: float
    s_q: float
    alpha: float
    dim: float
    pressure_residual: float
    variance: float
    measure: CylinderMeasure
    normalized: NormalizedPotential


def spectrum_point(sys: IncidenceSystem, J: LocallyConstantFunction, q: float,
                   h_top: float | None = None) -> SpectrumPoint:
    if h_top is None:
        h_top = topological_entropy(sys)
    s = s_of_q(sys, J, q, h_top=h_top)
    norm = normalized_potential(sys, J, s)
    m = norm.gibbs.equilibrium
    alpha = float(integrate(m, J))
    if alpha <= 0.0:
        raise NumericalError(f"exponent alpha = {alpha} not positive at q = {q}")
    P = norm.pressure
    dim = (s * alpha + P) / alpha
    residual = abs(P - q * h_top)
    variance, _ = asymptotic_variance(sys, J, m)
    return SpectrumPoint(q=q, s_q=s, alpha=alpha, dim=dim,
                         pressure_residual=residual, variance=variance,
                         measure=m, normalized=norm)


@dataclass(frozen=True)
class SpectrumSweep:
    points: tuple[SpectrumPoint, ...]
    alpha_minus: float
    alpha_plus: float
    endpoint_converged: bool
    degenerate: bool
    h_top: float
    errors: tuple[tuple[float, str], ...]


def endpoint_estimates(sys: IncidenceSystem, J: LocallyConstantFunction,
                       s_big: float = 60.0) -> tuple[float, float, bool]:
    """(alpha_minus, alpha_plus, converged): slope estimates of the pressure
    at +-s_big, flagged by comparison with +-(2/3) s_big."""
    def slope(s):
        return _pressure_at(sys, J, s) / (-s)
    a_minus, a_plus = slope(s_big), slope(-s_big)
    a_minus_ref, a_plus_ref = slope(s_big * 2.0 / 3.0), slope(-s_big * 2.0 / 3.0)
    converged = (abs(a_minus - a_minus_ref) < 1e-3
                 and abs(a_plus - a_plus_ref) < 1e-3)
    return a_minus, a_plus, converged


def spectrum_sweep(sys: IncidenceSystem, J: LocallyConstantFunction, q_grid,
                   threads: int = 1, s_big: float = 60.0) -> SpectrumSweep:
    if J.min_value() <= 0.0:
        raise ConfigError("spectrum_sweep needs min J > 0")
    h_top = topological_entropy(sys)
    # flat families have no curve to sweep: detect via the variance at q=0
    root_point = spectrum_point(sys, J, 0.0, h_top=h_top)
    if root_point.variance < 1e-12:
        return SpectrumSweep(points=(root_point,),
                             alpha_minus=root_point.alpha,
                             alpha_plus=root_point.alpha,
                             endpoint_converged=True, degenerate=True,
                             h_top=h_top, errors=())
    qs = sorted(float(q) for q in q_grid)
    points: list[SpectrumPoint] = []
    errors: list[tuple[float, str]] = []

    def solve(q):
        return spectrum_point(sys, J, q, h_top=h_top)

    if threads > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            futures = {q: pool.submit(solve, q) for q in qs}
            for q in qs:
                try:
                    points.append(futures[q].result())
                except NumericalError as err:  # keep sweeping past bad points
                    errors.append((q, str(err)))
    else:
        for q in qs:
            try:
                points.append(solve(q))
            except NumericalError as err:
                errors.append((q, str(err)))
    points.sort(key=lambda p: p.q)
    a_minus, a_plus, converged = endpoint_estimates(sys, J, s_big=s_big)
    return SpectrumSweep(points=tuple(points), alpha_minus=a_minus,
                         alpha_plus=a_plus, endpoint_converged=converged,
                         degenerate=False, h_top=h_top, errors=tuple(errors))


def sweep_rows(sweep: SpectrumSweep) -> list[dict]:
    """CSV-ready rows, ordered by q."""
    return [{"q": p.q, "s_q": p.s_q, "alpha": p.alpha, "dim": p.dim,
             "pressure_residual": p.pressure_residual, "variance": p.variance}
            for p in sweep.points]
