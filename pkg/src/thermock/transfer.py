"""Transfer operators for locally constant potentials, as exact matrices.

A potential that is constant on depth-d cylinders turns the transfer
operator into a finite matrix on depth-D cylinder indicators for any
D >= max(d-1, 1); the defining limit for pressure is then attained exactly
by the spectral radius, so there is no discretization error anywhere in
this module, only the residual of the eigensolver.

Measures are stored at a single depth.  When a measure is an eigenmeasure
(or an equilibrium measure) it carries the log of its Radon-Nikodym cocycle
``log (dm o theta / dm)``, which licenses exact Markov-consistent extension
to deeper cylinders; measures without that datum refuse deep queries
instead of guessing.
"""

from __future__ import annotations

import csv
import json
import math
from dataclasses import dataclass, field

import numpy as np
import scipy.sparse as sp

from .errors import (CapacityError, ConfigError, EigenConvergenceError,
                     ZeroMassError)
from .symbolic import (IncidenceSystem, Word, admissible_words, format_word,
                       is_irreducible, parse_word, word_index)

# ---------------------------------------------------------------------------
# locally constant functions
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class LocallyConstantFunction:
    """A function on the shift space constant on depth-``depth`` cylinders.

    ``values`` maps every admissible word of length ``depth`` to a scalar
    (float or complex).  Lifting to a deeper depth replicates values across
    sub-cylinders and does not change the function; two instances of
    different depths may therefore represent the same function.
    """

    system: IncidenceSystem
    depth: int
    values: dict = field(compare=False)

    def __post_init__(self):
        if self.depth < 1:
            raise ConfigError(f"depth must be >= 1, got {self.depth}")
        words = admissible_words(self.system, self.depth)
        missing = [w for w in words if w not in self.values]
        if missing:
            raise ConfigError(
                f"function of depth {self.depth} missing value on [{format_word(missing[0])}]")

    @classmethod
    def constant(cls, sys: IncidenceSystem, c, depth: int = 1):
        return cls(sys, depth, {w: c for w in admissible_words(sys, depth)})

    @classmethod
    def indicator(cls, sys: IncidenceSystem, w: Word):
        """Indicator of the cylinder [w] (of [everything] when w is empty)."""
        if not w:
            return cls.constant(sys, 1.0)
        d = len(w)
        return cls(sys, d, {u: (1.0 if u == w else 0.0) for u in admissible_words(sys, d)})

    @classmethod
    def from_letter_values(cls, sys: IncidenceSystem, values) -> "LocallyConstantFunction":
        return cls(sys, 1, {(i,): v for i, v in enumerate(values)})

    def __call__(self, w: Word):
        """Value on the cylinder of any word of length >= depth."""
        if len(w) < self.depth:
            raise ConfigError(
                f"word {format_word(w)} shorter than function depth {self.depth}")
        return self.values[w[: self.depth]]

    # -- depth bookkeeping --------------------------------------------------

    def at_depth(self, d: int) -> "LocallyConstantFunction":
        if d == self.depth:
            return self
        if d < self.depth:
            raise ConfigError(f"cannot coarsen depth {self.depth} function to depth {d}")
        vals = {w: self.values[w[: self.depth]] for w in admissible_words(self.system, d)}
        return LocallyConstantFunction(self.system, d, vals)

    def compress(self) -> "LocallyConstantFunction":
        """Lower the depth while all sibling sub-cylinders share one value."""
        f = self
        while f.depth > 1:
            shorter = {}
            ok = True
            for w, v in f.values.items():
                p = w[:-1]
                if p in shorter:
                    if shorter[p] != v:
                        ok = False
                        break
                else:
                    shorter[p] = v
            if not ok:
                return f
            f = LocallyConstantFunction(f.system, f.depth - 1, shorter)
        return f

    # -- pointwise algebra ---------------------------------------------------

    def _binary(self, other, op):
        if isinstance(other, LocallyConstantFunction):
            d = max(self.depth, other.depth)
            a, b = self.at_depth(d), other.at_depth(d)
            return LocallyConstantFunction(
                self.system, d, {w: op(a.values[w], b.values[w]) for w in a.values})
        return LocallyConstantFunction(
            self.system, self.depth, {w: op(v, other) for w, v in self.values.items()})

    def __add__(self, other):
        return self._binary(other, lambda x, y: x + y)

    def __sub__(self, other):
        return self._binary(other, lambda x, y: x - y)

    def __mul__(self, other):
        return self._binary(other, lambda x, y: x * y)

    def __rmul__(self, other):
        return self * other

    def __neg__(self):
        return self * (-1.0)

    def exp(self) -> "LocallyConstantFunction":
        return LocallyConstantFunction(
            self.system, self.depth,
            {w: (np.exp(v) if isinstance(v, complex) else math.exp(v))
             for w, v in self.values.items()})

    def log(self) -> "LocallyConstantFunction":
        return LocallyConstantFunction(
            self.system, self.depth, {w: math.log(v) for w, v in self.values.items()})

    def conjugate(self) -> "LocallyConstantFunction":
        return LocallyConstantFunction(
            self.system, self.depth,
            {w: (v.conjugate() if isinstance(v, complex) else v)
             for w, v in self.values.items()})

    def max_abs(self) -> float:
        return max(abs(v) for v in self.values.values())

    def min_value(self) -> float:
        return min(self.values.values())

    def max_value(self) -> float:
        return max(self.values.values())

    def is_zero(self, tol: float = 0.0) -> bool:
        return all(abs(v) <= tol for v in self.values.values())

    def isclose(self, other: "LocallyConstantFunction", tol: float = 1e-12) -> bool:
        d = max(self.depth, other.depth)
        a, b = self.at_depth(d), other.at_depth(d)
        return all(abs(a.values[w] - b.values[w]) <= tol for w in a.values)

    # -- dynamics ------------------------------------------------------------

    def compose_shift(self, m: int) -> "LocallyConstantFunction":
        """The function x -> f(theta^m x), constant at depth depth+m."""
        if m == 0:
            return self
        d = self.depth + m
        vals = {w: self.values[w[m:]] for w in admissible_words(self.system, d)}
        return LocallyConstantFunction(self.system, d, vals)

    def compose_branch(self, v: Word) -> "LocallyConstantFunction":
        """The function f o tau_v, cut off by the indicator of theta^m[v].

        tau_v maps theta^m[v] back into [v]; off theta^m[v] the result is 0.
        """
        if not v:
            return self
        sys = self.system
        m = len(v)
        d = max(self.depth - m, 1)
        vals = {}
        for w in admissible_words(sys, d):
            if not sys.allows(v[-1], w[0]):
                vals[w] = 0.0
                continue
            u = (v + w)[: self.depth] if self.depth > m else v[: self.depth]
            vals[w] = self.values[u]
        return LocallyConstantFunction(sys, d, vals)

    def birkhoff(self, n: int) -> "LocallyConstantFunction":
        """The n-term sum f + f o theta + ... + f o theta^(n-1).

        Constant on depth n+depth-1 cylinders, hence exact there.
        """
        if n < 0:
            raise ConfigError("birkhoff sums need n >= 0")
        if n == 0:
            return LocallyConstantFunction.constant(self.system, 0.0)
        d = self.depth
        out_depth = n + d - 1
        vals = {}
        for w in admissible_words(self.system, out_depth):
            vals[w] = sum(self.values[w[k: k + d]] for k in range(n))
        return LocallyConstantFunction(self.system, out_depth, vals)

    # -- serialization -------------------------------------------------------

    @classmethod
    def from_json(cls, sys: IncidenceSystem, doc: dict) -> "LocallyConstantFunction":
        if "depth" not in doc or "values" not in doc:
            raise ConfigError('potential document needs keys "depth" and "values"')
        d = int(doc["depth"])
        vals = {parse_word(sys, k): float(v) for k, v in doc["values"].items()}
        return cls(sys, d, vals)

    def to_json(self) -> dict:
        return {"depth": self.depth,
                "values": {format_word(w): v for w, v in sorted(self.values.items())}}


# ---------------------------------------------------------------------------
# cylinder measures
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class CylinderMeasure:
    """A probability measure given by its masses on depth-``depth`` cylinders.

    ``log_jacobian``, when present, is log(dm o theta / dm) as a locally
    constant function; it makes the Markov-consistent extension to deeper
    cylinders exact:  m([j w]) = m([w]) / exp(log_jacobian([j w])).
    """

    system: IncidenceSystem
    depth: int
    weights: dict = field(compare=False)
    log_jacobian: LocallyConstantFunction | None = None

    def __post_init__(self):
        words = admissible_words(self.system, self.depth)
        for w in words:
            if w not in self.weights:
                raise ConfigError(f"measure missing mass on [{format_word(w)}]")
            if self.weights[w] < -1e-15:
                raise ConfigError(f"negative mass on [{format_word(w)}]")
        total = sum(self.weights[w] for w in words)
        if abs(total - 1.0) > 1e-9:
            raise ConfigError(f"total mass {total!r} differs from 1")

    @classmethod
    def bernoulli(cls, sys: IncidenceSystem, probs) -> "CylinderMeasure":
        """Product measure on a full shift; carries its exact cocycle."""
        probs = [float(p) for p in probs]
        if abs(sum(probs) - 1.0) > 1e-12:
            raise ConfigError("bernoulli weights must sum to 1")
        jac = LocallyConstantFunction(
            sys, 1, {(i,): -math.log(probs[i]) for i in range(sys.alphabet_size)})
        return cls(sys, 1, {(i,): probs[i] for i in range(sys.alphabet_size)},
                   log_jacobian=jac)

    def mass(self, w: Word) -> float:
        """Mass of [w] for any length: coarser by summation, deeper by cocycle."""
        if not w:
            return 1.0
        n = len(w)
        if n == self.depth:
            return self.weights[w]
        if n < self.depth:
            sys = self.system
            total = 0.0
            stack = [w]
            while stack:
                u = stack.pop()
                if len(u) == self.depth:
                    total += self.weights[u]
                else:
                    stack.extend(u + (j,) for j in sys.successors(u[-1]))
            return total
        if self.log_jacobian is None:
            raise ConfigError(
                "measure stored at depth %d cannot answer depth-%d query without its cocycle"
                % (self.depth, n))
        # peel letters from the left: m([j u]) = m([u]) * exp(-log_jacobian([j u]))
        jac = self.log_jacobian
        if jac.depth > self.depth + 1:
            raise ConfigError("cocycle depth exceeds measure depth + 1; cannot extend")
        log_corr = 0.0
        u = w
        while len(u) > self.depth:
            log_corr -= jac(u[: jac.depth])
            u = u[1:]
        return self.weights[u] * math.exp(log_corr)

    def at_depth(self, d: int) -> "CylinderMeasure":
        if d == self.depth:
            return self
        vals = {w: self.mass(w) for w in admissible_words(self.system, d)}
        return CylinderMeasure(self.system, d, vals, log_jacobian=self.log_jacobian)

    def with_jacobian(self, jac: LocallyConstantFunction) -> "CylinderMeasure":
        return CylinderMeasure(self.system, self.depth, dict(self.weights), log_jacobian=jac)

    def is_markov_at_depth_two(self, tol: float = 1e-10) -> bool:
        """Whether the stored masses factor through the depth-2 chain."""
        if self.depth <= 2:
            return True
        two = self.at_depth(2)
        one = self.at_depth(1)
        for w, mass in self.weights.items():
            chain = one.weights[w[:1]]
            for a, b in zip(w, w[1:]):
                denom = one.weights[(a,)]
                if denom == 0.0:
                    return False
                chain *= two.weights[(a, b)] / denom
            if abs(chain - mass) > tol:
                return False
        return True

    def to_csv(self, path) -> None:
        with open(path, "w", newline="") as fh:
            writer = csv.writer(fh)
            writer.writerow(["word", "mass"])
            for w in admissible_words(self.system, self.depth):
                writer.writerow([format_word(w), format(self.weights[w], ".12g")])


# ---------------------------------------------------------------------------
# transfer matrices and Perron-Frobenius data
# ---------------------------------------------------------------------------


def transfer_matrix(sys: IncidenceSystem, f: LocallyConstantFunction,
                    D: int) -> sp.csr_matrix:
    """The transfer operator of e^f on depth-D cylinder indicators.

    Row v, column w: entry e^{f(y)} where y runs through the preimages of
    [v] with depth-D itinerary w.  Nonzero iff w_1..w_{D-1} = v_0..v_{D-2}
    and the junction w_{D-1} -> v_{D-1} is admissible, so each row holds at
    most ``alphabet_size`` entries.
    """
    d = f.depth
    if D < max(d - 1, 1):
        raise ConfigError(f"depth {D} too small for a depth-{d} potential (need >= {max(d-1,1)})")
    words = admissible_words(sys, D)
    index = word_index(sys, D)
    rows, cols, data = [], [], []
    for vi, v in enumerate(words):
        for j in range(sys.alphabet_size):
            if not sys.allows(j, v[0]):
                continue
            w = (j,) + v[:-1]
            u = (j,) + v  # the (D+1)-prefix of the preimage
            val = math.exp(f(u if d == D + 1 else w))
            rows.append(vi)
            cols.append(index[w])
            data.append(val)
    n = len(words)
    return sp.csr_matrix((data, (rows, cols)), shape=(n, n))


@dataclass(frozen=True)
class EigenData:
    """Leading eigendata of a nonnegative irreducible matrix.

    ``h`` is the right eigenvector, ``mu`` the left one normalized to a
    probability vector, with sum(h * mu) = 1.  ``residual`` is the max norm
    of both eigen defects after normalization.
    """

    lam: float
    h: np.ndarray
    mu: np.ndarray
    residual: float
    iterations: int


_POWER_TOL = 1e-13
_POWER_CAP = 100_000


def _power_iterate(M: sp.csr_matrix) -> tuple[float, np.ndarray, int]:
    """Shifted power iteration at unit scale.

    The identity shift kills periodicity, but only separates eigenvalues
    when the spectral radius is of order one, so the matrix is first scaled
    by its maximal row sum (the shift would otherwise stall for radii far
    from 1).  The Rayleigh tolerance is relative, and the vector itself must
    be stationary: on symmetric input the Rayleigh quotient converges at the
    square of the eigenvector rate and would otherwise stop at
    sqrt-accuracy vectors.
    """
    n = M.shape[0]
    scale = float(np.max(np.abs(M).sum(axis=1)))
    if scale == 0.0:
        raise EigenConvergenceError("zero matrix has no Perron data")
    Ms = M / scale
    x = np.ones(n) / math.sqrt(n)
    ray = 0.0
    for it in range(1, _POWER_CAP + 1):
        y = Ms @ x + x
        new_ray = float(x @ y)
        y /= np.linalg.norm(y)
        ray_ok = abs(new_ray - ray) <= _POWER_TOL * max(1.0, abs(new_ray))
        vec_ok = float(np.max(np.abs(y - x))) <= _POWER_TOL
        x = y
        ray = new_ray
        if it > 1 and ray_ok and vec_ok:
            return (ray - 1.0) * scale, x, it
    raise EigenConvergenceError(
        f"power iteration did not converge in {_POWER_CAP} steps "
        "(matrix may be reducible or degenerate)")


def leading_eigen(M) -> EigenData:
    """Perron data by shifted power iteration from the all-ones vector."""
    M = sp.csr_matrix(M, dtype=float)
    if M.nnz and M.data.min() < 0:
        raise ConfigError("leading_eigen requires a nonnegative matrix")
    lam_r, h, it_r = _power_iterate(M)
    lam_l, mu, it_l = _power_iterate(sp.csr_matrix(M.T))
    lam = 0.5 * (lam_r + lam_l)
    mu = np.abs(mu)
    mu = mu / mu.sum()
    h = np.abs(h)
    scale = float(h @ mu)
    if scale <= 0.0:
        raise EigenConvergenceError("left/right eigenvectors do not overlap")
    h = h / scale
    residual = max(
        float(np.max(np.abs(M @ h - lam * h))),
        float(np.max(np.abs(M.T @ mu - lam * mu))),
    )
    return EigenData(lam=lam, h=h, mu=mu, residual=residual, iterations=it_r + it_l)


# ---------------------------------------------------------------------------
# pressure, Gibbs measures, Radon-Nikodym cocycles
# ---------------------------------------------------------------------------


def _working_depth(f: LocallyConstantFunction) -> int:
    return max(f.depth - 1, 1)


def pressure(sys: IncidenceSystem, f: LocallyConstantFunction,
             D: int | None = None) -> float:
    """log of the spectral radius of the transfer matrix; exact for locally
    constant potentials."""
    if D is None:
        D = _working_depth(f)
    return math.log(leading_eigen(transfer_matrix(sys, f, D)).lam)


@dataclass(frozen=True)
class GibbsData:
    """Equilibrium data for a locally constant potential f.

    ``equilibrium`` is the shift-invariant measure h * mu for the normalized
    potential f - P(f); ``eigenmeasure`` is the (generally non-invariant)
    fixed point of the dual transfer operator of f - P(f).  Both carry their
    exact cocycles, so deeper cylinder masses are available on demand.
    """

    system: IncidenceSystem
    potential: LocallyConstantFunction
    pressure: float
    depth: int
    equilibrium: CylinderMeasure
    eigenmeasure: CylinderMeasure
    h: LocallyConstantFunction
    chi: LocallyConstantFunction
    eigen_residual: float


def gibbs_measure(sys: IncidenceSystem, f: LocallyConstantFunction,
                  D: int | None = None) -> GibbsData:
    if not is_irreducible(sys):
        raise ConfigError("gibbs_measure needs an irreducible incidence matrix")
    if D is None:
        D = _working_depth(f)
    words = admissible_words(sys, D)
    eig = leading_eigen(transfer_matrix(sys, f, D))
    P = math.log(eig.lam)
    h = LocallyConstantFunction(sys, D, {w: float(eig.h[i]) for i, w in enumerate(words)})
    chi = h.log()
    # eigenmeasure of the normalized dual: d(mu o theta)/d(mu) = e^{P - f}
    mu_jac = (LocallyConstantFunction.constant(sys, P) - f).compress()
    mu = CylinderMeasure(sys, D, {w: float(eig.mu[i]) for i, w in enumerate(words)},
                         log_jacobian=mu_jac)
    # invariant measure h * mu: cocycle gains the coboundary of log h
    m_weights = {w: float(eig.h[i] * eig.mu[i]) for i, w in enumerate(words)}
    total = sum(m_weights.values())
    m_weights = {w: v / total for w, v in m_weights.items()}
    m_jac = (mu_jac + chi.compose_shift(1) - chi).compress()
    equilibrium = CylinderMeasure(sys, D, m_weights, log_jacobian=m_jac)
    return GibbsData(system=sys, potential=f, pressure=P, depth=D,
                     equilibrium=equilibrium, eigenmeasure=mu, h=h, chi=chi,
                     eigen_residual=eig.residual)


def rn_derivative(sys: IncidenceSystem, m: CylinderMeasure) -> LocallyConstantFunction:
    """d(m o theta)/dm on depth-``m.depth`` cylinders: m([w_1..])/m([w]).

    Requires positive mass on every admissible cylinder of the stored depth.
    """
    D = m.depth
    vals = {}
    for w in admissible_words(sys, D):
        denom = m.weights[w]
        if denom <= 0.0:
            raise ZeroMassError(
                f"cylinder [{format_word(w)}] carries no mass", cylinder=w)
        vals[w] = m.mass(w[1:]) / denom
    return LocallyConstantFunction(sys, D, vals)


def integrate(m: CylinderMeasure, f: LocallyConstantFunction):
    """Exact integral of a locally constant function: sum f([w]) m([w])."""
    d = max(m.depth, f.depth)
    words = admissible_words(m.system, d)
    return sum(f(w) * m.mass(w) for w in words)


def weak_gibbs_profile(sys: IncidenceSystem, m: CylinderMeasure,
                       f: LocallyConstantFunction, n_max: int,
                       word_cap: int = 2_000_000) -> list[float]:
    """b_n = max over depth-n words of |log m([w]) - S_n f| for n = 1..n_max.

    The sup over each cylinder is exact because the Birkhoff sum of a
    depth-d potential is constant on depth n+d-1 cylinders; the max runs
    over those refinements.
    """
    d = f.depth
    out = []
    for n in range(1, n_max + 1):
        deep = n + d - 1
        count = len(admissible_words(sys, 1)) * (sys.alphabet_size ** (deep - 1))
        if count > word_cap:
            raise CapacityError(
                f"profile at n={n} would enumerate ~{count} words (cap {word_cap})")
        worst = 0.0
        cache: dict[Word, float] = {}
        for u in admissible_words(sys, deep):
            w = u[:n]
            if w not in cache:
                cache[w] = math.log(m.mass(w))
            s = sum(f.values[u[k: k + d]] for k in range(n))
            worst = max(worst, abs(cache[w] - s))
        out.append(worst)
    return out


# ---------------------------------------------------------------------------
# JSON ingestion used by the CLI
# ---------------------------------------------------------------------------


def potential_from_json(sys: IncidenceSystem, doc) -> LocallyConstantFunction:
    if isinstance(doc, dict) and "constant" in doc:
        return LocallyConstantFunction.constant(sys, float(doc["constant"]))
    if isinstance(doc, dict):
        return LocallyConstantFunction.from_json(sys, doc)
    raise ConfigError("potential must be a JSON object")


def potential_from_json_file(sys: IncidenceSystem, path) -> LocallyConstantFunction:
    with open(path) as fh:
        return potential_from_json(sys, json.load(fh))
