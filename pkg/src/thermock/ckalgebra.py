"""Exact normal forms in the dense word subalgebra of a Cuntz-Krieger algebra.

Elements are finite sums of terms f * S_v S_w* with locally constant
coefficients multiplied on the left.  Products resolve S_w* S_p by prefix
comparison, transporting coefficients left through the generators via the
pullback/pushforward calculus; the result is again of the same shape, so
the algebra closes without any truncation.

Two reductions make the term key (v, w) canonical:

* coefficient support: f S_v S_w* = (f * 1_{[v]} * 1_{theta^-m theta^n [w]})
  S_v S_w*, so coefficients are masked down to the cylinders where the term
  can act;
* trailing letters: S_{vj} S_{wj}* summed over all admissible j equals
  S_v S_w*, and a single such child term equals the parent with the child's
  coefficient, so common trailing letters are stripped.  In particular the
  diagonal S_v S_v* collapses to the multiplication operator 1_{[v]}.

Coefficients are complex floating values (gauge multipliers e^{izH} are
transcendental); equality testing is tolerance-based after canonical
ordering.
"""

from __future__ import annotations

import cmath
import math
import random
from dataclasses import dataclass

from .errors import ConfigError
from .symbolic import (EMPTY_WORD, IncidenceSystem, Word, admissible_words,
                       format_word, is_irreducible)
from .transfer import CylinderMeasure, LocallyConstantFunction, integrate

_PRUNE_TOL = 1e-15


def _mask(sys: IncidenceSystem, v: Word, w: Word) -> LocallyConstantFunction | None:
    """Indicator of [v] intersected with theta^-|v|(theta^|w|[w]); None if full."""
    if not v and not w:
        return None
    if not v:
        # support inside theta^n[w]: first letter must follow w's last letter
        return LocallyConstantFunction(
            sys, 1, {(j,): (1.0 if sys.allows(w[-1], j) else 0.0)
                     for j in range(sys.alphabet_size)})
    m = len(v)
    if not w:
        vals = {u: (1.0 if u == v else 0.0) for u in admissible_words(sys, m)}
        return LocallyConstantFunction(sys, m, vals)
    vals = {}
    for u in admissible_words(sys, m + 1):
        vals[u] = 1.0 if (u[:m] == v and sys.allows(w[-1], u[m])) else 0.0
    return LocallyConstantFunction(sys, m + 1, vals)


@dataclass(frozen=True)
class Term:
    """One normal-form term coeff * S_left S_right*."""

    coeff: LocallyConstantFunction
    left: Word
    right: Word

    @property
    def system(self) -> IncidenceSystem:
        return self.coeff.system

    def semantic_key(self):
        return (len(self.left), len(self.right), self.left, self.right)


def _normalize_term(coeff: LocallyConstantFunction, v: Word, w: Word) -> Term | None:
    """Mask the coefficient to where the term acts, strip common trailing
    letters (the stripped key is coarser, so the mask stays valid), drop
    zeros."""
    sys = coeff.system
    msk = _mask(sys, v, w)
    if msk is not None:
        coeff = coeff * msk
    while v and w and v[-1] == w[-1]:
        v, w = v[:-1], w[:-1]
    coeff = coeff.compress()
    if coeff.is_zero(_PRUNE_TOL):
        return None
    return Term(coeff, v, w)


@dataclass(frozen=True)
class AlgebraElement:
    """A finite sum of normal-form terms, keyed by the word pair (v, w)."""

    system: IncidenceSystem
    terms: tuple[Term, ...]

    @classmethod
    def from_terms(cls, sys: IncidenceSystem, raw) -> "AlgebraElement":
        merged: dict[tuple[Word, Word], LocallyConstantFunction] = {}
        for t in raw:
            if t is None:
                continue
            key = (t.left, t.right)
            merged[key] = merged[key] + t.coeff if key in merged else t.coeff
        out = []
        for (v, w), c in merged.items():
            t = _normalize_term(c, v, w)
            if t is not None:
                out.append(t)
        out.sort(key=Term.semantic_key)
        return cls(sys, tuple(out))

    # -- constructors --------------------------------------------------------

    @classmethod
    def zero(cls, sys: IncidenceSystem) -> "AlgebraElement":
        return cls(sys, ())

    @classmethod
    def one(cls, sys: IncidenceSystem) -> "AlgebraElement":
        return cls.from_function(LocallyConstantFunction.constant(sys, 1.0 + 0.0j))

    @classmethod
    def from_function(cls, f: LocallyConstantFunction) -> "AlgebraElement":
        return cls.from_terms(f.system, [Term(f, EMPTY_WORD, EMPTY_WORD)])

    @classmethod
    def generator(cls, sys: IncidenceSystem, i: int) -> "AlgebraElement":
        """S_i."""
        return cls.word_pair(sys, (i,), EMPTY_WORD)

    @classmethod
    def word_pair(cls, sys: IncidenceSystem, v, w) -> "AlgebraElement":
        """S_v S_w* (either word may be empty)."""
        v, w = sys.word(v), sys.word(w)
        one = LocallyConstantFunction.constant(sys, 1.0 + 0.0j)
        return cls.from_terms(sys, [Term(one, v, w)])

    def scaled(self, c) -> "AlgebraElement":
        return AlgebraElement.from_terms(
            self.system, [Term(t.coeff * c, t.left, t.right) for t in self.terms])

    # -- ring operations -----------------------------------------------------

    def __add__(self, other: "AlgebraElement") -> "AlgebraElement":
        return AlgebraElement.from_terms(self.system, list(self.terms) + list(other.terms))

    def __sub__(self, other: "AlgebraElement") -> "AlgebraElement":
        return self + other.scaled(-1.0)

    def __mul__(self, other: "AlgebraElement") -> "AlgebraElement":
        out = []
        for a in self.terms:
            for b in other.terms:
                out.append(_term_product(a, b))
        return AlgebraElement.from_terms(self.system, out)

    def is_zero(self, tol: float = 1e-12) -> bool:
        return all(t.coeff.max_abs() <= tol for t in self.terms)

    def isclose(self, other: "AlgebraElement", tol: float = 1e-12) -> bool:
        return (self - other).is_zero(tol)

    def norm_upper(self) -> float:
        """Crude bound: sum of sup norms of the coefficients."""
        return sum(t.coeff.max_abs() for t in self.terms)

    def diagonal_part(self) -> LocallyConstantFunction:
        """The function obtained by deleting every off-diagonal term.

        With trailing letters stripped, diagonal means left == right == ();
        those terms are plain multiplication operators.
        """
        out = LocallyConstantFunction.constant(self.system, 0.0j)
        for t in self.terms:
            if not t.left and not t.right:
                out = out + t.coeff
        return out

    def to_text(self) -> str:
        """Deterministic text form for golden files."""
        if not self.terms:
            return "0"
        chunks = []
        for t in self.terms:
            vals = ", ".join(
                f"{format_word(w)}:{t.coeff.values[w]:.12g}"
                for w in admissible_words(self.system, t.coeff.depth))
            chunks.append(
                f"[{vals}]@{t.coeff.depth} S[{format_word(t.left)}] S*[{format_word(t.right)}]")
        return " + ".join(chunks)


# ---------------------------------------------------------------------------
# the product / adjoint / gauge calculus
# ---------------------------------------------------------------------------


def _term_product(a: Term, b: Term) -> Term | None:
    """(c1 S_v S_w*)(c2 S_p S_q*) resolved by prefix comparison of w and p."""
    sys = a.system
    v, w = a.left, a.right
    p, q = b.left, b.right
    n, r = len(w), len(p)
    k = min(n, r)
    if w[:k] != p[:k]:
        return None  # neither word extends the other: S_w* S_p = 0
    # move c2 left through S_w* and S_v
    g = b.coeff.compose_branch(w)
    coeff = a.coeff * g.compose_shift(len(v))
    if r > n:  # p = w + tail: S_w* S_p = S_tail
        tail = p[n:]
        left = sys.concat(v, tail)
        if left is None:
            return None
        return _normalize_term(coeff, left, q)
    if n > r:  # w = p + tail: S_w* S_p = S_tail*
        tail = w[r:]
        right = sys.concat(q, tail)
        if right is None:
            return None
        return _normalize_term(coeff, v, right)
    return _normalize_term(coeff, v, q)  # w == p: S_w* S_w is absorbed by the mask


def multiply(x: AlgebraElement, y: AlgebraElement) -> AlgebraElement:
    return x * y


def adjoint(x: AlgebraElement) -> AlgebraElement:
    """(f S_v S_w*)* = S_w (conj f) S_v*, with the coefficient moved left."""
    out = []
    for t in x.terms:
        c = t.coeff.conjugate().compose_branch(t.left).compose_shift(len(t.right))
        out.append(_normalize_term(c, t.right, t.left))
    return AlgebraElement.from_terms(x.system, out)


@dataclass(frozen=True)
class GaugeParameters:
    """A real locally constant energy H and a complex time z.

    Real z gives the one-parameter automorphism group S_j -> e^{izH} S_j;
    complex z is its unique entire continuation (no longer multiplicative
    off the real axis), the ingredient of the KMS condition at z = i*beta.
    """

    H: LocallyConstantFunction
    z: complex

    def __post_init__(self):
        if any(isinstance(val, complex) and val.imag != 0.0
               for val in self.H.values.values()):
            raise ConfigError("gauge energy must be real-valued (self-adjoint)")


def gauge(x: AlgebraElement, g: GaugeParameters) -> AlgebraElement:
    """Each term f S_v S_w* picks up e^{iz S_m H} on the left and
    e^{-iz S_n H} on the right (m = |v|, n = |w|), reduced to normal form."""
    iz = 1j * g.z
    out = []
    for t in x.terms:
        m, n = len(t.left), len(t.right)
        c = t.coeff
        if m:
            c = (g.H.birkhoff(m) * iz).exp() * c
        if n:
            right_mult = (g.H.birkhoff(n) * (-iz)).exp()
            c = c * right_mult.compose_branch(t.right).compose_shift(m)
        out.append(_normalize_term(c, t.left, t.right))
    return AlgebraElement.from_terms(x.system, out)


# ---------------------------------------------------------------------------
# states
# ---------------------------------------------------------------------------


def state_eval(mu: CylinderMeasure, x: AlgebraElement) -> complex:
    """The projection state: off-diagonal terms die, the rest integrates.

    This is the state built from a measure by composing the conditional
    projection onto the continuous functions with integration against mu.
    """
    total = 0.0 + 0.0j
    for t in x.terms:
        if not t.left and not t.right:
            total += complex(integrate(mu, t.coeff))
    return total


def kms_residual(mu: CylinderMeasure, H: LocallyConstantFunction, beta: float,
                 x: AlgebraElement, y: AlgebraElement) -> float:
    """|sigma(x y) - sigma(y alpha^{i beta}(x))| for the projection state."""
    if beta == 0.0:
        raise ConfigError("KMS condition needs beta != 0")
    lhs = state_eval(mu, x * y)
    rhs = state_eval(mu, y * gauge(x, GaugeParameters(H, 1j * beta)))
    return abs(lhs - rhs)


# ---------------------------------------------------------------------------
# the verification suite
# ---------------------------------------------------------------------------


def _random_word(sys: IncidenceSystem, rng: random.Random, max_len: int,
                 allow_empty: bool = True) -> Word:
    lo = 0 if allow_empty else 1
    n = rng.randint(lo, max_len)
    if n == 0:
        return EMPTY_WORD
    w = [rng.randrange(sys.alphabet_size)]
    for _ in range(n - 1):
        w.append(rng.choice(sys.successors(w[-1])))
    return tuple(w)


def random_element(sys: IncidenceSystem, rng: random.Random, max_len: int = 4,
                   n_terms: int = 2) -> AlgebraElement:
    """A small random element: random word pairs with random locally
    constant complex coefficients of depth <= 2."""
    terms = []
    for _ in range(n_terms):
        v = _random_word(sys, rng, max_len)
        w = _random_word(sys, rng, max_len)
        d = rng.randint(1, 2)
        coeff = LocallyConstantFunction(
            sys, d, {u: complex(rng.gauss(0, 1), rng.gauss(0, 1))
                     for u in admissible_words(sys, d)})
        terms.append(Term(coeff, v, w))
    return AlgebraElement.from_terms(sys, terms)


def check_suite(mu: CylinderMeasure, H: LocallyConstantFunction, beta: float,
                samples: int = 50, seed: int = 0, word_cap: int = 4) -> dict:
    """Max residuals, over sampled elements, of the state identities that
    characterize equilibrium at inverse temperature beta.

    The caller may pass a measure that is NOT a dual fixed point of the
    transfer operator at -beta*H; the report then shows where equilibrium
    fails (the dual-invariance row is the sensitive one).  Reports are data,
    never exceptions.
    """
    sys = mu.system
    rng = random.Random(seed)
    sigma = lambda a: state_eval(mu, a)

    kms = 0.0
    invariance = 0.0
    centralizer = 0.0
    dual_invariance = 0.0
    conformality_fwd = 0.0
    conformality_bwd = 0.0
    faithfulness_min = math.inf
    gauge_offdiag_equal = 0.0
    gauge_offdiag_unequal = 0.0
    unequal_applicable = min(H.values.values()) > 0.0

    e_minus_beta_H = AlgebraElement.from_function((H * (-beta)).exp())
    generators = [AlgebraElement.generator(sys, j) for j in range(sys.alphabet_size)]

    for _ in range(samples):
        x = random_element(sys, rng, word_cap)
        y = random_element(sys, rng, word_cap)

        kms = max(kms, kms_residual(mu, H, beta, x, y))

        z = complex(rng.gauss(0, 1), rng.gauss(0, 1))
        invariance = max(invariance, abs(sigma(gauge(x, GaugeParameters(H, z))) - sigma(x)))

        d = rng.randint(1, 2)
        f = AlgebraElement.from_function(LocallyConstantFunction(
            sys, d, {u: complex(rng.gauss(0, 1), rng.gauss(0, 1))
                     for u in admissible_words(sys, d)}))
        centralizer = max(centralizer, abs(sigma(x * f) - sigma(f * x)))

        pulled = sum((adjoint(s) * e_minus_beta_H * x * s for s in generators),
                     AlgebraElement.zero(sys))
        dual_invariance = max(dual_invariance, abs(sigma(pulled) - sigma(x)))

        if not x.is_zero(1e-9):
            val = sigma(adjoint(x) * x).real
            faithfulness_min = min(faithfulness_min, val)

        # conformality on a random admissible splitting vw
        vw = _random_word(sys, rng, word_cap, allow_empty=False)
        if len(vw) >= 2:
            cut = rng.randint(1, len(vw) - 1)
            v, w = vw[:cut], vw[cut:]
            m = len(v)
            proj_vw = AlgebraElement.word_pair(sys, vw, vw)
            proj_w = AlgebraElement.word_pair(sys, w, w)
            smh = H.birkhoff(m)
            fwd = AlgebraElement.from_function(
                (smh * (-beta)).exp().compose_branch(v)) * proj_w
            conformality_fwd = max(conformality_fwd, abs(sigma(proj_vw) - sigma(fwd)))
            bwd = AlgebraElement.from_function((smh * beta).exp()) * proj_vw
            conformality_bwd = max(conformality_bwd, abs(sigma(proj_w) - sigma(bwd)))

        # vanishing on distinct word pairs of equal length
        n = rng.randint(1, word_cap)
        a = _random_word(sys, rng, n, allow_empty=False)
        while len(a) < n:
            a = _random_word(sys, rng, n, allow_empty=False)
        b = _random_word(sys, rng, n, allow_empty=False)
        while len(b) < n:
            b = _random_word(sys, rng, n, allow_empty=False)
        if a != b:
            gauge_offdiag_equal = max(gauge_offdiag_equal,
                                      abs(sigma(AlgebraElement.word_pair(sys, a, b))))
        if unequal_applicable:
            c = _random_word(sys, rng, word_cap, allow_empty=False)
            longer = _random_word(sys, rng, word_cap, allow_empty=False)
            if len(longer) != len(c):
                gauge_offdiag_unequal = max(
                    gauge_offdiag_unequal,
                    abs(sigma(AlgebraElement.word_pair(sys, c, longer))))

    report = {
        "kms_condition": kms,
        "state_invariance": invariance,
        "centralizer": centralizer,
        "dual_invariance": dual_invariance,
        "conformality_forward": conformality_fwd,
        "conformality_backward": conformality_bwd,
        "offdiagonal_equal_length": gauge_offdiag_equal,
        "faithfulness_min": (None if faithfulness_min is math.inf
                             else faithfulness_min),
        "faithfulness_applicable": bool(is_irreducible(sys)
                                        and min(mu.weights.values()) > 0.0),
        "offdiagonal_unequal_length": (gauge_offdiag_unequal
                                       if unequal_applicable else None),
        "offdiagonal_unequal_applicable": unequal_applicable,
        "samples": samples,
        "beta": beta,
    }
    return report
