"""Concrete operators realizing the partial isometries on an L2 space.

Given a measure m with positive cylinder masses and continuous cocycle
rho = d(m o theta)/dm, the letter i acts on square-integrable functions by

    s_i : f  ->  1_{[i]} * rho^{1/2} * f o theta

with adjoint the weighted pullback along the inverse branch.  On the graded
union of locally constant subspaces these operators are exact: applying s_i
to a depth-n function gives a depth-(n+1) function, nothing is truncated,
and adjointness can be checked as a finite identity.

The generator relations hold with residual limited only by the sqrt
cancellations, which is the executable content of the representation being
an isomorphic copy of the word algebra when the incidence matrix is
irreducible.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

from .errors import ConfigError, ZeroMassError
from .symbolic import IncidenceSystem, Word, admissible_words, format_word
from .transfer import (CylinderMeasure, LocallyConstantFunction, integrate,
                       rn_derivative)
from .ckalgebra import AlgebraElement, state_eval

GradedFunction = LocallyConstantFunction


@dataclass(frozen=True)
class RNRepContext:
    """A measure, its depth-2 cocycle, and the system they live on.

    The measure must be Markov-consistent at depth 2 (its deeper masses, if
    stored, factor through the depth-2 chain); measures that are not are
    rejected rather than approximated.  All depth-2 masses must be positive
    so the cocycle is defined everywhere on the support.
    """

    system: IncidenceSystem
    m: CylinderMeasure = field(compare=False)
    rho: LocallyConstantFunction = field(compare=False)

    @classmethod
    def build(cls, sys: IncidenceSystem, m: CylinderMeasure) -> "RNRepContext":
        if m.depth > 2 and not m.is_markov_at_depth_two():
            raise ConfigError("measure is not Markov-consistent at depth 2")
        m2 = m.at_depth(2)
        for w, mass in m2.weights.items():
            if mass <= 0.0:
                raise ZeroMassError(
                    f"cylinder [{format_word(w)}] has zero mass; cocycle undefined",
                    cylinder=w)
        rho = rn_derivative(sys, m2)
        jac = rho.log()
        return cls(system=sys, m=m2.with_jacobian(jac), rho=rho)

    def inner(self, f: GradedFunction, g: GradedFunction) -> complex:
        """<f, g> = integral of conj(f) * g against the measure."""
        return complex(integrate(self.m, f.conjugate() * g))


def apply_s(ctx: RNRepContext, i: int, f: GradedFunction) -> GradedFunction:
    """s_i f: value rho([i w])^(1/2) f([w]) on [i w], zero off [i]."""
    sys = ctx.system
    n = f.depth
    vals = {}
    for u in admissible_words(sys, n + 1):
        if u[0] != i:
            vals[u] = 0.0
        else:
            vals[u] = math.sqrt(ctx.rho(u[:2])) * f.values[u[1:]]
    return GradedFunction(sys, n + 1, vals)


def apply_s_star(ctx: RNRepContext, i: int, f: GradedFunction) -> GradedFunction:
    """s_i* f: value rho([i w])^(-1/2) f([i w]) on [w] when i w is admissible,
    zero where [w] falls outside the image of the branch."""
    sys = ctx.system
    n = max(f.depth - 1, 1)
    fd = f.at_depth(n + 1)
    vals = {}
    for w in admissible_words(sys, n):
        if not sys.allows(i, w[0]):
            vals[w] = 0.0
        else:
            vals[w] = fd.values[(i,) + w] / math.sqrt(ctx.rho((i, w[0])))
    return GradedFunction(sys, n, vals)


def apply_word(ctx: RNRepContext, w: Word, f: GradedFunction) -> GradedFunction:
    """s_{w_0} ... s_{w_last} applied to f (rightmost letter acts first)."""
    for letter in reversed(w):
        f = apply_s(ctx, letter, f)
    return f


def apply_word_star(ctx: RNRepContext, w: Word, f: GradedFunction) -> GradedFunction:
    """(s_w)* = s*_{w_last} ... s*_{w_0} applied to f (s*_{w_0} acts first)."""
    for letter in w:
        f = apply_s_star(ctx, letter, f)
    return f


def relation_residuals(ctx: RNRepContext, depth_cap: int) -> dict:
    """Defects of the two generator relations on indicator bases.

    relation 1:  sum_j s_j s_j* = identity
    relation 2:  s_i* s_i = sum_j a_ij s_j s_j*

    evaluated on every cylinder indicator of depth <= depth_cap; the report
    carries the max sup-norm defect of each relation.
    """
    sys = ctx.system
    r1 = 0.0
    r2 = 0.0
    for depth in range(1, depth_cap + 1):
        for u in admissible_words(sys, depth):
            f = GradedFunction.indicator(sys, u)
            total = GradedFunction.constant(sys, 0.0)
            for j in range(sys.alphabet_size):
                total = total + apply_s(ctx, j, apply_s_star(ctx, j, f))
            r1 = max(r1, (total - f).max_abs())
            for i in range(sys.alphabet_size):
                lhs = apply_s_star(ctx, i, apply_s(ctx, i, f))
                rhs = GradedFunction.constant(sys, 0.0)
                for j in range(sys.alphabet_size):
                    if sys.matrix[i][j]:
                        rhs = rhs + apply_s(ctx, j, apply_s_star(ctx, j, f))
                r2 = max(r2, (lhs - rhs).max_abs())
    return {"relation1_residual": r1, "relation2_residual": r2,
            "depth_cap": depth_cap}


def adjointness_residual(ctx: RNRepContext, samples: int = 50,
                         seed: int = 0, depth_cap: int = 3) -> float:
    """max over random pairs of |<f, s_i g> - <s_i* f, g>|."""
    import random
    rng = random.Random(seed)
    sys = ctx.system
    worst = 0.0
    for _ in range(samples):
        i = rng.randrange(sys.alphabet_size)
        df = rng.randint(1, depth_cap)
        dg = rng.randint(1, depth_cap)
        f = GradedFunction(sys, df, {u: complex(rng.gauss(0, 1), rng.gauss(0, 1))
                                     for u in admissible_words(sys, df)})
        g = GradedFunction(sys, dg, {u: complex(rng.gauss(0, 1), rng.gauss(0, 1))
                                     for u in admissible_words(sys, dg)})
        lhs = ctx.inner(f, apply_s(ctx, i, g))
        rhs = ctx.inner(apply_s_star(ctx, i, f), g)
        worst = max(worst, abs(lhs - rhs))
    return worst


def vector_state(ctx: RNRepContext, x: AlgebraElement) -> complex:
    """(1, X 1) in the representation: apply each term to the constant
    function and integrate against the measure."""
    one = GradedFunction.constant(ctx.system, 1.0 + 0.0j)
    total = 0.0 + 0.0j
    for t in x.terms:
        f = apply_word(ctx, t.left, apply_word_star(ctx, t.right, one))
        total += complex(integrate(ctx.m, t.coeff * f))
    return total


def compare_states(ctx: RNRepContext, word_cap: int = 2) -> dict:
    """Tabulate vector state vs projection state on all word pairs up to
    word_cap.

    Diagonal entries must agree (both are the cylinder mass); off-diagonal
    entries generally do **not** agree - the vector state of S_v S_w* is the
    measure of an overlap cylinder while the projection state vanishes -
    and the table reports those differences as data rather than failures.
    """
    sys = ctx.system
    words: list[Word] = [()]
    for n in range(1, word_cap + 1):
        words.extend(admissible_words(sys, n))
    rows = []
    max_diag = 0.0
    max_off = 0.0
    for v in words:
        for w in words:
            if not sys.is_admissible(v) or not sys.is_admissible(w):
                continue
            x = AlgebraElement.word_pair(sys, v, w)
            vec = vector_state(ctx, x)
            proj = state_eval(ctx.m, x)
            diff = abs(vec - proj)
            rows.append({"left": format_word(v), "right": format_word(w),
                         "vector_state": _c2pair(vec), "projection_state": _c2pair(proj),
                         "difference": diff})
            if v == w:
                max_diag = max(max_diag, diff)
            else:
                max_off = max(max_off, diff)
    return {"word_cap": word_cap, "max_diagonal_difference": max_diag,
            "max_offdiagonal_difference": max_off, "rows": rows}


def _c2pair(z: complex) -> list[float]:
    return [z.real, z.imag]


def representation_report(ctx: RNRepContext, depth_cap: int = 3,
                          samples: int = 50, seed: int = 0) -> dict:
    """The JSON-ready bundle: relation defects, adjointness, state table."""
    rep = relation_residuals(ctx, depth_cap)
    rep["adjointness_residual"] = adjointness_residual(ctx, samples=samples, seed=seed)
    rep["state_comparison"] = compare_states(ctx)["rows"]
    return rep
