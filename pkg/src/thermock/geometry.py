"""Piecewise-Moebius expanding interval maps and their geometric potentials.

A system is a family of disjoint closed intervals D_i together with
contractions g_i whose images are the D_i; the expanding map acts on D_i as
T_i = g_i^{-1}.  The incidence matrix is derived from coverage:
a_ij = 1 iff D_j is contained in T_i(D_i).  Two flavors are bundled:

* Schottky pairings: 2g generators listed as (g_1..g_g, g_1^{-1}..g_g^{-1});
  g_i maps the complement of the interval of its inverse letter onto its own
  interval, which forces a_ij = 0 exactly when j is the inverse letter of i.
* a parabolic two-branch system on [0,1] whose first branch fixes 0 with
  derivative one; it exercises the inducing machinery.

The geometric potential log|T'| is sampled at cylinder-interval midpoints,
giving a locally constant function at any requested depth together with the
interval diameters, so depth sensitivity is observable instead of assumed.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass

import numpy as np

from .errors import ConfigError, GeometryError
from .symbolic import IncidenceSystem, Word, admissible_words
from .transfer import LocallyConstantFunction

_GEOM_TOL = 1e-9


@dataclass(frozen=True)
class MoebiusMap:
    """x -> (a x + b)/(c x + d), stored with |ad - bc| = 1."""

    a: float
    b: float
    c: float
    d: float

    def __post_init__(self):
        det = self.a * self.d - self.b * self.c
        if abs(det) < 1e-14:
            raise ConfigError("Moebius map needs nonzero determinant")
        s = 1.0 / math.sqrt(abs(det))
        object.__setattr__(self, "a", self.a * s)
        object.__setattr__(self, "b", self.b * s)
        object.__setattr__(self, "c", self.c * s)
        object.__setattr__(self, "d", self.d * s)

    def __call__(self, x: float) -> float:
        denom = self.c * x + self.d
        if denom == 0.0:
            return math.inf
        return (self.a * x + self.b) / denom

    def derivative_abs(self, x: float) -> float:
        """|T'(x)| = 1/(cx+d)^2 for normalized coefficients."""
        denom = self.c * x + self.d
        if denom == 0.0:
            raise GeometryError(f"derivative evaluated at the pole x={x}")
        return 1.0 / (denom * denom)

    def pole(self) -> float:
        return math.inf if self.c == 0.0 else -self.d / self.c

    def inverse(self) -> "MoebiusMap":
        return MoebiusMap(self.d, -self.b, -self.c, self.a)

    def compose(self, other: "MoebiusMap") -> "MoebiusMap":
        return MoebiusMap(
            self.a * other.a + self.b * other.c,
            self.a * other.b + self.b * other.d,
            self.c * other.a + self.d * other.c,
            self.c * other.b + self.d * other.d)

    @classmethod
    def from_three_points(cls, z, w) -> "MoebiusMap":
        """The map sending the triple z to the triple w (entries may be inf)."""
        def to_01inf(p):
            p1, p2, p3 = p
            # sends p1 -> 0, p2 -> 1, p3 -> inf
            if math.isinf(p1):
                return cls(0.0, p2 - p3, 1.0, -p3)
            if math.isinf(p2):
                return cls(1.0, -p1, 1.0, -p3)
            if math.isinf(p3):
                return cls(1.0, -p1, 0.0, p2 - p1)
            return cls(p2 - p3, -p1 * (p2 - p3), p2 - p1, -p3 * (p2 - p1))
        mz, mw = to_01inf(z), to_01inf(w)
        return mw.inverse().compose(mz)

    def map_interval(self, lo: float, hi: float) -> tuple[float, float]:
        """Image of [lo, hi]; requires the pole outside the open interval."""
        p = self.pole()
        if lo < p < hi:
            raise GeometryError(f"pole {p} inside interval [{lo},{hi}]")
        x, y = self(lo), self(hi)
        return (x, y) if x <= y else (y, x)

    def image_of_exterior(self, lo: float, hi: float) -> tuple[float, float]:
        """Image of the complement of (lo, hi); requires the pole inside, so
        the image is the bounded interval between the endpoint images."""
        p = self.pole()
        if not lo < p < hi:
            raise GeometryError(f"pole {p} not inside [{lo},{hi}]")
        x, y = self(lo), self(hi)
        return (x, y) if x <= y else (y, x)


# ---------------------------------------------------------------------------
# interval Markov systems
# ---------------------------------------------------------------------------


class IntervalMarkovSystem:
    """Disjoint intervals with one contraction per letter.

    ``contractions[i]`` maps its branch domain onto intervals[i]; the
    expanding branch on intervals[i] is its inverse.  The incidence matrix
    is derived from branch coverage.
    """

    def __init__(self, contractions, intervals, allow_neutral: bool = False):
        self.contractions = tuple(contractions)
        self.intervals = tuple((float(lo), float(hi)) for lo, hi in intervals)
        if len(self.contractions) != len(self.intervals):
            raise ConfigError("one contraction per interval required")
        for i, (lo, hi) in enumerate(self.intervals):
            if not lo < hi:
                raise ConfigError(f"interval {i} is empty or reversed")
        order = sorted(range(len(self.intervals)), key=lambda i: self.intervals[i])
        for prev, nxt in zip(order, order[1:]):
            if self.intervals[prev][1] > self.intervals[nxt][0] - 1e-13:
                raise GeometryError(
                    f"intervals {prev} and {nxt} overlap", pair=(prev, nxt))
        self.branches = tuple(g.inverse() for g in self.contractions)
        self.allow_neutral = allow_neutral
        self._check_expansion()
        self.system = IncidenceSystem(len(self.intervals), self._coverage_matrix())

    def _check_expansion(self):
        for i, ((lo, hi), T) in enumerate(zip(self.intervals, self.branches)):
            # |T'| = 1/(cx+d)^2 is minimized at an endpoint on any interval,
            # whether or not the pole lies inside
            dmin = min(T.derivative_abs(lo), T.derivative_abs(hi))
            if self.allow_neutral:
                if dmin < 1.0 - 1e-12:
                    raise GeometryError(f"branch {i} contracts: |T'| = {dmin} < 1")
            elif dmin <= 1.0 + 1e-12:
                raise GeometryError(f"branch {i} is not uniformly expanding "
                                    f"(min |T'| = {dmin})")

    def _branch_image(self, i: int):
        """Image of intervals[i] under its expanding branch: either
        ('bounded', lo, hi) or ('exterior', lo, hi) of an open interval."""
        lo, hi = self.intervals[i]
        T = self.branches[i]
        p = T.pole()
        if lo < p < hi:
            x, y = T(lo), T(hi)
            a, b = (x, y) if x <= y else (y, x)
            return ("exterior", a, b)
        a, b = T.map_interval(lo, hi)
        return ("bounded", a, b)

    def _coverage_matrix(self):
        n = len(self.intervals)
        rows = []
        for i in range(n):
            kind, a, b = self._branch_image(i)
            row = []
            for j in range(n):
                lo, hi = self.intervals[j]
                if kind == "bounded":
                    inside = a - _GEOM_TOL <= lo and hi <= b + _GEOM_TOL
                else:
                    inside = hi <= a + _GEOM_TOL or lo >= b - _GEOM_TOL
                row.append(1 if inside else 0)
            rows.append(tuple(row))
        return tuple(rows)

    # -- cylinder geometry ---------------------------------------------------

    def cylinder_interval(self, w: Word) -> tuple[float, float]:
        """The interval of the cylinder [w], nested by contraction."""
        lo, hi = self.intervals[w[-1]]
        for letter in reversed(w[:-1]):
            lo, hi = self.contractions[letter].map_interval(lo, hi)
        return lo, hi

    def branch_derivative(self, letter: int, x: float) -> float:
        return self.branches[letter].derivative_abs(x)

    # -- serialization ---------------------------------------------------------

    @classmethod
    def from_json(cls, doc: dict, allow_neutral: bool = False):
        gens = [MoebiusMap(float(g["a"]), float(g["b"]), float(g["c"]), float(g["d"]))
                for g in doc["generators"]]
        return cls(gens, doc["intervals"], allow_neutral=allow_neutral)

    def to_json(self) -> dict:
        return {"generators": [{"a": g.a, "b": g.b, "c": g.c, "d": g.d}
                               for g in self.contractions],
                "intervals": [list(iv) for iv in self.intervals]}


class SchottkySystem(IntervalMarkovSystem):
    """A genus-g pairing: generators (g_1..g_g, g_1^{-1}..g_g^{-1}).

    Each g_i maps the complement of the interval of its inverse letter onto
    its own interval; the derived incidence matrix then forbids exactly the
    transitions i -> inverse(i).
    """

    def __init__(self, contractions, intervals):
        n = len(tuple(contractions))
        if n % 2 != 0 or n < 4:
            raise ConfigError("a Schottky pairing needs 2*genus >= 4 generators")
        super().__init__(contractions, intervals, allow_neutral=False)
        self.genus = n // 2
        self._check_pairing()

    def partner(self, i: int) -> int:
        return (i + self.genus) % (2 * self.genus)

    def _check_pairing(self):
        n = 2 * self.genus
        for i in range(n):
            gi = self.contractions[i]
            gp = self.contractions[self.partner(i)]
            comp = gi.compose(gp)
            # g_{i+g} = g_i^{-1}: the composition is the identity up to sign
            if not (abs(abs(comp.a) - 1) < 1e-9 and abs(comp.b) < 1e-9
                    and abs(comp.c) < 1e-9 and abs(abs(comp.d) - 1) < 1e-9):
                raise GeometryError(
                    f"generators {i} and {self.partner(i)} are not inverse to "
                    "each other", pair=(i, self.partner(i)))
            # g_i maps the exterior of its partner interval onto its own
            plo, phi_ = self.intervals[self.partner(i)]
            img = gi.image_of_exterior(plo, phi_)
            lo, hi = self.intervals[i]
            if abs(img[0] - lo) > _GEOM_TOL or abs(img[1] - hi) > _GEOM_TOL:
                raise GeometryError(
                    f"generator {i} maps the exterior of interval "
                    f"{self.partner(i)} to {img}, not onto its interval "
                    f"({lo}, {hi})", pair=(i, self.partner(i)))
        expected = IncidenceSystem.schottky_matrix(self.genus)
        if self.system.matrix != expected.matrix:
            raise GeometryError("derived incidence is not the Schottky matrix")

    @classmethod
    def symmetric_example(cls) -> "SchottkySystem":
        """The bundled genus-2 example: intervals centered at -3, -1, 1, 3
        of radius 0.8, each generator pinned by the three-point pairing
        condition (exterior endpoints cross over, infinity to the center)."""
        centers = (-3.0, -1.0, 1.0, 3.0)
        r = 0.8
        intervals = [(c - r, c + r) for c in centers]
        gens = _pairing_generators(intervals, genus=2)
        return cls(gens, intervals)


def _pairing_generators(intervals, genus: int):
    """Generators for a pairing: g_i sends the exterior of interval
    (i+genus) onto interval i, with infinity landing at the center."""
    n = 2 * genus
    gens: list[MoebiusMap | None] = [None] * n
    for i in range(genus):
        lo_s, hi_s = intervals[i + genus]
        lo_t, hi_t = intervals[i]
        center = 0.5 * (lo_t + hi_t)
        g = MoebiusMap.from_three_points((hi_s, math.inf, lo_s), (lo_t, center, hi_t))
        gens[i] = g
        gens[i + genus] = g.inverse()
    return gens


def farey_type_system() -> IntervalMarkovSystem:
    """The canonical parabolic instance: branches x -> x/(1-x) on [0, 1/2]
    and x -> (1-x)/x on [1/2, 1], with one neutral fixed point at 0.

    The intervals are shrunk by nothing: the Markov images are exactly
    [0, 1], so the incidence matrix is full.
    """
    t0 = MoebiusMap(1.0, 0.0, -1.0, 1.0)   # x/(1-x)
    t1 = MoebiusMap(-1.0, 1.0, 1.0, 0.0)   # (1-x)/x
    sysm = IntervalMarkovSystem([t0.inverse(), t1.inverse()],
                                [(0.0, 0.5), (0.5, 1.0)], allow_neutral=True)
    # the defining feature: derivative exactly 1 at the left endpoint
    if abs(sysm.branches[0].derivative_abs(0.0) - 1.0) > 1e-12:
        raise GeometryError("first branch is not neutral at 0")
    return sysm


# ---------------------------------------------------------------------------
# geometric potentials and dimensions
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class CylinderGeometry:
    """log|T'| at cylinder midpoints, plus the intervals themselves."""

    potential: LocallyConstantFunction
    intervals: dict
    max_diameter: float

    def diameters(self) -> dict:
        return {w: hi - lo for w, (lo, hi) in self.intervals.items()}


def bowen_series_potential(geom: IntervalMarkovSystem, depth: int) -> CylinderGeometry:
    """J([w]) = log |T'(midpoint of the [w] interval)| at the given depth."""
    if depth < 1:
        raise ConfigError("potential depth must be >= 1")
    sys = geom.system
    values = {}
    intervals = {}
    max_diam = 0.0
    for w in admissible_words(sys, depth):
        lo, hi = geom.cylinder_interval(w)
        mid = 0.5 * (lo + hi)
        values[w] = math.log(geom.branch_derivative(w[0], mid))
        intervals[w] = (lo, hi)
        max_diam = max(max_diam, hi - lo)
    return CylinderGeometry(
        potential=LocallyConstantFunction(sys, depth, values),
        intervals=intervals, max_diameter=max_diam)


@dataclass(frozen=True)
class DimensionEstimate:
    value: float
    next_value: float
    depth: int
    gap: float


def limit_set_dimension(geom: IntervalMarkovSystem, depth: int) -> DimensionEstimate:
    """Root of the pressure equation for the depth-d potential, reported with
    the depth-(d+1) value so convergence is visible."""
    from .spectrum import bowen_root
    j_d = bowen_series_potential(geom, depth).potential
    j_next = bowen_series_potential(geom, depth + 1).potential
    v = bowen_root(geom.system, j_d)
    v_next = bowen_root(geom.system, j_next)
    return DimensionEstimate(value=v, next_value=v_next, depth=depth,
                             gap=abs(v - v_next))


def boxcount_dimension(geom: IntervalMarkovSystem, depth: int, scales) -> float:
    """Least-squares slope of log N(eps) against log 1/eps, where N counts
    grid boxes of side eps meeting the union of depth-d cylinder intervals."""
    scales = [float(e) for e in scales]
    if len(scales) < 3:
        raise ConfigError("box counting needs at least 3 scales")
    cg = bowen_series_potential(geom, depth)
    pieces = sorted(cg.intervals.values())
    logs_inv_eps = []
    logs_n = []
    for eps in scales:
        boxes = set()
        for lo, hi in pieces:
            k0 = math.floor(lo / eps)
            k1 = math.floor(hi / eps)
            boxes.update(range(k0, k1 + 1))
        logs_inv_eps.append(math.log(1.0 / eps))
        logs_n.append(math.log(len(boxes)))
    slope = np.polyfit(logs_inv_eps, logs_n, 1)[0]
    return float(slope)


# ---------------------------------------------------------------------------
# bundled toy systems
# ---------------------------------------------------------------------------


def cantor_middle_thirds() -> IntervalMarkovSystem:
    """Two affine branches of slope 3 on the middle-thirds construction."""
    g0 = MoebiusMap(1.0, 0.0, 0.0, 3.0)   # x/3
    g1 = MoebiusMap(1.0, 2.0, 0.0, 3.0)   # (x+2)/3
    return IntervalMarkovSystem([g0, g1], [(0.0, 1.0 / 3.0), (2.0 / 3.0, 1.0)])


def system_from_json(doc: dict) -> IntervalMarkovSystem:
    kind = doc.get("type", "interval_markov")
    if kind == "schottky":
        return SchottkySystem.from_json(doc)
    if kind == "farey":
        return farey_type_system()
    if kind == "interval_markov":
        return IntervalMarkovSystem.from_json(doc)
    raise ConfigError(f"unknown geometry type {kind!r}")


def system_from_json_file(path) -> IntervalMarkovSystem:
    with open(path) as fh:
        return system_from_json(json.load(fh))
