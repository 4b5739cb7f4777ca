"""Subshifts of finite type: alphabet, incidence matrix, words, cylinders.

Everything downstream consumes these primitives.  A word is a plain tuple of
letters (ints in ``range(alphabet_size)``); admissibility is checked at the
public construction points, and enumeration routines only ever generate
admissible words, so invalid words do not circulate.

Cylinder enumeration order is lexicographic everywhere.  All matrices and
measure vectors indexed by depth-``n`` words use this order, which keeps
regression output deterministic.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from functools import lru_cache

from .errors import ConfigError

Word = tuple[int, ...]

EMPTY_WORD: Word = ()


@dataclass(frozen=True)
class IncidenceSystem:
    """A finite alphabet together with a 0/1 transition matrix.

    Every row and every column must contain at least one 1, so the shift has
    no dead letters in either direction and cylinder enumeration never
    produces an empty level.
    """

    alphabet_size: int
    matrix: tuple[tuple[int, ...], ...]

    def __post_init__(self):
        n = self.alphabet_size
        if n < 2:
            raise ConfigError(f"alphabet size must be >= 2, got {n}")
        if len(self.matrix) != n:
            raise ConfigError(f"matrix has {len(self.matrix)} rows, expected {n}")
        for i, row in enumerate(self.matrix):
            if len(row) != n:
                raise ConfigError(f"matrix row {i} has length {len(row)}, expected {n}")
            for j, a in enumerate(row):
                if a not in (0, 1):
                    raise ConfigError(f"matrix entry ({i},{j}) is {a}, must be 0 or 1")
        for i, row in enumerate(self.matrix):
            if not any(row):
                raise ConfigError(f"row {i} has no 1: letter {i} has no admissible successor")
        for j in range(n):
            if not any(self.matrix[i][j] for i in range(n)):
                raise ConfigError(f"column {j} has no 1: letter {j} has no admissible predecessor")

    # -- word construction / admissibility ---------------------------------

    def allows(self, i: int, j: int) -> bool:
        return self.matrix[i][j] == 1

    def word(self, letters) -> Word:
        """Validate a letter sequence and return it as a Word tuple."""
        w = tuple(int(x) for x in letters)
        for x in w:
            if not 0 <= x < self.alphabet_size:
                raise ConfigError(f"letter {x} outside alphabet of size {self.alphabet_size}")
        for a, b in zip(w, w[1:]):
            if not self.allows(a, b):
                raise ConfigError(f"word {format_word(w)} not admissible: forbidden pair ({a},{b})")
        return w

    def is_admissible(self, letters) -> bool:
        w = tuple(letters)
        return all(0 <= x < self.alphabet_size for x in w) and all(
            self.allows(a, b) for a, b in zip(w, w[1:]))

    def successors(self, letter: int) -> tuple[int, ...]:
        return tuple(j for j in range(self.alphabet_size) if self.matrix[letter][j])

    def predecessors(self, letter: int) -> tuple[int, ...]:
        return tuple(i for i in range(self.alphabet_size) if self.matrix[i][letter])

    def extend(self, w: Word, j: int) -> Word | None:
        """w concatenated with letter j, or None if the junction is forbidden."""
        if w and not self.allows(w[-1], j):
            return None
        return w + (j,)

    def concat(self, v: Word, w: Word) -> Word | None:
        """v concatenated with w, or None if the junction is forbidden."""
        if v and w and not self.allows(v[-1], w[0]):
            return None
        return v + w

    # -- serialization ------------------------------------------------------

    @classmethod
    def from_json(cls, doc: dict) -> "IncidenceSystem":
        if not isinstance(doc, dict) or "alphabet" not in doc or "matrix" not in doc:
            raise ConfigError('incidence system document needs keys "alphabet" and "matrix"')
        matrix = tuple(tuple(int(x) for x in row) for row in doc["matrix"])
        return cls(int(doc["alphabet"]), matrix)

    @classmethod
    def from_json_file(cls, path) -> "IncidenceSystem":
        with open(path) as fh:
            return cls.from_json(json.load(fh))

    @classmethod
    def full_shift(cls, n: int) -> "IncidenceSystem":
        return cls(n, tuple(tuple(1 for _ in range(n)) for _ in range(n)))

    @classmethod
    def golden_mean(cls) -> "IncidenceSystem":
        return cls(2, ((1, 1), (1, 0)))

    @classmethod
    def schottky_matrix(cls, genus: int) -> "IncidenceSystem":
        """2*genus letters; the only forbidden successor of i is its inverse
        letter (i + genus) mod (2*genus)."""
        n = 2 * genus
        rows = []
        for i in range(n):
            partner = (i + genus) % n
            rows.append(tuple(0 if j == partner else 1 for j in range(n)))
        return cls(n, tuple(rows))


# ---------------------------------------------------------------------------
# word / cylinder combinatorics
# ---------------------------------------------------------------------------

@lru_cache(maxsize=None)
def _admissible_words_cached(sys: IncidenceSystem, n: int) -> tuple[Word, ...]:
    if n == 1:
        return tuple((i,) for i in range(sys.alphabet_size))
    shorter = _admissible_words_cached(sys, n - 1)
    out = []
    for w in shorter:
        last = w[-1]
        for j in range(sys.alphabet_size):
            if sys.matrix[last][j]:
                out.append(w + (j,))
    return tuple(out)


def admissible_words(sys: IncidenceSystem, n: int) -> list[Word]:
    """All admissible words of length n, in lexicographic order."""
    if n < 1:
        raise ConfigError(f"word length must be >= 1, got {n}")
    return list(_admissible_words_cached(sys, n))


@lru_cache(maxsize=None)
def word_index(sys: IncidenceSystem, n: int) -> dict:
    """Position of each admissible depth-n word in lexicographic order."""
    return {w: i for i, w in enumerate(_admissible_words_cached(sys, n))}


def is_irreducible(sys: IncidenceSystem) -> bool:
    """True iff every letter reaches every letter along admissible paths."""
    n = sys.alphabet_size
    for start in range(n):
        seen = set()
        stack = [j for j in range(n) if sys.matrix[start][j]]
        while stack:
            v = stack.pop()
            if v in seen:
                continue
            seen.add(v)
            stack.extend(j for j in range(n) if sys.matrix[v][j] and j not in seen)
        if len(seen) != n:
            return False
    return True


def inverse_branch(sys: IncidenceSystem, w: Word, tail: Word) -> Word | None:
    """The cylinder tau_w maps [tail] into: w+tail, or None if forbidden.

    None encodes the empty branch (the inverse branch of the n-fold shift
    through [w] is not defined over [tail]).
    """
    if not w:
        return tail
    if not tail:
        return w
    if not sys.allows(w[-1], tail[0]):
        return None
    return w + tail


def shift_cylinder(sys: IncidenceSystem, w: Word, k: int) -> Word:
    """The word (w_k ... w_{n-1}); the k-fold shift maps [w] onto it."""
    if not 0 <= k <= len(w) - 1:
        raise ConfigError(f"shift offset {k} out of range for word of length {len(w)}")
    return w[k:]


def cylinder_metric(x, y) -> float:
    """2^(-k) with k the first index where the sequences differ; 0 if equal.

    Finite sequences of different lengths differ at the first missing index.
    """
    x = tuple(x)
    y = tuple(y)
    if x == y:
        return 0.0
    k = min(len(x), len(y))
    for i, (a, b) in enumerate(zip(x, y)):
        if a != b:
            k = i
            break
    return 2.0 ** (-k)


# ---------------------------------------------------------------------------
# word formatting for configs, CSV output and error messages
# ---------------------------------------------------------------------------

def format_word(w: Word) -> str:
    if not w:
        return "-"
    if all(x < 10 for x in w):
        return "".join(str(x) for x in w)
    return ",".join(str(x) for x in w)


def parse_word(sys: IncidenceSystem, text: str) -> Word:
    text = text.strip()
    if text in ("", "-"):
        return EMPTY_WORD
    if "," in text:
        letters = [int(t) for t in text.split(",")]
    else:
        letters = [int(ch) for ch in text]
    return sys.word(letters)
