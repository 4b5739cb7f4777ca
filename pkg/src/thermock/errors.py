"""Exception hierarchy shared by all modules.

Validation problems (bad matrices, malformed configs, measures that do not
satisfy a required structure) raise ValueError subclasses; failures of the
numerics themselves (solver stalls, truncation tails too large, diverging
normalizers) raise NumericalError subclasses.  The CLI maps the former to
exit code 1 and the latter to exit code 2.
"""

from __future__ import annotations


class ConfigError(ValueError):
    """Malformed or inconsistent input (JSON config, matrix, measure)."""


class GeometryError(ValueError):
    """Interval system violates separation / expansion requirements."""

    def __init__(self, message: str, pair: tuple[int, int] | None = None):
        super().__init__(message)
        self.pair = pair


class ZeroMassError(ValueError):
    """A cylinder inside the support carries no mass; named in the message."""

    def __init__(self, message: str, cylinder: tuple[int, ...] | None = None):
        super().__init__(message)
        self.cylinder = cylinder


class NumericalError(RuntimeError):
    """Base class for failures of the numerics at run time."""


class EigenConvergenceError(NumericalError):
    """Power iteration did not converge; input likely reducible/degenerate."""


class OutOfSpectrumRange(NumericalError):
    """Requested spectrum parameter lies outside the solvable bracket."""

    def __init__(self, message: str, admissible: tuple[float, float] | None = None):
        super().__init__(message)
        self.admissible = admissible


class CapacityError(NumericalError):
    """An enumeration would exceed the configured word-count cap."""


class TruncationError(NumericalError):
    """Tail mass beyond the truncation bound is too large to certify."""

    def __init__(self, message: str, tail: float | None = None,
                 spectral_radius: float | None = None):
        super().__init__(message)
        self.tail = tail
        self.spectral_radius = spectral_radius


class NormalizerDiverges(NumericalError):
    """The return-time integral does not converge at the truncation depth."""


class HypothesisError(NumericalError):
    """A required identity fails on some block; the worst block is attached."""

    def __init__(self, message: str, block: tuple | None = None,
                 defect: float | None = None):
        super().__init__(message)
        self.block = block
        self.defect = defect
