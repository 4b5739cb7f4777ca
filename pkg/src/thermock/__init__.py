"""Thermodynamic formalism on subshifts of finite type.

Transfer operators and pressure for locally constant potentials,
Cuntz-Krieger normal forms with KMS-state verification, Radon-Nikodym
representations, Lyapunov/multifractal spectra for piecewise-Moebius
interval maps, and first-return inducing with Kac lifting.
"""

from .symbolic import (IncidenceSystem, Word, admissible_words,
                       cylinder_metric, inverse_branch, is_irreducible,
                       shift_cylinder)
from .transfer import (CylinderMeasure, EigenData, GibbsData,
                       LocallyConstantFunction, gibbs_measure, integrate,
                       leading_eigen, pressure, rn_derivative,
                       transfer_matrix, weak_gibbs_profile)

__all__ = [
    "IncidenceSystem", "Word", "admissible_words", "cylinder_metric",
    "inverse_branch", "is_irreducible", "shift_cylinder",
    "CylinderMeasure", "EigenData", "GibbsData", "LocallyConstantFunction",
    "gibbs_measure", "integrate", "leading_eigen", "pressure",
    "rn_derivative", "transfer_matrix", "weak_gibbs_profile",
]

__version__ = "0.1.0"
