"""Exact symbolic workbench for Courant algebroids, Dirac structures,
Dorfman connections and their compatibility conditions, over coordinate
patches with rational-function coefficients.

Everything is certified by exact zero-tests; there is no floating point.
"""

from .scalars import Patch, ScalarField, parse_scalar
from .bundles import Frame, Section, Subbundle, TrivialBundle
from .cartan import cotangent, tangent
from .algebroid import (AnchoredBundle, DullAlgebroid, LinearConnection,
                        check_algebroid, tangent_algebroid)
from .dorfman import DorfmanConnection, check_dorfman_axioms
from .courant import (CourantPresentation, check_courant_axioms,
                      check_dirac, standard_courant)
from .bialgebroid import (DiracBialgebroid, LADiracTriple, build_courant_C,
                          check_la_dirac, check_manin_pair,
                          verify_appendix_lemmas)
from .reporting import CheckConfig, Report
from .zoo import run_zoo_pipeline, zoo_preset

__version__ = "0.1.0"

__all__ = [
    "Patch", "ScalarField", "parse_scalar",
    "Frame", "Section", "Subbundle", "TrivialBundle",
    "cotangent", "tangent",
    "AnchoredBundle", "DullAlgebroid", "LinearConnection",
    "check_algebroid", "tangent_algebroid",
    "DorfmanConnection", "check_dorfman_axioms",
    "CourantPresentation", "check_courant_axioms", "check_dirac",
    "standard_courant",
    "DiracBialgebroid", "LADiracTriple", "build_courant_C",
    "check_la_dirac", "check_manin_pair", "verify_appendix_lemmas",
    "CheckConfig", "Report",
    "run_zoo_pipeline", "zoo_preset",
    "__version__",
]
