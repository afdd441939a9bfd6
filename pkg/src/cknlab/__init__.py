"""Numerical toolkit for the sharp radial Caffarelli-Kohn-Nirenberg inequality."""
from __future__ import annotations

__version__ = "0.1.0"

from .errors import (  # noqa: E402
    CKNError, DegenerateProfile, DivergentIntegral, DomainError, InvalidConstant,
    InvalidParams, NoLimit, NonConvergence, NumericalError, QuadratureFailure,
)
from .params import CknParams, RawParams, derive, validate  # noqa: E402
from .radial import RadialMeasure, doubling_constant, origin_density, parse_model_spec  # noqa: E402
from .profiles import (  # noqa: E402
    CutoffProfile, ExtremalProfile, SampledProfile, SumProfile, bump_profile, dilate_profile,
)
from .quadrature import QuadConfig  # noqa: E402
from .functionals import WeightedNorms, ckn_quotient, weighted_norms  # noqa: E402
from .constant import copt_closed_form, copt_quadrature  # noqa: E402
from .optimizer import MinimizeConfig, best_constant, minimize_family, minimize_grid  # noqa: E402
