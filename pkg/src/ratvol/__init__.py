"""Exact filtering and moment estimation for stochastic volatility models
with rational (e.g. Cauchy, odd-dof Student t) disturbance densities."""

__version__ = '0.1.0'

from .errors import (ConfigError, FactorizationError, MomentExistenceError,
                     RatvolError, StepFailure)
from .ratpdf import (RationalPdf, SpectralFactor, SpectralSummand, factor_from_summand,
                     make_cauchy, make_scaled_t_odd, pdf_eval)
from .svfilter import SvModel, run

__all__ = ['__version__', 'RatvolError', 'ConfigError', 'FactorizationError',
           'MomentExistenceError', 'StepFailure', 'RationalPdf', 'SpectralSummand',
           'SpectralFactor', 'factor_from_summand', 'make_cauchy', 'make_scaled_t_odd',
           'pdf_eval', 'SvModel', 'run']
