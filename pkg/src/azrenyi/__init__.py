"""alpha-z relative Renyi entropies: evaluation, limits and verification tools."""

from .errors import *  # noqa: F401,F403
from .divergence import (DivergenceParams, alpha_rre, classical_renyi, d_alpha_z, d_max, d_min,
                         d_z_infinity, f_pq, log_trace_functional, qrd, relative_entropy, reverse_qrd,
                         trace_functional)
from .limits import (MinorVector, SigmaHat, ZeroZeroLimit, limit_alpha1, limit_alpha1_quotient,
                     limit_alpha_inf, limit_alpha_neg_inf, limit_zero_zero, minor_vector)
from .channels import (DpiReport, KrausChannel, apply, classify_region, dpi_check, dpi_scan,
                       random_channel)
from .states import RandomSpec, fidelity, random_density, random_unitary

__version__ = "0.1.0"
