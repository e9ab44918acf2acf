"""Waiting-time moments and distributions of GI/G/1 queues in heavy traffic.

Exact moments come from a contour-integral representation of the waiting
time transform, evaluated by adaptive quadrature. They are compared with
the exponential limits of the classical and nearly deterministic Kingman
regimes and with the Gaussian-walk limit of the nearly deterministic
Gaussian regime.
"""
from .approximations import (classical_kingman, nd_gaussian_refined,
                             nd_gaussian_standard, nd_kingman, regime_params)
from .distributions import (Bates, Deterministic, Gamma, InverseGaussian,
                            LatticeM, TwoPoint, from_dict)
from .errors import ConfigError, HTQueueError
from .gaussian_walk import mgw_cumulants, mgw_moments
from .lst_inversion import (EulerConfig, LSTHandle, atom_at_zero, invert_cdf,
                            make_approx_lst, make_exact_lst)
from .moments import (exact_cumulants, exact_scaled_moments,
                      moments_from_cumulants, prob_wait_zero)
from .quadrature import QuadratureConfig
from .simulation import SimConfig, simulate_waiting
from .transform import (QueueInstance, ThinnedQueueInstance, find_saddle_point,
                        gaussian_regime_params)
from .zeta import riemann_zeta

__version__ = "0.1.0"
