"""Additive-model component estimators for replicated panels.

Two estimator families for Y_gj = alpha_g + m_j(X_gj) + eps_gj: the
noniterative integration estimator built for highly correlated covariates,
pooled backfitting for ordinary correlation, and a pooled L1 alternative
robust to outliers. Includes the Monte Carlo laboratory used to compare
them.
"""

from ._addfit import *  # noqa: F401,F403
from ._addfit import __version__  # noqa: F401
