"""Certified lower bounds for Bohnenblust-Hille polynomial and multilinear constants.

The library computes the coefficient-norm-to-sup-norm quotients of the
classical extremal families (and their powers), exact multilinear vertex
norms, fixed-dimension contractivity constants, and growth-rate aggregates,
all at configurable working precision.  The ``bh`` command line exposes the
table reproductions and the invariant suite.
"""

from .bounds import (
    BoundRecord,
    HyperEstimate,
    bh_lower_bound,
    complex_lower_bound,
    contractivity_dm,
    estimate_4n,
    find_b1,
    find_b1_numeric,
    find_lambda01,
    hyper_aggregate,
    ksz_experiment,
    p2k_bounds,
    power_bound,
    search_m2,
    search_m3,
    search_m6,
    stirling_growth_base,
    stirling_lower,
)
from .errors import (
    BHError,
    ConvergenceFailure,
    DimensionMismatch,
    InvalidParameter,
    NotHomogeneous,
    ParseError,
)
from .families import FamilyExtremum, FamilySpec, bernoulli_random, certified_norm, make_family, tm_form
from .multilinear import (
    MultilinearForm,
    cm_lower_bound,
    ml_coeff_lq_norm,
    ml_eval,
    ml_new,
    ml_sup_norm_bruteforce,
    polar_form,
    polarization_norm_check,
)
from .polycore import (
    HomogeneousPoly,
    LpNormValue,
    coeff_lp_norm,
    deserialize,
    eval_complex,
    eval_real,
    lp_interpolation_bounds,
    poly_add,
    poly_mul,
    poly_new,
    poly_pow,
    serialize,
)
from .precision import DEFAULT_DPS, working
from .report import RunConfig
from .supnorm import (
    OptimizerConfig,
    SupNormResult,
    complex_torus_sup_estimate,
    sup_norm_bivariate,
    sup_norm_multistart,
    sup_norm_p2k_analytic,
    sup_norm_pab_closed,
    sup_norm_qab,
    univariate_max_abs,
)

__version__ = "0.1.0"
