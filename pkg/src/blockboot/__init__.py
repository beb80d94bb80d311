"""Hybrid block bootstrap for the distribution of kernel density estimates
under strong mixing."""

from .errors import BlockBootError, ConfigError, InfeasibleParameterError
from .harness import (
    ExperimentConfig,
    MseReport,
    OracleResult,
    cumulant_check,
    kde_bias_oracle,
    mse_experiment,
    sensitivity_scan,
    true_cdf_oracle,
)
from .kernels import (
    EPANECHNIKOV,
    GAUSSIAN,
    DensityEvalPoint,
    KernelKind,
    KernelSpec,
    TimeSeriesSample,
    kde,
    kde_many,
    kernel_eval,
    kernel_moments,
    t_statistic,
)
from .process import (
    REFERENCE_MODEL,
    MixingProfile,
    MixingRegime,
    ProcessModel,
    TrueDensity,
    marginal_density,
    marginal_density_dd,
    mixing_profile,
    simulate,
    simulate_many,
)
from .resampler import (
    BlockStats,
    BootstrapParams,
    CdfEstimate,
    DiscreteLaw,
    Method,
    block_stats,
    bootstrap_cdf,
    conditional_mean,
    draw_t_star,
    enumerate_resample_mean,
    enumerate_t_star,
    make_ebc_params,
    make_nbc_params,
    make_uns_params,
)
from .tuning import (
    GammaGConfig,
    NormalApproxInputs,
    TuningSelection,
    b_max,
    b_min,
    beta1,
    beta2,
    ebc_optimal_expo,
    ebc_optimal_poly,
    g0,
    g1,
    g2,
    g_curve_export,
    gamma0,
    nbc_optimal_expo,
    nbc_optimal_poly,
    normal_approx,
    practical_choice_ebc,
    rate_table,
    uns_optimal_expo,
    uns_optimal_poly,
    variance_exact_iid,
)

__version__ = "0.1.0"
