"""Simulation and capacity bounds for the heating-up additive-noise channel."""

from .bounds import (
    ach_limit,
    ach_rate,
    beta_tilde,
    bound_report,
    fb_upper,
    leakage_bound,
    lowsnr_slope_terms,
    unit_cost,
)
from .channel import HeatingChannel, NoiseModel, simulate
from .codec import bler_sim, build_codebook, encode, nn_decode
from .errors import *  # noqa: F401,F403
from .estimate import (
    EstimateReport,
    OnOffConfig,
    concentration_check,
    gaussian_kl,
    mi_lower_onoff,
    mixture_kl_mc,
    onoff_mi,
    slope_estimate,
    typical_means,
)
from .profiles import (
    HeatProfile,
    ThermalParams,
    alpha,
    alpha_subsampled,
    alpha_sum,
    alpha_tail,
    classify,
    decay_diagnostics,
    profile_from_physics,
    profile_from_spec,
)

__version__ = "0.1.0"
