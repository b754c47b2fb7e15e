"""Python bindings for the vpmac virtual-packet contention MAC library."""

from ._core import (
    ChannelParams,
    CollisionChannel,
    ConfigError,
    DesignError,
    MacDesign,
    ParametricChannel,
    ThresholdFadingChannel,
    UtilitySpec,
    __version__,
    build_design,
    compute_gamma_ev,
    compute_j_ev,
    compute_x_star,
    d_star,
    derive_params,
    hajek_pa,
    idle_target_p,
    invert_q_star,
    invert_q_v_star,
    make_design,
    measure_stationary_qv,
    optimal_p,
    preset_config,
    preset_names,
    q_star,
    q_v_identical,
    q_v_star,
    run_config,
    run_preset,
    table_preset,
    target_one_step,
    target_receiver,
    target_two_step,
    utility_asymptotic,
    utility_finite,
)

__all__ = [name for name in dir() if not name.startswith("_")] + ["__version__"]
