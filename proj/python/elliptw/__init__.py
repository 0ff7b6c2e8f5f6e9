"""Limiting spectra and Tracy-Widom edge statistics of elliptical sample
covariance matrices: self-consistent Stieltjes transforms, spectral density,
right-most edge location, the TW1 distribution, and seeded Monte-Carlo
campaigns."""

from elliptw._core import (  # noqa: F401
    CampaignSummary,
    DensityCurve,
    EdgeNotFound,
    EdgeReport,
    ExperimentSpec,
    FpcPartials,
    ModelConfig,
    PoleError,
    PopulationSpectrum,
    RadialLaw,
    RegularityReport,
    SolveOptions,
    SolverFailure,
    StieltjesTriple,
    SystemMode,
    TW1Table,
    TrialRecord,
    Variant,
    build_tw1_table,
    check_regularity,
    density,
    eval_Fp,
    eval_Fpc,
    find_edge,
    gamma0_scale,
    ks_distance,
    ks_two_sample,
    parse_config_file,
    partials_Fpc,
    radial_cdf,
    run_campaign,
    run_trial,
    solve_system,
    sqrt_edge_fit,
    support_grid,
    tw1_cdf,
    tw1_quantile,
    validate,
)

__all__ = [name for name in dir() if not name.startswith("_")]
__version__ = "0.1.0"
