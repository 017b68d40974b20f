"""Multi-exponent environmental path loss model."""

from ._pef import (
    DataError,
    DesignMatrix,
    FitOptions,
    FitReport,
    LogDistParams,
    MeasurementSet,
    NumericalError,
    PefError,
    PefParams,
    RegionGrid,
    UsageError,
    build_design,
    classify_regions,
    compare_models,
    fit_ml,
    fit_ml_logdist,
    gen_synthetic,
    heatmap,
    like_term_coefficients,
    load_measurements,
    load_params,
    load_raster,
    load_region_grid,
    log_normal_upper_tail,
    loglik_gradient,
    ls_fit_logdist,
    merge_region_types,
    normal_hazard,
    params_json,
    predict_logdist,
    predict_pef,
    run_cli,
    save_measurements,
    save_raster,
    save_region_grid,
    trace_path,
    truncate,
    truncated_loglik,
)

__version__ = "0.1.0"
