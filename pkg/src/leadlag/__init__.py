"""Time-dependent lead-lag estimation with thermal optimal paths."""

__version__ = "0.1.0"

from .errors import *  # noqa: F401,F403
from .lattice import DistanceKind, DistanceMatrix, RotatedCoord, build_distance, from_rotated, to_rotated
from .pathsel import BoundarySpec, PathSelection, analyze_pair, enumerate_boundaries, select_best
from .series import RawSeries, TimeSeries, log_returns, normalize_rms, read_csv, standardize, write_csv
from .stats import (
    BootstrapBand,
    RhoResult,
    SelfConsistencyResult,
    SignalMap,
    bootstrap_band,
    moving_window_scan,
    path_to_lags,
    regression_ttest,
    rho_metric,
    signal_map,
    temperature_profile,
)
from .synth import Ar1Params, PiecewiseLagModel, gen_ar1, gen_piecewise, gen_random_model, paper_model, reshuffle
from .thermal import Method, ThermalPath, backward_field, forward_field, path_between, top_path, tops_path
