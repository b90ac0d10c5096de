"""Python access to the volharness C++ core."""

import json as _json

from . import _volharness
from ._volharness import (
    VolharnessError,
    build_design,
    daily_measures,
    default_nw_lag,
    list_specs,
    newey_west,
    ols,
    run_cli,
    significance,
    wls_two_stage,
)

__all__ = [
    "VolharnessError",
    "build_design",
    "convergence_report",
    "daily_measures",
    "default_nw_lag",
    "fit_panel",
    "list_specs",
    "newey_west",
    "ols",
    "run_cli",
    "significance",
    "simulate_path",
    "wls_two_stage",
]


def simulate_path(params):
    """Returns (timestamps, prices, truth_days) for a parameter dict."""
    return _volharness.simulate_path(_json.dumps(params))


def convergence_report(params, n_paths=1, bv_skips=4, bv_scaling=True):
    return _volharness.convergence_report(_json.dumps(params), n_paths, bv_skips, bv_scaling)


def fit_panel(measures_csv, specs, horizons=(1, 5, 22, 66), mode="panel"):
    """Fits specs on a measures CSV; returns the flat coefficient rows."""
    return _json.loads(_volharness.fit_panel(str(measures_csv), list(specs), list(horizons), mode))
