"""Online fair allocation simulator (C++ core)."""

import json as _json

from . import _core
from ._core import (
    FairallocError,
    Instance,
    PolicyConfig,
    canonical_envy_bound,
    competitive_ratio,
    divisible_nw_optimum,
    envy_bound_finite_T,
    envy_matrix,
    generate,
    generator_names,
    infer_epsilon,
    integral_nw_optimum,
    nash_welfare,
    pace_ell_bound,
    parse_instance,
    r_delta,
    run_criterion,
    run_policy,
    seeded_bound,
    serialize_instance,
)


def report(instance, policy, oracle="divisible", ell=None):
    """Run `policy` on `instance` and return the metrics report as a dict."""
    return _json.loads(_core.report_json(instance, policy, oracle, ell))


__all__ = [name for name in dir() if not name.startswith("_")]
