"""Multi-robot exploration simulator."""

from ._mrx import (
    ConfigError,
    Metrics,
    RunResult,
    ScenarioConfig,
    bench,
    generate_map,
    load_map,
    progress_check,
    render,
    replay,
    run,
    solve_vrp,
)

STRATEGIES = ("hierarchical", "ctr", "mtsp", "gre")
MAP_KINDS = ("empty", "grid", "random", "campus")

__all__ = [
    "ConfigError",
    "MAP_KINDS",
    "Metrics",
    "RunResult",
    "STRATEGIES",
    "ScenarioConfig",
    "bench",
    "generate_map",
    "load_map",
    "progress_check",
    "render",
    "replay",
    "run",
    "solve_vrp",
]
