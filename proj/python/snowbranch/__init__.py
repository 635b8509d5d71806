"""Bifurcation diagrams of the cubic Laplace equation on the Koch snowflake."""

from ._snowbranch import (
    Basis,
    ConfigError,
    Error,
    Grid,
    NumericalError,
    Problem,
    __version__,
    bifurcation_kind_count,
    build_grid,
    compute_basis,
    digraph_edges,
    expected_point_count,
    load_basis,
    run,
    symmetry_type_names,
)

__all__ = [
    "Basis",
    "ConfigError",
    "Error",
    "Grid",
    "NumericalError",
    "Problem",
    "__version__",
    "bifurcation_kind_count",
    "build_grid",
    "compute_basis",
    "digraph_edges",
    "expected_point_count",
    "load_basis",
    "run",
    "symmetry_type_names",
]
