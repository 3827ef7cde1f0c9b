"""Continuous-variable telecloning: resource states, protocol runs, budgets."""

from ._core import (
    __version__,
    clone_fidelity,
    equal_squeezing_db,
    mqc_covariance,
    optimal_fidelity,
    solve_squeezing,
    teleclone,
    teleclone_mc,
)

__all__ = [
    "__version__",
    "clone_fidelity",
    "equal_squeezing_db",
    "mqc_covariance",
    "optimal_fidelity",
    "solve_squeezing",
    "teleclone",
    "teleclone_mc",
]
