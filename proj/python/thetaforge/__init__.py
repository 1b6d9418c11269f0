"""r-tuple error functions, cone hypotheses and indefinite theta series."""

from ._core import (
    BudgetExceeded,
    Error,
    ErrFnValue,
    GenericityViolated,
    NonExactInput,
    ValidationError,
    WallTooClose,
    a4_example_passes,
    bound_check,
    check_cone_pair,
    eval_E,
    eval_E_oracle_mc,
    eval_M,
    q_expansion,
    run_cli,
    run_suite,
    sign_lemma_sum,
    theta,
)

__all__ = [
    "BudgetExceeded",
    "Error",
    "ErrFnValue",
    "GenericityViolated",
    "NonExactInput",
    "ValidationError",
    "WallTooClose",
    "a4_example_passes",
    "bound_check",
    "check_cone_pair",
    "eval_E",
    "eval_E_oracle_mc",
    "eval_M",
    "q_expansion",
    "run_cli",
    "run_suite",
    "sign_lemma_sum",
    "theta",
]
