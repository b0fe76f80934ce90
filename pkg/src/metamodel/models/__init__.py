"""Executable model families the transformation machinery acts on."""

from .abm import (
    AbmSpec,
    AddState,
    AddTransition,
    ConstProb,
    FractionProb,
    ModelTransform,
    RefactorStates,
    RemoveState,
    StateRepresentation,
    StateSummary,
    Trajectory,
    TransitionRule,
    abm_typegraph,
    augment,
    describe,
    refactor_states,
    run_abm,
    sirs_spec,
    spec_from_json,
    spec_to_json,
    splitmix64,
    trajectory_to_csv,
    uniform_draw,
)
from .base import ModelSignature
from .polynomial import (
    POLYNOMIAL_GENERATORS,
    FittedPolynomial,
    FormalPolynomial,
    apply_T1,
    apply_Tx,
    apply_word,
    fit_lasso,
    fit_least_squares,
    fitted_to_json,
    lasso_gradient,
    polynomial_from_json,
    polynomial_presentation,
    polynomial_to_json,
    select_lambda_cv,
    select_model,
)

__all__ = [
    "AbmSpec",
    "AddState",
    "AddTransition",
    "ConstProb",
    "FractionProb",
    "FittedPolynomial",
    "FormalPolynomial",
    "ModelSignature",
    "ModelTransform",
    "POLYNOMIAL_GENERATORS",
    "RefactorStates",
    "RemoveState",
    "StateRepresentation",
    "StateSummary",
    "Trajectory",
    "TransitionRule",
    "abm_typegraph",
    "apply_T1",
    "apply_Tx",
    "apply_word",
    "augment",
    "describe",
    "fit_lasso",
    "fit_least_squares",
    "fitted_to_json",
    "lasso_gradient",
    "polynomial_from_json",
    "polynomial_presentation",
    "polynomial_to_json",
    "refactor_states",
    "run_abm",
    "select_lambda_cv",
    "select_model",
    "sirs_spec",
    "spec_from_json",
    "spec_to_json",
    "splitmix64",
    "trajectory_to_csv",
    "uniform_draw",
]
