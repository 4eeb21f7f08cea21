"""End-to-end selection: thresholds, scores, p-values, step-up, report.

The pipeline consumes a :class:`Dataset` of prediction/outcome columns, builds
one threshold per unit from a :class:`ThresholdSpec`, scores calibration and
test rows with a :class:`~confselect.scores.ScoreRule`, computes p-values by
the chosen method, and runs the step-up selection. Everything is a pure
function of ``(data, rule, spec, method, q, seed)``; replaying the same
inputs reproduces the report bit for bit.

Threshold modes:

* ``constant``: one fixed value for every unit. The value must not be derived
  from the calibration data; callers that did so anyway can declare it via
  ``declared_calibration_dependent`` to get a hygiene warning in the report.
* ``per_sample``: thresholds are read from a column observed on the test rows
  (e.g. a baseline measurement, or the realized outcome of the other arm in a
  counterfactual comparison). Calibration rows need the column only when the
  score rule itself consumes thresholds; the labeled score V(x, y) of a
  residual rule does not, which is what makes the missing-variable setting
  workable.
* ``group_quantile``: per-group lower empirical quantile of training outcomes
  (smallest value whose empirical CDF reaches ``q_pop``). Training outcomes
  must come from the model-fitting fold, not from the calibration fold.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Mapping

import numpy as np

from . import pvalues as pv
from .bh import ErrorMetrics, SelectionResult, bh_select, metrics
from .errors import ContractError, IngestionError
from .rng import unit_uniforms
from .scores import ScoreRule, clip_margin_satisfied

SELECT_METHODS = ("randomized", "deterministic", "same_class")

THRESHOLD_MODES = ("constant", "per_sample", "group_quantile")


@dataclass(frozen=True)
class ThresholdSpec:
    """Rule producing one threshold per unit."""

    mode: str
    constant: float | None = None
    column: str | None = None
    q_pop: float | None = None
    group_column: str | None = None
    declared_calibration_dependent: bool = False

    def __post_init__(self):
        if self.mode not in THRESHOLD_MODES:
            raise ContractError(
                f"unknown threshold mode {self.mode!r}; expected one of {THRESHOLD_MODES}"
            )
        if self.mode == "constant":
            if self.constant is None or not np.isfinite(self.constant):
                raise ContractError("constant threshold mode requires a finite value")
        if self.mode == "group_quantile":
            if self.q_pop is None or not 0.0 < self.q_pop < 1.0:
                raise ContractError("group_quantile mode requires q_pop in (0,1)")

    def describe(self) -> dict:
        d = {"mode": self.mode}
        if self.mode == "constant":
            d["constant"] = self.constant
            d["declared_calibration_dependent"] = self.declared_calibration_dependent
        elif self.mode == "per_sample":
            d["column"] = self.column
        else:
            d["q_pop"] = self.q_pop
            d["group_column"] = self.group_column
        return d


@dataclass(frozen=True)
class Dataset:
    """Calibration and test columns, already parsed and finite-checked.

    Outcomes are required on calibration rows for the randomized and
    deterministic methods; test outcomes are optional and only used to attach
    evaluation metrics to the report. Threshold and group columns are present
    only when a :class:`ThresholdSpec` needs them.
    """

    calib_pred: np.ndarray
    calib_outcome: np.ndarray | None = None
    calib_threshold: np.ndarray | None = None
    calib_group: np.ndarray | None = None
    test_pred: np.ndarray = field(default_factory=lambda: np.empty(0))
    test_outcome: np.ndarray | None = None
    test_threshold: np.ndarray | None = None
    test_group: np.ndarray | None = None

    def __post_init__(self):
        for name in ("calib_pred", "test_pred", "calib_outcome", "test_outcome",
                     "calib_threshold", "test_threshold"):
            arr = getattr(self, name)
            if arr is None:
                continue
            arr = np.asarray(arr, dtype=float)
            if arr.size and not np.all(np.isfinite(arr)):
                idx = int(np.flatnonzero(~np.isfinite(arr))[0])
                raise IngestionError(f"non-finite value in {name} at row {idx}")
            object.__setattr__(self, name, arr)
        for name in ("calib_group", "test_group"):
            arr = getattr(self, name)
            if arr is not None:
                object.__setattr__(self, name, np.asarray(arr))

    @property
    def n_calib(self) -> int:
        return int(self.calib_pred.size)

    @property
    def n_test(self) -> int:
        return int(self.test_pred.size)


def group_quantile_thresholds(
    groups: np.ndarray,
    training_outcomes: Mapping,
    q_pop: float,
) -> np.ndarray:
    """Map each unit's group to the lower empirical q_pop-quantile.

    The lower empirical quantile is the smallest outcome value whose
    empirical CDF reaches ``q_pop``: with N sorted outcomes it is the
    ``ceil(q_pop * N)``-th order statistic.
    """
    missing = sorted({str(g) for g in groups} - {str(g) for g in training_outcomes})
    if missing:
        raise ContractError(
            "no training outcomes for group(s): " + ", ".join(missing)
        )
    by_group = {}
    for g, outcomes in training_outcomes.items():
        o = np.sort(np.asarray(outcomes, dtype=float))
        if o.size == 0:
            raise ContractError(f"empty training outcomes for group {g!r}")
        if not np.all(np.isfinite(o)):
            raise IngestionError(f"non-finite value in training outcomes for group {g!r}")
        k = int(np.ceil(q_pop * o.size))
        by_group[str(g)] = float(o[max(k, 1) - 1])
    return np.asarray([by_group[str(g)] for g in groups], dtype=float)


def build_thresholds(
    spec: ThresholdSpec,
    data: Dataset,
    training_outcomes: Mapping | None = None,
    side: str = "test",
) -> np.ndarray:
    """Produce one finite threshold per unit on the requested side."""
    if side not in ("test", "calibration"):
        raise ContractError("side must be 'test' or 'calibration'")
    n = data.n_test if side == "test" else data.n_calib
    if spec.mode == "constant":
        return np.full(n, float(spec.constant))
    if spec.mode == "per_sample":
        col = data.test_threshold if side == "test" else data.calib_threshold
        if col is None:
            raise ContractError(
                f"per_sample threshold mode requires a threshold column on {side} rows"
            )
        return np.asarray(col, dtype=float)
    groups = data.test_group if side == "test" else data.calib_group
    if groups is None:
        raise ContractError(
            f"group_quantile threshold mode requires a group column on {side} rows"
        )
    if training_outcomes is None:
        raise ContractError(
            "group_quantile threshold mode requires per-group training outcomes"
        )
    return group_quantile_thresholds(groups, training_outcomes, spec.q_pop)


@dataclass(frozen=True)
class SelectionReport:
    """Everything one selection run produced, sufficient to audit it."""

    result: SelectionResult
    p: np.ndarray
    v_hat: np.ndarray
    c: np.ndarray
    method: str
    score: dict
    threshold: dict
    q: float
    seed: int | None
    n_calib: int
    n_test: int
    warnings: tuple = ()
    tie_diagnostics: dict = field(default_factory=dict)
    eval_metrics: ErrorMetrics | None = None

    @property
    def selected(self) -> np.ndarray:
        return self.result.selected


def _binarize(outcomes: np.ndarray, thresholds: np.ndarray) -> np.ndarray:
    return outcomes > thresholds


def select(
    data: Dataset,
    rule: ScoreRule,
    spec: ThresholdSpec,
    method: str,
    q: float,
    seed: int | None = None,
    training_outcomes: Mapping | None = None,
) -> SelectionReport:
    """Run the full selection and return a :class:`SelectionReport`.

    ``seed`` feeds the per-unit tie-break uniforms and is mandatory for the
    randomized and same_class methods; the deterministic method draws nothing.
    """
    if method not in SELECT_METHODS:
        raise ContractError(
            f"unknown method {method!r}; expected one of {SELECT_METHODS}"
        )
    if not 0.0 < float(q) < 1.0:
        raise ContractError("q must be in (0,1)")
    if method != "deterministic" and seed is None:
        raise ContractError(f"method {method!r} requires a seed")
    if data.n_calib == 0:
        raise ContractError("calibration data must be nonempty")
    if data.n_test == 0:
        raise ContractError("test data must be nonempty")

    warnings: list[str] = []
    c_test = build_thresholds(spec, data, training_outcomes, side="test")

    needs_calib_thresholds = rule.needs_thresholds or method == "same_class"
    c_calib = None
    if needs_calib_thresholds:
        c_calib = build_thresholds(spec, data, training_outcomes, side="calibration")

    if data.calib_outcome is None:
        raise ContractError("calibration outcomes are required")

    v_hat = rule.scores_at_threshold(data.test_pred, c_test)

    if method == "same_class":
        is_class1 = _binarize(data.calib_outcome, c_calib)
        class0_scores = rule.scores_at_threshold(
            data.calib_pred[~is_class1], c_calib[~is_class1]
        )
        if class0_scores.size == 0:
            raise ContractError(
                "same-class calibration requires at least one class-0 unit"
            )
        u = unit_uniforms(seed, data.n_test)
        p = pv.same_class_pvalues(class0_scores, v_hat, u)
        calib_scores = class0_scores
    else:
        calib_scores = rule.scores(
            data.calib_pred,
            data.calib_outcome,
            c_calib if c_calib is not None else 0.0,
        )
        if method == "randomized":
            u = unit_uniforms(seed, data.n_test)
            p = pv.randomized_pvalues(calib_scores, v_hat, u)
        else:
            p = pv.deterministic_pvalues(calib_scores, v_hat)

    ties = pv.tie_diagnostics(calib_scores, v_hat)
    if method == "deterministic" and ties["pooled_duplicates"] > 0:
        warnings.append(
            f"{ties['pooled_duplicates']} pooled score values are tied; the "
            "deterministic p-value guarantee assumes tie-free scores"
        )

    all_preds = np.concatenate([data.calib_pred, data.test_pred])
    if not clip_margin_satisfied(rule, all_preds):
        warnings.append(
            f"clip constant {rule.clip_m} is below twice the largest "
            f"|prediction| ({float(np.max(np.abs(all_preds))):.6g}); class "
            "separation of the clipped score is not guaranteed"
        )
    if spec.mode == "constant" and spec.declared_calibration_dependent:
        warnings.append(
            "constant threshold was declared calibration-dependent; the "
            "finite-sample guarantee assumes thresholds independent of the "
            "calibration data"
        )

    result = bh_select(p, q)
    eval_metrics = None
    if data.test_outcome is not None and data.test_outcome.size:
        truth = _binarize(data.test_outcome, c_test)
        eval_metrics = metrics(result.selected, truth)

    return SelectionReport(
        result=result,
        p=np.asarray(p, dtype=float),
        v_hat=np.asarray(v_hat, dtype=float),
        c=np.asarray(c_test, dtype=float),
        method=method,
        score=rule.describe(),
        threshold=spec.describe(),
        q=float(q),
        seed=seed,
        n_calib=data.n_calib,
        n_test=data.n_test,
        warnings=tuple(warnings),
        tie_diagnostics=ties,
        eval_metrics=eval_metrics,
    )
