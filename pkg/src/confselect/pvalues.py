"""Conformal p-values that rank a test statistic among calibration scores.

Four constructions are provided:

* ``randomized``: rank of the observable statistic V(x, c) with uniform
  tie-breaking; the workhorse for i.i.d. calibration/test data.
* ``deterministic``: ``(1 + #{V_i < v}) / (n + 1)``, valid under
  exchangeability when the pooled scores are almost surely tie-free. Ties are
  tolerated numerically (strict inequality) and surfaced via a diagnostic.
* ``oracle``: same formula as ``randomized`` applied to the unobservable
  V(x, y); available only in simulation, where it serves as the uniform
  reference that the randomized p-value dominates on null units.
* ``same_class``: rank among the negative-class calibration subset only, with
  denominator ``n0 + 1``; gives error control conditional on the test labels.

Tie counting uses exact float comparisons throughout: ties must be bitwise
equal. Fuzzy tie detection would silently change rank counts.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import ContractError, IngestionError

PVALUE_METHODS = ("randomized", "deterministic", "same_class", "oracle")


def _calib_array(calib) -> np.ndarray:
    arr = np.asarray(calib, dtype=float)
    if arr.ndim != 1 or arr.size == 0:
        raise ContractError("calibration scores must be a nonempty 1-d array")
    if not np.all(np.isfinite(arr)):
        raise IngestionError("non-finite value in calibration scores")
    return arr


def _check_u(u) -> np.ndarray:
    u = np.asarray(u, dtype=float)
    if np.any((u < 0.0) | (u > 1.0)) or not np.all(np.isfinite(u)):
        raise ContractError("tie-break uniforms must lie in [0, 1]")
    return u


def _rank_counts(calib_sorted: np.ndarray, v: np.ndarray):
    """Return (#{V_i < v}, #{V_i = v}) per entry of v via binary search."""
    n_less = np.searchsorted(calib_sorted, v, side="left")
    n_leq = np.searchsorted(calib_sorted, v, side="right")
    return n_less, n_leq - n_less


def randomized_pvalues(calib, v_hat, u) -> np.ndarray:
    """Vectorized randomized conformal p-values.

    ``p = (#{V_i < v} + u * (1 + #{V_i = v})) / (n + 1)`` for each pair
    ``(v, u)``; strictly positive whenever ``u > 0``.
    """
    calib = _calib_array(calib)
    v_hat = np.asarray(v_hat, dtype=float)
    u = _check_u(u)
    calib_sorted = np.sort(calib)
    n_less, n_eq = _rank_counts(calib_sorted, v_hat)
    return (n_less + u * (1.0 + n_eq)) / (calib.size + 1.0)


def randomized_pvalue(calib, v_hat: float, u: float) -> float:
    """Scalar form of :func:`randomized_pvalues`."""
    return float(randomized_pvalues(calib, np.asarray([v_hat]), np.asarray([u]))[0])


def deterministic_pvalues(calib, v_hat) -> np.ndarray:
    """Tie-free conformal p-values ``(1 + #{V_i < v}) / (n + 1)``.

    The exchangeability guarantee assumes the pooled scores have no ties;
    compute :func:`tie_diagnostics` alongside when that is in doubt.
    """
    calib = _calib_array(calib)
    v_hat = np.asarray(v_hat, dtype=float)
    calib_sorted = np.sort(calib)
    n_less, _ = _rank_counts(calib_sorted, v_hat)
    return (1.0 + n_less) / (calib.size + 1.0)


def deterministic_pvalue(calib, v_hat: float) -> float:
    """Scalar form of :func:`deterministic_pvalues`."""
    return float(deterministic_pvalues(calib, np.asarray([v_hat]))[0])


def oracle_pvalues(calib, v_true, u) -> np.ndarray:
    """Randomized formula applied to the true outcome scores V(x, y).

    Simulation/testing only. Pass the same ``u`` used for the randomized
    p-values of the same units so the null-unit dominance is exact.
    """
    return randomized_pvalues(calib, v_true, u)


def oracle_pvalue(calib, v_true: float, u: float) -> float:
    """Scalar form of :func:`oracle_pvalues`."""
    return randomized_pvalue(calib, v_true, u)


def same_class_pvalues(calib_class0_scores, test_scores, u) -> np.ndarray:
    """Rank test statistics among the negative-class calibration scores.

    ``calib_class0_scores`` are V(X_i, c_i) restricted to calibration units
    whose binarized outcome is 0; the denominator is ``n0 + 1``.
    """
    class0 = np.asarray(calib_class0_scores, dtype=float)
    if class0.size == 0:
        raise ContractError(
            "same-class calibration requires at least one class-0 unit"
        )
    return randomized_pvalues(class0, test_scores, u)


def tie_diagnostics(calib, v_hat) -> dict:
    """Count exact-equality ties that would matter for tie-free guarantees.

    Returns ``units_tied_with_calibration`` (test units sharing a value with
    some calibration score) and ``pooled_duplicates`` (elements of the pooled
    calibration+test multiset involved in any tie).
    """
    calib = np.asarray(calib, dtype=float)
    v_hat = np.asarray(v_hat, dtype=float)
    calib_sorted = np.sort(calib)
    _, n_eq = _rank_counts(calib_sorted, v_hat)
    pooled = np.sort(np.concatenate([calib, v_hat]))
    dup_mask = np.zeros(pooled.size, dtype=bool)
    same = pooled[1:] == pooled[:-1]
    dup_mask[1:] |= same
    dup_mask[:-1] |= same
    return {
        "units_tied_with_calibration": int(np.count_nonzero(n_eq)),
        "pooled_duplicates": int(np.count_nonzero(dup_mask)),
    }


@dataclass(frozen=True)
class PValueVector:
    """Per-unit p-values plus the method and seed that produced them."""

    p: np.ndarray
    method: str
    seed: int | None = None

    def __post_init__(self):
        if self.method not in PVALUE_METHODS:
            raise ContractError(
                f"unknown p-value method {self.method!r}; expected one of {PVALUE_METHODS}"
            )
        object.__setattr__(self, "p", np.asarray(self.p, dtype=float))

    def __len__(self) -> int:
        return int(self.p.size)
