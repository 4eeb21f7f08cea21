"""Monotone nonconformity scores built from a precomputed prediction column.

A score rule maps ``(mu_hat, y, c)`` to a real nonconformity value that is
non-decreasing in ``y`` for fixed prediction and threshold. Model fitting
stays outside this package: rules consume one predicted value per unit, which
keeps the calibration guarantee's independence precondition explicit.

Built-in kinds:

* ``residual``: ``y - mu_hat``. Applicable with any threshold structure.
* ``clipped``: ``M * 1{y > c} - mu_hat``. With a large clip constant the
  positive class scores strictly above the negative class, which empirically
  spends the full error budget and yields the highest power.
* ``clipped_threshold``: ``M * 1{y >= c} + c * 1{y < c}``. A literal
  threshold-indicator variant that ignores the prediction entirely; provided
  for completeness, but note that evaluating it at ``y = c`` collapses every
  test statistic to ``M``, so ``clipped`` is the recommended choice for
  per-group threshold pipelines.
* ``custom``: user-supplied callable ``fn(mu_hat, y, c) -> score``; the caller
  is responsible for monotonicity (see :func:`check_monotone`).
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np

from .errors import ContractError, IngestionError

SCORE_KINDS = ("residual", "clipped", "clipped_threshold", "custom")

#: Default clip constant; large enough for predictions bounded by 50.
DEFAULT_CLIP_M = 100.0


def _as_finite(name: str, value) -> np.ndarray:
    """Coerce to a float array, rejecting NaN/inf with the field named."""
    arr = np.asarray(value, dtype=float)
    bad = ~np.isfinite(arr)
    if np.any(bad):
        if arr.ndim == 0:
            raise IngestionError(f"non-finite value in {name}")
        idx = int(np.flatnonzero(bad)[0])
        raise IngestionError(f"non-finite value in {name} at row {idx}")
    return arr


def residual_score(mu_hat, y):
    """Residual nonconformity ``y - mu_hat``."""
    mu_hat = _as_finite("mu_hat", mu_hat)
    y = _as_finite("y", y)
    return y - mu_hat


def clipped_score(mu_hat, y, c, m=DEFAULT_CLIP_M):
    """Clipped nonconformity ``m * 1{y > c} - mu_hat``.

    With ``c = 0`` and binary ``y`` this is ``m * y - mu_hat``. The intended
    regime is ``m >= 2 * sup|mu_hat|``, which guarantees that every score for
    an exceeding outcome dominates every score for a non-exceeding one; the
    pipeline emits a warning (not an error) when the supplied data violates it.
    """
    mu_hat = _as_finite("mu_hat", mu_hat)
    y = _as_finite("y", y)
    c = _as_finite("c", c)
    m = float(_as_finite("m", m))
    return m * (y > c) - mu_hat


def clipped_threshold_score(y, c, m=DEFAULT_CLIP_M):
    """Literal threshold-indicator score ``m * 1{y >= c} + c * 1{y < c}``.

    Does not use the prediction. Monotone in ``y`` only when ``c <= m``.
    """
    y = _as_finite("y", y)
    c = _as_finite("c", c)
    m = float(_as_finite("m", m))
    return np.where(y >= c, m, c)


@dataclass(frozen=True)
class ScoreRule:
    """A named monotone score with its parameters.

    ``fn`` is only consulted for ``kind="custom"`` and must accept
    ``(mu_hat, y, c)`` arrays.
    """

    kind: str
    clip_m: float = DEFAULT_CLIP_M
    fn: Callable | None = field(default=None, compare=False)

    def __post_init__(self):
        if self.kind not in SCORE_KINDS:
            raise ContractError(
                f"unknown score kind {self.kind!r}; expected one of {SCORE_KINDS}"
            )
        if self.kind in ("clipped", "clipped_threshold") and not self.clip_m > 0:
            raise ContractError("clip_m must be > 0 for clipped score kinds")
        if self.kind == "custom" and self.fn is None:
            raise ContractError("custom score kind requires fn")

    @property
    def needs_thresholds(self) -> bool:
        """Whether scoring labeled rows requires a per-row threshold."""
        return self.kind != "residual"

    def scores(self, mu_hat, y, c=0.0) -> np.ndarray:
        """Evaluate V(x, y) for each row."""
        if self.kind == "residual":
            return np.asarray(residual_score(mu_hat, y), dtype=float)
        if self.kind == "clipped":
            return np.asarray(clipped_score(mu_hat, y, c, self.clip_m), dtype=float)
        if self.kind == "clipped_threshold":
            return np.asarray(clipped_threshold_score(y, c, self.clip_m), dtype=float)
        return np.asarray(
            self.fn(_as_finite("mu_hat", mu_hat), _as_finite("y", y), _as_finite("c", c)),
            dtype=float,
        )

    def scores_at_threshold(self, mu_hat, c) -> np.ndarray:
        """Evaluate V(x, c), the observable statistic for an unlabeled row."""
        return self.scores(mu_hat, c, c)

    def describe(self) -> dict:
        d = {"kind": self.kind}
        if self.kind in ("clipped", "clipped_threshold"):
            d["clip_m"] = self.clip_m
        return d


def clip_margin_satisfied(rule: ScoreRule, mu_hat) -> bool:
    """Check the sufficiency condition ``clip_m >= 2 * max|mu_hat|``.

    Only meaningful for the ``clipped`` kind; other kinds return True.
    """
    if rule.kind != "clipped":
        return True
    mu_hat = _as_finite("mu_hat", mu_hat)
    if mu_hat.size == 0:
        return True
    return bool(rule.clip_m >= 2.0 * float(np.max(np.abs(mu_hat))))


@dataclass(frozen=True)
class MonotoneCheckReport:
    """Outcome of probing a rule for monotonicity in y."""

    passed: bool
    n_probes: int
    failures: tuple = ()


def check_monotone(
    rule: ScoreRule,
    probes: Sequence[tuple],
    c: float = 0.0,
) -> MonotoneCheckReport:
    """Probe a score rule at triples ``(mu_hat, y_low, y_high)``.

    Fails iff some probe with ``y_low <= y_high`` yields
    ``score(y_low) > score(y_high)``. Report-only; never raises on failure.
    """
    failures = []
    for i, (mu_hat, y_low, y_high) in enumerate(probes):
        if y_low > y_high:
            raise ContractError(f"probe {i} has y_low > y_high")
        v_low = float(rule.scores(mu_hat, y_low, c))
        v_high = float(rule.scores(mu_hat, y_high, c))
        if v_low > v_high:
            failures.append((i, v_low, v_high))
    return MonotoneCheckReport(
        passed=not failures, n_probes=len(probes), failures=tuple(failures)
    )
