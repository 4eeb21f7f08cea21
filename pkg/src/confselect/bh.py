"""Step-up selection over p-values and the error metrics it is judged by.

``bh_select`` finds the largest self-consistent rejection count
``k* = max{k : #{p_j <= q k / m} >= k}`` by a single sort and scan, and
selects every unit with ``p_j <= q k*/m``. ``bh_threshold`` computes the
equivalent data-dependent threshold ``sup{t : m t / #{p_j <= t} <= q}``
directly from candidate thresholds with its own counting, as an independent
representation of the same rule; the two must induce identical selections.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import ContractError


@dataclass(frozen=True)
class SelectionResult:
    """Selected index set with the step-up count and threshold behind it."""

    selected: np.ndarray
    k_star: int
    tau_hat: float
    q: float

    def __post_init__(self):
        object.__setattr__(
            self, "selected", np.asarray(self.selected, dtype=int)
        )

    @property
    def n_selected(self) -> int:
        return int(self.selected.size)


@dataclass(frozen=True)
class ErrorMetrics:
    """False discovery proportion and power of one realized selection."""

    fdp: float
    power: float
    n_selected: int


def _check_pvalues(p) -> np.ndarray:
    p = np.asarray(p, dtype=float)
    if p.ndim != 1 or p.size == 0:
        raise ContractError("p-values must be a nonempty 1-d array")
    if np.any(~np.isfinite(p)) or np.any((p < 0.0) | (p > 1.0)):
        raise ContractError("p-values must lie in [0, 1]")
    return p


def _check_q(q: float) -> float:
    q = float(q)
    if not 0.0 < q < 1.0:
        raise ContractError("q must be in (0,1)")
    return q


def bh_select(p, q: float) -> SelectionResult:
    """Step-up selection at target level ``q``.

    Ties in ``p`` are unproblematic because the criterion only uses counts.
    Empty selection is reported as ``k_star = 0`` with ``tau_hat = 0``.
    """
    p = _check_pvalues(p)
    q = _check_q(q)
    m = p.size
    p_sorted = np.sort(p)
    ks = np.arange(1, m + 1)
    ok = p_sorted <= q * ks / m
    if not np.any(ok):
        return SelectionResult(
            selected=np.empty(0, dtype=int), k_star=0, tau_hat=0.0, q=q
        )
    k_star = int(ks[ok][-1])
    tau_hat = q * k_star / m
    selected = np.flatnonzero(p <= tau_hat)
    return SelectionResult(selected=selected, k_star=k_star, tau_hat=tau_hat, q=q)


def bh_threshold(p, q: float) -> float:
    """Supremum threshold ``sup{t in [0,1] : m t / #{p_j <= t} <= q}``.

    Any feasible t satisfies ``t <= q * #{p <= t} / m``, itself a feasible
    point, so the supremum is attained at one of the candidate levels
    ``q*k/m``; feasibility of a candidate is checked by direct counting
    (``#{p <= q k / m} >= k``), an exact integer comparison that sidesteps
    float boundary ambiguity where the count jumps. Returns 0.0 when no
    positive t is feasible; selecting ``{j : p_j <= tau}`` reproduces
    :func:`bh_select`.
    """
    p = _check_pvalues(p)
    q = _check_q(q)
    m = p.size
    p_sorted = np.sort(p)
    ks = np.arange(1, m + 1)
    levels = q * ks / m
    counts = np.searchsorted(p_sorted, levels, side="right")
    feasible = counts >= ks
    if not np.any(feasible):
        return 0.0
    return float(np.max(levels[feasible]))


def metrics(selected, truth) -> ErrorMetrics:
    """Evaluate a selection against known exceedance indicators.

    ``truth[j]`` is True when unit ``j`` genuinely exceeds its threshold.
    Both ratios use ``max(1, .)`` denominators, so an empty selection has
    ``fdp = 0`` and a truth vector with no positives has ``power = 0``.
    """
    truth = np.asarray(truth, dtype=bool)
    selected = np.asarray(selected, dtype=int)
    if selected.size and (selected.min() < 0 or selected.max() >= truth.size):
        raise ContractError("selected indices out of range for truth vector")
    n_sel = int(selected.size)
    n_false = int(np.count_nonzero(~truth[selected])) if n_sel else 0
    n_true_selected = n_sel - n_false
    n_true = int(np.count_nonzero(truth))
    return ErrorMetrics(
        fdp=n_false / max(1, n_sel),
        power=n_true_selected / max(1, n_true),
        n_selected=n_sel,
    )
