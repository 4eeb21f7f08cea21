"""Large-sample behavior of the selection rule on a population sample.

Given i.i.d. draws of the labeled score V(X, Y), the null-evaluated score
V(X, c), and the exceedance indicator, this module estimates the limiting
p-value threshold ``t*``, the limiting false discovery rate, and the limiting
power of the step-up procedure:

* ``F(v, u) = P(V(X,Y) < v) + u * P(V(X,Y) = v)`` is the randomized CDF of
  the labeled score; :func:`empirical_F` is its plug-in estimate.
* ``t* = sup{t in [0,1] : t / P(F(V(X,c), U) <= t) <= q}`` where U is an
  independent uniform. The empirical criterion is piecewise linear between
  the sorted F-values, so the supremum is computed exactly over breakpoints
  rather than by a generic root-finder.
* The FDR limit is the null mass below ``t*`` over the total mass below
  ``t*``, and the power limit is the exceeding mass below ``t*`` over the
  total exceeding mass.

These limits are trustworthy when the criterion dips strictly below ``q``
just left of ``t*``; ``condition_flag`` reports whether the plug-in criterion
exhibits that dip.

Note on argument order: ``F`` is conventionally written with the uniform
first, but is evaluated at ``(score, uniform)`` pairs; the implementation
fixes the call signature ``F(v, u)`` with the score first.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import ContractError
from .rng import unit_uniforms
from .scores import ScoreRule


@dataclass(frozen=True)
class PopulationSample:
    """Paired i.i.d. draws describing one score rule on one population."""

    v_full: np.ndarray
    v_null: np.ndarray
    y_exceeds: np.ndarray

    def __post_init__(self):
        v_full = np.asarray(self.v_full, dtype=float)
        v_null = np.asarray(self.v_null, dtype=float)
        y_exceeds = np.asarray(self.y_exceeds, dtype=bool)
        if not (v_full.size == v_null.size == y_exceeds.size) or v_full.size == 0:
            raise ContractError("population arrays must be nonempty and equal-length")
        if not (np.all(np.isfinite(v_full)) and np.all(np.isfinite(v_null))):
            raise ContractError("population scores must be finite")
        object.__setattr__(self, "v_full", v_full)
        object.__setattr__(self, "v_null", v_null)
        object.__setattr__(self, "y_exceeds", y_exceeds)

    @property
    def size(self) -> int:
        return int(self.v_full.size)


def population_sample_from_scores(
    rule: ScoreRule, pred, outcome, c=0.0
) -> PopulationSample:
    """Score a raw (prediction, outcome) population under one rule."""
    pred = np.asarray(pred, dtype=float)
    outcome = np.asarray(outcome, dtype=float)
    c_arr = np.broadcast_to(np.asarray(c, dtype=float), pred.shape)
    return PopulationSample(
        v_full=rule.scores(pred, outcome, c_arr),
        v_null=rule.scores_at_threshold(pred, c_arr),
        y_exceeds=outcome > c_arr,
    )


class EmpiricalScoreCdf:
    """Plug-in estimate of the randomized score CDF ``F(v, u)``.

    ``F(v, u) = (#{V < v} + u * #{V = v}) / N`` over the stored sample;
    non-decreasing in each argument and valued in [0, 1].
    """

    def __init__(self, v_full):
        v = np.asarray(v_full, dtype=float)
        if v.size == 0:
            raise ContractError("empirical CDF requires a nonempty sample")
        self._sorted = np.sort(v)
        self._n = v.size

    def __call__(self, v, u) -> np.ndarray:
        v = np.asarray(v, dtype=float)
        u = np.asarray(u, dtype=float)
        n_less = np.searchsorted(self._sorted, v, side="left")
        n_leq = np.searchsorted(self._sorted, v, side="right")
        return (n_less + u * (n_leq - n_less)) / self._n


def empirical_F(v_full_sample) -> EmpiricalScoreCdf:
    """Build the plug-in randomized CDF from labeled-score draws."""
    return EmpiricalScoreCdf(v_full_sample)


def solve_tstar(
    f_values_at_null,
    q: float,
    eps: float = 1e-3,
    strict_margin: float = 1e-6,
) -> tuple[float, bool]:
    """Supremum of ``{t : t / P_hat(F <= t) <= q}`` over the plug-in criterion.

    ``f_values_at_null`` are i.i.d. draws of F(V(X,c), U). Any feasible t
    satisfies ``t <= q * count(t) / N``, itself feasible, so the supremum is
    attained at a candidate level ``q*k/N`` (checked by direct counting).

    The returned flag is True when some t in the open interval
    ``(t* - eps, t*)`` keeps the criterion strictly below ``q`` by at least
    ``strict_margin``, i.e. the supremum is approached from a region of
    strict feasibility rather than along a critical line.
    """
    f = np.asarray(f_values_at_null, dtype=float)
    if f.size == 0:
        raise ContractError("solve_tstar requires a nonempty sample of F-values")
    if not 0.0 < float(q) < 1.0:
        raise ContractError("q must be in (0,1)")
    n = f.size
    f_sorted = np.sort(f)
    ks = np.arange(1, n + 1)
    levels = q * ks / n
    counts = np.searchsorted(f_sorted, levels, side="right")
    feasible = counts >= ks
    if not np.any(feasible):
        return 0.0, False
    t_star = float(np.max(levels[feasible]))

    lo = t_star - eps
    if t_star <= 0.0 or lo >= t_star:
        return t_star, False
    interior = f_sorted[(f_sorted > lo) & (f_sorted < t_star)]
    grid = np.linspace(lo, t_star, 11)[1:-1]
    probes = np.concatenate([interior, grid])
    probes = probes[(probes > max(lo, 0.0)) & (probes < t_star)]
    if probes.size == 0:
        return t_star, False
    probe_counts = np.searchsorted(f_sorted, probes, side="right")
    strict = n * probes < (q - strict_margin) * probe_counts
    return t_star, bool(np.any(strict))


@dataclass(frozen=True)
class AsymptoticReport:
    """Limiting threshold, FDR, and power for one score on one population."""

    t_star: float
    fdr_limit: float
    power_limit: float
    condition_flag: bool
    v_star: float | None
    n_pop: int
    q: float
    seed: int


def asymptotic_fdr_power(
    pop: PopulationSample,
    q: float,
    seed: int,
    eps: float = 1e-3,
    strict_margin: float = 1e-6,
) -> AsymptoticReport:
    """Plug-in limiting FDR and power of the step-up rule on a population.

    Draws one uniform per population row (seeded), evaluates the empirical
    randomized CDF of the labeled scores at the null-evaluated scores, solves
    for ``t*``, and forms the limiting ratios. A degenerate run with no mass
    below ``t*`` is reported with empty-selection semantics
    (``t* = 0``, ``fdr = power = 0``).

    ``v_star`` is the largest labeled-score value whose empirical CDF stays
    at or below ``t*``; it is a diagnostic of where the score threshold
    lands and carries no guarantee. None when unbounded.
    """
    cdf = empirical_F(pop.v_full)
    u = unit_uniforms(seed, pop.size)
    f_values = cdf(pop.v_null, u)
    t_star, flag = solve_tstar(f_values, q, eps=eps, strict_margin=strict_margin)

    below = f_values <= t_star
    n_below = int(np.count_nonzero(below))
    if t_star <= 0.0 or n_below == 0:
        t_star = 0.0
        fdr_limit = 0.0
        power_limit = 0.0
    else:
        n_null_below = int(np.count_nonzero(below & ~pop.y_exceeds))
        fdr_limit = n_null_below / n_below
        n_exceeds = int(np.count_nonzero(pop.y_exceeds))
        power_limit = (
            int(np.count_nonzero(below & pop.y_exceeds)) / n_exceeds
            if n_exceeds
            else 0.0
        )

    sorted_full = np.sort(pop.v_full)
    n = sorted_full.size
    n_at_or_below = int(np.floor(t_star * n + 1e-12))
    v_star = float(sorted_full[n_at_or_below]) if n_at_or_below < n else None

    return AsymptoticReport(
        t_star=t_star,
        fdr_limit=float(fdr_limit),
        power_limit=float(power_limit),
        condition_flag=flag,
        v_star=v_star,
        n_pop=pop.size,
        q=float(q),
        seed=int(seed),
    )
