"""Monte Carlo harness estimating FDR, power, and selection size.

Each replicate draws fresh calibration and test sets from a
:class:`~confselect.dgps.DgpSetting`, runs the selection pipeline for each
configured score, and evaluates the realized false discovery proportion and
power against the known exceedance indicators. Replicates are independent
given per-replicate seeds derived from the master seed, and aggregation is a
fixed-order reduction over the replicate index, so identical configs produce
identical reports regardless of execution environment.

The task is binary-encoded: find units with ``y > 0``, with power measured
against the exceedance indicators ``1{y > 0}``. Score configurations:

* ``res``: residual score ``y - mu_hat`` on the raw outcomes, randomized
  p-values. Generally applicable, lowest power on this task.
* ``clip``: clipped score ``M 1{y > 0} - mu_hat`` (the indicator binarizes
  the outcome inside the score), randomized p-values.
* ``sub``: same-class calibration (classes split at zero, class-0 rows
  only, statistic ``-mu_hat``), randomized p-values.

Feeding pre-binarized outcomes to the residual score is deliberately not
done: with binary outcomes the residual score collapses into a small-gap
clipped score and overtakes same-class calibration, inverting the expected
power ordering.

The harness also runs a without-replacement variant: a finite population is
drawn once per replicate, calibration and test rows are sampled jointly
without replacement, and selection uses deterministic p-values, whose
guarantee needs only exchangeability plus tie-free scores.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field, replace

import numpy as np
from scipy.spatial import cKDTree

from .bh import metrics
from .dgps import DgpSetting, generate
from .errors import ContractError
from .pipeline import Dataset, ThresholdSpec, select
from .rng import spawn_seeds
from .scores import ScoreRule

SCORE_NAMES = ("res", "clip", "sub")

_SCORE_CONFIGS = {
    "res": (ScoreRule("residual"), "randomized"),
    "clip": (ScoreRule("clipped", clip_m=100.0), "randomized"),
    "sub": (ScoreRule("residual"), "same_class"),
}

_CONSTANT_ZERO = ThresholdSpec(mode="constant", constant=0.0)


@dataclass(frozen=True)
class McConfig:
    """One Monte Carlo configuration."""

    setting: DgpSetting
    n_calib: int = 200
    n_test: int = 200
    q: float = 0.1
    scores: tuple[str, ...] = SCORE_NAMES
    predictor: str = "oracle"
    n_train: int = 200
    knn_k: int = 20
    n_reps: int = 500
    seed: int = 0
    mu_override: float | None = None

    def __post_init__(self):
        if min(self.n_calib, self.n_test, self.n_reps) <= 0:
            raise ContractError("n_calib, n_test and n_reps must be positive")
        if not 0.0 < self.q < 1.0:
            raise ContractError("q must be in (0,1)")
        unknown = set(self.scores) - set(SCORE_NAMES)
        if unknown:
            raise ContractError(f"unknown score name(s): {sorted(unknown)}")
        if self.predictor not in ("oracle", "knn"):
            raise ContractError("predictor must be 'oracle' or 'knn'")
        if self.predictor == "knn" and (self.n_train <= 0 or self.knn_k <= 0):
            raise ContractError("knn predictor requires positive n_train and knn_k")


@dataclass(frozen=True)
class McRow:
    """Aggregated estimates for one (setting, score) configuration."""

    setting: int
    score: str
    q: float
    sigma: float
    n: int
    m: int
    n_reps: int
    fdr_mean: float
    fdr_se: float
    power_mean: float
    power_se: float
    nsel_mean: float
    n_reps_with_ties: int = 0

    def as_record(self) -> dict:
        return {
            "setting": self.setting,
            "score": self.score,
            "q": self.q,
            "sigma": self.sigma,
            "n": self.n,
            "m": self.m,
            "N": self.n_reps,
            "fdr_mean": self.fdr_mean,
            "fdr_se": self.fdr_se,
            "power_mean": self.power_mean,
            "power_se": self.power_se,
            "nsel_mean": self.nsel_mean,
        }


@dataclass(frozen=True)
class McReport:
    """Per-configuration estimates plus the seed that produced them."""

    rows: tuple[McRow, ...]
    seed: int
    warnings: tuple[str, ...] = ()

    def row(self, score: str) -> McRow:
        for r in self.rows:
            if r.score == score:
                return r
        raise KeyError(score)


def _mean_se(values: np.ndarray) -> tuple[float, float]:
    n = values.size
    mean = float(values.mean()) if n else 0.0
    se = float(values.std(ddof=1) / math.sqrt(n)) if n > 1 else 0.0
    return mean, se


def knn_predictions(
    train_x: np.ndarray, train_y: np.ndarray, k: int, *covariate_sets
) -> list[np.ndarray]:
    """Mean outcome of the k nearest training rows (Euclidean distance)."""
    tree = cKDTree(train_x)
    k = min(int(k), train_x.shape[0])
    out = []
    for x in covariate_sets:
        _, idx = tree.query(x, k=k)
        neigh = train_y[idx]
        if neigh.ndim == 1:
            neigh = neigh[:, None]
        out.append(neigh.mean(axis=1))
    return out


def _rep_predictions(cfg: McConfig, rep_seed: int, x_calib, mu_calib, x_test, mu_test):
    if cfg.predictor == "oracle":
        return mu_calib, mu_test
    x_train, _, y_train = generate(
        cfg.setting, cfg.n_train, rep_seed, mu_override=cfg.mu_override
    )
    return knn_predictions(x_train, y_train, cfg.knn_k, x_calib, x_test)


def monte_carlo(cfg: McConfig) -> McReport:
    """Estimate FDR, power, and selection size for each configured score.

    Per replicate: fresh calibration and test draws, one pipeline run per
    score (sharing the replicate's tie-break seed, so coupled constructions
    see the same uniforms), metrics evaluated against the true exceedance
    indicators ``y > 0``.
    """
    per_score = {s: {"fdp": [], "power": [], "nsel": []} for s in cfg.scores}
    ties = {s: 0 for s in cfg.scores}
    for rep in range(cfg.n_reps):
        s_calib, s_test, s_train, s_pipe = (
            int(v) for v in spawn_seeds(cfg.seed, 4, stream=rep)
        )
        x_c, mu_c, y_c = generate(
            cfg.setting, cfg.n_calib, s_calib, mu_override=cfg.mu_override
        )
        x_t, mu_t, y_t = generate(
            cfg.setting, cfg.n_test, s_test, mu_override=cfg.mu_override
        )
        pred_c, pred_t = _rep_predictions(cfg, s_train, x_c, mu_c, x_t, mu_t)
        truth = y_t > 0.0
        data = Dataset(calib_pred=pred_c, calib_outcome=y_c, test_pred=pred_t)
        for name in cfg.scores:
            rule, method = _SCORE_CONFIGS[name]
            report = select(data, rule, _CONSTANT_ZERO, method, cfg.q, seed=s_pipe)
            em = metrics(report.selected, truth)
            per_score[name]["fdp"].append(em.fdp)
            per_score[name]["power"].append(em.power)
            per_score[name]["nsel"].append(em.n_selected)
            if report.tie_diagnostics.get("pooled_duplicates", 0) > 0:
                ties[name] += 1
    rows = []
    for name in cfg.scores:
        fdr_mean, fdr_se = _mean_se(np.asarray(per_score[name]["fdp"]))
        power_mean, power_se = _mean_se(np.asarray(per_score[name]["power"]))
        nsel_mean, _ = _mean_se(np.asarray(per_score[name]["nsel"], dtype=float))
        rows.append(
            McRow(
                setting=cfg.setting.setting_id,
                score=name,
                q=cfg.q,
                sigma=cfg.setting.sigma,
                n=cfg.n_calib,
                m=cfg.n_test,
                n_reps=cfg.n_reps,
                fdr_mean=fdr_mean,
                fdr_se=fdr_se,
                power_mean=power_mean,
                power_se=power_se,
                nsel_mean=nsel_mean,
                n_reps_with_ties=ties[name],
            )
        )
    return McReport(rows=tuple(rows), seed=cfg.seed)


def exchangeable_experiment(cfg: McConfig, population: int = 2000) -> McReport:
    """Without-replacement sampling variant with deterministic p-values.

    Draws a finite population once per replicate, samples calibration and
    test rows jointly without replacement, and runs the deterministic
    pipeline for each configured score (same-class does not apply here).
    Replicates where pooled scores tie are counted per score and surfaced as
    a report warning, since the guarantee assumes tie-free scores.
    """
    if population < cfg.n_calib + cfg.n_test:
        raise ContractError("population must be at least n_calib + n_test")
    if "sub" in cfg.scores:
        raise ContractError(
            "same-class calibration is not defined for the deterministic "
            "without-replacement experiment"
        )
    per_score = {s: {"fdp": [], "power": [], "nsel": []} for s in cfg.scores}
    ties = {s: 0 for s in cfg.scores}
    for rep in range(cfg.n_reps):
        s_pop, s_perm, s_train = (int(v) for v in spawn_seeds(cfg.seed, 3, stream=rep))
        x, mu, y = generate(cfg.setting, population, s_pop, mu_override=cfg.mu_override)
        perm = np.random.default_rng(s_perm).permutation(population)
        idx_c = perm[: cfg.n_calib]
        idx_t = perm[cfg.n_calib : cfg.n_calib + cfg.n_test]
        if cfg.predictor == "oracle":
            pred_all = mu
        else:
            x_train, _, y_train = generate(cfg.setting, cfg.n_train, s_train)
            (pred_all,) = knn_predictions(x_train, y_train, cfg.knn_k, x)
        truth = y[idx_t] > 0.0
        data = Dataset(
            calib_pred=pred_all[idx_c],
            calib_outcome=y[idx_c],
            test_pred=pred_all[idx_t],
        )
        for name in cfg.scores:
            rule, _ = _SCORE_CONFIGS[name]
            report = select(data, rule, _CONSTANT_ZERO, "deterministic", cfg.q)
            em = metrics(report.selected, truth)
            per_score[name]["fdp"].append(em.fdp)
            per_score[name]["power"].append(em.power)
            per_score[name]["nsel"].append(em.n_selected)
            if report.tie_diagnostics.get("pooled_duplicates", 0) > 0:
                ties[name] += 1
    rows = []
    warnings = []
    for name in cfg.scores:
        fdr_mean, fdr_se = _mean_se(np.asarray(per_score[name]["fdp"]))
        power_mean, power_se = _mean_se(np.asarray(per_score[name]["power"]))
        nsel_mean, _ = _mean_se(np.asarray(per_score[name]["nsel"], dtype=float))
        rows.append(
            McRow(
                setting=cfg.setting.setting_id,
                score=name,
                q=cfg.q,
                sigma=cfg.setting.sigma,
                n=cfg.n_calib,
                m=cfg.n_test,
                n_reps=cfg.n_reps,
                fdr_mean=fdr_mean,
                fdr_se=fdr_se,
                power_mean=power_mean,
                power_se=power_se,
                nsel_mean=nsel_mean,
                n_reps_with_ties=ties[name],
            )
        )
        if ties[name] > 0:
            warnings.append(
                f"score {name!r}: pooled score ties in {ties[name]} of "
                f"{cfg.n_reps} replicates; tie-free guarantee does not apply"
            )
    return McReport(rows=tuple(rows), seed=cfg.seed, warnings=tuple(warnings))


# ---------------------------------------------------------------------------
# Analytic populations used by the asymptotic workflows and their tests.
# ---------------------------------------------------------------------------


def mixture_population(
    pi0: float, n: int, seed: int, gap: float = 2.0
) -> tuple[np.ndarray, np.ndarray]:
    """Population whose null-rank distribution is a point-mass/uniform mixture.

    Rows carry ``pred = gap*b - w`` and ``outcome = gap*b`` with
    ``b ~ Bernoulli(1 - pi0)`` and ``w ~ Unif[0,1]``. Under the residual
    score at threshold zero the labeled scores are exactly Unif[0,1] while
    the null-evaluated scores sit ``gap`` below for exceeding rows, so the
    randomized-CDF values are 0 with probability ``1 - pi0`` and Unif[0,1]
    with probability ``pi0``.
    """
    if not 0.0 < pi0 < 1.0:
        raise ContractError("pi0 must be in (0,1)")
    rng = np.random.default_rng(int(seed))
    b = (rng.random(n) < 1.0 - pi0).astype(float)
    w = rng.random(n)
    return gap * b - w, gap * b


def separated_population(
    pi0: float, n: int, seed: int
) -> tuple[np.ndarray, np.ndarray]:
    """Binary population perfectly ordered by the prediction.

    ``pred ~ Unif[0,1]`` and ``outcome = 1{pred > pi0}``: the exceedance
    indicator is a deterministic threshold of the prediction, the regime in
    which the clipped score spends the full error budget and the limiting
    FDR sits at the nominal level whenever ``q < pi0``.
    """
    if not 0.0 < pi0 < 1.0:
        raise ContractError("pi0 must be in (0,1)")
    rng = np.random.default_rng(int(seed))
    pred = rng.random(n)
    return pred, (pred > pi0).astype(float)


def pure_null_population(n: int, seed: int) -> tuple[np.ndarray, np.ndarray]:
    """Population with no exceeding rows at all (outcome identically zero)."""
    rng = np.random.default_rng(int(seed))
    return rng.random(n), np.zeros(n)


def dgp_population(setting: DgpSetting, n: int, seed: int) -> tuple[np.ndarray, np.ndarray]:
    """Population drawn from a synthetic DGP with oracle-mean predictions."""
    _, mu, y = generate(setting, n, seed)
    return mu, y
