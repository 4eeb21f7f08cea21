"""Acceptance gate: one test per criterion, one printed line per criterion.

Run with ``pytest tests/test_acceptance.py -v -s`` to see the lines as they
pass. Monte Carlo gates use frozen seeds; tolerances are fixed here, not
tuned at runtime.
"""

import csv
import json
import math

import numpy as np
import pytest

from confselect import (
    Dataset,
    DgpSetting,
    McConfig,
    ScoreRule,
    ThresholdSpec,
    bh_select,
    bh_threshold,
    generate,
    randomized_pvalues,
    same_class_pvalues,
    select,
    solve_tstar,
)
from confselect.asymptotics import asymptotic_fdr_power, population_sample_from_scores
from confselect.cli import main
from confselect.rng import unit_uniforms
from confselect.sim import (
    exchangeable_experiment,
    mixture_population,
    monte_carlo,
    separated_population,
)

SEED = 20260809
GRID_SIGMA = 0.5
CONST0 = ThresholdSpec(mode="constant", constant=0.0)


def report_line(criterion: int, ok: bool, detail: str) -> None:
    status = "PASS" if ok else "FAIL"
    print(f"criterion {criterion:2d}: {status} - {detail}")
    assert ok, f"criterion {criterion}: {detail}"


@pytest.fixture(scope="module")
def grid_reports():
    """Shared runs for criteria 1 and 3: 8 settings x 3 scores, N=500."""
    out = {}
    for sid in range(1, 9):
        cfg = McConfig(
            setting=DgpSetting(sid, GRID_SIGMA),
            n_calib=200,
            n_test=200,
            q=0.1,
            n_reps=500,
            seed=SEED + sid,
        )
        out[sid] = {row.score: row for row in monte_carlo(cfg).rows}
    return out


def test_criterion_01_fdr_control_iid(grid_reports):
    worst = []
    ok = True
    for sid, rows in grid_reports.items():
        for score, row in rows.items():
            bound = 0.1 + 3 * row.fdr_se
            ok &= row.fdr_mean <= bound
            worst.append((row.fdr_mean - bound, sid, score, row.fdr_mean))
    gap, sid, score, fdr = max(worst)
    report_line(
        1, ok,
        f"FDR <= 0.1 + 3SE on 8 settings x 3 scores "
        f"(tightest: setting {sid}/{score}, fdr={fdr:.4f}, slack={-gap:.4f})",
    )


def test_criterion_02_fdr_control_exchangeable():
    cfg = McConfig(
        setting=DgpSetting(2, 1.0),
        n_calib=500,
        n_test=100,
        q=0.2,
        n_reps=500,
        seed=SEED + 100,
        scores=("res",),
    )
    row = exchangeable_experiment(cfg, population=2000).rows[0]
    bound = 0.2 + 3 * row.fdr_se
    report_line(
        2,
        row.fdr_mean <= bound,
        f"without-replacement deterministic p-values: fdr={row.fdr_mean:.4f} "
        f"<= {bound:.4f} (ties in {row.n_reps_with_ties} reps)",
    )


def test_criterion_03_power_ordering(grid_reports):
    ok = True
    detail = []
    for sid, rows in grid_reports.items():
        p_res = rows["res"].power_mean
        p_sub = rows["sub"].power_mean
        p_clip = rows["clip"].power_mean
        good = (p_clip >= p_sub - 0.01) and (p_sub >= p_res - 0.01)
        ok &= good
        if not good:
            detail.append(f"setting {sid}: res={p_res:.3f} sub={p_sub:.3f} clip={p_clip:.3f}")
    report_line(
        3, ok,
        "power ordering clip >= sub - 0.01 >= res - 0.02 per setting"
        + ("" if ok else "; violations: " + "; ".join(detail)),
    )


def test_criterion_04_dominance_coupling():
    rules = (
        ScoreRule("residual"),
        ScoreRule("clipped", clip_m=100.0),
        ScoreRule("clipped_threshold", clip_m=100.0),
    )
    rng = np.random.default_rng(SEED + 4)
    total = 0
    violations = 0
    for rule in rules:
        for discrete in (False, True):
            for _ in range(17):
                n, m = 60, 1000

                def draw(size):
                    vals = rng.normal(size=size)
                    return np.round(vals) if discrete else vals

                mu_c, y_c, c_c = draw(n), draw(n), draw(n)
                calib = rule.scores(mu_c, y_c, c_c)
                mu_t = draw(m)
                c_t = draw(m)
                # null units: true outcome at or below the threshold,
                # including exact equality
                y_t = np.where(rng.random(m) < 0.3, c_t, c_t - np.abs(draw(m)))
                u = rng.random(m)
                p_hat = randomized_pvalues(calib, rule.scores_at_threshold(mu_t, c_t), u)
                p_star = randomized_pvalues(calib, rule.scores(mu_t, y_t, c_t), u)
                violations += int(np.sum(p_star > p_hat))
                total += m
    report_line(
        4,
        total >= 100_000 and violations == 0,
        f"oracle p <= randomized p on {total} null draws, {violations} violations",
    )


def test_criterion_05_generalized_super_uniformity():
    alphas = (0.01, 0.05, 0.1, 0.2, 0.5)
    ok = True
    details = []
    for sid in (1, 6):
        setting = DgpSetting(sid, GRID_SIGMA)
        hits = {(score, a): [] for score in ("clip", "res") for a in alphas}
        for rep in range(500):
            _, mu_c, y_c = generate(setting, 200, SEED + 1000 * sid + 2 * rep)
            _, mu_t, y_t = generate(setting, 200, SEED + 1000 * sid + 2 * rep + 1)
            u = unit_uniforms(SEED + rep, 200)
            null = y_t <= 0
            for score, rule in (
                ("clip", ScoreRule("clipped", clip_m=100.0)),
                ("res", ScoreRule("residual")),
            ):
                calib = rule.scores(mu_c, y_c, 0.0)
                p = randomized_pvalues(calib, rule.scores_at_threshold(mu_t, 0.0), u)
                for a in alphas:
                    hits[(score, a)].append(np.mean((p <= a) & null))
        worst_slack = math.inf
        for (score, a), vals in hits.items():
            vals = np.asarray(vals)
            se = vals.std(ddof=1) / np.sqrt(vals.size)
            slack = a + 3 * se - vals.mean()
            ok &= slack >= 0
            worst_slack = min(worst_slack, slack)
        details.append(f"setting {sid}: min slack {worst_slack:.4f}")
    report_line(
        5, ok, "P(p <= alpha and null) <= alpha + 3SE; " + "; ".join(details)
    )


def brute_force_k_star(p, q):
    m = len(p)
    best = 0
    for k in range(1, m + 1):
        if np.sum(p <= q * k / m) >= k:
            best = k
    return best


def test_criterion_06_bh_oracle_equivalence():
    rng = np.random.default_rng(SEED + 6)
    grid = np.arange(0.0, 1.05, 0.05)
    mismatches = 0
    for i in range(10_000):
        m = int(rng.integers(1, 13))
        kind = i % 3
        if kind == 0:
            p = rng.random(m)
        elif kind == 1:
            p = rng.choice(grid, size=m)
        else:
            p = np.minimum(1.0, rng.beta(0.5, 3.0, size=m))
        q = float(rng.choice([0.05, 0.1, 0.2, 0.5, 0.9]))
        result = bh_select(p, q)
        k_oracle = brute_force_k_star(p, q)
        sel_oracle = (
            set(np.flatnonzero(p <= q * k_oracle / m)) if k_oracle else set()
        )
        tau = bh_threshold(p, q)
        sel_tau = set(np.flatnonzero(p <= tau))
        if not (
            result.k_star == k_oracle
            and set(result.selected) == sel_oracle == sel_tau
        ):
            mismatches += 1
    report_line(
        6, mismatches == 0,
        f"step-up matches brute force and threshold route on 10000 vectors, "
        f"{mismatches} mismatches",
    )


def test_criterion_07_scaling_identity():
    rng = np.random.default_rng(SEED + 7)
    worst = 0.0
    for _ in range(1000):
        n = int(rng.integers(2, 60))
        mu = rng.uniform(-1, 1, n)
        y = (rng.random(n) < rng.uniform(0.2, 0.8)).astype(float)
        if not np.any(y == 0):
            y[rng.integers(n)] = 0.0
        m = int(rng.integers(1, 20))
        mu_t = rng.uniform(-1, 1, m)
        u = rng.random(m)
        calib_full = 100.0 * y - mu
        p_full = randomized_pvalues(calib_full, -mu_t, u)
        p0 = same_class_pvalues(-mu[y == 0], -mu_t, u)
        n0 = int(np.sum(y == 0))
        scaled = (n0 + 1) / (n + 1) * p0
        with np.errstate(invalid="ignore"):
            rel = np.abs(p_full - scaled) / np.where(scaled == 0, 1.0, scaled)
        worst = max(worst, float(rel.max()))
    report_line(
        7, worst <= 1e-12,
        f"full-calibration p = (n0+1)/(n+1) * same-class p on 1000 datasets, "
        f"max rel err {worst:.2e}",
    )


def test_criterion_08_asymptotic_threshold_and_pipeline_agreement():
    t_exact = 0.1 * 0.5 / (1 - 0.1 * 0.5)  # 0.05263...
    # plug-in solver on the analytic mixture population
    pred, outcome = mixture_population(0.5, 200_000, seed=SEED + 8)
    pop = population_sample_from_scores(ScoreRule("residual"), pred, outcome, 0.0)
    rep = asymptotic_fdr_power(pop, q=0.1, seed=SEED + 9)
    ok_t = abs(rep.t_star - t_exact) <= 0.005 and abs(rep.t_star - 0.05263) <= 0.005
    # finite-sample threshold agreement at n = m = 20000
    taus = []
    for r in range(3):
        pc, oc = mixture_population(0.5, 20_000, seed=SEED + 20 + r)
        pt, _ = mixture_population(0.5, 20_000, seed=SEED + 40 + r)
        data = Dataset(calib_pred=pc, calib_outcome=oc, test_pred=pt)
        out = select(
            data, ScoreRule("residual"), CONST0, "randomized", 0.1,
            seed=SEED + 60 + r,
        )
        taus.append(out.result.tau_hat)
    mean_tau = float(np.mean(taus))
    ok_tau = abs(mean_tau - rep.t_star) <= 0.01
    report_line(
        8, ok_t and ok_tau,
        f"t*={rep.t_star:.5f} (exact {t_exact:.5f}); "
        f"mean tau_hat={mean_tau:.5f}, |diff|={abs(mean_tau - rep.t_star):.5f}",
    )
    # the plug-in criterion must also certify its own regularity condition
    f_direct = np.where(
        np.random.default_rng(SEED + 80).random(200_000) < 0.5,
        np.random.default_rng(SEED + 81).random(200_000),
        0.0,
    )
    t_direct, flag = solve_tstar(f_direct, 0.1)
    assert abs(t_direct - t_exact) <= 0.005 and flag


def test_criterion_09_near_exhausted_fdr_clipped():
    n_pop = 200_000
    pred, outcome = separated_population(0.5, n_pop, seed=SEED + 90)
    pop = population_sample_from_scores(
        ScoreRule("clipped", clip_m=100.0), pred, outcome, 0.0
    )
    rep = asymptotic_fdr_power(pop, q=0.1, seed=SEED + 91)
    lo, hi = 0.08, 0.1 + 2 / math.sqrt(n_pop)
    report_line(
        9,
        lo <= rep.fdr_limit <= hi and rep.condition_flag,
        f"clipped-score limiting FDR {rep.fdr_limit:.4f} in [{lo}, {hi:.4f}]",
    )


def test_criterion_10_byte_identical_replay(tmp_path):
    calib = tmp_path / "calib.csv"
    test = tmp_path / "test.csv"
    with open(calib, "w", newline="") as f:
        w = csv.writer(f)
        w.writerow(["pred", "y"])
        w.writerows([[0.1, 0], [0.2, 0], [0.8, 1], [0.9, 1]])
    with open(test, "w", newline="") as f:
        w = csv.writer(f)
        w.writerow(["pred"])
        w.writerows([[0.05], [0.95]])

    outputs = []
    for tag in ("a", "b"):
        sel = tmp_path / f"sel_{tag}.json"
        sim = tmp_path / f"sim_{tag}.csv"
        asym = tmp_path / f"asym_{tag}.json"
        assert main([
            "select", "--calib", str(calib), "--test", str(test),
            "--pred", "pred", "--outcome", "y", "--score", "clip",
            "--method", "rand", "--q", "0.5", "--seed", "3", "--out", str(sel),
        ]) == 0
        assert main([
            "simulate", "--setting", "1", "--reps", "3", "--n-calib", "30",
            "--n-test", "20", "--seed", "11", "--out-csv", str(sim),
        ]) == 0
        assert main([
            "asymptotics", "--generator", "mixture", "--n-pop", "20000",
            "--q", "0.1", "--seed", "5", "--out", str(asym),
        ]) == 0
        outputs.append(
            (sel.read_bytes(), sim.read_bytes(), asym.read_bytes())
        )
    same = outputs[0] == outputs[1]
    sel_doc = json.loads(outputs[0][0])
    report_line(
        10,
        same and sel_doc["selected"] == [1],
        "select/simulate/asymptotics byte-identical under repeated seeds",
    )
