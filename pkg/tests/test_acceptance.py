"""Acceptance criteria, each at its stated tolerance and runtime limit.

Every test records one PASS/FAIL line (printed in the terminal summary) and
then asserts the same condition.
"""
import time
from fractions import Fraction

import numpy as np
import pytest

from splitkit import IterationState, SolverParams, dual_triple, its_step, validate_params
from splitkit.admm import AdmgConfig, SpadmmConfig, admm3_step, spadmm_step
from splitkit.ama import ama3_step, rama3_step, riama_step
from splitkit.bench import ExperimentConfig, InfeasibleParameters, check_config, run_single, sweep
from splitkit.errors import ParameterError
from splitkit.functions import l1_norm, nuclear_norm
from splitkit.model import Constant, fro, primal_objective
from splitkit.prox import prox_conjugate, prox_l1, prox_nuclear, svd
from splitkit.spcp import assemble_spcp_problem, gen_spcp_instance
from splitkit.splitting import DualState, best_witness, lambda_upper_bound

from conftest import BENCH_SEED, EPS_BAR, GAMMA, SMALL_SEED, report_criterion

pytestmark = pytest.mark.acceptance


def check(number, conditions, extra=""):
    """``conditions`` maps a short label to a boolean; all must hold."""
    failed = [label for label, ok in conditions.items() if not ok]
    detail = ("all checks hold" if not failed else "failed: " + "; ".join(failed)) + (f" ({extra})" if extra else "")
    report_criterion(number, not failed, detail)
    assert not failed, detail


def ks(rows):
    return [int(r["k"]) for r in rows]


# --- 1: gamma sweep ----------------------------------------------------

def test_criterion_1_gamma_sweep():
    t0 = time.perf_counter()
    rows = sweep(ExperimentConfig.reference("ama", m=200, seed=BENCH_SEED), "gamma", [0.0005, 0.005, 0.05, 0.1])
    elapsed = time.perf_counter() - t0
    k = ks(rows)
    check(1, {
        "all converged": all(r["converged"] for r in rows),
        "strictly increasing in gamma": all(a < b for a, b in zip(k, k[1:])),
        "k(0.0005) in [20, 60]": 20 <= k[0] <= 60,
        "k(0.005)/k(0.0005) >= 4": k[1] / k[0] >= 4,
        "runtime < 120 s": elapsed < 120,
    }, f"k={k}, {elapsed:.1f} s")


# --- 2: lambda sweep ---------------------------------------------------

def test_criterion_2_lambda_sweep():
    t0 = time.perf_counter()
    rows = sweep(ExperimentConfig.reference("rama", m=200, seed=BENCH_SEED), "lambda", [0.5, 0.8, 1.0, 1.2, 1.5])
    elapsed = time.perf_counter() - t0
    k = ks(rows)
    check(2, {
        "all converged": all(r["converged"] for r in rows),
        "strictly decreasing in lambda": all(a > b for a, b in zip(k, k[1:])),
        "k(1.5) <= 0.85 k(1)": k[4] <= 0.85 * k[2],
        "runtime < 60 s": elapsed < 60,
    }, f"k={k}, {elapsed:.1f} s")


# --- 3 and 8: all methods on m = 200 and 400 ---------------------------

METHODS = ("admm3", "admg", "spadmm", "ama", "rama", "riama_const", "riama_adaptive")


@pytest.fixture(scope="module")
def table_runs():
    runs, solve_seconds = {}, 0.0
    for m in (200, 400):
        for method in METHODS:
            row, rec, inst = run_single(ExperimentConfig.reference(method, m=m, seed=BENCH_SEED, diagnostics=True))
            runs[m, method] = (row, rec, inst)
            solve_seconds += rec.wall_seconds
    return runs, solve_seconds


def test_criterion_3_method_ordering(table_runs):
    runs, seconds = table_runs
    cond, summary = {}, []
    for m in (200, 400):
        row = {meth: runs[m, meth][0] for meth in METHODS}
        r = runs[m, "ama"][2].r
        k = {meth: row[meth]["k"] for meth in METHODS}
        summary.append(f"m={m}: " + " ".join(f"{meth}={k[meth]}" for meth in METHODS))
        for meth in METHODS:
            x = row[meth]
            cond[f"m={m} {meth} converged"] = x["converged"]
            cond[f"m={m} {meth} rank == {r}"] = x["rank"] == r
            cond[f"m={m} {meth} rel_L_star <= 1e-3"] = x["rel_L_star"] <= 1e-3
            cond[f"m={m} {meth} rel_S_star <= 1e-4"] = x["rel_S_star"] <= 1e-4
        for meth in ("rama", "riama_const", "riama_adaptive", "admm3", "spadmm"):
            cond[f"m={m} k({meth}) < k(ama)"] = k[meth] < k["ama"]
    cond["runtime < 300 s"] = seconds < 300
    check(3, cond, "; ".join(summary) + f"; {seconds:.1f} s")


def test_criterion_8_certificates(table_runs):
    runs, _ = table_runs
    cond, worst_kkt = {}, 0.0
    for (m, meth), (row, rec, inst) in runs.items():
        if not rec.converged:
            continue
        prob = assemble_spcp_problem(inst)
        x = rec.state.reported
        worst_kkt = max(worst_kkt, rec.final_kkt)
        gaps = [t.relative_gap for t in rec.trace]
        cond[f"m={m} {meth} kkt <= 1e-4"] = rec.final_kkt <= 1e-4
        cond[f"m={m} {meth} residual <= 1e-4 ||b||"] = fro(prob.residual(*x)) <= 1e-4 * fro(inst.b)
        cond[f"m={m} {meth} gap <= 1e-3"] = gaps[-1] <= 1e-3
        cond[f"m={m} {meth} gap decreasing over final half"] = gaps[-1] <= gaps[len(gaps) // 2]
    check(8, cond, f"largest terminal kkt {worst_kkt:.3g}")


# --- 4: dual equivalence -----------------------------------------------

def test_criterion_4_dual_equivalence():
    t0 = time.perf_counter()
    inst = gen_spcp_instance(20, seed=SMALL_SEED)
    prob = assemble_spcp_problem(inst)
    alpha, lam = 0.15, 1.25
    s = IterationState.initial(prob)
    primal = []
    for _ in range(50):
        s = riama_step(prob, s, GAMMA, alpha, lam)
        primal.append(s.w)
    ops = dual_triple(prob)
    z0 = -GAMMA * inst.b
    d, dual = DualState(z0, z0), []
    for _ in range(51):
        step = its_step(d, ops, GAMMA, alpha, lam)
        dual.append(step.w)
        d = step.state
    worst = 0.0
    for a, b in zip(primal, dual[1:]):
        scale = np.maximum(np.abs(a), np.abs(b))
        err = np.where(scale > 0, np.abs(a - b) / np.where(scale > 0, scale, 1), 0)
        worst = max(worst, float(err.max()))
    elapsed = time.perf_counter() - t0
    check(4, {"w relative error <= 1e-9": worst <= 1e-9, "runtime < 5 s": elapsed < 5},
          f"max componentwise relative error {worst:.2e}, {elapsed:.2f} s")


# --- 5: degenerations --------------------------------------------------

def test_criterion_5_degenerations():
    t0 = time.perf_counter()
    prob = assemble_spcp_problem(gen_spcp_instance(20, seed=SMALL_SEED))
    pairs = {
        "riama(0, 1) == ama": (lambda s: riama_step(prob, s, GAMMA, 0.0, 1.0), lambda s: ama3_step(prob, s, GAMMA)),
        "riama(0, 1.5) == rama": (lambda s: riama_step(prob, s, GAMMA, 0.0, 1.5), lambda s: rama3_step(prob, s, GAMMA, 1.5)),
        "spadmm(1, 0) == admm3": (
            lambda s: spadmm_step(prob, s, GAMMA, SpadmmConfig(1.0, (0.0, 0.0, 0.0))),
            lambda s: admm3_step(prob, s, GAMMA),
        ),
    }
    cond = {}
    for label, (f, g) in pairs.items():
        a = b = IterationState.initial(prob)
        same = True
        for _ in range(100):
            a, b = f(a), g(b)
            same &= all(np.array_equal(getattr(a, n), getattr(b, n)) for n in ("x1", "x2", "x3", "w"))
        cond[label] = same
    elapsed = time.perf_counter() - t0
    cond["runtime < 5 s"] = elapsed < 5
    check(5, cond, f"{elapsed:.2f} s")


# --- 6: parameter gate -------------------------------------------------

def exact_bound(alpha, delta, sigma, eps_bar):
    a, d, s, e = (Fraction(x) for x in (alpha, delta, sigma, eps_bar))
    q = a * (1 + a) + a * d + s
    return float((d - a * q) * (2 - e) / (d * (1 + q)))


def rejected(**kw):
    try:
        check_config(ExperimentConfig.reference(**kw))
    except (InfeasibleParameters, ParameterError):
        return True
    return False


def test_criterion_6_parameter_gate():
    base = SolverParams(GAMMA, EPS_BAR, beta=1.0)
    sigma, delta, bound = best_witness(0.15, EPS_BAR)
    cond = {
        "base (beta=1, eps_bar=0.00026, gamma=0.0005) accepted": validate_params(base, 1000).feasible,
        "gamma=0.00052 rejected (c1)": "c1" in validate_params(SolverParams(0.00052, EPS_BAR, beta=1.0), 1000).violated,
        "tau=1.7 rejected": rejected(method="spadmm", tau=1.7),
        "theta=1 rejected": rejected(method="admg", theta=1.0),
        "witness bound matches exact recomputation to 1e-12": abs(bound - exact_bound(0.15, delta, sigma, EPS_BAR)) <= 1e-12,
    }
    reference = {
        "ama": {}, "rama": {"lam": 1.5}, "riama_const": {"alpha": 0.15, "lam": 1.25},
        "riama_adaptive": {"lam": 1.5, "alpha_cap": 0.005}, "admg": {"theta": 0.99999}, "spadmm": {"tau": 1.2},
        "admm3": {},
    }
    for method, kw in reference.items():
        cfg = ExperimentConfig(method=method, eps_bar=EPS_BAR, **kw)
        cond[f"{method} reference configuration accepted"] = not rejected(method=method, eps_bar=EPS_BAR, **kw)
        report = check_config(cfg)
        if report is not None and report.witness is not None:
            s, d = report.witness
            a = cfg.alpha if method == "riama_const" else (0.005 if method == "riama_adaptive" else 0.0)
            cond[f"{method} witness bound exact"] = abs(lambda_upper_bound(a, d, s, EPS_BAR) - exact_bound(a, d, s, EPS_BAR)) <= 1e-12
    check(6, cond, f"lambda bound for alpha=0.15: {bound:.6f} at sigma={sigma:g}, delta={delta:.6g}")


# --- 7: prox oracles ---------------------------------------------------

def test_criterion_7_prox_oracles():
    t0 = time.perf_counter()
    rng = np.random.default_rng(7)
    grid = np.linspace(-10, 10, 200001)
    l1_err = 0.0
    for v, t in zip(rng.uniform(-8, 8, 20), rng.uniform(0.1, 3, 20)):
        ref = grid[np.argmin(np.abs(grid) + (grid - v) ** 2 / (2 * t))]
        l1_err = max(l1_err, abs(prox_l1(np.array([v]), t)[0] - ref))
    V, t = rng.standard_normal((5, 5)), 0.7
    P = prox_nuclear(V, t)
    obj = lambda X: t * np.linalg.svd(X, compute_uv=False).sum() + 0.5 * np.sum((X - V) ** 2)
    beats = all(obj(P + 0.05 * rng.standard_normal((5, 5))) >= obj(P) for _ in range(1000))
    svd_err = 0.0
    for shape in ((5, 5), (30, 30), (12, 7)):
        A = rng.standard_normal(shape)
        for method in ("lapack", "jacobi"):
            f = svd(A, method=method)
            U, s, W = f.U, f.singular_values, f.V
            svd_err = max(
                svd_err,
                np.linalg.norm((U * s) @ W.T - A) / np.linalg.norm(A),
                np.abs(U.T @ U - np.eye(U.shape[1])).max(),
                np.abs(W.T @ W - np.eye(W.shape[1])).max(),
            )
    # prox of t f* from the conjugate's closed form (projection onto the dual-norm ball)
    def spectral_clip(v, w):
        U, s, Vt = np.linalg.svd(v)
        return (U * np.minimum(s, w)) @ Vt

    moreau = 0.0
    for f, conj_prox in ((l1_norm(0.7), lambda v: np.clip(v, -0.7, 0.7)), (nuclear_norm(1.3), lambda v: spectral_clip(v, 1.3))):
        for t in (0.1, 1.0, 4.0):
            V = 3 * rng.standard_normal((6, 6))
            dual = conj_prox(V)
            moreau = max(
                moreau,
                np.abs(V - t * f.prox(V / t, 1 / t) - dual).max(),
                np.abs(prox_conjugate(f, V, t) - dual).max(),
            )
    elapsed = time.perf_counter() - t0
    check(7, {
        "prox_l1 within 1e-3 of grid minimizer": l1_err <= 1e-3,
        "prox_nuclear beats 1000 perturbations": beats,
        "svd reconstruction and orthonormality <= 1e-8": svd_err <= 1e-8,
        "Moreau residual <= 1e-10": moreau <= 1e-10,
        "runtime < 10 s": elapsed < 10,
    }, f"l1 {l1_err:.1e}, svd {svd_err:.1e}, Moreau {moreau:.1e}, {elapsed:.2f} s")
