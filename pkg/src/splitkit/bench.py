"""SPCP experiments: single runs, repeats and parameter sweeps."""
from __future__ import annotations

import dataclasses
import math
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from typing import Optional

import numpy as np

from .admm import AdmgConfig, SpadmmConfig, run_admm
from .ama import ADAPTIVE_CAP, AmaVariant, run_ama
from .errors import ConfigurationError, ParameterError
from .model import Constant, SolverParams
from .runner import StoppingRule
from .spcp import assemble_spcp_problem, gen_spcp_instance, recovery_metrics
from .splitting import ParamReport, validate_params

METHODS = ("admm3", "admg", "spadmm", "ama", "rama", "riama_const", "riama_adaptive")
AMA_FAMILY = ("ama", "rama", "riama_const", "riama_adaptive")
COLUMNS = ("method", "gamma", "lambda", "alpha", "k", "rank", "rel_L_star", "rel_S_star", "cpu_seconds", "converged")

# fraction of 2 * gamma / beta used for eps_bar when it is not given
EPS_BAR_FACTOR = 0.52

# per-method parameters used when a caller asks for the reference settings
REFERENCE = {
    "admm3": {},
    "admg": {"theta": 0.99999},
    "spadmm": {"tau": 1.2},
    "ama": {},
    "rama": {"lam": 1.5},
    "riama_const": {"lam": 1.25, "alpha": 0.15},
    "riama_adaptive": {"lam": 1.5, "alpha_cap": ADAPTIVE_CAP},
}

REQUIRED = {
    "admg": ("theta",),
    "spadmm": ("tau",),
    "rama": ("lam",),
    "riama_const": ("lam", "alpha"),
    "riama_adaptive": ("lam",),
}


class InfeasibleParameters(ParameterError):
    """Parameters rejected by the convergence conditions; carries the report."""

    def __init__(self, message, report: Optional[ParamReport] = None):
        super().__init__(message)
        self.report = report


@dataclass(frozen=True)
class ExperimentConfig:
    """One SPCP experiment.

    ``lam`` is the relaxation parameter (``lambda`` on the command line and
    in result rows). ``eps_bar`` defaults to ``0.52 * gamma`` so that the
    step size condition holds with the margin used in the reference runs.
    """

    method: str = "ama"
    m: int = 200
    rank_frac: float = 0.05
    sparsity_frac: float = 0.05
    gamma: float = 0.0005
    lam: Optional[float] = None
    alpha: Optional[float] = None
    theta: Optional[float] = None
    tau: Optional[float] = None
    eps: float = 1e-5
    max_iter: int = 10000
    seed: int = 0
    repeats: int = 1
    beta1: float = 0.05
    noise_std: float = 1e-5
    eps_bar: Optional[float] = None
    alpha_cap: float = ADAPTIVE_CAP
    diagnostics: bool = False

    def __post_init__(self):
        if self.method not in METHODS:
            raise ConfigurationError(f"unknown method {self.method!r}; choose from {', '.join(METHODS)}")
        if not self.eps > 0:
            raise ConfigurationError("eps must be positive")
        if self.repeats < 1:
            raise ConfigurationError("repeats must be at least 1")
        if self.max_iter < 1:
            raise ConfigurationError("max_iter must be at least 1")
        missing = [f for f in REQUIRED.get(self.method, ()) if getattr(self, f) is None]
        if missing:
            names = ", ".join("lambda" if f == "lam" else f for f in missing)
            raise ConfigurationError(f"method {self.method} needs {names}")

    @classmethod
    def reference(cls, method: str, **overrides) -> "ExperimentConfig":
        """Config with the reference parameters of ``method``."""
        if method not in REFERENCE:
            raise ConfigurationError(f"unknown method {method!r}")
        kw = dict(REFERENCE[method])
        kw.update(overrides)
        return cls(method=method, **kw)

    def replace(self, **changes) -> "ExperimentConfig":
        return dataclasses.replace(self, **changes)

    @property
    def effective_lambda(self) -> float:
        if self.method in ("rama", "riama_const", "riama_adaptive"):
            return self.lam
        return 1.0 if self.method == "ama" else math.nan

    @property
    def effective_alpha(self) -> float:
        if self.method == "riama_const":
            return self.alpha
        if self.method == "riama_adaptive":
            return self.alpha_cap
        return 0.0 if self.method in AMA_FAMILY else math.nan

    def solver_params(self) -> SolverParams:
        eps_bar = EPS_BAR_FACTOR * self.gamma if self.eps_bar is None else self.eps_bar
        lam = self.effective_lambda if self.method in AMA_FAMILY else 1.0
        alpha = self.alpha if self.method == "riama_const" else 0.0
        cap = self.alpha_cap if self.method == "riama_adaptive" else None
        return SolverParams(
            gamma=self.gamma,
            eps_bar=eps_bar,
            beta=1.0,  # mu / ||L1||^2 for the SPCP blocks
            alpha_schedule=Constant(alpha),
            lambda_schedule=Constant(lam),
            alpha_cap=cap,
        )


def check_config(cfg: ExperimentConfig) -> Optional[ParamReport]:
    """Refuse parameters outside the convergence conditions.

    AMA-family methods go through :func:`validate_params` (adaptive mode for
    ``riama_adaptive``); ADMM variants check their own parameter ranges.
    Returns the report for AMA-family methods.
    """
    if cfg.method in AMA_FAMILY:
        mode = "adaptive" if cfg.method == "riama_adaptive" else "fixed"
        report = validate_params(cfg.solver_params(), horizon=min(cfg.max_iter, 1000), mode=mode)
        if not report.feasible:
            raise InfeasibleParameters(
                f"{cfg.method}: violated {', '.join(report.violated)}", report
            )
        return report
    if not cfg.gamma > 0:
        raise InfeasibleParameters("gamma must be positive")
    try:
        _admm_cfg(cfg)
    except ParameterError as exc:
        raise InfeasibleParameters(f"{cfg.method}: {exc}") from exc
    return None


def _admm_cfg(cfg):
    if cfg.method == "admg":
        return AdmgConfig(theta=cfg.theta)
    if cfg.method == "spadmm":
        return SpadmmConfig(tau=cfg.tau)
    return None


def _variant(method):
    return {
        "ama": AmaVariant("ama", "zero"),
        "rama": AmaVariant("rama", "zero"),
        "riama_const": AmaVariant("riama", "schedule"),
    }.get(method)


def run_single(cfg: ExperimentConfig, seed: Optional[int] = None):
    """Run ``cfg`` on one seed; returns ``(row, record, instance)``."""
    check_config(cfg)
    seed = cfg.seed if seed is None else seed
    inst = gen_spcp_instance(cfg.m, cfg.rank_frac, cfg.sparsity_frac, cfg.noise_std, cfg.beta1, seed)
    problem = assemble_spcp_problem(inst)
    stop = StoppingRule(eps=cfg.eps, max_iter=cfg.max_iter, diagnostics=cfg.diagnostics)
    if cfg.method in AMA_FAMILY:
        params = cfg.solver_params()
        variant = _variant(cfg.method) or AmaVariant("riama", "adaptive", cap=cfg.alpha_cap)
        record = run_ama(problem, variant, params, stop)
    else:
        record = run_admm(problem, cfg.method, cfg.gamma, _admm_cfg(cfg), stop)
    _, L_k, S_k = record.state.reported
    _, L_prev, S_prev = record.previous.reported
    metrics = recovery_metrics(inst, L_k, S_k, L_prev, S_prev)
    row = {
        "method": cfg.method,
        "gamma": cfg.gamma,
        "lambda": cfg.effective_lambda,
        "alpha": cfg.effective_alpha,
        "k": record.iterations,
        "rank": metrics.rank_Lk,
        "rel_L_star": metrics.rel_L_star,
        "rel_S_star": metrics.rel_S_star,
        "cpu_seconds": record.wall_seconds,
        "converged": record.converged,
        "seed": seed,
    }
    return row, record, inst


def median_row(rows):
    """Columnwise median of repeated runs; ``converged`` only if all did."""
    out = dict(rows[0])
    for key in ("k", "rank", "rel_L_star", "rel_S_star", "cpu_seconds"):
        out[key] = float(np.median([r[key] for r in rows]))
    out["converged"] = all(r["converged"] for r in rows)
    out["seed"] = "median"
    return out


def run_experiment(cfg: ExperimentConfig):
    """Rows for seeds ``seed .. seed + repeats - 1``, plus a median row when repeating."""
    check_config(cfg)
    rows = [run_single(cfg, cfg.seed + i)[0] for i in range(cfg.repeats)]
    if cfg.repeats > 1:
        rows.append(median_row(rows))
    return rows


AXIS_ALIASES = {"lambda": "lam"}
_NUMERIC = {
    f.name for f in dataclasses.fields(ExperimentConfig)
    if f.name not in ("method", "diagnostics")
}


def sweep_workers() -> int:
    """Worker threads for sweeps, from ``SPLITKIT_THREADS`` (default 1)."""
    raw = os.environ.get("SPLITKIT_THREADS", "1")
    try:
        return max(1, int(raw))
    except ValueError:
        raise ConfigurationError(f"SPLITKIT_THREADS must be an integer, got {raw!r}")


def sweep(template: ExperimentConfig, axis: str, values, workers: Optional[int] = None):
    """One :func:`run_experiment` per value of ``axis``, rows ordered by the value."""
    field_name = AXIS_ALIASES.get(axis, axis).replace("-", "_")
    if field_name not in _NUMERIC:
        raise ConfigurationError(f"unknown sweep axis {axis!r}")
    configs = [template.replace(**{field_name: v}) for v in values]
    for c in configs:
        check_config(c)
    workers = sweep_workers() if workers is None else workers
    if workers > 1 and len(configs) > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            results = list(pool.map(run_experiment, configs))
    else:
        results = [run_experiment(c) for c in configs]
    order = sorted(range(len(configs)), key=lambda i: getattr(configs[i], field_name))
    return [row for i in order for row in results[i]]
