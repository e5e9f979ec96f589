"""Inertial relaxed three-operator splitting and its parameter gate.

Finds a zero of ``A + B + C`` (``A``, ``B`` maximally monotone, ``C``
cocoercive) with

    y    = z + alpha_k (z - z_prev)
    w    = J_{gamma B}(y)
    u    = J_{gamma A}(2 w - y - gamma C w)
    z+   = y + lambda_k (u - w)

Applied to the dual of the three-block problem it is the dual-space
counterpart of the relaxed inertial alternating minimization iteration.
"""
from __future__ import annotations

import math
import time
from dataclasses import dataclass, field
from typing import Callable, NamedTuple, Optional

import numpy as np

from .errors import ConfigurationError, ParameterError
from .model import RunRecord, SeparableProblem, SolverParams, TraceEntry, fro
from .prox import prox_conjugate

# witness grid for the relaxation bound
SIGMA_GRID = np.logspace(-6, 0, 100)
DELTA_OFFSETS = np.logspace(-6, 1, 100)


@dataclass(frozen=True)
class MonotoneTriple:
    """``resolvent_A(x, gamma)``, ``resolvent_B(x, gamma)``, ``forward_C(x)``."""

    resolvent_A: Callable
    resolvent_B: Callable
    forward_C: Callable
    cocoercivity_beta: float


@dataclass
class ParamReport:
    feasible: bool
    gamma_max: float
    lambda_upper: float
    violated: list = field(default_factory=list)
    witness: Optional[tuple] = None
    notes: list = field(default_factory=list)

    def describe(self) -> str:
        lines = [
            f"feasible: {self.feasible}",
            f"gamma_max (2*beta*eps_bar): {self.gamma_max:.6g}",
            f"lambda_upper: {self.lambda_upper:.12g}",
        ]
        if self.witness is not None:
            lines.append(f"witness (sigma, delta): ({self.witness[0]:.6g}, {self.witness[1]:.6g})")
        if self.violated:
            lines.append("violated: " + ", ".join(self.violated))
        lines.extend(self.notes)
        return "\n".join(lines)


def delta_lower_bound(alpha: float, sigma: float) -> float:
    """Smallest admissible ``delta`` (exclusive) for given ``alpha``, ``sigma``."""
    return (alpha**2 * (1 + alpha) + alpha * sigma) / (1 - alpha**2)


def lambda_upper_bound(alpha: float, delta: float, sigma: float, eps_bar: float) -> float:
    """Largest relaxation parameter allowed with inertia bound ``alpha``.

    Raises ParameterError (condition c3) when ``delta`` does not exceed its
    lower bound.
    """
    if not 0 <= alpha < 1:
        raise ParameterError(f"c2: inertia bound must lie in [0, 1), got {alpha}")
    if not 0 < eps_bar < 1:
        raise ParameterError(f"c1: eps_bar must lie in (0, 1), got {eps_bar}")
    if not (sigma > 0 and delta > 0):
        raise ParameterError("c3: sigma and delta must be positive")
    if delta <= delta_lower_bound(alpha, sigma):
        raise ParameterError(
            f"c3: delta={delta} must exceed {delta_lower_bound(alpha, sigma)!r}"
        )
    alpha_bar = 1.0 / (2.0 - eps_bar)
    q = alpha * (1 + alpha) + alpha * delta + sigma
    return (delta - alpha * q) / (alpha_bar * delta * (1 + q))


def best_witness(alpha: float, eps_bar: float):
    """Grid search over ``(sigma, delta)`` maximizing the relaxation bound.

    Returns ``(sigma, delta, bound)``.
    """
    best = (math.nan, math.nan, -math.inf)
    for sigma in SIGMA_GRID:
        lo = delta_lower_bound(alpha, sigma)
        for delta in lo + DELTA_OFFSETS:
            if delta <= lo:
                continue
            bound = lambda_upper_bound(alpha, delta, sigma, eps_bar)
            if bound > best[2]:
                best = (float(sigma), float(delta), bound)
    return best


def validate_params(params: SolverParams, horizon: int, mode: str = "fixed") -> ParamReport:
    """Check step size, inertia and relaxation schedules over ``horizon``.

    ``mode="fixed"``: conditions (c1)-(c3) for a prescribed inertia schedule.
    ``mode="adaptive"``: the box condition on ``lambda_k * alpha_bar``; the
    summability condition is enforced online by the adaptive inertia rule.
    """
    if horizon < 1:
        raise ParameterError("horizon must be at least 1")
    if mode not in ("fixed", "adaptive"):
        raise ParameterError(f"unknown validation mode {mode!r}")
    violated = []
    notes = []
    eps_bar = params.eps_bar
    gamma_max = 2.0 * params.beta * eps_bar
    eps_ok = 0 < eps_bar < 1
    if not (eps_ok and params.beta > 0 and 0 < params.gamma < gamma_max):
        violated.append("c1")
    alpha_bar = 1.0 / (2.0 - eps_bar) if eps_ok else math.nan

    lambdas = [params.lambda_schedule(k) for k in range(1, horizon + 1)]
    lam_min, lam_max = min(lambdas), max(lambdas)
    report = ParamReport(False, gamma_max, math.nan, violated, None, notes)

    if mode == "adaptive":
        cap = params.alpha_cap if params.alpha_cap is not None else 0.0
        if not 0 <= cap < 1:
            violated.append("c2")
        if not (lam_min > 0 and lam_max * alpha_bar < 1):
            violated.append("c2")
        report.lambda_upper = 1.0 / alpha_bar if eps_ok else math.nan
        notes.append("summability of alpha_{k+1}||p - gamma*lambda*r||^2 is enforced online")
    else:
        # p^1 = 0 stands in for alpha_1 = 0, so the first entry is exempt
        alphas = [params.alpha_schedule(k) for k in range(2, horizon + 2)]
        cap = params.alpha_cap if params.alpha_cap is not None else max(alphas)
        if not 0 <= cap < 1 or min(alphas) < 0 or max(alphas) > cap:
            violated.append("c2")
        elif any(b < a for a, b in zip(alphas, alphas[1:])):
            violated.append("c2")
        if "c2" not in violated and eps_ok:
            if params.sigma is not None and params.delta is not None:
                try:
                    bound = lambda_upper_bound(cap, params.delta, params.sigma, eps_bar)
                    report.witness = (params.sigma, params.delta)
                except ParameterError:
                    bound = -math.inf
            else:
                sigma, delta, bound = best_witness(cap, eps_bar)
                report.witness = (sigma, delta)
            report.lambda_upper = bound
            if not (lam_min > 0 and lam_max <= bound):
                violated.append("c3")
        elif "c2" not in violated:
            violated.append("c3")
    # de-duplicate, keep order
    report.violated = list(dict.fromkeys(violated))
    report.feasible = not report.violated
    return report


class DualState(NamedTuple):
    z_prev: np.ndarray
    z_curr: np.ndarray


class SplittingStep(NamedTuple):
    state: DualState
    y: np.ndarray
    w: np.ndarray
    u: np.ndarray


def its_step(state: DualState, ops: MonotoneTriple, gamma: float, alpha: float, lam: float) -> SplittingStep:
    """One inertial relaxed three-operator splitting step."""
    z_prev, z = state
    y = z + alpha * (z - z_prev)
    w = ops.resolvent_B(y, gamma)
    u = ops.resolvent_A(2 * w - y - gamma * ops.forward_C(w), gamma)
    z_next = y + lam * (u - w)
    return SplittingStep(DualState(z, z_next), y, w, u)


def run_splitting(
    ops: MonotoneTriple,
    params: SolverParams,
    z0,
    max_iter: int = 10000,
    tol: float = 1e-8,
    callback=None,
):
    """Iterate until ``||u - w|| <= tol`` or ``max_iter`` steps.

    Starts from ``z^0 = z^1 = z0``. Returns ``(record, w)`` with ``w`` the last
    ``J_{gamma B}`` output. ``callback(k, step)`` sees every step.
    """
    z0 = np.asarray(z0, dtype=float)
    state = DualState(z0, z0)
    record = RunRecord()
    w = None
    t0 = time.perf_counter()
    for k in range(1, max_iter + 1):
        step = its_step(state, ops, params.gamma, params.alpha_schedule(k), params.lambda_schedule(k))
        gap = fro(step.u - step.w)
        record.trace.append(
            TraceEntry(u_w_gap=gap, z_step=fro(step.state.z_curr - step.state.z_prev))
        )
        record.iterations = k
        if callback is not None:
            callback(k, step)
        state, w = step.state, step.w
        if gap <= tol:
            record.converged = True
            break
    record.wall_seconds = time.perf_counter() - t0
    return record, w


def _composed_resolvent(f, L, shift=None):
    """Resolvent of ``gamma d(f* o L*)`` (plus a linear term) when ``L* L = c I``."""
    c = L.gram_scale
    if c is None or c <= 0:
        raise ConfigurationError(f"map {L.name} must satisfy L* L = c I with c > 0")

    def resolvent(v, gamma):
        if shift is not None:
            v = v + gamma * shift
        Lv = L.adjoint(v)
        return v + L.forward(prox_conjugate(f, Lv, c * gamma) - Lv) / c

    return resolvent


def dual_triple(problem: SeparableProblem) -> MonotoneTriple:
    """Operators of the dual problem.

    ``A = d(f2* o L2*)``, ``B = d(f3* o L3* - <b, .>)``,
    ``C = grad(f1* o L1*)``, built from the blocks' prox handles through the
    Moreau identity.
    """
    f1, f2, f3 = problem.blocks
    L1, L2, L3 = problem.maps
    if f1.conj_grad is None or f1.strong_convexity <= 0:
        raise ConfigurationError("block 1 must be strongly convex with a known conjugate gradient")
    return MonotoneTriple(
        resolvent_A=_composed_resolvent(f2, L2),
        resolvent_B=_composed_resolvent(f3, L3, shift=problem.rhs),
        forward_C=lambda w: L1.forward(f1.conj_grad(L1.adjoint(w))),
        cocoercivity_beta=problem.cocoercivity,
    )
