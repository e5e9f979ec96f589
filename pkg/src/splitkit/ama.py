"""Relaxed inertial alternating minimization for three blocks.

One iteration with inertia ``a = alpha_{k+1}`` and relaxation ``lam = lambda_k``:

    x1+ = argmin f1(x1) - <w, L1 x1>
    x2+ = argmin f2(x2) - <w, L2 x2> + gamma/2 ||L1 x1+ + L2 x2 + L3 x3 - b||^2
    r   = L1 x1+ + L2 x2+ + L3 x3 - b
    x3+ = argmin f3(x3) - <w + a p, L3 x3>
                 + gamma/2 ||L3 (x3 - x3^k) + (1 + a) lam r||^2
    w+  = w + a p - gamma (L3 (x3+ - x3^k) + (1 + a) lam r)
    p+  = a (p - gamma lam r)

``a = 0`` gives the relaxed method, ``a = 0`` and ``lam = 1`` plain AMA.
All three share one kernel so the degenerate settings are the same floating
point computation.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, Optional, Union

from .errors import ConfigurationError, ParameterError, StepError
from .model import IterationState, SeparableProblem, SolverParams, fro
from .runner import StoppingRule, drive
from .subproblems import lagrangian_argmin, quadratic_argmin

ADAPTIVE_CAP = 0.005


def adaptive_alpha(k: int, p, gamma: float, lam: float, residual, cap: float = ADAPTIVE_CAP) -> float:
    """``min(1 / (k^2 ||p - gamma lam r||^2), cap)``.

    Keeps ``sum_k alpha_{k+1} ||p - gamma lam r||^2`` finite. ``k = 0`` (no
    memory yet, ``p = 0``) and a vanishing norm return ``cap``.
    """
    n2 = fro(p - gamma * lam * residual) ** 2
    if k < 1 or n2 < 1e-300:
        return cap
    return min(1.0 / (k * k * n2), cap)


def riama_step(
    problem: SeparableProblem,
    state: IterationState,
    gamma: float,
    alpha: Union[float, Callable],
    lam: float,
) -> IterationState:
    """One relaxed inertial AMA iteration.

    ``alpha`` is ``alpha_{k+1}``, either a number or ``alpha(p, r)`` evaluated
    once the residual ``r`` is known (adaptive rule). The returned state also
    carries the shadow sequence of the dual splitting: ``z_prev = z^k``,
    ``z_curr = z^{k+1}``, ``y = y^k`` and ``u = u^k``.
    """
    f1, f2, f3 = problem.blocks
    L1, L2, L3 = problem.maps
    b = problem.rhs
    w, p, x3 = state.w, state.p, state.x3
    k = state.k

    L3x3 = L3.forward(x3)
    x1 = lagrangian_argmin(f1, L1, w, x0=state.x1, iteration=k)
    L1x1 = L1.forward(x1)
    x2 = quadratic_argmin(f2, L2, w / gamma - (L1x1 + L3x3 - b), gamma)
    L2x2 = L2.forward(x2)
    r = L1x1 + L2x2 + L3x3 - b
    if callable(alpha):
        alpha = alpha(p, r)
    s = (1 + alpha) * lam * r
    v = w + alpha * p
    x3_new = quadratic_argmin(f3, L3, L3x3 - s + v / gamma, gamma)
    L3x3_new = L3.forward(x3_new)
    w_new = v - gamma * (L3x3_new - L3x3 + s)
    p_new = alpha * (p - gamma * lam * r)

    z = w + gamma * L3x3 - gamma * b - p
    z_new = w_new + gamma * L3x3_new - gamma * b - p_new
    new = IterationState(
        x1=x1, x2=x2, x3=x3_new, w=w_new, p=p_new, k=k + 1, alpha=float(alpha),
        z_prev=z, z_curr=z_new, y=z + p, u=w - gamma * r,
    )
    for name in ("x1", "x2", "x3", "w"):
        if not bool(fro(getattr(new, name)) < float("inf")):
            raise StepError(f"non-finite {name}", k)
    return new


def rama3_step(problem, state, gamma, lam):
    """Relaxed AMA: the inertial step with ``alpha = 0``."""
    return riama_step(problem, state, gamma, 0.0, lam)


def ama3_step(problem, state, gamma):
    """Plain three-block AMA: ``alpha = 0``, ``lambda = 1``."""
    return riama_step(problem, state, gamma, 0.0, 1.0)


@dataclass(frozen=True)
class AmaVariant:
    """Which member of the AMA family to run.

    ``kind`` is ``"riama"``, ``"rama"`` or ``"ama"``. ``alpha_rule`` is
    ``"zero"``, ``"schedule"`` (use ``params.alpha_schedule``) or
    ``"adaptive"`` (:func:`adaptive_alpha` with ``cap``). ``"ama"`` ignores
    the relaxation schedule.
    """

    kind: str = "riama"
    alpha_rule: str = "schedule"
    cap: float = ADAPTIVE_CAP

    def __post_init__(self):
        if self.kind not in ("riama", "rama", "ama"):
            raise ConfigurationError(f"unknown AMA variant {self.kind!r}")
        if self.alpha_rule not in ("zero", "schedule", "adaptive"):
            raise ConfigurationError(f"unknown inertia rule {self.alpha_rule!r}")
        if self.kind != "riama" and self.alpha_rule != "zero":
            raise ConfigurationError(f"{self.kind} has no inertia; use alpha_rule='zero'")
        if not 0 <= self.cap < 1:
            raise ParameterError(f"inertia cap must lie in [0, 1), got {self.cap}")


def make_ama_step(problem: SeparableProblem, variant: AmaVariant, params: SolverParams):
    """Return ``state -> next state`` for ``variant``."""
    gamma = params.gamma
    if not gamma > 0:
        raise ParameterError("gamma must be positive")

    def step(state):
        k = state.k
        lam = 1.0 if variant.kind == "ama" else params.lambda_schedule(k)
        if variant.alpha_rule == "zero":
            alpha = 0.0
        elif variant.alpha_rule == "schedule":
            alpha = params.alpha_schedule(k + 1)
        else:
            def alpha(p, r, _k=k, _lam=lam):
                return adaptive_alpha(_k, p, gamma, _lam, r, variant.cap)
        return riama_step(problem, state, gamma, alpha, lam)

    return step


def run_ama(
    problem: SeparableProblem,
    variant: AmaVariant,
    params: SolverParams,
    stop: Optional[StoppingRule] = None,
    state: Optional[IterationState] = None,
):
    """Iterate ``variant`` from ``state`` (cold start by default)."""
    stop = StoppingRule() if stop is None else stop
    return drive(problem, make_ama_step(problem, variant, params), stop, state)
