"""Three-block ADMM baselines.

* ``admm3``: directly extended Gauss-Seidel ADMM (no general convergence
  guarantee for three blocks, included as the usual reference point).
* ``admg``: ADMM prediction followed by a Gaussian back substitution
  correction of ``(x2, x3, w)``.
* ``spadmm``: semi-proximal ADMM with dual step ``tau * gamma`` and optional
  proximal terms ``t_i / 2 ||x_i - x_i^k||^2``.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, Optional

from .errors import ConfigurationError, ParameterError, StepError
from .model import IterationState, SeparableProblem, fro
from .runner import StoppingRule, drive
from .subproblems import quadratic_argmin

GOLDEN = (1.0 + math.sqrt(5.0)) / 2.0


@dataclass(frozen=True)
class AdmgConfig:
    """Correction step length ``theta`` in ``(0, 1)``.

    ``back_map`` applies ``(L2* L2)^{-1} L2* L3``; it is derived from the maps
    when ``L2* L2 = c I`` and must be supplied otherwise.
    """

    theta: float = 0.99999
    back_map: Optional[Callable] = None

    def __post_init__(self):
        if not 0 < self.theta < 1:
            raise ParameterError(f"theta must lie in (0, 1), got {self.theta}")


@dataclass(frozen=True)
class SpadmmConfig:
    """Dual step factor ``tau`` in ``(0, (1 + sqrt 5) / 2)`` and proximal weights.

    ``proximal`` holds nonnegative scalars ``t_i``; the proximal terms are
    ``t_i I`` (``0`` disables them).
    """

    tau: float = 1.2
    proximal: tuple = (0.0, 0.0, 0.0)

    def __post_init__(self):
        if not 0 < self.tau < GOLDEN:
            raise ParameterError(f"tau must lie in (0, {GOLDEN:.6f}), got {self.tau}")
        if len(self.proximal) != 3 or any(not t >= 0 for t in self.proximal):
            raise ParameterError("proximal weights must be three nonnegative scalars")


def _check_finite(state, k):
    for name in ("x1", "x2", "x3", "w"):
        if not fro(getattr(state, name)) < math.inf:
            raise StepError(f"non-finite {name}", k)
    return state


def _sweep(problem, state, gamma, proximal=(0.0, 0.0, 0.0)):
    """Gauss-Seidel pass over the three blocks for the augmented Lagrangian."""
    b, w = problem.rhs, state.w
    xs = [state.x1, state.x2, state.x3]
    Lx = [L.forward(x) for L, x in zip(problem.maps, xs)]
    for i in range(3):
        others = Lx[(i + 1) % 3] + Lx[(i + 2) % 3]
        target = b + w / gamma - others
        f, L = problem.blocks[i], problem.maps[i]
        xs[i] = quadratic_argmin(f, L, target, gamma, proximal[i], xs[i])  # anchor is x_i^k
        Lx[i] = L.forward(xs[i])
    return xs, Lx


def admm3_step(problem: SeparableProblem, state: IterationState, gamma: float) -> IterationState:
    """One directly extended ADMM iteration."""
    b, w = problem.rhs, state.w
    L3x3_old = problem.maps[2].forward(state.x3)
    xs, Lx = _sweep(problem, state, gamma)
    u = w - gamma * (Lx[0] + Lx[1] + L3x3_old - b)
    w_new = w - gamma * (Lx[0] + Lx[1] + Lx[2] - b)
    new = IterationState(xs[0], xs[1], xs[2], w_new, state.p, k=state.k + 1, u=u)
    return _check_finite(new, state.k)


def spadmm_step(problem: SeparableProblem, state: IterationState, gamma: float, cfg: SpadmmConfig) -> IterationState:
    """One semi-proximal ADMM iteration with dual step ``tau * gamma``."""
    b, w = problem.rhs, state.w
    L3x3_old = problem.maps[2].forward(state.x3)
    xs, Lx = _sweep(problem, state, gamma, cfg.proximal)
    u = w - gamma * (Lx[0] + Lx[1] + L3x3_old - b)
    t2 = cfg.proximal[1]
    if t2:
        L2 = problem.maps[1]
        u = u - (t2 / L2.gram_scale) * L2.forward(xs[1] - state.x2)
    w_new = w - cfg.tau * gamma * (Lx[0] + Lx[1] + Lx[2] - b)
    new = IterationState(xs[0], xs[1], xs[2], w_new, state.p, k=state.k + 1, u=u)
    return _check_finite(new, state.k)


def _back_map(problem, cfg):
    if cfg.back_map is not None:
        return cfg.back_map
    L2, L3 = problem.maps[1], problem.maps[2]
    c = L2.gram_scale
    if not c:
        raise ConfigurationError("Gaussian back substitution needs L2* L2 = c I (c > 0) or an explicit back_map")
    return lambda y: L2.adjoint(L3.forward(y)) / c


def admg_step(problem: SeparableProblem, state: IterationState, gamma: float, cfg: AdmgConfig) -> IterationState:
    """ADMM prediction, then ``v+ = v - theta G^{-1} (v - v~)`` for ``v = (x2, x3, w)``.

    ``G`` is block upper triangular with identity diagonal and
    ``(L2* L2)^{-1} L2* L3`` in the ``(x2, x3)`` slot, so ``G^{-1}`` is applied
    by back substitution. The prediction is kept as the reported estimate:
    the corrected ``x2`` mixes in ``x3`` differences and loses structure such
    as low rank.
    """
    b, w = problem.rhs, state.w
    M = _back_map(problem, cfg)
    L3x3_old = problem.maps[2].forward(state.x3)
    xs, Lx = _sweep(problem, state, gamma)
    w_pred = w - gamma * (Lx[0] + Lx[1] + Lx[2] - b)
    d2, d3, dw = state.x2 - xs[1], state.x3 - xs[2], w - w_pred
    c3 = d3
    c2 = d2 - M(c3)
    th = cfg.theta
    u = w - gamma * (Lx[0] + Lx[1] + L3x3_old - b)
    new = IterationState(
        xs[0], state.x2 - th * c2, state.x3 - th * c3, w - th * dw, state.p, k=state.k + 1, u=u,
        estimate=tuple(xs),
    )
    return _check_finite(new, state.k)


def make_admm_step(problem: SeparableProblem, method: str, gamma: float, cfg=None):
    """``state -> next state`` for ``method`` in ``admm3``, ``admg``, ``spadmm``."""
    if not gamma > 0:
        raise ParameterError("gamma must be positive")
    if method == "admm3":
        return lambda s: admm3_step(problem, s, gamma)
    if method == "admg":
        cfg = AdmgConfig() if cfg is None else cfg
        _back_map(problem, cfg)
        return lambda s: admg_step(problem, s, gamma, cfg)
    if method == "spadmm":
        cfg = SpadmmConfig() if cfg is None else cfg
        return lambda s: spadmm_step(problem, s, gamma, cfg)
    raise ConfigurationError(f"unknown ADMM variant {method!r}")


def run_admm(
    problem: SeparableProblem,
    method: str,
    gamma: float,
    cfg=None,
    stop: Optional[StoppingRule] = None,
    state: Optional[IterationState] = None,
):
    """Iterate an ADMM baseline from ``state`` (cold start by default)."""
    stop = StoppingRule() if stop is None else stop
    return drive(problem, make_admm_step(problem, method, gamma, cfg), stop, state)
