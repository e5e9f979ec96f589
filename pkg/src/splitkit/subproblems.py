"""Exact block minimizations used by every three-block method."""
from __future__ import annotations

import numpy as np

from .errors import ConfigurationError, StepError


def quadratic_argmin(f, L, target, gamma, prox_weight=0.0, anchor=None):
    """``argmin_x f(x) + gamma/2 ||L x - target||^2 + prox_weight/2 ||x - anchor||^2``.

    Closed form through ``prox_f`` when ``L* L = c I``. Other maps are refused:
    the convergence theory assumes exact minimization and we do not
    approximate it silently.
    """
    c = L.gram_scale
    if c is None:
        raise ConfigurationError(f"map {L.name} lacks the L* L = c I structure needed for an exact subproblem")
    if c == 0:
        # zero map: only the degenerate zero block is supported, any point is optimal
        if f.name != "zero":
            raise ConfigurationError("a zero map is only supported together with the zero function")
        return np.zeros_like(L.adjoint(target))
    if prox_weight == 0:
        return f.prox(L.adjoint(target) / c, 1.0 / (gamma * c))
    h = gamma * c + prox_weight
    return f.prox((gamma * L.adjoint(target) + prox_weight * anchor) / h, 1.0 / h)


def lagrangian_argmin(f, L, w, x0=None, tol=1e-12, max_iter=10000, iteration=None):
    """``argmin_x f(x) - <w, L x>``, i.e. ``grad f*(L* w)``.

    Uses the block's conjugate gradient when known, otherwise a proximal
    point iteration on the strongly convex objective.
    """
    s = L.adjoint(w)
    if f.conj_grad is not None:
        return f.conj_grad(s)
    mu = f.strong_convexity
    if mu <= 0:
        raise ConfigurationError("the first block must be strongly convex")
    t = 1e3 / mu  # contraction factor 1 / (1 + t mu)
    x = np.zeros_like(s) if x0 is None else x0
    for _ in range(max_iter):
        x_new = f.prox(x + t * s, t)
        if np.linalg.norm(x_new - x) <= tol * max(1.0, np.linalg.norm(x_new)):
            return x_new
        x = x_new
    raise StepError("first-block proximal point iteration did not converge", iteration)
