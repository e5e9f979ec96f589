"""Ready-made block objectives."""
from __future__ import annotations

import math

import numpy as np

from .model import BlockObjective
from .prox import prox_l1, prox_nuclear, singular_values

# slack on dual-ball membership, absorbs rounding at the boundary
INDICATOR_ATOL = 1e-8


def _ball_indicator(norm, radius):
    def conj(s):
        return 0.0 if norm(s) <= radius + INDICATOR_ATOL else math.inf

    return conj


def squared_frobenius(scale: float = 1.0) -> BlockObjective:
    """``(scale / 2) ||x||_F^2``."""
    a = float(scale)
    return BlockObjective(
        prox=lambda v, t: v / (1.0 + t * a),
        value=lambda x: 0.5 * a * float(np.vdot(x, x)),
        grad=lambda x: a * x,
        conj=lambda s: 0.5 * float(np.vdot(s, s)) / a,
        conj_grad=lambda s: s / a,
        strong_convexity=a,
        name="sq_fro",
    )


def shifted_quadratic(center, scale: float = 1.0) -> BlockObjective:
    """``(scale / 2) ||x - center||^2``."""
    c = np.asarray(center, dtype=float)
    a = float(scale)
    return BlockObjective(
        prox=lambda v, t: (v + t * a * c) / (1.0 + t * a),
        value=lambda x: 0.5 * a * float(np.vdot(x - c, x - c)),
        grad=lambda x: a * (x - c),
        conj=lambda s: float(np.vdot(s, c)) + 0.5 * float(np.vdot(s, s)) / a,
        conj_grad=lambda s: c + s / a,
        strong_convexity=a,
        name="quad",
    )


def nuclear_norm(weight: float) -> BlockObjective:
    """``weight ||X||_*``; its conjugate is the spectral-norm ball indicator."""
    w = float(weight)
    return BlockObjective(
        prox=lambda v, t: prox_nuclear(v, t * w),
        value=lambda x: w * float(np.sum(singular_values(x))),
        conj=_ball_indicator(lambda s: float(singular_values(s)[0]) if s.size else 0.0, w),
        name="nuclear",
    )


def l1_norm(weight: float) -> BlockObjective:
    """``weight ||X||_1``; its conjugate is the max-norm ball indicator."""
    w = float(weight)
    return BlockObjective(
        prox=lambda v, t: prox_l1(v, t * w),
        value=lambda x: w * float(np.sum(np.abs(x))),
        conj=_ball_indicator(lambda s: float(np.max(np.abs(s))) if s.size else 0.0, w),
        name="l1",
    )


def zero_function() -> BlockObjective:
    return BlockObjective(
        prox=lambda v, t: np.array(v, dtype=float),
        value=lambda x: 0.0,
        grad=np.zeros_like,
        conj=_ball_indicator(lambda s: float(np.max(np.abs(s))) if s.size else 0.0, 0.0),
        name="zero",
    )
