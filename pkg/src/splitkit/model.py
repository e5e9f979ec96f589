"""Problem representation, iteration state and solution diagnostics.

The model problem is

    minimize    f1(x1) + f2(x2) + f3(x3)
    subject to  L1 x1 + L2 x2 + L3 x3 = b

with every block given through proximal access to ``f_i`` and a linear map
``L_i`` with an explicit adjoint. All arrays are dense float64 and inner
products are Frobenius.
"""
from __future__ import annotations

import dataclasses
import math
from dataclasses import dataclass, field
from typing import Callable, Optional, Sequence

import numpy as np

from .errors import ConfigurationError, ShapeError

Array = np.ndarray


def inner(a: Array, b: Array) -> float:
    """Frobenius inner product."""
    return float(np.vdot(a, b))


def fro(a: Array) -> float:
    return float(np.linalg.norm(a))


@dataclass(frozen=True)
class BlockObjective:
    """One separable term ``f`` of the objective.

    Attributes
    ----------
    prox : callable
        ``prox(v, t)`` returns ``argmin_x f(x) + ||x - v||^2 / (2 t)``.
    value : callable
        ``value(x)`` returns ``f(x)``; ``inf`` outside the domain.
    grad : callable, optional
        Gradient of ``f``, only for smooth blocks.
    conj : callable, optional
        Value of the Fenchel conjugate ``f*``; needed for dual objectives.
    conj_grad : callable, optional
        Gradient of ``f*`` (i.e. ``argmax_x <s, x> - f(x)``); available for
        strongly convex blocks with a closed form.
    strong_convexity : float
        Modulus ``mu`` (0 when merely convex).
    """

    prox: Callable[[Array, float], Array]
    value: Callable[[Array], float]
    grad: Optional[Callable[[Array], Array]] = None
    conj: Optional[Callable[[Array], float]] = None
    conj_grad: Optional[Callable[[Array], Array]] = None
    strong_convexity: float = 0.0
    name: str = "f"


@dataclass(frozen=True)
class LinearBlockMap:
    """Bounded linear map ``L_i : H_i -> H`` with its adjoint.

    ``gram_scale`` is ``c`` when ``L* L = c I`` is known to hold (``0`` for the
    zero map) and ``None`` otherwise; the closed-form subproblem solvers rely
    on it.
    """

    forward: Callable[[Array], Array]
    adjoint: Callable[[Array], Array]
    norm_bound: float
    lower_bound: float
    gram_scale: Optional[float] = None
    name: str = "L"

    @classmethod
    def identity(cls) -> "LinearBlockMap":
        return cls(lambda x: x, lambda y: y, 1.0, 1.0, 1.0, name="I")

    @classmethod
    def scaled_identity(cls, c: float) -> "LinearBlockMap":
        c = float(c)
        if c == 0.0:
            raise ConfigurationError("use LinearBlockMap.zero() for the zero map")
        a = abs(c)
        return cls(lambda x: c * x, lambda y: c * y, a, a, c * c, name=f"{c}*I")

    @classmethod
    def zero(cls) -> "LinearBlockMap":
        """The zero map; only meaningful in degenerate block configurations."""
        return cls(np.zeros_like, np.zeros_like, 0.0, 0.0, 0.0, name="0")

    @classmethod
    def from_matrix(cls, A: Array, atol: float = 1e-12) -> "LinearBlockMap":
        """Left multiplication ``X -> A @ X``."""
        A = np.asarray(A, dtype=float)
        s = np.linalg.svd(A, compute_uv=False)
        gram = A.T @ A
        c = float(gram[0, 0]) if gram.size else 0.0
        scale = c if np.allclose(gram, c * np.eye(gram.shape[0]), atol=atol, rtol=0) else None
        lower = float(s[-1]) if A.shape[0] >= A.shape[1] else 0.0
        return cls(lambda x: A @ x, lambda y: A.T @ y, float(s[0]), lower, scale, name="A")


@dataclass(frozen=True)
class SeparableProblem:
    """Three blocks ``(f_i, L_i)`` and the right-hand side ``b``."""

    blocks: tuple
    maps: tuple
    rhs: Array

    def __post_init__(self):
        if len(self.blocks) != 3 or len(self.maps) != 3:
            raise ConfigurationError("a separable problem has exactly three blocks")
        object.__setattr__(self, "rhs", np.asarray(self.rhs, dtype=float))

    def domain_zeros(self, i: int) -> Array:
        """A zero element of ``H_i`` obtained through the adjoint."""
        return np.zeros_like(self.maps[i].adjoint(np.zeros_like(self.rhs)))

    def apply(self, xs: Sequence[Array]) -> Array:
        """``L1 x1 + L2 x2 + L3 x3``."""
        out = None
        for L, x in zip(self.maps, xs):
            y = L.forward(x)
            if y.shape != self.rhs.shape:
                raise ShapeError(f"{L.name} maps into shape {y.shape}, rhs has {self.rhs.shape}")
            out = y if out is None else out + y
        return out

    def residual(self, x1: Array, x2: Array, x3: Array) -> Array:
        return self.apply((x1, x2, x3)) - self.rhs

    @property
    def cocoercivity(self) -> float:
        """``mu / ||L1||^2``, the cocoercivity of the dual smooth term."""
        mu = self.blocks[0].strong_convexity
        n = self.maps[0].norm_bound
        if mu <= 0 or n <= 0:
            return 0.0
        return mu / n**2


class Constant:
    """Constant schedule ``k -> value``."""

    def __init__(self, value: float):
        self.value = float(value)

    def __call__(self, k: int) -> float:
        return self.value

    def __repr__(self):
        return f"Constant({self.value!r})"


ZERO = Constant(0.0)
ONE = Constant(1.0)


@dataclass(frozen=True)
class SolverParams:
    """Step size and schedules of the relaxed inertial iterations.

    ``sigma`` and ``delta`` are the auxiliary constants of the relaxation
    bound; leave them ``None`` to let the validator search for a witness.
    ``alpha_cap`` bounds the inertia schedule (inferred from the schedule
    when ``None``; required by the adaptive rule).
    """

    gamma: float
    eps_bar: float
    beta: float = 1.0
    alpha_schedule: Callable[[int], float] = ZERO
    lambda_schedule: Callable[[int], float] = ONE
    sigma: Optional[float] = None
    delta: Optional[float] = None
    alpha_cap: Optional[float] = None

    @property
    def alpha_bar(self) -> float:
        return 1.0 / (2.0 - self.eps_bar)


@dataclass
class IterationState:
    """Iterate of a three-block method.

    ``p`` is the inertia memory. ``z_prev``, ``z_curr``, ``y`` and ``u`` shadow
    the dual splitting sequence; ``u`` is also the multiplier certifying the
    second block (``L2* u`` is a subgradient of ``f2`` at ``x2``) and feeds the
    dual objective. ``estimate`` holds the primal triple a method reports
    when it differs from the iterate (the prediction of a prediction-correction
    scheme).
    """

    x1: Array
    x2: Array
    x3: Array
    w: Array
    p: Array
    k: int = 1
    alpha: float = 0.0
    z_prev: Optional[Array] = None
    z_curr: Optional[Array] = None
    y: Optional[Array] = None
    u: Optional[Array] = None
    estimate: Optional[tuple] = None

    @classmethod
    def initial(cls, problem: SeparableProblem, w=None, x3=None) -> "IterationState":
        """Cold start ``x = 0``, ``w = 0``, ``p = 0`` unless overridden."""
        w = np.zeros_like(problem.rhs) if w is None else np.array(w, dtype=float)
        x3 = problem.domain_zeros(2) if x3 is None else np.array(x3, dtype=float)
        return cls(
            x1=problem.domain_zeros(0),
            x2=problem.domain_zeros(1),
            x3=x3,
            w=w,
            p=np.zeros_like(problem.rhs),
        )

    def replace(self, **changes) -> "IterationState":
        return dataclasses.replace(self, **changes)

    @property
    def reported(self) -> tuple:
        """Primal output ``(x1, x2, x3)`` of the method."""
        return self.estimate if self.estimate is not None else (self.x1, self.x2, self.x3)


@dataclass
class TraceEntry:
    constraint_residual: float = math.nan
    rel_step_L: float = math.nan
    rel_step_S: float = math.nan
    primal_value: float = math.nan
    dual_value: float = math.nan
    kkt_residual: float = math.nan
    u_w_gap: float = math.nan
    z_step: float = math.nan
    alpha: float = math.nan

    @property
    def relative_gap(self) -> float:
        return abs(self.primal_value - self.dual_value) / (1.0 + abs(self.primal_value))


@dataclass
class RunRecord:
    iterations: int = 0
    trace: list = field(default_factory=list)
    converged: bool = False
    wall_seconds: float = 0.0
    state: Optional[IterationState] = None
    previous: Optional[IterationState] = None
    final_kkt: float = math.nan


def _check_shapes(problem: SeparableProblem, xs):
    problem.apply(xs)


def primal_objective(problem: SeparableProblem, x1: Array, x2: Array, x3: Array) -> float:
    """``f1(x1) + f2(x2) + f3(x3)``; may be ``inf``."""
    _check_shapes(problem, (x1, x2, x3))
    return float(sum(f.value(x) for f, x in zip(problem.blocks, (x1, x2, x3))))


def dual_objective(problem: SeparableProblem, w: Array, u: Array) -> float:
    """Dual value ``-f1*(L1* w) - f2*(L2* u) - f3*(L3* w) + <w, b>``.

    The second conjugate is evaluated at ``u`` rather than ``w``; pass
    ``u = w`` for the plain dual function. Returns ``-inf`` at dual-infeasible
    points.
    """
    w = np.asarray(w, dtype=float)
    u = np.asarray(u, dtype=float)
    if w.shape != problem.rhs.shape or u.shape != problem.rhs.shape:
        raise ShapeError("dual variables must have the shape of the rhs")
    total = inner(w, problem.rhs)
    for f, L, v in zip(problem.blocks, problem.maps, (w, u, w)):
        if f.conj is None:
            raise ConfigurationError(f"block {f.name} has no conjugate")
        total -= f.conj(L.adjoint(v))
    return float(total)


def kkt_residual(problem: SeparableProblem, x1: Array, x2: Array, x3: Array, w: Array) -> float:
    """Largest violation of the four saddle-point conditions.

    Stationarity of block ``i`` is measured as ``||x_i - prox_{f_i}(x_i + L_i* w)||``
    (unit step), which vanishes iff ``L_i* w`` is a subgradient of ``f_i`` at
    ``x_i``; feasibility as ``||L1 x1 + L2 x2 + L3 x3 - b||``.
    """
    xs = (x1, x2, x3)
    parts = [fro(problem.residual(*xs))]
    for f, L, x in zip(problem.blocks, problem.maps, xs):
        parts.append(fro(x - f.prox(x + L.adjoint(w), 1.0)))
    return max(parts)
