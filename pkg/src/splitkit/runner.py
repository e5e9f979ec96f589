"""Shared iteration loop: stopping rule, trace and terminal diagnostics."""
from __future__ import annotations

import time
from dataclasses import dataclass

from .model import (
    IterationState,
    RunRecord,
    TraceEntry,
    dual_objective,
    fro,
    kkt_residual,
    primal_objective,
)


@dataclass(frozen=True)
class StoppingRule:
    """Stop once ``max`` of the relative steps of ``blocks`` is ``<= eps``.

    The relative step of block ``i`` is ``||x_i^{k+1} - x_i^k|| / ||x_i^k||``
    (absolute when the denominator vanishes). ``diagnostics`` turns on the
    per-iteration residual and objective trace, ``trace_kkt`` additionally
    records the KKT residual every iteration. ``include_multiplier`` also
    requires the relative step of ``w`` to be ``<= eps``; without it the
    rule can stop while the multiplier (and hence feasibility) still drifts.
    """

    eps: float = 1e-5
    max_iter: int = 10000
    blocks: tuple = (1, 2)
    diagnostics: bool = True
    trace_kkt: bool = False
    include_multiplier: bool = False

    def __post_init__(self):
        if not self.eps > 0:
            raise ValueError("eps must be positive")
        if self.max_iter < 1:
            raise ValueError("max_iter must be at least 1")


def relative_step(new, old) -> float:
    den = fro(old)
    num = fro(new - old)
    return num / den if den > 0 else fro(new)


def drive(problem, step, stop: StoppingRule, state=None) -> RunRecord:
    """Run ``state <- step(state)`` under ``stop``.

    Wall time counts the step calls only, not the diagnostics.
    """
    state = IterationState.initial(problem) if state is None else state
    record = RunRecord()
    elapsed = 0.0
    for _ in range(stop.max_iter):
        t0 = time.perf_counter()
        new = step(state)
        elapsed += time.perf_counter() - t0
        olds = (state.x1, state.x2, state.x3)
        olds_w = state.w
        news = (new.x1, new.x2, new.x3)
        rels = [relative_step(n, o) for n, o in zip(news, olds)]
        entry = TraceEntry(rel_step_L=rels[1], rel_step_S=rels[2], alpha=new.alpha)
        if stop.diagnostics:
            # residual and objective pair the new x1, x2 with the previous x3
            entry.constraint_residual = fro(problem.residual(new.x1, new.x2, state.x3))
            entry.primal_value = primal_objective(problem, new.x1, new.x2, state.x3)
            if new.u is not None:
                entry.dual_value = dual_objective(problem, state.w, new.u)
            if new.u is not None and new.y is not None:
                entry.u_w_gap = fro(new.u - state.w)
            if new.z_curr is not None and new.z_prev is not None:
                entry.z_step = fro(new.z_curr - new.z_prev)
        if stop.trace_kkt:
            entry.kkt_residual = kkt_residual(problem, new.x1, new.x2, new.x3, new.w)
        record.trace.append(entry)
        record.iterations += 1
        record.previous, state = state, new
        crit = max(rels[i] for i in stop.blocks)
        if stop.include_multiplier:
            crit = max(crit, relative_step(new.w, olds_w))
        if crit <= stop.eps:
            record.converged = True
            break
    record.wall_seconds = elapsed
    record.state = state
    record.final_kkt = kkt_residual(problem, state.x1, state.x2, state.x3, state.w)
    return record
