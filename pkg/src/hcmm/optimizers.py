"""Step functions for the four iterative methods.

HCMM-1: Hessian-corrected momentum with clipping; HCMM-2: the normalized
variant; STORM-GDA: recursive-momentum baseline (same sample evaluated at
the current and previous iterate); SAGDA: stochastic alternating GDA.

Each step is a pure function of (state, momentum, schedule, problem, rng);
`run`/`iterate_steps` thread the state and own the single RNG stream.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Iterator, List, Optional, Tuple, Union

import numpy as np

from .core import (HyperSchedule, IterateState, MomentumState, Vec,
                   clip_momentum, norm2)
from .oracle import MinimaxProblem


@dataclass(frozen=True)
class Hcmm1:
    # theory mode feeds the momentum recursion from the clipped vectors;
    # experiment mode (default) updates from the raw momentum
    update_from_clipped: bool = False


@dataclass(frozen=True)
class Hcmm2:
    norm_floor: float = 1e-12

    def __post_init__(self):
        if self.norm_floor <= 0:
            raise ValueError(f"norm_floor must be positive, got {self.norm_floor}")


@dataclass(frozen=True)
class StormGda:
    pass


@dataclass(frozen=True)
class Sagda:
    pass


OptimizerKind = Union[Hcmm1, Hcmm2, StormGda, Sagda]


@dataclass(frozen=True)
class StepOutput:
    next_state: IterateState
    next_momentum: MomentumState
    samples_used: Tuple[int, ...]
    diagnostics: dict = field(default_factory=dict)


def hcmm_momentum_update(prev_m: Vec, beta: float, grad_sample: Vec,
                         hvp_sample: Vec) -> Vec:
    """(1 - beta) [prev_m + H d] + beta g, the bias-corrected recursion."""
    return (1.0 - beta) * (prev_m + hvp_sample) + beta * grad_sample


def _advance(state: IterateState, x_next: Vec, y_next: Vec) -> IterateState:
    return IterateState(x_curr=x_next, y_curr=y_next,
                        x_prev=state.x_curr, y_prev=state.y_curr,
                        iter=state.iter + 1)


def hcmm1_step(state: IterateState, momentum: MomentumState,
               schedule: HyperSchedule, problem: MinimaxProblem,
               rng: np.random.Generator, update_from_clipped: bool = False,
               project_y: bool = True) -> StepOutput:
    if momentum.m_x_clipped is None or momentum.m_y_clipped is None:
        raise ValueError("hcmm1_step requires momentum with clipped fields")
    xi = problem.draw_sample(rng)
    dx = state.x_curr - state.x_prev
    dy = state.y_curr - state.y_prev
    g = problem.sample_gradient(state.x_curr, state.y_curr, xi)
    H = problem.sample_hvp(state.x_curr, state.y_curr, xi, dx, dy)
    base_x = momentum.m_x_clipped if update_from_clipped else momentum.m_x
    base_y = momentum.m_y_clipped if update_from_clipped else momentum.m_y
    m_x = hcmm_momentum_update(base_x, schedule.beta_x, g.gx, H.hx)
    m_y = hcmm_momentum_update(base_y, schedule.beta_y, g.gy, H.hy)
    N, N1 = schedule.clip_threshold, schedule.clip_norm
    if N is None or N1 is None:
        raise ValueError("HCMM-1 needs clip_threshold and clip_norm on the schedule")
    mc_x = clip_momentum(m_x, N, N1)
    mc_y = clip_momentum(m_y, N, N1)
    x_next = state.x_curr - schedule.mu_x * mc_x
    y_next = state.y_curr + schedule.mu_y * mc_y
    if project_y:
        y_next = problem.project_y(y_next)
    return StepOutput(
        next_state=_advance(state, x_next, y_next),
        next_momentum=MomentumState(m_x, m_y, mc_x, mc_y),
        samples_used=(xi,),
        diagnostics={"m_x_norm": norm2(m_x), "m_y_norm": norm2(m_y),
                     "clipped_x": mc_x is not m_x, "clipped_y": mc_y is not m_y})


def hcmm2_step(state: IterateState, momentum: MomentumState,
               schedule: HyperSchedule, problem: MinimaxProblem,
               rng: np.random.Generator, norm_floor: float = 1e-12,
               project_y: bool = True) -> StepOutput:
    xi = problem.draw_sample(rng)
    dx = state.x_curr - state.x_prev
    dy = state.y_curr - state.y_prev
    g = problem.sample_gradient(state.x_curr, state.y_curr, xi)
    H = problem.sample_hvp(state.x_curr, state.y_curr, xi, dx, dy)
    m_x = hcmm_momentum_update(momentum.m_x, schedule.beta_x, g.gx, H.hx)
    m_y = hcmm_momentum_update(momentum.m_y, schedule.beta_y, g.gy, H.hy)
    nx, ny = norm2(m_x), norm2(m_y)
    # the normalized update is undefined at m = 0; skip that block instead
    x_next = state.x_curr - schedule.mu_x * m_x / nx if nx > norm_floor \
        else state.x_curr
    y_next = state.y_curr + schedule.mu_y * m_y / ny if ny > norm_floor \
        else state.y_curr
    if project_y:
        y_next = problem.project_y(y_next)
    return StepOutput(
        next_state=_advance(state, x_next, y_next),
        next_momentum=MomentumState(m_x, m_y),
        samples_used=(xi,),
        diagnostics={"m_x_norm": nx, "m_y_norm": ny,
                     "clipped_x": False, "clipped_y": False})


def storm_gda_step(state: IterateState, momentum: MomentumState,
                   schedule: HyperSchedule, problem: MinimaxProblem,
                   rng: np.random.Generator, project_y: bool = True) -> StepOutput:
    xi = problem.draw_sample(rng)
    g_curr = problem.sample_gradient(state.x_curr, state.y_curr, xi)
    g_prev = problem.sample_gradient(state.x_prev, state.y_prev, xi)
    m_x = g_curr.gx + (1.0 - schedule.beta_x) * (momentum.m_x - g_prev.gx)
    m_y = g_curr.gy + (1.0 - schedule.beta_y) * (momentum.m_y - g_prev.gy)
    x_next = state.x_curr - schedule.mu_x * m_x
    y_next = state.y_curr + schedule.mu_y * m_y
    if project_y:
        y_next = problem.project_y(y_next)
    return StepOutput(
        next_state=_advance(state, x_next, y_next),
        next_momentum=MomentumState(m_x, m_y),
        samples_used=(xi,),
        diagnostics={"m_x_norm": norm2(m_x), "m_y_norm": norm2(m_y),
                     "clipped_x": False, "clipped_y": False})


def sagda_step(state: IterateState, momentum: MomentumState,
               schedule: HyperSchedule, problem: MinimaxProblem,
               rng: np.random.Generator, project_y: bool = True) -> StepOutput:
    xi1 = problem.draw_sample(rng)
    gx = problem.sample_gradient(state.x_curr, state.y_curr, xi1).gx
    x_next = state.x_curr - schedule.mu_x * gx
    # alternating: the ascent gradient is taken at the already-updated x
    xi2 = problem.draw_sample(rng)
    gy = problem.sample_gradient(x_next, state.y_curr, xi2).gy
    y_next = state.y_curr + schedule.mu_y * gy
    if project_y:
        y_next = problem.project_y(y_next)
    return StepOutput(
        next_state=_advance(state, x_next, y_next),
        next_momentum=momentum,
        samples_used=(xi1, xi2),
        diagnostics={"m_x_norm": norm2(gx), "m_y_norm": norm2(gy),
                     "clipped_x": False, "clipped_y": False})


def init_run(kind: OptimizerKind, problem: MinimaxProblem,
             schedule: HyperSchedule, x0: Vec, y0: Vec,
             rng: np.random.Generator) -> Tuple[IterateState, MomentumState]:
    """Initial state: z1 = z0 (first correction term vanishes) and momentum
    seeded with one fresh stochastic gradient at z0; SAGDA keeps no momentum."""
    x0 = np.asarray(x0, dtype=np.float64)
    y0 = np.asarray(y0, dtype=np.float64)
    state = IterateState(x_curr=x0.copy(), y_curr=y0.copy(),
                         x_prev=x0.copy(), y_prev=y0.copy(), iter=0)
    if isinstance(kind, Sagda):
        return state, MomentumState(np.zeros_like(x0), np.zeros_like(y0))
    xi0 = problem.draw_sample(rng)
    g0 = problem.sample_gradient(x0, y0, xi0)
    if isinstance(kind, Hcmm1):
        N, N1 = schedule.clip_threshold, schedule.clip_norm
        if N is None or N1 is None:
            raise ValueError("HCMM-1 needs clip_threshold and clip_norm")
        return state, MomentumState(g0.gx, g0.gy,
                                    clip_momentum(g0.gx, N, N1),
                                    clip_momentum(g0.gy, N, N1))
    return state, MomentumState(g0.gx, g0.gy)


def step(kind: OptimizerKind, state: IterateState, momentum: MomentumState,
         schedule: HyperSchedule, problem: MinimaxProblem,
         rng: np.random.Generator, project_y: bool = True) -> StepOutput:
    if isinstance(kind, Hcmm1):
        return hcmm1_step(state, momentum, schedule, problem, rng,
                          update_from_clipped=kind.update_from_clipped,
                          project_y=project_y)
    if isinstance(kind, Hcmm2):
        return hcmm2_step(state, momentum, schedule, problem, rng,
                          norm_floor=kind.norm_floor, project_y=project_y)
    if isinstance(kind, StormGda):
        return storm_gda_step(state, momentum, schedule, problem, rng,
                              project_y=project_y)
    if isinstance(kind, Sagda):
        return sagda_step(state, momentum, schedule, problem, rng,
                          project_y=project_y)
    raise TypeError(f"unknown optimizer kind: {kind!r}")


def iterate_steps(kind: OptimizerKind, problem: MinimaxProblem,
                  schedule: HyperSchedule, x0: Vec, y0: Vec, T: int,
                  rng_seed: int, project_y: bool = True) -> Iterator[StepOutput]:
    """Yield T step outputs; deterministic for a fixed (seed, config)."""
    rng = np.random.default_rng(rng_seed)
    state, momentum = init_run(kind, problem, schedule, x0, y0, rng)
    for i in range(T):
        try:
            out = step(kind, state, momentum, schedule, problem, rng,
                       project_y=project_y)
        except Exception as exc:
            raise RuntimeError(f"optimizer step failed at iteration {i + 1}") from exc
        yield out
        state, momentum = out.next_state, out.next_momentum


def run(kind: OptimizerKind, problem: MinimaxProblem, schedule: HyperSchedule,
        x0: Vec, y0: Vec, T: Optional[int] = None, rng_seed: int = 0,
        project_y: bool = True) -> List[StepOutput]:
    if T is None:
        T = schedule.horizon_T
    return list(iterate_steps(kind, problem, schedule, x0, y0, T, rng_seed,
                              project_y=project_y))
