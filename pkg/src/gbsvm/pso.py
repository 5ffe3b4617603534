"""Particle swarm maximization of the granular-ball SVM dual.

Particles are multiplier vectors, one coordinate per ball. After every move
each particle is pushed back onto the feasible set {0 <= alpha <= C,
sum alpha_i y_i = 0} by clamping and then rescaling the two classes against
each other: the +1 multipliers are multiplied by delta = sqrt(S_neg / S_pos)
and the -1 multipliers by 1 / delta, which equalizes both class sums at
sqrt(S_pos * S_neg).
"""

from __future__ import annotations

import csv
import logging
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, replace
from pathlib import Path

import numpy as np

from .exceptions import DegenerateSolutionError
from .granular_ball import ball_arrays
from .model import DualSolution, batch_lagrangian_dual, batch_objective
from .seeding import make_rng

log = logging.getLogger(__name__)


@dataclass(frozen=True)
class PsoConfig:
    pop: int = 400
    max_iter: int = 1050
    inertia: float = 0.5
    c1: float = 1.6
    c2: float = 1.6
    lb: float = 0.0
    ub: float = 10.0
    vmax: float | None = None  # None -> 0.2 * (ub - lb)
    seed: int = 0
    projection_rounds: int = 10
    feas_tol: float = 1e-6
    stall_tol: float = 1e-9
    stall_patience: int = 25
    workers: int = 1

    def __post_init__(self):
        if self.pop < 2:
            raise ValueError(f"pop must be >= 2, got {self.pop}")
        if self.max_iter < 0:
            raise ValueError(f"max_iter must be >= 0, got {self.max_iter}")
        if not 0.0 <= self.inertia <= 1.0:
            raise ValueError(f"inertia must lie in [0, 1], got {self.inertia}")
        if self.c1 <= 0 or self.c2 <= 0:
            raise ValueError("learning factors c1 and c2 must be positive")
        if not 0.0 <= self.lb <= self.ub:
            raise ValueError(f"need 0 <= lb <= ub, got lb={self.lb}, ub={self.ub}")
        if not math.isfinite(self.ub):
            raise ValueError("ub must be finite (it bounds the initial sampling box)")
        if self.projection_rounds < 1:
            raise ValueError("projection_rounds must be >= 1")
        if self.stall_patience < 1:
            raise ValueError("stall_patience must be >= 1")
        if self.workers < 1:
            raise ValueError("workers must be >= 1")

    @property
    def velocity_cap(self):
        return 0.2 * (self.ub - self.lb) if self.vmax is None else self.vmax


@dataclass
class Swarm:
    positions: np.ndarray
    velocities: np.ndarray
    pbest_positions: np.ndarray
    pbest_fitness: np.ndarray
    gbest_position: np.ndarray
    gbest_fitness: float
    iteration: int = 0

    def copy(self):
        return Swarm(self.positions.copy(), self.velocities.copy(), self.pbest_positions.copy(),
                     self.pbest_fitness.copy(), self.gbest_position.copy(), self.gbest_fitness,
                     self.iteration)


def _check_labels(labels):
    y = np.asarray(labels, dtype=float)
    if not (np.any(y > 0) and np.any(y < 0)):
        raise ValueError("both classes must be present: sum alpha_i y_i = 0 would force alpha = 0")
    return y


def project_rows(P, labels, C, rounds=10, tol=1e-6):
    """Project every row of ``P`` onto the feasible set, in place.

    Returns the number of rescaling rounds the slowest row needed. Rows whose
    class sums are still unbalanced after the last rescaling round have their
    heavier class shrunk to match the lighter one, which is exact and cannot
    leave the box.
    """
    pos = np.asarray(labels) > 0
    neg = ~pos
    np.clip(P, 0.0, C, out=P)
    used = 0
    for r in range(rounds):
        s_pos = P[:, pos].sum(axis=1)
        s_neg = P[:, neg].sum(axis=1)
        bad = np.abs(s_pos - s_neg) > tol * np.maximum(1.0, s_pos + s_neg)
        one_sided = bad & ((s_pos <= 0.0) | (s_neg <= 0.0))
        P[one_sided] = 0.0
        act = np.flatnonzero(bad & ~one_sided)
        if act.size == 0:
            break
        used = r + 1
        delta = np.sqrt(s_neg[act] / s_pos[act])
        sub = P[act]
        sub[:, pos] *= delta[:, None]
        sub[:, neg] /= delta[:, None]
        np.clip(sub, 0.0, C, out=sub)
        P[act] = sub
    else:
        s_pos = P[:, pos].sum(axis=1)
        s_neg = P[:, neg].sum(axis=1)
        bad = np.abs(s_pos - s_neg) > tol * np.maximum(1.0, s_pos + s_neg)
        act = np.flatnonzero(bad)
        if act.size:
            heavy_pos = s_pos[act] > s_neg[act]
            scale = np.where(heavy_pos, s_neg[act] / s_pos[act], s_pos[act] / s_neg[act])
            sub = P[act]
            sub[np.ix_(heavy_pos, pos)] *= scale[heavy_pos, None]
            sub[np.ix_(~heavy_pos, neg)] *= scale[~heavy_pos, None]
            P[act] = sub
    return used


def project_feasible(alpha, labels, C, cfg=PsoConfig()):
    """Clamp to [0, C] and rebalance the class sums of one multiplier vector."""
    y = _check_labels(labels)
    P = np.array(alpha, dtype=float, ndmin=2).copy()
    if P.shape[1] != len(y):
        raise ValueError(f"alpha has {P.shape[1]} entries, labels {len(y)}")
    project_rows(P, y, C, cfg.projection_rounds, cfg.feas_tol)
    return P[0]


def evaluate(fitness, P, workers=1):
    """Apply a row-wise batch fitness, optionally split across threads."""
    if workers <= 1 or len(P) < 2 * workers:
        return np.asarray(fitness(P), dtype=float)
    chunks = np.array_split(np.arange(len(P)), workers)
    with ThreadPoolExecutor(max_workers=workers) as ex:
        parts = list(ex.map(lambda idx: np.asarray(fitness(P[idx]), dtype=float), chunks))
    return np.concatenate(parts)


def initialize_swarm(cfg, dim, labels, fitness=None):
    """Sample ``cfg.pop`` particles uniformly in the box and project them.

    When ``fitness`` is omitted the personal/global bests are left at -inf
    and are filled on the first step.
    """
    y = _check_labels(labels)
    if dim < 2 or len(y) != dim:
        raise ValueError(f"dim must equal the ball count (>= 2); got dim={dim}, {len(y)} labels")
    rng = make_rng(cfg.seed, "pso-init")
    X = rng.uniform(cfg.lb, cfg.ub, size=(cfg.pop, dim))
    vcap = cfg.velocity_cap
    V = rng.uniform(-vcap, vcap, size=(cfg.pop, dim))
    project_rows(X, y, cfg.ub, cfg.projection_rounds, cfg.feas_tol)
    if fitness is None:
        fit = np.full(cfg.pop, -np.inf)
    else:
        fit = evaluate(fitness, X, cfg.workers)
    g = int(np.argmax(fit))
    return Swarm(X, V, X.copy(), fit.copy(), X[g].copy(), float(fit[g]), 0)


def pso_step(sw, fitness, cfg, labels, C=None):
    """One velocity/position update followed by projection and best tracking."""
    C = cfg.ub if C is None else C
    y = np.asarray(labels, dtype=float)
    nxt = sw.copy()
    nxt.iteration = sw.iteration + 1
    rng = make_rng(cfg.seed, "pso-step", nxt.iteration)
    shape = sw.positions.shape
    # row i of each draw is particle i's stream for this iteration
    r1 = rng.random(shape)
    r2 = rng.random(shape)
    V = (cfg.inertia * sw.velocities
         + cfg.c1 * r1 * (sw.pbest_positions - sw.positions)
         + cfg.c2 * r2 * (sw.gbest_position[None, :] - sw.positions))
    vcap = cfg.velocity_cap
    np.clip(V, -vcap, vcap, out=V)
    X = sw.positions + V
    project_rows(X, y, C, cfg.projection_rounds, cfg.feas_tol)
    fit = evaluate(fitness, X, cfg.workers)

    better = fit > sw.pbest_fitness
    nxt.positions = X
    nxt.velocities = V
    nxt.pbest_positions[better] = X[better]
    nxt.pbest_fitness[better] = fit[better]
    g = int(np.argmax(nxt.pbest_fitness))
    if nxt.pbest_fitness[g] > sw.gbest_fitness:
        nxt.gbest_fitness = float(nxt.pbest_fitness[g])
        nxt.gbest_position = nxt.pbest_positions[g].copy()
    return nxt


OBJECTIVES = {"exact": batch_lagrangian_dual, "closed-form": batch_objective}


def solve(balls, C=None, cfg=PsoConfig(), trace=False, objective="exact"):
    """Maximize the dual over the ball list and recover w and b.

    Iterates until ``cfg.max_iter`` or until the global best improves by no
    more than ``cfg.stall_tol`` for ``cfg.stall_patience`` consecutive
    iterations. Raises :class:`DegenerateSolutionError` when the best
    multipliers leave the weight vector undefined.
    """
    if C is not None:
        cfg = replace(cfg, ub=float(C))
    C = cfg.ub
    if len(balls) < 2:
        raise ValueError(f"need at least 2 balls, got {len(balls)}")
    centers, radii, labels = ball_arrays(balls)
    _check_labels(labels)

    f = OBJECTIVES[objective]

    def fitness(P):
        return f(P, centers, radii, labels)

    sw = initialize_swarm(cfg, len(labels), labels, fitness)
    rows = [(0, sw.gbest_fitness, float(sw.gbest_position @ labels))] if trace else []
    stall = 0
    while sw.iteration < cfg.max_iter:
        before = sw.gbest_fitness
        sw = pso_step(sw, fitness, cfg, labels, C)
        if trace:
            rows.append((sw.iteration, sw.gbest_fitness, float(sw.gbest_position @ labels)))
        if sw.gbest_fitness - before > cfg.stall_tol:
            stall = 0
        else:
            stall += 1
            if stall >= cfg.stall_patience:
                break
    log.debug("pso stopped after %d iterations, best fitness %.6g", sw.iteration, sw.gbest_fitness)
    try:
        return DualSolution.from_alpha(sw.gbest_position, (centers, radii, labels), C,
                                       fitness=sw.gbest_fitness, iterations=sw.iteration, trace=rows)
    except DegenerateSolutionError as exc:
        raise DegenerateSolutionError(
            f"{exc} after {sw.iteration} iterations (best fitness {sw.gbest_fitness:.6g}, "
            f"sum alpha {np.sum(sw.gbest_position):.3e})",
            norm_A=exc.norm_A, B=exc.B, alpha_sum=float(np.sum(sw.gbest_position))) from None


def write_trace(rows, path):
    """Per-iteration CSV of (iteration, best_fitness, feasibility_residual)."""
    with Path(path).open("w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh)
        w.writerow(["iteration", "best_fitness", "feasibility_residual"])
        for it, f, res in rows:
            w.writerow([it, repr(float(f)), repr(float(res))])
