"""Granular-ball SVM dual: objective, constraint, weight/offset recovery, prediction.

Each ball i contributes a center c_i, radius r_i and label y_i. For
multipliers alpha the two aggregates

    A = sum_i alpha_i y_i c_i        B = sum_i alpha_i r_i

determine everything else: the dual value, the weight vector
w = (|A| - B) A / |A| and hence |w| = | |A| - B |. With every radius zero
the model is exactly the classical linear soft-margin SVM dual.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .exceptions import DegenerateSolutionError, UntrainedModelError
from .granular_ball import GranularBall, ball_arrays

EPS_DEGENERATE = 1e-12
SV_REL_TOL = 1e-6


def _as_alpha(alpha, m):
    a = np.asarray(alpha, dtype=float)
    if a.shape != (m,):
        raise ValueError(f"alpha has shape {a.shape}, expected ({m},)")
    return a


def _arrays(balls):
    if isinstance(balls, tuple):
        return balls
    return ball_arrays(balls)


def aggregates(alpha, balls):
    """Return ``(A, B)`` for one multiplier vector."""
    centers, radii, labels = _arrays(balls)
    a = _as_alpha(alpha, len(labels))
    return (a * labels) @ centers, float(a @ radii)


def batch_objective(P, centers, radii, labels):
    """Dual value for every row of the multiplier matrix ``P`` (k x m)."""
    P = np.atleast_2d(P)
    A = (P * labels) @ centers
    AA = np.einsum("ij,ij->i", A, A)
    B = P @ radii
    return -0.5 * AA + 0.5 * B**2 + np.abs(np.sqrt(AA) - B) * B + P.sum(axis=1)


def batch_lagrangian_dual(P, centers, radii, labels):
    """Exact dual function sum(alpha) - 1/2 max(0, |A| - B)^2, row-wise.

    Equal to :func:`batch_objective` wherever |A| >= B. Where |A| < B the
    inner minimization over w ends at w = 0 and the value is sum(alpha).
    """
    P = np.atleast_2d(P)
    A = (P * labels) @ centers
    AA = np.einsum("ij,ij->i", A, A)
    gap = np.maximum(np.sqrt(AA) - P @ radii, 0.0)
    # with zero radii the gap term is |A|^2 exactly; keep that path rounding-free
    quad = np.where(np.all(radii == 0), AA, gap**2)
    return P.sum(axis=1) - 0.5 * quad


def lagrangian_dual(alpha, balls):
    centers, radii, labels = _arrays(balls)
    a = _as_alpha(alpha, len(labels))
    return float(batch_lagrangian_dual(a[None, :], centers, radii, labels)[0])


def dual_objective(alpha, balls):
    """-1/2 |A|^2 + 1/2 B^2 + | |A| - B | B + sum(alpha).

    The general form is evaluated everywhere, including the region |A| < B.
    """
    centers, radii, labels = _arrays(balls)
    a = _as_alpha(alpha, len(labels))
    A = (a * labels) @ centers
    AA = float(A @ A)
    B = float(a @ radii)
    return -0.5 * AA + 0.5 * B**2 + abs(math.sqrt(AA) - B) * B + float(a.sum())


def svm_dual_value(alpha, centers, labels):
    """Classical linear SVM dual, -1/2 |sum alpha_i y_i x_i|^2 + sum alpha_i."""
    a = np.asarray(alpha, dtype=float)
    v = (a * np.asarray(labels, dtype=float)) @ np.asarray(centers, dtype=float)
    return -0.5 * float(v @ v) + float(a.sum())


def constraint_residual(alpha, labels):
    """sum_i alpha_i y_i (zero at any feasible point)."""
    a = np.asarray(alpha, dtype=float)
    y = np.asarray(labels, dtype=float)
    if a.shape != y.shape:
        raise ValueError(f"alpha {a.shape} and labels {y.shape} differ in length")
    return float(a @ y)


def w_from_aggregates(A, B, eps=EPS_DEGENERATE):
    A = np.asarray(A, dtype=float)
    normA = float(np.linalg.norm(A))
    if normA <= eps:
        raise DegenerateSolutionError(
            f"|A| = {normA:.3e} <= {eps:.0e}; weight vector undefined", norm_A=normA, B=B)
    return (normA - B) * A / normA


def recover_w(alpha, balls, eps=EPS_DEGENERATE):
    """w = (|A| - B) A / |A|, so that |w| = | |A| - B |."""
    A, B = aggregates(alpha, balls)
    try:
        return w_from_aggregates(A, B, eps)
    except DegenerateSolutionError as exc:
        exc.alpha_sum = float(np.sum(alpha))
        raise


def sv_threshold(C, alpha):
    if math.isfinite(C):
        return SV_REL_TOL * C
    return SV_REL_TOL * max(1.0, float(np.max(alpha)) if len(alpha) else 1.0)


def _support_sets(alpha, C):
    eps = sv_threshold(C, alpha)
    support = alpha > eps
    interior = support & (alpha < C - eps)
    return support, interior


def recover_b(solution, balls):
    """Average y_i (1 + |w| r_i) - w . c_i over interior support balls.

    Falls back to every ball with a non-negligible multiplier when no
    multiplier lies strictly inside (0, C).
    """
    centers, radii, labels = _arrays(balls)
    alpha = np.asarray(solution.alpha, dtype=float)
    w = np.asarray(solution.w, dtype=float)
    support, interior = _support_sets(alpha, solution.C)
    pick = interior if interior.any() else support
    if not pick.any():
        raise UntrainedModelError("no support balls: every multiplier is (numerically) zero")
    b_i = labels[pick] * (1.0 + np.linalg.norm(w) * radii[pick]) - centers[pick] @ w
    return float(b_i.mean())


def per_ball_offsets(solution, balls):
    """Offset estimate from each interior support ball (diagnostic)."""
    centers, radii, labels = _arrays(balls)
    alpha = np.asarray(solution.alpha, dtype=float)
    _, interior = _support_sets(alpha, solution.C)
    w = np.asarray(solution.w, dtype=float)
    return labels[interior] * (1.0 + np.linalg.norm(w) * radii[interior]) - centers[interior] @ w


@dataclass
class DualSolution:
    alpha: np.ndarray
    A: np.ndarray
    B: float
    w: np.ndarray
    b: float
    C: float
    support_ids: np.ndarray
    fitness: float = float("nan")
    iterations: int = 0
    trace: list = field(default_factory=list, repr=False)

    @classmethod
    def from_alpha(cls, alpha, balls, C, **extra):
        """Recover w, b and support set from multipliers."""
        alpha = np.asarray(alpha, dtype=float)
        A, B = aggregates(alpha, balls)
        try:
            w = w_from_aggregates(A, B)
        except DegenerateSolutionError as exc:
            exc.alpha_sum = float(alpha.sum())
            raise
        support, _ = _support_sets(alpha, C)
        sol = cls(alpha=alpha, A=A, B=B, w=w, b=float("nan"), C=C,
                  support_ids=np.flatnonzero(support), **extra)
        sol.b = recover_b(sol, balls)
        return sol

    @property
    def norm_w(self):
        return float(np.linalg.norm(self.w))


@dataclass
class GbsvmModel:
    w: np.ndarray
    b: float
    balls: list
    alpha: np.ndarray
    C: float = 10.0
    purity_threshold: float | None = None
    radius_mode: str | None = None
    feature_min: np.ndarray | None = None
    feature_span: np.ndarray | None = None

    @classmethod
    def from_solution(cls, sol, balls, **meta):
        return cls(w=np.asarray(sol.w, dtype=float), b=float(sol.b), balls=list(balls),
                   alpha=np.asarray(sol.alpha, dtype=float), C=sol.C, **meta)

    @property
    def norm_w(self):
        return float(np.linalg.norm(self.w))

    @property
    def n_support(self):
        return int(np.count_nonzero(self.alpha > sv_threshold(self.C, self.alpha)))

    def decision_function(self, X):
        X = np.atleast_2d(np.asarray(X, dtype=float))
        if X.shape[1] != len(self.w):
            raise ValueError(f"expected {len(self.w)} features, got {X.shape[1]}")
        return X @ self.w + self.b

    def predict(self, X):
        return np.where(self.decision_function(X) >= 0.0, 1, -1)

    def transform(self, X):
        """Apply the training-time min-max scaling, if the model carries one."""
        if self.feature_min is None:
            return np.asarray(X, dtype=float)
        X = np.atleast_2d(np.asarray(X, dtype=float))
        span = np.asarray(self.feature_span, dtype=float)
        out = (X - self.feature_min) / np.where(span > 0, span, 1.0)
        out[:, span <= 0] = 0.0
        return out

    def to_dict(self):
        def _f(v):
            return None if v is None else [float(x) for x in v]
        return {
            "w": _f(self.w),
            "b": float(self.b),
            "C": self.C if math.isfinite(self.C) else "inf",
            "purity_threshold": self.purity_threshold,
            "radius_mode": self.radius_mode,
            "feature_min": _f(self.feature_min),
            "feature_span": _f(self.feature_span),
            "balls": [b.to_record() for b in self.balls],
            "alpha": _f(self.alpha),
        }

    @classmethod
    def from_dict(cls, rec):
        def _a(v):
            return None if v is None else np.asarray(v, dtype=float)
        return cls(
            w=_a(rec["w"]), b=float(rec["b"]),
            balls=[GranularBall.from_record(r) for r in rec.get("balls", [])],
            alpha=_a(rec.get("alpha", [])), C=float(rec.get("C", 10.0)),
            purity_threshold=rec.get("purity_threshold"), radius_mode=rec.get("radius_mode"),
            feature_min=_a(rec.get("feature_min")), feature_span=_a(rec.get("feature_span")),
        )

    def save(self, path):
        Path(path).write_text(json.dumps(self.to_dict(), indent=2), encoding="utf-8")

    @classmethod
    def load(cls, path):
        return cls.from_dict(json.loads(Path(path).read_text(encoding="utf-8")))


def margin(model):
    """Distance between the two support planes, sqrt(2) / |w|."""
    nw = float(np.linalg.norm(model.w))
    if nw == 0.0:
        raise DegenerateSolutionError("|w| = 0; margin undefined", norm_A=None)
    return math.sqrt(2.0) / nw


def predict(model, x):
    """sign(w . x + b) for a single point, with 0 mapped to +1."""
    x = np.asarray(x, dtype=float)
    if x.shape != np.shape(model.w):
        raise ValueError(f"expected a {len(model.w)}-vector, got shape {x.shape}")
    return 1 if float(x @ model.w) + model.b >= 0.0 else -1


def primal_feasibility_report(model, balls):
    """Slack max(0, 1 - [y_i (w . c_i + b) - |w| r_i]) for every ball."""
    centers, radii, labels = _arrays(balls)
    w = np.asarray(model.w, dtype=float)
    lhs = labels * (centers @ w + model.b) - np.linalg.norm(w) * radii
    return np.maximum(0.0, 1.0 - lhs)
