"""Purity-driven granular-ball generation.

The whole dataset starts as one ball. Any ball whose purity is below the
threshold is split by nearest-centroid clustering seeded at its per-class
centroids, and the children are queued again. Balls that are too small, or
whose members all coincide, stop splitting and are flagged ``terminal``.
"""

from __future__ import annotations

import csv
import json
from collections import deque
from dataclasses import dataclass
from enum import Enum
from pathlib import Path

import numpy as np

from .exceptions import TerminalBallError


class RadiusMode(str, Enum):
    AVERAGE = "average"
    MAX = "max"


@dataclass(frozen=True)
class BallGenConfig:
    purity_threshold: float = 0.9
    radius_mode: RadiusMode = RadiusMode.AVERAGE
    min_split_size: int = 2
    max_kmeans_rounds: int = 100
    kmeans_tol: float = 1e-6

    def __post_init__(self):
        if not 0.5 < self.purity_threshold <= 1.0:
            raise ValueError(f"purity threshold must lie in (0.5, 1], got {self.purity_threshold}")
        if self.min_split_size < 2:
            raise ValueError(f"min_split_size must be >= 2, got {self.min_split_size}")
        object.__setattr__(self, "radius_mode", RadiusMode(self.radius_mode))


@dataclass(frozen=True, eq=False)
class GranularBall:
    center: np.ndarray
    radius: float
    label: int
    purity: float
    members: np.ndarray  # sorted dataset row ids
    terminal: bool = False

    @property
    def size(self):
        return len(self.members)

    def to_record(self):
        return {
            "center": [float(v) for v in self.center],
            "radius": float(self.radius),
            "label": int(self.label),
            "purity": float(self.purity),
            "size": int(self.size),
            "terminal": bool(self.terminal),
            "members": [int(i) for i in self.members],
        }

    @classmethod
    def from_record(cls, rec):
        return cls(
            center=np.asarray(rec["center"], dtype=float),
            radius=float(rec["radius"]),
            label=int(rec["label"]),
            purity=float(rec["purity"]),
            members=np.asarray(rec.get("members", []), dtype=np.int64),
            terminal=bool(rec.get("terminal", False)),
        )


def ball_center(points):
    P = np.asarray(points, dtype=float)
    if P.size == 0:
        raise ValueError("cannot take the center of an empty point set")
    if P.ndim == 1:
        P = P[None, :]
    return P.mean(axis=0)


def ball_radius(points, center, mode=RadiusMode.AVERAGE):
    """Mean (``average``) or largest (``max``) Euclidean distance to ``center``."""
    P = np.asarray(points, dtype=float)
    if P.size == 0:
        raise ValueError("cannot take the radius of an empty point set")
    if P.ndim == 1:
        P = P[None, :]
    dist = np.linalg.norm(P - np.asarray(center, dtype=float), axis=1)
    mode = RadiusMode(mode)
    return float(dist.mean() if mode is RadiusMode.AVERAGE else dist.max())


def ball_purity(labels):
    """Return ``(purity, majority_label)``; ties go to +1."""
    y = np.asarray(labels)
    if y.size == 0:
        raise ValueError("cannot take the purity of an empty label set")
    n_pos = int(np.sum(y == 1))
    n_neg = y.size - n_pos
    if n_pos >= n_neg:
        return n_pos / y.size, 1
    return n_neg / y.size, -1


def _make_ball(X, y, ids, rows, mode, terminal=False):
    pts = X[rows]
    center = ball_center(pts)
    purity, label = ball_purity(y[rows])
    order = np.argsort(ids[rows], kind="stable")
    return GranularBall(
        center=center,
        radius=ball_radius(pts, center, mode),
        label=label,
        purity=purity,
        members=ids[rows][order],
        terminal=terminal,
    )


def _initial_centroids(P, y):
    classes = [c for c in (1, -1) if np.any(y == c)]
    if len(classes) >= 2:
        return np.vstack([P[y == c].mean(axis=0) for c in classes])
    # single-class ball: seed at the two mutually farthest-apart extremes
    a = int(np.argmax(np.linalg.norm(P - P.mean(axis=0), axis=1)))
    b = int(np.argmax(np.linalg.norm(P - P[a], axis=1)))
    return np.vstack([P[a], P[b]])


def _nearest_centroid(P, centroids, max_rounds, tol):
    k = len(centroids)
    centroids = centroids.copy()
    assign = np.zeros(len(P), dtype=np.int64)
    for _ in range(max_rounds):
        dist = np.linalg.norm(P[:, None, :] - centroids[None, :, :], axis=2)
        assign = np.argmin(dist, axis=1)
        for j in range(k):
            if not np.any(assign == j):
                # reseed an empty child at the member farthest from its old centroid
                far = int(np.argmax(dist[:, j] - np.where(_singleton_owner(assign), np.inf, 0.0)))
                assign[far] = j
        new = np.vstack([P[assign == j].mean(axis=0) for j in range(k)])
        shift = float(np.max(np.linalg.norm(new - centroids, axis=1)))
        centroids = new
        if shift <= tol:
            break
    return assign


def _singleton_owner(assign):
    # points that are the only member of their cluster must not be stolen
    counts = np.bincount(assign, minlength=assign.max() + 1)
    return counts[assign] == 1


def _split_rows(X, y, rows, cfg):
    P = X[rows]
    if np.all(P == P[0]):
        raise TerminalBallError("all member points coincide")
    assign = _nearest_centroid(P, _initial_centroids(P, y[rows]), cfg.max_kmeans_rounds, cfg.kmeans_tol)
    return [rows[assign == j] for j in np.unique(assign)]


def split_ball(ball, ds, cfg=BallGenConfig()):
    """Split one ball into children by nearest-centroid clustering.

    The number of children equals the number of distinct labels in the ball
    (two for a pure ball that is forced to split). Raises
    :class:`TerminalBallError` when all member points coincide.
    """
    if ball.size < cfg.min_split_size:
        raise ValueError(f"ball of size {ball.size} is below min_split_size={cfg.min_split_size}")
    rows = ds.rows_of(ball.members)
    parts = _split_rows(ds.features, ds.labels, rows, cfg)
    return [_make_ball(ds.features, ds.labels, ds.ids, p, cfg.radius_mode) for p in parts]


def generate_granular_balls(ds, cfg=BallGenConfig()):
    """Cover ``ds`` with balls whose purity reaches ``cfg.purity_threshold``.

    The returned balls partition the row ids and are ordered by their
    smallest member id. Balls that could not be split further despite low
    purity carry ``terminal=True``.
    """
    X, y, ids = ds.features, ds.labels, ds.ids
    done = []
    queue = deque([np.arange(ds.n)])
    while queue:
        rows = queue.popleft()
        purity, _ = ball_purity(y[rows])
        if purity >= cfg.purity_threshold:
            done.append((rows, False))
            continue
        if len(rows) < cfg.min_split_size:
            done.append((rows, True))
            continue
        try:
            parts = _split_rows(X, y, rows, cfg)
        except TerminalBallError:
            done.append((rows, True))
            continue
        queue.extend(parts)

    balls = [_make_ball(X, y, ids, rows, cfg.radius_mode, terminal) for rows, terminal in done]
    balls.sort(key=lambda b: int(b.members[0]))
    return balls


def ball_arrays(balls):
    """Stack ball centers, radii and labels into arrays for vectorized math."""
    centers = np.vstack([np.asarray(b.center, dtype=float) for b in balls])
    radii = np.array([b.radius for b in balls], dtype=float)
    labels = np.array([b.label for b in balls], dtype=float)
    return centers, radii, labels


def points_as_balls(ds):
    """Wrap every row as a radius-0, purity-1 ball (the point-SVM case)."""
    return [
        GranularBall(center=ds.features[i].copy(), radius=0.0, label=int(ds.labels[i]),
                     purity=1.0, members=ds.ids[i:i + 1].copy())
        for i in range(ds.n)
    ]


def export_balls(balls, path, fmt=None):
    """Write one record per ball as CSV (center..., radius, label, purity, size) or JSON."""
    path = Path(path)
    fmt = fmt or ("json" if path.suffix.lower() == ".json" else "csv")
    if fmt == "json":
        path.write_text(json.dumps([b.to_record() for b in balls], indent=2), encoding="utf-8")
        return
    d = len(balls[0].center) if balls else 0
    with path.open("w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh)
        w.writerow([f"c{j}" for j in range(d)] + ["radius", "label", "purity", "size", "terminal"])
        for b in balls:
            w.writerow([repr(float(v)) for v in b.center]
                       + [repr(float(b.radius)), b.label, repr(float(b.purity)), b.size, int(b.terminal)])
