"""Spatial primitives: PPP deployments, ordered neighbour queries, distance laws.

Base stations are modelled as a homogeneous Poisson point process (PPP)
sampled inside a finite circular window.  The window stands in for the
infinite plane; callers keep a guard band between the area of interest and
the window edge so that nearest-neighbour statistics stay unbiased.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from numpy.random import default_rng
from scipy.special import gammainc, gammaln

from .errors import InsufficientPointsError, ParameterError

__all__ = [
    "Window",
    "Deployment",
    "NeighborList",
    "Trajectory",
    "guard_radius",
    "sample_ppp",
    "k_nearest",
    "kth_distance_pdf",
    "kth_distance_cdf",
    "edge_distance_pdf",
    "sample_trajectory",
]


def guard_radius(density: float) -> float:
    """Edge margin 3/sqrt(pi*density) inside which window-boundary effects on
    k-nearest statistics are negligible."""
    if density <= 0:
        raise ParameterError(f"density must be positive, got {density}")
    return 3.0 / np.sqrt(np.pi * density)


@dataclass(frozen=True)
class Window:
    """Circular simulation region."""

    center: tuple[float, float]
    radius: float

    def __post_init__(self) -> None:
        if not self.radius > 0:
            raise ParameterError(f"window radius must be positive, got {self.radius}")

    @property
    def area(self) -> float:
        return np.pi * self.radius**2

    def contains(self, points: np.ndarray, margin: float = 0.0) -> np.ndarray:
        """Boolean mask of points lying at least ``margin`` inside the boundary."""
        pts = np.atleast_2d(np.asarray(points, dtype=float))
        d = np.hypot(pts[:, 0] - self.center[0], pts[:, 1] - self.center[1])
        return d <= self.radius - margin + 1e-12 * self.radius


@dataclass(frozen=True, eq=False)
class Deployment:
    """One realisation of the BS point process.

    Immutable after creation; safe to share across workers.
    """

    points: np.ndarray
    density: float
    window: Window
    seed: int

    def __post_init__(self) -> None:
        pts = np.asarray(self.points, dtype=float).reshape(-1, 2).copy()
        pts.setflags(write=False)
        object.__setattr__(self, "points", pts)
        if not self.density > 0:
            raise ParameterError(f"density must be positive, got {self.density}")
        if pts.size and not self.window.contains(pts).all():
            raise ParameterError("deployment contains points outside its window")

    @property
    def size(self) -> int:
        return self.points.shape[0]


@dataclass(frozen=True, eq=False)
class NeighborList:
    """Base stations ordered by ascending distance, ties broken by BS id."""

    indices: np.ndarray
    distances: np.ndarray

    def __post_init__(self) -> None:
        idx = np.asarray(self.indices, dtype=np.int64).copy()
        dist = np.asarray(self.distances, dtype=float).copy()
        if idx.shape != dist.shape or idx.ndim != 1:
            raise ParameterError("indices and distances must be 1-D and equally long")
        if dist.size > 1 and np.any(np.diff(dist) < 0):
            raise ParameterError("neighbor distances must be non-decreasing")
        idx.setflags(write=False)
        dist.setflags(write=False)
        object.__setattr__(self, "indices", idx)
        object.__setattr__(self, "distances", dist)

    def __len__(self) -> int:
        return self.indices.size


def sample_ppp(density: float, window: Window, seed: int) -> Deployment:
    """Sample a homogeneous PPP of the given density inside ``window``.

    The point count is Poisson(density * area) and positions are i.i.d.
    uniform over the disk.  Deterministic for a fixed seed.
    """
    if density <= 0:
        raise ParameterError(f"density must be positive, got {density}")
    rng = default_rng(seed)
    n = rng.poisson(density * window.area)
    r = window.radius * np.sqrt(rng.uniform(size=n))
    phi = rng.uniform(0.0, 2.0 * np.pi, size=n)
    pts = np.column_stack([
        window.center[0] + r * np.cos(phi),
        window.center[1] + r * np.sin(phi),
    ])
    return Deployment(points=pts, density=density, window=window, seed=seed)


def k_nearest(deployment: Deployment, query: np.ndarray, k: int) -> NeighborList:
    """The ``k`` nearest base stations to ``query``, distance-ascending.

    Exact ties are broken by BS id so that downstream handover detection is
    deterministic (a zero-probability event under the PPP, but it matters for
    hand-constructed deployments).
    """
    if k < 0:
        raise ParameterError(f"k must be non-negative, got {k}")
    if k > deployment.size:
        raise InsufficientPointsError(
            f"requested k={k} neighbors from a deployment of {deployment.size} points"
        )
    if k == 0:
        return NeighborList(np.empty(0, dtype=np.int64), np.empty(0))
    q = np.asarray(query, dtype=float).reshape(2)
    d = np.hypot(deployment.points[:, 0] - q[0], deployment.points[:, 1] - q[1])
    order = np.lexsort((np.arange(deployment.size), d))[:k]
    return NeighborList(order, d[order])


def kth_distance_pdf(r, m: int, density: float):
    """Density of the distance to the m-th nearest point of a PPP.

    f(r) = 2 (pi L)^m / Gamma(m) * exp(-L pi r^2) * r^(2m-1), L = density.
    Evaluated in log space so large m stays finite.
    """
    if m < 1 or int(m) != m:
        raise ParameterError(f"m must be a positive integer, got {m}")
    if density <= 0:
        raise ParameterError(f"density must be positive, got {density}")
    r_arr = np.asarray(r, dtype=float)
    if np.any(r_arr < 0):
        raise ParameterError("r must be non-negative")
    out = np.zeros_like(r_arr)
    pos = r_arr > 0
    rp = r_arr[pos]
    log_pdf = (
        np.log(2.0)
        + m * np.log(np.pi * density)
        - gammaln(m)
        - density * np.pi * rp**2
        + (2 * m - 1) * np.log(rp)
    )
    out[pos] = np.exp(log_pdf)
    return out if out.ndim else float(out)


def kth_distance_cdf(r, m: int, density: float):
    """CDF matching :func:`kth_distance_pdf`: P(pi*density*r^2 area holds < m points)."""
    r_arr = np.asarray(r, dtype=float)
    out = gammainc(m, np.pi * density * r_arr**2)
    return out if out.ndim else float(out)


def edge_distance_pdf(r, density: float):
    """Distance density of the common edge-UE/cooperator separation R,

    f(R) = 2 (pi L)^2 R^3 exp(-pi L R^2),

    used as the outer weight of the coverage integral.  Algebraically this is
    the second-nearest law (:func:`kth_distance_pdf` with m=2); it is kept as
    its own routine because the coverage expression fixes this exact form.
    """
    if density <= 0:
        raise ParameterError(f"density must be positive, got {density}")
    r_arr = np.asarray(r, dtype=float)
    if np.any(r_arr < 0):
        raise ParameterError("r must be non-negative")
    out = 2.0 * (np.pi * density) ** 2 * r_arr**3 * np.exp(-np.pi * density * r_arr**2)
    return out if out.ndim else float(out)


@dataclass(frozen=True)
class Trajectory:
    """A single straight constant-speed segment."""

    start: tuple[float, float]
    direction: float
    speed: float
    duration: float
    step: float

    def __post_init__(self) -> None:
        if not 0.0 <= self.direction < 2.0 * np.pi:
            raise ParameterError(f"direction must lie in [0, 2pi), got {self.direction}")
        if self.speed <= 0:
            raise ParameterError(f"speed must be positive, got {self.speed}")
        if self.step <= 0:
            raise ParameterError(f"step must be positive, got {self.step}")
        if self.step > self.duration:
            raise ParameterError(
                f"step ({self.step}) must not exceed duration ({self.duration})"
            )

    @property
    def length(self) -> float:
        return self.speed * self.duration

    def times(self) -> np.ndarray:
        n = int(np.floor(self.duration / self.step + 1e-9))
        return np.arange(n + 1) * self.step

    def positions(self) -> np.ndarray:
        t = self.times()
        e = np.array([np.cos(self.direction), np.sin(self.direction)])
        return np.asarray(self.start, dtype=float)[None, :] + (self.speed * t)[:, None] * e[None, :]


def sample_trajectory(
    start: tuple[float, float],
    speed: float,
    duration: float,
    step: float,
    seed: int,
) -> Trajectory:
    """Trajectory with direction drawn uniformly on [0, 2pi); deterministic per seed."""
    rng = default_rng(seed)
    direction = rng.uniform(0.0, 2.0 * np.pi)
    return Trajectory(
        start=(float(start[0]), float(start[1])),
        direction=float(direction),
        speed=float(speed),
        duration=float(duration),
        step=float(step),
    )
