"""Planar curves, arc-length resampling and the square-root velocity transform."""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Optional

import numpy as np

DERIVATIVE_FLOOR = 1e-10
DEFAULT_M = 100


class CurveError(ValueError):
    """Raised for curves that violate the basic invariants."""


def _as_points(points) -> np.ndarray:
    pts = np.array(points, dtype=float)
    if pts.ndim != 2 or pts.shape[1] != 2:
        raise CurveError(f"expected an (m, 2) array of points, got shape {pts.shape}")
    if not np.all(np.isfinite(pts)):
        raise CurveError("curve contains non-finite coordinates")
    pts.setflags(write=False)
    return pts


@dataclass(frozen=True)
class PlanarCurve:
    """Ordered 2-D samples of an outline.

    Closed curves do not repeat the first point at the end.
    """

    points: np.ndarray
    closed: bool = True
    label: Optional[int] = None
    shape_id: Optional[str] = field(default=None, compare=False)

    def __post_init__(self):
        pts = _as_points(self.points)
        if len(pts) < 3:
            raise CurveError(f"a curve needs at least 3 points, got {len(pts)}")
        if np.all(pts == pts[0]):
            raise CurveError("all points of the curve are identical")
        object.__setattr__(self, "points", pts)

    @property
    def m(self) -> int:
        return len(self.points)

    def segment_lengths(self) -> np.ndarray:
        pts = self.points
        if self.closed:
            pts = np.vstack([pts, pts[:1]])
        return np.linalg.norm(np.diff(pts, axis=0), axis=1)

    def length(self) -> float:
        return float(self.segment_lengths().sum())

    def with_points(self, points) -> "PlanarCurve":
        return PlanarCurve(points, self.closed, self.label, self.shape_id)

    def translate(self, shift) -> "PlanarCurve":
        return self.with_points(self.points + np.asarray(shift, dtype=float))

    def rotate(self, theta: float) -> "PlanarCurve":
        return self.with_points(self.points @ rotation_matrix(theta).T)

    def scale(self, c: float) -> "PlanarCurve":
        return self.with_points(self.points * c)


def rotation_matrix(theta: float) -> np.ndarray:
    c, s = np.cos(theta), np.sin(theta)
    return np.array([[c, -s], [s, c]])


def parameter_grid(m: int, closed: bool) -> np.ndarray:
    """Uniform grid on [0, 1]; the closed grid omits t = 1 (it equals t = 0)."""
    if closed:
        return np.arange(m) / m
    return np.linspace(0.0, 1.0, m)


def quadrature_weights(m: int, closed: bool) -> np.ndarray:
    """Trapezoidal weights on the parameter grid (uniform for periodic data)."""
    if closed:
        return np.full(m, 1.0 / m)
    w = np.full(m, 1.0 / (m - 1))
    w[0] = w[-1] = 0.5 / (m - 1)
    return w


@dataclass(frozen=True)
class Srvf:
    """Discretized square-root velocity function, shape (m, 2)."""

    values: np.ndarray
    closed: bool = True

    def __post_init__(self):
        vals = np.array(self.values, dtype=float)
        if vals.ndim != 2 or vals.shape[1] != 2 or len(vals) < 3:
            raise CurveError(f"SRVF values must be (m, 2) with m >= 3, got {vals.shape}")
        vals.setflags(write=False)
        object.__setattr__(self, "values", vals)

    @property
    def m(self) -> int:
        return len(self.values)

    @property
    def grid(self) -> np.ndarray:
        return parameter_grid(self.m, self.closed)

    @property
    def weights(self) -> np.ndarray:
        return quadrature_weights(self.m, self.closed)

    def norm(self) -> float:
        return float(np.sqrt(inner(self, self)))

    def flat(self) -> np.ndarray:
        """x coordinates followed by y coordinates, length 2m."""
        return np.concatenate([self.values[:, 0], self.values[:, 1]])

    def with_values(self, values) -> "Srvf":
        return Srvf(values, self.closed)

    def normalized(self) -> "Srvf":
        nrm = self.norm()
        if nrm == 0:
            return self
        return self.with_values(self.values / nrm)

    def rotate(self, matrix: np.ndarray) -> "Srvf":
        return self.with_values(self.values @ np.asarray(matrix).T)

    def shift(self, s: int) -> "Srvf":
        """Move the start point forward by ``s`` samples (closed curves only)."""
        if s == 0:
            return self
        if not self.closed:
            raise CurveError("seed shifts are only defined for closed curves")
        return self.with_values(np.roll(self.values, -s, axis=0))


def inner(q1: Srvf, q2: Srvf) -> float:
    """L2 inner product on the shared parameter grid."""
    if q1.m != q2.m or q1.closed != q2.closed:
        raise CurveError("SRVFs live on different grids")
    w = q1.weights
    return float(np.sum(w * np.einsum("ij,ij->i", q1.values, q2.values)))


def normalize(curve: PlanarCurve) -> PlanarCurve:
    """Center on the point centroid and scale to unit piecewise-linear length."""
    length = curve.length()
    if not length > 0:
        raise CurveError("cannot normalize a zero-length curve")
    pts = curve.points - curve.points.mean(axis=0)
    return curve.with_points(pts / length)


def resample_arclength(curve: PlanarCurve, m: int = DEFAULT_M) -> PlanarCurve:
    """Resample ``m`` points equally spaced in arc length along the polyline."""
    if m < 3:
        raise CurveError(f"need m >= 3 sample points, got {m}")
    pts = curve.points
    if curve.closed:
        pts = np.vstack([pts, pts[:1]])
    seg = np.linalg.norm(np.diff(pts, axis=0), axis=1)
    # drop repeated points so the arc-length abscissa is strictly increasing
    keep = np.concatenate([[True], seg > 0])
    pts = pts[keep]
    s = np.concatenate([[0.0], np.cumsum(seg[seg > 0])])
    total = s[-1]
    if curve.closed:
        targets = np.arange(m) * (total / m)
    else:
        targets = np.linspace(0.0, total, m)
        targets[-1] = total
    new = np.column_stack([np.interp(targets, s, pts[:, 0]), np.interp(targets, s, pts[:, 1])])
    if not curve.closed:
        new[0], new[-1] = pts[0], pts[-1]
    return curve.with_points(new)


def preprocess(curve: PlanarCurve, m: int = DEFAULT_M) -> PlanarCurve:
    """Resample then normalize: the form ``to_srvf`` expects."""
    return normalize(resample_arclength(normalize(curve), m))


def velocity(points: np.ndarray, closed: bool) -> np.ndarray:
    m = len(points)
    if closed:
        h = 1.0 / m
        return (np.roll(points, -1, axis=0) - np.roll(points, 1, axis=0)) / (2 * h)
    return np.gradient(points, 1.0 / (m - 1), axis=0, edge_order=2)


def to_srvf(curve: PlanarCurve) -> Srvf:
    """q = beta' / sqrt(|beta'|), renormalized to unit L2 norm."""
    vel = velocity(curve.points, curve.closed)
    speed = np.linalg.norm(vel, axis=1)
    q = np.zeros_like(vel)
    ok = speed >= DERIVATIVE_FLOOR
    q[ok] = vel[ok] / np.sqrt(speed[ok])[:, None]
    return Srvf(q, curve.closed).normalized()


def from_srvf(q: Srvf, label: Optional[int] = None) -> PlanarCurve:
    """Integrate q|q| with the trapezoidal rule; the curve starts at the origin.

    A zero SRVF integrates to a single point; that degenerate case is returned
    as a bare ``(m, 2)`` zero array instead of a ``PlanarCurve``.
    """
    vals = q.values
    speed = np.linalg.norm(vals, axis=1)
    integrand = vals * speed[:, None]
    h = 1.0 / q.m if q.closed else 1.0 / (q.m - 1)
    steps = 0.5 * h * (integrand[1:] + integrand[:-1])
    pts = np.vstack([np.zeros(2), np.cumsum(steps, axis=0)])
    if np.all(pts == 0):
        return pts
    return PlanarCurve(pts, q.closed, label)
