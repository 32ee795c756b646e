"""Sphere geometry, Karcher means and tangent PCA for SRVFs."""
from __future__ import annotations

import logging
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Optional, Sequence

import numpy as np

from .curves import Srvf, inner
from .io import srvf_from_dict, srvf_to_dict
from .registration import align, refine

log = logging.getLogger(__name__)

ZERO_NORM = 1e-12
ANTIPODAL_MARGIN = 1e-6


class ManifoldError(ValueError):
    pass


@dataclass(frozen=True)
class TangentVector:
    """Element of the tangent space of the pre-shape sphere at ``base``."""

    base: Srvf
    values: np.ndarray

    def __post_init__(self):
        vals = np.array(self.values, dtype=float)
        if vals.shape != self.base.values.shape:
            raise ManifoldError(f"tangent values {vals.shape} do not match base {self.base.values.shape}")
        vals.setflags(write=False)
        object.__setattr__(self, "values", vals)

    def as_srvf(self) -> Srvf:
        return self.base.with_values(self.values)

    def norm(self) -> float:
        return float(np.sqrt(max(inner(self.as_srvf(), self.as_srvf()), 0.0)))

    def flat(self) -> np.ndarray:
        """Length-2m coordinates whose Euclidean geometry equals the L2 geometry."""
        return weighted_flat(self.base, self.values)

    def scaled(self, c: float) -> "TangentVector":
        return TangentVector(self.base, self.values * c)


def weighted_flat(q: Srvf, values: np.ndarray) -> np.ndarray:
    """x then y coordinates, each multiplied by sqrt of the quadrature weight."""
    sw = np.sqrt(q.weights)
    return np.concatenate([values[:, 0] * sw, values[:, 1] * sw])


def unflatten(q: Srvf, flat: np.ndarray) -> np.ndarray:
    """Inverse of ``weighted_flat`` for the grid of ``q``."""
    sw = np.sqrt(q.weights)
    m = q.m
    return np.column_stack([flat[:m] / sw, flat[m:] / sw])


def exp_map(p: Srvf, v: TangentVector) -> Srvf:
    """cos(|v|) p + sin(|v|) v/|v|."""
    nv = v.norm()
    if nv < ZERO_NORM:
        return p
    return p.with_values(np.cos(nv) * p.values + np.sin(nv) * v.values / nv)


def log_map(p: Srvf, q: Srvf) -> TangentVector:
    """Inverse exponential: theta/sin(theta) (q - cos(theta) p)."""
    c = float(np.clip(inner(p, q), -1.0, 1.0))
    theta = float(np.arccos(c))
    if theta < ZERO_NORM:
        return TangentVector(p, np.zeros_like(p.values))
    if theta > np.pi - ANTIPODAL_MARGIN:
        raise ManifoldError("log map is undefined for antipodal points")
    vals = theta / np.sin(theta) * (q.values - c * p.values)
    # remove the round-off component along p so the result is tangent
    vals = vals - inner(p, p.with_values(vals)) * p.values
    return TangentVector(p, vals)


# --- Karcher mean -----------------------------------------------------------

@dataclass(frozen=True)
class MeanConfig:
    step: float = 0.5
    tol: float = 1e-5
    max_iter: int = 50
    anchors: int = 10
    seed: int = 0
    threads: int = 1
    max_halvings: int = 10
    warm_start: bool = True
    registration: dict = field(default_factory=dict)


@dataclass(frozen=True)
class KarcherMean:
    mean: Srvf
    aligned_samples: list
    iterations: int
    final_gradient_norm: float
    converged: bool = True
    objective_history: tuple = ()
    status: str = "converged"
    distances: Optional[np.ndarray] = None

    def to_dict(self) -> dict:
        return {
            "mean": srvf_to_dict(self.mean),
            "aligned_samples": [srvf_to_dict(q) for q in self.aligned_samples],
            "iterations": self.iterations,
            "final_gradient_norm": self.final_gradient_norm,
            "converged": self.converged,
            "objective_history": list(self.objective_history),
            "status": self.status,
            "distances": None if self.distances is None else self.distances.tolist(),
        }

    @classmethod
    def from_dict(cls, d: dict) -> "KarcherMean":
        dist = d.get("distances")
        return cls(
            srvf_from_dict(d["mean"]),
            [srvf_from_dict(q) for q in d["aligned_samples"]],
            int(d["iterations"]),
            float(d["final_gradient_norm"]),
            bool(d.get("converged", True)),
            tuple(d.get("objective_history", ())),
            d.get("status", "converged"),
            None if dist is None else np.asarray(dist, dtype=float),
        )


def _map(fn, items, threads: int):
    if threads > 1 and len(items) > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            return list(pool.map(fn, items))
    return [fn(x) for x in items]


def register_all(center: Srvf, shapes: Sequence[Srvf], threads: int = 1, **reg_kwargs):
    """Register every shape to ``center``; returns (aligned shapes, distances)."""
    aligned, dists, _ = _register_all(center, shapes, threads, None, reg_kwargs)
    return aligned, dists


def _register_all(center, shapes, threads, previous, reg_kwargs):
    if previous is None:
        fn = lambda i: align(center, shapes[i], **reg_kwargs)
    else:
        fn = lambda i: refine(center, shapes[i], previous[i])
    alignments = _map(fn, list(range(len(shapes))), threads)
    aligned = [al.apply(q) for al, q in zip(alignments, shapes)]
    dists = np.array([al.distance for al in alignments])
    return aligned, dists, alignments


def _initial_center(shapes: Sequence[Srvf], config: MeanConfig) -> int:
    n = len(shapes)
    if n <= 2:
        return 0
    rng = np.random.default_rng(config.seed)
    k = min(config.anchors, n)
    anchors = np.sort(rng.choice(n, size=k, replace=False))
    cost = np.zeros(n)
    for a in anchors:
        _, d = register_all(shapes[a], shapes, config.threads, **config.registration)
        cost += d**2
    return int(np.argmin(cost))


def _check_shapes(shapes: Sequence[Srvf]):
    if len(shapes) < 2:
        raise ManifoldError("a Karcher mean needs at least 2 shapes")
    m, closed = shapes[0].m, shapes[0].closed
    if any(q.m != m or q.closed != closed for q in shapes):
        raise ManifoldError("all shapes must share the grid size and the closed flag")


def karcher_mean(
    shapes: Sequence[Srvf], config: Optional[MeanConfig] = None, init: Optional[Srvf] = None
) -> KarcherMean:
    """Minimize the sum of squared shape distances by gradient descent on the sphere.

    Each iteration registers every shape to the current estimate, averages the
    log maps and steps along the average. A step that would raise the
    objective is halved until it does not (up to ``max_halvings`` times).
    With ``warm_start`` the alignments are refined from the previous
    iteration and a full search is repeated once the mean has settled.
    ``status`` is "converged", "max_iter" or "stalled" (no descent step found).
    """
    config = config or MeanConfig()
    shapes = list(shapes)
    _check_shapes(shapes)
    reg = dict(config.registration)
    mu = init if init is not None else shapes[_initial_center(shapes, config)]
    aligned, dists, als = _register_all(mu, shapes, config.threads, None, reg)
    history = [float(np.sum(dists**2))]
    grad_norm = np.inf
    status = "max_iter"
    it = 0
    while it < config.max_iter:
        it += 1
        vbar = np.mean([log_map(mu, q).values for q in aligned], axis=0)
        step_vec = TangentVector(mu, vbar)
        grad_norm = step_vec.norm()
        if grad_norm < config.tol:
            if not config.warm_start:
                status = "converged"
                break
            # warm starts only track the current basins; check with a full search
            f_aligned, f_dists, f_als = _register_all(mu, shapes, config.threads, None, reg)
            better = f_dists < dists - 1e-9
            if not np.any(better):
                status = "converged"
                break
            als = [f if b else a for f, a, b in zip(f_als, als, better)]
            aligned = [f if b else a for f, a, b in zip(f_aligned, aligned, better)]
            dists = np.where(better, f_dists, dists)
            history[-1] = float(np.sum(dists**2))
            continue
        eps = config.step
        accepted = False
        previous = als if config.warm_start else None
        for _ in range(config.max_halvings + 1):
            cand = exp_map(mu, step_vec.scaled(eps)).normalized()
            c_aligned, c_dists, c_als = _register_all(cand, shapes, config.threads, previous, reg)
            obj = float(np.sum(c_dists**2))
            if obj <= history[-1] + 1e-10:
                accepted = True
                break
            eps *= 0.5
        if not accepted:
            log.info("Karcher mean stalled at iteration %d (|v| = %.3g)", it, grad_norm)
            status = "stalled"
            break
        mu, aligned, dists, als = cand, c_aligned, c_dists, c_als
        history.append(obj)
        log.debug("Karcher iteration %d objective %.6g |v| %.3g", it, obj, grad_norm)
    return KarcherMean(
        mu, aligned, it, float(grad_norm), status == "converged", tuple(history), status, dists
    )


def karcher_objective(center: Srvf, shapes: Sequence[Srvf], **reg_kwargs) -> float:
    _, d = register_all(center, shapes, **reg_kwargs)
    return float(np.sum(d**2))


# --- tangent PCA ------------------------------------------------------------

def tangent_matrix(mean: KarcherMean) -> np.ndarray:
    """Rows are log maps of the aligned samples at the mean (``TangentVector.flat``)."""
    return project_rows(mean.mean, mean.aligned_samples)


def project_rows(base: Srvf, aligned: Sequence[Srvf]) -> np.ndarray:
    if not aligned:
        return np.zeros((0, 2 * base.m))
    return np.vstack([log_map(base, q).flat() for q in aligned])


@dataclass(frozen=True)
class PcBasis:
    """Projection point plus principal directions (columns) and variances."""

    base: Optional[Srvf]
    directions: np.ndarray
    variances: np.ndarray
    total_variance: float = 0.0
    center: Optional[np.ndarray] = None

    @property
    def r(self) -> int:
        return self.directions.shape[1]

    def to_dict(self) -> dict:
        return {
            "base": None if self.base is None else srvf_to_dict(self.base),
            "directions": self.directions.tolist(),
            "variances": self.variances.tolist(),
            "total_variance": self.total_variance,
            "center": None if self.center is None else self.center.tolist(),
        }

    @classmethod
    def from_dict(cls, d: dict) -> "PcBasis":
        c = d.get("center")
        return cls(
            None if d["base"] is None else srvf_from_dict(d["base"]),
            np.asarray(d["directions"], dtype=float).reshape(-1, len(d["variances"])),
            np.asarray(d["variances"], dtype=float),
            float(d.get("total_variance", 0.0)),
            None if c is None else np.asarray(c, dtype=float),
        )


@dataclass(frozen=True)
class PcCoords:
    coords: np.ndarray
    basis: PcBasis = field(repr=False)


def tpca(V: np.ndarray, r: int, base: Optional[Srvf] = None, center: bool = False) -> PcBasis:
    """Principal directions of Q = V'V / (n - 1) via the SVD of V / sqrt(n - 1).

    With ``center`` the column means are removed first, which matters when the
    rows are not centered at the projection point.
    """
    V = np.asarray(V, dtype=float)
    if V.ndim != 2:
        raise ManifoldError("tangent data matrix must be 2-D")
    n, dim = V.shape
    if n < 2:
        raise ManifoldError("tangent PCA needs at least 2 rows")
    if not 1 <= r <= min(n - 1, dim):
        raise ManifoldError(f"r must be in [1, {min(n - 1, dim)}], got {r}")
    mu = V.mean(axis=0) if center else None
    X = V - mu if center else V
    _, s, vt = np.linalg.svd(X / np.sqrt(n - 1), full_matrices=False)
    var = s**2
    dirs = vt[:r].T.copy()
    # fix the sign so the largest-magnitude entry of each direction is positive
    idx = np.argmax(np.abs(dirs), axis=0)
    dirs *= np.sign(dirs[idx, np.arange(r)])
    return PcBasis(base, dirs, var[:r].copy(), float(var.sum()), mu)


def pc_coords(V_rows: np.ndarray, basis: PcBasis) -> PcCoords:
    """Coefficients c_ij = <v_i, U_j> of tangent rows on the basis directions."""
    V = np.atleast_2d(np.asarray(V_rows, dtype=float))
    if V.shape[1] != basis.directions.shape[0]:
        raise ManifoldError(
            f"tangent rows have length {V.shape[1]}, basis expects {basis.directions.shape[0]}"
        )
    if not np.all(np.isfinite(V)):
        raise ManifoldError("tangent rows contain non-finite values")
    return PcCoords(V @ basis.directions, basis)
