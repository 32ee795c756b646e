"""Elastic registration of SRVFs: rotation, re-parameterization and start point."""
from __future__ import annotations

from dataclasses import dataclass
from typing import Optional

import numpy as np
from scipy.interpolate import CubicSpline
from scipy.optimize import minimize

from ._dp import MOVES, dp_path
from .curves import Srvf, inner

MAX_ROUNDS = 10
ROUND_TOL = 1e-6
POLISH_MAXITER = 200
POLISH_SEEDS = 3
POLISH_BASIS_RATIO = 4


class RegistrationError(ValueError):
    pass


@dataclass(frozen=True)
class Reparam:
    """Piecewise-linear warping gamma, sampled on ``linspace(0, 1, len(values))``."""

    values: np.ndarray

    def __post_init__(self):
        g = np.array(self.values, dtype=float)
        if g.ndim != 1 or len(g) < 2:
            raise RegistrationError("reparameterization needs at least two knots")
        if g[0] != 0.0 or g[-1] != 1.0:
            raise RegistrationError("reparameterization must satisfy gamma(0)=0, gamma(1)=1")
        if np.any(np.diff(g) <= 0):
            raise RegistrationError("reparameterization must be strictly increasing")
        g.setflags(write=False)
        object.__setattr__(self, "values", g)

    @property
    def grid(self) -> np.ndarray:
        return np.linspace(0.0, 1.0, len(self.values))

    @classmethod
    def identity(cls, n: int) -> "Reparam":
        return cls(np.linspace(0.0, 1.0, n))

    def __call__(self, t):
        return np.interp(t, self.grid, self.values)

    def derivative(self, t):
        return np.interp(t, self.grid, np.gradient(self.values, self.grid))

    def inverse(self) -> "Reparam":
        grid = self.grid
        return Reparam(np.interp(grid, self.values, grid))


@dataclass(frozen=True)
class Alignment:
    rotation: np.ndarray
    reparam: Reparam
    seed_shift: int
    distance: float
    inner_product: float

    def apply(self, q2: Srvf) -> Srvf:
        """The registered representative O (shift(q2), gamma)."""
        return apply_reparam(q2.shift(self.seed_shift), self.reparam).rotate(self.rotation)


def _extended(q: Srvf) -> np.ndarray:
    """Values on a grid that includes t = 1 (closed curves wrap around)."""
    if q.closed:
        return np.vstack([q.values, q.values[:1]])
    return q.values


def _check_pair(q1: Srvf, q2: Srvf):
    if q1.m != q2.m:
        raise RegistrationError(f"grid sizes differ: {q1.m} vs {q2.m}")
    if q1.closed != q2.closed:
        raise RegistrationError("cannot register an open curve to a closed one")


def optimal_rotation(q1: Srvf, q2: Srvf) -> np.ndarray:
    """Rotation O in SO(2) maximizing <q1, O q2> (Procrustes via SVD)."""
    _check_pair(q1, q2)
    a = (q1.values * q1.weights[:, None]).T @ q2.values
    u, _, vt = np.linalg.svd(a)
    d = np.diag([1.0, np.sign(np.linalg.det(u @ vt)) or 1.0])
    return u @ d @ vt


def interpolant(q: Srvf) -> CubicSpline:
    """Cubic spline through the samples of q (periodic for closed curves)."""
    ext = _extended(q)
    src = np.linspace(0.0, 1.0, len(ext))
    return CubicSpline(src, ext, axis=0, bc_type="periodic" if q.closed else "not-a-knot")


def apply_reparam(q: Srvf, gamma: Reparam, spline: Optional[CubicSpline] = None) -> Srvf:
    """(q o gamma) sqrt(gamma'), with q interpolated by a cubic spline; renormalized.

    ``spline`` may pass a precomputed ``interpolant(q)``.
    """
    if not isinstance(gamma, Reparam):
        gamma = Reparam(gamma)
    t = q.grid
    g = gamma(t)
    gdot = gamma.derivative(t)
    moved = (interpolant(q) if spline is None else spline)(g)
    return q.with_values(moved * np.sqrt(gdot)[:, None]).normalized()


def optimal_reparam(q1: Srvf, q2: Srvf) -> Reparam:
    """Dynamic-programming warp maximizing <q1, (q2, gamma)> over lattice paths."""
    _check_pair(q1, q2)
    e1, e2 = _extended(q1), _extended(q2)
    _, knots = dp_path(e1, e2, MOVES)
    n = len(e1)
    rows = np.array([k[0] for k in knots], dtype=float)
    cols = np.array([k[1] for k in knots], dtype=float)
    values = np.interp(np.arange(n), rows, cols) / (n - 1)
    values[0], values[-1] = 0.0, 1.0
    return Reparam(values)


def _gradient_operator(n: int) -> np.ndarray:
    """Matrix of ``np.gradient`` on a uniform grid of n points over [0, 1]."""
    h = 1.0 / (n - 1)
    d = np.zeros((n, n))
    d[0, :2] = [-1.0 / h, 1.0 / h]
    d[-1, -2:] = [-1.0 / h, 1.0 / h]
    idx = np.arange(1, n - 1)
    d[idx, idx - 1] = -0.5 / h
    d[idx, idx + 1] = 0.5 / h
    return d


def warped_inner(
    q1: Srvf, q2: Srvf, gamma_values: np.ndarray, spline=None, with_grad: bool = False,
    unnormalized: bool = False,
):
    """<q1, apply_reparam(q2, gamma)> and optionally its gradient in the knot values.

    With ``unnormalized`` q1 may be any grid function; the result is then
    linear in q1 (used for derivatives with respect to a rotation of q1).
    """
    n = len(gamma_values)
    spline = interpolant(q2) if spline is None else spline
    w = np.zeros(n)
    w[: q1.m] = q1.weights
    v1 = np.zeros((n, 2))
    v1[: q1.m] = q1.values
    d = _gradient_operator(n)
    g = np.maximum(d @ gamma_values, 1e-14)
    s = spline(gamma_values)
    root = np.sqrt(g)
    proj = np.einsum("ij,ij->i", v1, s)
    sq = np.einsum("ij,ij->i", s, s)
    e = np.sum(w * proj * root)
    nn = np.sum(w * sq * g)
    ip = e / np.sqrt(nn)
    if unnormalized or not with_grad:
        return ip
    ds = spline(gamma_values, 1)
    de = w * np.einsum("ij,ij->i", v1, ds) * root + d.T @ (w * proj / (2 * root))
    dn = w * 2 * np.einsum("ij,ij->i", s, ds) * g + d.T @ (w * sq)
    grad = de / np.sqrt(nn) - 0.5 * e * nn ** -1.5 * dn
    return ip, grad


def rotation_2d(theta: float) -> np.ndarray:
    c, s = np.cos(theta), np.sin(theta)
    return np.array([[c, -s], [s, c]])


def _cosine_basis(segments: int, size: int) -> np.ndarray:
    u = (np.arange(segments) + 0.5) / segments
    return np.cos(np.pi * np.outer(u, np.arange(size)))


def polish_alignment(
    q1: Srvf, q2: Srvf, rotation: np.ndarray, gamma: Reparam, maxiter: int = POLISH_MAXITER,
    spline: Optional[CubicSpline] = None,
):
    """Joint local ascent of <q1, R (q2, gamma)> over the angle of R and gamma.

    The log-increments of gamma are expanded in a smooth cosine basis and
    normalized by a softmax, so the warp stays strictly increasing with exact
    endpoints and cannot develop grid-scale oscillations. Returns the start
    point unchanged when no improvement is found.
    """
    _check_pair(q1, q2)
    spline = interpolant(q2) if spline is None else spline
    n = len(gamma.values)
    basis = _cosine_basis(n - 1, max(4, (n - 1) // POLISH_BASIS_RATIO))
    c0, *_ = np.linalg.lstsq(basis, np.log(np.diff(gamma.values)), rcond=None)
    theta0 = np.arctan2(rotation[1, 0], rotation[0, 0])

    def unpack(x):
        z = basis @ x[:-1]
        e = np.exp(z - z.max())
        delta = e / e.sum()
        g = np.concatenate([[0.0], np.cumsum(delta)])
        g[-1] = 1.0
        return delta, g

    def objective(x):
        delta, g = unpack(x)
        th = x[-1]
        # <q1, R w> = <R^T q1, w>
        back = q1.rotate(rotation_2d(-th))
        ip, dg = warped_inner(back, q2, g, spline, with_grad=True)
        ddelta = np.cumsum(dg[::-1])[::-1][1:]
        dz = delta * (ddelta - ddelta @ delta)
        dback = q1.values @ np.array([[-np.sin(th), -np.cos(th)], [np.cos(th), -np.sin(th)]])
        dth = warped_inner(q1.with_values(dback), q2, g, spline, unnormalized=True)
        return -ip, -np.concatenate([basis.T @ dz, [dth]])

    x0 = np.concatenate([c0, [theta0]])
    res = minimize(
        objective, x0, jac=True, method="L-BFGS-B",
        options={"maxiter": maxiter, "gtol": 1e-12, "ftol": 1e-15},
    )
    _, g = unpack(res.x)
    try:
        cand = Reparam(g)
    except RegistrationError:
        return rotation, gamma
    rot = rotation_2d(res.x[-1])
    new = inner(q1, apply_reparam(q2, cand, spline).rotate(rot))
    old = inner(q1, apply_reparam(q2, gamma, spline).rotate(rotation))
    if new > old:
        return rot, cand
    return rotation, gamma


def _clamped_arccos(x: float) -> float:
    return float(np.arccos(np.clip(x, -1.0, 1.0)))


def _align_fixed_seed(q1: Srvf, q2s: Srvf, max_rounds: int, tol: float, polish: bool, start=None):
    """Alternate rotation and warp updates for one start point.

    Warps come from the lattice DP, or from local polishing of ``start`` when
    ``polish`` is set. Only improving updates are accepted.
    """
    n = len(_extended(q2s))
    spline = interpolant(q2s)
    if start is None:
        rot, gamma = np.eye(2), Reparam.identity(n)
        best = inner(q1, q2s)
        o = optimal_rotation(q1, q2s)
        ip = inner(q1, q2s.rotate(o))
        if ip > best:
            rot, best = o, ip
    else:
        rot, gamma, best = start
    for _ in range(max_rounds):
        if polish:
            o_new, g_new = polish_alignment(q1, q2s, rot, gamma, spline=spline)
            warped = apply_reparam(q2s, g_new, spline)
        else:
            g_new = optimal_reparam(q1, q2s.rotate(rot))
            warped = apply_reparam(q2s, g_new, spline)
            o_new = optimal_rotation(q1, warped)
        ip = inner(q1, warped.rotate(o_new))
        if ip <= best:
            break
        gain = ip - best
        rot, gamma, best = o_new, g_new, ip
        if gain < tol:
            break
    return rot, gamma, best


def rotation_seed_scores(q1: Srvf, q2: Srvf) -> np.ndarray:
    """Best rotation-only inner product for every start-point shift of q2."""
    z1 = q1.values[:, 0] + 1j * q1.values[:, 1]
    z2 = q2.values[:, 0] + 1j * q2.values[:, 1]
    corr = np.fft.ifft(np.conj(np.fft.fft(z1)) * np.fft.fft(z2))
    return np.abs(corr) / q1.m


def candidate_seeds(q1: Srvf, q2: Srvf, seed_stride: int = 1, seed_candidates: Optional[int] = None):
    seeds = np.arange(0, q2.m, max(1, int(seed_stride)))
    if seed_candidates is not None and seed_candidates < len(seeds):
        scores = rotation_seed_scores(q1, q2)[seeds]
        # stable sort keeps the smaller index first among equal scores
        top = seeds[np.argsort(-scores, kind="stable")[: int(seed_candidates)]]
        seeds = np.unique(np.concatenate([[0], top]))
    return [int(s) for s in seeds]


def _search(q1: Srvf, q2: Srvf, seed_stride, seed_candidates, max_rounds, tol, polish, polish_seeds):
    """Best (inner product, shift, rotation, warp) aligning q2 to q1."""
    seeds = candidate_seeds(q1, q2, seed_stride, seed_candidates) if q2.closed else [0]
    coarse = []
    for s in seeds:
        rot, gamma, ip = _align_fixed_seed(q1, q2.shift(s), max_rounds, tol, False)
        coarse.append((ip, s, rot, gamma))
    # best first; among equal scores the smaller shift wins
    coarse.sort(key=lambda c: (-c[0], c[1]))
    best = None
    for ip, s, rot, gamma in coarse[: max(1, polish_seeds) if polish else 1]:
        if polish:
            rot, gamma, ip = _align_fixed_seed(q1, q2.shift(s), max_rounds, tol, True, (rot, gamma, ip))
        if best is None or ip > best[0] or (ip == best[0] and s < best[1]):
            best = (ip, s, rot, gamma)
    return best


def register(
    q1: Srvf,
    q2: Srvf,
    seed_stride: int = 1,
    seed_candidates: Optional[int] = None,
    max_rounds: int = MAX_ROUNDS,
    tol: float = ROUND_TOL,
    polish: bool = True,
    polish_seeds: int = POLISH_SEEDS,
    symmetric: bool = True,
) -> Alignment:
    """Align q2 to q1 and return the transforms with the shape distance.

    Rotation and warping are optimized alternately. Closed curves also
    search over start points: every ``seed_stride``-th index, optionally
    pre-screened to the ``seed_candidates`` best rotation-only matches.
    With ``polish`` the ``polish_seeds`` best lattice solutions are refined
    by local ascent and the best refined one is kept.

    The discretized objective depends on which curve is resampled, so the
    two argument orders give slightly different optima. With ``symmetric``
    both orders are searched and ``distance`` uses the larger inner
    product, which makes it symmetric; the returned transforms and
    ``inner_product`` always describe q2 aligned to q1.
    """
    _check_pair(q1, q2)
    args = (seed_stride, seed_candidates, max_rounds, tol, polish, polish_seeds)
    _, s, rot, gamma = _search(q1, q2, *args)
    al = Alignment(rot, gamma, s, 0.0, 0.0)
    ip = inner(q1, al.apply(q2))
    best = ip
    if symmetric:
        _, s_r, rot_r, gamma_r = _search(q2, q1, *args)
        best = max(ip, inner(q2, Alignment(rot_r, gamma_r, s_r, 0.0, 0.0).apply(q1)))
    return Alignment(al.rotation, al.reparam, al.seed_shift, _clamped_arccos(best), ip)


def align(q1: Srvf, q2: Srvf, **kwargs) -> Alignment:
    """One-directional ``register``: distance is arccos of the returned inner product."""
    return register(q1, q2, **{**kwargs, "symmetric": False})


def shape_distance(q1: Srvf, q2: Srvf, **kwargs) -> float:
    return register(q1, q2, **kwargs).distance


def geodesic_path(q1: Srvf, q2aligned: Srvf, steps: int = 10) -> list[Srvf]:
    """Great-circle path from q1 to an already registered q2, steps + 1 points."""
    if steps < 1:
        raise ValueError("steps must be positive")
    _check_pair(q1, q2aligned)
    theta = _clamped_arccos(inner(q1, q2aligned))
    if theta > np.pi - 1e-6:
        raise RegistrationError("antipodal SRVFs have no unique geodesic")
    if theta < 1e-12:
        return [q1 for _ in range(steps + 1)]
    out = []
    for tau in np.linspace(0.0, 1.0, steps + 1):
        vals = (np.sin((1 - tau) * theta) * q1.values + np.sin(tau * theta) * q2aligned.values) / np.sin(theta)
        out.append(q1.with_values(vals))
    return out


def refine(q1: Srvf, q2: Srvf, previous: Alignment, max_rounds: int = MAX_ROUNDS, tol: float = ROUND_TOL) -> Alignment:
    """Locally improve ``previous`` (keeping its start point) for a nearby q1.

    Much cheaper than ``register`` and continuous in q1, which suits
    iterative schemes whose target moves by small steps.
    """
    _check_pair(q1, q2)
    q2s = q2.shift(previous.seed_shift)
    ip0 = inner(q1, apply_reparam(q2s, previous.reparam).rotate(previous.rotation))
    rot, gamma, _ = _align_fixed_seed(q1, q2s, max_rounds, tol, True, (previous.rotation, previous.reparam, ip0))
    al = Alignment(rot, gamma, previous.seed_shift, 0.0, 0.0)
    ip = inner(q1, al.apply(q2))
    return Alignment(rot, gamma, previous.seed_shift, _clamped_arccos(ip), ip)
