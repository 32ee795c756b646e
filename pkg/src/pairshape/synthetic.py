"""Synthetic outline families for tests, demos and the ordering benchmark."""
from __future__ import annotations

from typing import Optional

import numpy as np

from .curves import PlanarCurve

DENSE = 256


def radial_outline(coefs, n: int = DENSE, aspect: float = 1.0, theta: float = 0.0,
                   start: float = 0.0, label: Optional[int] = None, shape_id: Optional[str] = None) -> PlanarCurve:
    """Closed star-shaped outline with log-radius sum_k a_k cos(k t) + b_k sin(k t).

    ``coefs`` maps harmonic k to (a_k, b_k). ``aspect`` stretches x, ``theta``
    rotates the outline and ``start`` moves the first sample along it.
    """
    t = 2 * np.pi * (np.arange(n) / n + start)
    logr = np.zeros(n)
    for k, (a, b) in coefs.items():
        logr += a * np.cos(k * t) + b * np.sin(k * t)
    r = np.exp(logr)
    pts = np.column_stack([aspect * r * np.cos(t), r * np.sin(t)])
    c, s = np.cos(theta), np.sin(theta)
    pts = pts @ np.array([[c, -s], [s, c]]).T
    return PlanarCurve(pts, True, label, shape_id)


def superellipse(power: float, n: int = DENSE, noise=None, **kw) -> PlanarCurve:
    """|x|^p + |y|^p = 1 traced by angle (p = 2 circle, large p approaches a square)."""
    t = 2 * np.pi * np.arange(n) / n
    c, s = np.cos(t), np.sin(t)
    rad = (np.abs(c) ** power + np.abs(s) ** power) ** (-1.0 / power)
    if noise is not None:
        rad = rad * (1 + noise)
    pts = np.column_stack([rad * c, rad * s])
    theta = kw.get("theta", 0.0)
    cs, sn = np.cos(theta), np.sin(theta)
    pts = pts @ np.array([[cs, -sn], [sn, cs]]).T
    shift = int(kw.get("start", 0.0) * n) % n
    return PlanarCurve(np.roll(pts, -shift, axis=0), True, kw.get("label"), kw.get("shape_id"))


def _nuisance(rng, n: int, scale: float, harmonics=range(2, 7)) -> np.ndarray:
    t = 2 * np.pi * np.arange(n) / n
    out = np.zeros(n)
    for k in harmonics:
        out += rng.normal(0, scale) * np.cos(k * t) + rng.normal(0, scale) * np.sin(k * t)
    return out


def circles_and_squares(n_per_class: int, seed=0, noise: float = 0.01) -> list[PlanarCurve]:
    """Class 1: noisy circles. Class 2: noisy rounded squares. Random pose and start."""
    rng = np.random.default_rng(seed)
    out = []
    for label, power in ((1, 2.0), (2, 8.0)):
        for i in range(n_per_class):
            out.append(
                superellipse(
                    power, noise=_nuisance(rng, DENSE, noise), theta=rng.uniform(0, 2 * np.pi),
                    start=rng.uniform(), label=label, shape_id=f"c{label}_{i:03d}",
                )
            )
    return out


# class templates of the outgroup benchmark: harmonic -> (a, b)
SIMILAR_TEMPLATES = {
    1: {2: (0.20, 0.0), 3: (0.00, 0.0)},
    3: {2: (0.20, 0.0), 3: (0.06, 0.0)},
    4: {2: (0.20, 0.0), 3: (0.00, 0.06)},
}
OUTGROUP_TEMPLATE = {5: (0.30, 0.0), 2: (0.05, 0.0)}
# the outgroup varies along harmonics that carry no class signal
OUTGROUP_NOISE = (4, 5, 6, 7, 8)
SIMILAR_NOISE = (4, 5)


def outgroup_benchmark(
    n_per_class: int,
    seed=0,
    within: float = 0.015,
    outgroup_within: float = 0.10,
    pose: bool = True,
) -> list[PlanarCurve]:
    """Four classes: 1, 3, 4 differ only in a small third harmonic; class 2 is a far outgroup.

    The outgroup is a five-lobed outline with much larger within-class
    variation, so it dominates any linearization that includes it.
    """
    rng = np.random.default_rng(seed)
    out = []
    for label in (1, 2, 3, 4):
        for i in range(n_per_class):
            if label == 2:
                coefs = dict(OUTGROUP_TEMPLATE)
                for k in OUTGROUP_NOISE:
                    a, b = coefs.get(k, (0.0, 0.0))
                    coefs[k] = (a + rng.normal(0, outgroup_within), b + rng.normal(0, outgroup_within))
            else:
                coefs = {k: (a + rng.normal(0, within), b + rng.normal(0, within))
                         for k, (a, b) in SIMILAR_TEMPLATES[label].items()}
                for k in SIMILAR_NOISE:
                    coefs[k] = (rng.normal(0, within), rng.normal(0, within))
            out.append(
                radial_outline(
                    coefs,
                    theta=rng.uniform(0, 2 * np.pi) if pose else 0.0,
                    start=rng.uniform() if pose else 0.0,
                    label=label,
                    shape_id=f"k{label}_{i:03d}",
                )
            )
    return out
