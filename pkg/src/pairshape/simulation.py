"""One-dimensional study: t-distributed classes, tail-contracting transforms, four LDA variants."""
from __future__ import annotations

import csv
import logging
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from itertools import combinations
from typing import Optional

import numpy as np
from scipy.special import ndtri, stdtr

log = logging.getLogger(__name__)

CDF_CLAMP = 1e-15
GRID_POINTS = 21


def transform(y, q: float, nu: float = 5.0):
    """x = Phi^-1(F_nu(y - q)) with F_nu the Student t CDF.

    The lower tail is evaluated for both signs, so the map is exactly odd
    about q; F is clamped to [1e-15, 1 - 1e-15].
    """
    d = np.asarray(y, dtype=float) - q
    lower = np.clip(stdtr(nu, -np.abs(d)), CDF_CLAMP, 0.5)
    x = -ndtri(lower) * np.sign(d)
    return float(x) if x.ndim == 0 else x


@dataclass(frozen=True)
class SimConfig:
    mus: tuple = (0.0, 2.0, 6.0)
    nu: float = 5.0
    n: int = 20_000
    q_grid: Optional[tuple] = None
    seed: int = 0
    threads: int = 1

    def __post_init__(self):
        if self.n < 1:
            raise ValueError("n must be at least 1")
        if not self.nu > 0:
            raise ValueError("degrees of freedom must be positive")
        if self.q_grid is not None and len(self.q_grid) == 0:
            raise ValueError("q grid must be nonempty")

    def grid(self) -> np.ndarray:
        if self.q_grid is not None:
            return np.asarray(self.q_grid, dtype=float)
        lo, hi = min(self.mus) - 4.0, max(self.mus) + 4.0
        return np.round(np.arange(lo, hi + 1e-9, 0.1), 10)


@dataclass
class SimResult:
    """Misclassification rates of the study; everything is a fraction in [0, 1]."""

    q_grid: Optional[np.ndarray] = None
    pair_curves: dict = field(default_factory=dict)
    pairwise_centers: dict = field(default_factory=dict)
    pairwise_rates: dict = field(default_factory=dict)
    overall_center: Optional[float] = None
    overall_pair_rates: dict = field(default_factory=dict)
    aggregated_pairwise_rate: Optional[float] = None
    overall_mean_rate: Optional[float] = None
    method_rates: Optional[np.ndarray] = None
    replicate_mus: Optional[np.ndarray] = None

    @property
    def excess(self) -> np.ndarray:
        """Rates of methods (i)-(iii) minus the rate of method (iv), per replicate."""
        return self.method_rates[:, :3] - self.method_rates[:, 3:4]


def draw(mus, nu: float, n: int, rng: np.random.Generator) -> list:
    return [mu + rng.standard_t(nu, size=n) for mu in mus]


def nearest_mean_rate(samples: list, q: float, nu: float, classes=None) -> float:
    """Error of nearest transformed-class-mean classification among ``classes``."""
    classes = list(range(len(samples))) if classes is None else list(classes)
    xs = [transform(samples[k], q, nu) for k in classes]
    means = np.array([x.mean() for x in xs])
    wrong = 0
    total = 0
    for idx, x in enumerate(xs):
        pred = np.argmin(np.abs(x[:, None] - means[None, :]), axis=1)
        wrong += int(np.sum(pred != idx))
        total += len(x)
    return wrong / total


def _pair_rate(xi: np.ndarray, xj: np.ndarray) -> float:
    mi, mj = xi.mean(), xj.mean()
    # nearest mean between two classes: compare with the midpoint
    mid = 0.5 * (mi + mj)
    if mi <= mj:
        wrong = np.sum(xi > mid) + np.sum(xj < mid)
    else:
        wrong = np.sum(xi < mid) + np.sum(xj > mid)
    return float(wrong) / (len(xi) + len(xj))


def run_q_sensitivity(config: SimConfig) -> SimResult:
    """Pairwise nearest-mean error as a function of the transform center q."""
    if len(config.mus) != 3:
        raise ValueError("the study uses exactly 3 classes")
    rng = np.random.default_rng(config.seed)
    ys = draw(config.mus, config.nu, config.n, rng)
    grid = config.grid()
    pairs = list(combinations(range(3), 2))
    curves = {p: np.empty(len(grid)) for p in pairs}
    for g, q in enumerate(grid):
        xs = [transform(y, q, config.nu) for y in ys]
        for i, j in pairs:
            curves[(i, j)][g] = _pair_rate(xs[i], xs[j])
    ybar = [y.mean() for y in ys]
    res = SimResult(q_grid=grid, pair_curves={(i + 1, j + 1): c for (i, j), c in curves.items()})
    for i, j in pairs:
        c = 0.5 * (ybar[i] + ybar[j])
        res.pairwise_centers[(i + 1, j + 1)] = c
        res.pairwise_rates[(i + 1, j + 1)] = _pair_rate(transform(ys[i], c, config.nu), transform(ys[j], c, config.nu))
    res.aggregated_pairwise_rate = float(np.mean(list(res.pairwise_rates.values())))
    center = float(np.mean(np.concatenate(ys)))
    res.overall_center = center
    xs = [transform(y, center, config.nu) for y in ys]
    for i, j in pairs:
        res.overall_pair_rates[(i + 1, j + 1)] = _pair_rate(xs[i], xs[j])
    res.overall_mean_rate = nearest_mean_rate(ys, center, config.nu)
    return res


def _lda_loglik(x: np.ndarray, means: np.ndarray, var: float) -> np.ndarray:
    """(n, K) scalar Gaussian log-likelihoods with a shared variance."""
    return -0.5 * np.log(2 * np.pi * var) - 0.5 * (x[:, None] - means[None, :]) ** 2 / var


def _space_fit(ys: list, q: float, nu: float):
    xs = [transform(y, q, nu) for y in ys]
    means = np.array([x.mean() for x in xs])
    var = float(np.mean([x.var(ddof=1) for x in xs]))
    return xs, means, var


def method_rates(ys: list, nu: float) -> np.ndarray:
    """Error rates of methods (i) overall-mean, (ii) pairwise OS, (iii) best grid point, (iv) pairwise REC."""
    K = len(ys)
    n_tot = sum(len(y) for y in ys)
    labels = np.concatenate([np.full(len(y), k) for k, y in enumerate(ys)])

    def rate_of(scores):
        # argmax with ties to the smallest class index
        return float(np.mean(np.argmax(scores, axis=1) != labels))

    # (i): one space centered at the overall mean
    xs, means, var = _space_fit(ys, float(np.mean(np.concatenate(ys))), nu)
    r1 = rate_of(_lda_loglik(np.concatenate(xs), means, var))

    # (ii)/(iv): one space per pair, centered at the pairwise mean
    ybar = [y.mean() for y in ys]
    pairs = list(combinations(range(K), 2))
    space_scores = {}
    for i, j in pairs:
        xs, means, var = _space_fit(ys, 0.5 * (ybar[i] + ybar[j]), nu)
        space_scores[(i, j)] = _lda_loglik(np.concatenate(xs), means, var)
    agg = np.mean([space_scores[p] for p in pairs], axis=0)
    r2 = rate_of(agg)

    # (iv): drop the lowest class (ties to the largest index) and decide among the rest
    alive = np.ones((n_tot, K), dtype=bool)
    for _ in range(K - 1):
        stage = np.zeros((n_tot, K))
        count = np.zeros((n_tot, 1))
        for i, j in pairs:
            use = alive[:, i] & alive[:, j]
            stage[use] += space_scores[(i, j)][use]
            count[use, 0] += 1
        stage = np.where(alive, stage / np.maximum(count, 1), np.inf)
        rev = stage[:, ::-1]
        drop = K - 1 - np.argmin(rev, axis=1)
        alive[np.arange(n_tot), drop] = False
    r4 = float(np.mean(np.argmax(alive, axis=1) != labels))

    # (iii): best single center on a grid between the smallest and largest mean
    grid = np.linspace(min(ybar), max(ybar), GRID_POINTS)
    r3 = np.inf
    for q in grid:
        xs, means, var = _space_fit(ys, q, nu)
        r3 = min(r3, rate_of(_lda_loglik(np.concatenate(xs), means, var)))
    return np.array([r1, r2, float(r3), r4])


def run_method_comparison(config: SimConfig, replicates: int = 50, force_equal: bool = False) -> SimResult:
    """Per replicate draw mu_k ~ U(0, 10), simulate, and score the four methods.

    ``force_equal`` uses one draw for all three locations (a degenerate check).
    """
    streams = np.random.SeedSequence(config.seed).spawn(replicates)

    def one(ss):
        rng = np.random.default_rng(ss)
        mus = rng.uniform(0, 10, size=3)
        if force_equal:
            mus[:] = mus[0]
        ys = draw(mus, config.nu, config.n, rng)
        return mus, method_rates(ys, config.nu)

    if config.threads > 1:
        with ThreadPoolExecutor(max_workers=config.threads) as pool:
            out = list(pool.map(one, streams))
    else:
        out = [one(ss) for ss in streams]
    return SimResult(method_rates=np.array([r for _, r in out]), replicate_mus=np.array([m for m, _ in out]))


def write_q_sensitivity(result: SimResult, path) -> None:
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["pair", "q", "rate"])
        for (i, j), curve in result.pair_curves.items():
            for q, r in zip(result.q_grid, curve):
                w.writerow([f"{i}-{j}", f"{q:.4f}", f"{r:.6f}"])


def write_method_comparison(result: SimResult, path) -> None:
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["replicate", "rate_i", "rate_ii", "rate_iii", "rate_iv"])
        for k, row in enumerate(result.method_rates):
            w.writerow([k] + [f"{v:.6f}" for v in row])
