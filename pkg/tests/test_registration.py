import numpy as np
import pytest
from conftest import blob_srvf

from pairshape._dp import MOVES, dp_path
from pairshape.curves import inner
from pairshape.registration import (
    Alignment, RegistrationError, Reparam, align, apply_reparam, geodesic_path, optimal_reparam,
    optimal_rotation, refine, register, rotation_2d, shape_distance,
)


def test_rotation_matches_brute_force(rng):
    for _ in range(5):
        a, b = blob_srvf(rng, m=60), blob_srvf(rng, m=60)
        best = max(inner(a, b.rotate(rotation_2d(th))) for th in np.linspace(0, 2 * np.pi, 3600, endpoint=False))
        o = optimal_rotation(a, b)
        assert abs(np.linalg.det(o) - 1) < 1e-12
        assert np.allclose(o @ o.T, np.eye(2), atol=1e-12)
        assert inner(a, b.rotate(o)) >= best - 1e-12


def test_rotation_exact_inverse(rng):
    q = blob_srvf(rng)
    r = rotation_2d(0.7)
    o = optimal_rotation(q, q.rotate(r))
    assert np.allclose(o, r.T, atol=1e-12)


def test_reparam_validation():
    with pytest.raises(RegistrationError):
        Reparam([0.0, 0.6, 0.5, 1.0])
    with pytest.raises(RegistrationError):
        Reparam([0.1, 1.0])
    t = np.linspace(0, 1, 201)
    g = Reparam(t + 0.1 * np.sin(2 * np.pi * t) / (2 * np.pi))
    assert np.allclose(g.inverse()(g.values), t, atol=1e-4)


def test_apply_reparam_identity_and_norm(rng):
    q = blob_srvf(rng)
    same = apply_reparam(q, Reparam.identity(q.m + 1))
    assert np.allclose(same.values, q.values, atol=1e-12)
    warped = apply_reparam(q, Reparam(np.linspace(0, 1, q.m + 1) ** 1.5))
    assert abs(warped.norm() - 1) < 1e-12


def test_apply_reparam_quadratic_warp():
    # q(t) = (1, 0) on an open grid; warping by t^2 gives sqrt(2t)
    from pairshape.curves import Srvf

    m = 401
    q = Srvf(np.column_stack([np.ones(m), np.zeros(m)]), False)
    g = Reparam(np.linspace(0, 1, m) ** 2)
    out = apply_reparam(q, g)
    t = q.grid
    want = np.sqrt(2 * t)
    want = want / np.sqrt(np.sum(q.weights * want ** 2))
    assert np.max(np.abs(out.values[5:, 0] - want[5:])) < 1e-2
    assert np.allclose(out.values[:, 1], 0)


def independent_edge(q1, q2, k, l, i, j):
    n = len(q1)
    rows = np.arange(k, i + 1)
    cols = l + (j - l) / (i - k) * (rows - k)
    grid = np.arange(n)
    v = np.column_stack([np.interp(cols, grid, q2[:, 0]), np.interp(cols, grid, q2[:, 1])])
    f = np.sum(q1[rows] * v, axis=1)
    return np.trapezoid(f, dx=1.0 / (n - 1)) * np.sqrt((j - l) / (i - k))


def enumerate_best(q1, q2):
    n = len(q1)
    moves = [tuple(int(x) for x in mv) for mv in MOVES]
    edges = {}

    def edge(k, l, i, j):
        if (k, l, i, j) not in edges:
            edges[k, l, i, j] = independent_edge(q1, q2, k, l, i, j)
        return edges[k, l, i, j]

    best = -np.inf
    stack = [((0, 0), 0.0)]
    while stack:
        (i, j), s = stack.pop()
        if (i, j) == (n - 1, n - 1):
            best = max(best, s)
            continue
        for a, b in moves:
            if i + a < n and j + b < n:
                stack.append(((i + a, j + b), s + edge(i, j, i + a, j + b)))
    return best


@pytest.mark.parametrize("m,closed", [(5, True), (8, True), (10, False), (12, True)])
def test_dp_equals_exhaustive_enumeration(m, closed):
    rng = np.random.default_rng(m)
    a, b = rng.normal(size=(m + closed, 2)), rng.normal(size=(m + closed, 2))
    score, knots = dp_path(a, b)
    assert knots[0] == (0, 0) and knots[-1] == (len(a) - 1, len(a) - 1)
    assert score == pytest.approx(enumerate_best(a, b), abs=1e-12)


def test_dp_warp_is_valid(rng):
    a, b = blob_srvf(rng, m=40), blob_srvf(rng, m=40)
    g = optimal_reparam(a, b)
    assert g.values[0] == 0 and g.values[-1] == 1 and np.all(np.diff(g.values) > 0)


def test_construct_and_recover(rng):
    q = blob_srvf(rng, m=100, amp=0.15)
    t = np.linspace(0, 1, 101)
    g = Reparam(t + 0.05 * np.sin(2 * np.pi * t) / (2 * np.pi))
    moved = apply_reparam(q, g).rotate(rotation_2d(2.1)).shift(37)
    al = register(q, moved)
    assert al.inner_product >= 0.999
    assert np.allclose(al.rotation @ al.rotation.T, np.eye(2))


def test_invariance_of_distance():
    rng = np.random.default_rng(7)
    a, b = blob_srvf(rng, m=100, amp=0.15), blob_srvf(rng, m=100, amp=0.15)
    d0 = shape_distance(a, b)
    t = np.linspace(0, 1, 101)
    g = Reparam(t - 0.04 * np.sin(2 * np.pi * t) / (2 * np.pi))
    b2 = apply_reparam(b, g).rotate(rotation_2d(-1.2)).shift(61)
    assert abs(shape_distance(a, b2) - d0) < 0.05


def test_distance_range_and_no_increase(rng):
    for closed in (True, False):
        a, b = blob_srvf(rng, m=50, closed=closed), blob_srvf(rng, m=50, closed=closed)
        al = register(a, b)
        assert 0 <= al.distance <= np.pi
        assert al.distance <= np.arccos(np.clip(inner(a, b), -1, 1)) + 1e-12
        assert abs(al.apply(b).norm() - 1) < 1e-12
        assert al.inner_product == pytest.approx(inner(a, al.apply(b)), abs=1e-12)
        one = align(a, b)
        assert one.distance == pytest.approx(np.arccos(inner(a, one.apply(b))), abs=1e-12)
        assert al.distance <= one.distance + 1e-12


def test_self_distance_zero(rng):
    q = blob_srvf(rng, m=60)
    assert shape_distance(q, q) < 1e-6


def test_refine_never_worse(rng):
    a, b = blob_srvf(rng, m=40), blob_srvf(rng, m=40)
    al = register(a, b, polish=False)
    again = refine(a, b, al)
    assert isinstance(again, Alignment)
    assert again.inner_product >= al.inner_product - 1e-12


def test_mismatched_pairs(rng):
    with pytest.raises(RegistrationError):
        register(blob_srvf(rng, m=30), blob_srvf(rng, m=40))
    with pytest.raises(RegistrationError):
        register(blob_srvf(rng, m=30), blob_srvf(rng, m=30, closed=False))


def test_geodesic_path(rng):
    a, b = blob_srvf(rng, m=80), blob_srvf(rng, m=80)
    al = register(a, b)
    path = geodesic_path(a, al.apply(b), steps=20)
    assert len(path) == 21
    assert np.allclose(path[0].values, a.values) and np.allclose(path[-1].values, al.apply(b).values)
    assert all(abs(p.norm() - 1) < 1e-10 for p in path)
    chord = sum(np.sqrt(max(0.0, 2 - 2 * inner(p, r))) for p, r in zip(path, path[1:]))
    assert chord == pytest.approx(al.distance, rel=0.01)
    with pytest.raises(ValueError):
        geodesic_path(a, b, steps=0)


def test_distance_symmetric_circle_square():
    from pairshape.curves import preprocess, to_srvf
    from pairshape.synthetic import superellipse

    c = to_srvf(preprocess(superellipse(2.0), 100))
    sq = to_srvf(preprocess(superellipse(8.0, theta=0.3, start=0.2), 100))
    d1, d2 = register(c, sq, seed_candidates=8).distance, register(sq, c, seed_candidates=8).distance
    assert d1 > 0.1 and abs(d1 - d2) < 1e-6
