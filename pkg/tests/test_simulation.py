import numpy as np
import pytest
from scipy import stats

from pairshape.simulation import (
    SimConfig, draw, method_rates, nearest_mean_rate, run_method_comparison, run_q_sensitivity,
    transform, write_method_comparison, write_q_sensitivity,
)


def test_transform_matches_distribution_functions():
    y = np.linspace(-6, 9, 301)
    want = stats.norm.ppf(stats.t.cdf(y - 1.5, 5))
    assert np.allclose(transform(y, 1.5, 5), want, atol=1e-9)


def test_transform_properties():
    y = np.linspace(-50, 50, 2001)
    x = transform(y, 2.0)
    assert transform(2.0, 2.0) == 0.0
    assert np.array_equal(transform(y, 0.0), -transform(-y, 0.0))
    assert np.all(np.diff(x) >= 0) and np.all(np.isfinite(x))
    assert np.max(np.abs(transform(np.array([-1e300, 1e300]), 0.0))) < 8.3
    # tails are contracted: |x| <= |y - q|
    assert np.all(np.abs(x) <= np.abs(y - 2.0) + 1e-12)


def test_config_validation():
    with pytest.raises(ValueError):
        SimConfig(n=0)
    with pytest.raises(ValueError):
        SimConfig(nu=0)
    grid = SimConfig(mus=(0, 2, 6)).grid()
    assert grid[0] == -4.0 and grid[-1] == 10.0 and len(grid) == 141


def test_identical_locations_are_a_coin_flip():
    rng = np.random.default_rng(0)
    ys = draw([1.0, 1.0], 5, 50_000, rng)
    assert abs(nearest_mean_rate(ys, 1.0, 5) - 0.5) < 0.01


def test_all_equal_locations():
    res = run_method_comparison(SimConfig(n=20_000, seed=3), replicates=2, force_equal=True)
    assert np.all(np.abs(res.method_rates - 2 / 3) < 0.03)
    assert np.allclose(res.replicate_mus, res.replicate_mus[:, :1])


def test_well_separated_classes():
    rng = np.random.default_rng(1)
    rates = method_rates(draw([0.0, 30.0, 60.0], 5, 5_000, rng), 5)
    assert np.all(rates < 0.01)


def test_determinism_and_files(tmp_path):
    cfg = SimConfig(n=2_000, q_grid=(0.0, 1.0, 2.0), seed=7)
    a, b = run_q_sensitivity(cfg), run_q_sensitivity(cfg)
    assert a.aggregated_pairwise_rate == b.aggregated_pairwise_rate
    write_q_sensitivity(a, tmp_path / "q1.csv")
    write_q_sensitivity(b, tmp_path / "q2.csv")
    assert (tmp_path / "q1.csv").read_bytes() == (tmp_path / "q2.csv").read_bytes()
    assert (tmp_path / "q1.csv").read_text().splitlines()[0] == "pair,q,rate"
    m1 = run_method_comparison(SimConfig(n=1_000, seed=2), replicates=3)
    m2 = run_method_comparison(SimConfig(n=1_000, seed=2, threads=2), replicates=3)
    assert np.array_equal(m1.method_rates, m2.method_rates)
    write_method_comparison(m1, tmp_path / "m.csv")
    assert len((tmp_path / "m.csv").read_text().splitlines()) == 4
    assert m1.excess.shape == (3, 3)


def test_pairwise_rate_uses_pairwise_mean():
    res = run_q_sensitivity(SimConfig(n=20_000, q_grid=(0.0,), seed=0))
    assert set(res.pair_curves) == {(1, 2), (1, 3), (2, 3)}
    assert res.pairwise_centers[(1, 2)] == pytest.approx(1.0, abs=0.05)
    # a pair is separated best near its own center, not at the overall center
    for p in res.pairwise_rates:
        assert res.pairwise_rates[p] <= res.overall_pair_rates[p] + 0.005
    with pytest.raises(ValueError):
        run_q_sensitivity(SimConfig(mus=(0, 1)))
