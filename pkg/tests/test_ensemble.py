import itertools
from collections import Counter
from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from bernoulli_ensembles.ensemble import (
    CanonicalSpec,
    CountTable,
    ParticleConfig,
    count,
    enumerate_class,
    exact_marginal,
    exact_occupancy,
    forced_count,
    mcmc_occupancy,
    one_point_marginals,
    sample_exact,
    sample_mcmc,
    staircase,
    verify_class_uniformity,
)
from bernoulli_ensembles.errors import CapExceeded, InfeasibleConstraint
from bernoulli_ensembles.profile import ProfileParams


@pytest.mark.parametrize("ell,K,M,expected", [(1, 1, 0, 1), (1, 2, 0, 1), (1, 1, 2, 0)])
def test_count_examples(ell, K, M, expected):
    assert count(CanonicalSpec(ell, K, M)) == expected


def test_count_table_total():
    assert CountTable(8).total() == 2**17


@pytest.mark.parametrize("ell", [1, 2, 3, 4])
def test_counts_match_enumeration(ell):
    n = 2 * ell + 1
    ks = range(-ell, ell + 1)
    brute = Counter(
        (sum(c), sum(k * x for k, x in zip(ks, c))) for c in itertools.product((0, 1), repeat=n)
    )
    table = CountTable(ell)
    for (K, M), c in brute.items():
        assert table.count(K, M) == c
        assert count(CanonicalSpec(ell, K, M)) == c


def test_feasibility_bound():
    spec = CanonicalSpec(3, 3, 6)  # sites 1, 2, 3
    assert spec.feasible and count(spec) == 1
    assert not CanonicalSpec(3, 3, 7).feasible


def test_from_macro_clamps():
    spec = CanonicalSpec.from_macro(10, 0.5, 0.2)
    assert spec.feasible
    assert 2 * abs(spec.M) == spec.K * spec.n - spec.K**2 or 2 * abs(spec.M) == spec.K * spec.n - spec.K**2 - 1


def test_config_roundtrip():
    c = ParticleConfig(2, (1, 0, 0, 1, 1))
    assert c.K == 3 and c.M == -2 + 1 + 2
    assert ParticleConfig.from_dict(c.to_dict()) == c
    assert c[-2] == 1 and c[0] == 0


def test_config_rejects_bad_entries():
    with pytest.raises(ValueError):
        ParticleConfig(1, (0, 2, 0))
    with pytest.raises(ValueError):
        ParticleConfig(1, (0, 1))


def test_unique_class_sampled():
    spec = CanonicalSpec(1, 1, 0)
    assert all(c.occupancy == (0, 1, 0) for c in sample_exact(spec, 0, 20))
    assert all(c.occupancy == (0, 1, 0) for c in sample_mcmc(spec, 0, 10, 20))


def test_samplers_conserve_K_and_M():
    spec = CanonicalSpec(12, 9, 7)
    for occ in (exact_occupancy(spec, 3, 50), mcmc_occupancy(spec, 3, 200, 50)):
        ks = np.arange(-12, 13)
        assert np.all(occ.sum(axis=1) == 9)
        assert np.all(occ @ ks == 7)


def test_infeasible_spec_raises():
    with pytest.raises(InfeasibleConstraint):
        sample_exact(CanonicalSpec(2, 2, 10), 0, 1)
    with pytest.raises(InfeasibleConstraint):
        mcmc_occupancy(CanonicalSpec(2, 2, 10), 0, 1, 1)


def test_exact_sampler_cap():
    with pytest.raises(CapExceeded):
        sample_exact(CanonicalSpec(81, 10, 0), 0, 1)


def test_staircase_is_in_class():
    for K, M in [(3, 0), (5, -4), (2, 5), (9, 0)]:
        spec = CanonicalSpec(5, K, M)
        occ = staircase(spec)
        assert occ.sum() == K and occ @ np.arange(-5, 6) == M


def _empirical_tv(occ, configs):
    counts = Counter(tuple(r) for r in occ.tolist())
    p = 1.0 / len(configs)
    return 0.5 * sum(abs(counts.get(c, 0) / len(occ) - p) for c in configs)


def test_exact_sampler_uniform():
    spec = CanonicalSpec(4, 3, 0)
    configs = enumerate_class(spec)
    assert len(configs) == count(spec) == 8
    occ = exact_occupancy(spec, 1, 100_000)
    freq = Counter(tuple(r) for r in occ.tolist())
    sigma = np.sqrt(100_000 * (1 / 8) * (7 / 8))
    for c in configs:
        assert abs(freq[c] - 100_000 / 8) < 4 * sigma


def test_mcmc_close_to_uniform():
    spec = CanonicalSpec(4, 4, 1)
    configs = enumerate_class(spec)
    occ = mcmc_occupancy(spec, 2, 50_000 * 5 + 1000, 50_000, burn_in=1000, thin=5)
    assert _empirical_tv(occ, configs) < 0.02


def test_samplers_deterministic():
    spec = CanonicalSpec(10, 7, 3)
    np.testing.assert_array_equal(exact_occupancy(spec, 5, 20), exact_occupancy(spec, 5, 20))
    np.testing.assert_array_equal(mcmc_occupancy(spec, 5, 100, 20), mcmc_occupancy(spec, 5, 100, 20))


def test_marginals_match_enumeration():
    spec = CanonicalSpec(4, 4, 2)
    configs = np.array(enumerate_class(spec))
    exact = one_point_marginals(spec)
    np.testing.assert_allclose(exact, configs.mean(axis=0), atol=1e-15)
    both = np.mean(configs[:, 0] * configs[:, 8])
    assert exact_marginal(spec, [(-4, 1), (4, 1)]) == Fraction(int(round(both * len(configs))), len(configs))


def test_unique_configuration_marginal():
    assert exact_marginal(CanonicalSpec(1, 1, 0), [(0, 1)]) == 1


def test_forced_counts_partition_the_class():
    spec = CanonicalSpec(6, 5, 3)
    total = count(spec)
    for k in (-6, 0, 6):
        assert forced_count(spec, {k: 0}) + forced_count(spec, {k: 1}) == total


def test_conflicting_constraints():
    with pytest.raises(InfeasibleConstraint):
        exact_marginal(CanonicalSpec(3, 2, 0), [(1, 0), (1, 1)])


def test_tilted_float_path_matches_exact():
    spec = CanonicalSpec.from_macro(20, 0.4, 0.03)
    for sites in ([(0, 1)], [(-20, 1), (20, 1)], [(5, 0), (-3, 1)]):
        exact = float(exact_marginal(spec, sites))
        approx = exact_marginal(spec, sites, cap=10)
        assert approx == pytest.approx(exact, rel=1e-10)


def test_uniformity_negative_control():
    # a non-logistic profile is not uniform on the classes
    assert verify_class_uniformity(3, lambda x: 0.2 + 0.6 * x * x) > 1e-3


@settings(max_examples=20, deadline=None)
@given(st.integers(1, 3), st.floats(0.05, 0.95), st.floats(-3, 3))
def test_class_uniformity_property(ell, a, b):
    assert verify_class_uniformity(ell, ProfileParams(a, b)) <= 1e-12


@settings(max_examples=30, deadline=None)
@given(st.integers(1, 6), st.data())
def test_count_symmetries(ell, data):
    n = 2 * ell + 1
    K = data.draw(st.integers(0, n))
    bound = (K * n - K * K) // 2
    M = data.draw(st.integers(-bound, bound))
    c = count(CanonicalSpec(ell, K, M))
    assert c == count(CanonicalSpec(ell, K, -M))
    assert c == count(CanonicalSpec(ell, n - K, -M))
    assert c >= 1
