import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from successhedge.errors import ArbitrageError, CapacityError, DomainError
from successhedge.lattice import LatticeParams, build_lattice, price, replicate


def test_one_step_probabilities(ul1_lattice):
    assert ul1_lattice.q == pytest.approx(1 / 3, abs=1e-15)
    up, down = ul1_lattice.paths()
    assert up.moves == "u" and down.moves == "d"
    assert (up.p, up.r) == pytest.approx((0.5, 1 / 3), abs=1e-15)
    assert (down.p, down.r) == pytest.approx((0.5, 2 / 3), abs=1e-15)
    assert up.prices == (100.0, 200.0)


def test_two_steps_normalised():
    lat = build_lattice(LatticeParams(100, 2, 0.5, 0, 2, 0.5))
    assert lat.n_paths == 4
    assert math.fsum(lat.p) == pytest.approx(1, abs=1e-12)
    assert math.fsum(lat.r) == pytest.approx(1, abs=1e-12)


def test_prices_are_discounted():
    lat = build_lattice(LatticeParams(100, 1.2, 0.9, 0.05, 2, 0.5))
    assert lat.path(0).prices[-1] == pytest.approx(100 * 1.2**2 / 1.05**2)


@pytest.mark.parametrize(
    "u, d, rho",
    [(1.1, 1.05, 0.0), (1.1, 0.9, 0.2), (1.0, 1.0, 0.0), (1.1, 0.0, 0.0)],
)
def test_arbitrage_rejected(u, d, rho):
    with pytest.raises(ArbitrageError):
        build_lattice(LatticeParams(100, u, d, rho, 1, 0.5))


@pytest.mark.parametrize("p_up", [0.0, 1.0, -0.1])
def test_physical_probability_domain(p_up):
    with pytest.raises(DomainError):
        build_lattice(LatticeParams(100, 2, 0.5, 0, 1, p_up))


def test_step_cap():
    with pytest.raises(CapacityError):
        build_lattice(LatticeParams(100, 2, 0.5, 0, 17, 0.5))
    assert build_lattice(LatticeParams(100, 2, 0.5, 0, 3, 0.5), max_steps=3).steps == 3


def test_price_examples(ul1_lattice):
    assert price(ul1_lattice, [1, 1]) == pytest.approx(1, abs=1e-15)
    assert price(ul1_lattice, [100, 0]) == pytest.approx(100 / 3, abs=1e-12)
    assert price(ul1_lattice, ul1_lattice.terminal_prices) == pytest.approx(100, abs=1e-12)
    with pytest.raises(DomainError):
        price(ul1_lattice, [-1, 0])


def test_replicate_one_step(ul1_lattice):
    s = replicate(ul1_lattice, [60, 0])
    # v0 + 100 xi = 60 and v0 - 50 xi = 0
    assert s.v0 == pytest.approx(20, abs=1e-12)
    assert s.positions[0][0] == pytest.approx(0.4, abs=1e-12)


def test_replicate_constant_and_stock():
    lat = build_lattice(LatticeParams(100, 1.3, 0.8, 0.02, 4, 0.55))
    s = replicate(lat, np.full(lat.n_paths, 7.0))
    assert s.v0 == pytest.approx(7, abs=1e-12)
    assert all(np.allclose(p, 0, atol=1e-12) for p in s.positions)
    s = replicate(lat, lat.terminal_prices)
    assert s.v0 == pytest.approx(100, abs=1e-10)
    assert all(np.allclose(p, 1, atol=1e-12) for p in s.positions)


lattices = st.builds(
    lambda n, up, down, rho, p: LatticeParams(100.0, (1 + rho) * up, (1 + rho) * down, rho, n, p),
    st.integers(1, 6),
    st.floats(1.01, 2.5),
    st.floats(0.3, 0.99),
    st.floats(0.0, 0.1),
    st.floats(0.05, 0.95),
)


@settings(max_examples=60, deadline=None)
@given(params=lattices, seed=st.integers(0, 2**31))
def test_replication_properties(params, seed):
    lat = build_lattice(params)
    rng = np.random.default_rng(seed)
    H = rng.uniform(0, 1000, lat.n_paths) * (rng.random(lat.n_paths) < 0.7)
    s = replicate(lat, H)
    scale = max(1.0, H.max())
    assert np.max(np.abs(s.rollforward(lat) - H)) <= 1e-9 * scale
    assert s.self_financing_gap(lat) <= 1e-12
    assert s.min_value() >= 0
    assert s.v0 == pytest.approx(price(lat, H), abs=1e-12 * scale)
    # node value equals the conditional risk-neutral expectation of H
    for t in range(lat.steps + 1):
        idx = lat.prefix_index(t)
        cond = np.bincount(idx, lat.r * H) / np.bincount(idx, lat.r)
        np.testing.assert_allclose(s.values[t], cond, rtol=1e-12, atol=1e-12 * scale)


@settings(max_examples=40, deadline=None)
@given(params=lattices, seed=st.integers(0, 2**31))
def test_price_is_linear(params, seed):
    lat = build_lattice(params)
    rng = np.random.default_rng(seed)
    h1, h2 = rng.uniform(0, 10, (2, lat.n_paths))
    assert price(lat, h1 + h2) == pytest.approx(price(lat, h1) + price(lat, h2), abs=1e-12)
    assert math.fsum(lat.p) == pytest.approx(1, abs=1e-12)
    assert math.fsum(lat.r) == pytest.approx(1, abs=1e-12)
