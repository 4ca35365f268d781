import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from freeconv.convpow import (
    convpow_atom,
    convpow_density_table,
    convpow_moments,
    f_convpow,
    make_convpow,
    omega,
    omega_oracle_smallcase,
    rho_pair,
)
from freeconv.errors import DegenerateLaw, SubordinationMismatch
from freeconv.freeid import phi_eval
from freeconv.measures import free_cumulants, make_discrete, moments, moments_from_cumulants
from freeconv.transforms import cauchy_zeros, f_transform, self_energy

from conftest import random_base

BERN = make_discrete([(-1, 0.5), (1, 0.5)])
SKEW = make_discrete([(0, 0.8), (1, 0.2)])


def test_rho_pair_examples():
    p = rho_pair(BERN, 2)
    assert p.gamma == pytest.approx(0, abs=1e-15) and p.sigma.nodes == [(0.0, pytest.approx(1.0))]
    p = rho_pair(BERN, 5)
    assert p.sigma.nodes == [(0.0, pytest.approx(4.0))]
    p = rho_pair(SKEW, 2)
    (t, w), = p.sigma.nodes
    assert 0 < t < 1 and t == pytest.approx(cauchy_zeros(SKEW)[0], abs=0)
    cp = make_convpow(SKEW, 2)
    z = np.array([1j, 0.5 + 0.3j, -2 + 1j, 3 + 0.01j, 0.2 + 4j])
    assert np.max(np.abs(phi_eval(cp.rho, z) - self_energy(SKEW, z))) < 1e-12
    with pytest.raises(DegenerateLaw):
        rho_pair(make_discrete([(1, 1)]), 3)


def test_omega_examples():
    cp = make_convpow(BERN, 2)
    assert abs(omega(cp, 0.0, boundary=True) - 1j) < 1e-14
    assert abs(omega(cp, 2j) - 1j * (1 + math.sqrt(2))) < 1e-12
    cp = make_convpow(SKEW, 3)
    for y in (1e3, 1e4):
        assert abs(omega(cp, 1j * y) / (1j * y) - 1) < 1e-2


def test_f_convpow_examples():
    cp = make_convpow(BERN, 2)
    assert abs(f_convpow(cp, 0.0, boundary=True) - 2j) < 1e-14
    assert abs(omega(cp, 1.0, boundary=True) - complex(0.5, math.sqrt(3) / 2)) < 1e-14
    assert abs(f_convpow(cp, 1.0, boundary=True) - 1j * math.sqrt(3)) < 1e-14


def test_oracle_examples():
    assert abs(omega_oracle_smallcase(BERN, 2, 0) - 1j) < 1e-15
    assert abs(omega_oracle_smallcase(BERN, 2, 1) - complex(0.5, math.sqrt(3) / 2)) < 1e-15
    with pytest.raises(DegenerateLaw):
        omega_oracle_smallcase(make_discrete([(2, 1)]), 2, 1j)


def test_arcsine_table():
    cp = make_convpow(BERN, 2)
    t = np.linspace(-1.4, 1.4, 201)
    tab = convpow_density_table(cp, t)
    assert tab.atom is None
    assert np.max(np.abs(tab.values - 1 / (math.pi * np.sqrt(4 - t**2)))) < 1e-9
    oracle = np.array([omega_oracle_smallcase(BERN, 2, ti) for ti in t])
    f = 2 * oracle - t
    assert np.max(np.abs(tab.values - f.imag / (math.pi * np.abs(f) ** 2))) < 1e-9


def test_atom_examples():
    loc, mass = convpow_atom(make_convpow(SKEW, 2))
    assert loc == pytest.approx(0, abs=1e-12) and mass == pytest.approx(0.6, abs=1e-6)
    assert convpow_atom(make_convpow(BERN, 2)) is None
    assert convpow_atom(make_convpow(make_discrete([(0, 0.5), (1, 0.5)]), 2)) is None
    # exactly at the threshold k p = k - 1
    assert convpow_atom(make_convpow(SKEW, 5)) is None


def test_omega_on_atom_raises():
    # omega(t) meets the atom 0 exactly at t = 0 when there is an atom there
    cp = make_convpow(SKEW, 2)
    with pytest.raises(SubordinationMismatch):
        f_convpow(cp, 0.0, boundary=True)


def test_known_atom_identity(rng):
    for _ in range(20):
        k = int(rng.choice([2, 3, 5]))
        m = int(rng.integers(2, 4))
        x = np.sort(rng.uniform(-2, 2, m))
        p_big = rng.uniform(0.4, 0.98)
        rest = rng.dirichlet(np.ones(m - 1)) * (1 - p_big)
        j = int(rng.integers(m))
        p = np.insert(rest, j, p_big)
        mu = make_discrete(zip(x, p))
        atom = convpow_atom(make_convpow(mu, k))
        expected = max(k * p_big - (k - 1), 0)
        got = atom[1] if atom else 0.0
        assert abs(got - expected) < 1e-6
        if atom:
            assert atom[0] == pytest.approx(k * x[j], abs=1e-9)


def test_atom_mass_consistency():
    cp = make_convpow(make_discrete([(-1, 0.1), (0.5, 0.85), (2, 0.05)]), 3)
    atom = convpow_atom(cp)
    assert atom is not None
    grid = np.linspace(-6, 9, 30001)
    tab = convpow_density_table(cp, grid, zero_radius=1e-9)
    assert 1 - 1e-4 <= tab.mass() + atom[1] <= 1 + 1e-6


@pytest.mark.parametrize("k", [2, 3, 17])
def test_scaled_bernoulli_is_near_semicircle(k):
    base = make_discrete([(-1 / math.sqrt(k), 0.5), (1 / math.sqrt(k), 0.5)])
    cp = make_convpow(base, k)
    t = np.linspace(-1.5, 1.5, 61)
    tab = convpow_density_table(cp, t)
    # k = 2 sits at the atom threshold: F vanishes at the edges +-sqrt(2), which are auto-excluded
    assert np.all(tab.values[tab.included] >= 0)
    assert (tab.excluded is not None) == (k == 2)
    if k == 17:
        assert np.max(np.abs(tab.values - np.sqrt(4 - t**2) / (2 * math.pi))) < 0.05


@settings(max_examples=25, deadline=None)
@given(st.integers(0, 10**6), st.sampled_from([2, 3, 5, 17]))
def test_subordination_and_oracle(seed, k):
    rng = np.random.default_rng(seed)
    mu = random_base(rng, 3)
    cp = make_convpow(mu, k)
    w = rng.uniform(-4, 4, 100) + 1j * 10 ** rng.uniform(-3, 1, 100)
    om = omega(cp, w)
    f = f_convpow(cp, w)
    assert np.max(np.abs(f - f_transform(mu, om))) < 1e-9 * (1 + np.max(np.abs(f)))
    oracle = np.array([omega_oracle_smallcase(mu, k, wi) for wi in w])
    assert np.max(np.abs(om - oracle)) < 1e-10
    # inverse relation
    assert np.max(np.abs(om + (k - 1) * (om - f_transform(mu, om)) - w)) < 1e-9


@settings(max_examples=15, deadline=None)
@given(st.integers(0, 10**6), st.sampled_from([2, 3, 5]))
def test_moment_oracle(seed, k):
    mu = random_base(np.random.default_rng(seed), 3)
    cp = make_convpow(mu, k)
    expected = moments_from_cumulants(k * free_cumulants(moments(mu, 8)))
    got = convpow_moments(cp, 8)
    assert np.max(np.abs(got - expected.astype(float))) < 1e-6
