import json
import math

import numpy as np
import pytest

from freeconv.convpow import convpow_density_table, convpow_moments, make_convpow, omega_oracle_smallcase
from freeconv.errors import (
    CutoffTooSmall,
    GridMismatch,
    InvalidExponent,
    MissingExclusion,
    RowUnavailable,
    TargetRequired,
    ZeroJump,
)
from freeconv.freeid import density_table, marchenko_pastur, semicircle
from freeconv.measures import free_cumulants, make_discrete, moments, moments_from_cumulants
from freeconv.superconv import (
    Custom,
    FreeCLT,
    FreePoisson,
    lp_distance,
    run,
    scheme_row,
    sup_distance,
    tail_bound,
    target_of,
)

BERN = make_discrete([(-1, 0.5), (1, 0.5)])
DELTA1 = make_discrete([(1, 1)])
CLT = FreeCLT(BERN)
POISSON = FreePoisson(1.0, DELTA1)


@pytest.fixture(scope="module")
def clt_report():
    return run(CLT, None, [4, 16, 64, 256], np.linspace(-1.9, 1.9, 801))


@pytest.fixture(scope="module")
def poisson_report():
    return run(POISSON, None, [8, 32, 128], np.linspace(0.2, 3.8, 801), (-0.1, 0.1))


def test_scheme_rows():
    mu, k = scheme_row(CLT, 4)
    assert k == 4 and mu.atoms == [(-0.5, 0.5), (0.5, 0.5)]
    mu, k = scheme_row(POISSON, 8)
    assert k == 8 and mu.atoms == [(0.0, 7 / 8), (1.0, 1 / 8)]
    with pytest.raises(RowUnavailable):
        scheme_row(FreePoisson(2.0, DELTA1), 2)
    custom = Custom(((BERN, 2), (BERN.scaled(0.5), 4)))
    assert scheme_row(custom, 2) == (BERN.scaled(0.5), 4)
    with pytest.raises(RowUnavailable):
        scheme_row(custom, 3)


def test_scheme_validation():
    with pytest.raises(ValueError):
        FreeCLT(make_discrete([(0, 0.5), (1, 0.5)]))
    with pytest.raises(ValueError):
        FreeCLT(make_discrete([(-2, 0.5), (2, 0.5)]))
    with pytest.raises(ZeroJump):
        FreePoisson(1.0, make_discrete([(0, 1)]))
    with pytest.raises(ValueError):
        Custom(((BERN, 4), (BERN, 4)))


def test_targets():
    sc = target_of(CLT)
    assert sc.phi.gamma == 0 and sc.phi.sigma.nodes == [(0.0, 1.0)]
    mp = target_of(POISSON)
    assert mp.phi.gamma == 0.5 and mp.phi.sigma.nodes == [(1.0, 0.5)]
    with pytest.raises(TargetRequired):
        target_of(Custom(((BERN, 2),)))


def _sc_exact(t):
    return np.sqrt(np.clip(4 - t**2, 0, None)) / (2 * math.pi)


def _mp1_exact(t):
    out = np.zeros_like(t)
    inside = (t > 0) & (t < 4)
    out[inside] = np.sqrt(4 - (t[inside] - 2) ** 2) / (2 * math.pi * t[inside])
    return out


def test_lp_distance():
    grid = np.linspace(0.1, 3.9, 2001)
    a = density_table(semicircle(), grid)
    b = density_table(marchenko_pastur(1.0), grid)
    assert lp_distance(a, a, 2) == 0
    with pytest.raises(InvalidExponent):
        lp_distance(a, b, 1.0)
    with pytest.raises(GridMismatch):
        lp_distance(a, density_table(semicircle(), grid[:-1]), 2)
    got = lp_distance(a, b, 2)
    diff2 = (_sc_exact(grid) - _mp1_exact(grid)) ** 2
    oracle = math.sqrt(float(np.sum(0.5 * (diff2[1:] + diff2[:-1]) * np.diff(grid))))
    assert got > 0 and abs(got - oracle) < 1e-9
    assert sup_distance(a, b) == pytest.approx(np.max(np.abs(_sc_exact(grid) - _mp1_exact(grid))), abs=1e-9)


def test_lp_distance_respects_exclusion():
    grid = np.linspace(-1, 1, 201)
    a = density_table(semicircle(), grid)
    b = density_table(semicircle(), grid, None)
    bumped = type(b)(b.grid, np.where(np.abs(grid) < 0.2, b.values + 1, b.values))
    assert lp_distance(a, bumped, 2, (-0.3, 0.3)) == 0
    assert lp_distance(a, bumped, 2) > 0


def test_tail_bound():
    assert tail_bound(2, 7 / math.pi) == pytest.approx(2 * 7 / math.pi)
    assert tail_bound(2, math.inf) == 0
    assert tail_bound(2, 1e12) < 1e-11
    with pytest.raises(InvalidExponent):
        tail_bound(1.0, 10)
    with pytest.raises(CutoffTooSmall):
        tail_bound(2, 5, abs_f_i=1.0)
    # the bound dominates the actual tail of the Cauchy law
    M = 20.0
    tail = 2 * (1 / math.pi**2) * (M / (2 * (1 + M * M)) + 0.5 * (math.pi / 2 - math.atan(M)))
    assert tail <= tail_bound(2, M, abs_f_i=1.0)


def test_clt_report(clt_report):
    sup = clt_report.column("sup_error")
    assert np.all(np.isfinite(sup)) and np.all(sup >= 0)
    assert np.all(np.diff(sup) < 0)
    assert sup[-1] < sup[0] / 4
    lp = [r.lp_errors[2.0] for r in clt_report.rows]
    assert lp[-1] < lp[0]
    assert clt_report.column("rho_diag")[-1] < clt_report.column("rho_diag")[0]
    # k E_{mu_n}(z) = k (1/k)/z = 1/z = phi_nu(z) exactly for the Bernoulli array
    assert np.max(clt_report.column("phi_diag")) < 1e-15
    assert np.max(clt_report.column("boolean_diag")) < 1e-14


def test_poisson_report(poisson_report):
    for name in ("sup_error", "rho_diag", "phi_diag", "boolean_diag"):
        col = poisson_report.column(name)
        assert np.all(np.isfinite(col)) and col[-1] < col[0]
    lp = [r.lp_errors[2.0] for r in poisson_report.rows]
    assert lp[-1] < lp[0]
    rep = poisson_report.target_atoms
    assert rep.L == 1 and rep.t_nu == 0 and rep.atom_mass == 0
    np.testing.assert_allclose(poisson_report.column("phi_diag"), poisson_report.column("boolean_diag"), rtol=1e-9)


@pytest.mark.parametrize("scheme,n", [(CLT, 4), (CLT, 64), (CLT, 256), (POISSON, 8), (POISSON, 128)])
def test_rows_match_oracle(scheme, n):
    mu, k = scheme_row(scheme, n)
    cp = make_convpow(mu, k)
    grid = np.linspace(-1.9, 1.9, 41) if scheme is CLT else np.linspace(0.2, 3.8, 41)
    tab = convpow_density_table(cp, grid, None)
    om = np.array([omega_oracle_smallcase(mu, k, t) for t in grid])
    f = om + (om - grid) / (k - 1)
    oracle = f.imag / (math.pi * np.abs(f) ** 2)
    assert np.max(np.abs(tab.values - oracle)) < 1e-9


@pytest.mark.parametrize("scheme,n", [(CLT, 4), (CLT, 16), (CLT, 256), (POISSON, 8), (POISSON, 32), (POISSON, 128)])
def test_rows_pass_moment_oracle(scheme, n):
    mu, k = scheme_row(scheme, n)
    expected = moments_from_cumulants(k * free_cumulants(moments(mu, 8))).astype(float)
    assert np.max(np.abs(convpow_moments(make_convpow(mu, k), 8) - expected)) < 1e-6


def test_missing_exclusion():
    with pytest.raises(MissingExclusion):
        run(FreePoisson(0.5, DELTA1), None, [8], np.linspace(0.2, 3, 11))
    with pytest.raises(MissingExclusion):
        run(POISSON, None, [8], np.linspace(0.2, 3, 11), (0.1, 0.2))


def test_report_json(poisson_report):
    data = json.loads(json.dumps(poisson_report.to_dict()))
    assert set(data) >= {"scheme", "target", "grid", "excluded", "rows"}
    assert data["grid"] == {"lo": 0.2, "hi": 3.8, "n": 801}
    assert data["excluded"] == [-0.1, 0.1]
    row = data["rows"][0]
    assert set(row) == {"n", "k", "sup_error", "lp", "rho_diag", "phi_diag", "boolean_diag"}
    assert set(row["lp"]) == {"2"}


def test_custom_scheme_with_target():
    rows = tuple(scheme_row(CLT, n) for n in (4, 16))
    rep = run(Custom(rows), semicircle(), [1, 2], np.linspace(-1.5, 1.5, 101), p_list=[2, 3])
    assert rep.rows[1].sup_error < rep.rows[0].sup_error
    assert set(rep.rows[0].lp_errors) == {2.0, 3.0}
