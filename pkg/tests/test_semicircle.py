import numpy as np
import pytest

from dbmlab.errors import DomainError
from dbmlab.semicircle import (
    cdf,
    density,
    rigidity_report,
    semicircle_quadrature,
    stieltjes,
    typical_locations,
)


def test_density_values():
    assert density(0.0) == pytest.approx(1.0 / np.pi, abs=1e-15)
    assert density(2.0) == 0.0
    assert density(-2.0) == 0.0
    assert density(1.0) == pytest.approx(np.sqrt(3.0) / (2.0 * np.pi), abs=1e-15)
    assert density(3.0) == 0.0
    assert np.all(density(np.linspace(-3, 3, 101)) >= 0.0)


def test_density_integrates_to_one():
    # module quadrature: the weights integrate rho to 1 exactly
    x, w = semicircle_quadrature(2000)
    assert np.sum(w) == 1.0
    # the quadrature agrees with an independently-derived rule: x = 2 cos t
    # maps the integral to (2/pi) int sin^2 t dt, midpoint rule
    t = (np.arange(4000) + 0.5) * np.pi / 4000
    mid = (2.0 / np.pi) * np.sin(t) ** 2 * (np.pi / 4000)
    assert abs(np.sum(mid) - 1.0) < 1e-10
    # trapezoid on the x grid converges slowly at the sqrt edges; loose check
    grid = np.linspace(-2, 2, 200001)
    assert np.trapezoid(density(grid), grid) == pytest.approx(1.0, abs=1e-7)


def test_stieltjes_branch():
    assert stieltjes(2j) == pytest.approx(1j * (1 - np.sqrt(2)), abs=1e-14)
    assert stieltjes(10.0 + 0j) == pytest.approx(5 - 2 * np.sqrt(6), abs=1e-13)


def test_stieltjes_self_consistency():
    rng = np.random.default_rng(0)
    z = rng.uniform(-3, 3, 50) + 1j * rng.uniform(0.01, 2, 50)
    m = stieltjes(z)
    assert np.max(np.abs(m * m - z * m + 1)) < 1e-12


def test_stieltjes_symmetries():
    z = np.array([0.5 + 0.3j, -1.2 + 2j, 1.9 + 0.05j])
    m = stieltjes(z)
    assert np.allclose(stieltjes(np.conj(z)), np.conj(m), rtol=0, atol=1e-15)
    assert np.all(m.imag * z.imag < 0)
    assert np.all(stieltjes(np.conj(z)).imag * (-z.imag) < 0)


def test_stieltjes_cut_rejected():
    with pytest.raises(DomainError):
        stieltjes(0.5 + 0j)
    with pytest.raises(DomainError):
        stieltjes(np.array([3 + 0j, 1.0 + 0j]))


def test_typical_locations_invariants():
    table = typical_locations(1000)
    g = table.gamma
    assert np.all(np.diff(g) > 0)
    assert np.all((g > -2) & (g < 2))
    q = (np.arange(1000) + 0.5) / 1000
    assert np.max(np.abs(cdf(g) - q)) < 1e-10
    assert np.max(np.abs(g + g[::-1])) < 1e-10


def test_typical_locations_median():
    table = typical_locations(5)
    assert table.gamma[2] == pytest.approx(0.0, abs=1e-12)


def test_typical_locations_edge_asymptotics():
    table = typical_locations(1000)
    k = 10
    predicted = (3 * np.pi * (k + 0.5) / (2 * 1000)) ** (2.0 / 3.0)
    ratio = (table.gamma[k] + 2.0) / predicted
    assert 0.5 <= ratio <= 2.0


def test_rigidity_exact_locations(table100):
    rep = rigidity_report(table100.gamma, table100, xi=0.3)
    assert rep.violations.size == 0
    assert rep.max_scaled_dev == 0.0


def test_rigidity_single_shift(table100):
    x = table100.gamma.copy()
    x[50] += 1.0
    rep = rigidity_report(x, table100, xi=0.3)
    assert 50 in rep.violations
    # scaled deviation 1/(N^(-2/3) ihat^(-1/3)) ~ 79 vs threshold N^0.3 ~ 4
    assert rep.max_scaled_dev > 50.0


def test_rigidity_length_mismatch(table100):
    with pytest.raises(DomainError):
        rigidity_report(np.zeros(99), table100, xi=0.3)


def test_quantile_csv_roundtrip(tmp_path, table100):
    path = tmp_path / "gamma.csv"
    table100.to_csv(path)
    rows = path.read_text().strip().splitlines()
    assert rows[0] == "index,gamma"
    assert len(rows) == 101
    vals = np.array([float(r.split(",")[1]) for r in rows[1:]])
    assert np.array_equal(vals, table100.gamma)
