import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from dbmlab.ensembles import EnsembleSpec, eigenvalues, sample_generalized_wigner
from dbmlab.errors import ConfigurationError, DomainError
from dbmlab.semicircle import typical_locations
from dbmlab.stats import (
    LinearStatistic,
    characteristic_fn,
    characteristic_fn_from_values,
    clt_parameters,
    counting,
    cutoff_profile,
    fourier_cutoff,
    gap_statistics,
    linear_statistic,
    loop_equation_residual,
    loop_residual_from_samples,
    moment_match_check,
    product_observable,
    q_sum,
    q_sum_bruteforce,
    repulsion_fit,
    universality_compare,
)


def _f_identity():
    return LinearStatistic(
        f=lambda x: np.asarray(x, dtype=np.float64),
        df=lambda x: np.ones_like(np.asarray(x, dtype=np.float64)),
        d2f=lambda x: np.zeros_like(np.asarray(x, dtype=np.float64)),
        support=(-4.0, 4.0),
        name="x",
    )


def _f_square():
    return LinearStatistic(
        f=lambda x: np.asarray(x, dtype=np.float64) ** 2,
        df=lambda x: 2.0 * np.asarray(x, dtype=np.float64),
        d2f=lambda x: np.full_like(np.asarray(x, dtype=np.float64), 2.0),
        support=(-4.0, 4.0),
        name="x^2",
    )


def _f_const(c=1.0):
    return LinearStatistic(
        f=lambda x, c=c: np.full_like(np.asarray(x, dtype=np.float64), c),
        df=lambda x: np.zeros_like(np.asarray(x, dtype=np.float64)),
        d2f=lambda x: np.zeros_like(np.asarray(x, dtype=np.float64)),
        support=(-4.0, 4.0),
        name="const",
    )


def _gaussian_window_observable(width_x=2.0, width_y=3.0):
    fx = lambda x: np.exp(-0.5 * (np.asarray(x, dtype=np.float64) / width_x) ** 2)
    fy = lambda y: np.clip(1.0 - (np.asarray(y, dtype=np.float64) / width_y) ** 2, 0.0, None) ** 2
    return product_observable(fx, fy, l_y=width_y)


# --- pair sums ----------------------------------------------------------------


def test_q_sum_zero_observable():
    obs = product_observable(lambda x: np.zeros_like(np.asarray(x, dtype=float)),
                             lambda y: np.zeros_like(np.asarray(y, dtype=float)), l_y=2.0)
    assert q_sum(np.linspace(-1, 1, 20), 0.0, obs) == 0.0


def test_q_sum_single_term():
    # an isolated eigenvalue at E and nothing nearby: only the (i, i) term
    obs = _gaussian_window_observable(width_x=0.5, width_y=1.0)
    x = np.array([-1.5, -1.0, 0.0, 1.0, 1.5])
    val = q_sum(x, 0.0, obs)
    assert val == pytest.approx(1.0, abs=1e-4)  # Q(0,0) = 1 dominates


@settings(max_examples=25, deadline=None)
@given(st.lists(st.floats(-1.9, 1.9), min_size=2, max_size=40), st.floats(-1.5, 1.5))
def test_q_sum_equals_bruteforce(values, e_ref):
    x = np.sort(np.asarray(values))
    obs = _gaussian_window_observable()
    assert q_sum(x, e_ref, obs) == pytest.approx(q_sum_bruteforce(x, e_ref, obs), abs=1e-12)


def test_q_sum_bandlimited_equals_bruteforce(rng):
    base = _gaussian_window_observable()
    obs = fourier_cutoff(base, 2.0)
    x = np.sort(rng.uniform(-1.9, 1.9, 50))
    assert q_sum(x, 0.2, obs) == pytest.approx(q_sum_bruteforce(x, 0.2, obs), rel=1e-12)


def test_counting_example():
    n = 3
    x = np.array([0.0, 1.0 / n, 5.0 / n])
    assert counting(x, 0.0, 1.0, 1.0) == 4


def test_counting_empty_window():
    assert counting(np.array([1.0, 1.5]), -1.0, 0.5, 0.5) == 0


@settings(max_examples=25, deadline=None)
@given(st.floats(0.1, 3.0), st.floats(0.1, 3.0), st.floats(1.1, 2.0))
def test_counting_monotone(s1, s2, factor):
    x = np.sort(np.random.default_rng(0).uniform(-2, 2, 60))
    base = counting(x, 0.3, s1, s2)
    assert counting(x, 0.3, s1 * factor, s2) >= base
    assert counting(x, 0.3, s1, s2 * factor) >= base


def test_counting_rejects_bad_window():
    with pytest.raises(DomainError):
        counting(np.array([0.0]), 0.0, 0.0, 1.0)


# --- gaps ---------------------------------------------------------------------


def test_gap_statistics_exact_quantiles(table100):
    hist = gap_statistics([table100.gamma], table100, 0.1)
    assert hist.mean == pytest.approx(1.0, abs=0.05)
    assert np.sum(hist.mass) == pytest.approx(1.0, abs=1e-12)


def test_gap_statistics_goe_mean():
    n = 200
    table = typical_locations(n)
    rng = np.random.default_rng(4)
    spec = EnsembleSpec(n=n, kind="goe")
    samples = [eigenvalues(sample_generalized_wigner(spec, rng)).values for _ in range(60)]
    hist = gap_statistics(samples, table, 0.1)
    assert hist.mean == pytest.approx(1.0, abs=0.02)


def test_gap_statistics_needs_samples(table100):
    with pytest.raises(DomainError):
        gap_statistics([], table100, 0.1)


# --- level repulsion -------------------------------------------------------------


def test_repulsion_deterministic_gap():
    gaps = np.full(2000, 10.0 / 100)
    rep = repulsion_fit(gaps, 100, np.array([0.1, 0.5, 2.0]))
    assert np.all(rep.prob == 0.0)
    assert np.all(rep.excluded)
    assert np.isnan(rep.slope)


def test_repulsion_monotone_probabilities(rng):
    gaps = np.abs(rng.standard_normal(3000)) / 200
    rep = repulsion_fit(gaps, 200, np.array([0.05, 0.1, 0.2, 0.4]))
    assert np.all(np.diff(rep.prob) >= 0)
    assert np.all(rep.ci_low <= rep.prob) and np.all(rep.prob <= rep.ci_high)


def test_level_repulsion_probe_needs_samples(table100):
    from dbmlab.stats import level_repulsion_probe

    with pytest.raises(ConfigurationError):
        level_repulsion_probe([table100.gamma] * 10, table100, 50, [0.1, 0.2])


# --- linear statistics --------------------------------------------------------------


def test_linear_statistic_constant_exact(rng):
    one = _f_const(1.0)
    other = _f_const(3.3)
    for _ in range(5):
        x = np.sort(rng.uniform(-2, 2, 37))
        assert linear_statistic(x, one) == 0.0  # exact for f == 1
        assert abs(linear_statistic(x, other)) < 1e-12


def test_linear_statistic_identity_is_trace(rng):
    h = sample_generalized_wigner(EnsembleSpec(n=50, kind="goe"), rng)
    lam = eigenvalues(h).values
    assert linear_statistic(lam, _f_identity()) == pytest.approx(np.trace(h.array), abs=1e-10)


def test_clt_parameters_identity():
    p = clt_parameters(_f_identity(), beta=1.0, n=400)
    assert p.sigma2 == pytest.approx(2.0, abs=1e-4)
    assert p.delta == pytest.approx(0.0, abs=1e-12)
    assert p.eps_f == pytest.approx(1.0)


def test_clt_parameters_square():
    p = clt_parameters(_f_square(), beta=1.0, n=400)
    assert p.delta == pytest.approx(1.0, abs=1e-10)
    assert p.sigma2 == pytest.approx(4.0, abs=1e-8)


def test_clt_parameters_constant():
    p = clt_parameters(_f_const(), beta=1.0, n=400)
    assert p.sigma2 == pytest.approx(0.0, abs=1e-12)
    assert p.delta == pytest.approx(0.0, abs=1e-12)
    assert p.eps_f == 1.0


def test_clt_sigma2_shift_and_reflection_invariance():
    base = clt_parameters(_f_square(), beta=1.0, n=100).sigma2
    shifted = LinearStatistic(
        f=lambda x: np.asarray(x, dtype=np.float64) ** 2 + 5.0,
        df=lambda x: 2.0 * np.asarray(x, dtype=np.float64),
        d2f=lambda x: np.full_like(np.asarray(x, dtype=np.float64), 2.0),
        support=(-4.0, 4.0),
    )
    assert clt_parameters(shifted, beta=1.0, n=100).sigma2 == pytest.approx(base, abs=1e-10)
    odd = LinearStatistic(
        f=lambda x: np.asarray(x, dtype=np.float64) ** 3,
        df=lambda x: 3.0 * np.asarray(x, dtype=np.float64) ** 2,
        d2f=lambda x: 6.0 * np.asarray(x, dtype=np.float64),
        support=(-4.0, 4.0),
    )
    reflected = LinearStatistic(
        f=lambda x: -np.asarray(x, dtype=np.float64) ** 3,
        df=lambda x: -3.0 * np.asarray(x, dtype=np.float64) ** 2,
        d2f=lambda x: -6.0 * np.asarray(x, dtype=np.float64),
        support=(-4.0, 4.0),
    )
    assert clt_parameters(odd, beta=1.0, n=100).sigma2 == pytest.approx(
        clt_parameters(reflected, beta=1.0, n=100).sigma2, abs=1e-10
    )


def test_delta_linear_in_f():
    pa = clt_parameters(_f_square(), beta=1.0, n=100).delta
    pb = clt_parameters(_f_const(1.0), beta=1.0, n=100).delta
    combo = LinearStatistic(
        f=lambda x: 2.0 * np.asarray(x, dtype=np.float64) ** 2 + 3.0,
        df=lambda x: 4.0 * np.asarray(x, dtype=np.float64),
        d2f=lambda x: np.full_like(np.asarray(x, dtype=np.float64), 4.0),
        support=(-4.0, 4.0),
    )
    assert clt_parameters(combo, beta=1.0, n=100).delta == pytest.approx(
        2 * pa + 3 * pb, abs=1e-10
    )


def test_linear_statistic_df_validated():
    with pytest.raises(ConfigurationError):
        LinearStatistic(
            f=lambda x: np.asarray(x, dtype=np.float64) ** 2,
            df=lambda x: np.ones_like(np.asarray(x, dtype=np.float64)),  # wrong
            d2f=lambda x: np.zeros_like(np.asarray(x, dtype=np.float64)),
            support=(-4.0, 4.0),
        )


# --- characteristic function -----------------------------------------------------------


def test_characteristic_fn_at_zero(rng):
    vals = rng.standard_normal(500)
    _, z, se = characteristic_fn_from_values(vals, [0.0])
    assert z[0] == 1.0
    assert se[0] == 0.0


def test_characteristic_fn_hermitian(rng):
    vals = rng.standard_normal(400)
    _, zp, _ = characteristic_fn_from_values(vals, [0.7])
    _, zm, _ = characteristic_fn_from_values(vals, [-0.7])
    assert zm[0] == np.conj(zp[0])
    assert abs(zp[0]) <= 1.0


def test_characteristic_fn_gaussian(rng):
    vals = rng.standard_normal(4000) * np.sqrt(2.0)
    lam, z, se = characteristic_fn_from_values(vals, [1.0])
    assert abs(z[0] - np.exp(-1.0)) < 0.05


def test_characteristic_fn_requires_samples(table100):
    with pytest.raises(ConfigurationError):
        characteristic_fn([table100.gamma] * 10, _f_identity(), [1.0])


def test_characteristic_fn_on_spectra():
    rng = np.random.default_rng(12)
    spec = EnsembleSpec(n=30, kind="goe")
    samples = [eigenvalues(sample_generalized_wigner(spec, rng)) for _ in range(120)]
    lam, z, se = characteristic_fn(samples, _f_identity(), [0.0, 0.8])
    assert z[0] == 1.0
    assert abs(z[1]) <= 1.0 and se[1] > 0


# --- loop equation ------------------------------------------------------------------


def test_loop_equation_exact_n1_oracle():
    # the N=1 beta-ensemble is an explicit Gaussian; adaptive quadrature
    # makes the residual vanish to near machine precision, pinning the
    # + sign of the variance term
    from scipy.integrate import quad

    from dbmlab.semicircle import stieltjes

    def gauss_expect(fn, sd):
        re = quad(lambda y: fn(y).real * np.exp(-y * y / (2 * sd * sd)),
                  -np.inf, np.inf, limit=300)[0]
        im = quad(lambda y: fn(y).imag * np.exp(-y * y / (2 * sd * sd)),
                  -np.inf, np.inf, limit=300)[0]
        return (re + 1j * im) / (sd * np.sqrt(2 * np.pi))

    for beta in (1.0, 2.0):
        sd = np.sqrt(2.0 / beta)
        z = 0.4 + 0.8j
        m_exact = gauss_expect(lambda y: 1.0 / (z - y), sd)
        s2 = gauss_expect(lambda y: 1.0 / (z - y) ** 2, sd)
        var_exact = s2 - m_exact**2
        m_prime_exact = -s2
        m = stieltjes(z)
        root = np.sqrt(z - 2 + 0j) * np.sqrt(z + 2 + 0j)
        res = (m_exact - m) ** 2 - root * (m_exact - m) - (2 / beta - 1) * m_prime_exact + var_exact
        assert abs(res) < 1e-10
        wrong_sign = (m_exact - m) ** 2 - root * (m_exact - m) - (2 / beta - 1) * m_prime_exact - var_exact
        assert abs(wrong_sign) > 1e-2


def test_loop_equation_goe_monte_carlo():
    n = 60
    rng = np.random.default_rng(21)
    spec = EnsembleSpec(n=n, kind="goe")
    samples = [eigenvalues(sample_generalized_wigner(spec, rng)) for _ in range(3000)]
    rep = loop_equation_residual(samples, 0.2 + 0.4j, beta=1.0)
    assert abs(rep.residual) <= 4.0 * rep.stderr
    assert not rep.precision_warning


def test_loop_equation_domain():
    with pytest.raises(DomainError):
        loop_equation_residual([np.array([0.0, 1.0])], 0.2 - 0.1j, 1.0)
    with pytest.raises(DomainError):
        loop_equation_residual([np.array([0.0, 1.0])], 2.5 + 0.1j, 1.0)


# --- band-limiting ---------------------------------------------------------------------


def test_cutoff_profile_shape():
    p = np.linspace(-1.5, 1.5, 301)
    q = cutoff_profile(p)
    assert np.all(q[np.abs(p) <= 0.5] == 1.0)
    assert np.all(q[np.abs(p) >= 1.0] == 0.0)
    pos = p[p > 0]
    assert np.all(np.diff(cutoff_profile(pos)) <= 1e-12)


def test_fourier_cutoff_bandlimited_passthrough():
    # already band-limited to [-m/2, m/2]: the cutoff changes nothing
    fx = lambda x: np.sinc(np.asarray(x, dtype=np.float64) / (2 * np.pi) * 1.0) ** 2
    # sinc^2(ax/pi-ish): Fourier support [-1, 1] for this scaling
    fy = lambda y: np.clip(1.0 - (np.asarray(y, dtype=np.float64) / 3.0) ** 2, 0.0, None)
    base = product_observable(fx, fy, l_y=3.0)
    cut = fourier_cutoff(base, 2.0)
    xs = np.linspace(-20, 20, 401)
    assert np.max(np.abs(cut.q(xs, np.zeros_like(xs)) - base.q(xs, np.zeros_like(xs)))) < 1e-6


def test_fourier_cutoff_rate():
    # a compactly-supported bump at the W^{2,inf} regularity edge (second
    # derivative jumps at the support ends), where the 1/m envelope is the
    # operative rate; smoother observables decay faster
    fx = lambda x: np.clip(1.0 - (np.asarray(x, dtype=np.float64) / 3.0) ** 2, 0.0, None) ** 2
    fy = lambda y: np.clip(1.0 - (np.asarray(y, dtype=np.float64) / 3.0) ** 2, 0.0, None) ** 2
    base = product_observable(fx, fy, l_y=3.0, x_support=3.0)
    xs = np.linspace(-30, 30, 1201)
    ys = np.zeros_like(xs)
    errs = {}
    for m in (2.0, 4.0):
        cut = fourier_cutoff(base, m)
        errs[m] = np.max((1 + xs**2) * np.abs(cut.q(xs, ys) - base.q(xs, ys)))
    ratio = errs[2.0] / errs[4.0]
    assert 1.5 <= ratio <= 8.0
    # the 1/m envelope holds with one constant across the scan
    c = max(errs[m] * m for m in errs)
    assert all(errs[m] <= 1.0001 * c / m for m in errs)


def test_fourier_cutoff_preserves_y_support(rng):
    base = _gaussian_window_observable(width_y=3.0)
    cut = fourier_cutoff(base, 2.0)
    y = np.array([3.2, -4.0, 5.0])
    assert np.all(cut.q(np.zeros(3), y) == 0.0)
    with pytest.raises(DomainError):
        fourier_cutoff(base, 0.0)


# --- moment matching ----------------------------------------------------------------------


def test_moment_match_identical(rng):
    a = rng.standard_normal(20000)
    rep = moment_match_check(a, a.copy(), delta=0.5, n=100)
    assert np.all(np.abs(rep.diff) <= 1e-12)


def test_moment_match_bernoulli_vs_normal(rng):
    a = rng.choice([-1.0, 1.0], size=400000)
    b = rng.standard_normal(400000)
    rep = moment_match_check(a, b, delta=0.5, n=100)
    assert abs(rep.diff[0]) < 0.02 and abs(rep.diff[1]) < 0.02 and abs(rep.diff[2]) < 0.05
    assert rep.diff[3] == pytest.approx(-2.0, abs=0.15)  # 1 - 3 kurtosis mismatch
    assert np.all(np.diff(rep.threshold) > 0)  # threshold loosens with order


def test_moment_match_threshold_tightens_with_n(rng):
    a = rng.standard_normal(100)
    r1 = moment_match_check(a, a, delta=0.5, n=100)
    r2 = moment_match_check(a, a, delta=0.5, n=400)
    assert np.all(r2.threshold < r1.threshold)


# --- universality comparison ----------------------------------------------------------------


def test_universality_same_ensemble_zscore():
    obs = _gaussian_window_observable()
    spec = EnsembleSpec(n=60, kind="goe")
    rep = universality_compare(spec, spec, 0.2, 0.0, obs, 400, np.random.default_rng(3))
    assert abs(rep.z_score) <= 3.5
    assert rep.stderr > 0


def test_universality_rejects_bad_energy():
    spec = EnsembleSpec(n=10, kind="goe")
    obs = _gaussian_window_observable()
    with pytest.raises(DomainError):
        universality_compare(spec, spec, 2.5, 0.0, obs, 10, np.random.default_rng(0))
