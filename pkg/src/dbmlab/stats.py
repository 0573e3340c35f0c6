"""Empirical eigenvalue statistics: pair-correlation sums, counting, gaps,
level repulsion, linear statistics with their Gaussian-limit functionals,
characteristic functions, loop-equation residuals, band-limited observables
and ensemble-vs-ensemble comparisons.
"""

from dataclasses import dataclass, field

import numpy as np
from scipy.interpolate import CubicSpline, RegularGridInterpolator

from .ensembles import eigenvalues, matrix_flow, sample_generalized_wigner
from .errors import ConfigurationError, DomainError
from .semicircle import density, stieltjes, semicircle_quadrature

__all__ = [
    "LinearStatistic",
    "CltParameters",
    "Observable2D",
    "product_observable",
    "q_sum",
    "q_sum_bruteforce",
    "counting",
    "GapHistogram",
    "gap_statistics",
    "RepulsionReport",
    "repulsion_fit",
    "level_repulsion_probe",
    "linear_statistic",
    "clt_parameters",
    "characteristic_fn",
    "characteristic_fn_from_values",
    "LoopReport",
    "loop_residual_from_samples",
    "loop_equation_residual",
    "fourier_cutoff",
    "cutoff_profile",
    "MomentMatchReport",
    "moment_match_check",
    "UniversalityReport",
    "universality_compare",
]


# ---------------------------------------------------------------------------
# Test functions


@dataclass(frozen=True)
class LinearStatistic:
    """A C^2 test function with its derivatives and support interval."""

    f: object
    df: object
    d2f: object
    support: tuple = (-4.0, 4.0)
    name: str = ""

    def __post_init__(self):
        rng = np.random.default_rng(0)
        a, b = self.support
        lo, hi = max(a, -1.8), min(b, 1.8)
        pts = rng.uniform(lo + 0.1 * (hi - lo), hi - 0.1 * (hi - lo), 10)
        h = 1e-6
        approx = (np.asarray(self.f(pts + h)) - np.asarray(self.f(pts - h))) / (2 * h)
        exact = np.asarray(self.df(pts))
        scale = np.maximum(np.abs(exact), 1.0)
        if np.max(np.abs(approx - exact) / scale) > 1e-5:
            raise ConfigurationError("df is inconsistent with f (central-difference check)")


@dataclass(frozen=True)
class CltParameters:
    """Gaussian-limit functionals of a linear statistic."""

    sigma2: float
    delta: float
    eps_f: float

    def __post_init__(self):
        if self.sigma2 < 0:
            raise DomainError("sigma2 must be nonnegative")
        if self.eps_f < 1.0:
            raise DomainError("eps_f is at least 1 by construction")


@dataclass(frozen=True)
class Observable2D:
    """Two-variable observable Q(x, y) vanishing for |y| > L.

    fourier_m is the first-variable Fourier support radius when known;
    x_support the hard support radius in x (None = unbounded).  Evaluators
    must be vectorized and exactly zero outside the declared supports.
    """

    q: object
    l_y: float
    fourier_m: float | None = None
    x_support: float | None = None
    x_factor: object = None  # optional separable form q(x, y) = fx(x) * fy(y)
    y_factor: object = None

    def __call__(self, x, y):
        return self.q(x, y)


def product_observable(fx, fy, l_y, x_support=None, fourier_m=None):
    """Separable observable fx(x) * fy(y) with masks enforcing the supports."""

    def q(x, y):
        x = np.asarray(x, dtype=np.float64)
        y = np.asarray(y, dtype=np.float64)
        out = fx(x) * fy(y)
        out = np.where(np.abs(y) > l_y, 0.0, out)
        if x_support is not None:
            out = np.where(np.abs(x) > x_support, 0.0, out)
        return out

    return Observable2D(
        q=q, l_y=l_y, fourier_m=fourier_m, x_support=x_support, x_factor=fx, y_factor=fy
    )


# ---------------------------------------------------------------------------
# Pair sums and counting


def _spectrum_values(s):
    return np.asarray(s.values if hasattr(s, "values") else s, dtype=np.float64)


def q_sum(s, e_ref, obs):
    """sum_{i,j} Q(N(x_i - E), N(x_j - x_i)) with index pre-filtering by the
    declared supports.  Filtered terms are exactly zero by the support
    masks, so the result equals the exhaustive double loop exactly."""
    x = _spectrum_values(s)
    n = x.shape[0]
    u = n * (x - e_ref)
    i_idx = np.arange(n)
    if obs.x_support is not None:
        i_idx = i_idx[np.abs(u) <= obs.x_support]
    if i_idx.size == 0:
        return 0.0
    total = 0.0
    radius = obs.l_y / n
    lo = np.searchsorted(x, x[i_idx] - radius, side="left")
    hi = np.searchsorted(x, x[i_idx] + radius, side="right")
    for i, a, b in zip(i_idx, lo, hi):
        yj = n * (x[a:b] - x[i])
        total += float(np.sum(obs.q(np.full(b - a, u[i]), yj)))
    return total


def q_sum_bruteforce(s, e_ref, obs):
    """Exhaustive O(N^2) evaluation (oracle for q_sum)."""
    x = _spectrum_values(s)
    n = x.shape[0]
    u = n * (x - e_ref)
    total = 0.0
    for i in range(n):
        total += float(np.sum(obs.q(np.full(n, u[i]), n * (x - x[i]))))
    return total


def counting(s, e_ref, s1, s2):
    """|{(i, j): |x_i - E| <= s1/N, |x_i - x_j| <= s2/N}|."""
    if s1 <= 0 or s2 <= 0:
        raise DomainError("window sizes must be positive")
    x = _spectrum_values(s)
    n = x.shape[0]
    sel = np.abs(x - e_ref) <= s1 / n
    xi = x[sel]
    lo = np.searchsorted(x, xi - s2 / n, side="left")
    hi = np.searchsorted(x, xi + s2 / n, side="right")
    return int(np.sum(hi - lo))


# ---------------------------------------------------------------------------
# Gap statistics and level repulsion


@dataclass(frozen=True)
class GapHistogram:
    bin_edges: np.ndarray
    mass: np.ndarray  # fractions per bin, summing to 1
    mean: float
    n_gaps: int


def gap_statistics(samples, table, bulk_alpha, bins=60):
    """Histogram of density-normalized bulk gaps N rho(g_i) (x_{i+1} - x_i)."""
    if not samples:
        raise DomainError("at least one sample is required")
    n = table.n
    lo = max(int(np.ceil(bulk_alpha * n)) - 1, 0)
    hi = min(int(np.floor((1 - bulk_alpha) * n)), n - 1)
    rho = density(table.gamma[lo:hi])
    gaps = []
    for s in samples:
        x = _spectrum_values(s)
        gaps.append(n * rho * (x[lo + 1 : hi + 1] - x[lo:hi]))
    g = np.concatenate(gaps)
    edges = np.linspace(0.0, max(4.0, float(np.max(g)) * (1 + 1e-12)), bins + 1)
    counts, edges = np.histogram(g, bins=edges)
    return GapHistogram(
        bin_edges=edges,
        mass=counts / g.size,
        mean=float(np.mean(g)),
        n_gaps=int(g.size),
    )


def _wilson(k, n, z=1.96):
    p = k / n
    den = 1 + z * z / n
    center = (p + z * z / (2 * n)) / den
    half = z * np.sqrt(p * (1 - p) / n + z * z / (4 * n * n)) / den
    return max(center - half, 0.0), min(center + half, 1.0)


@dataclass(frozen=True)
class RepulsionReport:
    eps: np.ndarray
    prob: np.ndarray
    ci_low: np.ndarray
    ci_high: np.ndarray
    excluded: np.ndarray
    slope: float


def repulsion_fit(gaps, n, eps_grid):
    """Small-gap probabilities P(gap <= eps/N) with Wilson intervals and the
    log-log least-squares slope.  Zero-count grid points are excluded from
    the fit and flagged."""
    gaps = np.asarray(gaps, dtype=np.float64)
    eps_grid = np.asarray(eps_grid, dtype=np.float64)
    counts = np.array([np.sum(gaps <= e / n) for e in eps_grid])
    n_s = gaps.size
    prob = counts / n_s
    ci = np.array([_wilson(int(k), n_s) for k in counts])
    excluded = counts == 0
    use = ~excluded
    if np.sum(use) < 2:
        slope = float("nan")
    else:
        slope = float(np.polyfit(np.log(eps_grid[use]), np.log(prob[use]), 1)[0])
    return RepulsionReport(
        eps=eps_grid, prob=prob, ci_low=ci[:, 0], ci_high=ci[:, 1],
        excluded=excluded, slope=slope,
    )


def level_repulsion_probe(samples, table, index, eps_grid):
    """Small-gap statistics of the gap at a fixed bulk index over an
    ensemble of spectra (>= 1000 samples for the exponent fit)."""
    if len(samples) < 1000:
        raise ConfigurationError("need >= 1000 samples for exponent fitting")
    n = table.n
    if not 0 <= index < n - 1:
        raise DomainError("gap index out of range")
    gaps = np.array([_spectrum_values(s)[index + 1] - _spectrum_values(s)[index]
                     for s in samples])
    return repulsion_fit(gaps, n, eps_grid)


# ---------------------------------------------------------------------------
# Linear statistics and their Gaussian-limit functionals

_QUAD_CACHE = {}


def _quad(m=4000):
    if m not in _QUAD_CACHE:
        _QUAD_CACHE[m] = semicircle_quadrature(m)
    return _QUAD_CACHE[m]


def linear_statistic(s, stat, quad_nodes=4000):
    """S_N(f) = sum_k f(x_k) - N int f drho.

    The centering uses the module quadrature with weights summing to
    exactly 1, so a constant test function gives exactly zero.
    """
    x = _spectrum_values(s)
    qx, qw = _quad(quad_nodes)
    centering = float(np.sum(qw * np.asarray(stat.f(qx))))
    return float(np.sum(stat.f(x)) - x.shape[0] * centering)


def clt_parameters(stat, beta, n, quad_nodes=400):
    """Gaussian-limit functionals (sigma^2, delta, eps) of a test function.

    sigma^2: double quadrature in trigonometric variables where the weight
    (4-xy)/(sqrt(4-x^2) sqrt(4-y^2)) dx dy becomes 4 (1 - cos a cos b) da db,
    with the diagonal of the difference quotient replaced by f'.

    delta: (2/beta - 1) * [(f(2) + f(-2))/4 - (2 pi)^-1 int f(s)/sqrt(4-s^2) ds],
    the zero-mass normalization calibrated against exact trace-moment
    oracles (delta(x^2) = 1 at beta = 1, delta(const) = 0).

    eps: (1 + int |f''| kappa^-1/2)^2 with the floor
    kappa(s) = max(N^-2/3, min(|s-2|, |s+2|)).
    """
    nodes, weights = np.polynomial.legendre.leggauss(quad_nodes)
    theta = 0.5 * np.pi * (nodes + 1.0)
    wt = 0.5 * np.pi * weights
    x = 2.0 * np.cos(theta)
    fx = np.asarray(stat.f(x), dtype=np.float64)
    diff_x = x[:, None] - x[None, :]
    with np.errstate(divide="ignore", invalid="ignore"):
        quot = (fx[:, None] - fx[None, :]) / diff_x
    dfx = np.asarray(stat.df(x), dtype=np.float64)
    di = np.diag_indices(quad_nodes)
    quot[di] = dfx
    ct = np.cos(theta)
    weight2d = 4.0 * (1.0 - ct[:, None] * ct[None, :])
    sigma2 = float(
        np.einsum("i,j,ij,ij->", wt, wt, quot * quot, weight2d) / (2 * np.pi**2 * beta)
    )
    delta = (2.0 / beta - 1.0) * (
        (float(stat.f(np.float64(2.0))) + float(stat.f(np.float64(-2.0)))) / 4.0
        - float(np.dot(wt, fx)) / (2.0 * np.pi)
    )
    eps_integral = _eps_integral(stat, n)
    return CltParameters(
        sigma2=max(sigma2, 0.0),
        delta=float(delta),
        eps_f=float((1.0 + eps_integral) ** 2) if np.isfinite(eps_integral) else float("inf"),
    )


def _eps_integral(stat, n):
    """int |f''(s)| kappa(s)^(-1/2) ds over the support, kappa floored at N^(-2/3)."""
    floor = float(n) ** (-2.0 / 3.0)
    a, b = stat.support
    cuts = sorted(
        {a, b}
        | {c for c in (-2 - floor, -2, -2 + floor, 0.0, 2 - floor, 2, 2 + floor) if a < c < b}
    )
    nodes, weights = np.polynomial.legendre.leggauss(80)
    total = 0.0
    for lo, hi in zip(cuts[:-1], cuts[1:]):
        mid, half = 0.5 * (lo + hi), 0.5 * (hi - lo)
        s = mid + half * nodes
        kappa = np.maximum(floor, np.minimum(np.abs(s - 2.0), np.abs(s + 2.0)))
        vals = np.abs(np.asarray(stat.d2f(s))) / np.sqrt(kappa)
        if not np.all(np.isfinite(vals)):
            return float("inf")
        total += half * float(np.dot(weights, vals))
    return total


def characteristic_fn(samples, stat, lambda_grid, quad_nodes=4000):
    """Monte Carlo characteristic function of S_N(f) on a lambda grid.

    Returns (lambda_grid, Z, stderr) with Z the complex sample means of
    e^{i lambda S} and stderr their per-lambda standard errors.
    """
    if len(samples) < 100:
        raise ConfigurationError("need >= 100 samples")
    s_vals = np.array([linear_statistic(s, stat, quad_nodes) for s in samples])
    return characteristic_fn_from_values(s_vals, lambda_grid)


def characteristic_fn_from_values(s_vals, lambda_grid):
    s_vals = np.asarray(s_vals, dtype=np.float64)
    lam = np.atleast_1d(np.asarray(lambda_grid, dtype=np.float64))
    phases = np.exp(1j * lam[:, None] * s_vals[None, :])
    z = phases.mean(axis=1)
    n = s_vals.shape[0]
    var = phases.real.var(axis=1) + phases.imag.var(axis=1)
    stderr = np.sqrt(var / n)
    return lam, z, stderr


# ---------------------------------------------------------------------------
# Loop equation


@dataclass(frozen=True)
class LoopReport:
    residual: complex
    stderr: float
    m_hat: complex
    var_hat: complex
    precision_warning: bool


def loop_residual_from_samples(s_vals, z, beta, n):
    """Loop-equation residual from precomputed empirical Stieltjes values
    s_N(z), one per sample."""
    s_n = np.asarray(s_vals, dtype=np.complex128)
    n_samp = s_n.shape[0]
    m_hat = complex(np.mean(s_n))
    centered = s_n - m_hat
    var_hat = complex(np.mean(centered**2))
    m = stieltjes(z)
    root = 2.0 * m - z  # equals -sqrt(z^2 - 4) on the decaying branch
    m_prime = m / root
    residual = (m_hat - m) ** 2 - (-root) * (m_hat - m) - (2.0 / beta - 1.0) * m_prime / n + var_hat
    se_mean = np.sqrt((np.var(s_n.real) + np.var(s_n.imag)) / n_samp)
    dres = 2.0 * (m_hat - m) + root
    sq = centered**2
    se_var = np.sqrt((np.var(sq.real) + np.var(sq.imag)) / n_samp)
    stderr = abs(dres) * se_mean + se_var
    return LoopReport(
        residual=complex(residual),
        stderr=float(stderr),
        m_hat=m_hat,
        var_hat=var_hat,
        precision_warning=bool(np.imag(z) < 5.0 / n),
    )


def loop_equation_residual(samples, z, beta):
    """Residual of the first loop equation at lambda = 0:

    (m_N - m)^2 - sqrt(z^2-4) (m_N - m) - (2/beta - 1) m'(z)/N + Var(s_N) = 0

    with m_N and the (complex, unconjugated) variance of s_N estimated by
    Monte Carlo, and m, m' analytic.  The integration-by-parts derivation
    fixes the + sign of the variance term; it is verified to machine
    precision by a direct small-N Gaussian oracle in the tests.
    """
    if np.imag(z) <= 0:
        raise DomainError("need Im z > 0")
    if abs(np.real(z)) >= 2:
        raise DomainError("need Re z in the bulk")
    x0 = _spectrum_values(samples[0])
    n = x0.shape[0]
    s_n = np.array([np.mean(1.0 / (z - _spectrum_values(s))) for s in samples])
    return loop_residual_from_samples(s_n, z, beta, n)


# ---------------------------------------------------------------------------
# Band-limited observables


def cutoff_profile(p):
    """Symmetric W^{2,inf} cutoff: 1 on |p| <= 1/2, smoothstep down to 0 at
    |p| = 1, nonincreasing on p > 0."""
    p = np.abs(np.asarray(p, dtype=np.float64))
    u = np.clip(2.0 * (1.0 - p), 0.0, 1.0)
    return u * u * (3.0 - 2.0 * u)


def fourier_cutoff(obs, m, q=cutoff_profile, half_width=64.0, grid_points=8192, y_points=129):
    """Band-limit the first variable of an observable.

    The first-variable Fourier transform is multiplied by q(p/m) via FFT
    synthesis on a uniform grid of the given half-width; the result is
    evaluated by cubic interpolation (separable observables) or bilinear
    interpolation of a 2-D table, and vanishes outside the synthesis grid.
    The second-variable support is unchanged.
    """
    if m <= 0:
        raise DomainError("m must be positive")
    dx = 2.0 * half_width / grid_points
    xg = -half_width + dx * np.arange(grid_points)
    freqs = 2.0 * np.pi * np.fft.fftfreq(grid_points, d=dx)
    window = q(freqs / m)
    if obs.x_factor is not None:
        vals = np.asarray(obs.x_factor(xg), dtype=np.float64)
        if obs.x_support is not None:
            vals = np.where(np.abs(xg) > obs.x_support, 0.0, vals)
        smooth = np.fft.ifft(np.fft.fft(vals) * window).real
        spline = CubicSpline(xg, smooth, extrapolate=False)
        fy = obs.y_factor
        l_y = obs.l_y

        def fx_m(x):
            out = spline(np.asarray(x, dtype=np.float64))
            return np.nan_to_num(out, nan=0.0)

        return product_observable(fx_m, fy, l_y, x_support=half_width, fourier_m=m)
    yg = np.linspace(-obs.l_y, obs.l_y, y_points)
    rows = np.empty((grid_points, y_points))
    for c, yv in enumerate(yg):
        rows[:, c] = np.asarray(obs.q(xg, np.full_like(xg, yv)), dtype=np.float64)
    smooth = np.fft.ifft(np.fft.fft(rows, axis=0) * window[:, None], axis=0).real
    interp = RegularGridInterpolator(
        (xg, yg), smooth, method="linear", bounds_error=False, fill_value=0.0
    )

    def q_m(x, y):
        x = np.asarray(x, dtype=np.float64)
        y = np.asarray(y, dtype=np.float64)
        pts = np.stack(np.broadcast_arrays(x, y), axis=-1)
        return interp(pts)

    return Observable2D(q=q_m, l_y=obs.l_y, fourier_m=m, x_support=half_width)


# ---------------------------------------------------------------------------
# Moment matching


@dataclass(frozen=True)
class MomentMatchReport:
    order: np.ndarray
    diff: np.ndarray
    stderr: np.ndarray
    threshold: np.ndarray
    within: np.ndarray


def moment_match_check(samples_a, samples_b, delta, n, n_boot=200, rng=None):
    """Empirical moment differences |E a^k - E b^k| for k = 1..4 with
    bootstrap error bars against the matching thresholds N^(-delta-2+k/2)."""
    a = np.asarray(samples_a, dtype=np.float64)
    b = np.asarray(samples_b, dtype=np.float64)
    if a.size == 0 or b.size == 0:
        raise DomainError("both sample sets must be nonempty")
    rng = rng or np.random.default_rng(0)
    orders = np.arange(1, 5)
    pow_a = a[None, :] ** orders[:, None]
    pow_b = b[None, :] ** orders[:, None]
    diff = pow_a.mean(axis=1) - pow_b.mean(axis=1)
    boot = np.empty((n_boot, 4))
    for r in range(n_boot):
        boot[r] = (
            pow_a[:, rng.integers(0, a.size, a.size)].mean(axis=1)
            - pow_b[:, rng.integers(0, b.size, b.size)].mean(axis=1)
        )
    stderr = boot.std(axis=0)
    threshold = float(n) ** (-delta - 2.0 + orders / 2.0)
    within = np.abs(diff) <= threshold + 2 * stderr
    return MomentMatchReport(
        order=orders, diff=diff, stderr=stderr, threshold=threshold, within=within
    )


# ---------------------------------------------------------------------------
# Ensemble-vs-ensemble comparison


@dataclass(frozen=True)
class UniversalityReport:
    mean_a: float
    mean_b: float
    stderr: float
    z_score: float
    n_samples: int


def universality_compare(spec_a, spec_b, e_ref, t, obs, n_samples, rng):
    """Monte Carlo comparison of the pair-correlation sum between ensemble A
    evolved to time t by the matrix flow and raw samples of ensemble B."""
    if abs(e_ref) >= 2:
        raise DomainError("energy must lie in the bulk")
    if t < 0:
        raise DomainError("flow time must be nonnegative")
    vals_a = np.empty(n_samples)
    vals_b = np.empty(n_samples)
    for k in range(n_samples):
        h = sample_generalized_wigner(spec_a, rng)
        if t > 0:
            h = matrix_flow(h, t, rng)
        vals_a[k] = q_sum(eigenvalues(h), e_ref, obs)
        g = sample_generalized_wigner(spec_b, rng)
        vals_b[k] = q_sum(eigenvalues(g), e_ref, obs)
    se = float(np.sqrt(vals_a.var(ddof=1) / n_samples + vals_b.var(ddof=1) / n_samples))
    mean_a, mean_b = float(vals_a.mean()), float(vals_b.mean())
    z = (mean_a - mean_b) / se if se > 0 else 0.0
    return UniversalityReport(
        mean_a=mean_a, mean_b=mean_b, stderr=se, z_score=float(z), n_samples=n_samples
    )
