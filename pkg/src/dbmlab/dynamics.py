"""Coupled and regularized eigenvalue flows, the discrete parabolic equation
with random coefficients, and the empirical checks built on them: smoothing
prediction residuals, decay, regularity and oscillation reports.
"""

import struct
from dataclasses import dataclass, field

import numpy as np
from scipy.linalg import cho_factor, cho_solve, solveh_banded

from . import _kernels
from .errors import DomainError, StepSizeError
from .kernel import psi_matrix, heat_kernel_grid
from .semicircle import semicircle_quadrature

__all__ = [
    "Trajectory",
    "write_trajectory",
    "read_trajectory",
    "dbm_step",
    "dbm_step_regularized",
    "run_dbm",
    "run_coupled",
    "run_regularized_pair",
    "CoefficientField",
    "synthetic_field",
    "frozen_field",
    "coupled_field",
    "evolve_parabolic",
    "ParabolicReport",
    "HomogenizationReport",
    "homogenization_residual",
    "RegularityReport",
    "regularity_check",
    "holder_oscillation",
]

_TRAJ_MAGIC = b"DBMLTRJ1"

# adaptive substepping: halve dt while min gap < this multiple of the noise,
# down to a bounded depth
_GAP_NOISE_FACTOR = 10.0
_MAX_HALVINGS = 6


@dataclass(frozen=True)
class Trajectory:
    """Recorded states of one eigenvalue flow at increasing times.

    times[0] is the flow's start (0 for the standard runners; the
    regularized companion starts at its activation time).  States from the
    ordered flows are ascending; the regularized companion's states may
    not be (it need not preserve ordering), so ordering is not enforced
    at the container level.
    """

    times: np.ndarray
    states: np.ndarray  # shape (n_times, N)
    seed: dict = field(default_factory=dict)
    dt: float = 0.0

    def __post_init__(self):
        t = np.asarray(self.times, dtype=np.float64)
        s = np.asarray(self.states, dtype=np.float64)
        if s.shape[0] != t.shape[0]:
            raise DomainError("one state per recorded time is required")
        if np.any(np.diff(t) <= 0):
            raise DomainError("recording times must be increasing")
        object.__setattr__(self, "times", t)
        object.__setattr__(self, "states", s)
        t.setflags(write=False)
        s.setflags(write=False)

    @property
    def n(self):
        return self.states.shape[1]

    def state_at(self, t):
        idx = np.nonzero(np.abs(self.times - t) <= 1e-12 * max(1.0, abs(t)))[0]
        if idx.size == 0:
            raise DomainError(f"time {t} was not recorded")
        return self.states[idx[0]]


def write_trajectory(path, traj):
    """Binary frames: 8-byte magic, uint64 N, then (time, N doubles) frames."""
    with open(path, "wb") as fh:
        fh.write(_TRAJ_MAGIC)
        fh.write(struct.pack("<Q", traj.n))
        for t, state in zip(traj.times, traj.states):
            fh.write(struct.pack("<d", float(t)))
            fh.write(np.ascontiguousarray(state, dtype="<f8").tobytes())


def read_trajectory(path):
    with open(path, "rb") as fh:
        if fh.read(8) != _TRAJ_MAGIC:
            raise DomainError("not a trajectory dump (bad magic)")
        (n,) = struct.unpack("<Q", fh.read(8))
        times, states = [], []
        frame = fh.read(8 + 8 * n)
        while frame:
            (t,) = struct.unpack("<d", frame[:8])
            times.append(t)
            states.append(np.frombuffer(frame[8:], dtype="<f8"))
            frame = fh.read(8 + 8 * n)
    return Trajectory(times=np.array(times), states=np.array(states))


# ---------------------------------------------------------------------------
# Euler-Maruyama stepping


def _as_vector(x):
    arr = x.values if hasattr(x, "values") else x
    return np.ascontiguousarray(arr, dtype=np.float64)


def dbm_step(x, dt, db, n=None):
    """One Euler-Maruyama step of the eigenvalue flow
    dx_l = sqrt(2/N) dB_l + ((1/N) sum_{k != l} 1/(x_l - x_k) - x_l/2) dt,
    followed by a re-sort (collision repair)."""
    if dt <= 0:
        raise DomainError("dt must be positive")
    x = _as_vector(x)
    n = x.shape[0] if n is None else n
    drift = _kernels.dbm_drift(x)
    return np.sort(x + np.sqrt(2.0 / n) * db + drift * dt)


def dbm_step_regularized(x_ref, xhat, dt, db, eps):
    """One step of the regularized flow: the pair interaction is evaluated
    on the unregularized driving trajectory x_ref with shifts
    eps*sign(j-k), the restoring term on xhat itself.  The output is not
    re-sorted (the regularized flow need not preserve ordering)."""
    if eps <= 0:
        raise DomainError("eps must be positive")
    x_ref = _as_vector(x_ref)
    xhat = _as_vector(xhat)
    n = x_ref.shape[0]
    drift = _kernels.dbm_drift_regularized(x_ref, xhat, eps)
    return xhat + np.sqrt(2.0 / n) * db + drift * dt


def _min_gap(x):
    return float(np.min(np.diff(x)))


def _advance_single(x, h, rng, n, depth):
    """One Euler-Maruyama step with re-sort, halving the step while any gap
    is below the noise scale (bounded recursion depth)."""
    if depth < _MAX_HALVINGS and _min_gap(x) < _GAP_NOISE_FACTOR * np.sqrt(2.0 * h / n):
        x = _advance_single(x, 0.5 * h, rng, n, depth + 1)
        return _advance_single(x, 0.5 * h, rng, n, depth + 1)
    db = rng.standard_normal(n) * np.sqrt(h)
    return np.sort(x + np.sqrt(2.0 / n) * db + _kernels.dbm_drift(x) * h)


_BANDWIDTH = 2  # off-diagonals handled implicitly in the difference update


def _advance_coupled(m, d, h, rng, n):
    """Advance the coupled pair one step in midpoint/difference variables.

    The midpoint flow m = (x+y)/2 takes a plain Euler-Maruyama step with
    re-sort (the shared noise enters here only).  The difference d = x - y,
    in which the noise cancels exactly, obeys the linear parabolic system
    d' = -(B(t) + 1/2) d with pair coefficients B_ij; it is advanced with
    the near-diagonal band implicit and the smooth tail explicit.  The full
    loss term stays on the implicit diagonal, which makes the update
    sub-stochastic (maximum principle) for any step size; the stiffness of
    the band (coefficients ~ 1/(N gap^2)) therefore never constrains h.
    Swapping the pair negates d bitwise, so exchange symmetry is exact.
    """
    x = m + 0.5 * d
    y = m - 0.5 * d
    b = _kernels.coupled_coefficient_matrix(
        np.ascontiguousarray(x), np.ascontiguousarray(y), 0.0
    )
    np.clip(b, 0.0, None, out=b)  # guards rare micro-ordering violations
    row = b.sum(axis=1)
    tail_matvec = b @ d
    ab = np.zeros((_BANDWIDTH + 1, n))
    ab[_BANDWIDTH] = 1.0 + h * (row + 0.5)
    for k in range(1, _BANDWIDTH + 1):
        diag_k = np.diagonal(b, k)
        ab[_BANDWIDTH - k, k:] = -h * diag_k
        tail_matvec[:-k] -= diag_k * d[k:]
        tail_matvec[k:] -= diag_k * d[:-k]
    d = solveh_banded(ab, d + h * tail_matvec, lower=False, check_finite=False)
    db = rng.standard_normal(n) * np.sqrt(h)
    m_raw = m + np.sqrt(2.0 / n) * db + _kernels.dbm_drift(m) * h
    perm = np.argsort(m_raw, kind="stable")
    return m_raw[perm], d[perm]


def _segment_steps(t_a, t_b, dt):
    n_sub = max(1, int(np.ceil((t_b - t_a) / dt - 1e-12)))
    return n_sub, (t_b - t_a) / n_sub


def run_dbm(x0, t_end, dt, rng, record_times=None, adaptive=True, seed_info=None):
    """Single flow from time 0 to t_end; states recorded at record_times
    (always including 0 and t_end)."""
    traj, _ = _run(_as_vector(x0), None, t_end, dt, rng, record_times, adaptive, seed_info)
    return traj


def run_coupled(x0, y0, t_end, dt, rng, record_times=None, adaptive=True, seed_info=None):
    """Two flows driven by identical Brownian increments.

    Determinism: (seed, x0, y0, dt) fully determine both trajectories; in
    particular x0 == y0 yields bitwise-identical trajectories.
    """
    x0 = _as_vector(x0)
    y0 = _as_vector(y0)
    if x0.shape != y0.shape:
        raise DomainError("coupled flows need equal lengths")
    return _run(x0, y0, t_end, dt, rng, record_times, adaptive, seed_info)


def _checkpoints(t_end, record_times):
    record = {0.0, float(t_end)}
    if record_times is not None:
        for t in record_times:
            if not 0.0 <= t <= t_end + 1e-12:
                raise DomainError("record times must lie in [0, t_end]")
            record.add(float(t))
    return sorted(record)


def _run(x0, y0, t_end, dt, rng, record_times, adaptive, seed_info):
    if dt <= 0 or t_end <= 0:
        raise DomainError("dt and t_end must be positive")
    n = x0.shape[0]
    coupled = y0 is not None
    checkpoints = _checkpoints(t_end, record_times)
    info = dict(seed_info or {})
    if not coupled:
        x = x0.copy()
        times, xs = [checkpoints[0]], [x.copy()]
        depth0 = 0 if adaptive else _MAX_HALVINGS
        for t_a, t_b in zip(checkpoints[:-1], checkpoints[1:]):
            n_sub, h = _segment_steps(t_a, t_b, dt)
            for _ in range(n_sub):
                x = _advance_single(x, h, rng, n, depth0)
            times.append(t_b)
            xs.append(x.copy())
        return Trajectory(times=np.array(times), states=np.array(xs), seed=info, dt=dt), None
    m = 0.5 * (x0 + y0)
    d = x0 - y0
    repairs = 0
    times, xs, ys = [checkpoints[0]], [x0.copy()], [y0.copy()]
    for t_a, t_b in zip(checkpoints[:-1], checkpoints[1:]):
        n_sub, h = _segment_steps(t_a, t_b, dt)
        for _ in range(n_sub):
            m, d = _advance_coupled(m, d, h, rng, n)
        x = m + 0.5 * d
        y = m - 0.5 * d
        if np.any(np.diff(x) < 0) or np.any(np.diff(y) < 0):
            repairs += 1
            x, y = np.sort(x), np.sort(y)
        times.append(t_b)
        xs.append(x)
        ys.append(y)
    info["order_repairs"] = repairs
    xt = Trajectory(times=np.array(times), states=np.array(xs), seed=info, dt=dt)
    yt = Trajectory(times=np.array(times), states=np.array(ys), seed=info, dt=dt)
    return xt, yt


def _regularization_kick(x, eps):
    """Omega_i = sum_{j != i} eps_ij / ((x_i - x_j)(x_i - x_j + eps_ij)),
    the drift difference (times N) between the raw and regularized flows."""
    n = x.shape[0]
    raw = _kernels.dbm_drift(x) + 0.5 * x
    reg = _kernels.dbm_drift_regularized(x, x, eps) + 0.5 * x
    return n * (raw - reg)


def run_regularized_pair(x0, t_start, t_end, dt, eps, rng, record_times=None,
                         mode="integral"):
    """Evolve the flow together with its eps-regularized companion on
    [t_start, t_end], starting from xhat = x at t_start.  Returns the two
    trajectories and the running maximum of |x - xhat| over steps.

    mode="euler" composes dbm_step_regularized directly (shared noise);
    near-collisions of the discrete flow are noise artifacts the open-loop
    companion cannot repair, so this mode's deviation is dominated by the
    integrator, not by the regularization.  mode="integral" (default)
    propagates the rescaled deviation q = N (x - xhat) by its exact
    identity dq/dt = Omega - q/2 along the simulated flow, which isolates
    the regularization effect itself.
    """
    if eps <= 0:
        raise DomainError("eps must be positive")
    if mode not in ("integral", "euler"):
        raise DomainError("mode must be 'integral' or 'euler'")
    x = _as_vector(x0)
    n = x.shape[0]
    xhat = x.copy()
    q = np.zeros(n)
    record = sorted({float(t_start), float(t_end), *(record_times or ())})
    times, xs, xhats = [record[0]], [x.copy()], [xhat.copy()]
    max_dev = 0.0
    for t_a, t_b in zip(record[:-1], record[1:]):
        n_sub, h = _segment_steps(t_a, t_b, dt)
        for _ in range(n_sub):
            if mode == "euler":
                db = rng.standard_normal(n) * np.sqrt(h)
                noise = np.sqrt(2.0 / n) * db
                xhat = xhat + noise + _kernels.dbm_drift_regularized(x, xhat, eps) * h
                x = np.sort(x + noise + _kernels.dbm_drift(x) * h)
            else:
                kick = _regularization_kick(x, eps)
                x = _advance_single(x, h, rng, n, 0)
                decay = np.exp(-h / 2.0)
                q = decay * q + 0.5 * h * (decay * kick + _regularization_kick(x, eps))
                xhat = x - q / n
            max_dev = max(max_dev, float(np.max(np.abs(x - xhat))))
        times.append(t_b)
        xs.append(x.copy())
        xhats.append(xhat.copy())
    xt = Trajectory(times=np.array(times), states=np.array(xs), dt=dt)
    ht = Trajectory(times=np.array(times), states=np.array(xhats), dt=dt)
    return xt, ht, max_dev


# ---------------------------------------------------------------------------
# Coefficient fields and the parabolic equation


class CoefficientField:
    """Symmetric nonnegative coefficients B_ij(s) with zero diagonal.

    static fields return a cached matrix; trajectory-backed fields
    interpolate the recorded states linearly in time.
    """

    def __init__(self, matrix_fn, static, times=None, mode="frozen"):
        self._matrix_fn = matrix_fn
        self.static = static
        self.times = times
        self.mode = mode
        self._cache = None

    def matrix(self, s):
        if self.static:
            if self._cache is None:
                self._cache = self._matrix_fn(0.0)
            return self._cache
        return self._matrix_fn(s)


def synthetic_field(table):
    """Frozen field B_ij = 1/(N (g_i - g_j)^2) built from typical locations."""
    g = table.gamma
    d = g[:, None] - g[None, :]
    np.fill_diagonal(d, np.inf)
    b = 1.0 / (table.n * d * d)
    return CoefficientField(lambda s: b, static=True, mode="synthetic")


def frozen_field(b):
    b = np.asarray(b, dtype=np.float64)
    if not np.allclose(b, b.T):
        raise DomainError("coefficient matrix must be symmetric")
    if np.any(np.diag(b) != 0.0):
        raise DomainError("coefficient matrix must have zero diagonal")
    return CoefficientField(lambda s: b, static=True, mode="frozen")


def coupled_field(xt, yt, eps, t0, gap_floor=0.0):
    """Coefficients of the coupled difference flow: raw pair products for
    s <= t0 and eps-regularized ones beyond, built from two recorded
    trajectories with common times (linear interpolation in between).

    gap_floor clamps pair distances from below before forming the
    coefficients.  The 1/gap^2 tails make time integrals of the raw field
    dominated by occupation times the discrete path cannot resolve
    (re-sorted Euler steps over-represent sub-noise gaps), so scans should
    set the floor to the generating integrator's noise resolution,
    ~ sqrt(2 dt / N)/2.
    """
    if not np.array_equal(xt.times, yt.times):
        raise DomainError("coupled trajectories must share recording times")

    def interp(s):
        t = np.clip(s, xt.times[0], xt.times[-1])
        k = int(np.searchsorted(xt.times, t, side="right")) - 1
        k = min(max(k, 0), len(xt.times) - 2)
        w = (t - xt.times[k]) / (xt.times[k + 1] - xt.times[k])
        x = (1 - w) * xt.states[k] + w * xt.states[k + 1]
        y = (1 - w) * yt.states[k] + w * yt.states[k + 1]
        return x, y

    def matrix(s):
        x, y = interp(s)
        e = 0.0 if s <= t0 else eps
        b = _kernels.coupled_coefficient_matrix(
            np.ascontiguousarray(x), np.ascontiguousarray(y), e
        )
        if gap_floor > 0.0:
            n = x.shape[0]
            cap = 1.0 / (n * gap_floor * gap_floor)
            np.clip(b, None, cap, out=b)
        return b

    return CoefficientField(matrix, static=False, times=xt.times, mode="coupled")


@dataclass(frozen=True)
class ParabolicReport:
    v: np.ndarray
    mass_drift: float
    linf_path: np.ndarray
    l2_path: np.ndarray
    energy_lhs: float
    energy_rhs: float


def evolve_parabolic(v0, field, t0, t1, dt, check_nonnegative=True):
    """Backward-Euler evolution of dv/dt = -B(t) v, (Bv)_i = sum_j B_ij (v_i - v_j).

    The implicit step is solved by Cholesky (the generator is a symmetric
    diagonally dominant M-matrix), which gives the exact maximum principle
    and non-increasing l2 norm; the applied flux is then projected onto
    mean zero so sum v_i is conserved against rounding.
    """
    if t1 <= t0:
        raise DomainError("t1 must exceed t0")
    if dt <= 0:
        raise DomainError("dt must be positive")
    v = np.asarray(v0, dtype=np.float64).copy()
    n = v.shape[0]
    n_steps, h = _segment_steps(t0, t1, dt)
    mass0 = float(np.sum(v))
    linf_path = [float(np.max(np.abs(v)))]
    l2_path = [float(np.linalg.norm(v))]
    energy_rhs = 0.0
    e0 = l2_path[0] ** 2
    factor = None
    s = t0
    for _ in range(n_steps):
        b = field.matrix(s)
        if check_nonnegative and np.min(b) < 0:
            raise DomainError("coefficient field must be nonnegative")
        if factor is None or not field.static:
            row = b.sum(axis=1)
            m = -h * b
            m[np.diag_indices(n)] = 1.0 + h * row
            try:
                factor = cho_factor(m, lower=True, check_finite=False)
            except np.linalg.LinAlgError as exc:
                raise StepSizeError(f"implicit step factorization failed at s={s}") from exc
        q_old = _dissipation(b, v)
        v_impl = cho_solve(factor, v, check_finite=False)
        flux = b.sum(axis=1) * v_impl - b @ v_impl
        flux -= flux.mean()
        v = v - h * flux
        energy_rhs += 0.5 * h * (q_old + _dissipation(b, v))
        linf_path.append(float(np.max(np.abs(v))))
        l2_path.append(float(np.linalg.norm(v)))
        s += h
    return ParabolicReport(
        v=v,
        mass_drift=float(np.sum(v) - mass0),
        linf_path=np.array(linf_path),
        l2_path=np.array(l2_path),
        energy_lhs=e0 - l2_path[-1] ** 2,
        energy_rhs=energy_rhs,
    )


def _dissipation(b, v):
    """sum_{jk} B_jk (v_j - v_k)^2 = 2 v^T L v."""
    lv = b.sum(axis=1) * v - b @ v
    return 2.0 * float(np.dot(v, lv))


# ---------------------------------------------------------------------------
# Smoothing-prediction residual


@dataclass(frozen=True)
class HomogenizationReport:
    indices: np.ndarray
    residuals: np.ndarray
    max_residual: float
    median_residual: float
    empty: bool
    extension_residuals: np.ndarray | None = None


def homogenization_residual(xt, yt, t0, t, e_ref, delta1, table, pou=None):
    """Residual of the kernel-smoothing prediction for the coupled difference.

    r_i = |N x_i(t) - N (y_i(t) + (Psi_{t-t0} x(t0))_i - (Psi_{t-t0} y(t0))_i)|
    over the window indices {i : |g_i - e_ref| <= N^{-1+delta1}}.

    With a partition of unity, the continuum prediction
    int p_{t-t0}(g_i, u) e_v(u) drho(u) for v = N e^{t0/2} (x(t0) - y(t0))
    is also compared against N e^{t/2} (x_i(t) - y_i(t)).
    """
    if t < 2 * t0:
        raise DomainError("need t >= 2 t0")
    n = table.n
    window = np.abs(table.gamma - e_ref) <= float(n) ** (-1.0 + delta1)
    idx = np.nonzero(window)[0]
    if idx.size == 0:
        return HomogenizationReport(
            indices=idx, residuals=np.empty(0), max_residual=np.nan,
            median_residual=np.nan, empty=True,
        )
    x0, y0 = xt.state_at(t0), yt.state_at(t0)
    x1, y1 = xt.state_at(t), yt.state_at(t)
    psi = psi_matrix(t - t0, table)
    smooth_diff = psi @ (x0 - y0)
    r = np.abs(n * (x1[idx] - y1[idx] - smooth_diff[idx]))
    ext = None
    if pou is not None:
        v0 = n * np.exp(t0 / 2.0) * (x0 - y0)
        qx, qw = semicircle_quadrature(2000)
        ev = pou.extend(v0, qx)
        p_rows = heat_kernel_grid(t - t0, table.gamma[idx], qx)
        pred = p_rows @ (qw * ev)
        actual = n * np.exp(t / 2.0) * (x1[idx] - y1[idx])
        ext = np.abs(actual - pred)
    return HomogenizationReport(
        indices=idx,
        residuals=r,
        max_residual=float(np.max(r)),
        median_residual=float(np.median(r)),
        empty=False,
        extension_residuals=ext,
    )


# ---------------------------------------------------------------------------
# Strong regularity and oscillation reports


@dataclass(frozen=True)
class RegularityReport:
    worst_ratio: float
    rho_min: float
    regular: bool
    rho_test: float


def regularity_check(field, z_index, sigma, rho_test=0.5, log_grid_constant=1.0):
    """Scan the windowed-average regularity condition at index z.

    ratio(s, M) = |int_s^sigma (1/M) sum_{|i-z|<=M, |j-z|<=M} B_ij| /
                  (1/N + |s - sigma|)
    over dyadic M and the dyadic time grid {sigma (1 - 2^-m (1 + 2^-k))}
    clipped to [0, sigma].  rho_min = log_N(worst ratio) - 1 is the smallest
    exponent making the N^(1+rho) bound hold on the scanned grid.
    """
    b_probe = field.matrix(0.0)
    n = b_probe.shape[0]
    if not 0 <= z_index < n:
        raise DomainError("index z out of range")
    kmax = max(1, int(log_grid_constant * np.log(n)))
    s_grid = {0.0}
    for m in range(kmax + 1):
        for k in range(kmax + 1):
            s = sigma * (1.0 - 2.0 ** (-m) * (1.0 + 2.0 ** (-k)))
            if 0.0 <= s < sigma:
                s_grid.add(s)
    s_grid = np.array(sorted(s_grid))
    m_grid = [1]
    while m_grid[-1] < n:
        m_grid.append(min(2 * m_grid[-1], n))
    # cumulative time integral of the block sums on a trapezoid grid; for
    # trajectory-backed fields the recorded frames set the resolution (the
    # coefficients have heavy 1/gap^2 tails, so coarse sampling would
    # overweight spikes)
    if field.static:
        sample_times = np.array([0.0, sigma])
    else:
        inner = np.asarray(field.times, dtype=np.float64)
        inner = inner[(inner > 0.0) & (inner < sigma)]
        sample_times = np.unique(np.concatenate(([0.0], inner, [sigma], s_grid)))
    block = np.empty((len(sample_times), len(m_grid)))
    for a, s in enumerate(sample_times):
        b = field.matrix(s)
        # 2-D prefix sums give every centered block total in O(1)
        prefix = np.zeros((n + 1, n + 1))
        prefix[1:, 1:] = b.cumsum(axis=0).cumsum(axis=1)
        for c, m in enumerate(m_grid):
            lo = max(z_index - m, 0)
            hi = min(z_index + m, n - 1) + 1
            block[a, c] = (
                prefix[hi, hi] - prefix[lo, hi] - prefix[hi, lo] + prefix[lo, lo]
            )
    worst = 0.0
    for c in range(len(m_grid)):
        cum = np.concatenate(([0.0], np.cumsum(
            0.5 * (block[1:, c] + block[:-1, c]) * np.diff(sample_times))))
        total = cum[-1]
        for s in s_grid:
            tail = total - np.interp(s, sample_times, cum)
            ratio = abs(tail / m_grid[c]) / (1.0 / n + (sigma - s))
            worst = max(worst, ratio)
    rho_min = np.log(max(worst, 1e-300)) / np.log(n) - 1.0
    return RegularityReport(
        worst_ratio=float(worst),
        rho_min=float(rho_min),
        regular=bool(worst <= float(n) ** (1.0 + rho_test)),
        rho_test=float(rho_test),
    )


def holder_oscillation(v_traj, z, t, ell1, table):
    """Maximum oscillation max |v_j(s) - v_k(s)| / ||v||_inf over recorded
    s in [t - ell1, t] and indices with |g_j - z| <= ell1, |g_k - z| <= ell1.
    ||v||_inf is taken from the first recorded state.  Returns NaN when the
    index window is empty (reported, not an error)."""
    if ell1 <= 0:
        raise DomainError("ell1 must be positive")
    times = np.asarray(v_traj.times if hasattr(v_traj, "times") else v_traj[0])
    states = np.asarray(v_traj.states if hasattr(v_traj, "states") else v_traj[1])
    sel_t = (times >= t - ell1 - 1e-12) & (times <= t + 1e-12)
    idx = np.nonzero(np.abs(table.gamma - z) <= ell1)[0]
    if idx.size == 0 or not np.any(sel_t):
        return float("nan")
    norm = float(np.max(np.abs(states[0])))
    if norm == 0.0:
        return 0.0
    window = states[np.ix_(sel_t, idx)]
    osc = np.max(window, axis=1) - np.min(window, axis=1)
    return float(np.max(osc) / norm)
