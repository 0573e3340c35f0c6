"""Semicircle density, Stieltjes transform, typical locations and rigidity.

The quantile table gamma_0..gamma_{N-1} solves cdf(gamma_k) = (k + 1/2)/N,
which anchors every index convention in the package: consecutive quantile
cells carry semicircle mass exactly 1/N.
"""

import csv
from dataclasses import dataclass, field

import numpy as np

from .errors import DomainError

__all__ = [
    "density",
    "cdf",
    "stieltjes",
    "QuantileTable",
    "typical_locations",
    "RigidityReport",
    "rigidity_report",
    "semicircle_quadrature",
]


def density(x):
    """Semicircle density (2*pi)^(-1) * sqrt((4 - x^2)_+); zero off [-2, 2]."""
    x = np.asarray(x, dtype=np.float64)
    return np.sqrt(np.clip(4.0 - x * x, 0.0, None)) / (2.0 * np.pi)


def cdf(x):
    """Closed-form semicircle CDF, clamped to [0, 1] outside the support."""
    x = np.asarray(x, dtype=np.float64)
    xc = np.clip(x, -2.0, 2.0)
    return 0.5 + xc * np.sqrt(4.0 - xc * xc) / (4.0 * np.pi) + np.arcsin(xc / 2.0) / np.pi


def stieltjes(z):
    """Stieltjes transform m(z) = (z - sqrt(z^2-4))/2 on the cut complement.

    The square root is the product of principal square roots of (z-2) and
    (z+2), which is continuous off [-2, 2] and asymptotic to z at infinity,
    so m(z) -> 0 there and m^2 - z*m + 1 = 0 holds identically.
    """
    z = np.asarray(z, dtype=np.complex128)
    on_cut = (z.imag == 0.0) & (np.abs(z.real) <= 2.0)
    if np.any(on_cut):
        raise DomainError("stieltjes transform is undefined on the cut [-2, 2]")
    root = np.sqrt(z - 2.0) * np.sqrt(z + 2.0)
    m = (z - root) / 2.0
    return m if m.ndim else complex(m)


@dataclass(frozen=True)
class QuantileTable:
    """Typical locations gamma_0 <= ... <= gamma_{N-1} of the semicircle law."""

    n: int
    gamma: np.ndarray = field(repr=False)

    def __post_init__(self):
        g = np.asarray(self.gamma, dtype=np.float64)
        if g.shape != (self.n,):
            raise DomainError("gamma must have shape (n,)")
        if not np.all(np.diff(g) > 0):
            raise DomainError("gamma must be strictly increasing")
        object.__setattr__(self, "gamma", g)
        g.setflags(write=False)

    def gaps(self):
        """Neighbour gap min(gamma_{j+1}-gamma_j, gamma_j-gamma_{j-1}) per j."""
        d = np.diff(self.gamma)
        left = np.concatenate(([np.inf], d))
        right = np.concatenate((d, [np.inf]))
        return np.minimum(left, right)

    def to_csv(self, path):
        with open(path, "w", newline="") as fh:
            writer = csv.writer(fh)
            writer.writerow(["index", "gamma"])
            for k, g in enumerate(self.gamma):
                writer.writerow([k, repr(float(g))])


def typical_locations(n):
    """Quantile table with cdf(gamma_k) = (k + 1/2)/N, k = 0..N-1.

    Bisection to 1e-12 followed by two Newton polish steps on the
    closed-form CDF.
    """
    if n < 1:
        raise DomainError("n must be >= 1")
    q = (np.arange(n) + 0.5) / n
    lo = np.full(n, -2.0)
    hi = np.full(n, 2.0)
    for _ in range(45):  # 4 / 2^45 < 1e-12
        mid = 0.5 * (lo + hi)
        below = cdf(mid) < q
        lo = np.where(below, mid, lo)
        hi = np.where(below, hi, mid)
    g = 0.5 * (lo + hi)
    for _ in range(2):
        g = g - (cdf(g) - q) / np.maximum(density(g), 1e-300)
        g = np.clip(g, -2.0, 2.0)
    return QuantileTable(n=n, gamma=g)


@dataclass(frozen=True)
class RigidityReport:
    violations: np.ndarray
    max_scaled_dev: float
    xi: float


def rigidity_report(values, table, xi):
    """Flag indices with |x_i - gamma_i| > N^(-2/3+xi) * ihat^(-1/3).

    ihat = min(i+1, N-i) is the distance from the spectral edge (1-based).
    max_scaled_dev is measured against the xi-free scale
    N^(-2/3) * ihat^(-1/3).  Accepts a Spectrum or a plain array.
    """
    if xi <= 0:
        raise DomainError("xi must be positive")
    values = values.values if hasattr(values, "values") else values
    x = np.asarray(values, dtype=np.float64)
    n = table.n
    if x.shape != (n,):
        raise DomainError("spectrum length must match the quantile table")
    i = np.arange(n)
    ihat = np.minimum(i + 1, n - i)
    dev = np.abs(x - table.gamma)
    base = float(n) ** (-2.0 / 3.0) * ihat ** (-1.0 / 3.0)
    threshold = float(n) ** (-2.0 / 3.0 + xi) * ihat ** (-1.0 / 3.0)
    violations = np.nonzero(dev > threshold)[0]
    return RigidityReport(
        violations=violations,
        max_scaled_dev=float(np.max(dev / base)),
        xi=float(xi),
    )


def semicircle_quadrature(m):
    """Nodes/weights (x, w) with sum w_i f(x_i) ~ integral of f against rho.

    Gauss-Legendre in the variable theta = arccos(x/2), which absorbs the
    edge square-root singularity.  The weights are nudged so that their
    floating-point sum is exactly 1, making quadrature of a constant exact.
    """
    nodes, weights = np.polynomial.legendre.leggauss(m)
    theta = 0.5 * np.pi * (nodes + 1.0)
    w = (0.5 * np.pi * weights) * (2.0 / np.pi) * np.sin(theta) ** 2
    x = 2.0 * np.cos(theta)
    order = np.argsort(x)
    x, w = x[order], w[order]
    for _ in range(10):
        s = np.sum(w)
        if s == 1.0:
            break
        k = int(np.argmax(w))
        w[k] -= s - 1.0
    return x, w
