"""Sampling of generalized Wigner matrices and the matrix Ornstein-Uhlenbeck flow.

All sampling is a pure function of (spec, seed): a given generator state
yields a bit-identical matrix.  Matrices are plain dense float64 arrays
wrapped in a thin symmetric container; the upper triangle is authoritative
and the lower triangle is mirrored on construction.
"""

import json
import struct
from dataclasses import dataclass, field

import numpy as np

from .errors import ConfigurationError, DomainError

__all__ = [
    "EnsembleSpec",
    "SymmetricMatrix",
    "Spectrum",
    "goe_profile",
    "flat_profile",
    "sample_generalized_wigner",
    "matrix_flow",
    "eigenvalues",
    "write_matrix",
    "read_matrix",
]

_MATRIX_MAGIC = b"DBMLMAT1"

_COLUMN_SUM_TOL = 1e-12


def goe_profile(n):
    """Variance profile of the Gaussian orthogonal ensemble: 1/N off the
    diagonal and 2/N on it, so the joint density is the beta=1 invariant one.
    Column sums equal 1 + 1/N; this documented deviation is accepted by the
    validator for kind="goe"."""
    prof = np.full((n, n), 1.0 / n)
    np.fill_diagonal(prof, 2.0 / n)
    return prof


def flat_profile(n):
    """Row-stochastic flat profile sigma_ij^2 = 1/N (Bernoulli default)."""
    return np.full((n, n), 1.0 / n)


@dataclass(frozen=True)
class EnsembleSpec:
    """Definition of a generalized Wigner law.

    kind is one of "goe", "bernoulli", "custom".  A custom spec must supply
    ``sampler(rng, size) -> array`` drawing i.i.d. standardized entries
    (mean 0, variance 1, finite moment of order moment_p); entries are then
    scaled by sigma_ij.  bounds = (c, C) are the non-degeneracy constants:
    c/N <= sigma_ij^2 <= C/N.
    """

    n: int
    kind: str = "goe"
    variance_profile: np.ndarray | None = field(default=None, repr=False)
    moment_p: float = 10.0
    seed: int | None = None
    sampler: object = None
    bounds: tuple = (0.5, 2.5)

    def __post_init__(self):
        if self.n < 1:
            raise ConfigurationError("matrix size must be positive")
        if self.kind not in ("goe", "bernoulli", "custom"):
            raise ConfigurationError(f"unknown ensemble kind {self.kind!r}")
        if self.moment_p <= 0:
            raise ConfigurationError("moment_p must be positive")
        if self.kind == "custom" and self.sampler is None:
            raise ConfigurationError("custom ensembles need an entry sampler")
        prof = self.variance_profile
        if prof is None:
            prof = goe_profile(self.n) if self.kind == "goe" else flat_profile(self.n)
        prof = np.asarray(prof, dtype=np.float64)
        object.__setattr__(self, "variance_profile", prof)
        self._validate_profile()
        prof.setflags(write=False)

    def _validate_profile(self):
        prof = self.variance_profile
        n = self.n
        if prof.shape != (n, n):
            raise ConfigurationError("variance profile must be N x N")
        if not np.allclose(prof, prof.T, rtol=0.0, atol=0.0):
            raise ConfigurationError("variance profile must be symmetric")
        c, big_c = self.bounds
        if c <= 0 or big_c <= 0:
            raise ConfigurationError("non-degeneracy bounds must be positive")
        if np.any(prof < c / n - 1e-15) or np.any(prof > big_c / n + 1e-15):
            raise ConfigurationError("variance profile violates c/N <= sigma^2 <= C/N")
        colsum = prof.sum(axis=0)
        target = 1.0 + 1.0 / n if self.kind == "goe" else 1.0
        if np.max(np.abs(colsum - target)) > _COLUMN_SUM_TOL:
            raise ConfigurationError(
                f"column sums deviate from {target} beyond {_COLUMN_SUM_TOL}"
            )

    def to_json_dict(self):
        doc = {"n": self.n, "kind": self.kind, "moment_p": self.moment_p}
        if self.seed is not None:
            doc["seed"] = self.seed
        return doc

    def to_json(self):
        return json.dumps(self.to_json_dict(), sort_keys=True)

    @classmethod
    def from_json_dict(cls, doc):
        return cls(
            n=int(doc["n"]),
            kind=doc.get("kind", "goe"),
            moment_p=float(doc.get("moment_p", 10.0)),
            seed=doc.get("seed"),
        )

    @classmethod
    def from_json(cls, text):
        return cls.from_json_dict(json.loads(text))


class SymmetricMatrix:
    """Dense real symmetric matrix; h_ij == h_ji exactly by construction."""

    __slots__ = ("n", "array")

    def __init__(self, entries):
        a = np.array(entries, dtype=np.float64)
        if a.ndim != 2 or a.shape[0] != a.shape[1]:
            raise DomainError("entries must be a square matrix")
        upper = np.triu(a)
        a = upper + upper.T - np.diag(np.diag(a))
        a.setflags(write=False)
        self.n = a.shape[0]
        self.array = a

    def __array__(self, dtype=None, copy=None):
        return np.asarray(self.array, dtype=dtype)


@dataclass(frozen=True)
class Spectrum:
    """Ordered eigenvalues plus a provenance record."""

    values: np.ndarray
    source: dict = field(default_factory=dict)

    def __post_init__(self):
        v = np.asarray(self.values, dtype=np.float64)
        if np.any(np.diff(v) < 0):
            raise DomainError("spectrum values must be ascending")
        object.__setattr__(self, "values", v)
        v.setflags(write=False)

    @property
    def n(self):
        return self.values.shape[0]


def sample_generalized_wigner(spec, rng):
    """Draw a symmetric matrix with independent centered upper-triangle
    entries of variance sigma_ij^2 from the spec's profile."""
    n = spec.n
    iu = np.triu_indices(n)
    sigma = np.sqrt(spec.variance_profile[iu])
    m = sigma.shape[0]
    if spec.kind == "goe":
        raw = rng.standard_normal(m)
    elif spec.kind == "bernoulli":
        raw = rng.integers(0, 2, size=m) * 2.0 - 1.0
    else:
        raw = np.asarray(spec.sampler(rng, m), dtype=np.float64)
        if raw.shape != (m,):
            raise ConfigurationError("custom sampler returned a wrong shape")
    h = np.zeros((n, n))
    h[iu] = sigma * raw
    return SymmetricMatrix(h)


def matrix_flow(h0, t, rng):
    """Ornstein-Uhlenbeck matrix flow: e^{-t/2} H0 + (1-e^{-t})^{1/2} G with
    G an independent GOE sample.  Distributionally equal to the SDE solution
    started at H0."""
    if t < 0:
        raise DomainError("flow time must be nonnegative")
    h0 = h0 if isinstance(h0, SymmetricMatrix) else SymmetricMatrix(h0)
    if t == 0:
        return h0
    g = sample_generalized_wigner(EnsembleSpec(n=h0.n, kind="goe"), rng)
    decay = np.exp(-t / 2.0)
    return SymmetricMatrix(decay * h0.array + np.sqrt(1.0 - decay * decay) * g.array)


def eigenvalues(m, check=False, source=None):
    """Ascending spectrum of a symmetric matrix.

    With check=True the eigenvector residuals ||(M - lambda I) v|| are
    verified against 1e-10 * ||M||_2.
    """
    a = m.array if isinstance(m, SymmetricMatrix) else np.asarray(m, dtype=np.float64)
    if not np.all(np.isfinite(a)):
        raise DomainError("matrix entries must be finite")
    if check:
        vals, vecs = np.linalg.eigh(a)
        norm = max(np.max(np.abs(vals)), 1e-300)
        resid = np.linalg.norm(a @ vecs - vecs * vals, axis=0)
        if np.max(resid) > 1e-10 * norm:
            raise ConfigurationError("eigensolver residual exceeds 1e-10 * ||M||")
    else:
        vals = np.linalg.eigvalsh(a)
    return Spectrum(values=vals, source=dict(source or {}))


def write_matrix(path, m):
    """Binary dump: 8-byte magic, uint64 N, then row-major float64 entries."""
    a = m.array if isinstance(m, SymmetricMatrix) else np.asarray(m, dtype=np.float64)
    with open(path, "wb") as fh:
        fh.write(_MATRIX_MAGIC)
        fh.write(struct.pack("<Q", a.shape[0]))
        fh.write(np.ascontiguousarray(a, dtype="<f8").tobytes())


def read_matrix(path):
    with open(path, "rb") as fh:
        magic = fh.read(8)
        if magic != _MATRIX_MAGIC:
            raise DomainError("not a matrix dump (bad magic)")
        (n,) = struct.unpack("<Q", fh.read(8))
        data = np.frombuffer(fh.read(8 * n * n), dtype="<f8").reshape(n, n)
    return SymmetricMatrix(data)
