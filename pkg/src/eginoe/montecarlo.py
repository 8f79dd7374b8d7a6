"""Monte Carlo sampling of the real elliptic Ginibre ensemble.

Matrices are built as ``sqrt((1+tau)/2) S + sqrt((1-tau)/2) A`` with ``S``
from the GOE and ``A`` antisymmetric Gaussian, normalised so that
``E M_ij^2 = 1/N`` off the diagonal. Real eigenvalues are counted from the
block structure of the real Schur form.

Reproducibility: the requested samples are cut into fixed-size chunks and
chunk ``c`` draws from ``numpy.random.PCG64(SeedSequence(seed, spawn_key=(c,)))``.
Workers receive whole chunks, so the histogram depends only on the seed and
the sample count, never on the number of workers or on scheduling.
"""

from __future__ import annotations

import hashlib
import math
from collections import Counter
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field

import numpy as np
from scipy.linalg import lapack
from scipy.stats import norm

from ._linalg import count_real_batch, hessenberg_eigenvalues
from .errors import ConfigurationError, NumericalError

SCHEMA_VERSION = 1
CHUNK_SIZE = 1000
DISC_TOL = 1e-11
MAX_FAILURE_FRACTION = 1e-4
FRANCIS_MAX_N = 64


@dataclass(frozen=True)
class SamplerConfig:
    """Sampling job description.

    ``backend`` selects the Schur-form counter: ``"francis"`` (own numba
    Hessenberg + Francis double-shift QR), ``"lapack"`` (LAPACK ``dgees``) or
    ``"auto"`` (own solver for N <= 64, LAPACK above). ``construction``
    selects the GOE + antisymmetric sampler or the direct correlated-pair one.
    """

    N: int
    tau: float
    samples: int
    seed: int
    workers: int = 1
    backend: str = "auto"
    construction: str = "goe"

    def __post_init__(self):
        if int(self.N) != self.N or self.N < 2 or self.N % 2:
            raise ConfigurationError("N must be an even integer >= 2")
        if not (-1.0 < self.tau <= 1.0):
            raise ConfigurationError("tau must lie in (-1, 1]")
        if int(self.samples) != self.samples or self.samples < 1:
            raise ConfigurationError("samples must be a positive integer")
        if int(self.seed) != self.seed or not (0 <= self.seed < 2**64):
            raise ConfigurationError("seed must be a 64-bit unsigned integer")
        if int(self.workers) != self.workers or self.workers < 1:
            raise ConfigurationError("workers must be a positive integer")
        if self.backend not in ("auto", "francis", "lapack"):
            raise ConfigurationError(f"unknown backend {self.backend!r}")
        if self.construction not in ("goe", "direct"):
            raise ConfigurationError(f"unknown construction {self.construction!r}")

    @property
    def resolved_backend(self) -> str:
        if self.backend != "auto":
            return self.backend
        return "francis" if self.N <= FRANCIS_MAX_N else "lapack"


@dataclass(frozen=True)
class EmpiricalCounts:
    """Histogram of real-eigenvalue counts.

    ``samples`` is the number of counted matrices; ``failures`` counts
    matrices on which the Schur iteration did not converge (excluded).
    """

    N: int
    tau: float
    samples: int
    seed: int
    histogram: dict = field(default_factory=dict)
    failures: int = 0

    def __post_init__(self):
        if sum(self.histogram.values()) != self.samples:
            raise ValueError("histogram total differs from samples")
        for k in self.histogram:
            if k % 2 or not (0 <= k <= self.N):
                raise ValueError(f"invalid count {k}")

    def values(self) -> np.ndarray:
        """All sampled counts, expanded from the histogram in ascending order."""
        ks = sorted(self.histogram)
        return np.repeat(np.array(ks, dtype=np.int64), [self.histogram[k] for k in ks])

    def frequency(self, k: int) -> float:
        return self.histogram.get(k, 0) / self.samples

    def mean(self) -> float:
        return float(np.mean(self.values()))

    def variance(self) -> float:
        return float(np.var(self.values(), ddof=1))

    def to_json(self, tau_or_alpha: float | None = None) -> dict:
        return {
            "schema_version": SCHEMA_VERSION,
            "N": self.N,
            "tau_or_alpha": self.tau if tau_or_alpha is None else tau_or_alpha,
            "samples": self.samples,
            "seed": self.seed,
            "counts": {str(k): self.histogram[k] for k in sorted(self.histogram)},
        }


# ---------------------------------------------------------------------------
# Sampling


def sample_matrix(N: int, tau: float, rng: np.random.Generator, construction: str = "goe") -> np.ndarray:
    """One N x N eGinOE matrix with ``Cov(M_ij, M_ji) = tau/N``.

    Examples
    --------
    >>> m = sample_matrix(4, 1.0, np.random.default_rng(0))
    >>> bool((m == m.T).all())
    True
    """
    a = math.sqrt((1.0 + tau) / 2.0)
    b = math.sqrt((1.0 - tau) / 2.0)
    scale = 1.0 / math.sqrt(N)
    if construction == "goe":
        g = rng.standard_normal((N, N))
        h = rng.standard_normal((N, N))
        s = (g + g.T) * (scale / math.sqrt(2.0))
        anti = (h - h.T) * (scale / math.sqrt(2.0))
        return a * s + b * anti
    if construction == "direct":
        z1 = rng.standard_normal((N, N))
        z2 = rng.standard_normal((N, N))
        up = np.triu(z1, 1)
        sym = (up + up.T) * a * scale
        up2 = np.triu(z2, 1)
        asym = (up2 - up2.T) * b * scale
        diag = np.diag(np.diag(z1)) * math.sqrt(1.0 + tau) * scale
        return sym + asym + diag
    raise ConfigurationError(f"unknown construction {construction!r}")


def _matrix_hash(matrix: np.ndarray) -> str:
    return hashlib.sha256(np.ascontiguousarray(matrix, dtype=np.float64).tobytes()).hexdigest()[:16]


def _count_from_schur(t: np.ndarray, tol: float) -> int:
    # 1x1 blocks are real; 2x2 blocks are split when their discriminant is
    # >= -tol * scale, exactly as in the own Francis iteration
    n = t.shape[0]
    count = 0
    i = 0
    while i < n:
        if i + 1 < n and t[i + 1, i] != 0.0:
            p = 0.5 * (t[i, i] - t[i + 1, i + 1])
            w = t[i + 1, i] * t[i, i + 1]
            q = p * p + w
            if q >= -tol * (p * p + abs(w)):
                count += 2
            i += 2
        else:
            count += 1
            i += 1
    return count


def _count_lapack(matrix: np.ndarray, tol: float) -> int:
    a = np.array(matrix, dtype=np.float64, order="F")
    t, sdim, wr, wi, vs, work, info = lapack.dgees(lambda x, y: None, a, compute_v=0, sort_t=0, overwrite_a=1)
    if info != 0:
        return -1
    return _count_from_schur(t, tol)


def count_real_eigenvalues(matrix, tol: float = DISC_TOL, backend: str = "francis") -> int:
    """Number of real eigenvalues from the real Schur form.

    Examples
    --------
    >>> count_real_eigenvalues([[0.0, 1.0], [-1.0, 0.0]])
    0
    >>> count_real_eigenvalues([[1.0, 0.0], [0.0, 2.0]])
    2
    """
    a = np.asarray(matrix, dtype=np.float64)
    if a.ndim != 2 or a.shape[0] != a.shape[1]:
        raise ConfigurationError("expected a square matrix")
    if backend == "francis":
        try:
            _, wi = hessenberg_eigenvalues(a, tol)
        except NumericalError:
            raise NumericalError(f"Francis QR did not converge for matrix {_matrix_hash(a)}") from None
        return int(np.count_nonzero(wi == 0.0))
    if backend == "lapack":
        c = _count_lapack(a, tol)
        if c < 0:
            raise NumericalError(f"dgees did not converge for matrix {_matrix_hash(a)}")
        return c
    raise ConfigurationError(f"unknown backend {backend!r}")


def chunk_generator(seed: int, chunk: int) -> np.random.Generator:
    """Generator for chunk ``chunk``: PCG64 seeded by ``SeedSequence(seed, spawn_key=(chunk,))``."""
    return np.random.Generator(np.random.PCG64(np.random.SeedSequence(seed, spawn_key=(chunk,))))


def _chunk_sizes(samples: int) -> list[int]:
    full, rest = divmod(samples, CHUNK_SIZE)
    return [CHUNK_SIZE] * full + ([rest] if rest else [])


def _run_chunk(args) -> tuple[Counter, int]:
    N, tau, seed, chunk, size, backend, construction = args
    rng = chunk_generator(seed, chunk)
    mats = np.empty((size, N, N))
    for i in range(size):
        mats[i] = sample_matrix(N, tau, rng, construction)
    if backend == "francis":
        counts = count_real_batch(mats, DISC_TOL)
    else:
        counts = np.array([_count_lapack(m, DISC_TOL) for m in mats], dtype=np.int64)
    ok = counts[counts >= 0]
    if np.any(ok % 2 != N % 2):
        raise NumericalError("sampled count with wrong parity")
    return Counter(int(k) for k in ok), int(np.count_nonzero(counts < 0))


def run(config: SamplerConfig) -> EmpiricalCounts:
    """Sample ``config.samples`` matrices and histogram their real-eigenvalue counts."""
    backend = config.resolved_backend
    jobs = [
        (config.N, float(config.tau), int(config.seed), c, size, backend, config.construction)
        for c, size in enumerate(_chunk_sizes(config.samples))
    ]
    if config.workers == 1 or len(jobs) == 1:
        results = [_run_chunk(j) for j in jobs]
    else:
        with ProcessPoolExecutor(max_workers=config.workers) as pool:
            results = list(pool.map(_run_chunk, jobs))
    hist: Counter = Counter()
    failures = 0
    for h, f in results:
        hist.update(h)
        failures += f
    if failures > MAX_FAILURE_FRACTION * config.samples:
        raise NumericalError(f"{failures} of {config.samples} samples failed to converge")
    return EmpiricalCounts(config.N, float(config.tau), config.samples - failures, int(config.seed), dict(sorted(hist.items())), failures)


# ---------------------------------------------------------------------------
# CLT check


@dataclass(frozen=True)
class CltReport:
    samples: int
    mean_exact: float
    sigma2_pred: float
    sample_variance: float
    relative_variance_error: float
    ks_distance: float


def _ks_lattice(values: np.ndarray, mean: float, sigma: float, step: float) -> float:
    # Kolmogorov distance between the empirical CDF of lattice data (spacing
    # ``step``) and a normal CDF evaluated half a spacing above each point
    ks = np.unique(values)
    n = values.size
    emp = np.searchsorted(np.sort(values), ks, side="right") / n
    model = norm.cdf((ks + 0.5 * step - mean) / sigma)
    d = np.abs(emp - model)
    # just below the lowest observed value the empirical CDF is 0
    below = norm.cdf((ks[0] - 0.5 * step - mean) / sigma)
    return float(max(d.max(), below, 1.0 - norm.cdf((ks[-1] + 0.5 * step - mean) / sigma)))


def clt_check(counts: EmpiricalCounts, sigma2_pred: float, mean_exact: float | None = None) -> CltReport:
    """Standardise counts by the exact mean and compare with N(0, sigma2_pred).

    Counts are standardised as ``(k - E N) / sqrt(E N)`` with ``E N = 2 Tr M``
    computed from the spectrum unless given. The Kolmogorov distance uses a
    continuity correction of half the lattice spacing (counts move in steps
    of 2).
    """
    if counts.samples < 1000:
        raise ConfigurationError("clt_check requires at least 1000 samples")
    if mean_exact is None:
        from .spectrum import compute_spectrum, trace_power

        mean_exact = 2.0 * trace_power(compute_spectrum(counts.N // 2, counts.tau), 1)
    v = counts.values().astype(np.float64)
    z = (v - mean_exact) / math.sqrt(mean_exact)
    var = float(np.var(z, ddof=1))
    if sigma2_pred == 0.0:
        rel = 0.0 if var == 0.0 else math.inf
        ks = 0.0 if var == 0.0 else 1.0
    else:
        rel = abs(var - sigma2_pred) / sigma2_pred
        ks = _ks_lattice(v, mean_exact, math.sqrt(sigma2_pred * mean_exact), 2.0)
    return CltReport(counts.samples, float(mean_exact), float(sigma2_pred), var, rel, ks)
