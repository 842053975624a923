"""Monte Carlo checks on a discretized path.

The event simulated is ``X(p_i) > u`` at every grid point ``p_i`` of a fixed
path, estimated by exact Gaussian sampling through a Cholesky factor.  Blocks
of samples use independent streams spawned from one master seed, so results
do not depend on how many threads process them.
"""

import math
from dataclasses import dataclass

import numpy as np
from scipy import integrate, special

from ._parallel import ordered_map
from ._validation import as_points, check_scalar
from .exceptions import CholeskyFailure, DegenerateCorrelation, ValidationError

__all__ = [
    "McEstimate",
    "cholesky_factor",
    "sample_field",
    "estimate_exceedance",
    "exceedance_sweep",
    "two_point_prob",
    "log_slope",
]

Z95 = 1.959963984540054
_JITTERS = (0.0, 1e-14, 1e-12, 1e-10, 1e-9, 1e-8)


@dataclass(frozen=True)
class McEstimate:
    """Binomial estimate of an exceedance probability at level ``u``."""

    u: float
    hits: int
    n_samples: int
    seed: int = None

    @property
    def p_hat(self):
        return self.hits / self.n_samples

    @property
    def ci95(self):
        p = self.p_hat
        return Z95 * math.sqrt(p * (1.0 - p) / self.n_samples)

    def merge(self, other):
        if other.u != self.u:
            raise ValidationError("cannot merge estimates at different levels")
        return McEstimate(self.u, self.hits + other.hits, self.n_samples + other.n_samples, self.seed)

    def to_dict(self):
        return {"u": self.u, "p_hat": self.p_hat, "ci95": self.ci95, "hits": self.hits,
                "n_samples": self.n_samples, "seed": self.seed}


def cholesky_factor(Q):
    """Lower Cholesky factor of ``Q``, adding diagonal jitter up to ``1e-8 * max diag``."""
    Q = np.asarray(Q, dtype=float)
    scale = float(np.max(np.abs(np.diag(Q)))) or 1.0
    eye = np.eye(len(Q))
    for jitter in _JITTERS:
        try:
            return np.linalg.cholesky(Q + jitter * scale * eye)
        except np.linalg.LinAlgError:
            continue
    raise CholeskyFailure("covariance matrix is not positive semidefinite even with jitter 1e-8")


def _draw(L, n_samples, rng):
    return rng.standard_normal((n_samples, L.shape[0])) @ L.T


def sample_field(kernel, points, n_samples, seed):
    """``n_samples`` draws of the centered Gaussian vector ``(X(p_i))``; shape (n_samples, n_points)."""
    n_samples = check_scalar(n_samples, "n_samples", lower=1, integer=True)
    L = cholesky_factor(kernel.gram(as_points(points)))
    return _draw(L, n_samples, np.random.default_rng(seed))


def estimate_exceedance(samples, u, seed=None):
    """Fraction of rows whose every coordinate exceeds ``u``."""
    samples = np.asarray(samples, dtype=float)
    if samples.ndim == 1:
        samples = samples[:, None]
    if samples.size == 0:
        raise ValidationError("no samples")
    hits = int(np.count_nonzero(samples.min(axis=1) > u))
    return McEstimate(float(u), hits, samples.shape[0], seed)


def exceedance_sweep(kernel, points, levels, n_samples, seed, block_size=100_000, workers=None):
    """Exceedance estimates at several levels from one stream of samples.

    Samples are drawn in blocks of ``block_size``, block ``k`` using the
    ``k``-th stream spawned from ``seed``; only per-row minima are kept.
    """
    n_samples = check_scalar(n_samples, "n_samples", lower=1, integer=True)
    block_size = check_scalar(block_size, "block_size", lower=1, integer=True)
    levels = [float(u) for u in levels]
    L = cholesky_factor(kernel.gram(as_points(points)))
    sizes = [block_size] * (n_samples // block_size)
    if n_samples % block_size:
        sizes.append(n_samples % block_size)
    seqs = np.random.SeedSequence(seed).spawn(len(sizes))

    def block(job):
        size, seq = job
        mins = _draw(L, size, np.random.default_rng(seq)).min(axis=1)
        return [int(np.count_nonzero(mins > u)) for u in levels]

    counts = ordered_map(block, list(zip(sizes, seqs)), workers)
    totals = np.sum(counts, axis=0)
    return [McEstimate(u, int(c), n_samples, seed) for u, c in zip(levels, totals)]


def two_point_prob(kernel, a, u):
    """``P(X(0) > u, X(a) > u)`` for a stationary kernel, by 1-d quadrature.

    Conditioning on ``X(0) = x`` gives

        P = int_z^inf phi(x) Phi_bar((z - rho x) / sqrt(1 - rho^2)) dx,

    with ``z = u / sqrt(R(0))`` and ``rho = R(a) / R(0)``.
    """
    if not getattr(kernel, "stationary", False) or kernel.singular_diagonal:
        raise ValidationError("two_point_prob needs a stationary kernel with finite variance")
    r0 = kernel.r0
    rho = float(kernel.lag(a)) / r0
    if abs(rho) >= 1.0 - 1e-12:
        raise DegenerateCorrelation(f"correlation {rho!r} is too close to +-1")
    z = float(u) / math.sqrt(r0)
    s = math.sqrt(1.0 - rho * rho)
    f = lambda x: math.exp(-0.5 * x * x) / math.sqrt(2.0 * math.pi) * special.ndtr((rho * x - z) / s)
    # split at the bulk of phi past z so quad sees the peak
    mid = max(z, 0.0) + 8.0
    p1, _ = integrate.quad(f, z, mid, epsabs=1e-15, epsrel=1e-12, limit=200)
    p2, _ = integrate.quad(f, mid, np.inf, epsabs=1e-15, epsrel=1e-12, limit=200)
    return p1 + p2


def log_slope(p, u):
    """``-2 log(p) / u**2``; infinite when ``p == 0``."""
    if p <= 0:
        return math.inf
    return -2.0 * math.log(p) / (u * u)
