"""Capacity growth on long intervals.

For integrable positive covariances ``C(a) / a -> 1 / (2 int_0^inf R)``.  For
covariances decaying like ``t**-beta`` (``0 < beta < 1``) instead
``R(a) C(a) -> 1 / E_beta``, with ``E_beta`` the minimal energy of ``[0, 1]``
under the Riesz kernel ``|u - v|**-beta``.  ``E_beta`` has no closed form
but lies between half the energy of the uniform measure and that energy.
"""

import math
from dataclasses import dataclass, field

import numpy as np
from scipy import integrate

from ._validation import check_scalar
from .capacity import DEFAULT_TOL, min_energy
from .exceptions import Divergent, ValidationError
from .geometry import straight_line
from .kernels import Riesz

__all__ = [
    "AsymptoticsReport",
    "covariance_integral",
    "short_memory_limit",
    "riesz_uniform_energy",
    "riesz_bounds",
    "riesz_min_energy",
    "long_memory_limit",
    "short_memory_report",
    "long_memory_report",
]


@dataclass
class AsymptoticsReport:
    kind: str
    predicted_limit: float
    observed: list = field(default_factory=list)
    bounds: tuple = None

    def to_dict(self):
        return {
            "kind": self.kind,
            "predicted_limit": self.predicted_limit,
            "observed": [list(pair) for pair in self.observed],
            "bounds": None if self.bounds is None else list(self.bounds),
        }


def covariance_integral(kernel, tail_tol=1e-10, max_doublings=80):
    """``int_0^inf R(t) dt`` for a stationary kernel.

    Kernels with a closed-form tail are integrated adaptively up to a cutoff
    where the tail drops below ``tail_tol`` and the tail is added exactly.
    Otherwise the range is doubled until a further doubling adds less than
    ``tail_tol``; if the increments stop shrinking the integral is declared
    divergent.

    Returns ``(value, tail_bound)``.
    """
    if not getattr(kernel, "stationary", False) or kernel.singular_diagonal:
        raise ValidationError("covariance_integral needs a stationary kernel")
    R = lambda t: float(kernel.lag(t))
    scale = getattr(kernel, "scale", 1.0)
    if hasattr(kernel, "tail_integral"):
        T = scale
        while kernel.tail_integral(T) > tail_tol * 1e-3:
            T *= 2.0
        body, err = integrate.quad(R, 0.0, T, epsabs=1e-14, epsrel=1e-13, limit=200)
        tail = kernel.tail_integral(T)
        return body + tail, tail + err

    total, err = integrate.quad(R, 0.0, scale, epsabs=1e-14, epsrel=1e-13, limit=200)
    T = scale
    prev = math.inf
    growing = 0
    for _ in range(max_doublings):
        piece, e = integrate.quad(R, T, 2.0 * T, epsabs=1e-14, epsrel=1e-13, limit=200)
        total += piece
        err += e
        T *= 2.0
        if abs(piece) < tail_tol and R(T) * T < tail_tol:
            return total, abs(piece)
        growing = growing + 1 if abs(piece) >= prev else 0
        if growing >= 3:
            raise Divergent(f"integral of R does not converge (pieces stop shrinking near t={T:g})")
        prev = abs(piece)
    raise Divergent(f"integral of R not converged by t={T:g}")


def short_memory_limit(kernel):
    """Limit of ``C(a) / a`` as ``a -> inf``: ``1 / (2 int_0^inf R)``."""
    if not np.all(kernel.lag(np.linspace(0.0, 10.0 * getattr(kernel, "scale", 1.0), 101)) > 0):
        raise ValidationError("short-memory limit needs a positive covariance")
    value, _ = covariance_integral(kernel)
    return 1.0 / (2.0 * value)


def riesz_uniform_energy(beta):
    """Energy of the uniform measure on [0, 1] under ``|u - v|**-beta``."""
    return 2.0 / ((1.0 - beta) * (2.0 - beta))


def riesz_bounds(beta):
    """Open interval containing ``1 / E_beta``."""
    upper = (1.0 - beta) * (2.0 - beta)
    return upper / 2.0, upper


def _check_beta(beta):
    return check_scalar(beta, "beta", lower=0.0, upper=1.0, lower_inclusive=False,
                        upper_inclusive=False)


def riesz_min_energy(beta, n=801, tol=DEFAULT_TOL):
    """Minimal Riesz energy of ``[0, 1]`` on an ``n``-point grid.

    Returns ``(energy, measure)``.
    """
    beta = _check_beta(beta)
    rep = min_energy(Riesz(beta), straight_line([0.0], [1.0]), n=n, tol=tol)
    return rep.energy, rep.measure


def long_memory_limit(beta, n=801, tol=DEFAULT_TOL):
    """Limit of ``R(a) C(a)`` for covariances decaying like ``t**-beta``."""
    energy, _ = riesz_min_energy(beta, n=n, tol=tol)
    return 1.0 / energy


def short_memory_report(kernel, lengths, n=401, tol=DEFAULT_TOL):
    """``C(a) / a`` at each length, against the predicted limit."""
    limit = short_memory_limit(kernel)
    observed = []
    for a in lengths:
        rep = min_energy(kernel, straight_line([0.0], [float(a)]), n=n, tol=tol)
        observed.append((float(a), rep.capacity / float(a)))
    return AsymptoticsReport("ShortMemory", limit, observed)


def long_memory_report(kernel, lengths, n=401, riesz_n=801, tol=DEFAULT_TOL):
    """``R(a) C(a)`` at each length, against ``1 / E_beta`` and its bounds."""
    beta = _check_beta(getattr(kernel, "beta", -1.0))
    limit = long_memory_limit(beta, n=riesz_n, tol=tol)
    observed = []
    for a in lengths:
        rep = min_energy(kernel, straight_line([0.0], [float(a)]), n=n, tol=tol)
        observed.append((float(a), float(kernel.lag(float(a))) * rep.capacity))
    return AsymptoticsReport("LongMemory", limit, observed, riesz_bounds(beta))
