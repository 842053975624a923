"""Covariance kernels on R^d.

Every kernel is an immutable dataclass exposing

* ``pairwise(X, Y)`` -- the cross-covariance matrix between two point sets,
* ``eval(s, t)`` -- a single covariance value,
* ``gram(points, cell_width=None)`` -- the symmetric matrix used as the
  discrete energy form,
* ``diag(points)`` -- the variances ``R(p, p)``.

Stationary kernels are written through a one-dimensional profile
``R(r)`` of the Euclidean distance ``r = |s - t|``; all of them are
therefore isotropic in any dimension.
"""

import json
import math
from dataclasses import dataclass, field

import numpy as np
from scipy.spatial.distance import cdist

from ._validation import as_point, as_points, check_scalar
from .exceptions import DomainError, SingularDiagonal, ValidationError

__all__ = [
    "Kernel",
    "StationaryKernel",
    "GaussianSq",
    "OrnsteinUhlenbeck",
    "LongMemory",
    "Riesz",
    "BrownianSheet",
    "IsotropicTabulated",
    "Tabulated1D",
    "kernel_from_dict",
    "kernel_to_dict",
    "load_kernel",
    "riesz_cell_self_energy",
    "is_psd",
]

_JSON_FIELDS = {"kind", "scale", "beta", "dim", "table"}


def riesz_cell_self_energy(beta, h):
    """Mean of ``|u - v|**-beta`` over a square cell of side ``h``."""
    return 2.0 * h ** (-beta) / ((1.0 - beta) * (2.0 - beta))


class Kernel:
    """Base class; subclasses implement ``pairwise``."""

    kind = None
    stationary = False
    isotropic = False
    singular_diagonal = False
    dim = None

    def pairwise(self, X, Y):
        raise NotImplementedError

    def _points(self, X, name="points"):
        return as_points(X, self.dim, name=name)

    def eval(self, s, t):
        """Covariance ``R(s, t)`` between two single points."""
        s = as_point(s, "s")
        t = as_point(t, "t")
        return float(self.pairwise(s[None, :], t[None, :])[0, 0])

    def diag(self, X):
        X = self._points(X)
        return np.array([self.pairwise(x[None, :], x[None, :])[0, 0] for x in X])

    def gram(self, points, cell_width=None):
        """Gram matrix ``Q_ij = R(p_i, p_j)`` on a set of points."""
        P = self._points(points)
        Q = self.pairwise(P, P)
        return 0.5 * (Q + Q.T)

    def is_nonincreasing(self):
        return False

    def to_dict(self):
        return kernel_to_dict(self)


@dataclass(frozen=True)
class StationaryKernel(Kernel):
    """Kernel of the form ``R(|s - t|)`` with ``R`` a profile on ``[0, inf)``."""

    stationary = True
    isotropic = True

    def profile(self, r):
        raise NotImplementedError

    @property
    def r0(self):
        """The variance ``R(0)``."""
        return float(self.profile(np.zeros(1))[0])

    def pairwise(self, X, Y):
        X = self._points(X, "X")
        Y = self._points(Y, "Y")
        if X.shape[1] != Y.shape[1]:
            raise ValidationError("X and Y have different dimensions")
        if X.shape[1] == 1:
            r = np.abs(X[:, :1] - Y[:, 0][None, :])
        else:
            r = cdist(X, Y)
        return self.profile(r)

    def diag(self, X):
        X = self._points(X)
        return np.full(X.shape[0], self.r0)

    def lag(self, t):
        """Evaluate ``R`` at (an array of) signed lags."""
        return self.profile(np.abs(np.asarray(t, dtype=float)))

    def is_nonincreasing(self):
        return True


@dataclass(frozen=True)
class GaussianSq(StationaryKernel):
    """Squared-exponential covariance ``exp(-(r / scale)**2 / 2)``."""

    scale: float = 1.0
    dim: int = None
    kind = "gauss_sq"

    def __post_init__(self):
        check_scalar(self.scale, "scale", lower=0.0, lower_inclusive=False)
        _check_dim(self.dim)

    def profile(self, r):
        z = np.asarray(r, dtype=float) / self.scale
        return np.exp(-0.5 * z * z)

    def integral(self):
        """``int_0^inf R(t) dt`` in closed form."""
        return self.scale * math.sqrt(math.pi / 2.0)

    def tail_integral(self, T):
        return self.scale * math.sqrt(math.pi / 2.0) * math.erfc(T / (self.scale * math.sqrt(2.0)))


@dataclass(frozen=True)
class OrnsteinUhlenbeck(StationaryKernel):
    """Exponential covariance ``exp(-r / scale)``."""

    scale: float = 1.0
    dim: int = None
    kind = "ou"

    def __post_init__(self):
        check_scalar(self.scale, "scale", lower=0.0, lower_inclusive=False)
        _check_dim(self.dim)

    def profile(self, r):
        return np.exp(-np.asarray(r, dtype=float) / self.scale)

    def integral(self):
        return self.scale

    def tail_integral(self, T):
        return self.scale * math.exp(-T / self.scale)


@dataclass(frozen=True)
class LongMemory(StationaryKernel):
    """Regularly varying covariance ``(1 + (r / scale)**2) ** (-beta / 2)``.

    Decays like ``r**-beta`` with ``0 < beta < 1``, so it is not integrable.
    """

    beta: float = 0.5
    scale: float = 1.0
    dim: int = None
    kind = "long_memory"

    def __post_init__(self):
        check_scalar(self.beta, "beta", lower=0.0, upper=1.0,
                     lower_inclusive=False, upper_inclusive=False)
        check_scalar(self.scale, "scale", lower=0.0, lower_inclusive=False)
        _check_dim(self.dim)

    def profile(self, r):
        z = np.asarray(r, dtype=float) / self.scale
        return (1.0 + z * z) ** (-0.5 * self.beta)


@dataclass(frozen=True)
class Riesz(Kernel):
    """Riesz kernel ``|u - v| ** -beta``, singular on the diagonal.

    ``gram`` needs the grid spacing ``cell_width``: the diagonal entries are
    replaced by the exact mean of the kernel over a square cell of that side.
    """

    beta: float = 0.5
    dim: int = None
    kind = "riesz"
    stationary = True
    isotropic = True
    singular_diagonal = True

    def __post_init__(self):
        check_scalar(self.beta, "beta", lower=0.0, upper=1.0,
                     lower_inclusive=False, upper_inclusive=False)
        _check_dim(self.dim)

    def profile(self, r):
        r = np.asarray(r, dtype=float)
        if np.any(r <= 0.0):
            raise SingularDiagonal("Riesz kernel evaluated at zero distance")
        return r ** (-self.beta)

    def pairwise(self, X, Y):
        X = self._points(X, "X")
        Y = self._points(Y, "Y")
        r = np.abs(X[:, :1] - Y[:, 0][None, :]) if X.shape[1] == 1 else cdist(X, Y)
        return self.profile(r)

    def diag(self, X):
        raise SingularDiagonal("Riesz kernel has no finite variance")

    def gram(self, points, cell_width=None):
        if cell_width is None:
            raise SingularDiagonal("Riesz gram matrix needs cell_width")
        h = check_scalar(cell_width, "cell_width", lower=0.0, lower_inclusive=False)
        P = self._points(points)
        r = np.abs(P[:, :1] - P[:, 0][None, :]) if P.shape[1] == 1 else cdist(P, P)
        off = ~np.eye(len(P), dtype=bool)
        if np.any(r[off] <= 0.0):
            raise SingularDiagonal("Riesz gram matrix needs distinct points")
        Q = np.empty_like(r)
        Q[off] = r[off] ** (-self.beta)
        np.fill_diagonal(Q, riesz_cell_self_energy(self.beta, h))
        return 0.5 * (Q + Q.T)

    def is_nonincreasing(self):
        return True


@dataclass(frozen=True)
class BrownianSheet(Kernel):
    """Brownian sheet ``prod_j min(s_j, t_j)`` on the nonnegative orthant."""

    dim: int = 2
    kind = "brownian_sheet"

    def __post_init__(self):
        check_scalar(self.dim, "dim", lower=1, integer=True)

    def pairwise(self, X, Y):
        X = self._points(X, "X")
        Y = self._points(Y, "Y")
        if np.any(X < 0) or np.any(Y < 0):
            raise DomainError("Brownian sheet is defined on [0, inf)^d")
        out = np.ones((X.shape[0], Y.shape[0]))
        for j in range(self.dim):
            out *= np.minimum(X[:, j][:, None], Y[:, j][None, :])
        return out

    def diag(self, X):
        X = self._points(X)
        if np.any(X < 0):
            raise DomainError("Brownian sheet is defined on [0, inf)^d")
        return np.prod(X, axis=1)


@dataclass(frozen=True)
class _Tabulated(StationaryKernel):
    table: tuple = field(default=())
    dim: int = None

    def __post_init__(self):
        tab = np.asarray(self.table, dtype=float)
        if tab.ndim != 2 or tab.shape[1] != 2 or tab.shape[0] < 2:
            raise ValidationError("table must be a list of at least two [x, R] pairs")
        if not np.all(np.isfinite(tab)):
            raise ValidationError("table has non-finite entries")
        if tab[0, 0] != 0.0 or np.any(np.diff(tab[:, 0]) <= 0):
            raise ValidationError("table abscissae must start at 0 and increase strictly")
        if tab[0, 1] <= 0.0:
            raise ValidationError("table must have R(0) > 0")
        # normalized to a hashable tuple of pairs
        object.__setattr__(self, "table", tuple(map(tuple, tab.tolist())))
        _check_dim(self.dim)

    def profile(self, r):
        tab = np.asarray(self.table)
        # np.interp clamps to the end values outside the table
        return np.interp(np.asarray(r, dtype=float), tab[:, 0], tab[:, 1])


@dataclass(frozen=True)
class IsotropicTabulated(_Tabulated):
    """Covariance given as a nonincreasing table of ``R`` against distance."""

    kind = "tabulated"

    def __post_init__(self):
        super().__post_init__()
        vals = np.asarray(self.table)[:, 1]
        if np.any(np.diff(vals) > 0):
            raise ValidationError("isotropic table must be nonincreasing in distance")


@dataclass(frozen=True)
class Tabulated1D(_Tabulated):
    """One-dimensional stationary covariance given as a table of ``R`` against lag."""

    dim: int = 1
    kind = "tabulated"

    def __post_init__(self):
        super().__post_init__()
        if self.dim != 1:
            raise ValidationError("Tabulated1D is one-dimensional")

    def is_nonincreasing(self):
        return bool(np.all(np.diff(np.asarray(self.table)[:, 1]) <= 0))


def _check_dim(dim):
    if dim is not None:
        check_scalar(dim, "dim", lower=1, integer=True)


def is_psd(kernel, points, jitter=1e-10):
    """Numerical PSD check: Cholesky of the Gram matrix plus relative jitter."""
    Q = kernel.gram(points)
    scale = float(np.max(np.abs(np.diag(Q)))) or 1.0
    try:
        np.linalg.cholesky(Q + jitter * scale * np.eye(len(Q)))
    except np.linalg.LinAlgError:
        return False
    return True


def kernel_from_dict(spec):
    """Build a kernel from its JSON description.

    Recognised keys are ``kind``, ``scale``, ``beta``, ``dim`` and ``table``;
    anything else is rejected.
    """
    if not isinstance(spec, dict):
        raise ValidationError("kernel description must be a JSON object")
    unknown = set(spec) - _JSON_FIELDS
    if unknown:
        raise ValidationError(f"unknown kernel fields: {sorted(unknown)}")
    if "kind" not in spec:
        raise ValidationError("kernel description needs a 'kind'")
    kind = spec["kind"]
    scale = spec.get("scale", 1.0)
    dim = spec.get("dim")

    def reject(*names):
        bad = [n for n in names if n in spec]
        if bad:
            raise ValidationError(f"kernel kind {kind!r} does not take {bad}")

    if kind == "gauss_sq":
        reject("beta", "table")
        return GaussianSq(scale=scale, dim=dim)
    if kind == "ou":
        reject("beta", "table")
        return OrnsteinUhlenbeck(scale=scale, dim=dim)
    if kind == "long_memory":
        reject("table")
        return LongMemory(beta=spec.get("beta", 0.5), scale=scale, dim=dim)
    if kind == "riesz":
        reject("scale", "table")
        return Riesz(beta=spec.get("beta", 0.5), dim=dim)
    if kind == "brownian_sheet":
        reject("scale", "beta", "table")
        return BrownianSheet(dim=2 if dim is None else dim)
    if kind == "tabulated":
        reject("scale", "beta")
        if "table" not in spec:
            raise ValidationError("tabulated kernel needs a 'table'")
        if dim is not None and dim > 1:
            return IsotropicTabulated(table=spec["table"], dim=dim)
        return Tabulated1D(table=spec["table"])
    raise ValidationError(f"unknown kernel kind {kind!r}")


def kernel_to_dict(kernel):
    out = {"kind": kernel.kind}
    if isinstance(kernel, (GaussianSq, OrnsteinUhlenbeck)):
        out["scale"] = kernel.scale
    elif isinstance(kernel, LongMemory):
        out.update(beta=kernel.beta, scale=kernel.scale)
    elif isinstance(kernel, Riesz):
        out["beta"] = kernel.beta
    elif isinstance(kernel, _Tabulated):
        out["table"] = [list(row) for row in kernel.table]
    if kernel.dim is not None:
        out["dim"] = kernel.dim
    return out


def load_kernel(path):
    with open(path) as fh:
        try:
            spec = json.load(fh)
        except json.JSONDecodeError as exc:
            raise ValidationError(f"{path}: invalid JSON ({exc})") from exc
    return kernel_from_dict(spec)
