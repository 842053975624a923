"""Minimal-energy probability measures on a discretized path.

The discrete problem is the simplex-constrained quadratic program

    minimize  w' Q w   subject to  w >= 0,  sum(w) = 1,

where ``Q`` is the Gram matrix of the kernel on the path grid.  Its value
``E*`` is the minimal energy and ``1 / E*`` the capacity of the path.  A
feasible ``w`` is optimal exactly when its potential ``W = Q w`` satisfies
``min_i W_i = w' Q w`` (and then ``W_i = E*`` on the support).

The solver runs Frank-Wolfe with away steps from the uniform measure and
finishes with a primal active-set polish that solves the KKT system on the
support, which pins atomic solutions down to rounding error.
"""

import logging
from dataclasses import dataclass, field

import numpy as np
from sklearn.base import BaseEstimator, TransformerMixin
from sklearn.utils.validation import check_is_fitted

from ._validation import as_points, check_scalar, check_simplex
from .exceptions import NonConvergence, ValidationError
from .geometry import discretize, uniform_grid

__all__ = [
    "DiscreteMeasure",
    "CapacityReport",
    "QPResult",
    "energy",
    "certify",
    "extract_atoms",
    "solve_simplex_qp",
    "path_gram",
    "min_energy",
    "MinimalEnergyMeasure",
    "DEFAULT_TOL",
    "DEFAULT_ATOM_EPS",
]

logger = logging.getLogger(__name__)

DEFAULT_TOL = 1e-9
DEFAULT_ATOM_EPS = 0.05
DEFAULT_SUPPORT_EPS = 1e-10


@dataclass(frozen=True, eq=False)
class DiscreteMeasure:
    """Probability weights ``w`` at parameter locations ``u`` in ``[0, 1]``.

    Locations are usually a uniform grid but any increasing sequence is
    accepted, so closed-form atomic measures fit the same container.
    """

    u: np.ndarray
    w: np.ndarray

    def __post_init__(self):
        u = np.asarray(self.u, dtype=float).ravel()
        w = check_simplex(np.asarray(self.w, dtype=float).ravel())
        if u.shape != w.shape:
            raise ValidationError("u and w must have the same length")
        if np.any((u < 0) | (u > 1)) or np.any(np.diff(u) < 0):
            raise ValidationError("u must be nondecreasing within [0, 1]")
        object.__setattr__(self, "u", u)
        object.__setattr__(self, "w", w)

    @classmethod
    def uniform(cls, n):
        return cls(uniform_grid(n), np.full(n, 1.0 / n))

    @classmethod
    def atoms(cls, locations, masses):
        order = np.argsort(locations, kind="stable")
        return cls(np.asarray(locations, float)[order], np.asarray(masses, float)[order])

    @property
    def n(self):
        return len(self.w)

    def reversed(self):
        return DiscreteMeasure(1.0 - self.u[::-1], self.w[::-1])

    def to_rows(self):
        return list(zip(self.u.tolist(), self.w.tolist()))


@dataclass
class QPResult:
    w: np.ndarray
    energy: float
    potential: np.ndarray
    iterations: int
    converged: bool
    gap: float


@dataclass
class CapacityReport:
    """Outcome of a minimal-energy solve on one path grid."""

    energy: float
    capacity: float
    measure: DiscreteMeasure
    potential: np.ndarray
    residual_min: float
    residual_support: float
    iterations: int
    n: int
    converged: bool
    tol: float
    zero_energy: bool = False
    points: np.ndarray = field(default=None, repr=False)

    def atoms(self, atom_eps=DEFAULT_ATOM_EPS):
        return extract_atoms(self.measure, atom_eps)

    def to_dict(self):
        atoms, diffuse = self.atoms()
        return {
            "energy": self.energy,
            "capacity": self.capacity,
            "converged": self.converged,
            "zero_energy": self.zero_energy,
            "iterations": self.iterations,
            "n": self.n,
            "tol": self.tol,
            "residual_min": self.residual_min,
            "residual_support": self.residual_support,
            "atoms": [[loc, mass] for loc, mass in atoms],
            "diffuse_mass": diffuse,
            "measure": {"u": self.measure.u.tolist(), "w": self.measure.w.tolist()},
            "potential": self.potential.tolist(),
        }

    @classmethod
    def from_dict(cls, data):
        m = DiscreteMeasure(data["measure"]["u"], data["measure"]["w"])
        return cls(
            energy=float(data["energy"]),
            capacity=float(data["capacity"]),
            measure=m,
            potential=np.asarray(data["potential"], dtype=float),
            residual_min=float(data["residual_min"]),
            residual_support=float(data["residual_support"]),
            iterations=int(data["iterations"]),
            n=int(data["n"]),
            converged=bool(data["converged"]),
            tol=float(data["tol"]),
            zero_energy=bool(data["zero_energy"]),
        )


def _check_gram(Q, n=None):
    Q = np.asarray(Q, dtype=float)
    if Q.ndim != 2 or Q.shape[0] != Q.shape[1]:
        raise ValidationError("gram matrix must be square")
    if n is not None and Q.shape[0] != n:
        raise ValidationError(f"gram matrix is {Q.shape[0]}x{Q.shape[0]}, measure has {n} points")
    return Q


def energy(Q, m):
    """Quadratic form ``w' Q w`` of a measure against a Gram matrix."""
    w = m.w if isinstance(m, DiscreteMeasure) else check_simplex(m)
    Q = _check_gram(Q, len(w))
    return float(w @ Q @ w)


def certify(Q, m, support_eps=DEFAULT_SUPPORT_EPS):
    """Optimality residuals of a measure.

    Returns ``(residual_min, residual_support)`` where ``residual_min`` is
    ``E - min_i W_i`` and ``residual_support`` is the largest deviation
    ``|W_i - E|`` over points carrying more than ``support_eps`` mass.
    The measure has minimal energy iff the first is <= 0 (up to tolerance)
    and ``E > 0``.
    """
    w = m.w if isinstance(m, DiscreteMeasure) else check_simplex(m)
    Q = _check_gram(Q, len(w))
    p = Q @ w
    E = float(w @ p)
    supp = w > support_eps
    res_supp = float(np.max(np.abs(p[supp] - E))) if supp.any() else 0.0
    return E - float(p.min()), res_supp


def extract_atoms(m, atom_eps=DEFAULT_ATOM_EPS):
    """Split a grid measure into atoms and a diffuse remainder.

    Grid points holding more than ``1 / (atom_eps * n)`` mass (with the
    default 0.05, twenty times the uniform level) are heavy; each maximal
    run of consecutive heavy points becomes one atom at its mass-weighted
    centroid.  Everything else is counted as diffuse.  A diffuse density
    ``f`` puts about ``f / n`` on each point, so at ``n >= 201`` this keeps
    densities below ``1 / atom_eps`` out of the atoms.

    Returns ``(atoms, diffuse_mass)`` with ``atoms`` a list of
    ``(location, mass)`` pairs.
    """
    u, w = m.u, m.w
    n = len(w)
    heavy = w > 1.0 / (atom_eps * n)
    atoms = []
    i = 0
    while i < n:
        if not heavy[i]:
            i += 1
            continue
        j = i
        while j + 1 < n and heavy[j + 1]:
            j += 1
        mass = float(w[i:j + 1].sum())
        loc = float(np.dot(u[i:j + 1], w[i:j + 1]) / mass)
        atoms.append((loc, mass))
        i = j + 1
    diffuse = float(max(0.0, 1.0 - sum(mass for _, mass in atoms)))
    return atoms, diffuse


def _kkt_on_support(Qs):
    """Minimizer of ``x' Qs x`` on the affine plane ``sum(x) = 1``."""
    k = len(Qs)
    M = np.empty((k + 1, k + 1))
    M[:k, :k] = Qs
    M[:k, k] = 1.0
    M[k, :k] = 1.0
    M[k, k] = 0.0
    rhs = np.zeros(k + 1)
    rhs[k] = 1.0
    try:
        sol = np.linalg.solve(M, rhs)
    except np.linalg.LinAlgError:
        sol = np.linalg.lstsq(M, rhs, rcond=None)[0]
    if not np.all(np.isfinite(sol)):
        return None
    return sol[:k]


def _polish(Q, w, tol, max_steps):
    """Primal active-set method started from a feasible ``w``.

    Returns ``(w, steps, certified)``.  Every accepted step keeps ``w``
    feasible and does not increase the energy beyond rounding.
    """
    n = len(w)
    w = w.copy()
    S = np.zeros(n, dtype=bool)
    S[w > 0] = True
    f = float(w @ Q @ w)
    scale = float(np.max(np.abs(np.diag(Q)))) or 1.0
    for step in range(1, max_steps + 1):
        idx = np.flatnonzero(S)
        x = _kkt_on_support(Q[np.ix_(idx, idx)])
        if x is None:
            return w, step, False
        if np.all(x >= 0):
            trial = np.zeros(n)
            trial[idx] = x
            trial /= trial.sum()
            ft = float(trial @ Q @ trial)
            if ft > f + 1e-13 * scale:
                return w, step, False
            w, f = trial, ft
            p = Q @ w
            E = float(w @ p)
            outside = np.flatnonzero(~S)
            if outside.size == 0:
                return w, step, True
            j = outside[np.argmin(p[outside])]
            if E - p[j] <= tol * max(E, 0.0):
                return w, step, True
            S[j] = True
        else:
            d = x - w[idx]
            blocking = x < 0
            ratios = w[idx][blocking] / (w[idx][blocking] - x[blocking])
            k = int(np.argmin(ratios))
            alpha = float(ratios[k])
            trial = w.copy()
            trial[idx] = w[idx] + alpha * d
            drop = idx[np.flatnonzero(blocking)[k]]
            trial[drop] = 0.0
            trial = np.maximum(trial, 0.0)
            trial /= trial.sum()
            ft = float(trial @ Q @ trial)
            if ft > f + 1e-13 * scale:
                return w, step, False
            w, f = trial, ft
            S[drop] = False
            S &= w > 0
            if not S.any():
                return w, step, False
    return w, max_steps, False


def _is_persymmetric(Q):
    scale = float(np.max(np.abs(Q))) or 1.0
    return bool(np.max(np.abs(Q - Q[::-1, ::-1])) <= 1e-12 * scale)


def solve_simplex_qp(Q, tol=DEFAULT_TOL, max_iter=None, polish=True, symmetrize=None):
    """Minimize ``w' Q w`` over the probability simplex.

    Parameters
    ----------
    Q : (n, n) array
        Symmetric positive semidefinite matrix.
    tol : float
        Relative stopping tolerance on ``E - min_i (Q w)_i``.
    max_iter : int, optional
        Frank-Wolfe iteration budget; defaults to ``200 * n``.
    polish : bool
        Finish with the active-set KKT polish.
    symmetrize : bool, optional
        Average the solution with its reversal.  Defaults to doing so when
        ``Q`` is invariant under index reversal, where the averaged measure
        is optimal whenever the solution is.

    Returns
    -------
    QPResult
    """
    Q = _check_gram(Q)
    n = len(Q)
    tol = check_scalar(tol, "tol", lower=0.0, lower_inclusive=False)
    if max_iter is None:
        max_iter = 200 * n
    if symmetrize is None:
        symmetrize = _is_persymmetric(Q)
    diagQ = np.diag(Q).copy()

    w = np.full(n, 1.0 / n)
    p = Q @ w
    E = float(w @ p)
    it = 0
    polish_at = max(50, n // 4)
    best = None

    def gap_of(w_, p_, E_):
        return E_ - float(p_.min())

    converged = False
    while it < max_iter:
        s = int(np.argmin(p))
        fw_gap = E - p[s]
        if fw_gap <= tol * max(E, 0.0):
            converged = True
            break
        active = np.flatnonzero(w > 0)
        v = int(active[np.argmax(p[active])])
        away_gap = p[v] - E
        if fw_gap >= away_gap:
            # d = e_s - w
            dp = p[s] - E
            dQd = diagQ[s] - 2.0 * p[s] + E
            gmax = 1.0
            Qd = Q[:, s] - p
            direction = "fw"
        else:
            # d = w - e_v
            dp = E - p[v]
            dQd = E - 2.0 * p[v] + diagQ[v]
            gmax = w[v] / (1.0 - w[v]) if w[v] < 1.0 else np.inf
            Qd = p - Q[:, v]
            direction = "away"
        gamma = gmax if dQd <= 0 else min(gmax, -dp / dQd)
        if direction == "fw":
            w *= (1.0 - gamma)
            w[s] += gamma
        else:
            w *= (1.0 + gamma)
            w[v] -= gamma
            if gamma == gmax:
                w[v] = 0.0
        np.maximum(w, 0.0, out=w)
        p += gamma * Qd
        it += 1
        if it % 1000 == 0:
            # resync against drift in the incremental updates
            w /= w.sum()
            p = Q @ w
        E = float(w @ p)
        if polish and it % polish_at == 0:
            wp, steps, ok = _polish(Q, w, tol, max_steps=4 * n)
            if ok:
                w = wp
                it += steps
                converged = True
                break
            polish_at = int(polish_at * 1.5) + 1

    if polish and not converged:
        wp, steps, ok = _polish(Q, w, tol, max_steps=4 * n)
        it += steps
        if float(wp @ Q @ wp) <= float(w @ Q @ w) + 1e-15:
            w = wp
        converged = ok

    w /= w.sum()
    if symmetrize:
        ws = 0.5 * (w + w[::-1])
        ps = Q @ ws
        Es = float(ws @ ps)
        if gap_of(ws, ps, Es) <= max(gap_of(w, Q @ w, float(w @ Q @ w)), tol * max(Es, 0.0)):
            w = ws
    p = Q @ w
    E = float(w @ p)
    gap = E - float(p.min())
    converged = converged or gap <= tol * max(E, 0.0)
    return QPResult(w=w, energy=E, potential=p, iterations=it, converged=converged, gap=gap)


def path_gram(kernel, points, h=None):
    """Gram matrix on path points; singular kernels use cell width ``h``."""
    if kernel.singular_diagonal:
        if h is None:
            P = as_points(points)
            h = 1.0 / (len(P) - 1)
        return kernel.gram(points, cell_width=h)
    return kernel.gram(points)


def _report(res, u, tol, points=None, support_eps=DEFAULT_SUPPORT_EPS, Q=None):
    m = DiscreteMeasure(u, res.w)
    E = res.energy
    p = res.potential
    supp = res.w > support_eps
    res_supp = float(np.max(np.abs(p[supp] - E))) if supp.any() else 0.0
    zero = E <= tol
    return CapacityReport(
        energy=E,
        capacity=np.inf if zero else 1.0 / E,
        measure=m,
        potential=p,
        residual_min=E - float(p.min()),
        residual_support=res_supp,
        iterations=res.iterations,
        n=len(u),
        converged=res.converged,
        tol=tol,
        zero_energy=zero,
        points=points,
    )


def min_energy(kernel, path, n=401, tol=DEFAULT_TOL, max_iter=None, raise_on_failure=True):
    """Minimal energy and capacity of ``path`` under ``kernel``.

    The path is discretized on ``n`` equally spaced parameter values.  A
    nonpositive minimal energy (``<= tol``) is reported as infinite
    capacity with ``zero_energy=True`` rather than raised.

    Raises
    ------
    NonConvergence
        If the iteration budget runs out; the best iterate is attached as
        ``exc.report``.  Pass ``raise_on_failure=False`` to get the report
        back instead.
    """
    n = check_scalar(n, "n", lower=2, integer=True)
    grid = discretize(path, n)
    Q = path_gram(kernel, grid.points, h=grid.h)
    res = solve_simplex_qp(Q, tol=tol, max_iter=max_iter)
    report = _report(res, grid.u, tol, points=grid.points)
    if not res.converged:
        logger.warning("min_energy stopped after %d iterations, gap %.3g", res.iterations, res.gap)
        if raise_on_failure:
            raise NonConvergence(
                f"no convergence in {res.iterations} iterations (gap {res.gap:.3g})", report
            )
    return report


class MinimalEnergyMeasure(TransformerMixin, BaseEstimator):
    """Estimator wrapper around the minimal-energy solver.

    ``fit`` takes the ordered points of a discretized path (one row per
    point) and solves for the capacitary measure on them, taking the rows
    to sit at equally spaced parameter values.  ``transform`` evaluates the
    normalized potential ``C * sum_j R(x, p_j) w_j`` at new points, which on
    a one-dimensional interval is the limiting high-level shape.

    Parameters
    ----------
    kernel : Kernel
    tol : float, default=1e-9
    max_iter : int or None, default=None
    atom_eps : float, default=0.05
        Threshold used by ``atoms_``.

    Attributes
    ----------
    weights_, energy_, capacity_, potential_, residual_min_,
    residual_support_, n_iter_, converged_, points_, report_
    """

    def __init__(self, kernel=None, tol=DEFAULT_TOL, max_iter=None, atom_eps=DEFAULT_ATOM_EPS):
        self.kernel = kernel
        self.tol = tol
        self.max_iter = max_iter
        self.atom_eps = atom_eps

    def fit(self, X, y=None):
        if self.kernel is None:
            raise ValidationError("MinimalEnergyMeasure needs a kernel")
        X = as_points(X, self.kernel.dim, name="X")
        if len(X) < 2:
            raise ValidationError("need at least two path points")
        Q = path_gram(self.kernel, X, h=1.0 / (len(X) - 1))
        res = solve_simplex_qp(Q, tol=self.tol, max_iter=self.max_iter)
        self.report_ = _report(res, uniform_grid(len(X)), self.tol, points=X)
        self.points_ = X
        self.weights_ = res.w
        self.energy_ = self.report_.energy
        self.capacity_ = self.report_.capacity
        self.potential_ = res.potential
        self.residual_min_ = self.report_.residual_min
        self.residual_support_ = self.report_.residual_support
        self.n_iter_ = res.iterations
        self.converged_ = res.converged
        self.n_features_in_ = X.shape[1]
        return self

    @property
    def atoms_(self):
        check_is_fitted(self, "weights_")
        return extract_atoms(self.report_.measure, self.atom_eps)

    def potential(self, X):
        """``sum_j R(x, p_j) w_j`` at each row of ``X``."""
        check_is_fitted(self, "weights_")
        X = as_points(X, self.n_features_in_, name="X")
        supp = self.weights_ > 0
        return self.kernel.pairwise(X, self.points_[supp]) @ self.weights_[supp]

    def transform(self, X):
        check_is_fitted(self, "weights_")
        return (self.capacity_ * self.potential(X))[:, None]

    def score(self, X=None, y=None):
        """Minimal energy of the fitted path (higher means a rarer excursion)."""
        check_is_fitted(self, "weights_")
        return self.energy_
