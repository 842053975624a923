"""Capacities of paths in R^d.

The exponent for a high-level excursion connecting ``a`` and ``b`` is the
capacity of the best path, i.e. the path whose minimal energy is largest.
Finding that path is an open nonconvex problem; this module offers

* the endpoint sufficient condition, under which the two-atom measure
  ``(delta_a + delta_b) / 2`` is optimal and the path is globally best,
* a randomized check that no perturbed polyline beats the straight line
  for isotropic nonincreasing kernels, and
* a hill-climbing heuristic over polyline control points (no optimality
  guarantee).
"""

import logging
import math
from dataclasses import dataclass, field

import numpy as np

from ._parallel import ordered_map
from ._validation import as_point, check_scalar
from .capacity import DEFAULT_TOL, min_energy
from .exceptions import ValidationError
from .geometry import Path, polyline, straight_line
from .kernels import BrownianSheet

__all__ = [
    "PathSearchConfig",
    "EndpointCondition",
    "OptimalityCheck",
    "SearchResult",
    "check_endpoint_condition",
    "endpoint_capacity",
    "path_capacity",
    "perturbed_path",
    "straight_line_optimality_check",
    "path_search",
]

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class PathSearchConfig:
    """Settings for randomized path exploration.

    ``perturbation_scale`` is relative to ``|b - a|``.  ``n`` and ``tol`` are
    passed to every inner minimal-energy solve.
    """

    control_points: int = 8
    perturbation_scale: float = 0.1
    restarts: int = 4
    iters: int = 100
    seed: int = 0
    n: int = 201
    tol: float = DEFAULT_TOL

    def __post_init__(self):
        check_scalar(self.control_points, "control_points", lower=1, integer=True)
        check_scalar(self.perturbation_scale, "perturbation_scale", lower=0.0)
        check_scalar(self.restarts, "restarts", lower=1, integer=True)
        check_scalar(self.iters, "iters", lower=0, integer=True)
        check_scalar(self.seed, "seed", lower=0, integer=True)
        check_scalar(self.n, "n", lower=2, integer=True)
        check_scalar(self.tol, "tol", lower=0.0, lower_inclusive=False)


@dataclass
class EndpointCondition:
    holds: bool
    margin: float
    capacity: float


@dataclass
class OptimalityCheck:
    straight_energy: float
    best_perturbed_energy: float
    perturbed_energies: list


@dataclass
class SearchResult:
    path: Path
    report: object
    trace: list = field(default_factory=list)

    @property
    def energy(self):
        return self.report.energy


def endpoint_capacity(kernel, a, b):
    """``4 / (R(a,a) + 2 R(a,b) + R(b,b))``, the capacity when the endpoint condition holds."""
    raa, rab, rbb = kernel.eval(a, a), kernel.eval(a, b), kernel.eval(b, b)
    return 4.0 / (raa + 2.0 * rab + rbb)


def check_endpoint_condition(kernel, path, grid=2001):
    """Test ``R(a, xi(u)) + R(xi(u), b) >= (R(a,a) + 2 R(a,b) + R(b,b)) / 2 > 0``.

    The inequality is checked at ``grid`` equally spaced parameter values
    plus the path's vertices.  ``margin`` is the smallest left-minus-right
    difference.  When it holds, the path is optimal among all paths joining
    its endpoints and the capacity is ``endpoint_capacity``; otherwise the
    returned capacity is NaN.  The condition can only hold when both
    endpoints have the same variance.
    """
    grid = check_scalar(grid, "grid", lower=2, integer=True)
    a, b = path.start, path.end
    u = np.union1d(np.linspace(0.0, 1.0, grid), path.param)
    pts = path(u)
    lhs = kernel.pairwise(pts, a[None, :])[:, 0] + kernel.pairwise(pts, b[None, :])[:, 0]
    raa, rab, rbb = kernel.eval(a, a), kernel.eval(a, b), kernel.eval(b, b)
    rhs = 0.5 * (raa + 2.0 * rab + rbb)
    margin = float(np.min(lhs - rhs))
    tol = 1e-12 * max(abs(rhs), 1.0)
    holds = margin >= -tol and rhs > 0 and abs(raa - rbb) <= 1e-9 * max(abs(raa), 1.0)
    capacity = 4.0 / (2.0 * rhs) if holds else math.nan
    return EndpointCondition(bool(holds), margin, capacity)


def path_capacity(kernel, path, n=401, tol=DEFAULT_TOL):
    """Capacity report for a fixed path (see ``capacity.min_energy``)."""
    return min_energy(kernel, path, n=n, tol=tol)


def _interior_params(m):
    return np.arange(1, m + 1) / (m + 1)


def perturbed_path(a, b, cfg, rng):
    """Polyline through ``cfg.control_points`` jittered points of the segment ``ab``."""
    a = as_point(a, "a")
    b = as_point(b, "b")
    s = _interior_params(cfg.control_points)
    base = a + s[:, None] * (b - a)
    sigma = cfg.perturbation_scale * float(np.linalg.norm(b - a))
    ctrl = base + sigma * rng.standard_normal(base.shape)
    return polyline(np.vstack([a, ctrl, b]), np.concatenate([[0.0], s, [1.0]]))


def _streams(seed, count):
    return [np.random.default_rng(s) for s in np.random.SeedSequence(seed).spawn(count)]


def straight_line_optimality_check(kernel, a, b, cfg, workers=None):
    """Compare the straight line's minimal energy with ``cfg.restarts`` perturbed polylines.

    For an isotropic kernel with nonincreasing profile the straight line
    should have the largest minimal energy, so ``straight_energy`` is
    expected to be at least ``best_perturbed_energy`` up to solver tolerance.
    """
    if not (kernel.isotropic and kernel.is_nonincreasing()) or kernel.singular_diagonal:
        raise ValidationError("straight-line optimality needs an isotropic nonincreasing kernel")
    a = as_point(a, "a")
    b = as_point(b, "b")
    straight = min_energy(kernel, straight_line(a, b), n=cfg.n, tol=cfg.tol).energy
    rngs = _streams(cfg.seed, cfg.restarts)

    def one(rng):
        return min_energy(kernel, perturbed_path(a, b, cfg, rng), n=cfg.n, tol=cfg.tol).energy

    energies = ordered_map(one, rngs, workers)
    return OptimalityCheck(straight, max(energies), energies)


def _default_box(kernel, a, b):
    if isinstance(kernel, BrownianSheet):
        return 0.0, float(max(a.max(), b.max()))
    return None


def _climb(kernel, a, b, cfg, rng, box, restart):
    m = cfg.control_points
    s = _interior_params(m)
    params = np.concatenate([[0.0], s, [1.0]])
    ctrl = a + s[:, None] * (b - a)
    sigma = cfg.perturbation_scale * float(np.linalg.norm(b - a))

    def solve(c):
        return min_energy(kernel, Path(np.vstack([a, c, b]), params), n=cfg.n, tol=cfg.tol,
                          raise_on_failure=False)

    best = solve(ctrl)
    trace = [(restart, 0, best.energy)]
    for it in range(1, cfg.iters + 1):
        k = int(rng.integers(m))
        cand = ctrl.copy()
        cand[k] += sigma * rng.standard_normal(a.shape[0])
        if box is not None:
            np.clip(cand, box[0], box[1], out=cand)
        rep = solve(cand)
        if rep.converged and rep.energy > best.energy:
            ctrl, best = cand, rep
        trace.append((restart, it, best.energy))
    return Path(np.vstack([a, ctrl, b]), params), best, trace


def path_search(kernel, a, b, cfg, box=None, workers=None):
    """Hill-climb over polyline control points to raise the minimal energy.

    Each restart starts from the straight line carrying
    ``cfg.control_points`` interior control points; every iteration moves one
    control point by a Gaussian step of size ``perturbation_scale * |b - a|``
    and keeps the move only if the minimal energy increases.  Control points
    are clipped to ``box = (lo, hi)`` when given (for the Brownian sheet the
    default is the cube ``[0, max coordinate]^d``).  This is a heuristic.

    Returns the best path over all restarts, its report, and the trace of
    ``(restart, iteration, best energy)``.
    """
    a = as_point(a, "a")
    b = as_point(b, "b")
    if a.shape != b.shape:
        raise ValidationError("endpoints have different dimensions")
    if box is None:
        box = _default_box(kernel, a, b)
    rngs = _streams(cfg.seed, cfg.restarts)
    runs = ordered_map(lambda ir: _climb(kernel, a, b, cfg, ir[1], box, ir[0]),
                       list(enumerate(rngs)), workers)
    best_path, best_rep, _ = max(runs, key=lambda r: r[1].energy)
    trace = [row for run in runs for row in run[2]]
    logger.info("path_search best energy %.6g over %d restarts", best_rep.energy, cfg.restarts)
    return SearchResult(best_path, best_rep, trace)
