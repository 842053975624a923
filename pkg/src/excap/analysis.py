"""Structure of minimal-energy measures for stationary processes on [0, a].

Closed-form regimes, in order of increasing interval length:

* two atoms ``(delta_0 + delta_1) / 2`` while ``R(t) + R(a - t) >= R(0) + R(a)``;
* three atoms, adding mass ``eps_a`` at the midpoint;
* four atoms, the midpoint mass split symmetrically at ``1/2 -+ d_a``.

The Ornstein-Uhlenbeck kernel never enters these regimes: its minimal
measure is two endpoint atoms plus a uniform density, in closed form.
"""

import math
from dataclasses import dataclass, field

import numpy as np

from ._validation import check_scalar
from .capacity import DiscreteMeasure
from .exceptions import NoSignChange, NotInRegime, UncertifiedMeasure, ValidationError

__all__ = [
    "ShapeCurve",
    "RegimeResult",
    "ThreeAtomParams",
    "FourAtomFit",
    "limiting_shape",
    "spectral_h",
    "two_atom_condition",
    "two_atom_capacity",
    "three_atom_params",
    "three_atom_shape",
    "four_atom_energy",
    "four_atom_fit",
    "golden_section",
    "two_atom_margin",
    "midpoint_curvature",
    "critical_length",
    "ou_closed_form",
    "classify_regime",
]

DEFAULT_T_GRID = 2001
CONDITION_ATOL = 1e-12


@dataclass
class ShapeCurve:
    t: np.ndarray
    x: np.ndarray
    capacity: float
    level_violation: float

    def to_rows(self):
        return list(zip(self.t.tolist(), self.x.tolist()))


@dataclass
class RegimeResult:
    regime: str
    capacity: float
    params: dict = field(default_factory=dict)

    def to_dict(self):
        return {"regime": self.regime, "capacity": self.capacity, "params": dict(self.params)}


@dataclass
class ThreeAtomParams:
    eps: float
    capacity: float
    holds: bool
    margin: float


@dataclass
class FourAtomFit:
    eps: float
    d: float
    capacity: float
    energy: float
    residual: float
    measure: DiscreteMeasure


def _stationary(kernel):
    if not getattr(kernel, "stationary", False) or kernel.singular_diagonal:
        raise ValidationError("this operation needs a stationary kernel with finite variance")
    return kernel


def _check_length(a):
    return check_scalar(a, "a", lower=0.0, lower_inclusive=False)


def limiting_shape(kernel, a, b, m, t_grid=DEFAULT_T_GRID, cert_tol=1e-2):
    """Limiting normalized path ``x(t) = C sum_j R(t, a + (b - a) u_j) w_j``.

    ``m`` must be (numerically) of minimal energy on ``[a, b]``: both
    certificate residuals, relative to the energy, must be below
    ``cert_tol``.  ``t_grid`` equally spaced evaluation points cover ``[a, b]``.
    """
    a = float(a)
    b = float(b)
    if not a < b:
        raise ValidationError("need a < b")
    t_grid = check_scalar(t_grid, "t_grid", lower=2, integer=True)
    pts = a + (b - a) * m.u
    supp = m.w > 0
    K = kernel.pairwise(pts, pts[supp])
    W = K @ m.w[supp]
    E = float(m.w @ W)
    if E <= 0:
        raise UncertifiedMeasure("measure has nonpositive energy")
    t = np.linspace(a, b, t_grid)
    Wt = kernel.pairwise(t, pts[supp]) @ m.w[supp]
    # the potential must stay above the energy off the measure's grid as well
    res_min = E - min(float(W.min()), float(Wt.min()))
    res_supp = float(np.max(np.abs(W[m.w > 1e-10] - E)))
    if res_min > cert_tol * E or res_supp > cert_tol * E:
        raise UncertifiedMeasure(
            f"residuals {res_min:.3g}, {res_supp:.3g} exceed {cert_tol:g} x energy {E:.6g}"
        )
    C = 1.0 / E
    x = C * Wt
    return ShapeCurve(t=t, x=x, capacity=C, level_violation=float(x.min() - 1.0))


def spectral_h(a, capacity, m, x_grid):
    """``h(x) = C sum_j exp(i a u_j x) w_j``, the Fourier transform of the measure on [0, a]."""
    x = np.asarray(x_grid, dtype=float)
    phase = np.exp(1j * float(a) * np.multiply.outer(x, m.u))
    return float(capacity) * (phase @ m.w)


def two_atom_margin(kernel, a, t_grid=DEFAULT_T_GRID):
    """``min_t R(t) + R(a - t) - R(0) - R(a)`` over a grid of ``[0, a]``."""
    kernel = _stationary(kernel)
    a = _check_length(a)
    t = np.linspace(0.0, a, t_grid)
    g = kernel.lag(t) + kernel.lag(a - t)
    return float(g.min() - kernel.r0 - kernel.lag(a))


def two_atom_condition(kernel, a, t_grid=DEFAULT_T_GRID):
    """Whether endpoint atoms of mass 1/2 are optimal on ``[0, a]``.

    Returns ``(holds, margin)``; ``margin`` is never positive since ``t = 0``
    attains equality.
    """
    margin = two_atom_margin(kernel, a, t_grid)
    holds = margin >= -CONDITION_ATOL and kernel.r0 + float(kernel.lag(a)) > 0
    return bool(holds), margin


def two_atom_capacity(kernel, a):
    kernel = _stationary(kernel)
    return 2.0 / (kernel.r0 + float(kernel.lag(a)))


def three_atom_params(kernel, a, t_grid=DEFAULT_T_GRID):
    """Midpoint mass, capacity and validity of the three-atom measure.

    The measure is ``(1 - eps)/2 (delta_0 + delta_1) + eps delta_{1/2}`` with

        eps = (R0 + Ra - 2 Rh) / (3 R0 + Ra - 4 Rh),
        C   = (3 R0 + Ra - 4 Rh) / (R0**2 + R0 Ra - 2 Rh**2),

    writing ``R0, Ra, Rh`` for ``R(0), R(a), R(a/2)``.  It is optimal when
    ``R0 + Ra > 2 Rh`` and, for all ``0 <= t <= a/2``,

        g(t) >= eps * (g(t) - 2 (R(a/2 - t) - Rh)),   g(t) = R(t) + R(a-t) - R0 - Ra.
    """
    kernel = _stationary(kernel)
    a = _check_length(a)
    R0, Ra, Rh = kernel.r0, float(kernel.lag(a)), float(kernel.lag(a / 2))
    excess = R0 + Ra - 2.0 * Rh
    denom = 3.0 * R0 + Ra - 4.0 * Rh
    energy_denom = R0 * R0 + R0 * Ra - 2.0 * Rh * Rh
    if denom == 0 or energy_denom == 0:
        return ThreeAtomParams(eps=math.nan, capacity=math.nan, holds=False, margin=-math.inf)
    # reported even when the midpoint mass would be negative, so the
    # approach to the two-atom boundary (eps -> 0) stays visible
    eps = excess / denom
    capacity = denom / energy_denom
    t = np.linspace(0.0, a / 2, t_grid)
    g = kernel.lag(t) + kernel.lag(a - t) - R0 - Ra
    rhs = eps * (g - 2.0 * (kernel.lag(a / 2 - t) - Rh))
    margin = float(np.min(g - rhs))
    holds = excess > 0 and margin >= -CONDITION_ATOL
    return ThreeAtomParams(eps=eps, capacity=capacity, holds=bool(holds), margin=margin)


def three_atom_shape(kernel, a, t, eps=None):
    """Limiting shape of the three-atom measure at positions ``t`` in ``[0, a]``."""
    kernel = _stationary(kernel)
    a = _check_length(a)
    if eps is None:
        params = three_atom_params(kernel, a, t_grid=2)
        eps, C = params.eps, params.capacity
    else:
        R0, Ra, Rh = kernel.r0, float(kernel.lag(a)), float(kernel.lag(a / 2))
        C = 1.0 / ((1 - eps) ** 2 / 2 * (R0 + Ra) + 2 * eps * (1 - eps) * Rh + eps ** 2 * R0)
    if not eps > 0:
        raise NotInRegime(f"no positive midpoint mass at a={a}")
    t = np.asarray(t, dtype=float)
    return C * (0.5 * (1 - eps) * (kernel.lag(t) + kernel.lag(a - t))
                + eps * kernel.lag(t - a / 2))


def _four_atom_layout(eps, d):
    locs = np.array([0.0, 0.5 - d, 0.5 + d, 1.0])
    masses = np.array([(1 - eps) / 2, eps / 2, eps / 2, (1 - eps) / 2])
    return locs, masses


def four_atom_energy(kernel, a, eps, d):
    """Energy of ``(1-eps)/2 (delta_0 + delta_1) + eps/2 (delta_{1/2-d} + delta_{1/2+d})`` on [0, a]."""
    locs, masses = _four_atom_layout(eps, d)
    K = kernel.lag(a * (locs[:, None] - locs[None, :]))
    return float(masses @ K @ masses)


def golden_section(f, lo, hi, tol=1e-8):
    """Minimizer of a unimodal ``f`` on ``[lo, hi]`` to within ``tol``."""
    invphi = (math.sqrt(5.0) - 1.0) / 2.0
    x1 = hi - invphi * (hi - lo)
    x2 = lo + invphi * (hi - lo)
    f1, f2 = f(x1), f(x2)
    while hi - lo > tol:
        if f1 <= f2:
            hi, x2, f2 = x2, x1, f1
            x1 = hi - invphi * (hi - lo)
            f1 = f(x1)
        else:
            lo, x1, f1 = x1, x2, f2
            x2 = lo + invphi * (hi - lo)
            f2 = f(x2)
    # the bracket ends are candidates too: the minimum may sit on the boundary
    x = 0.5 * (lo + hi)
    best = min((f(x), x), (f(lo), lo), (f(hi), hi))
    return best[1]


def four_atom_fit(kernel, a, tol=1e-8, t_grid=DEFAULT_T_GRID, cert_tol=1e-3):
    """Fit the symmetric four-atom family to ``[0, a]`` by energy minimization.

    ``d`` (half-distance of the interior atoms) is searched over ``[0, 1/2]``
    and, for each ``d``, ``eps`` (their total mass) over ``[0, 1]``, both by
    golden section.  The result is then checked against the optimality
    condition: its potential on a ``t_grid``-point grid may fall below its
    energy by at most ``cert_tol`` times the energy.

    Raises
    ------
    NotInRegime
        If the best member of the family is not of minimal energy.
    """
    kernel = _stationary(kernel)
    a = _check_length(a)

    def best_eps(d):
        return golden_section(lambda e: four_atom_energy(kernel, a, e, d), 0.0, 1.0, tol)

    d = golden_section(lambda d_: four_atom_energy(kernel, a, best_eps(d_), d_), 0.0, 0.5, tol)
    eps = best_eps(d)
    E = four_atom_energy(kernel, a, eps, d)
    locs, masses = _four_atom_layout(eps, d)
    v = np.union1d(np.linspace(0.0, 1.0, t_grid), locs)
    W = kernel.lag(a * (v[:, None] - locs[None, :])) @ masses
    residual = E - float(W.min())
    if residual > cert_tol * E:
        raise NotInRegime(
            f"four-atom fit at a={a} is not optimal: potential dips {residual:.3g} below energy"
        )
    keep = masses > 0
    measure = DiscreteMeasure.atoms(locs[keep], masses[keep])
    return FourAtomFit(eps=eps, d=d, capacity=1.0 / E, energy=E, residual=residual, measure=measure)


def _interior_two_atom_margin(kernel, a, t_grid):
    # min over (0, a/2] of R(t) + R(a-t) - R(0) - R(a); t = 0 is excluded
    # because it always gives exactly zero
    t = np.linspace(0.0, a / 2, t_grid)[1:]
    g = kernel.lag(t) + kernel.lag(a - t)
    k = int(np.argmin(g))
    lo = t[max(k - 1, 0)]
    hi = t[min(k + 1, len(t) - 1)]
    fn = lambda s: float(kernel.lag(s) + kernel.lag(a - s))
    s = golden_section(fn, lo, hi, tol=1e-12 * max(a, 1.0))
    return min(fn(s), float(g[k])) - kernel.r0 - float(kernel.lag(a))


def midpoint_curvature(kernel, a, rel_step=1e-4):
    """Second derivative of the three-atom shape at ``t = a/2`` (central differences)."""
    h = rel_step * a
    t = np.array([a / 2 - h, a / 2, a / 2 + h])
    x = three_atom_shape(kernel, a, t)
    return float((x[0] - 2.0 * x[1] + x[2]) / (h * h))


def critical_length(kernel, which, bracket, tol=1e-4, t_grid=DEFAULT_T_GRID):
    """Interval length at which a closed-form regime stops being optimal.

    ``which="a1"`` ends the two-atom regime: the interior minimum of
    ``R(t) + R(a - t) - R(0) - R(a)`` turns negative.  ``which="a2"`` ends the
    three-atom regime: the three-atom shape loses its local minimum at the
    midpoint, detected by the sign of its second derivative there.

    Roots are found by bisection on ``bracket`` to within ``tol``.
    """
    kernel = _stationary(kernel)
    lo, hi = (float(x) for x in bracket)
    if not 0 < lo < hi:
        raise ValidationError("bracket must satisfy 0 < lo < hi")
    if which == "a1":
        fn = lambda a: _interior_two_atom_margin(kernel, a, t_grid)
    elif which == "a2":
        def fn(a):
            if not three_atom_params(kernel, a, t_grid=2).eps > 0:
                raise NoSignChange(f"no three-atom regime at a={a}")
            return midpoint_curvature(kernel, a)
    else:
        raise ValidationError(f"which must be 'a1' or 'a2', got {which!r}")
    f_lo, f_hi = fn(lo), fn(hi)
    if np.sign(f_lo) == np.sign(f_hi) or f_lo == 0 or f_hi == 0:
        if f_lo == 0:
            return lo
        if f_hi == 0:
            return hi
        raise NoSignChange(f"{which} margin has the same sign at {lo} and {hi}")
    while (hi - lo) / 2 > tol:
        mid = 0.5 * (lo + hi)
        f_mid = fn(mid)
        if f_mid == 0:
            return mid
        if np.sign(f_mid) == np.sign(f_lo):
            lo, f_lo = mid, f_mid
        else:
            hi = mid
    return 0.5 * (lo + hi)


def ou_closed_form(a, n, scale=1.0):
    """Exact minimal measure for ``R(t) = exp(-|t| / scale)`` on ``[0, a]``, gridded.

    Endpoint atoms of mass ``1/(L + 2)`` each and mass ``L/(L + 2)`` spread
    evenly over the ``n - 2`` interior grid points, ``L = a / scale``.
    Returns ``(measure, capacity)`` with capacity ``(L + 2) / 2``.
    """
    a = _check_length(a)
    n = check_scalar(n, "n", lower=3, integer=True)
    L = a / check_scalar(scale, "scale", lower=0.0, lower_inclusive=False)
    w = np.full(n, L / ((L + 2.0) * (n - 2)))
    w[0] = w[-1] = 1.0 / (L + 2.0)
    return DiscreteMeasure(np.linspace(0.0, 1.0, n), w), (L + 2.0) / 2.0


def classify_regime(kernel, a, t_grid=DEFAULT_T_GRID, solver_n=None):
    """Identify which closed-form regime, if any, gives the optimal measure.

    If none applies and ``solver_n`` is given, the general solver decides
    between ``Diffuse`` (most mass off the atoms) and ``Unknown``.
    """
    kernel = _stationary(kernel)
    holds, margin = two_atom_condition(kernel, a, t_grid)
    if holds:
        return RegimeResult("TwoAtom", two_atom_capacity(kernel, a), {"margin": margin})
    three = three_atom_params(kernel, a, t_grid)
    if three.holds:
        return RegimeResult("ThreeAtom", three.capacity, {"eps": three.eps, "margin": three.margin})
    try:
        fit = four_atom_fit(kernel, a, t_grid=t_grid)
    except NotInRegime:
        fit = None
    if fit is not None and fit.d > 0 and fit.eps > 0:
        return RegimeResult("FourAtom", fit.capacity, {"eps": fit.eps, "d": fit.d})
    if solver_n is not None:
        from .capacity import min_energy
        from .geometry import straight_line

        rep = min_energy(kernel, straight_line([0.0], [a]), n=solver_n)
        _, diffuse = rep.atoms()
        regime = "Diffuse" if diffuse > 0.5 else "Unknown"
        return RegimeResult(regime, rep.capacity, {"diffuse_mass": diffuse})
    return RegimeResult("Unknown", math.nan, {})
