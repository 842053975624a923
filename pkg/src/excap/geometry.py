"""Polyline paths between two points and their parameter grids."""

import json
from dataclasses import dataclass

import numpy as np

from ._validation import as_point, as_points, check_scalar
from .exceptions import DegeneratePath, ValidationError

__all__ = [
    "Path",
    "ParamGrid",
    "straight_line",
    "sheet_staircase",
    "polyline",
    "discretize",
    "uniform_grid",
    "path_from_dict",
    "path_to_dict",
    "load_path",
]


@dataclass(frozen=True, eq=False)
class Path:
    """Piecewise-linear map ``[0, 1] -> R^d``.

    ``vertices[k]`` is the image of the parameter value ``param[k]``.
    """

    vertices: np.ndarray
    param: np.ndarray

    def __post_init__(self):
        V = as_points(self.vertices, name="vertices")
        if len(V) < 2:
            raise ValidationError("a path needs at least two vertices")
        p = np.asarray(self.param, dtype=float)
        if p.shape != (len(V),):
            raise ValidationError("param must have one entry per vertex")
        if p[0] != 0.0 or p[-1] != 1.0 or np.any(np.diff(p) <= 0):
            raise ValidationError("param must increase strictly from 0 to 1")
        V.setflags(write=False)
        p = p.copy()
        p.setflags(write=False)
        object.__setattr__(self, "vertices", V)
        object.__setattr__(self, "param", p)

    @property
    def dim(self):
        return self.vertices.shape[1]

    @property
    def start(self):
        return self.vertices[0].copy()

    @property
    def end(self):
        return self.vertices[-1].copy()

    def __call__(self, v):
        """Evaluate the path at parameter value(s) ``v``; returns (m, d)."""
        v = np.atleast_1d(np.asarray(v, dtype=float))
        if np.any((v < 0) | (v > 1)):
            raise ValidationError("path parameter must lie in [0, 1]")
        return np.column_stack(
            [np.interp(v, self.param, self.vertices[:, j]) for j in range(self.dim)]
        )

    def length(self):
        return float(np.linalg.norm(np.diff(self.vertices, axis=0), axis=1).sum())

    def __eq__(self, other):
        if not isinstance(other, Path):
            return NotImplemented
        return (np.array_equal(self.vertices, other.vertices)
                and np.array_equal(self.param, other.param))

    def __hash__(self):
        return hash((self.vertices.tobytes(), self.param.tobytes()))


@dataclass(frozen=True, eq=False)
class ParamGrid:
    """Uniform parameter grid ``u_i = i / (n - 1)`` and its image points."""

    u: np.ndarray
    points: np.ndarray

    @property
    def n(self):
        return len(self.u)

    @property
    def h(self):
        return 1.0 / (self.n - 1)


def polyline(vertices, param=None):
    """Path through ``vertices``; ``param`` defaults to uniform by vertex index."""
    V = as_points(vertices, name="vertices")
    if param is None:
        param = np.linspace(0.0, 1.0, len(V))
    path = Path(V, param)
    if np.array_equal(path.start, path.end):
        raise DegeneratePath("path endpoints coincide")
    return path


def straight_line(a, b):
    """Segment ``v -> a + v (b - a)``."""
    a = as_point(a, "a")
    b = as_point(b, "b")
    if a.shape != b.shape:
        raise ValidationError("endpoints have different dimensions")
    if np.array_equal(a, b):
        raise DegeneratePath("straight line between identical points")
    return Path(np.vstack([a, b]), np.array([0.0, 1.0]))


def sheet_staircase(d):
    """Staircase path from ``(1, 2, ..., d)`` to ``(d, 1, ..., d - 1)``.

    The first coordinate travels from 1 to d on ``[0, 1/d]``; on
    ``[(j - 1)/d, j/d]`` coordinate ``j`` steps down from ``j`` to ``j - 1``.
    The path stays inside ``[0, d]^d``.
    """
    d = check_scalar(d, "d", lower=2, integer=True)
    a = np.arange(1, d + 1, dtype=float)
    verts = [a.copy()]
    cur = a.copy()
    cur[0] = d
    verts.append(cur.copy())
    for j in range(1, d):
        cur[j] = j  # coordinate j+1 (1-based) goes from j+1 to j
        verts.append(cur.copy())
    return Path(np.array(verts), np.arange(d + 1) / d)


def uniform_grid(n):
    n = check_scalar(n, "n", lower=2, integer=True)
    u = np.linspace(0.0, 1.0, n)
    return u


def discretize(path, n):
    """Evaluate ``path`` on ``n`` equally spaced parameter values."""
    u = uniform_grid(n)
    pts = path(u)
    # pin the endpoints exactly; interp already does, this guards rounding in u
    pts[0] = path.vertices[0]
    pts[-1] = path.vertices[-1]
    return ParamGrid(u, pts)


def path_to_dict(path):
    return {"vertices": path.vertices.tolist(), "param": path.param.tolist()}


def path_from_dict(spec):
    if not isinstance(spec, dict):
        raise ValidationError("path description must be a JSON object")
    unknown = set(spec) - {"vertices", "param"}
    if unknown:
        raise ValidationError(f"unknown path fields: {sorted(unknown)}")
    if "vertices" not in spec:
        raise ValidationError("path description needs 'vertices'")
    return polyline(spec["vertices"], spec.get("param"))


def load_path(filename):
    with open(filename) as fh:
        try:
            spec = json.load(fh)
        except json.JSONDecodeError as exc:
            raise ValidationError(f"{filename}: invalid JSON ({exc})") from exc
    return path_from_dict(spec)
