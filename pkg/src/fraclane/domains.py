"""Bounded domains in 1D/2D and the uniform cell-centered grids built on them.

A grid covers the domain's bounding box with `resolution` equal cells per
axis; the unknowns live at the centers of the cells whose center lies
strictly inside the domain.  Functions on a grid are plain numpy arrays with
one value per interior node, implicitly zero everywhere outside the domain.
All geometric quantities that analysis is sensitive to (boundary distance,
boundary parametrization) are computed from the exact domain geometry, never
from the lattice.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import ConfigurationError

MIN_RESOLUTION = 8

_KINDS = ("interval", "rectangle", "disk")


@dataclass(frozen=True)
class Domain:
    """A bounded open set: an interval, an axis-aligned rectangle, or a disk.

    kind: one of 'interval', 'rectangle', 'disk'.
    endpoints: (a, b) for intervals.
    sides: (length_x, length_y) for rectangles.
    radius: disk radius.
    center: center point (1 or 2 coordinates; the interval center is derived
        from its endpoints and must not be supplied separately).
    """

    kind: str
    endpoints: tuple | None = None
    sides: tuple | None = None
    radius: float | None = None
    center: tuple = ()

    def __post_init__(self):
        if self.kind not in _KINDS:
            raise ConfigurationError(f"unknown domain kind {self.kind!r}")
        if self.kind == "interval":
            if self.endpoints is None or len(self.endpoints) != 2:
                raise ConfigurationError("interval needs endpoints=(a, b)")
            a, b = map(float, self.endpoints)
            if not b > a:
                raise ConfigurationError("interval endpoints must satisfy a < b")
            object.__setattr__(self, "endpoints", (a, b))
            object.__setattr__(self, "center", ((a + b) / 2.0,))
        elif self.kind == "rectangle":
            if self.sides is None or len(self.sides) != 2:
                raise ConfigurationError("rectangle needs sides=(lx, ly)")
            lx, ly = map(float, self.sides)
            if lx <= 0 or ly <= 0:
                raise ConfigurationError("rectangle sides must be positive")
            c = tuple(map(float, self.center)) if self.center else (0.0, 0.0)
            if len(c) != 2:
                raise ConfigurationError("rectangle center needs 2 coordinates")
            object.__setattr__(self, "sides", (lx, ly))
            object.__setattr__(self, "center", c)
        else:
            if self.radius is None or float(self.radius) <= 0:
                raise ConfigurationError("disk needs a positive radius")
            c = tuple(map(float, self.center)) if self.center else (0.0, 0.0)
            if len(c) != 2:
                raise ConfigurationError("disk center needs 2 coordinates")
            object.__setattr__(self, "radius", float(self.radius))
            object.__setattr__(self, "center", c)

    # -- constructors ------------------------------------------------------

    @staticmethod
    def interval(a: float, b: float) -> "Domain":
        return Domain("interval", endpoints=(a, b))

    @staticmethod
    def rectangle(lx: float, ly: float, center=(0.0, 0.0)) -> "Domain":
        return Domain("rectangle", sides=(lx, ly), center=center)

    @staticmethod
    def disk(radius: float, center=(0.0, 0.0)) -> "Domain":
        return Domain("disk", radius=radius, center=center)

    # -- geometry ----------------------------------------------------------

    @property
    def dim(self) -> int:
        return 1 if self.kind == "interval" else 2

    @property
    def bounding_box(self) -> tuple:
        """((lo, hi) per axis)."""
        if self.kind == "interval":
            return (self.endpoints,)
        if self.kind == "rectangle":
            (cx, cy), (lx, ly) = self.center, self.sides
            return ((cx - lx / 2, cx + lx / 2), (cy - ly / 2, cy + ly / 2))
        (cx, cy), r = self.center, self.radius
        return ((cx - r, cx + r), (cy - r, cy + r))

    @property
    def volume(self) -> float:
        if self.kind == "interval":
            a, b = self.endpoints
            return b - a
        if self.kind == "rectangle":
            return self.sides[0] * self.sides[1]
        return np.pi * self.radius**2

    @property
    def perimeter(self) -> float:
        if self.kind == "interval":
            return 2.0  # two endpoint "faces", each of measure 1
        if self.kind == "rectangle":
            return 2.0 * (self.sides[0] + self.sides[1])
        return 2.0 * np.pi * self.radius

    def is_star_shaped_wrt_origin(self) -> bool:
        """True iff x . nu(x) > 0 at every boundary point.

        For these three kinds that is equivalent to the origin lying in the
        open interior.
        """
        box = self.bounding_box
        if self.kind == "disk":
            cx, cy = self.center
            return (cx * cx + cy * cy) ** 0.5 < self.radius
        return all(lo < 0.0 < hi for lo, hi in box)

    def contains(self, pts: np.ndarray) -> np.ndarray:
        """Strict interior test for an (N, dim) array (or (N,) in 1D)."""
        pts = np.asarray(pts, dtype=float)
        if self.kind == "interval":
            x = pts if pts.ndim == 1 else pts[:, 0]
            a, b = self.endpoints
            return (x > a) & (x < b)
        box = self.bounding_box
        if self.kind == "rectangle":
            return (
                (pts[:, 0] > box[0][0]) & (pts[:, 0] < box[0][1])
                & (pts[:, 1] > box[1][0]) & (pts[:, 1] < box[1][1])
            )
        dx = pts[:, 0] - self.center[0]
        dy = pts[:, 1] - self.center[1]
        return dx * dx + dy * dy < self.radius**2

    def boundary_distance(self, pts: np.ndarray) -> np.ndarray:
        """Exact Euclidean distance to the boundary (for interior points)."""
        pts = np.asarray(pts, dtype=float)
        if self.kind == "interval":
            x = pts if pts.ndim == 1 else pts[:, 0]
            a, b = self.endpoints
            return np.minimum(x - a, b - x)
        box = self.bounding_box
        if self.kind == "rectangle":
            return np.minimum.reduce([
                pts[:, 0] - box[0][0], box[0][1] - pts[:, 0],
                pts[:, 1] - box[1][0], box[1][1] - pts[:, 1],
            ])
        r = np.hypot(pts[:, 0] - self.center[0], pts[:, 1] - self.center[1])
        return self.radius - r


@dataclass(frozen=True)
class Grid:
    """Uniform cell-centered grid on a domain's bounding box.

    x: interior node coordinates, shape (N, dim).
    lattice: integer cell indices of the interior nodes, shape (N, dim).
    h: cell size per axis.
    d: exact distance from each node to the domain boundary, shape (N,).
    weights: quadrature weight per node (the cell volume), shape (N,).
    """

    domain: Domain
    resolution: int
    h: tuple
    axes: tuple
    lattice: np.ndarray
    x: np.ndarray
    d: np.ndarray
    weights: np.ndarray = field(repr=False)

    @property
    def dim(self) -> int:
        return self.domain.dim

    @property
    def n_nodes(self) -> int:
        return self.x.shape[0]

    @property
    def cell_volume(self) -> float:
        return float(np.prod(self.h))

    # -- norms and integrals on grid functions -----------------------------

    def integrate(self, u: np.ndarray) -> float:
        return float(np.sum(self.weights * u))

    def lr_norm(self, u: np.ndarray, r: float) -> float:
        return float(np.sum(self.weights * np.abs(u) ** r) ** (1.0 / r))

    def sup_norm(self, u: np.ndarray) -> float:
        return float(np.max(np.abs(u))) if len(u) else 0.0


def build_grid(domain: Domain, resolution: int) -> Grid:
    """Lay `resolution` cells per axis over the bounding box and keep the
    cell centers that fall strictly inside the domain."""
    if int(resolution) != resolution or resolution < MIN_RESOLUTION:
        raise ConfigurationError(
            f"resolution must be an integer >= {MIN_RESOLUTION}, got {resolution}"
        )
    resolution = int(resolution)
    box = domain.bounding_box
    h = tuple((hi - lo) / resolution for lo, hi in box)
    axes = tuple(
        lo + (np.arange(resolution) + 0.5) * step
        for (lo, _), step in zip(box, h)
    )
    if domain.dim == 1:
        lattice = np.arange(resolution)[:, None]
        x = axes[0][:, None]
    else:
        ii, jj = np.meshgrid(np.arange(resolution), np.arange(resolution), indexing="ij")
        lattice = np.stack([ii.ravel(), jj.ravel()], axis=1)
        x = np.stack([axes[0][lattice[:, 0]], axes[1][lattice[:, 1]]], axis=1)
    keep = domain.contains(x)
    lattice, x = lattice[keep], x[keep]
    if x.shape[0] == 0:
        raise ConfigurationError("no grid node falls inside the domain")
    d = domain.boundary_distance(x)
    weights = np.full(x.shape[0], float(np.prod(h)))
    return Grid(domain, resolution, h, axes, lattice, x, d, weights)


@dataclass(frozen=True)
class BoundaryTrace:
    """Sampled boundary parametrization for surface integrals.

    points/normals: (B, dim); weights: (B,) with sum -> |boundary|;
    x_dot_nu: (B,) inner product of the point with its outward normal;
    corners_dropped: True when the parametrization omits corner points
    (rectangles), where the normal is not defined.
    """

    points: np.ndarray
    normals: np.ndarray
    weights: np.ndarray
    x_dot_nu: np.ndarray
    corners_dropped: bool


def boundary_trace(grid: Grid, samples: int | None = None) -> BoundaryTrace:
    """Exact boundary parametrization with per-point outward normals.

    Interval: the two endpoints, each carrying unit weight.  Rectangle: each
    side sampled at the transverse cell centers (corners never appear).
    Disk: `samples` equal arcs (default max(256, 4*resolution)).
    """
    dom = grid.domain
    if dom.kind == "interval":
        a, b = dom.endpoints
        pts = np.array([[a], [b]])
        nrm = np.array([[-1.0], [1.0]])
        wts = np.array([1.0, 1.0])
    elif dom.kind == "rectangle":
        (x0, x1), (y0, y1) = dom.bounding_box
        xs, ys = grid.axes
        hx, hy = grid.h
        pts_list, nrm_list, wts_list = [], [], []
        for xval, nx in ((x0, -1.0), (x1, 1.0)):
            pts_list.append(np.stack([np.full_like(ys, xval), ys], axis=1))
            nrm_list.append(np.tile([nx, 0.0], (len(ys), 1)))
            wts_list.append(np.full(len(ys), hy))
        for yval, ny in ((y0, -1.0), (y1, 1.0)):
            pts_list.append(np.stack([xs, np.full_like(xs, yval)], axis=1))
            nrm_list.append(np.tile([0.0, ny], (len(xs), 1)))
            wts_list.append(np.full(len(xs), hx))
        pts = np.concatenate(pts_list)
        nrm = np.concatenate(nrm_list)
        wts = np.concatenate(wts_list)
    else:
        m = samples if samples is not None else max(256, 4 * grid.resolution)
        th = (np.arange(m) + 0.5) * (2.0 * np.pi / m)
        nrm = np.stack([np.cos(th), np.sin(th)], axis=1)
        pts = np.asarray(dom.center) + dom.radius * nrm
        wts = np.full(m, dom.radius * 2.0 * np.pi / m)
    xdn = np.sum(pts * nrm, axis=1)
    return BoundaryTrace(pts, nrm, wts, xdn, corners_dropped=(dom.kind == "rectangle"))


def resample_nested(src: Grid, u: np.ndarray, dst: Grid) -> np.ndarray:
    """Move a grid function between two grids on the same domain whose
    resolutions divide evenly.

    Coarse -> fine: each fine node inherits its parent cell's value
    (injection).  Fine -> coarse: each coarse node averages the values of its
    interior children.  Both directions preserve sign and never increase the
    sup-norm.
    """
    if src.domain != dst.domain:
        raise ConfigurationError("resample_nested needs grids on the same domain")
    if dst.resolution % src.resolution == 0:  # prolong coarse -> fine
        ratio = dst.resolution // src.resolution
        parent = dst.lattice // ratio
        src_index = _lattice_index(src)
        out = np.zeros(dst.n_nodes)
        keys = _keys(parent, src.resolution)
        for i, kk in enumerate(keys):
            j = src_index.get(kk)
            if j is not None:
                out[i] = u[j]
        return out
    if src.resolution % dst.resolution == 0:  # restrict fine -> coarse
        ratio = src.resolution // dst.resolution
        parent = src.lattice // ratio
        sums = np.zeros(dst.n_nodes)
        counts = np.zeros(dst.n_nodes)
        dst_index = _lattice_index(dst)
        keys = _keys(parent, dst.resolution)
        for i, kk in enumerate(keys):
            j = dst_index.get(kk)
            if j is not None:
                sums[j] += u[i]
                counts[j] += 1
        out = np.zeros(dst.n_nodes)
        nz = counts > 0
        out[nz] = sums[nz] / counts[nz]
        return out
    raise ConfigurationError("grid resolutions do not nest")


def _keys(lattice: np.ndarray, res: int):
    if lattice.shape[1] == 1:
        return [int(v) for v in lattice[:, 0]]
    return [int(a) * res + int(b) for a, b in lattice]


def _lattice_index(grid: Grid) -> dict:
    return {kk: i for i, kk in enumerate(_keys(grid.lattice, grid.resolution))}
