"""Velocity grids, unit-sphere quadrature rules, and weighted Lebesgue norms.

The velocity domain is truncated to the box [-R, R]^3 with a uniform node
lattice; contributions outside are treated as zero.  Sphere rules must be
antipodally symmetric because the collision kernels split the sphere by the
sign of u^.sigma and rely on each half carrying weight exactly 2 pi.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from functools import cached_property

import numpy as np
from numpy.polynomial.legendre import leggauss

from .errors import ConfigError, RangeError
from .geometry import japanese_bracket

__all__ = [
    "VelocityGrid",
    "SphereRule",
    "build_sphere_rule",
    "WeightedNormSpec",
    "weighted_lp_norm",
    "grid_moments",
]


class VelocityGrid:
    """Uniform Cartesian lattice on [-radius, radius]^3.

    points_per_axis - 1 must be even so the origin is a node; spacing is
    h = 2 radius / (points_per_axis - 1).
    """

    def __init__(self, radius: float, points_per_axis: int):
        if not (isinstance(points_per_axis, (int, np.integer)) and points_per_axis >= 4):
            raise ConfigError("points_per_axis must be an integer >= 4")
        if (points_per_axis - 1) % 2 != 0:
            raise ConfigError("points_per_axis - 1 must be even (origin must be a node)")
        if not radius > 0:
            raise ConfigError("radius must be positive")
        self.radius = float(radius)
        self.n = int(points_per_axis)
        self.h = 2.0 * self.radius / (self.n - 1)
        axis = np.linspace(-self.radius, self.radius, self.n)
        # force exact antisymmetry: the origin is exactly a node and the
        # lattice is bitwise closed under v -> -v
        self.axis = 0.5 * (axis - axis[::-1])

    @cached_property
    def nodes(self) -> np.ndarray:
        """All lattice nodes, shape (n^3, 3), lexicographic in (ix, iy, iz)."""
        x, y, z = np.meshgrid(self.axis, self.axis, self.axis, indexing="ij")
        return np.stack([x.ravel(), y.ravel(), z.ravel()], axis=1)

    @property
    def cell_volume(self) -> float:
        return self.h**3

    def refined(self) -> "VelocityGrid":
        """Same box with the spacing halved (2n - 1 points per axis)."""
        return VelocityGrid(self.radius, 2 * self.n - 1)

    def __repr__(self):
        return f"VelocityGrid(radius={self.radius}, points_per_axis={self.n})"

    def __eq__(self, other):
        return (
            isinstance(other, VelocityGrid)
            and other.radius == self.radius
            and other.n == self.n
        )

    def __hash__(self):
        return hash((self.radius, self.n))


@dataclass(frozen=True)
class SphereRule:
    """Quadrature rule on the unit sphere (weights sum to 4 pi)."""

    nodes: np.ndarray
    weights: np.ndarray
    kind: str
    order: int

    def __len__(self):
        return len(self.weights)

    def integrate(self, f) -> float:
        return float(np.sum(self.weights * f(self.nodes)))

    def antipode_indices(self) -> np.ndarray:
        """Index of -node for each node; raises if the set is not closed."""
        idx = np.full(len(self.weights), -1, dtype=int)
        for i, nd in enumerate(self.nodes):
            d = np.linalg.norm(self.nodes + nd, axis=1)
            j = int(np.argmin(d))
            if d[j] > 1e-12:
                raise AssertionError("sphere rule is not antipodally closed")
            idx[i] = j
        return idx


def _product_gauss(order: int) -> SphereRule:
    x, w = leggauss(order)
    # force exact antipodal symmetry of the polar nodes
    x = 0.5 * (x - x[::-1])
    w = 0.5 * (w + w[::-1])
    m = 2 * order
    half = m // 2
    phi = 2.0 * np.pi * np.arange(half) / m
    ring = np.concatenate([np.stack([np.cos(phi), np.sin(phi)], axis=1),
                           -np.stack([np.cos(phi), np.sin(phi)], axis=1)])
    nodes = []
    weights = []
    for xi, wi in zip(x, w):
        s = np.sqrt(1.0 - xi * xi)
        for cx, cy in ring:
            nodes.append((s * cx, s * cy, xi))
            weights.append(wi * 2.0 * np.pi / m)
    return SphereRule(np.array(nodes), np.array(weights), "product-gauss", order)


def _octahedral(order: int) -> SphereRule:
    verts = []
    for d in range(3):
        for s in (1.0, -1.0):
            e = np.zeros(3)
            e[d] = s
            verts.append(e)
    verts = np.array(verts)
    if order <= 3:
        weights = np.full(6, 4.0 * np.pi / 6.0)
        return SphereRule(verts, weights, "octahedral", order)
    edges = []
    for a in range(3):
        for b in range(a + 1, 3):
            for sa, sb in itertools.product((1.0, -1.0), repeat=2):
                e = np.zeros(3)
                e[a], e[b] = sa, sb
                edges.append(e / np.sqrt(2.0))
    faces = [np.array(sgn) / np.sqrt(3.0) for sgn in itertools.product((1.0, -1.0), repeat=3)]
    nodes = np.vstack([verts, np.array(edges), np.array(faces)])
    fourpi = 4.0 * np.pi
    # classical 26-point rule, exact through degree 7
    weights = np.concatenate(
        [
            np.full(6, fourpi / 21.0),
            np.full(12, 4.0 * fourpi / 105.0),
            np.full(8, 27.0 * fourpi / 840.0),
        ]
    )
    return SphereRule(nodes, weights, "octahedral", order)


def build_sphere_rule(kind: str = "product-gauss", order: int = 6) -> SphereRule:
    """Construct an antipodally symmetric sphere rule.

    product-gauss: Gauss-Legendre in cos(theta) x uniform trapezoid in
    azimuth (order polar nodes, 2*order azimuthal), exact for spherical
    polynomials of degree < order roughly.  octahedral: the 6-point vertex
    rule (order <= 3) or the classical 26-point rule (order 4..7).
    """
    if not isinstance(order, (int, np.integer)) or order < 2:
        raise ConfigError("sphere rule order must be an integer >= 2")
    if kind == "product-gauss":
        return _product_gauss(int(order))
    if kind == "octahedral":
        if order > 7:
            raise ConfigError("octahedral rule supports order <= 7 (degree-7 exactness)")
        return _octahedral(int(order))
    raise ConfigError(f"unsupported sphere rule kind {kind!r}")


@dataclass(frozen=True)
class WeightedNormSpec:
    """|| <v>^k f ||_{L^p_v} specification; p may be math.inf."""

    p: float
    k: float = 0.0

    def __post_init__(self):
        if not self.p >= 1.0:
            raise RangeError("norm exponent p must be >= 1")
        if self.k < 0.0:
            raise RangeError("weight power k must be >= 0")


def weighted_lp_norm(dist, spec: WeightedNormSpec, grid: VelocityGrid) -> float:
    """Riemann-sum weighted norm of a distribution over the grid nodes.

    p = inf takes the max of <v>^k |f| over the nodes.  Summation runs in
    fixed lexicographic node order, so results are bit-reproducible.
    """
    vals = np.abs(np.asarray(dist(grid.nodes), dtype=float))
    w = japanese_bracket(grid.nodes) ** spec.k if spec.k != 0.0 else 1.0
    weighted = w * vals
    if np.isinf(spec.p):
        return float(np.max(weighted))
    return float((grid.cell_volume * np.sum(weighted**spec.p)) ** (1.0 / spec.p))


def grid_moments(values: np.ndarray, grid: VelocityGrid):
    """(mass, momentum vector, energy) Riemann sums of nodal values."""
    v = values.reshape(-1)
    nodes = grid.nodes
    h3 = grid.cell_volume
    mass = h3 * float(np.sum(v))
    mom = h3 * np.array(
        [float(np.sum(v * nodes[:, 0])), float(np.sum(v * nodes[:, 1])), float(np.sum(v * nodes[:, 2]))]
    )
    energy = h3 * float(np.sum(v * np.sum(nodes * nodes, axis=1)))
    return mass, mom, energy
