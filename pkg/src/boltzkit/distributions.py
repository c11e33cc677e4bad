"""Velocity distributions: closed-form families and grid-backed data.

Closed forms evaluate their formula exactly everywhere; grid-backed data
is trilinearly interpolated inside its box and zero outside.  Trilinear
interpolation is nonnegative and order-preserving (nodewise f <= g implies
interpolated f <= g pointwise), which the monotone solver relies on.
"""

from __future__ import annotations

import numpy as np

from .errors import RangeError
from .grids import VelocityGrid

__all__ = [
    "Distribution",
    "Maxwellian",
    "GaussianMixture",
    "BoseEinstein",
    "GridDistribution",
    "evaluate",
]


class Distribution:
    """Callable density on R^3_v; subclasses set ``nonnegative``."""

    nonnegative: bool = True

    def __call__(self, points):  # pragma: no cover - abstract
        raise NotImplementedError


class GaussianMixture(Distribution):
    """Sum of isotropic Gaussian bumps a_i exp(-beta_i |v - c_i|^2).

    Amplitudes may be negative (linear-combination probes); ``nonnegative``
    is set accordingly.
    """

    def __init__(self, terms):
        amps, centers, betas = [], [], []
        for a, c, b in terms:
            if not b > 0:
                raise RangeError("mixture inverse temperatures must be positive")
            amps.append(float(a))
            centers.append(np.asarray(c, dtype=float).reshape(3))
            betas.append(float(b))
        if not amps:
            raise RangeError("mixture needs at least one term")
        self.amplitudes = np.array(amps)
        self.centers = np.array(centers)
        self.betas = np.array(betas)
        self.nonnegative = bool(np.all(self.amplitudes >= 0.0))

    def __call__(self, points):
        pts = np.asarray(points, dtype=float)
        d = pts[..., None, :] - self.centers  # (..., nb, 3)
        r2 = np.sum(d * d, axis=-1)
        return np.sum(self.amplitudes * np.exp(-self.betas * r2), axis=-1)

    def scaled(self, factor):
        return GaussianMixture(
            [(factor * a, c, b) for a, c, b in zip(self.amplitudes, self.centers, self.betas)]
        )

    def shifted(self, shift):
        shift = np.asarray(shift, dtype=float)
        return GaussianMixture(
            [(a, c + shift, b) for a, c, b in zip(self.amplitudes, self.centers, self.betas)]
        )


class Maxwellian(GaussianMixture):
    """a exp(-beta |v - v0|^2): the classical collision equilibrium."""

    def __init__(self, amplitude=1.0, center=(0.0, 0.0, 0.0), beta=1.0):
        super().__init__([(amplitude, center, beta)])
        self.amplitude = float(amplitude)
        self.center = np.asarray(center, dtype=float)
        self.beta = float(beta)


class BoseEinstein(Distribution):
    """f(v) = 1 / (z^-1 exp(beta |v|^2) - 1), the quantum equilibrium.

    Requires 0 < z < 1 strictly so the value stays finite at v = 0.
    Evaluated in the overflow-safe form t/(1 - t) with t = z exp(-beta|v|^2).
    """

    def __init__(self, fugacity=0.5, beta=1.0):
        if not (0.0 < fugacity < 1.0):
            raise RangeError("Bose-Einstein fugacity must satisfy 0 < z < 1 strictly")
        if not beta > 0:
            raise RangeError("Bose-Einstein beta must be positive")
        self.fugacity = float(fugacity)
        self.beta = float(beta)

    def __call__(self, points):
        pts = np.asarray(points, dtype=float)
        t = self.fugacity * np.exp(-self.beta * np.sum(pts * pts, axis=-1))
        return t / (1.0 - t)


def _trilinear(values, radius, h, n, points):
    pts = np.asarray(points, dtype=float)
    flat = pts.reshape(-1, 3)
    out = np.zeros(len(flat))
    inside = np.all(np.abs(flat) <= radius, axis=1)
    if np.any(inside):
        p = flat[inside]
        t = (p + radius) / h
        idx = np.minimum(np.floor(t).astype(int), n - 2)
        idx = np.maximum(idx, 0)
        frac = t - idx
        # snap to nodes: cell coordinates of lattice points carry ~n*eps
        # float error; snapping keeps nodal evaluation exact
        tol = n * 1e-15
        frac[frac < tol] = 0.0
        frac[frac > 1.0 - tol] = 1.0
        acc = np.zeros(len(p))
        for di in (0, 1):
            wx = frac[:, 0] if di else 1.0 - frac[:, 0]
            for dj in (0, 1):
                wy = frac[:, 1] if dj else 1.0 - frac[:, 1]
                for dk in (0, 1):
                    wz = frac[:, 2] if dk else 1.0 - frac[:, 2]
                    acc += wx * wy * wz * values[idx[:, 0] + di, idx[:, 1] + dj, idx[:, 2] + dk]
        out[inside] = acc
    return out.reshape(pts.shape[:-1])


class GridDistribution(Distribution):
    """Nodal values on a VelocityGrid, trilinearly interpolated."""

    def __init__(self, grid: VelocityGrid, values, nonnegative=None):
        values = np.asarray(values, dtype=float)
        if values.shape != (grid.n, grid.n, grid.n):
            raise RangeError(
                f"values must have shape {(grid.n,) * 3}, got {values.shape}"
            )
        self.grid = grid
        self.values = values
        if nonnegative is None:
            nonnegative = bool(np.all(values >= 0.0))
        elif nonnegative and np.any(values < 0.0):
            raise RangeError("values flagged nonnegative contain negatives")
        self.nonnegative = nonnegative

    @classmethod
    def sample(cls, dist, grid: VelocityGrid) -> "GridDistribution":
        vals = np.asarray(dist(grid.nodes), dtype=float).reshape(grid.n, grid.n, grid.n)
        return cls(grid, vals)

    @classmethod
    def point_mass(cls, grid: VelocityGrid, at=(0.0, 0.0, 0.0)) -> "GridDistribution":
        """Unit-mass single-node spike (value 1/h^3 at the nearest node)."""
        vals = np.zeros((grid.n, grid.n, grid.n))
        idx = tuple(int(round((c + grid.radius) / grid.h)) for c in at)
        vals[idx] = 1.0 / grid.cell_volume
        return cls(grid, vals)

    def __call__(self, points):
        return _trilinear(self.values, self.grid.radius, self.grid.h, self.grid.n, points)


def evaluate(dist, v):
    """Pointwise value of a distribution (closed forms exactly, grids by
    trilinear interpolation, zero outside the box)."""
    return dist(v)
