"""Classical and quantum (Nordheim) collision operators by direct quadrature.

All operators share one quadrature layout: a v1 sum over a velocity lattice
times an antipodally symmetric sphere rule restricted to u^.sigma > 0, with
the multilinear extensions' factor 2 included.  Gain and loss inside one
full-operator call share the same (v1, sigma) nodes, which makes the
equilibrium cancellation (Maxwellian classically, Bose-Einstein for the
full Nordheim operator) exact to machine precision - the strongest
correctness oracle available to quadrature code.

Two execution paths: a vectorized numpy reference (any angular part b, any
distribution) and numba kernels (constant b, encodable distributions) used
automatically when the inputs allow.  Their agreement is itself a test.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from . import kernels
from .distributions import Distribution, GridDistribution
from .errors import ConfigError, RangeError
from .grids import SphereRule, VelocityGrid, grid_moments

__all__ = [
    "CrossSection",
    "OperatorParams",
    "gain_cl",
    "frequency_cl",
    "loss_cl",
    "gain_qu",
    "loss_qu",
    "frequency_qu",
    "full_q",
    "full_q_grid",
    "gain_freq_grid",
    "conservation_defect",
]

_BRANCHES = {"full": 0, "Q0": 1, "Q1": 2}


@dataclass(frozen=True)
class CrossSection:
    """B(u, sigma) = |u|^gamma b(u^.sigma) with bounded even angular part.

    b = None means the constant angular part b_value (hard spheres are
    gamma = 1, b = 1).  A callable b must be vectorized, even, and bounded
    by b_bound; this is checked on sample points at construction.
    """

    gamma: float
    b: object = None
    b_value: float = 1.0
    b_bound: float = None

    def __post_init__(self):
        if not (0.0 <= self.gamma <= 1.0):
            raise RangeError("cross-section gamma must lie in [0, 1]")
        if self.b is None:
            if self.b_value < 0:
                raise RangeError("constant angular part must be nonnegative")
            object.__setattr__(self, "b_bound", self.b_value)
        else:
            xs = np.linspace(-1.0, 1.0, 41)
            vals = np.asarray(self.b(xs), dtype=float)
            if np.any(vals < 0):
                raise RangeError("angular part b must be nonnegative")
            if np.max(np.abs(vals - np.asarray(self.b(-xs)))) > 1e-12:
                raise RangeError("angular part b must be even")
            bound = self.b_bound if self.b_bound is not None else float(np.max(vals))
            if np.any(vals > bound + 1e-12):
                raise RangeError("angular part b exceeds its stated bound")
            object.__setattr__(self, "b_bound", float(bound))

    @property
    def is_constant(self) -> bool:
        return self.b is None

    def b_eval(self, cos):
        if self.b is None:
            return np.full_like(np.asarray(cos, dtype=float), self.b_value)
        return np.asarray(self.b(cos), dtype=float)

    @classmethod
    def hard_sphere(cls) -> "CrossSection":
        return cls(gamma=1.0)


@dataclass(frozen=True)
class OperatorParams:
    """Quadrature configuration for one operator evaluation."""

    cross_section: CrossSection
    sphere_rule: SphereRule
    v1_grid: VelocityGrid
    branch: str = "full"

    def __post_init__(self):
        if self.branch not in _BRANCHES:
            raise ConfigError(f"branch must be one of {sorted(_BRANCHES)}")

    @property
    def branch_code(self) -> int:
        return _BRANCHES[self.branch]


def _as_points(v):
    pts = np.atleast_2d(np.asarray(v, dtype=float))
    if pts.shape[-1] != 3:
        raise RangeError("evaluation points must have 3 components")
    return pts, np.asarray(v).ndim == 1


def _chi(cos):
    """Half-sphere cutoff: 1 on u^.sigma > 0, 1/2 exactly on the equator."""
    return (cos > 0.0).astype(float) + 0.5 * (cos == 0.0)


def _collision_nodes(params: OperatorParams, v):
    """Per-point quadrature tensors shared by the reference operators.

    Returns (vstar, v1star, weight, un) with weight = 2 h^3 w_sigma chi
    |u|^gamma b; shapes (n1, m, 3) and (n1, m).
    """
    grid = params.v1_grid
    rule = params.sphere_rule
    cs = params.cross_section
    v1 = grid.nodes
    u = v[None, :] - v1
    un = np.linalg.norm(u, axis=1)
    uhat = np.zeros_like(u)
    nz = un > 0.0
    uhat[nz] = u[nz] / un[nz, None]
    uhat[~nz] = (0.0, 0.0, 1.0)  # u = 0 convention, only used for gamma = 0
    cos = uhat @ rule.nodes.T
    with np.errstate(divide="ignore"):
        ug = np.where(nz, un, 0.0) ** cs.gamma if cs.gamma > 0 else np.ones_like(un)
    center = v[None, :] - 0.5 * u
    disp = 0.5 * un[:, None, None] * rule.nodes[None, :, :]
    vstar = center[:, None, :] - disp
    v1star = center[:, None, :] + disp
    weight = 2.0 * grid.cell_volume * rule.weights[None, :] * _chi(cos) * \
        cs.b_eval(cos) * ug[:, None]
    return vstar, v1star, weight, un


def _branch_mask(params, v, vstar, v1star):
    if params.branch == "full":
        return 1.0
    v1 = params.v1_grid.nodes
    half_e = 0.5 * (v @ v + np.sum(v1 * v1, axis=1))[:, None]
    if params.branch == "Q0":
        return (np.sum(vstar * vstar, axis=2) >= half_e).astype(float)
    return (np.sum(v1star * v1star, axis=2) >= half_e).astype(float)


def _can_use_kernel(params, *dists):
    return params.cross_section.is_constant and all(kernels.encodable(d) for d in dists)


def _pick_backend(backend, params, *dists):
    if backend == "numpy":
        return "numpy"
    ok = _can_use_kernel(params, *dists)
    if backend == "numba":
        if not ok:
            raise ConfigError("numba backend needs constant b and encodable distributions")
        return "numba"
    if backend == "auto":
        return "numba" if ok else "numpy"
    raise ConfigError(f"unknown backend {backend!r}")


def _scalar_or_array(out, was_scalar):
    return float(out[0]) if was_scalar else out


def gain_cl(f, g, params: OperatorParams, v, backend="auto"):
    """Classical multilinear gain Q+_cl(f, g) at velocity v (or points).

    2 sum |u|^gamma b(u^.sigma) f(v*) g(v1*) over u^.sigma > 0, with the
    configured branch indicator applied.
    """
    pts, scalar = _as_points(v)
    if _pick_backend(backend, params, f, g) == "numba":
        out = kernels.gain_pair_points(
            pts, *kernels.encode_distribution(f), *kernels.encode_distribution(g),
            params.v1_grid.nodes, params.v1_grid.cell_volume,
            params.sphere_rule.nodes, params.sphere_rule.weights,
            params.cross_section.gamma, params.cross_section.b_value,
            params.branch_code, np.zeros((0, 3)), np.zeros(0))
        return _scalar_or_array(out, scalar)
    out = np.empty(len(pts))
    for i, p in enumerate(pts):
        vstar, v1star, w, _ = _collision_nodes(params, p)
        w = w * _branch_mask(params, p, vstar, v1star)
        out[i] = float(np.sum(w * f(vstar) * g(v1star)))
    return _scalar_or_array(out, scalar)


def frequency_cl(g, params: OperatorParams, v, backend="auto"):
    """Classical collision frequency: 2 sum |u|^gamma b g(v1) over the
    half sphere.  For constant b the sphere sum is exactly 2 pi b, so this
    reduces to 4 pi b h^3 sum |v - v1|^gamma g(v1)."""
    pts, scalar = _as_points(v)
    grid = params.v1_grid
    cs = params.cross_section
    g1 = np.asarray(g(grid.nodes), dtype=float)
    if cs.is_constant and backend != "numpy":
        u = pts[:, None, :] - grid.nodes[None, :, :]
        un = np.linalg.norm(u, axis=2)
        ug = un ** cs.gamma if cs.gamma > 0 else np.ones_like(un)
        if cs.gamma == 0.0:
            ug = np.ones_like(un)
        out = 4.0 * np.pi * cs.b_value * grid.cell_volume * (ug @ g1)
        return _scalar_or_array(out, scalar)
    out = np.empty(len(pts))
    for i, p in enumerate(pts):
        _, _, w, _ = _collision_nodes(params, p)
        out[i] = float(np.sum(np.sum(w, axis=1) * g1))
    return _scalar_or_array(out, scalar)


def loss_cl(f, g, params: OperatorParams, v, backend="auto"):
    """Q-_cl(f, g) = f(v) R_cl(g)(v)."""
    pts, scalar = _as_points(v)
    out = np.asarray(f(pts), dtype=float) * frequency_cl(g, params, pts, backend=backend)
    return _scalar_or_array(out, scalar)


_QU_CODES = {"G0": 0, "G1": 1, "L0": 2, "L1": 3}


def _quantum(f, g, h, params, v, code, backend):
    pts, scalar = _as_points(v)
    grid = params.v1_grid
    if _pick_backend(backend, params, f, g, h) == "numba":
        fpts = np.asarray(f(pts), dtype=float)
        f1vals = np.asarray(f(grid.nodes), dtype=float)
        g1vals = np.asarray(g(grid.nodes), dtype=float)
        out = kernels.quantum_points(
            pts, code, fpts, f1vals, g1vals,
            *kernels.encode_distribution(g), *kernels.encode_distribution(h),
            grid.nodes, grid.cell_volume,
            params.sphere_rule.nodes, params.sphere_rule.weights,
            params.cross_section.gamma, params.cross_section.b_value)
        return _scalar_or_array(out, scalar)
    g1 = np.asarray(g(grid.nodes), dtype=float)
    f1 = np.asarray(f(grid.nodes), dtype=float)
    out = np.empty(len(pts))
    for i, p in enumerate(pts):
        vstar, v1star, w, _ = _collision_nodes(params, p)
        if code == 0:
            val = float(f(p)) * np.sum(w * g(vstar) * h(v1star))
        elif code == 1:
            val = np.sum(w * f1[:, None] * g(vstar) * h(v1star))
        elif code == 2:
            val = float(f(p)) * np.sum(w * g1[:, None] * h(vstar))
        elif code == 3:
            val = float(f(p)) * np.sum(w * g1[:, None] * h(v1star))
        else:  # Rqu
            val = np.sum(w * g1[:, None] * (h(vstar) + h(v1star)))
        out[i] = val
    return _scalar_or_array(out, scalar)


def gain_qu(f, g, h, params: OperatorParams, v, which="G0", backend="auto"):
    """Quantum multilinear gain terms G0/G1 (with the angular part b
    included, consistently with the assembled Nordheim operator)."""
    if which not in ("G0", "G1"):
        raise ConfigError("which must be 'G0' or 'G1'")
    return _quantum(f, g, h, params, v, _QU_CODES[which], backend)


def loss_qu(f, g, h, params: OperatorParams, v, which="L0", backend="auto"):
    """Quantum multilinear loss terms L0/L1."""
    if which not in ("L0", "L1"):
        raise ConfigError("which must be 'L0' or 'L1'")
    return _quantum(f, g, h, params, v, _QU_CODES[which], backend)


def frequency_qu(g, h, params: OperatorParams, v, backend="auto"):
    """Quantum collision frequency R_qu(g, h) = 2 sum |u|^gamma b g(v1)
    (h(v*) + h(v1*)) over the half sphere."""
    return _quantum(g, g, h, params, v, 4, backend)


def full_q(f: Distribution, params: OperatorParams, v, mode="classical",
           cubic_scale=None, backend="auto"):
    """Assembled collision operator Q[f] at velocity v (or points).

    classical: Q+_cl(f,f) - f R_cl(f); quantum: Q+[f] - f R[f] with the
    cubic Nordheim terms.  Gain and frequency are accumulated over shared
    (v1, sigma) nodes so equilibria cancel at machine precision.
    cubic_scale overrides the cubic coupling (diagnostic: quantum mode with
    cubic_scale = 0 reproduces classical mode bit for bit).
    """
    gain, freq, fpts, scalar = _gain_freq_points(f, params, v, mode, cubic_scale, backend)
    out = gain - fpts * freq
    return _scalar_or_array(out, scalar)


def gain_and_frequency(f: Distribution, params: OperatorParams, v,
                       mode="classical", cubic_scale=None, backend="auto"):
    """(Q+[f], R[f]) at points, accumulated over shared quadrature nodes.

    full_q is their combination gain - f * freq; exposing both gives
    callers the natural magnitude scale of the cancellation.
    """
    gain, freq, _, scalar = _gain_freq_points(f, params, v, mode, cubic_scale, backend)
    if scalar:
        return float(gain[0]), float(freq[0])
    return gain, freq


def _cubic_of(mode, cubic_scale):
    if mode not in ("classical", "quantum"):
        raise ConfigError("mode must be 'classical' or 'quantum'")
    if cubic_scale is None:
        return 0.0 if mode == "classical" else 1.0
    return float(cubic_scale)


def _gain_freq_points(f, params, v, mode, cubic_scale, backend):
    pts, scalar = _as_points(v)
    cubic = _cubic_of(mode, cubic_scale)
    grid = params.v1_grid
    fpts = np.asarray(f(pts), dtype=float)
    if _pick_backend(backend, params, f) == "numba":
        f1vals = np.asarray(f(grid.nodes), dtype=float)
        gain, freq = kernels.nordheim_points(
            pts, fpts, f1vals, *kernels.encode_distribution(f),
            grid.nodes, grid.cell_volume,
            params.sphere_rule.nodes, params.sphere_rule.weights,
            params.cross_section.gamma, params.cross_section.b_value, cubic)
        return gain, freq, fpts, scalar
    f1 = np.asarray(f(grid.nodes), dtype=float)
    gain = np.empty(len(pts))
    freq = np.empty(len(pts))
    for i, p in enumerate(pts):
        vstar, v1star, w, _ = _collision_nodes(params, p)
        fs = f(vstar)
        f1s = f(v1star)
        gain[i] = np.sum(w * (fs * f1s * (1.0 + cubic * (fpts[i] + f1[:, None]))))
        freq[i] = np.sum(w * (f1[:, None] * (1.0 + cubic * (fs + f1s))))
    return gain, freq, fpts, scalar


def gain_freq_grid(values: np.ndarray, params: OperatorParams, cubic: float):
    """Fused whole-grid (Q+[f], R[f]) for nodal values on the v1 grid.

    The workhorse of the solver: returns two flat arrays over the lattice.
    """
    grid = params.v1_grid
    if not params.cross_section.is_constant:
        raise ConfigError("whole-grid sweep requires a constant angular part")
    return kernels.nordheim_grid(
        np.ascontiguousarray(values.reshape(grid.n, grid.n, grid.n)),
        grid.axis, grid.radius, grid.h, grid.n,
        params.sphere_rule.nodes, params.sphere_rule.weights,
        params.cross_section.gamma, params.cross_section.b_value, cubic)


def full_q_grid(f: Distribution, params: OperatorParams, mode="classical",
                cubic_scale=None) -> np.ndarray:
    """Q[f] on every node of the v1 grid (flat array)."""
    cubic = _cubic_of(mode, cubic_scale)
    grid = params.v1_grid
    if isinstance(f, GridDistribution) and f.grid == grid:
        gain, freq = gain_freq_grid(f.values, params, cubic)
        fpts = f.values.reshape(-1)
    else:
        gain, freq, fpts, _ = _gain_freq_points(f, params, grid.nodes, mode,
                                                cubic_scale, "auto")
    return gain - fpts * freq


def conservation_defect(f: Distribution, params: OperatorParams, mode="classical"):
    """Discrete (mass, momentum, energy) production of Q[f] over the grid.

    All three vanish for the continuum operator; the discrete values are
    quadrature diagnostics and should shrink under refinement.
    """
    q = full_q_grid(f, params, mode)
    return grid_moments(q, params.v1_grid)
