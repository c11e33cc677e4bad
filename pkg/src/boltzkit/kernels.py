"""Compiled quadrature kernels for the collision operators.

The collision quadrature is a 5D sum (3 for the v1 lattice, 2 for the
sphere); at desk scale a single whole-grid operator application is ~1e8-1e9
scalar kernel evaluations, so the inner loops are numba-compiled.  Every
kernel is a parallel map over output points with a sequential inner
reduction in fixed (v1-node, sphere-node) order: results are deterministic
and independent of the thread count.

Distribution encoding shared by all kernels (10 positional fields):

    kind 0  grid-backed:      (values[n,n,n], radius, h, n, ...)
    kind 1  gaussian mixture: (..., amps[nb], centers[nb,3], betas[nb], ...)
    kind 2  bose-einstein:    (..., z, beta)

Unused fields are zero-size dummies.  Sphere-node convention: nodes with
u^.sigma > 0 count fully, u^.sigma == 0 exactly counts with weight 1/2,
the rest are skipped; a zero relative velocity contributes nothing for
gamma > 0 and uses u^ := e3 for gamma = 0.
"""

from __future__ import annotations

import math

import numpy as np
from numba import njit, prange

from .distributions import BoseEinstein, GaussianMixture, GridDistribution

__all__ = [
    "encode_distribution",
    "encodable",
    "nordheim_grid",
    "nordheim_points",
    "gain_pair_points",
    "quantum_points",
]

_DUMMY_VALS = np.zeros((1, 1, 1))
_DUMMY_AMPS = np.zeros(0)
_DUMMY_CENTS = np.zeros((0, 3))


def encodable(dist) -> bool:
    return isinstance(dist, (GridDistribution, GaussianMixture, BoseEinstein))


def encode_distribution(dist):
    """(kind, vals, radius, h, n, amps, cents, betas, z, beta) for kernels."""
    if isinstance(dist, GridDistribution):
        g = dist.grid
        return (0, np.ascontiguousarray(dist.values), g.radius, g.h, g.n,
                _DUMMY_AMPS, _DUMMY_CENTS, _DUMMY_AMPS, 0.0, 0.0)
    if isinstance(dist, GaussianMixture):
        return (1, _DUMMY_VALS, 0.0, 1.0, 1,
                np.ascontiguousarray(dist.amplitudes),
                np.ascontiguousarray(dist.centers),
                np.ascontiguousarray(dist.betas), 0.0, 0.0)
    if isinstance(dist, BoseEinstein):
        return (2, _DUMMY_VALS, 0.0, 1.0, 1,
                _DUMMY_AMPS, _DUMMY_CENTS, _DUMMY_AMPS,
                dist.fugacity, dist.beta)
    raise TypeError(f"distribution {type(dist).__name__} has no kernel encoding")


@njit(inline="always")
def _snap(f, tol):
    # grid nodes land within ~n*eps of integer cell coordinates; snapping
    # makes nodal evaluation exact while leaving the weights in [0, 1]
    if f < tol:
        return 0.0
    if f > 1.0 - tol:
        return 1.0
    return f


@njit(inline="always")
def _trilerp(vals, radius, h, n, x, y, z):
    if x < -radius or x > radius or y < -radius or y > radius or z < -radius or z > radius:
        return 0.0
    tol = n * 1e-15
    tx = (x + radius) / h
    ty = (y + radius) / h
    tz = (z + radius) / h
    ix = int(tx)
    iy = int(ty)
    iz = int(tz)
    if ix > n - 2:
        ix = n - 2
    if iy > n - 2:
        iy = n - 2
    if iz > n - 2:
        iz = n - 2
    fx = _snap(tx - ix, tol)
    fy = _snap(ty - iy, tol)
    fz = _snap(tz - iz, tol)
    gx = 1.0 - fx
    gy = 1.0 - fy
    gz = 1.0 - fz
    return (
        gx * (gy * (gz * vals[ix, iy, iz] + fz * vals[ix, iy, iz + 1])
              + fy * (gz * vals[ix, iy + 1, iz] + fz * vals[ix, iy + 1, iz + 1]))
        + fx * (gy * (gz * vals[ix + 1, iy, iz] + fz * vals[ix + 1, iy, iz + 1])
                + fy * (gz * vals[ix + 1, iy + 1, iz] + fz * vals[ix + 1, iy + 1, iz + 1]))
    )


@njit(inline="always")
def _eval1(kind, vals, radius, h, n, amps, cents, betas, z, beta, x, y, zc):
    if kind == 0:
        return _trilerp(vals, radius, h, n, x, y, zc)
    elif kind == 1:
        acc = 0.0
        for b in range(amps.shape[0]):
            dx = x - cents[b, 0]
            dy = y - cents[b, 1]
            dz = zc - cents[b, 2]
            acc += amps[b] * math.exp(-betas[b] * (dx * dx + dy * dy + dz * dz))
        return acc
    else:
        t = z * math.exp(-beta * (x * x + y * y + zc * zc))
        return t / (1.0 - t)


@njit(inline="always")
def _upow(un, gamma):
    if gamma == 1.0:
        return un
    if gamma == 0.0:
        return 1.0
    return un**gamma


@njit(parallel=True, fastmath=True, cache=True)
def nordheim_grid(vals, axis, radius, h, n, sph, sw, gamma, bval, cubic):
    """Fused gain/frequency sweep of a grid-backed f over its own lattice.

    Returns (gain, freq) flat arrays of length n^3 with

        gain(v) = 2 h^3 sum_{v1,sigma} w |u|^g b f* f1* (1 + cubic (f + f1))
        freq(v) = 2 h^3 sum_{v1,sigma} w |u|^g b f1 (1 + cubic (f* + f1*))

    restricted to u^.sigma > 0 (equator nodes at half weight); cubic = 0
    is the classical operator, cubic = 1 the full Nordheim one.
    """
    ntot = n * n * n
    gain = np.zeros(ntot)
    freq = np.zeros(ntot)
    m = sph.shape[0]
    h3 = h * h * h
    for i in prange(ntot):
        ix = i // (n * n)
        iy = (i // n) % n
        iz = i % n
        vx = axis[ix]
        vy = axis[iy]
        vz = axis[iz]
        fv = vals[ix, iy, iz]
        gacc = 0.0
        racc = 0.0
        for jx in range(n):
            ux = vx - axis[jx]
            for jy in range(n):
                uy = vy - axis[jy]
                for jz in range(n):
                    uz = vz - axis[jz]
                    f1 = vals[jx, jy, jz]
                    un = math.sqrt(ux * ux + uy * uy + uz * uz)
                    if un == 0.0:
                        if gamma > 0.0:
                            continue
                        hx = 0.0
                        hy = 0.0
                        hz = 1.0
                    else:
                        inv = 1.0 / un
                        hx = ux * inv
                        hy = uy * inv
                        hz = uz * inv
                    ug = _upow(un, gamma)
                    halfu = 0.5 * un
                    cvx = vx - 0.5 * ux
                    cvy = vy - 0.5 * uy
                    cvz = vz - 0.5 * uz
                    gj = 0.0
                    rj = 0.0
                    for k in range(m):
                        sx = sph[k, 0]
                        sy = sph[k, 1]
                        sz = sph[k, 2]
                        c = hx * sx + hy * sy + hz * sz
                        if c < 0.0:
                            continue
                        w = sw[k]
                        if c == 0.0:
                            w = 0.5 * w
                        ax = cvx - halfu * sx
                        ay = cvy - halfu * sy
                        az = cvz - halfu * sz
                        bx = cvx + halfu * sx
                        by = cvy + halfu * sy
                        bz = cvz + halfu * sz
                        fs = _trilerp(vals, radius, h, n, ax, ay, az)
                        f1s = _trilerp(vals, radius, h, n, bx, by, bz)
                        gj += w * (fs * f1s * (1.0 + cubic * (fv + f1)))
                        rj += w * (f1 * (1.0 + cubic * (fs + f1s)))
                    gacc += ug * gj
                    racc += ug * rj
        gain[i] = 2.0 * h3 * bval * gacc
        freq[i] = 2.0 * h3 * bval * racc
    return gain, freq


@njit(parallel=True, fastmath=True, cache=True)
def nordheim_points(pts, fpts, f1vals,
                    kind, vals, radius, h, n, amps, cents, betas, z, beta,
                    v1nodes, h3, sph, sw, gamma, bval, cubic):
    """Fused (gain, freq) of a single distribution at arbitrary points.

    fpts are the pre-evaluated f(points), f1vals the pre-evaluated values
    at the v1 integration nodes; the encoding is only used at v*, v1*.
    """
    npts = pts.shape[0]
    n1 = v1nodes.shape[0]
    m = sph.shape[0]
    gain = np.zeros(npts)
    freq = np.zeros(npts)
    for i in prange(npts):
        vx = pts[i, 0]
        vy = pts[i, 1]
        vz = pts[i, 2]
        fv = fpts[i]
        gacc = 0.0
        racc = 0.0
        for j in range(n1):
            ux = vx - v1nodes[j, 0]
            uy = vy - v1nodes[j, 1]
            uz = vz - v1nodes[j, 2]
            f1 = f1vals[j]
            un = math.sqrt(ux * ux + uy * uy + uz * uz)
            if un == 0.0:
                if gamma > 0.0:
                    continue
                hx = 0.0
                hy = 0.0
                hz = 1.0
            else:
                inv = 1.0 / un
                hx = ux * inv
                hy = uy * inv
                hz = uz * inv
            ug = _upow(un, gamma)
            halfu = 0.5 * un
            cvx = vx - 0.5 * ux
            cvy = vy - 0.5 * uy
            cvz = vz - 0.5 * uz
            gj = 0.0
            rj = 0.0
            for k in range(m):
                sx = sph[k, 0]
                sy = sph[k, 1]
                sz = sph[k, 2]
                c = hx * sx + hy * sy + hz * sz
                if c < 0.0:
                    continue
                w = sw[k]
                if c == 0.0:
                    w = 0.5 * w
                ax = cvx - halfu * sx
                ay = cvy - halfu * sy
                az = cvz - halfu * sz
                bx = cvx + halfu * sx
                by = cvy + halfu * sy
                bz = cvz + halfu * sz
                fs = _eval1(kind, vals, radius, h, n, amps, cents, betas, z, beta, ax, ay, az)
                f1s = _eval1(kind, vals, radius, h, n, amps, cents, betas, z, beta, bx, by, bz)
                gj += w * (fs * f1s * (1.0 + cubic * (fv + f1)))
                rj += w * (f1 * (1.0 + cubic * (fs + f1s)))
            gacc += ug * gj
            racc += ug * rj
        gain[i] = 2.0 * h3 * bval * gacc
        freq[i] = 2.0 * h3 * bval * racc
    return gain, freq


@njit(parallel=True, fastmath=True, cache=True)
def gain_pair_points(pts,
                     fk, fvals, frad, fh, fn, famps, fcents, fbetas, fz, fbeta,
                     gk, gvals, grad, gh, gn, gamps, gcents, gbetas, gz, gbeta,
                     v1nodes, h3, sph, sw, gamma, bval, branch,
                     prune_s, prune_d):
    """Bilinear classical gain Q+_cl(f,g) at arbitrary points.

    branch: 0 full, 1 restricts to |v*|^2 >= E/2, 2 to |v1*|^2 >= E/2.
    (prune_s, prune_d) optionally skip v1 nodes where every Gaussian bound
    A exp(-btilde |v + v1 - s|^2) is already below threshold: node kept iff
    |v + v1 - s_c|^2 <= prune_d[c] for some c.  Pass zero-size arrays to
    disable.
    """
    npts = pts.shape[0]
    n1 = v1nodes.shape[0]
    m = sph.shape[0]
    nc = prune_d.shape[0]
    out = np.zeros(npts)
    for i in prange(npts):
        vx = pts[i, 0]
        vy = pts[i, 1]
        vz = pts[i, 2]
        v2 = vx * vx + vy * vy + vz * vz
        acc = 0.0
        for j in range(n1):
            wx = v1nodes[j, 0]
            wy = v1nodes[j, 1]
            wz = v1nodes[j, 2]
            if nc > 0:
                keep = False
                for cidx in range(nc):
                    dx = vx + wx - prune_s[cidx, 0]
                    dy = vy + wy - prune_s[cidx, 1]
                    dz = vz + wz - prune_s[cidx, 2]
                    if dx * dx + dy * dy + dz * dz <= prune_d[cidx]:
                        keep = True
                        break
                if not keep:
                    continue
            ux = vx - wx
            uy = vy - wy
            uz = vz - wz
            un = math.sqrt(ux * ux + uy * uy + uz * uz)
            if un == 0.0:
                if gamma > 0.0:
                    continue
                hx = 0.0
                hy = 0.0
                hz = 1.0
            else:
                inv = 1.0 / un
                hx = ux * inv
                hy = uy * inv
                hz = uz * inv
            ug = _upow(un, gamma)
            halfu = 0.5 * un
            cvx = vx - 0.5 * ux
            cvy = vy - 0.5 * uy
            cvz = vz - 0.5 * uz
            half_e = 0.5 * (v2 + wx * wx + wy * wy + wz * wz)
            gj = 0.0
            for k in range(m):
                sx = sph[k, 0]
                sy = sph[k, 1]
                sz = sph[k, 2]
                c = hx * sx + hy * sy + hz * sz
                if c < 0.0:
                    continue
                w = sw[k]
                if c == 0.0:
                    w = 0.5 * w
                ax = cvx - halfu * sx
                ay = cvy - halfu * sy
                az = cvz - halfu * sz
                bx = cvx + halfu * sx
                by = cvy + halfu * sy
                bz = cvz + halfu * sz
                if branch == 1:
                    if ax * ax + ay * ay + az * az < half_e:
                        continue
                elif branch == 2:
                    if bx * bx + by * by + bz * bz < half_e:
                        continue
                fs = _eval1(fk, fvals, frad, fh, fn, famps, fcents, fbetas, fz, fbeta,
                            ax, ay, az)
                gs = _eval1(gk, gvals, grad, gh, gn, gamps, gcents, gbetas, gz, gbeta,
                            bx, by, bz)
                gj += w * fs * gs
            acc += ug * gj
        out[i] = 2.0 * h3 * bval * acc
    return out


@njit(parallel=True, fastmath=True, cache=True)
def quantum_points(pts, which, fpts, f1vals, g1vals,
                   gk, gvals, grad, gh, gn, gamps, gcents, gbetas, gz, gbeta,
                   hk, hvals, hrad, hh, hn, hamps, hcents, hbetas, hz, hbeta,
                   v1nodes, h3, sph, sw, gamma, bval):
    """Multilinear quantum operators at arbitrary points.

    which: 0 G0 = 2 f(v) S[g(v*) h(v1*)]     1 G1 = 2 S[f(v1) g(v*) h(v1*)]
           2 L0 = 2 f(v) S[g(v1) h(v*)]      3 L1 = 2 f(v) S[g(v1) h(v1*)]
           4 Rqu = 2 S[g(v1) (h(v*) + h(v1*))]

    with S the |u|^g b-weighted half-sphere x v1 quadrature sum.  fpts,
    f1vals, g1vals carry the nodal evaluations the formulas need.
    """
    npts = pts.shape[0]
    n1 = v1nodes.shape[0]
    m = sph.shape[0]
    out = np.zeros(npts)
    for i in prange(npts):
        vx = pts[i, 0]
        vy = pts[i, 1]
        vz = pts[i, 2]
        acc = 0.0
        for j in range(n1):
            ux = vx - v1nodes[j, 0]
            uy = vy - v1nodes[j, 1]
            uz = vz - v1nodes[j, 2]
            un = math.sqrt(ux * ux + uy * uy + uz * uz)
            if un == 0.0:
                if gamma > 0.0:
                    continue
                hx = 0.0
                hy = 0.0
                hz = 1.0
            else:
                inv = 1.0 / un
                hx = ux * inv
                hy = uy * inv
                hz = uz * inv
            ug = _upow(un, gamma)
            halfu = 0.5 * un
            cvx = vx - 0.5 * ux
            cvy = vy - 0.5 * uy
            cvz = vz - 0.5 * uz
            gj = 0.0
            for k in range(m):
                sx = sph[k, 0]
                sy = sph[k, 1]
                sz = sph[k, 2]
                c = hx * sx + hy * sy + hz * sz
                if c < 0.0:
                    continue
                w = sw[k]
                if c == 0.0:
                    w = 0.5 * w
                ax = cvx - halfu * sx
                ay = cvy - halfu * sy
                az = cvz - halfu * sz
                bx = cvx + halfu * sx
                by = cvy + halfu * sy
                bz = cvz + halfu * sz
                if which == 0:
                    term = (_eval1(gk, gvals, grad, gh, gn, gamps, gcents, gbetas, gz, gbeta, ax, ay, az)
                            * _eval1(hk, hvals, hrad, hh, hn, hamps, hcents, hbetas, hz, hbeta, bx, by, bz))
                elif which == 1:
                    term = (f1vals[j]
                            * _eval1(gk, gvals, grad, gh, gn, gamps, gcents, gbetas, gz, gbeta, ax, ay, az)
                            * _eval1(hk, hvals, hrad, hh, hn, hamps, hcents, hbetas, hz, hbeta, bx, by, bz))
                elif which == 2:
                    term = (g1vals[j]
                            * _eval1(hk, hvals, hrad, hh, hn, hamps, hcents, hbetas, hz, hbeta, ax, ay, az))
                elif which == 3:
                    term = (g1vals[j]
                            * _eval1(hk, hvals, hrad, hh, hn, hamps, hcents, hbetas, hz, hbeta, bx, by, bz))
                else:
                    term = g1vals[j] * (
                        _eval1(hk, hvals, hrad, hh, hn, hamps, hcents, hbetas, hz, hbeta, ax, ay, az)
                        + _eval1(hk, hvals, hrad, hh, hn, hamps, hcents, hbetas, hz, hbeta, bx, by, bz))
                gj += w * term
            acc += ug * gj
        if which == 0 or which == 2 or which == 3:
            acc *= fpts[i]
        out[i] = 2.0 * h3 * bval * acc
    return out
