"""Exponent admissibility algebra and the empirical-constant harness.

The moment-preserving gain estimate

    || <v>^k Q+(f,g) ||_r  <~  ||<v>^k f||_p ||<v>^g g||_q + (k <-> g swap)

holds for Young-compatible (p, q, r) satisfying the strict condition
1/q + gamma r / (2(r - q)) < 2/p (limit 1/q + gamma/2 < 2/p at r = inf).
This module implements that algebra (admissibility check, the alpha
witness, the minimum-r sweep for hard spheres, the small-delta exponent
family) and a falsification harness that measures the ratio lhs/rhs on
seeded random ensembles.  The harness cannot prove the inequality; it
falsifies misimplementations, so acceptance is refinement stability of
the ratios, never a specific constant.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from . import kernels
from .distributions import GaussianMixture, GridDistribution
from .errors import DegenerateInput, RangeError
from .geometry import japanese_bracket
from .grids import SphereRule, VelocityGrid, WeightedNormSpec, build_sphere_rule, weighted_lp_norm
from .operators import OperatorParams, frequency_cl, gain_cl, gain_qu, loss_cl, loss_qu

__all__ = [
    "ExponentTriple",
    "AdmissibilityResult",
    "check_admissible",
    "MinRResult",
    "min_r_sweep",
    "DeltaFamily",
    "delta_family",
    "EstimateReport",
    "SampleRecord",
    "empirical_constant",
    "lossy_bounds_check",
    "random_mixture_ensemble",
]

INF = math.inf


def _inv(x):
    return 0.0 if math.isinf(x) else 1.0 / x


@dataclass(frozen=True)
class ExponentTriple:
    """(p, q, r) with weight power k and kernel power gamma."""

    p: float
    q: float
    r: float
    k: float
    gamma: float

    def __post_init__(self):
        if self.p < 1 or self.q < 1 or self.r < 1:
            raise RangeError("exponents p, q, r must be >= 1")
        if self.k < self.gamma:
            raise RangeError("weight power k must be >= gamma")
        if not (0.0 <= self.gamma <= 1.0):
            raise RangeError("gamma must lie in [0, 1]")

    def young_residual(self) -> float:
        return (1.0 + _inv(self.r)) - (_inv(self.p) + _inv(self.q))


def young_r(p: float, q: float) -> float:
    """r implied by 1 + 1/r = 1/p + 1/q (inf when the sum is exactly 1)."""
    s = _inv(p) + _inv(q) - 1.0
    if s < 0:
        raise RangeError("1/p + 1/q < 1 admits no Young exponent r >= 1")
    return INF if s == 0.0 else 1.0 / s


@dataclass(frozen=True)
class AdmissibilityResult:
    status: str  # admissible | youngFail | conditionFail
    alpha: float = None
    alpha_interval: tuple = None
    diagnostics: dict = field(default_factory=dict)

    @property
    def admissible(self) -> bool:
        return self.status == "admissible"


# the alpha witness must clear both strict inequalities by at least this
_ALPHA_MARGIN = 1e-9


def check_admissible(t: ExponentTriple) -> AdmissibilityResult:
    """Classify an exponent triple for the gain convolution estimate.

    Verifies the Young relation (to 1e-9), then the strict condition
    1/q + gamma r/(2(r-q)) < 2/p, using the limit value 1/q + gamma/2 at
    r = inf; r = q with r < inf is rejected (the condition divides by
    r - q).  On success returns the midpoint of the admissible alpha
    interval, which automatically satisfies alpha p < 2 and alpha q > 1.

    Diagnostics record both forms of the hard-sphere boundary condition:
    the cleared-denominator quadratic 3p^2 - (2+4q)p + 4q < 0 derived from
    the condition itself, and the (typo-suspect) displayed quadratic
    p^2 + p/(p-1) < 2q, whose truth values differ.
    """
    diag = {}
    if abs(t.young_residual()) > 1e-9:
        return AdmissibilityResult("youngFail", diagnostics={"young_residual": t.young_residual()})
    upper = 2.0 / t.p
    if math.isinf(t.r):
        lower = _inv(t.q) + 0.5 * t.gamma
        diag["condition_limit_r_inf"] = True
    else:
        if not t.r > t.q:
            return AdmissibilityResult(
                "conditionFail", diagnostics={"reason": "needs r > q strictly for r < inf"}
            )
        lower = _inv(t.q) + t.gamma * t.r / (2.0 * (t.r - t.q))
    diag["condition_value"] = lower
    diag["condition_bound"] = upper
    if t.gamma == 1.0 and not math.isinf(t.r) and t.p > 1.0:
        diag["cleared_quadratic_holds"] = 3 * t.p**2 - (2 + 4 * t.q) * t.p + 4 * t.q < 0
        diag["displayed_quadratic_holds"] = t.p**2 + t.p / (t.p - 1.0) < 2 * t.q
    if not lower < upper - 2 * _ALPHA_MARGIN:
        return AdmissibilityResult("conditionFail", diagnostics=diag)
    alpha = 0.5 * (lower + upper)
    diag["alpha_p"] = alpha * t.p
    diag["alpha_q"] = alpha * t.q
    assert alpha * t.p < 2.0 and alpha * t.q > 1.0
    return AdmissibilityResult("admissible", alpha, (lower, upper), diag)


def _is_q_feasible(q: float, gamma: float, samples: int = 400) -> bool:
    """Any admissible p for this q (with the Young-implied r)?"""
    lo = max(1.0 + 1e-12, q / (q + 1e-12) if q > 1 else 1.0)
    for p in np.linspace(1.0 + 1e-9, min(q, 4.0), samples):
        try:
            r = young_r(p, q)
        except RangeError:
            continue
        if check_admissible(ExponentTriple(p, q, r, gamma, gamma)).admissible:
            return True
    return False


def _min_admissible_p(q: float, gamma: float) -> float:
    """Smallest admissible p at fixed q, by bisection on the predicate."""
    grid = np.linspace(1.0 + 1e-9, min(q, 4.0), 400)
    ok = None
    for p in grid:
        try:
            r = young_r(p, q)
        except RangeError:
            continue
        if check_admissible(ExponentTriple(p, q, r, gamma, gamma)).admissible:
            ok = p
            break
    if ok is None:
        return math.nan
    lo, hi = 1.0, ok
    for _ in range(80):
        mid = 0.5 * (lo + hi)
        try:
            adm = check_admissible(
                ExponentTriple(mid, q, young_r(mid, q), gamma, gamma)
            ).admissible
        except RangeError:
            adm = False
        if adm:
            hi = mid
        else:
            lo = mid
    return hi


def _admissible_at(p: float, q: float, gamma: float) -> bool:
    try:
        return check_admissible(ExponentTriple(p, q, young_r(p, q), gamma, gamma)).admissible
    except RangeError:
        return False


def _max_admissible_p(q: float, gamma: float) -> float:
    """Largest admissible p at fixed q with a finite Young exponent.

    Capped by the conjugate q/(q-1): beyond it 1/p + 1/q < 1 and no
    Lebesgue r exists, even where the cleared-form quadratic still holds.
    """
    cap = q / (q - 1.0) if q > 1.0 else 4.0
    grid = np.linspace(1.0 + 1e-9, min(cap, 4.0), 400)
    ok = [p for p in grid if _admissible_at(p, q, gamma)]
    if not ok:
        return math.nan
    lo, hi = ok[-1], min(cap, 4.0)
    for _ in range(80):
        mid = 0.5 * (lo + hi)
        if _admissible_at(mid, q, gamma):
            lo = mid
        else:
            hi = mid
    return lo


@dataclass(frozen=True)
class MinRResult:
    r_min: float
    p_star: float
    q_star: float
    q_threshold: float
    p_interval_at_q_star: tuple


def min_r_sweep(gamma: float = 1.0, resolution: int = 2000) -> MinRResult:
    """Minimum Young-implied r over the admissible (p, q) region.

    For hard spheres the admissible region opens only above a threshold q;
    at fixed q the smallest r is attained at the smallest admissible p, so
    the sweep bisects the feasibility boundary in p and golden-sections
    over q.  Everything runs through check_admissible: no closed-form
    boundary is assumed, so the paper's reported optimum is reproduced
    independently.
    """
    if gamma != 1.0:
        raise RangeError("the minimum-r sweep targets the hard-sphere case gamma = 1")
    # feasibility threshold in q by bisection
    lo, hi = 1.0, 4.0
    if not _is_q_feasible(hi, gamma):
        raise RangeError("no feasible q found below 4")
    for _ in range(60):
        mid = 0.5 * (lo + hi)
        if _is_q_feasible(mid, gamma):
            hi = mid
        else:
            lo = mid
    q_threshold = hi

    def r_of_q(q):
        p = _min_admissible_p(q, gamma)
        if math.isnan(p):
            return INF, math.nan
        return young_r(p, q), p

    # golden-section over q
    gr = 0.5 * (math.sqrt(5.0) - 1.0)
    a, b = q_threshold + 1e-6, 4.0
    c = b - gr * (b - a)
    d = a + gr * (b - a)
    fc, _ = r_of_q(c)
    fd, _ = r_of_q(d)
    for _ in range(max(60, resolution // 20)):
        if fc < fd:
            b, d, fd = d, c, fc
            c = b - gr * (b - a)
            fc, _ = r_of_q(c)
        else:
            a, c, fc = c, d, fd
            d = a + gr * (b - a)
            fd, _ = r_of_q(d)
    q_star = 0.5 * (a + b)
    r_min, p_star = r_of_q(q_star)
    p_lo = _min_admissible_p(q_star, gamma)
    p_hi = _max_admissible_p(q_star, gamma)
    return MinRResult(r_min, p_star, q_star, q_threshold, (p_lo, p_hi))


@dataclass(frozen=True)
class DeltaFamily:
    """The small parameters delta_1..delta_4 derived from one delta.

    delta_1 = delta_2 = 4 delta/(3 + 2 delta), delta_3 = 16 delta/(9 + 14
    delta), delta_4 = 16 delta/(9 - 2 delta); all below 2 delta, and the
    six exponent identities used by the convolution/interpolation/Holder
    steps hold exactly.
    """

    delta: float
    d1: float
    d2: float
    d3: float
    d4: float

    def identity_residuals(self) -> np.ndarray:
        d, d1, d2, d3, d4 = self.delta, self.d1, self.d2, self.d3, self.d4
        return np.array(
            [
                1.0 / (1.5 + d) + 1.0 / (2.0 - d3) - (1.0 + 1.0 / 6.0),
                1.0 / (2.0 - d3) + 1.0 / (2.0 + d4) - 1.0,
                3.0 * (1.0 / (1.5 + d) - 1.0 / 6.0) - (1.5 - d1),
                3.0 * (1.0 / (2.0 + d4) - 1.0 / 6.0) - (1.0 - d2),
                1.0 / 6.0 + (1.0 + 2.0 * d) / (3.0 + 2.0 * d) - 1.0 / (2.0 - d3),
                1.0 / 6.0 + 1.0 / (2.0 + d4) - 1.0 / (1.5 + d),
            ]
        )

    def shifted_exponents(self):
        """The delta-shifted Lebesgue exponents (3/2+d, 2-d3, 2+d4)."""
        return 1.5 + self.delta, 2.0 - self.d3, 2.0 + self.d4


def delta_family(delta: float) -> DeltaFamily:
    if not (0.0 < delta < 0.01):
        raise RangeError("delta must lie strictly inside (0, 1/100)")
    fam = DeltaFamily(
        delta,
        4.0 * delta / (3.0 + 2.0 * delta),
        4.0 * delta / (3.0 + 2.0 * delta),
        16.0 * delta / (9.0 + 14.0 * delta),
        16.0 * delta / (9.0 - 2.0 * delta),
    )
    assert max(fam.d1, fam.d2, fam.d3, fam.d4) < 2.0 * delta
    assert np.max(np.abs(fam.identity_residuals())) <= 1e-12
    return fam


def random_mixture_ensemble(count, seed, bumps=(1, 3), center_radius=3.0,
                            beta_range=(0.5, 2.0), amplitude_range=(0.5, 1.5)):
    """Seeded ensemble of (f, g) Gaussian-mixture pairs for the harness."""
    rng = np.random.default_rng(seed)

    def one():
        nb = rng.integers(bumps[0], bumps[1] + 1)
        terms = []
        for _ in range(nb):
            a = rng.uniform(*amplitude_range)
            c = rng.uniform(-1.0, 1.0, size=3)
            c *= center_radius * rng.uniform(0, 1) / max(np.linalg.norm(c), 1e-12)
            b = rng.uniform(*beta_range)
            terms.append((a, c, b))
        return GaussianMixture(terms)

    return [(one(), one()) for _ in range(count)]


def _pair_prune_arrays(f: GaussianMixture, g: GaussianMixture, tau=1e-18):
    """(centers, squared radii) of the v1-node keep balls for one pair.

    A v1 node can be skipped when every combined-bump bound
    A exp(-btilde |v + v1 - s|^2) falls below tau times the peak bound.
    """
    af, ag = np.abs(f.amplitudes), np.abs(g.amplitudes)
    s = f.centers[:, None, :] + g.centers[None, :, :]
    bt = (f.betas[:, None] * g.betas[None, :]) / (f.betas[:, None] + g.betas[None, :])
    amp = af[:, None] * ag[None, :]
    amp_max = np.max(amp)
    d2 = (np.log(amp / (tau * amp_max))) / bt
    keep = d2 > 0
    return (np.ascontiguousarray(s[keep].reshape(-1, 3)),
            np.ascontiguousarray(d2[keep].reshape(-1)))


def _output_bound(f: GaussianMixture, g: GaussianMixture, pts, k, b_value):
    """Cheap rigorous majorant of <v>^k Q+(f,g) on candidate output nodes."""
    af, ag = np.abs(f.amplitudes), np.abs(g.amplitudes)
    s = (f.centers[:, None, :] + g.centers[None, :, :]).reshape(-1, 3)
    bt = ((f.betas[:, None] * g.betas[None, :]) /
          (f.betas[:, None] + g.betas[None, :])).reshape(-1)
    amp = (af[:, None] * ag[None, :]).reshape(-1)
    d = 2.0 * pts[:, None, :] - s[None, :, :]
    dist = np.linalg.norm(d, axis=2)
    per = amp * 2.0 * (np.pi / bt) ** 1.5 * (dist + 1.0 + 1.0 / np.sqrt(bt)) * \
        np.exp(-0.25 * bt * np.maximum(dist - 2.0 / np.sqrt(bt), 0.0) ** 2)
    total = 4.0 * np.pi * b_value * np.sum(per, axis=1)
    return total * japanese_bracket(pts) ** k


def _gain_on_grid(f, g, params: OperatorParams, k, prune=True):
    """<v>^k-weighted gain values on the v1 grid, with support pruning."""
    grid = params.v1_grid
    pts = grid.nodes
    if prune and isinstance(f, GaussianMixture) and isinstance(g, GaussianMixture) \
            and params.cross_section.is_constant:
        bound = _output_bound(f, g, pts, k, params.cross_section.b_value)
        keep = bound >= 1e-12 * np.max(bound)
        ps, pd = _pair_prune_arrays(f, g)
        vals = np.zeros(len(pts))
        vals[keep] = kernels.gain_pair_points(
            np.ascontiguousarray(pts[keep]),
            *kernels.encode_distribution(f), *kernels.encode_distribution(g),
            grid.nodes, grid.cell_volume,
            params.sphere_rule.nodes, params.sphere_rule.weights,
            params.cross_section.gamma, params.cross_section.b_value,
            params.branch_code, ps, pd)
        return vals
    return np.asarray(gain_cl(f, g, params, pts))


@dataclass(frozen=True)
class SampleRecord:
    sample_id: int
    lhs: float
    rhs: float
    ratio: float
    degenerate: bool = False


@dataclass(frozen=True)
class EstimateReport:
    triple: ExponentTriple
    samples: tuple
    max_ratio: float
    refinement_drift: float
    sphere_order: int
    seed: int

    @property
    def ratios(self):
        return np.array([s.ratio for s in self.samples if not s.degenerate])


def _weighted_norm_of_values(values, k_or_zero, p, grid):
    dist = GridDistribution(grid, np.abs(values).reshape((grid.n,) * 3))
    return weighted_lp_norm(dist, WeightedNormSpec(p, 0.0), grid)


def _estimate_lhs(f, g, triple, params, eval_points):
    grid = params.v1_grid
    if math.isinf(triple.r):
        pts = np.asarray(eval_points, dtype=float)
        vals = np.asarray(gain_cl(f, g, params, pts))
        return float(np.max(japanese_bracket(pts) ** triple.k * np.abs(vals)))
    weighted = _gain_on_grid(f, g, params, triple.k) * \
        japanese_bracket(grid.nodes) ** triple.k
    return _weighted_norm_of_values(weighted, 0.0, triple.r, grid)


def empirical_constant(triple: ExponentTriple, ensemble, params: OperatorParams,
                       eval_points=None, seed=0, refine=True) -> EstimateReport:
    """Measure lhs/rhs of the gain estimate over an ensemble.

    lhs is the weighted r-norm of Q+(f, g) (max over eval_points when
    r = inf, grid norm otherwise); rhs the two-term product of weighted
    input norms.  The report records the worst ratio and its drift when
    the sphere order is doubled; rhs = 0 samples are flagged degenerate
    and skipped (their lhs must vanish too).
    """
    res = check_admissible(triple)
    if not res.admissible:
        raise RangeError(f"triple not admissible: {res.status}")
    if math.isinf(triple.r) and eval_points is None:
        raise RangeError("r = inf needs explicit eval_points for the sup norm")
    grid = params.v1_grid

    def run(prm):
        records = []
        for i, (f, g) in enumerate(ensemble):
            rhs = (
                weighted_lp_norm(f, WeightedNormSpec(triple.p, triple.k), grid)
                * weighted_lp_norm(g, WeightedNormSpec(triple.q, triple.gamma), grid)
                + weighted_lp_norm(f, WeightedNormSpec(triple.p, triple.gamma), grid)
                * weighted_lp_norm(g, WeightedNormSpec(triple.q, triple.k), grid)
            )
            if rhs == 0.0:
                lhs = _estimate_lhs(f, g, triple, prm, eval_points)
                if lhs > 1e-14:
                    raise DegenerateInput("rhs vanished but lhs did not")
                records.append(SampleRecord(i, lhs, rhs, math.nan, degenerate=True))
                continue
            lhs = _estimate_lhs(f, g, triple, prm, eval_points)
            records.append(SampleRecord(i, lhs, rhs, lhs / rhs))
        return records

    records = run(params)
    ratios = [r.ratio for r in records if not r.degenerate]
    max_ratio = max(ratios) if ratios else math.nan
    drift = math.nan
    if refine and ratios:
        doubled = OperatorParams(
            params.cross_section,
            build_sphere_rule(params.sphere_rule.kind, 2 * params.sphere_rule.order),
            params.v1_grid, params.branch)
        rec2 = run(doubled)
        mr2 = max(r.ratio for r in rec2 if not r.degenerate)
        drift = abs(mr2 - max_ratio) / max_ratio
    return EstimateReport(triple, tuple(records), max_ratio, drift,
                          params.sphere_rule.order, seed)


def _sup_norm(f, grid):
    return float(np.max(np.abs(f(grid.nodes))))


@dataclass(frozen=True)
class LossyBoundsReport:
    exponents: tuple
    k: float
    gain_ratios: np.ndarray
    loss_ratios: np.ndarray
    quantum_gain_ratios: np.ndarray
    quantum_loss_ratios: np.ndarray
    refinement_drift: float


def lossy_bounds_check(ensemble, params: OperatorParams, exponents, k,
                       refine=True) -> LossyBoundsReport:
    """Moment-increasing gain/loss bounds measured on an ensemble.

    exponents = (p, q, r) with 1 <= p <= q <= r <= inf, the Young relation,
    and p < 2q.  Per pair the four ratio families are

        gain:   ||<v>^k Q+(f,g)||_r   / (||<v>^{k+g} f||_p ||<v>^{k+g} g||_q)
        loss:   ||<v>^k Q-(f,g)||_p   / (||<v>^{k+g} f||_p ||<v>^g g||_1)
        q-gain: ||<v>^k G_i(f,f,g)||_r / (||f||_inf ||<v>^{k+g} f||_p ||<v>^{k+g} g||_q)
        q-loss: ||<v>^k L_i(f,f,g)||_p / (||f||_inf ||<v>^{k+g} f||_p ||<v>^g g||_1)

    and the report carries the drift of the worst gain ratio under
    sphere-order doubling.
    """
    p, q, r = exponents
    if not (1 <= p <= q <= r):
        raise RangeError("need 1 <= p <= q <= r")
    if abs((1.0 + _inv(r)) - (_inv(p) + _inv(q))) > 1e-9:
        raise RangeError("exponents must satisfy the Young relation")
    if not p < 2 * q:
        raise RangeError("need p < 2q")
    grid = params.v1_grid
    gamma = params.cross_section.gamma
    nodes = grid.nodes
    wk = japanese_bracket(nodes) ** k

    def run(prm):
        gr, lr, qgr, qlr = [], [], [], []
        for f, g in ensemble:
            nf_kg = weighted_lp_norm(f, WeightedNormSpec(p, k + gamma), grid)
            ng_kg = weighted_lp_norm(g, WeightedNormSpec(q, k + gamma), grid)
            ng_g1 = weighted_lp_norm(g, WeightedNormSpec(1.0, gamma), grid)
            sup_f = _sup_norm(f, grid)
            gain_vals = _gain_on_grid(f, g, prm, k) * wk
            lhs_gain = _weighted_norm_of_values(gain_vals, 0.0, r, grid) \
                if not math.isinf(r) else float(np.max(np.abs(gain_vals)))
            gr.append(lhs_gain / (nf_kg * ng_kg))
            loss_vals = np.asarray(loss_cl(f, g, prm, nodes)) * wk
            lhs_loss = _weighted_norm_of_values(loss_vals, 0.0, p, grid)
            lr.append(lhs_loss / (nf_kg * ng_g1))
            for which in ("G0", "G1"):
                vals = np.asarray(gain_qu(f, f, g, prm, nodes, which=which)) * wk
                lhs = _weighted_norm_of_values(vals, 0.0, r, grid) \
                    if not math.isinf(r) else float(np.max(np.abs(vals)))
                qgr.append(lhs / (sup_f * nf_kg * ng_kg))
            for which in ("L0", "L1"):
                vals = np.asarray(loss_qu(f, f, g, prm, nodes, which=which)) * wk
                lhs = _weighted_norm_of_values(vals, 0.0, p, grid)
                qlr.append(lhs / (sup_f * nf_kg * ng_g1))
        return map(np.array, (gr, lr, qgr, qlr))

    gr, lr, qgr, qlr = run(params)
    drift = math.nan
    if refine:
        doubled = OperatorParams(
            params.cross_section,
            build_sphere_rule(params.sphere_rule.kind, 2 * params.sphere_rule.order),
            params.v1_grid, params.branch)
        gr2, _, _, _ = run(doubled)
        drift = abs(np.max(gr2) - np.max(gr)) / np.max(gr)
    return LossyBoundsReport(tuple(exponents), k, gr, lr, qgr, qlr, drift)
