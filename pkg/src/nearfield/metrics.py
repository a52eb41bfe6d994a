"""Near/far model mismatch metrics and their worst-case look-angle search."""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable

import numpy as np

from .arrays import ArrayConfig, DegenerateGeometryError, PolarPosition

THETA_INSET = 1e-9
"""Offset of the angle-grid endpoints, keeping the search on the open interval."""

# Largest cosine the search grid may use.  cos(THETA_INSET) rounds to exactly
# 1.0, and even one ulp below 1.0 rounds back to collinear geometry inside the
# law-of-cosines product, so the clamp sits a few ulps under 1.0.  That keeps
# the searched look angle strictly off the array axis, where R_n = 0 is
# reachable whenever the range matches an element offset.
_COS_OPEN_MAX = 1.0 - 4e-16

# Smallest angle whose cosine stays strictly below 1.0 after rounding; the
# pointwise twin of the clamp above for callers re-evaluating a worst-case
# angle that landed on the grid endpoint.
THETA_OPEN_MIN = math.acos(_COS_OPEN_MAX)

_INV_PHI = (math.sqrt(5.0) - 1.0) / 2.0
_INV_PHI2 = (3.0 - math.sqrt(5.0)) / 2.0

# cap per-block tensor size in the batched evaluator (elements, not bytes)
_BLOCK_BUDGET = 2_000_000


@dataclass(frozen=True)
class AngleSearchPolicy:
    """Coarse-grid plus golden-section settings for the look-angle maximization."""

    coarse_grid_points: int = 721
    refine_tolerance: float = 1e-6
    refine_max_iter: int = 200

    def __post_init__(self) -> None:
        if self.coarse_grid_points < 3:
            raise ValueError("coarse_grid_points must be at least 3")
        if self.refine_tolerance <= 0:
            raise ValueError("refine_tolerance must be positive")
        if self.refine_max_iter < 1:
            raise ValueError("refine_max_iter must be at least 1")


@dataclass(frozen=True)
class MetricSample:
    """A worst-case metric value at one range, with the maximizing angle."""

    range_m: float
    value: float
    theta_star: float


def _geometry(cfg: ArrayConfig, r: np.ndarray, cos_t: np.ndarray):
    """Distances, range offsets, and model phase gaps for ranges x cosines.

    r has shape (B,); cos_t has shape (B, T) or (1, T).  Returns three
    (B, T, N) arrays: R, R - r, and dphi = k*((R - r) + n*d*cos), the phase by
    which the spherical model leads the planar one at each element.  R is
    assembled as (r - nd)^2 + 2*r*nd*(1 - cos), which is exact where the
    direct law-of-cosines form cancels catastrophically, and R - r as
    (R^2 - r^2)/(R + r) for the same reason.
    """
    nd = cfg.element_offsets()
    r3 = r[:, None, None]
    cos3 = cos_t[:, :, None]
    gap = r3 - nd
    sq = gap * gap + (2.0 * r3 * nd) * (1.0 - cos3)
    dist = np.sqrt(sq)
    if np.any(dist == 0.0):
        raise DegenerateGeometryError(
            "a searched position coincides with an array element (R_n = 0)"
        )
    rmr = nd * (nd - (2.0 * r3) * cos3) / (dist + r3)
    dphi = cfg.wavenumber * (rmr + nd * cos3)
    return dist, rmr, dphi


def _element_mismatch_sq(r3: np.ndarray, dist: np.ndarray, rmr: np.ndarray, dphi: np.ndarray):
    """Squared per-element mismatch |e^{-jkR}/R - e^{-jk(r-nd cos)}/r|^2.

    Split into an amplitude gap and a phase gap, both nonnegative, instead of
    the direct cosine form whose terms cancel to roundoff.
    """
    dist_r = dist * r3
    amp = rmr / dist_r
    half = np.sin(0.5 * dphi)
    return amp * amp + 4.0 * half * half / dist_r


def _linf_grid(cfg: ArrayConfig, r: np.ndarray, cos_t: np.ndarray) -> np.ndarray:
    dist, rmr, dphi = _geometry(cfg, r, cos_t)
    return np.sqrt(_element_mismatch_sq(r[:, None, None], dist, rmr, dphi).max(axis=2))


def _l2_grid(cfg: ArrayConfig, r: np.ndarray, cos_t: np.ndarray) -> np.ndarray:
    dist, rmr, dphi = _geometry(cfg, r, cos_t)
    num = _element_mismatch_sq(r[:, None, None], dist, rmr, dphi).sum(axis=2)
    den = (1.0 / (dist * dist)).sum(axis=2)
    return np.sqrt(num / den)


def _eta_grid(cfg: ArrayConfig, r: np.ndarray, cos_t: np.ndarray) -> np.ndarray:
    dist, _, dphi = _geometry(cfg, r, cos_t)
    inv = 1.0 / dist
    csum = (np.cos(dphi) * inv).sum(axis=2)
    ssum = (np.sin(dphi) * inv).sum(axis=2)
    eta = (csum * csum + ssum * ssum) / (cfg.n_elements * (inv * inv).sum(axis=2))
    # Cauchy-Schwarz holds exactly; trim the few-ulp overshoot
    return np.minimum(eta, 1.0)


def _at_value(cfg: ArrayConfig, pos: PolarPosition, grid_fn) -> float:
    r = np.array([pos.range_m], dtype=float)
    cos_t = np.array([[math.cos(pos.theta)]])
    return float(grid_fn(cfg, r, cos_t)[0, 0])


def e_linf_at(cfg: ArrayConfig, pos: PolarPosition) -> float:
    """Largest single-element model mismatch at one position, in 1/m."""
    return _at_value(cfg, pos, _linf_grid)


def e_l2_at(cfg: ArrayConfig, pos: PolarPosition) -> float:
    """Total array mismatch normalized by the spherical-model gain (dimensionless)."""
    return _at_value(cfg, pos, _l2_grid)


def array_gain_efficiency(cfg: ArrayConfig, pos: PolarPosition) -> float:
    """Squared normalized inner product of the two channel models, in [0, 1]."""
    return _at_value(cfg, pos, _eta_grid)


def golden_max(
    f: Callable[[float], float], lo: float, hi: float, tol: float, max_iter: int
) -> tuple[float, float]:
    """Golden-section maximization of f on [lo, hi]; returns (argmax, max).

    Ties prefer the smaller abscissa so downstream results are deterministic.
    """
    a, b = lo, hi
    if b - a <= tol:
        mid = 0.5 * (a + b)
        return mid, f(mid)
    h = b - a
    c = a + _INV_PHI2 * h
    d = a + _INV_PHI * h
    yc = f(c)
    yd = f(d)
    for _ in range(max_iter):
        if b - a <= tol:
            break
        if yc >= yd:
            b, d, yd = d, c, yc
            c = a + _INV_PHI2 * (b - a)
            yc = f(c)
        else:
            a, c, yc = c, d, yd
            d = a + _INV_PHI * (b - a)
            yd = f(d)
    if yc >= yd:
        return c, yc
    return d, yd


def _golden_max_batch(f, lo: np.ndarray, hi: np.ndarray, tol: float, max_iter: int):
    """Vectorized golden-section maximization over per-row brackets.

    f maps an array of abscissas (one per row) to an array of values.  Each
    iteration evaluates one new point per row; carried points keep their
    already-computed values so rows stay bit-identical to the scalar search.
    """
    a = lo.astype(float).copy()
    b = hi.astype(float).copy()
    h = b - a
    c = a + _INV_PHI2 * h
    d = a + _INV_PHI * h
    yc = f(c)
    yd = f(d)
    for _ in range(max_iter):
        if np.all(b - a <= tol):
            break
        left = yc >= yd
        b = np.where(left, d, b)
        a = np.where(left, a, c)
        carry_x = np.where(left, c, d)
        carry_y = np.where(left, yc, yd)
        h = b - a
        eval_x = np.where(left, a + _INV_PHI2 * h, a + _INV_PHI * h)
        eval_y = f(eval_x)
        c = np.where(left, eval_x, carry_x)
        yc = np.where(left, eval_y, carry_y)
        d = np.where(left, carry_x, eval_x)
        yd = np.where(left, carry_y, eval_y)
    take_c = yc >= yd
    return np.where(take_c, c, d), np.where(take_c, yc, yd)


def _angle_grid(policy: AngleSearchPolicy) -> np.ndarray:
    grid = np.linspace(THETA_INSET, math.pi - THETA_INSET, policy.coarse_grid_points)
    # both mismatch regimes must be seeded: the phase gap peaks near pi/2, the
    # amplitude gap near the interval ends, and the maximizer switches with range
    return np.union1d(grid, [THETA_INSET, 0.5 * math.pi, math.pi - THETA_INSET])


def _clamped_cos(theta: np.ndarray) -> np.ndarray:
    return np.minimum(np.cos(theta), _COS_OPEN_MAX)


def _worst_over_angle_batch(
    cfg: ArrayConfig,
    r_values: np.ndarray,
    policy: AngleSearchPolicy,
    grid_fn,
) -> tuple[np.ndarray, np.ndarray]:
    """Worst metric value and maximizing angle for every range in r_values."""
    r_values = np.asarray(r_values, dtype=float)
    if np.any(r_values <= 0):
        raise ValueError("all ranges must be positive")
    if cfg.n_elements == 1:
        return np.zeros_like(r_values), np.zeros_like(r_values)
    thetas = _angle_grid(policy)
    cos_row = _clamped_cos(thetas)[None, :]
    n_t = len(thetas)
    block = max(1, min(64, _BLOCK_BUDGET // (n_t * cfg.n_elements)))
    values = np.empty_like(r_values)
    theta_stars = np.empty_like(r_values)
    for start in range(0, len(r_values), block):
        rb = r_values[start : start + block]
        coarse = grid_fn(cfg, rb, cos_row)
        idx = coarse.argmax(axis=1)  # first max wins: smallest angle on ties
        rows = np.arange(len(rb))
        best_v = coarse[rows, idx]
        best_t = thetas[idx]
        lo = thetas[np.maximum(idx - 1, 0)]
        hi = thetas[np.minimum(idx + 1, n_t - 1)]

        def f(th: np.ndarray) -> np.ndarray:
            return grid_fn(cfg, rb, _clamped_cos(th)[:, None])[:, 0]

        ref_t, ref_v = _golden_max_batch(
            f, lo, hi, policy.refine_tolerance, policy.refine_max_iter
        )
        better = ref_v > best_v
        values[start : start + block] = np.where(better, ref_v, best_v)
        theta_stars[start : start + block] = np.where(better, ref_t, best_t)
    return values, theta_stars


def _worst_over_angle(
    cfg: ArrayConfig, r: float, policy: AngleSearchPolicy, grid_fn
) -> MetricSample:
    values, thetas = _worst_over_angle_batch(cfg, np.array([r], dtype=float), policy, grid_fn)
    return MetricSample(range_m=r, value=float(values[0]), theta_star=float(thetas[0]))


def e_linf_worst(
    cfg: ArrayConfig, r: float, policy: AngleSearchPolicy | None = None
) -> MetricSample:
    """Worst-case single-element mismatch over the look angle at range r."""
    return _worst_over_angle(cfg, r, policy or AngleSearchPolicy(), _linf_grid)


def e_l2_worst(
    cfg: ArrayConfig, r: float, policy: AngleSearchPolicy | None = None
) -> MetricSample:
    """Worst-case normalized total mismatch over the look angle at range r."""
    return _worst_over_angle(cfg, r, policy or AngleSearchPolicy(), _l2_grid)


def e_linf_worst_batch(
    cfg: ArrayConfig, r_values, policy: AngleSearchPolicy | None = None
) -> tuple[np.ndarray, np.ndarray]:
    """Vector form of e_linf_worst: (values, theta_stars) for an array of ranges."""
    return _worst_over_angle_batch(cfg, r_values, policy or AngleSearchPolicy(), _linf_grid)


def e_l2_worst_batch(
    cfg: ArrayConfig, r_values, policy: AngleSearchPolicy | None = None
) -> tuple[np.ndarray, np.ndarray]:
    """Vector form of e_l2_worst: (values, theta_stars) for an array of ranges."""
    return _worst_over_angle_batch(cfg, r_values, policy or AngleSearchPolicy(), _l2_grid)
