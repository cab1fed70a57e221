"""Numerical DMT of the dynamic decode-and-forward protocol.

The relay-assisted exponent ``d_hat(r)`` is a two-variable minimization
over the relay decision deficit ``y`` and the relay-destination deficit
``b``. For fixed ``y`` the objective is piecewise linear in ``b``, so the
inner minimum is found exactly by enumerating breakpoints. The outer
minimum over ``y`` uses a dense grid per region followed by golden-section
refinement.
"""

from __future__ import annotations

import enum
import math
import os
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass

import numpy as np

from .curves import PiecewiseLinearCurve, evaluate, ptp_dmt
from .errors import DomainError, SolverError
from .exponents import AntennaConfig, objective_G_batch, varphi

__all__ = [
    "RegionId",
    "OptimumRecord",
    "SolverSettings",
    "regions",
    "region_of",
    "b_range",
    "b_candidates",
    "min_over_b",
    "d_hat",
    "ddf_dmt",
    "ddf_curve",
]

ENDPOINT_TOL = 1e-9
GOLDEN = (math.sqrt(5.0) - 1.0) / 2.0


class RegionId(enum.IntEnum):
    R1 = 1  # a + b <= n binds:        b <= y(n - r)/r
    R2 = 2  # relay antennas bind:     b <= q
    R3 = 3  # a >= 0 binds:            b <= r y/(y - r)


@dataclass(frozen=True)
class SolverSettings:
    """Outer-search controls for :func:`d_hat`."""

    y_grid: int = 2000
    refine_tol: float = 1e-6
    b_mode: str = "breakpoints"

    def __post_init__(self):
        if self.y_grid < 16:
            raise DomainError("y_grid must be at least 16")
        if not self.refine_tol > 0:
            raise DomainError("refine_tol must be positive")
        if self.b_mode != "breakpoints":
            raise DomainError(f"unknown b_mode {self.b_mode!r}")


DEFAULT_SETTINGS = SolverSettings()


@dataclass(frozen=True)
class OptimumRecord:
    """Minimizer of the relay-assisted exponent at one multiplexing gain."""

    value: float
    arg_b: float
    arg_y: float
    region: RegionId
    r: float
    q_clamp_binds: bool = False


def _bounds(cfg: AntennaConfig, r: float) -> tuple[float, float]:
    q, n = cfg.q, cfg.n
    r12 = q * r / (n - r) if n > r else math.inf
    r23 = q * r / (q - r) if q > r else math.inf
    return r12, r23


def regions(cfg: AntennaConfig, r: float) -> dict[RegionId, tuple[float, float]]:
    """Nonempty regions of ``y`` as half-open intervals ``(lo, hi]`` within ``(r, t]``."""
    t = float(cfg.t)
    r12, r23 = _bounds(cfg, r)
    raw = {
        RegionId.R1: (r, r12),
        RegionId.R2: (r12, r23),
        RegionId.R3: (r23, t),
    }
    out = {}
    for rid, (lo, hi) in raw.items():
        lo, hi = max(lo, r), min(hi, t)
        if hi > lo:
            out[rid] = (lo, hi)
    return out


def region_of(cfg: AntennaConfig, r: float, y: float) -> RegionId:
    """Region whose half-open interval contains ``y``."""
    if not (r < y <= cfg.t + ENDPOINT_TOL):
        raise DomainError(f"y={y} outside ({r}, {cfg.t}]")
    r12, r23 = _bounds(cfg, r)
    if y <= r12:
        return RegionId.R1
    if y <= r23:
        return RegionId.R2
    return RegionId.R3


def _b_max(cfg: AntennaConfig, r: float, y: float, region: RegionId | None = None) -> tuple[float, bool]:
    # valid on the closure y >= r; at y == r the a >= 0 bound is vacuous
    rid_bound = {
        RegionId.R1: y * (cfg.n - r) / r,
        RegionId.R2: float(cfg.q),
        RegionId.R3: r * y / (y - r) if y > r else math.inf,
    }
    if region is not None:
        bmax = rid_bound[RegionId(region)]
    elif y > r:
        rid = region_of(cfg, r, min(y, float(cfg.t)))
        bmax = rid_bound[rid]
    else:
        bmax = min(rid_bound.values())
    clamped = bmax > cfg.q
    return min(bmax, float(cfg.q)), clamped


def b_range(cfg: AntennaConfig, r: float, y: float) -> tuple[float, float]:
    """Feasible interval ``[0, b_max]`` of ``b`` for the region containing ``y``.

    ``b_max`` is additionally capped at ``q``.
    """
    if not r > 0:
        raise DomainError(f"b_range needs r > 0, got {r}")
    region_of(cfg, r, y)
    return 0.0, _b_max(cfg, r, y)[0]


def b_candidates(cfg: AntennaConfig, r: float, y: float, b_max: float) -> np.ndarray:
    """Breakpoints of ``b -> G(r, b, y)`` in ``[0, b_max]`` plus both endpoints.

    The map is linear between: integer ``b`` (kinks of the beta clamp),
    ``b`` with integer ``a(b)`` (kinks of the alpha clamp), and ``b`` with
    ``alpha_i + beta_j = 1`` for a cross term in the linear regime.
    """
    c = 1.0 - r / y
    cand = [0.0, b_max]
    cand.extend(float(j) for j in range(1, cfg.q + 1))
    if c > 0:
        cand.extend((r - i) / c for i in range(0, cfg.p + 1))
    # alpha_i + beta_j = 1 with alpha_i = i - a(b), beta_j = j - b
    for j in range(1, cfg.q + 1):
        for i in range(1, max(0, min(cfg.n - j, cfg.m)) + 1):
            cand.append((i + j - 1 - r) * y / r)
    arr = np.asarray(cand)
    arr = arr[(arr >= 0.0) & (arr <= b_max)]
    return np.unique(arr)


def _inner(cfg: AntennaConfig, r: float, y: float, region: RegionId | None = None) -> tuple[float, float]:
    bmax, _ = _b_max(cfg, r, y, region)
    cand = b_candidates(cfg, r, y, bmax)
    vals = objective_G_batch(cfg, r, cand, y)
    i = int(np.argmin(vals))  # first occurrence -> smallest b among ties
    return float(cand[i]), float(vals[i])


def min_over_b(
    cfg: AntennaConfig, r: float, y: float, region: RegionId | None = None
) -> tuple[float, float]:
    """Exact minimum over ``b`` of the boundary objective at fixed ``y``.

    Returns ``(b_star, value)``; ties go to the smallest ``b``. Passing
    ``region`` applies that region's ``b`` bound instead of the one for
    the region containing ``y``, which is how one-sided limits at region
    boundaries are evaluated.
    """
    if not r > 0:
        raise DomainError(f"min_over_b needs r > 0, got {r}")
    region_of(cfg, r, y)
    return _inner(cfg, r, y, region)


def _inner_grid(cfg: AntennaConfig, r: float, ys: np.ndarray) -> np.ndarray:
    """Vectorized inner minimum over a grid of ``y`` values (closure y >= r allowed)."""
    vals = np.empty_like(ys)
    # candidates depend on y; stack them with padding to stay vectorized
    cols = []
    q_cap = float(cfg.q)
    r12, r23 = _bounds(cfg, r)
    with np.errstate(divide="ignore", invalid="ignore"):
        b1 = ys * (cfg.n - r) / r
        b3 = np.where(ys > r, r * ys / (ys - r), np.inf)
    bmax = np.where(ys <= r12, b1, np.where(ys <= r23, q_cap, b3))
    bmax = np.where(ys <= r, np.minimum(np.minimum(b1, q_cap), b3), bmax)
    bmax = np.minimum(bmax, q_cap)
    c = 1.0 - r / ys
    cols.append(np.zeros_like(ys))
    cols.append(bmax)
    for j in range(1, cfg.q + 1):
        cols.append(np.full_like(ys, float(j)))
    with np.errstate(divide="ignore", invalid="ignore"):
        for i in range(0, cfg.p + 1):
            cols.append(np.where(c > 0, (r - i) / c, -1.0))
    for j in range(1, cfg.q + 1):
        for i in range(1, max(0, min(cfg.n - j, cfg.m)) + 1):
            cols.append((i + j - 1 - r) * ys / r)
    B = np.stack(cols, axis=-1)
    ok = (B >= 0.0) & (B <= bmax[:, None])
    Y = np.broadcast_to(ys[:, None], B.shape)
    G = objective_G_batch(cfg, r, np.where(ok, B, 0.0), Y)
    G = np.where(ok, G, np.inf)
    vals[:] = G.min(axis=1)
    return vals


def _golden(fun, lo: float, hi: float, tol: float) -> tuple[float, float]:
    x1 = hi - GOLDEN * (hi - lo)
    x2 = lo + GOLDEN * (hi - lo)
    f1, f2 = fun(x1), fun(x2)
    while hi - lo > tol:
        if f1 <= f2:
            hi, x2, f2 = x2, x1, f1
            x1 = hi - GOLDEN * (hi - lo)
            f1 = fun(x1)
        else:
            lo, x1, f1 = x1, x2, f2
            x2 = lo + GOLDEN * (hi - lo)
            f2 = fun(x2)
    return (x1, f1) if f1 <= f2 else (x2, f2)


def _tie_tol(v: float) -> float:
    return 1e-12 * max(1.0, abs(v))


def _first_attained_argmin(vals: np.ndarray) -> int:
    # index 0 is the excluded lower end; skip it when an interior point ties
    best = float(vals.min())
    idx = np.flatnonzero(vals <= best + _tie_tol(best))
    return int(idx[1]) if idx[0] == 0 and len(idx) > 1 else int(idx[0])


def d_hat(cfg: AntennaConfig, r: float, settings: SolverSettings = DEFAULT_SETTINGS) -> OptimumRecord:
    """Relay-assisted outage exponent at ``0 < r < min(p, t)``.

    The search runs over the closure of each region; the objective is
    continuous in ``y``, so the infimum over the half-open interval equals
    the minimum over its closure.
    """
    if not (0 < r < cfg.p):
        raise DomainError(f"d_hat needs 0 < r < min(m, n) = {cfg.p}, got {r}")
    regs = regions(cfg, r)
    if not regs:
        raise SolverError(f"no feasible y for r={r} on {cfg} (needs r < t={cfg.t})")

    found = []
    for rid, (lo, hi) in regs.items():
        ys = np.linspace(lo, hi, settings.y_grid)
        vals = _inner_grid(cfg, r, ys)
        i = _first_attained_argmin(vals)
        y_best, v_best = float(ys[i]), float(vals[i])
        a_lo, a_hi = ys[max(i - 1, 0)], ys[min(i + 1, len(ys) - 1)]
        if a_hi > a_lo:
            y_ref, v_ref = _golden(lambda y: _inner(cfg, r, y)[1], float(a_lo), float(a_hi),
                                   settings.refine_tol)
            if v_ref < v_best - _tie_tol(v_best):
                y_best, v_best = y_ref, v_ref
        # the lower end of each region is excluded, so a minimum there is only a limit
        found.append((v_best, y_best > lo, rid, y_best))

    v_min = min(f[0] for f in found)
    ties = [f for f in found if f[0] <= v_min + _tie_tol(v_min)]
    # prefer values attained inside a region, then the smaller region index
    value, _, rid, y_star = min(ties, key=lambda f: (not f[1], f[2]))
    if y_star > r:
        rid = region_of(cfg, r, y_star)
    b_star, value = _inner(cfg, r, y_star)
    _, clamped = _b_max(cfg, r, y_star)
    return OptimumRecord(value=value, arg_b=b_star, arg_y=y_star, region=rid, r=r,
                         q_clamp_binds=clamped)


def ddf_dmt(cfg: AntennaConfig, r: float, settings: SolverSettings = DEFAULT_SETTINGS) -> float:
    """Diversity order of the DDF protocol at multiplexing gain ``r``.

    ``min(d_hat(r) + varphi(r, t), d_{m,n}(r) + d_{k,m}(r))`` on
    ``0 <= r <= min(m, n)``.
    """
    p, t = cfg.p, cfg.t
    if r < -ENDPOINT_TOL or r > p + ENDPOINT_TOL:
        raise DomainError(f"r={r} outside [0, {p}]")
    if r <= 0:
        return float(cfg.m * cfg.n + cfg.k * cfg.m)
    if r >= p - ENDPOINT_TOL:
        return 0.0
    no_relay = evaluate(ptp_dmt(cfg.m, cfg.n), r) + evaluate(ptp_dmt(cfg.k, cfg.m), min(r, t))
    if r >= t:
        return float(no_relay)
    relay = d_hat(cfg, r, settings).value + varphi(r, t)
    return float(min(relay, no_relay))


def _r_grid(p: int, r_step: float) -> np.ndarray:
    steps = int(math.floor(p / r_step + 1e-9))
    rs = [round(i * r_step, 12) for i in range(steps + 1)]
    if p - rs[-1] > 1e-9:
        rs.append(float(p))
    return np.asarray(rs, dtype=float)


def _worker_count(workers: int | None) -> int:
    cap = os.environ.get("DMTLAB_THREADS")
    n = workers if workers is not None else 1
    if cap:
        n = min(n, max(1, int(cap)))
    return max(1, n)


def _ddf_point(args):
    cfg, r, settings = args
    return ddf_dmt(cfg, r, settings)


def ddf_curve(cfg: AntennaConfig, r_step: float, settings: SolverSettings = DEFAULT_SETTINGS,
              workers: int | None = None) -> PiecewiseLinearCurve:
    """Sample :func:`ddf_dmt` on ``0, r_step, ..., min(m, n)``.

    Results are merged in r-order, so the output does not depend on
    ``workers``.
    """
    if not r_step > 0:
        raise DomainError(f"r_step must be positive, got {r_step}")
    # steps above 0.1 are accepted only when they land exactly on min(m, n)
    if r_step > 0.1 and abs(cfg.p / r_step - round(cfg.p / r_step)) > 1e-9:
        raise DomainError(f"r_step={r_step} must be <= 0.1 or divide min(m, n)={cfg.p}")
    rs = _r_grid(cfg.p, r_step)
    jobs = [(cfg, float(r), settings) for r in rs]
    n = _worker_count(workers)
    if n > 1:
        with ProcessPoolExecutor(max_workers=n) as pool:
            ds = list(pool.map(_ddf_point, jobs))
    else:
        ds = [_ddf_point(j) for j in jobs]
    return PiecewiseLinearCurve(tuple(zip(rs.tolist(), ds)), exact=False, tag=f"DDF{cfg}")
