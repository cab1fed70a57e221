"""Piecewise-linear DMT curves and the point-to-point MIMO baseline.

A curve is an ordered list of ``(r, d)`` breakpoints with linear
interpolation in between. Curves built from analytic breakpoints are
flagged ``exact``; curves sampled from a numerical solver are not.
"""

from __future__ import annotations

import csv
import io
import json
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Iterable, Sequence

import numpy as np

from .errors import DomainError, InvalidConfigError

__all__ = [
    "PiecewiseLinearCurve",
    "ptp_dmt",
    "evaluate",
    "pointwise_min",
    "from_samples",
]

# slack for domain checks and for monotonicity of sampled curves
DOMAIN_TOL = 1e-12
MONOTONE_TOL = 1e-9


@dataclass(frozen=True)
class PiecewiseLinearCurve:
    """Immutable piecewise-linear curve ``d(r)``.

    Parameters
    ----------
    breakpoints : sequence of (r, d) pairs
        r strictly increasing, both coordinates nonnegative.
    exact : bool
        True when the breakpoints are analytic, False for sampled curves.
    tag : str, optional
        Free-form identifier carried into the JSON form.
    dmt : bool
        When True (default) the curve must be nonincreasing in r.
    """

    breakpoints: tuple[tuple[float, float], ...]
    exact: bool = True
    tag: str | None = None
    dmt: bool = field(default=True, compare=False)

    def __post_init__(self):
        pts = tuple((float(r), float(d)) for r, d in self.breakpoints)
        if len(pts) < 1:
            raise DomainError("a curve needs at least one breakpoint")
        for r, d in pts:
            if not (np.isfinite(r) and np.isfinite(d)):
                raise DomainError(f"non-finite breakpoint ({r}, {d})")
            if r < -DOMAIN_TOL or d < -DOMAIN_TOL:
                raise DomainError(f"negative breakpoint ({r}, {d})")
        for (r0, d0), (r1, d1) in zip(pts, pts[1:]):
            if not r1 > r0:
                raise DomainError("breakpoint r-coordinates must be strictly increasing")
            if self.dmt and d1 > d0 + MONOTONE_TOL:
                raise DomainError(f"DMT curve increases between r={r0} and r={r1}")
        object.__setattr__(self, "breakpoints", pts)

    @property
    def r(self) -> np.ndarray:
        return np.array([p[0] for p in self.breakpoints])

    @property
    def d(self) -> np.ndarray:
        return np.array([p[1] for p in self.breakpoints])

    @property
    def domain(self) -> tuple[float, float]:
        return self.breakpoints[0][0], self.breakpoints[-1][0]

    def __call__(self, r):
        return evaluate(self, r)

    def eval(self, r):
        return evaluate(self, r)

    # -- serialization -------------------------------------------------

    def to_json_dict(self) -> dict:
        out = {"breakpoints": [[r, d] for r, d in self.breakpoints], "exact": self.exact}
        if self.tag is not None:
            out["tag"] = self.tag
        return out

    def to_json(self, **kwargs) -> str:
        return json.dumps(self.to_json_dict(), **kwargs)

    @classmethod
    def from_json(cls, text: str | dict) -> "PiecewiseLinearCurve":
        obj = json.loads(text) if isinstance(text, str) else text
        return cls(
            tuple((r, d) for r, d in obj["breakpoints"]),
            exact=bool(obj.get("exact", False)),
            tag=obj.get("tag"),
        )

    def to_csv(self) -> str:
        buf = io.StringIO()
        writer = csv.writer(buf, lineterminator="\n")
        writer.writerow(["r", "d"])
        for r, d in self.breakpoints:
            writer.writerow([repr(r), repr(d)])
        return buf.getvalue()

    @classmethod
    def from_csv(cls, text: str, exact: bool = False) -> "PiecewiseLinearCurve":
        rows = [ln for ln in text.splitlines() if ln and not ln.startswith("#")]
        reader = csv.DictReader(rows)
        return cls(tuple((float(row["r"]), float(row["d"])) for row in reader), exact=exact)


def ptp_dmt(m: int, n: int) -> PiecewiseLinearCurve:
    """Optimal DMT of an ``m``-transmit, ``n``-receive Rayleigh MIMO link.

    The curve joins the points ``(r, (m - r)(n - r))`` for integer
    ``r = 0, ..., min(m, n)``.
    """
    if int(m) != m or int(n) != n or m < 1 or n < 1:
        raise InvalidConfigError(f"antenna counts must be positive integers, got ({m}, {n})")
    m, n = int(m), int(n)
    return PiecewiseLinearCurve(
        tuple((float(r), float((m - r) * (n - r))) for r in range(min(m, n) + 1)),
        exact=True,
        tag=f"PTP({m},{n})",
    )


def evaluate(curve: PiecewiseLinearCurve, r):
    """Linear interpolation of ``curve`` at ``r`` (scalar or array)."""
    lo, hi = curve.domain
    arr = np.asarray(r, dtype=float)
    if np.any(arr < lo - DOMAIN_TOL) or np.any(arr > hi + DOMAIN_TOL) or np.any(np.isnan(arr)):
        raise DomainError(f"r={r} outside curve domain [{lo}, {hi}]")
    if len(curve.breakpoints) == 1:
        out = np.full_like(arr, curve.breakpoints[0][1])
    else:
        out = np.interp(np.clip(arr, lo, hi), curve.r, curve.d)
    return float(out) if out.ndim == 0 else out


def _to_num(x: float, exact: bool):
    return Fraction(x) if exact else x


def _drop_collinear(pts: list, exact: bool) -> list:
    if len(pts) <= 2:
        return pts
    kept = [pts[0]]
    for mid, nxt in zip(pts[1:-1], pts[2:]):
        prev = kept[-1]
        cross = (mid[1] - prev[1]) * (nxt[0] - prev[0]) - (nxt[1] - prev[1]) * (mid[0] - prev[0])
        if exact and cross == 0:
            continue
        if not exact and abs(cross) <= DOMAIN_TOL:
            continue
        kept.append(mid)
    kept.append(pts[-1])
    return kept


def pointwise_min(a: PiecewiseLinearCurve, b: PiecewiseLinearCurve) -> PiecewiseLinearCurve:
    """Exact pointwise minimum of two curves on their common domain.

    Crossings between breakpoints become new breakpoints. When both inputs
    are exact, crossing abscissae are computed in rational arithmetic.
    """
    lo = max(a.domain[0], b.domain[0])
    hi = min(a.domain[1], b.domain[1])
    if lo > hi + DOMAIN_TOL:
        raise DomainError("curves have disjoint domains")
    exact = a.exact and b.exact

    def knots_of(c):
        return [r for r in c.r if lo <= r <= hi]

    xs = sorted(set([lo, hi] + knots_of(a) + knots_of(b)))

    def val(c, x):
        if exact:
            # exact interpolation on the stored breakpoints
            rs, ds = c.r, c.d
            i = int(np.searchsorted(rs, float(x), side="right")) - 1
            i = min(max(i, 0), len(rs) - 2) if len(rs) > 1 else 0
            if len(rs) == 1:
                return Fraction(ds[0])
            r0, r1 = Fraction(rs[i]), Fraction(rs[i + 1])
            d0, d1 = Fraction(ds[i]), Fraction(ds[i + 1])
            return d0 + (d1 - d0) * (x - r0) / (r1 - r0)
        return evaluate(c, x)

    xs = [_to_num(x, exact) for x in xs]
    pts = []
    for i, x in enumerate(xs):
        da, db = val(a, x), val(b, x)
        if i > 0:
            x0 = xs[i - 1]
            ga0, gb0 = val(a, x0), val(b, x0)
            g0, g1 = ga0 - gb0, da - db
            tol = 0 if exact else DOMAIN_TOL
            if (g0 > tol and g1 < -tol) or (g0 < -tol and g1 > tol):
                xc = x0 + (x - x0) * g0 / (g0 - g1)
                pts.append((xc, min(val(a, xc), val(b, xc))))
        pts.append((x, min(da, db)))

    pts = _drop_collinear(pts, exact)
    return PiecewiseLinearCurve(
        tuple((float(x), float(d)) for x, d in pts),
        exact=exact,
        dmt=a.dmt and b.dmt,
    )


def from_samples(r: Iterable[float], d: Sequence[float], tag: str | None = None) -> PiecewiseLinearCurve:
    """Wrap sampled values as a non-exact curve."""
    return PiecewiseLinearCurve(tuple(zip(r, d)), exact=False, tag=tag)
