"""Analytic DMT formulas and reference curves for small relay configurations.

These serve two roles: oracles for the numerical solver, and extra
columns in comparison output. Each formula is valid on a bounded range
of ``r``; queries outside it raise :class:`DomainError`.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass, field

import numpy as np

from .curves import PiecewiseLinearCurve, evaluate, pointwise_min, ptp_dmt
from .errors import DomainError, InvalidConfigError, UnsupportedCaseError

__all__ = [
    "ClosedFormTag",
    "ClosedFormId",
    "ddf_111",
    "ddf_n1n",
    "ddf_1k1",
    "ddf_2k2_upper",
    "ddf_2k2_pieces",
    "fd_df_n1n",
    "scf_1k1",
    "fundamental_1k1",
    "applicable_forms",
]

R_TOL = 1e-12


class ClosedFormTag(str, enum.Enum):
    DDF_111 = "DDF_111"
    DDF_N1N = "DDF_N1N"
    DDF_1K1 = "DDF_1K1"
    DDF_2K2_UPPER = "DDF_2K2_UPPER"
    FDDF_N1N = "FDDF_N1N"
    SCF_1K1 = "SCF_1K1"
    FUND_1K1 = "FUND_1K1"
    PTP = "PTP"


def _check_r(r: float, hi: float) -> float:
    r = float(r)
    if not (-R_TOL <= r <= hi + R_TOL):
        raise DomainError(f"r={r} outside [0, {hi}]")
    return min(max(r, 0.0), hi)


def _check_int(name: str, v, lo: int) -> int:
    if isinstance(v, bool) or int(v) != v or v < lo:
        raise InvalidConfigError(f"{name} must be an integer >= {lo}, got {v!r}")
    return int(v)


def ddf_111(r: float) -> float:
    """DDF diversity of the single-antenna relay channel."""
    r = _check_r(r, 1.0)
    if r <= 0.5:
        return 2.0 * (1.0 - r)
    return (1.0 - r) / r


def ddf_n1n(n: int, r: float) -> float:
    """DDF diversity with a single-antenna relay and ``n`` antennas at both ends."""
    n = _check_int("n", n, 1)
    r = _check_r(r, float(n))
    if n == 1:
        return (1.0 - r) / max(0.5, r)
    if r <= 1.0:
        return (n - 1) ** 2 + (3 * n - 1) * (1.0 - r)
    return evaluate(ptp_dmt(n, n), r)


def ddf_1k1(k: int, r: float) -> float:
    """DDF diversity with single-antenna terminals and a ``k``-antenna relay."""
    k = _check_int("k", k, 1)
    r = _check_r(r, 1.0)
    if r <= 1.0 / (k + 1):
        return (k + 1) * (1.0 - r)
    if r <= 0.5:
        return 1.0 + k * (1.0 - 2.0 * r) / (1.0 - r)
    return (1.0 - r) / r


def ddf_2k2_pieces(k: int, r: float) -> list[float]:
    """Values of every upper-bound piece whose interval contains ``r``.

    The pieces are only defined on their own sub-interval and are not
    extrapolated beyond it.
    """
    k = _check_int("k", k, 2)
    r = _check_r(r, 2.0)
    vals = [evaluate(ptp_dmt(2, 2), r) + evaluate(ptp_dmt(2, k), r)]
    if r <= 2.0 / 3.0 + R_TOL:
        vals.append(k + 3 + (k + 1) * (2.0 - 3.0 * r) / (2.0 - r))
    if 2.0 / 3.0 - R_TOL <= r <= 1.0 + R_TOL:
        vals.append(k + 6.0 * (1.0 - r) / r)
        vals.append(4.0 + 4.0 * (k - 1) * (1.0 - r) / (2.0 - r))
    if 1.0 - R_TOL <= r <= 4.0 / 3.0 + R_TOL:
        vals.append(1.0 + (k - 1) * (4.0 - 3.0 * r) / (2.0 - r))
        vals.append(4.0 * (3.0 - 2.0 * r) / r)
    if r >= 4.0 / 3.0 - R_TOL:
        vals.append(2.0 * (2.0 - r) / r)
    return vals


def ddf_2k2_upper(k: int, r: float) -> float:
    """Upper bound on the DDF diversity of the ``(2, k, 2)`` channel, ``k >= 2``."""
    return min(ddf_2k2_pieces(k, r))


def fd_df_n1n(n: int, r: float) -> float:
    """Full-duplex decode-and-forward diversity on ``(n, 1, n)``."""
    n = _check_int("n", n, 1)
    r = _check_r(r, float(n))
    dnn = evaluate(ptp_dmt(n, n), r)
    if r <= 1.0:
        return min(evaluate(ptp_dmt(n + 1, n), r), dnn + evaluate(ptp_dmt(n, 1), r))
    return dnn


def _scf_curve(k: int) -> PiecewiseLinearCurve:
    return PiecewiseLinearCurve(((0.0, 1.0 + k), (0.5, 1.0), (1.0, 0.0)), tag=f"SCF_1K1(k={k})")


def scf_1k1(k: int, r: float) -> float:
    """Static compress-and-forward diversity on ``(1, k, 1)``; defined for ``k >= 2``."""
    if isinstance(k, bool) or int(k) != k or k < 1:
        raise InvalidConfigError(f"k must be a positive integer, got {k!r}")
    if k < 2:
        raise UnsupportedCaseError("compress-and-forward reference curve is only available for k >= 2")
    return evaluate(_scf_curve(int(k)), _check_r(r, 1.0))


def fundamental_1k1(k: int, r: float) -> float:
    """Optimal half-duplex diversity of the ``(1, k, 1)`` channel."""
    k = _check_int("k", k, 1)
    r = _check_r(r, 1.0)
    if r <= 0.5:
        return ddf_1k1(k, r)
    return 2.0 * (1.0 - r)


@dataclass(frozen=True)
class ClosedFormId:
    """A closed-form curve together with its antenna parameters.

    ``params`` holds the integers the formula needs: ``n`` for the
    ``(n, 1, n)`` forms, ``k`` for ``(1, k, 1)`` and ``(2, k, 2)``, and
    ``(m, n)`` for the point-to-point curve.
    """

    tag: ClosedFormTag
    params: tuple[int, ...] = field(default=())

    def __post_init__(self):
        tag = ClosedFormTag(self.tag)
        object.__setattr__(self, "tag", tag)
        params = tuple(int(p) for p in self.params)
        object.__setattr__(self, "params", params)
        need = {ClosedFormTag.DDF_111: 0, ClosedFormTag.PTP: 2}.get(tag, 1)
        if len(params) != need:
            raise InvalidConfigError(f"{tag.value} takes {need} parameter(s), got {params}")
        if tag is ClosedFormTag.PTP:
            ptp_dmt(*params)
        elif tag is ClosedFormTag.DDF_2K2_UPPER:
            _check_int("k", params[0], 2)
        elif tag is ClosedFormTag.SCF_1K1:
            _check_int("k", params[0], 1)
            if params[0] < 2:
                raise UnsupportedCaseError("compress-and-forward reference curve needs k >= 2")
        elif need == 1:
            _check_int("parameter", params[0], 1)

    @property
    def r_max(self) -> float:
        if self.tag in (ClosedFormTag.DDF_N1N, ClosedFormTag.FDDF_N1N):
            return float(self.params[0])
        if self.tag is ClosedFormTag.DDF_2K2_UPPER:
            return 2.0
        if self.tag is ClosedFormTag.PTP:
            return float(min(self.params))
        return 1.0

    @property
    def label(self) -> str:
        return self.tag.value + ("(" + ",".join(map(str, self.params)) + ")" if self.params else "")

    def __call__(self, r: float) -> float:
        fn = {
            ClosedFormTag.DDF_111: ddf_111,
            ClosedFormTag.DDF_N1N: ddf_n1n,
            ClosedFormTag.DDF_1K1: ddf_1k1,
            ClosedFormTag.DDF_2K2_UPPER: ddf_2k2_upper,
            ClosedFormTag.FDDF_N1N: fd_df_n1n,
            ClosedFormTag.SCF_1K1: scf_1k1,
            ClosedFormTag.FUND_1K1: fundamental_1k1,
        }
        if self.tag is ClosedFormTag.PTP:
            return evaluate(ptp_dmt(*self.params), _check_r(r, self.r_max))
        return fn[self.tag](*self.params, r)

    def curve(self, r_step: float = 0.01) -> PiecewiseLinearCurve:
        """The curve as breakpoints.

        Piecewise-linear forms are returned exactly; forms with rational
        pieces are sampled on a grid of spacing ``r_step``.
        """
        if self.tag is ClosedFormTag.PTP:
            c = ptp_dmt(*self.params)
        elif self.tag is ClosedFormTag.SCF_1K1:
            c = _scf_curve(self.params[0])
        elif self.tag is ClosedFormTag.FDDF_N1N:
            n = self.params[0]
            lower = pointwise_min(ptp_dmt(n + 1, n), _sum_curves(ptp_dmt(n, n), ptp_dmt(n, 1)))
            tail = [bp for bp in ptp_dmt(n, n).breakpoints if bp[0] > 1.0]
            c = PiecewiseLinearCurve(lower.breakpoints + tuple(tail))
        else:
            r = _grid(self.r_max, r_step)
            return PiecewiseLinearCurve(
                tuple((x, self(x)) for x in r), exact=False, tag=self.label
            )
        return PiecewiseLinearCurve(c.breakpoints, exact=True, tag=self.label)


def _sum_curves(a: PiecewiseLinearCurve, b: PiecewiseLinearCurve) -> PiecewiseLinearCurve:
    # sum over the common domain; knots of both inputs stay knots of the sum
    lo, hi = max(a.domain[0], b.domain[0]), min(a.domain[1], b.domain[1])
    xs = sorted({x for x in list(a.r) + list(b.r) if lo <= x <= hi} | {lo, hi})
    return PiecewiseLinearCurve(tuple((x, evaluate(a, x) + evaluate(b, x)) for x in xs))


def _grid(hi: float, step: float) -> np.ndarray:
    if not step > 0:
        raise DomainError(f"r_step must be positive, got {step}")
    count = int(round(hi / step))
    r = np.round(np.arange(count + 1) * step, 12)
    r = r[r < hi - R_TOL]
    return np.append(r, hi)


def applicable_forms(m: int, k: int, n: int) -> dict[str, ClosedFormId]:
    """Closed forms stated for the configuration, keyed by comparison column name.

    Always includes ``ptp``; the remaining keys are ``ddf_closed``,
    ``ddf_upper``, ``scf``, ``fddf`` and ``fundamental`` where they apply.
    """
    out: dict[str, ClosedFormId] = {}
    if (m, k, n) == (1, 1, 1):
        out["ddf_closed"] = ClosedFormId(ClosedFormTag.DDF_111)
    elif k == 1 and m == n:
        out["ddf_closed"] = ClosedFormId(ClosedFormTag.DDF_N1N, (n,))
    elif m == 1 and n == 1:
        out["ddf_closed"] = ClosedFormId(ClosedFormTag.DDF_1K1, (k,))
    elif m == 2 and n == 2 and k >= 2:
        out["ddf_upper"] = ClosedFormId(ClosedFormTag.DDF_2K2_UPPER, (k,))
    if m == 1 and n == 1 and k >= 2:
        out["scf"] = ClosedFormId(ClosedFormTag.SCF_1K1, (k,))
    if m == 1 and n == 1:
        out["fundamental"] = ClosedFormId(ClosedFormTag.FUND_1K1, (k,))
    if k == 1 and m == n:
        out["fddf"] = ClosedFormId(ClosedFormTag.FDDF_N1N, (n,))
    out["ptp"] = ClosedFormId(ClosedFormTag.PTP, (m, n))
    return out
