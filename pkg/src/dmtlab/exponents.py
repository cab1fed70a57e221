"""SNR-exponent building blocks of the DDF outage analysis.

Eigenvalues of the three Wishart matrices are written as ``rho**(-x)``
and all quantities here act on those exponents:

* ``alpha`` -- exponents of the source-destination Gram ``H_SD H_SD^H``
  (length ``p = min(m, n)``)
* ``beta`` -- exponents of the relay-destination Gram after whitening by
  the source-destination link (length ``q = min(k, n)``)
* ``gamma`` -- exponents of the source-relay Gram (length ``t = min(k, m)``)

Vectors are indexed from the largest eigenvalue, so exponents are
nondecreasing.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .errors import DimensionError, DomainError, InfeasibleError, InvalidConfigError

__all__ = [
    "INF",
    "AntennaConfig",
    "ExponentPoint",
    "varphi",
    "phi_vector",
    "exponent_E",
    "in_support_A",
    "objective_F",
    "objective_G",
    "objective_G_batch",
    "reduced_a",
    "compute_f",
]

INF = math.inf
"""Saturating value returned by :func:`varphi`; absorbs under ``+`` and loses every ``min``."""

# slack tolerated on the constraint line a = r - b(1 - r/y)
A_SLACK = 1e-9
DEFICIT_TOL = 1e-12


@dataclass(frozen=True)
class AntennaConfig:
    """Antenna counts ``(m, k, n)`` at source, relay and destination."""

    m: int
    k: int
    n: int

    def __post_init__(self):
        for name in ("m", "k", "n"):
            v = getattr(self, name)
            if isinstance(v, bool) or int(v) != v or v < 1:
                raise InvalidConfigError(f"{name} must be a positive integer, got {v!r}")
            object.__setattr__(self, name, int(v))

    @property
    def p(self) -> int:
        return min(self.m, self.n)

    @property
    def q(self) -> int:
        return min(self.k, self.n)

    @property
    def t(self) -> int:
        return min(self.k, self.m)

    @classmethod
    def parse(cls, text: str) -> "AntennaConfig":
        """Parse ``"m,k,n"``."""
        try:
            parts = [int(s) for s in text.split(",")]
        except ValueError as exc:
            raise InvalidConfigError(f"cannot parse antennas {text!r}") from exc
        if len(parts) != 3:
            raise InvalidConfigError(f"expected m,k,n, got {text!r}")
        return cls(*parts)

    def __str__(self):
        return f"({self.m},{self.k},{self.n})"


@dataclass(frozen=True)
class ExponentPoint:
    """A triple of exponent vectors ``(alpha, beta, gamma)``."""

    alpha: tuple[float, ...]
    beta: tuple[float, ...]
    gamma: tuple[float, ...]

    def __post_init__(self):
        for name in ("alpha", "beta", "gamma"):
            object.__setattr__(self, name, tuple(float(x) for x in getattr(self, name)))

    def check(self, cfg: AntennaConfig) -> None:
        """Raise unless lengths match ``cfg`` and each vector is ordered in [0, 1]."""
        _check_lengths(cfg, self.alpha, self.beta, self.gamma)
        for name, vec in (("alpha", self.alpha), ("beta", self.beta), ("gamma", self.gamma)):
            if any(x < -DEFICIT_TOL or x > 1 + DEFICIT_TOL for x in vec):
                raise DomainError(f"{name} components must lie in [0, 1]")
            if any(b < a - DEFICIT_TOL for a, b in zip(vec, vec[1:])):
                raise DomainError(f"{name} must be nondecreasing")

    @classmethod
    def from_deficits(cls, cfg: AntennaConfig, a: float, b: float, y: float) -> "ExponentPoint":
        """Optimal exponents for given sum deficits (the ``phi`` maps)."""
        return cls(phi_vector(a, cfg.p), phi_vector(b, cfg.q), phi_vector(y, cfg.t))


def _pos(x: float) -> float:
    return x if x > 0.0 else 0.0


def varphi(x: float, y: float) -> float:
    """0 when ``x < y``, otherwise :data:`INF`."""
    return 0.0 if x < y else INF


def phi_vector(s: float, length: int) -> tuple[float, ...]:
    """Exponent vector of ``length`` entries with total deficit ``s``.

    Entry ``i`` (1-based) is ``(1 - (s - i + 1)^+)^+``, which packs the
    deficit into the leading (largest-eigenvalue) entries first.
    """
    if length < 0:
        raise DimensionError("length must be nonnegative")
    if s < -DEFICIT_TOL or s > length + DEFICIT_TOL:
        raise InfeasibleError(f"deficit {s} outside [0, {length}]")
    s = min(max(s, 0.0), float(length))
    return tuple(_pos(1.0 - _pos(s - i + 1)) for i in range(1, length + 1))


def _check_lengths(cfg: AntennaConfig, alpha, beta, gamma=None):
    if len(alpha) != cfg.p:
        raise DimensionError(f"alpha has length {len(alpha)}, expected p={cfg.p}")
    if len(beta) != cfg.q:
        raise DimensionError(f"beta has length {len(beta)}, expected q={cfg.q}")
    if gamma is not None and len(gamma) != cfg.t:
        raise DimensionError(f"gamma has length {len(gamma)}, expected t={cfg.t}")


def _cross_count(cfg: AntennaConfig, j: int) -> int:
    # (n - j) ^ m; floored at 0 although j <= q <= n keeps it nonnegative
    return max(0, min(cfg.n - j, cfg.m))


def exponent_E(cfg: AntennaConfig, alpha: Sequence[float], beta: Sequence[float]) -> float:
    """Negative SNR exponent of the joint (alpha, beta) density.

    Uses the dimension map relay-antennas -> ``k``, destination -> ``n``,
    source -> ``m``.
    """
    _check_lengths(cfg, alpha, beta)
    m, k, n = cfg.m, cfg.k, cfg.n
    terms = []
    for i, a in enumerate(alpha, start=1):
        terms.append((m + n - 2 * i + 1) * a)
        terms.append(-k * _pos(1.0 - a))
    for j, b in enumerate(beta, start=1):
        terms.append((k + n - 2 * j + 1) * b)
    for j, b in enumerate(beta, start=1):
        for i in range(1, _cross_count(cfg, j) + 1):
            terms.append(_pos(1.0 - alpha[i - 1] - b))
    return math.fsum(terms)


def in_support_A(alpha: Sequence[float], beta: Sequence[float], n: int, tol: float = 0.0) -> bool:
    """Membership in the support of the asymptotic (alpha, beta) density.

    Requires both vectors nonnegative and nondecreasing, and
    ``alpha_i + beta_j >= 1`` whenever ``i + j >= n + 1``.
    """
    for vec in (alpha, beta):
        if len(vec) and vec[0] < -tol:
            return False
        if any(b < a - tol for a, b in zip(vec, vec[1:])):
            return False
    for i, a in enumerate(alpha, start=1):
        for j, b in enumerate(beta, start=1):
            if i + j >= n + 1 and a + b < 1.0 - tol:
                return False
    return True


def objective_F(cfg: AntennaConfig, pt: ExponentPoint) -> float:
    """``E(alpha, beta)`` plus the source-relay exponent cost of ``gamma``."""
    _check_lengths(cfg, pt.alpha, pt.beta, pt.gamma)
    gamma_cost = math.fsum(
        (cfg.k + cfg.m - 2 * l + 1) * g for l, g in enumerate(pt.gamma, start=1)
    )
    return math.fsum([exponent_E(cfg, pt.alpha, pt.beta), gamma_cost])


def reduced_a(cfg: AntennaConfig, r: float, b: float, y: float) -> float:
    """Source-destination deficit on the outage boundary, ``r - b(1 - r/y)``.

    Values within ``-1e-9`` of zero are clamped to 0.
    """
    a = r - b * (1.0 - r / y)
    if a < -A_SLACK:
        raise InfeasibleError(f"derived a={a} < 0 at r={r}, b={b}, y={y}")
    return max(a, 0.0)


def objective_G(cfg: AntennaConfig, r: float, b: float, y: float) -> float:
    """Objective restricted to the outage boundary, as a function of ``(b, y)``."""
    if not y > 0:
        raise InfeasibleError(f"y must be positive, got {y}")
    if b < -DEFICIT_TOL or b > cfg.q + DEFICIT_TOL:
        raise InfeasibleError(f"b={b} outside [0, q={cfg.q}]")
    if y > cfg.t + DEFICIT_TOL:
        raise InfeasibleError(f"y={y} exceeds t={cfg.t}")
    a = reduced_a(cfg, r, b, y)
    if a > cfg.p + DEFICIT_TOL:
        raise InfeasibleError(f"derived a={a} exceeds p={cfg.p}")
    return objective_F(cfg, ExponentPoint.from_deficits(cfg, a, b, y))


def _weights(cfg: AntennaConfig):
    m, k, n = cfg.m, cfg.k, cfg.n
    ia = np.arange(1, cfg.p + 1)
    jb = np.arange(1, cfg.q + 1)
    lg = np.arange(1, cfg.t + 1)
    w_alpha = (m + n - 2 * ia + 1) + k  # alpha_i in [0,1]: -k(1-alpha_i) folds into the slope
    w_beta = k + n - 2 * jb + 1
    w_gamma = k + m - 2 * lg + 1
    pairs = [(i - 1, j - 1) for j in jb for i in range(1, _cross_count(cfg, int(j)) + 1)]
    return ia, jb, lg, w_alpha, w_beta, w_gamma, pairs


def objective_G_batch(cfg: AntennaConfig, r: float, b, y) -> np.ndarray:
    """Vectorized :func:`objective_G` over broadcastable arrays ``b`` and ``y``.

    Entries whose derived ``a`` is negative beyond the slack are returned
    as ``inf``; no other feasibility checks are applied.
    """
    b = np.asarray(b, dtype=float)
    y = np.asarray(y, dtype=float)
    b, y = np.broadcast_arrays(b, y)
    with np.errstate(divide="ignore", invalid="ignore"):
        a = r - b * (1.0 - r / y)
    bad = ~(a >= -A_SLACK)
    a = np.clip(a, 0.0, None)
    ia, jb, lg, w_alpha, w_beta, w_gamma, pairs = _weights(cfg)
    alpha = np.clip(ia - a[..., None], 0.0, 1.0)
    beta = np.clip(jb - b[..., None], 0.0, 1.0)
    gamma = np.clip(lg - y[..., None], 0.0, 1.0)
    val = alpha @ w_alpha - cfg.k * cfg.p + beta @ w_beta + gamma @ w_gamma
    for i, j in pairs:
        val = val + np.clip(1.0 - alpha[..., i] - beta[..., j], 0.0, None)
    return np.where(bad, np.inf, val)


def compute_f(r: float, gamma: Sequence[float]) -> float:
    """Fraction of the block the relay listens for, from the source-relay exponents.

    ``f = min(1, r / sum((1 - gamma_i)^+))`` with ``f = 0`` at ``r = 0`` and
    ``f = 1`` when the denominator vanishes.
    """
    if r < 0:
        raise DomainError(f"multiplexing gain must be nonnegative, got {r}")
    if any(g < 0 for g in gamma):
        raise DomainError("gamma components must be nonnegative")
    if r == 0:
        return 0.0
    denom = math.fsum(_pos(1.0 - g) for g in gamma)
    if denom == 0.0:
        return 1.0
    return min(1.0, r / denom)
