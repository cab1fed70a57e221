"""Monte Carlo outage simulation for the DDF relay channel at finite SNR.

Channels are i.i.d. CN(0, 1). Random streams are derived from
``(seed, snr point, chunk)`` so every estimate is reproducible and does
not depend on the order SNR points are visited or on worker count.
All logarithms are base 2.
"""

from __future__ import annotations

import csv
import io
import json
import math
import os
import warnings
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field

import numpy as np
from scipy import stats

from .errors import DomainError, InsufficientStatisticsError, SolverError
from .exponents import AntennaConfig

__all__ = [
    "ChannelRealization",
    "SimSeed",
    "OutagePoint",
    "OutageEstimate",
    "sample_channel",
    "sample_channels",
    "hermitian_eigenvalues",
    "decision_fraction",
    "mutual_information",
    "is_outage",
    "estimate_outage",
    "diversity_slope",
    "support_set_check",
    "snr_stream",
    "wilson_radius",
]

CHUNK = 1 << 16
MIN_EVENTS = 20
MIN_TRIALS = 1000
HERMITIAN_TOL = 1e-10


# -- random streams ------------------------------------------------------


@dataclass(frozen=True)
class SimSeed:
    """Root seed plus substream index; ``(seed, stream, chunk)`` fixes a draw."""

    seed: int
    stream: int = 0

    def generator(self, chunk: int = 0) -> np.random.Generator:
        ss = np.random.SeedSequence(int(self.seed) & (2**64 - 1), spawn_key=(self.stream, chunk))
        return np.random.Generator(np.random.Philox(ss))


def snr_stream(snr_db: float) -> int:
    """Substream index for an SNR point, stable to 1e-3 dB."""
    return int(round(float(snr_db) * 1000)) & 0xFFFFFFFF


# -- channels ------------------------------------------------------------


@dataclass(frozen=True)
class ChannelRealization:
    """Source-relay ``(k, m)``, source-destination ``(n, m)`` and relay-destination ``(n, k)`` gains."""

    H_SR: np.ndarray
    H_SD: np.ndarray
    H_RD: np.ndarray

    def check(self, cfg: AntennaConfig) -> None:
        shapes = {"H_SR": (cfg.k, cfg.m), "H_SD": (cfg.n, cfg.m), "H_RD": (cfg.n, cfg.k)}
        for name, shape in shapes.items():
            h = getattr(self, name)
            if h.shape != shape:
                raise DomainError(f"{name} has shape {h.shape}, expected {shape}")
            if not np.all(np.isfinite(h)):
                raise DomainError(f"{name} has non-finite entries")


def _cn(rng: np.random.Generator, shape) -> np.ndarray:
    z = rng.standard_normal(shape + (2,))
    return (z[..., 0] + 1j * z[..., 1]) * math.sqrt(0.5)


def sample_channel(cfg: AntennaConfig, rng: np.random.Generator) -> ChannelRealization:
    """One Rayleigh draw of all three links."""
    return ChannelRealization(
        _cn(rng, (cfg.k, cfg.m)), _cn(rng, (cfg.n, cfg.m)), _cn(rng, (cfg.n, cfg.k))
    )


def sample_channels(cfg: AntennaConfig, rng: np.random.Generator, count: int):
    """``count`` independent draws as stacked arrays ``(H_SR, H_SD, H_RD)``."""
    return (
        _cn(rng, (count, cfg.k, cfg.m)),
        _cn(rng, (count, cfg.n, cfg.m)),
        _cn(rng, (count, cfg.n, cfg.k)),
    )


# -- linear algebra ------------------------------------------------------


def hermitian_eigenvalues(A, vectors: bool = False, tol: float = 1e-12, max_sweeps: int = 100):
    """Eigenvalues of a Hermitian matrix by cyclic Jacobi rotations.

    Parameters
    ----------
    A : array_like
        Square complex Hermitian matrix.
    vectors : bool
        Also return the unitary eigenvector matrix (columns match values).
    tol : float
        Stop when the off-diagonal Frobenius norm falls below ``tol * ||A||``.

    Returns
    -------
    numpy.ndarray or (numpy.ndarray, numpy.ndarray)
        Real eigenvalues in descending order, optionally with eigenvectors.
    """
    A = np.array(A, dtype=complex)
    if A.ndim != 2 or A.shape[0] != A.shape[1]:
        raise DomainError(f"expected a square matrix, got shape {A.shape}")
    scale = max(1.0, float(np.linalg.norm(A)))
    if np.max(np.abs(A - A.conj().T), initial=0.0) > HERMITIAN_TOL * scale:
        raise DomainError("matrix is not Hermitian")
    A = 0.5 * (A + A.conj().T)
    size = A.shape[0]
    V = np.eye(size, dtype=complex)
    norm = float(np.linalg.norm(A))
    for _ in range(max_sweeps):
        off = float(np.linalg.norm(A - np.diag(np.diag(A))))
        if off <= tol * max(norm, 1e-300):
            break
        for p in range(size - 1):
            for q in range(p + 1, size):
                apq = A[p, q]
                mag = abs(apq)
                if mag == 0.0:
                    continue
                e = apq / mag
                theta = (A[q, q].real - A[p, p].real) / (2.0 * mag)
                t = math.copysign(1.0, theta) / (abs(theta) + math.sqrt(theta * theta + 1.0))
                c = 1.0 / math.sqrt(t * t + 1.0)
                s = t * c
                J = np.eye(size, dtype=complex)
                J[p, p], J[p, q] = c, s
                J[q, p], J[q, q] = -s * np.conj(e), c * np.conj(e)
                A = J.conj().T @ A @ J
                V = V @ J
    else:
        raise SolverError("Jacobi sweeps did not converge")
    w = np.diag(A).real
    order = np.argsort(-w, kind="stable")
    if vectors:
        return w[order], V[:, order]
    return w[order]


def _gram(H: np.ndarray, small: bool = True) -> np.ndarray:
    """Batched Gram matrix ``H H^H`` or ``H^H H``; with ``small`` the smaller of the two."""
    rows, cols = H.shape[-2:]
    if small and cols < rows:
        return np.swapaxes(H, -1, -2).conj() @ H
    return H @ np.swapaxes(H, -1, -2).conj()


def _logdet_eye_plus(G: np.ndarray, c) -> np.ndarray:
    """Batched ``log2 det(I + c G)`` for Hermitian PSD ``G``."""
    c = np.asarray(c, dtype=float)
    dim = G.shape[-1]
    if dim == 1:
        return np.log2(1.0 + c * G[..., 0, 0].real)
    if dim == 2:
        g11, g22 = G[..., 0, 0].real, G[..., 1, 1].real
        g12 = np.abs(G[..., 0, 1]) ** 2
        det = (1.0 + c * g11) * (1.0 + c * g22) - c * c * g12
        return np.log2(det)
    M = np.eye(dim) + c[..., None, None] * G if c.ndim else np.eye(dim) + c * G
    sign, logabs = np.linalg.slogdet(M)
    return logabs / math.log(2.0)


def _check_rho(rho: float) -> float:
    rho = float(rho)
    if not rho > 1.0:
        raise DomainError(f"rho must exceed 1, got {rho}")
    return rho


def _fraction_batch(H_SR: np.ndarray, rho: float, r: float) -> np.ndarray:
    if r == 0:
        return np.zeros(H_SR.shape[:-2])
    cap = _logdet_eye_plus(_gram(H_SR), rho)
    need = r * math.log2(rho)
    with np.errstate(divide="ignore", invalid="ignore"):
        f = np.where(cap > 0, need / cap, 1.0)
    return np.minimum(1.0, f)


def decision_fraction(H_SR, rho: float, r: float) -> float:
    """Share of the block the relay spends listening before it can decode.

    ``min(1, r log rho / log det(I + rho Gram(H_SR)))``, using the smaller
    Gram matrix; 0 at ``r = 0`` and 1 when the source-relay link is null.
    """
    rho = _check_rho(rho)
    if r < 0:
        raise DomainError(f"multiplexing gain must be nonnegative, got {r}")
    return float(_fraction_batch(np.asarray(H_SR, dtype=complex), rho, r))


def _mi_batch(H_SD, H_RD, rho: float, f) -> np.ndarray:
    n = H_SD.shape[-2]
    c = rho / (2.0 * n)
    g_sd = _gram(H_SD, small=False)
    g_all = g_sd + _gram(H_RD, small=False)
    return f * _logdet_eye_plus(g_sd, c) + (1.0 - f) * _logdet_eye_plus(g_all, c)


def mutual_information(cfg: AntennaConfig, H: ChannelRealization, rho: float, f: float) -> float:
    """Per-block mutual information when the relay joins after fraction ``f``."""
    rho = _check_rho(rho)
    H.check(cfg)
    return float(_mi_batch(H.H_SD, H.H_RD, rho, f))


def is_outage(cfg: AntennaConfig, H: ChannelRealization, rho: float, r: float, force_f: float | None = None) -> bool:
    """Whether the draw cannot support rate ``r log rho``.

    ``force_f`` pins the decision fraction; ``force_f=1`` gives the
    source-destination link alone.
    """
    rho = _check_rho(rho)
    f = decision_fraction(H.H_SR, rho, r) if force_f is None else float(force_f)
    return mutual_information(cfg, H, rho, f) <= r * math.log2(rho)


# -- outage estimation ---------------------------------------------------


def wilson_radius(events: int, trials: int) -> float:
    """Half-width of the 95% Wilson score interval."""
    ci = stats.binomtest(int(events), int(trials)).proportion_ci(0.95, method="wilson")
    return 0.5 * (ci.high - ci.low)


@dataclass(frozen=True)
class OutagePoint:
    p_out: float
    trials: int
    events: int
    ci_radius: float


def _count_chunk(args) -> int:
    cfg, r, rho, seed, stream, chunk, size, force_f = args
    rng = SimSeed(seed, stream).generator(chunk)
    H_SR, H_SD, H_RD = sample_channels(cfg, rng, size)
    f = _fraction_batch(H_SR, rho, r) if force_f is None else float(force_f)
    mi = _mi_batch(H_SD, H_RD, rho, f)
    return int(np.count_nonzero(mi <= r * math.log2(rho)))


def _workers(workers: int | None) -> int:
    cap = os.environ.get("DMTLAB_THREADS")
    w = workers if workers is not None else (os.cpu_count() or 1)
    if cap:
        w = min(w, max(1, int(cap)))
    return max(1, w)


def estimate_outage(
    cfg: AntennaConfig,
    r: float,
    rho: float,
    trials: int,
    seed: int,
    stream: int | None = None,
    force_f: float | None = None,
    workers: int | None = None,
) -> OutagePoint:
    """Empirical outage probability with a 95% Wilson radius.

    Trials are split into fixed-size chunks, each with its own random
    stream, so the result depends only on ``(seed, stream, trials)``.
    ``stream`` defaults to the substream of ``10 log10 rho``.
    """
    rho = _check_rho(rho)
    if r < 0:
        raise DomainError(f"multiplexing gain must be nonnegative, got {r}")
    trials = int(trials)
    if trials < 1:
        raise DomainError("trials must be positive")
    if trials < MIN_TRIALS:
        warnings.warn(f"only {trials} trials; estimates will be coarse", RuntimeWarning, stacklevel=2)
    if stream is None:
        stream = snr_stream(10.0 * math.log10(rho))
    jobs = []
    for chunk, start in enumerate(range(0, trials, CHUNK)):
        jobs.append((cfg, r, rho, seed, stream, chunk, min(CHUNK, trials - start), force_f))
    w = _workers(workers)
    if w == 1 or len(jobs) == 1:
        events = sum(map(_count_chunk, jobs))
    else:
        with ProcessPoolExecutor(max_workers=min(w, len(jobs))) as pool:
            events = sum(pool.map(_count_chunk, jobs))
    return OutagePoint(events / trials, trials, events, wilson_radius(events, trials))


@dataclass(frozen=True)
class OutageEstimate:
    """Outage probabilities over an SNR grid and the fitted log-log slope.

    ``slope`` is None when fewer than two points have enough events;
    ``reason`` then says why.
    """

    snr_db_grid: tuple[float, ...]
    p_out: tuple[float, ...]
    trials: tuple[int, ...]
    events: tuple[int, ...]
    wilson_radius: tuple[float, ...]
    slope: float | None
    slope_stderr: float | None
    used: tuple[bool, ...] = field(default=())
    reason: str | None = None

    def to_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["snr_db", "p_out", "trials", "ci_radius"])
        for row in zip(self.snr_db_grid, self.p_out, self.trials, self.wilson_radius):
            w.writerow([repr(float(row[0])), repr(float(row[1])), int(row[2]), repr(float(row[3]))])
        return buf.getvalue()

    def summary(self) -> dict:
        return {
            "slope": self.slope,
            "slope_stderr": self.slope_stderr,
            "reason": self.reason,
            "points_used": [float(s) for s, u in zip(self.snr_db_grid, self.used) if u],
            "points_excluded": [float(s) for s, u in zip(self.snr_db_grid, self.used) if not u],
        }

    def to_json(self, **kwargs) -> str:
        obj = {
            "points": [
                {"snr_db": s, "p_out": p, "trials": t, "events": e, "ci_radius": c}
                for s, p, t, e, c in zip(
                    self.snr_db_grid, self.p_out, self.trials, self.events, self.wilson_radius
                )
            ],
            **self.summary(),
        }
        return json.dumps(obj, **kwargs)


def fit_slope(snr_db, p_out, events) -> tuple[float, float, list[bool]]:
    """Least-squares slope of ``-log10 p`` against ``log10 rho`` over points with enough events."""
    used = [int(e) >= MIN_EVENTS for e in events]
    x = np.array([s / 10.0 for s, u in zip(snr_db, used) if u])
    y = np.array([-math.log10(p) for p, u in zip(p_out, used) if u])
    if len(x) < 2:
        raise InsufficientStatisticsError("insufficient outage events")
    if len(x) == 2:
        slope = float((y[1] - y[0]) / (x[1] - x[0]))
        return slope, math.nan, used
    fit = stats.linregress(x, y)
    return float(fit.slope), float(fit.stderr), used


def diversity_slope(
    cfg: AntennaConfig,
    r: float,
    snr_db_grid,
    trials: int,
    seed: int,
    force_f: float | None = None,
    workers: int | None = None,
    strict: bool = True,
) -> OutageEstimate:
    """Outage estimates over ``snr_db_grid`` and their diversity slope.

    With ``strict`` the grid must have at least 3 points spanning 15 dB,
    and too few usable points raises :class:`InsufficientStatisticsError`.
    Without it the estimate is returned with ``slope=None`` and a reason.
    """
    grid = tuple(float(s) for s in snr_db_grid)
    if strict and (len(grid) < 3 or max(grid) - min(grid) < 15.0):
        raise DomainError("SNR grid needs at least 3 points spanning 15 dB")
    pts = [
        estimate_outage(cfg, r, 10.0 ** (s / 10.0), trials, seed, snr_stream(s), force_f, workers)
        for s in grid
    ]
    base = dict(
        snr_db_grid=grid,
        p_out=tuple(p.p_out for p in pts),
        trials=tuple(p.trials for p in pts),
        events=tuple(p.events for p in pts),
        wilson_radius=tuple(p.ci_radius for p in pts),
    )
    try:
        slope, stderr, used = fit_slope(grid, base["p_out"], base["events"])
    except InsufficientStatisticsError as exc:
        if strict:
            raise
        used = [p.events >= MIN_EVENTS for p in pts]
        return OutageEstimate(**base, slope=None, slope_stderr=None, used=tuple(used), reason=str(exc))
    stderr = None if math.isnan(stderr) else stderr
    return OutageEstimate(**base, slope=slope, slope_stderr=stderr, used=tuple(used))


# -- support of the eigenvalue exponents ---------------------------------


def eigen_exponents(cfg: AntennaConfig, H_SD: np.ndarray, H_RD: np.ndarray, rho: float):
    """Batched exponents ``-log lambda / log rho`` of the two Wishart-type matrices.

    Returns ``(alpha, beta)`` with shapes ``(..., p)`` and ``(..., q)``,
    ordered from the largest eigenvalue. Eigenvalues above 1 have order-one
    size at any SNR, so their negative exponents are floored at 0.
    """
    n = cfg.n
    V2 = _gram(H_SD, small=False)
    W = np.linalg.inv(np.eye(n) + rho * V2)
    V1 = np.swapaxes(H_RD, -1, -2).conj() @ W @ H_RD
    V1 = 0.5 * (V1 + np.swapaxes(V1, -1, -2).conj())
    lam = np.linalg.eigvalsh(V2)[..., ::-1][..., : cfg.p]
    xi = np.linalg.eigvalsh(V1)[..., ::-1][..., : cfg.q]
    tiny = np.finfo(float).tiny
    lr = math.log(rho)
    alpha = np.maximum(-np.log(np.maximum(lam, tiny)) / lr, 0.0)
    beta = np.maximum(-np.log(np.maximum(xi, tiny)) / lr, 0.0)
    return alpha, beta


def support_set_check(
    cfg: AntennaConfig, rho: float, samples: int, seed: int, margin: float = 0.15
) -> float:
    """Fraction of draws whose exponents violate ``alpha_i + beta_j >= 1 - margin``.

    Only pairs with ``i + j >= n + 1`` are constrained. The same channel
    draws are reused at every ``rho`` for a given seed, so violation
    fractions at different SNRs are directly comparable.
    """
    rho = float(rho)
    if rho < 1e3:
        raise DomainError(f"rho must be at least 1e3, got {rho}")
    pairs = [
        (i, j) for i in range(cfg.p) for j in range(cfg.q) if (i + 1) + (j + 1) >= cfg.n + 1
    ]
    bad = 0
    stream = 0
    for chunk, start in enumerate(range(0, samples, CHUNK)):
        rng = SimSeed(seed, stream).generator(chunk)
        _, H_SD, H_RD = sample_channels(cfg, rng, min(CHUNK, samples - start))
        alpha, beta = eigen_exponents(cfg, H_SD, H_RD, rho)
        viol = np.zeros(alpha.shape[0], dtype=bool)
        for i, j in pairs:
            viol |= alpha[:, i] + beta[:, j] < 1.0 - margin
        bad += int(np.count_nonzero(viol))
    return bad / samples
