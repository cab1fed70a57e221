import json
import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from dmtlab.errors import DomainError, InsufficientStatisticsError
from dmtlab.exponents import AntennaConfig
from dmtlab.simulator import (
    ChannelRealization,
    SimSeed,
    _gram,
    _logdet_eye_plus,
    decision_fraction,
    diversity_slope,
    estimate_outage,
    hermitian_eigenvalues,
    is_outage,
    mutual_information,
    sample_channel,
    sample_channels,
    support_set_check,
    wilson_radius,
)
from oracles import outage_111_quadrature, outage_ptp_siso

C111 = AntennaConfig(1, 1, 1)
C222 = AntennaConfig(2, 2, 2)


def _H(sr, sd, rd):
    return ChannelRealization(np.array([[sr]], complex), np.array([[sd]], complex), np.array([[rd]], complex))


# -- sampling ------------------------------------------------------------


def test_channel_moments():
    H_SR, H_SD, H_RD = sample_channels(C111, SimSeed(1).generator(), 100_000)
    for h in (H_SR, H_SD, H_RD):
        assert np.mean(np.abs(h) ** 2) == pytest.approx(1.0, abs=0.02)
        assert np.var(h.real) == pytest.approx(0.5, abs=0.01)
    corr = np.mean(H_SD.ravel() * np.conj(H_RD.ravel()))
    assert abs(corr) < 0.02


def test_channel_shapes_and_determinism():
    cfg = AntennaConfig(3, 2, 4)
    a = sample_channel(cfg, SimSeed(9, 4).generator(2))
    b = sample_channel(cfg, SimSeed(9, 4).generator(2))
    a.check(cfg)
    assert a.H_SR.shape == (2, 3) and a.H_SD.shape == (4, 3) and a.H_RD.shape == (4, 2)
    for name in ("H_SR", "H_SD", "H_RD"):
        assert np.array_equal(getattr(a, name), getattr(b, name))
    c = sample_channel(cfg, SimSeed(9, 5).generator(2))
    assert not np.array_equal(a.H_SD, c.H_SD)


def test_realization_shape_check():
    with pytest.raises(DomainError):
        _H(1, 1, 1).check(C222)


# -- eigenvalues ---------------------------------------------------------


def test_eigen_examples():
    np.testing.assert_allclose(hermitian_eigenvalues(np.eye(2)), [1, 1])
    np.testing.assert_allclose(hermitian_eigenvalues(np.diag([1.0, 3.0])), [3, 1])
    G = SimSeed(3).generator().standard_normal((3, 2, 2)) @ [1, 1j]
    w = hermitian_eigenvalues(G @ G.conj().T)
    assert w[0] > 0 and w[1] > 0 and abs(w[2]) <= 1e-10


def test_eigen_rejects_non_hermitian():
    with pytest.raises(DomainError):
        hermitian_eigenvalues(np.array([[1, 2], [0, 1]], complex))
    with pytest.raises(DomainError):
        hermitian_eigenvalues(np.ones((2, 3)))


@given(st.integers(1, 8), st.integers(0, 2**32 - 1))
def test_eigen_against_lapack(size, seed):
    rng = np.random.default_rng(seed)
    X = rng.standard_normal((size, size)) + 1j * rng.standard_normal((size, size))
    A = X + X.conj().T
    w, V = hermitian_eigenvalues(A, vectors=True)
    np.testing.assert_allclose(w, np.linalg.eigvalsh(A)[::-1], atol=1e-9 * np.linalg.norm(A))
    assert np.linalg.norm(A - V @ np.diag(w) @ V.conj().T) <= 1e-8 * np.linalg.norm(A)
    assert np.all(np.diff(w) <= 0)


@given(st.integers(1, 4), st.integers(1, 4), st.floats(0.1, 1e4), st.integers(0, 2**32 - 1))
def test_gram_logdet_identity(rows, cols, c, seed):
    rng = np.random.default_rng(seed)
    H = rng.standard_normal((rows, cols)) + 1j * rng.standard_normal((rows, cols))
    small = _logdet_eye_plus(_gram(H, small=True), c)
    big = _logdet_eye_plus(_gram(H, small=False), c)
    ref = np.linalg.slogdet(np.eye(rows) + c * H @ H.conj().T)[1] / math.log(2)
    assert small == pytest.approx(big, abs=1e-9)
    assert big == pytest.approx(ref, abs=1e-9)


# -- decision fraction and outage ----------------------------------------


def test_decision_fraction_examples():
    H = np.array([[1.0 + 0j]])
    assert decision_fraction(H, 100, 0.0) == 0.0
    # r log rho / log(1 + rho): 0.5 * log2(100) / log2(101)
    assert decision_fraction(H, 100, 0.5) == pytest.approx(0.5 * math.log(100) / math.log(101), abs=1e-15)
    assert decision_fraction(H, 100, 0.5) == pytest.approx(0.4989, abs=1e-4)
    assert decision_fraction(np.zeros((2, 2), complex), 100, 0.5) == 1.0
    with pytest.raises(DomainError):
        decision_fraction(H, 1.0, 0.5)


def test_is_outage_examples():
    assert is_outage(C111, _H(0, 0, 0), 100, 0.5)
    assert not is_outage(C111, _H(1, 0.3, 0), 100, 0.0)
    H = _H(1e6, 1, 1)
    assert decision_fraction(H.H_SR, 100, 0.5) < 0.2
    mi = mutual_information(C111, H, 100, 0.0)
    assert mi == pytest.approx(math.log2(1 + 50 * 2))
    assert not is_outage(C111, H, 100, 0.5)


@given(st.integers(0, 2**32 - 1), st.floats(0.05, 1.5))
def test_outage_ptp_reduction(seed, r):
    cfg = AntennaConfig(2, 2, 2)
    H = sample_channel(cfg, np.random.default_rng(seed))
    H0 = ChannelRealization(H.H_SR, H.H_SD, np.zeros_like(H.H_RD))
    rho = 1e3
    ptp = np.linalg.slogdet(np.eye(2) + rho / 4 * H.H_SD @ H.H_SD.conj().T)[1] / math.log(2)
    assert is_outage(cfg, H0, rho, r, force_f=1.0) == (ptp <= r * math.log2(rho))
    assert is_outage(cfg, H0, rho, r) == (ptp <= r * math.log2(rho))


def test_mi_nondecreasing_in_snr():
    rng = np.random.default_rng(0)
    cfg = AntennaConfig(2, 3, 2)
    for _ in range(100):
        H = sample_channel(cfg, rng)
        f = rng.uniform()
        vals = [mutual_information(cfg, H, rho, f) for rho in (10.0, 100.0, 1000.0)]
        assert vals[0] <= vals[1] <= vals[2]


def test_decision_fraction_monotone():
    rng = np.random.default_rng(1)
    for _ in range(100):
        H = sample_channel(AntennaConfig(2, 2, 2), rng).H_SR
        U, s, Vh = np.linalg.svd(H)
        bigger = U @ np.diag(s * np.array([1.5, 1.0])) @ Vh
        assert decision_fraction(bigger, 100, 0.7) <= decision_fraction(H, 100, 0.7) + 1e-15
        fs = [decision_fraction(H, 100, r) for r in (0.1, 0.5, 1.0, 2.0)]
        assert all(b >= a for a, b in zip(fs, fs[1:]))


# -- outage estimation ---------------------------------------------------


def test_wilson_radius():
    # closed-form Wilson interval at p = 0.5, n = 100
    z = 1.959963984540054
    n, p = 100, 0.5
    half = z / (1 + z * z / n) * math.sqrt(p * (1 - p) / n + z * z / (4 * n * n))
    assert wilson_radius(50, 100) == pytest.approx(half, rel=1e-9)


def test_estimate_against_quadrature_oracle():
    rho = 10 ** 0.5
    est = estimate_outage(C111, 0.99, rho, 200_000, seed=11)
    ref = outage_111_quadrature(0.99, rho)
    assert abs(est.p_out - ref) <= 3 * est.ci_radius
    assert est.p_out > 0.5


def test_estimate_ptp_oracle():
    est = estimate_outage(C111, 0.5, 100.0, 200_000, seed=12, force_f=1.0)
    assert abs(est.p_out - outage_ptp_siso(0.5, 100.0)) <= 3 * est.ci_radius


def test_estimate_consistency_when_doubling():
    a = estimate_outage(C111, 0.5, 100.0, 100_000, seed=5)
    b = estimate_outage(C111, 0.5, 100.0, 200_000, seed=5)
    assert abs(a.p_out - b.p_out) <= 3 * max(a.ci_radius, b.ci_radius)


def test_estimate_decreases_with_snr():
    ps = [estimate_outage(C111, 0.5, 10 ** (db / 10), 100_000, seed=3).p_out for db in (10, 20, 30)]
    assert ps[0] > ps[1] > ps[2]


def test_estimate_deterministic_and_worker_independent():
    a = estimate_outage(C222, 1.0, 100.0, 150_000, seed=8, workers=1)
    b = estimate_outage(C222, 1.0, 100.0, 150_000, seed=8, workers=2)
    assert a == b


def test_estimate_warns_on_few_trials():
    with pytest.warns(RuntimeWarning):
        estimate_outage(C111, 0.5, 100.0, 50, seed=1)


def test_slope_grid_requirements():
    with pytest.raises(DomainError):
        diversity_slope(C111, 0.5, [20, 25], 1000, 0)
    with pytest.raises(DomainError):
        diversity_slope(C111, 0.5, [20, 25, 30], 1000, 0)


def test_slope_insufficient_statistics():
    with pytest.warns(RuntimeWarning):
        with pytest.raises(InsufficientStatisticsError):
            diversity_slope(C111, 0.5, [20, 25, 30, 35], 10, 0)
        est = diversity_slope(C111, 0.5, [20, 25, 30, 35], 10, 0, strict=False)
    assert est.slope is None and est.reason == "insufficient outage events"


def test_slope_single_antenna_high_rate():
    est = diversity_slope(C111, 0.75, [20, 25, 30, 35], 2_000_000, seed=7)
    assert est.slope == pytest.approx(1 / 3, abs=0.25)


def test_slope_ptp_baseline():
    est = diversity_slope(C111, 0.5, [20, 25, 30, 35], 2_000_000, seed=7, force_f=1.0)
    assert est.slope == pytest.approx(0.5, abs=0.2)


def test_outage_estimate_serialization():
    est = diversity_slope(C111, 0.3, [10, 15, 20, 25], 20_000, seed=2)
    lines = est.to_csv().splitlines()
    assert lines[0] == "snr_db,p_out,trials,ci_radius"
    assert len(lines) == 5
    doc = json.loads(est.to_json())
    assert doc["slope"] == est.slope and len(doc["points"]) == 4
    again = diversity_slope(C111, 0.3, [10, 15, 20, 25], 20_000, seed=2)
    assert again == est


def test_outage_point_order_independent():
    fwd = diversity_slope(C111, 0.3, [10, 15, 20, 25], 20_000, seed=2)
    rev = diversity_slope(C111, 0.3, [25, 20, 15, 10], 20_000, seed=2)
    assert fwd.p_out == tuple(reversed(rev.p_out))


# -- support of the exponents --------------------------------------------


def test_support_vacuous_margin():
    assert support_set_check(C222, 1e4, 20_000, seed=0, margin=1.0) == 0.0


def test_support_shrinks_with_snr():
    fr = [support_set_check(C222, rho, 50_000, seed=4) for rho in (1e3, 10**4.5, 1e6)]
    assert fr[0] >= fr[1] >= fr[2]
    assert fr[2] < fr[0]


def test_support_rejects_low_snr():
    with pytest.raises(DomainError):
        support_set_check(C222, 100.0, 100, seed=0)
