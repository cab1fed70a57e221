import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from dmtlab.curves import evaluate, ptp_dmt
from dmtlab.errors import DomainError
from dmtlab.exponents import AntennaConfig, objective_G, objective_G_batch
from dmtlab.optimizer import (
    RegionId,
    SolverSettings,
    b_range,
    d_hat,
    ddf_curve,
    ddf_dmt,
    min_over_b,
    region_of,
    regions,
)

C111 = AntennaConfig(1, 1, 1)
small_configs = st.builds(AntennaConfig, st.integers(1, 3), st.integers(1, 3), st.integers(1, 3))


def test_settings_validation():
    with pytest.raises(DomainError):
        SolverSettings(y_grid=8)
    with pytest.raises(DomainError):
        SolverSettings(refine_tol=0)


def test_regions_single_antenna():
    # r/(1 - r) splits R1 from R3; R2 collapses for q = n
    regs = regions(C111, 0.25)
    assert set(regs) == {RegionId.R1, RegionId.R3}
    assert regs[RegionId.R1] == pytest.approx((0.25, 1 / 3))
    assert regs[RegionId.R3] == pytest.approx((1 / 3, 1.0))
    assert set(regions(C111, 0.75)) == {RegionId.R1}


def test_region_of_half_open():
    assert region_of(C111, 0.25, 1 / 3) == RegionId.R1
    assert region_of(C111, 0.25, 0.34) == RegionId.R3
    with pytest.raises(DomainError):
        region_of(C111, 0.25, 0.25)


def test_b_range_examples():
    eps = 1e-6
    assert b_range(C111, 0.5, 0.5 + eps)[1] == pytest.approx(0.5, abs=1e-5)
    assert b_range(C111, 0.25, 1.0) == pytest.approx((0.0, 1 / 3))
    assert b_range(AntennaConfig(2, 2, 2), 1.0, 2.0) == (0.0, 2.0)
    with pytest.raises(DomainError):
        b_range(C111, 0.5, 1.2)


def test_min_over_b_examples():
    b, v = min_over_b(C111, 0.5, 0.75)
    assert b == pytest.approx(0.75) and v == pytest.approx(1.0, abs=1e-12)
    b, v = min_over_b(C111, 0.25, 1.0)
    assert b == 0.0 and v == pytest.approx(1.5, abs=1e-12)
    # y = 2r makes the objective flat in b; the tie goes to the smallest b
    b, v = min_over_b(C111, 0.25, 0.5)
    assert b == 0.0 and v == pytest.approx(2.0, abs=1e-12)
    assert objective_G(C111, 0.25, 0.5, 0.5) == pytest.approx(2.0, abs=1e-12)
    # below 2r the a >= 0 corner wins: value 3 - yr/(y - r) - y
    y = 0.45
    b, v = min_over_b(C111, 0.25, y)
    assert b == pytest.approx(0.25 * y / (y - 0.25)) and v == pytest.approx(3 - b - y, abs=1e-12)


@pytest.mark.parametrize(
    "dims,r,expected",
    [((1, 1, 1), 0.25, 1.5), ((1, 1, 1), 0.75, 1 / 3), ((1, 2, 1), 0.4, 5 / 3)],
)
def test_d_hat_examples(dims, r, expected):
    cfg = AntennaConfig(*dims)
    rec = d_hat(cfg, r)
    assert rec.value == pytest.approx(expected, abs=1e-6)
    # record is self-consistent
    assert rec.value == pytest.approx(objective_G(cfg, r, rec.arg_b, rec.arg_y), abs=1e-9)
    lo, hi = regions(cfg, r)[rec.region]
    assert lo - 1e-9 <= rec.arg_y <= hi + 1e-9
    assert 0 <= rec.arg_b <= b_range(cfg, r, max(rec.arg_y, r + 1e-12))[1] + 1e-9


def test_d_hat_single_antenna_optimum_location():
    rec = d_hat(C111, 0.25)
    assert rec.arg_y == pytest.approx(1.0, abs=1e-6)
    assert rec.arg_b == pytest.approx(0.0, abs=1e-6)


def test_d_hat_domain():
    with pytest.raises(DomainError):
        d_hat(C111, 0.0)
    with pytest.raises(DomainError):
        d_hat(C111, 1.0)


@pytest.mark.parametrize(
    "dims,r,expected",
    [((1, 2, 1), 0.0, 3.0), ((2, 1, 2), 0.5, 3.5), ((2, 1, 2), 1.5, 0.5)],
)
def test_ddf_dmt_examples(dims, r, expected):
    assert ddf_dmt(AntennaConfig(*dims), r) == pytest.approx(expected, abs=1e-9)


def test_ddf_dmt_domain():
    with pytest.raises(DomainError):
        ddf_dmt(C111, 1.5)
    with pytest.raises(DomainError):
        ddf_dmt(C111, -0.5)


def test_ddf_curve_examples():
    c = ddf_curve(C111, 0.25)
    np.testing.assert_allclose(c.d, [2, 1.5, 1, 1 / 3, 0], atol=1e-9)
    np.testing.assert_allclose(c.r, [0, 0.25, 0.5, 0.75, 1.0])
    assert not c.exact
    c = ddf_curve(C111, 0.5)
    np.testing.assert_allclose(c.d, [2, 1, 0], atol=1e-9)


def test_ddf_curve_rejects_uneven_coarse_step():
    with pytest.raises(DomainError):
        ddf_curve(C111, 0.3)


def test_ddf_curve_worker_independent():
    cfg = AntennaConfig(2, 2, 2)
    a = ddf_curve(cfg, 0.1, workers=1)
    b = ddf_curve(cfg, 0.1, workers=2)
    assert a.breakpoints == b.breakpoints


@pytest.mark.parametrize("dims", [(1, 1, 1), (2, 3, 2), (3, 1, 2), (2, 2, 3)])
def test_curve_properties(dims):
    cfg = AntennaConfig(*dims)
    c = ddf_curve(cfg, 0.05)
    assert c.d[0] == cfg.m * cfg.n + cfg.k * cfg.m
    assert c.d[-1] == 0.0
    assert np.all(np.diff(c.d) <= 1e-9)
    ptp = ptp_dmt(cfg.m, cfg.n)
    for r, d in c.breakpoints:
        if r >= cfg.t:
            assert d == evaluate(ptp, r)


def _random_probe(rng):
    while True:
        cfg = AntennaConfig(*(int(v) for v in rng.integers(1, 4, 3)))
        r = rng.uniform(0.01, min(cfg.p, cfg.t) - 0.01) if min(cfg.p, cfg.t) > 0.02 else None
        if r is not None and regions(cfg, r):
            return cfg, r, rng.uniform(r, cfg.t)


def test_inner_minimum_dominates_brute_force():
    rng = np.random.default_rng(2024)
    for _ in range(100):
        cfg, r, y = _random_probe(rng)
        _, v = min_over_b(cfg, r, y)
        _, bmax = b_range(cfg, r, y)
        brute = objective_G_batch(cfg, r, np.linspace(0, bmax, 10_000), y).min()
        assert v <= brute + 1e-12


@given(small_configs, st.floats(0.02, 0.98))
def test_region_boundary_continuity(cfg, u):
    r = u * min(cfg.p, cfg.t)
    q, n = cfg.q, cfg.n
    bounds = []
    if n > r:
        bounds.append((q * r / (n - r), RegionId.R1, RegionId.R2))
    if q > r:
        bounds.append((q * r / (q - r), RegionId.R2, RegionId.R3))
    for y, left, right in bounds:
        if r < y <= cfg.t:
            vl = min_over_b(cfg, r, y, left)[1]
            vr = min_over_b(cfg, r, y, right)[1]
            assert abs(vl - vr) <= 1e-9
            # and from either side numerically
            if y + 1e-9 <= cfg.t:
                assert abs(min_over_b(cfg, r, y + 1e-13)[1] - vl) <= 1e-8


@given(small_configs, st.floats(0.02, 0.98))
def test_d_hat_below_hand_picked_point(cfg, u):
    r = u * min(cfg.p, cfg.t)
    rec = d_hat(cfg, r)
    # b = 0, y = t: no help from the relay and no source-relay penalty
    assert rec.value <= objective_G(cfg, r, 0.0, float(cfg.t)) + 1e-9
