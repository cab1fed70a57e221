"""Independent reference computations used by the tests."""

import math

import numpy as np
from scipy import integrate


def outage_111_quadrature(r: float, rho: float) -> float:
    """Outage probability of the single-antenna relay channel by 2-D quadrature.

    Conditions on the source-relay and source-destination gains and
    integrates the relay-destination gain in closed form.
    """
    c = rho / 2.0
    rate = r * math.log2(rho)

    def inner(g1, gsr):
        cap = math.log2(1.0 + rho * gsr)
        f = 1.0 if cap <= 0 else min(1.0, rate / cap)
        first = f * math.log2(1.0 + c * g1)
        w = math.exp(-g1 - gsr)
        if f >= 1.0:
            return w * float(first <= rate)
        expo = min((rate - first) / (1.0 - f), 1000.0)
        thr = (2.0**expo - 1.0) / c - g1
        return w * (1.0 - math.exp(-max(0.0, thr)))

    val, _ = integrate.dblquad(inner, 0, np.inf, 0, np.inf, epsabs=1e-9)
    return val


def outage_ptp_siso(r: float, rho: float) -> float:
    """Outage of a scalar Rayleigh link at SNR ``rho / 2``: ``P(log2(1 + rho g / 2) <= r log2 rho)``."""
    return 1.0 - math.exp(-(rho**r - 1.0) * 2.0 / rho)
