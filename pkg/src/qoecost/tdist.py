"""Student t distribution CDF and quantile."""
from __future__ import annotations

import math

from scipy.special import betainc


def t_cdf(t: float, dof: float) -> float:
    """CDF of Student's t with ``dof`` degrees of freedom.

    Uses P(|T| > t) = I_x(dof/2, 1/2) with x = dof / (dof + t^2).
    """
    if dof <= 0:
        raise ValueError("dof must be positive")
    if t == 0:
        return 0.5
    tail = 0.5 * float(betainc(0.5 * dof, 0.5, dof / (dof + t * t)))
    return 1.0 - tail if t > 0 else tail


def t_quantile(p: float, dof: float, tol: float = 1e-8) -> float:
    """Inverse of :func:`t_cdf` by bisection."""
    if not 0.0 < p < 1.0:
        raise ValueError("p must lie in (0, 1)")
    if p == 0.5:
        return 0.0
    if p < 0.5:
        return -t_quantile(1.0 - p, dof, tol)
    lo, hi = 0.0, 1.0
    while t_cdf(hi, dof) < p:
        lo, hi = hi, 2.0 * hi
        if math.isinf(hi):
            raise ValueError("quantile bracket overflow")
    while hi - lo > tol * max(1.0, lo):
        mid = 0.5 * (lo + hi)
        if t_cdf(mid, dof) < p:
            lo = mid
        else:
            hi = mid
    return 0.5 * (lo + hi)
