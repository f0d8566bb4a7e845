"""Bernoulli relative entropy and confidence bounds derived from it.

The divergence between two Bernoulli means is

    d(p, q) = p*log(p/q) + (1-p)*log((1-p)/(1-q))

with natural logarithms and the usual continuous extensions: d(p, p) = 0,
d(0, q) = -log(1-q), d(1, q) = -log(q), and d(p, q) = +inf when q is a
degenerate mean (0 or 1) that p does not share.

``kl_ucb_upper`` and ``kl_ucb_lower`` invert the divergence: given an
empirical mean, an observation count, and a divergence budget ``delta``,
they return the widest mean still compatible with the data, i.e. the
largest q >= mu_hat (smallest q <= mu_hat) with pulls * d(mu_hat, q) <=
delta.  The map q -> d(mu_hat, q) is strictly increasing away from mu_hat
on either side, so a plain bisection is exact; a fixed 100 iterations
drives the bracket width below double-precision resolution with no
early-exit bookkeeping.
"""

from __future__ import annotations

import math

import numpy as np

_BISECT_ITERS = 100


def _check_unit(x: float, name: str) -> float:
    x = float(x)
    if not 0.0 <= x <= 1.0:  # also rejects nan
        raise ValueError(f"{name} must lie in [0, 1], got {x!r}")
    return x


def kl_div(p: float, q: float) -> float:
    """Bernoulli relative entropy d(p, q) in nats.

    Raises ValueError if either argument is outside [0, 1] or not a number.
    """
    p = _check_unit(p, "p")
    q = _check_unit(q, "q")
    if p == q:
        return 0.0
    if q <= 0.0 or q >= 1.0:
        return math.inf
    if p == 0.0:
        return -math.log1p(-q)
    if p == 1.0:
        return -math.log(q)
    return p * math.log(p / q) + (1.0 - p) * math.log((1.0 - p) / (1.0 - q))


def _check_solver_args(mu_hat: float, pulls: float, delta: float) -> tuple[float, float, float]:
    mu_hat = _check_unit(mu_hat, "mu_hat")
    pulls = float(pulls)
    if not (math.isfinite(pulls) and pulls >= 1.0):
        raise ValueError(f"pulls must be a finite count >= 1, got {pulls!r}")
    delta = float(delta)
    if not (math.isfinite(delta) and delta >= 0.0):
        raise ValueError(f"delta must be finite and >= 0, got {delta!r}")
    return mu_hat, pulls, delta


def kl_ucb_upper(mu_hat: float, pulls: float, delta: float) -> float:
    """Largest q in [mu_hat, 1] with pulls * d(mu_hat, q) <= delta.

    For mu_hat = 0 this is 1 - exp(-delta/pulls); for mu_hat = 1 it is 1.
    """
    mu_hat, pulls, delta = _check_solver_args(mu_hat, pulls, delta)
    if delta == 0.0 or mu_hat == 1.0:
        return mu_hat
    log = math.log
    if mu_hat == 0.0:
        def dq(q: float) -> float:
            return -math.log1p(-q)
    else:
        base = mu_hat * log(mu_hat) + (1.0 - mu_hat) * log(1.0 - mu_hat)

        def dq(q: float) -> float:
            one_q = 1.0 - q
            if q <= 0.0 or one_q <= 0.0:
                return math.inf
            return base - mu_hat * log(q) - (1.0 - mu_hat) * log(one_q)

    lo, hi = mu_hat, 1.0
    for _ in range(_BISECT_ITERS):
        mid = 0.5 * (lo + hi)
        if pulls * dq(mid) <= delta:
            lo = mid
        else:
            hi = mid
    return lo


def kl_ucb_lower(mu_hat: float, pulls: float, delta: float) -> float:
    """Smallest q in [0, mu_hat] with pulls * d(mu_hat, q) <= delta.

    For mu_hat = 1 this is exp(-delta/pulls); for mu_hat = 0 it is 0.
    """
    mu_hat, pulls, delta = _check_solver_args(mu_hat, pulls, delta)
    if delta == 0.0 or mu_hat == 0.0:
        return mu_hat
    log = math.log
    if mu_hat == 1.0:
        def dq(q: float) -> float:
            return math.inf if q <= 0.0 else -log(q)
    else:
        base = mu_hat * log(mu_hat) + (1.0 - mu_hat) * log(1.0 - mu_hat)

        def dq(q: float) -> float:
            one_q = 1.0 - q
            if q <= 0.0 or one_q <= 0.0:
                return math.inf
            return base - mu_hat * log(q) - (1.0 - mu_hat) * log(one_q)

    lo, hi = 0.0, mu_hat
    for _ in range(_BISECT_ITERS):
        mid = 0.5 * (lo + hi)
        if pulls * dq(mid) <= delta:
            hi = mid
        else:
            lo = mid
    return hi


def kl_ucb_upper_many(mu_hat: np.ndarray, pulls: np.ndarray, delta: float) -> np.ndarray:
    """Vectorized ``kl_ucb_upper`` over arrays of means and counts.

    Same bisection, run in lockstep across all entries; used by the flat
    KL index policy where one bound per arm is needed every step.
    """
    mu = np.asarray(mu_hat, dtype=float)
    n = np.asarray(pulls, dtype=float)
    if mu.size and (mu.min() < 0.0 or mu.max() > 1.0 or not np.isfinite(mu).all()):
        raise ValueError("mu_hat entries must lie in [0, 1]")
    if n.size and (not np.isfinite(n).all() or n.min() < 1.0):
        raise ValueError("pulls entries must be finite counts >= 1")
    delta = float(delta)
    if not (math.isfinite(delta) and delta >= 0.0):
        raise ValueError(f"delta must be finite and >= 0, got {delta!r}")
    if delta == 0.0:
        return mu.copy()

    one_mu = 1.0 - mu
    with np.errstate(divide="ignore", invalid="ignore"):
        base = np.where(mu > 0.0, mu * np.log(np.maximum(mu, 1e-300)), 0.0) + np.where(
            one_mu > 0.0, one_mu * np.log(np.maximum(one_mu, 1e-300)), 0.0
        )
    lo = mu.copy()
    hi = np.ones_like(mu)
    for _ in range(_BISECT_ITERS):
        mid = 0.5 * (lo + hi)
        one_mid = 1.0 - mid
        with np.errstate(divide="ignore", invalid="ignore"):
            d = base - np.where(mu > 0.0, mu * np.log(mid), 0.0) - np.where(
                one_mu > 0.0, one_mu * np.log(np.maximum(one_mid, 0.0)), 0.0
            )
        feasible = n * d <= delta
        lo = np.where(feasible, mid, lo)
        hi = np.where(feasible, hi, mid)
    return lo
