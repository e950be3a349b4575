"""Double-logarithmic modulus, its divergence certificate, and the
comparison machinery for the two-state stability inequality.

The modulus of continuity at the heart of the twin-state estimate is

    mu(r) = r (1 + ln(1 + 1/r)) (1 + ln(1 + ln(1 + 1/r))),   mu(0) = 0.

It satisfies the Osgood condition int_0^1 dr / mu(r) = infinity, which is
what upgrades the integral inequality

    Phi(t) + gamma int_0^t frakD <= C int_0^t F(s) mu(Phi(s)) ds  (+ Phi(0))

to Phi == 0 (uniqueness) via the comparison lemma.  The slightly stronger
modulus mu_control(r) = r (1 + ln(1 + 1/r))^2 fails the condition and is
kept as a negative control.

Numerics: naive quadrature of dr / mu(r) is hopeless because the divergence
is triple-logarithmic in 1/epsilon; substituting r = e^{-L} gives

    int_eps^1 dr / mu(r) = int_0^{ln(1/eps)} dL / ((1 + A)(1 + ln(1 + A))),
    A(L) = L + log1p(e^{-L}),

a smooth bounded integrand on a short interval, stable down to eps near the
smallest positive double.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Optional, Sequence

import numpy as np
from scipy.integrate import quad, solve_ivp


class OsgoodError(ValueError):
    """Raised for domain violations or quadrature failures."""


def _check_nonnegative(r):
    arr = np.asarray(r, dtype=np.float64)
    if np.any(arr < 0):
        raise OsgoodError("the modulus is defined for nonnegative arguments only")
    return arr


def mu(r):
    """The double-log modulus r (1+ln(1+1/r)) (1+ln(1+ln(1+1/r))); mu(0) = 0.

    Accepts scalars or arrays; stable from 0 and ~1e-300 up to ~1e300.
    """
    arr = _check_nonnegative(r)
    scalar = arr.ndim == 0
    arr = np.atleast_1d(arr)
    out = np.zeros_like(arr)
    pos = arr > 0
    rp = arr[pos]
    a = np.log1p(1.0 / rp)
    b = np.log1p(a)
    out[pos] = rp * (1.0 + a) * (1.0 + b)
    return float(out[0]) if scalar else out


def mu_control(r):
    """The non-Osgood control modulus r (1+ln(1+1/r))^2."""
    arr = _check_nonnegative(r)
    scalar = arr.ndim == 0
    arr = np.atleast_1d(arr)
    out = np.zeros_like(arr)
    pos = arr > 0
    rp = arr[pos]
    a = np.log1p(1.0 / rp)
    out[pos] = rp * (1.0 + a) ** 2
    return float(out[0]) if scalar else out


def _substituted_integrand(modulus):
    """dL-integrand of int dr/modulus(r) under r = e^{-L}, for the built-ins."""
    if modulus is mu:
        def g(big_l):
            a = big_l + math.log1p(math.exp(-big_l))
            return 1.0 / ((1.0 + a) * (1.0 + math.log1p(a)))
    elif modulus is mu_control:
        def g(big_l):
            a = big_l + math.log1p(math.exp(-big_l))
            return 1.0 / (1.0 + a) ** 2
    else:
        def g(big_l):
            r = math.exp(-big_l)
            if r == 0.0:
                raise OsgoodError(
                    "generic modulus: eps below the positive double range"
                )
            return r / modulus(r)
    return g


def osgood_integral(eps, modulus=mu):
    """I(eps) = int_eps^1 dr / modulus(r), by substituted adaptive quadrature."""
    if not 0.0 < eps < 1.0:
        raise OsgoodError(f"eps must lie in (0, 1), got {eps}")
    g = _substituted_integrand(modulus)
    upper = -math.log(eps)
    value, err = quad(g, 0.0, upper, limit=400, epsabs=1e-14, epsrel=1e-12)
    if not math.isfinite(value) or err > 1e-6 * max(1.0, abs(value)):
        raise OsgoodError(f"quadrature failed for eps = {eps}: estimate {err}")
    return float(value)


def osgood_divergence_certificate(eps_list, modulus=mu):
    """Tabulate I(eps) = int_eps^1 dr/modulus(r) along a decreasing eps sweep.

    Returns a dict with the integrals, their increments I(eps_{k+1})-I(eps_k),
    whether the integrals grow strictly, and the number of decades covered.
    A modulus with the Osgood property shows strictly increasing, unbounded
    I as eps drops; a non-Osgood modulus shows increments shrinking toward a
    finite limit.
    """
    eps = [float(e) for e in eps_list]
    if len(eps) < 2:
        raise OsgoodError("need at least two eps values")
    if any(not 0.0 < e < 1.0 for e in eps):
        raise OsgoodError("eps values must lie in (0, 1)")
    if any(b >= a for a, b in zip(eps, eps[1:])):
        raise OsgoodError("eps values must be strictly decreasing")
    integrals = [osgood_integral(e, modulus) for e in eps]
    increments = [b - a for a, b in zip(integrals, integrals[1:])]
    return {
        "eps": eps,
        "integrals": integrals,
        "increments": increments,
        "strictly_increasing": all(inc > 0 for inc in increments),
        "decades": math.log10(eps[0] / eps[-1]),
    }


def comparison_ode(times, f_values, y0, c_fit=1.0, modulus=mu):
    """Solve y' = c_fit * F(t) * modulus(y), y(times[0]) = y0, at the samples.

    F is the piecewise-linear interpolant of (times, f_values).  y0 = 0 is the
    exact fixed point (modulus(0) = 0) and returns zeros without integration.
    Blow-up beyond the double range raises OsgoodError.
    """
    t = np.asarray(times, dtype=np.float64)
    f = np.asarray(f_values, dtype=np.float64)
    if t.ndim != 1 or t.shape != f.shape:
        raise OsgoodError("times and f_values must be 1d arrays of equal length")
    if np.any(np.diff(t) <= 0):
        raise OsgoodError("times must be strictly increasing")
    if np.any(f < 0):
        raise OsgoodError("F must be nonnegative")
    if y0 < 0:
        raise OsgoodError("y0 must be nonnegative")
    if y0 == 0.0:
        return np.zeros_like(t)

    def rhs(s, y):
        yy = max(float(y[0]), 0.0)
        return (c_fit * np.interp(s, t, f) * float(modulus(yy)),)

    sol = solve_ivp(
        rhs,
        (t[0], t[-1]),
        (float(y0),),
        t_eval=t,
        method="DOP853",
        rtol=1e-11,
        atol=max(y0 * 1e-13, 1e-300),
        max_step=(t[-1] - t[0]) / 8.0,
    )
    if not sol.success or not np.all(np.isfinite(sol.y)):
        raise OsgoodError(f"comparison integration failed: {sol.message}")
    return sol.y[0]


@dataclass
class OsgoodTrace:
    """Sampled ingredients of the integral inequality along one experiment."""

    times: Sequence[float]
    phi: Sequence[float]
    f: Sequence[float]
    gamma: float = 1.0 / 6.0
    c_fit: Optional[float] = None

    def __post_init__(self):
        t = np.asarray(self.times, dtype=np.float64)
        p = np.asarray(self.phi, dtype=np.float64)
        f = np.asarray(self.f, dtype=np.float64)
        if not (t.ndim == 1 and t.shape == p.shape == f.shape):
            raise OsgoodError("trace arrays must be 1d and of equal length")
        if np.any(np.diff(t) <= 0):
            raise OsgoodError("trace times must be strictly increasing")
        if np.any(p < 0):
            raise OsgoodError("Phi samples must be nonnegative")
        if not 0.0 < self.gamma < 1.0:
            raise OsgoodError("gamma must lie in (0, 1)")
        self.times = t
        self.phi = p
        self.f = f


def check_master_inequality(trace, frakd, tol=None, c_max=1e12, modulus=mu):
    """Discrete check of Phi(t_m) + gamma * int frakD <= C * int F mu(Phi) + tol.

    Integrals are left-rectangle sums over the trace's time samples.  The
    default tol is Phi(0) (plus a tiny floor), which makes the m = 0 sample
    self-consistent when the two trajectories start apart.  Returns a report
    with the smallest sufficient constant c_fit (clamped below by 1), holds
    (c_fit <= c_max), the largest violation at c_max, and the first violating
    sample index (None when the inequality holds).
    """
    t = trace.times
    p = trace.phi
    f = trace.f
    d = np.asarray(frakd, dtype=np.float64)
    if d.shape != t.shape:
        raise OsgoodError("frakD series must align with the trace samples")
    if np.any(d < 0):
        raise OsgoodError("frakD samples must be nonnegative")
    if tol is None:
        tol = float(p[0]) * (1.0 + 1e-9) + 1e-300
    dt = np.diff(t)
    # left-rectangle cumulative integrals, aligned so entry m covers [t_0, t_m]
    int_d = np.concatenate(([0.0], np.cumsum(dt * d[:-1])))
    int_fmu = np.concatenate(([0.0], np.cumsum(dt * f[:-1] * modulus(p[:-1]))))
    lhs = p + trace.gamma * int_d
    needed = np.ones_like(lhs)
    positive = int_fmu > 0
    needed[positive] = (lhs[positive] - tol) / int_fmu[positive]
    # samples with a zero right side must be covered by tol alone
    uncovered = (~positive) & (lhs > tol)
    c_required = math.inf if np.any(uncovered) else float(max(1.0, np.max(needed)))
    holds = bool(c_required <= c_max)
    c_fit = c_required if holds else float(c_max)
    slack = lhs - (c_fit * int_fmu + tol)
    if holds:
        first = None
        max_violation = 0.0
    else:
        viol = lhs - (c_max * int_fmu + tol)
        bad = np.where(viol > 0)[0]
        first = int(bad[0]) if bad.size else None
        max_violation = float(np.max(viol))
    return {
        "holds": holds,
        "c_fit": c_fit,
        "c_required": c_required,
        "max_violation": max_violation,
        "first_violation_index": first,
        "tol": float(tol),
        "gamma": float(trace.gamma),
        "max_slack": float(np.max(slack)),
    }
