"""The composed kernel ``W(x, s; lam)`` of ``T o N`` and its series expansion.

Substituting the derivative of ``N[v]`` into the inverse gives

    T[N[v]](x) = x^(-2 alpha) d/dx { x^alpha int_0^x W(x, s; lam) s^alpha v(s) ds }

and the inversion holds exactly when ``W(x, s; lam) = (1 - z)^alpha`` with
``z = (x - s)/x``.  Expanding both kernels in their double series and
integrating term by term gives, with ``X = 4 lam (x - s)^2``,

    W = sum_{k,n} (beta-1/2)_k (1/2-beta)_n / (k! n!) Omega(k, n; z) X^(k+n)
      = sum_K Omega1(K; z) X^K

    Omega(k, n; z) = sum_{p,q} (-1)^(p+q) (-alpha)_p (1+alpha)_p (1/2+beta+k)_p
                     (alpha)_q (1-alpha)_q (1/2-beta+n)_q
                     z^(2p+2q) (1-z)^(-q) E(k, n; p, q; z)
                     / (p! q! (1+2k+2n+2p+2q)!)

    E = (-alpha-2beta+2n+q) z F(2+2k+2n+2p+2q; z)
        + (1+2k+2n+2p+2q) (1-z) F(1+2k+2n+2p+2q; z)
    F(d; z) = 2F1(1+2beta+2k+2p, 1+p+q; d; z)

The double series in ``(p, q)`` converges for ``z^2 < 4 (1 - z)``, i.e.
``z < 2 sqrt(2) - 2``.  :func:`w_kernel_composition` evaluates ``W`` directly
as the composition integral and does not depend on the expansion.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from functools import lru_cache

import numpy as np
from scipy import special as sc

from . import _tables
from .errors import DomainError, NotConverged
from .operators import (
    DEFAULT_QUADRATURE,
    inverse_kernel_parameters,
    inversion_prefactor,
)
from .special import (
    DEFAULT_CONTROL,
    _hyp2f1,
    f0211_array,
    gauss_2f1,
    humbert_xi2_array,
    pochhammer,
)

__all__ = [
    "KernelSample",
    "LemmaReport",
    "SERIES_Z_LIMIT",
    "gauss_F_dz",
    "E_term",
    "omega",
    "omega1",
    "omega_table",
    "w_kernel",
    "w_kernel_composition",
    "verify_lemma",
    "tau_prime_expansion",
]

SERIES_Z_LIMIT = 2 * math.sqrt(2) - 2


def _check_z(z):
    if not 0.0 < z < 1.0:
        raise DomainError(f"z must lie in (0, 1), got {z}")


def gauss_F_dz(k, p, q, dpar, z, params, ctrl=DEFAULT_CONTROL):
    """``2F1(1 + 2 beta + 2k + 2p, 1 + p + q; dpar; z)``."""
    if z != 0.0:
        _check_z(z)
    b = params.beta
    return gauss_2f1(1 + 2 * b + 2 * k + 2 * p, 1 + p + q, dpar, z, ctrl).value


def E_term(k, n, p, q, z, params, ctrl=DEFAULT_CONTROL):
    """The bracket ``E(k, n; p, q; z)`` multiplying each Omega term."""
    a, b = params.alpha, params.beta
    big = 1 + 2 * k + 2 * n + 2 * p + 2 * q
    first = (-a - 2 * b + 2 * n + q) * z * gauss_F_dz(k, p, q, big + 1, z, params, ctrl)
    second = big * (1 - z) * gauss_F_dz(k, p, q, big, z, params, ctrl)
    return first + second


def _log_poch_cumulative(starts, count):
    """log|(s)_p| and sign for p = 0..count-1, one row per start value."""
    starts = np.atleast_1d(np.asarray(starts, dtype=float))
    factors = starts[:, None] + np.arange(count - 1)[None, :]
    zero = factors == 0
    logs = np.log(np.abs(np.where(zero, 1.0, factors)))
    logmag = np.concatenate([np.zeros((starts.size, 1)), np.cumsum(logs, axis=1)], axis=1)
    signs = np.concatenate(
        [np.ones((starts.size, 1)), np.cumprod(np.sign(np.where(zero, 1.0, factors)), axis=1)],
        axis=1,
    )
    is_zero = np.concatenate(
        [np.zeros((starts.size, 1), dtype=bool), np.cumsum(zero, axis=1) > 0], axis=1
    )
    return logmag, np.where(is_zero, 0.0, signs)


def _omega_block(ks, ns, z, alpha, beta, P, Q, ctrl):
    """Terms of Omega(k, n; z) for paired arrays ks, ns over p < P, q < Q."""
    ks = np.asarray(ks)[:, None, None]
    ns = np.asarray(ns)[:, None, None]
    p = np.arange(P)[None, :, None]
    q = np.arange(Q)[None, None, :]

    lp_a, sp_a = _log_poch_cumulative([-alpha, 1 + alpha], P)
    lq_a, sq_a = _log_poch_cumulative([alpha, 1 - alpha], Q)
    uk = np.unique(ks)
    un = np.unique(ns)
    lk, sk = _log_poch_cumulative(0.5 + beta + uk, P)
    ln_, sn = _log_poch_cumulative(0.5 - beta + un, Q)
    kidx = np.searchsorted(uk, ks[:, 0, 0])
    nidx = np.searchsorted(un, ns[:, 0, 0])

    logp = lp_a.sum(0) - sc.gammaln(np.arange(P) + 1.0)
    logq = lq_a.sum(0) - sc.gammaln(np.arange(Q) + 1.0)
    sign_p = sp_a.prod(0)
    sign_q = sq_a.prod(0)

    K = ks + ns + p + q
    big = 1 + 2 * K
    log_mag = (
        logp[None, :, None]
        + lk[kidx][:, :, None]
        + logq[None, None, :]
        + ln_[nidx][:, None, :]
        + (2 * p + 2 * q) * math.log(z)
        - q * math.log1p(-z)
        - sc.gammaln(big + 1.0)
    )
    sign = (
        (-1.0) ** (p + q)
        * sign_p[None, :, None]
        * sk[kidx][:, :, None]
        * sign_q[None, None, :]
        * sn[nidx][:, None, :]
    )
    coef = sign * np.exp(log_mag)

    a_par = 1 + 2 * beta + 2 * ks + 2 * p
    b_par = 1 + p + q
    shape = np.broadcast_shapes(a_par.shape, b_par.shape, big.shape)
    live = np.broadcast_to(coef != 0, shape)
    E = np.zeros(shape)
    if live.any():
        A = np.broadcast_to(a_par, shape)[live]
        B = np.broadcast_to(b_par, shape)[live].astype(float)
        D = np.broadcast_to(big, shape)[live].astype(float)
        f2, _, _, ok2 = _hyp2f1(A, B, D + 1, z, ctrl.rel_tol, ctrl.abs_tol, ctrl.max_inner_terms)
        f1, _, _, ok1 = _hyp2f1(A, B, D, z, ctrl.rel_tol, ctrl.abs_tol, ctrl.max_inner_terms)
        if not (ok1.all() and ok2.all()):
            raise NotConverged("Gauss factor inside Omega did not converge")
        lead = np.broadcast_to(-alpha - 2 * beta + 2 * ns + q, shape)[live]
        E[live] = lead * z * f2 + D * (1 - z) * f1
    return coef * E


@dataclass(frozen=True)
class OmegaTable:
    """Omega(k, n; z) for k + n <= k_max with the magnitudes of their terms."""

    z: float
    k_max: int
    values: np.ndarray  # values[k, n], nan where k + n > k_max
    abs_sums: np.ndarray
    p_terms: int
    q_terms: int
    converged: bool


@lru_cache(maxsize=512)
def _omega_table_cached(z, alpha, beta, k_max, ctrl):
    pairs = [(k, n) for k in range(k_max + 1) for n in range(k_max + 1 - k)]
    ks = np.array([k for k, _ in pairs])
    ns = np.array([n for _, n in pairs])
    P = Q = 16
    converged = False
    while True:
        terms = _omega_block(ks, ns, z, alpha, beta, P, Q, ctrl)
        total = terms.sum(axis=(1, 2))
        mags = np.abs(terms)
        bound = ctrl.rel_tol * np.abs(total)[:, None] + ctrl.abs_tol
        # three-consecutive rule on the outer rows and columns
        p_tail = np.all(mags[:, -3:, :].max(axis=2) <= bound)
        q_tail = np.all(mags[:, :, -3:].max(axis=1) <= bound)
        if p_tail and q_tail:
            converged = True
            break
        if max(P, Q) >= ctrl.max_outer_terms:
            break
        P = P * 2 if not p_tail else P
        Q = Q * 2 if not q_tail else Q
        P = min(P, ctrl.max_outer_terms)
        Q = min(Q, ctrl.max_outer_terms)
    values = np.full((k_max + 1, k_max + 1), np.nan)
    abs_sums = np.full((k_max + 1, k_max + 1), np.nan)
    values[ks, ns] = total
    abs_sums[ks, ns] = mags.sum(axis=(1, 2))
    values.setflags(write=False)
    abs_sums.setflags(write=False)
    return OmegaTable(z, k_max, values, abs_sums, P, Q, converged)


def omega_table(z, params, k_max=12, ctrl=DEFAULT_CONTROL, strict=True):
    """All ``Omega(k, n; z)`` with ``k + n <= k_max``, sharing one truncation."""
    _check_z(z)
    if z >= SERIES_Z_LIMIT:
        raise DomainError(f"the Omega series diverges for z >= {SERIES_Z_LIMIT:.6f}")
    tab = _omega_table_cached(float(z), float(params.alpha), float(params.beta), int(k_max), ctrl)
    if strict and not tab.converged:
        raise NotConverged(f"Omega series did not converge at z={z}", tab)
    return tab


def omega(k, n, z, params, ctrl=DEFAULT_CONTROL):
    """``Omega(k, n; z)``."""
    return float(omega_table(z, params, k + n, ctrl).values[k, n])


def _omega1_weights(K, beta):
    n = np.arange(K + 1)
    return np.array(
        [pochhammer(beta - 0.5, K - j) * pochhammer(0.5 - beta, j)
         / (math.factorial(j) * math.factorial(K - j)) for j in n]
    )


def _omega1_from_table(tab, K, beta):
    n = np.arange(K + 1)
    w = _omega1_weights(K, beta)
    vals = tab.values[K - n, n]
    mags = tab.abs_sums[K - n, n]
    return float(np.sum(w * vals)), float(np.sum(np.abs(w) * mags))


def omega1(k, z, params, ctrl=DEFAULT_CONTROL):
    """``Omega1(k; z) = sum_n (beta-1/2)_{k-n} (1/2-beta)_n Omega(k-n, n; z) / (n! (k-n)!)``.

    This is the coefficient of ``(4 lam (x-s)^2)^k`` in ``W``; it vanishes
    for every ``k >= 1``.
    """
    tab = omega_table(z, params, k, ctrl)
    return _omega1_from_table(tab, k, params.beta)[0]


def omega1_with_scale(k, z, params, ctrl=DEFAULT_CONTROL):
    """``(Omega1(k; z), sum of |terms|)``; the second is the cancellation scale."""
    tab = omega_table(z, params, k, ctrl)
    return _omega1_from_table(tab, k, params.beta)


@dataclass(frozen=True)
class KernelValue:
    value: float
    abs_sum: float
    tail: float

    @property
    def condition(self):
        return self.abs_sum / abs(self.value) if self.value != 0 else math.inf


def _w_series(x, s, lam, params, ctrl, k_max):
    if not 0.0 < s < x < 1.0:
        raise DomainError("need 0 < s < x < 1")
    z = (x - s) / x
    tab = omega_table(z, params, k_max, ctrl)
    X = 4.0 * lam * (x - s) ** 2
    total = 0.0
    scale = 0.0
    last = 0.0
    for K in range(k_max + 1):
        val, mag = _omega1_from_table(tab, K, params.beta)
        # |X|^K / (2K+1)! factors are folded into Omega; this power stays O(1)
        # until X is very large.
        powx = X**K
        total += val * powx
        scale += mag * abs(powx)
        last = mag * abs(powx)
    return KernelValue(total, scale, last)


def w_kernel(x, s, lam, params, ctrl=DEFAULT_CONTROL, k_max=12):
    """Series value of the composed kernel ``W(x, s; lam)``, truncated at ``k_max``."""
    return _w_series(x, s, lam, params, ctrl, k_max).value


def w_kernel_composition(x, s, lam, params, quad=DEFAULT_QUADRATURE, ctrl=DEFAULT_CONTROL,
                         variant="inverting"):
    """``W(x, s; lam)`` as the composition integral over ``s < t < x``.

    ``W = c int_s^x t^alpha (x-t)^(2 beta) K_T(x, t) M(t, s) dt`` where
    ``K_T`` is the inverse kernel and ``M`` the kernel of ``d/dt N[v](t)``.
    After ``t = s + (x - s) rho`` the endpoint powers are
    ``rho^(-2 beta - 1)`` and ``(1 - rho)^(2 beta)``.
    """
    if not 0.0 < s < x <= 1.0:
        raise DomainError("need 0 < s < x <= 1")
    a, b = params.alpha, params.beta
    rho, wts = _tables.jacobi_rule(quad.n_nodes, -2 * b - 1, 2 * b)
    t = s + (x - s) * rho
    bt, ct, dt, et, gt = inverse_kernel_parameters(a, b, variant)
    kt = f0211_array(bt, ct, dt, et, gt, -((x - t) ** 2) / (4 * x * t), lam * (x - t) ** 2, ctrl)
    u = -((t - s) ** 2) / (4 * t * s)
    w = lam * (t - s) ** 2
    xi = humbert_xi2_array(a, 1 - a, -b, u, w, ctrl)
    ff = f0211_array(a, 1 - a, 1 - a - b, 1 - b, -a - b, u, w, ctrl)
    bracket = -b * (t - s) * xi - 2 * b * s * xi - (a + b) * (t - s) * ff
    return inversion_prefactor(b) * float(np.sum(wts * kt * bracket / t))


@dataclass
class KernelSample:
    """One evaluation of ``W`` against its closed form ``(1 - z)^alpha``."""

    x: float
    s: float
    lam: float
    w_value: float
    target: float
    abs_err: float
    condition: float
    tolerance: float
    passed: bool

    @property
    def z(self):
        return (self.x - self.s) / self.x


@dataclass
class LemmaReport:
    alpha: float
    beta: float
    samples: list = field(default_factory=list)

    @property
    def max_abs_err(self):
        return max((smp.abs_err for smp in self.samples), default=0.0)

    @property
    def passed(self):
        return all(smp.passed for smp in self.samples)


def verify_lemma(params, samples, ctrl=DEFAULT_CONTROL, k_max=12, tol=1e-6, tol_zero_lam=1e-8):
    """Evaluate ``W`` at each ``(x, s, lam)`` and compare with ``(1 - z)^alpha``.

    The pass tolerance of a sample is ``tol`` (``tol_zero_lam`` at
    ``lam = 0``) multiplied by ``max(1, condition)``, where ``condition`` is
    the sum of absolute terms over ``|W|``.  A failing sample is recorded and
    the batch continues.
    """
    report = LemmaReport(params.alpha, params.beta)
    for x, s, lam in samples:
        target = (s / x) ** params.alpha
        base = tol_zero_lam if lam == 0 else tol
        try:
            kv = _w_series(x, s, lam, params, ctrl, k_max)
        except (NotConverged, DomainError):
            report.samples.append(
                KernelSample(x, s, lam, math.nan, target, math.inf, math.inf, base, False)
            )
            continue
        err = abs(kv.value - target)
        cond = kv.condition
        tolerance = base * max(1.0, cond)
        report.samples.append(
            KernelSample(x, s, lam, kv.value, target, err, cond, tolerance, err < tolerance)
        )
    return report


def tau_prime_expansion(v, t, params, quad=DEFAULT_QUADRATURE, ctrl=DEFAULT_CONTROL):
    """Closed-form derivative of ``tau = N[v]`` at ``t`` (scalar or array).

    With ``u = -(t-s)^2/(4ts)`` and ``w = lam (t-s)^2``::

        tau'(t) = t^(-alpha-1) int_0^t [ -beta (t-s)^(-2beta) Xi2(alpha, 1-alpha; -beta; u, w)
                  - 2 beta s (t-s)^(-2beta-1) Xi2(alpha, 1-alpha; -beta; u, w)
                  - (alpha+beta) (t-s)^(-2beta)
                    F0211(alpha, 1-alpha; 1-alpha-beta; 1-beta; -alpha-beta; u, w) ] s^alpha v(s) ds

    Only values of ``v`` are needed.
    """
    t = np.asarray(t, dtype=float)
    if np.any(t <= 0) or np.any(t > 1):
        raise DomainError("t must lie in (0, 1]")
    a, b, lam = params.alpha, params.beta, params.lam
    rule = quad.rule(2 * a, -2 * b - 1)
    r, wts = _tables.jacobi_rule(*rule)
    ybound = lam * np.max(t, initial=0) ** 2
    xi = _tables.expansion(a, 1 - a, -b, rule, ybound, ctrl)
    ff = _tables.expansion(a, 1 - a, 1 - b, rule, ybound, ctrl, num=1 - a - b, den=-a - b)
    T = t[..., None]
    w = lam * T**2 * (1 - r) ** 2
    xiv = xi(w)
    bracket = -b * (1 - r) * xiv - 2 * b * r * xiv - (a + b) * (1 - r) * ff(w)
    g = r ** (a - rule[1]) * (1 - r) ** (-2 * b - 1 - rule[2])
    out = t ** (-2 * b) * np.sum(wts * g * bracket * v(T * r), axis=-1)
    return out[()] if out.ndim == 0 else out
