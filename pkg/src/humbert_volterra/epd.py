"""Cauchy and Cauchy-Goursat problems for a degenerate Euler-Poisson-Darboux equation.

In characteristic coordinates the equation reads

    u_xi_eta + alpha/(eta+xi) (u_eta + u_xi) - beta/(eta-xi) (u_eta - u_xi) + lam u = 0

on the triangle ``0 <= xi <= eta <= 1``.  Both solution formulas share one
evaluator::

    u(xi, eta) = ((eta+xi)/2)^(-alpha) [ int_0^xi (eta-t)^(-beta) (xi-t)^(-beta) t^alpha K A(t) dt
                                       + int_xi^eta (eta-t)^(-beta) (t-xi)^(-beta) t^alpha K B(t) dt ]

with ``K = Xi2(alpha, 1-alpha; 1-beta; sigma, rho)``,
``sigma = (eta-t)(t-xi)/(2t(eta+xi))`` and ``rho = lam (eta-t)(t-xi)``.  The
Cauchy problem takes ``A = T`` and ``B = T/(2 cos beta pi) - gamma2 nu``; the
Cauchy-Goursat problem takes ``A = Psi`` and ``B = Phi``.

On the diagonal the first integral becomes the forward operator with the
spectral parameter ``-lam``, so the density is recovered by the inverse
operator with ``-lam``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from scipy.special import gamma, roots_legendre

from . import _tables
from .errors import DomainError, StencilOutOfDomain
from .operators import (
    DEFAULT_QUADRATURE,
    GridFunction,
    forward_N,
    inverse_T,
)
from .special import DEFAULT_CONTROL, humbert_xi2_array

__all__ = [
    "CauchyData",
    "GoursatData",
    "CharPoint",
    "CauchyCheck",
    "char_coords",
    "char_coords_inverse",
    "gamma2",
    "use_site_tau",
    "cauchy_solution",
    "goursat_solution",
    "solution_integrals",
    "recover_T_from_tau",
    "fundamental_relation",
    "pde9_residual",
    "verify_cauchy_data",
]


@dataclass(frozen=True)
class CharPoint:
    xi: float
    eta: float

    @property
    def inside(self):
        return 0.0 <= self.xi <= self.eta <= 1.0


def char_coords(x, y, m, n):
    """Map ``(x, y)`` with ``x >= 0, y <= 0`` to characteristic coordinates.

    ``xi = A - B`` and ``eta = A + B`` with ``A = 2/(n+2) x^((n+2)/2)`` and
    ``B = 2/(m+2) (-y)^((m+2)/2)``.  Points with ``xi < 0`` are returned as
    they are; check :attr:`CharPoint.inside`.
    """
    if x < 0 or y > 0:
        raise DomainError("need x >= 0 and y <= 0")
    a = 2.0 / (n + 2.0) * x ** ((n + 2.0) / 2.0)
    b = 2.0 / (m + 2.0) * (-y) ** ((m + 2.0) / 2.0)
    return CharPoint(a - b, a + b)


def char_coords_inverse(p, m, n):
    """Inverse of :func:`char_coords` on ``eta >= xi``, ``eta + xi >= 0``."""
    a = 0.5 * (p.eta + p.xi)
    b = 0.5 * (p.eta - p.xi)
    if b < 0 or a < 0:
        raise DomainError("need eta >= xi and eta + xi >= 0")
    x = (0.5 * (n + 2.0) * a) ** (2.0 / (n + 2.0))
    y = -((0.5 * (m + 2.0) * b) ** (2.0 / (m + 2.0)))
    return x, y


def gamma2(beta):
    """``[2(1-2beta)]^(2beta-1) Gamma(2-2beta) / Gamma(1-beta)``."""
    if not -0.5 < beta < 0.0:
        raise DomainError("beta must lie in (-1/2, 0)")
    return (2 * (1 - 2 * beta)) ** (2 * beta - 1) * gamma(2 - 2 * beta) / gamma(1 - beta)


@dataclass
class CauchyData:
    """Data on the diagonal: ``u(x, x) = tau(x)`` and the weighted normal derivative ``nu``."""

    tau: GridFunction
    nu: GridFunction
    T: GridFunction | None = None


@dataclass
class GoursatData:
    """Data for the Cauchy-Goursat problem; ``Psi = 2 gamma2 cos(beta pi) nu + Phi``."""

    phi: GridFunction
    nu: GridFunction
    Phi: GridFunction
    beta: float
    Psi: GridFunction = field(init=False)

    def __post_init__(self):
        c = 2 * gamma2(self.beta) * math.cos(self.beta * math.pi)
        nu, Phi = self.nu, self.Phi
        self.Psi = GridFunction.from_callable(lambda t: c * nu(t) + Phi(t))


def _legendre(n):
    x, w = roots_legendre(n)
    return 0.5 * (1 + x), 0.5 * w


def _kernel(t, xi, eta, params, ctrl):
    sigma = (eta - t) * (t - xi) / (2 * t * (eta + xi))
    rho = params.lam * (eta - t) * (t - xi)
    a = params.alpha
    return humbert_xi2_array(a, 1 - a, 1 - params.beta, sigma, rho, ctrl)


def _lower_integral(f, xi, eta, params, quad, ctrl):
    """``int_0^xi (eta-t)^(-beta) (xi-t)^(-beta) t^alpha K f(t) dt``.

    The interval is cut into panels that halve towards ``t = xi`` until
    they are comparable with ``eta - xi``, so the nearby singularity of
    ``(eta - t)^(-beta)`` stays resolved.
    """
    if xi <= 0:
        return 0.0
    a, b = params.alpha, params.beta
    n = quad.n_nodes
    eps = eta - xi
    cuts = [xi]
    while cuts[-1] > 4 * eps and cuts[-1] > 1e-12 * xi and len(cuts) < 60:
        cuts.append(cuts[-1] / 2)
    # panel lengths measured back from xi: [0, xi - L1], ..., [xi - L_J, xi]
    lengths = cuts[1:]
    ts, ws = [], []
    if not lengths:
        r, w = _tables.jacobi_rule(n, 2 * a, -b)
        t = xi * r
        ts.append(t)
        ws.append(xi * w * r ** (a - 2 * a) * (eta - t) ** (-b) * xi ** (a - b))
    else:
        # [0, xi - L1] with the t^(2 alpha) weight at the origin
        left = xi - lengths[0]
        r, w = _tables.jacobi_rule(n, 2 * a, 0.0)
        t = left * r
        ts.append(t)
        ws.append(left * w * r ** (-a) * left**a * (eta - t) ** (-b) * (xi - t) ** (-b))
        xg, wg = _legendre(max(16, n // 2))
        for lo, hi in zip(lengths[:-1], lengths[1:]):
            t = xi - lo + (lo - hi) * xg
            ts.append(t)
            ws.append((lo - hi) * wg * t**a * (eta - t) ** (-b) * (xi - t) ** (-b))
        last = lengths[-1]
        r, w = _tables.jacobi_rule(n, 0.0, -b)
        t = xi - last + last * r
        ts.append(t)
        ws.append(last * w * last ** (-b) * t**a * (eta - t) ** (-b))
    t = np.concatenate(ts)
    wt = np.concatenate(ws)
    return float(np.sum(wt * _kernel(t, xi, eta, params, ctrl) * f(t)))


def _upper_integral(f, xi, eta, params, quad, ctrl):
    """``int_xi^eta (eta-t)^(-beta) (t-xi)^(-beta) t^alpha K f(t) dt``."""
    eps = eta - xi
    if eps <= 0:
        return 0.0
    a, b = params.alpha, params.beta
    if xi == 0:
        r, w = _tables.jacobi_rule(quad.n_nodes, a - b, -b)
        t = eta * r
        wt = eta ** (1 + a - 2 * b) * w
    else:
        r, w = _tables.jacobi_rule(quad.n_nodes, -b, -b)
        t = xi + eps * r
        wt = eps ** (1 - 2 * b) * w * t**a
    return float(np.sum(wt * _kernel(t, xi, eta, params, ctrl) * f(t)))


def solution_integrals(lower, upper, p, params, quad=DEFAULT_QUADRATURE, ctrl=DEFAULT_CONTROL):
    """The shared two-integral evaluator with densities ``lower`` and ``upper``."""
    if not p.inside:
        raise DomainError(f"point {p} lies outside the triangle 0 <= xi <= eta <= 1")
    if p.eta == 0:
        return 0.0
    scale = (0.5 * (p.eta + p.xi)) ** (-params.alpha)
    first = _lower_integral(lower, p.xi, p.eta, params, quad, ctrl)
    second = _upper_integral(upper, p.xi, p.eta, params, quad, ctrl)
    return scale * (first + second)


def _cauchy_upper(data, params):
    c1 = 1.0 / (2 * math.cos(params.beta * math.pi))
    c2 = gamma2(params.beta)
    T, nu = data.T, data.nu
    return lambda t: c1 * T(t) - c2 * nu(t)


def cauchy_solution(p, data, params, quad=DEFAULT_QUADRATURE, ctrl=DEFAULT_CONTROL):
    """Solution of the Cauchy problem at ``p``; ``data.T`` must be present."""
    params.require_theorem_regime()
    if data.T is None:
        raise ValueError("CauchyData.T is missing; recover it with recover_T_from_tau")
    return solution_integrals(data.T, _cauchy_upper(data, params), p, params, quad, ctrl)


def goursat_solution(p, data, params, quad=DEFAULT_QUADRATURE, ctrl=DEFAULT_CONTROL):
    """Solution of the Cauchy-Goursat problem at ``p``."""
    params.require_theorem_regime()
    return solution_integrals(data.Psi, data.Phi, p, params, quad, ctrl)


def use_site_tau(T, params, quad=DEFAULT_QUADRATURE, ctrl=DEFAULT_CONTROL):
    """``tau(x) = u(x, x)`` for density ``T``: the forward operator at ``-lam``.

    The derivative comes from the closed-form expansion.
    """
    from .kernel import tau_prime_expansion

    flipped = params.with_lam(-params.lam)
    return GridFunction.from_callable(
        lambda x: forward_N(T, x, flipped, quad, ctrl),
        lambda x: tau_prime_expansion(T, x, flipped, quad, ctrl),
    )


def recover_T_from_tau(tau, params, quad=DEFAULT_QUADRATURE, ctrl=DEFAULT_CONTROL, dstep=None,
                       grid=None):
    """Density ``T`` with ``u(x, x) = tau(x)``: the inverse operator at ``-lam``.

    With ``grid`` the result is sampled there and splined; otherwise it is
    evaluated on demand.
    """
    params.require_theorem_regime()
    flipped = params.with_lam(-params.lam)
    if grid is None:
        return GridFunction.from_callable(lambda x: inverse_T(tau, x, flipped, quad, ctrl, dstep))
    grid = np.asarray(grid, dtype=float)
    return GridFunction(grid, inverse_T(tau, grid, flipped, quad, ctrl, dstep))


def fundamental_relation(tau, params, quad=DEFAULT_QUADRATURE, ctrl=DEFAULT_CONTROL, dstep=None,
                         grid=None):
    """``nu`` on the degeneration line from ``tau`` when ``u(0, eta) = 0``.

    Then ``Phi = 0`` and ``tau`` is the forward transform (at ``-lam``) of
    ``Psi = 2 gamma2 cos(beta pi) nu``.
    """
    psi = recover_T_from_tau(tau, params, quad, ctrl, dstep, grid)
    c = 1.0 / (2 * gamma2(params.beta) * math.cos(params.beta * math.pi))
    if grid is None:
        return GridFunction.from_callable(lambda x: c * psi(x))
    return GridFunction(psi.nodes, c * psi.values)


def pde9_residual(u_eval, p, params, h):
    """Finite-difference residual of the equation at ``p`` with step ``h``."""
    xi, eta = p.xi, p.eta
    if xi - h < 0 or eta + h > 1 or xi + h > eta - h:
        raise StencilOutOfDomain(f"stencil of half-width {h} leaves the triangle at {p}")

    def u(dx, de):
        return u_eval(CharPoint(xi + dx * h, eta + de * h))

    u0 = u(0, 0)
    u_xi = (u(1, 0) - u(-1, 0)) / (2 * h)
    u_eta = (u(0, 1) - u(0, -1)) / (2 * h)
    u_xe = (u(1, 1) - u(1, -1) - u(-1, 1) + u(-1, -1)) / (4 * h * h)
    a, b = params.alpha, params.beta
    return (u_xe + a / (eta + xi) * (u_eta + u_xi) - b / (eta - xi) * (u_eta - u_xi)
            + params.lam * u0)


def _extrapolate(eps, values, exponents):
    """Fit ``L + sum c_j eps^p_j`` through the samples and return ``L``."""
    eps = np.asarray(eps, dtype=float)
    cols = [np.ones_like(eps)] + [eps**q for q in exponents[: len(eps) - 1]]
    A = np.stack(cols, axis=1)
    coef, *_ = np.linalg.lstsq(A, np.asarray(values, dtype=float), rcond=None)
    return float(coef[0])


@dataclass
class CauchyCheck:
    """Boundary-condition check at one ``xi``."""

    xi: float
    tau: float
    u_limit: float
    nu: float
    nu_limit: float

    @property
    def tau_deviation(self):
        return abs(self.u_limit - self.tau)

    @property
    def nu_deviation(self):
        return abs(self.nu_limit - self.nu)

    @property
    def nu_ratio(self):
        return self.nu_limit / self.nu if self.nu != 0 else math.nan


DEFAULT_EPS = (1e-2, 10**-2.5, 1e-3)


def verify_cauchy_data(data, params, quad=DEFAULT_QUADRATURE, ctrl=DEFAULT_CONTROL,
                       eps_list=DEFAULT_EPS, xi_grid=(0.25, 0.5, 0.75), u_data=None):
    """Check the diagonal conditions of the Cauchy solution.

    ``u(xi, xi + eps)`` is extrapolated to ``eps = 0`` and compared with
    ``tau``.  ``[2(1-2beta)]^(-2beta) eps^(2beta) (u_eta - u_xi)`` is
    extrapolated likewise and compared with ``nu``; the derivative is taken
    along ``(-1, 1)`` with a step far below ``eps``.  The solution is built
    from ``u_data`` (default ``data``) so perturbed reference data can be
    compared against an unperturbed solution.
    """
    u_data = data if u_data is None else u_data
    b = params.beta
    eps = np.sort(np.asarray(eps_list, dtype=float))[::-1]
    const = (2 * (1 - 2 * b)) ** (-2 * b)
    checks = []
    for xi in xi_grid:
        vals10, vals11 = [], []
        for e in eps:
            eta = xi + e
            vals10.append(cauchy_solution(CharPoint(xi, eta), u_data, params, quad, ctrl))
            d = 1e-3 * e
            up = cauchy_solution(CharPoint(xi - d, eta + d), u_data, params, quad, ctrl)
            dn = cauchy_solution(CharPoint(xi + d, eta - d), u_data, params, quad, ctrl)
            vals11.append(const * e ** (2 * b) * (up - dn) / (2 * d))
        u_lim = _extrapolate(eps, vals10, [1.0, 1 - 2 * b])
        nu_lim = _extrapolate(eps, vals11, [1 + 2 * b, 1.0])
        checks.append(CauchyCheck(xi, float(data.tau(xi)), u_lim, float(data.nu(xi)), nu_lim))
    return checks
