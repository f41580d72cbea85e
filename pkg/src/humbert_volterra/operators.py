"""The Volterra operator with a Humbert kernel and its inverse.

Forward operator, for ``0 < x <= 1``::

    N[v](x) = int_0^x (t/x)^alpha (x-t)^(-2 beta)
              Xi2(alpha, 1-alpha; 1-beta; -(x-t)^2/(4xt), lam (x-t)^2) v(t) dt

Inverse, for ``-1 < 2 beta < 2 alpha <= 0``::

    T[tau](x) = sin(2 beta pi)/(2 beta pi) x^(-2 alpha) d/dx { x^alpha
                int_0^x t^alpha (x-t)^(2 beta)
                F0211(-alpha, 1+alpha; beta-1/2; 1+beta; beta+1/2;
                      -(x-t)^2/(4xt), lam (x-t)^2) tau'(t) dt }

Both integrals are mapped to ``[0, 1]`` and integrated with Gauss-Jacobi
rules carrying the endpoint powers; the outer derivative of ``T`` is a
Richardson-extrapolated central difference.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field

import numpy as np
from scipy.interpolate import CubicSpline

from . import _tables
from .errors import DomainError, RegimeError
from .special import DEFAULT_CONTROL

__all__ = [
    "Regime",
    "Parameters",
    "DegeneracyInput",
    "GridFunction",
    "QuadratureSpec",
    "RoundtripReport",
    "params_from_degeneracy",
    "inverse_kernel_parameters",
    "inversion_prefactor",
    "forward_N",
    "inverse_T",
    "roundtrip_check",
]


class Regime(enum.Enum):
    THEOREM = "TheoremRegime"
    GENERAL = "General"


@dataclass(frozen=True)
class Parameters:
    """Kernel parameters ``alpha``, ``beta`` and the spectral parameter ``lam``.

    ``regime`` is derived: THEOREM iff ``-1 < 2 beta < 2 alpha <= 0``.
    """

    alpha: float
    beta: float
    lam: float = 0.0
    regime: Regime = field(init=False)

    def __post_init__(self):
        ok = -1.0 < 2 * self.beta < 2 * self.alpha <= 0.0
        object.__setattr__(self, "regime", Regime.THEOREM if ok else Regime.GENERAL)

    def require_theorem_regime(self):
        if self.regime is not Regime.THEOREM:
            raise RegimeError(
                f"need -1 < 2*beta < 2*alpha <= 0, got alpha={self.alpha}, beta={self.beta}"
            )

    def with_lam(self, lam):
        return Parameters(self.alpha, self.beta, lam)


@dataclass(frozen=True)
class DegeneracyInput:
    """Degeneracy exponents ``m``, ``n`` and spectral constant ``mu`` of the PDE."""

    m: float
    n: float
    mu: float = 0.0

    @property
    def second_kind(self):
        return -1.0 < self.m < 0.0 and -1.0 < self.n <= 0.0


def params_from_degeneracy(d):
    """Map ``(m, n, mu)`` to ``alpha = n/(2(n+2))``, ``beta = m/(2(m+2))``, ``lam = mu/4``."""
    if d.m <= -1.0 or d.n <= -1.0:
        raise RegimeError("degeneracy exponents must exceed -1")
    alpha = d.n / (2.0 * (d.n + 2.0))
    beta = d.m / (2.0 * (d.m + 2.0))
    if 2 * beta <= -1.0:
        raise RegimeError("2*beta <= -1: kernel not integrable")
    return Parameters(alpha, beta, d.mu / 4.0)


class GridFunction:
    """A function on (0, 1] given by samples or by a callable.

    Sampled functions use a not-a-knot cubic spline for values and
    derivatives.  Callables may carry an exact derivative; otherwise a
    fourth-order central difference with relative step is used.
    """

    PIECEWISE_CUBIC = "PiecewiseCubic"
    CALLBACK = "Callback"

    def __init__(self, nodes=None, values=None, *, func=None, deriv=None):
        if func is not None:
            self.interpolation = self.CALLBACK
            self.nodes = None
            self.values = None
            self._f = func
            self._df = deriv
            return
        nodes = np.asarray(nodes, dtype=float)
        values = np.asarray(values, dtype=float)
        if nodes.ndim != 1 or nodes.shape != values.shape or nodes.size < 4:
            raise ValueError("need matching 1-D nodes and values with at least 4 samples")
        if np.any(np.diff(nodes) <= 0):
            raise ValueError("nodes must be strictly increasing")
        if nodes[0] < 0 or nodes[-1] > 1:
            raise ValueError("nodes must lie in [0, 1]")
        if not np.all(np.isfinite(values)):
            raise ValueError("values must be finite")
        self.interpolation = self.PIECEWISE_CUBIC
        self.nodes = nodes
        self.values = values
        spline = CubicSpline(nodes, values)
        self._f = spline
        self._df = spline.derivative()

    @classmethod
    def from_callable(cls, func, deriv=None):
        return cls(func=func, deriv=deriv)

    @classmethod
    def zero(cls):
        return cls(func=np.zeros_like, deriv=np.zeros_like)

    @classmethod
    def sample(cls, func, nodes):
        nodes = np.asarray(nodes, dtype=float)
        return cls(nodes, func(nodes))

    def __call__(self, x):
        x = np.asarray(x, dtype=float)
        return np.asarray(self._f(x), dtype=float) * np.ones_like(x)

    def derivative(self, x):
        x = np.asarray(x, dtype=float)
        if self._df is not None:
            return np.asarray(self._df(x), dtype=float) * np.ones_like(x)
        h = 1e-4 * np.maximum(np.abs(x), 1e-3)
        f = self._f
        return (-f(x + 2 * h) + 8 * f(x + h) - 8 * f(x - h) + f(x - 2 * h)) / (12 * h)


@dataclass(frozen=True)
class QuadratureSpec:
    """Gauss-Jacobi rule size and endpoint exponents.

    ``None`` exponents select the operator's own default (the known power
    behaviour of its kernel at that endpoint).
    """

    n_nodes: int = 64
    left_exponent: float | None = None
    right_exponent: float | None = None

    def __post_init__(self):
        if self.n_nodes < 1:
            raise ValueError("n_nodes must be positive")
        for e in (self.left_exponent, self.right_exponent):
            if e is not None and e <= -1:
                raise ValueError("endpoint exponents must exceed -1")

    def rule(self, left, right):
        left = left if self.left_exponent is None else self.left_exponent
        right = right if self.right_exponent is None else self.right_exponent
        return (self.n_nodes, float(left), float(right))


DEFAULT_QUADRATURE = QuadratureSpec()


def _as_points(x, lo_open=True):
    arr = np.asarray(x, dtype=float)
    if np.any(arr <= 0) or np.any(arr > 1):
        raise DomainError("evaluation points must lie in (0, 1]")
    return arr


def forward_kernel_expansion(params, rule, y_bound, ctrl):
    a = params.alpha
    return _tables.expansion(a, 1 - a, 1 - params.beta, rule, y_bound, ctrl)


def forward_N(v, x, params, quad=DEFAULT_QUADRATURE, ctrl=DEFAULT_CONTROL):
    """Apply the forward operator to ``v`` at the point(s) ``x``.

    The scaled integrand behaves like ``r^(2 alpha)`` at ``r = 0`` (the
    kernel contributes a second ``r^alpha``) and like ``(1-r)^(-2 beta)`` at
    ``r = 1``; those are the default Gauss-Jacobi exponents.
    """
    x = _as_points(x)
    a, b = params.alpha, params.beta
    rule = quad.rule(2 * a, -2 * b)
    r, wts = _tables.jacobi_rule(*rule)
    kern = forward_kernel_expansion(params, rule, params.lam * np.max(x, initial=0) ** 2, ctrl)
    g = r ** (a - rule[1]) * (1 - r) ** (-2 * b - rule[2])
    X = x[..., None]
    K = kern(params.lam * X**2 * (1 - r) ** 2)
    out = x ** (1 - 2 * b) * np.sum(wts * g * K * v(X * r), axis=-1)
    return out[()] if out.ndim == 0 else out


def inverse_kernel_parameters(alpha, beta, variant="inverting"):
    """Parameters ``(b, c, d, e, g)`` of the F0211 kernel of the inverse.

    ``"inverting"`` uses ``d = beta - 1/2``, ``g = beta + 1/2``; this is the
    choice for which the inverse undoes the forward operator at every
    ``lam``.  ``"transposed"`` exchanges ``d`` and ``g``; it agrees at
    ``lam = 0`` and is kept only for comparison.
    """
    if variant == "inverting":
        d, g = beta - 0.5, beta + 0.5
    elif variant == "transposed":
        d, g = beta + 0.5, beta - 0.5
    else:
        raise ValueError(f"unknown inverse kernel variant {variant!r}")
    return (-alpha, 1 + alpha, d, 1 + beta, g)


def inversion_prefactor(beta):
    """``sin(2 beta pi) / (2 beta pi)``; in (0, 1) for ``2 beta`` in (-1, 0)."""
    z = 2 * beta * math.pi
    return 1.0 if z == 0 else math.sin(z) / z


def inverse_kernel_expansion(params, rule, y_bound, ctrl, variant="inverting"):
    b, c, d, e, g = inverse_kernel_parameters(params.alpha, params.beta, variant)
    return _tables.expansion(b, c, e, rule, y_bound, ctrl, num=d, den=g)


def _inverse_bracket(tau, X, params, quad, ctrl, variant):
    """``x^alpha int_0^x t^alpha (x-t)^(2 beta) K tau'(t) dt`` at points X."""
    a, b = params.alpha, params.beta
    rule = quad.rule(0.0, 2 * b)
    r, wts = _tables.jacobi_rule(*rule)
    kern = inverse_kernel_expansion(params, rule, params.lam * np.max(X) ** 2, ctrl, variant)
    g = r ** (a - rule[1]) * (1 - r) ** (2 * b - rule[2])
    Xe = X[..., None]
    K = kern(params.lam * Xe**2 * (1 - r) ** 2)
    integral = np.sum(wts * g * K * tau.derivative(Xe * r), axis=-1)
    return X ** (1 + 2 * a + 2 * b) * integral


def inverse_T(tau, x, params, quad=DEFAULT_QUADRATURE, ctrl=DEFAULT_CONTROL, dstep=None,
              variant="inverting"):
    """Apply the inverse operator to ``tau`` at the point(s) ``x``.

    ``tau`` supplies ``tau'`` through ``tau.derivative``; it must vanish at
    0.  The outer derivative is a central difference of step ``dstep``
    (default ``1e-3 x``) with one Richardson level.
    """
    params.require_theorem_regime()
    x = _as_points(x)
    h = 1e-3 * x if dstep is None else np.broadcast_to(float(dstep), x.shape)
    if np.any(x - 2 * h <= 0) or np.any(x + 2 * h > 1):
        raise DomainError("difference stencil leaves (0, 1]")
    offsets = np.array([-2.0, -1.0, 1.0, 2.0])
    X = x[..., None] + offsets * h[..., None]
    G = _inverse_bracket(tau, X, params, quad, ctrl, variant)
    d1 = (G[..., 2] - G[..., 1]) / (2 * h)
    d2 = (G[..., 3] - G[..., 0]) / (4 * h)
    deriv = (4 * d1 - d2) / 3
    out = inversion_prefactor(params.beta) * x ** (-2 * params.alpha) * deriv
    return out[()] if out.ndim == 0 else out


@dataclass
class RoundtripReport:
    direction: str
    grid: np.ndarray
    expected: np.ndarray
    recovered: np.ndarray

    @property
    def residuals(self):
        return self.recovered - self.expected

    @property
    def sup_residual(self):
        return float(np.max(np.abs(self.residuals), initial=0.0))


def roundtrip_check(seed, direction, grid, params, quad=DEFAULT_QUADRATURE,
                    ctrl=DEFAULT_CONTROL, dstep=None, variant="inverting"):
    """Check ``T[N[v]] = v`` (``"TN"``) or ``N[T[tau]] = tau`` (``"NT"``) on a grid.

    For TN the derivative of ``N[v]`` comes from the closed-form
    three-integral expansion, so ``seed`` only needs values.  For NT the seed
    must vanish at 0 and should carry its derivative.
    """
    from .kernel import tau_prime_expansion

    params.require_theorem_regime()
    grid = np.asarray(grid, dtype=float)
    if direction == "TN":
        tau = GridFunction.from_callable(
            lambda t: forward_N(seed, t, params, quad, ctrl),
            lambda t: tau_prime_expansion(seed, t, params, quad, ctrl),
        )
        recovered = inverse_T(tau, grid, params, quad, ctrl, dstep, variant)
    elif direction == "NT":
        if abs(float(seed(np.array(0.0)))) > 0:
            raise DomainError("NT seed must vanish at 0")
        v = GridFunction.from_callable(
            lambda t: inverse_T(seed, t, params, quad, ctrl, dstep, variant)
        )
        # with tau'(0) = 0, T[tau] carries a t^(1 + 2 beta) factor at the
        # origin; fold it into the rule.
        nquad = quad
        if quad.left_exponent is None:
            nquad = QuadratureSpec(quad.n_nodes, 2 * params.alpha + 1 + 2 * params.beta,
                                   quad.right_exponent)
        recovered = forward_N(v, grid, params, nquad, ctrl)
    else:
        raise ValueError("direction must be 'TN' or 'NT'")
    return RoundtripReport(direction, grid, np.asarray(seed(grid), dtype=float),
                           np.asarray(recovered, dtype=float))
