"""Pochhammer symbols, the Gauss function and two confluent double series.

The two-variable functions are

    Xi2(a, b; d; u, w)        = sum_{m,n} (a)_m (b)_m u^m w^n / (m! n! (d)_{m+n})
    F0211(b, c, d; e; g; x, y) = sum_{m,n} (b)_m (c)_m (d)_n x^m y^n
                                  / ((e)_{m+n} (g)_n m! n!)

Both are summed row by row over ``n`` using ``(e)_{m+n} = (e)_n (e+n)_m``, so
each row is a Gauss function ``2F1(., .; e+n; x)``.  The Pfaff transformation
continues those rows to every ``x < 1``; the raw double series only converges
for ``|x| < 1``.
"""

from __future__ import annotations

import enum
import math
import operator
from dataclasses import dataclass

import numpy as np
from scipy import special as sc

from .errors import DomainError, NotConverged, PoleParameter

__all__ = [
    "SeriesControl",
    "HypergeomValue",
    "DEFAULT_CONTROL",
    "TIGHT_CONTROL",
    "Convergence",
    "RowExpansion",
    "pochhammer",
    "gauss_2f1",
    "gauss_2f1_array",
    "humbert_xi2",
    "humbert_xi2_array",
    "f0211",
    "f0211_array",
    "convergence_classification",
    "xi2_system_residual",
    "f0211_system_residual",
]

# Above this argument the Gauss series is replaced by the 1 - z connection
# formula; the direct series needs O(1 / (1 - z)) terms there.
_CONNECTION_THRESHOLD = 0.9
# c - a - b closer than this to an integer makes the connection formula
# cancel catastrophically; such points stay on the direct series.
_NEAR_INTEGER = 1e-3
_EPS = float(np.finfo(float).eps)
_POCHHAMMER_PRODUCT_LIMIT = 64


@dataclass(frozen=True)
class SeriesControl:
    """Truncation policy shared by every series engine.

    Parameters
    ----------
    rel_tol, abs_tol : float
        A series stops once three consecutive tail estimates fall below
        ``rel_tol * |partial sum| + abs_tol``.
    max_outer_terms : int
        Cap on rows of a two-variable series.
    max_inner_terms : int
        Cap on terms of each Gauss series.
    """

    rel_tol: float = 1e-12
    abs_tol: float = 1e-300
    max_outer_terms: int = 10_000
    max_inner_terms: int = 10_000

    def __post_init__(self):
        if not (self.rel_tol > 0 and self.abs_tol > 0):
            raise ValueError("rel_tol and abs_tol must be positive")
        if self.max_outer_terms < 1 or self.max_inner_terms < 1:
            raise ValueError("term caps must be at least 1")


DEFAULT_CONTROL = SeriesControl()
# Finite-difference checks see every ulp of truncation noise, so they sum
# until the terms no longer change the result.
TIGHT_CONTROL = SeriesControl(rel_tol=1e-17)


@dataclass(frozen=True)
class HypergeomValue:
    """A series value together with its truncation record."""

    value: float
    terms_used: int
    converged: bool
    est_error: float

    def __float__(self):
        return float(self.value)


class Convergence(enum.Enum):
    CONVERGES_ALL = "ConvergesAll"
    CONVERGES_UNIT = "ConvergesUnit"
    CONVERGES_MIXED = "ConvergesMixed"
    UNKNOWN = "Unknown"


def _nonpositive_integer(x):
    x = np.asarray(x, dtype=float)
    return (x <= 0) & (x == np.round(x))


def pochhammer(a, k):
    """Rising factorial ``(a)_k = a (a+1) ... (a+k-1)`` with ``(a)_0 = 1``.

    Small ``k`` uses the direct product, which is exact for small integers
    and never touches a Gamma pole.  Larger ``k`` goes through a sign-tracked
    log-Gamma ratio; overflow shows up as ``inf``.
    """
    k = operator.index(k)
    if k < 0:
        raise ValueError("k must be nonnegative")
    if k <= _POCHHAMMER_PRODUCT_LIMIT or _nonpositive_integer(a):
        out = 1.0
        for i in range(k):
            out *= a + i
        return out
    if _nonpositive_integer(a + k):
        # a is not a pole but a + k is only possible for negative
        # integers, handled above.
        return 0.0
    sign = sc.gammasgn(a + k) * sc.gammasgn(a)
    log_mag = sc.gammaln(a + k) - sc.gammaln(a)
    try:
        return float(sign * math.exp(log_mag))
    except OverflowError:
        return float(sign * math.inf)


# --------------------------------------------------------------------------
# Gauss 2F1: vectorised core
# --------------------------------------------------------------------------

def _series(a, b, c, z, rel_tol, abs_tol, max_terms):
    """Direct Gauss series, elementwise over equally shaped 1-D arrays."""
    term = np.ones_like(z)
    total = np.ones_like(z)
    abs_sum = np.ones_like(z)
    err = np.full_like(z, np.inf)
    nterms = np.zeros(z.shape, dtype=int)
    done = np.zeros(z.shape, dtype=bool)
    quiet = np.zeros(z.shape, dtype=int)
    az = np.abs(z)
    for m in range(max_terms):
        ratio = (a + m) * (b + m) / ((c + m) * (m + 1.0)) * z
        term = term * ratio
        total = total + term
        abs_sum = abs_sum + np.abs(term)
        rho = np.maximum(np.abs(ratio), az)
        with np.errstate(divide="ignore", invalid="ignore"):
            tail = np.where(rho < 1.0, np.abs(term) * rho / (1.0 - rho), np.inf)
        tail = np.where(term == 0.0, 0.0, tail)
        small = tail <= rel_tol * np.abs(total) + abs_tol
        quiet = np.where(small, quiet + 1, 0)
        newly = (quiet >= 3) & ~done
        if newly.any():
            err[newly] = tail[newly]
            nterms[newly] = m + 1
            done |= newly
            if done.all():
                break
    pending = ~done
    if pending.any():
        nterms[pending] = max_terms
        err[pending] = np.abs(term[pending])
    # cancellation in an alternating sum costs eps * sum |terms|
    err = err + _EPS * abs_sum
    return total, err, nterms, done


def _gamma_ratio(num, den):
    """prod Gamma(num) / prod Gamma(den), elementwise, poles of den -> 0."""
    log_mag = np.zeros(np.shape(num[0]))
    sign = np.ones(np.shape(num[0]))
    zero = np.zeros(np.shape(num[0]), dtype=bool)
    for x in num:
        log_mag = log_mag + sc.gammaln(x)
        sign = sign * sc.gammasgn(x)
    for x in den:
        zero |= _nonpositive_integer(x)
        log_mag = log_mag - sc.gammaln(x)
        sign = sign * sc.gammasgn(x)
    with np.errstate(over="ignore", invalid="ignore"):
        out = sign * np.exp(log_mag)
    return np.where(zero, 0.0, out)


def _connection(a, b, c, z, rel_tol, abs_tol, max_terms):
    """2F1 near z = 1 through the 1 - z connection formula."""
    s = c - a - b
    w = 1.0 - z
    f1, e1, n1, ok1 = _series(a, b, 1.0 - s, w, rel_tol, abs_tol, max_terms)
    f2, e2, n2, ok2 = _series(c - a, c - b, 1.0 + s, w, rel_tol, abs_tol, max_terms)
    g1 = _gamma_ratio((c, s), (c - a, c - b))
    g2 = _gamma_ratio((c, -s), (a, b))
    ws = w**s
    value = g1 * f1 + g2 * ws * f2
    err = np.abs(g1) * e1 + np.abs(g2 * ws) * e2
    return value, err, np.maximum(n1, n2), ok1 & ok2


def _gauss_unit(a, b, c, z, rel_tol, abs_tol, max_terms, allow_connection):
    """2F1 for 0 <= z < 1 (or any |z| < 1 when only the series is wanted)."""
    value = np.empty_like(z)
    err = np.empty_like(z)
    nterms = np.empty(z.shape, dtype=int)
    ok = np.empty(z.shape, dtype=bool)
    s = c - a - b
    use_conn = (
        allow_connection
        & (z > _CONNECTION_THRESHOLD)
        & (np.abs(s - np.round(s)) > _NEAR_INTEGER)
        & ~_nonpositive_integer(a)
        & ~_nonpositive_integer(b)
    )
    for mask, fn in ((use_conn, _connection), (~use_conn, _series)):
        if mask.any():
            v, e, n, k = fn(a[mask], b[mask], c[mask], z[mask], rel_tol, abs_tol, max_terms)
            value[mask], err[mask], nterms[mask], ok[mask] = v, e, n, k
    return value, err, nterms, ok


def _hyp2f1(a, b, c, z, rel_tol, abs_tol, max_terms, method="auto"):
    """Elementwise 2F1 for real z < 1; returns (value, err, nterms, ok).

    ``method="auto"`` maps z < 0 into (0, 1) with the Pfaff transformation
    and switches to the connection formula close to 1.  ``"series"`` sums the
    defining series only; ``"pfaff"`` forces the transformation for z < 0
    but otherwise sums the plain series.
    """
    a, b, c, z = (np.asarray(x, dtype=float) for x in np.broadcast_arrays(a, b, c, z))
    shape = z.shape
    a, b, c, z = (x.ravel().copy() for x in (a, b, c, z))
    pref = np.ones_like(z)
    if method != "series":
        neg = z < 0
        if neg.any():
            # Keep the smaller parameter in front: the transformed series then
            # has c' - a' - b' = |b - a| >= 0 and stays bounded as z' -> 1.
            lo = np.minimum(a[neg], b[neg])
            hi = np.maximum(a[neg], b[neg])
            zn = z[neg]
            pref[neg] = (1.0 - zn) ** (-lo)
            a[neg] = lo
            b[neg] = c[neg] - hi
            z[neg] = zn / (zn - 1.0)
    value, err, nterms, ok = _gauss_unit(
        a, b, c, z, rel_tol, abs_tol, max_terms, allow_connection=(method == "auto")
    )
    value = value * pref
    err = err * np.abs(pref)
    return (value.reshape(shape), err.reshape(shape), nterms.reshape(shape), ok.reshape(shape))


def _check_gauss_args(c, z):
    if np.any(_nonpositive_integer(c)):
        raise PoleParameter(f"lower parameter c={c} is a nonpositive integer")
    if np.any(np.asarray(z) >= 1):
        raise DomainError("2F1 is only evaluated for real z < 1")


def gauss_2f1(a, b, c, z, ctrl=DEFAULT_CONTROL, method="auto", strict=True):
    """Gauss hypergeometric function ``F(a, b; c; z)`` for real ``z < 1``.

    Parameters
    ----------
    a, b, c, z : float
    ctrl : SeriesControl
    method : {"auto", "series", "pfaff"}
        ``"series"`` sums the defining series even for negative ``z`` (only
        meaningful for ``|z| < 1``); it exists to cross-check the Pfaff path.
    strict : bool
        Raise :class:`NotConverged` when the term cap is reached.  With
        ``strict=False`` the partial value is returned with
        ``converged=False``.

    Returns
    -------
    HypergeomValue
    """
    _check_gauss_args(c, z)
    v, e, n, ok = _hyp2f1(a, b, c, z, ctrl.rel_tol, ctrl.abs_tol, ctrl.max_inner_terms, method)
    out = HypergeomValue(float(v), int(n), bool(ok), float(e))
    if strict and not out.converged:
        raise NotConverged(f"2F1({a}, {b}; {c}; {z}) did not converge", out)
    return out


def gauss_2f1_array(a, b, c, z, ctrl=DEFAULT_CONTROL, method="auto"):
    """Broadcasting version of :func:`gauss_2f1`; returns a plain ndarray."""
    _check_gauss_args(c, z)
    v, _, _, ok = _hyp2f1(a, b, c, z, ctrl.rel_tol, ctrl.abs_tol, ctrl.max_inner_terms, method)
    if not ok.all():
        raise NotConverged(f"2F1 failed to converge at {int((~ok).sum())} points")
    return v


# --------------------------------------------------------------------------
# Two-variable series by row reduction
# --------------------------------------------------------------------------

def _row_coefficient_ratio(n, e, num, den):
    """coef_{n+1} / coef_n without the y factor."""
    r = 1.0 / ((n + 1.0) * (e + n))
    if num is not None:
        r *= num + n
    if den is not None:
        r /= den + n
    return r


def _check_rows(e, den, x):
    if _nonpositive_integer(e):
        raise PoleParameter(f"lower parameter {e} is a nonpositive integer")
    if den is not None and _nonpositive_integer(den):
        raise PoleParameter(f"lower parameter {den} is a nonpositive integer")
    if np.any(np.asarray(x) >= 1):
        raise DomainError("the first argument must satisfy x < 1")


def _row_sum(b, c, e, x, y, num, den, ctrl):
    """sum_n (num)_n y^n / ((den)_n (e)_n n!) * 2F1(b, c; e + n; x)."""
    _check_rows(e, den, x)
    x, y = np.broadcast_arrays(np.asarray(x, dtype=float), np.asarray(y, dtype=float))
    total = np.zeros(x.shape)
    err = np.zeros(x.shape)
    coef = np.ones(x.shape)
    quiet = 0
    inner_ok = np.ones(x.shape, dtype=bool)
    for n in range(ctrl.max_outer_terms):
        f, fe, _, ok = _hyp2f1(b, c, e + n, x, ctrl.rel_tol, ctrl.abs_tol, ctrl.max_inner_terms)
        inner_ok &= ok
        row = coef * f
        total = total + row
        err = err + np.abs(coef) * fe
        if np.all(np.abs(row) <= ctrl.rel_tol * np.abs(total) + ctrl.abs_tol):
            quiet += 1
            if quiet >= 3:
                return total, err + np.abs(row), n + 1, bool(inner_ok.all())
        else:
            quiet = 0
        coef = coef * y * _row_coefficient_ratio(n, e, num, den)
    return total, err + np.abs(row), ctrl.max_outer_terms, False


def _scalar_result(name, res, strict):
    v, e, n, ok = res
    out = HypergeomValue(float(v), int(n), bool(ok), float(e))
    if strict and not ok:
        raise NotConverged(f"{name} did not converge", out)
    return out


def humbert_xi2(a, b, d, u, w, ctrl=DEFAULT_CONTROL, strict=True):
    """Humbert function ``Xi2(a, b; d; u, w)`` for real ``u < 1`` and any ``w``.

    Each row ``w^n / (n! (d)_n) * 2F1(a, b; d + n; u)`` is a Gauss function,
    continued to negative ``u`` by the Pfaff transformation.
    """
    return _scalar_result("Xi2", _row_sum(a, b, d, u, w, None, None, ctrl), strict)


def humbert_xi2_array(a, b, d, u, w, ctrl=DEFAULT_CONTROL):
    total, _, _, ok = _row_sum(a, b, d, u, w, None, None, ctrl)
    if not ok:
        raise NotConverged("Xi2 did not converge")
    return total


def f0211(b, c, d, e, g, x, y, ctrl=DEFAULT_CONTROL, strict=True):
    """Degenerate series ``F^{0;2;1}_{1;0;1}[-: b, c; d; e: -; g; x, y]``.

    Rows are ``(d)_n y^n / (n! (g)_n (e)_n) * 2F1(b, c; e + n; x)``.  With
    ``g = d`` this is the Humbert function ``Xi2(b, c; e; x, y)``.
    """
    return _scalar_result("F0211", _row_sum(b, c, e, x, y, d, g, ctrl), strict)


def f0211_array(b, c, d, e, g, x, y, ctrl=DEFAULT_CONTROL):
    total, _, _, ok = _row_sum(b, c, e, x, y, d, g, ctrl)
    if not ok:
        raise NotConverged("F0211 did not converge")
    return total


class RowExpansion:
    """Rows of a two-variable series frozen at a fixed set of first arguments.

    For fixed ``x_j`` the series is a power series in ``y``,
    ``sum_n R_n(x_j) y^n``.  Integral operators evaluate their kernels at
    the same quadrature abscissae for every target point, so the Gauss rows
    are computed once and the ``y`` dependence is a Horner sweep.

    Parameters
    ----------
    b, c, e : float
        Row ``n`` is proportional to ``2F1(b, c; e + n; x)``.
    x : array_like
        First arguments (``< 1``).
    y_bound : float
        Largest ``|y|`` the expansion will be evaluated at; fixes the number
        of rows kept.
    num, den : float or None
        Extra ``(num)_n / (den)_n`` row factor; ``None`` for the Humbert case.
    """

    def __init__(self, b, c, e, x, y_bound, num=None, den=None, ctrl=DEFAULT_CONTROL):
        _check_rows(e, den, x)
        x = np.asarray(x, dtype=float)
        y_bound = abs(float(y_bound))
        rows = []
        coef = 1.0
        scale = np.zeros(x.shape)
        quiet = 0
        for n in range(ctrl.max_outer_terms):
            f, _, _, ok = _hyp2f1(b, c, e + n, x, ctrl.rel_tol, ctrl.abs_tol, ctrl.max_inner_terms)
            if not ok.all():
                raise NotConverged(f"Gauss row {n} did not converge")
            row = coef * f
            rows.append(row)
            mag = np.abs(row) * y_bound**n
            scale = scale + mag
            if n > 0 and np.all(mag <= ctrl.rel_tol * scale + ctrl.abs_tol):
                quiet += 1
                if quiet >= 3:
                    break
            elif n > 0:
                quiet = 0
            if y_bound == 0.0:
                break
            coef *= _row_coefficient_ratio(n, e, num, den)
        else:
            raise NotConverged("row expansion hit max_outer_terms")
        self.rows = np.array(rows)
        self.rows.setflags(write=False)
        self.y_bound = y_bound

    @property
    def n_rows(self):
        return self.rows.shape[0]

    def __call__(self, y):
        """Evaluate at ``y`` (broadcast against the trailing ``x`` axis)."""
        y = np.asarray(y, dtype=float)
        out = np.broadcast_to(self.rows[-1], np.broadcast_shapes(y.shape, self.rows.shape[1:])).copy()
        for n in range(self.n_rows - 2, -1, -1):
            out *= y
            out += self.rows[n]
        return out

    def derivative(self, y):
        """d/dy of the expansion."""
        y = np.asarray(y, dtype=float)
        shape = np.broadcast_shapes(y.shape, self.rows.shape[1:])
        if self.n_rows == 1:
            return np.zeros(shape)
        out = np.broadcast_to((self.n_rows - 1) * self.rows[-1], shape).copy()
        for n in range(self.n_rows - 2, 0, -1):
            out *= y
            out += n * self.rows[n]
        return out


# --------------------------------------------------------------------------
# Convergence regions
# --------------------------------------------------------------------------

def convergence_classification(p, q, k, l, m, n, x, y):
    """Classify convergence of a double series ``F^{p;q;k}_{l;m;n}`` at (x, y).

    Strict inequalities ``p+q < l+m+1`` and ``p+k < l+n+1`` give convergence
    everywhere.  When both hold with equality the region is
    ``|x|^(1/(p-l)) + |y|^(1/(p-l)) < 1`` for ``p > l`` and
    ``max(|x|, |y|) < 1`` otherwise.  Every other signature, and points
    outside those regions, are reported as :attr:`Convergence.UNKNOWN`.
    """
    for v in (p, q, k, l, m, n):
        if operator.index(v) < 0:
            raise ValueError("signature entries must be nonnegative")
    lhs_x, rhs_x = p + q, l + m + 1
    lhs_y, rhs_y = p + k, l + n + 1
    if lhs_x < rhs_x and lhs_y < rhs_y:
        return Convergence.CONVERGES_ALL
    if lhs_x == rhs_x and lhs_y == rhs_y:
        ax, ay = abs(x), abs(y)
        if p > l:
            power = 1.0 / (p - l)
            if ax**power + ay**power < 1:
                return Convergence.CONVERGES_MIXED
        elif max(ax, ay) < 1:
            return Convergence.CONVERGES_UNIT
    return Convergence.UNKNOWN


# --------------------------------------------------------------------------
# PDE-system residuals
# --------------------------------------------------------------------------

def _default_step(h, x, y):
    if h is None:
        return 1e-3 * max(1.0, abs(x), abs(y))
    if h <= 0:
        raise ValueError("h must be positive")
    return float(h)


# central y-stencils as {offset: weight}, before division by h^order
_Y_STENCILS = {
    "id": ({0: 1.0}, 0),
    "y": ({1: 0.5, -1: -0.5}, 1),
    "yy": ({1: 1.0, 0: -2.0, -1: 1.0}, 2),
    "yyy": ({2: 0.5, 1: -1.0, -1: 1.0, -2: -0.5}, 3),
}


def _y_stencil_powers(y, h, n_rows, weights, order):
    """``sum_j w_j (y + j h)^n / h^order`` for n < n_rows, free of cancellation.

    Expanding binomially gives ``sum_k C(n, k) y^(n-k) h^(k-order) M_k`` with
    integer moments ``M_k = sum_j w_j j^k``; those below ``order`` vanish
    exactly, so the differences never subtract nearly equal numbers.
    """
    n = np.arange(n_rows)[:, None]
    k = np.arange(n_rows)[None, :]
    moments = np.array([sum(w * j**kk for j, w in weights.items()) for kk in range(n_rows)])
    moments[:order] = 0.0
    with np.errstate(divide="ignore", invalid="ignore"):
        binom = sc.comb(n, k)
        ypow = np.where(k <= n, float(y) ** np.maximum(n - k, 0), 0.0)
        hpow = float(h) ** (k - order).astype(float)
    terms = np.where(k <= n, binom * ypow * hpow * moments[None, :], 0.0)
    return terms.sum(axis=1)


def _row_derivatives(b, c, e, x, y, h, num, den, ctrl):
    """Central-difference derivatives of a row series at (x, y) with step h.

    x-differences are taken between rows frozen at ``x`` and ``x +- h``;
    y-differences are applied to the row polynomial through
    :func:`_y_stencil_powers`.  In exact arithmetic this is the plain
    five-point stencil, so the truncation error is unchanged.
    """
    exp = RowExpansion(b, c, e, x + h * np.array([-1.0, 0.0, 1.0]), abs(y) + 2 * h,
                       num=num, den=den, ctrl=ctrl)
    D = {}
    for name, (weights, order) in _Y_STENCILS.items():
        s = _y_stencil_powers(y, h, exp.n_rows, weights, order)
        D[name] = s @ exp.rows  # values at x - h, x, x + h
    d = {}
    d["z"] = D["id"][1]
    d["x"] = (D["id"][2] - D["id"][0]) / (2 * h)
    d["xx"] = (D["id"][2] - 2 * D["id"][1] + D["id"][0]) / h**2
    d["y"] = D["y"][1]
    d["yy"] = D["yy"][1]
    d["yyy"] = D["yyy"][1]
    d["xy"] = (D["y"][2] - D["y"][0]) / (2 * h)
    d["xyy"] = (D["yy"][2] - D["yy"][0]) / (2 * h)
    return d


def xi2_system_residual(a, b, d, u, w, h=None, ctrl=TIGHT_CONTROL):
    """Residuals of the second-order system satisfied by ``Xi2(a, b; d; u, w)``.

    Returns the pair

        u(1-u) z_uu + w z_uw + [d - (a+b+1) u] z_u - a b z
        w z_ww + u z_uw + d z_w - z

    with central differences of step ``h`` (default ``1e-3 * max(1, |u|, |w|)``).
    Both are ``O(h^2)``.
    """
    h = _default_step(h, u, w)
    if u + h >= 1:
        raise DomainError("stencil crosses u = 1")
    z = _row_derivatives(a, b, d, u, w, h, None, None, ctrl)
    r1 = u * (1 - u) * z["xx"] + w * z["xy"] + (d - (a + b + 1) * u) * z["x"] - a * b * z["z"]
    r2 = w * z["yy"] + u * z["xy"] + d * z["y"] - z["z"]
    return float(r1), float(r2)


def f0211_system_residual(b, c, d, e, g, x, y, h=None, ctrl=TIGHT_CONTROL):
    """Residuals of the third-order system satisfied by ``F0211``.

    Returns the pair

        x(1-x) z_xx + y z_xy + [e - (b+c+1) x] z_x - b c z
        y^2 z_yyy + x y z_xyy + g x z_xy + (e+g+1) y z_yy + (e g - y) z_y - d z

    Third derivatives use five-point central stencils; both residuals are
    ``O(h^2)``.
    """
    h = _default_step(h, x, y)
    if x + h >= 1:
        raise DomainError("stencil crosses x = 1")
    z = _row_derivatives(b, c, e, x, y, h, d, g, ctrl)
    r1 = x * (1 - x) * z["xx"] + y * z["xy"] + (e - (b + c + 1) * x) * z["x"] - b * c * z["z"]
    r2 = (
        y**2 * z["yyy"]
        + x * y * z["xyy"]
        + g * x * z["xy"]
        + (e + g + 1) * y * z["yy"]
        + (e * g - y) * z["y"]
        - d * z["z"]
    )
    return float(r1), float(r2)
