"""End-to-end acceptance criteria, each reported as one PASS/FAIL line."""

import shlex
import subprocess
import sys
import time

import numpy as np

from humbert_volterra.epd import (
    CauchyData,
    CharPoint,
    cauchy_solution,
    pde9_residual,
    recover_T_from_tau,
    use_site_tau,
    verify_cauchy_data,
)
from humbert_volterra.kernel import omega1_with_scale, tau_prime_expansion, verify_lemma
from humbert_volterra.operators import (
    GridFunction,
    Parameters,
    QuadratureSpec,
    forward_N,
    inverse_T,
    roundtrip_check,
)
from humbert_volterra.special import (
    f0211,
    f0211_system_residual,
    gauss_2f1,
    humbert_xi2,
    xi2_system_residual,
)

GRID = np.linspace(0.05, 0.95, 17)
SEED_V = GridFunction.from_callable(lambda t: 1 + np.asarray(t) ** 2, lambda t: 2 * np.asarray(t))
SEED_TAU = GridFunction.from_callable(lambda t: np.asarray(t) ** 2, lambda t: 2 * np.asarray(t))


def lemma_pairs():
    """25 pairs (x, s) with z = (x - s)/x inside the series disc."""
    xs = np.linspace(0.3, 0.95, 5)
    zs = np.linspace(0.05, 0.7, 5)
    return [(x, x * (1 - z)) for x in xs for z in zs]


def test_kernel_identity(acceptance):
    t0 = time.perf_counter()
    worst, worst_cond, ok = 0.0, 0.0, True
    for alpha, beta in [(-0.1, -0.3), (-0.05, -0.45), (0.0, -0.2)]:
        for lam in (-5.0, 0.0, 1.0, 10.0):
            rep = verify_lemma(Parameters(alpha, beta), [(x, s, lam) for x, s in lemma_pairs()],
                               tol=1e-6, tol_zero_lam=1e-8)
            ok &= rep.passed
            worst = max(worst, rep.max_abs_err)
            worst_cond = max(worst_cond, max(smp.condition for smp in rep.samples))
    elapsed = time.perf_counter() - t0
    passed = ok and elapsed < 60
    acceptance(1, "kernel identity", passed,
               f"max |W - (1-z)^alpha| = {worst:.2e}, max condition {worst_cond:.2e}, "
               f"{elapsed:.1f} s")
    assert passed


def test_higher_coefficients_vanish(acceptance):
    t0 = time.perf_counter()
    worst_ratio = 0.0
    for params in (Parameters(-0.1, -0.3), Parameters(-0.05, -0.45)):
        for z in np.linspace(0.07, 0.7, 10):
            for k in (1, 2, 3):
                val, scale = omega1_with_scale(k, z, params)
                worst_ratio = max(worst_ratio, abs(val) / (1e-8 * max(1.0, scale)))
    elapsed = time.perf_counter() - t0
    passed = worst_ratio < 1 and elapsed < 30
    acceptance(2, "Omega1 vanishing", passed,
               f"max |Omega1| / (1e-8 scale) = {worst_ratio:.2e}, {elapsed:.1f} s")
    assert passed


def test_inversion_identities(acceptance):
    t0 = time.perf_counter()
    worst = {}
    for alpha, beta in [(-0.1, -0.3), (-0.05, -0.45)]:
        for lam in (-2.0, 0.0, 3.0):
            p = Parameters(alpha, beta, lam)
            for direction, seed in (("TN", SEED_V), ("NT", SEED_TAU)):
                res = roundtrip_check(seed, direction, GRID, p).sup_residual
                worst[direction] = max(worst.get(direction, 0.0), res)
    elapsed = time.perf_counter() - t0
    passed = max(worst.values()) < 1e-4 and elapsed < 120
    acceptance(3, "inversion identities", passed,
               f"sup TN {worst['TN']:.2e}, sup NT {worst['NT']:.2e}, {elapsed:.1f} s")
    assert passed


def test_abel_reduction(acceptance):
    x = np.linspace(0.05, 1.0, 20)
    fwd_err, inv_err = 0.0, 0.0
    for beta in (-0.2, -0.45):
        p = Parameters(0.0, beta)
        got = forward_N(np.ones_like, x, p, QuadratureSpec(64))
        fwd_err = max(fwd_err, np.max(np.abs(got - x ** (1 - 2 * beta) / (1 - 2 * beta))))
        tau = GridFunction.from_callable(
            lambda t, b=beta: np.asarray(t) ** (1 - 2 * b) / (1 - 2 * b),
            lambda t, b=beta: np.asarray(t) ** (-2 * b),
        )
        back = inverse_T(tau, GRID, p)
        inv_err = max(inv_err, np.max(np.abs(back - 1)))
    passed = fwd_err < 1e-10 and inv_err < 1e-5
    acceptance(4, "Abel reduction", passed,
               f"forward {fwd_err:.2e}, inverse {inv_err:.2e}")
    assert passed


def test_reduction_identities(acceptance):
    rng = np.random.default_rng(20240611)
    worst = {"f0211": 0.0, "xi2": 0.0, "pfaff": 0.0}
    for _ in range(50):
        b, c = rng.uniform(-1.0, 1.5, 2)
        e = rng.uniform(0.5, 2.5)
        d = rng.uniform(0.2, 2.0)
        x = rng.uniform(-20.0, 0.9)
        y = rng.uniform(-3.0, 3.0)
        xi = humbert_xi2(b, c, e, x, y).value
        rel = abs(f0211(b, c, d, e, d, x, y).value - xi) / abs(xi)
        worst["f0211"] = max(worst["f0211"], rel)
        g = gauss_2f1(b, c, e, x).value
        worst["xi2"] = max(worst["xi2"], abs(humbert_xi2(b, c, e, x, 0.0).value - g) / abs(g))
        z = rng.uniform(-0.95, -0.05)
        direct = gauss_2f1(b, c, e, z, method="series").value
        pfaff = gauss_2f1(b, c, e, z, method="pfaff").value
        worst["pfaff"] = max(worst["pfaff"], abs(direct - pfaff) / abs(pfaff))
    passed = max(worst.values()) < 1e-12
    acceptance(5, "reduction identities", passed,
               ", ".join(f"{k} {v:.2e}" for k, v in worst.items()))
    assert passed


def test_pde_systems(acceptance):
    hs = (1e-2, 5e-3, 2.5e-3)
    us = np.linspace(-0.6, 0.6, 10)
    ws = np.linspace(1.5, -1.5, 10)
    ratios = []
    for u, w in zip(us, ws):
        for fn in (lambda h: xi2_system_residual(0.3, 0.6, 1.4, u, w, h),
                   lambda h: f0211_system_residual(0.3, 0.6, 0.8, 1.4, 1.1, u, w, h)):
            r = np.abs([fn(h) for h in hs])
            ratios.extend((r[:-1] / r[1:]).ravel())
    lo, hi = min(ratios), max(ratios)
    passed = 3.5 <= lo and hi <= 4.5
    acceptance(6, "PDE systems", passed, f"residual ratios in [{lo:.4f}, {hi:.4f}]")
    assert passed


def test_tau_prime_expansion(acceptance):
    t = np.linspace(0.1, 0.9, 10)
    h = 1e-3
    worst = 0.0
    for p in (Parameters(-0.1, -0.3, 2.0), Parameters(-0.05, -0.45, -3.0)):
        def tau(x, p=p):
            return forward_N(SEED_V, x, p)

        fd = (-tau(t + 2 * h) + 8 * tau(t + h) - 8 * tau(t - h) + tau(t - 2 * h)) / (12 * h)
        worst = max(worst, np.max(np.abs(tau_prime_expansion(SEED_V, t, p) - fd)))
    passed = worst < 1e-5
    acceptance(7, "tau' expansion", passed, f"max deviation {worst:.2e}")
    assert passed


def test_cauchy_problem(acceptance):
    t0 = time.perf_counter()
    p = Parameters(-0.1, -0.3, 2.0)
    nu = GridFunction.from_callable(lambda t: 1 + 0.5 * np.asarray(t))
    tau = use_site_tau(SEED_V, p)
    recovered = recover_T_from_tau(tau, p)(GRID)
    rec_err = np.max(np.abs(recovered - SEED_V(GRID)))
    data = CauchyData(tau, nu, SEED_V)

    def u(q):
        return cauchy_solution(q, data, p)

    ratios = []
    for q in (CharPoint(0.3, 0.6), CharPoint(0.4, 0.7), CharPoint(0.5, 0.9)):
        r = np.abs([pde9_residual(u, q, p, h) for h in (1e-2, 5e-3, 2.5e-3)])
        ratios.extend(r[:-1] / r[1:])
    checks = verify_cauchy_data(data, p)
    tau_dev = max(c.tau_deviation for c in checks)
    nu_dev = max(c.nu_deviation for c in checks)
    nu_ratio = np.mean([c.nu_ratio for c in checks])
    elapsed = time.perf_counter() - t0
    parts = {
        "density": rec_err < 1e-4,
        "pde": 3.5 <= min(ratios) and max(ratios) <= 4.5,
        "diagonal": tau_dev < 1e-4,
        "normal derivative": nu_dev < 1e-3,
        "runtime": elapsed < 300,
    }
    passed = all(parts.values())
    acceptance(8, "Cauchy problem", passed,
               f"density {rec_err:.2e}, pde ratios [{min(ratios):.3f}, {max(ratios):.3f}], "
               f"tau deviation {tau_dev:.2e}, nu deviation {nu_dev:.2e} "
               f"(limit/nu = {nu_ratio:.4f}), {elapsed:.1f} s; "
               f"failed: {[k for k, v in parts.items() if not v] or 'none'}")
    assert passed


def test_determinism(acceptance):
    runs = [
        "eval-xi2 --a 0.25 --b 0.75 --d 1.3 --u -0.4 -20 --w 0.2 3",
        "roundtrip --direction TN --alpha -0.1 --beta -0.3 --lambda 3 --grid 9",
        "verify-kernel-lemma --alpha -0.05 --beta -0.45 --lambda -5 --grid 9 --format csv",
        "solve-cauchy --alpha -0.1 --beta -0.3 --lambda 1 --grid 3 --nodes 32",
    ]
    same = []
    for argv in runs:
        cmd = [sys.executable, "-m", "humbert_volterra.cli", *shlex.split(argv)]
        outs = [subprocess.run(cmd, capture_output=True, check=True).stdout for _ in range(2)]
        same.append(outs[0] == outs[1] and len(outs[0]) > 0)
    passed = all(same)
    acceptance(9, "determinism", passed, f"{sum(same)}/{len(same)} commands byte-identical")
    assert passed
