import math

import mpmath
import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from memdecay.errors import DomainError, UnsupportedKindError
from memdecay.kernels import (SERIES_THRESHOLD, KernelKind, _correction_series, _kappa0_series,
                              k_differential, kappa0_reg, kappa1_pre_renormalized, kappa1_reg,
                              kernel_regime, kernel_value)
from memdecay.params import from_b_tilde
from memdecay.special import PrecisionConfig, euler_gamma

TWO_PI = 2 * math.pi
FIG1 = from_b_tilde(10, 1000)
FIG5 = from_b_tilde(1000, 1000, 1)


def _kappa_oracle(tau, p, order, digits=50, as_mp=False):
    """Si/Ci form at ``digits`` with mpmath's own special functions."""
    with mpmath.workdps(digits):
        A = mpmath.mpf((p.lambda_tilde_used - 1) * p.b_tilde)  # same double input as the kernel
        b = mpmath.mpf(p.b_tilde)
        t = mpmath.mpf(tau)
        k = (-(mpmath.si(A * t) + mpmath.si(b * t)) - 1j * (mpmath.ci(A * t) - mpmath.ci(b * t))) / (2 * mpmath.pi)
        if order == 1:
            k += (mpmath.exp(-1j * A * t) - mpmath.exp(1j * b * t)) / (2 * mpmath.pi * b * t)
        return k if as_mp else complex(k)


def test_kappa0_at_zero():
    for p in (FIG1, FIG5):
        assert kappa0_reg(0.0, p) == pytest.approx(-1j * math.log(p.Lambda_tilde - 1) / TWO_PI, abs=1e-15)


def test_kappa0_small_time():
    # b_tilde tau = 1e-4 with (Lambda_tilde - 1) b_tilde tau = 0.1
    p = FIG5
    tau = 1e-4 / p.b_tilde
    expected = -p.Lambda_tilde * p.b_tilde * tau / TWO_PI - 1j * math.log(p.Lambda - 1) / TWO_PI
    assert abs(kappa0_reg(tau, p) / expected - 1) < 1e-3


def test_kappa0_small_time_forced_equal():
    p = from_b_tilde(10, 1000, force_lambda_tilde_equal=True)
    tau = 1e-4 / p.b_tilde
    expected = -p.Lambda * p.b_tilde * tau / TWO_PI - 1j * math.log(p.Lambda - 1) / TWO_PI
    assert abs(kappa0_reg(tau, p) / expected - 1) < 1e-3


def test_kappa0_large_time():
    tau = 30.0
    expected = -0.5 + np.exp(1j * 10 * tau) / (TWO_PI * 10 * tau)
    assert abs(kappa0_reg(tau, FIG1) - expected) < 1e-3


def test_kappa1_at_zero():
    for p in (FIG1, FIG5):
        expected = kappa0_reg(0.0, p) - 1j * p.Lambda_tilde / TWO_PI
        assert kappa1_reg(0.0, p) == pytest.approx(expected, rel=1e-14)
        # limit of the mpmath closed form just above zero
        assert kappa1_reg(0.0, p) == pytest.approx(_kappa_oracle(1e-25, p, 1), rel=1e-12)


def test_kappa1_large_time():
    p = FIG5
    tau = 20.0
    A = (p.Lambda_tilde - 1) * p.b_tilde
    expected = -0.5 + np.exp(-1j * A * tau) / (TWO_PI * p.b_tilde * tau)
    assert abs(kappa1_reg(tau, p) - expected) < 1e-4


def test_kernels_against_oracle():
    for p in (FIG1, FIG5):
        A = (p.Lambda_tilde - 1) * p.b_tilde
        for tau in (0.3 * SERIES_THRESHOLD / A, 2 * SERIES_THRESHOLD / A, 1e-4, 0.01, 1.0, 37.0):
            for order, f in ((0, kappa0_reg), (1, kappa1_reg)):
                ref = _kappa_oracle(tau, p, order)
                assert abs(f(tau, p) - ref) < 1e-12 * max(1.0, abs(ref))


def test_extended_kernels():
    prec = PrecisionConfig(working_digits=30)
    for f, order in ((kappa0_reg, 0), (kappa1_reg, 1)):
        v = f(0.25, FIG1, prec)
        with mpmath.workdps(50):
            assert abs(v - _kappa_oracle(0.25, FIG1, order, as_mp=True)) < mpmath.mpf(10) ** -25


def test_regime_forms():
    p = FIG1
    tau = 0.05
    inter = kernel_regime(KernelKind.Kappa0Intermediate, tau, p)
    assert inter == pytest.approx(-0.25 + 1j / TWO_PI * (euler_gamma() + math.log(10 * tau)))
    large = kernel_regime(KernelKind.Kappa0Large, tau, p)
    assert large == pytest.approx(-0.5 + np.exp(1j * 10 * tau) / (TWO_PI * 10 * tau))
    small = kernel_regime(KernelKind.Kappa0Small, tau, p)
    assert small == pytest.approx(-1000 * 10 * tau / TWO_PI - 1j * math.log(999) / TWO_PI)
    for kind in (KernelKind.Kappa0Reg, KernelKind.Kappa1Reg, KernelKind.K0Differential):
        with pytest.raises(UnsupportedKindError):
            kernel_regime(kind, tau, p)


def test_kernel_value_dispatch():
    assert kernel_value(KernelKind.Kappa0Reg, 1.0, FIG1) == kappa0_reg(1.0, FIG1)
    assert kernel_value(KernelKind.Kappa1Reg, 1.0, FIG1) == kappa1_reg(1.0, FIG1)
    assert KernelKind.for_order(1) is KernelKind.Kappa1Reg
    assert len(KernelKind) == 8


def test_negative_tau_rejected():
    with pytest.raises(DomainError):
        kappa0_reg(-1.0, FIG1)


def test_differential_closed_form():
    p = FIG1
    for tau in (1e-3, 0.1, 2.0, 30.0):
        expected = -(1 / TWO_PI) * np.exp(1j * p.b_tilde * tau) * (1 - np.exp(-1j * p.Lambda_c * tau)) / (1j * tau)
        assert k_differential(KernelKind.K0Differential, tau, p) == pytest.approx(expected, rel=1e-12)
    assert k_differential(KernelKind.K0Differential, 0.0, p) == pytest.approx(-p.Lambda_c / TWO_PI, rel=1e-15)
    assert k_differential(KernelKind.K0Differential, 1e-14, p) == pytest.approx(-p.Lambda_c / TWO_PI, rel=1e-9)
    with pytest.raises(UnsupportedKindError):
        k_differential(KernelKind.Kappa0Reg, 1.0, p)


def test_differential_n1_against_quadrature():
    p = from_b_tilde(3, 5)
    for tau in (1e-6, 0.3, 2.0):
        with mpmath.workdps(30):
            ref = -mpmath.quad(lambda w: (w / p.b_A) * mpmath.exp(-1j * (w - p.b_tilde) * tau),
                               [0, p.Lambda_c]) / (2 * mpmath.pi)
        assert k_differential(KernelKind.K1Differential, tau, p) == pytest.approx(complex(ref), rel=1e-10)


@pytest.mark.parametrize("tau", [0.02, 0.1, 0.5])
def test_differential_integrates_to_kappa0(tau):
    # small cutoff so the oscillatory integral stays cheap for the oracle
    p = from_b_tilde(3, 5)
    edges = np.linspace(0, tau, 41)
    with mpmath.workdps(25):
        f = lambda s: complex(k_differential(KernelKind.K0Differential, float(s), p))
        total = sum(mpmath.quad(f, [a, b]) for a, b in zip(edges[:-1], edges[1:]))
    expected = kappa0_reg(tau, p) + 1j * math.log(p.Lambda_tilde - 1) / TWO_PI
    assert abs(complex(total) - expected) < 1e-6


def test_pre_renormalized_form():
    p = FIG5
    # same kernel with b_prime for b_tilde, bare Lambda and the constant phase restored
    q = from_b_tilde(p.b_prime, p.Lambda, force_lambda_tilde_equal=True)
    shift = 1j * math.log(p.Lambda - 1) / TWO_PI
    for tau in (0.0, 1e-9, 0.01, 3.0):
        assert kappa1_pre_renormalized(tau, p) == pytest.approx(kappa1_reg(tau, q) + shift, rel=1e-10, abs=1e-12)
    with pytest.raises(DomainError):
        kappa1_pre_renormalized(1.0, FIG1)


# ---------------------------------------------------------------- properties
def test_series_continuity_at_threshold():
    for p in (FIG1, FIG5, from_b_tilde(2, 3)):
        A, b = (p.Lambda_tilde - 1) * p.b_tilde, p.b_tilde
        t = np.array([SERIES_THRESHOLD / A])
        closed0 = (-(mpmath.si(A * t[0]) + mpmath.si(b * t[0])) - 1j * (mpmath.ci(A * t[0]) - mpmath.ci(b * t[0]))) / (2 * mpmath.pi)
        assert abs(_kappa0_series(t, A, b)[0] - complex(closed0)) < 1e-10
        closed1 = (np.exp(-1j * A * t[0]) - np.exp(1j * b * t[0])) / (TWO_PI * b * t[0])
        assert abs(_correction_series(t, A, b)[0] - closed1) < 1e-10
        # and the public kernels on both sides of the switch
        for f in (kappa0_reg, kappa1_reg):
            lo, hi = f(t[0] * (1 - 1e-12), p), f(t[0] * (1 + 1e-12), p)
            assert abs(lo - hi) < 1e-10


@settings(max_examples=200)
@given(st.floats(min_value=1.0, max_value=1e4), st.floats(min_value=3.0, max_value=1e5),
       st.floats(min_value=1.0, max_value=1e6))
def test_real_part_tends_to_minus_half(b_tilde, Lambda, bt):
    # the bound needs the fast rate (Lambda_tilde - 1) b_tilde to be at least b_tilde
    p = from_b_tilde(b_tilde, Lambda)
    tau = 100.0 * bt / b_tilde
    assert abs(kappa0_reg(tau, p).real + 0.5) <= 1 / (math.pi * b_tilde * tau)


@settings(max_examples=1000)
@given(st.floats(min_value=0.5, max_value=2e3), st.floats(min_value=1.2, max_value=1e4),
       st.floats(min_value=0.0, max_value=1e3))
def test_n1_minus_n0_identity(b_tilde, Lambda, tau):
    try:
        p = from_b_tilde(b_tilde, Lambda)
    except DomainError:
        return
    A, b = (p.Lambda_tilde - 1) * p.b_tilde, p.b_tilde
    k0, k1 = kappa0_reg(tau, p), kappa1_reg(tau, p)
    if A * tau < SERIES_THRESHOLD:
        corr = _correction_series(np.array([tau]), A, b)[0]
    else:
        corr = (np.exp(-1j * A * tau) - np.exp(1j * b * tau)) / (TWO_PI * b * tau)
    eps = np.finfo(float).eps
    assert abs((k1 - k0) - corr) <= 4 * eps * (abs(k0) + abs(corr))


@pytest.mark.parametrize("p", [FIG1, FIG5], ids=["b10", "b1000"])
def test_finite_over_long_range(p):
    tau = np.concatenate([[0.0], np.geomspace(1e-12, 1e6, 20001)])
    for f in (kappa0_reg, kappa1_reg):
        assert np.all(np.isfinite(f(tau, p)))
