"""Closed-form approximations, contour reconstruction and crossover times.

Everything here is an independent route to the decay amplitude, used to
check the Volterra solver and to study where each approximation holds.

Contour representation
----------------------
Deforming the inverse Laplace integral around the logarithmic cut
``[0, W]`` (``W = Lambda_c``) gives, for the rescaled amplitude,

``c(tau) = e^{i b tau} [ sum_poles Z e^{-i u tau}
           - I1 / (2 pi tau) - e^{-i W tau} I2 / (2 pi tau) ]``

with ``I1 = int e^{-s} [1/F0(-i s/tau) - 1/F1(-i s/tau)] ds`` and
``I2 = int e^{-s} [1/F1(W - i s/tau) - 1/F0(W - i s/tau)] ds``.  ``F`` is
the sheet function (``M`` for n = 0, ``N`` for n = 1) and ``b`` the
shifted frequency ``b_tilde``.  The pole near ``b_tilde - i/2`` lives on
sheet 1; a second real zero just above ``W`` on sheet 0 carries an
exponentially small residue.
"""

from __future__ import annotations

import cmath
import enum
import math
from dataclasses import dataclass, field

import mpmath
import numpy as np
from scipy.special import roots_laguerre

from .errors import ConvergenceError, DomainError, UnsupportedKindError
from .params import Params
from .special import DOUBLE, PrecisionConfig, euler_gamma, exp_integral_e1

__all__ = [
    "AsymptoticModel",
    "ContourPieces",
    "CrossoverTimes",
    "SheetFunction",
    "amplitude_model",
    "three_term_components",
    "knight_milonni_integral",
    "appendix_a_exact",
    "m_functions",
    "n_functions",
    "sheet_function",
    "find_pole",
    "real_axis_zero",
    "laguerre_log_quad",
    "branch_cut_integrals",
    "flat_cut_integral_study",
    "linear_cut_integral_study",
    "crossover_times",
    "local_slope",
]

TWO_PI = 2.0 * math.pi
# 2 pi Lambda_c beyond which exp(-2 pi Lambda_c) is not representable
_Z0_EXPONENT_LIMIT = 700.0


class AsymptoticModel(enum.Enum):
    """Closed-form amplitude approximations."""

    SmallTime = "small_time"
    SmallTimeSeke = "small_time_seke"
    Intermediate = "intermediate"
    LargeKM0 = "large_km0"
    AppendixAExact = "appendix_a_exact"
    GeneralThreeTerm = "general_three_term"
    KnightMilonniIntegral = "knight_milonni_integral"
    KnightMilonniAsymptote = "knight_milonni_asymptote"


# ---------------------------------------------------------------- closed forms


def _tau_array(tau, allow_zero):
    t = np.asarray(tau, dtype=float)
    bad = (t < 0) if allow_zero else (t <= 0)
    if np.any(bad) or not np.all(np.isfinite(t)):
        raise DomainError("tau must be finite and " + (">= 0" if allow_zero else "> 0"))
    return t


def _guard_denominator(a, prec, what):
    if np.any(np.abs(a) < prec.abs_tol):
        raise DomainError(f"{what} vanishes: the approximation breaks down near tau_ln")


def _out(v):
    v = np.asarray(v)
    return complex(v) if v.ndim == 0 else v


def three_term_components(tau, p: Params, prec: PrecisionConfig = DOUBLE):
    """Individual terms of the three-term large-time form.

    Returns
    -------
    tuple of complex or ndarray
        ``(exponential, km_term, seke_herfort_term)``; their sum is the
        ``GeneralThreeTerm`` model.
    """
    t = _tau_array(tau, False)
    a = p.b_A - np.log(p.Lambda_c * t) / TWO_PI
    _guard_denominator(a, prec, "b_A - ln(Lambda_c tau)/2pi")
    expo = np.exp(-t / 2)
    km = -np.exp(1j * p.b_tilde * t) / (TWO_PI * p.b_A**3 * t**2)
    sh = -np.exp(-1j * p.fast_rate * t) / (TWO_PI * 1j * p.Lambda * t * a**2)
    return _out(expo), _out(km), _out(sh)


def amplitude_model(model: AsymptoticModel, tau, p: Params, prec: PrecisionConfig = DOUBLE):
    """Evaluate an approximate amplitude.

    ``SmallTime`` and ``SmallTimeSeke`` approximate the unshifted amplitude,
    the others the rescaled one; only the modulus is comparable across both.

    Parameters
    ----------
    model : AsymptoticModel
    tau : float or array_like
        ``tau > 0``; ``tau = 0`` is accepted by the small-time and
        intermediate forms.
    p : Params

    Raises
    ------
    DomainError
        For ``tau`` outside the domain or a vanishing logarithmic denominator.
    """
    allow_zero = model in (AsymptoticModel.SmallTime, AsymptoticModel.SmallTimeSeke,
                           AsymptoticModel.Intermediate)
    t = _tau_array(tau, allow_zero)
    if model is AsymptoticModel.SmallTime:
        return _out(1.0 - p.Lambda * (p.b_A * t) ** 2 / (2 * TWO_PI * p.b_A) + 0j)
    if model is AsymptoticModel.SmallTimeSeke:
        return _out(1.0 - p.Lambda**2 * (p.b_A * t) ** 2 / (4 * TWO_PI) + 0j)
    if model is AsymptoticModel.Intermediate:
        with np.errstate(divide="ignore", invalid="ignore"):
            log_term = np.where(t > 0, np.log(np.where(t > 0, p.b_tilde * t, 1.0)), 0.0)
        return _out(1.0 - t / 4 + 1j * t / TWO_PI * (euler_gamma() + log_term - 1.0))
    if model is AsymptoticModel.LargeKM0:
        a = p.b_tilde - np.log(p.b_tilde * t) / TWO_PI
        _guard_denominator(a, prec, "b_tilde - ln(b_tilde tau)/2pi")
        return _out(np.exp(-t / 2) + np.exp(1j * p.b_tilde * t) / (TWO_PI * 1j * t * a**2))
    if model is AsymptoticModel.AppendixAExact:
        return appendix_a_exact(t, p)
    if model is AsymptoticModel.GeneralThreeTerm:
        e, km, sh = three_term_components(t, p, prec)
        return _out(np.asarray(e) + km + sh)
    if model is AsymptoticModel.KnightMilonniIntegral:
        if t.ndim == 0:
            return knight_milonni_integral(float(t), p, prec=prec)
        return np.array([knight_milonni_integral(float(v), p, prec=prec) for v in t.ravel()]).reshape(t.shape)
    if model is AsymptoticModel.KnightMilonniAsymptote:
        db = p.lamb_shift
        return _out(np.exp(-t / 2 + 1j * db * t)
                    - np.exp(1j * p.b_A * t) / (TWO_PI * p.b_A * (p.b_A * t) ** 2))
    raise UnsupportedKindError(f"unknown model {model!r}")


def appendix_a_exact(tau, p: Params):
    """Amplitude from integrating the large-time kernel against ``e^{-x/2}`` in closed form.

    Valid for ``tau > 1/b_tilde``; the E1 arguments always have a nonzero
    imaginary part, so the principal branch is never crossed.
    """
    t = np.asarray(tau, dtype=float)
    b = p.b_tilde
    if np.any(t <= 1.0 / b):
        raise DomainError("the closed form needs tau > 1/b_tilde")
    damp = np.exp(-t / 2)
    val = (np.exp(-t / 2 + 1 / (2 * b))
           - exp_integral_e1(-(0.5 + 1j * b) * t) * damp / (TWO_PI * b)
           + exp_integral_e1(-(1 / (2 * b) + 1j)) * damp / (TWO_PI * b))
    return _out(val)


# ---------------------------------------------------------------- Gauss-Laguerre


_LAG_CACHE: dict = {}


def _laguerre(order):
    if order not in _LAG_CACHE:
        _LAG_CACHE[order] = roots_laguerre(order)
    return _LAG_CACHE[order]


def _split_laguerre(g, order):
    """``int_0^inf e^{-s} g(s) ds`` with ``s = e^{-y}`` on [0, 1] and ``s = 1 + y`` beyond.

    The substitution turns ``ln s`` behaviour at the origin into a smooth
    function of ``y`` under an exponential weight.
    """
    x, w = _laguerre(order)
    # nodes beyond ~745 underflow to s = 0; their weights are negligible
    keep = x < 700.0
    s0 = np.exp(-x[keep])
    head = np.sum(w[keep] * np.exp(-s0) * g(s0))
    tail = math.exp(-1.0) * np.sum(w * g(1.0 + x))
    return head + tail


def laguerre_log_quad(g, order: int = 64, prec: PrecisionConfig = DOUBLE, *, adaptive_fallback=True):
    """Integrate ``int_0^inf e^{-s} g(s) ds`` for integrands with ``ln s`` behaviour.

    Uses the split Gauss-Laguerre rule at ``order`` and ``2 order``; if they
    disagree beyond ``rel_tol`` an mpmath tanh-sinh quadrature is tried.

    Returns
    -------
    complex
        The ``2 order`` result (or the adaptive one).

    Raises
    ------
    ConvergenceError
        If neither route meets the tolerance.
    """
    if order < 2:
        raise DomainError("quadrature order must be >= 2")
    lo = _split_laguerre(g, order)
    hi = _split_laguerre(g, 2 * order)
    scale = max(abs(hi), 1e-300)
    if abs(hi - lo) <= prec.rel_tol * scale + 1e-300:
        return complex(hi)
    if not adaptive_fallback:
        raise ConvergenceError(
            f"Gauss-Laguerre orders {order} and {2 * order} disagree by {abs(hi - lo) / scale:.2e} (relative)")

    def f(s):
        return mpmath.exp(-s) * complex(g(np.array([float(s)]))[0])

    val, err = mpmath.quad(f, [0, 1e-12, 1e-6, 1e-3, 1, 10, 50, mpmath.inf], error=True)
    val = complex(val)
    if float(err) > 10 * prec.rel_tol * max(abs(val), 1e-300) and abs(val - hi) > prec.rel_tol * scale:
        raise ConvergenceError(
            f"quadrature did not converge: Laguerre spread {abs(hi - lo):.2e}, adaptive error {float(err):.2e}")
    return val


# ---------------------------------------------------------------- Knight-Milonni


def knight_milonni_integral(tau: float, p: Params, quad_order: int = 64,
                            prec: PrecisionConfig = DOUBLE) -> complex:
    """Amplitude from the two-term x-integral of the Knight-Milonni form.

    Substitutes ``s = Lambda b_A tau x`` so that the weight becomes
    ``e^{-s}`` and integrates with :func:`laguerre_log_quad`; the shifted
    exponential ``e^{-tau/2 + i db tau}`` with ``db = ln(Lambda-1)/2pi`` is
    added.  The formula is used exactly as printed, including its signs.

    Raises
    ------
    DomainError
        For ``tau <= 0`` or ``quad_order < 32``.
    ConvergenceError
        If successive quadrature orders disagree beyond ``rel_tol``.
    """
    if not tau > 0:
        raise DomainError("tau must be positive")
    if quad_order < 32:
        raise DomainError("quad_order must be >= 32")
    b, lam = p.b_A, p.Lambda
    S = lam * b * tau

    def g(s):
        x = s / S
        lx = np.log(x)
        d1 = x - 1j / lam + 1j * x / (2 * b) - x / (TWO_PI * b) * (lx - 0.5j * math.pi)
        d2 = x - 1j / lam - x / (TWO_PI * b) * (lx + 0.5j * math.pi)
        return 1 / d1 - 1 / d2

    integral = laguerre_log_quad(g, quad_order, prec) / S
    db = p.lamb_shift
    return complex(cmath.exp(-tau / 2 + 1j * db * tau) - cmath.exp(1j * b * tau) / (TWO_PI * 1j) * integral)


# ---------------------------------------------------------------- sheet functions


@dataclass(frozen=True)
class SheetFunction:
    """``F_sheet(u) = u - b + g(u) [ (log(u - W) - log u)/2pi + i sheet ]``.

    ``g(u) = 1`` gives the M functions (n = 0), ``g(u) = u / scale`` the N
    functions (n = 1).  Logs are principal, so the cut lies on ``[0, W]``.
    """

    b: float
    W: float
    scale: float | None = None

    def _g(self, u):
        return (1.0, 0.0) if self.scale is None else (u / self.scale, 1.0 / self.scale)

    def _check(self, u):
        u = np.asarray(u, dtype=complex)
        if np.any(u == 0) or np.any(u == self.W):
            raise DomainError("sheet functions are singular at the branch points 0 and W")
        return u

    def value(self, u, sheet: int):
        if sheet not in (0, 1):
            raise DomainError("sheet must be 0 or 1")
        u = self._check(u)
        g, _ = self._g(u)
        val = u - self.b + g * ((np.log(u - self.W) - np.log(u)) / TWO_PI + 1j * sheet)
        return _out(val)

    def sheet_gap(self, u):
        """``(F_1(u) - F_0(u)) / i``, i.e. ``g(u)``."""
        u = np.asarray(u, dtype=complex)
        return _out(np.ones_like(u) if self.scale is None else u / self.scale)

    def derivative(self, u, sheet: int):
        if sheet not in (0, 1):
            raise DomainError("sheet must be 0 or 1")
        u = self._check(u)
        g, dg = self._g(u)
        logs = (np.log(u - self.W) - np.log(u)) / TWO_PI + 1j * sheet
        val = 1.0 + dg * logs + g * (1.0 / (u - self.W) - 1.0 / u) / TWO_PI
        return _out(val)


def sheet_function(p: Params, *, consistent: bool = True, order: int | None = None) -> SheetFunction:
    """Sheet function for ``p``.

    Parameters
    ----------
    consistent : bool
        True builds the function whose inverse Laplace transform is exactly
        the solution of the regularized Volterra equation: shift
        ``b_tilde + ln(Lambda_tilde - 1)/2pi`` and, for n = 1, scale
        ``b_tilde``.  False uses the printed forms with ``b_A`` in both
        places.  The cut end ``W = Lambda_c`` is the same in both.
    order : int, optional
        Kernel power; defaults to ``p.n``.
    """
    n = p.n if order is None else order
    W = p.lambda_tilde_used * p.b_tilde
    if consistent:
        b = p.b_tilde + math.log(p.lambda_tilde_used - 1.0) / TWO_PI
        scale = p.b_tilde
    else:
        b = p.b_A
        W = p.Lambda_c
        scale = p.b_A
    return SheetFunction(b=b, W=W, scale=scale if n == 1 else None)


def m_functions(u, p: Params, sheet: int, *, consistent: bool = False):
    """``M_0(u) = u - b_A + [log(u - Lambda_c) - log u]/2pi`` and ``M_1 = M_0 + i``.

    Raises
    ------
    DomainError
        At the branch points ``u = 0`` and ``u = Lambda_c``, or for a sheet
        other than 0 and 1.
    """
    return sheet_function(p, consistent=consistent, order=0).value(u, sheet)


def n_functions(u, p: Params, sheet: int, *, consistent: bool = False):
    """``N_0(u) = u - b_A + (u/2pi b_A)[log(u - Lambda_c) - log u]`` and ``N_1 = N_0 + i u/b_A``."""
    return sheet_function(p, consistent=consistent, order=1).value(u, sheet)


def find_pole(F: SheetFunction, seed: complex, sheet: int = 1, *, max_iter: int = 60,
              tol: float = 1e-13) -> tuple[complex, complex]:
    """Newton iteration for a zero of ``F`` on ``sheet``.

    Returns
    -------
    (u, Z)
        The zero and the residue ``Z = 1/F'(u)``.

    Raises
    ------
    ConvergenceError
        If Newton diverges or the final residual exceeds ``1e-10 (1 + |u|)``.
    """
    u = complex(seed)
    for _ in range(max_iter):
        step = F.value(u, sheet) / F.derivative(u, sheet)
        u -= step
        if not cmath.isfinite(u):
            break
        if abs(step) <= tol * (1 + abs(u)):
            break
    if not cmath.isfinite(u) or abs(F.value(u, sheet)) > 1e-10 * (1 + abs(u)):
        raise ConvergenceError(f"Newton did not converge to a zero (from seed {seed})")
    return u, 1.0 / F.derivative(u, sheet)


def real_axis_zero(F: SheetFunction, *, max_iter: int = 100) -> tuple[float, complex]:
    """Real zero of the sheet-0 function just above the cut end ``W``.

    Solved for ``v = ln(u - W)``, since ``u - W`` is exponentially small.

    Returns
    -------
    (u0, Z0)

    Raises
    ------
    ConvergenceError
        If no zero is found.
    """
    W, b = F.W, F.b
    # F(u) = u - b + g(u) ln((u-W)/u)/2pi = 0  ->  v = ln(u) - 2pi (u - b)/g(u)
    g = (lambda u: 1.0) if F.scale is None else (lambda u: u / F.scale)
    v = math.log(W) - TWO_PI * (W - b) / g(W)
    for _ in range(max_iter):
        e = math.exp(v)
        u = W + e
        r = v - math.log(u) + TWO_PI * (u - b) / g(u)
        # d/dv of the residual
        if F.scale is None:
            dr = 1 - e / u + TWO_PI * e
        else:
            dr = 1 - e / u + TWO_PI * F.scale * e * b / u**2
        step = r / dr
        v -= step
        if abs(step) < 1e-15 * max(1.0, abs(v)):
            break
    else:
        raise ConvergenceError("real-axis zero iteration did not converge")
    e = math.exp(v)
    u0 = W + e
    # F'(u0) = 1 + g'(u) L/2pi + g(u)(1/e - 1/u)/2pi with L = ln(e/u)
    L = v - math.log(u0)
    if F.scale is None:
        d = 1 + (1 / e - 1 / u0) / TWO_PI
    else:
        d = 1 + L / (TWO_PI * F.scale) + (u0 / F.scale) * (1 / e - 1 / u0) / TWO_PI
    return u0, complex(1.0 / d)


# ---------------------------------------------------------------- branch-cut integrals


@dataclass
class ContourPieces:
    """Ingredients of the contour representation at one ``tau``.

    For n = 1 the integrals ``I1``, ``I2`` are the J pair (see :attr:`J1`).
    ``pole_u0`` and ``residue_Z0`` are None when ``exp(-2 pi Lambda_c)``
    is not representable; ``z0_included`` records the choice.
    """

    tau: float
    n: int
    pole_u1: complex
    residue_Z1: complex
    pole_u0: float | None
    residue_Z0: complex | None
    I1: complex
    I2: complex
    reconstructed_c: complex
    z0_included: bool = False
    consistent: bool = True
    notes: list = field(default_factory=list)

    @property
    def J1(self) -> complex:
        return self.I1

    @property
    def J2(self) -> complex:
        return self.I2


def _pole_seed(p):
    return complex(p.b_tilde, -0.5)


def branch_cut_integrals(tau: float, p: Params, quad_order: int = 64, *, consistent: bool = True,
                         prec: PrecisionConfig = DOUBLE) -> ContourPieces:
    """Evaluate the cut integrals, poles and reconstructed amplitude at ``tau``.

    Parameters
    ----------
    tau : float
    p : Params
        ``p.n`` selects the M (n = 0) or N (n = 1) functions.
    quad_order : int
        Split Gauss-Laguerre order, checked against twice the order.
    consistent : bool
        See :func:`sheet_function`.  The default reproduces the Volterra
        solution; False uses the printed forms.

    Raises
    ------
    ConvergenceError
        Newton divergence or quadrature disagreement.
    """
    if not tau > 0:
        raise DomainError("tau must be positive")
    F = sheet_function(p, consistent=consistent)
    W = F.W
    u1, Z1 = find_pole(F, _pole_seed(p), sheet=1)

    # 1/F0 - 1/F1 = i g(u) / (F0 F1) avoids cancelling two O(1/b) terms
    def g1(s):
        u = -1j * s / tau
        return 1j * F.sheet_gap(u) / (F.value(u, 0) * F.value(u, 1))

    def g2(s):
        u = W - 1j * s / tau
        return -1j * F.sheet_gap(u) / (F.value(u, 0) * F.value(u, 1))

    I1 = laguerre_log_quad(g1, quad_order, prec)
    I2 = laguerre_log_quad(g2, quad_order, prec)

    b = p.b_tilde
    c = (Z1 * cmath.exp(-1j * (u1 - b) * tau)
         - cmath.exp(1j * b * tau) * I1 / (TWO_PI * tau)
         - cmath.exp(1j * (b - W) * tau) * I2 / (TWO_PI * tau))
    notes = []
    u0 = Z0 = None
    included = TWO_PI * W < _Z0_EXPONENT_LIMIT
    if included:
        u0, Z0 = real_axis_zero(F)
        c += Z0 * cmath.exp(-1j * (u0 - b) * tau)
    else:
        notes.append("real-axis pole dropped: exp(-2 pi Lambda_c) underflows")
    return ContourPieces(tau=float(tau), n=p.n, pole_u1=u1, residue_Z1=Z1, pole_u0=u0, residue_Z0=Z0,
                         I1=I1, I2=I2, reconstructed_c=complex(c), z0_included=included,
                         consistent=consistent, notes=notes)


def flat_cut_integral_study(tau: float, p: Params, quad_order: int = 64) -> dict:
    """Compare the full ``I1`` with its large-``tau`` forms (n = 0).

    Returns a dict with the full integral ``I1``, ``I1_log_form`` (the
    integral with ``a + ln s/2pi`` denominators), the one-term estimate
    ``i/a^2`` with ``a = b_tilde - ln(b_tilde tau)/2pi``, and the ratio
    ``|Re I1| / |Im I1|``.
    """
    pieces = branch_cut_integrals(tau, p.with_n(0) if p.n else p, quad_order)
    a = p.b_tilde - math.log(p.b_tilde * tau) / TWO_PI

    def g(s):
        ls = np.log(s) / TWO_PI
        return -(1 / (a + ls + 0.25j) - 1 / (a + ls - 0.75j))

    log_form = laguerre_log_quad(g, quad_order)
    estimate = 1j / a**2
    I1 = pieces.I1
    return {
        "tau": tau,
        "a": a,
        "I1": I1,
        "I1_log_form": log_form,
        "I1_estimate": estimate,
        "modulus_ratio": abs(I1) / abs(estimate),
        "re_over_im": abs(I1.real) / abs(I1.imag),
    }


def linear_cut_integral_study(tau: float, p: Params, quad_order: int = 64) -> dict:
    """Compare ``J1``, ``J2`` (n = 1) with their large-``tau`` forms.

    ``J2`` is evaluated three ways: the full integral, the log-form
    approximation keeping ``ln s/2pi``, and the same without it.  The
    reference values are ``1/(b_A^3 tau)`` and ``1/(i Lambda a^2)`` with
    ``a = b_A - ln(Lambda_c tau)/2pi``.
    """
    p1 = p.with_n(1) if p.n != 1 else p
    pieces = branch_cut_integrals(tau, p1, quad_order)
    a = p.b_A - math.log(p.Lambda_c * tau) / TWO_PI
    lam = p.Lambda
    delta = 1 + math.log(p.Lambda_c) / (TWO_PI * p.b_A)
    bt = p.b_A * tau

    def j1_series(s):
        return s / (1 + 1j * s * delta / bt) ** 2

    J1_series = laguerre_log_quad(j1_series, quad_order) / (p.b_A**3 * tau)

    def j2_log(s):
        ls = np.log(s) / TWO_PI
        return 1 / (lam * (a + 0.75j + ls)) - 1 / (lam * (a - 0.25j + ls))

    def j2_flat(s):
        s = np.asarray(s)
        return np.full(s.shape, 1 / (lam * (a + 0.75j)) - 1 / (lam * (a - 0.25j)))

    J2_log = laguerre_log_quad(j2_log, quad_order)
    J2_flat = complex(j2_flat(np.ones(1))[0])
    ref1 = 1 / (p.b_A**3 * tau)
    ref2 = 1 / (1j * lam * a**2)
    return {
        "tau": tau,
        "a": a,
        "J1": pieces.J1,
        "J1_series_form": J1_series,
        "J1_estimate": ref1,
        "J1_rel_dev": abs(pieces.J1 / ref1 - 1),
        "J2": pieces.J2,
        "J2_with_log": J2_log,
        "J2_without_log": J2_flat,
        "J2_log_term_effect": abs(J2_log - J2_flat) / abs(J2_log),
        "J2_estimate": ref2,
        "J2_rel_dev": abs(pieces.J2 / ref2 - 1),
    }


# ---------------------------------------------------------------- crossovers


@dataclass
class CrossoverTimes:
    """Crossover times of the exponential and the algebraic corrections.

    Attributes
    ----------
    tau_star : float
        Time where the ``1/tau`` correction overtakes ``e^{-tau/2}``.
    tau_star_sh : float or None
        Same for the cutoff-suppressed (Seke-Herfort) term; None if the
        defining equation has no contracting root.
    tau_ln : float or None
        ``e^{2 pi b_tilde}/b_tilde``; None on overflow.
    log_tau_ln : float
        Natural log of ``tau_ln``, always available.
    tau_ln_overflow : bool
    dominant : dict
        Which correction of the three-term form is larger at each root.
    """

    tau_star: float
    tau_star_sh: float | None
    tau_ln: float | None
    log_tau_ln: float
    tau_ln_overflow: bool
    residual_star: float = 0.0
    residual_star_sh: float = 0.0
    dominant: dict = field(default_factory=dict)

    def as_dict(self) -> dict:
        return {
            "tau_star": self.tau_star,
            "tau_star_sh": self.tau_star_sh,
            "tau_ln": self.tau_ln,
            "log_tau_ln": self.log_tau_ln,
            "tau_ln_overflow": self.tau_ln_overflow,
            "residual_star": self.residual_star,
            "residual_star_sh": self.residual_star_sh,
            "dominant_correction": self.dominant,
        }


def _fixed_point(g, dg, seed, tol=1e-12, max_iter=200):
    """Root of ``tau = g(tau)``: fixed-point iteration, then Newton polish.

    Raises ConvergenceError if the map is not contracting at the root.
    """
    t = seed
    for _ in range(max_iter):
        if not (t > 0 and math.isfinite(t)):
            raise ConvergenceError("crossover iteration left the domain tau > 0")
        t_new = g(t)
        if abs(t_new - t) < 1e-6:
            t = t_new
            break
        t = t_new
    else:
        raise ConvergenceError("crossover fixed-point iteration did not converge")
    for _ in range(20):
        step = (t - g(t)) / (1 - dg(t))
        t -= step
        if abs(step) < tol * max(1.0, t):
            break
    if abs(dg(t)) >= 1:
        raise ConvergenceError("crossover map is not contracting at the root")
    return t


def _star_map(b, lam, W):
    """``tau -> 2 ln(2 pi lam tau (b - ln(W tau)/2pi)^2)`` and its derivative."""

    def a(t):
        return b - math.log(W * t) / TWO_PI

    def g(t):
        at = a(t)
        if at <= 0:
            raise ConvergenceError("logarithmic denominator turned non-positive")
        return 2 * (math.log(TWO_PI * lam * t) + 2 * math.log(at))

    def dg(t):
        return 2 / t - 2 / (math.pi * t * a(t))

    return g, dg


def crossover_times(p: Params) -> CrossoverTimes:
    """Solve both crossover equations and evaluate ``tau_ln``.

    ``tau_star``: ``e^{-tau/2} = 1/(2 pi tau (b_tilde - ln(b_tilde tau)/2pi)^2)``.
    ``tau_star_sh``: ``e^{-tau/2} = 1/(2 pi Lambda tau (b_A - ln(Lambda_c tau)/2pi)^2)``.
    Both are written as ``tau = g(tau)`` and iterated from a seed on the
    large-``tau`` side, where the map contracts.

    Raises
    ------
    ConvergenceError
        If the ``tau_star`` iteration fails.
    """
    g, dg = _star_map(p.b_tilde, 1.0, p.b_tilde)
    seed = max(10.0, 2 * math.log(TWO_PI * p.b_tilde**2) + 10)
    t_star = _fixed_point(g, dg, seed)
    res_star = abs(t_star - g(t_star))

    g2, dg2 = _star_map(p.b_A, p.Lambda, p.Lambda_c)
    seed2 = max(10.0, 2 * math.log(TWO_PI * p.Lambda * p.b_A**2) + 10)
    try:
        t_sh = _fixed_point(g2, dg2, seed2)
        res_sh = abs(t_sh - g2(t_sh))
    except ConvergenceError:
        t_sh, res_sh = None, float("nan")

    log_ln = TWO_PI * p.b_tilde - math.log(p.b_tilde)
    overflow = log_ln > math.log(np.finfo(float).max)
    tau_ln = None if overflow else math.exp(log_ln)

    dominant = {}
    for name, t in (("tau_star", t_star), ("tau_star_sh", t_sh)):
        if t is None:
            continue
        try:
            _, km, sh = three_term_components(t, p)
            dominant[name] = "km" if abs(km) >= abs(sh) else "seke_herfort"
        except DomainError:
            dominant[name] = "undefined"
    return CrossoverTimes(tau_star=t_star, tau_star_sh=t_sh, tau_ln=tau_ln, log_tau_ln=log_ln,
                          tau_ln_overflow=overflow, residual_star=res_star, residual_star_sh=res_sh,
                          dominant=dominant)


def dominant_correction(tau, p: Params) -> str:
    """``"km"`` or ``"seke_herfort"``: the larger algebraic term of the three-term form at ``tau``."""
    _, km, sh = three_term_components(tau, p)
    return "km" if abs(km) >= abs(sh) else "seke_herfort"


def local_slope(tau, values) -> float:
    """Least-squares slope of ``ln values`` against ``ln tau``."""
    x = np.log(np.asarray(tau, dtype=float))
    y = np.log(np.asarray(values, dtype=float))
    return float(np.polyfit(x, y, 1)[0])
