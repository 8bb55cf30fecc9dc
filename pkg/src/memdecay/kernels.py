"""Regularized memory kernels, their regime approximations and panel moments.

All quantities are dimensionless (Gamma_0 = 1).  With ``A = (Lambda_tilde - 1)
b_tilde`` the flat-rate kernel is

    kappa0(tau) = -[Si(A tau) + Si(b_tilde tau)]/2pi
                  - i [Ci(A tau) - Ci(b_tilde tau)]/2pi,

with ``kappa0(0) = -i ln(Lambda_tilde - 1)/2pi``.  The mass-renormalized
kernel adds ``(exp(-i A tau) - exp(i b_tilde tau)) / (2 pi b_tilde tau)``.

For tau > 0 the flat-rate kernel has the equivalent form

    kappa0(tau) = -1/2 + (i/2pi) [E1(i A tau) - E1(-i b_tilde tau)],

which gives closed-form antiderivatives.  :func:`panel_moments` uses them to
integrate the kernel exactly against linear functions, the building block of
the product-trapezoidal solver.
"""

from __future__ import annotations

import enum
import math

import mpmath
import numpy as np
from scipy import special as sps

from .errors import DomainError, UnsupportedKindError
from .params import Params
from .special import DOUBLE, PrecisionConfig, cos_integral, euler_gamma, sin_integral

__all__ = [
    "KernelKind",
    "kappa0_reg",
    "kappa1_reg",
    "kappa1_pre_renormalized",
    "kernel_regime",
    "k_differential",
    "kernel_value",
    "panel_moments",
    "panel_moments_mp",
    "SERIES_THRESHOLD",
]

TWO_PI = 2.0 * math.pi

#: Below this value of ``A tau`` removable singularities are handled by series.
SERIES_THRESHOLD = 1e-3
_SERIES_TERMS = 6


class KernelKind(enum.Enum):
    """Selector for a kernel or one of its regime approximations."""

    Kappa0Reg = "Kappa0Reg"
    Kappa1Reg = "Kappa1Reg"
    Kappa0Small = "Kappa0Small"
    Kappa0Intermediate = "Kappa0Intermediate"
    Kappa0Large = "Kappa0Large"
    Kappa1Large = "Kappa1Large"
    K0Differential = "K0Differential"
    K1Differential = "K1Differential"

    @classmethod
    def for_order(cls, n: int) -> "KernelKind":
        """Exact regularized kernel for kernel power ``n``."""
        return cls.Kappa1Reg if n == 1 else cls.Kappa0Reg

    @property
    def order(self) -> int:
        return 1 if self in (KernelKind.Kappa1Reg, KernelKind.Kappa1Large, KernelKind.K1Differential) else 0


def _rates(p: Params):
    lt = p.lambda_tilde_used
    return (lt - 1.0) * p.b_tilde, p.b_tilde, lt


def _as_tau(tau):
    t = np.asarray(tau, dtype=float)
    if np.any(t < 0) or not np.all(np.isfinite(t)):
        raise DomainError("kernels are defined for finite tau >= 0")
    return t


def _scalar(out):
    return out[()] if np.ndim(out) == 0 else out


# ---------------------------------------------------------------- kernels


def _kappa0_series(t, A, b):
    # Si(x) = sum (-1)^k x^(2k+1) / ((2k+1)(2k+1)!)
    # Ci(A t) - Ci(b t) = ln(A/b) + sum_{k>=1} (-1)^k (A^2k - b^2k) t^2k / (2k (2k)!)
    si = np.zeros_like(t)
    ci = np.full_like(t, math.log(A / b))
    for k in range(_SERIES_TERMS // 2 + 1):
        m = 2 * k + 1
        si += (-1) ** k * ((A * t) ** m + (b * t) ** m) / (m * math.factorial(m))
    for k in range(1, _SERIES_TERMS // 2 + 1):
        m = 2 * k
        ci += (-1) ** k * ((A * t) ** m - (b * t) ** m) / (m * math.factorial(m))
    return -si / TWO_PI - 1j * ci / TWO_PI


def _correction_series(t, A, b):
    # (exp(-iAt) - exp(ibt)) / (2 pi b t) = sum_{k>=1} [(-iA)^k - (ib)^k] t^(k-1) / k! / (2 pi b)
    out = np.zeros(t.shape, dtype=complex)
    for k in range(1, _SERIES_TERMS + 1):
        out += ((-1j * A) ** k - (1j * b) ** k) * t ** (k - 1) / math.factorial(k)
    return out / (TWO_PI * b)


def kappa0_reg(tau, p: Params, prec: PrecisionConfig = DOUBLE):
    """Flat-rate regularized kernel in Si/Ci form.

    Parameters
    ----------
    tau : float or array_like
        Non-negative dimensionless time(s).
    p : Params
    prec : PrecisionConfig, optional
        Extended precision returns mpmath values.

    Returns
    -------
    complex or ndarray
    """
    A, b, _ = _rates(p)
    if prec.extended:
        return _kappa_mp(tau, p, prec, order=0)
    t = _as_tau(tau)
    out = np.empty(t.shape, dtype=complex)
    small = A * t < SERIES_THRESHOLD
    if np.any(small):
        out[small] = _kappa0_series(t[small], A, b)
    big = ~small
    if np.any(big):
        tb = t[big]
        out[big] = (-(sin_integral(A * tb) + sin_integral(b * tb)) / TWO_PI
                    - 1j * (cos_integral(A * tb) - cos_integral(b * tb)) / TWO_PI)
    return _scalar(out)


def kappa1_reg(tau, p: Params, prec: PrecisionConfig = DOUBLE):
    """Mass-renormalized kernel: ``kappa0 + (e^{-iA tau} - e^{i b tau}) / (2 pi b tau)``.

    At ``tau = 0`` the correction takes its limit ``-i Lambda_tilde / 2pi``.
    """
    A, b, _ = _rates(p)
    if prec.extended:
        return _kappa_mp(tau, p, prec, order=1)
    t = _as_tau(tau)
    corr = np.empty(t.shape, dtype=complex)
    small = A * t < SERIES_THRESHOLD
    corr[small] = _correction_series(t[small], A, b)
    tb = t[~small]
    corr[~small] = (np.exp(-1j * A * tb) - np.exp(1j * b * tb)) / (TWO_PI * b * tb)
    return _scalar(kappa0_reg(t, p) + corr)


def kappa1_pre_renormalized(tau, p: Params):
    """Debug form of the n=1 kernel before mass renormalization.

    Uses the shifted frequency ``b_prime = b_A - Lambda/2pi`` in place of
    ``b_tilde`` and the bare cutoff ``Lambda`` in both the flat-rate part and
    the correction, and keeps the flat-rate part untransformed (its value at
    zero vanishes).  Not used by any solver path.
    """
    t = _as_tau(tau)
    bp = p.b_prime
    if bp <= 0:
        raise DomainError("b_prime <= 0: the linear cutoff shift exceeds the transition frequency")
    A = (p.Lambda - 1.0) * bp
    out = np.empty(t.shape, dtype=complex)
    small = A * t < SERIES_THRESHOLD
    out[small] = _kappa0_series(t[small], A, bp) + 1j * math.log(p.Lambda - 1.0) / TWO_PI
    out[small] += _correction_series(t[small], A, bp)
    tb = t[~small]
    flat = (-(sin_integral(A * tb) + sin_integral(bp * tb)) / TWO_PI
            - 1j * (cos_integral(A * tb) - cos_integral(bp * tb)) / TWO_PI
            + 1j * math.log(p.Lambda - 1.0) / TWO_PI)
    out[~small] = flat + (np.exp(-1j * A * tb) - np.exp(1j * bp * tb)) / (TWO_PI * bp * tb)
    return _scalar(out)


def _kappa_mp(tau, p, prec, order):
    A, b, lt = _rates(p)

    def one(t):
        t = mpmath.mpf(t)
        if t < 0:
            raise DomainError("kernels are defined for tau >= 0")
        Am, bm = mpmath.mpf(A), mpmath.mpf(b)
        if t == 0:
            val = -1j * mpmath.log(Am / bm) / (2 * mpmath.pi)
            if order == 1:
                val += -1j * mpmath.mpf(lt) / (2 * mpmath.pi)
            return mpmath.mpc(val)
        val = (-(mpmath.si(Am * t) + mpmath.si(bm * t)) / (2 * mpmath.pi)
               - 1j * (mpmath.ci(Am * t) - mpmath.ci(bm * t)) / (2 * mpmath.pi))
        if order == 1:
            val += (mpmath.expj(-Am * t) - mpmath.expj(bm * t)) / (2 * mpmath.pi * bm * t)
        return mpmath.mpc(val)

    with prec.context():
        if np.ndim(tau) == 0:
            return one(tau)
        out = np.empty(np.shape(tau), dtype=object)
        for idx, t in np.ndenumerate(np.asarray(tau, dtype=object)):
            out[idx] = one(t)
        return out


def kernel_value(kind: KernelKind, tau, p: Params, prec: PrecisionConfig = DOUBLE):
    """Dispatch to the exact kernel selected by ``kind``."""
    if kind is KernelKind.Kappa0Reg:
        return kappa0_reg(tau, p, prec)
    if kind is KernelKind.Kappa1Reg:
        return kappa1_reg(tau, p, prec)
    if kind in (KernelKind.K0Differential, KernelKind.K1Differential):
        return k_differential(kind, tau, p)
    return kernel_regime(kind, tau, p)


def kernel_regime(kind: KernelKind, tau, p: Params):
    """Closed-form regime approximation of the kernel.

    Parameters
    ----------
    kind : KernelKind
        One of ``Kappa0Small``, ``Kappa0Intermediate``, ``Kappa0Large``,
        ``Kappa1Large``.  The window of validity is not enforced.
    tau : float or array_like
    p : Params

    Raises
    ------
    UnsupportedKindError
        For the exact and differential kernels.
    """
    t = np.asarray(tau, dtype=float)
    b = p.b_tilde
    if kind is KernelKind.Kappa0Small:
        out = -p.Lambda * b * t / TWO_PI - 1j * math.log(p.Lambda - 1.0) / TWO_PI + 0j * t
    elif kind is KernelKind.Kappa0Intermediate:
        if np.any(t <= 0):
            raise DomainError("intermediate kernel needs tau > 0")
        out = -0.25 + 1j * (euler_gamma() + np.log(b * t)) / TWO_PI
    elif kind is KernelKind.Kappa0Large:
        out = -0.5 + np.exp(1j * b * t) / (TWO_PI * b * t)
    elif kind is KernelKind.Kappa1Large:
        out = -0.5 + np.exp(-1j * p.fast_rate * t) / (TWO_PI * b * t)
    else:
        raise UnsupportedKindError(f"{kind.value} is not a regime approximation; use the dedicated function")
    return _scalar(np.asarray(out, dtype=complex))


def _phi1(z):
    """``(1 - exp(-z)) / z`` with its series near zero."""
    z = np.asarray(z, dtype=complex)
    out = np.empty_like(z)
    sm = np.abs(z) < 1e-3
    zs = z[sm]
    out[sm] = 1 - zs / 2 + zs**2 / 6 - zs**3 / 24 + zs**4 / 120
    zl = z[~sm]
    out[~sm] = -np.expm1(-zl) / zl
    return out


_PHI2_COEF = [(-1) ** k * (k + 1) / math.factorial(k + 2) for k in range(16)]


def _phi2(z):
    """``(1 - exp(-z)(1 + z)) / z^2`` with its series near zero."""
    z = np.asarray(z, dtype=complex)
    out = np.empty_like(z)
    sm = np.abs(z) < 0.1
    zs = z[sm]
    acc = np.zeros_like(zs)
    for c in reversed(_PHI2_COEF):
        acc = acc * zs + c
    out[sm] = acc
    zl = z[~sm]
    out[~sm] = (-np.expm1(-zl) - zl * np.exp(-zl)) / zl**2
    return out


def k_differential(kind: KernelKind, tau, p: Params):
    """Frequency-integral kernel ``-(1/2pi) int_0^Lc (w/b_A)^n exp(-i(w - b_tilde) tau) dw``.

    Parameters
    ----------
    kind : KernelKind
        ``K0Differential`` or ``K1Differential``.
    tau : float or array_like
        Non-negative times; small ``Lambda_c tau`` uses the series branch.

    Notes
    -----
    With ``L = Lambda_c``: n=0 gives ``-(L/2pi) e^{i b tau} phi1(i L tau)`` and
    n=1 gives ``-(L^2/(2 pi b_A)) e^{i b tau} phi2(i L tau)``, where phi1 and
    phi2 are the first two moments of ``exp(-z s)`` on [0, 1].  Their series
    make the ``tau -> 0`` limits ``-L/2pi`` and ``-L^2/(4 pi b_A)`` exact.
    """
    t = _as_tau(tau)
    L = p.Lambda_c
    phase = np.exp(1j * p.b_tilde * t)
    if kind is KernelKind.K0Differential:
        out = -(L / TWO_PI) * phase * _phi1(1j * L * t)
    elif kind is KernelKind.K1Differential:
        out = -(L * L / (TWO_PI * p.b_A)) * phase * _phi2(1j * L * t)
    else:
        raise UnsupportedKindError(f"{kind.value} is not a differential kernel")
    return _scalar(out)


# ---------------------------------------------------------------- moments

_GL_X, _GL_W = np.polynomial.legendre.leggauss(8)
_GL_X = 0.5 * (_GL_X + 1.0)
_GL_W = 0.5 * _GL_W
# panels closer to the origin than this many widths use the combined closed form
_NEAR_PANELS = 8.0


def _pieces(p: Params, order: int):
    """Decompose the kernel (minus its constant -1/2) into E1 and exp(-cs)/s pieces.

    Returns a list of ``(type, coefficient, c, rate)`` with type ``"e1"`` for
    ``coef * E1(c s)`` and ``"pole"`` for ``coef * exp(-c s)/s``.
    """
    A, b, _ = _rates(p)
    out = [("e1", 1j / TWO_PI, 1j * A, A), ("e1", -1j / TWO_PI, -1j * b, b)]
    if order == 1:
        beta = 1.0 / (TWO_PI * b)
        out += [("pole", beta, 1j * A, A), ("pole", -beta, -1j * b, b)]
    return out


def _piece_cumulative(kind, coef, c, u):
    """Antiderivatives of a single piece and of ``s`` times it (log-divergent ones up to a constant)."""
    z = c * u
    if kind == "e1":
        e = sps.exp1(z)
        return coef * u * (e + _phi1(z)), coef * 0.5 * u * u * (e + _phi2(z))
    return -coef * sps.exp1(z), coef * u * _phi1(z)


def _cumulative_combined(u, p, order):
    """``G0(u) = int_0^u kappa`` and ``G1(u) = int_0^u s kappa`` for u >= 0."""
    u = np.asarray(u, dtype=float)
    g0 = -0.5 * u + 0j
    g1 = -0.25 * u * u + 0j
    pos = u > 0
    up = u[pos]
    a0 = np.zeros(up.shape, dtype=complex)
    a1 = np.zeros(up.shape, dtype=complex)
    pole_const = 0j
    for kind, coef, c, _ in _pieces(p, order):
        q0, q1 = _piece_cumulative(kind, coef, c, up)
        a0 += q0
        a1 += q1
        if kind == "pole":
            # -coef E1(cu) ~ coef (gamma + Log c + ln u): fix the constant so G0(0) = 0
            pole_const -= coef * np.log(c)
    a0 += pole_const
    g0[pos] += a0
    g1[pos] += a1
    return g0, g1


def panel_moments(a, b, p: Params, kind: KernelKind | None = None):
    """Exact moments of the kernel on panels ``[a, b]``.

    Parameters
    ----------
    a, b : array_like
        Panel end points, ``0 <= a < b``.
    p : Params
    kind : KernelKind, optional
        ``Kappa0Reg`` or ``Kappa1Reg``; defaults to the one matching ``p.n``.

    Returns
    -------
    P, L : ndarray
        ``P = int_a^b kappa(s) ds`` and ``L = int_a^b (s - a) kappa(s) ds``.

    Notes
    -----
    Panels near the origin difference the combined antiderivative, whose
    values are small there.  Farther panels split the kernel into pieces:
    pieces oscillating slowly across the panel are integrated with 8-point
    Gauss-Legendre (they are smooth away from zero), fast pieces use their
    own antiderivatives.  This avoids differencing large cumulative values.
    """
    kind = KernelKind.for_order(p.n) if kind is None else kind
    if kind not in (KernelKind.Kappa0Reg, KernelKind.Kappa1Reg):
        raise UnsupportedKindError("panel moments exist for the exact regularized kernels only")
    order = kind.order
    a = np.asarray(a, dtype=float)
    b = np.asarray(b, dtype=float)
    a, b = np.broadcast_arrays(a, b)
    w = b - a
    P = np.empty(a.shape, dtype=complex)
    L = np.empty(a.shape, dtype=complex)

    near = a < _NEAR_PANELS * w
    if np.any(near):
        an, bn = a[near], b[near]
        g0a, g1a = _cumulative_combined(an, p, order)
        g0b, g1b = _cumulative_combined(bn, p, order)
        Pn = g0b - g0a
        P[near] = Pn
        L[near] = (g1b - g1a) - an * Pn

    far = ~near
    if np.any(far):
        af, bf = a[far], b[far]
        wf = bf - af
        Pf = -0.5 * wf + 0j
        Lf = -0.25 * wf * wf + 0j
        for pkind, coef, c, rate in _pieces(p, order):
            smooth = rate * wf <= 1.0
            if np.any(smooth):
                aa, ww = af[smooth], wf[smooth]
                s = aa[:, None] + ww[:, None] * _GL_X
                if pkind == "e1":
                    f = coef * sps.exp1(c * s)
                else:
                    f = coef * np.exp(-c * s) / s
                Pf[smooth] += ww * (f @ _GL_W)
                Lf[smooth] += ww * ww * (f @ (_GL_W * _GL_X))
            rough = ~smooth
            if np.any(rough):
                aa, bb = af[rough], bf[rough]
                q0a, q1a = _piece_cumulative(pkind, coef, c, aa)
                q0b, q1b = _piece_cumulative(pkind, coef, c, bb)
                dP = q0b - q0a
                Pf[rough] += dP
                Lf[rough] += (q1b - q1a) - aa * dP
        P[far] = Pf
        L[far] = Lf
    return P, L


def panel_moments_mp(a, b, p: Params, kind: KernelKind | None = None,
                     prec: PrecisionConfig = DOUBLE):
    """Extended-precision counterpart of :func:`panel_moments` (lists of mpc).

    Uses the combined antiderivatives throughout; the extra digits absorb
    the cancellation between neighbouring cumulative values.
    """
    kind = KernelKind.for_order(p.n) if kind is None else kind
    order = kind.order
    A, bt, _ = _rates(p)
    # guard digits: neighbouring cumulative values agree to ~log10(u A / h^2) digits
    with mpmath.workdps(prec.working_digits + 20):
        Am, bm = mpmath.mpf(A), mpmath.mpf(bt)
        two_pi = 2 * mpmath.pi
        pieces = [("e1", 1j / two_pi, 1j * Am), ("e1", -1j / two_pi, -1j * bm)]
        if order == 1:
            beta = 1 / (two_pi * bm)
            pieces += [("pole", beta, 1j * Am), ("pole", -beta, -1j * bm)]
        pole_const = sum((-coef * mpmath.log(c) for kind_, coef, c in pieces if kind_ == "pole"),
                         mpmath.mpc(0))

        def phi1(z):
            return -mpmath.expm1(-z) / z

        def phi2(z):
            return (-mpmath.expm1(-z) - z * mpmath.exp(-z)) / (z * z)

        cache = {}

        def G(u):
            key = u
            if key in cache:
                return cache[key]
            um = mpmath.mpf(u)
            g0 = -um / 2
            g1 = -um * um / 4
            if um > 0:
                g0 += pole_const
                for kind_, coef, c in pieces:
                    z = c * um
                    if kind_ == "e1":
                        e = mpmath.e1(z)
                        g0 += coef * um * (e + phi1(z))
                        g1 += coef * um * um / 2 * (e + phi2(z))
                    else:
                        g0 += -coef * mpmath.e1(z)
                        g1 += coef * um * phi1(z)
            cache[key] = (mpmath.mpc(g0), mpmath.mpc(g1))
            return cache[key]

        Ps, Ls = [], []
        for aa, bb in zip(np.atleast_1d(a).tolist(), np.atleast_1d(b).tolist()):
            g0a, g1a = G(aa)
            g0b, g1b = G(bb)
            Pv = g0b - g0a
            Ps.append(Pv)
            Ls.append((g1b - g1a) - mpmath.mpf(aa) * Pv)
        return Ps, Ls
