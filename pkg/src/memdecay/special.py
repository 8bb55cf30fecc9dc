"""Sine, cosine and exponential integrals with a selectable precision backend.

Double precision goes through :mod:`scipy.special` (Cephes/AMOS style series
plus asymptotic or continued-fraction branches); extended precision goes
through :mod:`mpmath` at a configurable number of decimal digits.  Inputs may
be scalars or arrays in double mode; extended mode returns mpmath numbers
(object arrays for array input).
"""

from __future__ import annotations

from dataclasses import dataclass

import mpmath
import numpy as np
from scipy import special as sps

from .errors import ConvergenceError, DomainError

__all__ = [
    "PrecisionConfig",
    "DOUBLE",
    "sin_integral",
    "cos_integral",
    "exp_integral_e1",
    "euler_gamma",
]


@dataclass(frozen=True)
class PrecisionConfig:
    """Working precision and tolerances.

    Parameters
    ----------
    working_digits : int
        Decimal digits of working precision.  Values above 15 select the
        mpmath backend.
    abs_tol, rel_tol : float
        Tolerances used by iterative solvers and convergence checks.
    """

    working_digits: int = 15
    abs_tol: float = 1e-12
    rel_tol: float = 1e-10

    def __post_init__(self):
        if int(self.working_digits) != self.working_digits or self.working_digits < 15:
            raise DomainError("working_digits must be an integer >= 15")
        if not (self.abs_tol > 0 and self.rel_tol > 0):
            raise DomainError("abs_tol and rel_tol must be positive")

    @property
    def extended(self) -> bool:
        """True when the mpmath backend is selected."""
        return self.working_digits > 15

    def context(self):
        """Context manager setting mpmath's working precision (with guard digits)."""
        return mpmath.workdps(self.working_digits + 5)


DOUBLE = PrecisionConfig()


def _map_mp(func, x, prec):
    with prec.context():
        if np.ndim(x) == 0:
            return func(x)
        flat = [func(v) for v in np.asarray(x, dtype=object).ravel()]
        out = np.empty(len(flat), dtype=object)
        out[:] = flat
        return out.reshape(np.shape(x))


def _check_finite(value, name):
    if not np.all(np.isfinite(value)):
        raise ConvergenceError(f"{name} produced a non-finite value")
    return value


def sin_integral(x, prec: PrecisionConfig = DOUBLE):
    """Sine integral Si(x) = int_0^x sin(t)/t dt.

    Parameters
    ----------
    x : float or array_like
        Real argument(s).
    prec : PrecisionConfig, optional
        Backend selector.

    Returns
    -------
    float, ndarray or mpmath.mpf
    """
    if prec.extended:
        return _map_mp(lambda v: mpmath.si(mpmath.mpf(v)), x, prec)
    x = np.asarray(x, dtype=float)
    if not np.all(np.isfinite(x)):
        raise DomainError("sin_integral requires finite arguments")
    si, _ = sps.sici(x)
    return si[()] if si.ndim == 0 else si


def cos_integral(x, prec: PrecisionConfig = DOUBLE):
    """Cosine integral Ci(x) = gamma + ln x + int_0^x (cos t - 1)/t dt for x > 0.

    Raises
    ------
    DomainError
        If any argument is not strictly positive.
    """
    if np.any(np.asarray(x, dtype=float) <= 0):
        raise DomainError("cos_integral is defined for x > 0 only")
    if prec.extended:
        return _map_mp(lambda v: mpmath.ci(mpmath.mpf(v)), x, prec)
    x = np.asarray(x, dtype=float)
    _, ci = sps.sici(x)
    return ci[()] if ci.ndim == 0 else ci


def exp_integral_e1(z, prec: PrecisionConfig = DOUBLE):
    """Principal-branch exponential integral E1(z) = int_z^inf e^{-t}/t dt.

    Parameters
    ----------
    z : complex or array_like
        Argument(s); must avoid the cut ``(-inf, 0]``.
    prec : PrecisionConfig, optional

    Raises
    ------
    DomainError
        On the branch cut or at the origin.
    ConvergenceError
        If the backend returns a non-finite value for a finite argument.
    """
    za = np.asarray(z, dtype=complex)
    if np.any((za.imag == 0) & (za.real <= 0)):
        raise DomainError("E1 argument lies on the principal branch cut (-inf, 0]")
    if prec.extended:
        return _map_mp(lambda v: mpmath.e1(mpmath.mpc(v)), z, prec)
    out = sps.exp1(za)
    _check_finite(out, "exp_integral_e1")
    return out[()] if out.ndim == 0 else out


def euler_gamma(prec: PrecisionConfig = DOUBLE):
    """Euler's constant at the working precision."""
    if prec.extended:
        with prec.context():
            return +mpmath.euler
    return float(np.euler_gamma)
