"""Dimensionless parameter sets and their construction from physical data.

Units: time is measured in 1/Gamma_0, so ``tau = Gamma_0 t`` and every
frequency is divided by Gamma_0.  Derived quantities:

* ``b_tilde = b_A - ln(Lambda - 1)/2pi``  (Lamb-shifted transition frequency)
* ``Lambda_tilde = Lambda * b_A / b_tilde``
* ``Lambda_c = Lambda * b_A``             (cutoff frequency over Gamma_0)
* ``b_prime = b_A - Lambda/2pi``          (bookkeeping for the n=1 mass shift)
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from pathlib import Path

from .errors import DomainError, PrecisionError

__all__ = [
    "CODATA2018",
    "Params",
    "PhysicalInput",
    "from_dimensionless",
    "from_b_tilde",
    "from_physical",
    "artificial_atom_preset",
    "atom_chip_preset",
    "load_params_json",
]

TWO_PI = 2.0 * math.pi

#: SI constants, CODATA 2018 recommended values.
CODATA2018 = {
    "mu_0": 1.25663706212e-6,  # N A^-2
    "mu_B": 9.2740100783e-24,  # J T^-1
    "hbar": 1.054571817e-34,  # J s
    "c": 299792458.0,  # m s^-1
    "m_e": 9.1093837015e-31,  # kg
}


@dataclass(frozen=True)
class Params:
    """Dimensionless model configuration.

    Use :func:`from_dimensionless` (or the other constructors) rather than
    instantiating directly; the derived fields are filled in there.

    Attributes
    ----------
    b_A : float
        Bare transition frequency over Gamma_0.
    Lambda : float
        Cutoff frequency over the transition frequency, > 1.
    n : int
        Kernel power, 0 (flat rate) or 1 (linear, mass renormalized).
    b_tilde, Lambda_tilde, Lambda_c, b_prime : float
        Derived quantities, see module docstring.
    force_lambda_tilde_equal : bool
        If true, ``Lambda_tilde`` is replaced by ``Lambda`` wherever kernels
        and models use it.  Off by default.
    gamma0_si : float or None
        Physical decay rate in 1/s when built from physical data.
    """

    b_A: float
    Lambda: float
    n: int
    b_tilde: float
    Lambda_tilde: float
    Lambda_c: float
    b_prime: float
    force_lambda_tilde_equal: bool = False
    gamma0_si: float | None = field(default=None, compare=False)

    @property
    def lambda_tilde_used(self) -> float:
        """Value of Lambda_tilde entering kernels and models."""
        return self.Lambda if self.force_lambda_tilde_equal else self.Lambda_tilde

    @property
    def fast_rate(self) -> float:
        """Frequency ``(Lambda_tilde - 1) b_tilde`` of the kernel's fast oscillation."""
        return (self.lambda_tilde_used - 1.0) * self.b_tilde

    @property
    def lamb_shift(self) -> float:
        """``ln(Lambda - 1)/2pi = b_A - b_tilde``."""
        return math.log(self.Lambda - 1.0) / TWO_PI

    def with_n(self, n: int) -> "Params":
        """Same physical parameters with another kernel power."""
        return from_dimensionless(self.b_A, self.Lambda, n,
                                  force_lambda_tilde_equal=self.force_lambda_tilde_equal,
                                  gamma0_si=self.gamma0_si)

    def as_dict(self) -> dict:
        """Plain dictionary of all fields, for JSON reports."""
        out = {
            "b_A": self.b_A,
            "Lambda": self.Lambda,
            "n": self.n,
            "b_tilde": self.b_tilde,
            "Lambda_tilde": self.Lambda_tilde,
            "Lambda_c": self.Lambda_c,
            "b_prime": self.b_prime,
            "force_lambda_tilde_equal": self.force_lambda_tilde_equal,
        }
        if self.gamma0_si is not None:
            out["gamma0_si"] = self.gamma0_si
        return out


@dataclass(frozen=True)
class PhysicalInput:
    """Atomic data for a magnetic spin-flip transition (SI units).

    Attributes
    ----------
    omega_A : float
        Transition angular frequency in rad/s.
    S2 : float
        Dimensionless spin factor S^2.
    g_S : float
        Gyromagnetic factor.
    omega_c : float
        Cutoff angular frequency in rad/s.
    """

    omega_A: float
    S2: float
    g_S: float
    omega_c: float

    def __post_init__(self):
        for name in ("omega_A", "S2", "g_S", "omega_c"):
            value = getattr(self, name)
            if not (math.isfinite(value) and value > 0):
                raise DomainError(f"{name} must be finite and strictly positive, got {value!r}")


def _check_n(n):
    if n not in (0, 1):
        raise DomainError(f"kernel power n must be 0 or 1, got {n!r}")
    return int(n)


def from_dimensionless(b_A: float, Lambda: float, n: int = 0, *,
                       force_lambda_tilde_equal: bool = False,
                       gamma0_si: float | None = None) -> Params:
    """Build :class:`Params` from ``b_A`` and ``Lambda``.

    Raises
    ------
    DomainError
        If ``Lambda <= 1``, ``b_A <= 0``, the Lamb shift exceeds ``b_A`` or
        ``Lambda_tilde <= 1``.
    """
    n = _check_n(n)
    b_A = float(b_A)
    Lambda = float(Lambda)
    if not (math.isfinite(b_A) and b_A > 0):
        raise DomainError(f"b_A must be finite and positive, got {b_A!r}")
    if not (math.isfinite(Lambda) and Lambda > 1):
        raise DomainError(f"Lambda must be finite and > 1, got {Lambda!r}")
    b_tilde = b_A - math.log(Lambda - 1.0) / TWO_PI
    if not b_tilde > 0:
        raise DomainError(f"Lamb shift exceeds the transition frequency (b_tilde = {b_tilde:.6g})")
    if not Lambda * b_A / b_tilde > 1:
        # only reachable for Lambda < 2, where the Lamb shift is negative
        raise DomainError("Lambda_tilde = Lambda b_A / b_tilde must exceed 1")
    return Params(
        b_A=b_A,
        Lambda=Lambda,
        n=n,
        b_tilde=b_tilde,
        Lambda_tilde=Lambda * b_A / b_tilde,
        Lambda_c=Lambda * b_A,
        b_prime=b_A - Lambda / TWO_PI,
        force_lambda_tilde_equal=bool(force_lambda_tilde_equal),
        gamma0_si=gamma0_si,
    )


def from_b_tilde(b_tilde: float, Lambda: float, n: int = 0, **kwargs) -> Params:
    """Build :class:`Params` from the shifted frequency ``b_tilde``.

    The stored ``b_tilde`` is recomputed from ``b_A`` and may differ from the
    input in the last bit.
    """
    if not (math.isfinite(Lambda) and Lambda > 1):
        raise DomainError(f"Lambda must be finite and > 1, got {Lambda!r}")
    if not b_tilde > 0:
        raise DomainError("b_tilde must be positive")
    return from_dimensionless(b_tilde + math.log(Lambda - 1.0) / TWO_PI, Lambda, n, **kwargs)


def gamma0_spin_flip(inp: PhysicalInput, constants: dict = CODATA2018) -> float:
    """Free-space magnetic spin-flip rate ``mu0 (mu_B g_S)^2 k_A^3 S^2 / (3 pi hbar)`` in 1/s."""
    k_A = inp.omega_A / constants["c"]
    gbar = constants["mu_0"] * (constants["mu_B"] * inp.g_S) ** 2 * k_A**3 / (3.0 * math.pi * constants["hbar"])
    return gbar * inp.S2


def from_physical(inp: PhysicalInput, n: int = 0, constants: dict = CODATA2018) -> Params:
    """Build :class:`Params` from atomic data.

    Raises
    ------
    PrecisionError
        If the rate underflows or ``b_A`` overflows double precision.
    """
    gamma0 = gamma0_spin_flip(inp, constants)
    if not (gamma0 > 0 and math.isfinite(gamma0)):
        raise PrecisionError("Gamma_0 underflows double precision")
    b_A = inp.omega_A / gamma0
    if not math.isfinite(b_A):
        raise PrecisionError("b_A = omega_A / Gamma_0 overflows double precision")
    return from_dimensionless(b_A, inp.omega_c / inp.omega_A, n, gamma0_si=gamma0)


def electron_mass_cutoff(omega_A: float, constants: dict = CODATA2018) -> float:
    """Dimensionless cutoff ``m_e c^2 / (hbar omega_A)``."""
    return constants["m_e"] * constants["c"] ** 2 / (constants["hbar"] * omega_A)


def artificial_atom_preset(n: int = 0) -> Params:
    """Superconducting artificial atom: ``Gamma_0 = 0.005 omega_A/2pi``, ``ln(Lambda-1) = 8 pi^2``."""
    b_A = TWO_PI / 0.005
    Lambda = 1.0 + math.exp(8.0 * math.pi**2)
    return from_dimensionless(b_A, Lambda, n)


def atom_chip_preset(n: int = 0) -> Params:
    """Atom-chip spin flip at 560 kHz with the rounded values ``b_A = 3e32``, ``Lambda = 2e14``."""
    return from_dimensionless(3e32, 2e14, n)


_TOP_KEYS = {"b_A", "Lambda", "n", "physical"}
_PHYS_KEYS = {"omega_A_hz", "S2", "g_S", "Lambda"}


def params_from_mapping(data: dict) -> Params:
    """Validate a decoded JSON parameter object and build :class:`Params`.

    Accepted shapes are ``{"b_A", "Lambda", "n"}`` and
    ``{"physical": {"omega_A_hz", "S2", "g_S", "Lambda"}, "n"?}``, where
    ``omega_A_hz`` is the ordinary frequency ``omega_A / 2pi``.
    """
    if not isinstance(data, dict):
        raise DomainError("parameter file must contain a JSON object")
    unknown = set(data) - _TOP_KEYS
    if unknown:
        raise DomainError(f"unknown parameter keys: {sorted(unknown)}")
    n = data.get("n", 0)
    if "physical" in data:
        if {"b_A", "Lambda"} & set(data):
            raise DomainError("give either 'physical' or 'b_A'/'Lambda', not both")
        phys = data["physical"]
        if not isinstance(phys, dict):
            raise DomainError("'physical' must be an object")
        unknown = set(phys) - _PHYS_KEYS
        if unknown:
            raise DomainError(f"unknown physical keys: {sorted(unknown)}")
        missing = _PHYS_KEYS - set(phys)
        if missing:
            raise DomainError(f"missing physical keys: {sorted(missing)}")
        omega_A = TWO_PI * float(phys["omega_A_hz"])
        inp = PhysicalInput(omega_A=omega_A, S2=float(phys["S2"]), g_S=float(phys["g_S"]),
                            omega_c=float(phys["Lambda"]) * omega_A)
        return from_physical(inp, n)
    missing = {"b_A", "Lambda"} - set(data)
    if missing:
        raise DomainError(f"missing parameter keys: {sorted(missing)}")
    return from_dimensionless(data["b_A"], data["Lambda"], n)


def load_params_json(path) -> Params:
    """Read a JSON parameter file, see :func:`params_from_mapping`."""
    try:
        data = json.loads(Path(path).read_text())
    except json.JSONDecodeError as exc:
        raise DomainError(f"{path}: invalid JSON ({exc})") from exc
    return params_from_mapping(data)
