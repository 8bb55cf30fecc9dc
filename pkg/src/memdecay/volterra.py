"""Product-trapezoidal solver for the regularized Volterra equation.

Solves ``c(tau) = f(tau) + int_0^tau kappa(tau - s) c(s) ds`` with ``f = 1``
(or a pure phase, see ``phase_shift`` in :func:`solve`).  The unknown is
taken piecewise linear between grid nodes and the kernel is integrated
exactly against each linear piece (:func:`memdecay.kernels.panel_moments`),
so the fast ``exp(-i A tau)`` oscillation of the kernel never has to be
resolved by the grid.  The resulting lower-triangular system is solved node
by node; on uniform grids the history sums are Toeplitz and are evaluated by
a divide-and-conquer FFT scheme in O(N log^2 N).

Also provides the photon-sector spectral amplitude and the unitarity audit.
"""

from __future__ import annotations

import csv
import io
import math
import warnings
from dataclasses import dataclass, field

import mpmath
import numpy as np
from scipy.signal import fftconvolve

from .errors import ConvergenceError, DomainError, PrecisionError, ResolutionError, ResolutionWarning, UnsupportedKindError
from .kernels import KernelKind, panel_moments, panel_moments_mp
from .params import Params
from .special import DOUBLE, PrecisionConfig

__all__ = [
    "Grid",
    "Trajectory",
    "UnitarityReport",
    "solve",
    "spectral_amplitude",
    "unitarity_audit",
    "trajectory_csv",
]

_EPS = np.finfo(float).eps
MIN_OMEGA_PANELS = 1000
# history blocks shorter than this are summed directly
_LEAF = 256
# offsets handled per batch in spectral_amplitude (bounds memory)
_X_CHUNK = 4096


@dataclass(frozen=True)
class Grid:
    """Time grid starting at zero.

    Use :meth:`uniform`, :meth:`graded` or :meth:`from_nodes`.
    """

    nodes: np.ndarray
    step: float | None = None

    def __post_init__(self):
        nodes = np.asarray(self.nodes, dtype=float)
        if nodes.ndim != 1 or nodes.size == 0 or nodes[0] != 0.0:
            raise DomainError("grid nodes must be a non-empty 1-D array starting at 0")
        if np.any(np.diff(nodes) <= 0):
            raise DomainError("grid nodes must be strictly increasing")
        object.__setattr__(self, "nodes", nodes)

    @classmethod
    def uniform(cls, tau_max: float, step: float) -> "Grid":
        """Uniform grid with ``step * (count - 1) = tau_max``.

        The step is shrunk slightly if ``tau_max / step`` is not an integer.
        """
        if tau_max < 0 or not math.isfinite(tau_max):
            raise DomainError("tau_max must be finite and >= 0")
        if not step > 0:
            raise DomainError("step must be positive")
        if tau_max == 0:
            return cls(np.zeros(1), step)
        n = max(1, int(math.ceil(tau_max / step - 1e-9)))
        h = tau_max / n
        return cls(h * np.arange(n + 1), h)

    @classmethod
    def graded(cls, tau_max: float, step: float, fine_step: float, fine_until: float,
               ratio: float = 1.05) -> "Grid":
        """Fine uniform steps up to ``fine_until``, then geometric growth up to ``step``.

        Non-uniform grids use the general solver path, which evaluates
        kernel moments for every node pair (O(N^2) special-function calls);
        keep them to a few thousand nodes.
        """
        if not (0 < fine_step <= step) or fine_until < 0:
            raise DomainError("need 0 < fine_step <= step and fine_until >= 0")
        nodes = [0.0]
        h = fine_step
        while nodes[-1] < tau_max:
            if nodes[-1] >= fine_until:
                h = min(step, h * ratio)
            nodes.append(min(tau_max, nodes[-1] + h))
            if tau_max - nodes[-1] < 1e-12 * max(1.0, tau_max):
                nodes[-1] = tau_max
                break
        return cls(np.asarray(nodes))

    @classmethod
    def from_nodes(cls, nodes) -> "Grid":
        nodes = np.asarray(nodes, dtype=float)
        h = np.diff(nodes)
        step = float(nodes[-1] / h.size) if h.size and np.allclose(h, h[0], rtol=1e-9, atol=0) else None
        return cls(nodes, step)

    @property
    def count(self) -> int:
        return int(self.nodes.size)

    @property
    def tau_max(self) -> float:
        return float(self.nodes[-1])

    @property
    def is_uniform(self) -> bool:
        return self.step is not None

    def coarsened(self) -> "Grid":
        """Every second node (the last node is kept only if it falls on the subgrid)."""
        return Grid(self.nodes[::2], None if self.step is None else 2 * self.step)


@dataclass
class Trajectory:
    """Solution samples with solver metadata.

    Attributes
    ----------
    grid : Grid
    amplitude : ndarray
        Complex amplitude at each node (object array of mpc in extended mode).
    params : Params
    kernel : KernelKind
    est_error : float
        Global absolute error estimate (max of ``node_error``).
    node_error : ndarray
        Per-node absolute error estimate from step doubling.
    precision : PrecisionConfig
    phase_shift : float
        Phase rate the amplitude carries, see :func:`solve`.
    method : str
    """

    grid: Grid
    amplitude: np.ndarray
    params: Params
    kernel: KernelKind
    est_error: float
    node_error: np.ndarray
    precision: PrecisionConfig = DOUBLE
    phase_shift: float = 0.0
    method: str = ""
    notes: list = field(default_factory=list)

    @property
    def tau(self) -> np.ndarray:
        return self.grid.nodes

    def amplitude_complex(self) -> np.ndarray:
        """Amplitude as a double complex array (rounded in extended mode)."""
        if self.amplitude.dtype == object:
            return np.array([complex(v) for v in self.amplitude])
        return self.amplitude

    def abs2(self) -> np.ndarray:
        """``|c|^2`` at the nodes, as doubles."""
        if self.amplitude.dtype == object:
            return np.array([float(abs(v) ** 2) for v in self.amplitude])
        return np.abs(self.amplitude) ** 2

    def at(self, tau: float):
        """Amplitude at the node closest to ``tau``."""
        k = int(np.argmin(np.abs(self.grid.nodes - tau)))
        return self.amplitude[k]


@dataclass
class UnitarityReport:
    """Probability bookkeeping at checkpoint times."""

    taus: list
    excited_prob: list
    emitted_prob: list
    defect: list

    @property
    def max_defect(self) -> float:
        return max(self.defect) if self.defect else 0.0


# ---------------------------------------------------------------- solver core


def _uniform_weights(p, kernel, h, n):
    """``A_m = L_m / h`` and ``B_m = P_m - L_m / h`` on panels ``[m h, (m+1) h]``."""
    m = np.arange(n, dtype=float)
    P, L = panel_moments(m * h, (m + 1) * h, p, kernel)
    return L / h, P - L / h


def _solve_toeplitz(w, g, f, diag, method):
    """Solve ``c_k diag = f_k + g_k c_0 + sum_{i=1}^{k-1} w_{k-i} c_i`` with ``c_0 = f_0``."""
    n = w.size
    c = np.zeros(n, dtype=complex)
    c[0] = f[0]
    hist = f + g * c[0]
    hist[0] = 0.0

    if method == "direct":
        for k in range(1, n):
            s = hist[k]
            if k > 1:
                s += np.dot(w[k - 1:0:-1], c[1:k])
            c[k] = s / diag
        return c

    def rec(lo, hi):
        if hi - lo <= _LEAF:
            for k in range(lo, hi):
                s = hist[k]
                if k > lo:
                    s += np.dot(w[k - lo:0:-1], c[lo:k])
                c[k] = s / diag
            return
        mid = (lo + hi) // 2
        rec(lo, mid)
        # contribution of c[lo:mid] to nodes mid..hi-1
        conv = fftconvolve(c[lo:mid], w[:hi - lo])
        hist[mid:hi] += conv[mid - lo:hi - lo]
        rec(mid, hi)

    if n > 1:
        rec(1, n)
    return c


def _solve_uniform(p, kernel, grid, phase_shift, method):
    h = grid.step
    n = grid.count
    if n == 1:
        return np.ones(1, dtype=complex)
    Aw, Bw = _uniform_weights(p, kernel, h, n - 1)
    d = np.arange(n)
    ph = np.exp(1j * phase_shift * h * d)
    w = np.zeros(n, dtype=complex)
    w[0] = Bw[0]
    w[1:n - 1] = (Aw[:n - 2] + Bw[1:n - 1]) * ph[1:n - 1]
    g = np.zeros(n, dtype=complex)
    g[1:] = Aw[:n - 1] * ph[1:]
    diag = 1.0 - Bw[0]
    if abs(diag) < 1e-14:
        raise ConvergenceError("singular diagonal in the implicit node solve")
    return _solve_toeplitz(w, g, ph, diag, method)


def _solve_general(p, kernel, grid, phase_shift):
    t = grid.nodes
    n = t.size
    c = np.zeros(n, dtype=complex)
    c[0] = 1.0
    for k in range(1, n):
        a = t[k] - t[1:k + 1]
        b = t[k] - t[:k]
        P, L = panel_moments(a, b, p, kernel)
        wdt = b - a
        Acoef = L / wdt  # multiplies c_j (far end of panel j)
        Bcoef = P - L / wdt  # multiplies c_{j+1}
        ph = np.exp(1j * phase_shift * (t[k] - t[:k + 1]))
        coef = np.zeros(k + 1, dtype=complex)
        coef[:k] += Acoef
        coef[1:] += Bcoef
        coef *= ph
        diag = 1.0 - coef[k]
        if abs(diag) < 1e-14:
            raise ConvergenceError("singular diagonal in the implicit node solve")
        c[k] = (np.exp(1j * phase_shift * t[k]) + np.dot(coef[:k], c[:k])) / diag
    return c


def _solve_mp(p, kernel, grid, phase_shift, prec):
    t = grid.nodes
    n = t.size
    with prec.context():
        tm = [mpmath.mpf(x) for x in t]
        c = [mpmath.mpc(1)] + [mpmath.mpc(0)] * (n - 1)
        if grid.is_uniform and n > 1:
            h = tm[1]
            hs = [h * m for m in range(n)]
            P, L = panel_moments_mp(hs[:-1], hs[1:], p, kernel, prec)
            Aw = [Lv / h for Lv in L]
            Bw = [Pv - Lv / h for Pv, Lv in zip(P, L)]
            ph = [mpmath.expj(phase_shift * h * m) for m in range(n)]
            w = [Bw[0]] + [(Aw[m - 1] + Bw[m]) * ph[m] for m in range(1, n - 1)]
            diag = 1 - Bw[0]
            for k in range(1, n):
                s = ph[k] + Aw[k - 1] * ph[k] * c[0]
                s += mpmath.fsum(w[k - i] * c[i] for i in range(1, k))
                c[k] = s / diag
        else:
            for k in range(1, n):
                a = [tm[k] - tm[j + 1] for j in range(k)]
                b = [tm[k] - tm[j] for j in range(k)]
                P, L = panel_moments_mp(a, b, p, kernel, prec)
                coef = [mpmath.mpc(0)] * (k + 1)
                for j in range(k):
                    wdt = b[j] - a[j]
                    coef[j] += L[j] / wdt
                    coef[j + 1] += P[j] - L[j] / wdt
                coef = [cv * mpmath.expj(phase_shift * (tm[k] - tm[j])) for j, cv in enumerate(coef)]
                s = mpmath.expj(phase_shift * tm[k]) + mpmath.fsum(coef[j] * c[j] for j in range(k))
                c[k] = s / (1 - coef[k])
        out = np.empty(n, dtype=object)
        out[:] = c
        return out


def _raw_solve(p, kernel, grid, prec, phase_shift, method):
    if prec.extended:
        return _solve_mp(p, kernel, grid, phase_shift, prec), "mpmath-direct"
    if grid.is_uniform and method in ("auto", "fft", "direct"):
        m = "direct" if method == "direct" else "fft"
        return _solve_uniform(p, kernel, grid, phase_shift, m), f"uniform-{m}"
    return _solve_general(p, kernel, grid, phase_shift), "general-direct"


def solve(p: Params, kernel: KernelKind | None = None, grid: Grid | None = None,
          prec: PrecisionConfig = DOUBLE, *, method: str = "auto", estimate_error: bool = True,
          phase_shift: float = 0.0, check_precision: bool = True, strict: bool = False) -> Trajectory:
    """Solve the regularized Volterra equation on ``grid``.

    Parameters
    ----------
    p : Params
    kernel : KernelKind, optional
        ``Kappa0Reg`` or ``Kappa1Reg``; defaults to the kernel for ``p.n``.
    grid : Grid
    prec : PrecisionConfig, optional
        More than 15 digits selects the mpmath backend (direct O(N^2) sums).
    method : {"auto", "fft", "direct", "general"}
        Evaluation of the history sums for double precision.  All methods
        solve the same discrete equations.
    estimate_error : bool
        Re-solve on every second node and use ``|c_h - c_2h| / 3``.
    phase_shift : float
        Solve for ``exp(i phi tau) c(tau)`` instead of ``c``: forcing
        ``exp(i phi tau)``, kernel ``kappa(u) exp(i phi u)``.  The discrete
        scheme interpolates the slowly varying envelope, so moduli agree with
        the ``phi = 0`` solution to rounding.
    check_precision : bool
        In double precision, refuse results whose smallest modulus lies
        below ``1e3 eps`` times the largest.
    strict : bool
        Raise :class:`PrecisionError` if ``est_error`` exceeds
        ``abs_tol + rel_tol * max|c|`` of ``prec``.

    Returns
    -------
    Trajectory

    Raises
    ------
    UnsupportedKindError, ConvergenceError, PrecisionError
    """
    if grid is None:
        raise DomainError("a grid is required")
    kernel = KernelKind.for_order(p.n) if kernel is None else kernel
    if kernel not in (KernelKind.Kappa0Reg, KernelKind.Kappa1Reg):
        raise UnsupportedKindError("solve() accepts Kappa0Reg or Kappa1Reg")
    notes = []
    if grid.count > 1:
        h0 = grid.nodes[1] - grid.nodes[0]
        limit = 0.1 / (p.lambda_tilde_used * p.b_tilde)
        if h0 > limit:
            msg = (f"first step {h0:.3g} exceeds 0.1/(Lambda_tilde b_tilde) = {limit:.3g}; "
                   "the kernel's initial oscillation is integrated exactly but not resolved in c")
            warnings.warn(msg, ResolutionWarning, stacklevel=2)
            notes.append(msg)
    if method == "general":
        grid_for_solve = Grid(grid.nodes, None)
    else:
        grid_for_solve = grid

    c, used = _raw_solve(p, kernel, grid_for_solve, prec, phase_shift, method)

    node_error = np.zeros(grid.count)
    if estimate_error and grid.count >= 3:
        coarse = Grid(grid_for_solve.nodes[::2], None if grid_for_solve.step is None else 2 * grid_for_solve.step)
        cc, _ = _raw_solve(p, kernel, coarse, prec, phase_shift, method)
        diff = np.array([float(abs(x - y)) for x, y in zip(c[::2], cc)]) / 3.0
        node_error[::2] = diff
        left = diff[: (grid.count // 2)]
        right = np.append(diff[1:], diff[-1])[: (grid.count // 2)]
        node_error[1::2] = np.maximum(left, right)
    est_error = float(node_error.max()) if grid.count else 0.0

    mags = np.array([float(abs(v)) for v in c]) if c.dtype == object else np.abs(c)
    if check_precision and not prec.extended and mags.size:
        floor = 1e3 * _EPS * mags.max()
        if mags.min() < floor:
            ratio = mags.max() / max(mags.min(), 1e-300)
            needed = int(math.ceil(math.log10(ratio))) + 3 + 3
            raise PrecisionError(
                f"|c| falls to {mags.min():.3g}, below the double-precision noise floor {floor:.3g}; "
                f"use at least {max(needed, 16)} working digits",
                needed_digits=max(needed, 16))
    if strict and est_error > prec.abs_tol + prec.rel_tol * mags.max():
        raise PrecisionError(f"estimated error {est_error:.3g} exceeds the requested tolerance")

    return Trajectory(grid=grid, amplitude=c, params=p, kernel=kernel, est_error=est_error,
                      node_error=node_error, precision=prec, phase_shift=phase_shift,
                      method=used, notes=notes)


# ---------------------------------------------------------------- spectral amplitude


def _filon_coefficients(theta):
    """``alpha = int_0^1 e^{i theta s}(1 - s) ds`` and ``beta = int_0^1 e^{i theta s} s ds``."""
    th = np.asarray(theta, dtype=float)
    a = np.empty(th.shape, dtype=complex)
    b = np.empty(th.shape, dtype=complex)
    sm = np.abs(th) < 1e-2
    t = th[sm]
    a[sm] = 0.5 + 1j * t / 6 - t**2 / 24 - 1j * t**3 / 120 + t**4 / 720 + 1j * t**5 / 5040
    b[sm] = 0.5 + 1j * t / 3 - t**2 / 8 - 1j * t**3 / 30 + t**4 / 144 + 1j * t**5 / 840
    t = th[~sm]
    e = np.exp(1j * t)
    b[~sm] = e / (1j * t) + (e - 1) / t**2
    a[~sm] = (e - 1) / (1j * t) - b[~sm]
    return a, b


def _check_resolution(offsets, steps):
    worst = float(np.max(np.abs(offsets))) * float(np.max(steps)) if len(offsets) else 0.0
    if worst > math.pi:
        raise ResolutionError(
            f"offset phase advances {worst:.3g} rad per step (> pi); refine the grid")


def spectral_amplitude(traj: Trajectory, omega_offsets, taus=None):
    """Photon-sector amplitude ``I(x, tau) = int_0^tau exp(i x s) c(s) ds``.

    The stored amplitude is interpolated linearly between nodes and each
    panel is integrated exactly against ``exp(i x s)``; for ``x h -> 0`` this
    is the trapezoidal rule.

    Parameters
    ----------
    traj : Trajectory
    omega_offsets : array_like
        Dimensionless detunings ``x``.
    taus : array_like, optional
        Upper limits; each is snapped to the nearest node.  Defaults to the
        final node.

    Returns
    -------
    ndarray
        Shape ``(len(omega_offsets),)`` when ``taus`` is None, otherwise
        ``(len(taus), len(omega_offsets))``.

    Raises
    ------
    ResolutionError
        If ``|x| h > pi`` for some offset and step.
    """
    x = np.atleast_1d(np.asarray(omega_offsets, dtype=float))
    if x.size > _X_CHUNK:
        parts = [spectral_amplitude(traj, x[i:i + _X_CHUNK], taus) for i in range(0, x.size, _X_CHUNK)]
        return np.concatenate(parts, axis=-1)
    t = traj.grid.nodes
    c = traj.amplitude_complex()
    steps = np.diff(t)
    if steps.size:
        _check_resolution(x, steps)
    single = taus is None
    taus = [t[-1]] if single else list(np.atleast_1d(taus))
    ks = [int(np.argmin(np.abs(t - T))) for T in taus]
    out = np.zeros((len(ks), x.size), dtype=complex)
    kmax = max(ks)
    if steps.size == 0 or kmax == 0:
        return out[0] if single else out

    block = 128
    # panels [j0, j1) never straddle a requested upper limit
    cuts = sorted(set(range(0, kmax, block)) | set(ks) | {0})
    cuts = [j for j in cuts if j <= kmax]
    starts = np.array(cuts[:-1], dtype=int)
    lengths = np.diff(cuts)
    uniform = traj.grid.is_uniform
    partial = np.zeros((len(starts), x.size), dtype=complex)
    if uniform:
        h = traj.grid.step
        al, be = _filon_coefficients(x * h)
        # the phase pattern inside a block is shared, so all blocks go through one matmul
        E = np.exp(1j * np.outer(x, h * np.arange(block)))
        V0 = np.zeros((block, len(starts)), dtype=complex)
        V1 = np.zeros_like(V0)
        for m, (j0, ln) in enumerate(zip(starts, lengths)):
            V0[:ln, m] = c[j0:j0 + ln]
            V1[:ln, m] = c[j0 + 1:j0 + ln + 1]
        S0 = E @ V0
        S1 = E @ V1
        base = np.exp(1j * np.outer(x, t[starts]))
        partial = (h * base * (al[:, None] * S0 + be[:, None] * S1)).T
    else:
        for m, (j0, ln) in enumerate(zip(starts, lengths)):
            j1 = j0 + ln
            hj = steps[j0:j1]
            aj, bj = _filon_coefficients(np.outer(x, hj))
            Ej = np.exp(1j * np.outer(x, t[j0:j1]))
            partial[m] = (Ej * hj * (aj * c[j0:j1] + bj * c[j0 + 1:j1 + 1])).sum(axis=1)
    csum = np.vstack([np.zeros(x.size, dtype=complex), np.cumsum(partial, axis=0)])
    pos = {j: i for i, j in enumerate(cuts)}
    for idx, k in enumerate(ks):
        out[idx] = csum[pos[k]]
    return out[0] if single else out


def unitarity_audit(traj: Trajectory, n_omega: int, checkpoints, order: int = 4) -> UnitarityReport:
    """Compare ``|c|^2`` with the emitted-photon probability at checkpoints.

    ``emitted = (1/2pi) int_0^W |I(x - b_tilde, tau)|^2 dx`` with
    ``W = Lambda_tilde b_tilde`` (= Lambda_c), evaluated by ``n_omega``
    uniform Gauss-Legendre panels of ``order`` points.  Using the shifted
    amplitude with offsets from ``b_tilde`` is the same integral as the bare
    amplitude with offsets from ``b_A``.

    Raises
    ------
    UnsupportedKindError
        For anything but the flat-rate kernel without phase shift.
    DomainError
        If ``n_omega < MIN_OMEGA_PANELS``.
    ResolutionError
        If the largest offset is not resolved by the grid.
    """
    if traj.kernel is not KernelKind.Kappa0Reg or traj.phase_shift != 0.0:
        raise UnsupportedKindError("unitarity audit is defined for the flat-rate kernel only")
    if n_omega < MIN_OMEGA_PANELS:
        raise DomainError(f"n_omega must be at least {MIN_OMEGA_PANELS}")
    p = traj.params
    W = p.lambda_tilde_used * p.b_tilde
    edges = np.linspace(0.0, W, n_omega + 1)
    gx, gw = np.polynomial.legendre.leggauss(order)
    mid = 0.5 * (edges[1:] + edges[:-1])
    half = 0.5 * (edges[1:] - edges[:-1])
    X = (mid[:, None] + half[:, None] * gx).ravel()
    Wt = (half[:, None] * gw).ravel()
    amps = spectral_amplitude(traj, X - p.b_tilde, taus=list(checkpoints))
    emitted = (np.abs(amps) ** 2 @ Wt) / (2.0 * math.pi)
    excited = []
    taus = []
    for T in checkpoints:
        k = int(np.argmin(np.abs(traj.grid.nodes - T)))
        taus.append(float(traj.grid.nodes[k]))
        excited.append(float(abs(traj.amplitude_complex()[k]) ** 2))
    defect = [abs(1.0 - e - m) for e, m in zip(excited, emitted)]
    return UnitarityReport(taus=taus, excited_prob=excited, emitted_prob=[float(v) for v in emitted],
                           defect=[float(d) for d in defect])


# ---------------------------------------------------------------- export


def _fmt(v, digits):
    if isinstance(v, mpmath.mpf):
        return mpmath.nstr(v, digits)
    return repr(float(v))


def trajectory_rows(traj: Trajectory, stride: int = 1):
    """Rows ``(tau, re_c, im_c, abs2, est_error, quality)`` as strings."""
    digits = traj.precision.working_digits
    c = traj.amplitude
    for k in range(0, traj.grid.count, stride):
        v = c[k]
        if isinstance(v, mpmath.mpc):
            re, im = v.real, v.imag
            a2 = re * re + im * im
            mag = float(abs(v))
        else:
            re, im = v.real, v.imag
            a2 = re * re + im * im
            mag = abs(v)
        err = float(traj.node_error[k])
        quality = "ok" if err <= mag else "unreliable"
        yield (repr(float(traj.grid.nodes[k])), _fmt(re, digits), _fmt(im, digits), _fmt(a2, digits),
               repr(err), quality)


def trajectory_csv(traj: Trajectory, stream=None, stride: int = 1) -> str | None:
    """Write the trajectory as RFC-4180 CSV; returns the text if ``stream`` is None."""
    own = stream is None
    buf = io.StringIO() if own else stream
    w = csv.writer(buf, lineterminator="\r\n")
    w.writerow(["tau", "re_c", "im_c", "abs2", "est_error", "quality"])
    for row in trajectory_rows(traj, stride):
        w.writerow(row)
    return buf.getvalue() if own else None
