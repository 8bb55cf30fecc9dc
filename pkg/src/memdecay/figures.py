"""Data behind the five decay-probability figures.

Each builder returns ``(header, rows, meta)`` where ``rows`` is a list of
float tuples and ``meta`` records the parameters and settings used.  The
time windows and sampling steps are choices of this package; override
them through the keyword arguments.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass

import numpy as np

from .asymptotics import AsymptoticModel, amplitude_model, branch_cut_integrals
from .errors import DomainError, ResolutionWarning
from .params import Params, from_b_tilde
from .volterra import Grid, solve

__all__ = ["FigureSpec", "FIGURES", "figure_data", "preset_params"]


@dataclass(frozen=True)
class FigureSpec:
    """Defaults for one figure: parameters, window, solver step and output spacing."""

    b_tilde: float
    Lambda: float
    n: int
    tau_max: float
    step: float
    sample: float


FIGURES = {
    1: FigureSpec(10.0, 1000.0, 0, 0.2, 1e-5, 2e-4),
    2: FigureSpec(10.0, 1000.0, 0, 0.02, 1e-6, 2e-5),
    3: FigureSpec(10.0, 1000.0, 0, 40.0, 1e-3, 1e-2),
    4: FigureSpec(10.0, 1000.0, 0, 40.0, 1e-3, 1e-2),
    5: FigureSpec(1000.0, 1000.0, 1, 150.0, 0.0, 1e-1),
}


def preset_params(number: int) -> Params:
    spec = FIGURES[number]
    return from_b_tilde(spec.b_tilde, spec.Lambda, spec.n)


def _sample_indices(grid, sample, tau_min=0.0):
    stride = max(1, int(round(sample / grid.step)))
    idx = np.arange(0, grid.count, stride)
    return idx[grid.nodes[idx] >= tau_min]


def _solve_quiet(p, grid):
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", ResolutionWarning)
        return solve(p, grid=grid)


def _small_time(p, tau_max, step, sample):
    traj = _solve_quiet(p, Grid.uniform(tau_max, step))
    idx = _sample_indices(traj.grid, sample)
    t = traj.grid.nodes[idx]
    exact = traj.abs2()[idx]
    inter = np.abs(amplitude_model(AsymptoticModel.Intermediate, t, p)) ** 2
    small = np.abs(amplitude_model(AsymptoticModel.SmallTime, t, p)) ** 2
    header = ["tau", "abs2_exact", "abs2_intermediate", "abs2_small_time", "exp_minus_tau", "est_error"]
    rows = list(zip(t, exact, inter, small, np.exp(-t), traj.node_error[idx]))
    return header, rows, traj


def _large_time(p, tau_max, step, sample, with_km):
    traj = _solve_quiet(p, Grid.uniform(tau_max, step))
    # the asymptotic forms are meaningless before a few lifetimes' fraction
    idx = _sample_indices(traj.grid, sample, tau_min=1.0)
    t = traj.grid.nodes[idx]
    exact = traj.abs2()[idx]
    if with_km:
        model = np.abs(amplitude_model(AsymptoticModel.KnightMilonniIntegral, t, p)) ** 2
        header = ["tau", "abs2_exact", "abs2_km", "exp_minus_tau", "est_error"]
    else:
        model = np.abs(amplitude_model(AsymptoticModel.LargeKM0, t, p)) ** 2
        header = ["tau", "abs2_exact", "abs2_km0", "exp_minus_tau", "est_error"]
    rows = list(zip(t, exact, model, np.exp(-t), traj.node_error[idx]))
    return header, rows, traj


def _regularization_dependence(p, tau_max, sample, method, step):
    t = np.arange(sample, tau_max + 0.5 * sample, sample)
    if method == "contour":
        exact = np.array([abs(branch_cut_integrals(float(x), p).reconstructed_c) ** 2 for x in t])
        err = np.zeros_like(t)
    elif method == "solver":
        traj = _solve_quiet(p, Grid.uniform(tau_max, step))
        k = np.rint(t / traj.grid.step).astype(int)
        exact = traj.abs2()[k]
        err = traj.node_error[k]
    else:
        raise DomainError(f"unknown method {method!r}; use 'contour' or 'solver'")
    km = np.abs(amplitude_model(AsymptoticModel.KnightMilonniIntegral, t, p)) ** 2
    kma = np.abs(amplitude_model(AsymptoticModel.KnightMilonniAsymptote, t, p)) ** 2
    three = np.abs(amplitude_model(AsymptoticModel.GeneralThreeTerm, t, p)) ** 2
    header = ["tau", "abs2_exact", "abs2_km", "abs2_km_asymptote", "abs2_three_term", "est_error"]
    return header, list(zip(t, exact, km, kma, three, err))


def figure_data(number: int, p: Params | None = None, *, tau_max: float | None = None,
                step: float | None = None, sample: float | None = None, method: str = "contour"):
    """Build the table for figure ``number``.

    Parameters
    ----------
    number : int
        1 to 5.
    p : Params, optional
        Defaults to the figure's preset.
    tau_max, step, sample : float, optional
        Window end, solver step and output spacing.
    method : {"contour", "solver"}
        Figure 5 only: source of the exact curve.  The solver needs a step
        far below ``1/((Lambda_tilde - 1) b_tilde)``, which is out of reach
        for the preset, so the contour representation is the default.

    Returns
    -------
    header : list of str
    rows : list of tuple
    meta : dict
    """
    if number not in FIGURES:
        raise DomainError("figure number must be 1..5")
    spec = FIGURES[number]
    p = preset_params(number) if p is None else p
    tau_max = spec.tau_max if tau_max is None else float(tau_max)
    step = spec.step if step is None else float(step)
    sample = spec.sample if sample is None else float(sample)
    if not (tau_max > 0 and sample > 0):
        raise DomainError("tau_max and sample spacing must be positive")
    meta = {"figure": number, "params": p.as_dict(), "tau_max": tau_max, "sample": sample}
    if number in (1, 2):
        header, rows, traj = _small_time(p, tau_max, step, sample)
        meta.update(step=traj.grid.step, est_error=traj.est_error, source="solver")
    elif number in (3, 4):
        header, rows, traj = _large_time(p, tau_max, step, sample, with_km=(number == 4))
        meta.update(step=traj.grid.step, est_error=traj.est_error, source="solver")
    else:
        if method == "solver" and not step > 0:
            step = 0.1 / (p.lambda_tilde_used * p.b_tilde)
        header, rows = _regularization_dependence(p, tau_max, sample, method, step)
        meta.update(source=method)
        if method == "solver":
            meta["step"] = step
    for row in rows:
        if not all(math.isfinite(v) for v in row):
            raise DomainError(f"non-finite value in figure {number} at tau = {row[0]}")
    return header, [tuple(float(v) for v in r) for r in rows], meta
