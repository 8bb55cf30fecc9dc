"""Command-line front end.

Exit codes: 0 success, 2 bad input (domain, resolution or unsupported-kind
errors, and argument errors), 3 numerical failure (convergence or
precision errors).  Diagnostics go to stderr as one JSON object per line.
"""

from __future__ import annotations

import argparse
import csv
import json
import math
import sys
import warnings
from contextlib import contextmanager

import numpy as np

from . import __version__
from .asymptotics import (AsymptoticModel, amplitude_model, flat_cut_integral_study, linear_cut_integral_study,
                          branch_cut_integrals, crossover_times)
from .errors import (ConvergenceError, DomainError, MemDecayError, PrecisionError, ResolutionError,
                     ResolutionWarning, UnsupportedKindError)
from .figures import FIGURES, figure_data, preset_params
from .params import (PhysicalInput, artificial_atom_preset, atom_chip_preset, electron_mass_cutoff,
                     from_b_tilde, from_dimensionless, from_physical, load_params_json)
from .special import PrecisionConfig
from .volterra import Grid, solve, trajectory_csv, unitarity_audit

EXIT_OK = 0
EXIT_DOMAIN = 2
EXIT_CONVERGENCE = 3

_PRESETS = {
    "fig1": lambda n: preset_params(1),
    "fig3": lambda n: preset_params(3),
    "fig5": lambda n: preset_params(5),
    "atomchip": atom_chip_preset,
    "artificial": artificial_atom_preset,
}


class _ArgumentError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise _ArgumentError(message)


def _add_param_flags(sp, *, n_default=None):
    g = sp.add_mutually_exclusive_group()
    g.add_argument("--b-A", dest="b_A", type=float, help="bare transition frequency over Gamma_0")
    g.add_argument("--b-tilde", dest="b_tilde", type=float, help="Lamb-shifted frequency over Gamma_0")
    sp.add_argument("--Lambda", dest="Lambda", type=float, help="cutoff over transition frequency (> 1)")
    sp.add_argument("--n", type=int, default=n_default, choices=(0, 1), help="kernel power")
    sp.add_argument("--preset", choices=sorted(_PRESETS), help="named parameter set; flags override it")
    sp.add_argument("--params", help="JSON parameter file")
    sp.add_argument("--force-lambda-tilde-equal", action="store_true",
                    help="use Lambda in place of Lambda_tilde inside kernels and models")


def _add_output_flags(sp, formats=("csv", "json"), default="csv"):
    sp.add_argument("--out", help="output path (default: stdout)")
    sp.add_argument("--format", choices=formats, default=default)


def _add_grid_flags(sp, tau_max=None, step=None):
    sp.add_argument("--tau-max", dest="tau_max", type=float, default=tau_max)
    sp.add_argument("--step", type=float, default=step)
    sp.add_argument("--digits", type=int, default=15, help="working digits; > 15 selects mpmath")


def build_parser() -> argparse.ArgumentParser:
    ap = _Parser(prog="memdecay", description="Non-exponential decay of a two-level emitter.")
    ap.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = ap.add_subparsers(dest="command", required=True, parser_class=_Parser)

    sp = sub.add_parser("solve", help="solve the regularized Volterra equation")
    _add_param_flags(sp)
    _add_grid_flags(sp, tau_max=10.0, step=1e-3)
    _add_output_flags(sp)
    sp.add_argument("--method", choices=("auto", "fft", "direct", "general"), default="auto")
    sp.add_argument("--stride", type=int, default=1, help="write every k-th node")
    sp.add_argument("--no-error-estimate", action="store_true")

    sp = sub.add_parser("compare", help="solver against a closed-form model")
    _add_param_flags(sp)
    _add_grid_flags(sp, tau_max=40.0, step=1e-3)
    _add_output_flags(sp)
    sp.add_argument("--model", choices=[m.name for m in AsymptoticModel], default="LargeKM0")
    sp.add_argument("--tau-min", dest="tau_min", type=float, default=1.0)
    sp.add_argument("--sample", type=float, default=0.01)

    sp = sub.add_parser("figure", help="data behind figure 1-5")
    sp.add_argument("number", type=int, choices=sorted(FIGURES))
    _add_param_flags(sp)
    sp.add_argument("--tau-max", dest="tau_max", type=float)
    sp.add_argument("--step", type=float)
    sp.add_argument("--sample", type=float)
    sp.add_argument("--method", choices=("contour", "solver"), default="contour")
    _add_output_flags(sp)

    sp = sub.add_parser("crossover", help="crossover times")
    _add_param_flags(sp)
    _add_output_flags(sp, ("json",), "json")

    sp = sub.add_parser("physical", help="dimensionless parameters from atomic data")
    sp.add_argument("--omega-A-hz", dest="omega_A_hz", type=float, required=True,
                    help="transition frequency omega_A/2pi in Hz")
    sp.add_argument("--S2", type=float, required=True)
    sp.add_argument("--g-S", dest="g_S", type=float, required=True)
    sp.add_argument("--Lambda", dest="Lambda", type=float,
                    help="cutoff ratio; default m_e c^2 / (hbar omega_A)")
    sp.add_argument("--n", type=int, default=0, choices=(0, 1))
    _add_output_flags(sp, ("json",), "json")

    sp = sub.add_parser("appendix-check", help="large-tau forms of the cut integrals")
    _add_param_flags(sp)
    sp.add_argument("--tau", type=float, nargs="+", default=[10.0, 30.0, 100.0])
    sp.add_argument("--quad-order", dest="quad_order", type=int, default=64)
    _add_output_flags(sp, ("json",), "json")

    sp = sub.add_parser("unitarity", help="probability conservation audit")
    _add_param_flags(sp)
    _add_grid_flags(sp, tau_max=10.0, step=1e-3)
    sp.add_argument("--n-omega", dest="n_omega", type=int, default=8000)
    sp.add_argument("--checkpoints", type=float, nargs="+", default=[1.0, 5.0, 10.0])
    _add_output_flags(sp, ("json",), "json")
    return ap


def resolve_params(args, default=None):
    """Params from preset, JSON file and inline flags (later sources override)."""
    n = getattr(args, "n", None)
    base = None
    if args.preset:
        base = _PRESETS[args.preset](n or 0)
    if args.params:
        if base is not None:
            raise DomainError("give either --preset or --params, not both")
        base = load_params_json(args.params)
    if base is None and default is not None:
        base = default
    Lambda = args.Lambda if args.Lambda is not None else (base.Lambda if base else None)
    n = n if n is not None else (base.n if base else 0)
    force = args.force_lambda_tilde_equal or (base.force_lambda_tilde_equal if base else False)
    if args.b_A is not None or args.b_tilde is not None:
        if Lambda is None:
            raise DomainError("--Lambda is required")
        if args.b_A is not None:
            return from_dimensionless(args.b_A, Lambda, n, force_lambda_tilde_equal=force)
        return from_b_tilde(args.b_tilde, Lambda, n, force_lambda_tilde_equal=force)
    if base is None:
        raise DomainError("specify --b-A or --b-tilde with --Lambda, a --preset, or --params")
    if args.Lambda is not None:
        return from_dimensionless(base.b_A, Lambda, n, force_lambda_tilde_equal=force,
                                  gamma0_si=base.gamma0_si)
    return from_dimensionless(base.b_A, base.Lambda, n, force_lambda_tilde_equal=force,
                              gamma0_si=base.gamma0_si)


@contextmanager
def _open_out(path):
    if path is None:
        yield sys.stdout
    else:
        with open(path, "w", newline="", encoding="utf-8") as fh:
            yield fh


def _jsonable(obj):
    if isinstance(obj, complex):
        return {"re": obj.real, "im": obj.imag}
    if isinstance(obj, (np.floating,)):
        return float(obj)
    if isinstance(obj, (np.integer,)):
        return int(obj)
    if isinstance(obj, dict):
        return {k: _jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_jsonable(v) for v in obj]
    if isinstance(obj, float) and not math.isfinite(obj):
        return None
    return obj


def _write_json(path, payload):
    with _open_out(path) as fh:
        json.dump(_jsonable(payload), fh, indent=2, sort_keys=False)
        fh.write("\n")


def _write_table(path, fmt, header, rows, meta):
    with _open_out(path) as fh:
        if fmt == "json":
            json.dump(_jsonable({**meta, "columns": header, "rows": [list(r) for r in rows]}), fh, indent=2)
            fh.write("\n")
        else:
            w = csv.writer(fh, lineterminator="\r\n")
            w.writerow(header)
            for r in rows:
                w.writerow([repr(float(v)) if isinstance(v, (float, np.floating)) else v for v in r])


def _precision(args):
    return PrecisionConfig(working_digits=args.digits)


def _cmd_solve(args):
    p = resolve_params(args)
    prec = _precision(args)
    grid = Grid.uniform(args.tau_max, args.step)
    traj = solve(p, grid=grid, prec=prec, method=args.method,
                 estimate_error=not args.no_error_estimate)
    if args.format == "csv":
        with _open_out(args.out) as fh:
            trajectory_csv(traj, fh, stride=max(1, args.stride))
    else:
        idx = range(0, grid.count, max(1, args.stride))
        c = traj.amplitude_complex()
        _write_json(args.out, {
            "params": p.as_dict(), "kernel": traj.kernel.name, "method": traj.method,
            "working_digits": prec.working_digits, "est_error": traj.est_error, "notes": traj.notes,
            "tau": [float(grid.nodes[k]) for k in idx],
            "re_c": [float(c[k].real) for k in idx], "im_c": [float(c[k].imag) for k in idx],
            "abs2": [float(abs(c[k]) ** 2) for k in idx],
            "est_error_node": [float(traj.node_error[k]) for k in idx],
        })


def _cmd_compare(args):
    p = resolve_params(args)
    model = AsymptoticModel[args.model]
    traj = solve(p, grid=Grid.uniform(args.tau_max, args.step), prec=_precision(args))
    stride = max(1, int(round(args.sample / traj.grid.step)))
    idx = [k for k in range(0, traj.grid.count, stride) if traj.grid.nodes[k] >= args.tau_min]
    t = traj.grid.nodes[idx]
    exact = traj.abs2()[idx]
    approx = np.abs(amplitude_model(model, t, p)) ** 2
    rel = np.abs(approx / exact - 1)
    header = ["tau", "abs2_exact", "abs2_model", "rel_dev", "est_error"]
    rows = list(zip(t, exact, approx, rel, traj.node_error[idx]))
    meta = {"params": p.as_dict(), "model": model.name, "max_rel_dev": float(rel.max()) if rel.size else 0.0}
    _write_table(args.out, args.format, header, rows, meta)


def _cmd_figure(args):
    explicit = args.b_A is not None or args.b_tilde is not None or args.params or args.preset \
        or args.Lambda is not None or args.n is not None or args.force_lambda_tilde_equal
    p = resolve_params(args, default=preset_params(args.number)) if explicit else None
    header, rows, meta = figure_data(args.number, p, tau_max=args.tau_max, step=args.step,
                                     sample=args.sample, method=args.method)
    _write_table(args.out, args.format, header, rows, meta)


def _cmd_crossover(args):
    p = resolve_params(args)
    ct = crossover_times(p)
    _write_json(args.out, {"params": p.as_dict(), **ct.as_dict()})


def _cmd_physical(args):
    omega_A = 2 * math.pi * args.omega_A_hz
    lam = args.Lambda if args.Lambda is not None else electron_mass_cutoff(omega_A)
    inp = PhysicalInput(omega_A=omega_A, S2=args.S2, g_S=args.g_S, omega_c=lam * omega_A)
    p = from_physical(inp, args.n)
    _write_json(args.out, {"params": p.as_dict(), "gamma0_per_s": p.gamma0_si,
                           "crossover": crossover_times(p).as_dict()})


def _cmd_appendix(args):
    p = resolve_params(args)
    out = {"params": p.as_dict(), "n0": [], "n1": []}
    for t in args.tau:
        out["n0"].append(flat_cut_integral_study(t, p, args.quad_order))
        out["n1"].append(linear_cut_integral_study(t, p, args.quad_order))
    _write_json(args.out, out)


def _cmd_unitarity(args):
    p = resolve_params(args)
    if p.n != 0:
        raise UnsupportedKindError("the unitarity audit is defined for n = 0 only")
    traj = solve(p, grid=Grid.uniform(args.tau_max, args.step), prec=_precision(args))
    rep = unitarity_audit(traj, args.n_omega, args.checkpoints)
    _write_json(args.out, {"params": p.as_dict(), "step": traj.grid.step, "n_omega": args.n_omega,
                           "taus": rep.taus, "excited_prob": rep.excited_prob,
                           "emitted_prob": rep.emitted_prob, "defect": rep.defect,
                           "max_defect": rep.max_defect})


_COMMANDS = {
    "solve": _cmd_solve,
    "compare": _cmd_compare,
    "figure": _cmd_figure,
    "crossover": _cmd_crossover,
    "physical": _cmd_physical,
    "appendix-check": _cmd_appendix,
    "unitarity": _cmd_unitarity,
}


def _diagnose(kind, exc, **extra):
    rec = {"error": kind, "type": type(exc).__name__, "message": str(exc), **extra}
    sys.stderr.write(json.dumps(rec) + "\n")


def run(argv=None) -> int:
    """Parse ``argv`` and execute one command; returns the exit code."""
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except _ArgumentError as exc:
        _diagnose("usage", exc)
        return EXIT_DOMAIN
    try:
        with warnings.catch_warnings(record=True) as caught:
            warnings.simplefilter("always", ResolutionWarning)
            _COMMANDS[args.command](args)
        for w in caught:
            if issubclass(w.category, ResolutionWarning):
                sys.stderr.write(json.dumps({"warning": "resolution", "message": str(w.message)}) + "\n")
    except (DomainError, ResolutionError, UnsupportedKindError) as exc:
        _diagnose("domain", exc)
        return EXIT_DOMAIN
    except PrecisionError as exc:
        _diagnose("precision", exc, needed_digits=exc.needed_digits)
        return EXIT_CONVERGENCE
    except ConvergenceError as exc:
        _diagnose("convergence", exc)
        return EXIT_CONVERGENCE
    except MemDecayError as exc:
        _diagnose("error", exc)
        return EXIT_DOMAIN
    except OSError as exc:
        _diagnose("io", exc)
        return EXIT_DOMAIN
    return EXIT_OK


def main():
    sys.exit(run())
