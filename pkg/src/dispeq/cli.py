"""Command-line entry point.

Exit codes: 0 success, 2 configuration error, 3 solver non-convergence,
4 physics-validation failure.
"""
from __future__ import annotations

import argparse
import json
import math
import os
import sys

import numpy as np

from . import records
from .config import ConfigError, PulseConfig, load_config
from .dispersion import (
    ConstantIndex,
    RationalPermittivity,
    WaveguideGeometry,
    find_zero_curvature_frequency,
    mode_pair_coefficients,
    special_frequencies,
    uniaxial_design_solve,
    UniaxialDesign,
)
from .errors import (
    BranchError,
    ConvergenceError,
    DegenerateSystemError,
    DomainError,
    InfeasibleError,
    NoRootError,
    OrderingError,
    AliasError,
    QuadratureError,
)
from .placement import PlacementProblem, solve_general, solve_reduced, condition_stack
from .presets import polynomial_law
from .realization import (
    SWEEP_COLUMNS,
    GrapheneFlake,
    StackDesign,
    UniaxialMedium,
    intraband_conductivity,
    length_ratio,
    tilt_and_transmissivity,
    transmissivity_sweep,
    white_line_mu,
    zero_conductivity,
)
from .transfer import GenericScatterer, Pauli2Scatterer, PhaseGenerator, composite_matrix, propagation_matrix
from .verify import PulseSpec, propagate_pulse, residual_fit, residual_order

EXIT_OK, EXIT_CONFIG, EXIT_SOLVER, EXIT_PHYSICS = 0, 2, 3, 4


class _Exit(Exception):
    def __init__(self, code, message):
        super().__init__(message)
        self.code = code


def _need(cfg, section, command):
    if getattr(cfg, section) is None:
        raise ConfigError(f"{command} needs a '{section}' section")


# ---------------------------------------------------------------------------
# builders


def _guide_laws(cfg):
    wg = cfg.waveguide
    if wg.laws is not None:
        return tuple(polynomial_law(c, wg.omega0) for c in wg.laws)
    geom = WaveguideGeometry(wg.a, wg.b)
    if wg.constant_index is not None:
        model = ConstantIndex(wg.constant_index)
    else:
        model = RationalPermittivity(wg.strength, wg.pole_sq, wg.eps_inf)
    return tuple(geom.mode(model, l, j) for l, j in wg.modes)


def _guide_omega0(cfg, laws):
    if cfg.waveguide.omega0 is not None:
        return cfg.waveguide.omega0
    if len(laws) != 2:
        raise ConfigError("waveguide.omega0 is required for more than two modes")
    try:
        return find_zero_curvature_frequency(laws[0], laws[1], cfg.waveguide.bracket)
    except (NoRootError, DomainError) as e:
        raise _Exit(EXIT_PHYSICS, f"no zero-curvature frequency: {e}") from None


def _scatterer(cfg, w0, n):
    sc = cfg.scatterer
    if sc is not None and sc.action is not None:
        A = np.array(sc.action[0]) + 1j * np.array(sc.action[1])
        B = np.zeros_like(A)
        if sc.slope is not None:
            B = np.array(sc.slope[0]) + 1j * np.array(sc.slope[1])
        if A.shape != (n, n):
            raise ConfigError(f"scatterer.action must be {n}x{n}")
        return GenericScatterer(lambda w: A + (w - w0) * B, n)
    if n != 2:
        raise ConfigError("a Pauli scatterer (fx) needs exactly two modes")
    fx = sc.fx if sc is not None else (math.pi / 2,)
    return Pauli2Scatterer(w0, tuple(fx))


def _uniaxial_design(cfg, command):
    u = cfg.uniaxial
    if u.omega_p is not None and u.omega0 is not None:
        return UniaxialDesign(u.eps_inf, u.omega_rx, u.omega_ry, u.omega_p, u.omega0,
                              (u.omega_p, u.omega0), (0.0, 0.0), 0, "given")
    try:
        return uniaxial_design_solve(u.eps_inf, u.omega_rx, u.omega_ry, curvature=u.curvature)
    except ConvergenceError as e:
        raise _Exit(EXIT_SOLVER, str(e)) from None
    except (OrderingError, DomainError, ValueError) as e:
        raise _Exit(EXIT_PHYSICS, str(e)) from None


def _provider(cfg):
    g = cfg.graphene
    return zero_conductivity if g is not None and g.provider == "transparent" else intraband_conductivity


def _flake(cfg, medium, stack, B0=None):
    g = cfg.graphene
    B = g.B0 if B0 is None else B0
    mu = g.mu_c
    if mu is None:
        if g.provider == "transparent":
            mu = 0.0
        else:
            try:
                mu = white_line_mu(abs(B), stack.chi, medium, stack.omega0,
                                   GrapheneFlake(1e-3, abs(B), g.tau, g.temperature, g.v_f))
            except NoRootError as e:
                raise _Exit(EXIT_PHYSICS, str(e)) from None
    return GrapheneFlake(mu, B, g.tau, g.temperature, g.v_f)


def _load_solution(path):
    if path is None:
        raise ConfigError("--solution is required")
    try:
        with open(path, encoding="utf-8") as fh:
            data = json.load(fh)
        p = data["payload"]
        return np.array(p["lengths"], dtype=float), p
    except (OSError, ValueError, KeyError, TypeError) as e:
        raise ConfigError(f"cannot read solution file {path}: {e}") from None


def _period(cfg, lengths):
    laws = _guide_laws(cfg)
    w0 = _guide_omega0(cfg, laws)
    phase = PhaseGenerator(laws)
    sc = _scatterer(cfg, w0, len(laws))
    reps = len(laws)

    def sweep(w):
        return composite_matrix(lengths, sc, phase, w, repetitions=reps)

    def bare(w):
        return propagation_matrix(phase, reps * float(np.sum(lengths)), w)

    return w0, sweep, bare, laws


# ---------------------------------------------------------------------------
# commands


def cmd_design_waveguide(cfg, args):
    _need(cfg, "waveguide", "design-waveguide")
    laws = _guide_laws(cfg)
    if len(laws) != 2:
        raise ConfigError("design-waveguide needs exactly two modes")
    w0 = _guide_omega0(cfg, laws)
    try:
        co = mode_pair_coefficients(laws[0], laws[1], w0, cfg.solver.k)
    except DomainError as e:
        raise _Exit(EXIT_PHYSICS, str(e)) from None
    payload = {
        "omega0": w0,
        "modes": [list(m) for m in cfg.waveguide.modes] if cfg.waveguide.laws is None else None,
        "kappa": [laws[0](w0), laws[1](w0)],
        "FI_derivatives": co.fi_derivatives(),
        "Fz_derivatives": co.fz_derivatives(),
        "FI_taylor": co.fi,
        "Fz_taylor": co.fz,
    }
    return {"design_waveguide.json": records.bundle("design-waveguide", payload, cfg)}


def cmd_solve(cfg, args):
    _need(cfg, "waveguide", "solve")
    s = cfg.solver
    seeds = args.seed_count or s.seeds
    laws = _guide_laws(cfg)
    w0 = _guide_omega0(cfg, laws)
    phase = PhaseGenerator(laws)
    sc = _scatterer(cfg, w0, len(laws))
    try:
        if s.mode == "reduced":
            if len(laws) != 2:
                raise ConfigError("reduced mode needs two modes")
            co = mode_pair_coefficients(laws[0], laws[1], w0, s.k)
            fi, fz = float(co.fi[0]), float(co.fz[0])
            sol = solve_reduced(s.m, fi, fz, seeds=seeds, tol=s.tol or 1e-10, initial=s.initial)
            extra = {"FI": fi, "Fz": fz, "sum_X": float(np.sum(sol.X)),
                     "winding_target": 2 * math.pi * s.m}
        else:
            prob = PlacementProblem(phase, sc, w0, s.k, winding=s.m, count=s.count, step=s.step)
            sol = solve_general(prob, seeds=seeds, tol=s.tol or 1e-8, threads=args.threads)
            extra = {"degenerate_rows": sol.degenerate_rows}
    except (InfeasibleError, ConvergenceError, DegenerateSystemError) as e:
        raise _Exit(EXIT_SOLVER, f"{type(e).__name__}: {e}") from None
    except DomainError as e:
        raise _Exit(EXIT_PHYSICS, str(e)) from None
    payload = {
        "mode": s.mode,
        "omega0": w0,
        "order": s.k,
        "winding_m": s.m,
        "lengths": sol.lengths,
        "X": sol.X,
        "residuals": sol.residuals,
        "residual_labels": sol.labels,
        "max_residual": sol.max_residual,
        "winding_value": sol.winding,
        "period": len(laws) * sol.period,
        "iterations": sol.iterations,
        "step_norm": sol.step_norm,
        "seed_index": sol.seed_index,
    }
    payload.update(extra)
    return {"solution.json": records.bundle("solve", payload, cfg)}


def _fit_record(fit):
    return {
        "window": fit.window,
        "samples": fit.samples,
        "theta": fit.theta,
        "generator": fit.generator,
        "fit_residual": fit.fit_residual,
        "condition": fit.condition,
        "halvings": fit.halvings,
    }


def _pulse_spec(cfg, w0):
    pc = cfg.pulse or PulseConfig()
    return pc, PulseSpec(w0, pc.bandwidth * abs(w0), pc.amplitudes, pc.samples, pc.span)


def _pulse_record(res):
    rec = {"energy": res.energy, "input_energy": res.input_energy, "centroid": res.centroid,
           "rms_width": res.rms_width, "mode_centroids": res.mode_centroids,
           "mode_widths": res.mode_widths, "input_centroid": res.input_centroid,
           "input_rms_width": res.input_rms_width}
    if res.reference is not None:
        rec["reference"] = _pulse_record(res.reference)
    return rec


def cmd_verify(cfg, args):
    _need(cfg, "waveguide", "verify")
    lengths, sol = _load_solution(args.solution)
    w0, sweep, bare, laws = _period(cfg, lengths)
    k = int(sol.get("order", cfg.solver.k))
    try:
        fit = residual_fit(sweep, w0, max_order=max(k, 1))
        order = residual_order(sweep, w0)
        payload = {"residual_fit": _fit_record(fit),
                   "residual_order": {"slope": order.slope, "r2": order.r2}}
        if np.sum(lengths) > 0:
            ref = residual_order(bare, w0)
            payload["reference_order"] = {"slope": ref.slope, "r2": ref.r2}
        if cfg.pulse is not None:
            pc, spec = _pulse_spec(cfg, w0)
            res = propagate_pulse(spec, sweep, pc.periods, reference=bare)
            payload["pulse"] = _pulse_record(res)
    except (BranchError, AliasError, DomainError) as e:
        raise _Exit(EXIT_PHYSICS, f"{type(e).__name__}: {e}") from None
    return {"verify.json": records.bundle("verify", payload, cfg)}


def cmd_propagate(cfg, args):
    _need(cfg, "waveguide", "propagate")
    lengths, _ = _load_solution(args.solution)
    w0, sweep, bare, laws = _period(cfg, lengths)
    pc, spec = _pulse_spec(cfg, w0)
    try:
        res = propagate_pulse(spec, sweep, pc.periods, reference=bare)
    except (AliasError, DomainError) as e:
        raise _Exit(EXIT_PHYSICS, f"{type(e).__name__}: {e}") from None
    cols = ["t"] + [f"mode{j + 1}_power" for j in range(res.fields.shape[1])]
    rows = np.column_stack([res.times, np.abs(res.fields) ** 2])
    return {"pulse.json": records.bundle("propagate", _pulse_record(res), cfg),
            "pulse.csv": ("pulse", cols, rows)}


def _stack(cfg, design):
    g = cfg.graphene
    N = g.N if g is not None else 100
    Lg = g.L_g if g is not None else 500e-9
    return StackDesign.designed(N, Lg, design.omega0)


def cmd_design_uniaxial(cfg, args):
    _need(cfg, "uniaxial", "design-uniaxial")
    design = _uniaxial_design(cfg, "design-uniaxial")
    medium = UniaxialMedium.from_design(design)
    stack = _stack(cfg, design)
    nx, ny = medium.indices(design.omega0)
    try:
        sf = special_frequencies(design.eps_inf, design.omega_rx, design.omega_ry, design.omega_p)
        special = {"omega_s": sf.omega_s, "omega_0a": sf.omega_0a, "omega_0b": sf.omega_0b,
                   "degenerate": sf.degenerate}
    except NoRootError as e:
        special = {"error": str(e)}
    payload = {
        "curvature": design.curvature,
        "omega_p": design.omega_p,
        "omega0": design.omega0,
        "omega_p_over_2pi_GHz": design.omega_p / (2 * math.pi * 1e9),
        "omega0_over_2pi_GHz": design.omega0 / (2 * math.pi * 1e9),
        "seed": design.seed,
        "residuals": design.residuals,
        "iterations": design.iterations,
        "n_x": nx,
        "n_y": ny,
        "special_frequencies": special,
        "N": stack.N,
        "chi": stack.chi,
        "length_ratio": length_ratio(stack.chi),
        "L_g": stack.L_g,
        "L_m": stack.L_m,
        "small_angle_valid": stack.small_angle,
    }
    out = {}
    g = cfg.graphene
    if g is not None and g.white_line_B0:
        rows = []
        for B in g.white_line_B0:
            try:
                mu = white_line_mu(B, stack.chi, medium, design.omega0,
                                   GrapheneFlake(1e-3, B, g.tau, g.temperature, g.v_f))
                _, tr = tilt_and_transmissivity(GrapheneFlake(mu, B, g.tau, g.temperature, g.v_f),
                                                medium, intraband_conductivity, design.omega0)
            except NoRootError:
                mu, tr = math.nan, math.nan
            rows.append([B, mu, tr])
        payload["white_line"] = [{"B0": r[0], "mu_c": r[1], "transmissivity": r[2]} for r in rows]
        out["white_line.csv"] = ("white-line", ["B0_T", "mu_c_eV", "transmissivity"], rows)
    out["design_uniaxial.json"] = records.bundle("design-uniaxial", payload, cfg)
    return out


def cmd_sweep(cfg, args):
    _need(cfg, "uniaxial", "sweep")
    _need(cfg, "graphene", "sweep")
    design = _uniaxial_design(cfg, "sweep")
    medium = UniaxialMedium.from_design(design)
    stack = _stack(cfg, design)
    flake = _flake(cfg, medium, stack)
    sw = cfg.sweep
    omegas = design.omega0 * np.linspace(sw.w_min, sw.w_max, sw.points)
    try:
        table = transmissivity_sweep(stack, medium, flake, _provider(cfg), omegas, threads=args.threads)
    except DomainError as e:
        raise _Exit(EXIT_PHYSICS, str(e)) from None
    i0 = int(np.argmin(np.abs(table[:, 0] - 1.0)))
    payload = {"omega0": design.omega0, "omega_p": design.omega_p, "mu_c": flake.mu_c,
               "B0": flake.B0, "N": stack.N, "L_g": stack.L_g, "L_m": stack.L_m,
               "columns": list(SWEEP_COLUMNS), "center_row": table[i0]}
    return {"sweep.csv": ("sweep", list(SWEEP_COLUMNS), table),
            "sweep.json": records.bundle("sweep", payload, cfg)}


COMMANDS = {
    "design-waveguide": cmd_design_waveguide,
    "solve": cmd_solve,
    "verify": cmd_verify,
    "design-uniaxial": cmd_design_uniaxial,
    "sweep": cmd_sweep,
    "propagate": cmd_propagate,
}


def build_parser():
    p = argparse.ArgumentParser(prog="dispeq", description="Dispersion-equalizing scatterer design.")
    sub = p.add_subparsers(dest="command", required=True)
    for name in COMMANDS:
        sp = sub.add_parser(name)
        sp.add_argument("--config", required=True, help="YAML run configuration")
        sp.add_argument("--out", default=None, help="output directory (overrides output.directory)")
        sp.add_argument("--seed-count", type=int, default=None, help="multi-start seed count")
        sp.add_argument("--threads", type=int, default=1, help="worker threads")
        if name in ("verify", "propagate"):
            sp.add_argument("--solution", default=None, help="solution.json written by 'solve'")
    return p


def run(argv=None):
    """Run one command; returns (exit code, written paths)."""
    args = build_parser().parse_args(argv)
    try:
        if not os.path.exists(args.config):
            raise ConfigError(f"config file not found: {args.config}")
        cfg = load_config(args.config)
        outputs = COMMANDS[args.command](cfg, args)
    except ConfigError as e:
        print(f"config error: {e}", file=sys.stderr)
        return EXIT_CONFIG, []
    except _Exit as e:
        print(f"{args.command}: {e}", file=sys.stderr)
        return e.code, []
    except QuadratureError as e:
        print(f"{args.command}: {e}", file=sys.stderr)
        return EXIT_PHYSICS, []
    outdir = args.out or cfg.output.directory
    written = []
    for name, obj in outputs.items():
        path = os.path.join(outdir, name)
        if name.endswith(".csv"):
            if "csv" not in cfg.output.formats:
                continue
            kind, cols, rows = obj
            records.write_csv(path, cols, rows, kind)
        else:
            if "json" not in cfg.output.formats:
                continue
            records.write_json(path, obj)
        written.append(path)
    for path in written:
        print(path)
    return EXIT_OK, written


def main(argv=None):
    code, _ = run(argv)
    return code


if __name__ == "__main__":
    sys.exit(main())
