"""Command-line surface.

Every subcommand is a reproducible, config-driven run: it validates all
input up front, executes one library operation over a parameter grid,
writes CSV artifacts plus a generic gnuplot script into the output
directory, and records a run manifest (arguments, resolved config,
package versions, wall time) sufficient to reproduce the run.

Exit codes: 0 success, 1 validation error, 2 numerical non-convergence
or ambiguous classification, 3 I/O error.  Failures print a single-line
machine-parseable record to stderr.
"""

from __future__ import annotations

import argparse
import json
import math
import os
import platform
import sys
import time
from dataclasses import dataclass, field
from typing import Callable

import numpy as np
import scipy

from .dispersion import (
    FrequencyGrid,
    MollifiedDelta,
    kk_residual_report,
    mollified_delta_identity,
    weak_limit_drude,
    weak_limit_prediction,
)
from .errors import (
    AmbiguousClassificationError,
    CasimirError,
    ConfigError,
    ConvergenceError,
    CoverageError,
    InadmissibleModelError,
)
from .lifshitz import (
    LifshitzOptions,
    MirrorPair,
    compare_models,
    pressure_and_free_energy,
)
from .materials import (
    GOLD_OSCILLATORS,
    DrudeParams,
    MaterialModel,
    OscillatorSet,
    PermeabilityModel,
    PlasmaParams,
    gold_drude,
    gold_oscillators,
    gold_plasma,
    material_from_dict,
    material_to_dict,
    model_id,
)
from .optics import (
    DrudeBelowCutoff,
    PlasmaBelowCutoff,
    eps_imag_axis_from_data,
    fit_oscillators,
    load_nk_table,
)
from .thermo import default_temperature_ladder, entropy, nernst_probe

__all__ = ["RunConfig", "parse_config", "parse_range", "main", "run"]


# ---------------------------------------------------------------------------
# Config
# ---------------------------------------------------------------------------

@dataclass
class RunConfig:
    """Validated run configuration with defaults filled in."""

    materials: dict[str, MaterialModel] = field(default_factory=dict)
    material: MaterialModel | None = None
    quad_tol: float = 1e-12
    trunc_tol: float = 1e-12
    kk_tol: float = 1e-10
    l_max_cap: int = 10**6
    workers: int | None = None
    seed: int = 0
    output_dir: str | None = None


_TOP_KEYS = {"materials", "material", "tolerances", "l_max_cap", "workers", "seed", "output_dir"}
_TOL_KEYS = {"quad", "trunc", "kk"}


def parse_config(source: str | bytes | dict) -> RunConfig:
    """Parse and fully validate a JSON config document.

    The first offending field is reported with a JSON-pointer path.
    Unknown keys are rejected everywhere.
    """
    if isinstance(source, (str, bytes)):
        try:
            doc = json.loads(source)
        except json.JSONDecodeError as exc:
            raise ConfigError(f"config is not valid JSON: {exc}") from None
    else:
        doc = source
    if not isinstance(doc, dict):
        raise ConfigError(f"config root must be an object, got {type(doc).__name__}")

    for key in doc:
        if key not in _TOP_KEYS:
            raise ConfigError(f"/{key}: unknown key")
    cfg = RunConfig()

    def _material(sub: dict, path: str) -> MaterialModel:
        # Flat shorthand: a bare dielectric block stands for the whole
        # material with default (nonmagnetic) permeability.
        if "type" in sub:
            sub = {"dielectric": sub}
        try:
            return material_from_dict(sub, path=path)
        except ValueError as exc:
            raise ConfigError(str(exc)) from None

    mats = doc.get("materials", {})
    if not isinstance(mats, dict):
        raise ConfigError("/materials: must be an object of name -> material")
    for name, sub in mats.items():
        if not isinstance(sub, dict):
            raise ConfigError(f"/materials/{name}: must be an object")
        cfg.materials[name] = _material(sub, f"/materials/{name}")

    if "material" in doc:
        raw = doc["material"]
        if isinstance(raw, str):
            if raw not in cfg.materials:
                raise ConfigError(f"/material: unknown material name {raw!r}")
            cfg.material = cfg.materials[raw]
        elif isinstance(raw, dict):
            cfg.material = _material(raw, "/material")
        else:
            raise ConfigError("/material: must be an object or a name string")

    tols = doc.get("tolerances", {})
    if not isinstance(tols, dict):
        raise ConfigError("/tolerances: must be an object")
    for key, val in tols.items():
        if key not in _TOL_KEYS:
            raise ConfigError(f"/tolerances/{key}: unknown key")
        if not isinstance(val, (int, float)) or isinstance(val, bool) or not 0.0 < float(val) < 1.0:
            raise ConfigError(f"/tolerances/{key}: must be a number in (0, 1)")
    cfg.quad_tol = float(tols.get("quad", cfg.quad_tol))
    cfg.trunc_tol = float(tols.get("trunc", cfg.trunc_tol))
    cfg.kk_tol = float(tols.get("kk", cfg.kk_tol))

    if "l_max_cap" in doc:
        v = doc["l_max_cap"]
        if not isinstance(v, int) or isinstance(v, bool) or v < 1:
            raise ConfigError("/l_max_cap: must be a positive integer")
        cfg.l_max_cap = v
    if "workers" in doc:
        v = doc["workers"]
        if not isinstance(v, int) or isinstance(v, bool) or v < 1:
            raise ConfigError("/workers: must be a positive integer")
        cfg.workers = v
    if "seed" in doc:
        v = doc["seed"]
        if not isinstance(v, int) or isinstance(v, bool):
            raise ConfigError("/seed: must be an integer")
        cfg.seed = v
    if "output_dir" in doc:
        v = doc["output_dir"]
        if not isinstance(v, str):
            raise ConfigError("/output_dir: must be a string")
        cfg.output_dir = v
    return cfg


def _config_echo(cfg: RunConfig) -> dict:
    return {
        "materials": {name: material_to_dict(m) for name, m in cfg.materials.items()},
        "material": material_to_dict(cfg.material) if cfg.material else None,
        "tolerances": {"quad": cfg.quad_tol, "trunc": cfg.trunc_tol, "kk": cfg.kk_tol},
        "l_max_cap": cfg.l_max_cap,
        "workers": cfg.workers,
        "seed": cfg.seed,
        "output_dir": cfg.output_dir,
    }


# ---------------------------------------------------------------------------
# Small CLI helpers
# ---------------------------------------------------------------------------

def parse_range(text: str) -> list[float]:
    """`start:stop:count` linear, `start:stop:countL` log, or one number."""
    s = text.strip()
    if ":" not in s:
        try:
            return [float(s)]
        except ValueError:
            raise ConfigError(f"range {text!r}: not a number") from None
    parts = s.split(":")
    if len(parts) != 3:
        raise ConfigError(f"range {text!r}: expected start:stop:count")
    log = parts[2].endswith(("L", "l"))
    count_text = parts[2][:-1] if log else parts[2]
    try:
        start, stop, count = float(parts[0]), float(parts[1]), int(count_text)
    except ValueError:
        raise ConfigError(f"range {text!r}: non-numeric field") from None
    if count < 1:
        raise ConfigError(f"range {text!r}: count must be >= 1")
    if count == 1:
        return [start]
    if log:
        if start <= 0.0 or stop <= 0.0:
            raise ConfigError(f"range {text!r}: log spacing needs positive endpoints")
        return [float(v) for v in np.geomspace(start, stop, count)]
    return [float(v) for v in np.linspace(start, stop, count)]


_PHI_ENV = {
    "exp": math.exp,
    "sin": math.sin,
    "cos": math.cos,
    "tan": math.tan,
    "sinh": math.sinh,
    "cosh": math.cosh,
    "tanh": math.tanh,
    "sqrt": math.sqrt,
    "log": math.log,
    "abs": abs,
    "pi": math.pi,
    "e": math.e,
}


def compile_phi(expr: str) -> Callable[[float], float]:
    """Compile a test-function expression in the variable `omega`.

    `^` is accepted as power.  Only the math names in _PHI_ENV and
    `omega` itself may appear; anything else is rejected up front.
    """
    src = expr.replace("^", "**")
    try:
        code = compile(src, "<phi>", "eval")
    except SyntaxError as exc:
        raise ConfigError(f"phi expression {expr!r}: {exc.msg}") from None
    bad = sorted(set(code.co_names) - set(_PHI_ENV) - {"omega"})
    if bad:
        raise ConfigError(f"phi expression uses disallowed names: {', '.join(bad)}")

    def phi(omega: float) -> float:
        local = dict(_PHI_ENV)
        local["omega"] = omega
        return float(eval(code, {"__builtins__": {}}, local))

    return phi


_BUILTIN_MODELS = ("drude", "plasma", "oscillators", "gold-drude", "gold-plasma", "gold-oscillators")


def _resolve_material(args, cfg: RunConfig) -> MaterialModel:
    name = getattr(args, "model", None)
    if name:
        if name in cfg.materials:
            return cfg.materials[name]
        return _builtin_material(name, args)
    if cfg.material is not None:
        return cfg.material
    raise ConfigError("no material given: pass --model or a config with 'material'")


def _builtin_material(name: str, args) -> MaterialModel:
    mu0 = float(getattr(args, "mu0", 1.0) or 1.0)
    debye = getattr(args, "debye_cutoff", None)
    if mu0 != 1.0:
        if debye is not None:
            perm = PermeabilityModel(static_mu=mu0, decay="debye", debye_cutoff_ev=float(debye))
        else:
            perm = PermeabilityModel(static_mu=mu0)
    else:
        perm = PermeabilityModel()
    wp = float(getattr(args, "wp", None) or 9.0)
    gamma = getattr(args, "gamma", None)
    gamma = 0.035 if gamma is None else float(gamma)
    if name == "drude":
        dielectric = DrudeParams(plasma_freq_ev=wp, relaxation_ev=gamma)
    elif name == "plasma":
        dielectric = PlasmaParams(plasma_freq_ev=wp)
    elif name in ("oscillators", "gold-oscillators"):
        base = gold_oscillators().dielectric
        dielectric = OscillatorSet(plasma_freq_ev=wp if name == "oscillators" else base.plasma_freq_ev,
                                   oscillators=GOLD_OSCILLATORS)
    elif name == "gold-drude":
        dielectric = gold_drude().dielectric
    elif name == "gold-plasma":
        dielectric = gold_plasma().dielectric
    else:
        raise ConfigError(
            f"unknown model {name!r}: expected one of {', '.join(_BUILTIN_MODELS)} "
            "or a material name from the config"
        )
    return MaterialModel(dielectric=dielectric, permeability=perm)


def _lifshitz_options(args, cfg: RunConfig) -> LifshitzOptions:
    quad_tol = args.quad_tol if args.quad_tol is not None else cfg.quad_tol
    trunc_tol = args.trunc_tol if args.trunc_tol is not None else cfg.trunc_tol
    return LifshitzOptions(quad_tol=quad_tol, trunc_tol=trunc_tol, l_max_cap=cfg.l_max_cap)


def _write_text(path: str, text: str) -> None:
    with open(path, "w", newline="\n") as handle:
        handle.write(text)


def _write_csv(path: str, lines: list[str]) -> None:
    _write_text(path, "\n".join(lines) + "\n")


def _gnuplot_script(csv_name: str, title: str, xlabel: str, ylabel: str,
                    using: str, logx: bool = True, logy: bool = False) -> str:
    lines = [
        "# generic gnuplot script; pair with the CSV next to it",
        "set datafile separator ','",
        f"set title '{title}'",
        f"set xlabel '{xlabel}'",
        f"set ylabel '{ylabel}'",
    ]
    if logx and logy:
        lines.append("set logscale xy")
    elif logx:
        lines.append("set logscale x")
    elif logy:
        lines.append("set logscale y")
    lines.append(f"plot '{csv_name}' every ::1 using {using} with points title '{title}'")
    return "\n".join(lines) + "\n"


# ---------------------------------------------------------------------------
# Subcommand handlers.  Each returns (outputs, params, summary).
# ---------------------------------------------------------------------------

def _cmd_pressure(args, cfg, outdir, workers):
    separations = parse_range(args.a)
    temperatures = parse_range(args.T)
    material = _resolve_material(args, cfg)
    opts = _lifshitz_options(args, cfg)
    ident = model_id(material)

    from concurrent.futures import ThreadPoolExecutor

    cells = [(t, a) for t in temperatures for a in separations]

    def one(cell):
        t, a = cell
        return pressure_and_free_energy(MirrorPair.symmetric(material, a), t, opts)

    if workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            results = list(pool.map(one, cells))
    else:
        results = [one(c) for c in cells]

    lines = ["a_nm,T_K,model_id,P_Pa,F_J_per_m2,l0_TE_Pa,l0_TM_Pa,l_max_used,quad_err_est"]
    for (t, a), (res_p, res_f) in zip(cells, results):
        lines.append(
            f"{a!r},{t!r},{ident},{res_p.pressure_pa!r},{res_f.free_energy_j_per_m2!r},"
            f"{res_p.l0_te_pa!r},{res_p.l0_tm_pa!r},{res_p.l_max_used},"
            f"{res_p.quad_err_est_pa!r}"
        )
    _write_csv(os.path.join(outdir, "pressure.csv"), lines)
    _write_text(
        os.path.join(outdir, "pressure.gp"),
        _gnuplot_script("pressure.csv", "Casimir pressure", "a (nm)", "|P| (Pa)",
                        "1:(abs($4))", logx=True, logy=True),
    )
    params = {
        "a_nm": separations,
        "T_K": temperatures,
        "model": ident,
        "quad_tol": opts.quad_tol,
        "trunc_tol": opts.trunc_tol,
    }
    summary = f"pressure: {len(cells)} points for {ident} -> pressure.csv"
    return ["pressure.csv", "pressure.gp"], params, summary


def _cmd_compare(args, cfg, outdir, workers):
    separations = parse_range(args.a)
    temperature = parse_range(args.T)
    if len(temperature) != 1:
        raise ConfigError("compare needs a single temperature")
    opts = _lifshitz_options(args, cfg)

    if cfg.materials:
        models = list(cfg.materials.values())
    else:
        wp = float(args.wp)
        models = [gold_drude(), gold_plasma(), gold_oscillators()]
        for g in parse_range(args.gamma_ladder):
            models.append(MaterialModel(dielectric=DrudeParams(wp, g)))

    table = compare_models(separations, temperature[0], models, opts, workers=workers)
    _write_csv(os.path.join(outdir, "compare.csv"), table.csv_lines())
    _write_text(
        os.path.join(outdir, "compare.gp"),
        _gnuplot_script("compare.csv", "pressure vs ideal metal", "a (nm)",
                        "P / P_ideal", "1:4", logx=True),
    )
    params = {
        "a_nm": separations,
        "T_K": temperature[0],
        "models": [model_id(m) for m in models],
        "quad_tol": opts.quad_tol,
        "trunc_tol": opts.trunc_tol,
    }
    bad = [r for r in table.rows if r.status != "ok"]
    summary = f"compare: {len(table.rows)} rows, {len(bad)} failed -> compare.csv"
    return ["compare.csv", "compare.gp"], params, summary


def _cmd_kk_check(args, cfg, outdir, workers):
    material = _resolve_material(args, cfg)
    nodes = parse_range(args.grid)
    if len(nodes) < 16:
        raise ConfigError(f"kk grid needs at least 16 nodes, got {len(nodes)}")
    grid = FrequencyGrid(tuple(nodes))
    tol = args.kk_tol if args.kk_tol is not None else cfg.kk_tol
    report = kk_residual_report(material, grid, args.relation, tol=tol, workers=workers)
    if report.failures:
        node, msg = report.failures[0]
        raise ConvergenceError(
            f"{len(report.failures)} of {len(nodes)} nodes failed; first at "
            f"{node:g} eV: {msg}"
        )
    _write_csv(os.path.join(outdir, "kk_report.csv"), report.csv_lines())
    _write_text(
        os.path.join(outdir, "kk_report.gp"),
        _gnuplot_script("kk_report.csv", "dispersion-relation residual", "omega (eV)",
                        "relative residual", "1:5", logx=True, logy=True),
    )
    params = {
        "model": model_id(material),
        "relation": args.relation,
        "grid_ev": nodes,
        "kk_tol": tol,
    }
    summary = (
        f"kk-check: relation={args.relation} nodes={len(nodes)} "
        f"max_rel_residual={report.max_rel_residual!r}"
    )
    return ["kk_report.csv", "kk_report.gp"], params, summary


def _cmd_weak_limit(args, cfg, outdir, workers):
    phi = compile_phi(args.phi)
    outputs: list[str] = []
    if args.mode == "drude":
        gammas = parse_range(args.gammas)
        values = weak_limit_drude(args.wp, phi, gammas)
        h = 1e-6
        dphi0 = (phi(h) - phi(-h)) / (2.0 * h)
        predicted = weak_limit_prediction(args.wp, dphi0)
        lines = ["gamma_eV,I_gamma,predicted_limit,abs_error"]
        for g, v in zip(gammas, values):
            lines.append(f"{g!r},{v!r},{predicted!r},{abs(v - predicted)!r}")
        _write_csv(os.path.join(outdir, "weak_limit.csv"), lines)
        outputs.append("weak_limit.csv")
        params = {"mode": "drude", "phi": args.phi, "wp": args.wp, "gammas": gammas}
        summary = (
            f"weak-limit: I(gamma={gammas[-1]!r}) = {values[-1]!r}, "
            f"predicted limit {predicted!r}"
        )
    else:
        widths = parse_range(args.widths)
        deltas = [MollifiedDelta(w, args.family) for w in widths]
        values = mollified_delta_identity(phi, deltas)
        lines = ["width_eV,family,value"]
        for w, v in zip(widths, values):
            lines.append(f"{w!r},{args.family},{v!r}")
        _write_csv(os.path.join(outdir, "weak_limit.csv"), lines)
        outputs.append("weak_limit.csv")
        params = {"mode": "mollified", "phi": args.phi, "family": args.family, "widths": widths}
        summary = f"weak-limit: mollified value at width {widths[-1]!r} = {values[-1]!r}"
    _write_text(
        os.path.join(outdir, "weak_limit.gp"),
        _gnuplot_script("weak_limit.csv", "weak limit convergence", "parameter",
                        "value", "1:2", logx=True),
    )
    outputs.append("weak_limit.gp")
    return outputs, params, summary


def _cmd_entropy(args, cfg, outdir, workers):
    material = _resolve_material(args, cfg)
    ladder = parse_range(args.t_ladder)
    opts = _lifshitz_options(args, cfg)
    pair = MirrorPair.symmetric(material, args.a)

    from concurrent.futures import ThreadPoolExecutor

    def one(t: float):
        return entropy(pair, t, rel_step=args.rel_step, opts=opts)

    if workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            points = list(pool.map(one, ladder))
    else:
        points = [one(t) for t in ladder]

    lines = ["T_K,S,fd_step,err_est"]
    for p in points:
        lines.append(f"{p.temperature_k!r},{p.s_j_per_m2_k!r},{p.fd_step!r},{p.err_est!r}")
    _write_csv(os.path.join(outdir, "entropy.csv"), lines)
    _write_text(
        os.path.join(outdir, "entropy.gp"),
        _gnuplot_script("entropy.csv", "entropy per unit area", "T (K)",
                        "S (J m^-2 K^-1)", "1:2", logx=True),
    )
    params = {
        "a_nm": args.a,
        "model": model_id(material),
        "T_ladder_K": ladder,
        "rel_step": args.rel_step,
    }
    summary = f"entropy: {len(ladder)} temperatures for {model_id(material)} -> entropy.csv"
    return ["entropy.csv", "entropy.gp"], params, summary


def _cmd_nernst(args, cfg, outdir, workers):
    material = _resolve_material(args, cfg)
    ladder = parse_range(args.t_ladder) if args.t_ladder else list(default_temperature_ladder())
    opts = _lifshitz_options(args, cfg)
    pair = MirrorPair.symmetric(material, args.a)
    cls, curve = nernst_probe(
        pair, ladder, tol=args.tol, rel_step=args.rel_step, opts=opts, workers=workers
    )
    _write_csv(os.path.join(outdir, "nernst.csv"), curve.csv_lines(cls))
    _write_text(
        os.path.join(outdir, "nernst.gp"),
        _gnuplot_script("nernst.csv", "low-temperature entropy", "T (K)",
                        "S (J m^-2 K^-1)", "1:2", logx=True),
    )
    params = {
        "a_nm": args.a,
        "model": model_id(material),
        "T_ladder_K": ladder,
        "tol": args.tol,
        "rel_step": args.rel_step,
    }
    return ["nernst.csv", "nernst.gp"], params, "nernst: " + cls.summary()


def _load_table_from_file(path: str, fmt: str):
    with open(path, "rb") as handle:
        return load_nk_table(handle, format=fmt, provenance=os.path.basename(path))


def _cmd_fit(args, cfg, outdir, workers):
    table = _load_table_from_file(args.data, args.format)
    window = (args.window_lo, args.window_hi)
    result = fit_oscillators(table, args.K, args.wp, window_ev=window)
    _write_text(os.path.join(outdir, "fit_result.json"), result.to_json() + "\n")

    from .materials import chi_generalized_real_axis

    omegas = np.asarray(table.omega_ev)
    mask = (omegas >= result.window_ev[0]) & (omegas <= result.window_ev[1])
    eps_re = table.eps_re()
    eps_im = table.eps_im()
    lines = ["omega_eV,eps_re_data,eps_im_data,eps_re_model,eps_im_model,re_residual,im_residual"]
    for i in np.nonzero(mask)[0]:
        w = float(omegas[i])
        model_eps = 1.0 + chi_generalized_real_axis(result.oscillator_set, w)
        re_r = model_eps.real - float(eps_re[i])
        im_r = model_eps.imag - float(eps_im[i])
        lines.append(
            f"{w!r},{float(eps_re[i])!r},{float(eps_im[i])!r},"
            f"{model_eps.real!r},{model_eps.imag!r},{re_r!r},{im_r!r}"
        )
    _write_csv(os.path.join(outdir, "fit_residuals.csv"), lines)
    params = {
        "data": args.data,
        "format": args.format,
        "K": args.K,
        "wp": args.wp,
        "window_ev": list(result.window_ev),
    }
    summary = (
        f"fit: K={args.K} converged={result.converged} "
        f"residual_norm={result.residual_norm!r} iterations={result.iterations}"
    )
    return ["fit_result.json", "fit_residuals.csv"], params, summary


def _cmd_eps_from_data(args, cfg, outdir, workers):
    table = _load_table_from_file(args.data, args.format)
    xis = parse_range(args.xi)
    if args.extrapolation == "drude":
        extrap = DrudeBelowCutoff(DrudeParams(args.wp, args.gamma))
    else:
        extrap = PlasmaBelowCutoff(PlasmaParams(args.wp))
    lines = ["xi_eV,eps_i_xi"]
    for xi in xis:
        lines.append(f"{xi!r},{eps_imag_axis_from_data(table, xi, extrap)!r}")
    _write_csv(os.path.join(outdir, "eps_imag.csv"), lines)
    _write_text(
        os.path.join(outdir, "eps_imag.gp"),
        _gnuplot_script("eps_imag.csv", "permittivity on the imaginary axis",
                        "xi (eV)", "eps(i xi)", "1:2", logx=True, logy=True),
    )
    params = {
        "data": args.data,
        "format": args.format,
        "xi_ev": xis,
        "extrapolation": args.extrapolation,
        "wp": args.wp,
        "gamma": args.gamma,
    }
    summary = f"eps-from-data: {len(xis)} nodes -> eps_imag.csv"
    return ["eps_imag.csv", "eps_imag.gp"], params, summary


# ---------------------------------------------------------------------------
# Parser and entry point
# ---------------------------------------------------------------------------

class _Parser(argparse.ArgumentParser):
    """argparse variant that reports usage problems as ConfigError.

    Keeps argparse's exit code 2 from colliding with this tool's meaning
    of 2 (numerical non-convergence).
    """

    def error(self, message: str):
        raise ConfigError(message)


def build_parser() -> argparse.ArgumentParser:
    common = _Parser(add_help=False)
    common.add_argument("--config", help="JSON config file")
    common.add_argument("--out", help="output directory (default '.')")
    common.add_argument("--workers", type=int, help="parallel workers inside operations")
    common.add_argument("--seed", type=int, default=0, help="recorded in the manifest")
    common.add_argument("--quad-tol", dest="quad_tol", type=float, default=None)
    common.add_argument("--trunc-tol", dest="trunc_tol", type=float, default=None)

    material_flags = _Parser(add_help=False)
    material_flags.add_argument("--model", help="builtin model or config material name")
    material_flags.add_argument("--wp", type=float, default=None, help="plasma frequency (eV)")
    material_flags.add_argument("--gamma", type=float, default=None, help="relaxation (eV)")
    material_flags.add_argument("--mu0", type=float, default=None, help="static permeability")
    material_flags.add_argument("--debye-cutoff", dest="debye_cutoff", type=float, default=None,
                                help="permeability Debye cutoff (eV); implies smooth decay")

    parser = _Parser(prog="casimir", description=__doc__,
                     formatter_class=argparse.RawDescriptionHelpFormatter)
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("pressure", parents=[common, material_flags],
                       help="pressure and free energy over an (a, T) grid")
    p.add_argument("--a", required=True, help="separation range (nm)")
    p.add_argument("--T", required=True, help="temperature range (K)")
    p.set_defaults(handler=_cmd_pressure)

    p = sub.add_parser("compare", parents=[common],
                       help="model-to-model pressure table at one temperature")
    p.add_argument("--a", required=True, help="separation range (nm)")
    p.add_argument("--T", required=True, help="temperature (K)")
    p.add_argument("--wp", type=float, default=9.0, help="ladder plasma frequency (eV)")
    p.add_argument("--gamma-ladder", dest="gamma_ladder", default="1e-3:1e-6:4L",
                   help="relaxation ladder for the ohmic-loss models")
    p.set_defaults(handler=_cmd_compare)

    p = sub.add_parser("kk-check", parents=[common, material_flags],
                       help="dispersion-relation residual report")
    p.add_argument("--relation", choices=("standard", "generalized"), required=True)
    p.add_argument("--grid", default="0.1:100:48L", help="frequency grid (eV)")
    p.add_argument("--kk-tol", dest="kk_tol", type=float, default=None)
    p.set_defaults(handler=_cmd_kk_check)

    p = sub.add_parser("weak-limit", parents=[common],
                       help="distributional limit checks")
    p.add_argument("--phi", required=True, help="test function of omega, e.g. 'omega*exp(-omega^2)'")
    p.add_argument("--mode", choices=("drude", "mollified"), default="drude")
    p.add_argument("--wp", type=float, default=1.0)
    p.add_argument("--gammas", default="1e-2:1e-5:4L", help="loss ladder (eV)")
    p.add_argument("--family", choices=("gaussian", "lorentzian"), default="gaussian")
    p.add_argument("--widths", default="1e-1:1e-3:5L", help="mollifier width ladder (eV)")
    p.set_defaults(handler=_cmd_weak_limit)

    p = sub.add_parser("entropy", parents=[common, material_flags],
                       help="entropy along a temperature ladder")
    p.add_argument("--a", type=float, required=True, help="separation (nm)")
    p.add_argument("--T-ladder", dest="t_ladder", default="300:2:12L")
    p.add_argument("--rel-step", dest="rel_step", type=float, default=0.05)
    p.set_defaults(handler=_cmd_entropy)

    p = sub.add_parser("nernst", parents=[common, material_flags],
                       help="third-law classification of a mirror model")
    p.add_argument("--a", type=float, required=True, help="separation (nm)")
    p.add_argument("--T-ladder", dest="t_ladder", default=None)
    p.add_argument("--tol", type=float, default=1e-3)
    p.add_argument("--rel-step", dest="rel_step", type=float, default=0.05)
    p.set_defaults(handler=_cmd_nernst)

    p = sub.add_parser("fit", parents=[common],
                       help="fit oscillator parameters to tabulated n,k data")
    p.add_argument("--data", required=True, help="path to the n,k table")
    p.add_argument("--format", choices=("three_column", "two_column_nk"),
                   default="three_column")
    p.add_argument("--K", type=int, default=6, help="number of oscillators")
    p.add_argument("--wp", type=float, default=9.0, help="fixed plasma frequency (eV)")
    p.add_argument("--window-lo", dest="window_lo", type=float, default=2.0)
    p.add_argument("--window-hi", dest="window_hi", type=float, default=None)
    p.set_defaults(handler=_cmd_fit)

    p = sub.add_parser("eps-from-data", parents=[common],
                       help="imaginary-axis permittivity from tabulated data")
    p.add_argument("--data", required=True, help="path to the n,k table")
    p.add_argument("--format", choices=("three_column", "two_column_nk"),
                   default="three_column")
    p.add_argument("--xi", required=True, help="imaginary-frequency range (eV)")
    p.add_argument("--extrapolation", choices=("drude", "plasma"), default="drude")
    p.add_argument("--wp", type=float, default=9.0)
    p.add_argument("--gamma", type=float, default=0.035)
    p.set_defaults(handler=_cmd_eps_from_data)

    return parser


def _error_record(code: int, exc: BaseException) -> str:
    msg = " ".join(str(exc).split())
    return f'ERROR code={code} kind={type(exc).__name__} message="{msg}"'


def main(argv=None) -> int:
    argv = list(sys.argv[1:]) if argv is None else list(argv)
    start = time.monotonic()
    try:
        parser = build_parser()
        args = parser.parse_args(argv)

        cfg = RunConfig()
        if args.config:
            with open(args.config, "r") as handle:
                cfg = parse_config(handle.read())
        if args.workers is not None:
            workers = args.workers
        elif os.environ.get("CASIMIR_KERNEL_WORKERS"):
            try:
                workers = int(os.environ["CASIMIR_KERNEL_WORKERS"])
            except ValueError:
                raise ConfigError(
                    f"CASIMIR_KERNEL_WORKERS={os.environ['CASIMIR_KERNEL_WORKERS']!r} "
                    "is not an integer"
                ) from None
        elif cfg.workers is not None:
            workers = cfg.workers
        else:
            workers = 1
        if workers < 1:
            raise ConfigError(f"workers must be >= 1, got {workers}")

        outdir = args.out or cfg.output_dir or "."
        os.makedirs(outdir, exist_ok=True)

        outputs, params, summary = args.handler(args, cfg, outdir, workers)

        from . import __version__

        manifest = {
            "command": args.command,
            "argv": argv,
            "parameters": params,
            "resolved_config": _config_echo(cfg),
            "workers": workers,
            "seed": args.seed,
            "outputs": outputs,
            "versions": {
                "casimir-lifshitz": __version__,
                "python": platform.python_version(),
                "numpy": np.__version__,
                "scipy": scipy.__version__,
            },
            "wall_time_s": time.monotonic() - start,
        }
        _write_text(
            os.path.join(outdir, "run_manifest.json"),
            json.dumps(manifest, indent=2, sort_keys=True) + "\n",
        )
        print(summary)
        return 0
    except (ConvergenceError, AmbiguousClassificationError) as exc:
        print(_error_record(2, exc), file=sys.stderr)
        return 2
    except (ConfigError, InadmissibleModelError, CoverageError, ValueError, TypeError) as exc:
        print(_error_record(1, exc), file=sys.stderr)
        return 1
    except CasimirError as exc:
        print(_error_record(1, exc), file=sys.stderr)
        return 1
    except OSError as exc:
        print(_error_record(3, exc), file=sys.stderr)
        return 3


def run(argv) -> int:
    """Library-facing alias of main()."""
    return main(argv)


if __name__ == "__main__":
    sys.exit(main())
