"""Command-line front end.

Subcommands
    model     -> modal reduction + plant matrices as JSON
    tune      -> grid-search tuning: result.json and mesh.csv
    lqr       -> Bryson-weighted LQR gain report
    freq      -> frequency-response CSV for the tuned design
    simulate  -> closed-loop run: trace.csv and summary.json
    compare   -> passive / SMC (both indexes) / LQR side by side

Exit codes: 0 success, 2 invalid input, 3 infeasible tuning, 4 numerical failure.
"""
from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

import numpy as np

from .errors import ConfigError, InfeasibleTuningError, NumericalError
from .fixtures import fixture_path
from .freqresp import build_transfer_functions, dump_frequency_response
from .lqr import MaxValues, bryson_weights, lqr_equivalent_polespec, solve_lqr
from .sim import (LqrControl, PassiveControl, SmcControl, load_accelerogram,
                  simulate, summarize, write_trace_csv)
from .structure import load_building_config, plant_from_setup
from .tuning import export_mesh, load_tuning_config, tune

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_INFEASIBLE = 3
EXIT_NUMERICAL = 4


def _resolve(path_arg: str) -> Path:
    """Existing filesystem path, or the bundled fixture of that name."""
    p = Path(path_arg)
    if p.exists():
        return p
    bundled = fixture_path(path_arg)
    if bundled is not None:
        return bundled
    raise ConfigError(f"no such file (or bundled fixture): {path_arg}")


def _write_json(payload: dict, path: Path) -> None:
    path.write_text(json.dumps(payload, indent=2, sort_keys=True) + "\n")


def _load_setup(args):
    setup = load_building_config(_resolve(args.config))
    modal, plant = plant_from_setup(setup)
    return setup, modal, plant


def _modal_dict(modal) -> dict:
    return {
        "phi0": [float(x) for x in modal.phi0],
        "m0": modal.m0, "c0": modal.c0, "k0": modal.k0,
        "beta0": modal.beta0, "omega0": modal.omega0,
    }


def _plant_dict(plant) -> dict:
    return {
        "A": [[float(x) for x in row] for row in plant.A],
        "B": [float(x) for x in plant.B],
        "D": [float(x) for x in plant.D],
        "bounds": {"delta": plant.bounds.delta, "varpi": plant.bounds.varpi},
    }


def cmd_model(args) -> int:
    setup, modal, plant = _load_setup(args)
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    _write_json(_modal_dict(modal), out / "modal.json")
    _write_json(_plant_dict(plant), out / "plant.json")
    print(f"stories: {setup.building.n_stories}")
    print(f"m0 = {modal.m0:.4f} kg   k0 = {modal.k0:.4f} N/m   c0 = {modal.c0:.4f} N*s/m")
    print(f"omega0 = {modal.omega0:.4f} rad/s   beta0 = {modal.beta0:.4f}")
    print(f"wrote {out / 'modal.json'} and {out / 'plant.json'}")
    return EXIT_OK


def _tuning_config(args):
    config = load_tuning_config(_resolve(args.tuning))
    if getattr(args, "index", None):
        config = load_tuning_config({**config.to_dict(), "index": args.index})
    return config


def cmd_tune(args) -> int:
    _, modal, plant = _load_setup(args)
    config = _tuning_config(args)
    result = tune(plant, modal, config, workers=args.workers)
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    result.to_json(out / "result.json")
    if not result.feasible:
        print(f"infeasible: {result.message}", file=sys.stderr)
        return EXIT_INFEASIBLE
    export_mesh(result, out / "mesh.csv")
    best = result.best
    print(f"feasible points: {result.feasible_count}")
    print(f"best ({config.index}): zeta = {best.zeta:.2f}, "
          f"omega_n = {best.omega_ratio:.2f} * omega0 = {best.omega_n:.4f} rad/s")
    print(f"eta = {np.array2string(best.eta, precision=4)}")
    print(f"kappa = [{100 * best.kappa1:.2f} cm, {1000 * best.kappa2:.3f} mm, "
          f"{100 * best.kappa3:.2f} cm/s, {best.kappa_u:.3f} N]")
    print(f"chi = {result.chi:.4f} N   M0 = {result.M0:.4f} N")
    print(f"wrote {out / 'result.json'} and {out / 'mesh.csv'}")
    return EXIT_OK


def _load_maxima(path: Path) -> MaxValues:
    try:
        raw = json.loads(path.read_text())
        return MaxValues(z1=float(raw["z1_max"]), z2=float(raw["z2_max"]),
                         z3=float(raw["z3_max"]), z4=float(raw["z4_max"]),
                         u=float(raw["u_max"]))
    except json.JSONDecodeError as exc:
        raise ConfigError(f"{path}: invalid JSON at line {exc.lineno}: {exc.msg}") from exc
    except (KeyError, TypeError) as exc:
        raise ConfigError(f"{path}: needs numeric z1_max..z4_max and u_max") from exc


def cmd_lqr(args) -> int:
    _, modal, plant = _load_setup(args)
    spec = bryson_weights(_load_maxima(_resolve(args.maxima)))
    result = solve_lqr(plant, spec)
    equivalent = lqr_equivalent_polespec(result, modal.omega0)
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    payload = {
        "Q": [float(q) for q in np.diag(spec.Q)],
        "r": spec.r,
        "k_gain": [float(x) for x in result.k_gain],
        "closed_loop_eigs": [[e.real, e.imag] for e in result.closed_loop_eigs],
        "riccati_residual": result.residual,
        "equivalent": equivalent,
    }
    _write_json(payload, out / "lqr.json")
    print(f"k = {np.array2string(result.k_gain, precision=4)}")
    print(f"closed-loop eigenvalues: {np.array2string(result.closed_loop_eigs, precision=4)}")
    print(f"dominant pair: zeta = {equivalent['zeta']:.3f}, "
          f"omega_n = {equivalent['omega_ratio']:.3f} * omega0")
    print(f"wrote {out / 'lqr.json'}")
    return EXIT_OK


def cmd_freq(args) -> int:
    _, modal, plant = _load_setup(args)
    config = _tuning_config(args)
    result = tune(plant, modal, config, workers=args.workers)
    if not result.feasible:
        print(result.message, file=sys.stderr)
        return EXIT_INFEASIBLE
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    tfs = build_transfer_functions(result.design)
    dump_frequency_response(tfs, plant.bounds.delta, out / "frequency_response.csv",
                            band=config.band, n_samples=config.n_samples)
    _write_json(result.design.to_dict(), out / "design.json")
    print(f"wrote {out / 'frequency_response.csv'} and {out / 'design.json'}")
    return EXIT_OK


def _quake_from_args(args):
    mode = "pga" if args.pga is not None else "factor"
    scale = args.pga if args.pga is not None else args.scale
    return load_accelerogram(_resolve(args.quake), scale=scale, scale_mode=mode)


def _window_from_args(args):
    if args.window is None:
        return None
    try:
        a, b = (float(x) for x in args.window.split(","))
    except ValueError as exc:
        raise ConfigError(f"--window expects 'a,b', got {args.window!r}") from exc
    return (a, b)


def _smc_controller(plant, modal, config, index, workers):
    result = tune(plant, modal, load_tuning_config({**config.to_dict(), "index": index}),
                  workers=workers)
    if not result.feasible:
        raise InfeasibleTuningError(result.message)
    return SmcControl(result.design, label=f"smc-{index}"), result


def cmd_simulate(args) -> int:
    setup, modal, plant = _load_setup(args)
    quake = _quake_from_args(args)
    t_end = args.t_end if args.t_end is not None else quake.duration
    window = _window_from_args(args)

    if args.controller == "passive":
        controller = PassiveControl()
    elif args.controller == "smc":
        if args.tuning is None:
            raise ConfigError("--tuning is required for the smc controller")
        config = _tuning_config(args)
        controller, _ = _smc_controller(plant, modal, config, config.index,
                                        args.workers)
    else:
        if args.maxima is None:
            raise ConfigError("--maxima is required for the lqr controller")
        lqr_result = solve_lqr(plant, bryson_weights(_load_maxima(_resolve(args.maxima))))
        controller = LqrControl(lqr_result.k_gain)

    trace = simulate(plant, controller, quake, t_end, mu_d=setup.atmd.mu_d)
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    write_trace_csv(trace, out / "trace.csv")
    summary = summarize(trace, window)
    _write_json({"controller": controller.label, "quake": quake.label,
                 "pga": quake.pga, "t_end": t_end, **summary},
                out / "summary.json")
    print(f"{controller.label}: z2 rms = {1000 * summary['z2']['rms']:.3f} mm, "
          f"peak = {1000 * summary['z2']['peak']:.3f} mm; "
          f"u rms = {summary['u']['rms']:.3f} N, peak = {summary['u']['peak']:.3f} N")
    print(f"wrote {out / 'trace.csv'} and {out / 'summary.json'}")
    return EXIT_OK


def cmd_compare(args) -> int:
    setup, modal, plant = _load_setup(args)
    quake = _quake_from_args(args)
    t_end = args.t_end if args.t_end is not None else quake.duration
    window = _window_from_args(args)
    config = load_tuning_config(_resolve(args.tuning))

    controllers = [PassiveControl()]
    for index in ("jz2", "ju"):
        controller, _ = _smc_controller(plant, modal, config, index, args.workers)
        controllers.append(controller)
    if args.maxima is not None:
        lqr_result = solve_lqr(plant, bryson_weights(_load_maxima(_resolve(args.maxima))))
        controllers.append(LqrControl(lqr_result.k_gain))

    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    rows = []
    for controller in controllers:
        trace = simulate(plant, controller, quake, t_end, mu_d=setup.atmd.mu_d)
        summary = summarize(trace, window)
        rows.append((controller.label, summary))

    channels = ("z1", "z2", "z3", "z4", "u")
    with open(out / "comparison.csv", "w", newline="") as fh:
        header = ["controller"]
        for ch in channels:
            header += [f"{ch}_rms", f"{ch}_peak"]
        fh.write(",".join(header) + "\n")
        for label, summary in rows:
            cells = [label]
            for ch in channels:
                cells += [repr(summary[ch]["rms"]), repr(summary[ch]["peak"])]
            fh.write(",".join(cells) + "\n")
    baseline = rows[0][1]
    ratios = {}
    for label, summary in rows[1:]:
        ratios[label] = {
            "z2_peak_attenuation": baseline["z2"]["peak"] / summary["z2"]["peak"]
            if summary["z2"]["peak"] > 0 else None,
            "z2_rms_attenuation": baseline["z2"]["rms"] / summary["z2"]["rms"]
            if summary["z2"]["rms"] > 0 else None,
        }
    _write_json({"quake": quake.label, "pga": quake.pga, "t_end": t_end,
                 "results": {label: summary for label, summary in rows},
                 "attenuation_vs_passive": ratios},
                out / "comparison.json")

    print(f"{'controller':<10} {'z2 rms (mm)':>12} {'z2 peak (mm)':>13} "
          f"{'u rms (N)':>10} {'u peak (N)':>11}")
    for label, summary in rows:
        print(f"{label:<10} {1000 * summary['z2']['rms']:>12.3f} "
              f"{1000 * summary['z2']['peak']:>13.3f} "
              f"{summary['u']['rms']:>10.3f} {summary['u']['peak']:>11.3f}")
    print(f"wrote {out / 'comparison.csv'} and {out / 'comparison.json'}")
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="smctune",
        description="Design, tune, and evaluate a sliding-mode controller for a "
                    "building protected by an active tuned mass damper.")
    sub = parser.add_subparsers(dest="command", required=True)

    def add_common(p):
        p.add_argument("--config", required=True,
                       help="building JSON (path or bundled fixture name)")
        p.add_argument("--out", default=".", help="output directory")

    p_model = sub.add_parser("model", help="modal reduction and plant matrices")
    add_common(p_model)
    p_model.set_defaults(func=cmd_model)

    p_tune = sub.add_parser("tune", help="grid-search tuning")
    add_common(p_tune)
    p_tune.add_argument("--tuning", required=True, help="tuning JSON")
    p_tune.add_argument("--index", choices=("jz2", "ju"), default=None,
                        help="override the performance index")
    p_tune.add_argument("--workers", type=int, default=1)
    p_tune.set_defaults(func=cmd_tune)

    p_lqr = sub.add_parser("lqr", help="LQR baseline gain")
    add_common(p_lqr)
    p_lqr.add_argument("--maxima", required=True, help="maxima JSON for the weights")
    p_lqr.set_defaults(func=cmd_lqr)

    p_freq = sub.add_parser("freq", help="frequency response of the tuned design")
    add_common(p_freq)
    p_freq.add_argument("--tuning", required=True)
    p_freq.add_argument("--index", choices=("jz2", "ju"), default=None)
    p_freq.add_argument("--workers", type=int, default=1)
    p_freq.set_defaults(func=cmd_freq)

    def add_sim_args(p):
        p.add_argument("--quake", required=True, help="ground-motion CSV")
        group = p.add_mutually_exclusive_group()
        group.add_argument("--pga", type=float, default=None,
                           help="rescale the record to this peak acceleration (m/s^2)")
        group.add_argument("--scale", type=float, default=1.0,
                           help="multiply the record by this factor")
        p.add_argument("--t-end", type=float, default=None, dest="t_end")
        p.add_argument("--window", default=None, help="summary window 'a,b' in seconds")
        p.add_argument("--workers", type=int, default=1)

    p_sim = sub.add_parser("simulate", help="closed-loop time-domain run")
    add_common(p_sim)
    add_sim_args(p_sim)
    p_sim.add_argument("--controller", choices=("passive", "smc", "lqr"), required=True)
    p_sim.add_argument("--tuning", default=None)
    p_sim.add_argument("--index", choices=("jz2", "ju"), default=None)
    p_sim.add_argument("--maxima", default=None)
    p_sim.set_defaults(func=cmd_simulate)

    p_cmp = sub.add_parser("compare", help="all controllers side by side")
    add_common(p_cmp)
    add_sim_args(p_cmp)
    p_cmp.add_argument("--tuning", required=True)
    p_cmp.add_argument("--maxima", default=None,
                       help="include the LQR column when given")
    p_cmp.set_defaults(func=cmd_compare)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except ConfigError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except InfeasibleTuningError as exc:
        print(f"infeasible: {exc}", file=sys.stderr)
        return EXIT_INFEASIBLE
    except NumericalError as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERICAL


if __name__ == "__main__":
    sys.exit(main())
