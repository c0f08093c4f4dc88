"""tmreverse command line: scenario runs, sweeps, designs, validation.

Every run reads a JSON config (or a named preset), writes machine
readable artifacts (fields.csv, summary.json, envelope CSVs, sweep.csv)
plus rendered figures into the output directory, and prints a one line
summary.  Exit codes: 0 success, 2 config/schema violation, 3 numerical
failure, 4 file I/O problem.
"""

from __future__ import annotations

import argparse
import json
import sys
import time
from concurrent.futures import ProcessPoolExecutor
from pathlib import Path

import numpy as np

from .analytic import (ThreeWaveParams, apply_io_map, check_reversal_conditions,
                       conversion_coeffs, pump_area)
from .config import (MODES, SchemaError, build_params, build_pulse, build_pump,
                     build_scenario, build_time_grid, load_config, load_preset,
                     measured_bandwidths, override_path, preset_path)
from .dispersion import (bragg_scattering_point, builtin_material, load_material,
                         ppln_sweep)
from .envelope import ComplexEnvelope, envelope_to_csv, spectral_transform
from .perturbative import (TransferSetup, delta_limit_check, first_order_output,
                           mirror_overlap)
from .quantum import parity_sorter
from .solver import SolverError, simulate

EXIT_OK, EXIT_SCHEMA, EXIT_NUMERIC, EXIT_IO = 0, 2, 3, 4

PRESET_NAMES = ("fig2a", "fig2b", "fig2c", "fig2d", "fig3", "fig4",
                "parity_even", "parity_odd", "appendixA_ppln", "appendixA_pcf")


def main(argv=None) -> int:
    parser = _build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except SchemaError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_SCHEMA
    except (SolverError, FloatingPointError) as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERIC
    except OSError as exc:
        print(f"file error: {exc}", file=sys.stderr)
        return EXIT_IO
    except ValueError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_SCHEMA


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="tmreverse",
        description="Envelope time reversal by pumped frequency conversion: "
                    "simulator, closed-form maps, and design tools.")
    sub = parser.add_subparsers(dest="command", required=True)

    def add_run_flags(p):
        p.add_argument("--config", type=Path, help="scenario config JSON")
        p.add_argument("--preset", choices=PRESET_NAMES, help="named built-in config")
        p.add_argument("--out-dir", type=Path, default=Path("tmreverse_out"))
        p.add_argument("--workers", type=int, default=1,
                       help="parallel scenario workers (sweep mode)")
        p.add_argument("--refine", type=int, default=1, metavar="K",
                       help="multiply time samples and z steps by K")
        p.add_argument("--no-figures", dest="figures", action="store_false")
        p.set_defaults(figures=True)

    run = sub.add_parser("run", help="run a config, dispatching on its mode")
    add_run_flags(run)
    run.set_defaults(func=_cmd_run, mode=None)

    for mode in MODES:
        p = sub.add_parser(mode, help=f"run a {mode} config")
        add_run_flags(p)
        p.set_defaults(func=_cmd_run, mode=mode)

    pre = sub.add_parser("preset", help="list presets or dump one to a file")
    pre.add_argument("name", nargs="?", choices=PRESET_NAMES)
    pre.add_argument("--out", type=Path, help="write the preset JSON here")
    pre.set_defaults(func=_cmd_preset)
    return parser


def _cmd_preset(args) -> int:
    if args.name is None:
        for name in PRESET_NAMES:
            cfg = load_preset(name)
            print(f"{name:16s} {cfg.get('description', '')}")
        return EXIT_OK
    text = preset_path(args.name).read_text()
    if args.out:
        args.out.write_text(text)
        print(f"wrote {args.out}")
    else:
        print(text, end="")
    return EXIT_OK


def _cmd_run(args) -> int:
    if (args.config is None) == (args.preset is None):
        raise SchemaError("provide exactly one of --config or --preset")
    cfg = load_preset(args.preset) if args.preset else load_config(args.config)
    if args.mode is not None and cfg["mode"] != args.mode:
        raise SchemaError(f"config mode {cfg['mode']!r} does not match "
                          f"subcommand {args.mode!r}")
    if args.refine > 1:
        cfg = _refine_config(cfg, args.refine)
    label = args.preset or args.config.stem
    out_dir = args.out_dir
    out_dir.mkdir(parents=True, exist_ok=True)
    runner = _RUNNERS[cfg["mode"]]
    return runner(cfg, out_dir, label, figures=args.figures, workers=args.workers)


def _refine_config(cfg: dict, k: int) -> dict:
    cfg = json.loads(json.dumps(cfg))
    target = cfg["base"] if cfg["mode"] == "sweep" else cfg
    if "grid" not in target:
        return cfg
    target["grid"]["n"] *= k
    if "z_steps" in target["grid"]:
        target["grid"]["z_steps"] *= k
    record = target.setdefault("record", {})
    record["stride"] = record.get("stride", 50) * k
    return cfg


# ---------------------------------------------------------------------------
# Writers
# ---------------------------------------------------------------------------

def write_fields_csv(path, result) -> None:
    t = result.scenario.grid.time.times()
    rows = []
    for i, z in enumerate(result.z_slices):
        s, r = result.s_map[i], result.r_map[i]
        block = np.column_stack([np.full(t.shape, z), t, np.abs(s), np.abs(r),
                                 np.angle(s), np.angle(r)])
        rows.append(block)
    np.savetxt(path, np.vstack(rows), fmt="%.12g", delimiter=",",
               header="z,t,abs_As,abs_Ar,arg_As,arg_Ar", comments="")


def write_summary(path, payload: dict) -> None:
    Path(path).write_text(json.dumps(payload, indent=2, sort_keys=True,
                                     default=_json_default) + "\n")


def _json_default(obj):
    if isinstance(obj, (np.floating, np.integer)):
        return obj.item()
    if isinstance(obj, np.ndarray):
        return obj.tolist()
    if obj == float("inf"):
        return "no_poling_needed"
    raise TypeError(f"not JSON serializable: {type(obj)}")


def recompute_metrics_from_fields(fields_csv, summary_json) -> dict:
    """Rebuild flux/efficiency metrics from a dumped fields.csv.

    Cross-check used by the test suite: every summary metric that depends
    only on the recorded fields must be reproducible from the CSV.
    """
    data = np.loadtxt(fields_csv, delimiter=",", skiprows=1)
    with open(summary_json) as fh:
        summary = json.load(fh)
    z_vals = np.unique(data[:, 0])
    n = int(round(data.shape[0] / z_vals.size))
    dt = data[1, 1] - data[0, 1]
    flux = []
    for z in z_vals:
        rows = data[data[:, 0] == z]
        flux.append(dt * np.sum(rows[:, 2] ** 2 + rows[:, 3] ** 2))
    flux = np.asarray(flux)
    r_last = data[data[:, 0] == z_vals[-1]]
    eff = dt * np.sum(r_last[:, 3] ** 2) / flux[0]
    return {
        "flux_error": float(np.max(np.abs(flux - flux[0])) / flux[0]),
        "efficiency": float(eff),
        "n_samples": n,
        "summary_flux_error": summary["metrics"]["flux_error"],
        "summary_efficiency": summary["metrics"]["efficiency"],
    }


# ---------------------------------------------------------------------------
# Mode runners
# ---------------------------------------------------------------------------

def _run_simulate(cfg, out_dir, label, figures=True, workers=1) -> int:
    t0 = time.perf_counter()
    sc = build_scenario(cfg)
    result = simulate(sc)
    magnification = conversion_coeffs(sc.params, abs(pump_area(sc.pump))).magnification
    conditions = check_reversal_conditions(
        sc.params,
        measured_bandwidths(sc.s_in, _pump_envelope(sc), magnification, sc.r_in))
    wall = time.perf_counter() - t0

    write_fields_csv(out_dir / "fields.csv", result)
    envelope_to_csv(sc.s_in, out_dir / "s_in.csv")
    if sc.r_in is not None:
        envelope_to_csv(sc.r_in, out_dir / "r_in.csv")
    envelope_to_csv(result.s_out, out_dir / "s_out.csv")
    envelope_to_csv(result.r_out, out_dir / "r_out.csv")
    summary = {
        "mode": "simulate", "label": label,
        "config": cfg, "metrics": result.metrics,
        "conditions": conditions.as_dict(),
        "wall_time_s": wall,
    }
    write_summary(out_dir / "summary.json", summary)
    if figures:
        from . import report
        report.render_field_map(result, out_dir / "field_map.png",
                                cfg.get("display_span"))
        report.render_reversal(result, out_dir / "reversal.png",
                               cfg.get("display_span"))
    m = result.metrics
    print(f"{label}: efficiency={m['efficiency']:.5f} "
          f"fidelity={m.get('reversal_fidelity', float('nan')):.5f} "
          f"M={m.get('measured_M', float('nan')):.4f} "
          f"flux_err={m['flux_error']:.2e} tau_analytic={m['tau_analytic']:.4f} "
          f"({wall:.2f} s)")
    return EXIT_OK


def _pump_envelope(sc) -> ComplexEnvelope:
    return ComplexEnvelope(sc.grid.time, sc.pump.samples(sc.grid.time.times()))


def _run_analytic(cfg, out_dir, label, figures=True, workers=1) -> int:
    t0 = time.perf_counter()
    params = build_params(cfg)
    pump = build_pump(cfg)
    tgrid = build_time_grid(cfg)
    from .solver import default_idler_center, default_signal_center
    margin = cfg.get("placement_margin", 0.0)
    s_in = build_pulse(cfg["signal"], tgrid,
                       pump.center + default_signal_center(params, margin))
    r_in = None
    if cfg.get("idler") is not None:
        r_in = build_pulse(cfg["idler"], tgrid,
                           pump.center + default_idler_center(params, margin))
    coeffs = conversion_coeffs(params, abs(pump_area(pump)))
    axis = cfg.get("axis", pump.center)
    mapped = apply_io_map(s_in, r_in, coeffs, axis=axis)
    wall = time.perf_counter() - t0

    envelope_to_csv(s_in, out_dir / "s_in.csv")
    envelope_to_csv(mapped.s_out, out_dir / "s_out.csv")
    envelope_to_csv(mapped.r_out, out_dir / "r_out.csv")
    summary = {
        "mode": "analytic", "label": label, "config": cfg,
        "coefficients": {"tau": coeffs.tau, "rho": coeffs.rho,
                         "eps_p": abs(pump_area(pump)),
                         "sigma_bar": coeffs.sigma_bar, "m": coeffs.m,
                         "magnification": coeffs.magnification,
                         "t_s": coeffs.t_s, "t_r": coeffs.t_r,
                         "efficiency": coeffs.efficiency},
        "wall_time_s": wall,
    }
    write_summary(out_dir / "summary.json", summary)
    print(f"{label}: tau={coeffs.tau:.5f} rho={coeffs.rho:.5f} "
          f"M={coeffs.magnification:.4f} efficiency={coeffs.efficiency:.5f} "
          f"({wall:.2f} s)")
    return EXIT_OK


def _run_perturbative(cfg, out_dir, label, figures=True, workers=1) -> int:
    t0 = time.perf_counter()
    setup_cfg = cfg["setup"]
    tgrid = build_time_grid(cfg)
    signal = build_pulse(cfg["signal"], tgrid, 0.0)
    pump_env = build_pulse(cfg["pump"], tgrid, 0.0)
    signal_spec = spectral_transform(signal)
    pump_spec = spectral_transform(pump_env).normalized()
    setup = TransferSetup(sigma_s=setup_cfg["sigma_s"], sigma_r=setup_cfg["sigma_r"],
                          length=setup_cfg["length"], pump_spectrum=pump_spec)
    out_spec = first_order_output(signal_spec, setup)
    overlap_mirror = mirror_overlap(out_spec, signal_spec)
    bandwidths = measured_bandwidths(signal, pump_env, 1.0 / abs(setup.m))
    report_delta = delta_limit_check(setup, bandwidths,
                                     factor=cfg.get("factor", 10.0))
    wall = time.perf_counter() - t0

    _write_spectrum_csv(out_dir / "signal_spectrum.csv", signal_spec)
    _write_spectrum_csv(out_dir / "converted_spectrum.csv", out_spec)
    summary = {
        "mode": "perturbative", "label": label, "config": cfg,
        "metrics": {"mirror_overlap": overlap_mirror, "m": setup.m,
                    "bandwidths": bandwidths},
        "delta_limit": report_delta.as_dict(),
        "wall_time_s": wall,
    }
    write_summary(out_dir / "summary.json", summary)
    if figures:
        from . import report
        from .envelope import resample_spectrum
        nus = out_spec.frequencies()
        mirror = np.abs(resample_spectrum(signal_spec, -nus))
        scale = np.max(np.abs(out_spec.samples)) / max(mirror.max(), 1e-300)
        report.render_spectra(signal_spec.frequencies(), np.abs(signal_spec.samples),
                              nus, np.abs(out_spec.samples),
                              nus, mirror * scale,
                              out_dir / "spectra.png")
    print(f"{label}: mirror_overlap={overlap_mirror:.6f} m={setup.m:.3f} "
          f"delta_limit_pass={report_delta.all_passed} ({wall:.2f} s)")
    return EXIT_OK


def _write_spectrum_csv(path, spec) -> None:
    nus = spec.frequencies()
    arr = np.column_stack([nus, spec.samples.real, spec.samples.imag])
    np.savetxt(path, arr, fmt="%.12g", delimiter=",",
               header=f"nu_start={spec.nu_start!r} d_nu={spec.d_nu!r} n={spec.n}\n"
                      "nu,re,im", comments="# ")


def _run_design(cfg, out_dir, label, figures=True, workers=1) -> int:
    t0 = time.perf_counter()
    material = cfg["material"]
    if isinstance(material, str) and material.startswith("builtin:"):
        model = builtin_material(material.split(":", 1)[1])
    else:
        model = load_material(material)
    if cfg["process"] == "sfg":
        pump_nm = cfg["pump_nm"]
        if isinstance(pump_nm, dict):
            pumps = np.linspace(pump_nm["start"], pump_nm["stop"], pump_nm["count"])
        else:
            pumps = np.asarray(pump_nm, dtype=float)
        points = ppln_sweep(model, cfg["lambda_s_nm"], pumps, cfg["length_m"])
    else:
        points = [bragg_scattering_point(model, cfg["lambda_s_nm"],
                                         cfg["lambda_p1_nm"], cfg["lambda_p2_nm"],
                                         cfg["length_m"])]
    wall = time.perf_counter() - t0

    _write_design_csv(out_dir / "sweep.csv", points)
    summary = {
        "mode": "design", "label": label, "config": cfg,
        "points": [p.as_dict() for p in points],
        "wall_time_s": wall,
    }
    write_summary(out_dir / "summary.json", summary)
    if figures:
        from . import report
        report.render_design_sweep(points, out_dir / "design.png")
    mags = [p.magnification for p in points]
    print(f"{label}: {len(points)} design points, magnification "
          f"[{min(mags):.3f}, {max(mags):.3f}], "
          f"all_feasible={all(p.feasible for p in points)} ({wall:.2f} s)")
    return EXIT_OK


def _write_design_csv(path, points) -> None:
    header = ("lambda_p_nm,lambda_r_nm,poling_period_um,sigma_s_ps_m,"
              "sigma_r_ps_m,m,M,T_max_s_ps,T_max_r_ps,feasible")
    lines = [header]
    for p in points:
        poling = "" if p.poling_period_um is None else f"{p.poling_period_um:.12g}"
        lines.append(",".join([
            f"{p.lambda_p_nm:.12g}", f"{p.lambda_r_nm:.12g}", poling,
            f"{p.sigma_s_ps_m:.12g}", f"{p.sigma_r_ps_m:.12g}",
            f"{p.m:.12g}", f"{p.magnification:.12g}",
            f"{p.t_max_s_ps:.12g}", f"{p.t_max_r_ps:.12g}",
            "1" if p.feasible else "0",
        ]))
    Path(path).write_text("\n".join(lines) + "\n")


def _run_parity(cfg, out_dir, label, figures=True, workers=1) -> int:
    t0 = time.perf_counter()
    tgrid = build_time_grid(cfg)
    pulse = build_pulse(cfg["pulse"], tgrid, 0.0)
    rho_sq = cfg.get("rho_sq", 0.5)
    tau = float(np.sqrt(1.0 - rho_sq))
    rho = float(np.sqrt(rho_sq))
    out = parity_sorter(pulse, tau, rho,
                        interstage_phase=cfg.get("interstage_phase", 0.0),
                        axis=cfg.get("axis", 0.0))
    wall = time.perf_counter() - t0

    envelope_to_csv(pulse, out_dir / "input.csv")
    envelope_to_csv(out.red_envelope, out_dir / "red_out.csv")
    envelope_to_csv(out.blue_envelope, out_dir / "blue_out.csv")
    summary = {
        "mode": "parity", "label": label, "config": cfg,
        "metrics": {"red_prob": out.red_prob, "blue_prob": out.blue_prob,
                    "tau": tau, "rho": rho},
        "wall_time_s": wall,
    }
    write_summary(out_dir / "summary.json", summary)
    if figures:
        from . import report
        t = tgrid.times()
        report.render_parity(t, np.abs(pulse.samples),
                             np.abs(out.red_envelope.samples),
                             np.abs(out.blue_envelope.samples),
                             out.red_prob, out.blue_prob,
                             out_dir / "parity.png")
    print(f"{label}: red_prob={out.red_prob:.6f} blue_prob={out.blue_prob:.6f} "
          f"({wall:.2f} s)")
    return EXIT_OK


def _run_validate(cfg, out_dir, label, figures=True, workers=1) -> int:
    t0 = time.perf_counter()
    params = build_params(cfg)
    pump = build_pump(cfg)
    tgrid = build_time_grid(cfg)
    from .solver import default_signal_center
    signal = build_pulse(cfg["signal"], tgrid,
                         pump.center + default_signal_center(params))
    pump_env = ComplexEnvelope(tgrid, pump.samples(tgrid.times()))
    coeffs = conversion_coeffs(params, abs(pump_area(pump)))
    bandwidths = measured_bandwidths(signal, pump_env, coeffs.magnification)
    factor = cfg.get("factor", 10.0)
    conditions = check_reversal_conditions(params, bandwidths,
                                           beta_p_prime=cfg.get("beta_p_prime", 1.0),
                                           factor=factor)
    setup = TransferSetup(sigma_s=params.sigma_s, sigma_r=params.sigma_r,
                          length=params.length,
                          pump_spectrum=spectral_transform(pump_env).normalized())
    delta = delta_limit_check(setup, bandwidths, factor=factor)
    wall = time.perf_counter() - t0

    summary = {
        "mode": "validate", "label": label, "config": cfg,
        "bandwidths": bandwidths,
        "conditions": conditions.as_dict(),
        "delta_limit": delta.as_dict(),
        "wall_time_s": wall,
    }
    write_summary(out_dir / "summary.json", summary)
    for entry in conditions.entries:
        ratio = "-" if entry.ratio is None else f"{entry.ratio:10.3f}"
        print(f"  [{'PASS' if entry.passed else 'FAIL'}] {entry.name:16s} "
              f"ratio={ratio}  ({entry.description})")
    print(f"{label}: all_passed={conditions.all_passed} at factor {factor} "
          f"({wall:.2f} s)")
    return EXIT_OK


def _sweep_worker(cfg_text: str) -> dict:
    cfg = json.loads(cfg_text)
    sc = build_scenario(cfg)
    result = simulate(sc)
    keep = ("efficiency", "efficiency_analytic", "flux_error", "reversal_fidelity",
            "measured_M", "collision_delay", "map_l2_error", "tau_analytic",
            "rho_analytic")
    return {k: result.metrics[k] for k in keep if k in result.metrics}


def _run_sweep(cfg, out_dir, label, figures=True, workers=1) -> int:
    t0 = time.perf_counter()
    parameter, values = cfg["parameter"], cfg["values"]
    configs = [override_path(cfg["base"], parameter, v) for v in values]
    payloads = [json.dumps(c) for c in configs]
    if workers > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            rows = list(pool.map(_sweep_worker, payloads))
    else:
        rows = [_sweep_worker(p) for p in payloads]
    wall = time.perf_counter() - t0

    keys = sorted({k for row in rows for k in row})
    lines = [",".join([parameter] + keys)]
    for value, row in zip(values, rows):
        lines.append(",".join([f"{value:.12g}"]
                              + [f"{row.get(k, float('nan')):.12g}" for k in keys]))
    (out_dir / "sweep.csv").write_text("\n".join(lines) + "\n")
    write_summary(out_dir / "summary.json",
                  {"mode": "sweep", "label": label, "config": cfg,
                   "rows": rows, "wall_time_s": wall})
    print(f"{label}: swept {parameter} over {len(values)} values "
          f"with {workers} workers ({wall:.2f} s)")
    return EXIT_OK


_RUNNERS = {
    "simulate": _run_simulate,
    "analytic": _run_analytic,
    "perturbative": _run_perturbative,
    "design": _run_design,
    "parity": _run_parity,
    "validate": _run_validate,
    "sweep": _run_sweep,
}


if __name__ == "__main__":
    sys.exit(main())
