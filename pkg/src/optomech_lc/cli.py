"""Command-line entry point (``optomech``)."""
import argparse
import sys
from importlib import resources

import numpy as np

from .config import apply_overrides, load_config, read_config, RunConfig, ENGINES
from .errors import OptomechError
from .params import PARAM_FIELDS, SystemParams, validate
from .sweep import compare, fmt, header_lines, read_csv, run_sweep, to_csv

FIGURES = ("fig1a", "fig1b", "fig2", "fig3")


def bundled_config(name):
    text = resources.files("optomech_lc").joinpath("configs", f"{name}.ini").read_text()
    return load_config(text)


def _add_common(p, config_required=False):
    p.add_argument("--config", required=config_required, help="INI run configuration")
    p.add_argument("--engine", choices=ENGINES + ("all",), help="engine to run")
    p.add_argument("--out", help="output file (default: standard output)")
    p.add_argument("--seed", type=int, help="base random seed (unsigned 64-bit)")
    p.add_argument("--workers", type=int, default=1, help="parallel worker processes")
    p.add_argument("--strict", action="store_true",
                   help="exit with status 1 if any sweep point failed")
    for name in PARAM_FIELDS:
        p.add_argument(f"--{name.replace('_', '-')}", dest=f"p_{name}", type=float,
                       metavar="X", help=f"override {name}")


def build_parser():
    parser = argparse.ArgumentParser(prog="optomech", description=__doc__)
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("sweep", help="run a parameter sweep and write CSV")
    _add_common(p)

    p = sub.add_parser("limit-cycle", help="full report at a single parameter point")
    _add_common(p)
    p.add_argument("--populations", help="write lindblad number populations (n, p_n) here")

    p = sub.add_parser("spectrum", help="resonator spectrum at a single point")
    _add_common(p)
    p.add_argument("--trajectory-out", help="langevin: dump one raw trajectory here")

    p = sub.add_parser("compare", help="compare two engines from sweep CSV files")
    p.add_argument("files", nargs="+", help="one CSV holding both engines, or two CSVs")
    p.add_argument("--engines", nargs=2, metavar=("A", "B"),
                   help="engine tags to compare (default: the first two found)")
    p.add_argument("--window", nargs=2, type=float, metavar=("LO", "HI"),
                   help="restrict the compared sweep values")
    p.add_argument("--no-offset", action="store_true", help="do not fit a sweep offset")
    p.add_argument("--out", help="report file (default: standard output)")

    p = sub.add_parser("reproduce", help="run a bundled figure configuration")
    p.add_argument("figure", choices=FIGURES)
    _add_common(p)
    return parser


def _config(args):
    if getattr(args, "figure", None) and not args.config:
        cfg = bundled_config(args.figure)
    elif args.config:
        cfg = read_config(args.config)
    else:
        cfg = None
    overrides = {k[2:]: v for k, v in vars(args).items() if k.startswith("p_") and v is not None}
    if cfg is None:
        missing = [k for k in ("omega_m", "g", "gamma_m", "delta", "omega_drive")
                   if k not in overrides]
        if missing:
            raise SystemExit(f"error: give --config or all of: "
                             + ", ".join("--" + m.replace("_", "-") for m in missing))
        cfg = RunConfig(params=SystemParams(**overrides))
        overrides = {}
    return apply_overrides(cfg, params=overrides, engine=args.engine, rng_seed=args.seed)


def _emit(text, path):
    if path:
        with open(path, "w", encoding="utf-8", newline="") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


def cmd_sweep(args):
    cfg = _config(args)
    validate(cfg.params)
    result = run_sweep(cfg, workers=args.workers)
    _emit(to_csv(result), args.out)
    failed = result.failed
    if failed:
        print(f"{len(failed)} of {len(result.rows)} points failed", file=sys.stderr)
    return 1 if failed and args.strict else 0


def cmd_limit_cycle(args):
    from .lindblad import build_liouvillian, observables, steady_state
    from .semiclassical import amplitude_distribution, find_limit_cycles

    cfg = _config(args)
    p = validate(cfg.params)
    lines = [f"# {line}" for line in header_lines(cfg.replace(sweep=None, series=None))]
    failed = False
    if "semiclassical" in cfg.engines:
        cycles = find_limit_cycles(p, opts=cfg.semiclassical)
        lines.append(f"cycles = {len(cycles)}")
        for i, lc in enumerate(cycles):
            for name in ("b0", "stable", "gamma_ba", "delta_omega", "d_minus", "d_plus",
                         "gamma_l", "delta_omega_l", "sigma2", "fano", "n_avg", "d_phi",
                         "d_phi_direct", "d_phi_spring", "lambda_0", "lambda_m"):
                value = getattr(lc, name)
                lines.append(f"cycle{i}.{name} = "
                             + (str(bool(value)).lower() if isinstance(value, (bool, np.bool_)) else fmt(value)))
        try:
            ad = amplitude_distribution(p, opts=cfg.semiclassical)
            lines += [f"semiclassical.n_avg = {fmt(ad.n_avg)}",
                      f"semiclassical.fano = {fmt(ad.fano)}",
                      f"semiclassical.peak = {fmt(ad.peak)}"]
        except OptomechError as exc:
            lines.append(f"semiclassical.status = error:{type(exc).__name__}")
            failed = True
    if "langevin" in cfg.engines:
        from .sweep import evaluate_point
        r = evaluate_point(cfg, "langevin", p)
        lines += [f"langevin.n_avg = {fmt(r.n_avg)}", f"langevin.fano = {fmt(r.fano)}",
                  f"langevin.fano_se = {fmt(r.fano_se)}", f"langevin.status = {r.status}"]
        failed |= r.status.startswith("error")
    if "lindblad" in cfg.engines:
        rho = steady_state(build_liouvillian(p, cfg.lindblad))
        obs = observables(rho)
        lines += [f"lindblad.n_avg = {fmt(obs.n_avg)}", f"lindblad.fano = {fmt(obs.fano)}",
                  f"lindblad.residual = {fmt(rho.residual)}"]
        if args.populations:
            rows = np.column_stack([np.arange(obs.populations.size), obs.populations])
            np.savetxt(args.populations, rows, fmt=["%d", "%.9e"], header="n p_n")
    _emit("\n".join(lines) + "\n", args.out)
    return 1 if failed and args.strict else 0


def cmd_spectrum(args):
    cfg = _config(args)
    p = validate(cfg.params)
    engine = cfg.engine if cfg.engine != "all" else "lindblad"
    from .sweep import _guide
    lc = _guide(cfg, p)
    head = [f"# {line}" for line in header_lines(cfg.replace(sweep=None, series=None))]
    if engine == "lindblad":
        from .lindblad import build_liouvillian, spectrum, steady_state
        L = build_liouvillian(p, cfg.lindblad)
        rho = steady_state(L)
        kw = {}
        if lc is not None:
            kw = dict(omega_guess=p.omega_m + lc.delta_omega, lambda0_guess=lc.lambda_0,
                      lambdam_guess=lc.lambda_m)
        est = spectrum(L, rho, points=cfg.spectrum.points,
                       half_widths=cfg.spectrum.half_widths, **kw)
        for name, peak in est.peaks.items():
            head.append(f"# {name}.eigenvalue = {fmt(peak.eigenvalue.real)} "
                        f"{fmt(peak.eigenvalue.imag)}")
            if peak.fit:
                head += [f"# {name}.center = {fmt(peak.fit.center)}",
                         f"# {name}.half_width = {fmt(peak.fit.half_width)}",
                         f"# {name}.rel_residual = {fmt(peak.fit.rel_residual)}"]
            else:
                head.append(f"# {name}.fit = failed: {peak.fit_error}")
        omega, values = est.omega, est.values
        failed = any(pk.fit is None for pk in est.peaks.values())
    elif engine == "langevin":
        import dataclasses
        from .langevin import run_trajectory, spectrum_estimate, write_trajectory
        sde = cfg.langevin
        stride = sde.record_stride or 10
        hints = dict(rng_seed=cfg.rng_seed, record_stride=stride)
        if lc is not None:
            hints.update(b_init=sde.b_init if sde.b_init is not None else lc.b0,
                         relax_rate=sde.relax_rate or lc.gamma_l)
        sde = dataclasses.replace(sde, **hints)
        traj = run_trajectory(p, sde, 0)
        if args.trajectory_out:
            write_trajectory(args.trajectory_out, traj, p, sde)
        dt = sde.resolved(p).dt * stride
        est = spectrum_estimate(traj.records[:, 1], dt)
        omega, values = est.omega, est.values
        failed = False
    else:
        raise SystemExit("error: spectrum needs --engine lindblad or langevin")
    body = "\n".join(f"{fmt(w)},{fmt(s)}" for w, s in zip(omega, values))
    _emit("\n".join(head + ["omega,S"]) + "\n" + body + "\n", args.out)
    return 1 if failed and args.strict else 0


def cmd_compare(args):
    rows = []
    for path in args.files:
        rows += read_csv(path)[1]
    engines = args.engines
    if engines is None:
        seen = []
        for r in rows:
            if r["engine"] not in seen:
                seen.append(r["engine"])
        if len(seen) < 2:
            raise SystemExit("error: need rows from two engines")
        engines = seen[:2]
    sweep_col = [c for c in rows[0] if c not in ("fingerprint", "engine", "status")][0]
    groups = []
    for eng in engines:
        sel = [dict(r, sweep_value=r[sweep_col]) for r in rows
               if r["engine"] == eng and r["status"].startswith("ok")]
        groups.append(sel)
    rep = compare(groups[0], groups[1], window=args.window, fit_offset=not args.no_offset)
    lines = [f"a = {engines[0]}", f"b = {engines[1]}", f"offset = {fmt(rep.offset)}",
             f"points = {rep.points.size}"]
    for q, d in rep.deviations.items():
        lines += [f"{q}.max_rel = {fmt(d['max_rel'])}", f"{q}.mean_rel = {fmt(d['mean_rel'])}"]
    _emit("\n".join(lines) + "\n", args.out)
    return 0


COMMANDS = {"sweep": cmd_sweep, "limit-cycle": cmd_limit_cycle, "spectrum": cmd_spectrum,
            "compare": cmd_compare, "reproduce": cmd_sweep}


def main(argv=None):
    args = build_parser().parse_args(argv)
    try:
        return COMMANDS[args.command](args)
    except OptomechError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
