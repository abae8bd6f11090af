"""Parameter sweeps over the three engines, CSV output and engine comparison."""
import dataclasses
import math
import warnings
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from typing import Optional

import numpy as np
from scipy.optimize import minimize_scalar

from . import __version__
from .config import RunConfig
from .errors import NoOverlap, OptomechError
from .langevin import ensemble
from .lindblad import build_liouvillian, observables, spectrum, steady_state
from .params import validate
from .semiclassical import amplitude_distribution, dts_fano, find_limit_cycles

COLUMNS = ("engine", "n_avg", "fano", "fano_se", "b0", "gamma_ba", "delta_omega",
           "d_phi_direct", "d_phi_spring", "d_phi", "lambda_0", "lambda_m", "f_d", "f_ratio",
           "status")
_NUMERIC = COLUMNS[1:-1]
_NAN = float("nan")


@dataclass(frozen=True)
class PointResult:
    engine: str
    sweep_value: float
    series_value: Optional[float] = None
    n_avg: float = _NAN
    fano: float = _NAN
    fano_se: float = _NAN
    b0: float = _NAN
    gamma_ba: float = _NAN
    delta_omega: float = _NAN
    d_phi_direct: float = _NAN
    d_phi_spring: float = _NAN
    d_phi: float = _NAN
    lambda_0: float = _NAN
    lambda_m: float = _NAN
    f_d: float = _NAN
    f_ratio: float = _NAN
    status: str = "ok"
    populations: Optional[np.ndarray] = field(default=None, compare=False, repr=False)


@dataclass(frozen=True)
class SweepResult:
    config: RunConfig
    rows: tuple

    def for_engine(self, engine, series_value=None):
        return [r for r in self.rows
                if r.engine == engine and (series_value is None or r.series_value == series_value)]

    @property
    def failed(self):
        return [r for r in self.rows if r.status.startswith("error")]


def displaced_thermal_fano(n_avg, nbar):
    """``F_d`` of the displaced thermal state with the same ``<n>`` and ``nbar``."""
    if not np.isfinite(n_avg):
        return _NAN
    try:
        return dts_fano(math.sqrt(max(n_avg - nbar, 0.0)), nbar)
    except OptomechError:
        return _NAN


def _main_cycle(params, opts, near=None):
    """Stable limit cycle closest to `near` (largest amplitude when None)."""
    stable = [c for c in find_limit_cycles(params, opts=opts) if c.stable]
    if not stable:
        return None
    if near is None:
        return stable[-1]
    return min(stable, key=lambda c: abs(c.b0 - near))


def _cycle_fields(lc):
    return dict(b0=lc.b0, gamma_ba=lc.gamma_ba, delta_omega=lc.delta_omega,
                d_phi_direct=lc.d_phi_direct, d_phi_spring=lc.d_phi_spring, d_phi=lc.d_phi,
                lambda_0=lc.lambda_0, lambda_m=lc.lambda_m)


def _semiclassical(cfg, params, key):
    opts = cfg.semiclassical
    ad = amplitude_distribution(params, opts=opts)
    out = dict(n_avg=ad.n_avg, fano=ad.fano)
    lc = _main_cycle(params, opts, near=ad.peak)
    flags = []
    if lc is None:
        flags.append("no_limit_cycle")
    else:
        out.update(_cycle_fields(lc))
    return out, flags


def _guide(cfg, params):
    """Semiclassical hints for the numerical engines (None when unavailable)."""
    try:
        return _main_cycle(params, cfg.semiclassical)
    except OptomechError:
        return None


def _langevin(cfg, params, key):
    sde = cfg.langevin
    lc = _guide(cfg, params)
    hints = {"rng_seed": cfg.rng_seed}
    if lc is not None:
        if sde.b_init is None:
            hints["b_init"] = lc.b0
        if sde.omega_ref is None:
            hints["omega_ref"] = params.omega_m + lc.delta_omega
        if sde.relax_rate is None:
            hints["relax_rate"] = lc.gamma_l
    sde = dataclasses.replace(sde, **hints)
    res = ensemble(sde, params, stream=key)
    out = dict(n_avg=res.n_avg, fano=res.fano, fano_se=res.fano_se,
               b0=float(np.mean(res.amplitudes)))
    return out, [] if lc is not None else ["no_limit_cycle"]


def _lindblad(cfg, params, key):
    L = build_liouvillian(params, cfg.lindblad)
    rho = steady_state(L)
    obs = observables(rho)
    out = dict(n_avg=obs.n_avg, fano=obs.fano, populations=obs.populations)
    flags = []
    if cfg.spectrum.enabled:
        lc = _guide(cfg, params)
        if lc is None:
            flags.append("no_limit_cycle")
        else:
            est = spectrum(L, rho, omega_guess=params.omega_m + lc.delta_omega,
                           lambda0_guess=lc.lambda_0, lambdam_guess=lc.lambda_m,
                           points=cfg.spectrum.points, half_widths=cfg.spectrum.half_widths)
            out.update(lambda_0=est.lambda_0, lambda_m=est.lambda_m)
            if any(p.fit is None for p in est.peaks.values()):
                flags.append("fit_failed")
    return out, flags


_ENGINES = {"semiclassical": _semiclassical, "langevin": _langevin, "lindblad": _lindblad}


def evaluate_point(cfg, engine, params, key=(), sweep_value=_NAN, series_value=None):
    """One engine at one parameter point; failures become a status flag."""
    base = dict(engine=engine, sweep_value=sweep_value, series_value=series_value)
    flags = []
    with warnings.catch_warnings(record=True) as caught:
        warnings.simplefilter("always")
        try:
            validate(params)
            values, flags = _ENGINES[engine](cfg, params, key)
        except (OptomechError, ValueError, MemoryError) as exc:
            return PointResult(status=f"error:{type(exc).__name__}", **base)
    for w in caught:
        if issubclass(w.category, RuntimeWarning):
            flags.append("warning")
            break
    values["f_d"] = displaced_thermal_fano(values["n_avg"], params.nbar)
    values["f_ratio"] = values["fano"] / values["f_d"] if values["f_d"] else _NAN
    status = "|".join(["ok"] + sorted(set(flags)))
    return PointResult(status=status, **base, **values)


def sweep_points(cfg):
    """Ordered ``(key, series_value, sweep_value, params)`` for every point."""
    series = cfg.series.values if cfg.series else (None,)
    sweep = cfg.sweep.values() if cfg.sweep else [getattr(cfg.params, "delta")]
    name = cfg.sweep.param if cfg.sweep else "delta"
    out = []
    for i, s in enumerate(series):
        for j, x in enumerate(sweep):
            changes = {name: x}
            if s is not None:
                changes[cfg.series.param] = s
            out.append(((i, j), s, x, cfg.params.replace(**changes)))
    return out


def _task(args):
    cfg, engine, key, series_value, sweep_value, params = args
    return evaluate_point(cfg, engine, params, key, sweep_value, series_value)


def run_sweep(cfg, workers=1):
    """Evaluate every (series, sweep value, engine) point.

    Row order is fixed (series value, sweep value, engine name) and does not
    depend on `workers`; each point draws from its own random stream.
    """
    tasks = [(cfg, engine, key, s, x, p)
             for key, s, x, p in sweep_points(cfg) for engine in cfg.engines]
    if workers > 1 and len(tasks) > 1:
        with ProcessPoolExecutor(workers) as pool:
            rows = list(pool.map(_task, tasks))
    else:
        rows = [_task(t) for t in tasks]
    rows.sort(key=lambda r: (r.series_value if r.series_value is not None else 0.0,
                             r.sweep_value, r.engine))
    return SweepResult(config=cfg, rows=tuple(rows))


# -- CSV ------------------------------------------------------------------

def fmt(value):
    """Scientific notation with 9 significant digits."""
    value = float(value)
    if math.isnan(value):
        return "nan"
    if math.isinf(value):
        return "inf" if value > 0 else "-inf"
    return f"{value:.8e}"


def header_lines(cfg):
    fp = cfg.fingerprint()
    lines = [f"fingerprint = {fp}", f"version = {__version__}", f"engine = {cfg.engine}",
             f"rng_seed = {cfg.rng_seed}"]
    lines += [f"{k} = {fmt(v)}" for k, v in cfg.params.as_dict().items()]
    if cfg.sweep:
        s = cfg.sweep
        lines.append(f"sweep = {s.param} {fmt(s.start)} {fmt(s.stop)} {s.count}")
    if cfg.series:
        lines.append(f"series = {cfg.series.param} "
                     + " ".join(fmt(v) for v in cfg.series.values))
    return lines


def to_csv(result):
    cfg = result.config
    name = cfg.sweep.param if cfg.sweep else "delta"
    cols = ["fingerprint", name]
    if cfg.series:
        cols.append(cfg.series.param)
    cols += list(COLUMNS)
    fp = cfg.fingerprint()
    out = [f"# {line}" for line in header_lines(cfg)]
    out.append(",".join(cols))
    for r in result.rows:
        cells = [fp, fmt(r.sweep_value)]
        if cfg.series:
            cells.append(fmt(r.series_value))
        cells.append(r.engine)
        cells += [fmt(getattr(r, c)) for c in _NUMERIC]
        cells.append(r.status)
        out.append(",".join(cells))
    return "\n".join(out) + "\n"


def write_csv(result, path):
    with open(path, "w", encoding="utf-8", newline="") as fh:
        fh.write(to_csv(result))


def read_csv(path):
    """Parse a sweep CSV into ``(header, rows)``; rows are dicts of strings/floats."""
    header, rows, cols = {}, [], None
    with open(path, encoding="utf-8") as fh:
        for line in fh:
            line = line.rstrip("\n")
            if line.startswith("#"):
                key, _, value = line[1:].partition("=")
                header[key.strip()] = value.strip()
            elif cols is None:
                cols = line.split(",")
            elif line:
                row = {}
                for c, v in zip(cols, line.split(",")):
                    if c in ("fingerprint", "engine", "status"):
                        row[c] = v
                    else:
                        row[c] = float(v)
                rows.append(row)
    return header, rows, cols


# -- comparison -----------------------------------------------------------

@dataclass(frozen=True)
class Comparison:
    """Deviations of engine `a` from engine `b` after shifting `a` by `offset`.

    ``deviations[q]`` holds the maximum and mean of ``|a - b| / |b|`` over
    ``points`` (the swept values of `a` inside the compared window).
    """

    offset: float
    deviations: dict
    points: np.ndarray
    relative: dict


def _clean(xs, ys):
    xs = np.asarray(xs, dtype=float)
    ys = np.asarray(ys, dtype=float)
    ok = np.isfinite(xs) & np.isfinite(ys)
    order = np.argsort(xs[ok])
    return xs[ok][order], ys[ok][order]


def best_offset(xa, fa, xb, fb, max_offset=None):
    """Shift ``s`` minimising the mean of ``(f_a(x) - f_b(x + s))^2``."""
    xa, fa = _clean(xa, fa)
    xb, fb = _clean(xb, fb)
    if xa.size < 2 or xb.size < 2:
        raise NoOverlap("each engine needs at least two finite points")
    span = min(xa[-1], xb[-1]) - max(xa[0], xb[0])
    if span <= 0:
        raise NoOverlap("sweep ranges do not overlap")
    max_offset = 0.1 * span if max_offset is None else max_offset

    def cost(s):
        inside = (xa + s >= xb[0]) & (xa + s <= xb[-1])
        if inside.sum() < max(2, xa.size // 2):
            return np.inf
        return float(np.mean((fa[inside] - np.interp(xa[inside] + s, xb, fb)) ** 2))

    grid = np.linspace(-max_offset, max_offset, 201)
    costs = np.array([cost(s) for s in grid])
    i = int(np.argmin(costs))
    if not np.isfinite(costs[i]):
        raise NoOverlap("too few points overlap at every trial offset")
    if costs[i] == 0:
        return float(grid[i])
    lo, hi = grid[max(i - 1, 0)], grid[min(i + 1, grid.size - 1)]
    res = minimize_scalar(cost, bounds=(lo, hi), method="bounded",
                          options={"xatol": 1e-6 * max(max_offset, 1e-12)})
    return float(res.x) if res.fun <= costs[i] else float(grid[i])


def compare(a, b, quantities=("n_avg", "fano"), window=None, max_offset=None, fit_offset=True):
    """Compare two engines' sweeps.

    `a` and `b` are sequences of rows (objects or dicts) with ``sweep_value``
    (or ``x``) and the compared quantities.  A single detuning offset is fitted
    to the Fano factor first (``fit_offset``); `window` ``(lo, hi)``
    restricts the compared points of `a`.
    """
    xa = np.array([_get(r, "sweep_value") for r in a], dtype=float)
    xb = np.array([_get(r, "sweep_value") for r in b], dtype=float)
    if xa.size == 0 or xb.size == 0:
        raise NoOverlap("an engine has no rows")
    qa = {q: np.array([_get(r, q) for r in a], dtype=float) for q in quantities}
    qb = {q: np.array([_get(r, q) for r in b], dtype=float) for q in quantities}
    key = "fano" if "fano" in quantities else quantities[0]
    offset = best_offset(xa, qa[key], xb, qb[key], max_offset) if fit_offset else 0.0
    sel = np.ones(xa.size, dtype=bool)
    if window is not None:
        sel &= (xa >= window[0]) & (xa <= window[1])
    devs, rel = {}, {}
    xs_b = np.sort(xb)
    inside = sel & (xa + offset >= xs_b[0]) & (xa + offset <= xs_b[-1])
    if not inside.any():
        raise NoOverlap("no compared points inside the window")
    for q in quantities:
        xbq, fbq = _clean(xb, qb[q])
        ref = np.interp(xa[inside] + offset, xbq, fbq)
        r = np.abs(qa[q][inside] - ref) / np.abs(ref)
        rel[q] = r
        devs[q] = {"max_rel": float(np.nanmax(r)), "mean_rel": float(np.nanmean(r))}
    return Comparison(offset=offset, deviations=devs, points=xa[inside], relative=rel)


def _get(row, name):
    if isinstance(row, dict):
        if name == "sweep_value" and name not in row:
            return row["x"]
        return row[name]
    return getattr(row, name)
