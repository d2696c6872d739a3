"""Experiment runner: subcommands wrapping every operation, CSV out.

Configs are JSON; flags override the seed/replicates/dt/out fields.
Outputs are UTF-8 CSVs with '#' comment lines carrying the resolved
config, seed, and backend, then one header row. Files appear by
write-then-rename, so a crashed run never leaves a partial CSV.
Exit codes: 0 ok, 1 runtime failure, 2 config error, 3 infeasible
model.
"""

import argparse
import csv
import datetime
import json
import math
import os
import sys

import numpy as np

from . import analytic, backend, cltlab, model, montecarlo
from .streams import TAG_LIMIT_Z, TAG_QV, TAG_ZN, experiment_stream

VERSION = "0.1.0"

EXIT_OK = 0
EXIT_RUNTIME = 1
EXIT_CONFIG = 2
EXIT_INFEASIBLE = 3

_SIMULATE = ("mrt", "mmrt", "boundary-layer")
_VALIDATE = ("laplace-check", "a-moment")
_CLT_MODES = ("qv", "limit-moments", "zn")


class ConfigError(ValueError):
    """Config file or flag combination rejected before any work ran."""


def _fmt(v):
    if v is None:
        return ""
    if isinstance(v, bool):
        return "true" if v else "false"
    if isinstance(v, (float, np.floating)):
        return format(float(v), ".17g")
    return str(v)


def _write_csv(path, meta, header, rows, no_timestamp):
    out_dir = os.path.dirname(os.path.abspath(path))
    os.makedirs(out_dir, exist_ok=True)
    tmp = path + ".tmp"
    with open(tmp, "w", encoding="utf-8", newline="") as fh:
        for line in meta:
            fh.write(f"# {line}\n")
        if not no_timestamp:
            stamp = datetime.datetime.now(datetime.timezone.utc)
            fh.write(f"# generated: {stamp.isoformat(timespec='seconds')}\n")
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(header)
        for row in rows:
            writer.writerow([_fmt(v) for v in row])
    os.replace(tmp, path)


def _meta(experiment, resolved, seed=None):
    lines = [
        f"polywind {VERSION} experiment={experiment}",
        "config: " + json.dumps(resolved, sort_keys=True, separators=(",", ":")),
    ]
    if seed is not None:
        lines.append(f"seed: {seed}")
    lines.append(f"backend: {backend.active_backend()}")
    return lines


def _section(cfg, key, where):
    val = cfg.get(key)
    if not isinstance(val, dict):
        raise ConfigError(f"missing or malformed '{key}' section ({where})")
    return val


def _number(d, key, where, default=None, required=False):
    if key not in d:
        if required:
            raise ConfigError(f"missing required field '{key}' in {where}")
        return default
    v = d[key]
    if isinstance(v, bool) or not isinstance(v, (int, float)):
        raise ConfigError(f"field '{key}' in {where} must be a number")
    return v


def _sweep_values(d):
    if "values" in d:
        vals = d["values"]
        if not isinstance(vals, list) or not all(
            isinstance(v, (int, float)) and not isinstance(v, bool) for v in vals
        ):
            raise ConfigError("sweep 'values' must be a list of numbers")
        return list(vals)
    if "range" in d:
        r = d["range"]
        if not (isinstance(r, list) and len(r) == 3):
            raise ConfigError("sweep 'range' must be [start, stop, step]")
        start, stop, step = (float(x) for x in r)
        if step <= 0:
            raise ConfigError("sweep range step must be positive")
        return list(np.arange(start, stop + 0.5 * step, step))
    raise ConfigError("sweep section needs 'values' or 'range'")


def _parse_params(cfg, axis=None, first_value=None):
    sec = _section(cfg, "params", "simulate experiments")
    fill = {"n": None, "D": None, "L": None, "l0": None}
    for key in fill:
        fill[key] = _number(sec, key, "params", required=(key != axis))
    if axis in fill and fill[axis] is None:
        fill[axis] = first_value
    try:
        return model.PolymerParams(
            n=int(fill["n"]), D=float(fill["D"]), L=float(fill["L"]),
            l0=float(fill["l0"]),
        )
    except model.InfeasibleModelError:
        raise
    except (TypeError, ValueError) as err:
        raise ConfigError(f"bad params: {err}") from err


def _parse_init(cfg):
    sec = _section(cfg, "init", "simulate experiments")
    kind = sec.get("kind")
    if not isinstance(kind, str):
        raise ConfigError("init section needs a string 'kind'")
    kind = kind.replace("-", "_")
    try:
        if kind == model.KIND_STRETCHED:
            return model.stretched()
        if kind == model.KIND_UNIFORM:
            eps = _number(sec, "eps_cfg", "init", default=model.DEFAULT_EPS_CFG)
            return model.uniform_random(float(eps))
        if kind == model.KIND_BOUNDARY_LAYER:
            phi0 = _number(sec, "phi0", "init", required=True)
            return model.boundary_layer(float(phi0))
        if kind == model.KIND_EXPLICIT:
            angles = sec.get("angles")
            if not isinstance(angles, list):
                raise ConfigError("explicit init needs an 'angles' list")
            return model.explicit(np.asarray(angles, dtype=float))
    except ValueError as err:
        raise ConfigError(f"bad init: {err}") from err
    raise ConfigError(f"unknown init kind {kind!r}")


def _parse_mc(cfg, args):
    sec = _section(cfg, "mc", "stochastic experiments")
    replicates = args.replicates if args.replicates is not None else _number(
        sec, "replicates", "mc", required=True
    )
    dt = args.dt if args.dt is not None else _number(sec, "dt", "mc", default=0.01)
    seed = args.seed if args.seed is not None else _number(sec, "seed", "mc")
    if seed is None:
        raise ConfigError("a seed is required (mc.seed or --seed)")
    t_max = _number(sec, "t_max", "mc", default=100.0)
    workers = _number(sec, "max_workers_hint", "mc", default=1)
    try:
        return montecarlo.McConfig(
            replicates=int(replicates), dt=float(dt), t_max=float(t_max),
            seed=int(seed), max_workers_hint=int(workers),
        )
    except ValueError as err:
        raise ConfigError(f"bad mc section: {err}") from err


def _mc_resolved(mc):
    # max_workers_hint deliberately left out: it must not affect output
    return {"replicates": mc.replicates, "dt": mc.dt, "t_max": mc.t_max,
            "seed": mc.seed}


def _init_resolved(init):
    out = {"kind": init.kind}
    if init.kind == model.KIND_UNIFORM:
        out["eps_cfg"] = init.eps_cfg
    elif init.kind == model.KIND_BOUNDARY_LAYER:
        out["phi0"] = init.phi0
    elif init.kind == model.KIND_EXPLICIT:
        out["angles"] = [float(a) for a in init.angles]
    return out


def _analytic_mrt(params, init):
    try:
        if init.kind == model.KIND_STRETCHED:
            return analytic.mrt_stretched(params.n, params.D)
        if init.kind == model.KIND_UNIFORM:
            return analytic.mrt_uniform(params.n, params.D)
        mag = abs(model.initial_constant(init, params).c_n)
        if mag == 0:
            return None
        return analytic.mrt_general(params.n, params.D, mag)
    except (ValueError, ZeroDivisionError):
        return None


_SIM_HEADER = [
    "axis", "axis_value", "n", "D", "L", "l0", "init", "phi0",
    "replicates", "dt", "t_max", "mean", "stderr",
    "n_used", "n_timeout", "n_origin_fail", "feasible", "note", "analytic_mrt",
]


def _sim_row(axis, value, params, init, mc, est, feasible, note):
    phi0 = init.phi0 if init is not None and init.kind == model.KIND_BOUNDARY_LAYER else None
    return [
        axis,
        value,
        params.n if params is not None else None,
        params.D if params is not None else None,
        params.L if params is not None else None,
        params.l0 if params is not None else None,
        init.kind if init is not None else None,
        phi0,
        mc.replicates,
        mc.dt,
        mc.t_max,
        est.mean if est else None,
        est.stderr if est else None,
        est.n_used if est else None,
        est.n_timeout if est else None,
        est.n_origin_fail if est else None,
        feasible,
        note,
        _analytic_mrt(params, init) if (feasible and params and init) else None,
    ]


def _run_simulate(cfg, args):
    experiment = cfg["experiment"]
    estimator = "mmrt" if experiment == "mmrt" else "mrt"
    mc = _parse_mc(cfg, args)

    sweep_sec = cfg.get("sweep")
    axis = None
    values = None
    if sweep_sec is not None:
        if not isinstance(sweep_sec, dict):
            raise ConfigError("sweep section must be an object")
        axis = sweep_sec.get("axis")
        if axis not in ("n", "D", "L", "phi0"):
            raise ConfigError("sweep axis must be one of n, D, L, phi0")
        values = _sweep_values(sweep_sec)
        if axis == "n":
            values = [int(round(v)) for v in values]

    first = values[0] if values else None
    params = _parse_params(cfg, axis=axis, first_value=first)

    if axis == "phi0":
        init = None
    else:
        init = _parse_init(cfg)
        if init.kind == model.KIND_EXPLICIT and axis == "n":
            raise ConfigError("explicit init cannot sweep over n")
    if experiment == "boundary-layer" and axis != "phi0":
        if init is None or init.kind != model.KIND_BOUNDARY_LAYER:
            raise ConfigError(
                "boundary-layer experiment needs boundary_layer init or a phi0 sweep"
            )

    resolved = {
        "experiment": experiment,
        "params": {"n": params.n, "D": params.D, "L": params.L, "l0": params.l0},
        "mc": _mc_resolved(mc),
    }
    if init is not None:
        resolved["init"] = _init_resolved(init)
    if axis is not None:
        resolved["sweep"] = {"axis": axis, "values": [float(v) for v in values]}

    rows = []
    if axis is None:
        est = montecarlo.estimate_mrt(params, init, mc) if estimator == "mrt" \
            else montecarlo.estimate_mmrt(params, init, mc)
        rows.append(_sim_row("none", None, params, init, mc, est, True, ""))
    else:
        table = montecarlo.sweep(params, axis, values, init, mc, estimator=estimator)
        for value, srow in zip(values, table):
            try:
                p_i, init_i = montecarlo._point(params, axis, value, init)
            except (model.InfeasibleModelError, ValueError):
                p_i, init_i = None, None
            rows.append(
                _sim_row(axis, value, p_i, init_i, mc, srow.estimate,
                         srow.feasible, srow.note)
            )
    meta = _meta(experiment, resolved, seed=mc.seed)
    return meta, _SIM_HEADER, rows


def _run_analytic(cfg, args):
    spec = analytic.QuadratureSpec()
    k = analytic.constants(spec)
    v1, v2 = analytic.proposition_variances(spec)
    f_ts = analytic.F(analytic.TWO_PI, spec, method="tanhsinh")
    g_ts = analytic.G(analytic.TWO_PI, spec, method="tanhsinh")
    # nominal columns: roundings these constants are usually quoted at;
    # the delta columns log how far the computed values sit from them
    header = [
        "F2pi", "G2pi", "Q", "Q_tilde", "c_E", "v1", "v2",
        "v1_closed", "v2_closed", "v2_closed_alt",
        "fg_residual_half_pi", "fg_residual_pi", "fg_residual_2pi",
        "gap_F2pi_methods", "gap_G2pi_methods",
        "nominal_F2pi", "nominal_G2pi", "nominal_Q_low", "nominal_Q_high",
        "nominal_Q_tilde", "delta_Q_low", "delta_Q_high", "delta_Q_tilde",
    ]
    row = [
        k.F2pi, k.G2pi, k.Q, k.Q_tilde, k.c_E, v1, v2,
        analytic.V1_CLOSED, analytic.V2_CLOSED, analytic.V2_CLOSED_ALT,
        analytic.fg_identity_residual(math.pi / 2, spec),
        analytic.fg_identity_residual(math.pi, spec),
        analytic.fg_identity_residual(analytic.TWO_PI, spec),
        abs(k.F2pi - f_ts), abs(k.G2pi - g_ts),
        3.84, 0.167, 9.54, 9.56, 9.62,
        k.Q - 9.54, k.Q - 9.56, k.Q_tilde - 9.62,
    ]
    meta = _meta("analytic-constants", {"experiment": "analytic-constants"})
    return meta, header, [row]


def _clt_seed(sec, args):
    seed = args.seed if args.seed is not None else _number(sec, "seed", "clt")
    if seed is None:
        raise ConfigError("a seed is required (clt.seed or --seed)")
    return int(seed)


def _run_clt(cfg, args):
    sec = _section(cfg, "clt", "clt-check")
    mode = sec.get("mode")
    if mode not in _CLT_MODES:
        raise ConfigError(f"clt mode must be one of {_CLT_MODES}")
    seed = _clt_seed(sec, args)

    if mode == "qv":
        n = int(_number(sec, "n", "clt", required=True))
        t_end = float(_number(sec, "t_end", "clt", required=True))
        dt = float(args.dt if args.dt is not None else _number(sec, "dt", "clt", default=1e-3))
        resolved = {"experiment": "clt-check", "clt":
                    {"mode": mode, "n": n, "t_end": t_end, "dt": dt, "seed": seed}}
        qv = cltlab.empirical_qv(n, t_end, dt, experiment_stream(seed, TAG_QV))
        th_s, th_c, th_sc = cltlab.theory_qv(qv.times)
        header = ["t", "qv_s", "qv_c", "qv_sc", "theory_s", "theory_c", "theory_sc"]
        rows = list(zip(qv.times, qv.qv_s, qv.qv_c, qv.qv_sc, th_s, th_c, th_sc))
    elif mode == "limit-moments":
        t = float(_number(sec, "t", "clt", required=True))
        dt = float(args.dt if args.dt is not None else _number(sec, "dt", "clt", default=1e-3))
        n_paths = int(args.replicates if args.replicates is not None
                      else _number(sec, "n_paths", "clt", required=True))
        resolved = {"experiment": "clt-check", "clt":
                    {"mode": mode, "t": t, "dt": dt, "n_paths": n_paths, "seed": seed}}
        re, im = cltlab.sample_limit_Z_final(
            t, dt, n_paths, experiment_stream(seed, TAG_LIMIT_Z)
        )
        var_re = float(re.var(ddof=1))
        var_im = float(im.var(ddof=1))
        # the coordinates are exactly Gaussian, so the normal-theory
        # variance-of-variance formula applies
        se_re = var_re * math.sqrt(2.0 / (n_paths - 1))
        se_im = var_im * math.sqrt(2.0 / (n_paths - 1))
        header = ["t", "dt", "n_paths", "var_re", "var_im", "se_var_re",
                  "se_var_im", "theory_var_re", "theory_var_im"]
        rows = [[t, dt, n_paths, var_re, var_im, se_re, se_im,
                 math.exp(-t) * (math.cosh(t) - 1.0), math.exp(-t) * math.sinh(t)]]
    else:
        n = int(_number(sec, "n", "clt", required=True))
        t = float(_number(sec, "t", "clt", required=True))
        replicates = int(args.replicates if args.replicates is not None
                         else _number(sec, "replicates", "clt", required=True))
        resolved = {"experiment": "clt-check", "clt":
                    {"mode": mode, "n": n, "t": t, "replicates": replicates,
                     "seed": seed}}
        rep = cltlab.compare_Zn_to_limit(
            n, t, replicates, experiment_stream(seed, TAG_ZN)
        )
        header = ["n", "t", "replicates", "mean_re", "mean_im", "se_mean_re",
                  "se_mean_im", "var_re", "var_im", "se_var_re", "se_var_im",
                  "cov", "se_cov", "theory_var_re", "theory_var_im"]
        rows = [[rep.n, rep.t, rep.replicates, rep.mean_re, rep.mean_im,
                 rep.se_mean_re, rep.se_mean_im, rep.var_re, rep.var_im,
                 rep.se_var_re, rep.se_var_im, rep.cov, rep.se_cov,
                 rep.theory_var_re, rep.theory_var_im]]
    meta = _meta("clt-check", resolved, seed=seed)
    return meta, header, rows


def _run_validate(cfg, args):
    experiment = cfg["experiment"]
    mc = _parse_mc(cfg, args)
    if experiment == "laplace-check":
        sec = _section(cfg, "laplace", "laplace-check")
        c = float(_number(sec, "c", "laplace", required=True))
        ys = sec.get("ys")
        if not isinstance(ys, list) or not ys:
            raise ConfigError("laplace section needs a nonempty 'ys' list")
        resolved = {"experiment": experiment, "laplace": {"c": c, "ys": ys},
                    "mc": _mc_resolved(mc)}
        header = ["c", "y", "replicates", "dt", "t_max", "empirical", "stderr",
                  "analytic", "abs_dev", "n_timeout"]
        rows = []
        for y in ys:
            try:
                chk = montecarlo.laplace_check(c, float(y), mc)
            except ValueError as err:
                raise ConfigError(f"bad laplace point y={y}: {err}") from err
            rows.append([c, y, mc.replicates, mc.dt, mc.t_max, chk.empirical,
                         chk.stderr, chk.analytic,
                         abs(chk.empirical - chk.analytic), chk.n_timeout])
    else:
        sec = _section(cfg, "a_moment", "a-moment")
        t = float(_number(sec, "t", "a_moment", required=True))
        if t < 1e-4:
            raise ConfigError("a_moment t must be at least 1e-4")
        resolved = {"experiment": experiment, "a_moment": {"t": t},
                    "mc": _mc_resolved(mc)}
        est, coarse = montecarlo.exp_functional_inverse_moment(
            t, mc, return_coarse=True
        )
        ref = analytic.neg_moment_A(t)
        header = ["t", "replicates", "dt", "estimate", "stderr",
                  "coarse_estimate", "allowance", "analytic", "abs_dev"]
        rows = [[t, mc.replicates, mc.dt, est.mean, est.stderr, coarse,
                 abs(est.mean - coarse), ref, abs(est.mean - ref)]]
    meta = _meta(experiment, resolved, seed=mc.seed)
    return meta, header, rows


def _load_config(args, allowed, default_experiment=None):
    if args.config is None:
        if default_experiment is None:
            raise ConfigError("--config is required for this subcommand")
        return {"experiment": default_experiment}
    try:
        with open(args.config, encoding="utf-8") as fh:
            cfg = json.load(fh)
    except OSError as err:
        raise ConfigError(f"cannot read config: {err}") from err
    except json.JSONDecodeError as err:
        raise ConfigError(f"config is not valid JSON: {err}") from err
    if not isinstance(cfg, dict):
        raise ConfigError("config root must be a JSON object")
    experiment = cfg.get("experiment", default_experiment)
    if experiment not in allowed:
        raise ConfigError(
            f"experiment must be one of {allowed} for this subcommand, got {experiment!r}"
        )
    cfg["experiment"] = experiment
    return cfg


def _add_common(sub):
    sub.add_argument("--config", help="JSON config file")
    sub.add_argument("--seed", type=int, help="override the config seed")
    sub.add_argument("--out", help="override the output CSV path")
    sub.add_argument("--replicates", type=int, help="override replicate count")
    sub.add_argument("--dt", type=float, help="override the time step")
    sub.add_argument("--no-timestamp", action="store_true",
                     help="omit the generated-at comment line")


def _build_parser():
    parser = argparse.ArgumentParser(
        prog="polywind",
        description="winding-time experiments for rod polymers, CSV out",
    )
    sub = parser.add_subparsers(dest="command", required=True)
    for name, blurb in [
        ("simulate", "run mrt / mmrt / boundary-layer experiments"),
        ("analytic", "evaluate the quadrature constants"),
        ("clt-check", "empirical checks of the Gaussian limit"),
        ("validate", "Monte Carlo checks of the hitting-time identities"),
    ]:
        _add_common(sub.add_parser(name, help=blurb))
    return parser


def main(argv=None):
    args = _build_parser().parse_args(argv)
    try:
        if args.command == "simulate":
            cfg = _load_config(args, _SIMULATE)
            meta, header, rows = _run_simulate(cfg, args)
        elif args.command == "analytic":
            cfg = _load_config(args, ("analytic-constants",), "analytic-constants")
            meta, header, rows = _run_analytic(cfg, args)
        elif args.command == "clt-check":
            cfg = _load_config(args, ("clt-check",), "clt-check")
            meta, header, rows = _run_clt(cfg, args)
        else:
            cfg = _load_config(args, _VALIDATE)
            meta, header, rows = _run_validate(cfg, args)

        out = args.out if args.out is not None else cfg.get("out")
        if not out:
            raise ConfigError("an output path is required ('out' or --out)")
        _write_csv(out, meta, header, rows, args.no_timestamp)
    except ConfigError as err:
        print(f"config error: {err}", file=sys.stderr)
        return EXIT_CONFIG
    except model.InfeasibleModelError as err:
        print(f"infeasible model: {err}", file=sys.stderr)
        return EXIT_INFEASIBLE
    except Exception as err:  # noqa: BLE001  (CLI boundary)
        print(f"error: {err}", file=sys.stderr)
        return EXIT_RUNTIME
    print(f"wrote {out} ({len(rows)} rows)")
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
