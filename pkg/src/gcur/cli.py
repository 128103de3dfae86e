"""Command-line entry point ``gcur``.

Exit codes: 0 success, 1 usage or validation error, 2 numerical blow-up,
3 statistical test failure.
"""

from __future__ import annotations

import argparse
import json
import os
import sys

import numpy as np

from . import experiments as ex
from . import io
from .config import ConfigError, Formulation, from_dict, load_config
from .diagnostics import CSV_COLUMNS
from .integrator import BlowUpError, CFLError, Stepper, initial_state, simulate
from .noise import WindowError, sample_path, trace, wiener_shift
from .spectral import poincare_constants
from .stats import batch_means

EXIT_OK, EXIT_USAGE, EXIT_BLOWUP, EXIT_STAT = 0, 1, 2, 3


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        raise UsageError(f"{self.prog}: error: {message}")


def _common(p):
    p.add_argument("--config", metavar="PATH", help="JSON run configuration")
    p.add_argument("--seed", type=int, help="master seed (overrides config)")
    p.add_argument("--out", metavar="DIR", default="gcur-out", help="output directory")
    p.add_argument("--steps", type=int, help="number of steps (overrides config)")
    p.add_argument("--dt", type=float, help="time step (overrides config)")


def build_parser():
    parser = _Parser(prog="gcur", description="Stochastic gravity-current simulator")
    sub = parser.add_subparsers(dest="command", parser_class=_Parser, required=True)

    p = sub.add_parser("simulate", help="single trajectory")
    _common(p)
    p.add_argument("--resume", metavar="SNAPSHOT", help="restart from a GCUR snapshot")
    p.add_argument("--manifest", metavar="PATH", help="manifest of the run being resumed")
    p.add_argument("--snapshot-every", type=int, default=0, metavar="N",
                   help="also write a snapshot every N steps")

    p = sub.add_parser("ensemble", help="independent replicates")
    _common(p)
    p.add_argument("--replicates", "-M", type=int, default=16)
    p.add_argument("--horizon", type=float, help="final time (default steps * dt)")
    p.add_argument("--burn-in", type=float, help="plateau estimate after this time")
    p.add_argument("--sweep-trace", metavar="LIST",
                   help="comma-separated tr Q values for an enstrophy sweep")

    p = sub.add_parser("sync", help="synchronization of two initial conditions")
    _common(p)
    p.add_argument("--seeds", type=int, default=10, help="number of noise paths")
    p.add_argument("--horizon", type=float, default=5.0)
    p.add_argument("--threshold", type=float, default=0.0, help="require rho < -threshold")

    p = sub.add_parser("ergodicity", help="time average versus ensemble average")
    _common(p)
    p.add_argument("--T-long", type=float, default=200.0)
    p.add_argument("--replicates", "-M", type=int, default=64)
    p.add_argument("--t-obs", type=float, default=20.0)
    p.add_argument("--burn-in", type=float, default=2.0)
    p.add_argument("--batches", type=int, default=20)

    p = sub.add_parser("pullback", help="pullback convergence over growing windows")
    _common(p)
    p.add_argument("--windows", default="1,2,4,8", help="comma-separated window lengths")
    p.add_argument("--tol", type=float, default=1e-6)
    p.add_argument("--initial-conditions", type=int, default=2)

    p = sub.add_parser("check", help="dissipativity margin, trace and Poincare constants")
    _common(p)

    p = sub.add_parser("diagnose", help="post-process a diagnostics CSV")
    _common(p)
    p.add_argument("csv", help="diagnostics CSV written by simulate")
    p.add_argument("--burn-in", type=float, default=0.0)
    p.add_argument("--batches", type=int, default=20)
    return parser


def _config(args, required=False):
    if args.config:
        cfg = load_config(args.config)
    elif required:
        raise UsageError("--config is required for this command")
    else:
        cfg = ex.default_small_config()
    changes = {}
    if args.seed is not None:
        changes["seed"] = args.seed
    if args.steps is not None:
        changes["n_steps"] = args.steps
    if args.dt is not None:
        changes["dt"] = args.dt
    return cfg.replace(**changes) if changes else cfg


def _floats(text):
    try:
        return [float(v) for v in text.split(",") if v.strip()]
    except ValueError:
        raise UsageError(f"expected comma-separated numbers, got {text!r}") from None


def _write_json(path, doc):
    with open(path, "w") as fh:
        fh.write(ex.dumps(doc))
        fh.write("\n")
    return path


# commands ---------------------------------------------------------------------


def cmd_simulate(args):
    started = io.now()
    cfg = _config(args, required=not args.manifest)
    offset = 0
    if args.resume:
        if not args.manifest:
            raise UsageError("--resume needs --manifest of the original run")
        man = io.read_manifest(args.manifest)
        base = from_dict(man["config"])
        cfg = base.replace(n_steps=cfg.n_steps if args.steps is not None else base.n_steps)
        if man.get("rng") != cfg.rng:
            raise ConfigError("rng", "manifest was produced with a different generator")
        offset = int(man["end_step"])
        u0 = io.read_snapshot(args.resume, cfg.nx, cfg.nz)
    else:
        u0 = initial_state(cfg)
    os.makedirs(args.out, exist_ok=True)
    cov = cfg.covariance()
    n = cfg.n_steps
    raw = sample_path(cov, cfg.dt, offset * cfg.dt, max(n, 1), cfg.seed, cfg.replicate)
    path = wiener_shift(raw, offset * cfg.dt)
    eta0 = None
    if cfg.formulation == Formulation.HomogenizedV and cfg.eta_init == "zero" and offset:
        st = Stepper(cfg.nx, cfg.nz, cfg.params, cov, cfg.dt)
        eta0 = st.ou.run(np.zeros((cfg.nx, cfg.nz)), path.extend(-offset, n), -offset, offset)
    files = []
    every = args.snapshot_every
    keep = every > 0
    if keep and every % cfg.output_every:
        raise UsageError("--snapshot-every must be a multiple of output_every")
    try:
        traj = simulate(cfg, path, u0, eta0=eta0, keep_states=keep)
    except BlowUpError as exc:
        report = {"status": "blowup", "message": str(exc), "step": exc.step, "t": exc.t,
                  "norm": exc.norm}
        files.append(_write_json(os.path.join(args.out, "blowup.json"), report))
        io.write_manifest(args.out, cfg, files, started, "simulate",
                          {"end_step": offset, "status": "blowup"})
        raise
    cols = dict(traj.diagnostics)
    cols["t"] = traj.times + offset * cfg.dt
    csv_path = os.path.join(args.out, "diagnostics.csv")
    io.write_csv(csv_path, cols)
    files.append(csv_path)
    if keep:
        for i, s in enumerate(traj.states):
            step = i * cfg.output_every
            if step % every == 0:
                f = os.path.join(args.out, f"state_{offset + step:09d}.gcur")
                io.write_snapshot(s, f)
                files.append(f)
    final = os.path.join(args.out, "final.gcur")
    io.write_snapshot(traj.final, final)
    files.append(final)
    io.write_manifest(args.out, cfg, files, started, "simulate",
                      {"start_step": offset, "end_step": offset + n, "seed": cfg.seed,
                       "replicate": cfg.replicate, "trajectory_sha256": traj.digest(),
                       "status": "ok"})
    print(f"wrote {len(files)} files to {args.out}")
    return EXIT_OK


def cmd_ensemble(args):
    started = io.now()
    cfg = _config(args)
    os.makedirs(args.out, exist_ok=True)
    T = args.horizon if args.horizon is not None else cfg.n_steps * cfg.dt
    files = []
    status = EXIT_OK
    if args.sweep_trace:
        burn = args.burn_in if args.burn_in is not None else T / 3
        res = ex.enstrophy_sweep(cfg, _floats(args.sweep_trace), args.replicates, T, burn)
        doc = ex.summary_document("enstrophy_sweep", cfg, [cfg.seed], res, res.passed)
        status = EXIT_OK if res.passed else EXIT_STAT
    else:
        res = ex.run_ensemble(cfg, args.replicates, T)
        for j, r in enumerate(res.replicates):
            f = os.path.join(args.out, f"replicate_{int(r):04d}.csv")
            io.write_csv(f, {c: res.columns[c][:, j] for c in CSV_COLUMNS})
            files.append(f)
        f = os.path.join(args.out, "ensemble_mean.csv")
        io.write_csv(f, {**{c: res.mean[c] for c in CSV_COLUMNS}, "t": res.times})
        files.append(f)
        extra = res.summary()
        if args.burn_in is not None:
            extra["plateau"] = ex.enstrophy_asymptotics(res, args.burn_in).summary()
        doc = ex.summary_document("ensemble", cfg, [cfg.seed], extra)
        if res.failed.all():
            status = EXIT_BLOWUP
    files.append(_write_json(os.path.join(args.out, "summary.json"), doc))
    io.write_manifest(args.out, cfg, files, started, "ensemble")
    print(json.dumps({"passed": doc.get("passed", status == EXIT_OK)}))
    return status


def cmd_sync(args):
    started = io.now()
    cfg = _config(args)
    os.makedirs(args.out, exist_ok=True)
    a = initial_state(cfg)
    b = ex.perturbed_state(a)
    n = int(round(args.horizon / cfg.dt))
    seeds = [cfg.seed + s for s in range(args.seeds)]
    paths = [sample_path(cfg.covariance(), cfg.dt, 0.0, n, s, cfg.replicate) for s in seeds]
    res = ex.synchronization_batch(cfg, a, b, paths, args.horizon, threshold=args.threshold)
    passed = all(r.decays for r in res)
    doc = ex.summary_document("synchronization", cfg, seeds,
                              {"runs": [r.summary() for r in res],
                               "regime": ex.regime_report(cfg)}, passed)
    files = [_write_json(os.path.join(args.out, "summary.json"), doc)]
    io.write_manifest(args.out, cfg, files, started, "sync")
    print(json.dumps({"passed": passed, "rho": [r.rho for r in res]}))
    return EXIT_OK if passed else EXIT_STAT


def cmd_ergodicity(args):
    started = io.now()
    cfg = _config(args)
    os.makedirs(args.out, exist_ok=True)
    res = ex.ergodicity_gap(cfg, args.T_long, args.replicates, args.t_obs, args.burn_in,
                            args.batches)
    doc = ex.summary_document("ergodicity", cfg, [cfg.seed], res, res.passed)
    files = [_write_json(os.path.join(args.out, "summary.json"), doc)]
    io.write_manifest(args.out, cfg, files, started, "ergodicity")
    print(ex.dumps(doc["result"]))
    return EXIT_OK if res.passed else EXIT_STAT


def cmd_pullback(args):
    started = io.now()
    cfg = _config(args)
    os.makedirs(args.out, exist_ok=True)
    windows = sorted(_floats(args.windows))
    u0s = [initial_state(cfg)]
    for i in range(1, args.initial_conditions):
        u0s.append(ex.perturbed_state(u0s[0], seed=i))
    path = sample_path(cfg.covariance(), cfg.dt, 0.0, 1, cfg.seed, cfg.replicate)
    res = ex.pullback_run(cfg, windows, path, u0s)
    last = float(res.successive[:, -1].max()) if res.successive.size else 0.0
    passed = last <= args.tol and float(res.spread[-1]) <= args.tol
    doc = ex.summary_document("pullback", cfg, [cfg.seed], res, passed)
    files = [_write_json(os.path.join(args.out, "summary.json"), doc)]
    io.write_manifest(args.out, cfg, files, started, "pullback")
    print(json.dumps({"passed": passed, "last_successive": last,
                      "final_spread": float(res.spread[-1])}))
    return EXIT_OK if passed else EXIT_STAT


def cmd_check(args):
    cfg = _config(args)
    cov = cfg.covariance()
    pc = poincare_constants(cfg.nx, cfg.nz)
    rep = ex.regime_report(cfg)
    print(f"margin {rep['margin']:.12g}")
    print(f"trace_Q {trace(cov):.12g}")
    print(f"E_eta_sq {rep['E_eta_sq']:.12g}")
    print(f"lambda1 {pc.lambda1:.12g}")
    print(f"lambda2 {pc.lambda2:.12g}")
    print(f"small_regime {str(rep['small']).lower()}")
    print(f"covariance_family {cov.family}")
    return EXIT_OK


def cmd_diagnose(args):
    cols = io.read_csv(args.csv)
    t = cols["t"]
    keep = t >= args.burn_in
    out = {"n_records": int(t.size), "t_final": float(t[-1]) if t.size else None,
           "max_abs_salinity_integral": float(np.max(np.abs(cols["salinity_integral"])))}
    for c in ("enstrophy", "ms_salinity", "h_norm_sq"):
        x = cols[c][keep]
        try:
            out[c] = batch_means(x, args.batches).as_dict()
        except ValueError:
            out[c] = {"mean": float(np.mean(x)) if x.size else None}
    r = cols["energy_residual"]
    r = r[np.isfinite(r)]
    out["energy_residual"] = {"max": float(r.max()) if r.size else None,
                              "fraction_positive": float(np.mean(r > 0)) if r.size else None}
    print(json.dumps(out, indent=2, sort_keys=True))
    return EXIT_OK


COMMANDS = {
    "simulate": cmd_simulate,
    "ensemble": cmd_ensemble,
    "sync": cmd_sync,
    "ergodicity": cmd_ergodicity,
    "pullback": cmd_pullback,
    "check": cmd_check,
    "diagnose": cmd_diagnose,
}


def main(argv=None):
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
        return COMMANDS[args.command](args)
    except UsageError as exc:
        print(exc, file=sys.stderr)
        return EXIT_USAGE
    except (ConfigError, io.SnapshotError, WindowError, FileNotFoundError, ValueError) as exc:
        print(f"gcur: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except (BlowUpError, CFLError) as exc:
        print(f"gcur: numerical failure: {exc}", file=sys.stderr)
        return EXIT_BLOWUP


if __name__ == "__main__":
    sys.exit(main())
