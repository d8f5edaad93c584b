"""Command-line front end emitting machine-readable experiment data.

Subcommands wire the library into reproducible runs:

    tf-solve      solve the universal profile, write profile CSV + constants
    phase-sweep   boundary phases along a charge sequence vs the prediction
    wkb-verify    JWKB ansatz deviations over a lambda grid
    spectrum      infinite-atom round trips and the no-norm-resolvent table
    aufbau        Madelung / mean-field sequence tables and mod-1 verdicts

Every run writes the resolved configuration next to its outputs as plain
key=value text; re-running with --config on that file reproduces the CSV
bodies byte for byte (there is no randomness anywhere).  Exit codes:
0 success, 2 usage errors, 3 numerical non-convergence.
"""

from __future__ import annotations

import argparse
import csv
import json
import sys
from concurrent.futures import ProcessPoolExecutor
from pathlib import Path

import numpy as np

from . import aufbau, spectral, tf_core, zero_energy

_FORMATS = ("csv", "json")


def _fmt(x) -> str:
    if isinstance(x, float):
        return f"{x:.17g}"
    return str(x)


def _write_csv(path: Path, header, rows) -> None:
    with path.open("w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(header)
        for row in rows:
            writer.writerow([_fmt(v) for v in row])


def _write_config(path: Path, cfg: dict) -> None:
    lines = [f"{k}={cfg[k]}" for k in sorted(cfg)]
    path.write_text("\n".join(lines) + "\n")


def _read_config(path: Path) -> dict:
    out = {}
    for line in path.read_text().splitlines():
        line = line.strip()
        if not line or line.startswith("#"):
            continue
        key, _, value = line.partition("=")
        out[key.strip()] = value.strip()
    return out


def _int_list(text: str) -> list[int]:
    return [int(tok) for tok in text.replace(",", " ").split()]


def _float_list(text: str) -> list[float]:
    return [float(tok) for tok in text.replace(",", " ").split()]


def _resolve_out(args) -> Path:
    out = Path(args.out)
    if not out.parent.exists():
        raise UsageError(f"output directory does not exist: {out.parent}")
    out.mkdir(exist_ok=True)
    return out


class UsageError(Exception):
    pass


# ----------------------------------------------------------------------
# subcommand implementations
# ----------------------------------------------------------------------

def cmd_tf_solve(args) -> int:
    out = _resolve_out(args)
    chi = tf_core.solve_universal_chi(
        tolerance=args.tol,
        grid=(1e-6, 1e4, args.grid_points),
    )
    d_cl = tf_core.classical_constant(chi)
    residual = tf_core.tf_residual(chi)
    tf_core.save_profile(chi, out / "profile.csv", out / "profile.json")
    constants = {
        "c_tf": tf_core.C_TF,
        "c_infinity": tf_core.C_INFINITY,
        "b_length": tf_core.B_LENGTH,
        "d_cl": d_cl,
        "d_cl_inverse_cubed": d_cl**-3,
        "slope_origin": chi.slope_origin,
        "slope_origin_shooting": chi.slope_origin_shooting,
        "tail_amplitude": chi.tail_amplitude,
        "residual": residual,
        "config": _config_dict(args),
    }
    (out / "constants.json").write_text(json.dumps(constants, indent=2,
                                                   sort_keys=True))
    _write_config(out / "run_config.txt", _config_dict(args))
    print(f"d_cl={d_cl:.12f} slope_origin={chi.slope_origin:.12f} "
          f"residual={residual:.3e}")
    return 0


def _sweep_ns(args, d_cl: float) -> list[int]:
    if args.n_list:
        return sorted(set(_int_list(args.n_list)))
    n_max = args.n_max
    n_min = max(3, round(d_cl * 3.0))
    pts = np.unique(np.round(np.geomspace(n_min, n_max, args.n_points))
                    .astype(int))
    return [int(n) for n in pts]


def _sweep_one(task):
    tau, ell, ns, d_cl, tail_tol = task
    spec = zero_energy.tf_potential_spec()
    recs = zero_energy.boundary_phase_sweep(spec, tau, ell, ns, d_cl,
                                            tail_tol=tail_tol)
    return [(r.tau, r.ell, r.n, r.Z, r.lam, r.theta_mod_pi, r.predicted,
             r.distance, r.fit_residual, r.tail_deviation,
             r.window[0], r.window[1], r.valid) for r in recs]


def cmd_phase_sweep(args) -> int:
    if not args.ell:
        raise UsageError("--ell list must not be empty")
    out = _resolve_out(args)
    chi = tf_core.default_chi()
    d_cl = tf_core.classical_constant(chi)
    ns = _sweep_ns(args, d_cl)
    taus = _float_list(args.tau) if isinstance(args.tau, str) else [args.tau]
    tasks = [(tau, ell, ns, d_cl, args.tail_tol)
             for tau in taus for ell in _int_list(args.ell)]
    if args.jobs > 1:
        with ProcessPoolExecutor(max_workers=args.jobs) as pool:
            chunks = list(pool.map(_sweep_one, tasks))
    else:
        chunks = [_sweep_one(t) for t in tasks]
    rows = [row for chunk in chunks for row in chunk]
    rows.sort(key=lambda r: (r[0], r[1], r[2]))
    header = ["tau", "ell", "n", "Z", "lambda", "theta_mod_pi", "predicted",
              "distance", "fit_residual", "tail_deviation",
              "window_lo", "window_hi", "valid"]
    _write_csv(out / "phase_sweep.csv", header, rows)
    payload = {
        "config": _config_dict(args),
        "d_cl": d_cl,
        "records": [dict(zip(header, row)) for row in rows],
    }
    (out / "phase_sweep.json").write_text(json.dumps(payload, indent=2,
                                                     sort_keys=True))
    _write_config(out / "run_config.txt", _config_dict(args))
    print(f"{len(rows)} phase records -> {out / 'phase_sweep.csv'}")
    return 0


def _wkb_one(task):
    lam, ell, lo, hi, corrected = task
    spec = zero_energy.tf_potential_spec()
    res = zero_energy.wkb_ansatz_error(spec, lam, ell, (lo, hi),
                                       langer_corrected=corrected)
    return (ell, lam, corrected, res.sup_deviation, res.phase_span,
            res.degenerate)


def cmd_wkb_verify(args) -> int:
    if not args.ell:
        raise UsageError("--ell list must not be empty")
    out = _resolve_out(args)
    lo, hi = _float_list(args.interval)
    lams = _float_list(getattr(args, "lam"))
    tasks = [(lam, ell, lo, hi, corrected)
             for ell in _int_list(args.ell)
             for lam in lams
             for corrected in (True, False)]
    if args.jobs > 1:
        with ProcessPoolExecutor(max_workers=args.jobs) as pool:
            rows = list(pool.map(_wkb_one, tasks))
    else:
        rows = [_wkb_one(t) for t in tasks]
    rows.sort(key=lambda r: (r[0], r[1], not r[2]))
    header = ["ell", "lambda", "langer_corrected", "sup_deviation",
              "phase_span", "degenerate"]
    _write_csv(out / "wkb_verify.csv", header, rows)
    payload = {"config": _config_dict(args),
               "records": [dict(zip(header, row)) for row in rows]}
    (out / "wkb_verify.json").write_text(json.dumps(payload, indent=2,
                                                    sort_keys=True))
    _write_config(out / "run_config.txt", _config_dict(args))
    print(f"{len(rows)} ansatz records -> {out / 'wkb_verify.csv'}")
    return 0


def cmd_spectrum(args) -> int:
    if args.ell_max < 1:
        raise UsageError("--ell-max must be at least 1")
    out = _resolve_out(args)
    ells = _int_list(args.ell)
    round_trips = []
    for ell in ells:
        theta = spectral.theta_of_mu(ell, args.mu)
        res = spectral.channel_eigenvalue(ell, theta,
                                          (args.mu * 1.5, args.mu * 0.5))
        round_trips.append({
            "ell": ell, "mu_target": args.mu, "theta": theta,
            "mu_recovered": res.mu, "round_trip_error": abs(res.mu - args.mu),
            "residual": res.residual, "decay_start": res.decay_start,
        })
    rows = spectral.norm_resolvent_counterexample(args.ell_max)
    spectral.counterexample_to_csv(rows, out / "counterexample.csv")
    payload = {
        "config": _config_dict(args),
        "round_trips": round_trips,
        "counterexample": [
            {"ell": r.ell, "Z": r.Z, "mu": r.mu, "theta": r.theta,
             "tau": r.tau, "n": r.n, "abs_mu_plus_1": r.residual}
            for r in rows
        ],
    }
    (out / "spectrum.json").write_text(json.dumps(payload, indent=2,
                                                  sort_keys=True))
    _write_config(out / "run_config.txt", _config_dict(args))
    print(f"{len(rows)} counterexample rows -> {out / 'counterexample.csv'}")
    return 0


def cmd_aufbau(args) -> int:
    out = _resolve_out(args)
    chi = tf_core.default_chi()
    d_cl = tf_core.classical_constant(chi)
    rows, coeffs = aufbau.compare_tables(d_cl, args.n_max)
    header = list(rows[0].keys())
    _write_csv(out / "aufbau_tables.csv", header,
               [[row[k] for k in header] for row in rows])
    taus = _float_list(args.tau) if isinstance(args.tau, str) else [args.tau]
    verdicts = {}
    for tau in taus:
        seq = aufbau.tf_sequence(tau, args.n_max, d_cl)
        v = aufbau.converges_mod1(seq.values, d_cl)
        verdicts[f"tau={tau}"] = {
            "verdict": v.verdict, "tau_estimate": v.tau,
            "dispersion": v.dispersion, "reason": v.reason,
        }
    payload = {"config": _config_dict(args), "d_cl": d_cl,
               "cubic_coefficients": coeffs, "verdicts": verdicts}
    (out / "aufbau.json").write_text(json.dumps(payload, indent=2,
                                                sort_keys=True))
    _write_config(out / "run_config.txt", _config_dict(args))
    print(f"aufbau tables -> {out / 'aufbau_tables.csv'}")
    return 0


# ----------------------------------------------------------------------
# argument plumbing
# ----------------------------------------------------------------------

_DEFAULTS = {
    "tol": 1e-8,
    "grid_points": 6001,
    "tau": "0.0",
    "ell": "0,1,2",
    "n_max": 100,
    "n_points": 9,
    "n_list": "",
    "lam": "10,20,40,80",
    "interval": "0.5,2.0",
    "mu": -1.0,
    "ell_max": 3,
    "tail_tol": 1e-3,
    "jobs": 1,
    "format": "csv",
    "out": "tfatom-out",
}

_CASTS = {
    "tol": float, "grid_points": int, "n_max": int, "n_points": int,
    "mu": float, "ell_max": int, "tail_tol": float, "jobs": int,
}


def _config_dict(args) -> dict:
    return {k: getattr(args, k) for k in sorted(_DEFAULTS)}


def _add_common(p: argparse.ArgumentParser) -> None:
    p.add_argument("--config", default=None,
                   help="key=value file; explicit flags override it")
    p.add_argument("--tol", type=float, default=None)
    p.add_argument("--grid-points", dest="grid_points", type=int, default=None)
    p.add_argument("--tau", default=None, help="comma-separated list")
    p.add_argument("--ell", default=None, help="comma-separated list")
    p.add_argument("--n-max", dest="n_max", type=int, default=None)
    p.add_argument("--n-points", dest="n_points", type=int, default=None)
    p.add_argument("--n-list", dest="n_list", default=None,
                   help="explicit n values, overrides --n-max/--n-points")
    p.add_argument("--lambda", dest="lam", default=None,
                   help="comma-separated list")
    p.add_argument("--interval", default=None, help="lo,hi")
    p.add_argument("--mu", type=float, default=None)
    p.add_argument("--ell-max", dest="ell_max", type=int, default=None)
    p.add_argument("--tail-tol", dest="tail_tol", type=float, default=None)
    p.add_argument("--jobs", type=int, default=None)
    p.add_argument("--format", choices=_FORMATS, default=None)
    p.add_argument("--out", default=None)


def _merge(args) -> None:
    cfg = _read_config(Path(args.config)) if args.config else {}
    for key, default in _DEFAULTS.items():
        if getattr(args, key, None) is None:
            raw = cfg.get(key)
            if raw is None:
                setattr(args, key, default)
            else:
                cast = _CASTS.get(key, str)
                setattr(args, key, cast(raw))


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="tfatom",
        description="Thomas-Fermi mean-field atom laboratory",
    )
    sub = parser.add_subparsers(dest="command", required=True)
    for name, fn in (("tf-solve", cmd_tf_solve),
                     ("phase-sweep", cmd_phase_sweep),
                     ("wkb-verify", cmd_wkb_verify),
                     ("spectrum", cmd_spectrum),
                     ("aufbau", cmd_aufbau)):
        p = sub.add_parser(name)
        _add_common(p)
        p.set_defaults(func=fn)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    _merge(args)
    try:
        return args.func(args)
    except UsageError as exc:
        print(f"usage error: {exc}", file=sys.stderr)
        return 2
    except (tf_core.ConvergenceError, RuntimeError) as exc:
        print(f"numerical non-convergence: {exc}", file=sys.stderr)
        diag = getattr(exc, "diagnostics", None)
        if diag:
            print(f"diagnostics: {diag}", file=sys.stderr)
        return 3


if __name__ == "__main__":
    sys.exit(main())
