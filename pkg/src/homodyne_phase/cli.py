"""Batch command-line surface for the sampling pipeline.

Subcommands: kernel, oracle, sample, estimate, verify, maxent,
pipeline.  Every run writes its full configuration (including seed and
package version) next to its outputs, so any file can be regenerated
bit-exactly.  Failures exit nonzero with a machine-readable
``{"stage": ..., "error": ...}`` line on stderr.
"""

from __future__ import annotations

import argparse
import json
import math
import os
import sys

import numpy as np

from . import __version__, analysis, homodyne, kernels, maxent, states


def _fail(stage, exc):
    sys.stderr.write(json.dumps({"stage": stage, "error": str(exc)}) + "\n")
    return 1


def _write_json(path, payload):
    with open(path, "w") as fh:
        json.dump(payload, fh, indent=2, sort_keys=True)
        fh.write("\n")


def _config_payload(args, command, keys):
    cfg = {"command": command, "version": __version__}
    for key in keys:
        cfg[key] = getattr(args, key)
    return cfg


def _parse_range(text):
    lo, _, hi = text.partition(":")
    return float(lo), float(hi)


def cmd_kernel(args):
    spec = kernels.KernelSpec.parse(args.target, x_switch=args.x_switch)
    x_min, x_max = _parse_range(args.range)
    thetas = [float(t) for t in args.theta.split(",")] if args.theta else None
    kernels.export_kernel_csv(args.out, spec, x_min=x_min, x_max=x_max, step=args.step, thetas=thetas)
    _write_json(
        args.out + ".json",
        _config_payload(args, "kernel", ("target", "range", "step", "theta", "x_switch", "out")),
    )
    return 0


def _phase_stats_payload(stats):
    return {
        "psi": [[mk.real, mk.imag] for mk in stats.psi],
        "mean_phase": stats.mean_phase,
        "delta_phi": stats.delta_phi,
        "sigma_bp": stats.sigma_bp,
        "sigma_h": stats.sigma_h if math.isfinite(stats.sigma_h) else "inf",
    }


def _oracle_payload(rho, state_label, k_max):
    mean_n, mean_n2, delta_n = states.photon_moments_oracle(rho)
    trig = states.trig_statistics_oracle(rho)
    phase = states.phase_statistics_oracle(rho, k_max=k_max)
    return {
        "state": state_label,
        "n_max": rho.n_max,
        "trace": rho.trace,
        "photon_moments": {"mean_n": mean_n, "mean_n2": mean_n2, "delta_n": delta_n},
        "phase_statistics": _phase_stats_payload(phase),
        "trig_statistics": {
            "mean_c": trig.mean_c, "mean_s": trig.mean_s,
            "mean_c2": trig.mean_c2, "mean_s2": trig.mean_s2,
            "delta_c": trig.delta_c, "delta_s": trig.delta_s,
            "rho00": trig.rho00,
        },
        "ur_reports": [r.to_dict() for r in analysis.verify_urs(rho)],
    }


def cmd_oracle(args):
    rho = states.make_state(args.state, n_max=args.n_max)
    payload = _oracle_payload(rho, args.state, args.kmax)
    payload["config"] = _config_payload(args, "oracle", ("state", "kmax", "n_max"))
    if args.out:
        _write_json(args.out, payload)
    else:
        json.dump(payload, sys.stdout, indent=2, sort_keys=True)
        sys.stdout.write("\n")
    return 0


def cmd_sample(args):
    rho = states.make_state(args.state, n_max=args.n_max)
    schedule = homodyne.PhaseSchedule.parse(args.schedule)
    dataset = homodyne.sample_dataset(
        rho, schedule, args.m, args.seed, state_label=args.state, n_threads=args.threads
    )
    homodyne.save_dataset(dataset, args.out + ".csv", args.out + ".json")
    _write_json(
        args.out + ".config.json",
        _config_payload(args, "sample", ("state", "schedule", "m", "seed", "n_max")),
    )
    return 0


def _suite_from_args(args, dataset):
    suite = homodyne.estimate_suite(dataset, x_switch=args.x_switch)
    for k in range(3, args.kmax + 1):
        spec = kernels.KernelSpec(target="exp_phase", k=k, x_switch=args.x_switch)
        suite[f"psi{k}"] = homodyne.estimate(dataset, spec)
    return suite


def cmd_estimate(args):
    dataset = homodyne.load_dataset(args.data + ".csv", args.data + ".json")
    suite = _suite_from_args(args, dataset)
    with open(args.out, "w") as fh:
        fh.write(homodyne.estimates_to_json(suite))
        fh.write("\n")
    return 0


def _suite_from_json(path):
    with open(path) as fh:
        payload = json.load(fh)
    suite = {}
    for key, entry in payload.items():
        suite[key] = homodyne.MomentEstimate(
            target=kernels.KernelSpec.parse(entry["target"]),
            value=complex(entry["value_re"], entry["value_im"]),
            std_error_re=entry["std_error_re"],
            std_error_im=entry["std_error_im"],
            n_samples=entry["n_samples"],
            flags=tuple(entry.get("flags", ())),
        )
    return suite


def cmd_verify(args):
    suite = _suite_from_json(args.estimates)
    reports = analysis.verify_urs(suite, bootstrap=args.bootstrap)
    with open(args.out, "w") as fh:
        fh.write(analysis.reports_to_json(reports))
        fh.write("\n")
    return 0


def cmd_maxent(args):
    if args.moments:
        with open(args.moments) as fh:
            pairs = json.load(fh)
        moments = [complex(re, im) for re, im in pairs]
    else:
        suite = _suite_from_json(args.estimates)
        moments = []
        for k in range(1, args.kmax + 1):
            key = f"psi{k}"
            if key not in suite:
                raise KeyError(f"estimates file lacks {key}; rerun estimate with --kmax {args.kmax}")
            moments.append(suite[key].value)
    dist = maxent.reconstruct_phase_dist(
        moments, n_phi=args.n_phi, tol=args.tol, max_iter=args.max_iter, clamp_boundary=True
    )
    maxent.distribution_to_csv(dist, args.out + ".csv")
    with open(args.out + ".json", "w") as fh:
        fh.write(maxent.distribution_diagnostics_json(dist))
        fh.write("\n")
    return 0


def cmd_pipeline(args):
    """sample -> estimate -> verify -> maxent, plus the oracle-side report."""
    os.makedirs(args.out, exist_ok=True)
    join = lambda name: os.path.join(args.out, name)

    stage = "config"
    try:
        cfg = _config_payload(
            args, "pipeline", ("state", "schedule", "m", "seed", "kmax", "x_switch", "n_max")
        )
        _write_json(join("config.json"), cfg)

        stage = "sample"
        rho = states.make_state(args.state, n_max=args.n_max)
        schedule = homodyne.PhaseSchedule.parse(args.schedule)
        dataset = homodyne.sample_dataset(
            rho, schedule, args.m, args.seed, state_label=args.state, n_threads=args.threads
        )
        homodyne.save_dataset(dataset, join("dataset.csv"), join("dataset.json"))

        stage = "estimate"
        suite = _suite_from_args(args, dataset)
        with open(join("estimates.json"), "w") as fh:
            fh.write(homodyne.estimates_to_json(suite))
            fh.write("\n")

        stage = "verify"
        sampled_reports = analysis.verify_urs(suite, bootstrap=args.bootstrap)
        with open(join("ur_sampled.json"), "w") as fh:
            fh.write(analysis.reports_to_json(sampled_reports))
            fh.write("\n")
        _write_json(join("oracle.json"), _oracle_payload(rho, args.state, args.kmax))

        stage = "maxent"
        moments = [suite[f"psi{k}"].value for k in range(1, args.kmax + 1)]
        dist = maxent.reconstruct_phase_dist(moments, clamp_boundary=True)
        maxent.distribution_to_csv(dist, join("phase_dist.csv"))
        with open(join("phase_dist.json"), "w") as fh:
            fh.write(maxent.distribution_diagnostics_json(dist))
            fh.write("\n")
    except Exception as exc:  # surface the failing stage machine-readably
        return _fail(stage, exc)
    return 0


def build_parser():
    parser = argparse.ArgumentParser(
        prog="homodyne-phase",
        description="Number-phase uncertainty relations from simulated homodyne data.",
    )
    parser.add_argument("--version", action="version", version=__version__)
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("kernel", help="export sampling-kernel curves as CSV")
    p.add_argument("--target", required=True)
    p.add_argument("--range", default="-8:8")
    p.add_argument("--step", type=float, default=0.05)
    p.add_argument("--theta", default=None, help="comma-separated phase slices for trig_sq/moment")
    p.add_argument("--x-switch", dest="x_switch", type=float, default=6.0)
    p.add_argument("--out", default="kernel.csv")
    p.set_defaults(func=cmd_kernel, stage="kernel")

    p = sub.add_parser("oracle", help="exact state statistics and UR verdicts")
    p.add_argument("--state", required=True)
    p.add_argument("--kmax", type=int, default=4)
    p.add_argument("--n-max", dest="n_max", type=int, default=None)
    p.add_argument("--out", default=None)
    p.set_defaults(func=cmd_oracle, stage="oracle")

    p = sub.add_parser("sample", help="simulate a homodyne dataset")
    p.add_argument("--state", required=True)
    p.add_argument("--schedule", default="uniform")
    p.add_argument("--m", type=int, required=True)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--n-max", dest="n_max", type=int, default=None)
    p.add_argument("--threads", type=int, default=None)
    p.add_argument("--out", default="dataset")
    p.set_defaults(func=cmd_sample, stage="sample")

    p = sub.add_parser("estimate", help="run the estimator suite on a dataset")
    p.add_argument("--data", required=True, help="dataset path prefix (.csv/.json)")
    p.add_argument("--kmax", type=int, default=2)
    p.add_argument("--x-switch", dest="x_switch", type=float, default=6.0)
    p.add_argument("--out", default="estimates.json")
    p.set_defaults(func=cmd_estimate, stage="estimate")

    p = sub.add_parser("verify", help="evaluate the uncertainty relations from estimates")
    p.add_argument("--estimates", required=True)
    p.add_argument("--bootstrap", action="store_true")
    p.add_argument("--out", default="ur_report.json")
    p.set_defaults(func=cmd_verify, stage="verify")

    p = sub.add_parser("maxent", help="maximum-entropy phase distribution from moments")
    p.add_argument("--moments", default=None, help="JSON file of [re, im] pairs")
    p.add_argument("--estimates", default=None)
    p.add_argument("--kmax", type=int, default=4)
    p.add_argument("--n-phi", dest="n_phi", type=int, default=1024)
    p.add_argument("--tol", type=float, default=1e-10)
    p.add_argument("--max-iter", dest="max_iter", type=int, default=100)
    p.add_argument("--out", default="phase_dist")
    p.set_defaults(func=cmd_maxent, stage="maxent")

    p = sub.add_parser("pipeline", help="sample, estimate, verify and reconstruct end to end")
    p.add_argument("--state", required=True)
    p.add_argument("--schedule", default="uniform")
    p.add_argument("--m", type=int, required=True)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--kmax", type=int, default=4)
    p.add_argument("--x-switch", dest="x_switch", type=float, default=6.0)
    p.add_argument("--n-max", dest="n_max", type=int, default=None)
    p.add_argument("--threads", type=int, default=None)
    p.add_argument("--bootstrap", action="store_true")
    p.add_argument("--out", required=True, help="output directory")
    p.set_defaults(func=cmd_pipeline, stage="pipeline")

    return parser


def main(argv=None):
    parser = build_parser()
    args = parser.parse_args(argv)
    if args.func is cmd_pipeline:
        return args.func(args)
    try:
        return args.func(args)
    except Exception as exc:
        return _fail(args.stage, exc)


if __name__ == "__main__":
    sys.exit(main())
