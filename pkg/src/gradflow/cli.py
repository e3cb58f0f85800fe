"""Command-line interface.

Subcommands: simulate, certify, fig2a, fig2b, selftest. Exit codes:
0 success, 1 condition/bound failure, 2 usage or configuration error.
"""

from __future__ import annotations

import argparse
import copy
import sys
from pathlib import Path

from .config import (
    ExperimentConfig,
    config_from_dict,
    dump_config,
    fig2a_config,
    fig2b_config,
    load_config,
)
from .errors import ConfigError, GradflowError
from .experiment import certify_only, run_experiment
from .reporting import certificate_report, render_run_figure, write_trajectory_csv


def _with_overrides(cfg: ExperimentConfig, args) -> ExperimentConfig:
    data = copy.deepcopy(cfg.to_dict())
    changed = False
    if getattr(args, "seed", None) is not None:
        data["simulation"]["seed"] = int(args.seed)
        changed = True
    if getattr(args, "restart_policy", None) is not None:
        data["output"]["restart_policy"] = args.restart_policy
        changed = True
    if getattr(args, "out", None) is not None:
        data["output"]["dir"] = str(args.out)
        changed = True
    return config_from_dict(data) if changed else cfg


def _write_outputs(cfg: ExperimentConfig, result, out_dir: Path) -> None:
    out_dir.mkdir(parents=True, exist_ok=True)
    write_trajectory_csv(out_dir / "trajectory.csv", result.trajectory, result.bound)
    if result.certificate is not None:
        (out_dir / "certificate.txt").write_text(certificate_report(result.certificate))
    else:
        (out_dir / "certificate.txt").write_text("certificate unavailable: gain is zero\n")
    (out_dir / "report.txt").write_text(result.report.to_text())
    (out_dir / "config.yaml").write_text(dump_config(cfg))
    if cfg.figures:
        render_run_figure(result.trajectory, result.bound, out_dir / "figure.png")


def _run_and_report(cfg: ExperimentConfig) -> int:
    result = run_experiment(cfg)
    out_dir = Path(cfg.out_dir)
    _write_outputs(cfg, result, out_dir)
    print(result.report.to_text(), end="")
    print(f"outputs written to {out_dir}")
    return 0 if result.report.status == "PASS" else 1


def _cmd_simulate(args) -> int:
    cfg = _with_overrides(load_config(args.config), args)
    return _run_and_report(cfg)


def _cmd_certify(args) -> int:
    cfg = _with_overrides(load_config(args.config), args)
    cert = certify_only(cfg)
    text = certificate_report(cert)
    if args.out is not None:
        out_dir = Path(args.out)
        out_dir.mkdir(parents=True, exist_ok=True)
        (out_dir / "certificate.txt").write_text(text)
    print(text, end="")
    ok = cert.gain_ok and bool(cert.epsilon_ok) and cert.a is not None and cert.a > 0
    return 0 if ok else 1


def _cmd_preset(args, builder, default_out: str) -> int:
    cfg = builder()
    if getattr(args, "out", None) is None:
        data = copy.deepcopy(cfg.to_dict())
        data["output"]["dir"] = default_out
        cfg = config_from_dict(data)
    cfg = _with_overrides(cfg, args)
    return _run_and_report(cfg)


def _cmd_selftest(_args) -> int:
    from .selftest import run_selftest

    failures = run_selftest()
    return 0 if failures == 0 else 1


def _add_common(parser, config_required: bool):
    if config_required:
        parser.add_argument("--config", required=True, help="path to the YAML experiment file")
    parser.add_argument("--out", default=None, help="output directory (overrides the config)")
    parser.add_argument("--seed", type=int, default=None, help="RNG seed (overrides the config)")
    parser.add_argument(
        "--restart-policy",
        choices=("per-arrival", "global"),
        default=None,
        dest="restart_policy",
        help="envelope restart policy (overrides the config)",
    )


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="gradflow",
        description=(
            "Simulate an LTI plant in closed loop with a gradient-flow controller "
            "that learns its cost online, and verify the tracking-error envelope."
        ),
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p_sim = sub.add_parser("simulate", help="run an experiment from a config file")
    _add_common(p_sim, config_required=True)
    p_sim.set_defaults(func=_cmd_simulate)

    p_cert = sub.add_parser("certify", help="compute the certificate only")
    _add_common(p_cert, config_required=True)
    p_cert.set_defaults(func=_cmd_certify)

    p_a = sub.add_parser("fig2a", help="benchmark run, constant disturbance")
    _add_common(p_a, config_required=False)
    p_a.set_defaults(func=lambda args: _cmd_preset(args, fig2a_config, "out/fig2a"))

    p_b = sub.add_parser("fig2b", help="benchmark run, sinusoidal disturbance")
    _add_common(p_b, config_required=False)
    p_b.set_defaults(func=lambda args: _cmd_preset(args, fig2b_config, "out/fig2b"))

    p_self = sub.add_parser("selftest", help="run the built-in invariant suite")
    p_self.set_defaults(func=_cmd_selftest)

    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except ConfigError as exc:
        print(str(exc), file=sys.stderr)
        return 2
    except GradflowError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
