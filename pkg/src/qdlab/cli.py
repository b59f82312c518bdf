"""Command-line front end.

    qdlab compute --state state.json [--channel channel.json] [--side A]
    qdlab sweep   --state state.json --channel pdc --steps 201 --out pdc_example.csv
    qdlab oracle  --n-states 100 --seed 1 --out oracle.json
    qdlab replay  pdc_example.csv.manifest.json

Exit codes: 0 success, 2 invalid input, 3 optimizer failure, 4 oracle check failed.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
from pathlib import Path

import numpy as np

from . import __version__
from .channels import (
    BUILTIN,
    apply_local,
    channel_from_json,
    evolve_expectation,
    make_channel,
    transmission_matrix,
)
from .correlations import OptimizerConfig, correlation_report, gmqd_bruteforce, gmqd_eig, gmqd_svd
from .dynamics import SweepConfig, run_sweep
from .errors import DomainError, GridTooCoarse, NotPhysical, OptimizerFailure
from .states import expectation_matrix, random_state, state_from_json, state_to_json

EXIT_OK, EXIT_INPUT, EXIT_OPTIMIZER, EXIT_ORACLE = 0, 2, 3, 4

ORACLE_TOLERANCES = {"route": 1e-12, "bruteforce": 1e-4, "picture": 1e-12}


def _load_json(arg: str):
    """Inline JSON (starting with ``{``) or a path to a JSON file."""
    text = arg if arg.lstrip().startswith("{") else Path(arg).read_text()
    return json.loads(text)


def _seed(args) -> int:
    if args.seed is not None:
        return int(args.seed)
    return int(os.environ.get("QDLAB_SEED", "0"))


def _optimizer(args) -> OptimizerConfig:
    base = _load_json(args.optimizer) if getattr(args, "optimizer", None) else {}
    base = dict(base)
    base["seed"] = _seed(args)
    return OptimizerConfig.from_json(base)


def _emit(payload: str, out: str | None) -> None:
    if out:
        Path(out).write_text(payload)
    else:
        sys.stdout.write(payload)


def _write_manifest(out: str, command: str, config: dict, seed: int) -> None:
    manifest = {
        "command": command,
        "config": config,
        "seed": seed,
        "version": __version__,
        "outputs": [str(out)],
    }
    Path(f"{out}.manifest.json").write_text(json.dumps(manifest, indent=2, sort_keys=True) + "\n")


def _dumps(obj) -> str:
    return json.dumps(obj, indent=2, sort_keys=True) + "\n"


def run_compute(config: dict, out: str | None) -> int:
    rho = state_from_json(config["state"])
    if config.get("channel"):
        ch = channel_from_json(config["channel"])
        rho = apply_local(ch, ch, rho)
    cfg = OptimizerConfig.from_json(config["optimizer"])
    report = correlation_report(rho, config.get("side", "A"), cfg)
    _emit(_dumps(report.to_json()), out)
    return EXIT_OK


def cmd_compute(args) -> int:
    seed = _seed(args)
    config = {
        "state": _load_json(args.state),
        "channel": _load_json(args.channel) if args.channel else None,
        "side": args.side,
        "optimizer": _optimizer(args).to_json(),
    }
    code = run_compute(config, args.out)
    if args.out:
        _write_manifest(args.out, "compute", config, seed)
    return code


def run_sweep_config(config: dict, out: str | None) -> int:
    table = run_sweep(SweepConfig.from_json(config))
    _emit(table.to_csv(), out)
    return EXIT_OK


def cmd_sweep(args) -> int:
    seed = _seed(args)
    cfg = SweepConfig(
        state=_load_json(args.state),
        channel=args.channel,
        p_start=args.p_start,
        p_end=args.p_end,
        steps=args.steps,
        optimizer=_optimizer(args),
        threshold=args.threshold,
        side=args.side,
        workers=args.workers,
    )
    cfg.initial_state()
    config = cfg.to_json()
    code = run_sweep_config(config, args.out)
    if args.out:
        _write_manifest(args.out, "sweep", config, seed)
    return code


def oracle_summary(n_states: int, seed: int, bruteforce_states: int, tolerances: dict) -> tuple[dict, bool]:
    """Cross-check the three geometric-discord routes and the two evolution pictures."""
    if n_states < 1:
        raise DomainError("n_states must be at least 1")
    rng = np.random.default_rng(seed)
    states = [random_state(rng) for _ in range(n_states)]
    ps = np.linspace(0.0, 1.0, 11)
    cfg = OptimizerConfig(seed=seed)

    route = np.array([abs(gmqd_svd(r)[0] - gmqd_eig(r)[0]) for r in states])
    brute = np.array(
        [abs(gmqd_bruteforce(r, cfg)[0] - gmqd_svd(r)[0]) for r in states[:bruteforce_states]]
    )
    picture = np.zeros(n_states)
    for k, rho in enumerate(states):
        r0 = expectation_matrix(rho)
        for name in sorted(BUILTIN):
            for p in ps:
                ch = make_channel(name, p)
                m = transmission_matrix(ch)
                kraus = np.asarray(expectation_matrix(apply_local(ch, ch, rho)))
                heis = np.asarray(evolve_expectation(m, r0, m))
                picture[k] = max(picture[k], float(np.max(np.abs(kraus - heis))))

    checks = {"route": route, "bruteforce": brute, "picture": picture}
    summary = {
        "n_states": n_states,
        "seed": seed,
        "bruteforce_states": len(brute),
        "tolerances": tolerances,
        "max_route_gap": float(route.max()),
        "max_bruteforce_gap": float(brute.max()) if brute.size else 0.0,
        "max_picture_gap": float(picture.max()),
    }
    failed = {k: v for k, v in checks.items() if v.size and v.max() > tolerances[k]}
    summary["passed"] = not failed
    if failed:
        # worst offender: largest violation relative to its tolerance
        name, values = max(
            failed.items(), key=lambda kv: kv[1].max() / max(tolerances[kv[0]], 1e-300)
        )
        idx = int(np.argmax(values))
        summary["worst_check"] = name
        summary["worst_state"] = state_to_json(states[idx])
    return summary, not failed


def run_oracle(config: dict, out: str | None) -> int:
    summary, ok = oracle_summary(
        config["n_states"], config["seed"], config["bruteforce_states"], config["tolerances"]
    )
    _emit(_dumps(summary), out)
    return EXIT_OK if ok else EXIT_ORACLE


def cmd_oracle(args) -> int:
    seed = _seed(args)
    tolerances = dict(ORACLE_TOLERANCES)
    if args.tolerance is not None:
        tolerances = {k: args.tolerance for k in tolerances}
    config = {
        "n_states": args.n_states,
        "seed": seed,
        "bruteforce_states": min(args.bruteforce_states, args.n_states),
        "tolerances": tolerances,
    }
    code = run_oracle(config, args.out)
    if args.out:
        _write_manifest(args.out, "oracle", config, seed)
    return code


RUNNERS = {"compute": run_compute, "sweep": run_sweep_config, "oracle": run_oracle}


def cmd_replay(args) -> int:
    manifest = _load_json(args.manifest)
    out = args.out or manifest["outputs"][0]
    return RUNNERS[manifest["command"]](manifest["config"], out)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="qdlab", description=__doc__.split("\n\n")[0])
    parser.add_argument("--version", action="version", version=f"qdlab {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p):
        p.add_argument("--seed", type=int, default=None, help="overrides QDLAB_SEED")
        p.add_argument("--out", default=None, help="output file (default: stdout)")
        p.add_argument("--optimizer", default=None, help="optimizer settings (JSON file or inline)")

    p = sub.add_parser("compute", help="correlation report for one state")
    p.add_argument("--state", required=True, help="state JSON file or inline JSON")
    p.add_argument("--channel", default=None, help="channel JSON applied to both qubits first")
    p.add_argument("--side", choices=("A", "B"), default="A")
    common(p)
    p.set_defaults(func=cmd_compute)

    p = sub.add_parser("sweep", help="sweep the channel strength and report kinks")
    p.add_argument("--state", required=True)
    p.add_argument("--channel", choices=sorted(BUILTIN), default="pdc")
    p.add_argument("--p-start", type=float, default=0.0)
    p.add_argument("--p-end", type=float, default=1.0)
    p.add_argument("--steps", type=int, default=201)
    p.add_argument("--side", choices=("A", "B"), default="A")
    p.add_argument("--threshold", type=float, default=10.0)
    p.add_argument("--workers", type=int, default=1)
    common(p)
    p.set_defaults(func=cmd_sweep)

    p = sub.add_parser("oracle", help="route and picture equivalence checks on random states")
    p.add_argument("--n-states", type=int, default=100)
    p.add_argument("--bruteforce-states", type=int, default=5)
    p.add_argument("--tolerance", type=float, default=None, help="override every tolerance")
    p.add_argument("--seed", type=int, default=None)
    p.add_argument("--out", default=None)
    p.set_defaults(func=cmd_oracle)

    p = sub.add_parser("replay", help="re-run a manifest")
    p.add_argument("manifest")
    p.add_argument("--out", default=None, help="write here instead of the recorded path")
    p.set_defaults(func=cmd_replay)
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except NotPhysical as exc:
        print(f"NotPhysical: {exc}", file=sys.stderr)
        return EXIT_INPUT
    except (DomainError, GridTooCoarse, ValueError, KeyError, OSError) as exc:
        print(f"{type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_INPUT
    except OptimizerFailure as exc:
        print(f"OptimizerFailure: {exc}", file=sys.stderr)
        return EXIT_OPTIMIZER


if __name__ == "__main__":
    sys.exit(main())
