"""Command line entry point: experiment dispatch, config handling, CSV and
figure emission, and the acceptance-suite runner.

Exit codes: 0 success (all assertions pass), 1 assertion failure, 2 bad
configuration, 3 numerical failure (non-finite values in the outputs).
"""

from __future__ import annotations

import argparse
import math
import sys
from dataclasses import fields
from pathlib import Path

from .acceptance import run_acceptance
from .experiments import ExperimentConfig, run_experiment

_COMMANDS = ["region", "decay", "dominate", "sharpness", "weights", "pointwise",
             "multiplier", "propagator", "kernel", "bernstein", "accept"]

_FIELD_TYPES = {f.name: f.type for f in fields(ExperimentConfig)}


class ConfigError(Exception):
    pass


def _read_config(path: str) -> dict[str, str]:
    out = {}
    for line in Path(path).read_text().splitlines():
        line = line.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError(f"malformed config line {line!r} (expected key=value)")
        key, _, val = line.partition("=")
        out[key.strip()] = val.strip()
    return out


def _add_common(p: argparse.ArgumentParser):
    p.add_argument("--config", help="flat key=value config file; flags override it")
    p.add_argument("--n", type=int, help="dimension (1 or 2)")
    p.add_argument("--L", type=float, help="domain period (power of two)")
    p.add_argument("--N", type=int, help="samples per axis (power of two)")
    p.add_argument("--seed", type=int, help="random seed")
    p.add_argument("--threads", type=int, help="worker pool size")
    p.add_argument("--out", help="output directory")
    p.add_argument("--quick", action="store_true", default=None,
                   help="halved sizes and trials (documented per criterion)")


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="sparsepdo",
                                 description="sparse-domination laboratory for "
                                             "pseudodifferential operators on a periodic lattice")
    sub = ap.add_subparsers(dest="command", required=True)
    specs = {
        "region": ["m", "rho"],
        "decay": ["symbol", "epsilon", "j_min", "j_max", "l_offset", "l_range"],
        "dominate": ["symbol", "r", "s_prime", "epsilon", "j_max", "l_offset", "trials"],
        "sharpness": ["m", "rho", "r", "s_prime", "epsilon", "j_min", "j_max"],
        "weights": ["check", "weight", "symbol", "p", "r", "s", "trials"],
        "pointwise": ["symbol", "r"],
        "multiplier": ["alpha", "beta"],
        "propagator": ["alpha", "t", "beta"],
        "kernel": ["a", "b"],
        "bernstein": ["j_min", "j_max", "trials"],
        "accept": [],
    }
    float_fields = {"r", "s_prime", "p", "s", "epsilon", "alpha", "beta", "t", "a", "b"}
    int_fields = {"j_min", "j_max", "l_offset", "trials"}
    for cmd, extra in specs.items():
        p = sub.add_parser(cmd)
        _add_common(p)
        for name in extra:
            if name in float_fields:
                p.add_argument(f"--{name}", type=float)
            elif name in int_fields:
                p.add_argument(f"--{name}", type=int)
            else:
                p.add_argument(f"--{name}")
        if cmd == "accept":
            p.add_argument("--only", help="comma-separated criterion indices")
    return ap


def _build_config(args: argparse.Namespace) -> ExperimentConfig:
    cfg = ExperimentConfig(experiment=args.command)
    file_vals = _read_config(args.config) if getattr(args, "config", None) else {}
    for key, raw in file_vals.items():
        if not hasattr(cfg, key):
            raise ConfigError(f"unknown config key {key!r}")
        cur = getattr(cfg, key)
        if isinstance(cur, bool):
            setattr(cfg, key, raw.lower() in ("1", "true", "yes"))
        elif isinstance(cur, int) and not isinstance(cur, bool):
            setattr(cfg, key, int(raw))
        elif isinstance(cur, float):
            setattr(cfg, key, float(raw))
        else:
            setattr(cfg, key, raw)
    for key, val in vars(args).items():
        if key in ("command", "config", "only") or val is None:
            continue
        if key in ("m", "rho"):
            setattr(cfg, key, str(val))
        elif hasattr(cfg, key):
            setattr(cfg, key, val)
    return cfg


def _format_value(v) -> str:
    if isinstance(v, float):
        return repr(v)
    return str(v)


def write_csv(path: Path, rows: list[dict]) -> bool:
    """Write rows; returns False when non-finite numbers were present."""
    finite = True
    with open(path, "w") as fh:
        if not rows:
            return True
        header = list(rows[0].keys())
        fh.write(",".join(header) + "\n")
        for row in rows:
            vals = []
            for key in header:
                v = row.get(key, "")
                if isinstance(v, float) and not math.isfinite(v):
                    finite = False
                vals.append(_format_value(v))
            fh.write(",".join(vals) + "\n")
    return finite


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        cfg = _build_config(args)
    except (ConfigError, ValueError) as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 2

    out_dir = Path(cfg.out)
    out_dir.mkdir(parents=True, exist_ok=True)

    if args.command == "accept":
        indices = None
        if getattr(args, "only", None):
            indices = [int(tok) for tok in args.only.split(",")]
        results = run_acceptance(quick=bool(cfg.quick), indices=indices)
        rows = [{"index": r.index, "name": r.name, "measured": r.measured,
                 "threshold": r.threshold, "passed": r.passed, "runtime_s": round(r.runtime, 2)}
                for r in sorted(results, key=lambda r: r.index)]
        write_csv(out_dir / "acceptance.csv", rows)
        n_pass = sum(r.passed for r in results)
        print(f"{n_pass}/{len(results)} criteria passed; report in {out_dir / 'acceptance.csv'}")
        return 0 if n_pass == len(results) else 1

    try:
        output = run_experiment(cfg)
    except (ConfigError, ValueError) as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 2

    csv_path = out_dir / f"{cfg.experiment}.csv"
    finite = write_csv(csv_path, output.rows)
    for name, lines in output.extra_files.items():
        (out_dir / name).write_text("\n".join(lines) + "\n")
    summary_path = out_dir / f"{cfg.experiment}_summary.txt"
    summary_path.write_text("\n".join(output.summary) + "\n")
    for line in output.summary:
        print(line)
    print(f"wrote {csv_path} and {csv_path.with_suffix('.png')}")
    if not finite:
        print("numerical failure: non-finite values in output", file=sys.stderr)
        return 3
    if output.passed is False:
        return 1
    return 0


if __name__ == "__main__":
    sys.exit(main())
