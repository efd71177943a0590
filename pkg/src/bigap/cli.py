"""Command-line front end.

Exit codes: 0 success, 1 I/O failure, 2 usage or config error, 3 numerical
failure.  Output is ``key=value`` lines.
"""

from __future__ import annotations

import argparse
import logging
import math
import sys
from pathlib import Path

import numpy as np

from . import _backend
from .errors import ConvergenceError, DomainError, EdgeListError, OracleCapError
from .graphgen import read_bipartite, sample_bipartite, write_bipartite
from .harness import ExperimentConfig, Mode, default_workers, run_experiment, verify_proof_chain, write_csv
from .rng import SeedSpec, derive_stream
from .spectra import DEFAULT_ORACLE_CAP, DEFAULT_TOL, adjacency, lanczos_extreme, normalized_adjacency

EXIT_OK, EXIT_IO, EXIT_USAGE, EXIT_NUMERIC = 0, 1, 2, 3


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        raise UsageError(message)


def fmt(x) -> str:
    if x is None:
        return "nan"
    if isinstance(x, (bool, np.bool_)):
        return "true" if x else "false"
    if isinstance(x, (float, np.floating)):
        return "nan" if math.isnan(x) else f"{float(x):.12g}"
    return str(x)


def emit(**pairs) -> None:
    for key, value in pairs.items():
        print(f"{key}={fmt(value)}")


def _workers(value: str) -> int:
    n = int(value)
    if n < 1:
        raise argparse.ArgumentTypeError("--workers must be >= 1")
    return n


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--workers", type=_workers, default=None,
                        help="parallel trial workers (default: $BIGAP_WORKERS or CPU count)")
    common.add_argument("--tol", type=float, default=DEFAULT_TOL, help="Lanczos residual tolerance")
    common.add_argument("--slack", type=float, default=1.0, help="multiplier applied to every bound")
    common.add_argument("--oracle-cap", type=int, default=DEFAULT_ORACLE_CAP, help="dense eigensolver dimension cap")

    parser = _Parser(prog="bigap", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    p = sub.add_parser("sample", parents=[common], help="write a G(n1, n2, p) edge list")
    p.add_argument("--n1", type=int, required=True)
    p.add_argument("--n2", type=int, required=True)
    p.add_argument("--p", type=float, required=True)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--trial", type=int, default=0)
    p.add_argument("--out", required=True)

    p = sub.add_parser("spectrum", parents=[common], help="extreme eigenvalues of an edge-list file")
    p.add_argument("input")
    p.add_argument("--mode", choices=[m.value for m in Mode], default="adjacency")
    p.add_argument("--seed", type=int, default=0)

    p = sub.add_parser("verify", parents=[common], help="check the proof chain on small graphs")
    p.add_argument("--n1", type=int, required=True)
    p.add_argument("--n2", type=int, required=True)
    p.add_argument("--p", type=float, required=True)
    p.add_argument("--trials", type=int, default=25)
    p.add_argument("--seed", type=int, default=0)

    p = sub.add_parser("experiment", parents=[common], help="Monte Carlo experiment to CSV")
    p.add_argument("--config", help="flat key = value config file")
    p.add_argument("--n1", type=int)
    p.add_argument("--n2", type=int)
    p.add_argument("--p", type=float)
    p.add_argument("--trials", type=int)
    p.add_argument("--seed", type=int)
    p.add_argument("--mode", choices=[m.value for m in Mode])
    p.add_argument("--max-iter", type=int)
    p.add_argument("--out", required=True)

    sub.add_parser("selftest", parents=[common], help="quick internal consistency check")
    return parser


# -- config files ----------------------------------------------------------------

_CONFIG_KEYS = {
    "n1": int, "n2": int, "p": float, "trials": int, "seed": int, "master_seed": int,
    "slack": float, "tol": float, "max_iter": int, "mode": str, "oracle_cap": int,
}


class ConfigError(Exception):
    def __init__(self, message: str, lineno: int | None = None):
        self.lineno = lineno
        super().__init__(f"line {lineno}: {message}" if lineno else message)


def parse_config(text: str) -> dict:
    """Flat ``key = value`` lines; ``#`` starts a comment."""
    out = {}
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        key, sep, value = line.partition("=")
        key, value = key.strip(), value.strip()
        if not sep or not key or not value:
            raise ConfigError(f"expected 'key = value', got {raw!r}", lineno)
        if key not in _CONFIG_KEYS:
            raise ConfigError(f"unknown key {key!r}", lineno)
        try:
            out["seed" if key == "master_seed" else key] = _CONFIG_KEYS[key](value)
        except ValueError:
            raise ConfigError(f"bad value for {key}: {value!r}", lineno) from None
    return out


def _experiment_config(args) -> ExperimentConfig:
    values = {}
    if args.config:
        values = parse_config(Path(args.config).read_text())
    for key in ("n1", "n2", "p", "trials", "seed", "mode", "max_iter"):
        v = getattr(args, key)
        if v is not None:
            values[key] = v
    # global flags override the file only when set away from their defaults
    if args.slack != 1.0 or "slack" not in values:
        values["slack"] = args.slack
    if args.tol != DEFAULT_TOL or "tol" not in values:
        values["tol"] = args.tol
    if args.oracle_cap != DEFAULT_ORACLE_CAP or "oracle_cap" not in values:
        values["oracle_cap"] = args.oracle_cap
    missing = [k for k in ("n1", "n2", "p", "trials") if k not in values]
    if missing:
        raise ConfigError(f"missing required settings: {', '.join(missing)}")
    values["master_seed"] = values.pop("seed", 0)
    try:
        return ExperimentConfig(**values)
    except (DomainError, ValueError) as exc:
        raise ConfigError(str(exc)) from None


# -- subcommands -------------------------------------------------------------------


def cmd_sample(args) -> int:
    stream = derive_stream(SeedSpec(args.seed, args.trial))
    g = sample_bipartite(args.n1, args.n2, args.p, stream)
    write_bipartite(g, args.out)
    emit(n1=g.n1, n2=g.n2, m=g.m, out=args.out)
    return EXIT_OK


def cmd_spectrum(args) -> int:
    g = read_bipartite(args.input)
    stream = derive_stream(SeedSpec(args.seed, 0))
    mode = Mode(args.mode)
    if mode.adjacency:
        s = lanczos_extreme(adjacency(g), 2, args.tol, None, stream)
        emit(mu1=s.mu1, mu2=s.mu2, mu_second_last=s.mu_second_last, mu_min=s.mu_min,
             mu_abs=s.mu_abs, mu_plus=s.mu_plus, mu_plus_certified=s.mu_plus_certified,
             residual=s.residual, method=s.method)
    if mode.normalized:
        s = lanczos_extreme(normalized_adjacency(g).base, 2, args.tol, None, stream)
        emit(norm_mu1=s.mu1, norm_mu2=s.mu2, norm_mu_second_last=s.mu_second_last,
             norm_mu_min=s.mu_min, norm_gap=max(abs(s.mu2), abs(s.mu_second_last)),
             norm_residual=s.residual)
    return EXIT_OK


def cmd_verify(args) -> int:
    report = verify_proof_chain(args.n1, args.n2, args.p, args.trials, args.seed, args.oracle_cap)
    total = len(report.trials)
    for check, count in report.pass_counts().items():
        print(f"{check}={count}/{total}")
    k_values = [t.k_value for t in report.trials if t.k_value is not None]
    if k_values:
        emit(k_residual_max=max(k_values))
    emit(passed=report.all_passed)
    return EXIT_OK if report.all_passed else EXIT_NUMERIC


def cmd_experiment(args) -> int:
    cfg = _experiment_config(args)
    workers = args.workers if args.workers is not None else default_workers()
    records, summary = run_experiment(cfg, workers)
    write_csv(records, summary, args.out)
    emit(trials=summary.trials, excluded=summary.excluded,
         satisfied_fraction=summary.satisfied_fraction, ratio_min=summary.ratio_min,
         ratio_median=summary.ratio_median, ratio_max=summary.ratio_max,
         norm_fraction=summary.norm_fraction, mean_rel_dev=summary.mean_rel_dev, out=args.out)
    if summary.excluded:
        return EXIT_NUMERIC
    return EXIT_OK if summary.all_satisfied or (
        summary.satisfied_fraction is None and summary.norm_fraction == 1.0) else EXIT_NUMERIC


def cmd_selftest(args) -> int:
    from .graphgen import complete_bipartite
    from .spectra import dense_eig

    g = complete_bipartite(2, 3)
    s = lanczos_extreme(adjacency(g), 2, args.tol, None, derive_stream(SeedSpec(0, 0)))
    eigs = dense_eig(adjacency(g))
    checks = {
        "k23_mu1": abs(s.mu1 - math.sqrt(6)) <= 1e-10,
        "k23_oracle": abs(eigs[-1] - math.sqrt(6)) <= 1e-10,
        "proof_chain": verify_proof_chain(10, 12, 0.3, 5, 1).all_passed,
        "stream": derive_stream(SeedSpec(7, 3)).u64(4).tolist() == derive_stream(SeedSpec(7, 3)).u64(4).tolist(),
    }
    emit(backend=_backend.NAME, **checks)
    return EXIT_OK if all(checks.values()) else EXIT_NUMERIC


COMMANDS = {
    "sample": cmd_sample,
    "spectrum": cmd_spectrum,
    "verify": cmd_verify,
    "experiment": cmd_experiment,
    "selftest": cmd_selftest,
}


def main(argv: list[str] | None = None) -> int:
    logging.basicConfig(level=logging.WARNING, format="%(levelname)s %(name)s: %(message)s")
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
        return COMMANDS[args.command](args)
    except UsageError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except OracleCapError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except (ConfigError, EdgeListError, DomainError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except ConvergenceError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_NUMERIC
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_IO


if __name__ == "__main__":
    sys.exit(main())
