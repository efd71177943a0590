"""Monte Carlo trials comparing measured spectra with the closed-form bounds.

Each trial draws everything (graph and Lanczos start vectors) from its own
stream ``derive_stream(SeedSpec(master_seed, trial_index))``, so records do not
depend on how many workers ran them or in what order.
"""

from __future__ import annotations

import csv
import io
import logging
import math
import os
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, field
from enum import Enum
from pathlib import Path

import numpy as np

from . import bounds
from .errors import ConvergenceError, DomainError, IsolatedVertexError, OracleCapError
from .graphgen import degree_stats, embed_union, sample_bipartite
from .rng import SeedSpec, derive_stream
from .spectra import (
    DEFAULT_ORACLE_CAP,
    DEFAULT_TOL,
    IsolatedPolicy,
    adjacency,
    adjacency_full,
    check_bipartite_symmetry,
    dense_eig,
    k_residual,
    lanczos_extreme,
    negation_spectrum_check,
    normalized_adjacency,
    split_blocks,
)

log = logging.getLogger(__name__)

CSV_COLUMNS = (
    "trial", "seed", "n1", "n2", "p", "m", "mu1", "mu2", "mu_min", "theorem_bound",
    "ratio", "norm_gap", "norm_bound", "rel_dev", "regime_left", "regime_right",
    "residual", "ms",
)
TIMING_COLUMNS = ("ms",)
MAX_SLACK = 1.5


class Mode(str, Enum):
    ADJACENCY = "adjacency"
    NORMALIZED = "normalized"
    BOTH = "both"

    @property
    def adjacency(self) -> bool:
        return self is not Mode.NORMALIZED

    @property
    def normalized(self) -> bool:
        return self is not Mode.ADJACENCY


@dataclass(frozen=True)
class ExperimentConfig:
    n1: int
    n2: int
    p: float
    trials: int = 100
    master_seed: int = 0
    slack: float = 1.0
    tol: float = DEFAULT_TOL
    max_iter: int | None = None
    mode: Mode = Mode.ADJACENCY
    oracle_cap: int = DEFAULT_ORACLE_CAP

    def __post_init__(self):
        object.__setattr__(self, "mode", Mode(self.mode))
        if self.trials < 1:
            raise DomainError(f"trials must be >= 1, got {self.trials}")
        if self.n1 < 1:
            raise DomainError(f"n1 must be >= 1, got {self.n1}")
        if self.n2 < self.n1:
            raise DomainError(f"n2 must be >= n1, got n1={self.n1}, n2={self.n2}")
        if not 0.0 < self.p <= 1.0:
            raise DomainError(f"p must lie in (0, 1], got {self.p}")
        if not 1.0 <= self.slack <= MAX_SLACK:
            raise DomainError(f"slack must lie in [1, {MAX_SLACK}], got {self.slack}")
        if not self.tol > 0:
            raise DomainError(f"tol must be positive, got {self.tol}")
        if not 0 <= self.master_seed < 2**64:
            raise DomainError("master_seed must be a 64-bit unsigned integer")


@dataclass
class TrialRecord:
    trial_index: int
    derived_seed: int
    n1: int
    n2: int
    p: float
    m: int
    mu1: float | None = None
    mu2: float | None = None
    mu_min: float | None = None
    theorem_bound_value: float = math.nan
    ratio: float | None = None
    norm_gap: float | None = None
    normalized_bound_value: float = math.nan
    rel_dev: float | None = None
    regime_left: bool = False
    regime_right: bool = False
    residual: float | None = None
    ms: float = 0.0
    norm_gap_exact: bool | None = None
    error: str | None = None

    def without_timing(self) -> dict:
        d = asdict(self)
        d.pop("ms")
        return d


@dataclass
class Summary:
    trials: int
    excluded: int
    satisfied_fraction: float | None
    ratio_min: float | None
    ratio_median: float | None
    ratio_max: float | None
    norm_fraction: float | None
    mean_rel_dev: float | None
    norm_gap_exact: bool | None = None
    errors: dict[int, str] = field(default_factory=dict)

    @property
    def all_satisfied(self) -> bool:
        return self.excluded == 0 and self.satisfied_fraction == 1.0


def run_trial(cfg: ExperimentConfig, trial_index: int) -> TrialRecord:
    start = time.perf_counter()
    spec = SeedSpec(cfg.master_seed, trial_index)
    stream = derive_stream(spec)
    g = sample_bipartite(cfg.n1, cfg.n2, cfg.p, stream)
    rec = TrialRecord(
        trial_index=trial_index,
        derived_seed=spec.derived_seed,
        n1=cfg.n1,
        n2=cfg.n2,
        p=cfg.p,
        m=g.m,
        theorem_bound_value=bounds.theorem_bound(cfg.n1, cfg.n2, cfg.p),
        normalized_bound_value=bounds.normalized_gap_bound(cfg.n1, cfg.n2, cfg.p),
    )
    rec.rel_dev = degree_stats(g, cfg.p).rel_dev
    rec.regime_left, rec.regime_right = bounds.regime_check(cfg.n1, cfg.n2, cfg.p)
    residuals = []
    try:
        if cfg.mode.adjacency:
            s = lanczos_extreme(adjacency(g), 2, cfg.tol, cfg.max_iter, stream)
            rec.mu1, rec.mu2, rec.mu_min = s.mu1, s.mu2, s.mu_min
            rec.ratio = max(s.mu2, 0.0) / (cfg.slack * rec.theorem_bound_value)
            residuals.append(s.residual)
        if cfg.mode.normalized:
            base = normalized_adjacency(g, IsolatedPolicy.STRICT).base
            if base.n <= cfg.oracle_cap:
                eigs = dense_eig(base, cfg.oracle_cap)
                inner = eigs[1:-1]
                rec.norm_gap = float(np.abs(inner).max()) if len(inner) else 0.0
                rec.norm_gap_exact = True
            else:
                s = lanczos_extreme(base, 2, cfg.tol, cfg.max_iter, stream)
                rec.norm_gap = max(abs(s.mu2), abs(s.mu_second_last))
                rec.norm_gap_exact = False
                residuals.append(s.residual)
    except (ConvergenceError, IsolatedVertexError) as exc:
        rec.error = f"{type(exc).__name__}: {exc}"
        log.warning("trial %d excluded: %s", trial_index, rec.error)
    rec.residual = max(residuals) if residuals else (0.0 if rec.error is None else None)
    rec.ms = (time.perf_counter() - start) * 1000.0
    return rec


def summarize(records: list[TrialRecord], cfg: ExperimentConfig) -> Summary:
    ok = [r for r in records if r.error is None]
    ratios = [r.ratio for r in ok if r.ratio is not None]
    gaps = [r for r in ok if r.norm_gap is not None]
    devs = [r.rel_dev for r in records if r.rel_dev is not None]
    sat = [r.mu2 <= cfg.slack * r.theorem_bound_value for r in ok if r.mu2 is not None]
    exact = {r.norm_gap_exact for r in gaps}
    return Summary(
        trials=len(records),
        excluded=len(records) - len(ok),
        satisfied_fraction=sum(sat) / len(sat) if sat else None,
        ratio_min=min(ratios) if ratios else None,
        ratio_median=float(np.median(ratios)) if ratios else None,
        ratio_max=max(ratios) if ratios else None,
        norm_fraction=(
            sum(r.norm_gap <= cfg.slack * r.normalized_bound_value for r in gaps) / len(gaps)
            if gaps else None
        ),
        mean_rel_dev=float(np.mean(devs)) if devs else None,
        norm_gap_exact=(exact == {True}) if exact else None,
        errors={r.trial_index: r.error for r in records if r.error is not None},
    )


def default_workers() -> int:
    env = os.environ.get("BIGAP_WORKERS")
    if env:
        return max(1, int(env))
    return os.cpu_count() or 1


def run_experiment(cfg: ExperimentConfig, workers: int | None = None) -> tuple[list[TrialRecord], Summary]:
    workers = default_workers() if workers is None else max(1, workers)
    indices = range(cfg.trials)
    if workers == 1 or cfg.trials == 1:
        records = [run_trial(cfg, t) for t in indices]
    else:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            records = list(pool.map(run_trial, [cfg] * cfg.trials, indices,
                                    chunksize=max(1, cfg.trials // (4 * workers))))
    records.sort(key=lambda r: r.trial_index)
    return records, summarize(records, cfg)


# -- proof chain ---------------------------------------------------------------


CHAIN_CHECKS = ("blocks", "weyl", "negation", "symmetry", "k_residual")


@dataclass
class ChainTrial:
    trial_index: int
    m: int
    blocks: bool
    weyl: bool
    weyl_lhs: float
    weyl_rhs: float
    negation: bool
    symmetry: bool
    symmetry_defect: float
    k_residual: bool
    k_value: float | None
    k_scaled: float | None

    def passed(self) -> bool:
        return all(getattr(self, c) for c in CHAIN_CHECKS)


@dataclass
class ChainReport:
    n1: int
    n2: int
    p: float
    trials: list[ChainTrial]

    def pass_counts(self) -> dict[str, int]:
        return {c: sum(bool(getattr(t, c)) for t in self.trials) for c in CHAIN_CHECKS}

    @property
    def all_passed(self) -> bool:
        return all(t.passed() for t in self.trials)


def _desc(eigs: np.ndarray) -> np.ndarray:
    return eigs[::-1]


def verify_proof_chain(n1: int, n2: int, p: float, trials: int, seed: int = 0,
                       oracle_cap: int = DEFAULT_ORACLE_CAP, weyl_tol: float = 1e-8,
                       negation_tol: float = 1e-10, symmetry_tol: float = 1e-9) -> ChainReport:
    """Replay the mechanical steps of the mu2 argument on small sampled graphs.

    Per trial: sample G and its union embedding G', split A(G') into its
    three blocks, then check (a) exact reconstruction with the cross block equal
    to A(G); (b) ``mu2(A) <= mu2(A(G')) + mu1(-A1') + mu1(-A3')``; (c) the
    negated-spectrum identity on A1'; (d) symmetry of spec(A) about zero;
    (e) the K residual is finite (isolated vertices get zero rows).
    """
    if n1 + n2 > oracle_cap:
        raise OracleCapError(n1 + n2, oracle_cap)
    if not 0.0 <= p <= 1.0:
        raise DomainError(f"p must lie in [0, 1], got {p}")
    out = []
    for t in range(trials):
        stream = derive_stream(SeedSpec(seed, t))
        g = sample_bipartite(n1, n2, p, stream)
        g_prime = embed_union(g, p, stream)
        a = adjacency(g)
        a_prime = adjacency_full(g_prime)
        a1, across, a3 = split_blocks(a_prime, n1)
        blocks = (a1 + across + a3).same_entries(a_prime) and across.same_entries(a)

        eig_a = _desc(dense_eig(a, oracle_cap))
        eig_prime = _desc(dense_eig(a_prime, oracle_cap))
        eig_a1 = _desc(dense_eig(a1, oracle_cap))
        eig_neg_a1 = _desc(dense_eig(-a1, oracle_cap))
        eig_neg_a3 = _desc(dense_eig(-a3, oracle_cap))
        lhs = float(eig_a[1]) if len(eig_a) > 1 else float(eig_a[0])
        rhs = float(eig_prime[1] + eig_neg_a1[0] + eig_neg_a3[0])

        ok_sym, defect = check_bipartite_symmetry(eig_a[::-1], symmetry_tol)
        if p > 0:
            kr = k_residual(g, p, policy=IsolatedPolicy.LENIENT)
            k_ok = math.isfinite(kr.value) and kr.value >= 0
            k_value, k_scaled = kr.value, kr.scaled
        else:
            # K is undefined without a positive p; A = 0 so there is nothing to scale
            k_ok, k_value, k_scaled = True, None, None
        out.append(ChainTrial(
            trial_index=t,
            m=g.m,
            blocks=bool(blocks),
            weyl=lhs <= rhs + weyl_tol,
            weyl_lhs=lhs,
            weyl_rhs=rhs,
            negation=negation_spectrum_check(eig_a1, eig_neg_a1, negation_tol),
            symmetry=ok_sym,
            symmetry_defect=defect,
            k_residual=k_ok,
            k_value=k_value,
            k_scaled=k_scaled,
        ))
    return ChainReport(n1, n2, p, out)


# -- CSV ---------------------------------------------------------------------


def _fmt(value) -> str:
    if value is None:
        return "nan"
    if isinstance(value, bool):
        return "true" if value else "false"
    if isinstance(value, float):
        return "nan" if math.isnan(value) else repr(value)
    return str(value)


def _summary_lines(summary: Summary) -> list[str]:
    lines = [
        f"# satisfied_fraction={_fmt(summary.satisfied_fraction)}",
        f"# ratio_median={_fmt(summary.ratio_median)}",
        f"# excluded={summary.excluded}",
        f"# trials={summary.trials}",
        f"# ratio_min={_fmt(summary.ratio_min)}",
        f"# ratio_max={_fmt(summary.ratio_max)}",
        f"# norm_fraction={_fmt(summary.norm_fraction)}",
        f"# mean_rel_dev={_fmt(summary.mean_rel_dev)}",
        f"# norm_gap_exact={_fmt(summary.norm_gap_exact)}",
    ]
    for trial, message in sorted(summary.errors.items()):
        lines.append(f"# error trial={trial} {message}")
    return lines


def _row(r: TrialRecord) -> list[str]:
    return [_fmt(v) for v in (
        r.trial_index, r.derived_seed, r.n1, r.n2, float(r.p), r.m, r.mu1, r.mu2, r.mu_min,
        r.theorem_bound_value, r.ratio, r.norm_gap, r.normalized_bound_value, r.rel_dev,
        r.regime_left, r.regime_right, r.residual, r.ms,
    )]


def format_csv(records: list[TrialRecord], summary: Summary) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(CSV_COLUMNS)
    for r in records:
        writer.writerow(_row(r))
    for line in _summary_lines(summary):
        buf.write(line + "\n")
    return buf.getvalue()


def write_csv(records: list[TrialRecord], summary: Summary, path) -> None:
    path = Path(path)
    try:
        with open(path, "w", encoding="ascii", newline="") as fh:
            fh.write(format_csv(records, summary))
    except OSError as exc:
        raise OSError(f"cannot write {path}: {exc.strerror or exc}") from exc


def _parse(text: str, kind):
    if text == "nan":
        return None
    if kind is bool:
        return text == "true"
    return kind(text)


def read_csv(path) -> tuple[list[TrialRecord], dict[str, str]]:
    """Inverse of ``write_csv``: records plus the raw summary key/value pairs."""
    records = []
    meta: dict[str, str] = {}
    errors: dict[int, str] = {}
    with open(path, encoding="ascii", newline="") as fh:
        lines = fh.read().split("\n")
    data = [ln for ln in lines if ln and not ln.startswith("#")]
    for ln in lines:
        if ln.startswith("# error trial="):
            head, _, message = ln[len("# error trial="):].partition(" ")
            errors[int(head)] = message
        elif ln.startswith("# ") and "=" in ln:
            key, _, value = ln[2:].partition("=")
            meta[key] = value
    reader = csv.reader(data)
    header = next(reader)
    if tuple(header) != CSV_COLUMNS:
        raise ValueError(f"unexpected CSV header {header}")
    kinds = (int, int, int, int, float, int, float, float, float, float, float, float,
             float, float, bool, bool, float, float)
    for row in reader:
        v = [_parse(text, kind) for text, kind in zip(row, kinds)]
        rec = TrialRecord(
            trial_index=v[0], derived_seed=v[1], n1=v[2], n2=v[3], p=v[4], m=v[5],
            mu1=v[6], mu2=v[7], mu_min=v[8],
            theorem_bound_value=math.nan if v[9] is None else v[9],
            ratio=v[10], norm_gap=v[11],
            normalized_bound_value=math.nan if v[12] is None else v[12],
            rel_dev=v[13], regime_left=v[14], regime_right=v[15], residual=v[16],
            ms=v[17] or 0.0, error=errors.get(v[0]),
        )
        records.append(rec)
    if meta.get("norm_gap_exact") in ("true", "false"):
        exact = meta["norm_gap_exact"] == "true"
        for rec in records:
            if rec.norm_gap is not None:
                rec.norm_gap_exact = exact
    return records, meta


def strip_timing(csv_text: str) -> str:
    """CSV text with the timing column blanked, for reproducibility comparisons."""
    out = []
    idx = [CSV_COLUMNS.index(c) for c in TIMING_COLUMNS]
    for line in csv_text.split("\n"):
        if not line or line.startswith("#") or line.startswith("trial,"):
            out.append(line)
            continue
        cells = line.split(",")
        for i in idx:
            cells[i] = ""
        out.append(",".join(cells))
    return "\n".join(out)
