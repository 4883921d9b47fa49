"""Seeded Monte Carlo validation of the certified deviation bounds.

A simulation estimates, for each requested radius eps, how often the
empirical mean log-likelihood of n fresh draws lands at least eps away
from its expectation. The expectation is unknown in closed form, so runs
centre on the midpoint of a certified entropy interval whose width is
forced far below every radius of interest.

Reproducibility contract: replicate i draws from a generator seeded by
(seed, i) through numpy's SeedSequence spawn mechanism, so results do
not depend on scheduling, worker count, or chunk boundaries. Identical
(config, certificate) inputs give bit-identical reports.
"""

from __future__ import annotations

import csv
import io
import json
import math
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .bounds import BernsteinConstants, bernstein_constants, deviation_bound
from .certify import DEFAULT_SLACK, EntropyInterval, MomentCertificate, certify_moment, entropy_interval
from .distributions import PmfModel
from .errors import ReportIntegrityError, SweepAborted

__all__ = [
    "DEFAULT_REPLICATES",
    "SimulationConfig",
    "EpsRecord",
    "SimulationReport",
    "replicate_log_likelihood_means",
    "estimate_deviation_probability",
    "estimate_mgf",
    "sweep",
    "verify_bound",
    "reports_to_csv",
    "reports_to_json",
]

DEFAULT_REPLICATES = 10_000

CSV_COLUMNS = [
    "model",
    "n",
    "replicates",
    "seed",
    "r",
    "C_r",
    "slack",
    "eps",
    "hit_count",
    "frequency",
    "stderr",
    "bound_value",
    "verdict",
]


@dataclass(frozen=True)
class SimulationConfig:
    """One simulation: a model, a sample size, and the radii to probe.

    ``entropy_tolerance`` defaults to min(eps) / 100 and may only be
    tightened; centring error must stay negligible next to every radius.
    """

    model: PmfModel
    n: int
    eps: tuple[float, ...]
    replicates: int = DEFAULT_REPLICATES
    seed: int = 0
    entropy_tolerance: float | None = None

    def __post_init__(self) -> None:
        if not (isinstance(self.n, int) and self.n >= 1):
            raise ValueError(f"n must be an integer >= 1, got {self.n!r}")
        eps = self.eps
        if isinstance(eps, (int, float)):
            eps = (float(eps),)
        else:
            eps = tuple(float(e) for e in eps)
        if not eps:
            raise ValueError("at least one deviation radius is required")
        if any(not (e > 0 and math.isfinite(e)) for e in eps):
            raise ValueError(f"deviation radii must be positive and finite, got {eps!r}")
        object.__setattr__(self, "eps", eps)
        if not (isinstance(self.replicates, int) and self.replicates >= 100):
            raise ValueError(f"replicates must be an integer >= 100, got {self.replicates!r}")
        cap = min(eps) / 100.0
        tol = self.entropy_tolerance
        if tol is None:
            tol = cap
        if not (0.0 < tol <= cap):
            raise ValueError(
                f"entropy_tolerance must lie in (0, {cap:g}] so centring error is "
                f"negligible at every radius, got {tol!r}"
            )
        object.__setattr__(self, "entropy_tolerance", float(tol))


@dataclass(frozen=True)
class EpsRecord:
    eps: float
    hit_count: int
    frequency: float
    stderr: float
    bound_value: float
    verdict: str


@dataclass(frozen=True)
class SimulationReport:
    model: str
    n: int
    replicates: int
    seed: int
    certificate: MomentCertificate
    entropy: EntropyInterval
    records: tuple[EpsRecord, ...]
    elapsed: float = field(compare=False)


def _replicate_rng(seed: int, index: int) -> np.random.Generator:
    # Equivalent to SeedSequence(seed).spawn(...)[index]; spelling it out
    # lets workers reconstruct any replicate's stream independently.
    return np.random.default_rng(np.random.SeedSequence(entropy=seed, spawn_key=(index,)))


def _means_range(model: PmfModel, n: int, seed: int, lo: int, hi: int) -> np.ndarray:
    out = np.empty(hi - lo, dtype=np.float64)
    for i in range(lo, hi):
        rng = _replicate_rng(seed, i)
        ks = model.draw(rng, n)
        out[i - lo] = float(np.mean(model.log_pmf_array(ks)))
    return out


def replicate_log_likelihood_means(
    model: PmfModel, n: int, replicates: int, seed: int, workers: int = 1
) -> np.ndarray:
    """Mean log-likelihood of n draws, per replicate, assembled by index.

    The result is a pure function of (model, n, replicates, seed);
    ``workers`` only changes how the work is scheduled.
    """
    if workers <= 1 or replicates < 2 * workers:
        return _means_range(model, n, seed, 0, replicates)
    edges = np.linspace(0, replicates, workers + 1, dtype=int)
    with ProcessPoolExecutor(max_workers=workers) as pool:
        parts = pool.map(
            _means_range,
            [model] * workers,
            [n] * workers,
            [seed] * workers,
            edges[:-1].tolist(),
            edges[1:].tolist(),
        )
        return np.concatenate(list(parts))


def _stderr(hit_count: int, replicates: int) -> float:
    if hit_count >= 5:
        f = hit_count / replicates
        return math.sqrt(f * (1.0 - f) / replicates)
    # Wilson-adjusted at one standard normal unit; never collapses to
    # zero width when no replicate hits.
    centre = (hit_count + 0.5) / (replicates + 1.0)
    return math.sqrt(centre * (1.0 - centre) / (replicates + 1.0))


def _verdict(frequency: float, stderr: float, bound_value: float) -> str:
    if bound_value >= 1.0:
        return "VACUOUS"
    if frequency - 3.0 * stderr > bound_value:
        return "FAIL"
    return "PASS"


def estimate_deviation_probability(
    config: SimulationConfig,
    certificate: MomentCertificate | None = None,
    workers: int = 1,
) -> SimulationReport:
    """Run one simulation and compare hit frequencies against the bound.

    A certificate may be supplied to control the moment order and slack;
    otherwise the model is certified with the default rule and slack.
    """
    start = time.perf_counter()
    model = config.model
    if certificate is None:
        certificate = certify_moment(model, eps=DEFAULT_SLACK)
    enclosure = entropy_interval(model, certificate, config.entropy_tolerance)
    constants = bernstein_constants(certificate)
    means = replicate_log_likelihood_means(
        model, config.n, config.replicates, config.seed, workers=workers
    )
    # E[log P(X)] = -H, so the centred statistic is the mean plus H.
    deviations = np.abs(means + enclosure.midpoint)
    records = []
    for eps in config.eps:
        hits = int(np.count_nonzero(deviations >= eps))
        frequency = hits / config.replicates
        stderr = _stderr(hits, config.replicates)
        bound_value = deviation_bound(constants, config.n, eps)
        records.append(
            EpsRecord(
                eps=eps,
                hit_count=hits,
                frequency=frequency,
                stderr=stderr,
                bound_value=bound_value,
                verdict=_verdict(frequency, stderr, bound_value),
            )
        )
    return SimulationReport(
        model=model.describe(),
        n=config.n,
        replicates=config.replicates,
        seed=config.seed,
        certificate=certificate,
        entropy=enclosure,
        records=tuple(records),
        elapsed=time.perf_counter() - start,
    )


def estimate_mgf(
    model: PmfModel,
    entropy: EntropyInterval,
    lam: float,
    samples: int,
    seed: int,
) -> tuple[float, float]:
    """Monte Carlo estimate of the centred log-likelihood MGF at lam.

    Returns the sample mean of exp(lam * (log P(X) + H_mid)) and its
    standard error, from a single seeded stream.
    """
    if not (isinstance(samples, int) and samples >= 1):
        raise ValueError(f"samples must be an integer >= 1, got {samples!r}")
    rng = np.random.default_rng(np.random.SeedSequence(seed))
    ks = model.draw(rng, samples)
    values = np.exp(lam * (model.log_pmf_array(ks) + entropy.midpoint))
    mean = float(np.mean(values))
    stderr = float(np.std(values, ddof=1) / math.sqrt(samples)) if samples > 1 else 0.0
    return mean, stderr


def sweep(
    configs: list[SimulationConfig],
    certificates: list[MomentCertificate | None] | None = None,
    workers: int = 1,
    on_report=None,
) -> list[SimulationReport]:
    """Run configs in order; each one uses exactly its own seed.

    The first hard error aborts the sweep with the finished reports
    attached to the raised ``SweepAborted``.
    """
    if certificates is None:
        certificates = [None] * len(configs)
    if len(certificates) != len(configs):
        raise ValueError(
            f"got {len(certificates)} certificates for {len(configs)} configs"
        )
    reports: list[SimulationReport] = []
    for config, certificate in zip(configs, certificates):
        try:
            report = estimate_deviation_probability(config, certificate, workers=workers)
        except Exception as exc:
            raise SweepAborted(
                f"sweep aborted on config {len(reports)} ({config.model.describe()}): {exc}",
                partial=reports,
            ) from exc
        reports.append(report)
        if on_report is not None:
            on_report(report)
    return reports


def verify_bound(report: SimulationReport) -> dict:
    """Re-derive every stored record and check it is self-consistent.

    Returns a verdict tally; raises ReportIntegrityError on any mismatch.
    Running it twice on the same report is a no-op by construction.
    """
    constants = bernstein_constants(report.certificate)
    tally = {"PASS": 0, "VACUOUS": 0, "FAIL": 0}
    for record in report.records:
        frequency = record.hit_count / report.replicates
        stderr = _stderr(record.hit_count, report.replicates)
        bound_value = deviation_bound(constants, report.n, record.eps)
        verdict = _verdict(frequency, stderr, bound_value)
        stored = (record.frequency, record.stderr, record.bound_value, record.verdict)
        derived = (frequency, stderr, bound_value, verdict)
        if stored != derived:
            raise ReportIntegrityError(
                f"record at eps={record.eps:g} is inconsistent: stored {stored}, "
                f"re-derived {derived}"
            )
        tally[verdict] += 1
    tally["overall"] = "FAIL" if tally["FAIL"] else "PASS"
    return tally


# -- serialisation -----------------------------------------------------------


def _csv_cell(value) -> str:
    # repr keeps the full float and is stable across runs, which the
    # byte-identical output contract relies on.
    if isinstance(value, float):
        return repr(value)
    return str(value)


def reports_to_csv(reports: list[SimulationReport]) -> str:
    """One row per (config, eps). Deliberately excludes wall time."""
    buffer = io.StringIO()
    writer = csv.writer(buffer, lineterminator="\n")
    writer.writerow(CSV_COLUMNS)
    for report in reports:
        for record in report.records:
            writer.writerow(
                [
                    report.model,
                    report.n,
                    report.replicates,
                    report.seed,
                    _csv_cell(report.certificate.r),
                    _csv_cell(report.certificate.C_r),
                    _csv_cell(report.certificate.slack),
                    _csv_cell(record.eps),
                    record.hit_count,
                    _csv_cell(record.frequency),
                    _csv_cell(record.stderr),
                    _csv_cell(record.bound_value),
                    record.verdict,
                ]
            )
    return buffer.getvalue()


def report_to_dict(report: SimulationReport) -> dict:
    return {
        "model": report.model,
        "n": report.n,
        "replicates": report.replicates,
        "seed": report.seed,
        "certificate": report.certificate.to_dict(),
        "entropy": {
            "lower": report.entropy.lower,
            "upper": report.entropy.upper,
            "tolerance": report.entropy.tolerance,
        },
        "records": [
            {
                "eps": record.eps,
                "hit_count": record.hit_count,
                "frequency": record.frequency,
                "stderr": record.stderr,
                "bound_value": record.bound_value,
                "verdict": record.verdict,
            }
            for record in report.records
        ],
        "elapsed_seconds": report.elapsed,
    }


def reports_to_json(reports: list[SimulationReport]) -> str:
    return json.dumps([report_to_dict(r) for r in reports], indent=2, sort_keys=True) + "\n"


def write_reports(reports: list[SimulationReport], path: str | Path, fmt: str) -> None:
    path = Path(path)
    if fmt == "csv":
        path.write_text(reports_to_csv(reports))
    elif fmt == "json":
        path.write_text(reports_to_json(reports))
    else:
        raise ValueError(f"unknown report format {fmt!r}")
