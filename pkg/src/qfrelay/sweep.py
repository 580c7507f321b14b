"""BER sweeps, memory-bit reports and CSV emission.

A sweep runs trials_per_point trials for every (spec, SNR) pair.  Work is
split into contiguous trial-index chunks handed to a process pool; because
every trial owns its stream and error counts are plain integer sums, the
CSV output is byte-identical for any worker count.
"""

from __future__ import annotations

import csv
import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass

import numpy as np

from . import engine
from .quantizers import AF, METHOD_LABELS, quantizer_bits

CSV_COLUMNS = (
    "method", "q", "qbar", "m", "family_n", "n_s", "n_r", "n_d", "M",
    "snr_db", "trials", "bit_errors", "total_bits", "ber", "n_b", "seed",
    "stderr",
)


@dataclass(frozen=True)
class BerRecord:
    """One row of sweep output: a (method, SNR) point with its error counts."""

    method: str
    q: int | None
    qbar: int | None
    m: int | None
    family_n: int | None
    n_s: int
    n_r: int
    n_d: int
    alphabet: int
    snr_db: float
    trials: int
    bit_errors: int
    total_bits: int
    n_b: int | None
    seed: int

    @property
    def ber(self):
        return self.bit_errors / self.total_bits

    @property
    def stderr(self):
        """Monte Carlo standard error sqrt(p(1-p)/total_bits)."""
        p = self.ber
        return math.sqrt(p * (1.0 - p) / self.total_bits)

    def row(self):
        def fmt(value):
            if value is None:
                return ""
            if isinstance(value, float):
                return f"{value:.10g}"
            return str(value)

        return [
            self.method, fmt(self.q), fmt(self.qbar), fmt(self.m),
            fmt(self.family_n), fmt(self.n_s), fmt(self.n_r), fmt(self.n_d),
            fmt(self.alphabet), fmt(float(self.snr_db)), fmt(self.trials),
            fmt(self.bit_errors), fmt(self.total_bits), fmt(self.ber),
            fmt(self.n_b), fmt(self.seed), fmt(self.stderr),
        ]


@dataclass(frozen=True)
class _SweepTask:
    n_source: int
    n_relay: int
    n_dest: int
    alphabet: int
    specs: tuple
    snr_db: float
    snr_index: int
    seed: int
    start: int
    stop: int
    detector: str
    marginal_samples: int


def _run_task(task):
    counts = engine.count_errors(
        task.n_source, task.n_relay, task.n_dest, task.alphabet, task.specs,
        task.snr_db, task.snr_index, task.seed, task.start, task.stop,
        detector=task.detector, marginal_samples=task.marginal_samples,
    )
    return task.snr_index, counts


def _chunks(trials, workers):
    # enough chunks to keep the pool busy without drowning it in tasks
    size = max(256, -(-trials // max(1, workers * 8)))
    return [(start, min(start + size, trials)) for start in range(0, trials, size)]


def sweep_error_counts(cfg):
    """Bit-error counts, shape (len(specs), len(snr_db_grid))."""
    tasks = [
        _SweepTask(
            cfg.n_source, cfg.n_relay, cfg.n_dest, cfg.alphabet, tuple(cfg.specs),
            snr_db, snr_index, cfg.seed, start, stop, cfg.detector,
            cfg.marginal_samples,
        )
        for snr_index, snr_db in enumerate(cfg.snr_db_grid)
        for start, stop in _chunks(cfg.trials_per_point, cfg.workers)
    ]
    counts = np.zeros((len(cfg.specs), len(cfg.snr_db_grid)), dtype=np.int64)
    if cfg.workers <= 1 or len(tasks) == 1:
        results = map(_run_task, tasks)
        for snr_index, chunk_counts in results:
            counts[:, snr_index] += chunk_counts
    else:
        with ProcessPoolExecutor(max_workers=cfg.workers) as pool:
            for snr_index, chunk_counts in pool.map(_run_task, tasks):
                counts[:, snr_index] += chunk_counts
    return counts


def _spec_fields(spec):
    return {
        "method": METHOD_LABELS[spec.kind],
        "q": spec.total_bits,
        "qbar": spec.phase_bits,
        "m": spec.group_size,
        "family_n": spec.level_exponent,
    }


def run_ber_sweep(cfg):
    """Run the configured sweep; one record per (spec, SNR) in that order."""
    counts = sweep_error_counts(cfg)
    bits_per_trial = cfg.n_source * (cfg.alphabet.bit_length() - 1)
    records = []
    for spec_index, spec in enumerate(cfg.specs):
        n_b = None if spec.kind == AF else quantizer_bits(spec, cfg.n_relay)
        for snr_index, snr_db in enumerate(cfg.snr_db_grid):
            records.append(
                BerRecord(
                    n_s=cfg.n_source,
                    n_r=cfg.n_relay,
                    n_d=cfg.n_dest,
                    alphabet=cfg.alphabet,
                    snr_db=snr_db,
                    trials=cfg.trials_per_point,
                    bit_errors=int(counts[spec_index, snr_index]),
                    total_bits=cfg.trials_per_point * bits_per_trial,
                    n_b=n_b,
                    seed=cfg.seed,
                    **_spec_fields(spec),
                )
            )
    return records


def write_ber_csv(records, stream):
    writer = csv.writer(stream, lineterminator="\n")
    writer.writerow(CSV_COLUMNS)
    for record in records:
        writer.writerow(record.row())


# ---------------------------------------------------------------------------
# Memory-bit report
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class MemoryRow:
    n_r: int
    method: str
    q: int | None
    qbar: int | None
    m: int | None
    family_n: int | None
    n_b: int


def memory_report(n_r_values, specs):
    """Exact relay memory bits for every (antenna count, method) pair."""
    rows = []
    for n_r in n_r_values:
        for spec in specs:
            fields = _spec_fields(spec)
            rows.append(
                MemoryRow(
                    n_r=n_r,
                    n_b=quantizer_bits(spec, n_r),
                    method=fields["method"],
                    q=fields["q"],
                    qbar=fields["qbar"],
                    m=fields["m"],
                    family_n=fields["family_n"],
                )
            )
    return rows


def write_memory_csv(rows, stream):
    writer = csv.writer(stream, lineterminator="\n")
    writer.writerow(("n_r", "method", "q", "qbar", "m", "family_n", "n_b"))
    for row in rows:
        writer.writerow(
            [
                row.n_r, row.method,
                "" if row.q is None else row.q,
                "" if row.qbar is None else row.qbar,
                "" if row.m is None else row.m,
                "" if row.family_n is None else row.family_n,
                row.n_b,
            ]
        )
