"""Sweep orchestration: record assembly, CSV shape, worker independence."""

import io

import numpy as np

from qfrelay.config import SweepConfig
from qfrelay.engine import count_errors
from qfrelay.quantizers import AF, HAPQ, UAPQ, UPQ, QuantizerSpec, quantizer_bits
from qfrelay.sweep import (
    CSV_COLUMNS,
    memory_report,
    run_ber_sweep,
    sweep_error_counts,
    write_ber_csv,
    write_memory_csv,
)

SPECS = (
    QuantizerSpec(AF),
    QuantizerSpec(UPQ, total_bits=8),
    QuantizerSpec(HAPQ, phase_bits=4, group_size=2),
)


def _config(trials=300, workers=1, snr=(0.0, 10.0)):
    return SweepConfig(
        n_source=4, n_relay=4, n_dest=4, alphabet=4, specs=SPECS,
        snr_db_grid=tuple(snr), trials_per_point=trials, seed=321,
        workers=workers,
    )


def test_records_are_ordered_and_consistent():
    cfg = _config()
    records = run_ber_sweep(cfg)
    assert len(records) == len(SPECS) * len(cfg.snr_db_grid)
    expected_order = [
        (spec, snr) for spec in SPECS for snr in cfg.snr_db_grid
    ]
    for record, (spec, snr) in zip(records, expected_order):
        assert record.snr_db == snr
        assert record.trials == cfg.trials_per_point
        assert record.total_bits == cfg.trials_per_point * 8
        assert record.ber == record.bit_errors / record.total_bits
        if spec.kind == AF:
            assert record.n_b is None
        else:
            assert record.n_b == quantizer_bits(spec, cfg.n_relay)


def test_counts_match_engine_directly():
    cfg = _config(trials=200)
    counts = sweep_error_counts(cfg)
    for snr_index, snr_db in enumerate(cfg.snr_db_grid):
        direct = count_errors(
            4, 4, 4, 4, SPECS, snr_db, snr_index, cfg.seed, 0, cfg.trials_per_point
        )
        assert np.array_equal(counts[:, snr_index], direct)


def test_csv_layout():
    records = run_ber_sweep(_config(trials=50))
    buffer = io.StringIO()
    write_ber_csv(records, buffer)
    lines = buffer.getvalue().splitlines()
    assert lines[0] == ",".join(CSV_COLUMNS)
    assert len(lines) == 1 + len(records)
    first = lines[1].split(",")
    assert first[0] == "AF"
    assert first[14] == ""  # n_b blank for AF
    hapq_line = lines[1 + 2 * 2].split(",")  # third spec, first SNR
    assert hapq_line[0] == "H-APQ"
    assert hapq_line[14] == "19"


def test_worker_counts_are_identical():
    # small sweep; byte-identical CSV at 1 and 4 workers
    outputs = []
    for workers in (1, 4):
        records = run_ber_sweep(_config(trials=400, workers=workers))
        buffer = io.StringIO()
        write_ber_csv(records, buffer)
        outputs.append(buffer.getvalue())
    assert outputs[0] == outputs[1]


def test_memory_report_values():
    hapq = QuantizerSpec(HAPQ, phase_bits=4, group_size=2)
    upq = QuantizerSpec(UPQ, total_bits=8)
    rows = memory_report((4, 8, 16), (hapq, upq))
    got = {(row.n_r, row.method): row.n_b for row in rows}
    assert got[(4, "H-APQ")] == 19
    assert got[(8, "H-APQ")] == 44
    assert got[(16, "H-APQ")] == 101
    assert got[(4, "U-PQ")] == 32
    assert got[(16, "U-PQ")] == 128
    buffer = io.StringIO()
    write_memory_csv(rows, buffer)
    lines = buffer.getvalue().splitlines()
    assert lines[0] == "n_r,method,q,qbar,m,family_n,n_b"
    assert lines[1] == "4,H-APQ,,4,2,2,19"
