"""CSV and JSON artifact writers.

Every file carries the schema version and a header block echoing the fully
resolved configuration that produced it, so any number in a report can be
recomputed from the dumped raw artifacts. JSON output is key-sorted and
float-formatted by ``repr``, which makes identical runs byte-identical except
for the ``generated_at`` stamp (excluded from determinism comparisons).
"""

from __future__ import annotations

import json
from datetime import datetime, timezone
from pathlib import Path
from typing import Iterable, Mapping, Sequence

import numpy as np

from .fcs import CharacteristicSamples, QuasiDistribution
from .open_system import HeatLedger
from .tmp import TmpOutcome

__all__ = [
    "SCHEMA_VERSION",
    "flatten_config",
    "write_characteristic",
    "write_quasi_distribution",
    "write_tmp_distribution",
    "write_spectral_terms",
    "write_ledger",
    "write_report",
    "write_table",
    "write_paths_csv",
]

SCHEMA_VERSION = 1


def _stamp() -> str:
    return datetime.now(timezone.utc).isoformat(timespec="seconds")


def flatten_config(config: Mapping, prefix: str = "") -> dict[str, object]:
    """Flatten nested config dicts to dotted keys for CSV headers."""
    out: dict[str, object] = {}
    for key, value in config.items():
        dotted = f"{prefix}{key}"
        if isinstance(value, Mapping):
            out.update(flatten_config(value, prefix=f"{dotted}."))
        else:
            out[dotted] = value
    return out


def _fmt(x) -> str:
    if isinstance(x, (float, np.floating)):
        return repr(float(x))
    if isinstance(x, (int, np.integer)) and not isinstance(x, bool):
        return str(int(x))
    return str(x)


def _write_csv(
    path: Path,
    columns: Sequence[str],
    rows: Iterable[Sequence],
    header: Mapping[str, object],
) -> None:
    lines = [f"# schema_version: {SCHEMA_VERSION}", f"# generated_at: {_stamp()}"]
    for key, value in header.items():
        lines.append(f"# {key}: {_fmt(value)}")
    lines.append(",".join(columns))
    for row in rows:
        lines.append(",".join(_fmt(x) for x in row))
    path.write_text("\n".join(lines) + "\n")


def _sanitize(obj):
    if isinstance(obj, Mapping):
        return {str(k): _sanitize(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_sanitize(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return [_sanitize(v) for v in obj.tolist()]
    if isinstance(obj, (np.floating,)):
        return float(obj)
    if isinstance(obj, (np.integer,)):
        return int(obj)
    if isinstance(obj, complex):
        return {"re": obj.real, "im": obj.imag}
    return obj


def _write_json(path: Path, payload: Mapping) -> None:
    body = {"schema_version": SCHEMA_VERSION, "generated_at": _stamp()}
    body.update(_sanitize(payload))
    path.write_text(json.dumps(body, sort_keys=True, indent=2) + "\n")


def _targets(directory: Path, stem: str, formats: Sequence[str]) -> dict[str, Path]:
    directory.mkdir(parents=True, exist_ok=True)
    return {fmt: directory / f"{stem}.{fmt}" for fmt in formats}


def write_characteristic(
    directory: Path,
    stem: str,
    samples: CharacteristicSamples,
    config: Mapping,
    formats: Sequence[str],
    protocol: str = "fcs",
) -> list[Path]:
    written = []
    targets = _targets(directory, stem, formats)
    header = {"kind": "characteristic_function", "protocol": protocol}
    header.update(flatten_config(config))
    if "csv" in targets:
        rows = zip(samples.grid.lambdas, samples.values.real, samples.values.imag)
        _write_csv(targets["csv"], ["lambda", "re", "im"], rows, header)
        written.append(targets["csv"])
    if "json" in targets:
        _write_json(
            targets["json"],
            {
                "kind": "characteristic_function",
                "protocol": protocol,
                "config": config,
                "lambda": samples.grid.lambdas,
                "re": samples.values.real,
                "im": samples.values.imag,
            },
        )
        written.append(targets["json"])
    return written


def write_quasi_distribution(
    directory: Path,
    stem: str,
    dist: QuasiDistribution,
    config: Mapping,
    formats: Sequence[str],
    protocol: str = "fcs",
) -> list[Path]:
    written = []
    targets = _targets(directory, stem, formats)
    header = {"kind": "quasi_distribution", "protocol": protocol}
    header.update(flatten_config(config))
    if "csv" in targets:
        rows = zip(dist.support, dist.weights)
        _write_csv(targets["csv"], ["support", "weight"], rows, header)
        written.append(targets["csv"])
    if "json" in targets:
        _write_json(
            targets["json"],
            {
                "kind": "quasi_distribution",
                "protocol": protocol,
                "config": config,
                "support": dist.support,
                "weight": dist.weights,
            },
        )
        written.append(targets["json"])
    return written


def write_tmp_distribution(
    directory: Path,
    stem: str,
    outcomes: Sequence[TmpOutcome],
    config: Mapping,
    formats: Sequence[str],
) -> list[Path]:
    """Two-measurement work distribution, same shape with a protocol tag."""
    written = []
    targets = _targets(directory, stem, formats)
    header = {"kind": "quasi_distribution", "protocol": "tmp"}
    header.update(flatten_config(config))
    if "csv" in targets:
        rows = [(o.work, o.probability) for o in outcomes]
        _write_csv(targets["csv"], ["support", "weight"], rows, header)
        written.append(targets["csv"])
    if "json" in targets:
        _write_json(
            targets["json"],
            {
                "kind": "quasi_distribution",
                "protocol": "tmp",
                "config": config,
                "support": [o.work for o in outcomes],
                "weight": [o.probability for o in outcomes],
                "initial_index": [o.i for o in outcomes],
                "final_index": [o.k for o in outcomes],
            },
        )
        written.append(targets["json"])
    return written


def write_spectral_terms(
    directory: Path,
    stem: str,
    terms,
    config: Mapping,
    formats: Sequence[str],
) -> list[Path]:
    """The exact phase terms of G: per-term indices, support and weight."""
    written = []
    targets = _targets(directory, stem, formats)
    header = {"kind": "spectral_terms"}
    header.update(flatten_config(config))
    if "csv" in targets:
        rows = [(t.i, t.j, t.k, t.support, t.weight.real, t.weight.imag) for t in terms]
        _write_csv(
            targets["csv"],
            ["i", "j", "k", "support", "weight_re", "weight_im"],
            rows,
            header,
        )
        written.append(targets["csv"])
    if "json" in targets:
        _write_json(
            targets["json"],
            {
                "kind": "spectral_terms",
                "config": config,
                "i": [t.i for t in terms],
                "j": [t.j for t in terms],
                "k": [t.k for t in terms],
                "support": [t.support for t in terms],
                "weight_re": [t.weight.real for t in terms],
                "weight_im": [t.weight.imag for t in terms],
            },
        )
        written.append(targets["json"])
    return written


def write_ledger(
    directory: Path,
    stem: str,
    ledger: HeatLedger,
    config: Mapping,
    formats: Sequence[str],
) -> list[Path]:
    written = []
    targets = _targets(directory, stem, formats)
    header = {"kind": "heat_ledger"}
    header.update(flatten_config(config))
    cum = np.cumsum(ledger.heat_increments)
    if "csv" in targets:
        rows = [
            (r.k, r.time, r.heat, r.entropy_change, cum[n])
            for n, r in enumerate(ledger.rows)
        ]
        _write_csv(targets["csv"], ["k", "t_k", "Q_k", "dS_k", "cumQ"], rows, header)
        written.append(targets["csv"])
    if "json" in targets:
        _write_json(
            targets["json"],
            {
                "kind": "heat_ledger",
                "config": config,
                "per_step": {
                    "k": [r.k for r in ledger.rows],
                    "t": [r.time for r in ledger.rows],
                    "heat": [r.heat for r in ledger.rows],
                    "entropy_change": [r.entropy_change for r in ledger.rows],
                    "cumulative_heat": cum,
                },
                "totals": {
                    "heat": ledger.heat,
                    "internal_energy_change": ledger.internal_energy_change,
                    "work": ledger.work,
                },
            },
        )
        written.append(targets["json"])
    return written


def write_report(directory: Path, stem: str, report: Mapping) -> Path:
    directory.mkdir(parents=True, exist_ok=True)
    target = directory / f"{stem}.json"
    _write_json(target, report)
    return target


def write_table(
    directory: Path,
    stem: str,
    columns: Sequence[str],
    rows: Iterable[Sequence],
    header: Mapping[str, object],
) -> Path:
    directory.mkdir(parents=True, exist_ok=True)
    target = directory / f"{stem}.csv"
    _write_csv(target, columns, rows, header)
    return target


def write_paths_csv(
    directory: Path,
    stem: str,
    records,
    config: Mapping,
    max_rows: int = 10000,
) -> Path:
    directory.mkdir(parents=True, exist_ok=True)
    target = directory / f"{stem}.csv"
    header = {"kind": "path_records"}
    header.update(flatten_config(config))
    rows = [
        ("-".join(str(i) for i in r.indices), r.amplitude.real, r.amplitude.imag, r.functional)
        for r in records[:max_rows]
    ]
    _write_csv(target, ["indices", "amp_re", "amp_im", "functional"], rows, header)
    return target
