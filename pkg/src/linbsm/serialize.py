"""JSON/CSV artifacts: distributions, classification tables, count records, metrics, relay curves."""

from __future__ import annotations

import csv
import io
import json
import math
from typing import Any, Iterable, Mapping, Optional

from .detector import CountRecord
from .fock import Occupation
from .relay import RelayCurve
from .schemes import AMBIGUOUS, BellKind, ClassificationTable, Distribution, Label

SCHEMA_VERSION = 1
SIG_DIGITS = 12


class SchemaError(ValueError):
    """Artifact fails to parse or violates its invariants."""


def num(x: Optional[float]) -> Optional[float]:
    if x is None:
        return None
    return float(f"{x:.{SIG_DIGITS}g}")


def pattern_key(pattern: Iterable[int]) -> str:
    return ",".join(str(int(n)) for n in pattern)


def parse_pattern(key: str) -> Occupation:
    try:
        occ = tuple(int(n) for n in key.split(","))
    except ValueError:
        raise SchemaError(f"bad pattern key {key!r}") from None
    if any(n < 0 for n in occ):
        raise SchemaError(f"negative occupation in {key!r}")
    return occ


def dumps(doc: Mapping[str, Any]) -> str:
    return json.dumps(doc, indent=2, sort_keys=True, allow_nan=False) + "\n"


def label_str(label: Label) -> str:
    return label.value if isinstance(label, BellKind) else AMBIGUOUS


def parse_label(text: str) -> Label:
    return AMBIGUOUS if text == AMBIGUOUS else BellKind.parse(text)


def distribution_to_json(dist: Mapping[Occupation, float]) -> dict[str, float]:
    return {pattern_key(p): num(v) for p, v in sorted(dist.items())}


def distribution_from_json(doc: Mapping[str, float], tol: float = 1e-9) -> Distribution:
    dist = {parse_pattern(k): float(v) for k, v in doc.items()}
    if any(v < 0 or not math.isfinite(v) for v in dist.values()):
        raise SchemaError("probabilities must be finite and non-negative")
    if dist and abs(sum(dist.values()) - 1) > tol:
        raise SchemaError(f"probabilities sum to {sum(dist.values())!r}")
    if len({len(p) for p in dist}) > 1:
        raise SchemaError("patterns of different lengths")
    return dist


def table_to_json(table: ClassificationTable, probabilities: Optional[Mapping[BellKind, Distribution]] = None, **meta) -> dict:
    rows = []
    for pattern, label in sorted(table.entries.items()):
        row: dict[str, Any] = {"pattern": pattern_key(pattern), "label": label_str(label)}
        if probabilities is not None:
            row["probabilities"] = {k.value: num(probabilities[k].get(pattern, 0.0)) for k in probabilities}
        rows.append(row)
    return {
        "schema_version": SCHEMA_VERSION,
        "kind": "classification_table",
        **meta,
        "tolerance": table.tolerance,
        "n_modes": table.n_modes,
        "rows": rows,
    }


def table_from_json(doc: Mapping[str, Any]) -> ClassificationTable:
    try:
        entries: dict[Occupation, Label] = {}
        for row in doc["rows"]:
            p = parse_pattern(row["pattern"])
            if p in entries:
                raise SchemaError(f"pattern {row['pattern']} listed twice")
            entries[p] = parse_label(row["label"])
        n_modes = int(doc["n_modes"])
        tolerance = float(doc.get("tolerance", 0.0))
    except (KeyError, TypeError, ValueError) as exc:
        raise SchemaError(f"invalid classification table: {exc}") from exc
    if any(len(p) != n_modes for p in entries):
        raise SchemaError("pattern length does not match n_modes")
    return ClassificationTable(entries, tolerance, n_modes)


def record_to_json(rec: CountRecord, corrected: Optional[Distribution] = None, std: Optional[Mapping[Occupation, float]] = None) -> dict:
    doc: dict[str, Any] = {
        "config": {"k": rec.config.k, "eta": rec.config.eta, "seed": rec.config.seed},
        "photon_number": rec.photon_number,
        "shots": rec.shots,
        "post_selected": rec.post_selected,
        "raw": {pattern_key(p): c for p, c in rec.raw.items()},
    }
    if corrected is not None:
        doc["corrected"] = distribution_to_json(corrected)
    if std is not None:
        doc["std_error"] = distribution_to_json(std)
    return doc


def record_from_json(doc: Mapping[str, Any]) -> CountRecord:
    from .detector import PnrConfig

    try:
        cfg = PnrConfig(**doc["config"])
        raw = {parse_pattern(k): int(v) for k, v in doc["raw"].items()}
        return CountRecord(raw, int(doc["shots"]), int(doc["post_selected"]), cfg, doc.get("photon_number"))
    except (KeyError, TypeError, ValueError) as exc:
        raise SchemaError(f"invalid count record: {exc}") from exc


def rounded(obj: Any) -> Any:
    """Recursively round floats to the artifact precision."""
    if isinstance(obj, float):
        return num(obj)
    if isinstance(obj, dict):
        return {k: rounded(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [rounded(v) for v in obj]
    return obj


def distribution_csv(labels: Iterable[str], columns: Mapping[str, Mapping[Occupation, float]]) -> str:
    """One row per pattern: occupation per mode followed by one column per named distribution."""
    labels = list(labels)
    patterns = sorted({p for col in columns.values() for p in col})
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(labels + list(columns))
    for p in patterns:
        w.writerow(list(p) + [repr(num(col.get(p, 0.0))) for col in columns.values()])
    return buf.getvalue()


def relay_csv(c: RelayCurve) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["n", "success"])
    for n, s in c.points:
        w.writerow([n, repr(num(s))])
    return buf.getvalue()
