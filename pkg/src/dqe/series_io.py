"""Reading labelled score files, min-max normalisation, and the JSON report.

Input files carry a ``label`` column (0/1), an optional ``score`` column and
an optional ``detection`` column (0/1, a precomputed binary detection
sequence used in binary mode). CSV files may start with an integer ``t``
column, which is validated and then ignored.
"""

from __future__ import annotations

import csv
import io
import json
import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Literal, Sequence

import numpy as np

Format = Literal["csv", "ndjson"]

CSV_COLUMNS = ("t", "label", "score", "detection")


class DataError(ValueError):
    """Malformed or invalid input data."""


@dataclass(frozen=True, eq=False)
class LabeledSeries:
    labels: np.ndarray
    scores: np.ndarray | None = None
    name: str = "series"
    detections: np.ndarray | None = None

    def __post_init__(self) -> None:
        labels = np.asarray(self.labels, dtype=np.int8).ravel()
        if labels.size < 1:
            raise DataError("series must contain at least one timestamp")
        if not np.all((labels == 0) | (labels == 1)):
            raise DataError("labels must be 0 or 1")
        object.__setattr__(self, "labels", labels)
        if self.scores is not None:
            scores = np.asarray(self.scores, dtype=np.float64).ravel()
            if scores.size != labels.size:
                raise DataError(f"length mismatch: {labels.size} labels vs {scores.size} scores")
            if not np.all(np.isfinite(scores)):
                raise DataError("scores contain NaN or infinity")
            object.__setattr__(self, "scores", scores)
        if self.detections is not None:
            det = np.asarray(self.detections, dtype=np.int8).ravel()
            if det.size != labels.size:
                raise DataError(f"length mismatch: {labels.size} labels vs {det.size} detections")
            if not np.all((det == 0) | (det == 1)):
                raise DataError("detections must be 0 or 1")
            object.__setattr__(self, "detections", det)

    @property
    def T(self) -> int:
        return int(self.labels.size)

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, LabeledSeries):
            return NotImplemented
        return (
            self.name == other.name
            and np.array_equal(self.labels, other.labels)
            and _opt_equal(self.scores, other.scores)
            and _opt_equal(self.detections, other.detections)
        )

    def reversed(self) -> LabeledSeries:
        """Time-reversed copy (t -> T - 1 - t)."""
        return LabeledSeries(
            self.labels[::-1].copy(),
            None if self.scores is None else self.scores[::-1].copy(),
            self.name,
            None if self.detections is None else self.detections[::-1].copy(),
        )


def _opt_equal(a: np.ndarray | None, b: np.ndarray | None) -> bool:
    if a is None or b is None:
        return a is None and b is None
    return np.array_equal(a, b)


@dataclass(frozen=True, eq=False)
class NormalizedScores:
    values: np.ndarray
    original_min: float
    original_max: float

    @property
    def spread(self) -> float:
        return self.original_max - self.original_min


def normalize_scores(raw: Sequence[float] | np.ndarray) -> NormalizedScores:
    """Min-max scaling onto [0, 1]; a constant input maps to all zeros."""
    x = np.asarray(raw, dtype=np.float64).ravel()
    if x.size == 0:
        raise ValueError("cannot normalise an empty score sequence")
    if not np.all(np.isfinite(x)):
        raise ValueError("scores contain NaN or infinity")
    lo, hi = float(x.min()), float(x.max())
    if hi > lo:
        values = (x - lo) / (hi - lo)
        np.clip(values, 0.0, 1.0, out=values)
    else:
        values = np.zeros_like(x)
    return NormalizedScores(values, lo, hi)


# ---------------------------------------------------------------- parsing


def parse_series(content: bytes | str, format: Format = "csv", name: str = "series") -> LabeledSeries:
    if isinstance(content, bytes):
        try:
            content = content.decode("utf-8-sig")
        except UnicodeDecodeError as exc:
            raise DataError(f"input is not valid UTF-8: {exc}") from None
    if format == "csv":
        return _parse_csv(content, name)
    if format == "ndjson":
        return _parse_ndjson(content, name)
    raise ValueError(f"unknown format {format!r} (expected csv or ndjson)")


def _parse_label(raw: Any, lineno: int, column: str = "label") -> int:
    if isinstance(raw, int) and not isinstance(raw, bool) and raw in (0, 1):
        return raw
    if isinstance(raw, str) and raw.strip() in ("0", "1"):
        return int(raw)
    raise DataError(f"{column} outside {{0,1}} at line {lineno}: {raw!r}")


def _parse_score(raw: Any, lineno: int) -> float:
    if isinstance(raw, bool):
        raise DataError(f"malformed score at line {lineno}: {raw!r}")
    try:
        value = float(raw)
    except (TypeError, ValueError):
        raise DataError(f"malformed score at line {lineno}: {raw!r}") from None
    if not math.isfinite(value):
        raise DataError(f"non-finite score at line {lineno}: {raw!r}")
    return value


def _parse_csv(text: str, name: str) -> LabeledSeries:
    # lines starting with '#' (e.g. the provenance line of synth output) are comments
    rows = (
        (lineno, row)
        for lineno, row in enumerate(csv.reader(io.StringIO(text, newline="")), start=1)
        if not (row and row[0].lstrip().startswith("#"))
    )
    try:
        header_line, header = next(rows)
    except StopIteration:
        raise DataError("empty input: header row required") from None
    header = [h.strip() for h in header]
    unknown = [h for h in header if h not in CSV_COLUMNS]
    if unknown:
        raise DataError(f"unknown column(s) {unknown} at line {header_line}; expected label, score, detection (t optional first)")
    if "label" not in header:
        raise DataError(f"missing required column 'label' at line {header_line}")
    if len(set(header)) != len(header):
        raise DataError(f"duplicate column names at line {header_line}")
    if "t" in header and header[0] != "t":
        raise DataError(f"the 't' column must come first (line {header_line})")

    col = {h: i for i, h in enumerate(header)}
    labels: list[int] = []
    scores: list[float] = []
    dets: list[int] = []
    for lineno, row in rows:
        if not row or all(not cell.strip() for cell in row):
            continue
        if len(row) != len(header):
            raise DataError(f"malformed row at line {lineno}: expected {len(header)} fields, got {len(row)}")
        if "t" in col:
            try:
                int(row[col["t"]])
            except ValueError:
                raise DataError(f"malformed t value at line {lineno}: {row[col['t']]!r}") from None
        labels.append(_parse_label(row[col["label"]], lineno))
        if "score" in col:
            cell = row[col["score"]].strip()
            if not cell:
                raise DataError(f"length mismatch: missing score at line {lineno}")
            scores.append(_parse_score(cell, lineno))
        if "detection" in col:
            dets.append(_parse_label(row[col["detection"]], lineno, "detection"))
    if not labels:
        raise DataError("no data rows")
    return LabeledSeries(
        np.array(labels, dtype=np.int8),
        np.array(scores, dtype=np.float64) if "score" in col else None,
        name,
        np.array(dets, dtype=np.int8) if "detection" in col else None,
    )


def _parse_ndjson(text: str, name: str) -> LabeledSeries:
    labels: list[int] = []
    scores: list[float] = []
    dets: list[int] = []
    has_score: bool | None = None
    has_det: bool | None = None
    for lineno, line in enumerate(text.splitlines(), start=1):
        if not line.strip():
            continue
        try:
            obj = json.loads(line)
        except json.JSONDecodeError as exc:
            raise DataError(f"malformed row at line {lineno}: {exc.msg}") from None
        if not isinstance(obj, dict) or "label" not in obj:
            raise DataError(f"malformed row at line {lineno}: expected an object with a 'label' key")
        unknown = set(obj) - set(CSV_COLUMNS)
        if unknown:
            raise DataError(f"unknown key(s) {sorted(unknown)} at line {lineno}")
        labels.append(_parse_label(obj["label"], lineno))
        row_score = "score" in obj and obj["score"] is not None
        row_det = "detection" in obj
        if has_score is None:
            has_score, has_det = row_score, row_det
        if row_score != has_score:
            raise DataError(f"length mismatch: score present on some rows but not at line {lineno}")
        if row_det != has_det:
            raise DataError(f"length mismatch: detection present on some rows but not at line {lineno}")
        if row_score:
            scores.append(_parse_score(obj["score"], lineno))
        if row_det:
            dets.append(_parse_label(obj["detection"], lineno, "detection"))
    if not labels:
        raise DataError("no data rows")
    return LabeledSeries(
        np.array(labels, dtype=np.int8),
        np.array(scores, dtype=np.float64) if has_score else None,
        name,
        np.array(dets, dtype=np.int8) if has_det else None,
    )


def format_series(series: LabeledSeries, format: Format = "csv") -> str:
    """Serialise a series so that ``parse_series`` reproduces it exactly."""
    n = series.T
    if format == "csv":
        header = ["label"]
        if series.scores is not None:
            header.append("score")
        if series.detections is not None:
            header.append("detection")
        lines = [",".join(header)]
        for i in range(n):
            row = [str(int(series.labels[i]))]
            if series.scores is not None:
                row.append(repr(float(series.scores[i])))
            if series.detections is not None:
                row.append(str(int(series.detections[i])))
            lines.append(",".join(row))
        return "\n".join(lines) + "\n"
    if format == "ndjson":
        lines = []
        for i in range(n):
            obj: dict[str, Any] = {"label": int(series.labels[i])}
            if series.scores is not None:
                obj["score"] = float(series.scores[i])
            if series.detections is not None:
                obj["detection"] = int(series.detections[i])
            lines.append(json.dumps(obj))
        return "\n".join(lines) + "\n"
    raise ValueError(f"unknown format {format!r}")


def read_series(path: str | Path, format: Format | None = None) -> LabeledSeries:
    path = Path(path)
    if format is None:
        format = "ndjson" if path.suffix.lower() in (".ndjson", ".jsonl") else "csv"
    return parse_series(path.read_bytes(), format, name=path.stem)


# ---------------------------------------------------------------- reports


@dataclass(frozen=True)
class EventEntry:
    index: int
    span: tuple[int, int]
    dqe_local: float
    cap: float
    nm: float
    fa: float


@dataclass(frozen=True)
class EvaluationReport:
    series: str
    T: int
    config: dict[str, Any]
    dqe: float
    components: dict[str, float]
    events: list[EventEntry]
    baselines: dict[str, float | None] = field(default_factory=dict)
    provenance: dict[str, Any] | None = None

    def to_dict(self) -> dict[str, Any]:
        out: dict[str, Any] = {
            "series": self.series,
            "T": self.T,
            "config": dict(self.config),
            "dqe": self.dqe,
            "components": {k: self.components[k] for k in ("cap", "nm", "fa")},
            "events": [
                {
                    "index": e.index,
                    "span": [e.span[0], e.span[1]],
                    "dqe_local": e.dqe_local,
                    "cap": e.cap,
                    "nm": e.nm,
                    "fa": e.fa,
                }
                for e in self.events
            ],
            "baselines": dict(self.baselines),
        }
        if self.provenance is not None:
            out["provenance"] = dict(self.provenance)
        return out

    @classmethod
    def from_dict(cls, data: dict[str, Any]) -> EvaluationReport:
        events = [
            EventEntry(
                int(e["index"]),
                (int(e["span"][0]), int(e["span"][1])),
                float(e["dqe_local"]),
                float(e["cap"]),
                float(e["nm"]),
                float(e["fa"]),
            )
            for e in data["events"]
        ]
        baselines = {k: (None if v is None else _num(v)) for k, v in data.get("baselines", {}).items()}
        return cls(
            series=data["series"],
            T=int(data["T"]),
            config=dict(data["config"]),
            dqe=float(data["dqe"]),
            components={k: float(v) for k, v in data["components"].items()},
            events=events,
            baselines=baselines,
            provenance=data.get("provenance"),
        )


def _num(v: Any) -> float | int:
    return v if isinstance(v, int) and not isinstance(v, bool) else float(v)


def _check_finite(obj: Any, path: str = "report") -> None:
    if isinstance(obj, float):
        if not math.isfinite(obj):
            raise ValueError(f"non-finite value at {path}")
    elif isinstance(obj, dict):
        for k, v in obj.items():
            _check_finite(v, f"{path}.{k}")
    elif isinstance(obj, (list, tuple)):
        for i, v in enumerate(obj):
            _check_finite(v, f"{path}[{i}]")


def _format_float(v: float) -> str:
    text = format(v, ".17g")
    if not any(c in text for c in ".en"):
        text += ".0"
    return text


def dumps_json(obj: Any, indent: int = 2, _level: int = 0) -> str:
    """JSON text with 17 significant digits per float and insertion key order."""
    pad = " " * (indent * (_level + 1))
    close = " " * (indent * _level)
    if isinstance(obj, bool) or obj is None or isinstance(obj, str):
        return json.dumps(obj, ensure_ascii=False)
    if isinstance(obj, (int, np.integer)):
        return str(int(obj))
    if isinstance(obj, (float, np.floating)):
        v = float(obj)
        if not math.isfinite(v):
            raise ValueError("non-finite float cannot be serialised")
        return _format_float(v)
    if isinstance(obj, dict):
        if not obj:
            return "{}"
        items = [f"{pad}{json.dumps(str(k))}: {dumps_json(v, indent, _level + 1)}" for k, v in obj.items()]
        return "{\n" + ",\n".join(items) + "\n" + close + "}"
    if isinstance(obj, (list, tuple)):
        if not obj:
            return "[]"
        if all(isinstance(v, (int, float, np.number)) and not isinstance(v, bool) for v in obj):
            return "[" + ", ".join(dumps_json(v, indent, _level + 1) for v in obj) + "]"
        items = [pad + dumps_json(v, indent, _level + 1) for v in obj]
        return "[\n" + ",\n".join(items) + "\n" + close + "]"
    raise TypeError(f"cannot serialise {type(obj).__name__}")


def write_report(report: EvaluationReport, path: str | Path) -> None:
    data = report.to_dict()
    _check_finite(data)
    text = dumps_json(data) + "\n"
    try:
        Path(path).write_text(text, encoding="utf-8")
    except OSError as exc:
        raise OSError(f"cannot write report to {path}: {exc.strerror}") from exc


def read_report(path: str | Path) -> EvaluationReport:
    return EvaluationReport.from_dict(json.loads(Path(path).read_text(encoding="utf-8")))
