"""Executes the worked examples embedded in the markdown docs.

A worked example is a marker comment followed by a ``csv`` block (the input
file) and a ``json`` block (a fragment the report must contain)::

    <!-- dqe-example: name=perfect args="--l-nm 5 --mode binary" -->
"""

from __future__ import annotations

import contextlib
import io
import json
import math
import re
import shlex
import tempfile
from dataclasses import dataclass
from pathlib import Path
from typing import Any

MARKER = re.compile(r"<!--\s*dqe-example:\s*name=(?P<name>\S+)\s+args=\"(?P<args>[^\"]*)\"\s*-->")
FENCE = re.compile(r"```(?P<lang>\w+)\n(?P<body>.*?)```", re.S)
TOLERANCE = 1e-12


@dataclass(frozen=True)
class WorkedExample:
    name: str
    args: list[str]
    inputs: str
    expected: dict[str, Any]
    source: str


@dataclass(frozen=True)
class CheckResult:
    name: str
    ok: bool
    message: str = ""


def collect_examples(text: str, source: str = "<doc>") -> list[WorkedExample]:
    out = []
    for m in MARKER.finditer(text):
        blocks = FENCE.finditer(text, m.end())
        csv_block = next(blocks, None)
        json_block = next(blocks, None)
        if csv_block is None or json_block is None or csv_block.group("lang") != "csv" or json_block.group("lang") != "json":
            raise ValueError(f"{source}: example {m.group('name')} needs a csv block followed by a json block")
        out.append(
            WorkedExample(
                m.group("name"),
                shlex.split(m.group("args")),
                csv_block.group("body"),
                json.loads(json_block.group("body")),
                source,
            )
        )
    return out


def _mismatch(expected: Any, actual: Any, path: str) -> str | None:
    """First field where ``expected`` is not contained in ``actual``."""
    if isinstance(expected, dict):
        if not isinstance(actual, dict):
            return f"{path}: expected an object"
        for k, v in expected.items():
            if k not in actual:
                return f"{path}.{k}: missing"
            found = _mismatch(v, actual[k], f"{path}.{k}")
            if found:
                return found
        return None
    if isinstance(expected, list):
        if not isinstance(actual, list) or len(actual) < len(expected):
            return f"{path}: expected a list of at least {len(expected)} items"
        for i, v in enumerate(expected):
            found = _mismatch(v, actual[i], f"{path}[{i}]")
            if found:
                return found
        return None
    if isinstance(expected, float) or isinstance(actual, float):
        if not isinstance(actual, (int, float)) or not math.isclose(expected, actual, rel_tol=0, abs_tol=TOLERANCE):
            return f"{path}: expected {expected!r}, got {actual!r}"
        return None
    if expected != actual:
        return f"{path}: expected {expected!r}, got {actual!r}"
    return None


def run_example(example: WorkedExample) -> CheckResult:
    from .cli import main

    with tempfile.TemporaryDirectory() as tmp:
        src = Path(tmp) / f"{example.name}.csv"
        dst = Path(tmp) / "report.json"
        src.write_text(example.inputs, encoding="utf-8")
        sink = io.StringIO()
        with contextlib.redirect_stdout(sink), contextlib.redirect_stderr(sink):
            code = main(["eval", "--input", str(src), "--output", str(dst), *example.args])
        if code != 0:
            return CheckResult(example.name, False, f"eval exited with {code}: {sink.getvalue().strip()}")
        report = json.loads(dst.read_text(encoding="utf-8"))
    problem = _mismatch(example.expected, report, "report")
    return CheckResult(example.name, problem is None, problem or "")


def doc_examples_check(docs_dir: Path) -> list[CheckResult]:
    results = []
    for path in sorted(Path(docs_dir).glob("*.md")):
        for example in collect_examples(path.read_text(encoding="utf-8"), str(path)):
            results.append(run_example(example))
    return results
