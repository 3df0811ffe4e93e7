"""On-disk formats: annotated corpora, parallel text, rankings, reports.

The annotation format is line-oriented UTF-8 (a leading BOM is stripped):

    S <token> <token> ...
    A <start> <end>|||<type>|||<correction>|||<required>|||<comment>|||<annotator>

A unit starts at an ``S`` line, collects ``A`` lines, and ends at a blank
line or end of input. Edits are grouped per annotator. The correction
``-NONE-`` with type ``noop`` marks an annotator who made no edits and
yields an empty annotation set; a unit with no ``A`` lines at all gets a
single empty annotation set for annotator 0.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from pathlib import Path
from typing import Any, Iterable, Mapping, Sequence

from .corpus import AnnotatedSource, AnnotationSet, Edit, ReferenceSet, Sentence, tokenize
from .errors import ParseError, ValidationError

__all__ = [
    "parse_m2",
    "serialize_m2",
    "read_m2_file",
    "read_parallel_text",
    "read_reference_files",
    "HumanRanking",
    "parse_human_ranking",
    "read_human_ranking",
    "build_report",
    "render_report",
    "write_report",
]

_NOOP_TYPE = "noop"
_NONE_FIELD = "-NONE-"


def _parse_a_line(line: str, lineno: int) -> tuple[int, int, str, str, str, str, int]:
    body = line[2:]
    parts = body.split("|||")
    if len(parts) != 6:
        raise ParseError(
            f"expected 6 |||-separated fields in annotation, got {len(parts)}", lineno
        )
    span_field, category, correction, required, comment, annot_field = parts
    span = span_field.split()
    if len(span) != 2:
        raise ParseError(f"bad span field {span_field!r}", lineno)
    try:
        start, end = int(span[0]), int(span[1])
    except ValueError:
        raise ParseError(f"non-integer span {span_field!r}", lineno) from None
    try:
        annotator = int(annot_field)
    except ValueError:
        raise ParseError(f"non-integer annotator id {annot_field!r}", lineno) from None
    return start, end, category, correction, required, comment, annotator


class _UnitBuilder:
    def __init__(self, tokens: Sequence[str], lineno: int):
        self.tokens = tuple(tokens)
        self.lineno = lineno
        self.edits: dict[int, list[Edit]] = {}
        self.noop: set[int] = set()

    def add(self, line: str, lineno: int) -> None:
        start, end, category, correction, required, comment, annotator = _parse_a_line(
            line, lineno
        )
        if category == _NOOP_TYPE and correction == _NONE_FIELD:
            if annotator in self.edits:
                raise ParseError(
                    f"annotator {annotator} has both noop and edits", lineno
                )
            self.noop.add(annotator)
            return
        if annotator in self.noop:
            raise ParseError(f"annotator {annotator} has both noop and edits", lineno)
        try:
            edit = Edit(
                start,
                end,
                tuple(correction.split()),
                category=category,
                annotator=annotator,
                required_flag=required,
                comment=comment,
            )
        except ValidationError as exc:
            raise ParseError(str(exc), lineno) from exc
        self.edits.setdefault(annotator, []).append(edit)

    def finish(self) -> AnnotatedSource:
        ids = sorted(set(self.edits) | self.noop) or [0]
        sets = []
        try:
            for annotator in ids:
                edits = sorted(
                    self.edits.get(annotator, ()), key=lambda e: (e.start, e.end)
                )
                sets.append(AnnotationSet(annotator, tuple(edits)))
            return AnnotatedSource(Sentence(self.tokens), tuple(sets))
        except ValidationError as exc:
            raise ParseError(f"in unit starting here: {exc}", self.lineno) from exc


def parse_m2(text: str | Iterable[str]) -> list[AnnotatedSource]:
    """Parse annotated-corpus text into a list of annotated sources."""
    if isinstance(text, str):
        lines: Iterable[str] = text.splitlines()
    else:
        lines = (line.rstrip("\n") for line in text)
    units: list[AnnotatedSource] = []
    current: _UnitBuilder | None = None
    for lineno, raw in enumerate(lines, 1):
        line = raw.lstrip("﻿") if lineno == 1 else raw
        if not line.strip():
            if current is not None:
                units.append(current.finish())
                current = None
            continue
        if line == "S" or line.startswith("S "):
            if current is not None:
                units.append(current.finish())
            current = _UnitBuilder(line[2:].split(), lineno)
        elif line.startswith("A "):
            if current is None:
                raise ParseError("annotation line before any source line", lineno)
            current.add(line, lineno)
        else:
            raise ParseError(f"unrecognized line {line!r}", lineno)
    if current is not None:
        units.append(current.finish())
    return units


def serialize_m2(units: Iterable[AnnotatedSource]) -> str:
    """Inverse of :func:`parse_m2`; parsing the result round-trips."""
    blocks: list[str] = []
    for unit in units:
        lines = [("S " + unit.source.text).rstrip()]
        for aset in sorted(unit.annotations, key=lambda a: a.annotator):
            if not aset.edits:
                lines.append(
                    f"A -1 -1|||{_NOOP_TYPE}|||{_NONE_FIELD}|||REQUIRED|||"
                    f"{_NONE_FIELD}|||{aset.annotator}"
                )
                continue
            for edit in aset.edits:
                lines.append(
                    f"A {edit.start} {edit.end}|||{edit.category}|||"
                    f"{' '.join(edit.replacement)}|||{edit.required_flag}|||"
                    f"{edit.comment}|||{aset.annotator}"
                )
        blocks.append("\n".join(lines))
    return "\n\n".join(blocks) + "\n" if blocks else ""


def read_m2_file(path: str | Path) -> list[AnnotatedSource]:
    with open(path, encoding="utf-8-sig") as handle:
        return parse_m2(line.rstrip("\n") for line in handle)


def read_parallel_text(path: str | Path) -> list[Sentence]:
    """Read one sentence per line; blank lines become empty sentences."""
    with open(path, encoding="utf-8-sig") as handle:
        return [tokenize(line) for line in handle.read().splitlines()]


def read_reference_files(paths: Sequence[str | Path]) -> ReferenceSet:
    """Combine parallel reference files into a reference set.

    Each file contributes one reference per sentence; all files must have
    the same number of lines.
    """
    if not paths:
        raise ValidationError("at least one reference file is required")
    columns = [read_parallel_text(p) for p in paths]
    length = len(columns[0])
    for path, col in zip(paths, columns):
        if len(col) != length:
            raise ValidationError(
                f"reference file {path} has {len(col)} sentences, expected {length}"
            )
    rows = tuple(tuple(col[i] for col in columns) for i in range(length))
    return ReferenceSet(rows)


@dataclass(frozen=True)
class HumanRanking:
    """System-level human judgments: higher score means better."""

    scores: dict[str, float]

    def __post_init__(self):
        for system_id, value in self.scores.items():
            if not isinstance(value, float):
                object.__setattr__(
                    self, "scores", {k: float(v) for k, v in self.scores.items()}
                )
                break
            if not system_id:
                raise ValidationError("system id must be non-empty")

    @property
    def systems(self) -> tuple[str, ...]:
        return tuple(self.scores)

    def __len__(self) -> int:
        return len(self.scores)

    def score_for(self, system_id: str) -> float:
        if system_id not in self.scores:
            raise ValidationError(f"no human score for system {system_id!r}")
        return self.scores[system_id]


def parse_human_ranking(text: str) -> HumanRanking:
    """Parse tab-separated ``system<TAB>score`` lines."""
    scores: dict[str, float] = {}
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.strip()
        if not line:
            continue
        parts = line.split("\t")
        if len(parts) != 2:
            raise ParseError(
                f"expected two tab-separated columns, got {len(parts)}", lineno
            )
        system_id, score_field = parts[0].strip(), parts[1].strip()
        if system_id in scores:
            raise ParseError(f"duplicate system id {system_id!r}", lineno)
        try:
            scores[system_id] = float(score_field)
        except ValueError:
            raise ParseError(f"non-numeric score {score_field!r}", lineno) from None
    return HumanRanking(scores)


def read_human_ranking(path: str | Path) -> HumanRanking:
    with open(path, encoding="utf-8-sig") as handle:
        return parse_human_ranking(handle.read())


def _round_floats(value: Any, sig_digits: int | None) -> Any:
    if isinstance(value, dict):
        return {k: _round_floats(v, sig_digits) for k, v in value.items()}
    if isinstance(value, (list, tuple)):
        return [_round_floats(v, sig_digits) for v in value]
    if type(value) is float and sig_digits is not None:
        if value != value or value in (float("inf"), float("-inf")):
            return value
        return float(f"{value:.{sig_digits}g}")
    return value


def build_report(
    systems: Iterable[Mapping[str, Any]] = (),
    correlations: Iterable[Mapping[str, Any]] = (),
    sweep: Mapping[str, Any] | None = None,
    *,
    rankings: Iterable[Mapping[str, Any]] | None = None,
    ablation: Iterable[Mapping[str, Any]] | None = None,
    detections: Iterable[Mapping[str, Any]] | None = None,
    sig_digits: int | None = 6,
) -> dict[str, Any]:
    """Assemble the report document with a fixed key order.

    Keys appear in the order ``format_version``, ``systems``,
    ``correlations``, ``sweep``; optional sections follow in the order
    ``rankings``, ``ablation``, ``detections`` and are omitted when absent.
    Real numbers are rendered with ``sig_digits`` significant digits
    (``None`` keeps full precision).
    """
    doc: dict[str, Any] = {
        "format_version": 1,
        "systems": [dict(entry) for entry in systems],
        "correlations": [dict(entry) for entry in correlations],
        "sweep": dict(sweep) if sweep is not None else None,
    }
    if rankings is not None:
        doc["rankings"] = [dict(entry) for entry in rankings]
    if ablation is not None:
        doc["ablation"] = [dict(entry) for entry in ablation]
    if detections is not None:
        doc["detections"] = [dict(entry) for entry in detections]
    return _round_floats(doc, sig_digits)


def render_report(doc: Mapping[str, Any]) -> str:
    return json.dumps(doc, indent=2, ensure_ascii=False) + "\n"


def write_report(path: str | Path, doc: Mapping[str, Any]) -> None:
    """Write a report document as UTF-8 JSON with a fixed layout.

    Identical documents always produce byte-identical files.
    """
    with open(path, "w", encoding="utf-8", newline="\n") as handle:
        handle.write(render_report(doc))
