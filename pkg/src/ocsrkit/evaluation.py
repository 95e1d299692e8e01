"""Exact-match scoring of prediction files against benchmark manifests.

Every prediction is scored two ways: stereo-sensitive exact match and
achiral match with tetrahedral and cis/trans information discarded. Both
are always reported together. Invalid and missing predictions stay in the
denominator as mismatches, so each dataset's percentages are over all of
its manifest entries.
"""

from __future__ import annotations

import csv
import io
import json
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass
from functools import lru_cache
from pathlib import Path
from typing import Iterable, Mapping, Sequence

from ._rounding import pct
from .corpus import ManifestEntry
from .errors import DuplicatePredictionError, OcsrError
from .smiles import canonical_forms

REPORT_SCHEMA_VERSION = 1
GROUPS: tuple[tuple[str, tuple[str, ...]], ...] = (
    ("Synthetic", ("Indigo", "ChemDraw", "CLEF")),
    ("Realistic", ("UOB", "USPTO", "Staker", "ACS")),
    ("Perturbed", ("CLEF_p", "UOB_p", "USPTO_p", "Staker_p")),
)
TABLE_ORDER: tuple[str, ...] = tuple(name for _, names in GROUPS for name in names)
OTHER_GROUP = "Other"
_GROUP_OF = {name: group for group, names in GROUPS for name in names}


def group_of(dataset: str) -> str:
    return _GROUP_OF.get(dataset, OTHER_GROUP)


# --------------------------------------------------------------------------
# pair scoring


@dataclass(frozen=True)
class PairScore:
    exact: bool
    achiral: bool
    valid: bool


@lru_cache(maxsize=65536)
def cached_forms(smiles: str) -> tuple[str, str] | None:
    """(canonical, achiral canonical), or None when ``smiles`` does not parse."""
    try:
        return canonical_forms(smiles)
    except OcsrError:
        return None


def score_pair(pred: str, ref: str) -> PairScore:
    """Score one prediction. ``ref`` must parse; ``pred`` may be any text."""
    want = cached_forms(ref)
    if want is None:
        raise ValueError(f"reference SMILES does not parse: {ref!r}")
    got = cached_forms(pred)
    if got is None:
        return PairScore(False, False, False)
    return PairScore(got[0] == want[0], got[1] == want[1], True)


def _score_job(pair: tuple[str | None, str]) -> tuple[bool, bool, bool]:
    pred, ref = pair
    if pred is None:
        if cached_forms(ref) is None:
            raise ValueError(f"reference SMILES does not parse: {ref!r}")
        return False, False, False
    s = score_pair(pred, ref)
    return s.exact, s.achiral, s.valid


# --------------------------------------------------------------------------
# prediction files


def read_predictions(path: str | Path) -> list[tuple[str, str]]:
    """Load ``(id, smiles)`` rows from JSONL or two-column TSV, detected by content.

    A file whose first non-blank character is ``{`` is JSONL with ``id`` and
    ``smiles`` keys; anything else is tab-separated id and SMILES, where a
    missing second column means an empty prediction.
    """
    text = Path(path).read_text(encoding="utf-8")
    rows: list[tuple[str, str]] = []
    if text.lstrip().startswith("{"):
        for lineno, line in enumerate(text.splitlines(), 1):
            if not line.strip():
                continue
            try:
                doc = json.loads(line)
                rows.append((str(doc["id"]), str(doc.get("smiles") or "")))
            except (json.JSONDecodeError, KeyError) as exc:
                raise ValueError(f"{path}:{lineno}: expected a JSON object with 'id' and 'smiles' ({exc})") from None
    else:
        for line in text.splitlines():
            if not line.strip():
                continue
            ident, _, smiles = line.rstrip("\r").partition("\t")
            rows.append((ident, smiles.strip()))
    return rows


def write_predictions(rows: Iterable[tuple[str, str]], path: str | Path) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        for ident, smiles in rows:
            fh.write(json.dumps({"id": ident, "smiles": smiles}, ensure_ascii=False) + "\n")


# --------------------------------------------------------------------------
# reports


@dataclass(frozen=True)
class DatasetResult:
    name: str
    n: int
    exact: int
    achiral: int
    valid: int
    parse_failures: int
    missing: int

    @property
    def group(self) -> str:
        return group_of(self.name)

    @property
    def exact_match_pct(self) -> float:
        return pct(self.exact, self.n)

    @property
    def achiral_match_pct(self) -> float:
        return pct(self.achiral, self.n)

    @property
    def validity_pct(self) -> float:
        return pct(self.valid, self.n)

    def to_dict(self) -> dict:
        return asdict(self) | {
            "group": self.group,
            "exact_match_pct": self.exact_match_pct,
            "achiral_match_pct": self.achiral_match_pct,
            "validity_pct": self.validity_pct,
        }


@dataclass(frozen=True)
class EvalReport:
    """Per-dataset results. ``unexpected_ids`` lists predictions with no manifest entry."""

    datasets: tuple[DatasetResult, ...]
    unexpected_ids: tuple[str, ...] = ()

    def __getitem__(self, name: str) -> DatasetResult:
        for d in self.datasets:
            if d.name == name:
                return d
        raise KeyError(name)

    def names(self) -> list[str]:
        return [d.name for d in self.datasets]


def _ordered(names: Iterable[str]) -> list[str]:
    names = set(names)
    return [n for n in TABLE_ORDER if n in names] + sorted(n for n in names if n not in _GROUP_OF)


def evaluate(
    manifest: Sequence[ManifestEntry],
    preds: Iterable[tuple[str, str]] | Mapping[str, str],
    workers: int = 1,
) -> EvalReport:
    """Aggregate :func:`score_pair` over every manifest entry, per dataset.

    Raises :class:`DuplicatePredictionError` when an id occurs twice in
    ``preds``. Result rows are independent of prediction order.
    """
    rows = preds.items() if isinstance(preds, Mapping) else preds
    by_id: dict[str, str] = {}
    for ident, smiles in rows:
        if ident in by_id:
            raise DuplicatePredictionError(f"prediction id {ident!r} occurs more than once")
        by_id[ident] = smiles
    keys = [e.key for e in manifest]
    if len(set(keys)) != len(keys):
        raise ValueError("manifest ids are not unique")
    jobs = [(by_id.get(e.key), e.smiles) for e in manifest]
    if workers > 1 and len(jobs) > 1:
        with ProcessPoolExecutor(workers) as pool:
            scores = list(pool.map(_score_job, jobs, chunksize=max(1, len(jobs) // (8 * workers))))
    else:
        scores = [_score_job(j) for j in jobs]

    tally: dict[str, list[int]] = {}
    for e, (pred, _), (exact, achiral, valid) in zip(manifest, jobs, scores):
        t = tally.setdefault(e.dataset_name, [0, 0, 0, 0, 0, 0])
        t[0] += 1
        t[1] += exact
        t[2] += achiral
        t[3] += valid
        t[4] += pred is not None and not valid
        t[5] += pred is None
    known = set(keys)
    unexpected = tuple(sorted(i for i in by_id if i not in known))
    return EvalReport(tuple(DatasetResult(name, *tally[name]) for name in _ordered(tally)), unexpected)


def _fmt(x: float) -> str:
    return f"{x:.1f}"


def emit_report(report: EvalReport, fmt: str = "markdown") -> str:
    """Render a report as a markdown table, CSV or JSON.

    The markdown table has one column per dataset in the fixed benchmark
    order (Synthetic, then Realistic, then Perturbed, then anything else),
    with ``--`` for datasets the report does not cover. An empty report
    gives the header only.
    """
    if fmt == "json":
        doc = {
            "schema_version": REPORT_SCHEMA_VERSION,
            "datasets": [d.to_dict() for d in report.datasets],
            "unexpected_ids": list(report.unexpected_ids),
        }
        return json.dumps(doc, indent=2) + "\n"
    if fmt == "csv":
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["dataset", "group", "n", "exact_match_pct", "achiral_match_pct", "validity_pct",
                    "parse_failures", "missing"])
        for d in report.datasets:
            w.writerow([d.name, d.group, d.n, _fmt(d.exact_match_pct), _fmt(d.achiral_match_pct),
                        _fmt(d.validity_pct), d.parse_failures, d.missing])
        return buf.getvalue()
    if fmt != "markdown":
        raise ValueError(f"unknown report format {fmt!r}; expected markdown, csv or json")

    present = {d.name: d for d in report.datasets}
    columns = list(TABLE_ORDER) + [n for n in _ordered(present) if n not in _GROUP_OF]
    lines = [
        "| Metric | " + " | ".join(columns) + " |",
        "|---|" + "---:|" * len(columns),
    ]
    if not present:
        return "\n".join(lines) + "\n"

    def row(label: str, cell) -> str:
        return f"| {label} | " + " | ".join(cell(present[c]) if c in present else "--" for c in columns) + " |"

    lines.append("| Group | " + " | ".join(group_of(c) for c in columns) + " |")
    lines.append(row("Exact match (%)", lambda d: _fmt(d.exact_match_pct)))
    lines.append(row("Achiral match (%)", lambda d: _fmt(d.achiral_match_pct)))
    lines.append(row("Valid SMILES (%)", lambda d: _fmt(d.validity_pct)))
    lines.append(row("Images", lambda d: str(d.n)))
    lines.append(row("Parse failures", lambda d: str(d.parse_failures)))
    lines.append(row("Missing predictions", lambda d: str(d.missing)))
    return "\n".join(lines) + "\n"


def read_report(text: str) -> EvalReport:
    """Inverse of ``emit_report(report, "json")``."""
    doc = json.loads(text)
    fields = ("name", "n", "exact", "achiral", "valid", "parse_failures", "missing")
    datasets = tuple(DatasetResult(**{k: d[k] for k in fields}) for d in doc["datasets"])
    return EvalReport(datasets, tuple(doc.get("unexpected_ids", ())))


__all__ = [
    "cached_forms",
    "DatasetResult",
    "EvalReport",
    "GROUPS",
    "PairScore",
    "TABLE_ORDER",
    "emit_report",
    "evaluate",
    "group_of",
    "read_predictions",
    "read_report",
    "score_pair",
    "write_predictions",
]
