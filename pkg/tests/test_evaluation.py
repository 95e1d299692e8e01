from __future__ import annotations

import json
import random

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from ocsrkit.corpus import ManifestEntry
from ocsrkit.errors import DuplicatePredictionError
from ocsrkit.evaluation import (
    GROUPS,
    TABLE_ORDER,
    emit_report,
    evaluate,
    group_of,
    read_predictions,
    read_report,
    score_pair,
    write_predictions,
)
from ocsrkit.molgraph import strip_stereo
from ocsrkit.smiles import parse, write


def manifest_from(pool: list[str], dataset: str, n: int, offset: int = 0) -> list[ManifestEntry]:
    return [ManifestEntry(f"{dataset}/{i}.png", s, dataset, id=f"{dataset}-{i}")
            for i, s in enumerate(pool[offset : offset + n])]


# --------------------------------------------------------------------------
# pair scoring


@pytest.mark.parametrize(
    "pred,ref,exact,achiral,valid",
    [
        ("OCC", "CCO", True, True, True),
        ("C1=CC=CC=C1", "c1ccccc1", True, True, True),
        ("C[C@@H](O)N", "C[C@H](O)N", False, True, True),
        ("C[C@H](O)N", "C[C@H](O)N", True, True, True),
        ("CC(O)N", "C[C@H](O)N", False, True, True),
        ("F/C=C/F", "F/C=C\\F", False, True, True),
        ("CCN", "CCO", False, False, True),
        ("C1CC", "CCO", False, False, False),
        ("", "CCO", False, False, False),
        ("not smiles", "CCO", False, False, False),
    ],
)
def test_score_pair_examples(pred, ref, exact, achiral, valid):
    s = score_pair(pred, ref)
    assert (s.exact, s.achiral, s.valid) == (exact, achiral, valid)


def test_score_pair_rejects_bad_reference():
    with pytest.raises(ValueError):
        score_pair("CCO", "C1CC")


def test_group_assignment():
    assert [g for g, _ in GROUPS] == ["Synthetic", "Realistic", "Perturbed"]
    assert group_of("CLEF") == "Synthetic"
    assert group_of("ACS") == "Realistic"
    assert group_of("Staker_p") == "Perturbed"
    assert group_of("JPO") == "Other"
    assert len(TABLE_ORDER) == 11


# --------------------------------------------------------------------------
# aggregate metrics


def test_self_predictions_score_100(pool):
    manifest = manifest_from(pool, "UOB", 60) + manifest_from(pool, "CLEF", 60, 60)
    report = evaluate(manifest, [(e.key, e.smiles) for e in manifest])
    for d in report.datasets:
        assert d.exact_match_pct == d.achiral_match_pct == d.validity_pct == 100.0


def test_renumbered_predictions_score_100(pool):
    rng = random.Random(3)
    manifest = manifest_from(pool, "USPTO", 80)
    preds = []
    for e in manifest:
        m = parse(e.smiles)
        perm = list(range(len(m.atoms)))
        rng.shuffle(perm)
        preds.append((e.key, write(m.permuted(perm))))
    assert evaluate(manifest, preds)["USPTO"].exact_match_pct == 100.0


def test_stereo_stripped_predictions():
    entries = [ManifestEntry(f"{i}.png", "C[C@H](N)O" if i < 324 else "CCO", "CLEF", id=str(i))
               for i in range(992)]
    preds = [(e.key, write(strip_stereo(parse(e.smiles)))) for e in entries]
    d = evaluate(entries, preds)["CLEF"]
    assert d.achiral_match_pct == 100.0
    assert d.exact_match_pct == pytest.approx(67.3, abs=0.1)


def test_missing_and_unexpected_ids():
    manifest = [ManifestEntry("a", "CCO", "UOB", id="a"), ManifestEntry("b", "CCN", "UOB", id="b")]
    report = evaluate(manifest, [("a", "OCC"), ("zz", "C")])
    d = report["UOB"]
    assert (d.n, d.exact, d.missing, d.parse_failures) == (2, 1, 1, 0)
    assert d.exact_match_pct == 50.0
    assert report.unexpected_ids == ("zz",)


def test_invalid_predictions_stay_in_denominator():
    manifest = [ManifestEntry(str(i), "CCO", "UOB") for i in range(4)]
    d = evaluate(manifest, [("0", "CCO"), ("1", "C1CC"), ("2", "xx"), ("3", "CCO")])["UOB"]
    assert d.exact_match_pct == 50.0 and d.validity_pct == 50.0 and d.parse_failures == 2


def test_duplicate_prediction_ids():
    manifest = [ManifestEntry("a", "CCO", "UOB")]
    with pytest.raises(DuplicatePredictionError):
        evaluate(manifest, [("a", "CCO"), ("a", "CCO")])


def test_duplicate_manifest_ids():
    manifest = [ManifestEntry("a", "CCO", "UOB"), ManifestEntry("a", "CCN", "UOB")]
    with pytest.raises(ValueError):
        evaluate(manifest, [])


def _random_predictions(manifest, seed):
    rng = random.Random(seed)
    out = []
    for e in manifest:
        r = rng.random()
        if r < 0.4:
            out.append((e.key, e.smiles))
        elif r < 0.6:
            out.append((e.key, write(strip_stereo(parse(e.smiles)))))
        elif r < 0.8:
            out.append((e.key, rng.choice(manifest).smiles))
        elif r < 0.95:
            out.append((e.key, e.smiles[: rng.randrange(len(e.smiles) + 1)]))
    return out


@settings(max_examples=20)
@given(seed=st.integers(0, 10_000))
def test_exact_implies_achiral_implies_valid(pool, seed):
    manifest = manifest_from(pool, "Staker", 40, seed % 500)
    preds = _random_predictions(manifest, seed)
    d = evaluate(manifest, preds)["Staker"]
    assert d.exact <= d.achiral <= d.valid <= d.n


@settings(max_examples=15)
@given(seed=st.integers(0, 10_000))
def test_rows_independent_of_prediction_order(pool, seed):
    manifest = manifest_from(pool, "UOB", 25) + manifest_from(pool, "ACS", 25, 25)
    preds = _random_predictions(manifest, seed)
    shuffled = preds[:]
    random.Random(seed).shuffle(shuffled)
    assert evaluate(manifest, preds) == evaluate(manifest, shuffled)


def test_workers_match_serial(pool):
    manifest = manifest_from(pool, "UOB", 60)
    preds = _random_predictions(manifest, 1)
    assert evaluate(manifest, preds, workers=2) == evaluate(manifest, preds)


# --------------------------------------------------------------------------
# reports


def _report(pool):
    manifest = manifest_from(pool, "UOB", 10) + manifest_from(pool, "CLEF_p", 10, 10) + manifest_from(pool, "JPO", 5, 20)
    return evaluate(manifest, _random_predictions(manifest, 7))


def test_markdown_layout(pool):
    text = emit_report(_report(pool), "markdown")
    lines = text.splitlines()
    header = [c.strip() for c in lines[0].strip("|").split("|")]
    assert header == ["Metric", *TABLE_ORDER, "JPO"]
    assert lines[2].startswith("| Group | Synthetic | Synthetic | Synthetic | Realistic")
    assert "| Exact match (%) |" in text and "| Achiral match (%) |" in text
    exact_row = next(l for l in lines if l.startswith("| Exact match"))
    cells = [c.strip() for c in exact_row.strip("|").split("|")][1:]
    assert cells[TABLE_ORDER.index("Indigo")] == "--"
    assert cells[TABLE_ORDER.index("UOB")] != "--"


def test_markdown_empty_report_is_header_only():
    text = emit_report(evaluate([], []), "markdown")
    lines = text.splitlines()
    assert len(lines) == 2
    assert len(lines[0].strip("|").split("|")) == 12


def test_json_round_trip(pool):
    report = _report(pool)
    assert read_report(emit_report(report, "json")) == report
    doc = json.loads(emit_report(report, "json"))
    assert doc["datasets"][0]["group"] == "Realistic"


def test_csv(pool):
    rows = emit_report(_report(pool), "csv").splitlines()
    assert rows[0].startswith("dataset,group,n,exact_match_pct")
    assert [r.split(",")[0] for r in rows[1:]] == ["UOB", "CLEF_p", "JPO"]


def test_unknown_format(pool):
    with pytest.raises(ValueError):
        emit_report(_report(pool), "html")


def test_prediction_file_formats(tmp_path):
    rows = [("a", "CCO"), ("b", ""), ("c", "C[C@H](N)O")]
    jl = tmp_path / "p.jsonl"
    write_predictions(rows, jl)
    assert read_predictions(jl) == rows
    tsv = tmp_path / "p.tsv"
    tsv.write_text("a\tCCO\nb\nc\tC[C@H](N)O\n")
    assert read_predictions(tsv) == rows
    bad = tmp_path / "bad.jsonl"
    bad.write_text('{"id": "a"}\n{"smiles": "C"}\n')
    with pytest.raises(ValueError):
        read_predictions(bad)
