from __future__ import annotations

import json
from pathlib import Path

import numpy as np
import pytest

from ocsrkit.corpus import (
    FULL_SFT_BUDGET,
    PROMPT,
    SOURCES,
    Budgets,
    ManifestEntry,
    Source,
    Stage,
    build_corpus,
    emit_training_config,
    manifest_stats,
    read_corpus,
    read_manifest,
    read_pool,
    write_manifest,
)
from ocsrkit.depict import RasterImage, StyleProfile
from ocsrkit.errors import InsufficientPoolError
from ocsrkit.smiles import canonical_smiles, parse

SMALL_STYLES = (StyleProfile.molscribe_like(canvas=256), StyleProfile.chemdraw_like(canvas=256))


def make_realistic(root: Path, smiles: list[str], dataset: str = "USPTO") -> list[ManifestEntry]:
    root.mkdir(parents=True, exist_ok=True)
    rng = np.random.default_rng(0)
    entries = []
    for i, s in enumerate(smiles):
        name = f"real_{i:03d}.png"
        RasterImage(rng.integers(0, 256, (32, 32), dtype=np.uint8)).save(root / name)
        entries.append(ManifestEntry(name, s, dataset))
    return entries


def build(tmp_path: Path, pool, budgets, name="out", seed=0, realistic=None, **kw):
    root = tmp_path / "real"
    real = realistic if realistic is not None else make_realistic(root, ["CCO", "c1ccccc1", "C[C@@H](C(=O)O)N"])
    return build_corpus(pool, real, budgets, tmp_path / name, styles=SMALL_STYLES, seed=seed,
                        realistic_root=root, **kw)


def test_empty_budgets(tmp_path):
    b = build(tmp_path, ["CCO"], Budgets(0, 0, 0))
    assert b.records == []
    assert b.manifest_path.read_text() == ""
    report = json.loads(b.report_path.read_text())
    assert report["total"] == 0 and report["chiral_pct"] == 0.0
    assert report["counts"] == {s.value: 0 for s in SOURCES}


def test_small_build_is_reproducible(tmp_path):
    pool = ["CCO", "CC(=O)O", "c1ccccc1", "C[C@H](N)C(=O)O", "CCN(CC)CC", "OC1CCCCC1"]
    a = build(tmp_path, pool, Budgets(2, 2, 2), name="a", seed=4)
    b = build(tmp_path, pool, Budgets(2, 2, 2), name="b", seed=4)
    assert a.report["digests"] == b.report["digests"]
    assert a.manifest_path.read_bytes() == b.manifest_path.read_bytes()
    for r in a.records:
        assert (tmp_path / "a" / r.image_path).read_bytes() == (tmp_path / "b" / r.image_path).read_bytes()
    c = build(tmp_path, pool, Budgets(2, 2, 2), name="c", seed=5)
    assert c.report["digests"]["manifest_sha256"] != a.report["digests"]["manifest_sha256"]


def test_records_are_well_formed(tmp_path):
    pool = ["CCO", "CC(=O)O", "c1ccccc1", "C[C@H](N)C(=O)O", "CCN(CC)CC", "OC1CCCCC1"]
    b = build(tmp_path, pool, Budgets(3, 2, 1), stage=Stage.LoRA)
    assert [r.source for r in b.records] == [Source.PubChemMolScribeStyle] * 3 + [
        Source.PubChemChemDrawStyle] * 2 + [Source.UsptoMol]
    assert {r.prompt for r in b.records} == {PROMPT}
    assert {r.stage for r in b.records} == {Stage.LoRA}
    assert len({r.id for r in b.records}) == len(b.records)
    for r in b.records:
        assert canonical_smiles(parse(r.response)) == r.response
        assert (tmp_path / "out" / r.image_path).is_file()
    assert read_corpus(b.manifest_path) == b.records
    report = json.loads(b.report_path.read_text())
    assert report["counts"] == {Source.PubChemMolScribeStyle.value: 3, Source.PubChemChemDrawStyle.value: 2,
                                Source.UsptoMol.value: 1}
    assert report["stage"] == "LoRA" and report["prompt"] == PROMPT


def test_synthetic_sources_are_disjoint(tmp_path):
    pool = [f"C{'C' * i}O" for i in range(12)]
    b = build(tmp_path, pool, Budgets(6, 6, 0))
    responses = [r.response for r in b.records]
    assert len(set(responses)) == 12


def test_pool_exhaustion(tmp_path):
    with pytest.raises(InsufficientPoolError):
        build(tmp_path, ["CCO", "CCN"], Budgets(2, 1, 0))


def test_realistic_exhaustion(tmp_path):
    with pytest.raises(InsufficientPoolError):
        build(tmp_path, ["CCO"], Budgets(0, 0, 4))


def test_skips_are_logged_and_replaced(tmp_path):
    pool = ["CCO", "C1CC", "CCN", "C(C)(C)(C)(C)C", "CCC", "CCCC"]
    b = build(tmp_path, pool, Budgets(2, 2, 0))
    assert len(b.records) == 4
    skipped = {s["smiles"] for s in b.report["skipped"]}
    assert skipped <= {"C1CC", "C(C)(C)(C)(C)C"}
    assert len(b.report["skipped"]) + 4 <= len(pool)
    for s in b.report["skipped"]:
        assert s["reason"]


def test_missing_realistic_images_are_skipped(tmp_path):
    root = tmp_path / "real"
    real = make_realistic(root, ["CCO", "CCN"])
    real.append(ManifestEntry("nowhere.png", "CCC", "USPTO"))
    real.append(ManifestEntry(real[0].image_path, "C1CC", "USPTO", id="bad"))
    b = build(tmp_path, ["CCO"], Budgets(0, 0, 2), realistic=real)
    assert len(b.records) == 2
    assert {r.response for r in b.records} == {"CCO", "CCN"}


def test_workers_do_not_change_output(tmp_path):
    pool = ["CCO", "CC(=O)O", "c1ccccc1", "C[C@H](N)C(=O)O", "CCN(CC)CC", "OC1CCCCC1"]
    a = build(tmp_path, pool, Budgets(3, 3, 0), name="w1", workers=1)
    b = build(tmp_path, pool, Budgets(3, 3, 0), name="w2", workers=2)
    assert a.report["digests"] == b.report["digests"]


def test_budgets_parse():
    assert Budgets.parse("300,300,200") == Budgets(300, 300, 200)
    assert Budgets.parse(" 1, 2 ,3").total == 6
    for bad in ("1,2", "1,2,3,4", "a,b,c", "1,-1,2"):
        with pytest.raises(ValueError):
            Budgets.parse(bad)


def test_stage_parse():
    assert Stage.parse("lora") is Stage.LoRA
    assert Stage.parse("fullsft") is Stage.FullSFT
    with pytest.raises(ValueError):
        Stage.parse("rl")


# --------------------------------------------------------------------------
# manifests and statistics


def test_manifest_round_trip(tmp_path):
    entries = [
        ManifestEntry("a.png", "CCO", "UOB"),
        ManifestEntry("b.png", "C[C@H](N)C(=O)O", "UOB", chiral=True, id="b1"),
        ManifestEntry("c.png", "CC", "UOB_p", perturb={"name": "uob_p"}),
    ]
    path = tmp_path / "m.jsonl"
    write_manifest(entries, path)
    back = read_manifest(path)
    assert [e.key for e in back] == ["a.png", "b1", "c.png"]
    assert back[1].chiral is True and back[2].perturb == {"name": "uob_p"}


def test_read_pool_takes_first_token(tmp_path):
    path = tmp_path / "p.smi"
    path.write_text("CCO ethanol\n\n# comment\nc1ccccc1\tbenzene\n")
    pool = read_pool(path)
    assert pool[0] == "CCO" and pool[-1] == "c1ccccc1"


def test_chiral_fraction_matches_table_row():
    # 324 of 992 CLEF structures carry stereo markers
    entries = [ManifestEntry(f"{i}.png", "C[C@H](N)O" if i < 324 else "CCO", "CLEF") for i in range(992)]
    stats = manifest_stats(entries)["CLEF"]
    assert stats.count == 992 and stats.chiral == 324
    assert stats.chiral_pct == 32.7


def test_chiral_fraction_zero_and_cis_trans():
    entries = [ManifestEntry("a", "CCO", "JPO"), ManifestEntry("b", "F/C=C/F", "Other")]
    stats = manifest_stats(entries)
    assert stats["JPO"].chiral_pct == 0.0
    assert stats["Other"].chiral_pct == 100.0


def test_stats_empty_and_unparseable():
    assert manifest_stats([])["all"].undefined
    stats = manifest_stats([ManifestEntry("a", "C1CC", "X")])
    assert stats["X"].undefined and stats["X"].chiral_pct == 0.0
    assert len(stats["X"].parse_failures) == 1


def test_stats_rounding_half_up():
    # 1/8 = 12.5 exactly and 269/400 = 67.25 exactly; both round upwards
    e1 = [ManifestEntry(f"{i}", "C[C@H](N)O" if i < 1 else "C", "A") for i in range(8)]
    assert manifest_stats(e1)["A"].chiral_pct == 12.5
    e2 = [ManifestEntry(f"{i}", "C[C@H](N)O" if i < 269 else "C", "B") for i in range(400)]
    assert manifest_stats(e2)["B"].chiral_pct == 67.3


# --------------------------------------------------------------------------
# training configs


def test_lora_config():
    cfg = emit_training_config(Stage.LoRA).to_dict()
    assert cfg["lora"]["rank"] == 64 and cfg["lora"]["alpha"] == 64 and cfg["lora"]["dropout"] == 0.1
    assert cfg["learning_rates"]["base"] == 2e-4
    assert cfg["optimizer"]["weight_decay"] == 1e-3
    assert cfg["schedule"]["warmup_steps"] == 100 and cfg["schedule"]["total_steps"] == 3000
    assert cfg["trainable_modules"] == ["lora_adapters"]


def test_full_sft_config():
    cfg = emit_training_config(Stage.FullSFT).to_dict()
    assert cfg["learning_rates"]["visual"] == 5e-6 and cfg["learning_rates"]["language"] == 2e-5
    assert cfg["optimizer"]["weight_decay"] == 0.01
    assert cfg["schedule"]["warmup_steps"] == 250 and cfg["schedule"]["total_steps"] == 2500
    assert set(cfg["frozen_modules"]) == {"visual_tokenizer", "input_token_embeddings"}
    assert not set(cfg["frozen_modules"]) & set(cfg["trainable_modules"])
    assert cfg["lora"] is None
    assert cfg["data"]["budget_per_source"] == list(FULL_SFT_BUDGET) == [300_000, 300_000, 200_000]


def test_config_is_deterministic_json():
    for stage in Stage:
        a, b = emit_training_config(stage).to_json(), emit_training_config(stage).to_json()
        assert a == b
        assert json.loads(a)["schema_version"] == 1
