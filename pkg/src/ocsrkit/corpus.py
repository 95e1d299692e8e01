"""Training-corpus construction, benchmark manifests and training configurations.

A corpus mixes three sources. Two of them are molecules from a SMILES pool
rendered in the two drawing styles. The third is realistic images taken
from a user-supplied manifest. Each record pairs one image with a fixed
instruction prompt and the canonical SMILES answer. Prompt and response are
kept separate so a trainer can mask the prompt out of the loss.
"""

from __future__ import annotations

import enum
import hashlib
import json
import logging
import shutil
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass
from importlib import resources
from pathlib import Path
from typing import Iterable, Iterator, Mapping, Sequence

import numpy as np

from ._rounding import pct
from .depict import STYLE_VERSION, StyleProfile, render
from .errors import InsufficientPoolError, OcsrError
from .smiles import canonical_smiles, parse

log = logging.getLogger(__name__)

PROMPT = "Return the SMILES of the molecule in the image."
CORPUS_SCHEMA_VERSION = 1
CONFIG_SCHEMA = "ocsrkit.training-config"
CONFIG_SCHEMA_VERSION = 1

# documented stage budgets (per source); the LoRA figure is quoted two ways
LORA_BUDGET_CHOICES = ((64_000, 64_000, 64_000), (32_000, 32_000, 32_000))
FULL_SFT_BUDGET = (300_000, 300_000, 200_000)

_BATCH = 512


class Source(str, enum.Enum):
    PubChemMolScribeStyle = "PubChemMolScribeStyle"
    PubChemChemDrawStyle = "PubChemChemDrawStyle"
    UsptoMol = "UsptoMol"

    @property
    def slug(self) -> str:
        return {"PubChemMolScribeStyle": "molscribe", "PubChemChemDrawStyle": "chemdraw", "UsptoMol": "uspto"}[
            self.value
        ]


class Stage(str, enum.Enum):
    LoRA = "LoRA"
    FullSFT = "FullSFT"

    @classmethod
    def parse(cls, text: str) -> "Stage":
        table = {"lora": cls.LoRA, "fullsft": cls.FullSFT, "full": cls.FullSFT, "full-sft": cls.FullSFT}
        key = text.strip().lower()
        if key not in table:
            raise ValueError(f"unknown stage {text!r}; expected 'lora' or 'fullsft'")
        return table[key]


SOURCES = (Source.PubChemMolScribeStyle, Source.PubChemChemDrawStyle, Source.UsptoMol)


# --------------------------------------------------------------------------
# records and manifests


@dataclass(frozen=True)
class CorpusRecord:
    id: str
    image_path: str
    prompt: str
    response: str
    source: Source
    stage: Stage

    def to_dict(self) -> dict:
        return {
            "id": self.id,
            "image_path": self.image_path,
            "prompt": self.prompt,
            "response": self.response,
            "source": self.source.value,
            "stage": self.stage.value,
        }

    @classmethod
    def from_dict(cls, doc: Mapping) -> "CorpusRecord":
        return cls(doc["id"], doc["image_path"], doc["prompt"], doc["response"], Source(doc["source"]), Stage(doc["stage"]))


@dataclass(frozen=True)
class ManifestEntry:
    """One benchmark or realistic-source image with its reference SMILES.

    ``id`` defaults to the image path when a manifest has no explicit ids.
    ``perturb`` holds the serialized perturbation spec for perturbed variants.
    """

    image_path: str
    smiles: str
    dataset_name: str
    chiral: bool | None = None
    id: str | None = None
    perturb: dict | None = None

    @property
    def key(self) -> str:
        return self.id if self.id is not None else self.image_path

    def to_dict(self) -> dict:
        doc = {"id": self.key, "image_path": self.image_path, "smiles": self.smiles, "dataset_name": self.dataset_name}
        if self.chiral is not None:
            doc["chiral"] = self.chiral
        if self.perturb is not None:
            doc["perturb"] = self.perturb
        return doc

    @classmethod
    def from_dict(cls, doc: Mapping) -> "ManifestEntry":
        return cls(
            image_path=doc["image_path"],
            smiles=doc["smiles"],
            dataset_name=doc["dataset_name"],
            chiral=doc.get("chiral"),
            id=doc.get("id"),
            perturb=doc.get("perturb"),
        )


def _read_jsonl(path: str | Path) -> Iterator[tuple[int, dict]]:
    with open(path, encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, 1):
            if line.strip():
                try:
                    yield lineno, json.loads(line)
                except json.JSONDecodeError as exc:
                    raise ValueError(f"{path}:{lineno}: invalid JSON ({exc.msg})") from None


def read_manifest(path: str | Path) -> list[ManifestEntry]:
    out = []
    for lineno, doc in _read_jsonl(path):
        try:
            out.append(ManifestEntry.from_dict(doc))
        except KeyError as exc:
            raise ValueError(f"{path}:{lineno}: missing field {exc.args[0]!r}") from None
    return out


def write_manifest(entries: Iterable[ManifestEntry], path: str | Path) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        for e in entries:
            fh.write(json.dumps(e.to_dict(), ensure_ascii=False) + "\n")


def read_corpus(path: str | Path) -> list[CorpusRecord]:
    return [CorpusRecord.from_dict(doc) for _, doc in _read_jsonl(path)]


def read_pool(path: str | Path) -> list[str]:
    """One SMILES per line; anything after the first whitespace is ignored."""
    out = []
    with open(path, encoding="utf-8") as fh:
        for line in fh:
            parts = line.split()
            if parts:
                out.append(parts[0])
    return out


def load_sample_pool() -> list[str]:
    """The bundled 10k-molecule pool used by tests and demos."""
    text = resources.files("ocsrkit").joinpath("data/sample_pool.smi").read_text(encoding="utf-8")
    return [line.split()[0] for line in text.splitlines() if line.strip()]


def sha256_file(path: str | Path) -> str:
    h = hashlib.sha256()
    with open(path, "rb") as fh:
        for chunk in iter(lambda: fh.read(1 << 20), b""):
            h.update(chunk)
    return h.hexdigest()


def sha256_lines(lines: Iterable[str]) -> str:
    h = hashlib.sha256()
    for line in lines:
        h.update(line.encode("utf-8"))
        h.update(b"\n")
    return h.hexdigest()


# --------------------------------------------------------------------------
# statistics


@dataclass(frozen=True)
class DatasetStats:
    """Counts for one dataset. ``chiral_pct`` is over parseable entries only."""

    count: int
    parsed: int
    chiral: int
    chiral_pct: float
    parse_failures: tuple[str, ...] = ()
    undefined: bool = False

    def to_dict(self) -> dict:
        return asdict(self) | {"parse_failures": list(self.parse_failures)}


def manifest_stats(entries: Sequence[ManifestEntry]) -> dict[str, DatasetStats]:
    """Per-dataset image count and share of entries carrying stereo markers.

    A dataset whose entries all fail to parse reports 0.0 with ``undefined``
    set. An empty manifest yields the single pseudo-dataset ``"all"`` with
    zero counts and the flag set.
    """
    if not entries:
        return {"all": DatasetStats(0, 0, 0, 0.0, (), True)}
    groups: dict[str, list[ManifestEntry]] = {}
    for e in entries:
        groups.setdefault(e.dataset_name, []).append(e)
    out = {}
    for name, group in groups.items():
        chiral = parsed = 0
        failures = []
        for e in group:
            try:
                m = parse(e.smiles)
            except OcsrError as exc:
                failures.append(f"{e.key}: {type(exc).__name__}: {exc}")
                continue
            parsed += 1
            chiral += m.has_stereo()
        out[name] = DatasetStats(len(group), parsed, chiral, pct(chiral, parsed), tuple(failures), parsed == 0)
    return out


# --------------------------------------------------------------------------
# corpus building


@dataclass(frozen=True)
class Budgets:
    molscribe: int
    chemdraw: int
    uspto: int

    def __post_init__(self):
        if min(self.molscribe, self.chemdraw, self.uspto) < 0:
            raise ValueError("budgets must be non-negative")

    @classmethod
    def parse(cls, text: str) -> "Budgets":
        parts = [p.strip() for p in text.split(",")]
        if len(parts) != 3:
            raise ValueError("budgets take three comma-separated counts: molscribe,chemdraw,uspto")
        return cls(*(int(p) for p in parts))

    def of(self, source: Source) -> int:
        return {Source.PubChemMolScribeStyle: self.molscribe, Source.PubChemChemDrawStyle: self.chemdraw,
                Source.UsptoMol: self.uspto}[source]

    @property
    def total(self) -> int:
        return self.molscribe + self.chemdraw + self.uspto


@dataclass
class CorpusBuild:
    records: list[CorpusRecord]
    report: dict
    manifest_path: Path
    report_path: Path


def _record_seed(seed: int, source: Source, index: int) -> int:
    digest = hashlib.sha256(f"{seed}\x1f{source.value}\x1f{index}".encode()).digest()
    return int.from_bytes(digest[:4], "big")


def _render_job(job: tuple[str, StyleProfile, int]) -> tuple[bool, object, object]:
    """Worker body: (ok, png bytes or reason, (canonical, chiral) or None)."""
    smiles, style, seed = job
    try:
        m = parse(smiles)
        canonical = canonical_smiles(m)
        img = render(m, style, seed, smiles=canonical)
        return True, img.to_png(), (canonical, m.has_stereo())
    except OcsrError as exc:
        return False, f"{type(exc).__name__}: {exc}", None


class _Runner:
    def __init__(self, workers: int):
        self.workers = max(1, int(workers))
        self.pool = ProcessPoolExecutor(self.workers) if self.workers > 1 else None

    def map(self, jobs: list) -> list:
        if self.pool is None:
            return [_render_job(j) for j in jobs]
        chunk = max(1, len(jobs) // (4 * self.workers))
        return list(self.pool.map(_render_job, jobs, chunksize=chunk))

    def close(self) -> None:
        if self.pool is not None:
            self.pool.shutdown()


def build_corpus(
    smiles_pool: Sequence[str],
    realistic_manifest: Sequence[ManifestEntry],
    budgets: Budgets,
    out_dir: str | Path,
    styles: tuple[StyleProfile, StyleProfile] | None = None,
    seed: int = 0,
    stage: Stage = Stage.FullSFT,
    prompt: str = PROMPT,
    realistic_root: str | Path | None = None,
    workers: int = 1,
) -> CorpusBuild:
    """Sample, render and copy images, then write ``manifest.jsonl`` and ``build_report.json``.

    One seeded shuffle of the pool feeds both synthetic branches in turn, so
    the MolScribe-style and ChemDraw-style subsets never share a molecule.
    Pool items that fail to parse or lay out are logged as skips and replaced
    by the next item in the shuffle. Realistic entries are shuffled
    separately and skipped when the image is missing or the SMILES is invalid.
    Output ordering depends only on the inputs and the seed, never on
    ``workers``.
    """
    styles = styles or (StyleProfile.molscribe_like(), StyleProfile.chemdraw_like())
    out = Path(out_dir)
    root = Path(realistic_root) if realistic_root is not None else Path(".")
    records: list[CorpusRecord] = []
    skipped: list[dict] = []
    chiral_count = 0
    image_digest = hashlib.sha256()

    def add(source: Source, index: int, rel: str, response: str, chiral: bool) -> None:
        nonlocal chiral_count
        records.append(CorpusRecord(f"{source.slug}-{index:07d}", rel, prompt, response, source, stage))
        chiral_count += chiral

    pool_order = np.random.default_rng([seed, 0]).permutation(len(smiles_pool))
    real_order = np.random.default_rng([seed, 1]).permutation(len(realistic_manifest))
    runner = _Runner(workers)
    try:
        cursor = 0
        for source, style in zip(SOURCES[:2], styles):
            want = budgets.of(source)
            got = 0
            img_dir = out / "images" / source.slug
            if want:
                img_dir.mkdir(parents=True, exist_ok=True)
            while got < want:
                take = pool_order[cursor : cursor + min(_BATCH, want - got)]
                if len(take) == 0:
                    raise InsufficientPoolError(
                        f"pool exhausted after {got} of {want} {source.value} records "
                        f"({len(smiles_pool)} pool entries shared by both synthetic sources)"
                    )
                # a batch never exceeds the remaining budget, so every item in it is consumed
                cursor += len(take)
                jobs = [(smiles_pool[i], style, _record_seed(seed, source, int(i))) for i in take]
                for i, (ok, payload, info) in zip(take, runner.map(jobs)):
                    if not ok:
                        skipped.append({"source": source.value, "pool_index": int(i),
                                        "smiles": smiles_pool[i], "reason": payload})
                        log.info("skip %s pool[%d]: %s", source.value, i, payload)
                        continue
                    rel = f"images/{source.slug}/{got:07d}.png"
                    (out / rel).write_bytes(payload)
                    image_digest.update(rel.encode() + b"\0" + hashlib.sha256(payload).digest())
                    add(source, got, rel, info[0], info[1])
                    got += 1

        source = Source.UsptoMol
        want, got, k = budgets.of(source), 0, 0
        img_dir = out / "images" / source.slug
        if want:
            img_dir.mkdir(parents=True, exist_ok=True)
        while got < want:
            if k == len(real_order):
                raise InsufficientPoolError(
                    f"realistic manifest exhausted after {got} of {want} {source.value} records"
                )
            i = int(real_order[k])
            k += 1
            entry = realistic_manifest[i]
            src = root / entry.image_path
            try:
                if not src.is_file():
                    raise FileNotFoundError(f"image not found: {src}")
                m = parse(entry.smiles)
                canonical = canonical_smiles(m)
            except (OcsrError, FileNotFoundError) as exc:
                reason = f"{type(exc).__name__}: {exc}"
                skipped.append({"source": source.value, "pool_index": i, "smiles": entry.smiles, "reason": reason})
                log.info("skip %s manifest[%d]: %s", source.value, i, reason)
                continue
            rel = f"images/{source.slug}/{got:07d}{src.suffix.lower() or '.png'}"
            shutil.copyfile(src, out / rel)
            image_digest.update(rel.encode() + b"\0" + bytes.fromhex(sha256_file(out / rel)))
            add(source, got, rel, canonical, m.has_stereo())
            got += 1
    finally:
        runner.close()

    out.mkdir(parents=True, exist_ok=True)
    manifest_path = out / "manifest.jsonl"
    lines = [json.dumps(r.to_dict(), ensure_ascii=False) for r in records]
    manifest_path.write_text("".join(line + "\n" for line in lines), encoding="utf-8")
    counts = {s.value: sum(r.source is s for r in records) for s in SOURCES}
    report = {
        "schema_version": CORPUS_SCHEMA_VERSION,
        "seed": seed,
        "stage": stage.value,
        "prompt": prompt,
        "budgets": {s.value: budgets.of(s) for s in SOURCES},
        "counts": counts,
        "total": len(records),
        "styles": {SOURCES[0].value: styles[0].to_dict(), SOURCES[1].value: styles[1].to_dict()},
        "style_version": STYLE_VERSION,
        "chiral_count": chiral_count,
        "chiral_pct": pct(chiral_count, len(records)),
        "skipped": skipped,
        "digests": {
            "manifest_sha256": sha256_lines(lines),
            "images_sha256": image_digest.hexdigest(),
            "pool_sha256": sha256_lines(smiles_pool),
            "realistic_sha256": sha256_lines(json.dumps(e.to_dict(), sort_keys=True) for e in realistic_manifest),
        },
    }
    report_path = out / "build_report.json"
    report_path.write_text(json.dumps(report, indent=2, ensure_ascii=False) + "\n", encoding="utf-8")
    return CorpusBuild(records, report, manifest_path, report_path)


# --------------------------------------------------------------------------
# training configurations

_LORA_TARGETS = (
    "attention.q_proj",
    "attention.k_proj",
    "attention.v_proj",
    "attention.o_proj",
    "ffn.gate_proj",
    "ffn.up_proj",
    "ffn.down_proj",
    "vision_language_projector",
)
_ALL_MODULES = (
    "visual_tokenizer",
    "lm_vision_encoder",
    "vision_language_projector",
    "input_token_embeddings",
    "decoder",
)


@dataclass(frozen=True)
class TrainingConfig:
    """Hyperparameters of one fine-tuning stage, serialized as a versioned JSON document."""

    stage: Stage
    trainable_modules: tuple[str, ...]
    frozen_modules: tuple[str, ...]
    learning_rates: dict
    lora: dict | None
    optimizer: dict
    schedule: dict
    data: dict

    def to_dict(self) -> dict:
        return {
            "schema": CONFIG_SCHEMA,
            "schema_version": CONFIG_SCHEMA_VERSION,
            "stage": self.stage.value,
            "trainable_modules": list(self.trainable_modules),
            "frozen_modules": list(self.frozen_modules),
            "learning_rates": dict(self.learning_rates),
            "lora": None if self.lora is None else {k: (list(v) if isinstance(v, tuple) else v)
                                                    for k, v in self.lora.items()},
            "optimizer": dict(self.optimizer),
            "schedule": dict(self.schedule),
            "data": {k: (list(v) if isinstance(v, tuple) else v) for k, v in self.data.items()},
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2) + "\n"


def emit_training_config(stage: Stage) -> TrainingConfig:
    """The published hyperparameters of ``stage``.

    The LoRA stage adapts the attention and feed-forward projections and the
    vision-language projector while every base weight stays frozen. The full
    stage unfreezes everything except the visual tokenizer and the input
    token embeddings, and splits the learning rate by branch.
    """
    schedule = {"warmup_steps": None, "total_steps": None, "per_device_batch_size": 4,
                "gradient_accumulation_steps": 8}
    data = {"sources": [s.value for s in SOURCES], "prompt": PROMPT, "supervision": "response_tokens_only"}
    if stage is Stage.LoRA:
        return TrainingConfig(
            stage=stage,
            trainable_modules=("lora_adapters",),
            frozen_modules=_ALL_MODULES,
            learning_rates={"base": 2e-4},
            lora={"rank": 64, "alpha": 64, "dropout": 0.1, "target_modules": _LORA_TARGETS},
            optimizer={"name": "AdamW", "weight_decay": 1e-3},
            schedule=schedule | {"warmup_steps": 100, "total_steps": 3000},
            data=data | {"budget_per_source": None, "budget_per_source_documented": [64_000, 32_000]},
        )
    if stage is Stage.FullSFT:
        return TrainingConfig(
            stage=stage,
            trainable_modules=("lm_vision_encoder", "vision_language_projector", "decoder"),
            frozen_modules=("visual_tokenizer", "input_token_embeddings"),
            learning_rates={"base": 1e-5, "visual": 5e-6, "language": 2e-5},
            lora=None,
            optimizer={"name": "AdamW", "weight_decay": 0.01},
            schedule=schedule | {"warmup_steps": 250, "total_steps": 2500},
            data=data | {"budget_per_source": list(FULL_SFT_BUDGET), "init_from": "LoRA"},
        )
    raise ValueError(f"unknown stage {stage!r}")


__all__ = [
    "Budgets",
    "CorpusBuild",
    "CorpusRecord",
    "DatasetStats",
    "ManifestEntry",
    "PROMPT",
    "SOURCES",
    "Source",
    "Stage",
    "TrainingConfig",
    "build_corpus",
    "emit_training_config",
    "load_sample_pool",
    "manifest_stats",
    "read_corpus",
    "read_manifest",
    "read_pool",
    "write_manifest",
]
