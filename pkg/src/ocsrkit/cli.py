"""Command-line entry point: ``ocsrkit <subcommand> ...``.

Every subcommand writes a one-line JSON run summary to stderr with the
seed, tool and preset versions, and SHA-256 digests of its inputs and
outputs. When a subcommand fails, any output files it created are removed
and the exit status is nonzero.
"""

from __future__ import annotations

import argparse
import json
import logging
import os
import shutil
import sys
from pathlib import Path
from typing import Callable, TextIO

from . import __version__
from .corpus import (
    PROMPT,
    Budgets,
    ManifestEntry,
    Stage,
    build_corpus,
    emit_training_config,
    load_sample_pool,
    manifest_stats,
    read_manifest,
    read_pool,
    sha256_file,
    write_manifest,
)
from .depict import STYLE_VERSION, RasterImage, StyleProfile, render
from .errors import OcsrError
from .evaluation import emit_report, evaluate, read_predictions
from .perturb import PRESETS, SUITE_VERSION, PerturbSpec, perturb
from .reward import TERMS, RewardConfig, rank_candidates
from .smiles import canonicalize, parse

WORKERS_ENV = "MOLSEEK_WORKERS"
log = logging.getLogger("ocsrkit")


class _Run:
    """Bookkeeping for one subcommand: digests for the summary, cleanup on failure."""

    def __init__(self, args: argparse.Namespace):
        self.args = args
        self.inputs: dict[str, str] = {}
        self.outputs: dict[str, str] = {}
        self.created: list[Path] = []
        self.extra: dict = {}

    def input(self, path: str | Path) -> Path:
        p = Path(path)
        self.inputs[str(p)] = sha256_file(p)
        return p

    def claim(self, path: str | Path) -> Path:
        """Register an output path; it is deleted if the run fails and did not exist before."""
        p = Path(path)
        if not p.exists():
            self.created.append(p)
        return p

    def cleanup(self) -> None:
        for p in reversed(self.created):
            if p.is_dir():
                shutil.rmtree(p, ignore_errors=True)
            elif p.exists():
                p.unlink()

    def summary(self, status: str) -> dict:
        for p in list(self.created):
            if p.is_file():
                self.outputs[str(p)] = sha256_file(p)
        return {
            "command": self.args.command,
            "status": status,
            "seed": self.args.seed,
            "workers": self.args.workers,
            "versions": {"ocsrkit": __version__, "style": STYLE_VERSION, "perturb": SUITE_VERSION},
            "inputs": self.inputs,
            "outputs": self.outputs,
            **self.extra,
        }


def _open_out(run: _Run, path: str | None) -> TextIO:
    if path is None or path == "-":
        return sys.stdout
    return open(run.claim(path), "w", encoding="utf-8")


def _close_out(fh: TextIO) -> None:
    if fh is not sys.stdout:
        fh.close()


def _read_lines(run: _Run, path: str | None) -> list[str]:
    if path is None or path == "-":
        return sys.stdin.read().splitlines()
    return run.input(path).read_text(encoding="utf-8").splitlines()


# --------------------------------------------------------------------------
# subcommands


def cmd_canon(args: argparse.Namespace, run: _Run) -> int:
    lines = _read_lines(run, args.input)
    out = _open_out(run, args.out)
    failures = 0
    try:
        for lineno, line in enumerate(lines, 1):
            text = line.strip()
            try:
                out.write(canonicalize(text) + "\n")
            except OcsrError as exc:
                failures += 1
                record = f"#error line {lineno}: {type(exc).__name__}: {exc}"
                out.write(record + "\n")
                print(record, file=sys.stderr)
    finally:
        _close_out(out)
    run.extra["lines"] = len(lines)
    run.extra["failures"] = failures
    if failures and not args.lenient:
        raise _Failure(f"{failures} of {len(lines)} lines failed to canonicalize")
    return 0


def cmd_render(args: argparse.Namespace, run: _Run) -> int:
    style = StyleProfile.by_key(args.style, canvas=args.canvas)
    img = render(parse(args.smiles), style, args.seed, rgb=args.rgb)
    out = run.claim(args.out)
    img.save(out)
    run.extra["style"] = style.name
    run.extra["provenance"] = list(img.provenance)
    return 0


def _perturb_spec(args: argparse.Namespace, run: _Run) -> PerturbSpec:
    if args.spec is not None:
        spec = PerturbSpec.from_json(run.input(args.spec).read_text(encoding="utf-8"))
        return PerturbSpec(spec.operators, args.seed, spec.name, spec.version)
    return PerturbSpec.preset(args.preset, seed=args.seed, strength=args.strength)


def _perturbed_name(dataset: str) -> str:
    return dataset if dataset.endswith("_p") else f"{dataset}_p"


def cmd_perturb(args: argparse.Namespace, run: _Run) -> int:
    spec = _perturb_spec(args, run)
    run.extra["perturb_spec"] = spec.to_dict()
    src = run.input(args.input)
    if src.suffix.lower() != ".jsonl":
        img = RasterImage.load(src)
        record_id = args.record_id or src.stem
        perturb(img, spec, record_id).save(run.claim(args.out))
        return 0
    entries = read_manifest(src)
    out_dir = run.claim(args.out)
    (out_dir / "images").mkdir(parents=True, exist_ok=True)
    new_entries = []
    for k, e in enumerate(entries):
        img = RasterImage.load(src.parent / e.image_path)
        rel = f"images/{k:07d}.png"
        perturb(img, spec, e.key).save(out_dir / rel)
        new_entries.append(
            ManifestEntry(rel, e.smiles, _perturbed_name(e.dataset_name), e.chiral, e.key, spec.to_dict())
        )
    write_manifest(new_entries, out_dir / "manifest.jsonl")
    run.outputs[str(out_dir / "manifest.jsonl")] = sha256_file(out_dir / "manifest.jsonl")
    run.extra["records"] = len(new_entries)
    return 0


def cmd_build_corpus(args: argparse.Namespace, run: _Run) -> int:
    budgets = Budgets.parse(args.budgets)
    if args.pool is None:
        pool = load_sample_pool()
        run.inputs["<bundled sample pool>"] = "bundled"
    else:
        pool = read_pool(run.input(args.pool))
    realistic: list[ManifestEntry] = []
    root = None
    if args.realistic is not None:
        realistic = read_manifest(run.input(args.realistic))
        root = Path(args.realistic).parent
    elif budgets.uspto:
        raise _Failure("a realistic-image budget needs --realistic MANIFEST")
    out_dir = run.claim(args.out)
    build = build_corpus(
        pool,
        realistic,
        budgets,
        out_dir,
        seed=args.seed,
        stage=Stage.parse(args.stage),
        prompt=args.prompt,
        realistic_root=root,
        workers=args.workers,
    )
    run.outputs[str(build.manifest_path)] = sha256_file(build.manifest_path)
    run.outputs[str(build.report_path)] = sha256_file(build.report_path)
    run.extra["counts"] = build.report["counts"]
    run.extra["skipped"] = len(build.report["skipped"])
    run.extra["digests"] = build.report["digests"]
    return 0


def cmd_evaluate(args: argparse.Namespace, run: _Run) -> int:
    manifest = read_manifest(run.input(args.manifest))
    preds = read_predictions(run.input(args.predictions))
    report = evaluate(manifest, preds, workers=args.workers)
    out = _open_out(run, args.out)
    try:
        out.write(emit_report(report, args.format))
    finally:
        _close_out(out)
    run.extra["datasets"] = report.names()
    run.extra["unexpected_ids"] = len(report.unexpected_ids)
    return 0


def cmd_reward(args: argparse.Namespace, run: _Run) -> int:
    cfg = RewardConfig.parse(args.weights) if args.weights else RewardConfig()
    lines = _read_lines(run, args.input)
    out = _open_out(run, args.out)
    groups = 0
    try:
        for lineno, line in enumerate(lines, 1):
            if not line.strip():
                continue
            try:
                doc = json.loads(line)
                ref, cands = doc["ref"], list(doc["candidates"])
            except (json.JSONDecodeError, KeyError, TypeError) as exc:
                raise _Failure(f"line {lineno}: expected {{id, ref, candidates}} ({exc})") from None
            ranking = rank_candidates(ref, cands, cfg)
            row = {
                "id": doc.get("id", str(lineno)),
                "scores": list(ranking.scores),
                "standardized": list(ranking.standardized),
                "ranking": list(ranking.order),
                "terms": [dict(zip(TERMS, t.fired())) for t in ranking.terms],
                "weights": cfg.to_dict(),
            }
            out.write(json.dumps(row) + "\n")
            groups += 1
    finally:
        _close_out(out)
    run.extra["weights"] = cfg.to_dict()
    run.extra["groups"] = groups
    return 0


def cmd_stats(args: argparse.Namespace, run: _Run) -> int:
    stats = manifest_stats(read_manifest(run.input(args.manifest)))
    out = _open_out(run, args.out)
    try:
        if args.format == "json":
            out.write(json.dumps({k: v.to_dict() for k, v in stats.items()}, indent=2) + "\n")
        elif args.format == "csv":
            out.write("dataset,count,parsed,chiral,chiral_pct,undefined\n")
            for name, s in stats.items():
                out.write(f"{name},{s.count},{s.parsed},{s.chiral},{s.chiral_pct:.1f},{str(s.undefined).lower()}\n")
        else:
            out.write("| Dataset | No. of images | % chiral | Parse failures |\n|---|---:|---:|---:|\n")
            for name, s in stats.items():
                chiral = "--" if s.undefined else f"{s.chiral_pct:.1f}%"
                out.write(f"| {name} | {s.count} | {chiral} | {len(s.parse_failures)} |\n")
    finally:
        _close_out(out)
    for name, s in stats.items():
        for failure in s.parse_failures:
            print(f"{name}: {failure}", file=sys.stderr)
    return 0


def cmd_emit_config(args: argparse.Namespace, run: _Run) -> int:
    out = _open_out(run, args.out)
    try:
        out.write(emit_training_config(Stage.parse(args.stage)).to_json())
    finally:
        _close_out(out)
    return 0


class _Failure(Exception):
    """A subcommand-level failure reported without a traceback."""


# --------------------------------------------------------------------------
# parser


def _default_workers() -> int:
    raw = os.environ.get(WORKERS_ENV)
    if raw is None:
        return 1
    try:
        return max(1, int(raw))
    except ValueError:
        raise SystemExit(f"{WORKERS_ENV} must be an integer, got {raw!r}") from None


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--seed", type=int, default=0, help="global random seed (default: 0)")
    common.add_argument(
        "--workers", type=int, default=_default_workers(),
        help=f"worker processes (default: ${WORKERS_ENV} or 1)",
    )
    common.add_argument("-v", "--verbose", action="count", default=0, help="more logging on stderr")

    ap = argparse.ArgumentParser(
        prog="ocsrkit",
        description="SMILES canonicalization, molecule rendering, benchmark perturbation, "
        "corpus building, evaluation and reward scoring.",
    )
    ap.add_argument("--version", action="version", version=f"ocsrkit {__version__}")
    sub = ap.add_subparsers(dest="command", required=True, metavar="COMMAND")

    def add(name: str, fn: Callable, help: str) -> argparse.ArgumentParser:
        p = sub.add_parser(name, parents=[common], help=help, description=help)
        p.set_defaults(func=fn)
        return p

    p = add("canon", cmd_canon, "Canonicalize SMILES, one per line.")
    p.add_argument("input", nargs="?", help="input file (default: stdin)")
    p.add_argument("--out", help="output file (default: stdout)")
    p.add_argument("--lenient", action="store_true", help="exit 0 even when some lines fail")

    p = add("render", cmd_render, "Render one SMILES to a PNG image.")
    p.add_argument("smiles")
    p.add_argument("--out", required=True, help="output PNG path")
    p.add_argument("--style", choices=["molscribe", "chemdraw"], default="chemdraw")
    p.add_argument("--canvas", type=int, default=512, help="image side in pixels (default: 512)")
    p.add_argument("--rgb", action="store_true", help="colour heteroatom labels")

    p = add("perturb", cmd_perturb, "Perturb one image, or every image of a JSONL manifest.")
    p.add_argument("input", help="PNG image or manifest .jsonl")
    p.add_argument("--out", required=True, help="output PNG (image input) or directory (manifest input)")
    p.add_argument("--preset", choices=list(PRESETS), default="clef_p")
    p.add_argument("--strength", type=float, default=0.5, help="uniform preset strength (default: 0.5)")
    p.add_argument("--spec", help="JSON perturbation spec overriding --preset")
    p.add_argument("--record-id", help="record id for a single image (default: file stem)")

    p = add("build-corpus", cmd_build_corpus, "Build a three-source training corpus.")
    p.add_argument("--budgets", required=True, help="records per source: molscribe,chemdraw,uspto")
    p.add_argument("--out", required=True, help="output directory")
    p.add_argument("--pool", help="SMILES pool file (default: bundled 10k sample pool)")
    p.add_argument("--realistic", help="JSONL manifest of realistic images")
    p.add_argument("--stage", choices=["lora", "fullsft"], default="fullsft")
    p.add_argument("--prompt", default=PROMPT, help="instruction prompt shared by every record")

    p = add("evaluate", cmd_evaluate, "Score a prediction file against a benchmark manifest.")
    p.add_argument("manifest", help="benchmark manifest (.jsonl)")
    p.add_argument("predictions", help="predictions as JSONL {id, smiles} or TSV id<TAB>smiles")
    p.add_argument("--format", choices=["markdown", "csv", "json"], default="markdown")
    p.add_argument("--out", help="output file (default: stdout)")

    p = add("reward", cmd_reward, "Score and rank candidate SMILES against references.")
    p.add_argument("input", nargs="?", help="JSONL of {id, ref, candidates} (default: stdin)")
    p.add_argument("--weights", help="valid,seq,graph,stereo weights (default: 0.2,0.4,0.3,0.1)")
    p.add_argument("--out", help="output JSONL (default: stdout)")

    p = add("stats", cmd_stats, "Per-dataset image counts and chiral share of a manifest.")
    p.add_argument("manifest")
    p.add_argument("--format", choices=["markdown", "csv", "json"], default="markdown")
    p.add_argument("--out", help="output file (default: stdout)")

    p = add("emit-config", cmd_emit_config, "Write a stage's training configuration as JSON.")
    p.add_argument("--stage", choices=["lora", "fullsft"], required=True)
    p.add_argument("--out", help="output file (default: stdout)")
    return ap


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.WARNING - 10 * min(args.verbose, 2), format="%(levelname)s %(message)s")
    run = _Run(args)
    try:
        code = args.func(args, run)
    except (_Failure, OcsrError, ValueError, OSError) as exc:
        run.cleanup()
        print(f"ocsrkit {args.command}: error: {type(exc).__name__}: {exc}", file=sys.stderr)
        print(json.dumps(run.summary("error")), file=sys.stderr)
        return 1
    print(json.dumps(run.summary("ok")), file=sys.stderr)
    return code


if __name__ == "__main__":
    sys.exit(main())
