"""Measure single-worker throughput of canonicalization, rendering and evaluation.

Usage::

    python scripts/bench_throughput.py [--n-canon 5000] [--n-render 200] [--n-eval 10000]

Prints one JSON object. Budgets: 10,000 canonicalizations/s, 50 renders/s
at 512 x 512, and 10,000 evaluation pairs in under 10 s.
"""

from __future__ import annotations

import argparse
import json
import platform
import time

from ocsrkit.corpus import ManifestEntry, load_sample_pool
from ocsrkit.depict import StyleProfile, render
from ocsrkit.errors import OcsrError
from ocsrkit.evaluation import cached_forms, evaluate
from ocsrkit.smiles import canonical_smiles, canonicalize, parse


def _rate(n: int, seconds: float) -> float:
    return n / seconds if seconds > 0 else float("inf")


def main() -> None:
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--n-canon", type=int, default=5000)
    ap.add_argument("--n-render", type=int, default=200)
    ap.add_argument("--n-eval", type=int, default=10_000)
    args = ap.parse_args()
    pool = load_sample_pool()

    sample = pool[: args.n_canon]
    t0 = time.perf_counter()
    mols = [parse(s) for s in sample]
    t_parse = time.perf_counter() - t0
    t0 = time.perf_counter()
    for m in mols:
        canonical_smiles(m)
    t_write = time.perf_counter() - t0
    t0 = time.perf_counter()
    for s in sample:
        canonicalize(s)
    t_canon = time.perf_counter() - t0

    style = StyleProfile.molscribe_like()
    done = 0
    t0 = time.perf_counter()
    for k, s in enumerate(pool[: args.n_render]):
        try:
            render(parse(s), style, k)
            done += 1
        except OcsrError:
            pass
    t_render = time.perf_counter() - t0

    refs = [pool[k % len(pool)] for k in range(args.n_eval)]
    manifest = [ManifestEntry(str(k), s, "USPTO") for k, s in enumerate(refs)]
    preds = [(str(k), refs[(k * 7919) % len(refs)] if k % 3 else refs[k]) for k in range(args.n_eval)]
    cached_forms.cache_clear()
    t0 = time.perf_counter()
    evaluate(manifest, preds)
    t_eval = time.perf_counter() - t0

    result = {
        "python": platform.python_version(),
        "machine": platform.machine(),
        "canonicalize_per_s": round(_rate(len(sample), t_canon)),
        "parse_per_s": round(_rate(len(sample), t_parse)),
        "canonical_write_per_s": round(_rate(len(sample), t_write)),
        "renders_per_s_512": round(_rate(done, t_render), 1),
        "eval_pairs": args.n_eval,
        "eval_seconds": round(t_eval, 2),
        "budgets": {"canonicalize_per_s": 10_000, "renders_per_s_512": 50, "eval_seconds": 10},
    }
    result["meets"] = {
        "canonicalize": result["canonicalize_per_s"] >= 10_000,
        "render": result["renders_per_s_512"] >= 50,
        "eval": t_eval < 10,
    }
    print(json.dumps(result, indent=2))


if __name__ == "__main__":
    main()
