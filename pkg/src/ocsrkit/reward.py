"""Chemistry-aware reward for ranking sampled SMILES candidates.

A candidate earns four binary terms against the reference:

* ``valid``  the candidate parses
* ``seq``    canonical forms match, stereo included
* ``graph``  canonical forms match after stereo is discarded
* ``stereo`` the reference has stereo and the match is exact; granted
  whenever ``seq`` holds for a reference without stereo

The score is the weighted sum of the terms that fire. Weights are
normalized to sum to one on construction, so a candidate firing every
term scores exactly 1.0.

Under these definitions ``stereo`` fires exactly when ``seq`` does, so its
weight acts as extra weight on full agreement. The term is kept separate
so that a per-centre partial-credit variant can replace it later.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .evaluation import cached_forms

TERMS = ("valid", "seq", "graph", "stereo")


@dataclass(frozen=True)
class RewardConfig:
    w_valid: float = 0.2
    w_seq: float = 0.4
    w_graph: float = 0.3
    w_stereo: float = 0.1

    def __post_init__(self):
        ws = (self.w_valid, self.w_seq, self.w_graph, self.w_stereo)
        if any(not math.isfinite(w) or w < 0 for w in ws):
            raise ValueError("reward weights must be finite and non-negative")
        total = math.fsum(ws)
        if total <= 0:
            raise ValueError("at least one reward weight must be positive")
        for name, w in zip(("w_valid", "w_seq", "w_graph", "w_stereo"), ws):
            object.__setattr__(self, name, w / total)

    @classmethod
    def parse(cls, text: str) -> "RewardConfig":
        parts = [float(p) for p in text.split(",")]
        if len(parts) != 4:
            raise ValueError("weights take four comma-separated values: valid,seq,graph,stereo")
        return cls(*parts)

    @property
    def weights(self) -> tuple[float, float, float, float]:
        return (self.w_valid, self.w_seq, self.w_graph, self.w_stereo)

    def to_dict(self) -> dict:
        return dict(zip(("w_valid", "w_seq", "w_graph", "w_stereo"), self.weights))


@dataclass(frozen=True)
class RewardTerms:
    valid: bool
    seq: bool
    graph: bool
    stereo: bool

    def fired(self) -> tuple[bool, bool, bool, bool]:
        return (self.valid, self.seq, self.graph, self.stereo)


def _ref_forms(ref: str) -> tuple[str, str]:
    forms = cached_forms(ref)
    if forms is None:
        raise ValueError(f"reference SMILES does not parse: {ref!r}")
    return forms


def reward_terms(ref: str, cand: str) -> RewardTerms:
    want = _ref_forms(ref)
    got = cached_forms(cand)
    if got is None:
        return RewardTerms(False, False, False, False)
    seq = got[0] == want[0]
    graph = got[1] == want[1]
    # a reference with stereo needs exact agreement, which is seq; one without
    # grants the term whenever seq holds, so both cases reduce to seq
    return RewardTerms(True, seq, graph, seq)


def score_terms(terms: RewardTerms, cfg: RewardConfig) -> float:
    fired = terms.fired()
    if all(fired):
        return 1.0
    return math.fsum(w for w, f in zip(cfg.weights, fired) if f)


def reward(ref: str, cand: str, cfg: RewardConfig | None = None) -> float:
    """Scalar reward in [0, 1]. ``ref`` must parse; ``cand`` may be any text."""
    return score_terms(reward_terms(ref, cand), cfg or RewardConfig())


@dataclass(frozen=True)
class Ranking:
    """Scores in input order, the stable best-first order and group-standardized scores."""

    scores: tuple[float, ...]
    order: tuple[int, ...]
    standardized: tuple[float, ...]
    terms: tuple[RewardTerms, ...]

    def ranked(self, cands: list[str]) -> list[tuple[str, float]]:
        return [(cands[i], self.scores[i]) for i in self.order]


def standardize(scores: list[float]) -> list[float]:
    """``(s - mean) / std`` with population std; all zeros when every score is equal."""
    x = np.asarray(scores, dtype=np.float64)
    if x.size == 0 or np.all(x == x[0]):
        return [0.0] * int(x.size)
    return [float(v) for v in (x - x.mean()) / x.std()]


def rank_candidates(ref: str, cands: list[str], cfg: RewardConfig | None = None) -> Ranking:
    if not cands:
        raise ValueError("rank_candidates needs at least one candidate")
    cfg = cfg or RewardConfig()
    terms = tuple(reward_terms(ref, c) for c in cands)
    scores = [score_terms(t, cfg) for t in terms]
    # sorted() is stable, so equal scores keep their input order
    order = sorted(range(len(cands)), key=lambda i: -scores[i])
    return Ranking(tuple(scores), tuple(order), tuple(standardize(scores)), terms)


__all__ = [
    "Ranking",
    "RewardConfig",
    "RewardTerms",
    "TERMS",
    "rank_candidates",
    "reward",
    "reward_terms",
    "score_terms",
    "standardize",
]
