"""
Scoring sampled candidates with the chemistry-aware reward
==========================================================

A policy that samples several SMILES per image needs a score per sample.
The reward fires four binary terms (valid, sequence match, stereo-blind
graph match, stereo) and sums their weights; candidates are then ranked and
standardized within their group.

    python demos/04_reward_ranking.py
"""

from __future__ import annotations

from ocsrkit.reward import RewardConfig, rank_candidates, reward, reward_terms

ref = "C[C@@H](C(=O)O)N"  # L-alanine
candidates = [
    "N[C@@H](C)C(=O)O",  # L-alanine written differently: everything fires
    "C[C@H](C(=O)O)N",  # D-alanine: valid and graph only
    "CC(C(=O)O)N",  # stereo dropped: valid and graph only
    "CC(C(=O)O)O",  # lactic acid: valid only
    "C[C@@H](C(=O)O",  # unclosed branch: nothing fires
]

for c in candidates:
    t = reward_terms(ref, c)
    print(f"{c:>20}  {reward(ref, c):.2f}  {t}")

# Ranking is a stable sort, so ties keep the sampling order, and the
# standardized scores are what a group-relative policy update would consume.
ranking = rank_candidates(ref, candidates)
for c, s in ranking.ranked(candidates):
    print(f"{s:.2f}  {c}")
print("standardized:", [round(z, 3) for z in ranking.standardized])

# Weights are normalized, so only their ratios matter. Putting all weight on
# the graph term makes stereo errors free.
graph_only = RewardConfig(0, 0, 1, 0)
print(reward(ref, "C[C@H](C(=O)O)N", graph_only))

# A group where every sample is identical carries no learning signal.
print(rank_candidates(ref, [ref, ref, ref]).standardized)
