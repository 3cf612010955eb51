"""Phoneme confusion networks.

Candidates are folded one at a time into a slotted network by a
Levenshtein-style alignment against the slots (ROVER style).  Each slot
counts how many candidates put each phone there; ``<eps>`` counts the
candidates that skip the slot.  Consensus pronunciations are the paths with
the most votes.
"""

from __future__ import annotations

import heapq
import itertools
from dataclasses import dataclass
from typing import Mapping, Sequence

from cslex.ape import PosteriorSource, ape_table, select_top
from cslex.errors import EmptyInput
from cslex.simulate import CandidateSet

EPS = "<eps>"

# Path score of an <eps> arc, per vote.  Below 1/2 so that a slot where two
# candidates skip and two agree on a phone still prefers the phone; above 0
# so that a slot created by a single stray insertion is skipped.
DEFAULT_EPS_WEIGHT = 0.375


@dataclass(frozen=True)
class AlignmentCosts:
    match: float = 0.0
    substitution: float = 1.0
    insertion: float = 1.0
    deletion: float = 1.0

    def __post_init__(self):
        if self.match != 0:
            raise ValueError("match cost must be 0")
        if min(self.substitution, self.insertion, self.deletion) <= 0:
            raise ValueError("edit costs must be positive")


@dataclass(frozen=True)
class ConfusionNetwork:
    slots: tuple  # tuple of Mapping[str, int]
    n_aligned: int = 0

    def __len__(self):
        return len(self.slots)

    def vote_mass(self) -> int:
        return sum(sum(s.values()) for s in self.slots)

    def eps_votes(self) -> int:
        return sum(s.get(EPS, 0) for s in self.slots)

    def dump(self) -> str:
        lines = []
        for i, slot in enumerate(self.slots):
            arcs = sorted(slot.items(), key=lambda kv: (-kv[1], kv[0]))
            lines.append(f"{i}\t" + ",".join(f"{p}:{v}" for p, v in arcs) + "\n")
        return "".join(lines)

    @classmethod
    def parse(cls, text: str) -> "ConfusionNetwork":
        slots = []
        for line in text.splitlines():
            if not line.strip():
                continue
            _, arcs = line.split("\t")
            slot = {}
            for arc in arcs.split(","):
                sym, votes = arc.rsplit(":", 1)
                slot[sym] = int(votes)
            slots.append(slot)
        n = max((sum(s.values()) for s in slots), default=0)
        return cls(tuple(slots), n)


def align_into(net: ConfusionNetwork, cand: Sequence[str], costs: AlignmentCosts = AlignmentCosts()) -> ConfusionNetwork:
    """Return a new network with ``cand`` aligned in at minimum cost.

    Matching a phone already present in a slot is free.  Skipping a slot
    costs ``deletion`` unless some earlier candidate already skipped it.
    Equal-cost alignments are ranked by, in turn: fewer charged gaps (so a
    substitution beats a deletion plus an insertion), more exact matches,
    matches against older arcs of their slot, and pairing as far left as
    possible.  The last three keep the network independent of fold order on
    realistic inputs.
    """
    cand = tuple(cand)
    if not net.slots:
        return ConfusionNetwork(tuple({ph: 1} for ph in cand), 1)
    slots = net.slots
    n, m = len(slots), len(cand)
    # costs are (edit cost, charged gaps, -matches, summed arc age) tuples,
    # compared lexicographically; arc age is its position in slot order
    age = [{sym: k for k, sym in enumerate(s)} for s in slots]

    def pair_cost(i, j):
        if cand[j] in slots[i]:
            return (costs.match, 0, -1, age[i][cand[j]])
        return (costs.substitution, 0, 0, 0)

    skip = [(0.0, 0, 0, 0) if EPS in s else (costs.deletion, 1, 0, 0) for s in slots]
    ins = (costs.insertion, 1, 0, 0)

    def add(a, b):
        return tuple(x + y for x, y in zip(a, b))

    # d[i][j]: cheapest alignment of slots[i:] with cand[j:]; solving over
    # suffixes and walking forward gives the leftmost pairing on exact ties
    inf = (float("inf"), 0, 0, 0)
    d = [[inf] * (m + 1) for _ in range(n + 1)]
    d[n][m] = (0.0, 0, 0, 0)
    for i in range(n, -1, -1):
        for j in range(m, -1, -1):
            if i == n and j == m:
                continue
            best = inf
            if i < n and j < m:
                best = add(d[i + 1][j + 1], pair_cost(i, j))
            if i < n:
                best = min(best, add(d[i + 1][j], skip[i]))
            if j < m:
                best = min(best, add(d[i][j + 1], ins))
            d[i][j] = best

    ops = []
    i = j = 0
    while i < n or j < m:
        if i < n and j < m and d[i][j] == add(d[i + 1][j + 1], pair_cost(i, j)):
            ops.append(("pair", i, cand[j]))
            i, j = i + 1, j + 1
        elif i < n and d[i][j] == add(d[i + 1][j], skip[i]):
            ops.append(("skip", i, None))
            i += 1
        else:
            ops.append(("insert", None, cand[j]))
            j += 1

    new_slots = []
    for kind, idx, ph in ops:
        if kind == "insert":
            slot = {ph: 1}
            if net.n_aligned:
                slot[EPS] = net.n_aligned
        else:
            slot = dict(slots[idx])
            key = ph if kind == "pair" else EPS
            slot[key] = slot.get(key, 0) + 1
        new_slots.append(slot)
    return ConfusionNetwork(tuple(new_slots), net.n_aligned + 1)


def build_pcn(candidates: Sequence[Sequence[str]], costs: AlignmentCosts = AlignmentCosts()) -> ConfusionNetwork:
    """Left fold of :func:`align_into` over ``candidates`` in the given order."""
    if not candidates:
        raise EmptyInput("cannot build a confusion network from no candidates")
    net = ConfusionNetwork(())
    for cand in candidates:
        net = align_into(net, cand, costs)
    return net


def _slot_arcs(net, eps_weight):
    out = []
    for slot in net.slots:
        arcs = [((v * eps_weight if sym == EPS else float(v)), sym) for sym, v in slot.items()]
        arcs.sort(key=lambda a: (-a[0], a[1]))
        out.append(arcs)
    return out


def _path(arcs, idx):
    score = 0.0
    seq = []
    for slot, k in zip(arcs, idx):
        s, sym = slot[k]
        score += s
        if sym != EPS:
            seq.append(sym)
    return score, tuple(seq)


def nbest_consensus(net: ConfusionNetwork, n: int, eps_weight: float = DEFAULT_EPS_WEIGHT) -> list[tuple]:
    """The ``n`` best distinct phone sequences through the network.

    A path picks one arc per slot and scores the sum of the picked vote
    counts, ``<eps>`` votes weighted by ``eps_weight``.  Different paths that
    emit the same sequence count once (at their best score); the empty
    sequence is never returned.  Equal scores are ordered lexicographically.
    """
    if n < 1:
        raise ValueError("n must be >= 1")
    if not net.slots:
        return []
    arcs = _slot_arcs(net, eps_weight)
    start = (0,) * len(arcs)
    heap = [(-_path(arcs, start)[0], start)]
    seen = {start}
    found: dict[tuple, float] = {}
    cutoff = None
    while heap:
        neg, idx = heapq.heappop(heap)
        score = -neg
        if cutoff is not None and score < cutoff:
            break
        seq = _path(arcs, idx)[1]
        if seq and seq not in found:
            found[seq] = score
            if len(found) == n:
                cutoff = score
        for i in range(len(idx)):
            if idx[i] + 1 < len(arcs[i]):
                nxt = idx[:i] + (idx[i] + 1,) + idx[i + 1:]
                if nxt not in seen:
                    seen.add(nxt)
                    heapq.heappush(heap, (-_path(arcs, nxt)[0], nxt))
    ranked = sorted(found.items(), key=lambda kv: (-kv[1], kv[0]))
    return [seq for seq, _ in ranked[:n]]


def exhaustive_consensus(net: ConfusionNetwork, n: int, eps_weight: float = DEFAULT_EPS_WEIGHT) -> list[tuple]:
    """Brute force over every arc combination; reference for :func:`nbest_consensus`."""
    arcs = _slot_arcs(net, eps_weight)
    best: dict[tuple, float] = {}
    for idx in itertools.product(*(range(len(a)) for a in arcs)):
        score, seq = _path(arcs, idx)
        if seq and score > best.get(seq, float("-inf")):
            best[seq] = score
    ranked = sorted(best.items(), key=lambda kv: (-kv[1], kv[0]))
    return [seq for seq, _ in ranked[:n]]


def pcn_plus_ape(candidates: CandidateSet, source: PosteriorSource, costs: AlignmentCosts = AlignmentCosts(),
                 n_consensus: int = 4, n_out: int = 4, eps_weight: float = DEFAULT_EPS_WEIGHT) -> list[tuple]:
    """Consensus variants plus the original candidates, re-ranked by APE.

    ``candidates`` should already be a small, APE-screened set in rank order.
    """
    originals = list(candidates.candidates)
    net = build_pcn(originals, costs)
    variants = nbest_consensus(net, n_consensus, eps_weight)
    pool = originals + [v for v in variants if v not in set(originals)]
    return select_top(ape_table(candidates.word, pool, source), n_out)
