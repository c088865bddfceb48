"""Exact Euclidean ranking of BoG vectors and the replicated query protocol."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import InvalidInputError


@dataclass(frozen=True)
class RankedList:
    query_id: str
    entries: tuple  # ((video_id, distance), ...)

    def ids(self):
        return [vid for vid, _ in self.entries]


@dataclass(frozen=True)
class QueryPlan:
    replication_seeds: tuple
    query_fraction: float
    # one dict per replication: genre -> tuple of query video ids
    queries_per_replication: tuple

    def replication(self, i):
        return self.queries_per_replication[i]


def _vec(x):
    return x.histogram if hasattr(x, "histogram") else np.asarray(x, dtype=np.float64)


def l2_distance(a, b):
    va, vb = _vec(a), _vec(b)
    if va.shape != vb.shape:
        raise InvalidInputError(f"dimension mismatch: {va.shape[0]} vs {vb.shape[0]}")
    d = va - vb
    return float(np.sqrt(np.sum(d * d)))


class Corpus:
    """Immutable matrix view of a BoG collection for repeated ranking."""

    def __init__(self, bogs):
        self.ids = [b.video_id for b in bogs]
        if len(set(self.ids)) != len(self.ids):
            raise InvalidInputError("duplicate video ids in corpus")
        self.index = {vid: i for i, vid in enumerate(self.ids)}
        dims = {len(b) for b in bogs}
        if len(dims) > 1:
            raise InvalidInputError("corpus vectors have differing dimensionality")
        self.matrix = np.vstack([b.histogram for b in bogs]) if bogs else np.zeros((0, 0))
        self.bogs = list(bogs)

    def rank(self, query):
        q = _vec(query)
        keep = [i for i, vid in enumerate(self.ids) if vid != query.video_id]
        if not keep:
            raise InvalidInputError("corpus is empty once the query is excluded")
        if q.shape[0] != self.matrix.shape[1]:
            raise InvalidInputError(f"dimension mismatch: {q.shape[0]} vs {self.matrix.shape[1]}")
        diff = self.matrix[keep] - q
        dist = np.sqrt(np.sum(diff * diff, axis=1))
        ids = [self.ids[i] for i in keep]
        order = sorted(range(len(keep)), key=lambda j: (dist[j], ids[j]))
        return RankedList(query.video_id, tuple((ids[j], float(dist[j])) for j in order))


def rank(query, corpus):
    return Corpus(corpus).rank(query)


def query_count(n, fraction):
    """``max(1, round(fraction * n))`` with halves rounded up."""
    return max(1, int(math.floor(fraction * n + 0.5)))


def build_query_plan(genre_of, fraction=0.05, seeds=(0, 1, 2, 3, 4), genres=None):
    """Select per-genre query ids for each replication seed.

    ``genre_of`` maps video id to genre. ``genres`` optionally lists genres that
    must be present; a listed genre with no videos is an error.
    """
    if not 0.0 < fraction <= 1.0:
        raise InvalidInputError(f"query fraction must lie in (0, 1], got {fraction}")
    by_genre = {}
    for vid in sorted(genre_of):
        by_genre.setdefault(genre_of[vid], []).append(vid)
    if genres is not None:
        empty = [g for g in genres if g not in by_genre]
        if empty:
            raise InvalidInputError(f"genres without any video: {empty}")
    reps = []
    for seed in seeds:
        rng = np.random.default_rng(seed)
        plan = {}
        for g in sorted(by_genre):
            vids = by_genre[g]
            picks = rng.choice(len(vids), size=query_count(len(vids), fraction), replace=False)
            plan[g] = tuple(vids[i] for i in sorted(picks))
        reps.append(plan)
    return QueryPlan(tuple(seeds), fraction, tuple(reps))


def run_retrieval(plan, corpus):
    """One ranked list per query per replication, keyed by replication index."""
    c = corpus if isinstance(corpus, Corpus) else Corpus(corpus)
    out = {}
    for r, queries in enumerate(plan.queries_per_replication):
        lists = []
        for g in sorted(queries):
            for qid in queries[g]:
                if qid not in c.index:
                    raise InvalidInputError(f"query id {qid!r} not found in corpus")
                lists.append(c.rank(c.bogs[c.index[qid]]))
        out[r] = lists
    return out


def write_trec_run(lists, path, run_tag="bog"):
    with open(path, "w") as fh:
        for rl in lists:
            for pos, (vid, dist) in enumerate(rl.entries, start=1):
                fh.write(f"{rl.query_id} Q0 {vid} {pos} {dist!r} {run_tag}\n")
