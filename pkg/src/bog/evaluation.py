"""Retrieval effectiveness (AP, P@k), replication confidence intervals and paired comparisons."""

from __future__ import annotations

import csv
import json
import math
import warnings
from dataclasses import dataclass, field

import numpy as np
from scipy import special

from .errors import BoGWarning, InvalidInputError


@dataclass(frozen=True)
class RelevanceJudge:
    genre_of: dict

    def relevant(self, video_id, query_genre):
        return self.genre_of[video_id] == query_genre


def _relevance(ranked, judge, query_genre):
    return [judge.relevant(vid, query_genre) for vid, _ in ranked.entries]


def average_precision(ranked, judge, query_genre):
    rel = _relevance(ranked, judge, query_genre)
    R = sum(rel)
    if R == 0:
        raise InvalidInputError(f"query {ranked.query_id!r} has no relevant items in the corpus")
    hits = 0
    total = 0.0
    for k, r in enumerate(rel, start=1):
        if r:
            hits += 1
            total += hits / k
    return total / R


def precision_at_k(ranked, judge, query_genre, k=10):
    if k < 1:
        raise InvalidInputError("k must be >= 1")
    rel = _relevance(ranked, judge, query_genre)
    return sum(rel[:k]) / k


# ---------------------------------------------------------------------------
# statistics


def student_t_quantile(p, df):
    """Inverse CDF of Student's t via the inverse regularized incomplete beta function."""
    if not 0.0 < p < 1.0:
        raise InvalidInputError(f"p must lie in (0, 1), got {p}")
    if df < 1:
        raise InvalidInputError(f"df must be >= 1, got {df}")
    if p == 0.5:
        return 0.0
    tail = min(p, 1.0 - p)
    # P(|T| > t) = I_{df/(df+t^2)}(df/2, 1/2)
    x = special.betaincinv(df / 2.0, 0.5, 2.0 * tail)
    t = math.sqrt(df * (1.0 - x) / x)
    return t if p > 0.5 else -t


def _mean_halfwidth(values, level):
    v = np.asarray(values, dtype=np.float64)
    n = v.size
    if n < 2:
        raise InvalidInputError("need at least two values for a confidence interval")
    if not 0.0 < level < 1.0:
        raise InvalidInputError(f"confidence level must lie in (0, 1), got {level}")
    mean = float(v.mean())
    s = float(v.std(ddof=1))
    return mean, student_t_quantile((1.0 + level) / 2.0, n - 1) * s / math.sqrt(n)


def aggregate_replications(per_replication_means, level=0.99):
    """``(mean, lo, hi)`` of a t-based confidence interval over replication means."""
    mean, hw = _mean_halfwidth(per_replication_means, level)
    return mean, mean - hw, mean + hw


@dataclass(frozen=True)
class PairedDiffInterval:
    system_a: str
    system_b: str
    metric: str
    lo: float
    hi: float
    significant: bool

    @property
    def better(self):
        """Name of the significantly better system, or None."""
        if not self.significant:
            return None
        return self.system_a if self.lo > 0 else self.system_b


def interval_significant(lo, hi):
    return not (lo <= 0.0 <= hi)


def paired_diff_interval(per_class_a, per_class_b, level=0.99, system_a="A", system_b="B", metric="MAP"):
    a = np.asarray(per_class_a, dtype=np.float64)
    b = np.asarray(per_class_b, dtype=np.float64)
    if a.shape != b.shape:
        raise InvalidInputError(f"paired lists differ in length: {a.size} vs {b.size}")
    mean, hw = _mean_halfwidth(a - b, level)
    lo, hi = mean - hw, mean + hw
    return PairedDiffInterval(system_a, system_b, metric, lo, hi, interval_significant(lo, hi))


# ---------------------------------------------------------------------------
# reports


@dataclass
class EvalReport:
    map_mean: float
    map_ci: tuple | None
    p10_mean: float
    p10_ci: tuple | None
    per_genre: dict  # genre -> (map, p10)
    replication_count: int
    per_replication_map: list = field(default_factory=list)
    per_replication_p10: list = field(default_factory=list)
    query_count: int = 0
    k: int = 10
    level: float = 0.99
    warnings: list = field(default_factory=list)

    def as_dict(self):
        def ci(c):
            return None if c is None else {"lo": c[0], "hi": c[1], "half_width": (c[1] - c[0]) / 2.0}

        return {
            "map_mean": self.map_mean,
            "map_ci": ci(self.map_ci),
            "p_at_k_mean": self.p10_mean,
            "p_at_k_ci": ci(self.p10_ci),
            "k": self.k,
            "level": self.level,
            "replication_count": self.replication_count,
            "query_count": self.query_count,
            "per_replication_map": self.per_replication_map,
            "per_replication_p_at_k": self.per_replication_p10,
            "per_genre": {str(g): {"map": m, "p_at_k": p} for g, (m, p) in self.per_genre.items()},
            "warnings": self.warnings,
        }


def per_genre_report(runs, judge, k=10, level=0.99, genres=None):
    """Aggregate ranked lists of every replication into an :class:`EvalReport`.

    Overall scores are means of per-replication means (CI from
    :func:`aggregate_replications`); per-genre scores pool that genre's queries
    across all replications.
    """
    if not runs:
        raise InvalidInputError("no replications to evaluate")
    notes = []
    pooled = {}
    rep_map, rep_p = [], []
    n_queries = 0
    for r in sorted(runs):
        aps, pks = [], []
        for rl in runs[r]:
            g = judge.genre_of[rl.query_id]
            try:
                ap = average_precision(rl, judge, g)
            except InvalidInputError as exc:
                msg = f"replication {r}: {exc}; query excluded"
                warnings.warn(msg, BoGWarning, stacklevel=2)
                notes.append(msg)
                continue
            pk = precision_at_k(rl, judge, g, k)
            aps.append(ap)
            pks.append(pk)
            pooled.setdefault(g, []).append((ap, pk))
        if not aps:
            raise InvalidInputError(f"replication {r} has no evaluable queries")
        n_queries += len(aps)
        rep_map.append(float(np.mean(aps)))
        rep_p.append(float(np.mean(pks)))
    per_genre = {}
    for g in sorted(pooled):
        arr = np.array(pooled[g])
        per_genre[g] = (float(arr[:, 0].mean()), float(arr[:, 1].mean()))
    for g in genres or ():
        if g not in pooled:
            msg = f"genre {g!r} has no queries in any replication; omitted"
            warnings.warn(msg, BoGWarning, stacklevel=2)
            notes.append(msg)
    if len(rep_map) >= 2:
        m, lo, hi = aggregate_replications(rep_map, level)
        map_ci = (lo, hi)
        p, plo, phi = aggregate_replications(rep_p, level)
        p_ci = (plo, phi)
    else:
        m, p = rep_map[0], rep_p[0]
        map_ci = p_ci = None
    return EvalReport(
        map_mean=m,
        map_ci=map_ci,
        p10_mean=p,
        p10_ci=p_ci,
        per_genre=per_genre,
        replication_count=len(rep_map),
        per_replication_map=rep_map,
        per_replication_p10=rep_p,
        query_count=n_queries,
        k=k,
        level=level,
        warnings=notes,
    )


def write_report_json(report, path, extra=None):
    payload = report.as_dict()
    if extra:
        payload.update(extra)
    with open(path, "w") as fh:
        json.dump(payload, fh, indent=2, sort_keys=True)
        fh.write("\n")


def write_report_csv(report, path, header_comment=None):
    """One row per genre plus a trailing ``__overall__`` row."""
    with open(path, "w", newline="") as fh:
        if header_comment:
            fh.write(f"# {header_comment}\n")
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["genre", "map", "p_at_k", "map_ci_lo", "map_ci_hi", "p_at_k_ci_lo", "p_at_k_ci_hi"])
        for g, (m, p) in report.per_genre.items():
            w.writerow([g, repr(float(m)), repr(float(p)), "", "", "", ""])
        mlo, mhi = report.map_ci or ("", "")
        plo, phi = report.p10_ci or ("", "")
        w.writerow(["__overall__", repr(float(report.map_mean)), repr(float(report.p10_mean)), mlo, mhi, plo, phi])


def read_per_class_csv(path):
    """Read ``genre -> (map, p_at_k)`` from a report CSV, skipping the overall row."""
    scores = {}
    with open(path, newline="") as fh:
        rows = csv.DictReader(line for line in fh if not line.startswith("#"))
        for row in rows:
            if row["genre"] == "__overall__":
                continue
            scores[row["genre"]] = (float(row["map"]), float(row["p_at_k"]))
    return scores


def compare_per_class(scores_a, scores_b, name_a="A", name_b="B", level=0.99):
    """Paired intervals for MAP and P@k over the genres both systems report."""
    shared = sorted(set(scores_a) & set(scores_b))
    if len(shared) < 2:
        raise InvalidInputError("need at least two shared genres to compare systems")
    out = []
    for col, metric in ((0, "MAP"), (1, "P10")):
        a = [scores_a[g][col] for g in shared]
        b = [scores_b[g][col] for g in shared]
        out.append(paired_diff_interval(a, b, level, name_a, name_b, metric))
    return out


def comparison_markdown(rows, level=0.99):
    """Markdown table of paired-difference intervals, one row per system pair."""
    pairs = {}
    for iv in rows:
        pairs.setdefault((iv.system_a, iv.system_b), {})[iv.metric] = iv
    pct = f"{level * 100:g}%"
    lines = [
        f"Paired t-test, {pct} confidence intervals of per-class differences",
        "",
        "| Approach | MAP min | MAP max | MAP significant | P10 min | P10 max | P10 significant |",
        "|---|---|---|---|---|---|---|",
    ]
    for (a, b), by_metric in pairs.items():
        cells = [f"{a} - {b}"]
        for metric in ("MAP", "P10"):
            iv = by_metric.get(metric)
            if iv is None:
                cells += ["", "", ""]
            else:
                cells += [f"{iv.lo:.3f}", f"{iv.hi:.3f}", "yes" if iv.significant else "no"]
        lines.append("| " + " | ".join(cells) + " |")
    return "\n".join(lines) + "\n"
