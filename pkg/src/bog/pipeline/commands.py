"""End-to-end stages: extract, train, encode, evaluate, compare."""

from __future__ import annotations

import csv
import dataclasses
import hashlib
import json
import logging
import time
import warnings
from concurrent.futures import ProcessPoolExecutor
from pathlib import Path

from ..classifier import (
    LabeledFeature,
    evaluate_accuracy,
    load_model,
    sample_training_frames,
    save_model,
    train,
)
from ..descriptors import Descriptor, DescriptorConfig, FeatureVector, Image, descriptor_length, extract
from ..encoder import VideoRecord, encode_corpus, write_bog_csv
from ..errors import BoGWarning, InvalidInputError
from ..evaluation import (
    RelevanceJudge,
    compare_per_class,
    comparison_markdown,
    per_genre_report,
    read_per_class_csv,
    write_report_csv,
    write_report_json,
)
from ..retrieval import Corpus, build_query_plan, run_retrieval, write_trec_run
from .cache import FeatureCache, bogs_to_cache, cache_to_bogs
from .config import BOS_DIMENSIONALITY, RunConfig
from .manifest import list_frames

log = logging.getLogger(__name__)


def cache_path(out_dir, split, descriptor):
    return Path(out_dir) / f"features_{split}_{Descriptor.parse(descriptor).name}.bogf"


def _extract_one(args):
    path, descriptor, cfg_dict = args
    try:
        cfg = DescriptorConfig(**cfg_dict)
        return extract(Image.from_file(path), descriptor, cfg).values, None
    except Exception as exc:  # undecodable frames are recorded, not fatal
        return None, f"{type(exc).__name__}: {exc}"


def _write_json(path, payload):
    with open(path, "w") as fh:
        json.dump(payload, fh, indent=2, sort_keys=True)
        fh.write("\n")


def _config_comment(run_cfg, kind="run"):
    h = {"run": run_cfg.run_hash, "features": run_cfg.feature_hash, "train": run_cfg.train_hash}[kind]()
    return f"config_hash={h.hex()}"


# ---------------------------------------------------------------------------


def cmd_extract(manifest, run_cfg, out_dir, splits=("train", "test"), jobs=1, checkpoint_every=1000):
    """Extract one feature cache per split; resumes from an existing cache with the same config hash."""
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    descriptor = run_cfg.descriptor
    dim = descriptor_length(descriptor, run_cfg.descriptor_config)
    fhash = run_cfg.feature_hash()
    summary = {}
    for split in splits:
        path = cache_path(out_dir, split, descriptor)
        if path.exists():
            cache = FeatureCache.load(path)
            if cache.config_hash != fhash or cache.descriptor != descriptor:
                raise InvalidInputError(
                    f"{path} was built with config hash {cache.config_hash.hex()} "
                    f"({cache.descriptor.name}); current config hash is {fhash.hex()} ({descriptor.name}). "
                    "Refusing to resume; remove the file or use a different output directory."
                )
        else:
            cache = FeatureCache(descriptor, dim, fhash)
        todo = []
        for entry in manifest.split(split):
            for idx, frame in enumerate(list_frames(entry.frame_dir)):
                if (entry.video_id, idx) not in cache:
                    todo.append((entry.video_id, idx, frame))
        errors = []
        start = time.perf_counter()
        cfg_dict = run_cfg.descriptor_config.as_dict()
        tasks = [(str(frame), int(descriptor), cfg_dict) for _, _, frame in todo]
        done = 0
        pool = ProcessPoolExecutor(max_workers=jobs) if jobs > 1 and len(tasks) > 1 else None
        try:
            results = pool.map(_extract_one, tasks, chunksize=32) if pool else map(_extract_one, tasks)
            for (vid, idx, frame), (values, err) in zip(todo, results):
                if err is not None:
                    errors.append((vid, idx, str(frame), err))
                else:
                    cache.add(vid, idx, values)
                done += 1
                if checkpoint_every and done % checkpoint_every == 0:
                    cache.save(path)
        finally:
            if pool:
                pool.shutdown()
        elapsed = time.perf_counter() - start
        cache.save(path)
        rate = done / elapsed if elapsed > 0 else float("inf")
        log.info("extract %s/%s: %d new frames in %.2fs (%.1f frames/s), %d cached, %d errors",
                 split, descriptor.name, done, elapsed, rate, len(cache), len(errors))
        err_path = out_dir / f"extract_errors_{split}_{descriptor.name}.csv"
        with open(err_path, "w", newline="") as fh:
            fh.write(f"# config_hash={fhash.hex()}\n")
            w = csv.writer(fh, lineterminator="\n")
            w.writerow(["video_id", "frame_index", "path", "error"])
            w.writerows(errors)
        summary[split] = {"path": str(path), "new": done, "entries": len(cache), "errors": len(errors), "frames_per_second": rate}
    return summary


def _pool_from_cache(cache, manifest, split):
    """Labeled frames of one split, in (video_id, frame index) order."""
    entries = {e.video_id: e for e in manifest.split(split)}
    pool = []
    for (vid, idx) in sorted(cache.entries):
        if vid in entries:
            g = manifest.genre_index(entries[vid])
            pool.append(LabeledFeature(FeatureVector(cache.descriptor, cache.entries[(vid, idx)]), g))
    return pool


def _check_cache_matches(cache, run_cfg, path):
    if cache.descriptor != run_cfg.descriptor or cache.config_hash != run_cfg.feature_hash():
        raise InvalidInputError(
            f"{path}: cache descriptor {cache.descriptor.name} / hash {cache.config_hash.hex()} does not match "
            f"configured {run_cfg.descriptor.name} / {run_cfg.feature_hash().hex()}"
        )


def cmd_train(manifest, train_cache_path, run_cfg, out_dir, test_cache_path=None, sweep=None):
    """Sample N frames per genre, train, and report held-out (and test) accuracy for each N."""
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    cache = FeatureCache.load(train_cache_path)
    _check_cache_matches(cache, run_cfg, train_cache_path)
    pool = _pool_from_cache(cache, manifest, "train")
    present = {lf.genre for lf in pool}
    missing = [manifest.genres.labels[g] for g in range(manifest.genres.G) if g not in present]
    if missing:
        raise InvalidInputError(f"train cache has no frames for genres {missing}")
    test_pool = None
    if test_cache_path is not None:
        tcache = FeatureCache.load(test_cache_path)
        _check_cache_matches(tcache, run_cfg, test_cache_path)
        test_pool = _pool_from_cache(tcache, manifest, "test") or None
    sizes = list(sweep) if sweep else [run_cfg.train.frames_per_genre]
    rows = []
    models = []
    for N in sizes:
        cfg = run_cfg.replace(train=dataclasses.replace(run_cfg.train, frames_per_genre=N))
        with warnings.catch_warnings(record=True) as caught:
            warnings.simplefilter("always", BoGWarning)
            train_set, held_out = sample_training_frames(pool, N, cfg.train.seed)
        notes = [str(w.message) for w in caught if issubclass(w.category, BoGWarning)]
        for n in notes:
            log.warning(n)
        model = train(train_set, manifest.genres, cfg.train)
        model.config_hash = cfg.feature_hash()
        model.train_hash = cfg.train_hash()
        name = "model.bogm" if len(sizes) == 1 else f"model_N{N}.bogm"
        save_model(model, out_dir / name)
        models.append(out_dir / name)
        row = {
            "frames_per_genre": N,
            "model": name,
            "train_frames": len(train_set),
            "train_accuracy": evaluate_accuracy(model, train_set),
            "held_out_frames": len(held_out),
            "held_out_accuracy": evaluate_accuracy(model, held_out) if held_out else None,
            "test_frames": len(test_pool) if test_pool else 0,
            "test_accuracy": evaluate_accuracy(model, test_pool) if test_pool else None,
            "config_hash": model.train_hash.hex(),
            "warnings": notes,
        }
        rows.append(row)
        log.info("trained N=%d: held-out accuracy %s", N, row["held_out_accuracy"])
    _write_json(out_dir / "accuracy.json", {"descriptor": run_cfg.descriptor.name, "rows": rows, "config": run_cfg.as_dict()})
    with open(out_dir / "accuracy.csv", "w", newline="") as fh:
        fh.write(f"# {_config_comment(run_cfg, 'features')}\n")
        w = csv.writer(fh, lineterminator="\n")
        cols = ["frames_per_genre", "train_frames", "train_accuracy", "held_out_frames", "held_out_accuracy", "test_frames", "test_accuracy"]
        w.writerow(["descriptor"] + cols)
        for row in rows:
            w.writerow([run_cfg.descriptor.name] + ["" if row[c] is None else row[c] for c in cols])
    return rows, models


def cmd_encode(manifest, cache_path_, model_path, out_dir, split="test", jobs=1):
    """Encode every video of ``split`` into a BoG vector; writes ``bog.bogf``, ``bog.csv`` and an error CSV."""
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    cache = FeatureCache.load(cache_path_)
    model = load_model(model_path)
    if cache.descriptor != model.descriptor or cache.config_hash != model.config_hash:
        raise InvalidInputError(
            f"model ({model.descriptor.name}, feature hash {model.config_hash.hex()}) does not match "
            f"cache ({cache.descriptor.name}, feature hash {cache.config_hash.hex()})"
        )
    frames = cache.by_video()
    videos = [
        VideoRecord(e.video_id, manifest.genre_index(e), frames.get(e.video_id, ()))
        for e in sorted(manifest.split(split), key=lambda e: e.video_id)
    ]
    bogs, errors = encode_corpus(model, videos, jobs=jobs)
    bog_hash = hashlib.sha256(model.config_hash + model.train_hash + split.encode()).digest()
    bogs_to_cache(bogs, model.descriptor, bog_hash).save(out_dir / "bog.bogf")
    write_bog_csv(bogs, out_dir / "bog.csv")
    with open(out_dir / "encode_errors.csv", "w", newline="") as fh:
        fh.write(f"# config_hash={bog_hash.hex()}\n")
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["video_id", "error"])
        w.writerows(errors)
    for vid, msg in errors:
        log.warning("encode %s: %s", vid, msg)
    return bogs, errors


def cmd_evaluate(manifest, bog_path, run_cfg, out_dir, compare=None, name="BoG", compare_name="other"):
    """Replicated query-by-example retrieval over the BoG file; writes reports and TREC runs."""
    out_dir = Path(out_dir)
    (out_dir / "runs").mkdir(parents=True, exist_ok=True)
    bog_cache = FeatureCache.load(bog_path)
    bogs = cache_to_bogs(bog_cache)
    if not bogs:
        raise InvalidInputError(f"{bog_path} holds no BoG vectors")
    known = manifest.by_id()
    missing = [b.video_id for b in bogs if b.video_id not in known]
    if missing:
        raise InvalidInputError(f"BoG ids absent from manifest: {missing[:10]}")
    genre_of = {b.video_id: known[b.video_id].genre for b in bogs}
    plan = build_query_plan(genre_of, run_cfg.query_fraction, run_cfg.replication_seeds)
    runs = run_retrieval(plan, Corpus(bogs))
    run_hash = run_cfg.run_hash().hex()
    tag = f"bog-{run_hash[:12]}"
    for r, lists in runs.items():
        write_trec_run(lists, out_dir / "runs" / f"replication_{r}.trec", run_tag=tag)
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", BoGWarning)
        report = per_genre_report(runs, RelevanceJudge(genre_of), k=run_cfg.k, level=run_cfg.level,
                                  genres=manifest.genres.labels)
    G = len(bogs[0])
    extra = {
        "config_hash": run_hash,
        "bog_file_hash": bog_cache.config_hash.hex(),
        "descriptor": bog_cache.descriptor.name,
        "bog_dimensionality": G,
        "compactness": {
            "bos_dimensionality": BOS_DIMENSIONALITY,
            "reduction_vs_bos": 1.0 - G / BOS_DIMENSIONALITY,
            "float64_values_per_video": G,
        },
        "default_category_note": "all genres, including any default category, are sampled for queries uniformly",
        "query_plan": [{g: list(q) for g, q in rep.items()} for rep in plan.queries_per_replication],
        "config": run_cfg.as_dict(),
    }
    write_report_json(report, out_dir / "report.json", extra)
    write_report_csv(report, out_dir / "report.csv", header_comment=f"config_hash={run_hash}")
    with open(out_dir / "per_genre.csv", "w", newline="") as fh:
        fh.write(f"# config_hash={run_hash}\n")
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["genre", "map", "p_at_k"])
        for g, (m, p) in report.per_genre.items():
            w.writerow([g, repr(float(m)), repr(float(p))])
    if compare is not None:
        cmd_compare(out_dir / "report.csv", compare, out_dir, name_a=name, name_b=compare_name, level=run_cfg.level)
    return report


def cmd_compare(csv_a, csv_b, out_dir, name_a="A", name_b="B", level=0.99):
    """Paired-difference intervals (MAP, P@k) between two per-class score CSVs."""
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    rows = compare_per_class(read_per_class_csv(csv_a), read_per_class_csv(csv_b), name_a, name_b, level)
    (out_dir / "comparison.md").write_text(comparison_markdown(rows, level))
    _write_json(out_dir / "comparison.json", {
        "level": level,
        "intervals": [
            {"system_a": r.system_a, "system_b": r.system_b, "metric": r.metric, "lo": r.lo, "hi": r.hi,
             "significant": r.significant, "better": r.better}
            for r in rows
        ],
    })
    return rows
