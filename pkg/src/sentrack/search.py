"""Corpus indexing, sentence search and a word-order-blind baseline."""

from __future__ import annotations

import hashlib
import json
import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass
from pathlib import Path

from .detections import CLIP_LENGTH, CLIP_OVERLAP, Clip, Detection, split_clips
from .errors import DataError
from .query import parse
from .sentence_tracker import DEFAULT_PRUNE, joint_score
from .tracker import best_track

NEG_INF = float("-inf")
CACHE_FORMAT = 1
MANIFEST = "manifest.json"


def _dump(obj):
    return json.dumps(obj, sort_keys=True, separators=(",", ":")).encode()


def _clip_to_json(clip):
    return {
        "clip": clip.clip_id, "video": clip.video_id, "start": clip.start_frame,
        "frames": [{cls: [d.to_json() for d in dets] for cls, dets in fr.items()} for fr in clip.frames],
    }


def _clip_from_json(d):
    frames = tuple({cls: tuple(Detection.from_json(x) for x in dets) for cls, dets in fr.items()}
                   for fr in d["frames"])
    return Clip(d["clip"], d["video"], d["start"], frames)


class DetectionCache:
    """Query-independent per-clip detection tables, optionally persisted.

    On disk: one JSON file per video plus ``manifest.json`` recording each
    file's SHA-256.
    """

    def __init__(self, clips=(), path=None):
        self.path = Path(path) if path is not None else None
        self._clips = {c.clip_id: c for c in clips}
        self.writes = 0

    def __len__(self):
        return len(self._clips)

    def __contains__(self, clip_id):
        return clip_id in self._clips

    def get(self, clip_id):
        try:
            return self._clips[clip_id]
        except KeyError:
            raise DataError(f"no clip {clip_id!r} in cache") from None

    def clips(self):
        return [self._clips[k] for k in sorted(self._clips)]

    @classmethod
    def load(cls, path):
        path = Path(path)
        mpath = path / MANIFEST
        try:
            manifest = json.loads(mpath.read_text())
        except (OSError, json.JSONDecodeError) as e:
            raise DataError(f"cannot read cache manifest: {e}", path=mpath) from e
        if manifest.get("format") != CACHE_FORMAT:
            raise DataError("unsupported cache format", path=mpath)
        clips = []
        for vid in sorted(manifest["videos"]):
            entry = manifest["videos"][vid]
            fpath = path / entry["file"]
            try:
                blob = fpath.read_bytes()
            except OSError as e:
                raise DataError(str(e), path=fpath) from e
            if hashlib.sha256(blob).hexdigest() != entry["sha256"]:
                raise DataError("cache file does not match manifest hash", path=fpath)
            clips.extend(_clip_from_json(c) for c in json.loads(blob)["clips"])
        return cls(clips, path)


def index_corpus(corpus, cache_dir=None, clip_len=CLIP_LENGTH, overlap=CLIP_OVERLAP):
    """Split every video into clips and cache their canonical detections.

    Re-indexing unchanged input rewrites nothing: files whose hash already
    matches the manifest are left alone (``cache.writes`` counts files
    actually written).
    """
    clips, payloads = [], {}
    for vid in sorted(corpus.videos):
        vclips = split_clips(corpus, vid, clip_len, overlap)
        clips.extend(vclips)
        payloads[vid] = _dump({"video": vid, "clips": [_clip_to_json(c) for c in vclips]})
    cache = DetectionCache(clips, cache_dir)
    if cache_dir is None:
        return cache

    root = Path(cache_dir)
    try:
        root.mkdir(parents=True, exist_ok=True)
        mpath = root / MANIFEST
        old = {}
        if mpath.exists():
            try:
                old = json.loads(mpath.read_text()).get("videos", {})
            except json.JSONDecodeError:
                old = {}
        videos = {}
        for i, (vid, blob) in enumerate(payloads.items()):
            digest = hashlib.sha256(blob).hexdigest()
            fname = f"video-{i:05d}-{hashlib.sha256(vid.encode()).hexdigest()[:12]}.json"
            videos[vid] = {"file": fname, "sha256": digest}
            fpath = root / fname
            prev = old.get(vid)
            if prev == videos[vid] and fpath.exists() and hashlib.sha256(fpath.read_bytes()).hexdigest() == digest:
                continue
            fpath.write_bytes(blob)
            cache.writes += 1
        manifest = json.dumps({"format": CACHE_FORMAT, "clip_len": clip_len, "overlap": overlap,
                               "videos": videos}, indent=1, sort_keys=True) + "\n"
        if not mpath.exists() or mpath.read_text() != manifest:
            mpath.write_text(manifest)
            cache.writes += 1
    except OSError as e:
        raise DataError(f"cannot write cache: {e}", path=getattr(e, "filename", None) or root) from e
    return cache


@dataclass(frozen=True)
class SearchHit:
    clip_id: str
    score: float
    rank: int
    result: object = None      # SentenceScore

    def to_json(self):
        out = {"rank": self.rank, "clip": self.clip_id, "score": self.score}
        if self.result is not None:
            body = self.result.to_json()
            out["tracks"] = body["tracks"]
            out["word_paths"] = body["word_paths"]
        return out


def _score_one(job):
    clip, plan, params, lexicon, prune = job
    return joint_score(clip, plan, params, lexicon, prune)


def _evaluate(clips, plan, params, lexicon, prune, workers):
    jobs = [(c, plan, params, lexicon, prune) for c in clips]
    if workers is None or workers <= 1 or len(jobs) < 2:
        return [_score_one(j) for j in jobs]
    with ProcessPoolExecutor(max_workers=workers) as ex:
        return list(ex.map(_score_one, jobs, chunksize=max(1, len(jobs) // (4 * workers))))


def rank(scored, k=10, threshold=NEG_INF):
    """Keep finite scores >= threshold, sort descending (ties by clip id), cut to k."""
    kept = [(cid, s, r) for cid, s, r in scored if s > NEG_INF and s >= threshold]
    kept.sort(key=lambda x: (-x[1], x[0]))
    if k is not None:
        kept = kept[:k]
    return [SearchHit(cid, s, i + 1, r) for i, (cid, s, r) in enumerate(kept)]


def search(sentence, cache, params, k=10, threshold=NEG_INF, lexicon=None,
           prune=DEFAULT_PRUNE, workers=1):
    """Score every cached clip against ``sentence`` and return the top-k hits.

    Clips whose score is -inf (no tracks satisfy the sentence) are never
    returned, so fewer than k hits is a normal outcome.
    """
    plan = parse(sentence, lexicon=lexicon)
    clips = cache.clips()
    results = _evaluate(clips, plan, params, lexicon, prune, workers)
    return rank([(c.clip_id, r.score, r) for c, r in zip(clips, results)], k, threshold)


def baseline_search(classes, cache, k=10):
    """Rank clips by the summed best-track scores of ``classes``, ignoring any words."""
    scored = []
    for clip in cache.clips():
        total = []
        for cls in classes:
            tr = best_track(clip, cls)
            if tr is None:
                break
            total.append(tr.score)
        else:
            scored.append((clip.clip_id, math.fsum(total), None))
    return rank(scored, k)


def hits_to_json(sentence, hits, **extra):
    return {"sentence": sentence, **extra, "hits": [h.to_json() for h in hits]}


def format_table(hits):
    lines = [f"{'rank':>4}  {'score':>10}  clip"]
    for h in hits:
        lines.append(f"{h.rank:>4}  {h.score:>10.4f}  {h.clip_id}")
    if not hits:
        lines.append("   (no hits)")
    return "\n".join(lines)
