"""Synthetic detection corpora with planted events.

Geometry is laid out in canonical 1280x720 pixels, tuned to the default
:class:`~sentrack.predicates.ParameterSet`, then mapped to each video's
source resolution. Flow is each object's displacement to the next frame
(the last frame repeats the previous displacement), plus optional noise.

Event kinds (``agent`` is the person, ``patient`` the horse):

``ride``       person drawn on top of a moving horse (IOU ~0.57, person higher)
``lead``       person ahead of a horse, both moving the same way, boxes apart
``approach``   person stands far, walks to a stationary horse, stands close
``depart``     the reverse of ``approach``
``walk``       person walks in one direction; horse stands far away
``gallop``     horse moves alone
``cross``      person and horse move in opposite directions and pass
``pass``       person walks past (through) a stationary horse
``idle``       both stationary, far apart
``empty``      clutter only
"""

from __future__ import annotations

import json
from dataclasses import asdict, dataclass, fields
from pathlib import Path

import numpy as np

from .detections import (CANONICAL_HEIGHT, CANONICAL_WIDTH, ClassModelMeta, Corpus, RawDetection,
                         VideoMeta, split_clips)
from .errors import DataError

DEFAULT_CLASSES = {"person": -0.5, "horse": -0.9}

PERSON_SIZE = (100.0, 180.0)
HORSE_SIZE = (240.0, 160.0)
GROUND_Y = 440.0          # horse centre row
RIDER_SIZE = (160.0, 200.0)   # a mounted person's box also covers the legs
RIDER_LIFT = 20.0         # rider centre sits this far above the horse centre

KINDS = ("ride", "lead", "approach", "depart", "walk", "gallop", "cross", "pass", "idle", "empty")

# sentence the planted event satisfies, and one it must not
SENTENCES = {
    "ride": ("The person rode the horse", "The horse rode the person"),
    "lead": ("The person lead the horse", "The horse lead the person"),
    "approach": ("The person approached the horse", "The horse approached the person"),
}


@dataclass
class EventSpec:
    kind: str
    video_id: str
    width: int = 1280
    height: int = 720
    num_frames: int = 18
    speed: float = 8.0            # canonical px/frame
    direction: int = 1            # +1 toward +x, -1 toward -x
    start_x: float = 320.0        # canonical x of the leading object's centre at frame 0
    gap: float = 80.0             # lead: box gap; approach/depart: far gap
    near_gap: float = 60.0        # approach/depart: close gap
    rider_lift: float = RIDER_LIFT
    score_margin: float = 1.0     # raw score above the class threshold
    score_jitter: float = 0.0
    flow_noise: float = 0.0
    dropout: float = 0.0
    clutter: int = 0              # random detections per class per frame
    seed: int = 0

    @classmethod
    def from_json(cls, d):
        names = {f.name for f in fields(cls)}
        unknown = set(d) - names
        if unknown:
            raise DataError(f"unknown event fields {sorted(unknown)}")
        return cls(**d)


def _static(x, T):
    return np.full(T, float(x))


def _moving(x0, v, T):
    return x0 + v * np.arange(T, dtype=float)


def _stop_go_stop(x0, v, T, t0, steps):
    t = np.arange(T, dtype=float)
    return x0 + v * np.clip(t - t0, 0, steps)


def _trajectories(spec):
    """Return ``{class: (xs, ys, w, h)}`` in canonical pixels."""
    T, v, d = spec.num_frames, spec.speed, spec.direction
    pw, ph = PERSON_SIZE
    hw, hh = HORSE_SIZE
    x0 = spec.start_x
    k = spec.kind
    if k == "ride":
        hx = _moving(x0, d * v, T)
        return {"horse": (hx, _static(GROUND_Y, T), hw, hh),
                "person": (hx.copy(), _static(GROUND_Y - spec.rider_lift, T), *RIDER_SIZE)}
    if k == "lead":
        px = _moving(x0, d * v, T)
        hx = px - d * (pw / 2 + hw / 2 + spec.gap)
        return {"person": (px, _static(GROUND_Y, T), pw, ph), "horse": (hx, _static(GROUND_Y, T), hw, hh)}
    if k in ("approach", "depart"):
        steps = T - 6
        travel = spec.gap - spec.near_gap
        v_eff = travel / steps
        hx = x0
        offset = pw / 2 + hw / 2
        if k == "approach":
            # person on the -direction side of the horse, walking toward it
            start = hx - d * (offset + spec.gap)
            px = _stop_go_stop(start, d * v_eff, T, 2, steps)
        else:
            start = hx - d * (offset + spec.near_gap)
            px = _stop_go_stop(start, -d * v_eff, T, 2, steps)
        return {"person": (px, _static(GROUND_Y, T), pw, ph), "horse": (_static(hx, T), _static(GROUND_Y, T), hw, hh)}
    if k == "walk":
        px = _moving(x0, d * v, T)
        far_x = 1100.0 if x0 < 640 else 180.0
        return {"person": (px, _static(300.0, T), pw, ph), "horse": (_static(far_x, T), _static(560.0, T), hw, hh)}
    if k == "gallop":
        return {"horse": (_moving(x0, d * v, T), _static(GROUND_Y, T), hw, hh)}
    if k == "cross":
        px = _moving(x0, d * v, T)
        hx = _moving(x0 + d * v * (T - 1), -d * v, T)
        return {"person": (px, _static(GROUND_Y - spec.rider_lift, T), pw, ph),
                "horse": (hx, _static(GROUND_Y, T), hw, hh)}
    if k == "pass":
        px = _moving(x0, d * v, T)
        hx = x0 + d * v * (T - 1) / 2
        return {"person": (px, _static(GROUND_Y - spec.rider_lift, T), pw, ph),
                "horse": (_static(hx, T), _static(GROUND_Y, T), hw, hh)}
    if k == "idle":
        return {"person": (_static(x0, T), _static(GROUND_Y, T), pw, ph),
                "horse": (_static(x0 + 600.0, T), _static(GROUND_Y, T), hw, hh)}
    if k == "empty":
        return {}
    raise DataError(f"unknown event kind {k!r}")


def _flows(xs):
    if len(xs) < 2:
        return np.zeros_like(xs)
    f = np.diff(xs)
    return np.append(f, f[-1])


def generate(spec, classes=None):
    """Build one video's raw detections.

    Returns ``(detections, meta, truth)`` where ``truth`` records the kind
    and, for kinds with a canonical sentence, the sentence it satisfies and
    a contrast sentence it does not.
    """
    classes = DEFAULT_CLASSES if classes is None else classes
    if spec.num_frames < 1:
        raise DataError("num_frames must be positive")
    rng = np.random.default_rng(spec.seed)
    T = spec.num_frames
    sx = spec.width / CANONICAL_WIDTH
    sy = spec.height / CANONICAL_HEIGHT
    meta = VideoMeta(spec.video_id, spec.width, spec.height, T, 6.0)

    frames = [[] for _ in range(T)]
    for cls, (xs, ys, w, h) in sorted(_trajectories(spec).items()):
        if xs.min() - w / 2 < 0 or xs.max() + w / 2 > CANONICAL_WIDTH \
                or ys.min() - h / 2 < 0 or ys.max() + h / 2 > CANONICAL_HEIGHT:
            raise DataError(f"{spec.video_id}: {cls} trajectory leaves the frame")
        if cls not in classes:
            raise DataError(f"{spec.video_id}: event kind {spec.kind!r} needs class {cls!r}")
        vx, vy = _flows(xs), _flows(ys)
        thr = classes[cls]
        for t in range(T):
            if spec.dropout and rng.random() < spec.dropout:
                continue
            fx = vx[t] + (rng.normal(0, spec.flow_noise) if spec.flow_noise else 0.0)
            fy = vy[t] + (rng.normal(0, spec.flow_noise) if spec.flow_noise else 0.0)
            score = thr + spec.score_margin + (rng.uniform(-1, 1) * spec.score_jitter if spec.score_jitter else 0.0)
            frames[t].append((cls, xs[t] - w / 2, ys[t] - h / 2, w, h, score, fx, fy))
    for t in range(T):
        for cls in sorted(classes):
            for _ in range(spec.clutter):
                w, h = rng.uniform(60, 200, size=2)
                cx = rng.uniform(w / 2, CANONICAL_WIDTH - w / 2)
                cy = rng.uniform(h / 2, CANONICAL_HEIGHT - h / 2)
                fx, fy = rng.uniform(-3, 3, size=2)
                score = classes[cls] - 1.0 + rng.uniform(-0.5, 0.5)
                frames[t].append((cls, cx - w / 2, cy - h / 2, w, h, score, fx, fy))

    dets = []
    for t, fr in enumerate(frames):
        for cls, x, y, w, h, score, fx, fy in fr:
            dets.append(RawDetection(spec.video_id, t, cls, x * sx, y * sy, w * sx, h * sy,
                                     float(score), fx * sx, fy * sy))
    truth = {"video": spec.video_id, "kind": spec.kind}
    if spec.kind in SENTENCES:
        truth["sentence"], truth["contrast"] = SENTENCES[spec.kind]
    return dets, meta, truth


def _det_record(r):
    return {"video": r.video_id, "frame": r.frame, "class": r.class_label,
            "x": r.x, "y": r.y, "w": r.w, "h": r.h, "score": r.raw_score, "vx": r.vx, "vy": r.vy}


def write_corpus(specs, out_dir, classes=None):
    """Generate every spec and write ``detections.jsonl``, ``meta.json``, ``truth.json``."""
    classes = DEFAULT_CLASSES if classes is None else classes
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    videos, truths, lines = [], [], []
    seen = set()
    for spec in specs:
        if spec.video_id in seen:
            raise DataError(f"duplicate video id {spec.video_id!r}")
        seen.add(spec.video_id)
        dets, meta, truth = generate(spec, classes)
        videos.append({"id": meta.video_id, "width": meta.width, "height": meta.height,
                       "frames": meta.num_frames, "fps": meta.fps})
        truths.append({**truth, "spec": asdict(spec)})
        lines.extend(json.dumps(_det_record(d)) for d in dets)
    (out / "detections.jsonl").write_text("".join(line + "\n" for line in lines))
    meta_doc = {"videos": videos,
                "classes": [{"label": k, "threshold": v} for k, v in sorted(classes.items())]}
    (out / "meta.json").write_text(json.dumps(meta_doc, indent=1) + "\n")
    (out / "truth.json").write_text(json.dumps(truths, indent=1) + "\n")
    return out


def corpus_from_specs(specs, classes=None):
    """Generate specs straight into an in-memory :class:`Corpus` (no files)."""
    classes = DEFAULT_CLASSES if classes is None else classes
    corpus = Corpus(classes={k: ClassModelMeta(k, v) for k, v in classes.items()})
    for spec in specs:
        if spec.video_id in corpus.videos:
            raise DataError(f"duplicate video id {spec.video_id!r}")
        dets, meta, _ = generate(spec, classes)
        corpus.videos[meta.video_id] = meta
        frames = [[] for _ in range(meta.num_frames)]
        for d in dets:
            frames[d.frame].append(d)
        corpus.raw[meta.video_id] = frames
    return corpus


def make_clip(spec, classes=None):
    """The first clip of a single generated video."""
    corpus = corpus_from_specs([spec], classes)
    return split_clips(corpus, spec.video_id, clip_len=spec.num_frames, overlap=0)[0]


def load_specs(path):
    try:
        doc = json.loads(Path(path).read_text())
    except (OSError, json.JSONDecodeError) as e:
        raise DataError(str(e), path=path) from e
    events = doc["events"] if isinstance(doc, dict) else doc
    classes = doc.get("classes") if isinstance(doc, dict) else None
    return [EventSpec.from_json(e) for e in events], classes


RESOLUTIONS = ((1280, 720), (640, 360), (336, 256), (1280, 544), (659, 333))


def discrimination_specs(n_clips=50, planted=(7, 23, 41), seed=0, clutter=2):
    """A one-clip-per-video corpus: ``ride`` at the ``planted`` positions, distractors elsewhere."""
    rng = np.random.default_rng(seed)
    distractors = [k for k in KINDS if k != "ride"]
    specs = []
    for i in range(n_clips):
        kind = "ride" if i in planted else distractors[int(rng.integers(len(distractors)))]
        direction = 1 if rng.random() < 0.5 else -1
        speed = float(rng.uniform(5.0, 9.0))
        if kind in ("ride", "lead", "walk", "gallop", "cross", "pass"):
            span = speed * 17
            lo, hi = 200.0, 1080.0 - (span if direction > 0 else 0.0)
            if direction < 0:
                lo += span
            start = float(rng.uniform(min(lo, hi), max(lo, hi)))
            if kind == "lead":
                start = 700.0 if direction > 0 else 580.0
        elif kind in ("approach", "depart"):
            start = 900.0 if direction > 0 else 380.0
        else:
            start = float(rng.uniform(150.0, 500.0))
        w, h = RESOLUTIONS[i % len(RESOLUTIONS)]
        specs.append(EventSpec(kind, f"v{i:03d}", width=w, height=h, speed=speed, direction=direction,
                               start_x=start, gap=300.0 if kind in ("approach", "depart") else 80.0,
                               clutter=clutter, score_jitter=0.3, seed=seed * 1000 + i))
    return specs
