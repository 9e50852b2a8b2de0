"""Detection ingestion, canonical rescaling, score normalization and clip splitting.

All downstream geometry lives in a canonical 1280x720 frame so that the
predicate thresholds mean the same thing for every source resolution.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from pathlib import Path

from .errors import DataError, UnknownReferenceError

CANONICAL_WIDTH = 1280.0
CANONICAL_HEIGHT = 720.0

# slope of the detector-score sigmoid
SCORE_SLOPE = 2.0

CLIP_LENGTH = 18
CLIP_OVERLAP = 6


@dataclass(frozen=True)
class VideoMeta:
    video_id: str
    width: int
    height: int
    num_frames: int
    fps: float = 0.0

    def __post_init__(self):
        if self.width <= 0 or self.height <= 0:
            raise DataError(f"video {self.video_id!r}: width and height must be positive")
        if self.num_frames < 0:
            raise DataError(f"video {self.video_id!r}: negative frame count")


@dataclass(frozen=True)
class ClassModelMeta:
    class_label: str
    threshold_a: float


@dataclass(frozen=True)
class RawDetection:
    video_id: str
    frame: int
    class_label: str
    x: float
    y: float
    w: float
    h: float
    raw_score: float
    vx: float = 0.0
    vy: float = 0.0


@dataclass(frozen=True)
class Detection:
    """A detection in canonical space. ``f`` is the sigmoid-normalized score."""

    cx: float
    cy: float
    width: float
    height: float
    class_label: str
    f: float
    vx: float = 0.0
    vy: float = 0.0
    source_index: int = 0

    @property
    def box(self):
        return (self.cx, self.cy, self.width, self.height)

    def to_json(self):
        return {
            "cx": self.cx, "cy": self.cy, "w": self.width, "h": self.height,
            "class": self.class_label, "f": self.f,
            "vx": self.vx, "vy": self.vy, "index": self.source_index,
        }

    @classmethod
    def from_json(cls, d):
        return cls(d["cx"], d["cy"], d["w"], d["h"], d["class"], d["f"],
                   d["vx"], d["vy"], d["index"])


@dataclass(frozen=True)
class Clip:
    """Fixed-length window of frames; ``frames[t]`` maps class label to detections."""

    clip_id: str
    video_id: str
    start_frame: int
    frames: tuple

    def __len__(self):
        return len(self.frames)

    def detections(self, t, class_label):
        return self.frames[t].get(class_label, ())


@dataclass
class Corpus:
    videos: dict = field(default_factory=dict)          # video_id -> VideoMeta
    classes: dict = field(default_factory=dict)         # label -> ClassModelMeta
    # video_id -> list (per frame) of lists of RawDetection, in file order
    raw: dict = field(default_factory=dict)

    def num_detections(self):
        return sum(len(fr) for frames in self.raw.values() for fr in frames)


def normalize_score(raw_score, threshold_a):
    """Map a raw detector score into [0, 1] with a slope-2 sigmoid centred on the class threshold."""
    z = -SCORE_SLOPE * (raw_score - threshold_a)
    # split on sign so exp never overflows
    if z >= 0:
        e = math.exp(-z)
        return e / (1.0 + e)
    return 1.0 / (1.0 + math.exp(z))


def rescale_to_canonical(raw, meta):
    """Return ``((cx, cy, w, h), (vx, vy))`` in canonical pixels.

    x-extents and vx scale by 1280/width, y-extents and vy by 720/height.
    """
    sx = CANONICAL_WIDTH / meta.width
    sy = CANONICAL_HEIGHT / meta.height
    w = raw.w * sx
    h = raw.h * sy
    cx = raw.x * sx + w / 2.0
    cy = raw.y * sy + h / 2.0
    return (cx, cy, w, h), (raw.vx * sx, raw.vy * sy)


def canonicalize(raw, meta, threshold_a, source_index):
    box, flow = rescale_to_canonical(raw, meta)
    return Detection(box[0], box[1], box[2], box[3], raw.class_label,
                     normalize_score(raw.raw_score, threshold_a),
                     flow[0], flow[1], source_index)


def clip_starts(num_frames, clip_len=CLIP_LENGTH, overlap=CLIP_OVERLAP):
    if not clip_len > overlap >= 0:
        raise ValueError("need clip_len > overlap >= 0")
    stride = clip_len - overlap
    if num_frames < clip_len:
        return []
    return list(range(0, num_frames - clip_len + 1, stride))


def split_clips(corpus, video_id, clip_len=CLIP_LENGTH, overlap=CLIP_OVERLAP):
    """Cut one video into full-length overlapping clips of canonical detections.

    Trailing frames that do not fill a whole clip are dropped.
    """
    meta = corpus.videos[video_id]
    raw_frames = corpus.raw.get(video_id, [])
    canon = []
    for t in range(meta.num_frames):
        by_class = {}
        dets = raw_frames[t] if t < len(raw_frames) else []
        for i, r in enumerate(dets):
            thr = corpus.classes[r.class_label].threshold_a
            by_class.setdefault(r.class_label, []).append(canonicalize(r, meta, thr, i))
        canon.append({k: tuple(v) for k, v in sorted(by_class.items())})
    clips = []
    for s in clip_starts(meta.num_frames, clip_len, overlap):
        clips.append(Clip(f"{video_id}@{s:06d}", video_id, s, tuple(canon[s:s + clip_len])))
    return clips


def load_meta(meta_path):
    meta_path = Path(meta_path)
    try:
        doc = json.loads(meta_path.read_text())
    except (OSError, json.JSONDecodeError) as e:
        raise DataError(str(e), path=meta_path) from e
    videos, classes = {}, {}
    try:
        for v in doc["videos"]:
            vm = VideoMeta(str(v["id"]), int(v["width"]), int(v["height"]),
                           int(v["frames"]), float(v.get("fps", 0.0)))
            if vm.video_id in videos:
                raise DataError(f"duplicate video {vm.video_id!r}", path=meta_path)
            videos[vm.video_id] = vm
        for c in doc["classes"]:
            classes[str(c["label"])] = ClassModelMeta(str(c["label"]), float(c["threshold"]))
    except (KeyError, TypeError, ValueError) as e:
        if isinstance(e, DataError):
            raise
        raise DataError(f"bad metadata: {e}", path=meta_path) from e
    return videos, classes


_DET_FIELDS = ("video", "frame", "class", "x", "y", "w", "h", "score", "vx", "vy")


def parse_detection_line(text, path=None, lineno=None):
    try:
        rec = json.loads(text)
        missing = [k for k in _DET_FIELDS if k not in rec]
        if missing:
            raise ValueError(f"missing fields {missing}")
        frame = rec["frame"]
        if not isinstance(frame, int) or isinstance(frame, bool):
            raise ValueError("frame must be an integer")
        raw = RawDetection(str(rec["video"]), frame, str(rec["class"]),
                           float(rec["x"]), float(rec["y"]), float(rec["w"]), float(rec["h"]),
                           float(rec["score"]), float(rec["vx"]), float(rec["vy"]))
    except (json.JSONDecodeError, ValueError, TypeError, AttributeError) as e:
        raise DataError(f"malformed detection record: {e}", path=path, line=lineno) from e
    if not (raw.w > 0 and raw.h > 0):
        raise DataError("box width and height must be positive", path=path, line=lineno)
    return raw


def ingest(detections_path, meta_path):
    """Read ``detections.jsonl`` + ``meta.json`` into a :class:`Corpus`."""
    videos, classes = load_meta(meta_path)
    corpus = Corpus(videos=videos, classes=classes,
                    raw={vid: [[] for _ in range(m.num_frames)] for vid, m in videos.items()})
    detections_path = Path(detections_path)
    try:
        fh = detections_path.open()
    except OSError as e:
        raise DataError(str(e), path=detections_path) from e
    with fh:
        for lineno, line in enumerate(fh, 1):
            if not line.strip():
                continue
            raw = parse_detection_line(line, detections_path, lineno)
            meta = videos.get(raw.video_id)
            if meta is None:
                raise UnknownReferenceError(f"unknown video {raw.video_id!r}",
                                            path=detections_path, line=lineno)
            if raw.class_label not in classes:
                raise UnknownReferenceError(f"unknown class {raw.class_label!r}",
                                            path=detections_path, line=lineno)
            if not 0 <= raw.frame < meta.num_frames:
                raise UnknownReferenceError(
                    f"frame {raw.frame} outside [0, {meta.num_frames}) for video {raw.video_id!r}",
                    path=detections_path, line=lineno)
            corpus.raw[raw.video_id][raw.frame].append(raw)
    return corpus


def all_clips(corpus, clip_len=CLIP_LENGTH, overlap=CLIP_OVERLAP):
    clips = []
    for vid in sorted(corpus.videos):
        clips.extend(split_clips(corpus, vid, clip_len, overlap))
    return clips
