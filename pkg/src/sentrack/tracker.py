"""Detection-based single-object tracking by Viterbi over a clip's detection lattice.

A track picks one detection per frame. Its score is the sum of the picked
detections' normalized scores plus the motion coherence of each
consecutive pair; the best track maximizes that sum.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

NEG_INF = float("-inf")

# motion-coherence sigmoid: centre in canonical pixels, negative slope
COHERENCE_CENTER = 50.0
COHERENCE_SCALE = -1.0 / 11.0


def _sigmoid(z):
    if z >= 0:
        return 1.0 / (1.0 + math.exp(-z))
    e = math.exp(z)
    return e / (1.0 + e)


def projected_distance(prev, cur):
    """Distance from ``prev`` pushed one frame along its flow to ``cur``'s centre."""
    return math.hypot(prev.cx + prev.vx - cur.cx, prev.cy + prev.vy - cur.cy)


def motion_coherence(prev, cur):
    d = projected_distance(prev, cur)
    return _sigmoid(COHERENCE_SCALE * (d - COHERENCE_CENTER))


def coherence_matrix(prev_dets, cur_dets):
    """``g[i, j]`` for every pair of consecutive-frame detections (vectorized)."""
    if not prev_dets or not cur_dets:
        return np.zeros((len(prev_dets), len(cur_dets)))
    px = np.array([d.cx + d.vx for d in prev_dets])
    py = np.array([d.cy + d.vy for d in prev_dets])
    cx = np.array([d.cx for d in cur_dets])
    cy = np.array([d.cy for d in cur_dets])
    dist = np.hypot(px[:, None] - cx[None, :], py[:, None] - cy[None, :])
    z = COHERENCE_SCALE * (dist - COHERENCE_CENTER)
    # logistic via tanh stays finite for any z
    return 0.5 * (1.0 + np.tanh(0.5 * z))


@dataclass(frozen=True)
class Track:
    class_label: str
    picks: tuple        # index into each frame's class list
    score: float
    detections: tuple = ()

    def boxes(self):
        return [list(d.box) for d in self.detections]

    def to_json(self, clip_id=None):
        out = {"class": self.class_label, "score": self.score,
               "picks": list(self.picks), "boxes": self.boxes()}
        if clip_id is not None:
            out = {"clip": clip_id, **out}
        return out


def track_terms(dets):
    """The f and g terms of a track in frame order."""
    terms = [dets[0].f]
    for prev, cur in zip(dets, dets[1:]):
        terms.append(cur.f)
        terms.append(motion_coherence(prev, cur))
    return terms


def track_score(dets):
    """Exactly rounded score of a fixed detection sequence."""
    return math.fsum(track_terms(dets))


def best_track(clip, class_label):
    """Highest-scoring track of ``class_label`` through ``clip``, or None.

    None means some frame has no detection of the class. Equal-scoring
    predecessors resolve to the lower detection index. The returned score
    is re-evaluated exactly over the winning path.
    """
    frames = [clip.detections(t, class_label) for t in range(len(clip))]
    if not frames or any(len(fr) == 0 for fr in frames):
        return None
    score = np.array([d.f for d in frames[0]])
    back = []
    for t in range(1, len(frames)):
        cand = score[:, None] + coherence_matrix(frames[t - 1], frames[t])
        arg = cand.argmax(axis=0)
        back.append(arg)
        score = cand[arg, np.arange(len(frames[t]))] + np.array([d.f for d in frames[t]])
    j = int(score.argmax())
    picks = [j]
    for arg in reversed(back):
        j = int(arg[j])
        picks.append(j)
    picks.reverse()
    dets = tuple(frames[t][j] for t, j in enumerate(picks))
    return Track(class_label, tuple(picks), track_score(dets), dets)
