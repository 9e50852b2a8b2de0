"""Joint tracking and word recognition over the cross-product lattice.

One tracker per participant and one FSM per word run in lockstep. A joint
state at frame t is a detection index per participant plus an FSM state
per word. Its score adds detection scores, motion coherence, and the
binary (0 / -inf) word predicate and transition terms; Viterbi over the
product finds the best tracks whose words all end in their accepting
states.

The transition score is a sum of one factor per lattice axis, so the max
over predecessor states is taken one axis at a time. The cost per frame
is (product size) x (sum of axis sizes) instead of (product size)^2.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import ContractError
from .lexicon import stock_lexicon
from .predicates import TRUE, eval_expr
from .tracker import Track, coherence_matrix, track_score, track_terms

NEG_INF = float("-inf")
DEFAULT_PRUNE = 12


@dataclass(frozen=True)
class SentenceScore:
    score: float
    tracks: tuple = ()          # one Track per participant
    word_paths: tuple = ()      # one FSM state sequence per word
    plan: object = None

    @property
    def feasible(self):
        return self.score > NEG_INF

    def to_json(self, clip_id=None):
        out = {}
        if clip_id is not None:
            out["clip"] = clip_id
        out["score"] = self.score if self.feasible else None
        parts = self.plan.participants if self.plan is not None else ()
        out["tracks"] = [
            {"participant": p.index, "class": tr.class_label, "picks": list(tr.picks), "boxes": tr.boxes()}
            for p, tr in zip(parts, self.tracks)]
        words = self.plan.words if self.plan is not None else ()
        out["word_paths"] = [
            {"word": w.word, "theta": list(w.theta), "states": list(path)}
            for w, path in zip(words, self.word_paths)]
        return out


def candidates(clip, class_label, prune=DEFAULT_PRUNE):
    """Per frame, the top-``prune`` detections of a class by score, in list order.

    Returns lists of ``(class_list_index, Detection)``.
    """
    out = []
    for t in range(len(clip)):
        dets = clip.detections(t, class_label)
        idx = range(len(dets))
        if prune is not None and len(dets) > prune:
            idx = sorted(sorted(idx, key=lambda i: (-dets[i].f, i))[:prune])
        out.append([(i, dets[i]) for i in idx])
    return out


def _place(arr, axes, ndim):
    """Reshape ``arr`` (one dim per entry of ``axes``) to broadcast over ``ndim`` axes."""
    order = np.argsort(axes)
    arr = np.transpose(arr, order)
    shape = [1] * ndim
    for ax, size in zip(np.asarray(axes)[order], arr.shape):
        shape[ax] = size
    return arr.reshape(shape)


def _word_table(fsm, theta, frame_cands, params):
    """0/-inf table over (state, candidates of each distinct bound participant)."""
    parts = list(dict.fromkeys(theta))
    sizes = [len(frame_cands[p]) for p in parts]
    table = np.zeros([fsm.n_states, *sizes], dtype=bool)
    cache = {}
    for combo in np.ndindex(*sizes):
        chosen = dict(zip(parts, combo))
        binding = {role: frame_cands[p][chosen[p]][1] for role, p in zip(fsm.roles, theta)}
        for q, expr in enumerate(fsm.exprs):
            if expr is TRUE:
                table[(q, *combo)] = True
                continue
            key = (expr, combo)
            if key not in cache:
                cache[key] = eval_expr(expr, binding, params)
            table[(q, *combo)] = cache[key]
    return np.where(table, 0.0, NEG_INF), parts


def _check_plan(plan, fsms):
    L = len(plan.participants)
    if L == 0:
        raise ContractError("plan has no participants")
    for w, fsm in zip(plan.words, fsms):
        if len(w.theta) != fsm.arity:
            raise ContractError(f"word {w.word!r} has arity {fsm.arity} but theta {w.theta}")
        if any(not 0 <= p < L for p in w.theta):
            raise ContractError(f"word {w.word!r} binds a participant outside 0..{L - 1}")


def joint_score(clip, plan, params, lexicon=None, prune=DEFAULT_PRUNE):
    """Best joint assignment of tracks and accepting word paths for one clip.

    Same-class participants may not share a detection in a frame. Ties
    between predecessors go to the lower index along each lattice axis,
    and the final state is the lexicographically smallest detection tuple
    among the maxima. The returned score is re-evaluated exactly
    (``math.fsum``) over the winning assignment.
    """
    lexicon = stock_lexicon() if lexicon is None else lexicon
    fsms = [lexicon.fsm(w.word) for w in plan.words]
    _check_plan(plan, fsms)
    T = len(clip)
    if T < 1:
        raise ContractError("empty clip")
    infeasible = SentenceScore(NEG_INF, plan=plan)

    L, W = len(plan.participants), len(fsms)
    cands = [candidates(clip, p.noun_class, prune) for p in plan.participants]
    if any(len(c[t]) == 0 for c in cands for t in range(T)):
        return infeasible
    same_class = [(l, m) for l in range(L) for m in range(l + 1, L)
                  if plan.participants[l].noun_class == plan.participants[m].noun_class]
    n = L + W

    def unary(t):
        dims = [len(c[t]) for c in cands] + [f.n_states for f in fsms]
        U = np.zeros(dims)
        for l in range(L):
            U += _place(np.array([d.f for _, d in cands[l][t]]), [l], n)
        for l, m in same_class:
            il = np.array([i for i, _ in cands[l][t]])
            im = np.array([i for i, _ in cands[m][t]])
            U += _place(np.where(il[:, None] == im[None, :], NEG_INF, 0.0), [l, m], n)
        frame_cands = [c[t] for c in cands]
        for w, (wi, fsm) in enumerate(zip(plan.words, fsms)):
            table, parts = _word_table(fsm, wi.theta, frame_cands, params)
            U += _place(table, [L + w, *parts], n)
        return U

    V = unary(0)
    for w, fsm in enumerate(fsms):
        start = np.full(fsm.n_states, NEG_INF)
        start[list(fsm.start)] = 0.0
        V = V + _place(start, [L + w], n)

    word_factors = [fsm.a for fsm in fsms]
    backs = []
    for t in range(1, T):
        factors = [coherence_matrix([d for _, d in c[t - 1]], [d for _, d in c[t]]) for c in cands]
        factors += word_factors
        M = V
        step = {}
        for ax, F in enumerate(factors):
            if F.shape == (1, 1) and F[0, 0] == 0.0:
                continue
            cand = np.moveaxis(M, ax, -1)[..., :, None] + F
            arg = cand.argmax(axis=-2)
            M = np.moveaxis(np.take_along_axis(cand, arg[..., None, :], axis=-2)[..., 0, :], -1, ax)
            step[ax] = np.moveaxis(arg, -1, ax).astype(np.int16)
        backs.append(step)
        V = M + unary(t)

    final = V[(slice(None),) * L + tuple(f.accept for f in fsms)]
    flat = int(np.argmax(final))
    if final.flat[flat] == NEG_INF:
        return infeasible
    state = list(np.unravel_index(flat, final.shape)) + [f.accept for f in fsms]
    states = [tuple(int(s) for s in state)]
    for step in reversed(backs):
        cur = list(states[-1])
        for ax in sorted(step, reverse=True):
            cur[ax] = int(step[ax][tuple(cur)])
        for ax in range(n):
            if ax not in step:
                cur[ax] = 0
        states.append(tuple(cur))
    states.reverse()

    tracks, terms = [], []
    for l, p in enumerate(plan.participants):
        picked = [cands[l][t][states[t][l]] for t in range(T)]
        dets = tuple(d for _, d in picked)
        terms.extend(track_terms(dets))
        tracks.append(Track(p.noun_class, tuple(i for i, _ in picked), track_score(dets), dets))
    paths = tuple(tuple(states[t][L + w] for t in range(T)) for w in range(W))
    return SentenceScore(math.fsum(terms), tuple(tracks), paths, plan)


def feasible(clip, plan, params, lexicon=None, prune=DEFAULT_PRUNE):
    """True iff :func:`joint_score` is finite; screens cheap impossibilities first."""
    lexicon = stock_lexicon() if lexicon is None else lexicon
    T = len(clip)
    for w in plan.words:
        m = lexicon.fsm(w.word).min_length()
        if m is None or m > T:
            return False
    need = {}
    for p in plan.participants:
        need[p.noun_class] = need.get(p.noun_class, 0) + 1
    for cls, k in need.items():
        avail = min(len(clip.detections(t, cls)) for t in range(T))
        if prune is not None:
            avail = min(avail, prune)
        if avail < k:
            return False
    return joint_score(clip, plan, params, lexicon, prune).feasible
