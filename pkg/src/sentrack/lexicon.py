"""Word meanings as extended regular expressions, compiled to binary FSMs.

A word is a regular expression whose atoms are predicate expressions that
must hold of a frame's bound detections. Operators are concatenation,
``x+`` (one or more frames) and ``x{t,}`` (t or more frames). Compilation
gives each atom occurrence its own state, so every compiled machine has a
single start state, a single accepting state, and a binary transition
matrix.
"""

from __future__ import annotations

import json
from collections import deque
from dataclasses import dataclass
from importlib import resources
from pathlib import Path

import numpy as np

from .errors import ContractError, LexiconError
from .predicates import EXPR_OPS, TRUE, eval_expr, parse_expr

NEG_INF = float("-inf")


# -- regex tree ----------------------------------------------------------------

@dataclass(frozen=True)
class Atom:
    expr: object

    def to_json(self):
        return self.expr.to_json()


@dataclass(frozen=True)
class Concat:
    items: tuple

    def to_json(self):
        return ["concat", *(i.to_json() for i in self.items)]


@dataclass(frozen=True)
class Plus:
    item: object

    def to_json(self):
        return ["plus", self.item.to_json()]


@dataclass(frozen=True)
class AtLeast:
    t: int
    item: object

    def to_json(self):
        return ["atleast", self.t, self.item.to_json()]


REGEX_OPS = ("concat", "plus", "atleast")


@dataclass(frozen=True)
class WordRegex:
    name: str
    roles: tuple
    body: object

    @property
    def arity(self):
        return len(self.roles)

    def to_json(self):
        return {"name": self.name, "roles": list(self.roles), "regex": self.body.to_json()}


def parse_regex(doc, roles, word):
    if isinstance(doc, list) and doc and doc[0] in REGEX_OPS:
        op = doc[0]
        if op == "concat":
            if len(doc) < 2:
                raise LexiconError("empty concat", word)
            return Concat(tuple(parse_regex(d, roles, word) for d in doc[1:]))
        if op == "plus":
            if len(doc) != 2:
                raise LexiconError("plus takes one operand", word)
            return Plus(parse_regex(doc[1], roles, word))
        if len(doc) != 3 or not isinstance(doc[1], int) or isinstance(doc[1], bool):
            raise LexiconError("atleast takes an integer exponent and one operand", word)
        if doc[1] < 1:
            raise LexiconError(f"atleast exponent must be >= 1, got {doc[1]}", word)
        return AtLeast(doc[1], parse_regex(doc[2], roles, word))
    if doc == "true" or (isinstance(doc, list) and doc and doc[0] in EXPR_OPS):
        return Atom(parse_expr(doc, roles, word))
    raise LexiconError(f"malformed regex {doc!r}", word)


def _atoms(node):
    if isinstance(node, Atom):
        yield node.expr
    elif isinstance(node, Concat):
        for i in node.items:
            yield from _atoms(i)
    else:
        yield from _atoms(node.item)


def word_from_json(entry):
    try:
        name = entry["name"]
        roles = tuple(entry["roles"])
        body = entry["regex"]
    except (KeyError, TypeError) as e:
        raise LexiconError(f"entry must have name, roles and regex: {e}") from None
    if not isinstance(name, str) or not name:
        raise LexiconError(f"bad word name {name!r}")
    if len(roles) not in (1, 2) or len(set(roles)) != len(roles):
        raise LexiconError(f"roles must be 1 or 2 distinct names, got {list(roles)}", name)
    regex = parse_regex(body, roles, name)
    used = set()
    for e in _atoms(regex):
        used |= e.roles()
    if used != set(roles):
        raise LexiconError(f"arity mismatch: declares roles {list(roles)} but uses {sorted(used)}", name)
    return WordRegex(name, roles, regex)


# -- compilation -------------------------------------------------------------

@dataclass(frozen=True)
class WordFsm:
    """Nondeterministic FSM with binary transitions and per-state predicates.

    ``trans[p, q]`` is True when p -> q is allowed. State ``q`` accepts a
    frame when ``exprs[q]`` holds of that frame's bound detections.
    """

    name: str
    roles: tuple
    exprs: tuple
    trans: np.ndarray
    start: frozenset
    accept: int

    @property
    def arity(self):
        return len(self.roles)

    @property
    def n_states(self):
        return len(self.exprs)

    @property
    def a(self):
        """Transition scores: 0 where allowed, -inf elsewhere."""
        return np.where(self.trans, 0.0, NEG_INF)

    def min_length(self):
        """Length of the shortest accepted frame sequence (BFS over the state graph)."""
        dist = {s: 1 for s in self.start}
        queue = deque(sorted(self.start))
        while queue:
            p = queue.popleft()
            for q in np.flatnonzero(self.trans[p]):
                q = int(q)
                if q not in dist:
                    dist[q] = dist[p] + 1
                    queue.append(q)
        return dist.get(self.accept)


def _expand(node):
    """Rewrite x{t,} as t-1 literal copies of x followed by x+."""
    if isinstance(node, Atom):
        return node
    if isinstance(node, Concat):
        return Concat(tuple(_expand(i) for i in node.items))
    if isinstance(node, Plus):
        return Plus(_expand(node.item))
    inner = _expand(node.item)
    return Concat(tuple([inner] * (node.t - 1) + [Plus(inner)]))


def compile_fsm(word):
    """Compile a validated :class:`WordRegex` into a :class:`WordFsm`."""
    body = _expand(word.body)
    exprs = []
    follow = []

    # returns (first, last) position sets of the subexpression
    def build(node):
        if isinstance(node, Atom):
            i = len(exprs)
            exprs.append(node.expr)
            follow.append(set())
            return {i}, {i}
        if isinstance(node, Concat):
            first, last = build(node.items[0])
            for item in node.items[1:]:
                f2, l2 = build(item)
                for p in last:
                    follow[p] |= f2
                last = l2
            return first, last
        first, last = build(node.item)
        for p in last:
            follow[p] |= first
        return first, last

    first, last = build(body)
    # without alternation or optional operators both sets are singletons
    assert len(last) == 1
    n = len(exprs)
    trans = np.zeros((n, n), dtype=bool)
    for p, qs in enumerate(follow):
        for q in qs:
            trans[p, q] = True
    trans.setflags(write=False)
    return WordFsm(word.name, word.roles, tuple(exprs), trans, frozenset(first), next(iter(last)))


# -- recognition ---------------------------------------------------------------

def _role_sequences(fsm, tracks):
    if isinstance(tracks, dict):
        try:
            seqs = [tracks[r] for r in fsm.roles]
        except KeyError as e:
            raise ContractError(f"{fsm.name}: no track for role {e.args[0]!r}") from None
    else:
        seqs = list(tracks)
    if len(seqs) != fsm.arity:
        raise ContractError(f"{fsm.name} takes {fsm.arity} tracks, got {len(seqs)}")
    lengths = {len(s) for s in seqs}
    if len(lengths) != 1 or 0 in lengths:
        raise ContractError(f"{fsm.name}: tracks must share one nonzero length, got {sorted(lengths)}")
    return seqs


def state_truth(fsm, tracks, params):
    """Boolean table ``[t, state]``: does the state's predicate hold at frame t."""
    seqs = _role_sequences(fsm, tracks)
    T = len(seqs[0])
    out = np.zeros((T, fsm.n_states), dtype=bool)
    cache = {}
    for t in range(T):
        binding = dict(zip(fsm.roles, (s[t] for s in seqs)))
        for q, e in enumerate(fsm.exprs):
            if e is TRUE:
                out[t, q] = True
                continue
            if e not in cache:
                cache[e] = eval_expr(e, binding, params)
            out[t, q] = cache[e]
        cache.clear()
    return out


def accepting_path(fsm, h):
    """Viterbi over the state lattice given a truth table ``h[t, state]``.

    Returns the state path ending in the accepting state, or None.
    """
    T, n = h.shape
    alive = np.zeros(n, dtype=bool)
    alive[list(fsm.start)] = True
    alive &= h[0]
    back = np.full((T, n), -1, dtype=np.int64)
    for t in range(1, T):
        reach = alive[:, None] & fsm.trans
        nxt = reach.any(axis=0) & h[t]
        # lowest-numbered predecessor wins ties
        back[t] = np.where(nxt, reach.argmax(axis=0), -1)
        alive = nxt
    if not alive[fsm.accept]:
        return None
    path = [fsm.accept]
    for t in range(T - 1, 0, -1):
        path.append(int(back[t, path[-1]]))
    return path[::-1]


def recognize_path(fsm, tracks, params):
    return accepting_path(fsm, state_truth(fsm, tracks, params))


def recognize(fsm, tracks, params):
    """0.0 if the word describes the tracks, -inf otherwise."""
    return 0.0 if recognize_path(fsm, tracks, params) is not None else NEG_INF


# -- lexicon -------------------------------------------------------------------

class Lexicon:
    """Named word definitions with their compiled machines."""

    def __init__(self, words=()):
        self._regex = {}
        self._fsm = {}
        for w in words:
            self.add(w)

    def add(self, word):
        if word.name in self._regex:
            raise LexiconError("duplicate word", word.name)
        self._regex[word.name] = word
        self._fsm[word.name] = compile_fsm(word)

    def __contains__(self, name):
        return name in self._regex

    def __len__(self):
        return len(self._regex)

    def __iter__(self):
        return iter(self._regex)

    def names(self):
        return list(self._regex)

    def regex(self, name):
        return self._regex[name]

    def fsm(self, name):
        try:
            return self._fsm[name]
        except KeyError:
            raise LexiconError("not in lexicon", name) from None

    def arities(self):
        return {n: w.arity for n, w in self._regex.items()}

    def to_json(self):
        return {"words": [w.to_json() for w in self._regex.values()]}


def lexicon_from_json(doc):
    entries = doc["words"] if isinstance(doc, dict) else doc
    return Lexicon(word_from_json(e) for e in entries)


def load_lexicon(path=None):
    """Load a lexicon file; with no path, the bundled 15-word lexicon."""
    if path is None:
        text = resources.files("sentrack").joinpath("data/lexicon.json").read_text()
        where = "<stock lexicon>"
    else:
        where = str(path)
        try:
            text = Path(path).read_text()
        except OSError as e:
            raise LexiconError(f"{where}: {e}") from e
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as e:
        raise LexiconError(f"{where}: {e}") from e
    return lexicon_from_json(doc)


_STOCK = None


def stock_lexicon():
    global _STOCK
    if _STOCK is None:
        _STOCK = load_lexicon()
    return _STOCK
