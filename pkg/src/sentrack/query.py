"""Sentential query parsing.

Grammar (nonterminals in caps, optional parts bracketed)::

    S    -> NP VP
    NP   -> D N [PP]
    D    -> the | the other
    N    -> person | horse
    PP   -> P NP
    P    -> to the left of | to the right of
    VP   -> V NP [Adv] [PP_M]
    V    -> lead | rode | approached
    Adv  -> quickly | slowly
    PP_M -> P_M NP | from the left | from the right | leftward | rightward
    P_M  -> towards | away from

Each NP introduces a participant (one tracker). A repeated noun refers to
the participant already introduced for that class unless it is marked
``other``. The parse yields a :class:`QueryPlan`: the participants and,
for every word, the ordered participants filling its roles.
"""

from __future__ import annotations

import itertools
import re
from dataclasses import dataclass, field

from .errors import QueryParseError
from .lexicon import stock_lexicon


@dataclass(frozen=True)
class Grammar:
    determiners: frozenset = frozenset({"the"})
    other: str = "other"
    nouns: frozenset = frozenset({"person", "horse"})
    verbs: frozenset = frozenset({"lead", "ride", "approach"})
    adverbs: frozenset = frozenset({"quickly", "slowly"})
    # P inside NP
    spatial_preps: frozenset = frozenset({"to the left of", "to the right of"})
    # P_M, takes an NP
    motion_preps: frozenset = frozenset({"towards", "away from"})
    # PP_M alternatives with no NP: (mover, verb's other participant)
    source_phrases: frozenset = frozenset({"from the left", "from the right"})
    # PP_M alternatives with no NP: (mover,)
    directions: frozenset = frozenset({"leftward", "rightward"})
    # surface form -> lexicon stem
    inflections: dict = field(default_factory=lambda: {
        "rode": "ride", "rides": "ride", "riding": "ride",
        "leads": "lead", "led": "lead", "leading": "lead",
        "approached": "approach", "approaches": "approach", "approaching": "approach",
    })
    # which verb role moves, and so takes adverbs and motion phrases
    motion_role: dict = field(default_factory=lambda: {
        "ride": "patient", "lead": "agent", "approach": "agent"})

    def content_words(self):
        return (self.nouns | self.verbs | self.adverbs | self.spatial_preps
                | self.motion_preps | self.source_phrases | self.directions)

    def surface_forms(self):
        """Every token sequence the tokenizer may emit, mapped to its stem."""
        forms = {w: w for w in self.content_words() | self.determiners | {self.other}}
        forms.update(self.inflections)
        return forms


DEFAULT_GRAMMAR = Grammar()


@dataclass(frozen=True)
class Participant:
    index: int
    noun_class: str


@dataclass(frozen=True)
class WordInstance:
    lexeme: str       # surface form in the sentence
    word: str         # lexicon entry name
    theta: tuple      # participant index per role


@dataclass(frozen=True)
class QueryPlan:
    sentence: str
    participants: tuple
    words: tuple

    @property
    def classes(self):
        return [p.noun_class for p in self.participants]

    def to_json(self):
        return {
            "sentence": self.sentence,
            "participants": [{"index": p.index, "class": p.noun_class} for p in self.participants],
            "words": [{"lexeme": w.lexeme, "word": w.word, "theta": list(w.theta)} for w in self.words],
        }


def _normalize(sentence):
    return re.sub(r"[^a-z\s]", " ", sentence.lower()).split()


def _tokens(sentence, grammar):
    """Greedy longest match; returns ``(stem, surface, word_position)`` triples."""
    words = _normalize(sentence)
    forms = grammar.surface_forms()
    longest = max(len(f.split()) for f in forms)
    out = []
    i = 0
    while i < len(words):
        for n in range(min(longest, len(words) - i), 0, -1):
            surface = " ".join(words[i:i + n])
            if surface in forms:
                out.append((forms[surface], surface, i))
                i += n
                break
        else:
            raise QueryParseError(f"unknown word {words[i]!r} at position {i}",
                                  position=i, token=words[i])
    return out


def tokenize(sentence, grammar=DEFAULT_GRAMMAR):
    """Split a sentence into lexemes, joining multiword phrases and stemming verbs."""
    return [stem for stem, _, _ in _tokens(sentence, grammar)]


class _Parser:
    def __init__(self, tokens, grammar):
        self.toks = tokens
        self.g = grammar
        self.i = 0
        self.participants = []
        self.by_class = {}
        self.words = []          # (token index, WordInstance)

    def peek(self):
        return self.toks[self.i][0] if self.i < len(self.toks) else None

    def fail(self, expected):
        if self.i < len(self.toks):
            stem, surface, pos = self.toks[self.i]
            raise QueryParseError(
                f"expected {expected} at position {pos}, found {surface!r}", position=pos, token=surface)
        raise QueryParseError(f"expected {expected} at end of sentence", position=len(self.toks))

    def take(self, allowed, expected):
        tok = self.peek()
        if tok not in allowed:
            self.fail(expected)
        self.i += 1
        return self.toks[self.i - 1]

    def emit(self, tok_index, word, theta):
        self.words.append((tok_index, WordInstance(self.toks[tok_index][1], word, tuple(theta))))

    def sentence(self):
        subj = self.np()
        self.vp(subj)
        if self.peek() is not None:
            self.fail("end of sentence")

    def np(self):
        self.take(self.g.determiners, "a determiner")
        other = self.peek() == self.g.other
        if other:
            self.i += 1
        at = self.i
        noun = self.take(self.g.nouns, "a noun")[0]
        if not other and noun in self.by_class:
            head = self.by_class[noun]
        else:
            head = len(self.participants)
            self.participants.append(Participant(head, noun))
            # first participant of a class is the one plain mentions corefer with
            self.by_class.setdefault(noun, head)
            self.emit(at, noun, (head,))
        if self.peek() in self.g.spatial_preps:
            at = self.i
            prep = self.take(self.g.spatial_preps, "a preposition")[0]
            obj = self.np()
            self.emit(at, prep, (head, obj))
        return head

    def vp(self, subj):
        at = self.i
        verb = self.take(self.g.verbs, "a verb")[0]
        obj = self.np()
        self.emit(at, verb, (subj, obj))
        if self.g.motion_role.get(verb, "agent") == "agent":
            mover, other = subj, obj
        else:
            mover, other = obj, subj
        nxt = self.peek()
        if nxt in self.g.adverbs:
            self.emit(self.i, nxt, (mover,))
            self.i += 1
            nxt = self.peek()
        if nxt in self.g.motion_preps:
            at = self.i
            self.i += 1
            landmark = self.np()
            self.emit(at, nxt, (mover, landmark))
        elif nxt in self.g.source_phrases:
            self.emit(self.i, nxt, (mover, other))
            self.i += 1
        elif nxt in self.g.directions:
            self.emit(self.i, nxt, (mover,))
            self.i += 1


def parse(sentence, grammar=DEFAULT_GRAMMAR, lexicon=None):
    """Parse a sentence into a :class:`QueryPlan`.

    Raises :class:`QueryParseError` naming the first token that could not
    be consumed.
    """
    lexicon = stock_lexicon() if lexicon is None else lexicon
    p = _Parser(_tokens(sentence, grammar), grammar)
    if not p.toks:
        raise QueryParseError("empty sentence", position=0)
    p.sentence()
    words = tuple(w for _, w in sorted(p.words, key=lambda x: x[0]))
    for w in words:
        if w.word not in lexicon:
            raise QueryParseError(f"word {w.word!r} has no lexicon entry", token=w.lexeme)
    return QueryPlan(sentence, tuple(p.participants), words)


# -- query templates -----------------------------------------------------------

NOUNS = ("person", "horse")


def _excluded(verb, x, y):
    # no riding of people, and no horse riders
    return verb == "rode" and (x, y) != ("person", "horse")


def _render(x, verb, y, tail):
    seen = set()

    def np(n):
        s = f"the other {n}" if n in seen else f"the {n}"
        seen.add(n)
        return s

    parts = [np(x), verb, np(y)]
    for t in tail:
        parts.append(np(t[1]) if isinstance(t, tuple) and t[0] == "NP" else t)
    text = " ".join(p for p in parts if p)
    return text[0].upper() + text[1:]


def template_queries():
    """All template sentences, paired with whether the corpus filter drops them."""
    out = []
    for x in NOUNS:
        for y, adv, src in itertools.product(NOUNS, ("", "quickly", "slowly"),
                                             ("", "from the left", "from the right")):
            out.append((_render(x, "approached", y, [adv, src]), False))
        for verb, y, adv in itertools.product(("lead", "rode"), NOUNS, ("", "quickly", "slowly")):
            tails = [[], ["leftward"], ["rightward"]]
            for prep, z in itertools.product(("towards", "away from"), NOUNS):
                tails.append([prep, ("NP", z)])
            for tail in tails:
                out.append((_render(x, verb, y, [adv, *tail]), _excluded(verb, x, y)))
    return out


def enumerate_template_queries(include_excluded=False):
    """Sentences generated from the query template (141 kept, 204 in total)."""
    return [s for s, drop in template_queries() if include_excluded or not drop]
