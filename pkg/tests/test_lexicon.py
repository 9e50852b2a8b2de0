import itertools
import json
import random

import numpy as np
import pytest

from oracles import (random_params, random_regex_json, to_python_regex, word_accepts_by_paths,
                     word_accepts_by_regex, word_atoms)
from sentrack.errors import ContractError, LexiconError
from sentrack.lexicon import (Lexicon, accepting_path, compile_fsm, load_lexicon, recognize, recognize_path,
                              state_truth, word_from_json)

from conftest import det

STOCK_ARITIES = {"person": 1, "horse": 1, "quickly": 1, "slowly": 1, "leftward": 1, "rightward": 1,
                 "ride": 2, "lead": 2, "approach": 2, "towards": 2, "away from": 2, "to the left of": 2,
                 "to the right of": 2, "from the left": 2, "from the right": 2}


def word(regex, roles=("a",), name="w"):
    return word_from_json({"name": name, "roles": list(roles), "regex": regex})


def test_stock_lexicon_arities(lexicon):
    assert lexicon.arities() == STOCK_ARITIES


def test_min_lengths(lexicon):
    assert lexicon.fsm("quickly").min_length() == 5
    assert lexicon.fsm("ride").min_length() == 7
    assert lexicon.fsm("person").min_length() == 1


def test_every_accept_state_is_reachable(lexicon):
    for name in lexicon:
        assert lexicon.fsm(name).min_length() is not None


def test_single_atom_word():
    fsm = compile_fsm(word(["pred", "stationary", "a"]))
    assert fsm.n_states == 1 and fsm.start == {0} and fsm.accept == 0
    p = random_params(random.Random(0))
    still = det()
    assert recognize(fsm, [[still]], p) == 0.0
    assert recognize(fsm, [[still, still]], p) == float("-inf")


def test_atleast_expands_to_copies():
    fsm = compile_fsm(word(["atleast", 3, ["pred", "stationary", "a"]]))
    assert fsm.n_states == 3
    assert fsm.min_length() == 3
    assert fsm.trans[2, 2] and not fsm.trans[1, 1]


def test_noun_accepts_only_its_class(lexicon, params):
    fsm = lexicon.fsm("person")
    assert recognize(fsm, [[det()] * 18], params) == 0.0
    mixed = [det()] * 17 + [det(cls="horse")]
    assert recognize(fsm, [mixed], params) == float("-inf")


def test_too_short_track_is_rejected(lexicon, params):
    assert recognize(lexicon.fsm("quickly"), [[det(vx=20)] * 4], params) == float("-inf")
    assert recognize(lexicon.fsm("quickly"), [[det(vx=20)] * 5], params) == 0.0


def test_role_dict_and_mismatch(lexicon, params):
    fsm = lexicon.fsm("to the left of")
    a, b = [det(cx=0)] * 5, [det(cx=500)] * 5
    assert recognize(fsm, {"a": a, "b": b}, params) == recognize(fsm, [a, b], params)
    with pytest.raises(ContractError):
        recognize(fsm, [a], params)
    with pytest.raises(ContractError):
        recognize(fsm, [a, b[:3]], params)


@pytest.mark.parametrize("entry, msg", [
    ({"name": "fly", "roles": ["a"], "regex": ["pred", "flies", "a"]}, "unknown primitive"),
    ({"name": "w", "roles": ["a", "b"], "regex": ["pred", "stationary", "a"]}, "arity mismatch"),
    ({"name": "w", "roles": ["a"], "regex": ["atleast", 0, "true"]}, ">= 1"),
    ({"name": "w", "roles": ["a", "a"], "regex": "true"}, "distinct"),
    ({"name": "w", "roles": ["a"]}, "name, roles and regex"),
])
def test_bad_entries(entry, msg):
    with pytest.raises(LexiconError, match=msg):
        word_from_json(entry)


def test_duplicate_name(tmp_path, lexicon):
    doc = lexicon.to_json()
    doc["words"].append(doc["words"][0])
    path = tmp_path / "lex.json"
    path.write_text(json.dumps(doc))
    with pytest.raises(LexiconError, match="duplicate"):
        load_lexicon(path)


def test_lexicon_json_round_trip(tmp_path, lexicon):
    path = tmp_path / "lex.json"
    path.write_text(json.dumps(lexicon.to_json()))
    again = load_lexicon(path)
    for name in lexicon:
        a, b = lexicon.fsm(name), again.fsm(name)
        assert a.exprs == b.exprs and np.array_equal(a.trans, b.trans)


def test_multiword_names_are_single_entries(lexicon):
    for name in ("to the left of", "away from", "from the left", "from the right"):
        assert name in lexicon


def _random_tracks(rng, arity, T):
    return [[det(cx=rng.uniform(0, 400), w=rng.uniform(40, 160), vx=rng.uniform(-8, 8), vy=rng.uniform(-3, 3))
             for _ in range(T)] for _ in range(arity)]


def test_recognize_matches_state_enumeration():
    rng = random.Random(5)
    for _ in range(300):
        roles = ("a", "b")[:rng.randint(1, 2)]
        w = word(random_regex_json(rng, roles, 6), roles)
        fsm = compile_fsm(w)
        T = rng.randint(1, 5)
        tracks = _random_tracks(rng, len(roles), T)
        p = random_params(rng)
        expect = word_accepts_by_paths(fsm, tracks, p)
        assert (recognize(fsm, tracks, p) == 0.0) == expect
        assert word_accepts_by_regex(w, tracks, p) == expect


def test_returned_path_is_valid():
    rng = random.Random(6)
    for _ in range(200):
        roles = ("a",)
        fsm = compile_fsm(word(random_regex_json(rng, roles, 6), roles))
        tracks = _random_tracks(rng, 1, rng.randint(1, 6))
        p = random_params(rng)
        path = recognize_path(fsm, tracks, p)
        if path is None:
            continue
        h = state_truth(fsm, tracks, p)
        assert path[0] in fsm.start and path[-1] == fsm.accept
        assert all(h[t, k] for t, k in enumerate(path))
        assert all(fsm.trans[i, j] for i, j in zip(path, path[1:]))


def test_monotone_in_atom_truth(lexicon):
    rng = np.random.default_rng(0)
    for name in lexicon:
        fsm = lexicon.fsm(name)
        for _ in range(200):
            T = int(rng.integers(1, 10))
            h = rng.random((T, fsm.n_states)) < 0.7
            if accepting_path(fsm, h) is None:
                continue
            more = h | (rng.random(h.shape) < 0.3)
            assert accepting_path(fsm, more) is not None


def test_regex_translation_of_stock_words(lexicon):
    # the reference pattern of ride has one atom beside the padding
    w = lexicon.regex("ride")
    atoms = word_atoms(w.body)
    pattern = to_python_regex(w.body, atoms)
    assert len(atoms) == 1 and pattern == "(?:.)+" + "(?:[b])" * 5 + "(?:[b])*(?:.)+"
