import json

import pytest

from sentrack.errors import ContractError, DataError
from sentrack.predicates import PARAMETER_NAMES, ParameterSet
from sentrack.query import parse
from sentrack.search import index_corpus
from sentrack.synth import EventSpec, corpus_from_specs, make_clip
from sentrack.trainer import DEFAULT_RANGES, GridSpec, TrainingExample, classify, grid_search, load_examples


def single_point(**over):
    d = ParameterSet()
    vals = {n: (getattr(d, n),) for n in PARAMETER_NAMES}
    vals.update({k: tuple(v) for k, v in over.items()})
    return GridSpec(vals)


@pytest.fixture(scope="module")
def examples():
    ride = make_clip(EventSpec("ride", "r"))
    low = make_clip(EventSpec("ride", "l", rider_lift=140.0))
    return [TrainingExample(ride, "The person rode the horse", True),
            TrainingExample(low, "The person rode the horse", False)]


def test_grid_size_and_order():
    g = single_point(far=(1.0, 2.0), overlap=(0.1, 0.2, 0.3))
    pts = list(g.points())
    assert g.size == len(pts) == 6
    assert [(p.far, p.overlap) for p in pts[:3]] == [(1.0, 0.1), (1.0, 0.2), (1.0, 0.3)]


def test_uniform_grid_spans_ranges():
    g = GridSpec.uniform(3)
    assert g.size == 3 ** 9
    for k, (lo, hi) in DEFAULT_RANGES.items():
        assert g.values[k][0] == lo and g.values[k][-1] == pytest.approx(hi)


def test_grid_validation():
    with pytest.raises(DataError):
        GridSpec({"far": (1.0,)})
    with pytest.raises(DataError):
        single_point(far=())


def test_single_point_is_returned(examples):
    g = single_point(overlap=(0.9,))
    r = grid_search(examples, g)
    assert r.params.overlap == 0.9 and r.evaluations == 1 and r.accuracy == 0.5


def test_separable_pair_is_learned(examples):
    g = single_point(overlap=(0.05, 0.2, 0.8))
    r = grid_search(examples, g)
    assert r.params.overlap == 0.2 and r.accuracy == 1.0 and r.evaluations == 3


def test_accuracy_matches_reevaluation(examples):
    r = grid_search(examples, single_point(overlap=(0.05, 0.1, 0.2, 0.3, 0.8)))
    plans = [parse(e.sentence) for e in examples]
    verdicts = classify(examples, plans, r.params)
    assert verdicts == r.verdicts
    assert r.accuracy == sum(v == e.positive for v, e in zip(verdicts, examples)) / len(examples)


def test_ties_keep_earliest(examples):
    r = grid_search(examples, single_point(overlap=(0.2, 0.3)))
    assert r.params.overlap == 0.2


def test_identical_clips_cannot_separate(examples):
    clip = examples[0].clip
    same = [TrainingExample(clip, "The person rode the horse", True),
            TrainingExample(clip, "The person rode the horse", False)]
    r = grid_search(same, single_point(overlap=(0.05, 0.2, 0.8)))
    assert r.accuracy <= 0.5


def test_needs_both_labels(examples):
    with pytest.raises(ContractError):
        grid_search(examples[:1], single_point())


def test_parallel_matches_serial(examples):
    g = single_point(overlap=(0.05, 0.2, 0.8), d_angle=(0.3, 0.5))
    assert grid_search(examples, g, workers=2).to_json() == grid_search(examples, g).to_json()


def test_load_examples(tmp_path):
    cache = index_corpus(corpus_from_specs([EventSpec("ride", "r")]))
    path = tmp_path / "ex.json"
    path.write_text(json.dumps({"examples": [{"clip": "r@000000", "sentence": "The person rode the horse",
                                              "label": "positive"}]}))
    (ex,) = load_examples(path, cache)
    assert ex.positive and ex.clip.clip_id == "r@000000"
    path.write_text(json.dumps([{"clip": "r@000000", "sentence": "x", "label": "maybe"}]))
    with pytest.raises(DataError):
        load_examples(path, cache)


def test_grid_json_round_trip(tmp_path):
    g = single_point(far=(100.0, 200.0))
    path = tmp_path / "g.json"
    path.write_text(json.dumps(g.to_json()))
    assert GridSpec.load(path) == g
    assert GridSpec.from_json({**g.to_json(), "close": 50}).values["close"] == (50.0,)
