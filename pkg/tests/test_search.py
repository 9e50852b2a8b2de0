import json
import math

import pytest

from sentrack.detections import ClassModelMeta, Corpus, VideoMeta
from sentrack.errors import DataError
from sentrack.predicates import ParameterSet
from sentrack.search import DetectionCache, baseline_search, format_table, hits_to_json, index_corpus, rank, search
from sentrack.sentence_tracker import feasible
from sentrack.query import parse
from sentrack.synth import EventSpec, corpus_from_specs, discrimination_specs


@pytest.fixture(scope="module")
def cache():
    return index_corpus(corpus_from_specs(discrimination_specs(n_clips=20, planted=(3, 11))))


def empty_corpus(frames=30):
    return Corpus(videos={"v": VideoMeta("v", 1280, 720, frames)},
                  classes={"person": ClassModelMeta("person", 0.0)}, raw={"v": [[] for _ in range(frames)]})


def test_thirty_frames_two_clips():
    cache = index_corpus(empty_corpus(30))
    assert [c.clip_id for c in cache.clips()] == ["v@000000", "v@000012"]
    assert all(c.detections(t, "person") == () for c in cache.clips() for t in range(18))


def test_reindex_writes_nothing(tmp_path):
    corpus = corpus_from_specs(discrimination_specs(n_clips=4, planted=(1,)))
    first = index_corpus(corpus, tmp_path)
    second = index_corpus(corpus, tmp_path)
    assert first.writes == 5 and second.writes == 0
    loaded = DetectionCache.load(tmp_path)
    assert [c for c in loaded.clips()] == first.clips()


def test_tampered_cache_is_rejected(tmp_path):
    index_corpus(corpus_from_specs(discrimination_specs(n_clips=2, planted=(0,))), tmp_path)
    victim = next(p for p in tmp_path.iterdir() if p.name.startswith("video-"))
    victim.write_text(victim.read_text().replace("person", "persoN", 1))
    with pytest.raises(DataError, match="hash"):
        DetectionCache.load(tmp_path)
    index_corpus(corpus_from_specs(discrimination_specs(n_clips=2, planted=(0,))), tmp_path)
    DetectionCache.load(tmp_path)


def test_missing_clip():
    with pytest.raises(DataError):
        DetectionCache().get("nope")


def test_hits_are_planted_rides(cache):
    hits = search("The person rode the horse", cache, ParameterSet(), k=None)
    assert sorted(h.clip_id for h in hits) == ["v003@000000", "v011@000000"]
    assert [h.rank for h in hits] == [1, 2]
    assert hits[0].score >= hits[1].score


def test_no_horse_no_hits():
    corpus = corpus_from_specs([EventSpec("walk", "w", clutter=1), EventSpec("ride", "r")])
    for frames in corpus.raw.values():
        for fr in frames:
            fr[:] = [d for d in fr if d.class_label != "horse"]
    assert search("The person rode the horse", index_corpus(corpus), ParameterSet()) == []


def test_unbounded_search_matches_feasibility(cache):
    params = ParameterSet()
    for sentence in ("The person approached the horse", "The person lead the horse"):
        hits = search(sentence, cache, params, k=None)
        plan = parse(sentence)
        expected = [c.clip_id for c in cache.clips() if feasible(c, plan, params)]
        assert sorted(h.clip_id for h in hits) == expected
        assert all(math.isfinite(h.score) for h in hits)


def test_threshold_only_shrinks(cache):
    hits = search("The person approached the horse", cache, ParameterSet(), k=None)
    assert hits
    for h in hits:
        kept = search("The person approached the horse", cache, ParameterSet(), k=None, threshold=h.score)
        assert {x.clip_id for x in kept} <= {x.clip_id for x in hits}
        assert all(x.score >= h.score for x in kept)


def test_rank_ties_and_cut():
    inf = float("-inf")
    hits = rank([("b", 1.0, None), ("a", 1.0, None), ("c", 2.0, None), ("d", inf, None)], k=2)
    assert [(h.clip_id, h.rank) for h in hits] == [("c", 1), ("a", 2)]


def test_baseline_is_order_blind(cache):
    a = baseline_search(["person", "horse"], cache, k=None)
    b = baseline_search(["horse", "person"], cache, k=None)
    assert [(h.clip_id, h.score) for h in a] == [(h.clip_id, h.score) for h in b]
    assert search("The horse rode the person", cache, ParameterSet(), k=None) == []


def test_baseline_excludes_missing_class():
    corpus = corpus_from_specs([EventSpec("gallop", "g"), EventSpec("ride", "r")])
    hits = baseline_search(["person", "horse"], index_corpus(corpus), k=None)
    assert [h.clip_id for h in hits] == ["r@000000"]


def test_parallel_matches_serial(cache):
    params = ParameterSet()
    one = hits_to_json("s", search("The person approached the horse", cache, params, k=None, workers=1))
    two = hits_to_json("s", search("The person approached the horse", cache, params, k=None, workers=2))
    assert json.dumps(one) == json.dumps(two)


def test_table_formatting(cache):
    assert "(no hits)" in format_table([])
    hits = search("The person rode the horse", cache, ParameterSet())
    assert format_table(hits).splitlines()[1].split()[-1] == hits[0].clip_id
