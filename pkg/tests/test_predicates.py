import dataclasses
import json
import math

import pytest
from hypothesis import assume, given, strategies as st

from sentrack.errors import ContractError, DataError, LexiconError
from sentrack.predicates import (PRIMITIVES, TRUE, And, Not, ParameterSet, Pred, angle_diff, eval_expr,
                                 eval_primitive, flow_magnitude, flow_orientation, iou, parse_expr, project)

from conftest import det

coord = st.floats(-500, 500, allow_nan=False)
size = st.floats(1, 300)
flow = st.floats(-30, 30)
detections = st.builds(det, cx=coord, cy=coord, w=size, h=size, vx=flow, vy=flow)
param_sets = st.builds(ParameterSet, far=st.floats(0, 600), close=st.floats(0, 200), stationary=st.floats(0, 6),
                       d_closing=st.floats(0, 8), d_angle=st.floats(0, math.pi), d_pp=st.floats(-100, 100),
                       d_quickly=st.floats(0, 20), d_slowly=st.floats(0, 8), overlap=st.floats(0, 1))
BINARY = [n for n, (k, fn) in PRIMITIVES.items() if k == 2 and fn is not None]


def test_flow_helpers():
    assert (flow_orientation(det(vx=1.0)), flow_magnitude(det(vx=1.0))) == (0.0, 1.0)
    assert flow_magnitude(det(vx=-3.0, vy=4.0)) == 5.0
    d = det(cx=10, cy=10, w=4, h=4)
    assert project(d) == d
    assert project(det(vx=2, vy=-1)).box == (2, -1, 100, 100)


def test_angle_diff_wraps():
    assert angle_diff(0.1, 2 * math.pi - 0.1) == pytest.approx(0.2)
    assert angle_diff(-math.pi, math.pi) == pytest.approx(0.0, abs=1e-12)
    assert angle_diff(0.0, math.pi) == pytest.approx(math.pi)


def test_primitive_examples():
    p = ParameterSet(overlap=0.5)
    a = det()
    assert eval_primitive("overlapping", (a, a), p)
    # gap = 350 - 50 - 50 = 250 == far
    assert not eval_primitive("far", (det(cx=0), det(cx=350)), ParameterSet())
    mt = ParameterSet(d_angle=0.1, stationary=1.0)
    assert eval_primitive("moving-together", (det(vx=2.0), det(vx=2.0, vy=0.01)), mt)


def test_close_is_strict_and_really_close_is_half():
    p = ParameterSet(close=100.0)
    assert eval_primitive("close", (det(cx=0), det(cx=199)), p)
    assert not eval_primitive("close", (det(cx=0), det(cx=200)), p)
    assert eval_primitive("really-close", (det(cx=0), det(cx=149)), p)
    assert not eval_primitive("really-close", (det(cx=0), det(cx=150)), p)


def test_closing_and_departing_have_a_dead_zone():
    p = ParameterSet(d_closing=1.0)
    # a moves 0.5 toward b: neither closing nor departing
    a, b = det(cx=0, vx=0.5), det(cx=300)
    assert not eval_primitive("closing", (a, b), p)
    assert not eval_primitive("departing", (a, b), p)
    assert eval_primitive("closing", (det(cx=0, vx=5), b), p)
    assert eval_primitive("departing", (det(cx=0, vx=-5), b), p)


def test_direction_words():
    p = ParameterSet()
    assert eval_primitive("rightward", (det(vx=5),), p)
    assert eval_primitive("leftward", (det(vx=-5),), p)
    assert not eval_primitive("leftward", (det(vx=5),), p)
    assert not eval_primitive("rightward", (det(vx=1),), p)        # too slow to count as moving
    assert eval_primitive("moving-direction", (det(vy=5), det()), p, const=math.pi / 2)


def test_stationary_tests_its_argument():
    p = ParameterSet()
    assert eval_primitive("stationary", (det(vx=1.0),), p)
    assert not eval_primitive("stationary", (det(vx=2.0),), p)


def test_approaching_requires_stationary_landmark():
    p = ParameterSet()
    assert eval_primitive("approaching", (det(cx=0, vx=5), det(cx=400)), p)
    assert not eval_primitive("approaching", (det(cx=0, vx=5), det(cx=400, vx=-5)), p)


def test_iou_values():
    assert iou(det(w=2, h=2), det(cx=1, w=2, h=2)) == pytest.approx(1 / 3)
    assert iou(det(w=2, h=2), det(cx=2, w=2, h=2)) == 0.0


def test_expressions():
    p = ParameterSet()
    assert eval_expr(TRUE, {}, p)
    touching = {"a": det(cx=0), "b": det(cx=100)}
    assert eval_expr(Not(Pred("far", ("a", "b"))), touching, p)
    contradiction = And((Pred("left-of", ("a", "b")), Pred("right-of", ("a", "b"))))
    assert not eval_expr(contradiction, {"a": det(cx=1), "b": det(cx=7)}, p)
    with pytest.raises(ContractError):
        eval_expr(Pred("far", ("a", "b")), {"a": det()}, p)


def test_is_class():
    e = parse_expr(["pred", "is-class", "a", "horse"], ("a",), "horse")
    assert eval_expr(e, {"a": det(cls="horse")}, ParameterSet())
    assert not eval_expr(e, {"a": det(cls="person")}, ParameterSet())


@pytest.mark.parametrize("doc, msg", [
    (["pred", "flies", "a"], "unknown primitive"),
    (["pred", "far", "a"], "needs 2"),
    (["pred", "stationary", "z"], "role"),
    (["xor", "true"], "malformed"),
])
def test_parse_expr_errors(doc, msg):
    with pytest.raises(LexiconError, match=msg):
        parse_expr(doc, ("a", "b"), "w")


def test_expr_json_round_trip():
    doc = ["and", ["not", ["pred", "really-close", "a", "b"]], ["pred", "moving-together", "a", "b"]]
    e = parse_expr(doc, ("a", "b"), "w")
    assert e.to_json() == doc
    assert parse_expr(e.to_json(), ("a", "b"), "w") == e


def test_parameter_set_json(tmp_path):
    p = ParameterSet(far=300.0, d_angle=0.25)
    p.save(tmp_path / "p.json")
    assert ParameterSet.load(tmp_path / "p.json") == p
    assert json.loads((tmp_path / "p.json").read_text())["far"] == 300.0
    with pytest.raises(DataError):
        ParameterSet.from_json({"far": 1.0, "speed": 2.0})


def test_parameter_check():
    ParameterSet().check()
    with pytest.raises(DataError):
        ParameterSet(overlap=1.5).check()
    with pytest.raises(DataError):
        ParameterSet(close=-1.0).check()


@given(detections, detections, param_sets)
def test_symmetric_predicates(a, b, p):
    for name in ("moving-together", "far", "close", "really-close", "overlapping"):
        assert eval_primitive(name, (a, b), p) == eval_primitive(name, (b, a), p)


@given(detections, detections, param_sets)
def test_left_right_antisymmetry(a, b, p):
    assume(a.cx != b.cx)
    p = dataclasses.replace(p, d_pp=0.0)
    assert eval_primitive("left-of", (a, b), p) == eval_primitive("right-of", (b, a), p)


@given(detections, param_sets)
def test_quickly_and_slowly_exclusive(a, p):
    assume(p.d_slowly <= p.d_quickly)
    assert not (eval_primitive("quickly", (a,), p) and eval_primitive("slowly", (a,), p))


def _snap(x):
    return round(x * 8) / 8


@given(detections, detections, param_sets, st.integers(-300, 300), st.integers(-300, 300))
def test_binary_predicates_translation_invariant(a, b, p, dx, dy):
    # multiples of 1/8 keep every sum exact, so shifting cannot flip a comparison by rounding
    fields = ("cx", "cy", "width", "height", "vx", "vy")
    a = dataclasses.replace(a, **{k: _snap(getattr(a, k)) for k in fields})
    b = dataclasses.replace(b, **{k: _snap(getattr(b, k)) for k in fields})
    p = dataclasses.replace(p, far=_snap(p.far), close=_snap(p.close), d_closing=_snap(p.d_closing),
                            d_pp=_snap(p.d_pp))
    shift = lambda d: dataclasses.replace(d, cx=d.cx + dx, cy=d.cy + dy)  # noqa: E731
    for name in BINARY:
        assert eval_primitive(name, (a, b), p) == eval_primitive(name, (shift(a), shift(b)), p), name


@given(detections, detections, param_sets)
def test_magnitude_predicates_depend_only_on_flow(a, b, p):
    moved = dataclasses.replace(b, vx=a.vx, vy=a.vy)
    for name in ("stationary", "quickly", "slowly"):
        assert eval_primitive(name, (a,), p) == eval_primitive(name, (moved,), p)
