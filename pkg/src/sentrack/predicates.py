"""Geometric and kinematic predicates over canonical detections.

Every predicate is boolean and parameterized by the nine thresholds in
:class:`ParameterSet`. Word meanings are regular expressions over boolean
combinations of these primitives (see :mod:`sentrack.lexicon`).
"""

from __future__ import annotations

import json
import math
from dataclasses import asdict, dataclass, fields, replace
from pathlib import Path

from .errors import ContractError, DataError, LexiconError


@dataclass(frozen=True)
class ParameterSet:
    far: float = 250.0           # px
    close: float = 100.0         # px
    stationary: float = 1.5      # px/frame
    d_closing: float = 1.0       # px
    d_angle: float = math.pi / 6  # radians
    d_pp: float = 0.0            # px
    d_quickly: float = 12.0      # px/frame
    d_slowly: float = 6.0        # px/frame
    overlap: float = 0.2         # IOU

    def check(self):
        """Raise ``DataError`` if the documented invariants do not hold.

        Not run by the constructor: grid search must be free to score
        corners of the grid that violate ``d_slowly > stationary``.
        """
        bad = [f.name for f in fields(self) if getattr(self, f.name) < 0]
        if bad:
            raise DataError(f"negative parameters: {bad}")
        if not 0.0 <= self.overlap <= 1.0:
            raise DataError("overlap must lie in [0, 1]")
        if not self.d_slowly > self.stationary:
            raise DataError("d_slowly must exceed stationary")
        return self

    def to_json(self):
        return asdict(self)

    @classmethod
    def from_json(cls, d):
        names = {f.name for f in fields(cls)}
        unknown = set(d) - names
        if unknown:
            raise DataError(f"unknown parameters: {sorted(unknown)}")
        missing = names - set(d)
        if missing:
            raise DataError(f"missing parameters: {sorted(missing)}")
        return cls(**{k: float(v) for k, v in d.items()})

    @classmethod
    def load(cls, path):
        try:
            return cls.from_json(json.loads(Path(path).read_text()))
        except (OSError, json.JSONDecodeError) as e:
            raise DataError(str(e), path=path) from e

    def save(self, path):
        Path(path).write_text(json.dumps(self.to_json(), indent=2) + "\n")


PARAMETER_NAMES = tuple(f.name for f in fields(ParameterSet))


# -- flow helpers ------------------------------------------------------------

def flow_magnitude(d):
    return math.hypot(d.vx, d.vy)


def flow_orientation(d):
    """Angle of the flow vector, 0 toward +x. Zero flow has orientation 0."""
    if d.vx == 0.0 and d.vy == 0.0:
        return 0.0
    return math.atan2(d.vy, d.vx)


def project(d):
    """Shift a detection one frame forward along its flow; size is unchanged."""
    return replace(d, cx=d.cx + d.vx, cy=d.cy + d.vy)


def angle_diff(x, y):
    """Absolute difference of two angles on the circle, in [0, pi]."""
    r = math.fmod(abs(x - y), 2.0 * math.pi)
    return 2.0 * math.pi - r if r > math.pi else r


def horizontal_gap(a, b):
    return abs(a.cx - b.cx) - a.width / 2.0 - b.width / 2.0


def iou(a, b):
    ix = min(a.cx + a.width / 2, b.cx + b.width / 2) - max(a.cx - a.width / 2, b.cx - b.width / 2)
    iy = min(a.cy + a.height / 2, b.cy + b.height / 2) - max(a.cy - a.height / 2, b.cy - b.height / 2)
    if ix <= 0 or iy <= 0:
        return 0.0
    inter = ix * iy
    return inter / (a.width * a.height + b.width * b.height - inter)


# -- primitives --------------------------------------------------------------

def _far(p, a, b):
    return horizontal_gap(a, b) > p.far


def _really_close(p, a, b):
    return horizontal_gap(a, b) < p.close / 2.0


def _close(p, a, b):
    return horizontal_gap(a, b) < p.close


def _stationary(p, a):
    return flow_magnitude(a) <= p.stationary


def _closing(p, a, b):
    pa, pb = project(a), project(b)
    return abs(a.cx - b.cx) > abs(pa.cx - pb.cx) + p.d_closing


def _departing(p, a, b):
    pa, pb = project(a), project(b)
    return abs(a.cx - b.cx) < abs(pa.cx - pb.cx) - p.d_closing


def moving_direction(p, a, b, alpha):
    # b is unused; kept so the signature lines up with the binary form
    return (angle_diff(flow_orientation(a), alpha) < p.d_angle
            and flow_magnitude(a) > p.stationary)


def _left_of(p, a, b):
    return a.cx < b.cx + p.d_pp


def _right_of(p, a, b):
    return a.cx > b.cx + p.d_pp


def _leftward(p, a):
    return moving_direction(p, a, None, math.pi)


def _rightward(p, a):
    return moving_direction(p, a, None, 0.0)


def _stationary_but_far(p, a, b):
    return _far(p, a, b) and _stationary(p, a) and _stationary(p, b)


def _stationary_but_close(p, a, b):
    return _close(p, a, b) and _stationary(p, a) and _stationary(p, b)


def _moving_together(p, a, b):
    return (angle_diff(flow_orientation(a), flow_orientation(b)) < p.d_angle
            and flow_magnitude(a) > p.stationary
            and flow_magnitude(b) > p.stationary)


def _approaching(p, a, b):
    return _closing(p, a, b) and _stationary(p, b)


def _quickly(p, a):
    return flow_magnitude(a) > p.d_quickly


def _slowly(p, a):
    return p.stationary < flow_magnitude(a) < p.d_slowly


def _overlapping(p, a, b):
    return iou(a, b) >= p.overlap


def _above(p, a, b):
    # image y grows downward
    return a.cy < b.cy


# name -> (arity, function(params, *detections))
PRIMITIVES = {
    "far": (2, _far),
    "really-close": (2, _really_close),
    "close": (2, _close),
    "stationary": (1, _stationary),
    "closing": (2, _closing),
    "departing": (2, _departing),
    "moving-direction": (2, None),  # needs an angle constant, handled in eval_primitive
    "left-of": (2, _left_of),
    "right-of": (2, _right_of),
    "leftward": (1, _leftward),
    "rightward": (1, _rightward),
    "stationary-but-far": (2, _stationary_but_far),
    "stationary-but-close": (2, _stationary_but_close),
    "moving-together": (2, _moving_together),
    "approaching": (2, _approaching),
    "quickly": (1, _quickly),
    "slowly": (1, _slowly),
    "overlapping": (2, _overlapping),
    "above": (2, _above),
}

# the detector-class test used by noun entries; its constant is a class label
IS_CLASS = "is-class"


def eval_primitive(name, args, params, const=None):
    """Evaluate one named primitive on 1 or 2 detections."""
    if name == IS_CLASS:
        (a,) = args
        return a.class_label == const
    arity, fn = PRIMITIVES[name]
    if len(args) != arity:
        raise ContractError(f"{name} takes {arity} detections, got {len(args)}")
    if name == "moving-direction":
        return moving_direction(params, args[0], args[1], const)
    return fn(params, *args)


# -- expressions -------------------------------------------------------------

@dataclass(frozen=True)
class TrueExpr:
    def roles(self):
        return frozenset()

    def to_json(self):
        return "true"

    def __str__(self):
        return "true"


TRUE = TrueExpr()


@dataclass(frozen=True)
class Pred:
    name: str
    args: tuple
    const: object = None

    def roles(self):
        return frozenset(self.args)

    def to_json(self):
        out = ["pred", self.name, *self.args]
        if self.const is not None:
            out.append(self.const)
        return out

    def __str__(self):
        inner = ",".join(self.args)
        if self.const is not None:
            inner += f",{self.const}"
        return f"{self.name.upper()}({inner})"


@dataclass(frozen=True)
class And:
    items: tuple

    def roles(self):
        return frozenset().union(*(i.roles() for i in self.items))

    def to_json(self):
        return ["and", *(i.to_json() for i in self.items)]

    def __str__(self):
        return "(" + " & ".join(map(str, self.items)) + ")"


@dataclass(frozen=True)
class Or:
    items: tuple

    def roles(self):
        return frozenset().union(*(i.roles() for i in self.items))

    def to_json(self):
        return ["or", *(i.to_json() for i in self.items)]

    def __str__(self):
        return "(" + " | ".join(map(str, self.items)) + ")"


@dataclass(frozen=True)
class Not:
    item: object

    def roles(self):
        return self.item.roles()

    def to_json(self):
        return ["not", self.item.to_json()]

    def __str__(self):
        return f"~{self.item}"


EXPR_OPS = ("true", "pred", "and", "or", "not")


def parse_expr(doc, roles=None, word=None):
    """Build an expression tree from its nested-list JSON form.

    Unknown primitives, wrong arity and undeclared roles raise
    :class:`LexiconError` here, so evaluation never meets them.
    """
    if doc == "true" or doc == ["true"]:
        return TRUE
    if not isinstance(doc, list) or not doc or doc[0] not in EXPR_OPS:
        raise LexiconError(f"malformed predicate expression {doc!r}", word)
    op, rest = doc[0], doc[1:]
    if op == "pred":
        if not rest or not isinstance(rest[0], str):
            raise LexiconError(f"malformed predicate {doc!r}", word)
        name = rest[0]
        if name == IS_CLASS:
            if len(rest) != 3:
                raise LexiconError("is-class takes one role and a class label", word)
            args, const = (rest[1],), rest[2]
        elif name in PRIMITIVES:
            arity = PRIMITIVES[name][0]
            args = tuple(rest[1:1 + arity])
            extra = rest[1 + arity:]
            if len(args) != arity:
                raise LexiconError(f"{name} needs {arity} arguments, got {len(args)}", word)
            if name == "moving-direction":
                if len(extra) != 1 or not isinstance(extra[0], (int, float)):
                    raise LexiconError("moving-direction needs an angle constant", word)
                const = float(extra[0])
            elif extra:
                raise LexiconError(f"{name} needs {arity} arguments, got {len(rest) - 1}", word)
            else:
                const = None
        else:
            raise LexiconError(f"unknown primitive {name!r}", word)
        for r in args:
            if not isinstance(r, str) or (roles is not None and r not in roles):
                raise LexiconError(f"{name} references undeclared role {r!r}", word)
        return Pred(name, tuple(args), const)
    if op == "not":
        if len(rest) != 1:
            raise LexiconError("not takes exactly one operand", word)
        return Not(parse_expr(rest[0], roles, word))
    if op == "true":
        raise LexiconError("true takes no operands", word)
    if not rest:
        raise LexiconError(f"{op} needs operands", word)
    items = tuple(parse_expr(r, roles, word) for r in rest)
    return And(items) if op == "and" else Or(items)


def eval_expr(expr, binding, params):
    """Evaluate ``expr`` with ``binding`` mapping role name -> Detection."""
    if expr is TRUE or isinstance(expr, TrueExpr):
        return True
    if isinstance(expr, Pred):
        try:
            args = [binding[r] for r in expr.args]
        except KeyError as e:
            raise ContractError(f"unbound role {e.args[0]!r} in {expr}") from None
        return eval_primitive(expr.name, args, params, expr.const)
    if isinstance(expr, And):
        return all(eval_expr(i, binding, params) for i in expr.items)
    if isinstance(expr, Or):
        return any(eval_expr(i, binding, params) for i in expr.items)
    if isinstance(expr, Not):
        return not eval_expr(expr.item, binding, params)
    raise TypeError(f"not a predicate expression: {expr!r}")
