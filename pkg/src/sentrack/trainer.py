"""Exhaustive grid search over the nine predicate thresholds.

An example is classified positive when the sentence tracker finds any
assignment for it (finite score). The grid point with the best accuracy
wins; ties keep the earliest point in grid order.
"""

from __future__ import annotations

import itertools
import json
import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .errors import ContractError, DataError
from .predicates import PARAMETER_NAMES, ParameterSet
from .query import parse
from .sentence_tracker import DEFAULT_PRUNE, feasible

# (low, high) per parameter, canonical pixel units
DEFAULT_RANGES = {
    "far": (100.0, 600.0),
    "close": (20.0, 200.0),
    "stationary": (0.5, 6.0),
    "d_closing": (0.5, 8.0),
    "d_angle": (math.pi / 12, math.pi / 2),
    "d_pp": (0.0, 100.0),
    "d_quickly": (4.0, 20.0),
    "d_slowly": (1.0, 8.0),
    "overlap": (0.05, 0.6),
}


@dataclass(frozen=True)
class TrainingExample:
    clip: object
    sentence: str
    positive: bool


@dataclass(frozen=True)
class GridSpec:
    values: dict      # parameter name -> tuple of candidates

    def __post_init__(self):
        missing = set(PARAMETER_NAMES) - set(self.values)
        extra = set(self.values) - set(PARAMETER_NAMES)
        if missing or extra:
            raise DataError(f"grid must name exactly the nine parameters (missing {sorted(missing)}, "
                            f"unknown {sorted(extra)})")
        for k, v in self.values.items():
            if len(v) == 0:
                raise DataError(f"grid dimension {k!r} is empty")

    @property
    def size(self):
        return math.prod(len(self.values[k]) for k in PARAMETER_NAMES)

    def points(self):
        """Every grid point, last parameter varying fastest."""
        for combo in itertools.product(*(self.values[k] for k in PARAMETER_NAMES)):
            yield ParameterSet(**dict(zip(PARAMETER_NAMES, combo)))

    @classmethod
    def uniform(cls, steps=3, ranges=None):
        ranges = DEFAULT_RANGES if ranges is None else ranges
        return cls({k: tuple(float(x) for x in np.linspace(*ranges[k], steps)) for k in PARAMETER_NAMES})

    @classmethod
    def from_json(cls, d):
        return cls({k: tuple(float(x) for x in (v if isinstance(v, list) else [v])) for k, v in d.items()})

    @classmethod
    def load(cls, path):
        try:
            return cls.from_json(json.loads(Path(path).read_text()))
        except (OSError, json.JSONDecodeError) as e:
            raise DataError(str(e), path=path) from e

    def to_json(self):
        return {k: list(self.values[k]) for k in PARAMETER_NAMES}


@dataclass
class TrainResult:
    params: ParameterSet
    accuracy: float
    verdicts: list            # per example: predicted positive?
    evaluations: int
    correct: list = field(default_factory=list)

    def to_json(self):
        return {"params": self.params.to_json(), "accuracy": self.accuracy,
                "evaluations": self.evaluations, "verdicts": self.verdicts, "correct": self.correct}


def classify(examples, plans, params, lexicon=None, prune=DEFAULT_PRUNE):
    return [feasible(ex.clip, plan, params, lexicon, prune) for ex, plan in zip(examples, plans)]


def _score_point(job):
    examples, plans, params, lexicon, prune = job
    verdicts = classify(examples, plans, params, lexicon, prune)
    return sum(v == ex.positive for v, ex in zip(verdicts, examples)), verdicts


def grid_search(examples, grid, lexicon=None, prune=DEFAULT_PRUNE, workers=1):
    """Evaluate every grid point; return the most accurate :class:`TrainResult`."""
    examples = list(examples)
    if not any(ex.positive for ex in examples) or all(ex.positive for ex in examples):
        raise ContractError("need at least one positive and one negative example")
    plans = [parse(ex.sentence, lexicon=lexicon) for ex in examples]
    jobs = ((examples, plans, p, lexicon, prune) for p in grid.points())
    best, best_correct, best_verdicts = None, -1, None
    evaluations = 0
    if workers and workers > 1:
        ex = ProcessPoolExecutor(max_workers=workers)
        results = ex.map(_score_point, jobs, chunksize=16)
    else:
        ex = None
        results = map(_score_point, jobs)
    try:
        for params, (n_correct, verdicts) in zip(grid.points(), results):
            evaluations += 1
            if n_correct > best_correct:
                best, best_correct, best_verdicts = params, n_correct, verdicts
    finally:
        if ex is not None:
            ex.shutdown()
    return TrainResult(best, best_correct / len(examples), best_verdicts, evaluations,
                       [v == e.positive for v, e in zip(best_verdicts, examples)])


def load_examples(path, cache):
    """Read ``{"examples": [{"clip", "sentence", "label"}]}`` and resolve clips in ``cache``."""
    try:
        doc = json.loads(Path(path).read_text())
    except (OSError, json.JSONDecodeError) as e:
        raise DataError(str(e), path=path) from e
    out = []
    for i, e in enumerate(doc["examples"] if isinstance(doc, dict) else doc):
        label = e.get("label")
        if label not in ("positive", "negative"):
            raise DataError(f"example {i}: label must be 'positive' or 'negative'", path=path)
        out.append(TrainingExample(cache.get(e["clip"]), e["sentence"], label == "positive"))
    return out
