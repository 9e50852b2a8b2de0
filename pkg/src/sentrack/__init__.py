"""Rank video clips against sentences by jointly tracking the participants
and recognising the words."""

from .detections import Clip, Corpus, Detection, ingest, normalize_score, split_clips
from .errors import ContractError, DataError, LexiconError, QueryParseError, SentrackError
from .lexicon import Lexicon, compile_fsm, load_lexicon, recognize, stock_lexicon
from .predicates import ParameterSet, eval_expr, eval_primitive
from .query import QueryPlan, enumerate_template_queries, parse
from .search import DetectionCache, SearchHit, baseline_search, index_corpus, search
from .sentence_tracker import SentenceScore, feasible, joint_score
from .tracker import Track, best_track, motion_coherence
from .trainer import GridSpec, TrainingExample, grid_search

__version__ = "0.1.0"

__all__ = [
    "Clip", "Corpus", "Detection", "ingest", "normalize_score", "split_clips",
    "ContractError", "DataError", "LexiconError", "QueryParseError", "SentrackError",
    "Lexicon", "compile_fsm", "load_lexicon", "recognize", "stock_lexicon",
    "ParameterSet", "eval_expr", "eval_primitive",
    "QueryPlan", "enumerate_template_queries", "parse",
    "DetectionCache", "SearchHit", "baseline_search", "index_corpus", "search",
    "SentenceScore", "feasible", "joint_score",
    "Track", "best_track", "motion_coherence",
    "GridSpec", "TrainingExample", "grid_search",
]
