"""Command-line entry point: ``sentrack <subcommand> ...``.

Exit status: 0 success, 1 usage error, 2 data or contract error.
Results go to stdout, diagnostics to stderr.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
from pathlib import Path

from .detections import ingest
from .errors import SentrackError
from .lexicon import load_lexicon
from .predicates import ParameterSet
from .query import enumerate_template_queries, parse
from .search import DetectionCache, baseline_search, format_table, hits_to_json, index_corpus, search
from .sentence_tracker import DEFAULT_PRUNE
from .synth import discrimination_specs, load_specs, write_corpus
from .tracker import best_track
from .trainer import GridSpec, grid_search, load_examples

CORPUS_ENV = "SENTRACK_CORPUS"
CACHE_SUBDIR = "cache"


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        raise UsageError(f"{self.prog}: error: {message}")


def _corpus_dir(args):
    d = args.corpus or os.environ.get(CORPUS_ENV)
    if not d:
        raise UsageError(f"--corpus is required (or set {CORPUS_ENV})")
    return Path(d)


def _open_cache(corpus_dir):
    """The on-disk cache if ``index`` has been run, else an in-memory index."""
    cache_dir = corpus_dir / CACHE_SUBDIR
    if (cache_dir / "manifest.json").exists():
        return DetectionCache.load(cache_dir)
    corpus = ingest(corpus_dir / "detections.jsonl", corpus_dir / "meta.json")
    return index_corpus(corpus)


def _params(args):
    return ParameterSet.load(args.params) if getattr(args, "params", None) else ParameterSet()


def _lexicon(args):
    return load_lexicon(args.lexicon) if getattr(args, "lexicon", None) else None


def _emit(obj):
    print(json.dumps(obj, indent=2))


def cmd_index(args):
    corpus_dir = _corpus_dir(args)
    corpus = ingest(corpus_dir / "detections.jsonl", corpus_dir / "meta.json")
    cache = index_corpus(corpus, corpus_dir / CACHE_SUBDIR)
    print(f"indexed {len(corpus.videos)} videos, {len(cache)} clips, "
          f"{corpus.num_detections()} detections ({cache.writes} files written)")


def cmd_track(args):
    cache = _open_cache(_corpus_dir(args))
    tr = best_track(cache.get(args.clip), args.cls)
    if tr is None:
        out = {"clip": args.clip, "class": args.cls, "score": None, "picks": [], "boxes": []}
    else:
        out = tr.to_json(args.clip)
    _emit(out)


def cmd_parse(args):
    _emit(parse(args.sentence, lexicon=_lexicon(args)).to_json())


def cmd_lexicon(args):
    lex = load_lexicon(args.lexicon)
    rows = []
    for name in lex:
        fsm = lex.fsm(name)
        rows.append({"word": name, "arity": fsm.arity, "states": fsm.n_states, "min_length": fsm.min_length()})
    if args.json:
        _emit(rows)
    else:
        print(f"{'word':<16} {'arity':>5} {'states':>6} {'min_len':>7}")
        for r in rows:
            print(f"{r['word']:<16} {r['arity']:>5} {r['states']:>6} {r['min_length']:>7}")
        print(f"{len(rows)} words OK")


def _threshold(value):
    return float("-inf") if value is None else value


def cmd_search(args):
    cache = _open_cache(_corpus_dir(args))
    k = None if args.top <= 0 else args.top
    hits = search(args.sentence, cache, _params(args), k=k, threshold=_threshold(args.threshold),
                  lexicon=_lexicon(args), prune=args.prune, workers=args.workers)
    doc = hits_to_json(args.sentence, hits)
    if args.out:
        Path(args.out).write_text(json.dumps(doc, indent=2) + "\n")
    if args.json:
        _emit(doc)
    else:
        print(format_table(hits))


def cmd_baseline(args):
    cache = _open_cache(_corpus_dir(args))
    classes = args.classes or parse(args.sentence).classes
    hits = baseline_search(classes, cache, k=None if args.top <= 0 else args.top)
    if args.json:
        _emit(hits_to_json(args.sentence, hits, classes=classes))
    else:
        print(format_table(hits))


def cmd_train(args):
    cache = _open_cache(_corpus_dir(args))
    examples = load_examples(args.examples, cache)
    grid = GridSpec.load(args.grid) if args.grid else GridSpec.uniform(args.steps)
    result = grid_search(examples, grid, lexicon=_lexicon(args), prune=args.prune, workers=args.workers)
    result.params.save(args.out)
    print(f"accuracy {result.accuracy:.3f} over {len(examples)} examples; "
          f"{result.evaluations} grid points evaluated; wrote {args.out}", file=sys.stderr)
    if args.json:
        _emit(result.to_json())


def cmd_synth(args):
    if args.spec:
        specs, classes = load_specs(args.spec)
    else:
        specs, classes = discrimination_specs(seed=args.seed), None
    out = write_corpus(specs, args.out, classes)
    print(f"wrote {len(specs)} videos to {out}")


def cmd_expand(args):
    for s in enumerate_template_queries(include_excluded=args.all):
        print(s)


def build_parser():
    p = _Parser(prog="sentrack", description="Search video clips with sentential queries.")
    sub = p.add_subparsers(dest="command", parser_class=_Parser)

    def corpus_arg(sp):
        sp.add_argument("--corpus", help=f"corpus directory (default ${CORPUS_ENV})")

    def workers_arg(sp):
        sp.add_argument("--workers", type=int, default=os.cpu_count() or 1)

    sp = sub.add_parser("index", help="ingest a corpus and build its detection cache")
    corpus_arg(sp)
    sp.set_defaults(func=cmd_index)

    sp = sub.add_parser("track", help="best single-object track in one clip")
    corpus_arg(sp)
    sp.add_argument("--clip", required=True)
    sp.add_argument("--class", dest="cls", required=True)
    sp.set_defaults(func=cmd_track)

    sp = sub.add_parser("parse", help="print the query plan of a sentence")
    sp.add_argument("--sentence", required=True)
    sp.add_argument("--lexicon")
    sp.set_defaults(func=cmd_parse)

    sp = sub.add_parser("lexicon", help="lexicon utilities")
    sp.add_argument("action", choices=["check"])
    sp.add_argument("--lexicon", help="lexicon JSON (default: bundled)")
    sp.add_argument("--json", action="store_true")
    sp.set_defaults(func=cmd_lexicon)

    sp = sub.add_parser("search", help="rank clips against a sentence")
    sp.add_argument("--sentence", required=True)
    corpus_arg(sp)
    sp.add_argument("--top", type=int, default=10, help="hits to return; 0 for all")
    sp.add_argument("--threshold", type=float, default=None)
    sp.add_argument("--prune", type=int, default=DEFAULT_PRUNE)
    sp.add_argument("--params")
    sp.add_argument("--lexicon")
    sp.add_argument("--json", action="store_true")
    sp.add_argument("--out", help="also write result JSON here")
    workers_arg(sp)
    sp.set_defaults(func=cmd_search)

    sp = sub.add_parser("baseline", help="rank clips by detector/tracker score alone")
    corpus_arg(sp)
    g = sp.add_mutually_exclusive_group(required=True)
    g.add_argument("--sentence")
    g.add_argument("--classes", nargs="+")
    sp.add_argument("--top", type=int, default=10)
    sp.add_argument("--json", action="store_true")
    sp.set_defaults(func=cmd_baseline)

    sp = sub.add_parser("train", help="grid-search the nine predicate parameters")
    corpus_arg(sp)
    sp.add_argument("--examples", required=True)
    sp.add_argument("--grid", help="grid JSON; default is a uniform grid over the stock ranges")
    sp.add_argument("--steps", type=int, default=3)
    sp.add_argument("--out", required=True)
    sp.add_argument("--prune", type=int, default=DEFAULT_PRUNE)
    sp.add_argument("--lexicon")
    sp.add_argument("--json", action="store_true")
    workers_arg(sp)
    sp.set_defaults(func=cmd_train)

    sp = sub.add_parser("synth", help="write a synthetic corpus")
    sp.add_argument("--spec", help="event spec JSON; default is the 50-clip discrimination corpus")
    sp.add_argument("--out", required=True)
    sp.add_argument("--seed", type=int, default=0)
    sp.set_defaults(func=cmd_synth)

    sp = sub.add_parser("expand-queries", help="print the template query set")
    sp.add_argument("--all", action="store_true", help="include the 63 filtered sentences")
    sp.set_defaults(func=cmd_expand)
    return p


def run(argv=None):
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
        if args.command is None:
            parser.print_usage(sys.stderr)
            raise UsageError("sentrack: error: a subcommand is required")
        args.func(args)
    except UsageError as e:
        print(e, file=sys.stderr)
        return 1
    except SentrackError as e:
        print(f"sentrack: {e}", file=sys.stderr)
        return 2
    return 0


def main():
    sys.exit(run())


if __name__ == "__main__":
    main()
