"""Command-line front door.

Subcommands wire the pipeline end to end: ``init`` creates a project,
``ingest`` loads OCR TSV or FUNSD-style files, ``bootstrap`` runs
classify + link + schema induction + annotation generation, ``serve``
starts the review service, ``sample`` prints the next review batch,
``iterate`` exports a training set, ``score`` reports metrics against
reference data, and ``synth`` writes seeded synthetic fixtures.

Exit codes: 0 success, 1 usage error, 2 data error.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
from concurrent.futures import ThreadPoolExecutor
from pathlib import Path

from . import __version__
from .active import build_iteration, ranked_queue
from .annotate import generate_annotations, induce_schema
from .classify import aggregate_entities, classify
from .config import UNBOUNDED, ProjectConfig
from .errors import FormloopError
from .ingest import parse_funsd, parse_ocr_tsv
from .linker import link
from .metrics import format_report, project_scores
from .store import ProjectStore
from .synth import write_corpus

IMAGE_SUFFIXES = (".png", ".jpg", ".jpeg")


class _Parser(argparse.ArgumentParser):
    """argparse exits 2 on usage errors; our contract reserves 2 for data
    errors, so remap."""

    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(1, f"{self.prog}: error: {message}\n")


def _add_root(parser: argparse.ArgumentParser):
    parser.add_argument(
        "--root",
        default=os.environ.get("PROJECT_ROOT"),
        help="project directory (default: $PROJECT_ROOT)",
    )


def _add_config_flags(parser: argparse.ArgumentParser):
    parser.add_argument("--classifier", choices=("gold_replay", "rule_based", "remote"))
    parser.add_argument("--endpoint", help="classifier URL for --classifier remote")
    parser.add_argument("--vertical-weight", type=float, dest="vertical_weight")
    parser.add_argument(
        "--max-link-distance",
        dest="max_link_distance_ratio",
        type=_ratio_arg,
        help="max link distance as a fraction of the page diagonal, or 'none'",
    )
    parser.add_argument("--uncertainty", choices=("mean_entropy", "min_margin"))


def _ratio_arg(text: str):
    if text.lower() == "none":
        return UNBOUNDED
    try:
        return float(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected a number or 'none', got {text!r}")


def build_parser() -> _Parser:
    parser = _Parser(prog="formloop", description=__doc__.split("\n\n")[1])
    parser.add_argument("--version", action="version", version=f"formloop {__version__}")
    sub = parser.add_subparsers(dest="command", metavar="command")

    p = sub.add_parser("init", parents=[], help="create a new project")
    _add_root(p)
    p.add_argument("--name", help="project name (default: root directory name)")
    _add_config_flags(p)

    p = sub.add_parser("ingest", help="load OCR TSV or annotation JSON files")
    _add_root(p)
    p.add_argument("--funsd", nargs="+", default=[], metavar="PATH",
                   help="annotation JSON files or directories of them")
    p.add_argument("--tsv", nargs="+", default=[], metavar="PATH",
                   help="OCR TSV files or directories of them")

    p = sub.add_parser("bootstrap", help="classify, link, and generate annotations")
    _add_root(p)
    _add_config_flags(p)
    p.add_argument("--force", action="store_true",
                   help="regenerate docs that already have annotations")
    p.add_argument("--jobs", type=int, default=1, help="parallel workers")

    p = sub.add_parser("serve", help="run the review service")
    _add_root(p)
    p.add_argument("--host", default="127.0.0.1")
    p.add_argument("--port", type=int, default=8400)

    p = sub.add_parser("sample", help="print the next review batch")
    _add_root(p)
    p.add_argument("--k", type=int, default=5)
    p.add_argument("--strategy", choices=("mean_entropy", "min_margin"))

    p = sub.add_parser("iterate", help="export reviewed docs as a training set")
    _add_root(p)

    p = sub.add_parser("score", help="report metrics against reference data")
    _add_root(p)
    p.add_argument("--json", action="store_true", help="machine-readable output")

    p = sub.add_parser("synth", help="generate seeded synthetic fixtures")
    p.add_argument("--out", required=True, help="output directory")
    p.add_argument("--count", type=int, default=10)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--images", action="store_true", help="render page images too")

    return parser


def _open_store(args, parser: _Parser) -> ProjectStore:
    if not args.root:
        parser.error("--root is required (or set PROJECT_ROOT)")
    return ProjectStore.open(args.root)


def _merged_config(base: ProjectConfig, args) -> ProjectConfig:
    return base.merged(
        classifier=getattr(args, "classifier", None),
        endpoint=getattr(args, "endpoint", None),
        vertical_weight=getattr(args, "vertical_weight", None),
        max_link_distance_ratio=getattr(args, "max_link_distance_ratio", None),
        uncertainty=getattr(args, "uncertainty", None),
    )


def _expand(paths: list[str], suffix: str) -> list[Path]:
    out = []
    for raw in paths:
        path = Path(raw)
        if path.is_dir():
            out.extend(sorted(path.glob(f"*{suffix}")))
        else:
            out.append(path)
    return out


def _sibling_image(path: Path) -> Path | None:
    for suffix in IMAGE_SUFFIXES:
        candidate = path.with_suffix(suffix)
        if candidate.exists():
            return candidate
    return None


def cmd_init(args, parser) -> int:
    if not args.root:
        parser.error("--root is required (or set PROJECT_ROOT)")
    config = _merged_config(ProjectConfig(), args)
    root = Path(args.root)
    ProjectStore.init(root, args.name or root.resolve().name, config)
    print(f"initialized project at {root}")
    return 0


def cmd_ingest(args, parser) -> int:
    store = _open_store(args, parser)
    if not args.funsd and not args.tsv:
        parser.error("nothing to ingest: pass --funsd and/or --tsv")
    count = 0
    for path in _expand(args.funsd, ".json"):
        document, gold = parse_funsd(path.read_text(encoding="utf-8"), path.stem)
        image = _sibling_image(path)
        if image is None and document.page.image_ref:
            candidate = path.parent / document.page.image_ref
            image = candidate if candidate.exists() else None
        store.add_document(document, image)
        store.save_gold(document.doc_id, gold.entities, gold.links)
        count += 1
    for path in _expand(args.tsv, ".tsv"):
        document = parse_ocr_tsv(path.read_text(encoding="utf-8"), path.stem)
        store.add_document(document, _sibling_image(path))
        count += 1
    print(f"ingested {count} documents")
    return 0


def _bootstrap_doc(store: ProjectStore, doc_id: str, config: ProjectConfig):
    document = store.load_document(doc_id)
    gold = None
    if config.classifier == "gold_replay":
        gold = store.load_gold(doc_id)
        if gold is None:
            raise FormloopError(
                f"gold_replay classifier needs reference annotations, "
                f"and {doc_id} has none"
            )
    kind = config.classifier_kind(gold)
    predictions = classify(document, kind)
    entities = aggregate_entities(document, predictions)
    result = link(entities, document.page, config.link)
    store.save_entities(doc_id, entities, result, predictions, config.classifier)
    return entities, result, predictions


def bootstrap_project(
    store: ProjectStore, config: ProjectConfig, force: bool = False, jobs: int = 1
) -> dict:
    """Classify, link, induce the schema, and generate annotations for every
    document that does not have them yet (all documents with ``force``).

    Returns a summary dict: processed doc ids, annotation count, schema size.
    """
    todo = []
    for doc_id in store.list_docs():
        if store.has_annotations(doc_id) and not force:
            continue
        if force and store.read_audit(doc_id):
            raise FormloopError(
                f"refusing --force on {doc_id}: it has committed review actions"
            )
        todo.append(doc_id)
    if not todo:
        return {"docs": [], "annotations": 0, "labels": 0}

    if jobs > 1:
        with ThreadPoolExecutor(max_workers=jobs) as pool:
            list(pool.map(lambda d: _bootstrap_doc(store, d, config), todo))
    else:
        for doc_id in todo:
            _bootstrap_doc(store, doc_id, config)

    # Schema induction looks at every bootstrapped document, not just this
    # run's batch, so labels stay stable as the corpus grows.
    per_document = {}
    for doc_id in store.list_docs():
        try:
            entities, result, _, _ = store.load_entities(doc_id)
        except FormloopError:
            continue
        per_document[doc_id] = (entities, result)
    schema = induce_schema(per_document)
    store.set_schema(schema)

    generated = 0
    for doc_id in todo:
        document = store.load_document(doc_id)
        entities, result, predictions, _ = store.load_entities(doc_id)
        records = generate_annotations(document, entities, result, schema, predictions)
        store.save_baseline(doc_id, records)
        generated += len(records)

    return {"docs": todo, "annotations": generated, "labels": len(schema.labels)}


def cmd_bootstrap(args, parser) -> int:
    store = _open_store(args, parser)
    config = _merged_config(store.config(), args)
    summary = bootstrap_project(store, config, force=args.force, jobs=args.jobs)
    if not summary["docs"]:
        print("nothing to do: every document already has annotations")
    else:
        print(
            f"bootstrapped {len(summary['docs'])} documents: "
            f"{summary['annotations']} annotations, {summary['labels']} schema labels"
        )
    return 0


def cmd_serve(args, parser) -> int:
    store = _open_store(args, parser)
    from .service import serve

    print(f"serving {store.root} on http://{args.host}:{args.port}")
    serve(store, args.host, args.port)
    return 0


def cmd_sample(args, parser) -> int:
    store = _open_store(args, parser)
    if args.k < 1:
        parser.error("--k must be at least 1")
    for entry in ranked_queue(store, args.k, args.strategy):
        print(f"{entry['doc_id']}\t{entry['score']:.6f}")
    return 0


def cmd_iterate(args, parser) -> int:
    store = _open_store(args, parser)
    number, manifest = build_iteration(store)
    counts = manifest["counts"]
    print(
        f"iteration {number}: {counts['docs']} docs "
        f"(accepted={counts['accepted']} edited={counts['edited']} "
        f"rejected={counts['rejected']}) -> {store.iteration_dir(number)}"
    )
    return 0


def cmd_score(args, parser) -> int:
    store = _open_store(args, parser)
    scores = project_scores(store)
    if scores["entities"] is None:
        print("no reference data to score against", file=sys.stderr)
        return 2
    if args.json:
        print(json.dumps(scores, ensure_ascii=False, indent=1))
    else:
        print(format_report(scores))
    return 0


def cmd_synth(args, parser) -> int:
    paths = write_corpus(args.out, args.count, args.seed, args.images)
    print(f"wrote {len(paths)} synthetic documents to {args.out}")
    return 0


_COMMANDS = {
    "init": cmd_init,
    "ingest": cmd_ingest,
    "bootstrap": cmd_bootstrap,
    "serve": cmd_serve,
    "sample": cmd_sample,
    "iterate": cmd_iterate,
    "score": cmd_score,
    "synth": cmd_synth,
}


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    if not args.command:
        parser.error("a subcommand is required")
    try:
        return _COMMANDS[args.command](args, parser)
    except FormloopError as err:
        print(f"error: {err}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
