"""Command-line entrypoint orchestrating the pipeline.

Stages communicate only via files so external harnesses can interpose
between emission and analysis.  Exit codes: 0 success, 1 usage error,
2 data error.  All randomness flows from --seed and every stage writes a
manifest sufficient to re-run it exactly.
"""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

from . import analyzer, extractor, kg_store, ks_emit, probes, wikihow
from .lexical import load_lexical_resource
from .manifest import write_manifest

USAGE_ERROR = 1
DATA_ERROR = 2


class _Parser(argparse.ArgumentParser):
    def error(self, message):  # usage errors exit 1, not argparse's 2
        self.print_usage(sys.stderr)
        print(f"{self.prog}: error: {message}", file=sys.stderr)
        raise SystemExit(USAGE_ERROR)


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="kgmatch", description=__doc__)
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    p = sub.add_parser("convert-atomic", help="flatten native ATOMIC CSV to normalized TSV")
    p.add_argument("--input", required=True)
    p.add_argument("--out-dir", required=True)
    p.add_argument("--force", action="store_true")

    p = sub.add_parser("load-check", help="load a KG file and report counts")
    p.add_argument("--kg", choices=["atomic", "edge"], required=True)
    p.add_argument("--input", required=True)
    p.add_argument("--format", default=None,
                   help="normalized-tsv (atomic) or edge-tsv/assertions-csv (edge)")

    p = sub.add_parser("extract", help="extract per-candidate knowledge items")
    p.add_argument("--kg", choices=["atomic", "edge"], required=True)
    p.add_argument("--task", required=True, help="task instances, one JSON record per line")
    p.add_argument("--pairs", help="normalized pair TSV (atomic)")
    p.add_argument("--edges", help="edge graph file (edge)")
    p.add_argument("--edge-format", choices=["edge-tsv", "assertions-csv"], default="edge-tsv")
    p.add_argument("--conditioning", choices=["qc", "a"], required=True)
    p.add_argument("--shape", choices=["pair", "path", "subgraph"], required=True)
    p.add_argument("--filter", choices=["hq", "hr"], required=True)
    p.add_argument("--pool-size", type=int, default=50)
    p.add_argument("--atomic-subgraph-cap", type=int, default=3)
    p.add_argument("--edge-subgraph-cap", type=int, default=5)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--jobs", type=int, default=1)
    p.add_argument("--out-dir", required=True)
    p.add_argument("--force", action="store_true")

    p = sub.add_parser("split", help="tag instances CS-X and write the coverage report")
    p.add_argument("--results", required=True, help="extraction output file")
    p.add_argument("--out-dir", required=True)
    p.add_argument("--force", action="store_true")

    p = sub.add_parser("emit-ks", help="emit knowledge-surrounded and baseline datasets")
    p.add_argument("--train-task", required=True)
    p.add_argument("--eval-task", help="defaults to --train-task")
    p.add_argument("--train-results", required=True)
    p.add_argument("--eval-results", help="defaults to --train-results")
    p.add_argument("--subset", required=True, help="e.g. CS-3")
    p.add_argument("--eval-variant", choices=["ks+", "ks-"], default="ks+")
    p.add_argument("--baseline", action="store_true")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out-dir", required=True)
    p.add_argument("--force", action="store_true")

    p = sub.add_parser("build-wikihow", help="build an instance-conditioned WikiHow graph")
    p.add_argument("--parses", required=True, help="parse-exchange file")
    p.add_argument("--instance", required=True)
    p.add_argument("--articles", help="article records for title retrieval")
    p.add_argument("--goal", help="goal text for title retrieval")
    p.add_argument("--titles-k", type=int, default=1)
    p.add_argument("--out-dir", required=True)
    p.add_argument("--force", action="store_true")

    p = sub.add_parser("gen-probes", help="generate QA and MLM probe files")
    p.add_argument("--train-pairs", help="normalized pair TSV, train split")
    p.add_argument("--dev-pairs", required=True, help="normalized pair TSV, dev split")
    p.add_argument("--balance", action="store_true")
    p.add_argument("--out-dir", required=True)
    p.add_argument("--force", action="store_true")

    p = sub.add_parser("analyze", help="accuracy, coverage and distribution-change reports")
    p.add_argument("--base-log", help="baseline prediction log")
    p.add_argument("--ks-log", help="knowledge-surrounded prediction log")
    p.add_argument("--task", help="task instances with gold answers")
    p.add_argument("--results", help="extraction output, for the coverage table")
    p.add_argument("--curve", help="learning curve JSON: [[fraction, accuracy], ...]")
    p.add_argument("--out-dir", required=True)
    p.add_argument("--force", action="store_true")

    return parser


def _gold_map(task_path: str) -> dict[str, int]:
    return {
        inst.instance_id: inst.gold_index
        for inst in extractor.load_task_file(task_path)
    }


def cmd_convert_atomic(args) -> int:
    out_dir = Path(args.out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    out_path = out_dir / "pairs.tsv"
    written = kg_store.convert_atomic_csv(args.input, out_path)
    write_manifest(out_dir, "convert-atomic", {"input": args.input},
                   [out_path], extra={"rows": written}, force=args.force)
    print(f"wrote {written} pairs to {out_path}")
    return 0


def cmd_load_check(args) -> int:
    if args.kg == "atomic":
        corpus = kg_store.load_pair_corpus(args.input, args.format or "normalized-tsv")
        print(f"{args.input}: {len(corpus)} pairs, {corpus.skipped} rows skipped")
    else:
        graph = kg_store.load_edge_graph(args.input, args.format or "edge-tsv")
        print(f"{args.input}: {len(graph.nodes)} nodes, {len(graph.edges)} edges")
    return 0


def cmd_extract(args) -> int:
    parser_error = None
    if args.kg == "atomic" and not args.pairs:
        parser_error = "--pairs is required with --kg atomic"
    if args.kg == "edge" and not args.edges:
        parser_error = "--edges is required with --kg edge"
    if parser_error:
        print(f"kgmatch extract: error: {parser_error}", file=sys.stderr)
        return USAGE_ERROR

    instances = extractor.load_task_file(args.task)
    if args.kg == "atomic":
        corpus = kg_store.load_pair_corpus(args.pairs)
        store = extractor.PairStore(corpus)
    else:
        graph = kg_store.load_edge_graph(args.edges, args.edge_format)
        store = extractor.EdgeStore(graph)
    config = extractor.ExtractionConfig(
        conditioning=args.conditioning.upper(),
        shape=args.shape,
        filter=args.filter.upper(),
        pool_size=args.pool_size,
        atomic_subgraph_cap=args.atomic_subgraph_cap,
        edge_subgraph_cap=args.edge_subgraph_cap,
    )
    results = extractor.extract_dataset(store, args.kg, instances, config,
                                        seed=args.seed, jobs=args.jobs)
    out_dir = Path(args.out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    out_path = out_dir / "extraction.jsonl"
    extractor.write_results(results, out_path)
    write_manifest(
        out_dir, "extract",
        {"kg": args.kg, "task": args.task, "pairs": args.pairs,
         "edges": args.edges,
         "conditioning": config.conditioning, "shape": config.shape,
         "filter": config.filter, "pool_size": config.pool_size,
         "atomic_subgraph_cap": config.atomic_subgraph_cap,
         "edge_subgraph_cap": config.edge_subgraph_cap},
        [out_path], seed=args.seed, force=args.force,
    )
    print(f"extracted {len(results)} instances -> {out_path}")
    return 0


def cmd_split(args) -> int:
    records = extractor.load_results(args.results)
    subsets: dict[str, list[str]] = {}
    for rec in records:
        subsets.setdefault(rec["subset_tag"], []).append(rec["instance_id"])
    report = analyzer.coverage_report(subsets, len(records))
    out_dir = Path(args.out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    subsets_path = out_dir / "subsets.json"
    subsets_path.write_text(json.dumps(subsets, indent=2, sort_keys=True) + "\n", "utf-8")
    coverage_path = out_dir / "coverage.json"
    coverage_path.write_text(json.dumps(report, indent=2, sort_keys=True) + "\n", "utf-8")
    table_path = out_dir / "coverage.txt"
    table_path.write_text(analyzer.format_coverage_table({"extraction": report}) + "\n", "utf-8")
    write_manifest(out_dir, "split", {"results": args.results},
                   [subsets_path, coverage_path, table_path], force=args.force)
    print(analyzer.format_coverage_table({"extraction": report}))
    return 0


def cmd_emit_ks(args) -> int:
    train_instances = extractor.load_task_file(args.train_task)
    eval_instances = extractor.load_task_file(args.eval_task or args.train_task)
    train_results = _results_to_objects(args.train_results)
    eval_results = _results_to_objects(args.eval_results or args.train_results)
    plan = ks_emit.EmissionPlan(
        subset=args.subset,
        eval_variant=args.eval_variant.upper(),
        baseline=args.baseline,
    )
    paths = ks_emit.emit_dataset(
        train_instances, train_results, eval_instances, eval_results,
        plan, args.out_dir, seed=args.seed, force=args.force,
    )
    print(f"wrote {paths['train']} and {paths['eval']}")
    return 0


def _results_to_objects(path: str) -> list[extractor.ExtractionResult]:
    results = []
    for rec in extractor.load_results(path):
        config = extractor.ExtractionConfig(**rec["config"])
        per_candidate = [
            None if slot is None else extractor.KnowledgeItem(
                shape=slot["shape"], score=slot["score"],
                rendered=slot["rendered"], provenance=tuple(slot["provenance"]),
            )
            for slot in rec["per_candidate"]
        ]
        results.append(extractor.ExtractionResult(
            instance_id=rec["instance_id"], per_candidate=per_candidate, config=config,
        ))
    return results


def cmd_build_wikihow(args) -> int:
    out_dir = Path(args.out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    extra: dict = {}
    if args.articles and args.goal:
        articles = wikihow.load_articles(args.articles)
        index = wikihow.build_title_index(articles)
        ranked = wikihow.retrieve_titles(index, args.goal, args.titles_k)
        extra["retrieved_titles"] = [
            {"article_id": a.article_id, "title": a.title, "score": s} for a, s in ranked
        ]
    graph = wikihow.instance_graph_from_file(args.parses, args.instance)
    graph_path = out_dir / "graph.tsv"
    with graph_path.open("w", encoding="utf-8") as fh:
        for edge in graph.edges:
            fh.write(f"{graph.lemma(edge.head)}\t{edge.relation}\t"
                     f"{graph.lemma(edge.tail)}\t{edge.weight}\n")
    write_manifest(out_dir, "build-wikihow",
                   {"parses": args.parses, "instance": args.instance},
                   [graph_path], extra=extra, force=args.force)
    print(f"{len(graph.nodes)} nodes, {len(graph.edges)} edges -> {graph_path}")
    return 0


def cmd_gen_probes(args) -> int:
    corpora = {}
    if args.train_pairs:
        corpora["train"] = kg_store.load_pair_corpus(args.train_pairs)
    corpora["dev"] = kg_store.load_pair_corpus(args.dev_pairs)
    resource = load_lexical_resource()
    out_dir = Path(args.out_dir)
    report = probes.emit_probe_suite(corpora, out_dir, resource, balance=args.balance)
    report_path = out_dir / "sizes.json"
    report_path.write_text(json.dumps(report, indent=2, sort_keys=True) + "\n", "utf-8")
    table_path = out_dir / "sizes.txt"
    table_path.write_text(probes.format_size_report(report), "utf-8")
    outputs = sorted(p for p in out_dir.glob("*.jsonl"))
    write_manifest(out_dir, "gen-probes",
                   {"train_pairs": args.train_pairs, "dev_pairs": args.dev_pairs,
                    "balance": args.balance},
                   outputs + [report_path, table_path], force=args.force)
    print(probes.format_size_report(report))
    return 0


def cmd_analyze(args) -> int:
    out_dir = Path(args.out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    outputs: list[Path] = []
    summary: dict = {}

    if args.ks_log and args.task:
        gold = _gold_map(args.task)
        ks_log = analyzer.load_prediction_log(args.ks_log)
        summary["ks_accuracy"] = analyzer.accuracy(ks_log, gold)
        if args.base_log:
            base_log = analyzer.load_prediction_log(args.base_log)
            summary["baseline_accuracy"] = analyzer.accuracy(base_log, gold)
            deltas, means = analyzer.delta_analysis(base_log, ks_log, gold)
            summary["delta_means"] = means
            deltas_path = out_dir / "deltas.jsonl"
            with deltas_path.open("w", encoding="utf-8") as fh:
                for d in deltas:
                    fh.write(json.dumps(
                        {"instance_id": d.instance_id, "delta": d.delta,
                         "change_kind": d.change_kind}, sort_keys=True) + "\n")
            outputs.append(deltas_path)
            table_path = out_dir / "delta_table.txt"
            table_path.write_text(analyzer.format_delta_table(means) + "\n", "utf-8")
            outputs.append(table_path)

    if args.results:
        records = extractor.load_results(args.results)
        subsets: dict[str, list[str]] = {}
        for rec in records:
            subsets.setdefault(rec["subset_tag"], []).append(rec["instance_id"])
        summary["coverage"] = analyzer.coverage_report(subsets, len(records))

    if args.curve:
        points = json.loads(Path(args.curve).read_text("utf-8"))
        curve = analyzer.LearningCurve(tuple((float(x), float(y)) for x, y in points))
        mx, ws = analyzer.curve_metrics(curve)
        summary["curve"] = {"max": mx, "WS": ws}

    if not summary:
        print("kgmatch analyze: error: nothing to analyze "
              "(need --ks-log/--task, --results, or --curve)", file=sys.stderr)
        return USAGE_ERROR

    summary_path = out_dir / "analysis.json"
    summary_path.write_text(json.dumps(summary, indent=2, sort_keys=True) + "\n", "utf-8")
    outputs.append(summary_path)
    write_manifest(out_dir, "analyze",
                   {"base_log": args.base_log, "ks_log": args.ks_log,
                    "task": args.task, "results": args.results, "curve": args.curve},
                   outputs, force=args.force)
    print(json.dumps(summary, indent=2, sort_keys=True))
    return 0


COMMANDS = {
    "convert-atomic": cmd_convert_atomic,
    "load-check": cmd_load_check,
    "extract": cmd_extract,
    "split": cmd_split,
    "emit-ks": cmd_emit_ks,
    "build-wikihow": cmd_build_wikihow,
    "gen-probes": cmd_gen_probes,
    "analyze": cmd_analyze,
}


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return exc.code if isinstance(exc.code, int) else USAGE_ERROR
    try:
        return COMMANDS[args.command](args)
    except (kg_store.KgFormatError, ks_emit.EmissionError, analyzer.LogError,
            wikihow.ParseFormatError, FileNotFoundError, FileExistsError,
            json.JSONDecodeError, ValueError) as exc:
        print(f"kgmatch {args.command}: error: {exc}", file=sys.stderr)
        return DATA_ERROR


if __name__ == "__main__":
    sys.exit(main())
