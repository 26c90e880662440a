"""Command-line pipeline: ingest, build-corpus, predict, evaluate, export, stats.

Every subcommand is re-runnable: outputs are a pure function of inputs
plus the seed, and a manifest (config hash, seed, input digests, package
version) is written beside every output directory. Exit code 0 means
zero per-record failures.
"""

from __future__ import annotations

import argparse
import hashlib
import json
import sys
from concurrent.futures import ThreadPoolExecutor
from pathlib import Path

from tdm_miner import __version__
from tdm_miner.corpus import (
    FoldSplit,
    LabelVocabulary,
    SamplingConfig,
    assign_unknown,
    build_vocabulary,
    corpus_stats,
    generate_instances,
    load_annotations,
    make_folds,
    read_annotations,
    write_annotations,
    write_instances,
)
from tdm_miner.doctaet import (
    DocTaetConfig,
    extract_doctaet,
    feature_length_stats,
    read_features,
    write_features,
)
from tdm_miner.errors import TdmError
from tdm_miner.evaluate import (
    Setting,
    crossfold_average,
    evaluate,
    format_report,
)
from tdm_miner.ingest import (
    ConverterConfig,
    PdfParserClient,
    SourceKind,
    convert_latex,
    paper_id_from_path,
    parse_tei,
)
from tdm_miner.kg_export import DEFAULT_BASE_IRI, FORMATS, export_triples
from tdm_miner.predict import predict_corpus, read_predictions, write_predictions
from tdm_miner.scorer import make_scorer

SOURCE_SUFFIXES = {
    SourceKind.LATEX_SOURCE: (".tex",),
    SourceKind.PDF_FILE: (".pdf",),
    SourceKind.TEI_XML: (".xml", ".tei"),
}


def _sha256_file(path: Path) -> str:
    digest = hashlib.sha256()
    with open(path, "rb") as handle:
        for chunk in iter(lambda: handle.read(1 << 20), b""):
            digest.update(chunk)
    return digest.hexdigest()


def _write_manifest(out_dir: Path, command: str, args: argparse.Namespace, inputs: list[Path]):
    config = {
        key: (str(value) if isinstance(value, Path) else value)
        for key, value in sorted(vars(args).items())
        if key not in ("func", "config") and not key.startswith("_")
    }
    canonical = json.dumps(config, sort_keys=True, ensure_ascii=False)
    manifest = {
        "command": command,
        "version": __version__,
        "config": config,
        "config_sha256": hashlib.sha256(canonical.encode("utf-8")).hexdigest(),
        "seed": getattr(args, "seed", None),
        "inputs": {str(path): _sha256_file(path) for path in sorted(inputs) if path.is_file()},
    }
    with open(out_dir / "manifest.json", "w", encoding="utf-8") as handle:
        json.dump(manifest, handle, ensure_ascii=False, indent=2, sort_keys=True)
        handle.write("\n")


def _apply_config_file(args: argparse.Namespace) -> None:
    """Entries in the --config JSON file override command-line flags."""
    if not getattr(args, "config", None):
        return
    with open(args.config, encoding="utf-8") as handle:
        overrides = json.load(handle)
    for key, value in overrides.items():
        setattr(args, key.replace("-", "_"), value)


def _out_dir(args: argparse.Namespace) -> Path:
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    return out


# -- ingest -------------------------------------------------------------------


def _collect_inputs(parser: argparse.ArgumentParser, source: SourceKind, inputs: list[str]):
    suffixes = SOURCE_SUFFIXES[source]
    files: list[Path] = []
    for item in inputs:
        path = Path(item)
        if path.is_dir():
            files.extend(
                p for p in sorted(path.rglob("*")) if p.suffix.lower() in suffixes
            )
        elif path.is_file():
            files.append(path)
        else:
            parser.error(f"input not found: {item}")
    if not files:
        parser.error(f"no {'/'.join(suffixes)} files under {', '.join(inputs)}")
    return files


def cmd_ingest(args: argparse.Namespace, parser: argparse.ArgumentParser) -> int:
    source = SourceKind(args.source)
    files = _collect_inputs(parser, source, args.input)
    if source is SourceKind.PDF_FILE and not args.endpoint and not args.replay_dir:
        parser.error("--source pdf requires --endpoint (or --replay-dir for replays)")
    cfg = DocTaetConfig.for_cap(args.cap)
    converter = ConverterConfig(command=args.converter_cmd)
    pdf_client = None
    if source is SourceKind.PDF_FILE:
        pdf_client = PdfParserClient(
            args.endpoint or "", replay_dir=args.replay_dir, record=args.record
        )

    def ingest_one(path: Path):
        paper_id = paper_id_from_path(path)
        if source is SourceKind.LATEX_SOURCE:
            tei = convert_latex(path, converter)
        elif source is SourceKind.PDF_FILE:
            tei = pdf_client.convert(path)
        else:
            tei = path.read_bytes()
        doc = parse_tei(tei, paper_id)
        feature = extract_doctaet(doc, cfg, uncapped=args.uncapped)
        return doc, feature

    docs, features, failures = [], [], []
    def run(path: Path):
        try:
            return path, ingest_one(path), None
        except (TdmError, OSError) as exc:
            return path, None, exc

    if args.jobs > 1:
        with ThreadPoolExecutor(max_workers=args.jobs) as pool:
            results = list(pool.map(run, files))
    else:
        results = [run(path) for path in files]
    for path, produced, error in results:
        if error is not None:
            failures.append(
                {
                    "paper_id": paper_id_from_path(path),
                    "path": str(path),
                    "error": type(error).__name__,
                    "message": str(error),
                }
            )
        else:
            doc, feature = produced
            docs.append(doc)
            features.append(feature)
    docs.sort(key=lambda d: d.paper_id)
    features.sort(key=lambda f: f.paper_id)

    out = _out_dir(args)
    with open(out / "docs.jsonl", "w", encoding="utf-8") as handle:
        for doc in docs:
            handle.write(json.dumps(doc.to_dict(), ensure_ascii=False) + "\n")
    write_features(features, out / "features.jsonl")
    with open(out / "failures.jsonl", "w", encoding="utf-8") as handle:
        for failure in failures:
            handle.write(json.dumps(failure, ensure_ascii=False) + "\n")
    _write_manifest(out, "ingest", args, files)
    print(f"ingested {len(features)} papers, {len(failures)} failures -> {out}")
    for failure in failures:
        print(f"  FAILED {failure['paper_id']}: {failure['error']}: {failure['message']}")
    return 1 if failures else 0


# -- build-corpus -------------------------------------------------------------


def cmd_build_corpus(args: argparse.Namespace, parser: argparse.ArgumentParser) -> int:
    result = load_annotations(args.papers, args.evaluations)
    for warning in result.warnings:
        print(f"  warning: {warning}")
    vocab = build_vocabulary(result.annotations, min_frequency=args.min_frequency)
    annotations = assign_unknown(result.annotations, vocab)
    features = {f.paper_id: f for f in read_features(args.features)}

    sampling = SamplingConfig(num_false=args.num_false, rng_seed=args.seed)
    instances = []
    with_features = []
    skipped = 0
    for annotation in sorted(annotations, key=lambda a: a.paper_id):
        feature = features.get(annotation.paper_id)
        if feature is None:
            skipped += 1
            continue
        with_features.append(annotation)
        instances.extend(generate_instances(annotation, feature, vocab, sampling))

    out = _out_dir(args)
    write_annotations(sorted(annotations, key=lambda a: a.paper_id), out / "gold.jsonl")
    vocab.save(out / "vocab.jsonl")
    write_instances(instances, out / "instances.jsonl")
    if len(with_features) >= 2:
        make_folds(with_features, rng_seed=args.seed).save(out / "folds.json")
    _write_manifest(out, "build-corpus", args, [Path(args.papers), Path(args.evaluations), Path(args.features)])
    print(
        f"built corpus: {len(with_features)} papers, {len(vocab)} vocabulary triples, "
        f"{len(instances)} instances, {skipped} papers without features -> {out}"
    )
    return 0


# -- predict ------------------------------------------------------------------


def cmd_predict(args: argparse.Namespace, parser: argparse.ArgumentParser) -> int:
    if not 0.0 < args.threshold < 1.0:
        parser.error("--threshold must lie strictly between 0 and 1")
    if args.scorer == "remote" and not args.endpoint:
        parser.error("--scorer remote requires --endpoint")
    features = read_features(args.features)
    vocab = LabelVocabulary.load(args.vocab)
    scorer = make_scorer(
        args.scorer,
        endpoint=args.endpoint,
        batch_size=args.batch_size,
        replay_dir=args.replay_dir,
        record=args.record,
    )
    try:
        predictions = predict_corpus(
            features,
            vocab,
            scorer,
            threshold=args.threshold,
            top_k=args.top_k,
            prefilter=args.prefilter,
            jobs=args.jobs,
        )
    except TdmError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    out = _out_dir(args)
    write_predictions(predictions, out / "predictions.jsonl")
    _write_manifest(out, "predict", args, [Path(args.features), Path(args.vocab)])
    unknowns = sum(1 for p in predictions if p.is_unknown)
    print(f"predicted {len(predictions)} papers ({unknowns} unknown) -> {out}")
    return 0


# -- evaluate -----------------------------------------------------------------


def cmd_evaluate(args: argparse.Namespace, parser: argparse.ArgumentParser) -> int:
    predictions = read_predictions(args.predictions)
    gold = read_annotations(args.gold)
    setting = Setting(args.setting.replace("-", "_"))
    out = _out_dir(args)
    try:
        if args.folds:
            split = FoldSplit.load(args.folds)
            reports = []
            for fold in (0, 1):
                test_ids = set(split.test_ids(fold))
                fold_report = evaluate(
                    [p for p in predictions if p.paper_id in test_ids],
                    [g for g in gold if g.paper_id in test_ids],
                    setting,
                    macro_mode=args.macro,
                )
                fold_report.save(out / f"report_fold{fold}.json")
                reports.append(fold_report)
            report = crossfold_average(reports)
        else:
            report = evaluate(predictions, gold, setting, macro_mode=args.macro)
    except TdmError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    report.save(out / "report.json")
    text = format_report(report)
    (out / "report.txt").write_text(text, encoding="utf-8")
    _write_manifest(out, "evaluate", args, [Path(args.predictions), Path(args.gold)])
    print(text, end="")
    return 0


# -- export -------------------------------------------------------------------


def cmd_export(args: argparse.Namespace, parser: argparse.ArgumentParser) -> int:
    predictions = read_predictions(args.predictions)
    annotations = read_annotations(args.gold) if args.gold else []
    result = export_triples(
        predictions, annotations, format=args.format, base_iri=args.base_iri
    )
    out = _out_dir(args)
    filename = "triples.nt" if args.format == "ntriples" else "records.jsonl"
    (out / filename).write_text(result.text, encoding="utf-8")
    inputs = [Path(args.predictions)] + ([Path(args.gold)] if args.gold else [])
    _write_manifest(out, "export", args, inputs)
    for warning in result.warnings:
        print(f"  warning: {warning}")
    print(f"exported {result.records} records as {args.format} -> {out / filename}")
    return 1 if result.warnings else 0


# -- stats --------------------------------------------------------------------


def _print_stats(title: str, stats) -> None:
    print(f"[{title}]")
    print(f"  papers                 {stats.papers}")
    print(f"  unknown papers         {stats.unknown_papers}")
    print(f"  total TDM-triples      {stats.total_triples}")
    avg = stats.avg_triples_per_paper
    print(f"  avg triples per paper  {avg:.2f}" if avg is not None else
          "  avg triples per paper  n/a")
    print(f"  distinct TDM-triples   {stats.distinct_triples}")
    print(f"  distinct tasks         {stats.distinct_tasks}")
    print(f"  distinct datasets      {stats.distinct_datasets}")
    print(f"  distinct metrics       {stats.distinct_metrics}")


def cmd_stats(args: argparse.Namespace, parser: argparse.ArgumentParser) -> int:
    result = load_annotations(args.papers, args.evaluations)
    for warning in result.warnings:
        print(f"  warning: {warning}")
    report: dict = {}
    splits = sorted({a.split for a in result.annotations if a.split})
    if splits:
        for split in splits:
            subset = [a for a in result.annotations if a.split == split]
            stats = corpus_stats(subset)
            _print_stats(split, stats)
            report[split] = stats.to_dict()
    stats = corpus_stats(result.annotations)
    _print_stats("all", stats)
    report["all"] = stats.to_dict()
    if args.features:
        lengths = feature_length_stats(read_features(args.features))
        print(f"[features] max {lengths.max}  min {lengths.min}  mean {lengths.mean:.2f}")
        report["features"] = {
            "max": lengths.max, "min": lengths.min, "mean": lengths.mean,
        }
    if args.out:
        out = _out_dir(args)
        with open(out / "stats.json", "w", encoding="utf-8") as handle:
            json.dump(report, handle, ensure_ascii=False, indent=2, sort_keys=True)
            handle.write("\n")
        inputs = [Path(args.papers), Path(args.evaluations)]
        if args.features:
            inputs.append(Path(args.features))
        _write_manifest(out, "stats", args, inputs)
    return 0


# -- parser -------------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="tdm-miner",
        description="Mine (Task, Dataset, Metric) triples from papers into a knowledge graph.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p: argparse.ArgumentParser) -> None:
        p.add_argument("--config", help="JSON file whose entries override flags")

    p = sub.add_parser("ingest", help="papers -> structured docs + context features")
    p.add_argument("--source", choices=[k.value for k in SourceKind], required=True)
    p.add_argument("--input", nargs="+", required=True, help="input files or directories")
    p.add_argument("--out", required=True)
    p.add_argument("--cap", type=int, choices=(512, 2000), default=512)
    p.add_argument("--uncapped", action="store_true", help="measurement mode, no truncation")
    p.add_argument("--converter-cmd", default=ConverterConfig.command,
                   help="external LaTeX converter command template")
    p.add_argument("--endpoint", help="remote PDF parser URL")
    p.add_argument("--replay-dir", help="request-hash -> response replay directory")
    p.add_argument("--record", action="store_true", help="record live exchanges into --replay-dir")
    p.add_argument("--jobs", type=int, default=1)
    common(p)
    p.set_defaults(func=cmd_ingest)

    p = sub.add_parser("build-corpus", help="dump + features -> instances, vocab, folds")
    p.add_argument("--papers", required=True, help="papers-with-abstracts dump file")
    p.add_argument("--evaluations", required=True, help="evaluation-tables dump file")
    p.add_argument("--features", required=True, help="features.jsonl from ingest")
    p.add_argument("--out", required=True)
    p.add_argument("--num-false", type=int, default=50)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--min-frequency", type=int, default=1)
    common(p)
    p.set_defaults(func=cmd_build_corpus)

    p = sub.add_parser("predict", help="score vocabulary triples per paper")
    p.add_argument("--features", required=True)
    p.add_argument("--vocab", required=True)
    p.add_argument("--out", required=True)
    p.add_argument("--scorer", choices=("baseline", "remote"), default="baseline")
    p.add_argument("--endpoint", help="model service /score URL")
    p.add_argument("--threshold", type=float, default=0.5)
    p.add_argument("--top-k", type=int, default=None)
    p.add_argument("--prefilter", action="store_true",
                   help="skip remote scoring of triples with zero lexical overlap")
    p.add_argument("--batch-size", type=int, default=64)
    p.add_argument("--replay-dir")
    p.add_argument("--record", action="store_true")
    p.add_argument("--jobs", type=int, default=1)
    common(p)
    p.set_defaults(func=cmd_predict)

    p = sub.add_parser("evaluate", help="score predictions against gold annotations")
    p.add_argument("--predictions", required=True)
    p.add_argument("--gold", required=True, help="gold.jsonl from build-corpus")
    p.add_argument("--out", required=True)
    p.add_argument("--setting", choices=("with-unknown", "without-unknown"),
                   default="with-unknown")
    p.add_argument("--macro", choices=("paper", "label"), default="paper")
    p.add_argument("--folds", help="folds.json for per-fold reports + cross-fold average")
    common(p)
    p.set_defaults(func=cmd_evaluate)

    p = sub.add_parser("export", help="predictions -> knowledge-graph statements")
    p.add_argument("--predictions", required=True)
    p.add_argument("--gold", help="gold.jsonl supplying paper titles and urls")
    p.add_argument("--out", required=True)
    p.add_argument("--format", choices=FORMATS, default="ntriples")
    p.add_argument("--base-iri", default=DEFAULT_BASE_IRI)
    common(p)
    p.set_defaults(func=cmd_export)

    p = sub.add_parser("stats", help="corpus and feature statistics")
    p.add_argument("--papers", required=True)
    p.add_argument("--evaluations", required=True)
    p.add_argument("--features", help="features.jsonl for length statistics")
    p.add_argument("--out", help="also write stats.json here")
    common(p)
    p.set_defaults(func=cmd_stats)
    return parser


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    _apply_config_file(args)
    try:
        return args.func(args, parser)
    except TdmError as exc:
        print(f"error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
