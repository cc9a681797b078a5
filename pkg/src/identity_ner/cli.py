"""Command-line interface.

Subcommands cover the full pipeline: synthesize data, train the two models,
align a sentence-labeled corpus into typed spans, review, evaluate, and run
the analytics.  Report-producing commands (eval, analyze) write a text
table, a TSV, a JSON file, and a PNG figure into the output directory.

Exit codes: 0 success, 1 usage error, 2 data error.
"""

from __future__ import annotations

import json
import sys
from pathlib import Path
from typing import Optional

import click

from . import __version__
from . import classifier as clf
from . import crf
from .alignment import (
    AlignmentConfig,
    align_corpus,
    apply_decision_files,
    auto_accept_corpus,
    export_review_queue,
    read_sentences,
    write_sentences,
)
from .analytics import (
    CATEGORY_ORDER,
    correlation_matrix,
    correlation_matrix_json,
    count_intersections,
    count_mentions,
    format_correlation_matrix,
    format_intersections,
    mention_table_rows,
    read_mentions,
    read_posts,
)
from .corpus import (
    iter_jsonl,
    read_span_corpus,
    strip_labels,
    write_jsonl,
    write_span_corpus,
)
from .errors import CorpusFormatError, IdentityNerError
from .evaluation import (
    evaluate_corpus,
    evaluate_predictions,
    format_report,
    report_tsv,
    tag_document,
)
from .features import FeatureConfig
from .model_io import load_classifier, load_crf, save_model
from .synth import generate_synthetic_corpus, three_way_split
from .text import TYPED_TAGS, UNTYPED_TAGS, CategoryLabel, encode_bio, tokenize
from .train import TrainConfig


def _load_config_file(path: Optional[str]) -> dict:
    if not path:
        return {}
    try:
        with open(path, encoding="utf-8") as fh:
            obj = json.load(fh)
    except json.JSONDecodeError as exc:
        raise CorpusFormatError(f"{path}: invalid config JSON: {exc}") from exc
    if not isinstance(obj, dict):
        raise CorpusFormatError(f"{path}: config must be a JSON object")
    return obj


class Settings:
    """Global flags plus the optional config file, with flag > file > default."""

    def __init__(self, seed: Optional[int], config: dict, output: Optional[str]):
        self.seed = seed
        self.config = config
        self.output = output

    def feature_config(self, **overrides) -> FeatureConfig:
        base = dict(self.config.get("features", {}))
        base.update({k: v for k, v in overrides.items() if v is not None})
        return FeatureConfig.from_json(base)

    def train_config(self, **overrides) -> TrainConfig:
        base = dict(self.config.get("training", {}))
        base.update({k: v for k, v in overrides.items() if v is not None})
        if self.seed is not None:
            base["seed"] = self.seed
        return TrainConfig.from_json(base)

    def section(self, name: str) -> dict:
        return dict(self.config.get(name, {}))

    def resolve_output(self, option: Optional[str], what: str) -> Path:
        target = option or self.output
        if not target:
            raise click.UsageError(f"missing --output for {what}")
        return Path(target)


pass_settings = click.make_pass_decorator(Settings)

_in_path = click.Path(exists=True, dir_okay=False)


@click.group(name="identity-ner")
@click.version_option(__version__)
@click.option("--seed", type=int, default=None, help="Override every seed.")
@click.option("--config", "config_path", type=_in_path, default=None,
              help="JSON config file with features/training/alignment/service sections.")
@click.option("--output", "output_path", type=click.Path(), default=None,
              help="Default output path for commands that write one target.")
@click.pass_context
def cli(ctx, seed, config_path, output_path):
    """NER pipeline for identity-group mentions."""
    ctx.obj = Settings(seed, _load_config_file(config_path), output_path)


# --- data generation and inspection -----------------------------------------


@cli.command()
@click.option("--size", type=int, default=200, show_default=True)
@click.option("--seed", type=int, default=42, show_default=True)
@click.option("--output-dir", type=click.Path(file_okay=False), default=None)
@pass_settings
def synth(settings: Settings, size: int, seed: int, output_dir: Optional[str]):
    """Generate a synthetic labeled corpus with gold spans (split 80/10/10)."""
    if settings.seed is not None:
        seed = settings.seed
    out = settings.resolve_output(output_dir, "synth")
    out.mkdir(parents=True, exist_ok=True)
    sentences, gold = generate_synthetic_corpus(size, seed)
    for name, split in zip(("train", "val", "test"), three_way_split(sentences)):
        write_sentences(out / f"sentences.{name}.jsonl", split)
    for name, split in zip(("train", "val", "test"), three_way_split(gold)):
        write_span_corpus(out / f"spans.{name}.jsonl", split)
    click.echo(f"wrote {len(sentences)} sentences + gold spans to {out}")


@cli.command()
@click.option("--train", "train_path", type=_in_path, default=None)
@click.option("--val", "val_path", type=_in_path, default=None)
@click.option("--test", "test_path", type=_in_path, default=None)
@click.option("--output-dir", type=click.Path(file_okay=False), default=None)
def stats(train_path, val_path, test_path, output_dir):
    """Entity counts per category for each split of a span corpus."""
    splits = [("Train", train_path), ("Validation", val_path), ("Testing", test_path)]
    splits = [(name, path) for name, path in splits if path]
    if not splits:
        raise click.UsageError("give at least one of --train/--val/--test")

    rows = []
    totals = {cat: 0 for cat in CategoryLabel}
    grand = 0
    for name, path in splits:
        docs = read_span_corpus(path)
        counts = {cat: 0 for cat in CategoryLabel}
        for doc in docs:
            for span in doc.spans:
                if span.label:
                    counts[span.label] += 1
        total = sum(counts.values())
        rows.append((name, total, counts))
        for cat in CategoryLabel:
            totals[cat] += counts[cat]
        grand += total
    rows.append(("Total", grand, totals))

    header = ["", "Total"] + [c.display for c in CategoryLabel]
    table = [header] + [
        [name, str(total)] + [str(counts[c]) for c in CategoryLabel]
        for name, total, counts in rows
    ]
    widths = [max(len(r[i]) for r in table) for i in range(len(header))]
    text = "\n".join(
        "  ".join(cell.ljust(w) for cell, w in zip(row, widths)).rstrip()
        for row in table
    ) + "\n"
    click.echo(text, nl=False)
    if output_dir:
        out = Path(output_dir)
        out.mkdir(parents=True, exist_ok=True)
        (out / "stats.txt").write_text(text, encoding="utf-8")
        payload = {
            name: {"total": total, **{c.wire: counts[c] for c in CategoryLabel}}
            for name, total, counts in rows
        }
        (out / "stats.json").write_text(
            json.dumps(payload, indent=2, sort_keys=True) + "\n", encoding="utf-8"
        )


# --- training ----------------------------------------------------------------


def _corpus_to_tagged(docs, untyped: bool):
    pairs = []
    for doc in docs:
        if untyped:
            doc = strip_labels(doc)
        tokenized = tokenize(doc.text)
        if len(tokenized) == 0:
            continue
        pairs.append((tokenized, encode_bio(tokenized, doc.spans)))
    return pairs


@cli.command("train-tagger")
@click.option("--train", "train_path", type=_in_path, required=True)
@click.option("--val", "val_path", type=_in_path, default=None)
@click.option("--untyped", is_flag=True, help="Train a mention-only tagger.")
@click.option("--model-out", type=click.Path(dir_okay=False), default=None)
@click.option("--epochs", type=int, default=None)
@click.option("--learning-rate", type=float, default=None)
@click.option("--l2", type=float, default=None)
@click.option("--batch-size", type=int, default=None)
@click.option("--patience", type=int, default=None)
@click.option("--hash-dim", type=int, default=None)
@click.option("--window", type=int, default=None)
@click.option("--quiet", is_flag=True)
@pass_settings
def train_tagger(settings, train_path, val_path, untyped, model_out, epochs,
                 learning_rate, l2, batch_size, patience, hash_dim, window, quiet):
    """Train the CRF tagger on a span corpus."""
    out = settings.resolve_output(model_out, "the model file")
    features = settings.feature_config(hash_dimension=hash_dim, window=window)
    config = settings.train_config(
        epochs=epochs, learning_rate=learning_rate, l2=l2,
        batch_size=batch_size, patience=patience,
    )
    dataset = _corpus_to_tagged(read_span_corpus(train_path), untyped)
    validation = (
        _corpus_to_tagged(read_span_corpus(val_path), untyped) if val_path else None
    ) or None

    def progress(epoch, train_loss, val_loss):
        if not quiet:
            click.echo(
                f"epoch {epoch:3d}  train {train_loss:.4f}  val {val_loss:.4f}",
                err=True,
            )

    model = crf.train(
        dataset, config, validation,
        tag_set=UNTYPED_TAGS if untyped else TYPED_TAGS,
        feature_config=features, callback=progress,
    )
    save_model(model, out)
    click.echo(f"saved {'untyped' if untyped else 'typed'} tagger to {out}")


@cli.command("train-classifier")
@click.option("--train", "train_path", type=_in_path, required=True)
@click.option("--val", "val_path", type=_in_path, default=None)
@click.option("--model-out", type=click.Path(dir_okay=False), default=None)
@click.option("--epochs", type=int, default=None)
@click.option("--learning-rate", type=float, default=None)
@click.option("--l2", type=float, default=None)
@click.option("--batch-size", type=int, default=None)
@click.option("--patience", type=int, default=None)
@click.option("--hash-dim", type=int, default=None)
@click.option("--quiet", is_flag=True)
@pass_settings
def train_classifier(settings, train_path, val_path, model_out, epochs,
                     learning_rate, l2, batch_size, patience, hash_dim, quiet):
    """Train the identity-target classifier on a sentence corpus.

    Each sentence yields one example per label; unlabeled sentences become
    NONE examples.
    """
    out = settings.resolve_output(model_out, "the model file")
    features = settings.feature_config(hash_dimension=hash_dim)
    config = settings.train_config(
        epochs=epochs, learning_rate=learning_rate, l2=l2,
        batch_size=batch_size, patience=patience,
    )

    def pairs(path):
        data = []
        for sentence in read_sentences(path):
            if sentence.labels:
                data.extend((sentence.text, label) for label in sorted(
                    sentence.labels, key=lambda l: l.wire))
            else:
                data.append((sentence.text, None))
        return data

    def progress(epoch, train_loss, val_loss):
        if not quiet:
            click.echo(
                f"epoch {epoch:3d}  train {train_loss:.4f}  val {val_loss:.4f}",
                err=True,
            )

    model = clf.train(
        pairs(train_path), config,
        pairs(val_path) if val_path else None,
        feature_config=features, callback=progress,
    )
    save_model(model, out)
    click.echo(f"saved classifier to {out}")


# --- applying models ----------------------------------------------------------


@cli.command()
@click.option("--model", "model_path", type=_in_path, required=True)
@click.option("--input", "input_path", type=_in_path, required=True)
@click.option("--out", "output_path", type=click.Path(dir_okay=False), default=None)
@pass_settings
def tag(settings, model_path, input_path, output_path):
    """Tag texts with spans.  Accepts {id,text} records or comment records
    ({post_id,comment_id,text}); spans are added to each record."""
    out = settings.resolve_output(output_path, "the tagged corpus")
    model = load_crf(model_path)

    def tagged():
        for obj in iter_jsonl(input_path):
            text = obj.get("text")
            if not isinstance(text, str):
                raise CorpusFormatError(f"{input_path}: record without text")
            spans = tag_document(model, text)
            record = dict(obj)
            record["spans"] = [
                {"start": s.start, "end": s.end,
                 "label": s.label.wire if s.label else None}
                for s in spans
            ]
            yield record

    count = write_jsonl(out, tagged())
    click.echo(f"tagged {count} records -> {out}")


@cli.command()
@click.option("--model", "model_path", type=_in_path, required=True)
@click.option("--input", "input_path", type=_in_path, required=True)
@click.option("--out", "output_path", type=click.Path(dir_okay=False), default=None)
@pass_settings
def classify(settings, model_path, input_path, output_path):
    """Predict the targeted identity class for each record's text."""
    out = settings.resolve_output(output_path, "the classified corpus")
    model = load_classifier(model_path)

    def classified():
        for obj in iter_jsonl(input_path):
            text = obj.get("text")
            if not isinstance(text, str):
                raise CorpusFormatError(f"{input_path}: record without text")
            predicted, probability = clf.predict_text(model, text)
            record = dict(obj)
            record["predicted"] = clf.class_wire(predicted)
            record["probability"] = round(probability, 6)
            yield record

    count = write_jsonl(out, classified())
    click.echo(f"classified {count} records -> {out}")


@cli.command()
@click.option("--tagger", "tagger_path", type=_in_path, required=True)
@click.option("--classifier", "classifier_path", type=_in_path, required=True)
@click.option("--sentences", "sentences_path", type=_in_path, required=True)
@click.option("--out", "output_path", type=click.Path(dir_okay=False), default=None)
@click.option("--stats", "stats_path", type=click.Path(dir_okay=False), default=None)
@click.option("--context-window", type=int, default=None)
@click.option("--threshold", type=float, default=None)
@click.option("--auto-accept", is_flag=True,
              help="Skip review: write the final corpus directly (CI/synthetic data only).")
@pass_settings
def align(settings, tagger_path, classifier_path, sentences_path, output_path,
          stats_path, context_window, threshold, auto_accept):
    """Run the agreement filter and write a review queue (or, with
    --auto-accept, the final span corpus)."""
    out = settings.resolve_output(output_path, "the queue/corpus")
    section = settings.section("alignment")
    cfg = AlignmentConfig(
        context_window=context_window if context_window is not None
        else int(section.get("context_window", 0)),
        probability_threshold=threshold if threshold is not None
        else float(section.get("probability_threshold", 0.0)),
    )
    sentences = read_sentences(sentences_path)
    examples, stats = align_corpus(
        sentences, load_crf(tagger_path), load_classifier(classifier_path), cfg
    )
    if auto_accept or section.get("auto_accept", False):
        count = write_span_corpus(out, auto_accept_corpus(examples))
        click.echo(f"auto-accepted {count} sentences -> {out}")
    else:
        count = export_review_queue(examples, out)
        click.echo(f"queued {count} sentences for review -> {out}")
    summary = json.dumps(stats.to_json(), indent=2, sort_keys=True)
    if stats_path:
        Path(stats_path).write_text(summary + "\n", encoding="utf-8")
    else:
        click.echo(summary, err=True)


# --- review -------------------------------------------------------------------


@cli.group()
def review():
    """Manual review of aligned candidates."""


@review.command()
@click.option("--queue", "queue_path", type=_in_path, required=True)
@click.option("--decisions", "decisions_path", type=click.Path(dir_okay=False),
              required=True)
@click.option("--port", type=int, default=None)
@click.option("--bind", default=None)
@click.option("--ui-dir", type=click.Path(exists=True, file_okay=False), default=None)
@pass_settings
def serve(settings, queue_path, decisions_path, port, bind, ui_dir):
    """Serve the review queue over HTTP (JSON API plus the UI bundle)."""
    from .service import ReviewService

    section = settings.section("service")
    bind = bind or section.get("bind", "127.0.0.1")
    port = port if port is not None else int(section.get("port", 7878))
    service = ReviewService(queue_path, decisions_path, ui_dir)
    click.echo(f"review service on http://{bind}:{port} "
               f"({len(service.state.queue)} items)")
    service.serve_forever(bind, port)


@review.command()
@click.option("--queue", "queue_path", type=_in_path, required=True)
@click.option("--decisions", "decisions_path", type=_in_path, required=True)
@click.option("--out", "output_path", type=click.Path(dir_okay=False), default=None)
@pass_settings
def apply(settings, queue_path, decisions_path, output_path):
    """Replay the decisions log and write the final span corpus."""
    out = settings.resolve_output(output_path, "the final corpus")
    corpus = apply_decision_files(queue_path, decisions_path)
    count = write_span_corpus(out, corpus)
    click.echo(f"wrote {count} reviewed sentences -> {out}")


# --- evaluation ----------------------------------------------------------------


@cli.command("eval")
@click.option("--gold", "gold_path", type=_in_path, required=True)
@click.option("--model", "model_path", type=_in_path, default=None)
@click.option("--pred", "pred_path", type=_in_path, default=None,
              help="Evaluate a prediction corpus instead of running a model.")
@click.option("--untyped", is_flag=True, help="Score mention detection only.")
@click.option("--output-dir", type=click.Path(file_okay=False), default=None)
@click.option("--no-figure", is_flag=True)
@pass_settings
def eval_cmd(settings, gold_path, model_path, pred_path, untyped, output_dir,
             no_figure):
    """Entity-level evaluation (exact match) against a gold span corpus."""
    if bool(model_path) == bool(pred_path):
        raise click.UsageError("give exactly one of --model or --pred")
    gold = read_span_corpus(gold_path)
    if model_path:
        report, counts = evaluate_corpus(gold, load_crf(model_path), typed=not untyped)
    else:
        predictions = {d.id: list(d.spans) for d in read_span_corpus(pred_path)}
        report, counts = evaluate_predictions(gold, predictions, typed=not untyped)

    text = format_report(report)
    click.echo(text, nl=False)
    target = output_dir or settings.output
    if target:
        out = Path(target)
        out.mkdir(parents=True, exist_ok=True)
        (out / "eval_report.txt").write_text(text, encoding="utf-8")
        (out / "eval_report.tsv").write_text(report_tsv(report), encoding="utf-8")
        (out / "eval_report.json").write_text(
            json.dumps(report.to_json(counts), indent=2, sort_keys=True) + "\n",
            encoding="utf-8",
        )
        if not no_figure:
            from .figures import plot_eval_report

            plot_eval_report(report, out / "eval_metrics.png")


# --- analytics -----------------------------------------------------------------


@cli.group()
def analyze():
    """Case-study analytics over annotated comments."""


def _post_order(mentions, posts=None):
    if posts is not None:
        return [p.post_id for p in posts]
    seen = dict.fromkeys(record.post_id for record in mentions)
    return list(seen)


@analyze.command()
@click.option("--mentions", "mentions_path", type=_in_path, required=True)
@click.option("--posts", "posts_path", type=_in_path, default=None)
@click.option("--output-dir", type=click.Path(file_okay=False), default=None)
@click.option("--no-figure", is_flag=True)
@pass_settings
def mentions(settings, mentions_path, posts_path, output_dir, no_figure):
    """Per-post mention counts by category, with intersection summaries."""
    records = read_mentions(mentions_path)
    posts = read_posts(posts_path) if posts_path else None
    table = count_mentions(records)
    inter = count_intersections(records)
    rows = mention_table_rows(table, inter, _post_order(records, posts))

    header = ("ID", "Gender", "Ethnicity", "Sexual Or.", "Religion", "Intersections")
    all_rows = [header] + [tuple(str(c) for c in r) for r in rows]
    widths = [max(len(r[i]) for r in all_rows) for i in range(len(header))]
    text = "\n".join(
        "  ".join(cell.ljust(w) for cell, w in zip(row, widths)).rstrip()
        for row in all_rows
    ) + "\n"
    click.echo(text, nl=False)

    target = output_dir or settings.output
    if target:
        out = Path(target)
        out.mkdir(parents=True, exist_ok=True)
        (out / "mentions.txt").write_text(text, encoding="utf-8")
        (out / "mentions.tsv").write_text(
            "\n".join("\t".join(str(c) for c in row) for row in [header] + rows) + "\n",
            encoding="utf-8",
        )
        payload = {
            "per_post": {
                post_id: {
                    cat.wire: table.count(post_id, cat) for cat in CATEGORY_ORDER
                }
                for post_id in _post_order(records, posts)
            },
            "totals": {cat.wire: table.totals[cat] for cat in CATEGORY_ORDER},
            "intersections": {
                post_id: format_intersections(inter.get(post_id, {}))
                for post_id in _post_order(records, posts)
            },
        }
        (out / "mentions.json").write_text(
            json.dumps(payload, indent=2, sort_keys=True) + "\n", encoding="utf-8"
        )
        if not no_figure:
            from .figures import plot_mentions

            plot_mentions(table, out / "mentions.png")


@analyze.command()
@click.option("--mentions", "mentions_path", type=_in_path, required=True)
@click.option("--output-dir", type=click.Path(file_okay=False), default=None)
@click.option("--no-figure", is_flag=True)
@pass_settings
def intersections(settings, mentions_path, output_dir, no_figure):
    """Span-pair co-occurrence counts inside comments, per post."""
    records = read_mentions(mentions_path)
    inter = count_intersections(records)
    order = _post_order(records)
    lines = [f"{post_id}: {format_intersections(inter.get(post_id, {}))}"
             for post_id in order]
    text = "\n".join(lines) + "\n" if lines else "-\n"
    click.echo(text, nl=False)

    target = output_dir or settings.output
    if target:
        out = Path(target)
        out.mkdir(parents=True, exist_ok=True)
        (out / "intersections.txt").write_text(text, encoding="utf-8")
        payload = {
            post_id: {f"({a},{b})": n for (a, b), n in sorted(pairs.items())}
            for post_id, pairs in sorted(inter.items())
        }
        (out / "intersections.json").write_text(
            json.dumps(payload, indent=2, sort_keys=True) + "\n", encoding="utf-8"
        )
        totals: dict = {}
        for pairs in inter.values():
            for key, n in pairs.items():
                totals[key] = totals.get(key, 0) + n
        if not no_figure:
            from .figures import plot_intersections

            plot_intersections(totals, out / "intersections.png")


@analyze.command()
@click.option("--posts", "posts_path", type=_in_path, required=True)
@click.option("--mentions", "mentions_path", type=_in_path, required=True)
@click.option("--output-dir", type=click.Path(file_okay=False), default=None)
@click.option("--no-figure", is_flag=True)
@pass_settings
def correlate(settings, posts_path, mentions_path, output_dir, no_figure):
    """Pearson correlations between interactions and mention counts."""
    posts = read_posts(posts_path)
    table = count_mentions(read_mentions(mentions_path))
    matrix = correlation_matrix(posts, table)
    text = format_correlation_matrix(matrix)
    click.echo(text, nl=False)

    target = output_dir or settings.output
    if target:
        out = Path(target)
        out.mkdir(parents=True, exist_ok=True)
        (out / "correlations.txt").write_text(text, encoding="utf-8")
        payload = correlation_matrix_json(matrix)
        (out / "correlations.json").write_text(
            json.dumps(payload, indent=2, sort_keys=True) + "\n", encoding="utf-8"
        )
        tsv_lines = ["\t".join(("",) + matrix.variables)]
        for i, name in enumerate(matrix.variables):
            cells = [name] + [
                "n/a" if matrix.cell(i, j) is None else f"{matrix.cell(i, j):.6f}"
                for j in range(len(matrix.variables))
            ]
            tsv_lines.append("\t".join(cells))
        (out / "correlations.tsv").write_text("\n".join(tsv_lines) + "\n",
                                              encoding="utf-8")
        if not no_figure:
            from .figures import plot_correlation_matrix

            plot_correlation_matrix(matrix, out / "correlations.png")


# --- entry point ---------------------------------------------------------------


def main(argv: Optional[list[str]] = None) -> int:
    try:
        cli.main(args=argv, standalone_mode=False)
        return 0
    except click.UsageError as exc:
        exc.show(file=sys.stderr)
        return 1
    except click.ClickException as exc:
        exc.show(file=sys.stderr)
        return 1
    except click.Abort:
        click.echo("aborted", err=True)
        return 1
    except (IdentityNerError, OSError) as exc:
        click.echo(f"error: {exc}", err=True)
        return 2


if __name__ == "__main__":
    sys.exit(main())
