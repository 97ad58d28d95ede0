"""Command line interface.

Subcommands: extract, evaluate, sari, crs, indicators, corrupt, stats, serve.
Results are JSON documents whose first field echoes the effective config, so
any run can be reproduced from its own output.  Exit codes: 0 success, 1
validation error, 2 I/O error.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
from contextlib import contextmanager

from . import __version__
from .corruptor import (
    ConfusionSets,
    CorruptionConfig,
    corrupt_corpus,
    load_confusions,
)
from .datafiles import (
    load_hypotheses,
    load_samples,
    load_variant_groups,
    read_hypotheses_jsonl,
    read_samples_jsonl,
    read_variant_groups_jsonl,
    sample_to_dict,
)
from .domainshift import (
    EPO_SAMPLE_SIZE,
    VO_SAMPLE_SIZE,
    compute_indicators,
    format_indicator_table,
)
from .edits import extract_edits
from .m2 import M2Sentence, write_m2
from .metrics import crs, evaluate_f05, group_consistent, sari
from .stats import dataset_stats, format_stats_table
from .tokenizer import load_lexicon


class _Parser(argparse.ArgumentParser):
    # Usage problems (unknown flags, missing values) exit 1, not argparse's 2.
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(1, f"{self.prog}: error: {message}\n")


@contextmanager
def _open_lines(path: str):
    """Readable line source; '-' means stdin."""
    if path == "-":
        yield sys.stdin
    else:
        with open(path, encoding="utf-8") as fh:
            yield fh


@contextmanager
def _open_sink(path: str | None):
    """Writable sink; None or '-' means stdout."""
    if path is None or path == "-":
        yield sys.stdout
    else:
        with open(path, "w", encoding="utf-8") as fh:
            yield fh


def _load_samples_arg(path: str):
    if path == "-":
        return read_samples_jsonl(sys.stdin, name="<stdin>")
    return load_samples(path)


def _load_hypotheses_arg(path: str):
    if path == "-":
        return read_hypotheses_jsonl(sys.stdin, name="<stdin>")
    return load_hypotheses(path)


def _load_groups_arg(path: str):
    if path == "-":
        return read_variant_groups_jsonl(sys.stdin, name="<stdin>")
    return load_variant_groups(path)


def _lexicon_arg(args):
    return load_lexicon(args.lexicon) if getattr(args, "lexicon", None) else None


def _emit(doc: dict, args, pretty_text: str | None = None, sink=None) -> None:
    out = sink or sys.stdout
    if getattr(args, "pretty", False) and pretty_text is not None:
        out.write(pretty_text + "\n")
    else:
        out.write(json.dumps(doc, ensure_ascii=False, indent=2) + "\n")


def _add_granularity_flags(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--granularity", choices=("char", "word"), default="char",
                        help="token granularity (default: char)")
    parser.add_argument("--lexicon", help="lexicon file for word granularity")


# -- subcommands ---------------------------------------------------------------


def cmd_extract(args) -> int:
    lexicon = _lexicon_arg(args)
    sentences = []
    n_edits = 0
    if args.samples:
        if args.target_file:
            raise ValueError("--target-file only applies with --source-file")
        samples = _load_samples_arg(args.samples)
        for sample in samples:
            edit_sets = [
                extract_edits(sample.source, ref, args.granularity, lexicon, annotator_id=i)
                for i, ref in enumerate(sample.references)
            ]
            n_edits += sum(len(es.edits) for es in edit_sets)
            sentences.append(M2Sentence(edit_sets[0].source_tokens, edit_sets))
    else:
        if not args.target_file:
            raise ValueError("--source-file needs --target-file")
        with _open_lines(args.source_file) as sf:
            sources = [line.rstrip("\n") for line in sf]
        with _open_lines(args.target_file) as tf:
            targets = [line.rstrip("\n") for line in tf]
        if len(sources) != len(targets):
            raise ValueError(
                f"source file has {len(sources)} lines, target file has {len(targets)}"
            )
        for src, tgt in zip(sources, targets):
            es = extract_edits(src, tgt, args.granularity, lexicon)
            n_edits += len(es.edits)
            sentences.append(M2Sentence(es.source_tokens, [es]))
    config = {
        "command": "extract",
        "granularity": args.granularity,
        "lexicon": args.lexicon,
        "out": args.out,
    }
    summary = {"config": config, "sentences": len(sentences), "edits": n_edits}
    with _open_sink(args.out) as sink:
        write_m2(sentences, sink)
        to_stdout = sink is sys.stdout
    # Keep the config echo even when the M2 text occupies stdout.
    _emit(summary, args, sink=sys.stderr if to_stdout else sys.stdout)
    return 0


def cmd_evaluate(args) -> int:
    samples = _load_samples_arg(args.samples)
    hypotheses = _load_hypotheses_arg(args.hypotheses)
    report = evaluate_f05(samples, hypotheses, args.granularity, _lexicon_arg(args), args.beta)
    config = {
        "command": "evaluate",
        "samples": args.samples,
        "hypotheses": args.hypotheses,
        "granularity": args.granularity,
        "lexicon": args.lexicon,
        "beta": args.beta,
    }
    doc = {"config": config, **report.to_dict()}
    pretty = "\n".join(
        [
            f"precision  {report.precision:.4f}",
            f"recall     {report.recall:.4f}",
            f"f{args.beta:g}       {report.f:.4f}",
        ]
        + [
            f"  {t.value}: P={s.precision:.4f} R={s.recall:.4f} F={s.f:.4f} "
            f"(tp={s.tally.tp} fp={s.tally.fp} fn={s.tally.fn})"
            for t, s in report.per_type.items()
        ]
    )
    _emit(doc, args, pretty)
    return 0


def cmd_sari(args) -> int:
    samples = _load_samples_arg(args.samples)
    hypotheses = _load_hypotheses_arg(args.hypotheses)
    hyp_map = {h.id: h.hypothesis for h in hypotheses}
    missing = sorted(s.id for s in samples if s.id not in hyp_map)
    extra = sorted(h for h in hyp_map if h not in {s.id for s in samples})
    if missing or extra:
        raise ValueError(f"unmatched ids; missing: {missing}, extra: {extra}")
    lexicon = _lexicon_arg(args)
    per_sentence = [
        {
            "id": s.id,
            "sari": sari(s.source, hyp_map[s.id], s.references, args.n_max,
                         args.granularity, lexicon),
        }
        for s in samples
    ]
    mean = sum(row["sari"] for row in per_sentence) / len(per_sentence)
    config = {
        "command": "sari",
        "samples": args.samples,
        "hypotheses": args.hypotheses,
        "granularity": args.granularity,
        "lexicon": args.lexicon,
        "n_max": args.n_max,
        "action_scoring": "f1_all_actions",
    }
    doc = {"config": config, "sari": mean, "n_sentences": len(per_sentence)}
    if args.per_sentence:
        doc["sentences"] = per_sentence
    _emit(doc, args, f"sari  {mean:.4f}  ({len(per_sentence)} sentences)")
    return 0


def cmd_crs(args) -> int:
    groups = _load_groups_arg(args.groups)
    lexicon = _lexicon_arg(args)
    score = crs(groups, args.granularity, lexicon, args.strict_string)
    config = {
        "command": "crs",
        "groups": args.groups,
        "granularity": args.granularity,
        "lexicon": args.lexicon,
        "strict_string": args.strict_string,
        "consistency": "edit_pattern_multiset" if not args.strict_string else "exact_string",
    }
    detail = [
        {
            "group_id": g.group_id,
            "consistent": group_consistent(g, args.granularity, lexicon, args.strict_string),
        }
        for g in groups
    ]
    doc = {"config": config, "crs": score, "n_groups": len(groups), "groups": detail}
    _emit(doc, args, f"crs  {score:.4f}  ({len(groups)} groups)")
    return 0


def cmd_indicators(args) -> int:
    src = _load_samples_arg(args.src)
    tgt = _load_samples_arg(args.tgt)
    report = compute_indicators(
        src,
        tgt,
        granularity=args.granularity,
        lexicon=_lexicon_arg(args),
        vo_n=args.vo_n,
        epo_n=args.epo_n,
        seed=args.seed,
        smoothing_eps=args.smoothing_eps,
    )
    config = {
        "command": "indicators",
        "src": args.src,
        "tgt": args.tgt,
        "granularity": args.granularity,
        "lexicon": args.lexicon,
        "vo_n": args.vo_n,
        "epo_n": args.epo_n,
        "seed": args.seed,
        "smoothing_eps": args.smoothing_eps,
    }
    doc = {"config": config, **report.to_dict()}
    _emit(doc, args, format_indicator_table(report))
    return 0


def cmd_corrupt(args) -> int:
    cfg = CorruptionConfig(
        token_prob=args.token_prob,
        replace_weight=args.replace_weight,
        insert_weight=args.insert_weight,
        delete_weight=args.delete_weight,
        swap_weight=args.swap_weight,
        replace_confusion_prob=args.replace_confusion_prob,
        insert_same_prob=args.insert_same_prob,
        word_granularity_prob=args.word_granularity_prob,
        seed=args.seed,
    )
    conf = load_confusions(args.char_confusions, args.word_confusions, args.vocab)
    lexicon = _lexicon_arg(args)
    config = {
        "command": "corrupt",
        "input": args.input,
        "seed": args.seed,
        "token_prob": cfg.token_prob,
        "op_weights": {
            "replace": cfg.replace_weight,
            "insert": cfg.insert_weight,
            "delete": cfg.delete_weight,
            "swap": cfg.swap_weight,
        },
        "replace_confusion_prob": cfg.replace_confusion_prob,
        "insert_same_prob": cfg.insert_same_prob,
        "word_granularity_prob": cfg.word_granularity_prob,
        "vocab": args.vocab,
        "char_confusions": args.char_confusions,
        "word_confusions": args.word_confusions,
        "lexicon": args.lexicon,
        "format": args.format,
        "jobs": args.jobs,
    }
    n = changed = 0
    with _open_lines(args.input) as lines_fh:
        lines = (line.rstrip("\n") for line in lines_fh)
        with _open_sink(args.out) as sink:
            to_stdout = sink is sys.stdout
            for i, pair in enumerate(corrupt_corpus(lines, cfg, conf, lexicon, args.jobs)):
                n += 1
                changed += pair.changed
                if args.format == "tsv":
                    sink.write(f"{pair.noisy}\t{pair.clean}\n")
                else:
                    sink.write(
                        json.dumps(
                            {
                                "id": f"line-{i}",
                                "source": pair.noisy,
                                "references": [pair.clean],
                                "domain": "synthetic",
                                "changed": pair.changed,
                            },
                            ensure_ascii=False,
                        )
                        + "\n"
                    )
    summary = {"config": config, "lines": n, "changed": changed, "unchanged": n - changed}
    _emit(summary, args, sink=sys.stderr if to_stdout else sys.stdout)
    return 0


def cmd_stats(args) -> int:
    samples = _load_samples_arg(args.samples)
    report = dataset_stats(samples, args.granularity, _lexicon_arg(args))
    config = {
        "command": "stats",
        "samples": args.samples,
        "granularity": args.granularity,
        "lexicon": args.lexicon,
    }
    doc = {"config": config, **report.to_dict()}
    _emit(doc, args, format_stats_table(report))
    return 0


def cmd_serve(args) -> int:
    from .service import run_server

    log_path = args.log or os.environ.get("ANNO_LOG")
    if not log_path:
        raise ValueError("--log or ANNO_LOG is required")
    addr = args.addr or os.environ.get("ANNO_ADDR", "127.0.0.1:8000")
    run_server(log_path, addr, seed=args.seed)
    return 0


# -- parser ---------------------------------------------------------------------


def build_parser() -> _Parser:
    parser = _Parser(prog="geclab", description=__doc__)
    parser.add_argument("--version", action="version", version=f"geclab {__version__}")
    sub = parser.add_subparsers(dest="subcommand", metavar="COMMAND", parser_class=_Parser)

    p = sub.add_parser("extract", help="extract edits to M2")
    src_group = p.add_mutually_exclusive_group(required=True)
    src_group.add_argument("--samples", help="samples JSONL ('-' for stdin)")
    src_group.add_argument("--source-file", help="plain text, one source per line")
    p.add_argument("--target-file", help="plain text, one target per line")
    p.add_argument("--out", help="M2 output path (default: stdout)")
    _add_granularity_flags(p)
    p.add_argument("--pretty", action="store_true", help=argparse.SUPPRESS)
    p.set_defaults(func=cmd_extract)

    p = sub.add_parser("evaluate", help="edit-level F-beta against references")
    p.add_argument("--samples", required=True)
    p.add_argument("--hypotheses", required=True)
    p.add_argument("--beta", type=float, default=0.5)
    _add_granularity_flags(p)
    p.add_argument("--pretty", action="store_true")
    p.set_defaults(func=cmd_evaluate)

    p = sub.add_parser("sari", help="n-gram add/delete/keep F1")
    p.add_argument("--samples", required=True)
    p.add_argument("--hypotheses", required=True)
    p.add_argument("--n-max", type=int, default=4)
    p.add_argument("--per-sentence", action="store_true")
    _add_granularity_flags(p)
    p.add_argument("--pretty", action="store_true")
    p.set_defaults(func=cmd_sari)

    p = sub.add_parser("crs", help="consistency rate over variant groups")
    p.add_argument("--groups", required=True)
    p.add_argument("--strict-string", action="store_true",
                   help="require identical output strings instead of equal edit patterns")
    _add_granularity_flags(p)
    p.add_argument("--pretty", action="store_true")
    p.set_defaults(func=cmd_crs)

    p = sub.add_parser("indicators", help="domain-shift indicators between two datasets")
    p.add_argument("--src", required=True, help="source-domain samples JSONL")
    p.add_argument("--tgt", required=True, help="target-domain samples JSONL")
    p.add_argument("--seed", type=int, required=True)
    p.add_argument("--vo-n", type=int, default=VO_SAMPLE_SIZE)
    p.add_argument("--epo-n", type=int, default=EPO_SAMPLE_SIZE)
    p.add_argument("--smoothing-eps", type=float, default=1e-6)
    _add_granularity_flags(p)
    p.add_argument("--pretty", action="store_true")
    p.set_defaults(func=cmd_indicators)

    p = sub.add_parser("corrupt", help="corrupt clean text into (noisy, clean) pairs")
    p.add_argument("--input", required=True, help="clean text, one sentence per line ('-' for stdin)")
    p.add_argument("--out", help="output path (default: stdout)")
    p.add_argument("--seed", type=int, required=True)
    p.add_argument("--vocab", required=True, help="vocabulary file, one token per line")
    p.add_argument("--char-confusions", help="char confusion TSV")
    p.add_argument("--word-confusions", help="word confusion TSV")
    p.add_argument("--token-prob", type=float, default=0.05)
    p.add_argument("--replace-weight", type=float, default=0.55)
    p.add_argument("--insert-weight", type=float, default=0.2)
    p.add_argument("--delete-weight", type=float, default=0.2)
    p.add_argument("--swap-weight", type=float, default=0.05)
    p.add_argument("--replace-confusion-prob", type=float, default=0.5)
    p.add_argument("--insert-same-prob", type=float, default=0.5)
    p.add_argument("--word-granularity-prob", type=float, default=0.5)
    p.add_argument("--format", choices=("tsv", "jsonl"), default="tsv")
    p.add_argument("--jobs", type=int, default=1)
    _add_granularity_flags(p)
    p.add_argument("--pretty", action="store_true", help=argparse.SUPPRESS)
    p.set_defaults(func=cmd_corrupt)

    p = sub.add_parser("stats", help="dataset statistics")
    p.add_argument("--samples", required=True)
    _add_granularity_flags(p)
    p.add_argument("--pretty", action="store_true")
    p.set_defaults(func=cmd_stats)

    p = sub.add_parser("serve", help="run the annotation service")
    p.add_argument("--log", help="event log path (env: ANNO_LOG)")
    p.add_argument("--addr", help="host:port to bind (env: ANNO_ADDR, default 127.0.0.1:8000)")
    p.add_argument("--seed", type=int, default=0, help="seed for task assignment draws")
    p.set_defaults(func=cmd_serve)

    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    if not hasattr(args, "func"):
        parser.print_usage(sys.stderr)
        return 1
    try:
        return args.func(args)
    except FileNotFoundError as exc:
        print(f"geclab: {exc}", file=sys.stderr)
        return 2
    except OSError as exc:
        print(f"geclab: {exc}", file=sys.stderr)
        return 2
    except ValueError as exc:
        print(f"geclab: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
