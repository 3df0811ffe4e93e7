"""Command-line interface.

Subcommands::

    score       score systems with one metric, write a JSON report
    rank        score systems and rank them
    correlate   score systems and correlate with a human ranking
    sweep       interpolate a fluency and a reference metric over lambda
    ablate      rerun the sweep with per-sentence reference subsets
    train-lfm   fit the ridge fluency model from a feature table
    check       run error detectors over a text file

Exit codes: 0 success; 1 usage error or unreadable file; 2 malformed or
inconsistent data; 3 external checker failure. Logs go to stderr. With
``--out`` the report goes to that file and a short summary to stdout;
without it the report JSON itself goes to stdout. Identical invocations
with identical seeds produce byte-identical reports.

The random seed comes from ``--seed``, else the ``GECMETRIC_SEED``
environment variable, else 0; the choice is logged.
"""

from __future__ import annotations

import argparse
import functools
import logging
import os
import shlex
import sys
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path
from typing import Mapping, Sequence

from . import analysis
from .analysis import SystemScore
from .corpus import AnnotatedSource, Sentence
from .errors import DetectorError, ModelError, ParseError, ValidationError
from .formats import (
    HumanRanking,
    build_report,
    read_human_ranking,
    read_m2_file,
    read_parallel_text,
    read_reference_files,
    render_report,
    write_report,
)
from .gleu import MEAN_OVER_ALL, SAMPLED, GleuConfig, gleu_corpus, gleu_multi_ref
from .grammaticality import (
    DetectorSuite,
    ExternalChecker,
    Wordlist,
    build_default_suite,
    error_count_corpus,
    error_count_score,
)
from .imeasure import IMeasureConfig, i_measure_corpus, i_measure_sentence
from .lfm import (
    LfmModel,
    NgramLm,
    featurize,
    lfm_score,
    load_lfm_model,
    parse_training_tsv,
    save_lfm_model,
    train_lm,
    train_ridge,
)
from .maxmatch import M2Config, m2_corpus, m2_sentence

__all__ = ["main", "build_parser"]

log = logging.getLogger("gecmetric")

METRICS = ("gleu", "m2", "imeasure", "errorcount", "lfm")
REFERENCE_METRICS = ("gleu", "m2", "imeasure")
FLUENCY_METRICS = ("errorcount", "lfm")
ROW_METRICS = ("gleu", "imeasure")  # reference material is per-sentence rows


class _UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):  # argparse would exit(2); we want exit 1
        raise _UsageError(message)


# ---------------------------------------------------------------------------
# per-sentence workers (module level so process pools can pickle them)


def _gleu_one(cfg: GleuConfig, item) -> float:
    index, source, hypothesis, refs = item
    return gleu_multi_ref(source, hypothesis, refs, cfg, sentence_index=index)


def _imeasure_one(cfg: IMeasureConfig, item) -> float:
    source, hypothesis, refs = item
    return i_measure_sentence(source, hypothesis, refs, cfg)


def _m2_one(cfg: M2Config, item) -> float:
    unit, hypothesis = item
    return m2_sentence(unit.source, hypothesis, unit.annotations, cfg)[1]


def _errorcount_one(suite: DetectorSuite, hypothesis: Sentence) -> float:
    return error_count_score(hypothesis, suite)


def _lfm_one(lm: NgramLm, wordlist: Wordlist, model: LfmModel,
             hypothesis: Sentence) -> float:
    return lfm_score(model, featurize(hypothesis, lm, wordlist))


def _map(fn, items: list, jobs: int) -> list:
    if jobs <= 1 or len(items) <= 1:
        return [fn(item) for item in items]
    chunk = max(1, -(-len(items) // (jobs * 4)))
    with ProcessPoolExecutor(max_workers=jobs) as pool:
        return list(pool.map(fn, items, chunksize=chunk))


# ---------------------------------------------------------------------------
# scoring context


@dataclass
class _Ctx:
    metric: str
    jobs: int = 1
    sources: list[Sentence] | None = None
    units: list[AnnotatedSource] | None = None
    ref_rows: tuple[tuple[Sentence, ...], ...] | None = None
    gleu_cfg: GleuConfig | None = None
    m2_cfg: M2Config | None = None
    im_cfg: IMeasureConfig | None = None
    suite: DetectorSuite | None = None
    external: bool = False
    lm: NgramLm | None = None
    wordlist: Wordlist | None = None
    model: LfmModel | None = None
    closers: list = field(default_factory=list)

    def close(self) -> None:
        for closer in self.closers:
            closer.close()

    @property
    def n_sentences(self) -> int | None:
        if self.sources is not None:
            return len(self.sources)
        return None


def _per_sentence(ctx: _Ctx, hyps: Sequence[Sentence], rows=None) -> list[float]:
    if ctx.metric == "gleu":
        rows = ctx.ref_rows if rows is None else rows
        items = [
            (i, ctx.sources[i], hyp, tuple(rows[i])) for i, hyp in enumerate(hyps)
        ]
        return _map(functools.partial(_gleu_one, ctx.gleu_cfg), items, ctx.jobs)
    if ctx.metric == "imeasure":
        rows = ctx.ref_rows if rows is None else rows
        items = [
            (ctx.sources[i], hyp, tuple(rows[i])) for i, hyp in enumerate(hyps)
        ]
        return _map(functools.partial(_imeasure_one, ctx.im_cfg), items, ctx.jobs)
    if ctx.metric == "m2":
        items = list(zip(ctx.units, hyps))
        return _map(functools.partial(_m2_one, ctx.m2_cfg), items, ctx.jobs)
    if ctx.metric == "errorcount":
        jobs = 1 if ctx.external else ctx.jobs
        return _map(
            functools.partial(_errorcount_one, ctx.suite), list(hyps), jobs
        )
    assert ctx.metric == "lfm"
    return _map(
        functools.partial(_lfm_one, ctx.lm, ctx.wordlist, ctx.model),
        list(hyps),
        ctx.jobs,
    )


def _corpus_score(ctx: _Ctx, hyps: Sequence[Sentence]) -> float | None:
    if ctx.metric == "gleu":
        return gleu_corpus(ctx.sources, list(hyps), ctx.ref_rows, ctx.gleu_cfg)
    if ctx.metric == "m2":
        return m2_corpus(ctx.units, list(hyps), ctx.m2_cfg, mode="corpus")
    if ctx.metric == "imeasure":
        return i_measure_corpus(
            ctx.sources, list(hyps), ctx.ref_rows, ctx.im_cfg, mode="corpus"
        )
    if ctx.metric == "errorcount":
        return error_count_corpus(list(hyps), ctx.suite, mode="corpus")
    return None  # lfm: a per-sentence regression has nothing to pool


def _score_system(
    ctx: _Ctx, system_id: str, hyps: Sequence[Sentence], mode: str
) -> SystemScore:
    if mode == "corpus" and ctx.metric == "lfm":
        raise ValidationError(
            "metric 'lfm' has no corpus-level aggregation; use --mode sentence"
        )
    per = _per_sentence(ctx, hyps)
    return SystemScore(
        system_id=system_id,
        metric=ctx.metric,
        mode=mode,
        per_sentence=tuple(per),
        mean_sentence_score=analysis.mean_score(per),
        corpus_score=_corpus_score(ctx, hyps),
    )


# ---------------------------------------------------------------------------
# input loading


def _parse_hyp_spec(spec: str) -> tuple[str, str]:
    if "=" in spec:
        system_id, _, path = spec.partition("=")
        system_id = system_id.strip()
    else:
        system_id, path = Path(spec).stem, spec
    if not system_id or not path:
        raise _UsageError(f"bad --hyp value {spec!r}; use ID=PATH or PATH")
    return system_id, path


def _load_systems(args) -> dict[str, list[Sentence]]:
    if not getattr(args, "hyp", None):
        raise _UsageError("at least one --hyp is required")
    pairs = [_parse_hyp_spec(spec) for spec in args.hyp]
    ids = [sid for sid, _ in pairs]
    if len(set(ids)) != len(ids):
        raise _UsageError(f"duplicate system ids in --hyp: {ids}")
    return {sid: read_parallel_text(path) for sid, path in pairs}


def _check_lengths(systems: Mapping[str, list[Sentence]], ctx: _Ctx) -> None:
    lengths = {sid: len(hyps) for sid, hyps in systems.items()}
    expected = ctx.n_sentences
    if expected is None:
        expected = next(iter(lengths.values()))
    for sid, length in lengths.items():
        if length != expected:
            raise ValidationError(
                f"system {sid!r} has {length} sentences, expected {expected}"
            )
    if ctx.ref_rows is not None and len(ctx.ref_rows) != expected:
        raise ValidationError(
            f"references cover {len(ctx.ref_rows)} sentences, expected {expected}"
        )
    if expected == 0:
        raise ValidationError("empty corpus")


def _make_ctx(args, metric: str, seed: int) -> _Ctx:
    if metric not in METRICS:
        raise _UsageError(f"unknown metric {metric!r}; choose from {METRICS}")
    ctx = _Ctx(metric=metric, jobs=getattr(args, "jobs", 1))
    if getattr(args, "m2", None):
        ctx.units = read_m2_file(args.m2)
        ctx.sources = [u.source for u in ctx.units]
    if getattr(args, "source", None):
        if ctx.sources is not None:
            raise _UsageError("--source and --m2 are mutually exclusive")
        ctx.sources = read_parallel_text(args.source)
    if getattr(args, "ref", None):
        ctx.ref_rows = read_reference_files(args.ref).per_sentence

    if metric == "gleu":
        if ctx.sources is None or ctx.ref_rows is None:
            raise _UsageError("gleu needs --source (or --m2) and --ref")
        ctx.gleu_cfg = GleuConfig(
            max_n=args.max_n,
            iterations=args.iterations,
            rng_seed=seed,
            multi_ref_mode=args.gleu_mode,
        )
    elif metric == "imeasure":
        if ctx.sources is None or ctx.ref_rows is None:
            raise _UsageError("imeasure needs --source (or --m2) and --ref")
        ctx.im_cfg = IMeasureConfig(weight=args.weight)
    elif metric == "m2":
        if ctx.units is None:
            raise _UsageError("m2 needs --m2 with gold annotations")
        ctx.m2_cfg = M2Config(
            beta=args.beta, max_unchanged_words=args.max_unchanged
        )
    elif metric == "errorcount":
        ctx.suite, ctx.external = _build_suite(args)
        if ctx.external:
            for detector in ctx.suite.detectors:
                if isinstance(detector, ExternalChecker):
                    ctx.closers.append(detector)
            if ctx.jobs > 1:
                log.info("external checker active: scoring serially")
    else:  # lfm
        for opt in ("model", "lm_corpus", "wordlist"):
            if not getattr(args, opt, None):
                flag = "--" + opt.replace("_", "-")
                raise _UsageError(f"lfm needs {flag}")
        ctx.model = load_lfm_model(args.model)
        ctx.lm = train_lm(read_parallel_text(args.lm_corpus))
        ctx.wordlist = Wordlist.from_file(args.wordlist)
    return ctx


def _build_suite(args) -> tuple[DetectorSuite, bool]:
    detectors: list = []
    if getattr(args, "wordlist", None):
        wordlist = Wordlist.from_file(args.wordlist)
        detectors.extend(build_default_suite(wordlist).detectors)
    external = False
    if getattr(args, "checker", None):
        command = shlex.split(args.checker)
        detectors.append(
            ExternalChecker(command, timeout=args.checker_timeout)
        )
        external = True
    if not detectors:
        raise _UsageError("need --wordlist and/or --checker")
    return DetectorSuite(detectors), external


def _resolve_seed(args) -> int:
    if getattr(args, "seed", None) is not None:
        log.info("seed %d (from --seed)", args.seed)
        return args.seed
    raw = os.environ.get("GECMETRIC_SEED")
    if raw is not None and raw.strip():
        try:
            value = int(raw)
        except ValueError:
            raise _UsageError(
                f"GECMETRIC_SEED must be an integer, got {raw!r}"
            ) from None
        log.info("seed %d (from GECMETRIC_SEED)", value)
        return value
    log.info("seed 0 (default)")
    return 0


def _load_human(args) -> HumanRanking:
    if not getattr(args, "human", None):
        raise _UsageError("--human is required")
    return read_human_ranking(args.human)


# ---------------------------------------------------------------------------
# report assembly


def _system_entry(score: SystemScore) -> dict:
    return {
        "id": score.system_id,
        "metric": score.metric,
        "mode": score.mode,
        "mean_sentence_score": score.mean_sentence_score,
        "corpus_score": score.corpus_score,
        "per_sentence": list(score.per_sentence),
    }


def _sweep_section(result: analysis.LambdaSweepResult) -> dict:
    return {
        "points": [
            {"lambda": p.lam, "spearman": p.spearman, "pearson": p.pearson}
            for p in result.points
        ],
        "oracle_lambda": result.oracle.lam,
        "oracle_spearman": result.oracle.spearman,
        "oracle_pearson": result.oracle.pearson,
    }


def _emit(args, doc: dict, summary_lines: list[str]) -> int:
    if getattr(args, "out", None):
        write_report(args.out, doc)
        for line in summary_lines:
            print(line)
        log.info("wrote %s", args.out)
    else:
        sys.stdout.write(render_report(doc))
    return 0


# ---------------------------------------------------------------------------
# subcommands


def _scored_systems(args, metric: str, seed: int) -> dict[str, SystemScore]:
    systems = _load_systems(args)
    ctx = _make_ctx(args, metric, seed)
    try:
        _check_lengths(systems, ctx)
        return {
            sid: _score_system(ctx, sid, systems[sid], args.mode)
            for sid in sorted(systems)
        }
    finally:
        ctx.close()


def _summary_table(scores: Mapping[str, SystemScore]) -> list[str]:
    width = max(len("system"), max(len(sid) for sid in scores))
    lines = [f"{'system':<{width}}  {'metric':<10}  {'mode':<8}  score"]
    for sid in sorted(scores):
        s = scores[sid]
        lines.append(
            f"{sid:<{width}}  {s.metric:<10}  {s.mode:<8}  {s.headline:.6f}"
        )
    return lines


def _cmd_score(args) -> int:
    seed = _resolve_seed(args)
    scores = _scored_systems(args, args.metric, seed)
    doc = build_report(
        systems=[_system_entry(scores[sid]) for sid in sorted(scores)]
    )
    return _emit(args, doc, _summary_table(scores))


def _cmd_rank(args) -> int:
    seed = _resolve_seed(args)
    scores = _scored_systems(args, args.metric, seed)
    ranked = analysis.rank_systems({sid: s.headline for sid, s in scores.items()})
    doc = build_report(
        systems=[_system_entry(scores[sid]) for sid in sorted(scores)],
        rankings=[
            {"system": r.system_id, "score": r.score, "rank": r.rank}
            for r in ranked
        ],
    )
    lines = ["rank  system  score"] + [
        f"{r.rank:>4g}  {r.system_id}  {r.score:.6f}" for r in ranked
    ]
    return _emit(args, doc, lines)


def _cmd_correlate(args) -> int:
    seed = _resolve_seed(args)
    human = _load_human(args)
    scores = _scored_systems(args, args.metric, seed)
    ids = sorted(scores)
    missing = [sid for sid in ids if sid not in human.scores]
    if missing:
        raise ValidationError(f"human ranking is missing systems: {missing}")
    ours = [scores[sid].headline for sid in ids]
    theirs = [human.score_for(sid) for sid in ids]
    rho = analysis.spearman(ours, theirs)
    r = analysis.pearson(ours, theirs)
    label = f"{args.metric}:{args.mode}"
    doc = build_report(
        systems=[_system_entry(scores[sid]) for sid in ids],
        correlations=[
            {"label": label, "spearman": rho, "pearson": r, "n_systems": len(ids)}
        ],
    )
    lines = _summary_table(scores) + [
        f"{label}: spearman={rho:.6f} pearson={r:.6f} over {len(ids)} systems"
    ]
    return _emit(args, doc, lines)


def _sweep_contexts(args, seed: int):
    if args.fluency_metric not in FLUENCY_METRICS:
        raise _UsageError(
            f"--fluency-metric must be one of {FLUENCY_METRICS}"
        )
    if args.reference_metric not in REFERENCE_METRICS:
        raise _UsageError(
            f"--reference-metric must be one of {REFERENCE_METRICS}"
        )
    systems = _load_systems(args)
    fl_ctx = _make_ctx(args, args.fluency_metric, seed)
    ref_ctx = _make_ctx(args, args.reference_metric, seed)
    _check_lengths(systems, ref_ctx)
    _check_lengths(systems, fl_ctx)
    return systems, fl_ctx, ref_ctx


def _score_tables(systems, fl_ctx, ref_ctx):
    fluency = {sid: _per_sentence(fl_ctx, hyps) for sid, hyps in systems.items()}
    reference = {sid: _per_sentence(ref_ctx, hyps) for sid, hyps in systems.items()}
    return fluency, reference


def _sweep_system_entries(systems, fl_ctx, ref_ctx, fluency, reference):
    entries = []
    for sid in sorted(systems):
        for ctx, table in ((fl_ctx, fluency), (ref_ctx, reference)):
            per = table[sid]
            entries.append(
                _system_entry(
                    SystemScore(
                        system_id=sid,
                        metric=ctx.metric,
                        mode="sentence",
                        per_sentence=tuple(per),
                        mean_sentence_score=analysis.mean_score(per),
                        corpus_score=_corpus_score(ctx, systems[sid]),
                    )
                )
            )
    return entries


def _permuted_scores(ref_ctx: _Ctx, hyps: Sequence[Sentence], perm) -> list[float]:
    rows = [ref_ctx.ref_rows[p] for p in perm]
    return _per_sentence(ref_ctx, hyps, rows=rows)


def _cmd_sweep(args) -> int:
    seed = _resolve_seed(args)
    human = _load_human(args)
    systems, fl_ctx, ref_ctx = _sweep_contexts(args, seed)
    try:
        fluency, reference = _score_tables(systems, fl_ctx, ref_ctx)
        result = analysis.sweep_lambda(fluency, reference, human.scores)
        section = _sweep_section(result)
        lines = [
            f"oracle lambda={result.oracle.lam:.2f} "
            f"spearman={result.oracle.spearman:.6f} "
            f"pearson={result.oracle.pearson:.6f}"
        ]
        if args.gaming:
            if ref_ctx.metric not in ROW_METRICS:
                raise _UsageError(
                    f"--gaming needs a reference metric in {ROW_METRICS}"
                )
            gaming = []
            for sid in sorted(systems):
                report = analysis.gaming_check(
                    fluency[sid],
                    reference[sid],
                    functools.partial(_permuted_scores, ref_ctx, systems[sid]),
                    seed=seed,
                    lam=args.gaming_lambda,
                )
                gaming.append(
                    {
                        "system": sid,
                        "lambda": report.lam,
                        "rbm_true_mean": report.rbm_true_mean,
                        "rbm_shuffled_mean": report.rbm_shuffled_mean,
                        "rbm_drop": report.rbm_drop,
                        "rbm_relative_drop": report.rbm_relative_drop,
                        "interpolated_true_mean": report.interpolated_true_mean,
                        "interpolated_shuffled_mean": report.interpolated_shuffled_mean,
                        "interpolated_drop": report.interpolated_drop,
                    }
                )
                lines.append(
                    f"gaming {sid}: reference drop {report.rbm_drop:+.6f}, "
                    f"interpolated drop {report.interpolated_drop:+.6f}"
                )
            section["gaming"] = gaming
        doc = build_report(
            systems=_sweep_system_entries(systems, fl_ctx, ref_ctx, fluency, reference),
            sweep=section,
        )
        return _emit(args, doc, lines)
    finally:
        fl_ctx.close()
        ref_ctx.close()


def _subset_scorer(ref_ctx: _Ctx, systems, picks) -> dict[str, list[float]]:
    table = {}
    for sid in sorted(systems):
        rows = [
            tuple(ref_ctx.ref_rows[i][j] for j in pick)
            for i, pick in enumerate(picks)
        ]
        table[sid] = _per_sentence(ref_ctx, systems[sid], rows=rows)
    return table


def _cmd_ablate(args) -> int:
    seed = _resolve_seed(args)
    human = _load_human(args)
    systems, fl_ctx, ref_ctx = _sweep_contexts(args, seed)
    if ref_ctx.metric not in ROW_METRICS:
        raise _UsageError(f"ablate needs a reference metric in {ROW_METRICS}")
    try:
        fluency, reference = _score_tables(systems, fl_ctx, ref_ctx)
        result = analysis.sweep_lambda(fluency, reference, human.scores)
        n_refs = len(ref_ctx.ref_rows[0])
        sizes = None
        if args.sizes:
            sizes = sorted({int(s) for s in args.sizes.split(",")})
        points = analysis.ablate_references(
            fluency,
            functools.partial(_subset_scorer, ref_ctx, systems),
            n_refs,
            human.scores,
            sizes=sizes,
            trials=args.trials,
            seed=seed,
        )
        doc = build_report(
            systems=_sweep_system_entries(systems, fl_ctx, ref_ctx, fluency, reference),
            sweep=_sweep_section(result),
            ablation=[
                {
                    "size": p.size,
                    "mean_oracle_spearman": p.mean_oracle_spearman,
                    "half_width": p.half_width,
                    "per_trial": list(p.per_trial),
                }
                for p in points
            ],
        )
        lines = [
            f"refs={p.size}: oracle spearman "
            f"{p.mean_oracle_spearman:.6f} +- {p.half_width:.6f} "
            f"({len(p.per_trial)} trials)"
            for p in points
        ]
        return _emit(args, doc, lines)
    finally:
        fl_ctx.close()
        ref_ctx.close()


def _cmd_train_lfm(args) -> int:
    with open(args.train, encoding="utf-8-sig") as handle:
        names, rows, targets = parse_training_tsv(handle.read())
    model = train_ridge(
        rows,
        targets,
        alpha=args.alpha,
        feature_names=names,
        standardize=not args.no_standardize,
    )
    save_lfm_model(args.out, model)
    print(
        f"trained ridge (alpha={args.alpha:g}) on {len(rows)} rows; "
        f"kept {len(model.feature_names)}/{len(names)} features -> {args.out}"
    )
    return 0


def _cmd_check(args) -> int:
    suite, _ = _build_suite(args)
    sentences = read_parallel_text(args.input)
    closers = [d for d in suite.detectors if isinstance(d, ExternalChecker)]
    try:
        detections = []
        by_category: dict[str, int] = {}
        for index, sentence in enumerate(sentences):
            for span in suite.run(sentence.tokens):
                detections.append(
                    {
                        "sentence": index,
                        "start": span.start,
                        "end": span.end,
                        "category": span.category,
                    }
                )
                by_category[span.category] = by_category.get(span.category, 0) + 1
    finally:
        for checker in closers:
            checker.close()
    doc = build_report(detections=detections)
    lines = [f"{len(detections)} errors in {len(sentences)} sentences"] + [
        f"  {cat}: {count}" for cat, count in sorted(by_category.items())
    ]
    return _emit(args, doc, lines)


# ---------------------------------------------------------------------------
# parser


def _add_io_options(p: _Parser) -> None:
    p.add_argument("--out", help="write the JSON report here")
    p.add_argument("--seed", type=int, help="random seed (else GECMETRIC_SEED, else 0)")
    p.add_argument("--jobs", type=int, default=1, help="worker processes")


def _add_input_options(p: _Parser) -> None:
    p.add_argument("--source", help="tokenized source sentences, one per line")
    p.add_argument("--m2", help="gold annotation file (source + edits)")
    p.add_argument("--ref", action="append", default=[],
                   help="reference file; repeat for multiple references")
    p.add_argument("--hyp", action="append", default=[],
                   help="system output as ID=PATH (or PATH; id = stem)")
    p.add_argument("--wordlist", help="one known word per line")
    p.add_argument("--checker", help="external checker command line")
    p.add_argument("--checker-timeout", type=float, default=10.0)
    p.add_argument("--model", help="fluency model JSON (lfm)")
    p.add_argument("--lm-corpus", help="text corpus to build the n-gram LM (lfm)")


def _add_metric_options(p: _Parser) -> None:
    p.add_argument("--max-n", type=int, default=4, help="n-gram order (gleu)")
    p.add_argument("--iterations", type=int, default=500,
                   help="reference draws in sampled mode (gleu)")
    p.add_argument("--gleu-mode", choices=(SAMPLED, MEAN_OVER_ALL),
                   default=SAMPLED, help="multi-reference handling (gleu)")
    p.add_argument("--beta", type=float, default=0.5, help="F weight (m2)")
    p.add_argument("--max-unchanged", type=int, default=2,
                   help="max matched tokens inside a merged edit (m2)")
    p.add_argument("--weight", type=float, default=2.0,
                   help="true-positive weight (imeasure)")


def build_parser() -> _Parser:
    parser = _Parser(prog="gecmetric", description=__doc__.splitlines()[0])
    parser.add_argument("--version", action="version", version="%(prog)s 0.1.0")
    parser.set_defaults(func=None)
    sub = parser.add_subparsers(dest="command", parser_class=_Parser)

    def scoring_command(name: str, help_text: str) -> _Parser:
        p = sub.add_parser(name, help=help_text)
        p.add_argument("--metric", required=True, choices=METRICS)
        p.add_argument("--mode", choices=("sentence", "corpus"),
                       default="sentence", help="headline aggregation")
        _add_input_options(p)
        _add_metric_options(p)
        _add_io_options(p)
        return p

    scoring_command("score", "score systems with one metric").set_defaults(
        func=_cmd_score
    )
    scoring_command("rank", "score and rank systems").set_defaults(func=_cmd_rank)
    correlate = scoring_command("correlate", "correlate scores with human judgments")
    correlate.add_argument("--human", help="tab-separated system<TAB>score file")
    correlate.set_defaults(func=_cmd_correlate)

    def sweep_command(name: str, help_text: str) -> _Parser:
        p = sub.add_parser(name, help=help_text)
        p.add_argument("--fluency-metric", required=True, choices=FLUENCY_METRICS)
        p.add_argument("--reference-metric", required=True,
                       choices=REFERENCE_METRICS)
        p.add_argument("--human", help="tab-separated system<TAB>score file")
        _add_input_options(p)
        _add_metric_options(p)
        _add_io_options(p)
        return p

    sweep = sweep_command("sweep", "interpolate two metrics over lambda")
    sweep.add_argument("--gaming", action="store_true",
                       help="also rescore against permuted references")
    sweep.add_argument("--gaming-lambda", type=float, default=0.5)
    sweep.set_defaults(func=_cmd_sweep)

    ablate = sweep_command("ablate", "sweep with per-sentence reference subsets")
    ablate.add_argument("--trials", type=int, default=10)
    ablate.add_argument("--sizes", help="comma-separated subset sizes (default all)")
    ablate.set_defaults(func=_cmd_ablate)

    train = sub.add_parser("train-lfm", help="fit the ridge fluency model")
    train.add_argument("--train", required=True,
                       help="TSV: header row, feature columns, target last")
    train.add_argument("--alpha", type=float, default=1.0)
    train.add_argument("--no-standardize", action="store_true",
                       help="center features but do not scale them")
    train.add_argument("--out", required=True, help="model JSON path")
    train.set_defaults(func=_cmd_train_lfm)

    check = sub.add_parser("check", help="run error detectors over a text file")
    check.add_argument("--input", required=True,
                       help="tokenized sentences, one per line")
    check.add_argument("--wordlist", help="one known word per line")
    check.add_argument("--checker", help="external checker command line")
    check.add_argument("--checker-timeout", type=float, default=10.0)
    check.add_argument("--out", help="write the JSON report here")
    check.set_defaults(func=_cmd_check)

    return parser


def main(argv: Sequence[str] | None = None) -> int:
    if not logging.getLogger().handlers:
        logging.basicConfig(stream=sys.stderr, level=logging.INFO,
                            format="%(message)s")
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except _UsageError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except SystemExit as exc:  # --help / --version
        return 0 if exc.code in (0, None) else 1
    if args.func is None:
        parser.print_usage(sys.stderr)
        return 1
    try:
        return args.func(args)
    except _UsageError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except DetectorError as exc:
        log.error("%s", exc)
        return 3
    except (ParseError, ValidationError, ModelError) as exc:
        log.error("%s", exc)
        return 2
    except OSError as exc:
        log.error("%s", exc)
        return 1


if __name__ == "__main__":
    sys.exit(main())
