"""Command-line pipeline: ingest, stats, triples, train-channel, train-lm,
export-heatmap, noise, correct, evaluate, selfcheck.

Every subcommand is a pure function of its input files, flags, and seed;
logs go to stderr, data to stdout or the -o path.
"""

from __future__ import annotations

import argparse
import json
import math
import random
import sys

from spellchannel import channel as channel_mod
from spellchannel import langmodel as lm_mod
from spellchannel import reference
from spellchannel.channel import (
    CDParams,
    ConfusionModel,
    bm_likelihood,
    extract_triples,
    load_triples,
    train_confusion,
)
from spellchannel.corpus import FrequencyTable, Vocabulary, ingest, stats
from spellchannel.corrector import (
    CandidateIndex,
    CorrectionConfig,
    CorrectionModels,
    generate_candidates,
    run_correction,
)
from spellchannel.evaluation import (
    evaluate_grid,
    format_report_table,
    reports_to_json,
)
from spellchannel.langmodel import (
    KNBigramModel,
    PluginClient,
    UniformPrior,
    check_protocol,
    train_kn,
)
from spellchannel.noiser import (
    build_eval_dataset,
    calibrate_rate_scale,
    derive_noise_model,
    load_dataset,
    save_dataset,
)
from spellchannel.profiles import PROFILES, get_profile
from spellchannel.textcore import dl_distance, load_profile, tokenize


def _resolve_profile(name_or_path: str):
    if name_or_path in PROFILES:
        return get_profile(name_or_path)
    return load_profile(name_or_path)


def _open_source(path: str):
    if path == "-":
        return sys.stdin.buffer
    return path


def _write_output(text: str, out_path: str | None) -> None:
    if out_path and out_path != "-":
        with open(out_path, "w", encoding="utf-8", newline="\n") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


def _read_lines(path: str) -> list[str]:
    if path == "-":
        return [line.rstrip("\n") for line in sys.stdin]
    with open(path, "r", encoding="utf-8") as fh:
        return [line.rstrip("\n") for line in fh]


def _log(msg: str) -> None:
    print(msg, file=sys.stderr)


def _table_tsv(table: FrequencyTable) -> str:
    return "".join(f"{w}\t{c}\n" for w, c in table.items_by_count())


def _load_wordlist(path: str) -> dict[str, int]:
    return dict(Vocabulary.load(path).counts)


def cmd_ingest(args) -> int:
    profile = _resolve_profile(args.profile)
    table = ingest(_open_source(args.corpus), profile)
    _write_output(_table_tsv(table), args.output)
    _log(f"ingested {table.total_tokens} tokens, {len(table)} distinct words")
    return 0


def cmd_stats(args) -> int:
    profile = _resolve_profile(args.profile)
    cutoffs = [int(c) for c in args.cutoffs.split(",") if c.strip()]
    st = stats(_open_source(args.corpus), profile, cutoffs)
    if args.format == "json":
        text = json.dumps(st.to_json_dict(), ensure_ascii=False, sort_keys=True, indent=1) + "\n"
    else:
        text = st.to_csv(args.label)
    _write_output(text, args.output)
    return 0


def cmd_triples(args) -> int:
    table = FrequencyTable.load_tsv(args.freq)
    triples = extract_triples(table, max_ed=args.max_ed, ratio=args.ratio)
    text = "".join(f"{t.correct}\t{t.misspelled}\t{t.frequency}\n" for t in triples)
    _write_output(text, args.output)
    _log(f"extracted {len(triples)} triples")
    return 0


def cmd_train_channel(args) -> int:
    triples = load_triples(args.triples)
    alphabet: set[str] = set()
    for t in triples:
        alphabet.update(t.correct)
        alphabet.update(t.misspelled)
    if args.freq:
        for w in FrequencyTable.load_tsv(args.freq).counts:
            alphabet.update(w)
    if args.alphabet:
        alphabet.update(args.alphabet)
    if not alphabet:
        raise ValueError("alphabet is empty; provide --freq or --alphabet")
    model = train_confusion(triples, alphabet, smoothing_k=args.smoothing_k)
    _write_output(model.to_json_text(), args.output)
    _log(
        f"trained confusion model: |alphabet|={len(alphabet)}, "
        f"{len(triples)} triples, hash={model.content_hash()[:12]}"
    )
    return 0


def cmd_train_lm(args) -> int:
    profile = _resolve_profile(args.profile)
    model = train_kn(
        _open_source(args.corpus),
        discount_d=args.discount_d,
        vocab_cutoff=args.cutoff,
        profile=profile,
    )
    _write_output(model.to_json_text(), args.output)
    _log(f"trained bigram model: |vocab|={len(model.vocab)}, hash={model.content_hash()[:12]}")
    return 0


def cmd_export_heatmap(args) -> int:
    model = ConfusionModel.load(args.model)
    chars = list(args.chars) if args.chars else sorted(model.alphabet)
    if args.include_epsilon:
        chars.append("")
    _write_output(channel_mod.export_heatmap(model, chars), args.output)
    return 0


def cmd_noise(args) -> int:
    profile = _resolve_profile(args.profile)
    model = ConfusionModel.load(args.model)
    sentences = [s for s in _read_lines(args.corpus) if s.strip()]
    if args.rate_scale is not None:
        nm = derive_noise_model(model, args.rate_scale, args.seed)
    else:
        nm, achieved = calibrate_rate_scale(
            sentences, model, target=args.target_wer, seed=args.seed, profile=profile
        )
        _log(f"calibrated rate_scale={nm.rate_scale:g} (sampled rate {achieved:.4f})")
    dataset = build_eval_dataset(sentences, nm, profile)
    save_dataset(dataset, args.output)
    _log(
        f"wrote {len(dataset)} sentence pairs, "
        f"token corruption rate {dataset.meta['token_corruption_rate']:.4f}"
    )
    return 0


def _build_lm(args, vocab_size: int):
    """Returns (backend, label, closer)."""
    if args.lm:
        return KNBigramModel.load(args.lm), "kn", None
    if args.plugin:
        client = PluginClient.open_endpoint(args.plugin)
        return client, "plugin", client.close
    return UniformPrior(max(vocab_size, 1)), "uniform", None


def _build_models(args) -> tuple[CorrectionModels, object | None]:
    profile = _resolve_profile(args.profile)
    confusion = ConfusionModel.load(args.model) if args.model else None
    vocab_counts: dict[str, int] = {}
    if args.vocab:
        vocab_counts = {
            w: c for w, c in _load_wordlist(args.vocab).items() if c >= args.vocab_cutoff
        }
    index = CandidateIndex.build(vocab_counts)
    lm, _, closer = _build_lm(args, len(vocab_counts))
    models = CorrectionModels(
        confusion=confusion,
        lm=lm,
        index=index,
        profile=profile,
        cd_params=CDParams(args.alpha),
    )
    return models, closer


def _correction_config(args, ablation_vocab: frozenset[str] = frozenset()) -> CorrectionConfig:
    return CorrectionConfig(
        lambda_=args.lambda_,
        mode=args.mode,
        error_model=args.error_model,
        per_word_cap=args.per_word_cap,
        beam_width=args.beam_width,
        enumeration_limit=args.enumeration_limit,
        ablation=bool(ablation_vocab),
        oov_penalty_logp=args.oov_penalty,
        ablation_vocab=ablation_vocab,
    )


def cmd_correct(args) -> int:
    if args.error_model == "bm" and not args.model:
        raise ValueError("--error-model bm requires --model")
    if not args.ablation and not args.vocab:
        raise ValueError("--vocab is required unless --ablation is used")
    ablation_vocab: frozenset[str] = frozenset()
    if args.ablation:
        if not args.ablation_vocab:
            raise ValueError("--ablation requires --ablation-vocab")
        ablation_vocab = frozenset(_load_wordlist(args.ablation_vocab))
    models, closer = _build_models(args)
    config = _correction_config(args, ablation_vocab)

    trace_fh = None
    if args.trace:
        trace_fh = open(args.trace, "w", encoding="utf-8", newline="\n")
    out_lines: list[str] = []
    try:
        for line in _read_lines(args.input):
            toks = tokenize(line, models.profile)
            if not toks:
                out_lines.append("")
                continue
            result = run_correction(toks, models, config)
            out_lines.append(" ".join(result.corrected))
            if trace_fh:
                trace_fh.write(
                    json.dumps(result.to_json_dict(), ensure_ascii=False, sort_keys=True)
                    + "\n"
                )
    finally:
        if trace_fh:
            trace_fh.close()
        if closer:
            closer()
    _write_output("".join(l + "\n" for l in out_lines), args.output)
    return 0


def cmd_evaluate(args) -> int:
    dataset = load_dataset(args.dataset)
    models, closer = _build_models(args)
    error_models = [m.strip() for m in args.error_models.split(",") if m.strip()]
    modes = [m.strip() for m in args.modes.split(",") if m.strip()]
    lm_label = "kn" if args.lm else ("plugin" if args.plugin else "uniform")

    cells = []
    for em in error_models:
        for mode in modes:
            cfg = CorrectionConfig(
                lambda_=args.lambda_,
                mode=mode,
                error_model=em,
                per_word_cap=args.per_word_cap,
                beam_width=args.beam_width,
                enumeration_limit=args.enumeration_limit,
                oov_penalty_logp=args.oov_penalty,
            )
            cells.append((f"{em}+{lm_label}+{mode}", models, cfg))
    if args.ablation_vocab:
        ablation_vocab = frozenset(_load_wordlist(args.ablation_vocab))
        for em in error_models:
            cfg = CorrectionConfig(
                lambda_=args.lambda_,
                mode="word",
                error_model=em,
                per_word_cap=args.per_word_cap,
                beam_width=args.beam_width,
                enumeration_limit=args.enumeration_limit,
                ablation=True,
                oov_penalty_logp=args.oov_penalty,
                ablation_vocab=ablation_vocab,
            )
            cells.append((f"ablation+{em}", models, cfg))

    try:
        reports = evaluate_grid(dataset, cells, allow_same_model=args.allow_same_model)
    finally:
        if closer:
            closer()
    if args.format == "json":
        _write_output(reports_to_json(reports), args.output)
    else:
        _write_output(format_report_table(reports), args.output)
    return 0


def _selfcheck_checks(seed: int):
    rng = random.Random(seed)
    sigma = "abc"

    def all_strings(alphabet: str, max_len: int) -> list[str]:
        out = [""]
        frontier = [""]
        for _ in range(max_len):
            frontier = [s + ch for s in frontier for ch in alphabet]
            out.extend(frontier)
        return out

    def check_distance_scripts():
        strings = all_strings(sigma, 3)
        for a in strings:
            for b in strings:
                if dl_distance(a, b) != reference.ref_dl_scripts(a, b):
                    raise AssertionError(f"dl mismatch on ({a!r}, {b!r})")
        return f"{len(strings) ** 2} pairs vs script enumeration"

    def check_distance_memo():
        for _ in range(300):
            a = "".join(rng.choice(sigma) for _ in range(rng.randint(0, 5)))
            b = "".join(rng.choice(sigma) for _ in range(rng.randint(0, 5)))
            if dl_distance(a, b) != reference.ref_dl_memo(a, b):
                raise AssertionError(f"dl mismatch on ({a!r}, {b!r})")
        return "300 random pairs vs memoized recursion"

    def make_toy_confusion():
        triples = [
            channel_mod.Triple("abc", "abb", 4),
            channel_mod.Triple("cab", "ab", 3),
            channel_mod.Triple("bc", "abc", 2),
            channel_mod.Triple("aa", "ab", 1),
        ]
        return train_confusion(triples, sigma)

    def check_bm():
        model = make_toy_confusion()
        strings = all_strings(sigma, 3)
        for o in strings:
            for c in strings:
                got = bm_likelihood(o, c, model)
                want = reference.ref_bm_enumerate(o, c, model)
                if abs(got - want) > 1e-9:
                    raise AssertionError(f"bm mismatch on ({o!r}, {c!r})")
        return f"{len(strings) ** 2} pairs vs alignment enumeration"

    def check_index():
        words = {
            "".join(rng.choice("abcde") for _ in range(rng.randint(1, 8))): 1
            for _ in range(150)
        }
        index = CandidateIndex.build(words)
        for _ in range(60):
            q = "".join(rng.choice("abcde") for _ in range(rng.randint(1, 8)))
            k = rng.choice([1, 2])
            if index.query(q, k) != reference.ref_query_scan(words, q, k):
                raise AssertionError(f"index mismatch on ({q!r}, k={k})")
        return "60 queries vs linear scan"

    def check_heuristic():
        from spellchannel.profiles import LATIN

        words = {
            "".join(rng.choice("abcdef") for _ in range(rng.randint(2, 7))): 1
            for _ in range(200)
        }
        index = CandidateIndex.build(words)
        for _ in range(50):
            q = "".join(rng.choice("abcdef") for _ in range(rng.randint(2, 7)))
            got = generate_candidates(q, index, LATIN)
            want_words, want_flag = reference.ref_generate_candidates(q, words, LATIN)
            if got.words() != want_words or got.filtered_by_metaphone != want_flag:
                raise AssertionError(f"heuristic mismatch on {q!r}")
        return "50 probes vs transparent reimplementation"

    def check_kn():
        corpus = ["a b c . a b d .", "b c a . a b c ."]
        model = train_kn(corpus, vocab_cutoff=1)
        scorable = sorted(model.vocab - {lm_mod.START})
        for ctx in sorted(model.vocab):
            total = sum(math.exp(model.logprob(w, ctx)) for w in scorable)
            if abs(total - 1.0) > 1e-9:
                raise AssertionError(f"normalization off for context {ctx!r}: {total}")
        return f"{len(model.vocab)} contexts normalized"

    def check_plugin():
        client = PluginClient.spawn([sys.executable, "-m", "spellchannel.plugin_echo"])
        try:
            results = check_protocol(client)
        finally:
            client.close()
        failed = [r for r in results if not r["passed"]]
        if failed:
            raise AssertionError("; ".join(f"{r['name']}: {r['detail']}" for r in failed))
        return f"{len(results)} protocol probes"

    def check_noiser_markers():
        from spellchannel.noiser import MARKER, _interleave
        from spellchannel.profiles import DEVANAGARI

        base = "कखगघचछजझ"
        mods = sorted(DEVANAGARI.modifiers)
        for _ in range(500):
            word = "".join(
                rng.choice(mods) if rng.random() < 0.3 else rng.choice(base)
                for _ in range(rng.randint(1, 9))
            )
            temp = _interleave(word, DEVANAGARI.modifiers)
            if "".join(c for c in temp if c != MARKER) != word:
                raise AssertionError(f"marker removal does not restore {word!r}")
            for i, c in enumerate(temp):
                if c == MARKER:
                    if temp[i - 1] in DEVANAGARI.modifiers or temp[i + 1] in DEVANAGARI.modifiers:
                        raise AssertionError(f"marker beside modifier in {word!r}")
        return "500 words, marker placement clean"

    return [
        ("distance_vs_script_enumeration", check_distance_scripts),
        ("distance_vs_memo_recursion", check_distance_memo),
        ("bm_vs_alignment_enumeration", check_bm),
        ("index_vs_linear_scan", check_index),
        ("heuristic_vs_reimplementation", check_heuristic),
        ("kn_normalization", check_kn),
        ("plugin_protocol_roundtrip", check_plugin),
        ("noiser_marker_placement", check_noiser_markers),
    ]


def cmd_selfcheck(args) -> int:
    failures = 0
    for name, fn in _selfcheck_checks(args.seed):
        try:
            detail = fn()
            print(f"ok   {name}: {detail}")
        except Exception as exc:
            failures += 1
            print(f"FAIL {name}: {exc}")
    if failures:
        _log(f"{failures} self-check(s) failed")
        return 1
    return 0


def _add_common(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--config", help="JSON file of flag defaults; flags override")
    parser.add_argument("-o", "--output", default=None, help="output path (default stdout)")


def build_parser() -> tuple[argparse.ArgumentParser, dict[str, argparse.ArgumentParser]]:
    parser = argparse.ArgumentParser(
        prog="spellchannel",
        description="Corpus-trained noisy-channel spelling correction toolkit",
    )
    subs = parser.add_subparsers(dest="command", required=True)
    registry: dict[str, argparse.ArgumentParser] = {}

    def sub(name: str, help_text: str) -> argparse.ArgumentParser:
        p = subs.add_parser(name, help=help_text)
        registry[name] = p
        _add_common(p)
        return p

    p = sub("ingest", "count word frequencies from a corpus")
    p.add_argument("corpus", help="corpus path, or - for stdin")
    p.add_argument("--profile", default="latin")
    p.set_defaults(func=cmd_ingest)

    p = sub("stats", "per-paragraph summaries and vocab-vs-cutoff curve")
    p.add_argument("corpus")
    p.add_argument("--profile", default="latin")
    p.add_argument("--cutoffs", default="1,2,5,10,20,50,100")
    p.add_argument("--format", choices=("json", "csv"), default="json")
    p.add_argument("--label", default="corpus")
    p.set_defaults(func=cmd_stats)

    p = sub("triples", "mine (correct, misspelled, freq) triples")
    p.add_argument("--freq", required=True, help="frequency TSV from ingest")
    p.add_argument("--max-ed", type=int, default=2)
    p.add_argument("--ratio", type=float, default=5.0)
    p.set_defaults(func=cmd_triples)

    p = sub("train-channel", "train the confusion model from triples")
    p.add_argument("--triples", required=True)
    p.add_argument("--freq", help="frequency TSV used to widen the alphabet")
    p.add_argument("--alphabet", help="extra alphabet characters, as one string")
    p.add_argument("--smoothing-k", type=float, default=0.1)
    p.set_defaults(func=cmd_train_channel)

    p = sub("train-lm", "train the bigram language model")
    p.add_argument("corpus")
    p.add_argument("--profile", default="latin")
    p.add_argument("--discount-d", type=float, default=0.75)
    p.add_argument("--cutoff", type=int, default=1)
    p.set_defaults(func=cmd_train_lm)

    p = sub("export-heatmap", "edit-probability matrix as CSV")
    p.add_argument("--model", required=True)
    p.add_argument("--chars", help="source characters (rows); default: whole alphabet")
    p.add_argument("--include-epsilon", action="store_true", help="add the ε source row")
    p.set_defaults(func=cmd_export_heatmap)

    p = sub("noise", "corrupt clean sentences into an evaluation dataset")
    p.add_argument("corpus", help="clean sentences, one per line")
    p.add_argument("--model", required=True, help="confusion model JSON")
    p.add_argument("--profile", default="latin")
    p.add_argument("--rate-scale", type=float, default=None)
    p.add_argument("--target-wer", type=float, default=0.25)
    p.add_argument("--seed", type=int, default=0)
    p.set_defaults(func=cmd_noise)

    def add_correction_flags(p: argparse.ArgumentParser) -> None:
        p.add_argument("--model", help="confusion model JSON (required for bm)")
        p.add_argument("--vocab", help="frequency TSV or wordlist for candidates")
        p.add_argument("--vocab-cutoff", type=int, default=1)
        p.add_argument("--lm", help="bigram model JSON")
        p.add_argument("--plugin", help="LM plugin endpoint (host:port or command)")
        p.add_argument("--profile", default="latin")
        p.add_argument("--lambda", dest="lambda_", type=float, default=1.0)
        p.add_argument("--alpha", type=float, default=0.65)
        p.add_argument("--per-word-cap", type=int, default=8)
        p.add_argument("--beam-width", type=int, default=16)
        p.add_argument("--enumeration-limit", type=int, default=10_000)
        p.add_argument("--oov-penalty", type=float, default=-50.0)
        p.add_argument("--ablation-vocab", help="wordlist for ablation mode")

    p = sub("correct", "correct text from a file or stdin")
    p.add_argument("input", help="input path, or - for stdin")
    add_correction_flags(p)
    p.add_argument("--mode", choices=("word", "sentence"), default="sentence")
    p.add_argument("--error-model", choices=("bm", "cd"), default="bm")
    p.add_argument("--ablation", action="store_true")
    p.add_argument("--trace", help="write per-sentence candidate traces (JSON lines)")
    p.set_defaults(func=cmd_correct)

    p = sub("evaluate", "score corrections over a noisy/clean dataset")
    p.add_argument("--dataset", required=True)
    add_correction_flags(p)
    p.add_argument("--modes", default="word,sentence")
    p.add_argument("--error-models", default="bm,cd")
    p.add_argument("--allow-same-model", action="store_true")
    p.add_argument("--format", choices=("table", "json"), default="table")
    p.set_defaults(func=cmd_evaluate)

    p = sub("selfcheck", "run the built-in oracle suites")
    p.add_argument("--seed", type=int, default=0)
    p.set_defaults(func=cmd_selfcheck)

    return parser, registry


def _apply_config(argv: list[str], registry: dict[str, argparse.ArgumentParser]) -> None:
    """Load --config JSON (if present) as defaults on the subcommand parser."""
    command = next((a for a in argv if not a.startswith("-")), None)
    path = None
    for i, a in enumerate(argv):
        if a == "--config" and i + 1 < len(argv):
            path = argv[i + 1]
        elif a.startswith("--config="):
            path = a.split("=", 1)[1]
    if path is None or command not in registry:
        return
    with open(path, "r", encoding="utf-8") as fh:
        config = json.load(fh)
    if not isinstance(config, dict):
        raise ValueError(f"{path}: config must be a JSON object")
    sub = registry[command]
    valid = {a.dest for a in sub._actions}
    defaults = {}
    for key, value in config.items():
        dest = key.replace("-", "_")
        if dest not in valid:
            raise ValueError(f"{path}: unknown config key {key!r} for {command!r}")
        defaults[dest] = value
    sub.set_defaults(**defaults)


def main(argv: list[str] | None = None) -> int:
    argv = list(sys.argv[1:] if argv is None else argv)
    parser, registry = build_parser()
    try:
        _apply_config(argv, registry)
        args = parser.parse_args(argv)
        return args.func(args)
    except SystemExit as exc:
        return int(exc.code or 0)
    except BrokenPipeError:
        return 1
    except Exception as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
