"""Command-line surface wiring the pipeline end to end.

Subcommands: ingest, train, generate, fuzz, stats, replay. Every subcommand
is deterministic under a fixed --seed. Exit codes: 0 success, 1 usage error,
2 runtime failure.
"""

from __future__ import annotations

import argparse
import json
import math
import random
import sys
from pathlib import Path

from . import adapter as adapter_mod
from . import nnlm
from .estree import MalformedAst, UnsupportedKind, decode_ast, encode_ast
from .fragments import build_vocabulary, fragmentize, load_store, save_store
from .generate import GenerationParams, MutationFailure, mutate_ast
from .harness import (
    CampaignSettings,
    EngineConfig,
    classify,
    execute,
    run_campaign,
)
from .normalize import BuiltinRegistry, inline_eval, normalize
from .printer import print_program
from .resolver import resolve_references
from .suggest import LstmSuggester, MarkovSuggester, RandomSuggester

MAX_FILE_BYTES = 30 * 1024      # corpus filtering rule: skip files over 30 KB
MAX_SEQUENCE_FRAGMENTS = 2048   # drop outsized fragment sequences from training


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        print(f"error: {message}", file=sys.stderr)
        raise SystemExit(1)


def _load_builtins(path: str | None) -> BuiltinRegistry:
    return BuiltinRegistry.load(path) if path else BuiltinRegistry.default()


def cmd_ingest(args) -> int:
    builtins = _load_builtins(args.builtins)
    out = Path(args.out)
    seeds_dir = out / "seeds"
    seeds_dir.mkdir(parents=True, exist_ok=True)
    skipped = {"oversize": 0, "unsupported": 0, "malformed": 0, "oversequence": 0}
    sequences = []
    kept = 0

    sources: list[tuple[str, str]] = []  # (name, payload kind)
    if args.fixtures:
        for path in sorted(Path(args.fixtures).glob("*.json")):
            sources.append((str(path), "fixture"))
    if args.sources:
        for path in sorted(Path(args.sources).glob("*.js")):
            sources.append((str(path), "source"))
    if not sources:
        print("error: no input files", file=sys.stderr)
        return 1

    parser = None
    if any(kind == "source" for _, kind in sources) or args.inline_eval:
        if adapter_mod.available():
            parser = adapter_mod.ParserAdapter()
            parser.start()
        elif any(kind == "source" for _, kind in sources):
            print("error: raw sources need the parser adapter "
                  f"(set {adapter_mod.ADAPTER_ENV})", file=sys.stderr)
            return 1

    try:
        for path, kind in sources:
            p = Path(path)
            if p.stat().st_size > args.max_bytes:
                skipped["oversize"] += 1
                continue
            try:
                if kind == "fixture":
                    ast = decode_ast(p.read_text(encoding="utf-8"))
                else:
                    ast = parser.parse(p.read_text(encoding="utf-8"))
            except UnsupportedKind:
                skipped["unsupported"] += 1
                continue
            except (MalformedAst, adapter_mod.AdapterError):
                skipped["malformed"] += 1
                continue
            if parser is not None:
                ast = inline_eval(ast, parser.parse)
            ast, _ = normalize(ast, builtins)
            seq = fragmentize(ast, provenance=p.name)
            if len(seq) > MAX_SEQUENCE_FRAGMENTS:
                skipped["oversequence"] += 1
                continue
            sequences.append(seq)
            (seeds_dir / (p.stem + ".json")).write_text(encode_ast(ast),
                                                        encoding="utf-8")
            kept += 1
    finally:
        if parser is not None:
            parser.stop()

    if not sequences:
        print("error: every input file was skipped", file=sys.stderr)
        return 2
    vocab, encoded = build_vocabulary(sequences, min_freq=args.min_freq)
    save_store(out, vocab, encoded)
    meta = {"files": kept, "skipped": skipped, "vocabulary": len(vocab),
            "non_reserved": len(vocab.non_reserved_ids()), "min_freq": args.min_freq}
    (out / "meta.json").write_text(json.dumps(meta, indent=2), encoding="utf-8")
    print(json.dumps(meta))
    return 0


def cmd_train(args) -> int:
    vocab, sequences = load_store(args.store)
    hp = nnlm.Hyperparams(
        learning_rate=args.lr, batch_size=args.batch_size,
        epochs=args.epochs, rng_seed=args.seed)
    model = nnlm.init_model(hp, vocab)

    def on_epoch(epoch, l1, l2):
        print(f"epoch {epoch + 1}/{hp.epochs} l1 {l1:.4f} l2 {l2:.4f} "
              f"ppl {math.exp(l1):.3f}")

    nnlm.train(model, sequences, vocab, on_epoch=on_epoch)
    nnlm.save_checkpoint(model, hp, vocab.content_hash(), args.out)
    print(f"saved {args.out}")
    return 0


def _make_suggester_factory(name, store, checkpoint, vocab, sequences, seed):
    if name == "lstm":
        model, _ = nnlm.load_checkpoint(checkpoint, vocab.content_hash())
        return lambda: LstmSuggester(model, vocab)
    if name == "markov":
        markov = MarkovSuggester.train(sequences, vocab)
        return lambda: markov
    if name == "random":
        return lambda: RandomSuggester(vocab, seed)
    raise ValueError(f"unknown suggester {name}")


def _load_seeds(seeds_dir: Path) -> list:
    seeds = []
    for path in sorted(Path(seeds_dir).glob("*.json")):
        ast = decode_ast(path.read_text(encoding="utf-8"))
        if len(fragmentize(ast)) >= 2:
            seeds.append((path.name, ast))
    return seeds


def cmd_generate(args) -> int:
    store = Path(args.store)
    vocab, sequences = load_store(store)
    factory = _make_suggester_factory(args.suggester, store, args.checkpoint,
                                      vocab, sequences, args.seed)
    suggester = factory()
    seeds = _load_seeds(store / "seeds")
    if not seeds:
        print("error: no usable seeds in the store", file=sys.stderr)
        return 2
    builtins = _load_builtins(args.builtins)
    params = GenerationParams(f_max=args.fmax, k_top=args.ktop)
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    asts = [ast for _, ast in seeds]
    rng = random.Random(args.seed)
    written = 0
    failures = 0
    manifest = []
    while written < args.count and failures < args.count * 20 + 100:
        result = mutate_ast(asts, suggester, params, vocab, rng)
        if isinstance(result, MutationFailure):
            failures += 1
            continue
        ast = result.ast
        if args.resolve:
            ast, _ = resolve_references(ast, builtins, rng)
        name = f"test_{written:05d}.js"
        (out / name).write_text(print_program(ast), encoding="utf-8")
        manifest.append({"name": name, "seed": seeds[result.seed_index][0],
                         "appended": len(result.appended_ids)})
        written += 1
    (out / "manifest.json").write_text(json.dumps(
        {"count": written, "gen_failures": failures, "k_top": args.ktop,
         "f_max": args.fmax, "seed": args.seed, "tests": manifest}, indent=2),
        encoding="utf-8")
    print(f"wrote {written} tests to {out} ({failures} generation failures)")
    return 0 if written == args.count else 2


def cmd_fuzz(args) -> int:
    cfg = json.loads(Path(args.config).read_text(encoding="utf-8"))
    store = Path(cfg["store"])
    vocab, sequences = load_store(store)
    factory = _make_suggester_factory(
        cfg.get("suggester", "lstm"), store, cfg.get("checkpoint"),
        vocab, sequences, cfg.get("rng_seed", 0))
    seeds = _load_seeds(Path(cfg.get("seeds", store / "seeds")))
    engine = EngineConfig(
        binary=cfg["engine"]["binary"],
        args=cfg["engine"].get("args", ["{test}"]),
        timeout=cfg["engine"].get("timeout", 5.0),
        env=cfg["engine"].get("env"),
        error_patterns=cfg["engine"].get("error_patterns"),
        extractor=cfg["engine"].get("extractor"))
    settings = CampaignSettings(
        engine=engine,
        seeds=seeds,
        suggester_factory=factory,
        params=GenerationParams(f_max=cfg.get("f_max", 100),
                                k_top=cfg.get("k_top", 64)),
        vocab=vocab,
        builtins=_load_builtins(cfg.get("builtins")),
        out_dir=Path(cfg["out_dir"]),
        resolve=cfg.get("resolve", True),
        workers=cfg.get("workers", 1),
        budget_tests=cfg.get("budget_tests"),
        budget_seconds=cfg.get("budget_seconds"),
        rng_seed=cfg.get("rng_seed", 0))
    stats = run_campaign(settings)
    print(json.dumps(stats.to_dict(), indent=2))
    return 0


def cmd_stats(args) -> int:
    campaign = Path(args.campaign)
    stats_path = campaign / "stats.json"
    if not stats_path.exists():
        print("error: no stats.json in campaign directory", file=sys.stderr)
        return 2
    stats = json.loads(stats_path.read_text(encoding="utf-8"))
    print(json.dumps(stats, indent=2))
    crashes = campaign / "crashes"
    if crashes.is_dir():
        for d in sorted(crashes.iterdir()):
            meta = d / "meta.json"
            if meta.exists():
                row = json.loads(meta.read_text(encoding="utf-8"))
                print(f"crash {row['key']} hits={row.get('hits', 1)} "
                      f"seed={row.get('seed_provenance', '?')}")
    return 0


def cmd_replay(args) -> int:
    test = Path(args.campaign) / "crashes" / args.key / "test.js"
    if not test.exists():
        print(f"error: no crash record {args.key}", file=sys.stderr)
        return 2
    engine = EngineConfig(binary=args.engine,
                          args=args.engine_args.split() if args.engine_args else ["{test}"],
                          timeout=args.timeout)
    outcome = execute(engine, test.read_text(encoding="utf-8"))
    cls = classify(outcome)
    print(json.dumps({"category": cls.category, "detail": cls.detail,
                      "exit_code": outcome.exit_code, "signal": outcome.signal,
                      "wall": round(outcome.wall_time, 4)}))
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="fraggen",
                     description="Fragment-level language-model fuzzing toolkit")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("ingest", help="build a fragment store from fixtures or sources")
    p.add_argument("--fixtures", help="directory of ESTree .json fixture ASTs")
    p.add_argument("--sources", help="directory of .js files (needs the adapter)")
    p.add_argument("--out", required=True, help="store output directory")
    p.add_argument("--min-freq", type=int, default=5,
                   help="vocabulary frequency threshold (default 5)")
    p.add_argument("--max-bytes", type=int, default=MAX_FILE_BYTES,
                   help="skip input files larger than this (default 30 KB)")
    p.add_argument("--builtins", help="builtin registry JSON override")
    p.add_argument("--inline-eval", action="store_true",
                   help="inline constant eval() arguments (needs the adapter)")
    p.set_defaults(fn=cmd_ingest)

    p = sub.add_parser("train", help="train the fragment language model")
    p.add_argument("--store", required=True)
    p.add_argument("--out", required=True, help="checkpoint path")
    p.add_argument("--epochs", type=int, default=70)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--lr", type=float, default=0.1)
    p.add_argument("--batch-size", type=int, default=32)
    p.set_defaults(fn=cmd_train)

    p = sub.add_parser("generate", help="emit mutated test files")
    p.add_argument("--store", required=True)
    p.add_argument("--checkpoint", help="model checkpoint (lstm suggester)")
    p.add_argument("--out", required=True)
    p.add_argument("--count", type=int, default=100)
    p.add_argument("--ktop", type=int, default=64)
    p.add_argument("--fmax", type=int, default=100)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--suggester", choices=("lstm", "markov", "random"),
                   default="lstm")
    p.add_argument("--builtins")
    p.add_argument("--resolve", dest="resolve", action="store_true", default=True)
    p.add_argument("--no-resolve", dest="resolve", action="store_false")
    p.set_defaults(fn=cmd_generate)

    p = sub.add_parser("fuzz", help="run a campaign from a config file")
    p.add_argument("--config", required=True)
    p.set_defaults(fn=cmd_fuzz)

    p = sub.add_parser("stats", help="summarize a campaign directory")
    p.add_argument("--campaign", required=True)
    p.set_defaults(fn=cmd_stats)

    p = sub.add_parser("replay", help="re-execute a stored crash")
    p.add_argument("--campaign", required=True)
    p.add_argument("--key", required=True)
    p.add_argument("--engine", required=True)
    p.add_argument("--engine-args", default="")
    p.add_argument("--timeout", type=float, default=5.0)
    p.set_defaults(fn=cmd_replay)
    return parser


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as e:
        return int(e.code or 0)
    try:
        return args.fn(args)
    except KeyboardInterrupt:
        return 130
    except Exception as e:  # runtime failure contract: report and exit 2
        print(f"error: {e}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
