#!/usr/bin/env python3
"""Desk-scale pass-rate experiments against a real engine.

Arm A: pass rate at k_top = 1 vs k_top = 64 (suggestion-breadth trend).
Arm B: pass rate with and without reference-error resolution at k_top = 64.

Trains a model on a synthetic corpus, generates N tests per arm, executes
each under the engine (node by default), and prints one line per arm.

Usage: python scripts/passrate_experiment.py --engine node --tests 500
"""

import argparse
import random
import sys
import time
from pathlib import Path

sys.path.insert(0, str(Path(__file__).resolve().parents[1] / "src"))

from fraggen import corpus, nnlm  # noqa: E402
from fraggen.fragments import build_vocabulary, fragmentize  # noqa: E402
from fraggen.generate import GenerationParams, MutationFailure, mutate_ast  # noqa: E402
from fraggen.harness import EngineConfig, classify, execute  # noqa: E402
from fraggen.normalize import BuiltinRegistry, normalize  # noqa: E402
from fraggen.printer import print_program  # noqa: E402
from fraggen.resolver import resolve_references  # noqa: E402
from fraggen.suggest import LstmSuggester  # noqa: E402


def build_model(n_files: int, epochs: int, seed: int):
    builtins = BuiltinRegistry.default()
    programs = [ast for _, ast in corpus.fixture_corpus(n_files, seed=seed)]
    normalized = [normalize(p, builtins)[0] for p in programs]
    sequences = [fragmentize(a, provenance=str(i)) for i, a in enumerate(normalized)]
    vocab, encoded = build_vocabulary(sequences)
    hp = nnlm.Hyperparams(rng_seed=seed, epochs=epochs, batch_size=8,
                          learning_rate=0.3, lr_decay=0.99)
    model = nnlm.init_model(hp, vocab)
    nnlm.train(model, encoded, vocab)
    seeds = [a for a in normalized if len(fragmentize(a)) >= 2]
    return model, vocab, seeds, builtins


def run_arm(label, model, vocab, seeds, builtins, engine, k_top, resolve,
            n_tests, seed):
    suggester = LstmSuggester(model, vocab)
    params = GenerationParams(f_max=100, k_top=k_top)
    rng = random.Random(seed)
    passed = 0
    executed = 0
    attempts = 0
    start = time.monotonic()
    while executed < n_tests and attempts < n_tests * 40:
        attempts += 1
        result = mutate_ast(seeds, suggester, params, vocab, rng)
        if isinstance(result, MutationFailure):
            continue
        ast = result.ast
        if resolve:
            ast, _ = resolve_references(ast, builtins, rng)
        try:
            source = print_program(ast)
        except Exception:
            continue
        outcome = execute(engine, source)
        executed += 1
        if classify(outcome).category == "pass":
            passed += 1
    rate = passed / executed if executed else 0.0
    print(f"{label}: pass rate {rate:.4f} ({passed}/{executed}), "
          f"{time.monotonic() - start:.0f}s")
    return rate


def main() -> int:
    ap = argparse.ArgumentParser()
    ap.add_argument("--engine", default="node")
    ap.add_argument("--tests", type=int, default=500)
    ap.add_argument("--corpus", type=int, default=300)
    ap.add_argument("--epochs", type=int, default=60)
    ap.add_argument("--timeout", type=float, default=3.0)
    ap.add_argument("--seed", type=int, default=0)
    args = ap.parse_args()

    engine = EngineConfig(binary=args.engine, timeout=args.timeout)
    print(f"training on {args.corpus} files, {args.epochs} epochs ...")
    model, vocab, seeds, builtins = build_model(args.corpus, args.epochs, args.seed)
    print(f"vocabulary {len(vocab)} entries, {len(seeds)} seeds")

    r_k1 = run_arm("k_top=1  resolver=on ", model, vocab, seeds, builtins,
                   engine, 1, True, args.tests, args.seed)
    r_k64 = run_arm("k_top=64 resolver=on ", model, vocab, seeds, builtins,
                    engine, 64, True, args.tests, args.seed + 1)
    r_off = run_arm("k_top=64 resolver=off", model, vocab, seeds, builtins,
                    engine, 64, False, args.tests, args.seed + 1)

    print(f"\nk_top trend holds: {r_k1 > r_k64}")
    print(f"resolver gain: {100 * (r_k64 - r_off):+.1f} points")
    return 0


if __name__ == "__main__":
    sys.exit(main())
