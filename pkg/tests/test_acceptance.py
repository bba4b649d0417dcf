"""Acceptance criteria, one test per criterion, each printing a verdict line.

Verdict lines bypass pytest capture so they appear in any run mode.
Criterion 9 needs a real engine binary (node on PATH) and is skipped
otherwise; criterion 11 needs the built parser adapter.
"""

import math
import random
import shutil
import time

import numpy as np
import pytest

import conftest
from conftest import OVERFIT_HP, count_occupied_nodes
from fraggen import corpus, nnlm
from fraggen.adapter import ParserAdapter
from fraggen.cli import main as cli_main
from fraggen.fragments import EncodedSequence, build_vocabulary, fragmentize, reassemble
from fraggen.generate import GenerationParams, MutationFailure, mutate_ast
from fraggen.harness import EngineConfig, classify, dedup_key, execute
from fraggen.normalize import normalize
from fraggen.printer import print_program
from fraggen.resolver import resolve_references, scan_undeclared
from fraggen.suggest import LstmSuggester


def report(number: int, name: str, started: float, budget: float) -> float:
    elapsed = time.monotonic() - started
    line = f"ACCEPTANCE {number:02d} {name}: PASS ({elapsed:.1f}s, budget {budget:.0f}s)"
    print("\n" + line)
    conftest.ACCEPTANCE_LINES.append(line)  # echoed in the terminal summary
    return elapsed


def test_01_fragment_round_trip(builtins):
    started = time.monotonic()
    programs = corpus.fixture_corpus(1000, seed=11) + corpus.kitchen_sink_programs()
    assert len(programs) >= 1000
    for name, ast in programs:
        normalized, _ = normalize(ast, builtins)
        assert reassemble(fragmentize(normalized)) == normalized, name
    elapsed = report(1, "fragment round-trip on 1000+ fixtures", started, 60)
    assert elapsed < 60


def test_02_fragment_count_oracle(builtins):
    started = time.monotonic()
    for name, ast in corpus.fixture_corpus(100, seed=13):
        normalized, _ = normalize(ast, builtins)
        assert len(fragmentize(normalized)) == count_occupied_nodes(normalized), name
    elapsed = report(2, "fragment count equals occupied-node count", started, 10)
    assert elapsed < 10


def test_03_gradient_check(builtins):
    started = time.monotonic()
    seqs = [fragmentize(normalize(corpus.fig1_program(), builtins)[0], "a"),
            fragmentize(normalize(corpus.toy_corpus()[0][1], builtins)[0], "b")]
    vocab, encoded = build_vocabulary(seqs * 3, min_freq=2)
    sample = [EncodedSequence(encoded[0].ids[:7], encoded[0].parents[:6], "s"),
              EncodedSequence(encoded[1].ids[:5], encoded[1].parents[:4], "t")]
    for seed in range(10):
        hp = nnlm.Hyperparams(embed_dim=6, hidden_dim=6, type_embed_dim=3,
                              rng_seed=100 + seed)
        model = nnlm.init_model(hp, vocab)
        # The top-n sum in the type error is piecewise linear; a near-uniform
        # output ties at the selection boundary where finite differences
        # straddle a kink. Spreading the logits keeps every evaluation point
        # inside a smooth region without touching the checker itself.
        model.params["out_w"] *= 50.0
        model.params["out_b"] *= 50.0
        err = nnlm.check_gradients(model, sample, vocab)
        assert err < 1e-4, (seed, err)
    elapsed = report(3, "analytic vs finite-difference gradients", started, 60)
    assert elapsed < 60


def test_04_loss_bounds(toy):
    started = time.monotonic()
    vocab = toy.vocab
    v = len(vocab)
    ids = vocab.non_reserved_ids()
    rng = np.random.default_rng(42)
    for i in range(10_000):
        dist = rng.dirichlet(np.full(v, 0.25))
        out = nnlm.loss(dist, int(ids[i % len(ids)]), vocab)
        assert out.l1 >= 0.0
        assert 0.0 <= out.l2 <= 1.0
    uniform = np.full(v, 1.0 / v)
    out = nnlm.loss(uniform, int(ids[0]), vocab)
    assert abs(out.l1 - math.log(v)) <= 1e-6
    assert abs(out.l2) <= 1e-6
    elapsed = report(4, "loss bounds on 10k random distributions", started, 10)
    assert elapsed < 10


def test_05_overfit_training(toy, overfit):
    started = time.monotonic()
    model, history = overfit
    assert model.hp == OVERFIT_HP and OVERFIT_HP.epochs == 200
    assert len(toy.encoded) == 20
    accuracy = nnlm.top1_accuracy(model, toy.encoded, toy.vocab)
    ppl = nnlm.perplexity(model, toy.encoded, toy.vocab)
    terr = nnlm.type_error(model, toy.encoded, toy.vocab)
    first = history[0][0] + history[0][1]
    last = history[-1][0] + history[-1][1]
    assert accuracy >= 0.95, accuracy
    assert ppl <= 1.5, ppl
    assert terr <= 0.05, terr
    assert last < 0.25 * first, (first, last)
    print(f"\n  top-1 {accuracy:.3f} perplexity {ppl:.3f} type-error {terr:.4f} "
          f"loss {first:.3f} -> {last:.3f}")
    elapsed = report(5, "overfit training on the 20-file toy corpus", started, 600)
    assert elapsed < 600


def test_06_generation_fidelity(toy, overfit):
    started = time.monotonic()
    model, _ = overfit
    suggester = LstmSuggester(model, toy.vocab)
    params = GenerationParams(f_max=100, k_top=1)
    rng = random.Random(2024)
    trials = 200
    exact = 0
    for _ in range(trials):
        out = mutate_ast(toy.seeds, suggester, params, toy.vocab, rng)
        if isinstance(out, MutationFailure):
            continue
        for need, got in out.appended_kinds:
            assert need == got
        assert len(out.appended_ids) <= params.f_max
        if out.ast == toy.seeds[out.seed_index]:
            exact += 1
    assert exact / trials >= 0.80, exact
    print(f"\n  reproduced {exact}/{trials} removal points exactly")
    elapsed = report(6, "generation fidelity at k_top=1", started, 120)
    assert elapsed < 120


def test_07_resolver_soundness(toy, overfit, builtins):
    started = time.monotonic()
    model, _ = overfit
    suggester = LstmSuggester(model, toy.vocab)
    params = GenerationParams(f_max=100, k_top=8)
    rng = random.Random(777)
    produced = 0
    attempts = 0
    while produced < 1000 and attempts < 20_000:
        attempts += 1
        out = mutate_ast(toy.seeds, suggester, params, toy.vocab, rng)
        if isinstance(out, MutationFailure):
            continue
        resolved, _ = resolve_references(out.ast, builtins, rng)
        assert scan_undeclared(resolved, builtins) == []
        again, second_report = resolve_references(resolved, builtins,
                                                  random.Random(0))
        assert again == resolved
        assert second_report == []
        produced += 1
    assert produced == 1000
    elapsed = report(7, "resolver soundness over 1000 generated tests", started, 60)
    assert elapsed < 60


def test_08_harness_stub_engines(stub_engines):
    started = time.monotonic()
    crash = execute(stub_engines["segv"], ";")
    assert classify(crash).category == "crash"
    assert classify(crash).detail == "SIGSEGV"
    keys = {dedup_key(execute(stub_engines["segv"], ";")) for _ in range(100)}
    assert len(keys) == 1
    abrt = execute(stub_engines["abrt"], ";")
    assert classify(abrt).category == "other"
    sleeper = EngineConfig(binary=stub_engines["sleeper"].binary,
                           args=stub_engines["sleeper"].args, timeout=1.0)
    t0 = time.monotonic()
    out = execute(sleeper, ";")
    assert out.timed_out and classify(out).category == "timeout"
    assert time.monotonic() - t0 <= sleeper.timeout + 1.0
    elapsed = report(8, "harness classification and dedup with stubs", started, 60)
    assert elapsed < 60


@pytest.fixture(scope="module")
def engine_model(builtins):
    """A model trained on a broader corpus for the real-engine arms."""
    programs = [ast for _, ast in corpus.fixture_corpus(300, seed=5)]
    normalized = [normalize(p, builtins)[0] for p in programs]
    sequences = [fragmentize(a, provenance=str(i))
                 for i, a in enumerate(normalized)]
    vocab, encoded = build_vocabulary(sequences)
    hp = nnlm.Hyperparams(rng_seed=5, epochs=50, batch_size=8,
                          learning_rate=0.3, lr_decay=0.99)
    model = nnlm.init_model(hp, vocab)
    nnlm.train(model, encoded, vocab)
    seeds = [a for a in normalized if len(fragmentize(a)) >= 2]
    return model, vocab, seeds


def _arm_pass_rate(engine, model, vocab, seeds, builtins, k_top, resolve,
                   n_tests, seed):
    suggester = LstmSuggester(model, vocab)
    params = GenerationParams(f_max=100, k_top=k_top)
    rng = random.Random(seed)
    passed = 0
    executed = 0
    attempts = 0
    while executed < n_tests and attempts < n_tests * 40:
        attempts += 1
        out = mutate_ast(seeds, suggester, params, vocab, rng)
        if isinstance(out, MutationFailure):
            continue
        ast = out.ast
        if resolve:
            ast, _ = resolve_references(ast, builtins, rng)
        try:
            source = print_program(ast)
        except Exception:
            continue
        if classify(execute(engine, source)).category == "pass":
            passed += 1
        executed += 1
    assert executed == n_tests
    return passed / executed


@pytest.mark.skipif(shutil.which("node") is None,
                    reason="criterion 9 needs a real engine binary")
def test_09_directional_replications(engine_model, builtins):
    started = time.monotonic()
    engine = EngineConfig(binary=shutil.which("node"), timeout=3.0)
    model, vocab, seeds = engine_model
    n = 500
    arm_started = time.monotonic()
    rate_k1 = _arm_pass_rate(engine, model, vocab, seeds, builtins, 1, True, n, 1)
    arm1 = time.monotonic() - arm_started
    arm_started = time.monotonic()
    rate_k64 = _arm_pass_rate(engine, model, vocab, seeds, builtins, 64, True, n, 2)
    arm2 = time.monotonic() - arm_started
    arm_started = time.monotonic()
    rate_off = _arm_pass_rate(engine, model, vocab, seeds, builtins, 64, False, n, 2)
    arm3 = time.monotonic() - arm_started
    print(f"\n  pass rates: k1 {rate_k1:.3f}, k64 {rate_k64:.3f}, "
          f"k64 without resolver {rate_off:.3f}")
    assert rate_k1 > rate_k64
    assert rate_k64 - rate_off >= 0.05
    assert max(arm1, arm2, arm3) < 1800
    report(9, "directional pass-rate replications on a real engine", started, 5400)


def test_10_determinism(tmp_path, toy):
    started = time.monotonic()
    fixtures = tmp_path / "fixtures"
    corpus.write_fixtures(fixtures, corpus.toy_corpus())
    store = tmp_path / "store"
    assert cli_main(["ingest", "--fixtures", str(fixtures),
                     "--out", str(store)]) == 0
    ckpts = []
    for i in range(2):
        path = tmp_path / f"m{i}.ckpt"
        assert cli_main(["train", "--store", str(store), "--out", str(path),
                         "--epochs", "25", "--seed", "99", "--lr", "0.3",
                         "--batch-size", "2"]) == 0
        ckpts.append(path.read_bytes())
    assert ckpts[0] == ckpts[1]
    streams = []
    for i in range(2):
        out = tmp_path / f"g{i}"
        assert cli_main(["generate", "--store", str(store),
                         "--checkpoint", str(tmp_path / "m0.ckpt"),
                         "--out", str(out), "--count", "12", "--ktop", "4",
                         "--seed", "31"]) == 0
        streams.append(sorted((f.name, f.read_text()) for f in out.glob("*.js")))
    assert streams[0] == streams[1] and len(streams[0]) == 12
    elapsed = report(10, "train and generate reruns are bit-identical", started, 300)
    assert elapsed < 300


def test_11_adapter_round_trip(adapter_command, fixture_asts):
    started = time.monotonic()
    with ParserAdapter(adapter_command) as adapter:
        for name, ast in fixture_asts:
            first = adapter.parse(print_program(ast))
            printed = adapter.print(first)
            assert adapter.parse(printed) == first, name
        for i in range(1000):
            reply = adapter.send_raw(f"malformed #{i} }}{{")
            assert reply["ok"] is False
        assert adapter.parse(";").kind.name == "Program"
    elapsed = report(11, "adapter fixpoint and protocol robustness", started, 60)
    assert elapsed < 60
