"""Engine execution, outcome classification, dedup, and campaigns."""

import json
import signal
import time
from collections import Counter

import pytest

from fraggen.generate import GenerationParams
from fraggen.normalize import BuiltinRegistry
from fraggen.harness import (
    CampaignSettings,
    EngineConfig,
    EngineUnavailable,
    ExecutionOutcome,
    classify,
    dedup_key,
    execute,
    pass_rate,
    run_campaign,
)
from fraggen.suggest import LstmSuggester


def test_exit_zero(stub_engines):
    out = execute(stub_engines["exit0"], ";")
    assert out.exit_code == 0 and out.signal is None and not out.timed_out
    assert classify(out).category == "pass"


def test_segv_signal(stub_engines):
    out = execute(stub_engines["segv"], ";")
    assert out.signal == int(signal.SIGSEGV)
    cls = classify(out)
    assert cls.category == "crash" and cls.detail == "SIGSEGV"


def test_sigabrt_is_other(stub_engines):
    out = execute(stub_engines["abrt"], ";")
    assert out.signal == int(signal.SIGABRT)
    assert classify(out).category == "other"


def test_timeout_within_bound(stub_engines):
    cfg = EngineConfig(binary=stub_engines["sleeper"].binary,
                       args=stub_engines["sleeper"].args, timeout=1.0)
    start = time.monotonic()
    out = execute(cfg, ";")
    elapsed = time.monotonic() - start
    assert out.timed_out
    assert elapsed <= cfg.timeout + 1.0
    assert classify(out).category == "timeout"


def test_runtime_error_pattern(stub_engines):
    out = execute(stub_engines["typeerror"], ";")
    assert out.exit_code == 3
    cls = classify(out)
    assert cls.category == "runtime_error" and cls.detail == "TypeError"


def test_classify_totality():
    cases = [
        ExecutionOutcome(0, None, False, "", 0.0),
        ExecutionOutcome(1, None, False, "ReferenceError: nope", 0.0),
        ExecutionOutcome(1, None, False, "mystery failure", 0.0),
        ExecutionOutcome(None, int(signal.SIGSEGV), False, "", 0.0),
        ExecutionOutcome(None, int(signal.SIGILL), False, "", 0.0),
        ExecutionOutcome(None, int(signal.SIGABRT), False, "", 0.0),
        ExecutionOutcome(None, None, True, "", 0.0),
    ]
    got = [classify(o).category for o in cases]
    assert got == ["pass", "runtime_error", "other", "crash", "crash",
                   "other", "timeout"]


def test_engine_unavailable():
    with pytest.raises(EngineUnavailable):
        execute(EngineConfig(binary="/nonexistent/engine-binary"), ";")


def test_dedup_key_stable(stub_engines):
    a = execute(stub_engines["segv"], ";")
    b = execute(stub_engines["segv"], ";")
    assert dedup_key(a) == dedup_key(b)


def test_dedup_key_distinct_frames(stub_engines):
    plain = execute(stub_engines["segv"], ";")
    alt = execute(stub_engines["segv_alt"], ";")
    assert plain.signal == alt.signal
    assert dedup_key(plain) != dedup_key(alt)


def test_dedup_key_extractor(stub_engines, tmp_path):
    out = execute(stub_engines["segv"], ";")
    import sys
    frame_tool = tmp_path / "frames.py"
    frame_tool.write_text("print('top_frame_0xdead')\n", encoding="utf-8")
    key = dedup_key(out, [sys.executable, str(frame_tool), "{test}"], ";")
    assert key == "SIGSEGV:top_frame_0xdead"
    broken_tool = [sys.executable, str(tmp_path / "missing.py"), "{test}"]
    assert dedup_key(out, broken_tool, ";") == dedup_key(out)


def test_pass_rate_bounds(stub_engines):
    assert pass_rate(stub_engines["exit0"], [";", ";"]) == 1.0
    assert pass_rate(stub_engines["typeerror"], [";", ";"]) == 0.0


def test_pass_rate_real_engine(node_engine):
    assert pass_rate(node_engine, [";"] * 3) == 1.0
    assert pass_rate(node_engine, ["v9.q.q;"] * 3) == 0.0


def _campaign_settings(toy, overfit, engine, out_dir, budget, workers=1, seed=0):
    model, _ = overfit
    return CampaignSettings(
        engine=engine,
        seeds=[(f"seed_{i}", ast) for i, ast in enumerate(toy.seeds)],
        suggester_factory=lambda: LstmSuggester(model, toy.vocab),
        params=GenerationParams(f_max=100, k_top=4),
        vocab=toy.vocab,
        builtins=BuiltinRegistry.default(),
        out_dir=out_dir,
        resolve=True,
        workers=workers,
        budget_tests=budget,
        rng_seed=seed,
    )


def test_campaign_crash_stub(tmp_path, toy, overfit, stub_engines):
    settings = _campaign_settings(toy, overfit, stub_engines["segv"],
                                  tmp_path / "c1", budget=100)
    stats = run_campaign(settings)
    assert stats.executed == 100
    assert stats.crashes == 100
    assert stats.unique_crashes == 1
    crash_dirs = list((tmp_path / "c1" / "crashes").iterdir())
    assert len(crash_dirs) == 1
    meta = json.loads((crash_dirs[0] / "meta.json").read_text())
    assert meta["hits"] == 100
    assert (crash_dirs[0] / "test.js").exists()
    stats_file = json.loads((tmp_path / "c1" / "stats.json").read_text())
    assert stats_file["unique_crashes"] == 1
    events = (tmp_path / "c1" / "events.jsonl").read_text().splitlines()
    assert len(events) == 100


def test_campaign_deterministic_stream(tmp_path, toy, overfit, stub_engines):
    runs = []
    for i in range(2):
        settings = _campaign_settings(toy, overfit, stub_engines["exit0"],
                                      tmp_path / f"d{i}", budget=20, seed=9)
        run_campaign(settings)
        events = [json.loads(line) for line in
                  (tmp_path / f"d{i}" / "events.jsonl").read_text().splitlines()]
        runs.append(sorted((e["index"], e["seed"], e["category"]) for e in events))
    assert runs[0] == runs[1]


def test_campaign_worker_count_invariant(tmp_path, toy, overfit, stub_engines):
    """Same outcome-class multiset for 1 and 3 workers (same test stream)."""
    outcomes = []
    for i, workers in enumerate((1, 3)):
        settings = _campaign_settings(toy, overfit, stub_engines["exit0"],
                                      tmp_path / f"w{i}", budget=24, seed=4,
                                      workers=workers)
        run_campaign(settings)
        events = [json.loads(line) for line in
                  (tmp_path / f"w{i}" / "events.jsonl").read_text().splitlines()]
        outcomes.append(Counter((e["index"], e["category"]) for e in events))
    assert outcomes[0] == outcomes[1]


def test_campaign_engine_unavailable(tmp_path, toy, overfit):
    settings = _campaign_settings(toy, overfit,
                                  EngineConfig(binary="/nonexistent/engine"),
                                  tmp_path / "broken", budget=5)
    with pytest.raises(EngineUnavailable):
        run_campaign(settings)
    assert (tmp_path / "broken" / "stats.json").exists()
