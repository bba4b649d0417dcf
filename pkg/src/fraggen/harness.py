"""Execution harness: run tests against an engine, classify, dedup, campaign.

Only SIGSEGV and SIGILL terminations count as crashes; other signals are
treated as intentional aborts. Nonzero exits whose stderr names one of the
five standard runtime errors classify as runtime errors; exit zero is a
pass. Crash identity approximates faulting-instruction-pointer bucketing
with an optional backtrace extractor and a stderr-line hash fallback.
"""

from __future__ import annotations

import hashlib
import json
import random
import re
import signal
import subprocess
import tempfile
import threading
import time
from dataclasses import asdict, dataclass, field
from pathlib import Path
from typing import Callable, Sequence

from .estree import AstNode
from .fragments import Vocabulary
from .generate import GenerationParams, MutationFailure, mutate_ast
from .normalize import BuiltinRegistry
from .printer import print_program
from .resolver import resolve_references
from .suggest import Suggester


class EngineUnavailable(Exception):
    pass


STANDARD_ERRORS = ("SyntaxError", "TypeError", "RangeError", "ReferenceError",
                   "URIError")

CRASH_SIGNALS = frozenset({int(signal.SIGSEGV), int(signal.SIGILL)})

_STDERR_CAP = 64 * 1024


@dataclass
class EngineConfig:
    binary: str
    args: list[str] = field(default_factory=lambda: ["{test}"])
    timeout: float = 5.0
    env: dict[str, str] | None = None
    error_patterns: dict[str, str] | None = None  # error name -> regex override
    extractor: list[str] | None = None            # backtrace command template


@dataclass
class ExecutionOutcome:
    exit_code: int | None
    signal: int | None
    timed_out: bool
    stderr: str
    wall_time: float


@dataclass
class Classified:
    category: str            # pass | runtime_error | crash | timeout | other
    detail: str | None = None


@dataclass
class CrashRecord:
    key: str
    signal: int
    test_source: str
    seed_provenance: str
    first_seen: float
    hits: int = 1


def execute(cfg: EngineConfig, test_source: str) -> ExecutionOutcome:
    """Write the test to a scratch file and run the engine over it."""
    with tempfile.TemporaryDirectory(prefix="fraggen-exec-") as scratch:
        test_path = Path(scratch) / "test.js"
        test_path.write_text(test_source, encoding="utf-8")
        argv = [cfg.binary] + [a.replace("{test}", str(test_path)) for a in cfg.args]
        start = time.monotonic()
        try:
            proc = subprocess.run(argv, capture_output=True, timeout=cfg.timeout,
                                  env=cfg.env)
        except subprocess.TimeoutExpired as e:
            stderr = (e.stderr or b"")[:_STDERR_CAP].decode("utf-8", "replace")
            return ExecutionOutcome(None, None, True, stderr,
                                    time.monotonic() - start)
        except (FileNotFoundError, PermissionError, NotADirectoryError) as e:
            raise EngineUnavailable(str(e)) from None
        wall = time.monotonic() - start
        stderr = proc.stderr[:_STDERR_CAP].decode("utf-8", "replace")
        if proc.returncode is not None and proc.returncode < 0:
            return ExecutionOutcome(None, -proc.returncode, False, stderr, wall)
        return ExecutionOutcome(proc.returncode, None, False, stderr, wall)


def classify(outcome: ExecutionOutcome,
             error_patterns: dict[str, str] | None = None) -> Classified:
    """Total map from an outcome to exactly one of the five classes."""
    if outcome.timed_out:
        return Classified("timeout")
    if outcome.signal is not None:
        if outcome.signal in CRASH_SIGNALS:
            return Classified("crash", signal.Signals(outcome.signal).name)
        return Classified("other", f"signal:{outcome.signal}")
    if outcome.exit_code == 0:
        return Classified("pass")
    patterns = {name: rf"\b{name}\b" for name in STANDARD_ERRORS}
    if error_patterns:
        patterns.update(error_patterns)
    best: tuple[int, str] | None = None
    for name, pat in patterns.items():
        m = re.search(pat, outcome.stderr)
        if m and (best is None or m.start() < best[0]):
            best = (m.start(), name)
    if best is not None:
        return Classified("runtime_error", best[1])
    return Classified("other", f"exit:{outcome.exit_code}")


def dedup_key(outcome: ExecutionOutcome, extractor: list[str] | None = None,
              test_source: str | None = None) -> str:
    """Crash bucket identity: extractor top frame, else stderr-line hash."""
    sig = signal.Signals(outcome.signal).name
    if extractor and test_source is not None:
        try:
            with tempfile.TemporaryDirectory(prefix="fraggen-extract-") as scratch:
                test_path = Path(scratch) / "test.js"
                test_path.write_text(test_source, encoding="utf-8")
                argv = [a.replace("{test}", str(test_path)) for a in extractor]
                proc = subprocess.run(argv, capture_output=True, timeout=30)
            frame = proc.stdout.decode("utf-8", "replace").strip().splitlines()
            if proc.returncode == 0 and frame:
                return f"{sig}:{frame[0].strip()}"
        except (OSError, subprocess.SubprocessError):
            pass
    last = ""
    for line in reversed(outcome.stderr.splitlines()):
        if line.strip():
            last = line.strip()
            break
    digest = hashlib.blake2b(last.encode("utf-8"), digest_size=8).hexdigest()
    return f"{sig}:{digest}"


def pass_rate(cfg: EngineConfig, tests: Sequence[str]) -> float:
    if not tests:
        raise ValueError("pass_rate needs at least one test")
    passed = sum(1 for t in tests
                 if classify(execute(cfg, t), cfg.error_patterns).category == "pass")
    return passed / len(tests)


# --- campaign ---------------------------------------------------------------

@dataclass
class CampaignSettings:
    engine: EngineConfig
    seeds: list[tuple[str, AstNode]]
    suggester_factory: Callable[[], Suggester]
    params: GenerationParams
    vocab: Vocabulary
    builtins: BuiltinRegistry
    out_dir: Path
    resolve: bool = True
    workers: int = 1
    budget_tests: int | None = None
    budget_seconds: float | None = None
    rng_seed: int = 0
    max_attempts_per_test: int = 20


@dataclass
class CampaignStats:
    generated: int = 0
    executed: int = 0
    passed: int = 0
    runtime_errors: int = 0
    crashes: int = 0
    unique_crashes: int = 0
    timeouts: int = 0
    others: int = 0
    gen_failures: int = 0
    wall_time: float = 0.0
    aborted: bool = False

    def to_dict(self) -> dict:
        out = asdict(self)
        out["throughput"] = self.executed / self.wall_time if self.wall_time else 0.0
        return out


class CrashStore:
    """Dedup store with an atomic insert-if-absent contract."""

    def __init__(self, directory: Path):
        self.directory = directory
        self.records: dict[str, CrashRecord] = {}
        self._lock = threading.Lock()

    def insert_or_hit(self, key: str, make: Callable[[], CrashRecord],
                      stderr: str = "") -> bool:
        """True when the key was new; the record is persisted immediately."""
        with self._lock:
            existing = self.records.get(key)
            if existing is not None:
                existing.hits += 1
                return False
            record = make()
            self.records[key] = record
        self._persist(record, stderr)
        return True

    def _persist(self, record: CrashRecord, stderr: str) -> None:
        safe = record.key.replace("/", "_").replace(":", "_")
        d = self.directory / safe
        d.mkdir(parents=True, exist_ok=True)
        (d / "test.js").write_text(record.test_source, encoding="utf-8")
        (d / "stderr.txt").write_text(stderr, encoding="utf-8")
        (d / "meta.json").write_text(json.dumps({
            "key": record.key, "signal": record.signal,
            "seed_provenance": record.seed_provenance,
            "first_seen": record.first_seen}, indent=2), encoding="utf-8")

    def flush(self) -> None:
        with self._lock:
            for record in self.records.values():
                safe = record.key.replace("/", "_").replace(":", "_")
                meta = self.directory / safe / "meta.json"
                meta.write_text(json.dumps({
                    "key": record.key, "signal": record.signal,
                    "seed_provenance": record.seed_provenance,
                    "first_seen": record.first_seen,
                    "hits": record.hits}, indent=2), encoding="utf-8")


def _derive_rng(seed: int, index: int) -> random.Random:
    h = hashlib.blake2b(f"{seed}:{index}".encode(), digest_size=8)
    return random.Random(int.from_bytes(h.digest(), "big"))


def generate_one(settings: CampaignSettings, suggester: Suggester,
                 index: int) -> tuple[str, str, int] | None:
    """Deterministic test for a stream index, or None if generation failed.

    Returns (source, seed name, attempts used). The content depends only on
    (rng_seed, index), so worker count never changes the test stream.
    """
    rng = _derive_rng(settings.rng_seed, index)
    asts = [ast for _, ast in settings.seeds]
    for attempt in range(settings.max_attempts_per_test):
        result = mutate_ast(asts, suggester, settings.params, settings.vocab, rng)
        if isinstance(result, MutationFailure):
            continue
        ast = result.ast
        if settings.resolve:
            ast, _ = resolve_references(ast, settings.builtins, rng)
        try:
            source = print_program(ast)
        except Exception:
            continue
        return source, settings.seeds[result.seed_index][0], attempt + 1
    return None


def run_campaign(settings: CampaignSettings) -> CampaignStats:
    """Generate-execute-classify loop across N workers with shared dedup."""
    out_dir = Path(settings.out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    store = CrashStore(out_dir / "crashes")
    stats = CampaignStats()
    stats_lock = threading.Lock()
    events_lock = threading.Lock()
    events_path = out_dir / "events.jsonl"
    events_fh = open(events_path, "w", encoding="utf-8")
    stop = threading.Event()
    index_counter = [0]
    executed_counter = [0]
    start_time = time.monotonic()
    abort_error: list[Exception] = []

    def next_index() -> int | None:
        with stats_lock:
            if settings.budget_tests is not None \
                    and executed_counter[0] >= settings.budget_tests:
                return None
            i = index_counter[0]
            index_counter[0] += 1
            return i

    def over_time() -> bool:
        return (settings.budget_seconds is not None
                and time.monotonic() - start_time >= settings.budget_seconds)

    def reserve_execution() -> bool:
        with stats_lock:
            if settings.budget_tests is not None \
                    and executed_counter[0] >= settings.budget_tests:
                return False
            executed_counter[0] += 1
            return True

    def worker(worker_id: int) -> None:
        suggester = settings.suggester_factory()
        while not stop.is_set() and not over_time():
            index = next_index()
            if index is None:
                return
            made = generate_one(settings, suggester, index)
            if made is None:
                with stats_lock:
                    stats.gen_failures += 1
                continue
            source, seed_name, _ = made
            with stats_lock:
                stats.generated += 1
            if not reserve_execution():
                return
            try:
                outcome = execute(settings.engine, source)
            except EngineUnavailable as e:
                abort_error.append(e)
                stop.set()
                return
            cls = classify(outcome, settings.engine.error_patterns)
            event = {"index": index, "worker": worker_id, "seed": seed_name,
                     "category": cls.category, "detail": cls.detail,
                     "wall": round(outcome.wall_time, 4)}
            with stats_lock:
                stats.executed += 1
                if cls.category == "pass":
                    stats.passed += 1
                elif cls.category == "runtime_error":
                    stats.runtime_errors += 1
                elif cls.category == "timeout":
                    stats.timeouts += 1
                elif cls.category == "other":
                    stats.others += 1
                elif cls.category == "crash":
                    stats.crashes += 1
            if cls.category == "crash":
                key = dedup_key(outcome, settings.engine.extractor, source)
                fresh = store.insert_or_hit(key, lambda: CrashRecord(
                    key=key, signal=outcome.signal, test_source=source,
                    seed_provenance=seed_name, first_seen=time.time()),
                    stderr=outcome.stderr)
                event["crash_key"] = key
                if fresh:
                    with stats_lock:
                        stats.unique_crashes += 1
            with events_lock:
                events_fh.write(json.dumps(event) + "\n")

    threads = [threading.Thread(target=worker, args=(w,), daemon=True)
               for w in range(max(1, settings.workers))]
    try:
        for t in threads:
            t.start()
        for t in threads:
            t.join()
    except KeyboardInterrupt:
        stop.set()
        for t in threads:
            t.join()
        stats.aborted = True
    finally:
        stats.wall_time = time.monotonic() - start_time
        store.flush()
        events_fh.close()
        (out_dir / "stats.json").write_text(
            json.dumps(stats.to_dict(), indent=2), encoding="utf-8")
    if abort_error:
        stats.aborted = True
        (out_dir / "stats.json").write_text(
            json.dumps(stats.to_dict(), indent=2), encoding="utf-8")
        raise abort_error[0]
    return stats
