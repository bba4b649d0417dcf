"""Shared fixtures: corpora, the session overfit model, engines, stubs."""

from __future__ import annotations

import shutil
import sys
import textwrap

import pytest

from fraggen import adapter as adapter_mod
from fraggen import corpus, nnlm
from fraggen.fragments import build_vocabulary, fragmentize
from fraggen.harness import EngineConfig
from fraggen.normalize import BuiltinRegistry, normalize


ACCEPTANCE_LINES: list[str] = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)


@pytest.fixture(scope="session")
def builtins() -> BuiltinRegistry:
    return BuiltinRegistry.default()


@pytest.fixture(scope="session")
def fixture_asts(builtins):
    """Named, normalized fixture ASTs used across module tests."""
    programs = corpus.fixture_corpus(120, seed=1) + corpus.kitchen_sink_programs()
    return [(name, normalize(ast, builtins)[0]) for name, ast in programs]


@pytest.fixture(scope="session")
def raw_fixture_asts():
    """Fixture ASTs before normalization (original identifier names)."""
    return corpus.fixture_corpus(60, seed=3) + corpus.kitchen_sink_programs()


class ToyBundle:
    def __init__(self, builtins):
        files = corpus.toy_corpus()
        self.normalized = [(name, normalize(ast, builtins)[0]) for name, ast in files]
        self.sequences = [fragmentize(ast, provenance=name)
                          for name, ast in self.normalized]
        self.vocab, self.encoded = build_vocabulary(self.sequences)
        # one seed per structural family (files are 5 copies of each of 4)
        self.seeds = [self.normalized[i * 5][1] for i in range(4)]


@pytest.fixture(scope="session")
def toy(builtins) -> ToyBundle:
    return ToyBundle(builtins)


OVERFIT_HP = nnlm.Hyperparams(rng_seed=7, epochs=200, batch_size=2,
                              learning_rate=0.3, lr_decay=0.99)


@pytest.fixture(scope="session")
def overfit(toy):
    """Model trained to memorize the toy corpus; shared across tests."""
    model = nnlm.init_model(OVERFIT_HP, toy.vocab)
    history = nnlm.train(model, toy.encoded, toy.vocab)
    return model, history


def node_available() -> bool:
    return shutil.which("node") is not None


@pytest.fixture(scope="session")
def node_engine():
    if not node_available():
        pytest.skip("no node binary on PATH")
    return EngineConfig(binary=shutil.which("node"), timeout=5.0)


_STUBS = {
    "exit0": "import sys\nsys.exit(0)\n",
    "segv": "import os, signal\nos.kill(os.getpid(), signal.SIGSEGV)\n",
    "segv_alt": ("import os, signal, sys\n"
                 "print('fault at frame_beta', file=sys.stderr)\n"
                 "os.kill(os.getpid(), signal.SIGSEGV)\n"),
    "abrt": "import os, signal\nos.kill(os.getpid(), signal.SIGABRT)\n",
    "sleeper": "import time\ntime.sleep(30)\n",
    "typeerror": ("import sys\n"
                  "print('TypeError: v0 is not a function', file=sys.stderr)\n"
                  "sys.exit(3)\n"),
}


@pytest.fixture(scope="session")
def stub_engines(tmp_path_factory):
    """Engine configs backed by tiny python test doubles."""
    d = tmp_path_factory.mktemp("stubs")
    configs = {}
    for name, body in _STUBS.items():
        path = d / f"{name}.py"
        path.write_text(textwrap.dedent(body), encoding="utf-8")
        configs[name] = EngineConfig(binary=sys.executable,
                                     args=[str(path), "{test}"], timeout=5.0)
    return configs


@pytest.fixture(scope="session")
def adapter_command():
    cmd = adapter_mod.default_command()
    if cmd is None:
        pytest.skip("parser adapter not built (frontend/dist/server.js missing)")
    return cmd


def count_occupied_nodes(ast) -> int:
    """Independent oracle: nodes with at least one non-absent slot."""
    from fraggen.estree import ABSENT, AstNode

    total = 0
    stack = [ast]
    while stack:
        n = stack.pop()
        if any(v is not ABSENT for v in n.slots):
            total += 1
        for v in n.slots:
            if isinstance(v, AstNode):
                stack.append(v)
            elif isinstance(v, tuple):
                stack.extend(x for x in v if isinstance(x, AstNode))
    return total
