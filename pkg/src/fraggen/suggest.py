"""Next-fragment suggestion strategies.

Three interchangeable strategies sit behind one `suggest` interface: the
trained LSTM, an order-2 Markov chain with 2->1->0 backoff, and uniform
random selection. Reserved ids (BOS, typed OoV) are never suggested; type
filtering is the generator's job.
"""

from __future__ import annotations

import json
import random
from collections import Counter, defaultdict
from dataclasses import dataclass
from pathlib import Path
from typing import Protocol, Sequence

import numpy as np

from . import nnlm
from .fragments import EncodedSequence, Vocabulary


@dataclass(frozen=True)
class Suggestion:
    fragment_id: int
    score: float


class Suggester(Protocol):
    def suggest(self, context: Sequence[int], next_type: str, parent: int,
                k: int) -> list[Suggestion]:
        ...


class LstmSuggester:
    """Top-k of the model's next-fragment distribution.

    Keeps the LSTM state of the previous query so the generator's
    append-one-id-at-a-time contexts cost one step each, not a full replay.
    Not thread-safe; give each worker its own instance.
    """

    def __init__(self, model: nnlm.Model, vocab: Vocabulary):
        self.model = model
        self.vocab = vocab
        self._reserved = np.array([vocab.is_reserved(i) for i in range(len(vocab))])
        self._cache: tuple[tuple[int, ...], np.ndarray, np.ndarray] | None = None

    def _state_for(self, context: Sequence[int]) -> tuple[np.ndarray, np.ndarray]:
        ctx = tuple(context)
        start = 0
        h, c = nnlm.init_state(self.model)
        if self._cache is not None:
            prev, ph, pc = self._cache
            if len(prev) <= len(ctx) and ctx[:len(prev)] == prev:
                start, h, c = len(prev), ph, pc
        for fid in ctx[start:]:
            h, c = nnlm.step_state(self.model, h, c, fid)
        self._cache = (ctx, h, c)
        return h, c

    def suggest(self, context, next_type, parent, k):
        h, c = self._state_for(context)
        probs = nnlm.predict(self.model, h, c, next_type, parent).copy()
        probs[self._reserved] = -1.0
        order = np.lexsort((np.arange(len(probs)), -probs))
        out = []
        for fid in order[:k]:
            if probs[fid] < 0:
                break
            out.append(Suggestion(int(fid), float(probs[fid])))
        return out


class MarkovSuggester:
    """Order-2 chain over encoded ids with explicit 2 -> 1 -> 0 backoff.

    Counting pads every sequence with a second BOS so each position has a
    full pair context; the lower orders are exact marginals of the pairs,
    which is what makes the pair-only persistence lossless.
    """

    def __init__(self, vocab: Vocabulary):
        self.vocab = vocab
        self.pair_counts: dict[tuple[int, int], Counter] = defaultdict(Counter)
        self._one: dict[int, Counter] = {}
        self._zero: Counter = Counter()

    @classmethod
    def train(cls, sequences: list[EncodedSequence], vocab: Vocabulary) -> "MarkovSuggester":
        self = cls(vocab)
        bos = vocab.bos_id
        for seq in sequences:
            ids = [bos] + list(seq.ids)
            for t in range(2, len(ids)):
                self.pair_counts[(ids[t - 2], ids[t - 1])][ids[t]] += 1
        self._finalize()
        return self

    def _finalize(self) -> None:
        self._one = defaultdict(Counter)
        self._zero = Counter()
        for (a, b), cont in self.pair_counts.items():
            self._one[b].update(cont)
            self._zero.update(cont)

    def distribution(self, context: Sequence[int]) -> dict[int, float]:
        """Observed-continuation probabilities; sums to 1 when nonempty."""
        ctx = [self.vocab.bos_id] * max(0, 2 - len(context)) + list(context)
        counts = self.pair_counts.get((ctx[-2], ctx[-1]))
        if not counts:
            counts = self._one.get(ctx[-1])
        if not counts:
            counts = self._zero
        if not counts:
            return {}
        total = sum(counts.values())
        return {fid: n / total for fid, n in counts.items()}

    def suggest(self, context, next_type, parent, k):
        dist = self.distribution(context)
        ranked = sorted(dist.items(), key=lambda kv: (-kv[1], kv[0]))
        out = []
        for fid, p in ranked:
            if self.vocab.is_reserved(fid):
                continue
            out.append(Suggestion(fid, p))
            if len(out) == k:
                break
        return out

    def save(self, path: str | Path) -> None:
        with open(path, "w", encoding="utf-8") as fh:
            for (a, b), cont in sorted(self.pair_counts.items()):
                for fid, n in sorted(cont.items()):
                    fh.write(json.dumps({"ctx": [a, b], "next": fid, "n": n}) + "\n")

    @classmethod
    def load(cls, path: str | Path, vocab: Vocabulary) -> "MarkovSuggester":
        self = cls(vocab)
        with open(path, encoding="utf-8") as fh:
            for line in fh:
                row = json.loads(line)
                a, b = row["ctx"]
                self.pair_counts[(a, b)][row["next"]] += row["n"]
        self._finalize()
        return self


class RandomSuggester:
    """Uniform sample of non-reserved ids, without replacement."""

    def __init__(self, vocab: Vocabulary, seed: int = 0):
        self.vocab = vocab
        self.rng = random.Random(seed)
        self._pool = vocab.non_reserved_ids()

    def suggest(self, context, next_type, parent, k):
        chosen = self.rng.sample(self._pool, min(k, len(self._pool)))
        score = 1.0 / len(self._pool)
        return [Suggestion(fid, score) for fid in chosen]


def suggest(strategy: Suggester, context: Sequence[int], required_type: str,
            parent: int, k: int) -> list[Suggestion]:
    """Uniform entry point over the three strategies."""
    return strategy.suggest(context, required_type, parent, k)
