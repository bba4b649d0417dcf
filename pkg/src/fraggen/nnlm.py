"""LSTM language model over fragment sequences.

One projection layer, one LSTM layer, and one output layer. The output layer
consumes the hidden state concatenated with a type embedding of the next
fragment and the embedding of its parent fragment. Training minimizes
cross-entropy plus a type error term that rewards placing fragments of the
true fragment's kind among the top predictions.

Everything is plain numpy with hand-written backpropagation; gradients are
verified against central finite differences in the test suite.
"""

from __future__ import annotations

import binascii
import json
import struct
from dataclasses import asdict, dataclass
from pathlib import Path

import numpy as np

from .estree import KIND_INDEX, KIND_NAMES
from .fragments import EncodedSequence, Vocabulary

_EPS = 1e-12
_MAGIC = b"FRAGLM1"


class InvalidHyperparams(Exception):
    pass


class VocabRangeError(Exception):
    pass


class ReservedTarget(Exception):
    pass


class DivergedError(Exception):
    def __init__(self, batch_index: int):
        super().__init__(f"non-finite loss at batch {batch_index}")
        self.batch_index = batch_index


class EmptyDataset(Exception):
    pass


class VocabMismatch(Exception):
    pass


class ChecksumError(Exception):
    pass


@dataclass(frozen=True)
class Hyperparams:
    embed_dim: int = 32
    hidden_dim: int = 32
    type_embed_dim: int = 8
    learning_rate: float = 0.1
    lr_decay: float = 0.95
    momentum: float = 0.9
    l2_penalty: float = 0.0001
    batch_size: int = 32
    bptt_cap: int = 256
    grad_clip_norm: float = 5.0
    epochs: int = 70
    rng_seed: int = 0

    def validate(self) -> None:
        if min(self.embed_dim, self.hidden_dim, self.type_embed_dim) <= 0:
            raise InvalidHyperparams("embedding and hidden dims must be positive")
        if not 0.0 <= self.momentum < 1.0:
            raise InvalidHyperparams("momentum must lie in [0, 1)")
        if self.batch_size <= 0 or self.bptt_cap <= 0 or self.epochs < 0:
            raise InvalidHyperparams("batch size, bptt cap, epochs must be positive")


@dataclass
class LossBreakdown:
    l1: float  # cross-entropy, nats
    l2: float  # type error in [0, 1]

    @property
    def total(self) -> float:
        return self.l1 + self.l2


_PARAM_ORDER = ("emb", "type_emb", "w_x", "w_h", "b", "out_w", "out_b")


@dataclass
class Model:
    params: dict[str, np.ndarray]
    momentum: dict[str, np.ndarray]
    hp: Hyperparams
    vocab_size: int

    def copy(self) -> "Model":
        return Model({k: v.copy() for k, v in self.params.items()},
                     {k: v.copy() for k, v in self.momentum.items()},
                     self.hp, self.vocab_size)


class TypeInfo:
    """Per-target-id type sets, cached per vocabulary."""

    def __init__(self, vocab: Vocabulary):
        v = len(vocab)
        self.n_vec = np.zeros(v, dtype=np.int64)
        self.type_mask = np.zeros((v, v), dtype=bool)
        self.reserved = np.zeros(v, dtype=bool)
        for e in vocab.entries:
            ids = vocab.type_set(e.kind_name)
            self.n_vec[e.id] = len(ids)
            if ids:
                self.type_mask[e.id, list(ids)] = True
            if e.reserved is not None:
                self.reserved[e.id] = True

    @classmethod
    def for_vocab(cls, vocab: Vocabulary) -> "TypeInfo":
        cached = getattr(vocab, "_nnlm_type_info", None)
        if cached is None:
            cached = cls(vocab)
            setattr(vocab, "_nnlm_type_info", cached)
        return cached


def init_model(hp: Hyperparams, vocab: Vocabulary) -> Model:
    """Uniform [-0.05, 0.05] initialization; bit-reproducible per seed."""
    hp.validate()
    rng = np.random.default_rng(hp.rng_seed)
    v, e, h, t = len(vocab), hp.embed_dim, hp.hidden_dim, hp.type_embed_dim
    k = len(KIND_NAMES) + 1  # one row per registry kind plus the BOS pseudo-kind
    shapes = {
        "emb": (v, e),
        "type_emb": (k, t),
        "w_x": (e, 4 * h),
        "w_h": (h, 4 * h),
        "b": (4 * h,),
        "out_w": (h + t + e, v),
        "out_b": (v,),
    }
    params = {name: rng.uniform(-0.05, 0.05, shapes[name]) for name in _PARAM_ORDER}
    momentum = {name: np.zeros(shapes[name]) for name in _PARAM_ORDER}
    return Model(params, momentum, hp, v)


def kind_row(kind_name: str) -> int:
    if kind_name in KIND_INDEX:
        return KIND_INDEX[kind_name]
    return len(KIND_NAMES)  # BOS pseudo-kind


def _sigmoid(x: np.ndarray) -> np.ndarray:
    out = np.empty_like(x)
    pos = x >= 0
    out[pos] = 1.0 / (1.0 + np.exp(-x[pos]))
    ex = np.exp(x[~pos])
    out[~pos] = ex / (1.0 + ex)
    return out


def _softmax(logits: np.ndarray) -> np.ndarray:
    z = logits - logits.max(axis=-1, keepdims=True)
    e = np.exp(z)
    return e / e.sum(axis=-1, keepdims=True)


def init_state(model: Model) -> tuple[np.ndarray, np.ndarray]:
    h = model.hp.hidden_dim
    return np.zeros(h), np.zeros(h)


def step_state(model: Model, h: np.ndarray, c: np.ndarray,
               fragment_id: int) -> tuple[np.ndarray, np.ndarray]:
    p = model.params
    hd = model.hp.hidden_dim
    z = p["emb"][fragment_id] @ p["w_x"] + h @ p["w_h"] + p["b"]
    i = _sigmoid(z[:hd])
    f = _sigmoid(z[hd:2 * hd])
    g = np.tanh(z[2 * hd:3 * hd])
    o = _sigmoid(z[3 * hd:])
    c_new = f * c + i * g
    return o * np.tanh(c_new), c_new


def predict(model: Model, h: np.ndarray, c: np.ndarray,
            next_type: str, parent: int) -> np.ndarray:
    p = model.params
    cat = np.concatenate([h, p["type_emb"][kind_row(next_type)], p["emb"][parent]])
    return _softmax(cat @ p["out_w"] + p["out_b"])


def forward(model: Model, context: list[int], next_type: str,
            parent: int) -> np.ndarray:
    """Probability vector over the vocabulary for the next fragment."""
    for fid in list(context) + [parent]:
        if not 0 <= fid < model.vocab_size:
            raise VocabRangeError(f"id {fid} outside vocabulary of {model.vocab_size}")
    h, c = init_state(model)
    for fid in context:
        h, c = step_state(model, h, c, fid)
    return predict(model, h, c, next_type, parent)


def loss(dist: np.ndarray, true_id: int, vocab: Vocabulary) -> LossBreakdown:
    """Cross-entropy plus type error for one normalized distribution."""
    info = TypeInfo.for_vocab(vocab)
    if info.reserved[true_id]:
        raise ReservedTarget(f"id {true_id} is reserved")
    l1 = -float(np.log(max(dist[true_id], _EPS)))
    n = int(info.n_vec[true_id])
    if n == 0:
        return LossBreakdown(l1, 0.0)
    top = float(np.sort(dist)[-n:].sum())
    same = float(dist[info.type_mask[true_id]].sum())
    return LossBreakdown(l1, top - same)


# --- batched training ------------------------------------------------------

@dataclass
class _Batch:
    inputs: np.ndarray    # (B, T) int
    targets: np.ndarray   # (B, T) int
    types: np.ndarray     # (B, T) int, type-embedding row of each target
    parents: np.ndarray   # (B, T) int
    mask: np.ndarray      # (B, T) float


def _make_batch(seqs: list[EncodedSequence], vocab: Vocabulary) -> _Batch:
    bos = vocab.bos_id
    t_max = max(len(s.ids) - 1 for s in seqs)
    b = len(seqs)
    inputs = np.full((b, t_max), bos, dtype=np.int64)
    targets = np.zeros((b, t_max), dtype=np.int64)
    types = np.zeros((b, t_max), dtype=np.int64)
    parents = np.full((b, t_max), bos, dtype=np.int64)
    mask = np.zeros((b, t_max))
    for r, s in enumerate(seqs):
        t = len(s.ids) - 1
        inputs[r, :t] = s.ids[:-1]
        targets[r, :t] = s.ids[1:]
        types[r, :t] = [kind_row(vocab.kind_of(fid)) for fid in s.ids[1:]]
        parents[r, :t] = s.parents
        mask[r, :t] = 1.0
    return _Batch(inputs, targets, types, parents, mask)


def _batch_forward_backward(model: Model, batch: _Batch, info: TypeInfo,
                            want_grads: bool) -> tuple[float, float, dict | None]:
    """Mean l1/l2 over masked steps; optionally mean-loss gradients."""
    p = model.params
    hd = model.hp.hidden_dim
    td = model.hp.type_embed_dim
    b, t_len = batch.inputs.shape
    v = model.vocab_size
    steps = float(batch.mask.sum())
    if steps == 0:
        return 0.0, 0.0, None

    cap = model.hp.bptt_cap
    grads = {name: np.zeros_like(arr) for name, arr in p.items()} if want_grads else None
    l1_sum = 0.0
    l2_sum = 0.0
    h_prev = np.zeros((b, hd))
    c_prev = np.zeros((b, hd))

    for w0 in range(0, t_len, cap):
        w1 = min(w0 + cap, t_len)
        span = range(w0, w1)
        cache = []
        h, c = h_prev, c_prev
        dl_list = []
        for t in span:
            x = p["emb"][batch.inputs[:, t]]
            z = x @ p["w_x"] + h @ p["w_h"] + p["b"]
            i = _sigmoid(z[:, :hd])
            f = _sigmoid(z[:, hd:2 * hd])
            g = np.tanh(z[:, 2 * hd:3 * hd])
            o = _sigmoid(z[:, 3 * hd:])
            c_new = f * c + i * g
            tc = np.tanh(c_new)
            h_new = o * tc

            cat = np.concatenate(
                [h_new, p["type_emb"][batch.types[:, t]], p["emb"][batch.parents[:, t]]],
                axis=1)
            probs = _softmax(cat @ p["out_w"] + p["out_b"])

            m = batch.mask[:, t]
            tgt = batch.targets[:, t]
            p_true = probs[np.arange(b), tgt]
            l1_sum += float((-np.log(np.maximum(p_true, _EPS)) * m).sum())

            n_vec = info.n_vec[tgt]                       # (B,)
            order = np.argsort(-probs, axis=1, kind="stable")
            rank = np.empty_like(order)
            np.put_along_axis(rank, order, np.arange(v)[None, :].repeat(b, 0), axis=1)
            top_mask = rank < n_vec[:, None]
            type_mask = info.type_mask[tgt]
            l2_row = (probs * top_mask).sum(1) - (probs * type_mask).sum(1)
            l2_sum += float((l2_row * m).sum())

            if want_grads:
                dldp = (top_mask.astype(float) - type_mask.astype(float))
                safe = p_true > _EPS
                rows = np.arange(b)[safe]
                dldp[rows, tgt[safe]] -= 1.0 / p_true[safe]
                dldp *= (m / steps)[:, None]
                dlogits = probs * (dldp - (dldp * probs).sum(1, keepdims=True))
                dl_list.append(dlogits)
                cache.append((x, z, i, f, g, o, c, c_new, tc, h, cat))
            h, c = h_new, c_new

        if want_grads:
            dh_next = np.zeros((b, hd))
            dc_next = np.zeros((b, hd))
            for idx in reversed(range(len(cache))):
                t = w0 + idx
                x, z, i, f, g, o, c_old, c_new, tc, h_old, cat = cache[idx]
                dlogits = dl_list[idx]
                grads["out_w"] += cat.T @ dlogits
                grads["out_b"] += dlogits.sum(0)
                dcat = dlogits @ p["out_w"].T
                np.add.at(grads["type_emb"], batch.types[:, t], dcat[:, hd:hd + td])
                np.add.at(grads["emb"], batch.parents[:, t], dcat[:, hd + td:])

                dh = dcat[:, :hd] + dh_next
                do = dh * tc
                dc = dc_next + dh * o * (1.0 - tc * tc)
                di = dc * g
                dg = dc * i
                df = dc * c_old
                dc_next = dc * f
                dz = np.concatenate(
                    [di * i * (1 - i), df * f * (1 - f), dg * (1 - g * g),
                     do * o * (1 - o)], axis=1)
                grads["w_x"] += x.T @ dz
                grads["w_h"] += h_old.T @ dz
                grads["b"] += dz.sum(0)
                dh_next = dz @ p["w_h"].T
                np.add.at(grads["emb"], batch.inputs[:, t], dz @ p["w_x"].T)

        h_prev, c_prev = h, c  # state carries across windows; gradients do not

    return l1_sum / steps, l2_sum / steps, grads


def _apply_update(model: Model, grads: dict[str, np.ndarray], lr: float) -> None:
    hp = model.hp
    total = np.sqrt(sum(float((g * g).sum()) for g in grads.values()))
    scale = hp.grad_clip_norm / total if total > hp.grad_clip_norm else 1.0
    for name, param in model.params.items():
        g = grads[name] * scale + hp.l2_penalty * param
        buf = model.momentum[name]
        buf *= hp.momentum
        buf += g
        param -= lr * buf


def train_epoch(model: Model, sequences: list[EncodedSequence], vocab: Vocabulary,
                epoch: int = 0) -> tuple[float, float, Model]:
    """One SGD-with-momentum pass; returns per-fragment mean l1 and l2."""
    if not sequences:
        raise EmptyDataset("no training sequences")
    info = TypeInfo.for_vocab(vocab)
    hp = model.hp
    lr = hp.learning_rate * (hp.lr_decay ** epoch)
    order = np.random.default_rng([hp.rng_seed, epoch, 0x5EED]).permutation(len(sequences))
    l1_total = 0.0
    l2_total = 0.0
    step_total = 0.0
    for bi, start in enumerate(range(0, len(order), hp.batch_size)):
        chunk = [sequences[j] for j in order[start:start + hp.batch_size]]
        batch = _make_batch(chunk, vocab)
        l1, l2, grads = _batch_forward_backward(model, batch, info, want_grads=True)
        if not (np.isfinite(l1) and np.isfinite(l2)):
            raise DivergedError(bi)
        steps = float(batch.mask.sum())
        l1_total += l1 * steps
        l2_total += l2 * steps
        step_total += steps
        _apply_update(model, grads, lr)
    return l1_total / step_total, l2_total / step_total, model


def train(model: Model, sequences: list[EncodedSequence], vocab: Vocabulary,
          epochs: int | None = None, on_epoch=None) -> list[tuple[float, float]]:
    """Run the training loop; returns the (l1, l2) history."""
    history = []
    for epoch in range(epochs if epochs is not None else model.hp.epochs):
        l1, l2, _ = train_epoch(model, sequences, vocab, epoch)
        history.append((l1, l2))
        if on_epoch is not None:
            on_epoch(epoch, l1, l2)
    return history


def _evaluate(model: Model, sequences: list[EncodedSequence], vocab: Vocabulary,
              ) -> tuple[float, float, float]:
    if not sequences:
        raise EmptyDataset("no evaluation sequences")
    info = TypeInfo.for_vocab(vocab)
    l1_total = l2_total = steps = 0.0
    hits = 0.0
    for start in range(0, len(sequences), model.hp.batch_size):
        chunk = sequences[start:start + model.hp.batch_size]
        batch = _make_batch(chunk, vocab)
        l1, l2, _ = _batch_forward_backward(model, batch, info, want_grads=False)
        n = float(batch.mask.sum())
        l1_total += l1 * n
        l2_total += l2 * n
        steps += n
        hits += _top1_hits(model, batch)
    return l1_total / steps, l2_total / steps, hits / steps


def _top1_hits(model: Model, batch: _Batch) -> float:
    p = model.params
    hd = model.hp.hidden_dim
    b, t_len = batch.inputs.shape
    h = np.zeros((b, hd))
    c = np.zeros((b, hd))
    hits = 0.0
    for t in range(t_len):
        x = p["emb"][batch.inputs[:, t]]
        z = x @ p["w_x"] + h @ p["w_h"] + p["b"]
        i = _sigmoid(z[:, :hd])
        f = _sigmoid(z[:, hd:2 * hd])
        g = np.tanh(z[:, 2 * hd:3 * hd])
        o = _sigmoid(z[:, 3 * hd:])
        c = f * c + i * g
        h = o * np.tanh(c)
        cat = np.concatenate(
            [h, p["type_emb"][batch.types[:, t]], p["emb"][batch.parents[:, t]]], axis=1)
        logits = cat @ p["out_w"] + p["out_b"]
        hits += float(((logits.argmax(1) == batch.targets[:, t]) * batch.mask[:, t]).sum())
    return hits


def perplexity(model: Model, sequences: list[EncodedSequence],
               vocab: Vocabulary) -> float:
    l1, _, _ = _evaluate(model, sequences, vocab)
    return float(np.exp(l1))


def type_error(model: Model, sequences: list[EncodedSequence],
               vocab: Vocabulary) -> float:
    _, l2, _ = _evaluate(model, sequences, vocab)
    return l2


def top1_accuracy(model: Model, sequences: list[EncodedSequence],
                  vocab: Vocabulary) -> float:
    _, _, acc = _evaluate(model, sequences, vocab)
    return acc


def check_gradients(model: Model, sample: list[EncodedSequence],
                    vocab: Vocabulary, epsilon: float = 1e-4) -> float:
    """Max relative error of analytic vs central-difference gradients."""
    info = TypeInfo.for_vocab(vocab)
    batch = _make_batch(sample, vocab)
    _, _, grads = _batch_forward_backward(model, batch, info, want_grads=True)

    def total_loss() -> float:
        l1, l2, _ = _batch_forward_backward(model, batch, info, want_grads=False)
        return l1 + l2

    worst = 0.0
    for name, param in model.params.items():
        flat = param.reshape(-1)
        gflat = grads[name].reshape(-1)
        for j in range(flat.size):
            orig = flat[j]
            flat[j] = orig + epsilon
            hi = total_loss()
            flat[j] = orig - epsilon
            lo = total_loss()
            flat[j] = orig
            fd = (hi - lo) / (2 * epsilon)
            denom = max(abs(gflat[j]), abs(fd), 1e-4)
            worst = max(worst, abs(gflat[j] - fd) / denom)
    return worst


# --- checkpointing ----------------------------------------------------------

def save_checkpoint(model: Model, hp: Hyperparams, vocab_hash: str,
                    path: str | Path) -> None:
    header = {
        "version": 1,
        "hyperparams": asdict(hp),
        "vocab_hash": vocab_hash,
        "vocab_size": model.vocab_size,
        "tensors": [[name, list(model.params[name].shape)] for name in _PARAM_ORDER],
    }
    blob = json.dumps(header, separators=(",", ":")).encode("utf-8")
    out = bytearray()
    out += _MAGIC
    out += struct.pack("<Q", len(blob))
    out += blob
    for name in _PARAM_ORDER:
        out += model.params[name].astype("<f4").tobytes()
    out += struct.pack("<I", binascii.crc32(bytes(out)) & 0xFFFFFFFF)
    Path(path).write_bytes(bytes(out))


def load_checkpoint(path: str | Path,
                    expected_vocab_hash: str | None = None) -> tuple[Model, Hyperparams]:
    raw = Path(path).read_bytes()
    if len(raw) < len(_MAGIC) + 12 or not raw.startswith(_MAGIC):
        raise ChecksumError("not a checkpoint file")
    body, crc_bytes = raw[:-4], raw[-4:]
    if struct.unpack("<I", crc_bytes)[0] != (binascii.crc32(body) & 0xFFFFFFFF):
        raise ChecksumError("checksum mismatch")
    off = len(_MAGIC)
    (hlen,) = struct.unpack_from("<Q", body, off)
    off += 8
    try:
        header = json.loads(body[off:off + hlen].decode("utf-8"))
    except (UnicodeDecodeError, json.JSONDecodeError):
        raise ChecksumError("corrupt header") from None
    off += hlen
    hp = Hyperparams(**header["hyperparams"])
    if expected_vocab_hash is not None and header["vocab_hash"] != expected_vocab_hash:
        raise VocabMismatch(header["vocab_hash"])
    params = {}
    for name, shape in header["tensors"]:
        count = int(np.prod(shape)) if shape else 1
        arr = np.frombuffer(body, dtype="<f4", count=count, offset=off)
        off += count * 4
        params[name] = arr.reshape(shape).astype(np.float64)
    if off != len(body):
        raise ChecksumError("trailing or missing tensor data")
    momentum = {name: np.zeros_like(arr) for name, arr in params.items()}
    model = Model(params, momentum, hp, header["vocab_size"])
    return model, hp
