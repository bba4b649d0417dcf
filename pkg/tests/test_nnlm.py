"""Model mechanics: shapes, losses, gradients, training, checkpoints."""

import numpy as np
import pytest

from conftest import OVERFIT_HP
from fraggen import nnlm
from fraggen.fragments import EncodedSequence


def small_hp(**kw):
    base = dict(embed_dim=6, hidden_dim=6, type_embed_dim=3, rng_seed=3)
    base.update(kw)
    return nnlm.Hyperparams(**base)


def test_init_deterministic(toy):
    hp = small_hp()
    a = nnlm.init_model(hp, toy.vocab)
    b = nnlm.init_model(hp, toy.vocab)
    for name in a.params:
        assert np.array_equal(a.params[name], b.params[name]), name


def test_init_shapes(toy):
    hp = nnlm.Hyperparams(rng_seed=0)
    m = nnlm.init_model(hp, toy.vocab)
    v = len(toy.vocab)
    assert m.params["emb"].shape == (v, 32)
    assert m.params["w_x"].shape == (32, 128)
    assert m.params["w_h"].shape == (32, 128)
    assert m.params["out_w"].shape == (32 + 8 + 32, v)
    assert np.all(np.abs(m.params["emb"]) <= 0.05)


def test_invalid_hyperparams(toy):
    with pytest.raises(nnlm.InvalidHyperparams):
        nnlm.init_model(nnlm.Hyperparams(hidden_dim=0), toy.vocab)
    with pytest.raises(nnlm.InvalidHyperparams):
        nnlm.init_model(nnlm.Hyperparams(momentum=1.0), toy.vocab)


def test_forward_sums_to_one(toy):
    m = nnlm.init_model(small_hp(), toy.vocab)
    ctx = toy.encoded[0].ids[:5]
    dist = nnlm.forward(m, ctx, "ExpressionStatement", toy.encoded[0].ids[1])
    assert abs(dist.sum() - 1.0) < 1e-6
    assert np.all(dist > 0)


def test_zero_output_layer_uniform(toy):
    m = nnlm.init_model(small_hp(), toy.vocab)
    m.params["out_w"][:] = 0.0
    m.params["out_b"][:] = 0.0
    dist = nnlm.forward(m, toy.encoded[0].ids[:4], "Identifier", toy.vocab.bos_id)
    assert np.allclose(dist, 1.0 / len(toy.vocab), atol=1e-12)


def test_forward_range_check(toy):
    m = nnlm.init_model(small_hp(), toy.vocab)
    with pytest.raises(nnlm.VocabRangeError):
        nnlm.forward(m, [len(toy.vocab)], "Identifier", 0)


def test_trained_forward_depends_on_context(toy, overfit):
    model, _ = overfit
    a = toy.encoded[0]
    b = toy.encoded[5]  # different family
    assert a.ids[:3] != b.ids[:3]
    da = nnlm.forward(model, a.ids[:3], toy.vocab.kind_of(a.ids[3]), a.parents[2])
    db = nnlm.forward(model, b.ids[:3], toy.vocab.kind_of(b.ids[3]), b.parents[2])
    assert not np.allclose(da, db)


# --- loss --------------------------------------------------------------------

def test_loss_one_hot(toy):
    vocab = toy.vocab
    target = vocab.non_reserved_ids()[0]
    dist = np.zeros(len(vocab))
    dist[target] = 1.0
    out = nnlm.loss(dist, target, vocab)
    assert out.l1 == 0.0
    assert abs(out.l2) < 1e-12


def test_loss_uniform(toy):
    vocab = toy.vocab
    v = len(vocab)
    dist = np.full(v, 1.0 / v)
    target = vocab.non_reserved_ids()[0]
    out = nnlm.loss(dist, target, vocab)
    assert abs(out.l1 - np.log(v)) < 1e-9
    assert abs(out.l2) < 1e-12


def test_loss_single_wrong_type_mass(toy):
    vocab = toy.vocab
    # pick a kind with exactly one entry so n == 1
    kname = next(k for k, ids in vocab.type_index.items() if len(ids) == 1)
    target = vocab.type_index[kname][0]
    other = next(i for i in vocab.non_reserved_ids()
                 if vocab.kind_of(i) != kname)
    dist = np.zeros(len(vocab))
    dist[other] = 1.0
    out = nnlm.loss(dist, target, vocab)
    assert out.l1 == -np.log(1e-12)
    assert abs(out.l2 - 1.0) < 1e-12


def test_loss_reserved_target(toy):
    dist = np.full(len(toy.vocab), 1.0 / len(toy.vocab))
    with pytest.raises(nnlm.ReservedTarget):
        nnlm.loss(dist, toy.vocab.bos_id, toy.vocab)


def test_loss_bounds_random(toy):
    rng = np.random.default_rng(11)
    vocab = toy.vocab
    ids = vocab.non_reserved_ids()
    for _ in range(500):
        dist = rng.dirichlet(np.full(len(vocab), 0.3))
        out = nnlm.loss(dist, int(rng.choice(ids)), vocab)
        assert out.l1 >= 0.0
        assert -1e-12 <= out.l2 <= 1.0 + 1e-12


# --- gradients ---------------------------------------------------------------

def test_gradient_check_tiny(toy):
    m = nnlm.init_model(small_hp(rng_seed=21), toy.vocab)
    sample = [EncodedSequence(toy.encoded[0].ids[:7], toy.encoded[0].parents[:6])]
    err = nnlm.check_gradients(m, sample, toy.vocab)
    assert err < 1e-4


def test_gradients_vanish_when_fitted(toy, overfit):
    """After overfitting, the cross-entropy part of the gradient is tiny."""
    model, _ = overfit
    info = nnlm.TypeInfo.for_vocab(toy.vocab)
    batch = nnlm._make_batch([toy.encoded[0]], toy.vocab)
    l1, l2, grads = nnlm._batch_forward_backward(model, batch, info, True)
    assert l1 < 0.05
    norm = np.sqrt(sum(float((g * g).sum()) for g in grads.values()))
    assert norm < 1.0


# --- training ----------------------------------------------------------------

def test_zero_learning_rate_leaves_params(toy):
    hp = small_hp(learning_rate=0.0)
    m = nnlm.init_model(hp, toy.vocab)
    before = {k: v.copy() for k, v in m.params.items()}
    nnlm.train_epoch(m, toy.encoded, toy.vocab, epoch=0)
    for name in before:
        assert np.array_equal(m.params[name], before[name]), name
    assert any(np.any(buf != 0) for buf in m.momentum.values())


def test_training_deterministic(toy):
    runs = []
    for _ in range(2):
        m = nnlm.init_model(small_hp(epochs=5, learning_rate=0.2), toy.vocab)
        hist = [nnlm.train_epoch(m, toy.encoded, toy.vocab, e)[:2] for e in range(5)]
        runs.append((hist, {k: v.copy() for k, v in m.params.items()}))
    assert runs[0][0] == runs[1][0]
    for name in runs[0][1]:
        assert np.array_equal(runs[0][1][name], runs[1][1][name])


def test_overfit_metrics(toy, overfit):
    model, history = overfit
    assert nnlm.perplexity(model, toy.encoded, toy.vocab) <= 1.5
    assert nnlm.type_error(model, toy.encoded, toy.vocab) <= 0.05
    assert nnlm.top1_accuracy(model, toy.encoded, toy.vocab) >= 0.95
    first = history[0][0] + history[0][1]
    last = history[-1][0] + history[-1][1]
    assert last < 0.25 * first


def test_single_sequence_overfit_perplexity(toy):
    data = [toy.encoded[0]]
    hp = nnlm.Hyperparams(rng_seed=5, epochs=200, batch_size=1,
                          learning_rate=0.5, lr_decay=0.997)
    m = nnlm.init_model(hp, toy.vocab)
    nnlm.train(m, data, toy.vocab)
    assert nnlm.perplexity(m, data, toy.vocab) <= 1.1


def test_uniform_model_perplexity(toy):
    m = nnlm.init_model(small_hp(), toy.vocab)
    m.params["out_w"][:] = 0.0
    m.params["out_b"][:] = 0.0
    v = len(toy.vocab)
    assert abs(nnlm.perplexity(m, toy.encoded, toy.vocab) - v) <= 1e-6 * v


def test_type_error_bounded(toy, overfit):
    model, _ = overfit
    te = nnlm.type_error(model, toy.encoded, toy.vocab)
    assert 0.0 <= te <= 1.0


def test_empty_dataset(toy):
    m = nnlm.init_model(small_hp(), toy.vocab)
    with pytest.raises(nnlm.EmptyDataset):
        nnlm.perplexity(m, [], toy.vocab)
    with pytest.raises(nnlm.EmptyDataset):
        nnlm.train_epoch(m, [], toy.vocab)


# --- checkpointing -----------------------------------------------------------

def test_checkpoint_roundtrip(tmp_path, toy, overfit):
    model, _ = overfit
    path = tmp_path / "model.ckpt"
    nnlm.save_checkpoint(model, model.hp, toy.vocab.content_hash(), path)
    loaded, hp = nnlm.load_checkpoint(path, toy.vocab.content_hash())
    assert hp == OVERFIT_HP
    for name in model.params:
        assert np.array_equal(loaded.params[name],
                              model.params[name].astype("<f4").astype(np.float64))
    # saving the loaded model reproduces the byte stream exactly
    path2 = tmp_path / "model2.ckpt"
    nnlm.save_checkpoint(loaded, hp, toy.vocab.content_hash(), path2)
    assert path.read_bytes() == path2.read_bytes()


def test_checkpoint_vocab_mismatch(tmp_path, toy, overfit):
    model, _ = overfit
    path = tmp_path / "model.ckpt"
    nnlm.save_checkpoint(model, model.hp, toy.vocab.content_hash(), path)
    with pytest.raises(nnlm.VocabMismatch):
        nnlm.load_checkpoint(path, "a-different-vocabulary-hash")


def test_checkpoint_truncated(tmp_path, toy, overfit):
    model, _ = overfit
    path = tmp_path / "model.ckpt"
    nnlm.save_checkpoint(model, model.hp, toy.vocab.content_hash(), path)
    raw = path.read_bytes()
    for cut in (len(raw) // 2, len(raw) - 1, 4):
        bad = tmp_path / "bad.ckpt"
        bad.write_bytes(raw[:cut])
        with pytest.raises(nnlm.ChecksumError):
            nnlm.load_checkpoint(bad)
    flipped = bytearray(raw)
    flipped[len(raw) // 2] ^= 0xFF
    bad = tmp_path / "flip.ckpt"
    bad.write_bytes(bytes(flipped))
    with pytest.raises(nnlm.ChecksumError):
        nnlm.load_checkpoint(bad)


def test_diverged_error(toy):
    m = nnlm.init_model(small_hp(), toy.vocab)
    m.params["out_w"][0, 0] = float("nan")
    with pytest.raises(nnlm.DivergedError) as exc:
        nnlm.train_epoch(m, toy.encoded, toy.vocab)
    assert exc.value.batch_index == 0
