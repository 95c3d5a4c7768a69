import math

import numpy as np
import pytest

from pseudodice import mlp
from pseudodice.bitseq import make_windows
from pseudodice.errors import ConfigError, DivergenceError, DomainError
from pseudodice.mtprng import mt_binary_sequence


def _random_dataset(seed, n, width=6):
    rng = np.random.RandomState(seed)
    return mlp.Dataset(
        rng.randint(0, 2, size=(n, width)).astype(np.uint8),
        rng.randint(0, 2, size=n).astype(np.uint8),
    )


def _zero_model(sizes=(6, 30, 20, 1)):
    model = mlp.init_model(sizes, seed=1)
    for w in model.weights:
        w[...] = 0.0
    return model


# ---------------------------------------------------------------------------
# init


def test_init_shapes():
    model = mlp.init_model([6, 30, 20, 1], seed=3)
    assert [w.shape for w in model.weights] == [(30, 6), (20, 30), (1, 20)]
    assert [b.shape for b in model.biases] == [(30,), (20,), (1,)]
    assert all(np.all(b == 0) for b in model.biases)


def test_init_deterministic_and_seed_sensitive():
    a = mlp.init_model([6, 30, 20, 1], seed=7)
    b = mlp.init_model([6, 30, 20, 1], seed=7)
    c = mlp.init_model([6, 30, 20, 1], seed=8)
    assert all(np.array_equal(x, y) for x, y in zip(a.weights, b.weights))
    assert any(not np.array_equal(x, y) for x, y in zip(a.weights, c.weights))


def test_init_bounds():
    model = mlp.init_model([6, 30, 20, 1], seed=5)
    for w, fan_in in zip(model.weights, (6, 30, 20)):
        bound = 1 / math.sqrt(fan_in)
        assert np.all(np.abs(w) <= bound)
        assert np.abs(w).max() > 0.5 * bound  # actually spread out


def test_init_validation():
    with pytest.raises(ConfigError):
        mlp.init_model([], seed=1)
    with pytest.raises(ConfigError):
        mlp.init_model([6, 0, 1], seed=1)
    with pytest.raises(ConfigError):
        mlp.init_model([6, 1], seed=1, encoding="onehot")


# ---------------------------------------------------------------------------
# forward / predict


def test_zero_model_outputs_half():
    model = _zero_model()
    for pattern in ([0] * 6, [1] * 6, [0, 1, 0, 1, 0, 1]):
        assert mlp.forward(model, pattern) == 0.5
        assert mlp.predict_bit(model, pattern) == 1  # 0.5 ties predict 1


def test_output_strictly_inside_unit_interval():
    model = mlp.init_model([6, 30, 20, 1], seed=2)
    rng = np.random.RandomState(0)
    for _ in range(50):
        out = mlp.forward(model, rng.randint(0, 2, 6))
        assert 0.0 < out < 1.0


def test_output_bias_dominates():
    model = _zero_model()
    model.biases[-1][0] = 40.0
    assert mlp.predict_bit(model, [0] * 6) == 1
    model.biases[-1][0] = -40.0
    assert mlp.predict_bit(model, [0] * 6) == 0


def test_hand_computed_toy_forward():
    model = mlp.MlpModel(
        layer_sizes=(2, 2, 1),
        weights=[np.array([[0.5, -0.25], [0.1, 0.2]]), np.array([[0.3, -0.4]])],
        biases=[np.array([0.1, -0.1]), np.array([0.05])],
    )
    # input bits [1, 0] encode to [+1, -1]
    h1 = math.tanh(0.5 * 1 + (-0.25) * (-1) + 0.1)
    h2 = math.tanh(0.1 * 1 + 0.2 * (-1) + (-0.1))
    z = 0.3 * h1 + (-0.4) * h2 + 0.05
    expected = 1.0 / (1.0 + math.exp(-z))
    assert mlp.forward(model, [1, 0]) == pytest.approx(expected, rel=1e-15)


def test_zeroone_encoding_differs():
    model = mlp.init_model([6, 8, 1], seed=4, encoding=mlp.ENCODING_ZEROONE)
    ref = mlp.init_model([6, 8, 1], seed=4)
    pattern = [1, 0, 1, 1, 0, 0]
    assert mlp.forward(model, pattern) != mlp.forward(ref, pattern)


def test_forward_dimension_mismatch():
    model = mlp.init_model([6, 4, 1], seed=1)
    with pytest.raises(DomainError):
        mlp.forward(model, [0, 1, 0])


# ---------------------------------------------------------------------------
# loss / gradient


def test_zero_model_balanced_loss_and_bias_gradient():
    ds = mlp.Dataset(
        np.array([[0, 0, 0, 0, 0, 0], [1, 1, 1, 1, 1, 1]], dtype=np.uint8),
        np.array([0, 1], dtype=np.uint8),
    )
    model = _zero_model()
    assert mlp.loss(model, ds) == 0.25  # output 0.5 against half 0s, half 1s
    grads = mlp.gradient(model, ds)
    assert grads.biases[-1][0] == 0.0


def test_single_instance_loss():
    ds = mlp.Dataset(np.array([[1, 0, 1, 0, 1, 0]], dtype=np.uint8), np.array([1], dtype=np.uint8))
    model = mlp.init_model([6, 5, 1], seed=9)
    o = mlp.forward(model, [1, 0, 1, 0, 1, 0])
    assert mlp.loss(model, ds) == pytest.approx((o - 1.0) ** 2, rel=1e-14)


def test_gradient_matches_finite_differences_small():
    ds = _random_dataset(13, 40, width=4)
    model = mlp.init_model([4, 5, 3, 1], seed=21)
    grad = mlp.gradient(model, ds).flat()
    theta = model.flat()
    work = model.copy()
    h = 1e-5
    fd = np.zeros_like(theta)
    for i in range(theta.size):
        up = theta.copy()
        up[i] += h
        work.set_flat(up)
        lp = mlp.loss(work, ds)
        down = theta.copy()
        down[i] -= h
        work.set_flat(down)
        lm = mlp.loss(work, ds)
        fd[i] = (lp - lm) / (2 * h)
    assert np.all(np.abs(grad - fd) <= np.maximum(1e-5 * np.abs(fd), 1e-8))


def test_gradient_empty_dataset():
    ds = mlp.Dataset(np.zeros((0, 6), dtype=np.uint8), np.zeros(0, dtype=np.uint8))
    model = mlp.init_model([6, 4, 1], seed=2)
    with pytest.raises(DomainError):
        mlp.loss(model, ds)
    with pytest.raises(DomainError):
        mlp.gradient(model, ds)
    with pytest.raises(DomainError):
        mlp.accuracy(model, ds)


# ---------------------------------------------------------------------------
# train


def test_train_learns_first_bit_label():
    # label = first input bit: linearly separable
    ds = _random_dataset(5, 3000)
    ds = mlp.Dataset(ds.inputs, ds.inputs[:, 0].copy())
    model = mlp.init_model([6, 30, 20, 1], seed=11)
    trained, log = mlp.train(model, ds, mlp.TrainConfig())
    assert mlp.accuracy(trained, ds) == 1.0
    assert log.epochs <= 100
    assert log.stop_reason in ("max_epochs", "min_gradient")


def test_train_single_epoch_logs_once():
    ds = _random_dataset(6, 100)
    model = mlp.init_model([6, 10, 1], seed=3)
    _, log = mlp.train(model, ds, mlp.TrainConfig(max_epochs=1))
    assert log.epochs == 1
    assert log.stop_reason == "max_epochs"


def test_train_min_gradient_stop():
    ds = _random_dataset(7, 50)
    model = mlp.init_model([6, 10, 1], seed=3)
    _, log = mlp.train(model, ds, mlp.TrainConfig(min_gradient=1e9))
    assert log.epochs == 1
    assert log.stop_reason == "min_gradient"


def test_train_deterministic():
    ds = _random_dataset(8, 400)
    model = mlp.init_model([6, 30, 20, 1], seed=17)
    t1, log1 = mlp.train(model, ds, mlp.TrainConfig())
    t2, log2 = mlp.train(model, ds, mlp.TrainConfig())
    assert np.array_equal(log1.losses, log2.losses)
    assert np.array_equal(log1.gradient_norms, log2.gradient_norms)
    assert all(np.array_equal(a, b) for a, b in zip(t1.weights, t2.weights))
    assert all(np.array_equal(a, b) for a, b in zip(t1.biases, t2.biases))


def test_train_does_not_mutate_input_model():
    ds = _random_dataset(9, 100)
    model = mlp.init_model([6, 10, 1], seed=4)
    before = model.flat().copy()
    mlp.train(model, ds, mlp.TrainConfig(max_epochs=3))
    assert np.array_equal(model.flat(), before)


def test_momentum_zero_is_plain_gradient_step():
    ds = _random_dataset(10, 120)
    model = mlp.init_model([6, 10, 1], seed=5)
    grad = mlp.gradient(model, ds).flat()
    config = mlp.TrainConfig(momentum=0.0, max_epochs=1, learning_rate=0.05)
    trained, _ = mlp.train(model, ds, config)
    assert np.allclose(trained.flat(), model.flat() - 0.05 * grad, rtol=0, atol=0)


@pytest.mark.filterwarnings("ignore:invalid value encountered")
@pytest.mark.filterwarnings("ignore:overflow encountered")
def test_train_divergence_raises_with_epoch():
    # tanh/sigmoid keep the loss finite for any finite parameters, so a
    # non-finite weight is the way training can blow up
    ds = _random_dataset(11, 60)
    model = mlp.init_model([6, 10, 1], seed=6)
    model.weights[0][0, 0] = np.nan
    with pytest.raises(DivergenceError) as info:
        mlp.train(model, ds, mlp.TrainConfig(max_epochs=10))
    assert info.value.epoch == 1
    model = mlp.init_model([6, 10, 1], seed=6)
    with pytest.raises(DivergenceError) as info:
        mlp.train(model, ds, mlp.TrainConfig(learning_rate=float("inf"), max_epochs=10))
    assert info.value.epoch is not None and info.value.epoch >= 2


def test_train_config_validation():
    with pytest.raises(ConfigError):
        mlp.TrainConfig(learning_rate=0.0)
    with pytest.raises(ConfigError):
        mlp.TrainConfig(momentum=1.0)
    with pytest.raises(ConfigError):
        mlp.TrainConfig(max_epochs=0)
    with pytest.raises(ConfigError):
        mlp.TrainConfig(min_gradient=-1.0)
    with pytest.raises(ConfigError):
        mlp.TrainConfig(input_encoding="weird")


# ---------------------------------------------------------------------------
# accuracy


def test_accuracy_constant_labels():
    inputs = np.random.RandomState(1).randint(0, 2, size=(50, 6)).astype(np.uint8)
    model = _zero_model()
    assert mlp.accuracy(model, mlp.Dataset(inputs, np.ones(50, dtype=np.uint8))) == 1.0
    assert mlp.accuracy(model, mlp.Dataset(inputs, np.zeros(50, dtype=np.uint8))) == 0.0


def test_accuracy_complement_symmetry():
    ds = _random_dataset(14, 200)
    doubled = mlp.Dataset(
        np.vstack([ds.inputs, ds.inputs]),
        np.concatenate([ds.labels, 1 - ds.labels]),
    )
    model = mlp.init_model([6, 30, 20, 1], seed=44)
    assert mlp.accuracy(model, doubled) == 0.5


def test_accuracy_matches_correct_count():
    ds = _random_dataset(15, 333)
    model = mlp.init_model([6, 12, 1], seed=2)
    assert mlp.accuracy(model, ds) == mlp.correct_count(model, ds) / 333


def test_trained_accuracy_bounded_by_census_majority():
    bits = mt_binary_sequence(3, 5007)
    ds = make_windows(bits, 1, 5000)
    from pseudodice.bitseq import dataset_census

    census = dataset_census(ds)
    best = int(census.counts.reshape(-1, 2).max(axis=1).sum())
    model = mlp.init_model([6, 30, 20, 1], seed=303)
    trained, _ = mlp.train(model, ds, mlp.TrainConfig())
    assert mlp.correct_count(trained, ds) <= best


def test_accuracy_works_on_window_dataset():
    bits = mt_binary_sequence(4, 1006)
    ds = make_windows(bits, 1, 1000)
    model = mlp.init_model([6, 10, 1], seed=8)
    acc = mlp.accuracy(model, ds)
    assert 0.0 <= acc <= 1.0


# ---------------------------------------------------------------------------
# serialization


def test_model_round_trip(tmp_path):
    model = mlp.init_model([6, 30, 20, 1], seed=123)
    trained, _ = mlp.train(model, _random_dataset(16, 200), mlp.TrainConfig(max_epochs=5))
    path = tmp_path / "model.txt"
    mlp.save_model(trained, path)
    loaded = mlp.load_model(path)
    assert loaded.layer_sizes == trained.layer_sizes
    assert loaded.encoding == trained.encoding
    assert all(np.array_equal(a, b) for a, b in zip(loaded.weights, trained.weights))
    assert all(np.array_equal(a, b) for a, b in zip(loaded.biases, trained.biases))
