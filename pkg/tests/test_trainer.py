import numpy as np
import pytest

from deepssc import sparse, trainer
from deepssc.data import Dataset, SynthSpec, gen_linear_subspaces, normalize_columns
from deepssc.errors import InvalidInputError
from deepssc.network import forward_batch, init_network
from deepssc.trainer import TrainerConfig, compute_loss, infer_features, ssc_baseline, train


def small_dataset(seed=0, n_per=12):
    spec = SynthSpec(2, 8, 2, n_per, noise_sigma=0.01, seed=seed)
    ds = gen_linear_subspaces(spec)
    return Dataset(x=normalize_columns(ds.x), labels=ds.labels)


def test_config_validation():
    with pytest.raises(InvalidInputError):
        TrainerConfig(layer_dims=[4], gamma=0.0)
    with pytest.raises(InvalidInputError):
        TrainerConfig(layer_dims=[4], mu=0.0)
    with pytest.raises(InvalidInputError):
        TrainerConfig(layer_dims=[4], tau=-1)
    with pytest.raises(InvalidInputError):
        TrainerConfig(layer_dims=[4], lambda_mode="explicit")
    with pytest.raises(InvalidInputError):
        TrainerConfig(layer_dims=[4], alternation="batch")


def test_effective_lambda_auto():
    cfg = TrainerConfig(layer_dims=[4])
    assert cfg.effective_lambda(150) == 1e-3 / 150
    cfg = TrainerConfig(layer_dims=[4], lambda_mode="explicit", lambda_value=0.5)
    assert cfg.effective_lambda(150) == 0.5


def test_loss_zero_code_zero_lambda():
    rng = np.random.default_rng(0)
    x = rng.standard_normal((4, 6))
    params = init_network([4], "tanh")
    loss = compute_loss(params, x, np.zeros((6, 6)), gamma=0.1, lam=0.0)
    assert abs(loss.total - 0.5 * float(np.sum(x * x))) <= 1e-10
    assert loss.l1 == 0.0
    assert loss.sphere == 0.0


def test_loss_unit_columns_zero_sphere():
    rng = np.random.default_rng(1)
    x = normalize_columns(rng.standard_normal((4, 6)))
    params = init_network([4], "identity")
    loss = compute_loss(params, x, np.zeros((6, 6)), gamma=0.1, lam=2.0)
    assert loss.sphere <= 1e-20


def test_loss_matches_direct_summation():
    rng = np.random.default_rng(2)
    x = rng.standard_normal((5, 8))
    c = rng.standard_normal((8, 8))
    np.fill_diagonal(c, 0.0)
    params = init_network([5, 4], "tanh")
    gamma, lam = 0.3, 0.05
    loss = compute_loss(params, x, c, gamma, lam)
    h = forward_batch(params, x)
    recon = l1 = sphere = 0.0
    for i in range(8):
        r = h[:, i] - h @ c[:, i]
        recon += 0.5 * float(r @ r)
        l1 += gamma * float(np.sum(np.abs(c[:, i])))
        sphere += 0.25 * lam * (float(h[:, i] @ h[:, i]) - 1.0) ** 2
    total = recon + l1 + sphere
    assert abs(loss.total - total) / abs(total) <= 1e-10
    assert abs(loss.total - (loss.recon + loss.l1 + loss.sphere)) <= 1e-10


def test_loss_shape_mismatch():
    params = init_network([4], "tanh")
    with pytest.raises(InvalidInputError):
        compute_loss(params, np.ones((4, 6)), np.zeros((5, 5)), 0.1, 0.0)


def test_train_tau_zero_equals_shallow_codes_on_init_features():
    ds = small_dataset()
    cfg = TrainerConfig(layer_dims=[8, 5], gamma=0.05, tau=0, seed=3)
    params, c, trace = train(ds, cfg)
    assert trace.epochs_run == 0
    init = init_network([8, 5], "tanh")
    for got, want in zip(params.layers, init.layers):
        assert np.array_equal(got.w, want.w)
        assert np.array_equal(got.b, want.b)
    h = forward_batch(init, ds.x)
    assert np.array_equal(c, sparse.self_expression(h, 0.05))


def test_train_deterministic_under_seed():
    ds = small_dataset()
    cfg = TrainerConfig(layer_dims=[8, 5], gamma=0.05, tau=3, conv_tol=1e-12, seed=4)
    p1, c1, t1 = train(ds, cfg)
    p2, c2, t2 = train(ds, cfg)
    assert np.array_equal(c1, c2)
    for a, b in zip(p1.layers, p2.layers):
        assert np.array_equal(a.w, b.w)
        assert np.array_equal(a.b, b.b)
    assert [r.loss.total for r in t1.records] == [r.loss.total for r in t2.records]


def test_train_trace_epochs_consecutive():
    ds = small_dataset()
    cfg = TrainerConfig(layer_dims=[8, 5], gamma=0.05, tau=5, conv_tol=1e-12, seed=5)
    _, _, trace = train(ds, cfg)
    assert [r.epoch for r in trace.records] == list(range(1, trace.epochs_run + 1))


def test_train_loss_decreases_on_linear_synthetic():
    spec = SynthSpec(3, 30, 4, 50, noise_sigma=0.01, seed=0)
    ds = gen_linear_subspaces(spec)
    ds = Dataset(x=normalize_columns(ds.x), labels=ds.labels)
    cfg = TrainerConfig(
        layer_dims=[30, 20, 15], gamma=0.05, mu=1e-3, tau=20, conv_tol=1e-12, seed=0
    )
    _, _, trace = train(ds, cfg)
    assert trace.records[-1].loss.total < trace.records[0].loss.total


def test_train_rejects_wrong_input_width():
    ds = small_dataset()
    cfg = TrainerConfig(layer_dims=[9, 5], gamma=0.05)
    with pytest.raises(InvalidInputError):
        train(ds, cfg)


def test_train_per_epoch_variant_runs():
    ds = small_dataset()
    cfg = TrainerConfig(
        layer_dims=[8, 5], gamma=0.05, tau=2, conv_tol=1e-12, seed=6,
        alternation="per_epoch",
    )
    _, c, trace = train(ds, cfg)
    assert trace.epochs_run == 2
    assert np.array_equal(np.diag(c), np.zeros(ds.x.shape[1]))


def test_step2_pass_cannot_increase_loss():
    # with the network frozen, re-solving each column exactly cannot
    # increase the lambda=0 objective
    rng = np.random.default_rng(7)
    h = normalize_columns(rng.standard_normal((6, 20)))
    gamma = 0.1
    gram = h.T @ h
    c = rng.standard_normal((20, 20)) * 0.1
    np.fill_diagonal(c, 0.0)
    params = init_network([6], "identity")
    before = compute_loss(params, h, c, gamma, 0.0).total
    for i in range(20):
        c[:, i] = sparse.solve_column(gram, i, gamma)
    after = compute_loss(params, h, c, gamma, 0.0).total
    assert after <= before + 1e-8


def test_infer_features_plain():
    rng = np.random.default_rng(8)
    params = init_network([4, 3], "tanh")
    params.layers[0].w = rng.standard_normal((3, 4))
    x = rng.standard_normal((4, 7))
    assert np.array_equal(infer_features(params, x, False), forward_batch(params, x))


def test_infer_features_post_linearize_collapses_affine():
    rng = np.random.default_rng(9)
    params = init_network([4, 3, 2], "tanh")
    for layer in params.layers:
        layer.w = rng.standard_normal(layer.w.shape)
        layer.b = rng.standard_normal(layer.b.shape)
    x = rng.standard_normal((4, 6))
    w1, b1 = params.layers[0].w, params.layers[0].b
    w2, b2 = params.layers[1].w, params.layers[1].b
    oracle = w2 @ (w1 @ x + b1[:, None]) + b2[:, None]
    assert np.max(np.abs(infer_features(params, x, True) - oracle)) <= 1e-12


def test_infer_features_zero_input_zero_bias():
    params = init_network([4, 3], "tanh")
    out = infer_features(params, np.zeros((4, 5)), True)
    assert np.array_equal(out, np.zeros((3, 5)))


def test_ssc_baseline_equals_m0_tau0_train():
    ds = small_dataset()
    base = ssc_baseline(ds, 0.05)
    cfg = TrainerConfig(layer_dims=[8], gamma=0.05, tau=0, seed=1)
    _, c, _ = train(ds, cfg)
    assert np.array_equal(base, c)
    assert np.array_equal(np.diag(base), np.zeros(ds.x.shape[1]))


def test_ssc_baseline_subspace_preserving_on_clean_data():
    spec = SynthSpec(3, 20, 3, 15, noise_sigma=0.0, seed=2)
    ds = gen_linear_subspaces(spec)
    ds = Dataset(x=normalize_columns(ds.x), labels=ds.labels)
    c = ssc_baseline(ds, 0.05)
    for i in range(ds.x.shape[1]):
        mass = np.abs(c[:, i])
        total = mass.sum()
        if total == 0:
            continue
        same = mass[ds.labels == ds.labels[i]].sum()
        assert same / total >= 0.95
