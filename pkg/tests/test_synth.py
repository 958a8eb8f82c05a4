import numpy as np

from dtaopt.synth import generate_sigmoid_data


def test_generator_is_deterministic():
    a = generate_sigmoid_data(n_train=50, n_test=20, d=3, seed=4)
    b = generate_sigmoid_data(n_train=50, n_test=20, d=3, seed=4)
    assert (a.train.to_dense() == b.train.to_dense()).all()
    assert (a.train.labels == b.train.labels).all()
    assert (a.eta_test == b.eta_test).all()


def test_positive_rate_calibration():
    rates = []
    for seed in range(6):
        pair = generate_sigmoid_data(n_train=4000, n_test=10, seed=seed, positive_rate=0.1)
        rates.append(pair.eta_train.mean())
    assert abs(np.mean(rates) - 0.1) < 0.02


def test_probabilities_strictly_inside_unit_interval():
    pair = generate_sigmoid_data(n_train=200, n_test=100, seed=0)
    for eta in (pair.eta_train, pair.eta_test):
        assert eta.min() > 0.0 and eta.max() < 1.0
    assert np.linalg.norm(pair.weights) > 0.0
