import math

import numpy as np
import pytest

import sfcdelay


def test_presets():
    assert sfcdelay.preset_names() == ["tandem1", "tandem2", "acyclic1", "acyclic2"]
    assert "stages" in sfcdelay.network_config("tandem1")


def test_mixture_statistics():
    mix = sfcdelay.Mixture([(1.0, 0.0, 1.0)])
    assert mix.cdf(0.0) == pytest.approx(0.5)
    assert mix.pdf(0.0) == pytest.approx(1.0 / math.sqrt(2.0 * math.pi))
    assert mix.upper_bound(0.05) == pytest.approx(1.6448536, abs=1e-6)
    assert mix.confidence_interval(0.95) == pytest.approx(1.959964, abs=1e-6)
    b = mix.bounds(0.05, 0.05, 0.95)
    assert b["d_lb"] < b["mmse"] < b["d_ub"]
    with pytest.raises(ValueError):
        sfcdelay.Mixture([(0.5, 0.0, 1.0)])


def test_simulation_and_dataset(tmp_path):
    data = sfcdelay.simulate("acyclic2", packets=3000, seed=4)
    assert data["b"].shape == (2700, 5)
    assert np.all(data["delay"] > 0)
    assert set(np.unique(data["path_id"])) <= {0, 1, 2}
    again = sfcdelay.simulate("acyclic2", packets=3000, seed=4)
    assert np.array_equal(data["delay"], again["delay"])

    path = tmp_path / "d.csv"
    assert sfcdelay.simulate_to_file("tandem1", str(path), packets=1100, warmup=100, seed=2) == 1000
    loaded = sfcdelay.read_dataset(str(path))
    assert loaded["b"].shape == (1000, 3)


def test_analytic_mixture():
    mix = sfcdelay.analytic_mixture("acyclic2", [6, 5, 15, 20, 10])
    weights = [w for w, _, _ in mix.components]
    means = [m for _, m, _ in mix.components]
    assert weights == pytest.approx([4 / 9, 1 / 3, 2 / 9])
    assert means == sorted(means)
    assert sfcdelay.seen_queue_lengths("tandem1", [6, 12, 13]) == [6, 11, 12]


def test_train_predict_roundtrip(tmp_path):
    rng = np.random.default_rng(0)
    b = rng.integers(0, 10, size=(2000, 1)).astype(float)
    y = 2.0 + b[:, 0] + rng.normal(size=2000)
    out = sfcdelay.train(b, y, hidden=[16], kernels=2, epochs=5, batch_size=128, seed=3)
    model = out["model"]
    assert len(out["loss_trace"]) == 5
    assert math.isfinite(out["holdout_nll"])
    mix = model.predict([4.0])
    assert sum(w for w, _, _ in mix.components) == pytest.approx(1.0)
    path = tmp_path / "m.txt"
    model.save(str(path))
    loaded = sfcdelay.Model.load(str(path))
    assert loaded.predict([4.0]).components == mix.components
    assert loaded.kernels == 2 and loaded.input_dim == 1


def test_admission_with_analytic_predictor():
    rep = sfcdelay.admission_experiment("tandem1", None, packets=5000, seed=1)
    for side in ("baseline", "controlled"):
        r = rep[side]
        assert r["offered"] == 4500
        assert r["admitted"] + r["dropped"] == r["offered"]
        assert 0.0 <= r["throughput"] <= 1.0
    assert rep["baseline"]["dropped"] == 0
