import json

import numpy as np
import pytest

from morphkit.errors import DataError
from morphkit.svm import LinearSvmModel, SvmConfig, train_svm


def two_blobs(rng, n=40, gap=3.0):
    neg = rng.normal(0.0, 0.5, size=(n, 2))
    pos = rng.normal(gap, 0.5, size=(n, 2))
    x = np.vstack([neg, pos])
    y = np.array([-1.0] * n + [1.0] * n)
    return x, y


class TestConfig:
    def test_defaults_valid(self):
        SvmConfig().validate()

    @pytest.mark.parametrize("kw", [{"C": 0.0}, {"C": -1.0}, {"epochs": 0}])
    def test_invalid(self, kw):
        with pytest.raises(DataError):
            SvmConfig(**kw).validate()


class TestTraining:
    def test_separable_blobs_classified(self):
        rng = np.random.default_rng(0)
        x, y = two_blobs(rng)
        model = train_svm(x, y, SvmConfig(epochs=20, seed=1))
        scores = model.decision(x)
        assert np.all(np.sign(scores) == y)

    def test_update_rule_matches_manual_simulation(self):
        rng = np.random.default_rng(1)
        x, y = two_blobs(rng, n=5)
        cfg = SvmConfig(C=2.0, epochs=3, seed=7, standardize=False)
        model = train_svm(x, y, cfg)

        n = len(y)
        lam = 1.0 / (cfg.C * n)
        sim = np.random.default_rng(cfg.seed)
        w = np.zeros(2)
        b = 0.0
        t = 0
        for _ in range(cfg.epochs):
            for i in sim.permutation(n):
                t += 1
                eta = 1.0 / (lam * t)
                violated = y[i] * (x[i] @ w + b) < 1.0
                w = w * (1.0 - eta * lam)
                if violated:
                    w = w + eta * y[i] * x[i]
                    b = b + eta * y[i]
        assert np.array_equal(model.weights, w)
        assert model.bias == b

    def test_bitwise_deterministic(self):
        rng = np.random.default_rng(2)
        x, y = two_blobs(rng)
        m1 = train_svm(x, y, SvmConfig(seed=3))
        m2 = train_svm(x, y, SvmConfig(seed=3))
        assert np.array_equal(m1.weights, m2.weights)
        assert m1.bias == m2.bias
        m3 = train_svm(x, y, SvmConfig(seed=4))
        assert not np.array_equal(m1.weights, m3.weights)

    def test_standardization_stored(self):
        rng = np.random.default_rng(5)
        x, y = two_blobs(rng)
        x[:, 1] *= 1000.0  # wildly different scales
        model = train_svm(x, y, SvmConfig(epochs=20, seed=0))
        assert model.mean is not None
        assert np.allclose(model.mean, x.mean(axis=0), atol=1e-12)
        assert np.all(np.sign(model.decision(x)) == y)

    def test_constant_feature_does_not_blow_up(self):
        rng = np.random.default_rng(6)
        x, y = two_blobs(rng)
        x = np.column_stack([x, np.full(len(y), 3.3)])
        model = train_svm(x, y, SvmConfig(epochs=10, seed=0))
        assert np.all(np.isfinite(model.weights))

    def test_single_class_rejected(self):
        x = np.zeros((4, 2))
        with pytest.raises(DataError):
            train_svm(x, [1.0, 1.0, 1.0, 1.0])

    def test_bad_labels_rejected(self):
        x = np.zeros((2, 2))
        with pytest.raises(DataError):
            train_svm(x, [0.0, 1.0])

    def test_label_count_mismatch(self):
        with pytest.raises(DataError):
            train_svm(np.zeros((3, 2)), [1.0, -1.0])

    def test_non_finite_features(self):
        x = np.zeros((2, 2))
        x[0, 0] = np.nan
        with pytest.raises(DataError):
            train_svm(x, [1.0, -1.0])


class TestDecision:
    def test_linear_form(self):
        model = LinearSvmModel(
            weights=np.array([2.0, -1.0]), bias=0.5, feature_name="f",
            mean=None, scale=None, config=SvmConfig(),
        )
        assert model.decision(np.array([1.0, 1.0])) == pytest.approx(1.5)
        out = model.decision(np.array([[1.0, 0.0], [0.0, 1.0]]))
        assert out == pytest.approx([2.5, -0.5])

    def test_dim_mismatch(self):
        model = LinearSvmModel(
            weights=np.zeros(3), bias=0.0, feature_name="f",
            mean=None, scale=None, config=SvmConfig(),
        )
        with pytest.raises(DataError):
            model.decision(np.zeros(4))


class TestModelFile:
    def test_round_trip_bitwise(self, tmp_path):
        rng = np.random.default_rng(7)
        x, y = two_blobs(rng)
        model = train_svm(x, y, SvmConfig(C=0.5, epochs=5, seed=11), "lbp")
        p = tmp_path / "model.json"
        model.save(p)
        back = LinearSvmModel.load(p)
        assert np.array_equal(back.weights, model.weights)
        assert back.bias == model.bias
        assert np.array_equal(back.mean, model.mean)
        assert np.array_equal(back.scale, model.scale)
        assert back.feature_name == "lbp"
        assert back.config == model.config
        assert np.array_equal(back.decision(x), model.decision(x))

    def test_no_standardize_round_trip(self, tmp_path):
        rng = np.random.default_rng(8)
        x, y = two_blobs(rng)
        model = train_svm(x, y, SvmConfig(standardize=False))
        p = tmp_path / "m.json"
        model.save(p)
        back = LinearSvmModel.load(p)
        assert back.mean is None and back.scale is None

    def test_deterministic_bytes(self, tmp_path):
        rng = np.random.default_rng(9)
        x, y = two_blobs(rng)
        model = train_svm(x, y, SvmConfig(seed=1))
        p1, p2 = tmp_path / "a.json", tmp_path / "b.json"
        model.save(p1)
        model.save(p2)
        assert p1.read_bytes() == p2.read_bytes()

    def test_load_missing(self, tmp_path):
        with pytest.raises(DataError):
            LinearSvmModel.load(tmp_path / "no.json")

    def test_load_malformed_json(self, tmp_path):
        p = tmp_path / "m.json"
        p.write_text("{broken")
        with pytest.raises(DataError):
            LinearSvmModel.load(p)

    def test_load_missing_field(self, tmp_path):
        p = tmp_path / "m.json"
        p.write_text(json.dumps({"kind": "linear-svm"}))
        with pytest.raises(DataError):
            LinearSvmModel.load(p)

    def test_load_wrong_kind(self, tmp_path):
        rng = np.random.default_rng(10)
        x, y = two_blobs(rng)
        model = train_svm(x, y)
        p = tmp_path / "m.json"
        model.save(p)
        doc = json.loads(p.read_text())
        doc["kind"] = "rbf-svm"
        p.write_text(json.dumps(doc))
        with pytest.raises(DataError):
            LinearSvmModel.load(p)

    def test_load_truncated_weights(self, tmp_path):
        rng = np.random.default_rng(11)
        x, y = two_blobs(rng)
        model = train_svm(x, y)
        p = tmp_path / "m.json"
        model.save(p)
        doc = json.loads(p.read_text())
        doc["weights"] = doc["weights"][: len(doc["weights"]) // 2]
        p.write_text(json.dumps(doc))
        with pytest.raises(DataError):
            LinearSvmModel.load(p)
