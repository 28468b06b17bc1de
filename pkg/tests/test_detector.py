import numpy as np
import pytest

from _oracles import central_difference
from ganspectra.detector import (
    FeatureConfig,
    Metrics,
    Model,
    TrainConfig,
    bce_gradients,
    bce_loss,
    classify,
    evaluate,
    extract_features,
    init_weights,
    load_model,
    predict,
    predict_batch,
    save_model,
    train,
    write_metrics_csv,
    _forward,
)
from ganspectra.rng import SplitMix64


def toy_blobs(n_per_class=50, seed=1, spread=0.5):
    """Two well-separated Gaussian blobs in 2D."""
    rng = SplitMix64(seed)
    a = rng.normals(2 * n_per_class).reshape(n_per_class, 2) * spread + 2.0
    b = rng.normals(2 * n_per_class).reshape(n_per_class, 2) * spread - 2.0
    x = np.vstack([a, b])
    y = np.array([0] * n_per_class + [1] * n_per_class)
    return x, y


class TestExtractFeatures:
    def test_constant_image_zero_vector(self):
        fc = FeatureConfig(mode="spectrum", input_side=8)
        out = extract_features(np.full((16, 16, 1), 0.7), fc)
        assert out.shape == (64,)
        assert not out.any()

    def test_pixel_mode_is_affine_map(self):
        rng = SplitMix64(2)
        img = rng.randoms(64).reshape(8, 8, 1)
        fc = FeatureConfig(mode="pixel", input_side=8)
        out = extract_features(img, fc)
        assert np.allclose(out, 2.0 * img.ravel() - 1.0, atol=1e-12)

    def test_grayscale_conversion_applied(self):
        rng = SplitMix64(3)
        img = rng.randoms(8 * 8 * 3).reshape(8, 8, 3)
        fc = FeatureConfig(mode="pixel", input_side=8, grayscale=True)
        out = extract_features(img, fc)
        gray = 0.299 * img[:, :, 0] + 0.587 * img[:, :, 1] + 0.114 * img[:, :, 2]
        assert np.allclose(out, 2.0 * gray.ravel() - 1.0, atol=1e-12)
        rgb = extract_features(img, FeatureConfig(mode="pixel", input_side=8, grayscale=False))
        assert rgb.size == 3 * 64

    def test_high_band_mean_rises_after_zero_insertion(self):
        # artifact direction: the replicated spectrum lifts the high band
        # of the normalized feature above the natural noise floor
        from ganspectra.harness import synth_corpus
        from ganspectra.upsampler import zero_insert

        img = synth_corpus(4, 16, SplitMix64(31))[3]
        fc = FeatureConfig(mode="spectrum", input_side=8, band="high")
        feat_zi = extract_features(zero_insert(img, 2), fc)
        feat = extract_features(img, fc)
        assert feat_zi.mean() > feat.mean()

    def test_too_small_image_raises(self):
        fc = FeatureConfig(mode="pixel", input_side=64)
        with pytest.raises(ValueError, match="smaller than"):
            extract_features(np.ones((32, 32, 1)), fc)

    def test_deterministic(self):
        rng = SplitMix64(4)
        img = rng.randoms(16 * 16).reshape(16, 16, 1)
        fc = FeatureConfig(mode="spectrum", input_side=8)
        assert np.array_equal(extract_features(img, fc), extract_features(img, fc))


class TestTrain:
    def test_separable_blobs_perfect_accuracy(self):
        x, y = toy_blobs()
        for kind in ("logistic", "mlp1"):
            model = train(x, y, TrainConfig(seed=5), kind=kind, hidden_units=8)
            m = evaluate(model, x, y)
            assert m.accuracy == 1.0, kind

    def test_label_flip_negates_logistic_predictions(self):
        x, y = toy_blobs(seed=6)
        a = train(x, y, TrainConfig(seed=7), kind="logistic")
        b = train(x, 1 - y, TrainConfig(seed=7), kind="logistic")
        pa = predict_batch(a, x)
        pb = predict_batch(b, x)
        assert np.allclose(pa + pb, 1.0, atol=1e-9)
        mask = np.abs(pa - 0.5) > 1e-6
        assert np.array_equal(classify(pa)[mask], 1 - classify(pb)[mask])

    def test_same_seed_bit_identical(self):
        x, y = toy_blobs(seed=8)
        a = train(x, y, TrainConfig(seed=9), kind="mlp1", hidden_units=8)
        b = train(x, y, TrainConfig(seed=9), kind="mlp1", hidden_units=8)
        for name in a.weights:
            assert np.array_equal(a.weights[name], b.weights[name])

    def test_loss_decreases_on_separable_data(self):
        x, y = toy_blobs(seed=10)
        model = train(x, y, TrainConfig(seed=11, epochs=10), kind="logistic")
        losses = model.epoch_losses
        assert all(losses[i + 1] < losses[i] + 1e-9 for i in range(len(losses) - 1))

    def test_single_class_raises(self):
        x, _ = toy_blobs()
        with pytest.raises(ValueError, match="both classes"):
            train(x, np.zeros(x.shape[0]), TrainConfig())

    def test_mismatched_lengths_raise(self):
        with pytest.raises(ValueError, match="labels"):
            train(np.ones((4, 3)), np.array([0, 1]), TrainConfig())

    def test_records_final_loss(self):
        x, y = toy_blobs(seed=12)
        model = train(x, y, TrainConfig(seed=12))
        assert model.final_train_loss == model.epoch_losses[-1]
        assert np.isfinite(model.final_train_loss)


class TestPredict:
    def test_zero_model_is_half(self):
        model = Model("logistic", {"w": np.zeros(3), "b": np.zeros(1)}, FeatureConfig(), 0, 0, 0.0)
        assert predict(model, np.ones(3)) == 0.5

    def test_probability_monotone_in_active_weight(self):
        fc = FeatureConfig()
        x = np.array([1.0, 0.0])
        probs = [
            predict(Model("logistic", {"w": np.array([w, 0.0]), "b": np.zeros(1)}, fc, 0, 0, 0.0), x)
            for w in (-1.0, 0.0, 1.0, 2.0)
        ]
        assert probs == sorted(probs)
        assert len(set(probs)) == len(probs)

    def test_length_mismatch_raises(self):
        model = Model("logistic", {"w": np.zeros(3), "b": np.zeros(1)}, FeatureConfig(), 0, 0, 0.0)
        with pytest.raises(ValueError, match="length"):
            predict(model, np.ones(4))

    def test_tie_goes_to_fake(self):
        assert classify(np.array([0.5, 0.4999, 0.5001])).tolist() == [1, 0, 1]


class TestGradients:
    def test_bce_gradients_match_finite_differences(self):
        rng = SplitMix64(13)
        for kind, hidden in [("logistic", 0), ("mlp1", 5)]:
            for trial in range(3):
                dim = 4
                n = 6
                w_rng = SplitMix64(100 + trial)
                weights = init_weights(kind, dim, hidden, w_rng)
                if kind == "logistic":
                    weights["w"] = w_rng.randoms(dim) - 0.5  # nonzero point
                x = rng.randoms(n * dim).reshape(n, dim) * 2 - 1
                y = (rng.randoms(n) > 0.5).astype(float)
                grads = bce_gradients(kind, weights, x, y)
                for name, warr in weights.items():
                    def loss_at(v, name=name):
                        trial_w = {k: a.copy() for k, a in weights.items()}
                        trial_w[name] = v.reshape(warr.shape)
                        p, _ = _forward(kind, trial_w, x)
                        return bce_loss(p, y)

                    fd = central_difference(loss_at, warr)
                    denom = max(np.max(np.abs(fd)), 1e-8)
                    assert np.max(np.abs(grads[name] - fd)) / denom <= 1e-3, (kind, name)


class TestEvaluate:
    def test_half_model_on_balanced_set(self):
        # constant 0.5 output classifies everything fake via the tie-break
        model = Model("logistic", {"w": np.zeros(2), "b": np.zeros(1)}, FeatureConfig(), 0, 0, 0.0)
        x = np.ones((10, 2))
        y = np.array([0, 1] * 5)
        m = evaluate(model, x, y)
        assert m.accuracy == 0.5
        assert m.fake_acc == 1.0 and m.real_acc == 0.0

    def test_counts_sum(self):
        x, y = toy_blobs(seed=14)
        model = train(x, y, TrainConfig(seed=14))
        m = evaluate(model, x, y)
        assert m.n_real + m.n_fake == m.n == y.size
        assert 0 <= m.correct <= m.n

    def test_empty_set_raises(self):
        model = Model("logistic", {"w": np.zeros(2), "b": np.zeros(1)}, FeatureConfig(), 0, 0, 0.0)
        with pytest.raises(ValueError, match="empty"):
            evaluate(model, np.empty((0, 2)), np.empty(0))


class TestFeatureModeContract:
    def test_artifacts_live_in_frequency_space(self):
        # reconstruction-trained pipeline: pixel statistics nearly match,
        # high-band spectrum statistics split the classes
        from ganspectra.harness import synth_corpus
        from ganspectra.simulator import SimulatorConfig, fit, reconstruct

        corpus = synth_corpus(8, 32, SplitMix64(21))
        cfg = SimulatorConfig(
            stages=2, kernel_size=3, upsampler_kind="transposed",
            reg_weight=0.0, fit_iterations=400, learning_rate=0.01, seed=4,
        )
        state = fit(cfg, corpus)
        fakes = [reconstruct(state, im) for im in corpus]
        fc_pix = FeatureConfig(mode="pixel", input_side=16)
        fc_high = FeatureConfig(mode="spectrum", input_side=16, band="high")
        pix_gap = abs(
            np.mean([extract_features(im, fc_pix) for im in corpus])
            - np.mean([extract_features(im, fc_pix) for im in fakes])
        )
        spec_gap = np.mean([extract_features(im, fc_high) for im in fakes]) - np.mean(
            [extract_features(im, fc_high) for im in corpus]
        )
        assert pix_gap < 0.01
        assert spec_gap > 0.0


class TestModelIO:
    def test_roundtrip_logistic(self, tmp_path):
        x, y = toy_blobs(seed=15)
        model = train(x, y, TrainConfig(seed=15), kind="logistic")
        path = tmp_path / "m.bin"
        save_model(path, model)
        back = load_model(path)
        assert back.kind == "logistic"
        assert back.feature_config == model.feature_config
        assert back.seed == model.seed and back.epochs == model.epochs
        p0 = predict_batch(model, x)
        p1 = predict_batch(back, x)
        assert np.allclose(p0, p1, atol=1e-5)  # float32 weight storage

    def test_roundtrip_mlp(self, tmp_path):
        x, y = toy_blobs(seed=16)
        fc = FeatureConfig(mode="spectrum", input_side=8, band="mid", grayscale=False)
        model = train(x, y, TrainConfig(seed=16), kind="mlp1", hidden_units=8, feature_config=fc)
        path = tmp_path / "m.bin"
        save_model(path, model)
        back = load_model(path)
        assert back.kind == "mlp1" and back.hidden_units == 8
        assert back.feature_config == fc
        assert back.weights["w1"].shape == (2, 8)
        assert np.allclose(predict_batch(back, x), predict_batch(model, x), atol=1e-5)


class TestMetricsCsv:
    def test_format(self, tmp_path):
        m = Metrics(n=4, n_real=2, n_fake=2, real_correct=2, fake_correct=1)
        path = tmp_path / "metrics.csv"
        write_metrics_csv(path, [("exp", "test", m)])
        text = path.read_text()
        assert text == (
            "experiment,split,accuracy,real_acc,fake_acc,n\n"
            "exp,test,0.750000,1.000000,0.500000,4\n"
        )
