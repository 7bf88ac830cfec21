"""Smoke tests for the python bindings: each operation against a numpy oracle."""

import math

import numpy as np
import pytest

import pixelscene as pxs


def test_softmax_matches_numpy():
    rng = np.random.default_rng(1)
    scores = rng.normal(size=(5, 7, 4))
    probs = pxs.softmax_map(scores)
    e = np.exp(scores - scores.max(axis=2, keepdims=True))
    expected = e / e.sum(axis=2, keepdims=True)
    np.testing.assert_allclose(probs, expected, atol=1e-12)
    np.testing.assert_allclose(probs.sum(axis=2), 1.0, atol=1e-12)


def test_max_fuse_and_argmax_match_numpy():
    rng = np.random.default_rng(2)
    maps = [rng.normal(size=(6, 6, 3)) for _ in range(3)]
    fused = pxs.max_fuse(maps)
    np.testing.assert_array_equal(fused, np.maximum.reduce(maps))
    labels = pxs.argmax_label(fused)
    np.testing.assert_array_equal(labels, fused.argmax(axis=2).astype(np.uint8))


def test_resize_constant_map_stays_constant():
    scores = np.full((4, 5, 3), 2.5)
    out = pxs.resize_scores(scores, 9, 7, mode="bilinear")
    assert out.shape == (9, 7, 3)
    np.testing.assert_array_equal(out, np.full((9, 7, 3), 2.5))


def test_histogram_and_one_hot_match_numpy():
    rng = np.random.default_rng(3)
    labels = rng.integers(0, 5, size=(20, 20)).astype(np.uint8)
    labels[0, :] = 255  # ignore row
    hist = np.asarray(pxs.class_histogram(labels, 5))
    expected = np.bincount(labels[labels != 255].ravel(), minlength=5).astype(float)
    np.testing.assert_array_equal(hist, expected)

    bits = np.asarray(pxs.one_hot(labels, 5, 0.01))
    np.testing.assert_array_equal(bits, (expected > 0.01 * labels.size).astype(float))

    pyramid = np.asarray(pxs.spatial_pyramid(labels, 5))
    assert pyramid.shape == (25,)
    np.testing.assert_allclose(np.linalg.norm(pyramid[:5]), 1.0, atol=1e-12)


def test_kernels_against_closed_forms():
    x = np.array([0.5, 1.25, 0.0, 2.0])
    y = np.array([0.25, 0.0, 1.5, 2.0])
    assert pxs.kernel_eval("linear", x, y) == pytest.approx(float(x @ y))
    assert pxs.kernel_eval("intersection", x, y) == pytest.approx(
        float(np.minimum(x, y).sum())
    )
    assert pxs.kernel_eval("jensen_shannon", x, x) == pytest.approx(float(x.sum()))
    with pytest.raises(ValueError):
        pxs.kernel_eval("chi2", np.array([-1.0]), np.array([1.0]))


def test_svm_separates_blobs_and_round_trips(tmp_path):
    rng = np.random.default_rng(4)
    a = rng.normal(loc=[1.0, 1.0], scale=0.2, size=(30, 2))
    b = rng.normal(loc=[3.0, 3.0], scale=0.2, size=(30, 2))
    features = np.abs(np.vstack([a, b]))
    labels = np.array([0] * 30 + [1] * 30, dtype=np.int32)
    model = pxs.SvmModel.train(features, labels, kernel="chi2", C=1.0)
    hits = sum(model.predict(f)[0] == l for f, l in zip(features, labels))
    assert hits == 60

    path = tmp_path / "scene.pxsvm"
    model.save(str(path))
    loaded = pxs.SvmModel.load(str(path))
    assert loaded.kernel == "chi2"
    for f in features[:5]:
        assert loaded.predict(f)[0] == model.predict(f)[0]


def test_detection_and_ap_on_a_synthetic_mask():
    labels = np.zeros((16, 16), dtype=np.uint8)
    labels[2:6, 3:8] = 1
    labels[10:14, 9:15] = 1
    confidences = np.zeros((16, 16, 2))
    confidences[..., 1] = 0.8
    detections = pxs.detect_objects(labels, confidences, [1])
    assert len(detections) == 2
    boxes = sorted(det[1] for det in detections)
    assert boxes == [(3, 2, 8, 6), (9, 10, 15, 14)]
    assert all(det[2] == pytest.approx(0.8) for det in detections)

    components = pxs.connected_components((labels == 1).astype(np.uint8))
    assert len(components) == 2
    assert components[0][1].shape[1] == 2

    ranked = [(det[2], 0, i, det[1]) for i, det in enumerate(detections)]
    result = pxs.average_precision(ranked, [[b for b in boxes]])
    assert result["ap"] == 1.0
    assert pxs.mean_ap([result["ap"], None, 0.5]) == pytest.approx(0.75)


def test_seg_metrics_and_boxes():
    gt = np.zeros((8, 8), dtype=np.uint8)
    gt[:, 4:] = 1
    metrics = pxs.seg_metrics([gt], [gt], 2)
    assert metrics["pixel_accuracy"] == 1.0
    assert metrics["mean_iou"] == 1.0
    assert pxs.box_iou((0, 0, 10, 10), (5, 5, 15, 15)) == pytest.approx(1 / 7)
    assert pxs.scene_accuracy([1, 2, 3], [1, 2, 0]) == pytest.approx(2 / 3)


def test_poly_lr_schedule():
    assert pxs.poly_lr(0) == pytest.approx(0.001)
    assert pxs.poly_lr(20000) == 0.0
    assert pxs.poly_lr(10000) == pytest.approx(0.001 * 0.5**0.9)


def test_toynet_forward_and_checkpoint(tmp_path):
    net = pxs.ToyNet.random_init(num_classes=4, hidden_channels=6, seed=9)
    rng = np.random.default_rng(5)
    image = rng.integers(0, 256, size=(16, 16, 3)).astype(np.uint8)
    outputs = net.forward(image)
    assert len(outputs) == 3  # one per scale
    assert all(o.shape == (16, 16, 4) for o in outputs)

    path = tmp_path / "net.pxck"
    net.save(str(path))
    reloaded = pxs.ToyNet.load(str(path))
    np.testing.assert_array_equal(reloaded.forward(image)[0], outputs[0])
    with pytest.raises(ValueError):
        pxs.ToyNet.load(str(tmp_path / "missing.pxck"))


def test_dataset_generation_and_training(tmp_path):
    info = pxs.generate_toyrooms(
        str(tmp_path / "data"), train_count=12, test_count=4, seed=3
    )
    assert info["num_classes"] == 8
    labels = pxs.read_label_png(str(tmp_path / "data" / "train" / "lab_00000.png"))
    assert labels.shape == (64, 64)
    assert set(np.unique(labels)) <= set(range(8)) | {255}

    net = pxs.ToyNet.random_init(num_classes=8, seed=1)
    trained, trace = pxs.train_toynet(
        net, info["train_manifest"], iterations=5, crop_size=48, seed=2
    )
    assert len(trace) == 5
    assert all(math.isfinite(v) for v in trace)


def test_score_map_files_round_trip(tmp_path):
    rng = np.random.default_rng(6)
    scores = rng.normal(size=(5, 4, 3)).astype(np.float32).astype(np.float64)
    path = tmp_path / "scores.pxsm"
    pxs.write_scoremap(str(path), scores)
    np.testing.assert_array_equal(pxs.read_scoremap(str(path)), scores)
