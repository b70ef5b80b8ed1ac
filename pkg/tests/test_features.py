import numpy as np
import pytest
from scipy import ndimage

from tsdtrack.box import BoundingBox
from tsdtrack.features import (
    FeatureError, cn_index, extract_features, extract_patch, load_cn_table, sample_window,
)
from tsdtrack.spectral import hann_window


@pytest.fixture
def cn_table(tmp_path, rng):
    table = rng.random((32768, 10))
    path = tmp_path / "cn.bin"
    table.astype("<f8").tofile(path)
    return path, table


def test_exact_crop_at_unit_scale(rng):
    img = rng.integers(0, 256, (40, 50), dtype=np.uint8)
    box = BoundingBox.from_xywh(10, 5, 8, 6)
    patch = extract_patch(img, box, 1.0)
    np.testing.assert_array_equal(patch, img[5:11, 10:18].astype(float))


def test_corner_box_replicates_edges(rng):
    img = rng.integers(0, 256, (30, 30, 3), dtype=np.uint8)
    patch = extract_patch(img, BoundingBox(0.0, 0.0, 10, 10), 1.0)
    assert patch.shape == (10, 10, 3)
    np.testing.assert_array_equal(patch[:5, :5], np.broadcast_to(img[0, 0], (5, 5, 3)))
    np.testing.assert_array_equal(patch[:5, 5:], np.broadcast_to(img[0, :5], (5, 5, 3)))


def test_padded_patch_matches_independent_resampler():
    yy, xx = np.mgrid[0:120, 0:160]
    img = np.clip(0.9 * xx + 0.6 * yy, 0, 255).astype(np.uint8)
    box = BoundingBox(71.3, 52.6, 12.0, 9.0)
    out = (60, 80)
    patch = extract_patch(img, box, 5.0, out)
    # independent mapping: continuous coordinate of each output pixel center
    ph, pw = 5.0 * box.h, 5.0 * box.w
    rows = box.cy + ((np.arange(out[0]) + 0.5) / out[0] - 0.5) * ph - 0.5
    cols = box.cx + ((np.arange(out[1]) + 0.5) / out[1] - 0.5) * pw - 0.5
    rr, cc = np.meshgrid(rows, cols, indexing="ij")
    oracle = ndimage.map_coordinates(img.astype(float), [rr, cc], order=1, mode="nearest")
    assert np.max(np.abs(patch - oracle)) <= 1.0


def test_degenerate_box():
    with pytest.raises(ValueError):
        extract_patch(np.zeros((10, 10)), BoundingBox(5, 5, 0, 3))


def test_uniform_mid_gray_is_zero():
    feat = extract_features(np.full((32, 32), 127.5), "gray", 4)
    assert feat.shape == (8, 8, 1)
    np.testing.assert_allclose(feat, 0.0, atol=1e-12)
    feat = extract_features(np.full((32, 32), 128.0), "gray", 4)
    assert np.max(np.abs(feat)) < 0.003


def test_checkerboard_cell_means():
    yy, xx = np.mgrid[0:24, 0:28]
    patch = np.where(((yy // 3) + (xx // 3)) % 2 == 0, 255.0, 0.0)
    feat = extract_features(patch, "gray", 4, window=False)[..., 0]
    oracle = np.zeros((6, 7))
    for i in range(6):
        for j in range(7):
            total = 0.0
            for dy in range(4):
                for dx in range(4):
                    total += patch[4 * i + dy, 4 * j + dx] / 255.0 - 0.5
            oracle[i, j] = total / 16
    np.testing.assert_allclose(feat, oracle, atol=1e-12)


def test_pure_color_cn_lookup(cn_table):
    path, table = cn_table
    rgb = np.array([200, 17, 90])
    patch = np.broadcast_to(rgb, (20, 24, 3)).astype(float)
    feat = extract_features(patch, "cn", 4, load_cn_table(path))
    row = table[(200 // 8) * 1024 + (17 // 8) * 32 + 90 // 8]
    np.testing.assert_allclose(feat, hann_window(5, 6)[..., None] * row[None, None, :])


def test_cn_index_corners():
    assert cn_index([0, 0, 0]) == 0
    assert cn_index([255, 255, 255]) == 32767
    assert cn_index([8, 0, 0]) == 1024 and cn_index([0, 8, 0]) == 32 and cn_index([0, 0, 8]) == 1


def test_boundary_cells_zero_and_dims_agree(cn_table, rng):
    patch = rng.integers(0, 256, (40, 48, 3)).astype(float)
    gray = extract_features(patch, "gray", 4)
    cn = extract_features(patch, "cn", 4, load_cn_table(cn_table[0]))
    assert gray.shape[:2] == cn.shape[:2] == (10, 12)
    for f in (gray, cn):
        assert np.all(f[0] == 0) and np.all(f[-1] == 0)
        assert np.all(f[:, 0] == 0) and np.all(f[:, -1] == 0)


def test_deterministic(rng):
    patch = rng.integers(0, 256, (40, 40, 3)).astype(float)
    a = extract_features(patch, "gray", 4)
    b = extract_features(patch.copy(), "gray", 4)
    assert a.tobytes() == b.tobytes()


def test_feature_errors(rng):
    with pytest.raises(FeatureError):
        extract_features(np.zeros((8, 8, 3)), "cn", 4)
    with pytest.raises(FeatureError):
        extract_features(np.zeros((10, 8)), "gray", 4)
    with pytest.raises(FeatureError):
        extract_features(np.zeros((8, 8)), "hog", 4)


def test_cn_table_loading(tmp_path, cn_table):
    path, table = cn_table
    loaded = load_cn_table(path)
    np.testing.assert_array_equal(loaded, table)
    assert not loaded.flags.writeable
    bad = tmp_path / "short.bin"
    np.zeros(100).tofile(bad)
    with pytest.raises(FeatureError):
        load_cn_table(bad)


def test_sample_window_downscale_shape(rng):
    img = rng.integers(0, 256, (100, 100)).astype(np.uint8)
    out = sample_window(img, (50.0, 50.0), (200.0, 200.0), (40, 40))
    assert out.shape == (40, 40) and out.dtype == np.float64
