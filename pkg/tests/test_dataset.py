"""Image loading, centering, stratified splits, and basis serialization."""

import math
import struct

import numpy as np
import pytest

from quatpca import (
    FitParams,
    FormatError,
    InvalidDataset,
    InvalidParameter,
    IoError,
    QMatrix,
    SampleSet,
    center,
    export_image,
    fit,
    load_basis,
    load_dataset,
    save_basis,
    split,
)
from conftest import ppm_bytes, random_qmatrix, random_rgb, write_image_tree


@pytest.fixture
def tree(tmp_path, rng):
    arrays = {
        "alice": [random_rgb(rng, 5, 4) for _ in range(4)],
        "bob": [random_rgb(rng, 5, 4) for _ in range(6)],
    }
    write_image_tree(tmp_path, arrays)
    return tmp_path, arrays


# -- loading ------------------------------------------------------------


def test_load_dataset_pixels_and_labels(tree):
    root, arrays = tree
    ss = load_dataset(root)
    assert len(ss) == 10
    assert ss.shape == (5, 4)
    assert ss.classes() == ["alice", "bob"]
    assert ss.labels() == ["alice"] * 4 + ["bob"] * 6
    first = ss.samples[0]
    assert first.image.is_pure
    expected = arrays["alice"][0].astype(np.float64).transpose(2, 0, 1) / 255.0
    assert np.allclose(first.image.data[1:], expected)
    assert first.source.endswith("img00.ppm")


def test_load_dataset_sorted_order(tmp_path, rng):
    # written out of order on purpose; loading must sort by name
    (tmp_path / "zeta").mkdir()
    (tmp_path / "alpha").mkdir()
    for name in ("b.ppm", "a.ppm"):
        (tmp_path / "zeta" / name).write_bytes(ppm_bytes(random_rgb(rng, 2, 2)))
        (tmp_path / "alpha" / name).write_bytes(ppm_bytes(random_rgb(rng, 2, 2)))
    ss = load_dataset(tmp_path)
    assert ss.labels() == ["alpha", "alpha", "zeta", "zeta"]
    assert [s.source.split("/")[-1] for s in ss.samples] == ["a.ppm", "b.ppm"] * 2


def test_load_dataset_ignores_other_files(tmp_path, rng):
    d = tmp_path / "only"
    d.mkdir()
    (d / "img.ppm").write_bytes(ppm_bytes(random_rgb(rng, 2, 2)))
    (d / "notes.txt").write_text("not an image")
    assert len(load_dataset(tmp_path)) == 1


def test_load_dataset_uppercase_suffix(tmp_path, rng):
    d = tmp_path / "c"
    d.mkdir()
    (d / "IMG.PPM").write_bytes(ppm_bytes(random_rgb(rng, 2, 2)))
    assert len(load_dataset(tmp_path)) == 1


def test_load_dataset_rejects_mixed_dimensions(tmp_path, rng):
    d = tmp_path / "c"
    d.mkdir()
    (d / "a.ppm").write_bytes(ppm_bytes(random_rgb(rng, 2, 2)))
    (d / "b.ppm").write_bytes(ppm_bytes(random_rgb(rng, 3, 2)))
    with pytest.raises(InvalidDataset):
        load_dataset(tmp_path)


def test_load_dataset_error_cases(tmp_path):
    with pytest.raises(IoError):
        load_dataset(tmp_path / "missing")
    with pytest.raises(InvalidDataset):
        load_dataset(tmp_path)  # no class subdirectories
    (tmp_path / "empty").mkdir()
    with pytest.raises(InvalidDataset):
        load_dataset(tmp_path)  # subdirectory without images


def test_png_round_trip(tmp_path, rng):
    d = tmp_path / "c"
    d.mkdir()
    arr = random_rgb(rng, 6, 3)
    img = QMatrix(np.concatenate(
        [np.zeros((1, 6, 3)), arr.astype(np.float64).transpose(2, 0, 1) / 255.0]))
    export_image(img, d / "x.png")
    ss = load_dataset(tmp_path)
    assert np.array_equal(ss.samples[0].image.data, img.data)


# -- PPM details --------------------------------------------------------


def test_ppm_header_comments(tmp_path):
    raster = bytes(range(2 * 1 * 3))
    payload = b"P6\n# width and height\n1 2\n# depth\n255\n" + raster
    d = tmp_path / "c"
    d.mkdir()
    (d / "x.ppm").write_bytes(payload)
    ss = load_dataset(tmp_path)
    assert ss.shape == (2, 1)


@pytest.mark.parametrize("payload", [
    b"P5\n2 2\n255\n" + bytes(12),            # wrong magic
    b"P6\n2 2\n65535\n" + bytes(24),          # unsupported depth
    b"P6\n2 2\n255\n" + bytes(5),             # truncated raster
    b"P6\n2 two\n255\n" + bytes(12),          # malformed header token
    b"P6\n2 2 255",                           # header ends early
])
def test_ppm_malformed_files(tmp_path, payload):
    d = tmp_path / "c"
    d.mkdir()
    (d / "x.ppm").write_bytes(payload)
    with pytest.raises(IoError):
        load_dataset(tmp_path)


def test_export_reproduces_canonical_ppm_bytes(tree, tmp_path):
    root, arrays = tree
    ss = load_dataset(root)
    out = tmp_path / "out.ppm"
    export_image(ss.samples[0].image, out)
    assert out.read_bytes() == ppm_bytes(arrays["alice"][0])


def test_export_clips_out_of_range(tmp_path):
    data = np.zeros((4, 1, 1))
    data[1:, 0, 0] = [2.0, -1.0, 0.5]
    export_image(QMatrix(data), tmp_path / "c.ppm")
    raster = (tmp_path / "c.ppm").read_bytes()[-3:]
    assert list(raster) == [255, 0, 128]


def test_export_rejects_unknown_suffix(tmp_path):
    with pytest.raises(IoError):
        export_image(QMatrix.zeros(1, 1), tmp_path / "x.bmp")


# -- centering ----------------------------------------------------------


def test_center_removes_mean(rng):
    mats = [random_qmatrix(rng, 3, 4) for _ in range(5)]
    ss = center(SampleSet.build([(str(t), F) for t, F in enumerate(mats)]))
    assert ss.centered
    stacked = np.mean([F.data for F in ss.images()], axis=0)
    assert np.allclose(stacked, 0.0, atol=1e-15)
    mean = np.mean([F.data for F in mats], axis=0)
    assert np.allclose(ss.mean.data, mean)
    assert ss.images()[0].allclose(mats[0] - ss.mean, tol=1e-15)


def test_center_idempotent(rng):
    ss = center(SampleSet.build([("a", random_qmatrix(rng, 2, 2))]))
    assert center(ss) is ss


def test_center_empty_set_rejected(rng):
    ss = SampleSet.build([("a", random_qmatrix(rng, 2, 2))]).subset([])
    with pytest.raises(InvalidDataset):
        center(ss)


def test_sampleset_rejects_mixed_shapes(rng):
    with pytest.raises(InvalidDataset):
        SampleSet.build([("a", random_qmatrix(rng, 2, 2)),
                         ("b", random_qmatrix(rng, 3, 2))])


def test_subset_and_by_class(rng):
    ss = SampleSet.build([("a", random_qmatrix(rng, 2, 2)),
                          ("b", random_qmatrix(rng, 2, 2)),
                          ("a", random_qmatrix(rng, 2, 2))])
    assert ss.by_class() == {"a": [0, 2], "b": [1]}
    sub = ss.subset([2, 0])
    assert sub.labels() == ["a", "a"]


# -- splits -------------------------------------------------------------


def build_labeled(rng, counts):
    labeled = []
    for label, count in counts.items():
        labeled.extend((label, random_qmatrix(rng, 2, 2)) for _ in range(count))
    return SampleSet.build(labeled)


def test_split_standard_fractions(rng):
    ss = build_labeled(rng, {"a": 10, "b": 10})
    train, val, test = split(ss, (0.8, 0.1, 0.1), seed=3)
    assert len(train) == 16 and len(val) == 2 and len(test) == 2
    for part in (train, val, test):
        counts = {lab: len(ix) for lab, ix in part.by_class().items()}
        assert counts["a"] == counts["b"]


def test_split_minimum_one_for_nonzero_fraction(rng):
    ss = build_labeled(rng, {"a": 3})
    train, val, test = split(ss, (0.5, 0.25, 0.25), seed=0)
    assert (len(train), len(val), len(test)) == (1, 1, 1)


def test_split_zero_fraction_gets_nothing(rng):
    ss = build_labeled(rng, {"a": 5, "b": 5})
    train, val, test = split(ss, (0.9, 0.0, 0.1), seed=1)
    assert len(val) == 0
    assert len(train) == 8 and len(test) == 2


def test_split_without_train_gives_leftovers_to_largest(rng):
    ss = build_labeled(rng, {"a": 5})
    train, val, test = split(ss, (0.0, 0.5, 0.5), seed=0)
    assert len(train) == 0
    assert (len(val), len(test)) == (3, 2)


def test_split_all_to_test(rng):
    ss = build_labeled(rng, {"a": 5})
    train, val, test = split(ss, (0.0, 0.0, 1.0), seed=0)
    assert (len(train), len(val), len(test)) == (0, 0, 5)


def test_split_deterministic_and_disjoint(rng):
    ss = build_labeled(rng, {"a": 7, "b": 9})
    parts1 = split(ss, (0.6, 0.2, 0.2), seed=42)
    parts2 = split(ss, (0.6, 0.2, 0.2), seed=42)
    for p1, p2 in zip(parts1, parts2):
        assert p1.labels() == p2.labels()
        assert all(np.array_equal(a.image.data, b.image.data)
                   for a, b in zip(p1.samples, p2.samples))
    ids = [id_ for part in parts1 for id_ in
           [s.image.data.tobytes() for s in part.samples]]
    assert len(ids) == len(ss)
    assert len(set(ids)) == len(ss)


def test_split_seed_changes_selection(rng):
    ss = build_labeled(rng, {"a": 12})
    t1, _, _ = split(ss, (0.5, 0.25, 0.25), seed=0)
    t2, _, _ = split(ss, (0.5, 0.25, 0.25), seed=1)
    assert any(not np.array_equal(a.image.data, b.image.data)
               for a, b in zip(t1.samples, t2.samples))


def test_split_rejects_small_class(rng):
    ss = build_labeled(rng, {"a": 2})
    with pytest.raises(InvalidDataset):
        split(ss, (0.8, 0.1, 0.1), seed=0)


def test_split_validates_fractions(rng):
    ss = build_labeled(rng, {"a": 4})
    with pytest.raises(InvalidParameter):
        split(ss, (0.5, 0.5), seed=0)
    with pytest.raises(InvalidParameter):
        split(ss, (0.8, 0.3, -0.1), seed=0)
    with pytest.raises(InvalidParameter):
        split(ss, (0.5, 0.4, 0.3), seed=0)


# -- basis serialization ------------------------------------------------


@pytest.fixture
def fitted(rng):
    mats = [random_qmatrix(rng, 4, 3, pure=True) for _ in range(6)]
    ss = center(SampleSet.build([(str(t % 2), F) for t, F in enumerate(mats)]))
    return fit(ss, FitParams(s=2.0, p=math.inf, k1=2, k2=2))


def test_basis_round_trip_bit_exact(fitted, tmp_path):
    path = tmp_path / "basis.bqp"
    save_basis(fitted, path)
    back = load_basis(path)
    assert np.array_equal(back.U.data, fitted.U.data)
    assert np.array_equal(back.V.data, fitted.V.data)
    assert np.array_equal(back.d_left, fitted.d_left)
    assert np.array_equal(back.d_right, fitted.d_right)
    assert np.array_equal(back.mean.data, fitted.mean.data)
    assert back.params.s == fitted.params.s
    assert back.params.p == math.inf
    assert (back.params.k1, back.params.k2) == (2, 2)


def test_basis_save_load_again_identical_bytes(fitted, tmp_path):
    p1, p2 = tmp_path / "a.bqp", tmp_path / "b.bqp"
    save_basis(fitted, p1)
    save_basis(load_basis(p1), p2)
    assert p1.read_bytes() == p2.read_bytes()


def test_load_rejects_bad_magic(fitted, tmp_path):
    path = tmp_path / "b.bqp"
    save_basis(fitted, path)
    data = bytearray(path.read_bytes())
    data[:4] = b"XQP9"
    path.write_bytes(bytes(data))
    with pytest.raises(FormatError):
        load_basis(path)


def test_load_rejects_bad_version(fitted, tmp_path):
    path = tmp_path / "b.bqp"
    save_basis(fitted, path)
    data = bytearray(path.read_bytes())
    data[4:8] = struct.pack("<I", 99)
    path.write_bytes(bytes(data))
    with pytest.raises(FormatError):
        load_basis(path)


def test_load_rejects_truncation(fitted, tmp_path):
    path = tmp_path / "b.bqp"
    save_basis(fitted, path)
    data = path.read_bytes()
    for cut in (3, 10, len(data) - 8):
        path.write_bytes(data[:cut])
        with pytest.raises(FormatError):
            load_basis(path)


def test_load_rejects_trailing_data(fitted, tmp_path):
    path = tmp_path / "b.bqp"
    save_basis(fitted, path)
    path.write_bytes(path.read_bytes() + b"\x00" * 8)
    with pytest.raises(FormatError):
        load_basis(path)


def test_load_rejects_invalid_hyperparameters(fitted, tmp_path):
    path = tmp_path / "b.bqp"
    save_basis(fitted, path)
    data = bytearray(path.read_bytes())
    data[24:32] = struct.pack("<d", 0.5)  # s below one
    path.write_bytes(bytes(data))
    with pytest.raises(FormatError):
        load_basis(path)


def test_load_missing_file(tmp_path):
    with pytest.raises(IoError):
        load_basis(tmp_path / "nope.bqp")
