import struct
import warnings

import numpy as np
import pytest
from hypothesis import HealthCheck, given, settings
from hypothesis import strategies as st

from rtsgm import imgio
from rtsgm.core import DisparityMap, GrayImage
from rtsgm.imgio import ImageFormatError


def write_bytes(path, blob):
    path.write_bytes(blob)
    return path


class TestReadGray:
    def test_byte_passthrough(self, tmp_path):
        p = write_bytes(tmp_path / "a.pgm", b"P5\n2 2\n255\n\x00\x7f\x80\xff")
        assert imgio.read_gray(p).data.tolist() == [[0, 127], [128, 255]]

    def test_comments_and_whitespace(self, tmp_path):
        p = write_bytes(tmp_path / "a.pgm", b"P5 # magic\n# size\n  3\t1\n#max\n255\n\x01\x02\x03")
        assert imgio.read_gray(p).data.tolist() == [[1, 2, 3]]

    def test_ascii_rejected(self, tmp_path):
        p = write_bytes(tmp_path / "a.pgm", b"P2\n2 2\n255\n0 1 2 3\n")
        with pytest.raises(ImageFormatError, match="unsupported"):
            imgio.read_gray(p)

    def test_truncated(self, tmp_path):
        p = write_bytes(tmp_path / "a.pgm", b"P5\n4 4\n255\n\x00\x01")
        with pytest.raises(ImageFormatError, match="truncated"):
            imgio.read_gray(p)

    def test_sixteen_bit_rejected(self, tmp_path):
        p = write_bytes(tmp_path / "a.pgm", b"P5\n1 1\n65535\n\x00\x01")
        with pytest.raises(ImageFormatError):
            imgio.read_gray(p)

    def test_missing(self, tmp_path):
        with pytest.raises(FileNotFoundError):
            imgio.read_gray(tmp_path / "nope.pgm")

    def test_roundtrip(self, tmp_path):
        img = GrayImage(np.random.default_rng(0).integers(0, 256, (7, 5)))
        imgio.write_gray(tmp_path / "r.pgm", img)
        assert np.array_equal(imgio.read_gray(tmp_path / "r.pgm").data, img.data)

    def test_png(self, tmp_path):
        pil = pytest.importorskip("PIL.Image")
        data = np.random.default_rng(1).integers(0, 256, (6, 9), dtype=np.uint8)
        pil.fromarray(data).save(tmp_path / "a.png")
        assert np.array_equal(imgio.read_gray(tmp_path / "a.png").data, data)

    @settings(max_examples=300, deadline=None,
              suppress_health_check=[HealthCheck.function_scoped_fixture])
    @given(st.binary(max_size=64), st.booleans())
    def test_fuzz_header_never_crashes(self, tmp_path, blob, magic):
        p = tmp_path / "fuzz.pgm"
        p.write_bytes(b"P5" + blob if magic else blob)
        try:
            imgio.read_gray(p)
        except ImageFormatError:
            pass


class TestFixed256:
    def test_known_bytes(self, tmp_path):
        p = tmp_path / "d.pgm"
        imgio.write_disparity(DisparityMap.dense([[64.25]]), p, imgio.FIXED256)
        blob = p.read_bytes()
        assert blob.startswith(b"P5\n1 1\n65535\n")
        assert blob[-2:] == b"\x40\x40"

    def test_invalid_is_zero(self, tmp_path):
        p = tmp_path / "d.pgm"
        imgio.write_disparity(DisparityMap(np.array([[3.0, 9.0]]), np.array([[False, True]])), p)
        assert p.read_bytes()[-4:] == b"\x00\x00\x09\x00"
        back = imgio.read_disparity(p)
        assert back.valid.tolist() == [[False, True]]

    def test_read_256_is_one_pixel(self, tmp_path):
        p = write_bytes(tmp_path / "d.pgm", b"P5\n2 1\n65535\n\x01\x00\x00\x00")
        m = imgio.read_disparity(p)
        assert m.get(0, 0) == 1.0
        assert m.get(1, 0) is None

    def test_roundtrip_bound(self, tmp_path):
        rng = np.random.default_rng(3)
        values = rng.uniform(1 / 256, 255, (20, 30))
        valid = rng.random((20, 30)) < 0.9
        p = tmp_path / "d.pgm"
        imgio.write_disparity(DisparityMap(values, valid), p)
        back = imgio.read_disparity(p)
        assert np.array_equal(back.valid, valid)
        assert np.max(np.abs(back.values[valid] - values[valid])) <= 1 / 512

    def test_out_of_range(self, tmp_path):
        with pytest.raises(ValueError):
            imgio.write_disparity(DisparityMap.dense([[256.0]]), tmp_path / "d.pgm")
        imgio.write_disparity(DisparityMap.dense([[65535 / 256]]), tmp_path / "d.pgm")

    def test_png_gt(self, tmp_path):
        pil = pytest.importorskip("PIL.Image")
        data = np.array([[0, 256, 512 + 128]], dtype=np.uint16)
        pil.fromarray(data).save(tmp_path / "gt.png")
        m = imgio.read_disparity(tmp_path / "gt.png")
        assert m.values.tolist() == [[0.0, 1.0, 2.5]]
        assert m.valid.tolist() == [[False, True, True]]


class TestPFM:
    def test_bit_exact_roundtrip(self, tmp_path):
        rng = np.random.default_rng(4)
        values = rng.uniform(-1, 300, (9, 13)).astype(np.float32).astype(np.float64)
        valid = rng.random((9, 13)) < 0.8
        p = tmp_path / "d.pfm"
        imgio.write_disparity(DisparityMap(values, valid), p, imgio.FLOAT)
        back = imgio.read_disparity(p)
        assert np.array_equal(back.valid, valid)
        assert np.array_equal(back.values[valid], values[valid])

    def test_layout(self, tmp_path):
        p = tmp_path / "d.pfm"
        imgio.write_pfm(p, np.array([[1.0, 2.0], [3.0, 4.0]]))
        blob = p.read_bytes()
        assert blob.startswith(b"Pf\n2 2\n-1.0\n")
        # bottom row first, little-endian
        assert struct.unpack("<4f", blob[-16:]) == (3.0, 4.0, 1.0, 2.0)

    def test_big_endian_read(self, tmp_path):
        p = write_bytes(tmp_path / "d.pfm", b"Pf\n1 1\n1.0\n" + struct.pack(">f", 2.5))
        assert imgio.read_pfm(p).tolist() == [[2.5]]

    def test_color_rejected(self, tmp_path):
        p = write_bytes(tmp_path / "d.pfm", b"PF\n1 1\n-1.0\n" + b"\x00" * 12)
        with pytest.raises(ImageFormatError):
            imgio.read_pfm(p)

    @settings(max_examples=300, deadline=None,
              suppress_health_check=[HealthCheck.function_scoped_fixture])
    @given(st.binary(max_size=48))
    def test_fuzz_never_crashes(self, tmp_path, blob):
        p = tmp_path / "fuzz.pfm"
        p.write_bytes(b"Pf\n" + blob)
        try:
            imgio.read_disparity(p)
        except ImageFormatError:
            pass

    def test_truncated(self, tmp_path):
        p = write_bytes(tmp_path / "d.pfm", b"Pf\n2 2\n-1.0\n\x00\x00")
        with pytest.raises(ImageFormatError):
            imgio.read_pfm(p)


class TestScanDataset:
    def touch(self, root, *names):
        for name in names:
            path = root / name
            path.parent.mkdir(parents=True, exist_ok=True)
            path.write_bytes(b"")

    def test_empty(self, tmp_path):
        assert imgio.scan_dataset(tmp_path) == []

    def test_complete_pair(self, tmp_path):
        self.touch(tmp_path, "a_L.pgm", "a_R.pgm", "a_gt.pfm")
        (entry,) = imgio.scan_dataset(tmp_path)
        assert entry.name == "a" and entry.gt == tmp_path / "a_gt.pfm"

    def test_missing_gt(self, tmp_path):
        self.touch(tmp_path, "b_L.pgm", "b_R.pgm")
        (entry,) = imgio.scan_dataset(tmp_path)
        assert entry.gt is None

    def test_sorted_and_orphans_warn(self, tmp_path):
        self.touch(tmp_path, "z_L.pgm", "z_R.pgm", "m_L.pgm", "m_R.pgm", "q_L.pgm", "notes.txt")
        with pytest.warns(UserWarning, match="'q' has no right image"):
            entries = imgio.scan_dataset(tmp_path)
        assert [e.name for e in entries] == ["m", "z"]

    def test_kitti_like(self, tmp_path):
        self.touch(tmp_path, "image_2/000001_10.png", "image_3/000001_10.png",
                   "disp_occ_0/000001_10.png", "image_2/000000_10.png", "image_3/000000_10.png")
        with warnings.catch_warnings():
            warnings.simplefilter("error")
            entries = imgio.scan_dataset(tmp_path, "kitti_like")
        assert [e.name for e in entries] == ["000000_10", "000001_10"]
        assert entries[0].gt is None and entries[1].gt is not None

    def test_not_a_directory(self, tmp_path):
        with pytest.raises(NotADirectoryError):
            imgio.scan_dataset(tmp_path / "missing")

    def test_unknown_layout(self, tmp_path):
        with pytest.raises(ValueError):
            imgio.scan_dataset(tmp_path, "middlebury")
