import numpy as np
import pytest

from mirror_sinkhorn.io import (
    read_coupling,
    read_matrix,
    read_vector,
    write_coupling,
    write_matrix,
    write_vector,
)


class TestMatrix:
    def test_roundtrip_bit_exact(self, tmp_path, rng):
        mat = rng.standard_normal((4, 7))
        path = tmp_path / "m.csv"
        write_matrix(path, mat)
        assert np.array_equal(read_matrix(path), mat)

    def test_no_header(self, tmp_path):
        path = tmp_path / "m.csv"
        write_matrix(path, np.array([[1.5, 2.5]]))
        assert path.read_text() == "1.5,2.5\n"

    def test_ragged_rejected(self, tmp_path):
        path = tmp_path / "bad.csv"
        path.write_text("1.0,2.0\n3.0\n")
        with pytest.raises(ValueError):
            read_matrix(path)

    def test_empty_rejected(self, tmp_path):
        path = tmp_path / "empty.csv"
        path.write_text("")
        with pytest.raises(ValueError):
            read_matrix(path)


class TestVector:
    def test_roundtrip(self, tmp_path, rng):
        v = rng.dirichlet(np.ones(5))
        path = tmp_path / "v.csv"
        write_vector(path, v)
        assert np.array_equal(read_vector(path), v)

    def test_column_layout_accepted(self, tmp_path):
        path = tmp_path / "v.csv"
        path.write_text("0.25\n0.75\n")
        assert np.array_equal(read_vector(path), [0.25, 0.75])

    def test_matrix_rejected(self, tmp_path):
        path = tmp_path / "m.csv"
        write_matrix(path, np.ones((2, 2)))
        with pytest.raises(ValueError):
            read_vector(path)


class TestCoupling:
    def test_roundtrip_with_header(self, tmp_path, rng):
        gamma = rng.uniform(0, 1, (3, 5))
        path = tmp_path / "g.csv"
        write_coupling(path, gamma)
        assert path.read_text().splitlines()[0] == "3,5"
        assert np.array_equal(read_coupling(path), gamma)

    def test_header_body_mismatch(self, tmp_path):
        path = tmp_path / "bad.csv"
        path.write_text("2,2\n1.0,2.0\n")
        with pytest.raises(ValueError):
            read_coupling(path)

    def test_non_header_rejected(self, tmp_path):
        path = tmp_path / "bad.csv"
        path.write_text("0.5,0.5\n0.5,0.5\n")
        with pytest.raises(ValueError):
            read_coupling(path)
