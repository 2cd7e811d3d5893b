"""MatrixMarket round-trips and parse diagnostics."""

import numpy as np
import pytest

from lrd.errors import ParseError
from lrd.instances import make_mc_instance
from lrd.linalg import SupportSet
from lrd.mmio import (read_coordinate, read_dense, write_coordinate,
                      write_dense)
from lrd.rng import Rng


class TestDenseRoundTrip:
    def test_exact_round_trip(self, tmp_path):
        m = Rng(0).normals(35).reshape(7, 5)
        p = tmp_path / "m.mtx"
        write_dense(p, m)
        got = read_dense(p)
        np.testing.assert_array_equal(got, m)

    def test_byte_stable_output(self, tmp_path):
        m = Rng(1).normals(12).reshape(3, 4)
        p1, p2 = tmp_path / "a.mtx", tmp_path / "b.mtx"
        write_dense(p1, m)
        write_dense(p2, m)
        assert p1.read_bytes() == p2.read_bytes()

    def test_column_major_layout(self, tmp_path):
        m = np.array([[1.0, 3.0], [2.0, 4.0]])
        p = tmp_path / "m.mtx"
        write_dense(p, m)
        body = p.read_text().strip().split("\n")
        assert body[0].startswith("%%MatrixMarket matrix array real general")
        assert body[1] == "2 2"
        assert [float(v) for v in body[2:]] == [1.0, 2.0, 3.0, 4.0]

    def test_reads_comments_and_integer_dims(self, tmp_path):
        p = tmp_path / "c.mtx"
        p.write_text("%%MatrixMarket matrix array real general\n"
                     "% a comment line\n"
                     "2 1\n1.5\n-2.5\n")
        got = read_dense(p)
        np.testing.assert_array_equal(got, np.array([[1.5], [-2.5]]))


class TestCoordinateRoundTrip:
    def test_pattern_round_trip(self, tmp_path):
        s = SupportSet.from_flat(6, 4, [0, 5, 11, 23])
        p = tmp_path / "s.mtx"
        write_coordinate(p, s)
        got, vals = read_coordinate(p)
        assert vals is None
        np.testing.assert_array_equal(got.rows, s.rows)
        np.testing.assert_array_equal(got.cols, s.cols)
        assert (got.n_rows, got.n_cols) == (6, 4)

    def test_real_round_trip(self, tmp_path):
        inst = make_mc_instance(8, 6, 2, (2.0, 1.0), m=20, seed=0)
        p = tmp_path / "v.mtx"
        write_coordinate(p, inst.obs, inst.obs_values)
        got, vals = read_coordinate(p)
        np.testing.assert_array_equal(vals, inst.obs_values)
        assert got.m == 20

    def test_one_based_indices_on_disk(self, tmp_path):
        s = SupportSet.from_flat(3, 3, [0])
        p = tmp_path / "s.mtx"
        write_coordinate(p, s)
        lines = p.read_text().strip().split("\n")
        assert lines[1] == "3 3 1"
        assert lines[2] == "1 1"

    def test_empty_support(self, tmp_path):
        s = SupportSet.from_flat(4, 4, [])
        p = tmp_path / "e.mtx"
        write_coordinate(p, s)
        got, _ = read_coordinate(p)
        assert got.m == 0


class TestParseDiagnostics:
    def _write(self, tmp_path, text):
        p = tmp_path / "bad.mtx"
        p.write_text(text)
        return p

    def test_missing_file(self, tmp_path):
        with pytest.raises(ParseError):
            read_dense(tmp_path / "nope.mtx")

    def test_bad_header(self, tmp_path):
        p = self._write(tmp_path, "%%NotMarket stuff\n1 1\n0\n")
        with pytest.raises(ParseError) as err:
            read_dense(p)
        assert err.value.line == 1

    def test_wrong_kind(self, tmp_path):
        p = self._write(tmp_path,
                        "%%MatrixMarket matrix coordinate real general\n"
                        "1 1 1\n1 1 2.0\n")
        with pytest.raises(ParseError):
            read_dense(p)

    def test_truncated_entries_name_last_line(self, tmp_path):
        p = self._write(tmp_path, "%%MatrixMarket matrix array real general\n"
                                  "2 2\n1.0\n2.0\n3.0\n")
        with pytest.raises(ParseError) as err:
            read_dense(p)
        assert err.value.line == 5
        assert "expected 4 entries" in err.value.message

    def test_bad_number_names_line_and_column(self, tmp_path):
        p = self._write(tmp_path, "%%MatrixMarket matrix array real general\n"
                                  "2 1\n1.0\nbogus\n")
        with pytest.raises(ParseError) as err:
            read_dense(p)
        assert err.value.line == 4
        assert err.value.col == 1

    def test_out_of_range_index(self, tmp_path):
        p = self._write(tmp_path,
                        "%%MatrixMarket matrix coordinate pattern general\n"
                        "2 2 1\n3 1\n")
        with pytest.raises(ParseError) as err:
            read_coordinate(p)
        assert err.value.line == 3
        assert "row index 3 exceeds 2" in err.value.message

    def test_duplicate_entry(self, tmp_path):
        p = self._write(tmp_path,
                        "%%MatrixMarket matrix coordinate real general\n"
                        "2 2 2\n1 1 5.0\n1 1 6.0\n")
        with pytest.raises(ParseError) as err:
            read_coordinate(p)
        assert "duplicate" in err.value.message

    def test_error_string_carries_location(self, tmp_path):
        p = self._write(tmp_path, "%%MatrixMarket matrix array real general\n"
                                  "x 1\n")
        with pytest.raises(ParseError) as err:
            read_dense(p)
        assert f"{p}:2:1:" in str(err.value)
