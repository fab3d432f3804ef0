import numpy as np
import pytest

from gpdgof import datasets
from gpdgof.exceptions import DataError


def test_ozone():
    x = datasets.load_ozone()
    assert x.shape == (108,)
    assert x.min() == 0.12 and x.max() == 157.73


def test_bilbao_counts():
    assert datasets.load_bilbao().shape == (179,)
    exc = datasets.load_bilbao(7.5)
    assert exc.shape == (154,)
    assert exc.min() > 0


def test_digest_verified(monkeypatch):
    name, _, prov = datasets.BUNDLED["ozone"]
    monkeypatch.setitem(datasets.BUNDLED, "ozone", (name, "0" * 64, prov))
    with pytest.raises(DataError, match="integrity"):
        datasets.load_bundled("ozone")


def test_bundled_values_round_trip():
    # every value is stored exactly as printed (no float formatting loss)
    from importlib import resources

    text = resources.files("gpdgof").joinpath("data", "bilbao.csv").read_text()
    printed = text.split()[1:]
    values = datasets.load_bilbao()
    assert [float(v) for v in printed] == list(values)


def test_unknown_bundled():
    with pytest.raises(DataError):
        datasets.load_bundled("nope")


class TestParse:
    def test_single_column_with_header(self):
        ds = datasets.parse_csv("x\n1.5\n2\n3\n")
        np.testing.assert_array_equal(ds.values, [1.5, 2, 3])
        assert not ds.is_censored

    def test_single_column_without_header(self):
        ds = datasets.parse_csv("1.5\n2\n\n3\n")
        assert ds.n == 3

    def test_censored(self):
        ds = datasets.parse_csv("time,delta\n1,1\n2,0\n3,1\n")
        assert ds.is_censored
        np.testing.assert_array_equal(ds.censored.delta, [1, 0, 1])

    def test_censored_needs_header(self):
        with pytest.raises(DataError, match="time,delta"):
            datasets.parse_csv("1,1\n2,0\n")

    @pytest.mark.parametrize("text,line", [
        ("x\n1\nabc\n", 3),
        ("x\n1\n-2\n", 3),
        ("x\n0\n", 2),
        ("x\n1\nnan\n", 3),
        ("time,delta\n1,1\n2,2\n", 3),
        ("time,delta\n1,1\n2\n", 3),
    ])
    def test_line_numbers(self, text, line):
        with pytest.raises(DataError, match=f"line {line}:"):
            datasets.parse_csv(text)

    @pytest.mark.parametrize("text", ["", "\n\n", "x\n"])
    def test_empty(self, text):
        with pytest.raises(DataError):
            datasets.parse_csv(text)

    def test_threshold(self):
        ds = datasets.parse_csv("2\n5\n8\n")
        np.testing.assert_array_equal(ds.exceedances(4.0).values, [1.0, 4.0])
        with pytest.raises(DataError):
            ds.exceedances(9.0)
        with pytest.raises(DataError, match="zero exceedances"):
            ds.exceedances(5.0)

    def test_load_path(self, tmp_path):
        path = tmp_path / "d.csv"
        path.write_text("value\n1\n2\n3\n")
        ds = datasets.load(str(path))
        assert ds.n == 3 and len(ds.digest) == 64
        with pytest.raises(DataError):
            datasets.load(str(tmp_path / "missing.csv"))
