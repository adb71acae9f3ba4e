import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from kernopt.io import (
    SchemaError,
    config_hash,
    format_row,
    load_dataset,
    load_json,
    load_spectrum,
    now_iso,
    parse_float,
    read_csv,
    save_dataset,
    save_spectrum,
    write_csv,
    write_json,
)
from kernopt.krr import Dataset
from kernopt.spectra import EigenSequence, matern_periodic_spectrum


class TestFormatRow:
    def test_floats_use_repr(self):
        assert format_row((0.1, 2)) == "0.1,2"

    def test_numpy_scalars_round_trip(self):
        # np.float64 repr is not a plain literal; the writer must coerce
        line = format_row((np.float64(0.5), np.float64(1.0) / 3.0))
        assert "np." not in line
        assert [float(c) for c in line.split(",")] == [0.5, 1.0 / 3.0]


class TestReadCsv:
    def test_round_trip(self, tmp_path):
        p = tmp_path / "t.csv"
        write_csv(p, ("a", "b"), [(1.5, 2), (0.1, 7)])
        rows = read_csv(p, ("a", "b"))
        assert rows == [{"a": "1.5", "b": "2"}, {"a": "0.1", "b": "7"}]

    def test_header_mismatch_names_column(self, tmp_path):
        p = tmp_path / "t.csv"
        p.write_text("tau,weird\n0.1,2\n")
        with pytest.raises(SchemaError, match=r"column 2 .*'d_eff'.*'weird'"):
            read_csv(p, ("tau", "d_eff"))

    def test_missing_column_reported(self, tmp_path):
        p = tmp_path / "t.csv"
        p.write_text("tau\n0.1\n")
        with pytest.raises(SchemaError, match="'<missing>'"):
            read_csv(p, ("tau", "d_eff"))

    def test_extra_columns_rejected(self, tmp_path):
        p = tmp_path / "t.csv"
        p.write_text("a,b,c\n1,2,3\n")
        with pytest.raises(SchemaError, match="extra"):
            read_csv(p, ("a", "b"))

    def test_ragged_row_rejected(self, tmp_path):
        p = tmp_path / "t.csv"
        p.write_text("a,b\n1,2\n3\n")
        with pytest.raises(SchemaError, match="row 3"):
            read_csv(p, ("a", "b"))

    def test_empty_file_rejected(self, tmp_path):
        p = tmp_path / "t.csv"
        p.write_text("")
        with pytest.raises(SchemaError, match="empty"):
            read_csv(p, ("a",))

    def test_comments_and_blanks_skipped(self, tmp_path):
        p = tmp_path / "t.csv"
        p.write_text("# preamble\na,b\n\n1,2\n# trailing note\n")
        assert read_csv(p, ("a", "b")) == [{"a": "1", "b": "2"}]

    def test_parse_float_names_column(self):
        with pytest.raises(SchemaError, match="'value'"):
            parse_float({"value": "oops"}, "value")
        assert parse_float({"value": "2.5"}, "value") == 2.5


class TestSpectrumFile:
    def test_golden_file_with_tail_footer(self, tmp_path):
        # hand-derived flat view of a frequency sequence: [c, v, v] and the
        # per-index tail constant inflated by 3**s
        spec = EigenSequence([1.0, 0.5], "frequency",
                             tail_exponent=2.0, tail_constant=3.0)
        p = tmp_path / "spec.csv"
        save_spectrum(p, spec)
        expected = ("index,value\n"
                    "1,1.0\n"
                    "2,0.5\n"
                    "3,0.5\n"
                    "# tail_exponent=2.0 tail_constant=27.0\n")
        assert p.read_text() == expected

    def test_golden_file_without_tail(self, tmp_path):
        spec = EigenSequence([0.5, 0.25, 0.125])
        p = tmp_path / "spec.csv"
        save_spectrum(p, spec)
        assert p.read_text() == "index,value\n1,0.5\n2,0.25\n3,0.125\n"

    def test_matern_round_trip_exact(self, tmp_path):
        spec = matern_periodic_spectrum(1.5, 8)
        p = tmp_path / "spec.csv"
        save_spectrum(p, spec)
        back = load_spectrum(p)
        flat = spec.to_flat()
        assert back.indexing == "flat"
        np.testing.assert_array_equal(back.values, flat.values)
        assert back.tail_exponent == flat.tail_exponent
        assert back.tail_constant == flat.tail_constant

    def test_load_without_footer_has_no_tail(self, tmp_path):
        p = tmp_path / "spec.csv"
        p.write_text("index,value\n1,0.75\n2,0.25\n")
        back = load_spectrum(p)
        assert back.tail_exponent is None
        assert back.tail_sum() == 0.0

    def test_non_consecutive_indices_rejected(self, tmp_path):
        p = tmp_path / "spec.csv"
        p.write_text("index,value\n1,0.5\n3,0.25\n")
        with pytest.raises(SchemaError, match="consecutive"):
            load_spectrum(p)

    def test_non_numeric_value_rejected(self, tmp_path):
        p = tmp_path / "spec.csv"
        p.write_text("index,value\n1,abc\n")
        with pytest.raises(SchemaError, match="'value'"):
            load_spectrum(p)

    @settings(max_examples=25, deadline=None)
    @given(vals=st.lists(st.floats(min_value=0.0, max_value=4.0), min_size=1,
                         max_size=12))
    def test_flat_round_trip_property(self, tmp_path_factory, vals):
        p = tmp_path_factory.mktemp("spec") / "s.csv"
        spec = EigenSequence(vals)
        save_spectrum(p, spec)
        np.testing.assert_array_equal(load_spectrum(p).values, spec.values)


class TestDatasetFile:
    def test_golden_file_1d(self, tmp_path):
        data = Dataset(np.array([0.5, -0.25]), np.array([1.0, 2.5]))
        p = tmp_path / "d.csv"
        save_dataset(p, data)
        assert p.read_text() == "x1,y\n0.5,1.0\n-0.25,2.5\n"

    def test_round_trip_2d(self, tmp_path):
        rng = np.random.default_rng(3)
        data = Dataset(rng.uniform(-1, 1, (6, 2)), rng.normal(size=6))
        p = tmp_path / "d.csv"
        save_dataset(p, data)
        back = load_dataset(p, 2)
        np.testing.assert_array_equal(back.inputs, data.inputs)
        np.testing.assert_array_equal(back.labels, data.labels)

    def test_dimension_mismatch_rejected(self, tmp_path):
        data = Dataset(np.array([0.5, -0.25]), np.array([1.0, 2.5]))
        p = tmp_path / "d.csv"
        save_dataset(p, data)
        with pytest.raises(SchemaError, match="'x2'"):
            load_dataset(p, 2)

    @settings(max_examples=25, deadline=None)
    @given(seed=st.integers(0, 2**31 - 1), dim=st.integers(1, 3),
           n=st.integers(1, 8))
    def test_round_trip_property(self, tmp_path_factory, seed, dim, n):
        rng = np.random.default_rng(seed)
        data = Dataset(rng.uniform(-1, 1, (n, dim)), rng.normal(size=n))
        p = tmp_path_factory.mktemp("data") / "d.csv"
        save_dataset(p, data)
        back = load_dataset(p, dim)
        np.testing.assert_array_equal(back.inputs, data.inputs)
        np.testing.assert_array_equal(back.labels, data.labels)


class TestJsonHelpers:
    def test_config_hash_ignores_key_order(self):
        a = {"kind": "spectrum", "kernel": {"family": "matern", "nu": 1.5}}
        b = {"kernel": {"nu": 1.5, "family": "matern"}, "kind": "spectrum"}
        assert config_hash(a) == config_hash(b)
        assert len(config_hash(a)) == 64

    def test_config_hash_sensitive_to_values(self):
        a = {"kind": "spectrum", "seed": 0}
        b = {"kind": "spectrum", "seed": 1}
        assert config_hash(a) != config_hash(b)

    def test_json_round_trip(self, tmp_path):
        payload = {"b": [1, 2], "a": {"x": 0.5}}
        p = tmp_path / "m.json"
        write_json(p, payload)
        assert load_json(p) == payload

    def test_now_iso_is_utc(self):
        stamp = now_iso()
        assert stamp.endswith("Z") and "T" in stamp
