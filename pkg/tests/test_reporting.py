"""CSV and SVG artifact emission."""

import numpy as np
import pytest

from modsense import ValidationError, ResultTable, emit_csv, read_csv, emit_svg
from modsense.sweep import SweepConfig, run_sweep


def sample_table():
    return ResultTable(
        columns=("h", "qfi", "gap_closed", "status"),
        rows=(
            (0.1, 1.2345678901234567, 0, "ok"),
            (0.2, float("nan"), 0, "NumericalError: boom"),
            (0.3, 7.0e-12, 1, "ok"),
        ),
        metadata={"task": "qfi-scan", "config_hash": "abc123", "version": "0.1.0",
                  "axis_columns": "h", "n_failed": "1"},
    )


class TestCsv:
    def test_round_trip_identity(self, tmp_path):
        path = tmp_path / "t.csv"
        table = sample_table()
        emit_csv(table, str(path))
        back = read_csv(str(path))
        assert back.columns == table.columns
        assert back.metadata == table.metadata
        for got, want in zip(back.rows, table.rows):
            for g, w in zip(got, want):
                if isinstance(w, float) and np.isnan(w):
                    assert np.isnan(g)
                else:
                    assert g == w

    def test_metadata_and_precision(self, tmp_path):
        path = tmp_path / "t.csv"
        emit_csv(sample_table(), str(path))
        text = path.read_text()
        assert text.startswith("# axis_columns = h\n")
        assert "# config_hash = abc123\n" in text
        assert "1.2345678901234567" in text
        assert "7.0000000000000001e-12" in text

    def test_empty_table(self, tmp_path):
        table = ResultTable(columns=("h", "qfi", "status"), rows=(),
                            metadata={"config_hash": "x", "axis_columns": "h"})
        path = tmp_path / "empty.csv"
        emit_csv(table, str(path))
        back = read_csv(str(path))
        assert back.columns == ("h", "qfi", "status")
        assert back.n_rows == 0

    def test_hash_changes_with_config(self):
        a = SweepConfig.from_dict({"task": "qfi-scan", "model": {"n_sites": 8}})
        b = SweepConfig.from_dict({"task": "qfi-scan", "model": {"n_sites": 12}})
        assert a.config_hash() != b.config_hash()


class TestSvg:
    def _sweep_table(self, tmp_path, two_axes=False):
        axes = [{"name": "h", "min": 0.1, "max": 0.5, "count": 4}]
        if two_axes:
            axes = [{"name": "J", "values": [0.3, 0.5]}] + axes
        config = SweepConfig.from_dict({
            "task": "qfi-scan",
            "model": {"n_sites": 12, "cell_size": 2, "inter_coupling": 0.4,
                      "anisotropy": 0.3},
            "axes": axes,
            "out_dir": str(tmp_path),
        })
        return run_sweep(config)

    def test_lines_svg(self, tmp_path):
        table = self._sweep_table(tmp_path)
        path = tmp_path / "lines.svg"
        emit_svg(table, "lines", str(path))
        text = path.read_text()
        assert text.lstrip().startswith("<?xml")
        assert "<svg" in text

    def test_heatmap_svg(self, tmp_path):
        table = self._sweep_table(tmp_path, two_axes=True)
        path = tmp_path / "map.svg"
        emit_svg(table, "heatmap", str(path), value_column="qfi")
        assert "<svg" in path.read_text()

    def test_heatmap_requires_two_axes(self, tmp_path):
        table = self._sweep_table(tmp_path)
        with pytest.raises(ValidationError):
            emit_svg(table, "heatmap", str(tmp_path / "bad.svg"))

    def test_unknown_kind(self, tmp_path):
        table = self._sweep_table(tmp_path)
        with pytest.raises(ValidationError):
            emit_svg(table, "scatter3d", str(tmp_path / "bad.svg"))

    def test_bytes_stable(self, tmp_path):
        table = self._sweep_table(tmp_path)
        p1, p2 = tmp_path / "a.svg", tmp_path / "b.svg"
        emit_svg(table, "lines", str(p1))
        emit_svg(table, "lines", str(p2))
        assert p1.read_bytes() == p2.read_bytes()

    def test_nan_rows_tolerated(self, tmp_path):
        table = sample_table()
        path = tmp_path / "nan.svg"
        emit_svg(table, "lines", str(path))
        assert "<svg" in path.read_text()
