import json
import math

import numpy as np
import pandas as pd
import pytest

from blowup_lab.handlers.file_handler import CONFIG_NAME, OUT_ENV, OutputHandler, resolve_output_dir
from blowup_lab.handlers.selftest_handler import power_law_trajectory
from blowup_lab.utils.config import Config, parse_config
from blowup_lab.utils.errors import InvalidArgumentError


@pytest.fixture
def config(minimal_config_text):
    return parse_config(minimal_config_text + "\n[output]\ndir = from_config\n")


class TestResolveOutputDir:
    def test_flag_wins(self, config, monkeypatch):
        monkeypatch.setenv(OUT_ENV, "from_env")
        assert str(resolve_output_dir(config, "from_flag")) == "from_flag"

    def test_environment_over_config(self, config, monkeypatch):
        monkeypatch.setenv(OUT_ENV, "from_env")
        assert str(resolve_output_dir(config)) == "from_env"

    def test_config_value(self, config, monkeypatch):
        monkeypatch.delenv(OUT_ENV, raising=False)
        assert str(resolve_output_dir(config)) == "from_config"


class TestOutputHandler:
    def test_csv_has_exact_columns(self, tmp_path):
        handler = OutputHandler(tmp_path / "out")
        path = handler.write_csv("rows.csv", [{"b": 2.0, "a": 1.0}], ["a", "b"])
        assert path.read_text().splitlines()[0] == "a,b"
        assert handler.read_csv("rows.csv")["b"].tolist() == [2.0]

    def test_csv_keeps_full_precision(self, tmp_path):
        handler = OutputHandler(tmp_path)
        values = [math.pi, 0.1 + 0.2, 1.0 - 2.0 ** -52, 5e-7 * math.e]
        handler.write_csv("x.csv", pd.DataFrame({"x": values}), ["x"])
        assert handler.read_csv("x.csv")["x"].tolist() == values

    def test_json_nan_becomes_null(self, tmp_path):
        handler = OutputHandler(tmp_path)
        handler.write_json("r.json", {"T": np.float64(0.5), "bad": math.nan, "n": np.int64(3), "ok": np.bool_(True)})
        data = json.loads((tmp_path / "r.json").read_text())
        assert data == {"T": 0.5, "bad": None, "n": 3, "ok": True}

    def test_disabled_format_is_skipped(self, tmp_path):
        handler = OutputHandler(tmp_path, formats=["json"])
        assert handler.write_csv("rows.csv", [], ["a"]) is None
        assert not (tmp_path / "rows.csv").exists()
        assert handler.write_json("r.json", {}) == tmp_path / "r.json"

    def test_missing_file(self, tmp_path):
        handler = OutputHandler(tmp_path)
        assert not handler.exists("blowup.json")
        with pytest.raises(InvalidArgumentError):
            handler.read_json("blowup.json")
        with pytest.raises(InvalidArgumentError):
            handler.read_csv("sweep.csv")

    def test_config_is_stored(self, tmp_path, config):
        handler = OutputHandler(tmp_path)
        handler.write_config(config)
        assert Config.load(tmp_path / CONFIG_NAME) == config

    def test_trajectory_dump(self, tmp_path, interval_spec):
        traj = power_law_trajectory(interval_spec, 1.0, 1.0, points=50)
        handler = OutputHandler(tmp_path)
        handler.write_trajectory(traj)
        series = handler.read_csv("trajectory.csv")
        assert list(series.columns) == ["t", "u_max", "argmax"]
        assert len(series) == 50
        snap = handler.read_csv("snap_000.csv")
        assert len(snap) == len(traj.grid.nodes)
        assert [f["name"] for f in handler.list_files()] == ["snap_000.csv", "trajectory.csv"]
        assert len(handler.written_files) == 2

    def test_list_files_of_missing_directory(self, tmp_path):
        assert OutputHandler(tmp_path / "nowhere").list_files() == []
