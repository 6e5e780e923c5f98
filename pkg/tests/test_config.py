import pytest

from blowup_lab.utils.config import Config, parse_config
from blowup_lab.utils.errors import ConfigError
from tests.conftest import MINIMAL_CONFIG


class TestParseConfig:
    def test_minimal_file_gets_defaults(self, minimal_config_text):
        config = parse_config(minimal_config_text)
        assert config.get("problem.N") == 1
        assert config.get("problem.p") == 2.0
        assert config.get("problem.V.kind") == "constant"
        assert config.get("solver.m") == 512
        assert config.get("solver.u_stop") == 1e8
        assert config.get("sweep.Ms") == [8.0, 16.0, 32.0, 64.0]
        assert config.get("selfsim.k_list") == [1, 2, 3]
        assert config.get("output.formats") == ["csv", "json"]

    def test_lists_and_comments(self, minimal_config_text):
        text = minimal_config_text + "\n[sweep]\nMs = 4, 8,16  # amplitudes\nworkers = 0\n"
        config = parse_config(text)
        assert config.get("sweep.Ms") == [4.0, 8.0, 16.0]
        assert config.get("sweep.workers") == 0

    def test_quoted_number_reports_line(self):
        text = MINIMAL_CONFIG.replace("p = 2", 'p = "two"')
        with pytest.raises(ConfigError) as excinfo:
            parse_config(text)
        assert excinfo.value.line == 3
        assert excinfo.value.key == "p"
        assert "line 3" in str(excinfo.value)

    def test_non_integer_for_int_key(self):
        with pytest.raises(ConfigError) as excinfo:
            parse_config(MINIMAL_CONFIG.replace("N = 1", "N = 1.5"))
        assert excinfo.value.line == 2

    def test_duplicate_key(self):
        with pytest.raises(ConfigError) as excinfo:
            parse_config(MINIMAL_CONFIG + "p = 3\n")
        assert excinfo.value.key == "p"
        assert excinfo.value.line == 9

    def test_unknown_key(self, minimal_config_text):
        with pytest.raises(ConfigError) as excinfo:
            parse_config(minimal_config_text + "alpha = 1\n")
        assert excinfo.value.line == 9

    def test_unknown_section(self, minimal_config_text):
        with pytest.raises(ConfigError) as excinfo:
            parse_config(minimal_config_text + "\n[plot]\ncolor = red\n")
        assert excinfo.value.line == 10

    def test_missing_problem_section(self):
        with pytest.raises(ConfigError):
            parse_config("[solver]\nm = 64\n")

    def test_missing_required_key(self):
        with pytest.raises(ConfigError) as excinfo:
            parse_config(MINIMAL_CONFIG.replace("phi.kind = cosine_cap\n", ""))
        assert excinfo.value.key == "phi.kind"

    def test_empty_list(self, minimal_config_text):
        with pytest.raises(ConfigError):
            parse_config(minimal_config_text + "\n[sweep]\nMs = ,\n")


class TestConfig:
    def test_round_trip(self, minimal_config_text):
        config = parse_config(minimal_config_text + "\n[output]\ndir = results\n")
        assert parse_config(config.serialize()) == config

    def test_save_and_load(self, tmp_path, minimal_config_text):
        config = parse_config(minimal_config_text)
        config.set("solver.m", 64)
        config.save(tmp_path / "config.ini")
        assert Config.load(tmp_path / "config.ini") == config

    def test_load_missing_file(self, tmp_path):
        with pytest.raises(ConfigError):
            Config.load(tmp_path / "absent.ini")

    def test_set_unknown_key(self, minimal_config_text):
        config = parse_config(minimal_config_text)
        with pytest.raises(ConfigError):
            config.set("solver.theta", 0.5)

    def test_function_params(self, minimal_config_text):
        config = parse_config(minimal_config_text)
        assert config.function_params("V") == {"kind": "constant", "value": 1.0}
        assert config.function_params("phi") == {"kind": "cosine_cap"}

    def test_reset_keeps_problem(self, minimal_config_text):
        config = parse_config(minimal_config_text)
        config.set("solver.m", 64)
        config.reset()
        assert config.get("solver.m") == 512
        assert config.get("problem.p") == 2.0

    def test_get_all_is_a_copy(self, minimal_config_text):
        config = parse_config(minimal_config_text)
        config.get_all()["sweep"]["Ms"].append(128.0)
        assert config.get("sweep.Ms") == [8.0, 16.0, 32.0, 64.0]

    def test_missing_key_default(self, minimal_config_text):
        config = parse_config(minimal_config_text)
        assert config.get("problem.M") is None
        assert config.get("problem.M", 50.0) == 50.0
