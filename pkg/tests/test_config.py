"""Unit tests for configuration loading."""

from pathlib import Path

import pytest

from sciencemap.config import PipelineConfig, load_config
from sciencemap.errors import ConfigError


class TestLoadConfig:
    """Test load_config."""

    def test_defaults(self, monkeypatch):
        """Test defaults when no file, environment or override is given."""
        monkeypatch.delenv("SCIENCEMAP_OUT", raising=False)

        config = load_config()

        assert config.out == Path("out")
        assert config.term_core == "e-learning"
        assert config.descriptors.top_n == 51
        assert config.participation.min_avg_pp == 50.0
        assert config.overlay.core_quantile == 0.88

    def test_file_paths_resolve_next_to_file(self, tmp_path):
        """Test relative paths in the file are taken relative to the file."""
        path = tmp_path / "sciencemap.toml"
        path.write_text('corpus = "data/corpus.csv"\nout = "build"\n')

        config = load_config(path)

        assert config.corpus == (tmp_path / "data/corpus.csv").resolve()
        assert config.out == (tmp_path / "build").resolve()

    def test_priority(self, tmp_path, monkeypatch):
        """Test CLI overrides beat the file and the file beats the environment."""
        monkeypatch.setenv("SCIENCEMAP_OUT", str(tmp_path / "from-env"))
        monkeypatch.setenv("SCIENCEMAP_TERM_CORE", "mooc")
        path = tmp_path / "sciencemap.toml"
        path.write_text('term_core = "moodle"\n\n[mapping]\nrestarts = 4\n')

        config = load_config(path, overrides={"mapping": {"restarts": 7, "tol": None}})

        assert config.out == tmp_path / "from-env"
        assert config.term_core == "moodle"
        assert config.mapping.restarts == 7
        assert config.mapping.tol == 1e-6

    def test_nested_environment(self, monkeypatch):
        """Test nested sections can be set through the environment."""
        monkeypatch.setenv("SCIENCEMAP_OVERLAY__PERMUTATIONS", "250")

        assert load_config().overlay.permutations == 250

    def test_seed_applies_to_every_stage(self):
        """Test a global seed sets each stage seed."""
        config = load_config(seed=42)

        assert set(config.seeds.model_dump().values()) == {42}

    @pytest.mark.parametrize(
        "content",
        [
            "[mapping]\nrestarts = 0\n",
            "[overlay]\npermutations = 10\n",
            "[participation]\nthresholds = [20, 25]\n",
            "unknown_key = 1\n",
            "corpus = [unclosed\n",
        ],
    )
    def test_invalid_file_is_config_error(self, tmp_path, content):
        """Test invalid values, unknown keys and bad TOML raise ConfigError."""
        path = tmp_path / "sciencemap.toml"
        path.write_text(content)

        with pytest.raises(ConfigError):
            load_config(path)

    def test_missing_file(self, tmp_path):
        """Test a missing config file raises ConfigError."""
        with pytest.raises(ConfigError, match="not found"):
            load_config(tmp_path / "absent.toml")


class TestRequirePath:
    """Test PipelineConfig.require_path."""

    def test_unset_and_missing_paths(self, tmp_path):
        """Test unset or absent inputs raise ConfigError; present ones are returned."""
        present = tmp_path / "labels.csv"
        present.write_text("source_id,label\n")

        with pytest.raises(ConfigError, match="not configured"):
            PipelineConfig().require_path("labels")
        with pytest.raises(ConfigError, match="not found"):
            PipelineConfig(labels=tmp_path / "absent.csv").require_path("labels")
        assert PipelineConfig(labels=present).require_path("labels") == present
