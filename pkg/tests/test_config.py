"""
Tests de la configuration (valeurs par défaut, fichier, environnement).
"""

import json

import pytest

from stoqverify.config import Config


class TestConfig:
    """Priorité des sources de configuration"""

    def test_defaults(self, tmp_path):
        cfg = Config(config_dir=tmp_path, use_env=False)
        assert cfg.tol == 1e-9
        assert cfg.seed == 0
        assert set(cfg.tolerance_table()) == {"tol", "residual_tol", "zero_energy_tol", "amplitude_floor"}

    def test_unknown_key(self, tmp_path):
        cfg = Config(config_dir=tmp_path, use_env=False)
        with pytest.raises(KeyError):
            cfg.update(colour="bleu")
        with pytest.raises(AttributeError):
            cfg.colour

    def test_update_keeps_types(self, tmp_path):
        cfg = Config(config_dir=tmp_path, use_env=False)
        cfg.update(threads="4", tol="1e-7", seed=None)
        assert cfg.threads == 4 and isinstance(cfg.threads, int)
        assert cfg.tol == 1e-7
        assert cfg.seed == 0

    def test_file_then_environment(self, tmp_path, monkeypatch):
        (tmp_path / "config.json").write_text(json.dumps({"seed": 3, "threads": 2}), encoding="utf-8")
        monkeypatch.setenv("STOQ_SEED", "7")
        cfg = Config(config_dir=tmp_path)
        assert cfg.seed == 7
        assert cfg.threads == 2

    def test_bad_environment_value_is_ignored(self, tmp_path, monkeypatch):
        monkeypatch.setenv("STOQ_THREADS", "beaucoup")
        cfg = Config(config_dir=tmp_path)
        assert cfg.threads == 1

    def test_save_and_reload(self, tmp_path):
        cfg = Config(config_dir=tmp_path, use_env=False)
        cfg.update(walk_steps_factor=8)
        cfg.save_config()
        assert Config(config_dir=tmp_path, use_env=False).walk_steps_factor == 8
