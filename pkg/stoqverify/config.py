import os
from pathlib import Path
import json
import logging

from dotenv import load_dotenv

logger = logging.getLogger(__name__)


class Config:
    """Table des tolérances et valeurs par défaut des commandes.

    Ordre de priorité : valeurs intégrées, fichier ~/.stoqverify/config.json,
    variables d'environnement STOQ_<CLE> (un fichier .env est pris en compte),
    puis les options globales de la ligne de commande via update().
    """

    DEFAULTS = {
        "tol": 1e-9,
        "residual_tol": 1e-8,
        "zero_energy_tol": 1e-9,
        "amplitude_floor": 1e-10,
        "dense_max_dim": 2 ** 13,
        "iterative_max_dim": 2 ** 20,
        "component_max_states": 2 ** 22,
        "subset_max_universe": 16,
        "bfs_state_cap": 2 ** 26,
        "walk_steps_factor": 64,
        "threads": 1,
        "seed": 0,
    }

    def __init__(self, config_dir=None, use_env=True):
        self.config_dir = Path(config_dir) if config_dir else Path.home() / '.stoqverify'
        self.config_file = self.config_dir / 'config.json'
        self.values = dict(self.DEFAULTS)
        self.load_config()
        if use_env:
            self.load_env()

    def load_config(self):
        """Charge la configuration depuis le fichier utilisateur"""
        try:
            if self.config_file.exists():
                with open(self.config_file, 'r', encoding='utf-8') as f:
                    data = json.load(f)
                self.update(**{k: v for k, v in data.items() if k in self.DEFAULTS})
                logger.info(f"Configuration chargée depuis {self.config_file}")
            else:
                logger.debug("Aucune configuration utilisateur trouvée")
        except Exception as e:
            logger.error(f"Erreur lors du chargement de la configuration: {e}")

    def load_env(self):
        """Applique les surcharges STOQ_<CLE> de l'environnement"""
        load_dotenv()
        for key in self.DEFAULTS:
            raw = os.environ.get(f"STOQ_{key.upper()}")
            if raw is None:
                continue
            try:
                self.update(**{key: raw})
            except ValueError as e:
                logger.warning(f"Variable STOQ_{key.upper()} ignorée: {e}")

    def save_config(self):
        """Sauvegarde la configuration dans le fichier"""
        try:
            self.config_dir.mkdir(exist_ok=True)
            with open(self.config_file, 'w', encoding='utf-8') as f:
                json.dump(self.values, f, indent=4, sort_keys=True)
            logger.info("Configuration sauvegardée avec succès")
        except Exception as e:
            logger.error(f"Erreur lors de la sauvegarde de la configuration: {e}")

    def update(self, **kwargs):
        """Met à jour des clés connues en respectant le type par défaut"""
        for key, value in kwargs.items():
            if key not in self.DEFAULTS:
                raise KeyError(f"Clé de configuration inconnue: {key}")
            if value is None:
                continue
            if isinstance(self.DEFAULTS[key], int):
                try:
                    self.values[key] = int(value)
                except ValueError:
                    self.values[key] = int(float(value))
            else:
                self.values[key] = float(value)

    def get(self, key):
        return self.values[key]

    def __getattr__(self, key):
        values = self.__dict__.get("values", {})
        if key in values:
            return values[key]
        raise AttributeError(key)

    def tolerance_table(self):
        """Tolérances à estampiller dans chaque rapport"""
        return {k: self.values[k] for k in ("tol", "residual_tol", "zero_energy_tol", "amplitude_floor")}


# Instance globale de configuration
config = Config()
