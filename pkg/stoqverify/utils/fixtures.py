"""
Module pour la bibliothèque d'instances de référence.

Ce module fournit FixtureLibrary, qui recense les fichiers JSON livrés avec
le paquet (instances E1 à E7 et circuits) et les charge par nom ou par
chemin.
"""

import os
import logging
from pathlib import Path

from stoqverify.core.circuit2ham import load_circuit
from stoqverify.core.errors import InstanceParseError
from stoqverify.core.instance_model import load_instance

# Initialiser le logger
logger = logging.getLogger(__name__)

FIXTURES_DIR = Path(__file__).resolve().parent.parent / "fixtures"


class FixtureLibrary:
    """Gestionnaire des instances de référence"""

    # Catalogue des instances livrées
    AVAILABLE_FIXTURES = {
        "E1": {
            "kind": "instance",
            "description": "Exemple à 4 qubits : deux termes de Bell sur {0,3} et {1,2}",
            "frustration_free": True,
        },
        "E2": {
            "kind": "instance",
            "description": "Terme unique de classes {{00,11}}",
            "frustration_free": True,
        },
        "E3": {
            "kind": "instance",
            "description": "Deux projecteurs de Bell orthogonaux sur la même paire",
            "frustration_free": False,
        },
        "E4": {
            "kind": "instance",
            "description": "Paire chevauchante sans frustration, termes commutants",
            "frustration_free": True,
        },
        "E5": {
            "kind": "instance",
            "description": "Chaîne frustrée à 3 qubits avec un terme déficient sur {0,2}",
            "frustration_free": False,
        },
        "E6": {
            "kind": "instance",
            "description": "E1 plus un terme 4-local qui exclut 1111",
            "frustration_free": True,
        },
        "E7": {
            "kind": "instance",
            "description": "E1 plus un terme matriciel diagonal faible sur le qudit 0 (frustration faible)",
            "frustration_free": False,
        },
        "not_output": {
            "kind": "circuit",
            "description": "NOT sur une ancilla |0>, qui est la sortie (accepte toujours)",
        },
        "untouched_output": {
            "kind": "circuit",
            "description": "Sortie sur une ancilla |0> jamais touchée (rejette toujours)",
        },
        "witness_output": {
            "kind": "circuit",
            "description": "Sortie égale au fil témoin, aucune porte",
        },
        "fanout5": {
            "kind": "circuit",
            "description": "Un fil utilisé par cinq portes (réduction de degré)",
        },
    }

    def __init__(self, fixtures_dir=None):
        """Initialise la bibliothèque"""
        self.fixtures_dir = Path(fixtures_dir) if fixtures_dir else FIXTURES_DIR
        self.installed = self._scan_fixtures_directory()

    def _scan_fixtures_directory(self):
        """Recense les fichiers JSON présents sur le disque"""
        installed = {}
        if not self.fixtures_dir.exists():
            logger.warning(f"Le dossier des instances n'existe pas: {self.fixtures_dir}")
            return installed
        try:
            for root, _, files in os.walk(self.fixtures_dir):
                for name in sorted(files):
                    if name.endswith(".json"):
                        installed[Path(name).stem] = Path(root) / name
        except Exception as e:
            logger.error(f"Erreur lors du parcours du dossier des instances: {e}", exc_info=True)
        unknown = sorted(set(installed) - set(self.AVAILABLE_FIXTURES))
        if unknown:
            logger.debug(f"Fichiers hors catalogue: {unknown}")
        logger.debug(f"Instances trouvées: {sorted(installed)}")
        return installed

    def names(self, kind=None):
        return [name for name, info in self.AVAILABLE_FIXTURES.items()
                if name in self.installed and (kind is None or info["kind"] == kind)]

    def path(self, name_or_path):
        """Chemin d'un fichier, à partir d'un nom du catalogue ou d'un chemin"""
        candidate = Path(name_or_path)
        if candidate.exists():
            return candidate
        name = candidate.stem if candidate.suffix == ".json" else str(name_or_path)
        if name in self.installed:
            return self.installed[name]
        raise InstanceParseError(f"Fichier ou instance inconnue: {name_or_path}",
                                 {"available": sorted(self.installed)})

    def load(self, name_or_path):
        """Charge une instance hamiltonienne"""
        return load_instance(self.path(name_or_path))

    def load_circuit(self, name_or_path):
        return load_circuit(self.path(name_or_path))

    def info(self, name):
        return self.AVAILABLE_FIXTURES.get(name, {})


# Instance globale
fixtures = FixtureLibrary()
