"""
Rapports JSON et manifeste de reproductibilité.

Chaque commande produit un unique document JSON sur la sortie standard,
estampillé d'un RunManifest (commande, arguments, graine, tolérances,
version, durée).
"""

import json
import logging
import sys
import time
from fractions import Fraction
from pathlib import Path

import numpy as np

from stoqverify import __version__
from stoqverify.config import config
from stoqverify.utils.schemas import RunManifest

logger = logging.getLogger(__name__)


def build_manifest(command, arguments, started=None):
    """Manifeste de la commande courante"""
    return RunManifest(
        command=command,
        arguments={k: to_jsonable(v) for k, v in sorted(arguments.items())},
        seed=config.seed,
        tolerances=config.tolerance_table(),
        version=__version__,
        wall_time=round(time.perf_counter() - started, 6) if started is not None else 0.0,
    )


def to_jsonable(value):
    """Convertit Fraction, tuples et types numpy en valeurs JSON"""
    if isinstance(value, Fraction):
        return str(value)
    if isinstance(value, (np.integer,)):
        return int(value)
    if isinstance(value, (np.floating,)):
        return float(value)
    if isinstance(value, np.ndarray):
        return [to_jsonable(v) for v in value.tolist()]
    if isinstance(value, Path):
        return str(value)
    if isinstance(value, dict):
        return {str(k): to_jsonable(v) for k, v in value.items()}
    if isinstance(value, (list, tuple, set, frozenset)):
        items = [to_jsonable(v) for v in value]
        return sorted(items, key=str) if isinstance(value, (set, frozenset)) else items
    return value


def render(payload, manifest):
    document = dict(to_jsonable(payload))
    document["manifest"] = manifest.model_dump()
    return json.dumps(document, indent=2, sort_keys=True, ensure_ascii=False) + "\n"


def emit(payload, manifest, stream=None):
    """Écrit le rapport sur la sortie standard (les journaux vont sur stderr)"""
    text = render(payload, manifest)
    (stream or sys.stdout).write(text)
    return text


def error_payload(error):
    return {"error": error.to_dict()}


def write_document(document, path):
    """Écrit un document JSON canonique (instances, circuits, SetCSP)"""
    text = json.dumps(document, indent=2, sort_keys=True) + "\n"
    try:
        Path(path).write_text(text, encoding="utf-8")
        logger.info(f"Document écrit dans {path}")
    except OSError as e:
        logger.error(f"Erreur lors de l'écriture de {path}: {e}", exc_info=True)
        raise
    return text
