"""
Module pour les procédures de vérification.

Ce module fournit le vérificateur NP à rayon constant, sa variante à
frustration négligeable, le vérificateur « épinglé » sans témoin, le
vérificateur pour termes commutants et l'enveloppe MA (marche aléatoire).
Chaque verdict porte sa preuve : un chemin rejouable ou les termes violés.
"""

import logging
from dataclasses import dataclass
from fractions import Fraction
from typing import List, Optional, Tuple, Union

import numpy as np

from stoqverify.config import config
from stoqverify.core.errors import NonCommutingError, ParameterError
from stoqverify.core.instance_model import (
    DitString,
    HamiltonianInstance,
    SetConstraint,
    projector_complement_entries,
    restrict,
)
from stoqverify.core.stoq_decompose import bad_terms
from stoqverify.core.walk_graph import (
    ACCEPT,
    REJECT,
    PathWitness,
    WalkVerdict,
    bfs_to_bad,
    run_walk_trials,
    theoretical_radius,
)

logger = logging.getLogger(__name__)


@dataclass
class VerifierConfig:
    """Paramètres communs des vérificateurs"""

    epsilon: Optional[Union[float, Fraction]] = None
    radius: Optional[int] = None
    steps: Optional[int] = None
    trials: int = 1
    seed: int = 0
    tol: Optional[float] = None
    cap: Optional[int] = None
    threads: Optional[int] = None

    def resolve_radius(self, instance: HamiltonianInstance) -> int:
        """Rayon explicite, ou borne de chemin dérivée de (epsilon, k, d, q)"""
        if self.radius is not None:
            if self.radius < 0:
                raise ParameterError(f"Rayon négatif: {self.radius}")
            return self.radius
        if self.epsilon is None:
            raise ParameterError("Il faut fournir un rayon ou un epsilon")
        bound = theoretical_radius(self.epsilon, instance.k, instance.d, instance.q)
        logger.info(f"Rayon dérivé: l*={bound.ell_star}, borne de chemin {bound.path_bound}")
        return bound.path_bound

    def resolve_steps(self, instance: HamiltonianInstance) -> int:
        if self.steps is not None:
            return self.steps
        return config.walk_steps_factor * instance.n * instance.m

    @staticmethod
    def precision_budget(instance: HamiltonianInstance) -> Fraction:
        return Fraction(1, 4 * instance.q ** instance.k)


def _search_verdict(instance: HamiltonianInstance, witness: DitString, radius: int, cap: Optional[int]) -> WalkVerdict:
    witness = instance.check_string(witness)
    path = bfs_to_bad(witness, instance, radius, cap)
    if path is None:
        logger.info(f"Témoin {instance.format_string(witness)} accepté (rayon {radius})")
        return WalkVerdict(ACCEPT, PathWitness(witness), 0)
    logger.info(f"Témoin {instance.format_string(witness)} rejeté: chaîne mauvaise à distance {path.length}")
    return WalkVerdict(REJECT, path, path.length, tuple(bad_terms(path.end, instance).bad_terms))


def np_verify(instance: HamiltonianInstance, witness: DitString, cfg: VerifierConfig) -> WalkVerdict:
    """Rejette ssi une chaîne mauvaise est à distance <= rayon du témoin"""
    return _search_verdict(instance, witness, cfg.resolve_radius(instance), cfg.cap)


def negligible_verify(instance: HamiltonianInstance, witness: DitString, t: int,
                      cfg: VerifierConfig = None) -> WalkVerdict:
    """Même recherche au rayon t (promesse : témoin protégé)"""
    if t < 0:
        raise ParameterError(f"Rayon t négatif: {t}")
    return _search_verdict(instance, witness, t, cfg.cap if cfg else None)


def pinned_verify(instance: HamiltonianInstance, cfg: VerifierConfig) -> WalkVerdict:
    """Vérificateur NP avec le témoin fixé à 0...0"""
    return np_verify(instance, (0,) * instance.n, cfg)


def ma_verify(instance: HamiltonianInstance, witness: DitString, steps: int, trials: int,
              seed: int = 0, threads: int = None) -> float:
    """Fréquence d'acceptation de la marche sur `trials` graines"""
    witness = instance.check_string(witness)
    return run_walk_trials(witness, instance, steps, trials, seed, threads).accept_rate


def pinned_walk(instance: HamiltonianInstance, steps: int, trials: int, seed: int = 0, threads: int = None) -> float:
    """Marche depuis 0...0, sans témoin"""
    return ma_verify(instance, (0,) * instance.n, steps, trials, seed, threads)


def negligible_threshold(t: int, k: int, q: int, m: int) -> Fraction:
    """Borne exacte 1/(q^k m)^(2(t+2)) sur l'énergie des instances oui"""
    return Fraction(1, (q ** k * m) ** (2 * (t + 2)))


def negligible_radius(epsilon, k: int, d: int, q: int) -> int:
    """t = k^l*"""
    return theoretical_radius(epsilon, k, d, q).headline_bound


# ---------------------------------------------------------------------------
# Cas commutant
# ---------------------------------------------------------------------------

def term_operator(term, q: int) -> np.ndarray:
    """Matrice de H_i (I - P pour une contrainte ensembliste), en Fraction si exacte"""
    rows = projector_complement_entries(term, q) if isinstance(term, SetConstraint) else term.entries
    exact = all(isinstance(v, Fraction) for row in rows for v in row)
    return np.array([list(r) for r in rows], dtype=object if exact else float)


def embed_operator(op: np.ndarray, qudits, union, q: int) -> np.ndarray:
    """op tensoriel I sur l'union des supports, qudits rangés dans l'ordre de union"""
    total = len(union)
    identity = np.eye(q ** (total - len(qudits)), dtype=op.dtype)
    full = np.kron(op, identity)
    # axes de full : qudits du terme puis les autres, à ramener à l'ordre de union
    order = [union.index(p) for p in qudits] + [i for i, p in enumerate(union) if p not in qudits]
    perm = [int(a) for a in np.argsort(order)]
    tensor = full.reshape((q,) * (2 * total)).transpose(perm + [total + a for a in perm])
    return tensor.reshape(q ** total, q ** total)


def commutator_norm(first, second, q: int, tol: float = None) -> Tuple[bool, float]:
    """Teste [H_a, H_b] = 0 sur l'union des supports (exact si possible)"""
    tol = config.tol if tol is None else tol
    A, B = term_operator(first, q), term_operator(second, q)
    exact = A.dtype == object and B.dtype == object
    if not exact:
        A, B = A.astype(float), B.astype(float)
    union = sorted(set(first.qudits) | set(second.qudits))
    EA, EB = embed_operator(A, first.qudits, union, q), embed_operator(B, second.qudits, union, q)
    worst = max(abs(v) for v in (EA @ EB - EB @ EA).ravel())
    if exact:
        return worst == 0, float(worst)
    return worst <= tol, float(worst)


def non_commuting_pairs(instance: HamiltonianInstance, tol: float = None) -> List[Tuple[int, int]]:
    pairs = []
    for a in range(instance.m):
        for b in range(a + 1, instance.m):
            first, second = instance.terms[a], instance.terms[b]
            if not first.touches(second):
                continue
            ok, worst = commutator_norm(first, second, instance.q, tol)
            if not ok:
                logger.debug(f"Termes {a} et {b} ne commutent pas (écart {worst:.3g})")
                pairs.append((a, b))
    return pairs


def check_commuting(instance: HamiltonianInstance, tol: float = None) -> bool:
    """Vrai ssi tous les termes qui se chevauchent commutent"""
    return not non_commuting_pairs(instance, tol)


def _approximate(value, budget: Fraction) -> Fraction:
    if isinstance(value, Fraction):
        return value
    # arrondi à une grille de pas `budget` : erreur <= budget/2
    return Fraction(round(value / float(budget))) * budget


def commuting_overlaps(instance: HamiltonianInstance, witness: DitString) -> List[Fraction]:
    """<x_Q|P'_i|x_Q> pour chaque terme, exacts pour les termes uniformes"""
    budget = VerifierConfig.precision_budget(instance)
    return [_approximate(term.overlap(restrict(witness, term.qudits)), budget) for term in instance.terms]


def commuting_verify(instance: HamiltonianInstance, witness: DitString, cfg: VerifierConfig = None) -> WalkVerdict:
    """Rejette si <x_Q|P'_i|x_Q> <= 1/(2 q^k) pour un terme i"""
    tol = cfg.tol if cfg and cfg.tol is not None else None
    pairs = non_commuting_pairs(instance, tol)
    if pairs:
        raise NonCommutingError(f"{len(pairs)} paire(s) de termes non commutants", {"pairs": [list(p) for p in pairs]})
    witness = instance.check_string(witness)
    threshold = Fraction(1, 2 * instance.q ** instance.k)
    overlaps = commuting_overlaps(instance, witness)
    violated = tuple(i for i, v in enumerate(overlaps) if v <= threshold)
    outcome = REJECT if violated else ACCEPT
    logger.info(f"Vérification commutative: {outcome} (seuil {threshold}, termes violés {list(violated)})")
    return WalkVerdict(outcome, PathWitness(witness), 0, violated)
