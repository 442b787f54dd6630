"""
Module pour la décomposition des termes stoquastiques.

Ce module fournit le projecteur sur l'espace fondamental d'un terme
matriciel, sa décomposition en états non négatifs à supports disjoints
(classes de connexité de P), la certification d'uniformité et la
classification des chaînes « mauvaises ».
"""

import logging
import math
from dataclasses import dataclass, field
from typing import Dict, FrozenSet, List, Sequence, Tuple

import numpy as np
from scipy.sparse import csr_matrix
from scipy.sparse.csgraph import connected_components

from stoqverify.core.errors import DecompositionError, NonUniformError
from stoqverify.core.instance_model import (
    DitString,
    HamiltonianInstance,
    MatrixTerm,
    SetConstraint,
    local_string,
    restrict,
)

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class NonNegState:
    """État non négatif normalisé, donné par son support trié"""

    support: Tuple[DitString, ...]
    amplitudes: Tuple[float, ...]

    def as_vector(self, q: int) -> np.ndarray:
        width = len(self.support[0])
        vec = np.zeros(q ** width)
        for s, a in zip(self.support, self.amplitudes):
            idx = 0
            for c in s:
                idx = idx * q + c
            vec[idx] = a
        return vec


@dataclass(frozen=True)
class NonNegDecomposition:
    q: int
    width: int
    states: Tuple[NonNegState, ...]

    def reassemble(self) -> np.ndarray:
        """sum_j |phi_j><phi_j|"""
        dim = self.q ** self.width
        out = np.zeros((dim, dim))
        for st in self.states:
            v = st.as_vector(self.q)
            out += np.outer(v, v)
        return out

    def supports(self) -> Tuple[FrozenSet[DitString], ...]:
        return tuple(frozenset(st.support) for st in self.states)


@dataclass(frozen=True)
class TermGroundspace:
    """Cache d'un terme matriciel, calculé une fois au chargement"""

    projector: np.ndarray
    shift: float
    spread: float
    decomposition: NonNegDecomposition
    classes: Tuple[FrozenSet[DitString], ...]
    uniform: bool
    lookup: Dict[DitString, int] = field(init=False, repr=False)
    members: Tuple[Tuple[DitString, ...], ...] = field(init=False, repr=False)

    def __post_init__(self):
        lookup = {s: j for j, cls in enumerate(self.classes) for s in cls}
        object.__setattr__(self, "lookup", lookup)
        object.__setattr__(self, "members", tuple(tuple(sorted(c)) for c in self.classes))


@dataclass(frozen=True)
class BadnessReport:
    string: DitString
    verdicts: Tuple[bool, ...]

    @property
    def bad_terms(self) -> List[int]:
        return [i for i, bad in enumerate(self.verdicts) if bad]

    @property
    def is_bad(self) -> bool:
        return any(self.verdicts)


def _ground_eigen(h: np.ndarray, tol: float):
    if h.shape[0] != h.shape[1]:
        raise DecompositionError(f"Matrice non carrée {h.shape}")
    try:
        w, v = np.linalg.eigh((h + h.T) / 2)
    except np.linalg.LinAlgError as e:
        raise DecompositionError(f"Échec du solveur propre: {e}")
    lam_min = float(w[0])
    g = int(np.count_nonzero(w <= lam_min + tol))
    if g < len(w) and w[g] - lam_min < 10 * tol:
        raise DecompositionError(
            f"Tolérance dégénérée: écart {w[g] - lam_min:.3g} < 10*tol après le niveau fondamental",
            {"gap": float(w[g] - lam_min), "tol": tol},
        )
    ground = v[:, :g]
    projector = ground @ ground.T
    return (projector + projector.T) / 2, lam_min, float(w[-1] - lam_min)


def groundspace_projector(term: MatrixTerm, tol: float) -> np.ndarray:
    """Projecteur orthogonal sur le sous-espace propre de la valeur propre minimale"""
    projector, _, _ = _ground_eigen(term.as_array(), tol)
    return projector


def nonneg_decomposition(projector: np.ndarray, tol: float, q: int = 2) -> NonNegDecomposition:
    """Décompose un projecteur stoquastique en états non négatifs à supports disjoints.

    Les chaînes sont regroupées en classes de connexité du graphe
    <x|P|y> > tol ; chaque bloc doit être de rang 1.
    """
    P = np.asarray(projector, dtype=float)
    dim = P.shape[0]
    width = round(math.log(dim, q)) if dim > 1 else 0
    if q ** width != dim:
        raise DecompositionError(f"Dimension {dim} incompatible avec q={q}")
    if (P < -tol).any():
        a, b = np.unravel_index(int(np.argmin(P)), P.shape)
        raise DecompositionError(f"Entrée négative P[{a},{b}] = {P[a, b]:.3g}", {"row": int(a), "col": int(b)})

    active = np.flatnonzero(np.diag(P) > tol)
    adjacency = csr_matrix(P[np.ix_(active, active)] > tol)
    n_comp, labels = connected_components(adjacency, directed=False)

    states = []
    for c in range(n_comp):
        idx = active[labels == c]
        block = P[np.ix_(idx, idx)]
        col = int(np.argmax(np.diag(block)))
        phi = block[:, col] / math.sqrt(block[col, col])
        residual = float(np.linalg.norm(block - np.outer(phi, phi)))
        if residual > 10 * tol:
            raise DecompositionError(
                f"Bloc de rang > 1 (résidu {residual:.3g})",
                {"support": [local_string(int(i), width, q) for i in idx]},
            )
        phi = np.clip(phi, 0.0, None)
        states.append(NonNegState(tuple(local_string(int(i), width, q) for i in idx), tuple(float(a) for a in phi)))

    decomposition = NonNegDecomposition(q, width, tuple(states))
    error = float(np.linalg.norm(decomposition.reassemble() - P))
    if error > 10 * tol:
        raise DecompositionError(f"Réassemblage imprécis (distance {error:.3g})", {"distance": error})
    return decomposition


def uniformize(decomposition: NonNegDecomposition, tol: float) -> Tuple[FrozenSet[DitString], ...]:
    """Supports des états si toutes les amplitudes valent 1/sqrt(|support|)"""
    classes = []
    for j, st in enumerate(decomposition.states):
        target = 1.0 / math.sqrt(len(st.support))
        deviation = max(abs(a - target) for a in st.amplitudes)
        if deviation > tol:
            raise NonUniformError(
                f"État {j} non uniforme (écart {deviation:.3g} > {tol:g})",
                {"state": j, "support": [list(s) for s in st.support], "amplitudes": list(st.amplitudes)},
            )
        classes.append(frozenset(st.support))
    return tuple(classes)


def analyze_term(term: MatrixTerm, tol: float) -> TermGroundspace:
    """Projecteur, décalage, décomposition et classes d'un terme matriciel"""
    projector, lam_min, spread = _ground_eigen(term.as_array(), tol)
    if abs(lam_min) > tol:
        logger.warning(f"Terme sur {list(term.qudits)}: valeur propre minimale {lam_min:.6g}, décalage enregistré")
    decomposition = nonneg_decomposition(projector, tol, q=term.q)
    try:
        classes = uniformize(decomposition, tol)
        uniform = True
        projector = SetConstraint(term.qudits, classes).local_projector(term.q)
    except NonUniformError as e:
        logger.info(f"Terme sur {list(term.qudits)} non uniforme: {e.message}")
        classes = decomposition.supports()
        uniform = False
    logger.debug(f"Terme sur {list(term.qudits)}: {len(classes)} classe(s), uniforme={uniform}")
    return TermGroundspace(projector, lam_min, spread, decomposition, classes, uniform)


def is_bad(x: DitString, term) -> bool:
    """Vrai si x|_B n'appartient à aucune classe du terme"""
    return term.class_index(restrict(x, term.qudits)) is None


def bad_terms(x: DitString, instance: HamiltonianInstance) -> BadnessReport:
    return BadnessReport(tuple(x), tuple(is_bad(x, t) for t in instance.terms))


def describe_term(instance: HamiltonianInstance, i: int) -> dict:
    """Résumé JSON d'un terme (classes ou diagnostic de non-uniformité)"""
    term = instance.terms[i]
    report = {
        "term": i,
        "qudits": list(term.qudits),
        "form": term.form,
        "uniform": term.is_uniform,
        "classes": sorted(sorted(instance.format_string(s) for s in cls) for cls in term.classes),
    }
    if isinstance(term, MatrixTerm):
        gs = term.groundspace
        report["shift"] = gs.shift
        report["states"] = [
            {"support": [instance.format_string(s) for s in st.support], "amplitudes": list(st.amplitudes)}
            for st in gs.decomposition.states
        ]
    return report


def decompose_all(instance: HamiltonianInstance, indices: Sequence[int] = None) -> List[dict]:
    indices = range(instance.m) if indices is None else indices
    return [describe_term(instance, i) for i in indices]
