"""
Module pour l'oracle spectral exact.

Ce module fournit la vérité de référence à petite échelle : énergie
fondamentale et état fondamental non négatif (diagonalisation dense ou
itérative sans matrice), décision combinatoire de l'absence de frustration,
minimum UNSAT par énumération, et les inégalités de poids (chaînes mauvaises,
bord du support) utilisées par le vérificateur à frustration négligeable.

H = (1/m) sum_i H~_i avec H~_i = I - P_i pour un terme ensembliste et
H~_i = H_i - lambda_min(H_i) I pour un terme matriciel : chaque terme est
positif et s'annule sur son espace fondamental. Les inégalités de poids
utilisent la forme projecteur (H~_i = I - P_i pour tous les termes).
"""

import logging
from dataclasses import dataclass
from fractions import Fraction
from itertools import product
from typing import Dict, List, Optional, Set

import numpy as np
from scipy.sparse import coo_matrix, csr_matrix, identity
from scipy.sparse.linalg import ArpackError, ArpackNoConvergence, LinearOperator, eigsh

from stoqverify.config import config
from stoqverify.core.errors import OracleError, ParameterError
from stoqverify.core.expansion_lab import SubsetSupport, instance_energy_subset, term_energy_subset
from stoqverify.core.instance_model import DitString, HamiltonianInstance, SetConstraint, SetCSPInstance, local_string
from stoqverify.core.stoq_decompose import bad_terms
from stoqverify.core.walk_graph import bfs_to_bad, neighbors

logger = logging.getLogger(__name__)

AUTO_DENSE_DIM = 2 ** 12
TIE_TOLERANCE = 1e-9


@dataclass
class GroundReport:
    energy: float
    state: np.ndarray
    method: str
    residual: float
    degeneracy: int

    def support(self, floor: float = None) -> np.ndarray:
        floor = config.amplitude_floor if floor is None else floor
        return np.flatnonzero(self.state > floor)

    def to_dict(self, instance: HamiltonianInstance, limit: int = 32) -> dict:
        order = sorted(self.support(), key=lambda i: (-self.state[i], i))[:limit]
        return {
            "energy": self.energy,
            "method": self.method,
            "residual": self.residual,
            "degeneracy": self.degeneracy,
            "support_size": int(len(self.support())),
            "top_amplitudes": [
                {"string": instance.format_string(instance.string_at(int(i))), "amplitude": float(self.state[i])}
                for i in order
            ],
        }


@dataclass
class FrustrationFreeReport:
    frustration_free: bool
    component: Optional[SubsetSupport] = None
    energy: Optional[Fraction] = None
    components_checked: int = 0

    def to_dict(self, instance: HamiltonianInstance) -> dict:
        return {
            "frustration_free": self.frustration_free,
            "component": None if self.component is None else [instance.format_string(x) for x in self.component],
            "energy": None if self.energy is None else str(self.energy),
            "components_checked": self.components_checked,
        }


@dataclass
class MinUnsatResult:
    value: Fraction
    subset: SubsetSupport


@dataclass
class BadDistanceTable:
    """Distance de chaque chaîne à la chaîne mauvaise la plus proche (-1 : inatteignable)"""

    distances: np.ndarray

    @property
    def max_distance(self) -> int:
        finite = self.distances[self.distances >= 0]
        return int(finite.max()) if finite.size else -1

    def distance(self, instance: HamiltonianInstance, x: DitString) -> int:
        return int(self.distances[instance.index_of(x)])


@dataclass
class NiceState:
    state: np.ndarray
    energy_before: float
    energy_after: float
    dropped: int


@dataclass
class BoundaryCheck:
    applicable: bool
    holds: bool
    boundary_size: int
    bound: float


# ---------------------------------------------------------------------------
# Application des termes
# ---------------------------------------------------------------------------

def local_operator(term, q: int, projector_form: bool = False) -> np.ndarray:
    """Terme local positif : I - P pour un terme ensembliste, H_i - lambda_min I
    pour un terme matriciel (ou I - P_i si projector_form)"""
    if projector_form or isinstance(term, SetConstraint):
        p = term.local_projector(q)
        return np.eye(p.shape[0]) - p
    return term.as_array() - term.shift * np.eye(q ** len(term.qudits))


def local_operators(instance: HamiltonianInstance, projector_form: bool = False) -> List[np.ndarray]:
    return [local_operator(t, instance.q, projector_form) for t in instance.terms]


def apply_local(vec: np.ndarray, operator: np.ndarray, qudits, n: int, q: int) -> np.ndarray:
    """(A sur B) tensoriel I appliqué à un vecteur de taille q^n"""
    w = len(qudits)
    moved = np.moveaxis(vec.reshape((q,) * n), list(qudits), list(range(w)))
    shape = moved.shape
    out = operator @ moved.reshape(q ** w, -1)
    return np.moveaxis(out.reshape(shape), list(range(w)), list(qudits)).reshape(-1)


def apply_hamiltonian(instance: HamiltonianInstance, vec: np.ndarray, operators=None) -> np.ndarray:
    operators = operators if operators is not None else local_operators(instance)
    acc = np.zeros_like(vec, dtype=float)
    for t, op in zip(instance.terms, operators):
        acc += apply_local(vec, op, t.qudits, instance.n, instance.q)
    return acc / instance.m


def state_energy(instance: HamiltonianInstance, state: np.ndarray, projector_form: bool = False) -> float:
    state = np.asarray(state, dtype=float)
    operators = local_operators(instance, projector_form)
    return float(state @ apply_hamiltonian(instance, state, operators) / (state @ state))


def embedded_operator(operator: np.ndarray, qudits, n: int, q: int) -> csr_matrix:
    """Matrice creuse de A tensoriel I sur q^n"""
    dim = q ** n
    idx = np.arange(dim)
    digits = np.stack(np.unravel_index(idx, (q,) * n), axis=1)
    weights = q ** np.arange(n - 1, -1, -1)
    B = list(qudits)
    w = len(B)
    a = digits[:, B] @ (q ** np.arange(w - 1, -1, -1))
    base = idx - digits[:, B] @ weights[B]
    rows, cols, vals = [], [], []
    for b in range(q ** w):
        col = base + sum(s * weights[p] for s, p in zip(local_string(b, w, q), B))
        val = operator[a, b]
        mask = val != 0
        rows.append(idx[mask])
        cols.append(col[mask])
        vals.append(val[mask])
    return coo_matrix((np.concatenate(vals), (np.concatenate(rows), np.concatenate(cols))), shape=(dim, dim)).tocsr()


def hamiltonian_matrix(instance: HamiltonianInstance, projector_form: bool = False) -> csr_matrix:
    dim = instance.dimension
    total = csr_matrix((dim, dim))
    for t, op in zip(instance.terms, local_operators(instance, projector_form)):
        total = total + embedded_operator(op, t.qudits, instance.n, instance.q)
    return (total / instance.m).tocsr()


# ---------------------------------------------------------------------------
# Énergie fondamentale
# ---------------------------------------------------------------------------

def _nonneg_representative(vectors: np.ndarray) -> np.ndarray:
    """Projection du vecteur uniforme positif sur l'espace fondamental"""
    ones = np.ones(vectors.shape[0])
    psi = vectors @ (vectors.T @ ones)
    if np.linalg.norm(psi) <= config.amplitude_floor:
        logger.warning("Projection du vecteur uniforme nulle, repli sur la valeur absolue")
        psi = np.abs(vectors[:, 0])
    if psi.min() < -config.amplitude_floor * max(1.0, psi.max()):
        psi = np.abs(psi)
    psi = np.clip(psi, 0.0, None)
    return psi / np.linalg.norm(psi)


def _check_dimension(instance: HamiltonianInstance, method: str):
    dim = instance.dimension
    cap = config.dense_max_dim if method == "dense" else config.iterative_max_dim
    if dim > cap:
        raise OracleError(f"Dimension {dim} trop grande pour la méthode {method} (max {cap})",
                          {"dimension": dim, "cap": cap, "method": method})


def ground_energy(instance: HamiltonianInstance, method: str = "auto") -> GroundReport:
    """Valeur propre minimale de H et état fondamental non négatif"""
    if method == "auto":
        method = "dense" if instance.dimension <= AUTO_DENSE_DIM else "iterative"
    if method not in ("dense", "iterative"):
        raise ParameterError(f"Méthode inconnue: {method}")
    _check_dimension(instance, method)
    operators = local_operators(instance)
    cluster_tol = config.residual_tol

    if method == "dense" or instance.dimension <= 2:
        h = hamiltonian_matrix(instance).toarray()
        w, v = np.linalg.eigh(h)
        energy = float(w[0])
        g = int(np.count_nonzero(w <= energy + cluster_tol))
        psi = _nonneg_representative(v[:, :g])
    else:
        dim = instance.dimension
        operator = LinearOperator((dim, dim), dtype=float,
                                  matvec=lambda x: x - apply_hamiltonian(instance, x, operators))
        n_vec = min(6, dim - 1)
        try:
            mu, v = eigsh(operator, k=n_vec, which="LA", v0=np.ones(dim), tol=1e-12)
        except (ArpackNoConvergence, ArpackError) as e:
            raise OracleError(f"Non-convergence du solveur itératif: {e}")
        order = np.argsort(-mu)
        mu, v = mu[order], v[:, order]
        energy = float(1.0 - mu[0])
        g = int(np.count_nonzero(mu >= mu[0] - cluster_tol))
        q_basis, _ = np.linalg.qr(v[:, :g])
        psi = _nonneg_representative(q_basis)

    residual = float(np.linalg.norm(apply_hamiltonian(instance, psi, operators) - energy * psi))
    if residual > config.residual_tol:
        raise OracleError(f"Résidu {residual:.3g} > {config.residual_tol:g}", {"residual": residual})
    logger.info(f"Énergie fondamentale {energy:.12g} ({method}, dégénérescence {g})")
    return GroundReport(energy, psi, method, residual, g)


def witness_from_groundstate(instance: HamiltonianInstance, report: GroundReport = None) -> DitString:
    """Chaîne d'amplitude maximale (égalités : plus petite dans l'ordre lexicographique)"""
    report = report or ground_energy(instance)
    psi = report.state
    best = np.flatnonzero(psi >= psi.max() - TIE_TOLERANCE)
    return instance.string_at(int(best[0]))


# ---------------------------------------------------------------------------
# Décisions combinatoires
# ---------------------------------------------------------------------------

def _component(x: DitString, instance: HamiltonianInstance) -> Set[DitString]:
    seen = {x}
    stack = [x]
    while stack:
        cur = stack.pop()
        for _, y in neighbors(cur, instance):
            if y not in seen:
                seen.add(y)
                stack.append(y)
    return seen


def exact_frustration_free(instance: HamiltonianInstance) -> FrustrationFreeReport:
    """Existe-t-il une composante connexe de G(H) sans chaîne mauvaise ?"""
    if instance.dimension > config.component_max_states:
        raise OracleError(f"{instance.dimension} chaînes > {config.component_max_states}",
                          {"dimension": instance.dimension})
    visited: Set[DitString] = set()
    checked = 0
    for x in instance.all_strings():
        if x in visited:
            continue
        comp = _component(x, instance)
        visited |= comp
        checked += 1
        if any(bad_terms(y, instance).is_bad for y in comp):
            continue
        support = SubsetSupport(frozenset(comp))
        energy = instance_energy_subset(support, instance) if instance.uniform else None
        if energy is not None and energy != 0:
            raise OracleError(f"Composante fermée d'énergie {energy} != 0")
        logger.info(f"Composante sans chaîne mauvaise trouvée ({len(comp)} chaînes)")
        return FrustrationFreeReport(True, support, energy, checked)
    return FrustrationFreeReport(False, None, None, checked)


def min_unsat_over_subsets(setcsp: SetCSPInstance, cap: int = None) -> MinUnsatResult:
    """Minimum exact de UNSAT(I, S) sur tous les S non vides"""
    cap = cap or config.subset_max_universe
    universe = list(product(range(setcsp.q), repeat=setcsp.n))
    if len(universe) > cap:
        raise OracleError(f"Univers de {len(universe)} chaînes > {cap}", {"universe": len(universe), "cap": cap})
    best = None
    for mask in range(1, 2 ** len(universe)):
        S = SubsetSupport(frozenset(s for b, s in enumerate(universe) if mask >> b & 1))
        value = sum((term_energy_subset(S, c) for c in setcsp.constraints), Fraction(0)) / setcsp.m
        if best is None or value < best.value:
            best = MinUnsatResult(value, S)
    return best


def bad_distance_table(instance: HamiltonianInstance) -> BadDistanceTable:
    """Parcours en largeur multi-sources depuis toutes les chaînes mauvaises"""
    if instance.dimension > config.component_max_states:
        raise OracleError(f"{instance.dimension} chaînes > {config.component_max_states}")
    dist = np.full(instance.dimension, -1, dtype=np.int64)
    frontier = []
    for x in instance.all_strings():
        if bad_terms(x, instance).is_bad:
            dist[instance.index_of(x)] = 0
            frontier.append(x)
    level = 0
    while frontier:
        level += 1
        nxt = []
        for x in frontier:
            for _, y in neighbors(x, instance):
                i = instance.index_of(y)
                if dist[i] < 0:
                    dist[i] = level
                    nxt.append(y)
        frontier = nxt
    return BadDistanceTable(dist)


# ---------------------------------------------------------------------------
# Inégalités de poids
# ---------------------------------------------------------------------------

def _normalized_state(state) -> np.ndarray:
    state = np.asarray(state, dtype=float)
    if state.min() < -config.amplitude_floor:
        raise ParameterError("L'état doit être non négatif")
    norm = np.linalg.norm(state)
    if norm == 0:
        raise ParameterError("État nul")
    return np.clip(state, 0.0, None) / norm


def _support_strings(state: np.ndarray, instance: HamiltonianInstance) -> Set[DitString]:
    return {instance.string_at(int(i)) for i in np.flatnonzero(state > config.amplitude_floor)}


def boundary_strings(support, instance: HamiltonianInstance) -> Set[DitString]:
    """Chaînes du support ayant un voisin de G(H) hors du support"""
    support = set(support)
    return {x for x in support if any(y not in support for _, y in neighbors(x, instance))}


def bad_weight_check(state, instance: HamiltonianInstance) -> bool:
    """sum_{x mauvaise} alpha_x^2 <= m <psi|H|psi>, H pris sous forme projecteur"""
    psi = _normalized_state(state)
    bad_weight = sum(psi[instance.index_of(x)] ** 2 for x in _support_strings(psi, instance)
                     if bad_terms(x, instance).is_bad)
    return bad_weight <= instance.m * state_energy(instance, psi, projector_form=True) + config.residual_tol


def boundary_weight_check(state, instance: HamiltonianInstance) -> bool:
    """<psi|H|psi> >= (1/(q^k m)) sum_{x dans N} alpha_x^2, H pris sous forme projecteur"""
    psi = _normalized_state(state)
    boundary = boundary_strings(_support_strings(psi, instance), instance)
    weight = sum(psi[instance.index_of(x)] ** 2 for x in boundary)
    energy = state_energy(instance, psi, projector_form=True)
    return energy + config.residual_tol >= weight / (instance.q ** instance.k * instance.m)


def boundary_size_check(state, instance: HamiltonianInstance, g: float, h: float) -> BoundaryCheck:
    """|N| < m q^k g / h |S| lorsque les hypothèses (pas de chaîne mauvaise,
    amplitudes >= 1/sqrt(g|S|), énergie < 1/h) sont satisfaites"""
    psi = _normalized_state(state)
    support = _support_strings(psi, instance)
    boundary = boundary_strings(support, instance)
    bound = instance.m * instance.q ** instance.k * g / h * len(support)
    delta = 1.0 / np.sqrt(g * len(support))
    applicable = (
        not any(bad_terms(x, instance).is_bad for x in support)
        and all(psi[instance.index_of(x)] >= delta for x in support)
        and state_energy(instance, psi, projector_form=True) < 1.0 / h
    )
    return BoundaryCheck(applicable, (not applicable) or len(boundary) < bound, len(boundary), bound)


def nice_state(state, instance: HamiltonianInstance, delta: float) -> NiceState:
    """Retire les chaînes mauvaises et les amplitudes < delta, puis renormalise"""
    psi = _normalized_state(state)
    before = state_energy(instance, psi)
    kept = psi.copy()
    dropped = 0
    for i in np.flatnonzero(psi > 0):
        if psi[i] < delta or bad_terms(instance.string_at(int(i)), instance).is_bad:
            kept[i] = 0.0
            dropped += 1
    if not kept.any():
        raise ParameterError(f"Aucune chaîne ne survit au seuil delta={delta}")
    kept /= np.linalg.norm(kept)
    return NiceState(kept, before, state_energy(instance, kept), dropped)


def protected_witness(instance: HamiltonianInstance, t: int, report: GroundReport = None) -> Optional[DitString]:
    """Chaîne du support fondamental dont toute la boule de rayon t est bonne"""
    report = report or ground_energy(instance)
    psi = report.state
    for i in sorted(report.support(), key=lambda i: (-psi[i], i)):
        x = instance.string_at(int(i))
        if bfs_to_bad(x, instance, t) is None:
            return x
    return None


def oracle_summary(instance: HamiltonianInstance) -> Dict[str, object]:
    """Énergie fondamentale, absence de frustration et témoin en un seul rapport"""
    report = ground_energy(instance)
    ff = exact_frustration_free(instance)
    return {
        "ground": report.to_dict(instance),
        "frustration_free": ff.to_dict(instance),
        "witness": instance.format_string(witness_from_groundstate(instance, report)),
    }
