"""
Module pour les expériences d'expansion.

Ce module fournit l'énergie exacte d'un état-sous-ensemble |S>, l'action
d'un projecteur sur un support, l'algorithme glouton de couches de termes
frustrés disjoints, la recherche multi-couches d'une chaîne mauvaise, le
cône de lumière d'un terme violé et la reconstruction d'un chemin explicite.

Toutes les énergies sont des Fraction : l'appartenance à l'ensemble des
termes frustrés (énergie >= eps/2) ne doit pas dépendre d'arrondis.
"""

import logging
from collections import Counter
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Dict, FrozenSet, Iterable, Iterator, List, Optional, Sequence, Tuple

from stoqverify.core.errors import AnnihilationError, NonUniformError, ParameterError, ReconstructionError
from stoqverify.core.instance_model import DitString, HamiltonianInstance, SetCSPInstance, restrict, splice
from stoqverify.core.stoq_decompose import bad_terms, is_bad
from stoqverify.core.walk_graph import PathStep, PathWitness, as_fraction, neighbors, theoretical_radius

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class SubsetSupport:
    """Ensemble non vide S de chaînes, support de l'état |S>"""

    strings: FrozenSet[DitString]

    def __post_init__(self):
        object.__setattr__(self, "strings", frozenset(tuple(s) for s in self.strings))
        if not self.strings:
            raise ParameterError("Un support doit contenir au moins une chaîne")
        if len({len(s) for s in self.strings}) != 1:
            raise ParameterError("Toutes les chaînes d'un support doivent avoir la même longueur")

    def __len__(self) -> int:
        return len(self.strings)

    def __iter__(self) -> Iterator[DitString]:
        return iter(sorted(self.strings))

    def __contains__(self, x) -> bool:
        return tuple(x) in self.strings

    @classmethod
    def of(cls, strings: Iterable[Sequence[int]]) -> "SubsetSupport":
        return cls(frozenset(tuple(s) for s in strings))


@dataclass(frozen=True)
class Layer:
    """Termes deux à deux disjoints, dans l'ordre de sélection"""

    terms: Tuple[int, ...] = ()

    def __len__(self) -> int:
        return len(self.terms)


@dataclass(frozen=True)
class LightCone:
    apex: int
    layers: Tuple[Tuple[int, ...], ...]
    qudit_sets: Tuple[FrozenSet[int], ...]

    def to_dict(self) -> dict:
        return {
            "apex": self.apex,
            "layers": [list(layer) for layer in self.layers],
            "qudit_sets": [sorted(d) for d in self.qudit_sets],
        }


@dataclass
class LayerRun:
    start: DitString
    epsilon: Fraction
    max_layers: int
    layers: List[Layer] = field(default_factory=list)
    supports: List[SubsetSupport] = field(default_factory=list)
    growth: List[Fraction] = field(default_factory=list)
    bad_string: Optional[DitString] = None
    apex: Optional[int] = None

    @property
    def exhausted(self) -> bool:
        return self.bad_string is None

    def to_dict(self, instance: HamiltonianInstance, trace: bool = False) -> dict:
        report = {
            "start": instance.format_string(self.start),
            "epsilon": str(self.epsilon),
            "max_layers": self.max_layers,
            "exhausted": self.exhausted,
            "layers": [
                {"terms": list(layer.terms), "support_size": len(s), "growth": str(g)}
                for layer, s, g in zip(self.layers, self.supports[1:], self.growth)
            ],
            "bad_string": None if self.bad_string is None else instance.format_string(self.bad_string),
            "apex": self.apex,
        }
        if trace:
            report["supports"] = [[instance.format_string(x) for x in s] for s in self.supports]
        return report


def _require_uniform(term):
    if not term.is_uniform:
        raise NonUniformError(f"Terme non uniforme sur {list(term.qudits)}: énergie de sous-ensemble indéfinie")


def term_energy_subset(S: SubsetSupport, term) -> Fraction:
    """1 - sum_{j,y} |T_j inter S_{B,y}|^2 / (|T_j| |S|) = <S|(I - P)|S>"""
    _require_uniform(term)
    B = term.qudits
    outside = [p for p in range(len(next(iter(S.strings)))) if p not in set(B)]
    counts: Counter = Counter()
    for x in S.strings:
        j = term.class_index(restrict(x, B))
        if j is not None:
            counts[(restrict(x, outside), j)] += 1
    overlap = sum((Fraction(c * c, len(term.classes[j])) for (_, j), c in counts.items()), Fraction(0))
    return 1 - overlap / len(S)


def instance_energy_subset(S: SubsetSupport, instance: HamiltonianInstance) -> Fraction:
    """<S|H|S>, moyenne des énergies des termes"""
    return sum((term_energy_subset(S, t) for t in instance.terms), Fraction(0)) / instance.m


def unsat(setcsp: SetCSPInstance, S: SubsetSupport) -> Fraction:
    """Valeur UNSAT(I, S) d'une instance SetCSP"""
    return sum((term_energy_subset(S, c) for c in setcsp.constraints), Fraction(0)) / setcsp.m


def frustrated_term_count(S: SubsetSupport, instance: HamiltonianInstance, epsilon) -> int:
    """Nombre de termes d'énergie >= eps/2 contre |S>"""
    half = as_fraction(epsilon) / 2
    return sum(1 for t in instance.terms if term_energy_subset(S, t) >= half)


def apply_projector_subset(S: SubsetSupport, term) -> SubsetSupport:
    """Support de P|S> : complétion de classe, les chaînes mauvaises pour le terme disparaissent"""
    B = term.qudits
    out = set()
    for x in S.strings:
        j = term.class_index(restrict(x, B))
        if j is None:
            continue
        out.update(splice(x, B, v) for v in term.class_members(j))
    if not out:
        raise AnnihilationError(f"Toutes les chaînes du support sont mauvaises pour le terme sur {list(B)}")
    return SubsetSupport(frozenset(out))


def is_non_overlapping(terms: Sequence[int], instance: HamiltonianInstance) -> bool:
    seen = set()
    for i in terms:
        B = set(instance.terms[i].qudits)
        if B & seen:
            return False
        seen |= B
    return True


def find_frustrated_layer(S: SubsetSupport, instance: HamiltonianInstance, epsilon) -> Layer:
    """Sélection gloutonne de termes disjoints, chacun eps/2-frustré contre l'état courant"""
    half = as_fraction(epsilon) / 2
    chosen: List[int] = []
    used = set()
    current = S
    while True:
        pick = None
        for i, term in enumerate(instance.terms):
            if i in chosen or used.intersection(term.qudits):
                continue
            if term_energy_subset(current, term) >= half:
                pick = i
                break
        if pick is None:
            break
        chosen.append(pick)
        used.update(instance.terms[pick].qudits)
        current = apply_projector_subset(current, instance.terms[pick])
    logger.debug(f"Couche gloutonne: {chosen}")
    return Layer(tuple(chosen))


def apply_layer(S: SubsetSupport, layer: Layer, instance: HamiltonianInstance) -> SubsetSupport:
    if not is_non_overlapping(layer.terms, instance):
        raise ParameterError(f"Couche {list(layer.terms)} avec des termes qui se chevauchent")
    for i in layer.terms:
        S = apply_projector_subset(S, instance.terms[i])
    return S


def _first_bad(S: SubsetSupport, instance: HamiltonianInstance) -> Optional[Tuple[DitString, int]]:
    for x in S:
        report = bad_terms(x, instance)
        if report.is_bad:
            return x, report.bad_terms[0]
    return None


def layers_to_bad(x: DitString, instance: HamiltonianInstance, epsilon, max_layers: int = None) -> LayerRun:
    """Itère couche gloutonne / application jusqu'à un support contenant une chaîne mauvaise"""
    eps = as_fraction(epsilon)
    if max_layers is None:
        max_layers = theoretical_radius(eps, instance.k, instance.d, instance.q).ell_star
    if max_layers < 1:
        raise ParameterError(f"max_layers doit être >= 1: {max_layers}")
    x = instance.check_string(x)
    run = LayerRun(start=x, epsilon=eps, max_layers=max_layers)
    support = SubsetSupport(frozenset([x]))
    run.supports.append(support)
    hit = _first_bad(support, instance)
    while hit is None and len(run.layers) < max_layers:
        layer = find_frustrated_layer(support, instance, eps)
        if not layer.terms:
            logger.info(f"Couche vide après {len(run.layers)} couche(s): aucune chaîne mauvaise atteinte")
            break
        new = apply_layer(support, layer, instance)
        run.layers.append(layer)
        run.growth.append(Fraction(len(new), len(support)))
        run.supports.append(new)
        logger.info(f"Couche {len(run.layers)}: termes {list(layer.terms)}, |S| {len(support)} -> {len(new)}")
        support = new
        hit = _first_bad(support, instance)
    if hit is not None:
        run.bad_string, run.apex = hit
        logger.info(f"Chaîne mauvaise {instance.format_string(run.bad_string)} pour le terme {run.apex}")
    return run


def lightcone(layers: Sequence[Layer], apex: int, instance: HamiltonianInstance) -> LightCone:
    """Balayage arrière : L^_j = termes de L_j qui touchent D_{j+1}"""
    ell = len(layers)
    k = instance.k
    d_sets: List[FrozenSet[int]] = [frozenset(instance.terms[apex].qudits)]
    cone: List[Tuple[int, ...]] = []
    for j in range(ell, 0, -1):
        above = d_sets[0]
        kept = tuple(i for i in layers[j - 1].terms if above.intersection(instance.terms[i].qudits))
        cone.insert(0, kept)
        d = above.union(*(instance.terms[i].qudits for i in kept))
        if len(d) > k ** (ell - j + 2):
            raise ReconstructionError(
                f"|D_{j}| = {len(d)} dépasse k^{ell - j + 2}",
                {"layer": j, "size": len(d), "bound": k ** (ell - j + 2)},
            )
        d_sets.insert(0, frozenset(d))
    return LightCone(apex, tuple(cone), tuple(d_sets))


def _apply_cone(x: DitString, cone: LightCone, instance: HamiltonianInstance):
    """Applique les couches du cône en gardant un parent par chaîne découverte"""
    parent: Dict[DitString, Optional[Tuple[DitString, int]]] = {x: None}
    current = {x}
    for layer in cone.layers:
        for i in layer:
            term = instance.terms[i]
            new = set()
            for y in sorted(current):
                j = term.class_index(restrict(y, term.qudits))
                if j is None:
                    continue
                for v in term.class_members(j):
                    z = splice(y, term.qudits, v)
                    if z not in parent:
                        parent[z] = (y, i)
                    new.add(z)
            if not new:
                raise ReconstructionError(f"Le terme {i} du cône annule le support", {"term": i})
            current = new
    return current, parent


def cone_reaches_bad(x: DitString, cone: LightCone, instance: HamiltonianInstance) -> bool:
    """Le cône seul produit-il une chaîne mauvaise pour le terme apex ?"""
    current, _ = _apply_cone(tuple(x), cone, instance)
    return any(is_bad(y, instance.terms[cone.apex]) for y in current)


def reconstruct_path(x: DitString, cone: LightCone, instance: HamiltonianInstance,
                     w_star: DitString = None) -> PathWitness:
    """Chemin explicite de x vers une chaîne mauvaise pour le terme apex"""
    x = tuple(x)
    apex_term = instance.terms[cone.apex]
    current, parent = _apply_cone(x, cone, instance)
    candidates = sorted(y for y in current if is_bad(y, apex_term))
    if not candidates:
        raise ReconstructionError(f"Le cône n'atteint aucune chaîne mauvaise pour le terme {cone.apex}")
    end = candidates[0]
    if w_star is not None:
        Q = apex_term.qudits
        matching = [y for y in candidates if restrict(y, Q) == restrict(tuple(w_star), Q)]
        if matching:
            end = matching[0]

    steps = []
    cur = end
    while parent[cur] is not None:
        prev, term = parent[cur]
        steps.append(PathStep(term, cur))
        cur = prev
    steps.reverse()

    prev = x
    for hop, step in enumerate(steps):
        if (step.term, step.string) not in set(neighbors(prev, instance)):
            raise ReconstructionError(f"Pas {hop} hors de G(H)", {"hop": hop})
        prev = step.string
    bound = sum(instance.k ** j for j in range(2, len(cone.layers) + 2))
    if len(steps) > bound:
        raise ReconstructionError(f"Chemin de longueur {len(steps)} > {bound}", {"length": len(steps), "bound": bound})
    return PathWitness(x, tuple(steps))
