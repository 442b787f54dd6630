"""
Module pour le graphe implicite G(H) et la marche aléatoire.

Ce module fournit l'énumération des voisins d'une chaîne, la marche
aléatoire de vérification (rejet dès qu'une chaîne mauvaise est atteinte),
la recherche en largeur bornée d'une chaîne mauvaise et le calcul exact des
rayons théoriques.
"""

import logging
import sys
from collections import deque
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from decimal import ROUND_CEILING, Decimal, localcontext
from fractions import Fraction
from typing import Dict, FrozenSet, List, Optional, Tuple, Union

import numpy as np
from tqdm import tqdm

from stoqverify.config import config
from stoqverify.core.errors import ParameterError, SearchCapExceeded
from stoqverify.core.instance_model import DitString, HamiltonianInstance, restrict, splice
from stoqverify.core.stoq_decompose import bad_terms

logger = logging.getLogger(__name__)

ACCEPT = "accept"
REJECT = "reject"


@dataclass(frozen=True)
class PathStep:
    term: int
    string: DitString


@dataclass(frozen=True)
class PathWitness:
    """Chemin explicite dans G(H) : chaque pas indique le terme utilisé"""

    start: DitString
    steps: Tuple[PathStep, ...] = ()

    @property
    def end(self) -> DitString:
        return self.steps[-1].string if self.steps else self.start

    @property
    def length(self) -> int:
        return len(self.steps)

    def strings(self) -> List[DitString]:
        return [self.start] + [s.string for s in self.steps]

    def to_dict(self, instance: HamiltonianInstance) -> dict:
        return {
            "start": instance.format_string(self.start),
            "steps": [{"term": s.term, "string": instance.format_string(s.string)} for s in self.steps],
            "end": instance.format_string(self.end),
            "length": self.length,
        }


@dataclass(frozen=True)
class WalkVerdict:
    outcome: str
    path: PathWitness
    steps_taken: int
    violated_terms: Tuple[int, ...] = ()

    @property
    def accepted(self) -> bool:
        return self.outcome == ACCEPT

    def to_dict(self, instance: HamiltonianInstance) -> dict:
        return {
            "outcome": self.outcome,
            "steps_taken": self.steps_taken,
            "path": self.path.to_dict(instance),
            "violated_terms": list(self.violated_terms),
        }


@dataclass(frozen=True)
class RadiusBound:
    ell_star: int
    path_bound: int
    headline_bound: int

    def to_dict(self) -> dict:
        # entiers arbitrairement grands : sérialisés en texte
        return {"ell_star": self.ell_star, "path_bound": str(self.path_bound), "headline_bound": str(self.headline_bound)}


@dataclass
class WalkTrialsResult:
    trials: int
    accepted: int
    sample_reject: Optional[WalkVerdict] = None
    reject_trial: Optional[int] = None
    outcomes: List[str] = field(default_factory=list, repr=False)

    @property
    def accept_rate(self) -> float:
        return self.accepted / self.trials


@dataclass(frozen=True)
class ReplayReport:
    valid: bool
    failed_hop: Optional[int]
    end_bad_terms: Tuple[int, ...]

    @property
    def ends_bad(self) -> bool:
        return bool(self.end_bad_terms)


def class_of(x: DitString, term) -> Optional[FrozenSet[DitString]]:
    """Classe unique contenant x|_B, ou None si x est mauvaise pour le terme"""
    j = term.class_index(restrict(x, term.qudits))
    return None if j is None else term.classes[j]


def neighbors(x: DitString, instance: HamiltonianInstance) -> List[Tuple[int, DitString]]:
    """Voisins (terme, y) de x dans G(H), sans boucle, triés par (terme, y)"""
    out = []
    for i, term in enumerate(instance.terms):
        j = term.class_index(restrict(x, term.qudits))
        if j is None:
            continue
        for v in term.class_members(j):
            y = splice(x, term.qudits, v)
            if y != x:
                out.append((i, y))
    return sorted(out)


def make_rng(seed: int, trial: int = 0) -> np.random.Generator:
    """Générateur à compteur (Philox) dérivé de (graine, essai)"""
    return np.random.Generator(np.random.Philox(np.random.SeedSequence([int(seed), int(trial)])))


def bt_walk(x0: DitString, instance: HamiltonianInstance, steps: int, seed: int = 0, trial: int = 0) -> WalkVerdict:
    """Marche aléatoire : terme uniforme, puis chaîne uniforme dans la classe (x compris)"""
    if steps < 0:
        raise ParameterError(f"Nombre de pas négatif: {steps}")
    rng = make_rng(seed, trial)
    x = tuple(x0)
    path: List[PathStep] = []
    for step in range(steps):
        report = bad_terms(x, instance)
        if report.is_bad:
            return WalkVerdict(REJECT, PathWitness(tuple(x0), tuple(path)), step, tuple(report.bad_terms))
        i = int(rng.integers(instance.m))
        term = instance.terms[i]
        members = term.class_members(term.class_index(restrict(x, term.qudits)))
        y = splice(x, term.qudits, members[int(rng.integers(len(members)))])
        if y != x:
            path.append(PathStep(i, y))
        x = y
    report = bad_terms(x, instance)
    outcome = REJECT if report.is_bad else ACCEPT
    return WalkVerdict(outcome, PathWitness(tuple(x0), tuple(path)), steps, tuple(report.bad_terms))


def run_walk_trials(x0: DitString, instance: HamiltonianInstance, steps: int, trials: int,
                    seed: int = 0, threads: int = None, progress: bool = False) -> WalkTrialsResult:
    """Répète la marche sur des flux indépendants (graine, essai)"""
    if trials < 1:
        raise ParameterError(f"Au moins un essai est requis (trials={trials})")
    threads = threads or config.threads
    logger.info(f"Marche: {trials} essai(s) de {steps} pas, graine {seed}, {threads} thread(s)")

    def run(trial):
        return bt_walk(x0, instance, steps, seed, trial)

    with tqdm(total=trials, desc="Marches", file=sys.stderr, disable=not progress) as bar:
        if threads > 1:
            with ThreadPoolExecutor(max_workers=threads) as pool:
                verdicts = []
                for v in pool.map(run, range(trials)):
                    verdicts.append(v)
                    bar.update(1)
        else:
            verdicts = []
            for trial in range(trials):
                verdicts.append(run(trial))
                bar.update(1)

    result = WalkTrialsResult(trials=trials, accepted=sum(v.accepted for v in verdicts),
                              outcomes=[v.outcome for v in verdicts])
    for trial, v in enumerate(verdicts):
        if not v.accepted:
            result.sample_reject = v
            result.reject_trial = trial
            break
    logger.info(f"Taux d'acceptation: {result.accept_rate:.4f}")
    return result


def replay_path(path: PathWitness, instance: HamiltonianInstance) -> ReplayReport:
    """Vérifie chaque pas du chemin et la mauvaiseté de l'extrémité"""
    prev = path.start
    for hop, step in enumerate(path.steps):
        term = instance.terms[step.term]
        B = set(term.qudits)
        same_outside = all(prev[p] == step.string[p] for p in range(instance.n) if p not in B)
        j = term.class_index(restrict(prev, term.qudits))
        if (step.string == prev or not same_outside or j is None
                or term.class_index(restrict(step.string, term.qudits)) != j):
            logger.debug(f"Pas {hop} invalide: {prev} -> {step.string} via le terme {step.term}")
            return ReplayReport(False, hop, ())
        prev = step.string
    return ReplayReport(True, None, tuple(bad_terms(path.end, instance).bad_terms))


def _trace(parent: Dict[DitString, Optional[Tuple[DitString, int]]], end: DitString) -> PathWitness:
    steps = []
    cur = end
    while parent[cur] is not None:
        prev, term = parent[cur]
        steps.append(PathStep(term, cur))
        cur = prev
    return PathWitness(cur, tuple(reversed(steps)))


def bfs_to_bad(x: DitString, instance: HamiltonianInstance, radius: Optional[int] = None,
               cap: int = None) -> Optional[PathWitness]:
    """Plus court chemin (longueur <= radius) vers une chaîne mauvaise, ou None"""
    if radius is not None and radius < 0:
        raise ParameterError(f"Rayon négatif: {radius}")
    cap = cap or config.bfs_state_cap
    x = tuple(x)
    if bad_terms(x, instance).is_bad:
        return PathWitness(x)
    parent: Dict[DitString, Optional[Tuple[DitString, int]]] = {x: None}
    frontier = deque([(x, 0)])
    while frontier:
        cur, dist = frontier.popleft()
        if radius is not None and dist >= radius:
            continue
        for i, y in neighbors(cur, instance):
            if y in parent:
                continue
            parent[y] = (cur, i)
            if len(parent) > cap:
                raise SearchCapExceeded(
                    f"Plus de {cap} chaînes visitées (rayon {radius})",
                    {"cap": cap, "radius": radius, "visited": len(parent)},
                )
            if bad_terms(y, instance).is_bad:
                path = _trace(parent, y)
                logger.debug(f"Chaîne mauvaise atteinte en {path.length} pas")
                return path
            frontier.append((y, dist + 1))
    logger.debug(f"Aucune chaîne mauvaise dans le rayon {radius} ({len(parent)} chaînes visitées)")
    return None


def as_fraction(epsilon: Union[float, Fraction, str]) -> Fraction:
    if isinstance(epsilon, float):
        return Fraction(str(epsilon))
    return Fraction(epsilon)


def theoretical_radius(epsilon, k: int, d: int, q: int) -> RadiusBound:
    """l* = ceil((2kd/eps) log_{1+eps/4} q), calculé en décimal 60 chiffres"""
    eps = as_fraction(epsilon)
    if not 0 < eps <= 1:
        raise ParameterError(f"epsilon doit être dans (0, 1]: {epsilon}")
    if k < 1 or d < 1 or q < 2:
        raise ParameterError(f"Paramètres invalides k={k}, d={d}, q={q}")
    with localcontext() as ctx:
        ctx.prec = 60
        e = Decimal(eps.numerator) / Decimal(eps.denominator)
        value = (Decimal(2 * k * d) / e) * Decimal(q).ln() / (1 + e / 4).ln()
        ell_star = int(value.to_integral_value(rounding=ROUND_CEILING))
    if k == 1:
        path_bound = ell_star
    else:
        path_bound = (k ** (ell_star + 2) - k ** 2) // (k - 1)
    return RadiusBound(ell_star, path_bound, k ** ell_star)
