"""
Module pour la compilation de circuits réversibles en hamiltoniens.

Ce module fournit le modèle de circuit (NOT, CNOT, TOFFOLI sur des fils
témoin, ancilla |0> ou ancilla |+>), sa simulation classique, la réduction
de degré par copies en cascade et la construction d'horloge unaire qui
produit une instance stoquastique uniforme.

Disposition des qudits de l'instance : les fils de données d'abord
(0..W-1), puis les qubits d'horloge c_1..c_T (W..W+T-1). L'instant t est
codé par 1^t 0^(T-t) : la chaîne nulle est l'état initial de l'horloge.
"""

import json
import logging
from dataclasses import dataclass, field
from fractions import Fraction
from itertools import product
from pathlib import Path
from typing import Dict, List, Optional, Sequence, Tuple

from pydantic import ValidationError

from stoqverify.core.errors import CircuitError
from stoqverify.core.instance_model import Alphabet, HamiltonianInstance, MatrixTerm
from stoqverify.utils.schemas import CircuitFile

logger = logging.getLogger(__name__)

GATE_ARITY = {"NOT": 1, "CNOT": 2, "TOFFOLI": 3}
ROLES = ("witness", "zero", "plus")
HALF = Fraction(1, 2)


@dataclass(frozen=True)
class Gate:
    kind: str
    targets: Tuple[int, ...]

    def apply(self, bits: List[int]):
        # la cible est toujours le dernier fil
        if all(bits[w] for w in self.targets[:-1]):
            bits[self.targets[-1]] ^= 1

    def permutation(self) -> List[int]:
        """U|z> = |perm[z]> sur les fils de la porte (ordre des cibles)"""
        w = len(self.targets)
        perm = []
        for z in range(2 ** w):
            bits = [(z >> (w - 1 - i)) & 1 for i in range(w)]
            if all(bits[:-1]):
                bits[-1] ^= 1
            perm.append(sum(b << (w - 1 - i) for i, b in enumerate(bits)))
        return perm


@dataclass(frozen=True)
class ReversibleCircuit:
    roles: Tuple[str, ...]
    gates: Tuple[Gate, ...]
    output: int
    description: Optional[str] = None

    def __post_init__(self):
        object.__setattr__(self, "roles", tuple(self.roles))
        object.__setattr__(self, "gates", tuple(self.gates))
        problems = []
        if not self.roles:
            problems.append("au moins un fil est requis")
        for w, role in enumerate(self.roles):
            if role not in ROLES:
                problems.append(f"fil {w}: rôle inconnu {role!r}")
        if not 0 <= self.output < len(self.roles):
            problems.append(f"fil de sortie {self.output} hors limites")
        for t, gate in enumerate(self.gates):
            if gate.kind not in GATE_ARITY:
                problems.append(f"porte {t}: type inconnu {gate.kind!r}")
            elif len(gate.targets) != GATE_ARITY[gate.kind]:
                problems.append(f"porte {t}: {gate.kind} attend {GATE_ARITY[gate.kind]} fil(s)")
            if len(set(gate.targets)) != len(gate.targets):
                problems.append(f"porte {t}: fils répétés {list(gate.targets)}")
            if any(not 0 <= w < len(self.roles) for w in gate.targets):
                problems.append(f"porte {t}: fil hors limites {list(gate.targets)}")
        if problems:
            raise CircuitError(f"Circuit invalide: {'; '.join(problems)}", {"problems": problems})

    @property
    def width(self) -> int:
        return len(self.roles)

    @property
    def size(self) -> int:
        return len(self.gates)

    def wires_with_role(self, role: str) -> List[int]:
        return [w for w, r in enumerate(self.roles) if r == role]

    def uses(self) -> Dict[int, List[int]]:
        """Indices (0-based) des portes qui touchent chaque fil"""
        out: Dict[int, List[int]] = {w: [] for w in range(self.width)}
        for t, gate in enumerate(self.gates):
            for w in gate.targets:
                out[w].append(t)
        return out


@dataclass
class CompiledCircuit:
    instance: HamiltonianInstance
    data_wires: int
    clock: List[int]
    labels: List[str] = field(default_factory=list)


def parse_circuit(raw) -> ReversibleCircuit:
    if isinstance(raw, Path):
        raw = raw.read_bytes()
    try:
        data = json.loads(raw)
        spec = CircuitFile.model_validate(data)
    except json.JSONDecodeError as e:
        raise CircuitError(f"JSON invalide: {e}")
    except ValidationError as e:
        raise CircuitError(f"Format de circuit invalide: {e.error_count()} erreur(s)",
                           {"errors": [err["msg"] for err in e.errors()]})
    gates = tuple(Gate(g.kind, tuple(g.targets)) for g in spec.gates)
    return ReversibleCircuit(tuple(w.role for w in spec.wires), gates, spec.output, spec.description)


def load_circuit(path) -> ReversibleCircuit:
    return parse_circuit(Path(path).read_bytes())


def dump_circuit(c: ReversibleCircuit) -> dict:
    doc = {
        "wires": [{"role": r} for r in c.roles],
        "gates": [{"kind": g.kind, "targets": list(g.targets)} for g in c.gates],
        "output": c.output,
    }
    if c.description:
        doc["description"] = c.description
    return doc


def simulate_circuit(c: ReversibleCircuit, witness_bits: Sequence[int], random_bits: Sequence[int]) -> bool:
    """Évaluation classique ; accepte ssi le fil de sortie vaut 1"""
    witness_wires = c.wires_with_role("witness")
    plus_wires = c.wires_with_role("plus")
    if len(witness_bits) != len(witness_wires) or len(random_bits) != len(plus_wires):
        raise CircuitError(
            f"Tailles attendues: {len(witness_wires)} bit(s) de témoin, {len(plus_wires)} bit(s) aléatoire(s)",
            {"witness": len(witness_bits), "random": len(random_bits)},
        )
    bits = [0] * c.width
    for w, b in zip(witness_wires, witness_bits):
        bits[w] = int(b) & 1
    for w, b in zip(plus_wires, random_bits):
        bits[w] = int(b) & 1
    for gate in c.gates:
        gate.apply(bits)
    return bits[c.output] == 1


def acceptance_probability(c: ReversibleCircuit, witness_bits: Sequence[int]) -> Fraction:
    n_random = len(c.wires_with_role("plus"))
    hits = sum(simulate_circuit(c, witness_bits, r) for r in product((0, 1), repeat=n_random))
    return Fraction(hits, 2 ** n_random)


def has_perfect_witness(c: ReversibleCircuit) -> bool:
    """Existe-t-il un témoin accepté pour tous les bits aléatoires ?"""
    n_witness = len(c.wires_with_role("witness"))
    return any(acceptance_probability(c, w) == 1 for w in product((0, 1), repeat=n_witness))


def degree_reduce(c: ReversibleCircuit) -> ReversibleCircuit:
    """Chaque fil utilisé par plus de 3 portes est remplacé par une chaîne de copies.

    Avant chaque utilisation après la première, un CNOT copie la valeur
    courante dans une ancilla |0> neuve qui prend le relais : chaque maillon
    sert au plus 3 fois (cible de la copie, calcul, source de la copie suivante).
    """
    heavy = {w for w, uses in c.uses().items() if len(uses) > 3}
    if not heavy:
        return c
    roles = list(c.roles)
    current = list(range(c.width))
    seen = set()
    gates: List[Gate] = []
    for gate in c.gates:
        for w in gate.targets:
            if w in heavy and w in seen:
                fresh = len(roles)
                roles.append("zero")
                gates.append(Gate("CNOT", (current[w], fresh)))
                current[w] = fresh
            seen.add(w)
        gates.append(Gate(gate.kind, tuple(current[w] for w in gate.targets)))
    logger.info(f"Réduction de degré: {len(roles) - c.width} ancilla(s) de copie ajoutée(s)")
    return ReversibleCircuit(tuple(roles), tuple(gates), current[c.output], c.description)


# ---------------------------------------------------------------------------
# Construction des termes
# ---------------------------------------------------------------------------

def _diag_term(qudits: Sequence[int], penalized: Sequence[int]) -> MatrixTerm:
    dim = 2 ** len(qudits)
    rows = [[Fraction(0)] * dim for _ in range(dim)]
    for a in penalized:
        rows[a][a] = Fraction(1)
    return MatrixTerm(tuple(qudits), tuple(tuple(r) for r in rows), q=2)


def _minus_term(clock: Optional[int], wire: int) -> MatrixTerm:
    """|-><-| sur le fil (conditionné à |0><0| de l'horloge si fournie)"""
    if clock is None:
        rows = [[HALF, -HALF], [-HALF, HALF]]
        return MatrixTerm((wire,), tuple(tuple(r) for r in rows), q=2)
    rows = [[Fraction(0)] * 4 for _ in range(4)]
    rows[0][0], rows[0][1], rows[1][0], rows[1][1] = HALF, -HALF, -HALF, HALF
    return MatrixTerm((clock, wire), tuple(tuple(r) for r in rows), q=2)


def _propagation_term(window: Sequence[int], a: int, b: int, gate: Gate) -> MatrixTerm:
    """1/2(|a><a| + |b><b|) x I - 1/2(|b><a| x U + |a><b| x U^T)"""
    g = len(gate.targets)
    block = 2 ** g
    dim = 2 ** len(window) * block
    rows = [[Fraction(0)] * dim for _ in range(dim)]
    perm = gate.permutation()
    for z in range(block):
        rows[a * block + z][a * block + z] = HALF
        rows[b * block + z][b * block + z] = HALF
        rows[b * block + perm[z]][a * block + z] = -HALF
        rows[a * block + z][b * block + perm[z]] = -HALF
    return MatrixTerm(tuple(window) + tuple(gate.targets), tuple(tuple(r) for r in rows), q=2)


def _clock_window(clock: List[int], t: int) -> Tuple[List[int], int, int]:
    """Fenêtre d'horloge, états a (avant) et b (après) pour la porte t (1-based)"""
    T = len(clock)
    if T == 1:
        return [clock[0]], 0b0, 0b1
    if t == 1:
        return [clock[0], clock[1]], 0b00, 0b10
    if t == T:
        return [clock[T - 2], clock[T - 1]], 0b10, 0b11
    return [clock[t - 2], clock[t - 1], clock[t]], 0b100, 0b110


def compile_with_layout(c: ReversibleCircuit, pinned: bool = False) -> CompiledCircuit:
    W, T = c.width, c.size
    clock = [W + t for t in range(T)]
    terms: List[MatrixTerm] = []
    labels: List[str] = []

    for t in range(1, T):
        terms.append(_diag_term((clock[t - 1], clock[t]), [0b01]))
        labels.append(f"clock:{t}")

    for t, gate in enumerate(c.gates, start=1):
        window, a, b = _clock_window(clock, t)
        terms.append(_propagation_term(window, a, b, gate))
        labels.append(f"gate:{t}:{gate.kind}")

    first_use = {w: uses[0] + 1 for w, uses in c.uses().items() if uses}
    checked_roles = {"zero", "plus"} | ({"witness"} if pinned else set())
    for w, role in enumerate(c.roles):
        if role not in checked_roles:
            continue
        # fil jamais touché : sa valeur est constante, pas besoin d'horloge
        clk = clock[first_use[w] - 1] if w in first_use else None
        if role == "plus":
            terms.append(_minus_term(clk, w))
        elif clk is None:
            terms.append(_diag_term((w,), [1]))
        else:
            terms.append(_diag_term((clk, w), [0b01]))
        labels.append(f"input:{w}:{role}")

    if T:
        terms.append(_diag_term((clock[-1], c.output), [0b10]))
    else:
        terms.append(_diag_term((c.output,), [0]))
    labels.append(f"output:{c.output}")

    n = W + T
    k = max(len(t.qudits) for t in terms)
    degree = [0] * n
    for t in terms:
        for p in t.qudits:
            degree[p] += 1
    d = max(degree)
    instance = HamiltonianInstance(n, Alphabet(2), tuple(terms), k, d)
    logger.info(f"Circuit compilé: {W} fil(s), {T} porte(s), {len(terms)} terme(s), k={k}, d={d}")
    return CompiledCircuit(instance, W, clock, labels)


def compile_circuit(c: ReversibleCircuit, pinned: bool = False) -> HamiltonianInstance:
    """Hamiltonien d'horloge unaire d'un circuit réversible"""
    return compile_with_layout(c, pinned).instance
