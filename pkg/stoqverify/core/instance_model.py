"""
Module pour le modèle de données des instances.

Ce module fournit les types de base (alphabet, chaînes de dits, contraintes
ensemblistes, termes matriciels, instances hamiltoniennes et SetCSP), leur
validation, la lecture et l'écriture des fichiers JSON ainsi que les
conversions SetCSP <-> Hamiltonien.

Convention : les qudits sont indexés à partir de 0 et une chaîne locale
v = (v_0, ..., v_{w-1}) sur les qudits B = (b_0, ..., b_{w-1}) correspond à
l'indice matriciel sum_i v_i q^(w-1-i) (b_0 est le chiffre de poids fort).
"""

import io
import itertools
import json
import logging
from collections import Counter
from dataclasses import dataclass, field
from fractions import Fraction
from pathlib import Path
from typing import Dict, FrozenSet, Iterable, Iterator, List, Optional, Sequence, Tuple, Union

import numpy as np
from pydantic import ValidationError

from stoqverify.config import config
from stoqverify.core.errors import InstanceParseError, InstanceValidationError, NonUniformError
from stoqverify.utils.schemas import InstanceFile, SetCSPFile

logger = logging.getLogger(__name__)

DitString = Tuple[int, ...]
LocalClass = FrozenSet[DitString]
Entry = Union[Fraction, float]


@dataclass(frozen=True)
class Alphabet:
    """Alphabet {0, ..., q-1}"""

    q: int

    def __post_init__(self):
        if self.q < 2:
            raise InstanceValidationError([_violation("alphabet", None, f"q={self.q} < 2")])

    def contains(self, x: Sequence[int]) -> bool:
        return all(0 <= s < self.q for s in x)

    def format(self, x: Sequence[int]) -> str:
        """Chiffres accolés si q <= 10, sinon valeurs séparées par des virgules"""
        if self.q <= 10:
            return "".join(str(s) for s in x)
        return ",".join(str(s) for s in x)

    def parse(self, text: str) -> DitString:
        text = text.strip()
        try:
            if self.q <= 10 and "," not in text:
                x = tuple(int(c) for c in text)
            else:
                x = tuple(int(c) for c in text.split(",") if c != "")
        except ValueError:
            raise InstanceParseError(f"Chaîne de dits illisible: {text!r}")
        if not self.contains(x):
            raise InstanceParseError(f"Symbole hors alphabet dans {text!r} (q={self.q})")
        return x


def _violation(code, term, message):
    return {"code": code, "term": term, "message": message}


def local_index(v: Sequence[int], q: int) -> int:
    idx = 0
    for s in v:
        idx = idx * q + s
    return idx


def local_string(idx: int, width: int, q: int) -> DitString:
    out = [0] * width
    for pos in range(width - 1, -1, -1):
        idx, out[pos] = divmod(idx, q)
    return tuple(out)


def restrict(x: DitString, qudits: Sequence[int]) -> DitString:
    """Sous-chaîne x|_B"""
    try:
        return tuple(x[p] for p in qudits)
    except IndexError:
        raise ValueError(f"Position hors limites dans {list(qudits)} pour une chaîne de longueur {len(x)}")


def splice(x: DitString, qudits: Sequence[int], v: Sequence[int]) -> DitString:
    """Remplace x|_B par v, les autres positions restent inchangées"""
    if len(v) != len(qudits):
        raise ValueError(f"Longueur {len(v)} incompatible avec {len(qudits)} positions")
    y = list(x)
    for p, s in zip(qudits, v):
        if not 0 <= p < len(y):
            raise ValueError(f"Position {p} hors limites (n={len(y)})")
        y[p] = s
    return tuple(y)


class _TermMixin:
    """Accès communs aux classes d'un terme (ensembliste ou matriciel)"""

    @property
    def width(self) -> int:
        return len(self.qudits)

    def class_index(self, local: DitString) -> Optional[int]:
        return self._lookup().get(local)

    def class_members(self, j: int) -> Tuple[DitString, ...]:
        """Membres triés de la classe j (ordre déterministe pour l'échantillonnage)"""
        return self._sorted_members()[j]

    def overlap(self, local: DitString) -> Entry:
        """<x_B|P|x_B> pour le projecteur local du terme"""
        j = self.class_index(local)
        if j is None:
            return Fraction(0)
        if self.is_uniform:
            return Fraction(1, len(self.classes[j]))
        return float(self.local_projector()[self._q_index(local), self._q_index(local)])

    def touches(self, other) -> bool:
        return not set(self.qudits).isdisjoint(other.qudits)


@dataclass(frozen=True)
class SetConstraint(_TermMixin):
    """Contrainte ensembliste (T, B) : classes disjointes de chaînes locales"""

    qudits: Tuple[int, ...]
    classes: Tuple[LocalClass, ...]
    form = "sets"
    is_uniform = True

    def __post_init__(self):
        object.__setattr__(self, "qudits", tuple(int(p) for p in self.qudits))
        object.__setattr__(self, "classes", tuple(frozenset(tuple(s) for s in c) for c in self.classes))
        lookup: Dict[DitString, int] = {}
        for j, cls in enumerate(self.classes):
            for s in cls:
                lookup.setdefault(s, j)
        object.__setattr__(self, "_lookup_table", lookup)
        object.__setattr__(self, "_members", tuple(tuple(sorted(c)) for c in self.classes))

    def _lookup(self):
        return self._lookup_table

    def _sorted_members(self):
        return self._members

    def _q_index(self, local):
        raise NotImplementedError

    def local_projector(self, q: int) -> np.ndarray:
        """Projecteur sum_j |T_j><T_j| sur les qudits du terme"""
        dim = q ** self.width
        proj = np.zeros((dim, dim))
        for cls in self.classes:
            idx = [local_index(s, q) for s in cls]
            proj[np.ix_(idx, idx)] = 1.0 / len(cls)
        return proj


@dataclass(eq=False)
class MatrixTerm(_TermMixin):
    """Terme hermitien réel à coefficients hors diagonale non positifs.

    Les coefficients sont des Fraction (exacts) ou des float. Le projecteur
    sur l'espace fondamental et sa décomposition non négative sont calculés
    une seule fois (ensure_groundspace) puis mis en cache.
    """

    qudits: Tuple[int, ...]
    entries: Tuple[Tuple[Entry, ...], ...]
    q: int = 2
    _groundspace: object = field(default=None, repr=False)

    form = "matrix"

    def __post_init__(self):
        self.qudits = tuple(int(p) for p in self.qudits)
        rows = [tuple(r) for r in self.entries]
        if any(isinstance(e, float) for r in rows for e in r):
            rows = [tuple(float(e) for e in r) for r in rows]
        else:
            rows = [tuple(Fraction(e) for e in r) for r in rows]
        self.entries = tuple(rows)

    @property
    def exact(self) -> bool:
        return all(isinstance(e, Fraction) for r in self.entries for e in r)

    def as_array(self) -> np.ndarray:
        return np.array([[float(e) for e in r] for r in self.entries], dtype=float)

    def ensure_groundspace(self, tol: float = None):
        """Décompose le terme une fois pour toutes"""
        if self._groundspace is None:
            from stoqverify.core.stoq_decompose import analyze_term

            self._groundspace = analyze_term(self, config.tol if tol is None else tol)
        return self._groundspace

    @property
    def groundspace(self):
        return self.ensure_groundspace()

    @property
    def classes(self) -> Tuple[LocalClass, ...]:
        return self.groundspace.classes

    @property
    def is_uniform(self) -> bool:
        return self.groundspace.uniform

    @property
    def shift(self) -> float:
        return self.groundspace.shift

    def _lookup(self):
        return self.groundspace.lookup

    def _sorted_members(self):
        return self.groundspace.members

    def _q_index(self, local):
        return local_index(local, self.q)

    def local_projector(self, q: int = None) -> np.ndarray:
        return self.groundspace.projector


Term = Union[SetConstraint, MatrixTerm]


def _structural_violations(n: int, q: int, terms: Sequence[Term], k: int, d: int) -> List[dict]:
    violations = []
    if n < 1:
        violations.append(_violation("num_dits", None, f"n={n} < 1"))
    if k < 1:
        violations.append(_violation("locality", None, f"k={k} < 1"))
    if d < 1:
        violations.append(_violation("degree", None, f"d={d} < 1"))
    if not terms:
        violations.append(_violation("no_terms", None, "au moins un terme est requis (m >= 1)"))

    for i, term in enumerate(terms):
        B = term.qudits
        if len(B) == 0:
            violations.append(_violation("empty_support", i, f"terme {i}: aucun qudit"))
        if len(set(B)) != len(B):
            violations.append(_violation("duplicate_qudit", i, f"terme {i}: qudits répétés {list(B)}"))
        bad_pos = [p for p in B if not 0 <= p < n]
        if bad_pos:
            violations.append(_violation("qudit_range", i, f"terme {i}: positions {bad_pos} hors de [0,{n})"))
        if len(B) > k:
            violations.append(_violation("locality", i, f"terme {i}: {len(B)} qudits > k={k}"))
        if isinstance(term, SetConstraint):
            violations.extend(_class_violations(i, term.classes, len(B), q))
        else:
            violations.extend(_matrix_shape_violations(i, term, len(B), q))

    counts = Counter(p for t in terms for p in set(t.qudits))
    for p, c in sorted(counts.items()):
        if c > d:
            violations.append(_violation("degree", None, f"qudit {p} apparaît dans {c} termes > d={d}"))
    return violations


def _class_violations(i, classes, width, q):
    violations = []
    if len(classes) == 0:
        violations.append(_violation("empty_classes", i, f"terme {i}: liste de classes vide"))
    seen: Dict[DitString, int] = {}
    for j, cls in enumerate(classes):
        if len(cls) == 0:
            violations.append(_violation("empty_class", i, f"terme {i}: classe {j} vide"))
        for s in sorted(cls):
            if len(s) != width:
                violations.append(_violation("class_width", i, f"terme {i}: chaîne {s} de longueur {len(s)} != {width}"))
            elif any(not 0 <= c < q for c in s):
                violations.append(_violation("class_symbol", i, f"terme {i}: chaîne {s} hors alphabet"))
            if s in seen and seen[s] != j:
                violations.append(_violation("classes_overlap", i, f"terme {i}: chaîne {s} dans les classes {seen[s]} et {j}"))
            seen.setdefault(s, j)
    return violations


def _matrix_shape_violations(i, term, width, q):
    dim = q ** width
    rows = term.entries
    if len(rows) != dim or any(len(r) != dim for r in rows):
        return [_violation("matrix_shape", i, f"terme {i}: matrice attendue {dim}x{dim}")]
    violations = []
    tol = config.tol
    for a in range(dim):
        for b in range(a + 1, dim):
            if term.exact:
                asym = rows[a][b] != rows[b][a]
            else:
                asym = abs(rows[a][b] - rows[b][a]) > tol
            if asym:
                violations.append(_violation("not_hermitian", i, f"terme {i}: entrées ({a},{b}) et ({b},{a}) diffèrent"))
            if rows[a][b] > (0 if term.exact else tol):
                violations.append(_violation("not_stoquastic", i, f"terme {i}: entrée hors diagonale ({a},{b}) = {rows[a][b]} > 0"))
    return violations


def _spectral_violations(terms, tol):
    from stoqverify.core.errors import DecompositionError

    violations = []
    for i, term in enumerate(terms):
        if not isinstance(term, MatrixTerm):
            continue
        try:
            gs = term.ensure_groundspace(tol)
        except DecompositionError as e:
            violations.append(_violation("decomposition", i, f"terme {i}: {e.message}"))
            continue
        if gs.spread > 1 + 10 * tol:
            violations.append(_violation("norm", i, f"terme {i}: norme {gs.spread:.6g} > 1 après décalage"))
    return violations


def collect_violations(n: int, q: int, terms: Sequence[Term], k: int, d: int, tol: float = None) -> List[dict]:
    """Liste complète des violations (vide si l'instance est valide)"""
    tol = config.tol if tol is None else tol
    violations = _structural_violations(n, q, terms, k, d)
    if not violations:
        violations.extend(_spectral_violations(terms, tol))
    return violations


@dataclass(frozen=True)
class HamiltonianInstance:
    """H = (1/m) sum_i H_i sur n qudits d'alphabet q"""

    n: int
    alphabet: Alphabet
    terms: Tuple[Term, ...]
    k: int
    d: int

    def __post_init__(self):
        object.__setattr__(self, "terms", tuple(self.terms))
        violations = collect_violations(self.n, self.alphabet.q, self.terms, self.k, self.d)
        if violations:
            raise InstanceValidationError(violations)
        logger.debug(f"Instance validée: n={self.n}, q={self.q}, m={self.m}, k={self.k}, d={self.d}")

    @property
    def q(self) -> int:
        return self.alphabet.q

    @property
    def m(self) -> int:
        return len(self.terms)

    @property
    def dimension(self) -> int:
        return self.q ** self.n

    def degrees(self) -> List[int]:
        counts = Counter(p for t in self.terms for p in set(t.qudits))
        return [counts.get(p, 0) for p in range(self.n)]

    def all_strings(self) -> Iterator[DitString]:
        """Toutes les chaînes dans l'ordre lexicographique (= ordre des indices)"""
        return itertools.product(range(self.q), repeat=self.n)

    def index_of(self, x: DitString) -> int:
        return local_index(x, self.q)

    def string_at(self, idx: int) -> DitString:
        return local_string(idx, self.n, self.q)

    def check_string(self, x: DitString) -> DitString:
        x = tuple(x)
        if len(x) != self.n or not self.alphabet.contains(x):
            raise InstanceParseError(f"Chaîne {x} invalide pour n={self.n}, q={self.q}")
        return x

    def parse_string(self, text: str) -> DitString:
        return self.check_string(self.alphabet.parse(text))

    def format_string(self, x: DitString) -> str:
        return self.alphabet.format(x)

    @property
    def uniform(self) -> bool:
        return all(t.is_uniform for t in self.terms)


@dataclass(frozen=True)
class SetCSPInstance:
    """Suite de contraintes ensemblistes (annexe classique)"""

    n: int
    alphabet: Alphabet
    constraints: Tuple[SetConstraint, ...]
    k: int
    d: int

    def __post_init__(self):
        object.__setattr__(self, "constraints", tuple(self.constraints))
        violations = _structural_violations(self.n, self.alphabet.q, self.constraints, self.k, self.d)
        if violations:
            raise InstanceValidationError(violations)

    @property
    def q(self) -> int:
        return self.alphabet.q

    @property
    def m(self) -> int:
        return len(self.constraints)


# ---------------------------------------------------------------------------
# Conversions
# ---------------------------------------------------------------------------

def to_setcsp(h: HamiltonianInstance) -> SetCSPInstance:
    """Une contrainte par terme, classes = classes de l'espace fondamental"""
    constraints = []
    for i, term in enumerate(h.terms):
        if not term.is_uniform:
            raise NonUniformError(f"Le terme {i} n'est pas uniforme", {"term": i})
        constraints.append(SetConstraint(term.qudits, term.classes))
    return SetCSPInstance(h.n, h.alphabet, tuple(constraints), h.k, h.d)


def projector_complement_entries(constraint: SetConstraint, q: int) -> Tuple[Tuple[Fraction, ...], ...]:
    """Coefficients exacts de I - sum_j |T_j><T_j|"""
    dim = q ** constraint.width
    rows = [[Fraction(int(a == b)) for b in range(dim)] for a in range(dim)]
    for cls in constraint.classes:
        idx = [local_index(s, q) for s in cls]
        w = Fraction(1, len(cls))
        for a in idx:
            for b in idx:
                rows[a][b] -= w
    return tuple(tuple(r) for r in rows)


def from_setcsp(c: SetCSPInstance) -> HamiltonianInstance:
    """H_i = I - P_i sous forme matricielle exacte"""
    terms = [MatrixTerm(con.qudits, projector_complement_entries(con, c.q), q=c.q) for con in c.constraints]
    return HamiltonianInstance(c.n, c.alphabet, tuple(terms), c.k, c.d)


# ---------------------------------------------------------------------------
# Lecture / écriture JSON
# ---------------------------------------------------------------------------

def _read_raw(raw) -> dict:
    if isinstance(raw, Path):
        raw = raw.read_bytes()
    if isinstance(raw, io.IOBase):
        raw = raw.read()
    if isinstance(raw, bytes):
        raw = raw.decode("utf-8")
    try:
        data = json.loads(raw)
    except json.JSONDecodeError as e:
        raise InstanceParseError(f"JSON invalide: {e}")
    if not isinstance(data, dict):
        raise InstanceParseError("Le document JSON doit être un objet")
    return data


def _decode_class_string(raw, q: int) -> DitString:
    if isinstance(raw, str):
        if q > 10:
            raise InstanceParseError(f"Chaîne {raw!r}: les chaînes de chiffres sont réservées à q <= 10")
        if not raw.isdigit():
            raise InstanceParseError(f"Chaîne de classe illisible: {raw!r}")
        return tuple(int(c) for c in raw)
    return tuple(int(s) for s in raw)


def _decode_entry(raw) -> Entry:
    if isinstance(raw, bool):
        raise InstanceParseError("Booléen interdit dans une matrice")
    if isinstance(raw, int):
        return Fraction(raw)
    if isinstance(raw, float):
        return raw
    return Fraction(raw.num, raw.den)


def _encode_entry(e: Entry):
    if isinstance(e, Fraction):
        if e.denominator == 1:
            return int(e.numerator)
        return {"num": e.numerator, "den": e.denominator}
    return float(e)


def _encode_classes(classes: Iterable[LocalClass], q: int) -> list:
    ordered = sorted(tuple(sorted(c)) for c in classes)
    if q <= 10:
        return [["".join(str(s) for s in v) for v in cls] for cls in ordered]
    return [[list(v) for v in cls] for cls in ordered]


def _duplicate_violations(i, raw_classes, classes) -> List[dict]:
    # classes fusionnées par frozenset : doublons signalés via la taille
    return [_violation("duplicate_string", i, f"terme {i}: chaîne répétée dans la classe {j}")
            for j, (raw, cls) in enumerate(zip(raw_classes, classes)) if len(raw) != len(cls)]


def _build_terms(specs, q: int) -> Tuple[List[Term], List[dict]]:
    terms: List[Term] = []
    violations: List[dict] = []
    for i, spec in enumerate(specs):
        if spec.form == "sets":
            classes = tuple(frozenset(_decode_class_string(s, q) for s in cls) for cls in spec.classes)
            terms.append(SetConstraint(tuple(spec.qudits), classes))
            violations.extend(_duplicate_violations(i, spec.classes, classes))
        else:
            entries = tuple(tuple(_decode_entry(e) for e in row) for row in spec.entries)
            terms.append(MatrixTerm(tuple(spec.qudits), entries, q=q))
    return terms, violations


def parse_instance(raw) -> HamiltonianInstance:
    """Lit et valide une instance (octets, texte, flux ou chemin .json)"""
    data = _read_raw(raw)
    try:
        spec = InstanceFile.model_validate(data)
    except ValidationError as e:
        raise InstanceParseError(f"Format d'instance invalide: {e.error_count()} erreur(s)", {"errors": _pydantic_errors(e)})
    alphabet = Alphabet(spec.alphabet_size)
    terms, duplicates = _build_terms(spec.terms, alphabet.q)
    if duplicates:
        raise InstanceValidationError(
            duplicates + collect_violations(spec.num_dits, alphabet.q, terms, spec.locality, spec.degree))
    instance = HamiltonianInstance(spec.num_dits, alphabet, tuple(terms), spec.locality, spec.degree)
    logger.info(f"Instance chargée: n={instance.n}, q={instance.q}, m={instance.m}")
    return instance


def parse_setcsp(raw) -> SetCSPInstance:
    data = _read_raw(raw)
    try:
        spec = SetCSPFile.model_validate(data)
    except ValidationError as e:
        raise InstanceParseError(f"Format SetCSP invalide: {e.error_count()} erreur(s)", {"errors": _pydantic_errors(e)})
    alphabet = Alphabet(spec.alphabet_size)
    constraints = []
    duplicates = []
    for i, con in enumerate(spec.constraints):
        classes = tuple(frozenset(_decode_class_string(s, alphabet.q) for s in cls) for cls in con.classes)
        constraints.append(SetConstraint(tuple(con.qudits), classes))
        duplicates.extend(_duplicate_violations(i, con.classes, classes))
    if duplicates:
        raise InstanceValidationError(
            duplicates + _structural_violations(spec.num_dits, alphabet.q, constraints, spec.locality, spec.degree))
    return SetCSPInstance(spec.num_dits, alphabet, tuple(constraints), spec.locality, spec.degree)


def parse_any(raw) -> Union[HamiltonianInstance, SetCSPInstance]:
    """Instance hamiltonienne ou SetCSP selon la présence du champ 'constraints'"""
    data = _read_raw(raw)
    if "constraints" in data:
        return parse_setcsp(json.dumps(data))
    return parse_instance(json.dumps(data))


def load_instance(path) -> HamiltonianInstance:
    return parse_instance(Path(path).read_bytes())


def _pydantic_errors(e: ValidationError) -> list:
    return [{"loc": [str(p) for p in err["loc"]], "msg": err["msg"]} for err in e.errors()]


def dump_instance(h: HamiltonianInstance) -> dict:
    terms = []
    for t in h.terms:
        if isinstance(t, SetConstraint):
            terms.append({"qudits": list(t.qudits), "form": "sets", "classes": _encode_classes(t.classes, h.q)})
        else:
            terms.append({"qudits": list(t.qudits), "form": "matrix",
                          "entries": [[_encode_entry(e) for e in row] for row in t.entries]})
    return {"alphabet_size": h.q, "num_dits": h.n, "locality": h.k, "degree": h.d, "terms": terms}


def dump_setcsp(c: SetCSPInstance) -> dict:
    constraints = [{"qudits": list(con.qudits), "classes": _encode_classes(con.classes, c.q)}
                   for con in c.constraints]
    return {"alphabet_size": c.q, "num_dits": c.n, "locality": c.k, "degree": c.d, "constraints": constraints}


# ---------------------------------------------------------------------------
# Rapport de validation
# ---------------------------------------------------------------------------

def validation_report(h: HamiltonianInstance) -> dict:
    """Rapport lisible par machine pour une instance valide"""
    degrees = h.degrees()
    shifts = []
    entry_set = set()
    non_uniform = []
    for i, t in enumerate(h.terms):
        if isinstance(t, MatrixTerm):
            if abs(t.shift) > config.tol:
                shifts.append({"term": i, "shift": t.shift})
            entry_set.update(t.entries[a][b] for a in range(len(t.entries)) for b in range(len(t.entries)))
        if not t.is_uniform:
            non_uniform.append(i)
    return {
        "valid": True,
        "violations": [],
        "num_dits": h.n,
        "alphabet_size": h.q,
        "num_terms": h.m,
        "locality": {"declared": h.k, "actual": max(t.width for t in h.terms)},
        "degree": {"declared": h.d, "actual": max(degrees) if degrees else 0, "per_qudit": degrees},
        "uniform": not non_uniform,
        "non_uniform_terms": non_uniform,
        "energy_shifts": shifts,
        "matrix_entries": [str(e) for e in sorted(entry_set)],
    }


def validate_document(raw) -> dict:
    """Valide un fichier sans lever d'exception de validation"""
    try:
        instance = parse_instance(raw)
    except InstanceValidationError as e:
        logger.info(f"Instance rejetée: {len(e.violations)} violation(s)")
        return {"valid": False, "violations": e.violations}
    return validation_report(instance)
