"""
Tests du modèle d'instances : alphabet, chaînes, validation, lecture et
écriture JSON, conversions SetCSP.
"""

import json
from fractions import Fraction

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from stoqverify.core.errors import InstanceParseError, InstanceValidationError, NonUniformError
from stoqverify.core.instance_model import (
    Alphabet,
    HamiltonianInstance,
    MatrixTerm,
    SetConstraint,
    SetCSPInstance,
    dump_instance,
    dump_setcsp,
    from_setcsp,
    local_index,
    local_string,
    parse_any,
    parse_instance,
    restrict,
    splice,
    to_setcsp,
    validate_document,
)
from stoqverify.utils.reports import write_document

BELL = (frozenset({(0, 0), (1, 1)}), frozenset({(0, 1), (1, 0)}))


def _document(terms, n=2, k=2, d=2, q=2):
    return json.dumps({"alphabet_size": q, "num_dits": n, "locality": k, "degree": d, "terms": terms})


def _codes(excinfo):
    return {v["code"] for v in excinfo.value.violations}


class TestAlphabet:
    """Formats de chaînes de dits"""

    def test_digits_for_small_alphabets(self):
        a = Alphabet(3)
        assert a.format((0, 2, 1)) == "021"
        assert a.parse("021") == (0, 2, 1)

    def test_commas_for_large_alphabets(self):
        a = Alphabet(12)
        assert a.format((11, 0, 3)) == "11,0,3"
        assert a.parse("11,0,3") == (11, 0, 3)

    def test_symbol_out_of_range(self):
        with pytest.raises(InstanceParseError):
            Alphabet(2).parse("012")

    def test_alphabet_too_small(self):
        with pytest.raises(InstanceValidationError):
            Alphabet(1)


class TestLocalStrings:
    """Indices big-endian, restriction et remplacement"""

    def test_big_endian_index(self):
        assert local_index((1, 0), 2) == 2
        assert local_index((0, 1), 2) == 1
        assert local_string(5, 3, 2) == (1, 0, 1)

    def test_restrict_follows_listed_order(self):
        assert restrict((0, 1, 1, 0), (3, 1)) == (0, 1)

    def test_restrict_out_of_range(self):
        with pytest.raises(ValueError):
            restrict((0, 1), (2,))

    @settings(max_examples=50, deadline=None)
    @given(st.lists(st.integers(0, 2), min_size=4, max_size=4), st.lists(st.integers(0, 2), min_size=2, max_size=2))
    def test_splice_then_restrict(self, x, v):
        y = splice(tuple(x), (2, 0), tuple(v))
        assert restrict(y, (2, 0)) == tuple(v)
        assert y[1] == x[1] and y[3] == x[3]


class TestParsing:
    """Lecture des fichiers d'instance"""

    def test_e1_fields(self, e1):
        assert (e1.n, e1.q, e1.m, e1.k, e1.d) == (4, 2, 2, 2, 1)
        assert e1.degrees() == [1, 1, 1, 1]
        assert e1.uniform
        assert set(e1.terms[0].classes) == set(BELL)

    def test_invalid_json(self):
        with pytest.raises(InstanceParseError):
            parse_instance("{pas du json")

    def test_missing_field(self):
        with pytest.raises(InstanceParseError) as excinfo:
            parse_instance(json.dumps({"alphabet_size": 2, "num_dits": 2}))
        assert excinfo.value.details["errors"]

    def test_overlapping_classes(self):
        doc = _document([{"qudits": [0, 1], "form": "sets", "classes": [["00", "11"], ["11"]]}])
        with pytest.raises(InstanceValidationError) as excinfo:
            parse_instance(doc)
        assert "classes_overlap" in _codes(excinfo)

    def test_locality_violation(self):
        doc = _document([{"qudits": [0, 1], "form": "sets", "classes": [["00"]]}], k=1)
        with pytest.raises(InstanceValidationError) as excinfo:
            parse_instance(doc)
        assert "locality" in _codes(excinfo)

    def test_degree_violation(self):
        term = {"qudits": [0, 1], "form": "sets", "classes": [["00"]]}
        with pytest.raises(InstanceValidationError) as excinfo:
            parse_instance(_document([term, term], d=1))
        assert "degree" in _codes(excinfo)

    def test_qudit_out_of_range(self):
        doc = _document([{"qudits": [0, 5], "form": "sets", "classes": [["00"]]}])
        with pytest.raises(InstanceValidationError) as excinfo:
            parse_instance(doc)
        assert "qudit_range" in _codes(excinfo)

    def test_positive_off_diagonal_is_rejected(self):
        doc = _document([{"qudits": [0], "form": "matrix", "entries": [[1, 1], [1, 1]]}], n=1, k=1, d=1)
        with pytest.raises(InstanceValidationError) as excinfo:
            parse_instance(doc)
        assert "not_stoquastic" in _codes(excinfo)

    def test_asymmetric_matrix_is_rejected(self):
        doc = _document([{"qudits": [0], "form": "matrix", "entries": [[1, -1], [0, 1]]}], n=1, k=1, d=1)
        with pytest.raises(InstanceValidationError) as excinfo:
            parse_instance(doc)
        assert "not_hermitian" in _codes(excinfo)

    def test_rational_entries(self):
        half = {"num": 1, "den": 2}
        minus = {"num": -1, "den": 2}
        doc = _document([{"qudits": [0], "form": "matrix", "entries": [[half, minus], [minus, half]]}], n=1, k=1, d=1)
        h = parse_instance(doc)
        term = h.terms[0]
        assert term.exact
        assert term.entries[0][1] == Fraction(-1, 2)
        assert term.classes == (frozenset({(0,), (1,)}),)

    def test_parse_any_detects_setcsp(self, e1):
        doc = json.dumps(dump_setcsp(to_setcsp(e1)))
        assert isinstance(parse_any(doc), SetCSPInstance)
        assert isinstance(parse_any(json.dumps(dump_instance(e1))), HamiltonianInstance)


class TestMatrixTerms:
    """Termes matriciels : uniformité, décalage, diagnostic"""

    def test_non_uniform_ground_state(self):
        # H = I - |phi><phi| avec phi = (3/5, 4/5)
        entries = ((Fraction(16, 25), Fraction(-12, 25)), (Fraction(-12, 25), Fraction(9, 25)))
        h = HamiltonianInstance(1, Alphabet(2), (MatrixTerm((0,), entries),), 1, 1)
        assert not h.uniform
        assert h.terms[0].classes == (frozenset({(0,), (1,)}),)
        with pytest.raises(NonUniformError):
            to_setcsp(h)

    def test_energy_shift_is_reported(self):
        h = HamiltonianInstance(1, Alphabet(2), (MatrixTerm((0,), ((2, 0), (0, 3))),), 1, 1)
        report = validate_document(json.dumps(dump_instance(h)))
        assert report["valid"]
        assert report["energy_shifts"] == [{"term": 0, "shift": pytest.approx(2.0)}]
        assert h.terms[0].classes == (frozenset({(0,)}),)

    def test_norm_too_large(self):
        doc = _document([{"qudits": [0], "form": "matrix", "entries": [[0, 0], [0, 3]]}], n=1, k=1, d=1)
        report = validate_document(doc)
        assert not report["valid"]
        assert report["violations"][0]["code"] == "norm"


class TestConversions:
    """SetCSP <-> hamiltonien"""

    def test_setcsp_round_trip_keeps_classes(self, e1):
        csp = to_setcsp(e1)
        back = to_setcsp(from_setcsp(csp))
        assert [set(c.classes) for c in back.constraints] == [set(c.classes) for c in csp.constraints]

    def test_complement_is_exact(self, e2):
        h = from_setcsp(to_setcsp(e2))
        term = h.terms[0]
        assert term.exact
        assert term.entries[0][0] == Fraction(1, 2)
        assert term.entries[0][3] == Fraction(-1, 2)
        assert term.entries[1][1] == 1

    def test_canonical_json_is_stable(self, e5, tmp_path):
        first = write_document(dump_setcsp(to_setcsp(e5)), tmp_path / "a.json")
        second = write_document(dump_setcsp(to_setcsp(from_setcsp(to_setcsp(e5)))), tmp_path / "b.json")
        assert first == second

    def test_setcsp_structural_validation(self):
        with pytest.raises(InstanceValidationError):
            SetCSPInstance(2, Alphabet(2), (SetConstraint((0, 1), (frozenset(),)),), 2, 1)


class TestValidationReport:
    """Rapport de la commande validate"""

    def test_report_for_e6(self, library):
        report = validate_document(library.path("E6"))
        assert report["valid"]
        assert report["locality"] == {"declared": 4, "actual": 4}
        assert report["degree"]["per_qudit"] == [2, 2, 2, 2]
        assert report["uniform"]

    def test_report_lists_violations(self):
        doc = _document([{"qudits": [0, 0], "form": "sets", "classes": [["00"]]}])
        report = validate_document(doc)
        assert not report["valid"]
        assert any(v["code"] == "duplicate_qudit" for v in report["violations"])

    def test_repeated_strings_are_reported_with_other_violations(self):
        terms = [
            {"qudits": [0, 1], "form": "sets", "classes": [["00", "00"]]},
            {"qudits": [0, 1], "form": "sets", "classes": [["11", "11"], ["01"]]},
        ]
        report = validate_document(_document(terms, d=1))
        assert not report["valid"]
        codes = [v["code"] for v in report["violations"]]
        assert codes.count("duplicate_string") == 2
        assert "degree" in codes
        assert [v["term"] for v in report["violations"] if v["code"] == "duplicate_string"] == [0, 1]
