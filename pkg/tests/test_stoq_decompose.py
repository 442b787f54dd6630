"""
Tests de la décomposition des termes stoquastiques.
"""

import logging
from fractions import Fraction

import numpy as np
import pytest

from stoqverify.core.errors import DecompositionError, NonUniformError
from stoqverify.core.instance_model import MatrixTerm, SetConstraint
from stoqverify.core.stoq_decompose import (
    analyze_term,
    bad_terms,
    decompose_all,
    groundspace_projector,
    is_bad,
    nonneg_decomposition,
    uniformize,
)

TOL = 1e-9


def _bell_projector():
    return SetConstraint((0, 1), (frozenset({(0, 0), (1, 1)}), frozenset({(0, 1), (1, 0)}))).local_projector(2)


class TestNonNegDecomposition:
    """Classes de connexité et blocs de rang 1"""

    def test_bell_projector(self):
        dec = nonneg_decomposition(_bell_projector(), TOL)
        assert set(dec.supports()) == {frozenset({(0, 0), (1, 1)}), frozenset({(0, 1), (1, 0)})}
        np.testing.assert_allclose(dec.reassemble(), _bell_projector(), atol=1e-12)

    def test_uniform_amplitudes(self):
        dec = nonneg_decomposition(_bell_projector(), TOL)
        for state in dec.states:
            np.testing.assert_allclose(state.amplitudes, [1 / np.sqrt(2)] * 2)
        assert len(uniformize(dec, TOL)) == 2

    def test_negative_entry(self):
        with pytest.raises(DecompositionError):
            nonneg_decomposition(np.array([[0.5, -0.5], [-0.5, 0.5]]), TOL)

    def test_rank_two_block(self):
        # bloc connexe de rang 2 : pas une somme d'états à supports disjoints
        P = np.array([[0.75, 0.25, 0.25], [0.25, 0.75, 0.25], [0.25, 0.25, 0.5]])
        with pytest.raises(DecompositionError):
            nonneg_decomposition(np.pad(P, ((0, 1), (0, 1))), TOL)

    def test_non_uniform_state(self):
        phi = np.array([0.6, 0.8])
        dec = nonneg_decomposition(np.outer(phi, phi), TOL)
        with pytest.raises(NonUniformError) as excinfo:
            uniformize(dec, TOL)
        assert excinfo.value.details["state"] == 0


class TestGroundspace:
    """Projecteur fondamental et tolérance"""

    def test_degenerate_tolerance(self):
        term = MatrixTerm((0,), ((0.0, 0.0), (0.0, 5e-9)))
        with pytest.raises(DecompositionError) as excinfo:
            groundspace_projector(term, TOL)
        assert "gap" in excinfo.value.details

    def test_projector_of_exact_term(self):
        half = Fraction(1, 2)
        term = MatrixTerm((0,), ((half, -half), (-half, half)))
        np.testing.assert_allclose(groundspace_projector(term, TOL), np.full((2, 2), 0.5), atol=1e-12)

    def test_shift_is_logged(self, caplog):
        term = MatrixTerm((0,), ((Fraction(1, 2), 0), (0, 1)))
        with caplog.at_level(logging.WARNING, logger="stoqverify.core.stoq_decompose"):
            gs = analyze_term(term, TOL)
        assert gs.shift == pytest.approx(0.5)
        assert "décalage" in caplog.text
        assert gs.uniform


class TestBadStrings:
    """Chaînes mauvaises"""

    def test_e5_bad_string(self, e5):
        report = bad_terms((1, 0, 1), e5)
        assert report.is_bad
        assert report.bad_terms == [2]

    def test_e1_has_no_bad_string(self, e1):
        assert not any(bad_terms(x, e1).is_bad for x in e1.all_strings())

    def test_e3_every_string_is_bad(self, e3):
        for x in e3.all_strings():
            assert is_bad(x, e3.terms[0]) != is_bad(x, e3.terms[1])


class TestDescribe:
    """Rapport de la commande decompose"""

    def test_sets_form(self, e2):
        (report,) = decompose_all(e2)
        assert report["classes"] == [["00", "11"]]
        assert report["uniform"]
        assert "states" not in report

    def test_matrix_form_lists_states(self):
        from stoqverify.core.instance_model import Alphabet, HamiltonianInstance

        phi = (Fraction(16, 25), Fraction(-12, 25)), (Fraction(-12, 25), Fraction(9, 25))
        h = HamiltonianInstance(1, Alphabet(2), (MatrixTerm((0,), phi),), 1, 1)
        (report,) = decompose_all(h, [0])
        assert not report["uniform"]
        np.testing.assert_allclose(report["states"][0]["amplitudes"], [0.6, 0.8], atol=1e-9)
