"""
Tests du compilateur circuit -> hamiltonien d'horloge.
"""

import json
from fractions import Fraction

import pytest

from stoqverify.core.circuit2ham import (
    Gate,
    ReversibleCircuit,
    acceptance_probability,
    compile_circuit,
    compile_with_layout,
    degree_reduce,
    dump_circuit,
    has_perfect_witness,
    parse_circuit,
    simulate_circuit,
)
from stoqverify.core.errors import CircuitError
from stoqverify.core.spectral_oracle import exact_frustration_free, ground_energy
from stoqverify.core.stoq_decompose import nonneg_decomposition, uniformize


class TestCircuitModel:
    """Modèle de circuit et simulation classique"""

    def test_toffoli_permutation(self):
        perm = Gate("TOFFOLI", (0, 1, 2)).permutation()
        assert perm[0b110] == 0b111 and perm[0b111] == 0b110
        assert perm[0b101] == 0b101

    def test_unknown_kind(self):
        with pytest.raises(CircuitError):
            parse_circuit(json.dumps({"wires": [{"role": "zero"}], "gates": [{"kind": "H", "targets": [0]}], "output": 0}))

    def test_wrong_arity(self):
        with pytest.raises(CircuitError) as excinfo:
            ReversibleCircuit(("zero", "zero"), (Gate("CNOT", (0,)),), 0)
        assert excinfo.value.details["problems"]

    def test_output_out_of_range(self):
        with pytest.raises(CircuitError):
            ReversibleCircuit(("zero",), (), 3)

    def test_simulation(self, library):
        c = library.load_circuit("witness_output")
        assert simulate_circuit(c, [1], [])
        assert not simulate_circuit(c, [0], [])
        with pytest.raises(CircuitError):
            simulate_circuit(c, [], [])

    def test_random_bits(self):
        c = ReversibleCircuit(("plus", "zero"), (Gate("CNOT", (0, 1)),), 1)
        assert acceptance_probability(c, []) == Fraction(1, 2)
        assert not has_perfect_witness(c)

    def test_dump_round_trip(self, library):
        c = library.load_circuit("fanout5")
        assert parse_circuit(json.dumps(dump_circuit(c))) == c


class TestDegreeReduction:
    """Chaînes de copies"""

    def test_fanout_is_reduced(self, library):
        c = library.load_circuit("fanout5")
        reduced = degree_reduce(c)
        assert max(len(u) for u in reduced.uses().values()) <= 3
        assert reduced.size == c.size + 4
        for w in (0, 1):
            assert simulate_circuit(reduced, [w], []) == simulate_circuit(c, [w], [])

    def test_light_circuit_unchanged(self, library):
        c = library.load_circuit("not_output")
        assert degree_reduce(c) is c


class TestCompilation:
    """Instance d'horloge unaire"""

    def test_layout(self, library):
        compiled = compile_with_layout(library.load_circuit("not_output"))
        assert compiled.data_wires == 1
        assert compiled.clock == [1]
        assert compiled.labels == ["gate:1:NOT", "input:0:zero", "output:0"]
        assert compiled.instance.uniform

    def test_accepting_circuit_is_frustration_free(self, library):
        h = compile_circuit(library.load_circuit("not_output"))
        report = exact_frustration_free(h)
        assert report.frustration_free
        assert set(report.component) == {(0, 0), (1, 1)}

    def test_rejecting_circuit_is_frustrated(self, library):
        h = compile_circuit(library.load_circuit("untouched_output"))
        assert not exact_frustration_free(h).frustration_free

    def test_no_gates(self, library):
        c = library.load_circuit("witness_output")
        free = compile_circuit(c)
        assert (free.n, free.m, free.k) == (1, 1, 1)
        assert exact_frustration_free(free).frustration_free
        assert not exact_frustration_free(compile_circuit(c, pinned=True)).frustration_free

    def test_bounded_locality_and_degree(self, library):
        h = compile_circuit(degree_reduce(library.load_circuit("fanout5")))
        assert h.k <= 6
        assert h.d <= 9

    def test_clock_validity_terms(self):
        c = ReversibleCircuit(("witness", "zero"), (Gate("CNOT", (0, 1)), Gate("NOT", (1,))), 1)
        compiled = compile_with_layout(c)
        assert compiled.labels[0] == "clock:1"
        assert compiled.instance.terms[0].qudits == (2, 3)


def _library_or_inline(library, name):
    if name == "negated_witness":
        return ReversibleCircuit(("witness", "zero"), (Gate("CNOT", (0, 1)), Gate("NOT", (1,))), 1)
    if name == "coin_copy":
        return ReversibleCircuit(("plus", "zero"), (Gate("CNOT", (0, 1)),), 1)
    return library.load_circuit(name)


class TestCompiledSpectrum:
    """Énergie nulle exactement quand un témoin parfait existe"""

    @pytest.mark.parametrize("name", ["not_output", "untouched_output", "witness_output",
                                      "negated_witness", "coin_copy"])
    def test_zero_energy_iff_perfect_witness(self, library, name):
        c = _library_or_inline(library, name)
        h = compile_circuit(c)
        assert (ground_energy(h).energy <= 1e-9) is has_perfect_witness(c)
        assert exact_frustration_free(h).frustration_free is has_perfect_witness(c)

    def test_pinned_witness_output(self, library):
        c = library.load_circuit("witness_output")
        assert acceptance_probability(c, (0,)) == 0
        assert ground_energy(compile_circuit(c, pinned=True)).energy > 1e-9

    @pytest.mark.parametrize("name", ["not_output", "untouched_output", "witness_output",
                                      "negated_witness", "coin_copy"])
    def test_emitted_terms_are_uniform(self, library, name):
        h = compile_circuit(_library_or_inline(library, name))
        for term in h.terms:
            assert term.is_uniform
            classes = uniformize(nonneg_decomposition(term.local_projector(h.q), 1e-8, q=h.q), 1e-8)
            assert set(classes) == set(term.classes)
