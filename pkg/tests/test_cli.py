"""
Tests de la ligne de commande : codes de sortie, rapports JSON, manifeste.
"""

import json

import pytest

from stoqverify import __version__
from stoqverify.main import EXIT_ACCEPT, EXIT_ERROR, EXIT_REJECT, EXIT_USAGE


class TestExitCodes:
    """0 acceptation, 1 rejet, 2 erreur, 64 usage"""

    def test_validate(self, run_cli):
        code, report = run_cli("validate", "E1")
        assert code == EXIT_ACCEPT
        assert report["valid"]

    def test_validate_invalid_file(self, run_cli, tmp_path):
        path = tmp_path / "bad.json"
        path.write_text(json.dumps({"alphabet_size": 2, "num_dits": 2, "locality": 1, "degree": 1,
                                    "terms": [{"qudits": [0, 1], "form": "sets", "classes": [["00"]]}]}))
        code, report = run_cli("validate", str(path))
        assert code == EXIT_REJECT
        assert report["violations"][0]["code"] == "locality"

    def test_np_reject(self, run_cli):
        code, report = run_cli("verify", "E5", "--mode", "np", "--witness", "000", "--radius", "2")
        assert code == EXIT_REJECT
        assert report["verdict"]["path"]["end"] == "101"

    def test_np_accept(self, run_cli):
        code, report = run_cli("verify", "E5", "--mode", "np", "--witness", "000", "--radius", "1")
        assert code == EXIT_ACCEPT
        assert report["outcome"] == "accept"

    def test_unknown_file(self, run_cli):
        code, report = run_cli("validate", "E42")
        assert code == EXIT_ERROR
        assert report["error"]["type"] == "InstanceParseError"

    def test_usage_error(self, run_cli):
        code, report = run_cli("verify", "E5", "--mode", "quantique")
        assert code == EXIT_USAGE
        assert report["error"]["type"] == "UsageError"

    def test_bad_epsilon(self, run_cli):
        code, _ = run_cli("expand", "E5", "--start", "000", "--epsilon", "beaucoup")
        assert code == EXIT_USAGE

    def test_missing_witness(self, run_cli):
        code, report = run_cli("verify", "E5", "--mode", "np", "--radius", "1")
        assert code == EXIT_USAGE
        assert "manifest" in report

    def test_non_commuting_is_an_error(self, run_cli):
        code, report = run_cli("verify", "E5", "--mode", "commuting", "--witness", "000")
        assert code == EXIT_ERROR
        assert report["error"]["type"] == "NonCommutingError"


class TestReports:
    """Contenu des rapports"""

    def test_manifest(self, run_cli):
        _, report = run_cli("--seed", "5", "bfs", "E5", "--start", "000")
        manifest = report["manifest"]
        assert manifest["command"] == "bfs"
        assert manifest["seed"] == 5
        assert manifest["version"] == __version__
        assert manifest["tolerances"]["tol"] == 1e-9

    def test_global_flags_after_command(self, run_cli):
        _, report = run_cli("walk", "E5", "--start", "000", "--steps", "3", "--trials", "4", "--seed", "9")
        assert report["manifest"]["seed"] == 9

    def test_walk_is_reproducible(self, run_cli):
        argv = ("--seed", "4", "walk", "E5", "--start", "000", "--steps", "6", "--trials", "8")
        first, second = run_cli(*argv)[1], run_cli(*argv)[1]
        assert first["accepted"] == second["accepted"]
        assert first["sample_reject_path"] == second["sample_reject_path"]

    def test_negligible(self, run_cli):
        code, report = run_cli("verify", "E6", "--mode", "negligible", "--witness", "0000", "--radius", "1")
        assert code == EXIT_ACCEPT
        assert report["energy_threshold"] == "1/" + str(48 ** 6)

    def test_commuting(self, run_cli):
        code, report = run_cli("verify", "E3", "--mode", "commuting", "--witness", "00")
        assert code == EXIT_REJECT
        assert report["threshold"] == "1/8"
        assert report["overlaps"] == ["1/2", "0"]

    def test_pinned_walk(self, run_cli):
        code, report = run_cli("verify", "E1", "--mode", "pinned-walk", "--steps", "20", "--trials", "3")
        assert code == EXIT_ACCEPT
        assert report["accept_rate"] == 1.0

    def test_expand(self, run_cli):
        code, report = run_cli("expand", "E5", "--start", "000", "--epsilon", "1", "--trace")
        assert code == EXIT_ACCEPT
        assert [layer["terms"] for layer in report["layers"]] == [[0], [1]]
        assert report["path"]["end"] == "101"
        assert report["lightcone"]["apex"] == 2

    @pytest.mark.parametrize("what", ["energy", "ff", "minunsat", "witness", "distances", "protected"])
    def test_oracle(self, run_cli, what):
        code, report = run_cli("oracle", "E3", "--what", what)
        assert code == EXIT_ACCEPT
        if what == "energy":
            assert report["energy"] == pytest.approx(0.5)
        if what == "minunsat":
            assert report["min_unsat"] == "1/2"

    def test_decompose_term(self, run_cli):
        code, report = run_cli("decompose", "E5", "--term", "2")
        assert code == EXIT_ACCEPT
        assert report["terms"][0]["classes"] == [["00"], ["01"], ["10"]]

    def test_decompose_term_out_of_range(self, run_cli):
        code, _ = run_cli("decompose", "E5", "--term", "9")
        assert code == EXIT_USAGE


class TestFiles:
    """Compilation et conversion vers des fichiers"""

    def test_compile_then_validate(self, run_cli, tmp_path):
        out = tmp_path / "not_output.json"
        code, report = run_cli("compile", "not_output", "-o", str(out))
        assert code == EXIT_ACCEPT
        assert report["validation"]["uniform"]
        assert run_cli("validate", str(out))[0] == EXIT_ACCEPT

    def test_convert_round_trip_is_byte_stable(self, run_cli, tmp_path):
        a, b, c = (tmp_path / name for name in ("a.json", "b.json", "c.json"))
        assert run_cli("convert", "E1", "--to", "setcsp", "-o", str(a))[0] == EXIT_ACCEPT
        assert run_cli("convert", str(a), "--to", "matrix", "-o", str(b))[0] == EXIT_ACCEPT
        assert run_cli("convert", str(b), "--to", "setcsp", "-o", str(c))[0] == EXIT_ACCEPT
        assert a.read_bytes() == c.read_bytes()

    def test_convert_to_sets(self, run_cli):
        _, report = run_cli("convert", "E2", "--to", "sets")
        assert report["document"]["terms"][0]["form"] == "sets"
