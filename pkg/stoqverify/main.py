#!/usr/bin/env python3
"""
stoqverify - Vérification de hamiltoniens stoquastiques uniformes.

Ce fichier est le point d'entrée de la ligne de commande. Chaque commande
écrit un unique rapport JSON sur la sortie standard ; les journaux vont sur
la sortie d'erreur.

Codes de sortie : 0 acceptation/succès, 1 rejet, 2 erreur, 64 usage.
"""

import argparse
import json
import logging
import sys
import time
from fractions import Fraction

from stoqverify import __version__
from stoqverify.config import config
from stoqverify.core import circuit2ham, expansion_lab, spectral_oracle, stoq_decompose, verifiers, walk_graph
from stoqverify.core.errors import StoqError, UsageError
from stoqverify.core.instance_model import (
    HamiltonianInstance,
    SetConstraint,
    SetCSPInstance,
    dump_instance,
    dump_setcsp,
    from_setcsp,
    parse_any,
    to_setcsp,
    validate_document,
    validation_report,
)
from stoqverify.utils.fixtures import fixtures
from stoqverify.utils.reports import build_manifest, emit, error_payload, write_document

logger = logging.getLogger("stoqverify")

EXIT_ACCEPT = 0
EXIT_REJECT = 1
EXIT_ERROR = 2
EXIT_USAGE = 64


class CommandParser(argparse.ArgumentParser):
    """ArgumentParser qui lève UsageError au lieu de quitter"""

    def error(self, message):
        raise UsageError(message)


def _global_flags(parser, suppress):
    default = argparse.SUPPRESS if suppress else None
    parser.add_argument("--tol", type=float, default=default, help="Tolérance numérique")
    parser.add_argument("--seed", type=int, default=default, help="Graine des générateurs")
    parser.add_argument("--threads", type=int, default=default, help="Threads pour les essais")
    parser.add_argument("--verbose", action="store_true", default=argparse.SUPPRESS if suppress else False,
                        help="Journaux de niveau INFO")
    parser.add_argument("--debug", action="store_true", default=argparse.SUPPRESS if suppress else False,
                        help="Mode débogage avec plus de logs")


def build_parser():
    parser = CommandParser(prog="stoqverify", description="Vérification de hamiltoniens stoquastiques uniformes")
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    _global_flags(parser, suppress=False)
    common = CommandParser(add_help=False)
    _global_flags(common, suppress=True)
    sub = parser.add_subparsers(dest="command", metavar="COMMAND")
    sub.required = True

    p = sub.add_parser("validate", parents=[common], help="Valider un fichier d'instance")
    p.add_argument("file")

    p = sub.add_parser("decompose", parents=[common], help="Classes des termes ou diagnostic de non-uniformité")
    p.add_argument("file")
    p.add_argument("--term", type=int, help="Indice du terme")

    p = sub.add_parser("walk", parents=[common], help="Marche aléatoire répétée")
    p.add_argument("file")
    p.add_argument("--start", required=True)
    p.add_argument("--steps", type=int)
    p.add_argument("--trials", type=int, default=1)

    p = sub.add_parser("bfs", parents=[common], help="Plus court chemin vers une chaîne mauvaise")
    p.add_argument("file")
    p.add_argument("--start", required=True)
    p.add_argument("--radius", type=int)

    p = sub.add_parser("verify", parents=[common], help="Vérificateurs NP, MA, épinglé, commutant, négligeable")
    p.add_argument("file")
    p.add_argument("--mode", required=True, choices=["np", "ma", "pinned", "pinned-walk", "commuting", "negligible"])
    p.add_argument("--witness")
    group = p.add_mutually_exclusive_group()
    group.add_argument("--epsilon", type=Fraction)
    group.add_argument("--radius", type=int)
    p.add_argument("--steps", type=int)
    p.add_argument("--trials", type=int, default=1)

    p = sub.add_parser("expand", parents=[common], help="Couches gloutonnes, cône de lumière, chemin")
    p.add_argument("file")
    p.add_argument("--start", required=True)
    p.add_argument("--epsilon", type=Fraction, required=True)
    p.add_argument("--max-layers", type=int)
    p.add_argument("--trace", action="store_true")

    p = sub.add_parser("oracle", parents=[common], help="Oracle spectral exact")
    p.add_argument("file")
    p.add_argument("--what", required=True, choices=["energy", "ff", "minunsat", "witness", "distances", "protected"])
    p.add_argument("--method", default="auto", choices=["auto", "dense", "iterative"])
    p.add_argument("--t", type=int, default=1, help="Rayon pour --what protected")

    p = sub.add_parser("compile", parents=[common], help="Compiler un circuit réversible")
    p.add_argument("file")
    p.add_argument("-o", "--output")
    p.add_argument("--pinned", action="store_true")
    p.add_argument("--degree-reduce", action="store_true")

    p = sub.add_parser("convert", parents=[common], help="Conversion SetCSP <-> hamiltonien")
    p.add_argument("file")
    p.add_argument("--to", required=True, choices=["setcsp", "matrix", "sets"])
    p.add_argument("-o", "--output")
    return parser


def parse_arguments(argv=None):
    """Parse command-line arguments"""
    return build_parser().parse_args(argv)


def setup_logging(args):
    level = logging.WARNING
    if getattr(args, "verbose", False):
        level = logging.INFO
    if getattr(args, "debug", False):
        level = logging.DEBUG
    logging.basicConfig(
        level=level,
        format='%(asctime)s - %(name)s - %(levelname)s - %(message)s',
        stream=sys.stderr,
    )
    logging.getLogger("stoqverify").setLevel(level)


def _load_instance(args) -> HamiltonianInstance:
    return fixtures.load(args.file)


def _witness(instance, args, required=True):
    if args.witness is None:
        if required:
            raise UsageError(f"--witness est requis pour le mode {args.mode}")
        return None
    return instance.parse_string(args.witness)


# ---------------------------------------------------------------------------
# Commandes
# ---------------------------------------------------------------------------

def cmd_validate(args):
    report = validate_document(fixtures.path(args.file))
    return report, EXIT_ACCEPT if report["valid"] else EXIT_REJECT


def cmd_decompose(args):
    instance = _load_instance(args)
    indices = None if args.term is None else [args.term]
    if args.term is not None and not 0 <= args.term < instance.m:
        raise UsageError(f"Terme {args.term} hors de [0, {instance.m})")
    return {"terms": stoq_decompose.decompose_all(instance, indices)}, EXIT_ACCEPT


def cmd_walk(args):
    instance = _load_instance(args)
    start = instance.parse_string(args.start)
    steps = verifiers.VerifierConfig(steps=args.steps).resolve_steps(instance)
    result = walk_graph.run_walk_trials(start, instance, steps, args.trials, config.seed,
                                        config.threads, progress=logger.isEnabledFor(logging.INFO))
    return {
        "start": instance.format_string(start),
        "steps": steps,
        "trials": result.trials,
        "accepted": result.accepted,
        "accept_rate": result.accept_rate,
        "reject_trial": result.reject_trial,
        "sample_reject_path": None if result.sample_reject is None else result.sample_reject.to_dict(instance),
    }, EXIT_ACCEPT


def cmd_bfs(args):
    instance = _load_instance(args)
    start = instance.parse_string(args.start)
    path = walk_graph.bfs_to_bad(start, instance, args.radius)
    return {
        "start": instance.format_string(start),
        "radius": args.radius,
        "found": path is not None,
        "path": None if path is None else path.to_dict(instance),
    }, EXIT_ACCEPT


def cmd_verify(args):
    instance = _load_instance(args)
    cfg = verifiers.VerifierConfig(epsilon=args.epsilon, radius=args.radius, steps=args.steps,
                                   trials=args.trials, seed=config.seed, tol=config.tol, threads=config.threads)
    report = {"mode": args.mode}
    if args.mode in ("np", "pinned"):
        if args.mode == "np":
            verdict = verifiers.np_verify(instance, _witness(instance, args), cfg)
        else:
            verdict = verifiers.pinned_verify(instance, cfg)
        report["radius"] = cfg.resolve_radius(instance)
    elif args.mode == "negligible":
        if args.radius is not None:
            t = args.radius
        elif args.epsilon is not None:
            t = verifiers.negligible_radius(args.epsilon, instance.k, instance.d, instance.q)
        else:
            raise UsageError("--radius ou --epsilon est requis pour le mode negligible")
        verdict = verifiers.negligible_verify(instance, _witness(instance, args), t, cfg)
        report["t"] = t
        report["energy_threshold"] = str(verifiers.negligible_threshold(t, instance.k, instance.q, instance.m))
    elif args.mode == "commuting":
        witness = _witness(instance, args)
        verdict = verifiers.commuting_verify(instance, witness, cfg)
        report["threshold"] = str(Fraction(1, 2 * instance.q ** instance.k))
        report["overlaps"] = [str(v) for v in verifiers.commuting_overlaps(instance, witness)]
    else:
        start = _witness(instance, args) if args.mode == "ma" else (0,) * instance.n
        steps = cfg.resolve_steps(instance)
        result = walk_graph.run_walk_trials(start, instance, steps, cfg.trials, cfg.seed, cfg.threads)
        report.update({
            "steps": steps,
            "trials": result.trials,
            "accept_rate": result.accept_rate,
            "sample_reject_path": None if result.sample_reject is None else result.sample_reject.to_dict(instance),
        })
        accepted = result.accepted == result.trials
        report["outcome"] = walk_graph.ACCEPT if accepted else walk_graph.REJECT
        return report, EXIT_ACCEPT if accepted else EXIT_REJECT
    report["verdict"] = verdict.to_dict(instance)
    report["outcome"] = verdict.outcome
    return report, EXIT_ACCEPT if verdict.accepted else EXIT_REJECT


def cmd_expand(args):
    instance = _load_instance(args)
    start = instance.parse_string(args.start)
    run = expansion_lab.layers_to_bad(start, instance, args.epsilon, args.max_layers)
    report = run.to_dict(instance, trace=args.trace)
    if not run.exhausted:
        cone = expansion_lab.lightcone(run.layers, run.apex, instance)
        path = expansion_lab.reconstruct_path(start, cone, instance, run.bad_string)
        report["lightcone"] = cone.to_dict()
        report["path"] = path.to_dict(instance)
    return report, EXIT_ACCEPT


def cmd_oracle(args):
    instance = _load_instance(args)
    what = args.what
    if what == "energy":
        return spectral_oracle.ground_energy(instance, args.method).to_dict(instance), EXIT_ACCEPT
    if what == "ff":
        return spectral_oracle.exact_frustration_free(instance).to_dict(instance), EXIT_ACCEPT
    if what == "minunsat":
        result = spectral_oracle.min_unsat_over_subsets(to_setcsp(instance))
        return {
            "min_unsat": str(result.value),
            "subset": [instance.format_string(x) for x in result.subset],
        }, EXIT_ACCEPT
    if what == "witness":
        ground = spectral_oracle.ground_energy(instance, args.method)
        witness = spectral_oracle.witness_from_groundstate(instance, ground)
        return {"witness": instance.format_string(witness), "energy": ground.energy}, EXIT_ACCEPT
    if what == "distances":
        table = spectral_oracle.bad_distance_table(instance)
        return {
            "max_distance": table.max_distance,
            "distances": {instance.format_string(instance.string_at(i)): int(d) for i, d in enumerate(table.distances)},
        }, EXIT_ACCEPT
    witness = spectral_oracle.protected_witness(instance, args.t)
    return {"t": args.t, "witness": None if witness is None else instance.format_string(witness)}, EXIT_ACCEPT


def cmd_compile(args):
    circuit = fixtures.load_circuit(args.file)
    if args.degree_reduce:
        circuit = circuit2ham.degree_reduce(circuit)
    compiled = circuit2ham.compile_with_layout(circuit, pinned=args.pinned)
    document = dump_instance(compiled.instance)
    report = {
        "data_wires": compiled.data_wires,
        "clock": compiled.clock,
        "labels": compiled.labels,
        "validation": validation_report(compiled.instance),
    }
    if args.output:
        write_document(document, args.output)
        report["output"] = args.output
    else:
        report["instance"] = document
    return report, EXIT_ACCEPT


def cmd_convert(args):
    source = parse_any(fixtures.path(args.file))
    if isinstance(source, SetCSPInstance):
        if args.to == "setcsp":
            document = dump_setcsp(source)
        elif args.to == "matrix":
            document = dump_instance(from_setcsp(source))
        else:
            document = dump_instance(HamiltonianInstance(source.n, source.alphabet, source.constraints, source.k, source.d))
    else:
        csp = to_setcsp(source)
        if args.to == "setcsp":
            document = dump_setcsp(csp)
        elif args.to == "matrix":
            document = dump_instance(from_setcsp(csp))
        else:
            sets = tuple(SetConstraint(c.qudits, c.classes) for c in csp.constraints)
            document = dump_instance(HamiltonianInstance(csp.n, csp.alphabet, sets, csp.k, csp.d))
    report = {"to": args.to}
    if args.output:
        write_document(document, args.output)
        report["output"] = args.output
    else:
        report["document"] = document
    return report, EXIT_ACCEPT


COMMANDS = {
    "validate": cmd_validate,
    "decompose": cmd_decompose,
    "walk": cmd_walk,
    "bfs": cmd_bfs,
    "verify": cmd_verify,
    "expand": cmd_expand,
    "oracle": cmd_oracle,
    "compile": cmd_compile,
    "convert": cmd_convert,
}


def dispatch(argv=None, stream=None):
    """Exécute une commande et renvoie son code de sortie"""
    stream = stream or sys.stdout
    started = time.perf_counter()
    try:
        args = parse_arguments(argv)
    except UsageError as e:
        sys.stderr.write(f"stoqverify: {e.message}\n")
        stream.write(json.dumps(error_payload(e), indent=2, sort_keys=True) + "\n")
        return EXIT_USAGE
    except SystemExit as e:
        # --help / --version
        return int(e.code or 0)

    setup_logging(args)
    config.update(tol=getattr(args, "tol", None), seed=getattr(args, "seed", None),
                  threads=getattr(args, "threads", None))
    arguments = {k: v for k, v in vars(args).items() if k not in ("verbose", "debug")}

    try:
        payload, code = COMMANDS[args.command](args)
    except UsageError as e:
        logger.error(f"Erreur d'utilisation: {e.message}")
        emit(error_payload(e), build_manifest(args.command, arguments, started), stream)
        return EXIT_USAGE
    except StoqError as e:
        logger.error(f"{type(e).__name__}: {e.message}", exc_info=logger.isEnabledFor(logging.DEBUG))
        emit(error_payload(e), build_manifest(args.command, arguments, started), stream)
        return EXIT_ERROR
    emit(payload, build_manifest(args.command, arguments, started), stream)
    return code


def main(argv=None):
    """Main function"""
    return dispatch(argv)


if __name__ == "__main__":
    sys.exit(main())
