"""
Command line front end.

    ergocert exact --preset XXZ -n 3 --J1 1 --Delta 0.5 --state GHZ
    ergocert certify --preset XXZ -n 3 --J1 1 --Delta 0.5 --state GHZ --K 20
    ergocert sweep --config sweep.yaml --out ghz.csv
    ergocert certify-file records.csv --preset XXZ -n 4 --J1 1 --Delta 0.5
    ergocert coverage -n 2 --state W --K 10 --shots 1000 --delta 0.05 -M 500
    ergocert analytic --qubit --z-star 0.3

Exit status is 0 on success, 2 when the only failures were infeasible
constraint sets and 1 on any other error.
"""
import argparse
import logging
import sys

import numpy as np

from ergocert import SCHEMA_VERSION
from ergocert import __version__
from ergocert.analytic import probe_sweep
from ergocert.analytic import qubit_sweep
from ergocert.certification import FeasibleSetSpec
from ergocert.certification import certify
from ergocert.certification_context import CertificationContext
from ergocert.ergotropy import coherent_ergotropy
from ergocert.ergotropy import dephase_incoherent
from ergocert.ergotropy import exact_ergotropy
from ergocert.exception import ConfigurationError
from ergocert.exception import ErgoCertError
from ergocert.exception import InfeasibleSet
from ergocert.harness.sweep import SweepConfig
from ergocert.harness.sweep import run_certify_file
from ergocert.harness.sweep import run_sweep
from ergocert.harness.sweep import write_csv
from ergocert.measurement import ExperimentPlan
from ergocert.measurement import ShotRecord
from ergocert.measurement import coverage_rate
from ergocert.measurement import simulate_plan
from ergocert.measurement import spec_from_plan
from ergocert.model.spin_chain import COUPLINGS
from ergocert.pauli import expectation
from ergocert.pauli import hierarchical_order
from ergocert.pauli import parse_pauli
from ergocert.util import describe_version
from ergocert.util import load_config
from ergocert.util import merge_conf

logger = logging.getLogger(__name__)

EXIT_OK = 0
EXIT_ERROR = 1
EXIT_INFEASIBLE = 2

LOG_LEVELS = [logging.WARNING, logging.INFO, logging.DEBUG]


def _floats(text):
    return [float(v) for v in text.split(",") if v.strip()]


def _ints(text):
    return [int(v) for v in text.split(",") if v.strip()]


def _labels(text):
    return [v.strip() for v in text.split(",") if v.strip()]


def _add_common(parser):
    parser.add_argument("--config", help="YAML or JSON configuration file")
    parser.add_argument("-v", "--verbose", action="count", default=0)
    parser.add_argument("--log-file")
    parser.add_argument("--allow-slow", action="store_true", default=None)


def _add_hamiltonian(parser):
    parser.add_argument("--preset", choices=["ANNNI", "XXZ", "MFI", "GENERAL"])
    parser.add_argument("-n", "--qubits", type=int, dest="n")
    for name in COUPLINGS:
        parser.add_argument("--{}".format(name), type=float, dest="coupling_{}".format(name))


def _add_state(parser):
    parser.add_argument(
        "--state", choices=["GHZ", "W", "PRODUCT", "GIBBS", "EXTREMAL_SUPERPOSITION"]
    )
    parser.add_argument("--beta", type=float)
    parser.add_argument("--weight", type=float, help="s of |E_1> + s|E_d>")


def _add_solver(parser):
    parser.add_argument("--objective", choices=["min_purity", "linear"])
    parser.add_argument("--tol-gap", type=float)
    parser.add_argument("--tol-feas", type=float)
    parser.add_argument("--max-iterations", type=int)


def build_parser():
    parser = argparse.ArgumentParser(
        prog="ergocert", description="Certified lower bounds on ergotropy."
    )
    parser.add_argument("--version", action="version", version=__version__)
    sub = parser.add_subparsers(dest="command")
    sub.required = True

    p = sub.add_parser("exact", help="Exact ergotropy of a configured state")
    _add_common(p)
    _add_hamiltonian(p)
    _add_state(p)

    p = sub.add_parser("certify", help="Certify from one set of Pauli expectations")
    _add_common(p)
    _add_hamiltonian(p)
    _add_state(p)
    _add_solver(p)
    group = p.add_mutually_exclusive_group()
    group.add_argument("--labels", type=_labels, help="Comma separated Pauli strings")
    group.add_argument("--K", type=int, help="First K strings of a hierarchical order")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--shots", type=int)
    p.add_argument("--delta", type=float)

    p = sub.add_parser("sweep", help="Bound against K over random orders")
    _add_common(p)
    _add_hamiltonian(p)
    _add_state(p)
    _add_solver(p)
    p.add_argument("--realizations", type=int)
    p.add_argument("--seed", type=int)
    p.add_argument("--shots", type=int)
    p.add_argument("--delta", type=float)
    p.add_argument("--k-list", type=_ints)
    p.add_argument("--monotone", action="store_true", default=None)
    p.add_argument("--workers", type=int)
    p.add_argument("--out", required=True)

    p = sub.add_parser("certify-file", help="Certify from a measurement record file")
    _add_common(p)
    _add_hamiltonian(p)
    _add_state(p)
    _add_solver(p)
    p.add_argument("records")
    p.add_argument("--delta", type=float)
    p.add_argument("--no-monotone", dest="monotone", action="store_false", default=True)
    p.add_argument("--out")

    p = sub.add_parser("coverage", help="Monte Carlo check of the confidence level")
    _add_common(p)
    _add_hamiltonian(p)
    _add_state(p)
    p.add_argument("--K", type=int, default=10)
    p.add_argument("--shots", type=int, default=1000)
    p.add_argument("--delta", type=float, default=0.05)
    p.add_argument("-M", "--repetitions", type=int, default=500)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--workers", type=int, default=1)

    p = sub.add_parser("analytic", help="Closed-form bounds next to the two-step bound")
    _add_common(p)
    _add_hamiltonian(p)
    _add_solver(p)
    p.add_argument("--weights", type=_floats, help="Values of s for the probe states")
    p.add_argument("--qubit", action="store_true")
    p.add_argument("--z-star", type=float, default=0.0)
    p.add_argument("--x-values", type=_floats)
    p.add_argument("--energies", type=_floats, default=[-1.0, 1.0])
    p.add_argument("--resolution", type=int, default=2001)
    p.add_argument("--out")

    return parser


def conf_from_args(args):
    """Configuration file contents with command line values on top."""
    conf = load_config(args.config) if args.config else {}

    def _get(name):
        return getattr(args, name, None)

    couplings = {name: _get("coupling_{}".format(name)) for name in COUPLINGS}
    override = {
        "allow_slow": _get("allow_slow"),
        "hamiltonian": {"preset": _get("preset"), "n": _get("n"), "couplings": couplings},
        "state": {"kind": _get("state"), "beta": _get("beta"), "weight": _get("weight")},
        "solver": {
            "kwargs": {
                "tol_gap": _get("tol_gap"),
                "tol_feas": _get("tol_feas"),
                "max_iterations": _get("max_iterations"),
            }
        },
        "certification": {"objective": _get("objective")},
        "sweep": {
            key: _get(key)
            for key in ["realizations", "seed", "shots", "delta", "monotone", "workers", "k_list"]
        },
    }
    conf = merge_conf(conf, override)
    if "solver" in conf and "class" not in conf["solver"]:
        conf["solver"]["class"] = "ergocert.sdp.SdpSolver"
    return conf


def setup_logging(verbose, log_file=None):
    level = LOG_LEVELS[min(verbose, len(LOG_LEVELS) - 1)]
    kwargs = {"level": level, "format": "%(asctime)s %(name)s %(levelname)s %(message)s"}
    if log_file:
        kwargs["filename"] = log_file
    logging.basicConfig(**kwargs)


def _names(context):
    _ham = context.conf.get("hamiltonian", {})
    _state = context.conf.get("state", {})
    return _ham.get("preset", "GENERAL"), _state.get("kind", "GHZ")


def do_exact(args, context):
    context.require("hamiltonian", "state")
    ham, rho = context.hamiltonian, context.state
    report = exact_ergotropy(rho, ham)
    preset, kind = _names(context)
    print(
        context.render(
            "exact.txt",
            hamiltonian_name=preset,
            n=rho.n_qubits,
            state_name=kind,
            mean_energy=ham.mean_energy(rho),
            ground_energy=ham.ground_energy,
            purity=rho.purity(),
            report=report,
            incoherent=dephase_incoherent(rho, ham).incoherent_ergotropy,
            coherent=coherent_ergotropy(rho, ham),
        ),
        end="",
    )
    return EXIT_OK


def do_certify(args, context):
    context.require("hamiltonian", "state")
    ham, rho = context.hamiltonian, context.state
    n = rho.n_qubits

    if args.labels:
        labels = [parse_pauli(p).label for p in args.labels]
    else:
        _k = args.K if args.K is not None else 4 ** n - 1
        labels = [p.label for p in hierarchical_order(n, args.seed)[:_k]]

    if (args.shots is None) != (args.delta is None):
        raise ConfigurationError("--shots and --delta go together")
    if args.shots is not None:
        plan = simulate_plan(rho, labels, args.shots, args.delta, (args.seed, 1))
        spec = spec_from_plan(plan)
    else:
        spec = FeasibleSetSpec.from_pauli_expectations(labels, [expectation(rho, p) for p in labels])

    result = certify(spec, ham, objective=context.objective, solver=context.solver)
    print(
        context.render(
            "certify.txt",
            spec=spec,
            labels=labels,
            result=result,
            exact=exact_ergotropy(rho, ham).value,
        ),
        end="",
    )
    return EXIT_OK


def do_sweep(args, context):
    config = SweepConfig.from_conf(context.conf)
    k_list = context.conf.get("sweep", {}).get("k_list")
    rows = run_sweep(config, k_list=k_list, out=args.out, solver=context.solver)
    if any(r.solver_failures for r in rows):
        return EXIT_ERROR
    if any(r.feasibility_failures for r in rows):
        return EXIT_INFEASIBLE
    return EXIT_OK


def do_certify_file(args, context):
    context.require("hamiltonian")
    summary = run_certify_file(
        args.records,
        context.hamiltonian,
        delta=args.delta,
        monotone=args.monotone,
        out=args.out,
        objective=context.objective,
        solver=context.solver,
    )
    exact = None
    if context.state is not None:
        exact = exact_ergotropy(context.state, context.hamiltonian).value
    print(
        context.render("certify_file.txt", records=args.records, summary=summary, exact=exact),
        end="",
    )
    return EXIT_INFEASIBLE if summary.infeasible_count else EXIT_OK


def do_coverage(args, context):
    context.require("state")
    rho = context.state
    strings = hierarchical_order(rho.n_qubits, args.seed)[: args.K]
    plan = ExperimentPlan([ShotRecord(p, args.shots, 0.0) for p in strings], args.delta)
    rate = coverage_rate(rho, plan, args.repetitions, args.seed, workers=args.workers)
    print("K={} N={} delta={} M={} violation rate {:.4f}".format(
        plan.K, args.shots, args.delta, args.repetitions, rate
    ))
    return EXIT_OK


def do_analytic(args, context):
    if args.qubit:
        x_values = args.x_values
        if x_values is None:
            x_values = np.linspace(0.0, np.sqrt(max(1 - args.z_star ** 2, 0.0)), 11)
        rows = qubit_sweep(
            args.z_star,
            x_values,
            energies=tuple(args.energies),
            resolution=args.resolution,
            solver=context.solver,
        )
    else:
        context.require("hamiltonian")
        weights = args.weights if args.weights is not None else np.linspace(0.0, 2.0, 9)
        rows = probe_sweep(context.hamiltonian, weights, solver=context.solver)

    if args.out:
        write_csv(
            args.out,
            ["schema={}".format(SCHEMA_VERSION), "version={}".format(describe_version())],
            rows[0]._fields,
            rows,
        )
    print(context.render("analytic.txt", rows=rows, qubit=args.qubit), end="")
    return EXIT_OK


COMMANDS = {
    "exact": do_exact,
    "certify": do_certify,
    "sweep": do_sweep,
    "certify-file": do_certify_file,
    "coverage": do_coverage,
    "analytic": do_analytic,
}


def main(argv=None):
    parser = build_parser()
    args = parser.parse_args(argv)
    setup_logging(args.verbose, args.log_file)

    try:
        context = CertificationContext(conf_from_args(args))
        return COMMANDS[args.command](args, context)
    except InfeasibleSet as err:
        logger.error("Infeasible constraints: {} (advice: widen by {})".format(err, err.advice))
        return EXIT_INFEASIBLE
    except (ErgoCertError, OSError) as err:
        logger.error("{}: {}".format(err.__class__.__name__, err))
        return EXIT_ERROR


if __name__ == "__main__":
    sys.exit(main())
