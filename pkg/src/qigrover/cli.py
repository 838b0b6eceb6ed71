"""Command-line front end.

Exit codes: 0 success, 1 usage error, 2 DIMACS parse error, 3 numerical
failure, 4 unsatisfiable (``solve --fail-on-unsat``), 5 ``verify`` found a
non-solution.
"""
from __future__ import annotations

import argparse
import hashlib
import json
import math
import os
import platform
import sys
from pathlib import Path

import numpy as np

from . import __version__, grover, qiga, qiga2, resources, sat
from .circuits import run_grover_circuit
from .errors import DimacsParseError, InvalidInputError, NumericalFailure
from .oracle import ClauseOperatorKind
from .tn import TruncationPolicy

EXIT_OK, EXIT_USAGE, EXIT_PARSE, EXIT_NUMERIC, EXIT_UNSAT, EXIT_VERIFY = range(6)
THREADS_ENV = "QIGROVER_THREADS"


class _UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise _UsageError(f"{self.prog}: error: {message}")


def _versions() -> dict:
    out = {"qigrover": __version__, "python": platform.python_version(), "numpy": np.__version__}
    for mod in ("scipy", "numba"):
        try:
            out[mod] = __import__(mod).__version__
        except ImportError:
            out[mod] = None
    return out


def _manifest(args, input_bytes: bytes | None = None, outputs=()) -> dict:
    opts = {k: v for k, v in vars(args).items() if k != "func"}
    return {
        "subcommand": " ".join(x for x in (args.command, getattr(args, "mode", None)) if x),
        "options": opts,
        "seed": getattr(args, "seed", None),
        "versions": _versions(),
        "input_sha256": hashlib.sha256(input_bytes).hexdigest() if input_bytes is not None else None,
        "outputs": [str(p) for p in outputs],
    }


def _emit(text: str, out: str | None, manifest: dict | None = None):
    """Write to ``out`` (plus a manifest sidecar when given) or stdout."""
    if out is None:
        sys.stdout.write(text)
        return
    Path(out).write_text(text)
    if manifest is not None:
        Path(out + ".manifest.json").write_text(json.dumps(manifest, indent=2, sort_keys=True) + "\n")


def _threads(args) -> int:
    if getattr(args, "threads", None):
        return args.threads
    env = os.environ.get(THREADS_ENV)
    if env:
        try:
            return max(1, int(env))
        except ValueError:
            raise _UsageError(f"{THREADS_ENV} must be an integer, got {env!r}") from None
    return os.cpu_count() or 1


def _read_cnf(path: str) -> tuple[sat.CnfFormula, bytes]:
    data = sys.stdin.buffer.read() if path == "-" else Path(path).read_bytes()
    return sat.parse_dimacs(data), data


def _qiga_options(args) -> qiga.QigaOptions:
    return qiga.QigaOptions(
        truncation=TruncationPolicy(rel_cutoff=args.cutoff, max_bond=args.max_bond),
        clause_order=qiga.ClauseOrder(args.order),
        slice_bits=getattr(args, "slices", 0) or 0,
        sample_count=getattr(args, "samples", 16),
        seed=getattr(args, "seed", 0),
        enumerate_threshold=getattr(args, "enumerate_threshold", 4096),
        clause_kind=ClauseOperatorKind(getattr(args, "kind", "ancilla")),
        threads=_threads(args),
    )


# ---------------------------------------------------------------------------
# subcommands
# ---------------------------------------------------------------------------


def cmd_gen(args) -> int:
    if args.mode == "random":
        f = sat.gen_random_3sat(args.n, args.ratio, args.seed)
        what = f"uniform random 3-SAT n={args.n} ratio={args.ratio} seed={args.seed}"
    else:
        spec = sat.Quasi1dSpec(args.n, args.block, args.intra, args.layers, args.seed)
        f = sat.gen_quasi_1d(spec)
        what = (f"quasi-1D 3-SAT n={args.n} block={args.block} intra={args.intra} "
                f"layers={args.layers} seed={args.seed}")
    comments = [what, "duplicate clauses and tautologies are not rejected"]
    text = sat.write_dimacs(f, comments).decode("ascii")
    _emit(text, args.out, _manifest(args, outputs=[args.out]) if args.out else None)
    return EXIT_OK


def cmd_solve(args) -> int:
    f, raw = _read_cnf(args.cnf)
    opts = _qiga_options(args)
    report = qiga.solve(f, opts)
    if args.reproducible:
        report.wall_time = None
    if args.json:
        doc = report.to_dict()
        doc["solutions_dimacs"] = [sat.solution_to_dimacs(b) for b in report.solutions]
        doc["manifest"] = _manifest(args, raw, [args.out] if args.out else [])
        _emit(json.dumps(doc, indent=2, sort_keys=True) + "\n", args.out)
    else:
        lines = [f"c count {report.count}", f"c chi_max {report.chi_max}"]
        if report.status is qiga.Status.UNSAT:
            lines.append("s UNSATISFIABLE")
        else:
            lines.append("s SATISFIABLE")
            for b in report.solutions:
                lines.append(f"c {b}")
                lines.append(sat.solution_to_dimacs(b))
        _emit("\n".join(lines) + "\n", args.out)
    if report.status is qiga.Status.UNSAT and args.fail_on_unsat:
        return EXIT_UNSAT
    return EXIT_OK


def cmd_count(args) -> int:
    f, _ = _read_cnf(args.cnf)
    opts = _qiga_options(args)
    count = qiga2.closed_count(f, opts=opts) if args.closed else qiga.count_solutions(f, opts)
    print(count)
    return EXIT_OK


def cmd_extract(args) -> int:
    f, raw = _read_cnf(args.cnf)
    result = qiga2.extract_solution(f, _qiga_options(args))
    if args.json:
        doc = result.to_dict()
        doc["manifest"] = _manifest(args, raw)
        print(json.dumps(doc, indent=2, sort_keys=True))
    else:
        print(f"c amplitude_evaluations {result.amplitude_evaluations}")
        if result.solution is None:
            print("s UNSATISFIABLE")
        else:
            print("s SATISFIABLE")
            print(f"c {result.solution}")
            print(sat.solution_to_dimacs(result.solution))
    return EXIT_OK


def _check_w(args):
    if len(args.w) != args.n or set(args.w) - {"0", "1"}:
        raise _UsageError(f"--w must be a {args.n}-character 0/1 string")


def cmd_grover(args) -> int:
    _check_w(args)
    policy = TruncationPolicy(rel_cutoff=args.cutoff)
    if args.mode == "ideal":
        if args.circuit:
            q = grover.optimal_iterations(args.n) if args.iters is None else args.iters
            trace = run_grover_circuit(args.w, q, policy)
            text = circuit_trace_csv(trace)
        else:
            cfg = grover.GroverConfig(
                args.n, (args.w,), iterations=args.iters, truncation=policy,
                granularity=grover.Granularity(args.granularity),
            )
            text = grover.run_ideal(cfg).to_csv()
        _emit(text, args.trace, _manifest(args, outputs=[args.trace]) if args.trace else None)
        return EXIT_OK
    if args.scan_lambda:
        try:
            lo, hi, steps = args.scan_lambda.split(",")
            lambdas = np.geomspace(float(lo), float(hi), int(steps))
        except ValueError:
            raise _UsageError("--scan-lambda expects LO,HI,STEPS") from None
        rows = grover.scan_noise(args.n, args.w, [float(x) for x in lambdas], _threads(args))
        text = grover.scan_to_csv(rows)
    else:
        if args.noise is None:
            raise _UsageError("grover noisy needs --lambda or --scan-lambda")
        cfg = grover.GroverConfig(args.n, (args.w,), iterations=args.iters, noise=args.noise,
                                  truncation=policy, record_entropy=False)
        trace = grover.run_noisy(cfg)
        lines = ["iteration,substep,p_success,p_theory,trace,chi_max"]
        for r in trace.records:
            theory = grover.depolarized_fidelity(r.iteration, args.n, args.noise)
            lines.append(f"{r.iteration},{r.substep},{r.p_success!r},{theory!r},{r.trace!r},{r.chi}")
        text = "\n".join(lines) + "\n"
    _emit(text, args.trace, _manifest(args, outputs=[args.trace]) if args.trace else None)
    return EXIT_OK


def circuit_trace_csv(trace) -> str:
    """Per-layer rows of a gate-level run; ``substep`` is the layer label."""
    lines = ["iteration,substep,p_success,max_entropy_log2,half_cut_entropy_log2,chi_max"]

    def half_cut(snap):
        # bond n//2 - 1 splits the data register into halves
        return snap.entropies[trace.n // 2 - 1] if len(snap.entropies) >= trace.n // 2 else 0.0

    start = trace.boundaries[0]
    lines.append(f"0,start,{trace.p_success[0]!r},{start.max_entropy!r},{half_cut(start)!r},{start.chi}")
    for it, snap in trace.layers:
        p = repr(trace.p_success[it]) if snap is trace.boundaries[it] else ""
        lines.append(f"{it},{snap.label},{p},{snap.max_entropy!r},{half_cut(snap)!r},{snap.chi}")
    return "\n".join(lines) + "\n"


def cmd_theory(args) -> int:
    n = args.n
    lambdas = args.Lambda or [0.0, 0.5, 0.8, 1.0, 2.0, 5.0, 10.0]
    print(f"n {n}")
    print(f"theta {grover.theta(n)!r}")
    print(f"r {grover.optimal_iterations(n)}")
    print("Lambda,q_star_real,q_star,p_peak,e_minus_Lambda")
    for lam in lambdas:
        st = grover.optimal_stop(n, lam)
        print(f"{lam!r},{st.q_star_real!r},{st.q_star},{st.p_peak!r},{math.exp(-lam)!r}")
    return EXIT_OK


def cmd_estimate(args) -> int:
    rows = []
    for n in args.n:
        p = resources.ResourceParams(n, args.p, args.gate_time, args.eps_ph, args.eps_th)
        rows.append(resources.estimate(p))
    if args.json:
        print(resources.rows_to_json(rows))
    else:
        sys.stdout.write(resources.rows_to_csv(rows))
    return EXIT_OK


def _read_solution_lines(text: str, n: int) -> list:
    out = []
    for line in text.splitlines():
        line = line.strip()
        if not line or line.startswith(("c", "s")):
            continue
        if line.startswith("v"):
            lits = [int(t) for t in line[1:].split() if t != "0"]
            bits = ["0"] * n
            for lit in lits:
                if lit > 0:
                    bits[n - lit] = "1"
            out.append("".join(bits))
        else:
            out.append(line)
    return out


def cmd_verify(args) -> int:
    f, _ = _read_cnf(args.cnf)
    sols = _read_solution_lines(Path(args.solutions).read_text(), f.n_vars)
    bad = [b for b in sols if len(b) != f.n_vars or not sat.evaluate(f, b)]
    for b in bad:
        print(f"not a solution: {b}")
    print(f"checked {len(sols)}, failed {len(bad)}")
    return EXIT_VERIFY if bad else EXIT_OK


# ---------------------------------------------------------------------------
# parser
# ---------------------------------------------------------------------------


def _add_engine_flags(p):
    p.add_argument("--order", choices=[o.value for o in qiga.ClauseOrder], default="as-given",
                   help="clause application order")
    p.add_argument("--cutoff", type=float, default=1e-12,
                   help="relative singular-value cutoff")
    p.add_argument("--max-bond", type=int, default=None, help="bond dimension cap")
    p.add_argument("--threads", type=int, default=None,
                   help=f"worker threads (default ${THREADS_ENV} or all cores)")


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="qigrover", description="Tensor-network Grover and SAT toolkit.")
    parser.add_argument("--version", action="version",
                        version=f"qigrover {__version__} ({json.dumps(_versions())})")
    sub = parser.add_subparsers(
        dest="command", required=True, parser_class=_Parser,
        metavar="{gen,solve,count,extract,grover,theory,estimate}",
    )

    gen = sub.add_parser("gen", help="generate a DIMACS instance")
    gsub = gen.add_subparsers(dest="mode", required=True, parser_class=_Parser)
    gr = gsub.add_parser("random", help="uniform random 3-SAT")
    gr.add_argument("--n", type=int, required=True)
    gr.add_argument("--ratio", type=float, default=4.2)
    gr.add_argument("--seed", type=int, default=0)
    gr.add_argument("--out")
    gq = gsub.add_parser("quasi1d", help="block-structured 3-SAT")
    gq.add_argument("--n", type=int, required=True)
    gq.add_argument("--block", type=int, default=10)
    gq.add_argument("--intra", type=int, default=37)
    gq.add_argument("--layers", type=int, default=2)
    gq.add_argument("--seed", type=int, default=0)
    gq.add_argument("--out")
    gen.set_defaults(func=cmd_gen)

    so = sub.add_parser("solve", help="count, sample and enumerate solutions")
    so.add_argument("cnf", help="DIMACS file, or - for stdin")
    so.add_argument("--slices", type=int, default=0, help="number of sliced leading qubits")
    so.add_argument("--samples", type=int, default=16)
    so.add_argument("--seed", type=int, default=0)
    so.add_argument("--enumerate-threshold", type=int, default=4096)
    so.add_argument("--kind", choices=[k.value for k in ClauseOperatorKind], default="ancilla",
                    help="clause operator form")
    so.add_argument("--json", action="store_true")
    so.add_argument("--out")
    so.add_argument("--fail-on-unsat", action="store_true")
    so.add_argument("--reproducible", action="store_true",
                    help="omit wall time so repeated runs are byte-identical")
    _add_engine_flags(so)
    so.set_defaults(func=cmd_solve)

    co = sub.add_parser("count", help="exact model count")
    co.add_argument("cnf")
    co.add_argument("--closed", action="store_true", help="closed-simulation count")
    _add_engine_flags(co)
    co.set_defaults(func=cmd_count)

    ex = sub.add_parser("extract", help="bit-by-bit solution extraction")
    ex.add_argument("cnf")
    ex.add_argument("--json", action="store_true")
    _add_engine_flags(ex)
    ex.set_defaults(func=cmd_extract)

    gv = sub.add_parser("grover", help="Grover iteration traces")
    gvs = gv.add_subparsers(dest="mode", required=True, parser_class=_Parser)
    for name in ("ideal", "noisy"):
        p = gvs.add_parser(name)
        p.add_argument("--n", type=int, required=True)
        p.add_argument("--w", required=True, help="marked bitstring")
        p.add_argument("--iters", type=int, default=None)
        p.add_argument("--trace", help="CSV output path (default stdout)")
        p.add_argument("--cutoff", type=float, default=1e-12)
        p.add_argument("--threads", type=int, default=None)
        if name == "ideal":
            p.add_argument("--granularity", choices=[g.value for g in grover.Granularity],
                           default="iteration")
            p.add_argument("--circuit", action="store_true",
                           help="gate-level run with one row per layer")
        else:
            p.add_argument("--lambda", dest="noise", type=float, default=None)
            p.add_argument("--scan-lambda", help="LO,HI,STEPS geometric grid of total noise")
    gv.set_defaults(func=cmd_grover)

    th = sub.add_parser("theory", help="closed-form Grover and noise numbers")
    th.add_argument("--n", type=int, required=True)
    th.add_argument("--Lambda", type=float, action="append")
    th.set_defaults(func=cmd_theory)

    es = sub.add_parser("estimate", help="resource estimates")
    es.add_argument("--n", type=int, action="append", required=True)
    es.add_argument("--p", type=float, default=0.5)
    es.add_argument("--gate-time", type=float, default=1e-8)
    es.add_argument("--eps-ph", type=float, default=None)
    es.add_argument("--eps-th", type=float, default=resources.DEFAULT_EPS_TH)
    es.add_argument("--json", action="store_true")
    es.set_defaults(func=cmd_estimate)

    # no help text keeps it out of the command table
    ve = sub.add_parser("verify")
    ve.add_argument("cnf")
    ve.add_argument("solutions")
    ve.set_defaults(func=cmd_verify)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
        return args.func(args)
    except SystemExit as exc:  # --help and --version
        return int(exc.code or 0)
    except _UsageError as exc:
        print(exc, file=sys.stderr)
        return EXIT_USAGE
    except DimacsParseError as exc:
        print(f"parse error: {exc}", file=sys.stderr)
        return EXIT_PARSE
    except NumericalFailure as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERIC
    except InvalidInputError as exc:
        print(f"invalid input: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except OSError as exc:
        print(f"I/O error: {exc}", file=sys.stderr)
        return EXIT_USAGE
