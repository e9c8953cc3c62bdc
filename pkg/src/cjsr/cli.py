"""Command-line front end.

Subcommands: `bounds` (bracket the constrained joint spectral radius),
`generate` (produce a high-growth accepted switching word and its cycles),
`bench` (repeat generation over seeds and report the success rate), and
`verify` (re-check a word or a serialized report from scratch).

Exit codes: 0 success, 1 verification failure, 2 input error, 3 solver
inconclusive.
"""

import argparse
import json
import math
import os
import sys
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from importlib import resources

import numpy as np

from . import bounds as bounds_mod
from . import dual as dual_mod
from . import seqgen
from .automaton import (Dfa, NondeterministicDfaError, Tsm, build_tsm, find_path,
                        is_accepted, is_repeatable_cycle)
from .lift import MatrixSet, build_lift
from .linalg import MonomialBasis, spectral_radius
from .sdp import SolverInconclusive

EXIT_OK = 0
EXIT_VERIFICATION = 1
EXIT_INPUT = 2
EXIT_INCONCLUSIVE = 3


class InputError(ValueError):
    """Schema or semantic problem in a system description file."""


@dataclass(frozen=True)
class SystemFile:
    name: str
    matrix_set: MatrixSet
    dfa: Dfa
    tsm: Tsm
    metadata: dict = field(default_factory=dict)


def _fmt(x):
    if x == math.inf:
        return "inf"
    return "%.8f" % x


def _load_json(path_or_text):
    if isinstance(path_or_text, str) and path_or_text.lstrip().startswith("{"):
        return json.loads(path_or_text)
    try:
        with open(path_or_text) as fh:
            return json.load(fh)
    except FileNotFoundError:
        # fall back to the bundled fixtures so `cjsr bounds example1.json` works
        name = os.path.basename(str(path_or_text))
        ref = resources.files("cjsr").joinpath("data", name)
        if ref.is_file():
            return json.loads(ref.read_text())
        raise InputError("system file not found: %s" % path_or_text)
    except json.JSONDecodeError as exc:
        raise InputError("invalid JSON in %s: %s" % (path_or_text, exc))


def parse_system(path_or_text):
    doc = _load_json(path_or_text)
    if not isinstance(doc, dict):
        raise InputError("top level: expected a JSON object")
    mats = doc.get("matrices")
    if not isinstance(mats, list) or not mats:
        raise InputError("matrices: expected a nonempty list of square matrices")
    arrays = []
    for i, mat in enumerate(mats):
        try:
            a = np.asarray(mat, dtype=float)
        except (TypeError, ValueError):
            raise InputError("matrices[%d]: not a numeric matrix" % i)
        if a.ndim != 2 or a.shape[0] != a.shape[1]:
            raise InputError("matrices[%d]: must be square, got shape %s" % (i, a.shape))
        arrays.append(a)
    try:
        matrix_set = MatrixSet(tuple(arrays))
    except ValueError as exc:
        raise InputError("matrices: %s" % exc)
    m = matrix_set.num_modes

    automaton = doc.get("automaton")
    if automaton is None:
        # matrices-only fixture: unconstrained, one state with m self-loops
        dfa = Dfa(1, m, frozenset((1, j, 1) for j in range(1, m + 1)))
        tsm = build_tsm(dfa)
    elif isinstance(automaton, dict):
        has_edges = "edges" in automaton
        has_blocks = "blocks" in automaton
        if has_edges == has_blocks:
            raise InputError("automaton: exactly one of 'edges' or 'blocks' must be present")
        try:
            if has_edges:
                edges = automaton["edges"]
                if not isinstance(edges, list):
                    raise InputError("automaton.edges: expected a list of [from, label, to]")
                num_states = automaton.get("num_states")
                if num_states is None:
                    num_states = max((max(e[0], e[2]) for e in edges), default=1)
                dfa = Dfa(int(num_states), m, frozenset(tuple(int(v) for v in e) for e in edges))
                tsm = build_tsm(dfa)
            else:
                blocks = automaton["blocks"]
                if not isinstance(blocks, list) or len(blocks) != m:
                    raise InputError("automaton.blocks: expected %d F blocks" % m)
                tsm = Tsm(tuple(np.asarray(b, dtype=float) for b in blocks))
                dfa = tsm.to_dfa()
        except NondeterministicDfaError as exc:
            raise InputError("automaton: nondeterministic: %s" % exc)
        except InputError:
            raise
        except (TypeError, ValueError, IndexError) as exc:
            raise InputError("automaton: %s" % exc)
        if tsm.num_labels != m:
            raise InputError("automaton: label count %d does not match %d modes"
                             % (tsm.num_labels, m))
    else:
        raise InputError("automaton: expected an object or null")
    return SystemFile(str(doc.get("name", "system")), matrix_set, dfa, tsm,
                      dict(doc.get("metadata", {})))


def _parse_word(text):
    try:
        word = tuple(int(tok) for tok in text.replace(",", " ").split())
    except ValueError:
        raise InputError("word: expected comma/space separated integers")
    if not word:
        raise InputError("word: empty")
    return word


def _word_json(word):
    out = {"labels": list(word.labels), "orientation": word.orientation,
           "source": word.source}
    if word.theta_trace:
        out["theta_trace"] = [[k, lt] for k, lt in word.theta_trace]
    if word.value is not None:
        out["value"] = word.value
    return out


def _cycle_json(c):
    return {"cycle": list(c.cycle), "value": c.value, "lifted_value": c.lifted_value,
            "length": c.length, "path": list(c.path.states) if c.path else None}


def _cert_json(cert):
    return {
        "gamma": cert.gamma,
        "degree": cert.duals[0].degree,
        "duals": [e.moments.tolist() for e in cert.duals],
        "margins": cert.margins,
        "normalization_residual": cert.normalization_residual,
    }


def _emit(report, json_path):
    if json_path:
        with open(json_path, "w") as fh:
            json.dump(report, fh, indent=2, sort_keys=True)
            fh.write("\n")


def cmd_bounds(args):
    system = parse_system(args.system)
    lifted = build_lift(system.matrix_set, system.tsm)
    methods = [m.strip() for m in args.method.split(",")]
    results = []
    t0 = time.perf_counter()
    for method in methods:
        if method == "brute":
            rep = bounds_mod.brute_force_rho_k(list(lifted.phis), args.k)
        elif method == "gripenberg":
            rep = bounds_mod.gripenberg_bounds(list(lifted.phis), args.eps, args.depth)
        elif method == "sos-primal":
            if args.degree % 2 != 0:
                raise InputError("--degree must be even (it is 2d)")
            upper = bounds_mod.sos_primal_upper(list(lifted.phis), args.degree // 2,
                                                args.bisect_tol)
            rep = bounds_mod.BoundsReport(0.0, upper, "sos_primal")
        else:
            raise InputError("unknown method %r" % method)
        results.append(rep)
        print("%-12s lower=%s upper=%s witness=%s" %
              (rep.method, _fmt(rep.lower), _fmt(rep.upper),
               ",".join(map(str, rep.witness_word)) or "-"))
    lower = max(r.lower for r in results)
    upper = min(r.upper for r in results)
    witness = max(results, key=lambda r: r.lower).witness_word
    print("combined     lower=%s upper=%s" % (_fmt(lower), _fmt(upper)))
    report = {
        "command": "bounds",
        "system": system.name,
        "flags": {"method": args.method, "eps": args.eps, "depth": args.depth,
                  "k": args.k, "degree": args.degree},
        "bounds": {"lower": lower, "upper": upper, "witness_word": list(witness),
                   "per_method": [{"method": r.method, "lower": r.lower,
                                   "upper": r.upper,
                                   "witness_word": list(r.witness_word),
                                   "budget_used": r.budget_used}
                                  for r in results]},
        "timings": {"total_s": time.perf_counter() - t0},
    }
    _emit(report, args.json)
    return EXIT_OK


def _run_dual_pipeline(system, lifted, degree, horizon, length, seed, gamma_tol, cert=None):
    d = degree // 2
    if cert is None:
        gamma, cert = dual_mod.max_feasible_gamma(lifted, d, tol=gamma_tol)
    else:
        gamma = cert.gamma
    if length is None:
        length = 24 * horizon
    word = seqgen.alg1_generate(lifted, cert, horizon, length, seed)
    return gamma, cert, word


def cmd_generate(args):
    system = parse_system(args.system)
    lifted = build_lift(system.matrix_set, system.tsm)
    t0 = time.perf_counter()
    failures = []
    gamma = None
    cert = None
    if args.algo == "dual":
        if args.degree % 2 != 0:
            raise InputError("--degree must be even (it is 2d)")
        gamma, cert, word = _run_dual_pipeline(system, lifted, args.degree,
                                               args.horizon, args.length,
                                               args.seed, args.gamma_tol)
        d = args.degree // 2
        if not seqgen.check_theta_trace(word, gamma, d, args.horizon, lifted.num_modes):
            failures.append("theta trace violates the per-block recursion")
    else:
        word = seqgen.alg2_generate(lifted, args.eps, args.max_length)
        d = None
    if not is_accepted(system.tsm, word.labels):
        failures.append("generated word is not accepted by the automaton")
    cycles = seqgen.extract_cycles(word, system.tsm, system.matrix_set, args.max_cycle_len)
    growth = None
    if gamma is not None:
        growth = seqgen.growth_report(word, lifted, system.matrix_set, gamma, d,
                                      args.max_cycle_len)
        if not growth.satisfied:
            failures.append("best cycle value below the gamma/m^(1/2d) floor")

    print("word (%d labels): %s" % (len(word.labels), ",".join(map(str, word.labels))))
    if gamma is not None:
        print("gamma = %s  floor gamma/m^(1/2d) = %s" %
              (_fmt(gamma), _fmt(growth.growth_floor)))
    for c in cycles[:5]:
        print("cycle %-24s length=%-3d value=%s" %
              (",".join(map(str, c.cycle)), c.length, _fmt(c.value)))
    for msg in failures:
        print("VERIFICATION FAILED: %s" % msg, file=sys.stderr)

    report = {
        "command": "generate",
        "system": system.name,
        "flags": {"algo": args.algo, "degree": args.degree, "horizon": args.horizon,
                  "length": args.length, "eps": args.eps, "max_length": args.max_length},
        "seed": args.seed,
        "gamma": gamma,
        "words": [_word_json(word)],
        "cycles": [_cycle_json(c) for c in cycles],
        "growth": None if growth is None else {
            "word_length": growth.word_length, "phi_growth": growth.phi_growth,
            "a_growth": growth.a_growth, "growth_floor": growth.growth_floor,
            "best_cycle_value": growth.best_cycle_value, "satisfied": growth.satisfied},
        "verification_failures": failures,
        "timings": {"total_s": time.perf_counter() - t0},
    }
    if cert is not None and args.with_certificate:
        report["certificate"] = _cert_json(cert)
    _emit(report, args.json)
    return EXIT_VERIFICATION if failures else EXIT_OK


def _bench_one(payload):
    lifted, cert, horizon, length, seed, max_cycle_len, system = payload
    t0 = time.perf_counter()
    word = seqgen.alg1_generate(lifted, cert, horizon, length, seed)
    cycles = seqgen.extract_cycles(word, system.tsm, system.matrix_set, max_cycle_len)
    best = cycles[0].value if cycles else 0.0
    best_cycle = list(cycles[0].cycle) if cycles else []
    return seed, best, best_cycle, time.perf_counter() - t0


def cmd_bench(args):
    system = parse_system(args.system)
    lifted = build_lift(system.matrix_set, system.tsm)
    t0 = time.perf_counter()
    runs = []
    if args.algo == "dual":
        d = args.degree // 2
        gamma, cert = dual_mod.max_feasible_gamma(lifted, d, tol=args.gamma_tol)
        length = args.length if args.length is not None else 24 * args.horizon
        payloads = [(lifted, cert, args.horizon, length, seed, args.max_cycle_len, system)
                    for seed in range(1, args.runs + 1)]
        workers = int(os.environ.get("CJSR_WORKERS", "1"))
        if workers > 1:
            with ProcessPoolExecutor(max_workers=workers) as pool:
                runs = sorted(pool.map(_bench_one, payloads))
        else:
            runs = [_bench_one(p) for p in payloads]
    else:
        for seed in range(1, args.runs + 1):
            t1 = time.perf_counter()
            word = seqgen.alg2_generate(lifted, args.eps, args.max_length)
            cycles = seqgen.extract_cycles(word, system.tsm, system.matrix_set,
                                           args.max_cycle_len)
            best = cycles[0].value if cycles else 0.0
            best_cycle = list(cycles[0].cycle) if cycles else []
            runs.append((seed, best, best_cycle, time.perf_counter() - t1))
    successes = sum(1 for _, best, _, _ in runs if best >= args.target - 1e-6)
    pct = 100.0 * successes / len(runs)
    mean_t = sum(t for _, _, _, t in runs) / len(runs)
    print("system  algo      runs  success        mean time")
    print("%-7s %-9s %-5d %5.1f%% (%.3fs)" %
          (system.name, args.algo, len(runs), pct, mean_t))
    report = {
        "command": "bench",
        "system": system.name,
        "flags": {"algo": args.algo, "degree": args.degree, "horizon": args.horizon,
                  "runs": args.runs, "target": args.target},
        "seeds": [s for s, _, _, _ in runs],
        "results": [{"seed": s, "best_cycle_value": b, "best_cycle": c,
                     "success": b >= args.target - 1e-6} for s, b, c, _ in runs],
        "success_rate_percent": pct,
        "timings": {"total_s": time.perf_counter() - t0, "mean_run_s": mean_t},
    }
    _emit(report, args.json)
    return EXIT_OK


def _verify_word(system, word):
    failures = []
    accepted = is_accepted(system.tsm, word)
    print("word %s: %s" % (",".join(map(str, word)),
                           "accepted" if accepted else "REJECTED"))
    if not accepted:
        failures.append("word rejected by the automaton")
        return failures
    if is_repeatable_cycle(system.tsm, word):
        value = spectral_radius(system.matrix_set.word_product(word)) ** (1.0 / len(word))
        print("repeatable cycle, value = %s" % _fmt(value))
    path = find_path(system.dfa, word)
    if path is not None:
        print("path: %s" % " -> ".join("q%d" % q for q in path.states))
    return failures


def cmd_verify(args):
    system = parse_system(args.system)
    failures = []
    if args.word:
        failures += _verify_word(system, _parse_word(args.word))
    if args.report:
        doc = _load_json(args.report)
        for wdoc in doc.get("words", []):
            word = tuple(wdoc["labels"])
            if not is_accepted(system.tsm, word):
                failures.append("report word %s rejected" % (word,))
                print("word %s: REJECTED" % ",".join(map(str, word)))
            else:
                print("word %s: accepted" % ",".join(map(str, word)))
        for cdoc in doc.get("cycles", []):
            cyc = tuple(cdoc["cycle"])
            if not is_repeatable_cycle(system.tsm, cyc):
                failures.append("cycle %s not repeatable" % (cyc,))
                continue
            value = spectral_radius(system.matrix_set.word_product(cyc)) ** (1.0 / len(cyc))
            if abs(value - cdoc["value"]) > 1e-8:
                failures.append("cycle %s value mismatch: stored %.10f recomputed %.10f"
                                % (cyc, cdoc["value"], value))
        cert_doc = doc.get("certificate")
        if cert_doc is not None:
            lifted = build_lift(system.matrix_set, system.tsm)
            degree = int(cert_doc["degree"])
            duals = tuple(dual_mod.PseudoExpectation(lifted.dim, degree, np.array(mv))
                          for mv in cert_doc["duals"])
            mm, cm, res = dual_mod.verify_certificate(lifted, degree // 2,
                                                      cert_doc["gamma"], duals)
            scale = max(1.0, max(abs(x) for e in duals for x in e.moments))
            tol = 1e-9 * scale
            for i, margin in enumerate(mm):
                if margin < -tol:
                    failures.append("moment matrix %d not PSD: min eig %.3e (tol %.1e)"
                                    % (i + 1, margin, tol))
            if cm < -tol:
                failures.append("coupling matrix not PSD: min eig %.3e (tol %.1e)" % (cm, tol))
            if res > 1e-8:
                failures.append("normalization residual %.3e exceeds 1e-8" % res)
            print("certificate: moment margins %s coupling %.3e residual %.3e" %
                  (["%.3e" % x for x in mm], cm, res))
        gamma = doc.get("gamma")
        growth = doc.get("growth")
        if gamma is not None and growth is not None:
            best = max((c["value"] for c in doc.get("cycles", [])), default=0.0)
            if best < growth["growth_floor"] - 1e-6:
                failures.append("best cycle %.8f below floor %.8f"
                                % (best, growth["growth_floor"]))
    for msg in failures:
        print("VERIFICATION FAILED: %s" % msg, file=sys.stderr)
    if not failures:
        print("all checks passed")
    return EXIT_VERIFICATION if failures else EXIT_OK


def build_parser():
    parser = argparse.ArgumentParser(prog="cjsr", description=__doc__)
    sub = parser.add_subparsers(dest="cmd", required=True)

    p = sub.add_parser("bounds", help="bracket the constrained joint spectral radius")
    p.add_argument("system")
    p.add_argument("--method", default="gripenberg",
                   help="comma list of brute, gripenberg, sos-primal")
    p.add_argument("--eps", type=float, default=1e-3)
    p.add_argument("--depth", type=int, default=20)
    p.add_argument("--k", type=int, default=6)
    p.add_argument("--degree", type=int, default=2, help="2d for sos-primal")
    p.add_argument("--bisect-tol", type=float, default=1e-3)
    p.add_argument("--json", help="write machine-readable report to this path")
    p.set_defaults(func=cmd_bounds)

    p = sub.add_parser("generate", help="generate a high-growth accepted word")
    p.add_argument("system")
    p.add_argument("--algo", choices=["dual", "gripenberg"], default="dual")
    p.add_argument("--degree", type=int, default=2, help="2d for the dual program")
    p.add_argument("--horizon", type=int, default=3)
    p.add_argument("--length", type=int, default=None, help="word length (default 24*horizon)")
    p.add_argument("--seed", type=int, default=1)
    p.add_argument("--gamma-tol", type=float, default=1e-4)
    p.add_argument("--eps", type=float, default=0.01, help="gripenberg pruning slack")
    p.add_argument("-t", "--max-length", type=int, default=12, help="gripenberg depth")
    p.add_argument("--max-cycle-len", type=int, default=12)
    p.add_argument("--with-certificate", action="store_true",
                   help="embed full moment vectors in the JSON report")
    p.add_argument("--json")
    p.set_defaults(func=cmd_generate)

    p = sub.add_parser("bench", help="success rate over seeded repeated runs")
    p.add_argument("system")
    p.add_argument("--target", type=float, required=True)
    p.add_argument("--runs", type=int, default=100)
    p.add_argument("--algo", choices=["dual", "gripenberg"], default="dual")
    p.add_argument("--degree", type=int, default=2)
    p.add_argument("--horizon", type=int, default=3)
    p.add_argument("--length", type=int, default=None)
    p.add_argument("--gamma-tol", type=float, default=1e-4)
    p.add_argument("--eps", type=float, default=0.01)
    p.add_argument("-t", "--max-length", type=int, default=12)
    p.add_argument("--max-cycle-len", type=int, default=12)
    p.add_argument("--json")
    p.set_defaults(func=cmd_bench)

    p = sub.add_parser("verify", help="re-check a word or a serialized report")
    p.add_argument("system")
    p.add_argument("--word", help="comma separated labels")
    p.add_argument("--report", help="path to a JSON report")
    p.add_argument("--json")
    p.set_defaults(func=cmd_verify)
    return parser


def main(argv=None):
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except InputError as exc:
        print("input error: %s" % exc, file=sys.stderr)
        return EXIT_INPUT
    except (NondeterministicDfaError, bounds_mod.EnumerationCapError, ValueError) as exc:
        print("input error: %s" % exc, file=sys.stderr)
        return EXIT_INPUT
    except SolverInconclusive as exc:
        print("solver inconclusive: %s" % exc, file=sys.stderr)
        return EXIT_INCONCLUSIVE


if __name__ == "__main__":
    sys.exit(main())
