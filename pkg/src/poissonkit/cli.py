"""Command-line interface: single computations and the seeded suite runner."""

from __future__ import annotations

import argparse
import sys

import numpy as np

from . import __version__
from .algebra import Weight
from .io import dump_json, element_from_json, load_json, weight_from_json, words_from_json


def _weight(path) -> Weight:
    return weight_from_json(load_json(path))


def _emit(data, args) -> None:
    text = dump_json(data, getattr(args, "out", None), stable=getattr(args, "stable_output", False))
    if not getattr(args, "out", None):
        print(text)


def _complex(z) -> dict:
    z = complex(z)
    return {"re": z.real, "im": z.imag}


def _matrix(G) -> dict:
    G = np.asarray(G, dtype=complex)
    return {"re": G.real.tolist(), "im": G.imag.tolist()}


# --- subcommands ------------------------------------------------------------------------------


def cmd_partitions(args) -> int:
    from .partitions import bell, enumerate_partitions, stirling2

    n = args.count
    out = {"n": n, "bell": bell(n), "stirling2": [stirling2(n, k) for k in range(n + 1)]}
    if args.list:
        out["partitions"] = [[list(b) for b in p.blocks] for p in enumerate_partitions(n)]
    _emit(out, args)
    return 0


def cmd_moments(args) -> int:
    from .moments import bernoulli_moment, growth_bound_check, poisson_moment

    w = _weight(args.weight)
    word = [element_from_json(load_json(p), w.algebra) for p in args.word]
    growth = growth_bound_check(w, word)
    out = {
        "value": _complex(poisson_moment(w, word)),
        "bound": growth.bound,
        "bound_holds": growth.passed,
        "bernoulli": {str(n): _complex(bernoulli_moment(w, word, n_copies=n)) for n in args.bernoulli},
    }
    _emit(out, args)
    return 0


def cmd_gram(args) -> int:
    from .fock import PoissonWord, WordKind, gram_matrix, oracle_gram

    w = _weight(args.weight)
    words = [PoissonWord(WordKind(args.basis), tuple(ws)) for ws in words_from_json(load_json(args.words))]
    G = gram_matrix(words, w)
    out = {"basis": args.basis, "closed_form": _matrix(G)}
    if args.oracle:
        O, M = oracle_gram(w, words, tol=args.tol)
        out.update({"oracle": _matrix(O), "level_cap": M, "max_deviation": float(np.abs(G - O).max())})
    _emit(out, args)
    return 0 if not args.oracle or out["max_deviation"] <= args.tol else 1


def cmd_classify(args) -> int:
    from .modular import arveson_spectrum, classify_type

    w = _weight(args.weight)
    c = classify_type(w)
    out = c.to_json()
    out["spectrum"] = arveson_spectrum(w).tolist()
    _emit(out, args)
    return 0


def cmd_principal_series(args) -> int:
    from .modular import arveson_spectrum, classify_type, principal_series_lambda, principal_series_weight

    w = principal_series_weight(args.t, args.theta)
    c = classify_type(w)
    out = c.to_json()
    out["spectrum"] = arveson_spectrum(w).tolist()
    out["pairs"] = [
        {"t_nu": a, "t_mu": b, "lambda": principal_series_lambda(a, b, args.theta)}
        for i, a in enumerate(args.t)
        for b in args.t[i + 1:]
    ]
    _emit(out, args)
    return 0


def cmd_channels(args) -> int:
    from . import channels as ch
    from .fock import PoissonWord, WordKind, gram_matrix

    T = ch.map_from_json(load_json(args.map))
    w_src = _weight(args.weight_src)
    w_dst = _weight(args.weight_dst) if args.weight_dst else w_src
    words = words_from_json(load_json(args.words)) if args.words else []
    inst = load_json(args.instance) if args.instance else {}
    out: dict = {"suite": args.suite, "flags": T.flags()}
    if args.suite == "preserve":
        wres = ch.check_weight_preserving(T, w_src, w_dst)
        out["weight_residual"] = wres
        passed = wres <= args.tol
        if words and T.is_homomorphism():
            pw = [PoissonWord(WordKind.EMPTY, tuple(x)) for x in words]
            dev = float(np.abs(gram_matrix(pw, w_src) - gram_matrix([ch.lift_on_words(T, p) for p in pw], w_dst)).max())
            out["gram_deviation"] = dev
            passed = passed and dev <= args.tol
    elif args.suite == "corner":
        if "e" not in inst:
            raise ValueError("corner check needs --instance with a projection 'e'")
        e = element_from_json(inst["e"], w_src.algebra)
        residuals = []
        for x in words:
            rep = ch.corner_projection_oracle(e, PoissonWord(WordKind.EMPTY, tuple(x)), w_src)
            residuals.append(rep.residual)
        out["residuals"] = residuals
        passed = all(r <= 1e-8 for r in residuals)
    elif args.suite == "independence":
        missing = {"e", "f", "x", "y"} - set(inst)
        if missing:
            raise ValueError(f"independence check needs --instance with {sorted(missing)}")
        e, f, x, y = (element_from_json(inst[k], w_src.algebra) for k in "efxy")
        rep = ch.independence_check(e, f, x, y, w_src)
        out.update({"commutator": rep.commutator, "factorization": rep.factorization, "moments": rep.moments})
        passed = rep.passed
    else:
        rep = ch.ucp_lift_check(T, w_src, w_dst, words, tol=args.tol)
        out.update(
            {
                "weight_residual": rep.weight_residual,
                "cp_defect": rep.cp_defect,
                "state_residual": rep.state_residual,
                "contraction_defect": rep.contraction_defect,
                "gram_defect": rep.gram_defect,
            }
        )
        passed = rep.passed
    out["passed"] = bool(passed)
    _emit(out, args)
    return 0 if passed else 1


def cmd_entropy(args) -> int:
    from .entropy import entropy_report
    from .experiments import parse_levels

    rep = entropy_report(_weight(args.rho), _weight(args.psi), parse_levels(args.levels))
    _emit(rep.to_json(), args)
    return 0


def cmd_run(args) -> int:
    from .experiments import ExperimentConfig, parse_levels, run_suite

    data = load_json(args.config) if args.config else {}
    overrides = {
        "suite": args.suite,
        "seed": args.seed,
        "out": args.out,
        "csv_dir": args.csv,
        "figures": args.figures,
        "n_instances": args.n,
        "levels": parse_levels(args.levels) if args.levels else None,
    }
    for k, v in overrides.items():
        if v is not None:
            data[k] = v
    if args.stable_output:
        data["stable_output"] = True
    config = ExperimentConfig.from_json(data)
    report = run_suite(config)
    if not config.out:
        print(dump_json(report.to_json(config.stable_output), stable=config.stable_output))
    else:
        status = "PASS" if report.passed else "FAIL"
        print(f"{status} {config.suite}: {len(report.records) - len(report.failures())}/{len(report.records)} checks -> {config.out}")
    return 0 if report.passed else 1


def cmd_generate(args) -> int:
    from .experiments import generate_instance

    data = generate_instance(args.kind, args.seed, args.dims, args.out_dir, args.mass)
    if not args.out_dir:
        print(dump_json(data, stable=True))
    return 0


# --- parser -------------------------------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    from .experiments import INSTANCE_KINDS, SUITES

    p = argparse.ArgumentParser(prog="poissonkit", description=__doc__)
    p.add_argument("--version", action="version", version=f"poissonkit {__version__}")
    sub = p.add_subparsers(dest="command", required=True)

    def out_flags(sp):
        sp.add_argument("--out", help="write JSON here instead of stdout")
        sp.add_argument("--stable-output", action="store_true", help="sorted keys, no timings")

    sp = sub.add_parser("partitions", help="Bell and Stirling numbers, optionally the partitions")
    sp.add_argument("--count", type=int, required=True)
    sp.add_argument("--list", action="store_true")
    out_flags(sp)
    sp.set_defaults(func=cmd_partitions)

    sp = sub.add_parser("moments", help="Poisson moment of a word")
    sp.add_argument("action", choices=["eval"])
    sp.add_argument("--weight", required=True)
    sp.add_argument("--word", nargs="*", default=[], help="element JSON files x_1 ... x_n")
    sp.add_argument("--bernoulli", type=int, nargs="*", default=[64, 128, 256])
    out_flags(sp)
    sp.set_defaults(func=cmd_moments)

    sp = sub.add_parser("gram", help="closed-form Gram matrix, optionally against the GNS oracle")
    sp.add_argument("--basis", choices=["lambda", "empty", "fock"], required=True)
    sp.add_argument("--words", required=True)
    sp.add_argument("--weight", required=True)
    sp.add_argument("--oracle", action="store_true")
    sp.add_argument("--tol", type=float, default=1e-8)
    out_flags(sp)
    sp.set_defaults(func=cmd_gram)

    sp = sub.add_parser("classify", help="type read off the modular spectrum")
    sp.add_argument("--weight", required=True)
    out_flags(sp)
    sp.set_defaults(func=cmd_classify)

    sp = sub.add_parser("principal-series", help="principal-series weight and its type")
    sp.add_argument("--t", type=float, nargs="+", required=True)
    sp.add_argument("--theta", type=float, default=2 * np.pi)
    out_flags(sp)
    sp.set_defaults(func=cmd_principal_series)

    sp = sub.add_parser("channels", help="checks on a linear map and its lift")
    sp.add_argument("action", choices=["check"])
    sp.add_argument("--map", required=True)
    sp.add_argument("--weight-src", required=True)
    sp.add_argument("--weight-dst")
    sp.add_argument("--words")
    sp.add_argument("--instance", help="corner-pair fixture (projections e, f and letters x, y)")
    sp.add_argument("--suite", choices=["preserve", "corner", "independence", "ucp"], default="preserve")
    sp.add_argument("--tol", type=float, default=1e-9)
    out_flags(sp)
    sp.set_defaults(func=cmd_channels)

    sp = sub.add_parser("entropy", help="truncated Poisson relative entropy against the Lindblad entropy")
    sp.add_argument("--rho", required=True)
    sp.add_argument("--psi", required=True)
    sp.add_argument("--levels", default="5:30:5")
    out_flags(sp)
    sp.set_defaults(func=cmd_entropy)

    sp = sub.add_parser("run", help="run a seeded check suite")
    sp.add_argument("--suite", choices=SUITES)
    sp.add_argument("--seed", type=int)
    sp.add_argument("--config")
    sp.add_argument("-n", type=int, help="number of random instances")
    sp.add_argument("--levels")
    sp.add_argument("--csv", metavar="DIR")
    sp.add_argument("--figures", metavar="DIR")
    out_flags(sp)
    sp.set_defaults(func=cmd_run)

    sp = sub.add_parser("generate", help="write deterministic fixtures")
    sp.add_argument("kind", choices=INSTANCE_KINDS)
    sp.add_argument("--seed", type=int, default=0)
    sp.add_argument("--dims", type=int, nargs="+", default=[2])
    sp.add_argument("--mass", type=float, default=1.0)
    sp.add_argument("--out-dir")
    sp.set_defaults(func=cmd_generate)
    return p


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except (ValueError, OSError, KeyError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
