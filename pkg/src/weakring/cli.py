"""Command line entry point: ``weakring <subcommand>``.

Exit codes: 0 completed, 1 error, 2 budget exceeded.
"""

from __future__ import annotations

import argparse
import json
import logging
import sys

from .errors import BudgetExceeded, WeakringError
from .poly import IntPolynomial


def parse_poly(text: str) -> IntPolynomial:
    """JSON ``{"coeffs": [...]}`` or terms like ``1024:1,1:-65538,0:65536``."""
    text = text.strip()
    if text.startswith("{"):
        return IntPolynomial.from_json(json.loads(text))
    terms = {}
    for part in text.split(","):
        deg, _, coef = part.partition(":")
        terms[int(deg)] = terms.get(int(deg), 0) + int(coef or 1)
    return IntPolynomial.from_terms(terms)


def _emit(doc) -> None:
    json.dump(doc, sys.stdout, indent=2, sort_keys=True)
    sys.stdout.write("\n")


def cmd_run(args):
    from .runner import load_config, run_experiment, save_report
    cfg = load_config(args.config)
    report = run_experiment(cfg, workers=args.workers)
    if args.out:
        save_report(report, args.out)
    _emit({"success_count": report.success_count, "trials": len(report.trials),
           "tau": report.to_json()["tau"], "out": args.out})


def cmd_gen(args):
    from .runner import generate_samples, load_config
    cfg = load_config(args.config)
    samples, planted, alpha = generate_samples(cfg, args.trial)
    samples.save(args.out)
    _emit({"out": args.out, "count": samples.count, "variant": samples.variant,
           "alpha": str(alpha), "secret_commitment": samples.secret_commitment})


def cmd_attack(args):
    from .attack import (SMALL_SET, attack_ringlwe, attack_small_error, attack_small_set,
                         build_error_set)
    from .sampling import RINGLWE, LweSampleSet
    samples = LweSampleSet.load(args.samples)
    if samples.variant == RINGLWE:
        from .embedding import build_embedding
        emb = build_embedding(samples.f, samples.precision_bits or 300, args.cache_dir)
        out = attack_ringlwe(samples, emb, workers=args.workers)
    elif args.method == SMALL_SET:
        S = build_error_set(args.alpha, samples.gaussian.sigma, samples.n, samples.q)
        out = attack_small_set(samples, S.alpha, S, workers=args.workers)
    else:
        out = attack_small_error(samples, args.alpha, workers=args.workers)
    _emit(out.to_json())


def cmd_vet(args):
    from .vetting import vet_parameters
    rep = vet_parameters(parse_poly(args.f), int(args.q), float(args.w), args.variant,
                         spectral_cap=args.spectral_cap)
    _emit(rep.to_json())


def cmd_findq(args):
    from .vetting import findq_detailed
    res = findq_detailed(parse_poly(args.f), args.m)
    _emit({"q": str(res.q), "d": str(res.d), "lower_bound_only": res.lower_bound_only,
           "shared_factor_degree": res.shared_factor_degree})
    if res.lower_bound_only:
        raise BudgetExceeded("d was only partially factored")


def cmd_search(args):
    from .vetting import search_trinomials
    hits = search_trinomials(args.n, args.alpha, range(args.a_min, args.a_max + 1),
                             range(args.b_min, args.b_max + 1), args.q_min,
                             check_irreducible=not args.no_irreducibility)
    _emit([h.to_json() for h in hits])


def cmd_family(args):
    from .vetting import check_family_conditions
    _emit(check_family_conditions(args.n, int(args.q), float(args.w)).to_json())


def cmd_cyclo(args):
    from .vetting import cyclotomic_immunity_check
    _emit(cyclotomic_immunity_check(args.m, int(args.q)).to_json())


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="weakring", description=__doc__.splitlines()[0])
    p.add_argument("-v", "--verbose", action="store_true", help="progress on stderr")
    sub = p.add_subparsers(dest="cmd", required=True)

    s = sub.add_parser("run", help="run an experiment from a JSON config")
    s.add_argument("--config", required=True)
    s.add_argument("--out")
    s.add_argument("--workers", type=int)
    s.set_defaults(func=cmd_run)

    s = sub.add_parser("gen", help="write the samples of one trial as JSON lines")
    s.add_argument("--config", required=True)
    s.add_argument("--out", required=True)
    s.add_argument("--trial", type=int, default=0)
    s.set_defaults(func=cmd_gen)

    s = sub.add_parser("attack", help="attack a saved sample file")
    s.add_argument("--samples", required=True)
    s.add_argument("--alpha", type=int, default=1)
    s.add_argument("--method", choices=("small_error", "small_set"), default="small_error")
    s.add_argument("--workers", type=int, default=1)
    s.add_argument("--cache-dir")
    s.set_defaults(func=cmd_attack)

    s = sub.add_parser("vet", help="vulnerability report for (f, q, w)")
    s.add_argument("--f", required=True)
    s.add_argument("--q", required=True)
    s.add_argument("--w", required=True)
    s.add_argument("--variant", choices=("polylwe", "ringlwe"), default="polylwe")
    s.add_argument("--spectral-cap", type=int, default=256)
    s.set_defaults(func=cmd_vet)

    s = sub.add_parser("findq", help="largest prime q where f and Phi_m share a root")
    s.add_argument("--f", required=True)
    s.add_argument("--m", type=int, required=True)
    s.set_defaults(func=cmd_findq)

    s = sub.add_parser("search", help="trinomials x^n + a x + b with a large prime at +-1")
    s.add_argument("--n", type=int, required=True)
    s.add_argument("--alpha", type=int, choices=(1, -1), default=1)
    s.add_argument("--a-min", type=int, required=True)
    s.add_argument("--a-max", type=int, required=True)
    s.add_argument("--b-min", type=int, required=True)
    s.add_argument("--b-max", type=int, required=True)
    s.add_argument("--q-min", type=int, default=2)
    s.add_argument("--no-irreducibility", action="store_true")
    s.set_defaults(func=cmd_search)

    s = sub.add_parser("family-check", help="conditions for x^n + q - 1")
    s.add_argument("--n", type=int, required=True)
    s.add_argument("--q", required=True)
    s.add_argument("--w", required=True)
    s.set_defaults(func=cmd_family)

    s = sub.add_parser("cyclo-check", help="orders of the roots of Phi_m mod q")
    s.add_argument("--m", type=int, required=True)
    s.add_argument("--q", required=True)
    s.set_defaults(func=cmd_cyclo)
    return p


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        stream=sys.stderr, format="%(name)s: %(message)s")
    try:
        args.func(args)
    except BudgetExceeded as exc:
        print(f"budget exceeded: {exc}", file=sys.stderr)
        return 2
    except WeakringError as exc:
        print(f"error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return 1
    return 0


if __name__ == "__main__":
    sys.exit(main())
