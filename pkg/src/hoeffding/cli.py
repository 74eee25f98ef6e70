"""Command-line driver.

Subcommands: verify (exhaustive criterion sweep), oracle (brute-force
weak-independence check), decompose (Hoeffding decomposition of a
statistic file), identity (exact combinatorial identity grids),
simulate (seeded urn runs with optional exact cross-check), law-check
(law consistency sweep).  Exit codes: 0 the checked property holds,
1 it fails with a witness in the report, 2 usage or input error.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
from fractions import Fraction
from typing import Optional

from . import characterization, decomp, laws, urnsim
from .exactnum import format_rational, parse_rational

__all__ = ["main"]


def _parse_bool(text: str) -> bool:
    lowered = text.strip().lower()
    if lowered in ("true", "1", "yes"):
        return True
    if lowered in ("false", "0", "no"):
        return False
    raise argparse.ArgumentTypeError(f"expected true or false, got {text!r}")


def _load_law(spec: str) -> laws.ExchangeableLaw:
    # a spec is either the inline grammar or a path to a JSON law file
    if ":" not in spec and os.path.exists(spec):
        return laws.load_law_file(spec)
    return laws.parse_law(spec)


def _emit(obj: dict, out: Optional[str]) -> None:
    text = json.dumps(obj, indent=2) + "\n"
    if out:
        with open(out, "w", encoding="utf-8") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


def _jobs(args: argparse.Namespace) -> int:
    if getattr(args, "jobs", None):
        if args.jobs < 1:
            raise ValueError("--jobs must be >= 1")
        return args.jobs
    return characterization.default_jobs()


def _cmd_verify(args: argparse.Namespace) -> int:
    law = _load_law(args.law)
    if law.K == 2:
        print(
            "error: the criterion sweep needs K >= 3; "
            "use the `oracle` subcommand for two-color laws",
            file=sys.stderr,
        )
        return 2
    report = characterization.verify_hd(law, args.n_max, jobs=_jobs(args))
    _emit(report.to_jsonable(zeros_only=args.zeros_only), args.out)
    return 0 if report.all_zero else 1


def _witness_jsonable(n: int, witness: decomp.OracleWitness) -> dict:
    return {
        "n": n,
        "kernel_index": witness.kernel_index,
        "u": witness.u,
        "z": list(witness.z),
        "value": format_rational(witness.value),
        "kernel": decomp.table_to_jsonable(witness.kernel),
    }


def _cmd_oracle(args: argparse.Namespace) -> int:
    law = _load_law(args.law)
    if args.n_max < 2:
        raise ValueError("--n-max must be >= 2")
    results = []
    first_witness = None
    for n in range(2, args.n_max + 1):
        res = decomp.weak_independence_oracle(law, n)
        entry = {
            "n": n,
            "weakly_independent": res.weakly_independent,
            "basis_size": res.basis_size,
            "witness": None,
        }
        if res.witness is not None:
            entry["witness"] = _witness_jsonable(n, res.witness)
            if first_witness is None:
                first_witness = entry["witness"]
        results.append(entry)
    verdict = first_witness is None
    _emit(
        {
            "schema_version": 1,
            "law": laws.format_law(law),
            "n_max": args.n_max,
            "weakly_independent": verdict,
            "results": results,
            "witness": first_witness,
        },
        args.out,
    )
    return 0 if verdict else 1


def _cmd_decompose(args: argparse.Namespace) -> int:
    law = _load_law(args.law)
    statistic = decomp.load_statistic_file(args.statistic)
    n = statistic.order
    if args.n is not None and args.n != n:
        print(
            f"error: --n {args.n} does not match the statistic's order {n}",
            file=sys.stderr,
        )
        return 2
    if statistic.colors != law.K:
        raise ValueError(
            f"statistic has K={statistic.colors} but the law has K={law.K}"
        )
    consistency = laws.check_consistency(law, n)
    if not consistency.passed:
        print(
            f"error: law failed consistency: {consistency.failure}", file=sys.stderr
        )
        return 2
    parts = decomp.decompose(law, n, statistic)
    recon = parts[0]
    for part in parts[1:]:
        recon = recon + part
    if recon != statistic:
        raise AssertionError("reconstruction is not exact")
    components = []
    for k, part in enumerate(parts):
        kernel = decomp.kernel_for(law, n, part, k)
        if k >= 1:
            check = decomp.is_completely_degenerate(law, kernel)
            degenerate: Optional[bool] = check.degenerate
            witness = None
            if check.witness is not None:
                h, residual = check.witness
                witness = {"h": list(h), "residual": format_rational(residual)}
        else:
            degenerate = None
            witness = None
        components.append(
            {
                "k": k,
                "values": decomp.table_to_jsonable(part)["values"],
                "kernel": decomp.table_to_jsonable(kernel),
                "completely_degenerate": degenerate,
                "degeneracy_witness": witness,
            }
        )
    _emit(
        {
            "schema_version": 1,
            "law": laws.format_law(law),
            "n": n,
            "reconstruction": "exact",
            "components": components,
        },
        args.out,
    )
    return 0


def _cmd_identity(args: argparse.Namespace) -> int:
    result = characterization.check_identity(
        args.name,
        pi=args.pi,
        nu=args.nu,
        n_max=args.n_max,
        u_max=args.u_max,
        k_max=args.k_max,
        a_max=args.a_max,
    )
    _emit(result.to_jsonable(), args.out)
    return 0 if result.holds else 1


def _parse_int_vector(text: str) -> tuple[int, ...]:
    try:
        return tuple(int(x.strip()) for x in text.split(",") if x.strip())
    except ValueError as exc:
        raise ValueError(f"expected comma-separated integers, got {text!r}") from exc


def _parse_rational_vector(text: str) -> tuple[Fraction, ...]:
    return tuple(parse_rational(x.strip()) for x in text.split(",") if x.strip())


def _build_urn(args: argparse.Namespace) -> tuple[urnsim.UrnState, urnsim.UrnFunction]:
    if args.urn == "polya":
        if not args.initial:
            raise ValueError("--urn polya needs --initial counts")
        return urnsim.UrnState(_parse_int_vector(args.initial)), urnsim.IdentityUrn()
    if args.urn == "constant":
        if not args.p:
            raise ValueError("--urn constant needs --p probabilities")
        p = _parse_rational_vector(args.p)
        if args.initial:
            state = urnsim.UrnState(_parse_int_vector(args.initial))
        else:
            state = urnsim.UrnState((1,) * len(p))
        return state, urnsim.ConstantUrn(p)
    if args.urn == "hls":
        if not args.alpha:
            raise ValueError("--urn hls needs --alpha ratios")
        alpha = _parse_rational_vector(args.alpha)
        fn = urnsim.HLSUrn(alpha)
        colors = len(alpha) + 2
        if args.initial:
            state = urnsim.UrnState(_parse_int_vector(args.initial))
        else:
            if args.pi is None or args.nu is None:
                raise ValueError("--urn hls needs --pi and --nu (or --initial)")
            pi, nu = int(args.pi), int(args.nu)
            if pi < 1 or nu < 1:
                raise ValueError("urn construction needs integer pi, nu >= 1")
            if args.nu_split:
                split = _parse_int_vector(args.nu_split)
                if len(split) != colors - 1 or sum(split) != nu:
                    raise ValueError(
                        f"--nu-split needs {colors - 1} counts summing to {nu}"
                    )
            else:
                split = (nu,) + (0,) * (colors - 2)
            state = urnsim.UrnState((pi, *split))
        if len(state.counts) != colors:
            raise ValueError(
                f"--initial has {len(state.counts)} colors, alpha implies {colors}"
            )
        return state, fn
    raise ValueError(f"unknown urn family {args.urn!r}")


def _compare_law(args: argparse.Namespace, state: urnsim.UrnState) -> laws.ExchangeableLaw:
    if args.urn == "polya":
        return laws.Polya(tuple(Fraction(c) for c in state.counts))
    if args.urn == "constant":
        return laws.IID(_parse_rational_vector(args.p))
    alpha = _parse_rational_vector(args.alpha)
    if args.pi is not None and args.nu is not None:
        pi, nu = parse_rational(args.pi), parse_rational(args.nu)
    else:
        pi, nu = Fraction(state.counts[0]), Fraction(sum(state.counts[1:]))
    return laws.HLS(len(alpha) + 2, pi, nu, alpha)


def _cmd_simulate(args: argparse.Namespace) -> int:
    if (args.steps is None) == (args.samples is None):
        print("error: pass exactly one of --steps or --samples", file=sys.stderr)
        return 2
    state, fn = _build_urn(args)

    if args.steps is not None:
        seq = urnsim.simulate(state, fn, args.steps, args.seed)
        text = "\n".join(str(j) for j in seq)
        if text:
            text += "\n"
        if args.out:
            with open(args.out, "w", encoding="utf-8") as fh:
                fh.write(text)
        else:
            sys.stdout.write(text)
        return 0

    if args.n is None:
        raise ValueError("--samples needs --n (prefix length)")
    report: dict = {
        "schema_version": 1,
        "urn": args.urn,
        "initial": list(state.counts),
        "n": args.n,
        "samples": args.samples,
        "seed": args.seed,
        "estimates": [],
    }
    if args.samples == 0:
        _emit(report, args.out)
        return 0
    cells = urnsim.empirical_cylinder(state, fn, args.n, args.samples, args.seed)
    law = _compare_law(args, state) if args.compare_exact else None
    all_within = True
    for comp in decomp.composition_list(args.n, len(state.counts)):
        cell = cells[comp]
        entry = {
            "composition": list(comp),
            "count": cell.count,
            "estimate": format_rational(cell.estimate),
            "stderr": cell.stderr,
        }
        if law is not None:
            exact = laws.class_prob(law, comp)
            ok = urnsim.within_four_sigma(cell.count, args.samples, exact)
            entry["exact"] = format_rational(exact)
            entry["within_four_sigma"] = ok
            all_within = all_within and ok
        report["estimates"].append(entry)
    if law is not None:
        report["law"] = laws.format_law(law)
        report["all_within_four_sigma"] = all_within
    _emit(report, args.out)
    if law is not None and not all_within:
        return 1
    return 0


def _cmd_law_check(args: argparse.Namespace) -> int:
    law = _load_law(args.law)
    if args.n_max < 1:
        raise ValueError("--n-max must be >= 1")
    report = laws.check_consistency(law, args.n_max)
    _emit(report.to_jsonable(), args.out)
    return 0 if report.passed else 1


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="hoeffding",
        description="Exact verification of Hoeffding decomposability "
        "for exchangeable laws over finite alphabets.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    verify = sub.add_parser(
        "verify", help="exhaustive criterion sweep (exit 0 iff all values are 0)"
    )
    verify.add_argument("--law", required=True, help="law spec string or JSON file")
    verify.add_argument("--n-max", type=int, required=True)
    verify.add_argument("--out", help="write the JSON report here (default stdout)")
    verify.add_argument("--jobs", type=int, help="parallel workers (default: all cores)")
    verify.add_argument(
        "--zeros-only",
        type=_parse_bool,
        default=True,
        help="include zero-valued entries in the report; "
        "false keeps only nonzero entries (default true)",
    )
    verify.set_defaults(func=_cmd_verify)

    oracle = sub.add_parser(
        "oracle", help="brute-force weak-independence check for n in [2, n-max]"
    )
    oracle.add_argument("--law", required=True)
    oracle.add_argument("--n-max", type=int, required=True)
    oracle.add_argument("--out")
    oracle.set_defaults(func=_cmd_oracle)

    dec = sub.add_parser(
        "decompose", help="Hoeffding decomposition of a statistic JSON file"
    )
    dec.add_argument("--law", required=True)
    dec.add_argument("--statistic", required=True, help="statistic JSON file")
    dec.add_argument("--n", type=int, help="expected order (cross-checked)")
    dec.add_argument("--out")
    dec.set_defaults(func=_cmd_decompose)

    ident = sub.add_parser("identity", help="exact combinatorial identity grids")
    ident.add_argument(
        "name",
        choices=["sommedentro", "star-vandermonde", "pascal-star", "quandebello"],
    )
    ident.add_argument("--pi", help="single pi (sommedentro; default: rational grid)")
    ident.add_argument("--nu", help="single nu (sommedentro; default: rational grid)")
    ident.add_argument("--n-max", type=int)
    ident.add_argument("--u-max", type=int)
    ident.add_argument("--k-max", type=int)
    ident.add_argument("--a-max", type=int)
    ident.add_argument("--out")
    ident.set_defaults(func=_cmd_identity)

    sim = sub.add_parser("simulate", help="seeded urn simulation")
    sim.add_argument("--urn", required=True, choices=["polya", "constant", "hls"])
    sim.add_argument("--initial", help="comma-separated initial counts")
    sim.add_argument("--p", help="constant urn probabilities (comma-separated)")
    sim.add_argument("--pi", help="hls: first-color weight (integer for urn counts)")
    sim.add_argument("--nu", help="hls: remaining weight (integer for urn counts)")
    sim.add_argument("--alpha", help="hls ratios (comma-separated rationals)")
    sim.add_argument(
        "--nu-split",
        help="hls: how --nu splits over the other colors (default: all on color 2)",
    )
    sim.add_argument("--steps", type=int, help="stream one trajectory of this length")
    sim.add_argument("--n", type=int, help="prefix length for --samples mode")
    sim.add_argument("--samples", type=int, help="number of independent prefixes")
    sim.add_argument("--seed", type=int, default=0)
    sim.add_argument(
        "--compare-exact",
        action="store_true",
        help="cross-check estimates against the matching exact law (exit 1 on a miss)",
    )
    sim.add_argument("--out")
    sim.set_defaults(func=_cmd_simulate)

    check = sub.add_parser("law-check", help="positivity/consistency sweep of a law")
    check.add_argument("--law", required=True)
    check.add_argument("--n-max", type=int, required=True)
    check.add_argument("--out")
    check.set_defaults(func=_cmd_law_check)

    return parser


def main(argv: Optional[list[str]] = None) -> int:
    args = _build_parser().parse_args(argv)
    try:
        return args.func(args)
    except ValueError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
