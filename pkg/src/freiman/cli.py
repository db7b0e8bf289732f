"""Command line driver: ``freiman analyze | scan | hitting | extract``.

Exit codes: 0 success, 1 usage error, 2 invalid input, 3 cap exceeded.
A ``--config`` JSON file may supply any flag by its long name (dashes or
underscores); flags given on the command line take precedence.
"""

from __future__ import annotations

import argparse
import json
import logging
import sys
from pathlib import Path

from .connectivity import Verdict, is_additively_connected
from .diagnostics import diagnostics_report
from .experiments import (HITTING_COLUMNS, SCAN_COLUMNS, hitting_summary, run_hitting_time,
                          run_threshold_scan, threshold_p, to_csv)
from .fuzzy import default_theta_args, extraction_report
from .groups import GroupSpec
from .homs import hom_space, is_universally_rigid, relation_rank
from .intlinalg import CapExceeded
from .io import FormatError, read_map, read_set
from .quadruples import SubsetSample, isolated_elements, ordered_count, pair_orbits, sample_binomial

log = logging.getLogger("freiman")

EXIT_OK, EXIT_USAGE, EXIT_INPUT, EXIT_CAP = 0, 1, 2, 3


class UsageError(Exception):
    pass


class InputError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


def _group_args(p):
    p.add_argument("--group", help="cyclic factors, e.g. '101' or '4,9'")
    p.add_argument("--n", type=int, help="shorthand for the cyclic group of order n")


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", help="JSON file with default flag values")
    common.add_argument("-v", "--verbose", action="store_true")
    parser = _Parser(prog="freiman", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)
    kw = {"parents": [common]}

    a = sub.add_parser("analyze", help="quadruples, dimension, connectivity and rigidity of one set", **kw)
    _group_args(a)
    a.add_argument("--set", dest="set_file", help="set file (overrides --group)")
    a.add_argument("--elements", help="comma separated element indices")
    a.add_argument("--p", type=float, help="sample a binomial random set with this p")
    a.add_argument("--C", type=float, help="sample with p = C n^{-2/3} (log n)^{1/3}")
    a.add_argument("--seed", type=int, default=0)
    a.add_argument("--eta", type=float, default=0.2)
    a.add_argument("--wmax", type=int, default=4)
    a.add_argument("--require-verdict", action="store_true",
                   help="exit 3 when the connectivity search is inconclusive")
    a.add_argument("--rigidity-max", type=int, default=150,
                   help="skip the rigidity test above this set size")
    a.add_argument("--exact-rank", action="store_true")
    a.add_argument("--out")
    a.add_argument("--format", choices=["json"], default="json")

    s = sub.add_parser("scan", help="threshold scan over a grid of C (or p) values", **kw)
    _group_args(s)
    s.add_argument("--C", type=float, action="append", default=None)
    s.add_argument("--p", type=float, action="append", default=None, help="explicit p values (override)")
    s.add_argument("--trials", type=int, default=100)
    s.add_argument("--seed", type=int, default=0)
    s.add_argument("--workers", type=int, default=1)
    s.add_argument("--exact-rank", action="store_true")
    s.add_argument("--out")
    s.add_argument("--format", choices=["csv", "json"], default="csv")

    h = sub.add_parser("hitting", help="hitting times of isolation-freeness and dimension 0", **kw)
    _group_args(h)
    h.add_argument("--trials", type=int, default=10)
    h.add_argument("--seed", type=int, default=0)
    h.add_argument("--workers", type=int, default=1)
    h.add_argument("--out")
    h.add_argument("--format", choices=["csv", "json"], default="csv")

    e = sub.add_parser("extract", help="recover an affine map from a Freiman homomorphism", **kw)
    e.add_argument("--set", dest="set_file", required=False)
    e.add_argument("--map", dest="map_file", required=False)
    e.add_argument("--threshold", type=float, default=0.5)
    e.add_argument("--float", dest="force_float", action="store_true", help="never use exact rationals")
    e.add_argument("--theta-sample", type=int, default=256)
    e.add_argument("--seed", type=int, default=0)
    e.add_argument("--out")
    e.add_argument("--format", choices=["json"], default="json")
    return parser


def _load_config(path) -> dict:
    try:
        data = json.loads(Path(path).read_text())
    except (OSError, json.JSONDecodeError) as exc:
        raise InputError(f"cannot read config {path}: {exc}") from None
    if not isinstance(data, dict):
        raise InputError("config must be a JSON object")
    return {k.replace("-", "_"): v for k, v in data.items()}


def parse_args(argv=None) -> argparse.Namespace:
    parser = build_parser()
    args = parser.parse_args(argv)
    if args.config:
        cfg = _load_config(args.config)
        # config values become subcommand defaults, so explicit flags still win
        sub = parser._subparsers._group_actions[0].choices[args.command]
        known = {a.dest for a in sub._actions} - {"help", "config"}
        unknown = sorted(set(cfg) - known)
        if unknown:
            raise UsageError(f"unknown config keys: {unknown}")
        sub.set_defaults(**cfg)
        args = parser.parse_args(argv)
    return args


def _group(args) -> GroupSpec:
    if getattr(args, "group", None) is not None:
        try:
            return GroupSpec.parse(str(args.group))
        except ValueError as exc:
            raise InputError(str(exc)) from None
    if getattr(args, "n", None) is not None:
        if args.n < 1:
            raise InputError("n must be positive")
        return GroupSpec.cyclic(args.n)
    raise UsageError("give --group or --n")


def _emit(text: str, out):
    if out:
        Path(out).write_text(text)
    else:
        sys.stdout.write(text)


def _dump(obj) -> str:
    return json.dumps(obj, indent=2, allow_nan=True) + "\n"


def _analyze_set(args) -> SubsetSample:
    if args.set_file:
        try:
            return read_set(args.set_file)
        except OSError as exc:
            raise InputError(f"cannot read {args.set_file}: {exc.strerror}") from None
    g = _group(args)
    if args.elements is not None:
        toks = [t for t in str(args.elements).replace(" ", "").split(",") if t]
        try:
            elems = sorted(set(int(t) for t in toks))
            return SubsetSample.explicit(g, elems)
        except (ValueError, IndexError) as exc:
            raise InputError(f"bad element list: {exc}") from None
    if args.p is not None or args.C is not None:
        p = args.p if args.p is not None else threshold_p(g.order, args.C)
        return sample_binomial(g, p, args.seed)
    raise UsageError("give --set, --elements, --p or --C")


def run_analyze(args) -> dict:
    A = _analyze_set(args)
    if len(A) == 0:
        raise InputError("empty set")
    orbits = pair_orbits(A)
    space = hom_space(A, exact=args.exact_rank)
    rank = relation_rank(space.relations, exact=args.exact_rank)
    conn = is_additively_connected(A, args.eta, w_max=args.wmax)
    if args.require_verdict and conn.verdict is Verdict.INCONCLUSIVE:
        raise CapExceeded(f"connectivity inconclusive beyond |W| = {args.wmax}")
    rigid = None
    notes = []
    if space.freiman_dim > 0:
        rigid = False
    elif len(A) <= args.rigidity_max:
        rigid = is_universally_rigid(A, space)
    else:
        notes.append(f"rigidity skipped: |A| > {args.rigidity_max}")
    return {
        "group": str(A.group),
        "size": len(A),
        "n_quads": ordered_count(orbits),
        "n_orbits": int(len(orbits)),
        "isolated": isolated_elements(A).tolist(),
        "freiman_dim": space.freiman_dim,
        "rank": {"value": rank.rank, "upper": rank.upper, "certified": rank.certified, "method": rank.method},
        "connectivity": dict(conn.to_json(), eta=args.eta),
        "rigidity": rigid,
        "diagnostics": diagnostics_report(A).to_json(),
        "notes": notes,
    }


def run_scan(args) -> str:
    g = _group(args)
    if not args.C and not args.p:
        raise UsageError("give at least one --C or --p")
    try:
        rows, _ = run_threshold_scan(g, args.C or (), args.p or (), trials=args.trials, seed=args.seed,
                                     exact_rank=args.exact_rank, workers=args.workers)
    except ValueError as exc:
        raise InputError(str(exc)) from None
    if args.format == "json":
        return _dump(rows)
    return to_csv(rows, SCAN_COLUMNS)


def run_hitting(args) -> str:
    g = _group(args)
    try:
        recs = run_hitting_time(g, trials=args.trials, seed=args.seed, workers=args.workers)
    except ValueError as exc:
        raise InputError(str(exc)) from None
    log.info("hitting summary: %s", hitting_summary(recs))
    if args.format == "json":
        return _dump({"records": [{c: getattr(r, c) for c in HITTING_COLUMNS} for r in recs],
                      "summary": hitting_summary(recs)})
    return to_csv(recs, HITTING_COLUMNS)


def run_extract(args) -> dict:
    if not args.set_file or not args.map_file:
        raise UsageError("extract needs --set and --map")
    try:
        A = read_set(args.set_file)
        target, phi = read_map(args.map_file)
    except OSError as exc:
        raise InputError(f"cannot read input: {exc.strerror}") from None
    if len(A) == 0:
        raise InputError("empty set")
    missing = [x for x in A.tolist() if x not in phi]
    if missing:
        raise InputError(f"map is not total on the set; missing {missing[:5]}")
    theta_args = default_theta_args(A.group, args.theta_sample, args.seed)
    rep = extraction_report(A, phi, target, threshold=args.threshold,
                            exact=False if args.force_float else None, theta_args=theta_args)
    out = rep.to_json()
    out["notes"] = [] if rep.input_is_freiman_hom else ["input not a Freiman homomorphism"]
    return out


def main(argv=None) -> int:
    try:
        args = parse_args(argv)
    except SystemExit as exc:  # argparse usage errors and --help
        return exc.code
    except UsageError as exc:
        print(f"freiman: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except InputError as exc:
        print(f"freiman: error: {exc}", file=sys.stderr)
        return EXIT_INPUT
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        if args.command == "analyze":
            _emit(_dump(run_analyze(args)), args.out)
        elif args.command == "scan":
            _emit(run_scan(args), args.out)
        elif args.command == "hitting":
            _emit(run_hitting(args), args.out)
        elif args.command == "extract":
            _emit(_dump(run_extract(args)), args.out)
    except UsageError as exc:
        print(f"freiman: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except (InputError, FormatError) as exc:
        print(f"freiman: error: {exc}", file=sys.stderr)
        return EXIT_INPUT
    except CapExceeded as exc:
        print(f"freiman: cap exceeded: {exc}", file=sys.stderr)
        return EXIT_CAP
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
