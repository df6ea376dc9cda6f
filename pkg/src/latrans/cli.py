"""Command-line entry point: ``latrans <command> ...``.

Exit codes: 0 success, 1 invariant failure, 2 usage or parse error.
"""
from __future__ import annotations

import argparse
import json
import math
import os
import sys
from pathlib import Path

from . import bounds, construction, counting, experiment, hypercube, latin
from .errors import ConfigError, LatransError, ParseError
from .io import parse_square_file, serialize_square

EXIT_OK, EXIT_INVARIANT, EXIT_USAGE = 0, 1, 2


def _emit(args, payload: dict, text: str) -> None:
    out = json.dumps(payload, indent=2, sort_keys=True, default=_json_default) if args.format == "json" else text
    if args.out:
        Path(args.out).write_text(out + "\n")
    else:
        print(out)


def _json_default(v):
    if isinstance(v, float):
        return repr(v)
    raise TypeError(type(v))


def _finite(x):
    return x if isinstance(x, (int, float)) and math.isfinite(x) else repr(x)


def _read_square(path: str, strict: bool = True):
    text = sys.stdin.read() if path == "-" else Path(path).read_text()
    return parse_square_file(text, strict=strict)


def cmd_gen(args):
    if args.kind == "cyclic":
        squares = [latin.cyclic_square(args.n)]
    elif args.kind == "random":
        squares = [latin.uniform_random_square(args.n, args.seed, args.moves)]
    else:
        squares = list(latin.mols_pair(args.n, seed=args.seed))
    meta = {"generator": args.kind, "seed": args.seed} if args.kind != "cyclic" else {"generator": "cyclic"}
    fmt = args.format
    texts = [serialize_square(sq, symbol_base=args.base, fmt=fmt, metadata=meta) for sq in squares]
    body = ("\n" if fmt == "json" else "\n\n").join(texts)
    if args.out:
        Path(args.out).write_text(body + "\n")
    else:
        print(body)
    return EXIT_OK


def cmd_validate(args):
    sf = _read_square(args.file, strict=False)
    rep = latin.validate_latin(sf.square)
    payload = {"valid": rep.valid, "order": sf.square.order,
               "violations": [v.__dict__ for v in rep.violations]}
    lines = [f"order {sf.square.order}: {'valid' if rep.valid else 'INVALID'}"]
    lines += [f"  {v.kind} row={v.row} col={v.column} symbol={v.symbol}" for v in rep.violations]
    _emit(args, payload, "\n".join(lines))
    return EXIT_OK if rep.valid else EXIT_INVARIANT


def cmd_count(args):
    sq = _read_square(args.file).square
    res = counting.count_exact(sq, max_order=args.max_order, workers=args.workers)
    payload = {"order": sq.order, "count": res.count, "nodes_visited": res.nodes_visited}
    text = f"order {sq.order}: {res.count} transversals ({res.nodes_visited} nodes)"
    if args.list:
        ts = counting.enumerate_transversals(sq, args.list, max_order=args.max_order)
        payload["transversals"] = [list(t.columns) for t in ts]
        text += "\n" + "\n".join(" ".join(map(str, t.columns)) for t in ts)
    _emit(args, payload, text)
    return EXIT_OK


def cmd_estimate(args):
    sq = _read_square(args.file).square
    est = counting.estimate_sis(sq, args.samples, args.seed, row_order=args.row_order, workers=args.workers)
    payload = {k: _finite(v) for k, v in est.__dict__.items()}
    text = (f"order {sq.order}: log T ~ {est.log_mean:.6f} +/- {est.log_stderr:.6f} "
            f"(mean {est.mean:.6g}, stderr {est.stderr:.3g}, {est.successes}/{est.samples} walks completed)")
    _emit(args, payload, text)
    return EXIT_OK


def _params(args):
    if args.k is None:
        return construction.derive_params(args.b)
    return construction.relaxed_params(args.b, args.k)


def _write_square(args, square, meta):
    fmt = args.format
    text = serialize_square(square, symbol_base=args.base, fmt=fmt, metadata=meta)
    if args.out:
        Path(args.out).write_text(text + "\n")
    else:
        print(text)


def cmd_construct(args):
    params = _params(args)
    bs = construction.build_L(params, args.seed, workers=args.workers)
    st = construction.special_transversals(bs)
    ok = latin.validate_latin(bs.L).valid and st.pairwise_disjoint() and len(st) == params.max_padding
    rows, cols = bs.special_cell_mask.nonzero()
    meta = {"generator": "construct", "seed": args.seed, "b": params.b, "k": params.k,
            "special": [[int(r), int(c)] for r, c in zip(rows, cols)]}
    _write_square(args, bs.L, meta)
    print(f"N={params.N} n={params.n} k={params.k} ell={params.ell}: "
          f"{len(st)} disjoint special transversals, valid={ok}", file=sys.stderr)
    return EXIT_OK if ok else EXIT_INVARIANT


def cmd_pad(args):
    params = _params(args)
    bs = construction.build_L(params, args.seed, workers=args.workers)
    padded = construction.pad_to(bs, args.nprime, args.seed)
    ok = latin.validate_latin(padded.Lprime).valid
    meta = {"generator": "pad", "seed": args.seed, "b": params.b, "k": params.k, "N": params.N, "s": padded.s}
    _write_square(args, padded.Lprime, meta)
    print(f"N'={padded.order} (N={params.N}, s={padded.s}): valid={ok}", file=sys.stderr)
    return EXIT_OK if ok else EXIT_INVARIANT


def cmd_bounds(args):
    bv = bounds.upper_bound_log(args.d, args.n, method=args.method)
    payload = dict(bv.__dict__)
    text = (f"d={bv.d} n={bv.n}: log upper bound {bv.log_upper:.10f}; "
            f"n((d-1)log n - d) = {bv.log_lower_target:.10f}")
    _emit(args, payload, text)
    return EXIT_OK


def cmd_verify_claims(args):
    if args.group:
        n, d = args.group
        h = hypercube.group_hypercube(n, d, args.group_op)
        xs = list(hypercube.iter_hypercube_transversals(h))
    else:
        if not args.file:
            raise ParseError("give a square file or --group N D")
        sq = _read_square(args.file).square
        h = hypercube.from_square(sq)
        if args.transversals == "all":
            ts = counting.enumerate_transversals(sq, max_order=args.max_order)
        else:
            ts = []
            for j in range(int(args.transversals)):
                t = counting.sample_transversal(sq, latin._mix(args.seed, j))
                if t is not None:
                    ts.append(t)
        xs = [hypercube.transversal_from_square(sq, t) for t in ts]
    checked = failures = 0
    worst_u = 0
    for x in xs:
        for i in range(h.order):
            rep = bounds.verify_claim2(h, x, i)
            checked += 1
            worst_u = max(worst_u, rep.U_size)
            failures += not (rep.claim1_ok and rep.claim2_ok)
    bound = h.dim**2 * h.order ** (h.dim - 2)
    payload = {"order": h.order, "dim": h.dim, "transversals": len(xs), "checked": checked,
               "failures": failures, "max_U": worst_u, "claim1_bound": bound}
    text = (f"n={h.order} d={h.dim}: {len(xs)} transversals, {checked} hyperplane checks, "
            f"{failures} failures (max |U| = {worst_u} <= {bound})")
    _emit(args, payload, text)
    return EXIT_OK if failures == 0 else EXIT_INVARIANT


def cmd_experiment(args):
    cfg = experiment.load_config(args.config)
    report = experiment.run_experiment(cfg, workers=args.workers)
    out_dir = args.out or os.environ.get("LATRANS_OUT_DIR", ".")
    csv_path, json_path = report.write(out_dir, args.stem)
    bad = sum(not r["invariants_ok"] for r in report.rows)
    print(f"{len(report.rows)} rows -> {csv_path}, {json_path}; {bad} invariant failures")
    return EXIT_OK if report.ok else EXIT_INVARIANT


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--seed", type=int, default=0)
    common.add_argument("--format", choices=("txt", "json"), default="txt")
    common.add_argument("--out", default=None, help="output file (or directory for experiment)")

    p = argparse.ArgumentParser(prog="latrans", description="Latin square transversal toolkit")
    sub = p.add_subparsers(dest="command", required=True)

    g = sub.add_parser("gen", parents=[common], help="generate a square")
    g.add_argument("kind", choices=("cyclic", "random", "mols"))
    g.add_argument("-n", type=int, required=True)
    g.add_argument("--base", type=int, choices=(0, 1), default=0)
    g.add_argument("--moves", type=int, default=None, help="chain length for random squares")
    g.set_defaults(func=cmd_gen)

    v = sub.add_parser("validate", parents=[common], help="check the Latin property")
    v.add_argument("file")
    v.set_defaults(func=cmd_validate)

    c = sub.add_parser("count", parents=[common], help="exact transversal count")
    c.add_argument("file")
    c.add_argument("--max-order", type=int, default=None)
    c.add_argument("--workers", type=int, default=1)
    c.add_argument("--list", type=int, default=0, metavar="LIMIT", help="also list the first LIMIT transversals")
    c.set_defaults(func=cmd_count)

    e = sub.add_parser("estimate", parents=[common], help="SIS estimate of the transversal count")
    e.add_argument("file")
    e.add_argument("--samples", type=int, default=10_000)
    e.add_argument("--row-order", choices=("fixed", "mrv"), default="fixed")
    e.add_argument("--workers", type=int, default=1)
    e.set_defaults(func=cmd_estimate)

    for name, func, helptext in (("construct", cmd_construct, "build the block square L"),
                                 ("pad", cmd_pad, "build L and pad it to order N'")):
        q = sub.add_parser(name, parents=[common], help=helptext)
        q.add_argument("--b", type=int, required=True)
        q.add_argument("--k", type=int, default=None, help="override k (relaxed desk-scale mode)")
        q.add_argument("--base", type=int, choices=(0, 1), default=0)
        q.add_argument("--workers", type=int, default=1)
        if name == "pad":
            q.add_argument("--nprime", type=int, required=True)
        q.set_defaults(func=func)

    b = sub.add_parser("bounds", parents=[common], help="entropy upper bound on log T(d, n)")
    b.add_argument("-d", type=int, default=2)
    b.add_argument("-n", type=int, required=True)
    b.add_argument("--method", choices=("auto", "closed", "quad"), default="auto")
    b.set_defaults(func=cmd_bounds)

    vc = sub.add_parser("verify-claims", parents=[common], help="check the U-size and rule-out claims")
    vc.add_argument("file", nargs="?")
    vc.add_argument("--transversals", default="all", help="'all' or a number of sampled transversals")
    vc.add_argument("--max-order", type=int, default=None)
    vc.add_argument("--group", type=int, nargs=2, metavar=("N", "D"), help="use the group hypercube instead")
    vc.add_argument("--group-op", choices=("cyclic", "xor"), default="cyclic")
    vc.set_defaults(func=cmd_verify_claims)

    x = sub.add_parser("experiment", parents=[common], help="run a JSON experiment config")
    x.add_argument("config")
    x.add_argument("--workers", type=int, default=1)
    x.add_argument("--stem", default="report")
    x.set_defaults(func=cmd_experiment)
    return p


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except (ParseError, ConfigError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except LatransError as exc:
        print(f"error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
