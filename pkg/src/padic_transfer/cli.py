"""Command line entry point: single computations and seeded verification campaigns."""

from __future__ import annotations

import argparse
import csv
import hashlib
import io
import json
import os
import sys
import time
from concurrent.futures import ProcessPoolExecutor

from . import matrix as mx
from .padic import PadicScalar


# encoding ------------------------------------------------------------------------


def _scalar(obj, p):
    return PadicScalar.from_json(obj, p)


def _vector(obj, p):
    return tuple(_scalar(x, p) for x in obj)


def _matrix(obj, p):
    return tuple(_vector(r, p) for r in obj)


def _enc(x):
    """Exact JSON form of scalars, vectors and matrices."""
    if isinstance(x, PadicScalar):
        if x.nb == 0:
            return str(x.a0)
        return [str(x.a0), str(x.a1)]
    if isinstance(x, (list, tuple)):
        return [_enc(y) for y in x]
    return x


def _triple(obj, p):
    from .orbits import SymTriple

    return SymTriple(_matrix(obj["gamma"], p), _vector(obj["u1"], p), _vector(obj["u2"], p))


def _pair(obj, p):
    from .lattices import HermitianSpace
    from .orbits import UnitaryPair

    return UnitaryPair(HermitianSpace(_matrix(obj["gram"], p)), _matrix(obj["g"], p),
                       _vector(obj["u"], p))


def _testfn(obj, side, t):
    from .orbital import NAMED, descriptor_from_json, f_std, f_unitary

    if obj is None:
        return f_std(t) if side == "S" else f_unitary(t)
    if isinstance(obj, str):
        if obj not in NAMED:
            raise ValueError(f"unknown test function {obj!r}; known: {sorted(NAMED)}")
        return NAMED[obj](t)
    return descriptor_from_json(obj)


def _read_input(path):
    if path is None:
        raise SystemExit("this subcommand needs an input JSON file (or '-' for stdin)")
    if path == "-":
        return json.load(sys.stdin)
    if path.lstrip().startswith("{"):
        return json.loads(path)
    with open(path) as fh:
        return json.load(fh)


def sub_seed(seed, label, index):
    """Per-case seed derived from the campaign seed; recorded in every row."""
    h = hashlib.blake2b(f"{seed}/{label}/{index}".encode(), digest_size=8)
    return int.from_bytes(h.digest(), "big")


# reports ---------------------------------------------------------------------------


class Report:
    """Rows plus a config header; residual 0 on every row means success."""

    def __init__(self, command, config, rows=()):
        self.command = command
        self.config = dict(config)
        self.rows = list(rows)

    @property
    def failures(self):
        return [r["case"] for r in self.rows if not r.get("pass", False)]

    @property
    def ok(self):
        return not self.failures

    def as_dict(self):
        return {"command": self.command, "config": self.config,
                "summary": {"cases": len(self.rows), "passed": len(self.rows) - len(self.failures),
                            "failed": len(self.failures), "failed_cases": self.failures},
                "rows": self.rows}

    def render(self, fmt):
        if fmt == "json":
            return json.dumps(self.as_dict(), indent=2, sort_keys=True) + "\n"
        out = io.StringIO()
        for k in sorted(self.config):
            out.write(f"# {k}={self.config[k]}\n")
        out.write(f"# failed_cases={' '.join(map(str, self.failures))}\n")
        cols = sorted({k for r in self.rows for k in r} - {"case"})
        w = csv.writer(out, lineterminator="\n")
        w.writerow(["case"] + cols)
        for r in self.rows:
            w.writerow([r["case"]] + [_cell(r.get(c)) for c in cols])
        return out.getvalue()


def _cell(v):
    if isinstance(v, (dict, list)):
        return json.dumps(v, sort_keys=True)
    return "" if v is None else v


def emit(report: Report, fmt, path):
    text = report.render(fmt)
    if path:
        with open(path, "w") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


def _run_cases(fn, args_list, jobs):
    """Run fn over the cases; rows come back in case order whatever the completion order."""
    if jobs <= 1:
        return [fn(*a) for a in args_list]
    with ProcessPoolExecutor(max_workers=jobs) as ex:
        return list(ex.map(fn, *zip(*args_list))) if args_list else []


def _guard(fn, case, seed, *args):
    row = {"case": case, "seed": seed}
    try:
        row.update(fn(seed, *args))
    except Exception as exc:  # reported, never swallowed silently
        row.update({"pass": False, "error": f"{type(exc).__name__}: {exc}"})
    return row


# single computations ---------------------------------------------------------------


def cmd_orb(args, derivative=False):
    from .orbital import orb_symmetric, orb_unitary

    data = _read_input(args.input)
    p = data.get("p", args.p)
    side = data.get("side", "S")
    t = int(data.get("params", {}).get("t", 0))
    f = _testfn(data.get("testfn"), side, t)
    if side == "S":
        res = orb_symmetric(_triple(data["element"], p), f, args.budget).to_json()
        if derivative:
            res = {"dvalue0_logq": res["dvalue0_logq"], "omega": res["omega"],
                   "coeffs": res["coeffs"], "value0": res["value0"]}
    else:
        res = {"value0": orb_unitary(_pair(data["element"], p), f, args.budget)}
        if derivative:
            res["dvalue0_logq"] = "0"
    return res


def cmd_match(args):
    from .orbits import invariants, matches, matching_space

    data = _read_input(args.input)
    p = data.get("p", args.p)
    out = {}
    a = _triple(data["triple"], p) if "triple" in data else None
    b = _pair(data["pair"], p) if "pair" in data else None
    if a is not None:
        out["triple"] = {"invariants": invariants(a).to_json(), "is_rs": a.is_rs(),
                         "matching_space": matching_space(a)}
    if b is not None:
        out["pair"] = {"invariants": invariants(b).to_json(), "is_rs": b.is_rs(),
                       "split": b.space.split}
    if a is not None and b is not None:
        out["matches"] = matches(a, b)
    return out


def cmd_cayley(args):
    from .cayley import (BlockDecomposition, cayley_symmetric, cayley_unitary, find_twist,
                         symmetric_bridge_residuals, unitary_bridge_residuals)
    from .lattices import HermitianSpace

    data = _read_input(args.input)
    p = data.get("p", args.p)
    gp = _matrix(data["element"], p)
    side = data.get("side", "S")
    if side == "S":
        dec = BlockDecomposition.standard(len(gp), p, _scalar(data.get("ee", 1), p))
        xi = find_twist(dec.blocks(gp)[3])
        g2 = mx.scale(xi, gp)
        image = cayley_symmetric(g2, dec, integral=data.get("integral", True))
        res = symmetric_bridge_residuals(g2, dec, image)
        out = {"xi": _enc(xi), "gamma": _enc(image.gamma), "u1": _enc(image.u1),
               "u2": _enc(image.u2)}
    else:
        dec = BlockDecomposition.from_space(HermitianSpace(_matrix(data["gram"], p)))
        xi = find_twist(dec.blocks(gp)[3])
        g, u1 = cayley_unitary(mx.scale(xi, gp), dec)
        res = unitary_bridge_residuals(g, u1, dec)
        out = {"xi": _enc(xi), "g": _enc(g), "u1": _enc(u1)}
    out["residuals"] = _enc(list(res))
    out["pass"] = all(r.is_zero() for r in res)
    return out


def _lattice(obj, space, p):
    from .lattices import HermitianLattice

    return HermitianLattice(space, [_vector(c, p) for c in obj])


def cmd_tree(args):
    from .geometry import BTVertex, drinfeld_plane

    data = _read_input(args.input)
    p = data.get("p", args.p)
    plane = drinfeld_plane(p)
    query = data["query"]
    if query == "central-lattice":
        u = _vector(data["u"], p)
        v = plane.central_lattice(u)
        return {"m": plane.norm_val(u), "lattice": _enc(v.lattice.cols), "type": v.type}
    if query == "distance":
        a = BTVertex(_lattice(data["a"], plane.space, p))
        b = BTVertex(_lattice(data["b"], plane.space, p))
        return {"distance": plane.distance(a, b)}
    if query in ("multiplicity", "pairing"):
        u = _vector(data["u"], p)
        v = BTVertex(_lattice(data["lattice"], plane.space, p))
        kind = data.get("kind", "Z")
        if query == "pairing":
            return {"kind": kind, "pairing": plane.pairing_with_line(kind, u, v)}
        m = plane.z_multiplicity(u, v) if kind == "Z" else plane.y_multiplicity(u, v)
        return {"kind": kind, "multiplicity": m, "type": v.type}
    if query == "dot":
        u = _vector(data["u"], p)
        return {"dot": plane.to_dot(plane.central_lattice(u), int(data.get("r", 2)))}
    raise SystemExit(f"unknown tree query {query!r}")


def cmd_fourier_check(args):
    from .geometry import BTVertex, drinfeld_plane
    from .lattices import HermitianSpace
    from .weil import dual_relation_check, local_modularity_check

    data = _read_input(args.input)
    p = data.get("p", args.p)
    out = {}
    if "lattice" in data:
        space = HermitianSpace(_matrix(data["gram"], p))
        L = _lattice(data["lattice"], space, p)
        out["dual_relation"] = dual_relation_check(L, int(data.get("samples", 100)), args.seed)
    if "lines" in data:
        plane = drinfeld_plane(p)
        C = [(c, BTVertex(_lattice(cols, plane.space, p))) for c, cols in data["lines"]]
        out["local_modularity"] = local_modularity_check(plane, C)
    out["pass"] = all(v["pass"] for v in out.values())
    return out


# campaigns ---------------------------------------------------------------------------


def _transfer_case(seed, n, t, p, budget, nearby, group, max_box):
    import random

    from .orbital import f_std, f_unitary, orb_group_symmetric, orb_group_unitary
    from .orbital import orb_symmetric, orb_unitary
    from .orbits import random_group_element, random_matching_pair

    if group:
        from .cayley import BlockDecomposition, matching_group_unitary
        from .orbits import group_triple

        rng = random.Random(seed)
        gp = random_group_element(n, p, rng, max_box=max_box)
        s = orb_group_symmetric(gp, t, budget)
        space, gu = matching_group_unitary(gp, BlockDecomposition.standard(n, p, p if t == n else 1))
        u = orb_group_unitary(gu, space, t, budget)
        matching = space.split == (t % 2 == 0)
        residual = (u - s.value0) if matching else s.value0
        return {"n": n, "t": t, "matching": matching, "orb_S": s.to_json(), "orb_U": u,
                "hankel_val": int(mx.det(group_triple(gp).hankel()).val),
                "residual": residual, "pass": residual == 0}
    a, b = random_matching_pair(n, t, seed, p, nearby=nearby, max_box=max_box)
    s = orb_symmetric(a, f_std(t), budget)
    if nearby:
        return {"n": n, "t": t, "matching": False, "orb_S": s.to_json(), "orb_U": None,
                "residual": s.value0, "pass": s.value0 == 0}
    u = orb_unitary(b, f_unitary(t), budget)
    return {"n": n, "t": t, "matching": True, "orb_S": s.to_json(), "orb_U": u,
            "residual": u - s.value0, "pass": u == s.value0}


def _transfer_row(case, seed, *rest):
    return _guard(_transfer_case, case, seed, *rest)


def cmd_transfer_check(args):
    cfg = _config(args, n=args.n, t=args.t, samples=args.samples, nearby=args.nearby,
                  group=args.group, max_box=args.max_box)
    if (args.t > args.n) or args.t < 0:
        raise SystemExit("need 0 <= t <= n")
    jobs = [(i, sub_seed(args.seed, "transfer", i), args.n, args.t, args.p, args.budget,
             args.nearby, args.group, args.max_box) for i in range(args.samples)]
    return Report("transfer-check", cfg, _run_cases(_transfer_row, jobs, args.jobs))


def _rank1_case(seed, p, t0, v):
    from .geometry import z_length_rank1
    from .orbital import f_std, orb_symmetric
    from .orbits import SymTriple

    one = PadicScalar(p, 1)
    a = SymTriple(((one,),), (PadicScalar.uniformizer(p, v),), (one,))
    o = orb_symmetric(a, f_std(t0))
    if (v - t0) % 2 == 0:
        want = 1 if v >= t0 else 0
        return {"t0": t0, "v": v, "regime": "matching", "value0": o.value0, "expected": want,
                "residual": o.value0 - want, "pass": o.value0 == want}
    z = z_length_rank1(t0, v)
    got = o.derivative0.r
    return {"t0": t0, "v": v, "regime": "nearby", "value0": o.value0, "dorb_logq": str(got),
            "expected_logq": str(-z), "residual": str(got + z),
            "pass": o.value0 == 0 and got == -z}


def _maxorder_case(seed, n, t, p):
    import random

    from .geometry import int_y_maxorder, int_z_maxorder, random_maxorder_sample
    from .orbital import f_std, f_std_prime, orb_symmetric

    a, _, dec = random_maxorder_sample(n, t, p, random.Random(seed))
    o = orb_symmetric(a, f_std(t))
    o2 = orb_symmetric(a, f_std_prime(t))
    z, y = int_z_maxorder(dec, t), int_y_maxorder(dec, t)
    r1 = o.derivative0.r + z
    r2 = o2.derivative0.r + (-1) ** t * y
    return {"n": n, "t": t, "blocks": [[b.v, b.split] for b in dec.blocks],
            "dorb_logq": str(o.derivative0.r), "int_z": z,
            "dorb_prime_logq": str(o2.derivative0.r), "int_y": y,
            "value0": [o.value0, o2.value0], "residual": [str(r1), str(r2)],
            "pass": r1 == 0 and r2 == 0 and o.value0 == 0 and o2.value0 == 0}


def _rank1_row(case, seed, *rest):
    return _guard(_rank1_case, case, seed, *rest)


def _maxorder_row(case, seed, *rest):
    return _guard(_maxorder_case, case, seed, *rest)


def cmd_atc_check(args):
    regime = args.regime
    cfg = _config(args, regime=regime, n=args.n, samples=args.samples, m_max=args.m_max,
                  vmin=args.vmin, vmax=args.vmax)
    if regime == "rank1":
        jobs = [(i, None, args.p, t0, v) for i, (t0, v) in
                enumerate((t0, v) for t0 in (0, 1) for v in range(args.vmin, args.vmax + 1))]
        return Report("atc-check", cfg, _run_cases(_rank1_row, jobs, args.jobs))
    if regime == "maxorder":
        combos = [(t, k) for t in range(args.n + 1) for k in range(args.samples)]
        jobs = [(i, sub_seed(args.seed, f"maxorder/{t}", k), args.n, t, args.p)
                for i, (t, k) in enumerate(combos)]
        return Report("atc-check", cfg, _run_cases(_maxorder_row, jobs, args.jobs))
    from .geometry import drinfeld_battery

    res = drinfeld_battery(args.p, args.m_max)
    rows = [{"case": i, "check": k, "passed": v["pass"], "failed": v["fail"],
             "residual": v["fail"], "pass": v["fail"] == 0}
            for i, (k, v) in enumerate(sorted(res["checks"].items()))]
    return Report("atc-check", cfg, rows)


def _config(args, **extra):
    cfg = {"p": args.p, "seed": args.seed, "budget": args.budget, "prec": args.prec,
           "format": args.format}
    cfg.update(extra)
    return cfg


# entry point ----------------------------------------------------------------------


def build_parser():
    from .orbital import DEFAULT_BUDGET

    def add_common(parser, suppress):
        # subcommands accept the global flags too, without clobbering earlier values
        d = (lambda v: argparse.SUPPRESS) if suppress else (lambda v: v)
        parser.add_argument("--p", type=int, default=d(3), help="residue characteristic (odd prime)")
        parser.add_argument("--prec", type=int, default=d(None),
                            help="default p-adic precision (overrides PADIC_TRANSFER_PREC)")
        parser.add_argument("--seed", type=int, default=d(0))
        parser.add_argument("--budget", type=int, default=d(DEFAULT_BUDGET),
                            help="lattice enumeration budget")
        parser.add_argument("--format", choices=("json", "csv"), default=d("json"))
        parser.add_argument("--out", default=d(None), help="write the output here")
        parser.add_argument("--jobs", type=int, default=d(1), help="worker processes for campaigns")

    common = argparse.ArgumentParser(add_help=False)
    add_common(common, suppress=True)

    ap = argparse.ArgumentParser(prog="padic-transfer",
                                 description="Exact orbital integrals and transfer identities.")
    add_common(ap, suppress=False)
    sub = ap.add_subparsers(dest="command", required=True)
    for name in ("orb", "dorb", "match", "cayley", "tree", "fourier-check"):
        sp = sub.add_parser(name, parents=[common])
        sp.add_argument("input", nargs="?", help="JSON file, inline JSON, or '-' for stdin")
    tc = sub.add_parser("transfer-check", parents=[common])
    tc.add_argument("--n", type=int, default=1)
    tc.add_argument("--t", type=int, default=0)
    tc.add_argument("--samples", type=int, default=20)
    tc.add_argument("--nearby", action="store_true", help="sample orbits of the other space")
    tc.add_argument("--group", action="store_true", help="group version through Cayley maps")
    tc.add_argument("--max-box", type=int, default=4, dest="max_box")
    atc = sub.add_parser("atc-check", parents=[common])
    atc.add_argument("--regime", choices=("rank1", "maxorder", "drinfeld"), default="rank1")
    atc.add_argument("--n", type=int, default=2)
    atc.add_argument("--samples", type=int, default=20)
    atc.add_argument("--m-max", type=int, default=4, dest="m_max")
    atc.add_argument("--vmin", type=int, default=-2)
    atc.add_argument("--vmax", type=int, default=8)
    return ap


def main(argv=None):
    args = build_parser().parse_args(argv)
    if args.prec is not None:
        os.environ["PADIC_TRANSFER_PREC"] = str(args.prec)
    start = time.perf_counter()
    if args.command in ("transfer-check", "atc-check"):
        fn = cmd_transfer_check if args.command == "transfer-check" else cmd_atc_check
        report = fn(args)
        emit(report, args.format, args.out)
        print(f"{len(report.rows) - len(report.failures)}/{len(report.rows)} passed in "
              f"{time.perf_counter() - start:.1f}s", file=sys.stderr)
        return 0 if report.ok else 1
    handlers = {"orb": cmd_orb, "dorb": lambda a: cmd_orb(a, derivative=True),
                "match": cmd_match, "cayley": cmd_cayley, "tree": cmd_tree,
                "fourier-check": cmd_fourier_check}
    try:
        result = handlers[args.command](args)
    except KeyError as exc:
        print(f"padic-transfer {args.command}: input is missing the field {exc}", file=sys.stderr)
        return 2
    except (ValueError, ArithmeticError, RuntimeError, AssertionError) as exc:
        print(f"padic-transfer {args.command}: {type(exc).__name__}: {exc}", file=sys.stderr)
        return 2
    report = Report(args.command, _config(args), [{"case": 0, "pass": result.get("pass", True),
                                                   **result}])
    if args.format == "json":
        text = json.dumps(result, indent=2, sort_keys=True) + "\n"
        if args.out:
            with open(args.out, "w") as fh:
                fh.write(text)
        else:
            sys.stdout.write(text)
    else:
        emit(report, "csv", args.out)
    return 0 if result.get("pass", True) else 1


if __name__ == "__main__":
    sys.exit(main())
