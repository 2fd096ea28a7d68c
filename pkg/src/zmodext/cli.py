"""Command-line interface.

Exit codes: 0 all checks pass, 1 a verification check fails,
2 usage or input error.

Module arguments accept either a JSON literal or a path to a JSON file,
in both cases of the form ``{"gens": 1, "relations": [[2]]}`` with
matrices row-major and residues in [0, N). Cover files are JSON::

    {
      "ring": {"nprime": 8, "n": 4},
      "modules": {"M": {"gens": 1, "relations": [[2]]}, ...},
      "maps": {"f": {"source": "N0", "target": "M", "matrix": [[1]]}, ...},
      "covers": [{"target": "M", "members": ["f", "g"]}]
    }
"""

from __future__ import annotations

import argparse
import json
import sys

from .linalg import DimensionError
from .fpmod import FPModule, ModuleMap, is_exact
from .ext import ext_group
from .butterfly import (
    compose,
    find_splitting,
    identity_butterfly,
    invert,
    is_split_butterfly,
    validate_butterfly,
)
from .cech import Cover, baby_cech, hom_cech_exactness
from .squarezero import (
    SquareZeroPair,
    j_tensor,
    omega,
    solve_deformation,
    theta_matrix,
)
from .verify import (
    Instance,
    SuiteConfig,
    build_illusie_sequence,
    cech_suite,
    invariant_factors,
    run_suite,
)


class InputError(Exception):
    pass


def _json_arg(text: str, what: str):
    """Parse a JSON literal, or the contents of the file it names."""
    text = text.strip()
    if not text.startswith(("{", "[")):
        try:
            with open(text) as fh:
                text = fh.read()
        except OSError as e:
            raise InputError(f"cannot read {what} file: {e}")
    try:
        return json.loads(text)
    except json.JSONDecodeError as e:
        raise InputError(f"bad JSON for {what}: {e}")


def _parse_module(n: int, text: str, what: str) -> FPModule:
    spec = _json_arg(text, what)
    if not isinstance(spec, dict) or "gens" not in spec:
        raise InputError(f"{what} wants {{\"gens\": g, \"relations\": [[...]]}}")
    try:
        return FPModule.presented(n, spec["gens"], spec.get("relations", []))
    except (ValueError, DimensionError) as e:
        raise InputError(f"bad {what}: {e}")


def _pair(args) -> SquareZeroPair:
    try:
        return SquareZeroPair(args.nprime, args.n)
    except ValueError as e:
        raise InputError(str(e))


def _maybe_report(args, payload) -> None:
    if getattr(args, "report", None):
        with open(args.report, "w") as fh:
            json.dump(payload, fh, indent=2)


def _load_cover_file(path: str):
    data = _json_arg(path, "cover")
    ring = data.get("ring")
    if not ring or "n" not in ring:
        raise InputError("cover file needs a ring section with n")
    n = ring["n"]
    modules = {}
    for name, spec in data.get("modules", {}).items():
        modules[name] = _parse_module(n, json.dumps(spec), f"module {name}")
    maps = {}
    for name, spec in data.get("maps", {}).items():
        try:
            maps[name] = ModuleMap.from_rows(
                modules[spec["source"]], modules[spec["target"]],
                spec["matrix"])
        except KeyError as e:
            raise InputError(f"map {name} references unknown module {e}")
        except (ValueError, DimensionError) as e:
            raise InputError(f"bad map {name}: {e}")
    covers = []
    for i, spec in enumerate(data.get("covers", [])):
        try:
            covers.append(Cover(modules[spec["target"]],
                                tuple(maps[m] for m in spec["members"])))
        except KeyError as e:
            raise InputError(f"cover {i} references unknown name {e}")
        except (ValueError, DimensionError) as e:
            raise InputError(f"bad cover {i}: {e}")
    return ring, modules, covers


# -- subcommands ---------------------------------------------------------------


def _cmd_verify(args) -> int:
    cfg = SuiteConfig(max_order=args.max_order, seed=args.seed,
                      cech_degree=args.cech_degree, report_path=args.report)
    if args.pairs:
        try:
            pairs = tuple(tuple(int(v) for v in chunk.split(":"))
                          for chunk in args.pairs.split(","))
            if any(len(p) != 2 for p in pairs):
                raise ValueError
        except ValueError:
            raise InputError("--pairs wants nprime:n[,nprime:n...]")
        cfg.pairs = pairs
    code, rep = run_suite(cfg)
    if "error" in rep:
        raise InputError(rep["error"])
    s = rep["summary"]
    print(f"instances: {s['instances']}  elapsed: {s['elapsed_seconds']}s")
    for section in ("instances", "deformation", "butterfly", "cech"):
        verdicts = [r["verdict"] for r in rep[section]]
        print(f"{section}: {verdicts.count('PASS')} pass, "
              f"{verdicts.count('FAIL')} fail, {verdicts.count('SKIP')} skip")
        for r in rep[section]:
            if r["verdict"] == "FAIL":
                print(f"  FAIL {r.get('label') or r}", file=sys.stderr)
    print("RESULT:", "FAIL" if s["failed"] else "PASS")
    return code


def _cmd_illusie(args) -> int:
    pair = _pair(args)
    m = _parse_module(pair.n, args.module, "--module")
    k = _parse_module(pair.n, args.coeff, "--coeff")
    rep = build_illusie_sequence(
        Instance(pair, m, k, f"({pair.n_prime},{pair.n})"), args.max_order)
    print(rep.label, "->", rep.verdict)
    if rep.verdict == "SKIP":
        print("  reason:", rep.skip_reason)
    for name, group in rep.orders.items():
        print(f"  {name}: invariant factors {group or '(trivial)'}")
    for name, ok, witness in rep.nodes:
        print(f"  {name}: {'ok' if ok else 'FAIL ' + repr(witness)}")
    _maybe_report(args, rep.to_json())
    return 1 if rep.verdict == "FAIL" else 0


def _cmd_ext(args) -> int:
    m = _parse_module(args.n, args.module, "--module")
    k = _parse_module(args.n, args.coeff, "--coeff")
    g = ext_group(args.p, m, k)
    print(f"Ext^{args.p} over Z/{args.n}: invariant factors "
          f"{invariant_factors(g.group) or '(trivial)'}")
    return 0


def _cmd_theta(args) -> int:
    pair = _pair(args)
    m = _parse_module(pair.n, args.module, "--module")
    k = _parse_module(pair.n, args.coeff, "--coeff")
    tm = theta_matrix(pair, m, k)
    print(f"Ext^1 over Z/{pair.n_prime}: invariant factors "
          f"{invariant_factors(tm.domain) or '(trivial)'}")
    print(f"Hom(J(x)M, K): invariant factors "
          f"{invariant_factors(tm.hom) or '(trivial)'}")
    print("theta on generators:")
    for row in tm.map.matrix.row_list():
        print(" ", row)
    _maybe_report(args, {"domain": invariant_factors(tm.domain),
                         "hom": invariant_factors(tm.hom),
                         "matrix": tm.map.matrix.row_list()})
    return 0


def _cmd_deform(args) -> int:
    pair = _pair(args)
    m = _parse_module(pair.n, args.module, "--module")
    k = _parse_module(pair.n, args.coeff, "--coeff")
    rows = _json_arg(args.u, "--u")
    jm = j_tensor(pair, m)
    try:
        u = ModuleMap.from_rows(jm, k, rows)
    except (ValueError, DimensionError, TypeError) as e:
        raise InputError(f"--u is not a matrix of a map J(x)M -> K: {e}")
    d = solve_deformation(pair, m, u)
    if d is None:
        print("obstructed: no extension realizes u")
        return 1
    print(f"deformation found over Z/{pair.n_prime}:")
    print(f"  middle module: {d.xi.E.ngens} generators, relations "
          f"{d.xi.E.relations.row_list()}")
    print(f"  invariant factors: {invariant_factors(d.xi.E)}")
    _maybe_report(args, {"middle_relations": d.xi.E.relations.row_list(),
                         "invariant_factors": invariant_factors(d.xi.E)})
    return 0


def _cmd_cech(args) -> int:
    ring, modules, covers = _load_cover_file(args.cover)
    failed = False
    if not covers:
        # no explicit covers: run the tautological-cover suite per module
        for name, m in modules.items():
            verdict, details = cech_suite(ring["n"], m, args.degree)
            print(f"tautological cover of {name}: {verdict}",
                  details.get("reason", ""))
            failed = failed or verdict == "FAIL"
        return 1 if failed else 0
    k = FPModule.free(ring["n"], 1)
    for i, cover in enumerate(covers):
        ok_baby = is_exact(list(baby_cech(cover).maps))
        ok_hom = hom_cech_exactness(cover, k, args.degree)
        ok = ok_baby and ok_hom
        print(f"cover {i}: baby={'ok' if ok_baby else 'FAIL'} "
              f"hom-exact={'ok' if ok_hom else 'FAIL'}")
        failed = failed or not ok
    return 1 if failed else 0


def _cmd_butterfly(args) -> int:
    pair = _pair(args)
    m = _parse_module(pair.n, args.module, "--module")
    t = omega(pair, m)
    b = identity_butterfly(t)
    if args.action == "validate":
        ok, why = validate_butterfly(b)
        print("identity butterfly:", "valid" if ok else f"invalid ({why})")
        return 0 if ok else 1
    if args.action == "invert":
        ok, why = validate_butterfly(invert(b))
        print("inverted butterfly:", "valid" if ok else f"invalid ({why})")
        return 0 if ok else 1
    bb = compose(b, invert(b))
    ok, why = validate_butterfly(bb)
    print("composite with inverse:", "valid" if ok else f"invalid ({why})")
    if not ok:
        return 1
    s = find_splitting(t)
    if s is None:
        print("omega class is nonzero (no splitting butterfly)")
        return 0
    valid = is_split_butterfly(s) is not None
    print("omega class is zero; splitting butterfly",
          "valid" if valid else "INVALID")
    return 0 if valid else 1


# -- parser --------------------------------------------------------------------


def _build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(
        prog="zmodext",
        description="Exact verification of the deformation sequence for "
                    "modules over square-zero extensions Z/N' ->> Z/N.")
    sub = p.add_subparsers(dest="command", required=True)

    v = sub.add_parser("verify", help="run the full verification suite")
    v.add_argument("--pairs", help="comma list nprime:n (default: built-in grid)")
    v.add_argument("--report", help="write a JSON report to this path")
    v.add_argument("--seed", type=int, default=0)
    v.add_argument("--max-order", type=int, default=4096,
                   help="skip instances whose modules exceed this order")
    v.add_argument("--cech-degree", type=int, default=3)
    v.set_defaults(func=_cmd_verify)

    def add_ring(c, with_nprime=True):
        if with_nprime:
            c.add_argument("--nprime", type=int, required=True)
        c.add_argument("--n", type=int, required=True)

    def add_modules(c, coeff=True):
        c.add_argument("--module", required=True,
                       help="M as a JSON literal or file")
        if coeff:
            c.add_argument("--coeff", required=True,
                           help="K as a JSON literal or file")
        c.add_argument("--report", help="write a JSON report to this path")

    i = sub.add_parser("illusie", help="check the sequence on one instance")
    add_ring(i)
    add_modules(i)
    i.add_argument("--max-order", type=int, default=4096)
    i.set_defaults(func=_cmd_illusie)

    e = sub.add_parser("ext", help="invariant factors of Ext^p(M, K)")
    e.add_argument("--p", type=int, choices=(0, 1, 2), required=True)
    add_ring(e, with_nprime=False)
    add_modules(e)
    e.set_defaults(func=_cmd_ext)

    t = sub.add_parser("theta",
                       help="the map Ext^1_{Z/N'}(M,K) -> Hom(J(x)M, K)")
    add_ring(t)
    add_modules(t)
    t.set_defaults(func=_cmd_theta)

    d = sub.add_parser("deform", help="find an extension with theta = u, or "
                       "report the obstruction")
    add_ring(d)
    add_modules(d)
    d.add_argument("--u", required=True,
                   help="matrix of u: J(x)M -> K (JSON literal or file)")
    d.set_defaults(func=_cmd_deform)

    c = sub.add_parser("cech", help="Cech complex checks for covers in a file")
    c.add_argument("--cover", required=True, help="cover JSON file")
    c.add_argument("--degree", type=int, default=3)
    c.set_defaults(func=_cmd_cech)

    b = sub.add_parser("butterfly",
                       help="butterfly calculus on the canonical 2-extension")
    b.add_argument("action", choices=("compose", "invert", "validate"))
    add_ring(b)
    b.add_argument("--module", required=True,
                   help="M as a JSON literal or file")
    b.set_defaults(func=_cmd_butterfly)
    return p


def main(argv=None) -> int:
    parser = _build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except InputError as e:
        print(f"error: {e}", file=sys.stderr)
        return 2
    except OSError as e:
        print(f"error: {e}", file=sys.stderr)
        return 2


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())
