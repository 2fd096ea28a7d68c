"""Assembly and verification of the deformation exact sequence.

For a square-zero pair Z/N' ->> Z/N and modules M, K over Z/N the
sequence

    0 -> Ext^1_{Z/N}(M,K) -> Ext^1_{Z/N'}(M,K) -> Hom(J(x)M, K)
      -> Ext^2_{Z/N}(M,K)

(restriction of scalars, theta, cup with omega) is checked for exactness
on a deterministic family of instances, together with the obstruction
consistency property, the butterfly algebra, and the Cech suite. Group
orders are reported as invariant factor lists so reports do not depend on
presentation choices.
"""

from __future__ import annotations

import json
import time
from dataclasses import dataclass, field

from .linalg import MatZN, howell_form, kernel, row_span_contains
from .fpmod import FPModule, ModuleMap, is_exact, kernel_module, restrict_scalars
from .ext import (
    class_of_extension,
    ext_group,
    extension_of_class,
)
from .butterfly import (
    class_of_two_extension,
    compose,
    find_splitting,
    identity_butterfly,
    invert,
    is_split_butterfly,
    validate_butterfly,
)
from .squarezero import (
    SquareZeroPair,
    cup_omega,
    extension_from_splitting,
    omega,
    restrict_ext,
    solve_deformation,
    theta_matrix,
)
from .cech import (
    Cover,
    baby_cech,
    fiber_product_projections,
    hom_cech_exactness,
    is_injective,
    lift_fiber_product,
    shearing_iso,
)

DEFAULT_PAIRS = ((4, 2), (9, 3), (8, 4), (16, 4), (12, 6), (27, 9))


@dataclass(frozen=True)
class Instance:
    pair: SquareZeroPair
    M: FPModule
    K: FPModule
    label: str


@dataclass
class SuiteConfig:
    pairs: tuple = DEFAULT_PAIRS
    max_order: int = 4096
    seed: int = 0
    cech_degree: int = 3
    report_path: str | None = None


# -- invariant factors --------------------------------------------------------


def _smith_diagonal(rows):
    """Diagonal of the Smith normal form of an integer matrix."""
    a = [list(r) for r in rows]
    if not a or not a[0]:
        return []
    nrows, ncols = len(a), len(a[0])
    diag = []
    r = c = 0
    while r < nrows and c < ncols:
        # find a nonzero pivot with minimal absolute value
        best = None
        for i in range(r, nrows):
            for j in range(c, ncols):
                if a[i][j] and (best is None or abs(a[i][j]) < abs(a[best[0]][best[1]])):
                    best = (i, j)
        if best is None:
            break
        i, j = best
        a[r], a[i] = a[i], a[r]
        for row in a:
            row[c], row[j] = row[j], row[c]
        done = False
        while not done:
            done = True
            for i in range(r + 1, nrows):
                if a[i][c]:
                    q = a[i][c] // a[r][c]
                    for j in range(c, ncols):
                        a[i][j] -= q * a[r][j]
                    if a[i][c]:
                        a[r], a[i] = a[i], a[r]
                        done = False
            for j in range(c + 1, ncols):
                if a[r][j]:
                    q = a[r][j] // a[r][c]
                    for i in range(r, nrows):
                        a[i][j] -= q * a[i][c]
                    if a[r][j]:
                        for i in range(nrows):
                            a[i][c], a[i][j] = a[i][j], a[i][c]
                        done = False
        diag.append(abs(a[r][c]))
        r += 1
        c += 1
    # enforce the divisibility chain
    for i in range(len(diag)):
        for j in range(i + 1, len(diag)):
            from math import gcd
            g = gcd(diag[i], diag[j])
            lcm = diag[i] * diag[j] // g if g else 0
            diag[i], diag[j] = g, lcm
    return diag


def invariant_factors(m: FPModule):
    """Invariant factors d_1 | d_2 | ... of the underlying finite group."""
    n, g = m.modulus, m.ngens
    rows = [list(m.relations.row(i)) for i in range(m.relations.rows)]
    rows += [[n if j == i else 0 for j in range(g)] for i in range(g)]
    diag = _smith_diagonal(rows)
    return [d for d in diag if d > 1]


# -- instance enumeration -----------------------------------------------------


def _module_menu(n: int):
    """Cyclic modules Z/d (1 < d | N) and their rank-2 sums, with names."""
    divisors = [d for d in range(2, n + 1) if n % d == 0]
    menu = []
    for d in divisors:
        menu.append((f"Z/{d}", FPModule.presented(n, 1, [[d % n]])))
    for i, d1 in enumerate(divisors):
        for d2 in divisors[i:]:
            menu.append((f"Z/{d1}+Z/{d2}",
                         FPModule.presented(n, 2, [[d1 % n, 0], [0, d2 % n]])))
    return menu


def enumerate_instances(config: SuiteConfig):
    out = []
    for np_, n in config.pairs:
        pair = SquareZeroPair(np_, n)  # raises naming the violation if invalid
        menu = _module_menu(n)
        for mname, m in menu:
            for kname, k in menu:
                out.append(Instance(pair, m, k,
                                    f"({np_},{n}) M={mname} K={kname}"))
    return out


# -- the exact sequence -------------------------------------------------------


@dataclass
class SequenceReport:
    label: str
    verdict: str                     # PASS / FAIL / SKIP
    orders: dict = field(default_factory=dict)
    maps: dict = field(default_factory=dict)
    nodes: list = field(default_factory=list)  # (name, ok, witness)
    skip_reason: str | None = None
    timing: float = 0.0

    def to_json(self):
        return {
            "label": self.label,
            "verdict": self.verdict,
            "orders": self.orders,
            "maps": self.maps,
            "nodes": [{"name": n, "ok": ok, "witness": w}
                      for n, ok, w in self.nodes],
            "skip_reason": self.skip_reason,
        }


def _kernel_rows_in(f: ModuleMap) -> MatZN:
    """Generators of ker(f) as rows in the generator space of the source."""
    stacked = f.matrix.vstack(f.target.relations)
    kmat = kernel(stacked)
    gs = f.source.ngens
    rows = [list(kmat.row(i))[:gs] for i in range(kmat.rows)]
    return MatZN.from_rows(f.source.modulus, rows, gs)


def _image_equals_kernel(f_in: ModuleMap, f_out: ModuleMap):
    """(ok, witness) for im(f_in) = ker(f_out) inside f_in.target."""
    b = f_in.target
    im_rows = f_in.matrix.vstack(b.relations)
    ker_rows = _kernel_rows_in(f_out).vstack(b.relations)
    hi, _ = howell_form(im_rows)
    hk, _ = howell_form(ker_rows)
    if hi.entries == hk.entries and hi.rows == hk.rows:
        return True, None
    for r in range(hk.rows):
        if not row_span_contains(im_rows, hk.row(r)):
            return False, {"kind": "kernel element not in image",
                           "element": list(hk.row(r))}
    for r in range(hi.rows):
        if not row_span_contains(ker_rows, hi.row(r)):
            return False, {"kind": "image element not in kernel",
                           "element": list(hi.row(r))}
    return False, {"kind": "span mismatch"}  # pragma: no cover


def build_illusie_sequence(inst: Instance, max_order: int = 4096) -> SequenceReport:
    t0 = time.time()
    rep = SequenceReport(inst.label, "PASS")
    pair, m, k = inst.pair, inst.M, inst.K
    n = pair.n
    if m.size() > max_order or k.size() > max_order:
        rep.verdict = "SKIP"
        rep.skip_reason = f"module order exceeds cap {max_order}"
        return rep
    g1 = ext_group(1, m, k)
    tm = theta_matrix(pair, m, k)
    g4 = ext_group(2, m, k)
    dom, homg = tm.domain, tm.hom
    rep.orders = {
        "ext1_A": invariant_factors(g1.group),
        "ext1_Aprime": invariant_factors(dom),
        "hom_JM_K": invariant_factors(homg),
        "ext2_A": invariant_factors(g4.group),
    }
    # map 1: restriction of scalars on degree-1 classes
    rows = []
    for a in range(g1.group.ngens):
        x = extension_of_class(g1.class_from_coords(
            [1 if i == a else 0 for i in range(g1.group.ngens)]))
        xr = restrict_ext(pair, x)
        coords = class_of_extension(xr).coords
        rows.append([v % n for v in coords])
    map1 = (ModuleMap.from_rows(g1.group, dom, rows) if rows
            else ModuleMap(g1.group, dom, MatZN.zero(n, 0, dom.ngens)))
    map2 = tm.map
    # map 3: obstruction class of each Hom generator
    rows3 = []
    cup_cache = []
    for a in range(homg.ngens):
        u = tm.hom_elem_to_map([1 if i == a else 0 for i in range(homg.ngens)])
        t = cup_omega(pair, m, u)
        cup_cache.append(t)
        rows3.append(list(class_of_two_extension(t).coords))
    map3 = (ModuleMap.from_rows(homg, g4.group, rows3) if rows3
            else ModuleMap(homg, g4.group, MatZN.zero(n, 0, g4.group.ngens)))
    rep.maps = {
        "restrict": map1.matrix.row_list(),
        "theta": map2.matrix.row_list(),
        "cup_omega": map3.matrix.row_list(),
    }
    # node 1: injectivity of restriction
    ker1, _ = kernel_module(map1)
    ok1 = ker1.is_zero_module()
    wit1 = None if ok1 else {"kind": "nonzero kernel",
                             "order": ker1.size()}
    rep.nodes.append(("restrict injective", ok1, wit1))
    # node 2: im(restrict) = ker(theta)
    ok2, wit2 = _image_equals_kernel(map1, map2)
    rep.nodes.append(("exact at Ext1_Aprime", ok2, wit2))
    # node 3: im(theta) = ker(cup omega)
    ok3, wit3 = _image_equals_kernel(map2, map3)
    rep.nodes.append(("exact at Hom(JM,K)", ok3, wit3))
    # rightward extension: obstruction classes die over Z/N'
    ok4, wit4 = True, None
    for a, t in enumerate(cup_cache):
        t_prime = _restrict_two_ext_scalars(pair, t)
        c = class_of_two_extension(t_prime)
        if not c.is_zero():
            ok4 = False
            wit4 = {"kind": "obstruction class survives over Z/N'",
                    "hom_generator": a}
            break
    rep.nodes.append(("Ext2_A -> Ext2_Aprime kills cup omega", ok4, wit4))
    if not all(ok for _, ok, _ in rep.nodes):
        rep.verdict = "FAIL"
    rep.timing = time.time() - t0
    return rep


def _restrict_two_ext_scalars(pair, t):
    """View a 2-extension of Z/N-modules over Z/N'."""
    from .butterfly import TwoExtension
    k = restrict_scalars(t.K, pair)
    x = restrict_scalars(t.X, pair)
    y = restrict_scalars(t.Y, pair)
    m = restrict_scalars(t.M, pair)
    return TwoExtension(k, x, y, m,
                        ModuleMap.from_rows(k, x, t.k_to_x.matrix.row_list()),
                        ModuleMap.from_rows(x, y, t.x_to_y.matrix.row_list()),
                        ModuleMap.from_rows(y, m, t.y_to_m.matrix.row_list()))


# -- per-instance deformation checks ------------------------------------------


def obstruction_consistency(inst: Instance, max_enum: int = 512):
    """For every u: solve_deformation succeeds iff the obstruction class
    vanishes, and every solvable u admits the beta construction with
    theta(xi) = u. Returns (verdict, details)."""
    pair, m, k = inst.pair, inst.M, inst.K
    tm = theta_matrix(pair, m, k)
    if tm.hom.size() > max_enum:
        return "SKIP", {"reason": f"hom group order {tm.hom.size()} over cap"}
    solvable = 0
    total = 0
    for v in tm.hom.elements(max_enum):
        u = tm.hom_elem_to_map(v)
        total += 1
        # solve_deformation raises if its two criteria disagree
        d = solve_deformation(pair, m, u)
        if d is None:
            continue
        solvable += 1
        cup = cup_omega(pair, m, u)
        b = find_splitting(cup)
        if b is None:
            return "FAIL", {"reason": "solvable u has no splitting butterfly",
                            "u": u.matrix.row_list()}
        extension_from_splitting(pair, m, u, b)  # validates theta(xi) = u
    return "PASS", {"total_u": total, "solvable": solvable}


def butterfly_suite(pair: SquareZeroPair, m: FPModule):
    """Identity/inverse/composition checks on omega's 2-extension."""
    t = omega(pair, m)
    b = identity_butterfly(t)
    ok, why = validate_butterfly(b)
    if not ok:
        return "FAIL", {"reason": f"identity butterfly invalid: {why}"}
    bb = compose(b, invert(b))
    ok, why = validate_butterfly(bb)
    if not ok:
        return "FAIL", {"reason": f"composite with inverse invalid: {why}"}
    if class_of_two_extension(b.source) != class_of_two_extension(b.target):
        return "FAIL", {"reason": "butterfly endpoints have different classes"}
    c = class_of_two_extension(t)
    split = find_splitting(t)
    if (split is None) != (not c.is_zero()):
        return "FAIL", {"reason": "splitting existence disagrees with class"}
    if split is not None and is_split_butterfly(split) is None:
        return "FAIL", {"reason": "splitting butterfly failed validation"}
    return "PASS", {"omega_class_zero": c.is_zero()}


def cech_suite(n: int, m: FPModule, degree: int = 3):
    """Tautological free cover checks: baby Cech exactness, Hom-Cech
    exactness with injective coefficients, and the shearing model."""
    free = FPModule.free(n, m.ngens)
    taut = ModuleMap(free, m, MatZN.identity(n, m.ngens))
    cover = Cover(m, (taut,))
    bc = baby_cech(cover)
    if not is_exact(list(bc.maps)):
        return "FAIL", {"reason": "baby Cech sequence not exact"}
    k = FPModule.free(n, 1)
    if not is_injective(k):
        return "FAIL", {"reason": "Z/N failed its own injectivity test"}
    if not hom_cech_exactness(cover, k, degree):
        return "FAIL", {"reason": "Hom-Cech complex not exact"}
    for p in range(min(degree, 3) + 1):
        shearing_iso(taut, p)  # raises if the partial-sum maps fail
    return "PASS", {}


# -- the suite ----------------------------------------------------------------


def run_suite(config: SuiteConfig):
    """Full verification run. Returns (exit_code, report_dict)."""
    t0 = time.time()
    report = {
        "config": {"pairs": [list(p) for p in config.pairs],
                   "max_order": config.max_order,
                   "seed": config.seed,
                   "cech_degree": config.cech_degree},
        "instances": [],
        "deformation": [],
        "butterfly": [],
        "cech": [],
    }
    failed = False
    try:
        instances = enumerate_instances(config)
    except ValueError as e:
        return 2, {"error": str(e)}
    for inst in instances:
        rep = build_illusie_sequence(inst, config.max_order)
        report["instances"].append(rep.to_json())
        if rep.verdict == "FAIL":
            failed = True
        if rep.verdict == "SKIP":
            continue
        try:
            verdict, details = obstruction_consistency(inst)
        except RuntimeError as e:
            verdict, details = "FAIL", {"reason": str(e)}
        except ValueError as e:
            verdict, details = "FAIL", {"reason": str(e)}
        report["deformation"].append(
            {"label": inst.label, "verdict": verdict, **details})
        if verdict == "FAIL":
            failed = True
    seen = set()
    for inst in instances:
        key = (inst.pair.n_prime, inst.pair.n, inst.M.ngens,
               inst.M.relations.entries)
        if key in seen:
            continue
        seen.add(key)
        try:
            verdict, details = butterfly_suite(inst.pair, inst.M)
        except (ValueError, RuntimeError, AssertionError) as e:
            verdict, details = "FAIL", {"reason": str(e)}
        report["butterfly"].append(
            {"pair": [inst.pair.n_prime, inst.pair.n],
             "module": list(inst.M.relations.entries),
             "verdict": verdict, **details})
        if verdict == "FAIL":
            failed = True
    seen = set()
    for inst in instances:
        key = (inst.pair.n, inst.M.ngens, inst.M.relations.entries)
        if key in seen:
            continue
        seen.add(key)
        try:
            verdict, details = cech_suite(inst.pair.n, inst.M, config.cech_degree)
        except (ValueError, RuntimeError, AssertionError) as e:
            verdict, details = "FAIL", {"reason": str(e)}
        report["cech"].append(
            {"n": inst.pair.n, "module": list(inst.M.relations.entries),
             "verdict": verdict, **details})
        if verdict == "FAIL":
            failed = True
    # a fixed fiber-product lifting check (projection identities)
    pairs_idx, coords = lift_fiber_product(4, [0, 0], [0, 0], [1, 1], [1, 1])
    px, py = fiber_product_projections(4, pairs_idx, coords, 2, 2)
    lift_ok = (px == [1, 1] and py == [1, 1])
    report["cech"].append({"n": 4, "module": "free-lift",
                           "verdict": "PASS" if lift_ok else "FAIL"})
    failed = failed or not lift_ok
    report["summary"] = {
        "instances": len(instances),
        "failed": failed,
        "elapsed_seconds": round(time.time() - t0, 3),
    }
    exit_code = 1 if failed else 0
    if config.report_path:
        try:
            with open(config.report_path, "w") as fh:
                json.dump(report, fh, indent=2)
        except OSError as e:
            return 2, {"error": f"cannot write report: {e}"}
    return exit_code, report
