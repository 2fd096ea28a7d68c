"""Covers of modules in the set topos and their Cech complexes.

A family {N_i -> M} is covering when every finite tuple of elements of M
lifts simultaneously to a single N_i; lifting the tuple of all elements
forces one map to be surjective, so the predicate is decided by checking
the full generator tuple against each member. The Cech complex is built
from iterated fiber products over weakly increasing index tuples, and
exactness after Hom(-, K) for injective K is the computable shadow of
"Ext is cover cohomology".
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass

from .linalg import DimensionError, MatZN, row_span_contains, solve
from .fpmod import (
    Complex,
    FPModule,
    ModuleMap,
    direct_sum,
    exactness_failure,
    hom_group,
    is_exact,
    kernel_module,
)
from .ext import _lift_rows


@dataclass(frozen=True)
class Cover:
    target: FPModule
    family: tuple  # ModuleMaps N_i -> target

    def __post_init__(self):
        for f in self.family:
            if f.target != self.target:
                raise DimensionError("cover member does not map to the target")
        if not is_cover(list(self.family), self.target):
            raise ValueError("family is not covering")


@dataclass(frozen=True)
class FreeOnSet:
    """The free module on a finite tagged set."""
    labels: tuple
    module: FPModule

    @staticmethod
    def on(n: int, labels) -> "FreeOnSet":
        labels = tuple(labels)
        return FreeOnSet(labels, FPModule.free(n, len(labels)))

    def index(self, label) -> int:
        return self.labels.index(label)


def is_cover(family, m: FPModule, bound: int = 4096) -> bool:
    """Set-topos covering predicate.

    Checks that the tuple of all elements of m (the worst finite tuple)
    lifts to a single member, i.e. that some member hits every element.
    """
    family = list(family)
    for f in family:
        if f.target != m:
            raise DimensionError("cover member does not map to the target")
    elements = m.elements(bound)
    for f in family:
        hit = f.matrix.vstack(m.relations)
        if all(solve(hit, list(e)) is not None for e in elements):
            return True
    return False


def _fiber_product(maps):
    """Iterated fiber product N_{i_0} x_M ... x_M N_{i_p}.

    Returns (module, inclusion into the direct sum, projections to each
    factor). For a single factor this is the factor itself.
    """
    maps = list(maps)
    m = maps[0].target
    n = m.modulus
    if len(maps) == 1:
        src = maps[0].source
        return src, ModuleMap.identity(src), [ModuleMap.identity(src)]
    s, injs, prjs = direct_sum([f.source for f in maps])
    diff_targets = [m] * (len(maps) - 1)
    dt, _, _ = direct_sum(diff_targets) if len(diff_targets) > 1 else (m, None, None)
    cols = []
    for k in range(len(maps) - 1):
        block = prjs[k].compose(maps[k]) - prjs[k + 1].compose(maps[k + 1])
        cols.append(block.matrix)
    mat = cols[0]
    for c in cols[1:]:
        mat = mat.hstack(c)
    diff = ModuleMap(s, dt, mat)
    fp, incl = kernel_module(diff)
    projections = [incl.compose(p) for p in prjs]
    return fp, incl, projections


def baby_cech(cover: Cover) -> Complex:
    """(+) (N_i x_M N_j) -> (+) N_i -> M -> 0 with the difference of the
    two projections on the left; exact for genuine covers."""
    m = cover.target
    n = m.modulus
    family = list(cover.family)
    c0, injs, _ = direct_sum([f.source for f in family])
    d0 = ModuleMap(c0, m,
                   family[0].matrix if len(family) == 1 else _vstack_all(
                       [f.matrix for f in family]))
    pieces = []
    piece_maps = []
    for i, j in itertools.product(range(len(family)), repeat=2):
        fp, incl, projs = _fiber_product([family[i], family[j]])
        pieces.append(fp)
        piece_maps.append((i, j, projs))
    c1, p_injs, _ = direct_sum(pieces)
    rows = []
    for (i, j, projs), fp, inj in zip(piece_maps, pieces, p_injs):
        to_c0 = projs[0].compose(injs[i]) - projs[1].compose(injs[j])
        rows.extend(to_c0.matrix.row_list())
    d1 = ModuleMap.from_rows(c1, c0, rows)
    z = FPModule.zero(n)
    return Complex((d1, d0, ModuleMap.zero_map(m, z)))


def _vstack_all(mats):
    out = mats[0]
    for m in mats[1:]:
        out = out.vstack(m)
    return out


def cech_complex(cover: Cover, degree: int) -> Complex:
    """The Cech complex C_degree -> ... -> C_0 -> M of a cover.

    C_p is the sum of iterated fiber products over weakly increasing
    (p+1)-tuples of indices (list order); differentials are alternating
    sums of the deletion faces.
    """
    m = cover.target
    n = m.modulus
    family = list(cover.family)
    idx = range(len(family))
    levels = []  # per degree: (tuples, modules, inclusions, projections, sum, injs, prjs)
    for p in range(degree + 1):
        tuples = list(itertools.combinations_with_replacement(idx, p + 1))
        mods, data = [], []
        for t in tuples:
            fp, incl, projs = _fiber_product([family[i] for i in t])
            mods.append(fp)
            data.append((fp, incl, projs))
        total, injs, prjs = direct_sum(mods)
        levels.append((tuples, data, total, injs, prjs))
    maps = []
    # differential C_p -> C_{p-1}
    for p in range(degree, 0, -1):
        tuples, data, total, injs, prjs = levels[p]
        tgt_tuples, tgt_data, tgt_total, tgt_injs, _ = levels[p - 1]
        rows = [[0] * tgt_total.ngens for _ in range(total.ngens)]
        acc = MatZN.zero(n, total.ngens, tgt_total.ngens)
        for ti, t in enumerate(tuples):
            fp, incl, projs = data[ti]
            for drop in range(len(t)):
                sub = t[:drop] + t[drop + 1 :]
                si = tgt_tuples.index(sub)
                sfp, sincl, _ = tgt_data[si]
                # map fp -> sfp by deleting the dropped coordinate
                kept = [k for k in range(len(t)) if k != drop]
                amb_rows = projs[kept[0]].matrix
                for k in kept[1:]:
                    amb_rows = amb_rows.hstack(projs[k].matrix)
                if len(kept) == 1:
                    face_mat = amb_rows
                else:
                    face_mat = _lift_rows(
                        ModuleMap(sfp, sincl.target, sincl.matrix), amb_rows)
                face = ModuleMap(fp, sfp, face_mat)
                step = prjs[ti].compose(face).compose(tgt_injs[si])
                acc = acc + step.matrix.scale((-1) ** drop)
        maps.append(ModuleMap(total, tgt_total, acc))
    # augmentation C_0 -> M
    tuples0, data0, total0, injs0, prjs0 = levels[0]
    aug_rows = []
    for ti, t in enumerate(tuples0):
        aug_rows.extend(family[t[0]].matrix.row_list())
    maps.append(ModuleMap.from_rows(total0, m, aug_rows))
    z = FPModule.zero(n)
    return Complex(tuple(maps) + (ModuleMap.zero_map(m, z),))


def is_injective(k: FPModule) -> bool:
    """Baer criterion over Z/N: for every divisor d of N the annihilator
    of N/d in K must be contained in d*K."""
    n = k.modulus
    for d in range(1, n + 1):
        if n % d:
            continue
        ann, incl = kernel_module(
            ModuleMap(k, k, MatZN.identity(n, k.ngens).scale(n // d)))
        dk_span = MatZN.identity(n, k.ngens).scale(d).vstack(k.relations)
        for a in range(ann.ngens):
            if not row_span_contains(dk_span, incl.matrix.row(a)):
                return False
    return True


def hom_cech_exactness(cover: Cover, k: FPModule, degree: int = 3) -> bool:
    """Whether 0 -> Hom(M,K) -> Hom(C_0,K) -> ... is exact through the
    given degree for an injective K."""
    if not is_injective(k):
        raise ValueError("coefficient module fails the injectivity criterion")
    cx = cech_complex(cover, degree)
    chain = list(cx.maps[:-1])  # drop the final map to the zero module
    # dualize: Hom(-, K) contravariantly; f: A -> B gives Hom(B,K) -> Hom(A,K)
    hom_data = []
    modules = [chain[0].source] + [f.target for f in chain]
    for mod in modules:
        hom_data.append(hom_group(mod, k))
    n = k.modulus
    dual_maps = []
    for pos in range(len(chain) - 1, -1, -1):
        f = chain[pos]
        hb, hb_e2m, hb_m2e = _hom_cached(hom_data, modules, f.target, k)
        ha, ha_e2m, ha_m2e = _hom_cached(hom_data, modules, f.source, k)
        rows = []
        for a in range(hb.ngens):
            gen = hb_e2m([1 if i == a else 0 for i in range(hb.ngens)])
            rows.append(list(ha_m2e(f.compose(gen))))
        if hb.ngens:
            dual_maps.append(ModuleMap.from_rows(hb, ha, rows))
        else:
            dual_maps.append(ModuleMap(hb, ha, MatZN.zero(n, 0, ha.ngens)))
    z = FPModule.zero(n)
    seq = [ModuleMap.zero_map(z, dual_maps[0].source)] + dual_maps
    return exactness_failure(seq) is None


def _hom_cached(hom_data, modules, mod, k):
    return hom_data[modules.index(mod)]


def lift_fiber_product(n: int, s_to_r, t_to_r, x, y):
    """Preimage in the free module on S x_R T of a fiber-product element.

    ``s_to_r`` and ``t_to_r`` list the image index in R for each element
    of S and T; ``x`` and ``y`` are the coordinates of an element of
    A^S x_{A^R} A^T. Returns (pairs, coords) where pairs lists S x_R T as
    (s, t) index pairs and coords its coefficient vector, built from the
    per-r coefficient matrix: the total z_r in the corner, x_i + y_i on
    the diagonal, -y_i and -x_j down the first column and row.

    Raises if the input is not in the fiber product, or if some r has
    elements on one side only with nonzero coefficients (no pairs exist
    to carry them, so no preimage exists).
    """
    s_to_r, t_to_r = list(s_to_r), list(t_to_r)
    x = [v % n for v in x]
    y = [v % n for v in y]
    if len(x) != len(s_to_r) or len(y) != len(t_to_r):
        raise DimensionError("coordinate length mismatch")
    pairs = [(i, j) for i in range(len(s_to_r)) for j in range(len(t_to_r))
             if s_to_r[i] == t_to_r[j]]
    coords = [0] * len(pairs)
    r_values = set(s_to_r) | set(t_to_r)
    for r in sorted(r_values):
        s_r = [i for i in range(len(s_to_r)) if s_to_r[i] == r]
        t_r = [j for j in range(len(t_to_r)) if t_to_r[j] == r]
        zx = sum(x[i] for i in s_r) % n
        zy = sum(y[j] for j in t_r) % n
        if zx != zy:
            raise ValueError(f"element is not in the fiber product at r={r}")
        if not s_r or not t_r:
            if any(x[i] for i in s_r) or any(y[j] for j in t_r):
                raise ValueError(
                    f"no preimage: index r={r} has elements on one side only")
            continue
        # pad the shorter side by repeating its last element with zero weight
        length = max(len(s_r), len(t_r))
        xs = [x[i] for i in s_r] + [0] * (length - len(s_r))
        ys = [y[j] for j in t_r] + [0] * (length - len(t_r))
        ss = s_r + [s_r[-1]] * (length - len(s_r))
        ts = t_r + [t_r[-1]] * (length - len(t_r))
        def put(si, tj, c):
            coords[pairs.index((si, tj))] = (coords[pairs.index((si, tj))] + c) % n
        put(ss[0], ts[0], zx)
        for i in range(1, length):
            put(ss[i], ts[i], xs[i] + ys[i])
            put(ss[i], ts[0], -ys[i])
            put(ss[0], ts[i], -xs[i])
    return pairs, coords


def fiber_product_projections(n: int, pairs, coords, s_count: int, t_count: int):
    """Images of a free S x_R T element under the two projections."""
    px = [0] * s_count
    py = [0] * t_count
    for (i, j), c in zip(pairs, coords):
        px[i] = (px[i] + c) % n
        py[j] = (py[j] + c) % n
    return px, py


@dataclass(frozen=True)
class ShearingData:
    """The isomorphism T (+) S^p = T x_M ... x_M T by partial sums."""
    domain: FPModule
    fiber: FPModule
    shear: ModuleMap
    unshear: ModuleMap


def shearing_iso(t_map: ModuleMap, p: int) -> ShearingData:
    """For an epimorphism T -> M with kernel S, the partial-sum map
    T (+) S^p -> T x_M ... x_M T (p+1 factors) and its inverse."""
    from .fpmod import is_surjective_map
    if not is_surjective_map(t_map):
        raise ValueError("shearing requires an epimorphism")
    t_mod, m = t_map.source, t_map.target
    n = m.modulus
    s_mod, s_incl = kernel_module(t_map)
    fp, fp_incl, fp_projs = _fiber_product([t_map] * (p + 1))
    dom, injs, prjs = direct_sum([t_mod] + [s_mod] * p)
    # shear: (t, s_1..s_p) -> (t, t+s_1, t+s_1+s_2, ...)
    amb = None
    for k in range(p + 1):
        blk = prjs[0].matrix
        for j in range(1, k + 1):
            blk = blk + prjs[j].compose(s_incl).matrix
        amb = blk if amb is None else amb.hstack(blk)
    if p == 0:
        shear = ModuleMap(dom, fp, amb)
    else:
        shear = ModuleMap(dom, fp, _lift_rows(
            ModuleMap(fp, fp_incl.target, fp_incl.matrix), amb))
    # unshear: (t_0..t_p) -> (t_0, t_1-t_0, ..., t_p-t_{p-1}) with the
    # differences expressed in S coordinates
    cols = [fp_projs[0].matrix]
    for k in range(1, p + 1):
        diff = fp_projs[k] - fp_projs[k - 1]
        in_s = _lift_rows(ModuleMap(s_mod, t_mod, s_incl.matrix), diff.matrix)
        cols.append(in_s)
    amb2 = cols[0]
    for c in cols[1:]:
        amb2 = amb2.hstack(c)
    unshear = ModuleMap(fp, dom, amb2)
    if not shear.compose(unshear).eq(ModuleMap.identity(dom)) or \
       not unshear.compose(shear).eq(ModuleMap.identity(fp)):
        raise AssertionError("shearing maps are not mutually inverse")
    return ShearingData(dom, fp, shear, unshear)
