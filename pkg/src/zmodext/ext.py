"""Extension groups over Z/N.

Ext^p(M, K) is computed from a truncated free resolution of M: apply
Hom(-, K) degreewise (a direct sum of copies of K per free rank), take
kernel of the outgoing precomposition map modulo the image of the
incoming one. The same resolution also drives the dictionary between
short exact sequences 0 -> K -> E -> M -> 0 and degree-1 classes.

One resolution is cached per presentation of M, so classes computed at
different times are always directly comparable.
"""

from __future__ import annotations

from dataclasses import dataclass, field

from .linalg import DimensionError, MatZN, howell_form, kernel, solve
from .fpmod import (
    FPModule,
    FreeResolution,
    ModuleMap,
    direct_sum,
    free_resolution,
    is_exact,
    kernel_module,
)

# -- resolution cache ---------------------------------------------------------

_res_cache: dict = {}


def _module_key(m: FPModule):
    return (m.modulus, m.ngens, m.relations.rows, m.relations.entries)


def cached_resolution(m: FPModule, depth: int) -> FreeResolution:
    """The single shared resolution of m, extended on demand."""
    key = _module_key(m)
    res = _res_cache.get(key)
    if res is None or len(res.d) < depth:
        res = free_resolution(m, depth)
        _res_cache[key] = res
    return res


# -- Ext groups ---------------------------------------------------------------


def _hom_complex_map(res: FreeResolution, k: FPModule, p: int) -> MatZN:
    """Matrix of precomposition with d_p: Hom(F_{p-1}, K) -> Hom(F_p, K).

    Coordinates on Hom(F_q, K) are flat (a, b) -> a * gK + b where a runs
    over the free rank of F_q and b over generators of K.
    """
    d = res.d[p - 1]
    gk = k.ngens
    n = k.modulus
    rows = []
    for a in range(d.cols):  # generator (a, b) of Hom(F_{p-1}, K)
        for b in range(gk):
            row = [0] * (d.rows * gk)
            for c in range(d.rows):
                row[c * gk + b] = d[c, a]
            rows.append(row)
    return MatZN.from_rows(n, rows, d.rows * gk)


def _hom_term(res: FreeResolution, k: FPModule, p: int) -> FPModule:
    rank = res.rank(p)
    if rank == 0:
        return FPModule.zero(k.modulus)
    return direct_sum([k] * rank)[0]


@dataclass(frozen=True)
class ExtGroup:
    """Ext^p(M, K) presented as an FPModule, with cocycle conversions."""

    p: int
    module: FPModule  # M
    coeffs: FPModule  # K
    group: FPModule
    _res: FreeResolution = field(repr=False)
    _cocycle_gens: MatZN = field(repr=False)  # rows: generators of Z^p, flat coords
    _cobound_rows: MatZN = field(repr=False)  # rows spanning B^p + relations of T^p

    def zero(self) -> "ExtClass":
        return ExtClass(self, self.group.zero_elem())

    def class_from_coords(self, coords) -> "ExtClass":
        return ExtClass(self, self.group.reduce(coords))

    def cocycle_of(self, coords) -> ModuleMap:
        """The representing cocycle F_p -> K of a coordinate vector."""
        n = self.group.modulus
        gk = self.coeffs.ngens
        rp = self._res.rank(self.p)
        flat = [0] * (rp * gk)
        for i, c in enumerate(coords):
            if c % n:
                row = self._cocycle_gens.row(i)
                flat = [(x + c * r) % n for x, r in zip(flat, row)]
        fp = FPModule.free(n, rp)
        mat = [list(flat[a * gk : (a + 1) * gk]) for a in range(rp)]
        return ModuleMap.from_rows(fp, self.coeffs, mat)

    def coords_of_cocycle(self, cocycle) -> tuple:
        """Coordinates of a cocycle (ModuleMap F_p -> K or flat row)."""
        if isinstance(cocycle, ModuleMap):
            flat = [x for i in range(cocycle.matrix.rows) for x in cocycle.matrix.row(i)]
        else:
            flat = list(cocycle)
        stacked = self._cocycle_gens.vstack(self._cobound_rows)
        x = solve(stacked, flat)
        if x is None:
            raise ValueError("vector is not a cocycle for this Ext group")
        return self.group.reduce(x[: self.group.ngens])

    def class_of_cocycle(self, cocycle) -> "ExtClass":
        return ExtClass(self, self.coords_of_cocycle(cocycle))

    def elements(self, bound: int = 4096):
        return [ExtClass(self, v) for v in self.group.elements(bound)]


@dataclass(frozen=True)
class ExtClass:
    group: ExtGroup
    coords: tuple

    @property
    def p(self) -> int:
        return self.group.p

    def __add__(self, other: "ExtClass") -> "ExtClass":
        if self.group is not other.group and self.group != other.group:
            raise DimensionError("classes from different Ext groups")
        return ExtClass(self.group, self.group.group.add(self.coords, other.coords))

    def __neg__(self) -> "ExtClass":
        return ExtClass(self.group, self.group.group.smul(-1, self.coords))

    def __sub__(self, other: "ExtClass") -> "ExtClass":
        return self + (-other)

    def smul(self, c: int) -> "ExtClass":
        return ExtClass(self.group, self.group.group.smul(c, self.coords))

    def is_zero(self) -> bool:
        return not any(self.coords)

    def __eq__(self, other) -> bool:
        return (isinstance(other, ExtClass)
                and self.group.p == other.group.p
                and self.group.module == other.group.module
                and self.group.coeffs == other.group.coeffs
                and self.coords == other.coords)

    def __hash__(self):
        return hash((self.group.p, self.coords))

    def cocycle(self) -> ModuleMap:
        return self.group.cocycle_of(self.coords)


_ext_cache: dict = {}


def ext_group(p: int, m: FPModule, k: FPModule) -> ExtGroup:
    """Ext^p(m, k) over Z/N as an ExtGroup (p = 0 gives Hom)."""
    if p < 0:
        raise ValueError("degree must be >= 0")
    if m.modulus != k.modulus:
        raise DimensionError("modulus mismatch in ext_group")
    key = (p, _module_key(m), _module_key(k))
    hit = _ext_cache.get(key)
    if hit is not None:
        return hit
    n = m.modulus
    res = cached_resolution(m, p + 1)
    gk = k.ngens
    rp = res.rank(p)
    tp = _hom_term(res, k, p)

    if rp == 0 or gk == 0:
        zero_grp = FPModule.zero(n)
        g = ExtGroup(p, m, k, zero_grp,
                     res, MatZN.zero(n, 0, rp * gk), MatZN.zero(n, 0, rp * gk))
        _ext_cache[key] = g
        return g

    # cocycles: kernel of precomposition with d_{p+1}
    rp1 = res.rank(p + 1)
    if rp1 == 0:
        zmat = MatZN.identity(n, rp * gk)
    else:
        out_map = _hom_complex_map(res, k, p + 1)
        tnext = _hom_term(res, k, p + 1)
        stacked = out_map.vstack(tnext.relations)
        kmat = kernel(stacked)
        zmat = MatZN.from_rows(
            n, [list(kmat.row(i))[: rp * gk] for i in range(kmat.rows)], rp * gk)
        zmat, _ = howell_form(zmat)
        # relations of T^p are cocycles too (they represent the zero map)
        zmat, _ = howell_form(zmat.vstack(tp.relations))

    # coboundaries: image of precomposition with d_p, plus relations of T^p
    if p == 0:
        bmat = tp.relations
    else:
        in_map = _hom_complex_map(res, k, p)
        bmat, _ = howell_form(in_map.vstack(tp.relations))

    # group presentation: generators = rows of zmat, relations = coefficient
    # vectors landing in the coboundary span
    ngroup = zmat.rows
    if ngroup == 0:
        grp = FPModule.zero(n)
    else:
        stacked = zmat.vstack(bmat)
        kmat = kernel(stacked)
        rel_rows = [list(kmat.row(i))[:ngroup] for i in range(kmat.rows)]
        grp = FPModule.presented(n, ngroup, rel_rows)
    g = ExtGroup(p, m, k, grp, res, zmat, bmat)
    _ext_cache[key] = g
    return g


# -- extensions ---------------------------------------------------------------


@dataclass(frozen=True)
class Extension:
    """A short exact sequence 0 -> K -> E -> M -> 0 (exactness enforced)."""

    K: FPModule
    E: FPModule
    M: FPModule
    i: ModuleMap
    p: ModuleMap

    def __post_init__(self):
        if self.i.source != self.K or self.i.target != self.E:
            raise DimensionError("i must map K to E")
        if self.p.source != self.E or self.p.target != self.M:
            raise DimensionError("p must map E to M")
        n = self.K.modulus
        z = FPModule.zero(n)
        seq = [ModuleMap.zero_map(z, self.K), self.i, self.p,
               ModuleMap.zero_map(self.M, z)]
        if not is_exact(seq):
            raise ValueError("0 -> K -> E -> M -> 0 is not exact")


def split_extension(k: FPModule, m: FPModule) -> Extension:
    e, injs, prjs = direct_sum([k, m])
    return Extension(k, e, m, injs[0], prjs[1])


def _lift_rows(through: ModuleMap, vectors: MatZN) -> MatZN:
    """For each row v, a canonical x with x * through == v in the target."""
    stacked = through.matrix.vstack(through.target.relations)
    out = []
    for r in range(vectors.rows):
        x = solve(stacked, vectors.row(r))
        if x is None:
            raise ValueError("vector does not lift through the given map")
        out.append(x[: through.matrix.rows])
    return MatZN.from_rows(vectors.n, out, through.matrix.rows)


def _class_data(x: Extension):
    """(ExtGroup, coords, lift matrix F0 -> E, cocycle matrix F1 -> K)."""
    g = ext_group(1, x.M, x.K)
    res = g._res
    n = x.M.modulus
    # lift F0 -> M through p
    gens = MatZN.identity(n, x.M.ngens)
    lam0 = _lift_rows(x.p, gens)
    # F1 -> E lands in ker p = im i; express through i
    lam1 = res.d[0] * lam0
    coc = _lift_rows(x.i, lam1)
    flat = [v for r in range(coc.rows) for v in coc.row(r)]
    coords = g.coords_of_cocycle(flat) if flat else g.group.zero_elem()
    return g, coords, lam0, coc


def class_of_extension(x: Extension) -> ExtClass:
    g, coords, _, _ = _class_data(x)
    return ExtClass(g, coords)


def extension_of_class(c: ExtClass) -> Extension:
    """A short exact sequence representing a degree-1 class.

    Built as the pushout of 0 -> syz -> F_0 -> M -> 0 along the cocycle:
    E is generated by the generators of K followed by those of F_0, with
    one relation (-cocycle(w) | d_1(w)) per syzygy generator w.
    """
    if c.p != 1:
        raise ValueError("extension_of_class needs a degree-1 class")
    g = c.group
    m, k = g.module, g.coeffs
    n = m.modulus
    d1 = g._res.d[0]
    coc = c.cocycle().matrix  # d1.rows x k.ngens
    gk, gm = k.ngens, m.ngens
    rel_rows = []
    for r in range(k.relations.rows):
        rel_rows.append(list(k.relations.row(r)) + [0] * gm)
    for r in range(d1.rows):
        rel_rows.append([(-v) % n for v in coc.row(r)] + list(d1.row(r)))
    e = FPModule.presented(n, gk + gm, rel_rows)
    i = ModuleMap.from_rows(
        k, e, [[1 if j == a else 0 for j in range(gk + gm)] for a in range(gk)])
    p = ModuleMap.from_rows(
        e, m, [[0] * gm for _ in range(gk)]
             + [[1 if j == a else 0 for j in range(gm)] for a in range(gm)])
    return Extension(k, e, m, i, p)


def pullback_extension(x: Extension, f: ModuleMap) -> Extension:
    """Pull back 0 -> K -> E -> M -> 0 along f: N -> M."""
    if f.target != x.M:
        raise DimensionError("pullback map must land in M")
    n = x.M.modulus
    s, injs, prjs = direct_sum([x.E, f.source])
    # fiber product = kernel of (e, v) -> p(e) - f(v)
    diff = ModuleMap(s, x.M, x.p.matrix.vstack(-f.matrix))
    ep, incl = kernel_module(diff)
    # K -> E' : i(k) in the E block
    ik_rows = []
    stacked = incl.matrix.vstack(s.relations)
    for a in range(x.K.ngens):
        vec = list(x.i.matrix.row(a)) + [0] * f.source.ngens
        sol = solve(stacked, vec)
        if sol is None:
            raise AssertionError("kernel presentation missed i(K)")  # pragma: no cover
        ik_rows.append(sol[: ep.ngens])
    ip = ModuleMap.from_rows(x.K, ep, ik_rows)
    pp = incl.compose(prjs[1])
    return Extension(x.K, ep, f.source, ip, pp)


def pushout_extension(x: Extension, g: ModuleMap) -> Extension:
    """Push out 0 -> K -> E -> M -> 0 along g: K -> L."""
    if g.source != x.K:
        raise DimensionError("pushout map must start at K")
    n = x.K.modulus
    l = g.target
    ge, gl = x.E.ngens, l.ngens
    rel_rows = []
    for r in range(x.E.relations.rows):
        rel_rows.append(list(x.E.relations.row(r)) + [0] * gl)
    for r in range(l.relations.rows):
        rel_rows.append([0] * ge + list(l.relations.row(r)))
    for a in range(x.K.ngens):
        rel_rows.append(list(x.i.matrix.row(a))
                        + [(-v) % n for v in g.matrix.row(a)])
    ep = FPModule.presented(n, ge + gl, rel_rows)
    il = ModuleMap.from_rows(
        l, ep, [[1 if j == ge + a else 0 for j in range(ge + gl)] for a in range(gl)])
    pp = ModuleMap.from_rows(
        ep, x.M, x.p.matrix.row_list() + [[0] * x.M.ngens for _ in range(gl)])
    return Extension(l, ep, x.M, il, pp)


def baer_sum(x: Extension, y: Extension) -> Extension:
    """Sum of extensions: pull back the product along the diagonal of M,
    then push out along the addition map of K."""
    if x.K != y.K or x.M != y.M:
        raise DimensionError("Baer sum needs matching end modules")
    k, m = x.K, x.M
    ksum, kinjs, _ = direct_sum([k, k])
    msum, minjs, _ = direct_sum([m, m])
    esum, einjs, eprjs = direct_sum([x.E, y.E])
    i2 = ModuleMap(ksum, esum,
                   x.i.matrix.hstack(MatZN.zero(k.modulus, k.ngens, y.E.ngens)).vstack(
                   MatZN.zero(k.modulus, k.ngens, x.E.ngens).hstack(y.i.matrix)))
    p2 = ModuleMap(esum, msum,
                   x.p.matrix.hstack(MatZN.zero(k.modulus, x.E.ngens, m.ngens)).vstack(
                   MatZN.zero(k.modulus, y.E.ngens, m.ngens).hstack(y.p.matrix)))
    prod = Extension(ksum, esum, msum, i2, p2)
    diag = ModuleMap(m, msum, minjs[0].matrix + minjs[1].matrix)
    pulled = pullback_extension(prod, diag)
    add = ModuleMap(ksum, k,
                    MatZN.identity(k.modulus, k.ngens).vstack(
                        MatZN.identity(k.modulus, k.ngens)))
    return pushout_extension(pulled, add)


def splitting(x: Extension) -> ModuleMap | None:
    """A section s: M -> E with p o s = id, or None iff the class is nonzero."""
    g, coords, lam0, coc = _class_data(x)
    if any(coords):
        return None
    n = x.M.modulus
    gk, gm = x.K.ngens, x.M.ngens
    flat = [v for r in range(coc.rows) for v in coc.row(r)]
    if not flat:
        h = MatZN.zero(n, gm, gk)
    else:
        # cocycle = h precomposed with d_1 for some h: F0 -> K
        pre = _hom_complex_map(g._res, x.K, 1)
        t1 = _hom_term(g._res, x.K, 1)
        sol = solve(pre.vstack(t1.relations), flat)
        if sol is None:  # pragma: no cover - zero class always solvable
            raise AssertionError("zero class has no coboundary witness")
        hflat = sol[: gm * gk]
        h = MatZN.from_rows(n, [hflat[a * gk : (a + 1) * gk] for a in range(gm)], gk)
    smat = lam0 - h * x.i.matrix
    s = ModuleMap(x.M, x.E, smat)
    if not s.compose(x.p).eq(ModuleMap.identity(x.M)):  # pragma: no cover
        raise AssertionError("constructed section fails p o s = id")
    return s
