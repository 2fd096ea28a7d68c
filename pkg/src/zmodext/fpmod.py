"""Finitely presented modules over Z/N and their morphisms.

A module is a cokernel presentation: ``ngens`` generators subject to the
row span of ``relations``. Elements are coordinate rows of length ngens,
compared modulo relations; the Howell form of the relations gives every
coset a unique canonical representative, which makes equality, counting
and enumeration exact.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass

from .linalg import (
    DimensionError,
    MatZN,
    howell_form,
    kernel,
    row_span_contains,
    solve,
)

ENUM_BOUND = 4096


@dataclass(frozen=True)
class FPModule:
    modulus: int
    ngens: int
    relations: MatZN  # Howell form, cols == ngens

    def __post_init__(self):
        if self.relations.n != self.modulus or self.relations.cols != self.ngens:
            raise DimensionError("relations do not match module shape")
        h, _ = howell_form(self.relations)
        if h.entries != self.relations.entries or h.rows != self.relations.rows:
            raise ValueError("relations must be in Howell form; use FPModule.presented")

    # -- constructors ------------------------------------------------------

    @staticmethod
    def presented(n: int, ngens: int, rel_rows) -> "FPModule":
        rel = MatZN.from_rows(n, rel_rows, ngens)
        h, _ = howell_form(rel)
        return FPModule(n, ngens, h)

    @staticmethod
    def free(n: int, rank: int) -> "FPModule":
        return FPModule.presented(n, rank, [])

    @staticmethod
    def zero(n: int) -> "FPModule":
        return FPModule.presented(n, 0, [])

    @staticmethod
    def cyclic(n: int, d: int) -> "FPModule":
        """Z/d as a module over Z/n (d must divide n)."""
        if n % d:
            raise ValueError(f"{d} does not divide {n}")
        return FPModule.presented(n, 1, [[d % n]])

    # -- elements ----------------------------------------------------------

    def reduce(self, v) -> tuple:
        """Canonical coset representative of the element with coordinates v."""
        n = self.modulus
        v = [x % n for x in v]
        if len(v) != self.ngens:
            raise DimensionError("element length mismatch")
        for i in range(self.relations.rows):
            row = self.relations.row(i)
            c = next(k for k in range(self.ngens) if row[k])
            q = v[c] // row[c]
            if q:
                v = [(x - q * r) % n for x, r in zip(v, row)]
        return tuple(v)

    def zero_elem(self) -> tuple:
        return (0,) * self.ngens

    def gen(self, i: int) -> tuple:
        return self.reduce([1 if j == i else 0 for j in range(self.ngens)])

    def elem_eq(self, v, w) -> bool:
        return self.reduce(v) == self.reduce(w)

    def is_zero_elem(self, v) -> bool:
        return not any(self.reduce(v))

    def add(self, v, w) -> tuple:
        return self.reduce([a + b for a, b in zip(v, w)])

    def smul(self, c: int, v) -> tuple:
        return self.reduce([c * a for a in v])

    def size(self) -> int:
        """Number of elements (product of pivot values over all columns)."""
        count = 1
        pivots = {}
        for i in range(self.relations.rows):
            row = self.relations.row(i)
            c = next(k for k in range(self.ngens) if row[k])
            pivots[c] = row[c]
        for c in range(self.ngens):
            count *= pivots.get(c, self.modulus)
        return count

    def elements(self, bound: int = ENUM_BOUND):
        """All canonical representatives; errors if the count exceeds bound."""
        if self.size() > bound:
            raise ValueError(f"module has {self.size()} elements, over bound {bound}")
        pivots = {}
        for i in range(self.relations.rows):
            row = self.relations.row(i)
            c = next(k for k in range(self.ngens) if row[k])
            pivots[c] = row[c]
        ranges = [range(pivots.get(c, self.modulus)) for c in range(self.ngens)]
        return [tuple(t) for t in itertools.product(*ranges)]

    def is_zero_module(self) -> bool:
        return self.size() == 1


@dataclass(frozen=True)
class ModuleMap:
    source: FPModule
    target: FPModule
    matrix: MatZN  # source.ngens x target.ngens, acting on the right

    def __post_init__(self):
        if self.source.modulus != self.target.modulus:
            raise DimensionError("modulus mismatch between source and target")
        if self.matrix.n != self.source.modulus:
            raise DimensionError("matrix modulus mismatch")
        if (self.matrix.rows, self.matrix.cols) != (self.source.ngens, self.target.ngens):
            raise DimensionError("matrix shape does not match generator counts")
        # well-definedness: relations of the source must die in the target
        rel = self.source.relations
        if rel.rows:
            image = rel * self.matrix
            for i in range(image.rows):
                if not row_span_contains(self.target.relations, image.row(i)):
                    raise ValueError("map is not well defined: a source relation "
                                     "does not map into the target relations")

    @staticmethod
    def from_rows(source: FPModule, target: FPModule, rows) -> "ModuleMap":
        return ModuleMap(source, target,
                         MatZN.from_rows(source.modulus, rows, target.ngens))

    @staticmethod
    def identity(m: FPModule) -> "ModuleMap":
        return ModuleMap(m, m, MatZN.identity(m.modulus, m.ngens))

    @staticmethod
    def zero_map(source: FPModule, target: FPModule) -> "ModuleMap":
        return ModuleMap(source, target,
                         MatZN.zero(source.modulus, source.ngens, target.ngens))

    def apply(self, v) -> tuple:
        n = self.source.modulus
        out = [0] * self.target.ngens
        for i, c in enumerate(v):
            if c % n:
                row = self.matrix.row(i)
                out = [(x + c * r) % n for x, r in zip(out, row)]
        return self.target.reduce(out)

    def compose(self, other: "ModuleMap") -> "ModuleMap":
        """self followed by other (source of other = target of self)."""
        if other.source is not self.target and other.source != self.target:
            raise DimensionError("maps not composable")
        return ModuleMap(self.source, other.target, self.matrix * other.matrix)

    def __add__(self, other: "ModuleMap") -> "ModuleMap":
        if self.source != other.source or self.target != other.target:
            raise DimensionError("map addition mismatch")
        return ModuleMap(self.source, self.target, self.matrix + other.matrix)

    def __sub__(self, other: "ModuleMap") -> "ModuleMap":
        if self.source != other.source or self.target != other.target:
            raise DimensionError("map subtraction mismatch")
        return ModuleMap(self.source, self.target, self.matrix - other.matrix)

    def __neg__(self) -> "ModuleMap":
        return ModuleMap(self.source, self.target, -self.matrix)

    def eq(self, other: "ModuleMap") -> bool:
        """Equality as morphisms (generator matrices agree modulo target relations)."""
        if self.source != other.source or self.target != other.target:
            return False
        diff = self.matrix - other.matrix
        return all(row_span_contains(self.target.relations, diff.row(i))
                   for i in range(diff.rows))

    def is_zero(self) -> bool:
        return self.eq(ModuleMap.zero_map(self.source, self.target))


# -- kernels, cokernels, sums, tensor, hom -----------------------------------


def _submodule_presentation(ambient: FPModule, gen_rows: MatZN):
    """Present the submodule of ``ambient`` generated by the rows of gen_rows
    (together with ambient.relations, which the presentation quotients out).

    Returns (FPModule, inclusion ModuleMap).
    """
    n = ambient.modulus
    k = gen_rows.rows
    if k == 0:
        sub = FPModule.zero(n)
        return sub, ModuleMap(sub, ambient, MatZN.zero(n, 0, ambient.ngens))
    stacked = gen_rows.vstack(ambient.relations)
    ker = kernel(stacked)
    rel_rows = [list(ker.row(i))[:k] for i in range(ker.rows)]
    sub = FPModule.presented(n, k, rel_rows)
    return sub, ModuleMap(sub, ambient, gen_rows)


def kernel_module(f: ModuleMap):
    """ker(f) with its inclusion into the source."""
    n = f.source.modulus
    gs = f.source.ngens
    stacked = f.matrix.vstack(f.target.relations)
    ker = kernel(stacked)
    gen_rows = MatZN.from_rows(n, [list(ker.row(i))[:gs] for i in range(ker.rows)], gs)
    gen_rows, _ = howell_form(gen_rows)
    return _submodule_presentation(f.source, gen_rows)


def cokernel_module(f: ModuleMap):
    """coker(f) with the projection from the target."""
    n = f.target.modulus
    rel = f.target.relations.vstack(f.matrix)
    cok = FPModule.presented(n, f.target.ngens, rel.row_list())
    proj = ModuleMap(f.target, cok, MatZN.identity(n, f.target.ngens))
    return cok, proj


def image_module(f: ModuleMap):
    """im(f) as a submodule of the target, with its inclusion."""
    gen_rows, _ = howell_form(f.matrix)
    return _submodule_presentation(f.target, gen_rows)


def is_injective_map(f: ModuleMap) -> bool:
    k, _ = kernel_module(f)
    return k.is_zero_module()


def is_surjective_map(f: ModuleMap) -> bool:
    c, _ = cokernel_module(f)
    return c.is_zero_module()


def is_isomorphism(f: ModuleMap) -> bool:
    return is_injective_map(f) and is_surjective_map(f)


def direct_sum(ms):
    """Biproduct. Returns (sum, injections, projections)."""
    ms = list(ms)
    if not ms:
        raise DimensionError("direct_sum of an empty list")
    n = ms[0].modulus
    if any(m.modulus != n for m in ms):
        raise DimensionError("modulus mismatch in direct_sum")
    total = sum(m.ngens for m in ms)
    rel_rows = []
    offset = 0
    for m in ms:
        for i in range(m.relations.rows):
            row = [0] * total
            row[offset : offset + m.ngens] = list(m.relations.row(i))
            rel_rows.append(row)
        offset += m.ngens
    s = FPModule.presented(n, total, rel_rows)
    injections, projections = [], []
    offset = 0
    for m in ms:
        inj = [[1 if offset + i == j else 0 for j in range(total)] for i in range(m.ngens)]
        prj = [[1 if offset + j == i else 0 for j in range(m.ngens)] for i in range(total)]
        injections.append(ModuleMap.from_rows(m, s, inj))
        projections.append(ModuleMap.from_rows(s, m, prj))
        offset += m.ngens
    return s, injections, projections


def tensor(m1: FPModule, m2: FPModule):
    """m1 (x) m2. Returns (T, pair_index, bilinear).

    Generator (i, j) of T sits at index pair_index(i, j); bilinear(v, w)
    is the element v (x) w of T, well defined on cosets.
    """
    if m1.modulus != m2.modulus:
        raise DimensionError("modulus mismatch in tensor")
    n = m1.modulus
    g1, g2 = m1.ngens, m2.ngens
    total = g1 * g2

    def pair_index(i, j):
        return i * g2 + j

    rel_rows = []
    for r in range(m1.relations.rows):
        rr = m1.relations.row(r)
        for j in range(g2):
            row = [0] * total
            for i in range(g1):
                row[pair_index(i, j)] = rr[i]
            rel_rows.append(row)
    for r in range(m2.relations.rows):
        rr = m2.relations.row(r)
        for i in range(g1):
            row = [0] * total
            for j in range(g2):
                row[pair_index(i, j)] = rr[j]
            rel_rows.append(row)
    t = FPModule.presented(n, total, rel_rows)

    def bilinear(v, w):
        row = [0] * total
        for i in range(g1):
            for j in range(g2):
                row[pair_index(i, j)] = (v[i] * w[j]) % n
        return t.reduce(row)

    return t, pair_index, bilinear


def hom_group(m: FPModule, k: FPModule):
    """Hom(m, k) as an FPModule, with converters element <-> ModuleMap.

    A homomorphism is a choice of image in k for each generator of m,
    subject to the relations of m landing in the relations of k. The
    underlying group sits inside k^ngens; its presentation is computed as
    the kernel of the evaluation of m-relations, a map between direct
    sums of copies of k.
    """
    if m.modulus != k.modulus:
        raise DimensionError("modulus mismatch in hom_group")
    n = m.modulus
    gm, gk, rm = m.ngens, k.ngens, m.relations.rows
    ambient = direct_sum([k] * gm)[0] if gm else FPModule.zero(n)
    if rm == 0 or gm == 0:
        hom, incl = ambient, ModuleMap.identity(ambient)
    else:
        targ = direct_sum([k] * rm)[0]
        # block entry (a,b) -> (r,b) has coefficient relations[r,a]
        rows = []
        for a in range(gm):
            for b in range(gk):
                row = [0] * (rm * gk)
                for r in range(rm):
                    row[r * gk + b] = m.relations[r, a]
                rows.append(row)
        phi = ModuleMap.from_rows(ambient, targ, rows)
        hom, incl = kernel_module(phi)

    def elem_to_map(v) -> ModuleMap:
        flat = incl.apply(v)
        mat = [list(flat[a * gk : (a + 1) * gk]) for a in range(gm)]
        return ModuleMap.from_rows(m, k, mat)

    def map_to_elem(f: ModuleMap):
        if f.source != m or f.target != k:
            raise DimensionError("map does not belong to this hom group")
        flat = [f.matrix[a, b] for a in range(gm) for b in range(gk)]
        stacked = incl.matrix.vstack(ambient.relations)
        x = solve(stacked, flat)
        if x is None:
            raise ValueError("map is not in the hom group (not well defined?)")
        return hom.reduce(x[: hom.ngens])

    return hom, elem_to_map, map_to_elem


# -- resolutions and exactness ------------------------------------------------


@dataclass(frozen=True)
class FreeResolution:
    """... -> F_{depth} -> ... -> F_1 -> F_0 -> M -> 0 with all F_i free.

    ``aug`` is F_0 -> M (identity on generators); ``d[p-1]`` is the matrix
    of F_p -> F_{p-1}. Ranks of F_p are d[p-1].rows (rank of F_0 is
    module.ngens).
    """
    module: FPModule
    aug: MatZN
    d: tuple  # tuple of MatZN

    def rank(self, p: int) -> int:
        if p == 0:
            return self.module.ngens
        return self.d[p - 1].rows

    def free(self, p: int) -> FPModule:
        return FPModule.free(self.module.modulus, self.rank(p))


def free_resolution(m: FPModule, depth: int) -> FreeResolution:
    """Truncated free resolution with ``depth`` syzygy steps.

    d_1 is the relations matrix; each later differential is a generating
    set (Howell form) of the kernel of the previous one. Exactness at
    every interior stage is verified before returning.
    """
    if depth < 0:
        raise ValueError("depth must be >= 0")
    n = m.modulus
    d = []
    for p in range(depth):
        if p == 0:
            step, _ = howell_form(m.relations)
        else:
            step = kernel(d[-1])
        d.append(step)
    # verification: span(d_{p+1}) == ker(d_p)
    for p in range(len(d) - 1):
        ker_p = kernel(d[p])
        h1, _ = howell_form(d[p + 1])
        if (h1.entries, h1.rows) != (ker_p.entries, ker_p.rows):
            raise AssertionError("resolution failed exactness check")  # pragma: no cover
    return FreeResolution(m, MatZN.identity(n, m.ngens), tuple(d))


@dataclass(frozen=True)
class Complex:
    """A sequence of composable maps with zero consecutive composites."""
    maps: tuple

    def __post_init__(self):
        ms = self.maps
        for i in range(len(ms) - 1):
            if ms[i].target != ms[i + 1].source:
                raise DimensionError(f"maps {i} and {i+1} are not composable")
            if not ms[i].compose(ms[i + 1]).is_zero():
                raise ValueError(f"composite of maps {i} and {i+1} is nonzero")


def exactness_failure(maps) -> int | None:
    """Index of the first interior node where image != kernel, else None.

    Node i is the target of maps[i] and source of maps[i+1]. Ends are not
    checked; bracket a sequence with zero modules to assert injectivity or
    surjectivity.
    """
    maps = list(maps)
    for i in range(len(maps) - 1):
        f, g = maps[i], maps[i + 1]
        if f.target != g.source:
            raise DimensionError(f"maps {i} and {i+1} are not composable")
        b = f.target
        img = f.matrix.vstack(b.relations)
        # kernel of g as a subgroup of the ambient generator space of b,
        # together with b's relations
        stacked = g.matrix.vstack(g.target.relations)
        kmat = kernel(stacked)
        kgens = MatZN.from_rows(b.modulus,
                                [list(kmat.row(r))[: b.ngens] for r in range(kmat.rows)],
                                b.ngens)
        ker_span = kgens.vstack(b.relations)
        hi, _ = howell_form(img)
        hk, _ = howell_form(ker_span)
        if (hi.entries, hi.rows) != (hk.entries, hk.rows):
            return i
    return None


def is_exact(maps) -> bool:
    seq = maps.maps if isinstance(maps, Complex) else maps
    return exactness_failure(seq) is None


def restrict_scalars(m: FPModule, pair) -> FPModule:
    """View a Z/N-module as a Z/N'-module along Z/N' ->> Z/N.

    Same generators; relations are lifted verbatim (entries already lie in
    [0, N)) and augmented by N * g_i for every generator, so the result is
    killed by N.
    """
    if m.modulus != pair.n:
        raise DimensionError("module is not over the quotient ring of the pair")
    np_, n = pair.n_prime, pair.n
    rows = [list(m.relations.row(i)) for i in range(m.relations.rows)]
    for i in range(m.ngens):
        rows.append([n if j == i else 0 for j in range(m.ngens)])
    return FPModule.presented(np_, m.ngens, rows)
