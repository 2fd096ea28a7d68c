"""2-extensions 0 -> K -> X -> Y -> M -> 0 and the butterfly calculus.

A butterfly between two 2-extensions with the same ends is a module Q
with four wing maps whose two diagonals are short exact sequences. Sign
conventions here are rigid: the projection wing of an induced butterfly
is "X' -> Y' minus Y -> Y'", and consequently the M-side diamond
anti-commutes (m o pY + m' o pY' = 0) while the K-side diamond commutes.
These are exactly the conventions under which butterfly-connected
2-extensions have equal Ext^2 classes; the class-preservation tests lock
them in place.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass

from .linalg import MatZN, howell_form, kernel, solve
from .fpmod import (
    DimensionError,
    FPModule,
    ModuleMap,
    direct_sum,
    image_module,
    is_exact,
    kernel_module,
    cokernel_module,
)
from .ext import (
    ExtClass,
    Extension,
    cached_resolution,
    ext_group,
    extension_of_class,
    pullback_extension,
    _lift_rows,
)

# Test hook: the sign on the Y-component of the induced butterfly's
# second projection. Flipping it to +1 must break validation (the
# mutation-sensitivity guard on the minus convention).
PROJECTION_SIGN = -1


@dataclass(frozen=True)
class TwoExtension:
    K: FPModule
    X: FPModule
    Y: FPModule
    M: FPModule
    k_to_x: ModuleMap
    x_to_y: ModuleMap
    y_to_m: ModuleMap

    def __post_init__(self):
        if (self.k_to_x.source, self.k_to_x.target) != (self.K, self.X):
            raise DimensionError("k_to_x endpoints wrong")
        if (self.x_to_y.source, self.x_to_y.target) != (self.X, self.Y):
            raise DimensionError("x_to_y endpoints wrong")
        if (self.y_to_m.source, self.y_to_m.target) != (self.Y, self.M):
            raise DimensionError("y_to_m endpoints wrong")
        n = self.K.modulus
        z = FPModule.zero(n)
        seq = [ModuleMap.zero_map(z, self.K), self.k_to_x, self.x_to_y,
               self.y_to_m, ModuleMap.zero_map(self.M, z)]
        if not is_exact(seq):
            raise ValueError("0 -> K -> X -> Y -> M -> 0 is not exact")

    def middle_image(self):
        """P = im(X -> Y) = ker(Y -> M), with its inclusion into Y."""
        return image_module(self.x_to_y)


def trivial_two_extension(k: FPModule, m: FPModule) -> TwoExtension:
    return TwoExtension(k, k, m, m,
                        ModuleMap.identity(k), ModuleMap.zero_map(k, m),
                        ModuleMap.identity(m))


@dataclass(frozen=True)
class ChainMap:
    """A morphism of 2-extensions (commuting ladder over fK, fM)."""
    source: TwoExtension
    target: TwoExtension
    f_k: ModuleMap
    f_x: ModuleMap
    f_y: ModuleMap
    f_m: ModuleMap

    def __post_init__(self):
        s, t = self.source, self.target
        if not self.f_k.compose(t.k_to_x).eq(s.k_to_x.compose(self.f_x)):
            raise ValueError("chain map fails to commute at K")
        if not self.f_x.compose(t.x_to_y).eq(s.x_to_y.compose(self.f_y)):
            raise ValueError("chain map fails to commute at X")
        if not self.f_y.compose(t.y_to_m).eq(s.y_to_m.compose(self.f_m)):
            raise ValueError("chain map fails to commute at Y")


@dataclass(frozen=True)
class Butterfly:
    """Equivalence data ``source ~ target`` through the middle module Q.

    Wings: i_x: X -> Q, i_xp: X' -> Q, p_y: Q -> Y, p_yp: Q -> Y' where
    primes refer to the target. Construct through ``make_butterfly`` to
    get a validity error message, or validate after the fact.
    """
    source: TwoExtension
    target: TwoExtension
    Q: FPModule
    i_x: ModuleMap
    i_xp: ModuleMap
    p_y: ModuleMap
    p_yp: ModuleMap


def validate_butterfly(b: Butterfly):
    """(True, None), or (False, first failing condition)."""
    s, t = b.source, b.target
    if s.K != t.K or s.M != t.M:
        raise DimensionError("butterfly requires equal end modules K and M")
    n = s.K.modulus
    z = FPModule.zero(n)
    if not is_exact([ModuleMap.zero_map(z, t.X), b.i_xp, b.p_y,
                     ModuleMap.zero_map(s.Y, z)]):
        return False, "diagonal 0 -> X' -> Q -> Y -> 0 is not exact"
    if not is_exact([ModuleMap.zero_map(z, s.X), b.i_x, b.p_yp,
                     ModuleMap.zero_map(t.Y, z)]):
        return False, "diagonal 0 -> X -> Q -> Y' -> 0 is not exact"
    if not b.i_x.compose(b.p_y).eq(s.x_to_y):
        return False, "north diamond (X -> Q -> Y vs X -> Y) does not commute"
    if not b.i_xp.compose(b.p_yp).eq(t.x_to_y):
        return False, "south diamond (X' -> Q -> Y' vs X' -> Y') does not commute"
    if not s.k_to_x.compose(b.i_x).eq(t.k_to_x.compose(b.i_xp)):
        return False, "west diamond (K into Q via both wings) does not commute"
    east = b.p_y.compose(s.y_to_m) + b.p_yp.compose(t.y_to_m)
    if not east.is_zero():
        return False, "east diamond (Q to M via both wings) does not anti-commute"
    return True, None


def make_butterfly(source, target, q, i_x, i_xp, p_y, p_yp) -> Butterfly:
    b = Butterfly(source, target, q, i_x, i_xp, p_y, p_yp)
    ok, why = validate_butterfly(b)
    if not ok:
        raise ValueError(f"invalid butterfly: {why}")
    return b


def induced_butterfly(f: ChainMap) -> Butterfly:
    """The butterfly of a morphism of 2-extensions: Q = X' (+) Y with
    inclusion (f_x, d) and projections (y-component, d' minus f_y)."""
    s, t = f.source, f.target
    n = s.K.modulus
    q, injs, prjs = direct_sum([t.X, s.Y])
    i_x = ModuleMap(s.X, q, f.f_x.matrix.hstack(s.x_to_y.matrix))
    i_xp = injs[0]
    p_y = prjs[1]
    p_yp = ModuleMap(q, t.Y,
                     t.x_to_y.matrix.vstack(f.f_y.matrix.scale(PROJECTION_SIGN)))
    return make_butterfly(s, t, q, i_x, i_xp, p_y, p_yp)


def identity_butterfly(t: TwoExtension) -> Butterfly:
    f = ChainMap(t, t, ModuleMap.identity(t.K), ModuleMap.identity(t.X),
                 ModuleMap.identity(t.Y), ModuleMap.identity(t.M))
    return induced_butterfly(f)


def invert(b: Butterfly) -> Butterfly:
    """Flip the diagram upside-down: same Q, wings swapped."""
    return make_butterfly(b.target, b.source, b.Q, b.i_xp, b.i_x, b.p_yp, b.p_y)


def compose(b1: Butterfly, b2: Butterfly) -> Butterfly:
    """Composite butterfly: cokernel of X' -> Q x_{Y'} Q'."""
    if b1.target != b2.source:
        raise DimensionError("middle 2-extensions do not match")
    s, mid, t = b1.source, b1.target, b2.target
    n = s.K.modulus
    prod, injs, prjs = direct_sum([b1.Q, b2.Q])
    # pairs with p_yp(q1) + p_y(q2) = 0: east anti-commutation then makes
    # both composite wings to M agree up to sign on all of the fiber
    diff = ModuleMap(prod, mid.Y, b1.p_yp.matrix.vstack(b2.p_y.matrix))
    fib, incl = kernel_module(diff)
    # X' -> fib anti-diagonally; the quotient identifies the two copies of K
    xp_rows = _lift_rows(
        ModuleMap(fib, prod, incl.matrix),
        b1.i_xp.matrix.hstack(-b2.i_x.matrix))
    to_fib = ModuleMap(mid.X, fib, xp_rows)
    qq, proj = cokernel_module(to_fib)
    gq1 = b1.Q.ngens
    # wings of the composite
    ix_rows = _lift_rows(ModuleMap(fib, prod, incl.matrix),
                         b1.i_x.matrix.hstack(
                             MatZN.zero(n, s.X.ngens, b2.Q.ngens)))
    i_x = ModuleMap(s.X, fib, ix_rows).compose(proj)
    ixp_rows = _lift_rows(ModuleMap(fib, prod, incl.matrix),
                          MatZN.zero(n, t.X.ngens, b1.Q.ngens).hstack(
                              b2.i_xp.matrix))
    i_xp = ModuleMap(t.X, fib, ixp_rows).compose(proj)
    p_y = ModuleMap(qq, s.Y,
                    incl.matrix.submatrix(0, fib.ngens, 0, gq1) * b1.p_y.matrix)
    p_yp = ModuleMap(qq, t.Y,
                     incl.matrix.submatrix(0, fib.ngens, gq1, prod.ngens)
                     * b2.p_yp.matrix)
    return make_butterfly(s, t, qq, i_x, i_xp, p_y, p_yp)


# -- 2-isomorphism search -----------------------------------------------------


class _LinearSystem:
    """Accumulates scalar linear equations over Z/n in named unknowns."""

    def __init__(self, n: int, nunknowns: int):
        self.n = n
        self.nunknowns = nunknowns
        self.columns = []  # each: (dict unknown->coeff, rhs)

    def fresh(self, count: int) -> range:
        r = range(self.nunknowns, self.nunknowns + count)
        self.nunknowns += count
        return r

    def add_equation(self, coeffs: dict, rhs: int):
        self.columns.append((coeffs, rhs % self.n))

    def left_side_matrix(self):
        rows = [[0] * len(self.columns) for _ in range(self.nunknowns)]
        rhs = []
        for j, (coeffs, r) in enumerate(self.columns):
            for u, c in coeffs.items():
                rows[u][j] = c % self.n
            rhs.append(r)
        return MatZN.from_rows(self.n, rows, len(self.columns)), rhs

    def solve(self):
        """(particular solution, homogeneous kernel matrix) or (None, None)."""
        eq, rhs = self.left_side_matrix()
        x = solve(eq, rhs)
        if x is None:
            return None, None
        return x, kernel(eq)


def _map_equations(sys_, unknowns, shape, left, right, rhs, target_rel):
    """Equations for left * PSI * right == rhs modulo target relations.

    ``unknowns`` indexes PSI (shape = (rows, cols)) flat row-major; slack
    unknowns absorb the relation span of the target per output row.
    """
    rows, cols = shape
    out_rows = left.rows if left is not None else rows
    out_cols = right.cols if right is not None else cols
    for a in range(out_rows):
        slack = sys_.fresh(target_rel.rows) if target_rel.rows else range(0)
        for k in range(out_cols):
            coeffs = {}
            for i in range(rows):
                li = left[a, i] if left is not None else (1 if i == a else 0)
                if not li:
                    continue
                for j in range(cols):
                    rj = right[j, k] if right is not None else (1 if j == k else 0)
                    if rj:
                        u = unknowns[i * cols + j]
                        coeffs[u] = (coeffs.get(u, 0) + li * rj) % sys_.n
            for t, su in enumerate(slack):
                coeffs[su] = target_rel[t, k]
            sys_.add_equation(coeffs, rhs[a, k])


def find_two_isomorphism(b1: Butterfly, b2: Butterfly, search_bound: int = 262144):
    """A map psi: Q1 -> Q2 commuting with all wings and invertible, or None."""
    if b1.source != b2.source or b1.target != b2.target:
        raise DimensionError("butterflies do not share endpoints")
    if b1.Q.size() != b2.Q.size():
        return None
    n = b1.Q.modulus
    g1, g2 = b1.Q.ngens, b2.Q.ngens
    sys_ = _LinearSystem(n, g1 * g2)
    psi = list(range(g1 * g2))
    shape = (g1, g2)
    # well-definedness: relations of Q1 land in relations of Q2
    rel1 = b1.Q.relations
    z = MatZN.zero(n, rel1.rows, g2) if rel1.rows else None
    if rel1.rows:
        _map_equations(sys_, psi, shape, rel1, None, z, b2.Q.relations)
    # wing compatibility
    _map_equations(sys_, psi, shape, b1.i_x.matrix, None, b2.i_x.matrix,
                   b2.Q.relations)
    _map_equations(sys_, psi, shape, b1.i_xp.matrix, None, b2.i_xp.matrix,
                   b2.Q.relations)
    _map_equations(sys_, psi, shape, None, b2.p_y.matrix, b1.p_y.matrix,
                   b1.source.Y.relations)
    _map_equations(sys_, psi, shape, None, b2.p_yp.matrix, b1.p_yp.matrix,
                   b1.target.Y.relations)
    part, hom = sys_.solve()
    if part is None:
        return None
    hom_rows = [list(hom.row(i))[: g1 * g2] for i in range(hom.rows)]
    hom_rows = [r for r in hom_rows if any(r)]
    if hom_rows:
        hmat, _ = howell_form(MatZN.from_rows(n, hom_rows, g1 * g2))
        hom_rows = hmat.row_list()
    # enumerate the affine solution space without repetition: a Howell row
    # with pivot p has exactly n/p distinct multiples
    ranges = []
    for r in hom_rows:
        pivot = next(x for x in r if x)
        ranges.append(range(n // pivot))
    combos = itertools.product(*ranges)
    rel2 = b2.Q.relations
    for idx, combo in enumerate(combos):
        if idx >= search_bound:
            break
        flat = [part[i] for i in range(g1 * g2)]
        for c, hr in zip(combo, hom_rows):
            if c:
                flat = [(x + c * y) % n for x, y in zip(flat, hr)]
        mat = MatZN.from_rows(n, [flat[i * g2 : (i + 1) * g2] for i in range(g1)], g2)
        # surjective + equal finite size = bijective; surjectivity is a
        # trivial-cokernel test, cheap enough for the enumeration loop
        cok = FPModule.presented(n, g2, mat.vstack(rel2).row_list())
        if cok.size() == 1:
            return ModuleMap(b1.Q, b2.Q, mat)
    return None


# -- classes in Ext^2 ---------------------------------------------------------


def class_of_two_extension(t: TwoExtension) -> ExtClass:
    """The class of 0 -> K -> X -> Y -> M -> 0 in Ext^2(M, K).

    Lift the free resolution of M through Y, then X; the degree-2 layer
    lands in K and is the representing cocycle.
    """
    g = ext_group(2, t.M, t.K)
    res = cached_resolution(t.M, 3)
    n = t.M.modulus
    lam0 = _lift_rows(t.y_to_m, MatZN.identity(n, t.M.ngens))
    mu1 = _lift_rows(t.x_to_y, res.d[0] * lam0)
    coc = _lift_rows(t.k_to_x, res.d[1] * mu1)
    flat = [v for r in range(coc.rows) for v in coc.row(r)]
    if not flat:
        return g.zero()
    return g.class_of_cocycle(flat)


def yoneda_splice(gamma: Extension, m: Extension) -> TwoExtension:
    """Concatenate 0->K->X->P->0 and 0->P->Y->M->0 through P."""
    if gamma.M != m.K:
        raise DimensionError("splice requires gamma's quotient = m's sub")
    return TwoExtension(gamma.K, gamma.E, m.E, m.M,
                        gamma.i, gamma.p.compose(m.i), m.p)


def restrict_two_extension(t: TwoExtension, f: ModuleMap) -> TwoExtension:
    """Replace Y by the fiber product Y x_M N along f: N -> M."""
    if f.target != t.M:
        raise DimensionError("restriction map must land in M")
    n = t.M.modulus
    prod, injs, prjs = direct_sum([t.Y, f.source])
    diff = ModuleMap(prod, t.M, t.y_to_m.matrix.vstack(-f.matrix))
    yp, incl = kernel_module(diff)
    x_rows = _lift_rows(ModuleMap(yp, prod, incl.matrix),
                        t.x_to_y.matrix.hstack(
                            MatZN.zero(n, t.X.ngens, f.source.ngens)))
    x_to_yp = ModuleMap(t.X, yp, x_rows)
    yp_to_n = incl.compose(prjs[1])
    return TwoExtension(t.K, t.X, yp, f.source, t.k_to_x, x_to_yp, yp_to_n)


# -- splitting ----------------------------------------------------------------


def find_splitting(t: TwoExtension):
    """A butterfly from t to the trivial 2-extension, or None.

    Exists iff class_of_two_extension(t) = 0. The construction splices t
    as gamma (0->K->X->P->0) followed by m (0->P->Y->M->0); t splits iff
    gamma's class lifts along restriction Ext^1(Y,K) -> Ext^1(P,K), and a
    lift 0->K->Q->Y->0 is precisely the middle of the splitting butterfly.
    """
    k, m_mod = t.K, t.M
    n = k.modulus
    p_mod, iota = t.middle_image()
    x_to_p = ModuleMap(t.X, p_mod,
                       _lift_rows(ModuleMap(p_mod, t.Y, iota.matrix),
                                  t.x_to_y.matrix))
    gamma = Extension(k, t.X, p_mod, t.k_to_x, x_to_p)
    g_p = ext_group(1, p_mod, k)
    g_y = ext_group(1, t.Y, k)
    from .ext import class_of_extension  # local to avoid cycle at import time
    gamma_cls = class_of_extension(gamma)
    # restriction matrix Ext^1(Y,K) -> Ext^1(P,K) on generators
    res_rows = []
    for a in range(g_y.group.ngens):
        e = extension_of_class(g_y.class_from_coords(
            [1 if i == a else 0 for i in range(g_y.group.ngens)]))
        pb = pullback_extension(e, iota)
        res_rows.append(list(class_of_extension(pb).coords))
    res_mat = MatZN.from_rows(n, res_rows, g_p.group.ngens)
    sol = solve(res_mat.vstack(g_p.group.relations), list(gamma_cls.coords))
    if sol is None:
        return None
    q_ext = extension_of_class(g_y.class_from_coords(sol[: g_y.group.ngens]))
    q, pi, ik = q_ext.E, q_ext.p, q_ext.i
    # phi: X -> Q with phi;pi = x_to_y and k_to_x;phi = ik
    sys_ = _LinearSystem(n, t.X.ngens * q.ngens)
    phi = list(range(t.X.ngens * q.ngens))
    shape = (t.X.ngens, q.ngens)
    if t.X.relations.rows:
        _map_equations(sys_, phi, shape, t.X.relations, None,
                       MatZN.zero(n, t.X.relations.rows, q.ngens), q.relations)
    _map_equations(sys_, phi, shape, None, pi.matrix, t.x_to_y.matrix,
                   t.Y.relations)
    _map_equations(sys_, phi, shape, t.k_to_x.matrix, None, ik.matrix,
                   q.relations)
    part, _ = sys_.solve()
    if part is None:  # pragma: no cover - lift always exists when classes match
        raise AssertionError("splitting lift exists as a class but no map found")
    flat = part[: t.X.ngens * q.ngens]
    phi_map = ModuleMap(t.X, q, MatZN.from_rows(
        n, [flat[i * q.ngens : (i + 1) * q.ngens] for i in range(t.X.ngens)],
        q.ngens))
    triv = trivial_two_extension(k, m_mod)
    p_yp = -(pi.compose(t.y_to_m))
    return make_butterfly(t, triv, q, phi_map, ik, pi, p_yp)


def is_split_butterfly(b: Butterfly):
    """Wing data if b validates against the trivial target, else None."""
    if b.target != trivial_two_extension(b.source.K, b.source.M):
        raise DimensionError("target is not the trivial 2-extension")
    ok, _ = validate_butterfly(b)
    if not ok:
        return None
    return {"Q": b.Q, "x_to_q": b.i_x, "k_to_q": b.i_xp,
            "q_to_y": b.p_y, "q_to_m": b.p_yp}
