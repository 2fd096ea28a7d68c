"""Deformations of modules over the square-zero extension Z/N' ->> Z/N.

The kernel J = N * Z/N' squares to zero exactly when N' divides N^2; J is
cyclic of order N'/N. For an extension xi of Z/N-modules realized over
Z/N', theta(xi): J (x) M -> K records the J-action on the middle module.
omega(M) is the canonical 2-extension built from the free cover of M, and
cup_omega(u) pushes its left end out along u, giving the obstruction
class to deforming u.
"""

from __future__ import annotations

from dataclasses import dataclass, field

from .linalg import DimensionError, MatZN, row_span_contains, solve
from .fpmod import (
    FPModule,
    ModuleMap,
    hom_group,
    is_isomorphism,
    kernel_module,
    restrict_scalars,
    tensor,
)
from .ext import (
    Extension,
    _lift_rows,
    ext_group,
    extension_of_class,
)
from .butterfly import Butterfly, TwoExtension, class_of_two_extension, \
    trivial_two_extension, validate_butterfly

# Test hook: sign of the second block in cup_omega's pushout relations
# ((u(g) | PUSHOUT_SIGN * iota(g))). The paper's pushout is along (u, -iota);
# flipping the sign negates every obstruction class and must break the
# beta-construction postcondition theta(xi) = u somewhere in the suite.
PUSHOUT_SIGN = -1


@dataclass(frozen=True)
class SquareZeroPair:
    """The ring surjection Z/N' ->> Z/N with square-zero kernel J."""

    n_prime: int
    n: int
    J: FPModule = field(init=False)

    def __post_init__(self):
        if self.n_prime % self.n:
            raise ValueError(f"{self.n} does not divide {self.n_prime}")
        if (self.n * self.n) % self.n_prime:
            raise ValueError(
                f"kernel of Z/{self.n_prime} -> Z/{self.n} is not square-zero: "
                f"{self.n_prime} does not divide {self.n}^2")
        object.__setattr__(self, "J",
                           FPModule.cyclic(self.n_prime, self.n_prime // self.n))

    def j_generator_in_ring(self) -> int:
        """The element of Z/N' generating J (the image of its generator)."""
        return self.n % self.n_prime


def as_mod_n(pair: SquareZeroPair, m: FPModule) -> FPModule:
    """Re-present an N-torsion Z/N'-module over Z/N (inverse of
    restrict_scalars on its image)."""
    if m.modulus != pair.n_prime:
        raise DimensionError("module is not over Z/N'")
    n = pair.n
    for i in range(m.ngens):
        row = [n if j == i else 0 for j in range(m.ngens)]
        if not row_span_contains(m.relations, row):
            raise ValueError("module is not killed by N")
    rows = [[x % n for x in m.relations.row(i)] for i in range(m.relations.rows)]
    return FPModule.presented(n, m.ngens, rows)


def j_tensor(pair: SquareZeroPair, m: FPModule) -> FPModule:
    """J (x)_{Z/N'} M as a Z/N-module; generator i is j (x) g_i."""
    if m.modulus != pair.n:
        raise DimensionError("module is not over Z/N")
    m_res = restrict_scalars(m, pair)
    t, pair_index, _ = tensor(pair.J, m_res)
    # generator (0, i) sits at index i since J has a single generator
    return as_mod_n(pair, t)


def theta(pair: SquareZeroPair, xi: Extension) -> ModuleMap:
    """The J-action invariant of an extension of N-torsion Z/N'-modules.

    For each generator g of M: lift along p, multiply by the generator N
    of J inside the middle module, and express the result through i. The
    answer does not depend on the lift (differences are killed because
    N * K = 0), and is a map J (x) M -> K over Z/N.
    """
    if xi.M.modulus != pair.n_prime:
        raise DimensionError("extension is not over Z/N'")
    m_n = as_mod_n(pair, xi.M)
    k_n = as_mod_n(pair, xi.K)
    np_ = pair.n_prime
    lifts = _lift_rows(xi.p, MatZN.identity(np_, xi.M.ngens))
    scaled = lifts.scale(pair.n)
    in_k = _lift_rows(xi.i, scaled)  # errors if not expressible through K
    rows = [[x % pair.n for x in in_k.row(r)] for r in range(in_k.rows)]
    return ModuleMap.from_rows(j_tensor(pair, m_n), k_n, rows)


def restrict_ext(pair: SquareZeroPair, x: Extension) -> Extension:
    """View an extension of Z/N-modules as one of Z/N'-modules."""
    k = restrict_scalars(x.K, pair)
    e = restrict_scalars(x.E, pair)
    m = restrict_scalars(x.M, pair)
    i = ModuleMap.from_rows(k, e, x.i.matrix.row_list())
    p = ModuleMap.from_rows(e, m, x.p.matrix.row_list())
    return Extension(k, e, m, i, p)


# -- omega and the cup product ------------------------------------------------


@dataclass(frozen=True)
class _OmegaData:
    two_ext: TwoExtension
    h_free: FPModule           # free Z/N'-module on M's generators
    l_mod: FPModule            # its kernel over M, an Z/N'-module
    l_incl: ModuleMap          # L -> H over Z/N'
    l_bar: FPModule            # L / NL over Z/N
    jm_to_lbar: MatZN          # left map of the 2-extension


def _omega_data(pair: SquareZeroPair, m: FPModule) -> _OmegaData:
    if m.modulus != pair.n:
        raise DimensionError("module is not over Z/N")
    np_, n = pair.n_prime, pair.n
    m_res = restrict_scalars(m, pair)
    h = FPModule.free(np_, m.ngens)
    h_map = ModuleMap(h, m_res, MatZN.identity(np_, m.ngens))
    l_mod, l_incl = kernel_module(h_map)
    # L / NL and H / NH over Z/N
    lbar_rows = l_mod.relations.row_list() + [
        [n if j == i else 0 for j in range(l_mod.ngens)] for i in range(l_mod.ngens)]
    l_bar = as_mod_n(pair, FPModule.presented(np_, l_mod.ngens, lbar_rows))
    h_bar = FPModule.free(n, m.ngens)
    l_to_h = ModuleMap.from_rows(
        l_bar, h_bar, [[x % n for x in l_incl.matrix.row(r)]
                       for r in range(l_incl.matrix.rows)])
    h_to_m = ModuleMap(h_bar, m, MatZN.identity(n, m.ngens))
    # J (x) M -> Lbar : j (x) g_a is N * e_a, which lies in L
    jm = j_tensor(pair, m)
    stacked = l_incl.matrix.vstack(h.relations)
    rows = []
    for a in range(m.ngens):
        vec = [pair.n if j == a else 0 for j in range(m.ngens)]
        sol = solve(stacked, vec)
        if sol is None:  # pragma: no cover - N*e_a is always in L
            raise AssertionError("free cover kernel misses N * generator")
        rows.append([x % n for x in sol[: l_mod.ngens]])
    jm_mat = MatZN.from_rows(n, rows, l_mod.ngens)
    jm_to_lbar = ModuleMap(jm, l_bar, jm_mat)
    # runtime check: J (x) M is exactly the kernel of Lbar -> Hbar
    ker, ker_incl = kernel_module(l_to_h)
    into_ker = ModuleMap(jm, ker,
                         _lift_rows(ModuleMap(ker, l_bar, ker_incl.matrix), jm_mat))
    if not is_isomorphism(into_ker):  # pragma: no cover - Tor computation bug
        raise AssertionError("J (x) M does not match ker(L/NL -> H/NH)")
    two_ext = TwoExtension(jm, l_bar, h_bar, m, jm_to_lbar, l_to_h, h_to_m)
    return _OmegaData(two_ext, h, l_mod, l_incl, l_bar, jm_mat)


def omega(pair: SquareZeroPair, m: FPModule) -> TwoExtension:
    """The canonical 2-extension 0 -> J(x)M -> L/NL -> H/NH -> M -> 0 from
    the free Z/N'-cover H of M."""
    return _omega_data(pair, m).two_ext


def cup_omega(pair: SquareZeroPair, m: FPModule, u: ModuleMap) -> TwoExtension:
    """Pushout of omega's left end along u: j_tensor(pair, m) -> K.

    The middle is X = (K (+) L/NL) / <(u(g), -iota(g))>; the class of the
    result in Ext^2(M, K) is the obstruction to deforming u. M is passed
    explicitly because the tensor presentation alone does not determine it.
    """
    data = _omega_data(pair, m)
    if u.source != data.two_ext.K:
        raise DimensionError("u does not start at J (x) M")
    k = u.target
    n = pair.n
    l_bar = data.l_bar
    gk, gl = k.ngens, l_bar.ngens
    rel_rows = []
    for r in range(k.relations.rows):
        rel_rows.append(list(k.relations.row(r)) + [0] * gl)
    for r in range(l_bar.relations.rows):
        rel_rows.append([0] * gk + list(l_bar.relations.row(r)))
    for a in range(u.source.ngens):
        rel_rows.append(list(u.matrix.row(a))
                        + [(PUSHOUT_SIGN * x) % n for x in data.jm_to_lbar.row(a)])
    x_mod = FPModule.presented(n, gk + gl, rel_rows)
    k_to_x = ModuleMap.from_rows(
        k, x_mod, [[1 if j == a else 0 for j in range(gk + gl)] for a in range(gk)])
    x_to_h = ModuleMap.from_rows(
        x_mod, data.two_ext.Y,
        [[0] * data.two_ext.Y.ngens for _ in range(gk)]
        + data.two_ext.x_to_y.matrix.row_list())
    return TwoExtension(k, x_mod, data.two_ext.Y, data.two_ext.M,
                        k_to_x, x_to_h, data.two_ext.y_to_m)


# -- the deformation problem --------------------------------------------------


@dataclass(frozen=True)
class ThetaMatrix:
    """theta as a linear map between the finite groups
    Ext^1_{Z/N'}(M, K) (re-presented over Z/N) and Hom(J(x)M, K)."""

    pair: SquareZeroPair
    m: FPModule
    k: FPModule
    ext_prime: object           # ExtGroup over Z/N'
    domain: FPModule            # its N-torsion avatar over Z/N
    hom: FPModule               # Hom(J(x)M, K) over Z/N
    map: ModuleMap              # domain -> hom
    hom_elem_to_map: object = field(repr=False)
    hom_map_to_elem: object = field(repr=False)


_theta_cache: dict = {}


def theta_matrix(pair: SquareZeroPair, m: FPModule, k: FPModule) -> ThetaMatrix:
    key = (pair.n_prime, pair.n,
           (m.ngens, m.relations.entries), (k.ngens, k.relations.entries))
    hit = _theta_cache.get(key)
    if hit is not None:
        return hit
    m_res = restrict_scalars(m, pair)
    k_res = restrict_scalars(k, pair)
    gp = ext_group(1, m_res, k_res)
    domain = as_mod_n(pair, gp.group)
    homg, e2m, m2e = hom_group(j_tensor(pair, m), k)
    rows = []
    for a in range(gp.group.ngens):
        cls = gp.class_from_coords(
            [1 if i == a else 0 for i in range(gp.group.ngens)])
        xi = extension_of_class(cls)
        u = theta(pair, xi)
        rows.append(list(m2e(u)))
    mat = ModuleMap.from_rows(domain, homg, rows) if domain.ngens else \
        ModuleMap(domain, homg, MatZN.zero(pair.n, 0, homg.ngens))
    tm = ThetaMatrix(pair, m, k, gp, domain, homg, mat, e2m, m2e)
    _theta_cache[key] = tm
    return tm


@dataclass(frozen=True)
class Deformation:
    """An extension of Z/N'-modules realizing a prescribed u: J(x)M -> K."""

    pair: SquareZeroPair
    m: FPModule
    u: ModuleMap
    xi: Extension

    def __post_init__(self):
        if not theta(self.pair, self.xi).eq(self.u):
            raise ValueError("theta(xi) != u")


def solve_deformation(pair: SquareZeroPair, m: FPModule,
                      u: ModuleMap) -> Deformation | None:
    """An extension over Z/N' with theta = u, or None if obstructed.

    Runs the linear criterion (u in the image of the theta matrix) and the
    obstruction criterion (class of cup_omega(u) vanishes) on every call;
    disagreement means a sign convention is broken and raises.
    """
    tm = theta_matrix(pair, m, u.target)
    ucoords = list(tm.hom_map_to_elem(u))
    if tm.domain.ngens:
        sol = solve(tm.map.matrix.vstack(tm.hom.relations), ucoords)
        sol = sol[: tm.domain.ngens] if sol is not None else None
    else:
        sol = [] if tm.hom.is_zero_elem(ucoords) else None
    obstruction = class_of_two_extension(cup_omega(pair, m, u))
    if (sol is not None) != obstruction.is_zero():
        raise RuntimeError(
            "deformation criteria disagree: theta-matrix solvability is "
            f"{sol is not None} but the cup_omega obstruction class is "
            f"{'zero' if obstruction.is_zero() else 'nonzero'}")
    if sol is None:
        return None
    cls = tm.ext_prime.class_from_coords(sol)
    xi = extension_of_class(cls)
    return Deformation(pair, m, u, xi)


def extension_from_splitting(pair: SquareZeroPair, m: FPModule, u: ModuleMap,
                             b: Butterfly) -> Extension:
    """The beta construction: turn a splitting butterfly of cup_omega(u)
    into an actual deformation.

    The middle module is the pushout Z = H (+)_L Q~ over Z/N' (H the free
    cover, Q~ the butterfly middle with restored Z/N'-structure); xi is
    the kernel of the induced map Z -> H/NH, with theta(xi) = u verified.
    """
    k = u.target
    data = _omega_data(pair, m)
    cup = cup_omega(pair, m, u)
    if b.source != cup:
        raise ValueError("butterfly source is not cup_omega(u)")
    if b.target != trivial_two_extension(k, m):
        raise ValueError("butterfly target is not the trivial 2-extension")
    ok, why = validate_butterfly(b)
    if not ok:
        raise ValueError(f"invalid splitting butterfly: {why}")
    np_, n = pair.n_prime, pair.n
    gk, gl = k.ngens, data.l_bar.ngens
    gh, gq = data.h_free.ngens, b.Q.ngens
    q_res = restrict_scalars(b.Q, pair)
    # lambda: L -> Q over Z/N' via the second-block inclusion Lbar -> X
    # followed by the X -> Q wing
    lam_rows = [list(b.i_x.matrix.row(gk + a)) for a in range(gl)]
    rel_rows = []
    for r in range(q_res.relations.rows):
        rel_rows.append([0] * gh + list(q_res.relations.row(r)))
    for i in range(data.l_mod.ngens):
        rel_rows.append(list(data.l_incl.matrix.row(i))
                        + [(-x) % np_ for x in lam_rows[i]])
    z = FPModule.presented(np_, gh + gq, rel_rows)
    # Phi: Z -> H/NH over Z/N' (identity on the H block, the Q -> Hbar wing
    # on the Q block)
    hbar_prime = FPModule.presented(
        np_, gh, [[n if j == i else 0 for j in range(gh)] for i in range(gh)])
    phi_rows = [[1 if j == i else 0 for j in range(gh)] for i in range(gh)] \
        + [list(b.p_y.matrix.row(a)) for a in range(gq)]
    phi = ModuleMap.from_rows(z, hbar_prime, phi_rows)
    m_prime, incl = kernel_module(phi)
    # p: M' -> M via the H block
    m_res = restrict_scalars(m, pair)
    z_to_m = ModuleMap.from_rows(
        z, m_res, [[1 if j == i else 0 for j in range(gh)] for i in range(gh)]
                  + [[0] * gh for _ in range(gq)])
    p = incl.compose(z_to_m)
    # i: K -> M' via the K -> Q wing in the Q block
    k_res = restrict_scalars(k, pair)
    k_rows = MatZN.from_rows(
        np_, [[0] * gh + list(b.i_xp.matrix.row(a)) for a in range(gk)], gh + gq)
    i_mat = _lift_rows(ModuleMap(m_prime, z, incl.matrix), k_rows)
    i = ModuleMap(k_res, m_prime, i_mat)
    xi = Extension(k_res, m_prime, m_res, i, p)
    if not theta(pair, xi).eq(u):
        raise ValueError("constructed extension has theta(xi) != u")
    return xi
