"""The five canonical good splittings of an HL pair and their diagnostics.

Every splitting is an invertible matrix from graded coordinates (columns
ordered as in the pair's graded model) to V.  ``omega1`` peels the outer
layers with ``e^r``; ``phi1`` assembles the unique lifts of the primitive
pieces; ``omega2``/``phi2`` are the transpose-duals of those; ``phi3`` is the
good splitting whose conjugated ``e`` differs from the graded ``e`` by lowest
weight vectors of the adjoint sl2 action.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from functools import cached_property, lru_cache
from typing import NamedTuple

from .exactla import (
    ONE,
    ZERO,
    LinAlgError,
    Mat,
    NonUnique,
    NoSolution,
    Singular,
    hstack,
    kernel,
    vstack,
)
from .filt import dual_index_map
from .hlpair import (
    HLPair,
    PrimitiveDecomp,
    check_hl,
    dual_pair,
    lower_f,
    make_pair,
    primitives,
    standard_e,
)

METHODS = ("omega1", "omega2", "phi1", "phi2", "phi3")


class SplittingError(RuntimeError):
    pass


class RangeTooSmall(SplittingError):
    pass


class NotGood(SplittingError):
    pass


class NoLift(SplittingError):
    pass


class NonUniqueLift(SplittingError):
    pass


class AdSolveNonUnique(SplittingError):
    pass


class AdSolveInfeasible(SplittingError):
    pass


class PairMismatch(ValueError):
    pass


class HLRequired(ValueError):
    pass


class Phi3Step(NamedTuple):
    degree: int
    correction: Mat  # psi of degree (degree - 2), graded coordinates
    residual: Mat  # e~^{degree} before the correction, graded coordinates


@dataclass(frozen=True, eq=False)
class Splitting:
    pair: HLPair
    matrix: Mat
    method: str
    trace: tuple = field(default=(), repr=False)

    @cached_property
    def inverse(self) -> Mat:
        return self.matrix.inverse()

    @cached_property
    def pld_matrix(self) -> Mat:
        """Columns indexed by the PLD labels instead of the graded basis."""
        return self.matrix @ primitives(self.pair).eps

    def __eq__(self, other) -> bool:
        if not isinstance(other, Splitting):
            return NotImplemented
        return self.pair is other.pair and self.matrix == other.matrix

    __hash__ = object.__hash__


def _require_hl(pair: HLPair) -> None:
    rep = check_hl(pair)
    if not rep.ok:
        raise HLRequired(rep.reason)


def _memo(pair: HLPair, key: str, build):
    # pairs are immutable, so splittings can live on the instance
    store = pair.__dict__.setdefault("_splittings", {})
    if key not in store:
        store[key] = build()
    return store[key]


def _e_power(pair: HLPair, k: int) -> Mat:
    cache = pair.__dict__.setdefault("_e_powers", [Mat.identity(pair.dim)])
    while len(cache) <= k:
        cache.append(pair.e @ cache[-1])
    return cache[k]


def is_good(pair: HLPair, m: Mat) -> bool:
    gm = pair.model
    g = gm.basis_inv @ m
    piece = gm.piece_of
    n = pair.dim
    for a in range(n):
        row = g.row(a)
        for b in range(n):
            x = row[b]
            if piece[a] > piece[b] and x:
                return False
            if piece[a] == piece[b] and x != (ONE if a == b else ZERO):
                return False
    return True


def make_good(pair: HLPair, m: Mat, method: str = "") -> Splitting:
    """Wrap a filtered isomorphism, precomposing with the inverse of its graded part."""
    gm = pair.model
    g = gm.basis_inv @ m
    piece = gm.piece_of
    n = pair.dim
    for a in range(n):
        for b in range(n):
            if piece[a] > piece[b] and g[a, b]:
                raise NotGood("map is not filtered")
    diag = Mat.diag_blocks(
        [g.take(rows=list(gm.span(p)), cols=list(gm.span(p))) for p in gm.indices]
    ) if n else Mat.zeros(0, 0)
    if not diag.is_identity():
        try:
            m = m @ diag.inverse()
        except Singular:
            raise NotGood("graded part is not invertible") from None
    return Splitting(pair, m, method)


# -- omega1 / omega2 -----------------------------------------------------------


class Peel(NamedTuple):
    i_a: Mat
    top: Mat
    kernel_pair: HLPair
    kernel_basis: Mat
    w: Mat


def peel(pair: HLPair) -> Peel:
    """Unwrap the outer layer ``Gr_{-r} (+) Gr_r`` using ``l = e^r``."""
    r = pair.r
    if r == 0:
        raise RangeTooSmall("peeling needs r >= 1")
    gm = pair.model
    ell = _e_power(pair, r)
    i_a = gm.section(-r)
    p_b = gm.projection(r)
    l_a = p_b @ ell @ i_a
    top = ell @ i_a @ l_a.inverse()
    ker = kernel(vstack([p_b @ ell, p_b]))
    basis = ker.basis
    w = hstack([i_a, basis, top])
    w_inv = w.inverse()
    d = i_a.cols
    k = basis.cols
    e_k = w_inv.block(d, d + k, 0, pair.dim) @ pair.e @ basis
    sub = make_pair(pair.space.restrict(basis), e_k, center=False)
    return Peel(i_a, top, sub, basis, w)


def _omega1_matrix(pair: HLPair) -> Mat:
    gm = pair.model
    if pair.r == 0:
        return gm.basis
    r = pair.r
    pe = peel(pair)
    sub = pe.kernel_pair
    inner = _omega1_matrix(sub)
    blocks = []
    for p in gm.indices:
        if gm.dims[p] == 0:
            continue
        if p == -r:
            blocks.append(pe.i_a)
        elif p == r:
            blocks.append(pe.top)
        else:
            sm = sub.model
            cols = inner.take(cols=list(sm.span(p)))
            iota = gm.projection(p) @ pe.kernel_basis @ sm.section(p)
            blocks.append(pe.kernel_basis @ cols @ iota.inverse())
    return hstack(blocks, rows=pair.dim)


def omega1(pair: HLPair) -> Splitting:
    _require_hl(pair)
    return _memo(pair, "omega1", lambda: make_good(pair, _omega1_matrix(pair), "omega1"))


def dualize_splitting(pair: HLPair, s: Splitting) -> Splitting:
    """Turn a good splitting of the dual pair into one of ``pair``: ``((s)^T)^-1``."""
    if s.pair.dim != pair.dim:
        raise PairMismatch("splitting belongs to a pair of another dimension")
    inv_t = s.matrix.T.inverse()
    m = inv_t.take(cols=dual_index_map(pair.model))
    return make_good(pair, m, s.method)


def omega2(pair: HLPair) -> Splitting:
    _require_hl(pair)

    def build():
        out = dualize_splitting(pair, omega1(dual_pair(pair)))
        return Splitting(pair, out.matrix, "omega2")

    return _memo(pair, "omega2", build)


# -- phi1 / phi2 -----------------------------------------------------------------


def lift_fi(pair: HLPair, i: int) -> Mat:
    """The unique lift ``f_i : P_{-i} -> F_{-i}`` killed by ``V -e^s-> V/F_{s-1}`` for ``s > i``."""
    _require_hl(pair)
    r = pair.r
    if not 0 <= i <= r:
        raise ValueError(f"i must lie in [0, {r}]")
    gm = pair.model
    prim = primitives(pair).prim[i]
    x0 = gm.section(-i) @ prim
    low = gm.sections_below(-i - 1)
    a_rows, b_rows = [], []
    for s in range(i + 1, r + 1):
        es = _e_power(pair, s)
        proj = gm.projection_from(s)
        a_rows.append(proj @ es @ low)
        b_rows.append(-(proj @ es @ x0))
    if low.cols == 0:
        if any(not b.is_zero() for b in b_rows):
            raise NoLift(f"no lift of P_-{i} exists")
        return x0
    a = vstack(a_rows, cols=low.cols)
    b = vstack(b_rows, cols=x0.cols)
    try:
        y = _solve_unique(a, b)
    except NonUnique:
        raise NonUniqueLift(f"lift of P_-{i} is not unique") from None
    except NoSolution:
        raise NoLift(f"no lift of P_-{i} exists") from None
    return x0 + low @ y


def _solve_unique(a: Mat, b: Mat) -> Mat:
    from .exactla import solve

    return solve(a, b)


def phi1(pair: HLPair) -> Splitting:
    _require_hl(pair)
    return _memo(pair, "phi1", lambda: _phi1(pair))


def _phi1(pair: HLPair) -> Splitting:
    pld = primitives(pair)
    lifts = {i: lift_fi(pair, i) for i in range(pair.r + 1)}
    cols = []
    for lab in pld.labels:
        f = lifts[lab.i]
        cols.append(_e_power(pair, lab.j).apply(f.column(lab.k)))
    m_pld = Mat.from_columns(cols, rows=pair.dim)
    return make_good(pair, m_pld @ pld.eps_inv, "phi1")


def phi2(pair: HLPair) -> Splitting:
    _require_hl(pair)

    def build():
        out = dualize_splitting(pair, phi1(dual_pair(pair)))
        return Splitting(pair, out.matrix, "phi2")

    return _memo(pair, "phi2", build)


# -- conjugated e ----------------------------------------------------------------


def _pieces_graded(pair: HLPair) -> tuple:
    return pair.model.piece_of


def _pieces_pld(pair: HLPair) -> tuple:
    return tuple(lab.p for lab in primitives(pair).labels)


def homogeneous_part(m: Mat, pieces: tuple, d: int) -> Mat:
    """Entries from piece p to piece p + d; everything else zeroed."""
    n = m.cols
    return Mat._raw(
        tuple(
            tuple(x if pieces[a] - pieces[b] == d else ZERO for b, x in enumerate(row))
            for a, row in enumerate(m._r)
        ),
        n,
    )


@dataclass(frozen=True, eq=False)
class EMatrix:
    full: Mat
    parts: dict  # degree -> homogeneous part (graded coordinates)

    def part(self, d: int) -> Mat:
        return self.parts.get(d, Mat.zeros(self.full.rows, self.full.cols))


def e_tilde(pair: HLPair, s: Splitting) -> EMatrix:
    full = s.inverse @ pair.e @ s.matrix
    pieces = _pieces_graded(pair)
    degs = sorted({pa - pb for pa in pieces for pb in pieces})
    parts = {d: homogeneous_part(full, pieces, d) for d in degs}
    return EMatrix(full, parts)


@dataclass(frozen=True, eq=False)
class EHat:
    """``e`` in PLD coordinates; ``blocks[(i, j), (k, l)]`` maps the (i, j) to the (k, l) component."""

    full: Mat
    pld: PrimitiveDecomp
    blocks: dict

    def block(self, i: int, j: int, k: int, l: int) -> Mat:
        got = self.blocks.get(((i, j), (k, l)))
        if got is None:
            return Mat.zeros(self.pld.q(k), self.pld.q(i))
        return got


def e_hat(pair: HLPair, s: Splitting) -> EHat:
    pld = primitives(pair)
    full = pld.eps_inv @ e_tilde(pair, s).full @ pld.eps
    strings = sorted({(l.i, l.j) for l in pld.labels})
    blocks = {}
    for src in strings:
        cols = pld.columns_of(*src)
        for tgt in strings:
            blk = full.take(rows=pld.columns_of(*tgt), cols=cols)
            if not blk.is_zero():
                blocks[(src, tgt)] = blk
    return EHat(full, pld, blocks)


def graded_e_full(pair: HLPair) -> Mat:
    return lower_f(pair).e


def is_e_good(pair: HLPair, s: Splitting) -> bool:
    """``e~(s)`` is homogeneous of degree 2; cross-checked against ``e^{i+1} s|P_{-i} = 0``."""
    by_matrix = e_tilde(pair, s).full == graded_e_full(pair)
    pld = primitives(pair)
    by_primitives = True
    for i in range(pair.r + 1):
        cols = pld.columns_of(i, 0)
        if not cols:
            continue
        emb = s.matrix @ pld.eps.take(cols=cols)
        if not (_e_power(pair, i + 1) @ emb).is_zero():
            by_primitives = False
            break
    if by_matrix != by_primitives:
        raise AssertionError("the two e-goodness criteria disagree")
    return by_matrix


def chardel1_check(pair: HLPair, s: Splitting) -> bool:
    """Block pattern of ``e^(s)`` that singles out phi1 among good splittings.

    Out of an (i, j) component with ``j < i`` only the identity to (i, j+1)
    may appear; out of (i, i) only components (k, l) with ``l <= i``.
    """
    eh = e_hat(pair, s)
    pld = eh.pld
    for (src, tgt), blk in eh.blocks.items():
        i, j = src
        k, l = tgt
        if j < i:
            if (k, l) != (i, j + 1):
                return False
        elif l > i:
            return False
    for i in range(pair.r + 1):
        for j in range(i):
            if pld.q(i) and eh.block(i, j, i, j + 1) != Mat.identity(pld.q(i)):
                return False
    return True


# -- phi3 ---------------------------------------------------------------------


def _ad(e_std: Mat, u: Mat, times: int = 1) -> Mat:
    for _ in range(times):
        u = e_std @ u - u @ e_std
    return u


@lru_cache(maxsize=None)
def _string_solver(i_src: int, i_tgt: int, k: int):
    """Inverse of ``ad(e)^k`` on scalar maps V(i_src) -> V(i_tgt), degree -k onto degree k.

    Entries are indexed by (row j', col j); the piece of string position j of
    V(i) is ``-i + 2j``.
    """
    def deg(jt, js):
        return (-i_tgt + 2 * jt) - (-i_src + 2 * js)

    src_idx = [(jt, js) for jt in range(i_tgt + 1) for js in range(i_src + 1) if deg(jt, js) == -k]
    tgt_idx = [(jt, js) for jt in range(i_tgt + 1) for js in range(i_src + 1) if deg(jt, js) == k]
    if len(src_idx) != len(tgt_idx):
        raise AdSolveNonUnique(f"ad^{k} is not square on Hom(V({i_src}), V({i_tgt}))")
    if not src_idx:
        return (), (), None
    e_s = Mat([[ONE if a == b + 1 else ZERO for b in range(i_src + 1)] for a in range(i_src + 1)], i_src + 1)
    e_t = Mat([[ONE if a == b + 1 else ZERO for b in range(i_tgt + 1)] for a in range(i_tgt + 1)], i_tgt + 1)
    cols = []
    for jt, js in src_idx:
        u = [[ZERO] * (i_src + 1) for _ in range(i_tgt + 1)]
        u[jt][js] = ONE
        um = Mat(u, i_src + 1)
        for _ in range(k):
            um = e_t @ um - um @ e_s
        cols.append([um[a, b] for a, b in tgt_idx])
    op = Mat.from_columns(cols, rows=len(tgt_idx))
    try:
        inv = op.inverse()
    except Singular:
        raise AdSolveNonUnique(f"ad^{k} is singular on Hom(V({i_src}), V({i_tgt}))") from None
    return tuple(src_idx), tuple(tgt_idx), inv


def _ad_solve(pld: PrimitiveDecomp, rhs: Mat, k: int) -> Mat:
    """The unique ``psi`` of degree ``-k`` (PLD coordinates) with ``ad(e)^k psi = rhs``."""
    n = rhs.rows
    out = [[ZERO] * n for _ in range(n)]
    strings = [i for i in sorted(pld.prim) if pld.q(i)]
    for i_src in strings:
        for i_tgt in strings:
            src_idx, tgt_idx, inv = _string_solver(i_src, i_tgt, k)
            if inv is None:
                continue
            rhs_blocks = [
                rhs.take(rows=pld.columns_of(i_tgt, jt), cols=pld.columns_of(i_src, js))
                for jt, js in tgt_idx
            ]
            for u, (jt, js) in enumerate(src_idx):
                acc = None
                for t, blk in enumerate(rhs_blocks):
                    c = inv[u, t]
                    if c:
                        acc = blk.scale(c) if acc is None else acc + blk.scale(c)
                if acc is None:
                    continue
                rows = pld.columns_of(i_tgt, jt)
                cols = pld.columns_of(i_src, js)
                for a, ra in enumerate(rows):
                    for b, cb in enumerate(cols):
                        out[ra][cb] = acc[a, b]
    return Mat(out, n)


def _unipotent_inverse(psi: Mat) -> Mat:
    n = psi.rows
    out = Mat.identity(n)
    term = Mat.identity(n)
    neg = -psi
    while True:
        term = term @ neg
        if term.is_zero():
            return out
        out = out + term


def phi3(pair: HLPair, start: Splitting | None = None) -> tuple[Splitting, tuple]:
    """Correct a good splitting degree by degree until ``ad(e)^{1-d} e~^{d} = 0`` for all ``d <= 1``.

    At degree d the correction ``psi`` of degree ``d - 2`` solves
    ``ad(e)^{2-d} psi = -ad(e)^{1-d} e~^{d}``.  The solve is carried out in PLD
    coordinates, where ``ad(e)`` acts only on the string factor, so it splits
    into small scalar systems, one per pair of strings.
    """
    _require_hl(pair)
    if start is None:
        return _memo(pair, "phi3", lambda: _phi3(pair, phi1(pair)))
    return _phi3(pair, start)


def _phi3(pair: HLPair, start: Splitting) -> tuple[Splitting, tuple]:
    if start.pair is not pair and start.pair.dim != pair.dim:
        raise PairMismatch("start splitting belongs to another pair")
    if not is_good(pair, start.matrix):
        raise NotGood("phi3 must start from a good splitting")
    pld = primitives(pair)
    e_std = standard_e(pld)
    pieces = _pieces_pld(pair)
    phi = start.matrix @ pld.eps
    cur = phi.inverse() @ pair.e @ phi
    r = pair.r
    trace = []
    for d in range(1, -2 * r - 1, -1):
        part = homogeneous_part(cur, pieces, d)
        resid = _ad(e_std, part, 1 - d)
        if resid.is_zero():
            continue
        k = 2 - d
        psi = _ad_solve(pld, -resid, k)
        if _ad(e_std, psi, k) != -resid:
            raise AdSolveInfeasible(f"correction at degree {d} failed verification")
        u = Mat.identity(pair.dim) + psi
        phi = phi @ u
        cur = _unipotent_inverse(psi) @ cur @ u
        trace.append(
            Phi3Step(d, pld.eps @ psi @ pld.eps_inv, pld.eps @ part @ pld.eps_inv)
        )
    for d in range(1, -2 * r - 1, -1):
        if not _ad(e_std, homogeneous_part(cur, pieces, d), 1 - d).is_zero():
            raise AdSolveInfeasible(f"condition fails at degree {d} after correction")
    out = make_good(pair, phi @ pld.eps_inv, "phi3")
    out = Splitting(pair, out.matrix, "phi3", tuple(trace))
    return out, tuple(trace)


def condtr_holds(pair: HLPair, s: Splitting) -> bool:
    """``ad(e')^{1-d} e~(s)^{d} = 0`` for every ``d <= 1``, in graded coordinates."""
    et = e_tilde(pair, s)
    eg = graded_e_full(pair)
    for d in range(1, -2 * pair.r - 1, -1):
        if not _ad(eg, et.part(d), 1 - d).is_zero():
            return False
    return True


def fX_check(pair: HLPair, s: Splitting) -> bool:
    """``[f', X] = 0`` for ``X = e~(s) - e'`` (the lowering operator from the PLD)."""
    sl2 = lower_f(pair)
    x = e_tilde(pair, s).full - sl2.e
    return sl2.f @ x == x @ sl2.f


def e_good_exists(pair: HLPair) -> Splitting | None:
    s, _ = phi3(pair)
    return s if is_e_good(pair, s) else None


# -- comparisons and bundles ---------------------------------------------------


class Comparison(NamedTuple):
    equal: bool
    difference: Mat
    agreeing_pieces: frozenset


def compare(a: Splitting, b: Splitting) -> Comparison:
    if a.pair.dim != b.pair.dim or a.pair.model.labels != b.pair.model.labels:
        raise PairMismatch("splittings belong to different pairs")
    diff = a.matrix - b.matrix
    gm = a.pair.model
    agree = frozenset(
        p
        for p in gm.indices
        if gm.dims[p] and diff.take(cols=list(gm.span(p))).is_zero()
    )
    return Comparison(diff.is_zero(), diff, agree)


def all_splittings(pair: HLPair) -> dict[str, Splitting]:
    return {
        "omega1": omega1(pair),
        "omega2": omega2(pair),
        "phi1": phi1(pair),
        "phi2": phi2(pair),
        "phi3": phi3(pair)[0],
    }


def splitting(pair: HLPair, method: str) -> Splitting:
    fn = {"omega1": omega1, "omega2": omega2, "phi1": phi1, "phi2": phi2}.get(method)
    if fn is not None:
        return fn(pair)
    if method == "phi3":
        return phi3(pair)[0]
    raise ValueError(f"unknown method {method!r}")


__all__ = [
    "METHODS",
    "Splitting",
    "EMatrix",
    "EHat",
    "Phi3Step",
    "Peel",
    "Comparison",
    "LinAlgError",
    "peel",
    "omega1",
    "omega2",
    "dualize_splitting",
    "lift_fi",
    "phi1",
    "phi2",
    "phi3",
    "e_tilde",
    "e_hat",
    "is_good",
    "make_good",
    "is_e_good",
    "chardel1_check",
    "condtr_holds",
    "fX_check",
    "e_good_exists",
    "compare",
    "all_splittings",
    "splitting",
    "homogeneous_part",
]
