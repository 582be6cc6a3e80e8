"""Filtered spaces with a hard-Lefschetz endomorphism ``e: V -> V[2](1)``."""
from __future__ import annotations

import random
from dataclasses import dataclass, field
from functools import cached_property
from typing import NamedTuple

from .exactla import (
    ONE,
    ZERO,
    Mat,
    Singular,
    Subspace,
    hstack,
    kernel,
    mpq,
)
from .filt import (
    FilteredMap,
    FilteredSpace,
    FiltrationError,
    GradedModel,
    dual,
    is_filtered,
)


class FiltrationViolation(FiltrationError):
    def __init__(self, p: int, translation: int = 2):
        super().__init__(f"e does not map F_{p} into F_{p + translation}")
        self.p = p


class PLDFailure(RuntimeError):
    pass


class CommutationFailure(ValueError):
    pass


class HLFailureOnKernel(AssertionError):
    pass


@dataclass(frozen=True, eq=False)
class HLPair:
    space: FilteredSpace
    e: Mat
    twist: int = 1
    offset: int = 0
    name: str = ""
    metadata: dict = field(default_factory=dict, compare=False, repr=False)

    @property
    def dim(self) -> int:
        return self.space.ambient_dim

    @cached_property
    def model(self) -> GradedModel:
        return self.space.graded

    @cached_property
    def r(self) -> int:
        live = [abs(p) for p, d in self.model.dims.items() if d]
        return max(live, default=0)

    @cached_property
    def e_graded_coords(self) -> Mat:
        """``e`` written in the graded-model coordinates."""
        return self.model.to_graded(self.e)

    def gr_dim(self, p: int) -> int:
        return self.model.dim(p)

    def pieces(self) -> range:
        return range(-self.r, self.r + 1)


def make_pair(
    space: FilteredSpace,
    e: Mat,
    *,
    center: bool = True,
    pad: bool = False,
    twist: int = 1,
    name: str = "",
    metadata: dict | None = None,
) -> HLPair:
    """Validate ``e`` as a translation-2 filtered map and center the range on 0.

    Odd-width ranges are only centered when ``pad`` is set (the low end is
    extended by one empty step); otherwise they are left in place and the HL
    check will report them.
    """
    if e.shape != (space.ambient_dim, space.ambient_dim):
        raise ValueError("e must be a square matrix on V")
    a, b = space.type_range
    ok = is_filtered(FilteredMap(e, space, space, 2, twist))
    if not ok:
        raise FiltrationViolation(ok.p)
    shift = 0
    if center:
        if (a + b) % 2 == 0:
            shift = (a + b) // 2
        elif pad:
            shift = (a - 1 + b) // 2
    if shift:
        space = space.translate(shift)
    return HLPair(space, e, twist, shift, name, dict(metadata or {}))


# -- graded pieces -------------------------------------------------------------


def graded_e(pair: HLPair) -> dict[int, Mat]:
    """Blocks ``e'_p = projection_{p+2} o e o section_p`` for every piece p."""
    gm = pair.model
    return {p: gm.projection(p + 2) @ pair.e @ gm.section(p) for p in gm.indices}


def graded_power(pair: HLPair, p: int, k: int) -> Mat:
    """Graded ``e^k : Gr_p -> Gr_{p+2k}``."""
    blocks = _blocks(pair)
    out = Mat.identity(pair.gr_dim(p))
    for t in range(k):
        q = p + 2 * t
        out = blocks.get(q, Mat.zeros(pair.gr_dim(q + 2), pair.gr_dim(q))) @ out
    return out


def _blocks(pair: HLPair) -> dict[int, Mat]:
    cache = pair.__dict__.setdefault("_graded_e_cache", None)
    if cache is None:
        cache = graded_e(pair)
        pair.__dict__["_graded_e_cache"] = cache
    return cache


class HLReport(NamedTuple):
    ok: bool
    ranks: dict  # k -> (dim Gr_{-k}, dim Gr_k, rank of e^k)
    failing: tuple
    reason: str = ""


def check_hl(pair: HLPair) -> HLReport:
    dims = pair.model.dims
    live = [p for p, d in dims.items() if d]
    if not live:
        return HLReport(True, {0: (0, 0, 0)}, ())
    top = max(abs(p) for p in live)
    ranks = {}
    failing = []
    for k in range(top + 1):
        src, tgt = pair.gr_dim(-k), pair.gr_dim(k)
        rk = graded_power(pair, -k, k).rank() if src and tgt else 0
        ranks[k] = (src, tgt, rk)
        if not (src == tgt == rk):
            failing.append(k)
    reason = ""
    if failing:
        reason = "graded e^k is not an isomorphism Gr_-k -> Gr_k for k in " + ", ".join(map(str, failing))
    return HLReport(not failing, ranks, tuple(failing), reason)


# -- primitive Lefschetz decomposition ----------------------------------------


class PLDLabel(NamedTuple):
    p: int
    i: int
    j: int
    k: int


@dataclass(frozen=True, eq=False)
class PrimitiveDecomp:
    """Bases of the primitive pieces and the PLD isomorphism ``eps``.

    ``prim[i]`` has columns spanning ``P_{-i}`` inside ``Gr_{-i}``.  Column
    ``c`` of ``eps`` (graded coordinates) is ``e'^j`` applied to the k-th
    basis vector of ``P_{-i}`` where ``labels[c] = (p, i, j, k)``.  Labels are
    sorted by piece, then ``i``, then ``k``, so ``eps`` is block diagonal.
    """

    prim: dict
    labels: tuple
    eps: Mat
    eps_inv: Mat

    @cached_property
    def column(self) -> dict:
        return {(l.i, l.j, l.k): c for c, l in enumerate(self.labels)}

    def q(self, i: int) -> int:
        m = self.prim.get(i)
        return 0 if m is None else m.cols

    def columns_of(self, i: int, j: int) -> list[int]:
        return [self.column[(i, j, k)] for k in range(self.q(i))]


def primitives(pair: HLPair) -> PrimitiveDecomp:
    cached = pair.__dict__.get("_pld")
    if cached is not None:
        return cached
    gm = pair.model
    r = pair.r
    prim = {}
    for i in range(r + 1):
        d = pair.gr_dim(-i)
        if d == 0:
            prim[i] = Mat.zeros(0, 0)
            continue
        prim[i] = kernel(graded_power(pair, -i, i + 1)).basis
    labels = []
    for p in gm.indices:
        for i in range(abs(p), r + 1):
            if (i - p) % 2:
                continue
            j = (p + i) // 2
            labels.extend(PLDLabel(p, i, j, k) for k in range(prim[i].cols))
    n = pair.dim
    cols = []
    strings = {}
    for i in range(r + 1):
        vecs = [prim[i]]
        for j in range(1, i + 1):
            vecs.append(graded_power(pair, -i + 2 * (j - 1), 1) @ vecs[-1])
        strings[i] = vecs
    for lab in labels:
        v = [ZERO] * n
        block = strings[lab.i][lab.j]
        for t, pos in enumerate(gm.span(lab.p)):
            v[pos] = block[t, lab.k]
        cols.append(v)
    if len(labels) != n:
        raise PLDFailure(f"PLD has {len(labels)} vectors for a space of dimension {n}")
    eps = Mat.from_columns(cols, rows=n)
    try:
        eps_inv = eps.inverse()
    except Singular:
        raise PLDFailure("primitive Lefschetz map is not invertible") from None
    out = PrimitiveDecomp(prim, tuple(labels), eps, eps_inv)
    pair.__dict__["_pld"] = out
    return out


@dataclass(frozen=True, eq=False)
class Sl2Model:
    """Graded ``e'``, ``f'`` and ``h`` as full matrices in graded coordinates."""

    e: Mat
    f: Mat
    h: Mat
    e_blocks: dict
    f_blocks: dict

    def relations_hold(self) -> bool:
        ef = self.e @ self.f - self.f @ self.e
        he = self.h @ self.e - self.e @ self.h
        hf = self.h @ self.f - self.f @ self.h
        return ef == self.h and he == self.e.scale(2) and hf == self.f.scale(-2)


def standard_f(pld: PrimitiveDecomp) -> Mat:
    """Lowering operator in PLD coordinates: ``e^j x -> j(i-j+1) e^{j-1} x``."""
    n = len(pld.labels)
    rows = [[ZERO] * n for _ in range(n)]
    for c, lab in enumerate(pld.labels):
        if lab.j:
            rows[pld.column[(lab.i, lab.j - 1, lab.k)]][c] = mpq(lab.j * (lab.i - lab.j + 1))
    return Mat(rows, n)


def standard_e(pld: PrimitiveDecomp) -> Mat:
    n = len(pld.labels)
    rows = [[ZERO] * n for _ in range(n)]
    for c, lab in enumerate(pld.labels):
        if lab.j < lab.i:
            rows[pld.column[(lab.i, lab.j + 1, lab.k)]][c] = ONE
    return Mat(rows, n)


def lower_f(pair: HLPair) -> Sl2Model:
    pld = primitives(pair)
    gm = pair.model
    f = pld.eps @ standard_f(pld) @ pld.eps_inv
    n = pair.dim
    eb = graded_e(pair)
    rows = [[ZERO] * n for _ in range(n)]
    for p, blk in eb.items():
        for a, ra in enumerate(gm.span(p + 2)):
            for b, cb in enumerate(gm.span(p)):
                rows[ra][cb] = blk[a, b]
    e = Mat(rows, n)
    h = Mat.diag_blocks([Mat.identity(gm.dims[p]).scale(p) for p in gm.indices]) if n else Mat.zeros(0, 0)
    f_blocks = {
        p: f.take(rows=list(gm.span(p - 2)), cols=list(gm.span(p))) for p in gm.indices
    }
    return Sl2Model(e, f, h, eb, f_blocks)


# -- constructions -------------------------------------------------------------


def dual_pair(pair: HLPair) -> HLPair:
    """``(V^o, F^o, e^T)``; the twist is read in the opposite category's ledger."""
    return HLPair(dual(pair.space), pair.e.T, pair.twist, -pair.offset, pair.name + "^o" if pair.name else "")


def direct_sum(a: HLPair, b: HLPair, name: str = "") -> HLPair:
    n = a.dim + b.dim
    ga, gb = a.model, b.model
    idx = sorted(set(ga.indices) | set(gb.indices))
    sections = {}
    for p in idx:
        sa, sb = ga.section(p), gb.section(p)
        top = hstack([sa, Mat.zeros(a.dim, sb.cols)], rows=a.dim)
        bot = hstack([Mat.zeros(b.dim, sa.cols), sb], rows=b.dim)
        sections[p] = top.vstack(bot)
    model = GradedModel(sections, n)
    steps = {p: Subspace.span(model.sections_below(p), n) for p in idx}
    e = Mat.diag_blocks([a.e, b.e])
    return HLPair(FilteredSpace(n, steps, model=model), e, a.twist, 0, name)


def tensor_index(a: HLPair, b: HLPair) -> list[tuple[int, int]]:
    """Graded coordinates of ``a (x) b`` as pairs of graded coordinates of the factors."""
    la, lb = a.model.labels, b.model.labels
    pairs = [(g1, g2) for g1 in range(len(la)) for g2 in range(len(lb))]
    return sorted(pairs, key=lambda g: (la[g[0]][0] + lb[g[1]][0], g))


def tensor(a: HLPair, b: HLPair) -> HLPair:
    """``F_p = sum F'_{p'} (x) F''_{p''}`` and ``e = e' (x) 1 + 1 (x) e''``."""
    ga, gb = a.model, b.model
    n = a.dim * b.dim
    ba, bb = ga.basis, gb.basis
    order = tensor_index(a, b)
    piece = {}
    cols = {}
    for g1, g2 in order:
        p = ga.labels[g1][0] + gb.labels[g2][0]
        col = tuple(x * y for x in ba.column(g1) for y in bb.column(g2))
        cols.setdefault(p, []).append(col)
        piece[(g1, g2)] = p
    idx = range(min(ga.indices) + min(gb.indices), max(ga.indices) + max(gb.indices) + 1) if n else [0]
    sections = {p: Mat.from_columns(cols.get(p, []), rows=n) for p in idx}
    model = GradedModel(sections, n)
    steps = {p: Subspace.span(model.sections_below(p), n) for p in idx}
    e = a.e.kron(Mat.identity(b.dim)) + Mat.identity(a.dim).kron(b.e)
    name = f"({a.name or 'A'})(x)({b.name or 'B'})"
    return HLPair(FilteredSpace(n, steps, model=model), e, a.twist, 0, name)


class KernelResult(NamedTuple):
    pair: HLPair
    inclusion: Mat


def morphism_kernel(g: Mat, source: HLPair, target: HLPair) -> KernelResult:
    """Kernel of a filtered, e-equivariant map, verified to be an HL pair."""
    if g.shape != (target.dim, source.dim):
        raise ValueError("morphism has the wrong shape")
    ok = is_filtered(FilteredMap(g, source.space, target.space, 0, 0))
    if not ok:
        raise FiltrationViolation(ok.p, 0)
    if g @ source.e != target.e @ g:
        raise CommutationFailure("morphism does not commute with e")
    ker = kernel(g)
    inc = ker.basis
    space = source.space.restrict(inc)
    e_k = ker.coordinates(source.e @ inc)
    pair = make_pair(space, e_k, center=False, name=f"ker({source.name})")
    rep = check_hl(pair)
    if not rep.ok:
        raise HLFailureOnKernel(f"kernel violates HL: {rep.reason}")
    for p in pair.model.indices:
        gr = target.model.projection(p) @ g @ source.model.section(p)
        if pair.gr_dim(p) != gr.cols - gr.rank():
            raise HLFailureOnKernel(f"Gr_{p} of the kernel differs from the kernel of Gr_{p}")
    return KernelResult(pair, inc)


def graded_morphism(g: Mat, source: HLPair, target: HLPair) -> Mat:
    """``Gr(g)`` as a block-diagonal matrix between graded coordinates."""
    ms, mt = source.model, target.model
    rows = [[ZERO] * source.dim for _ in range(target.dim)]
    for p in ms.indices:
        if p not in mt.offsets:
            continue
        blk = mt.projection(p) @ g @ ms.section(p)
        for a, ra in enumerate(mt.span(p)):
            for b, cb in enumerate(ms.span(p)):
                rows[ra][cb] = blk[a, b]
    return Mat(rows, source.dim)


def equivariant_maps(source: HLPair, target: HLPair) -> list[Mat]:
    """Basis of the filtered (translation 0) maps commuting with e."""
    ms, mt = source.model, target.model
    es, et = source.e_graded_coords, target.e_graded_coords
    ns, nt = source.dim, target.dim
    # unknown Y in graded coordinates with Y[q-block, p-block] = 0 when q > p
    slots = [
        (a, b)
        for a in range(nt)
        for b in range(ns)
        if mt.piece_of[a] <= ms.piece_of[b]
    ]
    if not slots:
        return []
    eqs = []
    for a in range(nt):
        for c in range(ns):
            # (Y es - et Y)[a, c]
            row = {}
            for s, (ya, yb) in enumerate(slots):
                coef = ZERO
                if ya == a:
                    coef += es[yb, c]
                if yb == c:
                    coef -= et[a, ya]
                if coef:
                    row[s] = coef
            if row:
                eqs.append([row.get(s, ZERO) for s in range(len(slots))])
    sol = kernel(Mat(eqs, len(slots))) if eqs else Subspace.full(len(slots))
    out = []
    for v in sol.basis.columns():
        y = [[ZERO] * ns for _ in range(nt)]
        for s, (ya, yb) in enumerate(slots):
            y[ya][yb] = v[s]
        out.append(mt.basis @ Mat(y, ns) @ ms.basis_inv)
    return out


# -- instance generation -------------------------------------------------------


@dataclass(frozen=True)
class HLProfile:
    """Shape of a random HL pair.

    ``primitive_dims[i]`` is the dimension of ``P_{-i}``.  Noise blocks
    ``Gr_p -> Gr_q`` are added for ``q - p <= noise_max_degree`` (at most 1,
    so the graded part of e is untouched).  ``gauge`` conjugates by a random
    filtered unipotent map; ``scramble`` applies a random change of basis of V.
    """

    primitive_dims: tuple
    density: float = 0.5
    coefficient_bound: int = 3
    denominator_bound: int = 1
    noise_max_degree: int = 0
    gauge: bool = False
    scramble: bool = False


def _rand_rat(rng: random.Random, bound: int, den_bound: int) -> mpq:
    num = 0
    while num == 0:
        num = rng.randint(-bound, bound)
    return mpq(num, rng.randint(1, max(1, den_bound)))


def random_hl(seed: int, profile: HLProfile) -> HLPair:
    if any(q < 0 for q in profile.primitive_dims):
        raise ValueError("primitive dimensions must be non-negative")
    if profile.noise_max_degree > 1:
        raise ValueError("noise of degree >= 2 would change the graded part of e")
    rng = random.Random(seed)
    q = list(profile.primitive_dims) or [0]
    r = len(q) - 1
    labels = []
    for p in range(-r, r + 1):
        for i in range(abs(p), r + 1):
            if (i - p) % 2 == 0:
                labels.extend((p, i, (p + i) // 2, k) for k in range(q[i]))
    n = len(labels)
    pos = {(i, j, k): c for c, (_, i, j, k) in enumerate(labels)}
    piece = [lab[0] for lab in labels]
    e = [[ZERO] * n for _ in range(n)]
    for c, (p, i, j, k) in enumerate(labels):
        if j < i:
            e[pos[(i, j + 1, k)]][c] = ONE
    for a in range(n):
        for b in range(n):
            if piece[a] - piece[b] <= profile.noise_max_degree and rng.random() < profile.density:
                e[a][b] += _rand_rat(rng, profile.coefficient_bound, profile.denominator_bound)
    em = Mat(e, n)
    if profile.gauge:
        t = [[ONE if a == b else ZERO for b in range(n)] for a in range(n)]
        for a in range(n):
            for b in range(n):
                if piece[a] < piece[b] and rng.random() < 0.5:
                    t[a][b] = _rand_rat(rng, profile.coefficient_bound, profile.denominator_bound)
        tm = Mat(t, n)
        em = tm @ em @ tm.inverse()
    change = Mat.identity(n)
    if profile.scramble and n:
        while True:
            change = Mat(
                [[mpq(rng.randint(-2, 2)) for _ in range(n)] for _ in range(n)], n
            )
            if change.rank() == n:
                break
        em = change @ em @ change.inverse()
    steps = {
        p: Subspace.span(change.take(cols=[c for c in range(n) if piece[c] <= p]), n)
        for p in range(-r, r + 1)
    }
    meta = {"generator": "random", "seed": seed, "profile": _profile_dict(profile)}
    return make_pair(FilteredSpace(n, steps), em, name=f"random-{seed}", metadata=meta)


def _profile_dict(profile: HLProfile) -> dict:
    return {
        "primitive_dims": list(profile.primitive_dims),
        "density": profile.density,
        "coefficient_bound": profile.coefficient_bound,
        "denominator_bound": profile.denominator_bound,
        "noise_max_degree": profile.noise_max_degree,
        "gauge": profile.gauge,
        "scramble": profile.scramble,
    }


def sl2_string(length: int) -> HLPair:
    """Irreducible graded model with ``length`` one-dimensional pieces."""
    q = [0] * length
    q[length - 1] = 1
    return random_hl(0, HLProfile(tuple(q), density=0.0))


def unit_pair() -> HLPair:
    return sl2_string(1)


def conjugate(pair: HLPair, t: Mat) -> HLPair:
    """Transport ``e`` along a filtered automorphism ``t`` (filtration unchanged)."""
    return HLPair(pair.space, t @ pair.e @ t.inverse(), pair.twist, pair.offset, pair.name)


def random_filtered_automorphism(pair: HLPair, rng: random.Random, bound: int = 2) -> Mat:
    gm = pair.model
    n = pair.dim
    y = [[ONE if a == b else ZERO for b in range(n)] for a in range(n)]
    for a in range(n):
        for b in range(n):
            if gm.piece_of[a] < gm.piece_of[b] and rng.random() < 0.6:
                y[a][b] = mpq(rng.randint(-bound, bound))
            elif gm.piece_of[a] == gm.piece_of[b] and a == b:
                y[a][b] = mpq(rng.choice([1, 2, -1]))
    return gm.basis @ Mat(y, n) @ gm.basis_inv
