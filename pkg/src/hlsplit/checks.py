"""Property checks over a single HL pair, grouped into suites.

Every check returns a :class:`CheckResult`; exceptions raised inside a check
are reported as failures rather than propagated.
"""
from __future__ import annotations

import random
from functools import cached_property
from typing import Callable, NamedTuple

from .exactla import ONE, ZERO, Mat
from .filt import FilteredMap, is_filtered
from .hlpair import (
    HLPair,
    check_hl,
    conjugate,
    direct_sum,
    dual_pair,
    equivariant_maps,
    graded_morphism,
    morphism_kernel,
    primitives,
    random_filtered_automorphism,
    sl2_string,
    tensor,
    tensor_index,
)
from .split import (
    METHODS,
    Splitting,
    chardel1_check,
    compare,
    condtr_holds,
    dualize_splitting,
    e_good_exists,
    e_tilde,
    fX_check,
    graded_e_full,
    is_e_good,
    is_good,
    lift_fi,
    make_good,
    omega1,
    phi1,
    phi3,
    splitting,
    _e_power,
)

SUITES = ("paper", "duality", "tensor", "functorial", "all")

# above these sizes the more expensive checks use cheaper morphisms / partners
CENTRALIZER_MAX_DIM = 12
DIRECT_SUM_MAX_DIM = 15
SELF_TENSOR_MAX_DIM = 5
TENSOR_MAX_DIM = 16


class CheckResult(NamedTuple):
    name: str
    ok: bool
    detail: str = ""


class _Ctx:
    def __init__(self, pair: HLPair, seed: int):
        self.pair = pair
        self.rng = random.Random(seed)
        self.morphisms = None

    @cached_property
    def five(self) -> dict[str, Splitting]:
        return {m: splitting(self.pair, m) for m in METHODS}

    @cached_property
    def dual(self) -> HLPair:
        return dual_pair(self.pair)

    def perturbed(self, base: Splitting) -> Splitting:
        """``base`` composed with a random unipotent filtered automorphism of the graded space."""
        gm = self.pair.model
        n = self.pair.dim
        rows = [[ONE if a == b else ZERO for b in range(n)] for a in range(n)]
        for a in range(n):
            for b in range(n):
                if gm.piece_of[a] < gm.piece_of[b] and self.rng.random() < 0.5:
                    rows[a][b] = ZERO + self.rng.randint(-2, 2)
        return make_good(self.pair, base.matrix @ Mat(rows, n), "perturbed")


# -- suite "paper" -----------------------------------------------------------------


def _goodness(c: _Ctx):
    bad = [m for m, s in c.five.items() if not is_good(c.pair, s.matrix)]
    return not bad, f"not good: {bad}" if bad else ""


def _degree_bound(c: _Ctx):
    eg = graded_e_full(c.pair)
    for m, s in c.five.items():
        et = e_tilde(c.pair, s)
        if any(not part.is_zero() for d, part in et.parts.items() if d > 2):
            return False, f"{m}: e~ has a part of degree > 2"
        if et.part(2) != eg:
            return False, f"{m}: degree-2 part differs from graded e"
    return True, ""


def _e_good_criteria(c: _Ctx):
    verdicts = {m: is_e_good(c.pair, s) for m, s in c.five.items()}
    return True, f"e-good: {sorted(m for m, v in verdicts.items() if v)}"


def _chardel1(c: _Ctx):
    p1 = c.five["phi1"]
    if not chardel1_check(c.pair, p1):
        return False, "phi1 fails its own characterization"
    others = [s for m, s in c.five.items() if m != "phi1"]
    others += [c.perturbed(p1) for _ in range(3)]
    for s in others:
        if s.matrix != p1.matrix and chardel1_check(c.pair, s):
            return False, f"{s.method} != phi1 passes the characterization"
    return True, ""


def _primitive_agreement(c: _Ctx):
    pld = primitives(c.pair)
    a = c.five["phi1"].pld_matrix
    b = c.five["phi3"].pld_matrix
    for i in range(c.pair.r + 1):
        cols = pld.columns_of(i, 0)
        if not cols:
            continue
        f = lift_fi(c.pair, i)
        if a.take(cols=cols) != f or b.take(cols=cols) != f:
            return False, f"primitive columns differ for i={i}"
    return True, ""


def _eecc11(c: _Ctx):
    good = is_e_good(c.pair, c.five["phi1"])
    same = compare(c.five["phi1"], c.five["phi2"]).equal
    return good == same, f"phi1 e-good={good}, phi1==phi2={same}"


def _eunico(c: _Ctx):
    s = e_good_exists(c.pair)
    if s is None:
        return True, "no e-good splitting"
    bad = [m for m, t in c.five.items() if t.matrix != s.matrix]
    return not bad, f"differ from the e-good splitting: {bad}" if bad else "five-way coincidence"


def _extreme(c: _Ctx):
    gm = c.pair.model
    r = c.pair.r
    cmp = compare(c.five["omega1"], c.five["phi1"])
    need = {p for p in (-r, r) if gm.dim(p)}
    if not need <= cmp.agreeing_pieces:
        return False, "omega1 and phi1 differ on an extreme piece"
    if all(gm.dim(p) == 0 for p in gm.indices if abs(p) != r) and not cmp.equal:
        return False, "only extreme pieces but omega1 != phi1"
    return True, ""


def _lift_strength(c: _Ctx):
    gm = c.pair.model
    r = c.pair.r
    for i in range(r + 1):
        f = lift_fi(c.pair, i)
        if f.cols == 0:
            continue
        for t in range(1, r - i + 2):
            img = _e_power(c.pair, i + t) @ f
            if not (gm.projection_from(i + t) @ img).is_zero():
                return False, f"e^{i + t} f_{i} leaves F_{i + t - 1}"
    return True, ""


def _phi3_start(c: _Ctx):
    ref = c.five["phi3"].matrix
    starts = [c.five["omega1"], c.five["omega2"], c.perturbed(c.five["phi2"])]
    for s in starts:
        got, _ = phi3(c.pair, start=s)
        if got.matrix != ref:
            return False, f"start {s.method} gives another phi3"
    return True, ""


def _condtr_vs_fx(c: _Ctx):
    cands = list(c.five.values()) + [c.perturbed(c.five["phi3"]) for _ in range(2)]
    for s in cands:
        a, b = condtr_holds(c.pair, s), fX_check(c.pair, s)
        if a != b:
            return False, f"{s.method}: condtr={a}, [f,X]=0 is {b}"
    p3 = c.five["phi3"]
    if not condtr_holds(c.pair, p3):
        return False, "phi3 does not satisfy the condition"
    return True, ""


PAPER = (
    ("goodness", _goodness),
    ("degree_bound", _degree_bound),
    ("e_good_criteria", _e_good_criteria),
    ("chardel1", _chardel1),
    ("primitive_agreement", _primitive_agreement),
    ("eecc11", _eecc11),
    ("eunico", _eunico),
    ("extreme_pieces", _extreme),
    ("lift_strength", _lift_strength),
    ("phi3_start_independence", _phi3_start),
    ("condtr_equals_fX", _condtr_vs_fx),
)


# -- duality suite ---------------------------------------------------------------


def _dual_hl(c: _Ctx):
    rep = check_hl(c.dual)
    return rep.ok, rep.reason


def _dual_constructions(c: _Ctx):
    d = c.dual
    if dualize_splitting(c.pair, omega1(d)).matrix != c.five["omega2"].matrix:
        return False, "omega2 is not the dual of omega1 of the dual"
    if dualize_splitting(c.pair, phi1(d)).matrix != c.five["phi2"].matrix:
        return False, "phi2 is not the dual of phi1 of the dual"
    # the dual of omega1 is omega2 of the dual
    if dualize_splitting(d, c.five["omega1"]).matrix != splitting(d, "omega2").matrix:
        return False, "omega2 of the dual is not the dual of omega1"
    return True, ""


def _dual_involution(c: _Ctx):
    for m, s in c.five.items():
        back = dualize_splitting(c.pair, dualize_splitting(c.dual, s))
        if back.matrix != s.matrix:
            return False, f"dualizing {m} twice changes it"
    return True, ""


def _phi3_self_dual(c: _Ctx):
    got = dualize_splitting(c.pair, phi3(c.dual)[0])
    return got.matrix == c.five["phi3"].matrix, ""


DUALITY = (
    ("dual_hl", _dual_hl),
    ("dual_constructions", _dual_constructions),
    ("dual_involution", _dual_involution),
    ("phi3_self_dual", _phi3_self_dual),
)


# -- tensor suite ----------------------------------------------------------------


def _tensor_partners(c: _Ctx) -> list[HLPair]:
    out = [sl2_string(2)]
    if c.pair.dim <= SELF_TENSOR_MAX_DIM:
        out.append(c.pair)
    if c.pair.dim * 3 <= TENSOR_MAX_DIM:
        out.append(sl2_string(3))
    return out


def _tensor_hl(c: _Ctx):
    for b in _tensor_partners(c):
        rep = check_hl(tensor(c.pair, b))
        if not rep.ok:
            return False, f"tensor with {b.name or 'partner'}: {rep.reason}"
    return True, ""


def _tensor_phi3(c: _Ctx):
    a = c.pair
    pa = c.five["phi3"].matrix
    for b in _tensor_partners(c):
        t = tensor(a, b)
        pb = phi3(b)[0].matrix if b is not a else pa
        kron = pa.kron(pb)
        order = [g1 * b.dim + g2 for g1, g2 in tensor_index(a, b)]
        if phi3(t)[0].matrix != kron.take(cols=order):
            return False, f"phi3 of the tensor with {b.name or 'partner'} is not the tensor of phi3"
    return True, ""


TENSOR = (
    ("tensor_hl", _tensor_hl),
    ("tensor_phi3", _tensor_phi3),
)


# -- functoriality suite ---------------------------------------------------------


def _morphisms(c: _Ctx) -> list[tuple[Mat, HLPair, HLPair]]:
    if c.morphisms is not None:
        return c.morphisms
    a = c.pair
    out = []
    t = random_filtered_automorphism(a, c.rng)
    b = conjugate(a, t)
    out.append((t, a, b))
    if a.dim <= DIRECT_SUM_MAX_DIM:
        s = direct_sum(a, b)
        out.append((t.hstack(-Mat.identity(a.dim)), s, b))
    if a.dim <= CENTRALIZER_MAX_DIM:
        basis = equivariant_maps(a, a)
        for g in basis[:3]:
            out.append((g, a, a))
        if basis:
            comb = Mat.zeros(a.dim, a.dim)
            for g in basis:
                comb = comb + g.scale(c.rng.randint(-2, 2))
            out.append((comb, a, a))
    c.morphisms = out
    return out


def _is_morphism(g: Mat, a: HLPair, b: HLPair) -> bool:
    return bool(is_filtered(FilteredMap(g, a.space, b.space))) and g @ a.e == b.e @ g


def _omega1_functorial(c: _Ctx):
    for g, a, b in _morphisms(c):
        if not _is_morphism(g, a, b):
            return False, "generated map is not a morphism"
        wa = c.five["omega1"] if a is c.pair else omega1(a)
        wb = c.five["omega1"] if b is c.pair else omega1(b)
        if g @ wa.matrix != wb.matrix @ graded_morphism(g, a, b):
            return False, f"omega1 is not natural for a {b.dim}x{a.dim} morphism"
    return True, ""


def _kernels(c: _Ctx):
    for g, a, b in _morphisms(c):
        morphism_kernel(g, a, b)
    return True, ""


FUNCTORIAL = (
    ("omega1_functorial", _omega1_functorial),
    ("kernel_strict_hl", _kernels),
)

_BY_SUITE = {
    "paper": PAPER,
    "duality": DUALITY,
    "tensor": TENSOR,
    "functorial": FUNCTORIAL,
}


def checks_for(suite: str) -> tuple[tuple[str, Callable], ...]:
    if suite == "all":
        return PAPER + DUALITY + TENSOR + FUNCTORIAL
    try:
        return _BY_SUITE[suite]
    except KeyError:
        raise ValueError(f"unknown suite {suite!r}") from None


def run_suite(pair: HLPair, suite: str = "all", seed: int = 0) -> list[CheckResult]:
    rep = check_hl(pair)
    if not rep.ok:
        return [CheckResult("hl", False, rep.reason)]
    ctx = _Ctx(pair, seed)
    out = []
    for name, fn in checks_for(suite):
        try:
            ok, detail = fn(ctx)
        except Exception as exc:  # reported, not raised
            ok, detail = False, f"{type(exc).__name__}: {exc}"
        out.append(CheckResult(name, bool(ok), detail))
    return out
