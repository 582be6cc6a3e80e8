from itertools import product as iproduct

import pytest
from hypothesis import given
from hypothesis import strategies as st

from hlsplit.exactla import Mat, rat
from hlsplit.filt import FilteredMap, is_filtered, validate
from hlsplit.hlpair import check_hl
from hlsplit.kunneth import (
    EtaError,
    GradedRing,
    HLFails,
    RingError,
    elliptic_curve,
    kunneth_splitting,
    parse_eta,
    product_pair,
    product_ring,
    proj_space,
    ring_by_name,
    snzdiff,
    standard_instances,
)
from hlsplit.split import all_splittings, e_good_exists, e_tilde, is_e_good, is_good, phi3


def vec(ring, label):
    return ring.basis_vec(ring.index(label))


# -- rings -----------------------------------------------------------------------


def test_proj_space_dims():
    assert proj_space(0).dims() == (1,)
    assert proj_space(1).dims() == (1, 0, 1)


def test_proj_space_truncation():
    p2 = proj_space(2)
    h, h2 = p2.index("h"), p2.index("h^2")
    assert p2.mul(h, h) == vec(p2, "h^2")
    assert not any(p2.mul(h2, h))


def test_elliptic_products():
    e = elliptic_curve()
    a, b, w = e.index("alpha"), e.index("beta"), e.index("omega")
    assert e.mul(a, b) == vec(e, "omega")
    assert e.mul(b, a) == tuple(-x for x in vec(e, "omega"))
    assert not any(e.mul(w, a))
    assert not any(e.mul(a, a)) and not any(e.mul(b, b))


def test_ring_validation():
    with pytest.raises(RingError):
        # x * x = 1 breaks homogeneity
        GradedRing(("1", "x"), (0, 2), {(0, 0): (1, 0), (0, 1): (0, 1), (1, 0): (0, 1), (1, 1): (1, 0)})
    with pytest.raises(RingError):
        # odd classes that commute
        GradedRing(
            ("1", "a", "b", "w"),
            (0, 1, 1, 2),
            {
                **{(0, t): tuple(1 if s == t else 0 for s in range(4)) for t in range(4)},
                **{(t, 0): tuple(1 if s == t else 0 for s in range(4)) for t in range(4)},
                (1, 2): (0, 0, 0, 1),
                (2, 1): (0, 0, 0, 1),
            },
        )
    with pytest.raises(RingError):
        proj_space(-1)


@pytest.mark.parametrize(
    "y, z",
    [(proj_space(1), proj_space(1)), (elliptic_curve(), elliptic_curve()), (elliptic_curve(), proj_space(2))],
)
def test_product_ring_axioms(y, z):
    ring = product_ring(y, z)
    n = ring.dim
    for a, b, c in iproduct(range(n), repeat=3):
        left = ring.mul_vec(ring.mul(a, b), ring.basis_vec(c))
        right = ring.mul_vec(ring.basis_vec(a), ring.mul(b, c))
        assert left == right
    for a, b in iproduct(range(n), repeat=2):
        sign = -1 if ring.degrees[a] * ring.degrees[b] % 2 else 1
        assert ring.mul(a, b) == tuple(sign * x for x in ring.mul(b, a))


def test_koszul_sign():
    e = elliptic_curve()
    ring = product_ring(e, e)
    # (1 (x) alpha)(beta (x) 1) = (-1)^{1*1} beta (x) alpha
    got = ring.mul(ring.index("1⊗alpha"), ring.index("beta⊗1"))
    assert got == tuple(-x for x in vec(ring, "beta⊗alpha"))


def test_ring_by_name():
    assert ring_by_name("pn:3").dims() == (1, 0, 1, 0, 1, 0, 1)
    assert ring_by_name("elliptic").dims() == (1, 2, 1)
    with pytest.raises(RingError):
        ring_by_name("torus")


# -- eta parsing -----------------------------------------------------------------


def test_parse_eta_forms():
    ring = product_ring(proj_space(1), proj_space(1))
    want = [0] * 4
    want[ring.index("h⊗1")] = 1
    want[ring.index("1⊗h")] = rat("2/3")
    want = tuple(rat(x) for x in want)
    assert parse_eta("h⊗1 + 2/3*1⊗h", ring) == want
    assert parse_eta("h(x)1 + 2/3*1(x)h", ring) == want
    assert parse_eta('[["h⊗1", "1"], ["1⊗h", "2/3"]]', ring) == want
    assert parse_eta([["h⊗1", 1], ["1⊗h", "2/3"]], ring) == want
    assert parse_eta("−h⊗1", ring)[ring.index("h⊗1")] == -1


@pytest.mark.parametrize("bad", ["h⊗1 1⊗h", "k⊗1", "2*", "[1, 2", [["h⊗1"]]])
def test_parse_eta_errors(bad):
    ring = product_ring(proj_space(1), proj_space(1))
    with pytest.raises(EtaError):
        parse_eta(bad, ring)


def test_eta_degree_checked():
    p1 = proj_space(1)
    with pytest.raises(EtaError):
        product_pair(p1, p1, "1⊗1")
    with pytest.raises(EtaError):
        product_pair(p1, p1, "h⊗h")
    with pytest.raises(EtaError):
        product_pair(p1, p1, "0*h⊗1")


# -- product instances -----------------------------------------------------------


def test_fiber_class_instance():
    inst = product_pair(proj_space(1), proj_space(1), "1⊗h")
    pair = inst.pair
    assert inst.hl_report.ok and inst.r == 1
    assert validate(pair.space) == (-1, 1)
    assert (pair.gr_dim(-1), pair.gr_dim(0), pair.gr_dim(1)) == (2, 0, 2)
    assert e_good_exists(pair) is not None
    assert all(s.matrix == inst.kunneth.matrix for s in all_splittings(pair).values())


def test_base_class_fails_hl():
    inst = product_pair(proj_space(1), proj_space(1), "h⊗1")
    assert not inst.hl_report.ok and inst.kunneth is None
    with pytest.raises(HLFails):
        kunneth_splitting(inst)


def test_elliptic_poincare_instance():
    e = elliptic_curve()
    inst = product_pair(e, e, "1⊗omega + omega⊗1 + alpha⊗beta - beta⊗alpha")
    assert inst.hl_report.ok
    assert not e_tilde(inst.pair, inst.kunneth).part(1).is_zero()
    assert inst.kunneth.matrix != phi3(inst.pair)[0].matrix


def test_kunneth_is_monomial_permutation():
    for inst in standard_instances().values():
        if not inst.hl_report.ok:
            continue
        m = inst.kunneth.matrix
        z = inst.factors[1]
        seen = set()
        for g, (p, _) in enumerate(inst.pair.model.labels):
            col = m.column(g)
            assert sorted(col) == [0] * (len(col) - 1) + [1]
            t = col.index(1)
            # the monomial y (x) z sits in the piece deg z - r
            assert z.degrees[t % z.dim] - inst.r == p
            seen.add(t)
        assert len(seen) == inst.pair.dim
        assert is_good(inst.pair, m)


def test_filtration_and_e_on_all_instances():
    for name, inst in standard_instances().items():
        pair = inst.pair
        assert is_filtered(FilteredMap(pair.e, pair.space, pair.space, 2)) is True, name
        if inst.hl_report.ok:
            assert check_hl(pair).ok


@given(
    st.fractions(min_value=-5, max_value=5, max_denominator=4),
    st.fractions(min_value=-5, max_value=5, max_denominator=4).filter(lambda b: b != 0),
)
def test_p1_times_p1_relations(a, b):
    eta = [["h⊗1", a], ["1⊗h", b]] if a else [["1⊗h", b]]
    inst = product_pair(proj_space(1), proj_space(1), eta)
    pair = inst.pair
    sp = all_splittings(pair)
    assert inst.kunneth.matrix == sp["phi3"].matrix
    assert sp["phi1"].matrix == sp["omega1"].matrix
    assert sp["phi2"].matrix == sp["omega2"].matrix
    assert is_e_good(pair, inst.kunneth) == (a == 0)


def test_snzdiff_instance():
    pair = snzdiff()
    assert pair.e == Mat([[0, 0, 0], [1, 0, 0], [0, 1, 1]])
    assert validate(pair.space) == (-2, 2)
    assert [pair.gr_dim(p) for p in (-2, 0, 2)] == [1, 1, 1]
    assert check_hl(pair).ok
