import pytest
from hypothesis import given
from hypothesis import strategies as st

from hlsplit.exactla import Mat, Subspace
from hlsplit.filt import (
    FilteredMap,
    FilteredSpace,
    NonNested,
    NotExhaustive,
    Violation,
    dual,
    dual_map,
    graded_model,
    is_filtered,
    validate,
)
from hlsplit.kunneth import snzdiff

from conftest import small_pairs


def snz_space() -> FilteredSpace:
    return snzdiff().space


@st.composite
def filtered_spaces(draw, max_dim=5):
    n = draw(st.integers(1, max_dim))
    # unit lower times unit upper: always invertible, minimal draw is the identity
    entries = draw(st.lists(st.integers(-2, 2), min_size=n * n, max_size=n * n))
    low = Mat([[1 if a == b else entries[a * n + b] if a > b else 0 for b in range(n)] for a in range(n)], n)
    up = Mat([[1 if a == b else entries[a * n + b] if a < b else 0 for b in range(n)] for a in range(n)], n)
    change = low @ up
    pieces = sorted(draw(st.lists(st.integers(-3, 3), min_size=n, max_size=n)))
    steps = {
        p: Subspace.span(change.take(cols=[c for c in range(n) if pieces[c] <= p]), n)
        for p in range(pieces[0], pieces[-1] + 1)
    }
    return FilteredSpace(n, steps), pieces


# -- validate --------------------------------------------------------------------


def test_validate_snzdiff():
    assert validate(snz_space()) == (-2, 2)


def test_validate_single_step():
    assert validate(FilteredSpace.trivial(3, 0)) == (0, 0)


def test_validate_non_nested():
    e = Mat.identity(2)
    f = FilteredSpace.from_bases(2, {0: e.take(cols=[0]), 1: e.take(cols=[1])})
    with pytest.raises(NonNested):
        validate(f)


def test_validate_not_exhaustive():
    e = Mat.identity(2)
    f = FilteredSpace.from_bases(2, {0: e.take(cols=[0])})
    with pytest.raises(NotExhaustive):
        validate(f)


def test_validate_ignores_steps_without_jump():
    e = Mat.identity(2)
    f = FilteredSpace.from_bases(2, {-5: Mat.zeros(2, 0), 1: e.take(cols=[0]), 3: e, 7: e})
    assert validate(f) == (1, 3)


# -- graded model ----------------------------------------------------------------


def test_graded_model_snzdiff():
    gm = graded_model(snz_space())
    assert {p: gm.dim(p) for p in (-2, -1, 0, 1, 2)} == {-2: 1, -1: 0, 0: 1, 1: 0, 2: 1}
    assert gm.section(-2) == Mat([[1], [0], [0]])
    assert gm.section(0) == Mat([[0], [1], [0]])
    assert gm.section(2) == Mat([[0], [0], [1]])


def test_graded_model_trivial():
    gm = graded_model(FilteredSpace.trivial(3, 0))
    assert gm.indices == (0,) and gm.section(0) == Mat.identity(3)


def test_graded_model_pivot_rule():
    f = FilteredSpace.from_bases(2, {0: Mat([[1], [1]]), 1: Mat.identity(2)})
    assert graded_model(f).section(1) == Mat([[0], [1]])


@given(filtered_spaces())
def test_graded_model_invariants(fs_pieces):
    fs, pieces = fs_pieces
    gm = graded_model(fs)
    n = fs.ambient_dim
    assert sum(gm.dims.values()) == n
    total = Mat.zeros(n, n)
    for p in gm.indices:
        total = total + gm.section(p) @ gm.projection(p)
        for q in gm.indices:
            expected = Mat.identity(gm.dim(p)) if p == q else Mat.zeros(gm.dim(q), gm.dim(p))
            assert gm.projection(q) @ gm.section(p) == expected
        assert fs.F(p).contains(gm.section(p))
        assert gm.dim(p) == fs.F(p).dim - fs.F(p - 1).dim
    assert total == Mat.identity(n)
    assert sorted(gm.piece_of) == pieces


# -- duality ---------------------------------------------------------------------


def test_dual_snzdiff():
    d = dual(snz_space())
    ident = Mat.identity(3)
    assert d.F(-2) == Subspace.span(ident.take(cols=[2]), 3)
    assert d.F(0) == Subspace.span(ident.take(cols=[1, 2]), 3)
    assert d.F(2) == Subspace.full(3)
    assert validate(d) == (-2, 2)


def test_dual_trivial():
    d = dual(FilteredSpace.trivial(2, 0))
    assert validate(d) == (0, 0) and d.F(0) == Subspace.full(2) and d.F(-1).dim == 0


def test_dual_range_reverses():
    e = Mat.identity(3)
    f = FilteredSpace.from_bases(3, {1: e.take(cols=[0]), 4: e})
    assert validate(f) == (1, 4)
    assert validate(dual(f)) == (-4, -1)


@given(filtered_spaces())
def test_dual_is_involution(fs_pieces):
    fs, _ = fs_pieces
    a, b = validate(fs)
    dd = dual(dual(fs))
    assert validate(dual(fs)) == (-b, -a)
    for p in range(a - 1, b + 1):
        assert dd.F(p) == fs.F(p)


@given(filtered_spaces())
def test_dual_model_is_dual_basis(fs_pieces):
    fs, _ = fs_pieces
    gm = fs.graded
    dm = dual(fs).graded
    for p in gm.indices:
        assert dm.section(-p) == gm.projection(p).T


# -- filtered maps ---------------------------------------------------------------


def test_is_filtered_examples():
    fs = snz_space()
    e = snzdiff().e
    assert is_filtered(FilteredMap(e, fs, fs, 2)) is True
    assert is_filtered(FilteredMap(Mat.identity(3), fs, fs, 0)) is True
    down = Mat([[0, 0, 1], [0, 0, 0], [0, 0, 0]])
    # moving down the filtration is allowed; moving up is not
    assert is_filtered(FilteredMap(down, fs, fs, 0)) is True
    up = Mat([[0, 0, 0], [0, 0, 0], [1, 0, 0]])
    assert is_filtered(FilteredMap(up, fs, fs, 0)) == Violation(-2)
    assert not is_filtered(FilteredMap(e, fs, fs, 1))


def test_violation_is_falsy():
    assert not Violation(2)
    assert Violation(2).p == 2


def test_dual_map_snzdiff():
    fs = snz_space()
    m = dual_map(FilteredMap(snzdiff().e, fs, fs, 2, 1))
    assert m.matrix == Mat([[0, 1, 0], [0, 0, 1], [0, 0, 1]])
    assert m.twist == -1
    assert is_filtered(m) is True


def test_dual_map_identity_and_involution():
    fs = snz_space()
    ident = dual_map(FilteredMap(Mat.identity(3), fs, fs, 0))
    assert ident.matrix == Mat.identity(3)
    m = FilteredMap(snzdiff().e, fs, fs, 2, 1)
    back = dual_map(dual_map(m))
    assert back.matrix == m.matrix and back.translation == 2 and back.twist == 1
    for p in (-3, -2, 0, 2):
        assert back.source.F(p) == fs.F(p)


def test_compose_adds_translation_and_twist():
    fs = snz_space()
    e = FilteredMap(snzdiff().e, fs, fs, 2, 1)
    e2 = e.compose(e)
    assert (e2.translation, e2.twist) == (4, 2)
    assert is_filtered(e2) is True


def test_translate():
    fs = snz_space().translate(-1)
    assert validate(fs) == (-1, 3)
    assert fs.F(-1) == snz_space().F(-2)


@given(small_pairs())
def test_graded_blocks_vanish_above_translation(pair):
    eg = pair.e_graded_coords
    pieces = pair.model.piece_of
    for a in range(pair.dim):
        for b in range(pair.dim):
            if pieces[a] > pieces[b] + 2:
                assert eg[a, b] == 0
    m = FilteredMap(pair.e, pair.space, pair.space, 2, 1)
    assert is_filtered(m) is True
    assert is_filtered(dual_map(m)) is True
