"""Finite increasing filtrations on ``Q^n`` and their graded models."""
from __future__ import annotations

from dataclasses import dataclass, field
from functools import cached_property
from typing import Mapping, NamedTuple

from .exactla import (
    Mat,
    Subspace,
    annihilator,
    complement_in,
    hstack,
    vstack,
)


class FiltrationError(ValueError):
    pass


class NonNested(FiltrationError):
    def __init__(self, p: int, q: int):
        super().__init__(f"F_{p} is not contained in F_{q}")
        self.p, self.q = p, q


class NotExhaustive(FiltrationError):
    def __init__(self, top: int):
        super().__init__(f"top step F_{top} is not the whole space")
        self.top = top


class GradedModel:
    """Chosen representatives of every ``Gr_p`` inside ``F_p``.

    ``basis`` is the square matrix whose columns are all sections, ordered by
    increasing ``p``; ``projections`` are the matching row blocks of its
    inverse, so ``projection_q @ section_p`` is the identity for ``p == q``
    and zero otherwise.
    """

    def __init__(self, sections: Mapping[int, Mat], ambient_dim: int):
        self.indices = tuple(sorted(sections))
        self.sections = {p: sections[p] for p in self.indices}
        self.ambient_dim = ambient_dim
        self.dims = {p: self.sections[p].cols for p in self.indices}
        self.basis = hstack([self.sections[p] for p in self.indices], rows=ambient_dim)
        if self.basis.cols != ambient_dim:
            raise FiltrationError("sections do not add up to the ambient dimension")
        self.basis_inv = self.basis.inverse()
        self.offsets: dict[int, int] = {}
        o = 0
        for p in self.indices:
            self.offsets[p] = o
            o += self.dims[p]
        self.projections = {
            p: self.basis_inv.block(self.offsets[p], self.offsets[p] + self.dims[p], 0, ambient_dim)
            for p in self.indices
        }
        # graded coordinate -> (piece, position within the piece)
        self.labels = tuple((p, k) for p in self.indices for k in range(self.dims[p]))
        self.piece_of = tuple(p for p, _ in self.labels)

    def span(self, p: int) -> range:
        """Graded coordinate positions of ``Gr_p`` (empty if p is out of range)."""
        if p not in self.offsets:
            return range(0)
        return range(self.offsets[p], self.offsets[p] + self.dims[p])

    def dim(self, p: int) -> int:
        return self.dims.get(p, 0)

    def section(self, p: int) -> Mat:
        return self.sections.get(p, Mat.zeros(self.ambient_dim, 0))

    def projection(self, p: int) -> Mat:
        return self.projections.get(p, Mat.zeros(0, self.ambient_dim))

    def projection_from(self, s: int) -> Mat:
        """Coordinates of ``V / F_{s-1}``: stacked projections for ``q >= s``."""
        return vstack([self.projections[q] for q in self.indices if q >= s], cols=self.ambient_dim)

    def sections_below(self, s: int) -> Mat:
        """Columns spanning ``F_s``."""
        return hstack([self.sections[q] for q in self.indices if q <= s], rows=self.ambient_dim)

    def to_graded(self, m: Mat) -> Mat:
        """Matrix of an endomorphism of V in graded coordinates."""
        return self.basis_inv @ m @ self.basis

    def shifted(self, n: int) -> "GradedModel":
        return GradedModel({p - n: s for p, s in self.sections.items()}, self.ambient_dim)


@dataclass(frozen=True, eq=False)
class FilteredSpace:
    """``(V, F)`` with ``V = Q^ambient_dim``; ``steps[p]`` is ``F_p`` at each jump."""

    ambient_dim: int
    steps: Mapping[int, Subspace]
    declared_range: tuple[int, int] | None = None
    model: GradedModel | None = field(default=None, repr=False)

    def __post_init__(self):
        object.__setattr__(self, "steps", {p: self.steps[p] for p in sorted(self.steps)})
        for p, sub in self.steps.items():
            if sub.ambient_dim != self.ambient_dim:
                raise FiltrationError(f"F_{p} lives in the wrong ambient space")

    @classmethod
    def trivial(cls, n: int, p: int = 0) -> "FilteredSpace":
        return cls(n, {p: Subspace.full(n)})

    @classmethod
    def from_bases(cls, n: int, bases: Mapping[int, Mat]) -> "FilteredSpace":
        return cls(n, {p: Subspace.span(b, n) for p, b in bases.items()})

    def F(self, p: int) -> Subspace:
        below = [q for q in self.steps if q <= p]
        if not below:
            return Subspace.zero(self.ambient_dim)
        return self.steps[below[-1]]

    @cached_property
    def type_range(self) -> tuple[int, int]:
        return validate(self)

    @cached_property
    def graded(self) -> GradedModel:
        return self.model if self.model is not None else graded_model(self)

    def gr_dims(self) -> dict[int, int]:
        a, b = self.type_range
        return {p: self.graded.dim(p) for p in range(a, b + 1)}

    def translate(self, n: int) -> "FilteredSpace":
        """``F[n]``: ``F[n]_p = F_{n+p}``."""
        model = None if self.model is None else self.model.shifted(n)
        return FilteredSpace(self.ambient_dim, {p - n: s for p, s in self.steps.items()}, model=model)

    def restrict(self, basis: Mat) -> "FilteredSpace":
        """Induced filtration on the subspace spanned by the independent columns of ``basis``."""
        from .exactla import intersect

        sub = Subspace.span(basis, self.ambient_dim)
        k = basis.cols
        steps = {}
        for p, Fp in self.steps.items():
            meet = intersect(Fp, sub)
            coords = _coords_in(basis, sub, meet.basis)
            steps[p] = Subspace.span(coords, k)
        return FilteredSpace(k, steps)


def _coords_in(basis: Mat, sub: Subspace, vectors: Mat) -> Mat:
    # coordinates w.r.t. an arbitrary (independent) basis of sub
    c = sub.coordinates(vectors)
    b = sub.coordinates(basis)
    return b.inverse() @ c


def validate(f: FilteredSpace) -> tuple[int, int]:
    """Minimal ``[a, b]`` outside which the graded pieces vanish."""
    idx = list(f.steps)
    for x, y in zip(idx, idx[1:]):
        if not f.steps[y].contains(f.steps[x]):
            raise NonNested(x, y)
    n = f.ambient_dim
    if n == 0:
        return (0, 0)
    if not idx or f.steps[idx[-1]].dim != n:
        raise NotExhaustive(idx[-1] if idx else 0)
    prev = 0
    jumps = []
    for p in idx:
        d = f.steps[p].dim
        if d > prev:
            jumps.append(p)
        prev = d
    return (jumps[0], jumps[-1])


def graded_model(f: FilteredSpace) -> GradedModel:
    validate(f)
    sections = {}
    prev = Subspace.zero(f.ambient_dim)
    a, b = f.type_range
    for p in range(a, b + 1):
        cur = f.F(p)
        sections[p] = complement_in(prev, cur).basis
        prev = cur
    if f.ambient_dim == 0:
        sections = {0: Mat.zeros(0, 0)}
    return GradedModel(sections, f.ambient_dim)


def dual(f: FilteredSpace) -> FilteredSpace:
    """``F^o_p = Ann(F_{-p-1})`` with the graded model dual to the primal one."""
    a, b = f.type_range
    n = f.ambient_dim
    steps = {}
    for p in range(-b, -a + 1):
        steps[p] = annihilator(f.F(-p - 1))
    gm = f.graded
    model = GradedModel({-p: gm.projections[p].T for p in gm.indices}, n)
    return FilteredSpace(n, steps, model=model)


def dual_index_map(gm: GradedModel) -> list[int]:
    """For each primal graded coordinate, the matching coordinate of the dual model."""
    dual_offsets = {}
    o = 0
    for p in sorted((-q for q in gm.indices)):
        dual_offsets[p] = o
        o += gm.dims[-p]
    return [dual_offsets[-p] + k for p, k in gm.labels]


class Violation(NamedTuple):
    p: int

    def __bool__(self) -> bool:
        return False


@dataclass(frozen=True, eq=False)
class FilteredMap:
    """``matrix: source -> target[translation](twist)``; the twist is bookkeeping only."""

    matrix: Mat
    source: FilteredSpace
    target: FilteredSpace
    translation: int = 0
    twist: int = 0

    def compose(self, first: "FilteredMap") -> "FilteredMap":
        """``self o first``; translations and twists add."""
        return FilteredMap(
            self.matrix @ first.matrix,
            first.source,
            self.target,
            self.translation + first.translation,
            self.twist + first.twist,
        )


def is_filtered(m: FilteredMap) -> bool | Violation:
    """True iff ``matrix F_p(source) <= F_{p+n}(target)`` for every stored p."""
    if m.matrix.shape != (m.target.ambient_dim, m.source.ambient_dim):
        raise ValueError("matrix shape does not match the spaces")
    for p, Fp in m.source.steps.items():
        if not m.target.F(p + m.translation).contains(m.matrix @ Fp.basis):
            return Violation(p)
    return True


def dual_map(m: FilteredMap) -> FilteredMap:
    """Transpose between the dual filtrations.

    In coordinates the transpose again raises filtration index by the same
    ``translation``; only the twist changes sign.
    """
    return FilteredMap(m.matrix.T, dual(m.target), dual(m.source), m.translation, -m.twist)
