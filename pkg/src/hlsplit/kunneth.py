"""Instances from cohomology rings of products, and the small worked instance.

A :class:`GradedRing` is a finite graded-commutative algebra given by
structure constants.  For ``Y x Z`` with ``r = dim_C Z`` the filtered space is
``H(Y) (x) H(Z)`` with the monomial ``y (x) z`` in piece ``deg z - r``, and
``e`` is cup product with a degree-2 class.
"""
from __future__ import annotations

import json
import re
from dataclasses import dataclass, field
from itertools import product as iproduct
from typing import Mapping, Sequence

from gmpy2 import mpq

from .exactla import ONE, ZERO, Mat, Subspace, rat
from .filt import FilteredSpace, GradedModel
from .hlpair import HLPair, HLReport, check_hl, make_pair
from .split import Splitting, make_good

TENSOR = "⊗"


class RingError(ValueError):
    pass


class EtaError(ValueError):
    pass


class HLFails(RuntimeError):
    def __init__(self, report: HLReport):
        super().__init__(report.reason or "HL fails")
        self.report = report


@dataclass(frozen=True, eq=False)
class GradedRing:
    labels: tuple
    degrees: tuple
    table: Mapping  # (a, b) -> tuple of coefficients, absent means zero
    unit: int = 0
    name: str = ""

    def __post_init__(self):
        if len(self.labels) != len(self.degrees):
            raise RingError("labels and degrees differ in length")
        if len(set(self.labels)) != len(self.labels):
            raise RingError("duplicate basis labels")
        object.__setattr__(
            self, "table", {k: tuple(rat(x) for x in v) for k, v in self.table.items()}
        )
        self._check()

    @property
    def dim(self) -> int:
        return len(self.labels)

    @property
    def top_degree(self) -> int:
        return max(self.degrees, default=0)

    def dims(self) -> tuple:
        return tuple(self.degrees.count(d) for d in range(self.top_degree + 1))

    def index(self, label: str) -> int:
        try:
            return self.labels.index(label)
        except ValueError:
            raise RingError(f"unknown basis label {label!r}") from None

    def mul(self, a: int, b: int) -> tuple:
        return self.table.get((a, b), (ZERO,) * self.dim)

    def mul_vec(self, x: Sequence, y: Sequence) -> tuple:
        out = [ZERO] * self.dim
        for a, xa in enumerate(x):
            if not xa:
                continue
            for b, yb in enumerate(y):
                if not yb:
                    continue
                c = xa * yb
                for t, v in enumerate(self.mul(a, b)):
                    if v:
                        out[t] += c * v
        return tuple(out)

    def basis_vec(self, a: int) -> tuple:
        return tuple(ONE if t == a else ZERO for t in range(self.dim))

    def _check(self) -> None:
        n = self.dim
        for (a, b), v in self.table.items():
            if len(v) != n:
                raise RingError(f"product {a}*{b} has the wrong length")
            for t, c in enumerate(v):
                if c and self.degrees[t] != self.degrees[a] + self.degrees[b]:
                    raise RingError(f"product {a}*{b} is not homogeneous")
        for a in range(n):
            ea = self.basis_vec(a)
            if self.mul(self.unit, a) != ea or self.mul(a, self.unit) != ea:
                raise RingError("unit axiom fails")
            for b in range(n):
                sign = -1 if self.degrees[a] * self.degrees[b] % 2 else 1
                if self.mul(a, b) != tuple(sign * c for c in self.mul(b, a)):
                    raise RingError(f"graded commutativity fails for {a}, {b}")
        for a, b, c in iproduct(range(n), repeat=3):
            left = self.mul_vec(self.mul(a, b), self.basis_vec(c))
            right = self.mul_vec(self.basis_vec(a), self.mul(b, c))
            if left != right:
                raise RingError(f"associativity fails for {a}, {b}, {c}")


def proj_space(n: int) -> GradedRing:
    """``Q[h]/(h^{n+1})`` with ``h`` in degree 2."""
    if n < 0:
        raise RingError("n must be non-negative")
    labels = tuple("1" if k == 0 else "h" if k == 1 else f"h^{k}" for k in range(n + 1))
    table = {}
    for a in range(n + 1):
        for b in range(n + 1):
            if a + b <= n:
                table[(a, b)] = tuple(ONE if t == a + b else ZERO for t in range(n + 1))
    return GradedRing(labels, tuple(2 * k for k in range(n + 1)), table, name=f"pn:{n}")


def elliptic_curve() -> GradedRing:
    """Cohomology of a genus-one curve: ``alpha * beta = omega = -beta * alpha``."""
    labels = ("1", "alpha", "beta", "omega")
    degs = (0, 1, 1, 2)

    def v(t, c=1):
        return tuple(mpq(c) if s == t else ZERO for s in range(4))

    table = {(0, b): v(b) for b in range(4)}
    table.update({(a, 0): v(a) for a in range(4)})
    table[(1, 2)] = v(3)
    table[(2, 1)] = v(3, -1)
    return GradedRing(labels, degs, table, name="elliptic")


def product_ring(y: GradedRing, z: GradedRing) -> GradedRing:
    """``H(Y) (x) H(Z)`` with ``(y1 z1)(y2 z2) = (-1)^{deg z1 deg y2} y1 y2 (x) z1 z2``."""
    pairs = [(a, b) for a in range(y.dim) for b in range(z.dim)]
    pos = {p: t for t, p in enumerate(pairs)}
    labels = tuple(f"{y.labels[a]}{TENSOR}{z.labels[b]}" for a, b in pairs)
    degs = tuple(y.degrees[a] + z.degrees[b] for a, b in pairs)
    table = {}
    n = len(pairs)
    for (a1, b1), (a2, b2) in iproduct(pairs, repeat=2):
        yy = y.mul(a1, a2)
        zz = z.mul(b1, b2)
        if not any(yy) or not any(zz):
            continue
        sign = -1 if z.degrees[b1] * y.degrees[a2] % 2 else 1
        out = [ZERO] * n
        for s, cy in enumerate(yy):
            if cy:
                for t, cz in enumerate(zz):
                    if cz:
                        out[pos[(s, t)]] = sign * cy * cz
        table[(pos[(a1, b1)], pos[(a2, b2)])] = tuple(out)
    return GradedRing(labels, degs, table, unit=pos[(y.unit, z.unit)], name=f"{y.name}x{z.name}")


_TERM = re.compile(r"\s*([+-]?)\s*(?:([0-9]+(?:/[0-9]+)?)\s*\*\s*)?([^\s+*-]+)\s*")


def parse_eta(text, ring: GradedRing) -> tuple:
    """Coefficient vector from ``"h⊗1 + 2*1⊗h"`` or a JSON list of ``[label, coefficient]``."""
    if isinstance(text, str) and text.strip().startswith("["):
        try:
            text = json.loads(text)
        except json.JSONDecodeError as exc:
            raise EtaError(f"bad eta JSON: {exc}") from None
    out = [ZERO] * ring.dim
    if isinstance(text, Mapping):
        text = list(text.items())
    if isinstance(text, (list, tuple)):
        for term in text:
            try:
                label, coeff = term
                c = rat(coeff)
            except (TypeError, ValueError) as exc:
                raise EtaError(f"bad eta term {term!r}: {exc}") from None
            out[_eta_index(ring, label)] += c
        return tuple(out)
    if not isinstance(text, str):
        raise EtaError("eta must be a string or a list of terms")
    s = text.replace("−", "-")
    at = 0
    while at < len(s):
        m = _TERM.match(s, at)
        if not m or m.end() == at:
            raise EtaError(f"cannot parse eta near {s[at:]!r}")
        if at and not m.group(1):
            raise EtaError(f"missing sign before {m.group(3)!r}")
        c = rat(m.group(2) or 1)
        if m.group(1) == "-":
            c = -c
        out[_eta_index(ring, m.group(3))] += c
        at = m.end()
    return tuple(out)


def _eta_index(ring: GradedRing, label: str) -> int:
    label = label.replace("(x)", TENSOR)
    try:
        return ring.index(label)
    except RingError:
        raise EtaError(f"unknown class {label!r}") from None


@dataclass(frozen=True, eq=False)
class ProductInstance:
    pair: HLPair
    eta: tuple
    factors: tuple
    ring: GradedRing
    r: int
    hl_report: HLReport
    kunneth: Splitting | None = field(default=None)


def product_pair(y: GradedRing, z: GradedRing, eta) -> ProductInstance:
    ring = product_ring(y, z)
    vec = parse_eta(eta, ring) if not _is_vector(eta, ring) else tuple(rat(x) for x in eta)
    if not any(vec):
        raise EtaError("eta is zero")
    for t, c in enumerate(vec):
        if c and ring.degrees[t] != 2:
            raise EtaError(f"eta has a component in degree {ring.degrees[t]}")
    if z.top_degree % 2:
        raise RingError("fiber ring has odd top degree")
    r = z.top_degree // 2
    n = ring.dim
    e = Mat.from_columns([ring.mul_vec(vec, ring.basis_vec(b)) for b in range(n)], rows=n)
    piece = [z.degrees[t % z.dim] - r for t in range(n)]
    ident = Mat.identity(n)
    sections = {
        p: ident.take(cols=[t for t in range(n) if piece[t] == p]) for p in range(-r, r + 1)
    }
    steps = {
        p: Subspace.span(ident.take(cols=[t for t in range(n) if piece[t] <= p]), n)
        for p in range(-r, r + 1)
    }
    space = FilteredSpace(n, steps, model=GradedModel(sections, n))
    name = f"{y.name}x{z.name}"
    meta = {
        "generator": "product",
        "factors": [y.name, z.name],
        "eta": [[ring.labels[t], str(c)] for t, c in enumerate(vec) if c],
    }
    pair = make_pair(space, e, name=name, metadata=meta)
    report = check_hl(pair)
    inst = ProductInstance(pair, vec, (y, z), ring, r, report)
    if report.ok:
        object.__setattr__(inst, "kunneth", kunneth_splitting(inst))
    return inst


def _is_vector(eta, ring: GradedRing) -> bool:
    return (
        isinstance(eta, (list, tuple))
        and len(eta) == ring.dim
        and all(not isinstance(x, (list, tuple, str)) for x in eta)
    )


def kunneth_splitting(inst: ProductInstance) -> Splitting:
    """Monomial sections: the graded class of ``y (x) z`` goes to ``y (x) z``."""
    if not inst.hl_report.ok:
        raise HLFails(inst.hl_report)
    s = make_good(inst.pair, inst.pair.model.basis, "kunneth")
    return s


def snzdiff() -> HLPair:
    """Three one-dimensional pieces at -2, 0, 2 with ``e(v2) = v2``."""
    e = Mat([[0, 0, 0], [1, 0, 0], [0, 1, 1]])
    ident = Mat.identity(3)
    space = FilteredSpace.from_bases(
        3, {-2: ident.take(cols=[0]), 0: ident.take(cols=[0, 1]), 2: ident}
    )
    return make_pair(space, e, name="snzdiff", metadata={"generator": "snzdiff"})


def ring_by_name(spec: str) -> GradedRing:
    """``pn:<n>`` or ``elliptic``."""
    if spec == "elliptic":
        return elliptic_curve()
    m = re.fullmatch(r"pn:(\d+)", spec)
    if m:
        return proj_space(int(m.group(1)))
    raise RingError(f"unknown ring {spec!r}")


def standard_instances() -> dict[str, ProductInstance]:
    """Named product instances used by the checks."""
    p1 = proj_space(1)
    ell = elliptic_curve()
    return {
        "p1xp1-fiber": product_pair(p1, p1, "1⊗h"),
        "p1xp1-diag": product_pair(p1, p1, "h⊗1 + 1⊗h"),
        "p1xp1-mixed": product_pair(p1, p1, "-3*h⊗1 + 2/5*1⊗h"),
        "ExE-poincare": product_pair(
            ell, ell, "1⊗omega + omega⊗1 + alpha⊗beta - beta⊗alpha"
        ),
        "ExE-fiber": product_pair(ell, ell, "1⊗omega"),
        "p2xp1": product_pair(proj_space(2), p1, "h⊗1 + 1⊗h"),
        "p1xp2": product_pair(p1, proj_space(2), "h⊗1 + 1⊗h"),
        "ExP2": product_pair(ell, proj_space(2), "omega⊗1 + 1⊗h"),
    }
