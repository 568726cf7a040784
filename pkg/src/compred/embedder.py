"""Embedding a countable Boolean algebra into an atomless target, one element at a time.

The source ``C`` and target ``B`` are given as ``AlgebraOracle`` values with
decidable zero tests.  Step ``n`` defines the image of source element ``n``
as the join over sign patterns ``tau`` of length ``n`` of
``z_tau = y_tau & alpha(y_tau, p_tau, n)``, where ``p_tau``/``y_tau`` are the
signed meets of earlier source elements/images and ``alpha`` is a pair
reduction supplier.  The invariant kept at every depth is::

    p_tau == 0 in C   <=>   y_tau == 0 in B           (star)

Sign patterns with ``p_tau == 0`` are pruned: by (star) their ``y_tau`` is
zero too, so they contribute nothing to any later image.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from itertools import product
from typing import Callable, Iterable, Optional

from . import intalg
from .intalg import IntervalSet
from .relcore import PreorderTable, ReductionMap, verify_reduction

__all__ = [
    "AlgebraOracle",
    "PairReductionSupplier",
    "SupplierContractError",
    "StarViolation",
    "EmbeddingState",
    "EmbeddingReport",
    "quotient_algebra",
    "interval_algebra",
    "upper_half_algebra",
    "desk_pair_reduction",
    "tau_products",
    "z_tau",
    "extend_h",
    "embed_preorder",
    "ei_criterion",
    "lx_pipeline",
]


@dataclass
class AlgebraOracle:
    name: str
    zero_test: Callable
    meet: Callable
    join: Callable
    complement: Callable
    unit: object
    zero: object
    element: Callable
    split: Optional[Callable] = None
    size: Optional[int] = None

    def leq(self, a, b) -> bool:
        return self.zero_test(self.meet(a, self.complement(b)))

    def equiv(self, a, b) -> bool:
        return self.leq(a, b) and self.leq(b, a)

    def signed(self, a, bit: int):
        return self.complement(a) if bit else a


def quotient_algebra(P: PreorderTable) -> AlgebraOracle:
    """``F / I_P`` over generators ``p_0..p_{N-1}``.

    Element ``i < N`` is ``p_i``; the rest of the level-``N`` grid follows in
    canonical code order.
    """
    N = P.n
    gens = [intalg.generator(i) for i in range(N)]
    rest = []

    def element(i: int) -> IntervalSet:
        if i < N:
            return gens[i]
        if N > 4:
            raise IndexError("grid enumeration beyond the generators is limited to N <= 4")
        if not rest:
            rest.extend(w for w in intalg.enumerate_grid(N) if w not in set(gens))
        return rest[i - N]

    return AlgebraOracle(
        name=f"F/I_P(N={N})",
        zero_test=lambda w: intalg.ideal_member(w, P, N),
        meet=intalg.meet,
        join=intalg.join,
        complement=intalg.complement,
        unit=intalg.ONE,
        zero=intalg.ZERO,
        element=element,
        size=2 ** (2 ** N) if N <= 4 else None,
    )


def _left_half_of_leftmost(y: IntervalSet) -> IntervalSet:
    lo, hi = y.intervals[0]
    return IntervalSet(((lo, (lo + hi) / 2),))


def interval_algebra() -> AlgebraOracle:
    """The interval algebra with the trivial ideal (zero iff empty)."""
    return AlgebraOracle(
        name="F",
        zero_test=IntervalSet.is_zero,
        meet=intalg.meet,
        join=intalg.join,
        complement=intalg.complement,
        unit=intalg.ONE,
        zero=intalg.ZERO,
        element=intalg.generator,
        split=_left_half_of_leftmost,
    )


_UPPER = IntervalSet(((Fraction(1, 2), Fraction(1)),))


def upper_half_algebra() -> AlgebraOracle:
    """``F`` modulo the ideal of sets inside ``[0, 1/2)``."""

    def split(y: IntervalSet) -> IntervalSet:
        return _left_half_of_leftmost(intalg.meet(y, _UPPER))

    return AlgebraOracle(
        name="F/[0,1/2)",
        zero_test=lambda w: intalg.meet(w, _UPPER).is_zero(),
        meet=intalg.meet,
        join=intalg.join,
        complement=intalg.complement,
        unit=intalg.ONE,
        zero=intalg.ZERO,
        element=intalg.generator,
        split=split,
    )


class SupplierContractError(RuntimeError):
    pass


class StarViolation(RuntimeError):
    pass


@dataclass
class PairReductionSupplier:
    alpha: Callable


def desk_pair_reduction(target: AlgebraOracle, source: AlgebraOracle) -> PairReductionSupplier:
    """Decidable stand-in for the disjoint-pair reduction.

    Disjoint from ``p`` -> zero; above ``p`` -> unit; otherwise a proper
    nonzero part of ``y`` (left half of its leftmost interval in the plain
    interval algebra).
    """
    if target.split is None:
        raise ValueError(f"target {target.name} has no splitting rule")

    def alpha(y, p, n_elem):
        if source.zero_test(source.meet(n_elem, p)):
            return target.zero
        if source.leq(p, n_elem):
            return target.unit
        if target.zero_test(y):
            raise SupplierContractError("asked to split a zero element")
        return target.split(y)

    return PairReductionSupplier(alpha)


@dataclass
class EmbeddingState:
    source: AlgebraOracle
    target: AlgebraOracle
    images: list = field(default_factory=list)
    # live sign patterns: tau -> (p_tau, y_tau), only those with p_tau nonzero
    live: dict = field(default_factory=lambda: {})
    audit: list = field(default_factory=list)

    def __post_init__(self):
        if not self.live:
            self.live = {"": (self.source.unit, self.target.unit)}

    @property
    def depth(self) -> int:
        return len(self.images)


def tau_products(state: EmbeddingState, tau: str) -> tuple:
    """``(p_tau, y_tau)`` computed from scratch."""
    if len(tau) != state.depth:
        raise ValueError(f"|tau| = {len(tau)} but depth is {state.depth}")
    C, B = state.source, state.target
    p, y = C.unit, B.unit
    for i, bit in enumerate(tau):
        p = C.meet(p, C.signed(C.element(i), int(bit)))
        y = B.meet(y, B.signed(state.images[i], int(bit)))
    return p, y


def z_tau(state: EmbeddingState, tau: str, n: int, supplier: PairReductionSupplier,
          products: Optional[tuple] = None):
    C, B = state.source, state.target
    p, y = products if products is not None else tau_products(state, tau)
    if B.zero_test(y):
        return B.zero
    n_elem = C.element(n)
    z = B.meet(y, supplier.alpha(y, p, n_elem))
    disjoint = C.zero_test(C.meet(n_elem, p))
    above = C.leq(p, n_elem)
    if disjoint != B.zero_test(z) or above != B.equiv(z, y):
        raise SupplierContractError(
            f"tau={tau!r}, n={n}: disjoint={disjoint}, above={above}, "
            f"z zero={B.zero_test(z)}, z==y={B.equiv(z, y)}")
    return z


def extend_h(state: EmbeddingState, supplier: PairReductionSupplier, audit_depth: int = 10):
    """Define the image of source element ``depth`` and re-check (star)."""
    C, B = state.source, state.target
    n = state.depth
    image = B.zero
    for tau, prod in state.live.items():
        image = B.join(image, z_tau(state, tau, n, supplier, prod))
    state.images.append(image)
    elem = C.element(n)
    live = {}
    for tau, (p, y) in state.live.items():
        for bit in (0, 1):
            p2 = C.meet(p, C.signed(elem, bit))
            y2 = B.meet(y, B.signed(image, bit))
            pz, yz = C.zero_test(p2), B.zero_test(y2)
            state.audit.append((n + 1, tau + str(bit), pz, yz))
            if pz != yz:
                raise StarViolation(f"star fails at tau={tau + str(bit)!r}: p zero={pz}, y zero={yz}")
            if not pz:
                live[tau + str(bit)] = (p2, y2)
    state.live = live
    if n + 1 <= audit_depth:
        for bits in product("01", repeat=n + 1):
            tau = "".join(bits)
            if tau in live:
                continue
            p, y = tau_products(state, tau)
            if not (C.zero_test(p) and B.zero_test(y)):
                raise StarViolation(f"pruned pattern {tau!r} is not zero on both sides")
    return image


@dataclass
class EmbeddingReport:
    images: list
    star_rows: int
    star_ok: bool
    equivalence: list
    ok: bool

    def to_json(self) -> dict:
        return {
            "depth": len(self.images),
            "images": [str(w) for w in self.images],
            "star_rows": self.star_rows,
            "star_ok": self.star_ok,
            "equivalence": self.equivalence,
            "ok": self.ok,
        }


def embed_preorder(P: PreorderTable, target: Optional[AlgebraOracle] = None,
                   supplier: Optional[PairReductionSupplier] = None):
    """Embed ``F / I_P`` into ``target``; return ``(ReductionMap, EmbeddingReport)``.

    The map sends ``n`` to the image of ``p_n``.  Raises if the final
    equivalence ``n <= k  <=>  image(n) <= image(k)`` fails.
    """
    if P.check():
        raise ValueError("input is not a preorder")
    target = target or interval_algebra()
    source = quotient_algebra(P)
    supplier = supplier or desk_pair_reduction(target, source)
    state = EmbeddingState(source, target)
    for _ in range(P.n):
        extend_h(state, supplier)
    images = list(state.images)
    table = []
    for n in range(P.n):
        for k in range(P.n):
            table.append([n, k, bool(P.leq[n, k]), target.leq(images[n], images[k])])
    rep = verify_reduction(lambda x: x, lambda a, b: bool(P.leq[a, b]),
                           lambda a, b: target.leq(images[a], images[b]), P.n, ordered=True)
    report = EmbeddingReport(images, len(state.audit), all(p == y for _, _, p, y in state.audit),
                             table, rep.ok)
    if not rep.ok:
        raise RuntimeError(f"embedding fails the preorder equivalence: {rep.counterexamples[:3]}")
    return ReductionMap(dict(enumerate(images)), P.n), report


@dataclass
class CriterionReport:
    checked: int
    violations: list

    @property
    def ok(self) -> bool:
        return not self.violations


def ei_criterion(U_test: Callable, V_test: Callable, g: Callable, zero_test: Callable,
                 unit_test: Callable, samples: Iterable) -> CriterionReport:
    """Check ``x in U -> g(x) == 0`` and ``x in V -> g(x) == 1`` on ``samples``."""
    violations = []
    n = 0
    for x in samples:
        n += 1
        in_u, in_v = U_test(x), V_test(x)
        if not in_u and not in_v:
            continue
        gx = g(x)
        if in_u and not zero_test(gx):
            violations.append((x, "U", gx))
        if in_v and not unit_test(gx):
            violations.append((x, "V", gx))
    return CriterionReport(n, violations)


def lx_pipeline(S, T, horizon: int) -> tuple:
    """Membership bits of ``L_x`` by length plus the window used for the at-horizon tests.

    ``L_x`` counts as zero at the horizon when no length in the upper half of
    the window is a member, and as unit when every such length is.
    """
    from .stagecraft import Lx_tail

    bits = Lx_tail(S, T, horizon)
    tail = bits[horizon // 2:]
    return bits, (not any(tail)), all(tail)
