"""The catalog of equivalence relations as decision procedures.

Every relation is a handle: a kind plus the space descriptor its points
inhabit.  `decide` validates the points against the space and dispatches to
the kind-specific decider.  All deciders are total on valid inputs and pure.

Two deciders deserve a note.  E_cub carries a mode: Literal reads the
definition verbatim (the agreement set is unbounded, which at a countable
domain is all a cub can mean), Structural asks for agreement on every limit
position above some bound, which is how the cub filter behaves over a
regular uncountable domain.  id+* matches component index sets by
cardinality class (equal finite count, or both infinite); over a countable
index domain every infinite class has the same size, so a permutation
witness exists exactly when the classes line up.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional, Tuple, Union

from .ordinals import OMEGA, Ordinal, nat, omega_times
from .patterns import INFINITE, pm_map, pm_support_analysis, pm_value_census
from .spaces import (
    BITS,
    ORDS,
    Family,
    FamilyOf,
    SpaceDescriptor,
    TaggedSum,
    TowerSum,
    diff_map,
    restrict_point,
    validate_point,
)


class RelationError(ValueError):
    pass


# ---------------------------------------------------------------------------
# handles
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class CubParams:
    mu: Ordinal = OMEGA
    value_space: str = "binary"
    mode: str = "Structural"

    def __post_init__(self):
        if self.mu != OMEGA:
            raise RelationError("only cofinality w is supported")
        if self.value_space not in ("binary", "ordinal"):
            raise RelationError(f"unknown value space {self.value_space!r}")
        if self.mode not in ("Literal", "Structural"):
            raise RelationError(f"unknown cub mode {self.mode!r}")


@dataclass(frozen=True)
class Id:
    pass


@dataclass(frozen=True)
class E0:
    pass


@dataclass(frozen=True)
class E1:
    pass


@dataclass(frozen=True)
class E1Approx:
    level: Ordinal

    def __post_init__(self):
        if not self.level.is_limit():
            raise RelationError("approximation level must be a limit")


@dataclass(frozen=True)
class IdPlus:
    pass


@dataclass(frozen=True)
class IdPlusStar:
    pass


@dataclass(frozen=True)
class Cub:
    params: CubParams


@dataclass(frozen=True)
class Jump:
    inner: "EqRelHandle"


@dataclass(frozen=True)
class Join:
    parts: Tuple["EqRelHandle", ...]


@dataclass(frozen=True)
class TowerJoin:
    """Join of the whole finite jump tower over `base`, one part per depth."""

    base: "EqRelHandle"


RelKind = Union[Id, E0, E1, E1Approx, IdPlus, IdPlusStar, Cub, Jump, Join, TowerJoin]


@dataclass(frozen=True)
class EqRelHandle:
    kind: RelKind
    space: SpaceDescriptor

    def __str__(self) -> str:
        return f"{_kind_str(self.kind)} on {self.space}"


def _kind_str(kind: RelKind) -> str:
    if isinstance(kind, Id):
        return "id"
    if isinstance(kind, E0):
        return "e0"
    if isinstance(kind, E1):
        return "e1"
    if isinstance(kind, E1Approx):
        return f"e1[{kind.level}]"
    if isinstance(kind, IdPlus):
        return "id+"
    if isinstance(kind, IdPlusStar):
        return "id+*"
    if isinstance(kind, Cub):
        return f"cub[{kind.params.mode.lower()},{kind.params.value_space}]"
    if isinstance(kind, Jump):
        return f"jump({_kind_str(kind.inner.kind)})"
    if isinstance(kind, Join):
        return "join(" + ",".join(_kind_str(p.kind) for p in kind.parts) + ")"
    if isinstance(kind, TowerJoin):
        return f"tower({_kind_str(kind.base.kind)})"
    raise RelationError(f"unknown kind {kind!r}")


def rel_id(space: SpaceDescriptor = BITS) -> EqRelHandle:
    return EqRelHandle(Id(), space)


def rel_e0(space: SpaceDescriptor = BITS) -> EqRelHandle:
    return EqRelHandle(E0(), space)


def rel_e1() -> EqRelHandle:
    return EqRelHandle(E1(), FamilyOf(BITS))


def rel_e1_approx(level: Ordinal) -> EqRelHandle:
    return EqRelHandle(E1Approx(level), FamilyOf(BITS))


def rel_idplus(inner: SpaceDescriptor = BITS) -> EqRelHandle:
    return EqRelHandle(IdPlus(), FamilyOf(inner))


def rel_idplus_star(inner: SpaceDescriptor = BITS) -> EqRelHandle:
    return EqRelHandle(IdPlusStar(), FamilyOf(inner))


def rel_cub(mode: str = "Structural", value_space: str = "binary") -> EqRelHandle:
    space = BITS if value_space == "binary" else ORDS
    return EqRelHandle(Cub(CubParams(OMEGA, value_space, mode)), space)


def rel_jump(inner: EqRelHandle) -> EqRelHandle:
    return EqRelHandle(Jump(inner), FamilyOf(inner.space))


def rel_join(parts) -> EqRelHandle:
    parts = tuple(parts)
    if not parts:
        raise RelationError("join of no relations")
    return EqRelHandle(Join(parts), TaggedSum(tuple(p.space for p in parts)))


def make_tower(base: EqRelHandle, level) -> EqRelHandle:
    """Jump tower over base: finite levels iterate the jump, level w joins
    them all, and w+k keeps jumping from there.  Stops below w*2."""
    lv = nat(level) if isinstance(level, int) else level
    if not lv < omega_times(2):
        raise RelationError(f"tower level {lv} out of supported range")
    if lv.is_nat():
        rel = base
        for _ in range(lv.to_nat()):
            rel = rel_jump(rel)
        return rel
    rel = EqRelHandle(TowerJoin(base), TowerSum(base.space))
    for _ in range(lv.nat_part()):
        rel = rel_jump(rel)
    return rel


# ---------------------------------------------------------------------------
# deciders
# ---------------------------------------------------------------------------


def decide_E0(x, y) -> bool:
    return not pm_support_analysis(diff_map(x, y)).unbounded


def decide_E1(x: Family, y: Family, level: Optional[Ordinal] = None) -> bool:
    if level is not None:
        if not level.is_limit():
            raise RelationError("E1 approximation level must be a limit")
        x = restrict_point(x, level)
        y = restrict_point(y, level)
    return not pm_support_analysis(diff_map(x, y)).unbounded


def decide_idplus(x: Family, y: Family) -> bool:
    # components are referenced, deduplicated, and canonically sorted
    return x.components == y.components


@dataclass(frozen=True)
class ComponentMatching:
    """Matched component slots with the shared cardinality class of their
    index sets (an exact natural, or INFINITE)."""

    pairs: Tuple[Tuple[int, int], ...]
    classes: Tuple[object, ...]


def idplus_star_witness(x: Family, y: Family) -> Optional[ComponentMatching]:
    if x.components != y.components:
        return None
    cx = pm_value_census(x.assignment)
    cy = pm_value_census(y.assignment)
    pairs = []
    classes = []
    for i in range(len(x.components)):
        a, b = cx.get(i, 0), cy.get(i, 0)
        if a != b and not (a == INFINITE and b == INFINITE):
            return None
        pairs.append((i, i))
        classes.append(a)
    return ComponentMatching(tuple(pairs), tuple(classes))


def decide_idplus_star(x: Family, y: Family) -> bool:
    return idplus_star_witness(x, y) is not None


def decide_cub(params: CubParams, x, y) -> bool:
    agreement = pm_map(diff_map(x, y), lambda v: 1 - v)
    info = pm_support_analysis(agreement)
    if params.mode == "Literal":
        return info.unbounded
    return info.final_limit_segment


def decide_jump(inner: EqRelHandle, x: Family, y: Family) -> bool:
    # {[c]_E : c component of x} = {[d]_E : d component of y}
    return all(any(decide(inner, c, d) for d in y.components) for c in x.components) and all(
        any(decide(inner, c, d) for c in x.components) for d in y.components
    )


def decide(rel: EqRelHandle, x, y) -> bool:
    validate_point(x, rel.space)
    validate_point(y, rel.space)
    return _decide_kind(rel, x, y)


def _decide_kind(rel: EqRelHandle, x, y) -> bool:
    kind = rel.kind
    if isinstance(kind, Id):
        return x == y
    if isinstance(kind, E0):
        return decide_E0(x, y)
    if isinstance(kind, E1):
        return decide_E1(x, y)
    if isinstance(kind, E1Approx):
        return decide_E1(x, y, kind.level)
    if isinstance(kind, IdPlus):
        return decide_idplus(x, y)
    if isinstance(kind, IdPlusStar):
        return decide_idplus_star(x, y)
    if isinstance(kind, Cub):
        return decide_cub(kind.params, x, y)
    if isinstance(kind, Jump):
        return decide_jump(kind.inner, x, y)
    if isinstance(kind, Join):
        if x.tag != y.tag:
            return False
        return decide(kind.parts[x.tag.to_nat()], x.payload, y.payload)
    if isinstance(kind, TowerJoin):
        if x.tag != y.tag:
            return False
        return decide(make_tower(kind.base, x.tag), x.payload, y.payload)
    raise RelationError(f"unknown kind {kind!r}")
