from dataclasses import dataclass
from typing import Union


# ---- 群描述 ----

@dataclass(frozen=True)
class Cyclic:
    n: int


@dataclass(frozen=True)
class Dihedral:
    n: int


@dataclass(frozen=True)
class Quaternion8:
    pass


@dataclass(frozen=True)
class Symmetric:
    n: int


@dataclass(frozen=True)
class ProdGroup:
    left: "GroupExpr"
    right: "GroupExpr"


GroupExpr = Union[Cyclic, Dihedral, Quaternion8, Symmetric, ProdGroup]


# ---- 環描述 ----

@dataclass(frozen=True)
class ZMod:
    n: int


@dataclass(frozen=True)
class ProdRing:
    left: "RingExpr"
    right: "RingExpr"


@dataclass(frozen=True)
class GroupRing:
    ring: "RingExpr"
    group: GroupExpr


RingExpr = Union[ZMod, ProdRing, GroupRing]


def group_order(expr: GroupExpr) -> int:
    """不建表即可算出的群階，用來在建構前檢查上限。"""
    match expr:
        case Cyclic(n):
            return n
        case Dihedral(n):
            return 2 * n
        case Quaternion8():
            return 8
        case Symmetric(n):
            order = 1
            for k in range(2, n + 1):
                order *= k
            return order
        case ProdGroup(left, right):
            return group_order(left) * group_order(right)
    raise TypeError(f"not a group expression: {expr!r}")


def ring_size(expr: RingExpr) -> int:
    match expr:
        case ZMod(n):
            return n
        case ProdRing(left, right):
            return ring_size(left) * ring_size(right)
        case GroupRing(ring, group):
            return ring_size(ring) ** group_order(group)
    raise TypeError(f"not a ring expression: {expr!r}")
