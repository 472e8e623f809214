from dataclasses import dataclass, field
from functools import cached_property
from typing import Any, Dict, FrozenSet, Iterable, List, Optional, Sequence, Tuple
import logging

import numpy as np
from sympy import isprime, primefactors
from sympy.combinatorics.named_groups import SymmetricGroup

from app.core.config import Settings, get_settings
from app.core.errors import CapExceededError, GroupConstructionError, NotNormalError
from app.dsl.ast import Cyclic, Dihedral, GroupExpr, ProdGroup, Quaternion8, Symmetric, group_order
from app.models.enums import GroupPredicate

logger = logging.getLogger(__name__)


# =========================
# Types
# =========================

@dataclass(frozen=True, eq=False)
class GroupTable:
    """有限群的完整乘法表；元素 id 0 固定是單位元。"""

    name: str
    mul: np.ndarray
    inv: np.ndarray
    labels: Tuple[str, ...]
    generators: Tuple[int, ...]
    identity: int = 0

    @property
    def order(self) -> int:
        return int(self.mul.shape[0])

    def op(self, a: int, b: int) -> int:
        return int(self.mul[a, b])

    def power(self, g: int, k: int) -> int:
        x = self.identity
        for _ in range(k % self.element_orders[g]):
            x = int(self.mul[x, g])
        return x

    def label(self, g: int) -> str:
        return self.labels[g]

    def element(self, label: str) -> int:
        try:
            return self._label_index[label]
        except KeyError:
            raise KeyError(f"no element labelled {label!r} in {self.name}") from None

    @cached_property
    def _label_index(self) -> Dict[str, int]:
        return {lab: i for i, lab in enumerate(self.labels)}

    @cached_property
    def element_orders(self) -> np.ndarray:
        orders = np.ones(self.order, dtype=np.int64)
        for g in range(1, self.order):
            x, k = g, 1
            while x != self.identity:
                x = int(self.mul[x, g])
                k += 1
            orders[g] = k
        return orders

    @cached_property
    def is_abelian(self) -> bool:
        return bool((self.mul == self.mul.T).all())

    def __repr__(self) -> str:
        return f"GroupTable({self.name}, order={self.order})"


@dataclass(frozen=True, eq=False)
class Subgroup:
    parent: GroupTable
    members: Tuple[int, ...]
    is_normal: bool

    @property
    def order(self) -> int:
        return len(self.members)

    @property
    def is_trivial(self) -> bool:
        return self.order == 1

    def __contains__(self, g: int) -> bool:
        return g in self._member_set

    @cached_property
    def _member_set(self) -> FrozenSet[int]:
        return frozenset(self.members)

    @cached_property
    def mask(self) -> np.ndarray:
        m = np.zeros(self.parent.order, dtype=bool)
        m[list(self.members)] = True
        m.setflags(write=False)
        return m

    def labels(self) -> List[str]:
        return [self.parent.labels[g] for g in self.members]

    def __eq__(self, other: object) -> bool:
        return (
            isinstance(other, Subgroup)
            and other.parent is self.parent
            and other.members == self.members
        )

    def __hash__(self) -> int:
        return hash((id(self.parent), self.members))

    def __repr__(self) -> str:
        return f"Subgroup({self.parent.name}, order={self.order}, normal={self.is_normal})"


@dataclass(frozen=True)
class GroupInfo:
    order: int
    element_orders: Dict[int, int]
    center: Subgroup


@dataclass(frozen=True)
class PredicateResult:
    value: bool
    witness: Optional[Dict[str, Any]] = None
    note: Optional[str] = None


@dataclass(frozen=True)
class NuSigma:
    nu: FrozenSet[int]
    sigma: Subgroup


@dataclass(frozen=True)
class QuotientGroup:
    group: GroupTable
    proj: np.ndarray = field(repr=False)


# =========================
# Constructors
# =========================

def _power_label(base: str, k: int) -> str:
    if k == 0:
        return "1"
    return base if k == 1 else f"{base}^{k}"


def cyclic_group(n: int) -> GroupTable:
    ids = np.arange(n)
    mul = (ids[:, None] + ids[None, :]) % n
    inv = (-ids) % n
    labels = tuple(_power_label("x", k) for k in range(n))
    return GroupTable(f"C{n}", mul, inv, labels, (1,) if n > 1 else ())


def dihedral_group(n: int) -> GroupTable:
    # r^a s^b 編號為 b*n + a；(r^a s^b)(r^c s^d) = r^(a + (-1)^b c) s^(b+d)
    order = 2 * n
    a = np.arange(order) % n
    b = np.arange(order) // n
    sign = np.where(b == 1, -1, 1)
    rot = (a[:, None] + sign[:, None] * a[None, :]) % n
    ref = (b[:, None] + b[None, :]) % 2
    mul = ref * n + rot
    inv = np.where(b == 0, (-a) % n, np.arange(order))
    labels = []
    for k in range(order):
        r_part = "" if a[k] == 0 else _power_label("r", int(a[k]))
        if b[k] == 0:
            labels.append(r_part or "1")
        else:
            labels.append(f"{r_part}s")
    return GroupTable(f"D{n}", mul, inv, tuple(labels), (1 % order, n))


# 四元數單位 1, i, j, k 的乘積 (符號翻轉, 單位)
_QUAT_UNITS = ("1", "i", "j", "k")
_QUAT_PRODUCT = {
    (0, 0): (0, 0), (0, 1): (0, 1), (0, 2): (0, 2), (0, 3): (0, 3),
    (1, 0): (0, 1), (1, 1): (1, 0), (1, 2): (0, 3), (1, 3): (1, 2),
    (2, 0): (0, 2), (2, 1): (1, 3), (2, 2): (1, 0), (2, 3): (0, 1),
    (3, 0): (0, 3), (3, 1): (0, 2), (3, 2): (1, 1), (3, 3): (1, 0),
}


def quaternion_group() -> GroupTable:
    # id = 2*unit + sign，sign 0 為正
    mul = np.zeros((8, 8), dtype=np.int64)
    for x in range(8):
        for y in range(8):
            (u, s), (v, t) = divmod(x, 2), divmod(y, 2)
            flip, w = _QUAT_PRODUCT[(u, v)]
            mul[x, y] = 2 * w + (s ^ t ^ flip)
    inv = np.array([int(np.flatnonzero(mul[x] == 0)[0]) for x in range(8)])
    labels = tuple(("-" if s else "") + _QUAT_UNITS[u] for u, s in (divmod(x, 2) for x in range(8)))
    return GroupTable("Q8", mul, inv, labels, (2, 4))


def symmetric_group(n: int) -> GroupTable:
    perms = sorted(SymmetricGroup(n).elements, key=lambda p: p.array_form)
    index = {tuple(p.array_form): i for i, p in enumerate(perms)}
    order = len(perms)
    mul = np.zeros((order, order), dtype=np.int64)
    for i, p in enumerate(perms):
        for j, q in enumerate(perms):
            mul[i, j] = index[tuple((p * q).array_form)]
    inv = np.array([index[tuple((~p).array_form)] for p in perms])
    labels = []
    for p in perms:
        cycles = p.cyclic_form
        labels.append("".join("(" + " ".join(str(k + 1) for k in c) + ")" for c in cycles) or "1")
    gens = tuple(sorted({index[tuple(g.array_form)] for g in SymmetricGroup(n).generators} - {0}))
    return GroupTable(f"S{n}", mul, inv, tuple(labels), gens)


def direct_product(g: GroupTable, h: GroupTable) -> GroupTable:
    ng, nh = g.order, h.order
    mul = (g.mul[:, None, :, None] * nh + h.mul[None, :, None, :]).reshape(ng * nh, ng * nh)
    inv = (g.inv[:, None] * nh + h.inv[None, :]).reshape(-1)
    labels = tuple(f"({a},{b})" for a in g.labels for b in h.labels)
    gens = tuple(x * nh for x in g.generators) + tuple(h.generators)
    right = f"({h.name})" if " x " in h.name else h.name
    return GroupTable(f"{g.name} x {right}", mul, inv, labels, gens)


def make_group(spec: GroupExpr, settings: Optional[Settings] = None) -> GroupTable:
    cfg = settings or get_settings()
    order = group_order(spec)
    if order > cfg.max_group_order:
        raise CapExceededError("max_group_order", cfg.max_group_order, order)
    G = _build(spec)
    validate_group(G)
    return G


def _build(spec: GroupExpr) -> GroupTable:
    match spec:
        case Cyclic(n):
            if n < 1:
                raise GroupConstructionError("cyclic group needs n >= 1")
            return cyclic_group(n)
        case Dihedral(n):
            if n < 2:
                raise GroupConstructionError("dihedral group needs n >= 2")
            return dihedral_group(n)
        case Quaternion8():
            return quaternion_group()
        case Symmetric(n):
            if not 1 <= n <= 4:
                raise GroupConstructionError("symmetric group needs 1 <= n <= 4")
            return symmetric_group(n)
        case ProdGroup(left, right):
            return direct_product(_build(left), _build(right))
    raise GroupConstructionError(f"unsupported group descriptor: {spec!r}")


def validate_group(G: GroupTable) -> None:
    n = G.order
    ids = np.arange(n)
    if not (np.sort(G.mul, axis=1) == ids).all() or not (np.sort(G.mul, axis=0) == ids[:, None]).all():
        raise GroupConstructionError(f"{G.name}: table is not a Latin square")
    if not ((G.mul[0] == ids).all() and (G.mul[:, 0] == ids).all()):
        raise GroupConstructionError(f"{G.name}: id 0 is not the identity")
    if not ((G.mul[ids, G.inv] == 0).all() and (G.mul[G.inv, ids] == 0).all()):
        raise GroupConstructionError(f"{G.name}: inv table is wrong")
    left = G.mul[G.mul[:, :, None], ids[None, None, :]]
    right = G.mul[ids[:, None, None], G.mul[None, :, :]]
    bad = np.argwhere(left != right)
    if bad.size:
        a, b, c = (int(v) for v in bad[0])
        raise GroupConstructionError(f"{G.name}: associativity fails at {(a, b, c)}")


# =========================
# Subgroups
# =========================

def _closure_mask(G: GroupTable, seeds: Iterable[int]) -> np.ndarray:
    mask = np.zeros(G.order, dtype=bool)
    mask[G.identity] = True
    gens = sorted({int(s) for s in seeds} - {G.identity})
    if not gens:
        return mask
    mask[gens] = True
    frontier = np.flatnonzero(mask)
    while frontier.size:
        prods = G.mul[np.ix_(frontier, gens)].ravel()
        new = np.unique(prods[~mask[prods]])
        mask[new] = True
        frontier = new
    return mask


def _is_normal_mask(G: GroupTable, mask: np.ndarray) -> bool:
    members = np.flatnonzero(mask)
    conj = G.mul[G.mul[:, members], G.inv[:, None]]
    return bool(mask[conj].all())


def _subgroup_from_mask(G: GroupTable, mask: np.ndarray) -> Subgroup:
    members = tuple(int(g) for g in np.flatnonzero(mask))
    return Subgroup(G, members, _is_normal_mask(G, mask))


def subgroup_generated(G: GroupTable, seeds: Iterable[int]) -> Subgroup:
    return _subgroup_from_mask(G, _closure_mask(G, seeds))


def make_subgroup(G: GroupTable, members: Iterable[int]) -> Subgroup:
    """驗證後把給定的元素集合包成 Subgroup。"""
    mask = np.zeros(G.order, dtype=bool)
    mask[list(members)] = True
    if not mask[G.identity] or not (_closure_mask(G, np.flatnonzero(mask)) == mask).all():
        raise GroupConstructionError(f"{sorted(members)} is not a subgroup of {G.name}")
    return _subgroup_from_mask(G, mask)


def trivial_subgroup(G: GroupTable) -> Subgroup:
    return Subgroup(G, (G.identity,), True)


def whole_group(G: GroupTable) -> Subgroup:
    return Subgroup(G, tuple(range(G.order)), True)


def center(G: GroupTable) -> Subgroup:
    mask = (G.mul == G.mul.T).all(axis=1)
    return Subgroup(G, tuple(int(g) for g in np.flatnonzero(mask)), True)


def group_info(G: GroupTable) -> GroupInfo:
    orders = {g: int(o) for g, o in enumerate(G.element_orders)}
    return GroupInfo(order=G.order, element_orders=orders, center=center(G))


def normal_closure(G: GroupTable, S: Iterable[int]) -> Subgroup:
    seeds = np.array(sorted({int(s) for s in S}), dtype=np.int64)
    if seeds.size == 0:
        return trivial_subgroup(G)
    mask = np.zeros(G.order, dtype=bool)
    mask[seeds] = True
    # 共軛封閉 → 子群封閉，直到穩定
    while True:
        members = np.flatnonzero(mask)
        conj = G.mul[G.mul[:, members], G.inv[:, None]].ravel()
        closed = _closure_mask(G, np.union1d(members, conj))
        if (closed == mask).all():
            break
        mask = closed
    return Subgroup(G, tuple(int(g) for g in np.flatnonzero(mask)), True)


def _check_cap(G: GroupTable, settings: Optional[Settings]) -> None:
    cfg = settings or get_settings()
    if G.order > cfg.max_group_order:
        raise CapExceededError("max_group_order", cfg.max_group_order, G.order)


def _join_lattice(G: GroupTable, seeds: Sequence[np.ndarray]) -> List[np.ndarray]:
    found: Dict[bytes, np.ndarray] = {}
    trivial = _closure_mask(G, ())
    found[trivial.tobytes()] = trivial
    worklist: List[np.ndarray] = []
    for mask in seeds:
        key = mask.tobytes()
        if key not in found:
            found[key] = mask
            worklist.append(mask)
    while worklist:
        current = worklist.pop()
        for other in list(found.values()):
            joined = _closure_mask(G, np.flatnonzero(current | other))
            key = joined.tobytes()
            if key not in found:
                found[key] = joined
                worklist.append(joined)
    return list(found.values())


def _sorted_subgroups(G: GroupTable, masks: Iterable[np.ndarray]) -> List[Subgroup]:
    subs = [_subgroup_from_mask(G, m) for m in masks]
    subs.sort(key=lambda s: (s.order, s.members))
    return subs


def all_subgroups(G: GroupTable, settings: Optional[Settings] = None) -> List[Subgroup]:
    """由循環子群出發、兩兩取 join 直到封閉。"""
    _check_cap(G, settings)
    seeds = [_closure_mask(G, (g,)) for g in range(G.order)]
    return _sorted_subgroups(G, _join_lattice(G, seeds))


def normal_subgroups(G: GroupTable, settings: Optional[Settings] = None) -> List[Subgroup]:
    # 每個正規子群都是其元素的正規閉包之 join
    _check_cap(G, settings)
    seeds = [normal_closure(G, (g,)).mask.copy() for g in range(G.order)]
    return _sorted_subgroups(G, _join_lattice(G, seeds))


def central_subgroups(G: GroupTable, settings: Optional[Settings] = None) -> List[Subgroup]:
    z = center(G)
    return [H for H in all_subgroups(G, settings) if set(H.members) <= set(z.members)]


# =========================
# Predicates
# =========================

def group_prime(G: GroupTable) -> Optional[int]:
    """若 G 是非平凡 p-群則回傳 p。"""
    primes = primefactors(G.order)
    return int(primes[0]) if len(primes) == 1 else None


def is_p_group(G: GroupTable, p: int) -> bool:
    return group_predicate(G, GroupPredicate.p_group, p).value


def group_predicate(
    G: GroupTable,
    pred: GroupPredicate,
    p: Optional[int] = None,
    settings: Optional[Settings] = None,
) -> PredicateResult:
    if pred == GroupPredicate.p_group:
        if p is None or not isprime(p):
            raise ValueError(f"p_group predicate needs a prime p, got {p!r}")
        for g, o in enumerate(G.element_orders):
            o = int(o)
            if o > 1 and primefactors(o) != [p]:
                return PredicateResult(False, {"element": G.labels[g], "order": o})
        return PredicateResult(True)

    if pred == GroupPredicate.dedekind:
        for H in all_subgroups(G, settings):
            if not H.is_normal:
                return PredicateResult(False, {"subgroup": H.labels(), "order": H.order})
        return PredicateResult(True)

    if pred == GroupPredicate.prime:
        for H in normal_subgroups(G, settings):
            if not H.is_trivial:
                return PredicateResult(False, {"normal_subgroup": H.labels(), "order": H.order})
        return PredicateResult(True)

    if pred == GroupPredicate.locally_normal:
        return PredicateResult(True, note="finite group: sigma(G) = G")

    raise ValueError(f"unsupported group predicate: {pred!r}")


def nu_sigma(G: GroupTable, settings: Optional[Settings] = None) -> NuSigma:
    nu = frozenset(H.order for H in normal_subgroups(G, settings))
    return NuSigma(nu=nu, sigma=whole_group(G))


# =========================
# Quotients / embeddings
# =========================

def quotient_group(G: GroupTable, H: Subgroup) -> QuotientGroup:
    if not H.is_normal:
        raise NotNormalError(f"subgroup of order {H.order} is not normal in {G.name}")
    coset = np.full(G.order, -1, dtype=np.int64)
    reps: List[int] = []
    members = np.array(H.members, dtype=np.int64)
    for g in range(G.order):
        if coset[g] < 0:
            coset[G.mul[g, members]] = len(reps)
            reps.append(g)
    r = np.array(reps, dtype=np.int64)
    mul = coset[G.mul[np.ix_(r, r)]]
    inv = coset[G.inv[r]]
    labels = tuple(G.labels[g] for g in reps)
    gens = tuple(sorted({int(coset[g]) for g in G.generators} - {0}))
    Q = GroupTable(f"{G.name}/N{H.order}", mul, inv, labels, gens)
    validate_group(Q)
    return QuotientGroup(group=Q, proj=coset)


def subgroup_as_group(G: GroupTable, H: Subgroup) -> Tuple[GroupTable, np.ndarray]:
    """把 H 本身建成 GroupTable，並回傳 H 的 id → G 的 id 嵌入。"""
    emb = np.array(H.members, dtype=np.int64)
    index = np.full(G.order, -1, dtype=np.int64)
    index[emb] = np.arange(len(emb))
    mul = index[G.mul[np.ix_(emb, emb)]]
    inv = index[G.inv[emb]]
    gens: List[int] = []
    span = _closure_mask(G, ())
    for g in H.members:
        if not span[g]:
            gens.append(int(index[g]))
            span = _closure_mask(G, [int(emb[x]) for x in gens])
    labels = tuple(G.labels[g] for g in H.members)
    return GroupTable(f"{G.name}|N{H.order}", mul, inv, labels, tuple(gens)), emb
