from dataclasses import dataclass
from typing import Any, Dict, Iterable, List, Optional, Tuple
import logging
import time

import numpy as np

from app.core.config import Settings, get_settings
from app.core.errors import AlgebraError, CapExceededError, InconsistencyError, RingMismatchError
from app.models.enums import IdealProperty, Side
from app.models.schemas import IdealDump, PropertyReport
from app.rings.builder import make_ring
from app.rings.finite_ring import FiniteRing, as_ids
from app.rings.ideal import (
    Ideal,
    additive_span,
    ideal_from_mask,
    ideal_from_span,
    same_ring,
    two_sided_candidates,
    zero_ideal,
)

logger = logging.getLogger(__name__)


# =========================
# Results
# =========================

@dataclass(frozen=True)
class PropertyResult:
    prop: IdealProperty
    value: bool
    witness: Optional[Dict[str, Any]] = None
    note: Optional[str] = None


@dataclass(frozen=True, eq=False)
class Annihilator:
    side: Side
    ideal: Ideal
    two_sided: bool

    def as_ideal(self) -> Ideal:
        if not self.two_sided:
            raise AlgebraError(f"{self.side.value} annihilator is only a one-sided ideal")
        return self.ideal


def _require(R: FiniteRing, cap: str, settings: Optional[Settings]) -> Settings:
    cfg = settings or get_settings()
    limit = getattr(cfg, cap)
    if R.size > limit:
        raise CapExceededError(cap, limit, R.size)
    return cfg


# =========================
# Closure & arithmetic
# =========================

def ideal_closure(R: FiniteRing, gens: Iterable[int], settings: Optional[Settings] = None) -> Ideal:
    gens = tuple(int(g) for g in gens)
    live = [g for g in gens if g != R.zero]
    if not live:
        return Ideal(R, zero_ideal(R).mask, (), gens)
    if len(live) == 1:
        return principal_ideal(R, live[0], settings)
    return ideal_from_span(R, two_sided_candidates(R, live), gens, settings)


def principal_ideal(R: FiniteRing, x: int, settings: Optional[Settings] = None) -> Ideal:
    x = int(x)
    if x == R.zero:
        return zero_ideal(R)
    return R.memo(
        ("principal", x),
        lambda: ideal_from_span(R, two_sided_candidates(R, [x]), (x,), settings),
    )


def ideal_sum(I: Ideal, J: Ideal, settings: Optional[Settings] = None) -> Ideal:
    R = same_ring(I, J)
    mask, span = additive_span(R, J.span, I.mask.copy(), I.span)
    mask.setflags(write=False)
    return Ideal(R, mask, span, I.generators + J.generators)


def ideal_product(I: Ideal, J: Ideal, settings: Optional[Settings] = None) -> Ideal:
    R = same_ring(I, J)
    if I.is_zero or J.is_zero:
        return zero_ideal(R)
    a, b = as_ids(I.span), as_ids(J.span)
    prods = R.mul_arr(a[:, None], b[None, :]).ravel()
    return ideal_from_span(R, prods, settings=settings)


def ideal_power(I: Ideal, k: int, settings: Optional[Settings] = None) -> Ideal:
    if k < 1:
        raise ValueError("power needs k >= 1")
    P = I
    for _ in range(k - 1):
        P = ideal_product(P, I, settings)
    return P


def ideal_arith(op: str, I: Ideal, J: Optional[Ideal] = None, k: int = 1, settings: Optional[Settings] = None) -> Ideal:
    if op == "sum":
        return ideal_sum(I, J, settings)
    if op == "product":
        return ideal_product(I, J, settings)
    if op == "power":
        return ideal_power(I, k, settings)
    raise ValueError(f"unknown ideal operation: {op!r}")


def ideal_intersection(I: Ideal, J: Ideal) -> Ideal:
    R = same_ring(I, J)
    return ideal_from_mask(R, I.mask & J.mask)


def products_within(I: Ideal, V: Ideal, W: Ideal) -> bool:
    """VW ⊆ I，只比對兩個 span 的兩兩乘積。"""
    if V.is_zero or W.is_zero:
        return True
    a, b = as_ids(V.span), as_ids(W.span)
    return bool(I.mask[I.ring.mul_arr(a[:, None], b[None, :])].all())


def nilpotent_mod(V: Ideal, I: Ideal, settings: Optional[Settings] = None) -> Optional[int]:
    """最小 k 使 V^k ⊆ I；若鏈 V ⊇ V² ⊇ … 停在不含於 I 的理想則回傳 None。"""
    same_ring(V, I)
    if I.contains_ideal(V):
        return 1
    P, k = V, 1
    while True:
        nxt = ideal_product(P, V, settings)
        k += 1
        if I.contains_ideal(nxt):
            return k
        if nxt.size == P.size:
            return None
        P = nxt


def nilpotency_index(I: Ideal, settings: Optional[Settings] = None) -> Optional[int]:
    return nilpotent_mod(I, zero_ideal(I.ring), settings)


def is_nilpotent_integer(A: FiniteRing, n: int) -> bool:
    """n·1 在 A 中是否冪零。"""
    return A.nilpotency_index(A.scalar(n)) is not None


# =========================
# Principal ideals
# =========================

def distinct_principal_ideals(R: FiniteRing, settings: Optional[Settings] = None) -> List[Tuple[int, Ideal]]:
    """所有相異的主理想，依最小生成元排序。"""
    cfg = _require(R, "max_property_size", settings)

    def build() -> List[Tuple[int, Ideal]]:
        seen: Dict[bytes, int] = {}
        out: List[Tuple[int, Ideal]] = []
        for x in range(R.size):
            P = principal_ideal(R, x, cfg)
            key = P.mask.tobytes()
            if key not in seen:
                seen[key] = x
                out.append((x, P))
        logger.debug("%s has %d distinct principal ideals", R.name, len(out))
        return out

    return R.memo("principals", build)


def least_idempotent_generator(P: Ideal, settings: Optional[Settings] = None) -> Optional[int]:
    R = P.ring
    m = P.members
    sq = R.mul_arr(m, m)
    for e in m[(sq == m) & (m != R.zero)]:
        if principal_ideal(R, int(e), settings) == P:
            return int(e)
    return None


def _describe(R: FiniteRing, x: int, P: Ideal, settings: Optional[Settings]) -> Dict[str, Any]:
    e = least_idempotent_generator(P, settings)
    return {
        "element": x,
        "label": R.label(x),
        "ideal_size": P.size,
        "idempotent": R.label(e) if e is not None else None,
    }


def _pair_witness(R: FiniteRing, a: Tuple[int, Ideal], b: Tuple[int, Ideal], settings: Optional[Settings]) -> Dict[str, Any]:
    left, right = _describe(R, *a, settings), _describe(R, *b, settings)
    return {
        "pair": [left["element"], right["element"]],
        "labels": [left["label"], right["label"]],
        "ideal_sizes": [left["ideal_size"], right["ideal_size"]],
        "idempotents": [left["idempotent"], right["idempotent"]],
    }


# =========================
# Property decisions
# =========================

_NILARY_NOTE = "nilary and p-nilary coincide on finite rings"


def check_ideal_property(
    R: FiniteRing,
    I: Ideal,
    prop: IdealProperty,
    settings: Optional[Settings] = None,
) -> PropertyResult:
    """以主理想對窮舉判定理想性質；失敗時附上字典序最小的見證。"""
    cfg = _require(R, "max_property_size", settings)
    if I.ring is not R:
        raise RingMismatchError(f"ideal belongs to {I.ring.name}, not {R.name}")
    prop = IdealProperty(prop)
    principals = distinct_principal_ideals(R, cfg)
    note = "ideal is the whole ring" if I.is_whole else None

    inside = [I.contains_ideal(P) for _, P in principals]
    nil_cache: Dict[int, bool] = {}

    def nil(i: int) -> bool:
        if i not in nil_cache:
            nil_cache[i] = inside[i] or nilpotent_mod(principals[i][1], I, cfg) is not None
        return nil_cache[i]

    if prop == IdealProperty.essential:
        for x, P in principals:
            if P.is_zero:
                continue
            if not (P.mask & I.mask)[1:].any():
                return PropertyResult(prop, False, _describe(R, x, P, cfg), note)
        return PropertyResult(prop, True, None, note)

    if prop == IdealProperty.semiprime:
        for i, (x, P) in enumerate(principals):
            if not inside[i] and products_within(I, P, P):
                return PropertyResult(prop, False, _describe(R, x, P, cfg), note)
        return PropertyResult(prop, True, None, note)

    def settled(i: int, j: int) -> bool:
        if prop == IdealProperty.prime:
            return inside[i] or inside[j]
        if prop == IdealProperty.right_primary:
            return inside[i] or nil(j)
        if prop == IdealProperty.left_primary:
            return nil(i) or inside[j]
        return nil(i) or nil(j)

    m = len(principals)
    for i in range(m):
        for j in range(m):
            if settled(i, j):
                continue
            if products_within(I, principals[i][1], principals[j][1]):
                witness = _pair_witness(R, principals[i], principals[j], cfg)
                if prop == IdealProperty.p_nilary:
                    return PropertyResult(prop, False, witness, _NILARY_NOTE)
                return PropertyResult(prop, False, witness, note)
    if prop in (IdealProperty.nilary, IdealProperty.p_nilary):
        note = note or _NILARY_NOTE
    return PropertyResult(prop, True, None, note)


def is_ring_property(R: FiniteRing, prop: IdealProperty, settings: Optional[Settings] = None) -> bool:
    """環本身的性質＝零理想的性質。"""
    return check_ideal_property(R, zero_ideal(R), prop, settings).value


# =========================
# Radicals
# =========================

def pseudo_radical(R: FiniteRing, I: Ideal, settings: Optional[Settings] = None) -> Ideal:
    """√I：所有模 I 冪零的主理想之和。"""
    cfg = _require(R, "max_property_size", settings)
    mask, span = I.mask.copy(), I.span
    gens: List[int] = list(I.generators)
    for x, P in distinct_principal_ideals(R, cfg):
        if P.is_zero or mask[list(P.span)].all():
            continue
        if nilpotent_mod(P, I, cfg) is not None:
            mask, span = additive_span(R, P.span, mask, span)
            gens.append(x)
    mask.setflags(write=False)
    return Ideal(R, mask, span, tuple(gens))


def prime_radical(R: FiniteRing, settings: Optional[Settings] = None) -> Ideal:
    return R.memo("prime_radical", lambda: pseudo_radical(R, zero_ideal(R), settings))


def units_mask(R: FiniteRing, settings: Optional[Settings] = None) -> np.ndarray:
    cfg = _require(R, "max_property_size", settings)

    def build() -> np.ndarray:
        ids = R.ids
        left = np.zeros(R.size, dtype=bool)
        right = np.zeros(R.size, dtype=bool)
        if R.size <= cfg.table_cap:
            _, mul = R.tables(cfg)
            hits = mul == R.one
            left, right = hits.any(axis=1), hits.any(axis=0)
        else:
            for start in range(0, R.size, 64):
                block = ids[start:start + 64]
                left[block] = (R.mul_arr(block[:, None], ids[None, :]) == R.one).any(axis=1)
                right[block] = (R.mul_arr(ids[None, :], block[:, None]) == R.one).any(axis=1)
        units = left & right
        units.setflags(write=False)
        return units

    return R.memo("units", build)


def jacobson_radical(R: FiniteRing, settings: Optional[Settings] = None) -> Ideal:
    """{x : 1 − rx 對所有 r 都可逆}。"""
    cfg = _require(R, "max_property_size", settings)

    def build() -> Ideal:
        units = units_mask(R, cfg)
        ids = R.ids
        mask = np.zeros(R.size, dtype=bool)
        for start in range(0, R.size, 64):
            block = ids[start:start + 64]
            rx = R.mul_arr(ids[None, :], block[:, None])
            mask[block] = units[R.sub_arr(R.one, rx)].all(axis=1)
        J = ideal_from_mask(R, mask)
        if not _is_two_sided(J):
            raise InconsistencyError(f"Jacobson radical of {R.name} is not two-sided")
        return J

    return R.memo("jacobson", build)


def _is_two_sided(I: Ideal) -> bool:
    R = I.ring
    if I.is_zero:
        return True
    s = as_ids(I.span)
    B = as_ids(R.additive_generators())
    return bool(I.mask[R.mul_arr(s[:, None], B[None, :])].all() and I.mask[R.mul_arr(B[:, None], s[None, :])].all())


# =========================
# Annihilators
# =========================

def annihilator(
    R: FiniteRing,
    X: Any,
    side: Side,
    settings: Optional[Settings] = None,
) -> Annihilator:
    """左：{a : aX = 0}；右：{a : Xa = 0}。X 為 Ideal 時只需掃描其 span。"""
    _require(R, "max_property_size", settings)
    side = Side(side)
    xs = list(X.span) if isinstance(X, Ideal) else [int(x) for x in X]
    ids = R.ids
    mask = np.ones(R.size, dtype=bool)
    for x in xs:
        prod = R.mul_arr(ids, x) if side == Side.left else R.mul_arr(x, ids)
        mask &= prod == R.zero
    ideal = ideal_from_mask(R, mask)
    return Annihilator(side=side, ideal=ideal, two_sided=_is_two_sided(ideal))


# =========================
# Ideal lattice & oracle
# =========================

def enumerate_all_ideals(R: FiniteRing, settings: Optional[Settings] = None) -> List[Ideal]:
    """所有雙邊理想，各出現一次：從零理想起不斷加上主理想直到封閉。"""
    cfg = _require(R, "max_oracle_size", settings)

    def build() -> List[Ideal]:
        principals = [P for _, P in distinct_principal_ideals(R, cfg)]
        zero = zero_ideal(R)
        found: Dict[bytes, Ideal] = {zero.mask.tobytes(): zero}
        queue = [zero]
        while queue:
            current = queue.pop()
            for P in principals:
                if current.contains_ideal(P):
                    continue
                S = ideal_sum(current, P, cfg)
                key = S.mask.tobytes()
                if key not in found:
                    found[key] = S
                    queue.append(S)
                    if len(found) > cfg.max_ideal_count:
                        raise CapExceededError("max_ideal_count", cfg.max_ideal_count, len(found))
        ideals = sorted(found.values(), key=lambda J: (J.size, tuple(J.members)))
        logger.debug("%s has %d ideals", R.name, len(ideals))
        return ideals

    return R.memo("all_ideals", build)


def _ideal_witness(V: Ideal, W: Optional[Ideal] = None) -> Dict[str, Any]:
    R = V.ring
    out = {"ideals": [[R.label(g) for g in V.span]], "ideal_sizes": [V.size]}
    if W is not None:
        out["ideals"].append([R.label(g) for g in W.span])
        out["ideal_sizes"].append(W.size)
    return out


def exhaustive_property_oracle(
    R: FiniteRing,
    I: Ideal,
    prop: IdealProperty,
    settings: Optional[Settings] = None,
) -> PropertyResult:
    """以「所有理想對」直接套定義判定性質，只用來驗證主理想化約。"""
    cfg = _require(R, "max_oracle_size", settings)
    prop = IdealProperty(prop)
    ideals = enumerate_all_ideals(R, cfg)
    if prop == IdealProperty.p_nilary:
        principal_keys = {P.mask.tobytes() for _, P in distinct_principal_ideals(R, cfg)}
        ideals = [V for V in ideals if V.mask.tobytes() in principal_keys]

    inside = [I.contains_ideal(V) for V in ideals]
    nil = [inside[k] or nilpotent_mod(V, I, cfg) is not None for k, V in enumerate(ideals)]

    if prop == IdealProperty.essential:
        for V in ideals:
            if not V.is_zero and not (V.mask & I.mask)[1:].any():
                return PropertyResult(prop, False, _ideal_witness(V))
        return PropertyResult(prop, True)

    if prop == IdealProperty.semiprime:
        for k, V in enumerate(ideals):
            if not inside[k] and products_within(I, V, V):
                return PropertyResult(prop, False, _ideal_witness(V))
        return PropertyResult(prop, True)

    for a, V in enumerate(ideals):
        for b, W in enumerate(ideals):
            if prop == IdealProperty.prime:
                ok = inside[a] or inside[b]
            elif prop == IdealProperty.right_primary:
                ok = inside[a] or nil[b]
            elif prop == IdealProperty.left_primary:
                ok = nil[a] or inside[b]
            else:
                ok = nil[a] or nil[b]
            if not ok and products_within(I, V, W):
                return PropertyResult(prop, False, _ideal_witness(V, W))
    return PropertyResult(prop, True)


# =========================
# Selectors / serialisation
# =========================

def parse_ideal_selector(R: FiniteRing, text: Optional[str], settings: Optional[Settings] = None) -> Ideal:
    """`--ideal` 參數：以逗號分隔的元素標籤或 `#id`；空值代表零理想。"""
    if not text or not text.strip():
        return zero_ideal(R)
    gens = [R.element(part, settings) for part in _split_selector(text)]
    return ideal_closure(R, gens, settings)


def _split_selector(text: str) -> List[str]:
    # 標籤本身可能含逗號（例如 (a,b)），只在括號外切開
    parts, depth, cur = [], 0, []
    for ch in text:
        if ch in "([":
            depth += 1
        elif ch in ")]":
            depth -= 1
        if ch in ",;" and depth == 0:
            parts.append("".join(cur))
            cur = []
        else:
            cur.append(ch)
    parts.append("".join(cur))
    return [p.strip() for p in parts if p.strip()]


def dump_ideal(I: Ideal) -> Dict[str, Any]:
    R = I.ring
    return {"ring": R.name, "generators": [R.label(g) for g in I.generators], "size": I.size}


# =========================
# Entry point for `check`
# =========================

def evaluate_property(
    expr: str,
    prop: IdealProperty,
    ideal: Optional[str] = None,
    settings: Optional[Settings] = None,
    oracle: bool = False,
    timing: bool = False,
) -> PropertyReport:
    """建環、解析 `--ideal`、判定性質；oracle=True 時另以全理想定義交叉驗證。"""
    cfg = settings or get_settings()
    started = time.perf_counter()
    R = make_ring(expr, cfg)
    I = parse_ideal_selector(R, ideal, cfg)
    result = check_ideal_property(R, I, prop, cfg)

    oracle_value = None
    if oracle:
        oracle_value = exhaustive_property_oracle(R, I, prop, cfg).value
        if oracle_value != result.value:
            logger.error("Oracle disagrees on %s for %s: engine=%s oracle=%s", R.name, prop, result.value, oracle_value)
            raise InconsistencyError(f"principal-pair decision differs from the all-ideals oracle on {R.name}")

    report = PropertyReport(
        expr=R.name,
        property=result.prop,
        ideal=IdealDump(**dump_ideal(I)),
        value=result.value,
        witness=result.witness,
        note=result.note,
        oracle=oracle_value,
    )
    if timing:
        report.runtime_ms = round((time.perf_counter() - started) * 1000, 3)
    return report
