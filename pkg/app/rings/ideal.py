from dataclasses import dataclass
from functools import cached_property
from typing import Iterable, List, Optional, Tuple

import numpy as np

from app.core.config import Settings, get_settings
from app.core.errors import CapExceededError, RingMismatchError
from app.rings.finite_ring import FiniteRing, as_ids, extend_span


@dataclass(frozen=True, eq=False)
class Ideal:
    """雙邊理想：成員 mask + 加法生成集合 span + 使用者給的 generators。

    span 通常遠小於成員數，包含關係與乘積都只需在 span 上計算。
    """

    ring: FiniteRing
    mask: np.ndarray
    span: Tuple[int, ...]
    generators: Tuple[int, ...]

    @property
    def size(self) -> int:
        return int(self.mask.sum())

    @cached_property
    def members(self) -> np.ndarray:
        return np.flatnonzero(self.mask)

    @property
    def is_zero(self) -> bool:
        return not self.span

    @property
    def is_whole(self) -> bool:
        return bool(self.mask.all())

    def __contains__(self, x: int) -> bool:
        return bool(self.mask[int(x)])

    def contains_ideal(self, other: "Ideal") -> bool:
        """other ⊆ self，只需檢查 other 的加法生成元。"""
        same_ring(self, other)
        return bool(self.mask[list(other.span)].all()) if other.span else True

    def __eq__(self, other: object) -> bool:
        return (
            isinstance(other, Ideal)
            and other.ring is self.ring
            and other.size == self.size
            and bool((other.mask == self.mask).all())
        )

    def __hash__(self) -> int:
        return hash((id(self.ring), self.mask.tobytes()))

    def __repr__(self) -> str:
        return f"Ideal({self.ring.name}, size={self.size}, gens={list(self.generators)})"


def same_ring(*ideals: Ideal) -> FiniteRing:
    R = ideals[0].ring
    for I in ideals[1:]:
        if I.ring is not R:
            raise RingMismatchError(f"ideals live in different rings: {R.name} vs {I.ring.name}")
    return R


def check_materializable(R: FiniteRing, settings: Optional[Settings] = None) -> None:
    cfg = settings or get_settings()
    if R.size > cfg.max_materialized_size:
        raise CapExceededError("max_materialized_size", cfg.max_materialized_size, R.size)


def additive_span(
    R: FiniteRing,
    seeds: Iterable[int],
    mask: Optional[np.ndarray] = None,
    span: Tuple[int, ...] = (),
) -> Tuple[np.ndarray, Tuple[int, ...]]:
    """從既有的加法子群 (mask, span) 出發，加入 seeds 生成的子群。"""
    if mask is None:
        mask = np.zeros(R.size, dtype=bool)
        mask[R.zero] = True
    grown = list(span)
    for s in seeds:
        s = int(s)
        if not mask[s]:
            mask = extend_span(R, mask, s)
            grown.append(s)
    return mask, tuple(grown)


def _freeze(mask: np.ndarray) -> np.ndarray:
    mask.setflags(write=False)
    return mask


def ideal_from_span(
    R: FiniteRing,
    seeds: Iterable[int],
    generators: Optional[Iterable[int]] = None,
    settings: Optional[Settings] = None,
) -> Ideal:
    """seeds 的加法閉包；呼叫端保證結果已是雙邊理想。"""
    check_materializable(R, settings)
    seeds = list(seeds)
    mask, span = additive_span(R, seeds)
    gens = tuple(int(g) for g in (generators if generators is not None else span))
    return Ideal(R, _freeze(mask), span, gens)


def ideal_from_mask(
    R: FiniteRing,
    mask: np.ndarray,
    generators: Optional[Iterable[int]] = None,
) -> Ideal:
    """由成員 mask 還原 span（由小到大貪婪挑選）。"""
    mask = np.asarray(mask, dtype=bool)
    current, span = additive_span(R, np.flatnonzero(mask))
    if not (current == mask).all():
        raise ValueError("mask is not an additive subgroup")
    gens = tuple(int(g) for g in generators) if generators is not None else span
    return Ideal(R, _freeze(current), span, gens)


def zero_ideal(R: FiniteRing) -> Ideal:
    mask = np.zeros(R.size, dtype=bool)
    mask[R.zero] = True
    return Ideal(R, _freeze(mask), (), ())


def whole_ideal(R: FiniteRing, settings: Optional[Settings] = None) -> Ideal:
    return ideal_from_span(R, R.additive_generators(), (R.one,), settings)


def two_sided_candidates(R: FiniteRing, xs: Iterable[int]) -> List[int]:
    """{b·x·c : b, c 為加法生成元}；其加法閉包即 ⟨X⟩。"""
    B = as_ids(R.additive_generators())
    out: List[int] = []
    for x in xs:
        bx = R.mul_arr(B, int(x))
        out.extend(int(v) for v in np.unique(R.mul_arr(bx[:, None], B[None, :])))
    return out
