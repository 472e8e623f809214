from dataclasses import dataclass
from functools import cached_property
from typing import Any, Callable, Dict, Optional, Tuple
import logging

import numpy as np

from app.core.config import Settings, get_settings
from app.core.errors import CapExceededError, InconsistencyError
from app.rings.finite_ring import FiniteRing, as_ids
from app.rings.ideal import Ideal, ideal_from_mask

logger = logging.getLogger(__name__)


@dataclass(frozen=True, eq=False)
class RingHom:
    """元素層級的環同態；建構時已驗證（見 make_hom）。"""

    source: FiniteRing
    target: FiniteRing
    fn: Callable[[np.ndarray], np.ndarray]
    name: str = "hom"

    def __call__(self, x: Any) -> Any:
        a = as_ids(x)
        out = self.fn(a.ravel()).reshape(a.shape)
        return int(out) if out.ndim == 0 else out

    @cached_property
    def images(self) -> np.ndarray:
        return as_ids(self.fn(self.source.ids))

    def kernel(self, settings: Optional[Settings] = None) -> Ideal:
        _check_size(self.source, settings)
        return ideal_from_mask(self.source, self.images == self.target.zero)

    def is_surjective(self, settings: Optional[Settings] = None) -> bool:
        _check_size(self.source, settings)
        hit = np.zeros(self.target.size, dtype=bool)
        hit[self.images] = True
        return bool(hit.all())

    def __repr__(self) -> str:
        return f"RingHom({self.name}: {self.source.name} -> {self.target.name})"


def _check_size(R: FiniteRing, settings: Optional[Settings]) -> None:
    cfg = settings or get_settings()
    if R.size > cfg.max_materialized_size:
        raise CapExceededError("max_materialized_size", cfg.max_materialized_size, R.size)


def verify_hom(source: FiniteRing, target: FiniteRing, fn: Callable[[np.ndarray], np.ndarray]) -> Optional[Dict[str, Any]]:
    """回傳第一個違反的定律；全部成立則回傳 None。

    加法性只需檢查 f(x+b) = f(x)+f(b)（x 遍歷全環、b 為加法生成元），
    乘法性由雙線性化約到生成元兩兩相乘。
    """
    if int(fn(as_ids([source.one]))[0]) != target.one:
        return {"law": "map(1) = 1"}
    ids = source.ids
    fx = as_ids(fn(ids))
    gens = as_ids(source.additive_generators())
    fb = as_ids(fn(gens))
    for b, image in zip(gens, fb):
        bad = np.flatnonzero(as_ids(fn(source.add_arr(ids, b))) != target.add_arr(fx, image))
        if bad.size:
            return {"law": "additivity", "pair": [int(bad[0]), int(b)]}
    prods = source.mul_arr(gens[:, None], gens[None, :])
    lhs = as_ids(fn(prods.ravel())).reshape(prods.shape)
    rhs = target.mul_arr(fb[:, None], fb[None, :])
    bad = np.argwhere(lhs != rhs)
    if bad.size:
        i, j = bad[0]
        return {"law": "multiplicativity", "pair": [int(gens[i]), int(gens[j])]}
    return None


def make_hom(
    source: FiniteRing,
    target: FiniteRing,
    fn: Callable[[np.ndarray], np.ndarray],
    name: str = "hom",
    settings: Optional[Settings] = None,
) -> RingHom:
    _check_size(source, settings)
    failure = verify_hom(source, target, fn)
    if failure is not None:
        logger.error("Homomorphism %s failed verification: %s", name, failure)
        raise InconsistencyError(f"{name} is not a ring homomorphism: {failure}")
    return RingHom(source, target, fn, name)


def is_isomorphism(hom: RingHom, settings: Optional[Settings] = None) -> Tuple[bool, int]:
    """滿射且 |source| / |ker| = |target|；回傳 (結果, 核大小)。"""
    ker = hom.kernel(settings)
    ok = hom.is_surjective(settings) and hom.source.size // ker.size == hom.target.size
    return ok, ker.size
