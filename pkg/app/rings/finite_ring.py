from abc import ABC, abstractmethod
from dataclasses import dataclass
from functools import cached_property
from threading import Lock
from typing import Any, Callable, Dict, List, Optional, Sequence, Tuple
import logging

import numpy as np

from app.core.config import Settings, get_settings
from app.core.errors import CapExceededError, RingConstructionError

logger = logging.getLogger(__name__)


def as_ids(x: Any) -> np.ndarray:
    return np.asarray(x, dtype=np.int64)


class FiniteRing(ABC):
    """有限單位環的共同介面。

    元素是 0..size-1 的整數 id，0 固定是零元。子類別只需提供
    向量化的 `_add / _mul / _neg`（輸入為等長一維 int64 陣列）、
    `label` 與一組加法生成元；其餘運算都由這裡推導。
    """

    name: str
    size: int
    one: int
    zero: int = 0
    # on-demand 乘法 memo 的上限，滿了就整個清掉
    mul_cache_limit: int = 1 << 16

    def __init__(self) -> None:
        self._memo: Dict[Any, Any] = {}
        self._memo_lock = Lock()
        self._mul_cache: Dict[Tuple[int, int], int] = {}
        self._mul_lock = Lock()

    # ---- 子類別實作 ----

    @abstractmethod
    def _add(self, x: np.ndarray, y: np.ndarray) -> np.ndarray:
        ...

    @abstractmethod
    def _mul(self, x: np.ndarray, y: np.ndarray) -> np.ndarray:
        ...

    @abstractmethod
    def _neg(self, x: np.ndarray) -> np.ndarray:
        ...

    @abstractmethod
    def label(self, x: int) -> str:
        ...

    @abstractmethod
    def additive_generators(self) -> Tuple[int, ...]:
        """一組加法生成元（作為加法群生成整個環）。"""

    @property
    @abstractmethod
    def provenance(self) -> Dict[str, Any]:
        ...

    # ---- 向量化運算（支援 broadcasting）----

    def _binary(self, op: Callable, x: Any, y: Any) -> np.ndarray:
        a, b = np.broadcast_arrays(as_ids(x), as_ids(y))
        shape = a.shape
        return op(a.ravel(), b.ravel()).reshape(shape)

    def add_arr(self, x: Any, y: Any) -> np.ndarray:
        return self._binary(self._add, x, y)

    def mul_arr(self, x: Any, y: Any) -> np.ndarray:
        return self._binary(self._mul, x, y)

    def neg_arr(self, x: Any) -> np.ndarray:
        a = as_ids(x)
        return self._neg(a.ravel()).reshape(a.shape)

    def sub_arr(self, x: Any, y: Any) -> np.ndarray:
        return self.add_arr(x, self.neg_arr(y))

    # ---- 單一元素運算 ----

    def add(self, x: int, y: int) -> int:
        return int(self._add(as_ids([x]), as_ids([y]))[0])

    def neg(self, x: int) -> int:
        return int(self._neg(as_ids([x]))[0])

    def sub(self, x: int, y: int) -> int:
        return self.add(x, self.neg(y))

    def mul(self, x: int, y: int) -> int:
        key = (int(x), int(y))
        hit = self._mul_cache.get(key)
        if hit is not None:
            return hit
        value = int(self._mul(as_ids([x]), as_ids([y]))[0])
        with self._mul_lock:
            if len(self._mul_cache) >= self.mul_cache_limit:
                self._mul_cache.clear()
            self._mul_cache.setdefault(key, value)
        return value

    def power(self, x: int, k: int) -> int:
        result, base = self.one, int(x)
        while k > 0:
            if k & 1:
                result = self.mul(result, base)
            base = self.mul(base, base)
            k >>= 1
        return result

    def scalar(self, k: int, x: Optional[int] = None) -> int:
        """k·x（x 預設為 1），以倍加計算。"""
        base = self.one if x is None else int(x)
        if k < 0:
            base, k = self.neg(base), -k
        result = self.zero
        while k > 0:
            if k & 1:
                result = self.add(result, base)
            base = self.add(base, base)
            k >>= 1
        return result

    def additive_order(self, x: int) -> int:
        k, acc = 1, int(x)
        while acc != self.zero:
            acc = self.add(acc, x)
            k += 1
        return k

    @cached_property
    def characteristic(self) -> int:
        return self.additive_order(self.one)

    def nilpotency_index(self, x: int) -> Optional[int]:
        """最小 k 使 x^k = 0；冪次進入循環仍未歸零則回傳 None。"""
        seen = set()
        cur, k = int(x), 1
        while cur != self.zero:
            if cur in seen:
                return None
            seen.add(cur)
            cur = self.mul(cur, x)
            k += 1
        return k

    def is_unit(self, x: int) -> bool:
        # 有限環中 x 可逆 ⟺ 1 出現在 x 的冪次序列
        seen = set()
        cur = int(x)
        while cur not in seen:
            if cur == self.one:
                return True
            seen.add(cur)
            cur = self.mul(cur, x)
        return False

    def inverse(self, x: int) -> Optional[int]:
        if not self.is_unit(x):
            return None
        prev, cur = self.one, int(x)
        while cur != self.one:
            prev, cur = cur, self.mul(cur, x)
        return prev

    def is_idempotent(self, x: int) -> bool:
        return self.mul(x, x) == x

    def labels_of(self, ids: Sequence[int]) -> List[str]:
        return [self.label(int(i)) for i in ids]

    @property
    def ids(self) -> np.ndarray:
        return np.arange(self.size, dtype=np.int64)

    @cached_property
    def is_commutative(self) -> bool:
        gens = as_ids(self.additive_generators())
        return bool((self.mul_arr(gens[:, None], gens[None, :]) == self.mul_arr(gens[None, :], gens[:, None])).all())

    # ---- 表格與 memo ----

    def tables(self, settings: Optional[Settings] = None) -> Tuple[np.ndarray, np.ndarray]:
        cfg = settings or get_settings()
        if self.size > cfg.table_cap:
            raise CapExceededError("table_cap", cfg.table_cap, self.size)
        return self.memo("tables", self._build_tables)

    def _build_tables(self) -> Tuple[np.ndarray, np.ndarray]:
        ids = self.ids
        add = self.add_arr(ids[:, None], ids[None, :])
        mul = self.mul_arr(ids[:, None], ids[None, :])
        add.setflags(write=False)
        mul.setflags(write=False)
        return add, mul

    def memo(self, key: Any, factory: Callable[[], Any]) -> Any:
        """每個環一份的 insert-if-absent 快取；factory 在鎖外執行。"""
        hit = self._memo.get(key, _MISSING)
        if hit is not _MISSING:
            return hit
        value = factory()
        with self._memo_lock:
            return self._memo.setdefault(key, value)

    def element(self, text: str, settings: Optional[Settings] = None) -> int:
        """依標籤或 `#id` 取得元素。"""
        text = text.strip()
        if text.startswith("#"):
            x = int(text[1:])
            if not 0 <= x < self.size:
                raise KeyError(f"element id {x} out of range for {self.name}")
            return x
        cfg = settings or get_settings()
        if self.size > cfg.max_materialized_size:
            raise CapExceededError("max_materialized_size", cfg.max_materialized_size, self.size)
        index = self.memo(
            "label_index",
            lambda: {self.label(i).replace(" ", ""): i for i in range(self.size)},
        )
        try:
            return index[text.replace(" ", "")]
        except KeyError:
            raise KeyError(f"no element labelled {text!r} in {self.name}") from None

    def __repr__(self) -> str:
        return f"{type(self).__name__}({self.name}, size={self.size})"


_MISSING = object()


# =========================
# Z_n
# =========================

class ZModRing(FiniteRing):
    def __init__(self, n: int) -> None:
        if n < 2:
            raise RingConstructionError("modulus must be >= 2")
        super().__init__()
        self.n = n
        self.size = n
        self.one = 1
        self.name = f"Z{n}"

    def _add(self, x, y):
        return (x + y) % self.n

    def _mul(self, x, y):
        return (x * y) % self.n

    def _neg(self, x):
        return (-x) % self.n

    def label(self, x: int) -> str:
        return str(int(x))

    def additive_generators(self) -> Tuple[int, ...]:
        return (1,)

    @property
    def characteristic(self) -> int:
        return self.n

    def scalar(self, k: int, x: Optional[int] = None) -> int:
        return (k * (1 if x is None else int(x))) % self.n

    @property
    def provenance(self) -> Dict[str, Any]:
        return {"kind": "zmod", "n": self.n}


# =========================
# R × S
# =========================

class ProductRing(FiniteRing):
    """直積 R × S，id = r * |S| + s。"""

    def __init__(self, left: FiniteRing, right: FiniteRing, name: Optional[str] = None) -> None:
        super().__init__()
        self.left = left
        self.right = right
        self.size = left.size * right.size
        self.one = self.pair(left.one, right.one)
        self.name = name or f"{left.name} x {right.name}"

    def pair(self, r: int, s: int) -> int:
        return int(r) * self.right.size + int(s)

    def split(self, x: np.ndarray) -> Tuple[np.ndarray, np.ndarray]:
        return np.divmod(x, self.right.size)

    def _add(self, x, y):
        (a, b), (c, d) = self.split(x), self.split(y)
        return self.left.add_arr(a, c) * self.right.size + self.right.add_arr(b, d)

    def _mul(self, x, y):
        (a, b), (c, d) = self.split(x), self.split(y)
        return self.left.mul_arr(a, c) * self.right.size + self.right.mul_arr(b, d)

    def _neg(self, x):
        a, b = self.split(x)
        return self.left.neg_arr(a) * self.right.size + self.right.neg_arr(b)

    def label(self, x: int) -> str:
        a, b = divmod(int(x), self.right.size)
        return f"({self.left.label(a)},{self.right.label(b)})"

    def additive_generators(self) -> Tuple[int, ...]:
        gens = [g * self.right.size for g in self.left.additive_generators()]
        gens += list(self.right.additive_generators())
        return tuple(gens)

    @property
    def provenance(self) -> Dict[str, Any]:
        return {"kind": "product", "left": self.left.name, "right": self.right.name}


# =========================
# 明確表格
# =========================

def extend_span(R: FiniteRing, mask: np.ndarray, s: int) -> np.ndarray:
    """加法子群 M 與元素 s 生成的子群：M ∪ (M+s) ∪ (M+2s) ∪ … 直到 ks ∈ M。"""
    members = np.flatnonzero(mask)
    grown = mask.copy()
    cur = int(s)
    while not mask[cur]:
        grown[R.add_arr(members, cur)] = True
        cur = R.add(cur, s)
    return grown


def greedy_additive_generators(ring: FiniteRing, candidates: Optional[Sequence[int]] = None) -> Tuple[int, ...]:
    """由小到大挑元素，直到加法生成整個環。"""
    mask = np.zeros(ring.size, dtype=bool)
    mask[ring.zero] = True
    gens: List[int] = []
    pool = ring.ids if candidates is None else as_ids(candidates)
    for x in pool:
        x = int(x)
        if not mask[x]:
            mask = extend_span(ring, mask, x)
            gens.append(x)
            if mask.all():
                break
    return tuple(gens)


class TableRing(FiniteRing):
    """以完整加法/乘法表給定的環（手工建構或測試用）。"""

    def __init__(
        self,
        name: str,
        add: np.ndarray,
        mul: np.ndarray,
        one: int,
        labels: Optional[Sequence[str]] = None,
        provenance: Optional[Dict[str, Any]] = None,
    ) -> None:
        super().__init__()
        add, mul = as_ids(add), as_ids(mul)
        n = add.shape[0]
        if add.shape != (n, n) or mul.shape != (n, n):
            raise RingConstructionError(f"{name}: tables must be square and of equal size")
        self.name = name
        self.size = n
        self.one = int(one)
        self.add_table = add
        self.mul_table = mul
        zero_pos = np.argwhere(add == 0)
        self.neg_table = np.zeros(n, dtype=np.int64)
        self.neg_table[zero_pos[:, 0]] = zero_pos[:, 1]
        self._labels = tuple(labels) if labels is not None else tuple(str(i) for i in range(n))
        self._provenance = provenance or {"kind": "table"}

    def _add(self, x, y):
        return self.add_table[x, y]

    def _mul(self, x, y):
        return self.mul_table[x, y]

    def _neg(self, x):
        return self.neg_table[x]

    def label(self, x: int) -> str:
        return self._labels[int(x)]

    @cached_property
    def _gens(self) -> Tuple[int, ...]:
        return greedy_additive_generators(self)

    def additive_generators(self) -> Tuple[int, ...]:
        return self._gens

    def _build_tables(self):
        return self.add_table, self.mul_table

    @property
    def provenance(self) -> Dict[str, Any]:
        return dict(self._provenance)


# =========================
# 公理驗證
# =========================

@dataclass(frozen=True)
class AxiomReport:
    passed: bool
    exhaustive: bool
    law: Optional[str] = None
    triple: Optional[Tuple[int, ...]] = None
    checked: int = 0


def _first_failure(bad: np.ndarray) -> Optional[Tuple[int, ...]]:
    hits = np.argwhere(bad)
    return tuple(int(v) for v in hits[0]) if hits.size else None


def validate_ring_axioms(
    R: FiniteRing,
    settings: Optional[Settings] = None,
    seed: Optional[int] = None,
) -> AxiomReport:
    """檢查環公理；小環逐一窮舉所有三元組，大環以固定種子抽樣。

    失敗時回傳第一個違反的定律與三元組，不丟例外。
    """
    cfg = settings or get_settings()
    if R.one == R.zero:
        return AxiomReport(False, True, "one != zero", (R.one,))
    if R.size <= cfg.validation_exhaustive_cap:
        return _validate_exhaustive(R, cfg)
    return _validate_sampled(R, cfg, cfg.seed if seed is None else seed)


def _validate_exhaustive(R: FiniteRing, cfg: Settings) -> AxiomReport:
    add, mul = R.tables(cfg) if R.size <= cfg.table_cap else R._build_tables()
    neg = R.neg_arr(R.ids)
    ids = R.ids
    n = R.size

    pair_laws: List[Tuple[str, np.ndarray]] = [
        ("additive identity", (add[:, 0] != ids) | (add[0, :] != ids)),
        ("additive commutativity", add != add.T),
        ("additive inverse", add[ids, neg] != 0),
        ("multiplicative identity", (mul[:, R.one] != ids) | (mul[R.one, :] != ids)),
    ]
    for law, bad in pair_laws:
        hit = _first_failure(bad)
        if hit is not None:
            return AxiomReport(False, True, law, hit, n * n)

    # 三元組逐列檢查：固定 a，掃描所有 (b, c)
    for a in range(n):
        checks = (
            ("additive associativity", add[add[a, :][:, None], ids[None, :]] != add[a, add]),
            ("left distributivity", mul[a, add] != add[mul[a, :][:, None], mul[a, :][None, :]]),
            ("right distributivity", mul[add[a, :][:, None], ids[None, :]] != add[mul[a, :][None, :], mul]),
            ("multiplicative associativity", mul[mul[a, :][:, None], ids[None, :]] != mul[a, mul]),
        )
        for law, bad in checks:
            hit = _first_failure(bad)
            if hit is not None:
                return AxiomReport(False, True, law, (a,) + hit, (a + 1) * n * n)
    return AxiomReport(True, True, checked=n ** 3)


def _validate_sampled(R: FiniteRing, cfg: Settings, seed: int) -> AxiomReport:
    rng = np.random.default_rng(seed)
    k = cfg.validation_samples
    a, b, c = (rng.integers(0, R.size, size=k) for _ in range(3))
    ab = R.add_arr(a, b)
    laws = (
        ("additive identity", R.add_arr(a, 0) != a),
        ("additive commutativity", ab != R.add_arr(b, a)),
        ("additive inverse", R.add_arr(a, R.neg_arr(a)) != 0),
        ("multiplicative identity", (R.mul_arr(a, R.one) != a) | (R.mul_arr(R.one, a) != a)),
        ("additive associativity", R.add_arr(ab, c) != R.add_arr(a, R.add_arr(b, c))),
        ("left distributivity", R.mul_arr(a, R.add_arr(b, c)) != R.add_arr(R.mul_arr(a, b), R.mul_arr(a, c))),
        ("right distributivity", R.mul_arr(ab, c) != R.add_arr(R.mul_arr(a, c), R.mul_arr(b, c))),
        ("multiplicative associativity", R.mul_arr(R.mul_arr(a, b), c) != R.mul_arr(a, R.mul_arr(b, c))),
    )
    for law, bad in laws:
        idx = np.flatnonzero(bad)
        if idx.size:
            i = int(idx[0])
            return AxiomReport(False, False, law, (int(a[i]), int(b[i]), int(c[i])), k)
    return AxiomReport(True, False, checked=k)


def dump_ring(R: FiniteRing, settings: Optional[Settings] = None) -> Dict[str, Any]:
    cfg = settings or get_settings()
    doc: Dict[str, Any] = {
        "descriptor": R.name,
        "size": R.size,
        "characteristic": R.characteristic,
        "provenance": R.provenance,
    }
    if R.size <= cfg.table_cap:
        add, mul = R.tables(cfg)
        doc["tables"] = {"add": add.tolist(), "mul": mul.tolist()}
    else:
        doc["tables"] = "on-demand"
    return doc
