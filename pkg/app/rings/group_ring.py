from typing import Any, Dict, Mapping, Optional, Tuple
import logging

import numpy as np

from app.groups.finite_group import GroupTable
from app.rings.finite_ring import FiniteRing, ProductRing, as_ids

logger = logging.getLogger(__name__)


class GroupRing(FiniteRing):
    """群環 A[G]，同時扮演 (A, G, 編碼/解碼) 的 context。

    元素 Σ a_g g 以係數向量表示；id 是以 |A| 為底的混合進位數，
    單位元的係數放在最高位，因此 id 順序就是係數向量的字典序。
    """

    def __init__(self, A: FiniteRing, G: GroupTable, name: Optional[str] = None) -> None:
        super().__init__()
        self.A = A
        self.G = G
        self.q = A.size
        self.n = G.order
        self.size = self.q ** self.n
        self.weights = np.array([self.q ** (self.n - 1 - g) for g in range(self.n)], dtype=np.int64)
        self.one = int(A.one * self.weights[G.identity])
        coeff_name = f"({A.name})" if isinstance(A, ProductRing) else A.name
        self.name = name or f"{coeff_name}[{G.name}]"

    # ---- 編碼 ----

    def decode(self, ids: Any) -> np.ndarray:
        x = as_ids(ids)
        return (x[..., None] // self.weights) % self.q

    def encode(self, coeffs: Any) -> np.ndarray:
        c = as_ids(coeffs)
        return (c * self.weights).sum(axis=-1)

    def coefficients(self, x: int) -> Tuple[int, ...]:
        return tuple(int(c) for c in self.decode(int(x)))

    def element_from(self, terms: Mapping[int, int]) -> int:
        """由 {群元素 id: 係數 id} 組出元素。"""
        c = np.zeros(self.n, dtype=np.int64)
        for g, a in terms.items():
            c[g] = a
        return int(self.encode(c))

    def basis(self, g: int) -> int:
        return int(self.A.one * self.weights[g])

    def embed_coefficient(self, a: Any) -> Any:
        """a ↦ a·1，把 A 視為 A[G] 的子環。"""
        return as_ids(a) * self.weights[self.G.identity]

    # ---- 運算 ----

    def _add(self, x, y):
        return self.encode(self.A.add_arr(self.decode(x), self.decode(y)))

    def _neg(self, x):
        return self.encode(self.A.neg_arr(self.decode(x)))

    def _mul(self, x, y):
        X, Y = self.decode(x), self.decode(y)
        Z = np.zeros_like(X)
        gmul = self.G.mul
        for g in range(self.n):
            xg = X[:, g]
            live = xg != self.A.zero
            if not live.any():
                continue
            for h in range(self.n):
                k = gmul[g, h]
                Z[:, k] = self.A.add_arr(Z[:, k], self.A.mul_arr(xg, Y[:, h]))
        return self.encode(Z)

    @property
    def characteristic(self) -> int:
        return self.A.characteristic

    def additive_generators(self) -> Tuple[int, ...]:
        gens = []
        for g in range(self.n):
            for a in self.A.additive_generators():
                gens.append(int(a * self.weights[g]))
        return tuple(sorted(gens))

    # ---- 顯示 ----

    def label(self, x: int) -> str:
        terms = []
        for g, c in enumerate(self.coefficients(x)):
            if c == self.A.zero:
                continue
            glabel = self.G.labels[g]
            if glabel.startswith("-"):
                glabel = f"({glabel})"
            if g == self.G.identity:
                clabel = self.A.label(c)
                if "+" in clabel and self.decode(int(x))[1:].any():
                    clabel = f"({clabel})"
                terms.append(clabel)
            elif c == self.A.one:
                terms.append(glabel)
            else:
                clabel = self.A.label(c)
                if "+" in clabel:
                    clabel = f"({clabel})"
                terms.append(f"{clabel}{glabel}")
        return "+".join(terms) if terms else "0"

    @property
    def provenance(self) -> Dict[str, Any]:
        return {"kind": "group_ring", "coefficients": self.A.name, "group": self.G.name}


# 群環本身就是 context：A、G、encode/decode 都掛在實例上
GroupRingContext = GroupRing
