from dataclasses import dataclass
from functools import cached_property
from typing import Any, Dict, Optional, Tuple
import logging

import numpy as np

from app.core.config import Settings
from app.core.errors import RingConstructionError
from app.rings.finite_ring import FiniteRing
from app.rings.homomorphism import RingHom, make_hom
from app.rings.ideal import Ideal, check_materializable

logger = logging.getLogger(__name__)


class QuotientRing(FiniteRing):
    """R/I：陪集依最小代表元排序，運算透過代表元回到 R 計算。"""

    def __init__(self, I: Ideal, settings: Optional[Settings] = None) -> None:
        R = I.ring
        check_materializable(R, settings)
        if I.is_whole:
            raise RingConstructionError(f"quotient of {R.name} by the whole ring has 1 = 0")
        super().__init__()
        coset = np.full(R.size, -1, dtype=np.int64)
        reps = []
        members = I.members
        for x in range(R.size):
            if coset[x] < 0:
                coset[R.add_arr(members, x)] = len(reps)
                reps.append(x)
        self.parent = R
        self.ideal = I
        self.coset = coset
        self.reps = np.array(reps, dtype=np.int64)
        self.size = len(reps)
        self.one = int(coset[R.one])
        self.name = f"{R.name}/I{I.size}"

    def _add(self, x, y):
        return self.coset[self.parent.add_arr(self.reps[x], self.reps[y])]

    def _mul(self, x, y):
        return self.coset[self.parent.mul_arr(self.reps[x], self.reps[y])]

    def _neg(self, x):
        return self.coset[self.parent.neg_arr(self.reps[x])]

    def label(self, x: int) -> str:
        return f"[{self.parent.label(int(self.reps[int(x)]))}]"

    @cached_property
    def _gens(self) -> Tuple[int, ...]:
        images = self.coset[list(self.parent.additive_generators())]
        return tuple(sorted(set(int(v) for v in images) - {0}))

    def additive_generators(self) -> Tuple[int, ...]:
        return self._gens

    @property
    def provenance(self) -> Dict[str, Any]:
        return {
            "kind": "quotient",
            "ring": self.parent.name,
            "ideal_generators": [self.parent.label(g) for g in self.ideal.generators],
            "ideal_size": self.ideal.size,
        }


@dataclass(frozen=True)
class QuotientResult:
    ring: QuotientRing
    projection: RingHom


def quotient_ring(I: Ideal, settings: Optional[Settings] = None) -> QuotientResult:
    Q = QuotientRing(I, settings)
    proj = make_hom(I.ring, Q, lambda ids: Q.coset[ids], name="projection", settings=settings)
    logger.debug("Built %s of size %d", Q.name, Q.size)
    return QuotientResult(ring=Q, projection=proj)
