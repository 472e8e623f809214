from dataclasses import dataclass
from typing import Any, Dict, List, Optional, Tuple
import logging

import numpy as np

from app.core.config import Settings, get_settings
from app.core.errors import CapExceededError, InconsistencyError, NotCentralError, NotNormalError
from app.groups.finite_group import (
    GroupTable,
    Subgroup,
    center,
    normal_subgroups,
    quotient_group,
    subgroup_as_group,
    whole_group,
)
from app.rings.finite_ring import FiniteRing, as_ids
from app.rings.group_ring import GroupRing
from app.rings.homomorphism import RingHom, is_isomorphism, make_hom
from app.rings.ideal import Ideal, ideal_from_mask, ideal_from_span
from app.rings.quotient import quotient_ring
from app.services.ideal_service import (
    ideal_closure,
    ideal_product,
    prime_radical,
    jacobson_radical,
    units_mask,
)

logger = logging.getLogger(__name__)


# =========================
# ε 與 ε_H
# =========================

def augmentation(R: GroupRing, settings: Optional[Settings] = None) -> RingHom:
    """ε(Σ a_g g) = Σ a_g。"""
    A = R.A

    def eps(ids: np.ndarray) -> np.ndarray:
        coeffs = R.decode(ids)
        total = np.zeros(coeffs.shape[:-1], dtype=np.int64)
        for g in range(R.n):
            total = A.add_arr(total, coeffs[..., g])
        return total

    return R.memo("augmentation", lambda: make_hom(R, A, eps, name="augmentation", settings=settings))


@dataclass(frozen=True, eq=False)
class RelativeMap:
    hom: RingHom
    target: GroupRing
    subgroup: Subgroup


def eps_H(R: GroupRing, H: Subgroup, settings: Optional[Settings] = None) -> RelativeMap:
    """ε_H：A[G] → A[G/H]，Σ a_g g ↦ Σ a_g (gH)。"""
    if not H.is_normal:
        raise NotNormalError(f"subgroup of order {H.order} is not normal in {R.G.name}")
    cfg = settings or get_settings()

    def build() -> RelativeMap:
        Q = quotient_group(R.G, H)
        target = GroupRing(R.A, Q.group)
        if target.size > cfg.max_ring_size:
            raise CapExceededError("max_ring_size", cfg.max_ring_size, target.size)
        proj = Q.proj

        def fn(ids: np.ndarray) -> np.ndarray:
            X = R.decode(ids)
            Y = np.zeros(X.shape[:-1] + (target.n,), dtype=np.int64)
            for g in range(R.n):
                k = proj[g]
                Y[..., k] = R.A.add_arr(Y[..., k], X[..., g])
            return target.encode(Y)

        hom = make_hom(R, target, fn, name=f"eps_H[{H.order}]", settings=cfg)
        return RelativeMap(hom=hom, target=target, subgroup=H)

    return R.memo(("eps_H", H.members), build)


# =========================
# Δ(G), Δ(G,H), Ĥ
# =========================

def one_minus(R: GroupRing, members) -> List[int]:
    return [R.sub(R.one, R.basis(h)) for h in members if h != R.G.identity]


def augmentation_ideal(R: GroupRing, H: Optional[Subgroup] = None, settings: Optional[Settings] = None) -> Ideal:
    """Δ(G)（H 省略時）或 Δ(G,H)；生成元形式與核形式同時算出並比對。"""
    cfg = settings or get_settings()
    H = H or whole_group(R.G)
    if not H.is_normal:
        raise NotNormalError(f"subgroup of order {H.order} is not normal in {R.G.name}")

    def build() -> Ideal:
        closure = ideal_closure(R, one_minus(R, H.members), cfg)
        if H.order == R.G.order:
            kernel = augmentation(R, cfg).kernel(cfg)
        else:
            kernel = eps_H(R, H, cfg).hom.kernel(cfg)
        if not (closure.mask == kernel.mask).all():
            logger.error("Augmentation ideal mismatch on %s for subgroup %s", R.name, H.labels())
            raise InconsistencyError(f"ker(eps_H) != <1-h> on {R.name}")
        return closure

    return R.memo(("delta", H.members), build)


def h_hat(R: GroupRing, H: Subgroup) -> int:
    """Ĥ = Σ_{h∈H} h；H 正規時驗證其為中心元。"""
    x = R.element_from({h: R.A.one for h in H.members})
    if H.is_normal and not is_central(R, x):
        raise InconsistencyError(f"H-hat is not central in {R.name}")
    return x


def is_central(R: FiniteRing, x: int) -> bool:
    B = as_ids(R.additive_generators())
    return bool((R.mul_arr(x, B) == R.mul_arr(B, x)).all())


def one_sided_ideal(R: FiniteRing, xs, side: str, settings: Optional[Settings] = None) -> Ideal:
    """R·X（side="left"）或 X·R（side="right"）的加法閉包。"""
    B = as_ids(R.additive_generators())
    xs = as_ids(list(xs))
    if xs.size == 0:
        return ideal_from_span(R, [], settings=settings)
    prods = R.mul_arr(B[:, None], xs[None, :]) if side == "left" else R.mul_arr(xs[:, None], B[None, :])
    return ideal_from_span(R, prods.ravel(), generators=xs.tolist(), settings=settings)


@dataclass(frozen=True, eq=False)
class RelativeForms:
    kernel: Ideal
    closure: Ideal
    left: Ideal
    right: Ideal

    @property
    def all_equal(self) -> bool:
        ref = self.kernel.mask
        return all((I.mask == ref).all() for I in (self.closure, self.left, self.right))


def relative_augmentation_forms(R: GroupRing, H: Subgroup, settings: Optional[Settings] = None) -> RelativeForms:
    """Δ(G,H) 的四種描述：ker ε_H、⟨1−h⟩、A[G]Δ(H)、Δ(H)A[G]。"""
    cfg = settings or get_settings()
    if H.order == R.G.order:
        kernel = augmentation(R, cfg).kernel(cfg)
    else:
        kernel = eps_H(R, H, cfg).hom.kernel(cfg)
    gens = one_minus(R, H.members)
    closure = ideal_closure(R, gens, cfg)
    return RelativeForms(
        kernel=kernel,
        closure=closure,
        left=one_sided_ideal(R, gens, "left", cfg),
        right=one_sided_ideal(R, gens, "right", cfg),
    )


# =========================
# I[G] 與 (A/I)[G]
# =========================

@dataclass(frozen=True, eq=False)
class ExtensionResult:
    ideal: Ideal
    quotient_map: Optional[RingHom]
    isomorphic: bool


def extend_ideal(R: GroupRing, I: Ideal, settings: Optional[Settings] = None, verify: bool = True) -> ExtensionResult:
    """I[G] = {Σ a_g g : a_g ∈ I}，並驗證 A[G]/I[G] ≅ (A/I)[G]。"""
    cfg = settings or get_settings()
    if I.ring is not R.A:
        raise ValueError("ideal must belong to the coefficient ring")
    seeds = [int(a * R.weights[g]) for g in range(R.n) for a in I.span]
    IG = ideal_from_span(R, seeds, generators=[int(R.embed_coefficient(a)) for a in I.generators], settings=cfg)
    if I.is_whole or not verify:
        return ExtensionResult(ideal=IG, quotient_map=None, isomorphic=I.is_whole)

    B = quotient_ring(I, cfg)
    BG = GroupRing(B.ring, R.G)
    coset = B.ring.coset

    def fn(ids: np.ndarray) -> np.ndarray:
        return BG.encode(coset[R.decode(ids)])

    hom = make_hom(R, BG, fn, name="coefficient projection", settings=cfg)
    ok, _ = is_isomorphism(hom, cfg)
    ker = hom.kernel(cfg)
    if not (ker.mask == IG.mask).all():
        raise InconsistencyError(f"kernel of A[G] -> (A/I)[G] differs from I[G] on {R.name}")
    return ExtensionResult(ideal=IG, quotient_map=hom, isomorphic=ok)


# =========================
# A[H] ⊆ A[G]
# =========================

@dataclass(frozen=True, eq=False)
class SubgroupRing:
    ring: GroupRing
    embedding: np.ndarray  # H 的 id → G 的 id

    def embed(self, R: GroupRing, ids: Any) -> np.ndarray:
        """A[H] 的元素放進 A[G]：係數搬到對應的群元素上。"""
        X = self.ring.decode(ids)
        Y = np.zeros(X.shape[:-1] + (R.n,), dtype=np.int64)
        Y[..., self.embedding] = X
        return R.encode(Y)


def subgroup_ring(R: GroupRing, H: Subgroup, settings: Optional[Settings] = None) -> SubgroupRing:
    def build() -> SubgroupRing:
        table, emb = subgroup_as_group(R.G, H)
        return SubgroupRing(ring=GroupRing(R.A, table), embedding=emb)

    return R.memo(("subring", H.members), build)


def restrict_ideal(R: GroupRing, J: Ideal, sub: SubgroupRing) -> Ideal:
    """J ∩ A[H]，以 A[H] 的理想表示。"""
    images = sub.embed(R, sub.ring.ids)
    return ideal_from_mask(sub.ring, J.mask[images])


def central_product_identity(
    R: GroupRing,
    H: Subgroup,
    I: Ideal,
    J: Ideal,
    settings: Optional[Settings] = None,
) -> bool:
    """(IJ)A[G] = (I·A[G])(J·A[G])；I、J 為 A[H] 的理想，H 在中心裡。"""
    cfg = settings or get_settings()
    z = set(center(R.G).members)
    if not set(H.members) <= z:
        raise NotCentralError(f"subgroup {H.labels()} is not central in {R.G.name}")
    sub = subgroup_ring(R, H, cfg)
    if I.ring is not sub.ring or J.ring is not sub.ring:
        raise ValueError("ideals must belong to A[H] built by subgroup_ring")

    def extend(K: Ideal) -> Ideal:
        return ideal_closure(R, [int(v) for v in sub.embed(R, list(K.span))], cfg) if K.span else ideal_closure(R, [], cfg)

    lhs = extend(ideal_product(I, J, cfg))
    rhs = ideal_product(extend(I), extend(J), cfg)
    same = bool((lhs.mask == rhs.mask).all())
    if not same:
        logger.error("Central product identity failed on %s for H=%s", R.name, H.labels())
    return same


# =========================
# 總覽
# =========================

def ring_info(R: FiniteRing, settings: Optional[Settings] = None) -> Dict[str, Any]:
    cfg = settings or get_settings()
    info: Dict[str, Any] = {
        "expr": R.name,
        "size": R.size,
        "characteristic": R.characteristic,
        "provenance": R.provenance,
        "commutative": R.is_commutative,
    }
    if R.size <= cfg.max_property_size:
        P = prime_radical(R, cfg)
        J = jacobson_radical(R, cfg)
        info["units"] = int(units_mask(R, cfg).sum())
        info["prime_radical"] = {"size": P.size, "span": [R.label(x) for x in P.span]}
        info["jacobson_radical"] = {"size": J.size, "span": [R.label(x) for x in J.span]}
    else:
        info["notes"] = [f"radicals skipped: size {R.size} > max_property_size {cfg.max_property_size}"]
    if isinstance(R, GroupRing) and R.size <= cfg.max_materialized_size:
        G = R.G
        info["group"] = {
            "name": G.name,
            "order": G.order,
            "abelian": G.is_abelian,
            "center_order": center(G).order,
            "element_orders": {G.labels[g]: int(o) for g, o in enumerate(G.element_orders)},
        }
        relative = []
        for H in normal_subgroups(G, cfg):
            if H.is_trivial:
                continue
            D = augmentation_ideal(R, H, cfg)
            relative.append({
                "subgroup": H.labels(),
                "order": H.order,
                "size": D.size,
                "quotient_size": R.size // D.size,
            })
        info["augmentation_ideal_size"] = relative[-1]["size"] if relative else 1
        info["relative_augmentation"] = relative
    return info
