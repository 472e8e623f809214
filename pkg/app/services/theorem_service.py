from abc import ABC, abstractmethod
from dataclasses import dataclass
from functools import cached_property
from threading import Lock
from typing import Any, Callable, Dict, List, Optional, Tuple
import logging
import time

import numpy as np
from sympy import factorint, primefactors

from app.core.config import Settings, caps_fingerprint, get_settings
from app.core.errors import CapExceededError, UnknownCheckError
from app.dsl.parser import canonical
from app.groups.finite_group import (
    Subgroup,
    all_subgroups,
    center,
    central_subgroups,
    group_predicate,
    group_prime,
    normal_subgroups,
    nu_sigma,
    subgroup_generated,
)
from app.models.enums import CheckMode, GroupPredicate, IdealProperty, Side, Verdict
from app.models.schemas import CaseResult, CheckReport, RegistryEntry
from app.rings.builder import make_ring
from app.rings.finite_ring import FiniteRing, ZModRing
from app.rings.group_ring import GroupRing
from app.rings.ideal import Ideal, ideal_from_mask, zero_ideal
from app.rings.quotient import quotient_ring
from app.services.group_ring_service import (
    augmentation_ideal,
    central_product_identity,
    eps_H,
    extend_ideal,
    h_hat,
    is_central,
    one_minus,
    one_sided_ideal,
    restrict_ideal,
    subgroup_ring,
)
from app.services.ideal_service import (
    annihilator,
    check_ideal_property,
    distinct_principal_ideals,
    enumerate_all_ideals,
    ideal_closure,
    is_nilpotent_integer,
    is_ring_property,
    jacobson_radical,
    nilpotency_index,
    parse_ideal_selector,
    principal_ideal,
    products_within,
    pseudo_radical,
    prime_radical,
)

logger = logging.getLogger(__name__)

NILARY = IdealProperty.nilary
P_NILARY = IdealProperty.p_nilary


def prime_of(n: int) -> Optional[int]:
    """n 為質數冪時回傳該質數。"""
    ps = primefactors(n)
    return int(ps[0]) if len(ps) == 1 else None


# =========================
# Instance & selection
# =========================

@dataclass(frozen=True)
class Selection:
    subgroup: Optional[Subgroup] = None
    ideal: Optional[Ideal] = None


class CheckInstance:
    """一個 (A, G) 實例上各檢查共用的事實，全部延遲計算並快取。"""

    def __init__(self, expr: str, settings: Settings) -> None:
        self.expr = canonical(expr)
        self.settings = settings
        self.R: FiniteRing = make_ring(self.expr, settings)
        self.regime: Optional[str] = None

    @property
    def is_group_ring(self) -> bool:
        return isinstance(self.R, GroupRing)

    @property
    def A(self) -> FiniteRing:
        return self.R.A if self.is_group_ring else self.R

    @property
    def G(self):
        return self.R.G

    @cached_property
    def zero(self) -> Ideal:
        return zero_ideal(self.R)

    # ---- 環的性質 ----

    def ring_has(self, ring: FiniteRing, prop: IdealProperty) -> bool:
        return is_ring_property(ring, prop, self.settings)

    def ideal_has(self, I: Ideal, prop: IdealProperty, ring: Optional[FiniteRing] = None) -> bool:
        return check_ideal_property(ring or I.ring, I, prop, self.settings).value

    @cached_property
    def A_nilary(self) -> bool:
        return self.ring_has(self.A, NILARY)

    @cached_property
    def A_prime(self) -> bool:
        return self.ring_has(self.A, IdealProperty.prime)

    @cached_property
    def A_semiprime(self) -> bool:
        return prime_radical(self.A, self.settings).is_zero

    @cached_property
    def R_nilary(self) -> bool:
        return self.ring_has(self.R, NILARY)

    @cached_property
    def R_nilary_result(self):
        return check_ideal_property(self.R, self.zero, NILARY, self.settings)

    # ---- 群的事實 ----

    @cached_property
    def p(self) -> Optional[int]:
        return group_prime(self.G)

    @cached_property
    def p_nilpotent(self) -> bool:
        return self.p is not None and is_nilpotent_integer(self.A, self.p)

    @cached_property
    def p_zero(self) -> bool:
        return self.p is not None and self.A.scalar(self.p) == self.A.zero

    @cached_property
    def normals(self) -> List[Subgroup]:
        return normal_subgroups(self.G, self.settings)

    @cached_property
    def centrals(self) -> List[Subgroup]:
        return central_subgroups(self.G, self.settings)

    @cached_property
    def delta(self) -> Ideal:
        return augmentation_ideal(self.R, None, self.settings)

    @cached_property
    def delta_index(self) -> Optional[int]:
        return nilpotency_index(self.delta, self.settings)

    def pick(self, subgroups: List[Subgroup], sel: Selection, nontrivial: bool = False) -> List[Subgroup]:
        out = [H for H in subgroups if not (nontrivial and H.is_trivial)]
        if sel.subgroup is not None:
            out = [H for H in out if H.members == sel.subgroup.members]
        return out

    def ideal_regime(self, sel: Selection, ring: Optional[FiniteRing] = None) -> Tuple[str, List[Ideal]]:
        """oracle 上限內列舉全部理想，否則零理想加上所有主理想。"""
        R = ring or self.R
        if sel.ideal is not None and R is self.R:
            return "selected", [sel.ideal]
        if R.size <= self.settings.max_oracle_size:
            return "all-ideals", enumerate_all_ideals(R, self.settings)
        principals = [P for _, P in distinct_principal_ideals(R, self.settings)]
        return "principal-ideals", principals

    def labels(self, H: Subgroup) -> str:
        return "{" + ",".join(H.labels()) + "}"


_INSTANCES: Dict[Tuple[str, str], CheckInstance] = {}
_INSTANCES_LOCK = Lock()


def get_instance(expr: str, settings: Optional[Settings] = None) -> CheckInstance:
    cfg = settings or get_settings()
    key = (canonical(expr), caps_fingerprint(cfg))
    with _INSTANCES_LOCK:
        hit = _INSTANCES.get(key)
    if hit is not None:
        return hit
    inst = CheckInstance(expr, cfg)
    with _INSTANCES_LOCK:
        if len(_INSTANCES) >= 16:
            _INSTANCES.clear()
        return _INSTANCES.setdefault(key, inst)


# =========================
# Cases
# =========================

@dataclass
class Case:
    label: str
    hypothesis: bool
    conclusion: Optional[bool]
    witness: Optional[Dict[str, Any]] = None
    note: Optional[str] = None


def implies(
    label: str,
    hypothesis: bool,
    conclusion: Callable[[], bool],
    witness: Optional[Callable[[], Dict[str, Any]]] = None,
    note: Optional[str] = None,
) -> Case:
    if not hypothesis:
        return Case(label, False, None, None, note)
    value = bool(conclusion())
    return Case(label, True, value, witness() if witness else None, note)


def case_verdict(mode: CheckMode, case: Case) -> Verdict:
    if mode == CheckMode.always:
        return Verdict.confirmed if case.conclusion else Verdict.refuted
    if mode == CheckMode.equivalence:
        return Verdict.confirmed if case.hypothesis == case.conclusion else Verdict.refuted
    if not case.hypothesis:
        return Verdict.vacuous
    return Verdict.confirmed if case.conclusion else Verdict.refuted


# =========================
# Checks
# =========================

class BaseCheck(ABC):
    id: str
    statement: str
    anchor: str
    mode: CheckMode = CheckMode.implication
    requires_group_ring: bool = True

    @abstractmethod
    def cases(self, inst: CheckInstance, sel: Selection) -> List[Case]:
        ...

    def entry(self) -> RegistryEntry:
        return RegistryEntry(id=self.id, statement=self.statement, anchor=self.anchor, mode=self.mode)


class DeltaNilpotentCheck(BaseCheck):
    id = "L1.8"
    statement = "Δ(G) is nilpotent iff G is a finite p-group and p is nilpotent in A"
    anchor = "G is a finite p-group"
    mode = CheckMode.equivalence

    def cases(self, inst, sel):
        return [Case(
            "Δ(G)",
            inst.delta_index is not None,
            inst.p_nilpotent,
            {"nilpotency_index": inst.delta_index, "p": inst.p, "delta_size": inst.delta.size},
        )]


class RelativeDeltaNilpotentCheck(BaseCheck):
    id = "L-DGH-nilp"
    statement = "for normal H: Δ(G,H) is nilpotent iff H is a p-group and p is nilpotent in A"
    anchor = "iff Δ(G,H) is nilpotent"
    mode = CheckMode.equivalence

    def cases(self, inst, sel):
        out = []
        for H in inst.pick(inst.normals, sel, nontrivial=True):
            D = augmentation_ideal(inst.R, H, inst.settings)
            idx = nilpotency_index(D, inst.settings)
            q = prime_of(H.order)
            concl = q is not None and is_nilpotent_integer(inst.A, q)
            out.append(Case(f"H={inst.labels(H)}", idx is not None, concl,
                            {"nilpotency_index": idx, "p": q, "ideal_size": D.size}))
        return out


class RelativeAnnihilatorCheck(BaseCheck):
    id = "L1.5"
    statement = "ℓ(Δ(G,H)) = r(Δ(G,H)) = Ĥ·A[G] with Ĥ central for normal H; r(A[G]Δ(H)) = Ĥ·A[G] otherwise"
    anchor = "if and only if H is finite"
    mode = CheckMode.always

    def cases(self, inst, sel):
        R, cfg = inst.R, inst.settings
        out = []
        for H in inst.pick(all_subgroups(inst.G, cfg), sel):
            hat = R.element_from({h: R.A.one for h in H.members})
            hat_right = one_sided_ideal(R, [hat], "right", cfg)
            if H.is_normal:
                D = augmentation_ideal(R, H, cfg)
                left = annihilator(R, D, Side.left, cfg).ideal
                right = annihilator(R, D, Side.right, cfg).ideal
                hat_left = one_sided_ideal(R, [hat], "left", cfg)
                central = is_central(R, hat)
                ok = central and left == right == hat_right == hat_left and not left.is_zero
                out.append(Case(f"normal H={inst.labels(H)}", True, ok,
                                {"H_hat": R.label(hat), "annihilator_size": left.size, "central": central}))
            else:
                L = one_sided_ideal(R, one_minus(R, H.members), "left", cfg)
                right = annihilator(R, L, Side.right, cfg).ideal
                ok = right == hat_right and not right.is_zero
                out.append(Case(f"H={inst.labels(H)}", True, ok,
                                {"H_hat": R.label(hat), "annihilator_size": right.size}))
        return out


class AugmentationAnnihilatorCheck(BaseCheck):
    id = "L1.7"
    statement = "ℓ(Δ(G)) = r(Δ(G)) = A·Ĝ and Δ(G) ∩ Δ(G)* = {aĜ : na = 0}"
    anchor = "left and right annihilator ideals of Δ(G) coincide"
    mode = CheckMode.always

    def cases(self, inst, sel):
        R, A, cfg = inst.R, inst.A, inst.settings
        n = inst.G.order
        left = annihilator(R, inst.delta, Side.left, cfg).ideal
        right = annihilator(R, inst.delta, Side.right, cfg).ideal
        multiples = R.encode(np.repeat(A.ids[:, None], n, axis=1))
        expected = np.zeros(R.size, dtype=bool)
        expected[multiples] = True
        torsion = np.zeros(R.size, dtype=bool)
        torsion_a = [a for a in range(A.size) if A.scalar(n, a) == A.zero]
        torsion[multiples[torsion_a]] = True
        meet = inst.delta.mask & left.mask
        return [
            Case("annihilators", True, left == right and bool((left.mask == expected).all()),
                 {"annihilator_size": left.size, "expected_size": int(expected.sum())}),
            Case("Δ ∩ Δ*", True, bool((meet == torsion).all()),
                 {"intersection_size": int(meet.sum()), "torsion": [A.label(a) for a in torsion_a]}),
        ]


class CentralProductCheck(BaseCheck):
    id = "L1.4"
    statement = "for central H and I, J ⊴ A[H]: (IJ)A[G] = (I·A[G])(J·A[G])"
    anchor = "ω_H preserves products"
    mode = CheckMode.always

    def cases(self, inst, sel):
        R, cfg = inst.R, inst.settings
        rng = np.random.default_rng(cfg.seed)
        out = []
        for H in inst.pick(inst.centrals, sel):
            sub = subgroup_ring(R, H, cfg)
            ideals = [P for _, P in distinct_principal_ideals(sub.ring, cfg)]
            if not H.is_trivial:
                ideals.append(augmentation_ideal(sub.ring, None, cfg))
            pairs = [(i, j) for i in range(len(ideals)) for j in range(len(ideals))]
            if len(pairs) > cfg.max_identity_pairs:
                chosen = rng.choice(len(pairs), size=cfg.max_identity_pairs, replace=False)
                pairs = [pairs[k] for k in sorted(chosen)]
            failed = None
            for i, j in pairs:
                if not central_product_identity(R, H, ideals[i], ideals[j], cfg):
                    failed = (i, j)
                    break
            witness = {"pairs_checked": len(pairs)}
            if failed:
                witness["failing_spans"] = [[sub.ring.label(x) for x in ideals[k].span] for k in failed]
            out.append(Case(f"H={inst.labels(H)}", True, failed is None, witness))
        return out


class WedderburnRadicalCheck(BaseCheck):
    id = "L-wedderburn"
    statement = "√0 of A[G] equals Δ(G) (and so does P(A[G])) iff G is a p-group, A is semiprime and p = 0 in A"
    anchor = "locally normal p-group, A is semiprime"
    mode = CheckMode.equivalence

    def cases(self, inst, sel):
        R, cfg = inst.R, inst.settings
        concl = inst.p is not None and inst.A_semiprime and inst.p_zero
        root = prime_radical(R, cfg)
        jac = jacobson_radical(R, cfg)
        return [
            Case("√0 = Δ(G)", root == inst.delta, concl, {"radical_size": root.size, "delta_size": inst.delta.size}),
            Case("P(A[G]) = Δ(G) via unit scan", jac == inst.delta, concl, {"jacobson_size": jac.size}),
        ]


class PrimeGroupRingCheck(BaseCheck):
    id = "L-prime-gr"
    statement = "A[G] is prime iff A is prime and G is prime (finite G ≠ 1 is never prime)"
    anchor = "A is prime and G is prime"
    mode = CheckMode.equivalence

    def cases(self, inst, sel):
        gp = group_predicate(inst.G, GroupPredicate.prime, settings=inst.settings)
        R_prime = inst.ring_has(inst.R, IdealProperty.prime)
        return [Case("A[G]", R_prime, inst.A_prime and gp.value, gp.witness)]


class PrimeSemiprimeNilaryCheck(BaseCheck):
    id = "GP1.3i"
    statement = "I is prime iff I is semiprime and (p-)nilary"
    anchor = "semiprime (p-)nilary ideal"
    mode = CheckMode.equivalence
    requires_group_ring = False

    def cases(self, inst, sel):
        R = inst.R
        regime, ideals = inst.ideal_regime(sel)
        inst.regime = regime
        out = []
        for I in ideals:
            prime = inst.ideal_has(I, IdealProperty.prime, R)
            concl = inst.ideal_has(I, IdealProperty.semiprime, R) and inst.ideal_has(I, NILARY, R)
            out.append(Case(_ideal_label(I), prime, concl, {"ideal_size": I.size}))
        return out


class QuotientCriterionCheck(BaseCheck):
    id = "P2.3"
    statement = "I is a (p-)nilary ideal iff A/I is a (p-)nilary ring"
    anchor = "if and only if A/I is a (p-)nilary ring"
    mode = CheckMode.equivalence
    requires_group_ring = False

    def cases(self, inst, sel):
        regime, ideals = inst.ideal_regime(sel)
        inst.regime = regime
        out = []
        for I in ideals:
            if I.is_whole:
                continue
            Q = quotient_ring(I, inst.settings).ring
            out.append(Case(_ideal_label(I), inst.ideal_has(I, NILARY, inst.R), inst.ring_has(Q, NILARY),
                            {"ideal_size": I.size, "quotient_size": Q.size}))
        return out


class NilpotentLiftCheck(BaseCheck):
    id = "L1.3"
    statement = "(i) A/I nilary and I nilpotent ⇒ A nilary; (ii) A/I p-nilary and √I a sum of nilpotent ideals ⇒ A p-nilary"
    anchor = "I is a nilpotent ideal"
    requires_group_ring = False

    def cases(self, inst, sel):
        R, cfg = inst.R, inst.settings
        regime, ideals = inst.ideal_regime(sel)
        inst.regime = regime
        out = []
        for I in ideals:
            if I.is_whole:
                continue
            Q = quotient_ring(I, cfg).ring
            q_nilary = inst.ring_has(Q, NILARY)
            hyp1 = q_nilary and nilpotency_index(I, cfg) is not None
            out.append(implies(f"(i) {_ideal_label(I)}", hyp1, lambda: inst.R_nilary))
            root = pseudo_radical(R, I, cfg)
            hyp2 = q_nilary and nilpotency_index(root, cfg) is not None
            out.append(implies(f"(ii) {_ideal_label(I)}", hyp2, lambda: inst.ring_has(R, P_NILARY),
                               lambda: {"radical_size": root.size}))
        return out


class CentralIntersectionCheck(BaseCheck):
    id = "T2.3.0"
    statement = "for central H: J nilary in A[G] ⇒ J ∩ A[H] nilary in A[H]"
    anchor = "J∩A[H] is a nilary ideal"

    def cases(self, inst, sel):
        R, cfg = inst.R, inst.settings
        regime, ideals = inst.ideal_regime(sel)
        inst.regime = regime
        out = []
        for H in inst.pick(inst.centrals, sel):
            sub = subgroup_ring(R, H, cfg)
            for J in ideals:
                hyp = inst.ideal_has(J, NILARY, R)
                out.append(implies(
                    f"H={inst.labels(H)} J={_ideal_label(J)}", hyp,
                    lambda: inst.ideal_has(restrict_ideal(R, J, sub), NILARY, sub.ring),
                ))
        return out


class CoefficientIntersectionCheck(BaseCheck):
    id = "C-JcapA"
    statement = "J nilary (p-nilary) in A[G] ⇒ J ∩ A nilary (p-nilary) in A"
    anchor = "Then J∩A is a nilary ideal of A"

    def cases(self, inst, sel):
        R, A, cfg = inst.R, inst.A, inst.settings
        regime, ideals = inst.ideal_regime(sel)
        inst.regime = regime
        embedded = R.embed_coefficient(A.ids)
        out = []
        for J in ideals:
            meet = ideal_from_mask(A, J.mask[embedded])
            for prop in (NILARY, P_NILARY):
                out.append(implies(
                    f"{prop.value} {_ideal_label(J)}", inst.ideal_has(J, prop, R),
                    lambda: inst.ideal_has(meet, prop, A),
                ))
        return out


class CentralIntersectionPrincipalCheck(BaseCheck):
    id = "C-JcapAH-p"
    statement = "for central H: J p-nilary in A[G] ⇒ J ∩ A[H] p-nilary in A[H]"
    anchor = "then J∩A[H] is a p-nilary ideal of A[H]"

    def cases(self, inst, sel):
        R, cfg = inst.R, inst.settings
        if sel.ideal is not None:
            ideals = [sel.ideal]
        else:
            ideals = [P for _, P in distinct_principal_ideals(R, cfg)]
        inst.regime = "principal-ideals"
        out = []
        for H in inst.pick(inst.centrals, sel):
            sub = subgroup_ring(R, H, cfg)
            for J in ideals:
                hyp = inst.ideal_has(J, P_NILARY, R)
                out.append(implies(
                    f"H={inst.labels(H)} J={_ideal_label(J)}", hyp,
                    lambda: inst.ideal_has(restrict_ideal(R, J, sub), P_NILARY, sub.ring),
                ))
        return out


class CentralSubringCheck(BaseCheck):
    id = "C-HZ"
    statement = "for central H: A[G] nilary ⇒ A[H] nilary"
    anchor = "then A[H] is a nilary ring"

    def cases(self, inst, sel):
        return [
            implies(f"H={inst.labels(H)}", inst.R_nilary,
                    lambda H=H: inst.ring_has(subgroup_ring(inst.R, H, inst.settings).ring, NILARY))
            for H in inst.pick(inst.centrals, sel)
        ]


class CenterSubringCheck(BaseCheck):
    id = "C-ZG"
    statement = "A[G] (p-)nilary ⇒ A[Z(G)] (p-)nilary"
    anchor = "then A[Z(G)] is a (p-)nilary ring"

    def cases(self, inst, sel):
        Z = center(inst.G)
        return [implies(f"Z(G)={inst.labels(Z)}", inst.R_nilary,
                        lambda: inst.ring_has(subgroup_ring(inst.R, Z, inst.settings).ring, NILARY))]


class CoefficientNilaryCheck(BaseCheck):
    id = "C2.2"
    statement = "A[G] (p-)nilary ⇒ A (p-)nilary"
    anchor = "then A is a nilary ring"

    def cases(self, inst, sel):
        return [implies("A", inst.R_nilary, lambda: inst.A_nilary)]


class QuotientGroupRingCheck(BaseCheck):
    id = "C-GH"
    statement = "for normal H: Δ(G,H) is a (p-)nilary ideal iff A[G/H] is a (p-)nilary ring"
    anchor = "A[G/H] is a (p-)nilary ring"
    mode = CheckMode.equivalence

    def cases(self, inst, sel):
        R, cfg = inst.R, inst.settings
        out = []
        for H in inst.pick(inst.normals, sel):
            D = augmentation_ideal(R, H, cfg)
            target = eps_H(R, H, cfg).target
            out.append(Case(f"H={inst.labels(H)}", inst.ideal_has(D, NILARY, R), inst.ring_has(target, NILARY),
                            {"quotient_ring": target.name, "quotient_size": target.size}))
        return out


class AugmentationNilaryCheck(BaseCheck):
    id = "C2.4"
    statement = "A is a (p-)nilary ring iff Δ(G) is a (p-)nilary ideal"
    anchor = "Δ(G) is a (p-)nilary ideal"
    mode = CheckMode.equivalence

    def cases(self, inst, sel):
        return [Case("Δ(G)", inst.A_nilary, inst.ideal_has(inst.delta, NILARY, inst.R))]


class NormalOrderNilpotentCheck(BaseCheck):
    id = "T-nnilp"
    statement = "A[G] (p-)nilary ⇒ |H| is nilpotent in A for every nontrivial normal H"
    anchor = "normal subgroup of G is nilpotent in A"

    def cases(self, inst, sel):
        offender = None
        for H in inst.pick(inst.normals, sel, nontrivial=True):
            if not is_nilpotent_integer(inst.A, H.order):
                offender = H
                break
        attribution = None
        note = None
        if offender is not None:
            attribution = {"normal_subgroup": offender.labels(), "order": offender.order, "nilpotent_in_A": False}
            note = (f"|H|={offender.order} is not nilpotent in {inst.A.name} for H={inst.labels(offender)}, "
                    f"so {inst.R.name} cannot be nilary")
        case = implies("A[G]", inst.R_nilary, lambda: offender is None, lambda: attribution or {}, note)
        if not case.hypothesis:
            case.witness = attribution
        return [case]


class GroupOrderCheck(BaseCheck):
    id = "C-ordG"
    statement = "A[G] (p-)nilary ⇒ A (p-)nilary and |G| nilpotent in A"
    anchor = "|G| is nilpotent in A"

    def cases(self, inst, sel):
        return [implies("A[G]", inst.R_nilary,
                        lambda: inst.A_nilary and is_nilpotent_integer(inst.A, inst.G.order))]


class PGroupNilaryCheck(BaseCheck):
    id = "T-AGp"
    statement = "A nilary, G a finite p-group, p nilpotent in A ⇒ A[G] nilary"
    anchor = "then A[G] is a nilary ring"

    def cases(self, inst, sel):
        hyp = inst.p_nilpotent and inst.A_nilary
        return [implies("A[G]", hyp, lambda: inst.R_nilary, lambda: {"p": inst.p})]


class PGroupRadicalCheck(BaseCheck):
    id = "T-AGp-loc"
    statement = "P(A)=0, A p-nilary, G a p-group, p nilpotent in A ⇒ √0 = P(A[G]) = Δ(G) and A[G] p-nilary"
    anchor = "then A[G] is a p-nilary ring"

    def cases(self, inst, sel):
        hyp = inst.p_nilpotent and inst.A_semiprime and inst.ring_has(inst.A, P_NILARY)

        def concl() -> bool:
            root = prime_radical(inst.R, inst.settings)
            jac = jacobson_radical(inst.R, inst.settings)
            return root == inst.delta and jac == inst.delta and inst.ring_has(inst.R, P_NILARY)

        return [implies("A[G]", hyp, concl, lambda: {"p": inst.p})]


class PrimeCoefficientCheck(BaseCheck):
    id = "C-Aprime"
    statement = "A prime, G a p-group, p = 0 in A ⇒ A[G] p-nilary"
    anchor = "If A is a prime ring"

    def cases(self, inst, sel):
        hyp = inst.p_zero and inst.A_prime
        return [implies("A[G]", hyp, lambda: inst.ring_has(inst.R, P_NILARY))]


class DedekindCheck(BaseCheck):
    id = "P-ded"
    statement = "G finite Dedekind and A[G] (p-)nilary ⇒ G is a p-group"
    anchor = "then G is a p-group"

    def cases(self, inst, sel):
        ded = group_predicate(inst.G, GroupPredicate.dedekind, settings=inst.settings)
        hyp = ded.value and inst.R_nilary
        return [implies("G", hyp, lambda: inst.p is not None, note=None if ded.value else "G is not Dedekind")]


class AugmentationRadicalCheck(BaseCheck):
    id = "P2.7"
    statement = "A p-nilary and √Δ(G) a sum of nilpotent ideals ⇒ A[G] p-nilary"
    anchor = "sum of nilpotent ideals"

    def cases(self, inst, sel):
        root = pseudo_radical(inst.R, inst.delta, inst.settings)
        hyp = nilpotency_index(root, inst.settings) is not None and inst.ring_has(inst.A, P_NILARY)
        return [implies("A[G]", hyp, lambda: inst.ring_has(inst.R, P_NILARY),
                        lambda: {"radical_size": root.size})]


def _field_prime(inst: CheckInstance) -> Optional[int]:
    A = inst.A
    if isinstance(A, ZModRing) and prime_of(A.n) == A.n:
        return A.n
    return None


class FieldPGroupCheck(BaseCheck):
    id = "P-FGp"
    statement = "F = Z_p and G a finite p-group ⇒ F[G] (p-)nilary"
    anchor = "F[G] is a (p-)nilary ring"

    def cases(self, inst, sel):
        q = _field_prime(inst)
        hyp = q is not None and inst.p == q
        return [implies("F[G]", hyp, lambda: inst.R_nilary)]


class PrimaryCheck(BaseCheck):
    id = "P-prim"
    statement = "A[G] right or left primary ⇒ G is a p-group and p is nilpotent in A"
    anchor = "G is a p-group and p is nilpotent in A"

    def conclusion(self, inst: CheckInstance) -> bool:
        return inst.p_nilpotent

    def cases(self, inst, sel):
        out = []
        for prop in (IdealProperty.right_primary, IdealProperty.left_primary):
            out.append(implies(prop.value, inst.ring_has(inst.R, prop), lambda: self.conclusion(inst),
                               lambda: {"p": inst.p}))
        return out


class PrimarySigmaCheck(PrimaryCheck):
    id = "P-prim2"
    statement = "A[G] right or left primary ⇒ G prime, or σ(G) a p-group with p nilpotent in A"
    anchor = "σ(G) is a p-group and p is nilpotent in A"

    def conclusion(self, inst: CheckInstance) -> bool:
        if group_predicate(inst.G, GroupPredicate.prime, settings=inst.settings).value:
            return True
        sigma = nu_sigma(inst.G, inst.settings).sigma
        q = prime_of(sigma.order)
        return q is not None and is_nilpotent_integer(inst.A, q)


class FinalEquivalenceCheck(BaseCheck):
    id = "T-equiv"
    statement = "F = Z_p, G a finite p-group: F[G] is nilary, and right primary ⟺ left primary ⟺ nilary"
    anchor = "F[G] is a right primary ring"

    def cases(self, inst, sel):
        q = _field_prime(inst)
        hyp = q is not None and inst.p == q
        values: Dict[str, bool] = {}

        def concl() -> bool:
            for prop in (NILARY, IdealProperty.right_primary, IdealProperty.left_primary):
                values[prop.value] = inst.ring_has(inst.R, prop)
            return values["nilary"] and len(set(values.values())) == 1

        return [implies("F[G]", hyp, concl, lambda: dict(values))]


class EssentialCheck(BaseCheck):
    id = "P-ess"
    statement = "A[G] nilary and P(A)=0 ⇒ Δ(G) essential or G a finite p-group with p nilpotent in A"
    anchor = "either Δ(G)⊴^{ess}A[G] or G is a finite p-group"

    def essential(self, inst: CheckInstance) -> bool:
        return inst.ideal_has(inst.delta, IdealProperty.essential, inst.R)

    def alternative(self, inst: CheckInstance) -> bool:
        return inst.p_nilpotent

    def hypothesis(self, inst: CheckInstance) -> bool:
        return inst.A_semiprime and inst.R_nilary

    def cases(self, inst, sel):
        return [implies("Δ(G)", self.hypothesis(inst),
                        lambda: self.essential(inst) or self.alternative(inst),
                        lambda: {"essential": self.essential(inst), "alternative": self.alternative(inst)})]


class EssentialNilpotentSumCheck(EssentialCheck):
    id = "P-ess-c1"
    statement = "A[G] p-nilary and P(A)=0 ⇒ Δ(G) essential or Δ(G) a sum of nilpotent ideals"
    anchor = "Δ(G) is a sum of nilpotent ideals of A[G]"

    def alternative(self, inst):
        return prime_radical(inst.R, inst.settings).contains_ideal(inst.delta)

    def hypothesis(self, inst):
        return inst.A_semiprime and inst.ring_has(inst.R, P_NILARY)


class EssentialPGroupCheck(EssentialNilpotentSumCheck):
    id = "P-ess-c2"
    statement = "A[G] p-nilary and P(A)=0 ⇒ Δ(G) essential or G a (locally normal) p-group"
    anchor = "G is a locally normal p-group"

    def alternative(self, inst):
        return inst.p is not None


class IdempotentSplitCheck(BaseCheck):
    id = "E2.14"
    statement = "a central g ≠ 1 with o(g) a unit in A gives e = o(g)⁻¹Ĝ_g idempotent and A[G] is not nilary"
    anchor = "Hence A[G] is not nilary."

    def cases(self, inst, sel):
        R, A, G, cfg = inst.R, inst.A, inst.G, inst.settings
        g = None
        for cand in center(G).members:
            if cand != G.identity and A.is_unit(A.scalar(int(G.element_orders[cand]))):
                g = cand
                break
        if g is None:
            return [Case("A[G]", False, None, note="no central element of unit order")]
        H = subgroup_generated(G, [g])
        inv = A.inverse(A.scalar(H.order))
        e = R.mul(int(R.embed_coefficient(inv)), h_hat(R, H))
        f = R.sub(R.one, e)
        Pe, Pf = principal_ideal(R, e, cfg), principal_ideal(R, f, cfg)

        def concl() -> bool:
            split = (
                R.is_idempotent(e) and is_central(R, e) and e != R.zero and f != R.zero
                and products_within(inst.zero, Pe, Pf)
                and nilpotency_index(Pe, cfg) is None and nilpotency_index(Pf, cfg) is None
            )
            return split and not inst.R_nilary

        def witness() -> Dict[str, Any]:
            return {
                "g": G.labels[g],
                "e": R.label(e),
                "one_minus_e": R.label(f),
                "engine_witness": inst.R_nilary_result.witness,
            }

        return [implies(f"g={G.labels[g]}", True, concl, witness)]


class PrimePowerRemarkCheck(BaseCheck):
    id = "R-n1"
    statement = "A = Z_{p^n}: n = 1 ⇒ prime and nilary; n > 1 ⇒ nilary but not prime; always nilary"
    anchor = "If n>1 then A is (p-)nilary, but it is not prime"
    requires_group_ring = False

    def cases(self, inst, sel):
        A = inst.A
        if not isinstance(A, ZModRing) or prime_of(A.n) is None:
            return [Case(A.name, False, None, note="coefficient ring is not Z_{p^n}")]
        (q, k), = factorint(A.n).items()
        return [
            implies("(i) n=1", k == 1, lambda: inst.A_prime and inst.A_nilary),
            implies("(ii) n>1", k > 1, lambda: inst.A_nilary and not inst.A_prime),
            implies("(iii)", True, lambda: inst.A_nilary),
        ]


class PrimeExampleCheck(BaseCheck):
    id = "E-prime"
    statement = "A = Z_{p^n}, n > 1, I = ⟨p⟩: A[G]/I[G] ≅ (A/I)[G], I[G] nilpotent, and A[G] is not prime"
    anchor = "B[G] ≅ A[G]/(I)[G]"

    def cases(self, inst, sel):
        R, A, cfg = inst.R, inst.A, inst.settings
        q = prime_of(A.n) if isinstance(A, ZModRing) else None
        if q is None or q == A.n:
            return [Case(A.name, False, None, note="coefficient ring is not Z_{p^n} with n > 1")]
        I = ideal_closure(A, [A.scalar(q)], cfg)
        ext = extend_ideal(R, I, cfg)
        info: Dict[str, Any] = {}

        def concl() -> bool:
            nil = nilpotency_index(ext.ideal, cfg)
            target = ext.quotient_map.target
            lift = (not inst.ring_has(target, NILARY)) or inst.R_nilary
            not_prime = not inst.ring_has(R, IdealProperty.prime)
            info.update({"I_G_size": ext.ideal.size, "nilpotency_index": nil, "quotient": target.name})
            return ext.isomorphic and nil is not None and lift and not_prime

        return [implies(f"I=<{q}>", True, concl, lambda: dict(info))]


def _ideal_label(I: Ideal) -> str:
    R = I.ring
    if I.is_zero:
        return "0"
    return "<" + ",".join(R.label(g) for g in I.generators[:4]) + (",…" if len(I.generators) > 4 else "") + ">"


REGISTRY: Dict[str, BaseCheck] = {
    c.id: c
    for c in (
        DeltaNilpotentCheck(),
        RelativeDeltaNilpotentCheck(),
        RelativeAnnihilatorCheck(),
        AugmentationAnnihilatorCheck(),
        CentralProductCheck(),
        WedderburnRadicalCheck(),
        PrimeGroupRingCheck(),
        PrimeSemiprimeNilaryCheck(),
        QuotientCriterionCheck(),
        NilpotentLiftCheck(),
        CentralIntersectionCheck(),
        CoefficientIntersectionCheck(),
        CentralIntersectionPrincipalCheck(),
        CentralSubringCheck(),
        CenterSubringCheck(),
        CoefficientNilaryCheck(),
        QuotientGroupRingCheck(),
        AugmentationNilaryCheck(),
        NormalOrderNilpotentCheck(),
        GroupOrderCheck(),
        PGroupNilaryCheck(),
        PGroupRadicalCheck(),
        PrimeCoefficientCheck(),
        DedekindCheck(),
        AugmentationRadicalCheck(),
        FieldPGroupCheck(),
        PrimaryCheck(),
        PrimarySigmaCheck(),
        FinalEquivalenceCheck(),
        EssentialCheck(),
        EssentialNilpotentSumCheck(),
        EssentialPGroupCheck(),
        IdempotentSplitCheck(),
        PrimePowerRemarkCheck(),
        PrimeExampleCheck(),
    )
}


def list_registry() -> List[RegistryEntry]:
    return [check.entry() for check in REGISTRY.values()]


def get_check(check_id: str) -> BaseCheck:
    try:
        return REGISTRY[check_id]
    except KeyError:
        raise UnknownCheckError(f"unknown check id: {check_id!r}") from None


# =========================
# Runner
# =========================

def make_selection(
    inst: CheckInstance,
    subgroup: Optional[str] = None,
    ideal: Optional[str] = None,
) -> Selection:
    H = None
    if subgroup and inst.is_group_ring:
        G = inst.G
        H = subgroup_generated(G, [G.element(part.strip()) for part in subgroup.split(",") if part.strip()])
    I = parse_ideal_selector(inst.R, ideal, inst.settings) if ideal else None
    return Selection(subgroup=H, ideal=I)


def aggregate(check: BaseCheck, instance: str, cases: List[Case]) -> CheckReport:
    results = [
        CaseResult(
            label=c.label,
            hypothesis=c.hypothesis,
            conclusion=c.conclusion,
            verdict=case_verdict(check.mode, c),
            witness=c.witness,
            note=c.note,
        )
        for c in cases
    ]
    for r in results:
        if r.verdict == Verdict.refuted and not r.witness:
            r.witness = {"case": r.label, "hypothesis": r.hypothesis, "conclusion": r.conclusion}
    verdicts = [r.verdict for r in results]
    if Verdict.refuted in verdicts:
        verdict = Verdict.refuted
    elif Verdict.confirmed in verdicts:
        verdict = Verdict.confirmed
    else:
        verdict = Verdict.vacuous
    evaluated = [r.conclusion for r in results if r.conclusion is not None]
    lead = next((r for r in results if r.verdict == verdict and r.witness), None)
    return CheckReport(
        id=check.id,
        instance=instance,
        hypothesis_holds=any(r.hypothesis for r in results) if results else None,
        conclusion_holds=all(evaluated) if evaluated else None,
        verdict=verdict,
        witness=lead.witness if lead else None,
        cases=results,
        notes=[r.note for r in results if r.note and r.verdict != Verdict.confirmed][:5],
    )


def run_check(
    check_id: str,
    expr: str,
    subgroup: Optional[str] = None,
    ideal: Optional[str] = None,
    settings: Optional[Settings] = None,
    timing: bool = False,
) -> CheckReport:
    """在一個實例上執行一個登錄的定理檢查。"""
    cfg = settings or get_settings()
    check = get_check(check_id)
    started = time.perf_counter()
    instance = canonical(expr)
    try:
        inst = get_instance(instance, cfg)
        if check.requires_group_ring and not inst.is_group_ring:
            report = CheckReport(id=check.id, instance=instance, verdict=Verdict.vacuous,
                                 notes=["instance is not a group ring"])
        elif check.requires_group_ring and inst.G.order == 1:
            report = CheckReport(id=check.id, instance=instance, verdict=Verdict.vacuous,
                                 notes=["trivial group: statement assumes G nontrivial"])
        else:
            sel = make_selection(inst, subgroup, ideal)
            inst.regime = None
            report = aggregate(check, instance, check.cases(inst, sel))
            report.regime = inst.regime
    except CapExceededError as e:
        logger.warning("Check %s on %s undecided: %s", check.id, instance, e)
        report = CheckReport(id=check.id, instance=instance, verdict=Verdict.undecided_cap, notes=[str(e)])

    if report.verdict == Verdict.refuted:
        logger.error("REFUTED: %s on %s witness=%s", check.id, instance, report.witness)
    if timing:
        report.runtime_ms = round((time.perf_counter() - started) * 1000, 3)
    return report
