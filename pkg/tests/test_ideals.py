from pathlib import Path

import pytest

from app.core.config import get_settings
from app.core.errors import AlgebraError, InconsistencyError, RingMismatchError
from app.dsl.ast import ring_size
from app.dsl.parser import parse_expr
from app.models.enums import IdealProperty, Side
from app.rings.builder import make_ring
from app.rings.ideal import whole_ideal, zero_ideal
from app.services.ideal_service import (
    annihilator,
    check_ideal_property,
    distinct_principal_ideals,
    enumerate_all_ideals,
    evaluate_property,
    exhaustive_property_oracle,
    ideal_arith,
    ideal_closure,
    ideal_intersection,
    is_nilpotent_integer,
    is_ring_property,
    jacobson_radical,
    nilpotency_index,
    nilpotent_mod,
    parse_ideal_selector,
    prime_radical,
    principal_ideal,
    pseudo_radical,
)
from app.services.grid_service import load_grid


# =========================
# Closure & arithmetic
# =========================

def test_principal_ideals_in_z12():
    R = make_ring("Z12")
    assert principal_ideal(R, 8).size == 3
    assert ideal_closure(R, [4, 6]).size == 6
    assert ideal_closure(R, []).is_zero


def test_ideal_arithmetic():
    R = make_ring("Z12")
    two, three = principal_ideal(R, 2), principal_ideal(R, 3)
    assert ideal_arith("sum", two, three).is_whole
    assert ideal_arith("product", two, three) == principal_ideal(R, 6)
    assert ideal_arith("power", two, k=2) == principal_ideal(R, 4)
    assert ideal_intersection(two, three) == principal_ideal(R, 6)
    with pytest.raises(ValueError):
        ideal_arith("quotient", two, three)


def test_ideals_from_different_rings_do_not_mix():
    a, b = make_ring("Z4"), make_ring("Z4")
    with pytest.raises(RingMismatchError):
        ideal_arith("sum", principal_ideal(a, 2), principal_ideal(b, 2))


def test_nilpotent_mod():
    R = make_ring("Z8")
    assert nilpotent_mod(principal_ideal(R, 2), principal_ideal(R, 4)) == 2
    assert nilpotency_index(principal_ideal(R, 2)) == 3
    assert nilpotent_mod(whole_ideal(R), principal_ideal(R, 2)) is None


def test_nilpotent_integers():
    assert is_nilpotent_integer(make_ring("Z4"), 2)
    assert not is_nilpotent_integer(make_ring("Z6"), 2)
    assert is_nilpotent_integer(make_ring("Z9[C3]"), 3)


@pytest.mark.parametrize("expr, count", [("Z4", 3), ("Z6", 4), ("Z2[C2]", 3), ("Z8", 4), ("Z2 x Z2", 4)])
def test_ideal_counts(expr, count):
    assert len(enumerate_all_ideals(make_ring(expr))) == count


def test_distinct_principals_sorted_by_least_generator():
    R = make_ring("Z6")
    assert [x for x, _ in distinct_principal_ideals(R)] == [0, 1, 2, 3]


# =========================
# Property decisions
# =========================

def test_z6_is_not_prime():
    R = make_ring("Z6")
    res = check_ideal_property(R, zero_ideal(R), IdealProperty.prime)
    assert not res.value
    assert res.witness["pair"] == [2, 3]
    assert res.witness["labels"] == ["2", "3"]


def test_z4_is_not_prime_but_is_primary():
    R = make_ring("Z4")
    res = check_ideal_property(R, zero_ideal(R), IdealProperty.prime)
    assert res.witness["pair"] == [2, 2]
    assert is_ring_property(R, IdealProperty.right_primary)
    assert is_ring_property(R, IdealProperty.left_primary)
    assert is_ring_property(R, IdealProperty.nilary)


def test_semiprime():
    assert is_ring_property(make_ring("Z6"), IdealProperty.semiprime)
    R = make_ring("Z4")
    res = check_ideal_property(R, zero_ideal(R), IdealProperty.semiprime)
    assert not res.value
    assert res.witness["label"] == "2"


def test_essential():
    R = make_ring("Z4")
    assert check_ideal_property(R, principal_ideal(R, 2), IdealProperty.essential).value
    S = make_ring("Z6")
    res = check_ideal_property(S, principal_ideal(S, 2), IdealProperty.essential)
    assert not res.value
    assert res.witness["label"] == "3"


def test_z3_c6_is_not_nilary():
    R = make_ring("Z3[C6]")
    res = check_ideal_property(R, zero_ideal(R), IdealProperty.nilary)
    assert not res.value
    assert set(res.witness["idempotents"]) == {"2+2x^3", "2+x^3"}


def test_p_nilary_matches_nilary_with_note():
    R = make_ring("Z2[C2]")
    a = check_ideal_property(R, zero_ideal(R), IdealProperty.nilary)
    b = check_ideal_property(R, zero_ideal(R), IdealProperty.p_nilary)
    assert a.value and b.value
    assert "coincide" in b.note


def test_whole_ideal_note():
    R = make_ring("Z4")
    res = check_ideal_property(R, whole_ideal(R), IdealProperty.prime)
    assert res.value
    assert res.note == "ideal is the whole ring"


DEFAULT_GRID = Path(__file__).resolve().parents[1] / "data" / "grids" / "default.grid"


def _oracle_rings():
    # 預設 grid 中 oracle 跑得動的環全部比對，外加幾個非群環
    sized = [e for e in load_grid(DEFAULT_GRID).exprs if ring_size(parse_expr(e)) <= get_settings().max_oracle_size]
    return list(dict.fromkeys(["Z4", "Z6", "Z8", "Z2 x Z2", *sized]))


ORACLE_RINGS = _oracle_rings()


def test_oracle_set_covers_default_grid():
    assert {"Z2[D4]", "Z2[Q8]", "Z4[C4]", "Z4[C2 x C2]", "Z6[C3]", "Z9[C2]"} <= set(ORACLE_RINGS)
    assert "Z3[C6]" not in ORACLE_RINGS


@pytest.mark.parametrize("expr", ORACLE_RINGS)
def test_principal_reduction_agrees_with_all_ideals(expr):
    R = make_ring(expr)
    for I in enumerate_all_ideals(R):
        for prop in IdealProperty:
            fast = check_ideal_property(R, I, prop).value
            slow = exhaustive_property_oracle(R, I, prop).value
            assert fast == slow, (expr, I, prop)


# =========================
# Radicals / annihilators
# =========================

def test_radicals_of_z4():
    R = make_ring("Z4")
    assert list(prime_radical(R).members) == [0, 2]
    assert jacobson_radical(R) == prime_radical(R)


def test_prime_radical_of_z2_c2_is_augmentation_ideal():
    R = make_ring("Z2[C2]")
    assert [R.label(x) for x in prime_radical(R).members] == ["0", "1+x"]


def test_pseudo_radical_of_z8_mod_four():
    R = make_ring("Z8")
    assert pseudo_radical(R, principal_ideal(R, 4)) == principal_ideal(R, 2)


def test_radicals_of_semisimple_ring_vanish():
    R = make_ring("Z3[C2]")
    assert prime_radical(R).is_zero
    assert jacobson_radical(R).is_zero


def test_annihilator_in_z4():
    R = make_ring("Z4")
    ann = annihilator(R, [2], Side.left)
    assert ann.two_sided
    assert ann.as_ideal() == principal_ideal(R, 2)


def test_one_sided_annihilator_in_z2_s3():
    R = make_ring("Z2[S3]")
    t = R.G.element("(1 2)")
    x = R.element_from({0: 1, t: 1})
    ann = annihilator(R, [x], Side.left)
    assert ann.ideal.size == 8
    assert not ann.two_sided
    with pytest.raises(AlgebraError):
        ann.as_ideal()


# =========================
# Selectors / evaluate_property
# =========================

def test_ideal_selector():
    R = make_ring("Z2 x Z3")
    I = parse_ideal_selector(R, "(1,0), (0,1)")
    assert I.is_whole
    assert parse_ideal_selector(R, "").is_zero
    assert parse_ideal_selector(R, "#3").size == 2


def test_evaluate_property_report():
    rep = evaluate_property("Z6", IdealProperty.prime)
    assert rep.expr == "Z6"
    assert rep.value is False
    assert rep.witness["pair"] == [2, 3]
    assert rep.runtime_ms is None


def test_evaluate_property_with_oracle_and_timing():
    rep = evaluate_property("Z2[C3]", IdealProperty.semiprime, oracle=True, timing=True)
    assert rep.value is True
    assert rep.oracle is True
    assert rep.runtime_ms is not None


def test_oracle_mismatch_is_an_engine_bug(monkeypatch):
    from app.services import ideal_service
    from app.services.ideal_service import PropertyResult

    monkeypatch.setattr(
        ideal_service,
        "exhaustive_property_oracle",
        lambda R, I, prop, cfg: PropertyResult(IdealProperty(prop), True),
    )
    with pytest.raises(InconsistencyError):
        evaluate_property("Z6", IdealProperty.prime, oracle=True)
