import numpy as np
import pytest

from app.core.errors import CapExceededError, GroupConstructionError, NotNormalError
from app.dsl.parser import parse_group_expr
from app.groups.finite_group import (
    all_subgroups,
    center,
    central_subgroups,
    group_predicate,
    group_prime,
    make_group,
    make_subgroup,
    normal_closure,
    normal_subgroups,
    nu_sigma,
    quotient_group,
    subgroup_as_group,
    validate_group,
)
from app.models.enums import GroupPredicate


def group(text):
    return make_group(parse_group_expr(text))


@pytest.mark.parametrize(
    "text, n_sub, n_normal",
    [
        ("C1", 1, 1),
        ("C6", 4, 4),
        ("S3", 6, 3),
        ("D4", 10, 6),
        ("Q8", 6, 6),
        ("C2 x C2", 5, 5),
    ],
)
def test_subgroup_counts(text, n_sub, n_normal):
    G = group(text)
    assert len(all_subgroups(G)) == n_sub
    assert len(normal_subgroups(G)) == n_normal


def test_s4_normal_subgroups():
    orders = [H.order for H in normal_subgroups(group("S4"))]
    assert orders == [1, 4, 12, 24]


def test_subgroups_sorted_by_order_then_members():
    subs = all_subgroups(group("S3"))
    keys = [(H.order, H.members) for H in subs]
    assert keys == sorted(keys)
    assert subs[0].is_trivial and subs[-1].order == 6


def test_centers():
    assert center(group("D4")).labels() == ["1", "r^2"]
    assert center(group("Q8")).labels() == ["1", "-1"]
    assert center(group("S3")).order == 1
    assert center(group("C2 x C3")).order == 6


def test_central_subgroups_of_d4():
    subs = central_subgroups(group("D4"))
    assert [H.order for H in subs] == [1, 2]


def test_labels():
    assert group("C4").labels == ("1", "x", "x^2", "x^3")
    assert group("D3").labels == ("1", "r", "r^2", "s", "rs", "r^2s")
    S3 = group("S3")
    assert S3.labels[0] == "1"
    assert "(1 2)" in S3.labels and "(1 2 3)" in S3.labels
    assert group("C2 x C2").name == "C2 x C2"


def test_element_orders_of_q8():
    orders = sorted(int(o) for o in group("Q8").element_orders)
    assert orders == [1, 2, 4, 4, 4, 4, 4, 4]


@pytest.mark.parametrize("text, p", [("C4", 2), ("C2 x C2", 2), ("D4", 2), ("C9", 3), ("S3", None), ("C1", None), ("C6", None)])
def test_group_prime(text, p):
    assert group_prime(group(text)) == p


def test_p_group_predicate_witness():
    res = group_predicate(group("C6"), GroupPredicate.p_group, 2)
    assert not res.value
    assert res.witness["order"] in (3, 6)
    assert group_predicate(group("Q8"), GroupPredicate.p_group, 2).value
    with pytest.raises(ValueError):
        group_predicate(group("C2"), GroupPredicate.p_group, 4)


def test_dedekind_predicate():
    assert group_predicate(group("Q8"), GroupPredicate.dedekind).value
    assert group_predicate(group("C2 x C3"), GroupPredicate.dedekind).value
    res = group_predicate(group("S3"), GroupPredicate.dedekind)
    assert not res.value and res.witness["order"] == 2


def test_prime_predicate_on_finite_groups():
    assert group_predicate(group("C1"), GroupPredicate.prime).value
    res = group_predicate(group("S3"), GroupPredicate.prime)
    assert not res.value
    assert res.witness["order"] == 3


def test_locally_normal_is_whole_group():
    G = group("S3")
    assert group_predicate(G, GroupPredicate.locally_normal).value
    ns = nu_sigma(G)
    assert ns.nu == frozenset({1, 3, 6})
    assert ns.sigma.order == 6


def test_normal_closure_of_transposition_is_s3():
    G = group("S3")
    t = G.element("(1 2)")
    assert normal_closure(G, [t]).order == 6
    r = G.element("(1 2 3)")
    assert normal_closure(G, [r]).order == 3


def test_quotient_group():
    G = group("D4")
    Z = center(G)
    Q = quotient_group(G, Z)
    assert Q.group.order == 4
    assert Q.group.is_abelian
    assert int(Q.proj[G.element("r^2")]) == 0


def test_quotient_by_non_normal_subgroup_raises():
    G = group("S3")
    H = make_subgroup(G, [0, G.element("(1 2)")])
    assert not H.is_normal
    with pytest.raises(NotNormalError):
        quotient_group(G, H)


def test_subgroup_as_group_embeds():
    G = group("D4")
    H = normal_subgroups(G)[-2]
    table, emb = subgroup_as_group(G, H)
    assert table.order == H.order
    assert list(emb) == list(H.members)


def test_make_subgroup_rejects_non_closed_set():
    G = group("C4")
    with pytest.raises(GroupConstructionError):
        make_subgroup(G, [0, 1])


def test_validate_group_rejects_bad_table():
    G = group("C3")
    bad = G.mul.copy()
    bad[1, 1], bad[1, 2] = bad[1, 2], bad[1, 1]
    broken = type(G)("bad", bad, G.inv, G.labels, G.generators)
    with pytest.raises(GroupConstructionError):
        validate_group(broken)


def test_group_order_cap(settings):
    cfg = settings.model_copy(update={"max_group_order": 8})
    with pytest.raises(CapExceededError) as exc:
        make_group(parse_group_expr("S4"), cfg)
    assert exc.value.cap == "max_group_order"
    assert exc.value.requested == 24


def test_every_normal_subgroup_is_closed_under_conjugation():
    G = group("S4")
    for H in normal_subgroups(G):
        members = np.array(H.members)
        conj = G.mul[G.mul[:, members], G.inv[:, None]]
        assert H.mask[conj].all()
