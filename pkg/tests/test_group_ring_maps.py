import pytest

from app.core.errors import NotCentralError, NotNormalError
from app.groups.finite_group import center, make_subgroup, normal_subgroups
from app.rings.builder import make_ring
from app.services.group_ring_service import (
    augmentation,
    augmentation_ideal,
    central_product_identity,
    eps_H,
    extend_ideal,
    h_hat,
    is_central,
    one_minus,
    one_sided_ideal,
    relative_augmentation_forms,
    restrict_ideal,
    ring_info,
    subgroup_ring,
)
from app.services.ideal_service import (
    ideal_closure,
    ideal_product,
    nilpotency_index,
    principal_ideal,
)


# =========================
# ε / Δ
# =========================

def test_augmentation_of_z4_c2():
    R = make_ring("Z4[C2]")
    eps = augmentation(R)
    assert eps(R.element("1+3x")) == 0
    assert eps(R.element("2+x")) == 3
    assert eps.is_surjective()


def test_augmentation_ideal_of_z4_c2():
    R = make_ring("Z4[C2]")
    D = augmentation_ideal(R)
    assert D.size == 4
    assert nilpotency_index(D) == 3
    D2 = ideal_product(D, D)
    assert [R.label(x) for x in D2.members] == ["0", "2+2x"]


def test_relative_augmentation_sizes():
    R = make_ring("Z2[C2 x C2]")
    for H in normal_subgroups(R.G):
        if H.is_trivial:
            continue
        D = augmentation_ideal(R, H)
        assert D.size * (2 ** (4 // H.order)) == R.size


def test_eps_H_target_and_kernel():
    R = make_ring("Z3[S3]")
    A3 = normal_subgroups(R.G)[1]
    rel = eps_H(R, A3)
    assert rel.target.size == 9
    assert rel.hom.kernel() == augmentation_ideal(R, A3)


def test_eps_H_needs_normal_subgroup():
    R = make_ring("Z2[S3]")
    H = make_subgroup(R.G, [0, R.G.element("(1 2)")])
    with pytest.raises(NotNormalError):
        eps_H(R, H)
    with pytest.raises(NotNormalError):
        augmentation_ideal(R, H)


@pytest.mark.parametrize("expr", ["Z2[S3]", "Z3[S3]", "Z2[D4]", "Z2[Q8]"])
def test_relative_forms_coincide(expr):
    R = make_ring(expr)
    for H in normal_subgroups(R.G):
        if H.is_trivial:
            continue
        forms = relative_augmentation_forms(R, H)
        assert forms.all_equal, H.labels()


# =========================
# Ĥ / centrality / one-sided ideals
# =========================

def test_h_hat_of_normal_subgroup_is_central():
    R = make_ring("Z2[S3]")
    A3 = normal_subgroups(R.G)[1]
    x = h_hat(R, A3)
    assert is_central(R, x)
    assert R.mul(x, x) == R.scalar(3, x)


def test_h_hat_of_non_normal_subgroup_is_not_central():
    R = make_ring("Z2[S3]")
    H = make_subgroup(R.G, [0, R.G.element("(1 2)")])
    assert not is_central(R, h_hat(R, H))


def test_one_sided_ideals_of_delta_agree_for_normal_subgroup():
    R = make_ring("Z2[S3]")
    A3 = normal_subgroups(R.G)[1]
    gens = one_minus(R, A3.members)
    left = one_sided_ideal(R, gens, "left")
    right = one_sided_ideal(R, gens, "right")
    assert left == right == ideal_closure(R, gens)


def test_one_sided_ideals_differ_for_non_normal_subgroup():
    R = make_ring("Z2[S3]")
    H = make_subgroup(R.G, [0, R.G.element("(1 2)")])
    gens = one_minus(R, H.members)
    assert one_sided_ideal(R, gens, "left") != one_sided_ideal(R, gens, "right")


# =========================
# I[G] / A[H]
# =========================

def test_extend_ideal_gives_quotient_isomorphism():
    R = make_ring("Z4[C2]")
    I = principal_ideal(R.A, 2)
    ext = extend_ideal(R, I)
    assert ext.ideal.size == 4
    assert ext.isomorphic
    assert ext.quotient_map.target.size == 4


def test_extend_whole_ideal_skips_quotient():
    R = make_ring("Z3[C2]")
    ext = extend_ideal(R, principal_ideal(R.A, 1))
    assert ext.ideal.is_whole
    assert ext.quotient_map is None


def test_extend_ideal_rejects_foreign_ideal():
    R = make_ring("Z4[C2]")
    with pytest.raises(ValueError):
        extend_ideal(R, principal_ideal(R, 2))


def test_restrict_ideal_to_subgroup_ring():
    R = make_ring("Z2[C2 x C2]")
    H = normal_subgroups(R.G)[1]
    sub = subgroup_ring(R, H)
    assert sub.ring.size == 4
    J = restrict_ideal(R, augmentation_ideal(R), sub)
    assert J.size == 2


def test_central_product_identity_on_d4():
    R = make_ring("Z2[D4]")
    Z = center(R.G)
    sub = subgroup_ring(R, Z)
    D = ideal_closure(sub.ring, one_minus(sub.ring, range(sub.ring.G.order)))
    assert central_product_identity(R, Z, D, D)
    whole = ideal_closure(sub.ring, [sub.ring.one])
    assert central_product_identity(R, Z, whole, D)


def test_central_product_identity_needs_central_subgroup():
    R = make_ring("Z2[S3]")
    A3 = normal_subgroups(R.G)[1]
    sub = subgroup_ring(R, A3)
    I = ideal_closure(sub.ring, [sub.ring.one])
    with pytest.raises(NotCentralError):
        central_product_identity(R, A3, I, I)


# =========================
# ring_info
# =========================

def test_ring_info_of_z4():
    info = ring_info(make_ring("Z4"))
    assert info["units"] == 2
    assert info["prime_radical"]["size"] == 2
    assert info["jacobson_radical"]["size"] == 2
    assert "group" not in info


def test_ring_info_of_group_ring():
    info = ring_info(make_ring("Z2[S3]"))
    assert info["group"]["center_order"] == 1
    assert not info["commutative"]
    assert [r["order"] for r in info["relative_augmentation"]] == [3, 6]
    assert info["augmentation_ideal_size"] == 32
