import pytest
from hypothesis import given, strategies as st

from app.core.errors import ExprSyntaxError
from app.dsl.ast import (
    Cyclic,
    Dihedral,
    GroupRing,
    ProdGroup,
    ProdRing,
    Quaternion8,
    Symmetric,
    ZMod,
    group_order,
    ring_size,
)
from app.dsl.parser import canonical, parse_expr, parse_group_expr, print_expr


# =========================
# Precedence / printing
# =========================

def test_group_ring_binds_tighter_than_product():
    assert parse_expr("Z2 x Z3[C2]") == ProdRing(ZMod(2), GroupRing(ZMod(3), Cyclic(2)))
    assert parse_expr("(Z2 x Z3)[C2]") == GroupRing(ProdRing(ZMod(2), ZMod(3)), Cyclic(2))


def test_product_is_left_associative():
    assert parse_expr("Z2 x Z3 x Z5") == ProdRing(ProdRing(ZMod(2), ZMod(3)), ZMod(5))
    assert parse_group_expr("C2 x C2 x C3") == ProdGroup(ProdGroup(Cyclic(2), Cyclic(2)), Cyclic(3))


def test_canonical_whitespace_and_parens():
    assert canonical("  Z2[ C2x C2 ]") == "Z2[C2 x C2]"
    assert canonical("Z2 x (Z3 x Z5)") == "Z2 x (Z3 x Z5)"
    assert canonical("((Z2 x Z3) x Z5)") == "Z2 x Z3 x Z5"
    assert canonical("Z2[C2][C2]") == "Z2[C2][C2]"


def test_sizes_without_building():
    assert ring_size(parse_expr("Z2[C2 x C2]")) == 16
    assert ring_size(parse_expr("Z3 x Z2[S3]")) == 3 * 2 ** 6
    assert group_order(parse_group_expr("Q8 x D4")) == 64


def test_all_group_atoms():
    assert parse_group_expr("D3") == Dihedral(3)
    assert parse_group_expr("Q8") == Quaternion8()
    assert parse_group_expr("S4") == Symmetric(4)


# =========================
# Errors
# =========================

@pytest.mark.parametrize(
    "text, message, offset",
    [
        ("Z1", "modulus must be ≥ 2", 0),
        ("C2", "expected ring expression", 0),
        ("Z4[", "unexpected end of input", 3),
        ("Z4[S5]", "symmetric degree must be between 1 and 4", 3),
        ("Z4[Q4]", "only Q8 is supported", 3),
        ("Z2 ? Z3", "unexpected character '?'", 3),
        ("Z2]", "unexpected ']'", 2),
    ],
)
def test_syntax_errors_carry_offset(text, message, offset):
    with pytest.raises(ExprSyntaxError) as exc:
        parse_expr(text)
    assert exc.value.message == message
    assert exc.value.offset == offset


def test_expected_tokens_are_reported():
    with pytest.raises(ExprSyntaxError) as exc:
        parse_expr("C2")
    assert exc.value.expected == ["(", "Z"]


# =========================
# Corpus / property
# =========================

def test_corpus_is_canonical(corpus_path):
    lines = [ln.strip() for ln in corpus_path.read_text(encoding="utf-8").splitlines() if ln.strip()]
    assert len(lines) >= 50
    for line in lines:
        assert canonical(line) == line
        assert parse_expr(canonical(line)) == parse_expr(line)


small = st.integers(min_value=2, max_value=9)

groups = st.recursive(
    st.one_of(
        st.builds(Cyclic, st.integers(min_value=1, max_value=9)),
        st.builds(Dihedral, small),
        st.just(Quaternion8()),
        st.builds(Symmetric, st.integers(min_value=1, max_value=4)),
    ),
    lambda inner: st.builds(ProdGroup, inner, inner),
    max_leaves=4,
)

rings = st.recursive(
    st.builds(ZMod, small),
    lambda inner: st.one_of(st.builds(ProdRing, inner, inner), st.builds(GroupRing, inner, groups)),
    max_leaves=4,
)


@given(rings)
def test_print_then_parse_gives_same_tree(expr):
    text = print_expr(expr)
    assert parse_expr(text) == expr
    assert canonical(text) == text
