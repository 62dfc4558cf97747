import pytest
from hypothesis import given, strategies as st

from nuca.universe import GroupUniverse, UniverseError, format_element, parse_element

Z = GroupUniverse(1)
Z2 = GroupUniverse(2)
Z3 = GroupUniverse(0, (3,))


@pytest.mark.parametrize(
    "text,free,moduli",
    [("Z", 1, ()), ("Z^2", 2, ()), ("Z/3", 0, (3,)), ("Z * Z/4", 1, (4,)), ("Z/2 * Z/2", 0, (2, 2)), ("Z^0", 0, ())],
)
def test_parse(text, free, moduli):
    u = GroupUniverse.parse(text)
    assert (u.free_rank, u.moduli) == (free, moduli)
    assert GroupUniverse.parse(str(u)) == u


@pytest.mark.parametrize("text", ["Z^", "", "Z/1", "Q", "Z * ", "Z/x"])
def test_parse_rejects(text):
    with pytest.raises(UniverseError):
        GroupUniverse.parse(text)


def test_mul_examples():
    assert Z3.mul((2,), (2,)) == (1,)
    assert Z2.mul((1, 0), (0, -2)) == (1, -2)


def test_inv_examples():
    assert Z.inv((3,)) == (-3,)
    assert GroupUniverse(0, (5,)).inv((2,)) == (3,)
    assert Z2.inv(Z2.identity) == Z2.identity


def test_mismatched_universe():
    with pytest.raises(UniverseError):
        Z.mul((1,), (1, 2))
    with pytest.raises(UniverseError):
        Z3.check((3,))


def test_ball_examples():
    assert Z.ball(2) == frozenset({(-2,), (-1,), (0,), (1,), (2,)})
    assert len(Z2.ball(1)) == 5
    assert Z3.ball(1) == Z3.enumerate_all()
    assert GroupUniverse(0, (32,)).ball(16) == GroupUniverse(0, (32,)).enumerate_all()


@pytest.mark.parametrize("text", ["Z", "Z^2", "Z * Z/4", "Z/5", "Z/2 * Z/3"])
def test_ball_is_generator_power(text):
    u = GroupUniverse.parse(text)
    delta = u.generators()
    assert u.identity in delta and u.inverse_set(delta) == delta
    prev = frozenset()
    for k in range(4):
        b = u.ball(k)
        assert b == u.power_set(delta, k)
        assert prev <= b and u.inverse_set(b) == b
        prev = b


def test_enumerate_infinite_raises():
    with pytest.raises(UniverseError):
        Z.enumerate_all()


def test_far_cells_avoid():
    avoid = Z.ball(5)
    far = Z.far_cells(avoid, 3)
    assert len(set(far)) == 3
    assert all(g not in avoid and Z.norm(g) > 5 for g in far)


def test_element_format_roundtrip():
    assert format_element((1, -2)) == "(1,-2)"
    assert parse_element("(1, -2)") == (1, -2)
    assert Z3.element(-1) == (2,)


coords = st.integers(-20, 20)


@given(coords, coords, coords, coords, st.integers(0, 3), st.integers(0, 3))
def test_group_laws(a1, a2, b1, b2, c1, c2):
    u = GroupUniverse(2, (4,))
    a, b, c = u.element(a1, a2, c1), u.element(b1, b2, c2), u.element(b2, a1, c1 + c2)
    assert u.mul(a, u.identity) == a
    assert u.mul(a, b) == u.mul(b, a)
    assert u.mul(u.mul(a, b), c) == u.mul(a, u.mul(b, c))
    assert u.mul(a, u.inv(a)) == u.identity


@given(st.integers(0, 6))
def test_ball_z_is_interval(k):
    assert Z.ball(k) == frozenset((i,) for i in range(-k, k + 1))
