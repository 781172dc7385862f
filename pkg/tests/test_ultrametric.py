from fractions import Fraction

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from ultrametric_gas.ultrametric import (
    SAME,
    Ball,
    BallFamily,
    ascend,
    ball_distance,
    complement,
    descend,
    disjoint,
    family_of,
    format_ball,
    group_by_coset,
    has_mergeable_siblings,
    parse_ball,
    push_into,
)


@st.composite
def families(draw, q=None, max_depth=3):
    q = q or draw(st.sampled_from([2, 3, 5]))
    balls = []
    for _ in range(draw(st.integers(min_value=0, max_value=4))):
        depth = draw(st.integers(min_value=1, max_value=max_depth))
        b = Ball(q, tuple(draw(st.integers(min_value=0, max_value=q - 1)) for _ in range(depth)))
        if all(disjoint(b, c) for c in balls):
            balls.append(b)
    return BallFamily(q, tuple(balls))


def _leaves(q, depth):
    return [Ball(q, tuple(int(c) for c in format(i, f"0{depth}b"))) for i in range(2**depth)] if q == 2 else None


class TestBall:
    def test_measure_and_containment(self):
        b = Ball(5, (1, 3))
        assert b.measure == Fraction(1, 25)
        assert Ball.whole(5).contains(b)
        assert Ball(5, (1,)).contains(b)
        assert not b.contains(Ball(5, (1,)))
        assert b.center() == 16
        assert b.parent() == Ball(5, (1,))

    def test_invalid_digits(self):
        with pytest.raises(ValueError):
            Ball(3, (3,))
        with pytest.raises(ValueError):
            Ball(1, ())
        with pytest.raises(ValueError):
            Ball.whole(2).parent()

    def test_distance(self):
        assert ball_distance(Ball(2, (0, 1)), Ball(2, (0, 0, 1))) == 1
        assert ball_distance(Ball(2, (1,)), Ball(2, (0, 0))) == 0
        assert ball_distance(Ball(2, (1,)), Ball(2, (1, 0))) is SAME

    @pytest.mark.parametrize("text", ["5:2:1.3", "2:0:", "3:1:2"])
    def test_parse_roundtrip(self, text):
        assert format_ball(parse_ball(text)) == text

    @pytest.mark.parametrize("text", ["5:2:1", "5:1", "3:1:3"])
    def test_parse_rejects(self, text):
        with pytest.raises(ValueError):
            parse_ball(text)

    def test_push_and_descend(self):
        b = Ball(3, (2,))
        assert push_into(b, (0, 1)) == Ball(3, (0, 1, 2))
        assert descend(ascend(b, 1)) == b
        with pytest.raises(ValueError):
            descend(Ball.whole(3))


class TestComplement:
    def test_binary_example(self):
        comp = complement(family_of(2, [(0, 0)]))
        assert set(comp.balls) == {Ball(2, (1,)), Ball(2, (0, 1))}

    def test_empty_family(self):
        assert complement(BallFamily(3, ())).balls == (Ball.whole(3),)

    def test_whole_ring(self):
        assert complement(family_of(3, [()])).balls == ()

    def test_within_ball(self):
        comp = complement(family_of(3, [(1, 2)]), Ball(3, (1,)))
        assert set(comp.balls) == {Ball(3, (1, 0)), Ball(3, (1, 1))}

    def test_outside_enclosing_ball(self):
        with pytest.raises(ValueError):
            complement(family_of(2, [(0,)]), Ball(2, (1,)))

    @settings(max_examples=80, deadline=None)
    @given(families())
    def test_partition_and_minimality(self, fam):
        comp = complement(fam)
        union = BallFamily(fam.q, fam.balls + comp.balls)
        assert union.covers()
        assert not has_mergeable_siblings(comp)

    @settings(max_examples=40, deadline=None)
    @given(families(q=2, max_depth=3))
    def test_pointwise_on_binary_leaves(self, fam):
        comp = complement(fam)
        for leaf in _leaves(2, 3):
            in_fam = any(b.contains(leaf) for b in fam)
            in_comp = sum(b.contains(leaf) for b in comp)
            assert in_comp == (0 if in_fam else 1)


def test_family_rejects_overlap():
    with pytest.raises(ValueError):
        family_of(2, [(0,), (0, 1)])


def test_group_by_coset():
    groups = group_by_coset(family_of(3, [(0, 1), (2,), (0, 0, 2)]))
    assert [len(g) for g in groups] == [2, 0, 1]
    with pytest.raises(ValueError):
        group_by_coset(family_of(3, [()]))
