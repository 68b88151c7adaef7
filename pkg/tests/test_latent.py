"""Latent-space operations against independent reference implementations.

The traversal references (tests/oracles.py) are plain 1-based Python loops
over lists, with no numpy vectorization, so they share no code path with
the implementations they check.
"""

from __future__ import annotations

import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from oracles import ref_circular, ref_extrapolate_two_sided

from latentscope.errors import DegenerateGeometryError, InvalidArgumentError
from latentscope.latent import (
    AnchorSet,
    ArithmeticExpression,
    LatentSpace,
    LatentVector,
    TraversalKind,
    average_anchors,
    circular_interpolation,
    evaluate_arithmetic,
    extrapolate_two_sided,
    lerp,
    parse_expression_terms,
    parse_latent,
    parse_latents,
    sample_latents,
    serialize_latent,
    serialize_latents,
    slerp,
)

UC = LatentSpace.UNIFORM_CUBE
UG = LatentSpace.UNIT_GAUSSIAN


def vec(*comps, space=UC):
    return LatentVector(np.array(comps, dtype=np.float64), space)


finite_components = st.floats(
    min_value=-1.0, max_value=1.0, allow_nan=False, allow_infinity=False
)


class TestSampling:
    def test_deterministic_per_seed(self):
        first = sample_latents(UC, 100, 2, seed=7)
        second = sample_latents(UC, 100, 2, seed=7)
        for x, y in zip(first, second):
            assert np.array_equal(x.values, y.values)

    def test_uniform_cube_range(self):
        vs = sample_latents(UC, 100, 1000, seed=1)
        block = np.stack([v.values for v in vs])
        assert np.all(block >= -1.0) and np.all(block <= 1.0)

    def test_seeds_differ(self):
        x = sample_latents(UC, 100, 1, seed=1)[0]
        y = sample_latents(UC, 100, 1, seed=2)[0]
        assert not np.array_equal(x.values, y.values)

    def test_gaussian_moments(self):
        # mean of 10k standard normals has sigma 0.01, variance has ~0.014;
        # the bounds below sit more than 10 sigma out
        vs = sample_latents(UG, 512, 10000, seed=3)
        block = np.stack([v.values for v in vs])
        mean = block.mean(axis=0)
        var = block.var(axis=0)
        assert np.all(mean > -0.1) and np.all(mean < 0.1)
        assert np.all(var > 0.8) and np.all(var < 1.2)

    def test_space_tag_carried(self):
        assert sample_latents(UG, 4, 1, seed=0)[0].space is UG

    @pytest.mark.parametrize("dim,count", [(0, 1), (1, 0), (-3, 2)])
    def test_bad_args(self, dim, count):
        with pytest.raises(InvalidArgumentError):
            sample_latents(UC, dim, count, seed=0)


class TestLerp:
    def test_three_point_example(self):
        seq = lerp(vec(1.0, 0.0), vec(0.0, 1.0), 3)
        expected = [(1.0, 0.0), (0.5, 0.5), (0.0, 1.0)]
        for p, e in zip(seq.points, expected):
            np.testing.assert_array_equal(p.values, e)

    def test_five_point_midpoint(self):
        seq = lerp(vec(2.0, 0.0), vec(0.0, 4.0), 5)
        np.testing.assert_array_equal(seq.points[2].values, [1.0, 2.0])

    def test_degenerate_segment(self):
        a = vec(0.3, -0.7, 0.1)
        seq = lerp(a, a, 7)
        for p in seq.points:
            np.testing.assert_array_equal(p.values, a.values)

    @given(
        st.lists(finite_components, min_size=1, max_size=20),
        st.lists(finite_components, min_size=1, max_size=20),
        st.integers(min_value=2, max_value=33),
    )
    def test_endpoints_bitwise(self, xs, ys, n):
        k = min(len(xs), len(ys))
        a, b = vec(*xs[:k]), vec(*ys[:k])
        seq = lerp(a, b, n)
        assert seq.points[0].values.tobytes() == a.values.tobytes()
        assert seq.points[-1].values.tobytes() == b.values.tobytes()

    def test_metadata(self):
        a, b = vec(1.0), vec(2.0)
        seq = lerp(a, b, 4)
        assert seq.kind is TraversalKind.LINEAR
        assert len(seq.points) == 4
        assert seq.endpoints == (a, b)

    def test_dim_mismatch(self):
        with pytest.raises(InvalidArgumentError):
            lerp(vec(1.0), vec(1.0, 2.0), 3)

    def test_space_mismatch(self):
        with pytest.raises(InvalidArgumentError):
            lerp(vec(1.0), vec(2.0, space=UG), 3)

    def test_n_too_small(self):
        with pytest.raises(InvalidArgumentError):
            lerp(vec(1.0), vec(2.0), 1)


class TestExtrapolateTwoSided:
    def test_matches_reference_100_seeds(self):
        for seed in range(100):
            rng = np.random.default_rng(seed)
            a = rng.uniform(-1, 1, size=12)
            b = rng.uniform(-1, 1, size=12)
            seq = extrapolate_two_sided(vec(*a), vec(*b), 16)
            ref = ref_extrapolate_two_sided(list(a), list(b), 16)
            for p, r in zip(seq.points, ref):
                np.testing.assert_allclose(p.values, r, rtol=0, atol=1e-12)

    def test_first_point_is_b(self):
        # coefficient at index 0 = -0/(n-1) = 0, so the blend collapses to b
        a, b = vec(0.25, -0.5, 0.75), vec(-0.125, 0.3, 0.9)
        seq = extrapolate_two_sided(a, b, 16)
        np.testing.assert_array_equal(seq.points[0].values, b.values)

    def test_frozen_half_boundary_coefficients(self):
        # hand-evaluated schedule at n=16: el_8 = -7/15, el_9 = 1 + 8/15
        a, b = vec(1.0), vec(0.0)
        # with b = 0 and a = 1 each point equals its coefficient
        seq = extrapolate_two_sided(a, b, 16)
        assert seq.points[7].values[0] == pytest.approx(-7 / 15, abs=1e-15)
        assert seq.points[8].values[0] == pytest.approx(1 + 8 / 15, abs=1e-15)
        jump = seq.points[8].values[0] - seq.points[7].values[0]
        assert jump == pytest.approx(2.0, abs=1e-15)

    def test_gap_structure_n16(self):
        rng = np.random.default_rng(42)
        a = vec(*rng.uniform(-1, 1, size=100))
        b = vec(*rng.uniform(-1, 1, size=100))
        base = np.linalg.norm(a.values - b.values)
        seq = extrapolate_two_sided(a, b, 16)
        gaps = [
            np.linalg.norm(p.values - q.values)
            for p, q in zip(seq.points, seq.points[1:])
        ]
        for i, g in enumerate(gaps):
            expected = 2.0 * base if i == 7 else base / 15.0
            assert g == pytest.approx(expected, rel=1e-12)

    def test_boundary_jump_any_even_n(self):
        # the 2*||a-b|| jump is a property of the schedule, not of n=16
        rng = np.random.default_rng(3)
        a = vec(*rng.uniform(-1, 1, size=10))
        b = vec(*rng.uniform(-1, 1, size=10))
        base = np.linalg.norm(a.values - b.values)
        for n in (2, 4, 8, 20):
            seq = extrapolate_two_sided(a, b, n)
            h = n // 2
            jump = np.linalg.norm(seq.points[h].values - seq.points[h - 1].values)
            assert jump == pytest.approx(2.0 * base, rel=1e-12)

    def test_degenerate_segment(self):
        a = vec(0.1, 0.2)
        seq = extrapolate_two_sided(a, a, 16)
        for p in seq.points:
            np.testing.assert_allclose(p.values, a.values, atol=1e-15)

    @pytest.mark.parametrize("n", [3, 5, 15])
    def test_odd_n_rejected(self, n):
        with pytest.raises(InvalidArgumentError):
            extrapolate_two_sided(vec(1.0), vec(0.0), n)

    def test_kind(self):
        seq = extrapolate_two_sided(vec(1.0), vec(0.0), 4)
        assert seq.kind is TraversalKind.EXTRAPOLATE


class TestCircular:
    def test_matches_reference_100_seeds(self):
        for seed in range(100):
            rng = np.random.default_rng(1000 + seed)
            a = rng.uniform(-1, 1, size=8)
            b = rng.uniform(-1, 1, size=8)
            seq = circular_interpolation(vec(*a), vec(*b), 16)
            ref = ref_circular(list(a), list(b), 16)
            for p, r in zip(seq.points, ref):
                np.testing.assert_allclose(p.values, r, rtol=0, atol=1e-12)

    def test_frozen_first_point(self):
        # theta=0 gives x=1, y=0: blend lands on b, then the overwrite
        a, b = vec(0.0, 0.0, 0.0), vec(0.0, 0.0, 1.0)
        seq = circular_interpolation(a, b, 16)
        np.testing.assert_array_equal(seq.points[0].values, [1.0, 0.0, 1.0])

    def test_frozen_last_point(self):
        # theta=pi gives x=-1: blend = 2a - b; y picks up sin(pi) ~ 1.22e-16
        a, b = vec(0.0, 0.0, 0.0), vec(0.0, 0.0, 1.0)
        seq = circular_interpolation(a, b, 16)
        np.testing.assert_allclose(
            seq.points[-1].values, [-1.0, 1.2246467991473532e-16, -1.0], atol=1e-15
        )

    def test_degenerate_blend_traces_semicircle(self):
        # a == b with mid[0] = mid[1] = 0: the blend is constant a while
        # components 0 and 1 walk the unit semicircle
        a = vec(0.0, 0.0, 0.4, -0.2)
        seq = circular_interpolation(a, a, 9)
        for i, p in enumerate(seq.points):
            theta = math.pi * i / 8
            assert p.values[0] == pytest.approx(math.cos(theta), abs=1e-12)
            assert p.values[1] == pytest.approx(math.sin(theta), abs=1e-12)
            np.testing.assert_allclose(p.values[2:], a.values[2:], atol=1e-15)

    def test_radius_scales_circle(self):
        a = vec(0.0, 0.0, 0.5)
        seq = circular_interpolation(a, a, 5, radius=2.0)
        assert seq.points[0].values[0] == pytest.approx(2.0)
        assert seq.points[2].values[1] == pytest.approx(2.0)

    def test_dim_one_rejected(self):
        with pytest.raises(InvalidArgumentError):
            circular_interpolation(vec(1.0), vec(0.0), 4)

    def test_kind(self):
        seq = circular_interpolation(vec(0.0, 0.0), vec(1.0, 1.0), 4)
        assert seq.kind is TraversalKind.CIRCULAR


class TestSlerp:
    def test_quarter_circle_midpoint(self):
        seq = slerp(vec(1.0, 0.0), vec(0.0, 1.0), 3)
        half = math.sqrt(2) / 2
        np.testing.assert_allclose(seq.points[1].values, [half, half], atol=1e-12)

    def test_two_point_identity(self):
        a = vec(1.0, 0.0)
        b = vec(math.cos(0.3), math.sin(0.3))
        seq = slerp(a, b, 2)
        assert seq.points[0].values.tobytes() == a.values.tobytes()
        assert seq.points[1].values.tobytes() == b.values.tobytes()

    @given(
        st.lists(finite_components, min_size=2, max_size=16),
        st.lists(finite_components, min_size=2, max_size=16),
        st.integers(min_value=2, max_value=17),
    )
    def test_endpoints_bitwise(self, xs, ys, n):
        k = min(len(xs), len(ys))
        a_arr = np.array(xs[:k])
        b_arr = np.array(ys[:k])
        if np.linalg.norm(a_arr) == 0 or np.linalg.norm(b_arr) == 0:
            return
        a, b = vec(*a_arr), vec(*b_arr)
        try:
            seq = slerp(a, b, n)
        except DegenerateGeometryError:
            return
        assert seq.points[0].values.tobytes() == a.values.tobytes()
        assert seq.points[-1].values.tobytes() == b.values.tobytes()

    def test_norm_preserved_on_equal_norms(self):
        rng = np.random.default_rng(11)
        for _ in range(20):
            a_arr = rng.normal(size=32)
            b_arr = rng.normal(size=32)
            r = 2.5
            a_arr *= r / np.linalg.norm(a_arr)
            b_arr *= r / np.linalg.norm(b_arr)
            seq = slerp(vec(*a_arr), vec(*b_arr), 9)
            for p in seq.points:
                assert abs(np.linalg.norm(p.values) - r) <= 1e-6 * r

    def test_tiny_angle_falls_back_to_lerp(self):
        a = vec(1.0, 0.0)
        b = vec(1.0, 1e-9)  # angle ~1e-9 rad, below the slerp threshold
        seq = slerp(a, b, 5)
        ref = lerp(a, b, 5)
        for p, q in zip(seq.points, ref.points):
            np.testing.assert_allclose(p.values, q.values, atol=1e-15)

    def test_zero_norm_rejected(self):
        with pytest.raises(InvalidArgumentError):
            slerp(vec(0.0, 0.0), vec(1.0, 0.0), 3)

    def test_antiparallel_rejected(self):
        with pytest.raises(DegenerateGeometryError):
            slerp(vec(1.0, 0.0), vec(-2.0, 0.0), 3)

    def test_kind(self):
        seq = slerp(vec(1.0, 0.0), vec(0.0, 1.0), 3)
        assert seq.kind is TraversalKind.SLERP


class TestAnchorsAndArithmetic:
    def test_mean_of_identical_vectors(self):
        v = vec(0.5, -0.25)
        s = AnchorSet(name="s", members=(v, v, v))
        np.testing.assert_array_equal(average_anchors(s).values, v.values)

    def test_symmetric_cancellation(self):
        s = AnchorSet(name="s", members=(vec(1.0, 0.0), vec(0.0, 1.0), vec(-1.0, -1.0)))
        np.testing.assert_array_equal(average_anchors(s).values, [0.0, 0.0])

    def test_single_member(self):
        v = vec(0.125, 0.375, -0.5)
        s = AnchorSet(name="s", members=(v,))
        np.testing.assert_array_equal(average_anchors(s).values, v.values)

    def test_empty_set_rejected(self):
        with pytest.raises(InvalidArgumentError):
            AnchorSet(name="s", members=())

    def test_mixed_dims_rejected(self):
        with pytest.raises(InvalidArgumentError):
            AnchorSet(name="s", members=(vec(1.0), vec(1.0, 2.0)))

    def test_tags_lowercased(self):
        s = AnchorSet(name="s", attribute_tags=frozenset({"Smiling", "WOMAN"}), members=(vec(1.0),))
        assert s.attribute_tags == frozenset({"smiling", "woman"})

    @given(
        st.lists(
            st.lists(finite_components, min_size=3, max_size=3),
            min_size=1,
            max_size=4,
        ),
        st.lists(
            st.lists(finite_components, min_size=3, max_size=3),
            min_size=1,
            max_size=4,
        ),
    )
    def test_cancellation_is_bitwise(self, a_rows, b_rows):
        """A - B + B must equal mean(A) bitwise, however ugly the floats."""
        a = AnchorSet(name="a", members=tuple(vec(*r) for r in a_rows))
        b = AnchorSet(name="b", members=tuple(vec(*r) for r in b_rows))
        expr = ArithmeticExpression(terms=((1, a), (-1, b), (1, b)))
        out = evaluate_arithmetic(expr)
        assert out.values.tobytes() == average_anchors(a).values.tobytes()

    def test_single_term_is_mean(self):
        a = AnchorSet(name="a", members=(vec(0.1, 0.2), vec(0.3, 0.4)))
        expr = ArithmeticExpression(terms=((1, a),))
        out = evaluate_arithmetic(expr)
        assert out.values.tobytes() == average_anchors(a).values.tobytes()

    def test_linearity_against_independent_sum(self):
        rng = np.random.default_rng(5)
        sets = [
            AnchorSet(
                name=f"s{i}",
                members=tuple(vec(*rng.uniform(-1, 1, size=6)) for _ in range(3)),
            )
            for i in range(3)
        ]
        expr = ArithmeticExpression(terms=((1, sets[0]), (-1, sets[1]), (1, sets[2])))
        out = evaluate_arithmetic(expr)
        independent = (
            average_anchors(sets[0]).values
            - average_anchors(sets[1]).values
            + average_anchors(sets[2]).values
        )
        np.testing.assert_allclose(out.values, independent, rtol=1e-12)

    def test_dim_mismatch_rejected(self):
        a = AnchorSet(name="a", members=(vec(1.0),))
        b = AnchorSet(name="b", members=(vec(1.0, 2.0),))
        with pytest.raises(InvalidArgumentError):
            ArithmeticExpression(terms=((1, a), (-1, b)))

    def test_result_keeps_space_tag(self):
        a = AnchorSet(name="a", members=(vec(1.0, space=UG),))
        out = evaluate_arithmetic(ArithmeticExpression(terms=((1, a),)))
        assert out.space is UG


class TestExpressionParsing:
    def test_three_terms(self):
        assert parse_expression_terms("+setA -setB +setC") == [
            (1, "setA"),
            (-1, "setB"),
            (1, "setC"),
        ]

    def test_leading_plus_optional(self):
        assert parse_expression_terms("alpha -beta") == [(1, "alpha"), (-1, "beta")]

    def test_empty_rejected(self):
        with pytest.raises(InvalidArgumentError):
            parse_expression_terms("   ")

    def test_bare_sign_rejected(self):
        with pytest.raises(InvalidArgumentError):
            parse_expression_terms("+ setA")


class TestSerialization:
    def test_wire_format(self):
        v = vec(0.5, -1.0)
        assert serialize_latent(v) == "2 uniform_cube 0.5 -1.0"

    def test_round_trip_examples(self):
        for comps in ([0.1], [1e-308, -1e308], [0.0, -0.0], [1 / 3, math.pi]):
            v = vec(*comps)
            back = parse_latent(serialize_latent(v))
            assert back.values.tobytes() == v.values.tobytes()
            assert back.space is v.space

    @given(
        st.lists(
            st.floats(allow_nan=False, allow_infinity=False, width=64),
            min_size=1,
            max_size=32,
        ),
        st.sampled_from([UC, UG]),
    )
    def test_round_trip_bitwise(self, comps, space):
        v = LatentVector(np.array(comps, dtype=np.float64), space)
        back = parse_latent(serialize_latent(v))
        assert back.values.tobytes() == v.values.tobytes()
        assert back.space is space

    def test_multi_record_round_trip(self):
        vs = sample_latents(UC, 7, 5, seed=9)
        back = parse_latents(serialize_latents(vs))
        assert len(back) == 5
        for x, y in zip(vs, back):
            assert x.values.tobytes() == y.values.tobytes()

    @pytest.mark.parametrize(
        "line",
        [
            "",
            "2 uniform_cube 0.5",  # component count lies
            "x uniform_cube 0.5 0.5",  # bad dim
            "2 flat_torus 0.5 0.5",  # unknown space
            "2 uniform_cube 0.5 banana",  # bad component
            "1 uniform_cube nan",  # non-finite component
        ],
    )
    def test_malformed_records_rejected(self, line):
        with pytest.raises(InvalidArgumentError):
            parse_latent(line)


class TestLatentVector:
    def test_values_read_only(self):
        v = vec(1.0, 2.0)
        with pytest.raises(ValueError):
            v.values[0] = 5.0

    def test_non_finite_rejected(self):
        with pytest.raises(InvalidArgumentError):
            LatentVector(np.array([1.0, np.nan]), UC)
        with pytest.raises(InvalidArgumentError):
            LatentVector(np.array([np.inf]), UC)

    def test_empty_rejected(self):
        with pytest.raises(InvalidArgumentError):
            LatentVector(np.array([]), UC)
