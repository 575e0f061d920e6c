import random
from fractions import Fraction

import pytest
from hypothesis import given, strategies as st

from gieseker import (
    AdmissibleClassSpec,
    DomainError,
    EvaluationInsertion,
    FixedComponentLabel,
    IndexInsertion,
    LaurentCharacter,
    Partition,
    char_add,
    char_mul,
    char_pow,
    character_from_json,
    character_to_json,
    chain_base_graph,
    class_weight,
    degree_range,
    descendant_weight,
    evaluation_weight,
    index_character,
    line_bundle_weight,
    nt2b,
    vanishing_bounds,
    weight_zero_part,
)

X = LaurentCharacter.monomial


def rationals():
    return st.builds(Fraction, st.integers(-8, 8), st.integers(1, 6))


def characters(arity=1, max_terms=4):
    exps = st.tuples(*([rationals()] * arity))
    return st.dictionaries(exps, st.integers(-5, 5), max_size=max_terms).map(
        lambda d: LaurentCharacter.from_terms(arity, d)
    )


class TestRingOperations:
    def test_inverse_pair(self):
        assert char_mul(X(1, (1,)), X(1, (-1,))) == LaurentCharacter.one(1)

    def test_difference_of_squares(self):
        a = char_add(LaurentCharacter.one(1), X(1, (1,)))
        b = char_add(LaurentCharacter.one(1), X(1, (1,), -1))
        prod = char_mul(a, b)
        assert prod == char_add(LaurentCharacter.one(1), X(1, (2,), -1))

    def test_fractional_power(self):
        c = X(1, (Fraction(1, 2),), 2)
        assert char_pow(c, 3) == X(1, (Fraction(3, 2),), 8)

    def test_negative_power_of_unit(self):
        c = X(1, (Fraction(1, 2),), -1)
        assert char_pow(c, -2) == X(1, (-1,))

    def test_negative_power_rejects_non_unit(self):
        with pytest.raises(DomainError):
            char_pow(X(1, (1,), 2), -1)
        with pytest.raises(DomainError):
            char_pow(char_add(X(1, (0,)), X(1, (1,))), -1)

    def test_arity_mismatch(self):
        with pytest.raises(DomainError):
            char_add(X(1, (1,)), X(2, (1, 0)))

    @given(characters(), characters(), characters())
    def test_ring_laws(self, a, b, c):
        assert char_add(a, b) == char_add(b, a)
        assert char_mul(a, b) == char_mul(b, a)
        assert char_mul(a, char_add(b, c)) == char_add(char_mul(a, b), char_mul(a, c))
        assert char_mul(char_mul(a, b), c) == char_mul(a, char_mul(b, c))

    @given(characters())
    def test_weight_zero_is_linear(self, a):
        assert weight_zero_part(char_add(a, a)) == 2 * weight_zero_part(a)

    @given(characters(), st.fractions(max_denominator=4))
    def test_weight_zero_multiplicative_on_units(self, a, e):
        unit = X(1, (e,))
        shifted = char_mul(a, unit)
        assert weight_zero_part(shifted) == a.coefficient((-e,))


def test_weight_zero_examples():
    assert weight_zero_part(char_add(LaurentCharacter.one(1), X(1, (1,), 3))) == 1
    assert weight_zero_part(X(1, (Fraction(1, 2),))) == 0
    five = X(2, (0, 0), 5)
    mixed = char_add(five, X(2, (1, -1), -2))
    assert weight_zero_part(mixed) == 5


def two_block_label(n_plus, n_minus):
    partition = Partition.of([("a",), ("b",)])
    return FixedComponentLabel(partition, {("a",): n_plus, ("b",): n_minus})


class TestLineBundleWeight:
    def test_two_block_formula(self):
        label = two_block_label(4, -2)
        genera = {("a",): 0, ("b",): 0}
        q = Fraction(3, 2)
        out = line_bundle_weight(label, genera, q)
        assert out == X(2, (q * 5, q * (-1)))

    def test_trivial_when_sums_hit_genus(self):
        label = two_block_label(1, 2)
        genera = {("a",): 2, ("b",): 3}
        assert line_bundle_weight(label, genera, 1) == LaurentCharacter.one(2)

    def test_chain_point_exponents(self):
        d, n = 5, 3
        label = two_block_label(d + n - 1, -n)
        out = line_bundle_weight(label, {("a",): 0, ("b",): 0}, 1)
        assert out == X(2, (d + n, 1 - n))

    def test_section_counting_oracle(self):
        # on a genus-0 single-block model, the n+1 monomial sections each
        # carry weight -1, so the dual determinant has weight q(n+1)
        partition = Partition.of([("v",)])
        for q in (Fraction(1), Fraction(1, 2), Fraction(3)):
            for n in range(0, 41):
                monomials = [(a, n - a) for a in range(n + 1)]
                det_weight = sum(-1 for _ in monomials)
                expected = -q * det_weight
                label = FixedComponentLabel(partition, {("v",): n})
                out = line_bundle_weight(label, {("v",): 0}, q)
                assert out == X(1, (expected,))


class TestEvaluationWeight:
    def test_minus_lambda_on_the_block(self):
        partition = Partition.of([("a",), ("b",)])
        assert evaluation_weight(partition, ("a",), 3) == X(2, (-3, 0))

    def test_zero_weight(self):
        partition = Partition.of([("a",), ("b",)])
        assert evaluation_weight(partition, ("b",), 0) == LaurentCharacter.one(2)

    def test_multiplicative(self):
        partition = Partition.of([("a",), ("b",)])
        prod = char_mul(
            evaluation_weight(partition, ("a",), 1),
            evaluation_weight(partition, ("b",), 2),
        )
        assert prod == X(2, (-1, -2))


class TestIndexCharacter:
    def test_single_block_display(self):
        label = FixedComponentLabel(Partition.of([("v",)]), {("v",): 7})
        out = index_character(label, {("v",): 0}, 1)
        assert out == X(1, (-1,), 8)

    def test_vanishing_coefficient(self):
        label = FixedComponentLabel(Partition.of([("v",)]), {("v",): 2})
        assert index_character(label, {("v",): 3}, 1) == LaurentCharacter.zero(1)

    def test_two_block_weight_two(self):
        label = two_block_label(3, -1)
        out = index_character(label, {("a",): 0, ("b",): 0}, 2)
        expected = char_add(X(2, (-2, 0), 7), X(2, (0, -2), -1))
        assert out == expected

    def test_riemann_roch_oracle(self):
        def chi_rational_curve(m):
            # independent count: monomial sections for m >= 0, minus the
            # dual count for m <= -2, zero in between
            if m >= 0:
                return len([(a, m - a) for a in range(m + 1)])
            if m == -1:
                return 0
            return -len([(a, -m - 2 - a) for a in range(-m - 1)])

        rng = random.Random(2)
        for _ in range(25):
            n_plus, n_minus = rng.randint(-5, 8), rng.randint(-5, 8)
            lam = rng.randint(-3, 3)
            label = two_block_label(n_plus, n_minus)
            out = index_character(label, {("a",): 0, ("b",): 0}, lam)
            expected = {}
            for value, idx in ((n_plus, 0), (n_minus, 1)):
                exp = [Fraction(0), Fraction(0)]
                exp[idx] = Fraction(-lam)
                key = tuple(exp)
                expected[key] = expected.get(key, 0) + chi_rational_curve(lam * value)
            assert out == LaurentCharacter.from_terms(2, expected)


def test_descendant_weight_is_one():
    partition = Partition.of([("a",), ("b",)])
    assert descendant_weight(partition) == LaurentCharacter.one(2)


class TestClassWeight:
    def test_line_bundle_only(self):
        spec = AdmissibleClassSpec(Fraction(1))
        label = two_block_label(1, 0)
        genera = {("a",): 0, ("b",): 0}
        assert class_weight(spec, label, genera, {}) == line_bundle_weight(label, genera, 1)

    def test_with_one_evaluation(self):
        spec = AdmissibleClassSpec(Fraction(1), (EvaluationInsertion("1", 2),))
        label = two_block_label(1, 0)
        genera = {("a",): 0, ("b",): 0}
        out = class_weight(spec, label, genera, {"1": ("a",)})
        assert out == X(2, (0, 1))

    def test_missing_q_rejected(self):
        with pytest.raises(DomainError):
            AdmissibleClassSpec(Fraction(0))
        with pytest.raises(DomainError):
            AdmissibleClassSpec(Fraction(-1, 2))

    def test_negative_index_power_rejected(self):
        with pytest.raises(DomainError):
            IndexInsertion(1, -1)


class TestVanishingBounds:
    def sweep_zero_beyond_bounds(self, spec, d):
        base = chain_base_graph()
        bounds = vanishing_bounds(spec, base, d)
        (r,) = nt2b(base)
        genera = {("a",): 0, ("b",): 0}
        blocks = {"1": ("a",), "2": ("a",), "3": ("b",), "4": ("b",)}
        upper, lower = bounds.upper(r), bounds.lower(r)
        for n in range(lower - 15, upper + 16):
            label = two_block_label(d + n - 1, -n)
            w = class_weight(spec, label, genera, blocks)
            if n >= upper or n <= lower:
                assert weight_zero_part(w) == 0
        return upper, lower

    def test_no_insertions(self):
        spec = AdmissibleClassSpec(Fraction(1))
        upper, lower = self.sweep_zero_beyond_bounds(spec, 3)
        assert upper <= abs(3) + 3 or upper <= 3 + 3

    def test_insertions_widen(self):
        plain = AdmissibleClassSpec(Fraction(1))
        rich = AdmissibleClassSpec(
            Fraction(1),
            (EvaluationInsertion("1", 4), EvaluationInsertion("3", -2)),
            (IndexInsertion(2, 1),),
        )
        base = chain_base_graph()
        (r,) = nt2b(base)
        b1 = vanishing_bounds(plain, base, 0)
        b2 = vanishing_bounds(rich, base, 0)
        assert b2.upper(r) >= b1.upper(r)
        assert b2.lower(r) <= b1.lower(r)
        self.sweep_zero_beyond_bounds(rich, 0)

    def test_larger_q_never_widens(self):
        for spec_small, spec_big in [
            (
                AdmissibleClassSpec(Fraction(1), (EvaluationInsertion("1", 3),)),
                AdmissibleClassSpec(Fraction(2), (EvaluationInsertion("1", 3),)),
            )
        ]:
            base = chain_base_graph()
            (r,) = nt2b(base)
            b_small = vanishing_bounds(spec_small, base, 2)
            b_big = vanishing_bounds(spec_big, base, 2)
            assert b_big.upper(r) <= b_small.upper(r)
            assert b_big.lower(r) >= b_small.lower(r)


class TestDegreeRange:
    def test_three_evaluations(self):
        spec = AdmissibleClassSpec(
            Fraction(1),
            (EvaluationInsertion("1", 1), EvaluationInsertion("2", 1), EvaluationInsertion("3", 1)),
        )
        assert degree_range(spec, 0, 3) == (2,)

    def test_no_insertions(self):
        assert degree_range(AdmissibleClassSpec(Fraction(1)), 0, 3) == (-1,)

    def test_integrality_filter(self):
        spec = AdmissibleClassSpec(Fraction(2), (EvaluationInsertion("1", 3),))
        # 2(d+1) = 3 has no integer solution
        assert degree_range(spec, 0, 3) == ()
        spec2 = AdmissibleClassSpec(Fraction(2), (EvaluationInsertion("1", 4),))
        assert degree_range(spec2, 0, 3) == (1,)

    def test_scan_oracle(self):
        rng = random.Random(17)
        for _ in range(15):
            q = rng.choice([Fraction(1), Fraction(1, 2), Fraction(2), Fraction(3, 2)])
            evals = tuple(
                EvaluationInsertion(str(i + 1), rng.randint(-5, 5))
                for i in range(rng.randint(0, 3))
            )
            idx = tuple(
                IndexInsertion(rng.randint(-2, 2), rng.randint(0, 2))
                for _ in range(rng.randint(0, 2))
            )
            spec = AdmissibleClassSpec(q, evals, idx)
            supported = set()
            for d in range(-200, 201):
                exponent = q * (d + 1) - sum(e.weight for e in evals) - sum(
                    i.weight * i.power for i in idx
                )
                if exponent == 0:
                    supported.add(d)
            assert supported == set(degree_range(spec, 0, 3))


def test_character_json_roundtrip():
    c = char_add(X(2, (Fraction(1, 2), -1), 3), X(2, (0, 0), -2))
    assert character_from_json(character_to_json(c)) == c
    doc = character_to_json(c)
    assert doc["terms"][0]["exp"] == ["0/1", "0/1"]
