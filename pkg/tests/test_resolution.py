from __future__ import annotations

import math
from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from hjsde.errors import IndexOutOfRange, InvalidQuotient, ZeroDenominator
from hjsde.resolution import (
    AdmissibleSequence,
    C1Class,
    QuotientData,
    Violation,
    blow_up,
    blow_up_identity,
    c1_class,
    cf_evaluate,
    cf_expand,
    conjugate_q,
    intersection_matrix,
    is_negative_definite,
    leading_minors,
    minimal_sequence,
    self_intersections,
    validate_sequence,
)


@st.composite
def coprime_pairs(draw, max_p=200):
    p = draw(st.integers(2, max_p))
    q = draw(st.integers(1, p - 1).filter(lambda q: math.gcd(p, q) == 1))
    return p, q


def test_cf_examples():
    assert cf_expand(8, 3) == [3, 3]
    assert cf_expand(4, 3) == [2, 2, 2]
    assert cf_expand(7, 3) == [3, 2, 2]
    assert cf_expand(5, 1) == [5]
    assert cf_evaluate([4, 1, 4]) == Fraction(3, 8)


def test_cf_evaluate_rejects_zero_denominator():
    with pytest.raises(ZeroDenominator):
        cf_evaluate([1, 1])
    with pytest.raises(ZeroDenominator):
        cf_evaluate([])


def test_quotient_validation():
    with pytest.raises(InvalidQuotient):
        QuotientData(8, 2)
    with pytest.raises(InvalidQuotient):
        QuotientData(0, 1)
    assert QuotientData.flat().is_flat


def test_conjugate():
    assert conjugate_q(7, 3) == 5
    assert conjugate_q(8, 3) == 3


def test_minimal_sequence_examples():
    seq = minimal_sequence(8, 3)
    assert seq.pairs == ((0, -1), (1, 0), (3, 1), (8, 3))
    assert (seq.p, seq.q) == (8, 3)
    assert self_intersections(seq) == [3, 3]
    with pytest.raises(InvalidQuotient):
        minimal_sequence(1, 0)


def test_blow_up_examples():
    seq = blow_up(minimal_sequence(8, 3), 1)
    assert seq.pairs == ((0, -1), (1, 0), (4, 1), (3, 1), (8, 3))
    assert self_intersections(seq) == [4, 1, 4]
    assert leading_minors(intersection_matrix(seq)) == [-4, 3, -8]
    end = blow_up(minimal_sequence(5, 1), 0)
    assert end.pairs == ((0, -1), (1, 0), (1, 1), (5, 6))
    assert self_intersections(end) == [1, 6]
    assert end.q_tilde == 6 and end.q == 1
    with pytest.raises(IndexOutOfRange):
        blow_up(minimal_sequence(8, 3), 3)


def test_validate_sequence_reports_violations():
    bad = validate_sequence([(0, -1), (1, 0), (3, 1), (7, 3)])
    assert isinstance(bad, list) and all(isinstance(v, Violation) for v in bad)
    assert any(v.index == 2 for v in bad)
    ok = validate_sequence([(0, 1), (1, 0), (3, 1), (8, 3)])
    assert isinstance(ok, AdmissibleSequence)
    assert ok.pairs[0] == (0, -1)
    assert isinstance(validate_sequence([(1, 0), (1, 0), (3, 1)]), list)


def test_c1_classes():
    assert c1_class(minimal_sequence(8, 3)) is C1Class.NEGATIVE
    assert c1_class(minimal_sequence(4, 3)) is C1Class.ZERO
    assert c1_class(minimal_sequence(7, 3)) is C1Class.SEMI_NEGATIVE
    assert str(C1Class.NEGATIVE) == "Negative"


def test_intersection_matrix_shape():
    m = intersection_matrix(minimal_sequence(7, 3))
    assert m.dtype == np.int64
    assert m.tolist() == [[-3, 1, 0], [1, -2, 1], [0, 1, -2]]
    assert is_negative_definite(m)


@given(coprime_pairs())
def test_cf_round_trip(pq):
    p, q = pq
    assert cf_evaluate(cf_expand(p, q)) == Fraction(q, p)


@given(coprime_pairs())
def test_reversal_gives_conjugate(pq):
    p, q = pq
    assert cf_evaluate(cf_expand(p, q)[::-1]) == Fraction(conjugate_q(p, q), p)


@given(coprime_pairs())
def test_minimal_sequence_admissible(pq):
    seq = minimal_sequence(*pq)
    assert isinstance(validate_sequence(seq.pairs), AdmissibleSequence)
    assert (seq.p, seq.q) == pq
    assert all(e >= 2 for e in self_intersections(seq))
    assert is_negative_definite(intersection_matrix(seq))


@given(coprime_pairs(), st.data())
def test_blow_up_identity(pq, data):
    seq = minimal_sequence(*pq)
    j = data.draw(st.integers(0, seq.k))
    blown = blow_up(seq, j)
    assert self_intersections(blown) == blow_up_identity(self_intersections(seq), j)
    assert blown.p == seq.p
    assert (blown.q - seq.q) % seq.p == 0
    assert isinstance(validate_sequence(blown.pairs), AdmissibleSequence)
    assert c1_class(blown) is C1Class.SEMI_NEGATIVE


@given(st.lists(st.integers(3, 9), min_size=1, max_size=6))
def test_all_e_at_least_three_is_negative(es):
    assert c1_class(es) is C1Class.NEGATIVE
    frac = cf_evaluate(es)
    assert cf_expand(frac.denominator, frac.numerator) == es
