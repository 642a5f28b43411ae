"""Exact combinatorics of cyclic quotient singularities C^2/Gamma(p, q).

Everything here works with Python integers and :class:`fractions.Fraction`;
no floating point is involved.

A toric resolution is encoded by an *admissible sequence* of coprime pairs
``(m_j, n_j)``, ``j = 0 .. k+1``, with ``(m_0, n_0) = (0, -1)``,
``(m_1, n_1) = (1, 0)``, ``m_j > 0`` for ``j >= 1``, unit determinants
``m_j n_{j+1} - m_{j+1} n_j = 1`` and ``(m_{k+1}, n_{k+1}) = (p, q~)`` with
``q~ = q (mod p)``.  The exceptional curves ``S_1 .. S_k`` have
self-intersection ``-e_j`` where ``e_j = m_{j-1} n_{j+1} - m_{j+1} n_{j-1}``.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Iterable, Sequence

import numpy as np

from .errors import (
    InadmissibleSequence,
    IndexOutOfRange,
    InvalidQuotient,
    ZeroDenominator,
)

__all__ = [
    "QuotientData",
    "AdmissibleSequence",
    "Violation",
    "C1Class",
    "cf_expand",
    "cf_evaluate",
    "conjugate_q",
    "minimal_sequence",
    "validate_sequence",
    "blow_up",
    "blow_up_identity",
    "self_intersections",
    "intersection_matrix",
    "leading_minors",
    "is_negative_definite",
    "c1_class",
]


@dataclass(frozen=True)
class QuotientData:
    """The pair ``(p, q)`` with ``0 < q < p`` and ``gcd(p, q) = 1``."""

    p: int
    q: int

    def __post_init__(self):
        p, q = self.p, self.q
        if not (isinstance(p, int) and isinstance(q, int)):
            raise InvalidQuotient(f"p and q must be integers, got {p!r}, {q!r}")
        if (p, q) == (1, 0):
            return  # trivial group, only reachable through QuotientData.flat()
        if not 0 < q < p:
            raise InvalidQuotient(f"need 0 < q < p, got p={p}, q={q}")
        if math.gcd(p, q) != 1:
            raise InvalidQuotient(f"p={p} and q={q} are not coprime")

    @classmethod
    def flat(cls) -> "QuotientData":
        """The trivial group (p = 1); C^2 itself, no singularity to resolve."""
        return cls(1, 0)

    @property
    def is_flat(self) -> bool:
        return self.p == 1

    @property
    def ratio(self) -> Fraction:
        return Fraction(self.q, self.p)


@dataclass(frozen=True)
class Violation:
    clause: str
    index: int | None
    detail: str

    def __str__(self):
        where = "" if self.index is None else f" at j={self.index}"
        return f"{self.clause}{where}: {self.detail}"


@dataclass(frozen=True)
class AdmissibleSequence:
    """Admissible chain ``(m_j, n_j)`` for ``j = 0 .. k+1``.

    The closing pair ``(m_{k+2}, n_{k+2}) = (0, 1)`` is not stored; see
    :attr:`closed`.  ``n_{k+1}`` is kept unreduced (it may differ from ``q`` by
    a multiple of ``p`` after blow-ups at the ends); :attr:`q` reduces it.
    """

    pairs: tuple[tuple[int, int], ...]

    def __post_init__(self):
        pairs = tuple((int(m), int(n)) for m, n in self.pairs)
        object.__setattr__(self, "pairs", pairs)
        violations = _check_pairs(pairs)
        if violations:
            raise InadmissibleSequence(violations)

    @classmethod
    def _trusted(cls, pairs: tuple) -> "AdmissibleSequence":
        """Skip validation for chains admissible by construction."""
        obj = object.__new__(cls)
        object.__setattr__(obj, "pairs", pairs)
        return obj

    @property
    def k(self) -> int:
        return len(self.pairs) - 2

    @property
    def p(self) -> int:
        return self.pairs[-1][0]

    @property
    def q_tilde(self) -> int:
        return self.pairs[-1][1]

    @property
    def q(self) -> int:
        return self.q_tilde % self.p

    @property
    def quotient(self) -> QuotientData:
        return QuotientData(self.p, self.q)

    @property
    def closed(self) -> tuple[tuple[int, int], ...]:
        """Pairs ``j = 0 .. k+2`` including the closing pair (0, 1)."""
        return self.pairs + ((0, 1),)

    def __len__(self):
        return len(self.pairs)

    def __iter__(self):
        return iter(self.pairs)

    def __getitem__(self, j):
        return self.pairs[j]

    def to_json(self) -> list[list[int]]:
        return [[m, n] for m, n in self.pairs]


class C1Class(enum.Enum):
    NEGATIVE = "Negative"
    ZERO = "Zero"
    SEMI_NEGATIVE = "SemiNegative"

    def __str__(self):
        return self.value


def _as_data(data, q=None) -> QuotientData:
    if isinstance(data, QuotientData):
        return data
    if q is not None:
        return QuotientData(int(data), int(q))
    p, q = data
    return QuotientData(int(p), int(q))


def cf_expand(data, q=None) -> list[int]:
    """Hirzebruch-Jung (minus) continued fraction of ``q/p``.

    Runs the division algorithm with overestimated quotients,
    ``r_{j-1} = r_j e_{j+1} - r_{j+1}`` with ``0 <= r_{j+1} < r_j``.

    >>> cf_expand(QuotientData(8, 3))
    [3, 3]
    >>> cf_expand(7, 3)
    [3, 2, 2]
    """
    d = _as_data(data, q)
    if d.is_flat:
        return []
    r_prev, r = d.p, d.q
    es = []
    while r != 0:
        e = -(-r_prev // r)  # ceil
        r_prev, r = r, r * e - r_prev
        es.append(e)
    return es


def cf_evaluate(e: Sequence[int]) -> Fraction:
    """Evaluate ``1/(e_1 - 1/(e_2 - ... - 1/e_k))`` exactly."""
    if len(e) == 0:
        raise ZeroDenominator("empty continued fraction")
    # value = num/den, built from the innermost level outwards in integers
    num, den = 0, 1
    for j in range(len(e) - 1, -1, -1):
        d = int(e[j]) * den - num
        if d == 0:
            raise ZeroDenominator(f"partial denominator vanishes at position {j + 1}")
        num, den = den, d
    return Fraction(num, den)


def conjugate_q(data, q=None) -> int:
    """The inverse of ``q`` modulo ``p``, taken in ``(0, p)``."""
    d = _as_data(data, q)
    if d.is_flat:
        return 0
    return pow(d.q, -1, d.p) if d.p > 1 else 0


def _pairs_from_e(es: Iterable[int]) -> list[tuple[int, int]]:
    pairs = [(0, -1), (1, 0)]
    for e in es:
        (m0, n0), (m1, n1) = pairs[-2], pairs[-1]
        pairs.append((e * m1 - m0, e * n1 - n0))
    return pairs


def minimal_sequence(data, q=None) -> AdmissibleSequence:
    """Minimal admissible sequence (the Hirzebruch-Jung string).

    Built from the recurrence ``(m_{j+1}, n_{j+1}) = e_j (m_j, n_j) -
    (m_{j-1}, n_{j-1})``, whose partial convergents are ``n_{j+1}/m_{j+1}``.
    """
    d = _as_data(data, q)
    if d.is_flat:
        raise InvalidQuotient("p = 1 has no singularity; nothing to resolve")
    return AdmissibleSequence(tuple(_pairs_from_e(cf_expand(d))))


def _canonical_signs(pairs):
    out = []
    for j, (m, n) in enumerate(pairs):
        if j == 0:
            if m == 0 and n == 1:
                n = -1
        elif m < 0:
            m, n = -m, -n
        out.append((m, n))
    return out


def _check_pairs(pairs) -> list[Violation]:
    # fast path: unit determinants already force coprime pairs
    if (len(pairs) >= 3 and pairs[0] == (0, -1) and pairs[1] == (1, 0) and pairs[-1][0] >= 2
            and all(m > 0 for m, _ in pairs[1:])
            and all(a[0] * b[1] - b[0] * a[1] == 1 for a, b in zip(pairs, pairs[1:]))):
        return []
    v = []
    if len(pairs) < 3:
        v.append(Violation("endpoints", None,
                           f"need at least 3 pairs (0,-1),(1,0),...,(p,q~) with p >= 2; got {len(pairs)}"))
    if len(pairs) >= 1 and pairs[0] != (0, -1):
        v.append(Violation("endpoints", 0, f"(m_0,n_0) must be (0,-1), got {pairs[0]}"))
    if len(pairs) >= 2 and pairs[1] != (1, 0):
        v.append(Violation("endpoints", 1, f"(m_1,n_1) must be (1,0), got {pairs[1]}"))
    for j, (m, n) in enumerate(pairs):
        if math.gcd(m, n) != 1:
            v.append(Violation("coprime", j, f"gcd({m},{n}) != 1"))
        if j >= 1 and m <= 0:
            v.append(Violation("positivity", j, f"m_{j} = {m} is not positive"))
    for j in range(len(pairs) - 1):
        (m0, n0), (m1, n1) = pairs[j], pairs[j + 1]
        det = m0 * n1 - m1 * n0
        if det != 1:
            v.append(Violation("determinant", j, f"m_j n_(j+1) - m_(j+1) n_j = {det} != 1"))
    if len(pairs) >= 2 and pairs[-1][0] < 2:
        v.append(Violation("endpoints", len(pairs) - 1,
                           f"m_(k+1) = {pairs[-1][0]} does not match any p > 1"))
    return v


def validate_sequence(pairs) -> AdmissibleSequence | list[Violation]:
    """Check a raw pair list; return the typed sequence or every violation.

    Signs are canonicalized first (``(m, n)`` and ``(-m, -n)`` label the same
    circle subgroup), so only genuine violations are reported.
    """
    raw = [(int(m), int(n)) for m, n in pairs]
    canon = _canonical_signs(raw)
    violations = _check_pairs(canon)
    if violations:
        return violations
    return AdmissibleSequence(tuple(canon))


def self_intersections(seq: AdmissibleSequence) -> list[int]:
    """``e_j = m_{j-1} n_{j+1} - m_{j+1} n_{j-1}`` for ``j = 1 .. k``."""
    pr = seq.pairs
    return [a[0] * c[1] - c[0] * a[1] for a, c in zip(pr, pr[2:])]


def blow_up(seq: AdmissibleSequence, j: int) -> AdmissibleSequence:
    """Blow up the torus-fixed point between ``S_j`` and ``S_{j+1}``.

    Inserts ``(m_j + m_{j+1}, n_j + n_{j+1})``.  For ``j = 0`` the inserted
    pair lands at position 1, so the chain is re-normalized by the shear
    ``(m, n) -> (m, n + t m)`` that restores ``(m_1, n_1) = (1, 0)``; this is
    where ``q~`` moves by a multiple of ``p``.
    """
    if not 0 <= j <= seq.k:
        raise IndexOutOfRange(f"blow-up index {j} outside 0..{seq.k}")
    pr = list(seq.pairs)
    (m0, n0), (m1, n1) = pr[j], pr[j + 1]
    pr.insert(j + 1, (m0 + m1, n0 + n1))
    m, n = pr[1]
    if (m, n) != (1, 0):
        t = -n  # m == 1 here
        pr = [(a, b + t * a) for a, b in pr]
    # the inserted sum has unit determinant with both neighbours, so no re-check
    return AdmissibleSequence._trusted(tuple(pr))


def blow_up_identity(e: Sequence[int], j: int) -> list[int]:
    """Continued-fraction side of a blow-up at vertex ``j`` (``0 <= j <= k``).

    ``... a, b ...  ->  ... a+1, 1, b+1 ...``; at either end only the
    existing neighbour is incremented.
    """
    k = len(e)
    if not 0 <= j <= k:
        raise IndexOutOfRange(f"blow-up index {j} outside 0..{k}")
    out = list(e)
    if j < k:
        out[j] += 1
    if j >= 1:
        out[j - 1] += 1
    out.insert(j, 1)
    return out


def intersection_matrix(seq_or_e) -> np.ndarray:
    """Tridiagonal intersection matrix: ``-e_j`` on the diagonal, 1 beside it."""
    e = self_intersections(seq_or_e) if isinstance(seq_or_e, AdmissibleSequence) else list(seq_or_e)
    k = len(e)
    mat = np.zeros((k, k), dtype=np.int64)
    for i, ei in enumerate(e):
        mat[i, i] = -ei
        if i + 1 < k:
            mat[i, i + 1] = mat[i + 1, i] = 1
    return mat


def leading_minors(mat) -> list[int]:
    """Exact leading principal minors (fraction-free Bareiss elimination)."""
    a = [[int(x) for x in row] for row in np.asarray(mat).tolist()]
    n = len(a)
    minors = []
    prev = 1
    for k in range(n):
        if a[k][k] == 0:
            # minors beyond a zero pivot: fall back to exact Fractions
            return _minors_fraction(mat)
        minors.append(a[k][k])
        for i in range(k + 1, n):
            for jj in range(k + 1, n):
                a[i][jj] = (a[i][jj] * a[k][k] - a[i][k] * a[k][jj]) // prev
        prev = a[k][k]
    return minors


def _minors_fraction(mat) -> list[int]:
    m = np.asarray(mat).tolist()
    out = []
    for size in range(1, len(m) + 1):
        sub = [[Fraction(int(x)) for x in row[:size]] for row in m[:size]]
        det = Fraction(1)
        for c in range(size):
            piv = next((r for r in range(c, size) if sub[r][c] != 0), None)
            if piv is None:
                det = Fraction(0)
                break
            if piv != c:
                sub[c], sub[piv] = sub[piv], sub[c]
                det = -det
            det *= sub[c][c]
            for r in range(c + 1, size):
                f = sub[r][c] / sub[c][c]
                for cc in range(c, size):
                    sub[r][cc] -= f * sub[c][cc]
        out.append(int(det))
    return out


def is_negative_definite(mat) -> bool:
    minors = leading_minors(mat)
    return all((-1) ** (i + 1) * d > 0 for i, d in enumerate(minors))


def c1_class(seq_or_e) -> C1Class:
    e = self_intersections(seq_or_e) if isinstance(seq_or_e, AdmissibleSequence) else list(seq_or_e)
    if all(x >= 3 for x in e):
        return C1Class.NEGATIVE
    if all(x == 2 for x in e):
        return C1Class.ZERO
    return C1Class.SEMI_NEGATIVE
