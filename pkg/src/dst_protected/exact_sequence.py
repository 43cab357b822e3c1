"""Exact expected number of 2-protected nodes in random digital search trees.

Three routes to l_N, which must agree as rationals:

* :func:`l_sequence_recursion`: the split recursion
  ``l_{n+1} = 1 + 2^{1-n} sum_k C(n,k) l_k - n 2^{1-n}`` for n >= 3,
  seeded with l_0 = l_1 = l_2 = 0, l_3 = 1/2;
* :func:`l_from_m` applied to :func:`m_sequence_recursion`: the Poissonised
  coefficients m_n followed by ``l_N = sum_{k>=2} C(N,k) m_k``;
* :func:`l_closed_form`: the explicit double sum
  ``l_N = sum_{k=2}^N C(N,k) (-1)^k Q_{k-2} sum_{n=1}^{k-2} c_n / Q_n``
  with ``c_n = 1 - (n+1) 2^-n - n(n+1)/4``.

Cost: the recursion does O(N^2) big-integer operations on numbers of about
N^2/2 bits (N = 500 takes seconds, N = 2000 tens of minutes). The m route
is O(N) per value and is what the asymptotic code uses for large N.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass
from fractions import Fraction
from math import comb

from . import _dyadic
from .qseries import q_partial


class SequenceKind(enum.Enum):
    L_SEQUENCE = "l"
    M_SEQUENCE = "m"


class Method(enum.Enum):
    RECURSION = "recursion"
    CLOSED_FORM = "closed-form"
    BINOMIAL_TRANSFORM = "binomial-transform"


@dataclass(frozen=True)
class SequenceTable:
    """Exact values ``values[0..N]`` of l_n or m_n and how they were obtained."""

    kind: SequenceKind
    values: tuple[Fraction, ...]
    method: Method

    def __post_init__(self):
        v = self.values
        if self.kind is SequenceKind.L_SEQUENCE:
            if any(x != 0 for x in v[:3]) or (len(v) > 3 and v[3] != Fraction(1, 2)):
                raise ValueError("l-table must start 0, 0, 0, 1/2")
        elif any(x != 0 for x in v[:2]):
            raise ValueError("m-table must start 0, 0")

    def __len__(self):
        return len(self.values)

    def __getitem__(self, n):
        return self.values[n]

    @property
    def N(self) -> int:
        return len(self.values) - 1


def binomial(n: int, k: int) -> int:
    """C(n, k), zero outside 0 <= k <= n."""
    if n < 0:
        raise ValueError(f"n must be non-negative, got {n}")
    if k < 0 or k > n:
        return 0
    return comb(n, k)


def _check_N(N: int) -> None:
    if N < 0:
        raise ValueError(f"N must be non-negative, got {N}")


def l_sequence_recursion(N: int) -> SequenceTable:
    """l_0..l_N from the split recursion, in exact arithmetic."""
    _check_N(N)
    pairs = [(0, 0), (0, 0), (0, 0), (1, 1)]
    for n in range(3, N):
        nums, top = _dyadic.align(pairs)
        total = sum(comb(n, k) * nums[k] for k in range(n + 1))
        # 1 + total/2^{top+n-1} - n/2^{n-1}
        exponent = top + n - 1
        pairs.append(_dyadic.reduce((1 << exponent) + total - (n << top), exponent))
    values = tuple(_dyadic.to_fraction(*p) for p in pairs[: N + 1])
    return SequenceTable(SequenceKind.L_SEQUENCE, values, Method.RECURSION)


def _m_pairs(N: int) -> list[tuple[int, int]]:
    pairs = [(0, 0), (0, 0)]
    for n in range(1, N):
        a, e = pairs[n]
        # -(1 - 2^{1-n}) m_n
        decay = (-((a << (n - 1)) - a), e + n - 1)
        # (-1)^n (n 2^{1-n} - 1 + n(n-1)/4), over 2^{n+1}
        forcing = 4 * n - (1 << (n + 1)) + n * (n - 1) * (1 << (n - 1))
        if n % 2:
            forcing = -forcing
        nums, top = _dyadic.align([decay, (forcing, n + 1)])
        pairs.append(_dyadic.reduce(nums[0] + nums[1], top))
    return pairs[: N + 1]


def m_sequence_recursion(N: int) -> SequenceTable:
    """m_0..m_N, the coefficients of the Poisson transform e^{-z} L(z).

    m_0 = m_1 = 0 and, for n >= 1,
    ``m_{n+1} = -(1 - 2^{1-n}) m_n + (-1)^n (n 2^{1-n} - 1 + n(n-1)/4)``.
    """
    _check_N(N)
    values = tuple(_dyadic.to_fraction(*p) for p in _m_pairs(N))
    return SequenceTable(SequenceKind.M_SEQUENCE, values, Method.RECURSION)


def _forcing(n: int) -> Fraction:
    return 1 - Fraction(n + 1, 1 << n) - Fraction(n * (n + 1), 4)


def _closed_form_terms(K: int):
    """Yield Q_{k-2} * sum_{n=1}^{k-2} c_n / Q_n for k = 2..K."""
    inner = Fraction(0)
    for k in range(2, K + 1):
        j = k - 2
        if j >= 1:
            inner += _forcing(j) / q_partial(j)
        yield q_partial(j) * inner


def m_closed_form(N: int) -> Fraction:
    """m_N = (-1)^N Q_{N-2} sum_{n=1}^{N-2} c_n / Q_n, for N >= 2."""
    if N < 2:
        raise ValueError(f"closed form for m_N needs N >= 2, got {N}")
    for term in _closed_form_terms(N):
        pass
    return term if N % 2 == 0 else -term


def l_from_m(m_table: SequenceTable, N: int) -> Fraction:
    """l_N = sum_{k=2}^N C(N,k) m_k from a table of m values."""
    _check_N(N)
    if m_table.kind is not SequenceKind.M_SEQUENCE:
        raise ValueError("l_from_m needs an m-table")
    if len(m_table) <= N:
        raise ValueError(f"m-table covers indices up to {m_table.N}, need {N}")
    terms = m_table.values[2 : N + 1]
    if all(_dyadic.is_dyadic(v) for v in terms):
        nums, top = _dyadic.align(_dyadic.from_fraction(v) for v in terms)
        return _dyadic.to_fraction(sum(comb(N, k + 2) * a for k, a in enumerate(nums)), top)
    return sum((comb(N, k) * m_table[k] for k in range(2, N + 1)), Fraction(0))


def l_closed_form(N: int) -> Fraction:
    """l_N from the explicit double sum, all in exact rationals.

    The alternating terms reach 2^N in size and cancel down to O(N), so
    nothing here may be done in floating point.
    """
    if N < 1:
        raise ValueError(f"closed form for l_N needs N >= 1, got {N}")
    pairs = [_dyadic.from_fraction(term) for term in _closed_form_terms(N)]
    nums, top = _dyadic.align(pairs)
    total = 0
    for k, a in enumerate(nums, start=2):
        total += comb(N, k) * a if k % 2 == 0 else -comb(N, k) * a
    return _dyadic.to_fraction(total, top)


def _binomial_transform_all(pairs: list[tuple[int, int]]) -> list[Fraction]:
    # b_n = sum_k C(n,k) a_k via repeated neighbour sums: O(N^2) additions, no products
    row, top = _dyadic.align(pairs)
    out = [_dyadic.to_fraction(row[0], top)] if row else []
    for n in range(1, len(row)):
        for j in range(len(row) - n):
            row[j] += row[j + 1]
        out.append(_dyadic.to_fraction(row[0], top))
    return out


def l_closed_form_table(N: int) -> SequenceTable:
    """l_0..l_N from the double-sum formula, sharing the inner sums across n."""
    _check_N(N)
    pairs = [(0, 0), (0, 0)]
    for k, term in enumerate(_closed_form_terms(N), start=2):
        a, e = _dyadic.from_fraction(term)
        pairs.append((a if k % 2 == 0 else -a, e))
    values = _binomial_transform_all(pairs[: N + 1])
    return SequenceTable(SequenceKind.L_SEQUENCE, tuple(values), Method.CLOSED_FORM)


def l_table_from_m(m_table: SequenceTable) -> SequenceTable:
    """The whole l-table as the binomial transform of an m-table."""
    pairs = [_dyadic.from_fraction(v) for v in m_table.values]
    values = _binomial_transform_all(pairs)
    return SequenceTable(SequenceKind.L_SEQUENCE, tuple(values), Method.BINOMIAL_TRANSFORM)


def l_values(Ns) -> dict[int, Fraction]:
    """Exact l_N for each N in *Ns* through the m route (one shared m-table)."""
    Ns = sorted(set(Ns))
    if not Ns:
        return {}
    table = m_sequence_recursion(Ns[-1])
    return {N: l_from_m(table, N) for N in Ns}


def expected_leaves(N: int) -> tuple[Fraction, ...]:
    """Exact expected leaf counts e_0..e_N under the random split model.

    e_0 = 0, e_1 = 1 and ``e_{n+1} = 2^{1-n} sum_k C(n,k) e_k`` for n >= 1.
    """
    _check_N(N)
    pairs = [(0, 0), (1, 0)]
    for n in range(1, N):
        nums, top = _dyadic.align(pairs)
        total = sum(comb(n, k) * nums[k] for k in range(n + 1))
        pairs.append(_dyadic.reduce(total, top + n - 1))
    return tuple(_dyadic.to_fraction(*p) for p in pairs[: N + 1])
