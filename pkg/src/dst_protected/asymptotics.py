"""Leading-order asymptotics of the 2-protected count in random DSTs.

    l_N = C N + N delta(log2 N) + O(1),   C = (1/Q_inf) sum_{m>=0} a_{m+1} b_m

with b_m the residue coefficients below. C = 0.30707981393605921828549...
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction

from . import exact_sequence
from .qseries import PrecisionConfig, PrecisionError, euler_coefficient, q_infinity, to_mpf

# b_m is monotone in m on this range; it is used only for a crude tail bound
_B_SCAN = 20


@dataclass(frozen=True)
class AsymptoticConstant:
    value: object
    truncation_index: int
    tail_bound: object


@dataclass(frozen=True)
class ResidualRow:
    N: int
    exact_ratio: object
    constant: object
    residual: object
    log2N_frac: float


def b_closed(x, cfg: PrecisionConfig = PrecisionConfig(), log_x=None):
    """B(x) / (4L (x-1)^3 (x-2)^2) for a real x != 1, 2.

    *log_x* overrides log(x); pass it when it is known exactly in terms of L.
    """
    ctx = cfg.context()
    L = ctx.ln2
    x = to_mpf(x, ctx)
    lx = ctx.log(x) if log_x is None else to_mpf(log_x, ctx)
    B = (
        16 * L * (1 - 3 * x + 3 * x**2 - x**3)
        - 20 + 60 * x - 69 * x**2 + 36 * x**3 - 7 * x**4
        + lx * (-8 * x + 12 * x**2 - 10 * x**3 + 4 * x**4)
    )
    return B / (4 * L * (x - 1) ** 3 * (x - 2) ** 2)


def b_coefficient(m: int, cfg: PrecisionConfig = PrecisionConfig()):
    """b_m at x = 2^-m with log x = -m log 2; b_0 is the limit 37/(12 log 2) - 4."""
    if m < 0:
        raise ValueError(f"m must be non-negative, got {m}")
    ctx = cfg.context()
    if m == 0:
        return ctx.mpf(37) / (12 * ctx.ln2) - 4
    return b_closed(ctx.ldexp(1, -m), cfg, log_x=-m * ctx.ln2)


def b_limit(cfg: PrecisionConfig = PrecisionConfig()):
    """lim_{m -> inf} b_m = (20 - 16 log 2) / (16 log 2)."""
    ctx = cfg.context()
    return (20 - 16 * ctx.ln2) / (16 * ctx.ln2)


def _b_bound(cfg):
    scan = [abs(b_coefficient(m, cfg)) for m in range(1, _B_SCAN + 1)]
    return 2 * max(max(scan), abs(b_limit(cfg)))


def protected_constant(cfg: PrecisionConfig = PrecisionConfig(), truncation_index: int | None = None):
    """C = (1/Q_inf) sum_{m=0}^{M} a_{m+1} b_m with a rigorous tail bound.

    With |a_{m+1}| <= 2^{-m(m+1)/2} / Q_inf and |b_m| <= b_max for m > M,
    the neglected tail is at most
    ``2 b_max 2^{-(M+1)(M+2)/2} / Q_inf^2``; M is the first index where that
    drops below 10^-(digits+guard_digits), unless *truncation_index* is given.
    """
    ctx = cfg.context()
    q_inf = q_infinity(cfg)
    b_max = _b_bound(cfg)

    def tail(M):
        return 2 * b_max * ctx.ldexp(1, -((M + 1) * (M + 2) // 2)) / q_inf**2

    if truncation_index is None:
        eps = cfg.target(ctx)
        M = 0
        while tail(M) >= eps:
            M += 1
            if M > cfg.max_truncation_index:
                raise PrecisionError(f"constant needs more than {cfg.max_truncation_index} terms")
    else:
        M = truncation_index
    total = ctx.fsum(to_mpf(euler_coefficient(m), ctx) * b_coefficient(m, cfg) for m in range(M + 1))
    return AsymptoticConstant(value=total / q_inf, truncation_index=M, tail_bound=tail(M))


def delta_fourier(x, l_max: int, m_range=range(1, 41), cfg: PrecisionConfig = PrecisionConfig()):
    """Truncated Fourier sum for the periodic term delta(x), as printed.

        (1/Q_inf) sum_{0<|l|<=l_max} sum_{m in m_range} a_{m+1}
            l pi 2^m / (2 L^2 (2^m-1)^2 (2^{m+1}-1))
            * [i L (7 - 15 2^m + 10 4^m) - 2 pi l (2^{m+1}-1)] e^{-2 pi i l x}

    The +l and -l terms are conjugates, so the real part is returned.

    Diagnostic grade only. The printed coefficients carry no decay in l
    (they grow like l^2), so the l-sum does not converge and truncated
    values are far above the observed oscillation amplitude (~4e-5).
    The m = 0 term divides by zero and is rejected.
    """
    m_range = range(m_range.start, m_range.stop) if isinstance(m_range, range) else sorted(m_range)
    if l_max < 0:
        raise ValueError(f"l_max must be >= 0, got {l_max}")
    if any(m < 0 or m > cfg.max_truncation_index for m in m_range):
        raise ValueError("m_range must lie within [0, max_truncation_index]")
    if 0 in m_range:
        raise ValueError("m = 0 term is singular: (2^0 - 1)^2 = 0 with a nonzero numerator")
    ctx = cfg.context()
    if l_max == 0 or len(m_range) == 0:
        return ctx.mpf(0)
    L = ctx.ln2
    pi = ctx.pi
    x = to_mpf(x, ctx)
    x -= ctx.floor(x)
    inner_re, inner_im = [], []
    for m in m_range:
        a = to_mpf(euler_coefficient(m), ctx)
        p = ctx.ldexp(1, m)
        scale = a * pi * p / (2 * L**2 * (p - 1) ** 2 * (2 * p - 1))
        inner_re.append((scale, (2 * p - 1)))
        inner_im.append(scale * L * (7 - 15 * p + 10 * p * p))
    total = ctx.mpc(0)
    for l in range(1, l_max + 1):
        for sign in (1, -1):
            ll = sign * l
            coeff = ctx.mpc(0)
            for (scale, two_p_minus_1), im in zip(inner_re, inner_im):
                coeff += ll * ctx.mpc(-2 * pi * ll * scale * two_p_minus_1, im)
            total += coeff * ctx.expjpi(-2 * ll * x)
    return ctx.re(total) / q_infinity(cfg)


def residual_table(N_list, cfg: PrecisionConfig = PrecisionConfig(), constant=None) -> list[ResidualRow]:
    """Rows (N, l_N/N, C, l_N/N - C, frac(log2 N)) with l_N exact."""
    N_list = list(N_list)
    if any(N < 1 for N in N_list):
        raise ValueError("residual_table needs N >= 1")
    ctx = cfg.context()
    C = protected_constant(cfg).value if constant is None else to_mpf(constant, ctx)
    exact = exact_sequence.l_values(N_list)
    rows = []
    for N in N_list:
        ratio = to_mpf(exact[N] / N, ctx)
        log2N = ctx.log(N, 2)
        rows.append(ResidualRow(N, ratio, C, ratio - C, float(log2N - ctx.floor(log2N))))
    return rows


def residual_envelope(rows, floor=Fraction(1, 10**4)) -> float:
    """Smallest A with |l_N/N - C| <= A/N + floor for every row."""
    floor = float(floor)
    return max((max(0.0, abs(float(r.residual)) - floor) * r.N for r in rows), default=0.0)
