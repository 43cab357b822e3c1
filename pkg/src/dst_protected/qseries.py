"""q-Pochhammer quantities at q = 1/2.

    Q_m      = prod_{k=1..m} (1 - 2^-k)         exact, as a Fraction
    Q_inf    = prod_{k>=1}   (1 - 2^-k)         high precision
    Q(x)     = prod_{k>=1}   (1 - x 2^-k)       high precision, real x
    a_{m+1}  = (-1)^m 2^{-m(m+1)/2} / Q_m       Euler coefficients, Q(t) = sum a_{m+1} t^m

High-precision values are mpmath ``mpf`` numbers produced inside a private
``MPContext`` per call, so nothing here touches the global ``mpmath.mp``
state and every function can be called from several threads at once.
"""

from __future__ import annotations

from dataclasses import dataclass
from decimal import ROUND_HALF_EVEN, Decimal, localcontext
from fractions import Fraction
from functools import lru_cache

import mpmath
from mpmath import libmp


class PrecisionError(ArithmeticError):
    """Raised when a truncation cap is too small for the requested digits."""


@dataclass(frozen=True)
class PrecisionConfig:
    """Working-precision contract shared by all high-precision routines.

    Results are computed with ``digits + guard_digits`` decimal digits and are
    accurate to ``10**-digits`` absolutely; round once with :func:`fixed` for
    display.
    """

    digits: int = 30
    guard_digits: int = 15
    max_truncation_index: int = 20000

    def __post_init__(self):
        if self.digits < 1:
            raise ValueError(f"digits must be >= 1, got {self.digits}")
        if self.guard_digits < 0:
            raise ValueError(f"guard_digits must be >= 0, got {self.guard_digits}")
        if self.max_truncation_index < 1:
            raise ValueError("max_truncation_index must be >= 1")

    @property
    def working_digits(self) -> int:
        return self.digits + self.guard_digits

    def context(self) -> mpmath.MPContext:
        ctx = mpmath.MPContext()
        ctx.dps = self.working_digits
        return ctx

    def target(self, ctx: mpmath.MPContext):
        """Absolute error budget ``10**-(digits + guard_digits)`` in *ctx*."""
        return ctx.mpf(10) ** (-self.working_digits)


def to_mpf(value, ctx: mpmath.MPContext):
    """Convert int, Fraction, float, str or mpf into *ctx*.

    Fractions are rounded correctly (round-to-nearest at ``ctx.prec`` bits).
    """
    if isinstance(value, Fraction):
        raw = libmp.from_rational(value.numerator, value.denominator, ctx.prec, libmp.round_nearest)
        return ctx.make_mpf(raw)
    return ctx.mpf(value)


def fixed(value, digits: int) -> str:
    """Render *value* rounded half-even to *digits* places after the point."""
    if isinstance(value, Fraction):
        ctx = mpmath.MPContext()
        ctx.dps = digits + 20
        value = to_mpf(value, ctx)
    ctx = getattr(value, "context", mpmath.mp)
    text = ctx.nstr(value, max(ctx.dps, digits + 5), min_fixed=-mpmath.inf, max_fixed=mpmath.inf, strip_zeros=False)
    with localcontext() as dctx:
        dctx.prec = len(text) + digits + 10
        dec = Decimal(text).quantize(Decimal(1).scaleb(-digits), rounding=ROUND_HALF_EVEN)
    if dec.is_zero():
        dec = abs(dec)
    return f"{dec:f}"


@lru_cache(maxsize=None)
def q_partial(m: int) -> Fraction:
    """Q_m = prod_{k=1..m}(1 - 2^-k) as an exact fraction (Q_0 = 1).

    The numerator prod(2^k - 1) is odd, so the denominator is exactly
    2^{m(m+1)/2}.
    """
    if m < 0:
        raise ValueError(f"m must be non-negative, got {m}")
    numerator = 1
    for k in range(1, m + 1):
        numerator *= (1 << k) - 1
    return Fraction(numerator, 1 << (m * (m + 1) // 2))


def q_of_x(x, cfg: PrecisionConfig = PrecisionConfig()):
    """Q(x) = prod_{k>=1}(1 - x 2^-k) for real *x*, absolute error < 10^-digits.

    The product is truncated at the first M for which the tail satisfies
    |log prod_{k>M}| <= tau = |x| 2^-M / (1 - |x| 2^{-M-1}) and
    |Q_M| (e^tau - 1) < 10^-(digits+guard_digits).
    """
    ctx = cfg.context()
    x = to_mpf(x, ctx)
    if not ctx.isfinite(x):
        raise ValueError("x must be finite")
    eps = cfg.target(ctx)
    ax = abs(x)
    product = ctx.mpf(1)
    for k in range(1, cfg.max_truncation_index + 1):
        product *= 1 - ctx.ldexp(x, -k)
        if product == 0:
            return product
        scaled = ctx.ldexp(ax, -k - 1)
        if scaled >= ctx.mpf(0.5):
            continue
        tau = ctx.ldexp(ax, -k) / (1 - scaled)
        if abs(product) * ctx.expm1(tau) < eps:
            return product
    raise PrecisionError(
        f"Q({ctx.nstr(x, 10)}) needs more than {cfg.max_truncation_index} factors "
        f"for {cfg.digits} digits"
    )


def q_infinity(cfg: PrecisionConfig = PrecisionConfig()):
    """Q_inf = Q(1) = 0.28878809508660242127889972192923...."""
    return q_of_x(1, cfg)


def euler_coefficient(m: int) -> Fraction:
    """a_{m+1} = (-1)^m 2^{-m(m+1)/2} / Q_m, the coefficient of t^m in Q(t)."""
    if m < 0:
        raise ValueError(f"m must be non-negative, got {m}")
    sign = -1 if m % 2 else 1
    return sign * Fraction(1, 1 << (m * (m + 1) // 2)) / q_partial(m)


def verify_euler_identity(t, M: int, cfg: PrecisionConfig = PrecisionConfig()):
    """|Q(t) - sum_{m<M} a_{m+1} t^m| at working precision.

    A diagnostic only; for |t| <= 2 it decays roughly like 2^{-M^2/2}
    until it hits the working-precision floor.
    """
    if M < 1:
        raise ValueError(f"M must be >= 1, got {M}")
    ctx = cfg.context()
    t = to_mpf(t, ctx)
    lhs = q_of_x(t, cfg)
    rhs = ctx.fsum(to_mpf(euler_coefficient(m), ctx) * t**m for m in range(M))
    return abs(lhs - rhs)
