"""Signed log-scale reals.

Integrals of the log-normal weight against polynomial moments grow like
``exp((n + 1)**2 / (4 * k**2))`` and overflow float64 well inside the
parameter ranges this package verifies.  A :class:`LogScaled` value stores a
sign in ``{-1, 0, +1}`` together with ``ln(abs(value))``, which keeps every
quantity representable while preserving exact comparisons of relative error.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

__all__ = ["LogScaled"]


@dataclass(frozen=True)
class LogScaled:
    """A real number held as ``sign * exp(ln_abs)``.

    Parameters
    ----------
    sign : int
        One of ``-1``, ``0``, ``+1``.  A zero sign forces ``ln_abs`` to
        ``-inf`` so that zero has a single representation.
    ln_abs : float
        Natural log of the magnitude.  ``-inf`` if and only if the value
        is zero; ``+inf`` and NaN are rejected.
    """

    sign: int
    ln_abs: float

    def __post_init__(self) -> None:
        if self.sign not in (-1, 0, 1):
            raise ValueError(f"sign must be -1, 0, or +1, got {self.sign!r}")
        if math.isnan(self.ln_abs) or self.ln_abs == math.inf:
            raise ValueError(f"ln_abs must be finite or -inf, got {self.ln_abs!r}")
        if self.sign == 0 and self.ln_abs != -math.inf:
            raise ValueError("zero must carry ln_abs == -inf")
        if self.sign != 0 and self.ln_abs == -math.inf:
            object.__setattr__(self, "sign", 0)

    @classmethod
    def zero(cls) -> "LogScaled":
        return cls(0, -math.inf)

    @classmethod
    def from_float(cls, value: float) -> "LogScaled":
        if math.isnan(value) or math.isinf(value):
            raise ValueError(f"value must be finite, got {value!r}")
        if value == 0.0:
            return cls.zero()
        return cls(1 if value > 0 else -1, math.log(abs(value)))

    @classmethod
    def exp(cls, ln_value: float, sign: int = 1) -> "LogScaled":
        """Build ``sign * exp(ln_value)`` without evaluating the exponential."""
        if sign == 0:
            return cls.zero()
        return cls(sign, ln_value)

    def to_float(self) -> float:
        """Collapse to float64.  Overflows to ``inf`` past ``ln_abs ~ 709``."""
        if self.sign == 0:
            return 0.0
        try:
            return self.sign * math.exp(self.ln_abs)
        except OverflowError:
            return self.sign * math.inf

    def is_zero(self) -> bool:
        return self.sign == 0

    def abs(self) -> "LogScaled":
        return LogScaled(abs(self.sign), self.ln_abs)

    def __neg__(self) -> "LogScaled":
        return LogScaled(-self.sign, self.ln_abs)

    def __mul__(self, other: "LogScaled | float | int") -> "LogScaled":
        if isinstance(other, (int, float)):
            other = LogScaled.from_float(float(other))
        if not isinstance(other, LogScaled):
            return NotImplemented
        s = self.sign * other.sign
        if s == 0:
            return LogScaled.zero()
        return LogScaled(s, self.ln_abs + other.ln_abs)

    __rmul__ = __mul__

    def __truediv__(self, other: "LogScaled | float | int") -> "LogScaled":
        if isinstance(other, (int, float)):
            other = LogScaled.from_float(float(other))
        if not isinstance(other, LogScaled):
            return NotImplemented
        if other.sign == 0:
            raise ZeroDivisionError("division by LogScaled zero")
        if self.sign == 0:
            return LogScaled.zero()
        return LogScaled(self.sign * other.sign, self.ln_abs - other.ln_abs)

    def __add__(self, other: "LogScaled | float | int") -> "LogScaled":
        if isinstance(other, (int, float)):
            other = LogScaled.from_float(float(other))
        if not isinstance(other, LogScaled):
            return NotImplemented
        if self.sign == 0:
            return other
        if other.sign == 0:
            return self
        # Anchor on the larger magnitude; the correction is exp of a
        # nonpositive number, so log1p never sees an argument below -1.
        if self.ln_abs >= other.ln_abs:
            big, small = self, other
        else:
            big, small = other, self
        ratio = small.sign * big.sign * math.exp(small.ln_abs - big.ln_abs)
        if ratio == -1.0:
            return LogScaled.zero()
        return LogScaled(big.sign, big.ln_abs + math.log1p(ratio))

    __radd__ = __add__

    def __sub__(self, other: "LogScaled | float | int") -> "LogScaled":
        if isinstance(other, (int, float)):
            other = LogScaled.from_float(float(other))
        if not isinstance(other, LogScaled):
            return NotImplemented
        return self.__add__(-other)

    def ratio_to(self, other: "LogScaled") -> float:
        """``self / other`` as a float64; exact in the log domain first."""
        q = self.__truediv__(other)
        return q.to_float()

    def rel_deviation_from(self, other: "LogScaled") -> float:
        """``|self/other - 1|`` computed stably for nearby magnitudes."""
        if other.sign == 0:
            raise ZeroDivisionError("relative deviation from zero")
        if self.sign == 0:
            return 1.0
        if self.sign != other.sign:
            return 1.0 + math.exp(self.ln_abs - other.ln_abs)
        return abs(math.expm1(self.ln_abs - other.ln_abs))

    def __repr__(self) -> str:
        if self.sign == 0:
            return "LogScaled(0)"
        mantissa = "+" if self.sign > 0 else "-"
        return f"LogScaled({mantissa}exp({self.ln_abs:.17g}))"
