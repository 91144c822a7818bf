"""Scalar backends for ensemble arithmetic.

Two interchangeable representations of nonnegative quantities sit behind
one arithmetic contract:

* exact: ``fractions.Fraction`` -- arbitrary-precision, gcd-normalized,
  used whenever a strict inequality has to be decided with certainty;
* log-float: :class:`LogFloat` -- the natural logarithm of a positive
  quantity stored as a double, with a distinguished sentinel for zero,
  used for systems too large for rationals.

Every computation pipeline carries exactly one :class:`Mode`; mixing the
two backends inside one expression raises ``TypeError``.

No log-domain subtraction is provided anywhere: quantities that are
mathematically differences (reduced-system partition functions, for
instance) are recomputed from positive-term recursions upstream, so the
log backend never faces catastrophic cancellation.
"""

from __future__ import annotations

import enum
import math
from fractions import Fraction
from typing import Sequence, Union

import numpy as np

__all__ = [
    "Mode",
    "LogFloat",
    "Scalar",
    "LOG_ZERO",
    "log_sum_exp",
    "logsumexp_array",
    "exact_compare",
    "format_rational",
    "parse_rational",
    "scalar_to_json",
    "scalar_from_json",
]

LOG_ZERO = float("-inf")


class Mode(enum.Enum):
    """Which scalar backend a pipeline runs on."""

    EXACT = "exact"
    LOGFLOAT = "logfloat"

    @classmethod
    def parse(cls, text: str) -> "Mode":
        try:
            return cls(text.strip().lower())
        except ValueError:
            raise ValueError(f"unknown mode {text!r}; expected 'exact' or 'logfloat'") from None


class LogFloat:
    """A nonnegative quantity stored as its natural logarithm.

    ``log == -inf`` is the distinguished representation of exact zero;
    every operation branches on it explicitly instead of relying on IEEE
    infinity arithmetic, so no NaN can be produced.  Instances are
    immutable and ordered by value.
    """

    __slots__ = ("log",)

    def __init__(self, log: float):
        log = float(log)
        if math.isnan(log):
            raise ValueError("NaN is not a valid log-value")
        object.__setattr__(self, "log", log)

    def __setattr__(self, name, value):
        raise AttributeError("LogFloat is immutable")

    @classmethod
    def from_value(cls, value) -> "LogFloat":
        """Build from a linear-domain number (int, float or Fraction)."""
        if isinstance(value, Fraction):
            if value < 0:
                raise ValueError("negative quantity has no log-domain representation")
            if value == 0:
                return ZERO
            # big-integer-safe: math.log handles arbitrary-size ints
            return cls(math.log(value.numerator) - math.log(value.denominator))
        v = float(value)
        if v < 0:
            raise ValueError("negative quantity has no log-domain representation")
        if v == 0.0:
            return ZERO
        return cls(math.log(v))

    @classmethod
    def from_log(cls, log: float) -> "LogFloat":
        return cls(log)

    @property
    def is_zero(self) -> bool:
        return self.log == LOG_ZERO

    @property
    def value(self) -> float:
        """Linear-domain value; may overflow to inf for huge logs."""
        if self.is_zero:
            return 0.0
        try:
            return math.exp(self.log)
        except OverflowError:
            return float("inf")

    def __float__(self) -> float:
        return self.value

    def __mul__(self, other):
        if not isinstance(other, LogFloat):
            return NotImplemented
        if self.is_zero or other.is_zero:
            return ZERO
        return LogFloat(self.log + other.log)

    def __truediv__(self, other):
        if not isinstance(other, LogFloat):
            return NotImplemented
        if other.is_zero:
            raise ZeroDivisionError("division by log-domain zero")
        if self.is_zero:
            return ZERO
        return LogFloat(self.log - other.log)

    def __add__(self, other):
        if not isinstance(other, LogFloat):
            return NotImplemented
        if self.is_zero:
            return other
        if other.is_zero:
            return self
        hi, lo = (self.log, other.log) if self.log >= other.log else (other.log, self.log)
        return LogFloat(hi + math.log1p(math.exp(lo - hi)))

    def __pow__(self, exponent):
        if not isinstance(exponent, int):
            return NotImplemented
        if self.is_zero:
            return ONE if exponent == 0 else ZERO
        return LogFloat(self.log * exponent)

    def __eq__(self, other):
        if isinstance(other, LogFloat):
            return self.log == other.log
        return NotImplemented

    def __lt__(self, other):
        if isinstance(other, LogFloat):
            return self.log < other.log
        return NotImplemented

    def __le__(self, other):
        if isinstance(other, LogFloat):
            return self.log <= other.log
        return NotImplemented

    def __gt__(self, other):
        if isinstance(other, LogFloat):
            return self.log > other.log
        return NotImplemented

    def __ge__(self, other):
        if isinstance(other, LogFloat):
            return self.log >= other.log
        return NotImplemented

    def __hash__(self):
        return hash(("LogFloat", self.log))

    def __repr__(self):
        if self.is_zero:
            return "LogFloat(zero)"
        return f"LogFloat(log={self.log!r})"


ZERO = LogFloat(LOG_ZERO)
ONE = LogFloat(0.0)

#: A scalar in either backend.
Scalar = Union[Fraction, LogFloat]


def logsumexp_array(logs: np.ndarray) -> float:
    """Max-shifted ln(sum(exp(logs))) over a float array; -inf entries are zeros."""
    if logs.size == 0:
        raise ValueError("empty-sum: log_sum_exp of no terms is undefined")
    m = float(np.max(logs))
    if m == LOG_ZERO:
        return LOG_ZERO
    if logs.size == 1:
        return float(logs[0])
    return m + math.log(float(np.sum(np.exp(logs - m))))


def log_sum_exp(values: Sequence[LogFloat]) -> LogFloat:
    """ln(sum exp v_k) of log-domain values, computed by max shift.

    Exact for a one-element list.  Raises on the empty list: whether an
    empty sum means zero is the caller's decision.
    """
    if len(values) == 0:
        raise ValueError("empty-sum: log_sum_exp of no terms is undefined")
    for v in values:
        if not isinstance(v, LogFloat):
            raise TypeError(f"log_sum_exp expects LogFloat values, got {type(v).__name__}")
    if len(values) == 1:
        return values[0]
    return LogFloat(logsumexp_array(np.array([v.log for v in values], dtype=float)))


def exact_compare(a, b) -> int:
    """Tri-state ordering (-1, 0, +1) of two exact rationals.

    Decided by cross-multiplying big integers; never touches floats.
    Raises ``TypeError`` on a log-float operand or mixed backends.
    """
    if isinstance(a, LogFloat) or isinstance(b, LogFloat):
        raise TypeError("exact_compare requires the exact backend on both sides")
    a = a if isinstance(a, Fraction) else Fraction(a)
    b = b if isinstance(b, Fraction) else Fraction(b)
    lhs = a.numerator * b.denominator
    rhs = b.numerator * a.denominator
    if lhs < rhs:
        return -1
    if lhs > rhs:
        return 1
    return 0


def format_rational(x: Fraction) -> str:
    """Render as "p/q", or plain "p" for integers."""
    x = Fraction(x)
    if x.denominator == 1:
        return str(x.numerator)
    return f"{x.numerator}/{x.denominator}"


def parse_rational(text) -> Fraction:
    """Parse "p/q" or "p" (also accepts int); rejects floats and garbage."""
    if isinstance(text, int) and not isinstance(text, bool):
        return Fraction(text)
    if isinstance(text, Fraction):
        return text
    if not isinstance(text, str):
        raise ValueError(f"not a rational: {text!r}")
    try:
        return Fraction(text.strip())
    except (ValueError, ZeroDivisionError) as exc:
        raise ValueError(f"not a rational: {text!r}") from exc


def scalar_to_json(s: Scalar):
    """JSON form: rationals as "p/q" strings, log-floats as tagged objects."""
    if isinstance(s, LogFloat):
        return {"log": True, "value": None if s.is_zero else s.log}
    if isinstance(s, Fraction) or isinstance(s, int):
        return format_rational(Fraction(s))
    raise TypeError(f"not a scalar: {type(s).__name__}")


def scalar_from_json(obj, mode: Mode) -> Scalar:
    """Inverse of :func:`scalar_to_json`, coerced to the requested mode."""
    if isinstance(obj, dict):
        if obj.get("log") is not True or "value" not in obj:
            raise ValueError(f"malformed log-domain scalar: {obj!r}")
        if mode is not Mode.LOGFLOAT:
            raise ValueError("log-domain scalar in an exact-mode document")
        v = obj["value"]
        return ZERO if v is None else LogFloat(float(v))
    if isinstance(obj, (int, str)) and not isinstance(obj, bool):
        r = parse_rational(obj)
        return r if mode is Mode.EXACT else LogFloat.from_value(r)
    if isinstance(obj, float):
        if mode is Mode.EXACT:
            raise ValueError(f"float {obj!r} is not exact; supply a rational string")
        return LogFloat.from_value(obj)
    raise ValueError(f"not a scalar: {obj!r}")
