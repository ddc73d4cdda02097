"""Exact coefficient fields: the rationals and small prime fields.

Elements are ``gmpy2.mpq`` over Q and ``int`` in ``range(p)`` over GF(p).
The active field is held in a context
variable so that a whole computation runs over one field.
"""
from __future__ import annotations

import contextlib
import contextvars
from fractions import Fraction

from gmpy2 import mpq

MAX_PRIME = 1 << 16


class FieldError(ValueError):
    pass


def _is_prime(n: int) -> bool:
    if n < 2:
        return False
    i = 2
    while i * i <= n:
        if n % i == 0:
            return False
        i += 1
    return True


class Field:
    """Q when ``p`` is None, otherwise GF(p)."""

    __slots__ = ("p",)

    def __init__(self, p: int | None = None):
        if p is not None:
            if not isinstance(p, int) or not _is_prime(p):
                raise FieldError(f"{p!r} is not a prime")
            if p >= MAX_PRIME:
                raise FieldError(f"prime {p} too large (limit {MAX_PRIME})")
        self.p = p

    @property
    def is_rational(self) -> bool:
        return self.p is None

    @property
    def name(self) -> str:
        return "Q" if self.p is None else f"GF({self.p})"

    @property
    def zero(self):
        return mpq(0) if self.p is None else 0

    @property
    def one(self):
        return mpq(1) if self.p is None else 1

    def __call__(self, x):
        """Coerce an int, Fraction or string such as ``"3/2"``."""
        if isinstance(x, str):
            x = mpq(x.strip())
        elif isinstance(x, Fraction):
            x = mpq(x.numerator, x.denominator)
        if self.p is None:
            return mpq(x)
        if isinstance(x, type(mpq())):
            if x.denominator % self.p == 0:
                raise FieldError(f"{x} has no image in {self.name}")
            return int(x.numerator) * pow(int(x.denominator), -1, self.p) % self.p
        return int(x) % self.p

    def norm(self, x):
        return x if self.p is None else x % self.p

    def inv(self, a):
        if not a:
            raise ZeroDivisionError("inverse of zero")
        if self.p is None:
            return 1 / a
        return pow(a, -1, self.p)

    def fmt(self, a) -> str:
        if self.p is None:
            return str(a)
        # print the balanced representative, it reads better for signs
        return str(a - self.p if a > self.p // 2 else a)

    def __eq__(self, other):
        return isinstance(other, Field) and other.p == self.p

    def __hash__(self):
        return hash(("Field", self.p))

    def __repr__(self):
        return self.name

    def spec(self) -> str:
        return "q" if self.p is None else f"fp:{self.p}"


QQ = Field()


def GF(p: int) -> Field:
    return Field(p)


def parse_field(text: str) -> Field:
    """Parse ``q`` or ``fp:<p>``."""
    t = text.strip().lower()
    if t in ("q", "qq", "rational"):
        return QQ
    if t.startswith("fp:"):
        try:
            p = int(t[3:])
        except ValueError:
            raise FieldError(f"bad field {text!r}") from None
        return Field(p)
    raise FieldError(f"bad field {text!r}; expected 'q' or 'fp:<p>'")


_active: contextvars.ContextVar[Field] = contextvars.ContextVar("field", default=QQ)


def active_field() -> Field:
    return _active.get()


@contextlib.contextmanager
def use_field(field: Field):
    token = _active.set(field)
    try:
        yield field
    finally:
        _active.reset(token)
