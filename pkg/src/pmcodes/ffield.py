"""Prime-field arithmetic over F_q and the default field-size policy.

Elements are handled as plain ``int`` residues by the hot paths
(:class:`FieldCtx` methods); :class:`FieldElement` wraps a residue with
its context for callers that want operator syntax and mismatch checks.
"""

from __future__ import annotations

from dataclasses import dataclass

from .errors import DivisionByZero, FieldMismatch, NotPrime

# Deterministic Miller-Rabin witnesses, valid for every n < 3.3e24.
_MR_BASES = (2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37, 41)

BYTE_FLOOR = 257


def is_prime(n: int) -> bool:
    if n < 2:
        return False
    for p in _MR_BASES:
        if n % p == 0:
            return n == p
    d, s = n - 1, 0
    while d % 2 == 0:
        d //= 2
        s += 1
    for a in _MR_BASES:
        x = pow(a, d, n)
        if x in (1, n - 1):
            continue
        for _ in range(s - 1):
            x = x * x % n
            if x == n - 1:
                break
        else:
            return False
    return True


def smallest_valid_prime(lower_bound: int) -> int:
    """Return the smallest prime ``>= lower_bound``."""
    if lower_bound < 2:
        raise ValueError("lower_bound must be >= 2")
    p = lower_bound
    while not is_prime(p):
        p += 1
    return p


def default_field_size(kind: str, n: int) -> int:
    """Default q for a code kind: 2n for MBR, n^2 for MSR/MISER, never below 257."""
    kind = kind.upper()
    floor = 2 * n if kind == "MBR" else n * n
    return smallest_valid_prime(max(floor, BYTE_FLOOR))


@dataclass(frozen=True)
class FieldCtx:
    """The prime field F_q."""

    q: int

    def __post_init__(self):
        if not isinstance(self.q, int) or self.q < 2 or not is_prime(self.q):
            raise NotPrime(f"q={self.q!r} is not a prime >= 2")

    def __call__(self, value: int) -> FieldElement:
        return FieldElement(self, value % self.q)

    def add(self, a: int, b: int) -> int:
        return (a + b) % self.q

    def sub(self, a: int, b: int) -> int:
        return (a - b) % self.q

    def neg(self, a: int) -> int:
        return -a % self.q

    def mul(self, a: int, b: int) -> int:
        return a * b % self.q

    def inv(self, a: int) -> int:
        a %= self.q
        if a == 0:
            raise DivisionByZero(f"0 has no inverse in F_{self.q}")
        return pow(a, self.q - 2, self.q)

    def div(self, a: int, b: int) -> int:
        return a * self.inv(b) % self.q

    def pow(self, a: int, e: int) -> int:
        if e < 0:
            raise ValueError("negative exponent")
        # Python's pow gives 0**0 == 1, the convention Vandermonde rows need.
        return pow(a % self.q, e, self.q)

    def dot(self, xs, ys) -> int:
        return sum(x * y for x, y in zip(xs, ys)) % self.q

    def elements(self) -> range:
        return range(self.q)


def field_new(q: int) -> FieldCtx:
    return FieldCtx(q)


@dataclass(frozen=True)
class FieldElement:
    ctx: FieldCtx
    value: int

    def __post_init__(self):
        if not 0 <= self.value < self.ctx.q:
            raise ValueError(f"{self.value} is not a residue mod {self.ctx.q}")

    def _other(self, other) -> int:
        if isinstance(other, FieldElement):
            if other.ctx != self.ctx:
                raise FieldMismatch(f"F_{self.ctx.q} vs F_{other.ctx.q}")
            return other.value
        if isinstance(other, int):
            return other % self.ctx.q
        return NotImplemented

    def __add__(self, other):
        b = self._other(other)
        if b is NotImplemented:
            return b
        return FieldElement(self.ctx, self.ctx.add(self.value, b))

    __radd__ = __add__

    def __sub__(self, other):
        b = self._other(other)
        if b is NotImplemented:
            return b
        return FieldElement(self.ctx, self.ctx.sub(self.value, b))

    def __rsub__(self, other):
        b = self._other(other)
        if b is NotImplemented:
            return b
        return FieldElement(self.ctx, self.ctx.sub(b, self.value))

    def __mul__(self, other):
        b = self._other(other)
        if b is NotImplemented:
            return b
        return FieldElement(self.ctx, self.ctx.mul(self.value, b))

    __rmul__ = __mul__

    def __truediv__(self, other):
        b = self._other(other)
        if b is NotImplemented:
            return b
        return FieldElement(self.ctx, self.ctx.div(self.value, b))

    def __neg__(self):
        return FieldElement(self.ctx, self.ctx.neg(self.value))

    def __pow__(self, e: int):
        return FieldElement(self.ctx, self.ctx.pow(self.value, e))

    def inverse(self) -> FieldElement:
        return FieldElement(self.ctx, self.ctx.inv(self.value))

    def __int__(self) -> int:
        return self.value

    def __repr__(self) -> str:
        return f"{self.value} (mod {self.ctx.q})"


def arith(a: FieldElement, b: FieldElement, op: str) -> FieldElement:
    if a.ctx != b.ctx:
        raise FieldMismatch(f"F_{a.ctx.q} vs F_{b.ctx.q}")
    if op == "add":
        return a + b
    if op == "sub":
        return a - b
    if op == "mul":
        return a * b
    if op == "div":
        return a / b
    raise ValueError(f"unknown op {op!r}")


def inv(a: FieldElement) -> FieldElement:
    return a.inverse()


def power(a: FieldElement, e: int) -> FieldElement:
    return a ** e
