"""Exact arithmetic over small finite fields, truncated polynomial rings and matrices.

Field elements are encoded as integers 0..q-1: the base-p digits of a code are
the coefficients (low degree first) of its polynomial representative modulo the
fixed irreducible polynomial of the extension. Ring elements of F_q[t] and
F_q[t]/(t^s) are fixed-length coefficient vectors of such codes.

Matrices carry a numpy array of shape (size, size, slots) holding the codes of
every coefficient of every entry. The batched kernels at the bottom operate on
stacks of these arrays and are what the group enumeration uses.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from functools import lru_cache
from typing import Iterable, Sequence, Union

import numpy as np

from .errors import (
    ConfigError,
    DegreeViolation,
    HdxError,
    IndexOutOfRange,
    NotUnitriangular,
    RingMismatch,
)

PRIMES = (2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31)

# Fixed irreducible moduli, coefficients low degree first, monic.
EXTENSION_MODULI = {
    4: (2, (1, 1, 1)),  # x^2 + x + 1 over F_2
    8: (2, (1, 1, 0, 1)),  # x^3 + x + 1 over F_2
    9: (3, (1, 0, 1)),  # x^2 + 1 over F_3
}

SUPPORTED_ORDERS = tuple(sorted(PRIMES + tuple(EXTENSION_MODULI)))


class DegreeOverflow(HdxError, ArithmeticError):
    """A full-ring product needed more coefficient slots than were allocated."""


# ---------------------------------------------------------------- fields


def _digits(code: int, p: int, m: int) -> list[int]:
    out = []
    for _ in range(m):
        out.append(code % p)
        code //= p
    return out


def _undigits(coeffs: Sequence[int], p: int) -> int:
    code = 0
    for c in reversed(coeffs):
        code = code * p + c
    return code


def _ext_mul(a: int, b: int, p: int, modulus: tuple[int, ...]) -> int:
    m = len(modulus) - 1
    x, y = _digits(a, p, m), _digits(b, p, m)
    prod = [0] * (2 * m - 1)
    for i, xi in enumerate(x):
        for j, yj in enumerate(y):
            prod[i + j] = (prod[i + j] + xi * yj) % p
    for deg in range(len(prod) - 1, m - 1, -1):
        c = prod[deg]
        if c:
            for k in range(m + 1):
                prod[deg - m + k] = (prod[deg - m + k] - c * modulus[k]) % p
    return _undigits(prod[:m], p)


class Field:
    """F_q with precomputed operation tables; obtain instances with `Field.of(q)`."""

    def __init__(self, q: int):
        if q in PRIMES:
            p, modulus = q, (0, 1)
        elif q in EXTENSION_MODULI:
            p, modulus = EXTENSION_MODULI[q]
        else:
            raise ConfigError(f"unsupported field order {q}; supported: {SUPPORTED_ORDERS}")
        self.q = q
        self.p = p
        self.m = len(modulus) - 1
        self.modulus = modulus
        idx = np.arange(q)
        if self.m == 1:
            self.add_table = (idx[:, None] + idx[None, :]) % p
            self.mul_table = (idx[:, None] * idx[None, :]) % p
            self.neg_table = (-idx) % p
        else:
            dig = np.array([_digits(c, p, self.m) for c in range(q)])
            weights = p ** np.arange(self.m)
            self.add_table = (((dig[:, None, :] + dig[None, :, :]) % p) * weights).sum(-1)
            self.neg_table = (((-dig) % p) * weights).sum(-1)
            self.mul_table = np.array(
                [[_ext_mul(a, b, p, modulus) for b in range(q)] for a in range(q)]
            )
        self.add_table = self.add_table.astype(np.uint8)
        self.mul_table = self.mul_table.astype(np.uint8)
        self.neg_table = self.neg_table.astype(np.uint8)
        inv = np.zeros(q, dtype=np.uint8)
        for a in range(1, q):
            (b,) = np.nonzero(self.mul_table[a] == 1)[0]
            inv[a] = b
        self.inv_table = inv
        for t in (self.add_table, self.mul_table, self.neg_table, self.inv_table):
            t.setflags(write=False)

    @staticmethod
    @lru_cache(maxsize=None)
    def of(q: int) -> "Field":
        return Field(q)

    @property
    def is_prime(self) -> bool:
        return self.m == 1

    def __reduce__(self):
        return (Field.of, (self.q,))

    def __repr__(self) -> str:
        return f"F_{self.q}"

    def add(self, a: int, b: int) -> int:
        return int(self.add_table[a, b])

    def mul(self, a: int, b: int) -> int:
        return int(self.mul_table[a, b])

    def neg(self, a: int) -> int:
        return int(self.neg_table[a])

    def inv(self, a: int) -> int:
        if a == 0:
            raise ZeroDivisionError("0 has no inverse")
        return int(self.inv_table[a])

    def elements(self) -> list["FieldElement"]:
        return [FieldElement(a, self) for a in range(self.q)]

    def code(self, n: int) -> int:
        """Interpret a plain int: 0..q-1 is a code, -c is the negative of code c."""
        if 0 <= n < self.q:
            return n
        if -self.q < n < 0:
            return int(self.neg_table[-n])
        raise ValueError(f"{n} is not a code of F_{self.q}")


@dataclass(frozen=True)
class FieldElement:
    value: int
    field: Field

    def __post_init__(self):
        if not 0 <= self.value < self.field.q:
            raise ValueError(f"{self.value} is not a code of {self.field}")

    def _coerce(self, other) -> int:
        if isinstance(other, FieldElement):
            if other.field is not self.field:
                raise RingMismatch(f"{self.field} vs {other.field}")
            return other.value
        if isinstance(other, int):
            return self.field.code(other)
        return NotImplemented

    def __add__(self, other):
        b = self._coerce(other)
        return FieldElement(self.field.add(self.value, b), self.field)

    __radd__ = __add__

    def __mul__(self, other):
        b = self._coerce(other)
        return FieldElement(self.field.mul(self.value, b), self.field)

    __rmul__ = __mul__

    def __neg__(self):
        return FieldElement(self.field.neg(self.value), self.field)

    def __sub__(self, other):
        b = self._coerce(other)
        return FieldElement(self.field.add(self.value, self.field.neg(b)), self.field)

    def inverse(self) -> "FieldElement":
        return FieldElement(self.field.inv(self.value), self.field)

    def is_zero(self) -> bool:
        return self.value == 0

    def __repr__(self) -> str:
        return f"{self.value}∈F_{self.field.q}"


# ---------------------------------------------------------------- rings

MODES = ("field", "quotient", "poly")


@dataclass(frozen=True)
class Ring:
    """Coefficient ring of matrix entries.

    mode "field": F_q itself (one slot). mode "quotient": F_q[t]/(t^slots).
    mode "poly": F_q[t] restricted to degree < slots; a product that would
    need more slots raises DegreeOverflow instead of truncating.
    degree_bound turns on the entry (i, j) has degree <= j - i check.
    """

    q: int
    slots: int = 1
    mode: str = "field"
    degree_bound: bool = False

    def __post_init__(self):
        Field.of(self.q)
        if self.mode not in MODES:
            raise ConfigError(f"unknown ring mode {self.mode!r}")
        if self.slots < 1 or (self.mode == "field" and self.slots != 1):
            raise ConfigError("bad slot count for ring mode")

    @property
    def field(self) -> Field:
        return Field.of(self.q)

    @classmethod
    def finite_field(cls, q: int) -> "Ring":
        return cls(q, 1, "field")

    @classmethod
    def truncated(cls, q: int, s: int) -> "Ring":
        return cls(q, s, "quotient")

    @classmethod
    def polynomial(cls, q: int, max_degree: int, degree_bound: bool = False) -> "Ring":
        return cls(q, max_degree + 1, "poly", degree_bound)

    def element(self, coeffs: Union[int, Sequence[int]]) -> Union[FieldElement, "PolyElement"]:
        """Build an element from an int code (field mode) or a coefficient list."""
        if self.mode == "field":
            if not isinstance(coeffs, int):
                (coeffs,) = coeffs
            return FieldElement(self.field.code(coeffs), self.field)
        if isinstance(coeffs, int):
            coeffs = [coeffs]
        coeffs = [self.field.code(c) for c in coeffs]
        if len(coeffs) > self.slots:
            extra = coeffs[self.slots:]
            if self.mode == "poly" and any(extra):
                raise DegreeOverflow(f"degree {len(coeffs) - 1} needs more than {self.slots} slots")
            coeffs = coeffs[: self.slots]
        coeffs += [0] * (self.slots - len(coeffs))
        return PolyElement(tuple(coeffs), self)

    def zero(self):
        return self.element(0)

    def one(self):
        return self.element(1)

    def t(self, k: int = 1, a: int = 1):
        """The monomial a * t^k."""
        if self.mode == "field":
            if k:
                raise ConfigError("no variable t in field mode")
            return self.element(a)
        return self.element([0] * k + [a])

    def all_elements(self) -> Iterable:
        """Every element representable in this ring (q^slots of them)."""
        q = self.q
        for code in range(q**self.slots):
            self_coeffs = [(code // q**i) % q for i in range(self.slots)]
            yield self.element(self_coeffs if self.mode != "field" else self_coeffs[0])

    def codes_of(self, r) -> np.ndarray:
        if isinstance(r, FieldElement):
            if self.mode != "field" and self.slots:
                out = np.zeros(self.slots, dtype=np.uint8)
                out[0] = r.value
                return out
            return np.array([r.value], dtype=np.uint8)
        if isinstance(r, PolyElement):
            if r.ring != self:
                raise RingMismatch(f"{r.ring} vs {self}")
            return np.array(r.coeffs, dtype=np.uint8)
        if isinstance(r, int):
            return self.codes_of(self.element(r))
        raise RingMismatch(f"cannot place {r!r} in {self}")

    def from_codes(self, codes) -> Union[FieldElement, "PolyElement"]:
        codes = [int(c) for c in codes]
        if self.mode == "field":
            return FieldElement(codes[0], self.field)
        return PolyElement(tuple(codes), self)


@dataclass(frozen=True)
class PolyElement:
    coeffs: tuple[int, ...]
    ring: Ring

    def __post_init__(self):
        if len(self.coeffs) != self.ring.slots:
            raise ValueError("coefficient vector length must equal ring slots")

    @property
    def degree(self) -> int:
        """Degree, with -1 for the zero element."""
        for k in range(len(self.coeffs) - 1, -1, -1):
            if self.coeffs[k]:
                return k
        return -1

    def _other(self, other) -> "PolyElement":
        if isinstance(other, PolyElement):
            if other.ring != self.ring:
                raise RingMismatch(f"{self.ring} vs {other.ring}")
            return other
        if isinstance(other, FieldElement):
            if other.field is not self.ring.field:
                raise RingMismatch("field mismatch")
            return self.ring.element(other.value)
        if isinstance(other, int):
            return self.ring.element(self.ring.field.code(other))
        return NotImplemented

    def __add__(self, other):
        o = self._other(other)
        f = self.ring.field
        return PolyElement(tuple(f.add(a, b) for a, b in zip(self.coeffs, o.coeffs)), self.ring)

    __radd__ = __add__

    def __neg__(self):
        f = self.ring.field
        return PolyElement(tuple(f.neg(a) for a in self.coeffs), self.ring)

    def __sub__(self, other):
        return self + (-self._other(other))

    def __mul__(self, other):
        o = self._other(other)
        f = self.ring.field
        s = self.ring.slots
        out = [0] * s
        for i, a in enumerate(self.coeffs):
            if not a:
                continue
            for j, b in enumerate(o.coeffs):
                if not b:
                    continue
                if i + j >= s:
                    if self.ring.mode == "poly":
                        raise DegreeOverflow(f"product degree {i + j} exceeds {s - 1}")
                    continue
                out[i + j] = f.add(out[i + j], f.mul(a, b))
        return PolyElement(tuple(out), self.ring)

    __rmul__ = __mul__

    def is_zero(self) -> bool:
        return not any(self.coeffs)

    def __repr__(self) -> str:
        terms = [f"{c}t^{k}" if k else f"{c}" for k, c in enumerate(self.coeffs) if c]
        return "+".join(terms) or "0"


RingElement = Union[FieldElement, PolyElement]


def full_product(x: Sequence[int], y: Sequence[int], q: int) -> list[int]:
    """Untruncated product of two coefficient vectors over F_q."""
    f = Field.of(q)
    out = [0] * (len(x) + len(y) - 1)
    for i, a in enumerate(x):
        for j, b in enumerate(y):
            out[i + j] = f.add(out[i + j], f.mul(a, b))
    return out


def truncate(coeffs: Sequence[int], s: int) -> list[int]:
    out = list(coeffs[:s])
    return out + [0] * (s - len(out))


def element_degree(r: RingElement) -> int:
    if isinstance(r, FieldElement):
        return -1 if r.value == 0 else 0
    return r.degree


# ---------------------------------------------------------------- matrices


@dataclass(frozen=True, eq=False)
class SquareMatrix:
    """Immutable square matrix over a Ring; codes has shape (size, size, slots)."""

    codes: np.ndarray
    ring: Ring
    _key: bytes = field(init=False, repr=False)

    def __post_init__(self):
        arr = np.array(self.codes, dtype=np.uint8, copy=True)
        if arr.ndim != 3 or arr.shape[0] != arr.shape[1] or arr.shape[2] != self.ring.slots:
            raise ValueError(f"bad code array shape {arr.shape}")
        arr.setflags(write=False)
        object.__setattr__(self, "codes", arr)
        object.__setattr__(self, "_key", arr.tobytes())

    @property
    def size(self) -> int:
        return self.codes.shape[0]

    def __eq__(self, other) -> bool:
        return (
            isinstance(other, SquareMatrix)
            and self.ring == other.ring
            and self.size == other.size
            and self._key == other._key
        )

    def __hash__(self) -> int:
        return hash((self.ring, self._key))

    def __mul__(self, other: "SquareMatrix") -> "SquareMatrix":
        return matrix_mul(self, other)

    def entry(self, i: int, j: int) -> RingElement:
        """Entry at 1-based position (i, j)."""
        return self.ring.from_codes(self.codes[i - 1, j - 1])

    def inverse(self) -> "SquareMatrix":
        return matrix_inverse(self)

    def is_identity(self) -> bool:
        return bool(np.array_equal(self.codes, identity_codes(self.size, self.ring)))

    def is_unitriangular(self) -> bool:
        n = self.size
        ident = identity_codes(n, self.ring)
        lower = np.tril_indices(n)
        return bool(np.array_equal(self.codes[lower], ident[lower]))

    def __repr__(self) -> str:
        rows = []
        for i in range(1, self.size + 1):
            rows.append("[" + ", ".join(repr(self.entry(i, j)) for j in range(1, self.size + 1)) + "]")
        return "SquareMatrix(" + ", ".join(rows) + ")"


def identity_codes(size: int, ring: Ring) -> np.ndarray:
    out = np.zeros((size, size, ring.slots), dtype=np.uint8)
    out[np.arange(size), np.arange(size), 0] = 1
    return out


def identity(size: int, ring: Ring) -> SquareMatrix:
    return SquareMatrix(identity_codes(size, ring), ring)


def elementary_matrix(size: int, i: int, j: int, r, ring: Ring | None = None) -> SquareMatrix:
    """e_{i,j}(r): the identity of the given size with r at 1-based (i, j)."""
    if ring is None:
        if isinstance(r, PolyElement):
            ring = r.ring
        elif isinstance(r, FieldElement):
            ring = Ring.finite_field(r.field.q)
        else:
            raise RingMismatch("a ring is required when r is a plain integer")
    if not (1 <= i <= size and 1 <= j <= size) or i == j:
        raise IndexOutOfRange(f"e_{{{i},{j}}} is not an off-diagonal position of a {size}x{size} matrix")
    codes = ring.codes_of(r)
    if ring.degree_bound:
        deg = max((k for k in range(len(codes)) if codes[k]), default=-1)
        if deg > j - i:
            raise DegreeViolation(f"entry ({i},{j}) allows degree <= {j - i}, got {deg}")
    arr = identity_codes(size, ring)
    arr[i - 1, j - 1, :] = codes
    return SquareMatrix(arr, ring)


def matrix_mul(a: SquareMatrix, b: SquareMatrix) -> SquareMatrix:
    if a.ring != b.ring or a.size != b.size:
        raise RingMismatch(f"cannot multiply {a.size}x{a.size} over {a.ring} by {b.size}x{b.size} over {b.ring}")
    out = batch_mul(a.ring, a.codes[None], b.codes[None])[0]
    return SquareMatrix(out, a.ring)


def matrix_inverse(m: SquareMatrix) -> SquareMatrix:
    """Inverse of I + U for nilpotent U, via the finite series sum of (-U)^k.

    Covers unitriangular matrices and single off-diagonal elementary matrices.
    """
    ring = m.ring
    n = m.size
    ident = identity_codes(n, ring)[None]
    u = batch_sub(ring, m.codes[None], ident)
    power = u
    for _ in range(n):
        power = batch_mul(ring, power, u)
    if power.any():
        raise NotUnitriangular("matrix is not identity plus a nilpotent part")
    neg_u = batch_neg(ring, u)
    total = ident.copy()
    term = ident
    for _ in range(n):
        term = batch_mul(ring, term, neg_u)
        total = batch_add(ring, total, term)
    return SquareMatrix(total[0], ring)


def commutator(g: SquareMatrix, h: SquareMatrix) -> SquareMatrix:
    """[g, h] = g^-1 h^-1 g h."""
    return matrix_inverse(g) * matrix_inverse(h) * g * h


# ---------------------------------------------------------------- batched kernels


def batch_add(ring: Ring, x: np.ndarray, y: np.ndarray) -> np.ndarray:
    f = ring.field
    if f.is_prime:
        return ((x.astype(np.int16) + y) % f.p).astype(np.uint8)
    return f.add_table[x, y]


def batch_neg(ring: Ring, x: np.ndarray) -> np.ndarray:
    f = ring.field
    if f.is_prime:
        return ((-x.astype(np.int16)) % f.p).astype(np.uint8)
    return f.neg_table[x]


def batch_sub(ring: Ring, x: np.ndarray, y: np.ndarray) -> np.ndarray:
    return batch_add(ring, x, batch_neg(ring, y))


def batch_mul(ring: Ring, x: np.ndarray, y: np.ndarray) -> np.ndarray:
    """Products of stacks of matrices; x and y broadcast over the leading axis.

    Shapes are (B, n, n, slots). Quotient mode drops degrees >= slots, poly
    mode raises DegreeOverflow when such a degree would be nonzero.
    """
    f = ring.field
    s = ring.slots
    n = x.shape[1]
    batch = max(x.shape[0], y.shape[0])
    if f.is_prime:
        xi = x.astype(np.int64)
        yi = y.astype(np.int64)
        acc = np.zeros((batch, n, n, s), dtype=np.int64)
        for a in range(s):
            xa = xi[..., a]
            if not xa.any():
                continue
            for c in range(s):
                yc = yi[..., c]
                if a + c >= s:
                    if ring.mode == "poly" and yc.any():
                        if (np.matmul(xa, yc) % f.p).any():
                            raise DegreeOverflow(f"product degree {a + c} exceeds {s - 1}")
                    continue
                acc[..., a + c] += np.matmul(xa, yc)
        return (acc % f.p).astype(np.uint8)
    acc = np.zeros((batch, n, n, s), dtype=np.uint8)
    for a in range(s):
        for c in range(s):
            for l in range(n):
                prod = f.mul_table[x[:, :, l, a][:, :, None], y[:, l, :, c][:, None, :]]
                if a + c >= s:
                    if ring.mode == "poly" and prod.any():
                        raise DegreeOverflow(f"product degree {a + c} exceeds {s - 1}")
                    continue
                acc[..., a + c] = f.add_table[acc[..., a + c], prod]
    return acc
