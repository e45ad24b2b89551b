"""Real vector polynomials with tagged coefficients.

Every coefficient carries an exact rational value (for irrational constants, a
dyadic approximation with ``PREC_BITS`` fractional bits) together with a tag
saying what is actually known about it.  Rationality questions are answered
from the tags alone; fractional parts along integer arguments are computed in
exact integer arithmetic on those values.
"""
from __future__ import annotations

import math
import re
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Iterable, Sequence

import mpmath
import numpy as np

PREC_BITS = 160
NEAR_INTEGER_TOL = 2.0 ** -40

RATIONAL = "rational"
IRRATIONAL = "irrational"
REAL = "real"


def _irrational_approx(factor: Fraction, atom: str) -> Fraction:
    """floor(factor * atom * 2**PREC_BITS) / 2**PREC_BITS."""
    scale = 1 << PREC_BITS
    if atom.startswith("sqrt"):
        k = int(atom[5:-1])
        p, q = abs(factor.numerator), factor.denominator
        mag = math.isqrt(k * p * p * scale * scale // (q * q))
        # k is not a perfect square, so the value is never an integer
        return Fraction(mag if factor > 0 else -mag - 1, scale)
    with mpmath.workprec(PREC_BITS + 64):
        v = mpmath.pi * mpmath.mpf(factor.numerator) / factor.denominator
        return Fraction(int(mpmath.floor(v * scale)), scale)


def _atom_value(atom: str) -> float:
    return math.pi if atom == "pi" else math.sqrt(int(atom[5:-1]))


@dataclass(frozen=True)
class Coefficient:
    """A real number with provenance.

    ``exact`` is the value used in all integer-path arithmetic.  For tag
    ``rational`` and ``real`` it is the number itself; for ``irrational``
    (``factor * atom + offset``) it is that value floored to 2**-PREC_BITS.
    """

    exact: Fraction
    tag: str = RATIONAL
    factor: Fraction | None = None
    atom: str | None = None
    offset: Fraction = Fraction(0)

    @classmethod
    def rational(cls, p: int | Fraction, q: int = 1) -> "Coefficient":
        return cls(Fraction(p) / q, RATIONAL)

    @classmethod
    def irrational(cls, atom: str, factor: Fraction | int = 1, offset: Fraction | int = 0) -> "Coefficient":
        factor, offset = Fraction(factor), Fraction(offset)
        if atom.startswith("sqrt"):
            k = int(atom[5:-1])
            r = math.isqrt(k)
            if r * r == k:
                return cls.rational(factor * r + offset)
        elif atom != "pi":
            raise ValueError(f"unknown irrational constant {atom!r}")
        if factor == 0:
            return cls.rational(offset)
        return cls(_irrational_approx(factor, atom) + offset, IRRATIONAL, factor, atom, offset)

    @classmethod
    def real(cls, value: float | str | Fraction) -> "Coefficient":
        return cls(Fraction(value), REAL)

    @property
    def value(self) -> float:
        if self.tag == IRRATIONAL:
            return float(self.factor) * _atom_value(self.atom) + float(self.offset)
        return float(self.exact)

    def __float__(self) -> float:
        return self.value

    def __neg__(self) -> "Coefficient":
        return self * -1

    def __add__(self, other) -> "Coefficient":
        other = as_coefficient(other)
        a, b = (self, other) if self.tag != RATIONAL else (other, self)
        if a.tag == RATIONAL:
            return Coefficient(a.exact + b.exact, RATIONAL)
        if a.tag == IRRATIONAL and b.tag == RATIONAL:
            return Coefficient.irrational(a.atom, a.factor, a.offset + b.exact)
        if a.tag == IRRATIONAL and b.tag == IRRATIONAL and a.atom == b.atom:
            return Coefficient.irrational(a.atom, a.factor + b.factor, a.offset + b.offset)
        return Coefficient(a.exact + b.exact, REAL)

    __radd__ = __add__

    def __sub__(self, other) -> "Coefficient":
        return self + (-as_coefficient(other))

    def __mul__(self, other) -> "Coefficient":
        other = as_coefficient(other)
        a, b = (self, other) if self.tag != RATIONAL else (other, self)
        if a.tag == RATIONAL:
            return Coefficient(a.exact * b.exact, RATIONAL)
        if a.tag == IRRATIONAL and b.tag == RATIONAL:
            return Coefficient.irrational(a.atom, a.factor * b.exact, a.offset * b.exact)
        return Coefficient(a.exact * b.exact, REAL)

    __rmul__ = __mul__

    def literal(self) -> str:
        """Canonical literal accepted by ``parse_coefficient``."""
        if self.tag == RATIONAL:
            return _rat_literal(self.exact)
        if self.tag == REAL:
            return _real_literal(self.exact)
        f, atom = self.factor, self.atom
        if f == 1:
            head = atom
        elif f == -1:
            head = "-" + atom
        elif f.denominator == 1:
            head = f"{f.numerator}*{atom}"
        elif f.numerator in (1, -1):
            head = f"{'-' if f < 0 else ''}{atom}/{f.denominator}"
        else:
            head = f"{f.numerator}*{atom}/{f.denominator}"
        if self.offset:
            sign = "-" if self.offset < 0 else "+"
            head += f" {sign} {_rat_literal(abs(self.offset))}"
        return head


def _rat_literal(x: Fraction) -> str:
    return str(x.numerator) if x.denominator == 1 else f"{x.numerator}/{x.denominator}"


def _real_literal(x: Fraction) -> str:
    # decimal fractions print as finite decimals; anything else as an exact
    # float repr (generic reals usually come from floats)
    q = x.denominator
    twos = fives = 0
    while q % 2 == 0:
        q //= 2
        twos += 1
    while q % 5 == 0:
        q //= 5
        fives += 1
    if q == 1:
        digits = max(twos, fives, 1)
        scaled = x * 10 ** digits
        sign = "-" if scaled < 0 else ""
        s = str(abs(scaled.numerator)).rjust(digits + 1, "0")
        return f"{sign}{s[:-digits]}.{s[-digits:]}"
    return repr(float(x))


def as_coefficient(x) -> Coefficient:
    if isinstance(x, Coefficient):
        return x
    if isinstance(x, str):
        return parse_coefficient(x)
    if isinstance(x, (int, np.integer)):
        return Coefficient.rational(int(x))
    if isinstance(x, Fraction):
        return Coefficient.rational(x)
    if isinstance(x, (float, np.floating)):
        return Coefficient.real(float(x))
    raise TypeError(f"cannot interpret {x!r} as a coefficient")


# ---------------------------------------------------------------------------
# literal parsing

_TOKEN = re.compile(
    r"\s*(?:(?P<dec>\d+\.\d*(?:[eE][+-]?\d+)?|\d+[eE][+-]?\d+|\.\d+(?:[eE][+-]?\d+)?)"
    r"|(?P<int>\d+)|(?P<name>sqrt|pi|x)|(?P<op>[-+*/^()]))"
)


class PolySyntaxError(ValueError):
    pass


def _tokenize(text: str) -> list[tuple[str, str]]:
    pos, out = 0, []
    text = text.strip()
    while pos < len(text):
        m = _TOKEN.match(text, pos)
        if not m or m.end() == pos:
            raise PolySyntaxError(f"unexpected character at {pos} in {text!r}")
        kind = m.lastgroup
        out.append((kind, m.group(kind)))
        pos = m.end()
        while pos < len(text) and text[pos].isspace():
            pos += 1
    return out


class _Term:
    """Product of factors: rational * (optional atom) * (optional decimal) * x^h."""

    def __init__(self):
        self.rat = Fraction(1)
        self.atom: str | None = None
        self.dec: Fraction | None = None
        self.power = 0

    def coefficient(self) -> Coefficient:
        if self.dec is not None:
            if self.atom is not None:
                raise PolySyntaxError("decimal and irrational constant in one term")
            return Coefficient.real(self.dec * self.rat)
        if self.atom is not None:
            return Coefficient.irrational(self.atom, self.rat)
        return Coefficient.rational(self.rat)


def _parse_terms(text: str, allow_x: bool) -> list[tuple[int, Coefficient]]:
    toks = _tokenize(text)
    if not toks:
        raise PolySyntaxError("empty expression")
    i = 0
    terms: list[tuple[int, Coefficient]] = []

    def peek():
        return toks[i] if i < len(toks) else (None, None)

    while i < len(toks):
        sign = 1
        while peek() in (("op", "+"), ("op", "-")):
            if peek()[1] == "-":
                sign = -sign
            i += 1
        term = _Term()
        term.rat = Fraction(sign)
        divide = False
        expect_factor = True
        while expect_factor:
            kind, tok = peek()
            i += 1
            if kind == "int":
                v = Fraction(int(tok))
                if divide:
                    if v == 0:
                        raise PolySyntaxError("division by zero")
                    term.rat /= v
                else:
                    term.rat *= v
            elif kind == "dec":
                if divide:
                    raise PolySyntaxError("division by a decimal is not supported")
                term.dec = Fraction(tok) if term.dec is None else term.dec * Fraction(tok)
            elif kind == "name" and tok == "pi":
                if term.atom is not None:
                    raise PolySyntaxError("at most one irrational constant per term")
                if divide:
                    raise PolySyntaxError("division by pi is not supported")
                term.atom = "pi"
            elif kind == "name" and tok == "sqrt":
                if toks[i : i + 3] and len(toks) >= i + 3 and toks[i] == ("op", "(") and toks[i + 1][0] == "int" and toks[i + 2] == ("op", ")"):
                    k = int(toks[i + 1][1])
                    i += 3
                else:
                    raise PolySyntaxError("sqrt takes a single integer argument")
                r = math.isqrt(k)
                if r * r == k:
                    term.rat = term.rat / r if divide else term.rat * r
                else:
                    if term.atom is not None:
                        raise PolySyntaxError("at most one irrational constant per term")
                    term.atom = f"sqrt({k})"
                    if divide:
                        # 1/sqrt(k) = sqrt(k)/k
                        term.rat /= k
            elif kind == "name" and tok == "x":
                if not allow_x:
                    raise PolySyntaxError("variable x not allowed in a coefficient")
                if divide:
                    raise PolySyntaxError("division by x")
                power = 1
                if peek() == ("op", "^"):
                    i += 1
                    kind2, tok2 = peek()
                    if kind2 != "int":
                        raise PolySyntaxError("exponent must be a nonnegative integer")
                    i += 1
                    power = int(tok2)
                term.power += power
            else:
                raise PolySyntaxError(f"unexpected token {tok!r}")
            nxt = peek()
            if nxt == ("op", "*"):
                divide = False
                i += 1
            elif nxt == ("op", "/"):
                divide = True
                i += 1
            else:
                expect_factor = False
        nxt = peek()
        if nxt[0] is not None and nxt not in (("op", "+"), ("op", "-")):
            raise PolySyntaxError(f"unexpected token {nxt[1]!r}")
        terms.append((term.power, term.coefficient()))
    return terms


def parse_coefficient(text: str) -> Coefficient:
    """Parse ``p/q`` (rational), ``sqrt(k)``/``pi`` times rationals (irrational)
    or a decimal literal (generic real)."""
    total = Coefficient.rational(0)
    for _, c in _parse_terms(text, allow_x=False):
        total = _checked_sum(total, c, text)
    return total


def _checked_sum(a: Coefficient, b: Coefficient, text: str) -> Coefficient:
    out = a + b
    if out.tag == REAL and IRRATIONAL in (a.tag, b.tag):
        raise PolySyntaxError(f"sum of distinct irrational constants in {text!r}")
    return out


# ---------------------------------------------------------------------------
# polynomials


@dataclass(frozen=True)
class Classification:
    kind: str  # "rational", "irrational" or "indeterminate"
    denominator: int | None = None


@dataclass(frozen=True)
class VectorPolynomial:
    """q: R -> R^ell; ``coeffs[j][h]`` multiplies x**h in coordinate j."""

    coeffs: tuple[tuple[Coefficient, ...], ...]
    _compiled: tuple = field(default=(), init=False, repr=False, compare=False)

    def __post_init__(self):
        coeffs = tuple(tuple(as_coefficient(c) for c in row) for row in self.coeffs)
        if not coeffs or not coeffs[0]:
            raise ValueError("polynomial needs at least one coordinate and one coefficient")
        if any(len(row) != len(coeffs[0]) for row in coeffs):
            raise ValueError("coefficient rows must have equal length")
        object.__setattr__(self, "coeffs", coeffs)
        compiled = []
        for row in coeffs:
            den = math.lcm(*(c.exact.denominator for c in row))
            compiled.append((tuple(int(c.exact * den) for c in row), den))
        object.__setattr__(self, "_compiled", tuple(compiled))

    @classmethod
    def from_rows(cls, rows: Iterable[Sequence], degree: int | None = None) -> "VectorPolynomial":
        rows = [list(r) for r in rows]
        d = max(len(r) for r in rows) - 1 if degree is None else degree
        rows = [r + [0] * (d + 1 - len(r)) for r in rows]
        return cls(tuple(tuple(r) for r in rows))

    @classmethod
    def parse(cls, coords: str | Sequence[str]) -> "VectorPolynomial":
        """Parse one literal per coordinate, e.g. ``["sqrt(2)*x^2 + 1/3*x", "pi"]``."""
        if isinstance(coords, str):
            coords = [coords]
        rows = []
        for text in coords:
            by_power: dict[int, Coefficient] = {}
            for power, c in _parse_terms(text, allow_x=True):
                by_power[power] = _checked_sum(by_power.get(power, Coefficient.rational(0)), c, text)
            d = max(by_power)
            rows.append([by_power.get(h, Coefficient.rational(0)) for h in range(d + 1)])
        return cls.from_rows(rows)

    @property
    def ell(self) -> int:
        return len(self.coeffs)

    @property
    def degree(self) -> int:
        return len(self.coeffs[0]) - 1

    def literal(self) -> list[str]:
        out = []
        for row in self.coeffs:
            parts = []
            for h, c in enumerate(row):
                if c.tag == RATIONAL and c.exact == 0:
                    continue
                pieces = [c] if c.tag != IRRATIONAL or not c.offset else [
                    Coefficient.irrational(c.atom, c.factor), Coefficient.rational(c.offset)]
                for piece in pieces:
                    lit = piece.literal()
                    parts.append(lit if h == 0 else f"{lit}*x" + (f"^{h}" if h > 1 else ""))
            out.append(" + ".join(parts) if parts else "0")
        return out

    def coordinate(self, j: int) -> "VectorPolynomial":
        return VectorPolynomial((self.coeffs[j],))

    def constant_column(self) -> tuple[Coefficient, ...]:
        return tuple(row[0] for row in self.coeffs)

    def map_rows(self, fn) -> "VectorPolynomial":
        return VectorPolynomial(tuple(tuple(fn(j, row)) for j, row in enumerate(self.coeffs)))

    def compose_affine(self, r: int, s: int) -> "VectorPolynomial":
        """The polynomial x -> q(r*x + s), exact on every tag."""
        d = self.degree
        rows = []
        for row in self.coeffs:
            new = [Coefficient.rational(0)] * (d + 1)
            for h, c in enumerate(row):
                for k in range(h + 1):
                    w = math.comb(h, k) * r**k * s ** (h - k)
                    if w:
                        new[k] = new[k] + c * w
            rows.append(new)
        return VectorPolynomial.from_rows(rows)

    # integer-path evaluation ----------------------------------------------

    def numerators(self, n) -> tuple[list, list[int]]:
        """Exact values at integer n as (numerator array, denominator) per coordinate.

        ``n`` is an int or an integer array; numerators are Python ints (object
        arrays for array input), so nothing overflows.
        """
        scalar = np.ndim(n) == 0
        nn = int(n) if scalar else np.asarray(n).astype(object)
        nums = []
        for ints, den in self._compiled:
            acc = ints[-1] if scalar else np.full(np.shape(nn), ints[-1], dtype=object)
            for c in reversed(ints[:-1]):
                acc = acc * nn + c
            nums.append(acc)
        return nums, [den for _, den in self._compiled]


def eval_poly(q: VectorPolynomial, t, with_flags: bool = False):
    """Double-precision Horner evaluation at real t (scalar or array).

    Returns an array of shape ``(..., ell)``.  With ``with_flags`` also
    returns a boolean mask of values within 2**-40 of an integer, where a
    subsequent floor may be unstable.
    """
    t = np.asarray(t, dtype=float)
    out = np.empty(t.shape + (q.ell,))
    for j, row in enumerate(q.coeffs):
        acc = np.full(t.shape, row[-1].value)
        for c in reversed(row[:-1]):
            acc = acc * t + c.value
        out[..., j] = acc
    if with_flags:
        return out, np.abs(out - np.round(out)) < NEAR_INTEGER_TOL
    return out


def eval_exact(q: VectorPolynomial, t) -> tuple[Fraction, ...]:
    """Exact evaluation at a rational t using the coefficients' exact values."""
    t = Fraction(t)
    out = []
    for row in q.coeffs:
        acc = Fraction(0)
        for c in reversed(row):
            acc = acc * t + c.exact
        out.append(acc)
    return tuple(out)


def _frac_float(rem, den: int):
    """rem/den as float for 0 <= rem < den, truncated below 1."""
    if np.ndim(rem) == 0:
        return ((int(rem) << 53) // den) / 2.0**53
    return ((rem << 53) // den).astype(np.float64) / 2.0**53


def floor_frac(q: VectorPolynomial, n):
    """Exact floor and fractional part of q(n) for integer n.

    Returns ``(floors, fracs)``; for array n both have shape ``(len(n), ell)``
    with floors as a Python-int object array.
    """
    nums, dens = q.numerators(n)
    if np.ndim(n) == 0:
        floors = tuple(int(p) // d for p, d in zip(nums, dens))
        fracs = np.array([_frac_float(int(p) % d, d) for p, d in zip(nums, dens)])
        return floors, fracs
    size = np.shape(n)
    floors = np.empty(size + (q.ell,), dtype=object)
    fracs = np.empty(size + (q.ell,))
    for j, (p, d) in enumerate(zip(nums, dens)):
        fl = p // d
        floors[..., j] = fl
        fracs[..., j] = _frac_float(p - fl * d, d)
    return floors, fracs


def bracket_exact(q: VectorPolynomial, n, kinds: Sequence[str]):
    """Bracketed value [q(n)] with per-coordinate kind, computed exactly."""
    nums, dens = q.numerators(n)
    out = []
    for p, d, kind in zip(nums, dens, kinds):
        if kind == "floor":
            out.append(p // d)
        elif kind == "ceil":
            out.append(-((-p) // d))
        elif kind == "nearest":
            out.append((2 * p + d) // (2 * d))
        else:
            raise ValueError(f"unknown bracket {kind!r}")
    if np.ndim(n) == 0:
        return tuple(int(v) for v in out)
    return np.stack(out, axis=-1)


# ---------------------------------------------------------------------------
# brackets and fractional parts on floats

BRACKETS = ("floor", "ceil", "nearest")


@dataclass(frozen=True)
class BracketMap:
    kinds: tuple[str, ...]

    def __post_init__(self):
        for k in self.kinds:
            if k not in BRACKETS:
                raise ValueError(f"unknown bracket {k!r}")

    @classmethod
    def uniform(cls, kind: str, ell: int) -> "BracketMap":
        return cls((kind,) * ell)


def bracket(x, b: BracketMap | str) -> np.ndarray:
    x = np.asarray(x, dtype=float)
    if not np.all(np.isfinite(x)):
        raise ValueError("non-finite input")
    kinds = b.kinds if isinstance(b, BracketMap) else (b,) * (x.shape[-1] if x.ndim else 1)
    if x.ndim == 0:
        x = x.reshape(1)
    out = np.empty(x.shape, dtype=np.int64)
    for j, kind in enumerate(kinds):
        col = x[..., j]
        if kind == "floor":
            out[..., j] = np.floor(col)
        elif kind == "ceil":
            out[..., j] = -np.floor(-col)
        else:
            out[..., j] = np.floor(col + 0.5)
    return out


def fractional(x) -> np.ndarray:
    """x - floor(x), guaranteed inside [0, 1)."""
    x = np.asarray(x, dtype=float)
    f = x - np.floor(x)
    # tiny negative inputs round to 1.0
    return np.where(f >= 1.0, 0.0, f)


def classify_rational(q: VectorPolynomial, j: int = 0) -> Classification:
    row = q.coeffs[j][1:]
    if any(c.tag == IRRATIONAL for c in row):
        return Classification("irrational")
    if any(c.tag == REAL and c.exact != 0 for c in row):
        return Classification("indeterminate")
    dens = [c.exact.denominator for c in row if c.tag == RATIONAL]
    return Classification("rational", math.lcm(1, *dens))


def in_upper_window(q: VectorPolynomial, n, delta) -> np.ndarray:
    """Exact test {q_j(n)} in [1 - delta, 1) per coordinate; delta is taken at
    its exact binary value.  Shape ``(..., ell)``."""
    d = Fraction(delta)
    nums, dens = q.numerators(n)
    cols = []
    for p, den in zip(nums, dens):
        rem = p % den
        cols.append(rem * d.denominator >= (d.denominator - d.numerator) * den)
    if np.ndim(n) == 0:
        return np.array([bool(c) for c in cols])
    return np.stack([np.asarray(c, dtype=bool) for c in cols], axis=-1)
