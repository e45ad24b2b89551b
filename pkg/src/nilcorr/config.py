"""Experiment configuration: a small block language with a strict schema.

::

    # comments run to end of line
    system.torus T { dim = 1; rank = 1; angles = [[sqrt(2)/2]] }
    obs.char f0 { freq = [1], amp = 1 }
    obs.char f1 { freq = [-1] }
    poly q { coords = ["sqrt(2)*x"] }
    correlation C { system = T, functions = [f0, f1], polys = [q] }
    experiment.correlate { correlation = C, range = 1:100 }

Each block is ``kind[.variant] [name] { key = value ... }``; entries are
separated by newlines, ``;`` or ``,``.  Values are lists ``[a, b]`` (tuples
``(a, b)`` read as lists), double-quoted strings, or bare scalars, which run
to the next top-level separator and may contain balanced parentheses.
Coefficients use the polynomial literal syntax: ``p/q`` is an exact
rational, ``sqrt(k)`` and ``pi`` (times rationals) are irrational constants,
and anything with a decimal point is a generic real taken at its exact
decimal value.  Complex numbers are written ``a+bi``.

Parsing validates every entry, fills defaults, and reports all problems with
line numbers.  ``render`` prints a config back in canonical form, and
``parse_config(render(c)) == c``.
"""
from __future__ import annotations

import re
from fractions import Fraction
from dataclasses import dataclass, field
from typing import Callable

from .poly import PolySyntaxError, VectorPolynomial, parse_coefficient


class Raw(str):
    """Bare (unquoted) scalar."""


class ConfigError(ValueError):
    def __init__(self, errors: list[tuple[int, str]]):
        self.errors = errors
        super().__init__("\n".join(f"line {ln}: {msg}" for ln, msg in errors))


@dataclass
class Block:
    kind: str
    name: str
    entries: dict
    line: int = field(default=0, compare=False)
    lines: dict = field(default_factory=dict, compare=False)


@dataclass
class ExperimentConfig:
    blocks: list[Block]

    def find(self, kind: str, name: str | None = None) -> Block | None:
        for b in self.blocks:
            if b.kind == kind and (name is None or b.name == name):
                return b
        return None

    def of_family(self, family: str) -> list[Block]:
        return [b for b in self.blocks if b.kind.split(".")[0] == family]

    @property
    def experiment(self) -> Block | None:
        found = self.of_family("experiment")
        return found[0] if found else None


# ---------------------------------------------------------------------------
# reader

_IDENT = re.compile(r"[A-Za-z_][A-Za-z0-9_\-]*(?:\.[A-Za-z_][A-Za-z0-9_\-]*)?")
_SCALAR_STOP = set(",;])}\n#")


class _Reader:
    def __init__(self, text: str):
        self.text = text
        self.pos = 0
        self.line = 1

    def eof(self) -> bool:
        return self.pos >= len(self.text)

    def peek(self) -> str:
        return self.text[self.pos] if self.pos < len(self.text) else ""

    def advance(self, k: int = 1):
        chunk = self.text[self.pos:self.pos + k]
        self.line += chunk.count("\n")
        self.pos += k

    def skip(self, newlines: bool = True, separators: str = ""):
        while not self.eof():
            c = self.peek()
            if c in " \t\r" or (newlines and c == "\n") or c in separators:
                self.advance()
            elif c == "#":
                while not self.eof() and self.peek() != "\n":
                    self.advance()
            else:
                break

    def error(self, msg: str):
        raise ConfigError([(self.line, msg)])

    def ident(self) -> str:
        m = _IDENT.match(self.text, self.pos)
        if not m:
            self.error(f"expected a name, found {self.peek()!r}")
        self.advance(m.end() - self.pos)
        return m.group(0)

    def value(self):
        c = self.peek()
        if c in "[(":
            close = "]" if c == "[" else ")"
            self.advance()
            items = []
            while True:
                self.skip()
                if self.peek() == close:
                    self.advance()
                    return items
                if self.eof():
                    self.error(f"unterminated list, expected {close!r}")
                items.append(self.value())
                self.skip()
                if self.peek() == ",":
                    self.advance()
                elif self.peek() != close:
                    self.error(f"expected ',' or {close!r} in list")
        if c == '"':
            self.advance()
            out = []
            while True:
                if self.eof() or self.peek() == "\n":
                    self.error("unterminated string")
                c = self.peek()
                self.advance()
                if c == '"':
                    return "".join(out)
                if c == "\\":
                    out.append(self.peek())
                    self.advance()
                else:
                    out.append(c)
        depth = 0
        start = self.pos
        while not self.eof():
            c = self.peek()
            if c == "(":
                depth += 1
            elif c == ")":
                if depth == 0:
                    break
                depth -= 1
            elif depth == 0 and c in _SCALAR_STOP:
                break
            self.advance()
        raw = self.text[start:self.pos].strip()
        if not raw:
            self.error("missing value")
        return Raw(raw)


def _read_blocks(text: str) -> list[Block]:
    r = _Reader(text)
    blocks = []
    while True:
        r.skip()
        if r.eof():
            return blocks
        line = r.line
        kind = r.ident()
        r.skip(newlines=False)
        name = ""
        if r.peek() != "{":
            name = r.ident()
            r.skip(newlines=False)
        if r.peek() != "{":
            r.error("expected '{'")
        r.advance()
        entries, lines, dupes = {}, {}, []
        while True:
            r.skip(separators=";,")
            if r.peek() == "}":
                r.advance()
                break
            if r.eof():
                r.error(f"unterminated block {kind}")
            kline = r.line
            key = r.ident()
            r.skip(newlines=False)
            if r.peek() != "=":
                r.error(f"expected '=' after {key}")
            r.advance()
            r.skip(newlines=False)
            val = r.value()
            if key in entries:
                dupes.append((kline, f"duplicate key {key}"))
            entries[key] = val
            lines[key] = kline
        if dupes:
            raise ConfigError(dupes)
        blocks.append(Block(kind, name, entries, line, lines))


# ---------------------------------------------------------------------------
# schema

def _int(v):
    if isinstance(v, list):
        raise ValueError("expected an integer")
    return int(v)


def _pos_int(v):
    x = _int(v)
    if x < 1:
        raise ValueError("must be positive")
    return x


def _float(v):
    if isinstance(v, list):
        raise ValueError("expected a number")
    try:
        return float(Fraction(str(v).strip()))
    except (ValueError, ZeroDivisionError):
        raise ValueError(f"expected a number, got {v!r}") from None


def _delta(v):
    x = _float(v)
    if not 0 < x < 1:
        raise ValueError("delta outside (0,1)")
    return x


def _deltas(v):
    vals = [_delta(x) for x in (v if isinstance(v, list) else [v])]
    if any(a <= b for a, b in zip(vals, vals[1:])):
        raise ValueError("delta grid must be strictly descending")
    return vals


def _open_unit(v):
    x = _float(v)
    if not 0 < x < 1:
        raise ValueError("value outside (0,1)")
    return x


def _complex(v):
    if isinstance(v, list):
        raise ValueError("expected a complex number")
    return complex(str(v).replace(" ", "").replace("i", "j"))


def _coef(v):
    if isinstance(v, list):
        raise ValueError("expected a coefficient")
    try:
        return parse_coefficient(str(v))
    except PolySyntaxError as exc:
        raise ValueError(str(exc)) from None


def _list_of(conv, length=None):
    def f(v):
        if not isinstance(v, list):
            raise ValueError("expected a list")
        if length is not None and len(v) != length:
            raise ValueError(f"expected {length} entries")
        return [conv(x) for x in v]
    return f


def _range(v):
    parts = str(v).split(":")
    if isinstance(v, list) or len(parts) != 2:
        raise ValueError("expected M:N")
    M, N = int(parts[0]), int(parts[1])
    if not M < N:
        raise ValueError("empty range: need M < N")
    return M, N


def _ap(v):
    parts = str(v).split(":")
    if isinstance(v, list) or len(parts) != 2:
        raise ValueError("expected r:s")
    r, s = int(parts[0]), int(parts[1])
    if r < 1:
        raise ValueError("r must be at least 1")
    return r, s


def _primes_N(v):
    x = _int(v)
    if x < 2:
        raise ValueError("N must be at least 2")
    return x


def _choice(*options):
    def f(v):
        if isinstance(v, list) or str(v) not in options:
            raise ValueError(f"expected one of {', '.join(options)}")
        return str(v)
    return f


def _name(v):
    if isinstance(v, list) or not _IDENT.fullmatch(str(v)):
        raise ValueError("expected a name")
    return str(v)


def _names(v):
    return _list_of(_name)(v)


def _factors(v):
    out = []
    for item in _list_of(str)(v):
        parts = [p.strip() for p in item.split("*")]
        for p in parts:
            _name(p)
        out.append(parts)
    return out


def _poly_coords(v):
    coords = _list_of(str)(v)
    try:
        VectorPolynomial.parse(coords)
    except (PolySyntaxError, ValueError) as exc:
        raise ValueError(str(exc)) from None
    return coords


def _brackets(v):
    kinds = ("floor", "ceil", "nearest")
    out = []
    for item in _list_of(lambda x: x)(v):
        if isinstance(item, list):
            out.append([_choice(*kinds)(k) for k in item])
        else:
            out.append(_choice(*kinds)(item))
    return out


def _string(v):
    if isinstance(v, list):
        raise ValueError("expected a string")
    return str(v)


# key -> (converter, default or REQUIRED)
REQUIRED = object()
SCHEMES = {"cesaro": (_range, None), "primes": (_primes_N, None), "ap": (_ap, "1:0")}

SCHEMA: dict[str, dict[str, tuple[Callable, object]]] = {
    "system.torus": {"dim": (_pos_int, REQUIRED), "rank": (_pos_int, REQUIRED),
                     "angles": (_list_of(_list_of(_coef)), REQUIRED)},
    "system.heisenberg": {"g": (_list_of(_coef, 3), REQUIRED),
                          "base": (_list_of(_float, 3), "(0, 0, 0)")},
    "obs.char": {"freq": (_list_of(_int), REQUIRED), "amp": (_complex, "1")},
    "obs.const": {"c": (_complex, REQUIRED), "dim": (_pos_int, "1")},
    "obs.fracexp": {"scale": (_coef, REQUIRED)},
    "obs.mollified": {"base": (_name, REQUIRED), "width": (_open_unit, REQUIRED)},
    "poly": {"coords": (_poly_coords, REQUIRED)},
    "correlation": {"system": (_name, REQUIRED), "functions": (_factors, REQUIRED),
                    "polys": (_names, REQUIRED), "brackets": (_brackets, None),
                    "integration": (_choice("auto", "exact", "quadrature"), "auto"),
                    "Q": (_pos_int, "4096")},
    "nilseq": {"space": (_name, REQUIRED), "g": (_list_of(_coef), None),
               "x": (_list_of(_float), None), "F": (_name, REQUIRED), "step": (_pos_int, "1")},
    "experiment.correlate": {"correlation": (_name, REQUIRED), "range": (_range, "1:101")},
    "experiment.average": {"correlation": (_name, REQUIRED), **SCHEMES},
    "experiment.equidist": {"poly": (_name, REQUIRED), "delta": (_deltas, REQUIRED),
                            "range": (_range, None), "primes": (_primes_N, None),
                            "ap": (_ap, "1:0")},
    "experiment.suspend": {"correlation": (_name, REQUIRED), "delta": (_delta, REQUIRED),
                           "range": (_range, "1:10001"),
                           "rule": (_choice("coordinate", "paper"), "coordinate")},
    "experiment.approx-error": {"correlation": (_name, REQUIRED), "nilseq": (_name, REQUIRED),
                                **SCHEMES, "sweep_length": (_pos_int, None),
                                "sweep_starts": (_list_of(_int), None)},
    "experiment.example": {"epsilon": (_open_unit, "0.1"), "cesaro": (_range, "1:1000001"),
                           "primes": (_primes_N, "1000000"), "sweep_length": (_pos_int, "100000"),
                           "sweep_count": (_pos_int, "10"), "sweep_max": (_int, "1000000000")},
    "output": {"dir": (_string, "out")},
}

NAMED = ("system", "obs", "poly", "correlation", "nilseq")
REFS = {  # (block kind family, key) -> family referenced
    ("correlation", "system"): "system",
    ("correlation", "polys"): "poly",
    ("correlation", "functions"): "obs",
    ("obs.mollified", "base"): "obs",
    ("nilseq", "space"): "system",
    ("nilseq", "F"): "obs",
    ("experiment", "correlation"): "correlation",
    ("experiment", "nilseq"): "nilseq",
    ("experiment", "poly"): "poly",
}


def typed(block: Block, key: str):
    """Converted value of an entry (None for absent optional keys)."""
    v = block.entries.get(key)
    if v is None:
        return None
    return SCHEMA[block.kind][key][0](v)


def _default_raw(default: str):
    if default.startswith("("):
        return [Raw(x.strip()) for x in default[1:-1].split(",")]
    return Raw(default)


def validate(cfg: ExperimentConfig) -> ExperimentConfig:
    errors: list[tuple[int, str]] = []
    seen: dict[tuple[str, str], int] = {}
    for b in cfg.blocks:
        family = b.kind.split(".")[0]
        if b.kind not in SCHEMA:
            errors.append((b.line, f"unknown block kind {b.kind}"))
            continue
        if family in NAMED:
            if not b.name:
                errors.append((b.line, f"{b.kind} block needs a name"))
            key = (family, b.name)
            if key in seen:
                errors.append((b.line, f"duplicate definition {b.name} (first on line {seen[key]})"))
            seen.setdefault(key, b.line)
        schema = SCHEMA[b.kind]
        for key in b.entries:
            if key not in schema:
                errors.append((b.lines.get(key, b.line), f"unknown key {key} in {b.kind}"))
        for key, (conv, default) in schema.items():
            if key not in b.entries:
                if default is REQUIRED:
                    errors.append((b.line, f"missing key {key} in {b.kind}"))
                elif default is not None:
                    b.entries[key] = _default_raw(default)
                continue
            try:
                conv(b.entries[key])
            except (ValueError, TypeError) as exc:
                errors.append((b.lines.get(key, b.line), f"{key}: {exc}"))
    experiments = cfg.of_family("experiment")
    if len(experiments) > 1:
        errors.append((experiments[1].line, "more than one experiment block"))
    if len(cfg.of_family("output")) > 1:
        errors.append((cfg.of_family("output")[1].line, "more than one output block"))
    for b in cfg.blocks:
        if b.kind not in SCHEMA:
            continue
        family = b.kind.split(".")[0]
        for key in b.entries:
            target = REFS.get((b.kind, key)) or REFS.get((family, key))
            if target is None:
                continue
            try:
                v = typed(b, key)
            except (ValueError, TypeError):
                continue
            names = v if isinstance(v, list) else [v]
            flat = [n for item in names for n in (item if isinstance(item, list) else [item])]
            for n in flat:
                if (target, n) not in seen:
                    errors.append((b.lines.get(key, b.line), f"unresolved reference {n} ({target})"))
    for b in cfg.blocks:
        if b.kind == "experiment.average" or b.kind == "experiment.approx-error":
            if ("cesaro" in b.entries) == ("primes" in b.entries):
                errors.append((b.line, "give exactly one of cesaro, primes"))
        if b.kind == "experiment.equidist":
            if ("range" in b.entries) == ("primes" in b.entries):
                errors.append((b.line, "give exactly one of range, primes"))
        if b.kind == "system.torus" and not errors:
            angles = typed(b, "angles")
            if len(angles) != typed(b, "rank") or any(len(r) != typed(b, "dim") for r in angles):
                errors.append((b.lines.get("angles", b.line), "angles must be a rank x dim table"))
    if errors:
        raise ConfigError(sorted(errors))
    return cfg


def parse_config(text: str) -> ExperimentConfig:
    return validate(ExperimentConfig(_read_blocks(text)))


# ---------------------------------------------------------------------------
# printing

def _render_value(v) -> str:
    if isinstance(v, list):
        return "[" + ", ".join(_render_value(x) for x in v) + "]"
    if isinstance(v, Raw):
        return str(v)
    return '"' + str(v).replace("\\", "\\\\").replace('"', '\\"') + '"'


def render(cfg: ExperimentConfig) -> str:
    out = []
    for b in cfg.blocks:
        head = b.kind + (f" {b.name}" if b.name else "")
        out.append(head + " {")
        for k, v in b.entries.items():
            out.append(f"  {k} = {_render_value(v)}")
        out.append("}")
    return "\n".join(out) + "\n"
