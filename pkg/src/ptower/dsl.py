"""Job configuration files and the polynomial expression language.

A config is a list of ``key = value`` lines; ``#`` starts a comment. Values
are integers, bare words, or bracketed lists of bare words or double-quoted
polynomial expressions::

    p = 2
    precision = 4
    cap = 4
    variables = [x, y]
    ideal = ["p*x", "p*y"]
    mode = torsion_reduced
    levels = 2

Expressions use ``+ - * ^``, parentheses, integer literals and the reserved
symbol ``p`` for the prime.
"""

from __future__ import annotations

import re
from dataclasses import dataclass

from .errors import ParseError, ValidationError
from .exactnum import is_prime
from .fracpoly import FracPoly, FracRing

MODE_NAMES = {"torsion_free": "TorsionFree", "torsion_reduced": "TorsionReduced"}
REQUIRED = ("p", "precision", "cap", "variables", "ideal", "mode", "levels")
OPTIONAL = ("sop", "seed")
RESERVED = ("p", "t")
IDENT = re.compile(r"[A-Za-z_][A-Za-z0-9_]*")


@dataclass(frozen=True)
class JobConfig:
    p: int
    precision: int
    cap: int
    variables: tuple
    ideal: tuple
    mode: str
    levels: int
    sop: tuple | None = None
    seed: int = 0

    @property
    def tower_mode(self) -> str:
        return MODE_NAMES[self.mode]

    def ring(self, cap: int | None = None) -> FracRing:
        return FracRing(self.p, self.variables, self.cap if cap is None else cap, self.precision)

    def generators(self, ring: FracRing | None = None):
        ring = self.ring() if ring is None else ring
        return [parse_polynomial(s, ring) for s in self.ideal]

    def sop_elements(self, ring: FracRing | None = None):
        if self.sop is None:
            return None
        ring = self.ring() if ring is None else ring
        return [parse_polynomial(s, ring) for s in self.sop]

    def presentation(self):
        from .deltaring import RingPresentation
        ring = self.ring()
        return RingPresentation(ring, self.generators(ring))

    def tower_spec(self, check: bool = True):
        from .tower import TowerSpec
        return TowerSpec(self.presentation(), self.tower_mode, self.levels, self.cap,
                         self.precision, check=check)

    def as_dict(self) -> dict:
        out = {
            "p": self.p,
            "precision": self.precision,
            "cap": self.cap,
            "variables": list(self.variables),
            "ideal": list(self.ideal),
            "mode": self.mode,
            "levels": self.levels,
        }
        if self.sop is not None:
            out["sop"] = list(self.sop)
        out["seed"] = self.seed
        return out


def render(cfg: JobConfig) -> str:
    """Canonical config text; ``parse_config(render(c)) == c``."""
    def q(s):
        return '"' + s + '"'
    lines = [
        f"p = {cfg.p}",
        f"precision = {cfg.precision}",
        f"cap = {cfg.cap}",
        f"variables = [{', '.join(cfg.variables)}]",
        f"ideal = [{', '.join(q(s) for s in cfg.ideal)}]",
        f"mode = {cfg.mode}",
        f"levels = {cfg.levels}",
    ]
    if cfg.sop is not None:
        lines.append(f"sop = [{', '.join(q(s) for s in cfg.sop)}]")
    lines.append(f"seed = {cfg.seed}")
    return "\n".join(lines) + "\n"


# --- config lexer -------------------------------------------------------------

def _strip_comment(line: str) -> str:
    out = []
    in_str = False
    for ch in line:
        if ch == '"':
            in_str = not in_str
        if ch == "#" and not in_str:
            break
        out.append(ch)
    return "".join(out)


def _parse_list(text: str, lineno: int, col0: int):
    """Bracketed list of bare words or quoted strings -> [(value, col, quoted)]."""
    if not text.startswith("["):
        raise ParseError("expected '['", lineno, col0)
    if not text.rstrip().endswith("]"):
        raise ParseError("expected ']' at the end of the list", lineno, col0 + len(text.rstrip()))
    body = text.rstrip()[1:-1]
    items = []
    i = 0
    n = len(body)
    expect_item = True
    while i < n:
        ch = body[i]
        col = col0 + 1 + i
        if ch.isspace():
            i += 1
            continue
        if ch == ",":
            if expect_item:
                raise ParseError("empty list entry", lineno, col)
            expect_item = True
            i += 1
            continue
        if not expect_item:
            raise ParseError("expected ','", lineno, col)
        if ch == '"':
            j = body.find('"', i + 1)
            if j < 0:
                raise ParseError("unterminated string", lineno, col)
            items.append((body[i + 1:j], col + 1, True))
            i = j + 1
        else:
            m = IDENT.match(body, i)
            if not m:
                raise ParseError(f"unexpected character {ch!r}", lineno, col)
            items.append((m.group(0), col, False))
            i = m.end()
        expect_item = False
    if items and expect_item:
        raise ParseError("trailing ','", lineno, col0 + len(text.rstrip()) - 1)
    return items


def _int_value(text, lineno, col):
    if not re.fullmatch(r"-?[0-9]+", text):
        raise ParseError(f"expected an integer, got {text!r}", lineno, col)
    return int(text)


def parse_config(text: str) -> JobConfig:
    raw = {}
    where = {}
    for lineno, line in enumerate(text.splitlines(), start=1):
        body = _strip_comment(line)
        if not body.strip():
            continue
        if "=" not in body:
            raise ParseError("expected 'key = value'", lineno, len(body) - len(body.lstrip()) + 1)
        k, v = body.split("=", 1)
        key = k.strip()
        kcol = len(k) - len(k.lstrip()) + 1
        if key not in REQUIRED and key not in OPTIONAL:
            raise ParseError(f"unknown key {key!r}", lineno, kcol)
        if key in raw:
            raise ParseError(f"duplicate key {key!r}", lineno, kcol)
        vcol = len(k) + 2 + (len(v) - len(v.lstrip()))
        raw[key] = (v.strip(), lineno, vcol)
    for key in REQUIRED:
        if key not in raw:
            raise ParseError(f"missing key {key!r}")
    vals = {}
    for key in ("p", "precision", "cap", "levels", "seed"):
        if key in raw:
            v, ln, c = raw[key]
            vals[key] = _int_value(v, ln, c)
    v, ln, c = raw["mode"]
    if v not in MODE_NAMES:
        raise ParseError(f"mode must be torsion_free or torsion_reduced, got {v!r}", ln, c)
    vals["mode"] = v
    v, ln, c = raw["variables"]
    items = _parse_list(v, ln, c)
    if any(q for _, _, q in items):
        raise ParseError("variables are bare identifiers", ln, c)
    vals["variables"] = tuple(s for s, _, _ in items)
    for key in ("ideal", "sop"):
        if key not in raw:
            continue
        v, ln, c = raw[key]
        items = _parse_list(v, ln, c)
        for s, col, quoted in items:
            if not quoted:
                raise ParseError("polynomials must be double-quoted", ln, col)
        vals[key] = tuple(s for s, _, _ in items)
        where[key] = [(ln, col) for _, col, _ in items]
    cfg = JobConfig(
        p=vals["p"], precision=vals["precision"], cap=vals["cap"],
        variables=vals["variables"], ideal=vals["ideal"], mode=vals["mode"],
        levels=vals["levels"], sop=vals.get("sop"), seed=vals.get("seed", 0))
    validate(cfg, where)
    return cfg


def validate(cfg: JobConfig, where=None):
    where = where or {}
    if not is_prime(cfg.p):
        raise ValidationError(f"p = {cfg.p} is not prime")
    if cfg.precision < 2:
        raise ValidationError(f"precision N = {cfg.precision} must be at least 2")
    if cfg.cap < cfg.p:
        raise ValidationError(f"cap D = {cfg.cap} must be at least p = {cfg.p}")
    if cfg.levels < 0:
        raise ValidationError("levels must be nonnegative")
    if len(set(cfg.variables)) != len(cfg.variables):
        raise ValidationError("variables must be distinct")
    for v in cfg.variables:
        if v in RESERVED:
            raise ValidationError(f"{v!r} is reserved and cannot be a variable")
    if not cfg.ideal:
        raise ValidationError("the ideal needs at least one generator")
    ring = cfg.ring()
    for key in ("ideal", "sop"):
        exprs = getattr(cfg, key)
        if exprs is None:
            continue
        locs = where.get(key, [(None, None)] * len(exprs))
        for s, (ln, col) in zip(exprs, locs):
            try:
                f = parse_polynomial(s, ring)
            except ParseError as exc:
                if ln is not None and exc.col is not None:
                    raise ParseError(exc.message, ln, col + exc.col - 1) from None
                raise
            if f.is_zero():
                raise ValidationError(f"generator {s!r} is zero modulo p^N")


# --- polynomial expressions ---------------------------------------------------

_TOKEN = re.compile(r"\s*(?:(\d+)|([A-Za-z_][A-Za-z0-9_]*)|(.))")


def _tokens(text):
    out = []
    pos = 0
    while pos < len(text):
        m = _TOKEN.match(text, pos)
        if m is None:
            break
        if m.end() == pos:
            break
        start = m.start(m.lastindex) if m.lastindex else pos
        if m.group(1) is not None:
            out.append(("int", int(m.group(1)), start + 1))
        elif m.group(2) is not None:
            out.append(("name", m.group(2), start + 1))
        elif m.group(3) is not None:
            ch = m.group(3)
            if ch.isspace():
                pos = m.end()
                continue
            if ch not in "+-*^()":
                raise ParseError(f"unexpected character {ch!r}", None, start + 1)
            out.append(("op", ch, start + 1))
        pos = m.end()
    out.append(("end", None, len(text) + 1))
    return out


class _Parser:
    def __init__(self, text, ring: FracRing):
        self.toks = _tokens(text)
        self.i = 0
        self.ring = ring

    def peek(self):
        return self.toks[self.i]

    def take(self):
        t = self.toks[self.i]
        self.i += 1
        return t

    def error(self, msg, tok=None):
        tok = tok or self.peek()
        return ParseError(msg, None, tok[2])

    def expr(self):
        left = self.term()
        while self.peek()[:2] in (("op", "+"), ("op", "-")):
            op = self.take()[1]
            right = self.term()
            left = left + right if op == "+" else left - right
        return left

    def term(self):
        left = self.unary()
        while self.peek()[:2] == ("op", "*"):
            self.take()
            left = left * self.unary()
        return left

    def unary(self):
        if self.peek()[:2] == ("op", "-"):
            self.take()
            return -self.unary()
        if self.peek()[:2] == ("op", "+"):
            self.take()
            return self.unary()
        return self.power()

    def power(self):
        base = self.atom()
        if self.peek()[:2] == ("op", "^"):
            self.take()
            tok = self.take()
            if tok[0] != "int":
                raise self.error("exponent must be a nonnegative integer", tok)
            base = base ** tok[1]
        return base

    def atom(self):
        tok = self.take()
        kind, val, _ = tok
        if kind == "int":
            return self.ring.const(val)
        if kind == "name":
            if val == "p":
                return self.ring.const(self.ring.p)
            if val not in self.ring.names:
                raise self.error(f"unknown variable {val!r}", tok)
            return self.ring.var(val)
        if (kind, val) == ("op", "("):
            inner = self.expr()
            close = self.take()
            if close[:2] != ("op", ")"):
                raise self.error("expected ')'", close)
            return inner
        if kind == "end":
            raise self.error("unexpected end of expression", tok)
        raise self.error(f"unexpected {val!r}", tok)


def parse_polynomial(text: str, ring: FracRing) -> FracPoly:
    """Parse an expression into a level-0 polynomial over ``ring``."""
    ps = _Parser(text, ring)
    f = ps.expr()
    if ps.peek()[0] != "end":
        raise ps.error(f"unexpected {ps.peek()[1]!r}")
    return f
