"""Substitution systems generating quasiperiodic plate words.

Words are tuples of single-character symbols. Large iterates are never
materialized for the ideal-plate energies: :func:`pair_counts` recurses on
per-symbol adjacency counts instead.
"""
from __future__ import annotations

import re
from dataclasses import dataclass, field

from .errors import ConfigError, RuleParseError

PRESET_RULES = {
    "fibonacci": {"D": "DN", "N": "D"},
    "thue-morse": {"D": "DN", "N": "ND"},
    "period-doubling": {"D": "DN", "N": "DD"},
    "silver-mean": {"D": "DND", "N": "D"},
    "bronze-mean": {"D": "DDDN", "N": "D"},
    "copper-mean": {"D": "DNN", "N": "D"},
    "nickel-mean": {"D": "DNNN", "N": "D"},
    "triadic-cantor": {"D": "DND", "N": "NNN"},
}


@dataclass(frozen=True)
class SubstitutionSystem:
    """Alphabet, rewrite rules and axiom of a substitution system."""

    rules: dict
    axiom: str = "D"
    name: str = field(default="custom", compare=False)

    def __post_init__(self):
        rules = {}
        for sym, rhs in self.rules.items():
            rhs = tuple(rhs)
            if not rhs:
                raise ConfigError(f"rule for {sym!r} has an empty right-hand side")
            rules[sym] = rhs
        for sym, rhs in rules.items():
            for s in rhs:
                if s not in rules:
                    raise ConfigError(f"symbol {s!r} in rule for {sym!r} has no rule")
        if self.axiom not in rules:
            raise ConfigError(f"axiom {self.axiom!r} has no rule")
        object.__setattr__(self, "rules", rules)

    @property
    def alphabet(self):
        return frozenset(self.rules)

    def __hash__(self):
        return hash((tuple(sorted(self.rules.items())), self.axiom))


@dataclass(frozen=True)
class Word:
    symbols: tuple
    iteration: int = 0

    def __post_init__(self):
        if len(self.symbols) < 1:
            raise ConfigError("a word has at least one symbol")

    def __len__(self):
        return len(self.symbols)

    def __str__(self):
        return "".join(self.symbols)


@dataclass(frozen=True)
class NeighborhoodStats:
    """Adjacent-pair counts of a word; ``n_like + n_unlike == n_plates - 1``."""

    n_like: int
    n_unlike: int
    n_plates: int


def preset_key(name):
    return re.sub(r"[\s_]+", "-", str(name).strip().lower())


def preset(name):
    """One of the eight built-in sequences (axiom ``D``), looked up case-insensitively."""
    key = preset_key(name)
    if key not in PRESET_RULES:
        known = ", ".join(sorted(PRESET_RULES))
        raise ConfigError(f"unknown preset {name!r}; known presets: {known}")
    return SubstitutionSystem(dict(PRESET_RULES[key]), axiom="D", name=key)


def iterate(system, iterations, max_length=10_000_000):
    """Apply the rules ``iterations`` times to the axiom, all symbols in parallel."""
    if iterations < 0:
        raise ConfigError("iteration count must be >= 0")
    word = (system.axiom,)
    for _ in range(iterations):
        word = tuple(s for sym in word for s in system.rules[sym])
        if len(word) > max_length:
            raise ConfigError(
                f"word exceeds {max_length} symbols; use pair_counts() for large iterates"
            )
    return Word(word, iterations)


def stats(word):
    """Exact counts of like (DD, NN) and unlike (DN, ND) adjacent pairs."""
    symbols = word.symbols if isinstance(word, Word) else tuple(word)
    if not symbols:
        raise ConfigError("empty word")
    like = sum(1 for a, b in zip(symbols, symbols[1:]) if a == b)
    return NeighborhoodStats(like, len(symbols) - 1 - like, len(symbols))


@dataclass(frozen=True)
class _Block:
    first: str
    last: str
    length: int
    like: int
    unlike: int

    def __add__(self, other):
        junction_like = self.last == other.first
        return _Block(
            self.first,
            other.last,
            self.length + other.length,
            self.like + other.like + junction_like,
            self.unlike + other.unlike + (not junction_like),
        )


def pair_counts(system, iterations):
    """:class:`NeighborhoodStats` of ``iterate(system, iterations)`` in O(iterations).

    Each symbol's expansion is summarized by its first/last symbol, length and
    internal pair counts; concatenation composes the junction pairs.
    """
    if iterations < 0:
        raise ConfigError("iteration count must be >= 0")
    blocks = {s: _Block(s, s, 1, 0, 0) for s in system.rules}
    for _ in range(iterations):
        new = {}
        for sym, rhs in system.rules.items():
            acc = blocks[rhs[0]]
            for s in rhs[1:]:
                acc = acc + blocks[s]
            new[sym] = acc
        blocks = new
    b = blocks[system.axiom]
    return NeighborhoodStats(b.like, b.unlike, b.length)


_STATEMENT = re.compile(r"[^;\n]+")
_AXIOM = re.compile(r"\s*axiom\b\s*(?P<sym>\S*)\s*$", re.IGNORECASE)
_RULE = re.compile(r"\s*(?P<lhs>\S+)\s*->(?P<rhs>.*)$")


def parse_rules(text):
    """Parse the rule DSL ``axiom D; D -> D N; N -> D``.

    Statements are separated by ``;`` or newlines, ``#`` starts a comment and
    whitespace inside a right-hand side is ignored, so ``D -> DN`` and
    ``D -> D N`` are the same rule. Symbols are single letters.
    """
    axiom = None
    rules = {}
    spans = {}
    for lineno, line in enumerate(text.splitlines() or [""], start=1):
        line = line.split("#", 1)[0]
        for m in _STATEMENT.finditer(line):
            stmt = m.group(0)
            if not stmt.strip():
                continue
            col = m.start() + len(stmt) - len(stmt.lstrip()) + 1
            am = _AXIOM.match(stmt)
            if am:
                sym = am.group("sym")
                if len(sym) != 1 or not sym.isalpha():
                    raise RuleParseError("axiom must be a single-letter symbol", lineno, col)
                if axiom is not None:
                    raise RuleParseError("duplicate axiom", lineno, col)
                axiom = (sym, lineno, col)
                continue
            rm = _RULE.match(stmt)
            if not rm:
                raise RuleParseError(f"cannot parse statement {stmt.strip()!r}", lineno, col)
            lhs = rm.group("lhs")
            if len(lhs) != 1 or not lhs.isalpha():
                raise RuleParseError(f"rule head {lhs!r} is not a single-letter symbol", lineno, col)
            if lhs in rules:
                raise RuleParseError(f"duplicate rule for {lhs!r}", lineno, col)
            rhs_start = m.start() + rm.start("rhs")
            rhs = []
            for offset, ch in enumerate(rm.group("rhs")):
                if ch.isspace():
                    continue
                if not ch.isalpha():
                    raise RuleParseError(f"invalid symbol {ch!r}", lineno, rhs_start + offset + 1)
                rhs.append((ch, rhs_start + offset + 1))
            if not rhs:
                raise RuleParseError(f"empty right-hand side for {lhs!r}", lineno, col)
            rules[lhs] = tuple(ch for ch, _ in rhs)
            spans[lhs] = (lineno, rhs)
    if axiom is None:
        raise RuleParseError("missing axiom statement", 1, 1)
    for lhs, (lineno, rhs) in spans.items():
        for ch, col in rhs:
            if ch not in rules:
                raise RuleParseError(f"unknown symbol {ch!r} (no rule)", lineno, col)
    sym, lineno, col = axiom
    if sym not in rules:
        raise RuleParseError(f"unknown axiom symbol {sym!r} (no rule)", lineno, col)
    return SubstitutionSystem(rules, axiom=sym)


def format_rules(system):
    """Render ``system`` in the rule DSL; ``parse_rules`` inverts it."""
    lines = [f"axiom {system.axiom};"]
    for sym in sorted(system.rules):
        lines.append(f"{sym} -> {' '.join(system.rules[sym])};")
    return "\n".join(lines) + "\n"
