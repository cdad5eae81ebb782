"""Formula and rule syntax for the two signatures.

The intuitionistic modal signature (IM) has primitive /\\, \\/, ->, T, F and
one box.  The bimodal signature (BI) has primitive /\\, \\/, ~, T, F and two
boxes; ``p -> q`` is notation for ``~p \\/ q`` and is expanded by the parser,
so BI ASTs never contain an implication node.  In both signatures ``<->`` is
sugar.  Formulas are immutable, hashable, and totally ordered by a structural
key so that sets of formulas serialize deterministically.
"""

from __future__ import annotations

import re
from dataclasses import dataclass
from enum import Enum
from functools import lru_cache
from typing import Iterable, Mapping

from .errors import InputError, ParseError


class Sig(Enum):
    IM = "im"
    BI = "bi"


_ARITY = {
    "var": 0, "top": 0, "bot": 0,
    "and": 2, "or": 2, "imp": 2,
    "box": 1, "neg": 1, "boxI": 1, "boxM": 1,
}
_OPS_BY_SIG = {
    Sig.IM: frozenset({"var", "top", "bot", "and", "or", "imp", "box"}),
    Sig.BI: frozenset({"var", "top", "bot", "and", "or", "neg", "boxI", "boxM"}),
}
_OP_RANK = {op: i for i, op in enumerate(
    ["var", "top", "bot", "and", "or", "imp", "box", "neg", "boxI", "boxM"])}

RESERVED_WORDS = frozenset({"T", "F", "box", "boxI", "boxM"})
_VAR_RE = re.compile(r"[A-Za-z_][A-Za-z0-9_]*\Z")


@dataclass(frozen=True)
class Formula:
    op: str
    sig: Sig
    name: str = ""
    args: tuple["Formula", ...] = ()

    def __post_init__(self):
        if self.op not in _OPS_BY_SIG[self.sig]:
            raise InputError(f"operator {self.op!r} is not part of signature {self.sig.value}")
        if len(self.args) != _ARITY[self.op]:
            raise InputError(f"operator {self.op!r} takes {_ARITY[self.op]} arguments")
        if self.op == "var":
            if not _VAR_RE.match(self.name) or self.name in RESERVED_WORDS:
                raise InputError(f"invalid variable name {self.name!r}")
        elif self.name:
            raise InputError("only variables carry a name")
        for a in self.args:
            if a.sig is not self.sig:
                raise InputError("signature mismatch between a formula and its subformula")

    def __lt__(self, other: "Formula") -> bool:
        return _key(self) < _key(other)

    def __le__(self, other: "Formula") -> bool:
        return _key(self) <= _key(other)

    def __repr__(self):
        return f"<{self.sig.value}: {format_formula(self)}>"


@lru_cache(maxsize=None)
def _key(f: Formula):
    if f.op == "var":
        return (_OP_RANK["var"], f.name)
    return (_OP_RANK[f.op],) + tuple(_key(a) for a in f.args)


def formula_sort_key(f: Formula):
    """Total structural order used wherever formula sets must be canonical."""
    return _key(f)


# Constructors.  ``imp`` and ``iff`` build the primitive node in IM and the
# derived expansion in BI.

def var(name: str, sig: Sig) -> Formula:
    return Formula("var", sig, name=name)


def top(sig: Sig) -> Formula:
    return Formula("top", sig)


def bot(sig: Sig) -> Formula:
    return Formula("bot", sig)


def conj(lhs: Formula, rhs: Formula) -> Formula:
    return Formula("and", lhs.sig, args=(lhs, rhs))


def disj(lhs: Formula, rhs: Formula) -> Formula:
    return Formula("or", lhs.sig, args=(lhs, rhs))


def neg(arg: Formula) -> Formula:
    return Formula("neg", arg.sig, args=(arg,))


def imp(lhs: Formula, rhs: Formula) -> Formula:
    if lhs.sig is Sig.IM:
        return Formula("imp", Sig.IM, args=(lhs, rhs))
    return disj(neg(lhs), rhs)


def iff(lhs: Formula, rhs: Formula) -> Formula:
    return conj(imp(lhs, rhs), imp(rhs, lhs))


def box(arg: Formula) -> Formula:
    return Formula("box", arg.sig, args=(arg,))


def box_i(arg: Formula) -> Formula:
    return Formula("boxI", arg.sig, args=(arg,))


def box_m(arg: Formula) -> Formula:
    return Formula("boxM", arg.sig, args=(arg,))


def variables(f: Formula) -> tuple[str, ...]:
    """Variable names occurring in ``f``, sorted."""
    out: set[str] = set()
    stack = [f]
    while stack:
        g = stack.pop()
        if g.op == "var":
            out.add(g.name)
        else:
            stack.extend(g.args)
    return tuple(sorted(out))


def substitute(f: Formula, mapping: Mapping[str, Formula]) -> Formula:
    """Homomorphic replacement of variables; unmapped variables unchanged."""
    for g in mapping.values():
        if g.sig is not f.sig:
            raise InputError("substituted formula has the wrong signature")
    return _substitute(f, dict(mapping))


def _substitute(f: Formula, mapping: dict[str, Formula]) -> Formula:
    if f.op == "var":
        return mapping.get(f.name, f)
    if not f.args:
        return f
    return Formula(f.op, f.sig, args=tuple(_substitute(a, mapping) for a in f.args))


def subformula_closure(fs: Iterable[Formula]) -> frozenset[Formula]:
    """Least superset of ``fs`` closed under immediate subformulas."""
    out: set[Formula] = set()
    stack = list(fs)
    while stack:
        g = stack.pop()
        if g not in out:
            out.add(g)
            stack.extend(g.args)
    return frozenset(out)


def bimodal_closure(theta: Iterable[Formula]) -> frozenset[Formula]:
    """Close under subformulas and add a boxI companion for every boxM member.

    The result satisfies: boxM f in the closure implies boxI f in it.
    """
    closed = set(subformula_closure(theta))
    for g in closed:
        if g.sig is not Sig.BI:
            raise InputError("bimodal closure applies to bimodal formulas only")
    extra = {box_i(g.args[0]) for g in closed if g.op == "boxM"}
    return frozenset(closed | extra)


@dataclass(frozen=True)
class Rule:
    """A multi-conclusion rule: finitely many premises over finitely many
    conclusions.  An empty conclusion set is the inconsistency rule."""

    premises: tuple[Formula, ...]
    conclusions: tuple[Formula, ...]
    sig: Sig

    def __post_init__(self):
        for f in self.premises + self.conclusions:
            if f.sig is not self.sig:
                raise InputError("all rule members must share the rule's signature")
        object.__setattr__(self, "premises", _canonical(self.premises))
        object.__setattr__(self, "conclusions", _canonical(self.conclusions))

    def __repr__(self):
        return f"<{self.sig.value}: {format_rule(self)}>"


def _canonical(fs: tuple[Formula, ...]) -> tuple[Formula, ...]:
    return tuple(sorted(set(fs), key=_key))


def make_rule(premises: Iterable[Formula], conclusions: Iterable[Formula], sig: Sig) -> Rule:
    return Rule(tuple(premises), tuple(conclusions), sig)


def rule_variables(r: Rule) -> tuple[str, ...]:
    out: set[str] = set()
    for f in r.premises + r.conclusions:
        out.update(variables(f))
    return tuple(sorted(out))


def godel_translate(f: Formula) -> Formula:
    """Modal embedding of IM formulas into BI: every clause gets a boxI
    prefix and the IM box becomes the boxI boxM block."""
    if f.sig is not Sig.IM:
        raise InputError("the translation is defined on IM formulas")
    return _godel(f)


@lru_cache(maxsize=None)
def _godel(f: Formula) -> Formula:
    if f.op == "var":
        return box_i(var(f.name, Sig.BI))
    if f.op == "top":
        return box_i(top(Sig.BI))
    if f.op == "bot":
        return box_i(bot(Sig.BI))
    if f.op == "and":
        return box_i(conj(_godel(f.args[0]), _godel(f.args[1])))
    if f.op == "or":
        return box_i(disj(_godel(f.args[0]), _godel(f.args[1])))
    if f.op == "imp":
        return box_i(imp(_godel(f.args[0]), _godel(f.args[1])))
    assert f.op == "box"
    return box_i(box_m(_godel(f.args[0])))


def godel_translate_rule(r: Rule) -> Rule:
    if r.sig is not Sig.IM:
        raise InputError("the translation is defined on IM rules")
    return make_rule([godel_translate(f) for f in r.premises],
                     [godel_translate(f) for f in r.conclusions], Sig.BI)


# Tokenizer / parser.  Positions are 1-based columns, pointing at the start
# of the offending token (or one past the end of input).

_TOKEN_SPECS = [
    ("IFF", "<->"), ("ARROW", "->"), ("AND", "/\\"), ("OR", "\\/"),
    ("NEG", "~"), ("LP", "("), ("RP", ")"), ("COMMA", ","),
    ("SLASH", "/"), ("DOT", "."),
]
_KEYWORDS = {"T": "TOP", "F": "BOT", "box": "BOX", "boxI": "BOXI", "boxM": "BOXM"}


def _tokenize(text: str) -> list[tuple[str, str, int]]:
    tokens = []
    i, n = 0, len(text)
    while i < n:
        ch = text[i]
        if ch.isspace():
            i += 1
            continue
        for kind, lit in _TOKEN_SPECS:
            if text.startswith(lit, i):
                tokens.append((kind, lit, i + 1))
                i += len(lit)
                break
        else:
            m = re.match(r"[A-Za-z_][A-Za-z0-9_]*", text[i:])
            if not m:
                raise ParseError(f"unexpected character {ch!r}", i + 1)
            word = m.group(0)
            tokens.append((_KEYWORDS.get(word, "IDENT"), word, i + 1))
            i += len(word)
    tokens.append(("END", "", n + 1))
    return tokens


class _Parser:
    def __init__(self, tokens: list[tuple[str, str, int]], sig: Sig):
        self.tokens = tokens
        self.pos = 0
        self.sig = sig

    def peek(self):
        return self.tokens[self.pos]

    def take(self):
        tok = self.tokens[self.pos]
        self.pos += 1
        return tok

    def expect(self, kind: str):
        tok = self.take()
        if tok[0] != kind:
            raise ParseError(f"expected {kind}, found {tok[1]!r}", tok[2])
        return tok

    def formula(self) -> Formula:
        lhs = self.arrow()
        if self.peek()[0] == "IFF":
            self.take()
            return iff(lhs, self.formula())
        return lhs

    def arrow(self) -> Formula:
        lhs = self.disj()
        if self.peek()[0] == "ARROW":
            self.take()
            return imp(lhs, self.arrow())
        return lhs

    def disj(self) -> Formula:
        f = self.conj()
        while self.peek()[0] == "OR":
            self.take()
            f = disj(f, self.conj())
        return f

    def conj(self) -> Formula:
        f = self.unary()
        while self.peek()[0] == "AND":
            self.take()
            f = conj(f, self.unary())
        return f

    def unary(self) -> Formula:
        kind, text, pos = self.peek()
        if kind in ("NEG", "BOX", "BOXI", "BOXM"):
            self.take()
            needed = Sig.IM if kind == "BOX" else Sig.BI
            if self.sig is not needed:
                raise ParseError(
                    f"connective {text!r} is not part of signature {self.sig.value}", pos)
            arg = self.unary()
            if kind == "NEG":
                return neg(arg)
            if kind == "BOX":
                return box(arg)
            return box_i(arg) if kind == "BOXI" else box_m(arg)
        return self.atom()

    def atom(self) -> Formula:
        kind, text, pos = self.take()
        if kind == "TOP":
            return top(self.sig)
        if kind == "BOT":
            return bot(self.sig)
        if kind == "IDENT":
            return var(text, self.sig)
        if kind == "LP":
            f = self.formula()
            self.expect("RP")
            return f
        raise ParseError(f"expected a formula, found {text!r}" if text else
                         "expected a formula, found end of input", pos)


def parse_formula(text: str, sig: Sig) -> Formula:
    parser = _Parser(_tokenize(text), sig)
    f = parser.formula()
    kind, tok, pos = parser.peek()
    if kind != "END":
        raise ParseError(f"unexpected {tok!r} after formula", pos)
    return f


def parse_rule(text: str, sig: Sig) -> Rule:
    """Rule text is ``g1, g2, ... / d1, d2, ...`` with an empty side written ``.``"""
    tokens = _tokenize(text)
    slashes = [i for i, t in enumerate(tokens) if t[0] == "SLASH"]
    if len(slashes) != 1:
        pos = tokens[-1][2] if not slashes else tokens[slashes[1]][2]
        raise ParseError("a rule needs exactly one '/' separator", pos)
    cut = slashes[0]
    prem = _parse_side(tokens[:cut] + [("END", "", tokens[cut][2])], sig)
    conc = _parse_side(tokens[cut + 1:], sig)
    return make_rule(prem, conc, sig)


def _parse_side(tokens: list[tuple[str, str, int]], sig: Sig) -> list[Formula]:
    if tokens[0][0] == "DOT":
        if tokens[1][0] != "END":
            raise ParseError("'.' stands for an empty side on its own", tokens[1][2])
        return []
    parser = _Parser(tokens, sig)
    out = [parser.formula()]
    while parser.peek()[0] == "COMMA":
        parser.take()
        out.append(parser.formula())
    kind, tok, pos = parser.peek()
    if kind != "END":
        raise ParseError(f"unexpected {tok!r} in rule", pos)
    return out


# Printer.  Derived connectives are recovered, so the BI expansion of -> and
# the biconditional print back in their sugared form; parse(format(f)) == f
# holds exactly on ASTs, and formatting is idempotent on strings.

_LEVEL = {"iff": 0, "arrow": 1, "or": 2, "and": 3, "unary": 4, "atom": 5}


def _sugar(f: Formula):
    """Return ('iff', l, r), ('arrow', l, r) or None."""
    if f.sig is Sig.IM:
        if f.op == "and":
            l, r = f.args
            if l.op == "imp" and r.op == "imp" and l.args == (r.args[1], r.args[0]):
                return ("iff", l.args[0], l.args[1])
        if f.op == "imp":
            return ("arrow", f.args[0], f.args[1])
        return None
    if f.op == "or" and f.args[0].op == "neg":
        return ("arrow", f.args[0].args[0], f.args[1])
    if f.op == "and":
        l, r = (_sugar(a) for a in f.args)
        if l and r and l[0] == r[0] == "arrow" and (l[1], l[2]) == (r[2], r[1]):
            return ("iff", l[1], l[2])
    return None


def format_formula(f: Formula) -> str:
    return _fmt(f, 0)


def _fmt(f: Formula, level: int) -> str:
    sug = _sugar(f)
    if sug is not None:
        kind, l, r = sug
        mine = _LEVEL["iff"] if kind == "iff" else _LEVEL["arrow"]
        text = f"{_fmt(l, mine + 1)} {'<->' if kind == 'iff' else '->'} {_fmt(r, mine)}"
        return f"({text})" if mine < level else text
    if f.op == "var":
        return f.name
    if f.op == "top":
        return "T"
    if f.op == "bot":
        return "F"
    if f.op in ("box", "boxI", "boxM", "neg"):
        sym = {"box": "box", "boxI": "boxI", "boxM": "boxM", "neg": "~"}[f.op]
        arg = _fmt(f.args[0], _LEVEL["unary"])
        joiner = "" if f.op == "neg" else " "
        return f"{sym}{joiner}{arg}"
    mine = _LEVEL["and"] if f.op == "and" else _LEVEL["or"]
    sym = "/\\" if f.op == "and" else "\\/"
    text = f"{_fmt(f.args[0], mine)} {sym} {_fmt(f.args[1], mine + 1)}"
    return f"({text})" if mine < level else text


def format_rule(r: Rule) -> str:
    prem = ", ".join(format_formula(f) for f in r.premises) or "."
    conc = ", ".join(format_formula(f) for f in r.conclusions) or "."
    return f"{prem} / {conc}"
