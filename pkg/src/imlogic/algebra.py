"""Finite algebras with explicit tables.

Elements are integer indices 0..n-1; the order is an explicit 0/1 table and
every operation (meet, join, implication, complement, boxes) is table-driven
so that evaluation inside the n^k valuation loops is O(1) per connective.
``validate`` re-checks every axiom from the raw tables and reports failures
with witnessing tuples instead of raising.
"""

from __future__ import annotations

import os
from dataclasses import dataclass, field
from functools import lru_cache
from itertools import product
from typing import Callable, Iterable, Iterator, Mapping, Sequence

from .errors import BudgetError, InputError
from .syntax import Formula, Rule, Sig, rule_variables

FLAVORS = ("DistLattice", "Heyting", "ModalHeyting", "Boolean", "Bimodal")
_HEYTING_FLAVORS = ("Heyting", "ModalHeyting")
_BOOLEAN_FLAVORS = ("Boolean", "Bimodal")

DEFAULT_VALUATION_BUDGET = int(os.environ.get("IMLOGIC_BUDGET", 10**7))
LOGICS = ("S4K", "GrzK", "Mix", "S4KMix", "GrzKMix")


class FiniteAlgebra:
    """A finite algebra over carrier {0..size-1} with an explicit order table.

    ``leq[i][j] == 1`` iff i <= j.  Which operation tables must be present is
    determined by ``flavor``; derived tables (meet, join, implication,
    complement) are computed lazily and assume the lattice axioms hold.
    """

    __slots__ = ("flavor", "size", "leq", "box", "boxI", "boxM", "_cache", "element_sets")

    def __init__(self, flavor: str, size: int, leq: Sequence[Sequence[int]],
                 box: Sequence[int] | None = None,
                 boxI: Sequence[int] | None = None,
                 boxM: Sequence[int] | None = None):
        if flavor not in FLAVORS:
            raise InputError(f"unknown flavor {flavor!r}")
        self.flavor = flavor
        self.size = int(size)
        self.leq = tuple(tuple(int(v) for v in row) for row in leq)
        self.box = tuple(int(v) for v in box) if box is not None else None
        self.boxI = tuple(int(v) for v in boxI) if boxI is not None else None
        self.boxM = tuple(int(v) for v in boxM) if boxM is not None else None
        self._cache: dict = {}
        self.element_sets: tuple[int, ...] | None = None  # set by dual_algebra

    def _ident(self):
        return (self.flavor, self.size, self.leq, self.box, self.boxI, self.boxM)

    def __eq__(self, other):
        return isinstance(other, FiniteAlgebra) and self._ident() == other._ident()

    def __hash__(self):
        return hash(self._ident())

    def __repr__(self):
        return f"<{self.flavor} algebra, {self.size} elements>"

    def le(self, a: int, b: int) -> bool:
        return bool(self.leq[a][b])

    @property
    def bot(self) -> int:
        return self._derived()["bot"]

    @property
    def top(self) -> int:
        return self._derived()["top"]

    @property
    def meet(self) -> tuple[tuple[int, ...], ...]:
        return self._derived()["meet"]

    @property
    def join(self) -> tuple[tuple[int, ...], ...]:
        return self._derived()["join"]

    @property
    def imp(self) -> tuple[tuple[int, ...], ...]:
        """Residual table: imp[a][b] is the greatest c with c /\\ a <= b."""
        tables = self._derived()
        if "imp" not in tables:
            n = self.size
            meet = tables["meet"]
            rows = []
            for a in range(n):
                row = []
                for b in range(n):
                    cands = [c for c in range(n) if self.leq[meet[c][a]][b]]
                    row.append(_greatest(self.leq, cands))
                rows.append(tuple(row))
            tables["imp"] = tuple(rows)
        return tables["imp"]

    @property
    def neg(self) -> tuple[int, ...]:
        """Complement vector (Boolean flavors only)."""
        tables = self._derived()
        if "neg" not in tables:
            n, meet, join = self.size, tables["meet"], tables["join"]
            out = []
            for a in range(n):
                comps = [c for c in range(n)
                         if meet[a][c] == tables["bot"] and join[a][c] == tables["top"]]
                if len(comps) != 1:
                    raise InputError(f"element {a} has no unique complement")
                out.append(comps[0])
            tables["neg"] = tuple(out)
        return tables["neg"]

    def _derived(self) -> dict:
        if "tables" not in self._cache:
            n = self.size
            bots = [a for a in range(n) if all(self.leq[a][b] for b in range(n))]
            tops = [a for a in range(n) if all(self.leq[b][a] for b in range(n))]
            if len(bots) != 1 or len(tops) != 1:
                raise InputError("order has no unique bottom/top")
            meet_rows, join_rows = [], []
            for a in range(n):
                mrow, jrow = [], []
                for b in range(n):
                    m = _greatest(self.leq, [c for c in range(n)
                                             if self.leq[c][a] and self.leq[c][b]])
                    j = _least(self.leq, [c for c in range(n)
                                          if self.leq[a][c] and self.leq[b][c]])
                    if m is None or j is None:
                        raise InputError(f"pair ({a},{b}) lacks a meet or a join")
                    mrow.append(m)
                    jrow.append(j)
                meet_rows.append(tuple(mrow))
                join_rows.append(tuple(jrow))
            self._cache["tables"] = {
                "bot": bots[0], "top": tops[0],
                "meet": tuple(meet_rows), "join": tuple(join_rows),
            }
        return self._cache["tables"]


def _greatest(leq, cands: list[int]) -> int | None:
    for c in cands:
        if all(leq[d][c] for d in cands):
            return c
    return None


def _least(leq, cands: list[int]) -> int | None:
    for c in cands:
        if all(leq[c][d] for d in cands):
            return c
    return None


@dataclass(frozen=True)
class ReportEntry:
    axiom: str
    witness: tuple
    message: str


@dataclass
class ValidationReport:
    entries: list[ReportEntry] = field(default_factory=list)

    @property
    def ok(self) -> bool:
        return not self.entries

    def add(self, axiom: str, witness: tuple, message: str):
        self.entries.append(ReportEntry(axiom, witness, message))

    def __repr__(self):
        if self.ok:
            return "<validation: all axioms pass>"
        return "<validation: " + "; ".join(e.message for e in self.entries) + ">"


def validate(alg: FiniteAlgebra) -> ValidationReport:
    """Check every axiom of the declared flavor from the raw tables.

    Failures become report entries with a witnessing tuple; nothing raises.
    """
    rep = ValidationReport()
    n = alg.size
    if n < 2:
        rep.add("nondegenerate", (n,), f"carrier has {n} elements; at least 2 required")
        return rep
    if len(alg.leq) != n or any(len(row) != n for row in alg.leq):
        rep.add("shape", (), "leq table is not an n-by-n matrix")
        return rep
    if any(v not in (0, 1) for row in alg.leq for v in row):
        rep.add("shape", (), "leq entries must be 0 or 1")
        return rep
    for name, vec, needed in (("box", alg.box, alg.flavor == "ModalHeyting"),
                              ("boxI", alg.boxI, alg.flavor == "Bimodal"),
                              ("boxM", alg.boxM, alg.flavor == "Bimodal")):
        if needed and vec is None:
            rep.add("shape", (), f"flavor {alg.flavor} requires a {name} table")
        if not needed and vec is not None:
            rep.add("shape", (), f"flavor {alg.flavor} does not take a {name} table")
        if vec is not None and (len(vec) != n or any(not 0 <= v < n for v in vec)):
            rep.add("shape", (), f"{name} table is not an n-vector of elements")
    if not rep.ok:
        return rep

    leq = alg.leq
    for a in range(n):
        if not leq[a][a]:
            rep.add("reflexive", (a,), f"{a} <= {a} fails")
    for a in range(n):
        for b in range(n):
            if a != b and leq[a][b] and leq[b][a]:
                rep.add("antisymmetric", (a, b), f"{a} <= {b} and {b} <= {a}")
            for c in range(n):
                if leq[a][b] and leq[b][c] and not leq[a][c]:
                    rep.add("transitive", (a, b, c), f"{a} <= {b} <= {c} but not {a} <= {c}")
    if not rep.ok:
        return rep

    bots = [a for a in range(n) if all(leq[a][b] for b in range(n))]
    tops = [a for a in range(n) if all(leq[b][a] for b in range(n))]
    if len(bots) != 1:
        rep.add("bottom", tuple(bots), "no unique bottom element")
    if len(tops) != 1:
        rep.add("top", tuple(tops), "no unique top element")
    if not rep.ok:
        return rep

    meet = [[None] * n for _ in range(n)]
    join = [[None] * n for _ in range(n)]
    for a in range(n):
        for b in range(n):
            m = _greatest(leq, [c for c in range(n) if leq[c][a] and leq[c][b]])
            j = _least(leq, [c for c in range(n) if leq[a][c] and leq[b][c]])
            if m is None:
                rep.add("meet", (a, b), f"pair ({a},{b}) has no meet")
            if j is None:
                rep.add("join", (a, b), f"pair ({a},{b}) has no join")
            meet[a][b], join[a][b] = m, j
    if not rep.ok:
        return rep

    for a in range(n):
        for b in range(n):
            for c in range(n):
                if meet[a][join[b][c]] != join[meet[a][b]][meet[a][c]]:
                    rep.add("distributive", (a, b, c),
                            f"a/\\(b\\/c) != (a/\\b)\\/(a/\\c) at ({a},{b},{c})")
                    if len(rep.entries) > 3:
                        return rep
    if not rep.ok:
        return rep

    boti, topi = bots[0], tops[0]
    if alg.flavor in _HEYTING_FLAVORS:
        for a in range(n):
            for b in range(n):
                cands = [c for c in range(n) if leq[meet[c][a]][b]]
                r = _greatest(leq, cands)
                if r is None:
                    rep.add("residual", (a, b), f"{{c : c/\\{a} <= {b}}} has no greatest element")
                    continue
                for c in range(n):
                    if leq[meet[c][a]][b] != leq[c][r]:
                        rep.add("residual", (a, b, c),
                                f"c/\\a <= b iff c <= a->b fails at ({a},{b},{c})")
    if alg.flavor in _BOOLEAN_FLAVORS:
        for a in range(n):
            comps = [c for c in range(n) if meet[a][c] == boti and join[a][c] == topi]
            if not comps:
                rep.add("complement", (a,), f"element {a} has no complement")
    for name, vec in (("box", alg.box), ("boxI", alg.boxI), ("boxM", alg.boxM)):
        if vec is None:
            continue
        if vec[topi] != topi:
            rep.add(f"{name}-top", (topi,), f"{name} 1 != 1")
        for a in range(n):
            for b in range(n):
                if vec[meet[a][b]] != meet[vec[a]][vec[b]]:
                    rep.add(f"{name}-meet", (a, b),
                            f"{name}(a/\\b) != {name}a /\\ {name}b at ({a},{b})")
    return rep


@dataclass(frozen=True)
class Valuation:
    assignment: Mapping[str, int]
    algebra: FiniteAlgebra

    def __post_init__(self):
        for v, e in self.assignment.items():
            if not 0 <= e < self.algebra.size:
                raise InputError(f"valuation sends {v!r} outside the carrier")


def _eval_compat(alg: FiniteAlgebra, f: Formula):
    if f.sig is Sig.IM and alg.flavor not in _HEYTING_FLAVORS:
        raise InputError(f"IM formulas need a Heyting-flavored algebra, got {alg.flavor}")
    if f.sig is Sig.BI and alg.flavor not in _BOOLEAN_FLAVORS:
        raise InputError(f"BI formulas need a Boolean-flavored algebra, got {alg.flavor}")


def eval_formula(f: Formula, val: Valuation) -> int:
    """Homomorphic evaluation of ``f`` under ``val``."""
    alg = val.algebra
    _eval_compat(alg, f)
    return _eval(f, val.assignment, alg)


def _eval(f: Formula, env: Mapping[str, int], alg: FiniteAlgebra) -> int:
    if f.op == "var":
        if f.name not in env:
            raise InputError(f"variable {f.name!r} is not assigned")
        return env[f.name]
    if f.op == "top":
        return alg.top
    if f.op == "bot":
        return alg.bot
    args = [_eval(a, env, alg) for a in f.args]
    if f.op == "and":
        return alg.meet[args[0]][args[1]]
    if f.op == "or":
        return alg.join[args[0]][args[1]]
    if f.op == "imp":
        return alg.imp[args[0]][args[1]]
    if f.op == "neg":
        return alg.neg[args[0]]
    table = {"box": alg.box, "boxI": alg.boxI, "boxM": alg.boxM}[f.op]
    if table is None:
        raise InputError(f"algebra has no {f.op} table")
    return table[args[0]]


def _formula_size(f: Formula) -> int:
    return 1 + sum(_formula_size(a) for a in f.args)


def compile_formula(f: Formula, alg: FiniteAlgebra,
                    var_order: Sequence[str]) -> Callable[..., int]:
    """Compile ``f`` into a positional lambda over the variables in
    ``var_order``; table lookups only, for tight valuation loops."""
    _eval_compat(alg, f)
    names = {"MEET": alg.meet, "JOIN": alg.join}
    index = {v: i for i, v in enumerate(var_order)}

    def expr(g: Formula) -> str:
        if g.op == "var":
            return f"v{index[g.name]}"
        if g.op == "top":
            return str(alg.top)
        if g.op == "bot":
            return str(alg.bot)
        if g.op == "and":
            return f"MEET[{expr(g.args[0])}][{expr(g.args[1])}]"
        if g.op == "or":
            return f"JOIN[{expr(g.args[0])}][{expr(g.args[1])}]"
        if g.op == "imp":
            names["IMP"] = alg.imp
            return f"IMP[{expr(g.args[0])}][{expr(g.args[1])}]"
        if g.op == "neg":
            names["NEG"] = alg.neg
            return f"NEG[{expr(g.args[0])}]"
        table = {"box": alg.box, "boxI": alg.boxI, "boxM": alg.boxM}[g.op]
        if table is None:
            raise InputError(f"algebra has no {g.op} table")
        names[g.op.upper()] = table
        return f"{g.op.upper()}[{expr(g.args[0])}]"

    body = expr(f)
    params = ", ".join(f"v{i}" for i in range(len(var_order))) or "*_ignored"
    return eval(f"lambda {params}: {body}", names)  # noqa: S307 - expression built above


def _compiled_rule(alg: FiniteAlgebra, rule: Rule):
    vs = rule_variables(rule)
    prems = sorted(rule.premises, key=_formula_size)
    return (vs,
            [compile_formula(f, alg, vs) for f in prems],
            [compile_formula(f, alg, vs) for f in rule.conclusions])


def refuting_valuations(alg: FiniteAlgebra, rule: Rule,
                        budget: int = DEFAULT_VALUATION_BUDGET) -> Iterator[Valuation]:
    """Yield every refuting valuation in canonical order (variables sorted by
    name, assignments enumerated lexicographically over element indices)."""
    vs, prems, concs = _compiled_rule(alg, rule)
    n, k = alg.size, len(vs)
    if n ** k > budget:
        raise BudgetError(f"{n}^{k} valuations exceed the budget of {budget}")
    t = alg.top
    for tup in product(range(n), repeat=k):
        if all(p(*tup) == t for p in prems) and not any(c(*tup) == t for c in concs):
            yield Valuation(dict(zip(vs, tup)), alg)


def validates_rule(alg: FiniteAlgebra, rule: Rule,
                   budget: int = DEFAULT_VALUATION_BUDGET
                   ) -> tuple[bool, Valuation | None]:
    """Exhaustive validity check; when the rule fails, the first refuting
    valuation in canonical order is returned as the witness."""
    for v in refuting_valuations(alg, rule, budget):
        return False, v
    return True, None


def validates_formula(alg: FiniteAlgebra, f: Formula,
                      budget: int = DEFAULT_VALUATION_BUDGET
                      ) -> tuple[bool, Valuation | None]:
    return validates_rule(alg, Rule((), (f,), f.sig), budget)


def check_logic(alg: FiniteAlgebra, logic: str) -> bool:
    """Pointwise check of the defining axiom inequalities for the named
    bimodal logic (S4K, GrzK, Mix, S4KMix, GrzKMix)."""
    if logic not in LOGICS:
        raise InputError(f"unknown logic {logic!r}; choose from {LOGICS}")
    if alg.flavor != "Bimodal":
        raise InputError("logic checks apply to Bimodal algebras")
    n, leq = alg.size, alg.leq
    bi, bm, ng, join = alg.boxI, alg.boxM, alg.neg, alg.join

    def s4() -> bool:
        return all(leq[bi[a]][a] and leq[bi[a]][bi[bi[a]]] for a in range(n))

    def grz() -> bool:
        # boxI(boxI(a -> boxI a) -> a) <= a with the Boolean arrow ~x \/ y
        for a in range(n):
            inner = bi[join[ng[a]][bi[a]]]
            if not leq[bi[join[ng[inner]][a]]][a]:
                return False
        return True

    def mix() -> bool:
        return all(bi[bm[bi[a]]] == bm[a] for a in range(n))

    parts = {"S4K": [s4], "GrzK": [s4, grz], "Mix": [mix],
             "S4KMix": [s4, mix], "GrzKMix": [s4, grz, mix]}[logic]
    return all(p() for p in parts)


def generated_bounded_sublattice(alg: FiniteAlgebra, gens: Iterable[int]
                                 ) -> tuple[FiniteAlgebra, tuple[int, ...]]:
    """Least subset containing the generators and both bounds, closed under
    meet and join; returned re-indexed with the inclusion map recorded."""
    closure = _closure(alg, gens, with_neg=False)
    return _sub_as_algebra(alg, closure, "DistLattice")


def generated_boolean_subalgebra(alg: FiniteAlgebra, gens: Iterable[int]
                                 ) -> tuple[FiniteAlgebra, tuple[int, ...]]:
    """Closure under meet, join and complement; flavor Boolean."""
    if alg.flavor not in _BOOLEAN_FLAVORS:
        raise InputError("a Boolean subalgebra needs a Boolean-flavored ambient algebra")
    closure = _closure(alg, gens, with_neg=True)
    return _sub_as_algebra(alg, closure, "Boolean")


def _closure(alg: FiniteAlgebra, gens: Iterable[int], with_neg: bool) -> list[int]:
    current = {alg.bot, alg.top} | set(gens)
    meet, join = alg.meet, alg.join
    changed = True
    while changed:
        changed = False
        items = sorted(current)
        for a in items:
            if with_neg and alg.neg[a] not in current:
                current.add(alg.neg[a])
                changed = True
            for b in items:
                for c in (meet[a][b], join[a][b]):
                    if c not in current:
                        current.add(c)
                        changed = True
    return sorted(current)


def _sub_as_algebra(alg: FiniteAlgebra, elems: list[int], flavor: str
                    ) -> tuple[FiniteAlgebra, tuple[int, ...]]:
    leq = [[alg.leq[a][b] for b in elems] for a in elems]
    return FiniteAlgebra(flavor, len(elems), leq), tuple(elems)


# Isomorphism and canonical forms.  All candidate bijections are enumerated
# within classes of an order-theoretic invariant; sizes here are tiny, so
# correctness beats cleverness.

def _invariant(alg: FiniteAlgebra, a: int) -> tuple:
    n = alg.size
    down = sum(alg.leq[b][a] for b in range(n))
    up = sum(alg.leq[a][b] for b in range(n))
    covers_up = sum(1 for b in range(n) if _covers(alg.leq, a, b))
    covers_dn = sum(1 for b in range(n) if _covers(alg.leq, b, a))
    return (down, up, covers_dn, covers_up)


def _covers(leq, a: int, b: int) -> bool:
    """b covers a: a < b with nothing strictly between."""
    n = len(leq)
    if a == b or not leq[a][b]:
        return False
    return not any(c != a and c != b and leq[a][c] and leq[c][b] for c in range(n))


def _class_permutations(alg: FiniteAlgebra) -> Iterator[tuple[int, ...]]:
    """All bijections old->new compatible with the order invariant."""
    from itertools import permutations

    n = alg.size
    classes: dict[tuple, list[int]] = {}
    for a in range(n):
        classes.setdefault(_invariant(alg, a), []).append(a)
    keys = sorted(classes)
    slots: list[int] = []
    for key in keys:
        slots.extend(classes[key])
    # positions assigned per class, in class order
    pos = 0
    ranges = []
    for key in keys:
        members = classes[key]
        ranges.append((members, list(range(pos, pos + len(members)))))
        pos += len(members)
    for choice in product(*(permutations(r[1]) for r in ranges)):
        perm = [0] * n
        for (members, _), assigned in zip(ranges, choice):
            for old, new in zip(members, assigned):
                perm[old] = new
        yield tuple(perm)


def _relabel_leq(leq, perm: tuple[int, ...]) -> tuple:
    n = len(leq)
    out = [[0] * n for _ in range(n)]
    for a in range(n):
        for b in range(n):
            out[perm[a]][perm[b]] = leq[a][b]
    return tuple(tuple(row) for row in out)


def _relabel_vec(vec, perm: tuple[int, ...]) -> tuple:
    out = [0] * len(vec)
    for a, v in enumerate(vec):
        out[perm[a]] = perm[v]
    return tuple(out)


def canonical_key(alg: FiniteAlgebra,
                  extra_sets: Sequence[frozenset] = ()) -> tuple:
    """Canonical form of the algebra (and optionally attached parameter
    sets), minimized over all invariant-compatible relabelings."""
    best = None
    vecs = [v for v in (alg.box, alg.boxI, alg.boxM) if v is not None]
    for perm in _class_permutations(alg):
        key = [_relabel_leq(alg.leq, perm)]
        for v in vecs:
            key.append(_relabel_vec(v, perm))
        for s in extra_sets:
            if s and isinstance(next(iter(s)), tuple):
                key.append(tuple(sorted((perm[a], perm[b]) for (a, b) in s)))
            else:
                key.append(tuple(sorted(perm[a] for a in s)))
        key = tuple(key)
        if best is None or key < best:
            best = key
    return (alg.flavor, alg.size, best)


def _cross_class_permutations(a: FiniteAlgebra, b: FiniteAlgebra
                              ) -> Iterator[tuple[int, ...]]:
    """All bijections a -> b matching elements of equal order invariant."""
    from itertools import permutations

    cls_a: dict[tuple, list[int]] = {}
    cls_b: dict[tuple, list[int]] = {}
    for x in range(a.size):
        cls_a.setdefault(_invariant(a, x), []).append(x)
    for x in range(b.size):
        cls_b.setdefault(_invariant(b, x), []).append(x)
    if sorted(cls_a) != sorted(cls_b):
        return
    keys = sorted(cls_a)
    if any(len(cls_a[k]) != len(cls_b[k]) for k in keys):
        return
    for choice in product(*(permutations(cls_b[k]) for k in keys)):
        perm = [0] * a.size
        for k, assigned in zip(keys, choice):
            for old, new in zip(cls_a[k], assigned):
                perm[old] = new
        yield tuple(perm)


def automorphisms(alg: FiniteAlgebra) -> list[tuple[int, ...]]:
    """Order automorphisms that also fix every operation table."""
    out = []
    vecs = [v for v in (alg.box, alg.boxI, alg.boxM) if v is not None]
    for perm in _cross_class_permutations(alg, alg):
        if _relabel_leq(alg.leq, perm) != alg.leq:
            continue
        if all(_relabel_vec(v, perm) == v for v in vecs):
            out.append(perm)
    return out


def find_algebra_isomorphism(a: FiniteAlgebra, b: FiniteAlgebra) -> tuple[int, ...] | None:
    """Explicit bijection a -> b preserving order and all operation tables."""
    if a.size != b.size or a.flavor != b.flavor:
        return None
    avecs = [v for v in (a.box, a.boxI, a.boxM) if v is not None]
    bvecs = [v for v in (b.box, b.boxI, b.boxM) if v is not None]
    for perm in _cross_class_permutations(a, b):
        if _relabel_leq(a.leq, perm) != b.leq:
            continue
        if all(_relabel_vec(v, perm) == w for v, w in zip(avecs, bvecs)):
            return perm
    return None


def isomorphic(a: FiniteAlgebra, b: FiniteAlgebra) -> bool:
    return find_algebra_isomorphism(a, b) is not None


# Enumeration.  Distributive lattices are generated from the posets of their
# join-irreducibles (downset lattices); boxes on a finite distributive
# lattice are exactly the assignments on meet-irreducibles that respect the
# unique upper cover, enumerated without duplicates.  Boolean-based flavors
# go through atoms, where a box table corresponds to a relation on atoms.

ENUMERATION_HARD_CAP = 8


def _downsets(down: tuple[int, ...]) -> list[int]:
    k = len(down)
    out = []
    for s in range(1 << k):
        if all(not (s >> j) & 1 or (down[j] & ~s) == 0 for j in range(k)):
            out.append(s)
    return out


def _gen_posets(max_downsets: int) -> Iterator[tuple[int, ...]]:
    """Naturally labeled posets (strict-downset masks, elements added as
    maxima) whose downset count stays within the limit."""

    def extend(down: tuple[int, ...]):
        yield down
        k = len(down)
        if k >= max_downsets - 1:
            return
        base = _downsets(down)
        if len(base) > max_downsets:
            return
        for d in base:
            new = down + (d,)
            if len(_downsets(new)) <= max_downsets:
                yield from extend(new)

    yield from extend(())


@lru_cache(maxsize=None)
def _distributive_lattices(max_size: int) -> tuple[FiniteAlgebra, ...]:
    seen: dict[tuple, FiniteAlgebra] = {}
    for poset in _gen_posets(max_size):
        downs = sorted(_downsets(poset), key=lambda s: (bin(s).count("1"), s))
        if not 2 <= len(downs) <= max_size:
            continue
        leq = [[1 if (x & ~y) == 0 else 0 for y in downs] for x in downs]
        alg = FiniteAlgebra("DistLattice", len(downs), leq)
        key = canonical_key(alg)
        if key not in seen:
            seen[key] = alg
    return tuple(sorted(seen.values(), key=lambda a: (a.size, canonical_key(a))))


def _meet_irreducibles(alg: FiniteAlgebra) -> list[int]:
    n = alg.size
    return [a for a in range(n)
            if sum(1 for b in range(n) if _covers(alg.leq, a, b)) == 1]


def _unique_cover(alg: FiniteAlgebra, a: int) -> int:
    for b in range(alg.size):
        if _covers(alg.leq, a, b):
            return b
    raise InputError("element has no upper cover")


@lru_cache(maxsize=None)
def _normal_boxes(alg: FiniteAlgebra) -> tuple[tuple[int, ...], ...]:
    """All unary operations preserving top and binary meets, without
    duplicates.  A box is fixed by its values on meet-irreducibles, which may
    be chosen freely below the value already forced at the unique cover."""
    n = alg.size
    # process high elements first so the cover bound is already assigned
    mi = sorted(_meet_irreducibles(alg),
                key=lambda a: (sum(alg.leq[a][b] for b in range(n)), a))
    above: list[list[int]] = [[m for m in mi if alg.leq[a][m]] for a in range(n)]
    meet = alg.meet
    out: list[tuple[int, ...]] = []
    values: dict[int, int] = {}

    def bound(a: int) -> int:
        b = alg.top
        for m in above[a]:
            if m in values:
                b = meet[b][values[m]]
        return b

    def assign(i: int):
        if i == len(mi):
            table = []
            for a in range(n):
                v = alg.top
                for m in above[a]:
                    v = meet[v][values[m]]
                table.append(v)
            out.append(tuple(table))
            return
        m = mi[i]
        cover_bound = bound(_unique_cover(alg, m))
        for v in range(n):
            if alg.leq[v][cover_bound]:
                values[m] = v
                assign(i + 1)
        values.pop(m, None)

    assign(0)
    return tuple(sorted(out))


def _box_orbit_representatives(boxes, autos) -> list:
    reps = []
    seen = set()
    for b in boxes:
        if b in seen:
            continue
        orbit = {_relabel_vec(b, p) for p in autos}
        seen |= orbit
        reps.append(min(orbit))
    return sorted(reps)


def _boolean_algebra(num_atoms: int, boxI=None, boxM=None,
                     flavor: str = "Boolean") -> FiniteAlgebra:
    n = 1 << num_atoms
    leq = [[1 if (x & ~y) == 0 else 0 for y in range(n)] for x in range(n)]
    return FiniteAlgebra(flavor, n, leq, boxI=boxI, boxM=boxM)


def _relations(k: int) -> list[tuple[int, ...]]:
    return [tuple((r >> (i * k)) & ((1 << k) - 1) for i in range(k))
            for r in range(1 << (k * k))]


def _relation_is_preorder(rel: tuple[int, ...]) -> bool:
    k = len(rel)
    for i in range(k):
        if not (rel[i] >> i) & 1:
            return False
        row = rel[i]
        reach = row
        for j in range(k):
            if (row >> j) & 1:
                reach |= rel[j]
        if reach != row:
            return False
    return True


def _compose(r1: tuple[int, ...], r2: tuple[int, ...]) -> tuple[int, ...]:
    k = len(r1)
    out = []
    for i in range(k):
        row = 0
        for j in range(k):
            if (r1[i] >> j) & 1:
                row |= r2[j]
        out.append(row)
    return tuple(out)


def _box_from_relation(rel: tuple[int, ...]) -> tuple[int, ...]:
    k = len(rel)
    n = 1 << k
    return tuple(
        sum(1 << x for x in range(k) if (rel[x] & ~u) == 0) for u in range(n))


def _atom_perm_key(k: int, rels: tuple[tuple[int, ...], ...]) -> tuple:
    from itertools import permutations

    best = None
    for p in permutations(range(k)):
        cand = []
        for rel in rels:
            rows = [0] * k
            for i in range(k):
                for j in range(k):
                    if (rel[i] >> j) & 1:
                        rows[p[i]] |= 1 << p[j]
            cand.append(tuple(rows))
        cand = tuple(cand)
        if best is None or cand < best:
            best = cand
    return best


@lru_cache(maxsize=None)
def _bimodal_pairs(k: int, constraint: str | None) -> tuple:
    rels = _relations(k)
    if constraint in ("S4K", "GrzK", "S4KMix", "GrzKMix"):
        ri_pool = [r for r in rels if _relation_is_preorder(r)]
    else:
        ri_pool = rels
    seen = {}
    for ri in ri_pool:
        for rm in rels:
            if constraint in ("Mix", "S4KMix", "GrzKMix"):
                if _compose(_compose(ri, rm), ri) != rm:
                    continue
            key = _atom_perm_key(k, (ri, rm))
            if key not in seen:
                seen[key] = (ri, rm)
    return tuple(seen[key] for key in sorted(seen))


def enumerate_algebras(flavor: str, max_size: int,
                       constraints: Sequence[str] = ()) -> Iterator[FiniteAlgebra]:
    """All algebras of the flavor with 2 <= size <= max_size, one per
    isomorphism class, in a deterministic order.  ``constraints`` names
    bimodal logics the output must validate (Bimodal flavor only)."""
    if max_size > ENUMERATION_HARD_CAP:
        raise BudgetError(
            f"enumeration cap is {ENUMERATION_HARD_CAP}; {max_size} requested")
    if flavor not in FLAVORS:
        raise InputError(f"unknown flavor {flavor!r}")
    constraints = tuple(constraints)
    if constraints and flavor != "Bimodal":
        raise InputError("logic constraints apply to the Bimodal flavor only")
    for c in constraints:
        if c not in LOGICS:
            raise InputError(f"unknown logic constraint {c!r}")

    if flavor in ("DistLattice", "Heyting"):
        for lat in _distributive_lattices(max_size):
            yield FiniteAlgebra(flavor, lat.size, lat.leq)
    elif flavor == "ModalHeyting":
        for lat in _distributive_lattices(max_size):
            autos = automorphisms(lat)
            for bx in _box_orbit_representatives(_normal_boxes(lat), autos):
                yield FiniteAlgebra("ModalHeyting", lat.size, lat.leq, box=bx)
    elif flavor == "Boolean":
        k = 1
        while (1 << k) <= max_size:
            yield _boolean_algebra(k)
            k += 1
    else:
        constraint = None
        if constraints:
            # combine: the strongest named constraint drives generation,
            # Grz is filtered afterwards via check_logic
            order = {"Mix": 0, "S4K": 1, "S4KMix": 2, "GrzK": 3, "GrzKMix": 4}
            constraint = max(constraints, key=lambda c: order[c])
        k = 1
        while (1 << k) <= max_size:
            for ri, rm in _bimodal_pairs(k, constraint):
                alg = _boolean_algebra(k, boxI=_box_from_relation(ri),
                                       boxM=_box_from_relation(rm), flavor="Bimodal")
                if all(check_logic(alg, c) for c in constraints):
                    yield alg
            k += 1
