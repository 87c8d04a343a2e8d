"""First-order formulas over the membership signature, their text syntax,
brute-force satisfaction over finite structures, and satisfaction classes.

Connective basis is {not, and, exists}; the parser accepts |, ->, <-> and
A-quantifiers as sugar and desugars them before returning an AST.  Formula
size counts every AST node, terms included; that measure drives the clock
budgets of the truth-telling games.

Text grammar (ASCII)::

    formula := conj ('&' conj)*            desugared sugar: '|', '->', '<->'
    unary   := '!' unary | 'E'VAR '.' formula | 'A'VAR '.' formula | atom
    atom    := '(' formula ')' | term 'in' term | term '=' term
             | term '<|' term | PRED '(' term {',' term} ')'
    term    := '#' NAT | VAR

Variables are lowercase identifiers (``in`` is reserved), predicate symbols
are capitalized identifiers, ``#k`` is the universe element with code k.
"""

from __future__ import annotations

import re
from dataclasses import dataclass, field
from typing import Iterable, Iterator, Mapping, Optional, Sequence, Union

from .errors import (
    CoverageError,
    MalformedInstanceError,
    NoWitnessError,
    ParseError,
    SignatureError,
)
from .universe import Universe, member

EDGE_SYMBOL = "<|"

GRAMMAR_VERSION = 1


# ---------------------------------------------------------------------------
# Terms and formulas.


# Formula nodes sit in referee indexes and memo tables on every move of
# every game, so each node caches its hash at construction.


@dataclass(frozen=True)
class Var:
    name: str

    def __post_init__(self):
        object.__setattr__(self, "_h", hash(("var", self.name)))

    def __hash__(self):
        return self._h

    def __str__(self) -> str:
        return self.name


@dataclass(frozen=True)
class Const:
    code: int

    def __post_init__(self):
        object.__setattr__(self, "_h", hash(("const", self.code)))

    def __hash__(self):
        return self._h

    def __str__(self) -> str:
        return f"#{self.code}"


Term = Union[Var, Const]


@dataclass(frozen=True)
class Member:
    left: Term
    right: Term

    def __post_init__(self):
        object.__setattr__(self, "_h", hash(("in", self.left, self.right)))

    def __hash__(self):
        return self._h


@dataclass(frozen=True)
class Eq:
    left: Term
    right: Term

    def __post_init__(self):
        object.__setattr__(self, "_h", hash(("eq", self.left, self.right)))

    def __hash__(self):
        return self._h


@dataclass(frozen=True)
class Pred:
    name: str
    args: tuple[Term, ...]

    def __post_init__(self):
        object.__setattr__(self, "_h", hash(("pred", self.name, self.args)))

    def __hash__(self):
        return self._h


@dataclass(frozen=True)
class Not:
    body: "Formula"

    def __post_init__(self):
        object.__setattr__(self, "_h", hash(("not", self.body)))

    def __hash__(self):
        return self._h


@dataclass(frozen=True)
class And:
    left: "Formula"
    right: "Formula"

    def __post_init__(self):
        object.__setattr__(self, "_h", hash(("and", self.left, self.right)))

    def __hash__(self):
        return self._h


@dataclass(frozen=True)
class Exists:
    var: str
    body: "Formula"

    def __post_init__(self):
        object.__setattr__(self, "_h", hash(("exists", self.var, self.body)))

    def __hash__(self):
        return self._h


Formula = Union[Member, Eq, Pred, Not, And, Exists]

ATOMIC_KINDS = (Member, Eq, Pred)


def size(f: Formula) -> int:
    """Node count over the whole AST, term nodes included."""
    if isinstance(f, (Member, Eq)):
        return 3
    if isinstance(f, Pred):
        return 1 + len(f.args)
    if isinstance(f, Not):
        return 1 + size(f.body)
    if isinstance(f, And):
        return 1 + size(f.left) + size(f.right)
    if isinstance(f, Exists):
        return 1 + size(f.body)
    raise TypeError(f"not a formula: {f!r}")


def free_vars(f: Formula) -> frozenset[str]:
    if isinstance(f, (Member, Eq)):
        return frozenset(t.name for t in (f.left, f.right) if isinstance(t, Var))
    if isinstance(f, Pred):
        return frozenset(t.name for t in f.args if isinstance(t, Var))
    if isinstance(f, Not):
        return free_vars(f.body)
    if isinstance(f, And):
        return free_vars(f.left) | free_vars(f.right)
    if isinstance(f, Exists):
        return free_vars(f.body) - {f.var}
    raise TypeError(f"not a formula: {f!r}")


def _ends_in_quantifier(f: Formula) -> bool:
    # A quantifier at the right edge would greedily swallow a following '&'.
    if isinstance(f, Exists):
        return True
    if isinstance(f, Not):
        return _ends_in_quantifier(f.body)
    return False


def to_text(f: Formula) -> str:
    """Canonical core-connective rendering; parse(to_text(f)) == f."""
    if isinstance(f, Member):
        return f"({f.left} in {f.right})"
    if isinstance(f, Eq):
        return f"({f.left} = {f.right})"
    if isinstance(f, Pred):
        if f.name == EDGE_SYMBOL:
            return f"({f.args[0]} <| {f.args[1]})"
        return f"{f.name}({', '.join(str(a) for a in f.args)})"
    if isinstance(f, Not):
        return f"!{to_text(f.body)}"
    if isinstance(f, And):
        left = to_text(f.left)
        if _ends_in_quantifier(f.left):
            left = f"({left})"
        return f"({left} & {to_text(f.right)})"
    if isinstance(f, Exists):
        return f"E{f.var}. {to_text(f.body)}"
    raise TypeError(f"not a formula: {f!r}")


def subst_closed(f: Formula, assignment: Mapping[str, int]) -> Formula:
    """Replace free variables by constants per the assignment."""
    def sub_term(t: Term) -> Term:
        if isinstance(t, Var) and t.name in assignment:
            return Const(assignment[t.name])
        return t

    if isinstance(f, Member):
        return Member(sub_term(f.left), sub_term(f.right))
    if isinstance(f, Eq):
        return Eq(sub_term(f.left), sub_term(f.right))
    if isinstance(f, Pred):
        return Pred(f.name, tuple(sub_term(a) for a in f.args))
    if isinstance(f, Not):
        return Not(subst_closed(f.body, assignment))
    if isinstance(f, And):
        return And(subst_closed(f.left, assignment), subst_closed(f.right, assignment))
    if isinstance(f, Exists):
        inner = {k: v for k, v in assignment.items() if k != f.var}
        return Exists(f.var, subst_closed(f.body, inner))
    raise TypeError(f"not a formula: {f!r}")


# ---------------------------------------------------------------------------
# Parser.

_TOKEN = re.compile(
    r"\s*(?:(?P<lparen>\()|(?P<rparen>\))|(?P<not>!)|(?P<and>&)|(?P<or>\|(?!\|))"
    r"|(?P<iff><->)|(?P<imp>->)|(?P<edge><\|)|(?P<eq>=)|(?P<dot>\.)|(?P<comma>,)"
    r"|(?P<const>#\d+)|(?P<ident>[A-Za-z][A-Za-z0-9_]*))"
)


def _tokenize(text: str) -> list[tuple[str, str, int]]:
    tokens = []
    pos = 0
    while pos < len(text):
        m = _TOKEN.match(text, pos)
        if not m or m.end() == m.start():
            stripped = text[pos:].lstrip()
            if not stripped:
                break
            raise ParseError(f"unexpected character {stripped[0]!r}", pos)
        kind = m.lastgroup
        tokens.append((kind, m.group(kind), m.start(kind)))
        pos = m.end()
    return tokens


class _Parser:
    def __init__(self, text: str, signature: Optional[Mapping[str, int]]):
        self.text = text
        self.tokens = _tokenize(text)
        self.pos = 0
        self.signature = signature

    def peek(self):
        return self.tokens[self.pos] if self.pos < len(self.tokens) else None

    def next(self, expected: Optional[str] = None):
        tok = self.peek()
        if tok is None:
            raise ParseError("unexpected end of input", len(self.text))
        if expected is not None and tok[0] != expected:
            raise ParseError(f"expected {expected}, found {tok[1]!r}", tok[2])
        self.pos += 1
        return tok

    def parse(self) -> Formula:
        f = self.formula()
        tok = self.peek()
        if tok is not None:
            raise ParseError(f"unexpected trailing {tok[1]!r}", tok[2])
        return f

    # precedence: <-> weakest, then ->, |, &, unary
    def formula(self) -> Formula:
        left = self.implication()
        tok = self.peek()
        if tok and tok[0] == "iff":
            self.next()
            right = self.formula()
            return And(Not(And(left, Not(right))), Not(And(right, Not(left))))
        return left

    def implication(self) -> Formula:
        left = self.disjunction()
        tok = self.peek()
        if tok and tok[0] == "imp":
            self.next()
            right = self.implication()
            return Not(And(left, Not(right)))
        return left

    def disjunction(self) -> Formula:
        f = self.conjunction()
        while True:
            tok = self.peek()
            if tok and tok[0] == "or":
                self.next()
                g = self.conjunction()
                f = Not(And(Not(f), Not(g)))
            else:
                return f

    def conjunction(self) -> Formula:
        f = self.unary()
        while True:
            tok = self.peek()
            if tok and tok[0] == "and":
                self.next()
                f = And(f, self.unary())
            else:
                return f

    def unary(self) -> Formula:
        tok = self.peek()
        if tok is None:
            raise ParseError("unexpected end of input", len(self.text))
        kind, value, at = tok
        if kind == "not":
            self.next()
            return Not(self.unary())
        if kind == "ident" and value[0] in "EA":
            follow = self.tokens[self.pos + 1] if self.pos + 1 < len(self.tokens) else None
            var = value[1:]
            spaced = False
            if not var and follow and follow[0] == "ident" and follow[1][0].islower():
                var, spaced = follow[1], True
            if var and var[0].islower():
                dot_at = self.pos + (2 if spaced else 1)
                if dot_at < len(self.tokens) and self.tokens[dot_at][0] == "dot":
                    self.pos = dot_at + 1
                    if var == "in":
                        raise ParseError("'in' is reserved", at)
                    body = self.formula()
                    if value[0] == "E":
                        return Exists(var, body)
                    return Not(Exists(var, Not(body)))
        return self.atom()

    def atom(self) -> Formula:
        tok = self.next()
        kind, value, at = tok
        if kind == "lparen":
            f = self.formula()
            self.next("rparen")
            return f
        if kind == "ident" and value[0].isupper():
            name = value
            self.next("lparen")
            args = [self.term()]
            while self.peek() and self.peek()[0] == "comma":
                self.next()
                args.append(self.term())
            self.next("rparen")
            self._check_signature(name, len(args), at)
            return Pred(name, tuple(args))
        # infix atom: term REL term
        self.pos -= 1
        left = self.term()
        rel = self.next()
        if rel[0] == "ident" and rel[1] == "in":
            return Member(left, self.term())
        if rel[0] == "eq":
            return Eq(left, self.term())
        if rel[0] == "edge":
            self._check_signature(EDGE_SYMBOL, 2, rel[2])
            return Pred(EDGE_SYMBOL, (left, self.term()))
        raise ParseError(f"expected relation, found {rel[1]!r}", rel[2])

    def term(self) -> Term:
        tok = self.next()
        kind, value, at = tok
        if kind == "const":
            return Const(int(value[1:]))
        if kind == "ident" and value[0].islower():
            if value == "in":
                raise ParseError("'in' is reserved", at)
            return Var(value)
        raise ParseError(f"expected term, found {value!r}", at)

    def _check_signature(self, name: str, arity: int, at: int) -> None:
        if self.signature is None:
            return
        if name not in self.signature:
            raise ParseError(f"unknown predicate symbol {name!r}", at)
        if self.signature[name] != arity:
            raise ParseError(
                f"predicate {name!r} expects arity {self.signature[name]}, got {arity}",
                at,
            )


def parse_formula(text: str, signature: Optional[Mapping[str, int]] = None) -> Formula:
    """Parse the documented grammar; sugar is desugared to {!, &, E}."""
    return _Parser(text, signature).parse()


# ---------------------------------------------------------------------------
# Instances, structures, evaluation.


@dataclass(frozen=True)
class FormulaInstance:
    """A formula together with an assignment of its free variables."""

    formula: Formula
    bindings: tuple[tuple[str, int], ...]

    def __post_init__(self):
        object.__setattr__(self, "_hash", hash((self.formula, self.bindings)))

    def __hash__(self):
        return self._hash

    @property
    def assignment(self) -> dict[str, int]:
        return dict(self.bindings)

    def __str__(self) -> str:
        return print_instance(self)


def instance(formula: Formula, assignment: Optional[Mapping[str, int]] = None) -> FormulaInstance:
    """Build an instance, restricting the assignment to the free variables."""
    assignment = dict(assignment or {})
    fv = free_vars(formula)
    missing = fv - set(assignment)
    if missing:
        raise MalformedInstanceError(
            f"assignment misses free variables {sorted(missing)} of {to_text(formula)}"
        )
    bindings = tuple(sorted((v, int(assignment[v])) for v in fv))
    return FormulaInstance(formula, bindings)


def parse_instance(text: str, signature: Optional[Mapping[str, int]] = None) -> FormulaInstance:
    """Parse a closed formula as an instance with empty assignment."""
    f = parse_formula(text, signature)
    return instance(f, {})


def print_instance(inst: FormulaInstance) -> str:
    """Closed rendering with the assignment substituted as constants."""
    return to_text(subst_closed(inst.formula, inst.assignment))


def sub_instance(inst: FormulaInstance, sub: Formula) -> FormulaInstance:
    """Instance of a subformula under the same assignment."""
    return instance(sub, inst.assignment)


def instantiate(inst: FormulaInstance, var: str, code: int) -> FormulaInstance:
    """Instance of an Exists body at a chosen witness element."""
    f = inst.formula
    if not isinstance(f, Exists):
        raise MalformedInstanceError(f"not an existential: {print_instance(inst)}")
    assignment = inst.assignment
    assignment[var] = int(code)
    return instance(f.body, assignment)


@dataclass(frozen=True)
class Structure:
    """A finite structure: a universe plus named class predicates."""

    universe: Universe
    predicates: Mapping[str, frozenset] = field(default_factory=dict)

    def __post_init__(self):
        fixed = {}
        for name, rel in self.predicates.items():
            tuples = frozenset(tuple(int(x) for x in t) for t in rel)
            arities = {len(t) for t in tuples}
            if len(arities) > 1:
                raise SignatureError(f"predicate {name!r} mixes arities {arities}")
            if arities and arities.pop() not in (1, 2):
                raise SignatureError(f"predicate {name!r} must have arity 1 or 2")
            for t in tuples:
                for x in t:
                    if x not in self.universe:
                        raise SignatureError(
                            f"predicate {name!r} tuple {t} leaves the universe"
                        )
            fixed[name] = tuples
        object.__setattr__(self, "predicates", fixed)

    def with_predicate(self, name: str, rel: Iterable) -> "Structure":
        preds = dict(self.predicates)
        preds[name] = frozenset(tuple(int(x) for x in t) for t in rel)
        return Structure(self.universe, preds)

    def signature(self) -> dict[str, int]:
        sig = {}
        for name, rel in self.predicates.items():
            sig[name] = len(next(iter(rel))) if rel else 2
        return sig


def eval_formula(M: Structure, f: Formula, env: Mapping[str, int]) -> bool:
    """Tarskian truth by structural recursion; Exists scans the universe."""

    def term_val(t: Term) -> int:
        if isinstance(t, Const):
            if t.code not in M.universe:
                raise SignatureError(f"constant #{t.code} outside the universe")
            return t.code
        if t.name not in env:
            raise MalformedInstanceError(f"unbound variable {t.name!r}")
        return env[t.name]

    if isinstance(f, Member):
        return member(term_val(f.left), term_val(f.right))
    if isinstance(f, Eq):
        return term_val(f.left) == term_val(f.right)
    if isinstance(f, Pred):
        if f.name not in M.predicates:
            raise SignatureError(f"unknown predicate symbol {f.name!r}")
        return tuple(term_val(a) for a in f.args) in M.predicates[f.name]
    if isinstance(f, Not):
        return not eval_formula(M, f.body, env)
    if isinstance(f, And):
        return eval_formula(M, f.left, env) and eval_formula(M, f.right, env)
    if isinstance(f, Exists):
        env2 = dict(env)
        for b in M.universe.elements:
            env2[f.var] = b
            if eval_formula(M, f.body, env2):
                return True
        return False
    raise TypeError(f"not a formula: {f!r}")


def eval_instance(M: Structure, inst: FormulaInstance) -> bool:
    return eval_formula(M, inst.formula, inst.assignment)


def skolem_witness(M: Structure, inst: FormulaInstance) -> int:
    """Global-order-least witness of a true existential instance."""
    f = inst.formula
    if not isinstance(f, Exists):
        raise MalformedInstanceError(f"not an existential: {print_instance(inst)}")
    env = inst.assignment
    for b in M.universe.elements:
        env[f.var] = b
        if eval_formula(M, f.body, env):
            return b
    raise NoWitnessError(f"no witness for {print_instance(inst)}")


# ---------------------------------------------------------------------------
# Satisfaction classes.


@dataclass(frozen=True)
class SatisfactionClass:
    """Instances marked true; absence within the closure means marked false."""

    entries: frozenset[FormulaInstance]
    closure: Optional[frozenset[FormulaInstance]] = None

    def __post_init__(self):
        object.__setattr__(self, "entries", frozenset(self.entries))
        if self.closure is not None:
            object.__setattr__(self, "closure", frozenset(self.closure))

    def holds(self, inst: FormulaInstance) -> bool:
        return inst in self.entries

    def verdict(self, inst: FormulaInstance) -> Optional[bool]:
        """True/False within the closure, None when unqueried."""
        if inst in self.entries:
            return True
        if self.closure is None or inst in self.closure:
            return False
        return None

    def marks(self, inst: FormulaInstance) -> bool:
        v = self.verdict(inst)
        if v is None:
            raise CoverageError(f"instance outside closure: {print_instance(inst)}")
        return v


def serialize_class(S: SatisfactionClass, closure: Optional[Iterable[FormulaInstance]] = None) -> str:
    """Sorted ``T``/``F`` lines of printed instances, for textual diffing."""
    insts = closure if closure is not None else S.closure
    if insts is None:
        insts = S.entries
    lines = sorted(
        ("T " if S.holds(i) else "F ") + print_instance(i) for i in insts
    )
    return "\n".join(lines) + ("\n" if lines else "")


def build_truth_predicate(M: Structure, instances: Iterable[FormulaInstance]) -> SatisfactionClass:
    """Mark exactly the listed instances that evaluate true in M.

    Instances are processed in formula-size order: the inner omega of the
    Tarskian recursion, though plain evaluation does not depend on it.
    """
    insts = sorted(set(instances), key=lambda i: (size(i.formula), print_instance(i)))
    entries = frozenset(i for i in insts if eval_instance(M, i))
    return SatisfactionClass(entries, frozenset(insts))


@dataclass(frozen=True)
class TarskiViolation:
    kind: str
    inst: FormulaInstance
    detail: str

    def __str__(self) -> str:
        return f"[{self.kind}] {print_instance(self.inst)}: {self.detail}"


def tarski_check(
    M: Structure,
    S: SatisfactionClass,
    closure: Iterable[FormulaInstance],
) -> list[TarskiViolation]:
    """Audit the Tarskian conditions on every closure instance.

    Sub-instance marks are read from S directly (absence = marked false),
    mirroring the recursive truth conditions clause by clause.
    """
    violations = []
    for inst in closure:
        f = inst.formula
        marked = S.holds(inst)
        if isinstance(f, ATOMIC_KINDS):
            actual = eval_instance(M, inst)
            if marked != actual:
                violations.append(
                    TarskiViolation(
                        "atomic", inst, f"marked {marked}, structure says {actual}"
                    )
                )
        elif isinstance(f, Not):
            sub = sub_instance(inst, f.body)
            if marked == S.holds(sub):
                violations.append(
                    TarskiViolation(
                        "negation", inst, f"same mark as {print_instance(sub)}"
                    )
                )
        elif isinstance(f, And):
            both = S.holds(sub_instance(inst, f.left)) and S.holds(
                sub_instance(inst, f.right)
            )
            if marked != both:
                violations.append(
                    TarskiViolation(
                        "conjunction", inst, f"marked {marked}, conjuncts give {both}"
                    )
                )
        elif isinstance(f, Exists):
            some = any(
                S.holds(instantiate(inst, f.var, b)) for b in M.universe.elements
            )
            if marked != some:
                violations.append(
                    TarskiViolation(
                        "quantifier", inst, f"marked {marked}, instantiations give {some}"
                    )
                )
        else:
            raise TypeError(f"not a formula: {f!r}")
    return violations


# ---------------------------------------------------------------------------
# Deterministic enumeration and seeded sampling of formulas.


def _terms(universe: Universe, var_pool: Sequence[str], cap: Optional[int] = None) -> list[Term]:
    codes = list(universe.elements)
    if cap is not None:
        codes = codes[:cap]
    return [Const(c) for c in codes] + [Var(v) for v in var_pool]


def enumerate_formulas(
    universe: Universe,
    max_size: int,
    var_pool: Sequence[str] = ("x", "y"),
    signature: Optional[Mapping[str, int]] = None,
    const_cap: Optional[int] = None,
) -> list[Formula]:
    """All formulas of size <= max_size over the pool, deterministic order.

    Quantifiers bind pool variables without shadowing.
    """
    terms = _terms(universe, var_pool, const_cap)
    atoms: list[Formula] = []
    for t1 in terms:
        for t2 in terms:
            atoms.append(Member(t1, t2))
            atoms.append(Eq(t1, t2))
    if signature:
        for name in sorted(signature):
            arity = signature[name]
            if arity == 1:
                atoms.extend(Pred(name, (t,)) for t in terms)
            else:
                atoms.extend(Pred(name, (t1, t2)) for t1 in terms for t2 in terms)
    by_size: dict[int, list[Formula]] = {}
    for a in atoms:
        by_size.setdefault(size(a), []).append(a)
    smallest_atom = min(by_size) if by_size else 0
    for s in range(smallest_atom + 1, max_size + 1):
        bucket = by_size.setdefault(s, [])
        for f in by_size.get(s - 1, []):
            bucket.append(Not(f))
        for v in var_pool:
            for f in by_size.get(s - 1, []):
                if not any(
                    isinstance(g, Exists) and g.var == v for g in _subformulas(f)
                ):
                    bucket.append(Exists(v, f))
        for s1 in range(smallest_atom, s - smallest_atom):
            for f in by_size.get(s1, []):
                for g in by_size.get(s - 1 - s1, []):
                    bucket.append(And(f, g))
    out = []
    for s in sorted(by_size):
        if s <= max_size:
            out.extend(by_size[s])
    return out


def _subformulas(f: Formula) -> Iterator[Formula]:
    yield f
    if isinstance(f, Not):
        yield from _subformulas(f.body)
    elif isinstance(f, And):
        yield from _subformulas(f.left)
        yield from _subformulas(f.right)
    elif isinstance(f, Exists):
        yield from _subformulas(f.body)


def enumerate_instances(
    M: Structure,
    max_size: int,
    var_pool: Sequence[str] = ("x", "y"),
    const_cap: Optional[int] = None,
) -> list[FormulaInstance]:
    """Every size-bounded formula with every assignment of its free variables."""
    out = []
    for f in enumerate_formulas(
        M.universe, max_size, var_pool, M.signature() or None, const_cap
    ):
        fv = sorted(free_vars(f))
        if not fv:
            out.append(instance(f, {}))
            continue
        assignments = [{}]
        for v in fv:
            assignments = [
                {**a, v: b} for a in assignments for b in M.universe.elements
            ]
        out.extend(instance(f, a) for a in assignments)
    return out


def random_formula(
    rng,
    universe: Universe,
    max_size: int,
    var_pool: Sequence[str] = ("x", "y", "z"),
    signature: Optional[Mapping[str, int]] = None,
    bound_only: bool = False,
) -> Formula:
    """Seeded random formula of size <= max_size."""

    def gen(budget: int, scope: tuple[str, ...]) -> Formula:
        choices = ["atom"]
        if budget >= 4:
            choices += ["not", "exists"]
        if budget >= 7:
            choices += ["and", "and"]
        kind = rng.choice(choices)
        if kind == "atom":
            return gen_atom(scope)
        if kind == "not":
            return Not(gen(budget - 1, scope))
        if kind == "exists":
            unused = [v for v in var_pool if v not in scope]
            if not unused:
                return gen_atom(scope)
            v = rng.choice(unused)
            return Exists(v, gen(budget - 1, scope + (v,)))
        left_budget = rng.randint(3, budget - 4)
        return And(gen(left_budget, scope), gen(budget - 1 - left_budget, scope))

    def gen_term(scope: tuple[str, ...]) -> Term:
        vs = scope if bound_only else tuple(dict.fromkeys(tuple(var_pool) + scope))
        if vs and rng.random() < 0.5:
            return Var(rng.choice(vs))
        return Const(rng.randrange(universe.size))

    def gen_atom(scope: tuple[str, ...]) -> Formula:
        names = sorted(signature) if signature else []
        kinds = ["in", "eq"] + (["pred"] if names else [])
        k = rng.choice(kinds)
        if k == "pred":
            name = rng.choice(names)
            arity = signature[name]
            return Pred(name, tuple(gen_term(scope) for _ in range(arity)))
        t1, t2 = gen_term(scope), gen_term(scope)
        return Member(t1, t2) if k == "in" else Eq(t1, t2)

    return gen(max(3, max_size), ())


def random_instance(
    rng,
    M: Structure,
    max_size: int,
    var_pool: Sequence[str] = ("x", "y", "z"),
) -> FormulaInstance:
    f = random_formula(rng, M.universe, max_size, var_pool, M.signature() or None)
    assignment = {v: rng.randrange(M.universe.size) for v in sorted(free_vars(f))}
    return instance(f, assignment)
