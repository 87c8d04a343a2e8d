"""First-order recursion along finite well-founded relations.

A recursion rule is a formula with designated free variables (x, i) and a
binary predicate symbol F.  Solving proceeds in a topological order of the
relation: slice b collects the x satisfying the rule when F denotes the
partial solution restricted to the strict predecessors of b.  Reads of F
are thereby predecessor-relativized exactly as in the recursion game's
F(j,y) /\\ j <| i substitution, so unguarded reads never see later slices.

The module also carries the relation-reduction chain (transitive closure,
descending-sequence tree, Kleene-Brouwer linearization) with solution
transports that preserve slices exactly, and iterated truth predicates
along finite well-orders.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from functools import cmp_to_key
from typing import Iterable, Mapping, Optional, Sequence

from .errors import InvariantError, ResourceBoundError, SignatureError
from .logic import (
    And,
    EDGE_SYMBOL,
    Exists,
    Formula,
    FormulaInstance,
    Member,
    Eq,
    Not,
    Pred,
    SatisfactionClass,
    Structure,
    Var,
    build_truth_predicate,
    eval_formula,
    free_vars,
    instance,
    parse_formula,
    print_instance,
    to_text,
)
from .universe import (
    Universe,
    WellFoundedRelation,
    WellOrder,
    check_wellfounded,
    topological_order,
)

DEFAULT_NODE_BUDGET = 100_000


# ---------------------------------------------------------------------------
# Recursion rules and solutions.


@dataclass(frozen=True)
class RecursionRule:
    """Rule formula phi(x, i, F) with reserved symbols F and <|."""

    formula: Formula
    x_var: str = "x"
    i_var: str = "i"
    f_symbol: str = "F"

    def __post_init__(self):
        fv = free_vars(self.formula)
        extra = fv - {self.x_var, self.i_var}
        if extra:
            raise SignatureError(
                f"rule has stray free variables {sorted(extra)}"
            )
        for atom in _pred_atoms(self.formula, self.f_symbol):
            if len(atom.args) != 2:
                raise SignatureError(
                    f"{self.f_symbol} must be binary, found arity {len(atom.args)}"
                )

    @staticmethod
    def parse(text: str, x_var: str = "x", i_var: str = "i") -> "RecursionRule":
        return RecursionRule(parse_formula(text), x_var, i_var)

    def relativized(self) -> Formula:
        """F(j, y) becomes (F(j, y) & (j <| i)): the slice-i restriction."""
        return _relativize(self.formula, self.f_symbol, Var(self.i_var))

    def instance_formula(self) -> Formula:
        """The recursion obligation F(i, x) <-> phi(x, i, F|i), desugared."""
        head = Pred(self.f_symbol, (Var(self.i_var), Var(self.x_var)))
        body = self.relativized()
        return And(
            Not(And(head, Not(body))),
            Not(And(body, Not(head))),
        )


def _pred_atoms(f: Formula, name: str) -> list[Pred]:
    if isinstance(f, Pred):
        return [f] if f.name == name else []
    if isinstance(f, Not):
        return _pred_atoms(f.body, name)
    if isinstance(f, And):
        return _pred_atoms(f.left, name) + _pred_atoms(f.right, name)
    if isinstance(f, Exists):
        return _pred_atoms(f.body, name)
    return []


def _relativize(f: Formula, f_symbol: str, bound) -> Formula:
    if isinstance(f, Pred):
        if f.name == f_symbol:
            return And(f, Pred(EDGE_SYMBOL, (f.args[0], bound)))
        return f
    if isinstance(f, Not):
        return Not(_relativize(f.body, f_symbol, bound))
    if isinstance(f, And):
        return And(
            _relativize(f.left, f_symbol, bound),
            _relativize(f.right, f_symbol, bound),
        )
    if isinstance(f, Exists):
        return Exists(f.var, _relativize(f.body, f_symbol, bound))
    return f


@dataclass(frozen=True)
class Solution:
    """A binary class F: pairs (i, x) with i in the carrier, x in the universe."""

    pairs: frozenset

    def __post_init__(self):
        object.__setattr__(self, "pairs", frozenset(self.pairs))

    def slice(self, i) -> frozenset:
        return frozenset(x for j, x in self.pairs if j == i)

    def restrict(self, indices: Iterable) -> frozenset:
        idx = set(indices)
        return frozenset((j, x) for j, x in self.pairs if j in idx)

    def serialize(self) -> str:
        lines = sorted(f"{i} {x}" for i, x in self.pairs)
        return "\n".join(lines) + ("\n" if lines else "")

    def __len__(self):
        return len(self.pairs)


def _recursion_structure(M: Structure, rel: WellFoundedRelation, rule: RecursionRule) -> Structure:
    """Install <| (unless the caller already bound it) for rule evaluation."""
    if EDGE_SYMBOL in M.predicates:
        return M
    return M.with_predicate(EDGE_SYMBOL, rel.edges)


def _slice(
    M: Structure,
    rule: RecursionRule,
    b,
    partial_pairs: frozenset,
    value_domain: Sequence[int],
) -> frozenset:
    Mb = M.with_predicate(rule.f_symbol, partial_pairs)
    env = {rule.i_var: int(b)}
    out = set()
    for x in value_domain:
        env[rule.x_var] = x
        if eval_formula(Mb, rule.formula, env):
            out.add(x)
    return frozenset(out)


def etr_solve(
    M: Structure,
    rel: WellFoundedRelation,
    rule: RecursionRule,
    value_domain: Optional[Sequence[int]] = None,
    order: Optional[Sequence] = None,
) -> Solution:
    """The unique solution of the recursion, by rank-stratified evaluation.

    ``order`` may supply any topological order of the relation; the result
    does not depend on the choice.  ``value_domain`` restricts the x range
    (defaults to the whole universe).
    """
    if not check_wellfounded(rel):
        raise InvariantError("relation is not well-founded (cycle present)")
    for i in rel.carrier:
        if not isinstance(i, int) or i not in M.universe:
            raise SignatureError(f"carrier element {i!r} is not a universe element")
    domain = list(value_domain) if value_domain is not None else list(M.universe.elements)
    Mr = _recursion_structure(M, rel, rule)
    preds = rel.predecessor_map()
    if order is None:
        order = topological_order(rel)
    pairs: set = set()
    slices: dict = {}
    for b in order:
        restricted = frozenset(
            (j, x) for j in preds[b] for x in slices.get(j, ())
        )
        sl = _slice(Mr, rule, b, restricted, domain)
        slices[b] = sl
        pairs.update((b, x) for x in sl)
    return Solution(frozenset(pairs))


def check_solution(
    M: Structure,
    rel: WellFoundedRelation,
    rule: RecursionRule,
    F: Solution,
    value_domain: Optional[Sequence[int]] = None,
) -> bool:
    """True iff every slice equation F_b = {x : phi(x, b, F|b)} holds exactly."""
    domain = list(value_domain) if value_domain is not None else list(M.universe.elements)
    Mr = _recursion_structure(M, rel, rule)
    preds = rel.predecessor_map()
    for b in rel.carrier:
        restricted = frozenset(
            (j, x) for j, x in F.pairs if j in preds[b]
        )
        expected = _slice(Mr, rule, b, restricted, domain)
        if F.slice(b) != expected:
            return False
    stray = {i for i, _ in F.pairs} - rel.carrier
    return not stray


# ---------------------------------------------------------------------------
# The relation-reduction chain.


def transitive_closure(rel: WellFoundedRelation) -> WellFoundedRelation:
    """Smallest transitive superset of the edges; preserves well-foundedness."""
    succs: dict = {n: set() for n in rel.carrier}
    for a, b in rel.edges:
        succs[a].add(b)
    closed: dict = {}

    def reach(n) -> set:
        if n in closed:
            return closed[n]
        acc = set()
        for b in succs[n]:
            acc.add(b)
            acc |= reach(b)
        closed[n] = acc
        return acc

    if not check_wellfounded(rel):
        raise InvariantError("relation is not well-founded (cycle present)")
    edges = set()
    for a in rel.carrier:
        for b in reach(a):
            edges.add((a, b))
    return WellFoundedRelation(rel.carrier, frozenset(edges))


def descending_tree(
    po: WellFoundedRelation, node_budget: int = DEFAULT_NODE_BUDGET
) -> WellFoundedRelation:
    """The tree of finite strictly descending sequences, ordered by extension.

    Nodes are tuples (the empty sequence is the root); (s, t) is an edge
    when s properly extends t, so longer sequences come earlier.
    """
    below: dict = {n: [] for n in po.carrier}
    for a, b in po.edges:
        below[b].append(a)
    for n in below:
        below[n].sort()
    nodes: list[tuple] = [()]
    frontier: list[tuple] = [(n,) for n in sorted(po.carrier)]
    nodes.extend(frontier)
    while frontier:
        if len(nodes) > node_budget:
            raise ResourceBoundError(
                f"descending tree exceeds node budget {node_budget}"
            )
        s = frontier.pop(0)
        for a in below[s[-1]]:
            t = s + (a,)
            nodes.append(t)
            frontier.append(t)
    if len(nodes) > node_budget:
        raise ResourceBoundError(f"descending tree exceeds node budget {node_budget}")
    edges = set()
    for s in nodes:
        for k in range(len(s)):
            edges.add((s, s[:k]))
    return WellFoundedRelation(frozenset(nodes), frozenset(edges))


def kb_compare(s: tuple, t: tuple) -> int:
    """Kleene-Brouwer order: extensions first, else the first disagreement
    decides by the global well-order (numeric code order)."""
    if s == t:
        return 0
    for a, b in zip(s, t):
        if a != b:
            return -1 if a < b else 1
    return 1 if len(s) < len(t) else -1


def kleene_brouwer(tree, universe: Universe) -> WellOrder:
    """Linearize a tree of sequences into a well-order by the KB comparison."""
    if isinstance(tree, WellFoundedRelation):
        nodes = list(tree.carrier)
    else:
        nodes = list(tree)
    for s in nodes:
        if not isinstance(s, tuple):
            raise InvariantError(f"tree node {s!r} is not a sequence")
        for a in s:
            if a not in universe:
                raise InvariantError(f"sequence entry {a!r} outside the universe")
    ordered = sorted(nodes, key=cmp_to_key(kb_compare))
    return WellOrder(tuple(ordered))


# -- solution transports along the chain


def guarded_rule(rule: RecursionRule, direct_symbol: str) -> RecursionRule:
    """Guard every F read by the original direct relation, kept as a
    structure predicate, so the recursion transfers to a coarser order."""
    guarded = _guard(rule.formula, rule.f_symbol, direct_symbol, Var(rule.i_var))
    return RecursionRule(guarded, rule.x_var, rule.i_var, rule.f_symbol)


def _guard(f: Formula, f_symbol: str, pred_symbol: str, bound) -> Formula:
    if isinstance(f, Pred):
        if f.name == f_symbol:
            return And(f, Pred(pred_symbol, (f.args[0], bound)))
        return f
    if isinstance(f, Not):
        return Not(_guard(f.body, f_symbol, pred_symbol, bound))
    if isinstance(f, And):
        return And(
            _guard(f.left, f_symbol, pred_symbol, bound),
            _guard(f.right, f_symbol, pred_symbol, bound),
        )
    if isinstance(f, Exists):
        return Exists(f.var, _guard(f.body, f_symbol, pred_symbol, bound))
    return f

DIRECT_SYMBOL = "D"


def solve_via_transitive_closure(
    M: Structure,
    rel: WellFoundedRelation,
    rule: RecursionRule,
    value_domain: Optional[Sequence[int]] = None,
) -> Solution:
    """Run the recursion over the transitive closure; slices agree exactly
    with the direct solution."""
    po = transitive_closure(rel)
    M2 = M.with_predicate(DIRECT_SYMBOL, rel.edges)
    if EDGE_SYMBOL not in M2.predicates:
        M2 = M2.with_predicate(EDGE_SYMBOL, rel.edges)
    rule2 = guarded_rule(rule, DIRECT_SYMBOL)
    return etr_solve(M2, po, rule2, value_domain)


def _sequence_solve(
    M: Structure,
    rel: WellFoundedRelation,
    rule: RecursionRule,
    seq_nodes: Sequence[tuple],
    process_order: Sequence[tuple],
    value_domain: Optional[Sequence[int]],
) -> dict:
    """Shared engine for the tree and Kleene-Brouwer transports.

    Each nonempty sequence s computes the original slice at its last entry,
    reading the collapsed pairs of its proper extensions; the empty root
    carries no slice.  ``process_order`` must put every proper extension of
    a node before the node itself.
    """
    domain = list(value_domain) if value_domain is not None else list(M.universe.elements)
    M2 = M.with_predicate(DIRECT_SYMBOL, rel.edges)
    if EDGE_SYMBOL not in M2.predicates:
        M2 = M2.with_predicate(EDGE_SYMBOL, rel.edges)
    rule2 = guarded_rule(rule, DIRECT_SYMBOL)
    node_set = set(seq_nodes)
    slices: dict = {}
    collapsed: dict = {}
    for s in process_order:
        if s == ():
            continue
        ext_pairs = set()
        for t in node_set:
            if len(t) > len(s) and t[: len(s)] == s:
                ext_pairs.update((t[-1], x) for x in slices.get(t, ()))
        collapsed[s] = frozenset(ext_pairs)
        slices[s] = _slice(M2, rule2, s[-1], collapsed[s], domain)
    return slices


def solve_via_descending_tree(
    M: Structure,
    rel: WellFoundedRelation,
    rule: RecursionRule,
    value_domain: Optional[Sequence[int]] = None,
    node_budget: int = DEFAULT_NODE_BUDGET,
) -> Solution:
    """Transport through the descending-sequence tree of the transitive
    closure and read the answer off the singleton sequences."""
    po = transitive_closure(rel)
    tree = descending_tree(po, node_budget)
    nodes = sorted(tree.carrier, key=lambda s: (-len(s), s))
    slices = _sequence_solve(M, rel, rule, nodes, nodes, value_domain)
    return _project_singletons(slices, rel)


def solve_via_kleene_brouwer(
    M: Structure,
    rel: WellFoundedRelation,
    rule: RecursionRule,
    value_domain: Optional[Sequence[int]] = None,
    node_budget: int = DEFAULT_NODE_BUDGET,
) -> tuple[Solution, WellOrder]:
    """Transport all the way to the Kleene-Brouwer well-order; the linear
    processing order refines the tree order, so slices agree exactly."""
    po = transitive_closure(rel)
    tree = descending_tree(po, node_budget)
    kb = kleene_brouwer(tree, M.universe)
    slices = _sequence_solve(M, rel, rule, kb.elements, kb.elements, value_domain)
    return _project_singletons(slices, rel), kb


def _project_singletons(slices: dict, rel: WellFoundedRelation) -> Solution:
    pairs = set()
    for i in rel.carrier:
        for x in slices.get((i,), ()):
            pairs.add((i, x))
    return Solution(frozenset(pairs))


# ---------------------------------------------------------------------------
# Iterated truth predicates along a finite well-order.


@dataclass(frozen=True)
class IteratedTruthPredicate:
    """Slices of truth indexed by a well-order, each over the structure
    extended by the strictly earlier slices."""

    order: WellOrder
    slices: Mapping
    closure: tuple
    coding: Mapping[int, FormulaInstance]
    truth_symbol: str = "T"

    @property
    def pairs(self) -> frozenset:
        return frozenset(
            (i, inst) for i in self.order for inst in self.slices[i].entries
        )

    def slice(self, i) -> SatisfactionClass:
        return self.slices[i]

    def truth_relation_before(self, i) -> frozenset:
        """The predicate T|i: coded pairs (j, c) true at stages j before i."""
        cut = self.order.index(i)
        rel = set()
        for j in self.order.elements[:cut]:
            entries = self.slices[j].entries
            for code, inst in self.coding.items():
                if inst in entries:
                    rel.add((j, code))
        return frozenset(rel)

    def structure_at(self, base: Structure, i) -> Structure:
        """The stage-i structure: base extended by the earlier slices."""
        return base.with_predicate(self.truth_symbol, self.truth_relation_before(i))


def _structure_at_stage(
    M: Structure,
    order: WellOrder,
    slices: Mapping,
    coding: Mapping[int, FormulaInstance],
    truth_symbol: str,
    i,
) -> Structure:
    cut = order.index(i)
    rel = set()
    for j in order.elements[:cut]:
        entries = slices[j].entries
        for code, inst in coding.items():
            if inst in entries:
                rel.add((j, code))
    return M.with_predicate(truth_symbol, rel)


def iterated_truth(
    M: Structure,
    order: WellOrder,
    Z: Optional[Mapping[str, Iterable]] = None,
    closure: Sequence[FormulaInstance] = (),
    coding: Optional[Mapping[int, FormulaInstance]] = None,
    truth_symbol: str = "T",
) -> IteratedTruthPredicate:
    """Build truth slices stage by stage along the well-order.

    The object language sees the earlier stages through the binary symbol
    ``truth_symbol``: T(j, c) holds when stage j marked true the instance
    that the (declared, finite) coding assigns to universe element c.  The
    inner omega of the recursion is the formula-size stratification inside
    build_truth_predicate.
    """
    base = M
    if Z:
        for name in sorted(Z):
            base = base.with_predicate(name, Z[name])
    coding = dict(coding or {})
    for c, inst in coding.items():
        if c not in M.universe:
            raise SignatureError(f"coding key {c} outside the universe")
    for i in order:
        if not isinstance(i, int) or i not in M.universe:
            raise SignatureError(f"stage index {i!r} is not a universe element")
    carrier = set(order.elements)
    for inst in closure:
        for atom in _pred_atoms(inst.formula, truth_symbol):
            first = atom.args[0]
            if hasattr(first, "code") and first.code not in carrier:
                raise SignatureError(
                    f"closure references stage {first.code} outside the well-order"
                )
    slices: dict = {}
    for i in order:
        Mi = _structure_at_stage(base, order, slices, coding, truth_symbol, i)
        slices[i] = build_truth_predicate(Mi, closure)
    return IteratedTruthPredicate(order, slices, tuple(closure), coding, truth_symbol)
