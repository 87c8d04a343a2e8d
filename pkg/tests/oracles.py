"""Independent oracles the library is tested against.

Everything here is deliberately written as a separate code path from the
package: direct transcriptions, brute-force enumerations, and bottom-up
dynamic programs.
"""

from __future__ import annotations

from hfgames.games import Game, other_player, turn
from hfgames.logic import And, Eq, Exists, Member, Not, Pred, Structure
from hfgames.universe import WellFoundedRelation


def tarski_eval(M: Structure, formula, env: dict) -> bool:
    """Direct transcription of the five Tarskian clauses, one per branch."""
    def val(t):
        if hasattr(t, "code"):
            return t.code
        return env[t.name]

    if isinstance(formula, Member):
        return (val(formula.right) >> val(formula.left)) & 1 == 1
    if isinstance(formula, Eq):
        return val(formula.left) == val(formula.right)
    if isinstance(formula, Pred):
        return tuple(val(a) for a in formula.args) in M.predicates[formula.name]
    if isinstance(formula, Not):
        return not tarski_eval(M, formula.body, env)
    if isinstance(formula, And):
        return tarski_eval(M, formula.left, env) and tarski_eval(M, formula.right, env)
    if isinstance(formula, Exists):
        for b in M.universe.elements:
            if tarski_eval(M, formula.body, {**env, formula.var: b}):
                return True
        return False
    raise AssertionError(f"unknown formula {formula!r}")


def enumerate_positions(G: Game) -> list[tuple]:
    """Every position of the truncated game tree, root included."""
    out = []
    frontier = [()]
    while frontier:
        p = frontier.pop()
        out.append(p)
        if G.decide(p) is None and len(p) < G.play_cap:
            frontier.extend(p + (x,) for x in G.moves)
    return out


def minimax_winner_dp(G: Game) -> dict[tuple, str]:
    """Bottom-up minimax over the explicit position list."""
    positions = enumerate_positions(G)
    positions.sort(key=len, reverse=True)
    win: dict[tuple, str] = {}
    for p in positions:
        d = G.decide(p)
        if d is not None:
            win[p] = d
        elif len(p) == G.play_cap:
            win[p] = G.winner_at_cap(p)
        else:
            mover = turn(p)
            children = [win[p + (x,)] for x in G.moves]
            win[p] = mover if mover in children else other_player(mover)
    return win


def clopen_distance_dp(G: Game) -> dict[tuple, int | None]:
    """Exact minimax distance-to-win for the open player (player I on
    clopen games), bottom-up; None marks positions the closed player holds."""
    positions = enumerate_positions(G)
    positions.sort(key=len, reverse=True)
    open_player = G.open_player
    dist: dict[tuple, int | None] = {}
    for p in positions:
        d = G.decide(p)
        if d == open_player:
            dist[p] = 0
            continue
        if d is not None or len(p) == G.play_cap:
            dist[p] = None
            continue
        children = [dist[p + (x,)] for x in G.moves]
        if turn(p) == open_player:
            valued = [c for c in children if c is not None]
            dist[p] = min(valued) + 1 if valued else None
        else:
            dist[p] = None if any(c is None for c in children) else max(children)
    return dist


def reachability_closure(rel: WellFoundedRelation) -> frozenset:
    """Floyd-Warshall style transitive reachability."""
    nodes = sorted(rel.carrier, key=repr)
    reach = {(a, b): (a, b) in rel.edges for a in nodes for b in nodes}
    for k in nodes:
        for a in nodes:
            if not reach[(a, k)]:
                continue
            for b in nodes:
                if reach[(k, b)]:
                    reach[(a, b)] = True
    return frozenset((a, b) for (a, b), v in reach.items() if v)


def descending_sequences(po: WellFoundedRelation) -> set[tuple]:
    """All finite strictly descending sequences, straight from the
    definition: every consecutive pair must be an edge downward."""
    edge = set(po.edges)
    out = {()}
    frontier = [(n,) for n in po.carrier]
    while frontier:
        s = frontier.pop()
        out.add(s)
        for a in po.carrier:
            if (a, s[-1]) in edge:
                frontier.append(s + (a,))
    return out


def kb_less(s: tuple, t: tuple) -> bool:
    """Two-clause Kleene-Brouwer comparison, applied pairwise."""
    if s == t:
        return False
    k = 0
    while k < len(s) and k < len(t):
        if s[k] != t[k]:
            return s[k] < t[k]
        k += 1
    return len(s) > len(t)


def worklist_fixpoint(M: Structure, rel, rule, value_domain=None) -> frozenset:
    """Iterate all slice equations simultaneously until stable."""
    from hfgames.logic import EDGE_SYMBOL, eval_formula

    M2 = M if EDGE_SYMBOL in M.predicates else M.with_predicate(EDGE_SYMBOL, rel.edges)
    domain = list(value_domain) if value_domain is not None else list(M.universe.elements)
    preds = {n: {a for a, b in rel.edges if b == n} for n in rel.carrier}
    pairs: frozenset = frozenset()
    while True:
        new = set()
        for b in rel.carrier:
            restricted = frozenset((j, x) for j, x in pairs if j in preds[b])
            Mb = M2.with_predicate(rule.f_symbol, restricted)
            for x in domain:
                if eval_formula(Mb, rule.formula, {rule.i_var: b, rule.x_var: x}):
                    new.add((b, x))
        if frozenset(new) == pairs:
            return pairs
        pairs = frozenset(new)
