import random

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from hfgames.errors import (
    CoverageError,
    MalformedInstanceError,
    NoWitnessError,
    ParseError,
    SignatureError,
)
from hfgames.logic import (
    And,
    Const,
    Eq,
    Exists,
    Member,
    Not,
    Pred,
    SatisfactionClass,
    Structure,
    Var,
    build_truth_predicate,
    enumerate_formulas,
    enumerate_instances,
    eval_formula,
    eval_instance,
    free_vars,
    instance,
    instantiate,
    parse_formula,
    parse_instance,
    print_instance,
    random_formula,
    random_instance,
    serialize_class,
    size,
    skolem_witness,
    sub_instance,
    tarski_check,
    to_text,
)
from hfgames.universe import build_universe

from oracles import tarski_eval

V2 = Structure(build_universe(2))
V3 = Structure(build_universe(3))
V4 = Structure(build_universe(4))


class TestParser:
    def test_exists_membership(self):
        f = parse_formula("Ex. (x in #1)")
        assert f == Exists("x", Member(Var("x"), Const(1)))

    def test_negated_equality(self):
        assert parse_formula("!(#0 = #0)") == Not(Eq(Const(0), Const(0)))

    def test_unbalanced_paren_reports_position(self):
        with pytest.raises(ParseError, match="end of input"):
            parse_formula("Ex. (x in")

    def test_sugar_desugars(self):
        a, b = Member(Const(0), Const(1)), Eq(Const(0), Const(0))
        assert parse_formula("(#0 in #1) | (#0 = #0)") == Not(And(Not(a), Not(b)))
        assert parse_formula("(#0 in #1) -> (#0 = #0)") == Not(And(a, Not(b)))
        assert parse_formula("Ax. (x in #1)") == Not(
            Exists("x", Not(Member(Var("x"), Const(1))))
        )
        iff = parse_formula("(#0 in #1) <-> (#0 = #0)")
        assert iff == And(Not(And(a, Not(b))), Not(And(b, Not(a))))

    def test_edge_predicate(self):
        f = parse_formula("x <| y")
        assert f == Pred("<|", (Var("x"), Var("y")))

    def test_signature_checking(self):
        with pytest.raises(ParseError, match="unknown predicate"):
            parse_formula("Q(#0)", {"P": 1})
        with pytest.raises(ParseError, match="arity"):
            parse_formula("P(#0, #1)", {"P": 1})
        assert parse_formula("P(#0)", {"P": 1}) == Pred("P", (Const(0),))

    def test_spaced_quantifier(self):
        assert parse_formula("E x . (x = x)") == parse_formula("Ex. (x = x)")

    def test_in_reserved(self):
        with pytest.raises(ParseError):
            parse_formula("Ein. (in = in)")

    def test_quantifier_greedy_body(self):
        f = parse_formula("Ex. (x = x) & (#0 = #0)")
        assert isinstance(f, Exists)
        assert isinstance(f.body, And)

    def test_round_trip_seeded(self):
        rng = random.Random(11)
        U = build_universe(3)
        for _ in range(1000):
            f = random_formula(rng, U, max_size=12)
            assert parse_formula(to_text(f)) == f

    @given(st.integers(min_value=0, max_value=10**9))
    @settings(max_examples=200, deadline=None)
    def test_round_trip_hypothesis(self, seed):
        rng = random.Random(seed)
        f = random_formula(rng, build_universe(3), max_size=14)
        assert parse_formula(to_text(f)) == f


class TestSizeAndVars:
    def test_size_counts_all_nodes(self):
        assert size(parse_formula("#0 in #1")) == 3
        assert size(parse_formula("!(#0 in #1)")) == 4
        assert size(parse_formula("Ex. (x in #1)")) == 4
        assert size(parse_formula("(#0 = #0) & (#1 = #1)")) == 7

    def test_free_vars(self):
        f = parse_formula("Ex. (x in y)")
        assert free_vars(f) == {"y"}
        assert free_vars(parse_formula("(x in y)")) == {"x", "y"}

    def test_instance_requires_cover(self):
        f = parse_formula("(x in y)")
        with pytest.raises(MalformedInstanceError):
            instance(f, {"x": 0})
        inst = instance(f, {"x": 0, "y": 1, "z": 9})
        assert inst.assignment == {"x": 0, "y": 1}


class TestEval:
    def test_empty_in_singleton(self):
        assert eval_instance(V2, parse_instance("#0 in #1"))

    def test_empty_has_no_member(self):
        assert not eval_instance(V2, parse_instance("Ex. (x in #0)"))

    def test_two_distinct_members_of_pair(self):
        # Oracle: enumerate all 16^2 pairs over V_4 and test directly.
        f = parse_formula("Ex. Ey. (!(x = y) & (x in #3) & (y in #3))")
        found = False
        for a in V4.universe.elements:
            for b in V4.universe.elements:
                if a != b and (3 >> a) & 1 and (3 >> b) & 1:
                    found = True
        assert eval_instance(V4, instance(f, {})) is found is True

    def test_unbound_variable(self):
        with pytest.raises(MalformedInstanceError):
            eval_formula(V2, parse_formula("(x in #1)"), {})

    def test_unknown_predicate(self):
        with pytest.raises(SignatureError):
            eval_formula(V2, parse_formula("P(#0)"), {})

    def test_agreement_with_duplicated_evaluator(self):
        rng = random.Random(13)
        for k in range(1000):
            M = V3 if k % 2 else V4
            inst = random_instance(rng, M, max_size=8)
            assert eval_instance(M, inst) == tarski_eval(
                M, inst.formula, inst.assignment
            ), print_instance(inst)

    def test_predicates(self):
        M = V3.with_predicate("P", {(0,), (2,)})
        assert eval_formula(M, parse_formula("P(#2)"), {})
        assert not eval_formula(M, parse_formula("P(#1)"), {})


class TestTruthPredicate:
    def test_empty_list(self):
        S = build_truth_predicate(V3, [])
        assert S.entries == frozenset()

    def test_atomic_table_is_membership(self):
        insts = [
            instance(Member(Const(a), Const(b)), {})
            for a in V2.universe.elements
            for b in V2.universe.elements
        ]
        S = build_truth_predicate(V2, insts)
        for inst in insts:
            a, b = inst.formula.left.code, inst.formula.right.code
            assert S.holds(inst) == ((b >> a) & 1 == 1)

    def test_matches_eval_pointwise_size5(self):
        insts = enumerate_instances(V3, 5)
        S = build_truth_predicate(V3, insts)
        for inst in insts:
            assert S.holds(inst) == eval_instance(V3, inst)

    def test_own_audit_clean(self):
        insts = enumerate_instances(V3, 5)
        S = build_truth_predicate(V3, insts)
        assert tarski_check(V3, S, insts) == []


class TestTarskiCheck:
    def test_opposite_pair_violation(self):
        phi = parse_instance("#0 in #1")
        neg = parse_instance("!(#0 in #1)")
        S = SatisfactionClass(frozenset({phi, neg}))
        violations = tarski_check(V2, S, [neg])
        assert len(violations) == 1
        assert violations[0].kind == "negation"

    def test_quantifier_violation(self):
        ex = parse_instance("Ex. (x in #1)")
        body = parse_formula("(x in #1)")
        closure = [ex] + [instance(body, {"x": b}) for b in V2.universe.elements]
        S = build_truth_predicate(V2, closure)
        S_broken = SatisfactionClass(S.entries - {ex}, S.closure)
        violations = tarski_check(V2, S_broken, closure)
        assert any(v.kind == "quantifier" and v.inst == ex for v in violations)

    def test_conjunction_violation(self):
        both = parse_instance("(#0 in #1) & (#0 = #0)")
        S = SatisfactionClass(frozenset({both}))
        violations = tarski_check(V2, S, [both])
        assert [v.kind for v in violations] == ["conjunction"]


class TestSkolem:
    def test_only_element(self):
        assert skolem_witness(V2, parse_instance("Ex. (x in #1)")) == 0

    def test_least_member_of_pair(self):
        # Oracle: scan codes ascending for the first member of {0,1}.
        assert skolem_witness(V4, parse_instance("Ex. (x in #3)")) == 0

    def test_no_witness(self):
        with pytest.raises(NoWitnessError):
            skolem_witness(V2, parse_instance("Ex. (x in #0)"))

    def test_minimality_property(self):
        rng = random.Random(17)
        checked = 0
        while checked < 50:
            inst = random_instance(rng, V3, 6)
            if not isinstance(inst.formula, Exists) or not eval_instance(V3, inst):
                continue
            w = skolem_witness(V3, inst)
            for b in range(w):
                assert not eval_instance(
                    V3, instantiate(inst, inst.formula.var, b)
                )
            checked += 1


class TestSerialization:
    def test_sorted_tf_lines(self):
        insts = [parse_instance("#0 in #1"), parse_instance("#1 in #0")]
        S = build_truth_predicate(V2, insts)
        text = serialize_class(S)
        assert text.splitlines() == sorted(text.splitlines())
        assert "T (#0 in #1)" in text
        assert "F (#1 in #0)" in text

    def test_print_instance_substitutes(self):
        inst = instance(parse_formula("(x in #1)"), {"x": 0})
        assert print_instance(inst) == "(#0 in #1)"


class TestClosureSemantics:
    def test_verdict_three_way(self):
        phi = parse_instance("#0 in #1")
        psi = parse_instance("#1 in #0")
        other = parse_instance("#0 = #0")
        S = SatisfactionClass(frozenset({phi}), frozenset({phi, psi}))
        assert S.verdict(phi) is True
        assert S.verdict(psi) is False
        assert S.verdict(other) is None
        with pytest.raises(CoverageError):
            S.marks(other)


class TestEnumeration:
    def test_deterministic_and_size_bounded(self):
        a = enumerate_formulas(build_universe(2), 5)
        b = enumerate_formulas(build_universe(2), 5)
        assert a == b
        assert all(size(f) <= 5 for f in a)

    def test_instances_cover_assignments(self):
        insts = enumerate_instances(V2, 3)
        f = parse_formula("(x in y)")
        matching = [i for i in insts if i.formula == f]
        assert len(matching) == 4  # 2 elements ** 2 free variables

    def test_instances_closed_under_instantiation(self):
        insts = set(enumerate_instances(V3, 5))
        for inst in list(insts):
            if isinstance(inst.formula, Exists):
                for b in V3.universe.elements:
                    assert instantiate(inst, inst.formula.var, b) in insts
