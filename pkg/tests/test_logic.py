import random

import pytest
from conftest import ECG_BLOCK, random_ground_facts, random_small_clause
from oracles import brute_covers, brute_subsumes

from relic import UsageError, parse_model_file
from relic.logic import (PredicateDecl, PredicateSchema,
                         apply_substitution, canonical_text, clause, covers,
                         find_covering_substitution, lit, normalize,
                         standardize_apart, theory_covers, theta_subsumes)


class TestApplySubstitution:
    def test_direct_replacement(self):
        assert apply_substitution(lit("p", "X", "normal"), {"X": "p7"}) \
            == lit("p", "p7", "normal")

    def test_identity(self):
        literal = lit("p", "X", "normal")
        assert apply_substitution(literal, {}) == literal

    def test_two_bindings(self):
        assert apply_substitution(lit("suc", "X", "Y"),
                                  {"X": "r8", "Y": "r7"}) == lit("suc", "r8", "r7")

    def test_normalized_idempotent(self):
        rng = random.Random(7)
        for _ in range(200):
            c = random_small_clause(rng)
            variables = [v for b in c.body for v in b.variables()]
            raw = {v: rng.choice(["a", "b", "X", "Y", "Z"]) for v in variables}
            theta = normalize(raw)
            for b in c.body:
                once = apply_substitution(b, theta)
                assert apply_substitution(once, theta) == once


class TestThetaSubsumes:
    def test_body_subset(self):
        c = clause("x", (lit("qrs", "A", "normal"),))
        d = clause("x", (lit("qrs", "A", "normal"), lit("p", "B", "normal")))
        assert theta_subsumes(c, d)

    def test_reflexive(self):
        c = clause("x", (lit("qrs", "A", "abnormal"), lit("suc", "B", "A")))
        assert theta_subsumes(c, c)

    def test_attribute_mismatch(self):
        c = clause("x", (lit("qrs", "A", "abnormal"),))
        d = clause("x", (lit("qrs", "B", "normal"),))
        assert not brute_subsumes(c, d)
        assert not theta_subsumes(c, d)

    def test_agrees_with_oracle(self):
        rng = random.Random(11)
        for _ in range(300):
            c = random_small_clause(rng, max_body=3)
            d = random_small_clause(rng, max_body=3)
            assert theta_subsumes(c, d) == brute_subsumes(c, d)

    def test_transitive_on_samples(self):
        rng = random.Random(13)
        hits = 0
        while hits < 50:
            c = random_small_clause(rng, max_body=2)
            d = random_small_clause(rng, max_body=3)
            e = random_small_clause(rng, max_body=3)
            if theta_subsumes(c, d) and theta_subsumes(d, e):
                hits += 1
                assert theta_subsumes(c, e)


class TestCovers:
    def test_doublet_block_witness(self):
        from relic import SymbolizationConfig, saturate
        from relic.synth import cardiac_schema

        interp = saturate(parse_model_file(ECG_BLOCK)[0],
                          SymbolizationConfig(), cardiac_schema("full"))
        c = clause("doublet", (lit("qrs", "X", "abnormal"),
                               lit("qrs", "Y", "abnormal"),
                               lit("suc", "Y", "X")))
        assert covers(c, interp.facts)
        assert find_covering_substitution(c, interp.facts) == {"X": "r8",
                                                               "Y": "r9"}

    def test_empty_body_vacuous(self):
        assert covers(clause("x", ()), set())

    def test_missing_predicate(self):
        facts = {lit("dias", "pd4", "80"), lit("sys", "ps4", "120")}
        assert not covers(clause("x", (lit("p", "Z", "normal"),)), facts)

    def test_agrees_with_oracle(self):
        rng = random.Random(17)
        for _ in range(300):
            c = random_small_clause(rng)
            facts = random_ground_facts(rng)
            assert covers(c, facts) == brute_covers(c, facts)

    def test_generality_soundness(self):
        # theta_subsumes(c, d) means d is more specific: whatever d covers,
        # c covers as well
        rng = random.Random(19)
        checked = 0
        while checked < 120:
            c = random_small_clause(rng, max_body=3)
            d = random_small_clause(rng, max_body=4)
            if not theta_subsumes(c, d):
                continue
            facts = random_ground_facts(rng)
            if covers(d, facts):
                assert covers(c, facts)
            checked += 1


class TestTheoryCovers:
    FACTS = {lit("qrs", "r1", "abnormal")}

    def test_empty_theory(self):
        assert not theory_covers((), self.FACTS)

    def test_one_covering_clause(self):
        good = clause("x", (lit("qrs", "A", "abnormal"),))
        bad = clause("x", (lit("p", "A", "normal"),))
        assert theory_covers((bad, good), self.FACTS)

    def test_all_non_covering(self):
        bad1 = clause("x", (lit("p", "A", "normal"),))
        bad2 = clause("x", (lit("sys", "A", "low"),))
        assert not theory_covers((bad1, bad2), self.FACTS)


class TestStandardizeApart:
    def test_collision_renamed(self):
        c1 = clause("x", (lit("qrs", "R0", "normal"),))
        c2 = clause("x", (lit("qrs", "R0", "abnormal"), lit("suc", "R0", "R1")))
        a, b = standardize_apart(c1, c2)
        assert a == c1
        assert b.body[0] == lit("qrs", "R0_2", "abnormal")
        assert set(a.variables()).isdisjoint(b.variables())

    def test_disjoint_unchanged(self):
        c1 = clause("x", (lit("qrs", "R0", "normal"),))
        c2 = clause("x", (lit("p", "P0", "normal"),))
        assert standardize_apart(c1, c2) == (c1, c2)

    def test_ground_unchanged(self):
        c1 = clause("x", (lit("qrs", "r1", "normal"),))
        c2 = clause("x", (lit("qrs", "r1", "abnormal"),))
        assert standardize_apart(c1, c2) == (c1, c2)


class TestSchema:
    def test_duplicate_declaration_rejected(self):
        with pytest.raises(UsageError):
            PredicateSchema((PredicateDecl("p", 2, "event", "ECG"),
                             PredicateDecl("p", 2, "event", "ABP")))

    def test_unknown_role_rejected(self):
        with pytest.raises(UsageError):
            PredicateDecl("p", 2, "thing", "ECG")


def test_canonical_text_order_insensitive():
    a = clause("x", (lit("p", "A"), lit("q", "A", "B")))
    b = clause("x", (lit("q", "A", "B"), lit("p", "A")))
    assert canonical_text(a) == canonical_text(b)
    assert str(a) != str(b)
