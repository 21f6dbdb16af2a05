import math

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from meteor_oracle import best_by_enumeration

from clipsearch.meteor import (
    DEFAULT_CONFIG,
    MatcherConfig,
    Alignment,
    AlignedPair,
    align,
    count_chunks,
    load_synonyms,
    meteor_score,
    suffix_stem,
    tokenize,
)

VOCAB = ["a", "b", "c", "d", "e"]

sentences = st.lists(st.sampled_from(VOCAB), min_size=0, max_size=5)


class TestTokenize:
    def test_strips_edge_punctuation_and_lowercases(self):
        assert tokenize("A man, riding!") == ["a", "man", "riding"]

    def test_empty_text(self):
        assert tokenize("") == []

    def test_internal_hyphen_survives_and_runs_of_spaces_collapse(self):
        assert tokenize("top-3  results") == ["top-3", "results"]

    def test_all_punctuation_token_dropped(self):
        assert tokenize("hello --- world") == ["hello", "world"]

    @given(st.text())
    def test_tokens_are_lowercase_and_nonempty(self, text):
        for tok in tokenize(text):
            assert tok
            assert tok == tok.lower()
            assert not any(c.isspace() for c in tok)


class TestAlign:
    def test_identity(self):
        a = align(["a", "b"], ["a", "b"])
        assert a.pairs == [AlignedPair(0, 0, "exact"), AlignedPair(1, 1, "exact")]

    def test_unique_tokens_force_the_matching(self):
        # Every token appears once on each side, so pairing is forced.
        a = align(["a", "b", "c", "d"], ["a", "c", "b", "d"])
        assert [(p.hyp_index, p.ref_index) for p in a.pairs] == [(0, 0), (1, 2), (2, 1), (3, 3)]
        assert all(p.stage == "exact" for p in a.pairs)

    def test_duplicate_hyp_token_breaks_tie_lexicographically(self):
        # Both [(0,0)] and [(1,0)] are maximum with equal chunks; the
        # lexicographically smaller pair list wins.
        a = align(["a", "a"], ["a"])
        assert a.pairs == [AlignedPair(0, 0, "exact")]

    def test_empty_sides(self):
        assert align([], ["a"]).pairs == []
        assert align(["a"], []).pairs == []

    def test_minimizes_chunks_among_maximum_matchings(self):
        # hyp "a b a" vs ref "a b a": identity (1 chunk) must beat any
        # crossed assignment of the duplicated token.
        a = align(["a", "b", "a"], ["a", "b", "a"])
        assert [(p.hyp_index, p.ref_index) for p in a.pairs] == [(0, 0), (1, 1), (2, 2)]
        assert count_chunks(a) == 1

    def test_budget_exhaustion_falls_back_to_greedy_with_flag(self):
        hyp = ["a"] * 12
        a = align(hyp, hyp)
        assert a.approx is True
        assert [(p.hyp_index, p.ref_index) for p in a.pairs] == [(i, i) for i in range(12)]

    def test_small_ambiguity_stays_exact(self):
        a = align(["a"] * 6, ["a"] * 6)
        assert a.approx is False
        assert count_chunks(a) == 1


class TestStages:
    def test_suffix_stem_rules(self):
        assert suffix_stem("riding") == "rid"
        assert suffix_stem("boxes") == "box"
        assert suffix_stem("played") == "play"
        assert suffix_stem("dogs") == "dog"
        assert suffix_stem("as") == "as"  # would leave 1 char
        assert suffix_stem("sing") == "sing"  # -ing would leave 1 char, no shorter suffix fits
        assert suffix_stem("horse") == "horse"

    def test_stem_stage_matches_inflected_forms(self):
        config = MatcherConfig(stemmer=suffix_stem)
        a = align(["riding"], ["rides"], config)
        assert a.pairs == [AlignedPair(0, 0, "stem")]

    def test_exact_outranks_stem(self):
        config = MatcherConfig(stemmer=suffix_stem)
        a = align(["rides"], ["rides"], config)
        assert a.pairs[0].stage == "exact"

    def test_synonym_stage(self, tmp_path):
        table = tmp_path / "syn.tsv"
        table.write_text("horse\tpony,stallion\n", encoding="utf-8")
        config = MatcherConfig(synonyms=load_synonyms(str(table)))
        a = align(["horse"], ["pony"], config)
        assert a.pairs == [AlignedPair(0, 0, "synonym")]
        # relation is looked up in both directions, no closure
        b = align(["pony"], ["horse"], config)
        assert b.pairs == [AlignedPair(0, 0, "synonym")]
        assert align(["pony"], ["stallion"], config).pairs == []

    def test_load_synonyms_rejects_malformed_line(self, tmp_path):
        bad = tmp_path / "syn.tsv"
        bad.write_text("no-tab-here\n", encoding="utf-8")
        with pytest.raises(Exception):
            load_synonyms(str(bad))

    def test_disabled_by_default(self):
        assert align(["riding"], ["rides"]).pairs == []


class TestCountChunks:
    def test_one_contiguous_run(self):
        a = Alignment([AlignedPair(0, 0, "exact"), AlignedPair(1, 1, "exact"), AlignedPair(2, 2, "exact")])
        assert count_chunks(a) == 1

    def test_fully_scattered(self):
        # Adjacent pairs never advance both indices by one.
        pairs = [AlignedPair(0, 0, "exact"), AlignedPair(1, 2, "exact"),
                 AlignedPair(2, 1, "exact"), AlignedPair(3, 3, "exact")]
        assert count_chunks(Alignment(pairs)) == 4

    def test_empty(self):
        assert count_chunks(Alignment([])) == 0


class TestMeteorScore:
    def test_identical_five_token_sentence(self):
        tokens = tokenize("a man rides a horse")
        bd = meteor_score(tokens, tokens)
        assert bd.matches == 5
        assert bd.precision == 1.0 and bd.recall == 1.0
        assert bd.fmean == pytest.approx(1.0, abs=1e-12)
        assert bd.chunks == 1
        assert bd.penalty == pytest.approx(0.5 * (1 / 5) ** 3, abs=1e-12)
        assert bd.score == pytest.approx(0.996, abs=1e-9)

    def test_no_overlap_scores_zero(self):
        bd = meteor_score(tokenize("x y"), tokenize("p q r"))
        assert bd == meteor_score([], [])  # all-zero breakdown
        assert bd.score == 0.0

    def test_single_shared_token(self):
        bd = meteor_score(tokenize("the cat sat"), tokenize("on the mat"))
        assert bd.matches == 1
        assert bd.precision == pytest.approx(1 / 3)
        assert bd.recall == pytest.approx(1 / 3)
        assert bd.fmean == pytest.approx(1 / 3)
        assert bd.chunks == 1
        assert bd.penalty == pytest.approx(0.5)
        assert bd.score == pytest.approx(1 / 6, abs=1e-9)

    def test_swapped_middle_tokens(self):
        bd = meteor_score(["a", "b", "c", "d"], ["a", "c", "b", "d"])
        assert bd.chunks == 4
        assert bd.penalty == pytest.approx(0.5)
        assert bd.score == pytest.approx(0.5, abs=1e-9)

    @pytest.mark.parametrize("length", range(1, 11))
    def test_identity_bound(self, length):
        tokens = [f"w{i}" for i in range(length)]
        bd = meteor_score(tokens, tokens)
        assert bd.score == pytest.approx(1 - 0.5 / length**3, abs=1e-12)

    def test_asymmetric_roles(self):
        forward = meteor_score(["a", "b"], ["a", "b", "c"])
        backward = meteor_score(["a", "b", "c"], ["a", "b"])
        assert forward.precision == 1.0 and forward.recall == pytest.approx(2 / 3)
        assert backward.precision == pytest.approx(2 / 3) and backward.recall == 1.0
        assert forward.score != backward.score

    def test_empty_sides_are_all_zero(self):
        for hyp, ref in ([], ["a"]), (["a"], []), ([], []):
            bd = meteor_score(hyp, ref)
            assert (bd.matches, bd.chunks, bd.score) == (0, 0, 0.0)

    @given(sentences, sentences)
    def test_breakdown_invariants(self, hyp, ref):
        bd = meteor_score(hyp, ref)
        assert 0.0 <= bd.score <= 1.0
        assert 0.0 <= bd.penalty <= 0.5
        assert bd.matches <= min(len(hyp), len(ref))
        if bd.matches > 0:
            assert 1 <= bd.chunks <= bd.matches
            assert bd.score == pytest.approx(bd.fmean * (1 - bd.penalty), abs=1e-15)
        else:
            assert bd.score == 0.0

    @given(sentences, sentences)
    @settings(max_examples=300)
    def test_alignment_matches_bruteforce_oracle(self, hyp, ref):
        a = align(hyp, ref)
        assert a.approx is False
        assert (len(a.pairs), count_chunks(a)) == best_by_enumeration(hyp, ref)

    def test_self_score_dominates_small_vocabulary(self):
        # Exhaustive over sentences of length 1..3 on a 3-symbol vocabulary.
        small = ["a", "b", "c"]
        pool = [
            [small[i] for i in combo]
            for n in (1, 2, 3)
            for combo in __import__("itertools").product(range(3), repeat=n)
        ]
        for s in pool:
            self_score = meteor_score(s, s).score
            for t in pool:
                if t != s:
                    assert meteor_score(s, t).score <= self_score

    def test_score_is_deterministic(self):
        hyp, ref = tokenize("a man rides a horse"), tokenize("a horse and a man")
        assert meteor_score(hyp, ref) == meteor_score(hyp, ref)


def test_identity_score_formula_is_monotone_in_length():
    scores = [meteor_score(["x"] * 1, ["x"] * 1).score]
    for length in range(2, 7):
        tokens = [f"w{i}" for i in range(length)]
        scores.append(meteor_score(tokens, tokens).score)
    assert scores == sorted(scores)
    assert math.isclose(scores[0], 0.5)
