"""Candidate generation and noisy-channel decoding."""

import itertools
import math
import random

import pytest

from spellchannel.channel import CDParams, Triple, bm_likelihood, cd_likelihood, train_confusion
from spellchannel.corrector import (
    CandidateIndex,
    CorrectionConfig,
    CorrectionModels,
    ablation_correct,
    correct_sentence,
    correct_word,
    generate_candidates,
    run_correction,
)
from spellchannel.langmodel import START, UniformPrior, train_kn
from spellchannel.profiles import LATIN
from spellchannel.reference import ref_generate_candidates, ref_query_scan

VOCAB = {"the": 90, "cat": 40, "sat": 30, "ran": 20, "a": 50, "dog": 25}


@pytest.fixture(scope="module")
def index():
    return CandidateIndex.build(VOCAB)


@pytest.fixture(scope="module")
def confusion():
    alphabet = set("".join(VOCAB))
    triples = [Triple("cat", "ca", 3), Triple("the", "teh", 5), Triple("sat", "rat", 1)]
    return train_confusion(triples, alphabet)


@pytest.fixture(scope="module")
def lm():
    return train_kn(["the cat sat.", "the cat ran.", "a dog sat."])


@pytest.fixture(scope="module")
def models(confusion, lm, index):
    return CorrectionModels(confusion, lm, index, LATIN)


class TestCandidateIndex:
    def test_matches_linear_scan(self):
        rng = random.Random(221)
        words = {"".join(rng.choices("abcd", k=rng.randrange(1, 8))) for _ in range(150)}
        vocab = {w: 1 for w in words}
        idx = CandidateIndex.build(vocab)
        for _ in range(200):
            probe = "".join(rng.choices("abcd", k=rng.randrange(1, 9)))
            k = rng.randrange(0, 3)
            assert idx.query(probe, k) == ref_query_scan(words, probe, k), (probe, k)

    def test_prefix_indexing_still_exact_for_long_words(self):
        vocab = {"abcdefghij": 1, "abcdefghixj": 1, "zzzzzzzzzz": 1}
        idx = CandidateIndex.build(vocab, prefix_len=7)
        assert idx.query("abcdefghij", 1) == ["abcdefghij", "abcdefghixj"]
        # edit beyond the indexed prefix
        assert idx.query("abcdefghiq", 1) == ["abcdefghij"]

    def test_query_beyond_built_bound(self, index):
        with pytest.raises(ValueError, match="max_ed"):
            index.query("cat", 3)

    def test_container_protocol(self, index):
        assert len(index) == len(VOCAB)
        assert "cat" in index and "kat" not in index

    def test_build_validation(self):
        with pytest.raises(ValueError):
            CandidateIndex.build({}, max_ed=-1)
        with pytest.raises(ValueError):
            CandidateIndex.build({}, prefix_len=0)


class TestGenerateCandidates:
    def test_matches_reference(self, index):
        rng = random.Random(222)
        letters = "thecasrndog"
        for _ in range(300):
            probe = "".join(rng.choices(letters, k=rng.randrange(1, 7)))
            got = generate_candidates(probe, index, LATIN)
            want_words, want_filtered = ref_generate_candidates(probe, VOCAB, LATIN)
            assert set(got.words()) == set(want_words), probe
            assert got.filtered_by_metaphone == want_filtered, probe

    def test_short_words_search_distance_one(self, index):
        got = generate_candidates("ca", index, LATIN)  # len 2 -> k = 1
        assert "cat" in got and "a" in got
        assert "sat" not in got  # distance 2, outside the short-word bound
        got4 = generate_candidates("catt", index, LATIN)  # len 4 -> k = 2
        assert "cat" in got4 and "sat" in got4

    def test_observed_always_included(self, index):
        got = generate_candidates("zzz", index, LATIN)
        assert got.words() == ["zzz"]
        assert not got.filtered_by_metaphone

    def test_metaphone_filter_keeps_minimum_distance(self):
        # five sound-alike neighbors trigger the filter; "kat" shares
        # cat's code exactly while the vowel-initial words do not
        vocab = {w: 1 for w in ["cat", "kat", "aat", "eat", "oat", "iat"]}
        idx = CandidateIndex.build(vocab)
        got = generate_candidates("cat", idx, LATIN)
        assert got.filtered_by_metaphone
        assert set(got.words()) == {"cat", "kat"}

    def test_small_lists_skip_filter(self, index):
        got = generate_candidates("dog", index, LATIN)
        assert not got.filtered_by_metaphone


class TestCorrectWord:
    def test_posterior_combines_channel_and_prior(self, models, lm, confusion):
        config = CorrectionConfig(lambda_=1.0, mode="word")
        got = correct_word("ca", ["the"], ["sat"], models, config)
        for cand in got.candidates:
            want_ch = bm_likelihood("ca", cand.word, confusion)
            want_pr = lm.logprob(cand.word, "the")
            assert cand.channel_logp == pytest.approx(want_ch)
            assert cand.prior_logp == pytest.approx(want_pr)
            assert cand.posterior_logp == pytest.approx(want_ch + want_pr)
        posts = [c.posterior_logp for c in got.candidates]
        assert posts == sorted(posts, reverse=True)
        assert got.best().word == "cat"

    def test_lambda_zero_ignores_prior(self, models, confusion):
        config = CorrectionConfig(lambda_=0.0, mode="word")
        got = correct_word("cat", ["the"], [], models, config)
        assert got.best().word == "cat"  # identity channel mass dominates
        for cand in got.candidates:
            assert cand.posterior_logp == pytest.approx(cand.channel_logp)

    def test_lambda_scales_prior(self, models, lm, confusion):
        config = CorrectionConfig(lambda_=2.5, mode="word")
        got = correct_word("ca", [], [], models, config)
        for cand in got.candidates:
            assert cand.posterior_logp == pytest.approx(
                cand.channel_logp + 2.5 * lm.logprob(cand.word, START)
            )

    def test_cd_error_model(self, models, lm):
        config = CorrectionConfig(error_model="cd", mode="word")
        got = correct_word("ca", ["the"], [], models, config)
        words = got.words()
        for cand in got.candidates:
            want_ch = cd_likelihood("ca", cand.word, words, CDParams())
            assert cand.channel_logp == pytest.approx(want_ch)
        observed_ch = next(c.channel_logp for c in got.candidates if c.word == "ca")
        assert math.exp(observed_ch) == pytest.approx(0.65)

    def test_bm_requires_confusion(self, lm, index):
        bare = CorrectionModels(None, lm, index, LATIN)
        with pytest.raises(ValueError, match="confusion"):
            correct_word("ca", [], [], bare, CorrectionConfig())


def _brute_force_sentence(tokens, models, config):
    """Exhaustive joint decode over the uncapped candidate pools."""
    pools = [generate_candidates(t, models.index, models.profile).words() for t in tokens]
    best = None
    for combo in itertools.product(*pools):
        score = 0.0
        for i, w in enumerate(combo):
            ch = bm_likelihood(tokens[i], w, models.confusion)
            prev = combo[i - 1] if i else START
            score += ch + config.lambda_ * models.lm.logprob(w, prev)
        key = (-score, combo)
        if best is None or key < best:
            best = key
    return list(best[1])


class TestCorrectSentence:
    def test_exact_enumeration_matches_brute_force(self, models):
        config = CorrectionConfig(per_word_cap=50)
        rng = random.Random(223)
        letters = "thecasrndog"
        for _ in range(25):
            tokens = [
                "".join(rng.choices(letters, k=rng.randrange(1, 5)))
                for _ in range(rng.randrange(1, 4))
            ]
            got = correct_sentence(tokens, models, config)
            assert got.corrected == _brute_force_sentence(tokens, models, config), tokens

    def test_beam_with_wide_width_matches_exact(self, models):
        tokens = ["teh", "ca", "sat"]
        exact = correct_sentence(tokens, models, CorrectionConfig(per_word_cap=50))
        beam = correct_sentence(
            tokens,
            models,
            CorrectionConfig(per_word_cap=50, enumeration_limit=1, beam_width=4096),
        )
        assert beam.corrected == exact.corrected

    def test_corrects_context_fitting_words(self, models):
        got = correct_sentence(["teh", "cat", "sat"], models, CorrectionConfig())
        assert got.corrected == ["the", "cat", "sat"]
        assert got.changed == [0]

    def test_traces_cover_every_position(self, models):
        tokens = ["teh", "ca"]
        got = correct_sentence(tokens, models, CorrectionConfig())
        assert len(got.traces) == 2
        for tok, trace in zip(tokens, got.traces):
            assert trace.observed == tok
            posts = [c.posterior_logp for c in trace.candidates]
            assert posts == sorted(posts, reverse=True)

    def test_result_serializes(self, models):
        got = correct_sentence(["teh"], models, CorrectionConfig())
        blob = got.to_json_dict()
        assert blob["corrected"] == ["the"]
        assert blob["traces"][0]["observed"] == "teh"

    def test_empty_sentence_rejected(self, models):
        with pytest.raises(ValueError):
            correct_sentence([], models, CorrectionConfig())

    def test_per_word_cap_keeps_observed(self, models):
        # cap of 1 keeps only the best channel candidate, plus the observed
        # word, so the identity stays reachable
        config = CorrectionConfig(per_word_cap=1)
        got = correct_sentence(["cat"], models, config)
        assert got.corrected == ["cat"]

    def test_deterministic(self, models):
        tokens = ["teh", "ca", "dog"]
        a = correct_sentence(tokens, models, CorrectionConfig())
        b = correct_sentence(tokens, models, CorrectionConfig())
        assert a.corrected == b.corrected
        assert [t.to_json_dict() for t in a.traces] == [t.to_json_dict() for t in b.traces]


class TestAblation:
    def test_in_vocab_words_unchanged(self, confusion):
        config = CorrectionConfig(ablation=True, ablation_vocab=frozenset(VOCAB))
        got = ablation_correct(["the", "cat", "sat"], confusion, config)
        assert got.corrected == ["the", "cat", "sat"]
        assert got.changed == []

    def test_oov_word_corrected(self, confusion):
        config = CorrectionConfig(ablation=True, ablation_vocab=frozenset(VOCAB))
        got = ablation_correct(["teh"], confusion, config)
        assert got.corrected == ["the"]

    def test_oov_with_no_candidates_survives(self, confusion):
        config = CorrectionConfig(ablation=True, ablation_vocab=frozenset(VOCAB))
        got = ablation_correct(["zzzzzz"], confusion, config)
        assert got.corrected == ["zzzzzz"]

    def test_oov_penalty_applied_to_kept_observed(self, confusion):
        config = CorrectionConfig(ablation=True, ablation_vocab=frozenset(VOCAB))
        got = ablation_correct(["zzzzzz"], confusion, config)
        kept = next(c for c in got.traces[0].candidates if c.word == "zzzzzz")
        want = bm_likelihood("zzzzzz", "zzzzzz", confusion) + config.oov_penalty_logp
        assert kept.posterior_logp == pytest.approx(want)

    def test_requires_vocab_or_index(self, confusion):
        with pytest.raises(ValueError, match="ablation"):
            ablation_correct(["x"], confusion, CorrectionConfig(ablation=True))

    def test_cd_variant_runs(self):
        config = CorrectionConfig(
            ablation=True, error_model="cd", ablation_vocab=frozenset(VOCAB)
        )
        got = ablation_correct(["teh"], None, config)
        assert got.corrected[0] in VOCAB


class TestRunCorrection:
    def test_dispatches_word_mode(self, models):
        config = CorrectionConfig(mode="word")
        got = run_correction(["teh", "cat"], models, config)
        assert got.corrected == [t.best().word for t in got.traces]

    def test_dispatches_sentence_mode(self, models):
        config = CorrectionConfig(mode="sentence")
        want = correct_sentence(["teh", "cat"], models, config)
        assert run_correction(["teh", "cat"], models, config).corrected == want.corrected

    def test_ablation_index_cached_and_refreshed(self, models, confusion, lm, index):
        bundle = CorrectionModels(confusion, lm, index, LATIN)
        config = CorrectionConfig(ablation=True, ablation_vocab=frozenset(VOCAB))
        run_correction(["teh"], bundle, config)
        first = bundle.ablation_index
        assert first is not None and set(first.vocab) == set(VOCAB)
        run_correction(["teh"], bundle, config)
        assert bundle.ablation_index is first  # reused, not rebuilt
        smaller = CorrectionConfig(ablation=True, ablation_vocab=frozenset({"the"}))
        run_correction(["teh"], bundle, smaller)
        assert set(bundle.ablation_index.vocab) == {"the"}

    def test_uniform_prior_backend(self, confusion, index):
        bundle = CorrectionModels(confusion, UniformPrior(len(VOCAB)), index, LATIN)
        got = run_correction(["teh"], bundle, CorrectionConfig())
        assert got.corrected == ["the"]


class TestCorrectionConfig:
    @pytest.mark.parametrize(
        "kwargs",
        [
            {"lambda_": -0.1},
            {"mode": "paragraph"},
            {"error_model": "xx"},
            {"per_word_cap": 0},
            {"beam_width": 0},
        ],
    )
    def test_validation(self, kwargs):
        with pytest.raises(ValueError):
            CorrectionConfig(**kwargs)
