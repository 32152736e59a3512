"""Synthetic misspelling generation and rate calibration."""

import random

import pytest

from spellchannel.channel import Triple, train_confusion
from spellchannel.noiser import (
    MARKER,
    NoiseModel,
    _interleave,
    build_eval_dataset,
    calibrate_rate_scale,
    corrupt_tokens,
    derive_noise_model,
    load_dataset,
    save_dataset,
)
from spellchannel.profiles import DEVANAGARI
from spellchannel.textcore import EPSILON


@pytest.fixture(scope="module")
def confusion():
    triples = [
        Triple("ab", "ac", 4),
        Triple("ab", "b", 2),
        Triple("b", "ba", 1),
        Triple("cab", "cb", 1),
    ]
    return train_confusion(triples, "abc")


class TestDeriveNoiseModel:
    def test_rates_scale_with_clamp(self, confusion):
        nm1 = derive_noise_model(confusion, 1.0, seed=5)
        nm2 = derive_noise_model(confusion, 2.0, seed=5)
        for c in "abc":
            want = confusion.char_error_freq[c]
            assert nm1.count_probab[c] == pytest.approx(want)
            assert nm2.count_probab[c] == pytest.approx(min(1.0, 2.0 * want))
        assert nm1.count_probab[MARKER] == pytest.approx(confusion.char_error_freq[EPSILON])

    def test_selector_rows_normalized_without_identity(self, confusion):
        nm = derive_noise_model(confusion, 1.0, seed=5)
        for symbol, row in nm.dict_selector.items():
            assert sum(row.values()) == pytest.approx(1.0), symbol
            assert symbol not in row  # identity never resampled
        assert EPSILON in nm.dict_selector["a"]  # deletions reachable
        assert EPSILON not in nm.dict_selector[MARKER]  # marker keep is not a draw

    def test_source_hash_binds_model(self, confusion):
        nm = derive_noise_model(confusion, 1.0, seed=5)
        assert nm.source_hash == confusion.content_hash()

    def test_negative_scale_rejected(self, confusion):
        with pytest.raises(ValueError):
            derive_noise_model(confusion, -0.1, seed=5)


class TestInterleave:
    def test_plain_word(self):
        assert _interleave("abc", frozenset()) == ["a", MARKER, "b", MARKER, "c"]

    def test_no_trailing_marker(self):
        assert _interleave("a", frozenset())[-1] == "a"

    def test_modifier_blocks_adjacent_marker(self):
        word = "नित"  # consonant, modifier, consonant
        out = _interleave(word, DEVANAGARI.modifiers)
        assert MARKER not in out  # both letter junctions touch the modifier

    def test_markers_never_touch_modifiers(self):
        rng = random.Random(231)
        letters = "कखगनम"
        mods = sorted(DEVANAGARI.modifiers)
        for _ in range(10_000 // 10):
            word = "".join(
                rng.choice(letters) + (rng.choice(mods) if rng.random() < 0.4 else "")
                for _ in range(rng.randrange(1, 6))
            )
            out = _interleave(word, DEVANAGARI.modifiers)
            for i, ch in enumerate(out):
                if ch == MARKER:
                    assert out[i - 1] not in DEVANAGARI.modifiers
                    assert out[i + 1] not in DEVANAGARI.modifiers
            assert [c for c in out if c != MARKER] == list(word)


class TestCorruptTokens:
    def test_deterministic_given_rng(self, confusion):
        nm = derive_noise_model(confusion, 3.0, seed=9)
        toks = ["ab", "cab", "b"]
        a = corrupt_tokens(toks, nm, rng=random.Random(42))
        b = corrupt_tokens(toks, nm, rng=random.Random(42))
        assert a == b

    def test_token_count_preserved(self, confusion):
        nm = derive_noise_model(confusion, 5.0, seed=9)
        rng = random.Random(7)
        for _ in range(50):
            toks = ["ab", "abc", "ca"][: rng.randrange(1, 4)]
            assert len(corrupt_tokens(toks, nm, rng=rng)) == len(toks)

    def test_zero_scale_is_identity(self, confusion):
        nm = derive_noise_model(confusion, 0.0, seed=9)
        toks = ["ab", "cab"]
        assert corrupt_tokens(toks, nm, rng=random.Random(1)) == toks

    def test_unknown_symbols_never_corrupt(self, confusion):
        # foreign characters are never replaced or deleted, though marker
        # slots between them can still realize insertions
        nm = derive_noise_model(confusion, 100.0, seed=9)
        for trial in range(20):
            out = corrupt_tokens(["xyz"], nm, rng=random.Random(trial))[0]
            assert [c for c in out if c in "xyz"] == ["x", "y", "z"]
            assert set(out) - set("xyz") <= set("abc")

    def test_fully_deleted_word_falls_back_to_original(self):
        # deletion-only selector wipes every character; the original
        # token must come back to keep the alignment
        nm = NoiseModel(
            count_probab={"a": 1.0, MARKER: 0.0},
            dict_selector={"a": {EPSILON: 1.0}, MARKER: {"a": 1.0}},
            rate_scale=1.0,
            seed=0,
            source_hash="x",
        )
        assert corrupt_tokens(["aa"], nm, rng=random.Random(3)) == ["aa"]

    def test_insertions_come_from_marker_row(self):
        nm = NoiseModel(
            count_probab={"a": 0.0, MARKER: 1.0},
            dict_selector={"a": {"b": 1.0}, MARKER: {"c": 1.0}},
            rate_scale=1.0,
            seed=0,
            source_hash="x",
        )
        assert corrupt_tokens(["aaa"], nm, rng=random.Random(3)) == ["acaca"]


class TestCalibration:
    def _sentences(self):
        rng = random.Random(232)
        return [
            " ".join("".join(rng.choices("abc", k=rng.randrange(2, 5))) for _ in range(6))
            for _ in range(120)
        ]

    def test_hits_target_within_tolerance(self, confusion):
        sentences = self._sentences()
        nm, achieved = calibrate_rate_scale(sentences, confusion, target=0.3, seed=17)
        assert abs(achieved - 0.3) <= 0.005
        assert nm.rate_scale > 0

    def test_generation_reproduces_calibrated_rate(self, confusion):
        sentences = self._sentences()
        nm, achieved = calibrate_rate_scale(sentences, confusion, target=0.3, seed=17)
        dataset = build_eval_dataset(sentences, nm)
        assert dataset.meta["token_corruption_rate"] == pytest.approx(achieved)

    def test_unreachable_target_raises(self):
        with pytest.warns(UserWarning):
            clean = train_confusion([], "abc")  # smoothing-only: zero error rates
        with pytest.raises(ValueError, match="unreachable"):
            calibrate_rate_scale(["ab ab ab"], clean, target=0.25, seed=1)

    def test_input_validation(self, confusion):
        with pytest.raises(ValueError):
            calibrate_rate_scale(["a b"], confusion, target=1.5)
        with pytest.raises(ValueError, match="no tokens"):
            calibrate_rate_scale(["", "  "], confusion, target=0.25)


class TestEvalDataset:
    def test_build_metadata_and_alignment(self, confusion):
        nm = derive_noise_model(confusion, 3.0, seed=21)
        sentences = ["ab cab b.", "", "ba ab!"]
        dataset = build_eval_dataset(sentences, nm)
        assert len(dataset) == 2  # blank line skipped
        for noisy, clean in dataset.pairs:
            assert len(noisy) == len(clean)
        assert dataset.meta["seed"] == 21
        assert dataset.meta["generator_model_hash"] == confusion.content_hash()
        assert 0.0 <= dataset.meta["token_corruption_rate"] <= 1.0

    def test_generation_is_reproducible(self, confusion):
        nm = derive_noise_model(confusion, 3.0, seed=21)
        sentences = ["ab cab b", "ba ab"]
        a = build_eval_dataset(sentences, nm)
        b = build_eval_dataset(sentences, nm)
        assert a.pairs == b.pairs

    def test_save_load_roundtrip(self, confusion, tmp_path):
        nm = derive_noise_model(confusion, 3.0, seed=21)
        dataset = build_eval_dataset(["ab cab b", "ba ab"], nm)
        path = tmp_path / "eval.tsv"
        save_dataset(dataset, path)
        loaded = load_dataset(path)
        assert loaded.pairs == dataset.pairs
        assert loaded.meta == dataset.meta

    def test_load_rejects_malformed(self, tmp_path):
        path = tmp_path / "bad.tsv"
        path.write_text("no tab here\n", encoding="utf-8")
        with pytest.raises(ValueError, match="noisy<TAB>clean"):
            load_dataset(path)
