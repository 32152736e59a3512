"""Correction quality metrics and grid evaluation over a parallel dataset."""

from __future__ import annotations

import json
from dataclasses import dataclass
from typing import Sequence

from spellchannel.corrector import CorrectionConfig, CorrectionModels, run_correction
from spellchannel.noiser import EvalDataset
from spellchannel.textcore import dl_alignment

__all__ = [
    "EvalReport",
    "SameModelError",
    "wer",
    "word_accuracy",
    "char_accuracy",
    "evaluate_cell",
    "evaluate_grid",
    "format_report_table",
    "reports_to_json",
]


class SameModelError(RuntimeError):
    """Dataset was generated by the same confusion model now being scored."""


def _require_equal_lengths(*seqs: Sequence[str]) -> None:
    lengths = {len(s) for s in seqs}
    if len(lengths) != 1:
        raise ValueError(f"token count mismatch: {sorted(lengths)}")


def wer(reference: Sequence[str], hypothesis: Sequence[str]) -> float:
    """Fraction of reference positions the hypothesis gets wrong."""
    _require_equal_lengths(reference, hypothesis)
    if not reference:
        raise ValueError("reference is empty")
    return sum(1 for r, h in zip(reference, hypothesis) if r != h) / len(reference)


def word_accuracy(
    clean: Sequence[str], noisy: Sequence[str], corrected: Sequence[str]
) -> float | None:
    """Share of error positions the correction fixed; None when the input
    had no error positions (undefined, never reported as perfect)."""
    _require_equal_lengths(clean, noisy, corrected)
    errors = fixed = 0
    for c, n, h in zip(clean, noisy, corrected):
        if n != c:
            errors += 1
            if h == c:
                fixed += 1
    if errors == 0:
        return None
    return fixed / errors


def char_accuracy(
    clean: Sequence[str], noisy: Sequence[str], corrected: Sequence[str]
) -> float | None:
    """Share of error characters removed by correction.

    Per position, error characters are the non-identity pairs of the
    noisy-vs-clean alignment; the corrected-vs-clean alignment gives the
    remaining errors. Credit is clamped at zero per word, so making a
    word worse never earns negative credit elsewhere.
    """
    _require_equal_lengths(clean, noisy, corrected)
    errors_before = corrected_chars = 0
    for c, n, h in zip(clean, noisy, corrected):
        before = dl_alignment(c, n).cost
        if before == 0:
            continue
        after = dl_alignment(c, h).cost
        errors_before += before
        corrected_chars += max(0, before - after)
    if errors_before == 0:
        return None
    return corrected_chars / errors_before


@dataclass(frozen=True)
class EvalReport:
    wer: float
    word_accuracy: float | None
    char_accuracy: float | None
    counts: dict
    config_fingerprint: str

    def to_json_dict(self) -> dict:
        return {
            "wer": self.wer,
            "word_accuracy": self.word_accuracy,
            "char_accuracy": self.char_accuracy,
            "counts": dict(sorted(self.counts.items())),
            "config_fingerprint": self.config_fingerprint,
        }


def _fingerprint(models: CorrectionModels, config: CorrectionConfig) -> str:
    parts = [
        f"error_model={config.error_model}",
        f"mode={config.mode}",
        f"lambda={config.lambda_!r}",
        f"ablation={config.ablation}",
        f"lm={type(models.lm).__name__}",
    ]
    if models.confusion is not None:
        parts.append(f"channel={models.confusion.content_hash()[:12]}")
    return ";".join(parts)


def evaluate_cell(
    dataset: EvalDataset,
    models: CorrectionModels,
    config: CorrectionConfig,
    allow_same_model: bool = False,
) -> EvalReport:
    """Run the corrector over the dataset and aggregate the three metrics.

    Refuses to score when the dataset's generator confusion model is the
    same model now driving the corrector, unless explicitly overridden —
    generation and correction must come from different corpora for a fair
    measurement.
    """
    generator_hash = dataset.meta.get("generator_model_hash")
    if (
        not allow_same_model
        and generator_hash is not None
        and models.confusion is not None
        and generator_hash == models.confusion.content_hash()
    ):
        raise SameModelError(
            "dataset was generated by this exact confusion model; evaluate "
            "with a model trained on a different corpus, or pass "
            "allow_same_model=True to override"
        )

    total_words = 0
    wrong_after = 0
    error_words = 0
    fixed_words = 0
    error_chars = 0
    fixed_chars = 0
    for noisy, clean in dataset.pairs:
        result = run_correction(noisy, models, config)
        corrected = result.corrected
        total_words += len(clean)
        for c, n, h in zip(clean, noisy, corrected):
            if h != c:
                wrong_after += 1
            if n != c:
                error_words += 1
                if h == c:
                    fixed_words += 1
                before = dl_alignment(c, n).cost
                after = dl_alignment(c, h).cost
                error_chars += before
                fixed_chars += max(0, before - after)

    counts = {
        "total_words": total_words,
        "error_words": error_words,
        "corrected_words": fixed_words,
        "error_chars": error_chars,
        "corrected_chars": fixed_chars,
    }
    return EvalReport(
        wer=wrong_after / total_words if total_words else 0.0,
        word_accuracy=fixed_words / error_words if error_words else None,
        char_accuracy=fixed_chars / error_chars if error_chars else None,
        counts=counts,
        config_fingerprint=_fingerprint(models, config),
    )


def evaluate_grid(
    dataset: EvalDataset,
    cells: Sequence[tuple[str, CorrectionModels, CorrectionConfig]],
    allow_same_model: bool = False,
) -> dict[str, EvalReport]:
    """Evaluate every labeled (models, config) cell; labels must be unique."""
    reports: dict[str, EvalReport] = {}
    for label, models, config in cells:
        if label in reports:
            raise ValueError(f"duplicate cell label {label!r}")
        reports[label] = evaluate_cell(dataset, models, config, allow_same_model)
    return reports


def format_report_table(reports: dict[str, EvalReport]) -> str:
    """Aligned text table: one row per cell, WER / word acc / char acc."""

    def fmt(v: float | None) -> str:
        return "n/a" if v is None else f"{v:.4f}"

    width = max([len("cell")] + [len(label) for label in reports])
    lines = [f"{'cell':<{width}}  {'WER':>8}  {'word_acc':>8}  {'char_acc':>8}"]
    for label in sorted(reports):
        r = reports[label]
        lines.append(
            f"{label:<{width}}  {r.wer:>8.4f}  {fmt(r.word_accuracy):>8}  "
            f"{fmt(r.char_accuracy):>8}"
        )
    return "\n".join(lines) + "\n"


def reports_to_json(reports: dict[str, EvalReport]) -> str:
    payload = {label: r.to_json_dict() for label, r in sorted(reports.items())}
    return json.dumps(payload, ensure_ascii=False, sort_keys=True, indent=1) + "\n"
