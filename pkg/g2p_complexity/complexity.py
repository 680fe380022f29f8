# g2p_complexity/complexity.py
"""
Per-language complexity statistics and report artifacts.

Ratios are kept as exact fractions; rounding happens only when rendering:
ratio to 3 decimals half-up, distance to 2 decimals half-up, samples per
character truncated to 2 decimals with trailing zeros removed.
"""
from __future__ import annotations
import logging
import math
import os
from dataclasses import dataclass
from fractions import Fraction
from html import escape
from typing import Literal, Sequence

import numpy as np
import pandas as pd

from .errors import EmptyReport, InvalidArgument, IoFailure, LengthMismatch, ZeroInventory
from .evaluation import EvalResult
from .reference import ORTHOGRAPHY_TYPES, REFERENCE

logger = logging.getLogger(__name__)

TABLE2_COLUMNS = ["language", "accuracy", "ipa_vocab_len", "source_vocab_len", "ratio", "distance_from_1_1"]
TABLE3_COLUMNS = ["language", "orthography_type", "accuracy", "unique_chars", "samples_per_unique_char"]


@dataclass(frozen=True)
class ComplexityRecord:
    language_tag: str
    orthography_type: str
    accuracy: float
    ipa_vocab_len: int
    source_vocab_len: int
    ratio: Fraction
    distance_from_unity: Fraction
    samples_per_char: Fraction


def compute_record(language_tag: str, orthography_type: str, inventories: tuple[int, int],
                   evaluation: EvalResult | float, train_size: int = 8000) -> ComplexityRecord:
    """`inventories` is (ipa_vocab_len, source_vocab_len), specials excluded."""
    ipa_len, source_len = (int(x) for x in inventories)
    if source_len <= 0:
        raise ZeroInventory(language_tag)
    if train_size <= 0:
        raise InvalidArgument(f"train_size must be positive, got {train_size}")
    if orthography_type not in ORTHOGRAPHY_TYPES:
        raise InvalidArgument(f"unknown orthography type {orthography_type!r}")
    accuracy = evaluation.char_accuracy if isinstance(evaluation, EvalResult) else float(evaluation)
    ratio = Fraction(ipa_len, source_len)
    return ComplexityRecord(
        language_tag=language_tag,
        orthography_type=orthography_type,
        accuracy=accuracy,
        ipa_vocab_len=ipa_len,
        source_vocab_len=source_len,
        ratio=ratio,
        distance_from_unity=abs(ratio - 1),
        samples_per_char=Fraction(train_size, source_len),
    )


# ---------- rendering ----------
def _round_half_up(x: Fraction, places: int) -> Fraction:
    scale = 10 ** places
    return Fraction(math.floor(x * scale + Fraction(1, 2)), scale)


def _fixed(x: Fraction, places: int) -> str:
    scaled = int(x * 10 ** places)
    whole, frac = divmod(scaled, 10 ** places)
    return f"{whole}.{frac:0{places}d}" if places else str(whole)


def render_ratio(x: Fraction) -> str:
    return _fixed(_round_half_up(x, 3), 3)


def render_distance(x: Fraction) -> str:
    return _fixed(_round_half_up(x, 2), 2)


def render_samples(x: Fraction) -> str:
    truncated = Fraction(math.floor(x * 100), 100)
    text = _fixed(truncated, 2)
    return text.rstrip("0").rstrip(".")


def render_accuracy(acc: float) -> str:
    return f"{_fixed(_round_half_up(Fraction(acc).limit_denominator(10 ** 9) * 100, 2), 2)}%"


# ---------- tables ----------
def _table2_key(r: ComplexityRecord):
    return (-r.distance_from_unity, r.ratio, r.language_tag)


def _table3_key(r: ComplexityRecord):
    return (r.samples_per_char, r.language_tag)


def table_frame(records: Sequence[ComplexityRecord], which: Literal["table2", "table3"]) -> pd.DataFrame:
    if which == "table2":
        rows = [(r.language_tag, render_accuracy(r.accuracy), r.ipa_vocab_len, r.source_vocab_len,
                 render_ratio(r.ratio), render_distance(r.distance_from_unity))
                for r in sorted(records, key=_table2_key)]
        return pd.DataFrame(rows, columns=TABLE2_COLUMNS)
    if which == "table3":
        rows = [(r.language_tag, r.orthography_type, render_accuracy(r.accuracy), r.source_vocab_len,
                 render_samples(r.samples_per_char))
                for r in sorted(records, key=_table3_key)]
        return pd.DataFrame(rows, columns=TABLE3_COLUMNS)
    raise InvalidArgument(f"unknown table {which!r}")


def emit_table(records: Sequence[ComplexityRecord], which: Literal["table2", "table3"], path: str) -> str:
    if not records:
        raise EmptyReport(f"no records for {which}")
    df = table_frame(records, which)
    try:
        df.to_csv(path, sep="\t", index=False, lineterminator="\n", encoding="utf-8")
    except OSError as e:
        raise IoFailure(f"cannot write {path}: {e}") from e
    logger.info("[report] wrote %s (%d rows)", path, len(df))
    return path


# ---------- figure ----------
def scatter_svg(records: Sequence[ComplexityRecord], width: int = 800, height: int = 560) -> str:
    """Accuracy vs IPA/source inventory ratio, one labeled point per language, blue line at x=1."""
    if not records:
        raise EmptyReport("no records to plot")
    left, right, top, bottom = 70, 30, 50, 60
    pw, ph = width - left - right, height - top - bottom
    ratios = [float(r.ratio) for r in records]
    x_max = max(max(ratios), 1.0) * 1.1
    x_min = 0.0

    def px(x: float) -> float:
        return left + (x - x_min) / (x_max - x_min) * pw

    def py(y: float) -> float:
        return top + (1.0 - y) * ph

    lines = [
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{width}" height="{height}" viewBox="0 0 {width} {height}">',
        '<rect x="0" y="0" width="100%" height="100%" fill="#ffffff"/>',
        f'<text x="{width / 2:.1f}" y="28" text-anchor="middle" font-size="16" font-family="Arial">'
        f'Model accuracy vs ratio of IPA inventory to source alphabet</text>',
        f'<line class="axis" x1="{left}" y1="{top + ph}" x2="{left + pw}" y2="{top + ph}" stroke="#000000"/>',
        f'<line class="axis" x1="{left}" y1="{top}" x2="{left}" y2="{top + ph}" stroke="#000000"/>',
    ]
    for tick in np.linspace(0.0, 1.0, 6):
        lines.append(f'<text class="tick" x="{left - 8}" y="{py(tick) + 4:.2f}" text-anchor="end" font-size="11" '
                     f'font-family="Arial">{tick:.1f}</text>')
    for tick in np.arange(0.0, x_max + 1e-9, 0.5):
        lines.append(f'<text class="tick" x="{px(tick):.2f}" y="{top + ph + 18}" text-anchor="middle" font-size="11" '
                     f'font-family="Arial">{tick:.1f}</text>')
    lines.append(f'<line class="reference" x1="{px(1.0):.2f}" y1="{top}" x2="{px(1.0):.2f}" y2="{top + ph}" '
                 f'stroke="#1f77b4" stroke-width="2"/>')
    for r in sorted(records, key=lambda r: r.language_tag):
        x, y = px(float(r.ratio)), py(r.accuracy)
        lines.append(f'<circle class="point" cx="{x:.2f}" cy="{y:.2f}" r="4" fill="#d62728"/>')
        lines.append(f'<text class="label" x="{x + 6:.2f}" y="{y - 6:.2f}" font-size="10" '
                     f'font-family="Arial">{escape(r.language_tag)}</text>')
    lines.append(f'<text x="{left + pw / 2:.1f}" y="{height - 16}" text-anchor="middle" font-size="13" '
                 f'font-family="Arial">IPA inventory / source alphabet</text>')
    lines.append(f'<text x="18" y="{top + ph / 2:.1f}" text-anchor="middle" font-size="13" font-family="Arial" '
                 f'transform="rotate(-90 18 {top + ph / 2:.1f})">accuracy</text>')
    lines.append("</svg>")
    return "\n".join(lines) + "\n"


def emit_scatter(records: Sequence[ComplexityRecord], path: str) -> str:
    svg = scatter_svg(records)
    try:
        with open(path, "w", encoding="utf-8", newline="\n") as f:
            f.write(svg)
    except OSError as e:
        raise IoFailure(f"cannot write {path}: {e}") from e
    logger.info("[report] wrote %s (%d points)", path, len(records))
    return path


# ---------- comparison ----------
def rank_correlation(a: Sequence[float], b: Sequence[float]) -> float:
    """Spearman coefficient with average ranks for ties."""
    if len(a) != len(b):
        raise LengthMismatch(len(a), len(b))
    if len(a) < 2:
        raise InvalidArgument("rank correlation needs at least two observations")
    ra = pd.Series(list(a), dtype=float).rank(method="average").to_numpy()
    rb = pd.Series(list(b), dtype=float).rank(method="average").to_numpy()
    return float(np.corrcoef(ra, rb)[0, 1])


def orthography_gap(records: Sequence[ComplexityRecord]) -> float:
    """Mean Latin-based accuracy minus mean logographic accuracy (NaN if a group is absent)."""
    latin = [r.accuracy for r in records if r.orthography_type == "latin"]
    logo = [r.accuracy for r in records if r.orthography_type == "logographic"]
    if not latin or not logo:
        return float("nan")
    return float(np.mean(latin) - np.mean(logo))


def compare_with_reference(records: Sequence[ComplexityRecord]) -> tuple[pd.DataFrame, float, float]:
    """Per-language deltas vs the published accuracies, Spearman over shared languages, orthography gap."""
    rows = []
    for r in sorted(records, key=lambda r: r.language_tag):
        ref = REFERENCE.get(r.language_tag)
        if ref is None:
            continue
        rows.append({"language": r.language_tag, "reproduced": r.accuracy, "published": ref.accuracy,
                     "delta_points": 100.0 * (r.accuracy - ref.accuracy),
                     "ipa_vocab_len": r.ipa_vocab_len, "published_ipa": ref.ipa_vocab_len,
                     "source_vocab_len": r.source_vocab_len, "published_source": ref.source_vocab_len})
    df = pd.DataFrame(rows)
    rho = rank_correlation(df["reproduced"], df["published"]) if len(df) >= 2 else float("nan")
    return df, rho, orthography_gap(records)


def write_comparison(df: pd.DataFrame, rho: float, gap: float, path: str) -> str:
    try:
        with open(path, "w", encoding="utf-8", newline="\n") as f:
            df.to_csv(f, sep="\t", index=False, float_format="%.4f", lineterminator="\n")
            f.write(f"# spearman\t{rho:.4f}\n# latin_minus_logographic_points\t{100.0 * gap:.2f}\n")
    except OSError as e:
        raise IoFailure(f"cannot write {path}: {e}") from e
    return path


def report_paths(report_dir: str) -> dict[str, str]:
    return {name: os.path.join(report_dir, name)
            for name in ("table2.tsv", "table3.tsv", "figure1.svg", "comparison.tsv")}
