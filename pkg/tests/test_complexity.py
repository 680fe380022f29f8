import math
import xml.etree.ElementTree as ET
from fractions import Fraction

import pandas as pd
import pytest

from g2p_complexity.complexity import (
    TABLE2_COLUMNS, TABLE3_COLUMNS, compare_with_reference, compute_record, emit_scatter, emit_table,
    orthography_gap, rank_correlation, render_accuracy, render_distance, render_ratio, render_samples,
    scatter_svg, table_frame,
)
from g2p_complexity.errors import EmptyReport, InvalidArgument, LengthMismatch, ZeroInventory
from g2p_complexity.reference import REFERENCE, REFERENCE_ROWS

SVG_NS = "{http://www.w3.org/2000/svg}"

# tag: (accuracy, ratio, distance, samples per unique character) as printed
PUBLISHED = {
    "zh_hant": ("71.98%", "0.002", "1.00", "0.34"),
    "zh_hans": ("73.88%", "0.002", "1.00", "0.39"),
    "yue": ("79.95%", "0.002", "1.00", "0.54"),
    "ja": ("73.66%", "0.006", "0.99", "1.45"),
    "vi_S": ("95.53%", "0.478", "0.52", "88.88"),
    "vi_N": ("95.65%", "0.478", "0.52", "88.88"),
    "vi_C": ("96.32%", "0.500", "0.50", "88.88"),
    "or": ("95.00%", "0.603", "0.40", "126.98"),
    "ar": ("87.10%", "0.842", "0.16", "210.52"),
    "eo": ("97.08%", "0.931", "0.07", "275.86"),
    "fr_FR": ("92.12%", "0.935", "0.07", "173.91"),
    "es_MX": ("95.68%", "0.970", "0.03", "242.42"),
    "es_ES": ("94.85%", "1.000", "0.00", "242.42"),
    "ma": ("96.87%", "1.111", "0.11", "296.29"),
    "fi": ("91.81%", "1.118", "0.12", "235.29"),
    "fr_QC": ("90.80%", "1.149", "0.15", "170.21"),
    "nb": ("84.74%", "1.412", "0.41", "235.29"),
    "en_US": ("80.30%", "1.423", "0.42", "307.69"),
    "sv": ("85.42%", "1.455", "0.45", "242.42"),
    "sw": ("96.63%", "1.667", "0.67", "333.33"),
    "en_UK": ("83.92%", "1.808", "0.81", "307.69"),
    "de": ("85.55%", "2.625", "1.63", "250"),
}


def published_records():
    return [compute_record(r.tag, r.orthography, (r.ipa_vocab_len, r.source_vocab_len), r.accuracy)
            for r in REFERENCE_ROWS]


class TestComputeRecord:
    def test_german(self):
        r = compute_record("de", "latin", (84, 32), 0.8555)
        assert r.ratio == Fraction(21, 8)
        assert r.distance_from_unity == Fraction(13, 8)
        assert r.samples_per_char == 250
        assert (render_ratio(r.ratio), render_distance(r.distance_from_unity)) == ("2.625", "1.63")

    def test_symmetric_inventories(self):
        r = compute_record("es_ES", "latin", (33, 33), 0.9485)
        assert (render_ratio(r.ratio), render_distance(r.distance_from_unity)) == ("1.000", "0.00")

    def test_zero_source_inventory(self):
        with pytest.raises(ZeroInventory):
            compute_record("xx", "latin", (10, 0), 0.5)

    def test_unknown_orthography(self):
        with pytest.raises(InvalidArgument):
            compute_record("xx", "cuneiform", (10, 10), 0.5)

    def test_every_published_cell(self):
        assert len(REFERENCE_ROWS) == 22
        for r in published_records():
            acc, ratio, distance, samples = PUBLISHED[r.language_tag]
            assert render_accuracy(r.accuracy) == acc, r.language_tag
            assert render_ratio(r.ratio) == ratio, r.language_tag
            assert render_distance(r.distance_from_unity) == distance, r.language_tag
            assert render_samples(r.samples_per_char) == samples, r.language_tag

    def test_samples_truncate(self):
        assert render_samples(Fraction(8000, 14672)) == "0.54"  # 0.5452...
        assert render_samples(Fraction(8000, 26)) == "307.69"
        assert render_samples(Fraction(7)) == "7"


class TestTables:
    def test_table2_rows_and_order(self, tmp_path):
        path = str(tmp_path / "table2.tsv")
        emit_table(published_records(), "table2", path)
        df = pd.read_csv(path, sep="\t", dtype=str, keep_default_na=False)
        assert list(df.columns) == TABLE2_COLUMNS
        assert len(df) == 22
        assert df["language"].iloc[0] == "de"
        distances = [Fraction(d) for d in df["distance_from_1_1"]]
        assert distances == sorted(distances, reverse=True)
        row = df.set_index("language").loc["eo"]
        assert (row["accuracy"], row["ipa_vocab_len"], row["source_vocab_len"]) == ("97.08%", "27", "29")

    def test_table3_sorted_by_sparsity(self):
        df = table_frame(published_records(), "table3")
        assert list(df.columns) == TABLE3_COLUMNS
        assert df["language"].tolist()[:4] == ["zh_hant", "zh_hans", "yue", "ja"]
        assert df["language"].iloc[-1] == "sw"
        assert df.set_index("language").loc["ar", "orthography_type"] == "abjad"

    def test_empty(self, tmp_path):
        with pytest.raises(EmptyReport):
            emit_table([], "table2", str(tmp_path / "t.tsv"))


class TestScatter:
    def test_points_labels_and_reference_line(self, tmp_path):
        path = str(tmp_path / "figure1.svg")
        emit_scatter(published_records(), path)
        root = ET.parse(path).getroot()
        points = [e for e in root.iter(f"{SVG_NS}circle") if e.get("class") == "point"]
        labels = [e.text for e in root.iter(f"{SVG_NS}text") if e.get("class") == "label"]
        refs = [e for e in root.iter(f"{SVG_NS}line") if e.get("class") == "reference"]
        assert len(points) == 22
        assert sorted(labels) == sorted(REFERENCE)
        assert len(refs) == 1
        assert refs[0].get("x1") == refs[0].get("x2")

    def test_reference_line_inside_axis_when_all_ratios_below_one(self):
        records = [compute_record("zh_hant", "logographic", (41, 23283), 0.7198)]
        root = ET.fromstring(scatter_svg(records))
        ref = next(e for e in root.iter(f"{SVG_NS}line") if e.get("class") == "reference")
        axis = [e for e in root.iter(f"{SVG_NS}line") if e.get("class") == "axis"][0]
        assert float(axis.get("x1")) < float(ref.get("x1")) < float(axis.get("x2"))

    def test_label_is_escaped(self):
        records = [compute_record("a<b", "other", (3, 3), 0.5)]
        ET.fromstring(scatter_svg(records))

    def test_empty(self):
        with pytest.raises(EmptyReport):
            scatter_svg([])


class TestComparison:
    def test_rank_correlation(self):
        assert rank_correlation([1, 2, 3, 4], [10, 20, 30, 40]) == pytest.approx(1.0)
        assert rank_correlation([1, 2, 3, 4], [4, 3, 2, 1]) == pytest.approx(-1.0)
        assert rank_correlation([1, 2, 2, 3], [1, 2, 3, 4]) == pytest.approx(0.9486832980505138)

    def test_rank_correlation_errors(self):
        with pytest.raises(LengthMismatch):
            rank_correlation([1, 2], [1])
        with pytest.raises(InvalidArgument):
            rank_correlation([1], [1])

    def test_published_against_itself(self):
        df, rho, gap = compare_with_reference(published_records())
        assert len(df) == 22
        assert rho == pytest.approx(1.0)
        assert (df["delta_points"].abs() < 1e-9).all()
        assert 100 * gap > 10

    def test_orthography_gap_needs_both_groups(self):
        records = [compute_record("eo", "latin", (27, 29), 0.97)]
        assert math.isnan(orthography_gap(records))
