# g2p_complexity/reference.py
"""Published per-language results and orthography labels, keyed by ipa-dict file tag."""
from __future__ import annotations
from dataclasses import dataclass

ORTHOGRAPHY_TYPES = ("latin", "logographic", "abugida", "abjad", "other")


@dataclass(frozen=True)
class ReferenceRow:
    tag: str
    name: str
    orthography: str
    accuracy: float
    ipa_vocab_len: int
    source_vocab_len: int


# accuracy, IPA inventory, source inventory as printed
REFERENCE_ROWS = (
    ReferenceRow("zh_hant", "Mandarin (hant)", "logographic", 0.7198, 41, 23283),
    ReferenceRow("zh_hans", "Mandarin (hans)", "logographic", 0.7388, 41, 20505),
    ReferenceRow("yue", "Cantonese", "logographic", 0.7995, 33, 14672),
    ReferenceRow("ja", "Japanese", "logographic", 0.7366, 32, 5510),
    ReferenceRow("vi_S", "Vietnamese (Southern)", "latin", 0.9553, 43, 90),
    ReferenceRow("vi_N", "Vietnamese (Northern)", "latin", 0.9565, 43, 90),
    ReferenceRow("vi_C", "Vietnamese (Central)", "latin", 0.9632, 45, 90),
    ReferenceRow("or", "Odia", "abugida", 0.9500, 38, 63),
    ReferenceRow("ar", "Arabic", "abjad", 0.8710, 32, 38),
    ReferenceRow("eo", "Esperanto", "latin", 0.9708, 27, 29),
    ReferenceRow("fr_FR", "French (France)", "latin", 0.9212, 43, 46),
    ReferenceRow("es_MX", "Spanish (Mexico)", "latin", 0.9568, 32, 33),
    ReferenceRow("es_ES", "Spanish (Spain)", "latin", 0.9485, 33, 33),
    ReferenceRow("ma", "Malay", "latin", 0.9687, 30, 27),
    ReferenceRow("fi", "Finnish", "latin", 0.9181, 38, 34),
    ReferenceRow("fr_QC", "French (Quebec)", "latin", 0.9080, 54, 47),
    ReferenceRow("nb", "Norwegian", "latin", 0.8474, 48, 34),
    ReferenceRow("en_US", "English (US)", "latin", 0.8030, 37, 26),
    ReferenceRow("sv", "Swedish", "latin", 0.8542, 48, 33),
    ReferenceRow("sw", "Swahili", "latin", 0.9663, 40, 24),
    ReferenceRow("en_UK", "English (UK)", "latin", 0.8392, 47, 26),
    ReferenceRow("de", "German", "latin", 0.8555, 84, 32),
)

REFERENCE = {row.tag: row for row in REFERENCE_ROWS}

# Static orthography table; extended per experiment from the manifest
ORTHOGRAPHY = {row.tag: row.orthography for row in REFERENCE_ROWS}
