# g2p_complexity/manifest.py
"""
Experiment manifest: an INI file.

    [experiment]
    id = ipa-dict
    seed = 1234
    sample_size = 10000
    split_sizes = 8000,1000,1000
    sampling = fixed            ; or: proportional
    samples_per_char = 100      ; proportional mode only
    max_seq_len = 64

    [model]                     ; any ModelConfig field
    [training]                  ; any TrainConfig field except seed
    [orthography]               ; tag = latin|logographic|abugida|abjad|other

    [language:eo]
    data = data/eo.txt          ; relative to the manifest's directory
    seed = 99                   ; optional per-language override
"""
from __future__ import annotations
import configparser
import dataclasses
import glob
import os
from dataclasses import dataclass, field, replace
from fractions import Fraction
from typing import Iterable

from . import config
from .errors import ConfigError, ManifestError
from .modeling import ModelConfig
from .reference import ORTHOGRAPHY, ORTHOGRAPHY_TYPES
from .training import TrainConfig
from .utils import language_seed

SAMPLING_MODES = ("fixed", "proportional")
_LANG_PREFIX = "language:"


@dataclass(frozen=True)
class LanguageSpec:
    tag: str
    data_path: str
    seed: int
    seed_overridden: bool = False
    sample_size: int = config.SAMPLE_SIZE
    split_sizes: tuple[int, int, int] = config.SPLIT_SIZES
    sampling: str = "fixed"
    samples_per_char: str | None = None


@dataclass(frozen=True)
class ExperimentManifest:
    experiment_id: str
    global_seed: int
    languages: dict[str, LanguageSpec]
    model_overrides: dict = field(default_factory=dict)
    train_overrides: dict = field(default_factory=dict)
    orthography: dict[str, str] = field(default_factory=dict)
    max_seq_len: int = config.MAX_SEQ_LEN
    output_root: str = config.OUTPUT_ROOT
    path: str = ""

    # ----- layout -----
    @property
    def experiment_dir(self) -> str:
        return os.path.join(self.output_root, self.experiment_id)

    def language_dir(self, tag: str) -> str:
        return os.path.join(self.experiment_dir, tag)

    def artifact(self, tag: str, name: str) -> str:
        return os.path.join(self.language_dir(tag), name)

    @property
    def report_dir(self) -> str:
        return os.path.join(self.experiment_dir, "report")

    # ----- selection / overrides -----
    def select(self, tags: Iterable[str] | None) -> list[str]:
        if not tags:
            return list(self.languages)
        tags = list(tags)
        unknown = [t for t in tags if t not in self.languages]
        if unknown:
            raise ManifestError(f"languages not in manifest {self.path or ''}: {', '.join(unknown)}")
        return tags

    def with_seed(self, seed: int) -> "ExperimentManifest":
        langs = {tag: spec if spec.seed_overridden else replace(spec, seed=language_seed(seed, tag))
                 for tag, spec in self.languages.items()}
        return replace(self, global_seed=int(seed), languages=langs)

    def orthography_of(self, tag: str) -> str:
        return self.orthography.get(tag, ORTHOGRAPHY.get(tag, "other"))

    def model_config(self, src_vocab_size: int, tgt_vocab_size: int) -> ModelConfig:
        kwargs = {"max_seq_len": self.max_seq_len, **self.model_overrides}
        return ModelConfig(src_vocab_size=src_vocab_size, tgt_vocab_size=tgt_vocab_size, **kwargs)

    def train_config(self, tag: str) -> TrainConfig:
        return TrainConfig(seed=self.languages[tag].seed, **self.train_overrides)


def _coerce(raw: str, key: str, section: str, type_name: str):
    """Parse one override by its dataclass field type ("int", "float", "float | None")."""
    text = raw.strip()
    if text.lower() in ("none", ""):
        if "None" in type_name:
            return None
        raise ManifestError(f"[{section}] {key}: a value is required")
    if type_name.startswith("int"):
        try:
            return int(text)
        except ValueError:
            raise ManifestError(f"[{section}] {key}: expected an integer, got {raw!r}") from None
    try:
        return float(text)
    except ValueError:
        raise ManifestError(f"[{section}] {key}: expected a number, got {raw!r}") from None


def _overrides(cp: configparser.ConfigParser, section: str, cls, forbidden: set[str]) -> dict:
    if not cp.has_section(section):
        return {}
    types = {f.name: getattr(f.type, "__name__", str(f.type))
             for f in dataclasses.fields(cls) if f.name not in forbidden}
    out = {}
    for key, raw in cp.items(section):
        if key not in types:
            raise ManifestError(f"[{section}] unknown key {key!r} (allowed: {', '.join(sorted(types))})")
        out[key] = _coerce(raw, key, section, types[key])
    return out


def _samples_per_char(raw: str, where: str) -> str:
    try:
        value = Fraction(raw.strip())
    except (ValueError, ZeroDivisionError):
        raise ManifestError(f"{where} samples_per_char must be a positive rational, got {raw!r}") from None
    if value <= 0:
        raise ManifestError(f"{where} samples_per_char must be a positive rational, got {raw!r}")
    return raw.strip()


def _split_sizes(raw: str) -> tuple[int, int, int]:
    try:
        sizes = tuple(int(x) for x in raw.split(","))
    except ValueError:
        raise ManifestError(f"split_sizes must be three integers, got {raw!r}") from None
    if len(sizes) != 3 or min(sizes) < 0:
        raise ManifestError(f"split_sizes must be three integers, got {raw!r}")
    return sizes


def load_manifest(path: str) -> ExperimentManifest:
    if not os.path.isfile(path):
        raise ManifestError(f"manifest not found: {path}")
    cp = configparser.ConfigParser(inline_comment_prefixes=(";", "#"))
    cp.optionxform = str  # language tags and keys are case-sensitive
    try:
        cp.read(path, encoding="utf-8")
    except configparser.Error as e:
        raise ManifestError(f"{path}: {e}") from e

    exp = cp["experiment"] if cp.has_section("experiment") else {}
    try:
        global_seed = int(exp.get("seed", "0"))
        sample_size = int(exp.get("sample_size", str(config.SAMPLE_SIZE)))
        max_seq_len = int(exp.get("max_seq_len", str(config.MAX_SEQ_LEN)))
    except ValueError as e:
        raise ManifestError(f"{path}: [experiment] {e}") from e
    split_sizes = _split_sizes(exp.get("split_sizes", ",".join(map(str, config.SPLIT_SIZES))))
    default_sampling = exp.get("sampling", "fixed")
    default_spc = exp.get("samples_per_char")
    base_dir = os.path.dirname(os.path.abspath(path))
    output_root = os.environ.get("G2P_OUTPUT_ROOT") or exp.get("output_root") or config.OUTPUT_ROOT

    languages: dict[str, LanguageSpec] = {}
    for section in cp.sections():
        if not section.startswith(_LANG_PREFIX):
            continue
        tag = section[len(_LANG_PREFIX):].strip()
        sec = cp[section]
        if "data" not in sec:
            raise ManifestError(f"{path}: [{section}] has no data path")
        data_path = sec["data"]
        if not os.path.isabs(data_path):
            data_path = os.path.join(base_dir, data_path)
        if not os.path.isfile(data_path) or not os.access(data_path, os.R_OK):
            raise ManifestError(f"{path}: [{section}] data file not readable: {data_path}")
        sampling = sec.get("sampling", default_sampling)
        if sampling not in SAMPLING_MODES:
            raise ManifestError(f"{path}: [{section}] sampling must be one of {SAMPLING_MODES}, got {sampling!r}")
        spc = sec.get("samples_per_char", default_spc)
        if sampling == "proportional" and not spc:
            raise ManifestError(f"{path}: [{section}] proportional sampling needs samples_per_char")
        if spc:
            spc = _samples_per_char(spc, f"{path}: [{section}]")
        if sampling == "fixed" and sum(split_sizes) != sample_size:
            raise ManifestError(f"{path}: [{section}] split_sizes {split_sizes} do not add up to "
                                f"sample_size {sample_size}")
        seed_raw = sec.get("seed")
        try:
            seed = int(seed_raw) if seed_raw is not None else language_seed(global_seed, tag)
        except ValueError:
            raise ManifestError(f"{path}: [{section}] seed must be an integer, got {seed_raw!r}") from None
        languages[tag] = LanguageSpec(
            tag=tag, data_path=data_path, seed=seed, seed_overridden=seed_raw is not None,
            sample_size=sample_size, split_sizes=split_sizes, sampling=sampling, samples_per_char=spc,
        )
    if not languages:
        raise ManifestError(f"{path}: no [language:<tag>] sections")

    orthography = dict(cp.items("orthography")) if cp.has_section("orthography") else {}
    bad = {t: o for t, o in orthography.items() if o not in ORTHOGRAPHY_TYPES}
    if bad:
        raise ManifestError(f"{path}: unknown orthography types {bad}")

    model_overrides = _overrides(cp, "model", ModelConfig, {"src_vocab_size", "tgt_vocab_size", "max_seq_len"})
    train_overrides = _overrides(cp, "training", TrainConfig, {"seed"})
    try:
        # vocabulary sizes are only known after prepare; 1 stands in for them here
        ModelConfig(src_vocab_size=1, tgt_vocab_size=1, max_seq_len=max_seq_len, **model_overrides)
        TrainConfig(**train_overrides)
    except ConfigError as e:
        raise ManifestError(f"{path}: {e}") from e

    return ExperimentManifest(
        experiment_id=exp.get("id", "default"),
        global_seed=global_seed,
        languages=languages,
        model_overrides=model_overrides,
        train_overrides=train_overrides,
        orthography=orthography,
        max_seq_len=max_seq_len,
        output_root=output_root,
        path=path,
    )


def init_manifest(data_dir: str, experiment_id: str = "ipa-dict", seed: int = 0) -> str:
    """Manifest text with one language section per `<tag>.txt` in data_dir."""
    files = sorted(glob.glob(os.path.join(data_dir, "*.txt")))
    if not files:
        raise ManifestError(f"no *.txt lexicon files in {data_dir}")
    out = [
        "[experiment]",
        f"id = {experiment_id}",
        f"seed = {seed}",
        f"sample_size = {config.SAMPLE_SIZE}",
        f"split_sizes = {','.join(map(str, config.SPLIT_SIZES))}",
        "sampling = fixed",
        f"max_seq_len = {config.MAX_SEQ_LEN}",
        "",
    ]
    for f in files:
        tag = os.path.splitext(os.path.basename(f))[0]
        out += [f"[language:{tag}]", f"data = {os.path.abspath(f)}", ""]
    return "\n".join(out)
