# g2p_complexity/pipeline.py
"""
Per-language stages behind the CLI. Every stage returns a StageOutcome
instead of raising, so one language failing never stops the others.

    out/<experiment>/<lang>/{splits.tsv, vocab.src, vocab.tgt, model.g2pc,
                             train.log, eval.tsv, predictions.tsv}
    out/<experiment>/report/{table2.tsv, table3.tsv, figure1.svg, comparison.tsv}
"""
from __future__ import annotations
import logging
import os
from dataclasses import dataclass
from typing import Callable, Literal, Sequence

import pandas as pd
from joblib import Parallel, delayed

from . import config
from .checkpoint import load_checkpoint, save_checkpoint
from .complexity import (ComplexityRecord, compare_with_reference, compute_record, emit_scatter, emit_table,
                         report_paths, write_comparison)
from .errors import G2PError, IncompleteResults, InsufficientData, IoFailure, MissingCheckpoint
from .evaluation import Denominator, evaluate, read_summary, write_predictions, write_summary
from .lexicon import (Vocabulary, filter_overlong, normalize_lexicon, parse_lexicon, proportional_sample,
                      read_split_manifest, sample_and_split, write_split_manifest)
from .manifest import ExperimentManifest
from .training import ModelCheckpoint, train_language
from .utils import ensure_dir

logger = logging.getLogger(__name__)

Status = Literal["ok", "up-to-date", "skipped", "failed"]

SPLITS, VOCAB_SRC, VOCAB_TGT = "splits.tsv", "vocab.src", "vocab.tgt"
MODEL, TRAIN_LOG = "model.g2pc", "train.log"
EVAL, PREDICTIONS = "eval.tsv", "predictions.tsv"
TRAIN_LOG_COLUMNS = ["epoch", "train_loss", "dev_loss", "seconds"]


@dataclass(frozen=True)
class StageOutcome:
    language_tag: str
    stage: str
    status: Status
    message: str = ""

    @property
    def usable(self) -> bool:
        return self.status in ("ok", "up-to-date")


def _exists(manifest: ExperimentManifest, tag: str, *names: str) -> bool:
    return all(os.path.isfile(manifest.artifact(tag, n)) for n in names)


# ---------- prepare ----------
def prepare_language(manifest: ExperimentManifest, tag: str, force: bool = False) -> StageOutcome:
    if not force and _exists(manifest, tag, SPLITS, VOCAB_SRC, VOCAB_TGT):
        return StageOutcome(tag, "prepare", "up-to-date")
    spec = manifest.languages[tag]
    try:
        with open(spec.data_path, "rb") as f:
            raw = f.read()
    except OSError as e:
        raise IoFailure(f"cannot read {spec.data_path}: {e}") from e

    entries = filter_overlong(normalize_lexicon(parse_lexicon(raw)), manifest.max_seq_len)
    try:
        if spec.sampling == "proportional":
            _, dev_size, test_size = spec.split_sizes
            split = proportional_sample(entries, spec.seed, spec.samples_per_char, dev_size, test_size, tag)
        else:
            split = sample_and_split(entries, spec.seed, spec.sample_size, spec.split_sizes, tag)
    except InsufficientData as e:
        logger.warning("[prepare] %s skipped: %s", tag, e)
        return StageOutcome(tag, "prepare", "skipped", str(e))

    src_vocab, tgt_vocab = split.vocabularies()
    out_dir = ensure_dir(manifest.language_dir(tag))
    write_split_manifest(split, os.path.join(out_dir, SPLITS))
    src_vocab.save(os.path.join(out_dir, VOCAB_SRC))
    tgt_vocab.save(os.path.join(out_dir, VOCAB_TGT))
    logger.info("[prepare] %s: %d usable entries -> %d/%d/%d, inventories src=%d ipa=%d",
                tag, len(entries), len(split.train), len(split.dev), len(split.test),
                src_vocab.inventory_size, tgt_vocab.inventory_size)
    return StageOutcome(tag, "prepare", "ok", f"{len(entries)} entries")


# ---------- train ----------
def write_train_log(ckpt: ModelCheckpoint, path: str) -> None:
    df = pd.DataFrame([(r.epoch, r.train_loss, r.dev_loss, r.seconds) for r in ckpt.log], columns=TRAIN_LOG_COLUMNS)
    df.to_csv(path, sep="\t", index=False, float_format="%.6f", lineterminator="\n", encoding="utf-8")


def train_language_stage(manifest: ExperimentManifest, tag: str, force: bool = False) -> StageOutcome:
    if not _exists(manifest, tag, SPLITS, VOCAB_SRC, VOCAB_TGT):
        return StageOutcome(tag, "train", "failed", "not prepared; run `prepare` first")
    if not force and _exists(manifest, tag, MODEL, TRAIN_LOG):
        return StageOutcome(tag, "train", "up-to-date")
    split = read_split_manifest(manifest.artifact(tag, SPLITS))
    src_vocab = Vocabulary.load(manifest.artifact(tag, VOCAB_SRC))
    tgt_vocab = Vocabulary.load(manifest.artifact(tag, VOCAB_TGT))
    ckpt = train_language(split, src_vocab, tgt_vocab,
                          manifest.model_config(src_vocab.size, tgt_vocab.size), manifest.train_config(tag))
    save_checkpoint(ckpt, manifest.artifact(tag, MODEL))
    write_train_log(ckpt, manifest.artifact(tag, TRAIN_LOG))
    last = ckpt.log[-1] if ckpt.log else None
    logger.info("[train] wrote %s", manifest.artifact(tag, MODEL))
    return StageOutcome(tag, "train", "ok", f"dev_loss={last.dev_loss:.4f}" if last else "")


# ---------- evaluate ----------
def evaluate_language(manifest: ExperimentManifest, tag: str, force: bool = False,
                      denominator: Denominator = "max") -> StageOutcome:
    model_path = manifest.artifact(tag, MODEL)
    if not os.path.isfile(model_path):
        raise MissingCheckpoint(tag, model_path)
    if not force and _exists(manifest, tag, EVAL, PREDICTIONS):
        return StageOutcome(tag, "evaluate", "up-to-date")
    ckpt = load_checkpoint(model_path)
    split = read_split_manifest(manifest.artifact(tag, SPLITS))
    result = evaluate(ckpt, split.test, denominator=denominator)
    result.language_tag = tag
    write_predictions(result, manifest.artifact(tag, PREDICTIONS))
    write_summary(result, manifest.artifact(tag, EVAL))
    logger.info("[evaluate] wrote %s", manifest.artifact(tag, EVAL))
    return StageOutcome(tag, "evaluate", "ok", f"char_accuracy={result.char_accuracy:.4f}")


# ---------- orchestration ----------
def _guarded(stage: str, fn: Callable[..., StageOutcome], manifest: ExperimentManifest, tag: str,
             log_level: int, **kwargs) -> StageOutcome:
    config.setup_logging(log_level)  # loky workers start with bare logging
    try:
        return fn(manifest, tag, **kwargs)
    except (G2PError, OSError) as e:
        logger.error("[%s] %s failed: %s", stage, tag, e)
        return StageOutcome(tag, stage, "failed", str(e))
    except Exception as e:
        logger.exception("[%s] %s failed unexpectedly", stage, tag)
        return StageOutcome(tag, stage, "failed", f"{type(e).__name__}: {e}")


def run_stage(stage: str, fn: Callable[..., StageOutcome], manifest: ExperimentManifest, tags: Sequence[str],
              parallel: int = 1, **kwargs) -> list[StageOutcome]:
    """Run `fn` for each language; up to `parallel` independent worker processes."""
    level = logging.getLogger().getEffectiveLevel()
    if parallel <= 1 or len(tags) <= 1:
        return [_guarded(stage, fn, manifest, t, level, **kwargs) for t in tags]
    return Parallel(n_jobs=parallel)(delayed(_guarded)(stage, fn, manifest, t, level, **kwargs) for t in tags)


def outcomes_frame(outcomes: Sequence[StageOutcome]) -> pd.DataFrame:
    return pd.DataFrame([(o.stage, o.language_tag, o.status, o.message) for o in outcomes],
                        columns=["stage", "language", "status", "message"])


def exit_status(outcomes: Sequence[StageOutcome]) -> int:
    return 1 if any(o.status == "failed" for o in outcomes) else 0


def prepare(manifest: ExperimentManifest, tags: Sequence[str], parallel: int = 1, force: bool = False):
    return run_stage("prepare", prepare_language, manifest, tags, parallel, force=force)


def train(manifest: ExperimentManifest, tags: Sequence[str], parallel: int = 1, force: bool = False):
    return run_stage("train", train_language_stage, manifest, tags, parallel, force=force)


def evaluate_all(manifest: ExperimentManifest, tags: Sequence[str], parallel: int = 1, force: bool = False,
                 denominator: Denominator = "max"):
    return run_stage("evaluate", evaluate_language, manifest, tags, parallel, force=force, denominator=denominator)


# ---------- report ----------
def collect_records(manifest: ExperimentManifest, tags: Sequence[str]) -> tuple[list[ComplexityRecord], list[str]]:
    records, missing = [], []
    for tag in tags:
        if not _exists(manifest, tag, EVAL, VOCAB_SRC, VOCAB_TGT, SPLITS):
            missing.append(tag)
            continue
        summary = read_summary(manifest.artifact(tag, EVAL))
        src_vocab = Vocabulary.load(manifest.artifact(tag, VOCAB_SRC))
        tgt_vocab = Vocabulary.load(manifest.artifact(tag, VOCAB_TGT))
        train_size = len(read_split_manifest(manifest.artifact(tag, SPLITS)).train)
        records.append(compute_record(tag, manifest.orthography_of(tag),
                                      (tgt_vocab.inventory_size, src_vocab.inventory_size),
                                      summary["char_accuracy"], train_size=train_size))
    return records, missing


def report(manifest: ExperimentManifest, tags: Sequence[str], compare: bool = False) -> list[StageOutcome]:
    records, missing = collect_records(manifest, tags)
    if not records:
        raise IncompleteResults(missing)
    paths = report_paths(ensure_dir(manifest.report_dir))
    emit_table(records, "table2", paths["table2.tsv"])
    emit_table(records, "table3", paths["table3.tsv"])
    emit_scatter(records, paths["figure1.svg"])
    if compare:
        df, rho, gap = compare_with_reference(records)
        write_comparison(df, rho, gap, paths["comparison.tsv"])
        if len(df):
            print(df[["language", "reproduced", "published", "delta_points"]].to_string(index=False,
                                                                                      float_format="%.4f"))
        print(f"[compare] spearman={rho:.4f} over {len(df)} languages; "
              f"latin - logographic = {100.0 * gap:.2f} points")
    outcomes = [StageOutcome(r.language_tag, "report", "ok") for r in records]
    for tag in missing:
        logger.warning("[report] %s has no evaluation results", tag)
        outcomes.append(StageOutcome(tag, "report", "failed", "no evaluation results"))
    return outcomes


def run_all(manifest: ExperimentManifest, tags: Sequence[str], parallel: int = 1, force: bool = False,
            compare: bool = False, denominator: Denominator = "max") -> list[StageOutcome]:
    """prepare -> train -> evaluate -> report; each stage only sees languages the previous one left usable."""
    outcomes = prepare(manifest, tags, parallel, force)
    ready = [o.language_tag for o in outcomes if o.usable]
    stage = train(manifest, ready, parallel, force)
    outcomes += stage
    ready = [o.language_tag for o in stage if o.usable]
    stage = evaluate_all(manifest, ready, parallel, force, denominator)
    outcomes += stage
    ready = [o.language_tag for o in stage if o.usable]
    outcomes += report(manifest, ready, compare)
    return outcomes
