
import numpy as np
import pandas as pd
import pytest

from g2p_complexity.checkpoint import load_checkpoint
from g2p_complexity.cli import main

from conftest import toy_lexicon_lines

TINY_EXPERIMENT = """\
[experiment]
id = toy
seed = 11
sample_size = 100
split_sizes = 80,10,10

[model]
embedding_dim = 8
num_layers = 1
ff_size = 8
attention_size = 8
num_heads = 1

[training]
epochs = 2
batch_size = 32
"""


@pytest.fixture
def workspace(tmp_path, write_lexicon, monkeypatch):
    write_lexicon("eo", toy_lexicon_lines())
    write_lexicon("sw", toy_lexicon_lines("abcde", 3)[::-1])
    out = tmp_path / "out"
    monkeypatch.setenv("G2P_OUTPUT_ROOT", str(out))

    def _manifest(extra: str = "") -> str:
        path = tmp_path / "manifest.ini"
        path.write_text(TINY_EXPERIMENT + "\n[language:eo]\ndata = eo.txt\n\n[language:sw]\ndata = sw.txt\n" + extra,
                        encoding="utf-8")
        return str(path)
    return tmp_path, out, _manifest


def read_bytes(path) -> bytes:
    with open(path, "rb") as f:
        return f.read()


class TestRunAll:
    def test_full_pipeline(self, workspace, capsys):
        _, out, manifest = workspace
        assert main(["run-all", "--manifest", manifest(), "--compare"]) == 0
        for tag in ("eo", "sw"):
            for name in ("splits.tsv", "vocab.src", "vocab.tgt", "model.g2pc", "train.log", "eval.tsv",
                         "predictions.tsv"):
                assert (out / "toy" / tag / name).is_file(), (tag, name)
        report = out / "toy" / "report"
        table2 = pd.read_csv(report / "table2.tsv", sep="\t", dtype=str)
        assert sorted(table2["language"]) == ["eo", "sw"]
        assert (report / "table3.tsv").is_file()
        assert (report / "figure1.svg").is_file()
        assert (report / "comparison.tsv").is_file()
        assert "spearman" in capsys.readouterr().out

        log = pd.read_csv(out / "toy" / "eo" / "train.log", sep="\t")
        assert list(log.columns) == ["epoch", "train_loss", "dev_loss", "seconds"]
        assert log["epoch"].tolist() == [1, 2]
        ckpt = load_checkpoint(str(out / "toy" / "eo" / "model.g2pc"))
        assert ckpt.log[-1].steps == 6  # 80 / 32 -> 3 batches per epoch

    def test_prepare_is_reproducible(self, workspace):
        _, out, manifest = workspace
        path = manifest()
        assert main(["prepare", "--manifest", path, "--lang", "eo"]) == 0
        first = read_bytes(out / "toy" / "eo" / "splits.tsv")
        assert main(["prepare", "--manifest", path, "--lang", "eo", "--force"]) == 0
        assert read_bytes(out / "toy" / "eo" / "splits.tsv") == first
        assert not (out / "toy" / "sw").exists()

        assert main(["prepare", "--manifest", path, "--lang", "eo", "--force", "--seed", "12"]) == 0
        assert read_bytes(out / "toy" / "eo" / "splits.tsv") != first

    def test_parallel_matches_serial(self, workspace, monkeypatch):
        tmp_path, _, manifest = workspace
        path = manifest()
        trained = {}
        for n in (1, 2):
            root = tmp_path / f"out{n}"
            monkeypatch.setenv("G2P_OUTPUT_ROOT", str(root))
            assert main(["prepare", "--manifest", path, "--parallel", str(n)]) == 0
            assert main(["train", "--manifest", path, "--parallel", str(n)]) == 0
            trained[n] = root
        for tag in ("eo", "sw"):
            a = load_checkpoint(str(trained[1] / "toy" / tag / "model.g2pc"))
            b = load_checkpoint(str(trained[2] / "toy" / tag / "model.g2pc"))
            assert all(np.array_equal(a.params[k], b.params[k]) for k in a.params)
            assert read_bytes(trained[1] / "toy" / tag / "splits.tsv") == read_bytes(trained[2] / "toy" / tag / "splits.tsv")


class TestFailures:
    def test_missing_data_file_is_usage_error(self, workspace):
        tmp_path, _, manifest = workspace
        path = manifest("\n[language:de]\ndata = de.txt\n")
        assert main(["prepare", "--manifest", path]) == 2

    def test_unknown_language_filter(self, workspace):
        _, _, manifest = workspace
        assert main(["train", "--manifest", manifest(), "--lang", "xx"]) == 2

    def test_bad_invocation(self):
        assert main(["no-such-command"]) == 2

    def test_small_lexicon_is_skipped(self, workspace, write_lexicon):
        _, out, manifest = workspace
        write_lexicon("ma", toy_lexicon_lines()[:40])
        path = manifest("\n[language:ma]\ndata = ma.txt\n")
        assert main(["prepare", "--manifest", path]) == 0
        assert not (out / "toy" / "ma" / "splits.tsv").exists()
        assert (out / "toy" / "eo" / "splits.tsv").exists()

    def test_malformed_lexicon_is_partial_failure(self, workspace, write_lexicon):
        _, out, manifest = workspace
        write_lexicon("fi", toy_lexicon_lines() + ["broken line"])
        path = manifest("\n[language:fi]\ndata = fi.txt\n")
        assert main(["prepare", "--manifest", path]) == 1
        assert (out / "toy" / "eo" / "splits.tsv").exists()

    def test_evaluate_without_checkpoint(self, workspace):
        _, _, manifest = workspace
        path = manifest()
        assert main(["prepare", "--manifest", path, "--lang", "eo"]) == 0
        assert main(["evaluate", "--manifest", path, "--lang", "eo"]) == 1

    def test_report_without_results(self, workspace):
        _, _, manifest = workspace
        assert main(["report", "--manifest", manifest()]) == 1


class TestManifestInit:
    def test_writes_manifest(self, tmp_path):
        data = tmp_path / "data"
        data.mkdir()
        (data / "eo.txt").write_text("\n".join(toy_lexicon_lines()) + "\n", encoding="utf-8")
        target = str(tmp_path / "generated.ini")
        assert main(["manifest", "init", "--from-dir", str(data), "--manifest", target]) == 0
        assert "[language:eo]" in open(target, encoding="utf-8").read()
        assert main(["manifest", "init", "--from-dir", str(data), "--manifest", target]) == 2
        assert main(["manifest", "init", "--from-dir", str(data), "--manifest", target, "--force"]) == 0


class TestManifestValues:
    def test_bad_samples_per_char_is_usage_error(self, workspace):
        _, _, manifest = workspace
        path = manifest("sampling = proportional\nsamples_per_char = lots\n")
        assert main(["prepare", "--manifest", path]) == 2

    def test_fractional_epochs_is_usage_error(self, workspace):
        tmp_path, out, _ = workspace
        path = tmp_path / "fractional.ini"
        path.write_text(TINY_EXPERIMENT.replace("epochs = 2", "epochs = 2.5") + "\n[language:eo]\ndata = eo.txt\n",
                        encoding="utf-8")
        assert main(["run-all", "--manifest", str(path)]) == 2
        assert not out.exists()

    def test_unexpected_error_only_fails_that_language(self, workspace, monkeypatch):
        from g2p_complexity import pipeline

        _, out, manifest = workspace
        path = manifest()
        real = pipeline.train_language

        def flaky(split, *args, **kwargs):
            if split.language_tag == "sw":
                raise TypeError("boom")
            return real(split, *args, **kwargs)
        monkeypatch.setattr(pipeline, "train_language", flaky)
        assert main(["prepare", "--manifest", path]) == 0
        assert main(["train", "--manifest", path]) == 1
        assert (out / "toy" / "eo" / "model.g2pc").is_file()
        assert not (out / "toy" / "sw" / "model.g2pc").exists()
