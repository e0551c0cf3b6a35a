"""Drives the command line on the bundled fixture corpus."""

import json
import subprocess
import sys
from pathlib import Path

import pytest

from claimcheck import cli
from claimcheck.corpus import Corpus

ROOT = Path(__file__).resolve().parent.parent
DUMP = ROOT / "data" / "mini_wiki.jsonl"
CLAIMS = ROOT / "data" / "mini_claims.jsonl"


def run(argv, capsys):
    code = cli.main(["-q", *map(str, argv)])
    captured = capsys.readouterr()
    return code, captured.out, captured.err


def read_rows(path):
    with open(path, encoding="utf-8") as fp:
        return [json.loads(line) for line in fp if line.strip()]


@pytest.fixture(scope="module")
def workdir(tmp_path_factory):
    """Corpus + index + candidates built once; later stages reuse them."""
    d = tmp_path_factory.mktemp("cli")
    assert cli.main(["-q", "ingest", "--dump", str(DUMP),
                     "--out", str(d / "corpus.json.gz")]) == 0
    assert cli.main(["-q", "index", "--corpus", str(d / "corpus.json.gz"),
                     "--bins", "65536", "--out", str(d / "index.npz")]) == 0
    assert cli.main(["-q", "retrieve", "--corpus", str(d / "corpus.json.gz"),
                     "--claims", str(CLAIMS), "--index", str(d / "index.npz"),
                     "--out", str(d / "candidates.jsonl")]) == 0
    return d


class TestStages:
    def test_ingest_summary_and_roundtrip(self, tmp_path, capsys):
        out = tmp_path / "corpus.json.gz"
        code, stdout, _ = run(["ingest", "--dump", DUMP, "--out", out], capsys)
        assert code == 0
        assert "ingested 50 documents" in stdout
        assert len(Corpus.load(out)) == 50

    def test_ingest_byte_identical(self, tmp_path, capsys):
        a, b = tmp_path / "a.json.gz", tmp_path / "b.json.gz"
        assert run(["ingest", "--dump", DUMP, "--out", a], capsys)[0] == 0
        assert run(["ingest", "--dump", DUMP, "--out", b], capsys)[0] == 0
        assert a.read_bytes() == b.read_bytes()

    def test_index_byte_identical(self, workdir, tmp_path, capsys):
        again = tmp_path / "again.npz"
        code, stdout, _ = run(["index", "--corpus", workdir / "corpus.json.gz",
                               "--bins", "65536", "--out", again], capsys)
        assert code == 0 and "indexed 50 documents" in stdout
        assert again.read_bytes() == (workdir / "index.npz").read_bytes()

    def test_retrieve_covers_all_claims(self, workdir):
        rows = read_rows(workdir / "candidates.jsonl")
        assert len(rows) == 30
        for row in rows:
            assert isinstance(row["id"], int)
            for page, line in row["candidates"]:
                assert isinstance(page, str) and isinstance(line, int)

    def test_retrieve_byte_identical(self, workdir, tmp_path, capsys):
        again = tmp_path / "again.jsonl"
        code, _, _ = run(["retrieve", "--corpus", workdir / "corpus.json.gz",
                          "--claims", CLAIMS, "--index", workdir / "index.npz",
                          "--out", again], capsys)
        assert code == 0
        assert again.read_bytes() == (workdir / "candidates.jsonl").read_bytes()

    def test_gen_nli_deterministic_and_balanced(self, workdir, tmp_path, capsys):
        outs = []
        for name in ("x", "y"):
            out, manifest = tmp_path / f"{name}.jsonl", tmp_path / f"{name}.json"
            code, _, _ = run(["gen-nli", "--corpus", workdir / "corpus.json.gz",
                              "--claims", CLAIMS, "--seed", "5",
                              "--out", out, "--manifest", manifest], capsys)
            assert code == 0
            outs.append((out.read_bytes(), manifest.read_bytes()))
        assert outs[0] == outs[1]
        manifest = json.loads(outs[0][1])
        balanced = manifest["balanced"]
        assert len(set(balanced.values())) == 1  # equal class counts
        assert manifest["generated"]["neutral_skipped"] >= 0

    def test_features_train_predict_score(self, workdir, capsys):
        d = workdir
        code, _, _ = run(["features", "--corpus", d / "corpus.json.gz",
                          "--claims", CLAIMS, "--candidates", d / "candidates.jsonl",
                          "--out", d / "features.jsonl",
                          "--scored-out", d / "scored.jsonl"], capsys)
        assert code == 0
        feature_rows = read_rows(d / "features.jsonl")
        assert len(feature_rows) == 30
        assert all(f"f{i}" in feature_rows[0] for i in range(1, 13))

        code, stdout, _ = run(["train", "--claims", CLAIMS,
                               "--features", d / "features.jsonl",
                               "--trees", "30", "--seed", "7",
                               "--out", d / "model.json"], capsys)
        assert code == 0 and "trained 30 trees" in stdout

        code, _, _ = run(["predict", "--claims", CLAIMS,
                          "--features", d / "features.jsonl",
                          "--scored", d / "scored.jsonl",
                          "--model", d / "model.json",
                          "--out", d / "pred.jsonl"], capsys)
        assert code == 0

        code, stdout, _ = run(["score", "--gold", CLAIMS, "--pred", d / "pred.jsonl",
                               "--json-out", d / "report.json"], capsys)
        assert code == 0
        assert "label accuracy" in stdout and "fever score" in stdout
        report = json.loads((d / "report.json").read_text())
        assert set(report) >= {"label_accuracy", "evidence_precision", "evidence_recall",
                               "evidence_f1", "fever_score", "confusion"}

    def test_score_on_perfect_predictions(self, tmp_path, capsys):
        # predictions rebuilt from gold must hit 1.0 everywhere
        pred = tmp_path / "perfect.jsonl"
        with open(pred, "w", encoding="utf-8") as fp:
            for row in read_rows(CLAIMS):
                pairs = sorted({(ev[2], ev[3]) for group in row.get("evidence") or []
                                for ev in group if ev[2] is not None})
                fp.write(json.dumps({"id": row["id"], "predicted_label": row["label"],
                                     "predicted_evidence": [list(p) for p in pairs]}))
                fp.write("\n")
        code, stdout, _ = run(["score", "--gold", CLAIMS, "--pred", pred], capsys)
        assert code == 0
        assert stdout.count("1.0000") >= 5


class TestErrors:
    def test_predict_without_model_is_usage_error(self):
        with pytest.raises(SystemExit) as exc:
            cli.main(["-q", "predict", "--claims", str(CLAIMS),
                      "--features", "x", "--scored", "y", "--out", "z"])
        assert exc.value.code == 2

    def test_unknown_subcommand(self):
        with pytest.raises(SystemExit) as exc:
            cli.main(["frobnicate"])
        assert exc.value.code == 2

    def test_missing_corpus_file(self, tmp_path, capsys):
        code, _, err = run(["retrieve", "--corpus", tmp_path / "nope.gz",
                            "--claims", CLAIMS, "--out", tmp_path / "o"], capsys)
        assert code == 1
        assert "error:" in err

    def test_bad_prediction_row_reports_line(self, tmp_path, capsys):
        pred = tmp_path / "bad.jsonl"
        pred.write_text('{"id": 101, "predicted_label": "SUPPORTS", '
                        '"predicted_evidence": [["page", "not_an_int"]]}\n')
        code, _, err = run(["score", "--gold", CLAIMS, "--pred", pred], capsys)
        assert code == 1
        assert "line 1" in err


class TestEndToEnd:
    def test_e2e_baseline(self, tmp_path, capsys):
        out, report = tmp_path / "pred.jsonl", tmp_path / "report.json"
        code, stdout, _ = run(["e2e", "--corpus", DUMP, "--claims", CLAIMS,
                               "--bins", "65536", "--trees", "20", "--seed", "3",
                               "--out", out, "--report", report], capsys)
        assert code == 0
        assert "fever score" in stdout
        rows = read_rows(out)
        assert len(rows) == 30
        for lineno, row in enumerate(rows, start=1):
            cli._validate_prediction_row(row, lineno)
        assert 0.0 <= json.loads(report.read_text())["fever_score"] <= 1.0

    def test_module_entry_point(self, tmp_path):
        out = tmp_path / "pred.jsonl"
        proc = subprocess.run(
            [sys.executable, "-m", "claimcheck.cli", "-q", "e2e",
             "--corpus", str(DUMP), "--claims", str(CLAIMS),
             "--bins", "65536", "--trees", "10", "--out", str(out)],
            capture_output=True, text=True, timeout=120)
        assert proc.returncode == 0, proc.stderr
        assert "label accuracy" in proc.stdout
        assert out.exists()
