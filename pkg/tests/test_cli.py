"""End-to-end command-line behavior."""

from __future__ import annotations

import json
import shutil
import subprocess
import sys

import pytest

from agenticsum.cli import BACKEND_URL_ENV, main
from agenticsum.trace import parse_trace, validate_trace

NOTE = (
    "The patient presented with persistent headaches. "
    "Imaging revealed a small mass lesion. "
    "Biopsy confirmed a benign neurogenic tumor. "
    "She tolerated the procedure well. "
    "Discharge planning was completed."
)

SECOND_NOTE = (
    "The patient reported severe nausea. "
    "She was treated with intravenous fluids. "
    "Symptoms resolved before discharge."
)


def write_docs(path, records):
    with open(path, "w", encoding="utf-8") as fh:
        for record in records:
            fh.write(json.dumps(record) + "\n")


def read_rows(path):
    with open(path, encoding="utf-8") as fh:
        return [json.loads(line) for line in fh if line.strip()]


class TestSummarize:
    def test_end_to_end(self, tmp_path, capsys):
        infile = tmp_path / "docs.jsonl"
        out_dir = tmp_path / "out"
        write_docs(infile, [{"id": "a", "text": NOTE}, {"id": "b", "text": SECOND_NOTE}])
        code = main(
            ["summarize", "--in", str(infile), "--out", str(out_dir), "--seed", "3"]
        )
        assert code == 0
        assert "summarize: 2/2 documents ok" in capsys.readouterr().out
        rows = read_rows(out_dir / "summaries.jsonl")
        assert [r["id"] for r in rows] == ["a", "b"]
        for row in rows:
            assert set(row) >= {
                "id", "summary", "halt_reason", "iterations", "a_bar_final",
            }
            trace_text = (out_dir / f"{row['id']}.trace.json").read_text()
            assert trace_text.endswith("\n")
            validate_trace(parse_trace(trace_text))

    def test_per_record_failure_isolated(self, tmp_path, capsys):
        infile = tmp_path / "docs.jsonl"
        out_dir = tmp_path / "out"
        write_docs(infile, [{"id": "good", "text": NOTE}, {"id": "bad"}])
        code = main(["summarize", "--in", str(infile), "--out", str(out_dir)])
        assert code == 1
        assert "summarize: 1/2 documents ok" in capsys.readouterr().out
        rows = read_rows(out_dir / "summaries.jsonl")
        assert rows[0]["id"] == "good"
        assert "summary" in rows[0]
        assert rows[1]["id"] == "bad"
        assert "error" in rows[1]
        assert not (out_dir / "bad.trace.json").exists()

    def test_jobs_do_not_change_output(self, tmp_path):
        infile = tmp_path / "docs.jsonl"
        write_docs(
            infile,
            [{"id": f"doc{i}", "text": NOTE} for i in range(6)],
        )
        serial = tmp_path / "serial"
        parallel = tmp_path / "parallel"
        assert main(["summarize", "--in", str(infile), "--out", str(serial),
                     "--jobs", "1"]) == 0
        assert main(["summarize", "--in", str(infile), "--out", str(parallel),
                     "--jobs", "4"]) == 0
        assert (serial / "summaries.jsonl").read_bytes() == (
            parallel / "summaries.jsonl"
        ).read_bytes()
        for i in range(6):
            name = f"doc{i}.trace.json"
            assert (serial / name).read_bytes() == (parallel / name).read_bytes()

    def test_vanilla_mode(self, tmp_path):
        infile = tmp_path / "docs.jsonl"
        out_dir = tmp_path / "out"
        write_docs(infile, [{"id": "v", "text": NOTE}])
        code = main(
            ["summarize", "--in", str(infile), "--out", str(out_dir),
             "--mode", "vanilla"]
        )
        assert code == 0
        (row,) = read_rows(out_dir / "summaries.jsonl")
        assert row["halt_reason"] == "vanilla"
        assert row["iterations"] == 1
        assert row["a_bar_final"] is None


class TestFocus:
    def test_identity_ratio_returns_input(self, tmp_path):
        infile = tmp_path / "docs.jsonl"
        outfile = tmp_path / "compressed.jsonl"
        write_docs(infile, [{"id": "a", "text": NOTE}])
        code = main(
            ["focus", "--in", str(infile), "--out", str(outfile), "--r", "1.0"]
        )
        assert code == 0
        (row,) = read_rows(outfile)
        assert row["text"] == NOTE
        assert row["k"] == 5
        assert row["kept"] == [0, 1, 2, 3, 4]
        assert len(row["scores"]) == 5

    def test_ratio_limits_kept_sentences(self, tmp_path):
        infile = tmp_path / "docs.jsonl"
        outfile = tmp_path / "compressed.jsonl"
        write_docs(infile, [{"id": "a", "text": NOTE}])
        code = main(
            ["focus", "--in", str(infile), "--out", str(outfile),
             "--r", "0.6", "--scorer", "received"]
        )
        assert code == 0
        (row,) = read_rows(outfile)
        assert row["k"] == 3
        assert len(row["kept"]) == 3
        assert row["kept"] == sorted(row["kept"])


class TestDetect:
    def test_flags_fabrication(self, tmp_path):
        infile = tmp_path / "pairs.jsonl"
        outfile = tmp_path / "detections.jsonl"
        write_docs(
            infile,
            [
                {
                    "id": "p",
                    "document": NOTE,
                    "summary": (
                        "Imaging revealed a small mass lesion. "
                        "The patient has a history of diabetes."
                    ),
                }
            ],
        )
        code = main(["detect", "--in", str(infile), "--out", str(outfile)])
        assert code == 0
        (row,) = read_rows(outfile)
        assert len(row["spans"]) == 2
        supported, fabricated = row["spans"]
        assert supported["flagged"] is False
        assert fabricated["flagged"] is True
        assert fabricated["h"] == 1
        assert fabricated["problematic_spans"] == ["history of diabetes"]
        assert row["hset"] == ["the patient has a history of diabetes"]


class TestEval:
    def test_identity_corpus_scores_100(self, tmp_path, capsys):
        infile = tmp_path / "pairs.jsonl"
        write_docs(
            infile,
            [
                {"id": "1", "hypothesis": NOTE, "reference": NOTE},
                {"id": "2", "hypothesis": SECOND_NOTE, "reference": SECOND_NOTE},
            ],
        )
        code = main(["eval", "--in", str(infile)])
        assert code == 0
        report = json.loads(capsys.readouterr().out)
        assert report["n"] == 2
        corpus = report["corpus"]
        assert corpus["bleu1"]["mean"] == pytest.approx(100.0)
        assert corpus["bleu2"]["mean"] == pytest.approx(100.0)
        assert corpus["rouge_l_f1"]["mean"] == pytest.approx(100.0)
        assert corpus["bleu1"]["std"] == 0.0

    def test_metric_subset_and_per_record_rows(self, tmp_path, capsys):
        infile = tmp_path / "pairs.jsonl"
        outfile = tmp_path / "rows.jsonl"
        write_docs(
            infile,
            [{"id": "1", "hypothesis": "the sat", "reference": "the cat sat",
              "bertscore": 0.91}],
        )
        code = main(
            ["eval", "--in", str(infile), "--out", str(outfile),
             "--metrics", "rouge"]
        )
        assert code == 0
        (row,) = read_rows(outfile)
        assert set(row) == {"id", "rouge_l", "bertscore"}
        assert row["rouge_l"]["f1"] == pytest.approx(80.0)
        assert row["bertscore"] == 0.91
        report = json.loads(capsys.readouterr().out)
        assert set(report["corpus"]) == {"bertscore", "rouge_l_f1"}

    def test_unknown_metric_is_usage_error(self, tmp_path):
        infile = tmp_path / "pairs.jsonl"
        write_docs(infile, [{"id": "1", "hypothesis": "a", "reference": "a"}])
        code = main(["eval", "--in", str(infile), "--metrics", "meteor"])
        assert code == 2


class TestStats:
    @staticmethod
    def write_ratings(path):
        lines = ["rater_id,domain,vanilla_severity,agentic_severity,correct_guess"]
        for i in range(18):
            lines.append(f"r{i},oncology,4,2,true")
        for i in range(18, 23):
            lines.append(f"r{i},oncology,2,3,false")
        path.write_text("\n".join(lines) + "\n", encoding="utf-8")

    def test_domain_report(self, tmp_path, capsys):
        ratings = tmp_path / "ratings.csv"
        report_path = tmp_path / "report.json"
        self.write_ratings(ratings)
        code = main(
            ["stats", "--ratings", str(ratings), "--out", str(report_path)]
        )
        assert code == 0
        out = capsys.readouterr().out
        assert "oncology" in out
        assert "78.3" in out
        assert "0.005" in out  # dominance tail for 18/23
        (entry,) = json.loads(report_path.read_text())
        assert entry["n"] == 23
        assert entry["correct_guess_accuracy"] == 78.3
        assert entry["dominance_p"] == pytest.approx(44552 / 8388608)
        assert entry["rank_biserial"] == pytest.approx((18 - 5) / 23)
        assert entry["mean_vanilla"] > entry["mean_agentic"]

    def test_p_formatting_threshold(self, tmp_path, capsys):
        ratings = tmp_path / "ratings.csv"
        lines = ["rater_id,domain,vanilla_severity,agentic_severity,correct_guess"]
        for i in range(23):
            lines.append(f"r{i},psych,4,2,yes")  # 23/23 correct
        ratings.write_text("\n".join(lines) + "\n", encoding="utf-8")
        code = main(["stats", "--ratings", str(ratings)])
        assert code == 0
        assert "<0.001" in capsys.readouterr().out

    def test_missing_columns_is_usage_error(self, tmp_path):
        ratings = tmp_path / "ratings.csv"
        ratings.write_text("rater_id,domain\nr0,oncology\n", encoding="utf-8")
        assert main(["stats", "--ratings", str(ratings)]) == 2


class TestOptionResolution:
    def test_config_file_beats_defaults(self, tmp_path):
        infile = tmp_path / "docs.jsonl"
        outfile = tmp_path / "out.jsonl"
        conf = tmp_path / "run.conf"
        write_docs(infile, [{"id": "a", "text": NOTE}])
        conf.write_text("# compression\nr=0.4\nscorer=received\n", encoding="utf-8")
        code = main(
            ["focus", "--in", str(infile), "--out", str(outfile),
             "--config", str(conf)]
        )
        assert code == 0
        (row,) = read_rows(outfile)
        assert row["k"] == 2  # floor(0.4 * 5), not the 0.6 default's 3

    def test_flag_beats_config_file(self, tmp_path):
        infile = tmp_path / "docs.jsonl"
        outfile = tmp_path / "out.jsonl"
        conf = tmp_path / "run.conf"
        write_docs(infile, [{"id": "a", "text": NOTE}])
        conf.write_text("r=0.4\n", encoding="utf-8")
        code = main(
            ["focus", "--in", str(infile), "--out", str(outfile),
             "--config", str(conf), "--r", "1.0"]
        )
        assert code == 0
        (row,) = read_rows(outfile)
        assert row["text"] == NOTE

    def test_unknown_config_key_is_usage_error(self, tmp_path, capsys):
        infile = tmp_path / "docs.jsonl"
        conf = tmp_path / "run.conf"
        write_docs(infile, [{"id": "a", "text": NOTE}])
        conf.write_text("ratio=0.4\n", encoding="utf-8")
        code = main(
            ["focus", "--in", str(infile), "--out", str(tmp_path / "o.jsonl"),
             "--config", str(conf)]
        )
        assert code == 2
        assert "unknown key" in capsys.readouterr().err

    def test_malformed_config_line_is_usage_error(self, tmp_path):
        infile = tmp_path / "docs.jsonl"
        conf = tmp_path / "run.conf"
        write_docs(infile, [{"id": "a", "text": NOTE}])
        conf.write_text("just words\n", encoding="utf-8")
        code = main(
            ["focus", "--in", str(infile), "--out", str(tmp_path / "o.jsonl"),
             "--config", str(conf)]
        )
        assert code == 2

    def test_missing_input_file_is_usage_error(self, tmp_path):
        code = main(
            ["focus", "--in", str(tmp_path / "nope.jsonl"),
             "--out", str(tmp_path / "o.jsonl")]
        )
        assert code == 2

    def test_remote_backend_requires_url(self, tmp_path, monkeypatch, capsys):
        monkeypatch.delenv(BACKEND_URL_ENV, raising=False)
        infile = tmp_path / "docs.jsonl"
        write_docs(infile, [{"id": "a", "text": NOTE}])
        code = main(
            ["summarize", "--in", str(infile), "--out", str(tmp_path / "out"),
             "--backend", "remote"]
        )
        assert code == 2
        assert BACKEND_URL_ENV in capsys.readouterr().err

    def test_invalid_pipeline_value_is_usage_error(self, tmp_path):
        infile = tmp_path / "docs.jsonl"
        write_docs(infile, [{"id": "a", "text": NOTE}])
        code = main(
            ["summarize", "--in", str(infile), "--out", str(tmp_path / "out"),
             "--r", "1.5"]
        )
        assert code == 2


@pytest.mark.skipif(
    shutil.which("agenticsum") is None, reason="console script not on PATH"
)
def test_console_script_entry_point(tmp_path):
    infile = tmp_path / "docs.jsonl"
    write_docs(infile, [{"id": "a", "text": NOTE}])
    proc = subprocess.run(
        ["agenticsum", "focus", "--in", str(infile),
         "--out", str(tmp_path / "o.jsonl"), "--r", "1.0"],
        capture_output=True,
        text=True,
    )
    assert proc.returncode == 0, proc.stderr
    assert read_rows(tmp_path / "o.jsonl")[0]["text"] == NOTE


def test_module_invocation_works(tmp_path):
    infile = tmp_path / "docs.jsonl"
    write_docs(infile, [{"id": "a", "text": NOTE}])
    proc = subprocess.run(
        [sys.executable, "-m", "agenticsum.cli", "focus", "--in", str(infile),
         "--out", str(tmp_path / "o.jsonl"), "--r", "1.0"],
        capture_output=True,
        text=True,
    )
    assert proc.returncode == 0, proc.stderr
