import json
import subprocess
import sys

from bnshift_extractor.cli import main


def test_demo_outputs_feed_the_detector(tmp_path):
    rc = main([
        "demo", "--pretrain-images", "256", "--stream-images", "256", "--epochs", "1",
        "--source", str(tmp_path / "source.jsonl"),
        "--out", str(tmp_path / "stream.jsonl"),
        "--truth", str(tmp_path / "truth.json"),
    ])
    assert rc == 0
    truth = json.loads((tmp_path / "truth.json").read_text())
    assert truth["change_points"] == [4]  # 256 images / 64 per batch

    result = subprocess.run(
        [
            sys.executable, "-m", "bnshift.cli", "detect",
            "--input", str(tmp_path / "stream.jsonl"),
            "--source", str(tmp_path / "source.jsonl"),
            "--trace", str(tmp_path / "trace.csv"),
            "--events", str(tmp_path / "events.jsonl"),
        ],
        capture_output=True,
        text=True,
    )
    assert result.returncode == 0, result.stderr
    assert "processed 8 batches" in result.stdout


def test_source_and_stream_subcommands_are_consistent(tmp_path):
    common = ["--pretrain-images", "256", "--epochs", "1", "--seed", "3"]
    assert main(["source", *common, "--out", str(tmp_path / "a.jsonl")]) == 0
    assert main(["source", *common, "--out", str(tmp_path / "b.jsonl")]) == 0
    assert (tmp_path / "a.jsonl").read_bytes() == (tmp_path / "b.jsonl").read_bytes()

    assert main([
        "stream", *common, "--stream-images", "128", "--out", str(tmp_path / "s.jsonl")
    ]) == 0
    header_src = json.loads((tmp_path / "a.jsonl").read_text().splitlines()[0])
    header_stream = json.loads((tmp_path / "s.jsonl").read_text().splitlines()[0])
    assert header_src["layers"] == header_stream["layers"]


def test_bad_filter_exits_one(tmp_path):
    rc = main([
        "source", "--pretrain-images", "128", "--epochs", "1",
        "--filter", "nonexistent", "--out", str(tmp_path / "s.jsonl"),
    ])
    assert rc == 1
