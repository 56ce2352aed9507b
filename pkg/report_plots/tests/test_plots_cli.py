import json
from pathlib import Path

import pytest

pytest.importorskip("report_plots")

from report_plots.cli import KINDS, main

FIXTURES = Path(__file__).parent / "fixtures"


@pytest.mark.parametrize("kind", sorted(KINDS))
def test_cli_renders_each_kind(kind, tmp_path, capsys):
    out = tmp_path / f"{kind}.png"
    code = main([kind, "--in", str(FIXTURES / kind), "--out", str(out)])
    captured = capsys.readouterr()
    assert code == 0
    assert out.is_file() and out.stat().st_size > 0
    assert str(out) in captured.out


def test_cli_survival_accepts_constant(tmp_path, capsys):
    out = tmp_path / "survival.png"
    code = main(
        [
            "survival",
            "--in", str(FIXTURES / "survival"),
            "--out", str(out),
            "--constant", "2.0",
        ]
    )
    captured = capsys.readouterr()
    assert code == 0
    assert "constant=2" in captured.out


def test_cli_missing_input_dir_exits_two(tmp_path, capsys):
    code = main(
        ["survival", "--in", str(tmp_path / "nowhere"), "--out", str(tmp_path / "o.png")]
    )
    captured = capsys.readouterr()
    assert code == 2
    assert "SchemaError" in captured.err
    assert captured.err.count("\n") == 1


def test_cli_refusal_exits_two(tmp_path, capsys):
    run = tmp_path / "thin"
    run.mkdir()
    (run / "manifest.json").write_text(json.dumps({"command": "synthetic"}))
    (run / "summary.json").write_text(
        json.dumps({"config": {"alpha": 1.0}, "eps": 0.05, "theory": {"rate": 0.4}})
    )
    header = (
        "path_id,stream_id,exit_time,exit_position,pre_jump_position,"
        "n_large_jumps,exited_at_large_jump,censored\n"
    )
    rows = "".join(f"{i},{i},1.5,1.2,,0,0,0\n" for i in range(10))
    (run / "records.csv").write_text(header + rows)
    code = main(["survival", "--in", str(run), "--out", str(tmp_path / "o.png")])
    captured = capsys.readouterr()
    assert code == 2
    assert "Refusal" in captured.err
    assert not (tmp_path / "o.png").exists()


def test_cli_unknown_kind_rejected(tmp_path, capsys):
    with pytest.raises(SystemExit) as excinfo:
        main(["sausage", "--in", str(tmp_path), "--out", str(tmp_path / "o.png")])
    assert excinfo.value.code == 2
    assert "invalid choice" in capsys.readouterr().err
