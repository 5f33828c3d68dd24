import json
import subprocess
import sys

import pytest

from _fixtures import motif_piece
from morpheus.check import check_output
from morpheus.cli import main
from morpheus.patterns import decode_tec, encode_tec
from morpheus.score import NoteEvent, Piece, parse_midi, write_midi, write_pointset_text
from morpheus.tension import profile, read_profile_csv


@pytest.fixture
def motif_mid(tmp_path):
    path = tmp_path / "motif.mid"
    path.write_bytes(write_midi(motif_piece()))
    return path


def test_tension_command(tmp_path, capsys):
    chord = Piece([NoteEvent(0, 4, p) for p in (60, 64, 67)], 2)
    src = tmp_path / "chord.mid"
    src.write_bytes(write_midi(chord))
    assert main(["tension", str(src), "--out-dir", str(tmp_path / "a")]) == 0
    csv = (tmp_path / "a" / "tension.csv").read_text()
    prof = read_profile_csv(csv)
    assert len(prof) == len(profile(chord)) == 4
    assert list(prof.momentum[1:]) == [0, 0, 0]
    assert "tension.csv" in (tmp_path / "a" / "tension.plot").read_text()
    assert "key=C major" in capsys.readouterr().out
    main(["tension", str(src), "--out-dir", str(tmp_path / "b")])
    assert (tmp_path / "b" / "tension.csv").read_text() == csv


def test_patterns_command(motif_mid, tmp_path, capsys):
    assert main(["patterns", str(motif_mid), "--min-pattern-len", "5",
                 "--out-dir", str(tmp_path)]) == 0
    out = capsys.readouterr().out.splitlines()
    lines = (tmp_path / "patterns.tec").read_text().splitlines()
    assert lines == out[:-1]
    assert all(encode_tec(decode_tec(line)) == line for line in lines)
    cr = float(out[-1].split()[0].split("=")[1])
    assert cr > 1.3


def test_patterns_on_empty_piece(tmp_path, capsys):
    src = tmp_path / "empty.txt"
    src.write_text("# tatums_per_beat=2\n")
    assert main(["patterns", str(src), "--out-dir", str(tmp_path)]) == 0
    assert capsys.readouterr().out.strip() == "CR=1.000 TECs=0 UP=0"
    assert (tmp_path / "patterns.tec").read_text() == ""


def test_morph_command(motif_mid, tmp_path):
    out = tmp_path / "run"
    assert main(["morph", str(motif_mid), "--min-pattern-len", "5", "--max-iters", "2",
                 "--seed", "3", "--no-clock", "--out-dir", str(out)]) == 0
    for name in ("output.mid", "trace.csv", "patterns.tec", "tension_before.csv",
                 "tension_after.csv", "report.json"):
        assert (out / name).exists(), name
    template = parse_midi(motif_mid.read_bytes())
    result = parse_midi((out / "output.mid").read_bytes())
    tecs = [decode_tec(line) for line in (out / "patterns.tec").read_text().splitlines()]
    assert check_output(template, result, tecs) == []
    report = json.loads((out / "report.json").read_text())
    assert report["seed"] == 3
    assert set(report["correlations"]) == {"initial", "final"}
    assert report["final_objective"] <= report["initial_objective"]


def test_morph_target_length_mismatch(motif_mid, tmp_path, capsys):
    target = tmp_path / "t.csv"
    target.write_text("segment,onset_beats,diameter,momentum,strain\n0,0,0,0,0\n")
    code = main(["morph", str(motif_mid), "--target-profile", str(target),
                 "--out-dir", str(tmp_path)])
    assert code == 3
    assert "1 segments, template needs 32" in capsys.readouterr().err


def test_morph_fixed_pitches(motif_mid, tmp_path):
    fixed = tmp_path / "fixed.txt"
    fixed.write_text("# note pitch\n0 43\n")
    out = tmp_path / "run"
    assert main(["morph", str(motif_mid), "--fixed-pitches", str(fixed), "--max-iters", "2",
                 "--out-dir", str(out)]) == 0
    result = parse_midi((out / "output.mid").read_bytes())
    assert result.notes[0].midi_pitch == 43


@pytest.mark.parametrize("fixed_text, code, message", [
    ("1 90\n", 4, "note 1: fixed pitch 90"),
    ("9 60\n", 3, "unknown note 9"),
    ("0 x\n", 3, "non-integer"),
])
def test_bad_fixed_pitches(tmp_path, capsys, fixed_text, code, message):
    src = tmp_path / "x.txt"
    src.write_text(write_pointset_text(Piece([NoteEvent(0, 1, 60), NoteEvent(1, 1, 64)], 2)))
    fixed = tmp_path / "f.txt"
    fixed.write_text(fixed_text)
    assert main(["morph", str(src), "--fixed-pitches", str(fixed),
                 "--out-dir", str(tmp_path)]) == code
    assert message in capsys.readouterr().err


@pytest.mark.parametrize("argv", [
    ["morph", "IN", "--max-iters", "0"],
    ["patterns", "IN", "--min-pattern-len", "0"],
    ["morph", "IN", "--weights", "1,2"],
    ["tension", "IN", "--segment-beats", "-1"],
    ["bogus"],
])
def test_usage_errors_exit_2(argv):
    with pytest.raises(SystemExit) as exc:
        main(argv)
    assert exc.value.code == 2


def test_unreadable_input_exit_3(tmp_path, capsys):
    assert main(["tension", str(tmp_path / "missing.mid")]) == 3
    bad = tmp_path / "bad.mid"
    bad.write_bytes(b"MThd\x00\x00\x00\x06\x00\x01")
    assert main(["tension", str(bad)]) == 3
    assert "byte offset" in capsys.readouterr().err


def test_module_entry_point(motif_mid, tmp_path):
    res = subprocess.run([sys.executable, "-m", "morpheus", "tension", str(motif_mid),
                          "--out-dir", str(tmp_path)], capture_output=True, text=True)
    assert res.returncode == 0, res.stderr
