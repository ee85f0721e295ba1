import csv
import json
from fractions import Fraction

import numpy as np
import pytest

from embryoseg import pnm
from embryoseg.cli import main
from embryoseg.synthetic import SyntheticEggSpec, generate_synthetic_egg
from embryoseg.watershed import labels_from_pgm16


@pytest.fixture
def egg_file(tmp_path):
    rgb, _, _ = generate_synthetic_egg(SyntheticEggSpec(seed=2, fertile=True))
    path = tmp_path / "egg.ppm"
    pnm.write_image(path, rgb)
    return path


def test_run_fertile_exit_zero(egg_file, tmp_path, capsys):
    out = tmp_path / "out"
    assert main(["--input", str(egg_file), "--out-dir", str(out), "--dump-stages"]) == 0
    verdict = json.loads((out / "detection.json").read_text())
    assert verdict["fertile"] is True and verdict["schema_version"] == "1"
    assert json.loads(capsys.readouterr().out)["fertile"] is True
    side = json.loads((out / "labels.json").read_text())
    labels = labels_from_pgm16(pnm.read_image(out / "labels.pgm"))
    assert side["num_basins"] == labels.max()
    assert side["ws_pixel_count"] == int((labels == -1).sum())
    stages = out / "stages"
    for name in ("01_gray.pgm", "02_enhanced.pgm", "04_bw.pgm", "05_filtered.pgm",
                 "06_negated.pgm", "07_distance.pgm", "08_labels.ppm"):
        assert (stages / name).exists()
    rows = list(csv.reader(open(stages / "hist_clahe-he.csv")))
    assert rows[0] == ["level", "count"] and len(rows) == 257


def test_stage_dumps_roundtrip(egg_file, tmp_path):
    from embryoseg.pipeline import run
    out = tmp_path / "out"
    main(["--input", str(egg_file), "--out-dir", str(out), "--dump-stages"])
    res = run(pnm.read_image(egg_file))
    s = res.stages
    assert np.array_equal(pnm.read_image(out / "stages/01_gray.pgm"), s["gray"])
    assert np.array_equal(pnm.read_image(out / "stages/02_enhanced.pgm"), s["enhanced"])
    assert np.array_equal(pnm.read_image(out / "stages/05_filtered.pgm") == 255, s["filtered"])
    assert np.array_equal(pnm.read_image(out / "stages/06_negated.pgm") == 255, s["negated"])
    assert np.array_equal(labels_from_pgm16(pnm.read_image(out / "labels.pgm")), s["labels"])


def test_missing_input(tmp_path):
    assert main(["--input", str(tmp_path / "missing.ppm"), "--out-dir", str(tmp_path)]) == 2


def test_corrupt_input(tmp_path):
    bad = tmp_path / "bad.ppm"
    bad.write_bytes(b"P6\n10 10\n255\n\x00\x01")
    assert main(["--input", str(bad), "--out-dir", str(tmp_path)]) == 2


def test_config_violation(egg_file, tmp_path):
    cfg = tmp_path / "c.json"
    cfg.write_text(json.dumps({"min_fraction": 1.5}))
    assert main(["--input", str(egg_file), "--config", str(cfg)]) == 3
    cfg.write_text("{not json")
    assert main(["--input", str(egg_file), "--config", str(cfg)]) == 3
    assert main(["--input", str(egg_file), "--config", str(tmp_path / "none.json")]) == 3


def test_flags_override_config(egg_file, tmp_path):
    cfg = tmp_path / "c.json"
    cfg.write_text(json.dumps({"order": "he", "out_dir": str(tmp_path / "a")}))
    out = tmp_path / "b"
    assert main(["--input", str(egg_file), "--config", str(cfg), "--order", "clahe",
                 "--out-dir", str(out)]) == 0
    verdict = json.loads((out / "detection.json").read_text())
    assert verdict["config"]["order"] == "clahe"
    assert not (tmp_path / "a").exists()


def test_eval_noiseless_manifest(tmp_path, capsys):
    corpus = tmp_path / "corpus"
    assert main(["--gen-corpus", "4", "0", "--out-dir", str(corpus)]) == 0
    capsys.readouterr()
    report = tmp_path / "report"
    assert main(["--eval", str(corpus / "manifest.json"), "--out-dir", str(report)]) == 0
    assert capsys.readouterr().out.strip() == "1.0000"
    rep = json.loads((report / "report.json").read_text())
    assert rep["schema_version"] == "1" and rep["accuracy"] == 1.0
    rows = list(csv.DictReader(open(report / "report.csv")))
    correct = sum(r["truth"] == r["predicted"] for r in rows)
    assert Fraction(correct, len(rows)) == Fraction(rep["accuracy_exact"])
    m = rep["matrix"]
    assert m["tp"] + m["tn"] + m["fp"] + m["fn"] == len(rows) == 4


def test_eval_bare_list_manifest(tmp_path, capsys):
    man = tmp_path / "m.json"
    man.write_text(json.dumps([{"seed": 1, "fertile": True}, {"seed": 2, "fertile": False}]))
    assert main(["--eval", str(man), "--out-dir", str(tmp_path / "r")]) == 0
    assert capsys.readouterr().out.strip() == "1.0000"


@pytest.mark.parametrize("content", ["[]", "{}", "{\"specs\": []}", "[{\"seed\": 1}]", "nope",
                                     "[{\"seed\": 1, \"fertile\": true, \"width\": 5}]"])
def test_eval_malformed_manifest(tmp_path, content):
    man = tmp_path / "m.json"
    man.write_text(content)
    assert main(["--eval", str(man), "--out-dir", str(tmp_path / "r")]) == 3


def test_gen_corpus_files(tmp_path):
    assert main(["--gen-corpus", "3", "7", "--noise", "5", "--out-dir", str(tmp_path)]) == 0
    man = json.loads((tmp_path / "manifest.json").read_text())
    assert len(man["specs"]) == 3 and all(s["noise"] == 5 for s in man["specs"])
    img = pnm.read_image(tmp_path / "images/egg_0000.ppm")
    rgb, _, _ = generate_synthetic_egg(SyntheticEggSpec.from_dict(man["specs"][0]))
    assert np.array_equal(img, rgb)


def test_gen_corpus_bad_size(tmp_path):
    assert main(["--gen-corpus", "0", "1", "--out-dir", str(tmp_path)]) == 3
