import json

import pytest

from predopt.cli import main
from predopt.instances import load_instance


def test_gen_and_solve(tmp_path, capsys):
    out = tmp_path / "inst"
    assert main(["gen", "--family", "mclsp", "--items", "2", "--periods", "3", "--count", "2", "--seed", "4",
                 "--out", str(out)]) == 0
    files = sorted(out.glob("*.json"))
    assert len(files) == 2 and load_instance(files[0]).n_items == 2
    capsys.readouterr()
    assert main(["solve", str(files[0]), "--trace", str(tmp_path / "t.csv"), "--lp", str(tmp_path / "m.lp")]) == 0
    doc = json.loads(capsys.readouterr().out)
    assert doc["status"] == "Optimal"
    assert (tmp_path / "t.csv").read_text().startswith("elapsed_s,incumbent")
    assert "setupLink" in (tmp_path / "m.lp").read_text()


def test_experiment_file_defaults(tmp_path):
    exp = tmp_path / "exp.json"
    exp.write_text(json.dumps({"gen": {"family": "msmk", "items": 2, "periods": 2, "resources": 2, "count": 1,
                                       "out": str(tmp_path / "g")}}))
    assert main(["--experiment", str(exp), "gen", "--seed", "9"]) == 0
    (f,) = (tmp_path / "g").glob("*.json")
    inst = load_instance(f)
    assert inst.family == "msmk" and inst.n_resources == 2 and inst.seed == 9


def test_train_predict_eval_report(tmp_path, capsys):
    ck = tmp_path / "m.npz"
    ds = tmp_path / "d.jsonl"
    assert main(["train", "--family", "mclsp", "--items", "2", "--periods", "3", "--count", "6", "--epochs", "2",
                 "--hidden", "4", "--dataset", str(ds), "--out", str(ck)]) == 0
    assert ck.is_file() and ds.is_file()
    first = ck.read_bytes()
    assert main(["train", "--family", "mclsp", "--items", "2", "--periods", "3", "--epochs", "2",
                 "--hidden", "4", "--dataset", str(ds), "--out", str(ck)]) == 0
    assert ck.read_bytes() == first
    main(["gen", "--family", "mclsp", "--items", "3", "--periods", "3", "--count", "1", "--out",
          str(tmp_path / "i")])
    (inst,) = (tmp_path / "i").glob("*.json")
    capsys.readouterr()
    assert main(["predict", str(inst), "--checkpoint", str(ck), "--delta", "2"]) == 0
    doc = json.loads(capsys.readouterr().out)
    assert doc["feasible"] is True
    out = tmp_path / "ev"
    assert main(["eval", "--family", "mclsp", "--items", "2", "--periods", "3", "--count", "2",
                 "--checkpoint", str(ck), "--out-dir", str(out)]) == 0
    assert "timeCPX" in capsys.readouterr().out
    assert main(["report", "--csv", str(out / "instances.csv"), "--out", str(tmp_path / "rep")]) == 0
    assert (tmp_path / "rep" / "report.csv").is_file()


def test_usage_errors(tmp_path, capsys):
    with pytest.raises(SystemExit) as e:
        main(["gen", "--family", "mclsp"])
    assert e.value.code == 2
    with pytest.raises(SystemExit):
        main(["solve"])
    bad = tmp_path / "bad.json"
    bad.write_text("{")
    assert main(["solve", str(bad)]) == 1
    assert "line 1" in capsys.readouterr().err


def test_eval_missing_checkpoint(tmp_path, capsys):
    assert main(["eval", "--family", "mclsp", "--items", "2", "--periods", "3", "--checkpoint",
                 str(tmp_path / "none.npz")]) == 1
    assert "does not exist" in capsys.readouterr().err
