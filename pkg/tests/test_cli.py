import json

import numpy as np
import pytest
from numpy.testing import assert_allclose

from lpvkit.bench import UnbalancedDiscParams, as_schedule, embed_lpv, gen_multisine, simulate_disc
from lpvkit.cli import main
from lpvkit.ident import Dataset, simulate_model
from lpvkit.models import simulate_io
from lpvkit.serialize import read_data_csv, save_model, write_data_csv

from ident_oracles import make_data, template, true_model

D = UnbalancedDiscParams()


def run(capsys, *argv):
    code = main([str(a) for a in argv])
    out, err = capsys.readouterr()
    return code, out, err


@pytest.fixture
def disc_files(tmp_path):
    u = gen_multisine(200, D.T_s, seed=0)
    th = simulate_disc(D, u)
    save_model(embed_lpv(D), tmp_path / "emb.json")
    write_data_csv(tmp_path / "in.csv", u, as_schedule(th, D.T_s), None, D.T_s)
    return tmp_path, u, th


def test_simulate(capsys, disc_files):
    path, u, th = disc_files
    code, out, _ = run(capsys, "simulate", "--model", path / "emb.json", "--data", path / "in.csv",
                       "--out", path / "out.csv")
    assert code == 0
    assert json.loads(out) == {"status": "ok", "samples": 200, "out": str(path / "out.csv")}
    _, _, y, _ = read_data_csv(path / "out.csv")
    assert_allclose(y[:, 0], simulate_io(embed_lpv(D), u, as_schedule(th, D.T_s))[:, 0], rtol=0, atol=0)


@pytest.mark.parametrize("kind", ["arx", "oe"])
def test_identify(capsys, tmp_path, kind):
    data, _ = make_data(true_model(kind))
    write_data_csv(tmp_path / "d.csv", data.u, data.p, data.y)
    save_model(template(kind), tmp_path / "t.json")
    (tmp_path / "o.txt").write_text("max_iter = 50\n")
    code, out, err = run(capsys, "identify", "--structure", kind, "--template", tmp_path / "t.json",
                         "--data", tmp_path / "d.csv", "--opts", tmp_path / "o.txt", "--out", tmp_path / "fit")
    assert code == 0, err
    res = json.loads(out)
    assert res["V"] < 1e-10
    for name in ("report.txt", "model.json", "loss_trace.csv"):
        assert (tmp_path / "fit" / name).is_file()


def test_identify_ss(capsys, tmp_path):
    from test_ident import ss_data, ss_truth

    m = ss_truth()
    data = ss_data(m, noise=0.01)
    write_data_csv(tmp_path / "d.csv", data.u, data.p, data.y)
    save_model(m, tmp_path / "init.json")
    code, out, err = run(capsys, "identify", "--structure", "ss", "--template", tmp_path / "init.json",
                         "--data", tmp_path / "d.csv", "--out", tmp_path / "fit")
    assert code == 0, err
    assert json.loads(out)["method"] == "lpvssest"


def test_identify_structure_mismatch(capsys, tmp_path):
    data, _ = make_data(true_model("arx"))
    write_data_csv(tmp_path / "d.csv", data.u, data.p, data.y)
    save_model(template("arx"), tmp_path / "t.json")
    code, _, err = run(capsys, "identify", "--structure", "oe", "--template", tmp_path / "t.json",
                       "--data", tmp_path / "d.csv", "--out", tmp_path / "fit")
    assert code == 1
    assert json.loads(err)["error"] == "CliError"


def test_bad_option_file(capsys, tmp_path):
    data, _ = make_data(true_model("arx"))
    write_data_csv(tmp_path / "d.csv", data.u, data.p, data.y)
    save_model(template("arx"), tmp_path / "t.json")
    (tmp_path / "o.txt").write_text("speed = 3\n")
    code, _, err = run(capsys, "identify", "--structure", "arx", "--template", tmp_path / "t.json",
                       "--data", tmp_path / "d.csv", "--opts", tmp_path / "o.txt", "--out", tmp_path / "fit")
    assert code == 1 and "speed" in json.loads(err)["message"]


def test_missing_file(capsys, tmp_path):
    code, _, err = run(capsys, "simulate", "--model", tmp_path / "nope.json", "--data", tmp_path / "x.csv",
                       "--out", tmp_path / "y.csv")
    assert code == 1
    assert json.loads(err)["error"] == "FileNotFoundError"


def test_usage_error(capsys):
    with pytest.raises(SystemExit) as exc:
        main(["identify", "--structure", "nope"])
    assert exc.value.code == 2
    assert json.loads(capsys.readouterr().err)["error"] == "UsageError"


def test_bench_small(capsys, tmp_path):
    (tmp_path / "cfg.ini").write_text("N = 120\nsnr_list_db = 20\niterations = 5\n")
    code, out, err = run(capsys, "bench", "unbalanced-disc", "--config", tmp_path / "cfg.ini",
                         "--out", tmp_path / "b", "--seed", 2)
    assert code == 0, err
    res = json.loads(out)
    assert set(res["bfr"]) == {"arx", "armax", "oe", "bj"}
    assert (tmp_path / "b" / "bfr_table.csv").read_text().startswith("snr_db,arx,armax,oe,bj\n20,")
    assert "seed,2" in (tmp_path / "b" / "summary.csv").read_text()


def test_simulated_idpoly_file(capsys, tmp_path):
    m = true_model("bj")
    data, _ = make_data(m)
    save_model(m, tmp_path / "m.json")
    write_data_csv(tmp_path / "in.csv", data.u, data.p)
    assert run(capsys, "simulate", "--model", tmp_path / "m.json", "--data", tmp_path / "in.csv",
               "--out", tmp_path / "o.csv")[0] == 0
    assert_allclose(read_data_csv(tmp_path / "o.csv")[2], simulate_model(m, Dataset(data.u, data.p, data.y)))
