import json

import pytest

from ustlab.cli import main


def run(capsys, *argv):
    code = main(list(argv))
    out, err = capsys.readouterr()
    return code, out, err


def test_gen_formats(capsys):
    code, out, _ = run(capsys, "gen", "--family", "two-cliques-bridge", "--n", "10")
    assert code == 0 and out.splitlines()[0] == "10 21"
    code, out, _ = run(capsys, "gen", "--family", "complete", "--n", "5", "--format", "json")
    doc = json.loads(out)
    assert doc["schema"] == "ustlab/1" and len(doc["edges"]) == 10


def test_sample_csv(capsys):
    code, out, _ = run(capsys, "sample", "--family", "complete", "--n", "20", "--trials", "4", "--seed", "3")
    lines = out.splitlines()
    assert code == 0 and lines[0].startswith("# ustlab/1 sample")
    assert lines[1] == "trial,seed,diameter,path_len,contained_flag"
    assert len(lines) == 6


def test_spectral_report(capsys):
    code, out, _ = run(capsys, "spectral", "--family", "two-cliques-bridge", "--n", "40", "--delta", "0.4",
                       "--eps", "0.3", "--k", "3")
    doc = json.loads(out)
    assert code == 0 and len(doc["lambda_k_list"]) == 3
    assert set(doc["bounds"]) == {"jsvt", "path_method", "decomposition"}
    assert all(b <= doc["gap"] + 1e-8 for b in doc["bounds"].values())


def test_decompose_report_and_exit_codes(capsys):
    code, out, _ = run(capsys, "decompose", "--family", "two-cliques-bridge", "--n", "200", "--delta", "0.4",
                       "--eps", "0.3")
    doc = json.loads(out)
    assert code == 0
    assert {"k", "theta", "blocks", "audit", "negligible_edges", "evil_count"} <= set(doc)
    assert all(v[2] for v in doc["audit"].values())
    code, _, err = run(capsys, "decompose", "--family", "star", "--n", "20", "--delta", "0.4", "--eps", "0.3")
    assert code == 2 and "min degree" in err


def test_seed_required(capsys):
    code, _, err = run(capsys, "scaling", "--family", "complete", "--n", "10")
    assert code == 2 and "seed" in err


def test_flags_override_config(tmp_path, capsys):
    cfg = tmp_path / "c.json"
    cfg.write_text(json.dumps({"family": "complete", "n": [16], "trials": 7, "seed": 9}))
    out = tmp_path / "o.csv"
    code, _, _ = run(capsys, "scaling", "--config", str(cfg), "--trials", "2", "--out", str(out))
    assert code == 0
    lines = out.read_text().splitlines()
    assert len(lines) == 4 and '"trials":2' in lines[0]


def test_replay_is_byte_identical_modulo_header(tmp_path, capsys):
    cfg = tmp_path / "c.json"
    cfg.write_text(json.dumps({"family": "dense-gnp", "n": [14], "trials": 3, "seed": 11, "p": 0.7}))
    outs = []
    for i in range(2):
        path = tmp_path / f"r{i}.csv"
        assert main(["cheeger", "--config", str(cfg), "--out", str(path)]) == 0
        outs.append(path.read_text().split("\n", 1)[1])
    assert outs[0] == outs[1]


def test_help_documents_schema(capsys):
    with pytest.raises(SystemExit):
        main(["paths", "--help"])
    out = capsys.readouterr().out
    assert "path_len" in out and "--threads" in out
