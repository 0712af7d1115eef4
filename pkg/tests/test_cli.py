import json
from pathlib import Path

import pytest

from dfshift.cli import main
from dfshift.runconfig import ABLATION_SHIFT, RunConfig
from dfshift.synthdata import MANIFEST_NAME

CONFIGS = Path(__file__).resolve().parent.parent / "configs"


def write_config(path, name="mt_shared", **train):
    rc = RunConfig.ablation(name, **train)
    path.write_text(json.dumps(rc.to_dict()))
    return str(path)


@pytest.fixture(autouse=True)
def _no_env_seed(monkeypatch):
    monkeypatch.delenv("DFS_SEED", raising=False)


def test_gen_counts_and_idempotence(tmp_path, capsys):
    out = tmp_path / "d"
    assert main(["gen", "--out", str(out), "--mode", "direction", "--per-class", "50", "--seed", "7"]) == 0
    assert capsys.readouterr().out.strip() == str(out / MANIFEST_NAME)
    first = {p.name: p.read_bytes() for p in out.iterdir()}
    assert len(first) == 101
    assert main(["gen", "--out", str(out), "--mode", "direction", "--per-class", "50", "--seed", "7"]) == 0
    assert {p.name: p.read_bytes() for p in out.iterdir()} == first


def test_gen_full_mode(tmp_path):
    out = tmp_path / "f"
    assert main(["gen", "--out", str(out), "--mode", "full", "--per-class", "25"]) == 0
    m = json.loads((out / MANIFEST_NAME).read_text())
    assert len(m["files"]) == 100 and len(m["classes"]) == 4


def test_gen_errors(tmp_path, capsys):
    assert main(["gen", "--out", str(tmp_path / "x"), "--mode", "full", "--per-class", "1", "--t", "20"]) == 2
    assert "error" in capsys.readouterr().err
    with pytest.raises(SystemExit) as exc:
        main(["gen", "--out", "x", "--mode", "bogus", "--per-class", "1"])
    assert exc.value.code == 2


def test_env_seed_overrides_flag(tmp_path, monkeypatch):
    main(["gen", "--out", str(tmp_path / "a"), "--mode", "sync", "--per-class", "2", "--seed", "3"])
    monkeypatch.setenv("DFS_SEED", "3")
    main(["gen", "--out", str(tmp_path / "b"), "--mode", "sync", "--per-class", "2", "--seed", "99"])
    assert json.loads((tmp_path / "b" / MANIFEST_NAME).read_text())["seed"] == 3
    for p in (tmp_path / "a").iterdir():
        assert p.read_bytes() == (tmp_path / "b" / p.name).read_bytes()
    monkeypatch.setenv("DFS_SEED", "abc")
    assert main(["gen", "--out", str(tmp_path / "c"), "--mode", "sync", "--per-class", "2"]) == 2


@pytest.fixture(scope="module")
def small_data(tmp_path_factory):
    root = tmp_path_factory.mktemp("data")
    main(["gen", "--out", str(root / "train"), "--mode", "full", "--per-class", "6", "--seed", "1"])
    main(["gen", "--out", str(root / "test"), "--mode", "full", "--per-class", "5", "--seed", "2"])
    return root


def test_train_zero_epochs_writes_init(tmp_path, small_data):
    from dfshift.model import init_params, load_model

    cfg_path = write_config(tmp_path / "run.json")
    out = tmp_path / "m.bin"
    assert main(["train", "--config", cfg_path, "--data", str(small_data / "train"),
                 "--out", str(out), "--epochs", "0", "--seed", "4"]) == 0
    params, cfg = load_model(out)
    init = init_params(cfg, 4, "he")
    assert all(params[n].tobytes() == a.tobytes() for n, a in init.items())
    assert Path(f"{out}.log.jsonl").read_text() == ""


def test_train_eval_deterministic_end_to_end(tmp_path, small_data, capsys):
    cfg_path = write_config(tmp_path / "run.json", "t_shared", epochs=3)
    blobs, reports = [], []
    for run in ("a", "b"):
        model, report = tmp_path / f"{run}.bin", tmp_path / f"{run}.json"
        assert main(["train", "--config", cfg_path, "--data", str(small_data / "train"),
                     "--out", str(model), "--seed", "2"]) == 0
        assert main(["eval", "--model", str(model), "--data", str(small_data / "test"),
                     "--report", str(report)]) == 0
        blobs.append(model.read_bytes())
        reports.append(json.loads(report.read_text()))
        log_lines = Path(f"{model}.log.jsonl").read_text().splitlines()
        assert [json.loads(l)["epoch"] for l in log_lines] == [1, 2, 3]
    assert blobs[0] == blobs[1]
    assert {k: v for k, v in reports[0].items() if k != "model_path"} == \
        {k: v for k, v in reports[1].items() if k != "model_path"}
    rep = reports[0]
    assert rep["num_samples"] == 20 and rep["top1"] == rep["balanced"]  # balanced test set
    assert "top1" in capsys.readouterr().out


def test_eval_on_training_set_matches_log(tmp_path, small_data):
    cfg_path = write_config(tmp_path / "run.json", "mt_shared", epochs=2)
    model, report = tmp_path / "m.bin", tmp_path / "r.json"
    main(["train", "--config", cfg_path, "--data", str(small_data / "train"), "--out", str(model)])
    main(["eval", "--model", str(model), "--data", str(small_data / "train"), "--report", str(report)])
    last = json.loads(Path(f"{model}.log.jsonl").read_text().splitlines()[-1])
    assert json.loads(report.read_text())["top1"] == last["train_top1"]


def test_eval_dim_mismatch(tmp_path, small_data, capsys):
    cfg_path = write_config(tmp_path / "run.json", epochs=0)
    model = tmp_path / "m.bin"
    main(["train", "--config", cfg_path, "--data", str(small_data / "train"), "--out", str(model)])
    main(["gen", "--out", str(tmp_path / "dir"), "--mode", "direction", "--per-class", "2"])
    assert main(["eval", "--model", str(model), "--data", str(tmp_path / "dir"),
                 "--report", str(tmp_path / "r.json")]) == 2
    assert "classes" in capsys.readouterr().err


def test_train_config_errors(tmp_path, small_data):
    bad = tmp_path / "bad.json"
    bad.write_text("{not json")
    assert main(["train", "--config", str(bad), "--data", str(small_data / "train"), "--out", "m"]) == 2
    bad.write_text(json.dumps({"train": {"learning_rate": -1}}))
    assert main(["train", "--config", str(bad), "--data", str(small_data / "train"), "--out", "m"]) == 2
    assert main(["train", "--config", str(CONFIGS / "mt_shared.json"), "--out", "m"]) == 2  # no data dir
    assert main(["train", "--config", str(bad), "--data", str(tmp_path / "missing"), "--out", "m"]) == 2


@pytest.mark.filterwarnings("ignore::RuntimeWarning")
def test_train_numerics_abort(tmp_path, small_data, capsys):
    cfg_path = write_config(tmp_path / "run.json", learning_rate=1e300, epochs=3)
    assert main(["train", "--config", cfg_path, "--data", str(small_data / "train"),
                 "--out", str(tmp_path / "m.bin")]) == 1
    assert "numerical" in capsys.readouterr().err
    assert not (tmp_path / "m.bin").exists()


def test_shipped_configs_cover_the_ablations():
    for name, flags in ABLATION_SHIFT.items():
        rc = RunConfig.load(CONFIGS / f"{name}.json")
        assert {k: rc.shift[k] for k in flags} == flags
        assert rc.network_config().stages == RunConfig.ablation(name).network_config().stages


def test_ablation_flags_are_band_widths():
    """Turning a mechanism off is the same network as a zero band for it."""
    on = RunConfig.ablation("mt_shared")
    on.shift["k_fraction"] = "0"
    assert on.network_config().shift == RunConfig.ablation("t_shared").network_config().shift
    off = RunConfig.ablation("t_shared")
    off.shift["i_fraction"] = "0"
    assert off.network_config().shift.disabled() == RunConfig.ablation("nonshift").network_config().shift


def test_gradcheck_cli(capsys):
    assert main(["gradcheck", "--config", "temporal-only+shared"]) == 0
    out = capsys.readouterr().out
    assert "passed" in out and "stage2.weight" in out
    assert main(["gradcheck", "--config", "nonshift+nonshared", "--tol", "1e-12"]) == 1
    assert "FAILED" in capsys.readouterr().out
    assert main(["gradcheck", "--config", "dual-shift+shared", "--skip-shift-adjoint"]) == 1
    with pytest.raises(SystemExit):
        main(["gradcheck", "--config", "nope"])


def test_bench_cli(tmp_path, capsys):
    report = tmp_path / "b.json"
    assert main(["bench", "--shape", "16,4,8,8", "--iters", "2", "--warmup", "1", "--report", str(report)]) == 0
    r = json.loads(report.read_text())
    shifts = [t for t in r["timings"] if "shift" in t["kernel"]]
    assert shifts and all(t["mult_ops"] == 0 and t["mean_ms"] > 0 for t in shifts)
    kernels = {t["kernel"] for t in r["timings"]}
    assert {"modality_shift", "temporal_shift", "dual_shift", "forward_full"} <= kernels
    net = r["networks"]
    assert net["dual_shared"]["param_count"] < net["dual_nonshared"]["param_count"]
    with pytest.raises(SystemExit):
        main(["bench", "--shape", "1,2,3", "--report", str(report)])
    assert main(["bench", "--iters", "0", "--report", str(report)]) == 2


def test_bench_bytes_scale_with_pixels():
    from dfshift.bench import run_bench

    small = run_bench((16, 4, 8, 8), iters=1, warmup=0, backends=["python"])
    big = run_bench((16, 4, 16, 16), iters=1, warmup=0, backends=["python"])
    by = lambda r: {t["kernel"]: t["bytes_moved"] for t in r["timings"] if "shift" in t["kernel"]}  # noqa: E731
    for k, v in by(small).items():
        assert by(big)[k] == 4 * v


@pytest.mark.slow
def test_direction_training_reaches_target(tmp_path):
    """M+T shared net on direction data, 50/class, 50 epochs: train top1 >= 0.9."""
    data = tmp_path / "dir"
    main(["gen", "--out", str(data), "--mode", "direction", "--per-class", "50", "--seed", "0"])
    cfg_path = write_config(tmp_path / "run.json", "mt_shared", epochs=50)
    main(["train", "--config", cfg_path, "--data", str(data), "--out", str(tmp_path / "m.bin")])
    last = json.loads(Path(f"{tmp_path / 'm.bin'}.log.jsonl").read_text().splitlines()[-1])
    assert last["train_top1"] >= 0.9
