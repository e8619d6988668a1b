import json
import math

import numpy as np
import numpy.testing as npt
import pytest

from ddugm.cli import main
from ddugm.ddt import read_tensor
from ddugm.metrics import psnr
from ddugm.tensors import acceleration


def test_phantom_then_metrics_identity(tmp_path, capsys):
    ph = tmp_path / "ph.ddt"
    assert main(["phantom", "--t", "8", "--h", "64", "--w", "64", "--seed", "7", "-o", str(ph)]) == 0
    assert main(["metrics", str(ph), str(ph)]) == 0
    out = capsys.readouterr().out
    assert "psnr: inf" in out
    assert "ssim: 1.000000" in out


def test_phantom_writes_kspace_companion(tmp_path):
    ph = tmp_path / "ph.ddt"
    kp = tmp_path / "ph_k.ddt"
    assert main(["phantom", "--t", "4", "--h", "32", "--w", "32", "-o", str(ph), "--kspace", str(kp)]) == 0
    image = read_tensor(ph)
    kspace = read_tensor(kp)
    assert image.shape == (4, 32, 32)
    assert kspace.shape == (4, 32, 32)
    assert np.iscomplexobj(kspace)


def test_mask_command_reports_acceleration(tmp_path, capsys):
    path = tmp_path / "m.ddt"
    assert main(["mask", "--spec", "cartesian:R=4", "--t", "8", "--h", "64", "--w", "64", "-o", str(path)]) == 0
    out = capsys.readouterr().out
    assert "acceleration: 4.0000" in out
    mask = read_tensor(path)
    assert mask.dtype == np.bool_
    assert acceleration(mask) == pytest.approx(4.0)


def test_invalid_flags_exit_nonzero(tmp_path, capsys):
    with pytest.raises(SystemExit) as exc:
        main(["mask", "--spec"])
    assert exc.value.code == 2


def test_bad_mask_spec_reports_error(tmp_path, capsys):
    assert main(["mask", "--spec", "hexagonal:R=3", "--t", "2", "--h", "8", "--w", "8", "-o", str(tmp_path / "m.ddt")]) == 1
    assert "error:" in capsys.readouterr().err


def _prepare_case(tmp_path, r="4"):
    ph = tmp_path / "ph.ddt"
    kfull = tmp_path / "k.ddt"
    m = tmp_path / "m.ddt"
    b = tmp_path / "b.ddt"
    main(["phantom", "--t", "4", "--h", "32", "--w", "32", "-o", str(ph), "--kspace", str(kfull)])
    main(["mask", "--spec", f"cartesian:R={r}", "--t", "4", "--h", "32", "--w", "32", "-o", str(m)])
    kspace = np.asarray(read_tensor(kfull), dtype=np.complex128)
    mask = read_tensor(m)
    from ddugm.ddt import write_tensor
    from ddugm.tensors import apply_mask

    write_tensor(b, apply_mask(kspace, mask))
    return ph, m, b


def test_full_recon_pipeline_improves_on_zero_filled(tmp_path, capsys):
    ph, m, b = _prepare_case(tmp_path, r="2")
    cfg_path = tmp_path / "cfg.json"
    cfg_path.write_text(
        json.dumps(
            {
                "n_steps": 60,
                "seed": 1,
                "sigma_min": 0.001,
                "weight_floor": 0.05,
                "hankel_window": 3,
                "hankel_rank": 2,
                "log_every": 5,
                "mu": "inf",
            }
        )
    )
    out = tmp_path / "rec.ddt"
    log = tmp_path / "conv.csv"
    report = tmp_path / "report.json"
    code = main(
        [
            "recon",
            "--input", str(b),
            "--mask", str(m),
            "--config", str(cfg_path),
            "--score-k", "gaussian",
            "--score-i", "gaussian",
            "--output", str(out),
            "--log", str(log),
            "--reference", str(ph),
            "--report", str(report),
        ]
    )
    assert code == 0
    printed = capsys.readouterr().out
    assert '"n_steps": 60' in printed  # resolved config echoed
    rec = np.asarray(read_tensor(out), dtype=np.complex128)
    ref = np.asarray(read_tensor(ph), dtype=np.complex128)
    from ddugm.engine import zero_filled
    from ddugm.tensors import validate_mask

    zf = zero_filled(np.asarray(read_tensor(b), dtype=np.complex128), validate_mask(read_tensor(m)))
    assert psnr(ref, rec) > psnr(ref, zf)
    lines = log.read_text().strip().splitlines()
    assert lines[0] == "step,sigma,psnr,dc_residual"
    assert all(line.rsplit(",", 1)[1] == "0.0" for line in lines[1:])
    assert json.loads(report.read_text())["psnr_db"] > 0


def test_recon_gaussian_requires_reference(tmp_path, capsys):
    ph, m, b = _prepare_case(tmp_path)
    code = main(
        ["recon", "--input", str(b), "--mask", str(m), "--score-k", "gaussian", "--score-i", "gaussian", "--output", str(tmp_path / "rec.ddt")]
    )
    assert code == 1
    assert "reference" in capsys.readouterr().err


def test_recon_rejects_unknown_config_key(tmp_path, capsys):
    ph, m, b = _prepare_case(tmp_path)
    cfg_path = tmp_path / "cfg.json"
    cfg_path.write_text(json.dumps({"n_steps": 20, "sigma_minimum": 0.01}))
    code = main(
        ["recon", "--input", str(b), "--mask", str(m), "--config", str(cfg_path), "--output", str(tmp_path / "r.ddt"), "--reference", str(ph)]
    )
    assert code == 1
    assert "sigma_minimum" in capsys.readouterr().err


def test_env_seed_override(tmp_path, monkeypatch, capsys):
    ph, m, b = _prepare_case(tmp_path)
    cfg_path = tmp_path / "cfg.json"
    cfg_path.write_text(json.dumps({"n_steps": 12, "seed": 5, "hankel_window": 3, "hankel_rank": 2}))
    monkeypatch.setenv("DDUGM_SEED", "99")
    code = main(
        [
            "recon",
            "--input", str(b),
            "--mask", str(m),
            "--config", str(cfg_path),
            "--score-k", "zero",
            "--score-i", "zero",
            "--output", str(tmp_path / "rec.ddt"),
        ]
    )
    assert code == 0
    assert '"seed": 99' in capsys.readouterr().out


def test_serve_check_against_analytic_peer(capsys):
    import socketserver
    import threading

    from test_scores import _AnalyticHandler

    server = socketserver.ThreadingTCPServer(("127.0.0.1", 0), _AnalyticHandler)
    threading.Thread(target=server.serve_forever, daemon=True).start()
    endpoint = f"tcp://127.0.0.1:{server.server_address[1]}"
    try:
        code = main(["serve-check", "--endpoint", endpoint, "--mean", str(_AnalyticHandler.mean), "--tau", str(_AnalyticHandler.tau)])
        out = capsys.readouterr().out
        assert code == 0
        assert "ping: ok" in out and "serve-check: ok" in out
        # mismatched prior parameters must fail the cross-check
        assert main(["serve-check", "--endpoint", endpoint, "--mean", "9.0", "--tau", "0.1"]) == 1
    finally:
        server.shutdown()
        server.server_close()


def test_metrics_csv_output(tmp_path):
    ph = tmp_path / "ph.ddt"
    main(["phantom", "--t", "2", "--h", "32", "--w", "32", "-o", str(ph)])
    csv_path = tmp_path / "report.csv"
    assert main(["metrics", str(ph), str(ph), "--csv", str(csv_path)]) == 0
    lines = csv_path.read_text().strip().splitlines()
    assert lines[0] == "frame,psnr,ssim,mse"
    assert lines[1].split(",")[1] == "inf"
    assert lines[-1].startswith("mean,")
