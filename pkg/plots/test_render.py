"""Tests for the figure renderer; exercises only the CSV/sidecar interface."""

import json
import subprocess
import sys
from pathlib import Path

import pytest

HERE = Path(__file__).parent
SCRIPT = HERE / "render.py"

sys.path.insert(0, str(HERE))
import render  # noqa: E402


def write_inputs(tmp_path, ids=("thm11",), rows_per_id=4, slope=0.331, ref=1 / 3):
    lines = ["inequality_id,n,R,lhs,rhs,ratio"]
    for ineq in ids:
        for k in range(rows_per_id):
            R = 32 * 2**k
            ratio = 0.5 * R**slope
            lines.append(f"{ineq},2,{R},{ratio * R},{R},{ratio}")
    csv_path = tmp_path / "sweep.csv"
    csv_path.write_text("\n".join(lines) + "\n")
    sidecars = []
    for ineq in ids:
        sc = tmp_path / f"{ineq}.json"
        sc.write_text(json.dumps({
            "inequality_id": ineq, "slope": slope, "reference_exponent": ref,
            "n": 2, "seed": 1,
        }))
        sidecars.append(sc)
    return csv_path, sidecars


def test_renders_one_figure_per_id(tmp_path):
    csv_path, sidecars = write_inputs(tmp_path, ids=("thm11", "cor35"))
    out = tmp_path / "figs"
    code = render.main(["--csv", str(csv_path),
                        "--sidecar", *[str(s) for s in sidecars],
                        "--out", str(out)])
    assert code == 0
    assert (out / "thm11_n2.png").exists()
    assert (out / "cor35_n2.png").exists()


def test_annotated_slope_matches_sidecar(tmp_path, monkeypatch):
    csv_path, sidecars = write_inputs(tmp_path, slope=0.2711)
    captured = {}
    orig = render.render_group

    def spy(ineq_id, rows, sidecar, out_dir):
        captured[ineq_id] = sidecar.get("slope")
        return orig(ineq_id, rows, sidecar, out_dir)

    monkeypatch.setattr(render, "render_group", spy)
    out = tmp_path / "figs"
    assert render.main(["--csv", str(csv_path), "--sidecar", str(sidecars[0]),
                        "--out", str(out)]) == 0
    assert round(captured["thm11"], 3) == 0.271


def test_single_row_exit_2(tmp_path):
    csv_path, sidecars = write_inputs(tmp_path, rows_per_id=1)
    assert render.main(["--csv", str(csv_path), "--sidecar", str(sidecars[0]),
                        "--out", str(tmp_path / "figs")]) == 2


def test_missing_columns_exit_2(tmp_path):
    bad = tmp_path / "bad.csv"
    bad.write_text("inequality_id,R,ratio\nthm11,32,1.0\n")
    sc = tmp_path / "s.json"
    sc.write_text(json.dumps({"inequality_id": "thm11", "slope": 0.0}))
    assert render.main(["--csv", str(bad), "--sidecar", str(sc),
                        "--out", str(tmp_path / "figs")]) == 2


def test_id_filter(tmp_path):
    csv_path, sidecars = write_inputs(tmp_path, ids=("thm11", "cor35"))
    out = tmp_path / "figs"
    assert render.main(["--csv", str(csv_path),
                        "--sidecar", *[str(s) for s in sidecars],
                        "--out", str(out), "--id", "thm11"]) == 0
    assert (out / "thm11_n2.png").exists()
    assert not (out / "cor35_n2.png").exists()
    assert render.main(["--csv", str(csv_path), "--sidecar", str(sidecars[0]),
                        "--out", str(out), "--id", "nope"]) == 2


def test_cli_invocation(tmp_path):
    csv_path, sidecars = write_inputs(tmp_path)
    out = tmp_path / "figs"
    proc = subprocess.run(
        [sys.executable, str(SCRIPT), "--csv", str(csv_path),
         "--sidecar", str(sidecars[0]), "--out", str(out)],
        capture_output=True, text=True,
    )
    assert proc.returncode == 0, proc.stderr
    assert (out / "thm11_n2.png").exists()


def test_end_to_end_with_primary_cli(tmp_path):
    """Full interface test: generate a sweep with the primary CLI, render it."""
    mtlab = None
    for cand in ("mtlab",):
        try:
            subprocess.run([cand, "--help"], capture_output=True, check=True)
            mtlab = cand
        except (FileNotFoundError, subprocess.CalledProcessError):
            pass
    if mtlab is None:
        pytest.skip("primary CLI not installed")
    proc = subprocess.run(
        [mtlab, "sweep", "--ineq", "cor35", "--n", "2", "--R", "32,64,128",
         "--seed", "1", "--out", str(tmp_path)],
        capture_output=True, text=True,
    )
    assert proc.returncode == 0, proc.stderr
    out = tmp_path / "figs"
    code = render.main([
        "--csv", str(tmp_path / "sweep_cor35_n2_seed1.csv"),
        "--sidecar", str(tmp_path / "sweep_cor35_n2_seed1.json"),
        "--out", str(out),
    ])
    assert code == 0
    assert (out / "cor35_n2.png").exists()
