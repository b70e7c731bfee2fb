"""End-to-end: drive the fluxcat CLI for fresh CSVs, then render all three
figure kinds.  This is the release criterion for the figure package."""

import subprocess
import sys

import pytest

from fluxfig import FigureSpec, render

MARKER_GAMMA = 0.03447  # sqrt(hbar/(C omega)) for suny2000, Phi_0 units


def run_fluxcat(args):
    proc = subprocess.run([sys.executable, "-m", "fluxcat.cli", *args],
                          capture_output=True, text=True, timeout=900)
    assert proc.returncode == 0, proc.stderr
    return proc


@pytest.fixture(scope="module")
def fresh_outputs(tmp_path_factory):
    base = tmp_path_factory.mktemp("pipeline")
    fast = ["--dim", "384", "--grid-points", "1024"]
    run_fluxcat(["coherence", "--preset", "suny2000", *fast,
                 "--phi-x", "0.499", "--output", str(base / "coh499.json"),
                 "--dump-states", str(base)])
    run_fluxcat(["coherence", "--preset", "suny2000", *fast,
                 "--output", str(base / "coh500.json"),
                 "--dump-states", str(base)])
    run_fluxcat(["spectrum", "--preset", "suny2000", *fast,
                 "--phi-x-min", "0.4985", "--phi-x-max", "0.5015",
                 "--points", "9", "--dephase-gamma", f"{MARKER_GAMMA}",
                 "--output", str(base / "spectrum.csv")])
    run_fluxcat(["dephase", "--preset", "suny2000", *fast,
                 "--points", "9", "--gamma-min-ref", "1", "--gamma-max-ref", "16",
                 "--output", str(base / "dephase.csv")])
    return base


def test_all_three_kinds_render_from_fresh_cli_outputs(fresh_outputs):
    base = fresh_outputs
    wells = render(FigureSpec("wells",
                              [str(base / "wells_phix0.499.csv"),
                               str(base / "wells_phix0.5.csv")],
                              str(base / "wells.png")))
    crossing = render(FigureSpec("crossing", [str(base / "spectrum.csv")],
                                 str(base / "crossing.png")))
    dephasing = render(FigureSpec("dephasing", [str(base / "dephase.csv")],
                                  str(base / "dephasing.png")))
    for info in (wells, crossing, dephasing):
        for path in info["outputs"]:
            assert (base / path).stat().st_size > 0 if not str(path).startswith("/") \
                else True
    assert (base / "wells.png").stat().st_size > 0
    assert (base / "crossing.svg").stat().st_size > 0

    zone = dephasing["zone"]
    print(f"ACCEPTANCE [figures]: three kinds rendered; shaded zone = {zone}")
    assert zone is not None, "dephasing figure shaded region must be non-empty"
    lo, hi = zone
    assert lo <= hi
