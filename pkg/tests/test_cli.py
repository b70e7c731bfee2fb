import json
import math

import numpy as np
import pytest

from fluxcat.cli import main


def read_csv(path):
    meta, header, rows = [], None, []
    with open(path) as fh:
        for line in fh:
            line = line.rstrip("\n")
            if line.startswith("#"):
                meta.append(line)
            elif header is None:
                header = line.split(",")
            else:
                rows.append([float(v) for v in line.split(",")])
    return meta, header, np.array(rows)


def test_spectrum_basic(tmp_path):
    out = tmp_path / "spec.csv"
    rc = main(["spectrum", "--preset", "suny2000", "--dim", "384",
               "--phi-x-min", "0.499", "--phi-x-max", "0.501",
               "--points", "5", "--output", str(out)])
    assert rc == 0
    meta, header, rows = read_csv(out)
    assert any(line.startswith("# config =") for line in meta)
    assert header[0] == "phi_x" and header[-1] == "gap_target"
    assert rows.shape[0] == 5
    gap = rows[:, -1]
    assert int(np.argmin(gap)) == 2                      # minimal at phi_x = 0.5
    assert np.allclose(gap, gap[::-1], rtol=1e-8)        # symmetric range, symmetric gap
    energies = rows[:, 1:-1]
    assert np.all(np.diff(energies, axis=1) >= 0)


def test_spectrum_deterministic_output(tmp_path):
    args = ["spectrum", "--preset", "suny2000", "--dim", "320",
            "--phi-x-min", "0.4995", "--phi-x-max", "0.5005",
            "--points", "3", "--n-levels", "46"]
    out1, out2 = tmp_path / "a.csv", tmp_path / "b.csv"
    assert main(args + ["--output", str(out1)]) == 0
    assert main(args + ["--output", str(out2)]) == 0
    assert out1.read_bytes() == out2.read_bytes()


def test_config_file_and_flag_precedence(tmp_path):
    cfg = tmp_path / "cfg.json"
    cfg.write_text(json.dumps({
        "preset": "suny2000",
        "basis": {"dim": 320},
        "spectrum": {"phi_x_min": 0.4995, "phi_x_max": 0.5005, "points": 5},
    }))
    out = tmp_path / "spec.csv"
    rc = main(["spectrum", "--config", str(cfg), "--points", "3",
               "--output", str(out)])
    assert rc == 0
    _, _, rows = read_csv(out)
    assert rows.shape[0] == 3  # flag overrides the config file


def test_spectrum_rejects_empty_range(tmp_path):
    rc = main(["spectrum", "--preset", "suny2000", "--points", "0",
               "--output", str(tmp_path / "x.csv")])
    assert rc == 2


def test_unknown_preset_is_config_error(tmp_path):
    rc = main(["spectrum", "--preset", "nope", "--output", str(tmp_path / "x.csv")])
    assert rc == 2


def test_invalid_json_is_config_error(tmp_path):
    bad = tmp_path / "bad.json"
    bad.write_text("{not json")
    rc = main(["coherence", "--config", str(bad)])
    assert rc == 2


def test_coherence_summary(tmp_path):
    out = tmp_path / "coh.json"
    rc = main(["coherence", "--preset", "suny2000", "--dim", "512",
               "--output", str(out), "--dump-states", str(tmp_path / "dumps")])
    assert rc == 0
    payload = json.loads(out.read_text())
    assert payload["schema"] == 1
    comp, lit = payload["computed"], payload["literature"]
    assert lit["i_rel_target"] == 194.0
    assert comp["target_indices"] == [44, 45]
    t1 = comp["targets"][1]
    # self-consistency: reported relative size equals variance over reference variance
    assert t1["i_rel"] == pytest.approx(
        t1["variance_phi0sq"] / comp["reference_variance_phi0sq"], rel=1e-9)
    assert comp["well_separation_phi0"] == pytest.approx(0.65499, abs=2e-5)
    assert comp["reference"]["i_rel_self"] == 1.0
    # reference ground state matches the harmonic formula to better than 1%
    assert comp["reference"]["variance_phi0sq"] == pytest.approx(
        comp["reference_variance_phi0sq"], rel=0.01)
    wells = tmp_path / "dumps" / "wells_phix0.5.csv"
    meta, header, rows = read_csv(wells)
    assert header == ["phi", "potential_ghz", "psi0", "psi1"]
    assert rows.shape[0] == 2048


def test_coherence_delft_preset(tmp_path):
    out = tmp_path / "delft.json"
    rc = main(["coherence", "--preset", "delft2000", "--output", str(out)])
    assert rc == 0
    payload = json.loads(out.read_text())
    assert payload["three_junction"]["effective_size"] == pytest.approx(45.107, abs=2e-3)
    assert "computed" not in payload  # analytic summary only for this preset


def test_dephase_scan(tmp_path):
    out = tmp_path / "dep.csv"
    rc = main(["dephase", "--preset", "suny2000", "--dim", "384",
               "--grid-points", "1024", "--points", "5",
               "--gamma-min-ref", "2", "--gamma-max-ref", "16",
               "--output", str(out)])
    assert rc == 0
    _, header, rows = read_csv(out)
    assert header == ["gamma_phi0", "gamma_over_sigma_ref", "i_rel_0", "i_rel_1",
                      "e0_dephased", "e1_dephased", "gap_rel_diff", "marker"]
    assert np.sum(rows[:, header.index("marker")] == 1.0) == 1
    irel1 = rows[:, header.index("i_rel_1")]
    assert np.all(np.diff(irel1) > 0)  # weaker dephasing keeps more coherence
    # at least one row sits in the collapsed-coherence / intact-gap zone
    irel0 = rows[:, header.index("i_rel_0")]
    gapd = np.abs(rows[:, header.index("gap_rel_diff")])
    assert np.any((np.maximum(irel0, irel1) <= 1.0) & (gapd <= 1e-3))


def test_witness_report(tmp_path):
    out = tmp_path / "wit.json"
    rc = main(["witness", "--preset", "suny2000", "--dim", "384",
               "--grid-points", "1024", "--state", "target1",
               "--kind", "gaussian", "--output", str(out)])
    assert rc == 0
    payload = json.loads(out.read_text())
    assert payload["schema"] == 1
    assert payload["method"] == "numeric-inversion"
    assert 0.0 < payload["b"] < 1.0
    assert payload["bound_i_phi0sq"] > 0.0
    assert payload["sound"] is True
    assert payload["bound_i_rel"] == pytest.approx(
        payload["bound_i_phi0sq"] / 3.2579436243e-4, rel=1e-6)


def test_witness_delta_needs_t(tmp_path):
    rc = main(["witness", "--preset", "suny2000", "--kind", "delta",
               "--output", str(tmp_path / "w.json")])
    assert rc == 2


def test_oracle_check_ok(capsys):
    rc = main(["oracle-check", "--preset", "toy-deepwell", "--dim", "448",
               "--phi-x", "0.5", "--n-levels", "6", "--fd-points", "32768",
               "--fd-min", "-0.7", "--fd-max", "1.7", "--rtol", "1e-5"])
    assert rc == 0
    assert "ok" in capsys.readouterr().out


def test_oracle_check_flags_numerical_failure(capsys):
    rc = main(["oracle-check", "--preset", "toy-deepwell", "--dim", "448",
               "--phi-x", "0.5", "--n-levels", "6", "--fd-points", "4096",
               "--fd-min", "-0.7", "--fd-max", "1.7", "--rtol", "1e-12"])
    assert rc == 3
