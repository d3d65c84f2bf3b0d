"""End-to-end checks of the console harness: exit codes, CSV schemas,
determinism, and the documented dump round trips."""

import numpy as np
import pytest

from diraclab import resolvent as res
from diraclab.cli import main
from diraclab.grid import Grid3, load_dump, save_dump


@pytest.fixture
def band_dump(tmp_path):
    g = Grid3(16, 8.0)
    fam = res.band_limited_family(g, 1.5, 1, seed=5)
    path = tmp_path / "in.dump"
    save_dump(fam[0][1], path)
    return path


def run(args):
    return main([str(a) for a in args])


def test_verify_algebra_passes(capsys):
    assert run(["verify-algebra"]) == 0
    out = capsys.readouterr().out
    assert "projection_trace_two" in out
    assert "FAIL" not in out


def test_verify_algebra_corruption_detected(capsys):
    assert run(["verify-algebra", "--corrupt"]) == 1
    out = capsys.readouterr().out
    assert "FAIL" in out
    assert "anticommutation" in out


def test_counterexample_table(tmp_path):
    out = tmp_path / "ce.csv"
    assert run(["counterexample", "--n-list", "10,100,1000", "--out", out]) == 0
    lines = out.read_text().strip().splitlines()
    assert lines[0] == "n,re_qform,im_qform,abs_err_vs_limit"
    data = [line.split(",") for line in lines[1:]]
    assert data[-1][0] == "limit"
    ims = [float(row[2]) for row in data[:-1]]
    errs = [float(row[3]) for row in data[:-1]]
    limit = float(data[-1][2])
    assert ims[0] > ims[1] > ims[2] > limit
    assert errs == sorted(errs, reverse=True)


def test_counterexample_sign_conjugates(tmp_path):
    plus, minus = tmp_path / "p.csv", tmp_path / "m.csv"
    assert run(["counterexample", "--n-list", "1,5", "--out", plus,
                "--sign", "+"]) == 0
    assert run(["counterexample", "--n-list", "1,5", "--out", minus,
                "--sign", "-"]) == 0
    rows_p = [l.split(",") for l in plus.read_text().splitlines()[1:3]]
    rows_m = [l.split(",") for l in minus.read_text().splitlines()[1:3]]
    for rp, rm in zip(rows_p, rows_m):
        assert float(rp[1]) == float(rm[1])
        assert float(rp[2]) == -float(rm[2])


def test_counterexample_deterministic(tmp_path):
    a, b = tmp_path / "a.csv", tmp_path / "b.csv"
    run(["counterexample", "--n-list", "3,30", "--out", a])
    run(["counterexample", "--n-list", "3,30", "--out", b])
    assert a.read_bytes() == b.read_bytes()


def test_sweep_schrodinger_footer(tmp_path):
    out = tmp_path / "s.csv"
    rc = run(["sweep", "--kind", "schrodinger", "--lambda", "4,8,16",
              "--grid-n", "32", "--box-l", "10", "--count", "1",
              "--out", out])
    assert rc == 0
    text = out.read_text()
    assert text.startswith("kind,lambda,mu,s,norm_proxy,f_id,f_norm_minus_s")
    assert "# proxy_loglog_slope=" in text


def test_sweep_dirac_deterministic(tmp_path):
    a, b = tmp_path / "a.csv", tmp_path / "b.csv"
    args = ["sweep", "--kind", "dirac", "--lambda", "4,8", "--grid-n", "16",
            "--box-l", "8", "--count", "1", "--seed", "7"]
    run(args + ["--out", a])
    run(args + ["--out", b])
    assert a.read_bytes() == b.read_bytes()
    assert "# proxy_max_min_ratio=" in a.read_text()


def test_sweep_perturbed_zero_coupling_matches_dirac(tmp_path):
    free, pert = tmp_path / "free.csv", tmp_path / "pert.csv"
    common = ["--lambda", "4,8", "--grid-n", "16", "--box-l", "8",
              "--s", "1.0", "--seed", "0"]
    run(["sweep", "--kind", "dirac", *common, "--count", "1", "--mu", "0.5",
         "--out", free])
    run(["sweep", "--kind", "perturbed", *common, "--mu", "0.5", "--t", "0",
         "--potential", "scalar:1:1", "--out", pert])
    free_rows = {}
    for line in free.read_text().splitlines()[1:]:
        if line.startswith("#"):
            continue
        kind, lam, mu, s, proxy, fid, norm = line.split(",")
        free_rows[(lam, mu)] = norm
    matched = 0
    for line in pert.read_text().splitlines()[1:]:
        lam, mu, t, s, terms, norm, proxy = line.split(",")
        if (lam, mu) in free_rows:
            assert norm == free_rows[(lam, mu)]  # byte-identical
            assert terms == "1"
            matched += 1
    assert matched == 2


def test_apply_round_trip(tmp_path, band_dump):
    mid, back = tmp_path / "mid.dump", tmp_path / "back.dump"
    assert run(["apply", "--in", band_dump, "--out", mid, "--z", "3+0.5j"]) == 0
    assert run(["apply", "--in", mid, "--out", back, "--op", "operator",
                "--z", "3+0.5j"]) == 0
    orig = load_dump(band_dump)
    rt = load_dump(back)
    scale = np.max(np.abs(orig.values))
    assert np.max(np.abs(rt.values - orig.values)) <= 1e-10 * scale


def test_apply_zero_field(tmp_path):
    g = Grid3(8, 6.0)
    from diraclab.grid import GridFunction4

    zero_path = tmp_path / "zero.dump"
    save_dump(GridFunction4.zeros(g), zero_path)
    out = tmp_path / "out.dump"
    assert run(["apply", "--in", zero_path, "--out", out, "--z", "4+1j"]) == 0
    assert np.all(load_dump(out).values == 0)


def test_apply_exit_codes(tmp_path, band_dump):
    out = tmp_path / "x.dump"
    # boundary mode without a declared band limit
    assert run(["apply", "--in", band_dump, "--out", out,
                "--lambda", "8"]) == 3
    # on-spectrum interior query
    assert run(["apply", "--in", band_dump, "--out", out, "--z", "3"]) == 4
    # band bound overlapping the shell
    assert run(["apply", "--in", band_dump, "--out", out, "--lambda", "8",
                "--band-k", "6"]) == 5
    # unreadable input
    assert run(["apply", "--in", tmp_path / "missing.dump", "--out", out,
                "--z", "3+1j"]) == 2


def test_apply_boundary_mode(tmp_path, band_dump):
    out = tmp_path / "b.dump"
    assert run(["apply", "--in", band_dump, "--out", out, "--lambda", "8",
                "--sign", "+", "--band-k", "1.5"]) == 0


def test_neumann_command(tmp_path, band_dump, capsys):
    out = tmp_path / "n.dump"
    rc = run(["neumann", "--in", band_dump, "--out", out, "--z", "4+0.5j",
              "--t", "0.1", "--potential", "scalar:1:1"])
    assert rc == 0
    assert "terms_used=" in capsys.readouterr().out
    assert out.exists()


def test_norm_estimate_prints_value(capsys):
    rc = run(["norm-estimate", "--kind", "schrodinger", "--lambda", "4",
              "--grid-n", "16", "--box-l", "8"])
    assert rc == 0
    val = float(capsys.readouterr().out.strip())
    assert 0 < val < 10


def test_config_file_defaults_and_override(tmp_path, capsys):
    cfg = tmp_path / "run.cfg"
    cfg.write_text(
        "# comment\n"
        "grid.grid-n=16\n"
        "grid.box-l=8\n"
        "run.lambda=4\n"
        "run.kind=schrodinger\n"
    )
    rc = run(["--config", cfg, "norm-estimate"])
    assert rc == 0
    first = float(capsys.readouterr().out.strip())
    # explicit flag beats the config value
    rc = run(["--config", cfg, "norm-estimate", "--lambda", "8"])
    assert rc == 0
    second = float(capsys.readouterr().out.strip())
    assert first != second


def test_potential_spec_parse_error():
    assert run(["neumann", "--in", "x", "--out", "y", "--z", "4+0.5j",
                "--t", "0.1", "--potential", "bogus"]) == 2
