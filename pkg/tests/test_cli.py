import json

import pytest

from fermigas.cli import main, parse_potential, parse_vec


def run_cli(capsys, *argv):
    code = main(list(argv))
    out = capsys.readouterr().out
    return code, out


def test_parse_vec():
    assert parse_vec("1,0,-2") == (1, 0, -2)
    from fermigas.cli import ConfigError
    with pytest.raises(ConfigError):
        parse_vec("1,0")
    with pytest.raises(ConfigError):
        parse_vec("1,a,0")


def test_parse_potential_kinds(tmp_path):
    assert parse_potential("coulomb:g=2").g == 2.0
    pot = parse_potential("yukawa:g=1,mu=0.5")
    assert pot.mu == 0.5
    assert parse_potential("zero").kind == "zero"
    path = tmp_path / "t.txt"
    path.write_text("1 0 0 1.0\n-1 0 0 1.0\n")
    assert parse_potential(f"table:{path}").kind == "table"


def test_lattice_info(capsys):
    code, out = run_cli(capsys, "lattice-info", "--kf", "1")
    assert code == 0
    data = json.loads(out)
    assert data["n_particles"] == 7 and data["kappa"] == 1.5


def test_lune_csv_has_five_rows(capsys):
    code, out = run_cli(capsys, "lune", "--kf", "1", "--k", "1,0,0",
                        "--format", "csv")
    assert code == 0
    lines = out.strip().splitlines()
    assert lines[0] == "px,py,pz,lambda"
    assert len(lines) == 6
    assert lines[-1] == "2,0,0,1.5"


def test_momentum_both_routes(capsys):
    code, out = run_cli(capsys, "momentum", "--kf", "1", "--xi", "1,1,0",
                        "--potential", "coulomb:g=1", "--route", "both")
    assert code == 0
    data = json.loads(out)
    assert data["n_b_spectral"] > 0 and data["n_b_integral"] > 0
    assert data["discrepancy"] < 1e-10
    assert data["n_ex"] < 0
    assert data["n_total"] == data["n_b"] + data["n_ex"]


def test_momentum_deterministic_across_thread_counts(capsys):
    args = ("momentum", "--kf", "1", "--xi", "2,0,0",
            "--potential", "coulomb:g=1", "--route", "both")
    _, out1 = run_cli(capsys, *args, "--threads", "1")
    _, out2 = run_cli(capsys, *args, "--threads", "1")
    _, out4 = run_cli(capsys, *args, "--threads", "4")
    assert out1 == out2 == out4


def test_momentum_sum_delta(capsys):
    code, out = run_cli(capsys, "momentum-sum", "--kf", "1",
                        "--potential", "coulomb:g=1",
                        "--observable", "delta:2,0,0", "--route", "spectral")
    assert code == 0
    data = json.loads(out)
    assert len(data["per_xi"]) == 2
    assert data["value"] == pytest.approx(
        sum(r["n_total"] for r in data["per_xi"]))


def test_energy_json(capsys):
    code, out = run_cli(capsys, "energy", "--kf", "1",
                        "--potential", "coulomb:g=1",
                        "--k-max", "4", "--tail-tol", "1e-3")
    assert code in (0, 3)
    data = json.loads(out)
    assert data["e_fs_kinetic"] == 6.0
    assert data["e_corr_bos"] < 0 < data["e_corr_ex"]


def test_verify_exit_zero_and_json(capsys):
    code, out = run_cli(capsys, "verify", "--kf", "1",
                        "--potential", "coulomb:g=1")
    assert code == 0
    data = json.loads(out)
    assert all(r["status"] != "fail" for r in data)


def test_dv_compare_csv_header(capsys):
    code, out = run_cli(capsys, "dv-compare", "--kf", "1",
                        "--potential", "coulomb:g=1", "--xi-list", "2,0,0",
                        "--samples", "20000", "--format", "csv")
    assert code == 0
    lines = out.strip().splitlines()
    assert lines[0] == "xi,n_b_disc,n_ex_disc,n_b_dv,n_ex_dv,ratio_b,ratio_ex"
    assert len(lines) == 2


def test_config_error_exit_2(capsys):
    code, _ = run_cli(capsys, "energy", "--kf", "1",
                      "--potential", "bogus:g=1")
    assert code == 2
    code, _ = run_cli(capsys, "momentum", "--kf", "1", "--xi", "1,1",
                      "--potential", "coulomb:g=1")
    assert code == 2


def test_verify_rejects_bad_potential_table(capsys, tmp_path):
    path = tmp_path / "asym.txt"
    path.write_text("1 0 0 1.0\n")
    code, _ = run_cli(capsys, "verify", "--kf", "1",
                      "--potential", f"table:{path}")
    assert code == 2


def test_nonconvergence_flag_exit_3(capsys):
    # one doubling from a tiny cutoff cannot reach the default tail target
    code, out = run_cli(capsys, "momentum", "--kf", "1", "--xi", "0,0,0",
                        "--potential", "coulomb:g=1", "--route", "spectral",
                        "--k-max", "2", "--tail-tol", "1e-12",
                        "--max-doublings", "1")
    assert code == 3
    assert not json.loads(out)["converged"]
