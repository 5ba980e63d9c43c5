"""File formats and the command-line front end, exercised in process
through main(argv)."""

import numpy as np
import pytest

from scalefix.cli import main
from scalefix.modelio import (
    ConfigError,
    load_parameters,
    load_run_config,
    parse_shock_file,
    save_parameters,
)
from scalefix.trade import (
    GeneralParams,
    MultiSectorParams,
    OneSectorParams,
    ParameterError,
)


# ------------------------------------------------------------ fixtures


def write(path, text):
    path.write_text(text)
    return str(path)


def symmetric_one_sector(tmp_path, extra="", tau12="1.5", tau21="1.5"):
    write(tmp_path / "A.csv", "A\n1\n1\n")
    write(tmp_path / "tau.csv", f"1,2\n1,{tau12}\n{tau21},1\n")
    write(tmp_path / "gamma.csv", "gamma\n0.5\n0.5\n")
    write(tmp_path / "L.csv", "L\n1\n1\n")
    return write(tmp_path / "run.ini", (
        "# two symmetric countries\n"
        "[model]\n"
        "kind = one-sector\n"
        "A = A.csv\ntau = tau.csv\ngamma = gamma.csv\nL = L.csv\n"
        "theta = 4.0\nsigma = 2.0\n"
        "[certify]\nsamples = 6\nseed = 1\n" + extra))


def multi_params(J=2, S=2, seed=11):
    rng = np.random.default_rng(seed)
    tau = 1.0 + rng.uniform(0.1, 1.2, (J, J, S))
    for s in range(S):
        np.fill_diagonal(tau[:, :, s], 1.0)
    alpha = rng.uniform(0.2, 1.0, (J, S))
    alpha /= alpha.sum(axis=1, keepdims=True)
    return MultiSectorParams(
        A=rng.uniform(0.5, 2.0, (J, S)), tau=tau, alpha=alpha,
        L=rng.uniform(0.5, 2.0, J),
        theta=np.array([3.5, 5.0]), sigma=np.array([2.0, 2.8]))


def general_params(J=2, S=2, seed=3):
    rng = np.random.default_rng(seed)
    base = multi_params(J=J, S=S, seed=seed)
    gl = rng.uniform(0.5, 0.8, (J, S))
    gio = rng.uniform(0.1, 1.0, (J, S, S))
    gio *= ((1.0 - gl) / gio.sum(axis=1))[:, None, :]
    return GeneralParams(A=base.A, tau=base.tau, alpha=base.alpha,
                         L=base.L, theta=base.theta, sigma=base.sigma,
                         gamma_labor=gl, gamma_io=gio)


def kv_lines(path):
    out = {}
    for line in path.read_text().splitlines():
        if not line.strip():
            continue
        key, _, value = line.partition(":")
        out[key.strip()] = value.strip()
    return out


# -------------------------------------------------------- file formats


def test_three_country_fixture_loads(tmp_path):
    write(tmp_path / "A.csv", "A\n1\n1.2\n0.8\n")
    write(tmp_path / "tau.csv",
          "1,2,3\n1,1.4,1.6\n1.4,1,1.3\n1.6,1.3,1\n")
    write(tmp_path / "gamma.csv", "gamma\n0.6\n0.6\n0.6\n")
    write(tmp_path / "L.csv", "L\n1\n2\n0.5\n")
    cfg_path = write(tmp_path / "run.ini",
                     "[model]\nkind = one-sector\nA = A.csv\n"
                     "tau = tau.csv\ngamma = gamma.csv\nL = L.csv\n"
                     "theta = 4\nsigma = 2\n")
    p = load_parameters(load_run_config(cfg_path))
    assert isinstance(p, OneSectorParams)
    assert p.J == 3
    assert p.tau[0, 2] == 1.6
    assert p.connected


def test_inf_token_reads_as_infinity(tmp_path):
    cfg = symmetric_one_sector(tmp_path, tau12="inf", tau21="inf")
    p = load_parameters(load_run_config(cfg))
    assert np.isinf(p.tau[0, 1]) and np.isinf(p.tau[1, 0])
    assert not p.connected


@pytest.mark.parametrize("params", [
    OneSectorParams(A=np.array([1.0, 2.0]),
                    tau=np.array([[1.0, np.inf], [np.inf, 1.0]]),
                    gamma=np.array([0.3, 0.8]), L=np.array([1.0, 0.5]),
                    theta=4.25, sigma=2.125),
    multi_params(),
    general_params(),
])
def test_save_load_round_trip(params, tmp_path):
    cfg_path = save_parameters(params, str(tmp_path / "saved"))
    again = load_parameters(load_run_config(cfg_path))
    assert type(again) is type(params)
    for name in ("A", "tau", "L", "theta", "sigma", "gamma",
                 "alpha", "gamma_labor", "gamma_io"):
        if hasattr(params, name):
            assert np.array_equal(np.asarray(getattr(params, name)),
                                  np.asarray(getattr(again, name))), name


def test_alpha_row_sum_rejected_naming_the_row(tmp_path):
    save_parameters(multi_params(), str(tmp_path))
    a = np.loadtxt(tmp_path / "alpha.csv", delimiter=",", skiprows=1)
    a[1] *= 0.9
    lines = ["s1,s2"] + [f"{r[0]:.17g},{r[1]:.17g}" for r in a]
    write(tmp_path / "alpha.csv", "\n".join(lines) + "\n")
    with pytest.raises(ParameterError, match="country 2"):
        load_parameters(load_run_config(str(tmp_path / "params.ini")))


def test_malformed_cell_names_row_and_column(tmp_path):
    cfg = symmetric_one_sector(tmp_path)
    write(tmp_path / "tau.csv", "1,2\n1,oops\n1.5,1\n")
    with pytest.raises(ConfigError, match=r"row 2, column 2"):
        load_parameters(load_run_config(cfg))


def test_missing_model_key_is_reported(tmp_path):
    path = write(tmp_path / "run.ini",
                 "[model]\nkind = one-sector\nA = A.csv\n")
    with pytest.raises(ConfigError, match="tau"):
        load_run_config(path)


def test_shock_file_parsing(tmp_path):
    path = write(tmp_path / "shocks.txt",
                 "# doubling trade costs outbound from 1\n"
                 "tau[1][2] *= 2.0\n"
                 "\n"
                 "theta = 5.0   # and a level reset\n")
    steps = parse_shock_file(path)
    assert len(steps) == 2
    assert steps[0].field == "tau" and steps[0].indices == (1, 2)
    assert steps[0].op == "*=" and steps[0].value == 2.0
    assert steps[1].field == "theta" and steps[1].indices == ()

    bad = write(tmp_path / "bad.txt", "tau[1][2] *= 2.0\ntau[1,2] = 3\n")
    with pytest.raises(ConfigError, match="line 2"):
        parse_shock_file(bad)


# ------------------------------------------------------------- certify


def test_certify_command_clean_run(tmp_path, capsys):
    cfg = symmetric_one_sector(tmp_path)
    out = tmp_path / "run"
    assert main(["certify", "--config", cfg, "--out", str(out)]) == 0
    kv = kv_lines(out / "report.txt")
    assert kv["mode"] == "exact"
    assert kv["connectedness.verdict"] == "pass"
    assert kv["self_interaction.verdict"] == "pass"
    assert kv["scaling.verdict"] == "pass"
    assert kv["monotonicity.verdict"] == "pass"
    assert kv["uniqueness_applicable"] == "true"
    assert kv["attractivity_applicable"] == "true"
    assert abs(float(kv["scaling.u.OMEGA[1]"]) - 1.0) < 1e-9
    assert abs(float(kv["scaling.u.P[1]"]) + 0.8) < 1e-9  # theta/(1+theta)
    stdout = capsys.readouterr().out
    assert stdout.count("\n") == 1
    assert "certify one-sector" in stdout
    assert "[sampled evidence]" not in stdout


def test_certify_quiet_prints_nothing(tmp_path, capsys):
    cfg = symmetric_one_sector(tmp_path)
    assert main(["certify", "--config", cfg, "--out",
                 str(tmp_path / "o"), "--quiet"]) == 0
    assert capsys.readouterr().out == ""


def test_certify_two_bloc_fails_with_exit_3(tmp_path):
    cfg = symmetric_one_sector(tmp_path, tau12="inf", tau21="inf")
    out = tmp_path / "run"
    assert main(["certify", "--config", cfg, "--out", str(out)]) == 3
    kv = kv_lines(out / "report.txt")
    assert kv["connectedness.verdict"] == "fail"
    assert "OMEGA[1]" in kv["connectedness.blocs"]
    assert "|" in kv["connectedness.blocs"]


def test_certify_general_is_sampled_and_fails_monotonicity(tmp_path, capsys):
    cfg_path = save_parameters(general_params(), str(tmp_path))
    with open(cfg_path, "a") as fh:
        fh.write("[certify]\nsamples = 4\nseed = 2\n")
    out = tmp_path / "run"
    code = main(["certify", "--config", cfg_path, "--out", str(out)])
    kv = kv_lines(out / "report.txt")
    assert kv["mode"] == "sampled"
    assert kv["scaling.verdict"] == "evidence-only"
    # negative wage feedback through input costs: a real violation, so
    # the exit code reports failure rather than the hoped-for pass
    assert kv["monotonicity.verdict"] == "fail"
    assert code == 3
    assert "[sampled evidence]" in capsys.readouterr().out


def test_certify_reports_are_deterministic(tmp_path):
    cfg = symmetric_one_sector(tmp_path)
    main(["certify", "--config", cfg, "--out", str(tmp_path / "a"),
          "--quiet"])
    main(["certify", "--config", cfg, "--out", str(tmp_path / "b"),
          "--quiet"])
    ra = (tmp_path / "a" / "report.txt").read_bytes()
    rb = (tmp_path / "b" / "report.txt").read_bytes()
    assert ra == rb


def test_certify_threads_flag_changes_nothing(tmp_path):
    cfg = symmetric_one_sector(tmp_path)
    main(["certify", "--config", cfg, "--out", str(tmp_path / "a"),
          "--quiet"])
    main(["certify", "--config", cfg, "--out", str(tmp_path / "b"),
          "--threads", "3", "--quiet"])
    assert (tmp_path / "a" / "report.txt").read_bytes() == \
        (tmp_path / "b" / "report.txt").read_bytes()


# --------------------------------------------------------------- solve


def test_solve_symmetric_countries_match(tmp_path):
    cfg = symmetric_one_sector(tmp_path)
    out = tmp_path / "run"
    assert main(["solve", "--config", cfg, "--out", str(out),
                 "--quiet"]) == 0
    kv = kv_lines(out / "equilibrium.txt")
    assert kv["OMEGA[1]"] == kv["OMEGA[2]"]
    assert kv["P[1]"] == kv["P[2]"]
    assert kv["w[1]"] == kv["w[2]"]
    assert kv["U[1]"] == kv["U[2]"]
    assert kv["OMEGA[1]"] == "1.00000000e+00"  # first-coordinate numeraire
    trace = (out / "trace.csv").read_text().splitlines()
    assert trace[0] == "iteration,step_gauge,step_quotient"
    assert len(trace) > 2


def test_solve_different_starts_same_file(tmp_path):
    cfg = symmetric_one_sector(tmp_path)
    main(["solve", "--config", cfg, "--out", str(tmp_path / "a"),
          "--seed", "11", "--quiet"])
    main(["solve", "--config", cfg, "--out", str(tmp_path / "b"),
          "--seed", "12", "--quiet"])
    ea = (tmp_path / "a" / "equilibrium.txt").read_bytes()
    eb = (tmp_path / "b" / "equilibrium.txt").read_bytes()
    assert ea == eb


def test_solve_budget_of_one_exits_4(tmp_path, capsys):
    cfg = symmetric_one_sector(tmp_path, extra="[solve]\nmax_iter = 1\n")
    out = tmp_path / "run"
    assert main(["solve", "--config", cfg, "--out", str(out)]) == 4
    trace = (out / "trace.csv").read_text().splitlines()
    assert len(trace) == 2  # header plus the single iteration
    assert not (out / "equilibrium.txt").exists()
    assert "budget" in capsys.readouterr().err


def test_solve_multi_sector_with_named_numeraire(tmp_path):
    cfg_path = save_parameters(multi_params(), str(tmp_path))
    with open(cfg_path, "a") as fh:
        fh.write("[solve]\nnumeraire = named-coordinate:W[1]\n")
    out = tmp_path / "run"
    assert main(["solve", "--config", cfg_path, "--out", str(out),
                 "--quiet"]) == 0
    kv = kv_lines(out / "equilibrium.txt")
    assert kv["W[1]"] == "1.00000000e+00"
    assert "R[2][2]" in kv and "U[2]" in kv


def test_solve_disconnected_network_still_errors_cleanly(tmp_path, capsys):
    # solving a split network would silently pick per-bloc scales, so the
    # connectivity refusal arrives before any iteration, as exit 2
    cfg = symmetric_one_sector(tmp_path, tau12="inf", tau21="inf",
                               extra="")
    code = main(["certify", "--config", cfg, "--out",
                 str(tmp_path / "r"), "--quiet"])
    assert code == 3  # certify tolerates and reports instead
    code = main(["solve", "--config", cfg, "--out", str(tmp_path / "s")])
    assert code == 2
    assert "disconnected" in capsys.readouterr().err
    assert not (tmp_path / "s" / "equilibrium.txt").exists()
    shocks = write(tmp_path / "null.txt", "")
    code = main(["counterfactual", "--config", cfg, "--shocks", shocks,
                 "--out", str(tmp_path / "c")])
    assert code == 2
    assert "connected" in capsys.readouterr().err


# ------------------------------------------------------ counterfactual


def test_counterfactual_null_shock_is_flat(tmp_path):
    cfg = symmetric_one_sector(tmp_path)
    shocks = write(tmp_path / "null.txt", "# nothing\n")
    out = tmp_path / "run"
    assert main(["counterfactual", "--config", cfg, "--shocks", shocks,
                 "--out", str(out), "--quiet"]) == 0
    deltas = kv_lines(out / "deltas.txt")
    assert deltas, "delta table must not be empty"
    for value in deltas.values():
        assert abs(float(value)) <= 1e-8


def test_counterfactual_uniform_productivity_doubling(tmp_path):
    cfg = symmetric_one_sector(tmp_path)
    shocks = write(tmp_path / "s.txt", "A[1] *= 2\nA[2] *= 2\n")
    out = tmp_path / "run"
    assert main(["counterfactual", "--config", cfg, "--shocks", shocks,
                 "--out", str(out), "--quiet"]) == 0
    d = kv_lines(out / "deltas.txt")
    for i in (1, 2):
        for j in (1, 2):
            assert abs(float(d[f"delta.pi[{i}][{j}][1]"])) <= 1e-8
    # welfare gain 2^(1/(theta*gamma)) - 1 with theta 4, gamma 0.5
    want = 2.0 ** 0.5 - 1.0
    assert abs(float(d["delta.U[1]"]) - want) < 1e-6
    assert abs(float(d["delta.U[2]"]) - want) < 1e-6


def test_counterfactual_higher_inbound_cost_cuts_the_share(tmp_path):
    cfg = symmetric_one_sector(tmp_path)
    shocks = write(tmp_path / "s.txt", "tau[1][2] *= 2\n")
    out = tmp_path / "run"
    assert main(["counterfactual", "--config", cfg, "--shocks", shocks,
                 "--out", str(out), "--quiet"]) == 0
    d = kv_lines(out / "deltas.txt")
    assert float(d["delta.pi[1][2][1]"]) < 0
    assert float(d["delta.pi[2][2][1]"]) > 0


def test_counterfactual_disconnecting_shock_exits_2(tmp_path, capsys):
    cfg = symmetric_one_sector(tmp_path)
    shocks = write(tmp_path / "s.txt",
                   "tau[1][2] = inf\ntau[2][1] = inf\n")
    code = main(["counterfactual", "--config", cfg, "--shocks", shocks,
                 "--out", str(tmp_path / "run")])
    assert code == 2
    assert "disconnect" in capsys.readouterr().err
    assert not (tmp_path / "run" / "deltas.txt").exists()


# ------------------------------------------------------------ plumbing


def test_report_command_pretty_prints(tmp_path, capsys):
    cfg = symmetric_one_sector(tmp_path)
    out = tmp_path / "run"
    main(["certify", "--config", cfg, "--out", str(out), "--quiet"])
    assert main(["report", str(out / "report.txt")]) == 0
    text = capsys.readouterr().out
    assert "connectedness:" in text
    assert "  verdict: pass" in text
    assert "mode: exact" in text


def test_missing_config_exits_2(tmp_path, capsys):
    assert main(["certify", "--config", str(tmp_path / "nope.ini"),
                 "--out", str(tmp_path)]) == 2
    assert "error" in capsys.readouterr().err


def test_usage_errors_exit_2(capsys):
    assert main([]) == 2
    assert main(["certify"]) == 2  # --config is required
    capsys.readouterr()
