import json

import numpy as np
import pytest

from capminkowski import PhiSpecError, load_body, make_domain
from capminkowski.cli import RunConfig, main, parse_phi

THETA = np.pi / 3


@pytest.fixture
def domain():
    return make_domain(2, THETA, 129, "arc")


def test_parse_phi_const(domain):
    phi = parse_phi("const:1", domain)
    assert np.all(phi.values.values == 1.0)
    assert phi.provenance == "const:1"


def test_parse_phi_cos2k(domain):
    phi = parse_phi("cos2k:1,1,0.3", domain)
    want = 1.0 + 0.3 * np.cos(2 * domain.beta)
    assert np.allclose(phi.values.values, want, rtol=0, atol=1e-15)
    # the minimum over [0, pi/3] sits at the rim: 1 + 0.3 cos(2 pi/3) = 0.85
    assert phi.values.values.min() == pytest.approx(0.85, abs=1e-12)


def test_parse_phi_znpoly(domain):
    phi = parse_phi("znpoly:1,0.5", domain)
    want = 1.0 + 0.5 * (np.cos(domain.beta) - np.cos(THETA))
    assert np.allclose(phi.values.values, want, rtol=0, atol=1e-15)


def test_parse_phi_errors(domain):
    with pytest.raises(PhiSpecError):
        parse_phi("const1", domain)           # missing colon
    with pytest.raises(PhiSpecError):
        parse_phi("exp:1", domain)            # unknown kind
    with pytest.raises(PhiSpecError) as err:
        parse_phi("znpoly:1,x", domain)       # bad number, position reported
    assert err.value.position == 1
    with pytest.raises(PhiSpecError):
        parse_phi("znpoly:1,0,-50", domain)   # negative somewhere
    with pytest.raises(PhiSpecError):
        parse_phi("cos2k:1,1", domain)        # needs three numbers
    d3 = make_domain(3, THETA, 33, "axisymmetric")
    with pytest.raises(PhiSpecError):
        parse_phi("cos2k:1,1,0.3", d3)        # arc only


def test_parse_phi_table(tmp_path, domain):
    beta = np.linspace(0.0, THETA, 40)
    vals = 1.0 + 0.25 * np.cos(2 * beta)
    path = tmp_path / "phi.csv"
    path.write_text("beta,value\n" + "\n".join(
        f"{float(b)!r},{float(v)!r}" for b, v in zip(beta, vals)))
    phi = parse_phi(f"table:{path}", domain)
    want = 1.0 + 0.25 * np.cos(2 * domain.beta)
    assert np.abs(phi.values.values - want).max() < 1e-6

    path2 = tmp_path / "short.csv"
    path2.write_text("beta,value\n0.0,1.0\n0.1,1.0\n0.2,1.0\n0.3,1.0\n")
    with pytest.raises(PhiSpecError):
        parse_phi(f"table:{path2}", domain)   # does not cover [0, theta]


def test_runconfig_validation():
    with pytest.raises(Exception):
        RunConfig(subcommand="solve", theta=THETA, p=None, phi="const:1")
    with pytest.raises(Exception):
        RunConfig(subcommand="solve", theta=2.0, p=0.0, phi="const:1")
    cfg = RunConfig(subcommand="minkowski", theta=THETA, phi="const:1")
    assert cfg.mode() == "arc"


def test_cli_minkowski_matches_cap(tmp_path):
    out = tmp_path / "m.json"
    code = main(["minkowski", "--n", "2", "--theta", "1.0471975512",
                 "--phi", "const:1", "--grid", "129", "--out", str(out)])
    assert code == 0
    payload = json.loads(out.read_text())
    d = make_domain(2, 1.0471975512, 129, "arc")
    want = 1.0 - np.cos(d.theta) * np.cos(d.beta)
    got = np.asarray(payload["support"])
    assert np.abs(got - want).max() <= 10 * d.h**2
    assert payload["cap_measure"] == pytest.approx(2 * 1.0471975512)
    assert payload["compatibility"]["positive"] is True


def test_cli_solve_writes_everything(tmp_path):
    out = tmp_path / "r.json"
    trace = tmp_path / "t.csv"
    emb = tmp_path / "e.csv"
    code = main(["solve", "--n", "2", "--theta", "1.0471975512", "--p", "0",
                 "--phi", "const:1", "--grid", "129", "--out", str(out),
                 "--trace", str(trace), "--embed-out", str(emb)])
    assert code == 0
    payload = json.loads(out.read_text())
    assert payload["converged"] is True
    assert payload["residual_final"] <= 1e-5
    header = trace.read_text().splitlines()[0]
    assert header == "i,V,A,Omega,ratio,residual,gamma,max_sigma1"
    emb_rows = emb.read_text().splitlines()
    assert emb_rows[0] == "x1,x2"
    assert len(emb_rows) == 2 * 129

    # monotone columns in the trace
    data = np.genfromtxt(trace, delimiter=",", names=True)
    assert np.all(np.diff(data["A"]) >= -1e-10 * data["A"][:-1])
    assert np.all(np.diff(data["V"]) <= 1e-10 * data["V"][:-1])


def test_cli_determinism(tmp_path):
    args = ["solve", "--n", "2", "--theta", "0.7853981634", "--p", "-0.5",
            "--phi", "cos2k:1,1,0.3", "--grid", "129"]
    outs = []
    for tag in ("a", "b"):
        out = tmp_path / f"{tag}.json"
        assert main(args + ["--out", str(out)]) == 0
        outs.append(out.read_text())
    assert outs[0] == outs[1]


def test_cli_functionals(tmp_path):
    out = tmp_path / "f.json"
    code = main(["functionals", "--n", "2", "--theta", "1.0471975512",
                 "--p", "0.5", "--grid", "129", "--out", str(out)])
    assert code == 0
    payload = json.loads(out.read_text())
    for key in ("A", "B", "Omega", "V", "cap_measure"):
        assert payload[key] > 0


def test_cli_embed_unit_cap(tmp_path):
    out = tmp_path / "cap.csv"
    code = main(["embed", "--n", "3", "--theta", "0.7853981634",
                 "--grid", "65", "--embed-out", str(out)])
    assert code == 0
    rows = np.genfromtxt(out, delimiter=",", names=True)
    assert set(rows.dtype.names) == {"x1", "x2", "x3"}


def test_cli_error_is_machine_readable(tmp_path, capsys):
    code = main(["minkowski", "--n", "2", "--theta", "1.0", "--phi",
                 "znpoly:1,0,-50", "--grid", "129"])
    assert code == 1
    err = capsys.readouterr().err
    payload = json.loads(err.strip().splitlines()[-1])
    assert payload["error"] == "PhiSpecError"


def test_cli_requires_theta():
    code = main(["minkowski", "--n", "2", "--phi", "const:1"])
    assert code == 1


def test_cli_body_round_trip(tmp_path):
    # bodies written by the solver reload identically through the JSON record
    from capminkowski import save_body
    d = make_domain(2, THETA, 129, "arc")
    from conftest import discrete_cap
    body = discrete_cap(d, 1.3)
    path = tmp_path / "b.json"
    save_body(body, path)
    again = load_body(path)
    assert np.array_equal(again.s.values, body.s.values)
