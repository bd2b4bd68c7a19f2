import numpy as np
import pytest

from qbrownian import cli


def run_cli(args):
    return cli.main(list(args))


def read(path):
    return path.read_bytes()


def test_params_report(capsys):
    assert run_cli(["params"]) == 0
    out = capsys.readouterr().out
    assert "D = 1" in out
    assert "lambda_T = 0.5" in out
    assert "classical regime" not in out
    assert run_cli(["params", "--hbar", "0"]) == 0
    assert "classical regime" in capsys.readouterr().out


def test_unknown_key_is_rejected(capsys):
    assert run_cli(["params", "--mass", "2"]) == 2
    assert "unknown key" in capsys.readouterr().err


def test_missing_config_file(capsys):
    assert run_cli(["dispersion", "--config", "/no/such/file.ini"]) == 2


def test_config_file_and_override_precedence(tmp_path, capsys):
    cfg = tmp_path / "run.ini"
    cfg.write_text("[dispersion]\nt0 = 0.5\nsamples = 4\nlaws = classical\n")
    out = tmp_path / "d.csv"
    assert run_cli(["dispersion", "--config", str(cfg), "--t1", "0.8",
                    "--out_csv", str(out)]) == 0
    text = out.read_text()
    assert "# t0=0.5" in text       # from file
    assert "# t1=0.80000000000000004" in text  # flag override
    assert "# samples=4" in text
    rows = [l for l in text.splitlines() if not l.startswith("#")]
    assert rows[0] == "t,sigma2_classical"
    assert len(rows) == 5


def test_config_file_unknown_key(tmp_path, capsys):
    cfg = tmp_path / "run.ini"
    cfg.write_text("[dispersion]\nwrong = 1\n")
    assert run_cli(["dispersion", "--config", str(cfg)]) == 2


def test_semiclassical_below_validity_exits_2(tmp_path, capsys):
    assert run_cli(["dispersion", "--laws", "semiclassical", "--t0", "0",
                    "--out_csv", str(tmp_path / "d.csv")]) == 2
    assert "applicable for large times" in capsys.readouterr().err


def test_dispersion_csv_and_svg(tmp_path):
    out = tmp_path / "d.csv"
    svg = tmp_path / "d.svg"
    assert run_cli(["dispersion", "--t0", "0.2", "--t1", "1.2", "--samples", "6",
                    "--out_csv", str(out), "--out_svg", str(svg)]) == 0
    header = [l for l in out.read_text().splitlines() if l.startswith("#")]
    keys = {l[2:].split("=")[0] for l in header if "=" in l}
    assert {"m", "b", "kT", "hbar", "laws", "t0", "t1", "samples"} <= keys
    svg_text = svg.read_text()
    assert 'viewBox="0 0 800 600"' in svg_text
    assert "polyline" in svg_text
    assert "stroke-dasharray" in svg_text


def test_automodel_csv(tmp_path):
    out = tmp_path / "a.csv"
    assert run_cli(["automodel", "--out_csv", str(out)]) == 0
    text = out.read_text()
    assert "# c2=" in text
    rows = [l for l in text.splitlines() if not l.startswith("#")]
    assert rows[0] == "x,y,yprime,residual"
    last = [float(v) for v in rows[-1].split(",")]
    assert abs(last[2] - 2.0) < 1e-3  # terminal slope


def test_smoluchowski_csv(tmp_path):
    out = tmp_path / "s.csv"
    assert run_cli(["smoluchowski", "--t1", "0.05", "--output_every", "20",
                    "--comparison", "classical", "--out_csv", str(out)]) == 0
    rows = [l for l in out.read_text().splitlines() if not l.startswith("#")]
    assert rows[0] == "t,sigma2,mass,excess_kurtosis,sigma2_classical"
    data = np.array([[float(v) for v in r.split(",")] for r in rows[1:]])
    np.testing.assert_allclose(data[:, 2], 1.0, atol=1e-10)


def test_smoluchowski_bad_comparison(tmp_path, capsys):
    assert run_cli(["smoluchowski", "--comparison", "einstein",
                    "--out_csv", str(tmp_path / "s.csv")]) == 2


def test_kramers_csv(tmp_path):
    out = tmp_path / "k.csv"
    assert run_cli(["kramers", "--nx", "48", "--np", "48", "--x_min", "-12",
                    "--x_max", "12", "--sigma2_p0", "1.0", "--t1", "0.2",
                    "--output_every", "50", "--out_csv", str(out)]) == 0
    rows = [l for l in out.read_text().splitlines() if not l.startswith("#")]
    assert rows[0] == "t,sigma2_x,sigma2_p,mass"


def test_kramers_bad_variant_exits_2(tmp_path, capsys):
    assert run_cli(["kramers", "--variant", "nope",
                    "--out_csv", str(tmp_path / "k.csv")]) == 2


def test_unknown_command_exits_2():
    with pytest.raises(SystemExit) as exc:
        run_cli(["teleport"])
    assert exc.value.code == 2
