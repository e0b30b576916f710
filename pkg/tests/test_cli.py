import json

import pytest

from cli import build_parser, main
from utils.file_system import parse_csv, reemit_csv

LANDAU = ["--m", "1", "--e", "1", "--B", "1"]


class TestSpectrum:
    def test_critical_landau_rows(self, capsys):
        assert main(["spectrum", "--model", "landau-critical", *LANDAU, "--n-max", "0"]) == 0
        output = capsys.readouterr().out
        assert output.splitlines()[0] == "model,n1,n2,sigma_z,E_squared,E,E_nonrel,E_bar"
        frame = parse_csv(output)
        assert sorted(frame["E_squared"]) == [0, 2]
        assert set(frame["model"]) == {"landau_critical"}

    def test_missing_mass(self, capsys):
        assert main(["spectrum", "--model", "landau-nc", "--e", "1", "--B", "1"]) == 1
        captured = capsys.readouterr()
        assert captured.out == ""
        assert "--m" in captured.err

    def test_unknown_model(self, capsys):
        assert main(["spectrum", "--model", "hydrogen", *LANDAU]) == 1

    def test_bad_flag_is_a_usage_error(self, capsys):
        assert main(["spectrum", "--m", "heavy"]) == 1

    def test_ill_posed(self, capsys):
        assert main(["spectrum", "--model", "landau-nc", "--m", "1", "--e", "1", "--B", "2", "--theta", "-2"]) == 3

    def test_csv_round_trip(self, capsys):
        main(["spectrum", "--model", "landau-critical", "--m", "1", "--e", "1", "--B", "4", "--n-max", "2"])
        output = capsys.readouterr().out
        assert ",," in output
        assert reemit_csv(output) == output

    def test_json_output(self, capsys):
        assert main(["spectrum", "--model", "oscillator-nc", "--m", "1", "--e", "1", "--B", "0.5", "--omega", "0.3",
                     "--theta", "0.1", "--n1-max", "0", "--n2-max", "0", "--format", "json"]) == 0
        payload = json.loads(capsys.readouterr().out)
        assert payload["schema_version"] == 1
        assert len(payload["lines"]) == 2

    def test_output_file(self, tmp_path, capsys):
        out = tmp_path / "tables" / "spectrum.csv"
        assert main(["spectrum", "--model", "landau-nc", *LANDAU, "--out", str(out)]) == 0
        assert capsys.readouterr().out == ""
        assert out.read_text().startswith("model,n1,n2")


class TestConfigFile:
    def test_flags_override_file(self, tmp_path, capsys):
        config = tmp_path / "run.env"
        config.write_text("# critical Landau run\nm = 1\ne = 1\nB = 1\nmodel = landau-critical\nn_max = 0\n")
        assert main(["spectrum", "--config", str(config), "--B", "2"]) == 0
        frame = parse_csv(capsys.readouterr().out)
        assert sorted(frame["E_squared"]) == [-1, 3]

    def test_yaml_file(self, tmp_path, capsys):
        config = tmp_path / "run.yml"
        config.write_text("m: 1\ne: 1\nB: 1\nmodel: landau-critical\nn-max: 0\n")
        assert main(["spectrum", "--config", str(config)]) == 0
        assert sorted(parse_csv(capsys.readouterr().out)["E_squared"]) == [0, 2]

    def test_unknown_key(self, tmp_path, capsys):
        config = tmp_path / "run.env"
        config.write_text("mass = 1\n")
        assert main(["spectrum", "--config", str(config)]) == 1


class TestVerify:
    def test_landau_match(self, capsys):
        code = main(["verify", "--model", "landau-nc", *LANDAU, "--theta", "0.2", "--k", "6", "--schedule", "12,16"])
        payload = json.loads(capsys.readouterr().out)
        assert code == 0
        assert payload["schema_version"] == 1
        assert payload["matched_variant"] != "none"

    def test_ill_posed(self, capsys):
        assert main(["verify", "--model", "landau-nc", "--m", "1", "--e", "1", "--B", "2", "--theta", "-2"]) == 3

    def test_vanishing_deformed_mass(self, capsys):
        assert main(["verify", "--model", "landau-nc", "--m", "1", "--e", "1", "--B", "2", "--theta", "-1"]) == 3
        assert "m_tilde" in capsys.readouterr().err

    def test_verify_json_default_leaves_spectrum_on_csv(self, capsys):
        parser = build_parser()
        assert parser.parse_args(["verify"]).format == "json"
        assert parser.parse_args(["spectrum"]).format == "csv"
        assert parser.parse_args(["scan"]).format == "csv"

    def test_zero_levels(self, capsys):
        assert main(["verify", "--model", "landau-nc", *LANDAU, "--k", "0"]) == 1


class TestScan:
    def test_theta_grid(self, capsys):
        assert main(["scan", "--model", "landau-nc", *LANDAU, "--param", "theta", "--from", "0", "--to", "0.2",
                     "--steps", "3"]) == 0
        output = capsys.readouterr().out
        assert output.splitlines()[0] == "param_value,well_posed,E_squared_0_0_+1,E_squared_0_0_-1,splitting"
        frame = parse_csv(output)
        assert frame["param_value"].tolist() == pytest.approx([0, 0.1, 0.2])
        assert reemit_csv(output) == output

    def test_ill_posed_row(self, capsys):
        assert main(["scan", "--model", "landau-nc", *LANDAU, "--param", "theta", "--from", "-4", "--to", "0",
                     "--steps", "2"]) == 0
        rows = capsys.readouterr().out.splitlines()[1:]
        assert rows[0].split(",")[1:] == ["false", "", "", ""]
        assert rows[1].split(",")[1] == "true"

    def test_single_step(self, capsys):
        assert main(["scan", "--model", "landau-nc", *LANDAU, "--param", "theta", "--from", "0.1", "--to", "0.2",
                     "--steps", "1"]) == 0
        assert len(capsys.readouterr().out.splitlines()) == 2

    def test_missing_grid(self, capsys):
        assert main(["scan", "--model", "landau-nc", *LANDAU, "--param", "theta"]) == 1


class TestCritical:
    def test_landau(self, capsys):
        assert main(["critical", "--model", "landau", "--m", "1", "--e", "1", "--B", "4"]) == 0
        frame = parse_csv(capsys.readouterr().out)
        assert frame["closed_form"][0] == pytest.approx(-1)
        assert frame["bisection"][0] == pytest.approx(-1)

    def test_oscillator(self, capsys):
        assert main(["critical", "--model", "oscillator", "--m", "1", "--e", "1", "--omega", "1", "--theta", "-0.2"]) == 0
        assert parse_csv(capsys.readouterr().out)["closed_form"][0] == pytest.approx(0.1)

    def test_no_field(self, capsys):
        assert main(["critical", "--model", "landau", "--m", "1", "--e", "1", "--B", "0"]) == 2


class TestFockCheck:
    def test_interior_passes(self, capsys):
        assert main(["fock-check", "--cutoff", "24", "--theta", "0.2"]) == 0
        frame = parse_csv(capsys.readouterr().out)
        assert frame["passed"].all()

    def test_truncation_corner(self, capsys):
        assert main(["fock-check", "--cutoff", "3", "--margin", "0"]) == 2
        captured = capsys.readouterr()
        frame = parse_csv(captured.out)
        assert frame.set_index("check").loc["[a,a+]=I", "residual"] == pytest.approx(3)
        assert "ncspectra: note: margin 0 keeps the truncation corner" in captured.err

    def test_explicit_zero_field_is_rejected(self, capsys):
        assert main(["fock-check", "--cutoff", "10", "--theta", "0.2", "--B", "0"]) == 1
        assert "eB_tilde > 0" in capsys.readouterr().err

    def test_field_adds_landau_checks(self, capsys):
        assert main(["fock-check", "--cutoff", "12", "--theta", "0.2", "--B", "1"]) == 0
        frame = parse_csv(capsys.readouterr().out)
        assert "landau [a,b+]=0" in set(frame["check"])
