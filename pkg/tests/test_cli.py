import json

from fluxlab import cli


def run(args):
    return cli.main(args)


class TestRun:
    def test_single_check_pass(self, tmp_path):
        code = run(["run", "--model", "maxwell", "--mesh", "interval",
                    "--mesh-parameter", "8", "--suite", "flow_residual",
                    "--out", str(tmp_path), "--seed", "5"])
        assert code == cli.EXIT_OK
        rep = json.loads((tmp_path / "flow_residual.json").read_text())
        assert rep["passed"] and rep["residuals"]["flow_residual"] <= 1e-12
        assert rep["operation"].startswith("phasespace")

    def test_empty_suite_ok_no_files(self, tmp_path):
        out = tmp_path / "empty"
        code = run(["run", "--model", "maxwell", "--suite", "--out", str(out)])
        assert code == cli.EXIT_OK
        assert not out.exists() or not list(out.iterdir())

    def test_unknown_model_exit_2(self, tmp_path):
        assert run(["run", "--model", "qcd5", "--suite", "flow_residual",
                    "--out", str(tmp_path)]) == cli.EXIT_CONFIG

    def test_unknown_check_exit_3(self, tmp_path):
        assert run(["run", "--model", "maxwell", "--suite", "bogus",
                    "--out", str(tmp_path)]) == cli.EXIT_UNKNOWN_CHECK

    def test_unwritable_output_exit_4(self):
        assert run(["run", "--model", "maxwell", "--suite", "flow_residual",
                    "--out", "/proc/definitely/not/writable"]) == cli.EXIT_OUTPUT

    def test_incompatible_check_reports_failure(self, tmp_path):
        # hodge_split on a connection-only model: recorded as a failed report
        code = run(["run", "--model", "chern_simons_disk", "--mesh", "disk",
                    "--mesh-parameter", "1", "--suite", "hodge_split",
                    "--out", str(tmp_path)])
        assert code == cli.EXIT_CHECK_FAILED
        rep = json.loads((tmp_path / "hodge_split.json").read_text())
        assert not rep["passed"] and "error" in rep

    def test_parallel_jobs_same_reports(self, tmp_path):
        a, b = tmp_path / "a", tmp_path / "b"
        suite = ["decomposition", "flow_residual", "central_extension"]
        run(["run", "--model", "maxwell", "--mesh", "disk", "--mesh-parameter", "1",
             "--suite", *suite, "--out", str(a), "--seed", "3", "--jobs", "1"])
        run(["run", "--model", "maxwell", "--mesh", "disk", "--mesh-parameter", "1",
             "--suite", *suite, "--out", str(b), "--seed", "3", "--jobs", "3"])
        for name in suite:
            assert (a / f"{name}.json").read_bytes() == (b / f"{name}.json").read_bytes()


class TestDeterminism:
    def test_byte_identical_reports(self, tmp_path):
        a, b = tmp_path / "a", tmp_path / "b"
        args = ["run", "--model", "ym_su2", "--mesh", "interval", "--mesh-parameter", "4",
                "--suite", "decomposition", "superselection_square", "--seed", "77"]
        assert run(args + ["--out", str(a)]) == cli.EXIT_OK
        assert run(args + ["--out", str(b)]) == cli.EXIT_OK
        for name in ("decomposition", "superselection_square"):
            assert (a / f"{name}.json").read_bytes() == (b / f"{name}.json").read_bytes()

    def test_census_deterministic(self, tmp_path):
        a, b = tmp_path / "a", tmp_path / "b"
        for out in (a, b):
            assert run(["census", "--model", "maxwell", "--mesh", "disk",
                        "--mesh-parameter", "1", "--samples", "10",
                        "--seed", "11", "--out", str(out)]) == cli.EXIT_OK
        assert (a / "census.json").read_bytes() == (b / "census.json").read_bytes()


class TestConfigFiles:
    def test_toml(self, tmp_path):
        cfgfile = tmp_path / "exp.toml"
        cfgfile.write_text(
            '[model]\nname = "maxwell"\nmesh = "interval"\nmesh_parameter = 6\n'
            '[run]\nseed = 9\nsuite = ["decomposition"]\n'
            f'output = "{tmp_path}/out"\n'
            '[tolerances]\ndecomposition = 1e-12\n'
        )
        assert run(["run", "--config", str(cfgfile)]) == cli.EXIT_OK
        rep = json.loads((tmp_path / "out" / "decomposition.json").read_text())
        assert rep["tolerance"] == 1e-12  # override applied

    def test_json(self, tmp_path):
        cfgfile = tmp_path / "exp.json"
        cfgfile.write_text(json.dumps({
            "model": {"name": "maxwell", "mesh": "disk", "mesh_parameter": 1},
            "run": {"seed": 2, "suite": ["flow_residual"], "output": str(tmp_path / "o")},
        }))
        assert run(["run", "--config", str(cfgfile)]) == cli.EXIT_OK

    def test_bad_config(self, tmp_path):
        cfgfile = tmp_path / "bad.toml"
        cfgfile.write_text('[model]\nname = "nope"\n')
        assert run(["run", "--config", str(cfgfile)]) == cli.EXIT_CONFIG


class TestConvergence:
    def test_cme_slope_two(self, tmp_path):
        assert run(["convergence", "--target", "cme_loop_su2",
                    "--sequence", "8", "16", "32", "--out", str(tmp_path)]) == cli.EXIT_OK
        rows = (tmp_path / "convergence_cme_loop_su2.csv").read_text().strip().splitlines()
        slope = float(rows[-1].split(",")[1])
        assert abs(slope - 2.0) <= 0.3

    def test_exact_identity_flat(self, tmp_path):
        assert run(["convergence", "--target", "green_identity", "--mesh", "disk",
                    "--algebra", "su2", "--sequence", "1", "2", "3",
                    "--out", str(tmp_path)]) == cli.EXIT_OK
        rows = (tmp_path / "convergence_green_identity.csv").read_text().strip().splitlines()
        assert rows[-1].split(",")[1] == "exact"

    def test_short_sequence_rejected(self, tmp_path):
        assert run(["convergence", "--target", "cme_loop_su2", "--sequence", "8", "16",
                    "--out", str(tmp_path)]) == cli.EXIT_CONFIG

    def test_unknown_target(self, tmp_path):
        assert run(["convergence", "--target", "warp", "--out", str(tmp_path)]) \
            == cli.EXIT_UNKNOWN_CHECK


class TestCensus:
    def test_cs_disk_single_sector(self, tmp_path):
        assert run(["census", "--model", "chern_simons_disk", "--mesh", "disk",
                    "--mesh-parameter", "2", "--samples", "12",
                    "--out", str(tmp_path)]) == cli.EXIT_OK
        data = json.loads((tmp_path / "census.json").read_text())
        assert data["distinct_labels"] == 1

    def test_abelian_net_flux_reported(self, tmp_path):
        assert run(["census", "--model", "maxwell", "--mesh", "disk",
                    "--mesh-parameter", "1", "--samples", "10",
                    "--out", str(tmp_path)]) == cli.EXIT_OK
        data = json.loads((tmp_path / "census.json").read_text())
        assert data["net_flux_residual"] <= 1e-10


class TestHodgeReport:
    def test_report_written(self, tmp_path):
        assert run(["hodge-report", "--model", "ym_su2", "--mesh", "disk",
                    "--mesh-parameter", "1", "--out", str(tmp_path)]) == cli.EXIT_OK
        data = json.loads((tmp_path / "hodge_report.json").read_text())
        assert data["decomposition"]["neumann_dims_sum"] == data["decomposition"]["n_edge_dofs"]
        assert "condition" in data["faddeev_popov"]["dirichlet"]
