import json

from enriques_k3 import checks, cli, dynkin, quotient


def test_every_check_id_is_unique_and_covers_the_criteria():
    ids = [c.id for c in checks.CHECKS]
    assert len(set(ids)) == len(ids)
    assert sorted(c.criterion for c in checks.CHECKS) == list(range(1, 14))


def test_plane_scope_passes(capsys):
    assert cli.main(["verify", "--scope", "plane", "--format", "json"]) == 0
    rep = json.loads(capsys.readouterr().out)
    assert rep["summary"] == {"total": 2, "passed": 2, "failed": 0}


def test_reports_are_reproducible():
    a = cli.run_verification_suite("lattices").to_json()
    b = cli.run_verification_suite("lattices").to_json()
    assert a == b


def test_fault_injection_fails_with_witness(tmp_path):
    code = cli.main(["verify", "--scope", "lattices", "--inject-fault", "ns-gram", "--format", "json",
                     "--out", str(tmp_path)])
    assert code == 1
    rep = json.loads((tmp_path / "report-lattices.json").read_text())
    bad = [c for c in rep["checks"] if c["status"] == "fail"]
    assert [c["id"] for c in bad] == ["ns-lattice"]
    assert bad[0]["witness"]["rank"] == 24


def test_mii_scope_lists_the_special_hyperoval_check():
    ids = [c.id for c in checks.checks_for("mii")]
    assert "orthogonality-filters" in ids
    assert any(c.anchor == "special-hyperovals-count = 12" for c in checks.checks_for("mii"))


def test_unwritable_output_is_an_io_error(tmp_path):
    blocker = tmp_path / "file"
    blocker.write_text("x")
    assert cli.main(["verify", "--scope", "plane", "--out", str(blocker / "sub")]) == 2


def test_fib_audit(capsys):
    assert cli.main(["fib", "audit", "--config", "I6,I6,I6,I6", "--ambient", "k3"]) == 0
    assert json.loads(capsys.readouterr().out)["torsion_order_candidates"] == [18]
    assert cli.main(["fib", "audit", "--config", "I10,I10,I10"]) == 1


def test_pg4_enumerate(capsys):
    cli.main(["pg4", "enumerate", "--what", "hyperovals"])
    assert json.loads(capsys.readouterr().out)["count"] == 168
    cli.main(["pg4", "enumerate", "--what", "mii-special"])
    assert json.loads(capsys.readouterr().out)["count"] == 12


def test_model_build(capsys):
    cli.main(["model", "build", "--kind", "vii", "--format", "json"])
    assert len(json.loads(capsys.readouterr().out)["classes"]) == 20
    cli.main(["model", "build", "--kind", "mi", "--format", "dot"])
    assert capsys.readouterr().out.startswith("graph")


def test_vinberg_command(tmp_path, capsys):
    path = tmp_path / "vii.json"
    path.write_text(quotient.build_surface("vii").graph().to_json())
    assert cli.main(["vinberg", "check", "--graph", str(path), "--rank", "9"]) == 0
    assert json.loads(capsys.readouterr().out)["verdict"] is True
    path.write_text(dynkin.WeightedGraph(("a", "b"), (True, True), ((0, 3), (3, 0))).to_json())
    assert cli.main(["vinberg", "check", "--graph", str(path), "--rank", "1"]) == 1
