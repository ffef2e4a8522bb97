import json

import pytest

from conftest import FIXTURES
from exproof.cli import (
    EXIT_ERROR,
    EXIT_NOT_PROOF,
    EXIT_PROOF,
    RunConfig,
    detect_format,
    load_sequent,
    main,
    sequent_to_dot,
)
from exproof.core import ExproofError
from exproof.expansion import sequent_from_json


def fixture(name: str) -> str:
    return str(FIXTURES / name)


# --- format detection ---


def test_detect_format():
    assert detect_format("  (set .c1 (input :conclusion (p)))") == "verit"
    assert detect_format("fof(ax, axiom, p).") == "leancop"
    assert detect_format("cnf(1, plain, [p], clausify(ax)).") == "leancop"
    with pytest.raises(ExproofError):
        detect_format("hello world")


# --- check ---


def test_check_proof_exit_zero(capsys):
    assert main(["check", fixture("verit_transitivity.proof")]) == EXIT_PROOF
    out = json.loads(capsys.readouterr().out)
    assert out["is_proof"] is True


def test_check_not_proof_exit_one(capsys):
    assert main(["check", fixture("verit_not_proof.proof")]) == EXIT_NOT_PROOF
    out = json.loads(capsys.readouterr().out)
    assert out["is_proof"] is False
    assert out["counterexample"]


def test_check_malformed_exit_two(capsys):
    assert main(["check", fixture("malformed.proof")]) == EXIT_ERROR
    err = capsys.readouterr().err
    assert "line" in err


def test_check_leancop_fixtures(capsys):
    for name in ("leancop_simple.proof", "leancop_exists.proof", "leancop_skolem.proof"):
        assert main(["check", fixture(name)]) == EXIT_PROOF
        capsys.readouterr()


# --- show ---


def test_show_shallow_with_instances(capsys):
    assert main(["show", fixture("leancop_simple.proof")]) == EXIT_PROOF
    out = capsys.readouterr().out
    assert "![X]: p(X) ⊢ p(a)" in out
    assert "instances: X ∈ {a}" in out


def test_show_deep(capsys):
    assert main(["show", "--deep", fixture("leancop_simple.proof")]) == EXIT_PROOF
    assert capsys.readouterr().out.strip() == "p(a) ⊢ p(a)"


def test_show_empty_succedent_rendering(capsys):
    assert main(["show", "--deep", fixture("verit_propositional.proof")]) == EXIT_PROOF
    assert capsys.readouterr().out.strip().endswith("⊢")


def test_show_color_env(capsys, monkeypatch):
    monkeypatch.setenv("EXPROOF_COLOR", "1")
    main(["show", fixture("leancop_simple.proof")])
    assert "\x1b[" in capsys.readouterr().out
    monkeypatch.setenv("EXPROOF_COLOR", "0")
    main(["show", fixture("leancop_simple.proof")])
    assert "\x1b[" not in capsys.readouterr().out


# --- export ---


def test_export_json_roundtrip(tmp_path, capsys):
    out_path = tmp_path / "es.json"
    code = main(["export", "--json", "--out", str(out_path), fixture("leancop_skolem.proof")])
    assert code == EXIT_PROOF
    data = json.loads(out_path.read_text())
    cfg = RunConfig("export", (fixture("leancop_skolem.proof"),))
    es, _, _ = load_sequent(fixture("leancop_skolem.proof"), cfg)
    assert sequent_from_json(data) == es


def test_export_dot_drinker_shape(capsys):
    # the existential fixture has a weak node with out-degree 1; use the
    # skolem fixture for a richer graph and check edge labelling
    assert main(["export", "--dot", fixture("leancop_skolem.proof")]) == EXIT_PROOF
    dot = capsys.readouterr().out
    assert dot.startswith("digraph")
    assert 'label="a"' in dot  # weak instance term on the edge
    assert "eigen: v_sk1" in dot


def test_export_dot_propositional_has_no_quantifier_nodes(capsys):
    assert main(["export", "--dot", fixture("verit_propositional.proof")]) == EXIT_PROOF
    dot = capsys.readouterr().out
    assert "![" not in dot and "?[" not in dot


def test_export_unwritable_path(capsys, tmp_path):
    target = tmp_path / "missing_dir" / "out.json"
    code = main(["export", "--out", str(target), fixture("leancop_simple.proof")])
    assert code == EXIT_ERROR


def test_dot_weak_out_degree_two():
    # hand-built drinker: one weak node with two labelled edges
    from test_check import drinker_sequent

    dot = sequent_to_dot(drinker_sequent())
    weak_edges = [l for l in dot.splitlines() if "n0 -> " in l and "label=" in l]
    assert len(weak_edges) == 2


# --- batch ---


def test_batch_summary(tmp_path, capsys):
    import shutil

    bdir = tmp_path / "traces"
    bdir.mkdir()
    six = [
        "verit_transitivity.proof",
        "verit_congruence.proof",
        "leancop_simple.proof",
        "leancop_skolem.proof",
        "verit_not_proof.proof",
        "malformed.proof",
    ]
    for name in six:
        shutil.copy(FIXTURES / name, bdir / name)
    assert main(["batch", str(bdir)]) == EXIT_PROOF
    summary = json.loads(capsys.readouterr().out)
    assert summary["total"] == 6
    assert summary["imported"] == 5
    assert summary["proof"] == 4
    assert summary["not_proof"] == 1
    assert summary["errors"] == 1
    statuses = [e["status"] for e in summary["files"].values()]
    assert summary["proof"] == statuses.count("proof")
    assert summary["errors"] == sum(1 for s in statuses if s.startswith("error"))
    formats = {name: e["format"] for name, e in summary["files"].items()}
    assert formats["leancop_simple.proof"] == "leancop"
    assert formats["verit_transitivity.proof"] == "verit"
    assert all("seconds" in e for e in summary["files"].values())


def test_batch_empty_directory(tmp_path, capsys):
    empty = tmp_path / "none"
    empty.mkdir()
    assert main(["batch", str(empty)]) == EXIT_PROOF
    summary = json.loads(capsys.readouterr().out)
    assert summary["total"] == 0 and summary["imported"] == 0


def test_batch_parallel_matches_serial(tmp_path, capsys):
    import shutil

    bdir = tmp_path / "traces"
    bdir.mkdir()
    for name in ("verit_transitivity.proof", "leancop_simple.proof", "malformed.proof"):
        shutil.copy(FIXTURES / name, bdir / name)
    main(["batch", str(bdir)])
    serial = json.loads(capsys.readouterr().out)
    main(["batch", "--jobs", "4", str(bdir)])
    parallel = json.loads(capsys.readouterr().out)
    for key in ("imported", "proof", "not_proof", "errors", "total"):
        assert serial[key] == parallel[key]
