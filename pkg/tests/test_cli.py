import json

import pytest

from app.cli import cmd_check
from app.main import create_parser, main
from app.models.enums import Verdict
from app.models.schemas import CheckReport
from app.services import grid_service


def run_json(capsys, *argv):
    code = main(list(argv))
    out = capsys.readouterr().out
    return code, (json.loads(out) if out.strip() else None)


# =========================
# check
# =========================

def test_check_prints_witness(capsys):
    code, doc = run_json(capsys, "check", "Z6", "--property", "prime")
    assert code == 0
    assert doc["value"] is False
    assert doc["witness"]["pair"] == [2, 3]
    assert doc["ideal"]["size"] == 1


def test_check_expect_mismatch_exits_one(capsys):
    code, _ = run_json(capsys, "check", "Z6", "--property", "prime", "--expect", "true")
    assert code == 1
    code, _ = run_json(capsys, "check", "Z5", "--property", "prime", "--expect", "true")
    assert code == 0


def test_check_with_ideal_and_oracle(capsys):
    code, doc = run_json(capsys, "check", "Z4", "--property", "essential", "--ideal", "2", "--oracle")
    assert code == 0
    assert doc["value"] is True
    assert doc["oracle"] is True


def test_parse_error_exits_two(capsys):
    assert main(["check", "Z1", "--property", "prime"]) == 2
    assert "modulus must be" in capsys.readouterr().err


def test_cap_exceeded_exits_three(capsys):
    assert main(["check", "Z2[C2 x C2 x C2 x C2 x C2]", "--property", "nilary"]) == 3


def test_unknown_property_is_usage_error(capsys):
    assert main(["check", "Z4", "--property", "artinian"]) == 2


def test_missing_subcommand_is_usage_error(capsys):
    assert main([]) == 2


def test_unknown_label_is_usage_error(capsys):
    assert main(["check", "Z4", "--property", "prime", "--ideal", "9"]) == 2


def test_out_file(tmp_path, capsys):
    out = tmp_path / "res" / "z4.json"
    assert main(["check", "Z4", "--property", "nilary", "--out", str(out)]) == 0
    assert capsys.readouterr().out == ""
    assert json.loads(out.read_text(encoding="utf-8"))["value"] is True


def test_check_cache_reuses_result(tmp_path, capsys, monkeypatch):
    argv = ["check", "Z3[C6]", "--property", "nilary", "--cache", str(tmp_path)]
    code, first = run_json(capsys, *argv)
    assert code == 0
    assert list(tmp_path.rglob("*.json"))

    def boom(*args, **kwargs):
        raise AssertionError("cache should have answered")

    monkeypatch.setattr(cmd_check, "evaluate_property", boom)
    code, second = run_json(capsys, *argv)
    assert code == 0
    assert second == first


def test_timing_adds_runtime(capsys):
    _, doc = run_json(capsys, "check", "Z4", "--property", "prime", "--timing")
    assert "runtime_ms" in doc
    _, doc = run_json(capsys, "check", "Z4", "--property", "prime")
    assert "runtime_ms" not in doc


# =========================
# verify
# =========================

def test_verify_instances(capsys):
    code, doc = run_json(capsys, "verify", "L1.8,C2.2", "--instance", "Z2[C2]", "--instance", "Z3[C2]")
    assert code == 0
    assert doc["summary"]["total"] == 4
    assert doc["summary"]["refuted"] == 0


def test_verify_final_theorem_grid(grids_dir, capsys):
    code, doc = run_json(capsys, "verify", "--grid", str(grids_dir / "final_theorem.grid"))
    assert code == 0
    assert doc["summary"]["confirmed"] == 6


def test_verify_undecided_exits_three(capsys):
    code, doc = run_json(capsys, "verify", "L1.8", "--instance", "Z2[C2 x C2 x C2 x C2 x C2]")
    assert code == 3
    assert doc["reports"][0]["verdict"] == "undecided-cap"


def test_verify_refutation_exits_one(capsys, monkeypatch):
    def fake(check_id, expr, settings=None, timing=False):
        return CheckReport(id=check_id, instance=expr, verdict=Verdict.refuted, witness={"fake": True})

    monkeypatch.setattr(grid_service, "run_check", fake)
    code, doc = run_json(capsys, "verify", "L1.8", "--instance", "Z2[C2]")
    assert code == 1
    assert doc["aborted"] is True


def test_verify_unknown_check_exits_two(capsys):
    assert main(["verify", "L0", "--instance", "Z2[C2]"]) == 2


def test_verify_bad_instance_exits_two(capsys):
    assert main(["verify", "L1.8", "--instance", "Z2[C2"]) == 2


def test_verify_with_subgroup(capsys):
    code, doc = run_json(capsys, "verify", "L-DGH-nilp", "--instance", "Z2[S3]", "--subgroup", "(1 2 3)")
    assert code == 0
    assert len(doc["reports"][0]["cases"]) == 1


def test_verify_table_goes_to_stderr(capsys):
    assert main(["verify", "L1.8", "--instance", "Z2[C2]", "--table"]) == 0
    captured = capsys.readouterr()
    assert "L1.8" in captured.err
    assert json.loads(captured.out)["summary"]["confirmed"] == 1


def test_verify_grid_cache(tmp_path, grids_dir, capsys):
    argv = ["verify", "--grid", str(grids_dir / "final_theorem.grid"), "--cache", str(tmp_path)]
    _, first = run_json(capsys, *argv)
    _, second = run_json(capsys, *argv)
    assert first == second
    assert len(list(tmp_path.rglob("*.json"))) == 1


# =========================
# search / info / registry
# =========================

def test_search_question1(grids_dir, capsys):
    code, doc = run_json(capsys, "search", "question1", "--grid", str(grids_dir / "question2.grid"))
    assert code == 0
    assert doc["status"] == "vacuous"


def test_search_conjecture1(grids_dir, capsys):
    code, doc = run_json(capsys, "search", "conjecture1", "--grid", str(grids_dir / "conjecture.grid"))
    assert code == 0
    assert doc["target"] == "conjecture1"
    assert doc["status"] == "none-found"
    assert "witness" not in doc
    assert doc["instances"] == [
        {"instance": "Z3[S3]", "hypothesis": True, "conclusion": True, "status": "consistent"},
    ]


def test_info(capsys):
    code, doc = run_json(capsys, "info", "Z4")
    assert code == 0
    assert doc["units"] == 2
    assert doc["prime_radical"]["size"] == 2


def test_info_dump(capsys):
    code, doc = run_json(capsys, "info", "Z3", "--dump")
    assert code == 0
    assert doc["tables"]["add"][1] == [1, 2, 0]


def test_registry(capsys):
    code, doc = run_json(capsys, "registry")
    assert code == 0
    assert len(doc) == 35
    assert {"id", "statement", "anchor", "mode"} <= set(doc[0])


def test_parser_lists_all_commands():
    parser = create_parser()
    with pytest.raises(SystemExit):
        parser.parse_args(["--version"])
