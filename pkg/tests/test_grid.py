import time

import pytest
from pydantic import ValidationError

from app.core.errors import UnknownCheckError
from app.models.enums import SearchTarget, Verdict
from app.models.schemas import CheckReport, GridSpec
from app.services import grid_service
from app.services.grid_service import (
    load_grid,
    resolve_ids,
    run_grid,
    search_counterexample,
    summary_table,
)
from app.services.theorem_service import REGISTRY


def test_small_grid_for_delta_nilpotence():
    grid = GridSpec(exprs=["Z2[C2]", "Z3[C2]", "Z4"])
    result = run_grid(["L1.8"], grid)
    assert [r.verdict for r in result.reports] == [Verdict.confirmed, Verdict.confirmed, Verdict.vacuous]
    assert result.summary.total == 3
    assert result.summary.confirmed == 2
    assert result.summary.vacuous == 1
    assert result.per_check["L1.8"]["confirmed"] == 2
    assert not result.aborted


def test_reports_follow_instance_then_check_order():
    grid = GridSpec(exprs=["Z2[C3]", "Z2[C2]"])
    result = run_grid(["C2.2", "L1.8"], grid)
    assert [(r.instance, r.id) for r in result.reports] == [
        ("Z2[C3]", "C2.2"), ("Z2[C3]", "L1.8"), ("Z2[C2]", "C2.2"), ("Z2[C2]", "L1.8"),
    ]


def test_empty_grid():
    result = run_grid(["L1.8"], GridSpec(exprs=[]))
    assert result.reports == []
    assert result.summary.total == 0
    assert summary_table(result) == "(empty grid)"


def test_summary_table_lists_checks():
    result = run_grid(["L1.8", "C2.2"], GridSpec(exprs=["Z2[C2]"]))
    text = summary_table(result)
    assert "L1.8" in text and "C2.2" in text
    assert "confirmed" in text


def test_final_theorem_grid(grids_dir):
    grid = load_grid(grids_dir / "final_theorem.grid")
    result = run_grid([], grid)
    assert {r.id for r in result.reports} == {"T-equiv"}
    assert result.summary.total == 6
    assert result.summary.confirmed == 6


def test_grid_caps_apply(settings):
    grid = GridSpec(exprs=["Z2[C2 x C2]"], caps={"max_ring_size": 10})
    result = run_grid(["L1.8"], grid, settings)
    assert result.reports[0].verdict == Verdict.undecided_cap
    assert result.summary.undecided == 1


def test_refutation_aborts_unless_keep_going(monkeypatch):
    def fake(check_id, expr, settings=None, timing=False):
        verdict = Verdict.refuted if expr == "Z2[C2]" else Verdict.confirmed
        witness = {"fake": True} if verdict == Verdict.refuted else None
        return CheckReport(id=check_id, instance=expr, verdict=verdict, witness=witness)

    monkeypatch.setattr(grid_service, "run_check", fake)
    grid = GridSpec(exprs=["Z2[C2]", "Z3[C2]"])

    stopped = run_grid(["L1.8"], grid)
    assert stopped.aborted
    assert len(stopped.reports) == 1

    full = run_grid(["L1.8"], grid, keep_going=True)
    assert not full.aborted
    assert full.summary.refuted == 1
    assert full.summary.confirmed == 1


def test_parallel_matches_sequential():
    grid = GridSpec(exprs=["Z2[C2]", "Z3[C2]", "Z2[C3]"])
    seq = run_grid(["L1.8", "C2.4"], grid, jobs=1)
    par = run_grid(["L1.8", "C2.4"], grid, jobs=2)
    assert [(r.instance, r.id, r.verdict) for r in par.reports] == [
        (r.instance, r.id, r.verdict) for r in seq.reports
    ]


def test_instance_timeout_gives_undecided():
    grid = GridSpec(exprs=["Z3[S3]"], caps={"timeout_per_instance_s": 0.05})
    started = time.monotonic()
    result = run_grid(["all"], grid, jobs=1)
    elapsed = time.monotonic() - started
    assert result.summary.undecided == len(REGISTRY)
    assert result.summary.confirmed == 0
    assert all(r.notes == ["timeout after 0.05s"] for r in result.reports)
    assert not result.aborted
    # 超時的 worker 會被結束，不必等它跑完
    assert elapsed < 5


def test_timeout_only_cuts_slow_instances():
    grid = GridSpec(exprs=["Z2[C2]", "Z3[C2]"], caps={"timeout_per_instance_s": 30})
    result = run_grid(["L1.8"], grid, jobs=2)
    assert [r.verdict for r in result.reports] == [Verdict.confirmed, Verdict.confirmed]


def test_resolve_ids():
    grid = GridSpec(exprs=["Z2"], checks=["C2.2"])
    assert resolve_ids([], grid) == ["C2.2"]
    assert resolve_ids(["all"], grid) == list(REGISTRY)
    assert resolve_ids([], GridSpec(exprs=[])) == list(REGISTRY)
    with pytest.raises(UnknownCheckError):
        resolve_ids(["L0"], grid)


def test_grid_rejects_bad_expression():
    with pytest.raises(ValidationError):
        GridSpec(exprs=["Z2[C2"])
    with pytest.raises(ValidationError):
        GridSpec(exprs=["Z2"], caps={"max_ring_size": 0})


# =========================
# Search
# =========================

def test_question1_is_vacuous(grids_dir):
    result = search_counterexample(SearchTarget.question1, load_grid(grids_dir / "question2.grid"))
    assert result.status == "vacuous"
    assert result.instances == []


def test_question2_finds_nothing(grids_dir):
    result = search_counterexample(SearchTarget.question2, load_grid(grids_dir / "question2.grid"))
    assert result.status == "none-found"
    by_instance = {r.instance: r for r in result.instances}
    assert by_instance["Z2[S3]"].status == "vacuous"
    assert by_instance["Z2[C2]"].status == "consistent"
    assert by_instance["Z4[D4]"].status == "undecided-cap"
    assert result.note.startswith("hypothesis held on")


def test_search_skips_plain_rings():
    result = search_counterexample(SearchTarget.question2, GridSpec(exprs=["Z4", "Z2[C1]"]))
    assert [r.status for r in result.instances] == ["not-applicable", "not-applicable"]
    assert result.status == "none-found"


def test_conjecture1_on_z3_s3(grids_dir):
    result = search_counterexample(SearchTarget.conjecture1, load_grid(grids_dir / "conjecture.grid"))
    assert result.status == "none-found"
    assert result.witness is None
    [record] = result.instances
    assert record.instance == "Z3[S3]"
    assert record.hypothesis is True
    assert record.conclusion is True
    assert record.status == "consistent"
    assert result.note == "hypothesis held on 1 of 1 instances"
