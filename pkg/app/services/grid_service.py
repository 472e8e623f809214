from concurrent.futures import FIRST_COMPLETED, Future, ProcessPoolExecutor, wait
from pathlib import Path
from typing import Dict, Iterable, List, Optional, Tuple
import json
import logging
import math
import time

import pandas as pd
from sympy import isprime

from app.core.config import Settings, get_settings
from app.core.errors import CapExceededError, UnknownCheckError
from app.dsl.parser import canonical
from app.models.enums import IdealProperty, SearchTarget, Verdict
from app.models.schemas import (
    CheckReport,
    GridResult,
    GridSpec,
    GridSummary,
    SearchRecord,
    SearchResult,
)
from app.rings.finite_ring import ZModRing
from app.services.ideal_service import check_ideal_property, is_nilpotent_integer
from app.services.theorem_service import REGISTRY, get_instance, run_check

logger = logging.getLogger(__name__)

VERDICT_COLUMNS = [v.value for v in Verdict]


# =========================
# Grid files
# =========================

def load_grid(path: str | Path) -> GridSpec:
    """讀取 grid 檔（JSON），交給 GridSpec 驗證。"""
    text = Path(path).read_text(encoding="utf-8")
    return GridSpec.model_validate(json.loads(text))


def grid_settings(grid: GridSpec, settings: Optional[Settings] = None) -> Settings:
    cfg = settings or get_settings()
    overrides = grid.caps.overrides()
    return cfg.model_copy(update=overrides) if overrides else cfg


def resolve_ids(ids: Iterable[str], grid: GridSpec) -> List[str]:
    wanted = [i for i in ids if i] or list(grid.checks) or list(REGISTRY)
    if len(wanted) == 1 and wanted[0] == "all":
        wanted = list(REGISTRY)
    for check_id in wanted:
        if check_id not in REGISTRY:
            raise UnknownCheckError(f"unknown check id: {check_id!r}")
    return wanted


# =========================
# Execution
# =========================

def _run_instance(expr: str, ids: List[str], settings: Settings, timing: bool) -> List[CheckReport]:
    # 同一實例的檢查在同一個 worker 裡跑，共用已算好的事實
    return [run_check(check_id, expr, settings=settings, timing=timing) for check_id in ids]


def _undecided(expr: str, ids: List[str], note: str) -> List[CheckReport]:
    return [
        CheckReport(id=check_id, instance=expr, verdict=Verdict.undecided_cap, notes=[note])
        for check_id in ids
    ]


def _has_refutation(batch: List[CheckReport]) -> bool:
    return any(r.verdict == Verdict.refuted for r in batch)


def _terminate(pool: ProcessPoolExecutor) -> None:
    # 超時的 worker 無法單獨取消，整個 pool 的 process 一起結束
    procs = list((getattr(pool, "_processes", None) or {}).values())
    pool.shutdown(wait=False, cancel_futures=True)
    for proc in procs:
        if proc.is_alive():
            proc.terminate()
    for proc in procs:
        proc.join(timeout=1)


def _run_pooled(
    exprs: List[str],
    ids: List[str],
    cfg: Settings,
    jobs: int,
    keep_going: bool,
    timing: bool,
) -> Tuple[Dict[int, List[CheckReport]], Optional[int]]:
    """
    以 process pool 執行實例，回傳 (index → 報告, 第一個 REFUTED 的 index)。

    同時最多只送出 jobs 個實例，每個實例的 deadline 從送出時起算。
    任何實例超時，就結束整個 pool：超時者記為 undecided-cap，
    其餘還在跑的實例放回佇列，交給新的 pool 重跑。
    """
    timeout = cfg.timeout_per_instance_s
    batches: Dict[int, List[CheckReport]] = {}
    queue = list(range(len(exprs)))
    stop_at: Optional[int] = None

    while queue:
        pool = ProcessPoolExecutor(max_workers=jobs)
        running: Dict[Future, Tuple[int, float]] = {}
        expired = False
        try:
            while True:
                if stop_at is not None:
                    queue = [i for i in queue if i < stop_at]
                while queue and len(running) < jobs:
                    idx = queue.pop(0)
                    deadline = time.monotonic() + timeout if timeout else math.inf
                    running[pool.submit(_run_instance, exprs[idx], ids, cfg, timing)] = (idx, deadline)
                if not running:
                    break

                nearest = min(deadline for _, deadline in running.values())
                wait_s = None if nearest == math.inf else max(0.0, nearest - time.monotonic())
                done, _ = wait(list(running), timeout=wait_s, return_when=FIRST_COMPLETED)
                for fut in done:
                    idx, _ = running.pop(fut)
                    batches[idx] = fut.result()
                    if not keep_going and _has_refutation(batches[idx]) and (stop_at is None or idx < stop_at):
                        stop_at = idx

                now = time.monotonic()
                late = [fut for fut, (_, deadline) in running.items() if deadline <= now]
                if late:
                    for fut in late:
                        idx, _ = running.pop(fut)
                        logger.warning("Instance %s timed out after %ss", exprs[idx], timeout)
                        batches[idx] = _undecided(exprs[idx], ids, f"timeout after {timeout}s")
                    queue = sorted([idx for idx, _ in running.values()] + queue)
                    running.clear()
                    expired = True
                    break
        finally:
            if expired:
                _terminate(pool)
            else:
                pool.shutdown(wait=True)

    return batches, stop_at


def run_grid(
    ids: Iterable[str],
    grid: GridSpec,
    settings: Optional[Settings] = None,
    jobs: Optional[int] = None,
    keep_going: bool = False,
    timing: bool = False,
) -> GridResult:
    """
    實例 × 檢查 的完整交叉；報告依 grid 中實例順序、再依檢查順序排列。

    設了 timeout_per_instance_s 時，即使 jobs=1 也經由 worker pool 執行，
    超時的實例才能真的被中止。
    """
    cfg = grid_settings(grid, settings)
    wanted = resolve_ids(ids, grid)
    exprs = [canonical(e) for e in grid.exprs]
    jobs = max(1, jobs or cfg.jobs)
    logger.info(
        "Running %d checks on %d instances (jobs=%d, timeout=%s)",
        len(wanted), len(exprs), jobs, cfg.timeout_per_instance_s,
    )

    reports: List[CheckReport] = []
    aborted = False

    if jobs == 1 and cfg.timeout_per_instance_s is None:
        for expr in exprs:
            batch = _run_instance(expr, wanted, cfg, timing)
            reports.extend(batch)
            if not keep_going and _has_refutation(batch):
                aborted = True
                break
    else:
        batches, stop_at = _run_pooled(exprs, wanted, cfg, jobs, keep_going, timing)
        for idx in range(len(exprs)):
            reports.extend(batches[idx])
            if idx == stop_at:
                aborted = True
                break

    summary, per_check = summarize(reports)
    if aborted:
        logger.error("Grid aborted after a refutation (use --keep-going to continue)")
    logger.info(
        "Grid finished: %d reports, %d confirmed, %d vacuous, %d refuted, %d undecided",
        summary.total, summary.confirmed, summary.vacuous, summary.refuted, summary.undecided,
    )
    return GridResult(reports=reports, summary=summary, per_check=per_check, aborted=aborted)


# =========================
# Summaries
# =========================

def reports_frame(reports: List[CheckReport]) -> pd.DataFrame:
    rows = [{"id": r.id, "instance": r.instance, "verdict": r.verdict.value} for r in reports]
    return pd.DataFrame(rows, columns=["id", "instance", "verdict"])


def summarize(reports: List[CheckReport]) -> Tuple[GridSummary, Dict[str, Dict[str, int]]]:
    df = reports_frame(reports)
    if df.empty:
        return GridSummary(), {}

    counts = df["verdict"].value_counts()
    summary = GridSummary(
        total=len(df),
        confirmed=int(counts.get(Verdict.confirmed.value, 0)),
        vacuous=int(counts.get(Verdict.vacuous.value, 0)),
        refuted=int(counts.get(Verdict.refuted.value, 0)),
        undecided=int(counts.get(Verdict.undecided_cap.value, 0)),
    )

    # 每個檢查各種 verdict 的次數
    table = (
        df.groupby("id", sort=False)["verdict"]
        .value_counts()
        .unstack(fill_value=0)
        .reindex(columns=VERDICT_COLUMNS, fill_value=0)
    )
    per_check = {
        str(check_id): {col: int(row[col]) for col in VERDICT_COLUMNS}
        for check_id, row in table.iterrows()
    }
    return summary, per_check


def summary_table(result: GridResult) -> str:
    if not result.per_check:
        return "(empty grid)"
    df = pd.DataFrame.from_dict(result.per_check, orient="index")
    df.index.name = "check"
    return df.to_string()


# =========================
# Counterexample search
# =========================

def _all_normal_orders_nilpotent(inst) -> bool:
    return all(is_nilpotent_integer(inst.A, H.order) for H in inst.normals if not H.is_trivial)


def _all_normal_orders_zero(inst) -> bool:
    A = inst.A
    return all(A.scalar(H.order) == A.zero for H in inst.normals if not H.is_trivial)


def _is_prime_field(A) -> bool:
    return isinstance(A, ZModRing) and bool(isprime(A.n))


def _examine_instance(target: SearchTarget, expr: str, cfg: Settings) -> Tuple[SearchRecord, Optional[Dict]]:
    inst = get_instance(expr, cfg)
    if not inst.is_group_ring or inst.G.order == 1:
        return SearchRecord(instance=expr, status="not-applicable", note="needs a nontrivial group ring"), None

    if target == SearchTarget.question2:
        hypothesis = inst.A_nilary and _all_normal_orders_nilpotent(inst)
        prop = IdealProperty.nilary
    else:
        hypothesis = _is_prime_field(inst.A) and _all_normal_orders_zero(inst)
        prop = IdealProperty.p_nilary
    if not hypothesis:
        return SearchRecord(instance=expr, hypothesis=False, status="vacuous"), None

    result = check_ideal_property(inst.R, inst.zero, prop, cfg)
    if result.value:
        return SearchRecord(instance=expr, hypothesis=True, conclusion=True, status="consistent"), None
    witness = {"instance": expr, "property": prop.value, "pair": result.witness}
    return SearchRecord(instance=expr, hypothesis=True, conclusion=False, status="counterexample"), witness


def search_counterexample(
    target: SearchTarget,
    grid: GridSpec,
    settings: Optional[Settings] = None,
) -> SearchResult:
    """依序掃描 grid，回傳第一個前提成立而結論失敗的實例。"""
    target = SearchTarget(target)
    cfg = grid_settings(grid, settings)

    if target == SearchTarget.question1:
        # 有限非平凡群本身就是非平凡有限正規子群，前提永遠不成立
        return SearchResult(
            target=target,
            status="vacuous",
            note="no finite nontrivial group is prime; the hypothesis never holds on a finite grid",
        )

    records: List[SearchRecord] = []
    for expr in (canonical(e) for e in grid.exprs):
        try:
            record, witness = _examine_instance(target, expr, cfg)
        except CapExceededError as e:
            logger.warning("Search instance %s undecided: %s", expr, e)
            records.append(SearchRecord(instance=expr, status="undecided-cap", note=str(e)))
            continue
        records.append(record)
        if witness is not None:
            logger.error("Counterexample to %s found on %s", target.value, expr)
            return SearchResult(target=target, status="counterexample", witness=witness, instances=records)

    tested = sum(1 for r in records if r.hypothesis)
    return SearchResult(
        target=target,
        status="none-found",
        instances=records,
        note=f"hypothesis held on {tested} of {len(records)} instances",
    )
