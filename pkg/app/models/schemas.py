from typing import Any, Dict, List, Optional

from pydantic import BaseModel, Field, field_validator, model_validator

from app.core.errors import ExprSyntaxError
from app.dsl.parser import parse_expr

from .enums import CheckMode, IdealProperty, SearchTarget, Verdict


class CaseResult(BaseModel):
    label: str
    hypothesis: bool
    # 蘊含式在前提不成立時不計算結論
    conclusion: Optional[bool] = None
    verdict: Verdict
    witness: Optional[Dict[str, Any]] = None
    note: Optional[str] = None


class CheckReport(BaseModel):
    id: str
    instance: str
    hypothesis_holds: Optional[bool] = None
    conclusion_holds: Optional[bool] = None
    verdict: Verdict
    witness: Optional[Dict[str, Any]] = None
    cases: List[CaseResult] = []
    regime: Optional[str] = None
    notes: List[str] = []
    runtime_ms: Optional[float] = None

    @model_validator(mode="after")
    def refuted_needs_witness(self):
        # REFUTED 一定要附上見證，否則報告無法重現
        if self.verdict == Verdict.refuted and not self.witness:
            raise ValueError("REFUTED report must carry a witness")
        return self


class GridCaps(BaseModel):
    max_ring_size: Optional[int] = None
    max_oracle_size: Optional[int] = None
    max_group_order: Optional[int] = None
    max_property_size: Optional[int] = None
    timeout_per_instance_s: Optional[float] = None

    @field_validator("max_ring_size", "max_oracle_size", "max_group_order", "max_property_size", "timeout_per_instance_s")
    @classmethod
    def check_positive(cls, v):
        if v is not None and v <= 0:
            raise ValueError("caps must be positive")
        return v

    def overrides(self) -> Dict[str, Any]:
        return {k: v for k, v in self.model_dump().items() if v is not None}


class GridSpec(BaseModel):
    exprs: List[str]
    caps: GridCaps = GridCaps()
    checks: List[str] = []

    @field_validator("exprs")
    @classmethod
    def check_parseable(cls, v: List[str]):
        for text in v:
            if not text.strip():
                raise ValueError("grid expressions must not be empty")
            try:
                parse_expr(text)
            except ExprSyntaxError as e:
                raise ValueError(f"{text!r}: {e}") from e
        return v


class GridSummary(BaseModel):
    total: int = 0
    confirmed: int = 0
    vacuous: int = 0
    refuted: int = 0
    undecided: int = 0


class GridResult(BaseModel):
    reports: List[CheckReport]
    summary: GridSummary
    per_check: Dict[str, Dict[str, int]] = {}
    aborted: bool = False


class SearchRecord(BaseModel):
    instance: str
    hypothesis: Optional[bool] = None
    conclusion: Optional[bool] = None
    status: str
    note: Optional[str] = None


class SearchResult(BaseModel):
    target: SearchTarget
    status: str = Field(description="vacuous / counterexample / none-found")
    witness: Optional[Dict[str, Any]] = None
    instances: List[SearchRecord] = []
    note: Optional[str] = None


class IdealDump(BaseModel):
    ring: str
    generators: List[str]
    size: int


class PropertyReport(BaseModel):
    expr: str
    property: IdealProperty
    ideal: IdealDump
    value: bool
    witness: Optional[Dict[str, Any]] = None
    note: Optional[str] = None
    oracle: Optional[bool] = None
    runtime_ms: Optional[float] = None


class RingDump(BaseModel):
    descriptor: str
    size: int
    characteristic: int
    provenance: Dict[str, Any]
    tables: Any


class RingInfo(BaseModel):
    expr: str
    size: int
    characteristic: int
    provenance: Dict[str, Any]
    commutative: bool
    units: Optional[int] = None
    prime_radical: Optional[Dict[str, Any]] = None
    jacobson_radical: Optional[Dict[str, Any]] = None
    group: Optional[Dict[str, Any]] = None
    augmentation_ideal_size: Optional[int] = None
    relative_augmentation: List[Dict[str, Any]] = []
    notes: List[str] = []


class RegistryEntry(BaseModel):
    id: str
    statement: str
    anchor: str
    mode: CheckMode


class CacheEnvelope(BaseModel):
    key: str
    kind: str
    engine_version: str
    caps_hash: str
    payload: Dict[str, Any]
