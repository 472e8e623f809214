from typing import Optional, Union
import logging

from app.core.config import Settings, get_settings
from app.core.errors import CapExceededError, InconsistencyError, RingConstructionError
from app.dsl.ast import GroupRing as GroupRingExpr
from app.dsl.ast import ProdRing, RingExpr, ZMod, ring_size
from app.dsl.parser import parse_expr, print_expr
from app.groups.finite_group import make_group
from app.rings.finite_ring import FiniteRing, ProductRing, ZModRing, validate_ring_axioms
from app.rings.group_ring import GroupRing

logger = logging.getLogger(__name__)


def make_ring(
    spec: Union[str, RingExpr],
    settings: Optional[Settings] = None,
    validate: bool = True,
) -> FiniteRing:
    """由描述建出已驗證的有限環；群環回傳 GroupRing（即其 context）。"""
    cfg = settings or get_settings()
    expr = parse_expr(spec) if isinstance(spec, str) else spec
    size = ring_size(expr)
    if size > cfg.max_ring_size:
        raise CapExceededError("max_ring_size", cfg.max_ring_size, size)
    R = _build(expr, cfg)
    if validate:
        report = validate_ring_axioms(R, cfg)
        if not report.passed:
            raise InconsistencyError(f"{R.name} failed {report.law} at {report.triple}")
    logger.info("Built ring %s (size=%d, char=%d)", R.name, R.size, R.characteristic)
    return R


def _build(expr: RingExpr, cfg: Settings) -> FiniteRing:
    match expr:
        case ZMod(n):
            if n < 2:
                raise RingConstructionError("modulus must be >= 2")
            return ZModRing(n)
        case ProdRing(left, right):
            return ProductRing(_build(left, cfg), _build(right, cfg), name=print_expr(expr))
        case GroupRingExpr(ring, group):
            return GroupRing(_build(ring, cfg), make_group(group, cfg), name=print_expr(expr))
    raise RingConstructionError(f"unsupported ring descriptor: {expr!r}")
