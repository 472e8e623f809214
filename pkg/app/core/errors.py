from typing import Iterable, Optional


class AlgebraError(Exception):
    """引擎錯誤的共同基底。"""


class CapExceededError(AlgebraError):
    def __init__(self, cap: str, limit: int, requested: int) -> None:
        self.cap = cap
        self.limit = limit
        self.requested = requested
        super().__init__(f"{cap} exceeded: requested {requested}, limit {limit}")


class GroupConstructionError(AlgebraError):
    pass


class RingConstructionError(AlgebraError):
    pass


class NotNormalError(AlgebraError):
    pass


class RingMismatchError(AlgebraError):
    pass


class InconsistencyError(AlgebraError):
    """已證明的恆等式在某個實例上失敗，代表引擎本身有 bug。"""


class UnknownCheckError(AlgebraError):
    pass


class ExprSyntaxError(AlgebraError):
    def __init__(
        self,
        message: str,
        offset: int,
        expected: Optional[Iterable[str]] = None,
    ) -> None:
        self.message = message
        self.offset = offset
        self.expected = sorted(set(expected or ()))
        detail = f" (expected one of: {', '.join(self.expected)})" if self.expected else ""
        super().__init__(f"{message} at offset {offset}{detail}")


class NotCentralError(NotNormalError):
    pass
