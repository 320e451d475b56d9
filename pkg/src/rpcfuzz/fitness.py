"""Testing targets, execution-result classification and fitness heuristics.

Each RPC function contributes a fixed family of outcome targets
(handled/error, optionally success/fail, null/not-null, empty/not-empty),
branch probes contribute a true and a false target, and fault targets are
minted on demand when a rewarded failure is observed. Every heuristic value
for an outcome target comes from a closed set {0.1, 0.5, 1.0}; branch
targets score continuously in (0, 1].
"""

from __future__ import annotations

from dataclasses import dataclass, field
from enum import Enum
from typing import TYPE_CHECKING, Any, Callable, Mapping, Optional

from .schema.model import COLLECTION_KINDS, FunctionSpec

if TYPE_CHECKING:
    from .execution import ActionResponse


class ExecutionResultClass(Enum):
    """The seven ways a call can turn out."""

    ER1_INTERNAL_ERROR = "ER1"
    ER2_USER_ERROR = "ER2"
    ER3_TRANSPORT_ERROR = "ER3"
    ER4_OTHER_EXCEPTION = "ER4"
    ER5_DECLARED_EXCEPTION = "ER5"
    ER6_UNEXPECTED_EXCEPTION = "ER6"
    ER7_HANDLED = "ER7"


class ExceptionCategory(Enum):
    APPLICATION = "APPLICATION"
    TRANSPORT = "TRANSPORT"
    USER = "USER"
    UNCLASSIFIED = "UNCLASSIFIED"


class ExceptionType(Enum):
    """Known RPC-framework exception types plus the two generic ones.

    Names are prefixed by family (APP_/PROTO_/TRANSPORT_) since the raw
    framework constants collide (each family has an UNKNOWN).
    """

    APP_UNKNOWN = "APP_UNKNOWN"
    APP_UNKNOWN_METHOD = "APP_UNKNOWN_METHOD"
    APP_INVALID_MESSAGE_TYPE = "APP_INVALID_MESSAGE_TYPE"
    APP_WRONG_METHOD_NAME = "APP_WRONG_METHOD_NAME"
    APP_BAD_SEQUENCE_ID = "APP_BAD_SEQUENCE_ID"
    APP_MISSING_RESULT = "APP_MISSING_RESULT"
    APP_INTERNAL_ERROR = "APP_INTERNAL_ERROR"
    APP_PROTOCOL_ERROR = "APP_PROTOCOL_ERROR"
    APP_INVALID_TRANSFORM = "APP_INVALID_TRANSFORM"
    APP_INVALID_PROTOCOL = "APP_INVALID_PROTOCOL"
    APP_UNSUPPORTED_CLIENT_TYPE = "APP_UNSUPPORTED_CLIENT_TYPE"
    PROTO_UNKNOWN = "PROTO_UNKNOWN"
    PROTO_INVALID_DATA = "PROTO_INVALID_DATA"
    PROTO_NEGATIVE_SIZE = "PROTO_NEGATIVE_SIZE"
    PROTO_SIZE_LIMIT = "PROTO_SIZE_LIMIT"
    PROTO_BAD_VERSION = "PROTO_BAD_VERSION"
    PROTO_NOT_IMPLEMENTED = "PROTO_NOT_IMPLEMENTED"
    PROTO_DEPTH_LIMIT = "PROTO_DEPTH_LIMIT"
    TRANSPORT_UNKNOWN = "TRANSPORT_UNKNOWN"
    TRANSPORT_NOT_OPEN = "TRANSPORT_NOT_OPEN"
    TRANSPORT_ALREADY_OPEN = "TRANSPORT_ALREADY_OPEN"
    TRANSPORT_TIMED_OUT = "TRANSPORT_TIMED_OUT"
    TRANSPORT_END_OF_FILE = "TRANSPORT_END_OF_FILE"
    TRANSPORT_CORRUPTED_DATA = "TRANSPORT_CORRUPTED_DATA"
    CUSTOMIZED_EXCEPTION = "CUSTOMIZED_EXCEPTION"
    UNEXPECTED_EXCEPTION = "UNEXPECTED_EXCEPTION"

    @property
    def category(self) -> ExceptionCategory:
        return CATEGORY_OF[self]


CATEGORY_OF: dict[ExceptionType, ExceptionCategory] = {}
for _member in ExceptionType:
    if _member.name.startswith("APP_"):
        CATEGORY_OF[_member] = ExceptionCategory.APPLICATION
    elif _member.name.startswith("PROTO_"):
        CATEGORY_OF[_member] = ExceptionCategory.USER
    elif _member.name.startswith("TRANSPORT_"):
        CATEGORY_OF[_member] = ExceptionCategory.TRANSPORT
    else:
        CATEGORY_OF[_member] = ExceptionCategory.UNCLASSIFIED


class CallResultCode(Enum):
    """User-defined refinement of a handled result."""

    SUCCESS = "SUCCESS"
    SERVICE_ERROR = "SERVICE_ERROR"
    OTHER_ERROR = "OTHER_ERROR"


# Signature of the pluggable response categorizer hook.
Categorizer = Callable[[Any], Optional[CallResultCode]]


def status_code_categorizer(phenotype: Any) -> Optional[CallResultCode]:
    """Built-in categorizer for responses shaped like {"code": "OK" | "ERR_*"}."""
    if not isinstance(phenotype, dict) or "code" not in phenotype:
        return None
    code = str(phenotype["code"])
    if code == "OK":
        return CallResultCode.SUCCESS
    if code.startswith("ERR_SERVICE"):
        return CallResultCode.SERVICE_ERROR
    return CallResultCode.OTHER_ERROR


BUILTIN_CATEGORIZERS: dict[str, Categorizer] = {
    "status-code": status_code_categorizer,
}


class TargetKind(Enum):
    BRANCH = "branch"
    LINE = "line"
    HANDLED = "handled"
    ERROR = "error"
    SUCCESS = "success"
    FAIL = "fail"
    NOT_NULL = "notnull"
    NULL = "null"
    NOT_EMPTY = "notempty"
    EMPTY = "empty"
    FAULT = "fault"


@dataclass(frozen=True)
class TestingTarget:
    id: str
    kind: TargetKind
    owner: str


# target id -> heuristic value in [0, 1]; 1.0 means covered
FitnessVector = dict[str, float]


@dataclass
class Classification:
    er_class: ExecutionResultClass
    category: Optional[ExceptionCategory] = None
    exception_type: Optional[ExceptionType] = None
    result_code: Optional[CallResultCode] = None


def classify_execution(outcome: "ActionResponse", fn: FunctionSpec,
                       categorizer: Optional[Categorizer] = None) -> Classification:
    """Total, deterministic mapping of one response to exactly one ER class.

    Declared exceptions win over everything else, so a declared name never
    degrades to the unexpected bucket.
    """
    info = outcome.exception_info
    if info is None:
        code = categorizer(outcome.response_phenotype) if categorizer else None
        return Classification(ExecutionResultClass.ER7_HANDLED, result_code=code)

    if info.exception_name in fn.declared_exceptions:
        return Classification(ExecutionResultClass.ER5_DECLARED_EXCEPTION,
                              ExceptionCategory.UNCLASSIFIED,
                              ExceptionType.CUSTOMIZED_EXCEPTION)

    ex_type = info.type
    category = ex_type.category
    if ex_type is ExceptionType.APP_INTERNAL_ERROR:
        er = ExecutionResultClass.ER1_INTERNAL_ERROR
    elif category is ExceptionCategory.USER:
        er = ExecutionResultClass.ER2_USER_ERROR
    elif category is ExceptionCategory.TRANSPORT:
        er = ExecutionResultClass.ER3_TRANSPORT_ERROR
    elif category is ExceptionCategory.APPLICATION:
        er = ExecutionResultClass.ER4_OTHER_EXCEPTION
    else:
        er = ExecutionResultClass.ER6_UNEXPECTED_EXCEPTION
        ex_type = ExceptionType.UNEXPECTED_EXCEPTION
        category = ExceptionCategory.UNCLASSIFIED
    return Classification(er, category, ex_type)


class TargetRegistry:
    """Append-only id space for every testing target discovered in a run."""

    def __init__(self):
        self._targets: dict[str, TestingTarget] = {}
        self._per_function: dict[str, dict[TargetKind, TestingTarget]] = {}

    def __len__(self) -> int:
        return len(self._targets)

    def __contains__(self, target_id: str) -> bool:
        return target_id in self._targets

    def get(self, target_id: str) -> Optional[TestingTarget]:
        return self._targets.get(target_id)

    def all_targets(self) -> list[TestingTarget]:
        return list(self._targets.values())

    def count_kind(self, kind: TargetKind) -> int:
        return sum(1 for t in self._targets.values() if t.kind is kind)

    def _register(self, kind: TargetKind, owner: str) -> TestingTarget:
        tid = f"{kind.value}:{owner}"
        existing = self._targets.get(tid)
        if existing is not None:
            return existing
        target = TestingTarget(tid, kind, owner)
        self._targets[tid] = target
        return target

    def register_targets_for_function(self, fn: FunctionSpec,
                                      categorizer_present: bool) -> list[TestingTarget]:
        """Handled/Error always; Success/Fail with a categorizer; Null/NotNull for
        non-void responses; Empty/NotEmpty for collection responses."""
        kinds = [TargetKind.HANDLED, TargetKind.ERROR]
        if categorizer_present:
            kinds += [TargetKind.SUCCESS, TargetKind.FAIL]
        if fn.response_type is not None:
            kinds += [TargetKind.NOT_NULL, TargetKind.NULL]
            if fn.response_type.kind in COLLECTION_KINDS:
                kinds += [TargetKind.NOT_EMPTY, TargetKind.EMPTY]
        created = [self._register(kind, fn.qualified_name) for kind in kinds]
        self._per_function[fn.qualified_name] = {t.kind: t for t in created}
        return created

    def targets_for(self, fn: FunctionSpec) -> Mapping[TargetKind, TestingTarget]:
        return self._per_function.get(fn.qualified_name, {})

    def ensure_branch_targets(self, probe_id: str) -> tuple[TestingTarget, TestingTarget]:
        return (self._register(TargetKind.BRANCH, f"{probe_id}:T"),
                self._register(TargetKind.BRANCH, f"{probe_id}:F"))

    def register_fault_target(self, fn: FunctionSpec, distinguisher: str) -> TestingTarget:
        """One fault target per (function, distinguisher); repeats dedup to the
        same target."""
        return self._register(TargetKind.FAULT,
                              f"{fn.qualified_name}:{distinguisher}")


# Handled/Error rows of the heuristic table: er -> (handled, error, is_fault).
_HANDLED_ERROR_ROWS = {
    ExecutionResultClass.ER1_INTERNAL_ERROR: (0.5, 1.0, True),
    ExecutionResultClass.ER2_USER_ERROR: (0.1, 0.1, False),
    ExecutionResultClass.ER4_OTHER_EXCEPTION: (0.5, 1.0, False),
    ExecutionResultClass.ER5_DECLARED_EXCEPTION: (0.5, 1.0, True),
    ExecutionResultClass.ER6_UNEXPECTED_EXCEPTION: (0.5, 1.0, True),
    ExecutionResultClass.ER7_HANDLED: (1.0, 0.5, False),
}

# Success/Fail rows: result code -> (success, fail, is_fault).
_SUCCESS_FAIL_ROWS = {
    CallResultCode.SUCCESS: (1.0, 0.5, False),
    CallResultCode.SERVICE_ERROR: (0.5, 1.0, True),
    CallResultCode.OTHER_ERROR: (0.1, 0.1, False),
}


def fitness_for_result(er_class: ExecutionResultClass,
                       result_code: Optional[CallResultCode],
                       response_phenotype: Any,
                       targets: Mapping[TargetKind, TestingTarget],
                       response_is_collection: bool = False,
                       ) -> tuple[FitnessVector, bool]:
    """Heuristic values for one executed call, plus whether the row is a fault.

    Transport errors earn nothing. Only targets present in `targets` receive
    values, so void functions never score null/empty rows.
    """
    vector: FitnessVector = {}
    if er_class is ExecutionResultClass.ER3_TRANSPORT_ERROR:
        return vector, False

    def put(kind: TargetKind, h: float) -> None:
        target = targets.get(kind)
        if target is not None:
            vector[target.id] = h

    handled, error, is_fault = _HANDLED_ERROR_ROWS[er_class]
    put(TargetKind.HANDLED, handled)
    put(TargetKind.ERROR, error)

    if er_class is ExecutionResultClass.ER7_HANDLED:
        if result_code is not None:
            success, fail, code_fault = _SUCCESS_FAIL_ROWS[result_code]
            put(TargetKind.SUCCESS, success)
            put(TargetKind.FAIL, fail)
            is_fault = is_fault or code_fault
        is_null = response_phenotype is None
        put(TargetKind.NOT_NULL, 0.5 if is_null else 1.0)
        put(TargetKind.NULL, 1.0 if is_null else 0.5)
        if response_is_collection and not is_null:
            is_empty = len(response_phenotype) == 0
            put(TargetKind.NOT_EMPTY, 0.5 if is_empty else 1.0)
            put(TargetKind.EMPTY, 1.0 if is_empty else 0.5)
    return vector, is_fault


def fault_distinguisher(classification: Classification,
                        outcome: Optional["ActionResponse"]) -> str:
    """Dedup key for a fault: exception identity for ER5/ER6, constants for the
    internal-error and service-error rows."""
    er = classification.er_class
    if er is ExecutionResultClass.ER1_INTERNAL_ERROR:
        return "internal-error"
    if classification.result_code is CallResultCode.SERVICE_ERROR:
        return "service-error"
    info = outcome.exception_info if outcome is not None else None
    if info is None:
        return er.value
    site = info.site or "?"
    return f"{info.exception_name}@{site}"


def target_stats_rows(registry: TargetRegistry, best: Mapping[str, float],
                      champions: Mapping[str, str]) -> list[tuple[str, str, float, str]]:
    """Stable per-target table: (id, kind, best h, covering test id or '')."""
    rows = []
    for target in sorted(registry.all_targets(), key=lambda t: t.id):
        rows.append((target.id, target.kind.value,
                     best.get(target.id, 0.0), champions.get(target.id, "")))
    return rows
