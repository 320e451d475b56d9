"""rpcfuzz: search-based fuzzing for RPC-style APIs.

Parse an API schema (Thrift-IDL subset or native JSON), evolve call
sequences against coverage and RPC-outcome targets, classify every
execution result, and emit replayable suites. Built-in instrumented
simulated SUTs make whitebox-vs-random comparisons reproducible on a
laptop.
"""

from .errors import (
    FormatError,
    IdlSyntaxError,
    ImmutableGeneError,
    RegexUnsupported,
    RpcFuzzError,
    SchemaValidationError,
    TransportUnavailable,
    UnsupportedConstruct,
    UnsupportedType,
)
from .execution import (
    ActionResponse,
    ExceptionInfo,
    Executor,
    HttpJsonTransport,
    InProcessTransport,
    Transport,
    extract_response_flags,
)
from .fitness import (
    BUILTIN_CATEGORIZERS,
    CallResultCode,
    Classification,
    ExceptionCategory,
    ExceptionType,
    ExecutionResultClass,
    FitnessVector,
    TargetKind,
    TargetRegistry,
    TestingTarget,
    classify_execution,
    fitness_for_result,
)
from .schema import (
    AuthMode,
    AuthSpec,
    FunctionSpec,
    InterfaceSchema,
    ParamSpec,
    RpcSchema,
    SupportedDataType,
    TypeSpec,
    detect_cycles,
    load_json_schema,
    parse_thrift_idl,
    schema_hash,
    schema_to_json,
    serialize_schema,
    validate_schema,
)
from .search import (
    Algorithm,
    Archive,
    RpcAction,
    SearchConfig,
    TargetStats,
    TestCase,
    TestSuite,
    mutate_test,
    run_search,
    sample_adhoc_tests,
    sample_random_test,
)
from .writer import (
    RenderedSuite,
    WriterConfig,
    build_machine_suite,
    mask_flaky_assertions,
    replay_suite,
    split_suite_by_outcome,
    write_suite,
)

__version__ = "0.1.0"
