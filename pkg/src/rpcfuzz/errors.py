"""Exception hierarchy shared across the fuzzer."""

from __future__ import annotations


class RpcFuzzError(Exception):
    """Base class for all errors raised by this package."""


class IdlSyntaxError(RpcFuzzError):
    """Malformed IDL input; carries the 1-based source position."""

    def __init__(self, message: str, line: int, column: int):
        super().__init__(f"{message} (line {line}, column {column})")
        self.line = line
        self.column = column


class UnsupportedConstruct(RpcFuzzError):
    """IDL feature outside the supported subset (union, include, typedef, ...)."""

    def __init__(self, construct: str, line: int):
        super().__init__(f"unsupported IDL construct: {construct} (line {line})")
        self.construct = construct
        self.line = line


class FormatError(RpcFuzzError):
    """Malformed document in one of the native JSON formats."""


class SchemaValidationError(RpcFuzzError):
    """A schema violates a structural invariant; carries the diagnostics."""

    def __init__(self, diagnostics):
        self.diagnostics = list(diagnostics)
        first = self.diagnostics[0] if self.diagnostics else None
        super().__init__(
            f"{len(self.diagnostics)} schema error(s); first: {first}"
        )


class UnsupportedType(RpcFuzzError):
    """A type cannot be mapped onto the gene catalog."""


class ImmutableGeneError(RpcFuzzError):
    """Mutation requested on a gene whose value is pinned by the schema."""


class RegexUnsupported(RpcFuzzError):
    """Pattern uses a construct outside the generatable regex subset."""


class TransportUnavailable(RpcFuzzError):
    """The SUT could not be reached before the first call of a test."""
