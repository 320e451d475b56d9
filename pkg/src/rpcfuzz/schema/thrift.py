"""Parser for a Thrift-IDL subset.

Supported: namespace, struct, enum, exception, service, base types
(bool/byte/i8/i16/i32/i64/double/string/binary), list/set/map, field ids,
required/optional qualifiers, throws clauses, literal field defaults and
simple scalar consts. Everything else (union, typedef, include, oneway,
service inheritance, composite consts) fails with UnsupportedConstruct.

Value constraints have no native IDL syntax, so they are accepted as
structured comments starting with '@', e.g.::

    struct Booking {
      1: required i32 day,      // @min(1) @max(31)
      2: string ref             // @pattern([A-Z]{2}[0-9]+) @notNull
    }

An annotation comment binds to the next field, or to the field ending on
the same line.
"""

from __future__ import annotations

import re
from dataclasses import dataclass, field as dc_field
from typing import Any, Optional

from ..errors import IdlSyntaxError, SchemaValidationError, UnsupportedConstruct
from .analysis import Severity, validate_schema
from .model import (
    PRIMITIVE_KINDS,
    FunctionSpec,
    InterfaceSchema,
    ParamSpec,
    RpcSchema,
    SupportedDataType,
    TypeSpec,
)

BASE_TYPES = {
    "bool": SupportedDataType.BOOLEAN,
    "byte": SupportedDataType.BYTE,
    "i8": SupportedDataType.BYTE,
    "i16": SupportedDataType.SHORT,
    "i32": SupportedDataType.INT,
    "i64": SupportedDataType.LONG,
    "double": SupportedDataType.DOUBLE,
    "string": SupportedDataType.STRING,
    "binary": SupportedDataType.BYTEBUFFER,
}

UNSUPPORTED_KEYWORDS = ("union", "typedef", "include", "senum", "cpp_include")

_TOKEN_RE = re.compile(r"""
    (?P<ws>[ \t\r\n]+)
  | (?P<comment>//[^\n]*|\#[^\n]*|/\*.*?\*/)
  | (?P<float>-?\d+\.\d+(?:[eE][+-]?\d+)?)
  | (?P<int>-?\d+)
  | (?P<string>"[^"\n]*"|'[^'\n]*')
  | (?P<ident>[A-Za-z_][A-Za-z0-9_.]*)
  | (?P<punct>[{}()<>,;:=*\[\]])
""", re.VERBOSE | re.DOTALL)


@dataclass
class _Token:
    kind: str          # ident | int | float | string | punct | annot | eof
    value: Any
    line: int
    column: int


def _tokenize(source: str) -> list[_Token]:
    tokens: list[_Token] = []
    pos = 0
    line = 1
    line_start = 0
    n = len(source)
    while pos < n:
        m = _TOKEN_RE.match(source, pos)
        if m is None:
            col = pos - line_start + 1
            raise IdlSyntaxError(f"unexpected character {source[pos]!r}", line, col)
        kind = m.lastgroup
        text = m.group()
        col = pos - line_start + 1
        if kind == "comment":
            body = _strip_comment(text)
            if body.startswith("@"):
                tokens.append(_Token("annot", _parse_annotations(body, line, col), line, col))
        elif kind == "string":
            tokens.append(_Token("string", text[1:-1], line, col))
        elif kind == "int":
            tokens.append(_Token("int", int(text), line, col))
        elif kind == "float":
            tokens.append(_Token("float", float(text), line, col))
        elif kind in ("ident", "punct"):
            tokens.append(_Token(kind, text, line, col))
        # count newlines consumed by this token (whitespace and block comments)
        newlines = text.count("\n")
        if newlines:
            line += newlines
            line_start = pos + text.rindex("\n") + 1
        pos = m.end()
    tokens.append(_Token("eof", None, line, pos - line_start + 1))
    return tokens


def _strip_comment(text: str) -> str:
    if text.startswith("//"):
        return text[2:].strip()
    if text.startswith("#"):
        return text[1:].strip()
    return text[2:-2].strip()


_ANNOT_RE = re.compile(r"@([A-Za-z][A-Za-z0-9]*)")


def _parse_annotations(body: str, line: int, col: int) -> list[tuple[str, list[str]]]:
    """Split '@min(1) @max(31)' into [(name, args), ...]; args stay raw strings."""
    out: list[tuple[str, list[str]]] = []
    pos = 0
    while pos < len(body):
        m = _ANNOT_RE.search(body, pos)
        if m is None:
            break
        name = m.group(1)
        pos = m.end()
        args: list[str] = []
        if pos < len(body) and body[pos] == "(":
            depth = 0
            start = pos + 1
            for i in range(pos, len(body)):
                if body[i] == "(":
                    depth += 1
                elif body[i] == ")":
                    depth -= 1
                    if depth == 0:
                        raw = body[start:i]
                        # @pattern takes its argument verbatim (it may contain commas)
                        if name.lower() == "pattern":
                            args = [raw]
                        else:
                            args = [a.strip() for a in raw.split(",") if a.strip()]
                        pos = i + 1
                        break
            else:
                raise IdlSyntaxError(f"unterminated annotation @{name}", line, col)
        out.append((name, args))
    return out


# --- parsed intermediate forms -------------------------------------------------

@dataclass
class _Field:
    name: str
    type_ref: "_TypeRef"
    required: Optional[bool]      # True/False for explicit qualifier, None default
    default: Any
    annotations: list[tuple[str, list[str]]] = dc_field(default_factory=list)


@dataclass
class _TypeRef:
    base: str                     # base type keyword, 'list', 'set', 'map', or a name
    args: list["_TypeRef"] = dc_field(default_factory=list)


@dataclass
class _Function:
    name: str
    return_ref: Optional[_TypeRef]
    params: list[_Field]
    throws: list[_TypeRef]


class _Parser:
    def __init__(self, tokens: list[_Token]):
        self._tokens = tokens
        self._i = 0
        self.structs: dict[str, list[_Field]] = {}
        self.enums: dict[str, list[str]] = {}
        self.exceptions: set[str] = set()
        self.services: list[tuple[str, list[_Function]]] = []
        self._order: list[str] = []

    # token helpers

    def _peek(self) -> _Token:
        return self._tokens[self._i]

    def _next(self) -> _Token:
        tok = self._tokens[self._i]
        if tok.kind != "eof":
            self._i += 1
        return tok

    def _expect(self, kind: str, value: Any = None) -> _Token:
        tok = self._next()
        if tok.kind != kind or (value is not None and tok.value != value):
            want = value if value is not None else kind
            raise IdlSyntaxError(f"expected {want!r}, found {tok.value!r}",
                                 tok.line, tok.column)
        return tok

    def _skip_separator(self) -> None:
        if self._peek().kind == "punct" and self._peek().value in (",", ";"):
            self._next()

    def _take_annotations(self) -> list[tuple[str, list[str]]]:
        collected: list[tuple[str, list[str]]] = []
        while self._peek().kind == "annot":
            collected.extend(self._next().value)
        return collected

    # grammar

    def parse(self) -> None:
        while True:
            self._take_annotations()    # stray annotations between definitions
            tok = self._peek()
            if tok.kind == "eof":
                return
            if tok.kind != "ident":
                raise IdlSyntaxError(f"expected a definition, found {tok.value!r}",
                                     tok.line, tok.column)
            if tok.value in UNSUPPORTED_KEYWORDS:
                raise UnsupportedConstruct(tok.value, tok.line)
            handler = {
                "namespace": self._parse_namespace,
                "struct": self._parse_struct,
                "exception": self._parse_exception,
                "enum": self._parse_enum,
                "service": self._parse_service,
                "const": self._parse_const,
            }.get(tok.value)
            if handler is None:
                raise IdlSyntaxError(f"unexpected token {tok.value!r}",
                                     tok.line, tok.column)
            handler()

    def _parse_namespace(self) -> None:
        self._expect("ident", "namespace")
        self._expect("ident")   # scope
        self._expect("ident")   # dotted package name
        self._skip_separator()

    def _parse_const(self) -> None:
        tok = self._expect("ident", "const")
        self._parse_type_ref()
        self._expect("ident")
        self._expect("punct", "=")
        value = self._peek()
        if value.kind not in ("int", "float", "string") and \
                not (value.kind == "ident" and value.value in ("true", "false")):
            raise UnsupportedConstruct("const with non-literal value", tok.line)
        self._next()
        self._skip_separator()

    def _parse_struct(self) -> None:
        self._expect("ident", "struct")
        name = self._expect("ident").value
        self.structs[name] = self._parse_field_block()
        self._order.append(name)

    def _parse_exception(self) -> None:
        self._expect("ident", "exception")
        name = self._expect("ident").value
        self.structs[name] = self._parse_field_block()
        self.exceptions.add(name)
        self._order.append(name)

    def _parse_enum(self) -> None:
        self._expect("ident", "enum")
        name = self._expect("ident").value
        self._expect("punct", "{")
        members: list[str] = []
        while not (self._peek().kind == "punct" and self._peek().value == "}"):
            self._take_annotations()
            members.append(self._expect("ident").value)
            if self._peek().kind == "punct" and self._peek().value == "=":
                self._next()
                self._expect("int")
            self._skip_separator()
        self._next()
        self.enums[name] = members
        self._order.append(name)

    def _parse_field_block(self) -> list[_Field]:
        self._expect("punct", "{")
        fields: list[_Field] = []
        while not (self._peek().kind == "punct" and self._peek().value == "}"):
            fields.append(self._parse_field())
        self._next()
        return fields

    def _parse_field(self) -> _Field:
        annotations = self._take_annotations()
        self._expect("int")   # field id (kept for syntax, unused by the model)
        self._expect("punct", ":")
        required: Optional[bool] = None
        tok = self._peek()
        if tok.kind == "ident" and tok.value in ("required", "optional"):
            required = tok.value == "required"
            self._next()
        type_ref = self._parse_type_ref()
        name_tok = self._expect("ident")
        default = None
        if self._peek().kind == "punct" and self._peek().value == "=":
            self._next()
            default = self._parse_literal()
        self._skip_separator()
        # a trailing annotation comment on the same line binds to this field
        if self._peek().kind == "annot" and self._peek().line == name_tok.line:
            annotations = annotations + self._next().value
        return _Field(name_tok.value, type_ref, required, default, annotations)

    def _parse_literal(self) -> Any:
        tok = self._next()
        if tok.kind in ("int", "float", "string"):
            return tok.value
        if tok.kind == "ident" and tok.value in ("true", "false"):
            return tok.value == "true"
        if tok.kind == "ident":
            return tok.value    # enum constant reference
        raise IdlSyntaxError(f"expected a literal, found {tok.value!r}",
                             tok.line, tok.column)

    def _parse_type_ref(self) -> _TypeRef:
        tok = self._expect("ident")
        base = tok.value
        if base in ("list", "set"):
            self._expect("punct", "<")
            inner = self._parse_type_ref()
            self._expect("punct", ">")
            return _TypeRef(base, [inner])
        if base == "map":
            self._expect("punct", "<")
            key = self._parse_type_ref()
            self._expect("punct", ",")
            value = self._parse_type_ref()
            self._expect("punct", ">")
            return _TypeRef(base, [key, value])
        return _TypeRef(base)

    def _parse_service(self) -> None:
        tok = self._expect("ident", "service")
        name = self._expect("ident").value
        if self._peek().kind == "ident" and self._peek().value == "extends":
            raise UnsupportedConstruct("service inheritance", self._peek().line)
        self._expect("punct", "{")
        functions: list[_Function] = []
        while not (self._peek().kind == "punct" and self._peek().value == "}"):
            self._take_annotations()
            functions.append(self._parse_function())
        self._next()
        self.services.append((name, functions))

    def _parse_function(self) -> _Function:
        tok = self._peek()
        if tok.kind == "ident" and tok.value == "oneway":
            raise UnsupportedConstruct("oneway function", tok.line)
        if tok.kind == "ident" and tok.value == "void":
            self._next()
            return_ref = None
        else:
            return_ref = self._parse_type_ref()
        name = self._expect("ident").value
        self._expect("punct", "(")
        params: list[_Field] = []
        while not (self._peek().kind == "punct" and self._peek().value == ")"):
            params.append(self._parse_field())
        self._next()
        throws: list[_TypeRef] = []
        if self._peek().kind == "ident" and self._peek().value == "throws":
            self._next()
            self._expect("punct", "(")
            while not (self._peek().kind == "punct" and self._peek().value == ")"):
                fld = self._parse_field()
                throws.append(fld.type_ref)
            self._next()
        self._skip_separator()
        return _Function(name, return_ref, params, throws)


# --- model building -------------------------------------------------------------

def parse_thrift_idl(source: str) -> RpcSchema:
    """Parse IDL text into a validated schema.

    Raises IdlSyntaxError / UnsupportedConstruct on bad input and
    SchemaValidationError when the parsed schema breaks an invariant.
    """
    parser = _Parser(_tokenize(source))
    parser.parse()
    builder = _Builder(parser)
    schema = builder.build()
    errors = [d for d in validate_schema(schema) if d.severity is Severity.ERROR]
    if errors:
        raise SchemaValidationError(errors)
    return schema


class _Builder:
    def __init__(self, parsed: _Parser):
        self._p = parsed

    def build(self) -> RpcSchema:
        schema = RpcSchema()
        for name in self._p._order:
            if name in self._p.enums:
                schema.type_defs[name] = TypeSpec(
                    SupportedDataType.ENUM, name,
                    candidates=tuple(self._p.enums[name]))
        for name in self._p._order:
            if name in self._p.structs:
                schema.type_defs[name] = TypeSpec(
                    SupportedDataType.CUSTOM_OBJECT, name,
                    fields=[self._param_from_field(f) for f in self._p.structs[name]])
        for service_name, functions in self._p.services:
            iface = InterfaceSchema(interface_id=service_name)
            for fn in functions:
                iface.functions.append(FunctionSpec(
                    interface_id=service_name,
                    action_name=fn.name,
                    request_params=[self._param_from_field(f) for f in fn.params],
                    response_type=self._type_from_ref(fn.return_ref)
                    if fn.return_ref else None,
                    declared_exceptions=[t.base for t in fn.throws],
                ))
            iface.types = referenced_types(schema, iface)
            schema.interfaces.append(iface)
        return schema

    def _type_from_ref(self, ref: _TypeRef) -> TypeSpec:
        if ref.base in BASE_TYPES:
            return TypeSpec(BASE_TYPES[ref.base], ref.base)
        if ref.base in ("list", "set"):
            kind = SupportedDataType.LIST if ref.base == "list" else SupportedDataType.SET
            elem = self._type_from_ref(ref.args[0])
            return TypeSpec(kind, f"{ref.base}<{elem.type_name}>", example=elem)
        if ref.base == "map":
            key = self._type_from_ref(ref.args[0])
            value = self._type_from_ref(ref.args[1])
            return TypeSpec(SupportedDataType.MAP,
                            f"map<{key.type_name},{value.type_name}>",
                            key_type=key, value_type=value)
        if ref.base in self._p.enums:
            return TypeSpec(SupportedDataType.ENUM, ref.base)
        return TypeSpec(SupportedDataType.CUSTOM_OBJECT, ref.base)

    def _param_from_field(self, fld: _Field) -> ParamSpec:
        ts = self._type_from_ref(fld.type_ref)
        nullable = ts.kind not in PRIMITIVE_KINDS
        if fld.required is True:
            nullable = False
        elif fld.required is False:
            nullable = ts.kind not in PRIMITIVE_KINDS
        param = ParamSpec(name=fld.name, type=ts, is_nullable=nullable,
                          default_value=fld.default)
        for name, args in fld.annotations:
            _apply_annotation(param, name, args, fld.name)
        return param


def _num(raw: str) -> Any:
    return float(raw) if ("." in raw or "e" in raw.lower()) else int(raw)


def _apply_annotation(param: ParamSpec, name: str, args: list[str],
                      field_name: str) -> None:
    key = name.lower()
    if key in ("min", "decimalmin"):
        param.min_value = _num(args[0])
    elif key in ("max", "decimalmax"):
        param.max_value = _num(args[0])
    elif key == "positive":
        param.min_value, param.min_inclusive = 0, False
    elif key == "positiveorzero":
        param.min_value, param.min_inclusive = 0, True
    elif key == "negative":
        param.max_value, param.max_inclusive = 0, False
    elif key == "negativeorzero":
        param.max_value, param.max_inclusive = 0, True
    elif key == "digits":
        integer, fraction = int(args[0]), int(args[1])
        param.precision = integer + fraction
        param.scale = fraction
    elif key == "size":
        param.min_size, param.max_size = int(args[0]), int(args[1])
    elif key in ("notempty", "notblank"):
        param.min_size = max(param.min_size or 0, 1)
    elif key == "notnull":
        param.is_nullable = False
    elif key == "pattern":
        param.pattern = args[0]
    elif key == "asserttrue":
        param.default_value, param.is_mutable = True, False
    elif key == "assertfalse":
        param.default_value, param.is_mutable = False, False
    else:
        raise UnsupportedConstruct(f"annotation @{name} on field {field_name}", 0)


def referenced_types(schema: RpcSchema, iface: InterfaceSchema) -> list[TypeSpec]:
    """Named type definitions used (transitively) by an interface's functions."""
    seen: set[str] = set()

    def visit(ts: Optional[TypeSpec]) -> None:
        if ts is None:
            return
        if ts.type_name in schema.type_defs and ts.type_name not in seen:
            seen.add(ts.type_name)
            definition = schema.type_defs[ts.type_name]
            for fld in definition.fields or []:
                visit(fld.type)
        for child in (ts.example, ts.key_type, ts.value_type):
            visit(child)

    for fn in iface.functions:
        for param in fn.request_params:
            visit(param.type)
        visit(fn.response_type)
        for exc in fn.declared_exceptions:
            if exc in schema.type_defs:
                visit(TypeSpec(SupportedDataType.CUSTOM_OBJECT, exc))
    return [schema.type_defs[name] for name in sorted(seen)]
