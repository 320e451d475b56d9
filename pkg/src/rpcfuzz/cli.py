"""Command-line entry point: fuzz, parse, replay, list-harness, serve-harness.

Exit codes: 0 success, 1 configuration or validation error, 2 transport
failure. Every fuzz run writes a manifest with the full flag snapshot,
schema hash and seed, which is enough to reproduce the run bit-for-bit.
"""

from __future__ import annotations

import argparse
import json
import sys
import time
from datetime import datetime, timezone
from pathlib import Path
from typing import Optional

from .errors import RpcFuzzError
from .execution import Executor, HttpJsonTransport, InProcessTransport, Transport
from .fitness import BUILTIN_CATEGORIZERS
from .harness.httpserve import serve_harness
from .harness.services import SimulatedService, build_harness, catalog
from .schema.analysis import Severity, validate_schema
from .schema.jsonio import (
    auth_spec_from_json,
    load_json_schema,
    schema_hash,
    schema_to_json,
)
from .schema.model import RpcSchema
from .schema.thrift import parse_thrift_idl
from .search import Algorithm, SearchConfig, run_search
from .writer import WriterConfig, replay_suite, write_suite


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(message)


def _build_parser() -> _Parser:
    parser = _Parser(prog="rpcfuzz",
                     description="search-based fuzzer for RPC-style APIs")
    sub = parser.add_subparsers(dest="command", required=True)

    fuzz = sub.add_parser("fuzz", help="run the search and write a suite")
    fuzz.add_argument("--schema", help="IDL or JSON schema file")
    fuzz.add_argument("--schema-format", choices=["thrift", "json"],
                      help="defaults by file extension")
    fuzz.add_argument("--harness", help="built-in simulated SUT name")
    fuzz.add_argument("--transport", choices=["http"],
                      help="remote transport (requires --endpoint)")
    fuzz.add_argument("--endpoint", help="base URL of the wire adapter")
    fuzz.add_argument("--algorithm", choices=[Algorithm.MIO, Algorithm.RANDOM],
                      default=Algorithm.MIO)
    fuzz.add_argument("--budget", type=int, required=True,
                      help="search budget in RPC calls")
    fuzz.add_argument("--seed", type=int, default=42)
    fuzz.add_argument("--out", required=True, help="output directory")
    fuzz.add_argument("--max-actions", type=int, default=10)
    fuzz.add_argument("--auth-config", help="JSON auth specification file")
    fuzz.add_argument("--categorizer", choices=sorted(BUILTIN_CATEGORIZERS),
                      help="builtin response categorizer")
    fuzz.add_argument("--init-data", help="JSON file of seed rows per table")

    parse = sub.add_parser("parse", help="parse and validate a schema")
    parse.add_argument("--schema", required=True)
    parse.add_argument("--schema-format", choices=["thrift", "json"])
    parse.add_argument("--emit-json", action="store_true",
                       help="print the normalized JSON schema")

    replay = sub.add_parser("replay", help="re-run a machine suite")
    replay.add_argument("--suite", required=True)
    replay.add_argument("--harness")
    replay.add_argument("--transport", choices=["http"])
    replay.add_argument("--endpoint")
    replay.add_argument("--auth-config")
    replay.add_argument("--categorizer", choices=sorted(BUILTIN_CATEGORIZERS))
    replay.add_argument("--init-data")

    listing = sub.add_parser("list-harness", help="print built-in SUTs")
    listing.add_argument("--json", action="store_true")

    serve = sub.add_parser("serve-harness",
                           help="expose a built-in SUT over the wire format")
    serve.add_argument("--harness", required=True)
    serve.add_argument("--host", default="127.0.0.1")
    serve.add_argument("--port", type=int, default=8787)
    return parser


def _load_schema(path: str, fmt: Optional[str]) -> RpcSchema:
    source = Path(path).read_text(encoding="utf-8")
    if fmt is None:
        fmt = "json" if path.endswith(".json") else "thrift"
    if fmt == "json":
        return load_json_schema(source)
    return parse_thrift_idl(source)


def _load_init_data(service: SimulatedService, path: Optional[str]) -> None:
    if path:
        data = json.loads(Path(path).read_text(encoding="utf-8"))
        service.store.load_init_data(data)


def _resolve_target(args) -> tuple[RpcSchema, Transport, Optional[SimulatedService]]:
    """Pick schema + transport from --harness / --transport / --schema flags."""
    service = None
    if args.harness:
        service = build_harness(args.harness)
        _load_init_data(service, getattr(args, "init_data", None))
        transport: Transport = InProcessTransport(service)
        schema = service.schema
    elif args.transport == "http":
        if not args.endpoint:
            raise UsageError("--transport http requires --endpoint")
        if not getattr(args, "schema", None):
            raise UsageError("--transport http requires --schema")
        transport = HttpJsonTransport(args.endpoint)
        schema = _load_schema(args.schema, getattr(args, "schema_format", None))
        return schema, transport, None
    else:
        raise UsageError("either --harness or --transport http is required")

    if getattr(args, "schema", None):
        loaded = _load_schema(args.schema, getattr(args, "schema_format", None))
        known = {fn.action_name for fn in schema.all_functions()}
        missing = [fn.action_name for fn in loaded.all_functions()
                   if fn.action_name not in known]
        if missing:
            raise UsageError(
                f"schema functions {missing} have no harness implementation")
        if loaded.auth is None:
            loaded.auth = schema.auth
        schema = loaded
    return schema, transport, service


def cmd_fuzz(args) -> int:
    schema, transport, service = _resolve_target(args)

    auth_spec = schema.auth
    if args.auth_config:
        auth_spec = auth_spec_from_json(
            json.loads(Path(args.auth_config).read_text(encoding="utf-8")))
    elif service is not None and service.default_auth is not None:
        auth_spec = service.default_auth

    categorizer_name = args.categorizer
    if categorizer_name is None and service is not None:
        categorizer_name = service.default_categorizer
    categorizer = BUILTIN_CATEGORIZERS.get(categorizer_name) \
        if categorizer_name else None

    config = SearchConfig(
        budget_actions=args.budget,
        algorithm=args.algorithm,
        seed=args.seed,
        max_actions=args.max_actions,
    )
    started = datetime.now(timezone.utc)
    suite, stats = run_search(
        schema, transport, config,
        probes=service.probes if service is not None else None,
        categorizer=categorizer, auth_spec=auth_spec)
    finished = datetime.now(timezone.utc)

    digest = schema_hash(schema)
    meta = {"seed": args.seed, "schemaHash": digest, "budget": args.budget,
            "algorithm": args.algorithm}
    rendered = write_suite(suite, schema, stats, meta,
                           WriterConfig(seed=args.seed))

    out_dir = Path(args.out)
    out_dir.mkdir(parents=True, exist_ok=True)
    for name, content in rendered.files.items():
        (out_dir / name).write_text(content, encoding="utf-8")
    manifest = {
        "flags": {k: v for k, v in sorted(vars(args).items()) if k != "command"},
        "schemaHash": digest,
        "seed": args.seed,
        "startedAt": started.isoformat(),
        "finishedAt": finished.isoformat(),
        "callsExecuted": stats.calls_executed,
        "targetsCovered": stats.covered,
        "targetsTotal": stats.total_targets,
        "faultsFlagged": stats.faults_flagged,
        "tests": len(suite.tests),
        "diagnostics": stats.diagnostics,
    }
    (out_dir / "manifest.json").write_text(
        json.dumps(manifest, indent=2, sort_keys=True) + "\n", encoding="utf-8")
    print(f"covered {stats.covered}/{stats.total_targets} targets with "
          f"{stats.calls_executed} calls; {len(suite.tests)} tests -> {out_dir}")
    for line in stats.diagnostics:
        print(f"warning: {line}", file=sys.stderr)
    return 2 if stats.diagnostics else 0


def cmd_parse(args) -> int:
    try:
        schema = _load_schema(args.schema, args.schema_format)
    except RpcFuzzError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    diagnostics = validate_schema(schema)
    for diagnostic in diagnostics:
        stream = sys.stderr if diagnostic.severity is Severity.ERROR else sys.stdout
        print(str(diagnostic), file=stream)
    if args.emit_json:
        print(schema_to_json(schema))
    else:
        functions = sum(len(i.functions) for i in schema.interfaces)
        print(f"ok: {len(schema.interfaces)} interface(s), {functions} function(s)")
    return 0


def cmd_replay(args) -> int:
    suite_path = Path(args.suite)
    if not suite_path.exists():
        print(f"error: no such suite file {args.suite}", file=sys.stderr)
        return 1
    machine = json.loads(suite_path.read_text(encoding="utf-8"))
    schema, transport, service = _resolve_target(args)
    auth_spec = schema.auth
    if args.auth_config:
        auth_spec = auth_spec_from_json(
            json.loads(Path(args.auth_config).read_text(encoding="utf-8")))
    elif service is not None and service.default_auth is not None:
        auth_spec = service.default_auth
    categorizer_name = args.categorizer or \
        (service.default_categorizer if service is not None else None)
    categorizer = BUILTIN_CATEGORIZERS.get(categorizer_name) \
        if categorizer_name else None
    executor = Executor(schema, transport, auth_spec=auth_spec)
    mismatches = replay_suite(machine, schema, executor, categorizer)
    for mismatch in mismatches:
        print(str(mismatch))
    print(f"{len(mismatches)} mismatch(es) over {len(machine.get('tests', []))} tests")
    return 1 if mismatches else 0


def cmd_list_harness(args) -> int:
    entries = catalog()
    if args.json:
        print(json.dumps([{"name": n, "functions": c, "description": d}
                          for n, c, d in entries], indent=2))
    else:
        for name, count, description in entries:
            print(f"{name} ({count} functions) - {description}")
    return 0


def cmd_serve_harness(args) -> int:
    service = build_harness(args.harness)
    server = serve_harness(service, args.host, args.port)
    host, port = server.server_address[:2]
    print(f"serving {args.harness} on http://{host}:{port} (ctrl-c to stop)")
    try:
        while True:
            time.sleep(3600)
    except KeyboardInterrupt:
        server.shutdown()
    return 0


def main(argv: Optional[list[str]] = None) -> int:
    parser = _build_parser()
    try:
        args = parser.parse_args(argv)
    except UsageError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    handlers = {
        "fuzz": cmd_fuzz,
        "parse": cmd_parse,
        "replay": cmd_replay,
        "list-harness": cmd_list_harness,
        "serve-harness": cmd_serve_harness,
    }
    try:
        return handlers[args.command](args)
    except UsageError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except RpcFuzzError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except FileNotFoundError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
