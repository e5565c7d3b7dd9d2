"""Command-line front end.

Each subcommand builds the same request model the HTTP service accepts and
either calls the endpoint handler in-process (default) or POSTs it to a
running service (--server URL).  Exit codes: 0 success, 1 verification or
audit failure, 2 usage/parse errors.
"""

from __future__ import annotations

import argparse
import json
import sys
import time
from pathlib import Path

import httpx
from pydantic import BaseModel, ValidationError

from .apfree import WindowOverflow
from .construction import EvenModulus, InstanceTooLarge
from .service import app as service_app
from .service.models import (BehrendRequest, BehrendResponse, ConstructRequest,
                             ExpectRequest, ExpectResponse, PiRequest,
                             PiResponse, TableRequest, TableResponse,
                             ThetaRequest, ThetaResponse, TripleSetDocument,
                             VerifyResponse)
from .triples import InfeasibleRounding, IterationLimitExceeded

_USAGE_ERRORS = (ValueError, ValidationError, InstanceTooLarge, WindowOverflow,
                 EvenModulus, InfeasibleRounding, IterationLimitExceeded)

_LOCAL_HANDLERS = {
    "/theta": service_app.theta_endpoint,
    "/pi": service_app.pi_endpoint,
    "/behrend": service_app.behrend_endpoint,
    "/construct": service_app.construct_endpoint,
    "/verify": service_app.verify_endpoint,
    "/expect": service_app.expect_endpoint,
    "/table": service_app.table_endpoint,
}


class RemoteError(RuntimeError):
    """Service answered with an error status."""


def _make_client(server: str) -> httpx.Client:
    return httpx.Client(base_url=server, timeout=600.0)


def _call(server: str | None, path: str, request: BaseModel, response_type):
    """Dispatch one operation locally or over HTTP; returns the response model."""
    if server is None:
        from fastapi import HTTPException
        try:
            result = _LOCAL_HANDLERS[path](request)
        except HTTPException as exc:
            raise ValueError(exc.detail) from exc
        if isinstance(result, response_type):
            return result
        return response_type.model_validate(result)
    with _make_client(server) as client:
        reply = client.post(path, json=request.model_dump(mode="json"))
        if reply.status_code >= 400:
            raise RemoteError(f"{path} -> HTTP {reply.status_code}: {reply.text}")
        return response_type.model_validate(reply.json())


def _emit(model: BaseModel) -> None:
    print(model.model_dump_json(indent=2))


def cmd_theta(args) -> int:
    resp = _call(args.server, "/theta", ThetaRequest(q=args.q), ThetaResponse)
    _emit(resp)
    return 0


def cmd_pi(args) -> int:
    req = PiRequest(q=args.q, n=args.n, tol=args.tol)
    _emit(_call(args.server, "/pi", req, PiResponse))
    return 0


def cmd_behrend(args) -> int:
    req = BehrendRequest(p=args.p, seed=args.seed)
    _emit(_call(args.server, "/behrend", req, BehrendResponse))
    return 0


def cmd_construct(args) -> int:
    req = ConstructRequest(q=args.q, n=args.n, seed=args.seed)
    started = time.perf_counter()
    doc = _call(args.server, "/construct", req, TripleSetDocument)
    wall = time.perf_counter() - started
    out_path = Path(args.out)
    out_path.write_text(doc.model_dump_json(indent=2) + "\n", encoding="utf-8")
    summary = {"out": str(out_path), "wall_seconds": wall,
               "report": doc.report.model_dump()}
    print(json.dumps(summary, indent=2))
    return 0


def cmd_verify(args) -> int:
    try:
        text = Path(args.path).read_text(encoding="utf-8")
        doc = TripleSetDocument.model_validate_json(text)
    except (OSError, ValueError, ValidationError) as exc:
        print(f"cannot read triple-set document: {exc}", file=sys.stderr)
        return 2
    resp = _call(args.server, "/verify", doc, VerifyResponse)
    _emit(resp)
    return 0 if resp.ok else 1


def cmd_expect(args) -> int:
    req = ExpectRequest(q=args.q, n=args.n, seeds=args.seeds, seed=args.seed)
    resp = _call(args.server, "/expect", req, ExpectResponse)
    _emit(resp)
    return 0 if resp.v_prime_ok and resp.v_double_prime_ok else 1


def cmd_table(args) -> int:
    req = TableRequest(q=args.q, n_min=args.n_min, n_max=args.n_max,
                       seeds_per_n=args.seeds, seed=args.seed)
    resp = _call(args.server, "/table", req, TableResponse)
    columns = ["n", "seeds", "p", "s_size", "w_count", "v_count",
               "best_v_double_prime", "mean_v_double_prime",
               "log_best_over_n", "log_theta", "log_lower", "log_upper"]
    print("\t".join(columns))
    for row in resp.rows:
        data = row.model_dump()
        print("\t".join("nan" if data[c] is None else repr(data[c])
                        if isinstance(data[c], float) else str(data[c])
                        for c in columns))
    return 0


def cmd_serve(args) -> int:
    import uvicorn

    uvicorn.run(service_app.app, host=args.host, port=args.port)
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="sumfree",
        description="Construct and verify sum-free triple families in C_q^n.")
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p: argparse.ArgumentParser) -> None:
        p.add_argument("--server", default=None,
                       help="base URL of a running service; default runs in-process")

    p = sub.add_parser("theta", help="growth-rate base for a modulus")
    p.add_argument("--q", type=int, required=True)
    common(p)
    p.set_defaults(func=cmd_theta)

    p = sub.add_parser("pi", help="symmetric distribution and optional rounding")
    p.add_argument("--q", type=int, required=True)
    p.add_argument("--n", type=int, default=None)
    p.add_argument("--tol", type=float, default=1e-10)
    common(p)
    p.set_defaults(func=cmd_pi)

    p = sub.add_parser("behrend", help="progression-free subset of F_p")
    p.add_argument("--p", type=int, required=True)
    p.add_argument("--seed", type=int, default=0)
    common(p)
    p.set_defaults(func=cmd_behrend)

    p = sub.add_parser("construct", help="run the full pipeline, write the JSON document")
    p.add_argument("--q", type=int, required=True)
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", required=True)
    common(p)
    p.set_defaults(func=cmd_construct)

    p = sub.add_parser("verify", help="re-check a written document; exit 1 on violation")
    p.add_argument("path")
    common(p)
    p.set_defaults(func=cmd_verify)

    p = sub.add_parser("expect", help="Monte Carlo audit of the filter-size moments")
    p.add_argument("--q", type=int, required=True)
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--seeds", type=int, required=True)
    p.add_argument("--seed", type=int, default=0)
    common(p)
    p.set_defaults(func=cmd_expect)

    p = sub.add_parser("table", help="best family size against the reference bounds, TSV")
    p.add_argument("--q", type=int, required=True)
    p.add_argument("--n-min", type=int, required=True)
    p.add_argument("--n-max", type=int, required=True)
    p.add_argument("--seeds", type=int, default=1)
    p.add_argument("--seed", type=int, default=0)
    common(p)
    p.set_defaults(func=cmd_table)

    p = sub.add_parser("serve", help="run the HTTP service")
    p.add_argument("--host", default="127.0.0.1")
    p.add_argument("--port", type=int, default=8000)
    p.set_defaults(func=cmd_serve)

    return parser


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    try:
        return args.func(args)
    except _USAGE_ERRORS as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except RemoteError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


def entrypoint() -> None:
    sys.exit(main())


if __name__ == "__main__":
    entrypoint()
