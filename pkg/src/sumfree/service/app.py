"""FastAPI service exposing the construction operations as JSON endpoints.

Every endpoint is a pure function of its request body; the CLI calls these
handlers directly in local mode and over HTTP in --server mode.
"""

from __future__ import annotations

import math
from contextlib import contextmanager

from fastapi import FastAPI, HTTPException

from ..apfree import WindowOverflow, build_apfree, verify_apfree
from ..construction import (AuditFailed, EvenModulus, InstanceTooLarge,
                            expectation_audit, run_pipeline, verify_sum_free)
from ..core import solve_theta
from ..rng import SplitMix64
from ..triples import (InfeasibleRounding, IterationLimitExceeded,
                       marginal_counts, round_to_lattice, solve_pi)
from .models import (BehrendRequest, BehrendResponse, ConstructRequest,
                     ExpectRequest, ExpectResponse, OrbitOut, PiRequest,
                     PiResponse, TableRequest, TableResponse, TableRow,
                     ThetaRequest, ThetaResponse, TripleSetDocument,
                     VerifyResponse, document_from_result,
                     triple_set_from_document)

app = FastAPI(title="sumfree", version="0.1.0",
              description="Constructs and verifies sum-free triple families in C_q^n.")

_DOMAIN_ERRORS = (ValueError, InstanceTooLarge, WindowOverflow, EvenModulus,
                  InfeasibleRounding, IterationLimitExceeded)


@contextmanager
def _domain_errors():
    try:
        yield
    except _DOMAIN_ERRORS as exc:
        raise HTTPException(status_code=400, detail=str(exc)) from exc


@app.get("/health")
def health() -> dict:
    return {"status": "ok"}


@app.post("/theta", response_model=ThetaResponse)
def theta_endpoint(req: ThetaRequest) -> ThetaResponse:
    with _domain_errors():
        sol = solve_theta(req.q)
    return ThetaResponse(q=sol.q, rho=sol.rho, theta=sol.theta,
                         psi=list(sol.psi.probs))


@app.post("/pi", response_model=PiResponse)
def pi_endpoint(req: PiRequest) -> PiResponse:
    with _domain_errors():
        pi = solve_pi(req.q, req.tol)
        orbits = [OrbitOut(rep=list(o.rep), size=o.size, weight=w)
                  for o, w in zip(pi.space.orbits, pi.orbit_weights)]
        marginal = list(pi.marginal().probs)
        n = None
        counts = None
        if req.n is not None:
            lattice = round_to_lattice(pi, req.n)
            for orbit, c in zip(orbits, lattice.orbit_counts):
                orbit.count = c
            counts = list(marginal_counts(lattice).counts)
            n = req.n
    return PiResponse(q=req.q, orbits=orbits, marginal=marginal,
                      n=n, marginal_counts=counts)


@app.post("/behrend", response_model=BehrendResponse)
def behrend_endpoint(req: BehrendRequest) -> BehrendResponse:
    with _domain_errors():
        s = build_apfree(req.p, req.seed)
        witness = verify_apfree(s)
        if witness is not None:
            raise RuntimeError(f"generator produced a progression: {witness}")
    return BehrendResponse(p=s.p, size=len(s.members), members=list(s.members))


@app.post("/construct", response_model=TripleSetDocument)
def construct_endpoint(req: ConstructRequest) -> TripleSetDocument:
    with _domain_errors():
        result = run_pipeline(req.q, req.n, req.seed)
    return document_from_result(result.triple_set, result.report)


@app.post("/verify", response_model=VerifyResponse)
def verify_endpoint(doc: TripleSetDocument) -> VerifyResponse:
    with _domain_errors():
        witness = verify_sum_free(triple_set_from_document(doc))
    if witness is None:
        return VerifyResponse(ok=True)
    return VerifyResponse(ok=False, witness=witness)


@app.post("/expect", response_model=ExpectResponse)
def expect_endpoint(req: ExpectRequest) -> ExpectResponse:
    with _domain_errors():
        try:
            report = expectation_audit(req.q, req.n, req.seeds, req.seed)
        except AuditFailed as failure:
            report = failure.report
    return ExpectResponse(q=report.q, n=report.n, seeds=report.seeds, p=report.p,
                          s_size=report.s_size, w_count=report.w_count,
                          v_count=report.v_count,
                          expected_v_prime=report.expected_v_prime,
                          v_prime_mean=report.v_prime_mean,
                          v_prime_se=report.v_prime_se,
                          v_double_prime_mean=report.v_double_prime_mean,
                          v_double_prime_se=report.v_double_prime_se,
                          v_prime_ok=report.v_prime_ok,
                          v_double_prime_ok=report.v_double_prime_ok)


@app.post("/table", response_model=TableResponse)
def table_endpoint(req: TableRequest) -> TableResponse:
    values = [n for n in range(req.n_min, req.n_max + 1) if n % 3 == 0]
    if not values:
        raise HTTPException(status_code=400,
                            detail="no multiple of 3 in [n_min, n_max]")
    with _domain_errors():
        log_theta = math.log(solve_theta(req.q).theta)
        root = SplitMix64(req.seed)
        rows = []
        for n in values:
            sizes = []
            report = None
            for _ in range(req.seeds_per_n):
                result = run_pipeline(req.q, n, root.next_u64())
                report = result.report
                sizes.append(report.v_double_prime_size)
            best = max(sizes)
            rows.append(TableRow(
                n=n, seeds=req.seeds_per_n, p=report.p, s_size=report.s_size,
                w_count=report.w_count, v_count=report.v_count,
                best_v_double_prime=best,
                mean_v_double_prime=sum(sizes) / len(sizes),
                log_best_over_n=math.log(best) / n if best > 0 else None,
                log_theta=log_theta, log_lower=report.log_lower,
                log_upper=report.log_upper))
    return TableResponse(q=req.q, rows=rows)
