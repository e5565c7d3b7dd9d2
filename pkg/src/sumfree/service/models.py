"""Request/response schemas for the service and the on-disk document format.

TripleSetDocument is the single serialization of a constructed family: the
CLI writes it to disk, the verify endpoint consumes it, and it round-trips
through `triple_set_from_document` without loss.
"""

from __future__ import annotations

from pydantic import BaseModel, Field, field_validator

from ..construction import RunReport, TripleSet

LOG_LOWER_NOTE = "log_lower omits the unspecified O(log n) correction"


def _require_multiple_of_three(n: int | None) -> int | None:
    if n is not None and n % 3 != 0:
        raise ValueError("n must be a multiple of 3")
    return n


class ThetaRequest(BaseModel):
    q: int = Field(ge=2)


class ThetaResponse(BaseModel):
    q: int
    rho: float
    theta: float
    psi: list[float]


class PiRequest(BaseModel):
    q: int = Field(ge=2)
    n: int | None = Field(default=None, gt=0)
    tol: float = Field(default=1e-10, gt=0)

    _n_mult3 = field_validator("n")(_require_multiple_of_three)


class OrbitOut(BaseModel):
    rep: list[int]
    size: int
    weight: float
    count: int | None = None


class PiResponse(BaseModel):
    q: int
    orbits: list[OrbitOut]
    marginal: list[float]
    n: int | None = None
    marginal_counts: list[int] | None = None


class BehrendRequest(BaseModel):
    p: int = Field(ge=3)
    seed: int = 0


class BehrendResponse(BaseModel):
    p: int
    size: int
    members: list[int]


class ConstructRequest(BaseModel):
    q: int = Field(ge=2)
    n: int = Field(gt=0)
    seed: int = 0

    _n_mult3 = field_validator("n")(_require_multiple_of_three)


class RunReportOut(BaseModel):
    q: int
    n: int
    seed: int
    p: int
    s_size: int
    w_count: int
    v_count: int
    v_mode: str
    v_prime_size: int
    v_double_prime_size: int
    log_lower: float
    log_upper: float
    log_lower_note: str = LOG_LOWER_NOTE


class TripleOut(BaseModel):
    a: list[int]
    b: list[int]
    c: list[int]


class TripleSetDocument(BaseModel):
    q: int = Field(ge=2)
    n: int = Field(gt=0)
    target: list[int]
    triples: list[TripleOut]
    report: RunReportOut


class VerifyResponse(BaseModel):
    ok: bool
    witness: tuple[int, int, int] | None = None


class ExpectRequest(BaseModel):
    q: int = Field(ge=2)
    n: int = Field(gt=0)
    seeds: int = Field(ge=30)
    seed: int = 0

    _n_mult3 = field_validator("n")(_require_multiple_of_three)


class ExpectResponse(BaseModel):
    q: int
    n: int
    seeds: int
    p: int
    s_size: int
    w_count: int
    v_count: int
    expected_v_prime: float
    v_prime_mean: float
    v_prime_se: float
    v_double_prime_mean: float
    v_double_prime_se: float
    v_prime_ok: bool
    v_double_prime_ok: bool


class TableRequest(BaseModel):
    q: int = Field(ge=2)
    n_min: int = Field(gt=0)
    n_max: int = Field(gt=0)
    seeds_per_n: int = Field(default=1, ge=1)
    seed: int = 0


class TableRow(BaseModel):
    n: int
    seeds: int
    p: int
    s_size: int
    w_count: int
    v_count: int
    best_v_double_prime: int
    mean_v_double_prime: float
    log_best_over_n: float | None
    log_theta: float
    log_lower: float
    log_upper: float


class TableResponse(BaseModel):
    q: int
    rows: list[TableRow]


def report_to_model(report: RunReport) -> RunReportOut:
    return RunReportOut(q=report.q, n=report.n, seed=report.seed, p=report.p,
                        s_size=report.s_size, w_count=report.w_count,
                        v_count=report.v_count, v_mode=report.v_mode,
                        v_prime_size=report.v_prime_size,
                        v_double_prime_size=report.v_double_prime_size,
                        log_lower=report.log_lower, log_upper=report.log_upper)


def document_from_result(ts: TripleSet, report: RunReport) -> TripleSetDocument:
    triples = [TripleOut(a=list(a), b=list(b), c=list(c)) for a, b, c in ts.triples]
    return TripleSetDocument(q=ts.q, n=ts.n, target=list(ts.target),
                             triples=triples, report=report_to_model(report))


def triple_set_from_document(doc: TripleSetDocument) -> TripleSet:
    triples = tuple((tuple(t.a), tuple(t.b), tuple(t.c)) for t in doc.triples)
    return TripleSet(q=doc.q, n=doc.n, target=tuple(doc.target), triples=triples)
