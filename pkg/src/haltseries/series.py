"""Exact partial sums and budgeted convergence probes.

Evaluation points are non-negative rationals standing for the modulus
``|z|``; every convergence-relevant quantity here (term ratios, root
growth, tail bounds) depends on ``|z|`` only. All partial sums and
certificates are exact rationals. Probes are three-valued: they either
produce a finite, independently re-checkable witness (of divergence or of
a violated bound) or report that everything stayed consistent up to the
given budget. Nothing in this module ever claims convergence outright.

Rate functions, which promise how many terms reach a target accuracy, are
first-class values supplied by the caller. They are trusted by
:func:`effective_partial_sum` (whose guarantee is only as honest as the
rate) and can be falsified, never verified, by :func:`check_modulus`.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction

from .coefficients import (
    CoefficientStream,
    approx_decimal,
    cached_factorial,
    format_rational,
    parse_rational,
)

__all__ = [
    "EvaluationPoint",
    "RateFunction",
    "ExpTailRate",
    "ConstantRate",
    "LinearRate",
    "TabulatedRate",
    "RateUndefinedError",
    "parse_rate_spec",
    "Verdict",
    "WitnessedDivergence",
    "WitnessedBoundViolation",
    "ConsistentUpToBudget",
    "SeriesProbeReport",
    "RootEstimateReport",
    "partial_sum",
    "prefix_sums",
    "effective_partial_sum",
    "ratio_test_probe",
    "root_estimate",
    "check_effective_criterion",
    "check_modulus",
]

_ZERO = Fraction(0)

#: Documented relative precision of root-growth estimates.
ROOT_ESTIMATE_RELATIVE_ERROR = 1e-9

#: Number of (index, partial sum) pairs sampled into probe traces.
TRACE_POINTS = 20

#: Offsets past the rate's promised index sampled by check_modulus.
MODULUS_SAMPLE_OFFSETS = (0, 1, 2, 4, 8, 16, 32)


@dataclass(frozen=True)
class EvaluationPoint:
    """The modulus ``|z| >= 0`` at which a series is probed."""

    r: Fraction

    def __post_init__(self):
        object.__setattr__(self, "r", Fraction(self.r))
        if self.r < 0:
            raise ValueError("evaluation point must be non-negative")


class RateUndefinedError(ValueError):
    """The rate function does not cover the queried (m, r)."""

    def __init__(self, m: int, r: Fraction, why: str):
        super().__init__(f"rate undefined at m={m}, r={format_rational(r)}: {why}")
        self.m = m
        self.r = r


class RateFunction:
    """Caller-supplied promise: summing ``terms_for(m, r)`` terms lands
    within ``2^-m`` of the limit at modulus ``r``. Only ever falsified."""

    def terms_for(self, m: int, r: Fraction = _ZERO) -> int:
        raise NotImplementedError

    def describe(self) -> str:
        raise NotImplementedError


@dataclass(frozen=True)
class ExpTailRate(RateFunction):
    """Rate for exponential-type series on ``r <= 1``.

    Returns the smallest N with ``2 * r^(N+1) / (N+1)! < 2^-m``, a valid
    tail bound for sum(r^n / n!) since the ratio of consecutive tail
    terms is at most 1/2 there.
    """

    def terms_for(self, m: int, r: Fraction = _ZERO) -> int:
        if m < 0:
            raise RateUndefinedError(m, r, "precision exponent must be non-negative")
        r = Fraction(r)
        if r > 1:
            raise RateUndefinedError(m, r, "only declared for r <= 1")
        # 2 * r^(N+1) / (N+1)! < 2^-m  <=>  2^(m+1) * num^(N+1) < (N+1)! * den^(N+1)
        num, den = r.numerator, r.denominator
        lhs = 2 ** (m + 1) * num
        rhs = den
        n = 0
        while True:
            if lhs < rhs * cached_factorial(n + 1):
                return n
            n += 1
            lhs *= num
            rhs *= den

    def describe(self) -> str:
        return "exp_tail"


@dataclass(frozen=True)
class ConstantRate(RateFunction):
    value: int

    def __post_init__(self):
        if self.value < 0:
            raise ValueError("constant rate must be non-negative")

    def terms_for(self, m: int, r: Fraction = _ZERO) -> int:
        return self.value

    def describe(self) -> str:
        return f"constant:{self.value}"


@dataclass(frozen=True)
class LinearRate(RateFunction):
    """``terms_for(m) = slope * m + offset``."""

    slope: int
    offset: int

    def __post_init__(self):
        if self.slope < 0 or self.offset < 0:
            raise ValueError("linear rate coefficients must be non-negative")

    def terms_for(self, m: int, r: Fraction = _ZERO) -> int:
        return self.slope * m + self.offset

    def describe(self) -> str:
        return f"linear:{self.slope}:{self.offset}"


@dataclass(frozen=True)
class TabulatedRate(RateFunction):
    """Explicit rows ``(m, r_bound, N)``.

    A query (m, r) is served by every row with ``row m >= m`` and
    ``r <= r_bound`` (a promise for higher precision or a larger modulus
    covers lower ones); the smallest such N is returned. This lookup makes
    the answer automatically nondecreasing in m.
    """

    rows: tuple[tuple[int, Fraction, int], ...]

    def __post_init__(self):
        rows = tuple(
            (int(m), Fraction(r_bound), int(n)) for m, r_bound, n in self.rows
        )
        object.__setattr__(self, "rows", rows)
        for m, r_bound, n in rows:
            if m < 0 or n < 0 or r_bound < 0:
                raise ValueError("tabulated rate entries must be non-negative")

    def terms_for(self, m: int, r: Fraction = _ZERO) -> int:
        r = Fraction(r)
        candidates = [n for row_m, r_bound, n in self.rows if row_m >= m and r <= r_bound]
        if not candidates:
            raise RateUndefinedError(m, r, "no tabulated row covers the query")
        return min(candidates)

    def describe(self) -> str:
        body = ";".join(
            f"{m},{format_rational(rb)},{n}" for m, rb, n in self.rows
        )
        return f"table:{body}"


def parse_rate_spec(text: str) -> RateFunction:
    """Parse a rate description.

    Forms: ``exp_tail``, ``constant:N``, ``linear:SLOPE:OFFSET`` and
    ``table:M,RBOUND,N[;M,RBOUND,N...]``.
    """
    parts = text.strip().split(":", 1)
    kind = parts[0].lower().replace("-", "_")
    if kind == "exp_tail":
        if len(parts) > 1:
            raise ValueError("exp_tail takes no parameters")
        return ExpTailRate()
    if kind == "constant":
        if len(parts) != 2 or not parts[1].isdigit():
            raise ValueError("expected constant:N")
        return ConstantRate(int(parts[1]))
    if kind == "linear":
        fields = text.strip().split(":")
        if len(fields) != 3 or not fields[1].isdigit() or not fields[2].isdigit():
            raise ValueError("expected linear:SLOPE:OFFSET")
        return LinearRate(int(fields[1]), int(fields[2]))
    if kind == "table":
        if len(parts) != 2:
            raise ValueError("expected table:M,RBOUND,N[;...]")
        rows = []
        for chunk in parts[1].split(";"):
            cols = chunk.split(",")
            if len(cols) != 3 or not cols[0].isdigit() or not cols[2].isdigit():
                raise ValueError(f"bad table row {chunk!r}, expected M,RBOUND,N")
            rows.append((int(cols[0]), parse_rational(cols[1]), int(cols[2])))
        return TabulatedRate(tuple(rows))
    raise ValueError(f"unknown rate kind {parts[0]!r}")


# ---------------------------------------------------------------------------
# Verdicts and reports
# ---------------------------------------------------------------------------


class Verdict:
    """Three-valued probe outcome; see the concrete subclasses."""

    kind = "verdict"


@dataclass(frozen=True)
class WitnessedDivergence(Verdict):
    """Term ratios crossed the threshold at ``index`` and stayed there
    through every later sampled ratio within the budget."""

    index: int
    ratio: Fraction
    threshold: Fraction

    kind = "WITNESSED_DIVERGENCE"


@dataclass(frozen=True, eq=False)
class WitnessedBoundViolation(Verdict):
    """A claimed bound failed; ``detail`` holds the exact violated values."""

    detail: dict

    kind = "WITNESSED_BOUND_VIOLATION"


@dataclass(frozen=True)
class ConsistentUpToBudget(Verdict):
    """No witness within the budget. Not a convergence claim."""

    budget: int

    kind = "CONSISTENT_UP_TO_BUDGET"


@dataclass(frozen=True, eq=False)
class SeriesProbeReport:
    """Outcome of a budgeted probe.

    ``witness`` is an (index, value) pair exactly when the verdict is a
    witness; ``trace`` holds sampled (index, exact partial sum) pairs.
    """

    verdict: Verdict
    witness: tuple[int, Fraction] | None
    trace: tuple[tuple[int, Fraction], ...]
    budget_used: int

    def __post_init__(self):
        has_witness = not isinstance(self.verdict, ConsistentUpToBudget)
        if has_witness != (self.witness is not None):
            raise ValueError("witness must be present iff the verdict is a witness")

    def to_text(self) -> str:
        lines = [f"verdict: {self.verdict.kind}", f"budget: {self.budget_used}"]
        if self.witness is not None:
            index, value = self.witness
            lines.append(f"witness index: {index}")
            lines.append(
                f"witness value: {format_rational(value)}"
                f" (approx {approx_decimal(value)})"
            )
        for key, value in sorted(_verdict_detail(self.verdict).items()):
            lines.append(f"{key}: {_format_value(value)}")
        if self.trace:
            lines.append(f"trace (first {len(self.trace)}):")
            for n, s in self.trace:
                lines.append(f"  S_{n} = {format_rational(s)}")
        return "\n".join(lines) + "\n"

    def to_kv(self) -> str:
        pairs = [("verdict", self.verdict.kind), ("budget", str(self.budget_used))]
        if self.witness is not None:
            index, value = self.witness
            pairs.append(("witness_index", str(index)))
            pairs.append(("witness_value", format_rational(value)))
        for key, value in sorted(_verdict_detail(self.verdict).items()):
            pairs.append((key, _format_value(value)))
        for n, s in self.trace:
            pairs.append((f"trace.{n}", format_rational(s)))
        return "\n".join(f"{k}={v}" for k, v in pairs) + "\n"


def _verdict_detail(verdict: Verdict) -> dict:
    if isinstance(verdict, WitnessedDivergence):
        return {"ratio": verdict.ratio, "threshold": verdict.threshold}
    if isinstance(verdict, WitnessedBoundViolation):
        return dict(verdict.detail)
    return {}


def _format_value(value) -> str:
    if isinstance(value, Fraction):
        return format_rational(value)
    return str(value)


@dataclass(frozen=True)
class RootEstimateReport:
    """Per-index estimates of ``|a_n|^(1/n)`` plus a limsup proxy.

    Estimates carry the documented relative error bound; the proxy is the
    maximum over the trailing half of the indices and is a diagnostic, not
    a claim about the true limsup. ``implied_radius`` is its reciprocal
    (infinity when the proxy is zero).
    """

    estimates: tuple[tuple[int, float], ...]
    limsup_proxy: float
    implied_radius: float
    relative_error: float = ROOT_ESTIMATE_RELATIVE_ERROR


# ---------------------------------------------------------------------------
# Exact summation
# ---------------------------------------------------------------------------


def partial_sum(stream: CoefficientStream, point: EvaluationPoint, upto: int) -> Fraction:
    """Exact ``sum(a_n * r^n for n in 0..upto)`` via a running power."""
    if upto < 0:
        raise ValueError("partial sum index must be non-negative")
    r = point.r
    total = _ZERO
    power = Fraction(1)
    for n in range(upto + 1):
        a = stream.at(n)
        if a:
            total += a * power
        power *= r
    return total


def prefix_sums(stream: CoefficientStream, point: EvaluationPoint, upto: int) -> list[Fraction]:
    """All exact partial sums ``S_0..S_upto`` in one incremental pass."""
    r = point.r
    sums: list[Fraction] = []
    total = _ZERO
    power = Fraction(1)
    for n in range(upto + 1):
        a = stream.at(n)
        if a:
            total += a * power
        power *= r
        sums.append(total)
    return sums


def effective_partial_sum(
    stream: CoefficientStream,
    point: EvaluationPoint,
    m: int,
    rate: RateFunction,
) -> tuple[Fraction, int]:
    """Sum the number of terms the rate prescribes for accuracy ``2^-m``.

    Returns (value, terms_used). The accuracy guarantee is exactly as
    honest as the supplied rate function; use :func:`check_modulus` to
    hunt for dishonest rates.
    """
    if m < 0:
        raise ValueError("precision exponent must be non-negative")
    upto = rate.terms_for(m, point.r)
    return partial_sum(stream, point, upto), upto


# ---------------------------------------------------------------------------
# Probes
# ---------------------------------------------------------------------------


def _trace_indices(budget: int) -> list[int]:
    step = max(1, budget // (TRACE_POINTS - 1))
    picks = list(range(0, budget + 1, step))
    if picks[-1] != budget:
        picks.append(budget)
    return picks[:TRACE_POINTS]


def ratio_test_probe(
    stream: CoefficientStream,
    point: EvaluationPoint,
    threshold: Fraction,
    budget: int,
) -> SeriesProbeReport:
    """Scan term ratios for a persistent threshold crossing.

    For every n in ``0..budget`` with both ``a_n`` and ``a_{n+1}`` nonzero
    the exact ratio ``|a_{n+1}| * r / |a_n|`` is compared against the
    threshold. The verdict is a divergence witness at the first index from
    which every later sampled ratio (up to the budget) also clears the
    threshold; one large ratio on its own proves nothing. Indices where
    either term vanishes are not sampled and do not interrupt a run.
    """
    threshold = Fraction(threshold)
    if threshold <= 1:
        raise ValueError("threshold must exceed 1")
    if budget < 1:
        raise ValueError("budget must be at least 1")
    r = point.r
    rn, rd = r.numerator, r.denominator
    tn, td = threshold.numerator, threshold.denominator

    # The trace covers the first TRACE_POINTS partial sums only; spanning
    # the whole scan would drag enormous exact sums through streams whose
    # terms explode (factorial tails at small r).
    trace: list[tuple[int, Fraction]] = []
    total = _ZERO
    power = Fraction(1)

    candidate: int | None = None
    current = stream.at(0)
    for n in range(budget + 1):
        nxt = stream.at(n + 1)
        if current != 0 and nxt != 0:
            # |a_{n+1}| * r / |a_n| >= threshold, by integer cross-multiplication
            lhs = abs(nxt.numerator) * rn * current.denominator * td
            rhs = tn * rd * abs(current.numerator) * nxt.denominator
            if lhs >= rhs:
                if candidate is None:
                    candidate = n
            else:
                candidate = None
        if n < TRACE_POINTS:
            if current:
                total += current * power
            power *= r
            trace.append((n, total))
        current = nxt

    if candidate is None:
        return SeriesProbeReport(
            verdict=ConsistentUpToBudget(budget),
            witness=None,
            trace=tuple(trace),
            budget_used=budget,
        )
    ratio = abs(stream.at(candidate + 1)) * r / abs(stream.at(candidate))
    return SeriesProbeReport(
        verdict=WitnessedDivergence(index=candidate, ratio=ratio, threshold=threshold),
        witness=(candidate, ratio),
        trace=tuple(trace),
        budget_used=budget,
    )


def _ln_int(x: int) -> float:
    """Natural log of a positive integer of any size."""
    if x.bit_length() <= 900:
        return math.log(x)
    shift = x.bit_length() - 64
    return math.log(x >> shift) + shift * math.log(2.0)


def _root_growth(value: Fraction, n: int) -> float:
    """``|value|^(1/n)`` within the documented relative error."""
    if value == 0:
        return 0.0
    log_mag = _ln_int(abs(value.numerator)) - _ln_int(value.denominator)
    return math.exp(log_mag / n)


def root_estimate(stream: CoefficientStream, n_max: int) -> RootEstimateReport:
    """Estimate ``|a_n|^(1/n)`` for n in ``1..n_max``.

    Magnitudes are taken through integer logarithms, so the estimates are
    within ``ROOT_ESTIMATE_RELATIVE_ERROR`` relatively; zero terms report
    an estimate of exactly 0. The limsup proxy is the maximum over the
    trailing half of the computed indices.
    """
    if n_max < 1:
        raise ValueError("n_max must be at least 1")
    estimates = tuple(
        (n, _root_growth(stream.at(n), n)) for n in range(1, n_max + 1)
    )
    tail_from = n_max // 2 + 1
    tail = [est for n, est in estimates if n >= tail_from] or [est for _, est in estimates]
    proxy = max(tail)
    radius = math.inf if proxy == 0.0 else 1.0 / proxy
    return RootEstimateReport(estimates=estimates, limsup_proxy=proxy, implied_radius=radius)


def check_effective_criterion(
    stream: CoefficientStream,
    m_rate: RateFunction,
    radius: Fraction,
    k_max: int,
    n_budget: int,
) -> SeriesProbeReport:
    """Falsify the effective-growth bound ``|a_n|^(1/n) < 1/R + 2^-k``.

    For each k up to ``k_max`` the bound is checked for every n from the
    rate's promised start index up to ``n_budget``. Float estimates only
    screen candidates; a violation is reported solely when the exact
    comparison ``|a_n| >= (1/R + 2^-k)^n`` confirms it, so the certificate
    re-checks exactly. Consistency is falsification-only evidence and
    proves nothing about effectiveness.
    """
    radius = Fraction(radius)
    if radius <= 0:
        raise ValueError("radius must be positive")
    if k_max < 0 or n_budget < 1:
        raise ValueError("k_max must be >= 0 and n_budget >= 1")
    report = root_estimate(stream, n_budget)
    ests = dict(report.estimates)
    inv_radius = 1 / radius
    for k in range(k_max + 1):
        bound = inv_radius + Fraction(1, 2 ** k)
        bound_f = float(bound)
        start = max(m_rate.terms_for(k), 1)
        bound_power = bound ** start if start <= n_budget else None
        for n in range(start, n_budget + 1):
            # Screen generously in floats, then confirm exactly.
            if ests[n] * (1 + 1e-6) >= bound_f:
                magnitude = abs(stream.at(n))
                if magnitude >= bound_power:
                    detail = {
                        "k": k,
                        "n": n,
                        "coefficient_abs": magnitude,
                        "bound": bound,
                    }
                    return SeriesProbeReport(
                        verdict=WitnessedBoundViolation(detail),
                        witness=(n, magnitude),
                        trace=(),
                        budget_used=n_budget,
                    )
            bound_power *= bound
    return SeriesProbeReport(
        verdict=ConsistentUpToBudget(n_budget),
        witness=None,
        trace=(),
        budget_used=n_budget,
    )


def check_modulus(
    stream: CoefficientStream,
    point: EvaluationPoint,
    claimed_limit: Fraction,
    rate: RateFunction,
    n_max: int,
) -> SeriesProbeReport:
    """Falsify a claimed convergence rate toward a claimed limit.

    For each precision exponent n up to ``n_max`` the partial sum is
    evaluated at the promised index ``e(n)`` and at fixed sample offsets
    beyond it, checking ``|S_k - limit| < 2^-n`` exactly. The first
    failure is returned with its exact certificate.
    """
    claimed_limit = Fraction(claimed_limit)
    if n_max < 0:
        raise ValueError("n_max must be non-negative")
    promised = [rate.terms_for(n, point.r) for n in range(n_max + 1)]
    max_k = max(k0 + MODULUS_SAMPLE_OFFSETS[-1] for k0 in promised)
    sums = prefix_sums(stream, point, max_k)
    trace = tuple((k, sums[k]) for k in _trace_indices(max_k) if k < len(sums))[:TRACE_POINTS]
    for n in range(n_max + 1):
        tolerance = Fraction(1, 2 ** n)
        for offset in MODULUS_SAMPLE_OFFSETS:
            k = promised[n] + offset
            distance = abs(sums[k] - claimed_limit)
            if distance >= tolerance:
                detail = {
                    "precision_exponent": n,
                    "terms": k,
                    "partial_sum": sums[k],
                    "distance": distance,
                    "tolerance": tolerance,
                }
                return SeriesProbeReport(
                    verdict=WitnessedBoundViolation(detail),
                    witness=(k, sums[k]),
                    trace=trace,
                    budget_used=n_max,
                )
    return SeriesProbeReport(
        verdict=ConsistentUpToBudget(n_max),
        witness=None,
        trace=trace,
        budget_used=n_max,
    )
