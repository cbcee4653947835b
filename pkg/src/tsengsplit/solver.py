"""Double-inertial relaxed forward-backward-forward iteration engine.

One iteration, from the pair ``(x_prev, x_curr)`` and the current step
``lam``:

* extrapolate twice: ``w = x + alpha_n*(x - x_prev)`` and
  ``z = x + beta_n*(x - x_prev)``;
* backward step at the first point: ``y = J(w - lam*A(w), lam)``;
* if ``w`` and ``y`` coincide (to a relative threshold), ``y`` solves the
  inclusion and the run stops;
* otherwise blend the corrected point with the second extrapolation:
  ``x_next = (1 - theta_n)*z + theta_n*(y - lam*(A(y) - A(w)))``;
* update the step from the observed ratio ``||w - y|| / ||A(w) - A(y)||``
  so no Lipschitz constant is ever required:
  ``lam_next = min((mu + mu_n)*ratio, lam + p_n)``.

Each non-terminal iteration costs exactly two forward evaluations and one
resolvent evaluation.  A run is strictly sequential; concurrent runs may
share problems and schedules because those are immutable.

The module also provides empirical convergence-rate certificates checked
against a recorded :class:`SolverTrace`: a ``1/sqrt(n)`` envelope on the
best fixed-point residual and a geometric-decay check on the distance to
a known solution.
"""

from __future__ import annotations

import json
import math
import time
from dataclasses import dataclass, field

import numpy as np

from .linalg import NonFiniteError, Vector, as_vector, norm
from .operators import ForwardOperator, Resolvent
from .schedules import ScheduleSet

__all__ = [
    "Problem",
    "SolverConfig",
    "IterationState",
    "TraceRow",
    "SolverTrace",
    "SolverError",
    "DivergenceError",
    "DescentViolationError",
    "extrapolate",
    "step_size_update",
    "tseng_step",
    "solve",
    "RateReport",
    "certify_sqrt_rate",
    "certify_linear_rate",
    "trace_to_csv",
    "write_trace_csv",
    "read_trace_csv",
    "write_trace_jsonl",
]

STOP_RULES = ("step_diff", "iterate_norm", "residual")
STATUS_EXACT = "exact_solution"
STATUS_TOL = "tolerance_met"
STATUS_BUDGET = "max_iters"

# ||w - y|| below this relative threshold counts as an exact fixed point
EXACT_STOP_REL = 1e-13
# ||A(w) - A(y)|| below this relative threshold takes the degenerate
# step-update branch instead of dividing
TIE_REL = 1e-14


class SolverError(RuntimeError):
    pass


class DivergenceError(SolverError):
    """An iterate left the finite floats; carries the last finite trace row."""

    def __init__(self, message: str, last_row: "TraceRow | None" = None):
        super().__init__(message)
        self.last_row = last_row


class DescentViolationError(SolverError):
    """The per-iteration descent inequality failed while being asserted."""


@dataclass(eq=False)
class Problem:
    """A monotone inclusion instance the solver can run on.

    ``known_solution`` marks oracle instances; it is verified at
    registration by checking that the solution is a fixed point of the
    forward-backward map.  ``weights`` switches every norm and inner
    product of the run to the quadrature-weighted ones.  ``x0``/``x1``
    are default initial points (zeros when omitted).
    """

    forward: ForwardOperator
    backward: Resolvent
    dimension: int
    known_solution: Vector | None = None
    weights: Vector | None = None
    x0: Vector | None = None
    x1: Vector | None = None
    label: str = ""

    def __post_init__(self):
        if self.dimension < 1:
            raise ValueError("dimension must be >= 1")
        for name in ("known_solution", "weights", "x0", "x1"):
            v = getattr(self, name)
            if v is not None:
                v = as_vector(v, name=name)
                if v.shape != (self.dimension,):
                    raise ValueError(f"{name} has shape {v.shape}, expected ({self.dimension},)")
                setattr(self, name, v)
        if self.weights is not None and not (self.weights > 0).all():
            raise ValueError("weights must be strictly positive")
        if self.known_solution is not None:
            lam = 0.1
            xs = self.known_solution
            fx = self.backward(xs - lam * self.forward(xs), lam)
            gap = norm(fx - xs, self.weights)
            if gap > 1e-8:
                raise ValueError(
                    f"known_solution fails the fixed-point check: residual {gap:.3e} at lam = {lam}"
                )

    def initial_points(self) -> tuple[Vector, Vector]:
        x0 = self.x0 if self.x0 is not None else np.zeros(self.dimension)
        x1 = self.x1 if self.x1 is not None else x0.copy()
        return x0, x1


@dataclass
class SolverConfig:
    schedules: ScheduleSet
    max_iters: int
    tol: float
    stop_rule: str = "step_diff"
    assert_descent: bool = False
    record_distance: bool = False

    def __post_init__(self):
        if self.max_iters < 1:
            raise ValueError("max_iters must be >= 1")
        if not self.tol > 0:
            raise ValueError("tol must be positive")
        if self.stop_rule not in STOP_RULES:
            raise ValueError(f"stop_rule must be one of {STOP_RULES}, got {self.stop_rule!r}")


@dataclass
class IterationState:
    x_prev: Vector
    x_curr: Vector
    lambda_n: float
    n: int

    def __post_init__(self):
        if not self.lambda_n > 0:
            raise ValueError("step size must stay positive")


@dataclass
class TraceRow:
    n: int
    lambda_n: float
    residual: float
    e_n: float
    dist: float | None
    elapsed_ms: float


@dataclass
class SolverTrace:
    """Per-iteration records plus terminal status and evaluation counters.

    ``tie_breaks`` counts iterations where the step update took the
    degenerate branch because the two forward values were numerically
    equal; a large fraction signals a threshold-sensitive run.
    """

    rows: list[TraceRow] = field(default_factory=list)
    status: str = STATUS_BUDGET
    forward_evals: int = 0
    resolvent_evals: int = 0
    tie_breaks: int = 0
    label: str = ""

    def __len__(self) -> int:
        return len(self.rows)

    def residuals(self) -> np.ndarray:
        return np.array([r.residual for r in self.rows])

    def e_values(self) -> np.ndarray:
        return np.array([r.e_n for r in self.rows])

    def lambdas(self) -> np.ndarray:
        return np.array([r.lambda_n for r in self.rows])

    def dists(self) -> np.ndarray:
        return np.array([math.nan if r.dist is None else r.dist for r in self.rows])

    def tie_break_fraction(self) -> float:
        return self.tie_breaks / len(self.rows) if self.rows else 0.0

    def summary(self) -> dict:
        return {
            "status": self.status,
            "iterations": len(self.rows),
            "final_metric": self.rows[-1].e_n if self.rows else None,
            "final_residual": self.rows[-1].residual if self.rows else None,
            "forward_evals": self.forward_evals,
            "resolvent_evals": self.resolvent_evals,
            "tie_breaks": self.tie_breaks,
            "tie_break_fraction": self.tie_break_fraction(),
            "label": self.label,
        }


def extrapolate(x_curr: Vector, x_prev: Vector, factor: float) -> Vector:
    """Inertial extrapolation ``x_curr + factor*(x_curr - x_prev)``."""
    if x_curr.shape != x_prev.shape:
        raise ValueError(f"dimension mismatch: {x_curr.shape} vs {x_prev.shape}")
    return x_curr + factor * (x_curr - x_prev)


def step_size_update(
    lambda_n: float,
    w: Vector,
    y: Vector,
    aw: Vector,
    ay: Vector,
    mu: float,
    mu_n: float,
    p_n: float,
    weights: Vector | None = None,
) -> float:
    """Self-adaptive step update from one iteration's observed points.

    Returns ``min((mu + mu_n)*||w - y||/||A(w) - A(y)||, lambda_n + p_n)``,
    falling back to ``lambda_n + p_n`` when the forward values coincide
    numerically.
    """
    if not (math.isfinite(lambda_n) and math.isfinite(mu) and math.isfinite(mu_n) and math.isfinite(p_n)):
        raise NonFiniteError("step_size_update received non-finite scalars")
    if not lambda_n > 0:
        raise ValueError("lambda_n must be positive")
    if not 0.0 < mu < 1.0:
        raise ValueError("mu must lie in (0, 1)")
    if mu_n < 0 or p_n < 0:
        raise ValueError("mu_n and p_n must be nonnegative")
    da = norm(aw - ay, weights)
    grown = lambda_n + p_n
    if da <= TIE_REL * (1.0 + norm(aw, weights)):
        return grown
    return min((mu + mu_n) * norm(w - y, weights) / da, grown)


def tseng_step(
    problem: Problem,
    state: IterationState,
    sched: ScheduleSet,
    config: SolverConfig | None = None,
    trace: SolverTrace | None = None,
) -> tuple[IterationState, TraceRow, str]:
    """Run one iteration; returns the advanced state, its trace row, and a status.

    Status is ``"exact_solution"`` when the fixed-point residual vanished
    (the answer is then ``state.x_curr`` of the returned state), else ``""``.
    When a ``trace`` is supplied its evaluation and tie-break counters are
    advanced in place.
    """
    wts = problem.weights
    n, lam = state.n, state.lambda_n
    alpha_n = sched.alpha.at(n)
    beta_n = sched.beta.at(n)
    theta_n = sched.theta.at(n)
    mu_n = sched.mu_seq.at(n)
    p_n = sched.p_seq.at(n)
    stop_rule = config.stop_rule if config is not None else "step_diff"

    w = extrapolate(state.x_curr, state.x_prev, alpha_n)
    z = extrapolate(state.x_curr, state.x_prev, beta_n)
    aw = problem.forward(w)
    y = problem.backward(w - lam * aw, lam)
    if not (np.isfinite(aw).all() and np.isfinite(y).all()):
        raise DivergenceError(f"non-finite operator value at iteration {n}")

    residual = norm(w - y, wts)
    dist_from = problem.known_solution if (
        problem.known_solution is not None and (config is None or config.record_distance)
    ) else None

    if residual <= EXACT_STOP_REL * (1.0 + norm(w, wts)):
        # y is a fixed point of the forward-backward map, hence a solution
        if trace is not None:
            trace.forward_evals += 1
            trace.resolvent_evals += 1
        if stop_rule == "iterate_norm":
            e_n = norm(y, wts)
        elif stop_rule == "residual":
            e_n = residual
        else:
            e_n = norm(y - state.x_curr, wts)
        row = TraceRow(
            n=n,
            lambda_n=lam,
            residual=residual,
            e_n=e_n,
            dist=norm(y - dist_from, wts) if dist_from is not None else None,
            elapsed_ms=0.0,
        )
        nxt = IterationState(x_prev=state.x_curr, x_curr=y, lambda_n=lam, n=n + 1)
        return nxt, row, STATUS_EXACT

    ay = problem.forward(y)
    if trace is not None:
        trace.forward_evals += 2
        trace.resolvent_evals += 1
        if norm(aw - ay, wts) <= TIE_REL * (1.0 + norm(aw, wts)):
            trace.tie_breaks += 1
    lam_next = step_size_update(lam, w, y, aw, ay, sched.mu, mu_n, p_n, weights=wts)
    corrected = y - lam * (ay - aw)
    x_next = (1.0 - theta_n) * z + theta_n * corrected
    if not (np.isfinite(x_next).all() and math.isfinite(lam_next)):
        raise DivergenceError(f"non-finite iterate at iteration {n}")

    if config is not None and config.assert_descent and problem.known_solution is not None:
        coef = 1.0 - ((sched.mu + mu_n) * lam / lam_next) ** 2
        if coef >= 0.0:
            p_star = problem.known_solution
            gap_w = norm(w - p_star, wts) ** 2
            lhs = norm(corrected - p_star, wts) ** 2
            rhs = gap_w - coef * residual**2 + 1e-8 * (1.0 + gap_w)
            if lhs > rhs:
                raise DescentViolationError(
                    f"descent inequality violated at iteration {n}: {lhs!r} > {rhs!r}"
                )

    if stop_rule == "iterate_norm":
        e_n = norm(x_next, wts)
    elif stop_rule == "residual":
        e_n = residual
    else:
        e_n = norm(x_next - state.x_curr, wts)

    row = TraceRow(
        n=n,
        lambda_n=lam,
        residual=residual,
        e_n=e_n,
        dist=norm(x_next - dist_from, wts) if dist_from is not None else None,
        elapsed_ms=0.0,
    )
    nxt = IterationState(x_prev=state.x_curr, x_curr=x_next, lambda_n=lam_next, n=n + 1)
    return nxt, row, ""


def solve(
    problem: Problem,
    config: SolverConfig,
    x0: Vector | None = None,
    x1: Vector | None = None,
) -> tuple[Vector, SolverTrace]:
    """Iterate until the stop metric reaches ``tol``, an exact solution is
    found, or the iteration budget runs out.

    Returns the final iterate and the full trace.  Deterministic: the same
    problem, config, and initial points give bit-identical traces.
    """
    sched = config.schedules
    px0, px1 = problem.initial_points()
    x0 = as_vector(x0, name="x0") if x0 is not None else px0
    x1 = as_vector(x1, name="x1") if x1 is not None else px1
    state = IterationState(x_prev=x0, x_curr=x1, lambda_n=sched.lambda1, n=1)

    trace = SolverTrace(label=problem.label)
    start = time.perf_counter()
    status = STATUS_BUDGET
    for _ in range(config.max_iters):
        try:
            state, row, step_status = tseng_step(problem, state, sched, config, trace)
        except DivergenceError as err:
            err.last_row = trace.rows[-1] if trace.rows else None
            raise
        except NonFiniteError as err:
            last = trace.rows[-1] if trace.rows else None
            raise DivergenceError(f"overflow while iterating: {err}", last_row=last) from err
        row.elapsed_ms = (time.perf_counter() - start) * 1e3
        trace.rows.append(row)
        if step_status == STATUS_EXACT:
            status = STATUS_EXACT
            break
        if row.e_n <= config.tol:
            status = STATUS_TOL
            break
    trace.status = status
    return state.x_curr, trace


# ---------------------------------------------------------------------------
# rate certificates
# ---------------------------------------------------------------------------


@dataclass
class RateReport:
    kind: str
    passed: bool
    details: dict

    def to_dict(self) -> dict:
        return {"kind": self.kind, "passed": self.passed, "details": self.details}

    def to_json(self, indent: int | None = 2) -> str:
        return json.dumps(self.to_dict(), indent=indent)


def certify_sqrt_rate(trace: SolverTrace) -> RateReport:
    """Check that the best fixed-point residual decays like ``1/sqrt(n)``.

    Let ``r_n`` be the running minimum of the residual column and
    ``s_n = r_n*sqrt(n)``.  The envelope constant is fitted on the first
    half of the trace, ``C = max s_n over n <= T/2``, and the certificate
    requires ``max s_n <= 2C`` on the second half.  Additionally the
    certificate fails when ``s_n`` grows systematically at the scale of
    ``C`` itself (every last-quarter value above every third-quarter
    value while exceeding the fit), which catches stagnating residuals
    that the doubling margin alone cannot.
    """
    t = len(trace.rows)
    if t < 50:
        raise ValueError(f"trace too short for the sqrt-rate certificate: {t} rows < 50")
    r = np.minimum.accumulate(trace.residuals())
    s = r * np.sqrt(np.arange(1, t + 1))
    half = t // 2
    c_fit = float(s[:half].max())
    second_max = float(s[half:].max())
    envelope_ok = second_max <= 2.0 * c_fit
    q3, q4 = s[half : half + (t - half) // 2], s[half + (t - half) // 2 :]
    sustained_growth = bool(q4.min() > q3.max()) and second_max > c_fit
    passed = envelope_ok and not sustained_growth
    return RateReport(
        kind="sqrt",
        passed=passed,
        details={
            "fitted_c": c_fit,
            "second_half_max": second_max,
            "envelope_ratio": second_max / c_fit if c_fit > 0 else math.inf,
            "envelope_ok": envelope_ok,
            "sustained_growth": sustained_growth,
            "rows": t,
        },
    )


def certify_linear_rate(trace: SolverTrace, q_bound: float | None = None) -> RateReport:
    """Check geometric decay of the distance to the known solution.

    Ratios ``rho_n = dist_{n+1}^2 / dist_n^2`` are computed on the tail
    (last half of the rows with distance above 1e-12).  The certificate
    passes when the geometric mean of the tail ratios is below one *and*
    the tail distance actually shrank by at least a factor of 10 (so a
    merely sublinear decay with ratios drifting up to one cannot pass).
    When ``q_bound`` is given, the report also states whether the largest
    tail ratio stays within ``q_bound + 0.05``.
    """
    d = np.array([r.dist for r in trace.rows if r.dist is not None], dtype=float)
    if d.size == 0:
        raise ValueError("trace recorded no distance-to-solution data")
    d = d[d > 1e-12]
    if d.size < 10:
        raise ValueError(f"too few usable distance rows for the linear certificate: {d.size}")
    tail = d[d.size // 2 :]
    log_ratios = 2.0 * np.diff(np.log(tail))
    rho_bar = float(np.exp(log_ratios.mean()))
    max_ratio = float(np.exp(log_ratios.max()))
    total_decay = float((tail[-1] / tail[0]) ** 2)
    passed = rho_bar < 1.0 and total_decay <= 1e-2
    within_q = None if q_bound is None else bool(max_ratio <= q_bound + 0.05)
    return RateReport(
        kind="linear",
        passed=passed,
        details={
            "rho_bar": rho_bar,
            "max_ratio": max_ratio,
            "tail_len": int(tail.size),
            "total_tail_decay": total_decay,
            "q_bound": q_bound,
            "within_q_bound": within_q,
        },
    )


# ---------------------------------------------------------------------------
# trace serialization
# ---------------------------------------------------------------------------

_CSV_HEADER = "n,lambda,residual,E_n,dist,elapsed_ms"


def _fmt(x: float | None) -> str:
    return "" if x is None else repr(float(x))


def trace_to_csv(trace: SolverTrace, measured_timing: bool = False) -> str:
    """Render the trace as CSV text.

    By default the timing column is canonicalized to zero so replays of
    the same seeded run are byte-identical; pass ``measured_timing=True``
    to keep wall-clock values.  The terminal status and evaluation
    counters ride in a ``#``-prefixed footer.
    """
    lines = [_CSV_HEADER]
    for r in trace.rows:
        ms = r.elapsed_ms if measured_timing else 0.0
        lines.append(f"{r.n},{_fmt(r.lambda_n)},{_fmt(r.residual)},{_fmt(r.e_n)},{_fmt(r.dist)},{_fmt(ms)}")
    lines.append(
        f"# status={trace.status} forward_evals={trace.forward_evals} "
        f"resolvent_evals={trace.resolvent_evals} tie_breaks={trace.tie_breaks}"
    )
    return "\n".join(lines) + "\n"


def write_trace_csv(trace: SolverTrace, path, measured_timing: bool = False) -> None:
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write(trace_to_csv(trace, measured_timing=measured_timing))


def read_trace_csv(path) -> SolverTrace:
    """Parse a trace CSV written by :func:`write_trace_csv` (lossless)."""
    trace = SolverTrace()
    with open(path, "r", encoding="utf-8") as fh:
        header = fh.readline().strip()
        if header != _CSV_HEADER:
            raise ValueError(f"unexpected trace header: {header!r}")
        for line in fh:
            line = line.strip()
            if not line:
                continue
            if line.startswith("#"):
                for part in line[1:].split():
                    key, _, val = part.partition("=")
                    if key == "status":
                        trace.status = val
                    elif key in ("forward_evals", "resolvent_evals", "tie_breaks"):
                        setattr(trace, key, int(val))
                continue
            cols = line.split(",")
            if len(cols) != 6:
                raise ValueError(f"malformed trace row: {line!r}")
            trace.rows.append(
                TraceRow(
                    n=int(cols[0]),
                    lambda_n=float(cols[1]),
                    residual=float(cols[2]),
                    e_n=float(cols[3]),
                    dist=None if cols[4] == "" else float(cols[4]),
                    elapsed_ms=float(cols[5]),
                )
            )
    return trace


def write_trace_jsonl(trace: SolverTrace, path) -> None:
    """One JSON object per row, then a summary record with the status."""
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        for r in trace.rows:
            fh.write(
                json.dumps(
                    {
                        "n": r.n,
                        "lambda": r.lambda_n,
                        "residual": r.residual,
                        "E_n": r.e_n,
                        "dist": r.dist,
                        "elapsed_ms": r.elapsed_ms,
                    }
                )
                + "\n"
            )
        fh.write(json.dumps(trace.summary()) + "\n")
