"""Rate estimation: exact reduced gradient and a projected Dai-Yuan NLCG loop.

Convention: the loop minimizes F = -J_eps (negated mean log-likelihood).
All gradients returned here are gradients of F; its orientation is pinned
by the finite-difference tests, not by any sign lore.

Feasibility alpha_j >= 0 is kept by clamping trial points at 0 and by
zeroing search-direction components that push an active coordinate
negative; the stopping test uses the projected gradient, whose norm is the
first-order optimality residual under those bound constraints.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .adjoint import AdjointHistory, solve_adjoint, terminal_condition
from .errors import LevyfitError, LineSearchError, StabilityError
from .forward import CCOperator, DensityHistory, JumpKernel, solve_forward, stability_bounds
from .likelihood import DEFAULT_FLOOR, ObjectiveValue, aic_score, evaluate_objective
from .samples import SampleSet
from .torus import ModelCoefficients, SplineBasis, TimeGrid, TorusGrid


@dataclass(frozen=True)
class CalibrationSetup:
    """Everything fixed during one fit: geometry, model, basis, initial density."""

    grid: TorusGrid
    time_grid: TimeGrid
    coeffs: ModelCoefficients
    basis: SplineBasis
    f0: np.ndarray
    eps: float = DEFAULT_FLOOR
    boot_substeps: int = 10
    xi: float = 2.0
    force: bool = False
    cc: CCOperator = field(init=False)

    def __post_init__(self):
        object.__setattr__(self, "cc", CCOperator(self.grid, self.coeffs))


@dataclass(frozen=True)
class OptimizerParams:
    """Knobs of the NLCG loop (defaults follow the standard experiment setup)."""

    alpha0: float = 0.1          # fill value of the initial rate vector
    armijo_delta: float = 0.1    # sufficient-decrease constant, in (0, 1/2)
    step_init: float = 0.5       # first trial step length
    step_shrink: float = 0.3     # backtracking factor
    max_shrinks: int = 30
    tol: float = 1e-5            # on the projected gradient norm
    max_iters: int = 500
    restart_every: int | None = None   # default 10 * n_theta

    def __post_init__(self):
        if not 0.0 < self.armijo_delta < 0.5:
            raise ValueError("armijo_delta must lie in (0, 1/2)")
        if not 0.0 < self.step_shrink < 1.0:
            raise ValueError("step_shrink must lie in (0, 1)")


@dataclass
class FitReport:
    n_theta: int
    alpha_star: np.ndarray
    j_star: float                # attained mean log-likelihood (maximized form)
    aic: float
    iterations: int
    converged: bool
    grad_norm: float             # projected-gradient norm at alpha_star
    diagnostics: dict
    trace: list = field(default_factory=list, repr=False)


def run_forward(alpha, setup: CalibrationSetup) -> DensityHistory:
    return solve_forward(setup.f0, alpha, setup.basis, setup.cc,
                         setup.time_grid, xi=setup.xi,
                         boot_substeps=setup.boot_substeps, force=setup.force)


def objective(alpha, setup: CalibrationSetup, samples: SampleSet,
              history: DensityHistory | None = None) -> tuple[ObjectiveValue, DensityHistory]:
    """Minimized-objective building block: J_eps and the forward history."""
    fwd = history if history is not None else run_forward(alpha, setup)
    return evaluate_objective(fwd.terminal, samples, setup.eps), fwd


def _rate_sensitivity_block(mult: np.ndarray, state: np.ndarray,
                            samples_matrix: np.ndarray) -> np.ndarray:
    """sum over rows of Theta @ (corr - dot), the jump-rate sensitivity core.

    For each paired row (u = multiplier level, v = state level) the
    contribution to component j is sum_k theta_jk * (sum_i u_i v_{i-k} -
    <u, v>); the inner correlations for all lags come from one FFT pass.
    """
    n = mult.shape[1]
    u_hat = np.fft.rfft(mult, axis=1)
    v_hat = np.fft.rfft(state, axis=1)
    corr = np.fft.irfft(np.conj(v_hat) * u_hat, n=n, axis=1).sum(axis=0)
    dots = float(np.einsum("ij,ij->", mult, state))
    return samples_matrix @ (corr - dots)


def gradient_from_histories(fwd: DensityHistory, adj: AdjointHistory,
                            basis: SplineBasis) -> np.ndarray:
    """Assemble dF/d(rates) from matched forward/adjoint histories.

    Each two-step level contributes with weight 2*dt*h (the jump term's
    weight in that recurrence), each Euler substep with tau*h.
    """
    dt = fwd.time_grid.dt
    tau = dt / fwd.bootstrap.shape[0]
    h = fwd.grid.h
    n_steps = fwd.time_grid.n_steps
    theta = basis.samples

    main = _rate_sensitivity_block(adj.values[2:n_steps + 1],
                                   fwd.values[1:n_steps], theta)
    boot = _rate_sensitivity_block(adj.bootstrap, fwd.bootstrap, theta)
    return h * (2.0 * dt * main + tau * boot)


def reduced_gradient(alpha, setup: CalibrationSetup, samples: SampleSet,
                     history: DensityHistory | None = None) -> np.ndarray:
    """Gradient of F = -J_eps with respect to the rates, via one adjoint sweep."""
    fwd = history if history is not None else run_forward(alpha, setup)
    data = terminal_condition(fwd.terminal, samples, eps=setup.eps)
    adj = solve_adjoint(data, alpha, setup.basis, setup.cc, setup.time_grid,
                        boot_substeps=setup.boot_substeps)
    return gradient_from_histories(fwd, adj, setup.basis)


def dai_yuan_beta(g_next: np.ndarray, g_prev: np.ndarray,
                  d_prev: np.ndarray) -> float:
    """Conjugacy coefficient <g+, g+> / <d, g+ - g>, zero on flat curvature.

    A vanishing denominator (relative to its factors) signals lost
    curvature information, so the caller restarts with steepest descent.
    """
    y = g_next - g_prev
    denom = float(d_prev @ y)
    scale = float(np.linalg.norm(d_prev) * np.linalg.norm(y))
    if abs(denom) < 1e-14 * scale or scale == 0.0:
        return 0.0
    return float(g_next @ g_next) / denom


def projected_direction(d: np.ndarray, alpha: np.ndarray) -> np.ndarray:
    """Zero direction components that push an active coordinate below zero."""
    out = d.copy()
    out[(alpha <= 0.0) & (d < 0.0)] = 0.0
    return out


def projected_gradient(g: np.ndarray, alpha: np.ndarray) -> np.ndarray:
    """First-order optimality residual under the nonnegativity bounds."""
    out = g.copy()
    active = alpha <= 0.0
    out[active] = np.minimum(g[active], 0.0)
    return out


@dataclass(frozen=True)
class LineSearchResult:
    step: float
    value: float
    n_evals: int
    converged_direction: bool = False   # d == 0: nothing to search


def armijo_linesearch(evaluate, f_current: float, slope: float,
                      step_init: float = 0.5, shrink: float = 0.3,
                      armijo_delta: float = 0.1,
                      max_shrinks: int = 30) -> LineSearchResult:
    """First step in {init * shrink^n} with sufficient decrease.

    `evaluate(step)` returns the objective at the (already clamped) trial
    point, or +inf for points the solver refuses.  `slope` is the
    directional derivative at step 0 and must be negative; a zero direction
    short-circuits with step 0.
    """
    if slope == 0.0:
        return LineSearchResult(0.0, f_current, 0, converged_direction=True)
    if slope > 0.0:
        raise LineSearchError(f"not a descent direction (slope {slope:.3e})")
    step = step_init
    for n_evals in range(1, max_shrinks + 1):
        value = evaluate(step)
        if value <= f_current + armijo_delta * step * slope:
            return LineSearchResult(step, value, n_evals)
        step *= shrink
    raise LineSearchError(
        f"no sufficient decrease within {max_shrinks} shrinks")


def calibrate(setup: CalibrationSetup, samples: SampleSet,
              params: OptimizerParams = OptimizerParams(),
              alpha0=None) -> FitReport:
    """Projected Dai-Yuan NLCG fit of the jump rates.

    Never raises on non-convergence: the report carries converged=False
    and the trace instead.  Trial points that violate the step-size bounds
    evaluate to +inf and are simply backtracked past.
    """
    n_theta = setup.basis.n_theta
    alpha = (np.full(n_theta, params.alpha0) if alpha0 is None
             else np.asarray(alpha0, dtype=float).copy())
    alpha = np.maximum(alpha, 0.0)
    restart_every = params.restart_every or 10 * n_theta

    def safe_objective(a, history=None):
        try:
            obj, fwd = objective(a, setup, samples, history=history)
            return -obj.value, obj, fwd
        except StabilityError:
            return math.inf, None, None

    f_val, obj, fwd = safe_objective(alpha)
    if not math.isfinite(f_val):
        raise StabilityError(
            "initial rates violate the admissible time step; "
            "refine the time grid or pass force=True")
    grad = reduced_gradient(alpha, setup, samples, history=fwd)
    direction = projected_direction(-grad, alpha)

    trace = []
    converged = False
    iterations = 0
    stop_note = "max_iters"
    for k in range(params.max_iters):
        iterations = k
        pg_norm = float(np.linalg.norm(projected_gradient(grad, alpha)))
        if pg_norm <= params.tol:
            converged = True
            stop_note = "tol"
            break

        slope = float(grad @ direction)
        used_steepest = False
        if slope >= 0.0 or not np.any(direction):
            direction = projected_direction(-grad, alpha)
            slope = float(grad @ direction)
            used_steepest = True
            if not np.any(direction):
                converged = True     # all descent blocked by active bounds
                stop_note = "kkt"
                break

        eval_cache = {}

        def evaluate(step):
            trial = np.maximum(alpha + step * direction, 0.0)
            result = safe_objective(trial)
            eval_cache[step] = result
            return result[0]

        try:
            ls = armijo_linesearch(evaluate, f_val, slope,
                                   step_init=params.step_init,
                                   shrink=params.step_shrink,
                                   armijo_delta=params.armijo_delta,
                                   max_shrinks=params.max_shrinks)
        except LineSearchError:
            if not used_steepest:
                direction = projected_direction(-grad, alpha)
                slope = float(grad @ direction)
                try:
                    ls = armijo_linesearch(evaluate, f_val, slope,
                                           step_init=params.step_init,
                                           shrink=params.step_shrink,
                                           armijo_delta=params.armijo_delta,
                                           max_shrinks=params.max_shrinks)
                except LineSearchError:
                    stop_note = "linesearch"
                    break
            else:
                stop_note = "linesearch"
                break

        alpha_next = np.maximum(alpha + ls.step * direction, 0.0)
        f_next, obj, fwd = eval_cache.get(ls.step) or safe_objective(alpha_next)
        grad_next = reduced_gradient(alpha_next, setup, samples, history=fwd)

        beta = dai_yuan_beta(grad_next, grad, direction)
        if (k + 1) % restart_every == 0:
            beta = 0.0
        direction = projected_direction(-grad_next + beta * direction,
                                        alpha_next)
        trace.append({"iter": k, "j": -f_next,
                      "pg_norm": float(np.linalg.norm(
                          projected_gradient(grad_next, alpha_next))),
                      "step": ls.step, "beta": beta, "evals": ls.n_evals})
        alpha, f_val, grad = alpha_next, f_next, grad_next
    else:
        iterations = params.max_iters

    pg_norm = float(np.linalg.norm(projected_gradient(grad, alpha)))
    if pg_norm <= params.tol:
        converged = True

    kernel = JumpKernel.from_rates(alpha, setup.basis)
    bounds = stability_bounds(setup.cc, kernel, setup.xi)
    fwd_diag = fwd.diagnostics if fwd is not None else None
    diagnostics = {
        "stop": stop_note,
        "floored_count": obj.floored_count if obj is not None else None,
        "grad_norm": pg_norm,
        "raw_grad_norm": float(np.linalg.norm(grad)),
        "mass_drift": fwd_diag.mass_drift if fwd_diag else None,
        "min_density": fwd_diag.min_density if fwd_diag else None,
        "xi_condition_min": fwd_diag.xi_condition_min if fwd_diag else None,
        "bounds": {
            "dt_used": setup.time_grid.dt,
            "dt_euler_pos": bounds.dt_euler_positive,
            "dt_bdf2": bounds.dt_bdf2,
        },
    }
    j_star = -f_val
    return FitReport(
        n_theta=n_theta,
        alpha_star=alpha,
        j_star=j_star,
        aic=aic_score(j_star, len(samples), n_theta),
        iterations=iterations,
        converged=converged,
        grad_norm=pg_norm,
        diagnostics=diagnostics,
        trace=trace,
    )


@dataclass
class SweepResult:
    reports: list
    selected_n_theta: int
    errors: dict


def aic_sweep(setups, samples: SampleSet,
              params: OptimizerParams = OptimizerParams(),
              penalty: str = "log") -> SweepResult:
    """Calibrate one setup per basis size and pick the best-scoring one.

    Individual failures are recorded and the sweep continues; selection
    maximizes the score over the successful fits.
    """
    reports, errors = [], {}
    for setup in setups:
        try:
            report = calibrate(setup, samples, params)
            if penalty != "log":
                report.aic = aic_score(report.j_star, len(samples),
                                       report.n_theta, penalty)
            reports.append(report)
        except LevyfitError as exc:
            errors[setup.basis.n_theta] = str(exc)
    if not reports:
        raise LevyfitError("every sweep entry failed: " + repr(errors))
    best = max(reports, key=lambda r: r.aic)
    return SweepResult(reports=reports, selected_n_theta=best.n_theta,
                       errors=errors)
