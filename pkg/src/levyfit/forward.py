"""Forward Kolmogorov (Fokker-Planck) solver on the torus.

Space: exponentially fitted two-point flux (Chang-Cooper weighting), which
keeps the discrete drift-diffusion operator conservative and positivity
preserving.  Time: implicit two-step BDF2 for the stiff flux part, explicit
evaluation of the jump integral at the previous level (IMEX), with the
first step bootstrapped by implicit Euler substeps.

The jump integral is a midpoint quadrature over the torus: translating a
periodic grid function by the k-th translation node moves it by exactly k
cells, so the integral reduces to a circular convolution with a fixed
nonnegative kernel.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .cyclic import CyclicSolver
from .errors import SolverError, StabilityError
from .torus import ModelCoefficients, SplineBasis, TimeGrid, TorusGrid

_W_SERIES = 1e-4  # switch point between closed forms and small-w expansions


def cc_delta(w: float) -> float:
    """Exponential-fitting weight delta(w) = 1/w - 1/(e^w - 1).

    Monotonically decreasing from 1 (w -> -inf) to 0 (w -> +inf), equal to
    1/2 at w = 0.  Below |w| = 1e-4 the two 1/w-sized terms cancel
    catastrophically, so the series 1/2 - w/12 + w^3/720 is used instead
    (first dropped term w^5/30240).
    """
    w = float(w)
    if abs(w) < _W_SERIES:
        return 0.5 - w / 12.0 + w**3 / 720.0
    if w > 700.0:
        return 1.0 / w  # 1/(e^w - 1) underflows; avoids exp overflow
    return 1.0 / w - 1.0 / math.expm1(w)


@dataclass(frozen=True)
class CCOperator:
    """Discrete periodic drift-diffusion operator in flux form.

    With B the advection, C the diffusion coefficient and w = h*B/C, the
    matrix A has constant bands
        A[i, i-1] = beta/h,  A[i, i] = -(beta + beta_omega)/h,
        A[i, i+1] = beta_omega/h,
    (indices cyclic) where beta = B/(e^w - 1) = C/h - delta*B and
    beta_omega = omega*beta with omega = e^w.  Both beta forms agree
    analytically; beta and beta_omega are evaluated through expm1 (series
    below |w| = 1e-4) so the B -> 0 limit beta -> C/h is exact.
    """

    grid: TorusGrid
    coeffs: ModelCoefficients
    w: float = field(init=False)
    omega: float = field(init=False)
    delta_cc: float = field(init=False)
    beta: float = field(init=False)
    beta_omega: float = field(init=False)

    def __post_init__(self):
        h = self.grid.h
        b_adv = self.coeffs.adv
        c_diff = self.coeffs.diff
        w = h * b_adv / c_diff
        try:
            omega = math.exp(w)
        except OverflowError:
            omega = math.inf
        if abs(w) < _W_SERIES:
            base = c_diff / h
            beta = base * (1.0 - w / 2.0 + w * w / 12.0)
            beta_omega = base * (1.0 + w / 2.0 + w * w / 12.0)
        else:
            beta = b_adv / math.expm1(w)
            beta_omega = b_adv / (-math.expm1(-w))
        object.__setattr__(self, "w", w)
        object.__setattr__(self, "omega", omega)
        object.__setattr__(self, "delta_cc", cc_delta(w))
        object.__setattr__(self, "beta", beta)
        object.__setattr__(self, "beta_omega", beta_omega)

    @property
    def damping(self) -> float:
        """Magnitude of the diagonal of A: (beta + beta_omega)/h."""
        return (self.beta + self.beta_omega) / self.grid.h

    def damping_coth_form(self) -> float:
        """Equivalent closed form B*coth(h*B/(2C))/h, for B != 0."""
        if self.w == 0.0:
            raise ValueError("coth form is singular at B = 0")
        return self.coeffs.adv / math.tanh(self.w / 2.0) / self.grid.h

    def system_solver(self, shift: float, scale: float,
                      transpose: bool = False) -> CyclicSolver:
        """Solver for (shift*I - scale*A); transpose swaps the two off bands."""
        h = self.grid.h
        sub = -scale * self.beta / h
        sup = -scale * self.beta_omega / h
        if transpose:
            sub, sup = sup, sub
        return CyclicSolver(sub, shift + scale * self.damping, sup, self.grid.n)

    def apply(self, f: np.ndarray) -> np.ndarray:
        """A @ f (used by diagnostics and tests)."""
        h = self.grid.h
        return (self.beta * np.roll(f, 1)
                - (self.beta + self.beta_omega) * f
                + self.beta_omega * np.roll(f, -1)) / h


@dataclass
class JumpKernel:
    """Quadrature weights of the jump integral, indexed by cell shift.

    weights[k] is the rate of a k-cell translation per unit time (already
    multiplied by the quadrature step h); total_rate is their sum, the
    total jump intensity seen by the scheme.
    """

    weights: np.ndarray
    total_rate: float
    _fft: np.ndarray | None = field(default=None, repr=False)

    @classmethod
    def from_rates(cls, rates, basis: SplineBasis) -> "JumpKernel":
        rates = np.atleast_1d(np.asarray(rates, dtype=float))
        if rates.shape != (basis.n_theta,):
            raise ValueError(
                f"expected {basis.n_theta} rates, got shape {rates.shape}")
        weights = basis.grid.h * (rates @ basis.samples)
        return cls(weights=weights, total_rate=float(weights.sum()))

    @classmethod
    def zero(cls, n: int) -> "JumpKernel":
        return cls(weights=np.zeros(n), total_rate=0.0)

    @property
    def fft(self) -> np.ndarray:
        if self._fft is None:
            self._fft = np.fft.rfft(self.weights)
        return self._fft


def apply_jump_operator(f: np.ndarray, kernel: JumpKernel) -> np.ndarray:
    """Forward jump operator: (sum_k q_k f_{i-k}) - a*f_i.

    Mass that sits k cells to the left arrives at cell i with rate q_k, so
    the gain term is the circular convolution of the kernel with f; the
    column sums vanish identically and the operator conserves mass.
    """
    if kernel.total_rate == 0.0:
        return np.zeros_like(f)
    n = len(f)
    gain = np.fft.irfft(kernel.fft * np.fft.rfft(f), n=n)
    return gain - kernel.total_rate * f


def adjoint_jump_operator(p: np.ndarray, kernel: JumpKernel) -> np.ndarray:
    """Transposed jump operator: (sum_k q_k p_{i+k}) - a*p_i."""
    if kernel.total_rate == 0.0:
        return np.zeros_like(p)
    n = len(p)
    gain = np.fft.irfft(np.conj(kernel.fft) * np.fft.rfft(p), n=n)
    return gain - kernel.total_rate * p


@dataclass(frozen=True)
class StabilityBounds:
    """Admissible time steps for the two schemes at decay parameter xi.

    dt_euler_positive: implicit Euler keeps nonnegative data nonnegative.
    dt_euler_decay:    Euler additionally satisfies f_new >= f_old / xi.
    dt_bdf2:           the two-step scheme propagates xi*f_new - f_old >= 0
                       (hence positivity, given a compliant starting pair).
    """

    dt_euler_positive: float
    dt_euler_decay: float
    dt_bdf2: float
    xi: float


def stability_bounds(cc: CCOperator, kernel: JumpKernel,
                     xi: float = 2.0) -> StabilityBounds:
    if not 1.0 < xi < 3.0:
        raise ValueError(f"xi must lie in (1, 3), got {xi}")
    a = kernel.total_rate
    damping = cc.damping
    dt_pos = math.inf if a == 0.0 else 1.0 / a
    dt_decay = (xi - 1.0) / (a * xi + damping)
    # the jump term enters the two-step update with weight 2*dt, hence 2*a*xi
    dt_bdf2 = (xi - 1.0) * (3.0 - xi) / (2.0 * a * xi + 2.0 * damping)
    return StabilityBounds(dt_pos, dt_decay, dt_bdf2, xi)


def euler_step(f_prev: np.ndarray, dt_sub: float, cc: CCOperator,
               kernel: JumpKernel, force: bool = False,
               _solver: CyclicSolver | None = None) -> np.ndarray:
    """One implicit Euler step: solve (I - dt*A) f = f_prev + dt*Q(f_prev).

    Refuses dt_sub above 1/total_rate, the positivity bound, unless forced.
    """
    a = kernel.total_rate
    if a > 0.0 and dt_sub > 1.0 / a and not force:
        raise StabilityError(
            f"Euler step {dt_sub:.3e} exceeds positivity bound {1.0 / a:.3e}")
    solver = _solver or cc.system_solver(1.0, dt_sub)
    rhs = f_prev + dt_sub * apply_jump_operator(f_prev, kernel)
    return solver.solve(rhs)


def bdf2_step(f_m: np.ndarray, f_m_minus_1: np.ndarray, cc: CCOperator,
              kernel: JumpKernel, dt: float,
              _solver: CyclicSolver | None = None) -> np.ndarray:
    """One BDF2/IMEX step: solve (3I - 2dt*A) f = 4f_m - f_{m-1} + 2dt*Q(f_m).

    The matrix is an M-matrix for every dt, so the solve cannot fail; the
    kernel term is explicit, which is what the step-size bounds control.
    """
    solver = _solver or cc.system_solver(3.0, 2.0 * dt)
    rhs = 4.0 * f_m - f_m_minus_1 + 2.0 * dt * apply_jump_operator(f_m, kernel)
    out = solver.solve(rhs)
    if not np.all(np.isfinite(out)):
        raise SolverError("non-finite values in BDF2 solve")
    return out


@dataclass(frozen=True)
class ForwardDiagnostics:
    mass_drift: float
    min_density: float
    dt_used: float
    bounds: StabilityBounds
    forced: bool
    xi_condition_min: float     # min over cells of xi*f^1 - f^0
    first_negative_step: int | None


@dataclass
class DensityHistory:
    """Space-time table of the solved density.

    values[m] approximates the density at t_m for m = 0..n_steps; bootstrap
    holds the Euler substep states preceding values[1] (needed to assemble
    exact rate sensitivities).
    """

    values: np.ndarray          # (n_steps + 1, n)
    bootstrap: np.ndarray       # (boot_substeps, n): states g^0 .. g^{K-1}
    grid: TorusGrid
    time_grid: TimeGrid
    diagnostics: ForwardDiagnostics

    @property
    def terminal(self) -> np.ndarray:
        return self.values[-1]


def solve_forward(f0: np.ndarray, rates, basis: SplineBasis, cc: CCOperator,
                  time_grid: TimeGrid, *, xi: float = 2.0,
                  boot_substeps: int = 10, force: bool = False) -> DensityHistory:
    """March the density from f0 to t_final.

    The first level is produced by `boot_substeps` implicit Euler substeps
    of dt/boot_substeps, each checked against the Euler positivity bound;
    all later levels use the two-step scheme.  dt itself is validated
    against the two-step bound and the solve refuses when it is violated,
    unless `force` is passed (the violation is then recorded and the first
    negative time level reported in the diagnostics).
    """
    f0 = np.asarray(f0, dtype=float)
    n = cc.grid.n
    if f0.shape != (n,):
        raise ValueError(f"f0 must have shape ({n},)")
    if np.min(f0) < -1e-12:
        raise ValueError("initial density must be nonnegative")
    mass0 = cc.grid.h * f0.sum()
    if abs(mass0 - 1.0) > 1e-8:
        raise ValueError(f"initial density mass {mass0} is not 1")
    if boot_substeps < 1:
        raise ValueError("boot_substeps must be >= 1")

    kernel = JumpKernel.from_rates(rates, basis)
    bounds = stability_bounds(cc, kernel, xi)
    dt = time_grid.dt
    tau = dt / boot_substeps
    violated = dt > bounds.dt_bdf2 or tau > bounds.dt_euler_positive
    if violated and not force:
        raise StabilityError(
            f"dt = {dt:.4e} violates the admissible steps "
            f"(bdf2 <= {bounds.dt_bdf2:.4e}, euler <= {bounds.dt_euler_positive:.4e}); "
            "pass force=True to integrate anyway")

    values = np.empty((time_grid.n_steps + 1, n))
    values[0] = f0
    boot = np.empty((boot_substeps, n))
    euler_solver = cc.system_solver(1.0, tau)
    g = f0
    for s in range(boot_substeps):
        boot[s] = g
        g = euler_step(g, tau, cc, kernel, force=True, _solver=euler_solver)
    values[1] = g

    bdf2_solver = cc.system_solver(3.0, 2.0 * dt)
    for m in range(1, time_grid.n_steps):
        values[m + 1] = bdf2_step(values[m], values[m - 1], cc, kernel, dt,
                                  _solver=bdf2_solver)

    masses = cc.grid.h * values.sum(axis=1)
    mass_drift = float(np.max(np.abs(masses - masses[0])) / abs(masses[0]))
    mins = values.min(axis=1)
    negative = np.nonzero(mins < -1e-13)[0]
    diagnostics = ForwardDiagnostics(
        mass_drift=mass_drift,
        min_density=float(mins.min()),
        dt_used=dt,
        bounds=bounds,
        forced=bool(violated),
        xi_condition_min=float(np.min(xi * values[1] - values[0])),
        first_negative_step=int(negative[0]) if negative.size else None,
    )
    return DensityHistory(values=values, bootstrap=boot, grid=cc.grid,
                          time_grid=time_grid, diagnostics=diagnostics)
