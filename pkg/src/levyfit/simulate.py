"""Monte Carlo generators of terminal samples, and reference wrapped densities.

Terminal values are sampled directly (jump count + jump sizes + Gaussian
part for the finite-activity case; terminal gamma laws for the
bi-directional gamma case), then projected onto the torus and snapped.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .samples import SampleSet
from .torus import SplineBasis, TorusGrid, project_to_torus


@dataclass(frozen=True)
class SimulationSpec:
    """What to simulate: jump model, fixed drift/diffusion, horizon, count, seed."""

    kind: str                       # "compound_poisson" | "bigamma"
    rates: tuple = ()               # hat-mixture jump rates (compound_poisson)
    gamma_shape: float = 0.5        # bigamma shape A
    gamma_rate: float = 1.0         # bigamma rate (1/scale)
    drift: float = 0.0
    sigma2: float = 0.02
    t_final: float = 1.0
    n_samples: int = 100_000
    seed: int = 0
    # starting position: exactly init_center, or a von Mises draw around it
    # (matching the solver's initial density) when a concentration is given
    init_center: float = 0.0
    init_concentration: float | None = None

    def __post_init__(self):
        if self.kind not in ("compound_poisson", "bigamma"):
            raise ValueError(f"unknown simulation kind {self.kind!r}")
        if self.n_samples < 1:
            raise ValueError("n_samples must be >= 1")
        if self.sigma2 < 0:
            raise ValueError("sigma2 must be >= 0")
        if self.kind == "bigamma" and (self.gamma_shape <= 0 or self.gamma_rate <= 0):
            raise ValueError("gamma shape and rate must be positive")
        if self.kind == "compound_poisson":
            if len(self.rates) == 0:
                raise ValueError("compound_poisson needs a rates vector")
            if min(self.rates) < 0:
                raise ValueError("rates must be nonnegative")
        if self.init_concentration is not None and self.init_concentration <= 0:
            raise ValueError("init_concentration must be positive")


def _initial_positions(spec: SimulationSpec, grid: TorusGrid,
                       rng: np.random.Generator) -> np.ndarray | float:
    """Starting values of the paths, on the real line before projection."""
    if spec.init_concentration is None:
        return spec.init_center
    # rng.vonmises lives on [-pi, pi); rescale its period to the torus length
    draw = rng.vonmises(0.0, spec.init_concentration, size=spec.n_samples)
    return spec.init_center + draw * (grid.length / (2.0 * math.pi))


def sample_compound_poisson(spec: SimulationSpec, basis: SplineBasis,
                            grid: TorusGrid,
                            rng: np.random.Generator | None = None) -> SampleSet:
    """Hat-mixture compound Poisson plus Brownian part, projected to the torus.

    The total intensity is sum_j rates_j * delta (exact hat integrals); each
    jump picks hat j with probability rates_j / sum(rates) and draws a
    symmetric triangular size on [center_j - delta, center_j + delta] as the
    sum of two uniforms, which is exact and branch-free.
    """
    if spec.kind != "compound_poisson":
        raise ValueError("spec.kind must be 'compound_poisson'")
    rates = np.asarray(spec.rates, dtype=float)
    if rates.shape != (basis.n_theta,):
        raise ValueError("rates length must match the basis size")
    rng = rng or np.random.default_rng(spec.seed)
    n, t = spec.n_samples, spec.t_final

    intensity = basis.delta * rates.sum()
    jump_sum = np.zeros(n)
    counts = np.zeros(n, dtype=np.int64)
    if intensity > 0:
        counts = rng.poisson(intensity * t, size=n)
        total = int(counts.sum())
        if total > 0:
            component = rng.choice(basis.n_theta, size=total,
                                   p=rates / rates.sum())
            sizes = (basis.centers[component]
                     + basis.delta * (rng.random(total) + rng.random(total) - 1.0))
            owner = np.repeat(np.arange(n), counts)
            jump_sum = np.bincount(owner, weights=sizes, minlength=n)

    gauss = spec.drift * t + math.sqrt(spec.sigma2 * t) * rng.standard_normal(n)
    raw = jump_sum + gauss + _initial_positions(spec, grid, rng)
    return SampleSet.from_values(project_to_torus(raw, grid), grid,
                                 raw=raw, jump_counts=counts)


def sample_bigamma(spec: SimulationSpec, grid: TorusGrid,
                   rng: np.random.Generator | None = None) -> SampleSet:
    """Difference of two independent gamma subordinators at the horizon,
    plus the Brownian part, projected to the torus."""
    if spec.kind != "bigamma":
        raise ValueError("spec.kind must be 'bigamma'")
    rng = rng or np.random.default_rng(spec.seed)
    n, t = spec.n_samples, spec.t_final
    shape = spec.gamma_shape * t
    scale = 1.0 / spec.gamma_rate

    up = rng.gamma(shape, scale, size=n)
    down = rng.gamma(shape, scale, size=n)
    gauss = spec.drift * t + math.sqrt(spec.sigma2 * t) * rng.standard_normal(n)
    raw = up - down + gauss + _initial_positions(spec, grid, rng)
    return SampleSet.from_values(project_to_torus(raw, grid), grid, raw=raw)


def wrapped_bigamma_density(s: float, shape: float, rate: float,
                            grid: TorusGrid, tol: float = 1e-12,
                            variant: str = "lattice") -> float:
    """Jump-measure density shape*exp(-rate*|y|)/|y| wrapped onto the torus.

    variant="lattice" (default) sums the real-line density over all image
    points s + n*K of the torus period K, truncating once the geometric
    tail bound drops below tol.  variant="lerch_pi" evaluates the
    half-period closed form shape/pi * exp(-rate*(|s|+pi)) * Phi(e^{-rate*pi},
    1, |s|/pi) with the Lerch transcendent, kept for comparison plots.
    """
    if s == 0.0:
        raise ValueError("the density is singular at s = 0")
    if tol <= 0:
        raise ValueError("tol must be positive")
    if shape <= 0 or rate <= 0:
        raise ValueError("shape and rate must be positive")
    r = abs(float(s))
    if r >= grid.length:
        raise ValueError("s must be a torus point (|s| < period)")

    if variant == "lerch_pi":
        z = math.exp(-rate * math.pi)
        return (shape / math.pi * math.exp(-rate * (r + math.pi))
                * _lerch_phi(z, r / math.pi, tol))
    if variant != "lattice":
        raise ValueError(f"unknown variant {variant!r}")

    period = grid.length
    damp = math.exp(-rate * period)
    total = shape * math.exp(-rate * r) / r
    n = 1
    while True:
        left = period * n - r
        right = period * n + r
        pair = shape * (math.exp(-rate * left) / left
                        + math.exp(-rate * right) / right)
        total += pair
        # remaining terms decay at least geometrically with ratio damp
        if pair * damp / (1.0 - damp) < tol:
            return total
        n += 1


def _lerch_phi(z: float, p: float, tol: float) -> float:
    """Phi(z, 1, p) = sum_{n>=0} z^n / (p + n) for 0 < z < 1, p > 0."""
    total, term, n = 0.0, 1.0, 0
    while True:
        total += term / (p + n)
        term *= z
        n += 1
        if term / ((p + n) * (1.0 - z)) < tol:
            return total
