"""Interferometer pipelines: parametric-amplifier entry, angular displacement,
balanced-beam-splitter exit, with an optional loss stage in both arms.

The lossless chain lives in a 4-dimensional phase space (modes A, B).  The
lossy chain attaches two vacuum environment modes, mixes each arm with its
environment on a virtual beam splitter right after the angular displacement,
and traces the environments out after the output coupler.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Tuple

from .phase_space import (
    GaussianState,
    SymplecticOp,
    angular_displacement_matrix,
    apply,
    bs_matrix,
    displace,
    extend_with_environment,
    opa_matrix,
    trace_out,
    vacuum_state,
    virtual_bs_matrix,
)

__all__ = [
    "ExperimentConfig",
    "Pipeline",
    "build_lossless",
    "build_lossy",
    "run_pipeline",
    "run_lossless",
    "run_lossy",
    "mean_photon_number",
    "quadrature_mean",
    "quadrature_second_moment",
]


@dataclass(frozen=True)
class ExperimentConfig:
    """One interferometer working point.

    g: squeezing factor of the parametric amplifier (>= 0)
    ell: OAM quantum number (positive integer)
    alpha_mag: magnitude of the input coherent amplitude (>= 0)
    theta: amplitude angle of the input coherent state, radians
    phi: angular displacement between the Dove prisms, radians
    transmissivity: shared arm transmissivity T in [0, 1]; 1 means lossless
    """

    g: float
    ell: int
    alpha_mag: float
    theta: float
    phi: float
    transmissivity: float = 1.0

    def __post_init__(self) -> None:
        for name in ("g", "alpha_mag", "theta", "phi", "transmissivity"):
            value = float(getattr(self, name))
            if not math.isfinite(value):
                raise ValueError(f"{name} must be finite")
            object.__setattr__(self, name, value)
        if isinstance(self.ell, bool) or int(self.ell) != self.ell or self.ell < 1:
            raise ValueError("ell must be a positive integer")
        object.__setattr__(self, "ell", int(self.ell))
        if self.g < 0:
            raise ValueError("g must be >= 0")
        if self.alpha_mag < 0:
            raise ValueError("alpha_mag must be >= 0")
        if not 0.0 <= self.transmissivity <= 1.0:
            raise ValueError("transmissivity must lie in [0, 1]")


@dataclass(frozen=True)
class Pipeline:
    """Ordered element chain applied to a displaced vacuum.

    ``displacement`` is ``(mode, magnitude, angle)``; ``trace_modes`` lists the
    environment modes discarded at the end (empty for the lossless chain).
    """

    mode_count: int
    displacement: Tuple[int, float, float]
    ops: Tuple[SymplecticOp, ...]
    trace_modes: Tuple[int, ...] = ()


def build_lossless(config: ExperimentConfig) -> Pipeline:
    """Two-mode chain: displace input A, amplify, rotate, recombine."""
    ops = (
        opa_matrix(config.g),
        angular_displacement_matrix(config.ell, config.phi),
        bs_matrix(),
    )
    return Pipeline(2, (0, config.alpha_mag, config.theta), ops)


def build_lossy(config: ExperimentConfig) -> Pipeline:
    """Four-mode chain with loss inserted between the rotation and the coupler."""
    ops = (
        extend_with_environment(opa_matrix(config.g)),
        extend_with_environment(angular_displacement_matrix(config.ell, config.phi)),
        virtual_bs_matrix(config.transmissivity),
        extend_with_environment(bs_matrix()),
    )
    return Pipeline(4, (0, config.alpha_mag, config.theta), ops, trace_modes=(2, 3))


def run_pipeline(pipeline: Pipeline) -> GaussianState:
    """Evaluate a pipeline starting from the vacuum."""
    mode, magnitude, angle = pipeline.displacement
    state = displace(vacuum_state(pipeline.mode_count), mode, magnitude, angle)
    for op in pipeline.ops:
        state = apply(op, state)
    if pipeline.trace_modes:
        state = trace_out(state, pipeline.trace_modes)
    return state


def run_lossless(config: ExperimentConfig) -> GaussianState:
    return run_pipeline(build_lossless(config))


def run_lossy(config: ExperimentConfig) -> GaussianState:
    return run_pipeline(build_lossy(config))


def mean_photon_number(config: ExperimentConfig) -> float:
    """Mean photon number inside the interferometer (before any loss):
    ``cosh(2g) |alpha|^2 + 2 sinh^2 g``."""
    return math.cosh(2.0 * config.g) * config.alpha_mag**2 + 2.0 * math.sinh(config.g) ** 2


def quadrature_mean(state: GaussianState, mode: int = 0) -> float:
    """<X> of the given output mode."""
    return float(state.mean[2 * mode])


def quadrature_second_moment(state: GaussianState, mode: int = 0) -> float:
    """<X^2> of the given output mode (variance plus squared mean)."""
    i = 2 * mode
    return float(state.cov[i, i] + state.mean[i] ** 2)
