"""Gaussian states as first/second quadrature moments, plus the symplectic
maps of the interferometer elements.

Conventions (fixed once, everything else is calibrated against them):

* quadratures are ordered ``(x1, p1, x2, p2, ...)``,
* ``X = a + a^dag``, so the vacuum has zero mean and identity covariance,
* a coherent amplitude of magnitude ``r`` and phase ``theta`` shifts the mean
  by ``(2 r cos(theta), 2 r sin(theta))``.

Lossless elements are symplectic matrices ``S`` (``S @ Omega @ S.T == Omega``)
applied as ``mean -> S mean``, ``cov -> S cov S^T``.  Photon loss is a virtual
beam splitter against vacuum environment modes followed by a partial trace,
which for Gaussian states is plain row/column deletion.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Iterable, Sequence

import numpy as np
from scipy.linalg import block_diag

__all__ = [
    "SYMPLECTIC_TOL",
    "GaussianState",
    "SymplecticOp",
    "LossChannel",
    "omega",
    "symplectic_defect",
    "vacuum_state",
    "displace",
    "opa_matrix",
    "angular_displacement_matrix",
    "bs_matrix",
    "extend_with_environment",
    "virtual_bs_matrix",
    "apply",
    "apply_loss",
    "trace_out",
    "photon_number",
    "min_uncertainty_eigenvalue",
]

# an order above double-precision accumulation for 8x8 products
SYMPLECTIC_TOL = 1e-10


def omega(modes: int) -> np.ndarray:
    """Symplectic form for ``modes`` modes: block diagonal [[0, 1], [-1, 0]]."""
    if modes < 1:
        raise ValueError("modes must be >= 1")
    block = np.array([[0.0, 1.0], [-1.0, 0.0]])
    return block_diag(*([block] * modes))


def symplectic_defect(matrix: np.ndarray) -> float:
    """Max-abs deviation of ``S Omega S^T`` from ``Omega``."""
    w = omega(matrix.shape[0] // 2)
    return float(np.max(np.abs(matrix @ w @ matrix.T - w)))


def _readonly(arr: np.ndarray) -> np.ndarray:
    arr.flags.writeable = False
    return arr


@dataclass(frozen=True)
class GaussianState:
    """Mean vector and covariance matrix of an m-mode Gaussian state.

    ``mean`` has length ``2 m`` in ``(x1, p1, ..., xm, pm)`` order; ``cov`` is
    the symmetric ``2m x 2m`` covariance normalised so the vacuum is the
    identity.  Instances are immutable; the arrays are stored read-only so
    states can be shared freely across threads.
    """

    mean: np.ndarray
    cov: np.ndarray

    def __post_init__(self) -> None:
        mean = np.array(self.mean, dtype=float)
        cov = np.array(self.cov, dtype=float)
        if mean.ndim != 1 or mean.size == 0 or mean.size % 2:
            raise ValueError("mean must be a vector of length 2 * mode_count")
        if cov.shape != (mean.size, mean.size):
            raise ValueError("cov must be square and match the mean vector")
        if not np.allclose(cov, cov.T, rtol=0.0, atol=1e-8):
            raise ValueError("cov must be symmetric")
        cov = 0.5 * (cov + cov.T)
        object.__setattr__(self, "mean", _readonly(mean))
        object.__setattr__(self, "cov", _readonly(cov))

    @property
    def mode_count(self) -> int:
        return self.mean.size // 2


@dataclass(frozen=True)
class SymplecticOp:
    """A linear phase-space map tagged with the optical element it models."""

    matrix: np.ndarray
    label: str

    def __post_init__(self) -> None:
        m = np.array(self.matrix, dtype=float)
        if m.ndim != 2 or m.shape[0] != m.shape[1] or m.shape[0] % 2:
            raise ValueError("matrix must be square with even dimension")
        defect = symplectic_defect(m)
        if defect > SYMPLECTIC_TOL:
            raise ValueError(f"{self.label}: not symplectic (defect {defect:.3e})")
        object.__setattr__(self, "matrix", _readonly(m))

    @property
    def mode_count(self) -> int:
        return self.matrix.shape[0] // 2


@dataclass(frozen=True)
class LossChannel:
    """Pure-loss channel with one transmissivity shared by the lossy modes."""

    transmissivity: float

    def __post_init__(self) -> None:
        t = float(self.transmissivity)
        if not math.isfinite(t) or not 0.0 <= t <= 1.0:
            raise ValueError("transmissivity must lie in [0, 1]")
        object.__setattr__(self, "transmissivity", t)


def vacuum_state(modes: int) -> GaussianState:
    """All-mode vacuum: zero mean, identity covariance."""
    if modes < 1:
        raise ValueError("modes must be >= 1")
    return GaussianState(np.zeros(2 * modes), np.eye(2 * modes))


def displace(state: GaussianState, mode: int, magnitude: float, angle: float) -> GaussianState:
    """Displace one mode by a coherent amplitude of given magnitude and phase.

    Shifts the mode's mean by ``(2 magnitude cos(angle), 2 magnitude
    sin(angle))`` and leaves the covariance untouched.
    """
    if not 0 <= mode < state.mode_count:
        raise ValueError(f"mode {mode} out of range for {state.mode_count} modes")
    if magnitude < 0:
        raise ValueError("magnitude must be >= 0")
    mean = state.mean.copy()
    mean[2 * mode] += 2.0 * magnitude * math.cos(angle)
    mean[2 * mode + 1] += 2.0 * magnitude * math.sin(angle)
    return GaussianState(mean, state.cov)


def opa_matrix(g: float) -> SymplecticOp:
    """Two-mode squeezer (parametric amplifier) of gain ``g`` on modes (A, B)."""
    ch, sh = math.cosh(g), math.sinh(g)
    m = np.array(
        [
            [ch, 0.0, sh, 0.0],
            [0.0, ch, 0.0, -sh],
            [sh, 0.0, ch, 0.0],
            [0.0, -sh, 0.0, ch],
        ]
    )
    return SymplecticOp(m, "OPA")


def angular_displacement_matrix(ell: int, phi: float) -> SymplecticOp:
    """Rotation of mode A's quadratures by ``2 ell phi``, identity on mode B.

    ``ell`` is the OAM quantum number; a relative rotation ``phi`` between the
    Dove prisms imprints the doubled phase ``2 ell phi`` on the helical mode.
    """
    if int(ell) != ell or ell < 1:
        raise ValueError("ell must be a positive integer")
    delta = 2.0 * ell * phi
    c, s = math.cos(delta), math.sin(delta)
    m = np.array(
        [
            [c, -s, 0.0, 0.0],
            [s, c, 0.0, 0.0],
            [0.0, 0.0, 1.0, 0.0],
            [0.0, 0.0, 0.0, 1.0],
        ]
    )
    return SymplecticOp(m, "AD")


def bs_matrix() -> SymplecticOp:
    """Balanced output coupler: ``a -> (a + b)/sqrt2``, ``b -> (b - a)/sqrt2``."""
    m = np.array(
        [
            [1.0, 0.0, 1.0, 0.0],
            [0.0, 1.0, 0.0, 1.0],
            [-1.0, 0.0, 1.0, 0.0],
            [0.0, -1.0, 0.0, 1.0],
        ]
    ) / math.sqrt(2.0)
    return SymplecticOp(m, "BS")


def extend_with_environment(op: SymplecticOp) -> SymplecticOp:
    """Direct sum of a two-mode element with the identity on two environment modes."""
    if op.matrix.shape != (4, 4):
        raise ValueError("dimension mismatch: expected a 4x4 system operator")
    return SymplecticOp(block_diag(op.matrix, np.eye(4)), op.label)


def virtual_bs_matrix(transmissivity: float) -> SymplecticOp:
    """Virtual beam splitters coupling both system modes to vacuum environments.

    Mode A mixes with environment mode 3 and mode B with environment mode 4,
    both at the same transmissivity.
    """
    t = float(transmissivity)
    if not math.isfinite(t) or not 0.0 <= t <= 1.0:
        raise ValueError("transmissivity must lie in [0, 1]")
    rt, rr = math.sqrt(t), math.sqrt(1.0 - t)
    eye4 = np.eye(4)
    m = np.block([[rt * eye4, rr * eye4], [rr * eye4, -rt * eye4]])
    return SymplecticOp(m, "VBS")


def apply(op: SymplecticOp, state: GaussianState) -> GaussianState:
    """Evolve a state through a symplectic element: ``S mean``, ``S cov S^T``."""
    if op.matrix.shape[0] != state.mean.size:
        raise ValueError(
            f"dimension mismatch: op acts on {op.mode_count} modes, "
            f"state has {state.mode_count}"
        )
    s = op.matrix
    return GaussianState(s @ state.mean, s @ state.cov @ s.T)


def apply_loss(channel: LossChannel, state: GaussianState, modes: Sequence[int]) -> GaussianState:
    """Attenuate the given modes directly: means scale by sqrt(T), variances
    relax toward vacuum as ``T cov + (1 - T)``.

    Closed-form equivalent of a virtual beam splitter against vacuum followed
    by tracing the environment out; kept separate so the two routes can be
    cross-checked.
    """
    modes = tuple(int(m) for m in modes)
    if any(m < 0 or m >= state.mode_count for m in modes):
        raise ValueError("loss mode out of range")
    t = channel.transmissivity
    scale = np.ones(2 * state.mode_count)
    add = np.zeros(2 * state.mode_count)
    for m in set(modes):
        scale[2 * m : 2 * m + 2] = math.sqrt(t)
        add[2 * m : 2 * m + 2] = 1.0 - t
    cov = np.outer(scale, scale) * state.cov + np.diag(add)
    return GaussianState(scale * state.mean, cov)


def trace_out(state: GaussianState, modes: Iterable[int]) -> GaussianState:
    """Discard the given modes (Gaussian partial trace by row/column deletion)."""
    drop = sorted({int(m) for m in modes})
    if any(m < 0 or m >= state.mode_count for m in drop):
        raise ValueError("mode out of range")
    keep = [m for m in range(state.mode_count) if m not in drop]
    if not keep:
        raise ValueError("cannot trace out every mode")
    idx = [d for m in keep for d in (2 * m, 2 * m + 1)]
    return GaussianState(state.mean[idx], state.cov[np.ix_(idx, idx)])


def photon_number(state: GaussianState) -> float:
    """Total mean photon number, summed over modes.

    Per mode: ``(<x>^2 + <p>^2)/4 + (Var x + Var p - 2)/4`` in the
    vacuum-variance-1 convention.
    """
    total = 0.0
    for m in range(state.mode_count):
        i = 2 * m
        mean_sq = state.mean[i] ** 2 + state.mean[i + 1] ** 2
        var_tr = state.cov[i, i] + state.cov[i + 1, i + 1]
        total += 0.25 * (mean_sq + var_tr - 2.0)
    return total


def min_uncertainty_eigenvalue(state: GaussianState) -> float:
    """Smallest eigenvalue of ``cov + i Omega``; >= 0 for a physical state."""
    h = state.cov + 1j * omega(state.mode_count)
    return float(np.min(np.linalg.eigvalsh(h)))
