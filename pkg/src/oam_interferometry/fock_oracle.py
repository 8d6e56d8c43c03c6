"""Brute-force validator in a truncated two-mode Fock space.

Builds dense ladder operators on the basis ``|n_a, n_b>`` (``n <= cutoff``
per mode), exponentiates the element generators with scipy's
scaling-and-squaring ``expm``, and reads homodyne moments directly from the
state vector.  Deliberately slow and simple so it shares nothing with the
phase-space engine it checks.

Reliability gauge: the probability sitting on the top two Fock layers of
either mode ("tail mass").  A state whose tail mass exceeds the tolerance is
flagged unreliable and refuses to report moments.

Memory: every two-mode operator is a dense ``(cutoff+1)^2`` square matrix,
i.e. ``(cutoff+1)^4`` entries; the cutoff-80 ceiling costs ~0.4 GB per
operator (float64) and takes minutes to exponentiate.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache

import numpy as np
from scipy.linalg import expm

from .interferometer import ExperimentConfig

__all__ = [
    "DEFAULT_TAIL_TOLERANCE",
    "CUTOFF_SCHEDULE",
    "UnreliableStateError",
    "TwoModeOperators",
    "FockState",
    "OracleReport",
    "annihilation",
    "build_operators",
    "bs_unitary",
    "evolve",
    "moments",
]

DEFAULT_TAIL_TOLERANCE = 1e-8
# automatic escalation path; an explicit cutoff argument bypasses it
CUTOFF_SCHEDULE = (40, 60, 80)


class UnreliableStateError(RuntimeError):
    """Raised when moments are requested from a state with too much tail mass."""


def annihilation(cutoff: int) -> np.ndarray:
    """Single-mode annihilation operator: ``a[n-1, n] = sqrt(n)``."""
    if cutoff < 2:
        raise ValueError("cutoff must be >= 2")
    dim = cutoff + 1
    a = np.zeros((dim, dim))
    idx = np.arange(1, dim)
    a[idx - 1, idx] = np.sqrt(idx)
    return a


@dataclass(frozen=True)
class TwoModeOperators:
    """Dense two-mode ladder operators, modes embedded by tensor product.

    ``a`` acts on the first tensor factor (mode A), ``b`` on the second; both
    are real, so the creation operators are plain transposes.
    """

    cutoff: int
    a: np.ndarray
    b: np.ndarray

    @property
    def dim(self) -> int:
        return (self.cutoff + 1) ** 2

    @property
    def x_a(self) -> np.ndarray:
        return self.a + self.a.T

    def total_number_diagonal(self) -> np.ndarray:
        n = np.arange(self.cutoff + 1)
        return np.add.outer(n, n).ravel().astype(float)


def build_operators(cutoff: int) -> TwoModeOperators:
    """Two-mode ladder operators at the given per-mode cutoff."""
    a1 = annihilation(cutoff)
    eye = np.eye(cutoff + 1)
    return TwoModeOperators(cutoff=cutoff, a=np.kron(a1, eye), b=np.kron(eye, a1))


@lru_cache(maxsize=6)
def _cached_operators(cutoff: int) -> TwoModeOperators:
    return build_operators(cutoff)


@lru_cache(maxsize=6)
def _x_a_complex(cutoff: int) -> np.ndarray:
    x = _cached_operators(cutoff).x_a.astype(complex)
    x.flags.writeable = False
    return x


@lru_cache(maxsize=6)
def _opa_unitary(g: float, cutoff: int) -> np.ndarray:
    """exp(g (a^dag b^dag - a b)): two-mode squeezer matching
    ``A = a cosh g + b^dag sinh g`` in the Heisenberg picture."""
    ops = _cached_operators(cutoff)
    gen = g * (ops.a.T @ ops.b.T - ops.a @ ops.b)
    # stored complex so the state matvec stays in one BLAS call
    u = expm(gen).astype(complex)
    u.flags.writeable = False
    return u


@lru_cache(maxsize=4)
def bs_unitary(cutoff: int, mixing_angle: float = math.pi / 4.0) -> np.ndarray:
    """exp(zeta (a^dag b - a b^dag)): at zeta = pi/4 the balanced coupler
    ``a -> (a + b)/sqrt2``, ``b -> (b - a)/sqrt2``."""
    ops = _cached_operators(cutoff)
    gen = mixing_angle * (ops.a.T @ ops.b - ops.a @ ops.b.T)
    u = expm(gen).astype(complex)
    u.flags.writeable = False
    return u


@lru_cache(maxsize=16)
def _displacement_column(magnitude: float, angle: float, cutoff: int) -> np.ndarray:
    """D(alpha)|0> for a single mode (first column of the displacement unitary)."""
    a1 = annihilation(cutoff)
    alpha = magnitude * complex(math.cos(angle), math.sin(angle))
    d = expm(alpha * a1.T.astype(complex) - np.conj(alpha) * a1.astype(complex))
    col = d[:, 0].copy()
    col.flags.writeable = False
    return col


@dataclass(frozen=True)
class FockState:
    """Normalised truncated two-mode state with its tail-mass record."""

    cutoff: int
    amplitudes: np.ndarray
    tail_mass: float
    tail_tolerance: float

    def __post_init__(self) -> None:
        amps = np.array(self.amplitudes, dtype=complex)
        if amps.shape != ((self.cutoff + 1) ** 2,):
            raise ValueError("amplitudes must have dimension (cutoff + 1)^2")
        amps.flags.writeable = False
        object.__setattr__(self, "amplitudes", amps)

    @property
    def reliable(self) -> bool:
        return self.tail_mass < self.tail_tolerance


@dataclass(frozen=True)
class OracleReport:
    """Moments read directly from the truncated state."""

    x_mean: float
    x_second_moment: float
    photon_number: float
    cutoff_used: int
    tail_mass: float
    reliable: bool = True


def _evolve_at(config: ExperimentConfig, cutoff: int, tail_tolerance: float) -> FockState:
    dim = cutoff + 1
    # displaced vacuum in mode A, vacuum in mode B
    col = _displacement_column(config.alpha_mag, config.theta, cutoff)
    e0 = np.zeros(dim, dtype=complex)
    e0[0] = 1.0
    psi = np.kron(col, e0)
    psi = _opa_unitary(config.g, cutoff) @ psi
    n_a = np.repeat(np.arange(dim), dim)
    psi = np.exp(1j * 2.0 * config.ell * config.phi * n_a) * psi
    psi = bs_unitary(cutoff) @ psi
    psi = psi / np.linalg.norm(psi)
    probs = np.abs(psi.reshape(dim, dim)) ** 2
    tail = float(max(1.0 - probs[: cutoff - 1, : cutoff - 1].sum(), 0.0))
    return FockState(cutoff=cutoff, amplitudes=psi, tail_mass=tail, tail_tolerance=tail_tolerance)


def evolve(
    config: ExperimentConfig,
    cutoff: int | None = None,
    tail_tolerance: float = DEFAULT_TAIL_TOLERANCE,
    cutoff_schedule: tuple[int, ...] = CUTOFF_SCHEDULE,
) -> FockState:
    """Propagate the input through displacement, squeezer, rotation, coupler.

    With ``cutoff=None`` the schedule is walked until the tail-mass criterion
    passes; if the ceiling still fails, the last state is returned carrying
    ``reliable == False``.  An explicit cutoff is used as given.  Only the
    lossless chain is covered (loss validation goes through the exact scaling
    laws against the phase-space engine instead).
    """
    if config.transmissivity != 1.0:
        raise ValueError("the Fock validator covers the lossless chain only")
    schedule = (cutoff,) if cutoff is not None else tuple(cutoff_schedule)
    if not schedule:
        raise ValueError("cutoff schedule is empty")
    state = None
    for c in schedule:
        state = _evolve_at(config, int(c), tail_tolerance)
        if state.reliable:
            return state
    return state


def moments(state: FockState, allow_unreliable: bool = False) -> OracleReport:
    """<X_A>, <X_A^2>, and total photon number of the output state."""
    if not state.reliable and not allow_unreliable:
        raise UnreliableStateError(
            f"tail mass {state.tail_mass:.3e} exceeds tolerance {state.tail_tolerance:.1e}"
        )
    ops = _cached_operators(state.cutoff)
    psi = state.amplitudes
    xpsi = _x_a_complex(state.cutoff) @ psi
    x_mean = float(np.real(np.vdot(psi, xpsi)))
    x_second = float(np.real(np.vdot(xpsi, xpsi)))
    n_total = float(np.sum(ops.total_number_diagonal() * np.abs(psi) ** 2))
    return OracleReport(
        x_mean=x_mean,
        x_second_moment=x_second,
        photon_number=n_total,
        cutoff_used=state.cutoff,
        tail_mass=state.tail_mass,
        reliable=state.reliable,
    )
