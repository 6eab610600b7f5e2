"""Gaussian collective-spin and Stokes states, rotations, and geometry.

The collective spin of an atomic ensemble and the Stokes vector of a light
pulse are carried around as Gaussian surrogates: a mean 3-vector plus a 3x3
covariance matrix.  All pulse operations are right-handed active rotations,
so a positive angle about +z takes +x into +y.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace

import numpy as np

from .constants import C_LIGHT, EPSILON_0, H_PLANCK, HBAR
from .errors import InvalidParameterError

# Type aliases for readability; both are plain numpy arrays.
Vec3 = np.ndarray  # shape (3,)
Rotation = np.ndarray  # shape (3, 3), orthogonal with det +1

_AXES = {"x": 0, "y": 1, "z": 2}


def rotation_about_axis(axis: str, angle: float) -> Rotation:
    """Rotation matrix for a right-handed active rotation about x, y or z."""
    if axis not in _AXES:
        raise InvalidParameterError(f"axis must be one of 'x', 'y', 'z', got {axis!r}")
    c = math.cos(angle)
    s = math.sin(angle)
    if axis == "x":
        return np.array([[1.0, 0.0, 0.0], [0.0, c, -s], [0.0, s, c]])
    if axis == "y":
        return np.array([[c, 0.0, s], [0.0, 1.0, 0.0], [-s, 0.0, c]])
    return np.array([[c, -s, 0.0], [s, c, 0.0], [0.0, 0.0, 1.0]])


def interferometer_rotation(phase: float) -> Rotation:
    """Net rotation applied by one interferometer arm.

    The phase accumulated between the beam splitters acts about z, and the
    recombining pulse maps the phase quadrature onto the measured z axis:
    ``R_x(-pi/2) @ R_z(phase)``.  Acting on a spin pointing along +x with
    length N/2 this produces a z component of ``-(N/2) sin(phase)``.
    """
    return rotation_about_axis("x", -math.pi / 2) @ rotation_about_axis("z", phase)


def _validate_moments(mean: np.ndarray, cov: np.ndarray, count: float, label: str) -> None:
    if mean.shape != (3,):
        raise InvalidParameterError(f"{label} mean must have shape (3,), got {mean.shape}")
    if cov.shape != (3, 3):
        raise InvalidParameterError(f"{label} cov must have shape (3, 3), got {cov.shape}")
    if not np.all(np.isfinite(mean)) or not np.all(np.isfinite(cov)):
        raise InvalidParameterError(f"{label} moments must be finite")
    if count <= 0:
        raise InvalidParameterError(f"{label} count must be positive, got {count}")
    scale = float(np.abs(cov).max())
    if scale > 0 and float(np.abs(cov - cov.T).max()) > 1e-12 * scale:
        raise InvalidParameterError(f"{label} covariance must be symmetric")
    # Gaussian surrogates may be singular (noiseless quadratures), so only
    # reject clearly negative eigenvalues.
    floor = -1e-9 * max(float(np.trace(cov)), 1.0)
    if float(np.linalg.eigvalsh(cov).min()) < floor:
        raise InvalidParameterError(f"{label} covariance must be positive semidefinite")


@dataclass
class SpinMoments:
    """Mean and covariance of a collective atomic spin (units of hbar)."""

    mean: Vec3
    cov: np.ndarray
    n_atoms: float

    def __post_init__(self) -> None:
        self.mean = np.asarray(self.mean, dtype=float)
        self.cov = np.asarray(self.cov, dtype=float)
        self.n_atoms = float(self.n_atoms)
        _validate_moments(self.mean, self.cov, self.n_atoms, "spin")


@dataclass
class StokesMoments:
    """Mean and covariance of the Stokes vector of a light pulse."""

    mean: Vec3
    cov: np.ndarray
    n_photons: float

    def __post_init__(self) -> None:
        self.mean = np.asarray(self.mean, dtype=float)
        self.cov = np.asarray(self.cov, dtype=float)
        self.n_photons = float(self.n_photons)
        _validate_moments(self.mean, self.cov, self.n_photons, "stokes")


def coherent_spin_state(n_atoms: float) -> SpinMoments:
    """Coherent spin state of ``n_atoms`` two-level atoms, polarized along +z.

    The transverse components carry the projection noise N/4 each; the
    longitudinal component is sharp.
    """
    if n_atoms <= 0:
        raise InvalidParameterError(f"n_atoms must be positive, got {n_atoms}")
    n = float(n_atoms)
    return SpinMoments(
        mean=np.array([0.0, 0.0, n / 2.0]),
        cov=np.diag([n / 4.0, n / 4.0, 0.0]),
        n_atoms=n,
    )


def coherent_stokes_state(n_photons: float) -> StokesMoments:
    """Fully x-polarized light pulse of ``n_photons`` photons.

    S_x is macroscopic and sharp; S_y and S_z carry shot noise n/4 each.
    """
    if n_photons <= 0:
        raise InvalidParameterError(f"n_photons must be positive, got {n_photons}")
    n = float(n_photons)
    return StokesMoments(
        mean=np.array([n / 2.0, 0.0, 0.0]),
        cov=np.diag([0.0, n / 4.0, n / 4.0]),
        n_photons=n,
    )


def apply_rotation(rot: Rotation, moments: SpinMoments | StokesMoments):
    """Rotate a Gaussian state: mean -> R mean, cov -> R cov R^T.

    Particle number is unchanged.  Returns a new object of the same type.
    """
    rot = np.asarray(rot, dtype=float)
    if rot.shape != (3, 3):
        raise InvalidParameterError(f"rotation must have shape (3, 3), got {rot.shape}")
    return replace(moments, mean=rot @ moments.mean, cov=rot @ moments.cov @ rot.T)


@dataclass(frozen=True)
class PhysicalParams:
    """Probe and ensemble parameters entering the atom-light coupling.

    All rates are angular frequencies in s^-1, lengths and areas in SI units.

    - ``gamma_linewidth``: spontaneous linewidth of the probed transition.
    - ``detuning``: probe detuning from resonance (may be negative).
    - ``dipole``: electric-dipole matrix element [C m].
    - ``omega``: probe angular frequency [s^-1].
    - ``area``: beam cross-section [m^2].
    - ``n_photons``: photons per probe pulse.
    """

    gamma_linewidth: float
    detuning: float
    dipole: float
    omega: float
    area: float
    n_photons: float

    def __post_init__(self) -> None:
        if self.gamma_linewidth < 0:
            raise InvalidParameterError("gamma_linewidth must be nonnegative")
        for name in ("dipole", "omega", "area", "n_photons"):
            if getattr(self, name) <= 0:
                raise InvalidParameterError(f"{name} must be positive")

    @property
    def coupling(self) -> float:
        """Single-photon, single-atom coupling rate g [s^-1]."""
        return self.omega * self.dipole**2 / (2.0 * HBAR * EPSILON_0 * self.area * C_LIGHT)

    @property
    def chi(self) -> float:
        """Faraday rotation angle per unit of J_z (dispersive coupling)."""
        return compute_chi(self)

    def with_detuning(self, detuning: float) -> "PhysicalParams":
        return replace(self, detuning=detuning)


def compute_chi(params: PhysicalParams) -> float:
    """Dispersive atom-light coupling chi for the given probe parameters.

    chi = 2 g delta / (gamma^2/4 + delta^2); odd in the detuning, with the
    magnitude peaking at |delta| = gamma/2 and falling off as 2 g / delta far
    from resonance.
    """
    if params.detuning == 0:
        raise InvalidParameterError("detuning must be nonzero to evaluate chi")
    g = params.coupling
    return 2.0 * g * params.detuning / (params.gamma_linewidth**2 / 4.0 + params.detuning**2)


def coupling_from_chi(chi: float, detuning: float, gamma_linewidth: float) -> float:
    """Invert compute_chi for the coupling rate g."""
    if detuning == 0:
        raise InvalidParameterError("detuning must be nonzero")
    return chi * (gamma_linewidth**2 / 4.0 + detuning**2) / (2.0 * detuning)


def dipole_from_coupling(coupling: float, omega: float, area: float) -> float:
    """Invert the coupling definition for the dipole matrix element."""
    if coupling <= 0 or omega <= 0 or area <= 0:
        raise InvalidParameterError("coupling, omega and area must be positive")
    return math.sqrt(2.0 * HBAR * EPSILON_0 * area * C_LIGHT * coupling / omega)


def sagnac_phase(area: float, angular_velocity: float, mass: float) -> float:
    """Rotation-induced phase of a matter-wave loop enclosing ``area``.

    phase = 4 pi A Omega m / h.  For equal geometry the matter-wave phase
    exceeds the optical one by m lambda c / h, about 6.5e10 for a rubidium
    atom against 1 um light.
    """
    if area <= 0:
        raise InvalidParameterError(f"area must be positive, got {area}")
    if mass <= 0:
        raise InvalidParameterError(f"mass must be positive, got {mass}")
    return 4.0 * math.pi * area * angular_velocity * mass / H_PLANCK


@dataclass(frozen=True)
class EnsembleConfig:
    """Atom numbers, phases and noise levels of the two interferometers.

    - ``N_J``, ``N_L``: atom numbers of the two ensembles.
    - ``gamma``: number mismatch in units of sqrt(N_bar): |N_J - N_L| =
      gamma sqrt(N_bar).
    - ``alpha``: fluorescence detection-noise parameter (variance alpha*N).
    - ``phi``: differential (e.g. rotation-induced) phase.
    - ``theta``: common-mode phase.

    The arm phases are ``Phi_J = theta + phi`` and ``Phi_L = theta - phi``.
    """

    N_J: float
    N_L: float
    gamma: float = 0.0
    alpha: float = 0.0
    phi: float = 0.0
    theta: float = 0.0

    def __post_init__(self) -> None:
        if self.N_J <= 0 or self.N_L <= 0:
            raise InvalidParameterError("atom numbers must be positive")
        if self.gamma < 0:
            raise InvalidParameterError("gamma must be nonnegative")
        if self.alpha < 0:
            raise InvalidParameterError("alpha must be nonnegative")
        n_bar = self.N_bar
        if abs(abs(self.N_J - self.N_L) - self.gamma * math.sqrt(n_bar)) > 1e-9 * n_bar:
            raise InvalidParameterError(
                "atom numbers inconsistent with gamma: require "
                "|N_J - N_L| = gamma sqrt(N_bar)"
            )

    @property
    def N_bar(self) -> float:
        """Mean atom number per ensemble."""
        return 0.5 * (self.N_J + self.N_L)

    @property
    def phase_j(self) -> float:
        return self.theta + self.phi

    @property
    def phase_l(self) -> float:
        return self.theta - self.phi

    @classmethod
    def symmetric(
        cls,
        n_bar: float,
        gamma: float = 0.0,
        alpha: float = 0.0,
        phi: float = 0.0,
        theta: float = 0.0,
    ) -> "EnsembleConfig":
        """Split ``n_bar`` symmetrically: N_J,L = n_bar +- gamma sqrt(n_bar)/2."""
        if n_bar <= 0:
            raise InvalidParameterError(f"n_bar must be positive, got {n_bar}")
        half = 0.5 * gamma * math.sqrt(n_bar)
        return cls(
            N_J=n_bar + half,
            N_L=n_bar - half,
            gamma=gamma,
            alpha=alpha,
            phi=phi,
            theta=theta,
        )
