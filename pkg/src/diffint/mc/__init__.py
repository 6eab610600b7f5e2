"""Monte Carlo oracle for the differential-interferometry schemes.

Draws Gaussian micro-states (collective spins, Stokes vectors, detection
noise) from a counter-based generator, pushes each sample through the
exact pulse sequence of the requested scheme, and reports the sample mean
and variance of the phase estimator with standard errors.

The per-sample pipelines exist twice: a compiled C backend
(``diffint.mc._kernel``) and a pure-numpy fallback
(``diffint.mc._pipeline_numpy``).  The compiled backend is used when the
extension imported cleanly; set ``DIFFINT_FORCE_BACKEND=numpy`` or
``=kernel`` to pin one, or pass ``backend=`` per call.  Results are
bit-identical for any worker count within one backend, and agree between
backends to floating-point roundoff.
"""

from __future__ import annotations

import math
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np

from ..core import EnsembleConfig
from ..errors import DegenerateTiltError, InvalidParameterError
from ..schemes import LightConfig, SchemeId
from . import _pipeline_numpy
from ._philox import N_SLOTS, generate_normals

try:
    from . import _kernel
except ImportError:  # pragma: no cover - depends on the build environment
    _kernel = None

__all__ = [
    "CHUNK",
    "McOptions",
    "McResult",
    "MicroState",
    "active_backend",
    "generate_normals",
    "joint_qnd_transform",
    "qnd_transform",
    "run_scheme_mc",
    "sample_initial",
]

#: Samples per accumulation chunk.  Results do not depend on this value's
#: relationship to the worker count; chunk partial sums are merged in
#: chunk order with compensated summation.
CHUNK = 32768

MISMATCH_MODELS = ("fixed_offset", "gaussian_width")

_SCHEME_INDEX = {
    SchemeId.CS: 0,
    SchemeId.SS: 1,
    SchemeId.SS_PLUS: 2,
    SchemeId.JS: 3,
    SchemeId.JS_PLUS: 4,
    SchemeId.JS_PLUS_CORRECTED: 5,
    SchemeId.EE: 6,
}


@dataclass(frozen=True)
class McOptions:
    """Simulation controls for :func:`run_scheme_mc`.

    ``mismatch_model`` selects how the atom-number imbalance is realized:
    ``"fixed_offset"`` alternates the configured (N_J, N_L) assignment
    between successive samples, ``"gaussian_width"`` draws both ensemble
    sizes from N(N_bar, gamma^2 N_bar / 4).  ``include_exact_trig=False``
    linearizes the light-atom interaction (sin x -> x, cos x -> 1) while
    keeping the classical pulses exact.
    """

    n_samples: int
    seed: int
    mismatch_model: str = "fixed_offset"
    include_exact_trig: bool = True
    workers: int = 1

    def __post_init__(self) -> None:
        if int(self.n_samples) != self.n_samples or self.n_samples < 1000:
            raise InvalidParameterError(
                f"n_samples must be an integer >= 1000, got {self.n_samples!r}"
            )
        if int(self.seed) != self.seed:
            raise InvalidParameterError(f"seed must be an integer, got {self.seed!r}")
        if self.mismatch_model not in MISMATCH_MODELS:
            raise InvalidParameterError(
                f"mismatch_model must be one of {MISMATCH_MODELS}, "
                f"got {self.mismatch_model!r}"
            )
        if int(self.workers) != self.workers or self.workers < 1:
            raise InvalidParameterError(
                f"workers must be an integer >= 1, got {self.workers!r}"
            )
        object.__setattr__(self, "n_samples", int(self.n_samples))
        object.__setattr__(self, "seed", int(self.seed))
        object.__setattr__(self, "workers", int(self.workers))


@dataclass(frozen=True)
class McResult:
    """Sample statistics of a phase estimator over the Monte Carlo run."""

    sample_mean: float
    sample_variance: float
    se_mean: float
    se_variance: float
    n_samples: int
    seed: int


@dataclass(frozen=True)
class MicroState:
    """One sample's initial micro-state, before any pulse is applied.

    Spins are in the post-beam-splitter frame (mean along +x, projection
    noise in y and z); Stokes vectors likewise (mean along +x, shot noise
    in y and z).  ``delta_n_j``/``delta_n_l`` are the two output-port
    detection-noise offsets whose sum perturbs the measured atom number
    and whose half-difference perturbs the measured spin z.
    """

    j: np.ndarray
    l: np.ndarray
    s: np.ndarray
    t: np.ndarray
    s_r: np.ndarray
    t_r: np.ndarray
    n_j: float
    n_l: float
    delta_n_j: tuple
    delta_n_l: tuple


def active_backend() -> str:
    """Name of the pipeline backend a default call would use."""
    return _resolve_backend(None)[0]


def _resolve_backend(name):
    if name is None:
        name = os.environ.get("DIFFINT_FORCE_BACKEND") or None
    if name is None:
        if _kernel is not None:
            return "kernel", _kernel.compute_values
        return "numpy", _pipeline_numpy.compute_values
    if name == "numpy":
        return "numpy", _pipeline_numpy.compute_values
    if name == "kernel":
        if _kernel is None:
            raise InvalidParameterError(
                "the compiled kernel backend was requested but the extension "
                "is not importable; rebuild the package or use backend='numpy'"
            )
        return "kernel", _kernel.compute_values
    raise InvalidParameterError(
        f"backend must be 'numpy' or 'kernel', got {name!r}"
    )


def _rotate_z(vec: np.ndarray, sin_a, cos_a) -> np.ndarray:
    """Rotate (..., 3) vectors about z; the z component is copied as-is."""
    out = np.empty_like(vec)
    out[..., 0] = vec[..., 0] * cos_a - vec[..., 1] * sin_a
    out[..., 1] = vec[..., 0] * sin_a + vec[..., 1] * cos_a
    out[..., 2] = vec[..., 2]
    return out


def qnd_transform(spin, stokes, chi: float, exact: bool = True):
    """Exact transform of one dispersive light pass over one ensemble.

    The Stokes vector precesses about z by ``chi * spin_z`` and the spin
    precesses about z by ``chi * stokes_z``; both z components are
    conserved exactly (they are returned bit-identical to the inputs).
    Accepts single vectors or (..., 3) stacks.
    """
    spin = np.asarray(spin, dtype=np.float64)
    stokes = np.asarray(stokes, dtype=np.float64)
    if spin.shape[-1] != 3 or stokes.shape[-1] != 3:
        raise InvalidParameterError("spin and stokes must be (..., 3) vectors")
    sin_s, cos_s = _pipeline_numpy._interaction(chi * spin[..., 2], exact)
    sin_a, cos_a = _pipeline_numpy._interaction(chi * stokes[..., 2], exact)
    return _rotate_z(spin, sin_a, cos_a), _rotate_z(stokes, sin_s, cos_s)


def joint_qnd_transform(spin_j, spin_l, stokes, chi: float, exact: bool = True):
    """Exact transform of one dispersive pass through both ensembles.

    The light precesses by ``chi * (J_z + L_z)``; each ensemble precesses
    by ``chi * stokes_z``.  All three z components are conserved exactly.
    """
    spin_j = np.asarray(spin_j, dtype=np.float64)
    spin_l = np.asarray(spin_l, dtype=np.float64)
    stokes = np.asarray(stokes, dtype=np.float64)
    for vec in (spin_j, spin_l, stokes):
        if vec.shape[-1] != 3:
            raise InvalidParameterError("all inputs must be (..., 3) vectors")
    sin_s, cos_s = _pipeline_numpy._interaction(
        chi * (spin_j[..., 2] + spin_l[..., 2]), exact
    )
    sin_a, cos_a = _pipeline_numpy._interaction(chi * stokes[..., 2], exact)
    return (
        _rotate_z(spin_j, sin_a, cos_a),
        _rotate_z(spin_l, sin_a, cos_a),
        _rotate_z(stokes, sin_s, cos_s),
    )


def _atom_numbers(cfg: EnsembleConfig, opts: McOptions, lo: int, normals: np.ndarray):
    """Per-sample true atom numbers for samples ``lo .. lo+m-1``."""
    m = normals.shape[0]
    if opts.mismatch_model == "fixed_offset":
        idx = np.arange(lo, lo + m, dtype=np.int64)
        even = (idx % 2) == 0
        atoms_j = np.where(even, cfg.N_J, cfg.N_L)
        atoms_l = np.where(even, cfg.N_L, cfg.N_J)
        return atoms_j, atoms_l
    width = 0.5 * cfg.gamma * math.sqrt(cfg.N_bar)
    atoms_j = np.maximum(cfg.N_bar + width * normals[:, 16], 1.0)
    atoms_l = np.maximum(cfg.N_bar + width * normals[:, 17], 1.0)
    return atoms_j, atoms_l


def sample_initial(
    cfg: EnsembleConfig,
    light: LightConfig,
    opts: McOptions,
    index: int,
) -> MicroState:
    """Reconstruct the initial micro-state of sample ``index``.

    Deterministic in (seed, index): the same sample is returned no matter
    how many samples were drawn before or after it.
    """
    if index < 0 or index >= opts.n_samples:
        raise InvalidParameterError(
            f"sample index {index} outside 0..{opts.n_samples - 1}"
        )
    if not isinstance(light, LightConfig):
        raise InvalidParameterError("light must be a LightConfig")
    z = generate_normals(opts.seed, 1, start=index)
    atoms_j, atoms_l = _atom_numbers(cfg, opts, index, z)
    n_j = float(atoms_j[0])
    n_l = float(atoms_l[0])
    row = z[0]
    sigma_j = math.sqrt(0.25 * n_j)
    sigma_l = math.sqrt(0.25 * n_l)
    shot = math.sqrt(0.25 * light.n)
    half_n = 0.5 * light.n

    def _stokes(slot_y: int, slot_z: int) -> np.ndarray:
        return np.array([half_n, shot * row[slot_y], shot * row[slot_z]])

    if cfg.alpha > 0:
        w_j = math.sqrt(cfg.alpha * n_j) * row[12]
        w_l = math.sqrt(cfg.alpha * n_l) * row[13]
        s_j = math.sqrt(cfg.alpha * n_j) * row[14]
        s_l = math.sqrt(cfg.alpha * n_l) * row[15]
    else:
        w_j = w_l = s_j = s_l = 0.0
    return MicroState(
        j=np.array([0.5 * n_j, sigma_j * row[0], sigma_j * row[1]]),
        l=np.array([0.5 * n_l, sigma_l * row[2], sigma_l * row[3]]),
        s=_stokes(4, 5),
        t=_stokes(6, 7),
        s_r=_stokes(8, 9),
        t_r=_stokes(10, 11),
        n_j=n_j,
        n_l=n_l,
        delta_n_j=(0.5 * s_j + w_j, 0.5 * s_j - w_j),
        delta_n_l=(0.5 * s_l + w_l, 0.5 * s_l - w_l),
    )


def _chunk_partials(values: np.ndarray, center: float):
    """Shifted power sums (about ``center``) of one chunk of estimates."""
    d = values - center
    d2 = d * d
    return (
        float(np.add.reduce(d)),
        float(np.add.reduce(d2)),
        float(np.add.reduce(d2 * d)),
        float(np.add.reduce(d2 * d2)),
    )


def run_scheme_mc(
    cfg: EnsembleConfig,
    light,
    scheme,
    opts: McOptions,
    *,
    varphi: float = math.pi / 4,
    ee_estimator: str = "phi",
    ee_second_pulse: bool = True,
    normals=None,
    backend=None,
) -> McResult:
    """Monte Carlo estimate of one scheme's phase estimator statistics.

    ``light`` may be None for the CS scheme only.  ``normals`` optionally
    supplies a pre-generated ``(>= n_samples, 18)`` array from
    :func:`generate_normals` with the same seed, letting several runs
    share one set of draws.  ``ee_estimator`` selects which of the two EE
    read-outs is analyzed ("phi" or "theta"); ``ee_second_pulse=False``
    omits the EE scheme's second squeezing pulse, which may only be
    combined with the "phi" read-out.
    """
    scheme = SchemeId(scheme)
    if not isinstance(cfg, EnsembleConfig):
        raise InvalidParameterError("cfg must be an EnsembleConfig")
    if not isinstance(opts, McOptions):
        raise InvalidParameterError("opts must be a McOptions")
    if scheme is SchemeId.CS:
        n_photons = float(light.n) if light is not None else 1.0
        chi = float(light.chi) if light is not None else 0.0
    else:
        if not isinstance(light, LightConfig):
            raise InvalidParameterError(
                f"scheme {scheme.value!r} requires a LightConfig"
            )
        if light.chi == 0.0:
            raise InvalidParameterError(
                "the QND coupling chi must be nonzero for light-assisted schemes"
            )
        n_photons = float(light.n)
        chi = float(light.chi)
    if ee_estimator not in ("phi", "theta"):
        raise InvalidParameterError(
            f"ee_estimator must be 'phi' or 'theta', got {ee_estimator!r}"
        )
    if ee_estimator == "theta" and scheme is not SchemeId.EE:
        raise InvalidParameterError(
            "ee_estimator='theta' is only meaningful for the EE scheme"
        )
    if not ee_second_pulse:
        if scheme is not SchemeId.EE:
            raise InvalidParameterError(
                "ee_second_pulse applies only to the EE scheme"
            )
        if ee_estimator == "theta":
            raise InvalidParameterError(
                "the EE theta read-out requires the second squeezing pulse"
            )
    if scheme is SchemeId.EE:
        if min(abs(math.cos(varphi)), abs(math.sin(varphi))) < 1e-12:
            raise DegenerateTiltError(
                f"EE tilt varphi={varphi!r} leaves one read-out with no "
                "phase signal; use a tilt away from multiples of pi/2"
            )
    want_theta = scheme is SchemeId.EE and ee_estimator == "theta"
    center = cfg.theta if want_theta else cfg.phi

    n = opts.n_samples
    if normals is not None:
        normals = np.ascontiguousarray(normals, dtype=np.float64)
        if normals.ndim != 2 or normals.shape[1] != N_SLOTS or normals.shape[0] < n:
            raise InvalidParameterError(
                f"normals must be a (>= {n}, {N_SLOTS}) array"
            )

    _, pipeline = _resolve_backend(backend)
    index = _SCHEME_INDEX[scheme]
    exact = opts.include_exact_trig

    def run_chunk(lo: int, hi: int):
        if normals is not None:
            z = normals[lo:hi]
        else:
            z = generate_normals(opts.seed, hi - lo, start=lo)
        atoms_j, atoms_l = _atom_numbers(cfg, opts, lo, z)
        values = pipeline(
            index,
            z,
            atoms_j,
            atoms_l,
            n_photons,
            chi,
            cfg.alpha,
            cfg.phase_j,
            cfg.phase_l,
            varphi,
            exact,
            want_theta,
            ee_second_pulse,
        )
        return _chunk_partials(np.asarray(values), center)

    bounds = [(lo, min(lo + CHUNK, n)) for lo in range(0, n, CHUNK)]
    if opts.workers > 1 and len(bounds) > 1:
        with ThreadPoolExecutor(max_workers=opts.workers) as pool:
            partials = list(pool.map(lambda b: run_chunk(*b), bounds))
    else:
        partials = [run_chunk(*b) for b in bounds]

    # Merge in chunk order with compensated summation: bit-identical for
    # any worker count.
    s1 = math.fsum(p[0] for p in partials)
    s2 = math.fsum(p[1] for p in partials)
    s3 = math.fsum(p[2] for p in partials)
    s4 = math.fsum(p[3] for p in partials)

    delta = s1 / n
    mean = center + delta
    m2_sum = s2 - n * delta * delta
    sample_variance = m2_sum / (n - 1)
    m2 = m2_sum / n
    m4_sum = (
        s4
        - 4.0 * delta * s3
        + 6.0 * delta * delta * s2
        - 4.0 * delta ** 3 * s1
        + n * delta ** 4
    )
    m4 = m4_sum / n
    se_mean = math.sqrt(max(sample_variance, 0.0) / n)
    se_variance = math.sqrt(max(m4 - m2 * m2, 0.0) / n)
    return McResult(
        sample_mean=mean,
        sample_variance=sample_variance,
        se_mean=se_mean,
        se_variance=se_variance,
        n_samples=n,
        seed=opts.seed,
    )
