"""Closed-form phase estimates for the seven differential measurement schemes.

Each ``eval_*`` function returns the leading-order mean and variance of the
differential-phase estimator for one read-out strategy:

- ``CS``: coherent ensembles, independent fluorescence read-out.
- ``SS``: one number-squeezing light pulse per ensemble before the
  interferometer, fluorescence read-out corrected by the pulse record.
- ``SS_PLUS``: squeezing plus a second light pulse per ensemble after the
  interferometer; the phase is read from the two light records alone.
- ``JS``: a single light pulse squeezes the *sum* of both ensembles.
- ``JS_PLUS``: joint squeezing plus a joint read-out pulse.
- ``JS_PLUS_CORRECTED``: JS_PLUS with the number-mismatch bias subtracted
  using the fluorescence common-phase estimate.
- ``EE``: two joint pulses entangle the ensembles in two bases; a tilted
  interferometer sequence gives simultaneous differential and common phase
  estimates from the read-out pulses.

Variances are decomposed into additive channels (``projection``,
``detection``, ``mismatch``, ``decoherence``) that sum to the total.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from enum import Enum

from .core import EnsembleConfig
from .errors import DegenerateTiltError, InvalidParameterError

_TILT_EPS = 1e-12


class SchemeId(str, Enum):
    CS = "cs"
    SS = "ss"
    SS_PLUS = "ss_plus"
    JS = "js"
    JS_PLUS = "js_plus"
    JS_PLUS_CORRECTED = "js_plus_corrected"
    EE = "ee"


@dataclass(frozen=True)
class LightConfig:
    """Probe pulse: photon number and dispersive coupling."""

    n: float
    chi: float

    def __post_init__(self) -> None:
        if self.n <= 0:
            raise InvalidParameterError(f"photon number must be positive, got {self.n}")


@dataclass(frozen=True)
class PhaseEstimate:
    """Mean, variance and variance breakdown of a phase estimator.

    ``variance`` always equals the sum of the ``breakdown`` channels.
    ``bias_terms`` lists the labelled additive offsets already included in
    ``mean`` (useful to fold systematic offsets into an effective variance).
    """

    mean: float
    variance: float
    breakdown: dict[str, float]
    bias_terms: tuple[tuple[str, float], ...] = ()

    def __post_init__(self) -> None:
        for key in ("projection", "detection", "mismatch", "decoherence"):
            if key not in self.breakdown:
                raise InvalidParameterError(f"breakdown missing channel {key!r}")
            if self.breakdown[key] < 0:
                raise InvalidParameterError(f"breakdown channel {key!r} must be >= 0")
        total = sum(self.breakdown.values())
        if not math.isclose(self.variance, total, rel_tol=1e-12, abs_tol=0.0):
            raise InvalidParameterError("variance must equal the breakdown sum")


def _estimate(mean: float, projection: float, detection: float, mismatch: float,
              bias_terms: tuple[tuple[str, float], ...] = ()) -> PhaseEstimate:
    breakdown = {
        "projection": projection,
        "detection": detection,
        "mismatch": mismatch,
        "decoherence": 0.0,
    }
    return PhaseEstimate(
        mean=mean,
        variance=sum(breakdown.values()),
        breakdown=breakdown,
        bias_terms=bias_terms,
    )


def _require_coupling(light: LightConfig) -> None:
    if light.chi == 0:
        raise InvalidParameterError("chi must be nonzero for schemes with light read-out")


def eval_cs(cfg: EnsembleConfig) -> PhaseEstimate:
    """Coherent-state baseline: independent fluorescence read-out."""
    inv_sum = 1.0 / cfg.N_J + 1.0 / cfg.N_L
    detection_offset = -cfg.alpha * inv_sum
    return _estimate(
        mean=cfg.phi + detection_offset,
        projection=0.25 / cfg.N_J + 0.25 / cfg.N_L,
        detection=cfg.alpha * inv_sum,
        mismatch=0.0,
        bias_terms=(("detection_offset", detection_offset),),
    )


def eval_ss(cfg: EnsembleConfig, light: LightConfig) -> PhaseEstimate:
    """Per-ensemble squeezing pulse, corrected fluorescence read-out."""
    _require_coupling(light)
    inv_sum = 1.0 / cfg.N_J + 1.0 / cfg.N_L
    inv_sq_sum = 1.0 / cfg.N_J**2 + 1.0 / cfg.N_L**2
    detection_offset = -cfg.alpha * inv_sum
    return _estimate(
        mean=cfg.phi + detection_offset,
        projection=inv_sq_sum / (light.n * light.chi**2),
        detection=cfg.alpha * inv_sum,
        mismatch=0.0,
        bias_terms=(("detection_offset", detection_offset),),
    )


def eval_ss_plus(cfg: EnsembleConfig, light: LightConfig) -> PhaseEstimate:
    """Per-ensemble squeezing and read-out pulses; light-only estimator."""
    _require_coupling(light)
    inv_sum = 1.0 / cfg.N_J + 1.0 / cfg.N_L
    inv_sq_sum = 1.0 / cfg.N_J**2 + 1.0 / cfg.N_L**2
    detection_offset = cfg.alpha * cfg.theta * inv_sum
    return _estimate(
        mean=cfg.phi + detection_offset,
        projection=2.0 * inv_sq_sum / (light.n * light.chi**2),
        detection=cfg.alpha * (cfg.theta**2 + cfg.phi**2) * 0.25 * inv_sum,
        mismatch=0.0,
        bias_terms=(("detection_offset", detection_offset),),
    )


def eval_js(cfg: EnsembleConfig, light: LightConfig) -> PhaseEstimate:
    """Joint squeezing pulse, corrected fluorescence read-out."""
    _require_coupling(light)
    n_bar = cfg.N_bar
    detection_offset = -2.0 * cfg.alpha / n_bar
    return _estimate(
        mean=cfg.phi + detection_offset,
        projection=1.0 / (light.n * light.chi**2 * n_bar**2),
        detection=2.0 * cfg.alpha / n_bar,
        mismatch=cfg.gamma**2 / (8.0 * n_bar**2),
        bias_terms=(("detection_offset", detection_offset),),
    )


def eval_js_plus(cfg: EnsembleConfig, light: LightConfig) -> PhaseEstimate:
    """Joint squeezing and read-out pulses; light-only estimator.

    The number mismatch couples the common phase into the mean as an
    uncorrected offset (see ``eval_js_plus_corrected``).
    """
    _require_coupling(light)
    n_bar = cfg.N_bar
    mismatch_offset = cfg.theta * (cfg.N_L - cfg.N_J) / (cfg.N_L + cfg.N_J)
    detection_offset = cfg.alpha * cfg.phi / (2.0 * n_bar)
    phase_sq = cfg.theta**2 + cfg.phi**2
    return _estimate(
        mean=cfg.phi + mismatch_offset + detection_offset,
        projection=2.0 / (light.n * light.chi**2 * n_bar**2),
        detection=cfg.alpha * phase_sq / (2.0 * n_bar),
        mismatch=cfg.gamma**2 / (8.0 * n_bar**2) * cfg.alpha * phase_sq,
        bias_terms=(
            ("number_mismatch_offset", mismatch_offset),
            ("detection_offset", detection_offset),
        ),
    )


def eval_js_plus_corrected(cfg: EnsembleConfig, light: LightConfig) -> PhaseEstimate:
    """JS_PLUS with the mismatch bias subtracted via the fluorescence record."""
    _require_coupling(light)
    n_bar = cfg.N_bar
    detection_offset = cfg.alpha * cfg.phi / (2.0 * n_bar)
    correction_offset = -cfg.gamma**2 * cfg.alpha / (2.0 * n_bar**2)
    return _estimate(
        mean=cfg.phi + detection_offset + correction_offset,
        projection=2.0 / (light.n * light.chi**2 * n_bar**2),
        detection=cfg.alpha * cfg.phi**2 / (2.0 * n_bar),
        mismatch=cfg.gamma**2 / (8.0 * n_bar**2),
        bias_terms=(
            ("detection_offset", detection_offset),
            ("mismatch_detection_offset", correction_offset),
        ),
    )


def eval_ee(
    cfg: EnsembleConfig, light: LightConfig, varphi: float = math.pi / 4
) -> tuple[PhaseEstimate, PhaseEstimate]:
    """Entangled-ensemble scheme: simultaneous (phi, theta) estimates.

    ``varphi`` is the tilt of the interferometer pulses that splits the
    joint read-out sensitivity between the differential phase (weight
    cos varphi) and the common phase (weight sin varphi).  At varphi = 0 or
    pi/2 one of the two estimators loses all sensitivity, so both are only
    defined away from those points.
    """
    _require_coupling(light)
    cos_v = math.cos(varphi)
    sin_v = math.sin(varphi)
    if abs(cos_v) < _TILT_EPS or abs(sin_v) < _TILT_EPS:
        raise DegenerateTiltError(
            f"tilt varphi={varphi} leaves one phase estimator without sensitivity; "
            "choose varphi away from multiples of pi/2"
        )
    n_bar = cfg.N_bar
    shot = 2.0 / (n_bar**2 * light.n * light.chi**2)
    back_action = cfg.gamma**2 * light.n * light.chi**2 / (8.0 * n_bar)
    mismatch_ratio = (cfg.N_L - cfg.N_J) / (cfg.N_L + cfg.N_J)

    phi_mismatch_offset = cfg.theta * mismatch_ratio
    phi_detection_offset = cfg.alpha * cfg.phi / (2.0 * n_bar)
    phi_estimate = _estimate(
        mean=cfg.phi + phi_mismatch_offset + phi_detection_offset,
        projection=shot / cos_v**2,
        detection=0.0,
        mismatch=back_action,
        bias_terms=(
            ("number_mismatch_offset", phi_mismatch_offset),
            ("detection_offset", phi_detection_offset),
        ),
    )

    theta_mismatch_offset = cfg.phi * mismatch_ratio
    theta_detection_offset = cfg.alpha * cfg.theta / (2.0 * n_bar)
    theta_estimate = _estimate(
        mean=cfg.theta + theta_mismatch_offset + theta_detection_offset,
        projection=shot / sin_v**2,
        detection=0.0,
        mismatch=back_action,
        bias_terms=(
            ("number_mismatch_offset", theta_mismatch_offset),
            ("detection_offset", theta_detection_offset),
        ),
    )
    return phi_estimate, theta_estimate


def evaluate_scheme(
    scheme: SchemeId,
    cfg: EnsembleConfig,
    light: LightConfig | None = None,
    varphi: float = math.pi / 4,
) -> PhaseEstimate:
    """Dispatch to the scheme's evaluator, returning the phi estimate."""
    scheme = SchemeId(scheme)
    if scheme is SchemeId.CS:
        return eval_cs(cfg)
    if light is None:
        raise InvalidParameterError(f"scheme {scheme.value} requires a light configuration")
    if scheme is SchemeId.SS:
        return eval_ss(cfg, light)
    if scheme is SchemeId.SS_PLUS:
        return eval_ss_plus(cfg, light)
    if scheme is SchemeId.JS:
        return eval_js(cfg, light)
    if scheme is SchemeId.JS_PLUS:
        return eval_js_plus(cfg, light)
    if scheme is SchemeId.JS_PLUS_CORRECTED:
        return eval_js_plus_corrected(cfg, light)
    return eval_ee(cfg, light, varphi)[0]


# ---------------------------------------------------------------------------
# Small-parameter assumption checks
# ---------------------------------------------------------------------------

#: Ratio names, in a fixed order.
ASSUMPTION_NAMES = (
    "atom_linearization",      # N_bar chi^2        : probe rotation per atom stays linear
    "phase_linearity",         # n chi^2 sqrt(N_bar) (theta^2+phi^2) / sqrt(8)
    "mismatch_phase_coupling",  # gamma sqrt(N_bar) (n chi^2)^2 (theta^2+phi^2)
    "mismatch_light_noise",    # n chi^2 gamma^2 / 8
    "common_phase_bias",       # gamma^2 N_bar n chi^2 theta^2 / 8
)

#: Which ratios bound the leading-order result of each scheme.
_SCHEME_ASSUMPTIONS: dict[SchemeId, tuple[str, ...]] = {
    SchemeId.CS: (),
    SchemeId.SS: ASSUMPTION_NAMES[:2],
    SchemeId.SS_PLUS: ASSUMPTION_NAMES[:2],
    SchemeId.JS: ASSUMPTION_NAMES[:4],
    SchemeId.JS_PLUS: ASSUMPTION_NAMES[:5],
    SchemeId.JS_PLUS_CORRECTED: ASSUMPTION_NAMES[:4],
    SchemeId.EE: (
        "atom_linearization",
        "phase_linearity",
        "mismatch_light_noise",
    ),
}


@dataclass(frozen=True)
class AssumptionReport:
    """Small-parameter ratios behind the closed forms.

    ``ratios`` holds every ratio; ``checked`` names the subset that the
    requested scheme actually relies on; ``satisfied`` is True when all
    checked ratios are below ``threshold``.
    """

    scheme: SchemeId
    ratios: dict[str, float]
    checked: tuple[str, ...]
    threshold: float
    satisfied: bool

    def violations(self) -> dict[str, float]:
        return {k: self.ratios[k] for k in self.checked if self.ratios[k] >= self.threshold}


def check_assumptions(
    cfg: EnsembleConfig,
    light: LightConfig | None,
    scheme: SchemeId,
    threshold: float = 0.1,
) -> AssumptionReport:
    """Evaluate the small-parameter ratios the closed forms rely on."""
    scheme = SchemeId(scheme)
    if threshold <= 0:
        raise InvalidParameterError(f"threshold must be positive, got {threshold}")
    if light is None:
        if scheme is not SchemeId.CS:
            raise InvalidParameterError(
                f"scheme {scheme.value} requires a light configuration"
            )
        n_chi_sq = 0.0
        chi = 0.0
        n = 0.0
    else:
        n = light.n
        chi = light.chi
        n_chi_sq = n * chi**2
    n_bar = cfg.N_bar
    phase_sq = cfg.theta**2 + cfg.phi**2
    sqrt_n_bar = math.sqrt(n_bar)
    ratios = {
        "atom_linearization": n_bar * chi**2,
        "phase_linearity": n_chi_sq * sqrt_n_bar * phase_sq / math.sqrt(8.0),
        "mismatch_phase_coupling": cfg.gamma * sqrt_n_bar * n_chi_sq**2 * phase_sq,
        "mismatch_light_noise": n_chi_sq * cfg.gamma**2 / 8.0,
        "common_phase_bias": cfg.gamma**2 * n_bar * n_chi_sq * cfg.theta**2 / 8.0,
    }
    checked = _SCHEME_ASSUMPTIONS[scheme]
    satisfied = all(ratios[name] < threshold for name in checked)
    return AssumptionReport(
        scheme=scheme,
        ratios=ratios,
        checked=checked,
        threshold=threshold,
        satisfied=satisfied,
    )
