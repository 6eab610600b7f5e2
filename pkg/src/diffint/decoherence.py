"""Photon-scattering decoherence and detuning optimization.

Every dispersive probe pulse scatters a small fraction of its photons;
each scattered photon dephases one atom and removes one photon from the
coherent read-out mode.  To leading order in the scattered fractions this
damps the longitudinal components of the collective spin and Stokes
vectors and feeds white noise into them.  This module applies those
corrections to Gaussian moments and to closed-form phase variances, and
finds the probe detuning that balances measurement strength (which favors
small detuning) against scattering (which favors large detuning).
"""
from __future__ import annotations

import math
import warnings
from dataclasses import dataclass
from typing import NamedTuple

from .core import EnsembleConfig, PhysicalParams, SpinMoments, StokesMoments
from .errors import InvalidParameterError, OptimizationFailedError
from .schemes import LightConfig, PhaseEstimate, SchemeId, evaluate_scheme

__all__ = [
    "DecoherenceParams",
    "DetuningOptimum",
    "analytic_minimum_variance",
    "corrected_variance",
    "decohere_spin_moments",
    "decohere_stokes_moments",
    "optical_density",
    "optimize_detuning",
]

# Weight of the additive decoherence correction, per scheme: the number of
# probe read-out channels whose scattering noise enters the estimator.  All
# single-record and differenced-record schemes use one effective probe mode
# per estimate; the entangled-ensemble chain drives the atoms through both
# of its recorded quadrature pairs, so each of its estimators inherits the
# scattering of two.
_READOUT_WEIGHT = {
    SchemeId.SS: 1.0,
    SchemeId.SS_PLUS: 1.0,
    SchemeId.JS: 1.0,
    SchemeId.JS_PLUS: 1.0,
    SchemeId.JS_PLUS_CORRECTED: 1.0,
    SchemeId.EE: 2.0,
}

# Detuning is resolved to this relative tolerance by the golden-section
# stage; the variance at the optimum is then converged far tighter (the
# objective is locally quadratic in log detuning).
_DETUNING_RTOL = 1e-4
_GRID_POINTS_PER_DECADE = 25
_MIN_BRACKET_DECADES = 6.0


def _scatter_fraction(count: float, chi: float, gamma_linewidth: float,
                      detuning: float) -> float:
    """Fraction of `count` scatterers lost to spontaneous emission."""
    if detuning == 0:
        raise InvalidParameterError("detuning must be nonzero")
    if gamma_linewidth < 0:
        raise InvalidParameterError("gamma_linewidth must be nonnegative")
    fraction = count * chi * gamma_linewidth / detuning
    if fraction < 0:
        raise InvalidParameterError(
            "scattered fraction must be nonnegative; chi and detuning must "
            "carry the same sign"
        )
    return fraction


def optical_density(n_atoms: float, chi: float, gamma_linewidth: float,
                    detuning: float) -> float:
    """Optical density kappa = N chi Gamma / Delta of one ensemble.

    kappa is the fraction of probe photons scattered per pass; the
    leading-order treatment assumes kappa < 1 and a warning is emitted
    outside that regime.
    """
    kappa = _scatter_fraction(n_atoms, chi, gamma_linewidth, detuning)
    if kappa >= 1.0:
        warnings.warn(
            f"optical density kappa = {kappa:.3g} >= 1: leading-order "
            "decoherence corrections are unreliable here",
            stacklevel=2,
        )
    return kappa


@dataclass(frozen=True)
class DecoherenceParams:
    """Damping factors and added-noise magnitudes of a single probe pass.

    - ``optical_density``: kappa = N chi Gamma / Delta.
    - ``spin_damping``: factor 1 - n chi Gamma / Delta on the longitudinal
      spin component (n photons scan the atoms).
    - ``stokes_damping``: factor 1 - kappa on the longitudinal Stokes
      component (N atoms scan the light).
    - ``spin_added_noise``: n N chi Gamma / (2 Delta), added to the spin
      z-variance.
    - ``stokes_added_noise``: N^2 chi Gamma / (4 Delta), added to the
      Stokes z-variance.
    """

    optical_density: float
    spin_damping: float
    stokes_damping: float
    spin_added_noise: float
    stokes_added_noise: float

    @classmethod
    def from_probe(cls, n_photons: float, n_atoms: float, chi: float,
                   gamma_linewidth: float, detuning: float) -> "DecoherenceParams":
        kappa = optical_density(n_atoms, chi, gamma_linewidth, detuning)
        spin_loss = _scatter_fraction(n_photons, chi, gamma_linewidth, detuning)
        return cls(
            optical_density=kappa,
            spin_damping=1.0 - spin_loss,
            stokes_damping=1.0 - kappa,
            spin_added_noise=0.5 * n_photons * n_atoms * chi * gamma_linewidth / detuning,
            stokes_added_noise=0.25 * n_atoms**2 * chi * gamma_linewidth / detuning,
        )


def _damp_longitudinal(mean, cov, damping: float, added_noise: float):
    """Apply z-damping and added z-noise to a Gaussian (mean, cov) pair."""
    mean = mean.copy()
    cov = cov.copy()
    mean[2] *= damping
    cov[2, 2] = damping**2 * cov[2, 2] + added_noise
    for i in (0, 1):
        cov[i, 2] *= damping
        cov[2, i] *= damping
    return mean, cov


def decohere_spin_moments(moments: SpinMoments, n_photons: float, chi: float,
                          gamma_linewidth: float, detuning: float) -> SpinMoments:
    """Spin moments after one probe pulse of ``n_photons`` photons.

    The longitudinal component is damped by 1 - n chi Gamma / Delta and
    picks up the added variance n N chi Gamma / (2 Delta); transverse
    components are untouched.
    """
    loss = _scatter_fraction(n_photons, chi, gamma_linewidth, detuning)
    added = 0.5 * n_photons * moments.n_atoms * chi * gamma_linewidth / detuning
    mean, cov = _damp_longitudinal(moments.mean, moments.cov, 1.0 - loss, added)
    return SpinMoments(mean=mean, cov=cov, n_atoms=moments.n_atoms)


def decohere_stokes_moments(moments: StokesMoments, n_atoms: float, chi: float,
                            gamma_linewidth: float, detuning: float) -> StokesMoments:
    """Stokes moments after one pass through an ensemble of ``n_atoms``.

    The longitudinal component is damped by 1 - kappa and picks up the
    added variance N^2 chi Gamma / (4 Delta).
    """
    kappa = optical_density(n_atoms, chi, gamma_linewidth, detuning)
    added = 0.25 * n_atoms**2 * chi * gamma_linewidth / detuning
    mean, cov = _damp_longitudinal(moments.mean, moments.cov, 1.0 - kappa, added)
    return StokesMoments(mean=mean, cov=cov, n_photons=moments.n_photons)


def corrected_variance(base: PhaseEstimate, params: PhysicalParams,
                       cfg: EnsembleConfig, scheme: SchemeId) -> PhaseEstimate:
    """Fold the probe-scattering variance penalty into a phase estimate.

    ``base`` must have been evaluated with the same probe (photon number
    and coupling) described by ``params``.  The added amount is

        weight * ( n chi Gamma / (Delta N_bar)  +  2 Gamma / (n^2 chi Delta) )

    per read-out channel: the first term is dephased-atom noise referred to
    the phase, the second is scattered-photon noise on the light record.
    The mean and bias terms are unchanged.
    """
    scheme = SchemeId(scheme)
    if scheme is SchemeId.CS:
        raise InvalidParameterError(
            "coherent-state read-out uses no probe light; there is no "
            "scattering correction to apply"
        )
    chi = params.chi
    n = params.n_photons
    atom_term = _scatter_fraction(n, chi, params.gamma_linewidth,
                                  params.detuning) / cfg.N_bar
    light_term = _scatter_fraction(
        2.0 / (n * chi) ** 2, chi, params.gamma_linewidth, params.detuning)
    added = _READOUT_WEIGHT[scheme] * (atom_term + light_term)
    breakdown = dict(base.breakdown)
    breakdown["decoherence"] = added
    return PhaseEstimate(
        mean=base.mean,
        variance=sum(breakdown.values()),
        breakdown=breakdown,
        bias_terms=base.bias_terms,
    )


def analytic_minimum_variance(params: PhysicalParams, n_bar: float) -> float:
    """Closed-form floor of the optimized single-pass variance.

    Minimizing projection noise 2/(n chi^2 N_bar^2) plus the dephased-atom
    penalty n chi Gamma/(Delta N_bar) over the far-detuned coupling
    chi = 2 g / Delta gives 2 sqrt(Gamma / g) / N_bar^(3/2), independent of
    the photon number.
    """
    if n_bar <= 0:
        raise InvalidParameterError(f"n_bar must be positive, got {n_bar}")
    if params.gamma_linewidth <= 0:
        raise InvalidParameterError("gamma_linewidth must be positive")
    return 2.0 * math.sqrt(params.gamma_linewidth / params.coupling) / n_bar**1.5


class DetuningOptimum(NamedTuple):
    """Result of a detuning optimization."""

    detuning: float
    variance: float
    analytic_min: float


def optimize_detuning(
    params: PhysicalParams,
    cfg: EnsembleConfig,
    scheme: SchemeId,
    *,
    include_noise_terms: bool = True,
    bracket: tuple[float, float] | None = None,
    varphi: float = math.pi / 4,
) -> DetuningOptimum:
    """Detuning minimizing the decoherence-corrected scheme variance.

    The coupling is re-derived from the candidate detuning at every step,
    so the objective trades measurement strength against scattering.  A
    logarithmic grid scan brackets the minimum and golden-section search
    refines it to ``1e-4`` relative in the detuning.  The search runs over
    positive detunings; the objective is even in the detuning's sign.

    With ``include_noise_terms=False`` the detection-noise and
    number-mismatch contributions are dropped (the ensembles are replaced
    by ideal, equal-sized ones), which is the regime where ``analytic_min``
    is attained.  ``bracket`` defaults to (0.01, 1e6) times the linewidth
    and must span at least six decades.
    """
    scheme = SchemeId(scheme)
    if scheme is SchemeId.CS:
        raise InvalidParameterError(
            "coherent-state read-out has no probe detuning to optimize"
        )
    gamma = params.gamma_linewidth
    if gamma <= 0:
        raise InvalidParameterError(
            "gamma_linewidth must be positive: without scattering the "
            "variance has no interior minimum in the detuning"
        )
    if bracket is None:
        bracket = (1e-2 * gamma, 1e6 * gamma)
    lo, hi = float(bracket[0]), float(bracket[1])
    if not (0.0 < lo < hi):
        raise InvalidParameterError(f"bracket must satisfy 0 < lo < hi, got {bracket}")
    decades = math.log10(hi / lo)
    if decades < _MIN_BRACKET_DECADES:
        raise InvalidParameterError(
            f"bracket spans {decades:.2f} decades; need at least "
            f"{_MIN_BRACKET_DECADES:.0f} to bracket the minimum robustly"
        )

    if include_noise_terms:
        eval_cfg = cfg
    else:
        eval_cfg = EnsembleConfig.symmetric(
            cfg.N_bar, gamma=0.0, alpha=0.0, phi=cfg.phi, theta=cfg.theta
        )

    def objective(log_delta: float) -> float:
        probe = params.with_detuning(math.exp(log_delta))
        light = LightConfig(n=probe.n_photons, chi=probe.chi)
        base = evaluate_scheme(scheme, eval_cfg, light, varphi=varphi)
        return corrected_variance(base, probe, eval_cfg, scheme).variance

    log_lo, log_hi = math.log(lo), math.log(hi)
    n_grid = int(math.ceil(decades * _GRID_POINTS_PER_DECADE)) + 1
    step = (log_hi - log_lo) / (n_grid - 1)
    grid = [log_lo + i * step for i in range(n_grid)]
    values = [objective(x) for x in grid]
    best = min(range(n_grid), key=values.__getitem__)
    if best == 0 or best == n_grid - 1:
        edge = math.exp(grid[best])
        raise OptimizationFailedError(
            f"no interior minimum: scanning detuning in [{lo:.4g}, {hi:.4g}] "
            f"the variance is smallest at the bracket edge {edge:.4g}; "
            "widen the bracket"
        )

    # Golden-section refinement on log(detuning) within the bracketing
    # grid cell pair.
    inv_golden = (math.sqrt(5.0) - 1.0) / 2.0
    a, b = grid[best - 1], grid[best + 1]
    c = b - inv_golden * (b - a)
    d = a + inv_golden * (b - a)
    f_c, f_d = objective(c), objective(d)
    while (b - a) > _DETUNING_RTOL:
        if f_c < f_d:
            b, d, f_d = d, c, f_c
            c = b - inv_golden * (b - a)
            f_c = objective(c)
        else:
            a, c, f_c = c, d, f_d
            d = a + inv_golden * (b - a)
            f_d = objective(d)
    log_best = 0.5 * (a + b)
    return DetuningOptimum(
        detuning=math.exp(log_best),
        variance=objective(log_best),
        analytic_min=analytic_minimum_variance(params, cfg.N_bar),
    )
