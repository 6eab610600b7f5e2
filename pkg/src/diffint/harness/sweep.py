"""Scheme-comparison sweeps over the mean atom number.

Each sweep evaluates closed-form variances on a log-spaced atom-number
grid, normalizes them to the coherent-state baseline at the same point,
and reports the noise reduction in dB.  Output is deterministic: rows are
ordered by scheme (canonical order) and then by atom number.
"""
from __future__ import annotations

import csv
import math
import xml.etree.ElementTree as ET
from dataclasses import dataclass

import numpy as np

from ..core import EnsembleConfig
from ..decoherence import corrected_variance, optimize_detuning
from ..errors import InvalidParameterError
from ..schemes import (
    LightConfig,
    SchemeId,
    check_assumptions,
    eval_cs,
    evaluate_scheme,
)
from .config import RunConfig

__all__ = ["SweepRow", "SweepSpec", "emit_csv", "emit_svg", "run_sweep", "write_csv"]

CSV_HEADER = (
    "scheme", "N_bar", "variance", "cs_variance", "ratio", "dB",
    "delta", "chi", "assumptions_ok",
)

_CANONICAL_ORDER = {scheme: index for index, scheme in enumerate(SchemeId)}

_SVG_COLORS = {
    SchemeId.CS: "#555555",
    SchemeId.SS: "#1f77b4",
    SchemeId.SS_PLUS: "#ff7f0e",
    SchemeId.JS: "#2ca02c",
    SchemeId.JS_PLUS: "#d62728",
    SchemeId.JS_PLUS_CORRECTED: "#9467bd",
    SchemeId.EE: "#8c564b",
}


@dataclass(frozen=True)
class SweepSpec:
    """Definition of one atom-number sweep."""

    config: RunConfig
    nbar_min: float
    nbar_max: float
    points: int
    schemes: tuple[SchemeId, ...]
    optimize_detuning: bool = False
    include_decoherence: bool = False
    include_bias_in_variance: bool = True

    def __post_init__(self) -> None:
        if not (0 < self.nbar_min < self.nbar_max):
            raise InvalidParameterError(
                f"need 0 < nbar_min < nbar_max, got [{self.nbar_min}, {self.nbar_max}]"
            )
        if self.points < 2:
            raise InvalidParameterError(f"points must be >= 2, got {self.points}")
        if not self.schemes:
            raise InvalidParameterError("scheme list must be non-empty")
        object.__setattr__(
            self, "schemes", tuple(SchemeId(scheme) for scheme in self.schemes))
        if self.optimize_detuning and not self.include_decoherence:
            raise InvalidParameterError(
                "per-point detuning optimization balances measurement strength "
                "against scattering; it requires include_decoherence=True"
            )

    @classmethod
    def from_preset(cls, name: str, config: RunConfig, **overrides) -> "SweepSpec":
        """Sweep bundles: 'ideal' plain closed forms over [1e6, 1e10];
        'realistic' adds decoherence and per-point detuning optimization
        over [1e8, 1e12], without the entangled-ensemble scheme (its
        mismatch penalty puts it far off scale at gamma_mismatch = 1e4)."""
        all_schemes = tuple(SchemeId)
        bundles = {
            "ideal": dict(nbar_min=1e6, nbar_max=1e10, points=25,
                          schemes=all_schemes,
                          optimize_detuning=False, include_decoherence=False),
            "realistic": dict(nbar_min=1e8, nbar_max=1e12, points=25,
                              schemes=tuple(s for s in all_schemes
                                            if s is not SchemeId.EE),
                              optimize_detuning=True, include_decoherence=True),
        }
        try:
            kwargs = dict(bundles[name])
        except KeyError:
            raise InvalidParameterError(
                f"unknown sweep preset {name!r}; available: {', '.join(sorted(bundles))}"
            ) from None
        kwargs.update(overrides)
        return cls(config=config, **kwargs)


@dataclass(frozen=True)
class SweepRow:
    """One (scheme, atom number) evaluation, normalized to the baseline."""

    scheme: SchemeId
    n_bar: float
    variance: float
    cs_variance: float
    ratio: float
    dB: float
    delta: float
    chi: float
    assumptions_ok: bool


def _row_for(spec: SweepSpec, scheme: SchemeId, n_bar: float,
             cfg: EnsembleConfig, cs_variance: float) -> SweepRow:
    config = spec.config
    if scheme is SchemeId.CS:
        variance = cs_variance
        delta = 0.0
        chi = 0.0
        light = None
    elif spec.optimize_detuning:
        params = config.physical()
        optimum = optimize_detuning(
            params, cfg, scheme, include_noise_terms=True, varphi=config.varphi)
        variance = optimum.variance
        delta = optimum.detuning
        chi = params.with_detuning(delta).chi
        light = LightConfig(n=config.n, chi=chi)
    else:
        delta = config.detuning
        chi = config.chi
        light = LightConfig(n=config.n, chi=chi)
        estimate = evaluate_scheme(scheme, cfg, light, varphi=config.varphi)
        if spec.include_decoherence:
            estimate = corrected_variance(estimate, config.physical(), cfg, scheme)
        variance = estimate.variance

    if scheme is SchemeId.JS_PLUS and spec.include_bias_in_variance:
        # Fair comparison: the uncorrected common-phase offset fluctuates
        # with the number mismatch, so fold its square into the variance.
        bias = cfg.theta * (cfg.N_L - cfg.N_J) / (cfg.N_L + cfg.N_J)
        variance = variance + bias**2

    ratio = variance / cs_variance
    report = check_assumptions(cfg, light, scheme)
    return SweepRow(
        scheme=scheme,
        n_bar=n_bar,
        variance=variance,
        cs_variance=cs_variance,
        ratio=ratio,
        dB=10.0 * math.log10(ratio),
        delta=delta,
        chi=chi,
        assumptions_ok=report.satisfied,
    )


def run_sweep(spec: SweepSpec) -> list[SweepRow]:
    """Evaluate every (scheme, atom number) combination of the sweep."""
    grid = np.logspace(
        math.log10(spec.nbar_min), math.log10(spec.nbar_max), spec.points)
    schemes = sorted(set(spec.schemes), key=_CANONICAL_ORDER.__getitem__)
    rows: list[SweepRow] = []
    for scheme in schemes:
        for n_bar in grid:
            cfg = spec.config.ensemble(float(n_bar))
            cs_variance = eval_cs(cfg).variance
            rows.append(_row_for(spec, scheme, float(n_bar), cfg, cs_variance))
    return rows


def write_csv(rows: list[SweepRow], handle) -> None:
    """Write rows as CSV: 12 significant digits, LF line endings."""
    if not rows:
        raise InvalidParameterError("no rows to write")
    writer = csv.writer(handle, lineterminator="\n")
    writer.writerow(CSV_HEADER)
    for row in rows:
        writer.writerow([
            row.scheme.value,
            f"{row.n_bar:.11e}",
            f"{row.variance:.11e}",
            f"{row.cs_variance:.11e}",
            f"{row.ratio:.11e}",
            f"{row.dB:.11e}",
            f"{row.delta:.11e}",
            f"{row.chi:.11e}",
            "true" if row.assumptions_ok else "false",
        ])


def emit_csv(rows: list[SweepRow], path: str) -> None:
    """Write rows to ``path`` as CSV (see write_csv)."""
    with open(path, "w", encoding="utf-8", newline="") as handle:
        write_csv(rows, handle)


def _decade_ticks(lo: float, hi: float) -> list[int]:
    ticks = list(range(math.ceil(lo), math.floor(hi) + 1))
    return ticks or [round(lo)]


def emit_svg(rows: list[SweepRow], path: str) -> None:
    """Write a standalone log-log SVG plot: ratio vs atom number.

    One polyline per scheme, decade ticks and gridlines, inline legend;
    no external assets.
    """
    if not rows:
        raise InvalidParameterError("no rows to plot")
    by_scheme: dict[SchemeId, list[SweepRow]] = {}
    for row in rows:
        by_scheme.setdefault(row.scheme, []).append(row)
    for scheme, group in by_scheme.items():
        if len(group) < 2:
            raise InvalidParameterError(
                f"scheme {scheme.value} has {len(group)} point(s); need >= 2 to plot")
        group.sort(key=lambda r: r.n_bar)

    width, height = 760.0, 480.0
    left, right, top, bottom = 70.0, 190.0, 24.0, 56.0
    plot_w = width - left - right
    plot_h = height - top - bottom

    xs = [math.log10(row.n_bar) for row in rows]
    ys = [math.log10(row.ratio) for row in rows]
    x_lo, x_hi = min(xs), max(xs)
    y_lo, y_hi = min(ys), max(ys)
    if y_hi - y_lo < 1e-9:
        y_lo, y_hi = y_lo - 0.5, y_hi + 0.5
    x_pad = 0.02 * (x_hi - x_lo) or 0.5
    y_pad = 0.05 * (y_hi - y_lo)
    x_lo, x_hi = x_lo - x_pad, x_hi + x_pad
    y_lo, y_hi = y_lo - y_pad, y_hi + y_pad

    def px(x: float) -> float:
        return left + (x - x_lo) / (x_hi - x_lo) * plot_w

    def py(y: float) -> float:
        return top + (y_hi - y) / (y_hi - y_lo) * plot_h

    svg = ET.Element("svg", xmlns="http://www.w3.org/2000/svg",
                     width=str(int(width)), height=str(int(height)),
                     viewBox=f"0 0 {int(width)} {int(height)}")
    ET.SubElement(svg, "rect", x="0", y="0", width=str(int(width)),
                  height=str(int(height)), fill="white")
    ET.SubElement(svg, "rect", x=f"{left:.1f}", y=f"{top:.1f}",
                  width=f"{plot_w:.1f}", height=f"{plot_h:.1f}",
                  fill="none", stroke="#222222")

    text_attrs = {"font-family": "sans-serif", "font-size": "12",
                  "fill": "#222222"}
    for tick in _decade_ticks(x_lo, x_hi):
        x = px(tick)
        ET.SubElement(svg, "line", x1=f"{x:.1f}", y1=f"{top:.1f}",
                      x2=f"{x:.1f}", y2=f"{top + plot_h:.1f}",
                      stroke="#dddddd")
        label = ET.SubElement(svg, "text", x=f"{x:.1f}",
                              y=f"{top + plot_h + 18:.1f}",
                              **{**text_attrs, "text-anchor": "middle"})
        label.text = f"1e{tick}"
    for tick in _decade_ticks(y_lo, y_hi):
        y = py(tick)
        ET.SubElement(svg, "line", x1=f"{left:.1f}", y1=f"{y:.1f}",
                      x2=f"{left + plot_w:.1f}", y2=f"{y:.1f}",
                      stroke="#dddddd")
        label = ET.SubElement(svg, "text", x=f"{left - 8:.1f}", y=f"{y + 4:.1f}",
                              **{**text_attrs, "text-anchor": "end"})
        label.text = f"1e{tick}"

    x_title = ET.SubElement(svg, "text", x=f"{left + plot_w / 2:.1f}",
                            y=f"{height - 14:.1f}",
                            **{**text_attrs, "text-anchor": "middle"})
    x_title.text = "mean atom number per ensemble"
    y_title = ET.SubElement(
        svg, "text", x="18", y=f"{top + plot_h / 2:.1f}",
        transform=f"rotate(-90 18 {top + plot_h / 2:.1f})",
        **{**text_attrs, "text-anchor": "middle"})
    y_title.text = "variance / coherent-state variance"

    ordered = sorted(by_scheme, key=_CANONICAL_ORDER.__getitem__)
    for index, scheme in enumerate(ordered):
        color = _SVG_COLORS[scheme]
        points = " ".join(
            f"{px(math.log10(row.n_bar)):.2f},{py(math.log10(row.ratio)):.2f}"
            for row in by_scheme[scheme])
        ET.SubElement(svg, "polyline", points=points, fill="none",
                      stroke=color, **{"stroke-width": "1.8"})
        swatch_y = top + 12 + 20 * index
        legend_x = left + plot_w + 16
        ET.SubElement(svg, "line", x1=f"{legend_x:.1f}", y1=f"{swatch_y:.1f}",
                      x2=f"{legend_x + 22:.1f}", y2=f"{swatch_y:.1f}",
                      stroke=color, **{"stroke-width": "2.5"})
        label = ET.SubElement(svg, "text", x=f"{legend_x + 28:.1f}",
                              y=f"{swatch_y + 4:.1f}", **text_attrs)
        label.text = scheme.value

    ET.ElementTree(svg).write(path, encoding="utf-8", xml_declaration=True)
