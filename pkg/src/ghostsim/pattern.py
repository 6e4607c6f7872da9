"""Coincidence interference pattern of particle 2 and fringe-based coherence."""
from __future__ import annotations

import csv
import json
import math
from dataclasses import dataclass, field

import numpy as np

from .branches import Branches, compute_branches
from .discrimination import DetectorGram
from .errors import ExtractionError, GridError, RegimeError
from .gaussian_core import Geometry, SourceParams, in_strong_regime

DEFAULT_POINTS = 4001
DEFAULT_PERIODS = 10


@dataclass
class PatternResult:
    z2_grid: np.ndarray
    intensity: np.ndarray
    incoherent: np.ndarray
    n: int
    meta: dict = field(default_factory=dict)

    @property
    def cross(self):
        return self.intensity - self.incoherent

    def to_csv(self, path):
        with open(path, "w", newline="") as fh:
            w = csv.writer(fh)
            w.writerow(["z2", "intensity", "incoherent"])
            for row in zip(self.z2_grid, self.intensity, self.incoherent):
                w.writerow([f"{v:.12g}" for v in row])

    def to_dict(self):
        return {
            "schema": 1,
            "n": self.n,
            "z2": self.z2_grid.tolist(),
            "intensity": self.intensity.tolist(),
            "incoherent": self.incoherent.tolist(),
            "meta": self.meta,
        }

    @classmethod
    def from_dict(cls, d):
        return cls(np.asarray(d["z2"]), np.asarray(d["intensity"]), np.asarray(d["incoherent"]),
                   d["n"], d.get("meta", {}))

    def to_json(self, path):
        with open(path, "w") as fh:
            json.dump(self.to_dict(), fh, sort_keys=True)

    def to_svg(self, path, title="coincidence pattern"):
        with open(path, "w") as fh:
            fh.write(render_svg(self, title))


def _check_grid(z2):
    z2 = np.asarray(z2, dtype=float)
    if z2.ndim != 1 or z2.size == 0:
        raise GridError("z2 grid must be a non-empty 1-D array")
    if np.any(np.diff(z2) <= 0):
        raise GridError("z2 grid must be strictly increasing")
    return z2


def _phases(phases, n):
    return np.zeros(n) if phases is None else np.asarray(phases, dtype=float)


def pattern_from_branches(br: Branches, det: DetectorGram, z2, phases=None, meta=None) -> PatternResult:
    z2 = _check_grid(z2)
    amps = br.amplitudes(z2, phases)
    g = det.gram
    intensity = np.einsum("jz,jk,kz->z", amps.conj(), g, amps).real
    incoherent = np.einsum("kz,k->z", np.abs(amps) ** 2, np.diag(g).real)
    return PatternResult(z2, np.maximum(intensity, 0.0), incoherent, br.n, dict(meta or {}))


def coincidence_pattern(src: SourceParams, geo: Geometry, det: DetectorGram, z2_grid,
                        phases=None) -> PatternResult:
    """Joint detection density at (z1_detect, z2) from the n evolved branches.

    The path amplitudes come from conditioning the source on the slits;
    ``det`` contributes its Gram matrix. The incoherent counterpart drops all
    cross terms.
    """
    if det.n != geo.n:
        raise GridError(f"detector has {det.n} states but the array has {geo.n} slits")
    br = compute_branches(src, geo)
    meta = {
        "path_amplitudes": br.c.tolist(),
        "envelopes": br.envelopes.tolist(),
        "max_psi_overlap": br.max_psi_overlap,
        "route": "exact",
    }
    return pattern_from_branches(br, det, z2_grid, phases, meta)


def final_width(src: SourceParams, geo: Geometry) -> complex:
    return complex(compute_branches(src, geo).particle2[0].gamma_c)


def fringe_period(src: SourceParams, geo: Geometry) -> float:
    """Fringe period for adjacent slits from the exact final particle-2 width."""
    w = final_width(src, geo)
    if w.imag <= 0:
        return math.inf
    return math.pi * abs(w) ** 2 / (geo.slit_spacing * w.imag)


def default_z2_grid(src: SourceParams, geo: Geometry, points=DEFAULT_POINTS, periods=DEFAULT_PERIODS):
    br = compute_branches(src, geo)
    center = float(np.mean([p.mean for p in br.particle2]))
    period = fringe_period(src, geo)
    half = periods * period if math.isfinite(period) else 10 * br.particle2[0].std
    return np.linspace(center - half, center + half, points)


def _strong_quantities(src, geo, legacy):
    if not in_strong_regime(src, geo):
        raise RegimeError("closed-form pattern is only defined in the strong-entanglement regime")
    eps, lam, L1 = geo.slit_width, geo.wavelength, geo.L1
    D = geo.D
    gam = eps**2 + 1.0 / src.sigma**2
    Gam = gam + 4j * geo.tau0
    alpha = eps**2 + lam**2 * L1**2 / (math.pi**2 * eps**2)
    if legacy:
        beta = gam**2 + lam**2 * D**2 / (math.pi**2 * gam**2)
        dden = gam**4 * math.pi**2 + lam**2 * D**2
        ct2 = 1.0 / (math.pi**2 * abs(eps + 1j * L1 * lam / (eps * math.pi))
                     * abs(math.sqrt(Gam.real) + (Gam.imag + 1j * L1 * lam / math.pi) / math.sqrt(Gam.real)))
        quad_sign = 1.0
    else:
        beta = gam + lam**2 * D**2 / (math.pi**2 * gam)
        dden = gam**2 * math.pi**2 + lam**2 * D**2
        w1 = abs(eps**2 + 1j * lam * L1 / math.pi)
        W = abs(Gam + 1j * lam * L1 / math.pi)
        ct2 = 2 * eps * math.sqrt(Gam.real) / (math.pi * w1 * W)
        quad_sign = -1.0
    pden = eps**4 * math.pi**2 + lam**2 * L1**2
    return alpha, beta, dden, pden, ct2, quad_sign


def closed_form_pattern(src: SourceParams, geo: Geometry, det: DetectorGram, z2, phases=None,
                        legacy=False, broad=False, probs=None):
    """Strong-limit closed form of the coincidence pattern.

    Widths enter as gamma and gamma^2, and the slit-offset phase terms carry
    the opposite sign to the linear term. ``legacy=True`` swaps in the older
    form with gamma^2 and gamma^4, a halved prefactor and same-sign offset
    phases; it is kept only for comparison. ``broad=True`` replaces every branch envelope by a common one and
    drops the offset phases. ``probs`` defaults to the conditioned path
    amplitudes of the source.
    """
    z2 = np.asarray(z2, dtype=float)
    alpha, beta, dden, pden, ct2, qs = _strong_quantities(src, geo, legacy)
    lam, L1, D = geo.wavelength, geo.L1, geo.D
    c = compute_branches(src, geo).c if probs is None else np.asarray(probs, dtype=float)
    theta = _phases(phases, geo.n)
    xs = geo.slit_centers()
    x1 = xs - geo.z1_detect
    g = np.abs(det.gram)
    env = np.exp(-(x1**2) / alpha)
    if broad:
        common = np.exp(-2 * z2**2 / beta)
        total = np.full_like(z2, np.sum(c**2 * env**2))
        for j in range(geo.n):
            for k in range(geo.n):
                if j == k:
                    continue
                arg = 2 * math.pi * (xs[k] - xs[j]) * z2 * lam * D / dden + theta[j] - theta[k]
                total = total + c[j] * c[k] * g[j, k] * env[j] * env[k] * np.cos(arg)
        return ct2 * common * total
    out = np.zeros_like(z2)
    for k in range(geo.n):
        out += c[k] ** 2 * env[k] ** 2 * np.exp(-2 * (z2 - xs[k]) ** 2 / beta)
    for j in range(geo.n):
        for k in range(geo.n):
            if j == k:
                continue
            arg = (2 * math.pi * (xs[k] - xs[j]) * z2 * lam * D / dden
                   + qs * math.pi * (x1[k] ** 2 - x1[j] ** 2) * lam * L1 / pden
                   + qs * math.pi * (xs[k] ** 2 - xs[j] ** 2) * lam * D / dden
                   + theta[j] - theta[k])
            out += (c[j] * c[k] * g[j, k] * env[j] * env[k]
                    * np.exp(-((z2 - xs[j]) ** 2) / beta - (z2 - xs[k]) ** 2 / beta) * np.cos(arg))
    return ct2 * out


def closed_form_coherence(src: SourceParams, geo: Geometry, det: DetectorGram, probs=None) -> float:
    """Fringe coherence at a primary maximum in the broad-envelope limit."""
    alpha, *_ = _strong_quantities(src, geo, legacy=False)
    c = compute_branches(src, geo).c if probs is None else np.asarray(probs, dtype=float)
    env = np.exp(-((geo.slit_centers() - geo.z1_detect) ** 2) / alpha)
    w = c * env
    m = np.outer(w, w) * np.abs(det.gram)
    return float((m.sum() - np.trace(m)) / np.sum(w**2) / (geo.n - 1))


def _parabolic_peak(y, i):
    y0, y1, y2 = y[i - 1], y[i], y[i + 1]
    den = y0 - 2 * y1 + y2
    if den >= 0:
        return 0.0, y1
    off = 0.5 * (y0 - y2) / den
    return off, y1 - 0.25 * (y0 - y2) * off


def primary_maximum(p: PatternResult, floor=1e-12):
    """Location and value of the largest intensity/incoherent ratio.

    Grid points where the incoherent intensity drops below ``floor`` times its
    maximum are ignored. Raises :class:`ExtractionError` if the maximum sits
    on the edge of the usable grid.
    """
    inc = np.asarray(p.incoherent)
    usable = inc > floor * inc.max() if inc.max() > 0 else np.zeros_like(inc, dtype=bool)
    idx = np.flatnonzero(usable)
    if idx.size < 3:
        raise ExtractionError("pattern has no resolvable incoherent background")
    ratio = np.full(inc.shape, -np.inf)
    ratio[idx] = p.intensity[idx] / inc[idx]
    i = int(np.argmax(ratio))
    if i <= idx[0] or i >= idx[-1] or not (usable[i - 1] and usable[i + 1]):
        raise ExtractionError("primary maximum lies on the grid edge; widen the z2 grid")
    off, value = _parabolic_peak(ratio, i)
    dz = p.z2_grid[i + 1] - p.z2_grid[i] if off >= 0 else p.z2_grid[i] - p.z2_grid[i - 1]
    return float(p.z2_grid[i] + off * dz), float(value)


def coherence_from_pattern(p: PatternResult) -> float:
    """(I_max - I_inc) / I_inc / (n - 1) at the primary maximum."""
    if np.max(np.abs(p.cross)) <= 1e-12 * np.max(p.incoherent):
        return 0.0
    _, ratio = primary_maximum(p)
    return (ratio - 1.0) / (p.n - 1)


def local_maxima(y):
    y = np.asarray(y)
    return np.flatnonzero((y[1:-1] > y[:-2]) & (y[1:-1] >= y[2:])) + 1


def render_svg(p: PatternResult, title="", width=720, height=360):
    pad = 40
    z = p.z2_grid
    top = max(float(np.max(p.intensity)), float(np.max(p.incoherent)), 1e-300)

    def xy(zs, vals):
        xs = pad + (zs - z[0]) / (z[-1] - z[0] if z[-1] > z[0] else 1.0) * (width - 2 * pad)
        ys = height - pad - vals / top * (height - 2 * pad)
        return " ".join(f"{a:.2f},{b:.2f}" for a, b in zip(xs, ys))

    parts = [
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{width}" height="{height}">',
        f'<rect width="{width}" height="{height}" fill="white"/>',
        f'<text x="{pad}" y="20" font-size="14">{title}</text>',
        f'<polyline fill="none" stroke="#999" stroke-dasharray="4 3" points="{xy(z, p.incoherent)}"/>',
        f'<polyline fill="none" stroke="#1f4e9c" points="{xy(z, p.intensity)}"/>',
    ]
    for i in local_maxima(p.intensity):
        pt = xy(z[i:i + 1], p.intensity[i:i + 1]).split(",")
        parts.append(f'<circle cx="{pt[0]}" cy="{pt[1]}" r="3" fill="#c0392b"/>')
        parts.append(f'<text x="{pt[0]}" y="{float(pt[1]) - 6:.2f}" font-size="9" '
                     f'text-anchor="middle">{z[i]:.3g}</text>')
    parts.append(f'<text x="{pad}" y="{height - 10}" font-size="11">z2 from {z[0]:.4g} to {z[-1]:.4g}</text>')
    parts.append("</svg>")
    return "\n".join(parts) + "\n"


def aligning_phases(src: SourceParams, geo: Geometry, z2=None):
    """Slit phases that make every branch amplitude real and positive at ``z2``.

    With a real, non-negative Gram matrix this puts a fully constructive
    primary maximum at ``z2`` (default: the pattern center).
    """
    br = compute_branches(src, geo)
    if z2 is None:
        z2 = float(np.mean([p.mean for p in br.particle2]))
    amps = br.amplitudes(np.array([z2]))[:, 0]
    return -np.angle(amps)
