"""Brute-force grid propagation of the pair, independent of the Gaussian closed forms.

The only analytic inputs are the source wavefunction at t = 0 and the slit
modes. Everything else (free flight, slit conditioning, coincidence slice,
branch overlaps) is done numerically with FFT propagation and grid
quadrature.

Pipeline:

1. sample the source on a square (z1, z2) grid, with a raised-cosine taper in
   the padding band so the periodic box sees a compactly supported state;
2. propagate both axes spectrally for the source-to-slit leg;
3. project the z1 axis onto each slit mode by quadrature, giving one branch
   per slit;
4. propagate each branch's particle-1 and particle-2 factors on their own
   1-D grids, sized from the measured momentum spread;
5. read particle 1 at the fixed detector and assemble the pattern and the
   conditioned density matrix with the detector Gram weights.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .coherence import DensityMatrix
from .discrimination import DetectorGram
from .errors import GridError, ResolutionError
from .gaussian_core import Geometry, SourceParams, make_epr_state, slit_mode, tau
from .pattern import PatternResult, local_maxima

MIN_POINTS = 256
SAMPLES_PER_SLIT = 8
SAMPLES_PER_FRINGE = 8
UNITARITY_TOL = 1e-10
ESCAPE_TOL = 1e-8


@dataclass(frozen=True)
class GridSpec:
    extent: float          # half-width of the square (z1, z2) box
    points: int = 2048     # samples per axis, power of two
    padding: float = 0.15  # fraction of the half-width used as taper band

    def __post_init__(self):
        if self.points < MIN_POINTS or self.points & (self.points - 1):
            raise ResolutionError(f"points must be a power of two >= {MIN_POINTS}, got {self.points}")
        if not 0.0 <= self.padding <= 0.25:
            raise ResolutionError(f"padding must lie in [0, 0.25], got {self.padding}")
        if self.extent <= 0:
            raise ResolutionError("extent must be positive")

    @property
    def dz(self):
        return 2.0 * self.extent / self.points


def wavenumbers(n, dz):
    return 2.0 * np.pi * np.fft.fftfreq(n, dz)


def propagate_1d(psi, dz, t_eff):
    """Free flight of a sampled wavefunction, hbar*t/m = t_eff."""
    k = wavenumbers(len(psi), dz)
    return np.fft.ifft(np.fft.fft(psi) * np.exp(-0.5j * k**2 * t_eff))


def propagate_2d(psi, dz, t_eff):
    k = wavenumbers(psi.shape[0], dz)
    phase = np.exp(-0.5j * k**2 * t_eff)
    return np.fft.ifft2(np.fft.fft2(psi) * phase[:, None] * phase[None, :])


def taper(z, center, extent, padding):
    """Raised-cosine window equal to 1 inside the unpadded region."""
    if padding == 0:
        return np.ones_like(z)
    inner = extent * (1.0 - padding)
    d = np.abs(z - center)
    w = np.ones_like(z)
    band = d > inner
    w[band] = 0.5 * (1 + np.cos(np.pi * np.minimum((d[band] - inner) / (extent - inner), 1.0)))
    return w


def momentum_spread(psi, dz):
    """(mean, rms) wavenumber of a sampled state."""
    k = wavenumbers(len(psi), dz)
    p = np.abs(np.fft.fft(psi)) ** 2
    p /= p.sum()
    mean = float(np.sum(k * p))
    return mean, float(math.sqrt(np.sum((k - mean) ** 2 * p)))


def _pow2_at_least(x):
    return 1 << max(MIN_POINTS.bit_length() - 1, int(math.ceil(math.log2(max(x, 2)))))


def _escaped_fraction(psi, edge=0.02):
    p = np.abs(psi) ** 2
    m = max(1, int(len(p) * edge))
    return float((p[:m].sum() + p[-m:].sum()) / p.sum())


def _flight_half_width(psi, dz, t_eff, margin=8.0):
    """Half-width needed to hold ``psi`` after a flight of ``t_eff``."""
    k_mean, k_rms = momentum_spread(psi, dz)
    return len(psi) * dz / 2 + abs(k_mean) * t_eff + margin * k_rms * t_eff


def _flight(psi, dz, center, t_eff, half):
    """Embed ``psi`` (sampled about ``center``) in a 2*half wide box and propagate."""
    m = _pow2_at_least(2 * half / dz)
    big = np.zeros(m, dtype=complex)
    start = m // 2 - len(psi) // 2
    big[start:start + len(psi)] = psi
    z = center + (np.arange(m) - m // 2) * dz
    out = propagate_1d(big, dz, t_eff)
    if _escaped_fraction(out) > ESCAPE_TOL:
        raise ResolutionError("state escaped the padded domain during free flight")
    return z, out


@dataclass
class OracleResult:
    pattern: PatternResult
    rho: DensityMatrix
    c: np.ndarray
    envelopes: np.ndarray
    envelope_phases: np.ndarray
    overlaps: np.ndarray       # |<psi_j|psi_k>| right behind the slits
    slit_grid: np.ndarray
    slit_states: np.ndarray    # normalized psi_k sampled on slit_grid
    final_states: np.ndarray   # U2 psi_k sampled on pattern.z2_grid
    norm_drift: float          # unitarity residual of the 2-D leg

    @property
    def max_psi_overlap(self):
        o = self.overlaps.copy()
        np.fill_diagonal(o, 0.0)
        return float(o.max())


def check_resolution(src: SourceParams, geo: Geometry, grid: GridSpec):
    dz = grid.dz
    if geo.slit_width / dz < SAMPLES_PER_SLIT:
        raise ResolutionError(f"grid spacing {dz:.4g} leaves fewer than {SAMPLES_PER_SLIT} samples "
                              f"across the slit width {geo.slit_width:g}")
    xs = geo.slit_centers()
    interior = grid.extent * (1.0 - grid.padding)
    if np.ptp(xs) / 2 + 6 * geo.slit_width > interior:
        raise ResolutionError("slit array does not fit inside the unpadded box")


def propagate_pair(src: SourceParams, geo: Geometry, det: DetectorGram, grid: GridSpec,
                   phases=None) -> OracleResult:
    """Full grid simulation: source -> slits -> detectors, read at z1 = z1_detect."""
    check_resolution(src, geo, grid)
    if det.n != geo.n:
        raise GridError(f"detector has {det.n} states but the array has {geo.n} slits")
    theta = np.zeros(geo.n) if phases is None else np.asarray(phases, dtype=float)
    xs = geo.slit_centers()
    zc = float(np.mean(xs))
    n_pts, dz = grid.points, grid.dz
    z = zc + (np.arange(n_pts) - n_pts // 2) * dz

    # 1. source, tapered
    psi0 = make_epr_state(src)(z[:, None], z[None, :])
    w = taper(z, zc, grid.extent, grid.padding)
    psi0 *= w[:, None] * w[None, :]

    # 2. source -> slits
    t0 = tau(geo.L2, geo.wavelength)
    before = np.sum(np.abs(psi0) ** 2)
    psi = propagate_2d(psi0, dz, t0)
    drift = abs(np.sum(np.abs(psi) ** 2) / before - 1.0)
    if drift > UNITARITY_TOL:
        raise ResolutionError(f"spectral propagation lost unitarity ({drift:.3g})")
    del psi0

    # 3. project z1 onto each slit mode
    modes = np.array([slit_mode(k, geo)(z).real for k in range(1, geo.n + 1)])
    chi = modes @ psi * dz
    del psi
    weights = np.sqrt(np.sum(np.abs(chi) ** 2, axis=1) * dz)
    slit_states = chi / weights[:, None]
    c = weights / np.linalg.norm(weights)
    overlaps = np.abs(slit_states.conj() @ slit_states.T) * dz

    # 4a. particle 1: slit -> D1, sampled on a grid through z1_detect
    t1 = tau(geo.L1, geo.wavelength)
    at_d1 = np.empty(geo.n, dtype=complex)
    reach = float(np.max(np.abs(xs - geo.z1_detect))) + 10 * geo.slit_width
    for k in range(geo.n):
        probe = slit_mode(k + 1, geo)(geo.z1_detect + (np.arange(n_pts) - n_pts // 2) * dz)
        half = max(reach, _flight_half_width(probe, dz, t1)) + 8 * geo.slit_width
        m = _pow2_at_least(2 * half / dz)
        z1 = geo.z1_detect + (np.arange(m) - m // 2) * dz
        phik = propagate_1d(slit_mode(k + 1, geo)(z1).astype(complex), dz, t1)
        if _escaped_fraction(phik) > ESCAPE_TOL:
            raise ResolutionError("particle 1 escaped the padded domain during free flight")
        at_d1[k] = phik[m // 2]

    # 4b. particle 2: slit plane -> D2, all branches on one common grid
    half = max(_flight_half_width(s, dz, t1) for s in slit_states)
    flights = [_flight(s, dz, zc, t1, half) for s in slit_states]
    z2 = flights[0][0]
    finals = np.array([out for _, out in flights])

    # 5. coincidence slice
    amp_d1 = c * at_d1 * np.exp(1j * theta)
    amps = amp_d1[:, None] * finals
    intensity = np.einsum("jz,jk,kz->z", amps.conj(), det.gram, amps).real
    incoherent = np.sum(np.abs(amps) ** 2, axis=0)
    rho = np.outer(amp_d1, amp_d1.conj()) * det.gram.conj()
    rho /= np.trace(rho).real
    pattern = PatternResult(z2, intensity, incoherent, geo.n,
                            {"route": "grid_oracle", "points": n_pts, "extent": grid.extent,
                             "path_amplitudes": c.tolist(), "envelopes": np.abs(at_d1).tolist()})
    return OracleResult(
        pattern=pattern,
        rho=DensityMatrix(rho),
        c=c,
        envelopes=np.abs(at_d1),
        envelope_phases=np.angle(at_d1),
        overlaps=overlaps,
        slit_grid=z,
        slit_states=slit_states,
        final_states=finals,
        norm_drift=drift,
    )


def propagate_free(src: SourceParams, t_eff: float, grid: GridSpec, center=0.0):
    """Source sampled on the square grid and freely propagated; no slits."""
    n_pts, dz = grid.points, grid.dz
    z = center + (np.arange(n_pts) - n_pts // 2) * dz
    psi0 = make_epr_state(src)(z[:, None], z[None, :])
    w = taper(z, center, grid.extent, grid.padding)
    psi0 *= w[:, None] * w[None, :]
    return z, propagate_2d(psi0, dz, t_eff)


def monte_carlo_incoherent(result: OracleResult, det: DetectorGram, samples=2000, seed=0):
    """Phase-averaged pattern: mean over uniformly random slit phases."""
    rng = np.random.default_rng(seed)
    amp_d1 = result.c * result.envelopes * np.exp(1j * result.envelope_phases)
    amps = amp_d1[:, None] * result.final_states
    acc = np.zeros(amps.shape[1])
    for _ in range(samples):
        ph = np.exp(1j * rng.uniform(0, 2 * np.pi, size=len(amp_d1)))
        a = amps * ph[:, None]
        acc += np.einsum("jz,jk,kz->z", a.conj(), det.gram, a).real
    return acc / samples


@dataclass
class PatternComparison:
    relative_l2: float
    max_abs_error: float
    fringe_offset: float
    visibility_delta: float


def _visibility(p: PatternResult):
    inc = p.incoherent
    mask = inc > 1e-6 * inc.max()
    r = p.intensity[mask] / inc[mask]
    return float((r.max() - r.min()) / (r.max() + r.min()))


def _fringe_positions(p: PatternResult):
    inc = p.incoherent
    mask = inc > 1e-3 * inc.max()
    idx = local_maxima(np.where(mask, p.intensity, 0.0))
    return p.z2_grid[idx]


def compare_patterns(a: PatternResult, b: PatternResult) -> PatternComparison:
    """Error metrics of ``a`` against reference ``b``; resamples ``a`` onto ``b``'s grid."""
    za, zb = np.asarray(a.z2_grid), np.asarray(b.z2_grid)
    if za.shape == zb.shape and np.allclose(za, zb, rtol=0, atol=1e-12 * max(1.0, np.abs(zb).max())):
        ia, inc_a = a.intensity, a.incoherent
    else:
        lo, hi = max(za[0], zb[0]), min(za[-1], zb[-1])
        if hi <= lo:
            raise GridError("patterns do not share a z2 domain")
        keep = (zb >= lo) & (zb <= hi)
        zb = zb[keep]
        b = PatternResult(zb, b.intensity[keep], b.incoherent[keep], b.n, b.meta)
        ia = np.interp(zb, za, a.intensity)
        inc_a = np.interp(zb, za, a.incoherent)
    a2 = PatternResult(zb, ia, inc_a, a.n, a.meta)
    diff = ia - b.intensity
    ref = np.linalg.norm(b.intensity)
    rel = float(np.linalg.norm(diff) / ref) if ref > 0 else float(np.linalg.norm(diff))
    fa, fb = _fringe_positions(a2), _fringe_positions(b)
    if len(fa) and len(fb):
        offset = float(np.mean([np.min(np.abs(fa - f)) for f in fb]))
    else:
        offset = 0.0 if len(fa) == len(fb) else math.inf
    return PatternComparison(
        relative_l2=rel,
        max_abs_error=float(np.max(np.abs(diff))),
        fringe_offset=offset,
        visibility_delta=abs(_visibility(a2) - _visibility(b)),
    )
