"""Exact complex-Gaussian algebra for the entangled pair, from source to detectors.

Every length is in one arbitrary unit. Time never appears explicitly: a free
evolution over a path length ``L`` at de Broglie wavelength ``lam`` is
parameterised by ``hbar t / m = lam L / (2 pi)`` (see :func:`tau`).

A one-particle Gaussian is stored as ``amp * exp(-(z - center)**2 / gamma_c + i phase)``
with a *complex* center. Free evolution leaves a complex center untouched and
only shifts the width, which keeps every closed form short; the real position
of the intensity peak is :attr:`Gaussian1D.mean`.
"""
from __future__ import annotations

import cmath
import math
from dataclasses import dataclass, replace

import numpy as np

from .errors import DomainError, RegimeError, SingularConfigurationError

# Regime thresholds for the limiting widths.
STRONG_FACTOR = 10.0
WEAK_WINDOW = 0.1


def tau(length, wavelength):
    """Effective evolution parameter hbar*t/m for a flight over ``length``."""
    return wavelength * length / (2.0 * math.pi)


@dataclass(frozen=True)
class SourceParams:
    """Generalized EPR source: ``sigma`` sets the relative-coordinate
    correlation (inverse length), ``omega`` the centre-of-mass spread."""

    sigma: float
    omega: float

    def __post_init__(self):
        if not (self.sigma > 0 and self.omega > 0):
            raise DomainError(f"sigma and omega must be positive, got {self.sigma}, {self.omega}")
        if abs(4 * self.omega**2 * self.sigma**2 - 1) < 1e-12:
            raise SingularConfigurationError("4*omega^2*sigma^2 == 1: the slit-spacing map is singular")


@dataclass(frozen=True)
class Geometry:
    """Slit array and flight distances.

    Slit ``k`` (1-based) is centered at ``k * slit_spacing + slit_offset``.
    ``L2`` is the source-to-slit distance, ``L1`` the slit-to-D1 distance.
    """

    n: int
    slit_spacing: float
    slit_width: float
    L1: float
    L2: float
    wavelength: float
    z1_detect: float = 0.0
    slit_offset: float = 0.0

    def __post_init__(self):
        if int(self.n) != self.n or self.n < 2:
            raise DomainError(f"need at least two slits, got n={self.n}")
        if self.slit_spacing <= 0 or self.slit_width <= 0 or self.wavelength <= 0:
            raise DomainError("slit_spacing, slit_width and wavelength must be positive")
        if self.L1 < 0 or self.L2 < 0:
            raise DomainError("flight distances must be non-negative")

    def slit_center(self, k):
        if not 1 <= k <= self.n:
            raise IndexError(f"slit index {k} outside 1..{self.n}")
        return k * self.slit_spacing + self.slit_offset

    def slit_centers(self):
        return np.arange(1, self.n + 1) * self.slit_spacing + self.slit_offset

    @property
    def tau0(self):
        return tau(self.L2, self.wavelength)

    @property
    def tau1(self):
        return tau(self.L1, self.wavelength)

    @property
    def D(self):
        """Effective propagation distance for particle 2 in the strong limit."""
        return self.L1 + 2.0 * self.L2

    def centered(self):
        """Same geometry with the slit array centered on the source axis."""
        return replace(self, slit_offset=-(self.n + 1) * self.slit_spacing / 2.0)

    def reflected(self):
        """Mirror image of the slit array about z = 0."""
        return replace(self, slit_offset=-(self.n + 1) * self.slit_spacing - self.slit_offset)


def _gauss_integral_log(P, J, R):
    """log of  integral exp(-P z^2 + 2 J z + R) dz  for Re(P) > 0."""
    return 0.5 * cmath.log(math.pi / P) + J * J / P + R


@dataclass(frozen=True)
class Gaussian1D:
    amp: complex
    center: complex
    gamma_c: complex
    phase: float = 0.0

    def __post_init__(self):
        if complex(self.gamma_c).real <= 0:
            raise DomainError(f"Gaussian width must have positive real part, got {self.gamma_c}")

    def __call__(self, z):
        z = np.asarray(z, dtype=float)
        return self.amp * np.exp(-((z - self.center) ** 2) / self.gamma_c + 1j * self.phase)

    @property
    def _g(self):
        return 1.0 / complex(self.gamma_c)

    @property
    def mean(self):
        """Position of the maximum of |g|^2."""
        g = self._g
        return (g * self.center).real / g.real

    @property
    def std(self):
        """Standard deviation of the normalized intensity |g|^2."""
        return 0.5 / math.sqrt(self._g.real)

    def log_norm_sq(self):
        g, c = self._g, complex(self.center)
        shape = 0.5 * math.log(math.pi / (2 * g.real)) + 2 * (g * c).real ** 2 / g.real - 2 * (g * c * c).real
        return shape + 2 * math.log(abs(self.amp)) if self.amp != 0 else -math.inf

    @property
    def norm(self):
        return math.exp(0.5 * self.log_norm_sq())

    def normalized(self):
        shape = self.log_norm_sq() - 2 * math.log(abs(self.amp))
        if abs(shape) > 1400:
            raise DomainError("normalizing amplitude falls outside the floating-point range")
        unit = self.amp / abs(self.amp)
        return replace(self, amp=unit * math.exp(-0.5 * shape))

    def overlap(self, other: "Gaussian1D") -> complex:
        """<self|other> = integral conj(self) * other."""
        g1, c1 = self._g.conjugate(), complex(self.center).conjugate()
        g2, c2 = other._g, complex(other.center)
        log_val = _gauss_integral_log(g1 + g2, g1 * c1 + g2 * c2, -g1 * c1 * c1 - g2 * c2 * c2)
        pref = complex(self.amp).conjugate() * other.amp * cmath.exp(1j * (other.phase - self.phase))
        return pref * cmath.exp(log_val)


@dataclass(frozen=True)
class TwoParticleGaussian:
    """Psi(z1, z2) = norm * exp(-(z1 - z2)^2 / a - (z1 + z2)^2 / b)."""

    norm: complex
    a: complex
    b: complex

    def __post_init__(self):
        if complex(self.a).real <= 0 or complex(self.b).real <= 0:
            raise DomainError("pair widths must have positive real parts")

    def __call__(self, z1, z2):
        z1 = np.asarray(z1, dtype=float)
        z2 = np.asarray(z2, dtype=float)
        return self.norm * np.exp(-((z1 - z2) ** 2) / self.a - (z1 + z2) ** 2 / self.b)

    def norm_sq(self):
        # du dv = 2 dz1 dz2 for u = z1 - z2, v = z1 + z2
        ra = (1.0 / complex(self.a)).real
        rb = (1.0 / complex(self.b)).real
        return abs(self.norm) ** 2 * 0.5 * math.sqrt(math.pi / (2 * ra)) * math.sqrt(math.pi / (2 * rb))


def make_epr_state(src: SourceParams) -> TwoParticleGaussian:
    """Generalized EPR pair at the source, normalized to one."""
    a = 1.0 / src.sigma**2
    b = 4.0 * src.omega**2
    return TwoParticleGaussian(norm=math.sqrt(2 * src.sigma / (math.pi * src.omega)), a=a, b=b)


def evolve_pair(state: TwoParticleGaussian, t_eff: float) -> TwoParticleGaussian:
    """Free evolution of both particles for hbar*t/m = ``t_eff``.

    The relative and centre-of-mass coordinates each carry mass m/2, so both
    widths shift by 4i*t_eff.
    """
    if t_eff < 0:
        raise DomainError("evolution parameter must be non-negative")
    a2 = state.a + 4j * t_eff
    b2 = state.b + 4j * t_eff
    norm = state.norm * cmath.sqrt(state.a / a2) * cmath.sqrt(state.b / b2)
    return TwoParticleGaussian(norm=norm, a=a2, b=b2)


def pair_at_slits(src: SourceParams, geo: Geometry) -> TwoParticleGaussian:
    return evolve_pair(make_epr_state(src), geo.tau0)


def slit_mode(k: int, geo: Geometry) -> Gaussian1D:
    eps = geo.slit_width
    amp = (math.pi / 2) ** -0.25 / math.sqrt(eps)
    return Gaussian1D(amp=amp, center=geo.slit_center(k), gamma_c=eps**2)


def project_onto(state: TwoParticleGaussian, phi: Gaussian1D):
    """Partial overlap  integral conj(phi(z1)) Psi(z1, z2) dz1.

    Returns ``(log_weight, psi)`` where ``psi`` is normalized and
    ``exp(log_weight)`` is the norm of the unnormalized result.
    """
    ia, ib = 1.0 / complex(state.a), 1.0 / complex(state.b)
    gp = (1.0 / complex(phi.gamma_c)).conjugate()
    cp = complex(phi.center).conjugate()
    P = ia + ib + gp
    Q = ia - ib
    G = ia + ib - Q * Q / P
    lin = Q * gp * cp / P
    center = lin / G
    const = (gp * cp) ** 2 / P - gp * cp * cp + G * center * center
    log_amp = (cmath.log(state.norm) + cmath.log(complex(phi.amp).conjugate()) - 1j * phi.phase
               + 0.5 * cmath.log(math.pi / P) + const)
    raw = Gaussian1D(amp=cmath.exp(1j * log_amp.imag), center=center, gamma_c=1.0 / G)
    shape_log_norm_sq = raw.log_norm_sq()
    log_weight = log_amp.real + 0.5 * shape_log_norm_sq
    return log_weight, raw.normalized()


def condition_on_slit(state: TwoParticleGaussian, k: int, geo: Geometry):
    """Particle-2 state given that particle 1 passed slit ``k``.

    Returns ``(weight, psi_k)``: ``weight`` is the unrenormalized amplitude
    |<phi_k|Psi>| and ``psi_k`` the normalized conditional state.
    """
    log_w, psi = project_onto(state, slit_mode(k, geo))
    return math.exp(log_w), psi


def condition_all(state: TwoParticleGaussian, geo: Geometry):
    """Condition on every slit and renormalize so that sum(c_k**2) == 1.

    The blocked component is discarded.
    """
    logs, psis = [], []
    for k in range(1, geo.n + 1):
        lw, psi = project_onto(state, slit_mode(k, geo))
        logs.append(lw)
        psis.append(psi)
    logs = np.array(logs)
    c = np.exp(logs - logs.max())
    return c / np.linalg.norm(c), psis


def fresnel_evolve(g: Gaussian1D, L: float, wavelength: float) -> Gaussian1D:
    """Free flight over distance ``L``: width gamma_c -> gamma_c + i L lam / pi."""
    if L < 0:
        raise DomainError("propagation distance must be non-negative")
    if L == 0:
        return g
    new_gamma = g.gamma_c + 2j * tau(L, wavelength)
    return replace(g, amp=g.amp * cmath.sqrt(g.gamma_c / new_gamma), gamma_c=new_gamma)


def gamma_limit(src: SourceParams, geo: Geometry, regime: str) -> complex:
    """Limiting conditional width in the strong or weak entanglement regime."""
    t0 = geo.tau0
    if regime == "strong":
        need = STRONG_FACTOR * max(geo.slit_width, 1.0 / src.sigma)
        if src.omega < need:
            raise RegimeError(f"strong regime needs omega >= {need:g}, got {src.omega:g}")
        return geo.slit_width**2 + 1.0 / src.sigma**2 + 4j * t0
    if regime == "weak":
        if abs(src.omega * src.sigma - 1) > WEAK_WINDOW:
            raise RegimeError(f"weak regime needs |omega*sigma - 1| <= {WEAK_WINDOW}, got {src.omega * src.sigma:g}")
        return 1.0 / (2 * src.sigma**2) + 2j * t0
    raise ValueError(f"unknown regime {regime!r}")


def in_strong_regime(src: SourceParams, geo: Geometry) -> bool:
    return src.omega >= STRONG_FACTOR * max(geo.slit_width, 1.0 / src.sigma)


def gamma_closed_form(src: SourceParams, geo: Geometry) -> complex:
    """Conditional width from the closed rational expression in Omega, sigma, eps.

    Kept as a cross-check of :func:`project_onto`; the two agree to rounding.
    """
    s2, O2, e2 = src.sigma**2, src.omega**2, geo.slit_width**2
    t2 = 2j * geo.tau0
    num = 1 / s2 + (1 + 1 / (4 * s2 * O2)) * (e2 + t2)
    den = 1 + 1 / (4 * O2 * s2) + e2 / O2 + t2 / O2
    return num / den + t2


def shifted_spacing(src: SourceParams, geo: Geometry) -> float:
    """Spacing of the conditional particle-2 centers for a source at t = 0.

    Singular on the product-state point; the exact map in :func:`project_onto`
    is not.
    """
    x = 4 * src.omega**2 * src.sigma**2
    return geo.slit_spacing / ((x + 1) / (x - 1) + 4 * geo.slit_width**2 / (4 * src.omega**2 - 1 / src.sigma**2))
