"""The n post-slit branches of the pair, evolved to the detectors."""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .gaussian_core import (
    Geometry,
    SourceParams,
    condition_all,
    fresnel_evolve,
    pair_at_slits,
    slit_mode,
)


@dataclass(frozen=True)
class Branches:
    c: np.ndarray              # renormalized path amplitudes
    slit_states: tuple         # particle-2 states psi_k right behind the slits
    particle1: tuple           # U1 phi_k at the D1 plane
    particle2: tuple           # U2 psi_k at the D2 plane
    envelopes: np.ndarray      # |<z_D1|U1|phi_k>|
    envelope_phases: np.ndarray
    psi_overlaps: np.ndarray   # |<psi_j|psi_k>|

    @property
    def n(self):
        return len(self.c)

    @property
    def max_psi_overlap(self):
        o = self.psi_overlaps.copy()
        np.fill_diagonal(o, 0.0)
        return float(o.max())

    def amplitudes(self, z2, phases=None):
        """Branch amplitudes c_k e^{i theta_k} <z_D1|U1 phi_k> <z2|U2 psi_k>, shape (n, len(z2))."""
        z2 = np.asarray(z2, dtype=float)
        theta = np.zeros(self.n) if phases is None else np.asarray(phases, dtype=float)
        at_d1 = self.envelopes * np.exp(1j * (self.envelope_phases + theta))
        return np.array([self.c[k] * at_d1[k] * self.particle2[k](z2) for k in range(self.n)])


def compute_branches(src: SourceParams, geo: Geometry) -> Branches:
    c, psis = condition_all(pair_at_slits(src, geo), geo)
    p1 = tuple(fresnel_evolve(slit_mode(k, geo), geo.L1, geo.wavelength) for k in range(1, geo.n + 1))
    p2 = tuple(fresnel_evolve(p, geo.L1, geo.wavelength) for p in psis)
    at_d1 = np.array([complex(p(geo.z1_detect)) for p in p1])
    overlaps = np.array([[abs(pj.overlap(pk)) for pk in psis] for pj in psis])
    return Branches(
        c=c,
        slit_states=tuple(psis),
        particle1=p1,
        particle2=p2,
        envelopes=np.abs(at_d1),
        envelope_phases=np.angle(at_d1),
        psi_overlaps=overlaps,
    )
