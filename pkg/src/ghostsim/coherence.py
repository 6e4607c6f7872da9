"""Particle-2 density matrices, the l1 coherence measure and the duality report."""
from __future__ import annotations

import hashlib
import json
from dataclasses import asdict, dataclass
from typing import Optional

import numpy as np

from .discrimination import DetectorGram, distinguishability
from .errors import DegenerateInputError

SATURATION_TOL = 1e-9
BOUND_TOL = 1e-9
ORTHOGONALITY_TOL = 1e-6


@dataclass(frozen=True)
class DensityMatrix:
    rho: np.ndarray

    @property
    def n(self):
        return self.rho.shape[0]

    def problems(self, tol=1e-12, eig_tol=1e-10):
        r = self.rho
        out = []
        if np.max(np.abs(r - r.conj().T)) > tol:
            out.append("not Hermitian")
        if abs(np.trace(r) - 1) > tol:
            out.append("trace differs from 1")
        if np.linalg.eigvalsh(0.5 * (r + r.conj().T)).min() < -eig_tol:
            out.append("not positive semidefinite")
        return out


def unconditional_rho(det: DetectorGram) -> DensityMatrix:
    """Particle 2 traced over particle 1 and the detector, no coincidence."""
    return DensityMatrix(np.diag(det.probs.astype(complex) ** 2))


def conditional_rho(det: DetectorGram, envelopes, phases=None) -> DensityMatrix:
    """Particle 2 given that particle 1 is registered at the fixed detector.

    ``envelopes[k]`` is |<z_D1|U1|phi_k>| and ``phases[k]`` its argument (any
    extra slit phases can be folded in). Elements are expressed in the basis
    of the evolved conditional states of particle 2.
    """
    a = np.asarray(envelopes, dtype=float)
    ph = np.zeros_like(a) if phases is None else np.asarray(phases, dtype=float)
    w = det.probs * a * np.exp(1j * ph)
    total = np.sum(np.abs(w) ** 2)
    if not total > 0:
        raise DegenerateInputError("particle 1 never reaches the fixed detector (all envelopes zero)")
    rho = np.outer(w, w.conj()) * det.gram.conj() / total
    return DensityMatrix(rho)


def coherence(rho: DensityMatrix) -> float:
    """Normalized l1 coherence: sum of |off-diagonal| elements over (n - 1)."""
    r = np.abs(rho.rho)
    return float((r.sum() - np.trace(r)) / (rho.n - 1))


@dataclass
class DualityReport:
    d_q1: float
    c2_matrix: Optional[float]
    c2_pattern: Optional[float]
    sum: float
    slack: float
    saturated: bool
    violated: bool
    matrix_route: bool
    envelopes_equal: bool
    max_psi_overlap: float = 0.0

    def to_dict(self, config_hash=None):
        d = {"schema": 1, **asdict(self)}
        if config_hash is not None:
            d["config_hash"] = config_hash
        return d

    def to_json(self, config_hash=None):
        return json.dumps(self.to_dict(config_hash), sort_keys=True, indent=2)


def config_hash(obj) -> str:
    blob = json.dumps(obj, sort_keys=True, separators=(",", ":")).encode()
    return hashlib.sha256(blob).hexdigest()


def duality_report(det: DetectorGram, envelopes, phases=None, pattern_c2=None,
                   max_psi_overlap=0.0) -> DualityReport:
    """Assemble D_Q1 + C_2 and check it against 1.

    The matrix route is used only when the conditional particle-2 states are
    orthogonal (``max_psi_overlap`` below 1e-6); otherwise the sum falls back
    on the fringe-based coherence. A bound violation is reported, not raised.
    """
    d = distinguishability(det)
    a = np.asarray(envelopes, dtype=float)
    matrix_route = max_psi_overlap < ORTHOGONALITY_TOL
    c2m = coherence(conditional_rho(det, a, phases)) if matrix_route else None
    c2 = c2m if matrix_route else pattern_c2
    if c2 is None:
        raise DegenerateInputError("conditional states are not orthogonal and no pattern coherence was given")
    total = d + c2
    equal = bool(np.ptp(a) <= SATURATION_TOL * max(1.0, a.max()))
    return DualityReport(
        d_q1=d,
        c2_matrix=c2m,
        c2_pattern=None if pattern_c2 is None else float(pattern_c2),
        sum=total,
        slack=1.0 - total,
        saturated=equal and abs(1.0 - total) <= SATURATION_TOL,
        violated=total > 1.0 + BOUND_TOL,
        matrix_route=matrix_route,
        envelopes_equal=equal,
        max_psi_overlap=float(max_psi_overlap),
    )
