"""Which-path detector states and their path distinguishability.

The detector is described only by the Gram matrix of its states,
``gram[i, j] = <d_i|d_j>``, together with the path amplitudes ``probs``
(``probs[k]**2`` is the probability of path ``k``).
"""
from __future__ import annotations

import json
from dataclasses import dataclass, field

import numpy as np

from .errors import DomainError

GRAM_TOL = 1e-10


@dataclass(frozen=True)
class DetectorGram:
    gram: np.ndarray
    probs: np.ndarray

    def __post_init__(self):
        gram = np.array(self.gram, dtype=complex)
        probs = np.array(self.probs, dtype=float)
        if gram.ndim != 2 or gram.shape[0] != gram.shape[1]:
            raise DomainError(f"Gram matrix must be square, got shape {gram.shape}")
        if probs.shape != (gram.shape[0],):
            raise DomainError(f"need {gram.shape[0]} path amplitudes, got {probs.shape}")
        gram.setflags(write=False)
        probs.setflags(write=False)
        object.__setattr__(self, "gram", gram)
        object.__setattr__(self, "probs", probs)

    @property
    def n(self):
        return self.gram.shape[0]

    def with_probs(self, probs):
        return DetectorGram(self.gram, probs)

    def permuted(self, perm):
        perm = np.asarray(perm)
        return DetectorGram(self.gram[np.ix_(perm, perm)], self.probs[perm])

    def to_json_obj(self):
        return {
            "gram": [[[float(v.real), float(v.imag)] for v in row] for row in self.gram],
            "probs": [float(p) for p in self.probs],
        }


def equal_probs(n):
    return np.full(n, 1.0 / np.sqrt(n))


def uniform_gram(n: int, s: float, probs=None) -> DetectorGram:
    """All detector overlaps equal to ``s``; PSD for every s in [0, 1]."""
    if n < 2:
        raise DomainError("need at least two paths")
    if not 0.0 <= s <= 1.0:
        raise DomainError(f"common overlap must lie in [0, 1], got {s}")
    gram = np.full((n, n), s, dtype=complex)
    np.fill_diagonal(gram, 1.0)
    return DetectorGram(gram, equal_probs(n) if probs is None else probs)


def gram_from_vectors(vectors, probs=None) -> DetectorGram:
    """Gram matrix of the columns of ``vectors`` after normalizing each."""
    v = np.asarray(vectors, dtype=complex)
    v = v / np.linalg.norm(v, axis=0)
    gram = v.conj().T @ v
    gram = 0.5 * (gram + gram.conj().T)
    np.fill_diagonal(gram, 1.0)
    n = gram.shape[0]
    return DetectorGram(gram, equal_probs(n) if probs is None else probs)


def random_gram(n: int, rng=None, dim=None, probs=None, complex_states=True) -> DetectorGram:
    """Gram of ``n`` random unit vectors in ``dim`` (default ``n``) dimensions."""
    rng = np.random.default_rng(rng)
    dim = n if dim is None else dim
    v = rng.normal(size=(dim, n))
    if complex_states:
        v = v + 1j * rng.normal(size=(dim, n))
    return gram_from_vectors(v, probs)


def random_probs(n, rng=None):
    rng = np.random.default_rng(rng)
    c = rng.random(n)
    return c / np.linalg.norm(c)


@dataclass
class GramValidation:
    ok: bool
    hermiticity_residual: float
    min_eigenvalue: float
    diagonal_deviation: float
    max_abs_entry: float
    prob_norm_deviation: float
    failures: list = field(default_factory=list)


def validate_gram(det: DetectorGram, tol: float = GRAM_TOL) -> GramValidation:
    """Check that ``det`` is realizable; never raises."""
    g = det.gram
    failures = []
    herm = float(np.max(np.abs(g - g.conj().T)))
    if herm > tol:
        failures.append(f"not Hermitian (residual {herm:.3g})")
    diag = float(np.max(np.abs(np.diag(g) - 1.0)))
    if diag > tol:
        failures.append(f"diagonal deviates from 1 by {diag:.3g}")
    max_abs = float(np.max(np.abs(g)))
    if max_abs > 1.0 + tol:
        failures.append(f"|G_ij| <= 1 violated (max {max_abs:.6g})")
    if np.all(np.isfinite(g)):
        min_eig = float(np.linalg.eigvalsh(0.5 * (g + g.conj().T)).min())
    else:
        min_eig = float("nan")
        failures.append("non-finite entries")
    if not min_eig >= -tol:
        failures.append(f"not positive semidefinite (min eigenvalue {min_eig:.3g})")
    if np.any(det.probs < 0):
        failures.append("negative path amplitude")
    pn = float(abs(np.sum(det.probs**2) - 1.0))
    if pn > tol:
        failures.append(f"sum of c_k^2 deviates from 1 by {pn:.3g}")
    return GramValidation(not failures, herm, min_eig, diag, max_abs, pn, failures)


def distinguishability(det: DetectorGram) -> float:
    """Upper bound on unambiguous which-path identification, in [0, 1]."""
    c = det.probs
    w = np.outer(c, c) * np.abs(det.gram)
    off = w.sum() - np.trace(w)
    return float(1.0 - off / (det.n - 1))


def gram_from_json(obj) -> DetectorGram:
    """Parse ``{"gram": [[[re, im], ...], ...], "probs": [...]}`` and validate it."""
    rows = obj["gram"]
    gram = np.array([[complex(re, im) for re, im in row] for row in rows])
    probs = obj.get("probs")
    det = DetectorGram(gram, equal_probs(len(rows)) if probs is None else probs)
    report = validate_gram(det)
    if not report.ok:
        raise DomainError("invalid detector Gram matrix: " + "; ".join(report.failures))
    return det


def load_gram(path) -> DetectorGram:
    with open(path) as fh:
        return gram_from_json(json.load(fh))
