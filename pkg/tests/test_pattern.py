import json
import math

import numpy as np
import pytest

from ghostsim.branches import compute_branches
from ghostsim.coherence import coherence, conditional_rho
from ghostsim.discrimination import uniform_gram
from ghostsim.errors import ExtractionError, GridError, RegimeError
from ghostsim.gaussian_core import Geometry, SourceParams
from ghostsim.pattern import (
    PatternResult,
    aligning_phases,
    closed_form_coherence,
    closed_form_pattern,
    coherence_from_pattern,
    coincidence_pattern,
    default_z2_grid,
    fringe_period,
    local_maxima,
    primary_maximum,
)


def rel_l2(a, b):
    return np.linalg.norm(a - b) / np.linalg.norm(b)


def test_orthogonal_detectors_leave_no_cross_term(strong_src, geo3):
    z2 = default_z2_grid(strong_src, geo3)
    p = coincidence_pattern(strong_src, geo3, uniform_gram(3, 0.0), z2)
    assert np.max(np.abs(p.cross)) < 1e-12
    assert np.all(p.intensity >= 0)


def test_incoherent_is_phase_average(weak_src, geo3):
    det = uniform_gram(3, 0.6)
    z2 = np.linspace(-15, 15, 301)
    rng = np.random.default_rng(3)
    acc = np.zeros_like(z2)
    draws = 4000
    for _ in range(draws):
        acc += coincidence_pattern(weak_src, geo3, det, z2, rng.uniform(0, 2 * np.pi, 3)).intensity
    ref = coincidence_pattern(weak_src, geo3, det, z2).incoherent
    assert rel_l2(acc / draws, ref) < 0.05


def test_fringe_period_two_slits(strong_src):
    geo = Geometry(2, 1.0, 0.1, 3.0, 0.15, 1.0)
    z2 = np.linspace(-12, 12, 24001)
    p = coincidence_pattern(strong_src, geo, uniform_gram(2, 1.0), z2)
    ratio = p.intensity / p.incoherent
    peaks = local_maxima(ratio)
    spacing = np.mean(np.diff(z2[peaks]))
    assert spacing == pytest.approx(fringe_period(strong_src, geo), rel=1e-3)
    gam = geo.slit_width**2 + 1 / strong_src.sigma**2
    lam_d = geo.wavelength * geo.D
    approx = lam_d / geo.slit_spacing * (1 + (math.pi * gam / lam_d) ** 2)
    assert fringe_period(strong_src, geo) == pytest.approx(approx, rel=1e-4)


def test_rederived_closed_form_tracks_exact(strong_src, geo3):
    det = uniform_gram(3, 0.5)
    z2 = default_z2_grid(strong_src, geo3)
    exact = coincidence_pattern(strong_src, geo3, det, z2).intensity
    fixed = closed_form_pattern(strong_src, geo3, det, z2, legacy=False)
    legacy = closed_form_pattern(strong_src, geo3, det, z2, legacy=True)
    assert rel_l2(fixed, exact) < 1e-4
    # the legacy form (squared widths, halved prefactor) misses the exact pattern
    assert rel_l2(legacy, exact) > 0.5


def test_broad_form_agrees_when_envelopes_are_wide(strong_src):
    geo = Geometry(3, 1.0, 0.1, math.pi * 1e5, 0.15, 1.0)
    det = uniform_gram(3, 0.5)
    z2 = default_z2_grid(strong_src, geo)
    full = closed_form_pattern(strong_src, geo, det, z2, legacy=False)
    broad = closed_form_pattern(strong_src, geo, det, z2, legacy=False, broad=True)
    assert rel_l2(broad, full) < 1e-3
    exact = coincidence_pattern(strong_src, geo, det, z2).intensity
    assert rel_l2(full, exact) < 1e-3


def test_closed_form_refuses_weak_regime(weak_src, geo3):
    with pytest.raises(RegimeError):
        closed_form_pattern(weak_src, geo3, uniform_gram(3, 0.5), np.linspace(-1, 1, 5))


@pytest.mark.parametrize("L1", [30.0, 100.0])
@pytest.mark.parametrize("s", [0.2, 0.5, 0.9])
def test_pattern_and_matrix_coherence_agree(strong_src, L1, s):
    geo = Geometry(3, 1.0, 0.1, L1, 0.15, 1.0, 0.0, -2.0)
    det = uniform_gram(3, s)
    ph = aligning_phases(strong_src, geo)
    p = coincidence_pattern(strong_src, geo, det, default_z2_grid(strong_src, geo, points=8001), ph)
    br = compute_branches(strong_src, geo)
    assert br.max_psi_overlap < 1e-6
    c2m = coherence(conditional_rho(det.with_probs(br.c), br.envelopes))
    assert coherence_from_pattern(p) == pytest.approx(c2m, abs=1e-4)
    assert closed_form_coherence(strong_src, geo, det) == pytest.approx(c2m, abs=1e-4)


def test_short_baseline_shows_envelope_bias(strong_src, geo3):
    # with L1 = 3 the branch envelopes still vary across the fringe and the two
    # routes separate by about 1e-4
    det = uniform_gram(3, 0.5)
    p = coincidence_pattern(strong_src, geo3, det, default_z2_grid(strong_src, geo3, points=8001),
                            aligning_phases(strong_src, geo3))
    br = compute_branches(strong_src, geo3)
    c2m = coherence(conditional_rho(det.with_probs(br.c), br.envelopes))
    assert 5e-5 < abs(coherence_from_pattern(p) - c2m) < 5e-4


def test_unaligned_phases_lower_pattern_coherence(strong_src, geo3):
    det = uniform_gram(3, 0.5)
    z2 = default_z2_grid(strong_src, geo3, points=8001)
    plain = coherence_from_pattern(coincidence_pattern(strong_src, geo3, det, z2))
    aligned = coherence_from_pattern(coincidence_pattern(strong_src, geo3, det, z2,
                                                         aligning_phases(strong_src, geo3)))
    assert plain < aligned - 0.1


def test_reflection_symmetry(weak_src, geo3):
    det = uniform_gram(3, 0.4)
    geo = geo3.centered()
    z2 = np.linspace(-20, 20, 801)
    p = coincidence_pattern(weak_src, geo, det, z2)
    q = coincidence_pattern(weak_src, geo.reflected(), det, -z2[::-1])
    assert np.allclose(p.intensity, q.intensity[::-1], rtol=1e-10, atol=1e-14)


def test_weak_source_blurs_fringes(strong_src, weak_src, geo3):
    det = uniform_gram(3, 0.5)
    c_strong = coherence_from_pattern(coincidence_pattern(strong_src, geo3, det, default_z2_grid(strong_src, geo3)))
    c_weak = coherence_from_pattern(coincidence_pattern(weak_src, geo3, det, default_z2_grid(weak_src, geo3)))
    assert c_weak < c_strong


def test_grid_validation(strong_src, geo3):
    det = uniform_gram(3, 0.5)
    with pytest.raises(GridError):
        coincidence_pattern(strong_src, geo3, det, np.array([0.0, 0.0, 1.0]))
    with pytest.raises(GridError):
        coincidence_pattern(strong_src, geo3, det, np.array([]))
    with pytest.raises(GridError):
        coincidence_pattern(strong_src, geo3, uniform_gram(2, 0.5), np.linspace(0, 1, 5))


def test_maximum_on_edge_is_rejected(strong_src, geo3):
    det = uniform_gram(3, 0.5)
    ph = aligning_phases(strong_src, geo3)
    p = coincidence_pattern(strong_src, geo3, det, np.linspace(-0.9, -0.2, 50), ph)
    with pytest.raises(ExtractionError):
        primary_maximum(p)


def test_exports(tmp_path, weak_src, geo3):
    p = coincidence_pattern(weak_src, geo3, uniform_gram(3, 0.5), np.linspace(-5, 5, 11))
    p.to_csv(tmp_path / "p.csv")
    lines = (tmp_path / "p.csv").read_text().splitlines()
    assert lines[0] == "z2,intensity,incoherent"
    assert len(lines) == 12
    assert float(lines[1].split(",")[0]) == -5.0
    p.to_json(tmp_path / "p.json")
    back = PatternResult.from_dict(json.loads((tmp_path / "p.json").read_text()))
    assert np.array_equal(back.intensity, p.intensity)
    p.to_svg(tmp_path / "p.svg")
    svg = (tmp_path / "p.svg").read_text()
    assert svg.startswith("<svg") and "<polyline" in svg and "<circle" in svg


def test_pattern_coherence_zero_without_cross_terms(weak_src, geo3):
    p = coincidence_pattern(weak_src, geo3, uniform_gram(3, 0.0), np.linspace(-30, 30, 601))
    assert coherence_from_pattern(p) == 0.0
