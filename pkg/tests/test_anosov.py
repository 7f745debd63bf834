import math

import numpy as np
import pytest

from hitchin_lab.anosov import (Triple, bundle_norm, compound, contraction_trace, crossratio, crossratio_flags,
                                flow, flow_matrix, gap_certificate, gap_growth, period, period_values)
from hitchin_lab.errors import CrossratioMismatch, DegeneratePairing, DegenerateSum, TooFewWords
from hitchin_lab.flags import FlagChain
from hitchin_lab.limit_curve import (SampledCurve, VeroneseCurve, boundary_coordinate, circle_distance,
                                     theta_line, veronese_flag)
from hitchin_lab.representations import SurfaceRep, random_rotation_rep, sym_power
from hitchin_lab.surface_group import Word, ball, evaluate, sample_words

from conftest import base, rep, samples


def fuchsian_period(w, n):
    tr = abs(np.trace(evaluate(w, base())))
    return (n - 1) * 2 * math.log((tr + math.sqrt(tr * tr - 4)) / 2)


def gap_words(radius=6, per_length=60):
    return [w for length in range(1, radius + 1) for w in sample_words(2, length, per_length, seed=length)]


# --- triples and flow ---------------------------------------------------------

def test_triple_validation():
    Triple(0.3, 1.5, 4.0)
    with pytest.raises(ValueError):
        Triple(0.3, 4.0, 1.5)
    with pytest.raises(ValueError):
        Triple(0.3, 0.3, 1.5)


def test_flow_zero_and_fixed_ends():
    tr = Triple(0.3, 1.5, 4.0)
    assert flow(tr, 0.0) == tr
    moved = flow(tr, 1.7)
    assert (moved.x_plus, moved.x_minus) == (tr.x_plus, tr.x_minus)


def test_flow_closed_form():
    # x+ = 0 (e1), x- = π (e2): tan of the half angle scales by e^{-2t}
    tr = Triple(0.0, 1.2, np.pi)
    for t in np.linspace(-2, 2, 9):
        expected = 2 * math.atan(math.exp(-2 * t) * math.tan(0.6))
        assert abs(math.remainder(flow(tr, t).x_zero - expected, 2 * np.pi)) < 1e-12


def test_flow_converges_to_x_plus():
    tr = Triple(0.3, 1.5, 4.0)
    dists = [circle_distance(flow(tr, t).x_zero, tr.x_plus) for t in range(0, 12)]
    assert all(b < a for a, b in zip(dists, dists[1:])) and dists[-1] < 1e-8


def test_flow_matrix_eigen():
    m = flow_matrix(0.3, 4.0, 0.7)
    assert np.allclose(m @ theta_line(0.3), math.exp(0.7) * theta_line(0.3))
    assert np.allclose(m @ theta_line(4.0), math.exp(-0.7) * theta_line(4.0))


# --- bundle norm and contraction ------------------------------------------------

def test_bundle_norm_ratio_veronese():
    curve, tr = VeroneseCurve(3), Triple(0.3, 1.5, 4.0)
    n0 = bundle_norm(curve, tr, 1)
    for t in (-2.0, -0.5, 0.5, 1.0, 3.0):
        assert bundle_norm(curve, flow(tr, t), 1) / n0 == pytest.approx(math.exp(-2 * t), rel=1e-6)


def test_bundle_norm_scale_cancels():
    curve, tr = VeroneseCurve(4), Triple(0.3, 1.5, 4.0)
    a = bundle_norm(curve, flow(tr, 1.0), 2) / bundle_norm(curve, tr, 2)
    b = bundle_norm(curve, flow(tr, 1.0), 2, phi_scale=7.3) / bundle_norm(curve, tr, 2, phi_scale=7.3)
    assert a == pytest.approx(b, rel=1e-12)


def test_bundle_norm_reversed_inverts_ratio():
    curve, tr = VeroneseCurve(3), Triple(0.3, 1.5, 4.0)
    moved = flow(tr, 0.8)
    fwd = bundle_norm(curve, moved, 1) / bundle_norm(curve, tr, 1)
    back = bundle_norm(curve, moved.reversed(), 1) / bundle_norm(curve, tr.reversed(), 1)
    assert fwd * back == pytest.approx(1.0, rel=1e-10)


def test_contraction_veronese_n4():
    times = np.arange(-3, 3.01, 0.5)
    report = contraction_trace(VeroneseCurve(4), Triple(0.3, 1.5, 4.0), 2, times)
    drop = report.details["log_norms"][0] - report.details["log_norms"][-1]
    assert report.passed
    assert math.exp(drop) == pytest.approx(math.exp(12), rel=0.05)


def test_contraction_single_time():
    report = contraction_trace(VeroneseCurve(3), Triple(0.3, 1.5, 4.0), 1, [0.0])
    assert not report.passed and report.details["note"] == "insufficient span"
    assert report.details["monotone"]


def test_contraction_bent_sampled():
    curve = SampledCurve(samples(3, 0.1))
    report = contraction_trace(curve, Triple(0.3, 1.5, 4.0), 1, np.arange(-3, 3.01, 0.5))
    assert report.passed


def test_contraction_lookup_guard():
    curve = SampledCurve(samples(3, 0.0, 2))
    with pytest.raises(DegenerateSum):
        bundle_norm(curve, Triple(0.3, 0.30001, 4.0), 1)


# --- gap growth -------------------------------------------------------------------

def test_compound_oracle(rng):
    m = rng.standard_normal((4, 4))
    c2 = compound(m, 2)
    assert c2.shape == (6, 6)
    s = np.linalg.svd(m, compute_uv=False)
    assert np.linalg.svd(c2, compute_uv=False)[0] == pytest.approx(s[0] * s[1], rel=1e-12)
    assert np.linalg.det(compound(m, 4)[..., :1, :1]) == pytest.approx(np.linalg.det(m), rel=1e-12)


def test_gap_growth_fuchsian_n3():
    growth = gap_growth(rep(3), list(ball(2, 6).of_length(1)) + gap_words())
    assert growth.min_slope > 0.05
    assert growth.spread < 0.02
    # oracle: the 2x2 level; log gap of ι(g) is 2 log σ1(g) for each root
    words = gap_words(6, 20)
    lengths = np.array([len(w) for w in words])
    sv = np.array([2 * math.log(np.linalg.svd(evaluate(w, base()), compute_uv=False)[0]) for w in words])
    slope = np.polyfit(lengths, sv, 1)[0]
    small = gap_growth(rep(3), words)
    assert small.per_root_slopes == pytest.approx([slope, slope], rel=1e-8)


def test_gap_growth_too_few_words():
    with pytest.raises(TooFewWords):
        gap_growth(rep(3), sample_words(2, 3, 50))
    with pytest.raises(TooFewWords):
        gap_growth(rep(3), gap_words(4, 5)[:20])


def test_gap_growth_identity_excluded():
    words = gap_words(4, 10) + [Word()]
    assert len(gap_growth(rep(3), words).lengths) == len(words) - 1


def test_gap_certificate_names_failing_roots():
    gens = tuple(np.kron(np.eye(2), g) for g in base().generators)
    doubled = SurfaceRep(2, 4, gens)
    report = gap_certificate(gap_growth(doubled, gap_words(5, 20)), 4)
    assert not report.passed and report.details["failing_roots"] == [1, 3]


def test_gap_certificate_broken_rep_fails():
    report = gap_certificate(gap_growth(random_rotation_rep(3, seed=1), gap_words(5, 20)), 3)
    assert not report.passed and report.details["failing_roots"] == [1, 2]


def test_gap_rows_schema():
    growth = gap_growth(rep(4), gap_words(5, 20))
    rows = growth.rows()
    assert [r[0] for r in rows] == [1, 2, 3, 4, 5] and all(len(r) == 4 for r in rows)


# --- crossratio and period ----------------------------------------------------------

def test_crossratio_trivial():
    curve = VeroneseCurve(3)
    assert crossratio(curve, 0.1, 2.0, 3.0, 3.0) == pytest.approx(1.0, abs=1e-14)


def test_crossratio_classical_n2():
    # x = ∞ (form t ↦ kills e2... ), y = 0 in affine coordinate u = tan(θ/2)
    lam, u = 1.7, 0.4
    x, y = np.pi, 0.0
    z, t = 2 * math.atan(u), 2 * math.atan(lam ** 2 * u)
    b = crossratio(VeroneseCurve(2), x, y, z, t)
    assert abs(b) == pytest.approx(lam ** 2, rel=1e-12)


def test_crossratio_invariance(rng):
    n = 4
    pts = [0.2, 1.3, 2.9, 4.4]
    flags = [veronese_flag(n, p) for p in pts]
    g = sym_power(n, evaluate(Word.parse("a1 b2"), base()))
    moved = [f.transform(g) for f in flags]
    assert crossratio_flags(*moved) == pytest.approx(crossratio_flags(*flags), rel=1e-10)


def test_crossratio_degenerate():
    with pytest.raises(DegeneratePairing):
        crossratio(VeroneseCurve(3), 0.5, 2.0, 0.5, 3.0)


@pytest.mark.parametrize("n", [3, 4])
def test_period_fuchsian(n):
    curve = VeroneseCurve(n)
    for w in (Word.parse("a1"), Word.parse("a1 b2"), Word.parse("b1 A2 a1")):
        ends = (boundary_coordinate(w, base()).theta, boundary_coordinate(w.inverse(), base()).theta)
        witnesses = [t for t in np.linspace(0.1, 6.2, 40) if min(circle_distance(t, e) for e in ends) > 0.2][:10]
        value = period(rep(n), w, witnesses, curve)
        assert value == pytest.approx(fuchsian_period(w, n), rel=1e-8)
        assert period(rep(n), w.inverse(), witnesses, curve) == pytest.approx(value, rel=1e-10)


def test_period_powers():
    curve, w = VeroneseCurve(3), Word.parse("a1 b2")
    witnesses = [1.0, 2.0]
    p1 = period_values(rep(3), w, witnesses, curve)[0]
    for k in range(2, 5):
        assert period_values(rep(3), w ** k, witnesses, curve)[0] == pytest.approx(k * p1, abs=1e-8)


def test_period_mismatch_detected():
    # the identity holds for any witness vector, so a mismatch can only come
    # from precision: pure double misses a 1e-14 tolerance
    with pytest.raises(CrossratioMismatch):
        period(rep(4), Word.parse("a1 a2"), [1.0, 2.5, 4.0], VeroneseCurve(4), tol=1e-14, dps=None)
    w = Word.parse("a1 b2 a2 b1 a1 b2 a2")
    with pytest.raises(DegeneratePairing):
        period(rep(4), w, [1.0, 2.5, 4.0], VeroneseCurve(4), dps=None)
    assert period(rep(4), w, [1.0, 2.5, 4.0], VeroneseCurve(4)) == pytest.approx(fuchsian_period(w, 4), rel=1e-8)
