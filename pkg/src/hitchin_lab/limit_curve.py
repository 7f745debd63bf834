"""Equivariant limit curves: sampling at attracting fixed points, the closed-form
Veronese curve, and the curve-level direct-sum checks.

Boundary points are angles θ ∈ [0, 2π) on the limit circle of the base
Fuchsian group; the line of R^2 at angle φ corresponds to θ = 2φ.  Every
flag is expressed in the orthonormal binomial basis the representations act in.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from itertools import combinations

import numpy as np

from .errors import DimensionMismatch, InsufficientSamples, NotHyperbolic, NotLoxodromic, NotLoxodromicAt
from .flags import DIRECT_TOL, FlagChain, Subspace, flag_distance, forced_intersection, orthonormalize, subspace_distance, subspace_sum
from .reports import CheckReport
from .representations import SurfaceRep, rotation, sym_power, word_spectra
from .surface_group import Word, ball, evaluate, is_proper_power

TWO_PI = 2 * math.pi
DEDUP_TOL = 1e-9
MIN_SEPARATION = 0.2  # rad; margins scale like separation^(n-1)
LOOKUP_GUARD = 1e-4
POSITIVITY_TOL = 1e-5


@dataclass(frozen=True)
class CirclePoint:
    theta: float

    def __post_init__(self):
        object.__setattr__(self, "theta", wrap(float(self.theta)))

    def __float__(self):
        return self.theta


def wrap(theta: float) -> float:
    t = math.fmod(theta, TWO_PI)
    if t < 0:
        t += TWO_PI
    # fmod can return 2π - tiny, which is 0 on the circle
    return 0.0 if t >= TWO_PI else t


def as_theta(x) -> float:
    return x.theta if isinstance(x, CirclePoint) else wrap(float(x))


def signed_offset(theta: float, anchor: float) -> float:
    """theta - anchor in (-π, π]."""
    d = math.fmod(theta - anchor, TWO_PI)
    if d > math.pi:
        d -= TWO_PI
    elif d <= -math.pi:
        d += TWO_PI
    return d


def circle_distance(a: float, b: float) -> float:
    return abs(signed_offset(a, b))


def line_theta(v) -> float:
    """Doubled angle of the line spanned by v in R^2."""
    return wrap(2 * math.atan2(float(v[1]), float(v[0])))


def theta_line(theta: float) -> np.ndarray:
    return np.array([math.cos(theta / 2), math.sin(theta / 2)])


def circle_action(g, x) -> float:
    """Image of a boundary point under a 2x2 matrix (projective action on lines)."""
    return line_theta(np.asarray(g) @ theta_line(as_theta(x)))


def boundary_coordinate(w: Word, base: SurfaceRep) -> CirclePoint:
    """θ of the attracting eigenline of the base image of w."""
    if base.n != 2:
        raise ValueError("base representation must be 2-dimensional")
    m = evaluate(w, base)
    tr = abs(m[0, 0] + m[1, 1])
    if tr <= 2 + 1e-8:
        raise NotHyperbolic(f"|trace| = {tr:.12g} for word {w}")
    return CirclePoint(_attracting_theta(m))


def _attracting_theta(m) -> float:
    vals, vecs = np.linalg.eig(m)
    return line_theta(vecs[:, int(np.argmax(np.abs(vals)))].real)


def veronese_flag(n: int, x) -> FlagChain:
    """Closed-form Fuchsian flag: level k holds the forms divisible by ℓ^(n-k),
    ℓ the linear form of the line at x."""
    return FlagChain.from_frame(sym_power(n, rotation(as_theta(x))))


@dataclass(frozen=True, eq=False)
class CurveSample:
    point: CirclePoint
    flag: FlagChain
    word: Word | None
    gap: float

    @property
    def theta(self) -> float:
        return self.point.theta

    def to_json(self) -> dict:
        return {"theta": self.theta, "word": None if self.word is None else str(self.word),
                "gap": self.gap, "flag": self.flag.to_json()}

    @classmethod
    def from_json(cls, data: dict) -> "CurveSample":
        word = None if data["word"] is None else Word.parse(data["word"])
        return cls(CirclePoint(data["theta"]), FlagChain.from_json(data["flag"]), word, float(data["gap"]))


def sample_curve(rep: SurfaceRep, base: SurfaceRep, radius: int) -> list:
    """One sample per distinct attracting fixed point of the radius-ball words.

    Proper powers are skipped (same fixed point as their root, which is in the
    ball already).  A word that is not purely loxodromic under rep raises
    NotLoxodromicAt: the rep has left the certified regime.
    """
    if rep.genus != base.genus:
        raise ValueError("rep and base must share the genus")
    words = [w for w in ball(rep.genus, radius) if not is_proper_power(w)]
    thetas = [boundary_coordinate(w, base).theta for w in words]
    spectra = word_spectra(words, rep)
    samples = []
    for w, th, data in zip(words, thetas, spectra):
        if isinstance(data, NotLoxodromic):
            raise NotLoxodromicAt(w, data)
        samples.append(CurveSample(CirclePoint(th), data.eigenflag, w, data.min_gap))
    return _dedup_sorted(samples)


def _dedup_sorted(samples) -> list:
    # stable sort keeps the shortest word when two samples share a fixed point
    samples = sorted(samples, key=lambda s: s.theta)
    out = []
    for s in samples:
        if out and s.theta - out[-1].theta < DEDUP_TOL:
            if len(s.word or ()) < len(out[-1].word or ()):
                out[-1] = s
            continue
        out.append(s)
    if len(out) > 1 and out[0].theta + TWO_PI - out[-1].theta < DEDUP_TOL:
        out.pop()
    return out


def veronese_samples(n: int, thetas) -> list:
    return _dedup_sorted([CurveSample(CirclePoint(t), veronese_flag(n, t), None, 1.0) for t in thetas])


class VeroneseCurve:
    """Flag source for the Fuchsian curve, exact at every point."""

    def __init__(self, n: int):
        self.n = n

    def flag(self, x) -> FlagChain:
        return veronese_flag(self.n, x)

    def offset(self, x) -> float:
        return 0.0


class SampledCurve:
    """Flag source backed by samples: a point gets the flag of the nearest sample."""

    def __init__(self, samples):
        self.samples = list(samples)
        if not self.samples:
            raise InsufficientSamples("empty sample list")
        self.thetas = np.array([s.theta for s in self.samples])
        self.n = self.samples[0].flag.ambient_dim

    def nearest(self, x) -> tuple:
        """(index, circular distance) of the sample nearest to x."""
        th = as_theta(x)
        d = np.abs(np.angle(np.exp(1j * (self.thetas - th))))
        i = int(np.argmin(d))
        return i, float(d[i])

    def flag(self, x) -> FlagChain:
        return self.samples[self.nearest(x)[0]].flag

    def offset(self, x) -> float:
        return self.nearest(x)[1]


# --- Frenet ---------------------------------------------------------------

DEFAULT_SCHEDULE = tuple(0.4 * 2.0 ** -k for k in range(6))


def default_partitions(n: int) -> list:
    parts = [(1,) * (n - 1)]
    parts.append((2, 1) if n == 3 else (2,) + (1,) * (n - 3))
    parts.append((n - 1, 1))
    out = []
    for p in parts:
        if p not in out and sum(p) <= n:
            out.append(p)
    return out


def _anchor_index(samples, anchor) -> int:
    th = as_theta(anchor)
    for i, s in enumerate(samples):
        if circle_distance(s.theta, th) < DEDUP_TOL:
            return i
    raise ValueError(f"anchor {th} is not the θ of a sample")


def _window_points(samples, anchor_idx, count, eps):
    """count distinct non-anchor samples near anchor + (-1)^j eps (count-j)/count."""
    anchor = samples[anchor_idx].theta
    offsets = np.array([signed_offset(s.theta, anchor) for s in samples])
    offsets[anchor_idx] = np.inf
    inside = np.abs(offsets) <= eps
    half_width = eps / (2 * count)
    chosen = []
    for j in range(count):
        # alternate sides with the first block farthest out; the layout with the
        # first block nearest puts (2,1) on the offset ratio -1/2 where the
        # first-order error cancels, and pick jitter then dominates
        target = (-1) ** j * eps * (count - j) / count
        d = np.where(inside, np.abs(offsets - target), np.inf)
        d[chosen] = np.inf
        # stay in the band around the target when it holds a sample, so the
        # cluster scale tracks eps instead of the local sampling pattern
        band = d <= half_width
        if band.any():
            d = np.where(band, d, np.inf)
        i = int(np.argmin(d))
        if not np.isfinite(d[i]):
            raise InsufficientSamples(f"window {eps:.3g} around θ={anchor:.6f} holds fewer than {count} samples")
        chosen.append(i)
    return chosen


def _loglog_slope(radii, dists) -> float:
    x, y = np.log(np.asarray(radii)), np.log(np.maximum(np.asarray(dists), 1e-300))
    return float(np.polyfit(x, y, 1)[0])


def covered_anchor(samples, partitions=None, schedule=DEFAULT_SCHEDULE, slack: float = 0.25) -> float:
    """θ of the first sample (shortest word, then θ) around which every window
    target of the schedule has a sample within slack·ε/l (l = parts).

    Where a band is empty the pick falls back to the nearest sample inside the
    window, which decouples the cluster scale from ε; a covered anchor avoids
    that at sparse sampling radii.
    """
    samples = list(samples)
    n = samples[0].flag.ambient_dim
    partitions = default_partitions(n) if partitions is None else [tuple(p) for p in partitions]
    counts = sorted({len(p) for p in partitions})
    thetas = np.array([s.theta for s in samples])
    order = sorted(range(len(samples)), key=lambda i: (len(samples[i].word or ()), thetas[i]))
    for i in order:
        offsets = np.angle(np.exp(1j * (thetas - thetas[i])))
        offsets[i] = np.inf
        ok = True
        for count in counts:
            for eps in schedule:
                for j in range(count):
                    target = (-1) ** j * eps * (count - j) / count
                    near = (np.abs(offsets - target) <= slack * eps / count) & (np.abs(offsets) <= eps)
                    if not near.any():
                        ok = False
                        break
                if not ok:
                    break
            if not ok:
                break
        if ok:
            return float(thetas[i])
    raise InsufficientSamples("no sample has every Frenet window band occupied")


def check_frenet(samples, anchor, partitions=None, schedule=DEFAULT_SCHEDULE, final_limit: float = 1e-2,
                 tol: float = DIRECT_TOL) -> CheckReport:
    """Direct sums ⊕ξ^{n_i}(y_i) over points y_i closing in on the anchor, and
    their convergence to ξ^{Σn_i}(anchor)."""
    samples = list(samples)
    n = samples[0].flag.ambient_dim
    partitions = default_partitions(n) if partitions is None else [tuple(p) for p in partitions]
    idx = _anchor_index(samples, anchor)
    target_flag = samples[idx].flag
    worst_margin, passed, details, tested = 1.0, True, {}, 0
    for part in partitions:
        total = sum(part)
        if total > n or min(part) < 1:
            raise ValueError(f"bad partition {part} for n={n}")
        margins, dists = [], []
        for eps in schedule:
            pts = _window_points(samples, idx, len(part), eps)
            spaces = [samples[i].flag.level(k) for i, k in zip(pts, part)]
            res = subspace_sum(spaces, tol)
            margins.append(res.margin)
            tested += 1
            if total == n:
                continue  # the sum is all of E: only directness is at stake
            dists.append(subspace_distance(orthonormalize(np.hstack([s.basis for s in spaces])),
                                           target_flag.level(total)) if res.is_direct else math.pi / 2)
        if total == n:
            ok = min(margins) > tol
            details[str(part)] = {"margins": margins, "full_sum": True, "pass": ok}
            worst_margin = min(worst_margin, min(margins))
            passed = passed and ok
            continue
        monotone = all(b <= 1.1 * a for a, b in zip(dists, dists[1:]))
        slope = _loglog_slope(schedule, dists) if len(schedule) > 1 else float("nan")
        ok = (min(margins) > tol and monotone and dists[-1] < final_limit
              and (len(schedule) < 2 or slope >= 0.5))
        details[str(part)] = {"margins": margins, "distances": dists, "slope": slope, "monotone": monotone, "pass": ok}
        worst_margin = min(worst_margin, min(margins))
        passed = passed and ok
    details["anchor"] = samples[idx].theta
    details["schedule"] = list(schedule)
    details["final_limit"] = final_limit
    return CheckReport("frenet", n, tested, worst_margin, tol, passed, details)


# --- positivity -------------------------------------------------------------

POSITIVITY_CHECKS = ("two_hyper", "three_hyper", "property_H", "main14", "hyperconvex_n")
_ARITY = {"two_hyper": 2, "three_hyper": 3, "property_H": 3, "main14": 3}


def _two_hyper(flags, n):
    x, y = flags
    return min(subspace_sum([x.level(p), y.level(n - p)]).margin for p in range(1, n))


def _three_hyper(flags, n):
    x, y, z = flags
    # maximal triples only: a sub-sum of a direct sum is direct with no smaller margin
    return min(subspace_sum([x.level(k), y.level(p), z.level(n - k - p)]).margin
               for k in range(1, n - 1) for p in range(1, n - k))


def _property_h(flags, n, grouped=False):
    x, y, z = flags
    worst = 1.0
    for k in range(0, n - 1):
        inter, m_int = forced_intersection(z.level(k + 1), x.level(n - k))
        worst = min(worst, m_int)
        if grouped:
            # literal grouping (ξ^{k+1}(y) + ξ^{n-k-2}(x)) + intersection
            inner = subspace_sum([y.level(k + 1), x.level(n - k - 2)])
            worst = min(worst, inner.margin)
        worst = min(worst, subspace_sum([y.level(k + 1), inter, x.level(n - k - 2)]).margin)
    return worst


def _hyperconvex(flags, n):
    return subspace_sum([f.level(1) for f in flags]).margin


_MARGINS = {
    "two_hyper": _two_hyper,
    "three_hyper": _three_hyper,
    "property_H": _property_h,
    "main14": lambda f, n: _property_h(f, n, grouped=True),
    "hyperconvex_n": _hyperconvex,
}


def _separated(thetas, sep):
    return all(circle_distance(a, b) > sep for a, b in combinations(thetas, 2))


def check_positivity(samples, which: str, budget: int = 200, seed: int = 0, tol: float = POSITIVITY_TOL,
                     min_separation: float = MIN_SEPARATION) -> CheckReport:
    """Worst directness margin of a positivity condition over seeded sample tuples."""
    if which not in _MARGINS:
        raise ValueError(f"unknown check {which!r}; choose from {POSITIVITY_CHECKS}")
    samples = list(samples)
    n = samples[0].flag.ambient_dim if samples else 0
    arity = _ARITY.get(which, n)
    if len(samples) < max(arity, 2):
        raise InsufficientSamples(f"{which} needs {arity} samples, got {len(samples)}")
    rng = np.random.default_rng(seed)
    worst, worst_thetas, tested, filtered = 1.0, None, 0, 0
    for _ in range(20 * budget):
        if tested >= budget:
            break
        pick = rng.choice(len(samples), size=arity, replace=False)
        thetas = [samples[i].theta for i in pick]
        if not _separated(thetas, min_separation):
            filtered += 1
            continue
        margin = _MARGINS[which]([samples[i].flag for i in pick], n)
        tested += 1
        if margin < worst:
            worst, worst_thetas = margin, thetas
    details = {"filtered": filtered, "seed": seed, "budget": budget, "worst_tuple": worst_thetas}
    if tested == 0:
        details["note"] = "every drawn tuple was filtered; nothing certified"
        return CheckReport(which, n, 0, 0.0, tol, False, details)
    return CheckReport(which, n, tested, worst, tol, worst > tol, details)


def veronese_lift(n: int, theta: float) -> np.ndarray:
    """Continuous lift of the Veronese line on [0, 2π): ℓ^(n-1) with ℓ the unit
    vector at angle θ/2."""
    return sym_power(n, rotation(theta))[:, 0]


def signed_hyperconvex(samples, budget: int = 200, seed: int = 0, tol: float = 1e-12,
                       min_separation: float = MIN_SEPARATION) -> CheckReport:
    """Oriented version of hyperconvex_n: det of n lifted lines in increasing θ.

    Each line is lifted to the side of the Veronese lift at the same θ, which
    is the lift convention; with it the Fuchsian curve gives positive
    determinants (a product of sines of half-angle differences).
    """
    samples = list(samples)
    n = samples[0].flag.ambient_dim
    if len(samples) < n:
        raise InsufficientSamples(f"need {n} samples, got {len(samples)}")
    rng = np.random.default_rng(seed)
    worst, tested, filtered, worst_thetas = math.inf, 0, 0, None
    for _ in range(20 * budget):
        if tested >= budget:
            break
        pick = sorted(rng.choice(len(samples), size=n, replace=False), key=lambda i: samples[i].theta)
        thetas = [samples[i].theta for i in pick]
        if not _separated(thetas, min_separation):
            filtered += 1
            continue
        cols = []
        for i in pick:
            v = samples[i].flag.line()
            cols.append(v if v @ veronese_lift(n, samples[i].theta) >= 0 else -v)
        value = float(np.linalg.det(np.column_stack(cols)))
        tested += 1
        if value < worst:
            worst, worst_thetas = value, thetas
    details = {"filtered": filtered, "seed": seed, "budget": budget, "worst_tuple": worst_thetas}
    if tested == 0:
        details["note"] = "every drawn tuple was filtered; nothing certified"
        return CheckReport("hyperconvex_signed", n, 0, 0.0, tol, False, details)
    return CheckReport("hyperconvex_signed", n, tested, worst, tol, worst > tol, details)


# --- one-sided limits ---------------------------------------------------------

def _side_points(samples, anchor_idx, p, eps, side):
    anchor = samples[anchor_idx].theta
    offsets = np.array([signed_offset(s.theta, anchor) for s in samples]) * side
    offsets[anchor_idx] = -np.inf
    chosen = []
    for j in range(p):
        target = eps * (j + 1) / p
        d = np.where((offsets > 0) & (offsets <= eps), np.abs(offsets - target), np.inf)
        d[chosen] = np.inf
        i = int(np.argmin(d))
        if not np.isfinite(d[i]):
            raise InsufficientSamples(f"side {side:+d} of θ={anchor:.6f} has fewer than {p} samples within {eps:.3g}")
        chosen.append(i)
    return chosen, float(np.mean(offsets[chosen]))


def _rank_projection(proj, p) -> Subspace:
    vals, vecs = np.linalg.eigh((proj + proj.T) / 2)
    return orthonormalize(vecs[:, np.argsort(vals)[::-1][:p]])


def one_sided_limits(samples, anchor, p: int, schedule=DEFAULT_SCHEDULE):
    """Limits of ξ¹(y_1)⊕…⊕ξ¹(y_p) as the y_i close in from each side.

    The span through points at mean offset h converges like P0 + h·A, so the
    last two windows are combined by Richardson extrapolation in the actual
    offsets and the result projected back to rank p.
    Returns (plus, minus, agreement, details).
    """
    samples = list(samples)
    n = samples[0].flag.ambient_dim
    if not 1 <= p < n:
        raise ValueError(f"p must lie in 1..{n - 1}")
    idx = _anchor_index(samples, anchor)
    target = samples[idx].flag.level(p)
    limits, details = {}, {}
    for side, name in ((1, "plus"), (-1, "minus")):
        projs, scales, dists = [], [], []
        for eps in schedule:
            pts, h = _side_points(samples, idx, p, eps, side)
            span = orthonormalize(np.column_stack([samples[i].flag.line() for i in pts]))
            projs.append(span.projector())
            scales.append(h)
            dists.append(subspace_distance(span, target))
        if len(projs) >= 2 and scales[-2] != scales[-1]:
            h1, h2 = scales[-2], scales[-1]
            extrap = (h1 * projs[-1] - h2 * projs[-2]) / (h1 - h2)
            limit = _rank_projection(extrap, p)
        else:
            limit = _rank_projection(projs[-1], p)
        limits[name] = limit
        details[name] = {"distances": dists, "offsets": scales, "limit_distance": subspace_distance(limit, target)}
    agreement = subspace_distance(limits["plus"], limits["minus"])
    return limits["plus"], limits["minus"], agreement, details


# --- increasing maps ----------------------------------------------------------

def _plane_angle(line: Subspace, frame) -> float:
    v = line.basis[:, 0]
    a, b = float(frame[:, 0] @ v), float(frame[:, 1] @ v)
    return math.atan2(b, a) % math.pi


def _forced(a, b, what, tol):
    sub, margin = forced_intersection(a, b)
    if margin < tol:
        raise DimensionMismatch(f"{what}: intersection not transverse (margin {margin:.3e})")
    return sub, margin


def _check_grid(thetas, excluded):
    for a, b in combinations(thetas, 2):
        if circle_distance(a, b) < DEDUP_TOL:
            raise ValueError("grid points must be distinct")
    for t in thetas:
        for e in excluded:
            if circle_distance(t, e) < DEDUP_TOL:
                raise ValueError("grid must avoid the reference points")


def monotone_trace(curve, W, grid, mode: str = "f_W", p: int | None = None, x=None, z=None,
                   tol: float = DIRECT_TOL) -> CheckReport:
    """Angle sequence of a map into a 2-plane along a grid.

    f_W: y ↦ ξ^{n-1}(y) ∩ (ξ¹(w1)⊕ξ¹(w2)), grid taken in cyclic order from w1;
    passes iff the angles are strictly monotone.
    map_Y: y ↦ (ξ^{n-p+1}(y)⊕ξ^{p-2}(x)) ∩ (ξ^{n-p+2}(z)∩ξ^p(x)); passes iff the
    values are pairwise distinct.
    """
    n = curve.n
    thetas = [as_theta(g) for g in grid]
    if mode == "f_W":
        w1, w2 = (as_theta(w) for w in W)
        _check_grid(thetas, (w1, w2))
        thetas.sort(key=lambda t: (t - w1) % TWO_PI)
        l1, l2 = curve.flag(w1).level(1), curve.flag(w2).level(1)
        plane = subspace_sum([l1, l2], tol)
        if not plane.is_direct:
            raise DimensionMismatch("ξ¹(w1) and ξ¹(w2) coincide")
        frame = orthonormalize(np.hstack([l1.basis, l2.basis])).basis
        plane_space = Subspace(frame)
        values, margins = [], []
        for t in thetas:
            line, m = _forced(curve.flag(t).level(n - 1), plane_space, "f_W", tol)
            values.append(_plane_angle(line, frame))
            margins.append(m)
        steps = np.diff(values)
        ok = bool(len(values) < 2 or np.all(steps > 0) or np.all(steps < 0))
        sep = float(np.min(np.abs(steps))) if len(steps) else math.pi
        details = {"angles": values, "grid": thetas, "mode": mode}
        return CheckReport("f_W", n, len(values), min([sep] + margins), tol, ok, details)
    if mode == "map_Y":
        if p is None or not 2 <= p <= n:
            raise ValueError(f"map_Y needs 2 <= p <= {n}")
        xt, zt = as_theta(x), as_theta(z)
        _check_grid(thetas, (xt, zt))
        fx, fz = curve.flag(xt), curve.flag(zt)
        g, _ = _forced(fz.level(n - p + 2), fx.level(p), "G", tol)
        ref, _ = _forced(fx.level(p - 1), fz.level(n - p + 2), "chart", tol)
        # chart of G with the excluded line as the angle origin
        r = ref.basis[:, 0]
        other = g.basis - np.outer(r, r @ g.basis)
        k = int(np.argmax(np.linalg.norm(other, axis=0)))
        frame = np.column_stack([r, other[:, k] / np.linalg.norm(other[:, k])])
        values, margins = [], []
        for t in thetas:
            hyper = subspace_sum([curve.flag(t).level(n - p + 1), fx.level(p - 2)], tol)
            if not hyper.is_direct:
                raise DimensionMismatch(f"ξ^{n - p + 1}(y) + ξ^{p - 2}(x) is not direct at θ={t:.6f}")
            hspace = orthonormalize(np.hstack([curve.flag(t).level(n - p + 1).basis, fx.level(p - 2).basis]))
            line, m = _forced(hspace, Subspace(frame), "map_Y", tol)
            values.append(_plane_angle(line, frame))
            margins.append(min(m, hyper.margin))
        gaps = [abs(math.remainder(a - b, math.pi)) for a, b in combinations(values, 2)]
        sep = min(gaps) if gaps else math.pi
        ok = sep > 1e-6
        details = {"angles": values, "grid": thetas, "mode": mode, "p": p}
        return CheckReport("map_Y", n, len(values), min([sep] + margins), tol, ok, details)
    raise ValueError(f"unknown mode {mode!r}")
