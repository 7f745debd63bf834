"""Dynamical certificates: the flow on boundary triples, the norm on the
line-bundle splitting and its contraction, singular-value gap growth,
crossratios and periods.

The flow at time t acts on R^2 with eigenvalues e^{±t}, so the boundary
point x0 moves by tan φ ↦ e^{-2t} tan φ in coordinates where x± are the axes.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from itertools import combinations

import mpmath
import numpy as np

from .atomic import csv_text, write_text
from .errors import CrossratioMismatch, DegeneratePairing, DegenerateSum, TooFewWords
from .flags import DIRECT_TOL, FlagChain, forced_intersection, subspace_sum
from .limit_curve import LOOKUP_GUARD, as_theta, circle_action, circle_distance, theta_line, wrap
from .reports import CheckReport
from .representations import SurfaceRep, word_spectrum
from .surface_group import Word, evaluate, evaluate_mp

TRIPLE_SEPARATION = 1e-8
GAP_THRESHOLD = 0.05
PAIRING_TOL = 1e-12


@dataclass(frozen=True)
class Triple:
    x_plus: float
    x_zero: float
    x_minus: float

    def __post_init__(self):
        pts = tuple(wrap(as_theta(v)) for v in (self.x_plus, self.x_zero, self.x_minus))
        for name, v in zip(("x_plus", "x_zero", "x_minus"), pts):
            object.__setattr__(self, name, v)
        for a, b in combinations(pts, 2):
            if circle_distance(a, b) <= TRIPLE_SEPARATION:
                raise ValueError("triple points must be pairwise distinct")
        # positive order: x0 lies on the arc running counterclockwise from x+ to x-
        if (pts[1] - pts[0]) % (2 * math.pi) >= (pts[2] - pts[0]) % (2 * math.pi):
            raise ValueError("triple is not positively ordered")

    def reversed(self) -> "Triple":
        """Swap x+ and x-; the orientation flips, so the check is skipped."""
        out = object.__new__(Triple)
        object.__setattr__(out, "x_plus", self.x_minus)
        object.__setattr__(out, "x_zero", self.x_zero)
        object.__setattr__(out, "x_minus", self.x_plus)
        return out


def flow_matrix(x_plus: float, x_minus: float, t: float) -> np.ndarray:
    """Hyperbolic element with attracting line x+, repelling x-, eigenvalues e^{±t}."""
    p = np.column_stack([theta_line(x_plus), theta_line(x_minus)])
    return p @ np.diag([math.exp(t), math.exp(-t)]) @ np.linalg.inv(p)


def flow(triple: Triple, t: float) -> Triple:
    """Move x0 along the leaf through the triple; x± stay fixed."""
    g = flow_matrix(triple.x_plus, triple.x_minus, t)
    out = object.__new__(Triple)
    object.__setattr__(out, "x_plus", triple.x_plus)
    object.__setattr__(out, "x_zero", circle_action(g, triple.x_zero))
    object.__setattr__(out, "x_minus", triple.x_minus)
    return out


# --- bundle norm -----------------------------------------------------------

def _lookup(curve, triple):
    flags = [curve.flag(x) for x in (triple.x_plus, triple.x_zero, triple.x_minus)]
    if hasattr(curve, "nearest"):
        idx = [curve.nearest(x)[0] for x in (triple.x_plus, triple.x_zero, triple.x_minus)]
        thetas = [curve.thetas[i] for i in idx]
        if len(set(idx)) < 3 or any(circle_distance(a, b) <= LOOKUP_GUARD for a, b in combinations(thetas, 2)):
            raise DegenerateSum("triple points fall on samples closer than the lookup guard")
    return flags


def splitting(f_plus: FlagChain, f_minus: FlagChain, tol: float = DIRECT_TOL):
    """Lines V^j = ξ^j(x+) ∩ ξ^{n-j+1}(x-) and forms α_j vanishing on
    ξ^{j-1}(x+) ⊕ ξ^{n-j}(x-), j = 1..n."""
    n = f_plus.ambient_dim
    lines, forms = [], []
    for j in range(1, n + 1):
        if j == 1:
            lines.append(f_plus.line())
        elif j == n:
            lines.append(f_minus.line())
        else:
            v, margin = forced_intersection(f_plus.level(j), f_minus.level(n - j + 1))
            if margin < tol:
                raise DegenerateSum(f"ξ^{j}(x+) and ξ^{n - j + 1}(x-) are not transverse (margin {margin:.3e})")
            lines.append(v.basis[:, 0])
        res = subspace_sum([f_plus.level(j - 1), f_minus.level(n - j)], tol)
        if not res.is_direct:
            raise DegenerateSum(f"ξ^{j - 1}(x+) + ξ^{n - j}(x-) is not direct (margin {res.margin:.3e})")
        kernel = np.hstack([f_plus.level(j - 1).basis, f_minus.level(n - j).basis])
        # unit form orthogonal to the kernel
        u, _, _ = np.linalg.svd(kernel, full_matrices=True)
        forms.append(u[:, -1])
    return np.column_stack(lines), np.array(forms)


def bundle_norm(curve, triple: Triple, i: int, phi_scale: float = 1.0, tol: float = DIRECT_TOL) -> float:
    """Norm at the triple of the generator φ: V^i → V^{i+1}, φ(u_i) = phi_scale·u_{i+1}.

    ‖φ‖ = phi_scale · |⟨α_i|u_i⟩ / ⟨α_{i+1}|u_{i+1}⟩| · |⟨α_{i+1}|z⟩ / ⟨α_i|z⟩|
    with z spanning ξ¹(x0): the ratio of the (i+1)-th to the i-th coordinate of
    z in the splitting.  It tends to 0 as x0 → x+, and every choice of
    representative u_j, α_j, z cancels.
    """
    f_plus, f_zero, f_minus = _lookup(curve, triple)
    n = f_plus.ambient_dim
    if not 1 <= i < n:
        raise ValueError(f"i must lie in 1..{n - 1}")
    lines, forms = splitting(f_plus, f_minus, tol)
    z = f_zero.line()
    a = forms[i - 1] @ lines[:, i - 1]
    b = forms[i] @ lines[:, i]
    zi, zj = forms[i - 1] @ z, forms[i] @ z
    if min(abs(a), abs(b), abs(zi), abs(zj)) < PAIRING_TOL:
        raise DegenerateSum("x0 lies on a splitting hyperplane")
    return float(phi_scale * abs(a / b) * abs(zj / zi))


def contraction_trace(curve, triple: Triple, i: int, times, min_decades: float = 1.0,
                      slack: float = 1e-9) -> CheckReport:
    """log ‖φ‖ along the flow line through the triple; passes iff strictly
    decreasing and the endpoints differ by at least min_decades."""
    times = [float(t) for t in times]
    if any(b <= a for a, b in zip(times, times[1:])):
        raise ValueError("times must be strictly increasing")
    logs, offsets = [], []
    for t in times:
        moved = flow(triple, t)
        logs.append(math.log(bundle_norm(curve, moved, i)))
        offsets.append(curve.offset(moved.x_zero))
    steps = -np.diff(logs)
    monotone = bool(np.all(steps > -slack)) if len(steps) else True
    drop = (logs[0] - logs[-1]) / math.log(10) if len(logs) > 1 else 0.0
    span_ok = drop >= min_decades
    details = {"times": times, "log_norms": logs, "lookup_offsets": offsets, "decades": drop,
               "min_decades": min_decades, "monotone": monotone, "i": i}
    if not span_ok:
        details["note"] = "insufficient span"
    worst = float(steps.min()) if len(steps) else 0.0
    return CheckReport("contraction", curve.n, len(times), worst, slack, monotone and span_ok, details)


def write_csv(path, header, rows) -> None:
    write_text(path, csv_text(header, rows))


def contraction_rows(report: CheckReport):
    return list(zip(report.details["times"], report.details["log_norms"]))


# --- gap growth ------------------------------------------------------------

@dataclass(frozen=True, eq=False)
class GapGrowth:
    per_root_slopes: np.ndarray
    intercepts: np.ndarray
    min_slope: float
    lengths: np.ndarray
    log_gaps: np.ndarray

    @property
    def spread(self) -> float:
        """(max - min) / max of the slopes; 0 when every root grows alike."""
        s = self.per_root_slopes
        return float((s.max() - s.min()) / s.max()) if s.max() > 0 else float("inf")

    @property
    def asymmetry(self) -> float:
        """Largest relative mismatch between the slopes of roots i and n-i."""
        s = self.per_root_slopes
        scale = np.abs(s).mean()
        return float(np.abs(s - s[::-1]).max() / scale) if scale > 0 else float("inf")

    def rows(self):
        """Mean log gap per word length: (word_len, gap_1, ..., gap_{n-1})."""
        out = []
        for ell in np.unique(self.lengths):
            out.append([int(ell)] + list(self.log_gaps[self.lengths == ell].mean(axis=0)))
        return out


def compound(m: np.ndarray, k: int) -> np.ndarray:
    """k-th exterior power: minors det m[I, J] over sorted k-subsets, batched."""
    m = np.asarray(m)
    n = m.shape[-1]
    subsets = list(combinations(range(n), k))
    rows = np.array(subsets)
    sub = m[..., rows[:, None, :, None], rows[None, :, None, :]]
    return np.linalg.det(sub)


def _log_singular_sums(words, rep: SurfaceRep) -> np.ndarray:
    """L[w, k] = log(σ_1 ··· σ_k) of ρ(w), k = 0..n, from top singular values of
    exterior powers (each accurate to relative roundoff, unlike σ_n itself)."""
    n = rep.n
    ngen = 2 * rep.genus
    gens = np.stack([rep.matrix(g, 1) for g in range(ngen)] + [rep.matrix(g, -1) for g in range(ngen)])
    out = np.zeros((len(words), n + 1))
    by_len = {}
    for idx, w in enumerate(words):
        by_len.setdefault(len(w), []).append(idx)
    for k in range(1, n):
        ck = compound(gens, k)
        for length, idx in by_len.items():
            codes = np.array([[g + (0 if e > 0 else ngen) for g, e in words[i].letters] for i in idx])
            prod = ck[codes[:, 0]]
            for pos in range(1, length):
                prod = prod @ ck[codes[:, pos]]
            out[idx, k] = np.log(np.linalg.norm(prod, ord=2, axis=(1, 2)))
    # log|det| is additive over letters; the assembled product would lose it
    logdet = [np.linalg.slogdet(rep.matrix(g, 1))[1] for g in range(ngen)]
    for i, w in enumerate(words):
        out[i, n] = sum(e * logdet[g] for g, e in w.letters)
    return out


def gap_growth(rep: SurfaceRep, words) -> GapGrowth:
    """Least-squares slope of log σ_i/σ_{i+1} against word length, per root."""
    words = [w for w in words if len(w) > 0]
    lengths = np.array([len(w) for w in words])
    if len(words) < 30 or len(np.unique(lengths)) < 4:
        raise TooFewWords(f"{len(words)} words over {len(np.unique(lengths))} lengths; need 30 over 4")
    sums = _log_singular_sums(words, rep)
    log_sv = np.diff(sums, axis=1)  # log σ_1, ..., log σ_n
    gaps = log_sv[:, :-1] - log_sv[:, 1:]
    slopes, intercepts = [], []
    for r in range(rep.n - 1):
        s, c = np.polyfit(lengths, gaps[:, r], 1)
        slopes.append(s)
        intercepts.append(c)
    slopes = np.array(slopes)
    return GapGrowth(slopes, np.array(intercepts), float(slopes.min()), lengths, gaps)


def gap_certificate(growth: GapGrowth, n: int, threshold: float = GAP_THRESHOLD) -> CheckReport:
    """Anosov proxy: every root's log-gap grows at least at rate threshold."""
    failing = [r + 1 for r, s in enumerate(growth.per_root_slopes) if s <= threshold]
    details = {"slopes": growth.per_root_slopes, "intercepts": growth.intercepts, "failing_roots": failing,
               "spread": growth.spread, "asymmetry": growth.asymmetry, "words": len(growth.lengths)}
    return CheckReport("gap_growth", n, len(growth.lengths), growth.min_slope, threshold, not failing, details)


# --- crossratio and period ---------------------------------------------------

def crossratio_flags(fx: FlagChain, fy: FlagChain, fz: FlagChain, ft: FlagChain) -> float:
    """(⟨φ_x, v_z⟩⟨φ_y, v_t⟩) / (⟨φ_x, v_t⟩⟨φ_y, v_z⟩), φ_p the form with kernel ξ^{n-1}(p)."""
    return crossratio_forms(fx.hyperplane_form(), fy.hyperplane_form(), fz.line(), ft.line())


def crossratio_forms(phx, phy, vz, vt) -> float:
    """The crossratio from two forms and two vectors; each may be rescaled freely."""
    vz, vt = vz / np.linalg.norm(vz), vt / np.linalg.norm(vt)
    phx, phy = phx / np.linalg.norm(phx), phy / np.linalg.norm(phy)
    pairs = (phx @ vz, phy @ vt, phx @ vt, phy @ vz)
    if min(abs(p) for p in pairs) < PAIRING_TOL:
        raise DegeneratePairing(f"vanishing pairing among {pairs}")
    return float(pairs[0] * pairs[1] / (pairs[2] * pairs[3]))


def crossratio(curve, x, y, z, t) -> float:
    return crossratio_flags(*(curve.flag(p) for p in (x, y, z, t)))


def _mp_crossratio_log(m, v, dps: int) -> float:
    """log|b(γ+, γ-, y, γy)| with the eigen-forms of m and the product m·v in
    dps-digit arithmetic."""
    n = m.rows
    with mpmath.workdps(dps):
        vals, right = mpmath.eig(m)
        left = mpmath.inverse(right)
        order = sorted(range(n), key=lambda k: -abs(vals[k]))
        # the form vanishing on ξ^{n-1}(γ+) is the left eigenvector of λ_min
        phi_plus = [left[order[-1], j] for j in range(n)]
        phi_minus = [left[order[0], j] for j in range(n)]
        vy = mpmath.matrix([float(x) for x in v])
        vgy = m * vy

        def pair(f, x):
            return mpmath.fsum(f[j] * x[j] for j in range(n))

        b = pair(phi_plus, vy) * pair(phi_minus, vgy) / (pair(phi_plus, vgy) * pair(phi_minus, vy))
        return float(mpmath.log(abs(b)))


def period_values(rep: SurfaceRep, w: Word, witnesses, curve, dps: int | None = 50) -> tuple:
    """(log λ_max/λ_min, [log|b(γ+, γ-, y, γy)| for each witness y]).

    The period comes from the double-precision spectrum of ρ(w).  With dps set,
    the crossratio side is evaluated in extended precision: its small pairing
    ⟨φ_{γ+}, v_{γy}⟩ has size about e^{-period}, so in double it carries a
    relative error near eps·e^{period} (1e-8 is lost around period 18).
    """
    data = word_spectrum(w, rep)
    value = float(data.log_moduli[0] - data.log_moduli[-1])
    logs = []
    if dps is not None:
        m = evaluate_mp(w, rep, dps)
        for y in witnesses:
            logs.append(_mp_crossratio_log(m, curve.flag(y).line(), dps))
        return value, logs
    f_plus = data.eigenflag
    f_minus = word_spectrum(w.inverse(), rep).eigenflag
    m = evaluate(w, rep)
    phi_plus, phi_minus = f_plus.hyperplane_form(), f_minus.hyperplane_form()
    for y in witnesses:
        v = curve.flag(y).line()
        logs.append(math.log(abs(crossratio_forms(phi_plus, phi_minus, v, m @ v))))
    return value, logs


def period(rep: SurfaceRep, w: Word, witnesses, curve, tol: float = 1e-8, dps: int | None = 50) -> float:
    """log(λ_max/λ_min) of ρ(w), cross-checked against the crossratio at each witness."""
    value, logs = period_values(rep, w, witnesses, curve, dps)
    for y, lb in zip(witnesses, logs):
        if abs(lb - value) >= tol:
            raise CrossratioMismatch(f"witness θ={as_theta(y):.6f}: log|b| = {lb:.12g} vs period {value:.12g}")
    return value
