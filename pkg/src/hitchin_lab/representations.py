"""Fuchsian base group, the irreducible embedding into SL(n,R), bending, and
per-element spectral certificates.

Matrices of the irreducible representation are written in the orthonormal
basis sqrt(C(n-1,k)) s^(n-1-k) t^k of degree n-1 binary forms, so that
rotations act orthogonally and singular values of ι(g) are exact powers of
those of g.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import cached_property
from math import comb

import numpy as np

from .errors import ComplexSpectrum, DegenerateGap, NotLoxodromic, NotUnimodular
from .flags import FlagChain, orthonormalize
from .reports import CheckReport
from .surface_group import Word, ball, commutator, cyclic_reduction, evaluate, evaluate_exact, surface_relator

EIGEN_GAP_TOL = 1e-6
RELATION_TOL = 1e-8


def projective_residual(m: np.ndarray) -> float:
    """Entrywise distance of m from the identity in PSL (compares against +-I)."""
    eye = np.eye(m.shape[0])
    return float(min(np.abs(m - eye).max(), np.abs(m + eye).max()))


def projective_distance(a: np.ndarray, b: np.ndarray) -> float:
    return float(min(np.abs(a - b).max(), np.abs(a + b).max()))


@dataclass(frozen=True, eq=False)
class SurfaceRep:
    """Generator-to-matrix assignment for the genus-g surface group."""

    genus: int
    n: int
    generators: tuple

    def __post_init__(self):
        gens = tuple(np.array(g, dtype=float) for g in self.generators)
        if len(gens) != 2 * self.genus:
            raise ValueError(f"need {2 * self.genus} generators, got {len(gens)}")
        for g in gens:
            if g.shape != (self.n, self.n):
                raise ValueError(f"generator of shape {g.shape}, expected {(self.n, self.n)}")
            g.setflags(write=False)
        object.__setattr__(self, "generators", gens)

    @cached_property
    def inverses(self) -> tuple:
        return tuple(np.linalg.inv(g) for g in self.generators)

    def matrix(self, gen: int, exp: int = 1) -> np.ndarray:
        return self.generators[gen] if exp > 0 else self.inverses[gen]

    @cached_property
    def relation_residual(self) -> float:
        """Balanced projective residual of the surface relation.

        The relator is split as L R^-1 with L the first half of the commutators;
        the value is min ||L -+ R|| / ||L|| (max norms), products taken in
        extended precision.  Evaluating the full relator against I instead
        measures the conditioning of its partial products times the rounding of
        the stored entries, which exceeds 1e-8 already at n = 5.
        """
        letters = surface_relator(self.genus).letters
        half = 4 * ((self.genus + 1) // 2)
        left = evaluate_exact(Word(letters[:half]), self)
        right = evaluate_exact(Word(letters[half:]).inverse(), self)
        return projective_distance(left, right) / float(np.abs(left).max())

    def to_json(self) -> dict:
        names = [f"{'ab'[i % 2]}{i // 2 + 1}" for i in range(2 * self.genus)]
        return {
            "genus": self.genus,
            "n": self.n,
            "generators": {name: g.tolist() for name, g in zip(names, self.generators)},
            "relation_residual": self.relation_residual,
        }

    @classmethod
    def from_json(cls, data: dict) -> "SurfaceRep":
        genus = int(data["genus"])
        names = [f"{'ab'[i % 2]}{i // 2 + 1}" for i in range(2 * genus)]
        return cls(genus, int(data["n"]), tuple(np.array(data["generators"][k]) for k in names))


@dataclass(frozen=True, eq=False)
class LoxodromicData:
    """Real simple spectrum sorted by decreasing modulus, with the attracting flag."""

    eigenvalues: np.ndarray
    log_moduli: np.ndarray
    min_gap: float
    eigenflag: FlagChain

    @property
    def log_gaps(self) -> np.ndarray:
        return -np.diff(self.log_moduli)


# --- SL(2,R) and the irreducible embedding ---------------------------------

def _monomial_sym_power(n: int, m: np.ndarray) -> np.ndarray:
    """Sym^(n-1) of m on the monomial basis s^(n-1-k) t^k (s <-> e1, t <-> e2)."""
    d = n - 1
    col_s = np.array([m[0, 0], m[1, 0]])  # image of s, as coefficients of (s, t)
    col_t = np.array([m[0, 1], m[1, 1]])
    out = np.zeros((n, n))
    for k in range(n):
        poly = np.array([1.0])
        for _ in range(d - k):
            poly = np.convolve(poly, col_s)
        for _ in range(k):
            poly = np.convolve(poly, col_t)
        out[:, k] = poly
    return out


def binomial_scaling(n: int) -> np.ndarray:
    """sqrt(C(n-1,k)): monomial coordinates = scaling * orthonormal coordinates."""
    return np.sqrt([comb(n - 1, k) for k in range(n)])


def sym_power(n: int, m) -> np.ndarray:
    """The n-dimensional irreducible representation of SL(2,R) applied to m."""
    m = np.asarray(m, dtype=float)
    if n < 2:
        raise ValueError("n must be at least 2")
    if m.shape != (2, 2) or abs(np.linalg.det(m) - 1.0) >= 1e-10:
        raise NotUnimodular(f"det = {np.linalg.det(m) if m.shape == (2, 2) else 'n/a'}")
    if n == 2:
        return m.copy()
    scale = binomial_scaling(n)
    return _monomial_sym_power(n, m) * scale[None, :] / scale[:, None]


def rotation(theta: float) -> np.ndarray:
    """Rotation by theta about i; acts on the doubled-angle circle by +theta."""
    c, s = np.cos(theta / 2), np.sin(theta / 2)
    return np.array([[c, -s], [s, c]])


def translation(length: float) -> np.ndarray:
    """Hyperbolic translation of the given length along the axis through i."""
    return np.diag([np.exp(length / 2), np.exp(-length / 2)])


OCTAGON_SIDES = 8
# cosh of the inradius of the regular octagon with interior angles 2π/8
OCTAGON_COSH_INRADIUS = 1 + np.sqrt(2)


def side_pairing(source: int, target: int) -> np.ndarray:
    """Isometry taking octagon side `source` onto side `target`, interior to exterior."""
    inradius = np.arccosh(OCTAGON_COSH_INRADIUS)
    step = 2 * np.pi / OCTAGON_SIDES
    return rotation(target * step) @ translation(2 * inradius) @ rotation(np.pi - source * step)


def fuchsian_genus2() -> SurfaceRep:
    """Regular octagon surface group with boundary word a1 b1 A1 B1 a2 b2 A2 B2."""
    gens = (
        side_pairing(2, 0),  # a1
        side_pairing(1, 3),  # b1
        side_pairing(6, 4),  # a2
        side_pairing(5, 7),  # b2
    )
    return SurfaceRep(2, 2, gens)


def compose_irreducible(n: int, base: SurfaceRep) -> SurfaceRep:
    if base.n != 2:
        raise ValueError("base representation must be 2-dimensional")
    return SurfaceRep(base.genus, n, tuple(sym_power(n, g) for g in base.generators))


def bend(rep: SurfaceRep, tau) -> SurfaceRep:
    """Conjugate the generators past the first handle by exp of a diagonal in the
    eigenbasis of ρ([a1, b1]); the relation is preserved identically."""
    tau = np.asarray(tau, dtype=float)
    if tau.shape != (rep.n - 1,):
        raise ValueError(f"tau must have {rep.n - 1} entries")
    c = evaluate(commutator(0, 1), rep)
    check_purely_loxodromic(c)
    vals, vecs = np.linalg.eig(c)
    order = np.argsort(-np.abs(vals), kind="stable")
    p = vecs[:, order].real
    d = np.append(tau, -tau.sum())
    twist = p @ np.diag(np.exp(d)) @ np.linalg.inv(p)
    untwist = p @ np.diag(np.exp(-d)) @ np.linalg.inv(p)
    gens = list(rep.generators)
    for k in range(2, 2 * rep.genus):
        gens[k] = twist @ gens[k] @ untwist
    return SurfaceRep(rep.genus, rep.n, tuple(gens))


def random_rotation_rep(n: int, genus: int = 2, seed: int = 0) -> SurfaceRep:
    """Haar-random SO(n) generators: a deliberately broken (non-Anosov) rep."""
    rng = np.random.default_rng(seed)
    gens = []
    for _ in range(2 * genus):
        q, r = np.linalg.qr(rng.standard_normal((n, n)))
        q = q * np.sign(np.diag(r))
        if np.linalg.det(q) < 0:
            q[:, 0] = -q[:, 0]
        gens.append(q)
    return SurfaceRep(genus, n, tuple(gens))


# --- spectra of products ----------------------------------------------------

def _positive_qr(z):
    q, r = np.linalg.qr(z)
    d = np.diagonal(r, axis1=-2, axis2=-1)
    s = np.where(d < 0, -1.0, 1.0)
    return q * s[..., None, :], np.abs(d)


def _warm_frame(m):
    """Eigenvector frame sorted by decreasing |λ| (real parts), batched."""
    vals, vecs = np.linalg.eig(m)
    order = np.argsort(-np.abs(vals), axis=-1, kind="stable")
    vecs = np.take_along_axis(vecs, order[..., None, :], axis=-1).real
    vals = np.take_along_axis(vals, order, axis=-1)
    eye = np.eye(m.shape[-1])
    # guard against a singular warm start (complex pairs give dependent real parts)
    q, _ = np.linalg.qr(vecs + 1e-9 * eye)
    return q, vals


def periodic_schur(factors: np.ndarray, max_periods: int = 200, tol: float = 1e-13):
    """Simultaneous iteration on the product F_0 F_1 ... F_{L-1}, one factor at a time.

    factors has shape (B, L, n, n).  Returns (Q, log_moduli, signs, converged, vals)
    where Q[b] is the Schur frame of product b (column k spans the k-th eigen
    direction modulo the previous ones), log_moduli the log |λ| read from the
    triangular factors, signs the eigenvalue signs and vals the raw eigenvalues
    of the assembled product used for the warm start.
    """
    factors = np.asarray(factors, dtype=float)
    batch, length, n, _ = factors.shape
    prod = np.broadcast_to(np.eye(n), (batch, n, n)).copy()
    for j in range(length):
        prod = prod @ factors[:, j]
    q, vals = _warm_frame(prod)
    converged = np.zeros(batch, dtype=bool)
    logs = np.zeros((batch, n))
    signs = np.ones((batch, n))
    active = np.arange(batch)
    for period in range(max_periods):
        qa = q[active]
        q0 = qa
        la = np.zeros((len(active), n))
        for j in reversed(range(length)):
            qa, d = _positive_qr(factors[active, j] @ qa)
            la += np.log(d)
        dots = np.einsum("bij,bij->bj", qa, q0)
        sa = np.where(dots < 0, -1.0, 1.0)
        change = np.abs(qa - q0 * sa[:, None, :]).max(axis=(1, 2))
        # once the predicted contraction rate^periods is negligible, what is
        # left of the change is roundoff, bounded by the factors' conditioning
        rate = np.exp(-np.min(-np.diff(la, axis=1), axis=1)) if n > 1 else np.zeros(len(active))
        at_floor = (change < 1e-6) & (rate < 1) & (rate ** (period + 1) < 1e-13)
        done = (change < tol) | at_floor
        q[active], logs[active], signs[active] = qa, la, sa
        converged[active[done]] = True
        active = active[~done]
        if active.size == 0:
            break
    return q, logs, signs, converged, vals


def _classify(vals, logs, signs, q, converged, gap_tol):
    n = q.shape[0]
    rho = np.abs(vals).max()
    if not converged:
        if np.any(np.abs(vals.imag) > 1e-8 * rho):
            raise ComplexSpectrum(f"complex eigenvalues {vals}")
        mods = np.sort(np.abs(vals))[::-1]
        ratio = float((mods[:-1] / np.maximum(mods[1:], 1e-300)).min())
        raise DegenerateGap(f"eigen directions did not separate (ratio {ratio:.3e})", ratio)
    # a converged Schur frame with separated moduli forces a real spectrum
    gaps = np.expm1(-np.diff(logs))
    if np.any(gaps < gap_tol):
        ratio = float(1 + gaps.min())
        raise DegenerateGap(f"eigenvalue modulus ratio {ratio:.9f} below 1 + {gap_tol}", ratio)
    return LoxodromicData(
        eigenvalues=signs * np.exp(logs),
        log_moduli=logs.copy(),
        min_gap=float(gaps.min()),
        eigenflag=FlagChain.from_frame(q),
    )


def check_purely_loxodromic(m, gap_tol: float = EIGEN_GAP_TOL) -> LoxodromicData:
    """Real simple spectrum with consecutive modulus ratios >= 1 + gap_tol."""
    m = np.asarray(m, dtype=float)
    _, logdet = np.linalg.slogdet(m)
    # determinant of an ill-conditioned product is only known to about eps * cond
    if abs(logdet) > 1e-8 + 1e-15 * np.linalg.cond(m):
        raise NotUnimodular(f"|det| = {np.exp(logdet)}")
    return check_product_loxodromic([m], gap_tol)


def check_product_loxodromic(factors, gap_tol: float = EIGEN_GAP_TOL) -> LoxodromicData:
    """As check_purely_loxodromic for the product of factors, without forming it first."""
    q, logs, signs, conv, vals = periodic_schur(np.asarray(factors)[None])
    return _classify(vals[0], logs[0], signs[0], q[0], conv[0], gap_tol)


def word_spectrum(w: Word, rep: SurfaceRep, gap_tol: float = EIGEN_GAP_TOL) -> LoxodromicData:
    """Spectrum and attracting flag of ρ(w), computed factor by factor."""
    result = word_spectra([w], rep, gap_tol)[0]
    if isinstance(result, Exception):
        raise result
    return result


def _generator_stack(rep):
    ngen = 2 * rep.genus
    stack = np.stack([rep.matrix(g, 1) for g in range(ngen)] + [rep.matrix(g, -1) for g in range(ngen)])
    return stack, ngen


def _codes(letters, ngen):
    return [g + (0 if e > 0 else ngen) for g, e in letters]


def word_spectra(words, rep: SurfaceRep, gap_tol: float = EIGEN_GAP_TOL, chunk: int = 4096) -> list:
    """word_spectrum over many words; failures come back as exception instances.

    A word u c u^-1 is handled through its cyclically reduced core c: the
    spectrum is that of c and the flag is ρ(u) applied to the flag of c, which
    avoids iterating on the badly non-normal conjugated product.
    """
    words = list(words)
    out = [None] * len(words)
    stack, ngen = _generator_stack(rep)
    split = [cyclic_reduction(w) for w in words]
    by_len = {}
    for i, (_, core) in enumerate(split):
        by_len.setdefault(len(core), []).append(i)
    frames = {}
    for length, idx in sorted(by_len.items()):
        if length == 0:
            for i in idx:
                out[i] = NotLoxodromic("the identity is not loxodromic")
            continue
        codes = np.array([_codes(split[i][1].letters, ngen) for i in idx])
        for start in range(0, len(idx), chunk):
            q, logs, signs, conv, vals = periodic_schur(stack[codes[start:start + chunk]])
            for k, i in enumerate(idx[start:start + chunk]):
                try:
                    out[i] = _classify(vals[k], logs[k], signs[k], q[k], conv[k], gap_tol)
                    frames[i] = q[k]
                except NotLoxodromic as exc:
                    out[i] = exc
    # transport core flags by the conjugating prefix, batched by prefix length
    by_prefix = {}
    for i in frames:
        if len(split[i][0]):
            by_prefix.setdefault(len(split[i][0]), []).append(i)
    for length, idx in by_prefix.items():
        q = np.stack([frames[i] for i in idx])
        codes = np.array([_codes(split[i][0].letters, ngen) for i in idx])
        for pos in reversed(range(length)):
            q, _ = _positive_qr(stack[codes[:, pos]] @ q)
        for k, i in enumerate(idx):
            data = out[i]
            out[i] = LoxodromicData(data.eigenvalues, data.log_moduli, data.min_gap, FlagChain.from_frame(q[k]))
    return out


def is_relation_trivial(w: Word, base: SurfaceRep, tol: float = 1e-8) -> bool:
    """Numerical word problem through the faithful base representation."""
    return projective_residual(evaluate(w, base)) < tol * max(1.0, len(w))


# --- irreducibility ---------------------------------------------------------

def check_irreducible(rep: SurfaceRep, depth: int, rtol: float = 1e-10) -> CheckReport:
    """Burnside test: ρ(ball) together with I spans all n x n matrices."""
    if depth < 2:
        raise ValueError("depth must be at least 2")
    mats = [np.eye(rep.n)] + [evaluate(w, rep) for w in ball(rep.genus, depth)]
    rows = np.array([m.ravel() / np.linalg.norm(m) for m in mats])
    s = np.linalg.svd(rows, compute_uv=False)
    rank = int(np.sum(s > rtol * s[0]))
    full = rep.n ** 2
    margin = float(s[full - 1] / s[0]) if len(s) >= full else 0.0
    return CheckReport(
        check="irreducible", n=rep.n, tuples=len(mats), worst_margin=margin,
        tolerance=rtol, passed=rank == full, details={"rank": rank, "full_rank": full, "depth": depth},
    )

