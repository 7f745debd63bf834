"""Words in the genus-g surface group, treated as elements of the free group.

Generators are indexed 0..2g-1 in the order a1, b1, a2, b2, ...; a letter is a
pair (generator index, exponent +-1).  The surface relation is never used for
rewriting.
"""

from __future__ import annotations

from dataclasses import dataclass

import mpmath
import numpy as np

from .errors import BallTooLarge

BALL_CAP = 200_000


def generator_name(index: int) -> str:
    return f"{'ab'[index % 2]}{index // 2 + 1}"


@dataclass(frozen=True)
class Word:
    letters: tuple = ()

    def __post_init__(self):
        object.__setattr__(self, "letters", tuple((int(g), int(e)) for g, e in self.letters))
        for g, e in self.letters:
            if e not in (1, -1) or g < 0:
                raise ValueError(f"bad letter {(g, e)}")

    @classmethod
    def parse(cls, text: str) -> "Word":
        """Parse `a1 b1 A1 B1 ...`; capitals are inverses, `e` or empty is the identity."""
        letters = []
        for tok in text.split():
            if tok in ("e", "1"):
                continue
            kind, idx = tok[0], int(tok[1:])
            if kind.lower() not in "ab" or idx < 1:
                raise ValueError(f"bad token {tok!r}")
            gen = 2 * (idx - 1) + (kind.lower() == "b")
            letters.append((gen, -1 if kind.isupper() else 1))
        return cls(tuple(letters))

    def __str__(self):
        if not self.letters:
            return "e"
        out = []
        for g, e in self.letters:
            name = generator_name(g)
            out.append(name.upper() if e < 0 else name)
        return " ".join(out)

    def __len__(self):
        return len(self.letters)

    def __mul__(self, other: "Word") -> "Word":
        return reduce_word(self.letters + other.letters)

    def __pow__(self, k: int) -> "Word":
        base = self if k >= 0 else self.inverse()
        return reduce_word(base.letters * abs(k))

    def inverse(self) -> "Word":
        return Word(tuple((g, -e) for g, e in reversed(self.letters)))

    def conjugate(self, u: "Word") -> "Word":
        """u w u^-1."""
        return reduce_word(u.letters + self.letters + u.inverse().letters)

    @property
    def is_reduced(self) -> bool:
        return all(a[0] != b[0] or a[1] != -b[1] for a, b in zip(self.letters, self.letters[1:]))

    def max_generator(self) -> int:
        return max((g for g, _ in self.letters), default=-1)


def reduce_word(w) -> Word:
    """Free reduction by a single left-to-right stack pass."""
    letters = w.letters if isinstance(w, Word) else tuple(w)
    stack = []
    for g, e in letters:
        if stack and stack[-1][0] == g and stack[-1][1] == -e:
            stack.pop()
        else:
            stack.append((g, e))
    return Word(tuple(stack))


def commutator(i: int, j: int) -> Word:
    """[x_i, x_j] = x_i x_j x_i^-1 x_j^-1."""
    return Word(((i, 1), (j, 1), (i, -1), (j, -1)))


def surface_relator(genus: int) -> Word:
    letters = ()
    for k in range(genus):
        letters += commutator(2 * k, 2 * k + 1).letters
    return Word(letters)


def _alphabet(genus: int):
    return [(g, e) for g in range(2 * genus) for e in (1, -1)]


def ball_size(genus: int, radius: int) -> int:
    m = 4 * genus
    return sum(m * (m - 1) ** (r - 1) for r in range(1, radius + 1))


@dataclass(frozen=True)
class Ball:
    radius: int
    words: tuple

    def __len__(self):
        return len(self.words)

    def __iter__(self):
        return iter(self.words)

    def of_length(self, r: int):
        return [w for w in self.words if len(w) == r]


def ball(genus: int, radius: int, cap: int = BALL_CAP) -> Ball:
    """All nonempty reduced words of length <= radius, by length then letter order."""
    if genus < 2:
        raise ValueError("genus must be at least 2")
    if radius < 1:
        raise ValueError("radius must be at least 1")
    size = ball_size(genus, radius)
    if size > cap:
        raise BallTooLarge(f"ball of radius {radius} has {size} words (cap {cap}); use sample_words")
    alphabet = _alphabet(genus)
    layer = [(a,) for a in alphabet]
    words = list(layer)
    for _ in range(radius - 1):
        layer = [w + (a,) for w in layer for a in alphabet if not (a[0] == w[-1][0] and a[1] == -w[-1][1])]
        words.extend(layer)
    return Ball(radius, tuple(Word(w) for w in words))


def sample_words(genus: int, length: int, count: int, seed: int = 0) -> list:
    """Uniform sample (with replacement) of reduced words of a fixed length."""
    if length < 1:
        raise ValueError("length must be at least 1")
    rng = np.random.default_rng(seed)
    alphabet = _alphabet(genus)
    m = len(alphabet)
    out = []
    for _ in range(count):
        idx = [int(rng.integers(m))]
        for _ in range(length - 1):
            prev = alphabet[idx[-1]]
            forbidden = alphabet.index((prev[0], -prev[1]))
            k = int(rng.integers(m - 1))
            idx.append(k if k < forbidden else k + 1)
        out.append(Word(tuple(alphabet[i] for i in idx)))
    return out


def cyclic_reduction(w: Word) -> tuple[Word, Word]:
    """Split w = u c u^-1 with c cyclically reduced; returns (u, c)."""
    letters = reduce_word(w).letters
    i, j = 0, len(letters) - 1
    while i < j and letters[i][0] == letters[j][0] and letters[i][1] == -letters[j][1]:
        i += 1
        j -= 1
    return Word(letters[:i]), Word(letters[i:j + 1])


def primitive_root(w: Word) -> tuple[Word, int]:
    """(r, k) with w = r^k in the free group and k maximal."""
    u, c = cyclic_reduction(w)
    m = len(c)
    for p in range(1, m + 1):
        if m % p == 0 and c.letters == c.letters[:p] * (m // p):
            return Word(u.letters + c.letters[:p] + u.inverse().letters), m // p
    return w, 1


def is_proper_power(w: Word) -> bool:
    return len(w) > 0 and primitive_root(w)[1] > 1


def evaluate(w: Word, rep) -> np.ndarray:
    """Ordered product of generator matrices and their inverses."""
    out = np.eye(rep.n)
    for g, e in w.letters:
        out = out @ rep.matrix(g, e)
    return out


def evaluate_many(words, rep) -> np.ndarray:
    """Stack of evaluate(w, rep) for words of arbitrary lengths."""
    words = list(words)
    out = np.empty((len(words), rep.n, rep.n))
    for i, w in enumerate(words):
        out[i] = evaluate(w, rep)
    return out


def evaluate_mp(w: Word, rep, dps: int = 50):
    """evaluate() as an mpmath matrix at dps digits; inverses are exact
    inverses of the stored generators."""
    with mpmath.workdps(dps):
        out = mpmath.eye(rep.n)
        cache = {}
        for g, e in w.letters:
            if (g, e) not in cache:
                m = mpmath.matrix(rep.matrix(g, 1).tolist())
                cache[(g, e)] = m if e > 0 else mpmath.inverse(m)
            out = out * cache[(g, e)]
        return out


def evaluate_exact(w: Word, rep, dps: int = 50) -> np.ndarray:
    """evaluate() carried out in extended precision, rounded to float at the end.

    Long products of large-norm matrices lose most of their digits in double
    precision; this is what relation residuals are measured with.
    """
    with mpmath.workdps(dps):
        return np.array(evaluate_mp(w, rep, dps).tolist(), dtype=float)
