"""Words over {a,b}, substitutions, limit words and tower statistics."""

from __future__ import annotations

from dataclasses import dataclass

from .errors import PrefixTooShort, Terminal, WindowTooShort


class Word:
    """Immutable finite word over the alphabet {a, b}."""

    __slots__ = ("_s",)

    def __init__(self, letters: str = ""):
        if letters.strip("ab"):
            raise ValueError("word letters must be 'a' or 'b'")
        self._s = letters

    def __len__(self) -> int:
        return len(self._s)

    def __iter__(self):
        return iter(self._s)

    def __getitem__(self, i):
        if isinstance(i, slice):
            return Word(self._s[i])
        return self._s[i]

    def __add__(self, other: "Word") -> "Word":
        return Word(self._s + other._s)

    def __mul__(self, k: int) -> "Word":
        return Word(self._s * k)

    def __eq__(self, other) -> bool:
        if isinstance(other, Word):
            return self._s == other._s
        if isinstance(other, str):
            return self._s == other
        return NotImplemented

    def __hash__(self) -> int:
        return hash(self._s)

    def __repr__(self) -> str:
        s = self._s if len(self._s) <= 40 else self._s[:37] + "..."
        return f"Word({s!r})"

    def __str__(self) -> str:
        return self._s

    def counts(self) -> tuple[int, int]:
        """(number of a's, number of b's)."""
        na = self._s.count("a")
        return na, len(self._s) - na

    def rotate(self, i: int) -> "Word":
        i %= max(len(self._s), 1)
        return Word(self._s[i:] + self._s[:i])

    def is_periodic_with(self, k: int) -> bool:
        return all(self._s[i] == self._s[i % k] for i in range(len(self._s)))


@dataclass(frozen=True)
class Substitution:
    """Morphism of the free monoid on {a, b}, given by the letter images."""

    image_a: Word
    image_b: Word

    def __post_init__(self):
        if len(self.image_a) == 0 or len(self.image_b) == 0:
            raise ValueError("substitution images must be nonempty")

    def __call__(self, w: Word) -> Word:
        table = {"a": str(self.image_a), "b": str(self.image_b)}
        return Word("".join(table[c] for c in w))

    def abelianization(self) -> tuple[int, int, int, int]:
        """(m11, m12, m21, m22): column j counts letters in image of letter j."""
        a_in_a, b_in_a = self.image_a.counts()
        a_in_b, b_in_b = self.image_b.counts()
        return a_in_a, a_in_b, b_in_a, b_in_b


IDENTITY = Substitution(Word("a"), Word("b"))


def apply(s: Substitution, w: Word) -> Word:
    return s(w)


def compose(s1: Substitution, s2: Substitution) -> Substitution:
    """s1 after s2: (s1*s2)(w) = s1(s2(w))."""
    return Substitution(s1(s2.image_a), s1(s2.image_b))


def complexity(w: Word, n: int) -> int:
    """Number of distinct length-n factors of w."""
    if len(w) < 20 * n:
        raise WindowTooShort(f"need |w| >= {20 * n} for factor length {n}")
    s = str(w)
    return len({s[i : i + n] for i in range(len(s) - n + 1)})


@dataclass(frozen=True)
class TowerStats:
    l: int
    N_a: int
    N_b: int
    N: int
    alpha: float
    beta: float

    def csv_row(self) -> str:
        return f"{self.l},{self.N_a},{self.N_b},{self.N},{self.alpha!r},{self.beta!r}"


def _accel_substitutions(p, depth: int) -> list[Substitution]:
    from .cfrac import accel, param_to_x

    subs = []
    x = param_to_x(p)
    for _ in range(depth):
        step = accel(x)
        subs.append(step.sigma_bold)
        x = step.y
    return subs


def limit_word(p, length: int, depth: int | None = None) -> Word:
    """Length-`length` prefix of the limit word of the substitution sequence.

    The word is the limit of sigma_0 ∘ ... ∘ sigma_l applied to `a`,
    using the accelerated substitution at each expansion step; every
    image of `a` starts with `a`, so prefixes stabilize.
    """
    from .cfrac import accel, param_to_x

    x = param_to_x(p)
    if depth is None:
        depth = 4 * length  # safety cap; growth makes far fewer needed
    subs = []
    grew = 0
    for _ in range(depth):
        step = accel(x)  # raises Terminal at rational ends
        subs.append(step.sigma_bold)
        x = step.y
        # enough depth once the innermost seed expands past `length`
        w = Word("a")
        for s in reversed(subs):
            w = s(w)
            if len(w) >= length:
                break
        if len(w) >= length:
            return w[:length]
        if len(w) == grew:
            continue
        grew = len(w)
    raise Terminal(f"expansion too short to generate {length} letters")


def _block_words(p, l: int) -> tuple[Word, Word]:
    """Depth-l images of a and b under the composed accelerated substitution."""
    subs = _accel_substitutions(p, l)
    wa, wb = Word("a"), Word("b")
    for s in reversed(subs):
        wa, wb = s(wa), s(wb)
    return wa, wb


def tower_stats(p, l: int, prefix_len: int) -> TowerStats:
    """Column sums of the depth-l cocycle matrix and empirical block measures.

    alpha (beta) is the count of depth-l a-blocks (b-blocks) per letter in
    a generated prefix of the limit word, decomposed along block boundaries
    known from generation.
    """
    # block lengths are the column sums of the depth-l cocycle matrix;
    # the blocks themselves are never needed, and can be astronomically long
    from .lyap import cocycle_product

    M, _ = cocycle_product(p, l)
    N_a, N_b = M.m11 + M.m21, M.m12 + M.m22
    N = N_a + N_b
    # decompose a prefix of the limit word into depth-l blocks: the level-l
    # coding is itself a limit word of the shifted parameter sequence
    from .cfrac import accel, param_to_x

    x = param_to_x(p)
    for _ in range(l + 1):  # the depth-l product composes factors 0..l
        x = accel(x).y
    deep = limit_word_x(x, max(prefix_len // min(N_a, N_b) + 2, 200))
    blocks_a = blocks_b = letters = 0
    for c in deep:
        if letters >= prefix_len:
            break
        if c == "a":
            blocks_a += 1
            letters += N_a
        else:
            blocks_b += 1
            letters += N_b
    if blocks_a + blocks_b < 100:
        raise PrefixTooShort(
            f"only {blocks_a + blocks_b} blocks decompose; raise prefix_len"
        )
    alpha = blocks_a / letters
    beta = blocks_b / letters
    return TowerStats(l, N_a, N_b, N, alpha, beta)


def limit_word_x(x, length: int) -> Word:
    """Limit-word prefix for a parameter given in interval form."""
    from .cfrac import accel

    subs = []
    for _ in range(4 * length):
        step = accel(x)
        subs.append(step.sigma_bold)
        x = step.y
        w = Word("a")
        for s in reversed(subs):
            w = s(w)
            if len(w) >= length:
                break
        if len(w) >= length:
            return w[:length]
    raise Terminal(f"expansion too short to generate {length} letters")


def letter_frequency(p, l: int) -> float:
    """Depth-l approximation of the frequency of `a` in the limit word."""
    from .lyap import cocycle_product

    M, _ = cocycle_product(p, l)
    va = M.m11 + M.m21  # M (1,0)^t entries summed
    return M.m11 / va if va else 0.0
