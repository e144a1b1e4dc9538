"""Young diagrams, diagram tuples and asymptotic boundary profiles.

An asymptotic quadrant subset with two semi-infinite boundary strips is
encoded by its two strip fluxes plus a finite remainder diagram sitting
at the staircase corner; ``assemble``/``regularize`` convert between that
profile and the character numerator over P = (1-q1)(1-q2).
"""

from dataclasses import dataclass
from fractions import Fraction

from .charalg import CharacterPolynomial, GeneratorSet, InexactDivision


class NotAStaircase(ValueError):
    """Raised when strip data does not regularize to a Young diagram."""


def validate_diagram(rows):
    rows = tuple(int(r) for r in rows)
    if any(r <= 0 for r in rows):
        raise ValueError("diagram rows must be positive")
    if any(rows[i] < rows[i + 1] for i in range(len(rows) - 1)):
        raise ValueError("diagram rows must be weakly decreasing")
    return rows


def diagram_size(rows):
    return sum(rows)


def diagram_boxes(rows):
    """Zero-indexed (column, row) boxes."""
    return [(a, b) for b, r in enumerate(rows) for a in range(r)]


def diagram_character(rows, gens, axis1, axis2):
    """Character sum of q1^(a-1) q2^(b-1) over the boxes, with the two
    axis monomials given as doubled exponent vectors."""
    rows = validate_diagram(rows)
    terms = {}
    for a, b in diagram_boxes(rows):
        m = gens.reduce(tuple(a * x + b * y for x, y in zip(axis1, axis2)))
        terms[m] = terms.get(m, 0) + Fraction(1)
    return CharacterPolynomial(gens, terms, _reduced=True)


def partitions_of(n, max_part=None):
    """All partitions of n with parts bounded by max_part, largest part
    first, in reverse-lexicographic order."""
    if max_part is None:
        max_part = n
    if n == 0:
        yield ()
        return
    for first in range(min(n, max_part), 0, -1):
        for rest in partitions_of(n - first, first):
            yield (first,) + rest


def partitions_upto(n):
    """All partitions with at most n boxes, ordered by (size, revlex)."""
    for s in range(n + 1):
        yield from partitions_of(s)


def partition_count(n):
    """Number of partitions of n (Euler recurrence)."""
    table = [1] + [0] * n
    for part in range(1, n + 1):
        for s in range(part, n + 1):
            table[s] += table[s - part]
    return table[n]


@dataclass(frozen=True)
class AsymptoticProfile:
    """Boundary fluxes of the two strips plus the finite remainder."""

    flux1: int
    flux2: int
    remainder: tuple

    def __post_init__(self):
        if self.flux1 < 0 or self.flux2 < 0:
            raise ValueError("boundary fluxes must be nonnegative")
        object.__setattr__(self, "remainder", validate_diagram(self.remainder))

    def box_set(self, bound):
        """All boxes inside a bound x bound window: the L-shaped hook of
        the two strips plus the remainder shifted to the corner."""
        boxes = set()
        for a in range(bound):
            for b in range(bound):
                if a < self.flux2 or b < self.flux1:
                    boxes.add((a, b))
        for a, b in diagram_boxes(self.remainder):
            if a + self.flux2 < bound and b + self.flux1 < bound:
                boxes.add((a + self.flux2, b + self.flux1))
        return boxes


def _plane_gens():
    return GeneratorSet(names=("q1", "q2"))


PLANE = _plane_gens()
_Q1 = (2, 0)
_Q2 = (0, 2)


def _axis_poly(axis, power, gens=PLANE):
    return CharacterPolynomial(gens, {tuple(power * x for x in axis): Fraction(1)})


@dataclass(frozen=True)
class AsymptoticCharacter:
    """Character of an infinite staircase, stored as numerator / P with
    P = (1-q1)(1-q2) over the two-generator plane set."""

    numerator: CharacterPolynomial

    @classmethod
    def from_strips(cls, flux1, flux2, remainder=()):
        """Build from the two boundary strips and a remainder block at the
        staircase corner: strip of height flux1 along axis 1, strip of
        width flux2 along axis 2, block shifted by q1^flux2 q2^flux1."""
        return assemble(AsymptoticProfile(flux1, flux2, tuple(remainder)))

    def strip_flux(self, axis):
        """(1-q_axis) * character, evaluated at q_axis -> 1: the constant
        column (or row) count of the far strip."""
        gens = self.numerator.gens
        other = 1 - axis
        # numerator(q_axis=1) / (1 - q_other)
        collapsed = {}
        for m, c in self.numerator.terms.items():
            key = m[other]
            collapsed[key] = collapsed.get(key, 0) + c
        profile = _exact_div_one_minus(collapsed)
        if profile is None or any(c != 1 for c in profile.values()):
            raise NotAStaircase("strip profile is not a unit interval")
        if profile and sorted(profile) != list(range(0, max(profile) + 2, 2)):
            raise NotAStaircase("strip profile has gaps")
        return len(profile)


def _exact_div_one_minus(coeffs):
    """Divide sum c_k q^(k/2) (doubled keys) by (1 - q); None if inexact."""
    if not coeffs:
        return {}
    if min(coeffs) < 0 or any(k % 2 for k in coeffs):
        return None
    hi = max(coeffs)
    out = {}
    running = Fraction(0)
    for k in range(0, hi + 2, 2):
        running += coeffs.get(k, 0)
        if k <= hi - 2 and running:
            out[k] = running
    if running:
        return None
    return out


def assemble(profile):
    """Character numerator of the staircase with the given profile:
    N = (1 - shift) + shift * ch(remainder) * P."""
    gens = PLANE
    shift = CharacterPolynomial(gens, {
        (2 * profile.flux2, 2 * profile.flux1): Fraction(1)})
    P = (gens.one() - gens.monomial(q1=1)) * (gens.one() - gens.monomial(q2=1))
    lam = diagram_character(profile.remainder, gens, _Q1, _Q2)
    num = (gens.one() - shift) + shift * lam * P
    return AsymptoticCharacter(num)


def regularize(asym):
    """Extract (flux1, flux2, remainder) from an asymptotic character.

    Inverts ``assemble`` exactly: K = shift^-1 (K~ - (1 - shift)/P) must be
    the character of a finite Young diagram."""
    gens = asym.numerator.gens
    n1 = asym.strip_flux(0)
    n2 = asym.strip_flux(1)
    shift = CharacterPolynomial(gens, {(2 * n2, 2 * n1): Fraction(1)})
    P = (gens.one() - gens.monomial(q1=1)) * (gens.one() - gens.monomial(q2=1))
    num = asym.numerator - (gens.one() - shift)
    try:
        lam_shifted = num.exact_div(P)
    except InexactDivision:
        raise NotAStaircase("character is not supported on a staircase")
    lam = lam_shifted * CharacterPolynomial(gens, {(-2 * n2, -2 * n1): Fraction(1)})
    rows = _diagram_from_character(lam)
    return AsymptoticProfile(n1, n2, rows)


def _diagram_from_character(lam):
    boxes = set()
    for m, c in lam.terms.items():
        if c != 1 or m[0] < 0 or m[1] < 0 or m[0] % 2 or m[1] % 2:
            raise NotAStaircase("remainder is not a unit-coefficient diagram")
        boxes.add((m[0] // 2, m[1] // 2))
    rows = []
    b = 0
    while True:
        width = 0
        while (width, b) in boxes:
            width += 1
        if width == 0:
            break
        rows.append(width)
        b += 1
    if len(boxes) != sum(rows) or any((a, b) not in boxes
                                      for b, r in enumerate(rows) for a in range(r)):
        raise NotAStaircase("remainder boxes do not form a Young diagram")
    if rows != sorted(rows, reverse=True):
        raise NotAStaircase("remainder rows are not weakly decreasing")
    return tuple(rows)


def enumerate_tuples(rank, vertices, max_boxes):
    """All assignments of one diagram per (vertex, gauge index) slot with
    total size <= max_boxes, in deterministic (total size, slotwise) order.

    Yields tuples of per-vertex tuples of diagrams."""
    slots = rank * vertices
    by_size = {}
    for s in range(max_boxes + 1):
        by_size[s] = list(partitions_of(s))

    for total in range(max_boxes + 1):
        for flat in _fill_exact(slots, total, by_size):
            yield tuple(tuple(flat[v * rank:(v + 1) * rank]) for v in range(vertices))


def _fill_exact(slots, total, by_size):
    if slots == 0:
        if total == 0:
            yield ()
        return
    for s in range(total + 1):
        for lam in by_size[s]:
            for rest in _fill_exact(slots - 1, total - s, by_size):
                yield (lam,) + rest


def count_tuples(rank, vertices, max_boxes):
    """Coefficient sums of the multi-partition generating function."""
    return sum(1 for _ in enumerate_tuples(rank, vertices, max_boxes))
