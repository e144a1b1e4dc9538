"""Virtual tangent characters of the ADHM matter content.

At a fixed point the universal sheaf restricts to ch E = W - P V with
W, V built from shifted Coulomb monomials and diagram characters; the
vector multiplet, twisted adjoint and (anti)fundamental matter combine
into the vertex character T and the perturbative character, both exact
Laurent polynomials once summed over the fixed points.
"""

from dataclasses import dataclass
from fractions import Fraction

from .charalg import (CharacterPolynomial, GeneratorSet, InexactDivision,
                      plethystic)
from .partitions import diagram_character
from .toric import GeometryError, chi_line_bundle, chi_prime


class UnsupportedMatter(ValueError):
    """Raised for matter content outside the shipped index computation."""


@dataclass(frozen=True)
class MatterContent:
    """Gauge rank with one fundamental (trivial) and one antifundamental
    (mass M) flavor; framing rank is fixed to one."""

    rank: int
    framing: int = 1

    def __post_init__(self):
        if self.rank < 1:
            raise UnsupportedMatter("gauge rank must be positive")
        if self.framing != 1:
            raise UnsupportedMatter("only framing rank one is implemented")


def frame_gens(surface, rank):
    """Generator set of the surface extended by rank Coulomb variables."""
    base = surface.gens
    names = base.names + tuple(f"a{i+1}" for i in range(rank))
    relations = tuple(rel + (0,) * rank for rel in base.relations)
    return GeneratorSet(names=names, relations=relations,
                        eliminated=base.eliminated)


@dataclass(frozen=True)
class CoulombFrame:
    """Coulomb variables for a fixed topological flux vector.

    ``xi`` carries one integer per gauge index; at each vertex the shifted
    variable is b_i = a_i q^(-shift * xi_i) with the vertex shift exponent
    supplied by the surface, so b_i / b_j is chart-independent once the
    shifts cancel against the flux monomials."""

    surface: object
    rank: int
    xi: tuple
    gens: GeneratorSet

    @classmethod
    def build(cls, surface, xi):
        xi = tuple(int(x) for x in xi)
        return cls(surface, len(xi), xi, frame_gens(surface, len(xi)))

    def coulomb_index(self, i):
        return self.gens.size - self.rank + i

    def a_exponent(self, i):
        vec = [0] * self.gens.size
        vec[self.coulomb_index(i)] = 2
        return tuple(vec)

    def b_exponent(self, i, v):
        shift = self.surface.vertex_shift_exponent(v)
        vec = list(self.a_exponent(i))
        for j, s in enumerate(shift):
            vec[j] -= self.xi[i] * s
        return self.gens.reduce(tuple(vec))


def vertex_WV(frame, v, diagrams):
    """Framing and instanton characters at one vertex: W = sum b_i,
    V = sum b_i ch(lambda_i)."""
    gens = frame.gens
    vd = frame.surface.vertices[v]
    pad = gens.size - frame.surface.gens.size
    axis1 = vd.tangent_weights[0] + (0,) * pad
    axis2 = vd.tangent_weights[1] + (0,) * pad
    W = gens.zero()
    V = gens.zero()
    for i, lam in enumerate(diagrams):
        b = CharacterPolynomial(gens, {frame.b_exponent(i, v): Fraction(1)})
        W = W + b
        if lam:
            V = V + b * diagram_character(lam, gens, axis1, axis2)
    return W, V


def t_adjoint(W, V, P, Q):
    """Vector-multiplet fixed-point character W V* + Q W* V - P V V*."""
    return W * V.dual() + Q * W.dual() * V - P * V * V.dual()


def t_fundamental(V, Q, gens):
    """Fundamental/antifundamental index V Q (M^-1 - 1)."""
    mass = gens.index("M")
    minus = [0] * gens.size
    minus[mass] = -2
    return V * Q * (CharacterPolynomial(gens, {tuple(minus): Fraction(1)}) - gens.one())


def t_vertex(t_adj, t_f, q3_exponent, gens):
    """Full vertex character (1 - q3) T_adj + T_f with q3 the adjoint
    twist weight at the vertex."""
    q3 = CharacterPolynomial(gens, {gens.reduce(q3_exponent): Fraction(1)})
    return (gens.one() - q3) * t_adj + t_f


def vertex_character(frame, v, diagrams):
    """T at one vertex for one diagram tuple."""
    gens = frame.gens
    surface = frame.surface
    pad = gens.size - surface.gens.size
    P, Q = surface.local_P_Q(v)
    P = P.pad_to(gens)
    Q = Q.pad_to(gens)
    W, V = vertex_WV(frame, v, diagrams)
    t_adj = t_adjoint(W, V, P, Q)
    t_f = t_fundamental(V, Q, gens)
    return t_vertex(t_adj, t_f, surface.adjoint_weight(v) + (0,) * pad, gens)


def perturbative_character(surface, frame):
    """Movable perturbative character in the chart-independent variables:
    sum_i a_i chi'(xi_i)(1 - M^-1) - sum_{i!=j} a_i/a_j [chi'(xi_i - xi_j)
    - chi'_3(xi_i - xi_j)].

    This is k + sum_v T_pert; the gauge-rank constant is already absorbed.
    """
    gens = frame.gens
    k = frame.rank
    chi3_zero = chi_prime(surface, 0, twist=True)
    if chi3_zero.constant_term():
        raise UnsupportedMatter(
            "twisting bundle has constant Euler-characteristic terms "
            "(zero modes obstruct the index)")
    mass = gens.index("M")
    minus = [0] * gens.size
    minus[mass] = -2
    one_minus_mdual = gens.one() - CharacterPolynomial(
        gens, {tuple(minus): Fraction(1)})
    total = gens.zero()
    for i in range(k):
        a = CharacterPolynomial(gens, {frame.a_exponent(i): Fraction(1)})
        total = total + a * chi_prime(surface, frame.xi[i]).pad_to(gens) * one_minus_mdual
    for i in range(k):
        for j in range(k):
            if i == j:
                continue
            d = frame.xi[i] - frame.xi[j]
            vec = [0] * gens.size
            vec[frame.coulomb_index(i)] = 2
            vec[frame.coulomb_index(j)] = -2
            aij = CharacterPolynomial(gens, {tuple(vec): Fraction(1)})
            cross = chi_prime(surface, d).pad_to(gens) - chi_prime(
                surface, d, twist=True).pad_to(gens)
            total = total - aij * cross
    return total


def perturbative_character_from_fluxes(surface, gens, flux_rows):
    """Perturbative character in the raw (unshifted) Coulomb variables,
    from per-gauge-index edge fluxes; includes the +k absorption.

    flux_rows[i] is the edge flux tuple of gauge index i; the Coulomb
    generators of ``gens`` play the unshifted variables."""
    k = len(flux_rows)
    base = surface.gens.size
    chi3_zero = chi_line_bundle(surface, (0,) * len(surface.edges),
                                twist=surface.adjoint_twist).pad_to(gens)
    if chi3_zero.constant_term():
        raise UnsupportedMatter("twisting bundle has zero modes")
    mass = gens.index("M")
    minus = [0] * gens.size
    minus[mass] = -2
    one_minus_mdual = gens.one() - CharacterPolynomial(
        gens, {tuple(minus): Fraction(1)})
    total = chi3_zero.scale(k)
    for i in range(k):
        vec = [0] * gens.size
        vec[base + i] = 2
        b = CharacterPolynomial(gens, {tuple(vec): Fraction(1)})
        chi = chi_line_bundle(surface, flux_rows[i]).pad_to(gens)
        total = total + b * chi * one_minus_mdual
    for i in range(k):
        for j in range(k):
            if i == j:
                continue
            diff = tuple(a - b for a, b in zip(flux_rows[i], flux_rows[j]))
            vec = [0] * gens.size
            vec[base + i] = 2
            vec[base + j] = -2
            bij = CharacterPolynomial(gens, {tuple(vec): Fraction(1)})
            cross = chi_line_bundle(surface, diff).pad_to(gens) - chi_line_bundle(
                surface, diff, twist=surface.adjoint_twist).pad_to(gens)
            total = total - bij * cross
    return total


def change_of_variables(poly, surface, gens, flux_rows):
    """Substitute the unshifted Coulomb variables b_i = a_i e^(-X_i) where
    X_i is the global flux form of gauge index i (the chart-independent
    presentation)."""
    base = surface.gens.size
    out = poly
    for i, nn in enumerate(flux_rows):
        vec = [0] * gens.size
        for e, (a, _) in enumerate(surface.edges):
            vec[a] -= 2 * nn[e]
        out = out.twist_generator(base + i, tuple(vec))
    return out


def assemble_vertex_sum(surface, frame, vertex_tuple):
    """k + sum_v (T_pert + T) as an exact Laurent polynomial.

    The vertex sum is cleared over the common denominator prod_v P*(v);
    a nonzero remainder means inconsistent gluing data."""
    gens = frame.gens
    k = frame.rank
    mass = gens.index("M")
    minus = [0] * gens.size
    minus[mass] = -2
    mdual = CharacterPolynomial(gens, {tuple(minus): Fraction(1)})
    duals = [surface.tangent_dual_product(v).pad_to(gens)
             for v in range(surface.n_vertices)]
    denom = gens.one()
    for d in duals:
        denom = denom * d
    total = denom.scale(k)
    pad = gens.size - surface.gens.size
    for v in range(surface.n_vertices):
        W, V = vertex_WV(frame, v, vertex_tuple[v])
        q3 = CharacterPolynomial(
            gens, {gens.reduce(surface.adjoint_weight(v) + (0,) * pad): Fraction(1)})
        numer = W * (gens.one() - mdual) - W.dual() * W * (gens.one() - q3)
        cof = gens.one()
        for w in range(surface.n_vertices):
            if w != v:
                cof = cof * duals[w]
        total = total + numer * cof
        total = total + vertex_character(frame, v, vertex_tuple[v]) * denom
    try:
        return total.exact_div(denom)
    except InexactDivision:
        raise GeometryError("vertex sum does not clear the tangent denominators")


def virtual_dimension(tp_with_k, rank):
    """Mass-independent Euler form of the movable index: drop every
    monomial containing the mass, evaluate the rest at 1, subtract the
    rank.  Equals chi(F) - rank^2 for consistent data."""
    mass = tp_with_k.gens.index("M")
    reduced = tp_with_k.drop_terms_involving(mass)
    val = reduced.coefficient_sum() - rank
    if val.denominator != 1:
        raise ValueError("virtual dimension is not an integer")
    return int(val)


def integrand_brackets(surface, frame):
    """Bracket product of the perturbative part (the full integrand's
    pole-carrying factor)."""
    return plethystic(perturbative_character(surface, frame))
