"""Toric surface data: fixed points, tangent/fiber weights, intersection
numbers, and equivariant Euler characteristics of line bundles.

A surface is a symplectic quotient of C^N by U(1)^M (M = N - 2) with
charge matrix Q; the local fourfold adds two line-bundle fibers with a
2-column fiber block.  Fan combinatorics (vertex index pairs, edges,
intersection numbers) are explicit validated inputs.
"""

import hashlib
import json
from dataclasses import dataclass, field
from fractions import Fraction

from .charalg import CharacterPolynomial, GeneratorSet, InexactDivision


class GeometryError(ValueError):
    """Raised for inconsistent charge/fan data."""


@dataclass(frozen=True)
class ChargeMatrix:
    """Surface charges (M x N) plus the two fiber columns (M x 2)."""

    rows: tuple
    fiber: tuple

    def __post_init__(self):
        rows = tuple(tuple(int(x) for x in r) for r in self.rows)
        fiber = tuple(tuple(int(x) for x in r) for r in self.fiber)
        object.__setattr__(self, "rows", rows)
        object.__setattr__(self, "fiber", fiber)
        m = len(rows)
        if m == 0:
            raise GeometryError("empty charge matrix")
        n = len(rows[0])
        if any(len(r) != n for r in rows):
            raise GeometryError("ragged charge matrix")
        if n != m + 2:
            raise GeometryError("surface charge matrix must be M x (M+2)")
        if len(fiber) != m or any(len(r) != 2 for r in fiber):
            raise GeometryError("fiber block must be M x 2")

    @property
    def n_coords(self):
        return len(self.rows[0])

    @property
    def n_charges(self):
        return len(self.rows)

    def extended_column(self, a):
        """Charge vector of coordinate a, fiber columns appended last."""
        n = self.n_coords
        if a < n:
            return tuple(r[a] for r in self.rows)
        return tuple(r[a - n] for r in self.fiber)


def _mat_inverse(mat):
    """Exact inverse of a square Fraction matrix (Gauss-Jordan)."""
    n = len(mat)
    a = [[Fraction(x) for x in row] + [Fraction(int(i == j)) for j in range(n)]
         for i, row in enumerate(mat)]
    for col in range(n):
        piv = next((r for r in range(col, n) if a[r][col]), None)
        if piv is None:
            return None
        a[col], a[piv] = a[piv], a[col]
        p = a[col][col]
        a[col] = [x / p for x in a[col]]
        for r in range(n):
            if r != col and a[r][col]:
                f = a[r][col]
                a[r] = [x - f * y for x, y in zip(a[r], a[col])]
    return [row[n:] for row in a]


@dataclass(frozen=True)
class VertexData:
    index_pair: tuple          # coordinates vanishing at the fixed point
    tangent_weights: tuple     # two doubled-exponent vectors over the gens
    fiber_weights: tuple       # weights of the two fiber line bundles
    moment_coeffs: tuple       # H_v = sum_alpha coeff row . t  (per charge row)


@dataclass(frozen=True)
class FluxVector:
    """Nonnegative integers per edge for one gauge index."""

    entries: tuple

    def __post_init__(self):
        e = tuple(int(x) for x in self.entries)
        if any(x < 0 for x in e):
            raise GeometryError("equivariant fluxes must be nonnegative")
        object.__setattr__(self, "entries", e)


@dataclass(frozen=True)
class ToricSurfaceData:
    charge: ChargeMatrix
    vertices: tuple            # VertexData per fixed point
    edges: tuple               # (divisor index, (vertex, vertex)) per edge
    intersections: tuple       # divisor intersection matrix D_e . D_e'
    volumes: tuple             # vol(D_e) in Kahler units
    kahler: tuple              # t_alpha, one positive value per charge row
    adjoint_twist: str         # which fiber bundle twists the adjoint
    gens: GeneratorSet = field(compare=False)
    name: str = "custom"

    @property
    def n_vertices(self):
        return len(self.vertices)

    @property
    def mass_index(self):
        return self.gens.index("M")

    def adjoint_weight(self, v):
        i = 0 if self.adjoint_twist == "L1" else 1
        return self.vertices[v].fiber_weights[i]

    def dual_weight_of(self, vec):
        return self.gens.reduce(tuple(-x for x in vec))

    def tangent_dual_product(self, v):
        """P*(v) = prod (1 - 1/w) over the tangent weights at v."""
        gens = self.gens
        out = gens.one()
        for w in self.vertices[v].tangent_weights:
            out = out * (gens.one() - CharacterPolynomial(
                gens, {self.dual_weight_of(w): Fraction(1)}))
        return out

    def local_P_Q(self, v):
        """P = prod (1 - w), Q = prod w over the tangent weights at v."""
        gens = self.gens
        P = gens.one()
        qvec = (0,) * gens.size
        for w in self.vertices[v].tangent_weights:
            P = P * (gens.one() - CharacterPolynomial(gens, {w: Fraction(1)}))
            qvec = tuple(a + b for a, b in zip(qvec, w))
        Q = CharacterPolynomial(gens, {gens.reduce(qvec): Fraction(1)})
        return P, Q

    def flux_monomial(self, v, nn):
        """Doubled exponent vector of q^n at vertex v: the tangent weights
        raised to the fluxes of their own coordinate directions."""
        vec = [0] * self.gens.size
        vd = self.vertices[v]
        for a, w in zip(vd.index_pair, vd.tangent_weights):
            f = nn[a]
            if f:
                vec = [x + f * y for x, y in zip(vec, w)]
        return self.gens.reduce(tuple(vec))

    def vertex_shift_exponent(self, v):
        """Doubled exponent vector s with b = a q^(-s xi) at this vertex
        (rank-one Picard lattice; the moment row must be half-integral)."""
        n = self.charge.n_coords + 2
        vec = [Fraction(0)] * n
        for row in self.vertices[v].moment_coeffs:
            vec = [a + b for a, b in zip(vec, row)]
        dbl = []
        for x in vec:
            d = 2 * x
            if d.denominator != 1:
                raise GeometryError("vertex shift is not a half-integer vector")
            dbl.append(int(d))
        return tuple(dbl) + (0,) * (self.gens.size - n)

    def geometry_hash(self):
        payload = {
            "charge": self.charge.rows,
            "fiber": self.charge.fiber,
            "vertices": [v.index_pair for v in self.vertices],
            "edges": self.edges,
            "intersections": self.intersections,
            "volumes": [str(v) for v in self.volumes],
            "twist": self.adjoint_twist,
        }
        blob = json.dumps(payload, sort_keys=True, default=list)
        return hashlib.sha256(blob.encode()).hexdigest()[:16]


def build_surface(charge, fan, adjoint_twist="L1", kahler=None, name="custom"):
    """Validate charge + fan data and compute all fixed-point weights.

    ``fan`` is a mapping with keys ``vertices`` (index pairs), ``edges``
    ((divisor, (v, w)) pairs), ``intersections`` (matrix over divisors)
    and optionally ``volumes``.
    """
    n = charge.n_coords
    m = charge.n_charges
    qnames = tuple(f"q{i+1}" for i in range(n + 2))
    relation = tuple([1] * (n + 2) + [0])
    gens = GeneratorSet(names=qnames + ("M",),
                        relations=(relation,), eliminated=(n + 1,))

    for alpha in range(m):
        total = sum(charge.rows[alpha]) + sum(charge.fiber[alpha])
        if total != 0:
            raise GeometryError(
                f"charge row {alpha} does not satisfy the Calabi-Yau sum rule")

    vertices = []
    for iv in fan["vertices"]:
        iv = tuple(sorted(int(x) for x in iv))
        if len(iv) != 2 or not all(0 <= a < n for a in iv):
            raise GeometryError(f"vertex index pair {iv} out of range")
        comp = [a for a in range(n) if a not in iv]
        qc = [[Fraction(charge.rows[al][c]) for c in comp] for al in range(m)]
        inv = _mat_inverse(qc)
        if inv is None:
            raise GeometryError("fixed points not isolated: singular vertex charge block")

        def weight(a):
            col = charge.extended_column(a)
            coeffs = [sum(inv[c][al] * col[al] for al in range(m)) for c in range(m)]
            full = [Fraction(0)] * (n + 2)
            full[a] += 1
            for c, co in zip(comp, coeffs):
                full[c] -= co
            dbl = []
            for x in full:
                d = 2 * x
                if d.denominator != 1:
                    raise GeometryError("fixed points not isolated: fractional weight")
                dbl.append(int(d))
            return gens.reduce(tuple(dbl) + (0,))

        tangent = tuple(weight(a) for a in iv)
        fiber = (weight(n), weight(n + 1))
        # H_v rows: eps^t L^c Q_v^{-t}; row alpha gives the coefficient of
        # t_alpha as a linear form in the epsilons of the complement
        moment = []
        for alpha in range(m):
            row = [Fraction(0)] * (n + 2)
            for ci, c in enumerate(comp):
                row[c] = inv[ci][alpha]
            moment.append(tuple(row))
        vertices.append(VertexData(iv, tangent, fiber, tuple(moment)))

    edges = tuple((int(e[0]), (int(e[1][0]), int(e[1][1]))) for e in fan["edges"])
    inter = tuple(tuple(int(x) for x in row) for row in fan["intersections"])
    volumes = tuple(Fraction(v) for v in fan.get("volumes", [1] * len(edges)))
    kahler = tuple(Fraction(t) for t in (kahler or [1] * m))

    surface = ToricSurfaceData(charge, tuple(vertices), edges, inter, volumes,
                               kahler, adjoint_twist, gens, name)
    _validate_surface(surface)
    return surface


def _validate_surface(s):
    n = s.charge.n_coords
    if len(s.vertices) != n or len(s.edges) != n:
        raise GeometryError("Euler count mismatch: need |vertices| = |edges| = N")
    if len(s.intersections) != n or any(len(r) != n for r in s.intersections):
        raise GeometryError("intersection matrix has wrong shape")
    if any(s.intersections[i][j] != s.intersections[j][i]
           for i in range(n) for j in range(n)):
        raise GeometryError("intersection matrix not symmetric")
    for a, (v, w) in s.edges:
        for end in (v, w):
            if a not in s.vertices[end].index_pair:
                raise GeometryError(f"edge divisor {a} does not vanish at vertex {end}")
        wv = _along_edge_weight(s, v, a)
        ww = _along_edge_weight(s, w, a)
        if tuple(-x for x in wv) != ww:
            raise GeometryError(f"edge {a}: endpoint weights are not opposite")
    # sum of all divisor classes is the anticanonical class
    for e in range(n):
        total = sum(s.intersections[a][e] for a in range(n))
        if total != 2 + s.intersections[e][e]:
            raise GeometryError(f"divisor sum is not c1(S) against edge {e}")


def _along_edge_weight(s, v, a):
    vd = s.vertices[v]
    others = [b for b in vd.index_pair if b != a]
    if len(others) != 1:
        raise GeometryError("edge direction ambiguous")
    return vd.tangent_weights[vd.index_pair.index(others[0])]


def flux_pairing(surface, nn):
    """xi_alpha = sum_a Q^a_alpha n_a for an edge flux vector."""
    q = surface.charge
    order = [a for a, _ in surface.edges]
    return tuple(sum(q.rows[al][a] * nn[i] for i, a in enumerate(order))
                 for al in range(q.n_charges))


def flux_ch2(surface, nn):
    """ch2 of the flux line bundle: half the intersection square."""
    order = [a for a, _ in surface.edges]
    tot = Fraction(0)
    for i, a in enumerate(order):
        for j, b in enumerate(order):
            tot += Fraction(nn[i] * nn[j] * surface.intersections[a][b], 2)
    return tot


def chi_line_bundle(surface, nn, twist=None):
    """Equivariant Euler characteristic of the line bundle with edge
    fluxes ``nn`` (any integer signs), optionally twisted by a fiber
    bundle ("L1" or "L2").  Computed over a common denominator; the
    division must be exact or the geometry data is inconsistent."""
    gens = surface.gens
    duals = [surface.tangent_dual_product(v) for v in range(surface.n_vertices)]
    total_num = gens.zero()
    nn_by_coord = _edge_fluxes_by_coordinate(surface, nn)
    for v in range(surface.n_vertices):
        num = CharacterPolynomial(
            gens, {surface.flux_monomial(v, nn_by_coord): Fraction(1)})
        if twist is not None:
            i = 0 if twist == "L1" else 1
            num = num * CharacterPolynomial(
                gens, {surface.vertices[v].fiber_weights[i]: Fraction(1)})
        for w in range(surface.n_vertices):
            if w != v:
                num = num * duals[w]
        total_num = total_num + num
    denom = gens.one()
    for d in duals:
        denom = denom * d
    try:
        return total_num.exact_div(denom)
    except InexactDivision:
        raise GeometryError("line-bundle character sum is not polynomial; "
                            "geometry or flux data inconsistent")


def _edge_fluxes_by_coordinate(surface, nn):
    out = [0] * surface.charge.n_coords
    for i, (a, _) in enumerate(surface.edges):
        out[a] = nn[i]
    return tuple(out)


def chi_prime(surface, xi, twist=False):
    """Euler characteristic sum with the class carried by a single integer
    xi: sum over vertices of e^(-eps_v xi) / P*(v), optionally with the
    adjoint-twist fiber weight in the numerator.

    Defined for geometries with one charge row (so xi determines the
    class)."""
    if surface.charge.n_charges != 1:
        raise GeometryError("single-integer classes need a rank-one Picard lattice")
    gens = surface.gens
    duals = [surface.tangent_dual_product(v) for v in range(surface.n_vertices)]
    total_num = gens.zero()
    for v in range(surface.n_vertices):
        shift = surface.vertex_shift_exponent(v)
        vec = gens.reduce(tuple(-xi * x for x in shift))
        num = CharacterPolynomial(gens, {vec: Fraction(1)})
        if twist:
            num = num * CharacterPolynomial(
                gens, {surface.adjoint_weight(v): Fraction(1)})
        for w in range(surface.n_vertices):
            if w != v:
                num = num * duals[w]
        total_num = total_num + num
    denom = gens.one()
    for d in duals:
        denom = denom * d
    try:
        return total_num.exact_div(denom)
    except InexactDivision:
        raise GeometryError("Euler characteristic sum is not polynomial")


def hamiltonian_split(surface, v, nn):
    """Split log q^n into the global flux form X and the vertex form X_v.

    Returns (X, X_v) as Fraction vectors over the epsilon generators; the
    difference matches the exponent of ``flux_monomial`` exactly."""
    n = surface.charge.n_coords
    size = surface.gens.size
    X = [Fraction(0)] * size
    for i, (a, _) in enumerate(surface.edges):
        X[a] += nn[i]
    xi = flux_pairing(surface, nn)
    Xv = [Fraction(0)] * size
    for alpha, row in enumerate(surface.vertices[v].moment_coeffs):
        for c in range(n + 2):
            Xv[c] += row[c] * xi[alpha]
    return tuple(X), tuple(Xv)


def split_identity_holds(surface, v, nn):
    """Check X - X_v == the exponent vector of q^n at the vertex."""
    X, Xv = hamiltonian_split(surface, v, nn)
    diff = [Fraction(a - b) for a, b in zip(X, Xv)]
    dbl = []
    for x in diff:
        d = 2 * x
        if d.denominator != 1:
            return False
        dbl.append(int(d))
    target = surface.flux_monomial(v, _edge_fluxes_by_coordinate(surface, nn))
    return surface.gens.reduce(tuple(dbl)) == target


def lattice_point_chi_p2(d):
    """Euler characteristic of O(d) on the projective plane by counting
    monomials (Serre duality below zero); independent of localization."""
    if d >= 0:
        return sum(1 for a in range(d + 1) for b in range(d + 1 - a))
    dd = -3 - d
    if dd >= 0:
        return sum(1 for a in range(dd + 1) for b in range(dd + 1 - a))
    return 0


def preset_p2(adjoint_twist="L1"):
    """The projective plane with fiber bundles O(-2) and O(-1)."""
    charge = ChargeMatrix(rows=((1, 1, 1),), fiber=((-2, -1),))
    fan = {
        "vertices": [(1, 2), (0, 2), (0, 1)],
        "edges": [(0, (1, 2)), (1, (0, 2)), (2, (0, 1))],
        "intersections": [[1, 1, 1], [1, 1, 1], [1, 1, 1]],
        "volumes": [1, 1, 1],
    }
    return build_surface(charge, fan, adjoint_twist=adjoint_twist,
                         name="p2_O-2_O-1")


PRESETS = {"p2_O-2_O-1": preset_p2}
