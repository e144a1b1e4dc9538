"""Flux sums, iterated residues, instanton blocks, coefficient tables.

The partition function is a sum over stable flux vectors of contour
integrals picking residues of the perturbative bracket product times the
instanton sum.  Every fixed-point term is exact; the non-equivariant
limit is an exact Laurent expansion along a generic integer direction
with regularity asserted, never a numerical limit.
"""

import random
import warnings
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from fractions import Fraction

from .charalg import (BracketProduct, CharacterPolynomial, InexactDivision,
                      LimitSeries, MassFraction, MassPoly, NonGenericDirection,
                      bracket_expansion, evaluate_limit)
from .characters import (CoulombFrame, integrand_brackets, t_adjoint,
                         t_fundamental, t_vertex)
from .partitions import diagram_character, partitions_of
from .toric import GeometryError
from .cache import TermCache


class NonGenericCollision(RuntimeError):
    """A surviving factor degenerates at a pole (higher-order pole or a
    denominator collapsing to <1>)."""


class UnknownStrategy(ValueError):
    pass


class IrregularSlot(RuntimeError):
    """A summed slot kept a negative limit order: the flux or residue
    enumeration at that slot is incomplete."""

    def __init__(self, m2, n, order):
        self.m2, self.n, self.order = m2, n, order
        super().__init__(
            f"slot (m={Fraction(m2,2)}, n={n}) has surviving t-order {order}")


@dataclass(frozen=True)
class StabilityFilter:
    """Slope stability on flux tuples: the Kahler pairings must be weakly
    decreasing (and every flux nonnegative)."""

    kahler: tuple = (Fraction(1),)

    def slope(self, xi):
        """Kahler pairing of one gauge index; xi is scalar for a rank-one
        Picard lattice."""
        return Fraction(xi) * self.kahler[0]

    def admits(self, xis):
        if any(x < 0 for x in xis):
            return False
        slopes = [self.slope(x) for x in xis]
        return all(slopes[i] >= slopes[i + 1] for i in range(len(slopes) - 1))


@dataclass(frozen=True)
class FixedPointTerm:
    """One unit of evaluation: a flux tuple, a diagram tuple, and the
    residue chain, with the derived grading."""

    xi: tuple
    vertex_tuple: tuple
    chain: tuple
    m2: int
    n: int
    nn: tuple = None


def _surface_degrees(surface):
    """(c1-degree, basis self-intersection) for a rank-one Picard lattice."""
    if surface.charge.n_charges != 1:
        raise GeometryError("scalar grading needs a rank-one Picard lattice")
    csum = sum(surface.charge.rows[0])
    q0 = surface.charge.rows[0][surface.edges[0][0]]
    g = Fraction(surface.intersections[surface.edges[0][0]][surface.edges[0][0]],
                 q0 * q0)
    return csum, g


def classical_weight(surface, xi, boxes):
    """Exponent bookkeeping (doubled m, n) of one term: degrees of the
    two counting parameters."""
    k = len(xi)
    csum, g = _surface_degrees(surface)
    m = sum(xi) + Fraction(k * csum, 2)
    n = (Fraction(g, 2) * sum(x * x for x in xi)
         + Fraction(csum, 2) * g * sum(xi) + k - boxes)
    m2 = 2 * m
    if m2.denominator != 1 or n.denominator != 1:
        raise GeometryError("grading is not half-integral")
    return int(m2), int(n)


def enumerate_fluxes(surface, k, m2, stability=None):
    """All stable nonnegative flux tuples with the given doubled magnetic
    degree, weakly decreasing, each unordered tuple once."""
    stability = stability or StabilityFilter(surface.kahler)
    csum, _ = _surface_degrees(surface)
    tot2 = m2 - k * csum
    if tot2 < 0 or tot2 % 2:
        return []
    total = tot2 // 2
    out = []
    for p in partitions_of(total):
        if len(p) <= k:
            xi = tuple(p) + (0,) * (k - len(p))
            if stability.admits(xi):
                out.append(xi)
    return out


# ---------------------------------------------------------------------------
# residue chains
# ---------------------------------------------------------------------------

def _q_part(surface, vec):
    """Strip a frame exponent vector down to the surface generators,
    requiring the Coulomb part to vanish."""
    base = surface.gens.size
    if any(vec[base:]):
        raise ValueError("monomial still involves Coulomb variables")
    return surface.gens.reduce(tuple(vec[:base]))


def _inverse_monomials(poly):
    return [tuple(-e for e in m) for m, _ in sorted(poly.terms.items())]


def _monomials(poly):
    return [m for m, _ in sorted(poly.terms.items())]


def pole_chains(surface, frame, strategy="builtin-p2"):
    """Residue chains for one flux tuple, ordered variable by variable
    (last Coulomb variable first).

    The builtin strategy takes the last variable's poles from its
    fundamental-matter factor and every earlier variable's poles from the
    adjoint cross factors against already-substituted variables; equal
    fluxes therefore contribute no chains.  The covector strategy is an
    experimental Jeffrey-Kirwan-style selection."""
    from .toric import chi_prime
    if strategy == "builtin-p2":
        k = frame.rank
        base = surface.gens.size
        chains = [[]]
        values = [{}]
        for j in range(k - 1, -1, -1):
            new_chains, new_values = [], []
            if j == k - 1:
                for pole in _inverse_monomials(chi_prime(surface, frame.xi[j])):
                    for ch, val in zip(chains, values):
                        new_chains.append(ch + [(j, pole)])
                        new_values.append({**val, j: pole})
            else:
                for ch, val in zip(chains, values):
                    for i in sorted(val):
                        d = frame.xi[j] - frame.xi[i]
                        if d == 0:
                            continue
                        for y in _monomials(chi_prime(surface, -d, twist=True)):
                            pole = surface.gens.reduce(
                                tuple(a + b for a, b in zip(val[i], y)))
                            new_chains.append(ch + [(j, pole)])
                            new_values.append({**val, j: pole})
                        for y in _monomials(chi_prime(surface, d, twist=True)):
                            pole = surface.gens.reduce(
                                tuple(a - b for a, b in zip(val[i], y)))
                            new_chains.append(ch + [(j, pole)])
                            new_values.append({**val, j: pole})
            chains, values = new_chains, new_values
        return [tuple(ch) for ch in chains if len(ch) == k]
    if strategy == "jk-covector":
        return _jk_chains(surface, frame)
    raise UnknownStrategy(f"unknown pole strategy {strategy!r}")


def _jk_chains(surface, frame):
    """Experimental covector selection for rank <= 2: pick pairs of
    denominator factors whose Coulomb charges positively span the
    reference covector."""
    if frame.rank == 1:
        from .toric import chi_prime
        return [(( 0, pole),)
                for pole in _inverse_monomials(chi_prime(surface, frame.xi[0]))]
    if frame.rank != 2:
        raise UnknownStrategy("covector strategy is implemented for rank <= 2")
    base = surface.gens.size
    eta = (1, 2)
    brackets = integrand_brackets(surface, frame)
    dens = [(m, mult) for m, mult in sorted(brackets.factors.items()) if mult > 0]
    chains = []
    for i1 in range(len(dens)):
        for i2 in range(i1 + 1, len(dens)):
            c1 = (dens[i1][0][base] // 2, dens[i1][0][base + 1] // 2)
            c2 = (dens[i2][0][base] // 2, dens[i2][0][base + 1] // 2)
            det = c1[0] * c2[1] - c1[1] * c2[0]
            if det in (1, -1):
                # eta = s1 c1 + s2 c2 with s1, s2 > 0
                s1 = (eta[0] * c2[1] - eta[1] * c2[0]) * det
                s2 = (c1[0] * eta[1] - c1[1] * eta[0]) * det
                if s1 > 0 and s2 > 0:
                    sol = _solve_pair(surface, dens[i1][0], dens[i2][0], base)
                    if sol is not None:
                        chains.append(sol)
    return chains


def _solve_pair(surface, f1, f2, base):
    """Solve f1 = f2 = 1 for the two Coulomb variables; returns a chain
    (a2 first) or None when the system is not unimodular."""
    c = [[f1[base] // 2, f1[base + 1] // 2], [f2[base] // 2, f2[base + 1] // 2]]
    det = c[0][0] * c[1][1] - c[0][1] * c[1][0]
    if det not in (1, -1):
        return None
    q1 = tuple(-x for x in f1[:base])
    q2 = tuple(-x for x in f2[:base])
    # log a = C^-1 log q with C the charge matrix
    inv = [[c[1][1] * det, -c[0][1] * det], [-c[1][0] * det, c[0][0] * det]]
    la1 = tuple(inv[0][0] * a + inv[0][1] * b for a, b in zip(q1, q2))
    la2 = tuple(inv[1][0] * a + inv[1][1] * b for a, b in zip(q1, q2))
    ga = surface.gens.reduce
    return ((1, ga(la2)), (0, ga(la1)))


def iterated_residue(coeff, factors, chain, base):
    """Iterated simple residues of coeff * prod <x>^(-mult) along the
    chain of (variable, q-monomial) substitutions, with measure da/a.

    Returns (coefficient, Coulomb-free factor dict) or None when a
    numerator zero kills the term.  Raises NonGenericCollision on a
    higher-order pole."""
    coeff = Fraction(coeff)
    cur = dict(factors)
    for var_local, pole in chain:
        var = base + var_local
        nxt = {}
        pole_order = 0
        sdeg = None
        for m, mult in cur.items():
            s = m[var] // 2
            if s == 0:
                nxt[m] = nxt.get(m, 0) + mult
                continue
            e = list(m)
            e[var] = 0
            sub = tuple(a + s * b for a, b in zip(e, list(pole) + [0] * (len(e) - len(pole))))
            if not any(sub):
                pole_order += mult
                sdeg = s
                continue
            key = tuple(sub)
            nxt[key] = nxt.get(key, 0) + mult
        if pole_order <= 0:
            return None
        if pole_order > 1:
            raise NonGenericCollision(
                f"pole of order {pole_order} on variable index {var_local}")
        coeff /= sdeg
        cur = {m: c for m, c in nxt.items() if c}
    out = {}
    for m, mult in cur.items():
        if any(m[base:]):
            raise NonGenericCollision("Coulomb variable survives the chain")
        key = m[:base]
        if not any(key):
            if mult < 0:
                return None
            raise NonGenericCollision("denominator factor collapses to <1>")
        out[key] = out.get(key, 0) + mult
    return coeff, {m: c for m, c in out.items() if c}


# ---------------------------------------------------------------------------
# instanton blocks
# ---------------------------------------------------------------------------

def _vertex_values_WV(surface, v, diagrams, bvals):
    gens = surface.gens
    vd = surface.vertices[v]
    W = gens.zero()
    V = gens.zero()
    for lam, b in zip(diagrams, bvals):
        mono = CharacterPolynomial(gens, {b: Fraction(1)})
        W = W + mono
        if lam:
            V = V + mono * diagram_character(lam, gens, vd.tangent_weights[0],
                                             vd.tangent_weights[1])
    return W, V


def instanton_block(surface, v, bvals, max_boxes, cache=None, cache_key=None):
    """Per-vertex instanton contributions with the Coulomb values already
    substituted: for every box count a list of bracket factor dicts, one
    per diagram tuple.  Tuples whose character develops a negative
    constant term contribute nothing (a vanishing numerator bracket); a
    positive constant term is a non-generic collision."""
    if cache is not None and cache_key is not None:
        hit = cache.get(cache_key)
        if hit is not None:
            return [[{tuple(m): mult for m, mult in term} for term in size]
                    for size in hit]
    gens = surface.gens
    rank = len(bvals)
    P, Q = surface.local_P_Q(v)
    q3 = surface.adjoint_weight(v)
    by_size = []
    for total in range(max_boxes + 1):
        size_terms = []
        for tup in _diagram_tuples(rank, total):
            W, V = _vertex_values_WV(surface, v, tup, bvals)
            t = t_vertex(t_adjoint(W, V, P, Q), t_fundamental(V, Q, gens),
                         q3, gens)
            c0 = t.constant_term()
            if c0 < 0:
                continue
            if c0 > 0:
                raise NonGenericCollision(
                    "instanton character gained a positive constant term")
            factors = {}
            ok = True
            for m, c in t.terms.items():
                if c.denominator != 1:
                    raise GeometryError("instanton character has fractional coefficients")
                factors[m] = int(c)
            size_terms.append(factors)
        by_size.append(size_terms)
    if cache is not None and cache_key is not None:
        cache.put(cache_key, [[sorted(term.items()) for term in size]
                              for size in by_size])
    return by_size


def _diagram_tuples(rank, total):
    if rank == 0:
        if total == 0:
            yield ()
        return
    for s in range(total + 1):
        for lam in partitions_of(s):
            for rest in _diagram_tuples(rank - 1, total - s):
                yield (lam,) + rest


# ---------------------------------------------------------------------------
# coefficient tables
# ---------------------------------------------------------------------------

class CoefficientTable:
    """Output map (doubled m, n) -> coefficient.

    Limit mode stores MassPoly values; equivariant mode stores
    CharacterPolynomial values over the surface generators."""

    def __init__(self, mode, metadata=None):
        self.mode = mode
        self.slots = {}
        self.metadata = dict(metadata or {})

    def add(self, key, value):
        if key in self.slots:
            self.slots[key] = self.slots[key] + value
        else:
            self.slots[key] = value

    def merge(self, other):
        if other.mode != self.mode:
            raise ValueError("cannot merge tables of different modes")
        for k, v in other.slots.items():
            self.add(k, v)
        return self

    def sorted_keys(self):
        return sorted(self.slots, key=lambda kn: (kn[0], -kn[1]))

    def __eq__(self, other):
        return (isinstance(other, CoefficientTable) and self.mode == other.mode
                and self.slots == other.slots)


def normalize_rank(table, rank):
    """Shipped overall normalizations: rank 1 is the identity, rank 2
    multiplies by -<M>^-4 (exact division); other ranks pass through
    with a warning."""
    if rank == 1:
        return table
    if rank != 2:
        warnings.warn(f"no normalization shipped for rank {rank}; passing through")
        return table
    out = CoefficientTable(table.mode, table.metadata)
    out.metadata["normalization"] = "-<M>^-4"
    if table.mode == "limit":
        br4 = MassPoly.const(1)
        for _ in range(4):
            br4 = br4 * MassPoly.bracket(1)
        for key, val in table.slots.items():
            out.slots[key] = (-val).exact_div(br4)
        return out
    gens = next(iter(table.slots.values())).gens if table.slots else None
    if gens is None:
        return out
    mvec = [0] * gens.size
    mvec[gens.index("M")] = 2
    br = bracket_expansion(gens, tuple(mvec))
    br4 = br * br * br * br
    for key, val in table.slots.items():
        out.slots[key] = (-val).exact_div(br4)
    return out


# ---------------------------------------------------------------------------
# assembling Z
# ---------------------------------------------------------------------------

def draw_directions(surface, seed, count=32):
    """Deterministic stream of candidate limit directions (integer rates
    for the free torus generators, zero on the eliminated one and the
    mass)."""
    rng = random.Random(seed)
    n = surface.gens.size
    free = [i for i in range(len(surface.gens.names) - 1)
            if i not in surface.gens.eliminated]
    out = []
    for _ in range(count):
        d = [0] * n
        for i in free:
            v = 0
            while v == 0:
                v = rng.randint(-60, 60)
            d[i] = v
        out.append(tuple(d))
    return out


def _series_for(factors, coeff, direction, length, gens):
    b = BracketProduct(gens, factors)
    npoles = 0
    mass = gens.index("M")
    for m, mult in factors.items():
        if mult > 0 and m[mass] == 0:
            npoles += mult
    ser = evaluate_limit(b, direction, (-npoles, length - npoles - 1))
    if coeff != 1:
        ser = LimitSeries(ser.o_min, [c.scale(coeff) for c in ser.coeffs])
    return ser


def _count_mass_free_poles(factors, mass):
    return sum(mult for m, mult in factors.items() if mult > 0 and m[mass] == 0)


class _RationalSlot:
    """Sum of coeff * bracket products kept as numerator / denominator
    over the common bracket denominator; finalized by exact division."""

    def __init__(self, gens):
        self.gens = gens
        self.num = gens.zero()
        self.den = {}

    def add(self, coeff, factors):
        new_den = {m: mult for m, mult in factors.items() if mult > 0}
        den = dict(self.den)
        for m, mult in new_den.items():
            den[m] = max(den.get(m, 0), mult)
        lift_old = self.gens.one()
        for m, mult in den.items():
            extra = mult - self.den.get(m, 0)
            for _ in range(extra):
                lift_old = lift_old * bracket_expansion(self.gens, m)
        term = self.gens.one().scale(coeff)
        for m, mult in factors.items():
            if mult < 0:
                term = term * bracket_expansion(self.gens, m) ** (-mult)
        for m, mult in den.items():
            extra = mult - new_den.get(m, 0)
            for _ in range(extra):
                term = term * bracket_expansion(self.gens, m)
        self.num = self.num * lift_old + term
        self.den = den

    def finalize(self):
        out = self.num
        for m, mult in sorted(self.den.items()):
            for _ in range(mult):
                out = out.exact_div(bracket_expansion(self.gens, m))
        return out


def _chain_task(surface, rank, xi, chain, max_boxes_by_n, mode, direction,
                cache_dir):
    """Contributions of one (flux, chain) pair: a list of
    ((m2, n), payload) entries, payload a series or a bracket term."""
    frame = CoulombFrame.build(surface, xi)
    cache = TermCache(cache_dir) if cache_dir else None
    brackets = integrand_brackets(surface, frame)
    base = surface.gens.size
    res = iterated_residue(1, brackets.factors, chain, base)
    if res is None:
        return []
    coeff, rem = res
    max_boxes = max(max_boxes_by_n) if max_boxes_by_n else 0
    values = {j: pole for j, pole in chain}
    blocks = []
    for v in range(surface.n_vertices):
        shift = surface.vertex_shift_exponent(v)
        bvals = []
        for i in range(rank):
            vec = [a - xi[i] * s for a, s in zip(values[i], shift[:base])]
            bvals.append(surface.gens.reduce(tuple(vec)))
        key = None
        if cache is not None:
            key = cache.make_key(
                geometry=surface.geometry_hash(), rank=rank, xi=xi,
                chain=[[j, list(p)] for j, p in chain], vertex=v,
                bvals=[list(b) for b in bvals], max_boxes=max_boxes)
        blocks.append(instanton_block(surface, v, bvals, max_boxes,
                                      cache, key))
    out = []
    mass = surface.gens.index("M")
    if mode == "limit":
        max_npoles = _count_mass_free_poles(rem, mass) + sum(
            max((_count_mass_free_poles(t, mass) for size in bl for t in size),
                default=0)
            for bl in blocks)
        length = max_npoles + 2
        rem_series = _series_for(rem, coeff, direction, length, surface.gens)
        vert_series = []
        for bl in blocks:
            per_size = []
            for size_terms in bl:
                acc = None
                for t in size_terms:
                    s = _series_for(t, Fraction(1), direction, length, surface.gens)
                    acc = s if acc is None else acc + s
                per_size.append(acc)
            vert_series.append(per_size)
        unit = LimitSeries(0, [MassFraction.const(1)]
                           + [MassFraction.const(0)] * (length - 1))
        for total in range(max_boxes + 1):
            if total not in max_boxes_by_n:
                continue
            acc = None
            for split in _compositions(total, surface.n_vertices):
                term = unit
                dead = False
                for v, s in enumerate(split):
                    piece = vert_series[v][s]
                    if piece is None:
                        dead = True
                        break
                    term = term * piece
                if dead:
                    continue
                acc = term if acc is None else acc + term
            if acc is None:
                continue
            out.append((max_boxes_by_n[total], rem_series * acc))
    else:
        for total in range(max_boxes + 1):
            if total not in max_boxes_by_n:
                continue
            for split in _compositions(total, surface.n_vertices):
                parts = [blocks[v][s] for v, s in enumerate(split)]
                for combo in _product_terms(parts):
                    merged = dict(rem)
                    for t in combo:
                        for m, mult in t.items():
                            nv = merged.get(m, 0) + mult
                            if nv:
                                merged[m] = nv
                            else:
                                merged.pop(m, None)
                    out.append((max_boxes_by_n[total], ("term", coeff, merged)))
    return out


def _compositions(total, slots):
    if slots == 1:
        yield (total,)
        return
    for first in range(total + 1):
        for rest in _compositions(total - first, slots - 1):
            yield (first,) + rest


def _product_terms(parts):
    if not parts:
        yield ()
        return
    for head in parts[0]:
        for rest in _product_terms(parts[1:]):
            yield (head,) + rest


@dataclass
class RunPlan:
    surface: object
    rank: int
    m2_max: int
    n_min: int
    mode: str
    max_boxes: int
    strategy: str = "builtin-p2"
    seed: int = 0
    threads: int = 1
    cache_dir: str = None
    stability: StabilityFilter = None


def _plan_tasks(plan):
    surface, k = plan.surface, plan.rank
    csum, _ = _surface_degrees(surface)
    stability = plan.stability or StabilityFilter(surface.kahler)
    tasks = []
    for m2 in range(k * csum, plan.m2_max + 1):
        for xi in enumerate_fluxes(surface, k, m2, stability):
            frame = CoulombFrame.build(surface, xi)
            chains = pole_chains(surface, frame, plan.strategy)
            _, n_base = classical_weight(surface, xi, 0)
            boxes_by_n = {}
            for boxes in range(plan.max_boxes + 1):
                n = n_base - boxes
                if n >= plan.n_min:
                    boxes_by_n[boxes] = (m2, n)
            if not boxes_by_n:
                continue
            for chain in chains:
                tasks.append((xi, chain, boxes_by_n))
    return tasks


def assemble_Z(plan):
    """Full coefficient table for the run plan.

    Limit mode asserts exact regularity of every slot and stores the
    order-zero coefficient; equivariant mode stores the exact character
    polynomial of every slot."""
    surface = plan.surface
    tasks = _plan_tasks(plan)
    directions = draw_directions(surface, plan.seed) if plan.mode == "limit" else [None]
    last_err = None
    for direction in directions:
        try:
            return _assemble_with_direction(plan, tasks, direction)
        except NonGenericDirection as err:
            last_err = err
            continue
    raise NonGenericDirection(f"no generic direction found: {last_err}")


def _assemble_with_direction(plan, tasks, direction):
    surface = plan.surface
    payloads = []
    args = [(surface, plan.rank, xi, chain, boxes_by_n, plan.mode, direction,
             plan.cache_dir) for xi, chain, boxes_by_n in tasks]
    if plan.threads > 1 and len(args) > 1:
        with ProcessPoolExecutor(max_workers=plan.threads) as pool:
            for contrib in pool.map(_chain_task_star, args):
                payloads.append(contrib)
    else:
        payloads = [_chain_task(*a) for a in args]

    table = CoefficientTable(plan.mode, metadata={
        "mode": plan.mode,
        "rank": plan.rank,
        "m2_max": plan.m2_max,
        "n_min": plan.n_min,
        "max_boxes": plan.max_boxes,
        "strategy": plan.strategy,
        "geometry": surface.name,
        "geometry_hash": surface.geometry_hash(),
        "seed": plan.seed,
        "direction": list(direction) if direction else None,
    })
    if plan.mode == "limit":
        acc = {}
        for contrib in payloads:
            for key, series in contrib:
                acc[key] = series if key not in acc else acc[key] + series
        for key in sorted(acc):
            series = acc[key]
            bad = series.first_irregular_order()
            if bad is not None:
                raise IrregularSlot(key[0], key[1], bad)
            poly = series.polynomial_coefficient(0)
            if poly:
                table.add(key, poly)
    else:
        acc = {}
        for contrib in payloads:
            for key, (_, coeff, factors) in contrib:
                acc.setdefault(key, _RationalSlot(surface.gens)).add(coeff, factors)
        for key in sorted(acc):
            poly = acc[key].finalize()
            if poly:
                table.add(key, poly)
    return table


def _chain_task_star(a):
    return _chain_task(*a)
