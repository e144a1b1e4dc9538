"""Exact sparse Laurent-polynomial and truncated-series arithmetic.

Everything runs over a fixed ordered set of formal multiplicative
generators (torus characters, one mass variable, Coulomb variables).
Exponents live on the half-integer lattice and are stored *doubled*, so
stored exponents are always ints and arithmetic stays exact.  Coefficients
are `fractions.Fraction`.  Linear relations among generator exponents
(such as the Calabi-Yau constraint on the torus characters) are imposed
by eliminating one designated generator per relation; every monomial is
kept in that reduced normal form.
"""

from dataclasses import dataclass
from fractions import Fraction


class GeneratorSetMismatch(ValueError):
    """Raised when two values over different generator sets are combined."""


class NonMovableCharacter(ValueError):
    """Raised when the plethystic map is applied to a character with a
    nonzero constant term."""


class NonIntegerCoefficient(ValueError):
    """Raised when the plethystic map is applied to a character with a
    non-integer coefficient."""


class InexactDivision(ArithmeticError):
    """Raised when an exact polynomial division leaves a remainder."""


class NonGenericDirection(ValueError):
    """Raised when a limit direction annihilates a mass-free bracket factor.
    The caller should redraw the direction."""


class UnreducibleExponent(ValueError):
    """Raised when a substitution would leave the doubled-exponent lattice."""


@dataclass(frozen=True)
class GeneratorSet:
    """Ordered formal generators plus integer linear relations.

    ``relations[i]`` is an integer vector of exponent coefficients; the
    generator ``eliminated[i]`` (whose coefficient must be +-1) is solved
    for and removed from every monomial's normal form.
    """

    names: tuple
    relations: tuple = ()
    eliminated: tuple = ()

    def __post_init__(self):
        if len(set(self.names)) != len(self.names):
            raise ValueError("generator names must be unique")
        if len(self.relations) != len(self.eliminated):
            raise ValueError("one eliminated generator per relation")
        if len(set(self.eliminated)) != len(self.eliminated):
            raise ValueError("eliminated generators must be distinct")
        n = len(self.names)
        for rel, e in zip(self.relations, self.eliminated):
            if len(rel) != n or not any(rel):
                raise ValueError("relation must be a nonzero vector over the generators")
            if any(int(c) != c for c in rel):
                raise ValueError("relation coefficients must be integers")
            if rel[e] not in (1, -1):
                raise ValueError("eliminated generator must carry coefficient +-1")
        for i, rel in enumerate(self.relations):
            for j, e in enumerate(self.eliminated):
                if j != i and rel[e] != 0:
                    raise ValueError("relations must be triangular in the eliminated generators")

    @property
    def size(self):
        return len(self.names)

    def index(self, name):
        return self.names.index(name)

    def reduce(self, exps):
        """Normal form of a doubled-exponent vector modulo the relations."""
        v = list(exps)
        for rel, e in zip(self.relations, self.eliminated):
            c = v[e]
            if c:
                s = rel[e]  # +-1
                for i, r in enumerate(rel):
                    v[i] -= s * c * r
        return tuple(v)

    def exponents(self, **powers):
        """Doubled-exponent vector from named powers (ints, Fractions or
        half-integer floats are accepted)."""
        v = [0] * self.size
        for name, p in powers.items():
            d = Fraction(p) * 2
            if d.denominator != 1:
                raise UnreducibleExponent(f"exponent {p} of {name} is not a half-integer")
            v[self.index(name)] = int(d)
        return self.reduce(tuple(v))

    def monomial(self, coeff=1, **powers):
        return CharacterPolynomial(self, {self.exponents(**powers): Fraction(coeff)})

    def zero(self):
        return CharacterPolynomial(self, {})

    def one(self):
        return CharacterPolynomial(self, {(0,) * self.size: Fraction(1)})


def _format_monomial(names, exps):
    parts = []
    for name, d in zip(names, exps):
        if not d:
            continue
        e = Fraction(d, 2)
        parts.append(name if e == 1 else f"{name}^{e}")
    return "*".join(parts) if parts else "1"


class CharacterPolynomial:
    """Sparse exact Laurent polynomial: map from reduced doubled-exponent
    vectors to nonzero rational coefficients."""

    __slots__ = ("gens", "terms")

    def __init__(self, gens, terms=None, *, _reduced=False):
        self.gens = gens
        if terms is None:
            self.terms = {}
        elif _reduced:
            self.terms = {m: c for m, c in terms.items() if c}
        else:
            out = {}
            for m, c in terms.items():
                if not c:
                    continue
                m = gens.reduce(m)
                c2 = out.get(m, 0) + Fraction(c)
                if c2:
                    out[m] = c2
                else:
                    out.pop(m, None)
            self.terms = out

    def _check(self, other):
        if self.gens is not other.gens and self.gens != other.gens:
            raise GeneratorSetMismatch("operands live over different generator sets")

    def __bool__(self):
        return bool(self.terms)

    def __eq__(self, other):
        return (isinstance(other, CharacterPolynomial)
                and self.gens == other.gens and self.terms == other.terms)

    def __hash__(self):
        return hash((self.gens.names, self.key()))

    def key(self):
        """Canonical hashable form (sorted term list)."""
        return tuple(sorted(self.terms.items()))

    def __add__(self, other):
        self._check(other)
        out = dict(self.terms)
        for m, c in other.terms.items():
            c2 = out.get(m, 0) + c
            if c2:
                out[m] = c2
            else:
                out.pop(m, None)
        return CharacterPolynomial(self.gens, out, _reduced=True)

    def __neg__(self):
        return CharacterPolynomial(self.gens, {m: -c for m, c in self.terms.items()}, _reduced=True)

    def __sub__(self, other):
        return self + (-other)

    def __mul__(self, other):
        if isinstance(other, (int, Fraction)):
            return self.scale(other)
        self._check(other)
        gens = self.gens
        out = {}
        for m1, c1 in self.terms.items():
            for m2, c2 in other.terms.items():
                m = gens.reduce(tuple(a + b for a, b in zip(m1, m2)))
                c = out.get(m, 0) + c1 * c2
                if c:
                    out[m] = c
                else:
                    out.pop(m, None)
        return CharacterPolynomial(gens, out, _reduced=True)

    __rmul__ = __mul__

    def __pow__(self, n):
        if n < 0:
            raise ValueError("negative powers are not defined for polynomials")
        r = self.gens.one()
        b = self
        while n:
            if n & 1:
                r = r * b
            b = b * b
            n >>= 1
        return r

    def scale(self, c):
        c = Fraction(c)
        if not c:
            return CharacterPolynomial(self.gens, {})
        return CharacterPolynomial(self.gens, {m: c * v for m, v in self.terms.items()}, _reduced=True)

    def dual(self):
        """Invert every generator exponent."""
        out = {}
        for m, c in self.terms.items():
            out[self.gens.reduce(tuple(-e for e in m))] = c
        return CharacterPolynomial(self.gens, out, _reduced=True)

    def substitute(self, var, value_exps):
        """Replace generator ``var`` by the monomial with doubled exponents
        ``value_exps`` (which must not involve ``var``)."""
        if value_exps[var] != 0:
            raise ValueError("substitution value must not involve the substituted generator")
        gens = self.gens
        out = {}
        for m, c in self.terms.items():
            d = m[var]
            if d:
                e = list(m)
                e[var] = 0
                for i, ve in enumerate(value_exps):
                    if ve:
                        prod = d * ve
                        if prod % 2:
                            raise UnreducibleExponent(
                                "substitution leaves the half-integer lattice")
                        e[i] += prod // 2
                m = gens.reduce(tuple(e))
            c2 = out.get(m, 0) + c
            if c2:
                out[m] = c2
            else:
                out.pop(m, None)
        return CharacterPolynomial(gens, out, _reduced=True)

    def pad_to(self, gens):
        """Re-read the polynomial over a larger generator set whose names
        start with this polynomial's names (new generators get exponent 0)."""
        if gens.names[:self.gens.size] != self.gens.names:
            raise GeneratorSetMismatch("target generators do not extend the source")
        extra = gens.size - self.gens.size
        out = {m + (0,) * extra: c for m, c in self.terms.items()}
        return CharacterPolynomial(gens, out, _reduced=True)

    def twist_generator(self, var, twist_exps):
        """Rescale generator ``var`` by the monomial with doubled exponents
        ``twist_exps`` (var-free): every occurrence a^d picks up twist^d."""
        if twist_exps[var] != 0:
            raise ValueError("twist monomial must not involve the twisted generator")
        gens = self.gens
        out = {}
        for m, c in self.terms.items():
            d = m[var]
            if d:
                e = list(m)
                for i, te in enumerate(twist_exps):
                    if te:
                        prod = d * te
                        if prod % 2:
                            raise UnreducibleExponent(
                                "twist leaves the half-integer lattice")
                        e[i] += prod // 2
                m = gens.reduce(tuple(e))
            c2 = out.get(m, 0) + c
            if c2:
                out[m] = c2
            else:
                out.pop(m, None)
        return CharacterPolynomial(gens, out, _reduced=True)

    def constant_term(self):
        return self.terms.get((0,) * self.gens.size, Fraction(0))

    def is_movable(self):
        return not self.constant_term()

    def involves(self, var):
        return any(m[var] for m in self.terms)

    def coefficient_sum(self):
        """Value at all generators -> 1."""
        return sum(self.terms.values(), Fraction(0))

    def drop_terms_involving(self, var):
        out = {m: c for m, c in self.terms.items() if not m[var]}
        return CharacterPolynomial(self.gens, out, _reduced=True)

    def exact_div(self, divisor):
        """Exact division; raises InexactDivision on a nonzero remainder."""
        self._check(divisor)
        if not divisor.terms:
            raise ZeroDivisionError("division by the zero polynomial")
        if not self.terms:
            return CharacterPolynomial(self.gens, {})
        n = self.gens.size
        # shift both to the nonnegative orthant so graded-lex ordering is a
        # genuine term order
        lo_a = [min(m[i] for m in self.terms) for i in range(n)]
        lo_b = [min(m[i] for m in divisor.terms) for i in range(n)]
        a = {tuple(e - l for e, l in zip(m, lo_a)): c for m, c in self.terms.items()}
        b = {tuple(e - l for e, l in zip(m, lo_b)): c for m, c in divisor.terms.items()}

        def order(m):
            return (sum(m), m)

        blead = max(b, key=order)
        bc = b[blead]
        q = {}
        while a:
            alead = max(a, key=order)
            e = tuple(x - y for x, y in zip(alead, blead))
            if any(x < 0 for x in e):
                raise InexactDivision("division leaves a remainder")
            c = a[alead] / bc
            q[e] = c
            for m, v in b.items():
                mm = tuple(x + y for x, y in zip(m, e))
                v2 = a.get(mm, 0) - c * v
                if v2:
                    a[mm] = v2
                else:
                    a.pop(mm, None)
        shift = [la - lb for la, lb in zip(lo_a, lo_b)]
        out = {self.gens.reduce(tuple(e + s for e, s in zip(m, shift))): c for m, c in q.items()}
        return CharacterPolynomial(self.gens, out, _reduced=True)

    def __repr__(self):
        if not self.terms:
            return "0"
        bits = []
        for m, c in sorted(self.terms.items()):
            mono = _format_monomial(self.gens.names, m)
            if c == 1 and mono != "1":
                bits.append(mono)
            elif mono == "1":
                bits.append(str(c))
            else:
                bits.append(f"{c}*{mono}")
        return " + ".join(bits)


class BracketProduct:
    """Multiset of (monomial, signed multiplicity) meaning
    ``prod <x>^(-m)`` with ``<x> = x^(1/2) - x^(-1/2)``.

    Positive multiplicities are denominator factors, negative ones
    numerator factors.  The zero exponent vector is excluded (movability).
    """

    __slots__ = ("gens", "factors")

    def __init__(self, gens, factors=None):
        self.gens = gens
        zero = (0,) * gens.size
        out = {}
        for m, mult in (factors or {}).items():
            if not mult:
                continue
            if m == zero:
                raise NonMovableCharacter("bracket factor with zero exponent vector")
            out[m] = int(mult)
        self.factors = out

    def __eq__(self, other):
        return (isinstance(other, BracketProduct)
                and self.gens == other.gens and self.factors == other.factors)

    def __mul__(self, other):
        if self.gens != other.gens:
            raise GeneratorSetMismatch("bracket products over different generator sets")
        out = dict(self.factors)
        for m, mult in other.factors.items():
            n = out.get(m, 0) + mult
            if n:
                out[m] = n
            else:
                out.pop(m, None)
        return BracketProduct(self.gens, out)

    def key(self):
        return tuple(sorted(self.factors.items()))

    def as_character(self):
        """The stored plethystic preimage: sum of m * x over the factors."""
        return CharacterPolynomial(self.gens, {m: Fraction(c) for m, c in self.factors.items()})

    def num_denominator_factors(self):
        return sum(mult for mult in self.factors.values() if mult > 0)

    def expand_numerator(self):
        """Expand as a Laurent polynomial; requires all multiplicities <= 0."""
        return expand_bracket_product(self)

    def __repr__(self):
        if not self.factors:
            return "1"
        num = [(m, -c) for m, c in sorted(self.factors.items()) if c < 0]
        den = [(m, c) for m, c in sorted(self.factors.items()) if c > 0]

        def fmt(lst):
            return "*".join(
                f"<{_format_monomial(self.gens.names, m)}>" + (f"^{c}" if c != 1 else "")
                for m, c in lst) or "1"

        return fmt(num) + (" / " + fmt(den) if den else "")


def _half_vector(m, sign):
    """Doubled-exponent vector of x^(+-1/2) from the doubled vector of x."""
    out = []
    for e in m:
        # doubled exponent of x is e; x^(1/2) has doubled exponent e/2 * ... :
        # actual exponent of x is e/2, so x^(1/2) has actual e/4 -> doubled e/2.
        if e % 2:
            raise UnreducibleExponent("bracket of a genuinely half-integer monomial")
        out.append(sign * (e // 2))
    return tuple(out)


def plethystic(p):
    """Map a movable integer character to its bracket product,
    sending positive multiplicities to the denominator."""
    if not p.is_movable():
        raise NonMovableCharacter(f"constant term {p.constant_term()} present")
    factors = {}
    for m, c in p.terms.items():
        if c.denominator != 1:
            raise NonIntegerCoefficient(f"coefficient {c} is not an integer")
        factors[m] = int(c)
    return BracketProduct(p.gens, factors)


# ---------------------------------------------------------------------------
# univariate exact arithmetic in the mass variable (Laurent in M^(1/2))
# ---------------------------------------------------------------------------

class MassPoly:
    """Laurent polynomial in M^(1/2): dict doubled-exponent -> Fraction."""

    __slots__ = ("c",)

    def __init__(self, c=None):
        self.c = {k: v for k, v in (c or {}).items() if v}

    @classmethod
    def const(cls, v):
        v = Fraction(v)
        return cls({0: v} if v else {})

    @classmethod
    def bracket(cls, p):
        """<M^p> = M^(p/2) - M^(-p/2), p in doubled units of M^(1/2)."""
        if p == 0:
            return cls()
        return cls({p: Fraction(1), -p: Fraction(-1)})

    def __bool__(self):
        return bool(self.c)

    def __eq__(self, other):
        return isinstance(other, MassPoly) and self.c == other.c

    def __hash__(self):
        return hash(tuple(sorted(self.c.items())))

    def __add__(self, other):
        out = dict(self.c)
        for k, v in other.c.items():
            v2 = out.get(k, 0) + v
            if v2:
                out[k] = v2
            else:
                out.pop(k, None)
        return MassPoly(out)

    def __neg__(self):
        return MassPoly({k: -v for k, v in self.c.items()})

    def __sub__(self, other):
        return self + (-other)

    def __mul__(self, other):
        out = {}
        for k1, v1 in self.c.items():
            for k2, v2 in other.c.items():
                k = k1 + k2
                v = out.get(k, 0) + v1 * v2
                if v:
                    out[k] = v
                else:
                    out.pop(k, None)
        return MassPoly(out)

    def scale(self, s):
        s = Fraction(s)
        return MassPoly({k: s * v for k, v in self.c.items()}) if s else MassPoly()

    def exact_div(self, other):
        """Exact univariate division; raises InexactDivision otherwise."""
        if not other.c:
            raise ZeroDivisionError
        if not self.c:
            return MassPoly()
        a = dict(self.c)
        lead = max(other.c)
        min_e = min(a) - min(other.c)
        q = {}
        while a:
            ak = max(a)
            e = ak - lead
            if e < min_e:
                raise InexactDivision("mass polynomial division leaves a remainder")
            v = a[ak] / other.c[lead]
            q[e] = v
            for k, w in other.c.items():
                kk = k + e
                v2 = a.get(kk, 0) - v * w
                if v2:
                    a[kk] = v2
                else:
                    a.pop(kk, None)
        return MassPoly(q)

    def dual(self):
        return MassPoly({-k: v for k, v in self.c.items()})

    def items(self):
        return sorted(self.c.items())

    def __repr__(self):
        if not self.c:
            return "0"
        bits = []
        for k, v in sorted(self.c.items(), reverse=True):
            e = Fraction(k, 2)
            mono = "1" if e == 0 else ("M" if e == 1 else f"M^{e}")
            bits.append(f"{v}*{mono}" if mono != "1" else str(v))
        return " + ".join(bits)


class MassFraction:
    """``num / prod <M^p>^mult`` with num a MassPoly.

    Denominators are tracked as a multiset of bracket exponents (always
    normalized positive), never expanded, so addition needs no gcd.
    """

    __slots__ = ("num", "den")

    def __init__(self, num, den=None):
        self.num = num
        self.den = {k: v for k, v in (den or {}).items() if v} if num else {}

    @classmethod
    def const(cls, v):
        return cls(MassPoly.const(v))

    def is_zero(self):
        return not self.num

    def __add__(self, other):
        den = {}
        for k in set(self.den) | set(other.den):
            den[k] = max(self.den.get(k, 0), other.den.get(k, 0))

        def lift(f):
            num = f.num
            for k, p in den.items():
                for _ in range(p - f.den.get(k, 0)):
                    num = num * MassPoly.bracket(k)
            return num

        return MassFraction(lift(self) + lift(other), den)

    def __neg__(self):
        return MassFraction(-self.num, dict(self.den))

    def __mul__(self, other):
        den = dict(self.den)
        for k, p in other.den.items():
            den[k] = den.get(k, 0) + p
        return MassFraction(self.num * other.num, den)

    def scale(self, s):
        return MassFraction(self.num.scale(s), dict(self.den))

    def invert(self):
        """Inverse, peeling bracket factors out of the numerator.

        Only numerators that are (monomial) * (product of mass brackets)
        are invertible here; that covers every leading coefficient the
        series expansion produces."""
        num = MassPoly.const(1)
        for k, p in self.den.items():
            for _ in range(p):
                num = num * MassPoly.bracket(k)
        rem = MassPoly(dict(self.num.c))
        den = {}
        while len(rem.c) > 1:
            span = max(rem.c) - min(rem.c)
            for p in range(span, 0, -1):
                try:
                    rem2 = rem.exact_div(MassPoly.bracket(p))
                except InexactDivision:
                    continue
                den[p] = den.get(p, 0) + 1
                rem = rem2
                break
            else:
                raise InexactDivision(f"cannot invert series coefficient {self.num}")
        (k, v), = rem.c.items()
        return MassFraction(num * MassPoly({-k: 1 / v}), den)

    def as_polynomial(self):
        """Clear the bracket denominators exactly."""
        num = self.num
        for k, p in self.den.items():
            for _ in range(p):
                num = num.exact_div(MassPoly.bracket(k))
        return num

    def __repr__(self):
        if not self.den:
            return repr(self.num)
        den = "*".join(f"<M^{Fraction(k,2)}>^{p}" for k, p in sorted(self.den.items()))
        return f"({self.num}) / {den}"


class LimitSeries:
    """Truncated Laurent series in the limit parameter t.

    Coefficients are MassFraction values; the window [o_min, o_max]
    brackets the orders that are known exactly (orders below o_min are
    exact zeros).
    """

    __slots__ = ("o_min", "coeffs")

    def __init__(self, o_min, coeffs):
        self.o_min = o_min
        self.coeffs = list(coeffs)

    @property
    def o_max(self):
        return self.o_min + len(self.coeffs) - 1

    @classmethod
    def constant(cls, value, o_max):
        return cls(0, [MassFraction.const(value)] + [MassFraction.const(0)] * o_max)

    def coefficient(self, order):
        if order < self.o_min:
            return MassFraction.const(0)
        if order > self.o_max:
            raise ValueError(f"order {order} outside the window")
        return self.coeffs[order - self.o_min]

    def __add__(self, other):
        o = min(self.o_min, other.o_min)
        end = min(self.o_max, other.o_max)
        out = []
        for order in range(o, end + 1):
            c = MassFraction.const(0)
            if self.o_min <= order <= self.o_max:
                c = c + self.coeffs[order - self.o_min]
            if other.o_min <= order <= other.o_max:
                c = c + other.coeffs[order - other.o_min]
            out.append(c)
        return LimitSeries(o, out)

    def __mul__(self, other):
        o = self.o_min + other.o_min
        length = min(len(self.coeffs), len(other.coeffs))
        out = [MassFraction.const(0) for _ in range(length)]
        for i, ca in enumerate(self.coeffs):
            if ca.is_zero():
                continue
            for j, cb in enumerate(other.coeffs):
                if i + j >= length:
                    break
                if cb.is_zero():
                    continue
                out[i + j] = out[i + j] + ca * cb
        return LimitSeries(o, out)

    def invert(self):
        lead = self.coeffs[0]
        if lead.is_zero():
            raise ZeroDivisionError("series with vanishing leading coefficient")
        inv0 = lead.invert()
        out = [inv0]
        for n in range(1, len(self.coeffs)):
            s = MassFraction.const(0)
            for j in range(1, n + 1):
                cj = self.coeffs[j]
                if not cj.is_zero():
                    s = s + cj * out[n - j]
            out.append((inv0 * s).scale(-1))
        return LimitSeries(-self.o_min, out)

    def is_regular(self):
        return all(self.coeffs[i].is_zero()
                   for i in range(min(len(self.coeffs), -self.o_min)))

    def first_irregular_order(self):
        for i in range(min(len(self.coeffs), -self.o_min)):
            if not self.coeffs[i].is_zero():
                return self.o_min + i
        return None

    def polynomial_coefficient(self, order):
        """Coefficient at t^order as an exact MassPoly."""
        return self.coefficient(order).as_polynomial()

    def __repr__(self):
        return (f"LimitSeries(window=[{self.o_min},{self.o_max}], "
                f"coeffs={self.coeffs!r})")


def _bracket_factor_series(mass_exp, rate, length):
    """Series of <M^p e^(c t)> to the given length, orders 0..length-1.

    mass_exp is the doubled M-exponent of the factor's monomial; rate is
    the pairing of its torus exponents with the limit direction."""
    out = []
    f = Fraction(1)
    for j in range(length):
        if j:
            f *= Fraction(rate, 2) / j
        if mass_exp:
            coeff = MassPoly({mass_exp: f}) + MassPoly(
                {-mass_exp: f if j % 2 else -f})
        else:
            coeff = MassPoly({0: 2 * f}) if j % 2 else MassPoly()
        out.append(MassFraction(coeff))
    return out


def evaluate_limit(b, direction, window):
    """Expand a Coulomb-free bracket product along q_a -> exp(t * d_a).

    ``direction`` assigns an integer rate to every generator (mass rate
    must be 0; the mass stays formal).  ``window`` is (o_min, o_max).
    Raises NonGenericDirection if a mass-free factor's exponent vector
    pairs to zero with the direction.
    """
    gens = b.gens
    mass = gens.index("M") if "M" in gens.names else None
    o_min, o_max = window

    factors = []
    npoles = 0
    for m, mult in sorted(b.factors.items()):
        p = m[mass] if mass is not None else 0
        rate = sum(e * d for e, d in zip(m, direction))
        if p == 0 and rate == 0:
            raise NonGenericDirection(
                f"direction annihilates factor {_format_monomial(gens.names, m)}")
        if p == 0 and mult > 0:
            npoles += mult
        factors.append((p, rate, mult))

    length = (o_max - o_min) + 1 + npoles
    series = LimitSeries(0, [MassFraction.const(1)] + [MassFraction.const(0)] * (length - 1))
    for p, rate, mult in factors:
        atom_coeffs = _bracket_factor_series(p, rate, length)
        if p == 0:
            atom = LimitSeries(1, atom_coeffs[1:])
        else:
            atom = LimitSeries(0, atom_coeffs)
        if mult > 0:
            atom = atom.invert()
            for _ in range(mult):
                series = series * atom
        else:
            for _ in range(-mult):
                series = series * atom
    # clip to the requested window
    lo = max(series.o_min, o_min)
    coeffs = [series.coefficient(order) for order in range(lo, o_max + 1)]
    return LimitSeries(lo, coeffs)


def bracket_expansion(gens, m):
    """<x> = x^(1/2) - x^(-1/2) as a CharacterPolynomial, for the monomial
    with doubled exponent vector m."""
    return CharacterPolynomial(gens, {
        gens.reduce(_half_vector(m, +1)): Fraction(1),
        gens.reduce(_half_vector(m, -1)): Fraction(-1),
    })


def expand_bracket_product(b, coeff=Fraction(1)):
    """Expand coeff * (bracket product) as a CharacterPolynomial.

    Denominator factors are not expandable; use rational accumulation for
    those (see the engine)."""
    out = b.gens.one().scale(coeff)
    for m, mult in sorted(b.factors.items()):
        if mult > 0:
            raise InexactDivision("cannot expand a bracket denominator")
        out = out * bracket_expansion(b.gens, m) ** (-mult)
    return out
