"""Canonical forms: exact multivariate rational functions over kernels.

An expression canonicalizes to a pair of polynomials (numerator and
denominator) with Fraction coefficients over a generator set consisting
of variables, parameters, and irreducible transcendental kernels
(``exp``, ``log``, ``sin``, ``cos``, fractional powers) whose arguments
are themselves canonical expressions.  Two rational combinations of the
same kernels are semantically equal iff they produce identical pairs.

Normalization invariants:
  * gcd(num, den) = 1 (multivariate polynomial gcd over the generators),
  * den is monic under the term order (total degree, then lexicographic
    on generator names),
  * exp of a sum splits into a product of per-term kernels with the
    rational content folded into an integer kernel power, so exponent
    laws hold by construction,
  * fractional-power kernels always carry exponent 1, and cos appears
    to at most the first power (cos^2 rewrites to 1 - sin^2).

Everything here is pure and exact; soundness of the zero certificate
rests on each rewrite preserving semantics at every defined point.
"""

from __future__ import annotations

import functools
from fractions import Fraction
from typing import Optional

from .expr import (
    Binary,
    Const,
    DerivAtom,
    DerivGroup,
    Expr,
    Param,
    Unary,
    Var,
    format_expr,
)

Mono = tuple[tuple[Expr, int], ...]  # sorted by generator key, exponents > 0
Poly = dict[Mono, Fraction]

_ONE_MONO: Mono = ()


class RF:
    """Rational function in fully normalized form."""

    __slots__ = ("num", "den")

    def __init__(self, num: Poly, den: Poly):
        self.num = num
        self.den = den

    def is_zero(self) -> bool:
        return not self.num

    def is_const(self) -> Optional[Fraction]:
        if not self.num:
            return Fraction(0)
        if self.den == P_ONE and len(self.num) == 1 and _ONE_MONO in self.num:
            return self.num[_ONE_MONO]
        return None

    def __eq__(self, other) -> bool:
        return isinstance(other, RF) and self.num == other.num and self.den == other.den

    def __repr__(self) -> str:
        return f"RF({self.num!r} / {self.den!r})"


P_ZERO: Poly = {}
P_ONE: Poly = {_ONE_MONO: Fraction(1)}


class ZeroDenominator(ArithmeticError):
    """Division by a polynomial that is identically zero."""


# ---------------------------------------------------------------------------
# Generator ordering
# ---------------------------------------------------------------------------

@functools.lru_cache(maxsize=1 << 16)
def _gen_key(g: Expr) -> tuple[int, str]:
    if isinstance(g, Var):
        return (0, g.name)
    if isinstance(g, Param):
        return (1, g.name)
    if isinstance(g, DerivAtom):
        return (2, format_expr(g))
    return (3, format_expr(g))


def _mono_sorted(pairs) -> Mono:
    return tuple(sorted(pairs, key=lambda p: _gen_key(p[0])))


def _mono_degree(m: Mono) -> int:
    return sum(n for _, n in m)


def _mono_cmp(a: Mono, b: Mono) -> int:
    """Graded lexicographic order; generators earlier in key order are
    more significant."""
    da, db = _mono_degree(a), _mono_degree(b)
    if da != db:
        return -1 if da < db else 1
    for (ga, na), (gb, nb) in zip(a, b):
        ka, kb = _gen_key(ga), _gen_key(gb)
        if ka != kb:
            # whichever monomial has positive exponent on the more
            # significant generator is larger
            return 1 if ka < kb else -1
        if na != nb:
            return 1 if na > nb else -1
    if len(a) != len(b):  # unreachable when degrees match, kept for safety
        return 1 if len(a) > len(b) else -1
    return 0


_MONO_KEY = functools.cmp_to_key(_mono_cmp)


def sorted_terms(p: Poly) -> list[tuple[Mono, Fraction]]:
    """Terms in descending order, leading term first."""
    return sorted(p.items(), key=lambda kv: _MONO_KEY(kv[0]), reverse=True)


def leading_term(p: Poly) -> tuple[Mono, Fraction]:
    m = max(p, key=_MONO_KEY)
    return m, p[m]


# ---------------------------------------------------------------------------
# Polynomial arithmetic
# ---------------------------------------------------------------------------

def mono_mul(a: Mono, b: Mono) -> Mono:
    if not a:
        return b
    if not b:
        return a
    d: dict[Expr, int] = dict(a)
    for g, n in b:
        d[g] = d.get(g, 0) + n
    return _mono_sorted(d.items())


def p_const(c) -> Poly:
    c = Fraction(c)
    return {_ONE_MONO: c} if c else {}


def p_gen(g: Expr, n: int = 1) -> Poly:
    return {((g, n),): Fraction(1)}


def p_add(a: Poly, b: Poly) -> Poly:
    out = dict(a)
    for m, c in b.items():
        s = out.get(m, Fraction(0)) + c
        if s:
            out[m] = s
        else:
            out.pop(m, None)
    return out


def p_neg(a: Poly) -> Poly:
    return {m: -c for m, c in a.items()}


def p_sub(a: Poly, b: Poly) -> Poly:
    return p_add(a, p_neg(b))


def p_scale(a: Poly, c) -> Poly:
    c = Fraction(c)
    if not c:
        return {}
    return {m: cc * c for m, cc in a.items()}


def p_mul(a: Poly, b: Poly) -> Poly:
    if not a or not b:
        return {}
    out: Poly = {}
    for ma, ca in a.items():
        for mb, cb in b.items():
            m = mono_mul(ma, mb)
            s = out.get(m, Fraction(0)) + ca * cb
            if s:
                out[m] = s
            else:
                out.pop(m, None)
    return out


def p_pow(a: Poly, n: int) -> Poly:
    assert n >= 0
    out = P_ONE
    base = a
    while n:
        if n & 1:
            out = p_mul(out, base)
        base = p_mul(base, base) if n > 1 else base
        n >>= 1
    return out


def p_generators(p: Poly) -> list[Expr]:
    gens: set[Expr] = set()
    for m in p:
        for g, _ in m:
            gens.add(g)
    return sorted(gens, key=_gen_key)


# ---------------------------------------------------------------------------
# Exact division and gcd (primitive PRS in a main generator)
# ---------------------------------------------------------------------------

def p_divexact(f: Poly, g: Poly) -> Poly:
    """Divide f by g assuming the division is exact."""
    if not f:
        return {}
    assert g, "division by zero polynomial"
    q: Poly = {}
    rem = dict(f)
    gm, gc = leading_term(g)
    gset = dict(gm)
    while rem:
        fm, fc = leading_term(rem)
        fset = dict(fm)
        qm_pairs = []
        for gen, n in gset.items():
            have = fset.get(gen, 0)
            if have < n:
                raise ArithmeticError("inexact polynomial division")
            if have > n:
                qm_pairs.append((gen, have - n))
        for gen, n in fset.items():
            if gen not in gset:
                qm_pairs.append((gen, n))
        qm = _mono_sorted(qm_pairs)
        qc = fc / gc
        q[qm] = qc
        rem = p_sub(rem, p_mul({qm: qc}, g))
    return q


def _as_univariate(p: Poly, g: Expr) -> dict[int, Poly]:
    out: dict[int, Poly] = {}
    for m, c in p.items():
        deg = 0
        rest = []
        for gen, n in m:
            if gen == g:
                deg = n
            else:
                rest.append((gen, n))
        coeff = out.setdefault(deg, {})
        rm = _mono_sorted(rest)
        s = coeff.get(rm, Fraction(0)) + c
        if s:
            coeff[rm] = s
        else:
            coeff.pop(rm, None)
    return {d: c for d, c in out.items() if c}


def _from_univariate(u: dict[int, Poly], g: Expr) -> Poly:
    out: Poly = {}
    for deg, coeff in u.items():
        gp = p_gen(g, deg) if deg else P_ONE
        out = p_add(out, p_mul(coeff, gp))
    return out


def _uni_pseudo_rem(f: dict[int, Poly], g: dict[int, Poly]) -> dict[int, Poly]:
    df, dg = max(f), max(g)
    lg = g[dg]
    r = dict(f)
    while r and max(r) >= dg:
        dr = max(r)
        lr = r[dr]
        # r := lg*r - lr*x^(dr-dg)*g
        nr: dict[int, Poly] = {}
        for d, c in r.items():
            nr[d] = p_mul(c, lg)
        for d, c in g.items():
            shifted = d + dr - dg
            nr[shifted] = p_sub(nr.get(shifted, {}), p_mul(c, lr))
        r = {d: c for d, c in nr.items() if c}
    return r


def _poly_content(u: dict[int, Poly]) -> Poly:
    g: Poly = {}
    for c in u.values():
        g = p_gcd(g, c)
        if g == P_ONE:
            return g
    return g if g else P_ONE


def _mono_content(p: Poly) -> Mono:
    """Largest monomial dividing every term of p."""
    common: Optional[dict[Expr, int]] = None
    for m in p:
        if common is None:
            common = dict(m)
        else:
            d = dict(m)
            common = {g: min(n, d[g]) for g, n in common.items() if g in d}
        if not common:
            return _ONE_MONO
    return _mono_sorted(common.items()) if common else _ONE_MONO


def p_gcd(a: Poly, b: Poly) -> Poly:
    """Multivariate gcd, normalized with positive monic-leading content."""
    if not a:
        g = b
    elif not b:
        g = a
    else:
        g = _gcd_core(a, b)
    if not g:
        return {}
    _, lc = leading_term(g)
    return p_scale(g, 1 / lc)


def _gcd_core(a: Poly, b: Poly) -> Poly:
    if _ONE_MONO in a and len(a) == 1:
        return P_ONE
    if _ONE_MONO in b and len(b) == 1:
        return P_ONE
    ma, mb = _mono_content(a), _mono_content(b)
    db = dict(mb)
    mshared = _mono_sorted((g, min(n, db[g])) for g, n in ma if g in db)
    if ma != _ONE_MONO:
        a = p_divexact(a, {ma: Fraction(1)})
    if mb != _ONE_MONO:
        b = p_divexact(b, {mb: Fraction(1)})
    shared_poly: Poly = {mshared: Fraction(1)}
    gens = sorted(set(p_generators(a)) | set(p_generators(b)), key=_gen_key)
    if not gens:
        return shared_poly
    main = gens[-1]
    fa, fb = _as_univariate(a, main), _as_univariate(b, main)
    ca, cb = _poly_content(fa), _poly_content(fb)
    pa = {d: p_divexact(c, ca) for d, c in fa.items()}
    pb = {d: p_divexact(c, cb) for d, c in fb.items()}
    ccontent = _gcd_core(ca, cb) if (ca != P_ONE or cb != P_ONE) else P_ONE
    # primitive PRS
    f, g = (pa, pb) if max(pa) >= max(pb) else (pb, pa)
    while g:
        r = _uni_pseudo_rem(f, g)
        if not r:
            break
        rc = _poly_content(r)
        r = {d: p_divexact(c, rc) for d, c in r.items()}
        f, g = g, r
    core = P_ONE if max(g) == 0 else _from_univariate(g, main)
    return p_mul(shared_poly, p_mul(ccontent, core))


# ---------------------------------------------------------------------------
# Rational functions
# ---------------------------------------------------------------------------

RF_ZERO: "RF"
RF_ONE: "RF"


def make_rf(num: Poly, den: Poly) -> RF:
    """Reduce kernels, cancel the gcd, and scale the denominator monic."""
    if not den:
        raise ZeroDenominator
    nn, nd = _reduce_poly(num)
    dn, dd = _reduce_poly(den)
    num = p_mul(nn, dd)
    den = p_mul(dn, nd)
    if not den:
        raise ZeroDenominator
    if not num:
        return RF({}, dict(P_ONE))
    g = p_gcd(num, den)
    if g != P_ONE:
        num = p_divexact(num, g)
        den = p_divexact(den, g)
    _, lc = leading_term(den)
    if lc != 1:
        num = p_scale(num, 1 / lc)
        den = p_scale(den, 1 / lc)
    return RF(num, den)


def _is_reducible_gen(g: Expr, n: int) -> bool:
    if isinstance(g, Binary) and g.op == "pow":
        return n >= 2  # fractional-power kernels carry exponent 1
    if isinstance(g, Unary) and g.op == "cos":
        return n >= 2  # cos^2 -> 1 - sin^2
    return False


def _reduce_poly(p: Poly, depth: int = 0) -> tuple[Poly, Poly]:
    """Rewrite reducible kernel powers; returns (num, den)."""
    if depth > 32:  # safety valve; leaves a sound but less canonical form
        return p, dict(P_ONE)
    plain: Poly = {}
    pending: list[tuple[Mono, Fraction]] = []
    for m, c in p.items():
        if any(_is_reducible_gen(g, n) for g, n in m):
            pending.append((m, c))
        else:
            s = plain.get(m, Fraction(0)) + c
            if s:
                plain[m] = s
            else:
                plain.pop(m, None)
    if not pending:
        return p, dict(P_ONE)
    num, den = plain, dict(P_ONE)
    for m, c in pending:
        tn, td = _reduce_mono(m, depth)
        # num/den + c*tn/td
        num = p_add(p_mul(num, td), p_scale(p_mul(tn, den), c))
        den = p_mul(den, td)
    rn, rd = _reduce_poly(num, depth + 1)
    return rn, p_mul(den, rd)


def _reduce_mono(m: Mono, depth: int) -> tuple[Poly, Poly]:
    num, den = dict(P_ONE), dict(P_ONE)
    rest: list[tuple[Expr, int]] = []
    for g, n in m:
        if isinstance(g, Binary) and g.op == "pow" and n >= 2:
            frac = g.right.value  # Const by construction, 0 < frac < 1
            total = frac * n
            whole, part = divmod(total.numerator, total.denominator)
            base_rf = canon(g.left)
            if whole:
                num = p_mul(num, p_pow(base_rf.num, whole))
                den = p_mul(den, p_pow(base_rf.den, whole))
            if part:
                num = p_mul(num, p_gen(Binary("pow", g.left, Const(Fraction(part, total.denominator)))))
        elif isinstance(g, Unary) and g.op == "cos" and n >= 2:
            half, odd = divmod(n, 2)
            one_minus = p_sub(dict(P_ONE), p_gen(Unary("sin", g.child), 2))
            num = p_mul(num, p_pow(one_minus, half))
            if odd:
                rest.append((g, 1))
        else:
            rest.append((g, n))
    if rest:
        num = p_mul(num, {_mono_sorted(rest): Fraction(1)})
    rn, rd = _reduce_poly(num, depth + 1)
    return rn, p_mul(den, rd)


def rf_const(c) -> RF:
    return RF(p_const(c), dict(P_ONE))


def rf_gen(g: Expr, n: int = 1) -> RF:
    if n >= 0:
        return make_rf(p_gen(g, n) if n else dict(P_ONE), dict(P_ONE))
    return make_rf(dict(P_ONE), p_gen(g, -n))


def rf_add(a: RF, b: RF) -> RF:
    return make_rf(
        p_add(p_mul(a.num, b.den), p_mul(b.num, a.den)), p_mul(a.den, b.den)
    )


def rf_neg(a: RF) -> RF:
    return RF(p_neg(a.num), a.den)


def rf_sub(a: RF, b: RF) -> RF:
    return rf_add(a, rf_neg(b))


def rf_mul(a: RF, b: RF) -> RF:
    return make_rf(p_mul(a.num, b.num), p_mul(a.den, b.den))


def rf_div(a: RF, b: RF) -> RF:
    if b.is_zero():
        raise ZeroDenominator
    return make_rf(p_mul(a.num, b.den), p_mul(a.den, b.num))


def rf_ipow(a: RF, n: int) -> RF:
    if n == 0:
        return rf_const(1)
    if n < 0:
        if a.is_zero():
            raise ZeroDenominator
        return make_rf(p_pow(a.den, -n), p_pow(a.num, -n))
    return make_rf(p_pow(a.num, n), p_pow(a.den, n))


# ---------------------------------------------------------------------------
# Expression -> canonical form
# ---------------------------------------------------------------------------

def canon(e: Expr) -> RF:
    if isinstance(e, Const):
        return rf_const(e.value)
    if isinstance(e, (Var, Param, DerivAtom)):
        return rf_gen(e)
    if isinstance(e, DerivGroup):
        return rf_gen(DerivGroup(e.orders, rf_to_expr(canon(e.child))))
    if isinstance(e, Unary):
        if e.op == "neg":
            return rf_neg(canon(e.child))
        arg = canon(e.child)
        if e.op == "exp":
            return _canon_exp(arg)
        if e.op == "log":
            return _canon_log(arg)
        if e.op in ("sin", "cos"):
            return _canon_trig(e.op, arg)
        if e.op == "sqrt":
            return _canon_pow(arg, Fraction(1, 2))
    assert isinstance(e, Binary)
    if e.op == "add":
        return rf_add(canon(e.left), canon(e.right))
    if e.op == "sub":
        return rf_sub(canon(e.left), canon(e.right))
    if e.op == "mul":
        return rf_mul(canon(e.left), canon(e.right))
    if e.op == "div":
        l, r = canon(e.left), canon(e.right)
        try:
            return rf_div(l, r)
        except ZeroDenominator:
            return rf_gen(Binary("div", rf_to_expr(l), Const(0)))
    # pow
    base = canon(e.left)
    expo = canon(e.right)
    c = expo.is_const()
    if c is None:
        return rf_gen(Binary("pow", rf_to_expr(base), rf_to_expr(expo)))
    try:
        if c.denominator == 1:
            return rf_ipow(base, c.numerator)
        return _canon_pow(base, c)
    except ZeroDenominator:
        return rf_gen(Binary("div", Const(1), Const(0)))


def _exp_term(coeff: Fraction, mono_rf: RF) -> RF:
    """exp(coeff * mono_rf) as an integer power of a content-free kernel."""
    p, r = coeff.numerator, coeff.denominator
    base = rf_mul(mono_rf, rf_const(Fraction(1, r)))
    gen = Unary("exp", rf_to_expr(base))
    return rf_gen(gen, p)


def _canon_exp(arg: RF) -> RF:
    if arg.is_zero():
        return rf_const(1)
    out = rf_const(1)
    den_rf = RF(arg.den, dict(P_ONE))
    for m, c in sorted_terms(arg.num):
        mono_rf = rf_div(RF({m: Fraction(1)}, dict(P_ONE)), den_rf)
        out = rf_mul(out, _exp_term(c, mono_rf))
    return out


def _canon_log(arg: RF) -> RF:
    c = arg.is_const()
    if c == 1:
        return rf_const(0)
    if arg.den == P_ONE and len(arg.num) == 1:
        (m, coeff), = arg.num.items()
        if coeff == 1 and m and all(
            isinstance(g, Unary) and g.op == "exp" for g, _ in m
        ):
            out = rf_const(0)
            for g, n in m:
                out = rf_add(out, rf_mul(rf_const(n), canon(g.child)))
            return out
    return rf_gen(Unary("log", rf_to_expr(arg)))


def _canon_trig(op: str, arg: RF) -> RF:
    if arg.is_zero():
        return rf_const(0) if op == "sin" else rf_const(1)
    _, lc = leading_term(arg.num)
    flip = lc < 0
    if flip:
        arg = rf_neg(arg)
    gen = Unary(op, rf_to_expr(arg))
    out = rf_gen(gen)
    if flip and op == "sin":
        out = rf_neg(out)
    return out


def _nth_root(c: Fraction, q: int) -> Optional[Fraction]:
    if c < 0:
        return None

    def iroot(n: int) -> Optional[int]:
        if n in (0, 1):
            return n
        r = round(n ** (1.0 / q))
        for cand in (r - 1, r, r + 1):
            if cand >= 0 and cand**q == n:
                return cand
        return None

    rn, rd = iroot(c.numerator), iroot(c.denominator)
    if rn is None or rd is None:
        return None
    return Fraction(rn, rd)


def _canon_pow(base: RF, expo: Fraction) -> RF:
    assert expo.denominator > 1
    if base.is_zero():
        if expo > 0:
            return RF({}, dict(P_ONE))
        raise ZeroDenominator
    c = base.is_const()
    if c is not None:
        root = _nth_root(c, expo.denominator)
        if root is not None:
            return rf_ipow(rf_const(root), expo.numerator)
    whole, rem = divmod(expo.numerator, expo.denominator)
    out = rf_ipow(base, whole) if whole else rf_const(1)
    if rem:
        gen = Binary("pow", rf_to_expr(base), Const(Fraction(rem, expo.denominator)))
        out = rf_mul(out, rf_gen(gen))
    return out


# ---------------------------------------------------------------------------
# Canonical form -> expression
# ---------------------------------------------------------------------------

def _gen_power_expr(g: Expr, n: int) -> Expr:
    if isinstance(g, Binary) and g.op == "pow" and n > 1:
        # merge integer power into the fractional exponent
        return Binary("pow", g.left, Const(g.right.value * n))
    return g if n == 1 else Binary("pow", g, Const(n))


def _term_expr(coeff: Fraction, m: Mono) -> Expr:
    factors: list[Expr] = []
    if coeff != 1 or not m:
        factors.append(Const(coeff))
    for g, n in m:
        factors.append(_gen_power_expr(g, n))
    out = factors[0]
    for f in factors[1:]:
        out = Binary("mul", out, f)
    return out


def poly_to_expr(p: Poly) -> Expr:
    if not p:
        return Const(0)
    out: Optional[Expr] = None
    for m, c in sorted_terms(p):
        if out is None:
            out = _term_expr(c, m)
        elif c < 0:
            out = Binary("sub", out, _term_expr(-c, m))
        else:
            out = Binary("add", out, _term_expr(c, m))
    return out


def rf_to_expr(rf: RF) -> Expr:
    num = poly_to_expr(rf.num)
    if rf.den == P_ONE:
        return num
    return Binary("div", num, poly_to_expr(rf.den))
