"""Dihedral Artin groups: Garside normal forms, center, centralizers, cosets.

A simple element is a prefix of one of the two alternating words of length
``m``; it is stored as ``(first, length)`` with ``first`` 0 for ``s`` and 1
for ``t``.  Length 0 is the identity and length ``m`` is the Garside element
``Delta``.  Every element has a unique left normal form
``Delta^p a_1 ... a_k`` with proper simples ``a_i`` and each pair
``(a_i, a_{i+1})`` left-weighted, which for two generators means the last
letter of ``a_i`` equals the first letter of ``a_{i+1}``.
"""

from __future__ import annotations

from collections import deque
from dataclasses import dataclass
from itertools import product
from typing import Dict, List, Optional, Tuple

from .words import Word

Simple = Tuple[int, int]
E: Simple = (0, 0)
SYLLABLE_BUDGET = 10**7


class BudgetExceeded(RuntimeError):
    pass


def _other(x: int) -> int:
    return 1 - x


@dataclass(frozen=True)
class GarsideElement:
    m: int
    delta_power: int = 0
    factors: Tuple[Simple, ...] = ()

    @property
    def canonical_length(self) -> int:
        return len(self.factors)

    @property
    def inf(self) -> int:
        return self.delta_power

    @property
    def sup(self) -> int:
        return self.delta_power + len(self.factors)

    @property
    def garside_length(self) -> int:
        """Word length over simples and their inverses."""
        if self.inf >= 0:
            return self.sup
        if self.sup <= 0:
            return -self.inf
        return self.sup - self.inf

    def is_identity(self) -> bool:
        return self.delta_power == 0 and not self.factors

    def degree(self) -> int:
        """Image under the length homomorphism s, t -> 1."""
        return self.delta_power * self.m + sum(L for _, L in self.factors)


class DihedralGroup:
    """The Artin group on two generators with one relation of length ``m``."""

    def __init__(self, m: int, names: Tuple[str, str] = ("s", "t")):
        if not isinstance(m, int) or m < 2:
            raise ValueError("dihedral Artin groups need a finite label m >= 2")
        if names[0] == names[1]:
            raise ValueError("generator names must differ")
        self.m = m
        self.names = tuple(names)

    def __repr__(self) -> str:
        return f"DihedralGroup(m={self.m}, names={self.names})"

    def __eq__(self, other) -> bool:
        return isinstance(other, DihedralGroup) and (self.m, self.names) == (other.m, other.names)

    def __hash__(self) -> int:
        return hash((self.m, self.names))

    # --- simples ---------------------------------------------------------

    def letter(self, name: str) -> int:
        try:
            return self.names.index(name)
        except ValueError:
            raise ValueError(f"{name!r} is not a generator of {self!r}") from None

    def last(self, a: Simple) -> int:
        first, length = a
        return first if length % 2 == 1 else _other(first)

    def tau(self, a: Simple) -> Simple:
        """Conjugation by Delta: a Delta = Delta tau(a)."""
        if self.m % 2 == 1 and a[1] > 0:
            return (_other(a[0]), a[1])
        return a

    def _simple(self, first: int, length: int) -> Simple:
        # identity and Delta have a single canonical encoding
        if length == 0:
            return E
        if length == self.m:
            return (0, self.m)
        return (first, length)

    def right_complement(self, a: Simple) -> Simple:
        """The simple c with a c = Delta."""
        if a[1] == 0:
            return (0, self.m)
        return self._simple(_other(self.last(a)), self.m - a[1])

    def left_complement(self, b: Simple) -> Simple:
        """The simple c with c b = Delta."""
        n = self.m - b[1]
        if n == 0:
            return E
        last = _other(b[0])
        return self._simple(last if n % 2 == 1 else _other(last), n)

    def normalize_pair(self, a: Simple, b: Simple) -> Tuple[Simple, Simple]:
        m = self.m
        if b[1] == 0:
            return a, E
        if a[1] == 0:
            return b, E
        if a[1] == m:
            return a, b
        if b[1] == m:
            return (0, m), self.tau(a)
        if self.last(a) == b[0]:
            return a, b
        total = a[1] + b[1]
        if total <= m:
            return self._simple(a[0], total), E
        rest_first = a[0] if m % 2 == 0 else _other(a[0])
        return (0, m), self._simple(rest_first, total - m)

    # --- elements --------------------------------------------------------

    def identity(self) -> GarsideElement:
        return GarsideElement(self.m)

    def delta(self, power: int = 1) -> GarsideElement:
        return GarsideElement(self.m, power, ())

    def generator(self, name: str, power: int = 1) -> GarsideElement:
        x = self.letter(name)
        out = self.identity()
        for _ in range(abs(power)):
            out = self.mul_simple(out, (x, 1)) if power > 0 else self.mul_simple_inverse(out, (x, 1))
        return out

    def _finish(self, power: int, factors: List[Simple]) -> GarsideElement:
        # sweep until every adjacent pair is stable, then peel Delta off the front
        changed = True
        while changed:
            changed = False
            for i in range(len(factors) - 2, -1, -1):
                pair = self.normalize_pair(factors[i], factors[i + 1])
                if pair != (factors[i], factors[i + 1]):
                    factors[i], factors[i + 1] = pair
                    changed = True
            while factors and factors[-1][1] == 0:
                factors.pop()
                changed = True
        while factors and factors[0][1] == self.m:
            factors.pop(0)
            power += 1
        return GarsideElement(self.m, power, tuple(factors))

    def mul_simple(self, x: GarsideElement, b: Simple) -> GarsideElement:
        return self._finish(x.delta_power, list(x.factors) + [b])

    def mul_delta(self, x: GarsideElement, k: int) -> GarsideElement:
        """x Delta^k."""
        factors = list(x.factors)
        if self.m % 2 == 1 and k % 2 == 1:
            factors = [self.tau(a) for a in factors]
        return GarsideElement(self.m, x.delta_power + k, tuple(factors))

    def mul_simple_inverse(self, x: GarsideElement, b: Simple) -> GarsideElement:
        # b^-1 = Delta^-1 c where c b = Delta
        shifted = self.mul_delta(x, -1)
        return self.mul_simple(shifted, self.left_complement(b))

    def mul(self, x: GarsideElement, y: GarsideElement) -> GarsideElement:
        out = self.mul_delta(x, y.delta_power)
        for b in y.factors:
            out = self.mul_simple(out, b)
        return out

    def inverse(self, x: GarsideElement) -> GarsideElement:
        out = self.identity()
        for a in reversed(x.factors):
            out = self.mul_simple_inverse(out, a)
        return self.mul_delta(out, -x.delta_power)

    def mul_letter(self, x: GarsideElement, name: str, sign: int) -> GarsideElement:
        a = (self.letter(name), 1)
        return self.mul_simple(x, a) if sign > 0 else self.mul_simple_inverse(x, a)

    def normal_form(self, w) -> GarsideElement:
        if isinstance(w, str):
            w = Word.parse(w)
        out = self.identity()
        for name, sign in w.letters():
            out = self.mul_letter(out, name, sign)
        return out

    def evaluate(self, w) -> GarsideElement:
        return self.normal_form(w)

    def equal(self, u, v) -> bool:
        return self.normal_form(u) == self.normal_form(v)

    # --- words -----------------------------------------------------------

    def simple_word(self, a: Simple) -> Word:
        first, length = a
        return Word.from_letters((self.names[first if i % 2 == 0 else _other(first)], 1) for i in range(length))

    def delta_word(self, power: int = 1) -> Word:
        return self.simple_word((0, self.m)) ** power

    def to_word(self, x: GarsideElement) -> Word:
        w = self.delta_word(x.delta_power)
        for a in x.factors:
            w = w * self.simple_word(a)
        return w

    def format(self, x: GarsideElement) -> str:
        parts = []
        if x.delta_power:
            parts.append("D" if x.delta_power == 1 else f"D^{x.delta_power}")
        parts.extend(str(self.simple_word(a)).replace(" ", "") for a in x.factors)
        return "·".join(parts) if parts else "1"

    # --- center and centralizers -----------------------------------------

    def center_generator(self) -> GarsideElement:
        return self.delta(1 if self.m % 2 == 0 else 2)

    def center_word(self) -> Word:
        return self.delta_word(1 if self.m % 2 == 0 else 2)

    def commutes(self, a, b) -> bool:
        x, y = self.normal_form(a), self.normal_form(b)
        return self.mul(x, y) == self.mul(y, x)

    def is_central(self, a) -> bool:
        x = self.normal_form(a) if not isinstance(a, GarsideElement) else a
        return all(self.mul(x, self.generator(n)) == self.mul(self.generator(n), x) for n in self.names)

    # --- syllable lemma ----------------------------------------------------

    def syllable_nontriviality_check(self, n: int, exponent_bound: int, budget: int = SYLLABLE_BUDGET) -> bool:
        """True iff no word s^i1 t^j1 ... s^in t^jn with exponents in [-E, E] minus 0 is trivial."""
        if not 1 <= n < self.m:
            raise ValueError(f"need 1 <= n < m, got n={n}, m={self.m}")
        if exponent_bound < 1:
            raise ValueError("exponent bound must be positive")
        exps = [k for k in range(-exponent_bound, exponent_bound + 1) if k != 0]
        if len(exps) ** (2 * n) > budget:
            raise BudgetExceeded(f"{len(exps)}^{2 * n} words exceed the budget {budget}")
        powers = [{k: self.generator(name, k) for k in exps} for name in self.names]

        # depth-first over prefixes so each prefix is normalized once
        stack = [(self.identity(), 0)]
        while stack:
            x, depth = stack.pop()
            if depth == 2 * n:
                if x.is_identity():
                    return False
                continue
            for k in exps:
                stack.append((self.mul(x, powers[depth % 2][k]), depth + 1))
        return True

    def syllable_counterexample(self, n: int, exponent_bound: int) -> Optional[Word]:
        exps = [k for k in range(-exponent_bound, exponent_bound + 1) if k != 0]
        for combo in product(exps, repeat=2 * n):
            w = Word(tuple((self.names[i % 2], k) for i, k in enumerate(combo)))
            if self.normal_form(w).is_identity():
                return w
        return None

    # --- cosets of A_s, A_t -----------------------------------------------

    def coset_key(self, h: GarsideElement, side: str) -> GarsideElement:
        """Canonical representative of h A_side."""
        x = self.letter(side)
        while h.factors:
            last = h.factors[-1]
            if self.last(last) == x:
                h = self.mul_simple_inverse(h, (x, 1))
            elif last[1] == self.m - 1:
                h = self.mul_simple(h, (x, 1))
            else:
                break
        return h

    def in_cyclic(self, elem: GarsideElement, side: str) -> bool:
        """Whether elem is a power of the generator ``side``."""
        # positive powers x^k have normal form (x)(x)...(x) with no Delta
        if elem.degree() < 0:
            elem = self.inverse(elem)
        return elem.delta_power == 0 and elem.factors == ((self.letter(side), 1),) * elem.degree()

    def same_coset(self, h: GarsideElement, h2: GarsideElement, side: str) -> bool:
        return self.in_cyclic(self.mul(self.inverse(h), h2), side)

    def simples(self, include_delta: bool = True) -> List[Simple]:
        out = [(f, L) for L in range(1, self.m) for f in (0, 1)]
        if include_delta:
            out.append((0, self.m))
        return out

    def ball(self, radius: int) -> Dict[GarsideElement, int]:
        """All elements of Garside length <= radius, with their lengths (breadth-first)."""
        start = self.identity()
        dist = {start: 0}
        queue = deque([start])
        gens = self.simples()
        while queue:
            x = queue.popleft()
            if dist[x] == radius:
                continue
            for b in gens:
                for y in (self.mul_simple(x, b), self.mul_simple_inverse(x, b)):
                    if y not in dist:
                        dist[y] = dist[x] + 1
                        queue.append(y)
        return dist

    def enumerate_cosets(self, side: str, radius: int) -> List[GarsideElement]:
        """Distinct cosets h A_side with a representative of Garside length <= radius."""
        if radius < 0:
            raise ValueError("radius must be non-negative")
        keys = {}
        for h, _ in sorted(self.ball(radius).items(), key=lambda kv: (kv[1], _order_key(kv[0]))):
            keys.setdefault(self.coset_key(h, side), h)
        return sorted(keys, key=_order_key)


def _order_key(x: GarsideElement):
    return (x.garside_length, x.delta_power, x.factors)
