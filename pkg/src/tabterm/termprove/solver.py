"""Bounded search for a symbol mapping satisfying eliminated constraints.

Each eliminated constraint is a disjunction of alternatives, each a
conjunction of ``poly >= bound`` conditions over symbols ranging in
``{0..k}``. Domains are kept as intervals and narrowed by bound
propagation: since all symbols are nonnegative, the largest value a
polynomial can take over a box is obtained by putting every positively
weighted monomial at its upper corner and every negative one at its lower.

The lexicographically least solution (in the fixed symbol order) is found
by fixing symbols one at a time to the smallest value that still admits
some solution; the feasibility test itself is a depth-first search with
a smallest-domain-first variable choice.
"""

from __future__ import annotations

from typing import Optional


class _Cond:
    __slots__ = ("terms", "bound", "syms")

    def __init__(self, poly, bound, index):
        self.terms = [(c, tuple(index[s] for s in m)) for m, c in poly.terms.items()]
        self.bound = bound
        self.syms = frozenset(i for _, m in self.terms for i in m)

    def maxval(self, lo, hi) -> int:
        total = 0
        for c, m in self.terms:
            dom = hi if c > 0 else lo
            v = c
            for i in m:
                v *= dom[i]
                if not v:
                    break
            total += v
        return total

    def possible(self, lo, hi) -> bool:
        return self.maxval(lo, hi) >= self.bound


class _Group:
    __slots__ = ("alts", "syms", "shared")

    def __init__(self, alts):
        self.alts = alts
        self.syms = [frozenset().union(*(c.syms for c in a)) if a else frozenset() for a in alts]
        # a symbol can only be narrowed if every alternative mentions it
        self.shared = frozenset.intersection(*self.syms) if self.syms else frozenset()


class Problem:
    def __init__(self, symbols, eliminated, k: int):
        self.symbols = list(symbols)
        self.index = {s: i for i, s in enumerate(self.symbols)}
        self.k = k
        self.groups = []
        self.unsat = False
        for e in eliminated:
            if not e.alternatives:
                self.unsat = True
                continue
            if any(not a.conditions for a in e.alternatives):
                continue
            alts = [[_Cond(p, b, self.index) for p, b in a.conditions] for a in e.alternatives]
            self.groups.append(_Group(alts))
        self.watch = [[] for _ in self.symbols]
        for gi, g in enumerate(self.groups):
            for s in frozenset().union(*g.syms):
                self.watch[s].append(gi)
        self.weight = [len(w) for w in self.watch]
        self.nodes = 0

    # --------------------------------------------------------- propagation
    def _alive(self, g, lo, hi):
        return [a for a in g.alts if all(c.possible(lo, hi) for c in a)]

    def _narrow(self, g, alive, lo, hi, changed) -> bool:
        if len(alive) == 1:
            syms = frozenset().union(*(c.syms for c in alive[0]))
        else:
            syms = frozenset.intersection(*(frozenset().union(*(c.syms for c in a)) for a in alive))
        for x in syms:
            while lo[x] < hi[x]:
                saved = hi[x]
                hi[x] = lo[x]
                ok = any(all(c.possible(lo, hi) for c in a) for a in alive)
                hi[x] = saved
                if ok:
                    break
                lo[x] += 1
                changed.add(x)
            while lo[x] < hi[x]:
                saved = lo[x]
                lo[x] = hi[x]
                ok = any(all(c.possible(lo, hi) for c in a) for a in alive)
                lo[x] = saved
                if ok:
                    break
                hi[x] -= 1
                changed.add(x)
        return True

    def propagate(self, lo, hi, touched=None) -> bool:
        queue = list(range(len(self.groups))) if touched is None else \
            sorted({gi for x in touched for gi in self.watch[x]})
        pending = set(queue)
        while queue:
            gi = queue.pop()
            pending.discard(gi)
            g = self.groups[gi]
            alive = self._alive(g, lo, hi)
            if not alive:
                return False
            changed: set = set()
            self._narrow(g, alive, lo, hi, changed)
            for x in changed:
                if lo[x] > hi[x]:
                    return False
                for gj in self.watch[x]:
                    if gj not in pending:
                        pending.add(gj)
                        queue.append(gj)
        return True

    # --------------------------------------------------------- search
    def feasible(self, lo, hi, limit: Optional[int] = None):
        """A solution within the given domains, or None."""
        lo, hi = list(lo), list(hi)
        if not self.propagate(lo, hi):
            return None
        return self._dfs(lo, hi)

    def _dfs(self, lo, hi):
        self.nodes += 1
        best, best_key = None, None
        for i in range(len(lo)):
            if lo[i] < hi[i] and self.weight[i]:
                key = (hi[i] - lo[i], -self.weight[i], i)
                if best_key is None or key < best_key:
                    best, best_key = i, key
        if best is None:
            return list(lo)     # unconstrained symbols sit at their lower bound
        for v in range(lo[best], hi[best] + 1):
            l2, h2 = list(lo), list(hi)
            l2[best] = h2[best] = v
            if self.propagate(l2, h2, (best,)):
                sol = self._dfs(l2, h2)
                if sol is not None:
                    return sol
        return None

    def solve(self) -> Optional[list]:
        if self.unsat:
            return None
        n = len(self.symbols)
        lo, hi = [0] * n, [self.k] * n
        if not self.propagate(lo, hi):
            return None
        model = self._dfs(list(lo), list(hi))
        if model is None:
            return None
        for i in range(n):
            for v in range(lo[i], model[i]):
                l2, h2 = list(lo), list(hi)
                l2[i] = h2[i] = v
                if self.propagate(l2, h2, (i,)):
                    sol = self._dfs(l2, h2)
                    if sol is not None:
                        model = sol
                        break
            lo[i] = hi[i] = model[i]
            if not self.propagate(lo, hi, (i,)):
                raise AssertionError("lost a solution while fixing symbols")
        return model


def solve(symbols, eliminated, k: int = 2) -> Optional[dict]:
    """Lexicographically least mapping into ``{0..k}`` or None.

    ``symbols`` fixes both the domain of the mapping and the order used
    for lexicographic comparison.
    """
    prob = Problem(symbols, eliminated, k)
    model = prob.solve()
    if model is None:
        return None
    return dict(zip(prob.symbols, model))


def satisfies(mapping: dict, eliminated) -> bool:
    """Direct evaluation: some alternative of every constraint holds."""
    for e in eliminated:
        if not any(all(p.evaluate(mapping) >= b for p, b in a.conditions) for a in e.alternatives):
            return False
    return True
