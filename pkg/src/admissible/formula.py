"""Boolean combinations of reach / infinitely-often atoms over graph nodes,
and the check that every infinite path of a graph satisfies one."""
from __future__ import annotations

import itertools
from collections import deque
from dataclasses import dataclass, field
from typing import Callable, Iterable, Sequence

from .kernels import Digraph


@dataclass(frozen=True)
class Const:
    value: bool

    def __str__(self):
        return "true" if self.value else "false"


TRUE = Const(True)
FALSE = Const(False)


@dataclass(frozen=True)
class Reach:
    """Some node of the set is visited (eventually)."""

    nodes: frozenset
    name: str = field(default="", compare=False)

    def __str__(self):
        return f"<>{self.name or _set_str(self.nodes)}"


@dataclass(frozen=True)
class InfOften:
    """Some node of the set is visited infinitely often."""

    nodes: frozenset
    name: str = field(default="", compare=False)

    def __str__(self):
        return f"[]<>{self.name or _set_str(self.nodes)}"


@dataclass(frozen=True)
class Not:
    arg: object

    def __str__(self):
        return f"!{_wrap(self.arg)}"


@dataclass(frozen=True)
class And:
    args: tuple

    def __str__(self):
        return " & ".join(_wrap(a) for a in self.args) if self.args else "true"


@dataclass(frozen=True)
class Or:
    args: tuple

    def __str__(self):
        return " | ".join(_wrap(a) for a in self.args) if self.args else "false"


@dataclass(frozen=True)
class Implies:
    left: object
    right: object

    def __str__(self):
        return f"{_wrap(self.left)} -> {_wrap(self.right)}"


def _set_str(nodes) -> str:
    return "{" + ", ".join(map(str, sorted(nodes, key=str))) + "}"


def _wrap(f) -> str:
    return f"({f})" if isinstance(f, (And, Or, Implies)) else str(f)


def atoms(f) -> list:
    """Distinct atoms in first-occurrence order."""
    out: list = []

    def walk(g):
        if isinstance(g, (Reach, InfOften)):
            if g not in out:
                out.append(g)
        elif isinstance(g, Not):
            walk(g.arg)
        elif isinstance(g, (And, Or)):
            for a in g.args:
                walk(a)
        elif isinstance(g, Implies):
            walk(g.left)
            walk(g.right)

    walk(f)
    return out


def holds(f, truth: Callable[[object], bool]) -> bool:
    if isinstance(f, Const):
        return f.value
    if isinstance(f, (Reach, InfOften)):
        return truth(f)
    if isinstance(f, Not):
        return not holds(f.arg, truth)
    if isinstance(f, And):
        return all(holds(a, truth) for a in f.args)
    if isinstance(f, Or):
        return any(holds(a, truth) for a in f.args)
    if isinstance(f, Implies):
        return not holds(f.left, truth) or holds(f.right, truth)
    raise TypeError(f"not a formula: {f!r}")


def eval_lasso(f, prefix: Sequence, cycle: Sequence) -> bool:
    """Truth of ``f`` on the run ``prefix . cycle^omega``."""
    if not cycle:
        raise ValueError("ill-formed lasso: empty cycle")
    seen = set(prefix) | set(cycle)
    inf = set(cycle)

    def truth(a):
        return bool(a.nodes & (seen if isinstance(a, Reach) else inf))

    return holds(f, truth)


def relabel(f, fn: Callable[[frozenset], Iterable]):
    """Replace every atom's node set by ``fn(nodes)``."""
    if isinstance(f, Reach):
        return Reach(frozenset(fn(f.nodes)), f.name)
    if isinstance(f, InfOften):
        return InfOften(frozenset(fn(f.nodes)), f.name)
    if isinstance(f, Not):
        return Not(relabel(f.arg, fn))
    if isinstance(f, And):
        return And(tuple(relabel(a, fn) for a in f.args))
    if isinstance(f, Or):
        return Or(tuple(relabel(a, fn) for a in f.args))
    if isinstance(f, Implies):
        return Implies(relabel(f.left, fn), relabel(f.right, fn))
    return f


def _merged_name(group: Sequence) -> str:
    """Name of a union of atoms: the names of the sets not contained in
    another one of the group (first one among equal sets)."""
    keep = []
    for i, a in enumerate(group):
        covered = any(a.nodes < b.nodes or (a.nodes == b.nodes and j < i)
                      for j, b in enumerate(group) if j != i)
        if not covered and a.name:
            keep.append(a.name)
    return "+".join(dict.fromkeys(keep))


def simplify(f):
    """Propositional clean-up that preserves truth on every run."""
    if isinstance(f, (Reach, InfOften)):
        return FALSE if not f.nodes else f
    if isinstance(f, Not):
        a = simplify(f.arg)
        if isinstance(a, Const):
            return Const(not a.value)
        if isinstance(a, Not):
            return a.arg
        return Not(a)
    if isinstance(f, Implies):
        left, right = simplify(f.left), simplify(f.right)
        if left == FALSE or right == TRUE:
            return TRUE
        if left == TRUE:
            return right
        if right == FALSE:
            return simplify(Not(left))
        if (isinstance(left, Reach) and isinstance(right, Reach) and left.nodes <= right.nodes
                or isinstance(left, InfOften) and isinstance(right, (Reach, InfOften))
                and left.nodes <= right.nodes):
            return TRUE
        if left == right:
            return TRUE
        return Implies(left, right)
    if isinstance(f, (And, Or)):
        unit, absorbing = (TRUE, FALSE) if isinstance(f, And) else (FALSE, TRUE)
        flat: list = []
        for a in (simplify(x) for x in f.args):
            if a == absorbing:
                return absorbing
            if a == unit:
                continue
            if type(a) is type(f):
                flat.extend(a.args)
            else:
                flat.append(a)
        if isinstance(f, Or):
            # <>X | <>Y == <>(X u Y), and likewise for []<>
            for kind in (Reach, InfOften):
                group = [a for a in flat if isinstance(a, kind)]
                if len(group) > 1:
                    merged = kind(frozenset().union(*(a.nodes for a in group)),
                                  _merged_name(group))
                    first = flat.index(group[0])
                    flat = [a for a in flat if not isinstance(a, kind)]
                    flat.insert(min(first, len(flat)), merged)
        out = []
        for a in flat:
            if a not in out:
                out.append(a)
        if not out:
            return unit
        if len(out) == 1:
            return out[0]
        return type(f)(tuple(out))
    return f


# -- universal check on a finite graph ---------------------------------------

@dataclass(frozen=True)
class Lasso:
    prefix: list
    cycle: list


def _bfs_path(succ, src, goal: Callable[[int], bool], inside=None, min_steps=0):
    """Node list from ``src`` to the first node satisfying ``goal`` (the
    goal node included, ``src`` excluded); None if unreachable."""
    if min_steps == 0 and goal(src):
        return []
    parent = {src: None}
    queue = deque([src])
    while queue:
        v = queue.popleft()
        for w in succ(v):
            if inside is not None and w not in inside:
                continue
            if goal(w):
                path = [w]
                u = v
                while u != src:
                    path.append(u)
                    u = parent[u]
                return path[::-1]
            if w not in parent:
                parent[w] = v
                queue.append(w)
    return None


def check_universal(succ: Sequence[Sequence[int]], formula, init: int = 0
                    ) -> tuple[bool, Lasso | None]:
    """Does every infinite path from ``init`` satisfy ``formula``?

    Searches for a violating path: the product of the graph with the set of
    reach atoms already satisfied is split into SCCs; inside each nontrivial
    SCC every truth assignment of the infinitely-often atoms that falsifies
    the formula is tried by keeping the nodes allowed by the assignment and
    looking for a sub-SCC meeting every set required to be visited.
    Returns ``(True, None)`` or ``(False, counterexample)``.
    """
    n = len(succ)
    for v in range(n):
        if not succ[v]:
            raise ValueError(f"dead-end node {v}")
    all_atoms = atoms(formula)
    reach = [a for a in all_atoms if isinstance(a, Reach)]
    inf = [a for a in all_atoms if isinstance(a, InfOften)]

    def bits_of(v: int) -> int:
        return sum(1 << k for k, a in enumerate(reach) if v in a.nodes)

    root = (init, bits_of(init))
    index = {root: 0}
    nodes = [root]
    adj: list[list[int]] = []
    k = 0
    while k < len(nodes):
        v, b = nodes[k]
        k += 1
        out = []
        for w in succ[v]:
            node = (w, b | bits_of(w))
            if node not in index:
                index[node] = len(nodes)
                nodes.append(node)
            out.append(index[node])
        adj.append(sorted(set(out)))
    g = Digraph(adj)
    members = [[v in a.nodes for a in inf] for v, _ in nodes]

    for comp in g.scc():
        if not g.is_nontrivial(comp):
            continue
        bits = nodes[comp[0]][1]
        for tau in itertools.product((False, True), repeat=len(inf)):
            truth = {a: bool(bits >> i & 1) for i, a in enumerate(reach)}
            truth.update(zip(inf, tau))
            if holds(formula, truth.__getitem__):
                continue
            allowed = bytearray(len(nodes))
            for x in comp:
                if not any(members[x][j] and not tau[j] for j in range(len(inf))):
                    allowed[x] = 1
            for sub in g.scc(allowed):
                if not g.is_nontrivial(sub):
                    continue
                need = [j for j in range(len(inf)) if tau[j]]
                if all(any(members[x][j] for x in sub) for j in need):
                    return False, _counterexample(g, nodes, sub, need, members)
    return True, None


def _counterexample(g: Digraph, nodes, sub, need, members) -> Lasso:
    inside = set(sub)

    def succ(v):
        return g.successors(v)

    start = sub[0]
    cycle = [start]
    cur = start
    for j in need:
        path = _bfs_path(succ, cur, lambda x, j=j: members[x][j], inside)
        cycle.extend(path)
        cur = cycle[-1]
    back = _bfs_path(succ, cur, lambda x: x == start, inside, min_steps=1)
    cycle.extend(back[:-1])
    prefix = [0] + _bfs_path(succ, 0, lambda x: x == start)
    prefix = prefix[:-1]
    return Lasso([nodes[v][0] for v in prefix], [nodes[v][0] for v in cycle])
