"""Least/greatest fixpoints over a :class:`~admissible.kernels.MoveGraph`.

All sets are ``bytearray`` masks; iteration order is fixed so results (and
the layer numbering used for strategy extraction) are reproducible.
"""
from __future__ import annotations

from .kernels import MoveGraph


def union(a: bytearray, b: bytearray) -> bytearray:
    return bytearray(x | y for x, y in zip(a, b))


def intersect(a: bytearray, b: bytearray) -> bytearray:
    return bytearray(x & y for x, y in zip(a, b))


def complement(a: bytearray) -> bytearray:
    return bytearray(1 - x for x in a)


def full(n: int) -> bytearray:
    return bytearray(b"\x01") * n


def attractor(g: MoveGraph, target: bytearray, kind: int,
              within: bytearray | None = None) -> tuple[bytearray, list[int]]:
    """mu X. target | (within & pre_kind(X)).

    Also returns the layer at which each node entered (``-1`` if never).
    """
    X = bytearray(target)
    layer = [0 if x else -1 for x in X]
    k = 0
    while True:
        k += 1
        step = g.pre(kind, X)
        if within is not None:
            step = intersect(step, within)
        grown = False
        for v in range(g.n):
            if step[v] and not X[v]:
                X[v] = 1
                layer[v] = k
                grown = True
        if not grown:
            return X, layer


def invariant(g: MoveGraph, safe: bytearray, kind: int) -> bytearray:
    """nu X. safe & pre_kind(X)."""
    X = bytearray(safe)
    while True:
        nxt = intersect(safe, g.pre(kind, X))
        if nxt == X:
            return X
        X = nxt


def recurrence(g: MoveGraph, accepting: bytearray, kind: int) -> bytearray:
    """nu Z. mu X. (accepting & pre(Z)) | pre(X) -- Buchi winning region."""
    Z = full(g.n)
    while True:
        seed = intersect(accepting, g.pre(kind, Z))
        X, _ = attractor(g, seed, kind)
        if X == Z:
            return Z
        Z = X


def almost_sure_reach(g: MoveGraph, target: bytearray, rows_random: bool = True
                      ) -> bytearray:
    """nu Y. mu X. target | apre(Y, X).

    With ``rows_random`` the row player randomises against adversarial
    columns (concurrent almost-sure reachability); otherwise a column player
    picks columns and every row may occur (an MDP controlled by columns).
    """
    apre = g.apre_rows if rows_random else g.apre_cols
    Y = full(g.n)
    while True:
        X = bytearray(target)
        while True:
            nxt = union(target, apre(Y, X))
            if nxt == X:
                break
            X = nxt
        if X == Y:
            return Y
        Y = X


def almost_sure_layers(g: MoveGraph, target: bytearray, region: bytearray
                       ) -> list[int]:
    """Layer index of each node of ``region`` in mu X. target | apre(region, X)."""
    X = bytearray(target)
    layer = [0 if x else -1 for x in X]
    k = 0
    while True:
        k += 1
        step = g.apre_rows(region, X)
        grown = False
        for v in range(g.n):
            if step[v] and not X[v]:
                X[v] = 1
                layer[v] = k
                grown = True
        if not grown:
            return layer
