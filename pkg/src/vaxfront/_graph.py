"""Digraph primitives shared by the spectral and structure modules."""

from __future__ import annotations


def tarjan_sccs(successors) -> list[list[int]]:
    """Strongly connected components, iterative Tarjan.

    Components are returned sorted by their smallest member, each component
    itself sorted.
    """
    n = len(successors)
    index = [-1] * n
    low = [0] * n
    on_stack = [False] * n
    stack: list[int] = []
    sccs: list[list[int]] = []
    counter = 0
    for root in range(n):
        if index[root] != -1:
            continue
        work = [(root, 0)]
        while work:
            v, child = work[-1]
            if child == 0:
                index[v] = low[v] = counter
                counter += 1
                stack.append(v)
                on_stack[v] = True
            advanced = False
            for k in range(child, len(successors[v])):
                w = successors[v][k]
                if index[w] == -1:
                    work[-1] = (v, k + 1)
                    work.append((w, 0))
                    advanced = True
                    break
                if on_stack[w]:
                    low[v] = min(low[v], index[w])
            if advanced:
                continue
            work.pop()
            if work:
                parent = work[-1][0]
                low[parent] = min(low[parent], low[v])
            if low[v] == index[v]:
                comp = []
                while True:
                    w = stack.pop()
                    on_stack[w] = False
                    comp.append(w)
                    if w == v:
                        break
                sccs.append(sorted(comp))
    sccs.sort(key=lambda comp: comp[0])
    return sccs


def condensation_topological(sccs, successors) -> list[int]:
    """Kahn topological order of the condensation, smallest-member tie-break.

    Edges keep their direction, so with infector -> infectee successor lists
    the order starts at infection sources.
    """
    comp_of = {}
    for ci, comp in enumerate(sccs):
        for v in comp:
            comp_of[v] = ci
    out = [set() for _ in sccs]
    indeg = [0] * len(sccs)
    for v in range(len(successors)):
        for w in successors[v]:
            a, b = comp_of[v], comp_of[w]
            if a != b and b not in out[a]:
                out[a].add(b)
                indeg[b] += 1
    ready = sorted(
        (ci for ci in range(len(sccs)) if indeg[ci] == 0),
        key=lambda ci: sccs[ci][0],
    )
    order = []
    while ready:
        ci = ready.pop(0)
        order.append(ci)
        changed = False
        for nb in out[ci]:
            indeg[nb] -= 1
            if indeg[nb] == 0:
                ready.append(nb)
                changed = True
        if changed:
            ready.sort(key=lambda c: sccs[c][0])
    return order
