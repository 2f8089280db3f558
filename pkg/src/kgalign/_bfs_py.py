"""Pure-Python hop-capped shortest-path kernel.

Fallback twin of the compiled kernel in ``_bfs.pyx``; both implement the same
level-synchronized bidirectional BFS with identical expansion order, so they
return identical paths. The search expands whole levels, always from the side
with the smaller frontier (ties go to the forward side), visiting frontier
nodes in discovery order and arcs in CSR order — that fixed order is the
deterministic tie-break between equal-length paths.

The first meeting between the two labelings is provably minimal: if no
meeting existed after expanding levels (df-1, db), every path is longer than
df-1+db, so any meeting found while expanding level df has backward distance
exactly db and total df+db.
"""

from __future__ import annotations

KERNEL_NAME = "python"


def _twin_arc(indptr, nbr, rel, src_node, dst_node, code):
    """Arc index of (dst_node -> src_node) with the opposite reversed bit;
    exists for every arc because edges are indexed under both endpoints."""
    want = code ^ 1
    for a in range(int(indptr[dst_node]), int(indptr[dst_node + 1])):
        if int(nbr[a]) == src_node and int(rel[a]) == want:
            return a
    raise AssertionError("graph adjacency is inconsistent: twin arc missing")


def shortest_path_arcs(indptr, nbr, rel, src, dst, k):
    """Arc indices of one minimum-hop path src->dst with at most ``k`` hops.

    Returns a list of CSR arc indices oriented along the path, ``[]`` when
    src == dst, or ``None`` when no path exists within the cap.
    """
    if src == dst:
        return []
    if k <= 0:
        return None

    dist_f = {src: 0}
    dist_b = {dst: 0}
    # parent maps: node -> (discovery arc, discovering node)
    parent_f = {}
    parent_b = {}
    frontier_f = [src]
    frontier_b = [dst]
    df = db = 0

    while df + db < k and frontier_f and frontier_b:
        forward = len(frontier_f) <= len(frontier_b)
        if forward:
            df += 1
            dist_here, dist_other = dist_f, dist_b
            parent_here = parent_f
            frontier = frontier_f
        else:
            db += 1
            dist_here, dist_other = dist_b, dist_f
            parent_here = parent_b
            frontier = frontier_b
        new_frontier = []
        meet = -1
        for u in frontier:
            start, end = int(indptr[u]), int(indptr[u + 1])
            for a in range(start, end):
                v = int(nbr[a])
                if v in dist_here:
                    continue
                dist_here[v] = df if forward else db
                parent_here[v] = (a, u)
                new_frontier.append(v)
                if v in dist_other:
                    meet = v
                    break
            if meet >= 0:
                break
        if meet >= 0:
            return _reconstruct(indptr, nbr, rel, parent_f, parent_b, src, dst, meet)
        if forward:
            frontier_f = new_frontier
        else:
            frontier_b = new_frontier
    return None


def _reconstruct(indptr, nbr, rel, parent_f, parent_b, src, dst, meet):
    forward_arcs = []
    node = meet
    while node != src:
        arc, prev = parent_f[node]
        forward_arcs.append(arc)
        node = prev
    forward_arcs.reverse()

    backward_arcs = []
    node = meet
    while node != dst:
        arc, prev = parent_b[node]
        # discovery arc runs prev->node; the path needs node->prev
        backward_arcs.append(_twin_arc(indptr, nbr, rel, prev, node, int(rel[arc])))
        node = prev
    return forward_arcs + backward_arcs
