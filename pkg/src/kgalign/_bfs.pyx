# cython: boundscheck=False, wraparound=False, cdivision=True
"""Compiled hop-capped shortest-path kernel.

Same algorithm, expansion order and tie-breaking as the pure-Python twin in
``_bfs_py`` (level-synchronized bidirectional BFS over the CSR arrays); the
two kernels return identical arc lists for identical inputs.
"""

import numpy as np

KERNEL_NAME = "cython"


cdef Py_ssize_t _twin_arc(const long[::1] indptr, const int[::1] nbr, const int[::1] rel,
                          Py_ssize_t src_node, Py_ssize_t dst_node, int code) except -1:
    cdef Py_ssize_t a
    cdef int want = code ^ 1
    for a in range(indptr[dst_node], indptr[dst_node + 1]):
        if nbr[a] == src_node and rel[a] == want:
            return a
    raise AssertionError("graph adjacency is inconsistent: twin arc missing")


cdef list _reconstruct(const long[::1] indptr, const int[::1] nbr, const int[::1] rel,
                       long[::1] parent_arc_f, int[::1] parent_node_f,
                       long[::1] parent_arc_b, int[::1] parent_node_b,
                       long src, long dst, Py_ssize_t meet):
    cdef list forward_arcs = []
    cdef list backward_arcs = []
    cdef Py_ssize_t node = meet
    cdef Py_ssize_t arc, prev
    while node != src:
        arc = parent_arc_f[node]
        forward_arcs.append(arc)
        node = parent_node_f[node]
    forward_arcs.reverse()
    node = meet
    while node != dst:
        arc = parent_arc_b[node]
        prev = parent_node_b[node]
        # discovery arc runs prev->node; the path needs node->prev
        backward_arcs.append(_twin_arc(indptr, nbr, rel, prev, node, rel[arc]))
        node = prev
    return forward_arcs + backward_arcs


def shortest_path_arcs(const long[::1] indptr, const int[::1] nbr, const int[::1] rel,
                       long src, long dst, long k):
    """Arc indices of one minimum-hop path src->dst with at most ``k`` hops.

    Returns a list of CSR arc indices oriented along the path, ``[]`` when
    src == dst, or ``None`` when no path exists within the cap.
    """
    if src == dst:
        return []
    if k <= 0:
        return None

    cdef Py_ssize_t n = indptr.shape[0] - 1
    dist_f_arr = np.full(n, -1, dtype=np.intc)
    dist_b_arr = np.full(n, -1, dtype=np.intc)
    parent_arc_f_arr = np.empty(n, dtype=np.int64)
    parent_arc_b_arr = np.empty(n, dtype=np.int64)
    parent_node_f_arr = np.empty(n, dtype=np.intc)
    parent_node_b_arr = np.empty(n, dtype=np.intc)
    frontier_f_arr = np.empty(n, dtype=np.intc)
    frontier_b_arr = np.empty(n, dtype=np.intc)
    scratch_arr = np.empty(n, dtype=np.intc)

    cdef int[::1] dist_f = dist_f_arr
    cdef int[::1] dist_b = dist_b_arr
    cdef long[::1] parent_arc_f = parent_arc_f_arr
    cdef long[::1] parent_arc_b = parent_arc_b_arr
    cdef int[::1] parent_node_f = parent_node_f_arr
    cdef int[::1] parent_node_b = parent_node_b_arr
    cdef int[::1] frontier_f = frontier_f_arr
    cdef int[::1] frontier_b = frontier_b_arr
    cdef int[::1] scratch = scratch_arr
    cdef int[::1] tmp

    cdef Py_ssize_t len_f = 1, len_b = 1, flen, new_len
    cdef long df = 0, db = 0
    cdef int level
    cdef bint forward
    cdef Py_ssize_t i, a, u, v, meet
    cdef int[::1] dist_here, dist_other
    cdef long[::1] parent_arc
    cdef int[::1] parent_node, frontier

    frontier_f[0] = <int>src
    frontier_b[0] = <int>dst
    dist_f[src] = 0
    dist_b[dst] = 0

    while df + db < k and len_f > 0 and len_b > 0:
        forward = len_f <= len_b
        if forward:
            df += 1
            level = <int>df
            dist_here = dist_f
            dist_other = dist_b
            parent_arc = parent_arc_f
            parent_node = parent_node_f
            frontier = frontier_f
            flen = len_f
        else:
            db += 1
            level = <int>db
            dist_here = dist_b
            dist_other = dist_f
            parent_arc = parent_arc_b
            parent_node = parent_node_b
            frontier = frontier_b
            flen = len_b
        new_len = 0
        meet = -1
        for i in range(flen):
            u = frontier[i]
            for a in range(indptr[u], indptr[u + 1]):
                v = nbr[a]
                if dist_here[v] >= 0:
                    continue
                dist_here[v] = level
                parent_arc[v] = a
                parent_node[v] = <int>u
                scratch[new_len] = <int>v
                new_len += 1
                if dist_other[v] >= 0:
                    meet = v
                    break
            if meet >= 0:
                break
        if meet >= 0:
            return _reconstruct(indptr, nbr, rel,
                                parent_arc_f, parent_node_f,
                                parent_arc_b, parent_node_b,
                                src, dst, meet)
        if forward:
            tmp = frontier_f
            frontier_f = scratch
            scratch = tmp
            len_f = new_len
        else:
            tmp = frontier_b
            frontier_b = scratch
            scratch = tmp
            len_b = new_len
    return None
