"""Independent reference implementations used to cross-check the package.

Everything in here is deliberately written the slow, obvious way (dense
matrices, double loops) so the fast paths in the package have something
honest to be compared against.
"""

import numpy as np


def dense_ls_estimate(y_stacked, p_stacked, w_stacked):
    """Solve the stacked linear model with one dense Kronecker system.

    Builds vec(Y) = (P~^T kron W~) vec(H) explicitly and solves the normal
    equations.  Only valid when the dense system has full column rank.
    """
    w = w_stacked
    p = p_stacked
    d = np.kron(p.T, w)
    y = np.asarray(y_stacked, dtype=complex).flatten(order="F")
    h_vec = np.linalg.solve(d.conj().T @ d, d.conj().T @ y)
    n_rx = w.shape[1]
    n_tx = p.shape[0]
    return h_vec.reshape((n_rx, n_tx), order="F")


def dense_merged_subarray(t1, t2, branches_per_chain):
    """diag(T2) (T1 kron I_b) collapsed to its diagonal, built densely."""
    t1 = np.asarray(t1, dtype=complex)
    t2 = np.asarray(t2, dtype=complex)
    big = np.diag(t2) @ np.kron(np.diag(t1), np.eye(branches_per_chain))
    return np.diag(big)


def dense_merged_fully_connected(t1, t2):
    """(I kron T2)(T1 kron I) collapsed to its diagonal, built densely."""
    t1 = np.asarray(t1, dtype=complex)
    t2 = np.asarray(t2, dtype=complex)
    n_rf = t1.size
    n_ant = t2.size
    big = np.kron(np.eye(n_rf), np.diag(t2)) @ np.kron(np.diag(t1), np.eye(n_ant))
    return np.diag(big)


def direct_cost(f, partition, h_ab, h_ba):
    """The calibration cost as a literal double sum over antenna pairs."""
    f = np.asarray(f, dtype=complex)
    total = 0.0
    for ia, i in enumerate(partition.group_a):
        for jb, j in enumerate(partition.group_b):
            term = f[j] * h_ab[jb, ia] - f[i] * h_ba[ia, jb]
            total += abs(term) ** 2
    return total


def dense_q(partition, h_ab, h_ba, n):
    """Build Q by expanding the cost |f_j h_ij - f_i h_ji|^2 term by term."""
    q = np.zeros((n, n), dtype=complex)
    for ia, i in enumerate(partition.group_a):
        for jb, j in enumerate(partition.group_b):
            hij = h_ab[jb, ia]  # i transmits, j receives
            hji = h_ba[ia, jb]  # j transmits, i receives
            q[j, j] += abs(hij) ** 2
            q[i, i] += abs(hji) ** 2
            q[j, i] += -np.conj(hij) * hji
            q[i, j] += -np.conj(hji) * hij
    return q
