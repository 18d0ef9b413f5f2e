"""Independent brute-force oracles shared by the test modules.

Everything here works on whole batches of tables with numpy and never calls
into the search engine.
"""

import itertools

import numpy as np
import pytest

from bolmoufang.term import One, Prod, Var


def all_table_array(n, neutral_at_zero=False):
    """Every ``n x n`` table as an int array of shape (N, n, n)."""
    if not neutral_at_zero:
        cells = np.array(list(itertools.product(range(n), repeat=n * n)), dtype=np.int64)
        return cells.reshape(-1, n, n)
    free = (n - 1) * (n - 1)
    cells = list(itertools.product(range(n), repeat=free))
    body = np.array(cells, dtype=np.int64).reshape(len(cells), n - 1, n - 1)
    out = np.empty((len(body), n, n), dtype=np.int64)
    out[:, 0, :] = np.arange(n)
    out[:, :, 0] = np.arange(n)
    out[:, 1:, 1:] = body
    return out


def batch_eval(term, tables, assignment_columns):
    """Value of ``term`` in each table under each assignment: shape (N, A)."""
    N = len(tables)
    rows = np.arange(N)[:, None]
    if isinstance(term, Var):
        col = assignment_columns[term.name]
        return np.broadcast_to(col, (N, len(col)))
    if isinstance(term, Prod):
        a = batch_eval(term.left, tables, assignment_columns)
        b = batch_eval(term.right, tables, assignment_columns)
        return tables[rows, a, b]
    if isinstance(term, One):
        A = len(next(iter(assignment_columns.values())))
        return np.zeros((N, A), dtype=np.int64)
    raise NotImplementedError(type(term))


def batch_holds(identity, tables):
    """Boolean mask: does the identity hold in each table (three nested loops, vectorized)."""
    n = tables.shape[1]
    grid = np.array(list(itertools.product(range(n), repeat=3)), dtype=np.int64)
    cols = {"x": grid[:, 0], "y": grid[:, 1], "z": grid[:, 2]}
    lhs = batch_eval(identity.lhs, tables, cols)
    rhs = batch_eval(identity.rhs, tables, cols)
    return (lhs == rhs).all(axis=1)


def batch_is_latin(tables):
    n = tables.shape[1]
    s = np.sort(tables, axis=2)
    rows_ok = (s == np.arange(n)).all(axis=(1, 2))
    s = np.sort(tables, axis=1)
    cols_ok = (s == np.arange(n)[:, None]).all(axis=(1, 2))
    return rows_ok & cols_ok


def batch_left_neutral(tables, e):
    n = tables.shape[1]
    return (tables[:, e, :] == np.arange(n)).all(axis=1)


def batch_right_neutral(tables, e):
    n = tables.shape[1]
    return (tables[:, :, e] == np.arange(n)).all(axis=1)


def batch_has_two_sided_neutral(tables):
    n = tables.shape[1]
    out = np.zeros(len(tables), dtype=bool)
    for e in range(n):
        out |= batch_left_neutral(tables, e) & batch_right_neutral(tables, e)
    return out


def batch_inverses(tables, e, side):
    """Every element has an inverse of the given side relative to ``e``."""
    if side == "none":
        return np.ones(len(tables), dtype=bool)
    right = tables == e  # right[k, x, y]: x*y = e
    left = np.transpose(right, (0, 2, 1))  # left[k, x, y]: y*x = e
    if side == "right":
        ok = right
    elif side == "left":
        ok = left
    else:
        ok = right & left
    return ok.any(axis=2).all(axis=1)


def batch_neutral(tables, e, side):
    if side == "left":
        return batch_left_neutral(tables, e)
    if side == "right":
        return batch_right_neutral(tables, e)
    return batch_left_neutral(tables, e) & batch_right_neutral(tables, e)


def batch_associative(tables):
    n = tables.shape[1]
    grid = np.array(list(itertools.product(range(n), repeat=3)), dtype=np.int64)
    rows = np.arange(len(tables))[:, None]
    x, y, z = grid[:, 0], grid[:, 1], grid[:, 2]
    lhs = tables[rows, tables[rows, x, y], z]
    rhs = tables[rows, x, tables[rows, y, z]]
    return (lhs == rhs).all(axis=1)


@pytest.fixture(scope="session")
def tables3():
    return all_table_array(3)
