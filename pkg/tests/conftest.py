import numpy as np
import pytest

from vcdc import codes
from vcdc.codebook import ParityCheckMatrix, derive_generator, encode


@pytest.fixture(scope="session")
def hamming():
    return codes.load("hamming_7_4")


@pytest.fixture(scope="session")
def ldpc_121_60():
    return codes.load("ldpc_121_60")


@pytest.fixture(scope="session")
def ldpc_49_24():
    return codes.load("ldpc_49_24")


@pytest.fixture(scope="session")
def polar_64_32():
    return codes.load("polar_64_32")


def make_tree_code(num_checks):
    """Cycle-free code: each check joins one frontier variable to two fresh
    ones, so the Tanner graph is a connected tree with n = 2m + 1."""
    rows = []
    frontier = [0]
    next_var = 1
    for _ in range(num_checks):
        parent = frontier.pop(0)
        a, b = next_var, next_var + 1
        next_var += 2
        rows.append((parent, a, b))
        frontier.extend([a, b])
    n = next_var
    h = np.zeros((num_checks, n), dtype=np.uint8)
    for c, (p, a, b) in enumerate(rows):
        h[c, [p, a, b]] = 1
    # tree: edges == nodes - 1 in the bipartite graph
    assert h.sum() == n + num_checks - 1
    return ParityCheckMatrix.from_rows(h)


def enumerate_codewords(h):
    """All 2^k codewords by exhaustive message enumeration."""
    g = derive_generator(h)
    msgs = np.array(np.meshgrid(*[[0, 1]] * h.k, indexing="ij"),
                    dtype=np.uint8).reshape(h.k, -1).T
    return encode(g, msgs)


def map_marginals(h, llr):
    """Exact bitwise posterior LLRs by summing over all codewords.

    Codeword log-likelihood up to a constant is sum((1 - 2b) * l / 2).
    """
    cws = enumerate_codewords(h)
    scores = (1.0 - 2.0 * cws.astype(np.float64)) @ (np.asarray(llr) / 2.0)
    out = np.empty(h.n)
    for v in range(h.n):
        zero = scores[cws[:, v] == 0]
        one = scores[cws[:, v] == 1]
        out[v] = np.logaddexp.reduce(zero) - np.logaddexp.reduce(one)
    return out
