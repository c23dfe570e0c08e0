import numpy as np
import pytest
from hypothesis import HealthCheck, settings

settings.register_profile("default", deadline=None, max_examples=60,
                          suppress_health_check=[HealthCheck.too_slow])
settings.load_profile("default")


@pytest.fixture
def rng():
    return np.random.default_rng(20240611)


def random_frame(rng, m, k):
    q, _ = np.linalg.qr(rng.standard_normal((m, m)))
    return q[:, :k]


def brute_distances(X):
    n = X.shape[0]
    D = np.zeros((n, n))
    for i in range(n):
        for j in range(n):
            s = 0.0
            for a in range(X.shape[1]):
                s += (X[i, a] - X[j, a]) ** 2
            D[i, j] = s ** 0.5
    return D


def brute_scatter(X, W):
    n, m = X.shape
    M = np.zeros((m, m))
    for i in range(n):
        for j in range(i + 1, n):
            if W[i, j]:
                d = X[i] - X[j]
                M += np.outer(d, d)
    return M


def random_mask(rng, n, p=0.5):
    W = np.triu(rng.uniform(size=(n, n)) < p, 1)
    return (W | W.T).astype(float)
