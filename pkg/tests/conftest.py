"""Shared generators for randomized tests. Everything is seeded."""

import numpy as np
import pytest

from infoflow import LinearSDE, TimeSeriesPanel


def make_rng(seed):
    return np.random.Generator(np.random.PCG64(seed))


def random_stable_system(rng, d, m=None, margin=0.5):
    """Random Hurwitz drift with stability margin, random diffusion."""
    if m is None:
        m = d
    A = rng.standard_normal((d, d)) / np.sqrt(d)
    shift = np.max(np.linalg.eigvals(A).real) + margin
    A = A - shift * np.eye(d)
    B = rng.standard_normal((d, m)) * 0.5
    return LinearSDE(f=np.zeros(d), A=A, B=B)


def random_spd(rng, d, eig_low=0.1, eig_high=10.0):
    """Random symmetric positive-definite matrix with bounded conditioning."""
    Q, _ = np.linalg.qr(rng.standard_normal((d, d)))
    eigs = np.exp(rng.uniform(np.log(eig_low), np.log(eig_high), size=d))
    return Q @ np.diag(eigs) @ Q.T


def random_panel(rng, d, n, dt=1.0):
    """Cross-correlated noise panel with well-conditioned covariance."""
    Q, _ = np.linalg.qr(rng.standard_normal((d, d)))
    mix = Q @ np.diag(np.exp(rng.uniform(np.log(0.5), np.log(2.0), size=d)))
    values = mix @ rng.standard_normal((d, n))
    labels = tuple(f"s{i}" for i in range(d))
    return TimeSeriesPanel(labels=labels, values=values, dt=dt)


@pytest.fixture
def rng():
    return make_rng(20240817)
