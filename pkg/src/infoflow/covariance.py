"""Sample covariance statistics feeding the flow estimators.

Everything is computed over one shared window: the first n_eff = n - k
samples of every series, so the covariance matrix and the cross-covariances
with the differenced target line up sample-for-sample and the cofactor
estimator equals the exact least-squares fit.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import InsufficientDataError, InvalidStrideError
from .panel import TimeSeriesPanel, forward_difference

# A covariance matrix with |det| below this multiple of the diagonal product
# is treated as singular; estimation refuses rather than regularizes.
NEAR_SINGULAR_RTOL = 1e-12


@dataclass(frozen=True, eq=False)
class CovarianceSet:
    """Covariance matrix with its determinant, cofactors and cross terms.

    ``deriv_cross[i]`` holds, for target series i, the length-d vector whose
    entry j is the sample covariance between series j and the forward
    difference of series i. ``n_eff`` is the shared window length n - k.
    """

    matrix: np.ndarray
    det: float
    cofactors: np.ndarray
    n_eff: int
    near_singular: bool
    deriv_cross: dict[int, np.ndarray] = field(default_factory=dict)

    @property
    def d(self) -> int:
        return self.matrix.shape[0]


def cofactor_matrix(C: np.ndarray) -> tuple[np.ndarray, float]:
    """Cofactors and determinant of a square matrix.

    Entry (i, j) is (-1)^(i+j) times the minor with row i and column j
    removed. Closed forms for d <= 3, LU-based minors above. For d = 1 the
    single cofactor is 1. Singular input is allowed; callers inspect det.
    """
    C = np.asarray(C, dtype=np.float64)
    if C.ndim != 2 or C.shape[0] != C.shape[1]:
        raise ValueError(f"need a square matrix, got shape {C.shape}")
    d = C.shape[0]
    if d == 1:
        return np.array([[1.0]]), float(C[0, 0])
    if d == 2:
        (a, b), (c, e) = C
        cof = np.array([[e, -c], [-b, a]])
        return cof, float(a * e - b * c)
    if d == 3:
        cof = np.empty((3, 3))
        for i in range(3):
            for j in range(3):
                r = [x for x in range(3) if x != i]
                s = [x for x in range(3) if x != j]
                minor = C[r[0], s[0]] * C[r[1], s[1]] - C[r[0], s[1]] * C[r[1], s[0]]
                cof[i, j] = minor if (i + j) % 2 == 0 else -minor
        det = C[0, 0] * cof[0, 0] + C[0, 1] * cof[0, 1] + C[0, 2] * cof[0, 2]
        return cof, float(det)

    cof = np.empty((d, d))
    for i in range(d):
        rows = np.arange(d) != i
        sub = C[rows]
        for j in range(d):
            minor = np.linalg.det(sub[:, np.arange(d) != j])
            cof[i, j] = minor if (i + j) % 2 == 0 else -minor
    return cof, float(np.linalg.det(C))


def _window(panel: TimeSeriesPanel, k: int) -> np.ndarray:
    if not isinstance(k, (int, np.integer)) or k < 0:
        raise InvalidStrideError(f"stride k must be a nonnegative integer, got {k!r}")
    n_eff = panel.n - k
    if n_eff < panel.d + 2:
        raise InsufficientDataError(
            f"need n - k >= d + 2 samples: n={panel.n}, k={k}, d={panel.d}"
        )
    return panel.values[:, :n_eff]


def sample_covariance(panel: TimeSeriesPanel, k: int = 1) -> CovarianceSet:
    """Unbiased sample covariance over the first n - k samples.

    Uses the 1/(n_eff - 1) convention; the flow estimator is a ratio of
    covariances, so any common normalization cancels there.
    """
    X = _window(panel, k)
    n_eff = X.shape[1]
    Xc = X - X.mean(axis=1, keepdims=True)
    C = (Xc @ Xc.T) / (n_eff - 1)
    C = 0.5 * (C + C.T)
    cof, det = cofactor_matrix(C)
    diag_prod = float(np.prod(np.diag(C)))
    near_singular = det == 0.0 or abs(det) < NEAR_SINGULAR_RTOL * abs(diag_prod)
    return CovarianceSet(
        matrix=C, det=det, cofactors=cof, n_eff=n_eff, near_singular=near_singular
    )


def derivative_cross_covariance(panel: TimeSeriesPanel, target: int, k: int = 1) -> np.ndarray:
    """Covariances between every series and the differenced target.

    Entry j is the sample covariance between series j (first n - k samples)
    and the Euler forward difference of series ``target``, both centered at
    their own sample means, normalized by 1/(n_eff - 1).
    """
    if k < 1:
        raise InvalidStrideError("derivative cross-covariance needs stride k >= 1")
    X = _window(panel, k)
    n_eff = X.shape[1]
    dx = forward_difference(panel, target, k).values
    Xc = X - X.mean(axis=1, keepdims=True)
    dxc = dx - dx.mean()
    return (Xc @ dxc) / (n_eff - 1)


def build_covariance_set(
    panel: TimeSeriesPanel, k: int = 1, targets=None
) -> CovarianceSet:
    """One covariance pass shared by every estimator touching this panel.

    Fills ``deriv_cross`` for the requested targets (all series by default).
    """
    cov = sample_covariance(panel, k)
    if targets is None:
        targets = range(panel.d)
    for i in targets:
        cov.deriv_cross[int(i)] = derivative_cross_covariance(panel, int(i), k)
    return cov
