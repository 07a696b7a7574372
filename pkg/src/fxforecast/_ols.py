from dataclasses import dataclass

import numpy as np


class SingularDesignError(np.linalg.LinAlgError):
    """Raised when a regressor matrix is rank deficient."""


@dataclass
class OLSResult:
    params: np.ndarray
    resid: np.ndarray
    ssr: float
    nobs: int
    k: int
    xtx_inv: np.ndarray

    @property
    def sigma2(self) -> float:
        return self.ssr / (self.nobs - self.k)

    @property
    def bse(self) -> np.ndarray:
        return np.sqrt(np.diag(self.xtx_inv) * self.sigma2)

    @property
    def tvalues(self) -> np.ndarray:
        return self.params / self.bse


def ols(y, X) -> OLSResult:
    """Least squares via QR; raises :class:`SingularDesignError` on rank deficiency."""
    y = np.asarray(y, dtype=float)
    X = np.asarray(X, dtype=float)
    n, k = X.shape
    if n <= k:
        raise SingularDesignError(f"{n} observations for {k} regressors")
    q, r = np.linalg.qr(X)
    diag = np.abs(np.diag(r))
    if k and diag.min() <= 1e-12 * max(diag.max(), 1e-300) * max(n, k):
        raise SingularDesignError("singular regressor matrix")
    params = np.linalg.solve(r, q.T @ y)
    resid = y - X @ params
    r_inv = np.linalg.inv(r)
    return OLSResult(params, resid, float(resid @ resid), n, k, r_inv @ r_inv.T)
