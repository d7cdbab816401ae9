from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .base import Classifier


@dataclass(eq=False)
class GaussianNB(Classifier):
    """Gaussian naive Bayes; row ``c`` of ``mean``/``var`` is class ``c``.

    A class absent from training has prior 0 and is never predicted.
    """

    kind = "naive_bayes"
    uses_normalizer = False

    prior: np.ndarray
    mean: np.ndarray
    var: np.ndarray

    @classmethod
    def fit(cls, schema, X, y, variance_floor: float = 1e-6) -> GaussianNB:
        d = X.shape[1]
        prior = np.zeros(2)
        mean = np.zeros((2, d))
        var = np.full((2, d), variance_floor)
        for c in (0, 1):
            Xc = X[y == c]
            prior[c] = len(Xc) / len(X)
            if len(Xc):
                mean[c] = Xc.mean(axis=0)
                var[c] = np.maximum(((Xc - mean[c]) ** 2).mean(axis=0), variance_floor)
        return cls(tuple(schema), prior, mean, var)

    def log_joint(self, Z: np.ndarray) -> np.ndarray:
        """``log p(c) + sum_j log N(x_j; mean_cj, var_cj)``, shape (n, 2)."""
        Z = np.asarray(Z, dtype=np.float64)
        with np.errstate(divide="ignore"):
            log_prior = np.log(self.prior)
        ll = -0.5 * (
            np.log(2 * np.pi * self.var)[None, :, :]
            + (Z[:, None, :] - self.mean[None, :, :]) ** 2 / self.var[None, :, :]
        ).sum(axis=2)
        return log_prior[None, :] + ll

    def scores(self, Z):
        lj = self.log_joint(Z)
        top = lj.max(axis=1, keepdims=True)
        p = np.exp(lj - top)
        return p[:, 1] / p.sum(axis=1)

    def params(self):
        return {"prior": self.prior, "mean": self.mean, "var": self.var}

    @classmethod
    def from_params(cls, schema, params):
        return cls(
            tuple(schema),
            np.asarray(params["prior"], dtype=np.float64),
            np.asarray(params["mean"], dtype=np.float64).reshape(2, -1),
            np.asarray(params["var"], dtype=np.float64).reshape(2, -1),
        )
