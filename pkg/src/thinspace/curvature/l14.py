"""The eigenvalue/near-orthonormal-frame inequality and a random falsification search.

For ``A`` in ``R^{n x k}`` with ``|A^T A - I| <= c1``, ``|A|^2 <= c`` and
``-eps' <= lambda_1 <= ... <= lambda_n`` with ``lambda_k >= eps/(2k)``::

    0 v sum_i sum_j lambda_j a_ji^2  >=  sqrt(eps') (lambda_1 + ... + lambda_k)

Both matrix norms are Frobenius norms.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from ..errors import BadK, BadParameters

DEFAULT_C1 = 1e-4
DEFAULT_EPS_PRIME = 1e-4
BATCH = 50_000


@dataclass(frozen=True)
class EigenSample:
    A: np.ndarray = field(repr=False)
    lam: np.ndarray
    eps_prime: float
    c1: float
    c: float
    eps: float

    @property
    def n(self) -> int:
        return self.A.shape[0]

    @property
    def k(self) -> int:
        return self.A.shape[1]

    def unmet(self) -> list[str]:
        """Names of the hypotheses this sample violates."""
        A, lam, k = self.A, self.lam, self.k
        bad = []
        if A.shape[0] != lam.size or k > lam.size or k < 1:
            return ["shape"]
        if np.linalg.norm(A.T @ A - np.eye(k)) > self.c1:
            bad.append("|A^T A - I| <= c1")
        if np.sum(A * A) > self.c:
            bad.append("|A|^2 <= c")
        if np.any(np.diff(lam) < 0):
            bad.append("lambda sorted")
        if lam[0] < -self.eps_prime:
            bad.append("lambda_1 >= -eps'")
        if lam[k - 1] < self.eps / (2 * k):
            bad.append("lambda_k >= eps/2k")
        return bad

    def to_dict(self) -> dict:
        return {"A": self.A.tolist(), "lambda": self.lam.tolist(), "eps_prime": self.eps_prime,
                "c1": self.c1, "c": self.c, "eps": self.eps}


@dataclass(frozen=True)
class L14Result:
    holds: bool
    lhs: float
    rhs: float
    tag: str
    unmet: tuple = ()

    def __bool__(self) -> bool:
        return self.holds

    def to_dict(self) -> dict:
        return {"holds": self.holds, "lhs": self.lhs, "rhs": self.rhs, "tag": self.tag,
                "unmet": list(self.unmet)}


def l14_sides(A: np.ndarray, lam: np.ndarray, eps_prime: float) -> tuple[float, float]:
    k = A.shape[1]
    lhs = max(0.0, float(np.sum(lam[:, None] * A * A)))
    rhs = math.sqrt(eps_prime) * float(np.sum(lam[:k]))
    return lhs, rhs


def l14_verify(sample: EigenSample) -> L14Result:
    """Evaluate both sides.  Samples outside the hypotheses are still compared
    but tagged ``hypotheses unmet``."""
    unmet = sample.unmet()
    if unmet == ["shape"]:
        return L14Result(False, math.nan, math.nan, "hypotheses unmet", ("shape",))
    lhs, rhs = l14_sides(sample.A, sample.lam, sample.eps_prime)
    tag = "ok" if not unmet else "hypotheses unmet"
    return L14Result(lhs >= rhs, lhs, rhs, tag, tuple(unmet))


# -- search ---------------------------------------------------------------------

def _sqrtm_sym(P: np.ndarray) -> np.ndarray:
    w, V = np.linalg.eigh(P)
    return (V * np.sqrt(np.maximum(w, 0.0))[:, None, :]) @ np.swapaxes(V, -1, -2)


def _frames(rng, B: int, n: int, k: int, c1: float) -> np.ndarray:
    """``A = Q (I + P)^(1/2)`` with orthonormal ``Q`` and symmetric ``|P| <= c1``.

    Then ``A^T A = I + P`` exactly.  Half of the ``Q`` are the first ``k``
    coordinate vectors, where the eigensum on the left is smallest.
    """
    G = rng.standard_normal((B, n, k))
    Q, _ = np.linalg.qr(G)
    aligned = rng.random(B) < 0.5
    Q[aligned] = np.eye(n)[:, :k]
    S = rng.standard_normal((B, k, k))
    S = (S + np.swapaxes(S, -1, -2)) / 2
    norm = np.linalg.norm(S, axis=(1, 2))
    P = S * (c1 * rng.random(B) / np.where(norm > 0, norm, 1.0))[:, None, None]
    return Q @ _sqrtm_sym(np.eye(k) + P)


def _spectra(rng, B: int, n: int, k: int, eps: float, eps_prime: float) -> np.ndarray:
    """Sorted spectra satisfying the eigenvalue hypotheses.

    Half are generic.  The other half push ``lambda_1 + ... + lambda_k`` to a
    log-uniform small positive value: ``lambda_j = -eps' u_j`` for ``j < k`` and
    ``lambda_k = max(eps/2k, -sum_{j<k} lambda_j + t)``.
    """
    floor = eps / (2 * k)
    lam = np.empty((B, n))
    low = -eps_prime * np.sort(rng.random((B, max(k - 1, 0))), axis=1)[:, ::-1]
    generic = rng.random(B) < 0.5
    lam_k = floor + rng.exponential(eps, B)
    tiny = 10.0 ** rng.uniform(-10, 0, B)
    tight = np.maximum(floor, -low.sum(axis=1) + tiny * eps)
    lam_k = np.where(generic, lam_k, tight)
    if k > 1:
        # generic rows spread the first k-1 eigenvalues over [-eps', lambda_k]
        spread = -eps_prime + (lam_k[:, None] + eps_prime) * np.sort(rng.random((B, k - 1)), axis=1)
        lam[:, :k - 1] = np.where(generic[:, None], spread, np.sort(low, axis=1))
    lam[:, k - 1] = lam_k
    if n > k:
        steps = rng.exponential(eps, (B, n - k)) * (rng.random((B, n - k)) < 0.7)
        lam[:, k:] = lam_k[:, None] + np.cumsum(steps, axis=1)
    return lam


@dataclass(frozen=True)
class L14Search:
    n: int
    k: int
    trials: int
    counterexample: EigenSample | None
    trial_index: int | None
    params: dict

    @property
    def found(self) -> bool:
        return self.counterexample is not None

    def to_dict(self) -> dict:
        return {"n": self.n, "k": self.k, "trials": self.trials, "found": self.found,
                "trial_index": self.trial_index,
                "counterexample": None if self.counterexample is None
                else self.counterexample.to_dict(),
                **self.params}


def l14_search(n: int, k: int, eps: float = 1.0, c: float = 4.0, trials: int = 10**6,
               rng_seed: int = 0, *, c1: float = DEFAULT_C1,
               eps_prime: float = DEFAULT_EPS_PRIME, batch: int = BATCH) -> L14Search:
    """Random valid instances; returns the first violation found, if any.

    Draws that break ``|A|^2 <= c`` are discarded and still count as trials.
    A violation from the vectorized pass is re-checked by :func:`l14_verify`.
    """
    if trials < 1:
        raise BadParameters("trials must be >= 1")
    if not 1 <= k <= n:
        raise BadK(f"need 1 <= k <= n, got n={n}, k={k}")
    rng = np.random.default_rng(rng_seed)
    params = {"eps": eps, "c": c, "c1": c1, "eps_prime": eps_prime, "seed": rng_seed}
    done = 0
    root = math.sqrt(eps_prime)
    while done < trials:
        B = min(batch, trials - done)
        A = _frames(rng, B, n, k, c1)
        lam = _spectra(rng, B, n, k, eps, eps_prime)
        lhs = np.maximum(0.0, np.einsum("bj,bji->b", lam, A * A))
        rhs = root * lam[:, :k].sum(axis=1)
        valid = np.einsum("bji,bji->b", A, A) <= c
        hits = np.flatnonzero(valid & (lhs < rhs))
        for h in hits:
            s = EigenSample(A[h].copy(), lam[h].copy(), eps_prime, c1, c, eps)
            res = l14_verify(s)
            if res.tag == "ok" and not res.holds:
                return L14Search(n, k, done + int(h) + 1, s, done + int(h), params)
        done += B
    return L14Search(n, k, done, None, None, params)
