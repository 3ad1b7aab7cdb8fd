"""Concrete minimax problem instances.

- RobustLogisticProblem: distributionally robust logistic regression with a
  nonconvex coordinate-wise regularizer on x and a quadratic divergence on
  the simplex weights y. Single-sample stochastic model: drawing row i gives
  the surrogate Q(x, y; i) = n*y_i*Q_i(x) - V(y) + g(x), which is unbiased
  for the full objective under uniform i.
- QuadraticMinimaxProblem: strongly concave quadratic testbed with closed
  forms for the inner max, P(x) and grad P(x); optional additive Gaussian
  gradient/Hessian noise keyed by the sample id.
- PlToyProblem: rank-deficient concave part, PL in y but not strongly
  concave; minimum-norm inner maximizer via the pseudo-inverse.
"""

from __future__ import annotations

from typing import Optional, Tuple

import numpy as np
import scipy.sparse as sp
from scipy.special import expit

from .core import Vec
from .oracle import GradPair, HvpResult, MinimaxProblem, SampleId
from .simplex import project_simplex


# ---------------------------------------------------------------------------
# robust logistic regression
# ---------------------------------------------------------------------------

class RobustLogisticProblem(MinimaxProblem):
    """min_x max_{y in simplex}  sum_i y_i Q_i(x) - V(y) + g(x).

    Q_i(x) = log(1 + exp(-l_i r_i^T x)), g(x) = lambda2 * sum_j rho x_j^2 /
    (1 + rho x_j^2), V(y) = 0.5 * lambda1 * ||n y - 1||^2. Rows are sparse;
    all x-side products are O(nnz of the touched rows).
    """

    def __init__(self, rows: sp.spmatrix, labels: np.ndarray,
                 lambda1: Optional[float] = None, lambda2: float = 0.001,
                 rho: float = 10.0):
        X = sp.csr_matrix(rows, dtype=np.float64)
        labels = np.asarray(labels, dtype=np.float64)
        n, d = X.shape
        if n < 1 or d < 1:
            raise ValueError(f"need n >= 1 and d >= 1, got shape {(n, d)}")
        if labels.shape != (n,):
            raise ValueError(f"labels shape {labels.shape} does not match n={n}")
        if not np.all(np.isin(labels, (-1.0, 1.0))):
            raise ValueError("labels must be in {+1, -1}")
        if lambda1 is None:
            lambda1 = 1.0 / n ** 2
        if lambda1 <= 0 or lambda2 < 0 or rho <= 0:
            raise ValueError(
                f"need lambda1 > 0, lambda2 >= 0, rho > 0; got "
                f"lambda1={lambda1}, lambda2={lambda2}, rho={rho}")
        self.X = X
        self.labels = labels
        self.lambda1 = float(lambda1)
        self.lambda2 = float(lambda2)
        self.rho = float(rho)
        self.n = n
        self.d = d
        self.dim_x = d
        self.dim_y = n
        self.n_samples = n
        # y-Hessian is exactly -lambda1 * n^2 * I
        self.y_curvature = self.lambda1 * n ** 2

    # -- single-row helpers ------------------------------------------------
    def _row(self, i: SampleId) -> Tuple[np.ndarray, np.ndarray]:
        if not (0 <= i < self.n):
            raise IndexError(f"sample index {i} out of range [0, {self.n})")
        s, e = self.X.indptr[i], self.X.indptr[i + 1]
        return self.X.indices[s:e], self.X.data[s:e]

    def _margin(self, i: SampleId, x: Vec) -> float:
        idx, val = self._row(i)
        return self.labels[i] * float(np.dot(val, x[idx]))

    @staticmethod
    def _q_of_margin(t):
        # log(1 + exp(-t)), stable for large |t|
        return np.logaddexp(0.0, -t)

    def _g_value(self, x: Vec) -> float:
        rx2 = self.rho * x * x
        return self.lambda2 * float(np.sum(rx2 / (1.0 + rx2)))

    def _g_grad(self, x: Vec) -> Vec:
        return 2.0 * self.lambda2 * self.rho * x / (1.0 + self.rho * x * x) ** 2

    def _g_hess_diag(self, x: Vec) -> Vec:
        rx2 = self.rho * x * x
        return 2.0 * self.lambda2 * self.rho * (1.0 - 3.0 * rx2) / (1.0 + rx2) ** 3

    def _v_grad(self, y: Vec) -> Vec:
        return self.lambda1 * self.n * (self.n * y - 1.0)

    # -- oracle interface --------------------------------------------------
    def sample_loss(self, x: Vec, y: Vec, xi: SampleId) -> float:
        t = self._margin(xi, x)
        v = 0.5 * self.lambda1 * float(np.sum((self.n * y - 1.0) ** 2))
        return self.n * y[xi] * float(self._q_of_margin(t)) - v + self._g_value(x)

    def sample_gradient(self, x: Vec, y: Vec, xi: SampleId) -> GradPair:
        idx, val = self._row(xi)
        t = self.labels[xi] * float(np.dot(val, x[idx]))
        # grad Q_i(x) = -l_i sigma(-t) r_i
        coef = -self.labels[xi] * expit(-t)
        gx = self._g_grad(x)
        gx[idx] += self.n * y[xi] * coef * val
        gy = -self._v_grad(y)
        gy[xi] += self.n * self._q_of_margin(t)
        return GradPair(gx, gy)

    def sample_hvp(self, x: Vec, y: Vec, xi: SampleId, dx: Vec, dy: Vec) -> HvpResult:
        idx, val = self._row(xi)
        li = self.labels[xi]
        t = li * float(np.dot(val, x[idx]))
        s = expit(-t)
        q2 = s * (1.0 - s)                     # sigma(-t) sigma(t)
        rdx = float(np.dot(val, dx[idx]))
        gq_coef = -li * s                      # grad Q_i = gq_coef * r_i
        hx = self._g_hess_diag(x) * dx
        hx[idx] += self.n * (y[xi] * q2 * rdx + dy[xi] * gq_coef) * val
        hy = -self.lambda1 * self.n ** 2 * dy
        hy[xi] += self.n * gq_coef * rdx
        return HvpResult(hx, hy)

    def _margins(self, x: Vec) -> np.ndarray:
        return self.labels * (self.X @ x)

    def full_gradient(self, x: Vec, y: Vec) -> GradPair:
        t = self._margins(x)
        coef = -self.labels * expit(-t) * y
        gx = np.asarray(self.X.T @ coef).ravel() + self._g_grad(x)
        gy = self._q_of_margin(t) - self._v_grad(y)
        return GradPair(gx, gy)

    def objective(self, x: Vec, y: Vec) -> float:
        q = self._q_of_margin(self._margins(x))
        v = 0.5 * self.lambda1 * float(np.sum((self.n * y - 1.0) ** 2))
        return float(np.dot(y, q)) - v + self._g_value(x)

    def project_y(self, y: Vec) -> Vec:
        return project_simplex(y)

    def lipschitz_bound(self) -> float:
        """Crude analytic bound on the joint-gradient Lipschitz constant."""
        rmax = 0.0
        for i in range(self.n):
            _, val = self._row(i)
            rmax = max(rmax, float(np.linalg.norm(val)))
        return (self.n * rmax ** 2 / 4.0 + 2.0 * self.lambda2 * self.rho
                + self.lambda1 * self.n ** 2 + self.n * rmax)


# ---------------------------------------------------------------------------
# synthetic quadratic testbeds
# ---------------------------------------------------------------------------

def _sample_noise(xi: SampleId, sizes: Tuple[int, ...], scale: float):
    rng = np.random.default_rng(xi)
    return [scale * rng.standard_normal(s) for s in sizes]


class QuadraticMinimaxProblem(MinimaxProblem):
    """J(x, y) = 0.5 x'Ax + x'By - 0.5 nu ||y||^2 with additive oracle noise.

    The sample id seeds the noise draw, so a fixed id always reproduces the
    same perturbation (the correction terms of recursive-momentum methods
    then cancel the noise exactly, as they assume).
    """

    def __init__(self, A: np.ndarray, B: np.ndarray, nu: float,
                 noise_sigma: float = 0.0, noise_sigma_h: float = 0.0):
        A = np.asarray(A, dtype=np.float64)
        B = np.asarray(B, dtype=np.float64)
        if A.ndim != 2 or A.shape[0] != A.shape[1]:
            raise ValueError("A must be square")
        if not np.allclose(A, A.T, atol=1e-12):
            raise ValueError("A must be symmetric")
        if B.shape[0] != A.shape[0]:
            raise ValueError(f"B row count {B.shape[0]} != dim of A {A.shape[0]}")
        if nu <= 0:
            raise ValueError(f"nu must be positive, got {nu}")
        self.A, self.B, self.nu = A, B, float(nu)
        self.noise_sigma = float(noise_sigma)
        self.noise_sigma_h = float(noise_sigma_h)
        self.dim_x, self.dim_y = B.shape
        self.y_curvature = self.nu
        d, m = B.shape
        H = np.zeros((d + m, d + m))
        H[:d, :d] = A
        H[:d, d:] = B
        H[d:, :d] = B.T
        H[d:, d:] = -nu * np.eye(m)
        self.lipschitz_L_f = float(np.linalg.norm(H, 2))
        self._p_hessian = A + B @ B.T / nu

    @classmethod
    def random(cls, d: int, m: int, nu: float, noise_sigma: float, seed: int,
               a_eigs: Tuple[float, float] = (-0.5, 0.5), b_scale: float = 0.5):
        rng = np.random.default_rng(seed)
        Q, _ = np.linalg.qr(rng.standard_normal((d, d)))
        A = Q @ np.diag(np.linspace(a_eigs[0], a_eigs[1], d)) @ Q.T
        A = 0.5 * (A + A.T)
        B = b_scale * rng.standard_normal((d, m)) / np.sqrt(m)
        return cls(A, B, nu, noise_sigma=noise_sigma)

    def _exact_gradient(self, x: Vec, y: Vec) -> GradPair:
        return GradPair(self.A @ x + self.B @ y, self.B.T @ x - self.nu * y)

    def sample_gradient(self, x: Vec, y: Vec, xi: SampleId) -> GradPair:
        g = self._exact_gradient(x, y)
        if self.noise_sigma == 0.0:
            return g
        ex, ey = _sample_noise(xi, (self.dim_x, self.dim_y), self.noise_sigma)
        return GradPair(g.gx + ex, g.gy + ey)

    def sample_hvp(self, x: Vec, y: Vec, xi: SampleId, dx: Vec, dy: Vec) -> HvpResult:
        hx = self.A @ dx + self.B @ dy
        hy = self.B.T @ dx - self.nu * dy
        if self.noise_sigma_h > 0.0:
            M = self.dim_x + self.dim_y
            rng = np.random.default_rng(np.random.SeedSequence([xi, 0x48]))
            W = rng.standard_normal((M, M))
            E = self.noise_sigma_h * (W + W.T) / np.sqrt(2.0 * M)
            d = np.concatenate([dx, dy])
            ed = E @ d
            hx = hx + ed[:self.dim_x]
            hy = hy + ed[self.dim_x:]
        return HvpResult(hx, hy)

    def full_gradient(self, x: Vec, y: Vec) -> GradPair:
        return self._exact_gradient(x, y)

    def objective(self, x: Vec, y: Vec) -> float:
        return float(0.5 * x @ self.A @ x + x @ self.B @ y
                     - 0.5 * self.nu * y @ y)

    def has_closed_form(self) -> bool:
        return True

    def y_argmax(self, x: Vec) -> Vec:
        return self.B.T @ x / self.nu

    def p_value(self, x: Vec) -> float:
        return float(0.5 * x @ self._p_hessian @ x)

    def grad_p(self, x: Vec) -> Vec:
        return self._p_hessian @ x


class PlToyProblem(MinimaxProblem):
    """J(x, y) = 0.5 x'Ax + x'By - 0.5 y'Cy with C PSD and singular.

    -J is PL in y with constant delta = smallest nonzero eigenvalue of C.
    The inner argmax is a set; the minimum-norm solution pinv(C) B' x is
    returned. Construction rejects couplings whose range leaves range(C)
    (the inner max would be unbounded).
    """

    def __init__(self, A: np.ndarray, B: np.ndarray, C: np.ndarray,
                 noise_sigma: float = 0.0):
        A = np.asarray(A, dtype=np.float64)
        B = np.asarray(B, dtype=np.float64)
        C = np.asarray(C, dtype=np.float64)
        if not np.allclose(A, A.T, atol=1e-12):
            raise ValueError("A must be symmetric")
        if not np.allclose(C, C.T, atol=1e-12):
            raise ValueError("C must be symmetric")
        evals = np.linalg.eigvalsh(C)
        if evals.min() < -1e-10:
            raise ValueError("C must be positive semidefinite")
        self.C_pinv = np.linalg.pinv(C, rcond=1e-12)
        # range(B^T-image) must lie inside range(C)
        leak = B.T - C @ (self.C_pinv @ B.T)
        if np.linalg.norm(leak) > 1e-8 * max(1.0, np.linalg.norm(B)):
            raise ValueError("columns of B' leave range(C): inner max unbounded")
        nonzero = evals[evals > 1e-10]
        if nonzero.size == 0:
            raise ValueError("C is identically zero; no PL constant")
        self.delta = float(nonzero.min())
        self.A, self.B, self.C = A, B, C
        self.noise_sigma = float(noise_sigma)
        self.dim_x, self.dim_y = B.shape
        self.y_curvature = float(evals.max())
        self._p_hessian = A + B @ self.C_pinv @ B.T

    def sample_gradient(self, x: Vec, y: Vec, xi: SampleId) -> GradPair:
        g = self.full_gradient(x, y)
        if self.noise_sigma == 0.0:
            return g
        ex, ey = _sample_noise(xi, (self.dim_x, self.dim_y), self.noise_sigma)
        return GradPair(g.gx + ex, g.gy + ey)

    def sample_hvp(self, x: Vec, y: Vec, xi: SampleId, dx: Vec, dy: Vec) -> HvpResult:
        return HvpResult(self.A @ dx + self.B @ dy, self.B.T @ dx - self.C @ dy)

    def full_gradient(self, x: Vec, y: Vec) -> GradPair:
        return GradPair(self.A @ x + self.B @ y, self.B.T @ x - self.C @ y)

    def objective(self, x: Vec, y: Vec) -> float:
        return float(0.5 * x @ self.A @ x + x @ self.B @ y - 0.5 * y @ self.C @ y)

    def has_closed_form(self) -> bool:
        return True

    def y_argmax(self, x: Vec) -> Vec:
        return self.C_pinv @ (self.B.T @ x)

    def p_value(self, x: Vec) -> float:
        return float(0.5 * x @ self._p_hessian @ x)

    def grad_p(self, x: Vec) -> Vec:
        return self._p_hessian @ x
