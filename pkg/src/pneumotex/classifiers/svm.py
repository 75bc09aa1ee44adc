"""RBF support vector machine trained by sequential minimal optimization,
with a Platt-style sigmoid per one-vs-rest machine."""
from __future__ import annotations

import math

import numpy as np

from ..errors import ConvergenceError, ParameterError
from .base import Model, sorted_labels

ALPHA_EPS = 1e-12


def rbf_kernel(a: np.ndarray, b: np.ndarray, gamma: float) -> np.ndarray:
    out = np.empty((a.shape[0], b.shape[0]), dtype=np.float64)
    for i in range(a.shape[0]):
        diff = b - a[i]
        out[i] = np.exp(-gamma * (diff * diff).sum(axis=1))
    return out


def scale_gamma(X: np.ndarray) -> float:
    """1 / (dim * variance of all training values); 1.0 if degenerate."""
    var = float(X.var())
    if var <= 0.0:
        return 1.0
    return 1.0 / (X.shape[1] * var)


class _Smo:
    """Platt's SMO on one binary problem (y in {-1, +1})."""

    def __init__(self, K, y, C, tol, seed, max_sweeps):
        self.K = K
        self.y = y.astype(np.float64)
        self.C = float(C)
        self.tol = float(tol)
        self.n = y.shape[0]
        self.alpha = np.zeros(self.n)
        self.b = 0.0
        # F_i = sum_j alpha_j y_j K_ij; decision f_i = F_i + b
        self.F = np.zeros(self.n)
        self.rng = np.random.default_rng(seed)
        self.max_sweeps = max_sweeps

    def decision(self) -> np.ndarray:
        return self.F + self.b

    def _take_step(self, i1: int, i2: int) -> bool:
        if i1 == i2:
            return False
        a1, a2 = self.alpha[i1], self.alpha[i2]
        y1, y2 = self.y[i1], self.y[i2]
        E1 = self.F[i1] + self.b - y1
        E2 = self.F[i2] + self.b - y2
        s = y1 * y2
        if s > 0:
            L, H = max(0.0, a1 + a2 - self.C), min(self.C, a1 + a2)
        else:
            L, H = max(0.0, a2 - a1), min(self.C, self.C + a2 - a1)
        if L >= H:
            return False
        k11, k12, k22 = self.K[i1, i1], self.K[i1, i2], self.K[i2, i2]
        eta = k11 + k22 - 2.0 * k12
        if eta <= 0:
            # Flat direction; with an RBF kernel this means duplicate points.
            return False
        a2_new = a2 + y2 * (E1 - E2) / eta
        a2_new = min(max(a2_new, L), H)
        if abs(a2_new - a2) < 1e-12 * (a2_new + a2 + 1e-12):
            return False
        a1_new = a1 + s * (a2 - a2_new)
        if a1_new < 0.0:
            a2_new += s * a1_new
            a1_new = 0.0
        elif a1_new > self.C:
            a2_new += s * (a1_new - self.C)
            a1_new = self.C

        # With decision u = F + b, a free multiplier must end at u = y.
        d1 = y1 * (a1_new - a1)
        d2 = y2 * (a2_new - a2)
        b1 = self.b - E1 - d1 * k11 - d2 * k12
        b2 = self.b - E2 - d1 * k12 - d2 * k22
        if 0.0 < a1_new < self.C:
            b_new = b1
        elif 0.0 < a2_new < self.C:
            b_new = b2
        else:
            b_new = (b1 + b2) / 2.0
        self.F += d1 * self.K[i1] + d2 * self.K[i2]
        self.b = b_new
        self.alpha[i1], self.alpha[i2] = a1_new, a2_new
        return True

    def _examine(self, i2: int) -> bool:
        y2 = self.y[i2]
        a2 = self.alpha[i2]
        E2 = self.F[i2] + self.b - y2
        r2 = E2 * y2
        if (r2 < -self.tol and a2 < self.C) or (r2 > self.tol and a2 > ALPHA_EPS):
            non_bound = np.flatnonzero((self.alpha > ALPHA_EPS) & (self.alpha < self.C - ALPHA_EPS))
            if non_bound.size > 1:
                E = self.F + self.b - self.y
                i1 = int(non_bound[np.argmax(np.abs(E2 - E[non_bound]))])
                if self._take_step(i1, i2):
                    return True
            if non_bound.size:
                start = int(self.rng.integers(non_bound.size))
                for off in range(non_bound.size):
                    if self._take_step(int(non_bound[(start + off) % non_bound.size]), i2):
                        return True
            start = int(self.rng.integers(self.n))
            for off in range(self.n):
                if self._take_step((start + off) % self.n, i2):
                    return True
        return False

    def solve(self):
        examine_all = True
        num_changed = 1
        sweeps = 0
        while num_changed > 0 or examine_all:
            sweeps += 1
            if sweeps > self.max_sweeps:
                raise ConvergenceError(
                    "SMO failed to converge",
                    sweeps=sweeps,
                    kkt_residual=float(self.kkt_residual()),
                    dual_objective=float(self.dual_objective()),
                )
            num_changed = 0
            targets = range(self.n) if examine_all else np.flatnonzero(
                (self.alpha > ALPHA_EPS) & (self.alpha < self.C - ALPHA_EPS)
            )
            for i in targets:
                num_changed += int(self._examine(int(i)))
            if examine_all:
                examine_all = False
            elif num_changed == 0:
                examine_all = True

    def kkt_residual(self) -> float:
        """Max violation of the box KKT conditions at the current iterate."""
        yf = self.y * self.decision()
        res = 0.0
        for i in range(self.n):
            if self.alpha[i] <= ALPHA_EPS:
                res = max(res, 1.0 - yf[i])
            elif self.alpha[i] >= self.C - ALPHA_EPS:
                res = max(res, yf[i] - 1.0)
            else:
                res = max(res, abs(yf[i] - 1.0))
        return res

    def dual_objective(self) -> float:
        ay = self.alpha * self.y
        return float(self.alpha.sum() - 0.5 * ay @ self.K @ ay)


def platt_sigmoid(deci: np.ndarray, y: np.ndarray, max_iter: int = 100):
    """Fit P(y=1|f) = 1/(1+exp(A f + B)) with prior-corrected targets.

    Newton's method with backtracking (Lin, Weng, Keerthi); deterministic.
    Returns (A, B).
    """
    prior1 = float(np.sum(y > 0))
    prior0 = float(len(y) - prior1)
    hi = (prior1 + 1.0) / (prior1 + 2.0)
    lo = 1.0 / (prior0 + 2.0)
    t = np.where(y > 0, hi, lo)
    A, B = 0.0, math.log((prior0 + 1.0) / (prior1 + 1.0))
    sigma = 1e-12
    eps = 1e-5

    def objective(a, b):
        fab = deci * a + b
        return float(
            np.sum(np.where(fab >= 0, t * fab + np.log1p(np.exp(-fab)),
                            (t - 1.0) * fab + np.log1p(np.exp(fab))))
        )

    fval = objective(A, B)
    for _ in range(max_iter):
        fab = deci * A + B
        p = np.where(fab >= 0, np.exp(-fab) / (1.0 + np.exp(-fab)),
                     1.0 / (1.0 + np.exp(fab)))
        q = 1.0 - p
        d1 = t - p
        d2 = p * q
        g1 = float(np.sum(deci * d1))
        g2 = float(np.sum(d1))
        if abs(g1) < eps and abs(g2) < eps:
            break
        h11 = float(np.sum(deci * deci * d2)) + sigma
        h22 = float(np.sum(d2)) + sigma
        h21 = float(np.sum(deci * d2))
        det = h11 * h22 - h21 * h21
        dA = -(h22 * g1 - h21 * g2) / det
        dB = -(-h21 * g1 + h11 * g2) / det
        gd = g1 * dA + g2 * dB
        step = 1.0
        while step >= 1e-10:
            new_f = objective(A + step * dA, B + step * dB)
            if new_f < fval + 1e-4 * step * gd:
                A += step * dA
                B += step * dB
                fval = new_f
                break
            step /= 2.0
        else:
            break
    return A, B


class SvmClassifier(Model):
    """One-vs-rest RBF machines with sigmoid scores renormalized per row."""

    def __init__(self, X, machines, labels, gamma, C):
        self.X_ = np.asarray(X, dtype=np.float64).copy()
        self.machines = machines  # label -> (alpha*y, b, A, B)
        self.labels_ = tuple(labels)
        self.dim_ = self.X_.shape[1]
        self.gamma = gamma
        self.C = float(C)

    def decision_values(self, X: np.ndarray) -> np.ndarray:
        """(m, L) uncalibrated decision values."""
        X = self._check(X)
        K = rbf_kernel(X, self.X_, self.gamma)
        out = np.empty((X.shape[0], len(self.labels_)), dtype=np.float64)
        for j, lab in enumerate(self.labels_):
            ay, b, _, _ = self.machines[lab]
            out[:, j] = K @ ay + b
        return out

    def predict_proba(self, X: np.ndarray) -> np.ndarray:
        X = self._check(X)
        f = self.decision_values(X)
        probs = np.empty_like(f)
        for j, lab in enumerate(self.labels_):
            _, _, A, B = self.machines[lab]
            fab = f[:, j] * A + B
            probs[:, j] = np.where(fab >= 0, np.exp(-fab) / (1.0 + np.exp(-fab)),
                                   1.0 / (1.0 + np.exp(fab)))
        sums = probs.sum(axis=1, keepdims=True)
        uniform = np.full_like(probs, 1.0 / probs.shape[1])
        with np.errstate(invalid="ignore", divide="ignore"):
            normalized = probs / sums
        return np.where(sums > 0.0, normalized, uniform)


def fit_svm(
    X,
    y,
    C: float = 1.0,
    tol: float = 1e-3,
    gamma: float | None = None,
    seed: int = 0,
    max_sweeps: int = 20000,
) -> SvmClassifier:
    """Train one-vs-rest SMO machines and their Platt sigmoids.

    gamma defaults to 1/(dim * variance of all training values).
    """
    X = np.asarray(X, dtype=np.float64)
    labels = sorted_labels(y)
    if len(labels) < 2:
        raise ParameterError("need at least two labels")
    if C <= 0 or tol <= 0:
        raise ParameterError("C and tol must be positive")
    if gamma is None:
        gamma = scale_gamma(X)
    K = rbf_kernel(X, X, gamma)
    machines = {}
    for j, lab in enumerate(labels):
        yb = np.where(np.asarray([v == lab for v in y]), 1.0, -1.0)
        smo = _Smo(K, yb, C, tol, seed=[seed, j], max_sweeps=max_sweeps)
        smo.solve()
        A, B = platt_sigmoid(smo.decision(), yb)
        machines[lab] = (smo.alpha * yb, smo.b, A, B)
    return SvmClassifier(X, machines, labels, gamma, C)


def kkt_residual(model: SvmClassifier, X, y) -> float:
    """Max box-KKT violation over all machines on the training data."""
    X = np.asarray(X, dtype=np.float64)
    f = model.decision_values(X)
    worst = 0.0
    for j, lab in enumerate(model.labels_):
        ay, _, _, _ = model.machines[lab]
        yb = np.where(np.asarray([v == lab for v in y]), 1.0, -1.0)
        alpha = ay * yb
        yf = yb * f[:, j]
        for i in range(len(yb)):
            if alpha[i] <= ALPHA_EPS:
                worst = max(worst, 1.0 - yf[i])
            elif alpha[i] >= model.C - ALPHA_EPS:
                worst = max(worst, yf[i] - 1.0)
            else:
                worst = max(worst, abs(yf[i] - 1.0))
    return worst
