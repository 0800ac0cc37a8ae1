"""Weighted logistic regression and linear SVM, trained by first-order methods."""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np


def _sigmoid(z: np.ndarray) -> np.ndarray:
    out = np.empty_like(z)
    pos = z >= 0
    out[pos] = 1.0 / (1.0 + np.exp(-z[pos]))
    ez = np.exp(z[~pos])
    out[~pos] = ez / (1.0 + ez)
    return out


def lr_loss(wb: np.ndarray, X: np.ndarray, y: np.ndarray, sw: np.ndarray, C: float) -> float:
    """Weighted L2-regularized log-loss (see lr_loss_grad)."""
    w, b = wb[:-1], wb[-1]
    z = X @ w + b
    losses = np.logaddexp(0.0, z) - y * z
    return float(sw @ losses) + (w @ w) / (2.0 * C)


def lr_loss_grad(
    wb: np.ndarray, X: np.ndarray, y: np.ndarray, sw: np.ndarray, C: float
) -> tuple[float, np.ndarray]:
    """Weighted L2-regularized log-loss and its gradient.

    wb stacks the weight vector and the (unregularized) intercept:
    J = sum_i sw_i * (log(1 + e^{z_i}) - y_i z_i) + ||w||^2 / (2C).
    """
    w, b = wb[:-1], wb[-1]
    z = X @ w + b
    losses = np.logaddexp(0.0, z) - y * z
    loss = float(sw @ losses) + (w @ w) / (2.0 * C)
    residual = sw * (_sigmoid(z) - y)
    grad = np.empty_like(wb)
    grad[:-1] = X.T @ residual + w / C
    grad[-1] = residual.sum()
    return loss, grad


@dataclass
class LogisticRegressionModel:
    weights: np.ndarray
    intercept: float
    C: float
    loss_history: list[float] = field(default_factory=list)
    n_iter: int = 0

    @classmethod
    def train(
        cls,
        X: np.ndarray,
        y: np.ndarray,
        sw: np.ndarray,
        C: float = 1.0,
        tol: float = 1e-8,
        max_iter: int = 2000,
        seed: int = 0,
    ) -> "LogisticRegressionModel":
        """Full-batch gradient descent with Armijo backtracking.

        Step sizes start from a Barzilai-Borwein estimate each iteration;
        backtracking (loss evaluations only) guarantees the objective never
        increases.  Stops on gradient norm < tol, max_iter, a step-size
        underflow, or when the relative objective decrease stalls below
        float resolution for several iterations in a row.
        """
        del seed  # deterministic without randomness
        d = X.shape[1]
        wb = np.zeros(d + 1)
        loss, grad = lr_loss_grad(wb, X, y, sw, C)
        history = [loss]
        eta = 1.0 / max(1.0, float(sw.sum()))
        prev_wb = None
        prev_grad = None
        stalled = 0
        it = 0
        for it in range(1, max_iter + 1):
            gnorm2 = float(grad @ grad)
            if np.sqrt(gnorm2) < tol:
                break
            if prev_wb is not None:
                s = wb - prev_wb
                g = grad - prev_grad
                sg = float(s @ g)
                if sg > 1e-300:
                    eta = float(s @ s) / sg
            eta = min(max(eta, 1e-16), 1e8)
            prev_wb, prev_grad = wb, grad
            cand = wb - eta * grad
            cand_loss = lr_loss(cand, X, y, sw, C)
            while cand_loss > loss - 0.25 * eta * gnorm2 and eta >= 1e-16:
                eta *= 0.5
                cand = wb - eta * grad
                cand_loss = lr_loss(cand, X, y, sw, C)
            if eta < 1e-16 or cand_loss > loss:
                break  # numerically stuck at the optimum
            decrease = loss - cand_loss
            wb = cand
            loss, grad = lr_loss_grad(wb, X, y, sw, C)
            history.append(loss)
            if decrease <= 1e-10 * max(1.0, abs(loss)):
                stalled += 1
                if stalled >= 10:
                    break
            else:
                stalled = 0
        return cls(wb[:-1].copy(), float(wb[-1]), C, history, it)

    def score_rows(self, X: np.ndarray) -> np.ndarray:
        return _sigmoid(X @ self.weights + self.intercept)

    def to_dict(self) -> dict:
        return {
            "weights": self.weights.tolist(),
            "intercept": self.intercept,
            "C": self.C,
        }

    @classmethod
    def from_dict(cls, d: dict) -> "LogisticRegressionModel":
        return cls(np.asarray(d["weights"], dtype=np.float64), float(d["intercept"]), float(d["C"]))


@dataclass
class LinearSvmModel:
    """Linear hinge-loss SVM trained by deterministic full-batch subgradient
    descent; scores squash the margin through a sigmoid so thresholding at
    0.5 is the usual sign rule."""

    weights: np.ndarray
    intercept: float
    C: float

    @classmethod
    def train(
        cls,
        X: np.ndarray,
        y: np.ndarray,
        sw: np.ndarray,
        C: float = 1.0,
        lr0: float = 0.5,
        n_iter: int = 2000,
        seed: int = 0,
    ) -> "LinearSvmModel":
        del seed
        t = np.where(y == 1, 1.0, -1.0)
        w_total = float(sw.sum())
        lam = 1.0 / (C * w_total)
        d = X.shape[1]
        w = np.zeros(d)
        b = 0.0
        for step in range(1, int(n_iter) + 1):
            margins = t * (X @ w + b)
            active = margins < 1.0
            coeff = (sw * t * active) / w_total
            grad_w = lam * w - X.T @ coeff
            grad_b = -float(coeff.sum())
            eta = lr0 / (1.0 + lr0 * lam * step)
            w -= eta * grad_w
            b -= eta * grad_b
        return cls(w, float(b), C)

    def score_rows(self, X: np.ndarray) -> np.ndarray:
        return _sigmoid(X @ self.weights + self.intercept)

    def to_dict(self) -> dict:
        return {
            "weights": self.weights.tolist(),
            "intercept": self.intercept,
            "C": self.C,
        }

    @classmethod
    def from_dict(cls, d: dict) -> "LinearSvmModel":
        return cls(np.asarray(d["weights"], dtype=np.float64), float(d["intercept"]), float(d["C"]))
