"""Multinomial distribution and L2-penalized multinomial logistic regression.

The model fixes the last category as the base: its logit is zero and carries
no parameters. Each remaining category j has an intercept and a coefficient
vector, so a K-category model over p features stores (K-1)(p+1) numbers.

Fitting maximizes

    sum_i log theta_{i, label_i}  -  (lambda/2) * ||all parameters||^2

by exact Newton with step-halving while the parameter count is small, and by
limited-memory quasi-Newton ascent above that. A small positive penalty keeps
the optimum finite on separable data, where the unpenalized MLE diverges.

Features are standardized internally for conditioning; the penalty is applied
to the original-scale parameters (pulled back through the standardization
map), and coefficients are mapped back to the original scale before return,
so the reported optimum maximizes exactly the objective documented above.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.special import gammaln

from .errors import NumericError

NEWTON_PARAM_LIMIT = 2000
_LBFGS_MEMORY = 10
_MAX_HALVINGS = 50

OPTIMIZERS = ("auto", "newton", "first_order")


@dataclass(frozen=True)
class MlrModel:
    """Fitted multinomial-logit parameters, base category = last index.

    Parameters
    ----------
    intercepts : np.ndarray
        Shape (K-1,), one intercept per non-base category.
    coefficients : np.ndarray
        Shape (K-1, p), one coefficient row per non-base category.
    """

    intercepts: np.ndarray
    coefficients: np.ndarray

    def __post_init__(self) -> None:
        intercepts = np.ascontiguousarray(self.intercepts, dtype=np.float64)
        coefficients = np.ascontiguousarray(self.coefficients, dtype=np.float64)
        if intercepts.ndim != 1 or coefficients.ndim != 2:
            raise ValueError("intercepts must be (K-1,), coefficients (K-1, p)")
        if coefficients.shape[0] != intercepts.shape[0]:
            raise ValueError(
                f"{intercepts.shape[0]} intercepts vs "
                f"{coefficients.shape[0]} coefficient rows"
            )
        if intercepts.shape[0] < 1:
            raise ValueError("model needs K >= 2, so at least one parameter row")
        if not (np.all(np.isfinite(intercepts)) and np.all(np.isfinite(coefficients))):
            raise ValueError("model parameters must be finite")
        intercepts.setflags(write=False)
        coefficients.setflags(write=False)
        object.__setattr__(self, "intercepts", intercepts)
        object.__setattr__(self, "coefficients", coefficients)

    @property
    def n_categories(self) -> int:
        return self.intercepts.shape[0] + 1

    @property
    def n_features(self) -> int:
        return self.coefficients.shape[1]

    @property
    def base_category(self) -> int:
        return self.n_categories - 1


@dataclass(frozen=True)
class MlrFitConfig:
    """Fitting knobs: penalty strength, iteration cap, gradient tolerance,
    and optimizer choice ("auto" picks Newton up to NEWTON_PARAM_LIMIT
    parameters, first_order above)."""

    l2_penalty: float = 1e-6
    max_iterations: int = 100
    gradient_tolerance: float = 1e-6
    optimizer: str = "auto"

    def __post_init__(self) -> None:
        if self.l2_penalty < 0:
            raise ValueError(f"l2_penalty must be >= 0, got {self.l2_penalty}")
        if self.max_iterations < 1:
            raise ValueError(f"max_iterations must be >= 1, got {self.max_iterations}")
        if self.gradient_tolerance <= 0:
            raise ValueError(
                f"gradient_tolerance must be positive, got {self.gradient_tolerance}"
            )
        if self.optimizer not in OPTIMIZERS:
            raise ValueError(
                f"optimizer must be one of {OPTIMIZERS}, got {self.optimizer!r}"
            )


@dataclass(frozen=True)
class MlrFitResult:
    """A fitted model plus how the optimizer stopped."""

    model: MlrModel
    converged: bool
    iterations: int
    grad_max_norm: float
    optimizer_used: str


def multinomial_pmf(counts, theta, n: int) -> float:
    """Probability of an outcome-count vector under a multinomial distribution.

    Computed through log-gamma so large trial counts do not overflow the
    factorials; cells with zero count contribute a factor of one even when
    their probability is zero.
    """
    counts = np.asarray(counts)
    theta = np.asarray(theta, dtype=np.float64)
    if counts.shape != theta.shape or counts.ndim != 1:
        raise ValueError(
            f"counts shape {counts.shape} and theta shape {theta.shape} must be "
            f"equal 1-D vectors"
        )
    if not np.all(counts == np.floor(counts)) or np.any(counts < 0):
        raise ValueError("counts must be non-negative integers")
    counts = counts.astype(np.int64)
    if int(counts.sum()) != n:
        raise ValueError(f"counts sum to {int(counts.sum())}, expected n={n}")
    if np.any(theta < 0):
        raise ValueError("theta entries must be non-negative")
    if abs(float(theta.sum()) - 1.0) > 1e-12:
        raise ValueError(f"theta sums to {float(theta.sum())!r}, expected 1")
    positive = counts > 0
    if np.any(theta[positive] == 0.0):
        return 0.0
    log_coef = gammaln(n + 1) - np.sum(gammaln(counts + 1))
    log_prob = np.sum(counts[positive] * np.log(theta[positive]))
    return float(np.exp(log_coef + log_prob))


def _logit_matrix(model: MlrModel, x: np.ndarray) -> np.ndarray:
    """(N, K) logits with the base-category column fixed at zero."""
    x = np.atleast_2d(np.asarray(x, dtype=np.float64))
    if x.shape[1] != model.n_features:
        raise ValueError(
            f"input has {x.shape[1]} features, model expects {model.n_features}"
        )
    logits = np.zeros((x.shape[0], model.n_categories))
    logits[:, :-1] = model.intercepts + x @ model.coefficients.T
    return logits


def _softmax(logits: np.ndarray) -> np.ndarray:
    shifted = logits - logits.max(axis=1, keepdims=True)
    e = np.exp(shifted)
    return e / e.sum(axis=1, keepdims=True)


def class_probabilities(model: MlrModel, x: np.ndarray) -> np.ndarray:
    """Category probabilities for one feature vector; sums to 1."""
    return _softmax(_logit_matrix(model, x))[0]


def class_probability_matrix(model: MlrModel, x: np.ndarray) -> np.ndarray:
    """Row-wise category probabilities for a feature matrix."""
    return _softmax(_logit_matrix(model, x))


def predict_class(model: MlrModel, x: np.ndarray) -> int:
    """Most probable category; ties break toward the lowest index."""
    return int(np.argmax(class_probabilities(model, x)))


def _check_labels(labels: np.ndarray, k: int) -> np.ndarray:
    labels = np.asarray(labels)
    if labels.ndim != 1:
        raise ValueError("labels must be a 1-D vector")
    if not np.all(labels == np.floor(labels)):
        raise ValueError("labels must be integers")
    labels = labels.astype(np.int64)
    if labels.size and (labels.min() < 0 or labels.max() >= k):
        raise ValueError(
            f"labels must lie in 0..{k - 1}, got range "
            f"[{labels.min()}, {labels.max()}]"
        )
    return labels


def penalized_log_likelihood(
    model: MlrModel, features: np.ndarray, labels: np.ndarray, l2_penalty: float
) -> float:
    """Multinomial log-likelihood of per-row labels minus the L2 penalty."""
    labels = _check_labels(labels, model.n_categories)
    logits = _logit_matrix(model, features)
    if logits.shape[0] != labels.shape[0]:
        raise ValueError(
            f"{logits.shape[0]} feature rows vs {labels.shape[0]} labels"
        )
    shifted = logits - logits.max(axis=1, keepdims=True)
    lse = np.log(np.exp(shifted).sum(axis=1)) + logits.max(axis=1)
    ll = float(np.sum(logits[np.arange(labels.shape[0]), labels] - lse))
    penalty = 0.5 * l2_penalty * (
        float(np.sum(model.intercepts**2)) + float(np.sum(model.coefficients**2))
    )
    return ll - penalty


def penalized_gradient(
    model: MlrModel, features: np.ndarray, labels: np.ndarray, l2_penalty: float
) -> np.ndarray:
    """Gradient of the penalized log-likelihood, flattened in the fixed order
    (intercept_1, coefs_1, ..., intercept_{K-1}, coefs_{K-1})."""
    labels = _check_labels(labels, model.n_categories)
    x = np.atleast_2d(np.asarray(features, dtype=np.float64))
    probs = class_probability_matrix(model, x)
    one_hot = np.zeros_like(probs)
    one_hot[np.arange(labels.shape[0]), labels] = 1.0
    residual = (one_hot - probs)[:, :-1]  # base category carries no parameters
    grad = np.empty((model.n_categories - 1, model.n_features + 1))
    grad[:, 0] = residual.sum(axis=0) - l2_penalty * model.intercepts
    grad[:, 1:] = residual.T @ x - l2_penalty * model.coefficients
    return grad.ravel()


# ---------------------------------------------------------------------------
# Fitting
# ---------------------------------------------------------------------------


class _Objective:
    """Penalized objective in standardized coordinates.

    Internally the design matrix is standardized column-wise. The linear map
    back to original-scale parameters is, per category,

        coefs  = coefs' / scale
        intercept = intercept' - sum_c (mean_c / scale_c) * coefs'_c

    and the penalty is (lambda/2) ||T w'||^2 with T that map, so the optimum
    found here is the optimum of the original-scale objective.
    """

    def __init__(
        self,
        x: np.ndarray,
        labels: np.ndarray,
        n_categories: int,
        active: np.ndarray,
        l2_penalty: float,
    ) -> None:
        self.x = x
        self.labels = labels
        self.k = n_categories
        self.active = active  # indices of non-base categories with data
        self.lam = l2_penalty
        self.n, self.p = x.shape

        self.mean = x.mean(axis=0)
        scale = x.std(axis=0)
        scale[scale == 0.0] = 1.0
        self.scale = scale
        self.z = (x - self.mean) / self.scale

        # T maps standardized params [a', b'] to original [a, b] per category
        t = np.zeros((self.p + 1, self.p + 1))
        t[0, 0] = 1.0
        t[0, 1:] = -self.mean / self.scale
        t[1:, 1:] = np.diag(1.0 / self.scale)
        self.t = t
        self.t_inv = np.linalg.inv(t)
        self.penalty_quad = l2_penalty * (t.T @ t)

        self.one_hot = np.zeros((self.n, len(active)))
        for col, j in enumerate(active):
            self.one_hot[labels == j, col] = 1.0

    def _logits(self, w: np.ndarray) -> np.ndarray:
        """w has shape (A, p+1); returns (N, K) logits, inactive columns 0."""
        logits = np.zeros((self.n, self.k))
        logits[:, self.active] = w[:, 0] + self.z @ w[:, 1:].T
        return logits

    def probabilities(self, w: np.ndarray) -> np.ndarray:
        return _softmax(self._logits(w))

    def to_original(self, w: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
        """Map standardized (A, p+1) params to full original-scale (K-1, p+1)."""
        full = np.zeros((self.k - 1, self.p + 1))
        for col, j in enumerate(self.active):
            full[j] = self.t @ w[col]
        return full[:, 0], full[:, 1:]

    def value(self, w: np.ndarray) -> float:
        logits = self._logits(w)
        shifted = logits - logits.max(axis=1, keepdims=True)
        lse = np.log(np.exp(shifted).sum(axis=1)) + logits.max(axis=1)
        ll = float(np.sum(logits[np.arange(self.n), self.labels] - lse))
        return ll - self._penalty(w)

    def _penalty(self, w: np.ndarray) -> float:
        mapped = w @ self.t.T
        return 0.5 * self.lam * float(np.sum(mapped * mapped))

    def value_and_grad(self, w: np.ndarray) -> tuple[float, np.ndarray]:
        """One pass computing the objective and its standardized-space gradient."""
        logits = self._logits(w)
        top = logits.max(axis=1, keepdims=True)
        e = np.exp(logits - top)
        denom = e.sum(axis=1, keepdims=True)
        lse = np.log(denom[:, 0]) + top[:, 0]
        ll = float(np.sum(logits[np.arange(self.n), self.labels] - lse))
        residual = self.one_hot - e[:, self.active] / denom
        grad = np.empty_like(w)
        grad[:, 0] = residual.sum(axis=0)
        grad[:, 1:] = residual.T @ self.z
        grad -= w @ self.penalty_quad.T
        return ll - self._penalty(w), grad

    def gradient(self, w: np.ndarray) -> np.ndarray:
        """Gradient in standardized coordinates, shape (A, p+1)."""
        return self.value_and_grad(w)[1]

    def grad_norm_original(self, grad_std: np.ndarray) -> float:
        """Max-norm of the penalized gradient w.r.t. original-scale parameters.

        The objective here is the original one composed with the linear
        standardization map, so its gradient is the original gradient pushed
        through the transpose of that map; inverting recovers it exactly.
        """
        return float(np.abs(grad_std @ self.t_inv).max())

    def newton_direction(self, w: np.ndarray, grad: np.ndarray) -> np.ndarray:
        """Solve (-Hessian) d = gradient for the ascent direction."""
        a = len(self.active)
        d = self.p + 1
        probs = self.probabilities(w)[:, self.active]
        phi = np.hstack([np.ones((self.n, 1)), self.z])

        neg_h = np.zeros((a * d, a * d))
        for col in range(a):
            block = (phi * probs[:, col : col + 1]).T @ phi
            neg_h[col * d : (col + 1) * d, col * d : (col + 1) * d] = (
                block + self.penalty_quad
            )
        gmat = (probs[:, :, None] * phi[:, None, :]).reshape(self.n, a * d)
        neg_h -= gmat.T @ gmat

        try:
            step = np.linalg.solve(neg_h, grad.ravel())
        except np.linalg.LinAlgError:
            # Singular curvature (possible at lambda = 0 on separable data):
            # regularize slightly rather than fail.
            neg_h[np.diag_indices_from(neg_h)] += 1e-8
            step = np.linalg.solve(neg_h, grad.ravel())
        return step.reshape(a, d)


def _ascend(
    objective: _Objective, w: np.ndarray, direction: np.ndarray, f0: float
) -> tuple[np.ndarray, float, bool]:
    """Backtracking step halving; accepts only non-decreasing objective."""
    step = 1.0
    for _ in range(_MAX_HALVINGS):
        candidate = w + step * direction
        f1 = objective.value(candidate)
        if np.isfinite(f1) and f1 >= f0:
            return candidate, f1, True
        step *= 0.5
    return w, f0, False


def _fit_newton(
    objective: _Objective, config: MlrFitConfig
) -> tuple[np.ndarray, bool, int, float]:
    w = np.zeros((len(objective.active), objective.p + 1))
    f, grad = objective.value_and_grad(w)
    grad_norm = objective.grad_norm_original(grad)
    iterations = 0
    while grad_norm > config.gradient_tolerance and iterations < config.max_iterations:
        direction = objective.newton_direction(w, grad)
        w, f, moved = _ascend(objective, w, direction, f)
        iterations += 1
        f, grad = objective.value_and_grad(w)
        grad_norm = objective.grad_norm_original(grad)
        if not moved:
            break
    return w, grad_norm <= config.gradient_tolerance, iterations, grad_norm


def _fit_lbfgs(
    objective: _Objective, config: MlrFitConfig
) -> tuple[np.ndarray, bool, int, float]:
    shape = (len(objective.active), objective.p + 1)
    w = np.zeros(shape).ravel()
    f, grad2d = objective.value_and_grad(w.reshape(shape))
    grad = grad2d.ravel()
    s_hist: list[np.ndarray] = []
    y_hist: list[np.ndarray] = []
    grad_norm = objective.grad_norm_original(grad2d)
    iterations = 0
    while grad_norm > config.gradient_tolerance and iterations < config.max_iterations:
        # Two-loop recursion on the ascent problem (signs mirror minimization).
        q = grad.copy()
        alphas = []
        for s, yv in zip(reversed(s_hist), reversed(y_hist)):
            a = (s @ q) / (yv @ s)
            alphas.append(a)
            q -= a * yv
        if y_hist:
            gamma = (s_hist[-1] @ y_hist[-1]) / (y_hist[-1] @ y_hist[-1])
            q *= gamma
        for (s, yv), a in zip(zip(s_hist, y_hist), reversed(alphas)):
            b = (yv @ q) / (yv @ s)
            q += (a - b) * s
        direction = q
        if direction @ grad <= 0:
            direction = grad.copy()

        step = 1.0 if s_hist else min(1.0, 1.0 / max(1.0, float(np.abs(grad).sum())))
        moved = False
        slope = float(direction @ grad)
        for _ in range(_MAX_HALVINGS):
            cand = w + step * direction
            f1, new_grad2d = objective.value_and_grad(cand.reshape(shape))
            if np.isfinite(f1) and f1 >= f + 1e-4 * step * slope:
                moved = True
                break
            step *= 0.5
        if not moved:
            break
        new_grad = new_grad2d.ravel()
        s = cand - w
        yv = grad - new_grad  # ascent: curvature uses the negated difference
        if (s @ yv) > 1e-10 * np.linalg.norm(s) * np.linalg.norm(yv):
            s_hist.append(s)
            y_hist.append(yv)
            if len(s_hist) > _LBFGS_MEMORY:
                s_hist.pop(0)
                y_hist.pop(0)
        w, grad, f = cand, new_grad, f1
        iterations += 1
        grad_norm = objective.grad_norm_original(new_grad2d)
    return (
        w.reshape(shape),
        grad_norm <= config.gradient_tolerance,
        iterations,
        grad_norm,
    )


def fit_mlr(
    features: np.ndarray,
    labels: np.ndarray,
    n_categories: int,
    config: MlrFitConfig,
    seed: int = 0,
) -> MlrFitResult:
    """Fit a multinomial logistic model by penalized maximum likelihood.

    Starts from all-zero coefficients. Categories absent from the labels are
    pinned at zero coefficients; they stay addressable at prediction time.
    The ``seed`` parameter is reserved for stochastic optimizers; both
    built-in optimizers are deterministic, so fits do not depend on it.

    Returns
    -------
    MlrFitResult
        The fitted model plus whether the gradient tolerance was met before
        the iteration cap.
    """
    del seed
    x = np.atleast_2d(np.asarray(features, dtype=np.float64))
    if x.size == 0:
        raise ValueError("empty feature matrix")
    if not np.all(np.isfinite(x)):
        raise NumericError("features contain non-finite values")
    if n_categories < 2:
        raise ValueError(f"need n_categories >= 2, got {n_categories}")
    labels = _check_labels(labels, n_categories)
    if labels.shape[0] != x.shape[0]:
        raise ValueError(f"{x.shape[0]} feature rows vs {labels.shape[0]} labels")

    counts = np.bincount(labels, minlength=n_categories)
    active = np.array(
        [j for j in range(n_categories - 1) if counts[j] > 0], dtype=np.int64
    )
    p = x.shape[1]
    if active.size == 0:
        model = MlrModel(np.zeros(n_categories - 1), np.zeros((n_categories - 1, p)))
        return MlrFitResult(model, True, 0, 0.0, "none")

    objective = _Objective(x, labels, n_categories, active, config.l2_penalty)
    n_params = active.size * (p + 1)
    optimizer = config.optimizer
    if optimizer == "auto":
        optimizer = "newton" if n_params <= NEWTON_PARAM_LIMIT else "first_order"
    if optimizer == "newton":
        w, converged, iterations, grad_norm = _fit_newton(objective, config)
    else:
        w, converged, iterations, grad_norm = _fit_lbfgs(objective, config)

    alpha, beta = objective.to_original(w)
    if not (np.all(np.isfinite(alpha)) and np.all(np.isfinite(beta))):
        raise NumericError("optimizer produced non-finite coefficients")
    model = MlrModel(alpha, beta)
    return MlrFitResult(model, converged, iterations, grad_norm, optimizer)
