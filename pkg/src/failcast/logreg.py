"""Weighted L2-penalized logistic regression, implemented from first
principles.

The model maps a feature vector x to
``p = exp(a + b.x) / (1 + exp(a + b.x))`` and is fitted by minimizing the
weighted penalized negative log-likelihood

    sum_i w_i * (-y_i log p_i - (1 - y_i) log(1 - p_i)) + l2/2 * ||b||^2

with the penalty on the slopes only.  The primary solver is damped Newton
(step halving whenever the objective would not decrease); a plain
gradient-descent solver with Armijo backtracking is kept as an
independent cross-check.  Both start from zero parameters and are fully
deterministic.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .schema import FeatureEncoding

_P_LO = np.finfo(float).tiny
_P_HI = float(np.nextafter(1.0, 0.0))
_MAX_HALVINGS = 60

SOLVERS = ("newton", "gradient_descent")


class UnfittableDataError(Exception):
    """Raised when the labels carry only one class."""


class FitError(Exception):
    """Raised when iteration produces a non-finite objective."""

    def __init__(self, iteration, message):
        self.iteration = iteration
        self.message = message
        super().__init__(f"iteration {iteration}: {message}")


@dataclass(frozen=True)
class FitConfig:
    l2_strength: float = 1.0
    tolerance: float = 1e-8        # on the gradient max-norm
    max_iterations: int = 100
    solver: str = "newton"

    def __post_init__(self):
        if self.l2_strength < 0:
            raise ValueError("l2_strength must be non-negative")
        if self.tolerance <= 0:
            raise ValueError("tolerance must be positive")
        if self.max_iterations < 1:
            raise ValueError("max_iterations must be positive")
        if self.solver not in SOLVERS:
            raise ValueError(f"solver must be one of {SOLVERS}")


@dataclass
class FitMeta:
    iterations: int
    final_objective: float
    converged: bool


@dataclass
class LogisticModel:
    alpha: float
    beta: np.ndarray
    encoding: FeatureEncoding | None
    fit_meta: FitMeta | None = None


def sigmoid(z):
    """Logistic function, overflow-safe and strictly inside (0, 1)."""
    z = np.asarray(z, dtype=float)
    out = np.empty_like(z)
    pos = z >= 0
    out[pos] = 1.0 / (1.0 + np.exp(-z[pos]))
    ez = np.exp(z[~pos])
    out[~pos] = ez / (1.0 + ez)
    return np.clip(out, _P_LO, _P_HI)


def predict_proba(model: LogisticModel, x):
    """Failure probability for one encoded vector or a matrix of them."""
    x = np.asarray(x, dtype=float)
    single = x.ndim == 1
    if x.shape[-1] != model.beta.shape[0]:
        raise ValueError(
            f"feature dimension {x.shape[-1]} does not match model ({model.beta.shape[0]})")
    z = model.alpha + x @ model.beta
    p = sigmoid(z)
    return float(p) if single else p


def predict(model: LogisticModel, x, threshold=0.5):
    """Hard class call: probability at or above the threshold is positive."""
    if not 0.0 < threshold < 1.0:
        raise ValueError("threshold must lie in (0, 1)")
    p = predict_proba(model, x)
    if isinstance(p, float):
        return p >= threshold
    return p >= threshold


def _nll_terms(z, y):
    # -y log p - (1-y) log(1-p) = log(1 + exp(z)) - y z, computed safely
    return np.logaddexp(0.0, z) - y * z


def objective(params, data, config: FitConfig) -> float:
    """Weighted penalized negative log-likelihood at (alpha, beta)."""
    alpha, beta = params
    beta = np.asarray(beta, dtype=float)
    z = alpha + data.rows @ beta
    y = data.labels.astype(float)
    value = float(np.dot(data.sample_weights, _nll_terms(z, y)))
    return value + 0.5 * config.l2_strength * float(np.dot(beta, beta))


def gradient(params, data, config: FitConfig) -> np.ndarray:
    """Analytic gradient, intercept component first (no penalty on it)."""
    alpha, beta = params
    beta = np.asarray(beta, dtype=float)
    z = alpha + data.rows @ beta
    residual = data.sample_weights * (sigmoid(z) - data.labels.astype(float))
    g_alpha = float(residual.sum())
    g_beta = data.rows.T @ residual + config.l2_strength * beta
    return np.concatenate(([g_alpha], g_beta))


def _hessian(params, data, config):
    alpha, beta = params
    z = alpha + data.rows @ beta
    p = sigmoid(z)
    s = data.sample_weights * p * (1.0 - p)
    d = beta.shape[0]
    hess = np.empty((d + 1, d + 1))
    hess[0, 0] = s.sum()
    sx = data.rows.T @ s
    hess[0, 1:] = sx
    hess[1:, 0] = sx
    hess[1:, 1:] = data.rows.T @ (s[:, None] * data.rows)
    hess[1:, 1:] += config.l2_strength * np.eye(d)
    return hess


def _check_finite(value, iteration):
    if not np.isfinite(value):
        raise FitError(iteration, f"objective became non-finite ({value})")


def _descend(data, config, step_fn):
    """Shared damped-descent loop; step_fn proposes a direction."""
    d = data.rows.shape[1]
    alpha, beta = 0.0, np.zeros(d)
    obj = objective((alpha, beta), data, config)
    _check_finite(obj, 0)
    iterations = 0
    prev_norm = np.inf
    for iteration in range(1, config.max_iterations + 1):
        grad = gradient((alpha, beta), data, config)
        grad_norm = np.max(np.abs(grad))
        if grad_norm <= config.tolerance:
            break
        direction = step_fn((alpha, beta), grad)
        scale = 1.0
        accepted = False
        for _ in range(_MAX_HALVINGS):
            cand_alpha = alpha - scale * direction[0]
            cand_beta = beta - scale * direction[1:]
            cand_obj = objective((cand_alpha, cand_beta), data, config)
            _check_finite(cand_obj, iteration)
            if cand_obj <= obj:
                accepted = True
                break
            scale *= 0.5
        if not accepted:
            break
        stalled = cand_obj == obj and grad_norm >= prev_norm
        alpha, beta, obj = cand_alpha, cand_beta, cand_obj
        iterations = iteration
        if stalled:
            # objective at float resolution and gradient no longer
            # shrinking: further steps cannot make progress
            break
        prev_norm = grad_norm
    grad = gradient((alpha, beta), data, config)
    converged = bool(np.max(np.abs(grad)) <= config.tolerance)
    return alpha, beta, FitMeta(iterations=iterations, final_objective=obj,
                                converged=converged)


def _newton_direction(data, config):
    def step(params, grad):
        hess = _hessian(params, data, config)
        try:
            return np.linalg.solve(hess, grad)
        except np.linalg.LinAlgError:
            return np.linalg.lstsq(hess, grad, rcond=None)[0]
    return step


def fit(data, config: FitConfig = FitConfig()) -> LogisticModel:
    """Fit the model; deterministic for fixed data and config.

    Requires both classes present.  The converged flag reports whether the
    gradient max-norm reached the tolerance within max_iterations.
    """
    if data.rows.shape[0] == 0:
        raise UnfittableDataError("no rows to fit")
    n_pos = int(data.labels.sum())
    if n_pos == 0 or n_pos == len(data.labels):
        raise UnfittableDataError(
            "labels contain a single class; both classes are required")
    if config.solver == "newton":
        step_fn = _newton_direction(data, config)
    else:
        step_fn = _gd_step_factory(data, config)
    alpha, beta, meta = _descend(data, config, step_fn)
    return LogisticModel(alpha=alpha, beta=beta, encoding=data.encoding, fit_meta=meta)


def _gd_step_factory(data, config):
    """Gradient-only directions: no curvature matrix, so this route is
    independent of the Newton solver.  Step length starts at the inverse
    Lipschitz bound and then follows Barzilai-Borwein estimates; the
    damped outer loop still enforces objective descent."""
    # Lipschitz bound for the weighted logistic loss with intercept column
    aug_sq = 1.0 + np.einsum("ij,ij->i", data.rows, data.rows)
    lipschitz = 0.25 * float(np.dot(data.sample_weights, aug_sq)) + config.l2_strength
    base = 1.0 / max(lipschitz, 1e-12)
    state = {}

    def step(params, grad):
        vec = np.concatenate(([params[0]], params[1]))
        size = base
        if "params" in state:
            d_params = vec - state["params"]
            d_grad = grad - state["grad"]
            denom = float(d_grad @ d_grad)
            if denom > 0.0:
                bb = float(d_params @ d_grad) / denom
                if np.isfinite(bb) and bb > 0.0:
                    size = bb
        state["params"] = vec
        state["grad"] = grad.copy()
        return size * grad
    return step


# --- model file format -------------------------------------------------------
#
# Plain "key = value" lines; floats printed with %.17g so reloading is
# exact.  Keys: feature list, alpha, beta.<name>, mean.<name>, std.<name>,
# fit.iterations, fit.final_objective, fit.converged.

_FORMAT_HEADER = "# failcast logistic model v1"


def _fmt(x: float) -> str:
    return format(float(x), ".17g")


def save_model(model: LogisticModel, path):
    encoding = model.encoding
    if encoding is None:
        raise ValueError("model has no encoding; cannot serialize")
    lines = [_FORMAT_HEADER]
    lines.append(f"features = {','.join(encoding.feature_names)}")
    lines.append(f"alpha = {_fmt(model.alpha)}")
    for name, value in zip(encoding.feature_names, model.beta):
        lines.append(f"beta.{name} = {_fmt(value)}")
    for name, mean, std in zip(encoding.continuous, encoding.means, encoding.std_devs):
        lines.append(f"mean.{name} = {_fmt(mean)}")
        lines.append(f"std.{name} = {_fmt(std)}")
    if model.fit_meta is not None:
        lines.append(f"fit.iterations = {model.fit_meta.iterations}")
        lines.append(f"fit.final_objective = {_fmt(model.fit_meta.final_objective)}")
        lines.append(f"fit.converged = {int(model.fit_meta.converged)}")
    with open(path, "w") as handle:
        handle.write("\n".join(lines) + "\n")


def load_model(path) -> LogisticModel:
    entries = {}
    with open(path) as handle:
        for raw in handle:
            line = raw.strip()
            if not line or line.startswith("#"):
                continue
            key, _, value = line.partition("=")
            entries[key.strip()] = value.strip()
    if "features" not in entries or "alpha" not in entries:
        raise ValueError(f"{path}: not a model file (missing features/alpha)")
    names = tuple(entries["features"].split(","))
    beta = np.array([float(entries[f"beta.{n}"]) for n in names])
    continuous = tuple(n for n in names if f"mean.{n}" in entries)
    encoding = FeatureEncoding(
        feature_names=names,
        continuous=continuous,
        means=tuple(float(entries[f"mean.{n}"]) for n in continuous),
        std_devs=tuple(float(entries[f"std.{n}"]) for n in continuous),
    )
    meta = None
    if "fit.iterations" in entries:
        meta = FitMeta(iterations=int(entries["fit.iterations"]),
                       final_objective=float(entries["fit.final_objective"]),
                       converged=bool(int(entries["fit.converged"])))
    return LogisticModel(alpha=float(entries["alpha"]), beta=beta,
                         encoding=encoding, fit_meta=meta)
