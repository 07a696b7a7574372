"""
Full-batch trainers with validation-based early stopping.

Five algorithms are available: Levenberg-Marquardt, Moller's scaled conjugate
gradient, and conjugate gradient with Fletcher-Reeves, Polak-Ribiere or
Powell-Beale (restarting, three-term) directions.  The CG variants use a
backtracking line search with the Armijo sufficient-decrease test.

Each algorithm is written as a generator that yields the flat parameter
vector once per epoch and returns a stop reason when it cannot continue.
"""
from __future__ import annotations

import csv
import io
from dataclasses import dataclass, field, replace

import numpy as np

from .network import Network, _as_batch, _targets, gradient, jacobian, mse_loss

ALGORITHMS = ("LM", "SCG", "CG_PowellBeale", "CG_FletcherReeves", "CG_PolakRibiere")

ALIASES = {
    "LM": "LM", "TRAINLM": "LM",
    "SCG": "SCG", "TRAINSCG": "SCG",
    "CG_POWELLBEALE": "CG_PowellBeale", "CG_PB": "CG_PowellBeale", "CGB": "CG_PowellBeale", "TRAINCGB": "CG_PowellBeale",
    "CG_FLETCHERREEVES": "CG_FletcherReeves", "CG_FR": "CG_FletcherReeves", "CGF": "CG_FletcherReeves", "TRAINCGF": "CG_FletcherReeves",
    "CG_POLAKRIBIERE": "CG_PolakRibiere", "CG_PR": "CG_PolakRibiere", "CGP": "CG_PolakRibiere", "TRAINCGP": "CG_PolakRibiere",
}

SHORT_NAMES = {
    "LM": "LM",
    "SCG": "SCG",
    "CG_PowellBeale": "CG_PB",
    "CG_FletcherReeves": "CG_FR",
    "CG_PolakRibiere": "CG_PR",
}

STOP_REASONS = ("goal", "max_epochs", "validation_failures", "gradient_floor", "mu_overflow", "line_search")


def canonical_algorithm(name: str) -> str:
    try:
        return ALIASES[name.upper().replace("-", "_")]
    except KeyError:
        raise ValueError(f"unknown training algorithm {name!r}; choose from {ALGORITHMS}") from None


class TrainingDivergence(FloatingPointError):
    """The training loss became non-finite."""


@dataclass(frozen=True)
class TrainConfig:
    algorithm: str = "LM"
    max_epochs: int = 1000
    goal_mse: float = 0.0
    validation_patience: int = 6
    min_grad: float = 1e-10
    # Levenberg-Marquardt damping schedule
    mu: float = 1e-3
    mu_inc: float = 10.0
    mu_dec: float = 0.1
    mu_max: float = 1e10
    # backtracking line search (CG variants)
    ls_c1: float = 1e-4
    ls_contraction: float = 0.5
    ls_max_halvings: int = 30
    ls_refinements: int = 3
    ls_curvature: float = 0.1
    # scaled conjugate gradient
    scg_sigma: float = 5e-5
    scg_lambda: float = 5e-7

    def __post_init__(self):
        object.__setattr__(self, "algorithm", canonical_algorithm(self.algorithm))
        if self.max_epochs < 0:
            raise ValueError("max_epochs must be >= 0")
        if self.validation_patience < 1:
            raise ValueError("validation_patience must be >= 1")
        if not self.mu > 0:
            raise ValueError("mu must be positive")

    def with_algorithm(self, algorithm: str) -> "TrainConfig":
        return replace(self, algorithm=algorithm)

    def to_dict(self) -> dict:
        return {k: getattr(self, k) for k in self.__dataclass_fields__}


@dataclass
class TrainHistory:
    train_mse: list[float] = field(default_factory=list)
    val_mse: list[float] = field(default_factory=list)
    test_mse: list[float] = field(default_factory=list)
    stop_reason: str = "max_epochs"
    best_epoch: int = 0
    accepted_sse: list[float] = field(default_factory=list)

    @property
    def epochs(self) -> int:
        return len(self.train_mse)

    def to_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["epoch", "train_mse", "val_mse", "test_mse"])
        for i in range(self.epochs):
            w.writerow([i + 1, repr(self.train_mse[i]), repr(self.val_mse[i]), repr(self.test_mse[i])])
        return buf.getvalue()


class _Objective:
    """Training-set MSE, gradient and Gauss-Newton pieces as functions of theta."""

    def __init__(self, net: Network, X, T):
        self.net = net
        self.X, _ = _as_batch(net, X)
        if self.X.shape[0] == 0:
            raise ValueError("training partition is empty")
        self.T = _targets(net, T, self.X.shape[0])
        self.n_resid = self.T.size

    def _net(self, theta):
        return self.net.with_flat(theta)

    def f(self, theta) -> float:
        return mse_loss(self._net(theta), self.X, self.T)

    def grad(self, theta) -> np.ndarray:
        return gradient(self._net(theta), self.X, self.T)

    def jac(self, theta):
        return jacobian(self._net(theta), self.X, self.T)


def _safe_f(obj: _Objective, theta) -> float:
    with np.errstate(over="ignore", invalid="ignore"):
        try:
            val = obj.f(theta)
        except ValueError:  # non-finite parameters
            return np.inf
    return val if np.isfinite(val) else np.inf


def _levenberg_marquardt(obj: _Objective, theta, cfg: TrainConfig, history: TrainHistory):
    mu = cfg.mu
    J, e = obj.jac(theta)
    sse = float(e @ e)
    history.accepted_sse.append(sse)
    eye = np.eye(theta.shape[0])
    while True:
        JtJ, Jte = J.T @ J, J.T @ e
        while True:
            try:
                step = np.linalg.solve(JtJ + mu * eye, -Jte)
            except np.linalg.LinAlgError:
                step = None
            if step is not None:
                trial = theta + step
                sse_new = _safe_f(obj, trial) * obj.n_resid
                if sse_new < sse:
                    # mu floor keeps the damped system non-singular after long runs
                    mu = max(mu * cfg.mu_dec, 1e-20)
                    break
            mu *= cfg.mu_inc
            if mu > cfg.mu_max:
                return "mu_overflow"
        theta = trial
        J, e = obj.jac(theta)
        sse = float(e @ e)
        history.accepted_sse.append(sse)
        yield theta


def _scaled_conjugate_gradient(obj: _Objective, theta, cfg: TrainConfig, history: TrainHistory):
    """Moller (1993); one iteration per epoch, weights unchanged on a failed step."""
    n = theta.shape[0]
    f = obj.f(theta)
    r = -obj.grad(theta)
    p = r.copy()
    lam, lam_bar = cfg.scg_lambda, 0.0
    success, k = True, 0
    delta = 0.0
    while True:
        k += 1
        p2 = p @ p
        if p2 == 0.0:
            return "gradient_floor"
        if success:
            sigma = cfg.scg_sigma / np.sqrt(p2)
            s = (obj.grad(theta + sigma * p) + r) / sigma
            delta = p @ s
        delta += (lam - lam_bar) * p2
        if delta <= 0:
            lam_bar = 2.0 * (lam - delta / p2)
            delta = -delta + lam * p2
            lam = lam_bar
        mu = p @ r
        alpha = mu / delta
        f_new = _safe_f(obj, theta + alpha * p)
        comparison = 2.0 * delta * (f - f_new) / mu**2 if mu != 0 else -1.0
        if comparison >= 0:
            theta = theta + alpha * p
            f = f_new
            r_new = -obj.grad(theta)
            lam_bar, success = 0.0, True
            if k % n == 0:
                p = r_new
            else:
                beta = (r_new @ r_new - r_new @ r) / mu
                p = r_new + beta * p
            r = r_new
            if comparison >= 0.75:
                lam *= 0.25
        else:
            lam_bar, success = lam, False
        if comparison < 0.25:
            lam += delta * (1.0 - comparison) / p2
        lam = min(lam, 1e300)
        yield theta


def _backtrack(obj, theta, f, g, d, alpha0, cfg):
    gd = g @ d
    alpha = alpha0
    for _ in range(cfg.ls_max_halvings + 1):
        f_new = _safe_f(obj, theta + alpha * d)
        if f_new <= f + cfg.ls_c1 * alpha * gd:
            # one safeguarded quadratic-interpolation refinement along d
            curv = f_new - f - gd * alpha
            if curv > 0:
                a_q = -gd * alpha * alpha / (2.0 * curv)
                if 0.1 * alpha < a_q < 4.0 * alpha and a_q != alpha:
                    f_q = _safe_f(obj, theta + a_q * d)
                    if f_q < f_new and f_q <= f + cfg.ls_c1 * a_q * gd:
                        return a_q, f_q
            return alpha, f_new
        alpha *= cfg.ls_contraction
    return None, f


def _conjugate_gradient(obj: _Objective, theta, cfg: TrainConfig, history: TrainHistory):
    variant = cfg.algorithm
    n = theta.shape[0]
    f = obj.f(theta)
    g = obj.grad(theta)
    d = -g
    alpha_prev = gd_prev = None
    # restart direction and gradient change along it (Powell-Beale), steps since restart
    t_dir, t_dy, since = d, None, 0
    while True:
        gd = g @ d
        if gd >= 0:
            d, gd = -g, -(g @ g)
            t_dir, t_dy, since = d, None, 0
        if alpha_prev is None:
            alpha0 = 1.0 / max(np.sqrt(g @ g), 1e-12)
        else:
            alpha0 = 2.0 * alpha_prev * gd_prev / gd
        alpha, f_new = _backtrack(obj, theta, f, g, d, alpha0, cfg)
        if alpha is None:
            if np.array_equal(d, -g):
                return "line_search"
            d = -g
            t_dir, t_dy, since = d, None, 0
            alpha_prev = None
            continue
        theta_new = theta + alpha * d
        g_new = obj.grad(theta_new)
        # secant refinement on the directional derivative until it has shrunk
        # by ls_curvature; keeps the conjugacy tests meaningful
        for _ in range(cfg.ls_refinements):
            gd_new = g_new @ d
            if abs(gd_new) <= cfg.ls_curvature * abs(gd) or gd_new == gd:
                break
            a_s = alpha * gd / (gd - gd_new)
            if not 0.0 < a_s < 10.0 * alpha:
                break
            f_s = _safe_f(obj, theta + a_s * d)
            if not (f_s < f_new and f_s <= f + cfg.ls_c1 * a_s * gd):
                break
            alpha, f_new = a_s, f_s
            theta_new = theta + alpha * d
            g_new = obj.grad(theta_new)
        dg = g_new - g
        if variant in ("CG_FletcherReeves", "CG_PolakRibiere"):
            # both restart along -g once every n steps
            since += 1
            if since >= n:
                d_new, since = -g_new, 0
            elif variant == "CG_FletcherReeves":
                d_new = -g_new + (g_new @ g_new) / (g @ g) * d
            else:
                d_new = -g_new + (g_new @ dg) / (g @ g) * d
        else:
            # a restart starts a new cycle from the two-term (Hestenes-Stiefel)
            # direction, which is remembered together with the gradient change
            # observed along it; later steps add Beale's third term
            if since == 0:
                t_dy = dg
            gnorm2 = g_new @ g_new
            denom = d @ dg
            d_new = -g_new + ((g_new @ dg) / denom if denom != 0 else 0.0) * d
            restart = abs(g @ g_new) >= 0.2 * gnorm2 or since + 1 >= n
            if not restart and since >= 1:
                denom = t_dir @ t_dy
                d_3 = d_new + ((g_new @ t_dy) / denom if denom != 0 else 0.0) * t_dir
                if -1.2 * gnorm2 <= d_3 @ g_new <= -0.8 * gnorm2:
                    d_new = d_3
                else:
                    restart = True
            if d_new @ g_new >= 0:
                d_new = -g_new
            if restart:
                t_dir, t_dy, since = d_new, None, 0
            else:
                since += 1
        alpha_prev, gd_prev = alpha, gd
        theta, f, g, d = theta_new, f_new, g_new, d_new
        yield theta


_TRAINERS = {
    "LM": _levenberg_marquardt,
    "SCG": _scaled_conjugate_gradient,
    "CG_PowellBeale": _conjugate_gradient,
    "CG_FletcherReeves": _conjugate_gradient,
    "CG_PolakRibiere": _conjugate_gradient,
}


def _partition_mse(net: Network, part) -> float:
    if part is None:
        return float("nan")
    X, T = part
    return mse_loss(net, X, T)


def train(
    net: Network,
    train_data,
    validation=None,
    test=None,
    config: TrainConfig = TrainConfig(),
) -> tuple[Network, TrainHistory]:
    """Train ``net`` on ``train_data = (inputs, targets)``.

    Stops on reaching ``goal_mse``, ``max_epochs``, ``validation_patience``
    consecutive epochs without a new best validation MSE, a gradient norm
    below ``min_grad``, damping overflow (LM) or a failed line search (CG).

    Returns the network with the lowest validation MSE seen, counting the
    initial network, or the final network when no validation set is given.
    ``history.best_epoch`` is 0 when the initial network was best.
    """
    obj = _Objective(net, *train_data)
    history = TrainHistory()
    theta = net.get_flat()
    best_theta, best_val = theta, _partition_mse(net, validation)
    if config.max_epochs == 0:
        return net.copy(), history

    fails = 0
    steps = _TRAINERS[config.algorithm](obj, theta, config, history)
    epoch = 0
    while True:
        try:
            theta = next(steps)
        except StopIteration as stop:
            history.stop_reason = stop.value
            break
        epoch += 1
        current = net.with_flat(theta)
        tr = _partition_mse(current, train_data)
        if not np.isfinite(tr):
            raise TrainingDivergence(f"training MSE became non-finite at epoch {epoch}")
        va = _partition_mse(current, validation)
        history.train_mse.append(tr)
        history.val_mse.append(va)
        history.test_mse.append(_partition_mse(current, test))

        if validation is None:
            best_theta, history.best_epoch = theta, epoch
        elif va < best_val:
            best_theta, best_val, history.best_epoch = theta, va, epoch
            fails = 0
        else:
            fails += 1

        if tr <= config.goal_mse:
            history.stop_reason = "goal"
            break
        if np.linalg.norm(obj.grad(theta)) < config.min_grad:
            history.stop_reason = "gradient_floor"
            break
        if validation is not None and fails >= config.validation_patience:
            history.stop_reason = "validation_failures"
            break
        if epoch >= config.max_epochs:
            history.stop_reason = "max_epochs"
            break
    return net.with_flat(best_theta), history
