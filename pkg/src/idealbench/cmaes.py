"""Single-objective CMA-ES with population-size adaptation.

One `CmaProcedure` owns the full strategy state of one run: distribution
mean, step size, covariance with cached eigendecomposition, the two
evolution paths, and the population-size adaptation bookkeeping.  It is
warm-started from an external solution set, accepts injected candidates in
`tell`, and reports the four stopping criteria (three conventional, one
exceptional) after every generation.
"""

from __future__ import annotations

import math
import warnings
from collections import deque
from dataclasses import dataclass

import numpy as np

from .core import BoxBounds, clamp_to_bounds

PSA_BETA = 0.4
PSA_ALPHA = 1.4
INJECTION_CLIP = 2.0  # Mahalanobis norm cap for injected steps, times sqrt(n)
WARM_START_QUANTILE = 0.1

CONVENTIONAL = frozenset({"NoEffectAxis", "NoEffectCoord", "TolFunTolX"})
EXCEPTIONAL = frozenset({"TolXUp"})


def default_lambda(n: int) -> int:
    """Default population size, 4 + floor(3 ln n)."""
    if n < 1:
        raise ValueError("dimension must be positive")
    return 4 + int(math.floor(3.0 * math.log(n)))


@dataclass(frozen=True)
class StopReport:
    """Which stopping criteria fired after a generation."""

    triggered: frozenset

    @property
    def conventional(self) -> bool:
        return bool(self.triggered & CONVENTIONAL)

    @property
    def exceptional(self) -> bool:
        return bool(self.triggered & EXCEPTIONAL)

    @property
    def any(self) -> bool:
        return bool(self.triggered)


EMPTY_REPORT = StopReport(frozenset())


def _selection_weights(lam: int, n: int, active: bool = True) -> dict:
    """Recombination weights and learning rates for one population size.

    Standard scheme with active covariance adaptation: the better half gets
    positive weights summing to one, the worse half gets negative weights
    scaled to keep the covariance positive definite.  ``active=False``
    drops the negative half (plain rank-mu updates).
    """
    mu = lam // 2
    raw = np.log((lam + 1) / 2.0) - np.log(np.arange(1, lam + 1))
    pos = raw[:mu]
    w_pos = pos / pos.sum()
    mu_eff = 1.0 / float(np.sum(w_pos**2))
    neg = raw[mu:] if active else np.empty(0)
    mu_eff_neg = (
        float(neg.sum()) ** 2 / float(np.sum(neg**2)) if neg.size else 0.0
    )
    c_sigma = (mu_eff + 2.0) / (n + mu_eff + 5.0)
    d_sigma = 1.0 + 2.0 * max(0.0, math.sqrt((mu_eff - 1.0) / (n + 1.0)) - 1.0) + c_sigma
    c_c = (4.0 + mu_eff / n) / (n + 4.0 + 2.0 * mu_eff / n)
    c_1 = 2.0 / ((n + 1.3) ** 2 + mu_eff)
    c_mu = min(
        1.0 - c_1,
        2.0 * (mu_eff - 2.0 + 1.0 / mu_eff) / ((n + 2.0) ** 2 + mu_eff),
    )
    if neg.size:
        alpha_mu = 1.0 + c_1 / c_mu
        alpha_eff = 1.0 + 2.0 * mu_eff_neg / (mu_eff + 2.0)
        alpha_pd = (1.0 - c_1 - c_mu) / (n * c_mu)
        w_neg = neg * (min(alpha_mu, alpha_eff, alpha_pd) / abs(float(neg.sum())))
    else:
        w_neg = neg
    weights = np.concatenate([w_pos, w_neg])
    return dict(
        mu=mu, weights=w_pos, all_weights=weights, mu_eff=mu_eff,
        c_sigma=c_sigma, d_sigma=d_sigma, c_c=c_c, c_1=c_1, c_mu=c_mu,
    )


def _chi_n(n: int) -> float:
    return math.sqrt(n) * (1.0 - 1.0 / (4.0 * n) + 1.0 / (21.0 * n * n))


def _regularized_cov(points: np.ndarray) -> np.ndarray:
    n = points.shape[1]
    if points.shape[0] < 2:
        cov = np.zeros((n, n))
    else:
        cov = np.atleast_2d(np.cov(points, rowvar=False))
    floor = max(1e-12, 1e-8 * float(np.trace(cov)) / n)
    cov = cov + floor * np.eye(n)
    eigvals = np.linalg.eigvalsh(cov)
    if not np.all(np.isfinite(eigvals)) or eigvals.min() <= 0:
        var = points.var(axis=0) if points.shape[0] > 1 else np.zeros(n)
        cov = np.diag(var + floor)
    return cov


class CmaProcedure:
    """Strategy state of one CMA-ES run with population-size adaptation."""

    def __init__(
        self,
        mean: np.ndarray,
        step_size: float,
        covariance: np.ndarray,
        bounds: BoxBounds | None = None,
        lambda_default: int | None = None,
        psa_enabled: bool = True,
        active_cma: bool = True,
    ):
        self.mean = np.asarray(mean, dtype=float).copy()
        self.n = self.mean.shape[0]
        self.sigma = float(step_size)
        self.cov = np.asarray(covariance, dtype=float).copy()
        self.bounds = bounds
        self.lambda_default = lambda_default or default_lambda(self.n)
        self.lam = self.lambda_default
        self.psa_enabled = psa_enabled
        self.active_cma = active_cma

        self.p_sigma = np.zeros(self.n)
        self.p_c = np.zeros(self.n)
        self.generation = 0
        self.status = "running"

        self._psa_path = np.zeros(self.n)
        self._psa_warmup = 0.0

        self.sigma0 = self.sigma
        self._refresh_eigen()
        self.init_eigenvalues = self._eigvals.copy()

        maxhist = 10 + math.ceil(30 * self.n / self.lambda_default) + 5
        self.best_history: deque = deque(maxlen=maxhist)
        self._last_fitness = np.empty(0)

    # -- construction -----------------------------------------------------

    @classmethod
    def warm_start(
        cls,
        points: np.ndarray,
        fitness: np.ndarray,
        bounds: BoxBounds | None = None,
        quantile: float = WARM_START_QUANTILE,
        psa_enabled: bool = True,
        active_cma: bool = True,
    ) -> "CmaProcedure":
        """Initialize mean and covariance from the best fraction of a
        solution set, moment-matching the promising region; sigma starts
        at 1."""
        points = np.atleast_2d(np.asarray(points, dtype=float))
        fitness = np.asarray(fitness, dtype=float)
        if points.shape[0] == 0:
            raise ValueError("warm start needs a non-empty solution set")
        k = max(1, math.ceil(points.shape[0] * quantile))
        order = np.argsort(fitness, kind="stable")
        donors = points[order[:k]]
        mean = donors.mean(axis=0)
        cov = _regularized_cov(donors)
        return cls(mean, 1.0, cov, bounds=bounds, psa_enabled=psa_enabled,
                   active_cma=active_cma)

    def warm_restart(self, points: np.ndarray, fitness: np.ndarray) -> None:
        """Re-initialize in place from a solution set after an exceptional
        stop; step-size and eigenvalue snapshots are re-taken so later
        divergence checks reference the restarted state."""
        fresh = CmaProcedure.warm_start(
            points, fitness, bounds=self.bounds, psa_enabled=self.psa_enabled,
            active_cma=self.active_cma,
        )
        self.__dict__.update(fresh.__dict__)
        self.status = "restarted"

    # -- internals --------------------------------------------------------

    def _refresh_eigen(self) -> None:
        if not np.all(np.isfinite(self.cov)):
            diag = np.diag(self.cov).copy()
            diag[~np.isfinite(diag)] = 1.0
            self.cov = np.diag(np.maximum(diag, 1e-300))
        self.cov = 0.5 * (self.cov + self.cov.T)
        eigvals, eigvecs = np.linalg.eigh(self.cov)
        # keep the covariance positive definite with a finite condition number
        floor = max(float(eigvals.max()) * 1e-20, 1e-300)
        if eigvals[0] < floor:
            eigvals = np.maximum(eigvals, floor)
            self.cov = (eigvecs * eigvals) @ eigvecs.T
            self.cov = 0.5 * (self.cov + self.cov.T)
        self._eigvals = eigvals
        self._eigvecs = eigvecs
        self._sqrt_eigvals = np.sqrt(eigvals)

    def _cov_inv_sqrt_apply(self, v: np.ndarray) -> np.ndarray:
        b, d = self._eigvecs, self._sqrt_eigvals
        return b @ ((b.T @ v) / d)

    # -- ask / tell -------------------------------------------------------

    def ask(self, rng: np.random.Generator) -> np.ndarray:
        """Sample the current population, clamped to the box if one is set."""
        if self.status == "stopped":
            raise RuntimeError("procedure has stopped")
        z = rng.standard_normal((self.lam, self.n))
        xs = self.mean + self.sigma * ((z * self._sqrt_eigvals) @ self._eigvecs.T)
        if self.bounds is not None:
            xs = clamp_to_bounds(xs, self.bounds)
        return xs

    def tell(
        self,
        xs: np.ndarray,
        fitness: np.ndarray,
        injected_xs: np.ndarray | None = None,
        injected_fitness: np.ndarray | None = None,
    ) -> StopReport:
        """One generation update from scored candidates.

        Injected candidates join the selection pool only while the
        population size sits at its lower bound; their implied steps are
        length-clipped before they can enter the covariance update.
        """
        xs = np.atleast_2d(np.asarray(xs, dtype=float))
        fitness = np.asarray(fitness, dtype=float)
        injected_flag = np.zeros(xs.shape[0], dtype=bool)
        if (
            injected_xs is not None
            and len(injected_xs) > 0
            and self.lam <= self.lambda_default
        ):
            injected_xs = np.atleast_2d(np.asarray(injected_xs, dtype=float))
            injected_fitness = np.asarray(injected_fitness, dtype=float)
            xs = np.vstack([xs, injected_xs])
            fitness = np.concatenate([fitness, injected_fitness])
            injected_flag = np.concatenate(
                [injected_flag, np.ones(injected_xs.shape[0], dtype=bool)]
            )

        finite = np.isfinite(fitness)
        if not finite.all():
            warnings.warn("discarding candidates with non-finite fitness")
            xs, fitness, injected_flag = xs[finite], fitness[finite], injected_flag[finite]
        if xs.shape[0] == 0:
            return self.check_stop()

        lam_sel = min(self.lam, xs.shape[0])
        order = np.argsort(fitness, kind="stable")[:lam_sel]
        params = _selection_weights(lam_sel, self.n, self.active_cma)
        mu, w = params["mu"], params["weights"]
        w_all = params["all_weights"]
        mu_eff = params["mu_eff"]
        c_sigma, d_sigma = params["c_sigma"], params["d_sigma"]
        c_c, c_1, c_mu = params["c_c"], params["c_1"], params["c_mu"]
        chi_n = _chi_n(self.n)

        old_mean = self.mean
        old_sigma = self.sigma
        steps = (xs[order] - old_mean) / old_sigma
        white_sq = np.sum(
            ((steps @ self._eigvecs) / self._sqrt_eigvals) ** 2, axis=1
        )
        cap = INJECTION_CLIP * math.sqrt(self.n)
        for i in range(lam_sel):
            if injected_flag[order[i]] and white_sq[i] > cap * cap:
                factor = cap / math.sqrt(white_sq[i])
                steps[i] *= factor
                white_sq[i] = cap * cap

        step_w = w @ steps[:mu]
        self.mean = old_mean + old_sigma * step_w

        csn = self._cov_inv_sqrt_apply(step_w)
        self.p_sigma = (1.0 - c_sigma) * self.p_sigma + math.sqrt(
            c_sigma * (2.0 - c_sigma) * mu_eff
        ) * csn
        ps_norm = float(np.linalg.norm(self.p_sigma))
        denom = math.sqrt(1.0 - (1.0 - c_sigma) ** (2 * (self.generation + 1)))
        h_sigma = ps_norm / denom < (1.4 + 2.0 / (self.n + 1.0)) * chi_n
        self.p_c = (1.0 - c_c) * self.p_c + (
            math.sqrt(c_c * (2.0 - c_c) * mu_eff) * step_w if h_sigma else 0.0
        )

        # negative weights are rescaled per candidate to bound the update
        w_circle = w_all.copy()
        negative = w_circle < 0
        w_circle[negative] *= self.n / np.maximum(white_sq[: len(w_all)][negative], 1e-30)
        used = steps[: len(w_all)]
        rank_mu = (used * w_circle[:, None]).T @ used
        delta_h = (1.0 - float(h_sigma)) * c_c * (2.0 - c_c)
        old_cov = self.cov
        self.cov = (
            (1.0 + c_1 * delta_h - c_1 - c_mu * float(w_all.sum())) * old_cov
            + c_1 * np.outer(self.p_c, self.p_c)
            + c_mu * rank_mu
        )
        self.sigma = old_sigma * math.exp(
            min(1.0, (c_sigma / d_sigma) * (ps_norm / chi_n - 1.0))
        )

        self.best_history.append(float(fitness[order[0]]))
        self._last_fitness = fitness[order].copy()
        self.generation += 1

        if self.psa_enabled:
            self._adapt_lambda(old_mean, old_sigma, params)
        self._refresh_eigen()
        return self.check_stop()

    def _adapt_lambda(self, old_mean, old_sigma, params) -> None:
        """Population-size adaptation from an evolution path over the
        distribution mean, taken in the coordinates of the previous
        distribution and normalized so that random selection gives the
        path a unit expected square norm.

        Weak or contradictory selection leaves the path near its neutral
        expectation and the population grows, buying a cleaner update
        signal; a strongly directed search stretches the path beyond the
        threshold and the population falls back toward the default.
        """
        eigvals, eigvecs = self._eigvals, self._eigvecs
        inv_sqrt = eigvecs @ ((1.0 / np.sqrt(np.maximum(eigvals, 1e-30)))[:, None] * eigvecs.T)
        n = self.n
        mu_eff = params["mu_eff"]
        # E|C^{-1/2} dm / sigma|^2 = n / mu_eff under neutral selection
        u = math.sqrt(mu_eff / n) * (inv_sqrt @ (self.mean - old_mean)) / old_sigma
        u_norm = float(np.linalg.norm(u))
        if not math.isfinite(u_norm):
            u = np.zeros(n)
        elif u_norm > 10.0:
            u *= 10.0 / u_norm
        beta = PSA_BETA
        self._psa_path = (1.0 - beta) * self._psa_path + math.sqrt(
            beta * (2.0 - beta)
        ) * u
        self._psa_warmup = (1.0 - beta) ** 2 * self._psa_warmup + beta * (2.0 - beta)
        norm_sq = float(self._psa_path @ self._psa_path)
        exponent = beta * (self._psa_warmup - min(norm_sq, 100.0) / PSA_ALPHA)
        new_lam = int(round(self.lam * math.exp(exponent)))
        self.lam = int(np.clip(new_lam, self.lambda_default, 8 * self.lambda_default))

    # -- stopping ---------------------------------------------------------

    def check_stop(self) -> StopReport:
        """Evaluate the four stopping criteria on the current state."""
        if self.generation == 0:
            return EMPTY_REPORT
        triggered = set()
        mean, sigma = self.mean, self.sigma
        d, b = self._sqrt_eigvals, self._eigvecs

        if all(
            np.all(mean == mean + 0.1 * sigma * d[i] * b[:, i])
            for i in range(self.n)
        ):
            triggered.add("NoEffectAxis")

        diag_sd = sigma * np.sqrt(np.diag(self.cov))
        if np.all(mean == mean + 0.2 * diag_sd):
            triggered.add("NoEffectCoord")

        hist_len = 10 + math.ceil(30 * self.n / self.lam)
        if len(self.best_history) >= hist_len and self._last_fitness.size:
            window = list(self.best_history)[-hist_len:]
            vals = np.concatenate([window, self._last_fitness])
            flat = float(vals.max() - vals.min()) < 1e-3
            tol_x = np.all(diag_sd < 1e-6 * self.sigma0) and np.all(
                sigma * np.abs(self.p_c) < 1e-6 * self.sigma0
            )
            if flat and tol_x:
                triggered.add("TolFunTolX")

        if np.any(sigma * d > 1e4 * self.sigma0 * np.sqrt(self.init_eigenvalues)):
            triggered.add("TolXUp")

        return StopReport(frozenset(triggered))

    def stop(self) -> None:
        self.status = "stopped"

    @property
    def live(self) -> bool:
        return self.status != "stopped"
