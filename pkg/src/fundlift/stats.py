"""Estimation and testing utilities.

Logistic MLE (Newton-Raphson) with average marginal effects and delta-method
standard errors, OLS, paired conditional logit, Wald tests, PCA on the
correlation matrix, Cohen's kappa, and the two-sample Kolmogorov-Smirnov
test. Estimators are implemented here; scipy supplies only distribution
tail functions.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass

import numpy as np
from scipy.special import kolmogorov as _kolmogorov_sf
from scipy.stats import chi2 as _chi2
from scipy.stats import norm as _norm

MAX_ABS_COEF = 30.0  # |beta| beyond this is treated as separation


class SeparationError(ValueError):
    pass


def _sigmoid(z: np.ndarray) -> np.ndarray:
    out = np.empty_like(z, dtype=np.float64)
    pos = z >= 0
    out[pos] = 1.0 / (1.0 + np.exp(-z[pos]))
    ez = np.exp(z[~pos])
    out[~pos] = ez / (1.0 + ez)
    return out


def _log_likelihood(y: np.ndarray, p: np.ndarray) -> float:
    eps = 1e-12
    p = np.clip(p, eps, 1 - eps)
    return float(np.sum(y * np.log(p) + (1 - y) * np.log(1 - p)))


@dataclass
class LogitFit:
    """Logistic MLE result; covariance is the inverse observed information."""

    coefficients: np.ndarray
    covariance: np.ndarray
    log_likelihood: float
    null_log_likelihood: float
    n_iterations: int
    converged: bool
    gradient_norm: float
    feature_names: tuple[str, ...] | None = None
    has_intercept: bool = True

    @property
    def mcfadden_r2(self) -> float:
        if self.null_log_likelihood == 0.0:
            return 0.0
        return 1.0 - self.log_likelihood / self.null_log_likelihood

    def standard_errors(self) -> np.ndarray:
        return np.sqrt(np.diag(self.covariance))

    def predict_proba(self, X: np.ndarray) -> np.ndarray:
        X = np.asarray(X, dtype=np.float64)
        if self.has_intercept:
            X = np.column_stack([np.ones(len(X)), X])
        return _sigmoid(X @ self.coefficients)


def _newton_logistic(
    X: np.ndarray, y: np.ndarray, tol: float = 1e-8, max_iter: int = 100
) -> tuple[np.ndarray, np.ndarray, float, int, float]:
    n, p = X.shape
    beta = np.zeros(p)
    ll = _log_likelihood(y, _sigmoid(X @ beta))
    grad_norm = np.inf
    it = 0
    for it in range(1, max_iter + 1):
        mu = _sigmoid(X @ beta)
        grad = X.T @ (y - mu)
        grad_norm = float(np.max(np.abs(grad))) if p else 0.0
        if grad_norm < tol:
            break
        w = mu * (1 - mu)
        info = (X * w[:, None]).T @ X
        try:
            step = np.linalg.solve(info, grad)
        except np.linalg.LinAlgError as e:
            raise np.linalg.LinAlgError(f"singular information matrix: {e}") from e
        # step-halving on likelihood decrease
        scale = 1.0
        for _ in range(30):
            candidate = beta + scale * step
            ll_new = _log_likelihood(y, _sigmoid(X @ candidate))
            if ll_new >= ll - 1e-12:
                beta, ll = candidate, ll_new
                break
            scale /= 2.0
        else:
            break
        if np.max(np.abs(beta)) > MAX_ABS_COEF:
            raise SeparationError(
                f"|beta| exceeded {MAX_ABS_COEF}; data look separated"
            )
    mu = _sigmoid(X @ beta)
    grad = X.T @ (y - mu)
    grad_norm = float(np.max(np.abs(grad))) if p else 0.0
    w = mu * (1 - mu)
    info = (X * w[:, None]).T @ X
    cov = np.linalg.inv(info) if p else np.zeros((0, 0))
    return beta, cov, ll, it, grad_norm


def fit_logistic(
    X: np.ndarray, y: np.ndarray, feature_names: tuple[str, ...] | None = None
) -> LogitFit:
    """Newton-Raphson logistic regression with an intercept prepended.

    Stops when the score sup-norm drops below 1e-8 (or at 100 iterations);
    raises ``SeparationError`` when coefficients run away.
    """
    X = np.atleast_2d(np.asarray(X, dtype=np.float64))
    if X.size == 0:
        X = X.reshape(len(y), 0)
    y = np.asarray(y, dtype=np.float64).ravel()
    if set(np.unique(y)) - {0.0, 1.0}:
        raise ValueError("y must be binary 0/1")
    if np.isnan(X).any():
        raise ValueError("X contains missing values; impute before fitting")
    n, p = X.shape
    if n <= p + 1:
        raise ValueError(f"need n > p; got n={n}, p={p + 1} (incl. intercept)")
    Xd = np.column_stack([np.ones(n), X])
    beta, cov, ll, iters, grad_norm = _newton_logistic(Xd, y)

    pbar = float(np.mean(y))
    if pbar in (0.0, 1.0):
        raise ValueError("y is constant; logistic fit is degenerate")
    ll0 = n * (pbar * np.log(pbar) + (1 - pbar) * np.log(1 - pbar))
    return LogitFit(
        coefficients=beta,
        covariance=cov,
        log_likelihood=ll,
        null_log_likelihood=float(ll0),
        n_iterations=iters,
        converged=grad_norm < 1e-8,
        gradient_norm=grad_norm,
        feature_names=feature_names,
        has_intercept=True,
    )


@dataclass
class AmeRow:
    name: str
    kind: str
    estimate: float
    std_error: float
    p_value: float


@dataclass
class AmeReport:
    rows: list[AmeRow]

    def __iter__(self):
        return iter(self.rows)

    def by_name(self, name: str) -> AmeRow:
        for row in self.rows:
            if row.name == name:
                return row
        raise KeyError(name)


def average_marginal_effects(fit: LogitFit, X: np.ndarray, kinds: list[str]) -> AmeReport:
    """Average marginal effects with delta-method standard errors.

    Continuous regressor k: mean over rows of beta_k * p * (1 - p).
    Binary regressor k: mean of p(x with k=1) - p(x with k=0).
    ``kinds`` declares 'continuous' or 'binary' per column of X.
    """
    if not fit.converged:
        raise ValueError("fit did not converge; marginal effects unavailable")
    X = np.atleast_2d(np.asarray(X, dtype=np.float64))
    n, p = X.shape
    if len(kinds) != p:
        raise ValueError(f"kinds has {len(kinds)} entries for {p} regressors")
    names = fit.feature_names or tuple(f"x{k}" for k in range(p))
    Xd = np.column_stack([np.ones(n), X])
    beta = fit.coefficients
    rows = []
    for k, kind in enumerate(kinds):
        j = k + 1  # skip intercept
        if kind == "continuous":
            mu = _sigmoid(Xd @ beta)
            w = mu * (1 - mu)
            ame = float(np.mean(beta[j] * w))
            # d(ame)/d(beta_m) = mean( 1{m=j} w + beta_j w (1-2mu) x_m )
            jac = (w[:, None] * (1 - 2 * mu)[:, None] * Xd * beta[j]).mean(axis=0)
            jac[j] += float(np.mean(w))
        elif kind == "binary":
            X1 = Xd.copy()
            X0 = Xd.copy()
            X1[:, j] = 1.0
            X0[:, j] = 0.0
            p1 = _sigmoid(X1 @ beta)
            p0 = _sigmoid(X0 @ beta)
            ame = float(np.mean(p1 - p0))
            jac = (
                (p1 * (1 - p1))[:, None] * X1 - (p0 * (1 - p0))[:, None] * X0
            ).mean(axis=0)
        else:
            raise ValueError(f"regressor kind undeclared or unknown: {kind!r}")
        var = float(jac @ fit.covariance @ jac)
        se = float(np.sqrt(max(var, 0.0)))
        z = ame / se if se > 0 else np.inf * np.sign(ame)
        pval = float(2 * _norm.sf(abs(z))) if np.isfinite(z) else 0.0
        rows.append(AmeRow(name=names[k], kind=kind, estimate=ame, std_error=se, p_value=pval))
    return AmeReport(rows=rows)


@dataclass
class OlsFit:
    coefficients: np.ndarray
    std_errors: np.ndarray
    r_squared: float
    p_values: np.ndarray
    n_obs: int
    feature_names: tuple[str, ...] | None = None


def fit_ols(
    X: np.ndarray,
    y: np.ndarray,
    add_intercept: bool = True,
    feature_names: tuple[str, ...] | None = None,
) -> OlsFit:
    """Least squares via QR with classical standard errors."""
    X = np.atleast_2d(np.asarray(X, dtype=np.float64))
    y = np.asarray(y, dtype=np.float64).ravel()
    n = len(y)
    Xd = np.column_stack([np.ones(n), X]) if add_intercept else X
    p = Xd.shape[1]
    if n <= p:
        raise ValueError(f"need n > p; got n={n}, p={p}")
    if np.linalg.matrix_rank(Xd) < p:
        raise ValueError("design matrix is rank deficient")
    beta, _, _, _ = np.linalg.lstsq(Xd, y, rcond=None)
    resid = y - Xd @ beta
    dof = n - p
    sigma2 = float(resid @ resid) / dof
    cov = sigma2 * np.linalg.inv(Xd.T @ Xd)
    se = np.sqrt(np.diag(cov))
    tss = float(np.sum((y - y.mean()) ** 2))
    r2 = 1.0 - float(resid @ resid) / tss if tss > 0 else 1.0
    with np.errstate(divide="ignore", invalid="ignore"):
        z = np.where(se > 0, beta / se, np.inf)
    pvals = 2 * _norm.sf(np.abs(z))
    return OlsFit(
        coefficients=beta, std_errors=se, r_squared=r2, p_values=pvals,
        n_obs=n, feature_names=feature_names,
    )


@dataclass
class ClogitFit:
    """Paired conditional logit estimated on within-pair attribute differences."""

    coefficients: np.ndarray
    covariance: np.ndarray
    pair_probabilities: np.ndarray  # P(first alternative chosen) per pair
    log_likelihood: float
    wald_statistics: np.ndarray
    feature_names: tuple[str, ...] | None = None

    def standard_errors(self) -> np.ndarray:
        return np.sqrt(np.diag(self.covariance))


def fit_conditional_logit(
    pairs: list[tuple[int, np.ndarray, np.ndarray]],
    feature_names: tuple[str, ...] | None = None,
) -> ClogitFit:
    """Estimate a two-alternative conditional logit.

    Each pair is (chosen, attributes_alt0, attributes_alt1) with chosen in
    {0, 1}. The model reduces to intercept-free logistic regression on the
    attribute differences alt0 - alt1, predicting 1{chosen == 0}.
    """
    if not pairs:
        raise ValueError("no pairs to fit")
    diffs = []
    chose_first = []
    for chosen, a0, a1 in pairs:
        if chosen not in (0, 1):
            raise ValueError(f"chosen must be 0 or 1, got {chosen!r}")
        diffs.append(np.asarray(a0, dtype=np.float64) - np.asarray(a1, dtype=np.float64))
        chose_first.append(1.0 if chosen == 0 else 0.0)
    D = np.vstack(diffs)
    yv = np.asarray(chose_first)
    if not np.any(np.abs(D) > 0):
        raise ValueError("all attribute differences are zero; model unidentified")
    beta, cov, ll, _, _ = _newton_logistic(D, yv)
    probs = _sigmoid(D @ beta)
    se = np.sqrt(np.diag(cov))
    with np.errstate(divide="ignore", invalid="ignore"):
        wald = np.where(se > 0, (beta / se) ** 2, np.inf)
    return ClogitFit(
        coefficients=beta, covariance=cov, pair_probabilities=probs,
        log_likelihood=ll, wald_statistics=wald, feature_names=feature_names,
    )


def wald_test(fit, constraint: np.ndarray) -> tuple[float, float]:
    """Test c'beta = 0 for a linear constraint c; chi-square(1) p-value."""
    c = np.asarray(constraint, dtype=np.float64).ravel()
    beta = np.asarray(fit.coefficients)
    cov = np.asarray(fit.covariance)
    if c.shape[0] != beta.shape[0]:
        raise ValueError(f"constraint length {c.shape[0]} != {beta.shape[0]} coefficients")
    denom = float(c @ cov @ c)
    if denom <= 0:
        raise ValueError("constraint variance is non-positive")
    stat = float((c @ beta) ** 2 / denom)
    return stat, float(_chi2.sf(stat, df=1))


@dataclass
class PcaModel:
    loadings: np.ndarray  # (p, k) column loadings
    explained_variance_ratios: np.ndarray  # all p ratios, nonincreasing
    means: np.ndarray
    scales: np.ndarray
    kept_columns: np.ndarray
    n_components: int

    def transform(self, X: np.ndarray) -> np.ndarray:
        X = np.atleast_2d(np.asarray(X, dtype=np.float64))[:, self.kept_columns]
        Z = (X - self.means) / self.scales
        return Z @ self.loadings


def pca(X: np.ndarray, k: int) -> PcaModel:
    """PCA of the correlation matrix after z-scoring.

    Zero-variance columns are dropped with a warning. The sign convention
    makes each component's largest-magnitude loading positive.
    """
    X = np.atleast_2d(np.asarray(X, dtype=np.float64))
    n, p = X.shape
    if n < 2:
        raise ValueError("pca requires n >= 2")
    stds = X.std(axis=0, ddof=1)
    keep = stds > 0
    if not np.all(keep):
        warnings.warn(f"dropping {int((~keep).sum())} zero-variance columns", stacklevel=2)
    X = X[:, keep]
    p = X.shape[1]
    if k > min(n - 1, p):
        raise ValueError(f"k={k} exceeds min(n-1, p)={min(n - 1, p)}")
    means = X.mean(axis=0)
    scales = X.std(axis=0, ddof=1)
    Z = (X - means) / scales
    corr = (Z.T @ Z) / (n - 1)
    eigvals, eigvecs = np.linalg.eigh(corr)
    order = np.argsort(eigvals)[::-1]
    eigvals = np.clip(eigvals[order], 0.0, None)
    eigvecs = eigvecs[:, order]
    for j in range(eigvecs.shape[1]):
        idx = int(np.argmax(np.abs(eigvecs[:, j])))
        if eigvecs[idx, j] < 0:
            eigvecs[:, j] = -eigvecs[:, j]
    ratios = eigvals / eigvals.sum()
    return PcaModel(
        loadings=eigvecs[:, :k],
        explained_variance_ratios=ratios,
        means=means,
        scales=scales,
        kept_columns=np.flatnonzero(keep),
        n_components=k,
    )


def cohens_kappa(a, b) -> float:
    """Chance-corrected agreement; defined as 1.0 for identical constant raters.

    Returns NaN when chance agreement is 1 without perfect agreement (cannot
    occur for two binary raters).
    """
    if len(a) != len(b):
        raise ValueError(f"label lists differ in length: {len(a)} vs {len(b)}")
    if len(a) == 0:
        raise ValueError("need at least one label")
    n = len(a)
    po = sum(1 for x, y in zip(a, b) if x == y) / n
    cats = set(a) | set(b)
    pe = sum((sum(1 for x in a if x == c) / n) * (sum(1 for y in b if y == c) / n) for c in cats)
    if pe >= 1.0:
        return 1.0 if po == 1.0 else float("nan")
    return (po - pe) / (1 - pe)


def ks_test(a, b) -> tuple[float, float]:
    """Two-sample KS statistic and asymptotic p-value.

    D = sup |F_a - F_b|; p uses the Kolmogorov distribution at
    (sqrt(en) + 0.12 + 0.11/sqrt(en)) * D with en = n*m/(n+m).
    """
    a = np.sort(np.asarray(a, dtype=np.float64))
    b = np.sort(np.asarray(b, dtype=np.float64))
    n, m = len(a), len(b)
    if n == 0 or m == 0:
        raise ValueError("both samples must be nonempty")
    values = np.concatenate([a, b])
    cdf_a = np.searchsorted(a, values, side="right") / n
    cdf_b = np.searchsorted(b, values, side="right") / m
    d = float(np.max(np.abs(cdf_a - cdf_b)))
    en = np.sqrt(n * m / (n + m))
    p = float(_kolmogorov_sf((en + 0.12 + 0.11 / en) * d))
    return d, min(max(p, 0.0), 1.0)


def normal_p_two_sided(z: float) -> float:
    return float(2 * _norm.sf(abs(z))) if np.isfinite(z) else 0.0


def significance_stars(p: float) -> str:
    if p < 0.01:
        return "***"
    if p < 0.05:
        return "**"
    if p < 0.1:
        return "*"
    return ""
