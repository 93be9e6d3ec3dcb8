"""Maximum-likelihood fits of lognormal, Weibull and power-law families.

Every fit reports a Kolmogorov-Smirnov distance between the whole sample and
the fitted CDF, so the three families are ranked on the same footing.  For
the power law the model puts no mass below ``xmin``; the tail-only distance
is kept in ``notes["ks_tail"]``.
"""
from __future__ import annotations

import json
import math
from dataclasses import asdict, dataclass, field

import numpy as np
from scipy import optimize, special

__all__ = [
    "FAMILIES",
    "FitResult",
    "FitError",
    "ConvergenceError",
    "ks_statistic",
    "fit_lognormal",
    "fit_powerlaw",
    "fit_weibull",
    "fit_family",
    "compare_fits",
]

FAMILIES = ("lognormal", "weibull", "powerlaw")
MIN_TAIL = 10
MAX_CANDIDATES = 400


class FitError(ValueError):
    pass


class ConvergenceError(FitError):
    def __init__(self, msg: str, last_iterate: float):
        super().__init__(msg)
        self.last_iterate = last_iterate


@dataclass
class FitResult:
    family: str
    params: dict
    loglik: float
    ks: float
    n: int
    degenerate: bool = False
    low_confidence: bool = False
    notes: dict = field(default_factory=dict)

    def cdf(self, x):
        x = np.asarray(x, dtype=float)
        p = self.params
        with np.errstate(divide="ignore", invalid="ignore", over="ignore"):
            if self.family == "lognormal":
                if p["sigma"] == 0:
                    return (x >= math.exp(p["mu"])).astype(float)
                z = (np.log(np.maximum(x, 1e-300)) - p["mu"]) / p["sigma"]
                return np.where(x > 0, special.ndtr(z), 0.0)
            if self.family == "weibull":
                y = np.maximum(x, 0) / p["scale"]
                return -np.expm1(-(y ** p["shape"]))
            if self.family == "powerlaw":
                lo = p["xmin"] - p.get("offset", 0.0)
                r = np.maximum(x, lo) / lo
                return np.where(x >= p["xmin"], 1.0 - r ** (1.0 - p["alpha"]), 0.0)
        raise ValueError(self.family)

    def to_dict(self) -> dict:
        return asdict(self)

    def to_json(self) -> str:
        return json.dumps(self.to_dict())


def ks_statistic(samples, cdf, discrete: bool = False) -> float:
    """Two-sided KS distance between the empirical CDF of ``samples`` and ``cdf``.

    With ``discrete=True`` (integer data) the model CDF is read half a unit
    above and below each observed value, i.e. compared bin by bin.
    """
    x = np.sort(np.asarray(samples, dtype=float))
    n = x.size
    uniq = np.unique(x)
    h = 0.5 if discrete else 0.0
    f_hi = np.asarray(cdf(uniq + h), dtype=float)
    f_lo = f_hi if not discrete else np.asarray(cdf(uniq - h), dtype=float)
    # the empirical CDF jumps from below/n to upto/n at each distinct value
    below = np.searchsorted(x, uniq, side="left") / n
    upto = np.searchsorted(x, uniq, side="right") / n
    return float(max(np.max(np.abs(upto - f_hi)), np.max(np.abs(f_lo - below))))


def _positive(samples, minimum: int, family: str) -> np.ndarray:
    x = np.asarray(samples, dtype=float).ravel()
    if x.size < minimum:
        raise FitError(f"{family}: need at least {minimum} samples, got {x.size}")
    if not np.all(np.isfinite(x)) or np.any(x <= 0):
        raise FitError(f"{family}: samples must be finite and > 0")
    return x


def fit_lognormal(samples) -> FitResult:
    x = _positive(samples, 2, "lognormal")
    lx = np.log(x)
    mu = float(lx.mean())
    sigma = float(lx.std())
    n = x.size
    if sigma <= 1e-12 * max(1.0, abs(mu)):
        return FitResult("lognormal", {"mu": mu, "sigma": 0.0}, math.inf, 0.0, n, degenerate=True)
    loglik = float(-n * (math.log(sigma) + 0.5 * math.log(2 * math.pi) + 0.5) - lx.sum())
    res = FitResult("lognormal", {"mu": mu, "sigma": sigma}, loglik, 0.0, n)
    res.ks = ks_statistic(x, res.cdf, _is_integral(x))
    return res


def _is_integral(x: np.ndarray) -> bool:
    return bool(np.all(x == np.round(x)))


def fit_powerlaw(samples, discrete: bool | None = None, xmin: float | None = None) -> FitResult:
    """Continuous power-law MLE with ``xmin`` chosen by minimum KS distance.

    The distance minimised is the whole-sample one, so a cutoff that
    discards the body of the data pays for the discarded mass.
    Candidate cutoffs are the distinct sample values up to the 90th
    percentile that leave at least ten samples in the tail, thinned to an
    evenly spaced subset when there are more than ``MAX_CANDIDATES``.
    A fixed ``xmin`` skips the scan.  Integer data is fitted with the
    customary half-unit offset, i.e. the tail is modelled from
    ``xmin - 0.5``, and its KS distance is binned.

    The result is flagged ``low_confidence`` when fewer than ten samples
    lie in the tail.
    """
    x = _positive(samples, MIN_TAIL, "powerlaw")
    x = np.sort(x)
    n = x.size
    if discrete is None:
        discrete = _is_integral(x)
    offset = 0.5 if discrete else 0.0
    if x[0] == x[-1]:
        return FitResult("powerlaw", {"alpha": math.nan, "xmin": float(x[0]), "offset": offset},
                         math.nan, 1.0, n, degenerate=True)

    if xmin is not None:
        if not xmin > offset:
            raise FitError(f"powerlaw: xmin must exceed {offset}")
        cands = np.array([float(xmin)])
        first = np.searchsorted(x, cands, side="left")
        if first[0] >= n:
            raise FitError(f"powerlaw: no samples at or above xmin={xmin}")
    else:
        cands = np.unique(x[x <= np.quantile(x, 0.9)])
        first = np.searchsorted(x, cands, side="left")
        ok = (n - first) >= MIN_TAIL
        cands, first = cands[ok], first[ok]
        if cands.size > MAX_CANDIDATES:
            keep = np.unique(np.linspace(0, cands.size - 1, MAX_CANDIDATES).round().astype(int))
            cands, first = cands[keep], first[keep]

    logx = np.log(x)
    suffix = np.concatenate([np.cumsum(logx[::-1])[::-1], [0.0]])
    uniq = np.unique(x)
    below = np.searchsorted(x, uniq, side="left")
    upto = np.searchsorted(x, uniq, side="right")
    ustart = np.searchsorted(uniq, cands, side="left")
    best = None
    for xm, i, u in zip(cands.tolist(), first.tolist(), ustart.tolist()):
        lo = xm - offset
        m = n - i
        s = float(suffix[i]) - m * math.log(lo)
        if s <= 0:
            continue
        alpha = 1.0 + m / s
        # model CDF at the tail's distinct values; the empirical steps are global
        f_hi = 1.0 - ((uniq[u:] + offset) / lo) ** (1.0 - alpha)
        f_lo = 1.0 - ((uniq[u:] - offset) / lo) ** (1.0 - alpha)
        ks_tail = max(np.max(np.abs((upto[u:] - i) / m - f_hi)),
                      np.max(np.abs(f_lo - (below[u:] - i) / m)))
        ks = max(i / n, np.max(np.abs(upto[u:] / n - f_hi)),
                 np.max(np.abs(f_lo - below[u:] / n)))
        if best is None or ks < best[0]:
            best = (float(ks), alpha, xm, m, s, float(ks_tail))
    if best is None:
        return FitResult("powerlaw", {"alpha": math.nan, "xmin": float(x[0]), "offset": offset},
                         math.nan, 1.0, n, degenerate=True)
    ks, alpha, xm, m, s, ks_tail = best
    lo = xm - offset
    loglik = m * math.log((alpha - 1.0) / lo) - alpha * s
    return FitResult(
        "powerlaw",
        {"alpha": alpha, "xmin": xm, "offset": offset},
        float(loglik),
        ks,
        n,
        low_confidence=m < MIN_TAIL,
        notes={"n_tail": int(m), "ks_tail": ks_tail},
    )


def _weibull_score(k: float, lx: np.ndarray, mean_lx: float) -> float:
    # d/dk of the profile log-likelihood, divided by n
    y = k * (lx - lx.max())
    w = np.exp(y)
    return float(np.dot(w, lx) / w.sum() - 1.0 / k - mean_lx)


def fit_weibull(samples, maxiter: int = 200) -> FitResult:
    """Weibull MLE; the shape solves the profile score equation by Brent's method."""
    x = _positive(samples, 2, "weibull")
    n = x.size
    lx = np.log(x)
    if lx.max() - lx.min() <= 1e-12:
        return FitResult("weibull", {"shape": math.inf, "scale": float(x[0])},
                         math.inf, 0.0, n, degenerate=True)
    mean_lx = float(lx.mean())
    lo, hi = 1e-3, 1.0
    while _weibull_score(lo, lx, mean_lx) > 0 and lo > 1e-12:
        lo /= 10
    for _ in range(200):
        if _weibull_score(hi, lx, mean_lx) > 0:
            break
        hi *= 2
    else:
        raise ConvergenceError("weibull: could not bracket the shape", hi)
    k, info = optimize.brentq(
        _weibull_score, lo, hi, args=(lx, mean_lx), xtol=1e-12, maxiter=maxiter,
        full_output=True, disp=False,
    )
    if not info.converged:
        raise ConvergenceError(f"weibull: no convergence in {maxiter} iterations", float(k))
    # scale**k = mean(x**k), computed in log space
    m = lx.max()
    log_scale = m + math.log(np.mean(np.exp(k * (lx - m)))) / k
    scale = math.exp(log_scale)
    z = np.exp(k * (lx - log_scale))
    loglik = float(n * math.log(k) - n * k * log_scale + (k - 1) * lx.sum() - z.sum())
    res = FitResult("weibull", {"shape": float(k), "scale": scale}, loglik, 0.0, n,
                    notes={"iterations": int(info.iterations)})
    res.ks = ks_statistic(x, res.cdf, _is_integral(x))
    return res


_FITTERS = {"lognormal": fit_lognormal, "weibull": fit_weibull, "powerlaw": fit_powerlaw}


def fit_family(samples, family: str) -> FitResult:
    try:
        return _FITTERS[family](samples)
    except KeyError:
        raise ValueError(f"unknown family {family!r}; choose from {FAMILIES}") from None


def compare_fits(samples, families=FAMILIES, errors: dict | None = None) -> list[FitResult]:
    """Fit each family and rank by KS distance, then by log-likelihood.

    A family whose fit raises is left out of the ranking; its error is stored
    in ``errors`` when a dict is passed.  Degenerate fits sort last.
    """
    results = []
    for fam in families:
        try:
            results.append(fit_family(samples, fam))
        except FitError as exc:
            if errors is not None:
                errors[fam] = str(exc)
    def key(r):
        ks = r.ks if math.isfinite(r.ks) else math.inf
        ll = r.loglik if math.isfinite(r.loglik) else -math.inf
        return (r.degenerate, ks, -ll)
    return sorted(results, key=key)
