"""
Threshold and sub-threshold fits.

Near threshold p_L is modelled as a cubic polynomial in the scaled
variable x = (p - p_th) * L**(1/nu).  For fixed (p_th, nu) the polynomial
coefficients are a weighted linear least-squares problem, so only the two
nonlinear parameters are searched (Nelder-Mead from several starts); the
standard errors come from a bootstrap over points.

Below threshold, log p_L at each p is fitted by a + b L + c L^3 and the
curves give the lattice size needed for a target logical rate.
"""
import logging
from dataclasses import dataclass, field
from typing import Dict, List, Optional

import numpy as np
import pandas as pd
from django.conf import settings
from scipy.optimize import brentq, minimize

from core.exceptions import FitError

logger = logging.getLogger(__name__)

ANSATZ_DEGREE = 3
NU_BOUNDS = (0.05, 10.0)
MIN_SIZES = 3
MIN_RATES = 4
MIN_SUPPRESSION_SIZES = 4
# search range for the size that reaches a target rate
MAX_SIZE = 1000.0
SIZE_STEP = 0.5


# ──────────────────────────────────────────
# Threshold fit
# ──────────────────────────────────────────
@dataclass
class FitResult:
    p_th: float
    nu: float
    A: List[float]
    errors: Dict[str, object]
    chi2: float
    n_points: int
    residual_norm: float
    p_range: tuple = ()
    scheme: Optional[str] = None
    model: Optional[str] = None
    bootstrap_failures: int = 0

    def summary(self) -> str:
        return (f"p_th = {self.p_th:.6g} ± {self.errors.get('p_th', float('nan')):.2g}, "
                f"nu = {self.nu:.4g} ± {self.errors.get('nu', float('nan')):.2g}")


def _as_points(points) -> pd.DataFrame:
    frame = pd.DataFrame(points, columns=None if isinstance(points, pd.DataFrame) else ["p", "L", "p_L", "sigma"])
    missing = {"p", "L", "p_L", "sigma"} - set(frame.columns)
    if missing:
        raise FitError(f"points are missing columns {sorted(missing)}")
    frame = frame[["p", "L", "p_L", "sigma"]].astype(float)
    if (frame["sigma"] <= 0).any():
        raise FitError("every point needs a positive sigma")
    return frame.reset_index(drop=True)


def _design(p, L, p_th, nu):
    x = (p - p_th) * L ** (1.0 / nu)
    return np.vander(x, ANSATZ_DEGREE + 1, increasing=True)


def _projected(theta, p, L, y, w):
    """Optimal coefficients and chi^2 for fixed (p_th, nu)."""
    p_th, nu = theta
    V = _design(p, L, p_th, nu) * w[:, None]
    coeffs, *_ = np.linalg.lstsq(V, y * w, rcond=None)
    residual = V @ coeffs - y * w
    return coeffs, float(residual @ residual)


def _starts(p_lo, p_hi, count):
    rng = np.random.default_rng(count)
    grid = [(p_lo + f * (p_hi - p_lo), nu) for f in (0.25, 0.5, 0.75) for nu in (0.8, 1.2, 1.6)]
    extra = [(rng.uniform(p_lo, p_hi), rng.uniform(0.5, 2.0)) for _ in range(max(0, count - len(grid)))]
    return (grid + extra)[:max(1, count)]


def _search(frame, starts, bounds):
    p, L, y = frame["p"].to_numpy(), frame["L"].to_numpy(), frame["p_L"].to_numpy()
    w = 1.0 / frame["sigma"].to_numpy()

    def objective(theta):
        return _projected(theta, p, L, y, w)[1]

    best = None
    for start in starts:
        result = minimize(objective, np.asarray(start, dtype=float), method="Nelder-Mead", bounds=bounds,
                          options={"xatol": 1e-10, "fatol": 1e-14, "maxiter": 4000})
        if best is None or result.fun < best.fun:
            best = result
    coeffs, chi2 = _projected(best.x, p, L, y, w)
    return best, coeffs, chi2


def _check_inside(p_th, nu, p_lo, p_hi):
    span = p_hi - p_lo
    return p_lo + 1e-9 * span < p_th < p_hi - 1e-9 * span and NU_BOUNDS[0] < nu < NU_BOUNDS[1]


def fit_threshold(points, *, starts=None, resamples=None, seed=0, scheme=None, model=None) -> FitResult:
    """
    Weighted fit of p_L = sum_i A_i x^i, x = (p - p_th) L^(1/nu).

    `points` is a DataFrame (or rows) with columns p, L, p_L, sigma.
    Raises FitError with diagnostics on too few points, on a search that
    does not converge, or when p_th lands outside the scanned range.
    """
    frame = _as_points(points)
    sizes, rates = frame["L"].nunique(), frame["p"].nunique()
    if sizes < MIN_SIZES or rates < MIN_RATES:
        raise FitError("not enough data for a threshold fit",
                       {"distinct_L": sizes, "distinct_p": rates, "need": f"{MIN_SIZES} L, {MIN_RATES} p"})

    p_lo, p_hi = float(frame["p"].min()), float(frame["p"].max())
    bounds = [(p_lo, p_hi), NU_BOUNDS]
    starts = settings.BCC_FIT_STARTS if starts is None else starts
    best, coeffs, chi2 = _search(frame, _starts(p_lo, p_hi, starts), bounds)
    p_th, nu = (float(v) for v in best.x)
    if not best.success and not np.isfinite(chi2):
        raise FitError("threshold search did not converge", {"message": best.message, "chi2": chi2})
    if not _check_inside(p_th, nu, p_lo, p_hi):
        raise FitError("threshold outside the scanned range",
                       {"p_th": p_th, "nu": nu, "p_min": p_lo, "p_max": p_hi})

    errors, failures = _bootstrap(frame, (p_th, nu), bounds, resamples, seed)
    residual = frame["p_L"].to_numpy() - _design(frame["p"].to_numpy(), frame["L"].to_numpy(), p_th, nu) @ coeffs
    result = FitResult(
        p_th=p_th, nu=nu, A=[float(a) for a in coeffs], errors=errors, chi2=chi2,
        n_points=len(frame), residual_norm=float(np.linalg.norm(residual)), p_range=(p_lo, p_hi),
        scheme=scheme, model=model, bootstrap_failures=failures,
    )
    logger.info("threshold fit%s: %s (chi2=%.4g, %d points)",
                f" for {scheme}" if scheme else "", result.summary(), chi2, len(frame))
    return result


def _bootstrap(frame, estimate, bounds, resamples, seed):
    resamples = settings.BCC_BOOTSTRAP_RESAMPLES if resamples is None else resamples
    rng = np.random.default_rng(seed)
    samples, failures = [], 0
    for _ in range(resamples):
        picked = frame.iloc[rng.integers(0, len(frame), len(frame))]
        if picked["L"].nunique() < 2 or picked["p"].nunique() < ANSATZ_DEGREE + 1:
            failures += 1
            continue
        best, coeffs, _ = _search(picked, [estimate], bounds)
        if not _check_inside(best.x[0], best.x[1], *bounds[0]):
            failures += 1
            continue
        samples.append(np.concatenate([best.x, coeffs]))
    if len(samples) < 2:
        nan = float("nan")
        return {"p_th": nan, "nu": nan, "A": [nan] * (ANSATZ_DEGREE + 1)}, failures
    spread = np.std(np.asarray(samples), axis=0, ddof=1)
    return {"p_th": float(spread[0]), "nu": float(spread[1]), "A": [float(s) for s in spread[2:]]}, failures


# ──────────────────────────────────────────
# Sub-threshold suppression
# ──────────────────────────────────────────
@dataclass
class SuppressionFit:
    p: float
    a: float
    b: float
    c: float
    sizes: tuple
    residual_norm: float = 0.0

    def log_rate(self, L):
        return self.a + self.b * np.asarray(L, dtype=float) + self.c * np.asarray(L, dtype=float) ** 3

    def size_for(self, target_p_L: float) -> float:
        """Smallest L >= 1 where the fitted curve comes down to `target_p_L`."""
        log_target = np.log(target_p_L)
        grid = np.arange(1.0, MAX_SIZE + SIZE_STEP, SIZE_STEP)
        excess = self.log_rate(grid) - log_target
        if excess[0] <= 0:
            return 1.0
        below = np.flatnonzero(excess <= 0)
        if below.size == 0:
            raise FitError("fitted curve never reaches the target rate",
                           {"p": self.p, "target": target_p_L, "a": self.a, "b": self.b, "c": self.c})
        hi = grid[below[0]]
        return float(brentq(lambda L: float(self.log_rate(L)) - log_target, hi - SIZE_STEP, hi, xtol=1e-12))


def fit_suppression(sizes, rates, p=None) -> SuppressionFit:
    """Least squares of log p_L on [1, L, L^3]; zero rates are dropped."""
    L = np.asarray(sizes, dtype=float)
    y = np.asarray(rates, dtype=float)
    keep = y > 0
    L, y = L[keep], y[keep]
    if np.unique(L).size < MIN_SUPPRESSION_SIZES:
        raise FitError("not enough lattice sizes with failures for a suppression fit",
                       {"p": p, "sizes": sorted(set(L.tolist())), "need": MIN_SUPPRESSION_SIZES})
    design = np.stack([np.ones_like(L), L, L ** 3], axis=1)
    coeffs, *_ = np.linalg.lstsq(design, np.log(y), rcond=None)
    residual = design @ coeffs - np.log(y)
    return SuppressionFit(p, *(float(c) for c in coeffs), tuple(sorted(set(L.astype(int).tolist()))),
                          float(np.linalg.norm(residual)))


@dataclass
class OverheadRatio:
    scheme: str
    p: float
    target_p_L: float
    size: float
    reference_size: float
    block_size: int
    ratio: float
    warnings: List[str] = field(default_factory=list)

    def to_dict(self) -> dict:
        return {
            "scheme": self.scheme,
            "p": self.p,
            "target_p_L": self.target_p_L,
            "L_scheme": self.size,
            "L_reference": self.reference_size,
            "block_size": self.block_size,
            "ratio": self.ratio,
            "extrapolated": bool(self.warnings),
        }


def overhead_ratio(scheme, fit: SuppressionFit, reference: SuppressionFit, target_p_L: float,
                   block_size: int) -> OverheadRatio:
    """
    Spacetime volume s L_c^2 of a scheme over L^2 of the reference (cubic)
    scheme, both at the size where their curves reach `target_p_L`.
    """
    size = fit.size_for(target_p_L)
    reference_size = reference.size_for(target_p_L)
    warnings = []
    for name, curve, value in ((scheme, fit, size), ("reference", reference, reference_size)):
        if not min(curve.sizes) <= value <= max(curve.sizes):
            warnings.append(f"{name}: L={value:.3g} extrapolated beyond fitted sizes {curve.sizes}")
    for message in warnings:
        logger.warning(message)
    ratio = block_size * size ** 2 / reference_size ** 2
    return OverheadRatio(str(scheme), fit.p, target_p_L, size, reference_size, block_size, ratio, warnings)
