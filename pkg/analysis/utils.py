import numpy as np
import pandas as pd

from montecarlo.results import load_results


def select_rows(frame: pd.DataFrame, scheme, model, boundary=None) -> pd.DataFrame:
    mask = (frame["scheme"] == str(scheme)) & (frame["model"] == str(model))
    if boundary is not None:
        mask &= frame["boundary"] == str(boundary)
    return frame.loc[mask]


def threshold_points(frame: pd.DataFrame, scheme, model, boundary=None) -> pd.DataFrame:
    """
    (p, L, p_L, sigma) of one scheme and model; repeated points are pooled.

    sigma is the binomial standard error, with the rate kept half a count
    away from 0 and 1 so points without failures still carry a weight.
    """
    rows = select_rows(frame, scheme, model, boundary)
    if rows.empty:
        return pd.DataFrame(columns=["p", "L", "p_L", "sigma"])
    pooled = rows.groupby(["p", "L"], as_index=False)[["trials", "failures"]].sum()
    n = pooled["trials"].to_numpy(dtype=float)
    pooled["p_L"] = pooled["failures"] / n
    rate = np.clip(pooled["p_L"].to_numpy(dtype=float), 0.5 / n, 1 - 0.5 / n)
    pooled["sigma"] = np.sqrt(rate * (1 - rate) / n)
    return pooled[["p", "L", "p_L", "sigma"]].sort_values(["L", "p"]).reset_index(drop=True)


def load_threshold_points(path, scheme, model, boundary=None) -> pd.DataFrame:
    return threshold_points(load_results(path), scheme, model, boundary)


def suppression_rows(frame: pd.DataFrame, scheme, model, p, boundary=None) -> pd.DataFrame:
    """Pooled (L, trials, failures, p_L) of one scheme at one physical rate."""
    rows = select_rows(frame, scheme, model, boundary)
    rows = rows.loc[np.isclose(rows["p"].astype(float), float(p), rtol=1e-9, atol=0.0)]
    pooled = rows.groupby("L", as_index=False)[["trials", "failures"]].sum()
    pooled["p_L"] = pooled["failures"] / pooled["trials"]
    return pooled.sort_values("L").reset_index(drop=True)
