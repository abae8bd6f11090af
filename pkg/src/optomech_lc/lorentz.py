"""Least-squares Lorentzian peak fits shared by the spectral estimators."""
import warnings
from dataclasses import dataclass

import numpy as np
from scipy.optimize import OptimizeWarning, curve_fit

from .errors import FitFailed


@dataclass(frozen=True)
class LorentzFit:
    center: float
    half_width: float
    height: float
    background: float
    rel_residual: float


def lorentzian(omega, center, half_width, height, background):
    x = (omega - center) / half_width
    return height / (1.0 + x * x) + background


def fit_lorentzian(omega, values, max_residual=0.1, allow_dip=False):
    """Fit ``height / (1 + ((w - w0)/hw)^2) + background`` to one peak.

    With `allow_dip`, a feature whose window centre lies below the window
    edges is fitted as a dip and returned with negative `height`.

    The fit is rejected with :class:`FitFailed` when it does not converge,
    when the centre leaves the window, or when the rms residual exceeds
    `max_residual` times the fitted peak height.
    """
    omega = np.asarray(omega, dtype=float)
    values = np.asarray(values, dtype=float)
    if allow_dip:
        mid = values[omega.size // 2 - 1: omega.size // 2 + 1].mean()
        if mid < min(values[0], values[-1]):
            fit = fit_lorentzian(omega, -values, max_residual=max_residual)
            return LorentzFit(center=fit.center, half_width=fit.half_width,
                              height=-fit.height, background=-fit.background,
                              rel_residual=fit.rel_residual)
    span = omega[-1] - omega[0]
    if omega.size < 5 or span <= 0:
        raise FitFailed("need at least five increasing frequencies")
    i = int(np.argmax(values))
    base = float(min(values[0], values[-1]))
    peak = float(values[i] - base)
    if peak <= 0:
        raise FitFailed("no peak above the window edges", {"peak": peak})
    above = omega[values - base > peak / 2]
    hw0 = max((above.max() - above.min()) / 2, span / omega.size)
    # scale out the magnitudes so the optimiser works with O(1) numbers
    w0, scale_w, scale_v = omega[i], span, peak

    def model(x, c, hw, h, b):
        return lorentzian(x, c, abs(hw), h, b)

    try:
        with warnings.catch_warnings():
            warnings.simplefilter("ignore", OptimizeWarning)
            popt, _ = curve_fit(
                model, (omega - w0) / scale_w, values / scale_v,
                p0=[0.0, hw0 / scale_w, 1.0, base / scale_v], maxfev=20000)
    except (RuntimeError, ValueError) as exc:
        raise FitFailed(f"Lorentzian fit did not converge: {exc}") from exc
    center = w0 + popt[0] * scale_w
    half_width = abs(popt[1]) * scale_w
    height = popt[2] * scale_v
    background = popt[3] * scale_v
    resid = values - lorentzian(omega, center, half_width, height, background)
    rel = float(np.sqrt(np.mean(resid ** 2)) / abs(height)) if height else np.inf
    diag = {"center": center, "half_width": half_width, "height": height,
            "background": background, "rel_residual": rel}
    if not (omega[0] <= center <= omega[-1]) or height <= 0:
        raise FitFailed("fitted peak lies outside the window", diag)
    if rel > max_residual:
        raise FitFailed(f"relative rms residual {rel:.3g} exceeds {max_residual}", diag)
    return LorentzFit(center=center, half_width=half_width, height=height,
                      background=background, rel_residual=rel)
