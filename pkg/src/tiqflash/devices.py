"""CMOS inverter models for threshold-based quantization.

A comparator here is nothing but a CMOS inverter whose switching
threshold is set by the width ratio of its two transistors, followed by
a second inverter that restores polarity.  This module provides the two
views of that inverter which the rest of the package needs:

* a closed-form switching threshold from the beta ratio
  ``r = sqrt(mu_p * W_p / (mu_n * W_n))``, assuming both devices sit in
  saturation at the switching point, and
* a numeric voltage transfer curve (VTC) from a square-law (level-1)
  drain-current model, solved point by point with bisection.

Both views must agree at the switching point; tests hold them to each
other.  Lengths and widths are in micrometres, voltages in volts,
mobilities in cm^2/(V s), process transconductances in uA/V^2 and
currents in uA throughout.
"""

from __future__ import annotations

import json
import math
import os
from dataclasses import MISSING, dataclass, fields, replace
from importlib import resources

import numpy as np

from .errors import (
    IdealDeviceError,
    InvalidGeometryError,
    NumericalFailureError,
    OutOfModelRangeError,
    ParameterError,
    ParseError,
)

__all__ = [
    "DeviceParams",
    "TransistorGeom",
    "InverterSpec",
    "VtcCurve",
    "inverter",
    "beta_ratio",
    "inverter_threshold",
    "balanced_threshold",
    "vtc",
    "vtc_point",
    "vtc_crossing",
    "cascade_response",
    "comparator_dc_response",
    "gain_at_threshold",
    "apply_temperature",
    "params_from_dict",
    "load_params",
    "load_preset",
    "builtin_presets",
    "PRESET_DIR_ENV",
]

# Bisection settings shared by every operating-point solve in the package.
SOLVER_TOL_V = 1e-9
SOLVER_MAX_ITER = 200

# Environment variable naming a directory searched for preset files
# before the built-in ones.
PRESET_DIR_ENV = "TIQFLASH_PRESET_DIR"


@dataclass(frozen=True)
class DeviceParams:
    """Process parameters for one NMOS/PMOS pair.

    ``vtp_mag`` stores the PMOS threshold as a magnitude (positive
    number).  ``kprime_n``/``kprime_p`` feed only the square-law VTC
    model; the closed-form threshold uses the mobility ratio.  The
    temperature fields describe first-order drift around ``t_ref_c``:
    thresholds fall linearly with ``kappa_vt`` (V/K) and mobilities
    scale as ``(T/T_ref)**-m_mu`` in kelvin.
    """

    mu_n: float  # electron mobility, cm^2/(V s)
    mu_p: float  # hole mobility, cm^2/(V s)
    vtn: float  # NMOS threshold, V
    vtp_mag: float  # PMOS threshold magnitude, V
    kprime_n: float  # NMOS process transconductance, uA/V^2
    kprime_p: float  # PMOS process transconductance, uA/V^2
    lambda_n: float = 0.0  # NMOS channel-length modulation, 1/V
    lambda_p: float = 0.0  # PMOS channel-length modulation, 1/V
    t_ref_c: float = 25.0  # reference temperature, degC
    kappa_vt: float = 0.0  # threshold drift, V/K
    m_mu: float = 0.0  # mobility temperature exponent

    def __post_init__(self):
        for name in ("mu_n", "mu_p", "vtn", "vtp_mag", "kprime_n", "kprime_p"):
            if getattr(self, name) <= 0.0:
                raise ParameterError(f"{name} must be positive, got {getattr(self, name)!r}")
        for name in ("lambda_n", "lambda_p", "kappa_vt"):
            if getattr(self, name) < 0.0:
                raise ParameterError(f"{name} must be non-negative, got {getattr(self, name)!r}")
        if self.t_ref_c <= -273.15:
            raise ParameterError(f"t_ref_c must be above absolute zero, got {self.t_ref_c!r}")


@dataclass(frozen=True)
class TransistorGeom:
    """Drawn geometry of a single MOSFET."""

    w: float  # channel width, um
    l: float  # channel length, um

    def __post_init__(self):
        if self.w <= 0.0 or self.l <= 0.0:
            raise InvalidGeometryError(f"width and length must be positive, got w={self.w!r} l={self.l!r}")


@dataclass(frozen=True)
class InverterSpec:
    """One CMOS inverter: PMOS on top, NMOS on the bottom, supply vdd."""

    pmos: TransistorGeom
    nmos: TransistorGeom
    vdd: float  # supply voltage, V

    def __post_init__(self):
        if self.vdd <= 0.0:
            raise ParameterError(f"vdd must be positive, got {self.vdd!r}")


def inverter(wp: float, wn: float, l: float, vdd: float) -> InverterSpec:
    """Convenience constructor for an inverter with a shared length."""
    return InverterSpec(TransistorGeom(wp, l), TransistorGeom(wn, l), vdd)


@dataclass(frozen=True, eq=False)
class VtcCurve:
    """Sampled voltage transfer curve on a uniform input grid."""

    v_in: np.ndarray  # input samples, V, strictly increasing
    v_out: np.ndarray  # solved outputs, V

    def samples(self):
        """Return the curve as a list of (v_in, v_out) pairs."""
        return list(zip(self.v_in.tolist(), self.v_out.tolist()))


def _check_pair(spec: InverterSpec, params: DeviceParams) -> None:
    # Both devices must be able to conduct somewhere between the rails.
    if spec.vdd <= params.vtn + params.vtp_mag:
        raise ParameterError(
            f"vdd={spec.vdd!r} leaves no conduction band: need vdd > vtn + |vtp| = "
            f"{params.vtn + params.vtp_mag!r}"
        )


def beta_ratio(params: DeviceParams, wp: float, wn: float) -> float:
    """Return r = sqrt(mu_p * wp / (mu_n * wn)) for a width pair."""
    if wp <= 0.0 or wn <= 0.0:
        raise InvalidGeometryError(f"widths must be positive, got wp={wp!r} wn={wn!r}")
    return math.sqrt((params.mu_p * wp) / (params.mu_n * wn))


def inverter_threshold(spec: InverterSpec, params: DeviceParams) -> float:
    """Closed-form switching threshold of the inverter.

    Equates the saturation currents of the two devices at the point
    where input and output voltages meet:

        v_ref = (r * (vdd - |vtp|) + vtn) / (1 + r)

    with r the beta ratio of the width pair.  Raising the PMOS width
    raises the threshold; raising the NMOS width lowers it.
    """
    _check_pair(spec, params)
    r = beta_ratio(params, spec.pmos.w, spec.nmos.w)
    return (r * (spec.vdd - params.vtp_mag) + params.vtn) / (1.0 + r)


def balanced_threshold(vdd: float, params: DeviceParams) -> float:
    """Threshold of the r = 1 inverter: the natural mid-band anchor."""
    return 0.5 * (vdd - params.vtp_mag + params.vtn)


def _square_law(k, vov, vds, lam):
    """Level-1 drain current (uA) for gate overdrive vov and drain bias vds.

    Cutoff below vov <= 0, triode for vds < vov, saturation above with
    channel-length modulation referenced to the saturation edge:
    ``0.5 * k * vov**2 * (1 + lam * (vds - vov))``.  The triode branch
    carries no lam term, so the two branches meet continuously.
    """
    vov = np.asarray(vov, dtype=float)
    vds = np.asarray(vds, dtype=float)
    triode = k * (vov * vds - 0.5 * vds * vds)
    sat = 0.5 * k * vov * vov * (1.0 + lam * (vds - vov))
    i = np.where(vds < vov, triode, sat)
    return np.where(vov > 0.0, i, 0.0)


def _pair_residual(spec, params, v_in, v_out):
    """Pull-up minus pull-down current (uA); decreasing in v_out."""
    kn = params.kprime_n * (spec.nmos.w / spec.nmos.l)
    kp = params.kprime_p * (spec.pmos.w / spec.pmos.l)
    i_n = _square_law(kn, v_in - params.vtn, v_out, params.lambda_n)
    i_p = _square_law(kp, (spec.vdd - v_in) - params.vtp_mag, spec.vdd - v_out, params.lambda_p)
    return i_p - i_n


def _square_law_scalar(k, vov, vds, lam):
    # scalar twin of _square_law; keeps single-point solves off the numpy
    # overhead path (tests pin the two against each other)
    if vov <= 0.0:
        return 0.0
    if vds < vov:
        return k * (vov * vds - 0.5 * vds * vds)
    return 0.5 * k * vov * vov * (1.0 + lam * (vds - vov))


def _pair_residual_scalar(spec, params, v_in, v_out):
    kn = params.kprime_n * (spec.nmos.w / spec.nmos.l)
    kp = params.kprime_p * (spec.pmos.w / spec.pmos.l)
    i_n = _square_law_scalar(kn, v_in - params.vtn, v_out, params.lambda_n)
    i_p = _square_law_scalar(kp, (spec.vdd - v_in) - params.vtp_mag, spec.vdd - v_out, params.lambda_p)
    return i_p - i_n


def _solve_vout_scalar(spec, params, v_in, tol=SOLVER_TOL_V, max_iter=SOLVER_MAX_ITER):
    _check_pair(spec, params)
    if v_in <= params.vtn:
        return spec.vdd
    if v_in >= spec.vdd - params.vtp_mag:
        return 0.0
    lo, hi = 0.0, spec.vdd
    if _pair_residual_scalar(spec, params, v_in, lo) <= 0.0 or \
            _pair_residual_scalar(spec, params, v_in, hi) >= 0.0:
        raise NumericalFailureError("current balance does not bracket a root", v_in=v_in)
    for _ in range(max_iter):
        m = 0.5 * (lo + hi)
        if _pair_residual_scalar(spec, params, v_in, m) > 0.0:
            lo = m
        else:
            hi = m
        if hi - lo <= tol:
            return 0.5 * (lo + hi)
    raise NumericalFailureError(
        f"bisection did not converge to {tol} V in {max_iter} iterations", v_in=v_in
    )


def _solve_vout(spec, params, v_in, tol=SOLVER_TOL_V, max_iter=SOLVER_MAX_ITER):
    """Solve the VTC at each input voltage via bisection on the current balance.

    Inputs at or below vtn leave the NMOS cut off (output at vdd);
    inputs at or past vdd - |vtp| cut the PMOS off (output at 0).  In
    between, the residual is strictly positive at v_out = 0 and strictly
    negative at v_out = vdd, so a root always brackets.
    """
    _check_pair(spec, params)
    v_in = np.asarray(v_in, dtype=float)
    out = np.empty_like(v_in)
    low = v_in <= params.vtn
    high = v_in >= spec.vdd - params.vtp_mag
    out[low] = spec.vdd
    out[high] = 0.0
    mid = ~(low | high)
    if np.any(mid):
        vi = v_in[mid]
        lo = np.zeros_like(vi)
        hi = np.full_like(vi, spec.vdd)
        r_lo = _pair_residual(spec, params, vi, lo)
        r_hi = _pair_residual(spec, params, vi, hi)
        bad = (r_lo <= 0.0) | (r_hi >= 0.0)
        if np.any(bad):
            raise NumericalFailureError(
                "current balance does not bracket a root",
                v_in=float(vi[bad][0]),
            )
        for _ in range(max_iter):
            m = 0.5 * (lo + hi)
            above = _pair_residual(spec, params, vi, m) > 0.0
            lo = np.where(above, m, lo)
            hi = np.where(above, hi, m)
            if float(np.max(hi - lo)) <= tol:
                break
        else:
            worst = int(np.argmax(hi - lo))
            raise NumericalFailureError(
                f"bisection did not converge to {tol} V in {max_iter} iterations",
                v_in=float(vi[worst]),
            )
        out[mid] = 0.5 * (lo + hi)
    return out


def vtc(spec: InverterSpec, params: DeviceParams, grid_points: int = 201) -> VtcCurve:
    """Sample the inverter's transfer curve on a uniform [0, vdd] grid."""
    if grid_points < 3:
        raise ParameterError(f"grid_points must be >= 3, got {grid_points!r}")
    v_in = np.linspace(0.0, spec.vdd, grid_points)
    return VtcCurve(v_in=v_in, v_out=_solve_vout(spec, params, v_in))


def vtc_point(spec: InverterSpec, params: DeviceParams, v_in: float) -> float:
    """Solve the transfer curve at a single input voltage."""
    return _solve_vout_scalar(spec, params, float(v_in))


def vtc_crossing(spec: InverterSpec, params: DeviceParams, tol: float = SOLVER_TOL_V) -> float:
    """Input voltage where the solved VTC crosses v_out = v_in.

    Bisects g(v) = vtc(v) - v, which runs from +vdd at the low rail to
    -vdd at the high rail and is strictly decreasing.  This is the
    numeric counterpart of ``inverter_threshold``; the two agree to
    solver tolerance when the kprime ratio matches the mobility ratio.
    """
    _check_pair(spec, params)
    lo = params.vtn
    hi = spec.vdd - params.vtp_mag
    for _ in range(SOLVER_MAX_ITER):
        m = 0.5 * (lo + hi)
        if vtc_point(spec, params, m) > m:
            lo = m
        else:
            hi = m
        if hi - lo <= tol:
            return 0.5 * (lo + hi)
    raise NumericalFailureError(
        f"crossing search did not converge to {tol} V in {SOLVER_MAX_ITER} iterations",
        v_in=0.5 * (lo + hi),
    )


def cascade_response(stages, params: DeviceParams, v_in):
    """DC response of inverters in series; accepts scalar or array input."""
    v = np.atleast_1d(np.asarray(v_in, dtype=float))
    for spec in stages:
        v = _solve_vout(spec, params, v)
    return v if np.ndim(v_in) else float(v[0])


def comparator_dc_response(first: InverterSpec, second: InverterSpec, params: DeviceParams, v_in):
    """DC response of the two-inverter comparator (threshold + polarity stage)."""
    return cascade_response((first, second), params, v_in)


def gain_at_threshold(spec: InverterSpec, params: DeviceParams) -> float:
    """Small-signal voltage gain at the switching point (negative).

    Uses the saturation small-signal model at the solved crossing:
    ``A_v = -(gm_n + gm_p) / (I_D * (lambda_n + lambda_p))`` with I_D
    taken as the mean of the two lambda-free saturation currents.
    Without channel-length modulation the model gain is unbounded, so
    lambda_n + lambda_p = 0 is rejected.
    """
    lam = params.lambda_n + params.lambda_p
    if lam == 0.0:
        raise IdealDeviceError("gain is unbounded without channel-length modulation")
    vm = vtc_crossing(spec, params)
    kn = params.kprime_n * (spec.nmos.w / spec.nmos.l)
    kp = params.kprime_p * (spec.pmos.w / spec.pmos.l)
    vov_n = vm - params.vtn
    vov_p = (spec.vdd - vm) - params.vtp_mag
    gm = kn * vov_n + kp * vov_p
    i_d = 0.5 * (0.5 * kn * vov_n**2 + 0.5 * kp * vov_p**2)
    return -gm / (i_d * lam)


def apply_temperature(params: DeviceParams, t_c: float) -> DeviceParams:
    """Return parameters shifted from t_ref_c to an operating temperature.

    Thresholds (both magnitudes) drop by kappa_vt per kelvin of rise;
    mobilities and the process transconductances scale together by
    ``(T_k / T_ref_k) ** -m_mu``.  The input is taken to describe the
    device at its own t_ref_c, which the result keeps as its anchor, so
    apply the shift once per target temperature rather than chaining.
    """
    if t_c == params.t_ref_c:
        return params
    if t_c <= -273.15:
        raise OutOfModelRangeError(f"t_c must be above absolute zero, got {t_c!r}")
    dt = t_c - params.t_ref_c
    vtn = params.vtn - params.kappa_vt * dt
    vtp_mag = params.vtp_mag - params.kappa_vt * dt
    if vtn <= 0.0 or vtp_mag <= 0.0:
        raise OutOfModelRangeError(
            f"threshold voltage vanished at {t_c!r} degC (vtn={vtn!r}, |vtp|={vtp_mag!r})"
        )
    scale = ((t_c + 273.15) / (params.t_ref_c + 273.15)) ** (-params.m_mu)
    return replace(
        params,
        vtn=vtn,
        vtp_mag=vtp_mag,
        mu_n=params.mu_n * scale,
        mu_p=params.mu_p * scale,
        kprime_n=params.kprime_n * scale,
        kprime_p=params.kprime_p * scale,
    )


# ---------------------------------------------------------------------------
# Preset handling

_PARAM_FIELDS = tuple(f.name for f in fields(DeviceParams))
_PARAM_REQUIRED = tuple(f.name for f in fields(DeviceParams) if f.default is MISSING)


def params_from_dict(doc: dict, source: str = "<dict>") -> DeviceParams:
    """Build DeviceParams from a mapping.

    Unknown keys and missing required keys are rejected; coefficients with
    defaults (lambda, temperature model) may be omitted.
    """
    if not isinstance(doc, dict):
        raise ParseError(f"{source}: preset must be a JSON object", path="$")
    unknown = sorted(set(doc) - set(_PARAM_FIELDS))
    if unknown:
        raise ParseError(f"{source}: unknown preset keys {unknown}", path=f"$.{unknown[0]}")
    missing = [name for name in _PARAM_REQUIRED if name not in doc]
    if missing:
        raise ParseError(f"{source}: missing preset keys {missing}", path=f"$.{missing[0]}")
    values = {}
    for name in _PARAM_FIELDS:
        if name not in doc:
            continue
        v = doc[name]
        if isinstance(v, bool) or not isinstance(v, (int, float)):
            raise ParseError(f"{source}: {name} must be a number, got {v!r}", path=f"$.{name}")
        values[name] = float(v)
    try:
        return DeviceParams(**values)
    except ParameterError as exc:
        raise ParseError(f"{source}: {exc}", path="$") from exc


def load_params(path) -> DeviceParams:
    """Load device parameters from a preset JSON file."""
    with open(path, "r", encoding="utf-8") as fh:
        try:
            doc = json.load(fh)
        except json.JSONDecodeError as exc:
            raise ParseError(f"{path}: not valid JSON ({exc})", path="$") from exc
    return params_from_dict(doc, source=str(path))


def builtin_presets() -> list[str]:
    """Names of the presets shipped with the package."""
    root = resources.files("tiqflash.presets")
    return sorted(p.name[:-5] for p in root.iterdir() if p.name.endswith(".json"))


def load_preset(name: str, extra_dir: str | None = None) -> DeviceParams:
    """Load a named preset, searching extra_dir (if given) before built-ins.

    The CLI passes the TIQFLASH_PRESET_DIR environment variable as
    extra_dir so user preset files can shadow the shipped ones.
    """
    if extra_dir is None:
        extra_dir = os.environ.get(PRESET_DIR_ENV) or None
    if extra_dir:
        candidate = os.path.join(extra_dir, f"{name}.json")
        if os.path.isfile(candidate):
            return load_params(candidate)
    root = resources.files("tiqflash.presets")
    res = root / f"{name}.json"
    if not res.is_file():
        raise ParseError(f"unknown preset {name!r}; available: {builtin_presets()}")
    with res.open("r", encoding="utf-8") as fh:
        doc = json.load(fh)
    return params_from_dict(doc, source=f"preset:{name}")
