"""Spectrum of a rectangular-windowed linear-chirp drive.

The drive f(t) = (2/sqrt(T)) rect(t/T) cos(w0 t + kappa t^2/2) has the
transform (convention F(w) = integral f(t) exp(-i w t) dt)

    F(w) = G+(w - w0) + G-(w + w0),
    G+-(w) = sqrt(pi/kappa T) exp(-+ i w^2/2 kappa)
             { C(x+) + C(x-) +- i [S(x+) + S(x-)] },
    x+- = sqrt(kappa/pi) (T/2 -+ w/kappa).

C and S are the Fresnel integrals, evaluated here to 1e-10 absolute by a
power series in extended precision below z = 3.9 and the auxiliary
f/g asymptotic series above.  The published recipe (switch at z = 2 with
five asymptotic terms) cannot reach that accuracy in double precision:
the five-term remainder at z = 2 is about 3e-6, and the series suffers
catastrophic cancellation past z of roughly 3.2 in float64.  Extended
precision pushes the cancellation wall past the switch point; both
regimes keep the signed-remainder truncation control.
"""

import math
from dataclasses import dataclass, field

import numpy as np

from .errors import AmbiguousRegion, ValidationError, ZeroChirp

_LD = np.longdouble
_PI_LD = np.arccos(_LD(-1.0))
Z_SWITCH = 3.9
_SERIES_STOP = _LD(1e-15)
_MAX_SERIES_TERMS = 90
_MAX_ASYMP_TERMS = 13


def _series_cs(z):
    """Power series for C, S at 0 <= z <= Z_SWITCH, extended precision.

    Terms alternate; once their magnitude decreases the remainder has the
    sign of, and is bounded by, the first omitted term.  The decrease
    conditions (kept m terms are safe when z^4 is below
    (8/pi^2) m(2m-1)(4m+1)/(4m-3) for C and the (2m+1)(4m+3)/(4m-1)
    analogue for S) are enforced before stopping.
    """
    zl = _LD(z)
    z2 = zl * zl
    z4 = z2 * z2
    q = (_PI_LD / 2) * (_PI_LD / 2) * z4  # ratio building block

    c_sum = _LD(0)
    s_sum = _LD(0)
    a = _LD(1)            # (pi/2)^{2n} z^{4n} / (2n)!
    b = (_PI_LD / 2) * z2  # (pi/2)^{2n+1} z^{4n+2} / (2n+1)!
    sign = _LD(1)
    n = 0
    while True:
        term_c = sign * a / (4 * n + 1)
        term_s = sign * b / (4 * n + 3)
        c_sum += term_c
        s_sum += term_s
        n += 1
        a = a * q / ((2 * n - 1) * (2 * n))
        b = b * q / ((2 * n) * (2 * n + 1))
        sign = -sign
        if max(abs(a / (4 * n + 1)), abs(b / (4 * n + 3))) < _SERIES_STOP:
            m = n  # number of kept terms; next term is the remainder bound
            ok_c = z4 < (8 / (_PI_LD * _PI_LD)) * m * (2 * m - 1) * (4 * m + 1) / max(4 * m - 3, 1)
            ok_s = z4 < (8 / (_PI_LD * _PI_LD)) * m * (2 * m + 1) * (4 * m + 3) / (4 * m - 1)
            if ok_c and ok_s:
                break
        if n > _MAX_SERIES_TERMS:
            raise ValidationError(f"Fresnel series failed to settle at z={z}")
    return float(zl * c_sum), float(zl * s_sum)


def _reduced_phase(z):
    """(pi z^2/2) mod 2pi, exactly: equals 2pi frac(z^2/4).

    The fractional part of z^2/4 is computed on the float's integer
    mantissa, so the reduction involves no rounding of pi at all.
    """
    m, e = math.frexp(float(z))
    mant = int(m * (1 << 53))        # z = mant * 2^(e-53), exactly
    shift = 2 * e - 106 - 2          # z^2/4 = mant^2 * 2^shift
    if shift >= 0:
        frac = 0.0
    else:
        frac = (mant * mant % (1 << -shift)) / float(1 << -shift)
    return 2.0 * math.pi * frac


def _asymptotic_cs(z):
    """Auxiliary-function form for z > Z_SWITCH.

    f and g are alternating asymptotic series; summation stops at the
    smallest term, which bounds the remainder.  The oscillatory phase
    pi z^2/2 is range-reduced exactly so the result stays accurate for
    arbitrarily large z.
    """
    if z > 1e6:
        u = _reduced_phase(z)
    else:
        u = math.pi * z * z / 2.0
    inv = (2.0 / math.pi) / z / z  # 1/(pi z^2/2); underflow is harmless
    f_sum = 0.0
    g_sum = 0.0
    poch = 1.0   # (1/2)_k, advanced incrementally
    k = 0
    sign = 1.0
    prev = math.inf
    for m in range(_MAX_ASYMP_TERMS):
        tf = poch * inv ** (2 * m)           # (1/2)_{2m} / u^{2m}
        poch *= 0.5 + k
        k += 1
        tg = poch * inv ** (2 * m + 1)       # (1/2)_{2m+1} / u^{2m+1}
        poch *= 0.5 + k
        k += 1
        if max(abs(tf), abs(tg)) >= prev:
            break  # smallest term reached; stop before divergence
        f_sum += sign * tf
        g_sum += sign * tg
        prev = max(abs(tf), abs(tg))
        sign = -sign
    pre = 1.0 / (math.pi * z)
    f = pre * f_sum
    g = pre * g_sum
    su, cu = math.sin(u), math.cos(u)
    c = 0.5 + f * su - g * cu
    s = 0.5 - f * cu - g * su
    return c, s


def _fresnel_scalar(z):
    if z == 0.0:
        return 0.0, 0.0
    az = abs(z)
    if az <= Z_SWITCH:
        c, s = _series_cs(az)
    else:
        c, s = _asymptotic_cs(az)
    if z < 0:
        return -c, -s
    return c, s


def fresnel(z):
    """Fresnel integrals (C(z), S(z)), absolute error below 1e-10.

    Accepts scalars or arrays.  C and S are odd; C(z) -> 1/2 as
    z -> +inf with |C - 1/2| <= 1/(pi z).
    """
    zarr = np.asarray(z, dtype=float)
    if not np.all(np.isfinite(zarr)):
        raise ValidationError("fresnel requires finite arguments")
    if zarr.ndim == 0:
        return _fresnel_scalar(float(zarr))
    out_c = np.empty(zarr.shape)
    out_s = np.empty(zarr.shape)
    flat = zarr.ravel()
    fc, fs = out_c.ravel(), out_s.ravel()
    for i, zi in enumerate(flat):
        fc[i], fs[i] = _fresnel_scalar(float(zi))
    return out_c, out_s


@dataclass(frozen=True)
class ChirpSource:
    """rect-windowed cos chirp: amplitude * rect(t/T) cos(w0 t + kappa t^2/2).

    amplitude=None means the normalized 2/sqrt(T) form, for which the
    in-band power density (B/2pi)|G|^2 is 1 up to O(1/sqrt(BT)).
    """
    omega0: float
    kappa: float
    T: float
    amplitude: float = None

    def __post_init__(self):
        if self.T <= 0:
            raise ValidationError("need T > 0")
        if self.kappa < 0:
            raise ValidationError("need kappa >= 0")

    @property
    def B(self):
        return self.kappa * self.T

    @property
    def _scale(self):
        # multiplies the normalized G sum; 1 for the 2/sqrt(T) form
        if self.amplitude is None:
            return 1.0
        return self.amplitude * np.sqrt(self.T) / 2.0

    def __call__(self, t):
        amp = 2.0 / np.sqrt(self.T) if self.amplitude is None else self.amplitude
        t = np.asarray(t)
        inside = np.abs(t) <= self.T / 2.0
        edge = np.abs(np.abs(t) - self.T / 2.0) < 1e-300
        w = np.where(inside, 1.0, 0.0) - 0.5 * edge  # rect(+-1/2) = 1/2
        return amp * w * np.cos(self.omega0 * t + 0.5 * self.kappa * t ** 2)


def g_component(source: ChirpSource, omega, branch=+1):
    """G+ (branch=+1) or G- (branch=-1) at offset frequency omega."""
    if source.kappa == 0.0:
        raise ZeroChirp("kappa = 0: use the sinc transform of the windowed tone")
    kap, T = source.kappa, source.T
    omega = np.asarray(omega, dtype=float)
    root = np.sqrt(kap / np.pi)
    xp = root * (T / 2.0 - omega / kap)
    xm = root * (T / 2.0 + omega / kap)
    cp, sp = fresnel(xp)
    cm, sm = fresnel(xm)
    phase = np.exp(-1j * branch * omega ** 2 / (2.0 * kap))
    val = np.sqrt(np.pi / (kap * T)) * phase * ((cp + cm) + 1j * branch * (sp + sm))
    return val


def chirp_spectrum(source: ChirpSource, omega):
    """F(omega) = G+(omega - w0) + G-(omega + w0), with the source's scale."""
    omega = np.asarray(omega, dtype=float)
    val = g_component(source, omega - source.omega0, +1) \
        + g_component(source, omega + source.omega0, -1)
    return source._scale * val


REGIONS = ("in_band", "transition", "tail")


@dataclass
class SpectrumRegionBound:
    region: str
    bound: float              # upper bound on (B/2pi)|G(omega)|^2
    omega: float
    margin: float             # sqrt(pi/BT)
    ambiguous: bool = False
    notes: tuple = ()


def _in_band_or_tail_bound(bt, what):
    """Shared c-3, c-2, c-1 maximization; in_band adds the half-power rows."""
    w = what  # |omega|/B
    d = 1.0 - 4.0 * w ** 2
    wm = abs(0.5 - w)
    wp = 0.5 + w
    # cos(omega T) maximizing each coefficient separately
    c3 = (64.0 / (np.pi * d ** 6)) * (1.0 + 60.0 * w ** 2 + 240.0 * w ** 4
                                      + 64.0 * w ** 6 + abs(d ** 3))
    c2 = (128.0 / (np.pi * abs(d) ** 3)) * w
    c1 = (4.0 / (np.pi * d ** 2)) * (1.0 + 4.0 * w ** 2 + abs(d))
    total = c3 / bt ** 3 + c2 / bt ** 2 + c1 / bt
    if w < 0.5:  # in-band rows
        c32 = (1.0 / np.sqrt(np.pi)) * (2.0 / wm ** 3 + 2.0 / wp ** 3)
        c12 = (1.0 / np.sqrt(np.pi)) * (2.0 / wm + 2.0 / wp)
        total += c32 / bt ** 1.5 + c12 / np.sqrt(bt) + 1.0
    return total


def _transition_bound(bt, what):
    """Half-power-point expansion, all unknowns at their suprema.

    As printed, the half-power coefficients mix sqrt(BT/pi) and
    sqrt(BT/2) scalings in the same expansion; both appear here verbatim
    and the maximized bound absorbs either choice.
    """
    w = what
    wm = abs(0.5 - w)
    wp = 0.5 + w
    a_pi = np.sqrt(bt / np.pi) * wm
    a_2 = np.sqrt(bt / 2.0) * wm
    c3 = 32.0 / (np.pi * (1.0 + 2.0 * w) ** 6)
    c32 = (1.0 / (6.0 * np.sqrt(np.pi) * wp ** 3)) * (
        3.0 * (1.0 + 2.0 * a_pi) + (3.0 + np.pi * a_pi ** 3))
    c1 = 32.0 / (np.pi * (1.0 + 2.0 * w) ** 2)
    c12 = (1.0 / (6.0 * np.sqrt(np.pi) * wp)) * (
        3.0 * (1.0 + 2.0 * a_2) + (3.0 + np.pi * a_2 ** 3))
    c0 = 0.25 + (np.sqrt(bt) * wm / (2.0 * np.sqrt(np.pi))) * (1.0 + a_pi) \
        + (np.pi / 72.0) * a_pi ** 3 * (6.0 + np.pi * a_pi ** 3)
    return c0 + c12 / np.sqrt(bt) + c1 / bt + c32 / bt ** 1.5 + c3 / bt ** 3


def region_bound(source: ChirpSource, omega, strict=False):
    """Worst-case bound on (B/2pi)|G(omega)|^2 by spectral region.

    omega is measured from the chirp center (the argument of G+-).
    Classification margin: in_band needs 1/2 - |omega|/B above
    3 sqrt(pi/BT), transition needs |...| below sqrt(pi/BT)/3, tail the
    mirror of in_band; anything between is ambiguous and gets the max of
    the two adjacent bounds (or raises when strict=True).
    """
    b = source.B
    bt = b * source.T
    if source.kappa == 0.0:
        raise ZeroChirp("kappa = 0 has no chirp band")
    w = abs(float(omega)) / b
    margin = np.sqrt(np.pi / bt)
    wminus = 0.5 - w
    notes = ()

    if wminus >= 3.0 * margin:
        return SpectrumRegionBound("in_band", _in_band_or_tail_bound(bt, w),
                                   float(omega), margin)
    if wminus <= -3.0 * margin:
        return SpectrumRegionBound("tail", _in_band_or_tail_bound(bt, w),
                                   float(omega), margin)
    if abs(wminus) <= margin / 3.0:
        notes = ("half-power coefficients mix sqrt(BT/pi) and sqrt(BT/2) "
                 "scalings as printed; bound maximizes over both",)
        return SpectrumRegionBound("transition", _transition_bound(bt, w),
                                   float(omega), margin, notes=notes)
    # between margins
    if strict:
        raise AmbiguousRegion(f"omega/B = {w} within the classification margins")
    trans = _transition_bound(bt, w)
    other = _in_band_or_tail_bound(bt, w)
    region = "in_band" if wminus > 0 else "tail"
    return SpectrumRegionBound(region, max(trans, other), float(omega), margin,
                               ambiguous=True)


def source_energy(source: ChirpSource):
    """Exact integral of f(t)^2 over the window, via the Fresnel closed form.

    integral cos^2 = T/2 + (1/2) Re integral exp(2i(w0 t + kappa t^2/2));
    completing the square turns the correction into Fresnel values.
    """
    w0, kap, T = source.omega0, source.kappa, source.T
    amp = 2.0 / np.sqrt(T) if source.amplitude is None else source.amplitude
    if kap == 0.0:
        corr = np.sin(w0 * T) / (2.0 * w0) if w0 else T / 2.0
        return amp ** 2 * (T / 2.0 + corr)
    a = w0 / kap
    root = np.sqrt(2.0 * kap / np.pi)
    cp, sp = fresnel(root * (T / 2.0 + a))
    cm, sm = fresnel(root * (-T / 2.0 + a))
    integral = np.sqrt(np.pi / (2.0 * kap)) * ((cp - cm) + 1j * (sp - sm))
    corr = 0.5 * np.real(np.exp(-1j * w0 ** 2 / kap) * integral)
    return amp ** 2 * (T / 2.0 + corr)
