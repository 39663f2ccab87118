"""Morlet continuous wavelet transform, cross-wavelet power, and coherence.

The transform follows the energy convention: the kernel at scale s carries a
sqrt(dt/s) weight so every scale has comparable power.  The FFT path builds
each scale's frequency response as the exact discrete Fourier transform of
the sampled Morlet kernel (an alias-summed Gaussian), so it reproduces the
direct time-domain summation to machine precision once the series is
zero-padded to a power of two covering the kernel reach.

Squared coherence smooths scale-normalized spectra with a Gaussian kernel in
time (standard deviation proportional to scale) and a boxcar across scales;
both kernels are renormalized at boundaries so weights always sum to one.
Because numerator and denominators share the same weights, Cauchy-Schwarz
keeps rho^2 within [0, 1] up to float roundoff.
"""

from __future__ import annotations

import functools
import math
from dataclasses import dataclass, replace

import numpy as np

__all__ = [
    "MorletSpec",
    "ScaleGrid",
    "Scaleogram",
    "SmoothingSpec",
    "CoherenceField",
    "morlet_mother",
    "fourier_factor",
    "cwt",
    "cross_wavelet",
    "smooth",
    "coherence",
    "phase_field",
    "cone_of_influence",
]

_TWO_PI = 2.0 * math.pi


@dataclass(frozen=True)
class MorletSpec:
    """Morlet mother-wavelet parameters.

    ``omega0`` must be at least 5 for the zero-mean approximation to hold.
    With ``energy_normalization`` the convolution weights are sqrt(dt/s)
    (unit-energy convention); without it they are dt/s (amplitude
    convention).  Coherence is invariant to this choice.
    """

    omega0: float = 6.0
    energy_normalization: bool = True

    def __post_init__(self) -> None:
        if self.omega0 < 5:
            raise ValueError(f"omega0 must be >= 5, got {self.omega0}")


def fourier_factor(omega0: float) -> float:
    """Ratio of Fourier period to Morlet scale."""
    return 4.0 * math.pi / (omega0 + math.sqrt(2.0 + omega0 * omega0))


def morlet_mother(t, omega0: float = 6.0):
    """Unit-energy Morlet wavelet pi^(-1/4) exp(i*omega0*t) exp(-t^2/2)."""
    t = np.asarray(t, dtype=np.float64)
    psi = math.pi ** -0.25 * np.exp(1j * omega0 * t) * np.exp(-0.5 * t * t)
    return complex(psi) if psi.ndim == 0 else psi


@dataclass(frozen=True)
class ScaleGrid:
    """Dyadic scale ladder s0 * 2^(j*dj), j = 0..num_scales-1 (scales in days)."""

    s0: float
    dj: float
    num_scales: int
    omega0: float = 6.0

    def __post_init__(self) -> None:
        if self.s0 <= 0 or self.dj <= 0:
            raise ValueError("s0 and dj must be positive")
        if self.num_scales < 1:
            raise ValueError("num_scales must be >= 1")

    @property
    def scales(self) -> np.ndarray:
        j = np.arange(self.num_scales)
        return self.s0 * 2.0 ** (j * self.dj)

    @property
    def fourier_periods(self) -> np.ndarray:
        return self.scales * fourier_factor(self.omega0)

    @classmethod
    def for_length(
        cls,
        n: int,
        dt: float = 1.0,
        s0: float = 2.0,
        dj: float = 1.0 / 12.0,
        omega0: float = 6.0,
    ) -> "ScaleGrid":
        """Default grid: largest Fourier period >= min(span/3, 512) days."""
        if n < 4:
            raise ValueError(f"series too short for a scale grid: n={n}")
        target = min(n * dt / 3.0, 512.0)
        ff = fourier_factor(omega0)
        smallest_period = s0 * ff
        if target <= smallest_period:
            num = 1
        else:
            num = 1 + math.ceil(math.log2(target / smallest_period) / dj)
        return cls(s0=s0, dj=dj, num_scales=num, omega0=omega0)


@dataclass(frozen=True)
class Scaleogram:
    """Complex wavelet coefficients on a (scale, time) grid."""

    values: np.ndarray
    grid: ScaleGrid
    dt: float = 1.0

    def __post_init__(self) -> None:
        values = np.asarray(self.values, dtype=np.complex128)
        if values.ndim != 2 or values.shape[0] != self.grid.num_scales:
            raise ValueError(
                f"values must be (num_scales, n); got {values.shape} for "
                f"{self.grid.num_scales} scales"
            )
        values.flags.writeable = False
        object.__setattr__(self, "values", values)

    @property
    def n(self) -> int:
        return self.values.shape[1]


def _pad_length(n: int, max_scale: float, dt: float) -> int:
    # Power of two covering the series plus the kernel reach (8 sigma) so the
    # circular FFT convolution reproduces the plain truncated sum.
    need = n + int(math.ceil(8.0 * max_scale / dt)) + 1
    return 1 << max(1, math.ceil(math.log2(need)))


@functools.lru_cache(maxsize=64)
def _daughter_matrix(grid: ScaleGrid, npad: int, dt: float, energy: bool) -> np.ndarray:
    """Frequency response per scale: exact DFT of the sampled Morlet kernel."""
    omega = _TWO_PI * np.fft.fftfreq(npad, d=dt)
    scales = grid.scales
    out = np.empty((grid.num_scales, npad))
    for j, s in enumerate(scales):
        arg = s * omega - grid.omega0
        spacing = _TWO_PI * s / dt
        acc = np.zeros(npad)
        for image in range(-3, 4):
            acc += np.exp(-0.5 * (arg - image * spacing) ** 2)
        norm = math.sqrt(_TWO_PI * s / dt) if energy else math.sqrt(_TWO_PI)
        out[j] = norm * math.pi ** -0.25 * acc
    out.flags.writeable = False
    return out


def cwt(
    x,
    grid: ScaleGrid,
    spec: MorletSpec = MorletSpec(),
    dt: float = 1.0,
) -> Scaleogram:
    """Continuous wavelet transform of a real series on the given scale grid.

    The mean is removed internally.  Computed as an FFT circular convolution
    after zero-padding to a power of two; matches the direct summation
    sum_t x(t) * w(s) * conj(psi((t - tau) * dt / s)) with w(s) the
    normalization weight, everywhere on the grid.
    """
    x = np.asarray(x, dtype=np.float64)
    if x.ndim != 1 or len(x) < 4:
        raise ValueError(f"input must be a 1-D series of length >= 4, got shape {x.shape}")
    if not np.isfinite(x).all():
        raise ValueError("input contains non-finite values")
    if spec.omega0 != grid.omega0:
        raise ValueError(
            f"MorletSpec.omega0={spec.omega0} does not match grid.omega0={grid.omega0}"
        )
    n = len(x)
    xd = x - x.mean()
    npad = _pad_length(n, float(grid.scales[-1]), dt)
    xhat = np.fft.fft(xd, npad)
    daughters = _daughter_matrix(grid, npad, dt, spec.energy_normalization)
    coeffs = np.fft.ifft(xhat[None, :] * daughters, axis=1)[:, :n]
    return Scaleogram(values=coeffs, grid=grid, dt=dt)


def _check_compatible(a: Scaleogram, b: Scaleogram) -> None:
    if a.grid != b.grid or a.n != b.n or a.dt != b.dt:
        raise ValueError("scaleograms must share the same grid, length, and dt")


def cross_wavelet(a: Scaleogram, b: Scaleogram) -> Scaleogram:
    """Cross-wavelet spectrum W(f) * conj(W(g)), entrywise."""
    _check_compatible(a, b)
    return Scaleogram(values=a.values * np.conj(b.values), grid=a.grid, dt=a.dt)


@dataclass(frozen=True)
class SmoothingSpec:
    """Time Gaussian std = time_std_scales * scale; boxcar width in octaves."""

    time_std_scales: float = 1.0
    scale_window_octaves: float = 0.6

    def __post_init__(self) -> None:
        if self.time_std_scales <= 0 or self.scale_window_octaves <= 0:
            raise ValueError("smoothing widths must be positive")


@functools.lru_cache(maxsize=64)
def _gauss_kernel_fft(grid: ScaleGrid, npad: int, dt: float, time_std: float) -> np.ndarray:
    m = np.arange(npad)
    dist = np.minimum(m, npad - m).astype(np.float64)
    sigmas = time_std * grid.scales / dt
    kernels = np.exp(-0.5 * (dist[None, :] / sigmas[:, None]) ** 2)
    out = np.fft.fft(kernels, axis=1)
    out.flags.writeable = False
    return out


@functools.lru_cache(maxsize=64)
def _smooth_weight_sums(grid: ScaleGrid, n: int, npad: int, dt: float, time_std: float) -> np.ndarray:
    """Per-cell sum of kernel weights inside the grid (boundary renormalizer)."""
    ones_hat = np.fft.fft(np.ones(n), npad)
    khat = _gauss_kernel_fft(grid, npad, dt, time_std)
    sums = np.fft.ifft(ones_hat[None, :] * khat, axis=1).real[:, :n]
    sums.flags.writeable = False
    return sums


def _time_smooth(values: np.ndarray, grid: ScaleGrid, dt: float, time_std: float) -> np.ndarray:
    n = values.shape[1]
    max_sigma = time_std * float(grid.scales[-1]) / dt
    npad = 1 << max(1, math.ceil(math.log2(n + math.ceil(8.0 * max_sigma) + 1)))
    khat = _gauss_kernel_fft(grid, npad, dt, time_std)
    vhat = np.fft.fft(values, n=npad, axis=1)
    smoothed = np.fft.ifft(vhat * khat, axis=1)[:, :n]
    if not np.iscomplexobj(values):
        smoothed = smoothed.real
    return smoothed / _smooth_weight_sums(grid, n, npad, dt, time_std)


def _scale_boxcar(values: np.ndarray, dj: float, octaves: float) -> np.ndarray:
    num = values.shape[0]
    half = octaves / (2.0 * dj)
    out = np.empty_like(values)
    for j in range(num):
        lo = max(0, math.ceil(j - half))
        hi = min(num - 1, math.floor(j + half))
        out[j] = values[lo : hi + 1].mean(axis=0)
    return out


def smooth(data, spec: SmoothingSpec = SmoothingSpec(), *, grid: ScaleGrid | None = None, dt: float = 1.0):
    """Smooth a Scaleogram or raw (num_scales, n) grid; returns the same shape.

    Time direction: Gaussian with standard deviation proportional to each
    scale.  Scale direction: boxcar over the octave window.  Kernels are
    renormalized wherever they overhang a boundary, so constants are
    preserved exactly.
    """
    if isinstance(data, Scaleogram):
        smoothed = smooth(data.values, spec, grid=data.grid, dt=data.dt)
        return Scaleogram(values=smoothed, grid=data.grid, dt=data.dt)
    if grid is None:
        raise ValueError("grid is required when smoothing a raw array")
    values = np.asarray(data)
    if values.ndim != 2 or values.shape[0] != grid.num_scales:
        raise ValueError(f"grid expects (num_scales, n); got shape {values.shape}")
    return _scale_boxcar(_time_smooth(values, grid, dt, spec.time_std_scales), grid.dj, spec.scale_window_octaves)


def phase_field(cross_smoothed: np.ndarray) -> np.ndarray:
    """Phase angles atan2(imag, real) in (-pi, pi]; zero-magnitude cells get 0."""
    c = np.asarray(cross_smoothed)
    if not np.isfinite(c).all():
        raise ValueError("cross spectrum contains non-finite values")
    theta = np.arctan2(c.imag, c.real)
    theta = np.where(theta == -math.pi, math.pi, theta)
    theta = np.where(c == 0, 0.0, theta)
    return theta


def cone_of_influence(n: int, dt: float = 1.0) -> np.ndarray:
    """Maximum trustworthy Fourier period per time index: sqrt(2)*edge_distance*dt."""
    if n < 2:
        raise ValueError("need n >= 2 for a cone of influence")
    idx = np.arange(n)
    return math.sqrt(2.0) * np.minimum(idx, n - 1 - idx) * dt


@dataclass(frozen=True)
class CoherenceField:
    """Squared coherence, phase, cone of influence, and significance mask.

    ``significant`` is filled by Monte-Carlo significance testing and is None
    until then.  ``degenerate`` marks cells whose smoothed denominator (or
    cross magnitude, for phase) vanished; their rho2/phase are reported as 0.
    """

    rho2: np.ndarray
    phase: np.ndarray
    grid: ScaleGrid
    dt: float
    coi: np.ndarray
    significant: np.ndarray | None = None
    degenerate: np.ndarray | None = None

    def __post_init__(self) -> None:
        rho2 = np.asarray(self.rho2, dtype=np.float64)
        phase = np.asarray(self.phase, dtype=np.float64)
        if rho2.shape != phase.shape or rho2.ndim != 2:
            raise ValueError("rho2 and phase must be 2-D grids of equal shape")
        if rho2.shape[0] != self.grid.num_scales:
            raise ValueError("grid dimension mismatch")
        if rho2.min() < 0.0 or rho2.max() > 1.0:
            raise ValueError("rho2 must lie in [0, 1] (clamp before construction)")
        rho2.flags.writeable = False
        phase.flags.writeable = False
        object.__setattr__(self, "rho2", rho2)
        object.__setattr__(self, "phase", phase)

    @property
    def n(self) -> int:
        return self.rho2.shape[1]

    def inside_coi(self) -> np.ndarray:
        """Boolean grid: cell period within the trustworthy region."""
        periods = self.grid.fourier_periods
        return periods[:, None] <= self.coi[None, :]

    def with_significance(self, mask: np.ndarray) -> "CoherenceField":
        mask = np.asarray(mask, dtype=bool)
        if mask.shape != self.rho2.shape:
            raise ValueError("significance mask shape mismatch")
        return replace(self, significant=mask)


def coherence(a: Scaleogram, b: Scaleogram, spec: SmoothingSpec = SmoothingSpec()) -> CoherenceField:
    """Smoothed squared coherence and phase of two scaleograms.

    rho2 = |Q(W_ab / s)|^2 / (Q(|W_a|^2 / s) * Q(|W_b|^2 / s)) with Q the
    smoothing operator; cells with a vanishing denominator get rho2 = 0 and
    are flagged degenerate.  Values are clamped into [0, 1] after smoothing.
    """
    _check_compatible(a, b)
    grid, dt = a.grid, a.dt
    inv_s = 1.0 / grid.scales[:, None]
    cross = smooth(a.values * np.conj(b.values) * inv_s, spec, grid=grid, dt=dt)
    power_a = smooth((a.values.real**2 + a.values.imag**2) * inv_s, spec, grid=grid, dt=dt)
    power_b = smooth((b.values.real**2 + b.values.imag**2) * inv_s, spec, grid=grid, dt=dt)
    denom = power_a * power_b
    degenerate = denom <= 0.0
    rho2 = np.zeros_like(denom)
    np.divide(cross.real**2 + cross.imag**2, denom, out=rho2, where=~degenerate)
    rho2 = np.clip(rho2, 0.0, 1.0)
    phase = phase_field(cross)
    return CoherenceField(
        rho2=rho2,
        phase=phase,
        grid=grid,
        dt=dt,
        coi=cone_of_influence(a.n, dt),
        degenerate=degenerate | (cross == 0),
    )
