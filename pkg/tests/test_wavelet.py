import math

import numpy as np
import pytest

from dualstock.wavelet import (
    MorletSpec,
    ScaleGrid,
    Scaleogram,
    SmoothingSpec,
    cone_of_influence,
    cross_wavelet,
    cwt,
    fourier_factor,
    morlet_mother,
    smooth,
)

from _oracles import cwt_direct


class TestMorletMother:
    def test_value_at_zero(self):
        psi = morlet_mother(0.0)
        assert psi.real == pytest.approx(math.pi**-0.25, abs=1e-12)
        assert psi.imag == 0.0

    def test_decay(self):
        assert abs(morlet_mother(10.0)) < 1e-20
        assert abs(morlet_mother(-10.0)) < 1e-20

    def test_unit_energy_quadrature(self):
        # trapezoid quadrature of |psi|^2 over [-8, 8]
        t = np.linspace(-8.0, 8.0, 20001)
        psi = morlet_mother(t)
        energy = np.trapezoid(np.abs(psi) ** 2, t)
        assert energy == pytest.approx(1.0, abs=1e-6)

    def test_omega0_bound(self):
        with pytest.raises(ValueError):
            MorletSpec(omega0=4.0)


class TestScaleGrid:
    def test_scales_increasing(self):
        grid = ScaleGrid(s0=2.0, dj=1 / 12, num_scales=24)
        assert (np.diff(grid.scales) > 0).all()
        assert grid.scales[0] == 2.0

    def test_period_relation(self):
        grid = ScaleGrid(s0=2.0, dj=1 / 12, num_scales=10)
        ff = 4 * math.pi / (6 + math.sqrt(2 + 36))
        assert np.allclose(grid.fourier_periods, grid.scales * ff, rtol=0, atol=1e-14)
        assert fourier_factor(6.0) == pytest.approx(1.033, abs=1e-3)

    def test_for_length_covers_band(self):
        grid = ScaleGrid.for_length(512)
        assert grid.fourier_periods[-1] >= 512 / 3
        assert grid.fourier_periods[0] <= 8  # covers the short analysis band

    def test_for_length_caps_at_512_days(self):
        grid = ScaleGrid.for_length(4096)
        assert grid.fourier_periods[-1] >= 512
        assert grid.fourier_periods[-2] < 512 * 2 ** (1 / 12)

    def test_validation(self):
        with pytest.raises(ValueError):
            ScaleGrid(s0=0.0, dj=1 / 12, num_scales=4)
        with pytest.raises(ValueError):
            ScaleGrid(s0=2.0, dj=1 / 12, num_scales=0)


class TestCwt:
    def test_zero_input_gives_zero(self):
        grid = ScaleGrid(s0=2.0, dj=1 / 4, num_scales=8)
        sg = cwt(np.zeros(64), grid)
        assert np.abs(sg.values).max() == 0.0

    def test_peak_at_forcing_period(self):
        n = 512
        x = np.cos(2 * np.pi * np.arange(n) / 32)
        grid = ScaleGrid.for_length(n)
        sg = cwt(x, grid)
        j_peak = int(np.abs(sg.values[:, n // 2]).argmax())
        assert grid.fourier_periods[j_peak] == pytest.approx(32, rel=0.05)

    @pytest.mark.parametrize("n", [64, 256])
    def test_matches_direct_summation(self, n):
        rng = np.random.default_rng(42)
        x = rng.standard_normal(n)
        grid = ScaleGrid(s0=2.0, dj=1 / 6, num_scales=12)
        fft_w = cwt(x, grid).values
        direct_w = cwt_direct(x, grid.scales)
        assert np.abs(fft_w - direct_w).max() < 1e-8

    def test_amplitude_normalization_mode(self):
        rng = np.random.default_rng(1)
        x = rng.standard_normal(64)
        grid = ScaleGrid(s0=2.0, dj=1 / 4, num_scales=6)
        energy = cwt(x, grid, MorletSpec(energy_normalization=True)).values
        amplitude = cwt(x, grid, MorletSpec(energy_normalization=False)).values
        ratio = np.sqrt(1.0 / grid.scales)  # dt/s vs sqrt(dt/s) weights
        assert np.allclose(amplitude, energy * ratio[:, None], atol=1e-12)

    def test_input_validation(self):
        grid = ScaleGrid(s0=2.0, dj=1 / 4, num_scales=4)
        with pytest.raises(ValueError, match="length >= 4"):
            cwt([1.0, 2.0], grid)
        with pytest.raises(ValueError, match="non-finite"):
            cwt([1.0, np.nan, 2.0, 3.0], grid)
        with pytest.raises(ValueError, match="omega0"):
            cwt(np.zeros(16), grid, MorletSpec(omega0=7.0))

    def test_scaleogram_shape_validation(self):
        grid = ScaleGrid(s0=2.0, dj=1 / 4, num_scales=4)
        with pytest.raises(ValueError, match="num_scales"):
            Scaleogram(values=np.zeros((3, 10)), grid=grid)


class TestCrossWavelet:
    def setup_method(self):
        rng = np.random.default_rng(3)
        self.grid = ScaleGrid(s0=2.0, dj=1 / 4, num_scales=8)
        self.a = cwt(rng.standard_normal(128), self.grid)
        self.b = cwt(rng.standard_normal(128), self.grid)

    def test_self_cross_is_power(self):
        c = cross_wavelet(self.a, self.a)
        # FMA contraction leaves ~1 ulp of imaginary residue in z*conj(z)
        assert np.abs(c.values.imag).max() < 1e-12 * np.abs(c.values).max()
        assert np.allclose(c.values.real, np.abs(self.a.values) ** 2)

    def test_conjugate_symmetry(self):
        ab = cross_wavelet(self.a, self.b)
        ba = cross_wavelet(self.b, self.a)
        scale = np.abs(ab.values).max()
        assert np.abs(ab.values - np.conj(ba.values)).max() < 1e-12 * scale

    def test_zero_operand(self):
        zero = cwt(np.zeros(128), self.grid)
        assert np.abs(cross_wavelet(self.a, zero).values).max() == 0.0

    def test_grid_mismatch(self):
        other = cwt(np.zeros(64), self.grid)
        with pytest.raises(ValueError, match="same grid"):
            cross_wavelet(self.a, other)


class TestSmoothing:
    def setup_method(self):
        self.grid = ScaleGrid(s0=2.0, dj=1 / 6, num_scales=13)  # scales 2..8
        self.n = 256

    def test_constant_preserved_exactly(self):
        grid_vals = np.full((self.grid.num_scales, self.n), 3.7)
        out = smooth(grid_vals, grid=self.grid)
        assert np.abs(out - 3.7).max() < 1e-12

    def test_interior_spike_mass_preserved(self):
        vals = np.zeros((self.grid.num_scales, self.n))
        vals[self.grid.num_scales // 2, self.n // 2] = 1.0
        out = smooth(vals, grid=self.grid)
        assert abs(out.sum() - 1.0) < 1e-10

    def test_linearity(self):
        rng = np.random.default_rng(9)
        a = rng.standard_normal((self.grid.num_scales, self.n))
        b = rng.standard_normal((self.grid.num_scales, self.n))
        lhs = smooth(2.5 * a - 1.25 * b, grid=self.grid)
        rhs = 2.5 * smooth(a, grid=self.grid) - 1.25 * smooth(b, grid=self.grid)
        assert np.abs(lhs - rhs).max() < 1e-12

    def test_scaleogram_roundtrip_matches_raw(self):
        rng = np.random.default_rng(11)
        sg = cwt(rng.standard_normal(self.n), self.grid)
        via_scaleogram = smooth(sg)
        via_raw = smooth(sg.values, grid=self.grid, dt=sg.dt)
        assert isinstance(via_scaleogram, Scaleogram)
        assert np.array_equal(via_scaleogram.values, via_raw)

    def test_requires_grid_for_raw_arrays(self):
        with pytest.raises(ValueError, match="grid is required"):
            smooth(np.zeros((4, 8)))

    def test_spec_validation(self):
        with pytest.raises(ValueError):
            SmoothingSpec(time_std_scales=0.0)


class TestConeOfInfluence:
    def test_edges_zero(self):
        coi = cone_of_influence(100)
        assert coi[0] == 0.0 and coi[-1] == 0.0

    def test_symmetry(self):
        coi = cone_of_influence(257)
        assert np.array_equal(coi, coi[::-1])

    def test_center_value(self):
        coi = cone_of_influence(512)
        assert coi.max() == pytest.approx(math.sqrt(2) * 255, abs=1e-12)
        assert coi.max() == pytest.approx(math.sqrt(2) * 255.5, abs=1.0)

    def test_monotone_rise_and_fall(self):
        coi = cone_of_influence(101)
        mid = 50
        assert (np.diff(coi[: mid + 1]) > 0).all()
        assert (np.diff(coi[mid:]) < 0).all()

    def test_formula(self):
        n, dt = 64, 0.5
        coi = cone_of_influence(n, dt)
        idx = np.arange(n)
        assert np.array_equal(coi, math.sqrt(2) * np.minimum(idx, n - 1 - idx) * dt)
