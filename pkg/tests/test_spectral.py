import numpy as np
import pytest

from _oracles import dft1d_loops, dft1d_matrix, dft2d_matrix
from ganspectra.rng import SplitMix64
from ganspectra.spectral import (
    BAND_HIGH,
    BAND_LOW,
    apply_band,
    band_partition,
    dft1d,
    dft2d,
    fftshift,
    ifftshift,
    log_spectrum,
    read_sf01,
    verify_replication,
    verify_replication_2d,
    write_pgm,
    write_sf01,
)


class TestDft1d:
    def test_constant_is_dc_only(self):
        out = dft1d(np.array([1.0, 1.0, 1.0, 1.0]))
        assert np.allclose(out, [4, 0, 0, 0], atol=1e-12)

    def test_impulse_is_flat(self):
        out = dft1d(np.array([1.0, 0.0, 0.0, 0.0]))
        assert np.allclose(out, [1, 1, 1, 1], atol=1e-12)

    def test_matches_direct_summation(self):
        rng = SplitMix64(1)
        x = rng.randoms(16)
        assert np.max(np.abs(dft1d(x) - dft1d_loops(x))) < 1e-10
        assert np.max(np.abs(dft1d(x) - dft1d_matrix(x))) < 1e-10

    def test_oracle_self_check(self):
        # the fast matrix oracle agrees with the literal loop oracle
        rng = SplitMix64(2)
        for n in (1, 2, 5, 12):
            x = rng.randoms(n)
            assert np.max(np.abs(dft1d_matrix(x) - dft1d_loops(x))) < 1e-10

    def test_inverse_roundtrip(self):
        rng = SplitMix64(3)
        x = rng.randoms(32)
        back = dft1d(dft1d(x), inverse=True)
        assert np.max(np.abs(back - x)) < 1e-9

    def test_linearity(self):
        rng = SplitMix64(4)
        x, y = rng.randoms(16), rng.randoms(16)
        lhs = dft1d(2.5 * x - 0.7 * y)
        rhs = 2.5 * dft1d(x) - 0.7 * dft1d(y)
        assert np.max(np.abs(lhs - rhs)) < 1e-12


class TestDft2d:
    def test_constant_single_bin(self):
        c = 0.63
        spec = dft2d(np.full((6, 4, 1), c))[0]
        assert spec[0, 0] == pytest.approx(6 * 4 * c, abs=1e-10)
        spec[0, 0] = 0
        assert np.max(np.abs(spec)) < 1e-10

    def test_conjugate_symmetry_for_real_input(self):
        rng = SplitMix64(5)
        img = rng.randoms(8 * 8).reshape(8, 8)
        spec = dft2d(img)[0]
        h, w = spec.shape
        for u in range(h):
            for v in range(w):
                assert spec[u, v] == pytest.approx(np.conj(spec[(-u) % h, (-v) % w]), abs=1e-10)

    def test_matches_direct_summation(self):
        rng = SplitMix64(6)
        img = rng.randoms(8 * 8).reshape(8, 8)
        assert np.max(np.abs(dft2d(img)[0] - dft2d_matrix(img))) < 1e-9

    def test_parseval_fuzz(self):
        rng = SplitMix64(7)
        for _ in range(100):
            h = 2 + rng.below(31)
            w = 2 + rng.below(31)
            img = rng.randoms(h * w).reshape(h, w)
            spec = dft2d(img)[0]
            lhs = np.sum(img * img)
            rhs = np.sum(np.abs(spec) ** 2) / (h * w)
            assert abs(lhs - rhs) < 1e-9

    def test_per_channel_output(self):
        rng = SplitMix64(8)
        img = rng.randoms(4 * 4 * 3).reshape(4, 4, 3)
        specs = dft2d(img)
        assert len(specs) == 3
        for c in range(3):
            assert np.allclose(specs[c], dft2d(img[:, :, c])[0])


class TestFftshift:
    def test_dc_moves_to_center(self):
        spec = np.zeros((4, 4), dtype=complex)
        spec[0, 0] = 1.0
        shifted = fftshift(spec)
        assert shifted[2, 2] == 1.0
        assert np.count_nonzero(shifted) == 1

    def test_even_double_shift_is_identity(self):
        rng = SplitMix64(9)
        spec = rng.randoms(8 * 6).reshape(8, 6)
        assert np.array_equal(fftshift(fftshift(spec)), spec)

    def test_odd_roundtrip_with_inverse_shift(self):
        rng = SplitMix64(10)
        spec = rng.randoms(5 * 5).reshape(5, 5)
        assert np.array_equal(ifftshift(fftshift(spec)), spec)
        # index-permutation oracle: forward shift moves (0,0) to (h//2, w//2)
        marked = np.zeros((5, 5))
        marked[0, 0] = 1.0
        assert fftshift(marked)[2, 2] == 1.0


class TestLogSpectrum:
    def test_constant_image_is_degenerate(self):
        feat = log_spectrum(np.full((8, 8, 1), 0.5))
        assert np.array_equal(feat, np.zeros((8, 8, 1)))

    def test_all_zero_image_is_degenerate(self):
        feat = log_spectrum(np.zeros((8, 8, 1)))
        assert np.array_equal(feat, np.zeros((8, 8, 1)))

    def test_range_pinned_to_unit_interval(self):
        rng = SplitMix64(11)
        img = rng.randoms(16 * 16).reshape(16, 16)
        feat = log_spectrum(img)
        assert feat.min() == pytest.approx(-1.0)
        assert feat.max() == pytest.approx(1.0)

    def test_range_invariant_fuzz(self):
        rng = SplitMix64(12)
        for _ in range(25):
            h = 3 + rng.below(20)
            w = 3 + rng.below(20)
            img = rng.randoms(h * w).reshape(h, w) * rng.uniform(0.1, 100.0)
            feat = log_spectrum(img)
            assert np.all(feat >= -1.0) and np.all(feat <= 1.0)
            assert np.all(np.isfinite(feat))

    def test_dc_bin_is_peak_for_nonnegative_image(self):
        rng = SplitMix64(13)
        img = rng.randoms(12 * 12).reshape(12, 12)
        feat = log_spectrum(img)[:, :, 0]
        assert feat[6, 6] == pytest.approx(1.0)

    def test_upsampled_image_has_hotter_high_band(self):
        # zero-insert + box filter leaves spectrum copies in the high band
        from ganspectra.harness import sinusoid_image
        from ganspectra.upsampler import UpsamplerSpec, upsample

        img = sinusoid_image(32, SplitMix64(14))
        up = upsample(img, UpsamplerSpec("nearest", 2))
        feat_up = log_spectrum(up)[:, :, 0]
        feat_orig = log_spectrum(img)[:, :, 0]
        high_up = feat_up[band_partition(64, 64) == BAND_HIGH].mean()
        high_orig = feat_orig[band_partition(32, 32) == BAND_HIGH].mean()
        assert high_up > high_orig

    def test_per_channel_normalization(self):
        rng = SplitMix64(15)
        img = np.zeros((8, 8, 3))
        img[:, :, 0] = rng.randoms(64).reshape(8, 8)
        img[:, :, 1] = rng.randoms(64).reshape(8, 8) * 100.0
        img[:, :, 2] = 0.5  # constant: degenerate
        feat = log_spectrum(img)
        for c in (0, 1):
            assert feat[:, :, c].min() == pytest.approx(-1.0)
            assert feat[:, :, c].max() == pytest.approx(1.0)
        assert np.array_equal(feat[:, :, 2], np.zeros((8, 8)))


class TestBandPartition:
    def test_224_sizes(self):
        labels = band_partition(224, 224)
        counts = [int(np.sum(labels == b)) for b in range(3)]
        assert counts == [16726, 16725, 16725]

    def test_dc_low_corner_high(self):
        labels = band_partition(16, 16)
        assert labels[8, 8] == BAND_LOW
        assert labels[0, 0] == BAND_HIGH

    def test_counts_differ_by_at_most_one(self):
        for h, w in [(3, 3), (5, 8), (17, 4), (31, 31), (64, 64)]:
            labels = band_partition(h, w)
            counts = [int(np.sum(labels == b)) for b in range(3)]
            assert sum(counts) == h * w
            assert max(counts) - min(counts) <= 1

    def test_radial_ordering(self):
        labels = band_partition(33, 33)
        cy = cx = 16
        yy, xx = np.meshgrid(np.arange(33) - cy, np.arange(33) - cx, indexing="ij")
        radius = np.sqrt(yy**2 + xx**2)
        # every low-band radius is <= every high-band radius
        assert radius[labels == BAND_LOW].max() <= radius[labels == BAND_HIGH].min()

    def test_too_small_raises(self):
        with pytest.raises(ValueError, match="3x3"):
            band_partition(2, 8)


class TestApplyBand:
    def test_low_band_count_on_ones(self):
        labels = band_partition(4, 4)
        feat = np.ones((4, 4, 1))
        out = apply_band(feat, labels, "low")
        assert np.count_nonzero(out) == int(np.sum(labels == BAND_LOW))

    def test_three_bands_sum_to_original(self):
        rng = SplitMix64(16)
        feat = (rng.randoms(9 * 9).reshape(9, 9) * 2 - 1)[:, :, None]
        labels = band_partition(9, 9)
        total = sum(apply_band(feat, labels, b) for b in ("low", "mid", "high"))
        assert np.array_equal(total, feat)

    def test_out_of_band_is_exactly_zero(self):
        rng = SplitMix64(17)
        feat = (rng.randoms(8 * 8).reshape(8, 8) * 2 - 1)[:, :, None]
        labels = band_partition(8, 8)
        out = apply_band(feat, labels, "mid")
        assert np.abs(out[(labels != 1)[:, :, None] * np.ones((8, 8, 1), bool)]).sum() == 0.0

    def test_shape_mismatch_raises(self):
        with pytest.raises(ValueError, match="do not match"):
            apply_band(np.ones((4, 4, 1)), band_partition(8, 8), "low")


class TestReplication:
    def test_zero_signal(self):
        assert verify_replication(np.zeros(8)) == 0.0

    def test_random_signal_exact(self):
        rng = SplitMix64(18)
        assert verify_replication(rng.randoms(8)) < 1e-9

    def test_sweep_lengths(self):
        rng = SplitMix64(19)
        for n in range(1, 65):
            assert verify_replication(rng.randoms(n)) < 1e-9

    def test_2d_replication_and_oracle(self):
        from ganspectra.upsampler import zero_insert

        rng = SplitMix64(20)
        img = rng.randoms(6 * 5).reshape(6, 5)
        assert verify_replication_2d(img) < 1e-9
        # same identity against the direct-summation oracle
        big = dft2d_matrix(zero_insert(img, 2))
        small = dft2d_matrix(img)
        tiled = np.tile(small, (2, 2))
        assert np.max(np.abs(big - tiled)) < 1e-9


class TestSpectrumIO:
    def test_sf01_roundtrip(self, tmp_path):
        rng = SplitMix64(21)
        feat = log_spectrum(rng.randoms(8 * 8).reshape(8, 8))
        path = tmp_path / "f.sf01"
        write_sf01(path, feat, dc_centered=True)
        back, centered = read_sf01(path)
        assert centered is True
        assert back.shape == (8, 8, 1)
        assert np.allclose(back, feat, atol=1e-7)  # float32 storage

    def test_sf01_rejects_out_of_range(self, tmp_path):
        with pytest.raises(ValueError, match="within"):
            write_sf01(tmp_path / "bad.sf01", np.full((4, 4, 1), 1.5))

    def test_pgm_header_and_payload(self, tmp_path):
        feat = np.zeros((5, 7, 1))
        path = tmp_path / "f.pgm"
        write_pgm(path, feat)
        blob = path.read_bytes()
        assert blob.startswith(b"P5\n7 5\n255\n")
        assert len(blob) == len(b"P5\n7 5\n255\n") + 35
        assert blob[-1] == 128  # zero maps to mid-gray
