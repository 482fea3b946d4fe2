import numpy as np
import pytest

from ccgi import ParameterError, make_double_slit, save_phantom_pgm, load_phantom_pgm, solve_geometry
from conftest import BETA, PITCH_X, PITCH_Y, SLIT_SEPARATION, SLIT_WIDTH


class TestSolveGeometry:
    def test_reference_system(self):
        # closed-form algebra: d3 = f(1+beta)/beta, d12 = beta*d3
        geo = solve_geometry(250.0, 2.54)
        assert geo.d3 == pytest.approx(250.0 * 3.54 / 2.54, rel=1e-15)
        assert geo.d3 == pytest.approx(348.43, abs=5e-3)
        assert geo.d12 == pytest.approx(885.0, rel=1e-12)
        assert abs(geo.lens_residual) < 1e-9

    def test_symmetric_imaging(self):
        geo = solve_geometry(250.0, 1.0)
        assert geo.d3 == pytest.approx(500.0)
        assert geo.d12 == pytest.approx(500.0)

    @pytest.mark.parametrize("f,beta", [(250.0, 0.0), (250.0, -1.0), (0.0, 2.54), (-5.0, 2.54)])
    def test_degenerate_inputs(self, f, beta):
        with pytest.raises(ParameterError):
            solve_geometry(f, beta)

    @pytest.mark.parametrize("beta", [0.1, 0.5, 1.0, 2.54, 2.56, 10.0])
    def test_magnification_round_trip(self, beta):
        geo = solve_geometry(250.0, beta)
        assert abs(geo.lens_residual) < 1e-9
        assert geo.magnification == pytest.approx(beta, rel=1e-12)


class TestDoubleSlit:
    def test_reference_separation_in_pixels(self, slit_phantom):
        # recover each slit's exact interval from its coverage profile:
        # a fractional edge pixel j covering fraction c has its slit edge
        # at j+1-c (left) or j+c (right); area weighting makes this exact
        profile = slit_phantom.values[0]
        half = len(profile) // 2

        def slit_centre(cov, offset):
            idx = np.flatnonzero(cov)
            left_edge = idx[0] + (1.0 - cov[idx[0]])
            right_edge = idx[-1] + cov[idx[-1]]
            return offset + (left_edge + right_edge) / 2.0

        left = slit_centre(profile[:half], 0)
        right = slit_centre(profile[half:], half)
        separation_px = right - left
        expected = SLIT_SEPARATION * BETA / PITCH_X  # 12.4756...
        assert separation_px == pytest.approx(expected, abs=1e-9)
        assert separation_px == pytest.approx(12.48, abs=0.05)

    def test_slit_width_column_weights(self, slit_phantom):
        # each slit's column coverages sum to the slit width in pixels
        profile = slit_phantom.values[0]
        half = len(profile) // 2
        width_px = SLIT_WIDTH * BETA / PITCH_X  # 3.1189...
        assert profile[:half].sum() == pytest.approx(width_px, rel=1e-12)
        assert profile[half:].sum() == pytest.approx(width_px, rel=1e-12)
        # 3.12-pixel-wide slit: full interior columns plus fractional edges
        full_cols = int((profile[:half] >= 1.0 - 1e-12).sum())
        frac_cols = int(((profile[:half] > 1e-12) & (profile[:half] < 1.0 - 1e-12)).sum())
        assert full_cols >= 2 and frac_cols == 2

    def test_fully_transmissive_limit(self):
        # coincident slits covering the whole grid
        phantom = make_double_slit(rows=4, cols=8, pitch_x=100.0, pitch_y=100.0,
                                   slit_width_obj=800.0, separation_obj=0.0, beta=1.0)
        assert (phantom.values == 1.0).all()

    def test_total_transmission_matches_area(self, slit_phantom):
        # analytic area: two full-height slits of width w_img, in pixel units
        width_px = SLIT_WIDTH * BETA / PITCH_X
        expected = 2.0 * width_px * slit_phantom.rows
        assert slit_phantom.values.sum() == pytest.approx(expected, rel=1e-9)

    def test_overlapping_slits_use_union_area(self):
        # separation smaller than the width: the union is one band
        phantom = make_double_slit(rows=2, cols=16, pitch_x=100.0, pitch_y=100.0,
                                   slit_width_obj=400.0, separation_obj=100.0, beta=1.0)
        assert phantom.values.max() <= 1.0
        assert phantom.values.sum() == pytest.approx(2 * 5.0, rel=1e-9)  # 500 um band

    def test_mirror_symmetry(self):
        # even-pixel separation; mirrored grid equals itself
        phantom = make_double_slit(rows=4, cols=32, pitch_x=100.0, pitch_y=100.0,
                                   slit_width_obj=250.0, separation_obj=1200.0, beta=1.0)
        np.testing.assert_array_equal(phantom.values, phantom.values[:, ::-1])

    def test_geometry_exceeding_grid(self):
        with pytest.raises(ParameterError):
            make_double_slit(rows=32, cols=8, pitch_x=PITCH_X, pitch_y=PITCH_Y,
                             slit_width_obj=SLIT_WIDTH, separation_obj=SLIT_SEPARATION,
                             beta=BETA)

    def test_values_within_unit_interval(self, slit_phantom):
        assert slit_phantom.values.min() >= 0.0
        assert slit_phantom.values.max() <= 1.0


class TestPhantomPgm:
    def test_round_trip(self, slit_phantom, tmp_path):
        path = tmp_path / "phantom.pgm"
        save_phantom_pgm(slit_phantom, path)
        text = path.read_text()
        assert text.startswith("P2\n64 32\n65535\n")
        loaded = load_phantom_pgm(path, PITCH_X, PITCH_Y)
        assert loaded.rows == slit_phantom.rows and loaded.cols == slit_phantom.cols
        # quantization error bounded by half a grey level
        assert np.abs(loaded.values - slit_phantom.values).max() <= 0.5 / 65535 + 1e-12
