import math

import numpy as np
import pytest

from sqrect.errors import Degenerate, DegenerateFit, DepthMismatch
from sqrect.exactnum import make_surd
from sqrect.pet import Param
from sqrect.renorm import cover, incidence_matrix, ratio, renorm_step
from sqrect.lyap import cocycle_product
from sqrect.fractal import (
    box_count,
    box_count_deep,
    box_dimension,
    cover_arrays,
    dimension_estimate,
    dimension_table,
    local_scaling,
    radius_sequence,
    selfsimilar_dimension,
    selfsimilar_parameter,
    slope_fit,
)

SQRT2M1 = make_surd(-1, 1, 1, 2)
SQRT3M1 = make_surd(-1, 1, 1, 3)


class TestClosedForms:
    @pytest.mark.parametrize("family", ["minus", "plus"])
    @pytest.mark.parametrize("n", range(1, 11))
    def test_parameter_is_renormalization_fixed_point(self, family, n):
        p = selfsimilar_parameter(family, n)
        assert renorm_step(p) == p

    @pytest.mark.parametrize("family", ["minus", "plus"])
    @pytest.mark.parametrize("n", range(1, 11))
    def test_value_matches_perron_eigenvalue(self, family, n):
        p = selfsimilar_parameter(family, n)
        M = incidence_matrix(p)
        lam = max(abs(np.linalg.eigvals([[M.m11, M.m12], [M.m21, M.m22]])))
        oracle = math.log(lam) / math.log(float(ratio(p)))
        assert selfsimilar_dimension(family, n).value == pytest.approx(
            oracle, abs=1e-12
        )

    def test_silver_mean_value(self):
        # ln(2 + sqrt 5) / ln(1 + sqrt 2)
        expected = math.log(2 + math.sqrt(5)) / math.log(1 + math.sqrt(2))
        assert selfsimilar_dimension("minus", 1).value == pytest.approx(
            expected, abs=1e-12
        )
        assert selfsimilar_dimension("minus", 1).value == pytest.approx(
            1.637938, abs=1e-6
        )

    def test_dimensions_decrease_toward_one(self):
        for family in ("minus", "plus"):
            vals = [selfsimilar_dimension(family, n).value for n in range(1, 30)]
            assert all(b < a for a, b in zip(vals, vals[1:]))
            assert 2 > vals[0] > vals[-1] > 1

    def test_bad_arguments(self):
        with pytest.raises(ValueError):
            selfsimilar_dimension("minus", 0)
        with pytest.raises(ValueError):
            selfsimilar_dimension("other", 1)
        with pytest.raises(ValueError):
            selfsimilar_parameter("other", 1)

    def test_table_rows(self):
        rows = dimension_table(5)
        assert rows[0] == "family,n,value"
        assert len(rows) == 11
        for row in rows[1:]:
            family, n, value = row.split(",")
            assert float(value) == pytest.approx(
                selfsimilar_dimension(family, int(n)).value, abs=1e-6
            )


class TestRatioSequenceEstimator:
    def test_matches_closed_form_at_fixed_points(self):
        # both fixed points sit in the n=1 slot of their family
        for family, p in (
            ("minus", Param(SQRT2M1, -1)),
            ("plus", Param(SQRT3M1, 1)),
        ):
            closed = selfsimilar_dimension(family, 1).value
            est = dimension_estimate(p, 50)
            assert est.value == pytest.approx(closed, abs=2e-2)
            assert est.diagnostics["spread"] < 1e-3

    def test_rejects_zero_depth(self):
        with pytest.raises(ValueError):
            dimension_estimate(Param(SQRT2M1, -1), 0)

    def test_radius_sequence_decreasing_and_geometric(self):
        seq = radius_sequence(Param(SQRT2M1, -1), 12)
        assert all(b < a for a, b in zip(seq, seq[1:]))
        r = float(ratio(Param(SQRT2M1, -1)))
        for l, val in enumerate(seq, start=1):
            assert val == pytest.approx(r ** (-l), rel=1e-9)


class TestCoverArrays:
    def test_matches_exact_cover(self):
        p = Param(SQRT2M1, -1)
        for l in range(0, 4):
            pieces = cover(p, l)
            arrays = cover_arrays(p, l)
            assert arrays[0].size == len(pieces)
            # sort on rounded keys so float noise cannot reorder near-ties
            key = lambda t: tuple(round(v, 9) for v in t)
            exact = sorted(
                (
                    (float(c.rect.x), float(c.rect.y), float(c.rect.w), float(c.rect.h))
                    for c in pieces
                ),
                key=key,
            )
            got = sorted(
                zip(arrays[0], arrays[1], arrays[2], arrays[3]), key=key
            )
            assert np.allclose(np.array(got), np.array(exact), atol=1e-9)

    def test_piece_count_follows_cocycle(self):
        p = Param(SQRT3M1, 1)
        for l in (1, 2, 4, 6):
            M, _ = cocycle_product(p, l - 1)
            arrays = cover_arrays(p, l)
            assert arrays[0].size == sum(M.apply((1, 1)))


class TestBoxCount:
    def test_unit_square_oracle(self):
        square = (
            np.array([0.0]),
            np.array([0.0]),
            np.array([1.0]),
            np.array([1.0]),
            np.array([True]),
        )
        for k in (1, 3, 7, 20):
            assert box_count(square, 1 / k) == k * k

    def test_monotone_in_radius(self):
        arrays = cover_arrays(Param(SQRT2M1, -1), 5)
        counts = [box_count(arrays, r) for r in (0.2, 0.1, 0.05, 0.02)]
        assert all(b >= a for a, b in zip(counts, counts[1:]))

    def test_rejects_nonpositive_radius(self):
        with pytest.raises(ValueError):
            box_count(cover_arrays(Param(SQRT2M1, -1), 2), 0.0)

    def test_deep_streaming_agrees_with_direct(self):
        p = Param(SQRT2M1, -1)
        r = radius_sequence(p, 6)[5]
        assert box_count_deep(p, 6, r, base_l=3) == box_count(
            cover_arrays(p, 6), r
        )

    def test_deep_requires_fixed_parameter(self):
        from fractions import Fraction

        with pytest.raises(Degenerate):
            box_count_deep(Param(Fraction(3, 8), -1), 5, 0.01, base_l=1)


class TestSlopeFit:
    def test_recovers_power_law(self):
        radii = [2.0 ** -k for k in range(3, 10)]
        counts = [r ** -1.5 for r in radii]
        rep = slope_fit(radii, counts)
        assert rep.value == pytest.approx(1.5, abs=1e-12)
        assert rep.diagnostics["r_squared"] >= 0.99

    def test_single_point_rejected(self):
        with pytest.raises(DegenerateFit):
            slope_fit([0.5], [10])

    def test_noise_rejected(self):
        rng = np.random.default_rng(0)
        radii = [2.0 ** -k for k in range(3, 10)]
        counts = rng.integers(10, 1000, size=len(radii))
        with pytest.raises(DegenerateFit):
            slope_fit(radii, counts)


class TestBoxDimension:
    def test_silver_mean_slope(self):
        rep = box_dimension(Param(SQRT2M1, -1), l_min=4, l_max=9)
        assert rep.value == pytest.approx(1.638, abs=0.05)
        assert rep.diagnostics["r_squared"] >= 0.99


class TestLocalScaling:
    def test_silver_mean_certificate(self):
        rep = local_scaling(
            Param(SQRT2M1, -1), points=20, radii=[0.02, 0.01, 0.005]
        )
        assert rep.value >= 1.55
        assert rep.value <= 1.638 + 0.15
        assert rep.diagnostics["points"] == 20

    def test_radii_too_fine(self):
        with pytest.raises(DepthMismatch):
            local_scaling(Param(SQRT2M1, -1), points=5, radii=[1e-12])

    def test_bad_arguments(self):
        with pytest.raises(ValueError):
            local_scaling(Param(SQRT2M1, -1), points=0, radii=[0.1])
        with pytest.raises(ValueError):
            local_scaling(Param(SQRT2M1, -1), points=5, radii=[])
