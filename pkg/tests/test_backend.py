import numpy as np
import pytest

from hosi import _kernels_py as kpy
from hosi import backend

compiled = pytest.importorskip("hosi._kernels", reason="compiled kernels not built")


class TestBackendParity:
    def test_kahan_sum_matches_fsum(self, rng):
        x = rng.normal(size=500_000) * 10.0 ** rng.integers(-8, 8, size=500_000)
        assert compiled.kahan_sum(x) == pytest.approx(kpy.kahan_sum(x), rel=1e-15)

    @pytest.mark.parametrize("base", [2, 3, 5, 7, 16])
    def test_digit_codec_bit_identical(self, rng, base):
        x = rng.random(50_000)
        t = kpy.default_precision(base)
        dc = compiled.encode_digits(x, base, t)
        dp = kpy.encode_digits(x, base, t)
        assert np.array_equal(dc, dp)
        assert np.array_equal(compiled.decode_digits(dc, base), kpy.decode_digits(dp, base))

    def test_encode_shape_preserved(self, rng):
        x = rng.random((100, 3, 2))
        out = compiled.encode_digits(x, 3, 5)
        assert out.shape == (100, 3, 2, 5)
        assert np.array_equal(out, kpy.encode_digits(x, 3, 5))

    def test_range_validated(self):
        with pytest.raises(ValueError):
            compiled.encode_digits(np.array([1.5]), 2, 4)

    def test_default_precision_agreement(self):
        for base in (2, 3, 10, 16):
            assert compiled.default_precision(base) == kpy.default_precision(base)

    def test_backend_selection_reports(self):
        assert backend.BACKEND in ("compiled", "numpy")
        assert backend.HAVE_COMPILED == (backend.BACKEND == "compiled")
