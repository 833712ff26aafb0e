import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from hosi import (
    IncompleteLatticeError,
    SubsetMap,
    VarSubset,
    moebius_transform,
    moebius_with_errors,
    zeta_transform,
)
from hosi.oracles import rectangle_indices


def dense_map(d, values):
    return SubsetMap(d, {m: float(v) for m, v in enumerate(values)})


class TestTransforms:
    def test_inclusion_exclusion_d2(self):
        a, b, c = 0.3, 0.5, 1.1
        cum = dense_map(2, [0.0, a, b, c])
        comp = moebius_transform(cum)
        assert comp.values[0] == pytest.approx(0.0)
        assert comp.values[1] == pytest.approx(a)
        assert comp.values[2] == pytest.approx(b)
        assert comp.values[3] == pytest.approx(c - a - b)

    def test_zeta_d1(self):
        comp = dense_map(1, [0.0, 0.7])
        assert zeta_transform(comp).values[1] == pytest.approx(0.7)

    def test_zero_map(self):
        z = dense_map(3, [0.0] * 8)
        assert all(v == 0.0 for v in zeta_transform(z).values.values())

    @given(st.integers(1, 6), st.integers(0, 2**32 - 1))
    def test_inverse_pair_random(self, d, seed):
        rng = np.random.default_rng(seed)
        vals = rng.normal(size=2**d)
        m = dense_map(d, vals)
        back = zeta_transform(moebius_transform(m)).to_dense()
        assert np.max(np.abs(back - m.to_dense())) < 1e-12
        back2 = moebius_transform(zeta_transform(m)).to_dense()
        assert np.max(np.abs(back2 - m.to_dense())) < 1e-12

    def test_rectangle_components_d3_p4(self):
        eps = (0.1, 0.2, 0.3)
        d = 3
        cum = SubsetMap.from_function(
            d, lambda u: rectangle_indices(eps, u, 4, "moment").index
        )
        comp = moebius_transform(cum)
        for mask in range(8):
            u = VarSubset(mask, d)
            expected = rectangle_indices(eps, u, 4, "moment").component
            assert comp.get(u) == pytest.approx(expected, abs=1e-12)

    def test_additive_zeta_of_singletons(self):
        # components supported on singletons: cumulative = sum of contained ones
        comp = SubsetMap(3, {0: 0.0, 1: 0.5, 2: 0.25, 4: 0.125, 3: 0.0, 5: 0.0, 6: 0.0, 7: 0.0})
        cum = zeta_transform(comp)
        assert cum.values[7] == pytest.approx(0.875)
        assert cum.values[3] == pytest.approx(0.75)


class TestPartialFamilies:
    def test_downward_closed_family_works(self):
        d = 3
        vals = {0: 0.0, 1: 1.0, 2: 2.0, 3: 4.0}
        comp = moebius_transform(SubsetMap(d, vals))
        assert comp.values[3] == pytest.approx(4.0 - 1.0 - 2.0)

    def test_singletons_and_pairs_without_empty_set(self):
        # the empty set defaults to 0, so estimated singleton+pair families
        # transform without an explicit {} row
        vals = {1: 1.0, 2: 2.0, 3: 4.0}
        comp = moebius_transform(SubsetMap(3, vals))
        assert comp.values[3] == pytest.approx(1.0)
        assert comp.values[1] == pytest.approx(1.0)

    def test_missing_subsets_reported(self):
        d = 3
        with pytest.raises(IncompleteLatticeError) as err:
            moebius_transform(SubsetMap(d, {3: 1.0, 0: 0.0}))
        missing = {str(u) for u in err.value.missing}
        assert missing == {"{1}", "{2}"}

    def test_zeta_partial_checks_too(self):
        with pytest.raises(IncompleteLatticeError):
            zeta_transform(SubsetMap(2, {3: 1.0}))


class TestErrorPropagation:
    def test_variances_add(self):
        cum = dense_map(2, [0.0, 1.0, 2.0, 5.0])
        var = dense_map(2, [0.0, 0.01, 0.04, 0.09])
        comp, v = moebius_with_errors(cum, var)
        assert comp.values[3] == pytest.approx(2.0)
        assert v.values[3] == pytest.approx(0.01 + 0.04 + 0.09)
        assert v.values[1] == pytest.approx(0.01)
