import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from specrefute.marginals import (
    Atom,
    Generator,
    SpectrumSet,
    enumerate_generators,
    generator_value,
    power_sum,
    site_permutations,
    subsystem_label,
)
from specrefute.oracle import eta_dense, partial_trace, random_density
from specrefute.permrep import Permutation

AB, AC, BC = (0, 1), (0, 2), (1, 2)


def spectrum_strategy(max_len=6):
    return st.lists(st.floats(0, 1, allow_nan=False), min_size=1, max_size=max_len).filter(
        lambda v: sum(v) > 1e-3).map(lambda v: [x / sum(v) for x in v])


class TestSpectrumSet:
    def test_sorted_and_keys(self):
        s = SpectrumSet(3, {(2, 1): [0.2, 0.8], (0,): [1.0]})
        assert s.subsystems == [(0,), (1, 2)]
        assert s[(1, 2)] == (0.8, 0.2)

    @pytest.mark.parametrize("spectra", [
        {(0,): [0.6, 0.6]},
        {(0,): [1.2, -0.2]},
        {(0,): []},
        {(3,): [1.0]},
        {(): [1.0]},
    ])
    def test_invalid(self, spectra):
        with pytest.raises(ValueError):
            SpectrumSet(3, spectra)

    def test_duplicate(self):
        with pytest.raises(ValueError):
            SpectrumSet(2, {(0, 1): [1.0], (1, 0): [1.0]})

    def test_label(self):
        assert subsystem_label((0, 2)) == "AC"


class TestPowerSum:
    def test_examples(self):
        assert power_sum([0.5, 0.5], 2) == pytest.approx(0.5)
        assert power_sum([1, 0], 3) == 1
        for r in range(1, 6):
            for ell in range(1, 5):
                assert power_sum([1 / r] * r, ell) == pytest.approx(r ** (1 - ell))

    def test_error(self):
        with pytest.raises(ValueError):
            power_sum([1.0], 0)

    @given(spectrum_strategy(), st.integers(1, 6))
    def test_properties(self, mu, ell):
        assert power_sum(mu, 1) == pytest.approx(1.0)
        assert power_sum(mu, ell + 1) <= power_sum(mu, ell) + 1e-15
        assert 0 <= power_sum(mu, ell) <= 1 + 1e-12


class TestGenerators:
    def test_counts(self):
        assert len(enumerate_generators([AB, AC, BC], 2)) == 4
        assert len(enumerate_generators([AB, AC, BC], 3)) == 7
        assert enumerate_generators([AB], 2)[0].is_identity

    @pytest.mark.parametrize("k", [1, 2, 3])
    def test_factorizing_equals_cycles_small_k(self, k):
        subs = [AB, AC, BC]
        assert enumerate_generators(subs, k, "factorizing") == enumerate_generators(subs, k, "cycles")

    def test_two_atom_generator(self):
        gens = enumerate_generators([AB, BC], 4, "factorizing")
        target = Generator(4, (Atom(AB, (0, 1)), Atom(BC, (2, 3))))
        assert target in gens
        s = SpectrumSet(3, {AB: [1, 0], BC: [0.5, 0.5]})
        assert generator_value(target, s) == pytest.approx(0.5)
        assert site_permutations(target, 3) == (
            Permutation.from_cycles(4, [(0, 1)]),
            Permutation.from_cycles(4, [(0, 1), (2, 3)]),
            Permutation.from_cycles(4, [(2, 3)]))

    def test_factorizing_k4_count(self):
        # 1 identity + 3 subsystems x 3 lengths + 6 pairs of 2-cycles
        assert len(enumerate_generators([AB, AC, BC], 4, "factorizing")) == 16

    def test_canonical_equality(self):
        g1 = Generator(4, (Atom(BC, (2, 3)), Atom(AB, (0, 1))))
        g2 = Generator(4, (Atom(AB, (0, 1)), Atom(BC, (2, 3))))
        assert g1 == g2 and hash(g1) == hash(g2)

    @pytest.mark.parametrize("atoms", [
        (Atom(AB, (0, 1)), Atom(BC, (1, 2))),
        (Atom(AB, (0,)),),
        (Atom(AB, (0, 5)),),
    ])
    def test_invalid(self, atoms):
        with pytest.raises(ValueError):
            Generator(4, atoms)

    def test_unknown_mode(self):
        with pytest.raises(ValueError):
            enumerate_generators([AB], 2, "all")

    def test_values(self):
        s = SpectrumSet(3, {AB: [0.5, 0.5]})
        assert generator_value(Generator(2), s) == 1
        assert generator_value(Generator(2, (Atom(AB, (0, 1)),)), s) == pytest.approx(0.5)
        with pytest.raises(ValueError):
            generator_value(Generator(2, (Atom(BC, (0, 1)),)), s)

    def test_site_permutations(self):
        assert site_permutations(Generator(2), 3) == (Permutation.identity(2),) * 3
        t = Permutation.from_cycles(2, [(0, 1)])
        assert site_permutations(Generator(2, (Atom(AB, (0, 1)),)), 3) == (t, t, Permutation.identity(2))

    def test_encode_roundtrip(self):
        for g in enumerate_generators([AB, AC, BC], 4, "factorizing"):
            assert Generator.decode(4, g.encode()) == g


@pytest.mark.parametrize("n", [2, 3])
@pytest.mark.parametrize("k", [2, 3])
def test_brute_force_match(n, k, rng):
    subs = [(0,), (0, 1)] if n == 2 else [AB, AC, BC, (0,)]
    for _ in range(3):
        rho = random_density([2] * n, rng)
        spectra = {}
        for a in subs:
            ev = np.linalg.eigvalsh(partial_trace(rho, [2] * n, a)).clip(min=0)
            spectra[a] = ev / ev.sum()
        s = SpectrumSet(n, spectra)
        big = rho
        for _ in range(k - 1):
            big = np.kron(big, rho)
        for g in enumerate_generators(subs, k):
            dense = np.trace(eta_dense(site_permutations(g, n), 2).matrix @ big).real
            assert abs(dense - generator_value(g, s)) <= 1e-10
