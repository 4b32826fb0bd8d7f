import numpy as np
import pytest

from specrefute.assembler import (
    CapacityError,
    assemble,
    block_keys,
    orbit_block,
    size_report,
    trace_weight,
)
from specrefute.marginals import Atom, Generator, SpectrumSet
from specrefute.permrep import Partition, character_mn, enumerate_partitions

AB, AC, BC = (0, 1), (0, 2), (1, 2)


def three_qubit(l_ab=0.2, l_ac=0.3, l_bc=0.4):
    return SpectrumSet(3, {AB: [1 - l_ab, l_ab], AC: [1 - l_ac, l_ac], BC: [1 - l_bc, l_bc]})


def test_orbit_block_examples():
    g = Generator(2, (Atom((0,), (0, 1)),))
    assert np.allclose(orbit_block(g, (Partition((2,)),)), [[1]])
    assert np.allclose(orbit_block(g, (Partition((1, 1)),)), [[-1]])
    g3 = Generator(3, (Atom((0,), (0, 1)),))
    m = orbit_block(g3, (Partition((2, 1)),))
    assert np.allclose(m, m.T)
    # orbit average of a class is the scalar chi/dim (Schur's lemma)
    assert abs(np.trace(m) - character_mn(Partition((2, 1)), Partition((2, 1)))) < 1e-12
    assert np.allclose(m, 0)


def test_identity_block():
    key = (Partition((2, 1)), Partition((3,)))
    assert np.allclose(orbit_block(Generator(3), key), np.eye(2))


def test_key_mismatch_and_cap():
    g = Generator(3, (Atom((0,), (0, 1)),))
    with pytest.raises(ValueError):
        orbit_block(g, (Partition((2,)),))
    with pytest.raises(CapacityError):
        orbit_block(g, (Partition((2, 1)),) * 3, cap=4)


def test_assemble_structure():
    p = assemble(three_qubit(), 2, 3)
    assert len(p.blocks) == 8
    assert sorted(p.block_sizes()) == [1, 2, 2, 2, 4, 4, 4, 8]
    assert p.size().n_sym == 76
    for b in p.blocks.values():
        assert np.allclose(b[0], np.eye(b.shape[1]))
        assert np.max(np.abs(b - np.swapaxes(b, 1, 2))) <= 1e-12
    p4 = assemble(three_qubit(), 2, 4)
    assert len(p4.blocks) == 27 and max(p4.block_sizes()) == 27 and p4.size().n_sym == 1480


def test_assemble_deterministic():
    a = assemble(three_qubit(), 2, 3)
    b = assemble(three_qubit(), 2, 3, threads=3)
    assert list(a.blocks) == list(b.blocks)
    for key in a.blocks:
        assert np.array_equal(a.blocks[key], b.blocks[key])


def test_rank_too_large():
    s = SpectrumSet(2, {(0,): [0.5, 0.3, 0.2]})
    with pytest.raises(ValueError):
        assemble(s, 1, 2)


def test_with_spectra_shares_blocks():
    p = assemble(three_qubit(), 2, 2)
    q = p.with_spectra(three_qubit(0.1, 0.1, 0.1))
    assert q.blocks is p.blocks
    assert not np.allclose(q.targets, p.targets)
    with pytest.raises(ValueError):
        p.with_spectra(SpectrumSet(3, {AB: [1.0]}))


@pytest.mark.parametrize("n,d,k,expected", [
    (2, 2, 2, (136, 4, 4, 1)),
    (3, 3, 3, (None, 140, 27, 8)),
    (2, 3, 4, (None, 305, 16, 9)),
    (2, 2, 4, (32896, 116, 9, 9)),
])
def test_size_report(n, d, k, expected):
    r = size_report(n, d, k)
    naive, nsym, blocks, mx = expected
    if naive is not None:
        assert r.n_naive == naive
    assert (r.n_sym, r.block_count, r.max_block) == (nsym, blocks, mx)


def test_size_report_matches_assembly():
    for n in (1, 2, 3):
        for k in (2, 3, 4):
            for d in (1, 2, 3):
                keys = block_keys(n, d, k)
                assert size_report(n, d, k).block_count == len(keys) == len(enumerate_partitions(k, d)) ** n
                if n <= 2 or k <= 3:
                    subs = [tuple(range(n))]
                    s = SpectrumSet(n, {subs[0]: [1.0]})
                    p = assemble(s, d, k)
                    assert p.size().n_sym == size_report(n, d, k).n_sym


def test_size_report_error():
    with pytest.raises(ValueError):
        size_report(0, 2, 2)


def test_trace_weight():
    g = Generator(2, (Atom(AB, (0, 1)),))
    assert trace_weight(g, 3, 2) == pytest.approx(2.0 ** (4 - 6))
    assert trace_weight(Generator(2), 3, 2) == 1.0
