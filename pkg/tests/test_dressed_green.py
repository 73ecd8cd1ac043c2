"""Dressed excited-state propagators and quasi-energy poles."""

import numpy as np
import pytest

from src.models.levels import LevelId
from src.physics.dressed_green import (
    ControlField,
    at_resonances,
    at_width_scale,
    bare_green,
    block_members,
    block_matrix,
    block_couplings,
    dressed_block,
    excited_green,
    narrow_resonance,
)
from src.utils.errors import DressedPoleError


def test_block_dimensions():
    assert len(block_members(0)) == 3
    assert len(block_members(2)) == 2
    assert len(block_members(-3)) == 1
    assert block_members(1)[0] == LevelId.excited(3, 1)


def test_control_off_reduces_to_bare_propagators(table, control_off):
    E = np.linspace(-30.0, 5.0, 41) + 1e-8j
    G = excited_green(E, control_off, table)
    for i, n in enumerate(table.excited):
        expected = np.array([bare_green(e, n, table) for e in E])
        assert np.allclose(G[:, i, i], expected, rtol=1e-12)
    off_diagonal = G - np.einsum("wii->wi", G)[:, :, None] * np.eye(G.shape[1])
    assert np.max(np.abs(off_diagonal)) == 0.0


def test_dressed_block_inverts_its_matrix(table, control_on):
    E = -0.3 + 0.01j
    block = dressed_block(E, 0, control_on, table)
    A = block_matrix(
        np.asarray(E),
        [table.energy(n) for n in block.members],
        block_couplings(0, control_on),
        control_on.coupling_pole(table),
    )
    assert np.allclose(A @ block.gmatrix, np.eye(3), atol=1e-12)
    assert block.element(block.members[0], block.members[1]) == pytest.approx(block.gmatrix[0, 1])


def test_uncoupled_projection_stays_bare(table, control_on):
    E = 0.2 + 1e-8j
    block = dressed_block(E, 3, control_on, table)
    assert block.dimension == 1
    assert block.gmatrix[0, 0] == pytest.approx(bare_green(E, LevelId.excited(3, 3), table))


def test_energy_on_coupling_pole_raises(table, control_on):
    with pytest.raises(DressedPoleError):
        dressed_block(control_on.coupling_pole(table), 0, control_on, table)


def test_dressed_propagator_is_dissipative(table, control_on):
    E = np.linspace(-2.0, 1.0, 300) + control_on.epsilon * 1j
    G = excited_green(E, control_on, table)
    anti_hermitian = (G - np.conj(np.swapaxes(G, 1, 2))) / 2j
    assert np.max(np.linalg.eigvalsh(anti_hermitian)) < 1e-10


def test_poles_lie_in_lower_half_plane(table, control_on):
    poles = at_resonances(control_on, table)
    assert poles
    assert all(p.energy.imag < 0 for p in poles)
    narrow = [p for p in poles if p.narrow]
    # One narrow pole per coupled block, M = -2..2
    assert sorted(p.M for p in narrow) == [-2, -1, 0, 1, 2]


def test_narrow_resonance_near_two_photon_point(table, control_on):
    position, width = narrow_resonance(control_on, table)
    assert abs(position - control_on.offset) < 0.5
    assert 0.0 < width < 0.1
    scale = at_width_scale(control_on, table)
    assert scale / 10.0 < width < 3.0 * scale


def test_narrow_width_grows_with_rabi(table):
    widths = [narrow_resonance(ControlField(rabi=r), table)[1] for r in (1.0, 2.0, 4.0)]
    assert widths[0] < widths[1] < widths[2]


def test_control_off_has_no_narrow_resonance(table, control_off):
    position, width = narrow_resonance(control_off, table)
    assert np.isnan(position) and np.isnan(width)
