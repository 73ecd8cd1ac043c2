"""Dipole matrix elements and the level table."""

from fractions import Fraction

import numpy as np
import pytest

from src.models.levels import LevelId, excited_levels, ground_levels
from src.physics.atomic_data import (
    DEFAULT_GAMMA_MHZ,
    DEFAULT_SPLITTINGS_MHZ,
    TransitionTable,
    control_coupling,
    dipole_matrix_element,
    dipole_vector,
    relative_strength,
)
from src.utils.errors import ConfigError


def _summed_strength(n: LevelId) -> float:
    return sum(dipole_matrix_element(n, m, q) ** 2 for m in ground_levels() for q in (-1, 0, 1))


@pytest.mark.parametrize("n", excited_levels())
def test_each_excited_sublevel_decays_at_gamma(n):
    assert _summed_strength(n) == pytest.approx(0.75, abs=1e-12)


@pytest.mark.parametrize("F0", [3, 2])
def test_ground_sum_rule_is_independent_of_projection(F0):
    totals = [
        sum(dipole_matrix_element(n, m, q) ** 2 for n in excited_levels() for q in (-1, 0, 1))
        for m in ground_levels(F0)
    ]
    assert np.allclose(totals, totals[0], atol=1e-12)
    assert totals[0] == pytest.approx(1.5, abs=1e-12)


def test_relative_strengths_from_f0_3():
    expected = {4: Fraction(9, 14), 3: Fraction(5, 18), 2: Fraction(5, 63)}
    for F, value in expected.items():
        assert relative_strength(F, 3) == pytest.approx(float(value), abs=1e-12)
    assert sum(relative_strength(F, 3) for F in (4, 3, 2)) == pytest.approx(1.0, abs=1e-12)
    assert sum(relative_strength(F, 2) for F in (3, 2, 1)) == pytest.approx(1.0, abs=1e-12)


def test_forbidden_transitions_vanish():
    # F = 1 cannot reach F0 = 3
    assert dipole_matrix_element(LevelId.excited(1, 0), LevelId.ground(3, 0), 0) == 0.0
    # F = 4 cannot reach F0 = 2
    assert dipole_matrix_element(LevelId.excited(4, 1), LevelId.ground(2, 1), 0) == 0.0
    # M = M0 + q
    assert dipole_matrix_element(LevelId.excited(4, 2), LevelId.ground(3, 0), 1) == 0.0
    assert dipole_matrix_element(LevelId.excited(4, 1), LevelId.ground(3, 0), 1) != 0.0


def test_dipole_element_rejects_wrong_manifolds():
    with pytest.raises(ValueError):
        dipole_matrix_element(LevelId.ground(3, 0), LevelId.ground(3, 0), 0)
    with pytest.raises(ValueError):
        dipole_matrix_element(LevelId.excited(4, 0), LevelId.ground(3, 0), 2)


def test_dipole_vector_matches_spherical_components():
    n, m = LevelId.excited(4, 1), LevelId.ground(3, 0)
    v = dipole_vector(n, m)
    assert np.linalg.norm(v) == pytest.approx(abs(dipole_matrix_element(n, m, 1)), abs=1e-14)
    assert v[2] == 0


def test_control_coupling_reference_and_uncoupled_states():
    assert control_coupling(LevelId.excited(3, 2), 3.0) == pytest.approx(1.5, abs=1e-14)
    assert control_coupling(LevelId.excited(4, 0), 3.0) == 0
    assert control_coupling(LevelId.excited(3, 3), 3.0) == 0
    with pytest.raises(ValueError):
        control_coupling(LevelId.ground(2, 0), 3.0)


def test_level_identifiers_validate():
    with pytest.raises(ValueError):
        LevelId.excited(4, 5)
    with pytest.raises(ValueError):
        LevelId.ground(4, 0)
    with pytest.raises(ValueError):
        LevelId.excited(3, 0.5)
    assert len(excited_levels()) == 24
    assert len(ground_levels()) == 12


def test_default_table_energies(table):
    delta43 = DEFAULT_SPLITTINGS_MHZ["delta43"] / DEFAULT_GAMMA_MHZ
    assert table.delta43 == pytest.approx(delta43)
    detunings = table.resonance_detunings()
    assert detunings[4] == 0.0
    assert detunings[3] == pytest.approx(-delta43)
    assert detunings[2] == pytest.approx(-delta43 - table.delta32)
    assert table.energy(LevelId.ground(2, 0)) == pytest.approx(-table.delta_g)
    assert table.dipole_array().shape == (24, 12, 3)
    assert len(table.manifold_members(3)) == 7


def test_load_matches_defaults(tmp_path):
    path = tmp_path / "rb.toml"
    path.write_text(
        "[linewidth]\ngamma_mhz = 6.0666\n[splittings]\n"
        + "\n".join(f"{k}_mhz = {v}" for k, v in DEFAULT_SPLITTINGS_MHZ.items())
    )
    loaded = TransitionTable.load(path)
    assert loaded.hyperfine_splittings == pytest.approx(TransitionTable.default().hyperfine_splittings)
    assert loaded.source == str(path)


def test_load_rejects_missing_and_malformed(tmp_path):
    with pytest.raises(ConfigError):
        TransitionTable.load(tmp_path / "absent.toml")
    bad = tmp_path / "bad.toml"
    bad.write_text("[splittings\n")
    with pytest.raises(ConfigError):
        TransitionTable.load(bad)


def test_splitting_order_is_enforced():
    swapped = dict(DEFAULT_SPLITTINGS_MHZ, delta32=200.0)
    with pytest.raises(ConfigError):
        TransitionTable.from_splittings(swapped)
    with pytest.raises(ConfigError):
        TransitionTable.from_splittings({"delta43": 1.0})


def test_table_caches_allowed_dipole_elements(table):
    n, m = LevelId.excited(4, 1), LevelId.ground(3, 0)
    assert table.dipole_element(n, m, 1) == pytest.approx(dipole_matrix_element(n, m, 1))
    assert table.dipole_element(LevelId.excited(1, 0), LevelId.ground(3, 0), 0) == 0.0
