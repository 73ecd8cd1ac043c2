"""Susceptibility, scattering tensors and the spectral helpers."""

import math

import numpy as np
import pytest
from sympy import Rational
from sympy.physics.wigner import clebsch_gordan

from src.config import parse_config
from src.models.levels import LevelId
from src.models.optics import ScatteringChannel
from src.physics.dressed_green import ControlField, at_width_scale, narrow_resonance
from src.physics.response import (
    amplitudes_to_tensors,
    at_decomposition,
    complex_wavenumber,
    differential_cross_section,
    extinction_coefficient,
    extinction_cross_section,
    fit_lorentzian,
    kramers_kronig,
    refined_grid,
    scattering_tensor,
    scattering_tensor_grid,
    sigma0,
    susceptibility,
    susceptibility_grid,
    susceptibility_spectrum,
    total_scattering_cross_section,
    transverse_basis,
)
from src.scenarios.spectrum import SpectrumScenario
from src.utils.errors import ContractViolation

X = np.array([1.0, 0.0, 0.0])
Y = np.array([0.0, 1.0, 0.0])
Z = np.array([0.0, 0.0, 1.0])


def test_resonant_peak_height_and_cross_section(table, control_off):
    chi = susceptibility(0.0, control_off, table=table)
    assert chi.chi_perp.imag == pytest.approx(9.0 / 14.0, rel=1e-3)
    assert sigma0(table) == pytest.approx(4.0 * math.pi * 9.0 / 14.0, rel=1e-3)


def test_control_free_medium_is_isotropic(table, control_off):
    chi = susceptibility_grid(np.linspace(-25.0, 5.0, 61), control_off, table)
    assert np.allclose(chi[:, 0, 0], chi[:, 2, 2], rtol=1e-10)
    assert np.allclose(chi[:, 0, 0], chi[:, 1, 1], rtol=1e-10)
    off = chi - np.einsum("wii->wi", chi)[:, :, None] * np.eye(3)
    assert np.max(np.abs(off)) < 1e-12


def test_control_makes_medium_uniaxial(table, control_on):
    chi = susceptibility_grid(np.linspace(-1.0, 0.5, 37), control_on, table)
    assert np.allclose(chi[:, 0, 0], chi[:, 1, 1], rtol=1e-10)
    assert np.max(np.abs(chi[:, 0, 1])) < 1e-12
    assert np.max(np.abs(chi[:, 0, 0] - chi[:, 2, 2])) > 1e-3


def test_rotated_tensor_is_covariant(table, control_on):
    chi = susceptibility(-0.3, control_on, table=table)
    angle = 0.7
    about_z = np.array(
        [[math.cos(angle), -math.sin(angle), 0.0], [math.sin(angle), math.cos(angle), 0.0], [0.0, 0.0, 1.0]]
    )
    assert np.allclose(chi.rotate(about_z), chi.cartesian, atol=1e-10)

    z_to_x = np.array([[0.0, 0.0, 1.0], [0.0, 1.0, 0.0], [-1.0, 0.0, 0.0]])
    rotated = chi.rotate(z_to_x)
    assert rotated[0, 0] == pytest.approx(chi.chi_par, abs=1e-10)
    assert rotated[2, 2] == pytest.approx(chi.chi_perp, abs=1e-10)
    e = np.array([1.0, 1.0j, 0.5]) / math.sqrt(2.25)
    assert complex(np.conj(z_to_x @ e) @ rotated @ (z_to_x @ e)) == pytest.approx(chi.project(e), abs=1e-10)
    assert chi.isotropic_part == pytest.approx(np.trace(rotated) / 3.0, abs=1e-10)
    assert abs(chi.anisotropy) > 1e-3


def test_control_free_tensor_has_no_anisotropy(table, control_off):
    chi = susceptibility(0.4, control_off, table=table)
    assert abs(chi.anisotropy) < 1e-12
    assert chi.isotropic_part == pytest.approx(chi.chi_perp)


def test_dilute_wavenumber(table, control_off):
    chi = 1e-4 * susceptibility_grid(np.linspace(-2.0, 2.0, 9), control_off, table)[:, 0, 0]
    k = complex_wavenumber(chi)
    assert np.allclose(k - 1.0, 2.0 * np.pi * chi, rtol=1e-3, atol=0.0)
    assert np.allclose(extinction_coefficient(chi), 2.0 * k.imag)
    assert np.all(extinction_coefficient(chi) > 0.0)


@pytest.mark.parametrize("control", [ControlField(), ControlField(rabi=3.0)])
def test_medium_is_passive(table, control):
    chi = susceptibility_grid(np.linspace(-40.0, 30.0, 2001), control, table)
    assert np.min(chi[:, 0, 0].imag) > 0.0
    assert np.min(chi[:, 2, 2].imag) > 0.0


def test_at_decomposition_vanishes_without_control(table, control_off, control_on):
    _, chi_at = at_decomposition(0.1, control_off, table=table)
    assert np.max(np.abs(chi_at)) < 1e-14
    chi0, chi_at = at_decomposition(-0.3, control_on, table=table)
    assert chi0 == pytest.approx(susceptibility(-0.3, control_off, table=table).chi_perp)
    assert np.max(np.abs(chi_at)) > 0.0


def test_spectrum_keys(table, control_on):
    spectrum = susceptibility_spectrum(np.array([-1.0, 0.0]), control_on, table)
    assert set(spectrum) == {"delta", "chi_perp", "chi_par", "chi0"}


def test_scattering_channels_are_classified(table, control_on):
    m = LevelId.ground(3, 0)
    amplitudes = scattering_tensor(-0.3, m, control_on, table)
    channels = {a.channel for a in amplitudes}
    assert ScatteringChannel.RAYLEIGH_ELASTIC in channels
    assert ScatteringChannel.RAMAN_INELASTIC in channels
    for a in amplitudes:
        assert a.channel.is_elastic == (a.final.F == 3)
        if a.channel is ScatteringChannel.RAMAN_INELASTIC:
            assert a.out_frequency_shift == pytest.approx(table.delta_g)


def test_no_inelastic_scattering_without_control(table, control_off):
    amplitudes = scattering_tensor(0.0, LevelId.ground(3, 1), control_off, table)
    inelastic = sum(a.strength for a in amplitudes if not a.channel.is_elastic)
    elastic = sum(a.strength for a in amplitudes if a.channel.is_elastic)
    # Only the far detuned F = 3, 2 paths reach F0 = 2
    assert inelastic / elastic < 5e-3


def test_cyclic_amplitudes_rebuild_cartesian_tensor(table, control_on):
    m = LevelId.ground(3, -1)
    amplitudes = scattering_tensor(0.2, m, control_on, table)
    tensors = amplitudes_to_tensors(amplitudes)
    alpha = scattering_tensor_grid(np.array([0.2]), control_on, table)[0]
    column = list(table.manifold_members(3)).index(table.ground_index()[m])
    for final, tensor in tensors.items():
        assert np.allclose(tensor, alpha[table.ground_index()[final], column], atol=1e-12)


def test_scattering_tensor_requires_populated_level(table, control_off):
    with pytest.raises(ContractViolation):
        scattering_tensor(0.0, LevelId.ground(2, 0), control_off, table)


def test_differential_cross_section_requires_transverse_polarization(table, control_off):
    amplitudes = scattering_tensor(0.0, LevelId.ground(3, 0), control_off, table)
    with pytest.raises(ContractViolation):
        differential_cross_section(amplitudes, Y, X, Y, Z)
    with pytest.raises(ContractViolation):
        differential_cross_section(amplitudes, Y, X, X, Y)


@pytest.mark.parametrize("delta", [0.0, 0.7, -19.5])
@pytest.mark.parametrize("M", [0, 2])
def test_optical_theorem_without_control(table, control_off, delta, M):
    m = LevelId.ground(3, M)
    amplitudes = scattering_tensor(delta, m, control_off, table)
    scattered = total_scattering_cross_section(amplitudes, Y, X, n_theta=8, n_phi=16)
    extinct = extinction_cross_section(delta, X, control_off, m=m, table=table)
    assert scattered == pytest.approx(extinct, rel=1e-6)


def test_transverse_basis_is_orthonormal():
    for k in (X, Y, Z, np.array([1.0, 2.0, -0.5])):
        a, b = transverse_basis(k)
        u = k / np.linalg.norm(k)
        assert abs(a @ u) < 1e-12 and abs(b @ u) < 1e-12
        assert a @ b == pytest.approx(0.0, abs=1e-12)
        assert np.linalg.norm(a) == pytest.approx(1.0) and np.linalg.norm(b) == pytest.approx(1.0)
        assert abs(a[2]) < 1e-12


def test_kramers_kronig_reconstructs_real_part(table, control_off):
    delta = np.linspace(-60.0, 60.0, 12001)
    chi = susceptibility_grid(delta, control_off, table)[:, 0, 0]
    centres = np.array(list(table.resonance_detunings().values())[:3])
    at = np.concatenate([centres - 0.5, centres, centres + 0.5])
    reconstructed = kramers_kronig(delta, chi.imag, at=at)
    direct = np.interp(at, delta, chi.real)
    assert np.max(np.abs(reconstructed - direct)) < 0.02 * np.max(chi.imag)


def test_refined_grid_is_denser_around_centre():
    base = np.linspace(-10.0, 10.0, 201)
    grid = refined_grid(base, 1.0, 0.5, factor=8)
    assert np.all(np.diff(grid) > 0)
    inside = grid[(grid >= 0.5) & (grid <= 1.5)]
    assert np.min(np.diff(inside)) == pytest.approx(0.1 / 8)
    assert grid[0] == -10.0 and grid[-1] == 10.0


def test_fit_recovers_lorentzian():
    x = np.linspace(-5.0, 5.0, 2001)
    y = 0.8 * 0.25 / ((x - 0.3) ** 2 + 0.25) + 0.01
    fit = fit_lorentzian(x, y, 0.3, 3.0)
    assert fit.centre == pytest.approx(0.3, abs=1e-6)
    assert fit.fwhm == pytest.approx(1.0, rel=1e-6)
    assert fit.height + fit.offset == pytest.approx(0.81, rel=1e-6)


def test_control_free_linewidths(table, control_off):
    delta = np.linspace(-40.0, 5.0, 9001)
    chi = susceptibility_grid(delta, control_off, table)[:, 0, 0]
    for centre in list(table.resonance_detunings().values())[:3]:
        fit = fit_lorentzian(delta, chi.imag, centre, 3.0)
        assert fit.fwhm == pytest.approx(1.0, rel=0.02)
        assert fit.centre == pytest.approx(centre, abs=0.02)


def _zeeman_sum(F: int, F0: int = 3) -> float:
    """pi-transition strength F0 -> F summed over sublevels in the uncoupled J, I basis."""
    J0, J1, I = Rational(1, 2), Rational(3, 2), Rational(5, 2)
    total = 0.0
    for M in range(-min(F, F0), min(F, F0) + 1):
        amplitude = 0
        for k in range(6):
            mI = -I + k
            mJ = M - mI
            if abs(mJ) > J0:
                continue
            amplitude += (
                clebsch_gordan(J1, I, F, mJ, mI, M)
                * clebsch_gordan(J0, I, F0, mJ, mI, M)
                * clebsch_gordan(J0, 1, J1, mJ, 0, mJ)
            )
        total += float(amplitude) ** 2
    return total


def test_hyperfine_peak_ratios_match_zeeman_sum(table, control_off):
    delta = np.linspace(-40.0, 5.0, 9001)
    chi = susceptibility_grid(delta, control_off, table)[:, 0, 0]
    centres = table.resonance_detunings()
    heights = {F: fit_lorentzian(delta, chi.imag, centres[F], 3.0).height for F in (4, 3, 2)}
    oracle = {F: _zeeman_sum(F) for F in (4, 3, 2)}
    assert oracle[4] / sum(oracle.values()) == pytest.approx(9.0 / 14.0, rel=1e-9)
    for F in (3, 2):
        assert heights[F] / heights[4] == pytest.approx(oracle[F] / oracle[4], rel=1e-2)


def test_spectrum_scenario_reports_oracle_ratios(table):
    config = parse_config(overrides=['scenario="spectrum"', "control.rabi=0.0"])
    result = SpectrumScenario(config, table).execute()
    assert result.success
    resonances = {entry["F"]: entry for entry in result.summary["resonances"]}
    assert resonances[4]["height"] == pytest.approx(9.0 / 14.0, rel=1e-2)
    for F in (3, 2):
        entry = resonances[F]
        assert entry["height_ratio"] == pytest.approx(_zeeman_sum(F) / _zeeman_sum(4), rel=1e-2)
        assert entry["fwhm"] == pytest.approx(1.0, rel=0.02)


def test_autler_townes_feature_is_narrow_and_near_zero(table, control_on):
    position, width = narrow_resonance(control_on, table)
    delta = np.linspace(position - 0.3, position + 0.3, 6001)
    spectrum = susceptibility_spectrum(delta, control_on, table)
    feature = (spectrum["chi_perp"] - spectrum["chi0"]).imag
    fit = fit_lorentzian(delta, feature, position, 10.0 * width, width_guess=width)
    assert abs(fit.centre) < 0.5
    assert fit.centre == pytest.approx(position, abs=5e-3)
    assert fit.fwhm < 0.1
    assert fit.fwhm == pytest.approx(width, rel=0.2)
    scale = at_width_scale(control_on, table)
    assert scale / 3.0 < fit.fwhm < 3.0 * scale
