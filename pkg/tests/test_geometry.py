import math

import numpy as np
import pytest

from darkcavity import (
    HBAR_C_EV_NM,
    CavityConfig,
    ConfigurationError,
    DomainError,
    LatticeSpec,
    mode_frequency,
    molecule_positions,
    polarization_vector,
    position_array,
    wavevector_grid,
)


def make_grid(n_x, n_y=None, n_z=1, a=10.0, l_z=300.0, epsilon=1.0):
    lattice = LatticeSpec(n_x=n_x, n_y=n_y if n_y is not None else n_x, n_z=n_z, a_x=a, a_y=a, a_z=a)
    cavity = CavityConfig.for_lattice(lattice, l_z=l_z, epsilon=epsilon)
    return lattice, cavity


class TestWavevectorGrid:
    def test_three_by_three(self):
        lattice, cavity = make_grid(3)
        modes = wavevector_grid(lattice, cavity)
        assert len(modes) == 18
        assert len({(m.m_x, m.m_y) for m in modes}) == 9
        assert sorted({m.m_x for m in modes}) == [-1, 0, 1]
        # L_x = 20 nm, so k_x = 2*pi*m/20
        expected = {-2 * math.pi / 20.0, 0.0, 2 * math.pi / 20.0}
        assert {m.k_x for m in modes} == expected

    def test_single_site_grid(self):
        lattice, cavity = make_grid(1)
        modes = wavevector_grid(lattice, cavity)
        assert len(modes) == 2
        assert all(m.k_x == 0.0 and m.k_y == 0.0 for m in modes)

    def test_paper_scale_count(self):
        lattice, cavity = make_grid(101)
        modes = wavevector_grid(lattice, cavity)
        assert len(modes) == 2 * 101 * 101

    def test_even_size_rejected(self):
        with pytest.raises(ConfigurationError):
            LatticeSpec(n_x=4, n_y=3)
        with pytest.raises(ConfigurationError):
            LatticeSpec(n_x=3, n_y=10)

    def test_ordering_lexicographic_s_before_p(self):
        lattice, cavity = make_grid(3)
        modes = wavevector_grid(lattice, cavity)
        keys = [(m.m_x, m.m_y, m.polarization) for m in modes]
        pol_rank = {"s": 0, "p": 1}
        ranked = [(mx, my, pol_rank[p]) for mx, my, p in keys]
        assert ranked == sorted(ranked)
        assert keys[0][2] == "s" and keys[1][2] == "p"

    def test_max_wavevector_independent_of_size(self):
        k_max = {}
        for n in (11, 31, 51):
            lattice, cavity = make_grid(n)
            k_max[n] = max(m.k_mag for m in wavevector_grid(lattice, cavity))
        assert k_max[11] == pytest.approx(k_max[31], rel=1e-12)
        assert k_max[31] == pytest.approx(k_max[51], rel=1e-12)
        assert k_max[51] == pytest.approx(math.pi / 10.0 * math.sqrt(2.0), rel=1e-12)

    def test_mode_list_untouched_by_layers(self):
        one, cav1 = make_grid(5, n_z=1)
        five, cav5 = make_grid(5, n_z=5)
        keys1 = [(m.key, m.omega) for m in wavevector_grid(one, cav1)]
        keys5 = [(m.key, m.omega) for m in wavevector_grid(five, cav5)]
        assert keys1 == keys5

    def test_inconsistent_cavity_rejected(self):
        lattice, _ = make_grid(3)
        bad = CavityConfig(l_z=300.0, l_x=55.0, l_y=20.0)
        with pytest.raises(ConfigurationError):
            wavevector_grid(lattice, bad)


class TestModeFrequency:
    def test_lowest_mode_matches_reported_values(self):
        # Reported lowest-mode energies for L_z = 260, 300, 340 nm.
        for l_z, expected in ((260.0, 2.384), (300.0, 2.066), (340.0, 1.823)):
            cavity = CavityConfig(l_z=l_z)
            assert mode_frequency(0.0, cavity) == pytest.approx(expected, abs=5e-3)

    def test_k0_exact_formula(self):
        cavity = CavityConfig(l_z=300.0, epsilon=2.25)
        assert mode_frequency(0.0, cavity) == HBAR_C_EV_NM * math.pi / (1.5 * 300.0)

    def test_strictly_increasing_in_k(self):
        cavity = CavityConfig(l_z=300.0)
        ks = np.linspace(0.0, 0.5, 50)
        omegas = [mode_frequency(k, cavity) for k in ks]
        assert all(b > a for a, b in zip(omegas, omegas[1:]))

    def test_negative_k_rejected(self):
        with pytest.raises(DomainError):
            mode_frequency(-0.1, CavityConfig(l_z=300.0))


class TestPolarizationVector:
    def test_k0_p_at_antinode_is_x_hat(self):
        lattice, cavity = make_grid(3)
        mode = next(
            m for m in wavevector_grid(lattice, cavity)
            if m.m_x == 0 and m.m_y == 0 and m.polarization == "p"
        )
        np.testing.assert_allclose(polarization_vector(mode, 150.0), [1.0, 0.0, 0.0], atol=1e-15)

    def test_s_along_x_at_antinode(self):
        lattice, cavity = make_grid(3)
        mode = next(
            m for m in wavevector_grid(lattice, cavity)
            if m.m_x == 1 and m.m_y == 0 and m.polarization == "s"
        )
        # k_hat = x_hat: e_s = i sin(pi z / L_z) (x_hat x z_hat) = -i y_hat at z = L_z/2
        np.testing.assert_allclose(polarization_vector(mode, 150.0), [0.0, -1j, 0.0], atol=1e-15)

    def test_s_vanishes_at_mirrors(self):
        lattice, cavity = make_grid(3)
        for mode in wavevector_grid(lattice, cavity):
            if mode.polarization != "s":
                continue
            np.testing.assert_allclose(polarization_vector(mode, 0.0), 0.0, atol=1e-15)
            np.testing.assert_allclose(polarization_vector(mode, 300.0), 0.0, atol=1e-14)

    def test_outside_cavity_rejected(self):
        lattice, cavity = make_grid(3)
        mode = wavevector_grid(lattice, cavity)[0]
        with pytest.raises(DomainError):
            polarization_vector(mode, -1.0)
        with pytest.raises(DomainError):
            polarization_vector(mode, 301.0)

    def test_z_average_is_one_half(self):
        # <|e|^2>_z = 1/2 for both polarizations, any k.
        lattice, cavity = make_grid(5)
        z_grid = np.linspace(0.0, 300.0, 4001)
        for mode in wavevector_grid(lattice, cavity)[::7]:
            sq = [np.sum(np.abs(polarization_vector(mode, z)) ** 2) for z in z_grid]
            assert np.mean(sq) == pytest.approx(0.5, abs=1e-3)

    def test_magnitude_bound(self):
        lattice, cavity = make_grid(5)
        z_grid = np.linspace(0.0, 300.0, 101)
        for mode in wavevector_grid(lattice, cavity):
            bound = max(1.0, mode.omega0 / mode.omega * max(1.0, mode.k_mag * mode.l_z / math.pi))
            for z in z_grid:
                assert np.linalg.norm(polarization_vector(mode, z)) <= bound + 1e-12


class TestMoleculePositions:
    def test_x_coordinates_centred(self):
        lattice, cavity = make_grid(3)
        xs = sorted({s.position[0] for s in molecule_positions(lattice, cavity)})
        assert xs == pytest.approx([-10.0, 0.0, 10.0])

    def test_single_layer_at_antinode(self):
        lattice, cavity = make_grid(3, n_z=1)
        assert all(s.position[2] == 150.0 for s in molecule_positions(lattice, cavity))

    def test_two_layers_straddle_antinode(self):
        lattice, cavity = make_grid(3, n_z=2)
        zs = sorted({s.position[2] for s in molecule_positions(lattice, cavity)})
        assert zs == pytest.approx([145.0, 155.0])

    def test_position_means(self):
        lattice, cavity = make_grid(5, n_z=3)
        pos = position_array(molecule_positions(lattice, cavity))
        assert abs(pos[:, 0].mean()) < 1e-9
        assert abs(pos[:, 1].mean()) < 1e-9
        assert abs(pos[:, 2].mean() - 150.0) < 1e-9

    def test_site_count_and_order(self):
        lattice, cavity = make_grid(3, n_z=2)
        sites = molecule_positions(lattice, cavity)
        assert len(sites) == 18
        assert [s.index for s in sites] == list(range(18))
        # (n_x, n_y, n_z) lexicographic: z varies fastest, then y, then x
        assert sites[0].position[2] == 145.0 and sites[1].position[2] == 155.0
        assert sites[0].position[1] == sites[1].position[1]
        assert sites[2].position[1] > sites[0].position[1]
