import json

import numpy as np
import pytest

from csign import fock
from csign.errors import PhysicsValidationError

from conftest import random_hermitian
from oracles import (cavity_stage_reachable_oracle, enumerate_reachable_oracle,
                     partial_trace_atoms_oracle)


class TestBasisState:
    def test_total_excitation(self):
        s = fock.BasisState(1, 0, 0, 0, fock.E, fock.G)
        assert s.total_excitation == 2
        assert s.photons == 1

    def test_rejects_excitation_overflow(self):
        with pytest.raises(PhysicsValidationError):
            fock.BasisState(2, 0, 1, 0, 0, 0)

    def test_rejects_idle_rail_double(self):
        with pytest.raises(PhysicsValidationError):
            fock.BasisState(0, 2, 0, 0, 0, 0)

    def test_rejects_both_atoms_excited(self):
        with pytest.raises(PhysicsValidationError):
            fock.BasisState(0, 0, 0, 0, 1, 1)

    def test_rejects_negative(self):
        with pytest.raises(PhysicsValidationError):
            fock.BasisState(-1, 0, 0, 0, 0, 0)


class TestEnumeration:
    def test_empty_generators_returns_seeds(self):
        sp = fock.enumerate_states(generators=())
        assert sp.dim == 4
        assert set(sp.states) == set(fock.SEEDS)

    def test_full_closure_dimension_is_23(self, space):
        # independent oracle: direct filtered enumeration of all tuples
        expected = enumerate_reachable_oracle()
        got = {s.as_tuple() for s in space.states}
        assert got == expected
        assert space.dim == 23

    def test_closure_is_idempotent(self, space):
        again = fock.enumerate_states()
        assert again.states == space.states

    def test_states_sorted_lexicographically(self, space):
        assert list(space.states) == sorted(space.states)

    def test_bs_and_leak_closed_on_whole_space(self, space):
        for s in space.states:
            for img in fock._bs_images(s) + fock._leak_images(s):
                assert img in space

    def test_jc_closed_on_cavity_stage(self, space):
        # the exchange only ever acts on amplitudes reachable while the
        # cavities are active; on that subset its images stay inside
        stage = cavity_stage_reachable_oracle()
        for s in space.states:
            if s.as_tuple() in stage:
                for img in fock._jc_images(s):
                    assert img in space

    def test_unknown_generator_rejected(self):
        with pytest.raises(PhysicsValidationError):
            fock.enumerate_states(generators=("bs", "warp"))

    def test_other_excitation_cap_rejected(self):
        with pytest.raises(PhysicsValidationError):
            fock.enumerate_states(max_total_excitation=3)

    def test_json_dump_roundtrip(self, space):
        data = json.loads(space.to_json())
        assert len(data) == space.dim
        assert data == sorted(data)
        assert tuple(data[0]) == space.states[0].as_tuple()


class TestLadderOperators:
    def test_annihilation_amplitudes(self, space):
        a = fock.annihilation_matrix("x1", space)
        one = space.index_of(fock.BasisState(1, 0, 0, 0, 0, 0))
        two = space.index_of(fock.BasisState(2, 0, 0, 0, 0, 0))
        vac = space.index_of(fock.BasisState(0, 0, 0, 0, 0, 0))
        assert a[vac, one] == pytest.approx(1.0)
        assert a[one, two] == pytest.approx(np.sqrt(2.0))

    def test_creation_is_dagger_of_annihilation(self, space):
        for rail in fock.RAILS:
            a = fock.annihilation_matrix(rail, space)
            assert np.array_equal(fock.creation_matrix(rail, space), a.conj().T)

    def test_number_operator_identity(self, space):
        for rail in fock.RAILS:
            a = fock.annihilation_matrix(rail, space)
            n = a.conj().T @ a
            expected = [s.rail_occupation(rail) for s in space.states]
            assert np.allclose(np.diag(n).real, expected, atol=1e-12)
            assert np.allclose(n, np.diag(np.diag(n)), atol=1e-12)

    def test_commutator_on_raisable_subblock(self, space):
        # [a, a+] = 1 wherever adding one photon stays representable
        for rail in fock.RAILS:
            a = fock.annihilation_matrix(rail, space)
            comm = a @ a.conj().T - a.conj().T @ a
            for i, s in enumerate(space.states):
                raised = dict(zip(fock.RAILS, s.occupations))
                raised[rail] += 1
                try:
                    target = fock.BasisState(raised["x1"], raised["x2"],
                                             raised["y1"], raised["y2"], s.a1, s.a2)
                except PhysicsValidationError:
                    continue
                if target in space:
                    assert comm[i, i] == pytest.approx(1.0, abs=1e-12)

    def test_atom_lowering(self, space):
        s_e = fock.BasisState(0, 0, 0, 0, fock.E, fock.G)
        s_g = fock.BasisState(0, 0, 0, 0, fock.G, fock.G)
        sig = fock.atom_lowering_matrix("a1", space)
        assert sig[space.index_of(s_g), space.index_of(s_e)] == pytest.approx(1.0)
        assert np.allclose(sig[:, space.index_of(s_g)], 0.0)

    def test_atom_raising_lowering_projector(self, space):
        for atom in fock.ATOMS:
            sig = fock.atom_lowering_matrix(atom, space)
            proj = sig.conj().T @ sig
            expected = [float(s.atom_level(atom) == fock.E) for s in space.states]
            assert np.allclose(np.diag(proj).real, expected, atol=1e-12)
            assert np.allclose(proj, np.diag(np.diag(proj)), atol=1e-12)

    def test_total_excitation_matrix(self, space):
        n = fock.total_excitation_matrix(space)
        assert np.allclose(np.diag(n).real,
                           [s.total_excitation for s in space.states])


class TestDualRail:
    @pytest.mark.parametrize("qx,qy,expected", [
        (0, 0, (0, 1, 0, 1, 0, 0)),
        (1, 1, (1, 0, 1, 0, 0, 0)),
        (1, 0, (1, 0, 0, 1, 0, 0)),
        (0, 1, (0, 1, 1, 0, 0, 0)),
    ])
    def test_encoding(self, space, qx, qy, expected):
        state = fock.dual_rail_encode(qx, qy, space)
        idx = int(np.argmax(np.abs(state.vector)))
        assert space.states[idx].as_tuple() == expected
        assert state.vector[idx] == pytest.approx(1.0)

    def test_rejects_bad_bits(self, space):
        with pytest.raises(PhysicsValidationError):
            fock.dual_rail_encode(2, 0, space)

    def test_rejects_state_outside_space(self):
        trimmed = fock.StateSpace(tuple(s for s in fock.default_state_space().states
                                        if s not in fock.SEEDS))
        with pytest.raises(PhysicsValidationError):
            fock.dual_rail_encode(0, 0, trimmed)


class TestStateWrappers:
    def test_pure_state_norm_enforced(self, space):
        vec = np.zeros(space.dim)
        vec[0] = 0.5
        with pytest.raises(PhysicsValidationError):
            fock.PureState(space, vec)

    def test_density_matrix_validation(self, space):
        bad = np.zeros((space.dim, space.dim), dtype=complex)
        bad[0, 1] = 1.0
        with pytest.raises(PhysicsValidationError):
            fock.DensityMatrix(space, bad)

    def test_density_matrix_trace_bound(self, space):
        mat = np.zeros((space.dim, space.dim), dtype=complex)
        mat[0, 0] = 1.5
        with pytest.raises(PhysicsValidationError):
            fock.DensityMatrix(space, mat)


class TestPartialTrace:
    def test_product_state_recovers_photonic_factor(self, space):
        # photon on x2 and y2, atoms ground: reduced state is the projector
        vec = np.zeros(space.dim, dtype=complex)
        vec[space.index_of(fock.BasisState(0, 1, 0, 1, 0, 0))] = 1.0
        rho = fock.PureState(space, vec).density_matrix()
        red = fock.partial_trace_atoms(rho)
        k = red.space.index_of((0, 1, 0, 1))
        assert red.matrix[k, k] == pytest.approx(1.0)
        assert red.trace == pytest.approx(1.0, abs=1e-12)

    def test_bell_like_reduction(self, space):
        # (|g,1> + |e,0>)/sqrt(2) in the x1 cavity -> even photon mixture
        vec = np.zeros(space.dim, dtype=complex)
        vec[space.index_of(fock.BasisState(1, 0, 0, 0, 0, 0))] = 1 / np.sqrt(2)
        vec[space.index_of(fock.BasisState(0, 0, 0, 0, 1, 0))] = 1 / np.sqrt(2)
        red = fock.partial_trace_atoms(fock.PureState(space, vec).density_matrix())
        i1 = red.space.index_of((1, 0, 0, 0))
        i0 = red.space.index_of((0, 0, 0, 0))
        assert red.matrix[i1, i1] == pytest.approx(0.5, abs=1e-12)
        assert red.matrix[i0, i0] == pytest.approx(0.5, abs=1e-12)
        assert red.matrix[i1, i0] == pytest.approx(0.0, abs=1e-12)

    def test_matches_bruteforce_on_random_hermitian(self, space, rng):
        tuples = tuple(s.as_tuple() for s in space.states)
        for _ in range(25):
            mat = random_hermitian(rng, space.dim, trace_one=True)
            rho = fock.DensityMatrix(space, mat, check=False)
            red = fock.partial_trace_atoms(rho)
            expected, photon_states = partial_trace_atoms_oracle(mat, tuples)
            assert tuple(photon_states) == red.space.states
            assert np.allclose(red.matrix, expected, atol=1e-12)

    def test_linear_and_trace_preserving(self, space, rng):
        a = random_hermitian(rng, space.dim, trace_one=True)
        b = random_hermitian(rng, space.dim, trace_one=True)
        red_a = fock.partial_trace_atoms(fock.DensityMatrix(space, a, check=False))
        red_b = fock.partial_trace_atoms(fock.DensityMatrix(space, b, check=False))
        mix = fock.DensityMatrix(space, 0.25 * a + 0.75 * b, check=False)
        red_mix = fock.partial_trace_atoms(mix)
        assert np.allclose(red_mix.matrix, 0.25 * red_a.matrix + 0.75 * red_b.matrix,
                           atol=1e-12)
        assert red_mix.trace == pytest.approx(mix.trace, abs=1e-12)


def test_beamsplitter_amplitude_structural_zero():
    assert fock.beamsplitter_amplitude(1, 1, 1) == 0.0
    assert fock.beamsplitter_amplitude(1, 1, 2) == pytest.approx(1 / np.sqrt(2))
    assert fock.beamsplitter_amplitude(1, 1, 0) == pytest.approx(-1 / np.sqrt(2))
