"""Density-matrix primitives: products, traces, dephasing, entropy, I/O."""

import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from qmchain.linalg import (
    CLOSED_FORM_ATOL,
    IDENTITY,
    SIGMA_Z,
    DensityMatrix,
    as_complex_matrix,
    dephase,
    dephase_matrix,
    density_matrix_from_json_dict,
    kron,
    matrices_close,
    matrix_from_csv,
    matrix_from_json_dict,
    matrix_to_csv,
    matrix_to_json_dict,
    partial_trace,
    partial_trace_matrix,
    purify,
    purity,
    validate,
    von_neumann_entropy,
)
from reference_forms import (
    PHI_GRID,
    ROTATED_DISPLAY_3,
    collapse_three_diagonal,
    max_dev,
    random_density_matrix,
    random_unitary,
    three_stage_diagonal,
    three_stage_rotated,
    two_stage_diagonal,
)

seeds = st.integers(min_value=0, max_value=2**32 - 1)


def kron_by_index_loop(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    """Independent Kronecker product, written out entry by entry."""
    n, m = a.shape[0], b.shape[0]
    out = np.zeros((n * m, n * m), dtype=complex)
    for i in range(n):
        for j in range(n):
            for k in range(m):
                for l in range(m):
                    out[i * m + k, j * m + l] = a[i, j] * b[k, l]
    return out


def partial_trace_by_summation(m: np.ndarray, dims, keep) -> np.ndarray:
    """Independent partial trace via explicit multi-index summation."""
    n = len(dims)
    traced = [i for i in range(n) if i not in keep]
    kept_dim = int(np.prod([dims[i] for i in keep]))
    out = np.zeros((kept_dim, kept_dim), dtype=complex)
    tensor = m.reshape(*dims, *dims)
    for left in np.ndindex(*[dims[i] for i in keep]):
        for right in np.ndindex(*[dims[i] for i in keep]):
            total = 0.0 + 0.0j
            for tr in np.ndindex(*[dims[i] for i in traced]):
                row = [0] * n
                col = [0] * n
                for slot, i in enumerate(keep):
                    row[i] = left[slot]
                    col[i] = right[slot]
                for slot, i in enumerate(traced):
                    row[i] = tr[slot]
                    col[i] = tr[slot]
                total += tensor[tuple(row) + tuple(col)]
            out[
                int(np.ravel_multi_index(left, [dims[i] for i in keep])),
                int(np.ravel_multi_index(right, [dims[i] for i in keep])),
            ] = total
    return out


class TestKron:
    def test_identity_times_identity(self):
        assert np.array_equal(kron(IDENTITY, IDENTITY), np.eye(4, dtype=complex))

    def test_first_marginal_times_mixed_readout(self):
        # the two-stage record factorizes as (first marginal) x (I/2)
        for phi in PHI_GRID:
            first = np.diag([math.cos(phi) ** 2, math.sin(phi) ** 2]).astype(complex)
            product = kron(first, 0.5 * IDENTITY)
            assert max_dev(product, two_stage_diagonal(phi)) <= CLOSED_FORM_ATOL

    def test_matches_index_loop_oracle(self):
        rng = np.random.default_rng(11)
        for da, db in [(2, 2), (2, 3), (3, 3)]:
            a = rng.standard_normal((da, da)) + 1j * rng.standard_normal((da, da))
            b = rng.standard_normal((db, db)) + 1j * rng.standard_normal((db, db))
            assert max_dev(kron(a, b), kron_by_index_loop(a, b)) <= 1e-12

    def test_density_matrix_inputs_concatenate_dims(self):
        a = DensityMatrix(np.diag([0.25, 0.75]))
        b = DensityMatrix(np.eye(4) / 4.0, dims=(2, 2))
        joint = kron(a, b)
        assert isinstance(joint, DensityMatrix)
        assert joint.dims == (2, 2, 2)


class TestPartialTrace:
    def test_two_stage_record_over_second_readout(self):
        for phi in PHI_GRID:
            reduced = partial_trace_matrix(two_stage_diagonal(phi), (2, 2), [0])
            expected = np.diag([math.cos(phi) ** 2, math.sin(phi) ** 2])
            assert max_dev(reduced, expected) <= CLOSED_FORM_ATOL

    def test_product_state_recovers_factor(self):
        rng = np.random.default_rng(5)
        a = random_density_matrix(rng, 2)
        b = random_density_matrix(rng, 3)
        assert max_dev(partial_trace_matrix(np.kron(a, b), (2, 3), [0]), a) <= 1e-12
        assert max_dev(partial_trace_matrix(np.kron(a, b), (2, 3), [1]), b) <= 1e-12

    def test_matches_summation_oracle_on_three_qubits(self):
        rng = np.random.default_rng(17)
        rho = random_density_matrix(rng, 8)
        for keep in ([0], [2], [0, 1], [0, 2], [1, 2]):
            got = partial_trace_matrix(rho, (2, 2, 2), keep)
            want = partial_trace_by_summation(rho, (2, 2, 2), keep)
            assert max_dev(got, want) <= 1e-12

    def test_traces_out_unkept_factor_weight(self):
        # Tr_B(A x B) = A * Tr(B) even when B is not normalized
        rng = np.random.default_rng(23)
        a = random_density_matrix(rng, 2)
        b = 0.7 * random_density_matrix(rng, 2)
        got = partial_trace_matrix(np.kron(a, b), (2, 2), [0])
        assert max_dev(got, 0.7 * a) <= 1e-12

    def test_wrapper_keeps_dims(self):
        rho = DensityMatrix(three_stage_diagonal(0.3), dims=(2, 2, 2))
        reduced = partial_trace(rho, [0, 2])
        assert reduced.dims == (2, 2)
        assert abs(np.trace(reduced.matrix) - 1.0) <= 1e-12

    def test_empty_keep_rejected(self):
        rho = DensityMatrix(np.eye(2) / 2)
        with pytest.raises(ValueError):
            partial_trace(rho, [])


class TestPurity:
    def test_pure_state(self):
        rho = np.zeros((2, 2), dtype=complex)
        rho[0, 0] = 1.0
        assert purity(rho) == 1.0

    def test_three_stage_record_at_zero_angle(self):
        assert abs(purity(three_stage_diagonal(0.0)) - 0.5) <= 1e-12

    def test_collapsed_record_at_quarter_pi(self):
        assert abs(purity(collapse_three_diagonal(math.pi / 4)) - 0.125) <= 1e-12

    def test_rejects_imaginary_residue(self):
        with pytest.raises(ValueError):
            purity(np.array([[0.0, 1.0], [2.0j, 0.0]]))


class TestEntropy:
    def test_uniform_qubit_is_one_bit(self):
        assert abs(von_neumann_entropy(np.eye(2) / 2) - 1.0) <= 1e-12

    def test_pure_state_is_zero(self):
        psi = np.array([1.0, 1.0j]) / math.sqrt(2)
        assert abs(von_neumann_entropy(np.outer(psi, psi.conj()))) <= 1e-12

    def test_two_stage_record_at_quarter_pi_is_two_bits(self):
        assert abs(von_neumann_entropy(two_stage_diagonal(math.pi / 4)) - 2.0) <= 1e-12

    def test_tiny_negative_eigenvalues_are_clamped(self):
        rho = np.diag([1.0, 5e-13, -5e-13]).astype(complex)
        assert von_neumann_entropy(rho) == 0.0

    @settings(max_examples=25, deadline=None)
    @given(seeds)
    def test_unitary_invariance(self, seed):
        rng = np.random.default_rng(seed)
        rho = random_density_matrix(rng, 4)
        u = random_unitary(rng, 4)
        rotated = u @ rho @ u.conj().T
        assert abs(von_neumann_entropy(rotated) - von_neumann_entropy(rho)) <= 1e-9


class TestDephase:
    def test_diagonal_matrix_is_fixed_point(self):
        rho = collapse_three_diagonal(0.6)
        assert np.array_equal(dephase_matrix(rho, (2, 2, 2), 1), rho)

    def test_second_readout_dephasing_halves_coherent_weight(self):
        inverse = np.argsort(ROTATED_DISPLAY_3)
        for phi in PHI_GRID:
            c2 = math.cos(2 * phi) ** 2
            display = three_stage_rotated(phi)
            engine_order = display[np.ix_(inverse, inverse)]
            assert abs(purity(engine_order) - 0.25 * (1 + c2)) <= 1e-12
            deph = dephase_matrix(engine_order, (2, 2, 2), 1)
            assert abs(purity(deph) - 0.125 * (1 + c2)) <= 1e-12

    @settings(max_examples=25, deadline=None)
    @given(seeds)
    def test_matches_kraus_pair_oracle(self, seed):
        rng = np.random.default_rng(seed)
        rho = random_density_matrix(rng, 8)
        for sub in range(3):
            ops = [np.eye(2)] * 3
            ops[sub] = SIGMA_Z
            z = np.kron(np.kron(ops[0], ops[1]), ops[2])
            oracle = 0.5 * (rho + z @ rho @ z)
            assert max_dev(dephase_matrix(rho, (2, 2, 2), sub), oracle) <= 1e-12

    @settings(max_examples=25, deadline=None)
    @given(seeds)
    def test_never_increases_purity(self, seed):
        rng = np.random.default_rng(seed)
        rho = DensityMatrix(random_density_matrix(rng, 4), dims=(2, 2))
        for sub in range(2):
            assert purity(dephase(rho, sub)) <= purity(rho) + 1e-12


class TestValidate:
    def test_uniform_qubit_passes(self):
        report = validate(np.eye(2) / 2)
        assert report.ok
        assert report.problems == ()

    def test_trace_violation_reported(self):
        report = validate(np.diag([0.6, 0.6]).astype(complex))
        assert not report.ok
        assert report.trace_deviation == pytest.approx(0.2)
        assert any("trace" in p for p in report.problems)

    def test_three_stage_record_passes(self):
        assert validate(three_stage_diagonal(math.pi / 8)).ok

    def test_negative_eigenvalue_reported(self):
        report = validate(np.diag([1.2, -0.2]).astype(complex))
        assert not report.ok
        assert report.min_eigenvalue == pytest.approx(-0.2)

    def test_non_square_input(self):
        report = validate(np.ones((2, 3)))
        assert not report.ok
        assert math.isnan(report.trace_deviation)


class TestDensityMatrix:
    def test_rejects_non_hermitian(self):
        with pytest.raises(ValueError):
            DensityMatrix(np.array([[0.5, 0.3], [0.0, 0.5]]))

    def test_rejects_dims_mismatch(self):
        with pytest.raises(ValueError):
            DensityMatrix(np.eye(4) / 4, dims=(2, 3))

    def test_matrix_is_read_only(self):
        rho = DensityMatrix(np.eye(2) / 2)
        with pytest.raises((ValueError, AttributeError)):
            rho.matrix[0, 0] = 0.9

    def test_attributes_frozen(self):
        rho = DensityMatrix(np.eye(2) / 2)
        with pytest.raises(AttributeError):
            rho.dims = (4,)

    def test_default_dims_single_system(self):
        rho = DensityMatrix(np.eye(4) / 4)
        assert rho.dims == (4,)
        assert rho.dim == 4
        assert rho.n_subsystems == 1


class TestPurify:
    def test_reduction_recovers_state(self):
        rng = np.random.default_rng(3)
        rho = DensityMatrix(random_density_matrix(rng, 4), dims=(2, 2))
        psi = purify(rho)
        full = np.outer(psi, psi.conj())
        assert abs(purity(full) - 1.0) <= 1e-10
        reduced = partial_trace_matrix(full, (4, 4), [0])
        assert max_dev(reduced, rho.matrix) <= 1e-10

    def test_mirror_carries_same_spectrum(self):
        rng = np.random.default_rng(4)
        rho = DensityMatrix(random_density_matrix(rng, 2))
        psi = purify(rho)
        full = np.outer(psi, psi.conj())
        mirror = partial_trace_matrix(full, (2, 2), [1])
        assert abs(von_neumann_entropy(mirror) - von_neumann_entropy(rho)) <= 1e-9


class TestSerialization:
    @settings(max_examples=25, deadline=None)
    @given(seeds)
    def test_json_round_trip_is_bit_exact(self, seed):
        rng = np.random.default_rng(seed)
        rho = random_density_matrix(rng, 4)
        doc = matrix_to_json_dict(rho, dims=(2, 2))
        back, dims = matrix_from_json_dict(doc)
        assert dims == (2, 2)
        assert np.array_equal(back, rho)

    @settings(max_examples=25, deadline=None)
    @given(seeds)
    def test_csv_round_trip_is_bit_exact(self, seed):
        rng = np.random.default_rng(seed)
        rho = random_density_matrix(rng, 4)
        text = matrix_to_csv(rho, dims=(2, 2))
        back, dims = matrix_from_csv(text)
        assert dims == (2, 2)
        assert np.array_equal(back, rho)

    def test_csv_header_records_dims(self):
        text = matrix_to_csv(np.eye(4) / 4, dims=(2, 2))
        assert text.splitlines()[0] == "# dims: 2,2"

    def test_density_matrix_from_json(self):
        rho = DensityMatrix(three_stage_diagonal(0.4), dims=(2, 2, 2))
        back = density_matrix_from_json_dict(matrix_to_json_dict(rho.matrix, rho.dims))
        assert back.dims == (2, 2, 2)
        assert np.array_equal(back.matrix, rho.matrix)


class TestHelpers:
    def test_as_complex_matrix_rejects_vectors(self):
        with pytest.raises(ValueError):
            as_complex_matrix(np.ones(4))

    def test_matrices_close_respects_tolerance(self):
        a = np.zeros((2, 2))
        b = np.full((2, 2), 1e-11)
        assert matrices_close(a, b, 1e-10)
        assert not matrices_close(a, b, 1e-12)

    def test_matrices_close_shape_mismatch(self):
        assert not matrices_close(np.eye(2), np.eye(3), 1e-6)

    def test_constants(self):
        assert np.array_equal(IDENTITY, np.eye(2))
        assert np.array_equal(SIGMA_Z, np.diag([1.0, -1.0]))
