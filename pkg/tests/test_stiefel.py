import math

import numpy as np
import pytest

from stiefelqg import (
    BaseMismatch,
    DimensionError,
    NotOrthonormal,
    ParseError,
    TangentVector,
    canonical_inner,
    canonical_inner_ambient,
    canonical_norm,
    canonical_norm_ambient,
    make_point,
    project_tangent,
    random_point,
    random_tangent,
    read_matrix_file,
    stiefel_exp,
    write_matrix_file,
)
from stiefelqg.oracle import full_geodesic_eval, tangent_completion_form
from stiefelqg.stiefel import gaussian_matrix, rng_from_seed

from conftest import fro, random_skew


class TestMakePoint:
    def test_identity_columns(self):
        P = make_point(np.eye(6)[:, :2])
        assert P.n == 6 and P.p == 2

    def test_scaled_frame_rejected(self):
        with pytest.raises(NotOrthonormal):
            make_point(2.0 * np.eye(4)[:, :2])

    def test_qr_of_gaussian(self):
        Q = np.linalg.qr(gaussian_matrix(20, 5, rng_from_seed(1)))[0]
        assert make_point(Q).p == 5

    def test_frame_is_immutable(self):
        P = make_point(np.eye(4)[:, :2])
        with pytest.raises(ValueError):
            P.U[0, 0] = 2.0

    def test_env_override_loosens_validation(self, monkeypatch):
        U = random_point(12, 3, 5).U + 1e-8 * gaussian_matrix(12, 3, rng_from_seed(6))
        with pytest.raises(NotOrthonormal):
            make_point(U)
        monkeypatch.setenv("QG_TOL", "1e-5")
        assert make_point(U).p == 3


class TestProjectTangent:
    def test_point_itself_projects_to_zero(self):
        U = random_point(10, 3, 2)
        assert np.linalg.norm(project_tangent(U, U.U).ambient()) <= 1e-12

    def test_tangent_input_is_fixed_point(self):
        U = random_point(12, 4, 3)
        delta = random_tangent(U, 1.0, 4)
        out = project_tangent(U, delta.ambient())
        assert fro(out.ambient(), delta.ambient()) <= 1e-12

    @pytest.mark.parametrize("seed", range(5))
    def test_output_is_tangent(self, seed):
        U = random_point(14, 4, seed)
        M = gaussian_matrix(14, 4, rng_from_seed(100 + seed))
        D = project_tangent(U, M).ambient()
        skew_residual = U.U.T @ D + D.T @ U.U
        assert np.linalg.norm(skew_residual) <= 1e-12 * max(1.0, np.linalg.norm(D))

    @pytest.mark.parametrize("seed", range(5))
    def test_idempotent_and_self_adjoint(self, seed):
        U = random_point(10, 3, seed)
        rng = rng_from_seed(200 + seed)
        M = gaussian_matrix(10, 3, rng)
        N = gaussian_matrix(10, 3, rng)
        PM = project_tangent(U, M).ambient()
        PN = project_tangent(U, N).ambient()
        assert fro(project_tangent(U, PM).ambient(), PM) <= 1e-12
        assert abs(np.sum(PM * N) - np.sum(M * PN)) <= 1e-12 * max(
            1.0, np.linalg.norm(M) * np.linalg.norm(N)
        )


class TestCanonicalInner:
    def test_rotation_block_only(self):
        U = make_point(np.eye(6)[:, :2])
        A = np.array([[0.0, -1.0], [1.0, 0.0]])
        Q = np.eye(6)[:, 2:4]
        v = TangentVector(U, A, np.zeros((2, 2)), Q)
        assert abs(canonical_inner(U, v, v) - 1.0) <= 1e-15

    def test_normal_block_only(self):
        U = make_point(np.eye(6)[:, :2])
        Q = np.eye(6)[:, 2:4]
        v = TangentVector(U, np.zeros((2, 2)), np.eye(2), Q)
        assert abs(canonical_inner(U, v, v) - 2.0) <= 1e-15

    def test_base_mismatch_rejected(self):
        U = random_point(10, 3, 1)
        W = random_point(10, 3, 2)
        v = random_tangent(U, 1.0, 3)
        w = random_tangent(W, 1.0, 4)
        with pytest.raises(BaseMismatch):
            canonical_inner(U, v, w)

    def test_coordinate_formula_matches_ambient_trace(self):
        rng = rng_from_seed(31)
        for _ in range(1000):
            n = int(rng.integers(4, 17))
            p = int(rng.integers(1, n // 2 + 1))
            seed = int(rng.integers(0, 2**32))
            U = random_point(n, p, seed)
            v1 = random_tangent(U, 1.0, seed + 1)
            v2 = random_tangent(U, 1.3, seed + 2)
            coord = canonical_inner(U, v1, v2)
            ambient = canonical_inner_ambient(U, v1.ambient(), v2.ambient())
            assert abs(coord - ambient) <= 1e-12 * max(1.0, abs(coord))


class TestStiefelExp:
    def test_zero_time_returns_base(self):
        U = random_point(9, 3, 7)
        delta = random_tangent(U, 1.0, 8)
        assert stiefel_exp(U, delta, 0.0) is U

    def test_rotation_only_direction(self):
        U = random_point(10, 3, 9)
        A = random_skew(3, 10, spectral_norm=0.8)
        delta = TangentVector(U, A, np.zeros((3, 3)), random_tangent(U, 1.0, 11).Q)
        from stiefelqg import matrix_exp

        assert fro(stiefel_exp(U, delta, 1.0), U.U @ matrix_exp(A)) <= 1e-12

    def test_against_full_size_form(self):
        U = random_point(16, 4, 12)
        delta = random_tangent(U, 1.2, 13)
        A, B_full = tangent_completion_form(delta)
        for t in (0.0, 0.4, 1.0):
            assert fro(stiefel_exp(U, delta, t), full_geodesic_eval(U, A, B_full, t)) <= 1e-10

    @pytest.mark.parametrize("norm", [0.5, math.pi, 2.0 * math.pi])
    def test_stays_orthonormal(self, norm):
        U = random_point(14, 5, 21)
        delta = random_tangent(U, norm, 22)
        for t in np.linspace(0.0, 1.0, 7):
            V = stiefel_exp(U, delta, float(t)).U
            assert np.linalg.norm(V.T @ V - np.eye(5)) <= 1e-10

    def test_finite_difference_speed_is_constant(self):
        U = random_point(12, 4, 23)
        delta = random_tangent(U, 1.1, 24)
        h = 1e-5
        speeds = []
        for t in np.linspace(0.05, 0.95, 11):
            plus = stiefel_exp(U, delta, float(t) + h).U
            minus = stiefel_exp(U, delta, float(t) - h).U
            vel = (plus - minus) / (2.0 * h)
            speeds.append(canonical_norm_ambient(stiefel_exp(U, delta, float(t)), vel))
        assert (max(speeds) - min(speeds)) / max(speeds) < 1e-6


class TestRandomGenerators:
    def test_point_determinism(self):
        assert np.array_equal(random_point(15, 4, 42).U, random_point(15, 4, 42).U)

    def test_point_orthonormality(self):
        U = random_point(30, 7, 3).U
        assert np.linalg.norm(U.T @ U - np.eye(7)) <= 1e-12

    def test_square_point_is_valid(self):
        assert random_point(3, 3, 5).p == 3

    def test_zero_norm_tangent(self):
        U = random_point(10, 3, 6)
        delta = random_tangent(U, 0.0, 7)
        assert not delta.A.any() and not delta.B.any()

    def test_tangent_norm_scaling(self):
        U = random_point(10, 3, 8)
        delta = random_tangent(U, math.pi / 2, 9)
        assert abs(canonical_inner(U, delta, delta) - (math.pi / 2) ** 2) <= 1e-12 * 4

    def test_distinct_seeds_give_independent_directions(self):
        U = random_point(10, 3, 10)
        m1 = random_tangent(U, 1.0, 11).ambient()
        m2 = random_tangent(U, 1.0, 12).ambient()
        cosine = np.sum(m1 * m2) / (np.linalg.norm(m1) * np.linalg.norm(m2))
        assert math.acos(min(1.0, abs(cosine))) > 1e-3

    def test_tangent_determinism(self):
        U = random_point(10, 3, 13)
        d1 = random_tangent(U, 1.0, 14)
        d2 = random_tangent(U, 1.0, 14)
        assert np.array_equal(d1.ambient(), d2.ambient())

    def test_narrow_manifold_rejected(self):
        U = random_point(4, 3, 15)
        with pytest.raises(DimensionError):
            random_tangent(U, 1.0, 16)


class TestMatrixFiles:
    def test_round_trip_is_exact(self, tmp_path):
        M = gaussian_matrix(7, 3, rng_from_seed(17))
        path = tmp_path / "m.txt"
        write_matrix_file(path, M)
        assert np.array_equal(read_matrix_file(path), M)

    def test_line_endings_are_lf(self, tmp_path):
        path = tmp_path / "m.txt"
        write_matrix_file(path, np.eye(3))
        assert b"\r" not in path.read_bytes()

    @pytest.mark.parametrize(
        "content",
        [
            "",
            "3\n1,2\n",
            "2 2\n1.0,2.0\n",
            "2 2\n1.0,2.0\n3.0\n",
            "2 2\n1.0,2.0\nx,4.0\n",
            "2 2\n1.0,2.0\n3.0,inf\n",
            "-1 2\n",
        ],
    )
    def test_malformed_files_rejected(self, tmp_path, content):
        path = tmp_path / "bad.txt"
        path.write_text(content)
        with pytest.raises(ParseError):
            read_matrix_file(path)
