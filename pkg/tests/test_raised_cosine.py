import json

import numpy as np
import pytest

from tidict import DomainError, RaisedCosineKernel


def make_odd():
    return RaisedCosineKernel(
        dim=1,
        lambda0=0.4,
        weights=[0.35, 0.25],
        freqs=[[0.8], [2.1]],
        rank=5,
    )


def make_even_2d():
    return RaisedCosineKernel(
        dim=2,
        lambda0=0.0,
        weights=[0.5, 0.3, 0.2],
        freqs=[[0.7, 0.0], [0.7, 1.1], [0.7, -1.1]],
        rank=6,
    )


class TestConstruction:
    def test_eval_matches_manual_sum(self, rng):
        rc = make_even_2d()
        for _ in range(50):
            d = rng.normal(size=2)
            manual = sum(
                w * np.cos(f @ d) for w, f in zip(rc.weights, rc.freqs)
            )
            assert rc.eval(d) == pytest.approx(manual, abs=1e-14)

    def test_value_at_zero_is_total_weight(self):
        rc = make_odd()
        assert rc.eval(0.0) == pytest.approx(0.4 + 0.35 + 0.25, abs=1e-15)

    def test_sign_canonicalization(self):
        rc = RaisedCosineKernel(
            dim=2,
            lambda0=0.0,
            weights=[0.5, 0.5],
            freqs=[[-0.7, 1.1], [0.0, -2.0]],
            rank=4,
        )
        # first nonzero component of every stored row is positive
        assert np.all(rc.freqs[:, 0] >= 0.0)
        assert rc.freqs[0].tolist() == [0.0, 2.0]
        assert rc.freqs[1].tolist() == [0.7, -1.1]

    def test_terms_sorted_by_frequency(self):
        rc = RaisedCosineKernel(
            dim=1, lambda0=0.1, weights=[0.2, 0.7], freqs=[[2.5], [0.3]], rank=5
        )
        assert rc.freqs.ravel().tolist() == [0.3, 2.5]
        assert rc.weights.tolist() == [0.7, 0.2]

    def test_tiny_weights_pruned_with_warning(self):
        with pytest.warns(UserWarning, match="pruned"):
            rc = RaisedCosineKernel(
                dim=1,
                lambda0=0.0,
                weights=[0.9, 1e-15],
                freqs=[[1.0], [2.0]],
                rank=2,
            )
        assert rc.num_terms == 1

    def test_shape_mismatch_rejected(self):
        with pytest.raises(DomainError):
            RaisedCosineKernel(
                dim=2, lambda0=0.0, weights=[0.5], freqs=[[1.0]], rank=2
            )
        with pytest.raises(DomainError):
            RaisedCosineKernel(
                dim=1, lambda0=0.0, weights=[0.5, 0.5], freqs=[[1.0]], rank=4
            )

    def test_immutable(self):
        rc = make_odd()
        with pytest.raises(ValueError):
            rc.weights[0] = 2.0


class TestFeatureMap:
    def test_dimension_follows_parity(self):
        assert make_odd().feature_dim() == 5
        assert make_even_2d().feature_dim() == 6

    def test_inner_products_reproduce_kernel(self, rng):
        # positive semidefiniteness certificate: finite feature vectors
        # whose inner products equal kernel evaluations
        for rc in (make_odd(), make_even_2d()):
            a = rng.normal(size=(100, rc.dim))
            b = rng.normal(size=(100, rc.dim))
            fa, fb = rc.feature_map(a), rc.feature_map(b)
            assert fa.shape == (100, rc.feature_dim())
            got = np.sum(fa * fb, axis=1)
            assert np.max(np.abs(got - rc.eval(a - b))) < 1e-12

    def test_feature_norm_is_kernel_at_zero(self, rng):
        rc = make_odd()
        theta = rng.normal(size=(30, 1))
        norms = np.sum(rc.feature_map(theta) ** 2, axis=1)
        assert np.max(np.abs(norms - rc.eval(0.0))) < 1e-12

    def test_gram_psd(self, rng):
        rc = make_even_2d()
        pts = rng.uniform(-2, 2, size=(40, 2))
        delta = (pts[:, None, :] - pts[None, :, :]).reshape(-1, 2)
        gram = rc.eval(delta).reshape(40, 40)
        assert np.linalg.eigvalsh(gram)[0] > -1e-10

    def test_negative_weight_has_no_certificate(self):
        rc = RaisedCosineKernel(
            dim=1, lambda0=0.0, weights=[-0.5], freqs=[[1.0]], rank=2
        )
        with pytest.raises(DomainError):
            rc.feature_map(0.0)


class TestValidate:
    def test_valid_kernels_pass(self):
        assert make_odd().validate().ok
        assert make_even_2d().validate().ok

    def test_term_count_mismatch(self):
        rc = RaisedCosineKernel(
            dim=1, lambda0=0.0, weights=[0.5], freqs=[[1.0]], rank=4
        )
        report = rc.validate()
        assert not report.ok
        assert any("floor(rank/2)" in issue for issue in report.issues)

    def test_even_rank_with_constant_term(self):
        rc = RaisedCosineKernel(
            dim=1, lambda0=0.3, weights=[0.7], freqs=[[1.0]], rank=2
        )
        assert not rc.validate().ok

    def test_odd_rank_without_constant_term(self):
        rc = RaisedCosineKernel(
            dim=1, lambda0=0.0, weights=[0.5], freqs=[[1.0]], rank=3
        )
        assert not rc.validate().ok

    def test_negative_weight_flagged(self):
        rc = RaisedCosineKernel(
            dim=1, lambda0=0.0, weights=[0.6, -0.1], freqs=[[1.0], [2.0]], rank=4
        )
        report = rc.validate()
        assert not report.ok
        assert any("nonpositive" in issue for issue in report.issues)

    def test_sign_duplicate_frequencies_flagged(self):
        rc = RaisedCosineKernel(
            dim=2,
            lambda0=0.0,
            weights=[0.5, 0.5],
            freqs=[[0.7, 1.1], [-0.7, -1.1]],
            rank=4,
        )
        report = rc.validate()
        assert not report.ok
        assert any("coincide" in issue for issue in report.issues)


class TestSerialization:
    def test_round_trip_exact(self):
        for rc in (make_odd(), make_even_2d()):
            back = RaisedCosineKernel.from_dict(rc.to_dict())
            assert back.dim == rc.dim
            assert back.rank == rc.rank
            assert back.lambda0 == rc.lambda0
            assert np.array_equal(back.weights, rc.weights)
            assert np.array_equal(back.freqs, rc.freqs)

    def test_wire_format_keys(self):
        data = make_odd().to_dict()
        assert set(data) == {"lambda0", "terms", "rank"}
        assert set(data["terms"][0]) == {"lambda", "w"}

    def test_json_file_round_trip(self, tmp_path):
        rc = make_even_2d()
        path = tmp_path / "kernel.json"
        rc.to_json(path)
        back = RaisedCosineKernel.from_json(path)
        assert np.array_equal(back.freqs, rc.freqs)
        # file is valid standalone JSON with a trailing newline
        text = path.read_text()
        assert text.endswith("\n")
        json.loads(text)

    def test_constant_kernel_needs_explicit_dim(self):
        data = {"lambda0": 1.0, "terms": [], "rank": 1}
        with pytest.raises(DomainError):
            RaisedCosineKernel.from_dict(data)
        rc = RaisedCosineKernel.from_dict(data, dim=3)
        assert rc.dim == 3 and rc.num_terms == 0

    def test_malformed_data_rejected(self):
        with pytest.raises(DomainError):
            RaisedCosineKernel.from_dict({"terms": []})
