import numpy as np
import pytest

from nmr import Dictionary, SolverConfig, thin_svd
from nmr.harness import (ImageFormatError, LabelledSet, OcclusionSpec, load_image,
                         load_manifest, occlude, ridge_baseline_classify,
                         run_occlusion_sweep, save_image, synth_classification_family,
                         synth_lowrank_problem)
from nmr.harness import io
from nmr.harness.occlusion import make_rng
from nmr.harness.sweep import occlusion_seed

pytestmark = pytest.mark.filterwarnings("ignore::sklearn.exceptions.ConvergenceWarning")


class TestImageIO:
    def test_pgm_round_trip(self, tmp_path, rng):
        M = rng.integers(0, 256, size=(5, 7)).astype(float)
        save_image(M, tmp_path / "a.pgm")
        np.testing.assert_array_equal(load_image(tmp_path / "a.pgm"), M)

    def test_pgm_clamps_and_rounds(self, tmp_path):
        save_image(np.array([[-3.0, 12.6, 300.0]]), tmp_path / "c.pgm")
        np.testing.assert_array_equal(load_image(tmp_path / "c.pgm"), [[0, 13, 255]])

    def test_pgm_header_with_comment(self, tmp_path):
        path = tmp_path / "h.pgm"
        path.write_bytes(b"P5\n# made by hand\n2 1\n255\n" + bytes([7, 9]))
        np.testing.assert_array_equal(load_image(path), [[7, 9]])

    @pytest.mark.parametrize("data", [b"P2\n1 1\n255\n0", b"P5\n2 2\n255\n\x00",
                                      b"P5\n1 1\n65535\n\x00\x00", b"P5\nxx"])
    def test_pgm_malformed(self, tmp_path, data):
        path = tmp_path / "bad.pgm"
        path.write_bytes(data)
        with pytest.raises(ImageFormatError):
            load_image(path)

    def test_csv_exact_round_trip(self, tmp_path, rng):
        M = rng.standard_normal((4, 3)) * 1e3
        save_image(M, tmp_path / "m.csv")
        np.testing.assert_array_equal(load_image(tmp_path / "m.csv"), M)

    @pytest.mark.parametrize("text", ["1,2\n3\n", "1,a\n", "", "1,nan\n"])
    def test_csv_malformed(self, tmp_path, text):
        path = tmp_path / "bad.csv"
        path.write_text(text)
        with pytest.raises(ImageFormatError):
            load_image(path)

    def test_unknown_suffix(self, tmp_path):
        with pytest.raises(ImageFormatError):
            save_image(np.zeros((2, 2)), tmp_path / "x.png")

    def test_missing_file(self, tmp_path):
        with pytest.raises(OSError):
            load_image(tmp_path / "nope.pgm")


class TestManifest:
    def write_images(self, root, rng, shapes=((4, 4),) * 3):
        entries = []
        for i, shape in enumerate(shapes):
            name = f"img{i}.pgm"
            save_image(rng.integers(0, 256, size=shape).astype(float), root / name)
            entries.append((name, "ab"[i % 2]))
        return entries

    def test_round_trip(self, tmp_path, rng):
        entries = self.write_images(tmp_path, rng)
        io.write_manifest(entries, tmp_path / "m.csv")
        man = load_manifest(tmp_path / "m.csv")
        assert man.labels == ["a", "b", "a"]
        D = man.to_dictionary()
        assert D.n_atoms == 3 and D.image_shape == (4, 4)

    def test_comments_and_no_header(self, tmp_path, rng):
        self.write_images(tmp_path, rng)
        (tmp_path / "m.csv").write_text("# train\nimg0.pgm,x\n\nimg1.pgm,y\n")
        assert load_manifest(tmp_path / "m.csv").labels == ["x", "y"]

    def test_missing_image(self, tmp_path):
        (tmp_path / "m.csv").write_text("path,label\nghost.pgm,a\n")
        with pytest.raises(ImageFormatError, match="ghost.pgm"):
            load_manifest(tmp_path / "m.csv")

    def test_bad_row(self, tmp_path):
        (tmp_path / "m.csv").write_text("a.pgm\n")
        with pytest.raises(ImageFormatError):
            load_manifest(tmp_path / "m.csv")

    def test_mixed_shapes(self, tmp_path, rng):
        entries = self.write_images(tmp_path, rng, [(4, 4), (4, 5)])
        io.write_manifest(entries, tmp_path / "m.csv")
        with pytest.raises(ImageFormatError, match="differs"):
            load_manifest(tmp_path / "m.csv").load_images()


def test_result_writers(tmp_path):
    io.write_coefficients([0.1, -2.0], tmp_path / "x.txt")
    np.testing.assert_array_equal(io.read_coefficients(tmp_path / "x.txt"), [0.1, -2.0])
    io.write_sweep([(0.3, "black", 0, "nmr", 0.5)], tmp_path / "s.csv")
    assert (tmp_path / "s.csv").read_text() == (
        "level,kind,seed,method,recognition_rate\n0.3,black,0,nmr,0.5\n")
    assert io.fmt(True) == "true" and io.fmt(np.float64(1 / 3)) == repr(1 / 3)


class TestOcclusion:
    def test_block_side(self):
        assert OcclusionSpec(0.25).block_side((32, 32)) == 16
        assert OcclusionSpec(1.0).block_side((8, 4)) == 4
        assert OcclusionSpec(0.0).block_side((8, 8)) == 0

    def test_black_block(self):
        M = np.full((10, 10), 200.0)
        out, mask = occlude(M, OcclusionSpec(0.36, "black", seed=3))
        assert mask.sum() == 36
        assert np.all(out[mask] == 0) and np.all(out[~mask] == 200)
        rows, cols = np.nonzero(mask)
        assert rows.max() - rows.min() == 5 and cols.max() - cols.min() == 5
        assert np.all(M == 200.0)

    def test_random_block_values(self):
        out, mask = occlude(np.zeros((20, 20)), OcclusionSpec(0.5, "random", seed=1))
        vals = out[mask]
        assert np.all(vals == np.round(vals)) and vals.min() >= 0 and vals.max() <= 255
        assert np.unique(vals).size > 10

    def test_texture_block(self):
        tex = np.arange(100.0).reshape(10, 10)
        out, mask = occlude(np.full((8, 8), -1.0), OcclusionSpec(0.25, "texture", 2, tex))
        patch = out[mask].reshape(4, 4)
        i, j = np.argwhere(tex == patch[0, 0])[0]
        np.testing.assert_array_equal(patch, tex[i:i + 4, j:j + 4])

    def test_texture_errors(self):
        with pytest.raises(ValueError):
            OcclusionSpec(0.3, "texture")
        with pytest.raises(ValueError):
            occlude(np.zeros((10, 10)), OcclusionSpec(0.5, "texture", 0, np.zeros((2, 2))))

    @pytest.mark.parametrize("level", [-0.1, 1.5])
    def test_bad_level(self, level):
        with pytest.raises(ValueError):
            OcclusionSpec(level)

    def test_seeded(self):
        a = occlude(np.zeros((16, 16)), OcclusionSpec(0.3, "random", seed=[1, 2]))
        b = occlude(np.zeros((16, 16)), OcclusionSpec(0.3, "random", seed=[1, 2]))
        np.testing.assert_array_equal(a[0], b[0])

    def test_rng_is_philox(self):
        assert isinstance(make_rng(0).bit_generator, np.random.Philox)

    def test_occlusion_seed_distinct(self):
        seeds = {tuple(occlusion_seed(s, lv, k, i)) for s in range(2) for lv in (0.1, 0.2)
                 for k in ("black", "random") for i in range(3)}
        assert len(seeds) == 24


class TestSynthetic:
    def test_problem_structure(self):
        prob = synth_lowrank_problem(12, 10, 7, 3, 2, seed=5)
        D = prob.dictionary
        assert D.n_atoms == 7 and D.image_shape == (12, 10)
        assert list(D.labels) == [0, 0, 0, 1, 1, 2, 2]
        assert np.all(D.regressors >= 0) and np.all(D.regressors <= 255)
        support = np.asarray(D.labels) == prob.true_label
        assert prob.true_x.sum() == pytest.approx(1.0)
        assert np.all(prob.true_x[~support] == 0) and np.all(prob.true_x[support] > 0)
        np.testing.assert_array_equal(prob.B_corrupted, prob.B_clean)

    def test_clean_class_sample_is_low_rank(self):
        prob = synth_lowrank_problem(16, 16, 2, 1, 1, seed=0, perturbation=0.0)
        assert thin_svd(prob.dictionary.regressors[0]).rank == 1

    def test_occluded(self):
        prob = synth_lowrank_problem(20, 20, 4, 2, 2, OcclusionSpec(0.25, "black"), seed=1)
        assert prob.occlusion_mask.sum() == 100
        assert np.all(prob.B_corrupted[prob.occlusion_mask] == 0)

    def test_deterministic(self):
        a = synth_classification_family(16, 16, 2, 2, 2, seed=[4, 2])
        b = synth_classification_family(16, 16, 2, 2, 2, seed=[4, 2])
        np.testing.assert_array_equal(a.dictionary.regressors, b.dictionary.regressors)
        np.testing.assert_array_equal(np.stack(a.test_images), np.stack(b.test_images))

    def test_family_shapes(self):
        fam = synth_classification_family(16, 12, 3, 2, 4, seed=0)
        assert fam.dictionary.n_atoms == 6 and len(fam.test_images) == 12
        assert fam.test_labels == [0] * 4 + [1] * 4 + [2] * 4

    @pytest.mark.parametrize("kwargs", [{"p": 4}, {"rank_r": 0}, {"n_classes": 0}])
    def test_bad_params(self, kwargs):
        base = dict(p=16, q=16, n=4, n_classes=2, rank_r=2)
        with pytest.raises(ValueError):
            synth_lowrank_problem(**{**base, **kwargs})


class TestBaseline:
    def test_ridge_coefficients(self, rng):
        A = rng.standard_normal((4, 5, 3))
        D = Dictionary(A, [0, 0, 1, 1])
        B = rng.standard_normal((5, 3))
        rep = ridge_baseline_classify(D, B, lam=0.5)
        H = D.H
        want = np.linalg.solve(H.T @ H + 0.5 * np.eye(4), H.T @ B.flatten(order="F"))
        np.testing.assert_allclose(rep.coefficients, want, rtol=1e-9)
        for lab in (0, 1):
            other = np.where(np.asarray(D.labels) != lab, want, 0)
            assert rep.class_errors[lab] == pytest.approx(
                np.linalg.norm(np.einsum("j,jpq->pq", other, A)))
        assert rep.converged and rep.solver is None

    def test_classifies_clean(self):
        fam = synth_classification_family(16, 16, 3, 4, 2, seed=2)
        for B, y in zip(fam.test_images, fam.test_labels):
            assert ridge_baseline_classify(fam.dictionary, B).predicted_label == y


class TestSweep:
    def family(self, seed):
        return synth_classification_family(12, 12, 2, 3, 2, seed=seed)

    def test_row_order_and_count(self):
        rows = run_occlusion_sweep(self.family, [0.0, 0.3], ["black", "random"], [0, 1],
                                   SolverConfig(max_iters=30), scale_mu=True)
        assert len(rows) == 2 * 2 * 2 * 2
        keys = [(r.level, r.kind, r.seed, r.method) for r in rows]
        assert keys == sorted(keys, key=lambda k: (k[0], ["black", "random"].index(k[1]),
                                                   k[2], k[3]))
        assert all(0 <= r.recognition_rate <= 1 for r in rows)

    def test_level_zero_clean(self):
        rows = run_occlusion_sweep(self.family, [0.0], ["black"], [3],
                                   SolverConfig(max_iters=100), scale_mu=True)
        assert [r.recognition_rate for r in rows] == [1.0, 1.0]

    def test_fixed_set_and_residuals(self, tmp_path):
        fam = self.family(0)
        fixed = LabelledSet(fam.dictionary, fam.test_images, fam.test_labels)
        rows = run_occlusion_sweep(fixed, [0.2], ["black"], [0, 1],
                                   SolverConfig(max_iters=20), methods=("nmr",),
                                   residual_dir=tmp_path)
        assert [r.method for r in rows] == ["nmr", "nmr"]
        assert len(list(tmp_path.glob("residual_*.csv"))) == 2

    def test_unknown_method(self):
        with pytest.raises(ValueError):
            run_occlusion_sweep(self.family, [0.1], ["black"], [0], methods=("lasso",))


def test_euclidean_and_nuclear_scoring_agree_on_clean_data():
    from nmr.classifier import classify
    for seed in range(20):
        fam = synth_classification_family(16, 16, 3, 4, 1, seed=seed)
        D = fam.dictionary
        cfg = SolverConfig(mu=1 / (4 * np.mean(D.regressors)), max_iters=100)
        for B, y in zip(fam.test_images, fam.test_labels):
            nmr_label = classify(D, B, cfg).predicted_label
            assert nmr_label == ridge_baseline_classify(D, B).predicted_label == y


def test_rates_non_increasing_in_level():
    def family(seed):
        return synth_classification_family(16, 16, 3, 6, 4, seed=seed)

    levels = [0.1, 0.3, 0.5]
    rows = run_occlusion_sweep(family, levels, ["black"], range(10),
                               SolverConfig(max_iters=50), scale_mu=True)
    for method in ("nmr", "ridge"):
        means = [np.mean([r.recognition_rate for r in rows
                          if r.level == lv and r.method == method]) for lv in levels]
        assert all(b <= a + 0.05 for a, b in zip(means, means[1:])), (method, means)
