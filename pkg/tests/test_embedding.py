import sys
import textwrap

import numpy as np
import pytest

from morphkit.embedding import (
    Adam,
    EmbedConfig,
    embed_image,
    generate_latent_morph,
)
from morphkit.errors import DataError
from morphkit.generators import ExternalCommandGenerator, ToyReshapeGenerator
from morphkit.percept import extract_features, perceptual_loss
from morphkit.raster import Raster


def small_gen():
    return ToyReshapeGenerator(height=16, width=16, channels=1, layers=8, dims=32)


class TestEmbedConfig:
    def test_defaults_valid(self):
        EmbedConfig().validate()

    @pytest.mark.parametrize(
        "kw",
        [
            {"steps": 0},
            {"lr": 0.0},
            {"lr": -1.0},
            {"beta1": 1.0},
            {"beta1": -0.1},
            {"beta2": 1.5},
            {"eps": 0.0},
            {"init_sigma": -1.0},
        ],
    )
    def test_rejects_invalid(self, kw):
        with pytest.raises(DataError):
            EmbedConfig(**kw).validate()


class TestAdam:
    def test_single_step_hand_computed(self):
        lr, b1, b2, eps = 0.1, 0.5, 0.9, 1e-8
        p = np.array([1.0, -2.0])
        g = np.array([0.5, -0.25])
        opt = Adam(p.shape, lr, b1, b2, eps)
        out = opt.step(p, g)
        m = (1 - b1) * g
        v = (1 - b2) * g * g
        m_hat = m / (1 - b1)
        v_hat = v / (1 - b2)
        want = p - lr * m_hat / (np.sqrt(v_hat) + eps)
        assert np.allclose(out, want, atol=1e-15)
        # first-step bias correction makes the step lr * g/|g| regardless of g scale
        assert np.allclose(out, p - lr * np.sign(g), atol=1e-7)

    def test_two_steps_match_manual_recurrence(self):
        lr, b1, b2, eps = 0.01, 0.5, 0.999, 1e-8
        rng = np.random.default_rng(0)
        p = rng.standard_normal(5)
        g1, g2 = rng.standard_normal(5), rng.standard_normal(5)
        opt = Adam(p.shape, lr, b1, b2, eps)
        p1 = opt.step(p, g1)
        p2 = opt.step(p1, g2)
        m = (1 - b1) * g1
        v = (1 - b2) * g1 * g1
        q1 = p - lr * (m / (1 - b1)) / (np.sqrt(v / (1 - b2)) + eps)
        m = b1 * m + (1 - b1) * g2
        v = b2 * v + (1 - b2) * g2 * g2
        q2 = q1 - lr * (m / (1 - b1**2)) / (np.sqrt(v / (1 - b2**2)) + eps)
        assert np.allclose(p1, q1, atol=1e-15)
        assert np.allclose(p2, q2, atol=1e-15)

    def test_zero_gradient_keeps_params(self):
        opt = Adam((3,), 0.1, 0.5, 0.999, 1e-8)
        p = np.array([1.0, 2.0, 3.0])
        assert np.allclose(opt.step(p, np.zeros(3)), p, atol=1e-15)


class TestEmbed:
    def test_toy_converges_below_tolerance(self):
        rng = np.random.default_rng(1)
        gen = small_gen()
        target = Raster(rng.uniform(0.2, 0.8, size=(16, 16, 1)))
        res = embed_image(target, gen, seed=0)
        assert res.loss < 1e-6
        assert res.step <= 500
        assert len(res.history) == 501

    def test_best_iterate_never_worse_than_init(self):
        rng = np.random.default_rng(2)
        gen = small_gen()
        target = Raster(rng.uniform(0, 1, size=(16, 16, 1)))
        res = embed_image(target, gen, config=EmbedConfig(steps=3), seed=5)
        assert res.loss <= res.initial_loss
        assert res.loss == res.history.min()
        assert res.history[res.step] == res.loss

    def test_deterministic_for_seed(self):
        rng = np.random.default_rng(3)
        gen = small_gen()
        target = Raster(rng.uniform(0, 1, size=(16, 16, 1)))
        cfg = EmbedConfig(steps=50)
        r1 = embed_image(target, gen, config=cfg, seed=9)
        r2 = embed_image(target, gen, config=cfg, seed=9)
        assert np.array_equal(r1.latent, r2.latent)
        assert np.array_equal(r1.history, r2.history)
        r3 = embed_image(target, gen, config=cfg, seed=10)
        assert not np.array_equal(r1.latent, r3.latent)

    def test_chained_gradient_matches_finite_differences(self):
        rng = np.random.default_rng(4)
        gen = ToyReshapeGenerator(height=8, width=8, channels=1, layers=4, dims=16)
        target = Raster(rng.uniform(0, 1, size=(8, 8, 1)))
        from morphkit.percept import default_feature_stack

        stack = default_feature_stack()
        feats = extract_features(target.data, stack)
        z = rng.standard_normal((4, 16))

        def loss_at(zz):
            val, _ = perceptual_loss(gen.forward(zz), feats, stack)
            return val

        _, grad_img = perceptual_loss(gen.forward(z), feats, stack)
        grad = gen.backward(z, grad_img)
        h = 1e-6
        fd = np.zeros_like(z)
        for idx in np.ndindex(z.shape):
            zp, zm = z.copy(), z.copy()
            zp[idx] += h
            zm[idx] -= h
            fd[idx] = (loss_at(zp) - loss_at(zm)) / (2 * h)
        rel = np.linalg.norm(fd - grad) / np.linalg.norm(fd)
        assert rel < 1e-3

    def test_requires_differentiable_generator(self):
        gen = ExternalCommandGenerator("true {latent} {output}", 2, 4)
        with pytest.raises(DataError):
            embed_image(Raster(np.zeros((4, 4, 1))), gen)

    def test_shape_mismatch_rejected(self):
        gen = small_gen()
        with pytest.raises(DataError):
            embed_image(Raster(np.zeros((8, 8, 1))), gen)


class TestLatentMorph:
    def test_morph_of_identical_images(self):
        rng = np.random.default_rng(6)
        gen = small_gen()
        img = Raster(rng.uniform(0.2, 0.8, size=(16, 16, 1)))
        res = generate_latent_morph(img, img, gen, seed=0)
        # both embeddings converge to the same optimum, so the combined
        # latent synthesizes the target again
        assert np.abs(res.image.data - img.data).max() < 1e-3
        assert res.metadata()["weights"] == [0.5, 0.5]

    def test_midpoint_latent(self):
        rng = np.random.default_rng(7)
        gen = small_gen()
        a = Raster(rng.uniform(0.2, 0.8, size=(16, 16, 1)))
        b = Raster(rng.uniform(0.2, 0.8, size=(16, 16, 1)))
        res = generate_latent_morph(a, b, gen, seed=1)
        mid = 0.5 * (res.embed_a.latent + res.embed_b.latent)
        assert np.allclose(res.latent, mid, atol=1e-12)

    def test_asymmetric_weights(self):
        rng = np.random.default_rng(8)
        gen = small_gen()
        a = Raster(rng.uniform(0.2, 0.8, size=(16, 16, 1)))
        b = Raster(rng.uniform(0.2, 0.8, size=(16, 16, 1)))
        res = generate_latent_morph(a, b, gen, w1=1.0, w2=0.0, seed=2)
        assert np.array_equal(res.latent, res.embed_a.latent)


class TestExternalGenerator:
    def make_script(self, tmp_path):
        script = tmp_path / "fakegen.py"
        script.write_text(textwrap.dedent("""
            import json, sys
            import numpy as np
            from PIL import Image

            latent_path, out_path = sys.argv[1], sys.argv[2]
            meta = json.load(open(latent_path + ".json"))
            z = np.frombuffer(open(latent_path, "rb").read(), "<f4")
            z = z.reshape(meta["layers"], meta["dims"])
            # gray level from the latent mean, deterministic
            val = int(np.clip(z.mean() * 255, 0, 255))
            img = np.full((8, 8), val, dtype=np.uint8)
            Image.fromarray(img, mode="L").save(out_path)
        """))
        return script

    def test_round_trip(self, tmp_path):
        script = self.make_script(tmp_path)
        gen = ExternalCommandGenerator(
            f"{sys.executable} {script} {{latent}} {{output}}", 2, 4, "fake"
        )
        z = np.full((2, 4), 0.5)
        img = gen.synthesize(z)
        assert img.shape == (8, 8, 1)
        # the script truncates 0.5 * 255 to 127
        assert np.all(img.to_bytes() == 127)

    def test_failing_command(self):
        gen = ExternalCommandGenerator(
            f"{sys.executable} -c import_sys_fail {{latent}} {{output}}", 2, 4
        )
        with pytest.raises(DataError):
            gen.synthesize(np.zeros((2, 4)))

    def test_no_output_produced(self):
        gen = ExternalCommandGenerator(
            f"{sys.executable} -c pass {{latent}} {{output}}", 2, 4
        )
        with pytest.raises(DataError):
            gen.synthesize(np.zeros((2, 4)))

    def test_template_requires_placeholders(self):
        with pytest.raises(DataError):
            ExternalCommandGenerator("gen.sh", 2, 4)

    def test_latent_shape_checked(self):
        gen = ExternalCommandGenerator("x {latent} {output}", 2, 4)
        with pytest.raises(DataError):
            gen.synthesize(np.zeros((3, 4)))
