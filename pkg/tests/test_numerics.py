"""
Tests pour le noyau numérique.

Ce module vérifie la différentiation en mode inverse de chaque opération par
différences finies, les erreurs de forme et de bande, et le contrôle des
valeurs non finies.
"""

import zlib
import numpy as np
import pytest
from gtt.exceptions import DimensionError, NonFiniteError, TapeError
from gtt.numerics import (
    GradTape,
    Tensor,
    backward,
    check_finite,
    grad_check,
    ops,
    relative_error,
)

N_RANDOM_INPUTS = 5


def _leaf(data):
    return Tensor(np.asarray(data, dtype=np.float64), requires_grad=True, dtype=np.float64)


def _weighted(op_output, weights):
    """Réduit une sortie en scalaire avec des poids fixes."""
    return (op_output * Tensor(weights, dtype=np.float64)).sum()


def _away_from_zero(rng, shape):
    return rng.uniform(0.5, 2.0, size=shape) * rng.choice([-1.0, 1.0], size=shape)


UNARY_CASES = {
    "neg": (lambda x: ops.neg(x), (3, 4)),
    "abs": (lambda x: ops.abs(x), (3, 4)),
    "sum_axis": (lambda x: ops.sum(x, axis=1, keepdims=True), (3, 4)),
    "mean_axis": (lambda x: ops.mean(x, axis=0), (3, 4)),
    "softmax": (lambda x: ops.softmax(x, axis=-1), (2, 5)),
    "gelu": (lambda x: ops.gelu(x), (3, 4)),
    "reshape": (lambda x: ops.reshape(x, (4, 3)), (3, 4)),
    "transpose": (lambda x: ops.transpose(x, (1, 0, 2)), (2, 3, 2)),
    "slice": (lambda x: ops.slice(x, (slice(0, 2), 1)), (3, 4)),
    "slice_step": (lambda x: ops.slice(x, (slice(None), slice(0, 4, 2))), (3, 4)),
}

BINARY_CASES = {
    "add_broadcast": (ops.add, (3, 4), (4,)),
    "sub": (ops.sub, (3, 4), (3, 4)),
    "mul_broadcast": (ops.mul, (2, 3, 4), (3, 1)),
    "div": (ops.div, (3, 4), (3, 4)),
    "matmul": (ops.matmul, (3, 4), (4, 2)),
    "matmul_batched": (ops.matmul, (2, 3, 4), (4, 5)),
}


class TestGradients:
    """
    Tests des gradients analytiques contre les différences finies centrées.

    Chaque opération est vérifiée en double précision sur plusieurs entrées
    aléatoires indépendantes.
    """

    @pytest.mark.parametrize("name", sorted(UNARY_CASES))
    def test_unary_ops(self, name):
        """
        Teste les opérations à une entrée.
        """
        op, shape = UNARY_CASES[name]
        rng = np.random.default_rng(zlib.crc32(name.encode()))
        for _ in range(N_RANDOM_INPUTS):
            x = _leaf(_away_from_zero(rng, shape))
            weights = rng.normal(size=op(x.detach()).shape)
            report = grad_check(lambda t: _weighted(op(t), weights), x)
            assert report.passed, f"{name}: {report.max_rel_error} en {report.worst_index}"

    @pytest.mark.parametrize("name", sorted(BINARY_CASES))
    def test_binary_ops(self, name):
        """
        Teste les opérations à deux entrées, par rapport à chacune d'elles.
        """
        op, shape_a, shape_b = BINARY_CASES[name]
        rng = np.random.default_rng(zlib.crc32(name.encode()))
        for _ in range(N_RANDOM_INPUTS):
            a = _leaf(_away_from_zero(rng, shape_a))
            b = _leaf(_away_from_zero(rng, shape_b))
            weights = rng.normal(size=op(a.detach(), b.detach()).shape)
            report_a = grad_check(lambda t: _weighted(op(t, b), weights), a)
            report_b = grad_check(lambda t: _weighted(op(a, t), weights), b)
            assert report_a.passed, f"{name}/a: {report_a.max_rel_error}"
            assert report_b.passed, f"{name}/b: {report_b.max_rel_error}"

    def test_layer_norm(self):
        """
        Teste la LayerNorm par rapport à l'entrée, gamma et beta.
        """
        rng = np.random.default_rng(11)
        for _ in range(N_RANDOM_INPUTS):
            x = _leaf(rng.normal(size=(3, 6)))
            gamma = _leaf(rng.uniform(0.5, 1.5, size=6))
            beta = _leaf(rng.normal(size=6))
            weights = rng.normal(size=(3, 6))
            for leaf in (x, gamma, beta):
                report = grad_check(
                    lambda _: _weighted(ops.layer_norm(x, gamma, beta), weights), leaf
                )
                assert report.passed, report.max_rel_error

    def test_concat(self):
        """
        Teste la concaténation sur un axe intérieur.
        """
        rng = np.random.default_rng(5)
        for _ in range(N_RANDOM_INPUTS):
            a = _leaf(rng.normal(size=(2, 3)))
            b = _leaf(rng.normal(size=(2, 2)))
            weights = rng.normal(size=(2, 5))
            for leaf in (a, b):
                report = grad_check(lambda _: _weighted(ops.concat([a, b], axis=1), weights), leaf)
                assert report.passed

    def test_softmax_large_inputs_stay_finite(self):
        """
        Teste que le softmax reste fini pour des entrées très grandes.
        """
        out = ops.softmax(Tensor(np.array([[1000.0, 1001.0, 999.0]]), dtype=np.float64))
        assert np.all(np.isfinite(out.data))
        assert out.data.sum() == pytest.approx(1.0)

    def test_gradients_accumulate(self):
        """
        Teste que deux rétropropagations successives additionnent les gradients.
        """
        x = _leaf([1.0, 2.0])
        for _ in range(2):
            with GradTape() as tape:
                loss = (x * x).sum()
            backward(loss, tape)
        np.testing.assert_allclose(x.grad, [4.0, 8.0])

    def test_shared_subexpression(self):
        """
        Teste un tenseur intermédiaire utilisé deux fois dans le graphe.
        """
        x = _leaf([3.0])
        with GradTape() as tape:
            y = x * 2.0
            loss = (y * y + y).sum()
        backward(loss, tape)
        # d/dx (4x² + 2x) = 8x + 2
        np.testing.assert_allclose(x.grad, [26.0])

    def test_backward_linearity(self, rng):
        """
        Teste que le gradient de a·l₁ + b·l₂ vaut a·g₁ + b·g₂.
        """
        data = rng.normal(size=(3, 4))
        w1, w2 = rng.normal(size=(3, 4)), rng.normal(size=(3, 4))
        a, b = -1.7, 0.3

        def grads(loss_fn):
            x = _leaf(data)
            with GradTape() as tape:
                loss = loss_fn(x)
            backward(loss, tape)
            return x.grad.copy()

        def l1(x):
            return _weighted(ops.gelu(x), w1)

        def l2(x):
            return _weighted(x * x, w2)

        combined = grads(lambda x: l1(x) * a + l2(x) * b)
        expected = a * grads(l1) + b * grads(l2)
        np.testing.assert_allclose(combined, expected, rtol=1e-12, atol=1e-15)

    def test_channel_layout_round_trip(self, rng):
        """
        Teste que [B,T,C] -> [B·C,T,1] puis le chemin inverse restitue les données
        et le gradient au bit près.
        """
        B, T, C = 2, 5, 3
        x = _leaf(rng.normal(size=(B, T, C)))
        weights = rng.normal(size=(B, T, C))
        with GradTape() as tape:
            per_channel = x.transpose(0, 2, 1).reshape(B * C, T, 1)
            back = per_channel.reshape(B, C, T).transpose(0, 2, 1)
            loss = _weighted(back, weights)
        backward(loss, tape)
        for b in range(B):
            for c in range(C):
                np.testing.assert_array_equal(per_channel.data[b * C + c, :, 0], x.data[b, :, c])
        np.testing.assert_array_equal(back.data, x.data)
        np.testing.assert_array_equal(x.grad, weights)

    def test_transpose_round_trip(self, rng):
        """
        Teste qu'une permutation suivie de son inverse est l'identité exacte.
        """
        x = _leaf(rng.normal(size=(2, 3, 4, 5)))
        axes = (2, 0, 3, 1)
        inverse = tuple(int(i) for i in np.argsort(axes))
        np.testing.assert_array_equal(x.transpose(axes).transpose(inverse).data, x.data)


class TestTapeErrors:
    """
    Tests des erreurs de la différentiation.
    """

    def test_non_scalar_loss(self):
        """
        Teste qu'une perte non scalaire est refusée.
        """
        x = _leaf([1.0, 2.0])
        with GradTape() as tape:
            y = x * 3.0
        with pytest.raises(DimensionError):
            backward(y, tape)

    def test_loss_outside_tape(self):
        """
        Teste qu'une perte calculée hors de la bande est refusée.
        """
        x = _leaf([1.0, 2.0])
        loss = (x * 3.0).sum()
        with GradTape() as tape:
            (x * 2.0).sum()
        with pytest.raises(TapeError):
            backward(loss, tape)

    def test_no_recording_without_tape(self):
        """
        Teste qu'aucune opération n'est enregistrée hors d'une bande.
        """
        x = _leaf([1.0])
        y = x * 2.0
        assert not y.requires_grad
        assert y.is_leaf

    def test_shape_mismatch(self):
        """
        Teste les formes incompatibles.
        """
        with pytest.raises(DimensionError):
            ops.add(_leaf(np.ones((2, 3))), _leaf(np.ones((4,))))
        with pytest.raises(DimensionError):
            ops.matmul(_leaf(np.ones((2, 3))), _leaf(np.ones((2, 3))))
        with pytest.raises(DimensionError):
            ops.concat([_leaf(np.ones((2, 3))), _leaf(np.ones((3, 3)))], axis=1)

    def test_slice_rejects_negative_step(self):
        """
        Teste le refus des pas négatifs et des indices hors bornes.
        """
        x = _leaf(np.arange(6.0))
        with pytest.raises(DimensionError):
            ops.slice(x, slice(None, None, -1))
        with pytest.raises(DimensionError):
            ops.slice(x, 6)


class TestFiniteness:
    """
    Tests du contrôle des valeurs non finies.
    """

    def test_check_finite(self):
        """
        Teste la détection de NaN et d'Inf.
        """
        check_finite(Tensor([1.0, 2.0]))
        with pytest.raises(NonFiniteError):
            check_finite(Tensor([1.0, np.nan]), "x")
        with pytest.raises(NonFiniteError):
            Tensor([np.inf]).check_finite()

    def test_relative_error_floor(self):
        """
        Teste que le plancher rend l'erreur absolue près de zéro.
        """
        err = relative_error([1e-9], [2e-9], floor=1e-4)
        assert err[0] == pytest.approx(1e-5)
        assert relative_error([2.0], [1.0])[0] == pytest.approx(0.5)

    def test_float32_default(self):
        """
        Teste la précision par défaut des tenseurs.
        """
        assert Tensor([1, 2, 3]).dtype == np.float32
        assert Tensor(np.array([1.0]), dtype=np.float64).dtype == np.float64
