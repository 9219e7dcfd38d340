import math
import warnings

import numpy as np
import pytest
from scipy.stats import spearmanr

from extflag import experiments as ex
from extflag.circuit import (Circuit, ResourceError, compile_to_native, magic_distillation_circuit, parse,
                             to_unitary, zzzzz_rotation_circuit)
from extflag.densesim import (DegeneratePostselection, DensityMatrix, NumericalHealthWarning,
                              depolarize, fidelity, output_state, postselect_flags,
                              product_state, simulate)
from extflag.faults import NoiseModel, score_flag
from extflag.gadget import NestedFlagSet, instrument, nest, synthesize
from extflag.pauli import PauliString

from conftest import random_state


def test_product_state_little_endian():
    assert np.allclose(product_state("10"), [0, 1, 0, 0])
    assert np.allclose(product_state("+", 2), [2**-0.5, 2**-0.5, 0, 0])
    with pytest.raises(ValueError):
        product_state("x")


def test_noiseless_is_pure_projector():
    c = parse("qubits 3\nh 0\ncnot 0 1\ns 1\ncz 1 2\nt 2")
    rho = simulate(c, NoiseModel("depolarizing", p=0.0), "+0-")
    psi = output_state(c, "+0-")
    assert np.allclose(rho.data, np.outer(psi, psi.conj()), atol=1e-12)


def test_vector_input_and_normalization_check():
    nrng = np.random.default_rng(1)
    psi = random_state(nrng, 2)
    c = parse("qubits 2\ncnot 0 1")
    rho = simulate(c, None, psi)
    out = to_unitary(c) @ psi
    assert fidelity(rho, out) == pytest.approx(1.0, abs=1e-12)
    with pytest.raises(ValueError):
        simulate(c, None, 2 * psi)


def test_depolarize_zero_state():
    p = 0.3
    rho = np.diag([1, 0]).astype(complex).reshape(2, 2)
    out = depolarize(rho, p, 0, 1)
    assert np.allclose(out, np.diag([1 - 2 * p / 3, 2 * p / 3]))


def test_depolarizing_after_two_qubit_gate_fidelity():
    # CZ on |00> leaves it unchanged; D_p on both qubits
    p = 0.01
    rho = simulate(parse("qubits 2\ncz 0 1"), NoiseModel("depolarizing", p=p), "00")
    assert fidelity(rho, product_state("00")) == pytest.approx((1 - 2 * p / 3) ** 2, abs=1e-14)
    rho = simulate(parse("qubits 2\ncz 0 1\nh 0"), NoiseModel("depolarizing", p=p), "00")
    assert fidelity(rho, product_state("+0")) == pytest.approx((1 - 2 * p / 3) ** 2, abs=1e-14)


def test_single_qubit_gates_noiseless():
    rho = simulate(parse("qubits 1\nh 0\ns 0"), NoiseModel("depolarizing", p=0.5), "0")
    assert rho.data[0, 0] == pytest.approx(0.5)
    assert fidelity(rho, output_state(parse("qubits 1\nh 0\ns 0"))) == pytest.approx(1.0)


def test_crosstalk_hits_neighbors_only():
    p = 0.1
    rho = simulate(parse("qubits 4\ncz 1 2"), NoiseModel("crosstalk", p=p), "0000")
    diag = np.real(np.diag(rho.data))
    # qubit 0 and 3 flip with 2 * (p / 10) / 3 each; gate qubits with 2p/3
    for q, rate in [(0, p / 10), (1, p), (2, p), (3, p / 10)]:
        flipped = sum(diag[i] for i in range(16) if (i >> q) & 1)
        assert flipped == pytest.approx(2 * rate / 3)


def test_overrotation_zero_matches_noiseless():
    c = compile_to_native(parse("qubits 2\nh 0\ncnot 0 1"))
    a = simulate(c, NoiseModel("overrotation", epsilon=0.0), "00")
    b = simulate(c, None, "00")
    assert np.allclose(a.data, b.data, atol=1e-14)


def test_overrotation_requires_native():
    with pytest.raises(ValueError):
        simulate(parse("qubits 2\ncnot 0 1"), NoiseModel("overrotation", epsilon=0.1))


def test_overrotation_single_gate_value():
    # RX(pi) then exp(-i eps/2 X): fidelity cos^2(eps/2)
    eps = 0.2
    c = compile_to_native(parse("qubits 1\nx 0"))
    rho = simulate(c, NoiseModel("overrotation", epsilon=eps), "0")
    assert fidelity(rho, product_state("1")) == pytest.approx(math.cos(eps / 2) ** 2)


@pytest.mark.parametrize("kind, value", [("depolarizing", 0.05), ("crosstalk", 0.05),
                                         ("overrotation", 0.1)])
def test_state_invariants(kind, value):
    c = compile_to_native(magic_distillation_circuit()) if kind == "overrotation" \
        else magic_distillation_circuit()
    rho = simulate(c, NoiseModel(kind).with_parameter(value), "+++++")
    assert rho.is_hermitian(1e-10)
    assert abs(rho.trace - 1) < 1e-10
    assert rho.min_eigenvalue() > -1e-9


def test_postselect_zero_flags():
    rho = simulate(parse("qubits 2\ncnot 0 1"), NoiseModel("depolarizing", p=0.1), "+0")
    out, s = postselect_flags(rho, NestedFlagSet())
    assert s == 1.0 and out is rho


def test_postselect_noiseless_and_detected_fault():
    c = parse("qubits 2\ncnot 0 1")
    g = synthesize(c, PauliString.from_label("XI"))
    inst = instrument(c, g)
    flags = nest(g, data_width=2)
    out, s = postselect_flags(simulate(inst, None, "+0"), flags)
    assert abs(s - 1) < 1e-10
    assert fidelity(out, output_state(c, "+0")) == pytest.approx(1.0, abs=1e-10)
    # Z on the data qubit mid-section anticommutes with P' = XX at the exit
    mid = 1 + 1  # H moment, one entangle leg, then the section moment
    with pytest.raises(DegeneratePostselection):
        postselect_flags(simulate(inst, None, "+0", faults=[(mid, PauliString.single(3, 0, "Z"))]),
                         flags)


def test_fidelity_values():
    nrng = np.random.default_rng(2)
    psi = random_state(nrng, 3)
    pure = DensityMatrix(3, np.outer(psi, psi.conj()))
    assert fidelity(pure, psi) == pytest.approx(1.0)
    for k in (1, 2, 3):
        mixed = DensityMatrix(k, np.eye(1 << k) / (1 << k))
        assert fidelity(mixed, random_state(nrng, k)) == pytest.approx(2.0**-k)
    with pytest.raises(ValueError):
        fidelity(pure, psi[:4])


def test_fidelity_clamps_with_warning():
    bad = DensityMatrix(1, np.diag([1.1, -0.1]).astype(complex))
    with warnings.catch_warnings(record=True) as rec:
        warnings.simplefilter("always")
        assert fidelity(bad, np.array([1, 0])) == 1.0
    assert any(issubclass(w.category, NumericalHealthWarning) for w in rec)


def test_monotone_degradation_on_benchmarks():
    grid = [0.0, 1e-4, 3e-4, 1e-3, 3e-3, 1e-2]
    for c, inp in [(magic_distillation_circuit(), "+++++"),
                   (zzzzz_rotation_circuit(5, math.pi / 4), "+++++")]:
        ref = output_state(c, inp)
        fids = [fidelity(simulate(c, NoiseModel("depolarizing", p=p), inp), ref) for p in grid]
        assert fids[0] == pytest.approx(1.0, abs=1e-10)
        assert all(a >= b - 1e-12 for a, b in zip(fids, fids[1:]))


def test_overrotation_quadratic_scaling():
    c = compile_to_native(zzzzz_rotation_circuit(5, math.pi / 4))
    ref = output_state(c, "+++++")
    eps = np.array([1e-3, 2e-3, 5e-3, 1e-2])
    inf = [1 - fidelity(simulate(c, NoiseModel("overrotation", epsilon=e), "+++++"), ref)
           for e in eps]
    slope = np.polyfit(np.log(eps), np.log(inf), 1)[0]
    assert abs(slope - 2) < 0.1


def test_resource_guard():
    with pytest.raises(ResourceError):
        simulate(Circuit(13))


def test_survival_slope_grows_with_detected_faults():
    b = ex.resolve_benchmark("magic")
    ps = np.array([1e-4, 5e-4, 1e-3])
    alphas, detected = [], []
    for p in ex.draw_candidates(b, 30, 1):
        g = synthesize(b.circuit, p, b.section)
        flags = nest(g, data_width=5)
        loss = np.array([1 - ex.simulate_flagged(b, flags, NoiseModel("depolarizing", p=v))[1]
                         for v in ps])
        alpha = ps @ loss / (ps @ ps)
        assert np.linalg.norm(loss - alpha * ps) / np.linalg.norm(loss) < 0.05
        alphas.append(alpha)
        detected.append(score_flag(b.circuit, g, NoiseModel("depolarizing")).n_detected)
    assert spearmanr(alphas, detected).statistic > 0
