import math

import numpy as np
import pytest

from bargmann.applications import (classifier_eval, faddeev_leverrier, hom_overlap, husimi_q,
                                   kernel_csv, kernel_matrix, kirkwood_dirac, positive_p,
                                   power_trace, renyi_entropy, spectrum_from_traces,
                                   wigner_point, wigner_reference)
from bargmann.errors import SeriesError, TruncationError, UndefinedEntropyError
from bargmann.fock import (MixedState, dual_rail_qubit, fock_state, random_pure_state,
                           single_photon_state, truncated_coherent_state, vacuum)
from bargmann.protocol import Sampled


def orthogonal_mixture(weights):
    d = len(weights)
    basis = [fock_state([int(i == k) for i in range(d)]) for k in range(d)]
    return MixedState.mixture(weights, basis)


@pytest.mark.parametrize("t", np.linspace(0, math.pi, 7))
def test_hom_overlap_cos2(t):
    a = single_photon_state([1, 0])
    b = single_photon_state([math.cos(t), math.sin(t)])
    assert hom_overlap(a, b) == pytest.approx(math.cos(t) ** 2, abs=1e-12)


def test_hom_overlap_sampled_clipped():
    a, b = single_photon_state([1, 0]), single_photon_state([0, 1])
    mode = Sampled(50, seed=3)
    v = hom_overlap(a, b, mode)
    assert -2 * mode.epsilon <= v <= 1 + 2 * mode.epsilon


@pytest.mark.parametrize("weights, alpha", [((0.5, 0.5), 2), ((0.75, 0.25), 3),
                                            ((0.5, 0.3, 0.2), 2), ((0.5, 0.3, 0.2), 4)])
def test_renyi_entropy(weights, alpha):
    rho = orthogonal_mixture(weights)
    expected = math.log(sum(w ** alpha for w in weights)) / (1 - alpha)
    assert renyi_entropy(rho, alpha) == pytest.approx(expected, abs=1e-10)


def test_renyi_rejects_bad_alpha():
    with pytest.raises(ValueError):
        renyi_entropy(vacuum(), 1)
    with pytest.raises(ValueError):
        renyi_entropy(vacuum(), 2.5)


def test_renyi_undefined_when_estimate_nonpositive(monkeypatch):
    import bargmann.applications as apps
    monkeypatch.setattr(apps, "power_trace", lambda rho, a, mode: -0.01)
    with pytest.raises(UndefinedEntropyError):
        renyi_entropy(vacuum(), 2, Sampled(10))


def test_power_trace_one():
    assert power_trace(vacuum(), 1) == 1.0


def test_faddeev_leverrier_known():
    # eigenvalues 0.5, 0.3, 0.2
    lam = np.array([0.5, 0.3, 0.2])
    coeffs = faddeev_leverrier([np.sum(lam ** k) for k in range(1, 4)])
    np.testing.assert_allclose(coeffs, np.poly(lam), atol=1e-14)


@pytest.mark.parametrize("weights", [(0.75, 0.25), (0.5, 0.3, 0.2), (0.4, 0.3, 0.2, 0.1)])
def test_spectrum_recovery(weights):
    rep = spectrum_from_traces(orthogonal_mixture(weights), len(weights))
    np.testing.assert_allclose(rep.eigenvalues.real, sorted(weights, reverse=True), atol=1e-8)
    assert rep.largest_eigenvalue == pytest.approx(max(weights), abs=1e-8)
    assert not rep.out_of_range


def test_spectrum_pure_state_rank_overestimate():
    rep = spectrum_from_traces(single_photon_state([1, 1, 1, 1]), 4)
    np.testing.assert_allclose(rep.eigenvalues.real, [1, 0, 0, 0], atol=1e-10)
    assert rep.to_dict()["largest_eigenvalue"] == pytest.approx(1.0)


def test_spectrum_sampled_flags_out_of_range():
    rep = spectrum_from_traces(orthogonal_mixture((0.5, 0.5)), 3, Sampled(200, seed=1))
    assert len(rep.eigenvalues) == 3
    assert isinstance(rep.out_of_range, list)


def test_kernel_matrix(rng):
    states = [dual_rail_qubit(t, p) for t, p in [(0.1, 0.0), (1.0, 0.4), (2.5, 2.0)]]
    k = kernel_matrix(states)
    for i, a in enumerate(states):
        for j, b in enumerate(states):
            ov = sum(a.amplitude(key).conjugate() * b.amplitude(key) for key in a.amplitudes)
            assert k[i, j] == pytest.approx(abs(ov) ** 2, abs=1e-12)
    np.testing.assert_array_equal(k, k.T)
    assert np.all(np.linalg.eigvalsh(k) > -1e-12)


def test_kernel_sampled_reproducible():
    states = [random_pure_state(2, 1, s) for s in range(3)]
    a = kernel_matrix(states, Sampled(300, seed=4))
    b = kernel_matrix(states, Sampled(300, seed=4))
    np.testing.assert_array_equal(a, b)
    np.testing.assert_array_equal(a, a.T)


def test_kernel_csv():
    text = kernel_csv(np.array([[1.0, 0.5], [0.5, 1.0]]), ["x", "y"])
    assert text.splitlines() == [",x,y", "x,1.0,0.5", "y,0.5,1.0"]


@pytest.mark.parametrize("bias, expected", [(0.0, 1), (-1.0, -1), (-0.4, 1)])
def test_classifier(bias, expected):
    assert classifier_eval([0.9, 0.5], [1.0, 1.0], [1, -1], bias) == expected


def test_husimi_spot_values():
    assert husimi_q(vacuum(), 0) == pytest.approx(1 / math.pi, abs=1e-12)
    assert husimi_q(vacuum(), 1.0) == pytest.approx(math.exp(-1) / math.pi, abs=1e-12)
    beta = 0.5 + 0.2j
    coh = truncated_coherent_state(beta, 25).state
    assert husimi_q(coh, beta) == pytest.approx(1 / math.pi, abs=1e-10)


@pytest.mark.parametrize("state", [vacuum(), fock_state([1]), fock_state([2])])
def test_husimi_grid_normalization(state):
    step = 0.1
    xs = np.arange(-3, 3 + step / 2, step)
    total = sum(husimi_q(state, complex(x, y)) for x in xs for y in xs) * step ** 2
    assert total == pytest.approx(1.0, rel=0.02)


def test_husimi_cutoff_below_support():
    with pytest.raises(TruncationError):
        husimi_q(fock_state([3]), 0, cutoff=1)


@pytest.mark.parametrize("n", [0, 1, 2, 3])
def test_wigner_origin_fock(n):
    assert wigner_point(fock_state([n]), 0) == pytest.approx((-1) ** n * 2 / math.pi, abs=1e-10)


@pytest.mark.parametrize("alpha", [0.3, 0.7 - 0.4j, 1.5j])
def test_wigner_analytic(alpha):
    r2 = abs(alpha) ** 2
    assert wigner_point(vacuum(), alpha) == pytest.approx(2 / math.pi * math.exp(-2 * r2),
                                                          abs=1e-9)
    w1 = -2 / math.pi * (1 - 4 * r2) * math.exp(-2 * r2)
    assert wigner_point(fock_state([1]), alpha) == pytest.approx(w1, abs=1e-9)


def test_wigner_matches_reference():
    rho = orthogonal_mixture((0.6, 0.4))
    a = np.array([0.3, -0.2j])
    assert wigner_point(rho, a) == pytest.approx(wigner_reference(rho, a), abs=1e-12)


def test_wigner_series_error_when_truncated():
    with pytest.raises(SeriesError) as info:
        wigner_point(vacuum(), 1.5, n_max=1)
    assert info.value.remainder > 1e-10


def test_positive_p_vacuum():
    assert positive_p(vacuum(), 0, 0) == pytest.approx(1 / math.pi ** 2, abs=1e-12)
    a, b = 0.3 + 0.1j, -0.2j
    val = positive_p(vacuum(), a, b)
    # <b|a><a|0><0|b> for vacuum
    ref = (np.exp(-0.5 * abs(a) ** 2 - 0.5 * abs(b) ** 2 + np.conj(b) * a)
           * math.exp(-0.5 * abs(a) ** 2) * math.exp(-0.5 * abs(b) ** 2)) / math.pi ** 2
    assert val == pytest.approx(ref, abs=1e-8)


def test_kirkwood_dirac():
    a = single_photon_state([1, 0])
    b = single_photon_state([1, 1])
    rho = single_photon_state([1, 1j])
    value = kirkwood_dirac(rho, a, b)
    # <b|a><a|rho|b>
    ref = (1 / math.sqrt(2)) * (1 / math.sqrt(2)) * ((1 - 1j) / 2)
    assert value == pytest.approx(ref, abs=1e-12)
