"""Tests for Hermitian splitting, loading level selection, and matrix roots."""

import json

import numpy as np
import pytest

from afshape import (
    AFKernel,
    LoadingError,
    RegionSpec,
    SplitPair,
    build_kernel,
    build_loaded_region,
    choose_zeta,
    eigenvalue_ranges,
    eval_objective,
    init_random_code,
    load_and_root,
    split_kernel,
)
from oracle import quadratic_form, random_unitary

REFERENCE_REGION = RegionSpec(delays=(5, 6, 7), dopplers=(-15, -14, -13, 11, 12, 13, 14))


def identity_kernel(n):
    return AFKernel(k=0, p=0, matrix=np.eye(n, dtype=complex))


# ---------------------------------------------------------------- split

def test_split_identity_kernel():
    pair = split_kernel(identity_kernel(4))
    np.testing.assert_allclose(pair.ar, np.eye(4), atol=1e-15)
    np.testing.assert_allclose(pair.ai, np.zeros((4, 4)), atol=1e-15)


def test_split_purely_skew_kernel():
    # ai = j(A - A^H)/2, so A = jI gives ai = -I; the sign is pinned by the
    # reconstruction A = ar - j*ai
    pair = split_kernel(AFKernel(k=0, p=0, matrix=1j * np.eye(3)))
    np.testing.assert_allclose(pair.ar, np.zeros((3, 3)), atol=1e-15)
    np.testing.assert_allclose(pair.ai, -np.eye(3), atol=1e-15)


def test_split_reconstructs_kernel():
    for k, p in [(1, 2), (-3, -4), (7, 0)]:
        kernel = build_kernel(k, p, 8)
        pair = split_kernel(kernel)
        np.testing.assert_allclose(pair.ar - 1j * pair.ai, kernel.matrix, atol=1e-14)


def test_split_parts_are_hermitian():
    pair = split_kernel(build_kernel(3, -2, 9))
    np.testing.assert_allclose(pair.ar, pair.ar.conj().T, atol=1e-15)
    np.testing.assert_allclose(pair.ai, pair.ai.conj().T, atol=1e-15)


def test_split_magnitude_identity_random_unitaries():
    # |z^H A z|^2 splits into the two real quadratic forms squared
    rng = np.random.default_rng(12)
    for trial in range(1000):
        n = (4, 8, 16)[trial % 3]
        a = random_unitary(n, rng)
        pair = split_kernel(AFKernel(k=0, p=0, matrix=a))
        z = rng.normal(size=n) + 1j * rng.normal(size=n)
        lhs = abs(quadratic_form(a, z)) ** 2
        rhs = quadratic_form(pair.ar, z).real ** 2 + quadratic_form(pair.ai, z).real ** 2
        assert abs(lhs - rhs) <= 1e-10 * max(lhs, 1e-30)


def test_split_quadratic_forms_are_real():
    rng = np.random.default_rng(5)
    pair = split_kernel(build_kernel(2, 3, 8))
    z = rng.normal(size=8) + 1j * rng.normal(size=8)
    assert abs(quadratic_form(pair.ar, z).imag) < 1e-12
    assert abs(quadratic_form(pair.ai, z).imag) < 1e-12


# ----------------------------------------------------------- choose_zeta

def test_choose_zeta_degenerate_identity_collection():
    splits = [split_kernel(identity_kernel(4))]
    assert choose_zeta(splits, delta=0.01) == pytest.approx(0.01)


def test_choose_zeta_bound_policy():
    assert choose_zeta([], delta=0.25, policy="bound") == pytest.approx(1.25)


def test_choose_zeta_reference_region():
    splits = [split_kernel(build_kernel(k, p, 31)) for k, p in REFERENCE_REGION.pairs()]
    zeta = choose_zeta(splits, delta=0.01)
    assert 1.0 < zeta <= 1.01
    for s in splits:
        assert np.linalg.eigvalsh(s.ar)[0] > -zeta
        assert np.linalg.eigvalsh(s.ai)[0] > -zeta


def test_choose_zeta_validation():
    splits = [split_kernel(identity_kernel(4))]
    with pytest.raises(ValueError):
        choose_zeta(splits, delta=0.0)
    with pytest.raises(ValueError):
        choose_zeta(splits, policy="magic")
    with pytest.raises(ValueError):
        choose_zeta([], policy="exact")


# --------------------------------------------------------- load_and_root

def test_load_and_root_identity_example():
    pair = split_kernel(identity_kernel(5))
    loaded = load_and_root(pair, zeta=1.0)
    np.testing.assert_allclose(loaded.ar_loaded, 2.0 * np.eye(5), atol=1e-15)
    np.testing.assert_allclose(loaded.ar_root, np.sqrt(2.0) * np.eye(5), atol=1e-12)
    np.testing.assert_allclose(loaded.ai_loaded, np.eye(5), atol=1e-15)
    np.testing.assert_allclose(loaded.ai_root, np.eye(5), atol=1e-12)


def test_roots_are_hermitian_and_psd():
    loaded = load_and_root(split_kernel(build_kernel(5, -13, 31)), zeta=1.01)
    for root in (loaded.ar_root, loaded.ai_root):
        np.testing.assert_array_equal(root, root.conj().T)
        assert np.linalg.eigvalsh(root)[0] > 0


def test_roots_reconstruct_loaded_matrices():
    for k, p in [(5, -15), (6, 12), (7, 14)]:
        loaded = load_and_root(split_kernel(build_kernel(k, p, 31)), zeta=1.0087)
        for root, target in ((loaded.ar_root, loaded.ar_loaded),
                             (loaded.ai_root, loaded.ai_loaded)):
            err = np.linalg.norm(root @ root - target) / np.linalg.norm(target)
            assert err < 1e-9


def test_load_and_root_raises_on_indefinite():
    pair = split_kernel(build_kernel(3, 2, 8))
    with pytest.raises(LoadingError) as excinfo:
        load_and_root(pair, zeta=0.1)  # well below the negative eigenvalues
    message = str(excinfo.value)
    assert "k=3" in message and "p=2" in message


# ------------------------------------------------------- region assembly

def test_build_loaded_region_caches_sums():
    region = RegionSpec(delays=(1, 2), dopplers=(-2, 3))
    loaded = build_loaded_region(8, region)
    assert set(loaded.pairs) == set(region.pairs())
    expected = sum(p.ar_loaded + p.ai_loaded for p in loaded.pairs.values())
    np.testing.assert_allclose(loaded.quad_sum, expected, atol=1e-13)
    np.testing.assert_allclose(loaded.quad_sum, loaded.quad_sum.conj().T, atol=1e-13)


def test_build_loaded_region_validates_region():
    with pytest.raises(ValueError):
        build_loaded_region(6, RegionSpec(delays=(7,), dopplers=(1,)))


def test_quartic_chain_equivalence():
    # sum |x^H A x|^2 recomputed through the loaded matrices
    region = REFERENCE_REGION
    loaded = build_loaded_region(31, region)
    zn = loaded.zeta * 31
    for seed in range(5):
        x = init_random_code(31, seed)
        v = x.values
        chain = 0.0
        for pair in loaded.pairs.values():
            chain += (quadratic_form(pair.ar_loaded, v).real - zn) ** 2
            chain += (quadratic_form(pair.ai_loaded, v).real - zn) ** 2
        direct = eval_objective(x, region)
        assert abs(direct - chain) <= 1e-8 * direct


def test_eigenvalue_ranges_serializable():
    splits = [split_kernel(build_kernel(k, p, 8))
              for k, p in RegionSpec(delays=(1,), dopplers=(2, -3)).pairs()]
    ranges = json.loads(json.dumps(eigenvalue_ranges(splits)))
    assert set(ranges) == {"1,-3", "1,2"}
    for entry in ranges.values():
        assert -1.0 - 1e-12 <= entry["ar_min"] <= entry["ar_max"] <= 1.0 + 1e-12
        assert -1.0 - 1e-12 <= entry["ai_min"] <= entry["ai_max"] <= 1.0 + 1e-12
