"""Hermitian splitting and diagonal loading of the AF kernels.

Each kernel A = D_p J_k is unitary, so both Hermitian matrices

    ar = (A + A^H) / 2        ai = j (A - A^H) / 2

have eigenvalues in [-1, 1], and for any vector z

    z^H A z = (z^H ar z) - j (z^H ai z)

with the two parenthesized quadratic forms real. Consequently
|z^H A z|^2 = (z^H ar z)^2 + (z^H ai z)^2, which is what lets the quartic
region objective be driven through quadratic pieces. Adding a loading
level zeta strictly above the most negative eigenvalue found across a
region makes ar + zeta*I and ai + zeta*I positive definite, and those
loaded matrices admit unique Hermitian PSD square roots (computed by
eigendecomposition, not Cholesky, so the root itself stays Hermitian).

All per-(k, p) loaded matrices and their roots are precomputed once per
region: they are loop invariants of the solver.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .af_core import AFKernel, RegionSpec, build_kernel


class LoadingError(RuntimeError):
    """Diagonal loading failed to make a kernel matrix positive definite."""

    def __init__(self, k: int, p: int, part: str, min_eig: float, zeta: float):
        self.k = k
        self.p = p
        self.part = part
        self.min_eig = min_eig
        self.zeta = zeta
        super().__init__(
            f"loaded {part} matrix for (k={k}, p={p}) is not positive definite: "
            f"min eigenvalue {min_eig:.6e} at loading level {zeta:.6e}"
        )


@dataclass(eq=False)
class SplitPair:
    """Hermitian pieces of one kernel: ar = (A+A^H)/2, ai = j(A-A^H)/2."""

    k: int
    p: int
    ar: np.ndarray
    ai: np.ndarray


@dataclass(eq=False)
class LoadedPair:
    """One kernel's loaded matrices and their Hermitian PSD square roots."""

    k: int
    p: int
    zeta: float
    ar_loaded: np.ndarray
    ai_loaded: np.ndarray
    ar_root: np.ndarray
    ai_root: np.ndarray


@dataclass(eq=False)
class LoadedRegion:
    """Everything precomputed for one (n, region) pair.

    pairs maps (k, p) to its LoadedPair in region.pairs() order, and
    quad_sum caches the region-wide sum of all loaded matrices (the
    quadratic block reused by every outer iteration of the solver).
    """

    n: int
    region: RegionSpec
    zeta: float
    pairs: dict
    quad_sum: np.ndarray


def split_kernel(kernel: AFKernel) -> SplitPair:
    """Split a kernel into the Hermitian matrices carrying Re and -Im of z^H A z."""
    a = kernel.matrix
    ah = a.conj().T
    return SplitPair(k=kernel.k, p=kernel.p, ar=(a + ah) / 2.0, ai=0.5j * (a - ah))


def choose_zeta(splits, delta: float = 0.01, policy: str = "exact") -> float:
    """Loading level strictly above the most negative eigenvalue in a region.

    policy="exact" scans the eigenvalues of every split matrix; a tighter
    level keeps the downstream quadratic forms better conditioned.
    policy="bound" skips the eigendecompositions entirely and uses the
    unitary spectral bound (every eigenvalue lies in [-1, 1]), returning
    1 + delta. Both policies clip from below at delta, so collections that
    are already positive definite still get a small positive load.
    """
    if delta <= 0:
        raise ValueError(f"loading margin delta must be > 0, got {delta}")
    if policy == "bound":
        return 1.0 + delta
    if policy != "exact":
        raise ValueError(f"unknown zeta policy {policy!r}")
    splits = list(splits)
    if not splits:
        raise ValueError("cannot choose a loading level for an empty region")
    min_eig = min(
        min(float(np.linalg.eigvalsh(s.ar)[0]) for s in splits),
        min(float(np.linalg.eigvalsh(s.ai)[0]) for s in splits),
    )
    return max(0.0, -min_eig) + delta


def _hermitian_root(mat: np.ndarray, floor: float, k: int, p: int, part: str, zeta: float) -> np.ndarray:
    eigvals, eigvecs = np.linalg.eigh(mat)
    if eigvals[0] <= floor:
        raise LoadingError(k, p, part, float(eigvals[0]), zeta)
    root = (eigvecs * np.sqrt(eigvals)) @ eigvecs.conj().T
    # symmetrize away eigh rounding so the Hermitian invariant holds exactly
    return (root + root.conj().T) / 2.0


def load_and_root(split: SplitPair, zeta: float) -> LoadedPair:
    """Apply the loading level and take Hermitian PSD square roots via eigh."""
    n = split.ar.shape[0]
    bump = zeta * np.eye(n)
    ar_loaded = split.ar + bump
    ai_loaded = split.ai + bump
    floor = 1e-12 * zeta
    return LoadedPair(
        k=split.k,
        p=split.p,
        zeta=float(zeta),
        ar_loaded=ar_loaded,
        ai_loaded=ai_loaded,
        ar_root=_hermitian_root(ar_loaded, floor, split.k, split.p, "ar", zeta),
        ai_root=_hermitian_root(ai_loaded, floor, split.k, split.p, "ai", zeta),
    )


def build_loaded_region(n: int, region: RegionSpec, delta: float = 0.01,
                        zeta_policy: str = "exact") -> LoadedRegion:
    """Split, load, and root every kernel of the region; cache the sums."""
    region.validate_for(n)
    splits = [split_kernel(build_kernel(k, p, n)) for k, p in region.pairs()]
    zeta = choose_zeta(splits, delta=delta, policy=zeta_policy)
    pairs = {}
    quad_sum = np.zeros((n, n), dtype=complex)
    for s in splits:
        loaded = load_and_root(s, zeta)
        pairs[(s.k, s.p)] = loaded
        quad_sum += loaded.ar_loaded + loaded.ai_loaded
    return LoadedRegion(n=n, region=region, zeta=zeta, pairs=pairs, quad_sum=quad_sum)


def eigenvalue_ranges(splits) -> dict:
    """JSON-serializable summary of per-(k, p) eigenvalue extremes (debug aid)."""
    out = {}
    for s in splits:
        ar_eigs = np.linalg.eigvalsh(s.ar)
        ai_eigs = np.linalg.eigvalsh(s.ai)
        out[f"{s.k},{s.p}"] = {
            "ar_min": float(ar_eigs[0]),
            "ar_max": float(ar_eigs[-1]),
            "ai_min": float(ai_eigs[0]),
            "ai_max": float(ai_eigs[-1]),
        }
    return out
