"""Positive maps as entanglement witnesses, plus exact 2x2 geometry checks.

A positive map Phi detects a bipartite state rho when (Phi (x) I)(rho) has a
negative eigenvalue.  At 2x2 the partial transpose is an exact separability
criterion, which grounds the Werner-threshold, inscribed-ball and scaled-state
checks in this module; everything at d >= 3 is reported with honest
verified/unverified status.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, Optional

import numpy as np
from scipy.linalg import sqrtm

from .bodies import CapabilityError, bullet_scale
from .hermitian import (
    apply_map_tensor_id,
    assert_hermitian,
    haar_pure,
    hermitian_basis,
    maximally_mixed,
    partial_transpose,
    projector,
    random_density,
    schmidt,
)
from .rng import as_rng

__all__ = [
    "PositiveMapRep",
    "DetectionReport",
    "Verdict",
    "builtin_map",
    "map_from_callable",
    "detects",
    "is_separable_2x2",
    "robustly_entangled",
    "epsilon_entangled",
    "unitalize",
    "complete_range",
    "trace_bound_check",
    "bullet_identity_check",
    "family_coverage",
    "gurvits_barnum_check",
    "vidal_tarrach_check",
    "werner_state",
    "werner_pt_min_eig",
    "werner_threshold_bisection",
    "sample_robustly_entangled_2x2",
]

SIGN_TOL = 1e-9  # eigenvalue-sign decisions on unit-trace states


@dataclass
class PositiveMapRep:
    """Linear map on d x d matrices, stored as its real action matrix.

    The action matrix lives in the HS-orthonormal Hermitian basis, so it is
    real exactly when the map sends Hermitian to Hermitian.  Positivity is a
    recorded claim, never a verified property (provenance says who claims
    it).
    """

    d_in: int
    d_out: int
    action: np.ndarray  # (d_out^2, d_in^2) real
    claimed_positive: bool = True
    unital: bool = False
    trace_preserving: bool = False
    provenance: str = "unverified"  # "builtin" | "constructed" | "unverified"
    label: str = ""
    _basis_in: np.ndarray = field(init=False, repr=False)
    _basis_out: np.ndarray = field(init=False, repr=False)

    def __post_init__(self) -> None:
        self.action = np.asarray(self.action, dtype=float)
        if self.action.shape != (self.d_out ** 2, self.d_in ** 2):
            raise ValueError("action matrix shape mismatch")
        self._basis_in = hermitian_basis(self.d_in)
        self._basis_out = hermitian_basis(self.d_out)
        if self.unital:
            err = np.abs(self(np.eye(self.d_in)) - np.eye(self.d_out)).max()
            if err > 1e-10:
                raise ValueError(f"unital flag set but Phi(Id) deviates by {err:.2e}")

    def apply_hermitian(self, x: np.ndarray) -> np.ndarray:
        coords = np.einsum("kij,ji->k", self._basis_in, x).real
        return np.einsum("k,kij->ij", self.action @ coords, self._basis_out)

    def __call__(self, x: np.ndarray) -> np.ndarray:
        x = np.asarray(x, dtype=complex)
        h = (x + x.conj().T) / 2
        s = (x - x.conj().T) / 2j
        return self.apply_hermitian(h) + 1j * self.apply_hermitian(s)

    def to_json(self) -> dict:
        return {
            "dIn": self.d_in,
            "dOut": self.d_out,
            "action": self.action.tolist(),
            "flags": {
                "claimedPositive": self.claimed_positive,
                "unital": self.unital,
                "tracePreserving": self.trace_preserving,
            },
            "provenance": self.provenance,
            "label": self.label,
        }

    @classmethod
    def from_json(cls, obj: dict) -> "PositiveMapRep":
        f = obj["flags"]
        return cls(d_in=obj["dIn"], d_out=obj["dOut"],
                   action=np.array(obj["action"]),
                   claimed_positive=f["claimedPositive"], unital=f["unital"],
                   trace_preserving=f["tracePreserving"],
                   provenance=obj.get("provenance", "unverified"),
                   label=obj.get("label", ""))


def map_from_callable(phi: Callable[[np.ndarray], np.ndarray], d_in: int,
                      d_out: Optional[int] = None, **flags) -> PositiveMapRep:
    """Build the real action matrix of phi from its values on the basis."""
    d_out = d_in if d_out is None else d_out
    basis_in = hermitian_basis(d_in)
    basis_out = hermitian_basis(d_out)
    cols = []
    for b in basis_in:
        img = np.asarray(phi(b), dtype=complex)
        img = assert_hermitian(img)
        cols.append(np.einsum("kij,ji->k", basis_out, img).real)
    return PositiveMapRep(d_in=d_in, d_out=d_out, action=np.array(cols).T, **flags)


def _choi_d3(x: np.ndarray) -> np.ndarray:
    """Positive non-completely-positive map on 3 x 3 matrices.

    Diagonal gains one cyclic neighbor, off-diagonal flips sign; positivity
    is exercised numerically in the test suite (sampled pure inputs).
    """
    d = np.diag(x)
    out = -x.astype(complex).copy()
    for i in range(3):
        out[i, i] = d[i] + d[(i + 1) % 3]
    return out


def builtin_map(name: str, d: int = 2, seed: int = 0, kraus_count: int = 3) -> PositiveMapRep:
    """Named maps: identity | transpose | reduction | choi-d3 | random-unital-cp."""
    if name == "identity":
        return map_from_callable(lambda x: x, d, claimed_positive=True, unital=True,
                                 trace_preserving=True, provenance="builtin",
                                 label=f"identity(d={d})")
    if name == "transpose":
        return map_from_callable(lambda x: x.T, d, claimed_positive=True, unital=True,
                                 trace_preserving=True, provenance="builtin",
                                 label=f"transpose(d={d})")
    if name == "reduction":
        return map_from_callable(lambda x: np.trace(x) * np.eye(d) - x, d,
                                 claimed_positive=True, unital=False,
                                 trace_preserving=False, provenance="builtin",
                                 label=f"reduction(d={d})")
    if name == "choi-d3":
        if d != 3:
            raise ValueError("choi-d3 requires d=3")
        return map_from_callable(_choi_d3, 3, claimed_positive=True, unital=False,
                                 trace_preserving=False, provenance="builtin",
                                 label="choi-d3")
    if name == "random-unital-cp":
        rng = as_rng(seed)
        kraus = [
            (rng.standard_normal((d, d)) + 1j * rng.standard_normal((d, d))) / math.sqrt(2)
            for _ in range(kraus_count)
        ]
        s = sum(a @ a.conj().T for a in kraus)
        s_inv_half = np.linalg.inv(np.asarray(sqrtm(s), dtype=complex))
        kraus = [s_inv_half @ a for a in kraus]

        def phi(x, ks=tuple(kraus)):
            return sum(a @ x @ a.conj().T for a in ks)

        return map_from_callable(phi, d, claimed_positive=True, unital=True,
                                 trace_preserving=False, provenance="builtin",
                                 label=f"random-unital-cp(d={d}, seed={seed})")
    raise ValueError(f"unknown builtin map {name!r}")


# ---------------------------------------------------------------------------
# detection


def detects(phi: PositiveMapRep, rho: np.ndarray, tol: float = SIGN_TOL) -> tuple[bool, float]:
    """True iff lambda_min((Phi (x) I) rho) < -tol."""
    d = phi.d_in
    if rho.shape != (d * d, d * d):
        raise ValueError(f"state must be {d * d} x {d * d} for this map")
    if phi.d_out != phi.d_in:
        raise ValueError("detection needs a square map")
    out = apply_map_tensor_id(phi, rho, d)
    lam_min = float(np.linalg.eigvalsh(assert_hermitian(out, tol=1e-8))[0])
    return lam_min < -tol, lam_min


@dataclass
class DetectionReport:
    state_id: str
    family_size: int
    detected_by: list[int]
    min_eigenvalues: list[float]

    @property
    def verdict(self) -> str:
        return "detected" if self.detected_by else "undetected"

    def to_json(self) -> dict:
        return {"stateId": self.state_id, "familySize": self.family_size,
                "detectedBy": self.detected_by, "minEigenvalues": self.min_eigenvalues,
                "verdict": self.verdict}


def is_separable_2x2(rho: np.ndarray, tol: float = SIGN_TOL) -> bool:
    """Exact separability at 2x2: partial transpose PSD within tol."""
    if rho.shape != (4, 4):
        raise CapabilityError(
            "exact separability oracle exists only at 2x2; "
            "no silent fallback at higher dimension")
    lam = np.linalg.eigvalsh(partial_transpose(assert_hermitian(rho), 2))
    return bool(lam[0] >= -tol)


@dataclass
class Verdict:
    value: bool
    verified: bool  # False when the separability oracle is heuristic
    detail: str = ""

    def __bool__(self) -> bool:
        return self.value


def epsilon_entangled(rho: np.ndarray, eps: float, sep_oracle=None,
                      tol: float = SIGN_TOL) -> Verdict:
    """Is eps*rho + (1-eps)*rho_star entangled?

    sep_oracle(state) -> bool; defaults to the exact 2x2 test.  A
    heuristic oracle must be passed as (oracle, False) to mark the verdict
    unverified.
    """
    if not (0 <= eps <= 1):
        raise ValueError("eps must lie in [0, 1]")
    verified = True
    if sep_oracle is None:
        sep_oracle = lambda s: is_separable_2x2(s, tol)
    elif isinstance(sep_oracle, tuple):
        sep_oracle, verified = sep_oracle
    mixed = bullet_scale(eps, rho)
    return Verdict(value=not sep_oracle(mixed), verified=verified,
                   detail=f"eps={eps:g}")


def robustly_entangled(rho: np.ndarray, sep_oracle=None, tol: float = SIGN_TOL) -> Verdict:
    """Entangled even after halfway mixing toward the maximally mixed state."""
    return epsilon_entangled(rho, 0.5, sep_oracle, tol)


# ---------------------------------------------------------------------------
# normalization transforms


def unitalize(phi: PositiveMapRep) -> PositiveMapRep:
    """Congruence-normalize so the image of Id is Id.

    X maps to S Phi(X) S with S = Phi(Id)^{-1/2}; positivity is preserved
    by congruence and the output is unital within 1e-10.
    """
    d = phi.d_out
    m = assert_hermitian(phi(np.eye(phi.d_in)))
    lam = np.linalg.eigvalsh(m)
    if lam[0] < 1e-12:
        raise ValueError(
            "Phi(Id) is singular; apply complete_range first to make it invertible")
    s = np.asarray(sqrtm(np.linalg.inv(m)), dtype=complex)
    s = (s + s.conj().T) / 2
    rep = map_from_callable(lambda x: s @ phi(x) @ s, phi.d_in, d,
                            claimed_positive=phi.claimed_positive, unital=True,
                            trace_preserving=False, provenance="constructed",
                            label=f"unitalized({phi.label})")
    return rep


def complete_range(phi: PositiveMapRep) -> PositiveMapRep:
    """Add P_perp X P_perp on the kernel of Phi(Id) so the new image of Id is invertible.

    Detection verdicts are unchanged: the added block is completely positive
    and vanishes exactly where Phi(Id) does.
    """
    d_in, d_out = phi.d_in, phi.d_out
    if d_in != d_out:
        raise ValueError("range completion implemented for square maps")
    m = assert_hermitian(phi(np.eye(d_in)))
    lam, vec = np.linalg.eigh(m)
    kernel = vec[:, lam < 1e-10]
    if kernel.shape[1] == 0:
        return phi
    p_perp = kernel @ kernel.conj().T
    rep = map_from_callable(lambda x: phi(x) + p_perp @ x @ p_perp, d_in, d_out,
                            claimed_positive=phi.claimed_positive, unital=False,
                            trace_preserving=False, provenance="constructed",
                            label=f"range-completed({phi.label})")
    return rep


def trace_bound_check(phi: PositiveMapRep, samples: int, rng=0,
                      tol: float = 1e-9) -> dict:
    """For a unital map, tr[(Phi (x) I) rho] stays in [0, d] on states.

    Pure samples are also checked against the Schmidt-form evaluation
    sum_i s_i^2 tr Phi(|e_i><e_i|) for per-sample agreement.
    """
    if not phi.unital:
        raise ValueError("trace_bound_check requires a unital map; unitalize first")
    rng = as_rng(rng)
    d = phi.d_in
    lo, hi = np.inf, -np.inf
    worst_schmidt = 0.0
    for k in range(samples):
        if k % 2 == 0:
            psi = haar_pure(d * d, rng)
            rho = projector(psi)
            s, e_basis, _ = schmidt(psi, d)
            expected = sum(
                s[i] ** 2 * float(np.trace(phi(projector(e_basis[:, i]))).real)
                for i in range(d)
            )
        else:
            rho = random_density(d * d, rng)
            expected = None
        val = float(np.trace(apply_map_tensor_id(phi, rho, d)).real)
        lo, hi = min(lo, val), max(hi, val)
        if expected is not None:
            worst_schmidt = max(worst_schmidt, abs(val - expected))
    ok = lo >= -tol and hi <= d + tol and worst_schmidt <= 1e-8
    return {"minTrace": lo, "maxTrace": hi, "d": d, "samples": samples,
            "worstSchmidtMismatch": worst_schmidt, "ok": ok}


def bullet_identity_check(m: np.ndarray, tol: float = 1e-12) -> bool:
    """(t/(1+t)) . (M/t) == (M + rho_star)/(1+t) for PSD M with t = tr M > 0."""
    m = assert_hermitian(m)
    t = float(np.trace(m).real)
    if t <= 0:
        raise ValueError("trace must be positive")
    if np.linalg.eigvalsh(m)[0] < -1e-10:
        raise ValueError("input must be PSD")
    lhs = bullet_scale(t / (1 + t), m / t)
    rhs = (m + maximally_mixed(m.shape[0])) / (1 + t)
    return bool(np.abs(lhs - rhs).max() <= tol)


# ---------------------------------------------------------------------------
# families and sampling


def sample_robustly_entangled_2x2(rng=0, batch: int = 256,
                                  max_batches: int = 400) -> np.ndarray:
    """Rejection-sample a 2x2 state whose halfway mixture stays entangled.

    Haar-mixed (HS measure) candidates, accepted via the exact partial
    transpose test on the halfway mixture.
    """
    rng = as_rng(rng)
    rho_star = maximally_mixed(4)
    for _ in range(max_batches):
        cands = np.stack([random_density(4, rng) for _ in range(batch)])
        mixed = 0.5 * cands + 0.5 * rho_star
        pts = mixed.reshape(-1, 2, 2, 2, 2).transpose(0, 1, 4, 3, 2).reshape(-1, 4, 4)
        lam = np.linalg.eigvalsh(pts)[:, 0]
        hits = np.nonzero(lam < -SIGN_TOL)[0]
        if hits.size:
            return cands[hits[0]]
    raise RuntimeError("rejection sampler exhausted its batch budget")


def family_coverage(family: list[PositiveMapRep], state_sampler, n_states: int,
                    rng=0, tol: float = SIGN_TOL) -> dict:
    """Fraction of sampled states detected by at least one family member."""
    if not family:
        raise ValueError("family must be nonempty")
    rng = as_rng(rng)
    per_map = [0] * len(family)
    covered = 0
    reports = []
    for k in range(n_states):
        rho = state_sampler(rng)
        hit = []
        eigs = []
        for i, phi in enumerate(family):
            det, lam = detects(phi, rho, tol)
            eigs.append(lam)
            if det:
                per_map[i] += 1
                hit.append(i)
        if hit:
            covered += 1
        reports.append(DetectionReport(f"sample-{k}", len(family), hit, eigs))
    return {"nStates": n_states, "coverage": covered / n_states,
            "perMapCounts": per_map, "reports": reports}


# ---------------------------------------------------------------------------
# Werner family and d=2 ball checks


def werner_state(w: float) -> np.ndarray:
    """w |Phi+><Phi+| + (1-w) rho_star on C^2 (x) C^2."""
    phi_plus = np.array([1, 0, 0, 1], dtype=complex) / math.sqrt(2)
    return w * projector(phi_plus) + (1 - w) * maximally_mixed(4)


def werner_pt_min_eig(w: float) -> float:
    """Smallest partial-transpose eigenvalue, computed by brute force."""
    return float(np.linalg.eigvalsh(partial_transpose(werner_state(w), 2))[0])


def werner_threshold_bisection(tol: float = 1e-12) -> float:
    """The w where the family crosses out of separability (exactly 1/3)."""
    lo, hi = 0.0, 1.0  # separable at 0, entangled at 1
    while hi - lo > tol:
        mid = (lo + hi) / 2
        if werner_pt_min_eig(mid) >= 0:
            lo = mid
        else:
            hi = mid
    return (lo + hi) / 2


def gurvits_barnum_check(d: int, samples: int, rng=0) -> dict:
    """States on the inscribed-ball boundary of Sep are all separable (d=2).

    Radius 1/sqrt(d^2 (d^2 - 1)) around rho_star in HS norm; every sampled
    boundary state must pass the exact 2x2 test.
    """
    if d != 2:
        raise CapabilityError("exact separability oracle only at d=2")
    rng = as_rng(rng)
    m = d * d
    r = 1.0 / math.sqrt(d * d * (d * d - 1))
    rho_star = maximally_mixed(m)
    failures = 0
    worst = np.inf
    for _ in range(samples):
        a = gue_traceless(m, rng)
        state = rho_star + r * a / hs_norm(a)
        lam = np.linalg.eigvalsh(partial_transpose(state, 2))[0]
        worst = min(worst, float(lam))
        if lam < -SIGN_TOL:
            failures += 1
    return {"d": d, "radius": r, "samples": samples, "failures": failures,
            "worstPtEig": float(worst), "ok": failures == 0}


def vidal_tarrach_check(d: int, samples: int, rng=0) -> dict:
    """2/(2+d^2) . rho is separable for every state rho (checked at d=2).

    Alternates pure and HS-random mixed samples; also pins the boundary
    case where the scaled maximally entangled state lands exactly on the
    partial-transpose zero eigenvalue.
    """
    if d != 2:
        raise CapabilityError("exact separability oracle only at d=2")
    rng = as_rng(rng)
    factor = 2.0 / (2.0 + d * d)
    failures = 0
    for k in range(samples):
        rho = projector(haar_pure(d * d, rng)) if k % 2 == 0 else random_density(d * d, rng)
        if not is_separable_2x2(bullet_scale(factor, rho)):
            failures += 1
    phi_plus = np.array([1, 0, 0, 1], dtype=complex) / math.sqrt(2)
    boundary = bullet_scale(factor, projector(phi_plus))
    boundary_eig = float(np.linalg.eigvalsh(partial_transpose(boundary, 2))[0])
    return {"d": d, "factor": factor, "samples": samples, "failures": failures,
            "boundaryPtEig": boundary_eig,
            "ok": failures == 0 and abs(boundary_eig) <= 1e-10}
