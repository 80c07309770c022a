"""Convex bodies in the trace-1 hyperplane with the maximally mixed state
as origin.

Support functions, membership with certificates, the affine rescaling
``t . rho = t*rho + (1-t)*rho_star``, polarity, inclusion certification and
asphericity, for the set of states D, the separable states Sep, HS balls
and finite state polytopes.

All support functions are taken about rho_star and only accept traceless
directions (a nonzero trace is rejected, not projected away).
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable, Optional

import numpy as np
from scipy.optimize import linprog, nnls

from .hermitian import (
    assert_hermitian,
    from_traceless_coords,
    gue_traceless,
    haar_pure,
    hermitize,
    lambda_max,
    maximally_mixed,
    projector,
    real_vec,
    top_eigvec,
    traceless_basis,
)
from .rng import as_rng

__all__ = [
    "CapabilityError",
    "StatePolytope",
    "ProductStatePolytope",
    "BodyOracle",
    "InclusionReport",
    "assert_traceless",
    "bullet_scale",
    "support_D",
    "gauge_D",
    "support_Sep",
    "polytope_support",
    "membership_polytope",
    "check_inclusion",
    "oracle_D",
    "oracle_hs_ball",
    "oracle_Sep",
    "polar_polytope",
    "support_D_polar",
    "asphericity_hsball",
]


class CapabilityError(Exception):
    """Raised when an exact decision procedure is requested outside its
    domain of validity (never silently downgraded)."""


def assert_traceless(a: np.ndarray, tol: float = 1e-12) -> np.ndarray:
    a = assert_hermitian(a)
    scale = max(1.0, float(np.linalg.norm(a)))
    if abs(np.trace(a).real) > tol * scale:
        raise ValueError("direction must be traceless")
    return a


def bullet_scale(t: float, rho: np.ndarray) -> np.ndarray:
    """Affine rescaling t*rho + (1-t)*rho_star about the maximally mixed state."""
    rho = np.asarray(rho, dtype=complex)
    m = rho.shape[0]
    if abs(np.trace(rho).real - 1.0) > 1e-9:
        raise ValueError("bullet_scale expects a trace-1 matrix")
    return t * rho + (1.0 - t) * maximally_mixed(m)


def support_D(a: np.ndarray) -> float:
    """Support function of the set of states: the top eigenvalue."""
    a = assert_traceless(a)
    return lambda_max(a)


def gauge_D(a: np.ndarray) -> float:
    """Gauge of D about rho_star: inf{t >= 0 : rho_star + A/t in D} = m*lambda_1(-A)."""
    a = assert_traceless(a)
    m = a.shape[0]
    if np.linalg.norm(a) == 0.0:
        return 0.0
    return m * lambda_max(-a)


# ---------------------------------------------------------------------------
# product support (injective norm on traceless directions)


def _contract_left(t: np.ndarray, psi: np.ndarray) -> np.ndarray:
    # M2[k,l] = <psi (x) .| A |psi (x) .>
    return np.einsum("i,ikjl,j->kl", psi.conj(), t, psi)


def _contract_right(t: np.ndarray, phi: np.ndarray) -> np.ndarray:
    # M1[i,j] = <. (x) phi| A |. (x) phi>
    return np.einsum("k,ikjl,l->ij", phi.conj(), t, phi)


def support_Sep(
    a: np.ndarray,
    d: int,
    restarts: int = 16,
    rng=0,
    max_iter: int = 200,
    tol: float = 1e-12,
) -> tuple[float, tuple[np.ndarray, np.ndarray]]:
    """Support of Sep at a traceless direction by alternating maximization.

    Fix one factor, take the top eigenvector of the contracted d x d matrix,
    swap roles; the objective never decreases.  The returned value is a
    certified lower bound on the true supremum (the iterate is a genuine
    product state); it is exact in practice for d = 2 with a few restarts
    and heuristic for d >= 3.
    """
    if restarts < 1:
        raise ValueError("restarts must be >= 1")
    a = assert_traceless(a)
    if a.shape[0] != d * d:
        raise ValueError("direction must live on C^d (x) C^d")
    rng = as_rng(rng)
    t = a.reshape(d, d, d, d)
    best_val = -np.inf
    best_pair = None
    for _ in range(restarts):
        phi = haar_pure(d, rng)
        val = -np.inf
        for _ in range(max_iter):
            m1 = hermitize(_contract_right(t, phi))
            psi = top_eigvec(m1)
            m2 = hermitize(_contract_left(t, psi))
            phi = top_eigvec(m2)
            new = float(np.real(phi.conj() @ m2 @ phi))
            if new <= val + tol:
                val = max(val, new)
                break
            val = new
        if val > best_val:
            best_val = val
            best_pair = (psi, phi)
    return best_val, best_pair


# ---------------------------------------------------------------------------
# polytopes


def _quad_form_rows(vecs: np.ndarray, h: np.ndarray) -> np.ndarray:
    """<v_n | H | v_n> for each row v_n, via matmul (fast on large row sets)."""
    return ((vecs.conj() @ h) * vecs).sum(axis=1).real


def _proj_features(vecs: np.ndarray) -> np.ndarray:
    """Real (N, d^2) coordinates of the projectors |v_n><v_n|.

    Paired with _herm_coeffs so that features @ coeffs(H) = <v_n|H|v_n>;
    one real matvec replaces N complex quadratic forms.
    """
    d = vecs.shape[1]
    cols = [np.abs(vecs[:, k]) ** 2 for k in range(d)]
    for k in range(d):
        for l in range(k + 1, d):
            z = vecs[:, k].conj() * vecs[:, l]
            cols.append(2 * z.real)
            cols.append(-2 * z.imag)
    return np.column_stack(cols)


def _herm_coeffs(h: np.ndarray) -> np.ndarray:
    d = h.shape[0]
    c = [h[k, k].real for k in range(d)]
    for k in range(d):
        for l in range(k + 1, d):
            c.append(h[k, l].real)
            c.append(h[k, l].imag)
    return np.array(c)


@dataclass
class StatePolytope:
    """Convex hull of pure-state projectors |psi_i><psi_i| inside D."""

    dim: int
    vertices: np.ndarray  # (N, dim) complex unit rows
    label: str = ""

    def __post_init__(self) -> None:
        v = np.asarray(self.vertices, dtype=complex)
        if v.ndim != 2 or v.shape[0] < 1 or v.shape[1] != self.dim:
            raise ValueError("vertices must be a nonempty (N, dim) array")
        norms = np.linalg.norm(v, axis=1)
        if np.abs(norms - 1.0).max() > 1e-12:
            raise ValueError("polytope vertices must be unit vectors")
        self.vertices = v

    @property
    def n_vertices(self) -> int:
        return self.vertices.shape[0]

    def vertex_values(self, a: np.ndarray) -> np.ndarray:
        """<psi_i|A|psi_i> for all vertices, vectorized."""
        return _quad_form_rows(self.vertices, a)

    def to_json(self) -> dict:
        return {
            "dim": self.dim,
            "vertices": [[v.real.tolist(), v.imag.tolist()] for v in self.vertices],
            "label": self.label,
        }

    @classmethod
    def from_json(cls, obj: dict) -> "StatePolytope":
        verts = np.array([np.array(re) + 1j * np.array(im) for re, im in obj["vertices"]])
        return cls(dim=int(obj["dim"]), vertices=verts, label=obj.get("label", ""))


@dataclass
class ProductStatePolytope:
    """Implicit polytope conv{|f_i (x) g_j><...|} over all factor pairs.

    Stored through its factor lists, so nets with ~10^5 factors (10^10
    implied vertices) stay representable.  Support evaluation enumerates
    pairs exactly when feasible and otherwise uses discrete alternating
    maximization over the factor set, which yields a certified lower bound.
    """

    d: int
    left: np.ndarray  # (N, d) complex unit rows
    right: np.ndarray
    label: str = ""
    exact_pair_limit: int = 4_000_000

    def __post_init__(self) -> None:
        for arr in (self.left, self.right):
            if np.abs(np.linalg.norm(arr, axis=1) - 1.0).max() > 1e-12:
                raise ValueError("factors must be unit vectors")
        self._feat_left = _proj_features(self.left)
        self._feat_right = _proj_features(self.right)

    @property
    def dim(self) -> int:
        return self.d * self.d

    @property
    def n_vertices(self) -> int:
        return self.left.shape[0] * self.right.shape[0]

    def support(self, a: np.ndarray, restarts: int = 4, sweeps: int = 24) -> float:
        t = a.reshape(self.d, self.d, self.d, self.d)
        nl, nr = self.left.shape[0], self.right.shape[0]
        if nl * nr <= self.exact_pair_limit:
            best = -np.inf
            for psi in self.left:
                m2 = _contract_left(t, psi)
                vals = self._feat_right @ _herm_coeffs(m2)
                best = max(best, float(vals.max()))
            return best
        return self._support_alternating(a, t, restarts, sweeps)

    def _support_alternating(self, a: np.ndarray, t: np.ndarray, restarts: int, sweeps: int) -> float:
        # starts: round the continuous product optimum onto the factor sets,
        # plus a few spread-out factor picks
        starts: list[np.ndarray] = []
        _, (psi_c, phi_c) = support_Sep(a, self.d, restarts=max(2, restarts), rng=0)
        overl = np.abs(self.left @ psi_c.conj())
        starts.append(self.left[int(np.argmax(overl))])
        step = max(1, self.left.shape[0] // max(1, restarts - 1))
        for k in range(0, self.left.shape[0], step):
            starts.append(self.left[k])
            if len(starts) >= restarts + 1:
                break
        best = -np.inf
        for psi in starts:
            val = -np.inf
            for _ in range(sweeps):
                m2 = _contract_left(t, psi)
                vals_r = self._feat_right @ _herm_coeffs(m2)
                phi = self.right[int(np.argmax(vals_r))]
                m1 = _contract_right(t, phi)
                vals_l = self._feat_left @ _herm_coeffs(m1)
                j = int(np.argmax(vals_l))
                psi = self.left[j]
                new = float(vals_l[j])
                if new <= val + 1e-14:
                    break
                val = new
            best = max(best, val)
        return best


def polytope_support(p, a: np.ndarray) -> float:
    """Max of <psi_i|A|psi_i> over the polytope vertices."""
    a = assert_traceless(a)
    if a.shape[0] != p.dim:
        raise ValueError("dimension mismatch")
    if isinstance(p, ProductStatePolytope):
        return p.support(a)
    if p.n_vertices < 1:
        raise ValueError("empty polytope")
    return float(p.vertex_values(a).max())


# ---------------------------------------------------------------------------
# membership with certificates


@dataclass
class MembershipResult:
    inside: bool
    weights: Optional[np.ndarray] = None  # sparse: (indices, values)
    weight_indices: Optional[np.ndarray] = None
    separating_direction: Optional[np.ndarray] = None
    residual: float = np.nan

    def reconstruct(self, p: StatePolytope) -> np.ndarray:
        verts = p.vertices[self.weight_indices]
        return np.einsum("n,ni,nj->ij", self.weights, verts, verts.conj())


def _vertex_realvecs(p: StatePolytope) -> np.ndarray:
    v = p.vertices
    proj_re = np.einsum("ni,nj->nij", v.real, v.real) + np.einsum("ni,nj->nij", v.imag, v.imag)
    proj_im = np.einsum("ni,nj->nij", v.imag, v.real) - np.einsum("ni,nj->nij", v.real, v.imag)
    n, m = v.shape[0], v.shape[1]
    return np.concatenate([proj_re.reshape(n, m * m), proj_im.reshape(n, m * m)], axis=1)


def _direction_from_residual(r: np.ndarray, m: int) -> np.ndarray:
    h = r[: m * m].reshape(m, m) + 1j * r[m * m :].reshape(m, m)
    h = hermitize(h)
    h -= np.trace(h).real / m * np.eye(m)
    return h


def membership_polytope(x: np.ndarray, p: StatePolytope, tol: float) -> MembershipResult:
    """Decide whether a trace-1 Hermitian X lies in conv{|psi_i><psi_i|}.

    inside: returns convex weights reproducing X within tol (HS norm).
    outside: returns a traceless direction strictly separating X from the
    polytope by more than tol/2.

    Uses active-set least squares with column generation (Gilbert/Wolfe
    style); each answer carries an explicitly verified certificate.
    """
    if tol <= 0:
        raise ValueError("tol must be positive")
    x = np.asarray(x, dtype=complex)
    if x.shape != (p.dim, p.dim):
        raise ValueError("dimension mismatch")
    if abs(np.trace(x).real - 1.0) > 1e-9:
        raise ValueError("membership expects a trace-1 matrix")
    m = p.dim
    vmat = _vertex_realvecs(p)  # (N, 2 m^2)
    xv = real_vec(x)
    n = vmat.shape[0]

    lam = 4.0  # weight of the sum-to-one row in the least squares system
    order = np.argsort(vmat @ xv)[::-1]
    k0 = min(n, 4 * (m * m + 2))
    active = list(order[:k0])
    active_set = set(active)

    for _ in range(200):
        sub = vmat[active]
        a_aug = np.vstack([sub.T, lam * np.ones(len(active))])
        b_aug = np.concatenate([xv, [lam]])
        w, _ = nnls(a_aug, b_aug)
        sw = w.sum()
        if sw > 1e-12:
            w = w / sw
        hull_pt = sub.T @ w
        resid = xv - hull_pt
        rn = float(np.linalg.norm(resid))
        if rn <= tol:
            keep = w > 1e-15
            return MembershipResult(
                inside=True,
                weights=w[keep],
                weight_indices=np.array(active)[keep],
                residual=rn,
            )
        # most promising vertex in the residual direction
        scores = vmat @ resid
        best = int(np.argmax(scores))
        margin = float(xv @ resid) - float(scores[best])
        if margin > tol / 2:
            direction = _direction_from_residual(resid, m)
            return MembershipResult(inside=False, separating_direction=direction, residual=rn)
        if best in active_set:
            # stalled: tighten by dropping zero-weight columns and retrying
            nz = [i for i, wi in zip(active, w) if wi > 1e-15]
            if len(nz) == len(active):
                break
            active = nz + [best]
            active_set = set(active)
        else:
            active.append(best)
            active_set.add(best)

    # exact LP fallback for small vertex counts
    if n <= 20000:
        res = linprog(
            c=np.zeros(n),
            A_eq=np.vstack([vmat.T, np.ones(n)]),
            b_eq=np.concatenate([xv, [1.0]]),
            bounds=[(0, None)] * n,
            method="highs",
        )
        if res.status == 0:
            w = res.x
            rn = float(np.linalg.norm(vmat.T @ w - xv))
            keep = w > 1e-15
            return MembershipResult(
                inside=True,
                weights=w[keep] / w[keep].sum(),
                weight_indices=np.flatnonzero(keep),
                residual=rn,
            )
    raise RuntimeError("membership_polytope failed to reach a certified decision")


# ---------------------------------------------------------------------------
# body oracles


@dataclass
class BodyOracle:
    """A convex body given through its support function about rho_star.

    support(A) evaluates sup over the body of tr(A*(rho - rho_star));
    support_witness(A) returns a maximizing state (supergradient source);
    membership(X, tol) returns +1 (inside), -1 (outside) or 0 (unknown).
    """

    dim: int
    label: str
    support: Callable[[np.ndarray], float]
    support_witness: Optional[Callable[[np.ndarray], np.ndarray]] = None
    membership: Optional[Callable[[np.ndarray, float], int]] = None
    heuristic: bool = False  # True if support is only a certified lower bound


def oracle_D(m: int) -> BodyOracle:
    def member(x, tol):
        lam = np.linalg.eigvalsh(assert_hermitian(x))
        return 1 if lam[0] >= -tol else -1

    return BodyOracle(
        dim=m,
        label=f"D({m})",
        support=support_D,
        support_witness=lambda a: projector(top_eigvec(assert_traceless(a))),
        membership=member,
    )


def oracle_hs_ball(m: int, radius: float = 1.0) -> BodyOracle:
    def support(a):
        a = assert_traceless(a)
        return radius * float(np.linalg.norm(a))

    def witness(a):
        a = assert_traceless(a)
        n = np.linalg.norm(a)
        if n == 0:
            return maximally_mixed(m)
        return maximally_mixed(m) + radius * a / n

    def member(x, tol):
        return 1 if np.linalg.norm(x - maximally_mixed(m)) <= radius + tol else -1

    return BodyOracle(dim=m, label=f"B_HS({m}, r={radius:g})", support=support, support_witness=witness, membership=member)


def oracle_Sep(d: int, restarts: int = 16, rng=0) -> BodyOracle:
    rng = as_rng(rng)

    def support(a):
        val, _ = support_Sep(a, d, restarts=restarts, rng=rng)
        return val

    def witness(a):
        _, (psi, phi) = support_Sep(a, d, restarts=restarts, rng=rng)
        return projector(np.kron(psi, phi))

    return BodyOracle(
        dim=d * d,
        label=f"Sep({d}x{d})",
        support=support,
        support_witness=witness,
        heuristic=d >= 3,
    )


# ---------------------------------------------------------------------------
# inclusion certification


@dataclass
class InclusionReport:
    factor: float
    status: str  # "certified" | "not-falsified" | "falsified"
    witness_direction: Optional[np.ndarray] = None
    gap: float = np.inf  # min over tested A of h_L(A) - t*h_K(A)
    directions_tested: int = 0
    restarts: int = 0
    detail: str = ""

    def to_json(self) -> dict:
        from .hermitian import matrix_to_json

        return {
            "factor": self.factor,
            "status": self.status,
            "gap": None if not np.isfinite(self.gap) else self.gap,
            "directionsTested": self.directions_tested,
            "restarts": self.restarts,
            "detail": self.detail,
            "witnessDirection": None
            if self.witness_direction is None
            else matrix_to_json(self.witness_direction),
        }


def _normalize_traceless(a: np.ndarray) -> np.ndarray:
    m = a.shape[0]
    a = hermitize(a)
    a = a - np.trace(a).real / m * np.eye(m)
    n = np.linalg.norm(a)
    return a / n if n > 0 else a


def _ascent_falsify(
    t: float,
    support_k: Callable[[np.ndarray], float],
    witness_k: Callable[[np.ndarray], np.ndarray],
    support_l: Callable[[np.ndarray], float],
    witness_l: Callable[[np.ndarray], np.ndarray],
    m: int,
    directions: int,
    restarts: int,
    rng,
    tol: float,
    max_iter: int = 60,
) -> tuple[float, np.ndarray, int]:
    """Maximize f(A) = t*h_K(A) - h_L(A) over unit traceless directions.

    Supergradient ascent with backtracking; returns (best value, argmax,
    directions evaluated).
    """
    rng = as_rng(rng)
    tested = 0

    def f(a):
        return t * support_k(a) - support_l(a)

    best_val, best_a = -np.inf, None
    probes = []
    for _ in range(directions):
        a = _normalize_traceless(gue_traceless(m, rng))
        v = f(a)
        tested += 1
        probes.append((v, a))
        if v > best_val:
            best_val, best_a = v, a
    probes.sort(key=lambda p: -p[0])

    rho_star = maximally_mixed(m)
    for r in range(restarts):
        if r < len(probes):
            a = probes[r][1]
            val = probes[r][0]
        else:
            a = _normalize_traceless(gue_traceless(m, rng))
            val = f(a)
            tested += 1
        step = 0.5
        for _ in range(max_iter):
            g = t * (witness_k(a) - rho_star) - (witness_l(a) - rho_star)
            g = hermitize(g)
            g = g - np.trace(g).real / m * np.eye(m)
            improved = False
            while step > 1e-7:
                cand = _normalize_traceless(a + step * g)
                v = f(cand)
                tested += 1
                if v > val + 1e-14:
                    a, val = cand, v
                    improved = True
                    step *= 1.5
                    break
                step *= 0.5
            if not improved:
                break
        if val > best_val:
            best_val, best_a = val, a
    return best_val, best_a, tested


def check_inclusion(
    t: float,
    k_body,
    l_body,
    directions: int = 128,
    restarts: int = 64,
    rng=0,
    tol: float = 1e-9,
) -> InclusionReport:
    """Test the inclusion t . K subset L.

    Exact regimes: polytope into D (vertex PSD check) and polytope into
    polytope (LP membership of every scaled vertex) -- these certify or
    falsify.  Oracle into polytope is a falsification search only and can
    at best report not-falsified.
    """
    k_is_poly = isinstance(k_body, StatePolytope)
    l_is_poly = isinstance(l_body, (StatePolytope, ProductStatePolytope))
    l_is_plain_poly = isinstance(l_body, StatePolytope)

    # (a) polytope into D: exact PSD check of every scaled vertex
    if k_is_poly and isinstance(l_body, BodyOracle) and l_body.label.startswith("D("):
        m = k_body.dim
        worst = np.inf
        worst_vec = None
        for psi in k_body.vertices:
            scaled = bullet_scale(t, projector(psi))
            lam, u = np.linalg.eigh(scaled)
            if lam[0] < worst:
                worst = lam[0]
                worst_vec = u[:, 0]
        if worst >= -1e-10:
            return InclusionReport(factor=t, status="certified", gap=float(worst),
                                   directions_tested=k_body.n_vertices, detail="vertex PSD check")
        witness = maximally_mixed(m) - projector(worst_vec)
        return InclusionReport(factor=t, status="falsified", witness_direction=witness,
                               gap=float(worst), directions_tested=k_body.n_vertices,
                               detail="scaled vertex leaves PSD")

    # (b) polytope into polytope: exact LP membership per scaled vertex
    if k_is_poly and l_is_plain_poly:
        for psi in k_body.vertices:
            scaled = bullet_scale(t, projector(psi))
            res = membership_polytope(scaled, l_body, tol=max(tol, 1e-9))
            if not res.inside:
                a = res.separating_direction
                gap = polytope_support(l_body, a) - t * polytope_support(k_body, a)
                return InclusionReport(factor=t, status="falsified", witness_direction=a,
                                       gap=float(gap), directions_tested=k_body.n_vertices,
                                       detail="scaled vertex rejected by LP membership")
        return InclusionReport(factor=t, status="certified",
                               directions_tested=k_body.n_vertices, gap=0.0,
                               detail="all scaled vertices accepted by LP membership")

    # (c) oracle into polytope: heuristic falsification search
    if isinstance(k_body, BodyOracle) and l_is_poly:
        if k_body.support_witness is None:
            raise CapabilityError("oracle K must expose a support witness for the ascent search")
        m = k_body.dim

        def support_l(a):
            return polytope_support(l_body, a)

        def witness_l(a):
            if isinstance(l_body, StatePolytope):
                vals = l_body.vertex_values(a)
                v = l_body.vertices[int(np.argmax(vals))]
                return projector(v)
            # product polytope: use the best factor pair from a sweep
            t4 = a.reshape(l_body.d, l_body.d, l_body.d, l_body.d)
            psi = l_body.left[0]
            for _ in range(4):
                m2 = _contract_left(t4, psi)
                vals_r = np.einsum("nk,kl,nl->n", l_body.right.conj(), m2, l_body.right).real
                phi = l_body.right[int(np.argmax(vals_r))]
                m1 = _contract_right(t4, phi)
                vals_l = np.einsum("ni,ij,nj->n", l_body.left.conj(), m1, l_body.left).real
                psi = l_body.left[int(np.argmax(vals_l))]
            return projector(np.kron(psi, phi))

        best, arg, tested = _ascent_falsify(
            t, k_body.support, k_body.support_witness, support_l, witness_l,
            m, directions, restarts, rng, tol,
        )
        if best > tol:
            return InclusionReport(factor=t, status="falsified", witness_direction=arg,
                                   gap=float(-best), directions_tested=tested, restarts=restarts,
                                   detail="ascent found a violating direction")
        return InclusionReport(factor=t, status="not-falsified", gap=float(-best),
                               directions_tested=tested, restarts=restarts,
                               detail="falsification search exhausted its budget")

    raise CapabilityError(
        f"no exact or search procedure for this pair: {type(k_body).__name__} into {type(l_body).__name__}"
    )


# ---------------------------------------------------------------------------
# polarity


def polar_polytope(p: StatePolytope, interior_margin: float = 1e-9) -> BodyOracle:
    """Polar of a state polytope about rho_star, as a support/membership oracle.

    P deg = {X : tr((X - rho_star)(Y - rho_star)) <= 1 for all Y in P}; the
    support at a direction is computed by linear programming over the
    vertex constraints.  Requires rho_star in the interior of P.
    """
    m = p.dim
    basis = traceless_basis(m)
    n = basis.shape[0]
    rho_star = maximally_mixed(m)
    # vertex coordinates in the traceless basis
    pts = np.array([
        np.einsum("kij,ji->k", basis, projector(v) - rho_star).real for v in p.vertices
    ])

    # interior check: no direction u has all vertices on its non-positive side
    res = linprog(
        c=np.concatenate([np.zeros(n), [-1.0]]),
        A_ub=np.hstack([pts, np.ones((pts.shape[0], 1))]),
        b_ub=np.zeros(pts.shape[0]),
        bounds=[(-1, 1)] * n + [(0, None)],
        method="highs",
    )
    if res.status == 0 and -res.fun > interior_margin:
        raise ValueError("degenerate polar: rho_star is not interior to the polytope")

    def support(a):
        a = assert_traceless(a)
        coeff = np.einsum("kij,ji->k", basis, a).real
        r = linprog(c=-coeff, A_ub=pts, b_ub=np.ones(pts.shape[0]),
                    bounds=[(None, None)] * n, method="highs")
        if r.status != 0:
            raise RuntimeError(f"polar support LP failed with status {r.status}")
        return float(-r.fun)

    def witness(a):
        a = assert_traceless(a)
        coeff = np.einsum("kij,ji->k", basis, a).real
        r = linprog(c=-coeff, A_ub=pts, b_ub=np.ones(pts.shape[0]),
                    bounds=[(None, None)] * n, method="highs")
        if r.status != 0:
            raise RuntimeError(f"polar support LP failed with status {r.status}")
        return rho_star + from_traceless_coords(r.x, basis)

    def member(x, tol):
        b = x - rho_star
        vals = pts @ np.einsum("kij,ji->k", basis, b).real
        return 1 if vals.max() <= 1 + tol else -1

    return BodyOracle(dim=m, label=f"polar({p.label or 'P'})", support=support,
                      support_witness=witness, membership=member)


def support_D_polar(a: np.ndarray) -> float:
    """Support of D deg = {rho_star + B : tr B = 0, lambda_1(B) <= 1}.

    Computed by an LP over eigenvalue allocations (the constraint set is
    unitarily invariant, so the optimum aligns with the eigenbasis of A);
    an independent route to the identity D deg = (-m) . D.
    """
    a = assert_traceless(a)
    m = a.shape[0]
    lam = np.sort(np.linalg.eigvalsh(a))[::-1]
    res = linprog(
        c=-lam,
        A_eq=np.ones((1, m)),
        b_eq=[0.0],
        bounds=[(None, 1.0)] * m,
        method="highs",
    )
    if res.status != 0:
        raise RuntimeError(f"polar support LP failed with status {res.status}")
    return float(-res.fun)


# ---------------------------------------------------------------------------
# asphericity


@dataclass
class Asphericity:
    body: str
    inradius: float
    outradius: float
    ratio: float
    checks: dict = field(default_factory=dict)


def asphericity_hsball(body: str, size: int, rng=0, samples: int = 200, verify: bool = True) -> Asphericity:
    """HS-ball inradius/outradius/ratio for D(m) or Sep(d).

    D values are re-verified numerically: the outradius is attained at every
    pure state, the inradius at directions rho_star - |psi><psi| (included in
    the sampled direction set).  The Sep inradius is a known result whose
    numeric verification lives in the witness module (d = 2 only).
    """
    rng = as_rng(rng)
    if body == "D":
        m = size
        if m < 2:
            raise ValueError("m must be >= 2")
        inr = 1.0 / np.sqrt(m * (m - 1))
        outr = np.sqrt((m - 1) / m)
        checks = {}
        if verify:
            rho_star = maximally_mixed(m)
            # outradius: ||P - rho_star|| is the same for every pure state
            dists = [np.linalg.norm(projector(haar_pure(m, rng)) - rho_star) for _ in range(samples)]
            checks["outradius_max_sampled"] = float(np.max(dists))
            checks["outradius_err"] = abs(float(np.max(dists)) - outr)
            # inradius: min boundary distance over directions, extremal included
            dirs = [gue_traceless(m, rng) for _ in range(samples)]
            dirs.append(rho_star - projector(haar_pure(m, rng)))
            bd = []
            for a in dirs:
                g = gauge_D(a)
                if g > 0:
                    bd.append(np.linalg.norm(a) / g)
            checks["inradius_min_sampled"] = float(np.min(bd))
            checks["inradius_err"] = abs(float(np.min(bd)) - inr)
            checks["no_boundary_point_inside_inball"] = bool(np.min(bd) >= inr - 1e-9)
        return Asphericity("D", inr, outr, float(m - 1), checks)
    if body == "Sep":
        d = size
        if d < 2:
            raise ValueError("d must be >= 2")
        m2 = d * d
        inr = 1.0 / np.sqrt(m2 * (m2 - 1))
        outr = np.sqrt((m2 - 1) / m2)
        checks = {"inradius_verified": d == 2,
                  "note": "inradius is the Gurvits-Barnum ball; numeric check at d=2 via the witness module"}
        return Asphericity("Sep", inr, outr, float(m2 - 1), checks)
    raise CapabilityError(f"unsupported body {body!r}")
