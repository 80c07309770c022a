"""Polytope approximations of the state set and the separable set.

Deterministic net constructions with guaranteed dilation factors
(1 - 2*m*delta for D, 1 - 4*eps*d^2 for Sep via product nets), random-net
constructions with a target factor tested by LP membership and adversarial
search, spherical-cap sampling with its average-projector statistics, and
Monte Carlo verification of the scalar and matrix Hoeffding tail bounds.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Optional

import numpy as np
from scipy import integrate

from .bodies import (
    InclusionReport,
    ProductStatePolytope,
    StatePolytope,
    bullet_scale,
    check_inclusion,
    membership_polytope,
    oracle_D,
    polytope_support,
    support_Sep,
)
from .hermitian import gue_traceless, haar_pure_batch, maximally_mixed, projector
from .nets import build_net, complex_to_real, hopf_net, real_to_complex
from .rng import as_rng

__all__ = [
    "ApproxCertificate",
    "CapSpec",
    "net_polytope_D",
    "product_net_polytope_Sep",
    "test_product_chain",
    "random_net_D",
    "doubling_sweep_random_net",
    "conspiracy_net",
    "cap_measure_fraction",
    "sample_cap",
    "cap_alpha_estimate",
    "cap_alpha_quadrature",
    "cap_average_matrix",
    "hoeffding_tail_check",
    "matrix_hoeffding_check",
]


@dataclass
class ApproxCertificate:
    guaranteed_factor: float
    mechanism: str  # "separation-net" | "product-net" | "random-net"
    parameters: dict
    test_outcome: Optional[InclusionReport] = None

    def to_json(self) -> dict:
        return {
            "guaranteedFactor": self.guaranteed_factor,
            "mechanism": self.mechanism,
            "parameters": self.parameters,
            "testOutcome": None if self.test_outcome is None else self.test_outcome.to_json(),
        }


def _sphere_net_complex(m: int, eps: float, rng) -> tuple[np.ndarray, str]:
    """eps-net on the unit sphere of C^m, as complex rows.

    m = 2 uses the deterministic Hopf grid (certain coverage, fast at fine
    resolutions); higher m falls back to the greedy separated construction.
    """
    if m == 2:
        net = hopf_net(eps)
    else:
        net = build_net(2 * m, eps, rng)
    return net.as_complex(), net.method


def net_polytope_D(m: int, delta: float, rng=0, directions: int = 64,
                   restarts: int = 64) -> tuple[StatePolytope, ApproxCertificate]:
    """Vertex polytope from a delta-net on the sphere of C^m.

    Guarantees (1 - 2*m*delta) . D inside the hull; the certificate carries
    an adversarial falsification run at that factor.
    """
    if m == 1:
        poly = StatePolytope(1, np.array([[1.0 + 0j]]), label="D(1) point")
        cert = ApproxCertificate(1.0, "separation-net", {"m": 1, "delta": delta})
        return poly, cert
    factor = 1 - 2 * m * delta
    if not (0 < delta and factor > 0):
        raise ValueError("need 0 < delta < 1/(2m)")
    rng = as_rng(rng)
    verts, method = _sphere_net_complex(m, delta, rng)
    poly = StatePolytope(m, verts, label=f"net-D(m={m}, delta={delta:g})")
    report = check_inclusion(factor, oracle_D(m), poly,
                             directions=directions, restarts=restarts, rng=rng)
    cert = ApproxCertificate(
        factor, "separation-net",
        {"m": m, "delta": delta, "N": poly.n_vertices, "netMethod": method},
        test_outcome=report,
    )
    return poly, cert


def product_net_polytope_Sep(d: int, eps: float, rng=0) -> tuple[ProductStatePolytope, ApproxCertificate]:
    """Product polytope {|psi_i (x) psi_j>} over an eps-net on the sphere of C^d.

    Guaranteed factor 1 - 4*eps*d^2 (eps = 3/16d^2 recovers the classical
    1/4).  The chain test against the alternating-maximization lower bound
    lives in test_product_chain.
    """
    factor = 1 - 4 * eps * d * d
    if not (0 < eps and factor > 0):
        raise ValueError("need 0 < eps < 1/(4 d^2)")
    rng = as_rng(rng)
    verts, method = _sphere_net_complex(d, eps, rng)
    poly = ProductStatePolytope(d=d, left=verts, right=verts,
                                label=f"product-net-Sep(d={d}, eps={eps:g})")
    cert = ApproxCertificate(
        factor, "product-net",
        {"d": d, "eps": eps, "factorsPerSide": verts.shape[0],
         "impliedVertices": verts.shape[0] ** 2, "netMethod": method},
    )
    return poly, cert


def test_product_chain(poly: ProductStatePolytope, factor: float, n_dirs: int,
                       rng=0, tol: float = 1e-9, sep_restarts: int = 8) -> dict:
    """For sampled traceless directions check factor*h_Sep <= h_polytope + tol.

    h_Sep is a certified lower bound (alternating maximization), so any
    violation is a genuine falsification of the inclusion, never an
    optimizer artifact.
    """
    rng = as_rng(rng)
    m = poly.dim
    worst = np.inf
    violations = 0
    for _ in range(n_dirs):
        a = gue_traceless(m, rng)
        a /= np.linalg.norm(a)
        w, _ = support_Sep(a, poly.d, restarts=sep_restarts, rng=rng)
        h = poly.support(a)
        slack = h - factor * w
        worst = min(worst, slack)
        if slack < -tol:
            violations += 1
    return {"directions": n_dirs, "worstSlack": float(worst),
            "violations": violations, "ok": violations == 0}


def random_net_D(d: int, n: int, rng=0, target_eps: float = 0.75,
                 test_states: int = 100, restarts: int = 16,
                 directions: int = 64) -> tuple[StatePolytope, ApproxCertificate]:
    """Hull of n independent Haar pure states, tested against (1-eps) . D.

    The certificate records the target eps together with (i) LP membership
    of the scaled test states and (ii) an adversarial direction search;
    status is falsified or not-falsified, never certified.
    """
    rng = as_rng(rng)
    verts = haar_pure_batch(d, n, rng)
    poly = StatePolytope(d, verts, label=f"random-net-D(d={d}, N={n})")
    factor = 1 - target_eps

    report = None
    if n < d * d:
        # affine dimension deficit: the hull cannot contain any dilate of D
        witness = maximally_mixed(d) - projector(verts[0])
        report = InclusionReport(factor=factor, status="falsified",
                                 witness_direction=witness, gap=-np.inf,
                                 detail=f"{n} vertices span too small an affine subspace")
    if report is None:
        membership_fail = None
        for psi in haar_pure_batch(d, test_states, rng):
            x = bullet_scale(factor, projector(psi))
            res = membership_polytope(x, poly, tol=1e-7)
            if not res.inside:
                membership_fail = res.separating_direction
                break
        if membership_fail is not None:
            gap = polytope_support(poly, membership_fail) - factor * float(
                np.linalg.eigvalsh(membership_fail)[-1])
            report = InclusionReport(factor=factor, status="falsified",
                                     witness_direction=membership_fail, gap=gap,
                                     detail="scaled test state rejected by LP membership")
        else:
            report = check_inclusion(factor, oracle_D(d), poly,
                                     directions=directions, restarts=restarts, rng=rng)
    cert = ApproxCertificate(factor, "random-net",
                             {"d": d, "N": n, "targetEps": target_eps,
                              "testStates": test_states, "restarts": restarts},
                             test_outcome=report)
    return poly, cert


def doubling_sweep_random_net(d: int, target_eps: float, rng_seed: int = 0,
                              n_max: int = 2 ** 14, n_start: int = 4,
                              test_states: int = 100, restarts: int = 16) -> dict:
    """Doubling search for the smallest N whose random net is not falsified."""
    n = n_start
    attempts = []
    while n <= n_max:
        _, cert = random_net_D(d, n, rng=as_rng(rng_seed), target_eps=target_eps,
                               test_states=test_states, restarts=restarts)
        status = cert.test_outcome.status
        attempts.append({"N": n, "status": status})
        if status == "not-falsified":
            return {"found": True, "N": n, "seed": rng_seed, "attempts": attempts}
        n *= 2
    return {"found": False, "N": None, "seed": rng_seed, "attempts": attempts}


def conspiracy_net(n: int, rng=0, margin: float = 0.05) -> StatePolytope:
    """Net of C^2 vectors conspiring toward e_1: every |<phi_i|e_1>|^2 > 1/2 + margin.

    The maximally mixed state lies strictly outside the resulting hull.
    """
    rng = as_rng(rng)
    q = rng.uniform(0.5 + margin + 1e-6, 1.0, size=n)
    phase = np.exp(2j * np.pi * rng.uniform(size=(n, 2)))
    verts = np.stack([np.sqrt(q) * phase[:, 0], np.sqrt(1 - q) * phase[:, 1]], axis=1)
    return StatePolytope(2, verts, label=f"conspiracy(margin={margin:g})")


# ---------------------------------------------------------------------------
# spherical caps


@dataclass
class CapSpec:
    """Geodesic cap on the real unit sphere of C^d around a pure state."""

    center: np.ndarray  # complex unit vector in C^d
    theta: float  # geodesic radius in (0, pi/2)
    measure_inv: float = field(init=False)  # L = 1/sigma(cap)

    def __post_init__(self) -> None:
        if not (0 < self.theta < math.pi / 2):
            raise ValueError("theta must be in (0, pi/2)")
        self.center = np.asarray(self.center, dtype=complex)
        if abs(np.linalg.norm(self.center) - 1) > 1e-12:
            raise ValueError("cap center must be a unit vector")
        self.measure_inv = 1.0 / cap_measure_fraction(self.d, self.theta)

    @property
    def d(self) -> int:
        return self.center.shape[0]


def cap_measure_fraction(d: int, theta: float) -> float:
    """sigma(C(psi, theta)) on S^{2d-1}: int_0^theta sin^{2d-2} / int_0^pi sin^{2d-2}."""
    q = 2 * d  # real dimension
    num, _ = integrate.quad(lambda t: math.sin(t) ** (q - 2), 0, theta)
    den, _ = integrate.quad(lambda t: math.sin(t) ** (q - 2), 0, math.pi)
    return num / den


def _cap_t_sampler(d: int, theta: float, grid: int = 4096):
    """Inverse CDF of the radial density ~ sin^{2d-2}(t) on [0, theta]."""
    t = np.linspace(0.0, theta, grid)
    pdf = np.sin(t) ** (2 * d - 2)
    cdf = np.concatenate([[0.0], np.cumsum((pdf[1:] + pdf[:-1]) / 2 * np.diff(t))])
    cdf /= cdf[-1]
    # make cdf strictly increasing for interp (flat start at t=0)
    return lambda u: np.interp(u, cdf, t)


def sample_cap(cap: CapSpec, rng=0, size: Optional[int] = None) -> np.ndarray:
    """Uniform samples from the cap {phi : Re<psi|phi> >= cos theta}.

    phi = cos(t) psi + sin(t) u with u uniform on the real-orthogonal unit
    sphere to psi and t drawn from density ~ sin^{2d-2}(t) on [0, theta].
    """
    rng = as_rng(rng)
    n = 1 if size is None else size
    d = cap.d
    inv = _cap_t_sampler(d, cap.theta)
    t = inv(rng.uniform(size=n))
    psi_r = complex_to_real(cap.center)[0]
    u = rng.standard_normal((n, 2 * d))
    u -= np.outer(u @ psi_r, psi_r)
    u /= np.linalg.norm(u, axis=1, keepdims=True)
    phi_r = np.cos(t)[:, None] * psi_r[None, :] + np.sin(t)[:, None] * u
    phi = real_to_complex(phi_r)
    return phi[0] if size is None else phi


@dataclass
class CapAlphaEstimate:
    alpha_hat: float
    std_err: float
    bound: float  # theta^2 d/(d-1)
    ok: bool


def cap_alpha_estimate(cap: CapSpec, samples: int, rng=0) -> CapAlphaEstimate:
    """Estimate alpha in  cap-average = (1-alpha) . |psi><psi|  by Monte Carlo.

    alpha_hat = d (1 - mean |<psi|phi>|^2) / (d-1), with the analytic bound
    alpha <= theta^2 d/(d-1).
    """
    if samples < 1000:
        raise ValueError("samples must be >= 1000")
    d = cap.d
    if d == 1:
        raise ValueError("alpha is undefined at d=1")
    phi = sample_cap(cap, rng, size=samples)
    overlap2 = np.abs(phi @ cap.center.conj()) ** 2
    scale = d / (d - 1)
    alpha_hat = scale * (1.0 - float(overlap2.mean()))
    std_err = scale * float(overlap2.std(ddof=1)) / math.sqrt(samples)
    bound = cap.theta ** 2 * scale
    return CapAlphaEstimate(alpha_hat, std_err, bound, ok=alpha_hat <= bound + 3 * std_err)


def cap_alpha_quadrature(d: int, theta: float) -> float:
    """alpha by 1-d quadrature of the radial overlap moment.

    E|<psi|phi>|^2 = E[cos^2 t + sin^2 t / (2d-1)] under the radial density,
    since the orthogonal component is uniform on a (2d-1)-sphere.
    """
    w = lambda t: math.sin(t) ** (2 * d - 2)
    num, _ = integrate.quad(lambda t: (math.cos(t) ** 2 + math.sin(t) ** 2 / (2 * d - 1)) * w(t), 0, theta)
    den, _ = integrate.quad(w, 0, theta)
    return d / (d - 1) * (1.0 - num / den)


def cap_average_matrix(cap: CapSpec, samples: int, rng=0) -> tuple[np.ndarray, np.ndarray]:
    """Empirical mean of |phi><phi| over the cap and entrywise standard errors."""
    phi = sample_cap(cap, rng, size=samples)
    projs = np.einsum("ni,nj->nij", phi, phi.conj())
    mean = projs.mean(axis=0)
    se = np.sqrt(
        (np.abs(projs - mean) ** 2).mean(axis=0) / (samples - 1)
    )
    return mean, se


# ---------------------------------------------------------------------------
# tail bounds


@dataclass
class TailCheck:
    empirical: float
    bound: float
    std_err: float
    ok: bool
    detail: dict = field(default_factory=dict)


def hoeffding_tail_check(n: int, p: float, trials: int, rng=0) -> TailCheck:
    """Empirical P(Binomial(n,p) <= np/2) against the bound exp(-p^2 n / 2)."""
    if not (0 < p <= 1):
        raise ValueError("p must be in (0, 1]")
    rng = as_rng(rng)
    draws = rng.binomial(n, p, size=trials)
    emp = float((draws <= n * p / 2).mean())
    bound = math.exp(-p * p * n / 2)
    se = math.sqrt(max(emp * (1 - emp), 1.0 / trials) / trials)
    return TailCheck(emp, bound, se, ok=emp <= bound + 3 * se,
                     detail={"n": n, "p": p, "trials": trials})


def _op_norm_2x2_batch(h: np.ndarray) -> np.ndarray:
    a = h[:, 0, 0].real
    c = h[:, 1, 1].real
    b = h[:, 0, 1]
    r = np.sqrt(((a - c) / 2) ** 2 + np.abs(b) ** 2)
    mid = (a + c) / 2
    return np.maximum(np.abs(mid + r), np.abs(mid - r))


def matrix_hoeffding_check(d: int, theta: float, m_samples: int, t: float,
                           trials: int, rng=0, alpha_samples: int = 10 ** 6,
                           trial_chunk: int = 256) -> TailCheck:
    """Empirical tail of ||mean_k X_k||_op >= t against 2d exp(-M t^2 / 8).

    X_k = |phi_k><phi_k| - (1-alpha) . |psi><psi| with phi_k uniform in the
    cap; alpha is estimated once at high precision and frozen for the run.
    """
    if min(d, m_samples, trials) < 1 or theta <= 0 or t < 0:
        raise ValueError("parameters must be positive")
    rng = as_rng(rng)
    psi = np.zeros(d, dtype=complex)
    psi[0] = 1.0
    cap = CapSpec(psi, theta)
    alpha = cap_alpha_estimate(cap, alpha_samples, rng).alpha_hat
    center = bullet_scale(1 - alpha, projector(psi))

    exceed = 0
    done = 0
    while done < trials:
        b = min(trial_chunk, trials - done)
        phi = sample_cap(cap, rng, size=b * m_samples).reshape(b, m_samples, d)
        means = np.einsum("tki,tkj->tij", phi, phi.conj()) / m_samples
        dev = means - center[None, :, :]
        if d == 2:
            norms = _op_norm_2x2_batch(dev)
        else:
            norms = np.abs(np.linalg.eigvalsh(dev)).max(axis=1)
        exceed += int((norms >= t).sum())
        done += b
    emp = exceed / trials
    bound = min(1.0, 2 * d * math.exp(-m_samples * t * t / 8))
    se = math.sqrt(max(emp * (1 - emp), 1.0 / trials) / trials)
    return TailCheck(emp, bound, se, ok=emp <= bound + 3 * se,
                     detail={"d": d, "theta": theta, "M": m_samples, "t": t,
                             "trials": trials, "alphaFrozen": alpha})
