"""Polytope-complexity estimates and random-section experiments.

Verticial dimension upper bounds from explicit net constructions, the ball
lower bound (n-1)/(2A^2), the product inequality relating facial and
verticial dimensions to asphericity, projective-net overlap checks for
product polytopes, and random-section (nearly spherical slice) experiments
driven by gauge oracles.
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass, field
from typing import Callable, Optional

import numpy as np

from .bodies import CapabilityError, ProductStatePolytope, bullet_scale
from .hermitian import projector, traceless_basis
from .nets import build_net, uniform_sphere
from .rng import as_rng

__all__ = [
    "DimEstimate",
    "SectionExperiment",
    "dimV_upper",
    "dim_lower_ball",
    "projective_net_check",
    "flm_report",
    "flm_rows_csv",
    "dvoretzky_section",
    "m_mstar_check",
    "GAUGES",
]


@dataclass
class DimEstimate:
    """log(vertex or facet count) bounds for polytopes sandwiching a body.

    All logs are natural (nats); only constants depend on the base.
    """

    body_label: str
    resolution: float  # A > 1
    kind: str  # "verticial" | "facial"
    lower_nats: Optional[float] = None
    upper_nats: Optional[float] = None
    method: str = ""
    witnesses: dict = field(default_factory=dict)

    def __post_init__(self) -> None:
        if self.resolution <= 1:
            raise ValueError("resolution A must exceed 1")
        if self.kind not in ("verticial", "facial"):
            raise ValueError("kind must be verticial or facial")
        if (self.lower_nats is not None and self.upper_nats is not None
                and self.lower_nats > self.upper_nats + 1e-12):
            raise ValueError("lower bound exceeds upper bound")

    def to_json(self) -> dict:
        return {
            "bodyLabel": self.body_label,
            "resolution": self.resolution,
            "kind": self.kind,
            "lowerNats": self.lower_nats,
            "upperNats": self.upper_nats,
            "method": self.method,
            "witnesses": self.witnesses,
        }


def _net_card_bound(real_dim: int, eps: float) -> float:
    """log of the volumetric covering bound (1 + 2/eps)^real_dim."""
    return real_dim * math.log1p(2.0 / eps)


def dim_lower_ball(n: int, A: float) -> float:
    """Verticial/facial dimension lower bound (n-1)/(2A^2) for the Euclidean ball."""
    if n < 2:
        raise ValueError("n must be >= 2")
    if A <= 1:
        raise ValueError("A must exceed 1")
    return (n - 1) / (2 * A * A)


def dimV_upper(body: str, size: int, A: float, rng=0) -> DimEstimate:
    """Constructive upper bound on the verticial dimension at resolution A.

    body in {"D", "Sep", "ball", "cube", "simplex"}; size is m, d or n.
    Returns log of the cardinality of an explicit vertex construction:

    - D(m): sphere net at delta = (1 - 1/A)/(2m), cardinality bound
      (1 + 2/delta)^{2m};
    - Sep(d): product net at eps = (1 - 1/A)/(4 d^2), two factor nets of
      bound (1 + 2/eps)^{2d} each;
    - ball(n): an actually constructed eps-net at eps = sqrt(2 (1 - 1/A)),
      vertices scaled by A;
    - cube(n): the 2^n corners; simplex(n): its n + 1 vertices.
    """
    if A <= 1:
        raise ValueError("A must exceed 1")
    if size < 1:
        raise ValueError("size must be positive")
    rng = as_rng(rng)
    s = 1.0 - 1.0 / A

    if body == "D":
        m = size
        delta = s / (2 * m)
        upper = _net_card_bound(2 * m, delta)
        lower = dim_lower_ball(m * m - 1, A * (m - 1)) if m >= 2 else 0.0
        return DimEstimate(f"D({m})", A, "verticial", lower_nats=lower, upper_nats=upper,
                           method="sphere-net cardinality bound",
                           witnesses={"delta": delta,
                                      "lowerVia": "inscribed HS ball at effective resolution A*a(D)"})
    if body == "Sep":
        d = size
        eps = s / (4 * d * d)
        upper = 2 * _net_card_bound(2 * d, eps)
        return DimEstimate(f"Sep({d}x{d})", A, "verticial", upper_nats=upper,
                           method="product-net cardinality bound",
                           witnesses={"eps": eps})
    if body == "ball":
        n = size
        if n < 2:
            raise ValueError("ball needs n >= 2")
        eps = math.sqrt(2 * s)
        net = build_net(n, eps, rng)
        return DimEstimate(f"B_2^{n}", A, "verticial",
                           lower_nats=dim_lower_ball(n, A),
                           upper_nats=math.log(net.card),
                           method="constructed sphere net, vertices scaled by A",
                           witnesses={"eps": eps, "card": net.card,
                                      "netMethod": net.method})
    if body == "cube":
        return DimEstimate(f"cube({size})", A, "verticial",
                           upper_nats=size * math.log(2.0),
                           method="exact vertex count 2^n")
    if body == "simplex":
        return DimEstimate(f"simplex({size})", A, "verticial",
                           upper_nats=math.log(size + 1),
                           method="exact vertex count n+1")
    raise ValueError(f"unsupported body {body!r}")


def projective_net_check(poly: ProductStatePolytope, test_states: int, rng=0,
                         tol: float = 1e-9) -> dict:
    """Overlap extraction check for a product polytope assumed to hold 1/4.Sep.

    For sampled phi on the sphere of C^d, alpha(phi) = max_i |<phi|phi_i>|^2
    over the second factors must reach at least 1 - 3/d.  Also evaluates the
    functional g(rho) = tr[rho (|chi><chi| (x) (alpha Id - |phi><phi|))] on
    all second-factor vertices (nonnegative by the choice of alpha) and on
    1/4 . |chi (x) phi><...| (nonnegative when the inclusion holds).
    """
    if not isinstance(poly, ProductStatePolytope):
        raise ValueError("expected a product polytope (factor lists)")
    rng = as_rng(rng)
    d = poly.d
    bound = 1.0 - 3.0 / d  # nonpositive at d <= 3: check is vacuous there
    chi = poly.left[0]

    worst = np.inf
    g_vertex_min = np.inf
    g_scaled_min = np.inf
    for _ in range(test_states):
        v = uniform_sphere(2 * d, 1, rng)[0]
        phi = v[:d] + 1j * v[d:]
        alpha2 = np.abs(poly.right @ phi.conj()) ** 2
        alpha = float(alpha2.max())
        worst = min(worst, alpha)

        w = np.kron(projector(chi), alpha * np.eye(d) - projector(phi))
        overl_left = np.abs(poly.left @ chi.conj()) ** 2
        # g on vertices: |<chi|psi_i>|^2 (alpha - |<phi|phi_j>|^2); both factors
        # are nonnegative, so the pairwise minimum is the product of the minima
        g_vertex = float(overl_left.min() * (alpha - alpha2).min())
        g_vertex_min = min(g_vertex_min, g_vertex)
        rho = bullet_scale(0.25, projector(np.kron(chi, phi)))
        g_scaled_min = min(g_scaled_min, float(np.trace(rho @ w).real))

    passed = worst >= bound - tol
    return {
        "d": d,
        "testStates": test_states,
        "worstOverlap": float(worst),
        "bound": bound,
        "vacuous": bound <= 0,
        "gVertexMin": float(g_vertex_min),
        "gScaledStateMin": float(g_scaled_min),
        "pass": bool(passed),
    }


# ---------------------------------------------------------------------------
# product inequality report


def flm_report(bodies: list[dict], A: float = 4.0, B: float = 4.0, rng=0) -> list[dict]:
    """Per-body rows for the product bound A^2 dim_F * B^2 dim_V * a^2 vs n^2.

    Each body spec is {"body": name, "size": int}.  Rows with a missing
    ingredient (no desk-computable lower bound) are emitted as incomplete
    rather than failing.
    """
    rng = as_rng(rng)
    rows = []
    for spec in bodies:
        name, size = spec["body"], spec["size"]
        row: dict = {"body": name, "size": size, "A": A, "B": B}
        if name == "ball":
            n = size
            low = dim_lower_ball(n, A)
            row.update(n=n, a=1.0, dimF_low=dim_lower_ball(n, B), dimV_low=low,
                       dimV_up=dimV_upper("ball", n, A, rng).upper_nats)
        elif name == "D":
            m = size
            row.update(n=m * m - 1, a=float(m - 1), dimF_low=None, dimV_low=None,
                       dimV_up=dimV_upper("D", m, A, rng).upper_nats)
        elif name == "Sep":
            d = size
            row.update(n=d ** 4 - 1, a=float(d * d - 1), dimF_low=None, dimV_low=None,
                       dimV_up=dimV_upper("Sep", d, A, rng).upper_nats)
        elif name == "cube":
            row.update(n=size, a=math.sqrt(size), dimF_low=None, dimV_low=None,
                       dimV_up=size * math.log(2.0))
        elif name == "simplex":
            row.update(n=size, a=float(size), dimF_low=None, dimV_low=None,
                       dimV_up=math.log(size + 1))
        else:
            row.update(n=None, a=None, dimF_low=None, dimV_low=None, dimV_up=None)
            row["status"] = f"unknown body {name!r}"
            rows.append(row)
            continue
        if row["dimF_low"] is None or row["dimV_low"] is None:
            row["status"] = "incomplete"
            row["product"] = None
            row["ratio"] = None
        else:
            prod = (A * A * row["dimF_low"]) * (B * B * row["dimV_low"]) * row["a"] ** 2
            row["status"] = "complete"
            row["product"] = prod
            row["ratio"] = prod / row["n"] ** 2
        rows.append(row)
    return rows


def flm_rows_csv(rows: list[dict], path: str) -> None:
    cols = ["body", "size", "n", "a", "A", "B", "dimF_low", "dimV_low",
            "dimV_up", "product", "ratio", "status"]
    with open(path, "w", newline="") as fh:
        w = csv.DictWriter(fh, fieldnames=cols, extrasaction="ignore")
        w.writeheader()
        for r in rows:
            w.writerow(r)


# ---------------------------------------------------------------------------
# random sections


def _gauge_cube(x: np.ndarray) -> np.ndarray:
    return np.abs(x).max(axis=-1)


def _gauge_cross(x: np.ndarray) -> np.ndarray:
    return np.abs(x).sum(axis=-1)


def _gauge_ball(x: np.ndarray) -> np.ndarray:
    return np.linalg.norm(x, axis=-1)


def _gauge_D_factory(m: int) -> Callable[[np.ndarray], np.ndarray]:
    basis = traceless_basis(m)

    def gauge(x: np.ndarray) -> np.ndarray:
        pts = np.atleast_2d(x)
        mats = np.einsum("nk,kij->nij", pts, basis)
        out = m * np.linalg.eigvalsh(-mats)[:, -1]
        return out if x.ndim > 1 else float(out[0])

    return gauge


GAUGES: dict[str, dict] = {
    "cube": {"gauge": _gauge_cube, "inradius": lambda n: 1.0},
    "cross-polytope": {"gauge": _gauge_cross, "inradius": lambda n: 1.0 / math.sqrt(n)},
    "ball": {"gauge": _gauge_ball, "inradius": lambda n: 1.0},
}


@dataclass
class SectionExperiment:
    body_label: str
    ambient_dim: int
    section_dim: int
    trials: list[dict]  # per trial: maxGauge, minGauge, ratio
    mean_gauge_M: float
    inradius: float

    @property
    def ratios(self) -> np.ndarray:
        return np.array([t["ratio"] for t in self.trials])

    def to_json(self) -> dict:
        return {
            "bodyLabel": self.body_label,
            "ambientDim": self.ambient_dim,
            "sectionDim": self.section_dim,
            "trials": self.trials,
            "meanGaugeM": self.mean_gauge_M,
            "inradius": self.inradius,
            "medianRatio": float(np.median(self.ratios)),
        }

    def trials_csv(self, path: str, seed_note: str = "") -> None:
        with open(path, "w", newline="") as fh:
            w = csv.writer(fh)
            w.writerow(["trial", "maxGauge", "minGauge", "ratio", "seed"])
            for i, t in enumerate(self.trials):
                w.writerow([i, t["maxGauge"], t["minGauge"], t["ratio"], seed_note])


def _refine_extremum(gauge, frame, u0, sign, rng, steps: int = 60) -> float:
    """Local search on the section sphere from u0; sign +1 max, -1 min."""
    u = u0.copy()
    best = sign * float(gauge(frame @ u))
    step = 0.2
    k = u.shape[0]
    for _ in range(steps):
        tangent = rng.standard_normal(k)
        tangent -= tangent @ u * u
        tn = np.linalg.norm(tangent)
        if tn == 0:
            continue
        cand = u + step * tangent / tn
        cand /= np.linalg.norm(cand)
        val = sign * float(gauge(frame @ cand))
        if val > best:
            best, u = val, cand
        else:
            step *= 0.85
    return sign * best


def dvoretzky_section(gauge_name: str, n: int, k: int, trials: int,
                      samples_per_trial: int, rng=0, m_samples: int = 4096,
                      m_param: Optional[int] = None) -> SectionExperiment:
    """Gauge extrema over random k-sections, plus the mean gauge M on S^{n-1}.

    Per trial a uniform k-frame is drawn (orthonormalized Gaussian), the
    gauge is evaluated on dense sphere samples of the section, and both
    extrema are sharpened by local search.  ratio = max/min >= 1 always.
    """
    if not (1 <= k <= n):
        raise ValueError("need 1 <= k <= n")
    rng = as_rng(rng)
    if gauge_name == "D":
        m = m_param if m_param is not None else int(round(math.sqrt(n + 1)))
        if m * m - 1 != n:
            raise ValueError("for body D, n must equal m^2 - 1")
        gauge = _gauge_D_factory(m)
        inradius = 1.0 / math.sqrt(m * (m - 1))
        label = f"D({m})"
    else:
        try:
            entry = GAUGES[gauge_name]
        except KeyError:
            raise ValueError(f"unknown gauge {gauge_name!r}") from None
        gauge = entry["gauge"]
        inradius = entry["inradius"](n)
        label = gauge_name

    sphere = uniform_sphere(n, m_samples, rng)
    mean_m = float(gauge(sphere).mean())

    rows = []
    for _ in range(trials):
        g = rng.standard_normal((n, k))
        frame, _ = np.linalg.qr(g)
        us = uniform_sphere(k, samples_per_trial, rng)
        vals = gauge(us @ frame.T)
        i_max, i_min = int(np.argmax(vals)), int(np.argmin(vals))
        hi = _refine_extremum(gauge, frame, us[i_max], +1, rng)
        lo = _refine_extremum(gauge, frame, us[i_min], -1, rng)
        hi = max(hi, float(vals[i_max]))
        lo = min(lo, float(vals[i_min]))
        if lo <= 0:
            raise CapabilityError("gauge vanished on the section; body unbounded in E")
        rows.append({"maxGauge": hi, "minGauge": lo, "ratio": hi / lo})
    return SectionExperiment(label, n, k, rows, mean_m, inradius)


def m_mstar_check(n: int, samples: int, rng=0) -> dict:
    """Paired estimate of M * M_polar >= 1 for the cube / cross-polytope pair.

    Both gauges are evaluated on the same sphere sample, so the product
    estimator is positively correlated and the comparison is sharp.
    """
    rng = as_rng(rng)
    x = uniform_sphere(n, samples, rng)
    m_cube = _gauge_cube(x)
    m_cross = _gauge_cross(x)
    m1, m2 = float(m_cube.mean()), float(m_cross.mean())
    prod = m1 * m2
    # delta-method standard error of the product of the two sample means
    se = prod * math.sqrt(
        (m_cube.std(ddof=1) / (m1 * math.sqrt(samples))) ** 2
        + (m_cross.std(ddof=1) / (m2 * math.sqrt(samples))) ** 2
    )
    return {"n": n, "samples": samples, "M": m1, "Mstar": m2,
            "product": prod, "stdErr": se, "ok": prod >= 1.0 - 3 * se}
