"""Epsilon-nets on real and complex unit spheres.

Construction (greedy maximal-separated by rejection sampling, plus a
deterministic Hopf-coordinate grid on S^3 for fine resolutions), Monte
Carlo covering verification, and the classical cardinality bounds
card <= (1 + 2/eps)^n and card >= 2/sin^(n-1)(theta).

Chordal (Euclidean) metric throughout; geodesic radii are converted via
theta = 2*arcsin(eps/2).  Complex spheres are handled as real spheres of
twice the dimension.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import Optional

import numpy as np

from .rng import as_rng

__all__ = [
    "SphereNet",
    "build_net",
    "hopf_net",
    "verify_cover",
    "min_card_bound",
    "max_card_bound",
    "uniform_sphere",
    "complex_to_real",
    "real_to_complex",
    "phase_expand",
    "save_net",
    "load_net",
]

BINARY_THRESHOLD = 200_000  # floats; larger nets serialize as raw little-endian


def uniform_sphere(n: int, size: int, rng) -> np.ndarray:
    """size uniform points on S^{n-1}, rows of an (size, n) array."""
    x = as_rng(rng).standard_normal((size, n))
    return x / np.linalg.norm(x, axis=1, keepdims=True)


def complex_to_real(v: np.ndarray) -> np.ndarray:
    v = np.atleast_2d(v)
    return np.concatenate([v.real, v.imag], axis=1)


def real_to_complex(x: np.ndarray) -> np.ndarray:
    x = np.atleast_2d(x)
    m = x.shape[1] // 2
    return x[:, :m] + 1j * x[:, m:]


@dataclass
class SphereNet:
    real_dim: int
    eps: float
    points: np.ndarray  # (N, real_dim) unit rows
    method: str  # "greedy-separated" | "random" | "hopf-grid"
    coverage_estimate: Optional[tuple[float, int]] = None  # (fractionCovered, samples)
    meta: dict = field(default_factory=dict)

    @property
    def card(self) -> int:
        return self.points.shape[0]

    def as_complex(self) -> np.ndarray:
        if self.real_dim % 2 != 0:
            raise ValueError("not a complexifiable dimension")
        return real_to_complex(self.points)


def min_card_bound(n: int, eps: float) -> float:
    """Lower bound 2/sin^{n-1}(theta) on the size of any eps-net of S^{n-1}."""
    if not (0 < eps < math.sqrt(2)):
        raise ValueError("bound valid only for 0 < eps < sqrt(2)")
    theta = 2 * math.asin(eps / 2)
    return 2.0 / math.sin(theta) ** (n - 1)


def max_card_bound(n: int, eps: float) -> float:
    """Volumetric upper bound (1 + 2/eps)^n achievable by a maximal separated family."""
    if not (0 < eps < 2):
        raise ValueError("eps must be in (0, 2)")
    return (1 + 2 / eps) ** n


def build_net(n: int, eps: float, rng=0, max_failures: Optional[int] = None,
              batch: int = 512) -> SphereNet:
    """Greedy maximal eps-separated family on S^{n-1} by rejection sampling.

    Points are admitted when at least eps (chordal) from all admitted points;
    construction stops after max_failures consecutive rejections (default
    50x the current cardinality).  A maximal separated family is a net at
    the same radius; maximality here is probabilistic and recorded.
    """
    if not (0 < eps < 2):
        raise ValueError("eps must be in (0, 2)")
    if n < 1:
        raise ValueError("n must be >= 1")
    rng = as_rng(rng)
    cos_thresh = 1 - eps * eps / 2  # |x-y| >= eps  <=>  <x,y> <= 1 - eps^2/2
    cap = max_card_bound(n, eps)

    if n == 1:
        pts = np.array([[1.0], [-1.0]]) if eps <= 2 else np.array([[1.0]])
        return SphereNet(1, eps, pts, "greedy-separated", meta={"failures_at_stop": 0})

    accepted: list[np.ndarray] = []
    consecutive_failures = 0
    total_failures = 0
    limit = max_failures if max_failures is not None else 50
    while consecutive_failures < limit:
        cand = uniform_sphere(n, batch, rng)
        snapshot = np.array(accepted) if accepted else None
        pre = (cand @ snapshot.T).max(axis=1) if snapshot is not None else np.full(batch, -2.0)
        new_pts: list[np.ndarray] = []
        for i in range(batch):
            p = cand[i]
            clash = pre[i] > cos_thresh
            if not clash and new_pts:
                clash = max(float(p @ q) for q in new_pts) > cos_thresh
            if clash:
                consecutive_failures += 1
                total_failures += 1
                continue
            accepted.append(p)
            new_pts.append(p)
            consecutive_failures = 0
        limit = max_failures if max_failures is not None else 50 * max(1, len(accepted))
        if len(accepted) > cap:
            raise RuntimeError("separated family exceeded the volumetric bound; internal fault")
    pts = np.array(accepted)
    return SphereNet(n, eps, pts, "greedy-separated",
                     meta={"failures_at_stop": consecutive_failures,
                           "total_failures": total_failures,
                           "max_failures_limit": int(limit)})


def hopf_net(eps: float, safety: float = 0.98) -> SphereNet:
    """Deterministic eps-net on S^3 from a Hopf-coordinate grid.

    Grid spacings are chosen so the geodesic distance from any point of S^3
    to the grid is at most safety*eps; since chordal <= geodesic this gives
    a chordal eps-net with certainty (unlike the probabilistic greedy
    construction).  Cardinality is ~ 2 pi^2 (sqrt(3)/(2 eps))^3.
    """
    if not (0 < eps < 2):
        raise ValueError("eps must be in (0, 2)")
    delta = 2 * safety * eps / math.sqrt(3)
    n_eta = max(1, math.ceil((math.pi / 2) / delta))
    d_eta = (math.pi / 2) / n_eta
    pts = []
    rows = []
    for j in range(n_eta):
        eta = (j + 0.5) * d_eta
        # pad the angular speed for the worst eta within the row's band
        c = min(1.0, math.cos(eta) + d_eta / 2)
        s = min(1.0, math.sin(eta) + d_eta / 2)
        n1 = max(1, math.ceil(2 * math.pi * c / delta))
        n2 = max(1, math.ceil(2 * math.pi * s / delta))
        xi1 = (np.arange(n1) + 0.5) * (2 * math.pi / n1)
        xi2 = (np.arange(n2) + 0.5) * (2 * math.pi / n2)
        g1, g2 = np.meshgrid(xi1, xi2, indexing="ij")
        block = np.stack(
            [
                math.cos(eta) * np.cos(g1),
                math.cos(eta) * np.sin(g1),
                math.sin(eta) * np.cos(g2),
                math.sin(eta) * np.sin(g2),
            ],
            axis=-1,
        ).reshape(-1, 4)
        rows.append({"eta": eta, "n1": n1, "n2": n2, "offset": sum(len(p) for p in pts)})
        pts.append(block)
    points = np.concatenate(pts, axis=0)
    points /= np.linalg.norm(points, axis=1, keepdims=True)
    if points.shape[0] > max_card_bound(4, eps):
        raise RuntimeError("hopf grid exceeded the volumetric bound; internal fault")
    return SphereNet(4, eps, points, "hopf-grid",
                     meta={"delta": delta, "n_eta": n_eta, "rows": rows, "safety": safety})


def _nearest_cos_hopf(net: SphereNet, samples: np.ndarray) -> np.ndarray:
    """Cosine of the angle to the nearest grid point, via grid rounding."""
    meta = net.meta
    d_eta = (math.pi / 2) / meta["n_eta"]
    x = samples
    r1 = np.hypot(x[:, 0], x[:, 1])
    eta = np.arctan2(np.hypot(x[:, 2], x[:, 3]), r1)
    xi1 = np.mod(np.arctan2(x[:, 1], x[:, 0]), 2 * math.pi)
    xi2 = np.mod(np.arctan2(x[:, 3], x[:, 2]), 2 * math.pi)
    best = np.full(x.shape[0], -1.0)
    j_center = np.clip(((eta / d_eta) - 0.5).round().astype(int), 0, meta["n_eta"] - 1)
    for dj in (-1, 0, 1):
        j = np.clip(j_center + dj, 0, meta["n_eta"] - 1)
        for row_id in np.unique(j):
            row = meta["rows"][row_id]
            sel = j == row_id
            n1, n2 = row["n1"], row["n2"]
            i1 = np.mod(((xi1[sel] / (2 * math.pi / n1)) - 0.5).round().astype(int), n1)
            i2 = np.mod(((xi2[sel] / (2 * math.pi / n2)) - 0.5).round().astype(int), n2)
            idx = row["offset"] + i1 * n2 + i2
            cos = np.einsum("ij,ij->i", x[sel], net.points[idx])
            best[sel] = np.maximum(best[sel], cos)
    return best


def verify_cover(net: SphereNet, samples: int, radius: float, rng=0,
                 chunk: int = 2048) -> float:
    """Fraction of uniform sphere samples within chordal ``radius`` of the net."""
    if radius <= 0:
        raise ValueError("radius must be positive")
    rng = as_rng(rng)
    cos_thresh = 1 - radius * radius / 2
    covered = 0
    done = 0
    while done < samples:
        b = min(chunk, samples - done)
        pts = uniform_sphere(net.real_dim, b, rng)
        if net.method == "hopf-grid":
            best = _nearest_cos_hopf(net, pts)
        else:
            best = (pts @ net.points.T).max(axis=1)
        covered += int((best >= cos_thresh - 1e-15).sum())
        done += b
    return covered / samples


def phase_expand(points_complex: np.ndarray, d: int) -> np.ndarray:
    """Expand a complex net by the d-th roots of unity: {e^{2 pi i j/d} phi_i}."""
    phases = np.exp(2j * np.pi * np.arange(1, d + 1) / d)
    return (points_complex[None, :, :] * phases[:, None, None]).reshape(-1, points_complex.shape[1])


def save_net(net: SphereNet, path: str | Path) -> None:
    """JSON for small nets; JSON header + little-endian float64 blob for large."""
    path = Path(path)
    header = {
        "realDim": net.real_dim,
        "eps": net.eps,
        "method": net.method,
        "card": net.card,
    }
    if net.points.size <= BINARY_THRESHOLD:
        header["points"] = net.points.tolist()
        path.write_text(json.dumps(header))
    else:
        header["pointsFile"] = path.name + ".f64"
        path.write_text(json.dumps(header))
        net.points.astype("<f8").tofile(path.with_name(header["pointsFile"]))


def load_net(path: str | Path) -> SphereNet:
    path = Path(path)
    header = json.loads(path.read_text())
    if "points" in header:
        pts = np.array(header["points"], dtype=float)
    else:
        pts = np.fromfile(path.with_name(header["pointsFile"]), dtype="<f8")
        pts = pts.reshape(-1, header["realDim"])
    return SphereNet(header["realDim"], header["eps"], pts, header["method"])
