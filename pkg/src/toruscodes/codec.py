"""Encoder and two-stage decoder for the multi-curve signal locus.

The unit interval is split into one subinterval per curve, proportionally to
curve length, and each subinterval is mapped affinely onto its curve.  The
decoder first extracts per-pair magnitudes and phases from the received
vector, picks the closest layer from the magnitudes (a linear scan, M*N
work), then finds the closest line of the chosen curve's box pre-image in
the wrapped flat metric (a walk over the curve's box-face crossings,
||u||_1 line segments).
"""

import json
import math
from dataclasses import dataclass

import numpy as np

from .curves import CurveSpec, curve_point
from .torus import TorusSpec, inter_torus_distance

__all__ = [
    "SchemeCode",
    "DecodeResult",
    "OpCounter",
    "AmbiguousPhaseError",
    "UndecodableError",
    "build_scheme",
    "encode",
    "encode_batch",
    "extract_polar",
    "nearest_layer",
    "project_to_torus",
    "decode_on_torus",
    "decode",
    "decode_batch",
    "decode_exhaustive",
    "decode_exhaustive_batch",
]

_TWO_PI = 2.0 * math.pi


class AmbiguousPhaseError(ValueError):
    """A coordinate pair has zero magnitude; its phase is undefined."""


class UndecodableError(ValueError):
    """The received vector carries no usable direction information."""


class OpCounter:
    """Accumulates scalar multiply/divide counts for complexity checks."""

    def __init__(self):
        self.mults = 0

    def add(self, n: int):
        self.mults += int(n)


@dataclass(frozen=True, eq=False)
class SchemeCode:
    """Full encoder state: ordered curves, interval partition, power scale.

    ball_radius is the protection radius of the whole locus: the smallest
    curve small-ball lower bound, capped at half the achieved layer
    separation (a single curve is only protected as far as the neighboring
    layers allow).
    """

    curves: tuple
    lengths: np.ndarray
    total_length: float
    breakpoints: np.ndarray
    alpha: float
    ball_radius: float

    def __post_init__(self):
        for arr in (self.lengths, self.breakpoints):
            arr.flags.writeable = False
        if self.alpha <= 0.0:
            raise ValueError("alpha must be positive")
        if abs(self.breakpoints[-1] - 1.0) > 1e-12:
            raise ValueError("breakpoints must end at 1")
        if np.any(np.diff(self.breakpoints) <= 0.0) or self.breakpoints[0] <= 0.0:
            raise ValueError("breakpoints must be strictly increasing")
        if abs(self.total_length - float(self.lengths.sum())) > 1e-9 * self.total_length:
            raise ValueError("total_length must equal the sum of curve lengths")

    @property
    def n_layers(self) -> int:
        return len(self.curves)

    @property
    def dim(self) -> int:
        return self.curves[0].torus.dim

    def to_json(self) -> str:
        return json.dumps(self.to_dict())

    def to_dict(self) -> dict:
        return {
            "alpha": self.alpha,
            "delta": self.ball_radius,
            "curves": [cs.to_dict() for cs in self.curves],
        }

    @classmethod
    def from_dict(cls, d: dict) -> "SchemeCode":
        curves = [CurveSpec.from_dict(item) for item in d["curves"]]
        scheme = build_scheme(curves, alpha=float(d["alpha"]))
        return scheme

    @classmethod
    def from_json(cls, text: str) -> "SchemeCode":
        return cls.from_dict(json.loads(text))


@dataclass(frozen=True)
class DecodeResult:
    x_hat: float
    layer: int
    undecodable: bool = False
    phase_fallback: bool = False


def build_scheme(curves, alpha: float = 1.0) -> SchemeCode:
    """Assemble a SchemeCode from curves (one per layer) and a power scale."""
    curves = tuple(curves)
    if not curves:
        raise ValueError("need at least one curve")
    dim = curves[0].torus.dim
    if any(cs.torus.dim != dim for cs in curves):
        raise ValueError("all curves must live on tori of the same dimension")
    lengths = np.array([cs.length for cs in curves])
    total = float(lengths.sum())
    breakpoints = np.cumsum(lengths) / total
    breakpoints[-1] = 1.0
    sep = math.inf
    for i in range(len(curves)):
        for j in range(i + 1, len(curves)):
            sep = min(sep, inter_torus_distance(curves[i].torus, curves[j].torus))
    ball = min(cs.ball_lower for cs in curves)
    ball = min(ball, sep / 2.0)
    return SchemeCode(
        curves=curves,
        lengths=lengths,
        total_length=total,
        breakpoints=breakpoints,
        alpha=float(alpha),
        ball_radius=float(ball),
    )


def _interval_lows(scheme: SchemeCode) -> np.ndarray:
    return np.concatenate(([0.0], scheme.breakpoints[:-1]))


def encode_batch(scheme: SchemeCode, xs) -> np.ndarray:
    xs = np.asarray(xs, dtype=float)
    if not np.all(np.isfinite(xs)) or np.any(xs < 0.0) or np.any(xs >= 1.0):
        raise ValueError("encoder input must lie in [0, 1)")
    ks = np.searchsorted(scheme.breakpoints, xs, side="right")
    lows = _interval_lows(scheme)
    out = np.empty(xs.shape + (2 * scheme.dim,))
    for k in np.unique(ks):
        mask = ks == k
        width = scheme.breakpoints[k] - lows[k]
        local = (xs[mask] - lows[k]) / width
        out[mask] = curve_point(scheme.curves[k], np.minimum(local, np.nextafter(1.0, 0.0)))
    return scheme.alpha * out


def encode(scheme: SchemeCode, x: float) -> np.ndarray:
    """Encode x in [0, 1) to a point of norm alpha in R^(2N)."""
    return encode_batch(scheme, np.array([float(x)]))[0]


def _polar(y):
    """Magnitudes, scaled phases, and the zero-magnitude mask of y."""
    y = np.asarray(y, dtype=float)
    even = y[..., 0::2]
    odd = y[..., 1::2]
    gamma = np.hypot(even, odd)
    ang = np.arctan2(odd, even)
    ang = np.where(ang < 0.0, ang + _TWO_PI, ang)
    zero = gamma == 0.0
    ang = np.where(zero, 0.0, ang)
    return gamma, ang * gamma, zero


def extract_polar(y, strict: bool = True):
    """Per-pair magnitude gamma_i and phase theta_i = angle_i * gamma_i.

    The full two-argument angle is used, so lower-half-plane pairs recover
    phases in (pi*gamma_i, 2*pi*gamma_i).  With strict=True a zero magnitude
    raises; otherwise its phase falls back to 0 and the caller sees the flag
    through the zero magnitude itself.
    """
    gamma, theta, zero = _polar(y)
    if strict and np.any(zero):
        raise AmbiguousPhaseError("zero magnitude pair: phase undefined")
    return gamma, theta


def nearest_layer(scheme: SchemeCode, gamma) -> int:
    """Index of the layer whose c-vector is closest to the direction of gamma."""
    gamma = np.asarray(gamma, dtype=float)
    norm = float(np.linalg.norm(gamma))
    if norm == 0.0:
        raise UndecodableError("zero magnitude vector")
    ghat = gamma / norm
    cmat = np.stack([cs.torus.c for cs in scheme.curves])
    # layers are unit vectors, so the closest one maximizes the dot product
    return int(np.argmax(cmat @ ghat))


def project_to_torus(layer: TorusSpec, gamma, theta) -> np.ndarray:
    """Nearest point of the torus to y, reconstructed from its polar data."""
    gamma = np.asarray(gamma, dtype=float)
    theta = np.asarray(theta, dtype=float)
    angles = np.where(gamma > 0.0, theta / np.where(gamma > 0.0, gamma, 1.0), 0.0)
    out = np.empty(angles.shape[:-1] + (2 * layer.dim,))
    out[..., 0::2] = layer.c * np.cos(angles)
    out[..., 1::2] = layer.c * np.sin(angles)
    return out


def _decode_on_torus_batch(cs: CurveSpec, points: np.ndarray, counter: OpCounter | None = None) -> np.ndarray:
    """Parameter of the closest pre-image line for each box point (B, N).

    Works in the wrapped flat metric of the box.  For fixed x the wrapped
    residual p - 2*pi*u_hat*x changes its nearest lattice representative only
    when some coordinate crosses a half-period, which happens at most |u_i|
    times per coordinate over x in [0, 1).  Between crossings the distance is
    a plain quadratic in x, minimized in closed form and clamped.
    """
    c = cs.torus.c
    u = cs.u.astype(np.int64)
    n = c.size
    b = points.shape[0]
    periods = _TWO_PI * c
    uh2pi = _TWO_PI * cs.u_hat
    line_norm2 = float(uh2pi @ uh2pi)

    points = np.mod(points, periods)  # the wrapped metric is period-invariant
    t = points / periods  # box position in units of periods, in [0, 1)
    bps = []
    for i in range(n):
        ui = int(u[i])
        if ui == 0:
            continue
        count = abs(ui)
        if ui > 0:
            m0 = np.ceil(0.5 - t[:, i])
            ms = m0[:, None] + np.arange(count)[None, :]
        else:
            m0 = np.floor(0.5 - t[:, i])
            ms = m0[:, None] - np.arange(count)[None, :]
        bps.append((t[:, i, None] - 0.5 + ms) / ui)
    bps = np.concatenate(bps, axis=1)
    bps = np.clip(bps, 0.0, 1.0)
    bps.sort(axis=1)
    edges = np.concatenate(
        [np.zeros((b, 1)), bps, np.ones((b, 1))], axis=1
    )  # (B, S+2)
    lefts = edges[:, :-1]
    rights = edges[:, 1:]
    mids = 0.5 * (lefts + rights)  # (B, S+1)

    # nearest lattice offset per piece and coordinate: (B, P, N)
    resid = points[:, None, :] - mids[:, :, None] * uh2pi[None, None, :]
    offs = np.round(resid / periods[None, None, :])
    q = points[:, None, :] - offs * periods[None, None, :]
    xstar = (q @ uh2pi) / line_norm2  # (B, P)
    np.clip(xstar, lefts, rights, out=xstar)
    diff = q - xstar[:, :, None] * uh2pi[None, None, :]
    dist2 = np.einsum("bpn,bpn->bp", diff, diff)
    best = np.argmin(dist2, axis=1)  # first occurrence = smaller x on ties
    xs = xstar[np.arange(b), best]
    xs = np.where(xs >= 1.0, np.nextafter(1.0, 0.0), xs)

    if counter is not None:
        s = int(np.sum(np.abs(u)))
        pieces = s + 1
        # breakpoints: one divide per entry; per piece: offset round (N div),
        # offset apply (N mult), projection (N mult + 1 div), residual (N mult),
        # norm (N mult)
        counter.add(b * (2 * s + pieces * (4 * n + 1) + n))
    return xs


def decode_on_torus(cs: CurveSpec, theta, counter: OpCounter | None = None) -> float:
    """Parameter in [0, 1) of the curve point closest to the box point theta
    in the wrapped flat metric."""
    theta = np.asarray(theta, dtype=float)
    return float(_decode_on_torus_batch(cs, theta[None, :], counter)[0])


def decode_batch(scheme: SchemeCode, ys, chunk: int = 4096, counter: OpCounter | None = None):
    """Vectorized two-stage decoding of received vectors (B, 2N).

    Returns (x_hat, layer, undecodable, phase_fallback) arrays.  Undecodable
    rows (all magnitudes zero) decode to 0 with layer -1 and are flagged
    rather than raised, so Monte Carlo runs survive pathological inputs.
    """
    ys = np.asarray(ys, dtype=float)
    if not np.all(np.isfinite(ys)):
        raise ValueError("received vectors must be finite")
    b = ys.shape[0]
    gamma, theta, zero = _polar(ys)
    undecodable = np.all(zero, axis=1)
    fallback = np.any(zero, axis=1) & ~undecodable

    cmat = np.stack([cs.torus.c for cs in scheme.curves])
    norms = np.linalg.norm(gamma, axis=1)
    safe = np.where(norms > 0.0, norms, 1.0)
    dots = (gamma / safe[:, None]) @ cmat.T
    layers = np.argmax(dots, axis=1)
    if counter is not None:
        counter.add(b * (4 * scheme.dim + scheme.n_layers * scheme.dim + scheme.dim))

    lows = _interval_lows(scheme)
    x_hat = np.zeros(b)
    angles = np.where(gamma > 0.0, theta / np.where(gamma > 0.0, gamma, 1.0), 0.0)
    for k in np.unique(layers[~undecodable]):
        mask = (layers == k) & ~undecodable
        cs = scheme.curves[k]
        box = angles[mask] * cs.torus.c  # wrapped box coordinates of the phases
        if counter is not None:
            counter.add(int(mask.sum()) * scheme.dim)
        idx = np.flatnonzero(mask)
        width = scheme.breakpoints[k] - lows[k]
        # piece arrays scale with ||u||_1; cap their footprint per chunk
        pieces = int(np.sum(np.abs(cs.u))) + 1
        step = max(64, min(chunk, 4_000_000 // (pieces * scheme.dim)))
        for start in range(0, idx.size, step):
            sl = idx[start : start + step]
            xl = _decode_on_torus_batch(cs, box[start : start + step], counter)
            x_hat[sl] = lows[k] + xl * width
    x_hat = np.minimum(x_hat, np.nextafter(1.0, 0.0))
    layers = np.where(undecodable, -1, layers)
    return x_hat, layers, undecodable, fallback


def decode(scheme: SchemeCode, y, counter: OpCounter | None = None) -> DecodeResult:
    """Two-stage decoding of a single received vector."""
    y = np.asarray(y, dtype=float)
    x_hat, layers, undec, fb = decode_batch(scheme, y[None, :], counter=counter)
    return DecodeResult(
        x_hat=float(x_hat[0]),
        layer=int(layers[0]),
        undecodable=bool(undec[0]),
        phase_fallback=bool(fb[0]),
    )


def _grid_points(grid: int) -> np.ndarray:
    return np.arange(grid) / grid


def decode_exhaustive_batch(scheme: SchemeCode, ys, grid: int = 100_000, chunk: int = 128):
    """Maximum-likelihood oracle: grid argmin of ||y - s(x)|| plus refinement.

    All codewords share norm alpha, so the grid argmin reduces to a dot
    product argmax.  A golden-section pass around the best grid point
    sharpens the estimate to machine precision within one grid cell.
    """
    if grid < 1000:
        raise ValueError("grid must be at least 1000")
    ys = np.asarray(ys, dtype=float)
    xs_grid = _grid_points(grid)
    codebook = encode_batch(scheme, xs_grid)  # (G, 2N)
    b = ys.shape[0]
    best_idx = np.empty(b, dtype=np.int64)
    for start in range(0, b, chunk):
        sl = slice(start, min(start + chunk, b))
        dots = ys[sl] @ codebook.T
        best_idx[sl] = np.argmax(dots, axis=1)
    x0 = xs_grid[best_idx]

    # vectorized golden-section on f(x) = -<y, s(x)> over one grid cell
    inv_phi = (math.sqrt(5.0) - 1.0) / 2.0
    lo = np.maximum(x0 - 1.0 / grid, 0.0)
    hi = np.minimum(x0 + 1.0 / grid, np.nextafter(1.0, 0.0))

    def f(x):
        pts = encode_batch(scheme, x)
        return -np.einsum("bn,bn->b", ys, pts)

    a_x = hi - inv_phi * (hi - lo)
    b_x = lo + inv_phi * (hi - lo)
    fa = f(a_x)
    fb = f(b_x)
    for _ in range(60):
        shrink_right = fa < fb
        hi = np.where(shrink_right, b_x, hi)
        lo = np.where(shrink_right, lo, a_x)
        a_x = hi - inv_phi * (hi - lo)
        b_x = lo + inv_phi * (hi - lo)
        fa = f(a_x)
        fb = f(b_x)
    out = 0.5 * (lo + hi)
    return np.minimum(out, np.nextafter(1.0, 0.0))


def decode_exhaustive(scheme: SchemeCode, y, grid: int = 100_000) -> float:
    y = np.asarray(y, dtype=float)
    return float(decode_exhaustive_batch(scheme, y[None, :], grid=grid)[0])
