"""AWGN Monte Carlo harness, fold-distance sampling, tradeoff tables.

Randomness contract: all draws come from numpy's counter-based Philox
generator.  Trials are processed in fixed blocks of 4096; block b uses the
stream Philox(seed).jumped(b), and partial results merge in block order.
Results are therefore bit-identical for any worker count, and the raw
streams are locked by a golden-vector test.
"""

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np

from .codec import SchemeCode, build_scheme, decode_batch, encode_batch
from .curves import CurveSpec, default_target, search_best_w
from .layers import LayerCodebook, design_layers
from .lattices import project_orthogonal
from .torus import TorusSpec, intra_torus_distance

__all__ = [
    "SimConfig",
    "SimResult",
    "TradeoffRow",
    "InfeasibleDesignError",
    "BLOCK",
    "awgn",
    "block_rng",
    "run_mse",
    "estimate_small_ball",
    "ball_radius_to_spacing",
    "design_scheme",
    "tradeoff_table",
    "format_tradeoff_csv",
    "format_mse_csv",
]


class InfeasibleDesignError(ValueError):
    """No layer of the codebook can host a curve at the requested radius."""

BLOCK = 4096  # trials per RNG block; changing it changes the streams

_TWO_PI = 2.0 * math.pi


@dataclass(frozen=True)
class SimConfig:
    """One Monte Carlo run: noise level, trial count, seed, source law."""

    sigma: float
    trials: int
    seed: int
    source: str = "uniform"

    def __post_init__(self):
        if self.sigma < 0.0:
            raise ValueError("sigma must be nonnegative")
        if self.trials < 1:
            raise ValueError("need at least one trial")
        if self.source != "uniform":
            raise ValueError("only the uniform source is supported")


@dataclass(frozen=True)
class SimResult:
    mse: float
    mse_ci95: float
    anomaly_rate: float
    trials_flagged: int

    def __post_init__(self):
        if self.mse < 0.0 or not (0.0 <= self.anomaly_rate <= 1.0):
            raise ValueError("invalid simulation result")


def block_rng(seed: int, block: int) -> np.random.Generator:
    """Deterministic per-block stream: Philox(seed) jumped ahead block times."""
    return np.random.Generator(np.random.Philox(seed).jumped(block))


def awgn(point, sigma: float, rng: np.random.Generator) -> np.ndarray:
    """Add iid zero-mean Gaussian noise, standard deviation sigma per coordinate."""
    if sigma < 0.0:
        raise ValueError("sigma must be nonnegative")
    point = np.asarray(point, dtype=float)
    if sigma == 0.0:
        return point + 0.0
    return point + sigma * rng.standard_normal(point.shape)


def _simulate_block(scheme: SchemeCode, sigma: float, seed: int, block: int, nb: int):
    rng = block_rng(seed, block)
    xs = rng.random(nb)
    ys = encode_batch(scheme, xs)
    ys = awgn(ys, sigma, rng)
    x_hat, layers, undec, _ = decode_batch(scheme, ys)

    err = x_hat - xs
    true_layers = np.searchsorted(scheme.breakpoints, xs, side="right")
    spacing = np.array([cs.spacing for cs in scheme.curves])[true_layers]
    # wrong-fold heuristic: scaled parameter error beyond the noise ball plus
    # half a line spacing means the decoder left the correct fold
    thresh = 3.0 * sigma * math.sqrt(2 * scheme.dim) + spacing * scheme.alpha / 2.0
    anomalies = (np.abs(err) * scheme.total_length * scheme.alpha > thresh) | (
        layers != true_layers
    )
    e2 = err * err
    return (
        float(e2.sum()),
        float((e2 * e2).sum()),
        int(anomalies.sum()),
        int(undec.sum()),
        nb,
    )


def run_mse(scheme: SchemeCode, config: SimConfig, workers: int = 1) -> SimResult:
    """Monte Carlo estimate of E[(X - X_hat)^2] under AWGN.

    Deterministic given (scheme, config), independent of workers: trials are
    split into fixed blocks with per-block streams and merged in block order.
    """
    n = config.trials
    blocks = [(b, min(BLOCK, n - b * BLOCK)) for b in range((n + BLOCK - 1) // BLOCK)]
    if workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            partials = list(
                pool.map(
                    lambda args: _simulate_block(scheme, config.sigma, config.seed, *args),
                    blocks,
                )
            )
    else:
        partials = [
            _simulate_block(scheme, config.sigma, config.seed, b, nb) for b, nb in blocks
        ]

    sum_e2 = 0.0
    sum_e4 = 0.0
    anomalies = 0
    flagged = 0
    for p in partials:  # block order: reproducible float accumulation
        sum_e2 += p[0]
        sum_e4 += p[1]
        anomalies += p[2]
        flagged += p[3]
    mse = sum_e2 / n
    var_e2 = max(sum_e4 / n - mse * mse, 0.0)
    ci = 1.96 * math.sqrt(var_e2 / n)
    return SimResult(
        mse=mse,
        mse_ci95=ci,
        anomaly_rate=anomalies / n,
        trials_flagged=flagged,
    )


def estimate_small_ball(cs: CurveSpec, samples: int = 200_000) -> float:
    """Sampling estimate of the curve's small-ball radius.

    The curve is homogeneous: the chord between parameters x and x' depends
    only on psi = x - x', so fold distances reduce to a 1-d scan of
    D(psi) = 2*sqrt(sum c_i^2 sin^2(pi u_i psi)) over psi in (0, 1/2].  The
    scan (plus local golden refinement) locates the nearest distinct fold;
    the radius reported is the chord at half the fold's flat gap, measured
    perpendicular to the curve direction.  Converges from above: finer grids
    only expose closer folds.

    A guard band psi * length > 2 * (2*pi*spacing) excludes the trivial
    along-curve neighborhood, whose chord at the band edge is about twice
    the nearest-fold distance.

    Requires a curve that actually winds: for near-trivial windings (for
    example (1, -1) on an eccentric torus) the closure shortcut is always
    nearer than the perpendicular line gap, no distinct fold exists, and
    the scan raises instead of reporting a curvature-limited radius.
    """
    if samples < 10_000:
        raise ValueError("need at least 1e4 samples")
    torus = cs.torus
    c = torus.c
    u = cs.u.astype(float)
    u_hat_norm = float(np.linalg.norm(cs.u_hat))

    psi_min = 2.0 * cs.spacing / u_hat_norm  # arc threshold 2*(2*pi*spacing)
    if psi_min >= 0.45:
        raise ValueError("curve too short to separate folds from the diagonal")
    j0 = max(1, int(math.ceil(psi_min * 2 * samples)))
    js = np.arange(j0, samples + 1)
    psis = js / (2.0 * samples)

    def chord2(psi):
        s = np.sin(math.pi * np.multiply.outer(np.asarray(psi), u))
        return 4.0 * np.sum((c * s) ** 2, axis=-1)

    d2 = chord2(psis)

    # candidate basins: best grid points, deduplicated by adjacency
    order = np.argsort(d2, kind="stable")[: 64 * 8]
    kept: list[int] = []
    for idx in order:
        if all(abs(idx - k) > 2 for k in kept):
            kept.append(int(idx))
        if len(kept) >= 8:
            break

    step = 1.0 / (2.0 * samples)
    inv_phi = (math.sqrt(5.0) - 1.0) / 2.0
    best = math.inf
    for idx in kept:
        lo = max(psis[idx] - step, psi_min)
        hi = min(psis[idx] + step, 0.5)
        for _ in range(60):
            a = hi - inv_phi * (hi - lo)
            bb = lo + inv_phi * (hi - lo)
            if float(chord2(a)) < float(chord2(bb)):
                hi = bb
            else:
                lo = a
        psi_star = 0.5 * (lo + hi)
        # recover the fold's lattice translate and its perpendicular gap
        n_vec = np.round(u * psi_star)
        if not np.any(n_vec):
            continue
        gap = _TWO_PI * project_orthogonal(c * n_vec, cs.u_hat)
        gap_norm = float(np.linalg.norm(gap))
        if gap_norm < 1e-12:
            continue
        cand = float(intra_torus_distance(torus, gap / 2.0, np.zeros(torus.dim)))
        best = min(best, cand)
    if not math.isfinite(best):
        raise RuntimeError(
            "no distinct fold approaches the curve inside the scan window; "
            "the winding is too small for a fold-limited radius"
        )
    return best


def ball_radius_to_spacing(torus: TorusSpec, delta: float) -> float | None:
    """Invert the small-ball lower bound: smallest spacing giving radius delta.

    Returns None when the torus cannot host such a curve (its smallest
    coordinate radius saturates below delta).
    """
    c_min = torus.c_min
    if delta <= 0.0:
        raise ValueError("delta must be positive")
    if delta >= 2.0 * c_min:
        return None
    return (2.0 * c_min / math.pi) * math.asin(delta / (2.0 * c_min))


def design_scheme(
    codebook: LayerCodebook,
    delta: float,
    alpha: float = 1.0,
    w_max: int = 10_000,
) -> SchemeCode:
    """Design one curve per layer with small-ball radius at least delta.

    Layers that cannot host a feasible curve are skipped.  Raises if no
    layer remains.
    """
    curves = []
    for torus in codebook.layers:
        r_min = ball_radius_to_spacing(torus, delta)
        if r_min is None:
            continue
        found = search_best_w(default_target(torus.dim), torus, r_min, w_max=w_max)
        if found is None:
            continue
        curves.append(found[1])
    if not curves:
        raise InfeasibleDesignError(f"no layer supports a curve with ball radius {delta}")
    return build_scheme(curves, alpha=alpha)


@dataclass(frozen=True)
class TradeoffRow:
    delta: float
    length_single: float | None
    length_multi: float | None
    layers: int


def _total_length(codebook: LayerCodebook, delta: float, w_max: int) -> float | None:
    total = 0.0
    found_any = False
    for torus in codebook.layers:
        r_min = ball_radius_to_spacing(torus, delta)
        if r_min is None:
            continue
        found = search_best_w(default_target(torus.dim), torus, r_min, w_max=w_max)
        if found is None:
            continue
        total += found[1].length
        found_any = True
    return total if found_any else None


def tradeoff_table(
    n: int,
    deltas,
    w_max: int = 10_000,
    codebook: LayerCodebook | None = None,
) -> list[TradeoffRow]:
    """Total curve length versus small-ball radius, multi-layer and single.

    For each delta: layers at pairwise separation 2*delta host one curve
    each, whose spacing target comes from inverting the small-ball lower
    bound; the largest lifting window meeting the target gives the curve.
    The single-torus baseline runs the same procedure on the central torus
    c = (1, ..., 1)/sqrt(n).  Infeasible entries are None.
    """
    central = LayerCodebook(
        layers=(TorusSpec(np.full(n, 1.0 / math.sqrt(n))),),
        min_sep=0.0,
        achieved_sep=math.inf,
    )
    rows = []
    for delta in deltas:
        delta = float(delta)
        single = _total_length(central, delta, w_max)
        book = codebook
        if book is None:
            book = design_layers(n, delta, min_coordinate=delta / 2.0)
        multi = _total_length(book, delta, w_max)
        rows.append(
            TradeoffRow(
                delta=delta,
                length_single=single,
                length_multi=multi,
                layers=book.size,
            )
        )
    return rows


def _fmt(x) -> str:
    return "NA" if x is None else format(x, ".17g")


def format_tradeoff_csv(rows) -> str:
    lines = ["delta,L_single,L_multi"]
    for row in rows:
        lines.append(
            f"{_fmt(row.delta)},{_fmt(row.length_single)},{_fmt(row.length_multi)}"
        )
    return "\n".join(lines) + "\n"


def format_mse_csv(sigma: float, result: SimResult) -> str:
    header = "sigma,mse,ci,anomaly_rate"
    row = ",".join(
        format(v, ".17g")
        for v in (sigma, result.mse, result.mse_ci95, result.anomaly_rate)
    )
    return header + "\n" + row + "\n"
