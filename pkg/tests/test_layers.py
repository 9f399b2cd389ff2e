import math

import numpy as np
import pytest

from toruscodes import (
    GridResolutionError,
    InfeasibleSeparationError,
    LayerCodebook,
    TorusSpec,
    design_layers,
    inter_torus_distance,
    validate_codebook,
)


def test_two_dim_codebook():
    cb = design_layers(2, 0.3)
    assert cb.size >= 2
    assert cb.achieved_sep >= 0.6
    assert validate_codebook(cb).ok


def test_three_dim_codebook_size():
    cb = design_layers(3, 0.05)
    assert cb.size >= 20
    # regression lock for the deterministic greedy at the default grid step
    assert cb.size == 145
    assert cb.achieved_sep >= 0.1


def test_layers_sorted_and_positive():
    cb = design_layers(3, 0.1)
    cs = [tuple(t.c) for t in cb.layers]
    assert cs == sorted(cs)
    for t in cb.layers:
        assert np.all(t.c > 0)
        assert abs(np.linalg.norm(t.c) - 1.0) < 1e-12


def test_single_layer_codebook():
    central = TorusSpec(np.ones(3) / math.sqrt(3))
    cb = design_layers(3, 0.2, strategy="user-supplied", layers=[central])
    assert cb.size == 1
    report = validate_codebook(cb)
    assert report.unconstrained and report.achieved_sep == math.inf


def test_validate_flags_duplicates():
    # validate recomputes distances, catching a stale achieved_sep claim
    central = TorusSpec(np.ones(3) / math.sqrt(3))
    cb = LayerCodebook(layers=(central, central), min_sep=0.2, achieved_sep=0.2)
    report = validate_codebook(cb)
    assert not report.ok
    assert report.violations[0][2] == 0.0
    assert report.achieved_sep == 0.0


def test_greedy_determinism():
    a = design_layers(3, 0.08).to_json()
    b = design_layers(3, 0.08).to_json()
    assert a == b


def test_monotone_in_delta_on_fixed_grid():
    sizes = [design_layers(3, d, grid_step=0.025).size for d in (0.05, 0.08, 0.12, 0.2)]
    assert all(a >= b for a, b in zip(sizes, sizes[1:]))


def test_separation_invariant(rng):
    for delta in (0.05, 0.1, 0.2, 0.3):
        cb = design_layers(3, delta)
        layers = cb.layers
        worst = min(
            inter_torus_distance(layers[i], layers[j])
            for i in range(len(layers))
            for j in range(i + 1, len(layers))
        )
        assert worst >= 2 * delta - 1e-12
        assert abs(worst - cb.achieved_sep) < 1e-15


def test_infeasible_and_grid_errors():
    with pytest.raises(InfeasibleSeparationError):
        design_layers(2, 0.5)
    with pytest.raises(InfeasibleSeparationError):
        design_layers(3, 0.62)
    with pytest.raises(GridResolutionError):
        design_layers(4, 0.002)  # grid would explode
    with pytest.raises(ValueError):
        design_layers(1, 0.1)
    with pytest.raises(ValueError):
        design_layers(3, 0.1, strategy="mystery")


def test_json_roundtrip():
    cb = design_layers(2, 0.25)
    again = LayerCodebook.from_json(cb.to_json())
    assert again.size == cb.size
    assert again.delta == cb.delta
    for a, b in zip(again.layers, cb.layers):
        assert a == b


def test_user_codebook_rejects_bad_separation():
    a = TorusSpec(np.array([0.6, 0.8]))
    b = TorusSpec(np.array([0.61, math.sqrt(1 - 0.61**2)]))
    with pytest.raises(ValueError):
        design_layers(2, 0.3, strategy="user-supplied", layers=[a, b])
