import math

import numpy as np
import pytest

from localstats.sequences import (
    AffineLatticeSpec,
    ResourceLimitError,
    TorusSequence,
    gen_arithmetic,
    gen_directions,
    gen_iud,
    gen_sqrt,
    read_csv,
    regenerate,
    write_csv,
)
from localstats.statistics import uniformity_check


def test_sqrt_small_cases():
    seq = gen_sqrt(4)
    assert np.allclose(seq.points, [math.sqrt(2) - 1, math.sqrt(3) - 1])
    assert gen_sqrt(100).n_count == 90
    assert gen_sqrt(1).n_count == 0
    with pytest.raises(ValueError):
        gen_sqrt(0)


def test_sqrt_count_formula_and_distance_bound():
    t = 200_000
    seq = gen_sqrt(t)
    assert seq.n_count == t - math.isqrt(t)
    p = seq.points
    assert np.all(p > 0)
    assert np.min(np.minimum(p, 1 - p)) >= 0.5 * (t + 1) ** -0.5


def test_arithmetic_examples():
    assert gen_arithmetic("power", 1 / 3, 0.0, 8).points[7] in (0.0, pytest.approx(0.0, abs=1e-12))
    assert np.all(gen_arithmetic("linear", 3.0, n_max=5).points == 0.0)
    power = gen_arithmetic("power", 0.5, n_max=100).points
    squares = np.array([math.isqrt(n) ** 2 == n for n in range(1, 101)])
    assert np.all(power[squares] == 0.0)
    assert np.allclose(power[~squares], gen_sqrt(100).points, atol=1e-15)


def test_arithmetic_errors():
    with pytest.raises(ValueError):
        gen_arithmetic("geometric", 1.0, n_max=3)
    with pytest.raises(ValueError):
        gen_arithmetic("linear", math.inf, n_max=3)
    with pytest.raises(ValueError):
        gen_arithmetic("cubic", 1.0, n_max=3)


def test_power_with_log_factor_is_finite():
    seq = gen_arithmetic("power", 0.5, -1.0, 50)
    assert np.all(np.isfinite(seq.points)) and seq.points[0] == 0.0


def test_iud_determinism_and_range():
    assert np.array_equal(gen_iud(3, 0).points, gen_iud(3, 0).points)
    one = gen_iud(1, 99).points
    assert one.size == 1 and 0 <= one[0] < 1
    freq, dev = uniformity_check(gen_iud(100_000, 1), [(0.25, 0.5)])[0]
    assert dev <= 0.01


def test_directions_small_disc():
    seq = gen_directions(AffineLatticeSpec(np.eye(2), (0.0, 0.0)), 1.5)
    assert sorted(np.round(seq.points * 8).astype(int).tolist()) == list(range(8))
    assert gen_directions(AffineLatticeSpec(np.eye(2), (0.5, 0.5)), 0.5).n_count == 0


def test_directions_count_and_symmetry():
    seq = gen_directions(AffineLatticeSpec(np.eye(2), (0.0, 0.0)), 100.0)
    assert abs(seq.n_count / (math.pi * 1e4) - 1) < 0.02
    p = np.sort(seq.points)
    q = np.sort(np.mod(seq.points + 0.5, 1.0))
    assert np.allclose(p, q, atol=1e-12)


def test_directions_skewed_basis_is_complete():
    m0 = np.array([[2.0, 1.0], [3.0, 2.0]])  # det 1, long vectors
    spec = AffineLatticeSpec(m0, (0.3, -0.2))
    seq = gen_directions(spec, 20.0)
    # brute force over a generous box
    m = np.stack(np.meshgrid(np.arange(-200, 201), np.arange(-200, 201), indexing="ij"), -1).reshape(-1, 2)
    y = (m + spec.xi) @ m0
    r = np.hypot(y[:, 0], y[:, 1])
    assert seq.n_count == np.count_nonzero((r < 20.0) & (r > 0))


def test_directions_resource_cap():
    with pytest.raises(ResourceLimitError):
        gen_directions(AffineLatticeSpec(np.eye(2), (0, 0)), 1e6, max_candidates=10_000)


def test_affine_spec_requires_det_one():
    with pytest.raises(ValueError):
        AffineLatticeSpec(np.array([[2.0, 0.0], [0.0, 1.0]]), (0, 0))


def test_uniform_distribution_at_desk_scale():
    for seq in (gen_sqrt(100_000), gen_arithmetic("linear", math.sqrt(2), n_max=100_000),
                gen_arithmetic("quadratic", math.sqrt(3), n_max=100_000),
                gen_directions(AffineLatticeSpec(np.eye(2), (0.3, 0.1)), 180.0)):
        for _, dev in uniformity_check(seq, [(0.0, 0.1), (0.2, 0.7), (0.9, 1.0)]):
            assert dev <= 0.01


def test_torus_sequence_validation():
    with pytest.raises(ValueError):
        TorusSequence(np.array([0.2, 1.0]))
    with pytest.raises(ValueError):
        TorusSequence(np.array([-0.1]))


@pytest.mark.parametrize("seq", [gen_sqrt(500), gen_iud(300, 4), gen_arithmetic("power", 0.3, 1.5, 200),
                                 gen_directions(AffineLatticeSpec(np.eye(2), (0.2, 0.7)), 12.0)],
                         ids=["sqrt", "iud", "power", "directions"])
def test_csv_round_trip_and_regeneration(tmp_path, seq):
    path = write_csv(seq, tmp_path / "s.csv")
    back = read_csv(path)
    assert np.array_equal(back.points, seq.points)
    assert np.array_equal(regenerate(back.meta).points, seq.points)


def test_read_csv_reports_line_numbers(tmp_path):
    path = tmp_path / "bad.csv"
    path.write_text('# {"kind": "custom", "n_count": 2}\n0.5\nabc\n')
    with pytest.raises(ValueError, match=r"bad.csv:3"):
        read_csv(path)
    path.write_text('# {"kind": "custom", "n_count": 3}\n0.5\n0.25\n')
    with pytest.raises(ValueError, match="n_count"):
        read_csv(path)
