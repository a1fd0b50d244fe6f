import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from cutdg.mesh1d import Mesh1D, Scenario1D, build_mp_mesh, build_scenario_mesh


def test_mp_example_widths():
    mesh = build_mp_mesh(N=5, alpha=0.25, k=3)
    h = 0.2
    assert mesh.n_cells == 6
    np.testing.assert_allclose(mesh.widths, [h, h, h / 4, 3 * h / 4, h, h],
                               rtol=0, atol=1e-15)
    assert mesh.stabilized == {2}
    assert mesh.cut_pairs == ((2, 0.25),)


def test_mp_tiny_alpha_partition_of_unity():
    mesh = build_mp_mesh(N=20, alpha=1e-8, k=10)
    assert mesh.n_cells == 21
    # edges are absolute coordinates, so the tiny width carries ~eps*x noise
    assert mesh.widths.min() == pytest.approx(1e-8 / 20, rel=1e-6)
    assert abs(mesh.widths.sum() - 1.0) <= 1e-15


def test_mp_rejects_bad_inputs():
    with pytest.raises(ValueError):
        build_mp_mesh(N=5, alpha=0.6, k=3)
    with pytest.raises(ValueError):
        build_mp_mesh(N=5, alpha=0.25, k=1)
    with pytest.raises(ValueError):
        build_mp_mesh(N=5, alpha=0.25, k=5)
    with pytest.raises(ValueError):
        build_mp_mesh(N=3, alpha=0.25, k=2)


def test_scenario_s3_equidistant():
    mesh = build_scenario_mesh(Scenario1D("S3", 20))
    assert mesh.n_cells == 20
    np.testing.assert_allclose(mesh.widths, 0.05, rtol=0, atol=1e-16)
    assert not mesh.stabilized


def test_scenario_s1_cell_count_by_enumeration():
    # independent count of split cells: left edges j/N inside [0.1, 0.9)
    N = 20
    expected_split = sum(1 for j in range(N) if 0.1 <= j / N < 0.9)
    mesh = build_scenario_mesh(Scenario1D("S1", N, alpha=0.1))
    assert expected_split == 16
    assert mesh.n_cells == (N - expected_split) + 2 * expected_split == 36
    assert abs(mesh.widths.sum() - 1.0) <= 1e-14
    assert len(mesh.stabilized) == expected_split


def test_scenario_s2_alpha_range():
    mesh = build_scenario_mesh(Scenario1D("S2", 20, seed=42))
    for _, alpha in mesh.cut_pairs:
        assert 1e-6 <= alpha <= 0.1 + 1e-6
    # reproducible from the seed
    again = build_scenario_mesh(Scenario1D("S2", 20, seed=42))
    np.testing.assert_array_equal(mesh.edges, again.edges)
    assert mesh.meta["seed"] == 42


def test_scenario_rejects_bad_n():
    with pytest.raises(ValueError):
        build_scenario_mesh(Scenario1D("S1", 25, alpha=0.2))


@settings(max_examples=40, deadline=None)
@given(n=st.sampled_from([10, 20, 30, 50, 100]),
       alpha=st.floats(1e-10, 0.5),
       seed=st.integers(0, 2**32 - 1),
       kind=st.sampled_from(["S1", "S2", "S3"]))
def test_scenario_invariants(n, alpha, seed, kind):
    mesh = build_scenario_mesh(Scenario1D(kind, n, alpha=alpha, seed=seed))
    assert abs(mesh.widths.sum() - 1.0) <= 1e-14
    widths = mesh.widths
    stab = sorted(mesh.stabilized)
    for a, b in zip(stab, stab[1:]):
        assert b != a + 1
    for k1, a in mesh.cut_pairs:
        pair_width = widths[k1] + widths[k1 + 1]
        assert abs(widths[k1] / pair_width - a) <= 1e-13
        assert widths[k1] <= widths[k1 + 1] + 1e-16
        assert k1 in mesh.stabilized


def test_direct_constructor_validation():
    with pytest.raises(ValueError):
        Mesh1D(np.array([0.0, 0.5, 0.5, 1.0]))
    with pytest.raises(ValueError):
        Mesh1D(np.array([0.0, 0.9]))
    with pytest.raises(ValueError):  # adjacent stabilized cells
        Mesh1D(np.array([0.0, 0.2, 0.4, 0.6, 0.8, 1.0]),
               stabilized=frozenset({1, 2}))


def test_csv_export(tmp_path):
    mesh = build_mp_mesh(N=5, alpha=0.25, k=3)
    path = tmp_path / "mesh.csv"
    mesh.write_csv(path)
    lines = path.read_text().strip().splitlines()
    assert lines[0] == "cell_index,x_left,x_right,is_stabilized"
    assert len(lines) == mesh.n_cells + 1
    assert lines[3].endswith(",1")  # the small cell is flagged
