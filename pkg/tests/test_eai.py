import numpy as np
import pytest

from csma_eai import (
    build_graph,
    compare_load_vs_saturated,
    compute_and_compare,
    enumerate_independent_sets,
    link_throughputs,
    reclassify_overshoot,
    saturated_throughputs,
    solve_target_throughputs,
)
from csma_eai.errors import (
    InfeasibleTargetError,
    IterationLimitExceededError,
    LengthMismatchError,
)
from conftest import RHO0, random_graph_edges

# Expected values for the four-link fixture, frozen from closed-form
# solutions of the stationary equations (40-digit arithmetic):
#   solve with links 3,4 pinned at rho0 and targets th1=0.2, th2=0.4
#   reduces to 4a^2 + (2+K)a - K = 0 with K = 1 + 2*rho0 + rho0^2,
#   b = 2a/(1-a); the later solves reduce the same way.
TH0_FIG1A = 0.4266011948589333
SOLVE1_RHO = [0.8797656527998023, 14.63418188373307]
SOLVE2_RHO1 = 1.7993596588405615
TH1_FIG1A = [0.2, 0.2621875611386647, 0.5951895135239864, 0.5951895135239864]
FINAL_RHO = [0.7688079654334581, RHO0, 2.7666541432611196, 2.7666541432611196]
TH2_FIG1A = [0.2, 0.38773425802642065, 0.4266, 0.4266]


def test_compare_partitions_worked_example():
    th0 = [TH0_FIG1A] * 4
    split = compare_load_vs_saturated([0.2, 0.4, 0.4266, 0.4266], th0)
    assert not split.network_saturated
    assert split.unsaturated == frozenset({1, 2})
    assert split.saturated == frozenset({3, 4})


def test_compare_all_above_is_saturated():
    split = compare_load_vs_saturated([0.5] * 4, [TH0_FIG1A] * 4)
    assert split.network_saturated
    assert split.saturated == frozenset({1, 2, 3, 4})
    assert split.unsaturated == frozenset()


def test_compare_exact_boundary_is_saturated():
    th0 = np.array([0.3, 0.4])
    split = compare_load_vs_saturated(th0.copy(), th0)
    assert split.network_saturated


def test_compare_tolerance_handles_rounded_loads():
    # a load quoted to four decimals sits a hair under the computed value
    split = compare_load_vs_saturated([0.4266], [TH0_FIG1A])
    assert split.network_saturated
    split = compare_load_vs_saturated([0.42], [TH0_FIG1A])
    assert not split.network_saturated


def test_compare_length_mismatch():
    with pytest.raises(LengthMismatchError):
        compare_load_vs_saturated([0.1, 0.2], [0.3])


def test_solve_worked_example_first_step(fig1a):
    space = enumerate_independent_sets(fig1a)
    rho = solve_target_throughputs(
        space,
        fixed={3: RHO0, 4: RHO0},
        targets={1: 0.2, 2: 0.4},
        initial={1: RHO0, 2: RHO0},
    )
    np.testing.assert_allclose(rho[:2], SOLVE1_RHO, atol=1e-5)
    np.testing.assert_allclose(rho[2:], RHO0, rtol=0)
    th = link_throughputs(space, rho)
    np.testing.assert_allclose(th[:2], [0.2, 0.4], atol=1e-8)


def test_solve_worked_example_second_step(fig1a):
    space = enumerate_independent_sets(fig1a)
    rho = solve_target_throughputs(
        space,
        fixed={2: RHO0, 3: RHO0, 4: RHO0},
        targets={1: 0.2},
    )
    assert rho[0] == pytest.approx(SOLVE2_RHO1, abs=1e-5)
    np.testing.assert_allclose(
        link_throughputs(space, rho), TH1_FIG1A, atol=1e-7
    )


def test_solve_single_link_closed_form():
    space = enumerate_independent_sets(build_graph(1, []))
    rho = solve_target_throughputs(space, fixed={}, targets={1: 0.3})
    assert rho[0] == pytest.approx(0.3 / 0.7, abs=1e-7)


def test_solve_rejects_bad_partition(fig1a):
    space = enumerate_independent_sets(fig1a)
    with pytest.raises(ValueError):
        solve_target_throughputs(space, fixed={1: 1.0}, targets={1: 0.2})
    with pytest.raises(ValueError):
        solve_target_throughputs(space, fixed={1: 1.0, 2: 1.0}, targets={3: 0.2})
    with pytest.raises(ValueError):
        solve_target_throughputs(
            space,
            fixed={3: RHO0, 4: RHO0},
            targets={1: 0.0, 2: 0.4},
        )


def test_solve_infeasible_joint_target():
    # two adjacent links can never split more than the whole channel
    g = build_graph(2, [(1, 2)])
    space = enumerate_independent_sets(g)
    with pytest.raises(InfeasibleTargetError):
        solve_target_throughputs(
            space, fixed={}, targets={1: 0.6, 2: 0.6}
        )


def test_reclassify_worked_example():
    rho_tilde = np.array([0.8798, 14.6341, RHO0, RHO0])
    rho = np.full(4, RHO0)
    sat, unsat, changed = reclassify_overshoot(
        rho_tilde, rho, frozenset({3, 4}), frozenset({1, 2})
    )
    assert changed
    assert sat == frozenset({2, 3, 4})
    assert unsat == frozenset({1})


def test_reclassify_no_overshoot():
    rho = np.full(3, 2.0)
    sat, unsat, changed = reclassify_overshoot(
        np.array([1.0, 1.5, 2.0]), rho, frozenset({3}), frozenset({1, 2})
    )
    assert not changed
    assert sat == frozenset({3})
    assert unsat == frozenset({1, 2})


def test_reclassify_empty_unsaturated():
    rho = np.full(2, 2.0)
    sat, unsat, changed = reclassify_overshoot(
        rho.copy(), rho, frozenset({1, 2}), frozenset()
    )
    assert not changed and unsat == frozenset()


def test_compute_and_compare_worked_example(fig1a):
    sol = compute_and_compare(fig1a, RHO0, [0.2, 0.4, 0.4266, 0.4266])
    assert not sol.network_saturated
    np.testing.assert_allclose(sol.throughputs, TH2_FIG1A, atol=1e-6)
    np.testing.assert_allclose(sol.equivalent_intensities, FINAL_RHO, atol=1e-4)
    assert sol.saturated_set == frozenset({2})
    assert sol.unsaturated_set == frozenset({1, 3, 4})
    assert sol.iterations == 2

    first, second = sol.trace
    assert [s.unsaturated for s in first.solves] == [
        frozenset({1, 2}),
        frozenset({1}),
    ]
    np.testing.assert_allclose(
        first.solves[0].rho_tilde, SOLVE1_RHO + [RHO0, RHO0], atol=1e-4
    )
    np.testing.assert_allclose(
        first.solves[1].rho_tilde, [SOLVE2_RHO1, RHO0, RHO0, RHO0], atol=1e-4
    )
    np.testing.assert_allclose(first.throughputs, TH1_FIG1A, atol=1e-6)
    assert first.saturated_next == frozenset({2})
    np.testing.assert_allclose(second.rho_tilde, FINAL_RHO, atol=1e-4)

    # all equivalent intensities imply nonnegative extra countdown time
    assert np.all(sol.extra_countdown >= -1e-12)


def test_compute_and_compare_paper_rounding(fig1a):
    # the published four-decimal vectors
    sol = compute_and_compare(fig1a, RHO0, [0.2, 0.4, 0.4266, 0.4266])
    np.testing.assert_allclose(
        sol.throughputs, [0.2, 0.3877, 0.4266, 0.4266], atol=1e-3
    )
    np.testing.assert_allclose(
        sol.equivalent_intensities, [0.7688, 5.3548, 2.7667, 2.7667], atol=1e-3
    )


def test_compute_and_compare_saturated_exit(fig1a):
    sol = compute_and_compare(fig1a, RHO0, [0.5, 0.5, 0.5, 0.5])
    assert sol.network_saturated
    assert np.array_equal(sol.throughputs, saturated_throughputs(fig1a, RHO0))
    assert sol.saturated_set == frozenset({1, 2, 3, 4})
    assert sol.unsaturated_set == frozenset()
    assert sol.iterations == 0
    assert sol.trace == ()


def test_compute_and_compare_single_link():
    g = build_graph(1, [])
    sol = compute_and_compare(g, 1.0, [0.3])
    assert sol.throughputs[0] == pytest.approx(0.3, abs=1e-8)
    assert sol.equivalent_intensities[0] == pytest.approx(3 / 7, abs=1e-7)
    assert sol.unsaturated_set == frozenset({1})


def test_compute_and_compare_zero_load_link(fig1a):
    sol = compute_and_compare(fig1a, RHO0, [0.0, 0.4, 0.4, 0.4])
    assert sol.throughputs[0] == 0.0
    assert sol.equivalent_intensities[0] == 0.0
    assert 1 not in sol.saturated_set | sol.unsaturated_set
    assert sol.saturated_set | sol.unsaturated_set == frozenset({2, 3, 4})
    # removing the idle link turns the rest into a star around link 2
    assert sol.throughputs[2] == pytest.approx(0.4, abs=1e-8)


def test_compute_and_compare_all_zero_loads(fig1a):
    sol = compute_and_compare(fig1a, RHO0, [0.0] * 4)
    assert np.array_equal(sol.throughputs, np.zeros(4))
    assert sol.saturated_set == sol.unsaturated_set == frozenset()
    assert sol.iterations == 0 and not sol.network_saturated


def test_compute_and_compare_iteration_guard(fig1a):
    with pytest.raises(IterationLimitExceededError) as excinfo:
        compute_and_compare(
            fig1a, RHO0, [0.2, 0.4, 0.4266, 0.4266], max_iterations=1
        )
    assert len(excinfo.value.trace) == 1


@pytest.mark.parametrize("seed", range(30))
def test_solution_structural_properties(seed):
    rng = np.random.default_rng(800 + seed)
    n = int(rng.integers(1, 7))
    g = build_graph(n, random_graph_edges(rng, n))
    rho = rng.uniform(0.5, 8.0, size=n)
    th0 = saturated_throughputs(g, rho)
    loads = th0 * rng.uniform(0.3, 1.3, size=n)
    loads[int(rng.integers(n))] = th0[int(rng.integers(n))] * 0.5
    loads = np.clip(loads, 0.0, 0.95)
    sol = compute_and_compare(g, rho, loads)

    f = np.asarray(loads)
    assert sol.saturated_set | sol.unsaturated_set == frozenset(range(1, n + 1))
    assert not sol.saturated_set & sol.unsaturated_set
    # equivalent intensity never exceeds the configured one
    assert np.all(sol.equivalent_intensities <= rho + 1e-12)
    assert np.all(sol.extra_countdown >= -1e-12)
    for i in sol.unsaturated_set:
        assert abs(sol.throughputs[i - 1] - f[i - 1]) <= 1e-6
    for i in sol.saturated_set:
        assert sol.throughputs[i - 1] <= f[i - 1] + 1e-6
        assert sol.equivalent_intensities[i - 1] == rho[i - 1]
    # throughput vector stays feasible
    assert np.all(sol.throughputs >= 0) and np.all(sol.throughputs < 1)
    for u, v in g.edges:
        assert sol.throughputs[u - 1] + sol.throughputs[v - 1] < 1
