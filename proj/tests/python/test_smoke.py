import json

import pytest

import pcnbal


def rotating_triangle():
    g = pcnbal.NetworkGraph()
    a, b, c = (g.add_node(n) for n in "abc")
    g.add_channel(a, b, 10, 10)
    g.add_channel(b, c, 10, 10)
    g.add_channel(c, a, 10, 10)
    return g


def test_coefficients():
    g = rotating_triangle()
    assert pcnbal.channel_balance_coefficient(g, 0, 0) == 1.0
    assert pcnbal.node_balance_coefficient(g, 0) == 0.5
    assert pcnbal.node_gini(g, 0) == pytest.approx(0.5)
    assert pcnbal.network_imbalance(g) == pytest.approx(0.5)
    assert pcnbal.gini([0.5, 0.5, 0.5]) == 0.0
    assert pcnbal.gini([0.0, 1.0]) == pytest.approx(0.5)


def test_circular_payment_is_atomic():
    g = rotating_triangle()
    before = g.copy()
    with pytest.raises(pcnbal.PaymentRejected):
        pcnbal.apply_circular_payment(g, [0, 1, 2, 0], [0, 1, 2], 11)
    assert g == before
    with pytest.raises(ValueError):
        pcnbal.apply_circular_payment(g, [0, 1, 2, 0], [0, 1, 2], 0)
    pcnbal.apply_circular_payment(g, [0, 1, 2, 0], [0, 1, 2], 5)
    assert pcnbal.network_imbalance(g) == 0.0
    for n in range(3):
        assert g.total_funds(n) == before.total_funds(n)


def test_cycles():
    g = rotating_triangle()
    cycles = pcnbal.enumerate_cycles(g, 0, 0, pcnbal.Strategy.CYCLE4)
    assert cycles == [([0, 1, 2, 0], [0, 1, 2])]
    with pytest.raises(IndexError):
        pcnbal.enumerate_cycles(g, 0, 7)


def test_simulation_and_evaluation(tmp_path):
    records = pcnbal.generate_synthetic(60, 3, seed=3)
    assert len(records) == 3 + 3 * 56
    g = pcnbal.largest_scc(pcnbal.allocate_funds_coinflip(records, 3))
    start = pcnbal.evaluate(g)

    config = pcnbal.SimulationConfig()
    config.seed = 5
    config.strategy = pcnbal.Strategy.FOAF
    result = pcnbal.run_simulation(g, config, evaluate_samples=True)
    assert len(result.operations) > 0
    assert sum(result.net_fees_msat) == 0
    assert result.samples[0].ops_count == 0
    assert result.samples[-1].ops_count == len(result.operations)
    assert result.samples[-1].success_rate is not None

    end = pcnbal.evaluate(g)
    assert end.network_imbalance < start.network_imbalance
    assert end.success_rate >= start.success_rate
    assert pcnbal.ks_distance(start.gini_values, end.gini_values) > 0
    assert json.loads(end.to_json())["pairs"] == g.node_count * (g.node_count - 1)

    path = tmp_path / "state.csv"
    pcnbal.save_state(g, path)
    assert pcnbal.build_graph(pcnbal.load_snapshot(path)) == g


def test_cheapest_path():
    g = rotating_triangle()
    r = pcnbal.cheapest_path(g, 0, 1)
    assert r["nodes"] == [0, 1]
    assert r["bottleneck"] == 10
    assert pcnbal.cheapest_path(g, 1, 0)["bottleneck"] == 0
    assert pcnbal.success_rate(g) == 0.5


def test_bad_input(tmp_path):
    bad = tmp_path / "bad.csv"
    bad.write_text("a,b,-1,1000,1\n")
    with pytest.raises(pcnbal.InputError):
        pcnbal.load_snapshot(bad)
    with pytest.raises(ValueError):
        pcnbal.ks_distance([], [1.0])
