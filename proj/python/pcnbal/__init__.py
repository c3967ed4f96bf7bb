"""Payment channel network balance simulation."""

from ._pcnbal import (
    AgreementMode,
    Channel,
    EvaluationReport,
    InputError,
    InvariantViolation,
    MetricsSample,
    NetworkGraph,
    OperationRecord,
    PaymentRejected,
    SimulationConfig,
    SimulationResult,
    SnapshotRecord,
    Strategy,
    __version__,
    all_pairs_bottlenecks,
    allocate_funds_coinflip,
    apply_circular_payment,
    build_graph,
    channel_balance_coefficient,
    cheapest_path,
    enumerate_cycles,
    evaluate,
    generate_synthetic,
    gini,
    gini_distribution,
    ks_distance,
    largest_scc,
    load_snapshot,
    median_payment_size,
    network_imbalance,
    node_balance_coefficient,
    node_gini,
    run_simulation,
    save_state,
    success_rate,
)

__all__ = [name for name in dir() if not name.startswith("_")]
