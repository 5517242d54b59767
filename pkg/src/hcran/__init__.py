"""Slot-based simulator and optimizer for queue-aware energy-efficient
beamforming in downlink heterogeneous cloud radio access networks."""

from .scenario import ChannelState, MbsBeamformers, SystemConfig, Topology, build_scenario, \
    draw_channels, load_config
from .traffic import QueueState, TrafficConfig, draw_arrivals, stability_slope, \
    update_actual_queue, update_virtual_queue
from .metrics import BeamformerSet, SlotMetrics
from .controller import BoundConstants, SlotProblem, build_slot_problem, compute_bound_B, \
    compute_weights, check_drift_inequality, tradeoff_summary
from .wmmse import WmmseState, run_algorithm1
from .qcqp import QcqpProblem, QcqpSolution, QuadConstraint
from .harness import RunSummary, compare_fronthaul, emit_csv, run_trajectory, sweep

__version__ = "0.1.0"
