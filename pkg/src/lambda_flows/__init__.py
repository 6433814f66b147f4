"""
Lambda Flows Library

Simulation and validation toolkit for Lambda-coalescents and the flows that
drive them.

Key features:
- Exchangeable partitions of [n] and the Coag operator
- Lambda measures: merger rates, Psi, regime classification, the CDI speed v(t)
- Jump-chain Lambda-coalescent simulation
- Exact flows of bridges built from Poisson reproduction events
- Lookdown graphs on n levels and their flow of partitions
- Lambda Fleming-Viot paths, Eves and the (flow, Eves) decomposition
- Statistical and exact validation suite with PASS / FAIL / UNDECIDED verdicts
"""

from .partition import PartitionN, coag, make_partition, identity_partition, encode_single_block, decode_single_block
from .measure import LambdaMeasure, make_measure, classify, psi, lambda_rate, cdi_speed
from .coalescent import CoalescentPath, simulate_coalescent, block_count_curve, tmrca
from .bridge import Bridge, BridgeFlowEvents, compose, partition_from_bridge, simulate_bridge_flow
from .lookdown import LookdownGraphN, ReproductionEvent, flow_partition, reconstruct_event, sample_graph
from .flemingviot import FvRun, simulate_fv, extract_eves, decompose_run, recompose_path
from .validate import run_suite
from .models import EveReport, MeasureSpec, MeasureState, Regime, RegimeClass, RunConfig, TestReport
from .errors import LambdaFlowsError

__version__ = "1.0.0"
__all__ = [
    "PartitionN",
    "coag",
    "make_partition",
    "identity_partition",
    "encode_single_block",
    "decode_single_block",
    "LambdaMeasure",
    "make_measure",
    "classify",
    "psi",
    "lambda_rate",
    "cdi_speed",
    "CoalescentPath",
    "simulate_coalescent",
    "block_count_curve",
    "tmrca",
    "Bridge",
    "BridgeFlowEvents",
    "compose",
    "partition_from_bridge",
    "simulate_bridge_flow",
    "LookdownGraphN",
    "ReproductionEvent",
    "flow_partition",
    "reconstruct_event",
    "sample_graph",
    "FvRun",
    "simulate_fv",
    "extract_eves",
    "decompose_run",
    "recompose_path",
    "run_suite",
    "EveReport",
    "MeasureSpec",
    "MeasureState",
    "Regime",
    "RegimeClass",
    "RunConfig",
    "TestReport",
    "LambdaFlowsError",
]
