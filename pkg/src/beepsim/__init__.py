"""beepsim: deterministic beep-model network simulator and protocol suite."""

from .codec import DecodeError, decode, decode_stream, encode
from .engine import (
    BEEP,
    LISTEN,
    Graph,
    ProtocolError,
    RoundRecord,
    RunReport,
    SimulationTimeout,
    diameter,
    distances,
    read_graph,
    simulate,
    verify_reception,
    write_graph,
    write_trace,
)
from .graphs import GraphSpec, generate, or_oracle, parse_graph_spec, reference_dfs
from .multicast import (
    compute_schedule,
    lower_bound,
    multi_broadcast,
    multi_broadcast_noprov,
    multi_broadcast_prov,
)
from .traversal import dfs, gossip
from .waves import (
    BroadcastOutput,
    ProtocolRecorder,
    ProtocolRun,
    WaveConfig,
    beep_wave_relay,
    beep_wave_source,
    broadcast,
    collect_messages,
    elect_leader,
    estimate_diameter,
    get_message_length,
    wave_source_rounds,
)

__all__ = [
    "BEEP",
    "LISTEN",
    "BroadcastOutput",
    "DecodeError",
    "Graph",
    "GraphSpec",
    "ProtocolError",
    "ProtocolRecorder",
    "ProtocolRun",
    "RoundRecord",
    "RunReport",
    "SimulationTimeout",
    "WaveConfig",
    "beep_wave_relay",
    "beep_wave_source",
    "broadcast",
    "collect_messages",
    "compute_schedule",
    "decode",
    "decode_stream",
    "dfs",
    "diameter",
    "distances",
    "elect_leader",
    "encode",
    "estimate_diameter",
    "generate",
    "get_message_length",
    "gossip",
    "lower_bound",
    "multi_broadcast",
    "multi_broadcast_noprov",
    "multi_broadcast_prov",
    "or_oracle",
    "parse_graph_spec",
    "read_graph",
    "reference_dfs",
    "simulate",
    "verify_reception",
    "wave_source_rounds",
    "write_graph",
    "write_trace",
]

__version__ = "0.1.0"
