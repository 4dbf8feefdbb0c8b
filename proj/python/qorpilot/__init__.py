"""Repository property graphs, doc cards, hybrid retrieval and QoR-gated
execution primitives."""

from _qorpilot import (  # noqa: F401
    CodeGraph,
    Index,
    QorpilotError,
    __version__,
    bisect,
    build_graph,
    delta_percent,
    deserialize_graph,
    format_delta,
    gate,
    generate_cards,
    parse_flow_config,
    parse_qor_json,
    parse_qor_log,
    schedule,
)
