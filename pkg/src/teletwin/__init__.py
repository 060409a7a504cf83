"""Deterministic digital-twin teleoperation simulator.

A command stream drives a remote scene and its twin through an unreliable
link. During outages the twin keeps following the operator while commands
accumulate in a buffer; on restore the remote replays the buffer at double
speed until it catches up. The package bundles the channel model, the
routing state machine, a peg-transfer world, synthetic operators, a trial
harness with reports, and a live WebSocket session service.
"""

__version__ = "0.1.0"
