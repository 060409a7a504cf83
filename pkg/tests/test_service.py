import json

import pytest
from websockets.sync.client import connect

from teletwin.channel import ChannelParams
from teletwin.controller import ControllerConfig, StrategyKind
from teletwin.service import Session, SessionConfig, pose_from_wire

from service_helpers import (
    command_message,
    drive_full_transfer,
    next_state,
    recv_until,
    running_server,
    send,
)


def fast_config(**overrides) -> SessionConfig:
    defaults = dict(
        strategy=StrategyKind.REPLAY,
        channel=None,  # manual outages only
        controller=ControllerConfig(tick_rate=100.0),
        broadcast_rate=50.0,
        time_scale=20.0,
    )
    defaults.update(overrides)
    return SessionConfig(**defaults)


class TestSessionUnit:
    """Session logic without a socket."""

    def test_frames_stream_without_input(self):
        session = Session(fast_config())
        frames = []
        for _ in range(10):
            frames.extend(session.tick())
        states = [f for f in frames if f["type"] == "state"]
        assert len(states) == 5  # 100 Hz ticks, 50 Hz broadcast
        assert states[0]["mode"] == "normal"
        assert states[0]["link"] == "up"

    def test_state_snapshot_is_single_tick(self):
        session = Session(fast_config())
        session.handle_message(json.dumps(command_message(0.0, 0.0, 0.05, 0.8)))
        frames = []
        for _ in range(4):
            frames.extend(session.tick())
        state = next(f for f in frames if f["type"] == "state" and f["twin"]["tool"] is not None)
        # Twin and remote come from the same tick under normal link.
        assert state["twin"]["tool"] == state["remote"]["tool"]

    def test_malformed_json_gets_error_reply(self):
        session = Session(fast_config())
        replies = session.handle_message("{not json")
        assert replies and replies[0]["type"] == "error"

    def test_unknown_type_echoes_payload(self):
        session = Session(fast_config())
        replies = session.handle_message(json.dumps({"type": "warp", "x": 1}))
        assert replies[0]["type"] == "error"
        assert replies[0]["offending"] == {"type": "warp", "x": 1}

    def test_bad_command_rejected(self):
        session = Session(fast_config())
        replies = session.handle_message(json.dumps({"type": "command", "pose": {"position": {}}, "jaw": 0.5}))
        assert replies[0]["type"] == "error"

    def test_non_finite_command_rejected(self):
        # Python's json parser accepts bare NaN; the pose validation must not.
        session = Session(fast_config())
        raw = '{"type":"command","pose":{"position":{"x":NaN,"y":0,"z":0},' \
              '"orientation":{"w":1,"x":0,"y":0,"z":0}},"jaw":0.5}'
        replies = session.handle_message(raw)
        assert replies[0]["type"] == "error"
        assert session.tick() is not None  # session survives

    def test_out_of_range_jaw_rejected(self):
        session = Session(fast_config())
        msg = command_message(0.0, 0.0, 0.05, 0.8)
        msg["jaw"] = 2.0
        replies = session.handle_message(json.dumps(msg))
        assert replies[0]["type"] == "error"

    def test_inject_outage_applies_next_tick(self):
        session = Session(fast_config())
        session.tick()
        session.handle_message(json.dumps({"type": "inject_outage", "duration": 0.05}))
        frames = []
        for _ in range(10):
            frames.extend(session.tick())
        links = [f["link"] for f in frames if f["type"] == "state"]
        assert "down" in links
        assert links[-1] == "up"  # 0.05 s is 5 ticks at 100 Hz

    def test_command_while_baseline_outage_flagged_locked(self):
        session = Session(fast_config(strategy=StrategyKind.BASELINE))
        session.handle_message(json.dumps({"type": "inject_outage", "duration": 1.0}))
        session.tick()
        session.handle_message(json.dumps(command_message(0.0, 0.0, 0.05, 0.8)))
        frames = session.tick()
        locked_events = [f for f in frames if f["type"] == "event" and f["name"] == "command_locked"]
        assert locked_events and locked_events[0]["locked"] is True

    def test_reset_clears_clock_and_buffer(self):
        session = Session(fast_config())
        session.handle_message(json.dumps({"type": "inject_outage", "duration": 1.0}))
        for _ in range(30):
            session.handle_message(json.dumps(command_message(0.0, 0.0, 0.05, 0.8)))
            session.tick()
        assert len(session.core.controller.buffer) > 0
        session.handle_message(json.dumps({"type": "reset"}))
        frames = session.tick()
        assert len(session.core.controller.buffer) == 0
        state = next(f for f in frames if f["type"] == "state")
        assert state["now"] == 0.0

    def test_set_strategy_applies_at_boundary(self):
        session = Session(fast_config())
        session.handle_message(json.dumps({"type": "set_strategy", "value": "baseline"}))
        frames = session.tick()
        state = next(f for f in frames if f["type"] == "state")
        assert state["strategy"] == "baseline"

    def test_set_seed_regenerates_schedule(self):
        cfg = fast_config(channel=ChannelParams(), schedule_horizon=50.0)
        session = Session(cfg)
        session.handle_message(json.dumps({"type": "set_seed", "value": 99}))
        session.tick()
        assert session.seed == 99

    def test_scheduled_channel_rolls_past_horizon(self):
        cfg = fast_config(channel=ChannelParams(), schedule_horizon=0.5)
        session = Session(cfg)
        for _ in range(120):  # 1.2 s of ticks crosses two windows
            session.tick()

    def test_pose_wire_round_trip(self):
        msg = command_message(0.01, -0.02, 0.03, 0.5)
        pose = pose_from_wire(msg["pose"])
        assert pose.position.as_tuple() == (0.01, -0.02, 0.03)


class TestServerSocket:
    def test_frames_stream_on_silent_connection(self):
        with running_server(fast_config()) as server:
            with connect(server.url) as ws:
                first = next_state(ws)
                second = next_state(ws)
                assert second["now"] > first["now"]
                assert first["twin"]["board"]["posts"]

    def test_two_clients_are_isolated(self):
        with running_server(fast_config()) as server:
            with connect(server.url) as a, connect(server.url) as b:
                send(a, command_message(0.02, 0.0, 0.05, 0.8))
                state_a = recv_until(a, lambda f: f["type"] == "state" and f["twin"]["tool"]["pose"]["position"]["x"] == 0.02)
                for _ in range(3):
                    state_b = next_state(b)
                    assert state_b["twin"]["tool"]["pose"]["position"]["x"] != 0.02

    def test_error_reply_keeps_session_alive(self):
        with running_server(fast_config()) as server:
            with connect(server.url) as ws:
                ws.send("{broken")
                err = recv_until(ws, lambda f: f["type"] == "error")
                assert "malformed" in err["message"]
                assert next_state(ws)  # still streaming

    def test_static_ui_served_on_same_port(self, tmp_path):
        import asyncio
        import threading
        import urllib.error
        import urllib.request

        from teletwin.service import serve

        (tmp_path / "index.html").write_text("<html>console</html>")
        state: dict = {}
        ready = threading.Event()

        def run() -> None:
            loop = asyncio.new_event_loop()
            asyncio.set_event_loop(loop)
            task = loop.create_task(
                serve(fast_config(), "127.0.0.1", 0,
                      on_ready=lambda p: (state.update(port=p), ready.set()),
                      ui_dir=tmp_path)
            )
            state["loop"], state["task"] = loop, task
            try:
                loop.run_until_complete(task)
            except asyncio.CancelledError:
                pass

        thread = threading.Thread(target=run, daemon=True)
        thread.start()
        assert ready.wait(10)
        try:
            with urllib.request.urlopen(f"http://127.0.0.1:{state['port']}/") as resp:
                assert resp.status == 200
                assert b"console" in resp.read()
            with pytest.raises(urllib.error.HTTPError):
                urllib.request.urlopen(f"http://127.0.0.1:{state['port']}/../secrets")
        finally:
            state["loop"].call_soon_threadsafe(state["task"].cancel)
            thread.join(timeout=10)

    def test_scripted_full_transfer_emits_task_done(self):
        with running_server(fast_config(time_scale=50.0)) as server:
            with connect(server.url) as ws:
                frames: list = []
                done = drive_full_transfer(ws, collect=frames, inject_every=2)
                assert done["metrics"]["completed"] is True
                assert done["metrics"]["completion_time"] > 0
                modes = {f["mode"] for f in frames if f["type"] == "state"}
                assert "outage" in modes and "recovery" in modes
                grasps = [f for f in frames if f["type"] == "event" and f["name"] == "grasp"]
                assert len(grasps) >= 6
