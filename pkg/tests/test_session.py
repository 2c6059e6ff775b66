import asyncio
import json

import pytest

from tactile_sleeve.mapping import MappingConfig
from tactile_sleeve.patterns import Simultaneity, Verdict, builtin_catalog
from tactile_sleeve.scene_store import load_bundled_scene
from tactile_sleeve.session import (LogStore, RunSummary, SessionService,
                                    aggregate_runs, load_session_logs,
                                    load_trial_records, round_half_up,
                                    runs_by_person)
from tactile_sleeve.sim import CameraModel
from tactile_sleeve.wire import FRAME_LEN, decode_wireframe

TABLE_TIMES = [
    [337.0, 206.0, 155.0],
    [340.0, 229.0, 238.0],
    [466.0, 120.0, 111.0],
    [281.0, 239.0, 175.0],
    [175.0, 102.0, 59.0],
]


class TestAggregateRuns:
    def test_reference_times(self):
        summary = aggregate_runs(TABLE_TIMES)
        assert summary.seconds_row == (320, 179, 148)
        assert summary.means == pytest.approx((319.8, 179.2, 147.6))
        assert summary.percent_row == (100, 56, 46)

    def test_single_person_single_run(self):
        summary = aggregate_runs([[100.0]])
        assert summary.seconds_row == (100,)
        assert summary.percent_row == (100,)

    def test_permutation_invariant(self):
        shuffled = [TABLE_TIMES[i] for i in (3, 0, 4, 2, 1)]
        assert aggregate_runs(shuffled).seconds_row == \
            aggregate_runs(TABLE_TIMES).seconds_row

    def test_scale_covariant(self):
        base = aggregate_runs(TABLE_TIMES)
        scaled = aggregate_runs([[t * 3 for t in p] for p in TABLE_TIMES])
        assert scaled.percent_row == base.percent_row
        assert scaled.means == pytest.approx(tuple(3 * m for m in base.means))

    def test_ragged_rejected(self):
        with pytest.raises(ValueError):
            aggregate_runs([[1.0, 2.0], [3.0]])
        with pytest.raises(ValueError):
            aggregate_runs([])

    def test_round_half_up(self):
        assert round_half_up(0.5) == 1
        assert round_half_up(1.5) == 2
        assert round_half_up(2.4999) == 2


class _Client:
    def __init__(self, reader, writer):
        self.reader = reader
        self.writer = writer

    @classmethod
    async def connect(cls, port):
        reader, writer = await asyncio.open_connection("127.0.0.1", port)
        return cls(reader, writer)

    async def send(self, **msg):
        self.writer.write((json.dumps(msg) + "\n").encode())
        await self.writer.drain()

    async def recv(self, timeout=10.0):
        line = await asyncio.wait_for(self.reader.readline(), timeout)
        if not line:
            raise ConnectionError("server closed")
        return json.loads(line)

    async def recv_until(self, mtype, timeout=10.0, collect=None):
        while True:
            msg = await self.recv(timeout)
            if collect is not None:
                collect.append(msg)
            if msg["type"] == mtype:
                return msg

    def close(self):
        self.writer.close()


def make_service(tmp_path, **kw):
    scenes = {name: load_bundled_scene(name) for name in ("corridor", "route")}
    defaults = dict(config=MappingConfig.indoor(), cam=CameraModel(),
                    tick_hz=6.0, budget_s=0.5,
                    log_store=LogStore(tmp_path / "data"))
    defaults.update(kw)
    return SessionService(scenes, **defaults)


def run(coro):
    return asyncio.run(asyncio.wait_for(coro, 60.0))


class TestNavigationProtocol:
    def test_inactive_client_times_out_with_dnf(self, tmp_path):
        async def scenario():
            svc = make_service(tmp_path)
            await svc.start(0)
            client = await _Client.connect(svc.port)
            await client.send(type="start", mode="navigate", scene="corridor")
            msgs = []
            summary = await client.recv_until("summary", collect=msgs)
            ticks = [m for m in msgs if m["type"] == "tick"]
            assert len(ticks) == 4  # floor(0.5 * 6) + 1
            grids = {tuple(t["grid"]) for t in ticks}
            assert len(grids) == 1  # stationary agent, unchanged grid
            assert summary["did_not_finish"] is True
            client.close()
            svc.server.close()
            return svc

        svc = run(scenario())
        logs = load_session_logs(svc.log_store.root)
        assert len(logs) == 1 and logs[0].did_not_finish

    def test_unknown_scene_error_session_continues(self, tmp_path):
        async def scenario():
            svc = make_service(tmp_path)
            await svc.start(0)
            client = await _Client.connect(svc.port)
            await client.send(type="start", mode="navigate", scene="nope")
            err = await client.recv()
            assert err["type"] == "error"
            await client.send(type="start", mode="navigate", scene="corridor")
            started = await client.recv()
            assert started["type"] == "started"
            client.close()
            svc.server.close()

        run(scenario())

    def test_malformed_line_gets_error_reply(self, tmp_path):
        async def scenario():
            svc = make_service(tmp_path)
            await svc.start(0)
            client = await _Client.connect(svc.port)
            client.writer.write(b"this is not json\n")
            await client.writer.drain()
            err = await client.recv()
            assert err["type"] == "error"
            client.close()
            svc.server.close()

        run(scenario())

    def test_debug_pose_flag(self, tmp_path):
        async def scenario():
            svc = make_service(tmp_path, debug_pose=True, budget_s=0.2)
            await svc.start(0)
            client = await _Client.connect(svc.port)
            await client.send(type="start", mode="navigate", scene="corridor")
            msgs = []
            await client.recv_until("summary", collect=msgs)
            ticks = [m for m in msgs if m["type"] == "tick"]
            assert all("pose" in t for t in ticks)
            client.close()
            svc.server.close()

        run(scenario())

    def test_commands_steer_latest_wins(self, tmp_path):
        async def scenario():
            svc = make_service(tmp_path, budget_s=1.0, debug_pose=True)
            await svc.start(0)
            client = await _Client.connect(svc.port)
            await client.send(type="start", mode="navigate", scene="corridor")
            await client.recv_until("started")
            # stale command immediately replaced; forward wins
            await client.send(type="cmd", forward=-1, turn=0)
            await client.send(type="cmd", forward=1, turn=0)
            msgs = []
            await client.recv_until("summary", collect=msgs)
            poses = [m["pose"]["x"] for m in msgs if m["type"] == "tick"]
            assert poses[-1] > poses[0]
            client.close()
            svc.server.close()

        run(scenario())

    def test_concurrent_sessions_isolated(self, tmp_path):
        async def scenario():
            svc = make_service(tmp_path, budget_s=0.6, debug_pose=True)
            await svc.start(0)
            a = await _Client.connect(svc.port)
            b = await _Client.connect(svc.port)
            await a.send(type="start", mode="navigate", scene="corridor")
            await b.send(type="start", mode="navigate", scene="corridor")
            # only a moves; b stays put
            await a.send(type="cmd", forward=1, turn=0)

            async def finish(client):
                msgs = []
                summary = await client.recv_until("summary", collect=msgs)
                return msgs, summary

            (a_msgs, _), (b_msgs, _) = await asyncio.gather(finish(a), finish(b))
            a_x = [m["pose"]["x"] for m in a_msgs if m["type"] == "tick"]
            b_x = [m["pose"]["x"] for m in b_msgs if m["type"] == "tick"]
            assert a_x[-1] > a_x[0]
            assert b_x[-1] == b_x[0]
            a.close()
            b.close()
            svc.server.close()
            return svc

        svc = run(scenario())
        logs = load_session_logs(svc.log_store.root)
        assert len(logs) == 2
        for log in logs:
            times = [t.t_ms for t in log.ticks]
            assert times == sorted(set(times))

    def test_wire_sink_receives_frames(self, tmp_path):
        async def scenario():
            received = bytearray()

            async def sink_handler(reader, writer):
                while True:
                    chunk = await reader.read(4096)
                    if not chunk:
                        break
                    received.extend(chunk)

            sink_server = await asyncio.start_server(sink_handler,
                                                     "127.0.0.1", 0)
            sink_port = sink_server.sockets[0].getsockname()[1]
            svc = make_service(tmp_path, budget_s=0.4,
                               wire_sink=("127.0.0.1", sink_port))
            await svc.start(0)
            client = await _Client.connect(svc.port)
            await client.send(type="start", mode="navigate", scene="corridor")
            await client.recv_until("summary")
            client.close()
            await asyncio.sleep(0.1)
            svc.server.close()
            sink_server.close()
            return bytes(received)

        data = run(scenario())
        assert len(data) >= FRAME_LEN and len(data) % FRAME_LEN == 0
        for i in range(len(data) // FRAME_LEN):
            grid, seq = decode_wireframe(data[i * FRAME_LEN:(i + 1) * FRAME_LEN])
            assert seq == i


class TestPatternQuizProtocol:
    def test_full_quiz_flow(self, tmp_path):
        async def scenario():
            svc = make_service(tmp_path)
            await svc.start(0)
            client = await _Client.connect(svc.port)
            await client.send(type="start", mode="pattern", step_ms=1)
            started = await client.recv()
            assert started == {"type": "started", "mode": "pattern",
                               "count": 11}
            catalog = list(builtin_catalog().values())
            for index, pattern in enumerate(catalog):
                begin = await client.recv_until("pattern_start")
                assert begin["index"] == index
                await client.recv_until("pattern_end")
                from tactile_sleeve.patterns import classify
                cls = classify(pattern)
                await client.send(type="answer",
                                  direction=pattern.direction.value,
                                  simultaneity=cls.simultaneity.value)
            summary = await client.recv_until("summary")
            client.close()
            svc.server.close()
            return svc, summary

        svc, summary = run(scenario())
        table = summary["table"]
        for group in table["by_simultaneity"].values():
            assert group["correct_pct"] == 100.0
        records = load_trial_records(svc.log_store.root)
        assert len(records) == 11

    def test_timeout_scores_wrong(self, tmp_path):
        async def scenario():
            svc = make_service(tmp_path, answer_timeout_s=0.05)
            await svc.start(0)
            client = await _Client.connect(svc.port)
            await client.send(type="start", mode="pattern", step_ms=1)
            summary = await client.recv_until("summary")
            client.close()
            svc.server.close()
            return summary

        summary = run(scenario())
        for group in summary["table"]["by_simultaneity"].values():
            assert group["wrong_pct"] == 100.0


class TestLogStoreHelpers:
    def test_runs_by_person_orders_and_filters(self, tmp_path):
        from tactile_sleeve.sim import SessionLog
        logs = [
            SessionLog("s", (), 20.0, 0, person="b", run=2),
            SessionLog("s", (), 10.0, 0, person="b", run=1),
            SessionLog("s", (), 30.0, 0, person="a", run=1),
            SessionLog("s", (), None, 0, person="a", run=2),  # DNF dropped
            SessionLog("s", (), 40.0, 0, person="a", run=2),
        ]
        per_person = runs_by_person(logs)
        assert per_person == [[30.0, 40.0], [10.0, 20.0]]

    def test_crashed_session_prefix_parseable(self, tmp_path):
        # Every line is standalone JSON, so a truncated file still parses
        # line by line.
        from tactile_sleeve.scene_store import load_bundled_scene
        from tactile_sleeve.sim import run_session, scripted
        scene = load_bundled_scene("corridor")
        log = run_session(scene, MappingConfig.indoor(), CameraModel(),
                          scripted([(1, 0)] * 5), budget_s=1.0)
        lines = log.to_jsonl().splitlines()
        for prefix_len in range(1, len(lines)):
            for line in lines[:prefix_len]:
                json.loads(line)
