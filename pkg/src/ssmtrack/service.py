"""WebSocket session service.

Runs one scenario under the safe executor and streams state frames to
any number of browser clients at 30 Hz while the control loop ticks at
its own dt.  Clients steer "external" obstacles by sending target
positions; the server clamps realized obstacle motion to the declared
speed bound, so no client input can make a hazard outrun its v_max.

Protocol (JSON text messages):
  server -> client  {"type": "state", ...}    one frame, see frame()
                    {"type": "summary", ...}  once per finished episode
                    {"type": "error", "message": ...}
  client -> server  {"type": "obstacle", "id": ..., "x": ..., "y": ..., "z": ...}
                    {"type": "reset"}
                    {"type": "load", "scenario": name}

Commands are latest-wins and never block the control loop.  When the
client driving an obstacle disconnects, that obstacle freezes in
place.
"""

import asyncio
import json
import time

import numpy as np

from .sim import ExternalScript, Scenario, build_world, make_script

BROADCAST_HZ = 30.0


class ServiceCore:
    """Synchronous session state: tick, frame, command handling.

    Kept free of any transport so tests can drive it directly; the
    FastAPI layer below only moves bytes.
    """

    def __init__(self, scenario, registry=None, precomputed=None):
        self.registry = dict(registry or {})
        self.registry.setdefault("default", scenario)
        self.precomputed = precomputed
        self._owners = {}
        self._load(scenario)

    def _load(self, scenario):
        self.scenario = scenario
        self.world = build_world(scenario, precomputed=self.precomputed)
        self.reset()

    def reset(self):
        """Restart the episode at t=0; precomputed tables are kept."""
        rng = np.random.default_rng(self.scenario.seed)
        self.scripts = [make_script(cfg, idx, rng)
                        for idx, cfg in enumerate(self.scenario.obstacles)]
        self.world.executor.reset()
        self.state = self.world.executor.snapshot(
            [sc.obstacle() for sc in self.scripts])
        self.done = False
        self.summary = {"arrival_time": None, "violations": 0, "contacts": 0,
                        "min_dist": np.inf, "min_distance_at_stop": np.inf,
                        "arrived": False, "steps": 0}

    def tick(self):
        """Advance one control cycle; returns True while the episode runs."""
        if self.done:
            return False
        ex = self.world.executor
        centers_now = ex.current_centers()
        for sc in self.scripts:
            sc.update(ex.t, self.scenario.dt, centers_now)
        st = ex.step([sc.obstacle() for sc in self.scripts])
        self.state = st
        s = self.summary
        s["steps"] += 1
        s["min_dist"] = min(s["min_dist"], st.min_dist)
        if st.stopped:
            s["min_distance_at_stop"] = min(s["min_distance_at_stop"], st.min_dist)
        if st.min_dist <= self.scenario.d_protective:
            s["contacts"] += 1
            if st.contact_class == "violation":
                s["violations"] += 1
        if st.arrived:
            s["arrived"] = True
            s["arrival_time"] = st.t
        if st.arrived or st.t >= self.scenario.duration:
            self.done = True
        return not self.done

    def frame(self):
        st = self.state
        centers = self.world.executor.current_centers()
        radii = np.broadcast_to(self.world.robot.sphere_radii, (centers.shape[0],))
        return {
            "type": "state",
            "t": st.t, "stage": st.stage, "s": st.s, "sdot": st.sdot,
            "joints": np.atleast_1d(st.q).tolist(),
            "spheres": [{"x": c[0], "y": c[1], "z": c[2], "r": float(r)}
                        for c, r in zip(centers.tolist(), radii)],
            "obstacles": [{"id": sc.id, "x": sc.pos[0], "y": sc.pos[1],
                           "z": sc.pos[2] if sc.pos.shape[0] > 2 else 0.0,
                           "r": sc.radius} for sc in self.scripts],
            "min_dist": st.min_dist if np.isfinite(st.min_dist) else None,
            "j_stop": st.j_stop,
            "stopped": bool(st.stopped), "contact": st.contact_class,
            "psi_min": st.psi_min if np.isfinite(st.psi_min) else None,
        }

    def summary_frame(self):
        s = dict(self.summary)
        for k, v in s.items():
            if isinstance(v, float) and not np.isfinite(v):
                s[k] = None
        s["type"] = "summary"
        return s

    # -- commands -----------------------------------------------------------

    def handle_text(self, text, client=None):
        """Apply one client message; returns a reply dict or None."""
        try:
            msg = json.loads(text)
            if not isinstance(msg, dict):
                raise ValueError("message must be an object")
        except ValueError as e:
            return {"type": "error", "message": f"bad message: {e}"}
        kind = msg.get("type")
        if kind == "obstacle":
            return self._cmd_obstacle(msg, client)
        if kind == "reset":
            self.reset()
            return None
        if kind == "load":
            name = msg.get("scenario")
            if name not in self.registry:
                return {"type": "error", "message": f"unknown scenario {name!r}"}
            self._load(self.registry[name])
            return None
        return {"type": "error", "message": f"unknown message type {kind!r}"}

    def _cmd_obstacle(self, msg, client):
        try:
            oid = str(msg["id"])
            target = [float(msg["x"]), float(msg["y"]), float(msg.get("z", 0.0))]
        except (KeyError, TypeError, ValueError):
            return {"type": "error", "message": "obstacle command needs id, x, y"}
        for sc in self.scripts:
            if sc.id == oid and isinstance(sc, ExternalScript):
                sc.set_target(np.asarray(target[:sc.pos.shape[0]]))
                self._owners[oid] = client
                return None
        return {"type": "error", "message": f"no steerable obstacle {oid!r}"}

    def freeze_owned_by(self, client):
        """Halt every obstacle this client was driving."""
        for sc in self.scripts:
            if isinstance(sc, ExternalScript) and self._owners.get(sc.id) is client:
                sc.set_target(sc.pos)


def create_app(core, pace=1.0):
    """FastAPI app around a ServiceCore.

    pace scales sim time against wall time (1 = realtime, 0 = flat
    out); the broadcast cadence follows sim time so a fast session
    still emits the same frames a realtime one would.
    """
    from contextlib import asynccontextmanager

    from fastapi import FastAPI, WebSocket, WebSocketDisconnect

    @asynccontextmanager
    async def lifespan(app):
        app.state.task = asyncio.create_task(control_loop())
        try:
            yield
        finally:
            app.state.task.cancel()

    app = FastAPI(lifespan=lifespan)
    clients = set()
    app.state.core = core

    async def broadcast(payload):
        text = json.dumps(payload)
        dead = []
        for ws in clients:
            try:
                await ws.send_text(text)
            except Exception:
                dead.append(ws)
        for ws in dead:
            clients.discard(ws)

    async def control_loop():
        loop = asyncio.get_running_loop()
        t0 = loop.time()
        sim0 = core.state.t
        next_bcast = core.state.t
        while True:
            if not core.done:
                core.tick()
                if core.state.t < next_bcast - 1.0 / BROADCAST_HZ:
                    # a reset rewound sim time; follow it down, or the
                    # stream would stall until the new episode catches
                    # up with the old one's clock
                    next_bcast = core.state.t
                    t0, sim0 = loop.time(), core.state.t
                if core.state.t >= next_bcast:
                    await broadcast(core.frame())
                    next_bcast += 1.0 / BROADCAST_HZ
                if core.done:
                    await broadcast(core.summary_frame())
            else:
                t0, sim0 = loop.time(), core.state.t
                next_bcast = core.state.t
                await asyncio.sleep(0.05)
                continue
            if pace > 0:
                lag = t0 + (core.state.t - sim0) / pace - loop.time()
                if lag > 0:
                    await asyncio.sleep(lag)
                else:
                    await asyncio.sleep(0)
            else:
                await asyncio.sleep(0)

    @app.websocket("/ws")
    async def ws_endpoint(ws: WebSocket):
        await ws.accept()
        clients.add(ws)
        await ws.send_text(json.dumps(core.frame()))
        try:
            while True:
                text = await ws.receive_text()
                reply = core.handle_text(text, client=ws)
                if reply is not None:
                    await ws.send_text(json.dumps(reply))
        except WebSocketDisconnect:
            pass
        finally:
            clients.discard(ws)
            core.freeze_owned_by(ws)

    return app


def serve(scenario, precomputed=None, port=8700, pace=1.0, registry=None):
    """Blocking entry point: run the service until interrupted."""
    import uvicorn

    core = ServiceCore(scenario, registry=registry, precomputed=precomputed)
    app = create_app(core, pace=pace)
    uvicorn.run(app, host="127.0.0.1", port=port, log_level="warning")
