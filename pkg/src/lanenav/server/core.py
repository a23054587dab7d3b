"""Versioned deployment repository with sessions and QR-to-guidance resolution.

Readers resolve against an immutable snapshot; admin patches serialize through
one writer lock and swap the snapshot atomically after persisting to disk.
"""

from __future__ import annotations

import os
import random
import tempfile
import threading
import time
from dataclasses import dataclass, field, replace
from pathlib import Path
from typing import Union

from .. import pathgraph as pg
from ..protocol import Guidance, NextEdge


class NotFoundError(KeyError):
    pass


class UnauthorizedError(Exception):
    pass


class PatchRejectedError(Exception):
    def __init__(self, report: pg.ValidationReport):
        super().__init__(f"patch rejected: {[v.message for v in report]}")
        self.report = report


@dataclass(frozen=True)
class SetEdgeEnabled:
    edge: int
    enabled: bool


@dataclass(frozen=True)
class ReplaceDeployment:
    deployment: pg.Deployment


PatchOp = Union[SetEdgeEnabled, ReplaceDeployment]


@dataclass(frozen=True)
class AdminPatch:
    ops: tuple[PatchOp, ...]


@dataclass
class Session:
    id: int
    destination: int
    created_at: float
    last_node: int | None = None
    deployment_version_at_creation: int = 0


class PathServer:
    """In-memory server over one deployment snapshot plus a JSON repository file."""

    def __init__(
        self,
        deployment: pg.Deployment,
        repo_path: str | Path | None = None,
        session_seed: int | None = None,
    ):
        report = pg.validate_deployment(deployment)
        if report:
            raise PatchRejectedError(report)
        self._snapshot = deployment
        self._repo_path = Path(repo_path) if repo_path else None
        self._write_lock = threading.Lock()
        self._session_lock = threading.Lock()
        self._sessions: dict[int, Session] = {}
        self._rng = random.Random(session_seed)
        self._started = time.monotonic()
        if self._repo_path is not None:
            self._persist(deployment)

    @classmethod
    def from_file(cls, repo_path: str | Path, session_seed: int | None = None):
        d = pg.loads_deployment(Path(repo_path).read_text())
        return cls(d, repo_path=repo_path, session_seed=session_seed)

    # -- sessions ----------------------------------------------------------

    def create_session(self, destination: int) -> int:
        snap = self._snapshot
        if not any(n.id == destination for n in snap.nodes):
            raise NotFoundError(f"unknown destination node {destination}")
        with self._session_lock:
            while True:
                sid = self._rng.getrandbits(64)
                if sid not in self._sessions:
                    break
            self._sessions[sid] = Session(
                id=sid,
                destination=destination,
                created_at=time.time(),
                deployment_version_at_creation=snap.version,
            )
        return sid

    def get_session(self, session_id: int) -> Session:
        with self._session_lock:
            s = self._sessions.get(session_id)
        if s is None:
            raise UnauthorizedError(f"unknown session {session_id}")
        return s

    # -- resolution --------------------------------------------------------

    def resolve_qr(self, qr_id: int, session_id: int) -> Guidance:
        session = self.get_session(session_id)
        snap = self._snapshot  # one snapshot for the whole resolution
        try:
            anchor = snap.anchor_by_qr(qr_id)
        except KeyError:
            raise NotFoundError(f"unknown qr id {qr_id}") from None
        node = anchor.node
        with self._session_lock:
            session.last_node = node
        if node == session.destination:
            return Guidance(node, True, None, snap.version)
        route = pg.shortest_route(snap, node, session.destination, enabled_only=True)
        eid, direction = route[0]
        edge = snap.edge_by_id(eid)
        return Guidance(
            node=node,
            destination_reached=False,
            next=NextEdge(
                edge=eid,
                direction=direction,
                expected_pair=pg.observed_pair(edge, direction),
                remaining_distance=pg.route_length(snap, route),
            ),
            deployment_version=snap.version,
        )

    # -- administration ----------------------------------------------------

    def apply_patch(self, patch: AdminPatch) -> int:
        with self._write_lock:
            current = self._snapshot
            new = current
            for op in patch.ops:
                if isinstance(op, SetEdgeEnabled):
                    try:
                        new = new.with_edge_enabled(op.edge, op.enabled)
                    except KeyError:
                        raise NotFoundError(f"unknown edge {op.edge}") from None
                else:
                    new = op.deployment
            new = replace(new, version=current.version + 1)
            report = pg.validate_deployment(new)
            if report:
                raise PatchRejectedError(report)
            self._persist(new)
            self._snapshot = new  # atomic swap for readers
            return new.version

    def get_deployment(self) -> pg.Deployment:
        return self._snapshot

    @property
    def version(self) -> int:
        return self._snapshot.version

    @property
    def uptime(self) -> float:
        return time.monotonic() - self._started

    def _persist(self, d: pg.Deployment) -> None:
        if self._repo_path is None:
            return
        text = pg.dumps_deployment(d)
        fd, tmp = tempfile.mkstemp(
            dir=self._repo_path.parent or Path("."), suffix=".tmp"
        )
        try:
            with os.fdopen(fd, "w") as fh:
                fh.write(text)
                fh.flush()
                os.fsync(fh.fileno())
            os.replace(tmp, self._repo_path)
        finally:
            if os.path.exists(tmp):
                os.unlink(tmp)


# -- patch wire format -------------------------------------------------------


def patch_from_dict(doc: dict) -> AdminPatch:
    ops: list[PatchOp] = []
    for op in doc["ops"]:
        if op["op"] == "set_edge_enabled":
            ops.append(SetEdgeEnabled(edge=int(op["edge"]), enabled=bool(op["enabled"])))
        elif op["op"] == "replace_deployment":
            ops.append(ReplaceDeployment(pg.deployment_from_dict(op["deployment"])))
        else:
            raise ValueError(f"unknown patch op {op['op']!r}")
    return AdminPatch(ops=tuple(ops))


def patch_to_dict(p: AdminPatch) -> dict:
    ops = []
    for op in p.ops:
        if isinstance(op, SetEdgeEnabled):
            ops.append({"op": "set_edge_enabled", "edge": op.edge, "enabled": op.enabled})
        else:
            ops.append(
                {"op": "replace_deployment", "deployment": pg.deployment_to_dict(op.deployment)}
            )
    return {"ops": ops}
