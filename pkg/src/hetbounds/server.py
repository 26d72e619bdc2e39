"""Local HTTP service backing the explorer UI.

All model state is an immutable snapshot keyed by a content hash of the
problem; rho edits produce a new snapshot rather than mutating the old one,
so concurrent pin requests are plain reads.
"""

from __future__ import annotations

import copy
import hashlib
from pathlib import Path
from typing import Optional

from fastapi import FastAPI, HTTPException
from fastapi.responses import Response
from fastapi.staticfiles import StaticFiles
from pydantic import BaseModel

from .bounds import Restricted, UNRESTRICTED
from .polytope import close, pin, pin_at_fraction
from .problem import (
    Problem,
    canonical_json,
    problem_to_dict,
    rho_matrix_to_json_dict,
    solve_problem,
)


class PinRequest(BaseModel):
    setting: str
    value: Optional[float] = None
    fraction: Optional[float] = None
    snapshot: Optional[str] = None


class RhoEdit(BaseModel):
    j: str
    k: str
    rho_l: Optional[float] = None
    rho_u: Optional[float] = None
    unrestricted: bool = False


class RhoEditRequest(BaseModel):
    edits: list[RhoEdit]
    snapshot: Optional[str] = None


class _Snapshot:
    def __init__(self, problem: Problem):
        self.problem = problem
        self.graph = problem.build_graph()
        self.bundle = solve_problem(problem)
        self.id = hashlib.sha256(
            canonical_json(problem_to_dict(problem)).encode()
        ).hexdigest()[:12]

    def model_dict(self) -> dict:
        doc = self.bundle.to_dict()
        doc["snapshot"] = self.id
        doc["settings"] = self.problem.labels
        doc["rho"] = (
            rho_matrix_to_json_dict(self.problem.rho) if self.problem.rho is not None else None
        )
        return doc


def _json_response(obj: dict, status_code: int = 200) -> Response:
    return Response(
        content=canonical_json(obj), media_type="application/json", status_code=status_code
    )


def create_app(problem: Problem, static_dir: Optional[str] = None) -> FastAPI:
    app = FastAPI(title="hetbounds explorer service")
    base = _Snapshot(problem)
    snapshots: dict[str, _Snapshot] = {base.id: base}

    def resolve(snapshot_id: Optional[str]) -> _Snapshot:
        if snapshot_id is None:
            return base
        snap = snapshots.get(snapshot_id)
        if snap is None:
            raise HTTPException(status_code=404, detail=f"unknown snapshot {snapshot_id!r}")
        return snap

    @app.get("/api/health")
    def health():
        return _json_response({"status": "ok", "snapshot": base.id})

    @app.get("/api/model")
    def model(snapshot: Optional[str] = None):
        return _json_response(resolve(snapshot).model_dict())

    @app.post("/api/pin")
    def pin_endpoint(req: PinRequest):
        snap = resolve(req.snapshot)
        if (req.value is None) == (req.fraction is None):
            raise HTTPException(status_code=422, detail="provide exactly one of value or fraction")
        if req.setting not in snap.problem.labels:
            raise HTTPException(status_code=404, detail=f"unknown setting {req.setting!r}")
        if not snap.bundle.feasible:
            raise HTTPException(status_code=409, detail="model is infeasible; relax the bounds first")
        if req.fraction is not None:
            if not 0.0 <= req.fraction <= 1.0:
                raise HTTPException(status_code=422, detail="fraction must be in [0, 1]")
            result = pin_at_fraction(snap.graph, req.setting, req.fraction)
        else:
            result = pin(snap.graph, req.setting, req.value)
        doc = {
            "setting": result.pinned_setting,
            "pinned_value": result.pinned_value,
            "feasible": result.feasible,
            "conditional": (
                {lab: [iv.lower, iv.upper] for lab, iv in result.conditional.items()}
                if result.feasible
                else None
            ),
            "snapshot": snap.id,
        }
        return _json_response(doc)

    @app.post("/api/rho")
    def rho_endpoint(req: RhoEditRequest):
        snap = resolve(req.snapshot)
        new_problem = copy.deepcopy(snap.problem)
        if new_problem.rho is None:
            from .bounds import RhoMatrix

            new_problem.rho = RhoMatrix(tuple(new_problem.labels))
        for edit in req.edits:
            for label in (edit.j, edit.k):
                if label not in new_problem.labels:
                    raise HTTPException(status_code=404, detail=f"unknown setting {label!r}")
            if edit.unrestricted:
                new_problem.rho.set_pair(edit.j, edit.k, UNRESTRICTED)
                continue
            if edit.rho_l is None or edit.rho_u is None:
                raise HTTPException(
                    status_code=422, detail="restricted edit needs both rho_l and rho_u"
                )
            try:
                bound = Restricted(edit.rho_l, edit.rho_u)
            except ValueError as exc:
                raise HTTPException(status_code=422, detail=str(exc))
            new_problem.rho.set_pair(edit.j, edit.k, bound)
        new_snap = _Snapshot(new_problem)
        snapshots[new_snap.id] = new_snap
        return _json_response({"snapshot": new_snap.id, "feasible": new_snap.bundle.feasible})

    resolved_static = static_dir
    if resolved_static is None:
        bundled = Path(__file__).resolve().parents[2] / "frontend" / "dist"
        if bundled.is_dir():
            resolved_static = str(bundled)
    if resolved_static:
        app.mount("/", StaticFiles(directory=resolved_static, html=True), name="ui")

    return app
