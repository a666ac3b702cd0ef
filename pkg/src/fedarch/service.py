"""HTTP front door: catalog queries, recommendations, what-if, simulations.

The service is a thin adapter over the library: every endpoint body is the
canonical JSON of the corresponding library result, so a service response
and a direct call compare byte-for-byte. Simulations and validation runs
execute on background threads behind opaque run handles; recommendation
calls stay synchronous. No authentication: this is a loopback-bound local
decision-support tool.
"""

from __future__ import annotations

import os
import threading
from typing import Any, Optional

from fastapi import FastAPI, Request, Response

from .catalog import load_catalog, default_catalog_path, query_pattern, serialize_catalog
from .engine import (
    RequirementProfile,
    check_case_study,
    recommend,
    what_if,
)
from .config import SimConfig
from .errors import FedArchError, IncompatiblePluginsError, NotFoundError
from .hypotheses import load_default_hypotheses
from .jsonutil import canonical_dumps
from .simulator import run_simulation, validate_toggles
from .validator import validate_all

CATALOG_ENV = "FEDARCH_CATALOG"


def _status_for(exc: FedArchError) -> int:
    if isinstance(exc, IncompatiblePluginsError):
        return 409
    if isinstance(exc, NotFoundError):
        return 404
    return 400


class RunRegistry:
    """In-memory run handles; ids are unique for the service lifetime."""

    def __init__(self) -> None:
        self._lock = threading.Lock()
        self._runs: dict[str, dict] = {}
        self._counter = 0

    def create(self, kind: str) -> str:
        with self._lock:
            self._counter += 1
            run_id = f"{kind}-{self._counter:06d}"
            self._runs[run_id] = {"run_id": run_id, "kind": kind,
                                  "status": "queued", "result": None, "error": None}
            return run_id

    def transition(self, run_id: str, status: str, result: Any = None,
                   error: Optional[str] = None) -> None:
        order = ["queued", "running", "done", "failed"]
        with self._lock:
            run = self._runs[run_id]
            if order.index(status) < order.index(run["status"]):
                raise RuntimeError(f"run {run_id}: cannot move {run['status']} -> {status}")
            run["status"] = status
            if result is not None:
                run["result"] = result
            if error is not None:
                run["error"] = error

    def view(self, run_id: str) -> dict:
        with self._lock:
            if run_id not in self._runs:
                raise NotFoundError(f"unknown run {run_id!r}")
            run = self._runs[run_id]
            out = {"run_id": run["run_id"], "kind": run["kind"],
                   "status": run["status"]}
            if run["status"] == "done":
                key = "metrics" if run["kind"] == "simulation" else "report"
                out[key] = run["result"]
            if run["status"] == "failed":
                out["error"] = run["error"]
            return out


def _json(payload: Any, status_code: int = 200) -> Response:
    return Response(content=canonical_dumps(payload), status_code=status_code,
                    media_type="application/json")


def _error(exc: Exception, status: int) -> Response:
    payload = {"code": type(exc).__name__, "message": str(exc), "details": {}}
    return _json(payload, status_code=status)


def create_app(catalog_path: Optional[str] = None) -> FastAPI:
    path = catalog_path or os.environ.get(CATALOG_ENV) or default_catalog_path()
    catalog = load_catalog(path)
    runs = RunRegistry()
    app = FastAPI(title="fedarch", docs_url=None, redoc_url=None)
    app.state.catalog = catalog
    app.state.runs = runs

    @app.exception_handler(FedArchError)
    async def _handle(request: Request, exc: FedArchError):  # pragma: no cover
        return _error(exc, _status_for(exc))

    @app.get("/v1/catalog")
    def get_catalog() -> Response:
        return _json(serialize_catalog(catalog))

    @app.get("/v1/patterns/{pattern_id}")
    def get_pattern(pattern_id: str) -> Response:
        try:
            hood = query_pattern(catalog, pattern_id)
        except FedArchError as exc:
            return _error(exc, _status_for(exc))
        return _json({
            "pattern": {"id": hood.pattern.id, "name": hood.pattern.name,
                        "category": hood.pattern.category,
                        "summary": hood.pattern.summary,
                        "source_anchor": hood.pattern.source_anchor,
                        "aliases": list(hood.pattern.aliases)},
            "decision_model_id": hood.decision_model_id,
            "effects": [{"attribute_id": e.attribute_id, "direction": e.direction,
                         "note": e.note, "source_anchor": e.source_anchor,
                         "weight": e.weight} for e in hood.effects],
            "relations": [{"kind": r.kind, "from_pattern": r.from_pattern,
                           "to_pattern": r.to_pattern,
                           "scope_attribute": r.scope_attribute, "note": r.note}
                          for r in hood.relations],
            "constraints": [{"key": c.key, "description": c.description}
                            for c in hood.constraints],
        })

    @app.post("/v1/recommend")
    async def post_recommend(request: Request) -> Response:
        try:
            profile = RequirementProfile.from_dict(await request.json())
            rec = recommend(catalog, profile)
        except FedArchError as exc:
            return _error(exc, _status_for(exc))
        return _json(rec.to_dict())

    @app.post("/v1/whatif")
    async def post_whatif(request: Request) -> Response:
        try:
            body = await request.json()
            profile = RequirementProfile.from_dict(body.get("profile", {}))
            result = what_if(catalog, profile, body.get("delta", {}))
        except FedArchError as exc:
            return _error(exc, _status_for(exc))
        return _json(result.to_dict())

    @app.post("/v1/simulations")
    async def post_simulation(request: Request) -> Response:
        try:
            cfg = SimConfig.from_dict(await request.json())
            validate_toggles(cfg)  # reject incompatible combos before queueing
        except FedArchError as exc:
            return _error(exc, _status_for(exc))
        run_id = runs.create("simulation")

        def work() -> None:
            runs.transition(run_id, "running")
            try:
                metrics = run_simulation(cfg)
                runs.transition(run_id, "done", result=metrics.to_dict())
            except Exception as exc:  # failed runs carry the error payload
                runs.transition(run_id, "failed", error=str(exc))

        threading.Thread(target=work, daemon=True).start()
        return _json(runs.view(run_id), status_code=202)

    @app.get("/v1/simulations/{run_id}")
    def get_run(run_id: str) -> Response:
        try:
            return _json(runs.view(run_id))
        except FedArchError as exc:
            return _error(exc, _status_for(exc))

    @app.post("/v1/validate")
    async def post_validate(request: Request) -> Response:
        try:
            body = await request.json() if await request.body() else {}
        except Exception:
            body = {}
        wanted = body.get("hypothesis_ids")
        try:
            hypotheses = load_default_hypotheses()
            if wanted is not None:
                known = {h.id for h in hypotheses}
                missing = set(wanted) - known
                if missing:
                    raise NotFoundError(f"unknown hypothesis ids: {sorted(missing)}")
                hypotheses = [h for h in hypotheses if h.id in wanted]
        except FedArchError as exc:
            return _error(exc, _status_for(exc))
        run_id = runs.create("validation")

        def work() -> None:
            runs.transition(run_id, "running")
            try:
                report = validate_all(catalog, hypotheses)
                runs.transition(run_id, "done", result=report.to_dict())
            except Exception as exc:
                runs.transition(run_id, "failed", error=str(exc))

        threading.Thread(target=work, daemon=True).start()
        return _json(runs.view(run_id), status_code=202)

    @app.get("/v1/case-studies/{case_id}")
    def get_case_study(case_id: str) -> Response:
        try:
            report = check_case_study(catalog, case_id)
            study = catalog.case_study(case_id)
        except FedArchError as exc:
            return _error(exc, _status_for(exc))
        payload = report.to_dict()
        payload["component_notes"] = dict(study.component_notes)
        return _json(payload)

    return app
