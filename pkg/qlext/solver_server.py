#!/usr/bin/env python3
"""
qlext Solver Server

A small FastAPI server exposing validation and solving over HTTP.

Usage:
    # Start the server
    uv run qlext/solver_server.py

    # Persist solutions (optional)
    QLEXT_SOLUTION_DIR=solutions uv run qlext/solver_server.py

    # Solve an instance file
    curl -X POST --data @instance.json -H 'Content-Type: application/json' \
        'http://localhost:8000/solve?algo=auto'
"""
import json
import logging
from datetime import datetime
from pathlib import Path
from typing import Any, Optional

import uvicorn
from fastapi import Body, FastAPI, HTTPException
from fastapi.responses import JSONResponse

# Add parent to path for imports
import sys
sys.path.insert(0, str(Path(__file__).parent.parent))

from qlext.config import SolverConfig
from qlext.errors import BudgetExhaustedError, ConsistencyError, InstanceParseError, QlextError
from qlext.models.files import InstanceFile, SolutionFile
from qlext.models.layout import Instance
from qlext.models.result import Algorithm
from qlext.services.solver_service import SolverService

logger = logging.getLogger(__name__)


def _parse_instance(payload: dict[str, Any]) -> Instance:
    try:
        return InstanceFile.from_json(payload).to_instance()
    except InstanceParseError as e:
        logger.error(f"Rejected instance: {e}")
        raise HTTPException(status_code=422, detail={"key": e.key, "message": str(e)})


def create_app(config: Optional[SolverConfig] = None) -> FastAPI:
    """Build the app around one solver configuration"""
    config = config or SolverConfig.from_env()
    service = SolverService(config)
    output_dir = config.solution_output_dir
    if output_dir is not None:
        output_dir.mkdir(parents=True, exist_ok=True)

    app = FastAPI(
        title="qlext Solver Server",
        description="Queue layout extension validation and solving",
        version="0.1.0",
    )

    def save_solution(solution: SolutionFile) -> Optional[str]:
        """Persist a solution when an output directory is configured"""
        if output_dir is None:
            return None
        timestamp = datetime.now().strftime("%Y%m%d_%H%M%S_%f")
        path = output_dir / f"{solution.algorithm}_{timestamp}.json"
        path.write_text(solution.dumps(), encoding="utf-8")
        logger.info(f"Saved solution to: {path}")
        return path.name

    @app.get("/")
    def root():
        """Health check endpoint"""
        return {
            "status": "ok",
            "message": "qlext solver server is running",
            "endpoints": ["/validate", "/solve", "/solutions"],
        }

    @app.post("/validate")
    def validate(payload: dict[str, Any] = Body(...)):
        """
        Validate an instance document; with a `solution` object, also the
        solution against it.
        """
        inst = _parse_instance(payload)
        solution_data = payload.get("solution")
        if solution_data is None:
            return {"valid": True}
        try:
            solution = SolutionFile.from_json(solution_data)
            report = solution.validate_against(inst)
            extends_h = solution.extends_instance(inst)
        except InstanceParseError as e:
            logger.error(f"Rejected solution: {e}")
            raise HTTPException(status_code=422, detail={"key": e.key, "message": str(e)})
        return {
            "valid": report.ok and extends_h,
            "extends_h": extends_h,
            "violations": report.describe(),
        }

    @app.post("/solve")
    def solve(payload: dict[str, Any] = Body(...), algo: Algorithm = Algorithm.AUTO):
        """Solve an instance document"""
        inst = _parse_instance(payload)
        try:
            result = service.solve(inst, algo)
        except BudgetExhaustedError as e:
            logger.warning(str(e))
            return {"status": "budget_exhausted", "solution": None}
        except ConsistencyError as e:
            logger.error(f"Solver failure: {e}")
            raise HTTPException(status_code=500, detail=str(e))
        except QlextError as e:
            logger.error(f"Rejected request: {e}")
            raise HTTPException(status_code=422, detail={"key": None, "message": str(e)})

        logger.info(f"{result.algorithm.value}: {result.status.value}")
        if result.layout is None:
            return {"status": result.status.value, "solution": None}
        solution = SolutionFile.from_result(inst, result)
        return {
            "status": result.status.value,
            "solution": solution.to_json(),
            "saved_as": save_solution(solution),
        }

    @app.get("/solutions")
    def list_solutions():
        """List persisted solutions"""
        if output_dir is None:
            return {"solutions": []}
        files = sorted(output_dir.glob("*.json"), reverse=True)[:20]
        return {"solutions": [f.name for f in files]}

    @app.get("/solutions/{name}")
    def get_solution(name: str):
        """Get a persisted solution"""
        if output_dir is None:
            raise HTTPException(status_code=404, detail="Solution persistence is disabled")
        path = output_dir / name
        if path.parent != output_dir or not path.is_file():
            raise HTTPException(status_code=404, detail="Solution not found")
        return JSONResponse(content=json.loads(path.read_text(encoding="utf-8")))

    return app


app = create_app()


if __name__ == "__main__":
    logging.basicConfig(
        level=logging.INFO,
        format="%(asctime)s - %(name)s - %(levelname)s - %(message)s",
    )
    print("\n" + "=" * 60)
    print("qlext Solver Server")
    print("=" * 60)
    print("\nServer starting on http://localhost:8000")
    print("\nEndpoints:")
    print("  GET  /                  - Health check")
    print("  POST /validate          - Validate an instance (+ solution)")
    print("  POST /solve?algo=auto   - Solve an instance")
    print("  GET  /solutions         - List persisted solutions")
    print("\n" + "=" * 60 + "\n")

    uvicorn.run(app, host="0.0.0.0", port=8000)
