from fastapi import FastAPI, HTTPException
from fastapi.middleware.cors import CORSMiddleware

from hdts.models import CommandRequest, CommandResponse
from hdts.services.codec import encode, from_payload
from hdts.services.commands import COMMANDS, execute
from hdts.services.core import InvariantError
from hdts.settings import Settings


settings = Settings.from_env()

app = FastAPI(
    title="HDTS Workbench",
    version="0.1.0",
    description="Constructions, reflections and lifting checks on finite higher-dimensional transition systems",
)

app.add_middleware(
    CORSMiddleware,
    allow_origins=["*"],
    allow_credentials=True,
    allow_methods=["*"],
    allow_headers=["*"],
)


@app.get("/health")
def health_check() -> dict:
    return {"status": "ok", "service": "hdts", "dmax": settings.dmax}


@app.get("/commands")
def list_commands() -> dict:
    return {"commands": sorted(COMMANDS)}


@app.post("/commands/{command}", response_model=CommandResponse)
def run_command(command: str, payload: CommandRequest) -> CommandResponse:
    if command not in COMMANDS:
        raise HTTPException(status_code=404, detail=f"Unknown command {command!r}")
    try:
        document = from_payload(payload.document) if payload.document is not None else None
        result = execute(command, payload.options, document, settings)
        body = encode(result.document) if result.document is not None else None
    except (ValueError, InvariantError) as exc:
        raise HTTPException(status_code=400, detail=str(exc)) from exc
    report = dict(result.report)
    if result.text is not None:
        report["text"] = result.text
    return CommandResponse(command=command, exit_code=result.exit_code, ok=result.ok, report=report, document=body)
