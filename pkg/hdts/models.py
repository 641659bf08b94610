from typing import Any, Literal

from pydantic import BaseModel, ConfigDict, Field


DOCUMENT_VERSION = "hdts/1"


class ActionItem(BaseModel):
    model_config = ConfigDict(extra="forbid")

    id: str = Field(..., min_length=1)
    label: str = Field(..., min_length=1)


class TransitionItem(BaseModel):
    model_config = ConfigDict(extra="forbid", populate_by_name=True)

    source: str = Field(..., alias="from", min_length=1)
    acts: list[str] = Field(..., min_length=1)
    target: str = Field(..., alias="to", min_length=1)


class SystemItem(BaseModel):
    model_config = ConfigDict(extra="forbid")

    states: list[str] = Field(default_factory=list)
    actions: list[ActionItem] = Field(default_factory=list)
    transitions: list[TransitionItem] = Field(default_factory=list)


class MorphismItem(BaseModel):
    model_config = ConfigDict(extra="forbid")

    source: str
    target: str
    states: dict[str, str] = Field(default_factory=dict)
    actions: dict[str, str] = Field(default_factory=dict)


class PointedItem(BaseModel):
    model_config = ConfigDict(extra="forbid")

    system: str
    base: str


class CellItem(BaseModel):
    model_config = ConfigDict(extra="forbid")

    generator: str
    states: dict[str, str] = Field(default_factory=dict)
    actions: dict[str, str] = Field(default_factory=dict)


class DecompositionItem(BaseModel):
    model_config = ConfigDict(extra="forbid", populate_by_name=True)

    base: str
    generating_set: Literal["I", "I_CTS", "I_RTS"] = Field(default="I", alias="set")
    cells: list[CellItem] = Field(default_factory=list)


class DocumentModel(BaseModel):
    model_config = ConfigDict(extra="forbid")

    version: Literal["hdts/1"] = DOCUMENT_VERSION
    sigma: list[str] = Field(..., min_length=1)
    systems: dict[str, SystemItem] = Field(default_factory=dict)
    morphisms: dict[str, MorphismItem] = Field(default_factory=dict)
    pointed: dict[str, PointedItem] = Field(default_factory=dict)
    decompositions: dict[str, DecompositionItem] = Field(default_factory=dict)
    report: dict[str, Any] | None = None


class CommandOptions(BaseModel):
    operands: list[str] = Field(default_factory=list)
    variant: Literal["wts", "cts", "rts"] | None = None
    dmax: int | None = Field(default=None, ge=1, le=8)
    rounds: int = Field(default=1, ge=0, le=16)
    kind: str | None = None
    labels: list[str] = Field(default_factory=list)
    states: list[str] = Field(default_factory=list)
    generating_set: Literal["I", "I_CTS", "I_RTS"] = "I"
    which: Literal["gamma0", "gamma1", "gamma"] = "gamma0"
    inverse: bool = False
    morphism: bool = False


class CommandRequest(BaseModel):
    document: dict[str, Any] | None = None
    options: CommandOptions = Field(default_factory=CommandOptions)


class CommandResponse(BaseModel):
    command: str
    exit_code: int
    ok: bool
    report: dict[str, Any]
    document: dict[str, Any] | None = None
