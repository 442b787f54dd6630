"""
Schémas des fichiers JSON (instances, SetCSP, circuits, manifeste).

Les modèles pydantic vérifient uniquement la forme des fichiers ; la
sémantique (disjonction des classes, localité, stoquasticité...) est
contrôlée par stoqverify.core.instance_model.
"""

from typing import List, Literal, Optional, Union

from pydantic import BaseModel, ConfigDict, Field, model_validator


class RationalEntry(BaseModel):
    num: int
    den: int = Field(gt=0)


MatrixEntry = Union[int, float, RationalEntry]
ClassString = Union[str, List[int]]


class TermSpec(BaseModel):
    model_config = ConfigDict(extra="forbid")

    qudits: List[int]
    form: Literal["sets", "matrix"] = "sets"
    classes: Optional[List[List[ClassString]]] = None
    entries: Optional[List[List[MatrixEntry]]] = None

    @model_validator(mode="after")
    def check_payload(self):
        if self.form == "sets" and self.classes is None:
            raise ValueError("un terme 'sets' exige le champ 'classes'")
        if self.form == "matrix" and self.entries is None:
            raise ValueError("un terme 'matrix' exige le champ 'entries'")
        return self


class InstanceFile(BaseModel):
    model_config = ConfigDict(extra="forbid")

    alphabet_size: int
    num_dits: int
    locality: int
    degree: int
    terms: List[TermSpec]
    description: Optional[str] = None


class ConstraintSpec(BaseModel):
    model_config = ConfigDict(extra="forbid")

    qudits: List[int]
    classes: List[List[ClassString]]


class SetCSPFile(BaseModel):
    model_config = ConfigDict(extra="forbid")

    alphabet_size: int
    num_dits: int
    locality: int
    degree: int
    constraints: List[ConstraintSpec]
    description: Optional[str] = None


class WireSpec(BaseModel):
    model_config = ConfigDict(extra="forbid")

    role: Literal["witness", "zero", "plus"]


class GateSpec(BaseModel):
    model_config = ConfigDict(extra="forbid")

    kind: Literal["NOT", "CNOT", "TOFFOLI"]
    targets: List[int]


class CircuitFile(BaseModel):
    model_config = ConfigDict(extra="forbid")

    wires: List[WireSpec]
    gates: List[GateSpec] = []
    output: int
    description: Optional[str] = None


class RunManifest(BaseModel):
    """Manifeste de reproductibilité estampillé sur chaque rapport"""

    command: str
    arguments: dict
    seed: int
    tolerances: dict
    version: str
    wall_time: float = 0.0
