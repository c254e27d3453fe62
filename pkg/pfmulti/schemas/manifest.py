from datetime import datetime
from typing import List, Optional

from pydantic import BaseModel, Field


class RunManifestBase(BaseModel):
    name: str
    scenario: str
    config_path: str
    config_hash: str
    code_version: str


class RunManifest(RunManifestBase):
    started: datetime
    finished: Optional[datetime] = None
    increments: int = 0
    t_final: float = 0.0
    status: str = "running"
    message: Optional[str] = None
    files: List[str] = Field(default_factory=list)
