import json
from dataclasses import asdict, dataclass, field
from typing import Any, Dict


@dataclass
class Report:
    """The outcome of one command, as printed with --json.

    `timing` holds wall-clock measurements and is left out of comparisons, so two
    runs of the same command give equal reports."""

    computation: str
    inputs: Dict[str, Any] = field(default_factory=dict)
    payload: Dict[str, Any] = field(default_factory=dict)
    provenance: str = "matrix"
    exit_code: int = 0
    timing: Dict[str, float] = field(default_factory=dict, compare=False)

    def to_json(self, indent=2) -> str:
        return json.dumps(asdict(self), indent=indent, ensure_ascii=False, sort_keys=True)

    @classmethod
    def from_json(cls, text: str) -> "Report":
        data = json.loads(text)
        return cls(
            computation=data["computation"],
            inputs=data.get("inputs", {}),
            payload=data.get("payload", {}),
            provenance=data.get("provenance", "matrix"),
            exit_code=data.get("exit_code", 0),
            timing=data.get("timing", {}),
        )

    def to_text(self) -> str:
        lines = [f"{self.computation} [{self.provenance}]"]
        for key, value in self.payload.items():
            if isinstance(value, (dict, list)):
                value = json.dumps(value, ensure_ascii=False)
            lines.append(f"  {key}: {value}")
        if "seconds" in self.timing:
            lines.append(f"  ({self.timing['seconds']:.3f}s)")
        return "\n".join(lines)
