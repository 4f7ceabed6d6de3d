"""Parsing of the JSON documents read by the command line.

Every parsing failure raises DocumentError citing the file and the location inside
it (a JSON line/column or a path of keys such as `rows[2][1]`). Relative names that
do not exist in the working directory are looked up among the bundled examples."""

import json
import os
from typing import Any, Dict, List, Tuple

from .af import BratteliDiagram, DimensionGroupElement, Path, element
from .exceptions import DocumentError
from .sft import SftSystem, Tableau, Word
from .towers import FloorSet, TowerPartition
from .zmat import IntMatrix
from .zn_lab import MarkerConfiguration

BUNDLED_DIR = os.path.join(os.path.dirname(__file__), "bundled")


def resolve_path(path: str) -> str:
    if os.path.exists(path):
        return path
    bundled = os.path.join(BUNDLED_DIR, path)
    if os.path.exists(bundled):
        return bundled
    raise DocumentError(path, "-", "no such file (neither in the working directory nor bundled)")


def bundled_documents() -> List[str]:
    return sorted(name for name in os.listdir(BUNDLED_DIR) if name.endswith(".json"))


class DocumentReader:
    """Loads one document and reports errors at their location"""

    def __init__(self, path: str):
        self.path = path
        resolved = resolve_path(path)
        try:
            with open(resolved, encoding="utf-8") as f:
                self.data = json.load(f)
        except json.JSONDecodeError as e:
            raise DocumentError(path, f"line {e.lineno} column {e.colno}", e.msg) from e
        except OSError as e:
            raise DocumentError(path, "-", str(e)) from e

    def error(self, location: str, message: str) -> DocumentError:
        return DocumentError(self.path, location or "<root>", message)

    def get(self, data: Any, key: str, location: str = "", default: Any = ...) -> Any:
        where = f"{location}.{key}" if location else key
        if not isinstance(data, dict):
            raise self.error(location, "expected an object")
        if key not in data:
            if default is ...:
                raise self.error(where, "missing key")
            return default
        return data[key]

    def integer(self, value: Any, location: str) -> int:
        if isinstance(value, bool) or not isinstance(value, int):
            raise self.error(location, f"expected an integer, got {json.dumps(value)}")
        return value

    def integers(self, value: Any, location: str) -> List[int]:
        return [self.integer(x, f"{location}[{i}]") for i, x in enumerate(self.sequence(value, location))]

    def sequence(self, value: Any, location: str) -> list:
        if not isinstance(value, list):
            raise self.error(location, "expected a list")
        return value

    def matrix(self, value: Any, location: str) -> List[List[int]]:
        rows = [self.integers(row, f"{location}[{i}]") for i, row in enumerate(self.sequence(value, location))]
        for i, row in enumerate(rows):
            if rows and len(row) != len(rows[0]):
                raise self.error(f"{location}[{i}]", f"row of length {len(row)}, expected {len(rows[0])}")
        return rows


def read_matrix(path: str) -> SftSystem:
    """{"n": int, "rows": [[0|1, ...], ...]}"""
    reader = DocumentReader(path)
    rows = reader.matrix(reader.get(reader.data, "rows"), "rows")
    n = reader.integer(reader.get(reader.data, "n", default=len(rows)), "n")
    if len(rows) != n or any(len(row) != n for row in rows):
        raise reader.error("rows", f"expected a {n}x{n} matrix")
    for i, row in enumerate(rows):
        for j, value in enumerate(row):
            if value not in (0, 1):
                raise reader.error(f"rows[{i}][{j}]", "entries must be 0 or 1")
    return SftSystem.from_rows(rows)


def _words(reader: DocumentReader, value: Any, location: str) -> List[Word]:
    words = []
    for i, word in enumerate(reader.sequence(value, location)):
        symbols = reader.integers(word, f"{location}[{i}]")
        if not symbols:
            raise reader.error(f"{location}[{i}]", "empty word")
        words.append(tuple(symbols))
    return words


def read_clopen(path: str) -> List[Word]:
    """{"words": [[symbols], ...]}"""
    reader = DocumentReader(path)
    return _words(reader, reader.get(reader.data, "words"), "words")


def read_tableau(path: str) -> Tableau:
    """{"pairs": [[[μ symbols], [ν symbols]], ...]}"""
    reader = DocumentReader(path)
    pairs = []
    for i, pair in enumerate(reader.sequence(reader.get(reader.data, "pairs"), "pairs")):
        words = _words(reader, pair, f"pairs[{i}]")
        if len(words) != 2:
            raise reader.error(f"pairs[{i}]", "a pair holds exactly two words")
        pairs.append((words[0], words[1]))
    return Tableau.from_words(pairs)


def read_diagram(path: str) -> BratteliDiagram:
    """{"levels": [{"vertices": k, "incidence": [[...], ...]}, ...]}"""
    reader = DocumentReader(path)
    matrices = []
    for i, level in enumerate(reader.sequence(reader.get(reader.data, "levels"), "levels")):
        location = f"levels[{i}]"
        rows = reader.matrix(reader.get(level, "incidence", location), f"{location}.incidence")
        vertices = reader.integer(reader.get(level, "vertices", location), f"{location}.vertices")
        if not rows or len(rows[0]) != vertices:
            raise reader.error(f"{location}.incidence", f"expected {vertices} columns")
        matrices.append(IntMatrix.from_rows(rows))
    if not matrices:
        raise reader.error("levels", "at least one level is needed")
    return BratteliDiagram(tuple(matrices))


def read_paths(path: str) -> List[Path]:
    """{"paths": [[[vertex, edge], ...], ...]}"""
    reader = DocumentReader(path)
    paths = []
    for i, steps in enumerate(reader.sequence(reader.get(reader.data, "paths"), "paths")):
        steps = reader.sequence(steps, f"paths[{i}]")
        path_steps = []
        for j, step in enumerate(steps):
            pair = reader.integers(step, f"paths[{i}][{j}]")
            if len(pair) != 2:
                raise reader.error(f"paths[{i}][{j}]", "a step is a [vertex, edge] pair")
            path_steps.append((pair[0], pair[1]))
        paths.append(tuple(path_steps))
    return paths


def read_element(path: str, diagram: BratteliDiagram) -> DimensionGroupElement:
    """{"level": int, "vector": [...]}"""
    reader = DocumentReader(path)
    level = reader.integer(reader.get(reader.data, "level"), "level")
    vector = reader.integers(reader.get(reader.data, "vector"), "vector")
    if level < 0:
        raise reader.error("level", "levels start at 0")
    if len(vector) != diagram.vertex_count(level):
        raise reader.error("vector", f"level {level} has {diagram.vertex_count(level)} vertices")
    return element(diagram, level, vector)


def read_towers(path: str) -> TowerPartition:
    """{"classes": [{"class_id": str, "orbit_size": int}, ...]}"""
    reader = DocumentReader(path)
    data = reader.data if isinstance(reader.data, list) else reader.get(reader.data, "classes")
    classes = []
    for i, entry in enumerate(reader.sequence(data, "classes")):
        location = f"classes[{i}]"
        class_id = str(reader.get(entry, "class_id", location))
        classes.append((class_id, reader.integer(reader.get(entry, "orbit_size", location), f"{location}.orbit_size")))
    return TowerPartition(tuple(classes))


def _class_map(reader: DocumentReader, key: str) -> Dict[str, Any]:
    data = reader.get(reader.data, key) if isinstance(reader.data, dict) and key in reader.data else reader.data
    if not isinstance(data, dict):
        raise reader.error(key, "expected an object keyed by class_id")
    return data


def read_floor_sets(path: str, partition: TowerPartition) -> List[FloorSet]:
    """{"floors": {class_id: [floors]}} or {"sets": [{class_id: [floors]}, ...]}"""
    reader = DocumentReader(path)
    if isinstance(reader.data, dict) and "sets" in reader.data:
        raw = [(f"sets[{i}]", s) for i, s in enumerate(reader.sequence(reader.data["sets"], "sets"))]
    else:
        raw = [("floors", _class_map(reader, "floors"))]
    sets = []
    for location, mapping in raw:
        if not isinstance(mapping, dict):
            raise reader.error(location, "expected an object keyed by class_id")
        floors = {str(c): reader.integers(v, f"{location}.{c}") for c, v in mapping.items()}
        sets.append(FloorSet(partition, floors))
    return sets


def read_heights(path: str) -> Dict[str, Any]:
    """{"heights": {class_id: int | [int per floor]}}"""
    reader = DocumentReader(path)
    heights = {}
    for c, value in _class_map(reader, "heights").items():
        location = f"heights.{c}"
        heights[str(c)] = reader.integers(value, location) if isinstance(value, list) else reader.integer(value, location)
    return heights


def read_zn_config(path: str) -> Tuple[MarkerConfiguration, int]:
    """{"N": 2, "mode": "grid", "m": 8, "window": 64, "n": 1} or an explicit marker list"""
    reader = DocumentReader(path)
    data = reader.data
    n = reader.integer(reader.get(data, "n", default=1), "n")
    mode = reader.get(data, "mode", default="grid")
    if mode == "grid":
        N = reader.integer(reader.get(data, "N"), "N")
        m = reader.integer(reader.get(data, "m"), "m")
        window = reader.get(data, "window", default=None)
        return MarkerConfiguration.grid(N, m, None if window is None else reader.integer(window, "window")), n
    if mode == "explicit":
        period = reader.integers(reader.get(data, "period"), "period")
        markers = [reader.integers(p, f"markers[{i}]") for i, p in enumerate(reader.sequence(reader.get(data, "markers"), "markers"))]
        return MarkerConfiguration.explicit(markers, period), n
    raise reader.error("mode", f"unknown mode {json.dumps(mode)}, expected grid or explicit")
