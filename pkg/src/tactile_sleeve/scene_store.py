"""Loading bundled and on-disk scene files."""

from __future__ import annotations

from importlib import resources
from pathlib import Path
from typing import Dict, List

from .sim import Scene


def bundled_scene_names() -> List[str]:
    root = resources.files("tactile_sleeve") / "scenes"
    return sorted(p.name[:-len(".json")] for p in root.iterdir()
                  if p.name.endswith(".json"))


def load_bundled_scene(name: str) -> Scene:
    root = resources.files("tactile_sleeve") / "scenes"
    path = root / f"{name}.json"
    return Scene.from_json(path.read_text())


def load_scene(name_or_path: str) -> Scene:
    """Bundled scene name, or a path to a scene JSON file."""
    p = Path(name_or_path)
    if p.suffix == ".json" or p.exists():
        return Scene.from_json(p.read_text())
    if name_or_path in bundled_scene_names():
        return load_bundled_scene(name_or_path)
    raise FileNotFoundError(f"no scene named or at {name_or_path!r}")


def load_scene_dir(path: str) -> Dict[str, Scene]:
    scenes = {}
    for p in sorted(Path(path).glob("*.json")):
        scene = Scene.from_json(p.read_text())
        scenes[scene.name] = scene
    return scenes


__all__ = ["bundled_scene_names", "load_bundled_scene", "load_scene",
           "load_scene_dir"]
