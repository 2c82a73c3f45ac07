"""Dielectric media and their relative permittivities.

A :class:`MaterialRegistry` is an immutable, ordered collection of
:class:`Material` entries. Every registry starts from the six built-in
media; :meth:`MaterialRegistry.register` returns a new registry instead of
mutating the receiver, so registries can be shared freely between workers.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass
from pathlib import Path
from typing import Iterable, Iterator

from .errors import ConfigError, DuplicateName, InvalidPermittivity, UnknownMaterial


@dataclass(frozen=True)
class Material:
    name: str
    eps_r: float

    def __post_init__(self):
        eps = float(self.eps_r)
        if not math.isfinite(eps) or eps <= 0.0:
            raise InvalidPermittivity(
                f"material {self.name!r}: eps_r must be > 0, got {self.eps_r!r}"
            )
        object.__setattr__(self, "eps_r", eps)


BUILTIN_MATERIALS = (
    Material("air", 1.0058986),
    Material("brick", 3.3),
    Material("rockwool", 4.7),
    Material("concrete", 4.96),
    Material("glass", 7.6),
    Material("water", 80.103),
)


class MaterialRegistry:
    """Ordered, case-insensitive lookup table of media."""

    def __init__(self, extra: Iterable[Material] = ()):
        self._extra = tuple(extra)
        seen = set()
        for m in BUILTIN_MATERIALS + self._extra:
            key = m.name.lower()
            if key in seen:
                raise DuplicateName(f"material name {m.name!r} already registered")
            seen.add(key)
        self._entries = BUILTIN_MATERIALS + self._extra
        self._index = {m.name.lower(): m for m in self._entries}

    @property
    def entries(self) -> tuple[Material, ...]:
        return self._entries

    def names(self) -> list[str]:
        return [m.name for m in self._entries]

    def __len__(self):
        return len(self._entries)

    def __iter__(self) -> Iterator[Material]:
        return iter(self._entries)

    def __contains__(self, name) -> bool:
        return isinstance(name, str) and name.lower() in self._index

    def lookup(self, name: str) -> Material:
        try:
            return self._index[name.lower()]
        except (KeyError, AttributeError):
            raise UnknownMaterial(name, self.names()) from None

    def register(self, material: Material) -> "MaterialRegistry":
        if material.name.lower() in self._index:
            raise DuplicateName(f"material name {material.name!r} already registered")
        return MaterialRegistry(self._extra + (material,))

    def extend(self, materials: Iterable[Material]) -> "MaterialRegistry":
        reg = self
        for m in materials:
            reg = reg.register(m)
        return reg


def default_registry() -> MaterialRegistry:
    return MaterialRegistry()


def lookup(registry: MaterialRegistry, name: str) -> Material:
    return registry.lookup(name)


def register(registry: MaterialRegistry, material: Material) -> MaterialRegistry:
    return registry.register(material)


def load_materials(path) -> list[Material]:
    """Read a user materials file: a JSON array of ``{"name", "eps_r"}`` objects."""
    path = Path(path)
    try:
        with path.open(encoding="utf-8") as fh:
            data = json.load(fh)
    except json.JSONDecodeError as exc:
        raise ConfigError(f"{path}: invalid JSON: {exc}") from None
    if not isinstance(data, list):
        raise ConfigError(f"{path}: expected a JSON array of materials")
    out = []
    for i, item in enumerate(data):
        if not isinstance(item, dict) or "name" not in item or "eps_r" not in item:
            raise ConfigError(f"{path}: entry {i} needs 'name' and 'eps_r'")
        if isinstance(item["eps_r"], bool) or not isinstance(item["eps_r"], (int, float)):
            raise InvalidPermittivity(f"{path}: entry {i} eps_r must be a number")
        out.append(Material(str(item["name"]), item["eps_r"]))
    return out


def registry_from_file(path, base: MaterialRegistry | None = None) -> MaterialRegistry:
    base = base if base is not None else default_registry()
    return base.extend(load_materials(path))
