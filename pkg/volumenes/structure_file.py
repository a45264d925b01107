"""Archivos de definición de estructuras (TOML) y familias incorporadas."""

from __future__ import annotations

import logging
try:
    import tomllib
except ModuleNotFoundError:  # Python < 3.11
    import tomli as tomllib
from dataclasses import dataclass
from pathlib import Path

from volumenes.contact import (
    FrameField,
    NormalFormSpec,
    build_normal_frame,
    heisenberg_frame,
)
from volumenes.errors import ConfigError, ExpressionSyntaxError
from volumenes.polyexpr import RationalField3, parse_poly

logger = logging.getLogger(__name__)

FAMILIES = ("heisenberg", "normal_form", "frame")

BUILTIN_TEXT = {
    "heisenberg": 'family = "heisenberg"\n',
    "nf-radial": 'family = "normal_form"\nbeta = "0"\ngamma = "x^2 + y^2"\n',
    "nf-half": 'family = "normal_form"\nbeta = "0"\ngamma = "0.5*x^2 + 0.5*y^2"\n',
    "nf-traceless": 'family = "normal_form"\nbeta = "0"\ngamma = "x^2 - y^2"\n',
    "nf-mixed": 'family = "normal_form"\nbeta = "0"\ngamma = "x^2 + 2*x*y"\n',
    "nf-general": 'family = "normal_form"\nbeta = "x + y*z"\ngamma = "x^2 + y^2 + x^2*z + y^3"\n',
}


@dataclass(frozen=True)
class StructureDefinition:
    family: str
    name: str
    beta: str = "0"
    gamma: str = "0"
    x1: tuple[str, str, str] | None = None
    x2: tuple[str, str, str] | None = None


def _expression(data: dict, key: str) -> str:
    value = data.get(key, "0")
    if not isinstance(value, (str, int, float)) or isinstance(value, bool):
        raise ConfigError(f"'{key}' debe ser una expresión entre comillas")
    text = str(value)
    try:
        parse_poly(text)
    except ExpressionSyntaxError as e:
        raise ConfigError(f"'{key}': {e}") from e
    return text


def _field(data: dict, key: str) -> tuple[str, str, str]:
    value = data.get(key)
    if not isinstance(value, list) or len(value) != 3:
        raise ConfigError(f"'{key}' debe ser una lista de tres expresiones")
    return tuple(_expression({key: v}, key) for v in value)  # type: ignore[return-value]


def parse_structure(text: str, default_name: str = "") -> StructureDefinition:
    try:
        data = tomllib.loads(text)
    except tomllib.TOMLDecodeError as e:
        raise ConfigError(f"Archivo de estructura inválido: {e}") from e

    family = data.get("family")
    if family not in FAMILIES:
        raise ConfigError(f"'family' debe ser uno de {', '.join(FAMILIES)} (se obtuvo {family!r})")
    allowed = {"family", "name"} | {
        "heisenberg": set(),
        "normal_form": {"beta", "gamma"},
        "frame": {"x1", "x2"},
    }[family]
    extra = sorted(set(data) - allowed)
    if extra:
        raise ConfigError(f"Clave no reconocida para family={family}: '{extra[0]}'")

    name = data.get("name", default_name or family)
    if not isinstance(name, str):
        raise ConfigError("'name' debe ser texto")

    if family == "normal_form":
        return StructureDefinition(family, name, beta=_expression(data, "beta"), gamma=_expression(data, "gamma"))
    if family == "frame":
        return StructureDefinition(family, name, x1=_field(data, "x1"), x2=_field(data, "x2"))
    return StructureDefinition(family, name)


def load_structure(path: str | Path) -> StructureDefinition:
    p = Path(path)
    try:
        text = p.read_text(encoding="utf-8")
    except OSError as e:
        raise ConfigError(f"No se pudo leer {p}: {e}") from e
    logger.info(f"Estructura leída de {p}")
    return parse_structure(text, default_name=p.stem)


def builtin_structure(name: str) -> StructureDefinition:
    text = BUILTIN_TEXT.get(name)
    if text is None:
        raise ConfigError(f"Familia desconocida '{name}'; disponibles: {', '.join(BUILTIN_TEXT)}")
    return parse_structure(text, default_name=name)


def build_frame(defn: StructureDefinition) -> FrameField:
    if defn.family == "heisenberg":
        frame = heisenberg_frame()
        return FrameField(frame.X1, frame.X2, name=defn.name)
    if defn.family == "normal_form":
        return build_normal_frame(NormalFormSpec.parse(defn.beta, defn.gamma), name=defn.name)
    return FrameField(RationalField3.parse(defn.x1), RationalField3.parse(defn.x2), name=defn.name)


def _quoted(text: str) -> str:
    return '"' + text.replace("\\", "\\\\").replace('"', '\\"') + '"'


def to_text(defn: StructureDefinition) -> str:
    """Forma impresa canónica: las expresiones se normalizan con el formateador de polinomios."""
    lines = [f"family = {_quoted(defn.family)}", f"name = {_quoted(defn.name)}"]
    if defn.family == "normal_form":
        lines.append(f"beta = {_quoted(str(parse_poly(defn.beta)))}")
        lines.append(f"gamma = {_quoted(str(parse_poly(defn.gamma)))}")
    elif defn.family == "frame":
        for key, comps in (("x1", defn.x1), ("x2", defn.x2)):
            inner = ", ".join(_quoted(str(parse_poly(c))) for c in comps)
            lines.append(f"{key} = [{inner}]")
    return "\n".join(lines) + "\n"
