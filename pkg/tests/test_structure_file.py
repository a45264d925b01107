import pytest

from volumenes.contact import heisenberg_frame
from volumenes.errors import ConfigError
from volumenes.structure_file import (
    BUILTIN_TEXT,
    StructureDefinition,
    build_frame,
    builtin_structure,
    load_structure,
    parse_structure,
    to_text,
)


def test_builtin_families_parse():
    for name in BUILTIN_TEXT:
        defn = builtin_structure(name)
        assert defn.name == name
        build_frame(defn)
    radial = builtin_structure("nf-radial")
    assert radial == StructureDefinition("normal_form", "nf-radial", beta="0", gamma="x^2 + y^2")


def test_unknown_builtin():
    with pytest.raises(ConfigError) as exc:
        builtin_structure("esfera")
    assert "nf-radial" in str(exc.value)


def test_frame_family():
    text = 'family = "frame"\nname = "h"\nx1 = ["1", "0", "-0.5*y"]\nx2 = ["0", "1", "0.5*x"]\n'
    frame = build_frame(parse_structure(text))
    assert frame.X1 == heisenberg_frame().X1
    assert frame.name == "h"


def test_numbers_are_accepted_as_expressions():
    defn = parse_structure('family = "normal_form"\nbeta = 0\ngamma = "x^2"\n')
    assert defn.beta == "0"
    assert defn.name == "normal_form"


@pytest.mark.parametrize(
    "text, fragment",
    [
        ("family = ", "inválido"),
        ('family = "esfera"\n', "family"),
        ('name = "x"\n', "family"),
        ('family = "heisenberg"\ngamma = "x^2"\n', "'gamma'"),
        ('family = "normal_form"\ngamma = "x^^2"\n', "'gamma'"),
        ('family = "normal_form"\nbeta = true\n', "'beta'"),
        ('family = "frame"\nx1 = ["1", "0"]\nx2 = ["0", "1", "x"]\n', "'x1'"),
        ('family = "heisenberg"\nname = 3\n', "'name'"),
    ],
)
def test_invalid_files(text, fragment):
    with pytest.raises(ConfigError) as exc:
        parse_structure(text)
    assert fragment in str(exc.value)


def test_load_uses_file_stem(tmp_path):
    path = tmp_path / "mi_estructura.toml"
    path.write_text('family = "normal_form"\ngamma = "x^2 - y^2"\n', encoding="utf-8")
    defn = load_structure(path)
    assert defn.name == "mi_estructura"
    assert defn.gamma == "x^2 - y^2"
    with pytest.raises(ConfigError):
        load_structure(tmp_path / "no_existe.toml")


def test_canonical_text():
    defn = parse_structure('family = "normal_form"\nname = "n"\ngamma = "y*y + x**2"\n')
    text = to_text(defn)
    assert text == 'family = "normal_form"\nname = "n"\nbeta = "0"\ngamma = "x^2 + y^2"\n'
    assert to_text(parse_structure(text)) == text
    frame = builtin_structure("heisenberg")
    assert parse_structure(to_text(frame)) == frame
