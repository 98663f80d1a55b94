import copy

import pytest

from fiberforge.pipeline import data_path
from fiberforge.schemas import SchemaError, detect_kind, pointer, validate

BUNDLED = sorted(p.name for p in data_path("exotic_cp2_5.json").parent.glob("*.json"))


@pytest.mark.parametrize("name", BUNDLED)
def test_bundled_files_validate(name, bundled):
    doc = bundled(name)
    kind = detect_kind(doc)
    assert kind is not None
    validate(doc, kind)


def test_pointer_escaping():
    assert pointer(["a/b", 0, "c~d"]) == "/a~1b/0/c~0d"
    assert pointer([]) == ""


@pytest.mark.parametrize("path,value,where", [
    (("moves", 2, "kind"), "teleport", "/moves/2/kind"),
    (("source", 1, "exp"), 0, "/source/1/exp"),
    (("surface", "genus"), 0, "/surface/genus"),
])
def test_script_errors_point_at_the_field(bundled, path, value, where):
    doc = copy.deepcopy(bundled("lemma21_g1.json"))
    node = doc
    for key in path[:-1]:
        node = node[key]
    node[path[-1]] = value
    with pytest.raises(SchemaError) as info:
        validate(doc, "script")
    assert info.value.pointer == where


def test_exotic_config_errors(bundled):
    doc = copy.deepcopy(bundled("exotic_cp2_5.json"))
    doc["z_classes"][5]["genus"] = -1
    with pytest.raises(SchemaError) as info:
        validate(doc, "exotic")
    assert info.value.pointer == "/z_classes/5/genus"


def test_transcript_blowup_needs_center(bundled):
    doc = copy.deepcopy(bundled("blowup_transcript.json"))
    first = next(i for i, s in enumerate(doc["steps"]) if s["op"] == "blowup")
    del doc["steps"][first]["center"]
    with pytest.raises(SchemaError) as info:
        validate(doc, "transcript")
    assert info.value.pointer == f"/steps/{first}"
