"""Tests for the component registry."""

import pytest

from equiscope.core import Registry


class ShapeRegistry(Registry[type]):
    kind = "shape"


class ColorRegistry(Registry[str]):
    kind = "color"


@pytest.fixture(autouse=True)
def clean_registries():
    ShapeRegistry.clear()
    ColorRegistry.clear()
    yield
    ShapeRegistry.clear()
    ColorRegistry.clear()


class TestRegistry:
    """Tests for Registry subclasses."""

    def test_register_and_require(self):
        """Decorated components are returned unchanged and found by name."""

        @ShapeRegistry.register("square")
        class Square:
            pass

        assert ShapeRegistry.require("square") is Square
        assert ShapeRegistry.get("square") is Square
        assert ShapeRegistry.names() == ["square"]

    def test_duplicate_name(self):
        """Registering a name twice raises."""
        ShapeRegistry.register("circle")(object)
        with pytest.raises(ValueError, match="Shape 'circle' is already registered"):
            ShapeRegistry.register("circle")(object)

    def test_unknown_name(self):
        """require() lists the available names."""
        ShapeRegistry.register("b")(int)
        ShapeRegistry.register("a")(str)
        with pytest.raises(ValueError, match=r"Unknown shape 'c'. Available: \['a', 'b'\]"):
            ShapeRegistry.require("c")
        assert ShapeRegistry.get("c") is None

    def test_subclasses_are_separate(self):
        """Each subclass keeps its own table."""
        ShapeRegistry.register("red")(int)

        assert ColorRegistry.names() == []
        assert set(ShapeRegistry.get_all()) == {"red"}
