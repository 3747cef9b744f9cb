"""Name-keyed registries for pluggable components."""

from __future__ import annotations

from typing import Any, Callable, ClassVar, Generic, TypeVar

T = TypeVar("T")


class Registry(Generic[T]):
    """Class-level registry mapping names to components.

    Each subclass keeps its own table, so solver names and aggregation
    names never collide.

    Example:
        >>> class ShapeRegistry(Registry[type]):
        ...     kind = "shape"
        >>> @ShapeRegistry.register("square")
        ... class Square:
        ...     ...
        >>> ShapeRegistry.require("square") is Square
        True
    """

    kind: ClassVar[str] = "component"
    _entries: ClassVar[dict[str, Any]] = {}

    def __init_subclass__(cls, **kwargs: Any) -> None:
        super().__init_subclass__(**kwargs)
        cls._entries = {}

    @classmethod
    def register(cls, name: str) -> Callable[[T], T]:
        """Register a component under ``name``.

        Can be used as a decorator:
            @SolverRegistry.register("st-pifp")
            class SequentialSolver(Solver):
                ...

        Args:
            name: The registry key.

        Returns:
            A decorator that stores the component and returns it unchanged.

        Raises:
            ValueError: If ``name`` is already registered.
        """

        def decorator(component: T) -> T:
            if name in cls._entries:
                raise ValueError(f"{cls.kind.capitalize()} '{name}' is already registered")
            cls._entries[name] = component
            return component

        return decorator

    @classmethod
    def get(cls, name: str) -> T | None:
        return cls._entries.get(name)

    @classmethod
    def require(cls, name: str) -> T:
        """Look up ``name``, raising if it is unknown.

        Raises:
            ValueError: If nothing is registered under ``name``.
        """
        if name not in cls._entries:
            raise ValueError(
                f"Unknown {cls.kind} '{name}'. Available: {sorted(cls._entries)}"
            )
        return cls._entries[name]

    @classmethod
    def get_all(cls) -> dict[str, T]:
        return dict(cls._entries)

    @classmethod
    def names(cls) -> list[str]:
        return sorted(cls._entries)

    @classmethod
    def clear(cls) -> None:
        """Clear all registered components. Useful for testing."""
        cls._entries.clear()
